//! Batch array codes and PIR array codes over prime fields: generators,
//! exact verifiers, certified recovery planners, bounds and a simple
//! storage simulator.

pub mod affine;
pub mod bounds;
pub mod code;
pub mod combinatorics;
pub mod constructions;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod format;
pub mod sim;
pub mod verify;

pub use code::{Bucket, CodeSpec, Codeword};
pub use error::{BacError, Result};
pub use field::{ff_inverse, rank, span_solve, FVector, PrimeField};
pub use format::{CodeDocument, Provenance};
pub use verify::{
    certify_plan, check_subset_spanning, find_plan, plan_from_sets, verify_bac, verify_pir,
    BatchRequest, RecoveryPlan, ResponseModel, VerificationReport,
};
pub use affine::{
    affine_plane, default_params, greedy_plan, greedy_sets, random_bac, trial_verify, AffinePlane,
    AffinePlaneCode, GreedyOptions, TrialReport,
};
pub use bounds::{
    best_lower_bound, bound_report, bound_table, lb_general, lb_kplus2, lb_midrange, ub_constructions,
    BoundReport, LowerSource, MRule,
};
pub use constructions::{
    certified_plan, compose_concat, compose_parallel, compose_repeat, cyclic_shift_code,
    good_vector_code, parity_code_k2, regenerate, single_request_code, trivial_replication,
    uniform_code,
};
pub use sim::{compare_models, load_stats, serve_batch, NodeState, Planner, SimReport};
