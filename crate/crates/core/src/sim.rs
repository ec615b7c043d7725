//! An in-process storage cluster: one simulated node per bucket, each
//! answering a batch with a single locally computed field element.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::code::CodeSpec;
use crate::constructions::certified_plan;
use crate::error::{BacError, Result};
use crate::field::FVector;
use crate::format::Provenance;
use crate::verify::{certify_plan, BatchRequest, ExhaustivePlanner, RecoveryPlan, ResponseModel};

/// One storage node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeState {
    pub values: FVector,
    pub response_count: usize,
    /// Stored symbols touched by responses so far.
    pub symbols_read: usize,
}

/// Where recovery plans come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Planner {
    Exhaustive,
    /// The family planner of the construction that produced the code.
    Certified(Provenance),
}

impl Planner {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Certified(_) => "certified",
        }
    }
}

/// What one node did in one batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeActivity {
    /// 1-based bucket index.
    pub node: usize,
    /// 1-based position in the request this node helped serve.
    pub serves: usize,
    pub response: u64,
    pub load: usize,
    pub symbols_read: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    /// 1-based requested indices.
    pub request: Vec<usize>,
    pub model: ResponseModel,
    pub recovered: Vec<u64>,
    pub expected: Vec<u64>,
    pub exact: bool,
    pub nodes: Vec<NodeActivity>,
    pub max_load: usize,
    pub mean_load: f64,
    /// Recovery sets, 1-based.
    pub sets: Vec<Vec<usize>>,
}

impl SimReport {
    pub fn loads(&self) -> Vec<usize> {
        self.nodes.iter().map(|a| a.load).collect()
    }

    pub fn symbols_read(&self) -> Vec<usize> {
        self.nodes.iter().map(|a| a.symbols_read).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A running cluster holding one encoded data vector.
#[derive(Clone, Debug)]
pub struct Cluster<'a> {
    code: &'a CodeSpec,
    data: FVector,
    nodes: Vec<NodeState>,
}

impl<'a> Cluster<'a> {
    pub fn new(code: &'a CodeSpec, data: &FVector) -> Result<Self> {
        let word = code.encode(data)?;
        let nodes = word
            .values
            .into_iter()
            .map(|values| NodeState {
                values,
                response_count: 0,
                symbols_read: 0,
            })
            .collect();
        let data = FVector::from_residues(data.entries().to_vec(), code.field());
        Ok(Self { code, data, nodes })
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// Serves one batch under an explicit plan. The plan is certified
    /// first; nodes answer in bucket order.
    pub fn serve(&mut self, request: &BatchRequest, plan: &RecoveryPlan, model: ResponseModel) -> Result<SimReport> {
        if !certify_plan(self.code, request, plan, model)? {
            return Err(BacError::NoPlan(request.one_based()));
        }
        let f = self.code.field();
        let owner = plan.owner_of_buckets(self.code.m());
        let before: Vec<usize> = self.nodes.iter().map(|s| s.response_count).collect();
        let mut replies = Vec::with_capacity(self.nodes.len());
        let mut activity = Vec::with_capacity(self.nodes.len());
        for (l, node) in self.nodes.iter_mut().enumerate() {
            let resp = &plan.responses[l];
            let value = node.values.dot(resp, f)?;
            let read = resp.weight();
            node.response_count += 1;
            node.symbols_read += read;
            replies.push(value);
            activity.push(NodeActivity {
                node: l + 1,
                serves: owner[l].map_or(0, |j| j + 1),
                response: value,
                load: 1,
                symbols_read: read,
            });
        }
        for (l, node) in self.nodes.iter().enumerate() {
            assert_eq!(node.response_count, before[l] + 1, "node {} must answer exactly once", l + 1);
        }

        let recovered: Vec<u64> = plan
            .sets
            .iter()
            .zip(&plan.combos)
            .map(|(set, combo)| {
                set.iter()
                    .zip(combo)
                    .fold(0, |acc, (&l, &c)| f.add(acc, f.mul(c, replies[l])))
            })
            .collect();
        let expected: Vec<u64> = request.indices().iter().map(|&i| self.data.entries()[i]).collect();
        let m = activity.len();
        let total: usize = activity.iter().map(|a| a.load).sum();
        Ok(SimReport {
            request: request.one_based(),
            model,
            exact: recovered == expected,
            recovered,
            expected,
            max_load: activity.iter().map(|a| a.load).max().unwrap_or(0),
            mean_load: if m == 0 { 0.0 } else { total as f64 / m as f64 },
            nodes: activity,
            sets: plan.sets_one_based(),
        })
    }
}

fn plan_for(
    code: &CodeSpec,
    request: &BatchRequest,
    planner: &Planner,
    model: ResponseModel,
) -> Result<RecoveryPlan> {
    match planner {
        Planner::Exhaustive => ExhaustivePlanner::new(code, model)?
            .find(request)?
            .ok_or_else(|| BacError::NoPlan(request.one_based())),
        Planner::Certified(_) if model != ResponseModel::Linear => Err(BacError::InvalidParams(
            "family planners produce linear-response plans only".into(),
        )),
        Planner::Certified(prov) => certified_plan(code, prov, request),
    }
}

/// Encodes `data`, plans `request` and serves it once.
pub fn serve_batch(
    code: &CodeSpec,
    data: &FVector,
    request: &BatchRequest,
    planner: &Planner,
    model: ResponseModel,
) -> Result<SimReport> {
    let mut cluster = Cluster::new(code, data)?;
    let plan = plan_for(code, request, planner, model)?;
    cluster.serve(request, &plan, model)
}

/// Serves every request in `requests` against one cluster, in order. Plans
/// are computed in parallel; serving is sequential.
pub fn serve_sweep(
    code: &CodeSpec,
    data: &FVector,
    requests: &[BatchRequest],
    planner: &Planner,
    model: ResponseModel,
) -> Result<(Vec<SimReport>, Vec<NodeState>)> {
    let plans: Vec<RecoveryPlan> = match planner {
        Planner::Exhaustive => {
            let search = ExhaustivePlanner::new(code, model)?;
            requests
                .par_iter()
                .map(|r| search.find(r)?.ok_or_else(|| BacError::NoPlan(r.one_based())))
                .collect::<Result<_>>()?
        }
        _ => requests
            .par_iter()
            .map(|r| plan_for(code, r, planner, model))
            .collect::<Result<_>>()?,
    };
    let mut cluster = Cluster::new(code, data)?;
    let reports = requests
        .iter()
        .zip(&plans)
        .map(|(r, p)| cluster.serve(r, p, model))
        .collect::<Result<Vec<_>>>()?;
    Ok((reports, cluster.nodes))
}

/// CSV rows `request,node,load,symbols_read` for a sweep; the request is
/// written as space-separated 1-based indices.
pub fn sweep_csv_rows(reports: &[SimReport]) -> Vec<[String; 4]> {
    reports
        .iter()
        .flat_map(|r| {
            let req = r.request.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            r.nodes.iter().map(move |a| {
                [req.clone(), a.node.to_string(), a.load.to_string(), a.symbols_read.to_string()]
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LoadStats {
    pub batches: usize,
    /// Responses sent by each node across all batches.
    pub responses: Vec<usize>,
    pub max_load: usize,
    pub mean_load: f64,
    /// Total symbols read by each node.
    pub symbols_read: Vec<usize>,
    /// How many single responses read a given number of symbols.
    pub symbols_read_histogram: BTreeMap<usize, usize>,
}

pub fn load_stats(reports: &[SimReport]) -> LoadStats {
    let m = reports.iter().map(|r| r.nodes.len()).max().unwrap_or(0);
    let mut stats = LoadStats {
        batches: reports.len(),
        responses: vec![0; m],
        symbols_read: vec![0; m],
        ..LoadStats::default()
    };
    for r in reports {
        for (l, a) in r.nodes.iter().enumerate() {
            stats.responses[l] += a.load;
            stats.symbols_read[l] += a.symbols_read;
            *stats.symbols_read_histogram.entry(a.symbols_read).or_default() += 1;
        }
    }
    stats.max_load = stats.responses.iter().copied().max().unwrap_or(0);
    if m > 0 {
        stats.mean_load = stats.responses.iter().sum::<usize>() as f64 / m as f64;
    }
    stats
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub request: Vec<usize>,
    pub linear_symbols_read: Vec<usize>,
    pub projection_symbols_read: Vec<usize>,
    pub linear_loads: Vec<usize>,
    pub projection_loads: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelComparison {
    pub linear_n_total: usize,
    pub projection_n_total: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Serves the same sweep on a linear-response code and a projection-only
/// code over the zero data vector and lines the results up.
pub fn compare_models(
    code_linear: &CodeSpec,
    code_projection: &CodeSpec,
    requests: &[BatchRequest],
) -> Result<ModelComparison> {
    if code_linear.n() != code_projection.n() {
        return Err(BacError::LengthMismatch {
            expected: code_linear.n(),
            got: code_projection.n(),
        });
    }
    let zero = FVector::zeros(code_linear.n());
    let (lin, _) = serve_sweep(code_linear, &zero, requests, &Planner::Exhaustive, ResponseModel::Linear)?;
    let (proj, _) = serve_sweep(
        code_projection,
        &zero,
        requests,
        &Planner::Exhaustive,
        ResponseModel::ProjectionOnly,
    )?;
    let rows = lin
        .iter()
        .zip(&proj)
        .map(|(a, b)| ComparisonRow {
            request: a.request.clone(),
            linear_symbols_read: a.symbols_read(),
            projection_symbols_read: b.symbols_read(),
            linear_loads: a.loads(),
            projection_loads: b.loads(),
        })
        .collect();
    Ok(ModelComparison {
        linear_n_total: code_linear.total_length(),
        projection_n_total: code_projection.total_length(),
        rows,
    })
}
