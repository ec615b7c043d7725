use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use bacforge_core::affine::{random_bac, trial_verify, AffinePlaneCode, GreedyOptions};
use bacforge_core::bounds::{bound_report, bound_table, MRule};
use bacforge_core::combinatorics::Multisets;
use bacforge_core::constructions::{
    claimed_k, compose_concat, compose_parallel, compose_repeat, cyclic_shift_code,
    enumerate_good_vectors, good_vector_2t1, good_vector_code, is_good_vector, max_batch_k,
    parity_code_k2, single_request_code, trivial_replication, uniform_code, GoodVector,
};
use bacforge_core::sim::{load_stats, serve_batch, serve_sweep, sweep_csv_rows, Planner};
use bacforge_core::{
    affine::default_params, verify_bac, verify_pir, BatchRequest, CodeDocument, FVector,
    PrimeField, Provenance, ResponseModel,
};
use serde_json::json;

use crate::{
    BoundsArgs, BoundsSub, Cli, Command, ComposeArgs, ComposeOp, ConstructArgs, Family,
    GoodvecArgs, MRuleArg, Mode, PlannerArg, SimulateArgs, TableArgs, TrialArgs, VerifyArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Construct(a) => construct(a),
        Command::Verify(a) => verify(a),
        Command::Bounds(a) => bounds(a),
        Command::Goodvec(a) => goodvec(a),
        Command::Compose(a) => compose(a),
        Command::Simulate(a) => simulate(a),
        Command::RandomTrials(a) => random_trials(a),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("--{flag} is required for {family}"))
}

fn read_doc(path: &Path) -> Result<CodeDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CodeDocument::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn model(m: Mode) -> ResponseModel {
    match m {
        Mode::Linear => ResponseModel::Linear,
        Mode::Projection => ResponseModel::ProjectionOnly,
    }
}

fn fresh_seed(given: Option<u64>) -> u64 {
    given.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn construct(a: ConstructArgs) -> Result<ExitCode> {
    let field = PrimeField::new(a.field)?;
    let name = format!("{:?}", a.family).to_lowercase();
    let name = name.as_str();
    let (code, provenance) = match a.family {
        Family::Replication => {
            let (n, k) = (need(a.n, "n", name)?, need(a.k, "k", name)?);
            (trivial_replication(n, k, field)?, Provenance::Replication { n, k })
        }
        Family::Single => {
            let (n, m) = (need(a.n, "n", name)?, need(a.m, "m", name)?);
            (single_request_code(n, m, field)?, Provenance::Single { n, m })
        }
        Family::Parity => {
            let m = need(a.m, "m", name)?;
            (parity_code_k2(m, field)?, Provenance::Parity { m })
        }
        Family::Cyclic => {
            let (n, k, m) = (need(a.n, "n", name)?, need(a.k, "k", name)?, need(a.m, "m", name)?);
            (cyclic_shift_code(n, k, m, field)?, Provenance::Cyclic { n, k, m })
        }
        Family::Uniform => {
            let (n, k) = (need(a.n, "n", name)?, need(a.k, "k", name)?);
            (uniform_code(n, k, field)?, Provenance::Uniform { n, k })
        }
        Family::Goodvec => {
            let v = match (&a.v, a.t) {
                (Some(v), _) => GoodVector::from_entries(v.clone())?,
                (None, Some(t)) => good_vector_2t1(t),
                (None, None) => bail!("goodvec needs --v or --t"),
            };
            let prov = Provenance::Goodvec { v: v.entries().to_vec() };
            (good_vector_code(&v, field)?, prov)
        }
        Family::Affine => {
            if a.field != 2 {
                bail!("affine-plane codes are binary; --field must be 2");
            }
            let q = need(a.q, "q", name)?;
            let s = a.s.unwrap_or(1);
            let k = a.k.unwrap_or(1);
            let (p1, p2) = match (a.p1, a.p2) {
                (Some(p1), Some(p2)) => (p1, p2),
                (p1, p2) => {
                    let k = need(a.k, "k", "affine default probabilities")?;
                    let d = default_params(q, k as u64, s)?;
                    if d.clamped {
                        eprintln!("default probabilities clamped: p1_raw={:.4}, p2_raw={:.4}", d.p1_raw, d.p2_raw);
                    }
                    (p1.unwrap_or(d.p1), p2.unwrap_or(d.p2))
                }
            };
            let seed = fresh_seed(a.seed);
            let apc = random_bac(q, k, s, p1, p2, seed)?;
            eprintln!("selected lines |F| = {}", apc.selected_count());
            (apc.code.clone(), apc.provenance())
        }
    };
    eprintln!(
        "{name}: n={} N={} m={} bucket sizes {:?}",
        code.n(),
        code.total_length(),
        code.m(),
        code.bucket_sizes()
    );
    emit(&CodeDocument::new(code, Some(provenance)).to_json(), a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(j).build()?;
            Ok(pool.install(f))
        }
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let doc = read_doc(&a.code)?;
    let k = match (a.k, doc.provenance.as_ref().and_then(claimed_k)) {
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => bail!("--k is required: the code records no batch size"),
    };
    let m = model(a.mode);
    let report = with_jobs(a.jobs, || {
        if a.pir_only {
            verify_pir(&doc.code, k, m)
        } else {
            verify_bac(&doc.code, k, m)
        }
    })??;
    println!("{}", report.to_json());
    eprintln!(
        "{}: {} requests, {} failures, k={k}, {:.1} ms",
        if report.passed() { "pass" } else { "fail" },
        report.total_requests,
        report.failures.len(),
        report.elapsed.as_secs_f64() * 1e3
    );
    if let Some(r) = report.first_failure() {
        eprintln!("first failing request: {:?}", r.one_based());
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_range(s: &str, flag: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("--{flag} must look like a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().with_context(|| format!("--{flag} start"))?;
    let b: usize = b.trim().parse().with_context(|| format!("--{flag} end"))?;
    if a > b {
        bail!("--{flag} is empty: {a} > {b}");
    }
    Ok(a..=b)
}

fn bounds(a: BoundsArgs) -> Result<ExitCode> {
    if let Some(BoundsSub::Table(t)) = a.table {
        return bounds_table(t);
    }
    let n = need(a.n, "n", "bounds")?;
    let k = need(a.k, "k", "bounds")?;
    let m = need(a.m, "m", "bounds")?;
    let r = bound_report(n, k, m)?;
    println!("{}", serde_json::to_string_pretty(&r.to_json_value())?);
    eprintln!(
        "lower {} ({}) -> {}, upper {}{}",
        r.lower,
        r.lower_source,
        r.lower_ceil,
        r.upper.as_ref().map_or("none".to_string(), |u| format!("{} ({})", u.n_total, u.family)),
        if r.optimal { ", optimal" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

fn bounds_table(t: TableArgs) -> Result<ExitCode> {
    let rule = match t.m_rule {
        MRuleArg::KPlus1 => MRule::KPlus1,
        MRuleArg::KPlus2 => MRule::KPlus2,
        MRuleArg::All => MRule::All,
    };
    let rows = bound_table(parse_range(&t.n_range, "n-range")?, parse_range(&t.k_range, "k-range")?, rule)?;
    if let Some(path) = &t.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(bacforge_core::BoundReport::CSV_HEADER)?;
        for r in &rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
    }
    let json: Vec<_> = rows.iter().map(|r| r.to_json_value()).collect();
    println!("{}", serde_json::to_string(&json)?);
    let optimal = rows.iter().filter(|r| r.optimal).count();
    eprintln!("{} rows, {optimal} optimal", rows.len());
    Ok(ExitCode::SUCCESS)
}

fn goodvec(a: GoodvecArgs) -> Result<ExitCode> {
    if a.enumerate {
        let len = a.len.expect("clap enforces --len");
        let all = enumerate_good_vectors(a.t, len)?;
        let list: Vec<&[usize]> = all.iter().map(|v| v.entries()).collect();
        println!("{}", serde_json::to_string(&list)?);
        eprintln!("{} good vectors for t={} of length {len}", list.len(), a.t);
        return Ok(ExitCode::SUCCESS);
    }
    let v = good_vector_2t1(a.t);
    let th = max_batch_k(a.t);
    let last: serde_json::Map<String, serde_json::Value> = v
        .last_occurrences()
        .into_iter()
        .map(|(j, p)| (j.to_string(), json!(p)))
        .collect();
    let out = json!({
        "t": a.t,
        "vector": v.entries(),
        "valid": is_good_vector(v.entries(), a.t),
        "last_occurrence": last,
        "code": {"n": v.code_length_n(), "N": v.code_length_n() * (a.t + 1), "m": v.code_length_n()},
        "max_batch_k": {"exact": th.exact, "closed_form": th.closed_form},
        "pir_k": 2 * a.t + 1,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    eprintln!("t={}: vector of length {}, batch size up to {}", a.t, v.len(), th.exact);
    Ok(ExitCode::SUCCESS)
}

fn compose(a: ComposeArgs) -> Result<ExitCode> {
    let first = read_doc(&a.a)?.code;
    let code = match a.op {
        ComposeOp::Repeat => {
            if a.b.is_some() {
                bail!("repeat takes one code and --count");
            }
            compose_repeat(&first, need(a.count, "count", "repeat")?)?
        }
        op => {
            let b = a.b.as_ref().ok_or_else(|| anyhow!("{op:?} needs two code files"))?;
            let second = read_doc(b)?.code;
            if op == ComposeOp::Parallel {
                compose_parallel(&first, &second)?
            } else {
                compose_concat(&first, &second)?
            }
        }
    };
    eprintln!("composed: n={} N={} m={}", code.n(), code.total_length(), code.m());
    emit(&CodeDocument::new(code, None).to_json(), a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let doc = read_doc(&a.code)?;
    let code = &doc.code;
    if a.data.len() != code.n() {
        bail!("--data has {} entries, the code stores n={}", a.data.len(), code.n());
    }
    let data = FVector::from_residues(a.data.iter().map(|&x| x % code.field().p()).collect(), code.field());
    let planner = match a.planner {
        PlannerArg::Exhaustive => Planner::Exhaustive,
        PlannerArg::Certified => Planner::Certified(
            doc.provenance
                .clone()
                .ok_or_else(|| anyhow!("the certified planner needs a code with recorded provenance"))?,
        ),
    };
    let m = model(a.mode);
    if let Some(k) = a.sweep {
        let requests: Vec<BatchRequest> = Multisets::new(code.n(), k)
            .map(|i| BatchRequest::new(i, code.n()))
            .collect::<Result<_, _>>()?;
        let (reports, _) = serve_sweep(code, &data, &requests, &planner, m)?;
        if let Some(path) = &a.csv {
            let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
            w.write_record(["request", "node", "load", "symbols_read"])?;
            for row in sweep_csv_rows(&reports) {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        let stats = load_stats(&reports);
        println!("{}", serde_json::to_string_pretty(&stats)?);
        let exact = reports.iter().all(|r| r.exact);
        eprintln!("{} batches, max load {}, exact {exact}", stats.batches, stats.max_load);
        return Ok(if exact { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    let idx = a.request.ok_or_else(|| anyhow!("--request or --sweep is required"))?;
    let request = BatchRequest::from_one_based(&idx, code.n())?;
    let report = serve_batch(code, &data, &request, &planner, m)?;
    println!("{}", report.to_json());
    eprintln!(
        "recovered {:?} via sets {:?}, exact {}",
        report.recovered, report.sets, report.exact
    );
    Ok(if report.exact { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn random_trials(a: TrialArgs) -> Result<ExitCode> {
    let doc = read_doc(&a.code)?;
    let prov = doc
        .provenance
        .as_ref()
        .filter(|p| matches!(p, Provenance::Affine { .. }))
        .ok_or_else(|| anyhow!("random-trials needs an affine-plane code with its provenance"))?;
    let apc = AffinePlaneCode::from_provenance(prov)?;
    if apc.code != doc.code {
        bail!("code does not match its recorded construction parameters");
    }
    let seed = fresh_seed(a.seed);
    let opts = GreedyOptions {
        lines_only: a.lines_only,
    };
    let report = trial_verify(&apc, a.k, a.trials, seed, opts)?;
    println!("{}", serde_json::to_string(&report)?);
    eprintln!(
        "{} of {} sampled requests served ({:.2}%), all plans certified: {}",
        report.successes,
        report.trials,
        100.0 * report.success_rate,
        report.all_certified
    );
    let ok = report.all_certified && report.successes == report.trials;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
