//! Randomized systematic codes from point-line incidences of the affine
//! plane over `F_q`, `q` prime.
//!
//! Points `(a, b)` are indexed `a*q + b`. Vertical line `c` is `x = c`.
//! The non-vertical line with slope `s` and intercept `b` is
//! `{(a, s*a + b)}` and has index `s*q + b`. Information bucket `l` holds
//! the points of vertical lines `l*w .. (l+1)*w - 1` for grouping width
//! `w`; parity bucket `l` holds one sum column per selected line of slope
//! class `l`, where a slope `sigma` in `1..=q` (slope 0 counted as `q`)
//! belongs to class `ceil(sigma / w)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::{is_prime, PrimeField};
use crate::format::Provenance;
use crate::verify::{certify_plan, plan_from_sets, BatchRequest, RecoveryPlan, ResponseModel};

/// Identifier of the generator and stream layout used for sampling.
pub const RNG_ID: &str = "chacha8-rand_chacha0.3-seed_from_u64-v1";

const LINE_STREAM: u64 = 1;
const POINT_STREAM: u64 = 2;
const TRIAL_STREAM_BASE: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Line {
    Vertical(u64),
    Sloped { slope: u64, intercept: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePlane {
    q: u64,
}

impl AffinePlane {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn point_count(&self) -> usize {
        (self.q * self.q) as usize
    }

    pub fn point(&self, a: u64, b: u64) -> usize {
        (a * self.q + b) as usize
    }

    pub fn coords(&self, p: usize) -> (u64, u64) {
        let p = p as u64;
        (p / self.q, p % self.q)
    }

    /// Vertical lines first, then sloped lines by (slope, intercept).
    pub fn lines(&self) -> Vec<Line> {
        let q = self.q;
        (0..q)
            .map(Line::Vertical)
            .chain((0..q).flat_map(|slope| (0..q).map(move |intercept| Line::Sloped { slope, intercept })))
            .collect()
    }

    pub fn sloped_index(&self, slope: u64, intercept: u64) -> usize {
        (slope * self.q + intercept) as usize
    }

    pub fn sloped_line(&self, idx: usize) -> Line {
        let idx = idx as u64;
        Line::Sloped {
            slope: idx / self.q,
            intercept: idx % self.q,
        }
    }

    /// Points of a line, by increasing `a` (then `b` for vertical lines).
    pub fn points_on(&self, line: Line) -> Vec<usize> {
        let q = self.q;
        match line {
            Line::Vertical(c) => (0..q).map(|b| self.point(c, b)).collect(),
            Line::Sloped { slope, intercept } => {
                (0..q).map(|a| self.point(a, (slope * a + intercept) % q)).collect()
            }
        }
    }

    pub fn contains(&self, line: Line, p: usize) -> bool {
        let (a, b) = self.coords(p);
        match line {
            Line::Vertical(c) => a == c,
            Line::Sloped { slope, intercept } => (slope * a + intercept) % self.q == b,
        }
    }

    /// The sloped line through `p` with the given slope.
    pub fn sloped_through(&self, p: usize, slope: u64) -> Line {
        let (a, b) = self.coords(p);
        let q = self.q;
        Line::Sloped {
            slope,
            intercept: (b + q * q - slope * a % q) % q,
        }
    }
}

pub fn affine_plane(q: u64) -> Result<AffinePlane> {
    if !is_prime(q) {
        return Err(BacError::NotPrime(q));
    }
    if q > 1 << 16 {
        return Err(BacError::InvalidParams(format!("plane order {q} is too large")));
    }
    Ok(AffinePlane { q })
}

/// Suggested selection probabilities, clamped into `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefaultParams {
    pub p1: f64,
    pub p2: f64,
    pub p1_raw: f64,
    pub p2_raw: f64,
    /// Set when either raw value had to be clamped.
    pub clamped: bool,
    /// Whether `(ks)^{3/2} < n^{1/4} / (32 ln n)` holds.
    pub in_theory_regime: bool,
}

pub fn default_params(q: u64, k: u64, s: u64) -> Result<DefaultParams> {
    if !is_prime(q) {
        return Err(BacError::NotPrime(q));
    }
    if k == 0 || s == 0 {
        return Err(BacError::InvalidParams("k and s must be positive".into()));
    }
    let n = (q * q) as f64;
    let ks = (k * s) as f64;
    let ln_n = n.ln();
    let p1_raw = 32.0 * (ks.powi(3) / q as f64).sqrt() * ln_n;
    let p2_raw = 1.0 / (2.0 * (ks * q as f64).sqrt());
    let p1 = p1_raw.min(1.0);
    let p2 = p2_raw.min(1.0);
    Ok(DefaultParams {
        p1,
        p2,
        p1_raw,
        p2_raw,
        clamped: p1 != p1_raw || p2 != p2_raw,
        in_theory_regime: ks.powf(1.5) < n.powf(0.25) / (32.0 * ln_n),
    })
}

/// `n + 64 (ks)^{3/2} n^{3/4} ln n` with `n = q^2`.
pub fn redundancy_bound(q: u64, k: u64, s: u64) -> f64 {
    let n = (q * q) as f64;
    n + 64.0 * ((k * s) as f64).powf(1.5) * n.powf(0.75) * n.ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffinePlaneCode {
    pub plane: AffinePlane,
    pub s: u64,
    pub m: usize,
    pub p1: f64,
    pub p2: f64,
    pub seed: u64,
    /// Per sloped line (indexed `slope*q + intercept`): drawn into `F`.
    pub selected: Vec<bool>,
    /// Per sloped line: the drawn subset `P(L)`, drawn for every line.
    pub point_sets: Vec<Vec<usize>>,
    /// For parity bucket `l` (0-based among parity buckets), the sloped
    /// line index behind each column.
    pub parity_lines: Vec<Vec<usize>>,
    pub code: CodeSpec,
}

impl AffinePlaneCode {
    pub fn half(&self) -> usize {
        self.m / 2
    }

    pub fn n(&self) -> usize {
        self.plane.point_count()
    }

    /// Number of selected lines `|F|`.
    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    /// 0-based information bucket holding point `p`.
    pub fn info_bucket(&self, p: usize) -> usize {
        let (a, _) = self.plane.coords(p);
        (a / self.s) as usize
    }

    /// 0-based slope class of a slope in `[0, q)`.
    pub fn slope_class(&self, slope: u64) -> usize {
        let sigma = if slope == 0 { self.plane.q } else { slope };
        (sigma.div_ceil(self.s) - 1) as usize
    }

    /// 0-based index of the parity bucket for a sloped line.
    pub fn parity_bucket(&self, line: usize) -> usize {
        match self.plane.sloped_line(line) {
            Line::Sloped { slope, .. } => self.half() + self.slope_class(slope),
            Line::Vertical(_) => unreachable!("sloped index"),
        }
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::Affine {
            q: self.plane.q,
            s: self.s,
            p1: self.p1,
            p2: self.p2,
            seed: self.seed,
            rng: RNG_ID.to_string(),
        }
    }

    /// Regenerates the code recorded in a provenance block.
    pub fn from_provenance(p: &Provenance) -> Result<Self> {
        match p {
            Provenance::Affine {
                q,
                s,
                p1,
                p2,
                seed,
                rng,
            } => {
                if rng != RNG_ID {
                    return Err(BacError::Format(format!(
                        "code was sampled with {rng:?}, this build provides {RNG_ID:?}"
                    )));
                }
                generate(*q, *s, *p1, *p2, *seed)
            }
            other => Err(BacError::Format(format!("not an affine provenance: {other:?}"))),
        }
    }
}

/// Samples the construction. `k` only takes part in validation (`k <= m`).
pub fn random_bac(q: u64, k: usize, s: u64, p1: f64, p2: f64, seed: u64) -> Result<AffinePlaneCode> {
    let apc = generate(q, s, p1, p2, seed)?;
    if k == 0 || k > apc.m {
        return Err(BacError::TooManyRequests { k, m: apc.m });
    }
    Ok(apc)
}

fn generate(q: u64, s: u64, p1: f64, p2: f64, seed: u64) -> Result<AffinePlaneCode> {
    let plane = affine_plane(q)?;
    if s == 0 || s > q {
        return Err(BacError::InvalidParams(format!("need 1 <= s <= q, got s={s}, q={q}")));
    }
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(BacError::InvalidParams(format!("{name} must lie in (0, 1], got {p}")));
        }
    }
    let half = q.div_ceil(s) as usize;
    let m = 2 * half;
    let n = plane.point_count();
    let lines = (q * q) as usize;

    let mut line_rng = ChaCha8Rng::seed_from_u64(seed);
    line_rng.set_stream(LINE_STREAM);
    let selected: Vec<bool> = (0..lines).map(|_| line_rng.gen_bool(p1)).collect();

    let mut point_rng = ChaCha8Rng::seed_from_u64(seed);
    point_rng.set_stream(POINT_STREAM);
    let point_sets: Vec<Vec<usize>> = (0..lines)
        .map(|l| {
            plane
                .points_on(plane.sloped_line(l))
                .into_iter()
                .filter(|_| point_rng.gen_bool(p2))
                .collect()
        })
        .collect();

    let mut apc = AffinePlaneCode {
        plane,
        s,
        m,
        p1,
        p2,
        seed,
        selected,
        point_sets,
        parity_lines: vec![Vec::new(); half],
        code: CodeSpec::from_sums(PrimeField::GF2, 1, &[vec![vec![0]]])?,
    };
    let mut buckets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); m];
    for p in 0..n {
        buckets[apc.info_bucket(p)].push(vec![p]);
    }
    for l in 0..lines {
        if apc.selected[l] && !apc.point_sets[l].is_empty() {
            let b = apc.parity_bucket(l);
            buckets[b].push(apc.point_sets[l].clone());
            apc.parity_lines[b - half].push(l);
        }
    }
    apc.code = CodeSpec::from_sums(PrimeField::GF2, n, &buckets)?;
    Ok(apc)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Disables the direct own-bucket option, leaving only line-based sets.
    pub lines_only: bool,
}

/// Recovery sets from the line-based greedy procedure, or `None` when some
/// request finds no admissible line.
pub fn greedy_sets(
    apc: &AffinePlaneCode,
    request: &BatchRequest,
    opts: GreedyOptions,
) -> Result<Option<Vec<Vec<usize>>>> {
    let n = apc.n();
    let m = apc.m;
    if request.k() > m {
        return Err(BacError::TooManyRequests { k: request.k(), m });
    }
    if let Some(&i) = request.indices().iter().find(|&&i| i >= n) {
        return Err(BacError::SymbolOutOfRange { index: i + 1, n });
    }
    let mut distinct = request.indices().to_vec();
    distinct.dedup();
    let q = apc.plane.q();
    let mut used = vec![false; m];
    let mut sets = Vec::with_capacity(request.k());

    for &x in request.indices() {
        let own = apc.info_bucket(x);
        if !opts.lines_only && !used[own] {
            used[own] = true;
            sets.push(vec![own]);
            continue;
        }
        let mut found = None;
        for slope in 0..q {
            let Line::Sloped { slope, intercept } = apc.plane.sloped_through(x, slope) else {
                unreachable!()
            };
            let l = apc.plane.sloped_index(slope, intercept);
            if !apc.selected[l] || !apc.point_sets[l].contains(&x) {
                continue;
            }
            let line = Line::Sloped { slope, intercept };
            if distinct.iter().any(|&y| y != x && apc.plane.contains(line, y)) {
                continue;
            }
            let mut r: Vec<usize> = apc.point_sets[l]
                .iter()
                .filter(|&&p| p != x)
                .map(|&p| apc.info_bucket(p))
                .collect();
            r.push(apc.parity_bucket(l));
            r.sort_unstable();
            r.dedup();
            if r.iter().all(|&b| !used[b]) {
                found = Some(r);
                break;
            }
        }
        match found {
            Some(r) => {
                for &b in &r {
                    used[b] = true;
                }
                sets.push(r);
            }
            None => return Ok(None),
        }
    }
    let last = sets.last_mut().expect("request is non-empty");
    last.extend((0..m).filter(|&b| !used[b]));
    last.sort_unstable();
    Ok(Some(sets))
}

/// Greedy sets turned into a certified plan. `None` if the procedure
/// finds no sets or, which would indicate a bug, the certificate fails.
pub fn greedy_plan(
    apc: &AffinePlaneCode,
    request: &BatchRequest,
    opts: GreedyOptions,
) -> Result<Option<RecoveryPlan>> {
    let Some(sets) = greedy_sets(apc, request, opts)? else {
        return Ok(None);
    };
    let plan = plan_from_sets(&apc.code, request, sets, ResponseModel::Linear);
    Ok(match plan {
        Some(p) if certify_plan(&apc.code, request, &p, ResponseModel::Linear)? => Some(p),
        _ => None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Every plan the greedy procedure returned passed certification.
    pub all_certified: bool,
    /// Sampled requests (1-based) the procedure could not serve, by trial.
    pub failures: Vec<(usize, Vec<usize>)>,
    pub seed: u64,
}

/// Draws `trials` requests of `k` independent uniform symbols (sorted into
/// a multiset) and runs the greedy procedure on each. Trial `i` uses its own
/// stream of the seeded generator, so results do not depend on scheduling.
pub fn trial_verify(
    apc: &AffinePlaneCode,
    k: usize,
    trials: usize,
    seed: u64,
    opts: GreedyOptions,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(BacError::InvalidParams("trials must be at least 1".into()));
    }
    if k == 0 || k > apc.m {
        return Err(BacError::TooManyRequests { k, m: apc.m });
    }
    let n = apc.n();
    let outcomes: Vec<(usize, BatchRequest, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(TRIAL_STREAM_BASE + t as u64);
            let idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            let r = BatchRequest::new(idx, n)?;
            let sets = greedy_sets(apc, &r, opts)?;
            let (ok, certified) = match sets {
                None => (false, true),
                Some(sets) => match plan_from_sets(&apc.code, &r, sets, ResponseModel::Linear) {
                    Some(p) => {
                        let c = certify_plan(&apc.code, &r, &p, ResponseModel::Linear)?;
                        (c, c)
                    }
                    None => (false, false),
                },
            };
            Ok((t, r, ok, certified))
        })
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|o| o.2).count();
    let all_certified = outcomes.iter().all(|o| o.3);
    let failures = outcomes
        .into_iter()
        .filter(|o| !o.2)
        .map(|(t, r, _, _)| (t, r.one_based()))
        .collect();
    Ok(TrialReport {
        k,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        all_certified,
        failures,
        seed,
    })
}
