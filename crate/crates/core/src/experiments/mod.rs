//! Monte-Carlo harness: satisfiability-probability estimation with
//! Wilson confidence intervals, prefix-coupled density scans, regime
//! probes over a size ladder, and balls-and-bins trial batteries.
//!
//! Trials are independent work units keyed by a per-trial RNG stream, so
//! results are identical no matter how many worker threads execute them.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::ballsbins::{exact_binomial_moment, poisson_limit_param, throw, BallsError};
use crate::generator::{trial_rng, ClauseSampler, GeneratorConfig};
use crate::model::{validate, Clause, Instance, Layout, Literal, Mixture, ModelError};
use crate::solver::{solve_dpll, SolveResult, SolverError, TwoSatSolver};

mod plan;

pub use plan::{ExperimentPlan, PlanKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Balls(#[from] BallsError),
    #[error("mixture of width {width} needs the DPLL solver")]
    WidthUnsupported { width: u32 },
    #[error("community size {h} does not divide n={n}")]
    CommunitySize { n: u32, h: u32 },
    #[error("plan line {line}: {detail}")]
    Plan { line: usize, detail: String },
}

/// Which decision procedure a cell's trials run through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    TwoSat,
    Dpll { budget: u64 },
}

/// One experiment cell: a parameter point plus its trial outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub n: u32,
    pub communities: u32,
    pub community_size: u32,
    pub m: usize,
    pub mixture: String,
    pub trials: u32,
    pub sat: u32,
    pub unsat: u32,
    pub unknown: u32,
    pub sat_fraction: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_solve_ms: f64,
    pub seed: u64,
}

/// 95% Wilson score interval for `successes` hits in `samples` draws.
/// Degenerates to the vacuous interval when there are no samples.
pub fn wilson_interval(successes: u32, samples: u32) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = f64::from(samples);
    let p = f64::from(successes) / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn stream(group: u64, trial: u32) -> u64 {
    (group << 32) | u64::from(trial)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

struct Tally {
    sat: u32,
    unsat: u32,
    unknown: u32,
    solve_nanos: u64,
}

impl Tally {
    fn of(outcomes: impl IntoIterator<Item = (Verdict, u64)>) -> Tally {
        let mut t = Tally { sat: 0, unsat: 0, unknown: 0, solve_nanos: 0 };
        for (verdict, nanos) in outcomes {
            match verdict {
                Verdict::Sat => t.sat += 1,
                Verdict::Unsat => t.unsat += 1,
                Verdict::Unknown => t.unknown += 1,
            }
            t.solve_nanos += nanos;
        }
        t
    }
}

fn make_cell(
    layout: &Layout,
    mixture: &Mixture,
    m: usize,
    tally: &Tally,
    trials: u32,
    timing: bool,
    seed: u64,
) -> CellResult {
    let determinate = tally.sat + tally.unsat;
    let (ci_lo, ci_hi) = wilson_interval(tally.sat, determinate);
    CellResult {
        n: layout.var_count(),
        communities: layout.communities(),
        community_size: layout.community_size(),
        m,
        mixture: mixture.to_string(),
        trials,
        sat: tally.sat,
        unsat: tally.unsat,
        unknown: tally.unknown,
        sat_fraction: f64::from(tally.sat) / f64::from(determinate),
        ci_lo,
        ci_hi,
        mean_solve_ms: if timing {
            tally.solve_nanos as f64 / f64::from(trials.max(1)) / 1e6
        } else {
            0.0
        },
        seed,
    }
}

fn require_two_cnf(mixture: &Mixture) -> Result<(), ExperimentError> {
    let width = mixture.max_width();
    if width > 2 {
        return Err(ExperimentError::WidthUnsupported { width });
    }
    Ok(())
}

fn pair_of(literals: &[Literal]) -> (i32, i32) {
    match *literals {
        [l] => (l.code(), l.code()),
        [a, b] => (a.code(), b.code()),
        _ => unreachable!("two-CNF path validated the mixture width"),
    }
}

/// Runs `trials` independent instances of `config` and tallies outcomes
/// into one cell. DPLL budget exhaustion lands in the `unknown` column,
/// never in SAT or UNSAT, and the satisfiable fraction is taken over the
/// determinate trials only.
pub fn estimate_sat_probability(
    config: &GeneratorConfig,
    trials: u32,
    solver: SolverChoice,
) -> Result<CellResult, ExperimentError> {
    single_cell(config, trials, solver, 0, true)
}

fn single_cell(
    config: &GeneratorConfig,
    trials: u32,
    solver: SolverChoice,
    group: u64,
    timing: bool,
) -> Result<CellResult, ExperimentError> {
    let layout = *config.layout();
    let mixture = config.mixture().clone();
    let m = config.clause_count();
    let seed = config.seed();
    validate(&layout, &mixture)?;

    let outcomes: Vec<(Verdict, u64)> = match solver {
        SolverChoice::TwoSat => {
            require_two_cnf(&mixture)?;
            (0..trials)
                .into_par_iter()
                .map_init(
                    || TwoSatScratch::new(&layout, &mixture),
                    |scratch, trial| {
                        let mut rng = trial_rng(seed, stream(group, trial));
                        scratch.generate(m, &mut rng);
                        let start = Instant::now();
                        let sat = scratch.solver.decide_pairs(layout.var_count(), &scratch.pairs);
                        let verdict = if sat { Verdict::Sat } else { Verdict::Unsat };
                        (verdict, start.elapsed().as_nanos() as u64)
                    },
                )
                .collect()
        }
        SolverChoice::Dpll { budget } => (0..trials)
            .into_par_iter()
            .map_init(
                || ClauseSampler::new(&layout, &mixture).expect("validated above"),
                |sampler, trial| {
                    let mut rng = trial_rng(seed, stream(group, trial));
                    let clauses: Vec<Clause> = (0..m).map(|_| sampler.sample(&mut rng)).collect();
                    let instance =
                        Instance::new(layout, clauses).expect("sampler stays inside the layout");
                    let start = Instant::now();
                    let verdict = match solve_dpll(&instance, budget) {
                        Ok(SolveResult::Sat(_)) => Verdict::Sat,
                        Ok(SolveResult::Unsat(_)) => Verdict::Unsat,
                        Err(SolverError::BudgetExceeded { .. }) => Verdict::Unknown,
                        Err(other) => unreachable!("DPLL on a valid instance: {other}"),
                    };
                    (verdict, start.elapsed().as_nanos() as u64)
                },
            )
            .collect(),
    };

    Ok(make_cell(&layout, &mixture, m, &Tally::of(outcomes), trials, timing, seed))
}

/// Per-worker generation and solving buffers for the two-CNF path, reused
/// across every trial the worker executes.
struct TwoSatScratch {
    sampler: ClauseSampler,
    solver: TwoSatSolver,
    pairs: Vec<(i32, i32)>,
    literals: Vec<Literal>,
}

impl TwoSatScratch {
    fn new(layout: &Layout, mixture: &Mixture) -> TwoSatScratch {
        TwoSatScratch {
            sampler: ClauseSampler::new(layout, mixture).expect("mixture validated by caller"),
            solver: TwoSatSolver::new(),
            pairs: Vec::new(),
            literals: Vec::new(),
        }
    }

    fn generate(&mut self, m: usize, rng: &mut impl rand::Rng) {
        self.pairs.clear();
        self.pairs.reserve(m);
        for _ in 0..m {
            self.sampler.sample_into(rng, &mut self.literals);
            self.pairs.push(pair_of(&self.literals));
        }
    }
}

/// Largest index T such that the first `ms[T-1]` of the generated pairs
/// are satisfiable (0 when even the shortest prefix is not). Adding
/// clauses only removes satisfying assignments, so the SAT indicator over
/// prefixes is monotone and binary search is exact. The probe order is
/// biased toward longer prefixes, where refutations abort early and cost
/// far less than full satisfiable scans.
fn threshold_index(solver: &mut TwoSatSolver, n: u32, pairs: &[(i32, i32)], ms: &[usize]) -> usize {
    let mut lo = 0usize;
    let mut hi = ms.len();
    while lo < hi {
        let mid = (lo + hi) / 2 + 1;
        if solver.decide_pairs(n, &pairs[..ms[mid - 1]]) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Shared-prefix density profile: each trial generates `ms.last()`
/// clauses once and decides satisfiability of every prefix length in
/// `ms`, giving one cell per entry on coupled randomness.
fn profile_cells(
    layout: &Layout,
    mixture: &Mixture,
    ms: &[usize],
    trials: u32,
    seed: u64,
    group: u64,
    timing: bool,
) -> Result<Vec<CellResult>, ExperimentError> {
    validate(layout, mixture)?;
    require_two_cnf(mixture)?;
    debug_assert!(ms.windows(2).all(|w| w[0] < w[1]), "prefix lengths must ascend");
    let m_max = ms.last().copied().unwrap_or(0);

    let outcomes: Vec<(usize, u64)> = (0..trials)
        .into_par_iter()
        .map_init(
            || TwoSatScratch::new(layout, mixture),
            |scratch, trial| {
                let mut rng = trial_rng(seed, stream(group, trial));
                scratch.generate(m_max, &mut rng);
                let start = Instant::now();
                let t = threshold_index(
                    &mut scratch.solver,
                    layout.var_count(),
                    &scratch.pairs,
                    ms,
                );
                (t, start.elapsed().as_nanos() as u64)
            },
        )
        .collect();

    let total_nanos: u64 = outcomes.iter().map(|&(_, nanos)| nanos).sum();
    Ok(ms
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let sat = outcomes.iter().filter(|&&(t, _)| t > k).count() as u32;
            let tally = Tally {
                sat,
                unsat: trials - sat,
                unknown: 0,
                // one bisection resolves every cell of the profile, so
                // the per-trial cost is shared rather than per-cell
                solve_nanos: total_nanos,
            };
            make_cell(layout, mixture, m, &tally, trials, timing, seed)
        })
        .collect())
}

/// Clause count at window coordinate c: m = n + c * n^(2/3).
pub fn window_m(n: u32, c: f64) -> usize {
    (f64::from(n) + c * f64::from(n).powf(2.0 / 3.0)).round().max(0.0) as usize
}

/// Scaling-window scan: for each (communities, mixture) model, one
/// prefix-coupled cell per window coordinate in `c_values`. Rows come out
/// model-major with c ascending.
pub fn scan_window(
    n: u32,
    c_values: &[f64],
    models: &[(u32, Mixture)],
    trials: u32,
    seed: u64,
) -> Result<Vec<CellResult>, ExperimentError> {
    window_scan(n, c_values, models, trials, seed, true)
}

fn window_scan(
    n: u32,
    c_values: &[f64],
    models: &[(u32, Mixture)],
    trials: u32,
    seed: u64,
    timing: bool,
) -> Result<Vec<CellResult>, ExperimentError> {
    let mut cs: Vec<f64> = c_values.to_vec();
    cs.sort_by(|a, b| a.partial_cmp(b).expect("window coordinates must be ordered"));
    let mut ms: Vec<usize> = cs.iter().map(|&c| window_m(n, c)).collect();
    ms.dedup();

    let mut cells = Vec::with_capacity(models.len() * ms.len());
    for (group, (communities, mixture)) in models.iter().enumerate() {
        let layout = Layout::split(n, *communities)?;
        cells.extend(profile_cells(&layout, mixture, &ms, trials, seed, group as u64, timing)?);
    }
    Ok(cells)
}

/// How community size scales with instance size in a regime probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HRule {
    /// Constant community size; every probed n must be divisible by it.
    Fixed(u32),
    /// One community covering all variables.
    Single,
    /// The divisor of n closest to sqrt(n), taking the smaller on ties.
    NearSqrt,
}

impl HRule {
    pub fn layout_for(self, n: u32) -> Result<Layout, ExperimentError> {
        let h = match self {
            HRule::Fixed(h) => h,
            HRule::Single => n,
            HRule::NearSqrt => nearest_divisor_to_sqrt(n),
        };
        if h == 0 || n % h != 0 {
            return Err(ExperimentError::CommunitySize { n, h });
        }
        Ok(Layout::new(n / h, h)?)
    }
}

fn nearest_divisor_to_sqrt(n: u32) -> u32 {
    let root = f64::from(n).sqrt();
    let mut best = 1u32;
    let mut best_dist = f64::INFINITY;
    let mut d = 1u32;
    while u64::from(d) * u64::from(d) <= u64::from(n) {
        if n % d == 0 {
            for h in [d, n / d] {
                let dist = (f64::from(h) - root).abs();
                if dist < best_dist || (dist == best_dist && h < best) {
                    best = h;
                    best_dist = dist;
                }
            }
        }
        d += 1;
    }
    best
}

/// How clause count scales with instance size in a regime probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MRule {
    Explicit(usize),
    /// m = alpha * n.
    Alpha(f64),
    /// m = beta * n^gamma.
    Power { beta: f64, gamma: f64 },
    /// m = n + c * n^(2/3).
    Window { c: f64 },
}

impl MRule {
    pub fn clause_count_for(self, n: u32) -> usize {
        match self {
            MRule::Explicit(m) => m,
            MRule::Alpha(a) => (a * f64::from(n)).round().max(0.0) as usize,
            MRule::Power { beta, gamma } => {
                (beta * f64::from(n).powf(gamma)).round().max(0.0) as usize
            }
            MRule::Window { c } => window_m(n, c),
        }
    }
}

/// A (community rule, clause rule, mixture) triple probed across sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSpec {
    pub h_rule: HRule,
    pub m_rule: MRule,
    pub mixture: Mixture,
}

/// One cell per instance size, all drawn from the same regime rules, so
/// the satisfiable fraction's trend over n can be inspected.
pub fn scan_regimes(
    spec: &RegimeSpec,
    sizes: &[u32],
    trials: u32,
    seed: u64,
    solver: SolverChoice,
) -> Result<Vec<CellResult>, ExperimentError> {
    regime_scan(spec, sizes, trials, seed, solver, true)
}

fn regime_scan(
    spec: &RegimeSpec,
    sizes: &[u32],
    trials: u32,
    seed: u64,
    solver: SolverChoice,
    timing: bool,
) -> Result<Vec<CellResult>, ExperimentError> {
    sizes
        .iter()
        .enumerate()
        .map(|(group, &n)| {
            let layout = spec.h_rule.layout_for(n)?;
            let m = spec.m_rule.clause_count_for(n);
            let config = GeneratorConfig::new(layout, m, spec.mixture.clone(), seed)?;
            single_cell(&config, trials, solver, group as u64, timing)
        })
        .collect()
}

/// How the ball count is chosen for a balls-and-bins battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallsRule {
    Explicit(u64),
    /// M = C * B^(1-1/s), the critical scaling for the statistic X_B.
    Critical { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallsRow {
    pub trial: u32,
    pub max_load: u32,
    pub x_exact_s: u64,
}

/// Per-trial occupancy statistics plus the factorial-moment comparison
/// the Poisson limit predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct BallsBattery {
    pub bins: u64,
    pub balls: u64,
    pub s: u32,
    pub rows: Vec<BallsRow>,
    /// Empirical mean of X_B.
    pub empirical_t1: f64,
    /// Empirical mean of C(X_B, 2).
    pub empirical_t2: f64,
    pub exact_t1: f64,
    pub exact_t2: f64,
    /// Poisson limit parameter implied by C = M / B^(1-1/s).
    pub lambda: f64,
}

/// Throws M balls into B bins `trials` times, recording max load and the
/// number of bins holding exactly s balls, then compares empirical
/// factorial moments t=1,2 with their exact values.
pub fn balls_battery(
    bins: u64,
    rule: BallsRule,
    s: u32,
    trials: u32,
    seed: u64,
) -> Result<BallsBattery, ExperimentError> {
    if s == 0 {
        return Err(ExperimentError::Balls(BallsError::InfeasibleParameters(
            "the battery statistic counts bins with exactly s >= 1 balls",
        )));
    }
    let balls = match rule {
        BallsRule::Explicit(m) => m,
        BallsRule::Critical { c } => {
            (c * (bins as f64).powf(1.0 - 1.0 / f64::from(s))).round().max(0.0) as u64
        }
    };
    if bins == 0 {
        return Err(ExperimentError::Balls(BallsError::ZeroBins));
    }

    let rows: Vec<BallsRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, stream(0, trial));
            let occupancy = throw(balls, bins, &mut rng).expect("bins checked nonzero");
            BallsRow {
                trial,
                max_load: occupancy.max_load(),
                x_exact_s: occupancy.count_bins_with_exactly(s),
            }
        })
        .collect();

    let count = f64::from(trials.max(1));
    let empirical_t1 = rows.iter().map(|r| r.x_exact_s as f64).sum::<f64>() / count;
    let empirical_t2 = rows
        .iter()
        .map(|r| (r.x_exact_s * r.x_exact_s.saturating_sub(1)) as f64 / 2.0)
        .sum::<f64>()
        / count;
    let exact_t1 = exact_binomial_moment(bins, balls, s, 1)?.to_f64();
    let exact_t2 = if bins >= 2 { exact_binomial_moment(bins, balls, s, 2)?.to_f64() } else { 0.0 };
    let implied_c = balls as f64 / (bins as f64).powf(1.0 - 1.0 / f64::from(s));

    Ok(BallsBattery {
        bins,
        balls,
        s,
        rows,
        empirical_t1,
        empirical_t2,
        exact_t1,
        exact_t2,
        lambda: poisson_limit_param(implied_c, s),
    })
}

/// Writes cells in the pinned result schema, one row per cell.
pub fn write_cells_csv(cells: &[CellResult], writer: impl Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "n",
        "B",
        "h",
        "m",
        "mixture",
        "trials",
        "sat",
        "unsat",
        "unknown",
        "sat_fraction",
        "ci_lo",
        "ci_hi",
        "mean_solve_ms",
        "seed",
    ])
    .map_err(io::Error::other)?;
    for cell in cells {
        w.write_record([
            cell.n.to_string(),
            cell.communities.to_string(),
            cell.community_size.to_string(),
            cell.m.to_string(),
            cell.mixture.clone(),
            cell.trials.to_string(),
            cell.sat.to_string(),
            cell.unsat.to_string(),
            cell.unknown.to_string(),
            format!("{:.6}", cell.sat_fraction),
            format!("{:.6}", cell.ci_lo),
            format!("{:.6}", cell.ci_hi),
            format!("{:.3}", cell.mean_solve_ms),
            cell.seed.to_string(),
        ])
        .map_err(io::Error::other)?;
    }
    w.flush()
}

/// Writes per-trial battery rows, then the moment comparison as trailing
/// `#` comment lines so the column data stays machine-clean.
pub fn write_balls_csv(battery: &BallsBattery, mut writer: impl Write) -> io::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut writer);
        w.write_record(["trial", "max_load", "x_exact_s"]).map_err(io::Error::other)?;
        for row in &battery.rows {
            w.write_record([
                row.trial.to_string(),
                row.max_load.to_string(),
                row.x_exact_s.to_string(),
            ])
            .map_err(io::Error::other)?;
        }
        w.flush()?;
    }
    writeln!(writer, "# empirical_t1={:.6}", battery.empirical_t1)?;
    writeln!(writer, "# exact_t1={:.6}", battery.exact_t1)?;
    writeln!(writer, "# empirical_t2={:.6}", battery.empirical_t2)?;
    writeln!(writer, "# exact_t2={:.6}", battery.exact_t2)?;
    writeln!(writer, "# lambda={:.6}", battery.lambda)?;
    writer.flush()
}
