//! The acceptance gate: eleven checks covering the headline reproduction
//! table, the model-equivalence finding, threshold sanity, occupancy
//! limits, the analytic constants, the structural witnesses, both solver
//! oracles, and harness determinism. Each test prints one
//! `ACCEPTANCE PASS/FAIL` line; run with `-- --nocapture` to see them all.

mod support;

use std::sync::OnceLock;
use std::time::Instant;

use commsat_core::analysis::{first_moment_log_upper, solve_dc, solve_u};
use commsat_core::ballsbins::{exact_binomial_moment, throw};
use commsat_core::experiments::{
    balls_battery, estimate_sat_probability, scan_window, write_cells_csv, BallsRule, CellResult,
    ExperimentPlan, SolverChoice,
};
use commsat_core::generator::{trial_rng, ClauseSampler, GeneratorConfig};
use commsat_core::solver::{
    find_bicycle, is_bicycle, snake_formula, solve_2sat, solve_dpll, DEFAULT_DPLL_BUDGET,
};
use commsat_core::{Clause, Instance, Layout, Literal, Mixture, SolveResult};
use rand::seq::SliceRandom;
use rand::Rng;
use support::{binomial_u64, brute_force_sat, placement_moment, random_instance};

fn report(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {}: criterion {number:02} {name} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number:02} {name}: {detail}");
}

const TABLE_SEED: u64 = 42;
const TABLE_TRIALS: u32 = 2000;
const TABLE_C: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];

/// Reference satisfiable fractions at n=10^6 for the three models, one
/// row per model, columns following TABLE_C.
const TABLE_REFERENCE: [[f64; 4]; 3] = [
    [0.980, 0.909, 0.641, 0.201], // two communities, one variable from each
    [0.980, 0.908, 0.644, 0.203], // one community, classical 2-SAT
    [0.946, 0.827, 0.521, 0.142], // two communities, both variables from one
];

fn table_models() -> Vec<(u32, Mixture)> {
    vec![
        (2, "1,1:1".parse().unwrap()),
        (1, "2:1".parse().unwrap()),
        (2, "2:1".parse().unwrap()),
    ]
}

static TABLE: OnceLock<Vec<CellResult>> = OnceLock::new();

fn reproduction_table() -> &'static [CellResult] {
    TABLE.get_or_init(|| {
        scan_window(1_000_000, &TABLE_C, &table_models(), TABLE_TRIALS, TABLE_SEED).unwrap()
    })
}

#[test]
fn criterion_01_reproduction_table() {
    let cells = reproduction_table();
    assert_eq!(cells.len(), 12);
    let mut worst: (f64, String) = (0.0, String::new());
    for (model, reference_row) in TABLE_REFERENCE.iter().enumerate() {
        for (column, reference) in reference_row.iter().enumerate() {
            let cell = &cells[model * 4 + column];
            let deviation = (cell.sat_fraction - reference).abs();
            println!(
                "  table: B={} mixture={} m={} sat_fraction={:.4} ci=[{:.4},{:.4}] reference={:.3}",
                cell.communities,
                cell.mixture,
                cell.m,
                cell.sat_fraction,
                cell.ci_lo,
                cell.ci_hi,
                reference
            );
            if deviation > worst.0 {
                worst = (
                    deviation,
                    format!(
                        "B={} mixture={} m={}: {:.4} vs {:.3}",
                        cell.communities, cell.mixture, cell.m, cell.sat_fraction, reference
                    ),
                );
            }
        }
    }
    report(
        1,
        "reproduction-table",
        worst.0 <= 0.04,
        &format!("12 cells, {TABLE_TRIALS} trials each; worst deviation {:.4} ({})", worst.0, worst.1),
    );
}

#[test]
fn criterion_02_model_equivalence() {
    let cells = reproduction_table();
    let mut pass = true;
    let mut notes: Vec<String> = Vec::new();

    // split-pair model on two communities vs classical 2-SAT
    for column in 0..4 {
        let paired = &cells[column];
        let classical = &cells[4 + column];
        let gap = (paired.sat_fraction - classical.sat_fraction).abs();
        notes.push(format!("c={} gap {:.4}", TABLE_C[column], gap));
        if gap > 0.03 {
            pass = false;
        }
    }

    // the same-community model sits strictly below both at c in {0, 1}
    for column in [1usize, 2] {
        let communal = &cells[8 + column];
        for other in [&cells[column], &cells[4 + column]] {
            if communal.ci_hi >= other.ci_lo {
                pass = false;
                notes.push(format!(
                    "c={}: [{:.4},{:.4}] overlaps [{:.4},{:.4}]",
                    TABLE_C[column], communal.ci_lo, communal.ci_hi, other.ci_lo, other.ci_hi
                ));
            }
        }
    }

    report(2, "model-equivalence", pass, &notes.join("; "));
}

#[test]
fn criterion_03_threshold_sanity() {
    let layout = Layout::new(1, 100_000).unwrap();
    let mixture: Mixture = "2:1".parse().unwrap();
    let trials = 200;

    let below = estimate_sat_probability(
        &GeneratorConfig::new(layout, 80_000, mixture.clone(), 301).unwrap(),
        trials,
        SolverChoice::TwoSat,
    )
    .unwrap();
    let above = estimate_sat_probability(
        &GeneratorConfig::new(layout, 120_000, mixture, 302).unwrap(),
        trials,
        SolverChoice::TwoSat,
    )
    .unwrap();

    let pass = below.sat * 100 >= 95 * trials && above.unsat * 100 >= 95 * trials;
    report(
        3,
        "threshold-sanity",
        pass,
        &format!(
            "density 0.8: {}/{trials} SAT; density 1.2: {}/{trials} UNSAT",
            below.sat, above.unsat
        ),
    );
}

#[test]
fn criterion_04_poisson_limit() {
    let start = Instant::now();
    let trials = 5_000u32;
    let battery = balls_battery(1_000_000, BallsRule::Explicit(1_000), 2, trials, 8).unwrap();
    let elapsed = start.elapsed();

    let zero_fraction =
        battery.rows.iter().filter(|r| r.x_exact_s == 0).count() as f64 / f64::from(trials);
    let small_max =
        battery.rows.iter().filter(|r| r.max_load == 1 || r.max_load == 2).count() as f64
            / f64::from(trials);
    let reference_zero = (-0.5f64).exp();

    let mean_ok = (0.45..=0.55).contains(&battery.empirical_t1);
    let zero_ok = (zero_fraction - reference_zero).abs() <= 0.02;
    let max_ok = small_max >= 0.99;
    let time_ok = elapsed.as_secs_f64() < 60.0;
    report(
        4,
        "poisson-limit",
        mean_ok && zero_ok && max_ok && time_ok,
        &format!(
            "mean X = {:.4}; P(X=0) = {:.4} vs {:.4}; max load in {{1,2}}: {:.4}; {:.1}s",
            battery.empirical_t1,
            zero_fraction,
            reference_zero,
            small_max,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_exact_moment_oracle() {
    // full enumeration agreement on every parameter choice with B, M <= 5
    let mut enumerated = 0u32;
    for bins in 1u64..=5 {
        for balls in 0u32..=5 {
            for s in 0..=6u32 {
                for t in 0..=bins as u32 {
                    let expected = placement_moment(bins, balls, s, t);
                    let got = exact_binomial_moment(bins, u64::from(balls), s, t).unwrap();
                    assert_eq!(
                        got.exact().expect("tiny parameters stay exact"),
                        &expected,
                        "B={bins} M={balls} s={s} t={t}"
                    );
                    enumerated += 1;
                }
            }
        }
    }

    // Monte-Carlo agreement on a larger grid, within 4 standard errors
    let grid: [(u64, u64, u32, u32); 10] = [
        (100, 50, 1, 1),
        (100, 50, 2, 1),
        (100, 120, 2, 2),
        (200, 80, 3, 1),
        (500, 100, 2, 1),
        (1_000, 500, 2, 2),
        (1_000, 100, 1, 2),
        (2_000, 300, 3, 1),
        (5_000, 800, 2, 1),
        (10_000, 2_000, 2, 2),
    ];
    let trials = 3_000u32;
    let mut worst_score = 0.0f64;
    for (point, &(bins, balls, s, t)) in grid.iter().enumerate() {
        let exact = exact_binomial_moment(bins, balls, s, t).unwrap().to_f64();
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for trial in 0..trials {
            let mut rng = trial_rng(500 + point as u64, u64::from(trial));
            let occupancy = throw(balls, bins, &mut rng).unwrap();
            let value = binomial_u64(occupancy.count_bins_with_exactly(s), u64::from(t)) as f64;
            sum += value;
            sum_sq += value * value;
        }
        let mean = sum / f64::from(trials);
        let variance = (sum_sq / f64::from(trials) - mean * mean).max(0.0);
        let standard_error = (variance / f64::from(trials)).sqrt().max(1e-9);
        let score = (mean - exact).abs() / standard_error;
        worst_score = worst_score.max(score);
        assert!(
            score <= 4.0,
            "B={bins} M={balls} s={s} t={t}: mean {mean:.5} vs exact {exact:.5} ({score:.2} SE)"
        );
    }

    report(
        5,
        "exact-moment-oracle",
        true,
        &format!(
            "{enumerated} enumeration cases equal; Monte-Carlo worst deviation {worst_score:.2} SE on 10 points"
        ),
    );
}

#[test]
fn criterion_06_critical_load_constant() {
    let mut pass = true;
    let mut notes = Vec::new();

    let e_dev = (solve_dc(1.0).unwrap() - std::f64::consts::E).abs();
    notes.push(format!("|d_1 - e| = {e_dev:.2e}"));
    pass &= e_dev <= 1e-9;

    let mut worst_residual = 0.0f64;
    let mut worst_route_gap = 0.0f64;
    for c in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let d = solve_dc(c).unwrap();
        let residual = (1.0 + d * (c.ln() - d.ln() + 1.0) - c).abs();
        worst_residual = worst_residual.max(residual);
        pass &= residual < 1e-12;
        pass &= d > c + c.sqrt();
        let via_u = c + c * solve_u(1.0 / c).unwrap();
        let route_gap = (d - via_u).abs();
        worst_route_gap = worst_route_gap.max(route_gap);
        pass &= route_gap <= 1e-10;
    }
    notes.push(format!("worst residual {worst_residual:.2e}"));
    notes.push(format!("routes agree within {worst_route_gap:.2e}"));
    notes.push("d_c > c + sqrt(c) on the grid".to_string());

    report(6, "critical-load-constant", pass, &notes.join("; "));
}

#[test]
fn criterion_07_snakes_and_bicycles() {
    let mut rng = trial_rng(700, 0);

    // every snake formula is unsatisfiable
    let layout = Layout::new(1, 25).unwrap();
    for round in 0..1_000 {
        let s = rng.gen_range(2..=20usize);
        let mut vars: Vec<u32> = (1..=25).collect();
        vars.shuffle(&mut rng);
        let literals: Vec<Literal> = vars[..s]
            .iter()
            .map(|&v| Literal::new(if rng.gen::<bool>() { v as i32 } else { -(v as i32) }))
            .collect();
        let t = rng.gen_range(1..=s);
        let snake = snake_formula(layout, &literals, t).unwrap();
        assert!(
            matches!(solve_2sat(&snake).unwrap(), SolveResult::Unsat(_)),
            "round {round}: snake with s={s}, t={t} came back satisfiable"
        );
    }

    // every refuted random instance yields a verified bicycle
    let layout = Layout::new(1, 20).unwrap();
    let mut refuted = 0u32;
    for round in 0..10_000 {
        let clauses: Vec<Clause> = (0..40)
            .map(|_| {
                let a = rng.gen_range(1..=20u32);
                let mut b = rng.gen_range(1..=20u32);
                while b == a {
                    b = rng.gen_range(1..=20u32);
                }
                let lit = |v: u32, positive: bool| {
                    Literal::new(if positive { v as i32 } else { -(v as i32) })
                };
                Clause::new(vec![lit(a, rng.gen()), lit(b, rng.gen())]).unwrap()
            })
            .collect();
        let instance = Instance::new(layout, clauses).unwrap();
        if !brute_force_sat(&instance) {
            let bicycle = find_bicycle(&instance)
                .unwrap()
                .unwrap_or_else(|| panic!("round {round}: refuted instance without a bicycle"));
            assert!(is_bicycle(&bicycle), "round {round}: extracted subformula is not a bicycle");
            refuted += 1;
        }
    }

    report(
        7,
        "snakes-and-bicycles",
        refuted > 2_000,
        &format!("1000 snakes refuted; {refuted}/10000 instances refuted, all with verified bicycles"),
    );
}

#[test]
fn criterion_08_first_moment_regime() {
    let config = GeneratorConfig::new(
        Layout::new(1, 60).unwrap(),
        360,
        "3:1".parse().unwrap(),
        80,
    )
    .unwrap();
    let cell = estimate_sat_probability(
        &config,
        50,
        SolverChoice::Dpll { budget: DEFAULT_DPLL_BUDGET },
    )
    .unwrap();
    let bound = first_moment_log_upper(60, 360, 3);
    let pass = cell.unsat * 100 >= 95 * 50 && bound < 0.0;
    report(
        8,
        "first-moment-regime",
        pass,
        &format!("{}/50 UNSAT at density 6; log upper bound {bound:.2}", cell.unsat),
    );
}

#[test]
fn criterion_09_fixed_h_regimes() {
    let n = 1_000_000u32;
    let layout = Layout::new(n / 2, 2).unwrap();
    let mixture: Mixture = "2:1".parse().unwrap();
    let trials = 500;
    let scale = f64::from(n).powf(0.75);

    let sparse_m = (0.1 * scale).round() as usize;
    let dense_m = (10.0 * scale).round() as usize;
    let sparse = estimate_sat_probability(
        &GeneratorConfig::new(layout, sparse_m, mixture.clone(), 901).unwrap(),
        trials,
        SolverChoice::TwoSat,
    )
    .unwrap();
    let dense = estimate_sat_probability(
        &GeneratorConfig::new(layout, dense_m, mixture, 902).unwrap(),
        trials,
        SolverChoice::TwoSat,
    )
    .unwrap();

    let pass = sparse.sat_fraction >= 0.95 && dense.sat_fraction <= 0.05;
    report(
        9,
        "fixed-h-regimes",
        pass,
        &format!(
            "m={sparse_m}: sat fraction {:.3}; m={dense_m}: sat fraction {:.3}",
            sparse.sat_fraction, dense.sat_fraction
        ),
    );
}

#[test]
fn criterion_10_solver_oracles() {
    let mut rng = trial_rng(1000, 0);
    let mut two_sat_unsat = 0u32;
    for round in 0..10_000 {
        let instance = random_instance(&mut rng, 12, 2, 3);
        let expected = brute_force_sat(&instance);
        match solve_2sat(&instance).unwrap() {
            SolveResult::Sat(witness) => {
                assert!(expected, "2-SAT round {round} disagrees");
                assert!(instance
                    .clauses()
                    .iter()
                    .all(|c| c.literals().iter().any(|&l| witness.satisfies(l))));
            }
            SolveResult::Unsat(_) => {
                assert!(!expected, "2-SAT round {round} disagrees");
                two_sat_unsat += 1;
            }
        }
    }

    let mut dpll_unsat = 0u32;
    for round in 0..10_000 {
        let instance = random_instance(&mut rng, 16, 3, 4);
        let expected = brute_force_sat(&instance);
        match solve_dpll(&instance, DEFAULT_DPLL_BUDGET).unwrap() {
            SolveResult::Sat(witness) => {
                assert!(expected, "DPLL round {round} disagrees");
                assert!(instance
                    .clauses()
                    .iter()
                    .all(|c| c.literals().iter().any(|&l| witness.satisfies(l))));
            }
            SolveResult::Unsat(_) => {
                assert!(!expected, "DPLL round {round} disagrees");
                dpll_unsat += 1;
            }
        }
    }

    report(
        10,
        "solver-oracles",
        true,
        &format!(
            "10^4 instances per solver match enumeration ({two_sat_unsat} and {dpll_unsat} refutations); witnesses verify"
        ),
    );
}

#[test]
fn criterion_11_determinism_and_monotonicity() {
    // byte-identical scan output across worker counts
    let plan_text = "plan_version=1\nkind=window\nn=10000\nc=-1,0,1\n\
                     model=2/1,1:1\nmodel=1/2:1\ntrials=100\nseed=77\n";
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let cells = pool.install(|| ExperimentPlan::parse(plan_text).unwrap().run().unwrap());
        let mut bytes = Vec::new();
        write_cells_csv(&cells, &mut bytes).unwrap();
        bytes
    };
    let single = run_with(1);
    let identical = single == run_with(3) && single == run_with(2);

    // the coupled sat indicator never recovers as clauses are added
    let layout = Layout::new(1, 1_000).unwrap();
    let mixture: Mixture = "2:1".parse().unwrap();
    let ms: Vec<usize> = (1..=10).map(|k| 600 + 100 * k).collect();
    let mut monotone = true;
    for trial in 0..50u32 {
        let mut sampler = ClauseSampler::new(&layout, &mixture).unwrap();
        let mut rng = trial_rng(1100, u64::from(trial));
        let clauses: Vec<Clause> =
            (0..*ms.last().unwrap()).map(|_| sampler.sample(&mut rng)).collect();
        let mut previous = true;
        for &m in &ms {
            let prefix = Instance::new(layout, clauses[..m].to_vec()).unwrap();
            let sat = solve_2sat(&prefix).unwrap().is_sat();
            if sat && !previous {
                monotone = false;
            }
            previous = sat;
        }
    }

    report(
        11,
        "determinism-and-monotonicity",
        identical && monotone,
        &format!(
            "scan CSV identical across 1/2/3 workers ({} bytes); 50 coupled trials x 10 prefixes all monotone",
            single.len()
        ),
    );
}
