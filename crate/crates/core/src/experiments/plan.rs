//! Text plans for scripted scans.
//!
//! A plan is a list of `key=value` lines (blank lines and `#` comments
//! ignored) whose first setting must be `plan_version=1`. The `kind` key
//! selects the scan shape and determines which further keys are required:
//!
//! ```text
//! plan_version=1
//! kind=window            # window | density | regime | explicit
//! n=1000000
//! c=-1,0,1,2
//! model=2/1,1:1          # <communities>/<mixture>, repeatable
//! model=1/2:1
//! trials=2000
//! seed=42
//! ```
//!
//! * `window`: `n`, `c` (list), `model` (one or more)
//! * `density`: `n`, `h_rule`, `mixture`, exactly one of `m`/`alpha` (lists)
//! * `regime`: `sizes` (list), `h_rule`, `mixture`, `m_rule`
//! * `explicit`: `n`, `B`, `mixture`, `m`
//!
//! Common keys: `trials`, `seed` (required); `timing=on|off` (default off,
//! so result files are byte-stable); `solver=2sat|dpll|dpll:<budget>`
//! (default 2sat; window and density scans are prefix-coupled and always
//! run on the 2-CNF solver). `h_rule` is `fixed:<h>`, `single`, or
//! `nearsqrt`; `m_rule` is `explicit:<m>`, `alpha:<a>`, `power:<b>,<g>`,
//! or `window:<c>`. Unknown or repeated keys are errors.

use std::fmt::Display;
use std::str::FromStr;

use crate::generator::GeneratorConfig;
use crate::model::{Layout, Mixture};
use crate::solver::DEFAULT_DPLL_BUDGET;

use super::{
    profile_cells, regime_scan, single_cell, window_scan, CellResult, ExperimentError, HRule,
    MRule, RegimeSpec, SolverChoice,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub kind: PlanKind,
    pub trials: u32,
    pub seed: u64,
    pub timing: bool,
    pub solver: SolverChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanKind {
    Window {
        n: u32,
        c_values: Vec<f64>,
        models: Vec<(u32, Mixture)>,
    },
    Density {
        n: u32,
        h_rule: HRule,
        mixture: Mixture,
        ms: Vec<usize>,
    },
    Regime {
        sizes: Vec<u32>,
        spec: RegimeSpec,
    },
    Explicit {
        n: u32,
        communities: u32,
        mixture: Mixture,
        m: usize,
    },
}

fn fail<T>(line: usize, detail: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::Plan { line, detail: detail.into() })
}

/// Key-value settings not yet claimed by the parser; anything left over
/// at the end is an unknown key.
struct Pending<'a> {
    entries: Vec<Option<(usize, &'a str, &'a str)>>,
}

impl<'a> Pending<'a> {
    fn take(&mut self, key: &str) -> Result<Option<(usize, &'a str)>, ExperimentError> {
        let mut found: Option<(usize, &'a str)> = None;
        for slot in &mut self.entries {
            if slot.map_or(false, |(_, k, _)| k == key) {
                let (line, _, value) = slot.take().unwrap();
                if found.is_some() {
                    return fail(line, format!("key `{key}` given more than once"));
                }
                found = Some((line, value));
            }
        }
        Ok(found)
    }

    fn require(&mut self, key: &str, kind_line: usize) -> Result<(usize, &'a str), ExperimentError> {
        match self.take(key)? {
            Some(entry) => Ok(entry),
            None => fail(kind_line, format!("kind requires key `{key}`")),
        }
    }

    fn take_all(&mut self, key: &str) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        for slot in &mut self.entries {
            if slot.map_or(false, |(_, k, _)| k == key) {
                let (line, _, value) = slot.take().unwrap();
                out.push((line, value));
            }
        }
        out
    }

    fn finish(self) -> Result<(), ExperimentError> {
        for slot in self.entries {
            if let Some((line, key, _)) = slot {
                return fail(line, format!("unknown key `{key}` for this plan kind"));
            }
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, text: &str) -> Result<T, ExperimentError>
where
    T::Err: Display,
{
    match text.trim().parse() {
        Ok(v) => Ok(v),
        Err(e) => fail(line, format!("bad value for `{key}`: {e}")),
    }
}

fn parse_list<T: FromStr>(line: usize, key: &str, text: &str) -> Result<Vec<T>, ExperimentError>
where
    T::Err: Display,
{
    let items: Result<Vec<T>, _> =
        text.split(',').map(|part| parse_value(line, key, part)).collect();
    let items = items?;
    if items.is_empty() {
        return fail(line, format!("`{key}` needs at least one entry"));
    }
    Ok(items)
}

fn parse_mixture(line: usize, text: &str) -> Result<Mixture, ExperimentError> {
    text.parse::<Mixture>().or_else(|e| fail(line, e.to_string()))
}

fn parse_h_rule(line: usize, text: &str) -> Result<HRule, ExperimentError> {
    match text {
        "single" => Ok(HRule::Single),
        "nearsqrt" => Ok(HRule::NearSqrt),
        _ => match text.strip_prefix("fixed:") {
            Some(h) => Ok(HRule::Fixed(parse_value(line, "h_rule", h)?)),
            None => fail(line, "h_rule must be fixed:<h>, single, or nearsqrt"),
        },
    }
}

fn parse_m_rule(line: usize, text: &str) -> Result<MRule, ExperimentError> {
    let (name, arg) = match text.split_once(':') {
        Some(parts) => parts,
        None => return fail(line, "m_rule must be explicit:<m>, alpha:<a>, power:<b>,<g>, or window:<c>"),
    };
    match name {
        "explicit" => Ok(MRule::Explicit(parse_value(line, "m_rule", arg)?)),
        "alpha" => {
            let a: f64 = parse_value(line, "m_rule", arg)?;
            if !a.is_finite() || a < 0.0 {
                return fail(line, "alpha must be finite and nonnegative");
            }
            Ok(MRule::Alpha(a))
        }
        "power" => {
            let parts: Vec<f64> = parse_list(line, "m_rule", arg)?;
            match parts[..] {
                [beta, gamma] if beta >= 0.0 && beta.is_finite() && gamma.is_finite() => {
                    Ok(MRule::Power { beta, gamma })
                }
                _ => fail(line, "power rule takes two finite factors: power:<beta>,<gamma>"),
            }
        }
        "window" => {
            let c: f64 = parse_value(line, "m_rule", arg)?;
            if !c.is_finite() {
                return fail(line, "window coordinate must be finite");
            }
            Ok(MRule::Window { c })
        }
        _ => fail(line, format!("unknown m_rule `{name}`")),
    }
}

fn parse_solver(line: usize, text: &str) -> Result<SolverChoice, ExperimentError> {
    match text {
        "2sat" => Ok(SolverChoice::TwoSat),
        "dpll" => Ok(SolverChoice::Dpll { budget: DEFAULT_DPLL_BUDGET }),
        _ => match text.strip_prefix("dpll:") {
            Some(budget) => Ok(SolverChoice::Dpll { budget: parse_value(line, "solver", budget)? }),
            None => fail(line, "solver must be 2sat, dpll, or dpll:<budget>"),
        },
    }
}

impl ExperimentPlan {
    pub fn parse(text: &str) -> Result<ExperimentPlan, ExperimentError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed.split_once('=') {
                Some((key, value)) => entries.push(Some((line, key.trim(), value.trim()))),
                None => return fail(line, "expected key=value"),
            }
        }

        let Some((version_line, version_key, version_value)) = entries.first().copied().flatten()
        else {
            return fail(1, "empty plan: expected plan_version=1");
        };
        if version_key != "plan_version" {
            return fail(version_line, "first setting must be plan_version=1");
        }
        if version_value != "1" {
            return fail(version_line, format!("unsupported plan_version `{version_value}`"));
        }
        entries.remove(0);
        let mut pending = Pending { entries };

        let (kind_line, kind_name) = pending.require("kind", version_line)?;

        let (trials_line, trials_text) = pending.require("trials", kind_line)?;
        let trials: u32 = parse_value(trials_line, "trials", trials_text)?;
        if trials == 0 {
            return fail(trials_line, "trials must be at least 1");
        }
        let (seed_line, seed_text) = pending.require("seed", kind_line)?;
        let seed: u64 = parse_value(seed_line, "seed", seed_text)?;

        let timing = match pending.take("timing")? {
            None => false,
            Some((_, "off")) => false,
            Some((_, "on")) => true,
            Some((line, other)) => return fail(line, format!("timing must be on or off, got `{other}`")),
        };

        let solver_entry = pending.take("solver")?;
        let solver = match solver_entry {
            None => SolverChoice::TwoSat,
            Some((line, text)) => parse_solver(line, text)?,
        };

        let kind = match kind_name {
            "window" | "density" => {
                if let (Some((line, _)), true) = (solver_entry, solver != SolverChoice::TwoSat) {
                    return fail(line, format!("{kind_name} scans always run on the 2-CNF solver"));
                }
                let (n_line, n_text) = pending.require("n", kind_line)?;
                let n: u32 = parse_value(n_line, "n", n_text)?;
                if kind_name == "window" {
                    let (c_line, c_text) = pending.require("c", kind_line)?;
                    let c_values: Vec<f64> = parse_list(c_line, "c", c_text)?;
                    if let Some(bad) = c_values.iter().find(|c| !c.is_finite()) {
                        return fail(c_line, format!("window coordinate {bad} is not finite"));
                    }
                    let model_entries = pending.take_all("model");
                    if model_entries.is_empty() {
                        return fail(kind_line, "window scans need at least one model=<B>/<mixture>");
                    }
                    let mut models = Vec::with_capacity(model_entries.len());
                    for (line, text) in model_entries {
                        let Some((b_text, mix_text)) = text.split_once('/') else {
                            return fail(line, "model takes the form <communities>/<mixture>");
                        };
                        let communities: u32 = parse_value(line, "model", b_text)?;
                        models.push((communities, parse_mixture(line, mix_text)?));
                    }
                    PlanKind::Window { n, c_values, models }
                } else {
                    let (h_line, h_text) = pending.require("h_rule", kind_line)?;
                    let h_rule = parse_h_rule(h_line, h_text)?;
                    let (mix_line, mix_text) = pending.require("mixture", kind_line)?;
                    let mixture = parse_mixture(mix_line, mix_text)?;
                    let m_entry = pending.take("m")?;
                    let alpha_entry = pending.take("alpha")?;
                    let mut ms: Vec<usize> = match (m_entry, alpha_entry) {
                        (Some((line, text)), None) => parse_list(line, "m", text)?,
                        (None, Some((line, text))) => {
                            let alphas: Vec<f64> = parse_list(line, "alpha", text)?;
                            if let Some(bad) =
                                alphas.iter().find(|a| !a.is_finite() || **a < 0.0)
                            {
                                return fail(line, format!("density {bad} is not usable"));
                            }
                            alphas.iter().map(|a| (a * f64::from(n)).round() as usize).collect()
                        }
                        (Some(_), Some((line, _))) => {
                            return fail(line, "give either m or alpha, not both")
                        }
                        (None, None) => return fail(kind_line, "density scans need m or alpha"),
                    };
                    ms.sort_unstable();
                    ms.dedup();
                    PlanKind::Density { n, h_rule, mixture, ms }
                }
            }
            "regime" => {
                let (sizes_line, sizes_text) = pending.require("sizes", kind_line)?;
                let sizes: Vec<u32> = parse_list(sizes_line, "sizes", sizes_text)?;
                let (h_line, h_text) = pending.require("h_rule", kind_line)?;
                let (mix_line, mix_text) = pending.require("mixture", kind_line)?;
                let (m_line, m_text) = pending.require("m_rule", kind_line)?;
                PlanKind::Regime {
                    sizes,
                    spec: RegimeSpec {
                        h_rule: parse_h_rule(h_line, h_text)?,
                        m_rule: parse_m_rule(m_line, m_text)?,
                        mixture: parse_mixture(mix_line, mix_text)?,
                    },
                }
            }
            "explicit" => {
                let (n_line, n_text) = pending.require("n", kind_line)?;
                let (b_line, b_text) = pending.require("B", kind_line)?;
                let (mix_line, mix_text) = pending.require("mixture", kind_line)?;
                let (m_line, m_text) = pending.require("m", kind_line)?;
                PlanKind::Explicit {
                    n: parse_value(n_line, "n", n_text)?,
                    communities: parse_value(b_line, "B", b_text)?,
                    mixture: parse_mixture(mix_line, mix_text)?,
                    m: parse_value(m_line, "m", m_text)?,
                }
            }
            other => return fail(kind_line, format!("unknown kind `{other}`")),
        };

        pending.finish()?;
        Ok(ExperimentPlan { kind, trials, seed, timing, solver })
    }

    /// Executes the plan. Cell order, counts, and every non-timing field
    /// depend only on the plan text, never on thread count.
    pub fn run(&self) -> Result<Vec<CellResult>, ExperimentError> {
        match &self.kind {
            PlanKind::Window { n, c_values, models } => {
                window_scan(*n, c_values, models, self.trials, self.seed, self.timing)
            }
            PlanKind::Density { n, h_rule, mixture, ms } => {
                let layout = h_rule.layout_for(*n)?;
                profile_cells(&layout, mixture, ms, self.trials, self.seed, 0, self.timing)
            }
            PlanKind::Regime { sizes, spec } => {
                regime_scan(spec, sizes, self.trials, self.seed, self.solver, self.timing)
            }
            PlanKind::Explicit { n, communities, mixture, m } => {
                let layout = Layout::split(*n, *communities)?;
                let config = GeneratorConfig::new(layout, *m, mixture.clone(), self.seed)?;
                Ok(vec![single_cell(&config, self.trials, self.solver, 0, self.timing)?])
            }
        }
    }
}
