use serde::{Deserialize, Serialize};

use super::curve::{chaos_curve, ChaosCurve, ChaosModel, Solver};
use crate::disorder::check_stable_index;
use crate::error::{argument, Error, Result};
use crate::exec::Execution;
use crate::gibbs::ENUMERATION_CAP;
use crate::rng::StreamSeed;
use crate::stats::linear_fit;

/// Largest system the Lévy experiment runs under Glauber dynamics.
pub const LEVY_MCMC_CAP: usize = 128;
/// Largest system the Lévy experiment enumerates exactly.
pub const LEVY_EXACT_CAP: usize = 16;

/// Default lower end of the fitted range: just above `−ln(α − 1)`.
pub fn default_levy_t0(alpha: f64) -> f64 {
    -(alpha - 1.0).ln() + 0.1
}

/// Slope of `ln E⟨R²⟩_t` against `ln N` at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyFit {
    pub t: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `−(2/α − 1)`, the asymptotic exponent up to `ε`.
    pub reference_slope: f64,
    /// Each estimate is at most the previous one plus three combined s.e.
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyReport {
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub sizes: Vec<usize>,
    pub curves: Vec<ChaosCurve>,
    /// One fit per grid point `t >= t0`.
    pub fits: Vec<LevyFit>,
}

impl LevyReport {
    /// `n,t,estimate,se,replicas` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t,estimate,se,replicas\n");
        for c in &self.curves {
            for p in &c.points {
                out.push_str(&format!("{},{},{},{},{}\n", c.n, p.t, p.estimate, p.se, p.replicas));
            }
        }
        out
    }
}

/// Chaos curves of the Lévy model over system sizes, with a log-log fit of
/// the decay in `N` at every grid point `t >= t0`.
///
/// Size `N` uses the sub-seed `("levy", N)`, so sizes are independent.
#[allow(clippy::too_many_arguments)]
pub fn levy_chaos(
    alpha: f64,
    beta: f64,
    sizes: &[usize],
    t_grid: &[f64],
    t0: Option<f64>,
    replicas: usize,
    seed: StreamSeed,
    solver: Solver,
    exec: Execution,
) -> Result<LevyReport> {
    check_stable_index(alpha)?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(argument(format!("Lévy experiment needs finite β >= 0, got {beta}")));
    }
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(argument("Lévy sizes must be at least two strictly increasing values"));
    }
    let cap = match solver {
        Solver::Exact => LEVY_EXACT_CAP.min(ENUMERATION_CAP),
        Solver::Mcmc(_) => LEVY_MCMC_CAP,
    };
    if let Some(&n) = sizes.iter().find(|&&n| n > cap || n < 2) {
        return Err(crate::error::capacity(format!("Lévy size {n} outside 2..={cap} for this solver")));
    }
    let t0 = t0.unwrap_or_else(|| default_levy_t0(alpha));
    let curves = sizes
        .iter()
        .map(|&n| {
            let model = ChaosModel::levy(n, alpha, beta, solver)?;
            chaos_curve(&model, t_grid, replicas, seed.child("levy", n as u64), exec)
        })
        .collect::<Result<Vec<_>>>()?;

    let log_n: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let mut fits = Vec::new();
    for (k, &t) in t_grid.iter().enumerate() {
        if t < t0 {
            continue;
        }
        let points: Vec<_> = curves.iter().map(|c| c.points[k]).collect();
        if points.iter().any(|p| p.estimate <= 0.0) {
            return Err(Error::Numerical(format!("non-positive estimate at t={t}")));
        }
        let log_q: Vec<f64> = points.iter().map(|p| p.estimate.ln()).collect();
        let (intercept, slope) = linear_fit(&log_n, &log_q)?;
        let non_increasing = points
            .windows(2)
            .all(|w| w[1].estimate <= w[0].estimate + 3.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
        fits.push(LevyFit { t, slope, intercept, reference_slope: -(2.0 / alpha - 1.0), non_increasing });
    }
    Ok(LevyReport { alpha, beta, t0, sizes: sizes.to_vec(), curves, fits })
}
