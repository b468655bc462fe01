use std::fmt;

use serde::{Deserialize, Serialize};

use super::curve::ChaosCurve;
use crate::disorder::CouplingKind;
use crate::error::{Error, Result};

/// Which inequality a [`BoundCheck`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTag {
    /// `(1/N) max_i |B_r(i)| + e^{-tr}`, minimised over `r`.
    General,
    /// `1/N + C/(N t^θ)` under polynomial ball growth.
    PolynomialGrowth,
    /// `C / N^{t/(t + ln γ)}` under exponential ball growth.
    ExponentialGrowth,
    /// `C / N^{t/(t + 2 ln λ)}` for diluted models.
    Diluted,
    /// `K / N^{(2/α − 1 − ε) min(1, c t)}` for the Lévy model.
    Levy,
    /// `estimate(t) ≥ e^{-1} estimate(0)` for discrete `t ≤ 1/|E|`.
    DiscreteLower,
    /// `estimate(t) ≥ estimate(0) − 6 √t √β |E|^{3/4}` for Gaussian couplings.
    GaussianLower,
}

impl BoundTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundTag::General => "general",
            BoundTag::PolynomialGrowth => "polynomial-growth",
            BoundTag::ExponentialGrowth => "exponential-growth",
            BoundTag::Diluted => "diluted",
            BoundTag::Levy => "levy",
            BoundTag::DiscreteLower => "discrete-lower",
            BoundTag::GaussianLower => "gaussian-lower",
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, BoundTag::DiscreteLower | BoundTag::GaussianLower)
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Constants of the growth-regime bounds. They are existential in theory,
/// so bounds using them are reported but never asserted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConstants {
    /// Prefactor `C` (or `K` for the Lévy bound).
    pub prefactor: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    /// Rate `c` in `min(1, c t)`.
    pub rate: Option<f64>,
}

/// One inequality evaluated at one `t`.
///
/// `margin` is the slack in the direction of the inequality after allowing
/// three standard errors: `bound − estimate − 3 se` for upper bounds and
/// `estimate + 3 se − bound` for lower bounds. It is kept even when negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub tag: BoundTag,
    pub t: f64,
    pub bound: f64,
    pub estimate: f64,
    pub se: f64,
    pub margin: f64,
    pub violated: bool,
    /// Whether a violation counts as a failure: the bound needs no unknown
    /// constants and the model is in its scope.
    pub asserted: bool,
    /// The bound holds trivially (a lower bound at or below zero).
    pub vacuous: bool,
    pub detail: String,
}

impl BoundCheck {
    #[allow(clippy::too_many_arguments)]
    fn upper(tag: BoundTag, t: f64, bound: f64, estimate: f64, se: f64, asserted: bool, detail: String) -> Self {
        let margin = bound - estimate - 3.0 * se;
        BoundCheck { tag, t, bound, estimate, se, margin, violated: margin < 0.0, asserted, vacuous: false, detail }
    }

    #[allow(clippy::too_many_arguments)]
    fn lower(tag: BoundTag, t: f64, bound: f64, estimate: f64, se: f64, vacuous: bool, detail: String) -> Self {
        let margin = estimate + 3.0 * se - bound;
        BoundCheck { tag, t, bound, estimate, se, margin, violated: margin < 0.0, asserted: true, vacuous, detail }
    }

    /// A violation of an asserted bound.
    pub fn fails(&self) -> bool {
        self.violated && self.asserted
    }
}

/// `bound_tag,t,bound_value,estimate,se,margin,violated,asserted,vacuous,detail` rows.
pub fn bound_checks_csv(checks: &[BoundCheck]) -> String {
    let mut out = String::from("bound_tag,t,bound_value,estimate,se,margin,violated,asserted,vacuous,detail\n");
    for c in checks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.tag, c.t, c.bound, c.estimate, c.se, c.margin, c.violated, c.asserted, c.vacuous, c.detail
        ));
    }
    out
}

/// `min_r (profile[r]/N + e^{-tr})` and the minimising `r`.
pub fn general_bound(profile: &[usize], n: usize, t: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (r, &ball) in profile.iter().enumerate() {
        let value = ball as f64 / n as f64 + (-t * r as f64).exp();
        if value < best.0 {
            best = (value, r);
        }
    }
    best
}

fn need(value: Option<f64>, tag: BoundTag, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Configuration(format!("bound {tag} needs the constant {name}")))
}

/// Evaluates the constant-free general bound at every grid point, plus each
/// requested constant-bearing bound.
///
/// The general bound is proven for even models: violations there count as
/// failures, elsewhere it is reported only. For sampled graphs the bound is
/// averaged over the replicas' graphs, since it holds graph by graph.
pub fn theorem_bound_check(
    curve: &ChaosCurve,
    tags: &[BoundTag],
    constants: &BoundConstants,
) -> Result<Vec<BoundCheck>> {
    let n = curve.n as f64;
    let mut out = Vec::new();
    for p in &curve.points {
        let per_graph: Vec<(f64, usize)> =
            curve.ball_profiles.iter().map(|prof| general_bound(prof, curve.n, p.t)).collect();
        let bound = per_graph.iter().map(|b| b.0).sum::<f64>() / per_graph.len() as f64;
        let detail = if per_graph.len() == 1 {
            format!("r={}", per_graph[0].1)
        } else {
            format!("mean over {} graphs", per_graph.len())
        };
        out.push(BoundCheck::upper(BoundTag::General, p.t, bound, p.estimate, p.se, curve.even, detail));
    }
    for &tag in tags {
        if tag == BoundTag::General {
            continue;
        }
        if tag.is_lower() {
            return Err(Error::Configuration(format!("{tag} is a lower bound; use lower_bound_checks")));
        }
        let c = need(constants.prefactor, tag, "prefactor")?;
        for p in &curve.points {
            let t = p.t;
            let (bound, detail) = match tag {
                BoundTag::PolynomialGrowth => {
                    let theta = need(constants.theta, tag, "theta")?;
                    (1.0 / n + c / (n * t.powf(theta)), format!("C={c};theta={theta}"))
                }
                BoundTag::ExponentialGrowth => {
                    let gamma = need(constants.gamma, tag, "gamma")?;
                    (c / n.powf(t / (t + gamma.ln())), format!("C={c};gamma={gamma}"))
                }
                BoundTag::Diluted => {
                    let lambda = need(constants.lambda, tag, "lambda")?;
                    (c / n.powf(t / (t + 2.0 * lambda.ln())), format!("C={c};lambda={lambda}"))
                }
                BoundTag::Levy => {
                    let alpha = need(constants.alpha, tag, "alpha")?;
                    let eps = need(constants.epsilon, tag, "epsilon")?;
                    let rate = need(constants.rate, tag, "rate")?;
                    let exponent = (2.0 / alpha - 1.0 - eps) * (rate * t).min(1.0);
                    (c / n.powf(exponent), format!("K={c};alpha={alpha};epsilon={eps};c={rate}"))
                }
                _ => unreachable!("lower and general tags handled above"),
            };
            out.push(BoundCheck::upper(tag, t, bound, p.estimate, p.se, false, detail));
        }
    }
    Ok(out)
}

/// Lower bounds at small `t`.
///
/// [`BoundTag::DiscreteLower`] compares every grid point in `(0, 1/|E|]`
/// (and `t = 0`) with `e^{-1}·estimate(0)`; [`BoundTag::GaussianLower`]
/// compares every grid point with `estimate(0) − 6√t√β|E|^{3/4}`. Standard
/// errors are those of the replica-paired difference. Both need `t = 0` on
/// the grid and a single fixed graph.
pub fn lower_bound_checks(curve: &ChaosCurve, tags: &[BoundTag]) -> Result<Vec<BoundCheck>> {
    let zero =
        curve.index_of(0.0).ok_or_else(|| Error::Configuration("lower-bound checks need t = 0 on the grid".into()))?;
    if curve.edge_counts.len() != 1 {
        return Err(Error::Configuration("lower-bound checks need a fixed graph".into()));
    }
    let edges = curve.edge_counts[0] as f64;
    let q0 = curve.points[zero].estimate;
    let mut out = Vec::new();
    for &tag in tags {
        match tag {
            BoundTag::DiscreteLower => {
                if curve.kind != CouplingKind::Discrete {
                    return Err(Error::Configuration("discrete lower bound needs the discrete perturbation".into()));
                }
                let limit = 1.0 / edges;
                let mut any = false;
                for (k, p) in curve.points.iter().enumerate() {
                    if p.t > limit * (1.0 + 1e-12) {
                        continue;
                    }
                    any |= p.t > 0.0;
                    let factor = (-1.0f64).exp();
                    let diff = curve.paired_estimate(&[(k, 1.0), (zero, -factor)])?;
                    out.push(BoundCheck::lower(
                        tag,
                        p.t,
                        factor * q0,
                        p.estimate,
                        diff.se,
                        false,
                        format!("1/|E|={limit}"),
                    ));
                }
                if !any {
                    return Err(Error::Configuration(format!("no grid point in (0, 1/|E|] = (0, {limit}]")));
                }
            }
            BoundTag::GaussianLower => {
                if curve.kind != CouplingKind::Continuous || !curve.identity_disorder {
                    return Err(Error::Configuration(
                        "Gaussian lower bound needs identity couplings and the continuous perturbation".into(),
                    ));
                }
                let beta = curve
                    .beta
                    .finite()
                    .ok_or_else(|| Error::Configuration("Gaussian lower bound needs finite β".into()))?;
                for (k, p) in curve.points.iter().enumerate() {
                    let slack = 6.0 * p.t.sqrt() * beta.sqrt() * edges.powf(0.75);
                    let diff = curve.paired_estimate(&[(k, 1.0), (zero, -1.0)])?;
                    let bound = q0 - slack;
                    out.push(BoundCheck::lower(
                        tag,
                        p.t,
                        bound,
                        p.estimate,
                        diff.se,
                        bound <= 0.0,
                        format!("slack={slack}"),
                    ));
                }
            }
            other => return Err(Error::Configuration(format!("{other} is not a lower bound"))),
        }
    }
    Ok(out)
}

/// One adjacent pair of grid points where the curve rises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub t_from: f64,
    pub t_to: f64,
    pub increase: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub violations: Vec<MonotonicityViolation>,
}

/// Flags adjacent pairs with `estimate(t_{k+1}) > estimate(t_k) + 3 se`,
/// using the paired standard error of the step.
pub fn monotonicity_check(curve: &ChaosCurve) -> MonotonicityReport {
    let violations: Vec<_> = curve
        .points
        .windows(2)
        .zip(&curve.step_se)
        .filter_map(|(w, &se)| {
            let increase = w[1].estimate - w[0].estimate;
            (increase > 3.0 * se).then_some(MonotonicityViolation { t_from: w[0].t, t_to: w[1].t, increase, se })
        })
        .collect();
    MonotonicityReport { passed: violations.is_empty(), violations }
}
