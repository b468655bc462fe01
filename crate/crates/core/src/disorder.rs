//! Disorder laws `ρ_p(J)` and the Gaussian-layer perturbations.
//!
//! All randomness lives on a standard Gaussian layer `J`; the coupling of a
//! hyperedge of arity `p` is `ρ_p(J_e)` for an odd map `ρ_p`. Perturbations
//! act on `J` and the maps are applied afterwards.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::hypergraph::Hypergraph;
use crate::numerics::ln_two_sided_tail;

/// Odd transfer map from the Gaussian layer to a coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rho {
    Identity,
    ScaledTanh {
        kappa: f64,
    },
    /// `sign(x) P(|J| > |x|)^{-1/α}`: symmetric with `P(|ρ(J)| > y) = y^{-α}`
    /// for `y >= 1`. Non-decreasing, `ρ(0) = 0`.
    ParetoTail {
        alpha: f64,
    },
}

impl Rho {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Rho::Identity => Ok(()),
            Rho::ScaledTanh { kappa } if kappa.is_finite() => Ok(()),
            Rho::ScaledTanh { kappa } => Err(argument(format!("tanh scale {kappa} not finite"))),
            Rho::ParetoTail { alpha } => check_stable_index(alpha),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Rho::Identity => x,
            Rho::ScaledTanh { kappa } => (kappa * x).tanh(),
            Rho::ParetoTail { alpha } => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum() * (-ln_two_sided_tail(x) / alpha).exp()
                }
            }
        }
    }
}

pub(crate) fn check_stable_index(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(argument(format!("stable index must lie in (1, 2), got {alpha}")))
    }
}

/// Per-arity disorder maps.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderModel {
    per_arity: BTreeMap<usize, Rho>,
}

impl DisorderModel {
    pub fn new(per_arity: BTreeMap<usize, Rho>) -> Result<Self> {
        if per_arity.is_empty() {
            return Err(argument("disorder model defines no arity"));
        }
        for (&p, rho) in &per_arity {
            if p < 2 {
                return Err(argument(format!("arity {p} < 2")));
            }
            rho.validate()?;
        }
        Ok(DisorderModel { per_arity })
    }

    /// The same map on every arity `2..=max_arity`.
    pub fn uniform(rho: Rho, max_arity: usize) -> Result<Self> {
        Self::new((2..=max_arity.max(2)).map(|p| (p, rho)).collect())
    }

    /// Gaussian couplings (`ρ_p = id`).
    pub fn gaussian(max_arity: usize) -> Self {
        Self::uniform(Rho::Identity, max_arity).expect("identity map is valid")
    }

    pub fn rho(&self, p: usize) -> Result<Rho> {
        self.per_arity.get(&p).copied().ok_or_else(|| argument(format!("disorder model has no map for arity {p}")))
    }

    pub fn eval(&self, p: usize, x: f64) -> Result<f64> {
        Ok(self.rho(p)?.eval(x))
    }

    pub fn arities(&self) -> impl Iterator<Item = (usize, Rho)> + '_ {
        self.per_arity.iter().map(|(&p, &r)| (p, r))
    }

    /// Couplings `ρ_{|e|}(J_e)` for every edge of `graph`.
    pub fn couplings(&self, graph: &Hypergraph, gaussians: &[f64]) -> Result<Vec<f64>> {
        if gaussians.len() != graph.n_edges() {
            return Err(argument(format!("{} Gaussian values for {} edges", gaussians.len(), graph.n_edges())));
        }
        graph.edges().iter().zip(gaussians).map(|(e, &x)| self.eval(e.len(), x)).collect()
    }

    /// Stable index when every arity uses the Pareto-tail map with one `α`.
    pub fn levy_alpha(&self) -> Option<f64> {
        let mut alphas = self.per_arity.values().map(|r| match r {
            Rho::ParetoTail { alpha } => Some(*alpha),
            _ => None,
        });
        let first = alphas.next()??;
        alphas.all(|a| a == Some(first)).then_some(first)
    }
}

/// Which of the two perturbations of the Gaussian layer is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// `J(t) = e^{-t} J + sqrt(1 - e^{-2t}) J'` (Ornstein-Uhlenbeck).
    Continuous,
    /// `J(t) = B J + (1 - B) J'` with `B ~ Bernoulli(e^{-t})` per coordinate.
    Discrete,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(argument(format!("perturbation time must be >= 0, got {t}")))
    }
}

pub fn standard_gaussians<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Continuous perturbation with fresh independent `J'` drawn from `rng`.
///
/// Draws exactly one Gaussian per coordinate regardless of `t`, so calling
/// with identically seeded generators couples the whole path `t ↦ J(t)`.
pub fn perturb_continuous<R: Rng + ?Sized>(j: &[f64], t: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_time(t)?;
    let keep = (-t).exp();
    let fresh = (-(-2.0 * t).exp_m1()).sqrt();
    Ok(j.iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            keep * x + fresh * z
        })
        .collect())
}

/// Discrete perturbation: each coordinate is kept with probability `e^{-t}`
/// and otherwise replaced by an independent Gaussian.
///
/// Per coordinate one Gaussian and one uniform are drawn (in that order), and
/// `B = 1{U < e^{-t}}`, so identically seeded calls at increasing `t` replace
/// nested sets of coordinates.
pub fn perturb_discrete<R: Rng + ?Sized>(j: &[f64], t: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_time(t)?;
    let keep = (-t).exp();
    Ok(j.iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            if u < keep {
                x
            } else {
                z
            }
        })
        .collect())
}

pub fn perturb<R: Rng + ?Sized>(kind: PerturbationKind, j: &[f64], t: f64, rng: &mut R) -> Result<Vec<f64>> {
    match kind {
        PerturbationKind::Continuous => perturb_continuous(j, t, rng),
        PerturbationKind::Discrete => perturb_discrete(j, t, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    Continuous,
    Discrete,
    SymmetricPair,
}

impl From<PerturbationKind> for CouplingKind {
    fn from(k: PerturbationKind) -> Self {
        match k {
            PerturbationKind::Continuous => CouplingKind::Continuous,
            PerturbationKind::Discrete => CouplingKind::Discrete,
        }
    }
}

/// A Gaussian disorder vector together with its perturbed partner.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDisorder {
    pub base: Vec<f64>,
    pub partner: Vec<f64>,
    pub kind: CouplingKind,
    pub t: f64,
}

impl CoupledDisorder {
    pub fn draw<R: Rng + ?Sized>(kind: PerturbationKind, t: f64, dim: usize, rng: &mut R) -> Result<Self> {
        let base = standard_gaussians(dim, rng);
        let partner = perturb(kind, &base, t, rng)?;
        Ok(CoupledDisorder { base, partner, kind: kind.into(), t })
    }

    pub fn symmetric<R: Rng + ?Sized>(t: f64, dim: usize, rng: &mut R) -> Result<Self> {
        let (base, partner) = couple_symmetric(t, rng, dim)?;
        Ok(CoupledDisorder { base, partner, kind: CouplingKind::SymmetricPair, t })
    }
}

/// Three independent Gaussian vectors `(J, J¹, J²)` from which the symmetric
/// pair `J^k(t) = e^{-t/2} J + sqrt(1 - e^{-t}) J^k` is formed at any `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCoupling {
    shared: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl SymmetricCoupling {
    pub fn draw<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let shared = standard_gaussians(dim, rng);
        let first = standard_gaussians(dim, rng);
        let second = standard_gaussians(dim, rng);
        SymmetricCoupling { shared, first, second }
    }

    pub fn dim(&self) -> usize {
        self.shared.len()
    }

    /// `(J¹(t), J²(t))`; cross-covariance `e^{-t}` per coordinate.
    pub fn at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        check_time(t)?;
        let keep = (-0.5 * t).exp();
        let fresh = (-(-t).exp_m1()).sqrt();
        let mix =
            |own: &[f64]| -> Vec<f64> { self.shared.iter().zip(own).map(|(&j, &z)| keep * j + fresh * z).collect() };
        Ok((mix(&self.first), mix(&self.second)))
    }
}

pub fn couple_symmetric<R: Rng + ?Sized>(t: f64, rng: &mut R, dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_time(t)?;
    SymmetricCoupling::draw(dim, rng).at(t)
}

/// Lévy normalisation `a_N = inf{x : P(|X| > x) <= 1/N}`; for the pure
/// Pareto tail this is `N^{1/α}`.
pub fn levy_a_n(n: usize, alpha: f64) -> Result<f64> {
    check_stable_index(alpha)?;
    if n == 0 {
        return Err(Error::Argument("a_N needs N >= 1".into()));
    }
    Ok((n as f64).powf(1.0 / alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn rho_values() {
        assert_eq!(Rho::Identity.eval(1.7), 1.7);
        assert!((Rho::ScaledTanh { kappa: 2.0 }.eval(0.3) - 0.6f64.tanh()).abs() < 1e-16);
        let pareto = Rho::ParetoTail { alpha: 1.5 };
        assert_eq!(pareto.eval(0.0), 0.0);
        assert!((pareto.eval(1e-12) - 1.0).abs() < 1e-9);
        assert!((pareto.eval(-1e-12) + 1.0).abs() < 1e-9);
        assert!(pareto.eval(40.0).is_finite());
    }

    #[test]
    fn rho_is_odd_on_grid() {
        let maps = [
            Rho::Identity,
            Rho::ScaledTanh { kappa: 0.7 },
            Rho::ParetoTail { alpha: 1.5 },
            Rho::ParetoTail { alpha: 1.9 },
        ];
        for rho in maps {
            let worst = (0..=2000)
                .map(|k| -10.0 + 0.01 * k as f64)
                .map(|x| (rho.eval(x) + rho.eval(-x)).abs())
                .fold(0.0, f64::max);
            assert_eq!(worst, 0.0, "{rho:?}");
        }
    }

    #[test]
    fn pareto_is_non_decreasing() {
        let rho = Rho::ParetoTail { alpha: 1.3 };
        let xs: Vec<f64> = (0..=4000).map(|k| -20.0 + 0.01 * k as f64).collect();
        assert!(xs.windows(2).all(|w| rho.eval(w[0]) <= rho.eval(w[1])));
    }

    #[test]
    fn invalid_models() {
        assert!(Rho::ParetoTail { alpha: 2.0 }.validate().is_err());
        assert!(Rho::ParetoTail { alpha: 1.0 }.validate().is_err());
        let m = DisorderModel::gaussian(2);
        assert!(m.eval(3, 0.5).is_err());
        assert!(DisorderModel::new(BTreeMap::new()).is_err());
    }

    #[test]
    fn perturbations_at_zero_are_identity() {
        let mut rng = StreamSeed::new(1).stream("t", 0);
        let j = standard_gaussians(50, &mut rng);
        assert_eq!(perturb_continuous(&j, 0.0, &mut rng).unwrap(), j);
        assert_eq!(perturb_discrete(&j, 0.0, &mut rng).unwrap(), j);
        let (a, b) = couple_symmetric(0.0, &mut rng, 5).unwrap();
        assert_eq!(a, b);
        assert!(perturb_continuous(&j, -0.1, &mut rng).is_err());
        assert!(perturb_discrete(&j, f64::NAN, &mut rng).is_err());
        assert!(couple_symmetric(-1.0, &mut rng, 3).is_err());
    }

    #[test]
    fn discrete_coupling_is_nested_in_t() {
        let seed = StreamSeed::new(3);
        let j = standard_gaussians(400, &mut seed.stream("j", 0));
        let at = |t| perturb_discrete(&j, t, &mut seed.stream("p", 0)).unwrap();
        let (a, b) = (at(0.3), at(1.2));
        for k in 0..j.len() {
            if b[k] == j[k] {
                assert_eq!(a[k], j[k]);
            }
        }
    }

    #[test]
    fn a_n_closed_form() {
        assert!((levy_a_n(8, 1.5).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(levy_a_n(1, 1.5).unwrap(), 1.0);
        let near_two = levy_a_n(1_000_000, 1.999_999).unwrap();
        assert!((near_two / 1000.0 - 1.0).abs() < 1e-5);
        assert!(levy_a_n(8, 2.5).is_err());
        assert!(levy_a_n(0, 1.5).is_err());
    }

    #[test]
    fn levy_alpha_detection() {
        let m = DisorderModel::uniform(Rho::ParetoTail { alpha: 1.5 }, 2).unwrap();
        assert_eq!(m.levy_alpha(), Some(1.5));
        assert_eq!(DisorderModel::gaussian(3).levy_alpha(), None);
    }
}
