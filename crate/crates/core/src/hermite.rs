//! Normalized Hermite polynomials, Gauss–Hermite rules and Fourier–Hermite
//! coefficients of functions of a standard Gaussian vector.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::disorder::{standard_gaussians, PerturbationKind};
use crate::error::{argument, capacity, Error, Result};
use crate::exec::Execution;
use crate::hypergraph::{Hypergraph, MultiIndex};
use crate::stats::{jackknife_mean, Estimate};

/// Largest cached Gauss–Hermite order.
pub const MAX_RULE_ORDER: usize = 64;
/// Per-axis order cap for coefficient quadrature.
pub const MAX_QUADRATURE_ORDER: usize = MAX_RULE_ORDER;
/// Dimension cap for tensor quadrature.
pub const MAX_QUADRATURE_DIM: usize = 6;
/// Largest tensor grid stored by [`coefficient_table`].
pub const MAX_TABLE_POINTS: usize = 1 << 24;
/// Largest tensor grid streamed by [`coeff_quadrature`].
pub const MAX_STREAM_POINTS: usize = 1 << 28;
const MIN_MC_SAMPLES: usize = 1000;
const GRID_CHUNK: usize = 4096;

/// `h_0(x), ..., h_m(x)` for the orthonormal polynomials of the standard
/// Gaussian measure, via `h_{k+1} = (x h_k - √k h_{k-1}) / √(k+1)`.
pub fn hermite_values(x: f64, max_degree: usize) -> Vec<f64> {
    let mut h = vec![0.0; max_degree + 1];
    hermite_fill(x, &mut h);
    h
}

fn hermite_fill(x: f64, h: &mut [f64]) {
    if h.is_empty() {
        return;
    }
    h[0] = 1.0;
    if h.len() > 1 {
        h[1] = x;
    }
    for k in 1..h.len() - 1 {
        h[k + 1] = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

/// `h_m(x)`.
pub fn hermite(m: usize, x: f64) -> f64 {
    hermite_values(x, m)[m]
}

/// `Π_e h_{n_e}(x_e)`.
pub fn hermite_product(n: &MultiIndex, x: &[f64]) -> f64 {
    n.iter().map(|(e, d)| hermite(d as usize, x[e])).product()
}

/// Gauss–Hermite rule for the standard Gaussian weight: `Σ w_k f(x_k)`
/// integrates polynomials of degree `< 2·order` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn build_rule(order: usize) -> GaussHermite {
    // Jacobi matrix of the recurrence: zero diagonal, off-diagonal √k.
    let jacobi =
        DMatrix::from_fn(order, order, |r, c| if r + 1 == c || c + 1 == r { (r.max(c) as f64).sqrt() } else { 0.0 });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut h = vec![0.0; order + 1];
    let mut weights = Vec::with_capacity(order);
    for x in nodes.iter_mut() {
        // Newton polish on h_order, using h'_m = √m h_{m-1}.
        for _ in 0..3 {
            hermite_fill(*x, &mut h);
            let step = h[order] / ((order as f64).sqrt() * h[order - 1]);
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
        hermite_fill(*x, &mut h);
        let christoffel: f64 = h[..order].iter().map(|v| v * v).sum();
        weights.push(1.0 / christoffel);
    }
    // Enforce exact symmetry of the rule about 0.
    for k in 0..order / 2 {
        let m = order - 1 - k;
        let x = 0.5 * (nodes[m] - nodes[k]);
        let w = 0.5 * (weights[k] + weights[m]);
        nodes[k] = -x;
        nodes[m] = x;
        weights[k] = w;
        weights[m] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    GaussHermite { nodes, weights }
}

/// Cached rule of the given order (`1..=MAX_RULE_ORDER`).
pub fn gauss_hermite(order: usize) -> Result<&'static GaussHermite> {
    static CACHE: [OnceLock<GaussHermite>; MAX_RULE_ORDER] = [const { OnceLock::new() }; MAX_RULE_ORDER];
    if order == 0 || order > MAX_RULE_ORDER {
        return Err(capacity(format!("Gauss–Hermite order must lie in 1..={MAX_RULE_ORDER}, got {order}")));
    }
    Ok(CACHE[order - 1].get_or_init(|| build_rule(order)))
}

/// Tensor grid of Gauss–Hermite rules with one order per axis.
struct Grid {
    rules: Vec<&'static GaussHermite>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn new(orders: &[usize], max_points: usize) -> Result<Self> {
        if orders.is_empty() || orders.len() > MAX_QUADRATURE_DIM {
            return Err(capacity(format!(
                "tensor quadrature supports 1..={MAX_QUADRATURE_DIM} dimensions, got {}",
                orders.len()
            )));
        }
        if let Some(&o) = orders.iter().find(|&&o| o == 0 || o > MAX_QUADRATURE_ORDER) {
            return Err(capacity(format!("quadrature order must lie in 1..={MAX_QUADRATURE_ORDER}, got {o}")));
        }
        let len = orders.iter().try_fold(1usize, |acc, &o| acc.checked_mul(o)).unwrap_or(usize::MAX);
        if len > max_points {
            return Err(capacity(format!("tensor grid of {len} points exceeds {max_points}")));
        }
        let rules = orders.iter().map(|&o| gauss_hermite(o)).collect::<Result<Vec<_>>>()?;
        // Last axis varies fastest.
        let mut strides = vec![1; orders.len()];
        for a in (0..orders.len() - 1).rev() {
            strides[a] = strides[a + 1] * orders[a + 1];
        }
        Ok(Grid { rules, strides, len })
    }

    fn dim(&self) -> usize {
        self.rules.len()
    }

    fn point(&self, idx: usize, x: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for (a, rule) in self.rules.iter().enumerate() {
            let k = (idx / self.strides[a]) % rule.order();
            x[a] = rule.nodes[k];
            w *= rule.weights[k];
        }
        w
    }

    fn evaluate<F>(&self, phi: &F, exec: Execution) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let chunks = self.len.div_ceil(GRID_CHUNK);
        let parts = exec.try_map(chunks, |c| -> Result<Vec<f64>> {
            let mut x = vec![0.0; self.dim()];
            let end = ((c + 1) * GRID_CHUNK).min(self.len);
            (c * GRID_CHUNK..end)
                .map(|idx| {
                    self.point(idx, &mut x);
                    phi(&x)
                })
                .collect()
        })?;
        Ok(parts.concat())
    }
}

fn check_index(n: &MultiIndex, dim: usize) -> Result<()> {
    match n.max_edge() {
        Some(e) if e >= dim => Err(argument(format!("multi-index uses coordinate {e} of a {dim}-dimensional input"))),
        _ => Ok(()),
    }
}

/// `φ̂(n) = E[φ(J) h_n(J)]` by tensor Gauss–Hermite quadrature with the
/// same order on every axis.
pub fn coeff_quadrature<F>(phi: F, dim: usize, n: &MultiIndex, order: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    coeff_quadrature_orders(phi, &vec![order; dim], n)
}

/// As [`coeff_quadrature`] with one order per axis. The grid is streamed,
/// never stored.
pub fn coeff_quadrature_orders<F>(phi: F, orders: &[usize], n: &MultiIndex) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let grid = Grid::new(orders, MAX_STREAM_POINTS)?;
    check_index(n, grid.dim())?;
    let basis: Vec<Vec<Vec<f64>>> = grid
        .rules
        .iter()
        .enumerate()
        .map(|(a, rule)| rule.nodes.iter().map(|&x| hermite_values(x, n.get(a) as usize)).collect())
        .collect();
    let mut x = vec![0.0; grid.dim()];
    let mut sum = 0.0;
    for idx in 0..grid.len {
        let w = grid.point(idx, &mut x);
        let mut hn = 1.0;
        for (a, b) in basis.iter().enumerate() {
            let k = (idx / grid.strides[a]) % grid.rules[a].order();
            hn *= b[k][n.get(a) as usize];
        }
        sum += w * hn * phi(&x)?;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub n: MultiIndex,
    pub value: f64,
    pub se: Option<f64>,
    pub method: CoefficientMethod,
}

/// Coefficients `φ̂(n)` for every multi-index under a degree cap, with the
/// second moment `E[φ²]` needed for Parseval accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub dim: usize,
    pub degree_cap: u32,
    pub entries: Vec<CoefficientEntry>,
    pub second_moment: Option<f64>,
}

impl CoefficientTable {
    pub fn get(&self, n: &MultiIndex) -> Option<&CoefficientEntry> {
        self.entries.iter().find(|e| &e.n == n)
    }

    pub fn value(&self, n: &MultiIndex) -> Option<f64> {
        self.get(n).map(|e| e.value)
    }

    /// `Σ_n w(n) φ̂(n)²` for semigroup weights at time `t`.
    pub fn weighted_sum(&self, t: f64, kind: PerturbationKind) -> Result<f64> {
        let mut s = 0.0;
        for e in &self.entries {
            s += semigroup_weight(&e.n, t, kind)? * e.value * e.value;
        }
        Ok(s)
    }
}

/// All multi-indices of `dim` coordinates with `|n| <= total_cap` and
/// `n_e <= per_axis[e]`, ordered by total degree then lexicographically.
pub fn multi_indices(per_axis: &[u32], total_cap: u32) -> Vec<MultiIndex> {
    let dim = per_axis.len();
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; dim];
    fn rec(a: usize, left: u32, per_axis: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if a == per_axis.len() {
            out.push(cur.clone());
            return;
        }
        for d in 0..=per_axis[a].min(left) {
            cur[a] = d;
            rec(a + 1, left - d, per_axis, cur, out);
        }
        cur[a] = 0;
    }
    rec(0, total_cap, per_axis, &mut cur, &mut out);
    out.sort_by(|x, y| {
        let (sx, sy): (u32, u32) = (x.iter().sum(), y.iter().sum());
        sx.cmp(&sy).then_with(|| y.cmp(x))
    });
    out.into_iter().map(|d| MultiIndex::from_dense(&d)).collect()
}

/// Every coefficient with `|n| <= degree_cap` (and `n_e < order_e`) from a
/// single evaluation of `φ` on the tensor grid, contracting one axis at a
/// time.
pub fn coefficient_table<F>(phi: F, orders: &[usize], degree_cap: u32, exec: Execution) -> Result<CoefficientTable>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let grid = Grid::new(orders, MAX_TABLE_POINTS)?;
    let values = grid.evaluate(&phi, exec)?;
    let mut second = 0.0;
    let mut x = vec![0.0; grid.dim()];
    for (idx, v) in values.iter().enumerate() {
        second += grid.point(idx, &mut x) * v * v;
    }

    // Contract axis a: index (.., k_a, ..) with k_a a node becomes
    // (.., m_a, ..) with m_a a degree, degrees running 0..order_a.
    let mut tensor = values;
    let mut shape: Vec<usize> = orders.to_vec();
    for (a, rule) in grid.rules.iter().enumerate() {
        let q = rule.order();
        let m_count = q.min(degree_cap as usize + 1);
        let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| hermite_values(x, m_count - 1)).collect();
        let outer: usize = shape[..a].iter().product();
        let inner: usize = shape[a + 1..].iter().product();
        let mut next = vec![0.0; outer * m_count * inner];
        for o in 0..outer {
            for k in 0..q {
                let wk = rule.weights[k];
                let src = &tensor[(o * q + k) * inner..(o * q + k + 1) * inner];
                for (m, hv) in table[k].iter().enumerate() {
                    let coef = wk * hv;
                    let dst = &mut next[(o * m_count + m) * inner..(o * m_count + m + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += coef * s;
                    }
                }
            }
        }
        tensor = next;
        shape[a] = m_count;
    }

    let per_axis: Vec<u32> = shape.iter().map(|&m| (m - 1) as u32).collect();
    let mut strides = vec![1; shape.len()];
    for a in (0..shape.len() - 1).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let entries = multi_indices(&per_axis, degree_cap)
        .into_iter()
        .map(|n| {
            let pos: usize = (0..shape.len()).map(|a| n.get(a) as usize * strides[a]).sum();
            CoefficientEntry { value: tensor[pos], n, se: None, method: CoefficientMethod::Quadrature }
        })
        .collect();
    Ok(CoefficientTable { dim: shape.len(), degree_cap, entries, second_moment: Some(second) })
}

/// Monte Carlo estimate of `φ̂(n)` with a jackknife standard error.
pub fn coeff_montecarlo<F, R>(phi: F, dim: usize, n: &MultiIndex, samples: usize, rng: &mut R) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    if samples < MIN_MC_SAMPLES {
        return Err(Error::Statistics(format!("Monte Carlo coefficients need >= {MIN_MC_SAMPLES} samples")));
    }
    check_index(n, dim)?;
    let mut terms = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = standard_gaussians(dim, rng);
        terms.push(phi(&x)? * hermite_product(n, &x));
    }
    jackknife_mean(&terms)
}

/// Decay factor of `φ̂(n)²` under the perturbation: `e^{-|n| t}` for the
/// continuous kind, `e^{-|E(n)| t}` for the discrete kind.
pub fn semigroup_weight(n: &MultiIndex, t: f64, kind: PerturbationKind) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(argument(format!("semigroup time must be >= 0, got {t}")));
    }
    let k = match kind {
        PerturbationKind::Continuous => n.total_degree() as f64,
        PerturbationKind::Discrete => n.support().len() as f64,
    };
    Ok((-k * t).exp())
}

/// Outcome of the gauge-sign test for `φ̂_{ij}(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCriterion {
    /// `b_v` over GF(2): the exponent parity of `a_v` in
    /// `a_i a_j Π_e a_e^{n_e}`.
    pub parity: Vec<u8>,
    pub forced_zero: bool,
    /// A sign vector with `a_i a_j Π_e a_e^{n_e} = -1`, when one exists.
    pub witness: Option<Vec<i8>>,
}

/// Decides whether some gauge `a ∈ {±1}^N` flips the sign of
/// `a_i a_j Π_e a_e^{n_e}`, which forces `φ̂_{ij}(n) = 0` for odd disorder.
pub fn sign_criterion(graph: &Hypergraph, i: usize, j: usize, n: &MultiIndex) -> Result<SignCriterion> {
    graph.check_vertex(i)?;
    graph.check_vertex(j)?;
    if i == j {
        return Err(argument("sign criterion needs i != j"));
    }
    for e in n.support() {
        graph.check_edge(e)?;
    }
    let mut parity = vec![0u8; graph.n_vertices()];
    parity[i] ^= 1;
    parity[j] ^= 1;
    for e in n.odd_support() {
        for &v in graph.edge(e) {
            parity[v] ^= 1;
        }
    }
    let witness = parity.iter().position(|&b| b == 1).map(|v| {
        let mut a = vec![1i8; graph.n_vertices()];
        a[v] = -1;
        a
    });
    Ok(SignCriterion { forced_zero: witness.is_some(), parity, witness })
}

/// `I_n(a) = a_i a_j Π_e a_e^{n_e}` evaluated directly.
pub fn gauge_sign(graph: &Hypergraph, i: usize, j: usize, n: &MultiIndex, a: &[i8]) -> i8 {
    let mut s = a[i] * a[j];
    for (e, d) in n.iter() {
        if d % 2 == 1 {
            for &v in graph.edge(e) {
                s *= a[v];
            }
        }
    }
    s
}

/// `(Σ_{|n| <= cutoff} φ̂(n)², E[φ²] − that sum)`.
pub fn parseval_tail(table: &CoefficientTable, cutoff: u32) -> Result<(f64, f64)> {
    let total = table.second_moment.ok_or_else(|| Error::Statistics("coefficient table lacks E[φ²]".into()))?;
    let captured: f64 = table.entries.iter().filter(|e| e.n.total_degree() <= cutoff).map(|e| e.value * e.value).sum();
    Ok((captured, total - captured))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_polynomials() {
        let x = 1.3f64;
        let h = hermite_values(x, 3);
        assert_eq!(h[0], 1.0);
        assert_eq!(h[1], x);
        assert!((h[2] - (x * x - 1.0) / 2f64.sqrt()).abs() < 1e-15);
        assert!((h[3] - (x.powi(3) - 3.0 * x) / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rules_integrate_moments() {
        for order in [1, 2, 5, 12, 24, 40] {
            let r = gauss_hermite(order).unwrap();
            assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-13, "order {order}");
            if order >= 3 {
                assert!((r.integrate(|x| x.powi(4)) - 3.0).abs() < 1e-12);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(65).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let r = gauss_hermite(13).unwrap();
        for m in 0..=12 {
            for k in 0..=12 {
                let g = r.integrate(|x| hermite(m, x) * hermite(k, x));
                let want = if m == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "({m},{k}) -> {g}");
            }
        }
    }

    #[test]
    fn hermite_projects_onto_itself() {
        let phi = |x: &[f64]| Ok(hermite(3, x[1]));
        let n = MultiIndex::from_pairs([(1, 3)]);
        assert!((coeff_quadrature(phi, 2, &n, 8).unwrap() - 1.0).abs() < 1e-12);
        let other = MultiIndex::from_pairs([(1, 2)]);
        assert!(coeff_quadrature(phi, 2, &other, 8).unwrap().abs() < 1e-12);
    }

    #[test]
    fn table_matches_single_coefficients() {
        let phi = |x: &[f64]| Ok((0.7 * x[0]).tanh() * (0.4 * x[1] + 0.2 * x[2]).tanh());
        let orders = [10, 9, 8];
        let table = coefficient_table(phi, &orders, 6, Execution::Sequential).unwrap();
        for n in [MultiIndex::from_dense(&[1, 1, 0]), MultiIndex::from_dense(&[3, 0, 2]), MultiIndex::zero()] {
            let single = coeff_quadrature_orders(phi, &orders, &n).unwrap();
            assert!((table.value(&n).unwrap() - single).abs() < 1e-14, "{n}");
        }
        let par = coefficient_table(phi, &orders, 6, Execution::Parallel).unwrap();
        assert_eq!(table, par);
    }

    #[test]
    fn grid_caps() {
        let phi = |_: &[f64]| Ok(1.0);
        assert!(matches!(coeff_quadrature(phi, 7, &MultiIndex::zero(), 2), Err(Error::Capacity(_))));
        assert!(matches!(coeff_quadrature(phi, 2, &MultiIndex::zero(), 65), Err(Error::Capacity(_))));
        assert!(matches!(
            coefficient_table(phi, &[64, 64, 64, 64, 2], 2, Execution::Sequential),
            Err(Error::Capacity(_))
        ));
        assert!(coeff_quadrature(phi, 2, &MultiIndex::from_pairs([(3, 1)]), 4).is_err());
    }

    #[test]
    fn weights() {
        let n = MultiIndex::from_pairs([(0, 3)]);
        assert!((semigroup_weight(&n, 1.0, PerturbationKind::Continuous).unwrap() - (-3.0f64).exp()).abs() < 1e-16);
        assert!((semigroup_weight(&n, 1.0, PerturbationKind::Discrete).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(semigroup_weight(&MultiIndex::zero(), 2.0, PerturbationKind::Continuous).unwrap(), 1.0);
        assert!(semigroup_weight(&n, -0.1, PerturbationKind::Discrete).is_err());
    }

    #[test]
    fn remark_index_is_not_forced() {
        // edges {1,2},{1,3},{2,4} on vertices 0..3
        let g = Hypergraph::from_pairs(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let n = MultiIndex::from_dense(&[1, 2, 0]);
        let c = sign_criterion(&g, 0, 1, &n).unwrap();
        assert!(!c.forced_zero);
        assert!(c.witness.is_none());
    }

    #[test]
    fn vertex_outside_support_is_forced() {
        let g = Hypergraph::from_pairs(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let n = MultiIndex::from_dense(&[0, 0, 2]);
        let c = sign_criterion(&g, 0, 3, &n).unwrap();
        assert!(c.forced_zero);
        let a = c.witness.unwrap();
        assert_eq!(a, vec![-1, 1, 1, 1]);
        assert_eq!(gauge_sign(&g, 0, 3, &n, &a), -1);
    }

    #[test]
    fn parseval_accounting() {
        let phi = |x: &[f64]| Ok(hermite(1, x[0]));
        let t = coefficient_table(phi, &[6], 4, Execution::Sequential).unwrap();
        let (cap, tail) = parseval_tail(&t, 1).unwrap();
        assert!((cap - 1.0).abs() < 1e-12 && tail.abs() < 1e-12);
        let (cap0, _) = parseval_tail(&t, 0).unwrap();
        assert_eq!(cap0, t.value(&MultiIndex::zero()).unwrap().powi(2));
        let mut bare = t.clone();
        bare.second_moment = None;
        assert!(parseval_tail(&bare, 1).is_err());
    }

    #[test]
    fn multi_index_enumeration() {
        let all = multi_indices(&[2, 2], 3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], MultiIndex::zero());
        assert!(all.iter().all(|n| n.total_degree() <= 3));
    }
}
