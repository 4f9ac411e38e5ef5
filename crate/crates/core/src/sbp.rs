//! Legendre–Gauss–Lobatto collocation operators with the summation-by-parts property.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MIN_DEGREE: usize = 1;
pub const MAX_DEGREE: usize = 12;

/// Nodal operators on the reference element [−1, 1].
#[derive(Clone, Debug)]
pub struct SbpOperator {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `D[j][k] = l'_k(ξ_j)`.
    pub d: DMatrix<f64>,
    /// `Q = diag(ω) D`.
    pub q: DMatrix<f64>,
}

impl SbpOperator {
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    /// Boundary matrix `diag(−1, 0, …, 0, 1)`.
    pub fn boundary_matrix(&self) -> DMatrix<f64> {
        let n = self.n_nodes();
        let mut b = DMatrix::zeros(n, n);
        b[(0, 0)] = -1.0;
        b[(n - 1, n - 1)] = 1.0;
        b
    }
}

/// Legendre polynomials `P_n(x)` and `P_{n−1}(x)` by three-term recurrence.
pub fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// LGL nodes and weights of degree `n` (n + 1 points), ascending.
pub fn lgl_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut x: Vec<f64> = (0..=n)
        .map(|j| -(std::f64::consts::PI * j as f64 / nf).cos())
        .collect();
    for xj in x.iter_mut() {
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, *xj);
            let dx = (*xj * p - p_prev) / ((nf + 1.0) * p);
            *xj -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
    }
    x[0] = -1.0;
    x[n] = 1.0;
    for j in 0..=n / 2 {
        let m = 0.5 * (x[n - j] - x[j]);
        x[j] = -m;
        x[n - j] = m;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&xj| {
            let (p, _) = legendre_pair(n, xj);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    (x, w)
}

/// Barycentric weights `λ_j = 1/Π_{k≠j}(x_j − x_k)`.
pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            1.0 / (0..x.len())
                .filter(|&k| k != j)
                .map(|k| x[j] - x[k])
                .product::<f64>()
        })
        .collect()
}

/// Lagrange differentiation matrix on the given nodes.
pub fn differentiation_matrix(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let lam = barycentric_weights(x);
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = 0.0;
        for k in 0..n {
            if k != j {
                let v = lam[k] / lam[j] / (x[j] - x[k]);
                d[(j, k)] = v;
                diag -= v;
            }
        }
        d[(j, j)] = diag;
    }
    d
}

/// Matrix evaluating the Lagrange interpolant through `nodes` at `points`.
pub fn interpolation_matrix(nodes: &[f64], points: &[f64]) -> DMatrix<f64> {
    let lam = barycentric_weights(nodes);
    let mut m = DMatrix::zeros(points.len(), nodes.len());
    for (i, &xi) in points.iter().enumerate() {
        if let Some(k) = nodes.iter().position(|&xk| xk == xi) {
            m[(i, k)] = 1.0;
            continue;
        }
        let terms: Vec<f64> = nodes
            .iter()
            .zip(&lam)
            .map(|(&xk, &lk)| lk / (xi - xk))
            .collect();
        let denom: f64 = terms.iter().sum();
        for (k, t) in terms.iter().enumerate() {
            m[(i, k)] = t / denom;
        }
    }
    m
}

pub fn build_sbp(p: usize) -> Result<SbpOperator> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    let (nodes, weights) = lgl_nodes_weights(p);
    let d = differentiation_matrix(&nodes);
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(&weights)) * &d;
    Ok(SbpOperator {
        degree: p,
        nodes,
        weights,
        d,
        q,
    })
}

/// Discrete L2 norm `||Ω||⁻¹ (Σ J ω e²)^{1/2}` of a nodal error field.
///
/// `jacobians[e]` is the element Jacobian and `errors[e][k]` the error at node k.
pub fn discrete_l2_error(sbp: &SbpOperator, jacobians: &[f64], errors: &[Vec<f64>]) -> Result<f64> {
    if jacobians.len() != errors.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} elements but {} error rows",
            jacobians.len(),
            errors.len()
        )));
    }
    let mut sum = 0.0;
    let mut measure = 0.0;
    for (jac, row) in jacobians.iter().zip(errors) {
        if row.len() != sbp.n_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} nodes, got {}",
                sbp.n_nodes(),
                row.len()
            )));
        }
        measure += 2.0 * jac;
        sum += row
            .iter()
            .zip(&sbp.weights)
            .map(|(e, w)| jac * w * e * e)
            .sum::<f64>();
    }
    Ok(sum.sqrt() / measure)
}
