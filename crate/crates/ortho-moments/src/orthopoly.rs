//! Orthonormal polynomial families and their evaluation.
//!
//! Three families are supported, each defined by the weight of its inner
//! product: Legendre (w(x) = 1 on [-1, 1]), second-kind Chebyshev
//! (w(x) = sqrt(1 - x^2) on [-1, 1]) and discrete Chebyshev (unit weights on
//! the integer nodes 0, 1, ..., M-1).
//!
//! Every family satisfies the three-term recurrence
//!
//! ```text
//! sqrt(b[k+1]) p[k+1](x) = (x - a[k]) p[k](x) - sqrt(b[k]) p[k-1](x),
//! p[0](x) = 1/sqrt(b[0]),   p[-1](x) = 0,
//! ```
//!
//! which [`evaluate_basis`] runs column by column, without recursive calls,
//! in O(points * degree) operations. The coefficients (a, b) have closed
//! forms per family, produced by [`recurrence_coefficients`].
//!
//! [`legendre_closed_form`] keeps the explicit-expansion evaluator around as
//! a deliberately naive baseline: the canonical basis {1, x, x^2, ...} is
//! severely ill-conditioned and the alternating binomial coefficients cancel
//! catastrophically at high degree, which is exactly what the benchmarks
//! demonstrate.

use crate::error::{Error, Result};
use ndarray::Array2;

/// One of the supported orthonormal polynomial families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolynomialFamily {
    /// Weight 1 on [-1, 1].
    Legendre,
    /// Weight sqrt(1 - x^2) on [-1, 1]; de-emphasizes the interval ends.
    ChebyshevSecondKind,
    /// Unit weights on the integer nodes 0..node_count-1.
    DiscreteChebyshev { node_count: usize },
}

impl PolynomialFamily {
    /// Weight function of the family's inner product.
    ///
    /// For the discrete family the weight is 1 at every node.
    pub fn weight(&self, x: f64) -> f64 {
        match self {
            PolynomialFamily::Legendre | PolynomialFamily::DiscreteChebyshev { .. } => 1.0,
            PolynomialFamily::ChebyshevSecondKind => (1.0 - x * x).max(0.0).sqrt(),
        }
    }
}

/// Recurrence coefficient pairs (a_k, b_k) for one family, degrees 0..=n.
///
/// Slot 0 of `beta` holds b_0 = <p~0, p~0>, used only to normalize p_0; the
/// arrays have n+1 entries for maximum degree n.
#[derive(Debug, Clone)]
pub struct RecurrenceCoefficients {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    family: PolynomialFamily,
}

impl RecurrenceCoefficients {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn family(&self) -> PolynomialFamily {
        self.family
    }

    pub fn max_degree(&self) -> usize {
        self.alpha.len() - 1
    }
}

/// Evaluations of p_0..p_n at a fixed point set, one polynomial per column.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    values: Array2<f64>,
    points: Vec<f64>,
    family: PolynomialFamily,
}

impl BasisMatrix {
    /// points x (degree+1) matrix; column j holds p_j at every point.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn family(&self) -> PolynomialFamily {
        self.family
    }

    pub fn max_degree(&self) -> usize {
        self.values.ncols() - 1
    }
}

/// Closed-form recurrence coefficients for `family` up to degree `n`.
///
/// * Legendre: a_k = 0, b_0 = 2, b_k = k^2 / (4k^2 - 1).
/// * Second-kind Chebyshev: a_k = 0, b_0 = pi/2, b_k = 1/4.
/// * Discrete Chebyshev on M nodes: a_k = (M-1)/2, b_0 = M,
///   b_k = (M^2/4) (1 - (k/M)^2) / (4 - 1/k^2); only degrees below M exist.
pub fn recurrence_coefficients(
    family: PolynomialFamily,
    n: usize,
) -> Result<RecurrenceCoefficients> {
    let (alpha, beta) = match family {
        PolynomialFamily::Legendre => {
            let alpha = vec![0.0; n + 1];
            let mut beta = vec![0.0; n + 1];
            beta[0] = 2.0;
            for (k, b) in beta.iter_mut().enumerate().skip(1) {
                let k2 = (k * k) as f64;
                *b = k2 / (4.0 * k2 - 1.0);
            }
            (alpha, beta)
        }
        PolynomialFamily::ChebyshevSecondKind => {
            let alpha = vec![0.0; n + 1];
            let mut beta = vec![0.25; n + 1];
            beta[0] = std::f64::consts::FRAC_PI_2;
            (alpha, beta)
        }
        PolynomialFamily::DiscreteChebyshev { node_count } => {
            if node_count < 2 {
                return Err(Error::TooFewNodes { node_count });
            }
            if n >= node_count {
                return Err(Error::DegreeTooHigh { degree: n, node_count });
            }
            let m = node_count as f64;
            let alpha = vec![(m - 1.0) / 2.0; n + 1];
            let mut beta = vec![0.0; n + 1];
            beta[0] = m;
            for (k, b) in beta.iter_mut().enumerate().skip(1) {
                let kf = k as f64;
                let ratio = kf / m;
                *b = (m * m / 4.0) * (1.0 - ratio * ratio) / (4.0 - 1.0 / (kf * kf));
            }
            (alpha, beta)
        }
    };
    Ok(RecurrenceCoefficients { alpha, beta, family })
}

/// Evaluate the orthonormal basis at `points` by the three-term recurrence.
///
/// Column 0 is the constant 1/sqrt(b_0); column k+1 follows from columns k
/// and k-1. No recursion, O(len(points) * degree) flops.
pub fn evaluate_basis(coef: &RecurrenceCoefficients, points: &[f64]) -> Result<BasisMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let m = points.len();
    let n = coef.max_degree();
    let alpha = coef.alpha();
    let beta = coef.beta();

    let mut values = Array2::zeros((m, n + 1));
    let p0 = 1.0 / beta[0].sqrt();
    values.column_mut(0).fill(p0);
    if n >= 1 {
        let inv = 1.0 / beta[1].sqrt();
        for (r, &x) in points.iter().enumerate() {
            values[(r, 1)] = (x - alpha[0]) * values[(r, 0)] * inv;
        }
    }
    for k in 1..n {
        let sq_k = beta[k].sqrt();
        let inv_next = 1.0 / beta[k + 1].sqrt();
        for (r, &x) in points.iter().enumerate() {
            values[(r, k + 1)] =
                ((x - alpha[k]) * values[(r, k)] - sq_k * values[(r, k - 1)]) * inv_next;
        }
    }

    Ok(BasisMatrix {
        values,
        points: points.to_vec(),
        family: coef.family(),
    })
}

/// Generalized binomial coefficient C(a, i) with real upper argument,
/// computed as the running product of (a - j)/(j + 1) factors. Avoids the
/// factorial overflow a naive formula would hit at moderate i.
fn generalized_binomial(a: f64, i: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..i {
        r *= (a - j as f64) / (j as f64 + 1.0);
    }
    r
}

/// Evaluate Legendre polynomials through their explicit expansion
///
/// ```text
/// P_i(x) = 2^i * sum_{k=0..i} C(i, k) C((i+k-1)/2, i) x^k
/// ```
///
/// rescaled by sqrt((2i+1)/2) so the columns target the same orthonormal
/// family as [`evaluate_basis`]. Kept as the unstable baseline: the
/// alternating coefficients grow like 4^i and cancellation destroys the
/// result long before f64 overflow (which only appears near degree 500 and
/// is expected behavior of the baseline, not masked here).
pub fn legendre_closed_form(n: usize, points: &[f64]) -> Result<BasisMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let m = points.len();
    let mut values = Array2::zeros((m, n + 1));
    for i in 0..=n {
        let scale = 2f64.powi(i as i32) * ((2 * i + 1) as f64 / 2.0).sqrt();
        for (r, &x) in points.iter().enumerate() {
            let mut sum = 0.0;
            let mut xk = 1.0;
            for k in 0..=i {
                let c = generalized_binomial(i as f64, k)
                    * generalized_binomial((i + k) as f64 / 2.0 - 0.5, i);
                sum += c * xk;
                xk *= x;
            }
            values[(r, i)] = scale * sum;
        }
    }
    Ok(BasisMatrix {
        values,
        points: points.to_vec(),
        family: PolynomialFamily::Legendre,
    })
}
