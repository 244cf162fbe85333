//! Quadrature weights for the moment integrals on [-1, 1].
//!
//! The production rule is the composite Simpson pattern 1, 4, 2, 4, ..., 2,
//! 4, 1 with per-axis step factor 2/(3(M-1)); the naive constant-weight rule
//! is retained purely as the inferior baseline the benchmarks compare
//! against.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Simpson,
    NaiveConstant,
}

/// Per-axis quadrature weights plus the scale factor that multiplies the
/// whole weighted sum.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    weights: Vec<f64>,
    scale: f64,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// Weights with the scale folded in, ready to multiply sample values.
    pub fn scaled_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * self.scale).collect()
    }

    /// Apply the rule to samples taken on the matching grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.weights.len());
        self.scale
            * samples
                .iter()
                .zip(&self.weights)
                .map(|(f, w)| f * w)
                .sum::<f64>()
    }
}

/// Composite Simpson weights for `points` samples on [-1, 1].
///
/// `points` must be odd and at least 3. The weight pattern is
/// 1, 4, 2, 4, ..., 2, 4, 1 and the scale is h/3 = 2/(3(points-1)), so the
/// rule reproduces the integral of the constant 1 exactly.
pub fn simpson_weights(points: usize) -> Result<QuadratureRule> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(Error::BadQuadratureSize { points });
    }
    let mut weights = vec![2.0; points];
    weights[0] = 1.0;
    weights[points - 1] = 1.0;
    for w in weights.iter_mut().skip(1).step_by(2) {
        *w = 4.0;
    }
    Ok(QuadratureRule {
        weights,
        scale: 2.0 / (3.0 * (points - 1) as f64),
        kind: RuleKind::Simpson,
    })
}

/// Constant unit weights; the per-moment scale lives in
/// [`naive_moment_scale`] because it varies with the moment order.
pub fn naive_weights(points: usize) -> Result<QuadratureRule> {
    if points == 0 {
        return Err(Error::BadQuadratureSize { points });
    }
    Ok(QuadratureRule {
        weights: vec![1.0; points],
        scale: 1.0,
        kind: RuleKind::NaiveConstant,
    })
}

/// Per-moment scale of the constant-weight rule,
/// (2i - 1)(2j - 1)/(rows * cols) with 1-based moment indices; `order_x`
/// and `order_y` here are the usual 0-based orders, so the first moment
/// (0, 0) gets exactly 1/(rows * cols).
///
/// The factor is the per-axis orthonormalization constant (2n+1)/2 of each
/// classical Legendre polynomial times the 4/(rows * cols) cell area, i.e.
/// it expects the *unnormalized* expansion; callers that evaluate
/// orthonormal columns must divide the column scaling back out (see
/// `moments::legendre_moments_closed_form`).
pub fn naive_moment_scale(order_x: usize, order_y: usize, rows: usize, cols: usize) -> f64 {
    ((2 * order_x + 1) * (2 * order_y + 1)) as f64 / (rows * cols) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::{evaluate_basis, recurrence_coefficients, PolynomialFamily};

    #[test]
    fn five_point_pattern() {
        let rule = simpson_weights(5).unwrap();
        assert_eq!(rule.weights(), &[1.0, 4.0, 2.0, 4.0, 1.0]);
        assert_eq!(rule.kind(), RuleKind::Simpson);
    }

    #[test]
    fn even_or_tiny_counts_rejected() {
        assert!(matches!(simpson_weights(4), Err(Error::BadQuadratureSize { points: 4 })));
        assert!(matches!(simpson_weights(1), Err(Error::BadQuadratureSize { points: 1 })));
        assert!(matches!(naive_weights(0), Err(Error::BadQuadratureSize { points: 0 })));
    }

    #[test]
    fn exact_for_cubics() {
        // x^2 over [-1, 1] with only three points
        let rule = simpson_weights(3).unwrap();
        let xs = [-1.0, 0.0, 1.0];
        let samples: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((rule.integrate(&samples) - 2.0 / 3.0).abs() <= 1e-13);

        // degree-3 check on a longer grid
        let m = 101;
        let rule = simpson_weights(m).unwrap();
        let xs: Vec<f64> = (1..=m)
            .map(|k| (2 * k) as f64 - (m + 1) as f64)
            .map(|v| v / (m - 1) as f64)
            .collect();
        let samples: Vec<f64> = xs.iter().map(|x| x * x * x - 0.25 * x).collect();
        assert!(rule.integrate(&samples).abs() <= 1e-13);
    }

    #[test]
    fn integrates_constants_exactly() {
        for m in [3usize, 5, 101, 1023] {
            let rule = simpson_weights(m).unwrap();
            let total: f64 = rule.weights().iter().sum::<f64>() * rule.scale();
            assert!((total - 2.0).abs() <= 1e-12, "M={m}: {total}");
        }
    }

    #[test]
    fn weights_positive_and_palindromic() {
        for m in [3usize, 9, 1023] {
            let rule = simpson_weights(m).unwrap();
            let w = rule.weights();
            assert!(w.iter().all(|&x| x > 0.0));
            for i in 0..m {
                assert_eq!(w[i], w[m - 1 - i]);
            }
        }
    }

    #[test]
    fn orthogonality_of_p5_p7_under_the_rule() {
        // oracle: the analytic integral is 0; the composite rule leaves a
        // residual of (h^4/180)[(p5 p7)'''(1) - (p5 p7)'''(-1)] = 3.1e-8 at
        // M = 1023
        let m = 1023;
        let rule = simpson_weights(m).unwrap();
        let xs: Vec<f64> = (1..=m)
            .map(|k| ((2 * k) as f64 - (m + 1) as f64) / (m - 1) as f64)
            .collect();
        let coef = recurrence_coefficients(PolynomialFamily::Legendre, 7).unwrap();
        let basis = evaluate_basis(&coef, &xs).unwrap();
        let samples: Vec<f64> = (0..m)
            .map(|r| basis.values()[(r, 5)] * basis.values()[(r, 7)])
            .collect();
        let residual = rule.integrate(&samples).abs();
        assert!(residual <= 1e-7, "residual {residual:.3e}");
        assert!(residual >= 1e-9, "suspiciously small residual {residual:.3e}");
    }

    #[test]
    fn naive_rule_is_all_ones() {
        let rule = naive_weights(4).unwrap();
        assert_eq!(rule.weights(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(rule.scale(), 1.0);
        assert_eq!(rule.kind(), RuleKind::NaiveConstant);
    }

    #[test]
    fn first_moment_scale_is_inverse_pixel_count() {
        // fixes the 1-based reading of the (2i-1)(2j-1) factor: the (0, 0)
        // moment uses K = 1/(rows*cols)
        let m = 64;
        assert_eq!(naive_moment_scale(0, 0, m, m), 1.0 / (m * m) as f64);
        assert_eq!(naive_moment_scale(1, 2, 10, 20), 15.0 / 200.0);
    }
}
