use super::{ControlParams, PayoffSpec};
use crate::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

/// `x (1 - x) (P_C - P_D)` at cooperator share `x`.
pub fn replicator_rhs(x: f64, payoffs: &PayoffSpec) -> Result<f64> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::Domain { value: x });
    }
    Ok(payoffs.rate_unchecked(x))
}

/// Cusp normal form `lambda + theta * s - s^3`.
pub fn cusp_rhs(s: f64, params: ControlParams) -> f64 {
    params.lambda + params.theta * s - s * s * s
}

/// Solution of `dx/dt = c x (1 - x)` from `x0`.
pub fn closed_form_logistic(x0: f64, c: f64, t: f64) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    // Written in terms of e^{-ct} once e^{ct} would overflow.
    let ct = c * t;
    if ct > 0.0 {
        let g = (-ct).exp();
        x0 / ((1.0 - x0) * g + x0)
    } else {
        let g = ct.exp();
        x0 * g / (1.0 - x0 + x0 * g)
    }
}

/// A one-parameter family of scalar vector fields `f(s, lambda)`.
pub trait RhsFamily: Sync {
    fn rate(&self, state: f64, lambda: f64) -> f64;

    /// Interval guaranteed to contain every equilibrium at `lambda`.
    fn state_bounds(&self, lambda: f64) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspFamily {
    pub theta: f64,
}

impl RhsFamily for CuspFamily {
    fn rate(&self, state: f64, lambda: f64) -> f64 {
        cusp_rhs(state, ControlParams { lambda, theta: self.theta })
    }

    fn state_bounds(&self, lambda: f64) -> (f64, f64) {
        // Cauchy bound for the roots of s^3 - theta s - lambda.
        let r = 1.0 + self.theta.abs() + lambda.abs();
        (-r, r)
    }
}

/// User-supplied family sampled on a rectangular `(lambda, state)` grid and
/// evaluated by bilinear interpolation. Lambdas outside the grid are clamped
/// to its edge; states outside it extrapolate linearly from the edge cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFamily {
    lambdas: Vec<f64>,
    states: Vec<f64>,
    rates: Vec<Vec<f64>>,
}

impl TabulatedFamily {
    /// `rates[i][j]` is `f(states[j], lambdas[i])`.
    pub fn new(lambdas: Vec<f64>, states: Vec<f64>, rates: Vec<Vec<f64>>) -> Result<Self> {
        fn increasing(v: &[f64]) -> bool {
            v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite())
        }
        if lambdas.is_empty() || !increasing(&lambdas) {
            return Err(Error::invalid("lambdas", "need a non-empty strictly increasing grid"));
        }
        if states.len() < 2 || !increasing(&states) {
            return Err(Error::invalid("states", "need at least two strictly increasing values"));
        }
        if rates.len() != lambdas.len() || rates.iter().any(|row| row.len() != states.len()) {
            return Err(Error::invalid("rates", "table shape must be lambdas x states"));
        }
        if rates.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::invalid("rates", "all samples must be finite"));
        }
        Ok(Self { lambdas, states, rates })
    }

    /// Samples `f` on the given grid.
    pub fn sample(lambdas: Vec<f64>, states: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let rates = lambdas.iter().map(|&l| states.iter().map(|&s| f(s, l)).collect()).collect();
        Self::new(lambdas, states, rates)
    }

    fn cell(grid: &[f64], x: f64) -> (usize, f64) {
        let i = match grid.partition_point(|&g| g <= x) {
            0 => 0,
            p => (p - 1).min(grid.len() - 2),
        };
        (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
    }

    fn row_rate(&self, row: usize, state: f64) -> f64 {
        let (j, w) = Self::cell(&self.states, state);
        let r = &self.rates[row];
        r[j] + w * (r[j + 1] - r[j])
    }
}

impl RhsFamily for TabulatedFamily {
    fn rate(&self, state: f64, lambda: f64) -> f64 {
        if self.lambdas.len() == 1 {
            return self.row_rate(0, state);
        }
        let l = lambda.clamp(self.lambdas[0], self.lambdas[self.lambdas.len() - 1]);
        let (i, w) = Self::cell(&self.lambdas, l);
        let a = self.row_rate(i, state);
        let b = self.row_rate(i + 1, state);
        a + w * (b - a)
    }

    fn state_bounds(&self, _lambda: f64) -> (f64, f64) {
        (self.states[0], self.states[self.states.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::GameMatrix;
    use proptest::prelude::*;

    #[test]
    fn replicator_examples() {
        let p = PayoffSpec::constant(2.0, 1.0);
        assert_eq!(replicator_rhs(0.5, &p).unwrap(), 0.25);
        assert_eq!(replicator_rhs(0.0, &p).unwrap(), 0.0);
        assert_eq!(replicator_rhs(0.5, &PayoffSpec::constant(3.0, 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn replicator_domain() {
        let p = PayoffSpec::constant(2.0, 1.0);
        assert!(matches!(replicator_rhs(1.1, &p), Err(Error::Domain { .. })));
        assert!(matches!(replicator_rhs(-1e-6, &p), Err(Error::Domain { .. })));
        assert!(replicator_rhs(1.0 + 1e-13, &p).is_ok());
        assert!(replicator_rhs(f64::NAN, &p).is_err());
    }

    #[test]
    fn replicator_matrix_mode() {
        // Coordination game: P_C(x) = x, P_D(x) = 1 - x.
        let p = PayoffSpec::Matrix { game: GameMatrix::new(1.0, 0.0, 0.0, 1.0) };
        assert_eq!(replicator_rhs(0.5, &p).unwrap(), 0.0);
        assert!(replicator_rhs(0.4, &p).unwrap() < 0.0);
        assert!(replicator_rhs(0.6, &p).unwrap() > 0.0);
        // x = 0.25: 0.25 * 0.75 * (0.25 - 0.75)
        assert!((replicator_rhs(0.25, &p).unwrap() + 0.09375).abs() < 1e-15);
    }

    #[test]
    fn cusp_examples() {
        assert_eq!(cusp_rhs(0.0, ControlParams::new(0.0, 1.0)), 0.0);
        assert_eq!(cusp_rhs(1.0, ControlParams::new(0.0, 1.0)), 0.0);
        assert_eq!(cusp_rhs(2.0, ControlParams::new(0.5, 1.0)), 0.5 + 2.0 - 8.0);
    }

    #[test]
    fn logistic_examples() {
        assert_eq!(closed_form_logistic(0.5, 0.0, 123.0), 0.5);
        assert_eq!(closed_form_logistic(0.0, 3.0, 5.0), 0.0);
        let mut prev = 0.1;
        for t in 1..200 {
            let x = closed_form_logistic(0.1, 1.0, t as f64 * 0.5);
            assert!(x >= prev && x <= 1.0);
            prev = x;
        }
        assert!((prev - 1.0).abs() < 1e-12);
        assert!(closed_form_logistic(0.9, -1.0, 1e4) >= 0.0);
    }

    #[test]
    fn tabulated_reproduces_linear_family() {
        // f(s, l) = l - s is bilinear, so interpolation is exact.
        let fam = TabulatedFamily::sample(vec![-1.0, 0.0, 1.0], vec![-2.0, 0.0, 2.0], |s, l| l - s).unwrap();
        for &(s, l) in &[(0.3, 0.2), (-1.7, -0.9), (1.9, 0.5)] {
            assert!((fam.rate(s, l) - (l - s)).abs() < 1e-12);
        }
        assert_eq!(fam.state_bounds(0.0), (-2.0, 2.0));
        assert!(TabulatedFamily::new(vec![0.0], vec![0.0], vec![vec![0.0]]).is_err());
    }

    proptest! {
        #[test]
        fn replicator_boundaries_are_fixed(pc in -10.0..10.0f64, pd in -10.0..10.0f64,
                                           r in -5.0..5.0f64, s in -5.0..5.0f64,
                                           t in -5.0..5.0f64, p in -5.0..5.0f64) {
            for spec in [PayoffSpec::constant(pc, pd), PayoffSpec::Matrix { game: GameMatrix::new(r, s, t, p) }] {
                prop_assert_eq!(replicator_rhs(0.0, &spec).unwrap(), 0.0);
                prop_assert_eq!(replicator_rhs(1.0, &spec).unwrap(), 0.0);
            }
        }
    }
}
