use serde::{Deserialize, Serialize};

use super::{OdeRhs, OdeSpec};
use crate::{Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;

/// Largest post-step correction the replicator clamp may apply.
pub const CLAMP_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> f64 {
        *self.states.last().expect("trajectory holds at least x0")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.states.iter().copied())
    }
}

/// Number of fixed steps needed to reach `t_end`.
pub(crate) fn step_count(dt: f64, t_end: f64) -> usize {
    if t_end <= 0.0 {
        0
    } else {
        (t_end / dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// One classic RK4 step. The increment is returned separately so callers can
/// accumulate it with compensation.
#[inline]
pub(crate) fn rk4_increment(f: impl Fn(f64) -> f64, x: f64, dt: f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * dt * k1);
    let k3 = f(x + 0.5 * dt * k2);
    let k4 = f(x + dt * k3);
    dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
}

/// Compensated (Neumaier) accumulator for the state so rounding does not
/// swamp the O(dt^4) truncation error over long horizons.
#[derive(Debug, Clone, Copy)]
pub(crate) struct State {
    value: f64,
    carry: f64,
}

impl State {
    pub(crate) fn new(value: f64) -> Self {
        Self { value, carry: 0.0 }
    }

    #[inline]
    pub(crate) fn get(&self) -> f64 {
        self.value + self.carry
    }

    #[inline]
    pub(crate) fn add(&mut self, delta: f64) {
        let t = self.value + delta;
        if self.value.abs() >= delta.abs() {
            self.carry += (self.value - t) + delta;
        } else {
            self.carry += (delta - t) + self.value;
        }
        self.value = t;
    }

    pub(crate) fn set(&mut self, value: f64) {
        *self = Self::new(value);
    }
}

/// Integrates `spec` with fixed-step classic RK4.
///
/// Times are `i * dt` (no accumulated drift). Replicator states are clamped
/// to `[0, 1]` after each step; a clamp larger than [`CLAMP_LIMIT`] means the
/// step is too coarse and is reported as an error.
pub fn integrate(spec: &OdeSpec) -> Result<Trajectory> {
    spec.validate()?;
    let steps = step_count(spec.dt, spec.t_end);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(spec.x0);

    let rhs = spec.rhs;
    let clamp = matches!(rhs, OdeRhs::Replicator { .. });
    let mut state = State::new(spec.x0);
    for i in 1..=steps {
        let x = state.get();
        state.add(rk4_increment(|s| rhs.rate(s), x, spec.dt));
        let mut next = state.get();
        if !next.is_finite() {
            return Err(Error::Divergence { step: i });
        }
        if clamp && !(0.0..=1.0).contains(&next) {
            let bounded = next.clamp(0.0, 1.0);
            let magnitude = (next - bounded).abs();
            if magnitude > CLAMP_LIMIT {
                return Err(Error::ClampExceeded { step: i, magnitude });
            }
            next = bounded;
            state.set(next);
        }
        times.push(i as f64 * spec.dt);
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{closed_form_logistic, ControlParams, PayoffSpec};
    use proptest::prelude::*;

    fn max_logistic_error(dt: f64) -> f64 {
        let spec = OdeSpec::replicator(PayoffSpec::constant(2.0, 1.0), 0.1, dt, 10.0);
        let traj = integrate(&spec).unwrap();
        traj.iter().map(|(t, x)| (x - closed_form_logistic(0.1, 1.0, t)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_closed_form() {
        assert!(max_logistic_error(1e-3) < 1e-6);
    }

    // Below dt = 5e-3 the error reaches f64 resolution of the state.
    #[test]
    fn fourth_order_convergence() {
        for dt in [0.1, 0.05, 0.02, 0.01, 0.005] {
            let ratio = max_logistic_error(dt) / max_logistic_error(dt / 2.0);
            assert!(ratio >= 12.0, "dt = {dt}: ratio {ratio}");
        }
    }

    #[test]
    fn zero_rate_is_constant() {
        let traj = integrate(&OdeSpec::replicator(PayoffSpec::constant(3.0, 3.0), 0.37, 0.01, 5.0)).unwrap();
        assert!(traj.states.iter().all(|&x| x == 0.37));
    }

    #[test]
    fn absorbing_one() {
        let traj = integrate(&OdeSpec::replicator(PayoffSpec::constant(1.0, 4.0), 1.0, 0.01, 5.0)).unwrap();
        assert!(traj.states.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn time_grid() {
        let traj = integrate(&OdeSpec::cusp(ControlParams::new(0.0, 1.0), 0.5, 0.3, 1.0)).unwrap();
        assert_eq!(traj.len(), 5);
        assert!(*traj.times.last().unwrap() >= 1.0 - 0.3);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        let empty = integrate(&OdeSpec::cusp(ControlParams::new(0.0, 1.0), 0.5, 0.3, 0.0)).unwrap();
        assert_eq!(empty.states, vec![0.5]);
    }

    #[test]
    fn divergence_names_step() {
        // s' = -s^3 from s = 1e3 with dt = 1 blows up immediately.
        let err = integrate(&OdeSpec::cusp(ControlParams::new(0.0, 0.0), 1e3, 1.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { step } if step <= 3), "{err}");
    }

    #[test]
    fn coarse_replicator_step_rejected() {
        let err = integrate(&OdeSpec::replicator(PayoffSpec::constant(50.0, 0.0), 0.9, 0.5, 5.0)).unwrap_err();
        assert!(matches!(err, Error::ClampExceeded { .. }), "{err}");
    }

    #[test]
    fn invalid_specs() {
        let p = PayoffSpec::constant(1.0, 0.0);
        assert!(integrate(&OdeSpec::replicator(p, 0.5, 0.0, 1.0)).is_err());
        assert!(integrate(&OdeSpec::replicator(p, 0.5, 0.1, -1.0)).is_err());
        assert!(integrate(&OdeSpec::replicator(p, 1.5, 0.1, 1.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn replicator_range_and_monotone(x0 in 0.0..=1.0f64, r in -3.0..3.0f64, s in -3.0..3.0f64,
                                         t in -3.0..3.0f64, p in -3.0..3.0f64) {
            let game = crate::abm::GameMatrix::new(r, s, t, p);
            let spec = OdeSpec::replicator(PayoffSpec::Matrix { game }, x0, 0.01, 5.0);
            let traj = integrate(&spec).unwrap();
            prop_assert!(traj.states.iter().all(|x| (0.0..=1.0).contains(x)));
            // One-dimensional flow: consecutive differences never change sign.
            let diffs: Vec<f64> = traj.states.windows(2).map(|w| w[1] - w[0]).filter(|d| d.abs() > 1e-15).collect();
            prop_assert!(diffs.iter().all(|d| *d > 0.0) || diffs.iter().all(|d| *d < 0.0));
        }
    }
}
