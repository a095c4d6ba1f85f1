use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Every reported root satisfies `|rhs(root)| < ROOT_TOL`.
pub const ROOT_TOL: f64 = 1e-10;
/// Step of the centred difference used to classify stability.
pub const FD_STEP: f64 = 1e-6;
/// Derivatives with magnitude below this are labelled marginal.
pub const MARGINAL_BAND: f64 = 1e-8;
pub const DEFAULT_GRID_N: usize = 1024;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub roots: Vec<FixedPoint>,
}

impl FixedPointReport {
    pub fn stable_count(&self) -> usize {
        self.roots.iter().filter(|r| r.stability == Stability::Stable).count()
    }

    pub fn stable(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().filter(|r| r.stability == Stability::Stable).map(|r| r.location)
    }
}

fn classify(rhs: &impl Fn(f64) -> f64, x: f64) -> Stability {
    let slope = (rhs(x + FD_STEP) - rhs(x - FD_STEP)) / (2.0 * FD_STEP);
    if slope.abs() < MARGINAL_BAND {
        Stability::Marginal
    } else if slope < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn bisect(rhs: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    let mut best = (f64::INFINITY, a);
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        let fm = rhs(m);
        if fm.abs() < best.0 {
            best = (fm.abs(), m);
        }
        if fm.abs() < ROOT_TOL {
            return Some(m);
        }
        if m <= a || m >= b {
            break;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (best.0 < ROOT_TOL).then_some(best.1)
}

/// Scans `grid_n` equal intervals of `[lo, hi]` for sign changes of `rhs`
/// and refines each by bisection.
///
/// Grid points where `|rhs| < ROOT_TOL` are reported directly. Double roots
/// where `rhs` touches zero without changing sign between grid points are
/// not detected.
pub fn find_fixed_points(rhs: impl Fn(f64) -> f64, lo: f64, hi: f64, grid_n: usize) -> Result<FixedPointReport> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("lo/hi", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if grid_n < 2 {
        return Err(Error::invalid("grid_n", format!("must be >= 2, got {grid_n}")));
    }
    let width = hi - lo;
    let grid: Vec<(f64, f64)> = (0..=grid_n)
        .map(|i| {
            let x = if i == grid_n { hi } else { lo + width * (i as f64 / grid_n as f64) };
            (x, rhs(x))
        })
        .collect();

    let mut roots = Vec::new();
    for (i, &(x, fx)) in grid.iter().enumerate() {
        if fx.abs() < ROOT_TOL {
            roots.push(x);
            continue;
        }
        if let Some(&(xn, fxn)) = grid.get(i + 1) {
            if fxn.abs() >= ROOT_TOL && (fx < 0.0) != (fxn < 0.0) {
                if let Some(r) = bisect(&rhs, x, xn, fx) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(FixedPointReport {
        roots: roots.into_iter().map(|location| FixedPoint { location, stability: classify(&rhs, location) }).collect(),
    })
}
