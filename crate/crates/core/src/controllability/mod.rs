//! Observability experiments: eigenfunction mass on control zones,
//! dissipation in dual norms, minimal-time estimates and the polynomial
//! counterexample for controls outside a rectangle.

mod error_term;
mod runge;
mod observe;

pub use error_term::{error_term_table, ErrorTermEntry, ErrorTermTable};
pub use runge::{
    disk_norm_sq, pacman_region, runge_counterexample, PacmanSamples, PolynomialTestCase, RungeReport,
    RungeStage, DEFAULT_STAGES,
};
pub use observe::{
    assemble_report, frequency_localized_sweep, observability_ratio_sweep, observe_frequency, tail_increasing,
    FrequencyPoint, LocalizedReport, MinimalTime, ObservabilityReport, RatioRow,
};

use crate::discretize::{Boundary, Grid1D};
use crate::eigensolve::EigenPair;
use crate::error::{Error, Result};
use crate::profiles::Interval;

/// The `y`-part of a control set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YPart {
    Full,
    /// `Ω_y` minus `[a, b]`.
    Complement { a: f64, b: f64 },
}

/// A control set `ω = ω_x × ω_y` with `ω_x` a finite union of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlZone {
    intervals: Vec<Interval>,
    y_part: YPart,
}

impl ControlZone {
    /// Vertical strips `ω_x × Ω_y`; intervals are sorted and must be disjoint.
    pub fn vertical(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::invalid("control zone needs at least one interval"));
        }
        if intervals.iter().any(|i| i.is_empty()) {
            return Err(Error::invalid("control zone intervals must have positive length"));
        }
        intervals.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        if intervals.windows(2).any(|w| w[0].hi >= w[1].lo) {
            return Err(Error::invalid("control zone intervals overlap"));
        }
        Ok(Self {
            intervals,
            y_part: YPart::Full,
        })
    }

    pub fn with_y_part(mut self, y_part: YPart) -> Result<Self> {
        if let YPart::Complement { a, b } = y_part {
            if !(a < b) {
                return Err(Error::invalid("excluded y-interval must have a < b"));
            }
        }
        self.y_part = y_part;
        Ok(self)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn y_part(&self) -> YPart {
        self.y_part
    }

    /// Distance from the singular line `x = 0` to the closure of `ω_x`.
    pub fn distance_to_singularity(&self) -> f64 {
        self.intervals
            .iter()
            .map(|i| {
                if i.contains(0.0) {
                    0.0
                } else {
                    i.lo.abs().min(i.hi.abs())
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Fail unless every interval lies in `[lo, hi]`.
    pub fn check_inside(&self, lo: f64, hi: f64) -> Result<()> {
        for i in &self.intervals {
            if i.lo < lo {
                return Err(Error::OutOfDomain { x: i.lo, lo, hi });
            }
            if i.hi > hi {
                return Err(Error::OutOfDomain { x: i.hi, lo, hi });
            }
        }
        Ok(())
    }
}

/// Mass `∫_ω v²`, kept in log form as well since it underflows for large `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneMass {
    pub mass: f64,
    pub log_mass: f64,
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln v(x)²` at an arbitrary `x` of a Dirichlet grid: log-linear between
/// interior nodes, linear in `v` next to the boundary.
pub(crate) fn log_square_at(v: &EigenPair, grid: &Grid1D, x: f64) -> Result<f64> {
    let (a, b) = (grid.a(), grid.b());
    if !(x >= a && x <= b) {
        return Err(Error::OutOfDomain { x, lo: a, hi: b });
    }
    let h = grid.spacing();
    let n = grid.len();
    let ext = |j: usize| -> (f64, f64) {
        if j == 0 {
            (a, f64::NEG_INFINITY)
        } else if j == n + 1 {
            (b, f64::NEG_INFINITY)
        } else {
            (grid.node(j - 1), 2.0 * v.log_abs[j - 1])
        }
    };
    let j = (((x - a) / h).floor() as usize).min(n);
    let (x0, l0) = ext(j);
    let (_, l1) = ext(j + 1);
    let t = ((x - x0) / h).clamp(0.0, 1.0);
    Ok(match (l0.is_finite(), l1.is_finite()) {
        (true, true) => l0 + t * (l1 - l0),
        (true, false) => l0 + 2.0 * (1.0 - t).ln(),
        (false, true) => l1 + 2.0 * t.ln(),
        (false, false) => f64::NEG_INFINITY,
    })
}

/// Trapezoid quadrature of `v²` over the zone's `x`-intervals.
pub fn zone_mass(v: &EigenPair, zone: &ControlZone, grid: &Grid1D) -> Result<ZoneMass> {
    if grid.boundary() != Boundary::Dirichlet {
        return Err(Error::invalid("zone masses are computed on Dirichlet grids"));
    }
    if v.log_abs.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: v.log_abs.len(),
        });
    }
    zone.check_inside(grid.a(), grid.b())?;
    let mut total = f64::NEG_INFINITY;
    for iv in zone.intervals() {
        let mut pts = vec![(iv.lo, log_square_at(v, grid, iv.lo)?)];
        for (i, x) in grid.nodes().into_iter().enumerate() {
            if x > iv.lo && x < iv.hi {
                pts.push((x, 2.0 * v.log_abs[i]));
            }
        }
        pts.push((iv.hi, log_square_at(v, grid, iv.hi)?));
        for w in pts.windows(2) {
            let width = w[1].0 - w[0].0;
            if width <= 0.0 {
                continue;
            }
            let panel = width.ln() + log_add(w[0].1, w[1].1) - std::f64::consts::LN_2;
            total = log_add(total, panel);
        }
    }
    Ok(ZoneMass {
        mass: total.exp(),
        log_mass: total,
    })
}

/// `e^{-2λT} / λ^{2s}`: the squared dual norm of a dissipated mode.
pub fn dual_norm_dissipation(lambda: f64, t: f64, s: f64) -> Result<f64> {
    Ok(log_dual_norm_dissipation(lambda, t, s)?.exp())
}

pub fn log_dual_norm_dissipation(lambda: f64, t: f64, s: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("dissipation needs lambda > 0, got {lambda}")));
    }
    if !(t >= 0.0) || !(s >= 0.0) {
        return Err(Error::invalid("dissipation needs T >= 0 and s >= 0"));
    }
    Ok(-2.0 * lambda * t - 2.0 * s * lambda.ln())
}
