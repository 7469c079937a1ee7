//! Smooth cutoff pairs with `χ₁² + χ₂² = 1`.

use crate::discretize::Grid1D;
use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

fn f(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `g = f / (f(t) + f(1 - t))`: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = f(t);
        a / (a + f(1.0 - t))
    }
}

fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    // g = 1 / (1 + e^{1/t - 1/(1-t)})
    let e = (1.0 / t - 1.0 / (1.0 - t)).exp();
    if !e.is_finite() {
        return 0.0;
    }
    let de = e * (-1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t)));
    -de / ((1.0 + e) * (1.0 + e))
}

/// `(χ₁, χ₂, χ₁', χ₂')` at `x` for plateau radius `δR` and support radius `R`.
pub fn chi_pair(x: f64, r: f64, delta: f64) -> (f64, f64, f64, f64) {
    let band = (1.0 - delta) * r;
    let t = (x.abs() - delta * r) / band;
    let s = FRAC_PI_2 * smooth_step(t);
    let ds = FRAC_PI_2 * smooth_step_derivative(t) * x.signum() / band;
    let (sin, cos) = s.sin_cos();
    (cos, sin, -sin * ds, cos * ds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpPair {
    pub nodes: Vec<f64>,
    pub chi1: Vec<f64>,
    pub chi2: Vec<f64>,
    pub sup_dchi1: f64,
    pub sup_dchi2: f64,
    pub r: f64,
    pub delta: f64,
}

impl BumpPair {
    /// `max |χ₁² + χ₂² - 1|` over the nodes.
    pub fn partition_defect(&self) -> f64 {
        self.chi1
            .iter()
            .zip(&self.chi2)
            .map(|(a, b)| (a * a + b * b - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_i sup|χᵢ'|` scaled by `2(1 - δ)R / π`.
    pub fn derivative_constant(&self) -> f64 {
        self.sup_dchi1.max(self.sup_dchi2) * 2.0 * (1.0 - self.delta) * self.r / std::f64::consts::PI
    }
}

/// Sample the cutoff pair on `grid`.
pub fn bump_pair(r: f64, delta: f64, grid: &Grid1D) -> Result<BumpPair> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("bump radius must be positive, got {r}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("bump plateau fraction must lie in (0, 1), got {delta}")));
    }
    if grid.a() > -r || grid.b() < r {
        return Err(Error::invalid(format!("grid does not cover [-{r}, {r}]")));
    }
    let band = (1.0 - delta) * r;
    if grid.spacing() * 16.0 > band {
        return Err(Error::invalid(format!(
            "grid spacing {} gives fewer than 16 points across the transition band {band}",
            grid.spacing()
        )));
    }
    let nodes = grid.nodes();
    let mut chi1 = Vec::with_capacity(nodes.len());
    let mut chi2 = Vec::with_capacity(nodes.len());
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for &x in &nodes {
        let (c1, c2, e1, e2) = chi_pair(x, r, delta);
        chi1.push(c1);
        chi2.push(c2);
        d1 = d1.max(e1.abs());
        d2 = d2.max(e2.abs());
    }
    Ok(BumpPair {
        nodes,
        chi1,
        chi2,
        sup_dchi1: d1,
        sup_dchi2: d2,
        r,
        delta,
    })
}
