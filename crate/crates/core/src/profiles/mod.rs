//! Degeneracy profiles `q`, transverse weights `r`, potentials `V` and
//! measures `h`, together with the structural check on `q` near the
//! singular line `x = 0`.

mod agmon;
mod bump;

pub use agmon::{
    agmon_distance, agmon_set_distance, sublevel_set_fdelta, AgmonMetric, FDelta, Interval,
    SetDistance,
};
pub use bump::{bump_pair, chi_pair, smooth_step, BumpPair};

use crate::discretize::Grid1D;
use crate::error::{Error, Result};
use crate::interp::Pchip;

/// Derivatives of `tan` at the origin, orders 0..=9.
const TAN_DERIVATIVES: [f64; 10] = [0.0, 1.0, 0.0, 2.0, 0.0, 16.0, 0.0, 272.0, 0.0, 7936.0];

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileForm {
    /// `q(x) = x^power`
    Monomial { power: u32 },
    /// `q(x) = sum c_k x^k`
    Polynomial(Vec<f64>),
    /// `q(x) = tan(x)`
    Tangent,
    Tabulated(Pchip),
}

/// The degeneracy profile `q` on `(-L₋, L₊)` together with its declared
/// vanishing order `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyProfile {
    form: ProfileForm,
    gamma: u32,
    l_minus: f64,
    l_plus: f64,
}

impl DegeneracyProfile {
    pub fn new(form: ProfileForm, gamma: u32, l_minus: f64, l_plus: f64) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::invalid("degeneracy order gamma must be at least 1"));
        }
        if !(l_minus > 0.0 && l_plus > 0.0 && l_minus.is_finite() && l_plus.is_finite()) {
            return Err(Error::invalid(format!(
                "domain half-lengths must be positive, got ({l_minus}, {l_plus})"
            )));
        }
        match &form {
            ProfileForm::Tangent => {
                if l_minus.max(l_plus) >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::invalid("tangent profile needs a domain inside (-pi/2, pi/2)"));
                }
            }
            ProfileForm::Polynomial(c) => {
                if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("polynomial profile needs finite coefficients"));
                }
            }
            ProfileForm::Tabulated(p) => {
                let (lo, hi) = p.range();
                if lo > -l_minus || hi < l_plus {
                    return Err(Error::invalid(format!(
                        "tabulated profile covers [{lo}, {hi}], domain is [{}, {l_plus}]",
                        -l_minus
                    )));
                }
            }
            ProfileForm::Monomial { power } => {
                if *power == 0 {
                    return Err(Error::invalid("monomial power must be at least 1"));
                }
            }
        }
        Ok(Self {
            form,
            gamma,
            l_minus,
            l_plus,
        })
    }

    /// `q(x) = x^power`, with the declared order equal to `power`.
    pub fn monomial(power: u32, l_minus: f64, l_plus: f64) -> Result<Self> {
        Self::new(ProfileForm::Monomial { power }, power, l_minus, l_plus)
    }

    pub fn polynomial(coeffs: Vec<f64>, gamma: u32, l_minus: f64, l_plus: f64) -> Result<Self> {
        Self::new(ProfileForm::Polynomial(coeffs), gamma, l_minus, l_plus)
    }

    pub fn tangent(l_minus: f64, l_plus: f64) -> Result<Self> {
        Self::new(ProfileForm::Tangent, 1, l_minus, l_plus)
    }

    /// Tabulated profile; the domain is the table range.
    pub fn tabulated(table: Pchip, gamma: u32) -> Result<Self> {
        let (lo, hi) = table.range();
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::invalid("tabulated profile must straddle x = 0"));
        }
        Self::new(ProfileForm::Tabulated(table), gamma, -lo, hi)
    }

    /// Override the declared degeneracy order.
    pub fn with_gamma(mut self, gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::invalid("degeneracy order gamma must be at least 1"));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_domain(self, l_minus: f64, l_plus: f64) -> Result<Self> {
        Self::new(self.form, self.gamma, l_minus, l_plus)
    }

    pub fn form(&self) -> &ProfileForm {
        &self.form
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn l_minus(&self) -> f64 {
        self.l_minus
    }

    pub fn l_plus(&self) -> f64 {
        self.l_plus
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.l_minus, self.l_plus)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= -self.l_minus && x <= self.l_plus
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            ProfileForm::Monomial { power } => x.powi(*power as i32),
            ProfileForm::Polynomial(c) => horner(c, x),
            ProfileForm::Tangent => x.tan(),
            ProfileForm::Tabulated(p) => p.eval(x),
        }
    }

    /// `q^(γ)(0)`: closed form where available, central differences otherwise.
    pub fn dgamma0(&self) -> f64 {
        let g = self.gamma as usize;
        match &self.form {
            ProfileForm::Monomial { power } => {
                if *power == self.gamma {
                    factorial(self.gamma)
                } else {
                    0.0
                }
            }
            ProfileForm::Polynomial(c) => c.get(g).copied().unwrap_or(0.0) * factorial(self.gamma),
            ProfileForm::Tangent if g < TAN_DERIVATIVES.len() => TAN_DERIVATIVES[g],
            _ => {
                let step = default_fd_step(self);
                central_derivative(|x| self.eval(x), self.gamma, step)
            }
        }
    }

    /// `q^(γ)(0) / γ!`, the coefficient of the model potential `x^γ`.
    pub fn leading_coefficient(&self) -> f64 {
        self.dgamma0() / factorial(self.gamma)
    }
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Central difference of order `k` at 0 with nodes `(k/2 - j) * step`.
pub(crate) fn central_derivative<F: Fn(f64) -> f64>(f: F, k: u32, step: f64) -> f64 {
    let half = k as f64 / 2.0;
    let mut s = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(k, j) * f((half - j as f64) * step);
    }
    s / step.powi(k as i32)
}

fn default_fd_step(profile: &DegeneracyProfile) -> f64 {
    let base = 1e-3 * profile.l_minus.min(profile.l_plus);
    match &profile.form {
        // the interpolant is only C¹: difference on the table scale
        ProfileForm::Tabulated(p) => {
            let xs = p.xs();
            let spacing = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            base.max(spacing)
        }
        _ => base,
    }
}

/// Outcome of the structural check on `q` at the singular line.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Report {
    pub pass: bool,
    pub gamma: u32,
    pub step: f64,
    /// Central-difference estimates of `q^(k)(0)` for `k = 0..=γ`.
    pub derivative_estimates: Vec<f64>,
    /// Smallest `|q|` on the sampled domain outside the excluded neighbourhood.
    pub min_abs_q: f64,
    /// Radius of the excluded neighbourhood of 0.
    pub excluded_radius: f64,
    pub sign_change: bool,
    pub failures: Vec<String>,
}

/// Check that `q` vanishes to order exactly `γ` at 0 and nowhere else.
pub fn validate_h2(profile: &DegeneracyProfile, tol: f64) -> Result<H2Report> {
    let gamma = profile.gamma;
    if gamma == 0 {
        return Err(Error::invalid("gamma must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let step = default_fd_step(profile);
    let reach = (gamma as f64 / 2.0 + 1.0) * step;
    if reach > profile.l_minus.min(profile.l_plus) {
        return Err(Error::invalid("profile is not evaluable on the difference stencil"));
    }
    if step < 1e-12 || step.powi(gamma as i32) < 1e-250 {
        return Err(Error::invalid(format!(
            "difference stencil underflow: step {step:e} is too small for order {gamma}"
        )));
    }
    let mut estimates = Vec::with_capacity(gamma as usize + 1);
    for k in 0..=gamma {
        let d = central_derivative(|x| profile.eval(x), k, step);
        if !d.is_finite() {
            return Err(Error::invalid(format!("profile not evaluable near 0 (order {k} gave {d})")));
        }
        estimates.push(d);
    }
    let mut failures = Vec::new();
    for (k, d) in estimates.iter().enumerate().take(gamma as usize) {
        if d.abs() > tol {
            failures.push(format!("derivative of order {k} at 0 is {d:e}, expected 0"));
        }
    }
    let top = estimates[gamma as usize];
    if !(top > tol) {
        failures.push(format!("derivative of order {gamma} at 0 is {top:e}, expected > {tol:e}"));
    }

    let (lo, hi) = profile.domain();
    let excluded_radius = 0.05 * profile.l_minus.min(profile.l_plus);
    let samples = 2001;
    let mut min_abs_q = f64::INFINITY;
    let mut sign_change = false;
    let mut prev_left: Option<f64> = None;
    let mut prev_right: Option<f64> = None;
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        if x.abs() < excluded_radius {
            continue;
        }
        let q = profile.eval(x);
        min_abs_q = min_abs_q.min(q.abs());
        let prev = if x < 0.0 { &mut prev_left } else { &mut prev_right };
        if let Some(p) = *prev {
            if p * q < 0.0 {
                sign_change = true;
            }
        }
        if q != 0.0 {
            *prev = Some(q);
        }
    }
    if !(min_abs_q > tol) {
        failures.push(format!("|q| drops to {min_abs_q:e} away from 0"));
    }
    if sign_change {
        failures.push("q changes sign away from 0".to_string());
    }
    Ok(H2Report {
        pass: failures.is_empty(),
        gamma,
        step,
        derivative_estimates: estimates,
        min_abs_q,
        excluded_radius,
        sign_change,
        failures,
    })
}

/// Potential `V(x)` of the Fourier components.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    Polynomial(Vec<f64>),
    Tabulated(Pchip),
}

impl PotentialSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant(c) => *c,
            PotentialSpec::Polynomial(c) => horner(c, x),
            PotentialSpec::Tabulated(p) => p.eval(x),
        }
    }

    /// Sampled `sup |V|` on `[lo, hi]` (2001 uniform points plus table nodes).
    pub fn sup_norm(&self, lo: f64, hi: f64) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2001 {
            let x = lo + (hi - lo) * i as f64 / 2000.0;
            m = m.max(self.eval(x).abs());
        }
        if let PotentialSpec::Tabulated(p) = self {
            for (x, y) in p.xs().iter().zip(p.ys()) {
                if *x >= lo && *x <= hi {
                    m = m.max(y.abs());
                }
            }
        }
        m
    }

    /// `V + c`.
    pub fn shifted(&self, c: f64) -> PotentialSpec {
        match self {
            PotentialSpec::Zero => PotentialSpec::Constant(c),
            PotentialSpec::Constant(v) => PotentialSpec::Constant(v + c),
            PotentialSpec::Polynomial(coeffs) => {
                let mut coeffs = coeffs.clone();
                if coeffs.is_empty() {
                    coeffs.push(0.0);
                }
                coeffs[0] += c;
                PotentialSpec::Polynomial(coeffs)
            }
            PotentialSpec::Tabulated(p) => {
                let ys = p.ys().iter().map(|y| y + c).collect();
                PotentialSpec::Tabulated(Pchip::new(p.xs().to_vec(), ys).expect("shift keeps table valid"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightForm {
    One,
    Polynomial(Vec<f64>),
    Tabulated(Pchip),
}

/// Transverse weight `r(y)` with its positivity floor.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    form: WeightForm,
    floor: f64,
}

impl WeightSpec {
    pub const DEFAULT_FLOOR: f64 = 1e-6;

    pub fn one() -> Self {
        Self {
            form: WeightForm::One,
            floor: Self::DEFAULT_FLOOR,
        }
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::polynomial(vec![c], Self::DEFAULT_FLOOR)
    }

    pub fn polynomial(coeffs: Vec<f64>, floor: f64) -> Result<Self> {
        Self::new(WeightForm::Polynomial(coeffs), floor)
    }

    pub fn new(form: WeightForm, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::invalid("weight floor must be positive"));
        }
        Ok(Self { form, floor })
    }

    pub fn form(&self) -> &WeightForm {
        &self.form
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn is_one(&self) -> bool {
        matches!(self.form, WeightForm::One)
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.form {
            WeightForm::One => 1.0,
            WeightForm::Polynomial(c) => horner(c, y),
            WeightForm::Tabulated(p) => p.eval(y),
        }
    }

    /// Check `r >= floor` on every node of `grid`.
    pub fn validate_on(&self, grid: &Grid1D) -> Result<()> {
        for y in grid.nodes() {
            let r = self.eval(y);
            if !(r >= self.floor) {
                return Err(Error::invalid(format!("weight r({y}) = {r} below floor {}", self.floor)));
            }
        }
        Ok(())
    }
}

/// Density `h(x)` of the measure `h(x) dx dy`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    One,
    /// `h(x) = exp(a x)`
    Exponential(f64),
    /// `h(x) = cos(x)`
    Cosine,
    Tabulated(Pchip),
}

impl MeasureSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MeasureSpec::One => 1.0,
            MeasureSpec::Exponential(a) => (a * x).exp(),
            MeasureSpec::Cosine => x.cos(),
            MeasureSpec::Tabulated(p) => p.eval(x),
        }
    }

    /// Closed-form `(√h)'' / √h` for the built-in measures.
    fn induced_closed_form(&self, x: f64) -> Option<f64> {
        match self {
            MeasureSpec::One => Some(0.0),
            MeasureSpec::Exponential(a) => Some(0.25 * a * a),
            MeasureSpec::Cosine => {
                let t = x.tan();
                Some(-0.5 - 0.25 * t * t)
            }
            MeasureSpec::Tabulated(_) => None,
        }
    }
}

/// Potential `V = (√h)'' / √h` produced by conjugating with `√h`, tabulated
/// on the nodes of `grid`.
pub fn potential_from_measure(h: &MeasureSpec, grid: &Grid1D) -> Result<PotentialSpec> {
    let nodes = grid.nodes();
    for &x in &nodes {
        let v = h.eval(x);
        if !(v > 0.0) {
            return Err(Error::invalid(format!("measure density h({x}) = {v} is not positive")));
        }
    }
    let root = |x: f64| h.eval(x).sqrt();
    let mut values = Vec::with_capacity(nodes.len());
    for &x in &nodes {
        let v = match h.induced_closed_form(x) {
            Some(v) => v,
            None => {
                let mut s = grid.spacing();
                if let MeasureSpec::Tabulated(p) = h {
                    let (lo, hi) = p.range();
                    let room = (x - lo).min(hi - x);
                    if room <= 0.0 {
                        return Err(Error::invalid(format!("measure table does not cover x = {x}")));
                    }
                    s = s.min(room / 2.0);
                }
                let d2 = (-root(x + 2.0 * s) + 16.0 * root(x + s) - 30.0 * root(x) + 16.0 * root(x - s)
                    - root(x - 2.0 * s))
                    / (12.0 * s * s);
                d2 / root(x)
            }
        };
        values.push(v);
    }
    Ok(PotentialSpec::Tabulated(Pchip::new(nodes, values)?))
}
