//! The classical model `-u'' + (q^(γ)(0)/γ!)² ξ² x^{2γ} u`: ground values,
//! the concentration scale `x_ξ` and the barrier `W_ξ = A e^{-B x^{γ+1}}`.

use std::io::Write;

use crate::discretize::{assemble_x_operator, Grid1D};
use crate::eigensolve::{eigenpair_k, EigenPair};
use crate::error::{Error, Result};
use crate::profiles::{factorial, DegeneracyProfile, PotentialSpec};

/// Tolerance used for eigenvector residuals throughout the sweeps.
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGroundData {
    pub xi: f64,
    pub gamma: u32,
    /// `q^(γ)(0) / γ!`
    pub coefficient: f64,
    pub mu: f64,
    pub x_xi: f64,
    pub a_xi: f64,
    pub b_xi: f64,
    pub ground: EigenPair,
    pub grid: Grid1D,
}

/// `x_ξ = (μ / (c² ξ²))^{1/(2γ)}` with `c = q^(γ)(0)/γ!`.
pub fn concentration_scale(mu: f64, coefficient: f64, xi: f64, gamma: u32) -> f64 {
    (mu / (coefficient * coefficient * xi * xi)).powf(1.0 / (2.0 * gamma as f64))
}

/// Enforce the grid rule `n >= 8 L / x_ξ`; warn below `32 L / x_ξ`.
pub fn check_resolution(grid: &Grid1D, x_xi: f64) -> Result<()> {
    let l = grid.half_length();
    let required = (8.0 * l / x_xi).ceil() as usize;
    if grid.len() < required {
        return Err(Error::Resolution {
            n: grid.len(),
            required,
        });
    }
    let advised = (32.0 * l / x_xi).ceil() as usize;
    if grid.len() < advised {
        log::warn!("grid with {} nodes is below the advised {advised} for x_xi = {x_xi:e}", grid.len());
    }
    Ok(())
}

/// Ground value and barrier data of the classical model at frequency `xi`.
pub fn classical_mu(profile: &DegeneracyProfile, xi: f64, grid: &Grid1D) -> Result<ClassicalGroundData> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::invalid("the classical model needs a nonzero finite frequency"));
    }
    let gamma = profile.gamma();
    let coefficient = profile.leading_coefficient();
    // a grid too coarse for the well also corrupts μ, so check the scaling
    // length before trusting x_ξ
    check_resolution(grid, (coefficient.abs() * xi.abs()).powf(-1.0 / (gamma as f64 + 1.0)))?;
    let op = assemble_x_operator(grid, profile, xi, &PotentialSpec::Zero, true)?;
    let ground = eigenpair_k(&op, 1, EIGEN_TOL)?;
    let mu = ground.value;
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("classical ground value {mu} is not positive")));
    }
    let x_xi = concentration_scale(mu, coefficient, xi, gamma);
    check_resolution(grid, x_xi)?;
    let g1 = gamma as f64 + 1.0;
    let b_xi = xi.abs() * coefficient.abs() / g1;
    let a_xi = 2.0 * x_xi.sqrt() * mu * (b_xi * x_xi.powf(g1)).exp() / (g1 * b_xi * x_xi.powi(gamma as i32));
    Ok(ClassicalGroundData {
        xi,
        gamma,
        coefficient,
        mu,
        x_xi,
        a_xi,
        b_xi,
        ground,
        grid: *grid,
    })
}

fn check_barrier_domain(data: &ClassicalGroundData, x: f64) -> Result<()> {
    if x.abs() < data.x_xi {
        return Err(Error::invalid(format!(
            "barrier is only defined for |x| >= x_xi = {}, got x = {x}",
            data.x_xi
        )));
    }
    Ok(())
}

/// `W_ξ(x) = A_ξ e^{-B_ξ |x|^{γ+1}}` for `|x| >= x_ξ`.
pub fn supersolution(data: &ClassicalGroundData, x: f64) -> Result<f64> {
    Ok(log_supersolution(data, x)?.exp())
}

/// `ln W_ξ(x)`, finite where `W_ξ` underflows.
pub fn log_supersolution(data: &ClassicalGroundData, x: f64) -> Result<f64> {
    check_barrier_domain(data, x)?;
    Ok(data.a_xi.ln() - data.b_xi * x.abs().powf(data.gamma as f64 + 1.0))
}

/// Result of comparing the ground state with the barrier on `|x| >= x_ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dominance {
    pub holds: bool,
    /// `max (ln v - ln W)` over the compared nodes; negative when `v < W`.
    pub worst_log_margin: f64,
    pub worst_x: f64,
    pub nodes_checked: usize,
}

/// Check `v_ξ <= W_ξ` at every grid node with `|x| >= x_ξ`, in log scale.
pub fn check_dominance(data: &ClassicalGroundData) -> Result<Dominance> {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_x = f64::NAN;
    let mut count = 0;
    for (i, x) in data.grid.nodes().into_iter().enumerate() {
        if x.abs() < data.x_xi {
            continue;
        }
        let margin = data.ground.log_abs[i] - log_supersolution(data, x)?;
        count += 1;
        if margin > worst {
            worst = margin;
            worst_x = x;
        }
    }
    Ok(Dominance {
        holds: worst <= 0.0,
        worst_log_margin: worst,
        worst_x,
        nodes_checked: count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub tau: f64,
    pub mu: f64,
    pub mu_stretched: f64,
    /// `|μ - τ² μ̃| / μ`
    pub mismatch: f64,
}

/// Compare `μ_ξ` on `(-L₋, L₊)` with `τ² μ̃_1` on the stretched interval
/// `(-τL₋, τL₊)`, `τ = |ξ|^{1/(γ+1)}`, at the same node count.
pub fn scaling_invariance_check(profile: &DegeneracyProfile, xi: f64, grid: &Grid1D) -> Result<ScalingReport> {
    let gamma = profile.gamma();
    let tau = xi.abs().powf(1.0 / (gamma as f64 + 1.0));
    let op = assemble_x_operator(grid, profile, xi, &PotentialSpec::Zero, true)?;
    let mu = eigenpair_k(&op, 1, EIGEN_TOL)?.value;
    let mut coeffs = vec![0.0; gamma as usize + 1];
    coeffs[gamma as usize] = profile.leading_coefficient();
    let stretched = DegeneracyProfile::polynomial(coeffs, gamma, tau * profile.l_minus(), tau * profile.l_plus())?;
    let sgrid = Grid1D::dirichlet(tau * grid.a(), tau * grid.b(), grid.len())?;
    let sop = assemble_x_operator(&sgrid, &stretched, 1.0, &PotentialSpec::Zero, true)?;
    let mu_stretched = eigenpair_k(&sop, 1, EIGEN_TOL)?.value;
    Ok(ScalingReport {
        tau,
        mu,
        mu_stretched,
        mismatch: (mu - tau * tau * mu_stretched).abs() / mu,
    })
}

/// `μ_ξ / |ξ|^{2/(γ+1)}`.
pub fn power_law_ratio(data: &ClassicalGroundData) -> f64 {
    data.mu / data.xi.abs().powf(2.0 / (data.gamma as f64 + 1.0))
}

/// CSV with columns `xi,mu,x_xi,A_xi,B_xi,ratio_to_power_law`.
pub fn write_classical_csv<W: Write>(rows: &[ClassicalGroundData], mut w: W) -> std::io::Result<()> {
    writeln!(w, "xi,mu,x_xi,A_xi,B_xi,ratio_to_power_law")?;
    for r in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.xi,
            r.mu,
            r.x_xi,
            r.a_xi,
            r.b_xi,
            power_law_ratio(r)
        )?;
    }
    Ok(())
}

/// `q^(γ)(0)` recovered from the leading coefficient.
pub fn dgamma0(data: &ClassicalGroundData) -> f64 {
    data.coefficient * factorial(data.gamma)
}
