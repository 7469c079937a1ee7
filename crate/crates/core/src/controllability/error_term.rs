use super::log_square_at;
use crate::discretize::Grid1D;
use crate::error::{Error, Result};
use crate::generalized::gaussian_projection;
use crate::profiles::{agmon_distance, AgmonMetric, DegeneracyProfile, PotentialSpec};

/// One value `e^{-t(λ_n - q'(0) n)} v_n(x) e^{n d_agm(x)(1-ε)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTermEntry {
    pub t: f64,
    pub x: f64,
    pub n: f64,
    /// `e^{-t(λ_n - q'(0) n)}`
    pub dissipation_factor: f64,
    pub value: f64,
    pub log_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTermTable {
    pub entries: Vec<ErrorTermEntry>,
    /// `(n, max over (t, x) of |γ|)` in the order of the `n` list.
    pub max_by_n: Vec<(f64, f64)>,
    pub max_modulus: f64,
    /// Set when `max|γ(n)| > e^{δ (n - n₀)} max|γ(n₀)|` for some `n`.
    pub growth_flagged: bool,
}

/// Tabulate the error term on a `(t, x, n)` grid using the projected
/// eigenfunctions `v_n = Π_n ṽ_n`.
#[allow(clippy::too_many_arguments)]
pub fn error_term_table(
    profile: &DegeneracyProfile,
    potential: &PotentialSpec,
    epsilon: f64,
    ts: &[f64],
    xs: &[f64],
    ns: &[f64],
    grid: &Grid1D,
    growth_delta: f64,
) -> Result<ErrorTermTable> {
    if profile.gamma() != 1 {
        return Err(Error::invalid("the error term is defined for gamma = 1"));
    }
    if ts.is_empty() || xs.is_empty() || ns.is_empty() {
        return Err(Error::invalid("error term grids must be nonempty"));
    }
    let slope = profile.dgamma0();
    let metric = AgmonMetric::plain(profile.clone());
    let distances = xs.iter().map(|&x| agmon_distance(&metric, x)).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(ts.len() * xs.len() * ns.len());
    let mut max_by_n = Vec::with_capacity(ns.len());
    for &n in ns {
        let proj = gaussian_projection(profile, n, potential, grid)?;
        let lambda = proj.ground.value;
        let log_c = proj.coefficient.abs().ln();
        let mut row_max: f64 = 0.0;
        for &t in ts {
            let log_diss = -t * (lambda - slope * n);
            for (&x, &d) in xs.iter().zip(&distances) {
                let log_v = log_c + 0.5 * log_square_at(&proj.ground, grid, x)?;
                let log_modulus = log_diss + log_v + n * d * (1.0 - epsilon);
                let sign = proj.coefficient.signum() * nearest_sign(&proj.ground.vector, grid, x);
                let value = sign * log_modulus.exp();
                row_max = row_max.max(log_modulus.exp());
                entries.push(ErrorTermEntry {
                    t,
                    x,
                    n,
                    dissipation_factor: log_diss.exp(),
                    value,
                    log_modulus,
                });
            }
        }
        max_by_n.push((n, row_max));
    }
    let (n0, m0) = max_by_n[0];
    let growth_flagged = max_by_n
        .iter()
        .any(|&(n, m)| m.ln() > growth_delta * (n - n0) + m0.ln());
    let max_modulus = max_by_n.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(ErrorTermTable {
        entries,
        max_by_n,
        max_modulus,
        growth_flagged,
    })
}

fn nearest_sign(v: &[f64], grid: &Grid1D, x: f64) -> f64 {
    let i = (((x - grid.a()) / grid.spacing()).round() as isize - 1).clamp(0, v.len() as isize - 1) as usize;
    if v[i] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // fine enough that the discretization error of λ_n stays below 1e-5
    fn grid() -> Grid1D {
        Grid1D::dirichlet(-1.0, 1.0, 65535).unwrap()
    }

    #[test]
    fn harmonic_dissipation_factor_is_one() {
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let t = error_term_table(&q, &PotentialSpec::Zero, 0.1, &[0.0, 0.05, 0.1], &[0.0], &[64.0, 128.0, 256.0], &grid(), 0.01)
            .unwrap();
        for e in &t.entries {
            assert!((e.dissipation_factor - 1.0).abs() < 1e-6, "{e:?}");
        }
    }

    #[test]
    fn constant_potential_factor() {
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let c = 3.0;
        let t = error_term_table(&q, &PotentialSpec::Constant(c), 0.1, &[0.1], &[0.0, 0.3], &[64.0, 256.0], &grid(), 0.01)
            .unwrap();
        for e in &t.entries {
            assert!((e.dissipation_factor - (-0.1 * c).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn smooth_profile_grows_subexponentially() {
        let q = DegeneracyProfile::polynomial(vec![0.0, 1.0, 0.0, 0.3], 1, 1.0, 1.0).unwrap();
        let ns = [32.0, 64.0, 128.0, 256.0, 512.0];
        let xs = [0.0, 0.1, 0.2, 0.4];
        let t = error_term_table(&q, &PotentialSpec::Zero, 0.1, &[0.0, 0.05], &xs, &ns, &Grid1D::dirichlet(-1.0, 1.0, 8191).unwrap(), 0.01)
            .unwrap();
        assert!(!t.growth_flagged, "{:?}", t.max_by_n);
        let (n0, m0) = t.max_by_n[0];
        for &(n, m) in &t.max_by_n {
            assert!(m <= m0 * (0.01 * (n - n0)).exp(), "n={n} max={m}");
        }
    }
}
