use super::{log_add, log_dual_norm_dissipation, zone_mass, ControlZone};
use crate::discretize::Grid1D;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::generalized::generalized_lambda;
use crate::profiles::{chi_pair, DegeneracyProfile, PotentialSpec};

/// Spectral data of one frequency of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPoint {
    pub xi: f64,
    pub lambda: f64,
    pub log_mass: f64,
    pub index: usize,
    pub gap: f64,
    pub certificate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinimalTime {
    Finite(f64),
    Unbounded,
}

/// `ln R(T, ξ) = -2λT - 2s ln λ - ln m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub t: f64,
    pub xi: f64,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityReport {
    pub gamma: u32,
    pub s: f64,
    pub frequencies: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub masses: Vec<f64>,
    pub log_masses: Vec<f64>,
    pub indices: Vec<usize>,
    /// Slope of `λ_n` against `ξ_n` (γ = 1) or `ξ_n^{2/(γ+1)}` (γ > 1).
    pub alpha_hat: f64,
    /// Slope of `-ln m_n` against `2 ξ_n`.
    pub beta_hat: f64,
    pub t_lower: MinimalTime,
    pub alpha_residuals: Vec<f64>,
    pub beta_residuals: Vec<f64>,
    /// Growth exponent of `λ_n`, `2/(γ+1)`.
    pub lambda_exponent: f64,
    /// Growth exponent of `-ln m_n`.
    pub decay_exponent: f64,
    pub ratios: Vec<RatioRow>,
    /// For each `T`: whether `ln R` strictly increases over the last 5 frequencies.
    pub tail_increasing: Vec<(f64, bool)>,
}

/// Solve for `λ_ξ` and the zone mass of its eigenfunction.
pub fn observe_frequency(
    profile: &DegeneracyProfile,
    potential: &PotentialSpec,
    zone: &ControlZone,
    xi: f64,
    grid: &Grid1D,
) -> Result<FrequencyPoint> {
    let d = generalized_lambda(profile, xi, potential, grid)?;
    let m = zone_mass(&d.eigen, zone, grid)?;
    if !m.log_mass.is_finite() {
        return Err(Error::invalid(format!("zone mass vanished at xi = {xi}")));
    }
    Ok(FrequencyPoint {
        xi,
        lambda: d.lambda,
        log_mass: m.log_mass,
        index: d.index,
        gap: d.gap,
        certificate: d.certificate,
    })
}

/// Whether the last (up to) 5 values strictly increase.
pub fn tail_increasing(values: &[f64]) -> bool {
    let start = values.len().saturating_sub(5);
    values[start..].windows(2).all(|w| w[1] > w[0])
}

/// Fit the rates and tabulate the ratios from per-frequency data.
pub fn assemble_report(mut points: Vec<FrequencyPoint>, gamma: u32, ts: &[f64], s: f64) -> Result<ObservabilityReport> {
    if points.len() < 5 {
        return Err(Error::invalid(format!("observability sweep needs at least 5 frequencies, got {}", points.len())));
    }
    if gamma == 0 {
        return Err(Error::invalid("gamma must be at least 1"));
    }
    points.sort_by(|a, b| a.xi.partial_cmp(&b.xi).unwrap());
    let lambda_exponent = 2.0 / (gamma as f64 + 1.0);
    let frequencies: Vec<f64> = points.iter().map(|p| p.xi).collect();
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let log_masses: Vec<f64> = points.iter().map(|p| p.log_mass).collect();
    let abscissa: Vec<f64> = frequencies.iter().map(|x| x.powf(lambda_exponent)).collect();
    let alpha = fit_line(&abscissa, &lambdas)?;
    let twice: Vec<f64> = frequencies.iter().map(|x| 2.0 * x).collect();
    let neg_log: Vec<f64> = log_masses.iter().map(|l| -l).collect();
    let beta = fit_line(&twice, &neg_log)?;
    let t_lower = if gamma == 1 {
        MinimalTime::Finite(beta.slope / alpha.slope)
    } else {
        MinimalTime::Unbounded
    };
    let mut ratios = Vec::new();
    let mut tail = Vec::new();
    for &t in ts {
        let mut col = Vec::with_capacity(points.len());
        for p in &points {
            let lr = log_dual_norm_dissipation(p.lambda, t, s)? - p.log_mass;
            ratios.push(RatioRow {
                t,
                xi: p.xi,
                log_ratio: lr,
            });
            col.push(lr);
        }
        tail.push((t, tail_increasing(&col)));
    }
    Ok(ObservabilityReport {
        gamma,
        s,
        masses: log_masses.iter().map(|l| l.exp()).collect(),
        indices: points.iter().map(|p| p.index).collect(),
        frequencies,
        lambdas,
        log_masses,
        alpha_hat: alpha.slope,
        beta_hat: beta.slope,
        t_lower,
        alpha_residuals: alpha.residuals,
        beta_residuals: beta.residuals,
        lambda_exponent,
        decay_exponent: 1.0,
        ratios,
        tail_increasing: tail,
    })
}

fn check_zone(zone: &ControlZone) -> Result<()> {
    if zone.distance_to_singularity() <= 0.0 {
        return Err(Error::invalid("vertical-strip zone must stay away from x = 0"));
    }
    Ok(())
}

/// Discrete-frequency sweep of the observability ratio along the solutions
/// `e^{-λ_n t} v_n(x) φ_n(y)`.
pub fn observability_ratio_sweep(
    profile: &DegeneracyProfile,
    potential: &PotentialSpec,
    zone: &ControlZone,
    xis: &[f64],
    ts: &[f64],
    s: f64,
    grid: &Grid1D,
) -> Result<ObservabilityReport> {
    check_zone(zone)?;
    if xis.len() < 5 {
        return Err(Error::invalid(format!("observability sweep needs at least 5 frequencies, got {}", xis.len())));
    }
    let points = xis
        .iter()
        .map(|&xi| observe_frequency(profile, potential, zone, xi, grid))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(points, profile.gamma(), ts, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedReport {
    /// Fits on the `ψ_n²`-averaged `λ̄_n` and `m̄_n`.
    pub report: ObservabilityReport,
    /// `ln(LHS / RHS)` of the Fourier-side inequality for each `(T, n)`.
    pub localized: Vec<RatioRow>,
    pub delta: f64,
    pub nodes: usize,
}

/// Midpoint nodes and `ln` weights `ψ_n(ξ)² dξ` on `[n - δ, n + δ]`.
fn localization_nodes(n: f64, delta: f64, m: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * delta / m as f64;
    (0..m)
        .filter_map(|j| {
            let xi = n - delta + (j as f64 + 0.5) * w;
            let psi = chi_pair(xi - n, delta, 0.5).0;
            if psi > 0.0 {
                Some((xi, 2.0 * psi.ln() + w.ln()))
            } else {
                None
            }
        })
        .collect()
}

/// Observability with `ψ_n`-localized frequency packets (for `Ω_y = ℝ`).
#[allow(clippy::too_many_arguments)]
pub fn frequency_localized_sweep(
    profile: &DegeneracyProfile,
    potential: &PotentialSpec,
    zone: &ControlZone,
    ns: &[f64],
    delta: f64,
    nodes: usize,
    ts: &[f64],
    s: f64,
    grid: &Grid1D,
) -> Result<LocalizedReport> {
    check_zone(zone)?;
    if nodes < 8 {
        return Err(Error::invalid(format!("localized quadrature needs at least 8 nodes, got {nodes}")));
    }
    if ns.len() < 5 {
        return Err(Error::invalid(format!("observability sweep needs at least 5 frequencies, got {}", ns.len())));
    }
    let mut packets = Vec::with_capacity(ns.len());
    for &n in ns {
        if !(delta > 0.0 && delta < n / 2.0) {
            return Err(Error::invalid(format!("localization width {delta} must lie in (0, {})", n / 2.0)));
        }
        let mut samples = Vec::new();
        for (xi, lw) in localization_nodes(n, delta, nodes) {
            samples.push((lw, observe_frequency(profile, potential, zone, xi, grid)?));
        }
        packets.push((n, samples));
    }
    let mut points = Vec::with_capacity(packets.len());
    let mut localized = Vec::new();
    for (n, samples) in &packets {
        let log_w = samples.iter().fold(f64::NEG_INFINITY, |acc, (lw, _)| log_add(acc, *lw));
        let weight = log_w.exp();
        let lambda = samples.iter().map(|(lw, p)| lw.exp() * p.lambda).sum::<f64>() / weight;
        let log_rhs = samples.iter().fold(f64::NEG_INFINITY, |acc, (lw, p)| log_add(acc, lw + p.log_mass));
        let first = &samples[0].1;
        points.push(FrequencyPoint {
            xi: *n,
            lambda,
            log_mass: log_rhs - log_w,
            index: first.index,
            gap: samples.iter().map(|(_, p)| p.gap).fold(0.0, f64::max),
            certificate: samples.iter().map(|(_, p)| p.certificate).fold(0.0, f64::max),
        });
        for &t in ts {
            let mut log_lhs = f64::NEG_INFINITY;
            for (lw, p) in samples {
                log_lhs = log_add(log_lhs, lw + log_dual_norm_dissipation(p.lambda, t, s)?);
            }
            localized.push(RatioRow {
                t,
                xi: *n,
                log_ratio: log_lhs - log_rhs,
            });
        }
    }
    let report = assemble_report(points, profile.gamma(), ts, s)?;
    Ok(LocalizedReport {
        report,
        localized,
        delta,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Interval;

    #[test]
    fn tail_check() {
        assert!(tail_increasing(&[5.0, 1.0, 2.0, 3.0, 4.0, 5.0]));
        assert!(!tail_increasing(&[1.0, 2.0, 3.0, 2.5, 4.0]));
    }

    #[test]
    fn localization_weights_integrate_bump() {
        let nodes = localization_nodes(100.0, 2.0, 64);
        let total: f64 = nodes.iter().map(|(_, lw)| lw.exp()).sum();
        // ∫ψ² lies between the plateau length and the support length
        assert!(total > 2.0 && total < 4.0);
        assert!(nodes.iter().all(|(x, _)| (x - 100.0).abs() < 2.0));
    }

    #[test]
    fn sweep_rejects_bad_input() {
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let grid = Grid1D::dirichlet(-1.0, 1.0, 1023).unwrap();
        let touching = ControlZone::vertical(vec![Interval::new(-0.1, 0.5).unwrap()]).unwrap();
        let xis = [16.0, 20.0, 24.0, 28.0, 32.0];
        assert!(observability_ratio_sweep(&q, &PotentialSpec::Zero, &touching, &xis, &[0.1], 0.5, &grid).is_err());
        let z = ControlZone::vertical(vec![Interval::new(0.5, 1.0).unwrap()]).unwrap();
        assert!(observability_ratio_sweep(&q, &PotentialSpec::Zero, &z, &xis[..4], &[0.1], 0.5, &grid).is_err());
        assert!(frequency_localized_sweep(&q, &PotentialSpec::Zero, &z, &xis, 1.0, 4, &[0.1], 0.5, &grid).is_err());
    }
}
