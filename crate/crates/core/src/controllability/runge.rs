//! The polynomial inequality `‖p‖²_{L²(D(0,r₁))} <= C ‖p‖_{L∞(𝒱)}` over the
//! pacman region, and polynomials `z^{N+1} p̃_k` with `p̃_k → 1/(z - z₀)`
//! that violate it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::profiles::{agmon_distance, AgmonMetric, DegeneracyProfile};

/// Default polynomial degrees of the refinement stages.
pub const DEFAULT_STAGES: [usize; 6] = [96, 128, 192, 256, 384, 512];

const DILATION: f64 = 1.02;
const ARC_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTestCase {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub t: f64,
    /// Order of the zero imposed at the origin.
    pub n_order: usize,
    /// Removed arc `I = [arc.0, arc.1]` of arguments.
    pub arc: (f64, f64),
    pub slope: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// `e^{-q'(0)(1+ε)T}`
    pub r1: f64,
    /// `e^{-(1-ε) min(d_agm(-a), d_agm(b))}`
    pub r0: f64,
    pub z0: Complex64,
}

impl PolynomialTestCase {
    /// Build the geometry without checking that a counterexample exists.
    pub fn geometry(
        profile: &DegeneracyProfile,
        a: f64,
        b: f64,
        epsilon: f64,
        t: f64,
        n_order: usize,
        arc: (f64, f64),
    ) -> Result<Self> {
        if profile.gamma() != 1 {
            return Err(Error::invalid("the rectangle counterexample needs gamma = 1"));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("rectangle half-widths must be positive"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(t > 0.0) {
            return Err(Error::invalid("T must be positive"));
        }
        if !(arc.0 < arc.1 && arc.1 - arc.0 <= 2.0 * PI + 1e-12) {
            return Err(Error::invalid("removed arc must satisfy lo < hi <= lo + 2 pi"));
        }
        let slope = profile.dgamma0();
        if !(slope > 0.0) {
            return Err(Error::invalid("q'(0) must be positive"));
        }
        let metric = AgmonMetric::plain(profile.clone());
        let d_minus = agmon_distance(&metric, -a)?;
        let d_plus = agmon_distance(&metric, b)?;
        let r0 = (-(1.0 - epsilon) * d_minus.min(d_plus)).exp();
        let r1 = (-slope * (1.0 + epsilon) * t).exp();
        let z0 = Complex64::from_polar((r0 * r1).sqrt(), 0.5 * (arc.0 + arc.1));
        Ok(Self {
            a,
            b,
            epsilon,
            t,
            n_order,
            arc,
            slope,
            d_minus,
            d_plus,
            r1,
            r0,
            z0,
        })
    }

    /// Geometry together with the existence check `z₀ ∈ D(0, r₁) \ 𝒱`.
    pub fn new(
        profile: &DegeneracyProfile,
        a: f64,
        b: f64,
        epsilon: f64,
        t: f64,
        n_order: usize,
        arc: (f64, f64),
    ) -> Result<Self> {
        let case = Self::geometry(profile, a, b, epsilon, t, n_order, arc)?;
        case.check_feasible()?;
        Ok(case)
    }

    /// Time threshold `(1-ε) min(d_agm(-a), d_agm(b)) / (q'(0)(1+ε))`.
    pub fn threshold(&self) -> f64 {
        (1.0 - self.epsilon) * self.d_minus.min(self.d_plus) / (self.slope * (1.0 + self.epsilon))
    }

    fn full_circle(&self) -> bool {
        self.arc.1 - self.arc.0 >= 2.0 * PI - 2.0 * ARC_MARGIN
    }

    pub fn check_feasible(&self) -> Result<()> {
        if self.r0 >= self.r1 {
            return Err(Error::Infeasible(format!(
                "r0 = {} >= r1 = {}: T = {} is not below the threshold {}",
                self.r0,
                self.r1,
                self.t,
                self.threshold()
            )));
        }
        if DILATION * self.r0 >= self.z0.norm() {
            return Err(Error::Infeasible(format!(
                "z0 at radius {} lies inside the dilated disk of radius {}",
                self.z0.norm(),
                DILATION * self.r0
            )));
        }
        if self.arc.1 - self.arc.0 <= 2.0 * ARC_MARGIN {
            return Err(Error::Infeasible("removed arc is narrower than the neighbourhood margin".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacmanSamples {
    /// Counter-clockwise samples of `∂U`.
    pub u: Vec<Complex64>,
    /// Counter-clockwise samples of `∂𝒱`.
    pub v: Vec<Complex64>,
}

/// Boundary of `D(0, r_disk) ∪ {|z| < r_out, arg z ∉ [lo, hi]}`.
fn pacman_boundary(r_disk: f64, r_out: f64, lo: f64, hi: f64, full: bool, samples: usize) -> Vec<Complex64> {
    if full || r_disk >= r_out {
        let r = if full { r_disk } else { r_out.max(r_disk) };
        return (0..samples)
            .map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / samples as f64))
            .collect();
    }
    let outer = r_out * (2.0 * PI - (hi - lo));
    let radial = r_out - r_disk;
    let inner = r_disk * (hi - lo);
    let total = outer + 2.0 * radial + inner;
    let count = |len: f64| ((samples as f64 * len / total).round() as usize).max(2);
    let mut pts = Vec::with_capacity(samples + 8);
    // outer arc from hi to lo + 2π
    let m = count(outer);
    for j in 0..m {
        pts.push(Complex64::from_polar(r_out, hi + (2.0 * PI - (hi - lo)) * j as f64 / m as f64));
    }
    // radial segment at lo, inward
    let m = count(radial);
    for j in 0..m {
        pts.push(Complex64::from_polar(r_out - radial * j as f64 / m as f64, lo));
    }
    // inner arc from lo to hi
    let m = count(inner);
    for j in 0..m {
        pts.push(Complex64::from_polar(r_disk, lo + (hi - lo) * j as f64 / m as f64));
    }
    // radial segment at hi, outward
    let m = count(radial);
    for j in 0..m {
        pts.push(Complex64::from_polar(r_disk + radial * j as f64 / m as f64, hi));
    }
    pts
}

/// Boundary samples of `U` and of its neighbourhood `𝒱` (radii dilated by
/// 1.02, removed arc shrunk by 0.02 on each side).
pub fn pacman_region(case: &PolynomialTestCase, samples: usize) -> PacmanSamples {
    let full = case.full_circle();
    let (lo, hi) = case.arc;
    let u = pacman_boundary(case.r0, 1.0, lo, hi, full, samples);
    let v = pacman_boundary(
        DILATION * case.r0,
        DILATION,
        lo + ARC_MARGIN,
        hi - ARC_MARGIN,
        full,
        samples,
    );
    PacmanSamples { u, v }
}

/// `‖Σ a_n z^n‖²_{L²(D(0,r))} = π Σ |a_n|² r^{2n+2} / (n+1)`.
pub fn disk_norm_sq(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| PI * a.norm_sqr() * r.powi(2 * n as i32 + 2) / (n as f64 + 1.0))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RungeStage {
    pub degree: usize,
    /// `‖p_k‖_{L²(D(0,r₁))}`
    pub lhs: f64,
    /// `max |p_k|` over the boundary of `𝒱`
    pub rhs: f64,
    /// `lhs² / rhs`
    pub ratio: f64,
    /// `max |p̃_k(z)(z - z₀) - 1|` on the boundary of `𝒱`
    pub fit_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RungeReport {
    pub stages: Vec<RungeStage>,
}

impl RungeReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.ratio).collect()
    }

    /// Final over initial ratio.
    pub fn growth(&self) -> f64 {
        let r = self.ratios();
        r[r.len() - 1] / r[0]
    }
}

/// Arnoldi basis for polynomials on the sample set `z` (Vandermonde with
/// Arnoldi): returns the orthonormal columns and the Hessenberg matrix.
fn arnoldi(z: &[Complex64], degree: usize) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let m = z.len() as f64;
    let mut q = vec![vec![Complex64::new(1.0, 0.0); z.len()]];
    let mut h = vec![vec![Complex64::new(0.0, 0.0); degree]; degree + 1];
    for k in 0..degree {
        let mut v: Vec<Complex64> = z.iter().zip(&q[k]).map(|(a, b)| a * b).collect();
        for _pass in 0..2 {
            for j in 0..=k {
                let c: Complex64 = q[j].iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>() / m;
                h[j][k] += c;
                for (vi, qi) in v.iter_mut().zip(&q[j]) {
                    *vi -= c * qi;
                }
            }
        }
        let nrm = (v.iter().map(|c| c.norm_sqr()).sum::<f64>() / m).sqrt();
        h[k + 1][k] = Complex64::new(nrm, 0.0);
        q.push(v.into_iter().map(|c| c / nrm).collect());
    }
    (q, h)
}

/// Evaluate `Σ c_k q_k(s)` using the Arnoldi recurrence.
fn arnoldi_eval(h: &[Vec<Complex64>], c: &[Complex64], s: &[Complex64]) -> Vec<Complex64> {
    let degree = c.len() - 1;
    let mut w: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); s.len()]];
    for k in 0..degree {
        let mut v: Vec<Complex64> = s.iter().zip(&w[k]).map(|(a, b)| a * b).collect();
        for j in 0..=k {
            for (vi, wi) in v.iter_mut().zip(&w[j]) {
                *vi -= h[j][k] * wi;
            }
        }
        let d = h[k + 1][k];
        w.push(v.into_iter().map(|x| x / d).collect());
    }
    (0..s.len())
        .map(|i| (0..=degree).map(|k| c[k] * w[k][i]).sum())
        .collect()
}

/// Monomial coefficients of `p̃` from its values on `|z| = r`, rescaled so the
/// `n`-th entry is `a_n r^n`.
fn scaled_coefficients(h: &[Vec<Complex64>], c: &[Complex64], r: f64) -> Vec<Complex64> {
    let len = (2 * c.len()).next_power_of_two();
    let circle: Vec<Complex64> = (0..len)
        .map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / len as f64))
        .collect();
    let mut vals = arnoldi_eval(h, c, &circle);
    let fft = FftPlanner::new().plan_fft_forward(len);
    fft.process(&mut vals);
    vals.truncate(c.len());
    vals.into_iter().map(|v| v / len as f64).collect()
}

/// Least-squares Runge approximants of `1/(z - z₀)` on `∂𝒱` at increasing
/// degree; each stage reports both sides of the polynomial inequality for
/// `p_k = z^{N+1} p̃_k`.
pub fn runge_counterexample(case: &PolynomialTestCase, stages: &[usize], samples: usize) -> Result<RungeReport> {
    case.check_feasible()?;
    if stages.is_empty() || stages.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("refinement degrees must be nonempty and increasing"));
    }
    let max_degree = *stages.last().unwrap();
    if samples < 4 * (max_degree + 1) {
        return Err(Error::invalid(format!(
            "{samples} boundary samples are too few for degree {max_degree}"
        )));
    }
    let fit_pts = pacman_region(case, samples).v;
    let eval_pts = pacman_region(case, 2 * samples + 1).v;
    let target: Vec<Complex64> = fit_pts.iter().map(|z| 1.0 / (z - case.z0)).collect();
    let (q, h) = arnoldi(&fit_pts, max_degree);
    let m = fit_pts.len() as f64;
    let full: Vec<Complex64> = q
        .iter()
        .map(|col| col.iter().zip(&target).map(|(a, b)| a.conj() * b).sum::<Complex64>() / m)
        .collect();
    let shift = case.n_order + 1;
    let mut out = Vec::with_capacity(stages.len());
    for &deg in stages {
        let c = &full[..=deg];
        let vals = arnoldi_eval(&h, c, &eval_pts);
        let mut rhs: f64 = 0.0;
        let mut fit_error: f64 = 0.0;
        for (z, p) in eval_pts.iter().zip(&vals) {
            rhs = rhs.max(z.norm().powi(shift as i32) * p.norm());
            fit_error = fit_error.max((p * (z - case.z0) - 1.0).norm());
        }
        let scaled = scaled_coefficients(&h, c, case.r1);
        // |a_n|² r^{2(n+N+1)+2} / (n+N+2) with scaled[n] = a_n r^n
        let r = case.r1;
        let lhs_sq: f64 = scaled
            .iter()
            .enumerate()
            .map(|(n, a)| PI * a.norm_sqr() * r.powi(2 * shift as i32 + 2) / ((n + shift) as f64 + 1.0))
            .sum();
        if !(lhs_sq.is_finite() && rhs.is_finite() && rhs > 0.0) {
            return Err(Error::NonConvergence {
                what: "Runge approximation",
                iterations: deg,
                residual: fit_error,
            });
        }
        out.push(RungeStage {
            degree: deg,
            lhs: lhs_sq.sqrt(),
            rhs,
            ratio: lhs_sq / rhs,
            fit_error,
        });
    }
    Ok(RungeReport { stages: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> DegeneracyProfile {
        DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap()
    }

    const ARC: (f64, f64) = (PI / 4.0, 3.0 * PI / 4.0);

    #[test]
    fn monomial_norms() {
        let one = [Complex64::new(1.0, 0.0)];
        assert!((disk_norm_sq(&one, 1.0) - PI).abs() < 1e-15);
        let n = 2;
        let mut c = vec![Complex64::new(0.0, 0.0); n + 2];
        c[n + 1] = Complex64::new(1.0, 0.0);
        let r: f64 = 0.9;
        let expected = PI * r.powi(2 * n as i32 + 4) / (n as f64 + 2.0);
        assert!((disk_norm_sq(&c, r) - expected).abs() < 1e-15);
    }

    #[test]
    fn case_geometry() {
        let c = PolynomialTestCase::new(&linear(), 0.5, 0.5, 0.1, 0.05, 2, ARC).unwrap();
        assert!((c.r0 - (-0.9f64 * 0.125).exp()).abs() < 1e-12);
        assert!((c.r1 - (-1.1f64 * 0.05).exp()).abs() < 1e-12);
        assert!((c.threshold() - 0.125 * 0.9 / 1.1).abs() < 1e-12);
        assert!(c.z0.norm() > c.r0 && c.z0.norm() < c.r1);
        assert!((c.z0.arg() - PI / 2.0).abs() < 1e-12);
        let late = PolynomialTestCase::new(&linear(), 0.5, 0.5, 0.1, 0.2, 2, ARC);
        assert!(matches!(late, Err(Error::Infeasible(_))));
    }

    #[test]
    fn pacman_limits() {
        let c = PolynomialTestCase::geometry(&linear(), 0.5, 0.5, 0.999999, 0.05, 2, ARC).unwrap();
        assert!((c.r0 - 1.0).abs() < 1e-6);
        let s = pacman_region(&c, 1024);
        assert!(s.u.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6 || z.norm() >= c.r0 - 1e-12));
        let full = PolynomialTestCase::geometry(&linear(), 0.5, 0.5, 0.1, 0.05, 2, (0.0, 2.0 * PI)).unwrap();
        let s = pacman_region(&full, 512);
        assert!(s.u.iter().all(|z| (z.norm() - full.r0).abs() < 1e-12));
        let asym = PolynomialTestCase::geometry(&linear(), 0.5, 0.7, 0.1, 0.05, 2, ARC).unwrap();
        assert!((asym.r0 - c_common(0.5)).abs() < 1e-12);
    }

    fn c_common(a: f64) -> f64 {
        (-(1.0 - 0.1) * a * a / 2.0).exp()
    }

    #[test]
    fn runge_ratio_grows() {
        let c = PolynomialTestCase::new(&linear(), 0.5, 0.5, 0.1, 0.05, 2, ARC).unwrap();
        let rep = runge_counterexample(&c, &DEFAULT_STAGES, 4096).unwrap();
        let r = rep.ratios();
        assert!(rep.growth() >= 5.0, "{r:?}");
        assert!(crate::controllability::tail_increasing(&r), "{r:?}");
        let mut rhs: Vec<f64> = rep.stages.iter().map(|s| s.rhs).collect();
        for s in &rep.stages {
            assert!(s.rhs.is_finite() && s.rhs > 0.0);
        }
        rhs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = rhs[rhs.len() / 2];
        for s in &rep.stages {
            assert!(s.rhs <= 2.0 * median && s.rhs >= 0.5 * median, "{:?}", rep.stages);
        }
        let converged: Vec<_> = rep.stages.iter().filter(|s| s.fit_error < 0.1).collect();
        assert!(!converged.is_empty());
        assert!(converged.windows(2).all(|w| w[1].lhs >= w[0].lhs));
    }
}
