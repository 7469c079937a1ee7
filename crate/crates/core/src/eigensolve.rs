//! Selected eigenpairs of symmetric tridiagonal operators: Sturm-count
//! bisection for eigenvalues, twisted factorizations for eigenvectors and a
//! cyclic Jacobi solver for small dense (periodic) problems.

use crate::discretize::{dot, norm2, TridiagonalOperator};
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense solver.
pub const DENSE_CAP: usize = 4096;

/// Eigenvalue with its grid eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that `spacing * sum(v_i²) = 1`, positive at its
    /// largest entry. Entries below the floating-point range are 0.
    pub vector: Vec<f64>,
    /// `ln |v_i|` for the normalized vector, finite even where `vector`
    /// underflows.
    pub log_abs: Vec<f64>,
    /// `‖(A - λ)v‖ / (‖A‖ ‖v‖)`.
    pub residual: f64,
    /// 1-based position in the spectrum.
    pub index: usize,
}

fn pivmin(op: &TridiagonalOperator) -> f64 {
    let bmax = op.offdiag.iter().map(|b| b * b).fold(1.0, f64::max);
    f64::MIN_POSITIVE * bmax
}

/// Number of eigenvalues strictly below `lambda` (tridiagonal part only).
pub fn sturm_count(op: &TridiagonalOperator, lambda: f64) -> usize {
    let pm = pivmin(op);
    let mut count = 0;
    let mut d = op.diag[0] - lambda;
    for i in 0.. {
        if d.abs() < pm {
            d = pm;
        }
        if d < 0.0 {
            count += 1;
        }
        if i + 1 == op.dim() {
            break;
        }
        let b = op.offdiag[i];
        d = op.diag[i + 1] - lambda - b * b / d;
    }
    count
}

/// `k`-th smallest eigenvalue (1-based) by bisection; the final bracket has
/// width at most `tol * (1 + |λ|)`. Periodic operators use the dense solver.
pub fn eigenvalue_k(op: &TridiagonalOperator, k: usize, tol: f64) -> Result<f64> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("eigenvalue index {k} outside 1..={n}")));
    }
    if op.is_periodic() {
        return Ok(dense_spectrum(op)?[k - 1]);
    }
    let (mut lo, mut hi) = op.gershgorin();
    let pad = f64::EPSILON * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE;
    lo -= pad;
    hi += pad;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sturm_count(op, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Eigenvalue to full working precision.
pub fn eigenvalue_k_exact(op: &TridiagonalOperator, k: usize) -> Result<f64> {
    eigenvalue_k(op, k, 0.0)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Eigenvector for an eigenvalue `lambda` already located to working
/// accuracy, via the twisted factorization of `A - λ` with the twist chosen
/// at the smallest `|γ_r|`; falls back to inverse iteration when the
/// residual exceeds `tol`.
pub fn eigenvector(op: &TridiagonalOperator, lambda: f64, tol: f64) -> Result<EigenPair> {
    if op.is_periodic() {
        return dense_eigenvector(op, lambda);
    }
    let n = op.dim();
    let a = &op.diag;
    let b = &op.offdiag;
    let pm = pivmin(op);
    let guard = |d: f64| if d.abs() < pm { -pm } else { d };

    let mut dp = vec![0.0; n];
    dp[0] = guard(a[0] - lambda);
    for i in 1..n {
        dp[i] = guard(a[i] - lambda - b[i - 1] * b[i - 1] / dp[i - 1]);
    }
    let mut dm = vec![0.0; n];
    dm[n - 1] = guard(a[n - 1] - lambda);
    for i in (0..n - 1).rev() {
        dm[i] = guard(a[i] - lambda - b[i] * b[i] / dm[i + 1]);
    }
    let mut r = 0;
    let mut gmin = f64::INFINITY;
    for i in 0..n {
        let g = dp[i] + dm[i] - (a[i] - lambda);
        if g.abs() < gmin {
            gmin = g.abs();
            r = i;
        }
    }
    let gamma_r = dp[r] + dm[r] - (a[r] - lambda);

    // z_r = 1, propagated outward in log-magnitude and sign
    let mut log_abs = vec![f64::NEG_INFINITY; n];
    let mut sign = vec![1.0f64; n];
    log_abs[r] = 0.0;
    for i in (0..r).rev() {
        let ratio = -b[i] / dp[i];
        log_abs[i] = log_abs[i + 1] + ratio.abs().ln();
        sign[i] = sign[i + 1] * ratio.signum();
    }
    for i in r + 1..n {
        let ratio = -b[i - 1] / dm[i];
        log_abs[i] = log_abs[i - 1] + ratio.abs().ln();
        sign[i] = sign[i - 1] * ratio.signum();
    }
    let log_sq = log_abs.iter().fold(f64::NEG_INFINITY, |acc, &l| log_add(acc, 2.0 * l));
    let value = lambda + gamma_r * (-log_sq).exp();
    let pair = finish(op, value, log_abs, sign)?;
    if pair.residual <= tol {
        return Ok(pair);
    }
    inverse_iteration(op, lambda, tol, pair.vector)
}

/// Normalize, fix the sign and measure the residual.
fn finish(op: &TridiagonalOperator, value: f64, mut log_abs: Vec<f64>, mut sign: Vec<f64>) -> Result<EigenPair> {
    let h = op.spacing;
    let log_sq = log_abs.iter().fold(f64::NEG_INFINITY, |acc, &l| log_add(acc, 2.0 * l));
    if !log_sq.is_finite() {
        return Err(Error::NonConvergence {
            what: "eigenvector",
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let shift = 0.5 * (log_sq + h.ln());
    let imax = log_abs
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let flip = sign[imax];
    for (l, s) in log_abs.iter_mut().zip(sign.iter_mut()) {
        *l -= shift;
        *s *= flip;
    }
    let vector: Vec<f64> = log_abs.iter().zip(&sign).map(|(l, s)| s * l.exp()).collect();
    let residual = relative_residual(op, value, &vector);
    let index = sturm_count(op, value - 1e-9 * (1.0 + value.abs())) + 1;
    Ok(EigenPair {
        value,
        vector,
        log_abs,
        residual,
        index,
    })
}

fn relative_residual(op: &TridiagonalOperator, value: f64, v: &[f64]) -> f64 {
    let av = op.apply(v);
    let r: Vec<f64> = av.iter().zip(v).map(|(x, y)| x - value * y).collect();
    norm2(&r) / (op.norm_bound().max(f64::MIN_POSITIVE) * norm2(v))
}

/// Solve `(A - σ) x = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted(op: &TridiagonalOperator, sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = op.dim();
    // rows hold (main, first super, second super) after elimination
    let mut d: Vec<f64> = op.diag.iter().map(|a| a - sigma).collect();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { op.offdiag[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut l: Vec<f64> = (0..n).map(|i| if i > 0 { op.offdiag[i - 1] } else { 0.0 }).collect();
    let mut x = rhs.to_vec();
    let tiny = f64::EPSILON * op.norm_bound().max(f64::MIN_POSITIVE);
    for i in 0..n - 1 {
        let sub = l[i + 1];
        if sub.abs() > d[i].abs() {
            // swap rows i and i+1
            let (nd, nu1, nu2) = (sub, d[i + 1], u1[i + 1]);
            let (od, ou1, ou2) = (d[i], u1[i], u2[i]);
            d[i] = nd;
            u1[i] = nu1;
            u2[i] = nu2;
            x.swap(i, i + 1);
            let m = od / nd;
            d[i + 1] = ou1 - m * nu1;
            u1[i + 1] = ou2 - m * nu2;
            x[i + 1] -= m * x[i];
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let m = sub / d[i];
            d[i + 1] -= m * u1[i];
            u1[i + 1] -= m * u2[i];
            x[i + 1] -= m * x[i];
        }
        l[i + 1] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

fn inverse_iteration(op: &TridiagonalOperator, lambda: f64, tol: f64, start: Vec<f64>) -> Result<EigenPair> {
    let mut v = start;
    let nv = norm2(&v);
    if !(nv > 0.0) || !nv.is_finite() {
        v = vec![1.0; op.dim()];
    }
    let mut residual = f64::INFINITY;
    let mut value = lambda;
    for _ in 0..50 {
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut w = solve_shifted(op, lambda, &v);
        let nw = norm2(&w);
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        value = dot(&w, &op.apply(&w));
        residual = relative_residual(op, value, &w);
        v = w;
        if residual <= tol {
            let log_abs: Vec<f64> = v.iter().map(|x| x.abs().ln()).collect();
            let sign: Vec<f64> = v.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect();
            return finish(op, value, log_abs, sign);
        }
    }
    let _ = value;
    Err(Error::NonConvergence {
        what: "inverse iteration",
        iterations: 50,
        residual,
    })
}

/// The `k`-th eigenpair with a gap check against its neighbours.
pub fn eigenpair_k(op: &TridiagonalOperator, k: usize, tol: f64) -> Result<EigenPair> {
    let lambda = if op.is_periodic() {
        eigenvalue_k(op, k, tol)?
    } else {
        eigenvalue_k_exact(op, k)?
    };
    let scale = 1.0 + lambda.abs();
    let mut gap = f64::INFINITY;
    if k > 1 {
        gap = gap.min(lambda - eigenvalue_k(op, k - 1, 1e-14)?);
    }
    if k < op.dim() {
        gap = gap.min(eigenvalue_k(op, k + 1, 1e-14)? - lambda);
    }
    if gap <= 1e3 * tol.max(1e-14) * scale {
        return Err(Error::Ambiguous(format!(
            "eigenvalue {k} at {lambda} has a neighbour within {gap:e}"
        )));
    }
    let mut pair = eigenvector(op, lambda, tol)?;
    pair.index = k;
    Ok(pair)
}

/// Cyclic Jacobi eigen-decomposition of a dense symmetric matrix; returns
/// ascending eigenvalues and, if requested, eigenvectors as columns.
fn jacobi(mut a: Vec<Vec<f64>>, want_vectors: bool) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    let mut v = if want_vectors {
        let mut v = vec![vec![0.0; n]; n];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        v
    } else {
        Vec::new()
    };
    let total: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-12 * total.max(f64::MIN_POSITIVE);
    let mut off = f64::INFINITY;
    for _sweep in 0..100 {
        off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * a[i][j] * a[i][j];
            }
        }
        off = off.sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                if want_vectors {
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
    }
    if off > target {
        return Err(Error::NonConvergence {
            what: "cyclic Jacobi",
            iterations: 100,
            residual: off,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = if want_vectors {
        order.iter().map(|&j| (0..n).map(|i| v[i][j]).collect()).collect()
    } else {
        Vec::new()
    };
    Ok((values, vectors))
}

/// Full ascending spectrum of a (possibly periodic) operator.
pub fn dense_spectrum(op: &TridiagonalOperator) -> Result<Vec<f64>> {
    if op.dim() > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim: op.dim(),
            cap: DENSE_CAP,
        });
    }
    Ok(jacobi(op.to_dense(), false)?.0)
}

/// Full spectrum with eigenvectors (each normalized in the weighted norm).
pub fn dense_eigen(op: &TridiagonalOperator) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if op.dim() > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim: op.dim(),
            cap: DENSE_CAP,
        });
    }
    let (values, mut vectors) = jacobi(op.to_dense(), true)?;
    let s = op.spacing.sqrt();
    for v in vectors.iter_mut() {
        v.iter_mut().for_each(|x| *x /= s);
    }
    Ok((values, vectors))
}

fn dense_eigenvector(op: &TridiagonalOperator, lambda: f64) -> Result<EigenPair> {
    let (values, vectors) = dense_eigen(op)?;
    let (k, _) = values
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - lambda).abs().partial_cmp(&(y.1 - lambda).abs()).unwrap())
        .ok_or_else(|| Error::invalid("empty operator"))?;
    let v = &vectors[k];
    let log_abs: Vec<f64> = v.iter().map(|x| x.abs().ln()).collect();
    let sign: Vec<f64> = v.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut pair = finish(op, values[k], log_abs, sign)?;
    pair.index = k + 1;
    Ok(pair)
}

/// `‖(A - λ)u‖ / ‖u‖`, an upper bound for the distance from `λ` to the
/// spectrum of `A`.
pub fn spectral_distance_bound(op: &TridiagonalOperator, lambda: f64, u: &[f64]) -> Result<f64> {
    if u.len() != op.dim() {
        return Err(Error::LengthMismatch {
            expected: op.dim(),
            got: u.len(),
        });
    }
    let nu = norm2(u);
    if nu == 0.0 {
        return Err(Error::invalid("spectral distance needs a nonzero vector"));
    }
    let au = op.apply(u);
    let r: Vec<f64> = au.iter().zip(u).map(|(x, y)| x - lambda * y).collect();
    Ok(norm2(&r) / nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_x_operator, Grid1D};
    use crate::profiles::{DegeneracyProfile, PotentialSpec};
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn laplace3() -> TridiagonalOperator {
        TridiagonalOperator::new(vec![2.0; 3], vec![-1.0; 2]).unwrap()
    }

    fn harmonic(n: usize, xi: f64) -> (Grid1D, TridiagonalOperator) {
        let grid = Grid1D::dirichlet(-1.0, 1.0, n).unwrap();
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let op = assemble_x_operator(&grid, &q, xi, &PotentialSpec::Zero, false).unwrap();
        (grid, op)
    }

    #[test]
    fn small_closed_forms() {
        let op = laplace3();
        assert!((eigenvalue_k(&op, 1, 1e-14).unwrap() - (2.0 - SQRT_2)).abs() < 1e-12);
        assert!((eigenvalue_k(&op, 3, 1e-14).unwrap() - (2.0 + SQRT_2)).abs() < 1e-12);
        assert!(eigenvalue_k(&op, 4, 1e-14).is_err());
        assert_eq!(sturm_count(&op, 2.0), 1);
        assert_eq!(sturm_count(&op, -1.0), 0);
        assert_eq!(sturm_count(&op, 5.0), 3);
    }

    #[test]
    fn dirichlet_ground_value() {
        let (_, op) = harmonic(2047, 0.0);
        let l = eigenvalue_k(&op, 1, 1e-12).unwrap();
        let exact = PI * PI / 4.0;
        assert!((l - exact).abs() / exact < 1e-5);
    }

    #[test]
    fn laplacian_ground_mode_is_cosine() {
        let (grid, op) = harmonic(255, 0.0);
        let p = eigenpair_k(&op, 1, 1e-10).unwrap();
        let c: Vec<f64> = grid.nodes().iter().map(|x| (PI * x / 2.0).cos()).collect();
        let cos = dot(&p.vector, &c) / (norm2(&p.vector) * norm2(&c));
        assert!(cos > 1.0 - 1e-10);
        let imax = p.vector.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
        assert_eq!(imax, 127);
        let nrm = (grid.spacing() * p.vector.iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!((nrm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_ground_state_even_and_gaussian() {
        let (grid, op) = harmonic(2047, 256.0);
        let p = eigenpair_k(&op, 1, 1e-10).unwrap();
        let n = p.vector.len();
        for i in 0..n {
            assert!((p.vector[i] - p.vector[n - 1 - i]).abs() <= 1e-8);
        }
        let g: Vec<f64> = grid.nodes().iter().map(|x| (-256.0 * x * x / 2.0).exp()).collect();
        let cos = dot(&p.vector, &g) / (norm2(&p.vector) * norm2(&g));
        assert!(cos >= 0.999, "{cos}");
    }

    #[test]
    fn log_tail_matches_deep_decay() {
        // Gaussian tail e^{-ξx²/2} at x = 1 with ξ = 2048 is e^{-1024}
        let (grid, op) = harmonic(8191, 2048.0);
        let p = eigenpair_k(&op, 1, 1e-10).unwrap();
        let last = *p.log_abs.last().unwrap();
        let x = grid.node(grid.len() - 1);
        let expected = -2048.0 * x * x / 2.0;
        assert!(last.is_finite());
        assert!((last - expected).abs() / expected.abs() < 0.02, "{last} vs {expected}");
        assert_eq!(p.vector[grid.len() - 1], 0.0);
    }

    #[test]
    fn dense_examples() {
        let op = TridiagonalOperator::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        let s = dense_spectrum(&op).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 3.0).abs() < 1e-12);
        let op = TridiagonalOperator::new(vec![3.0, -1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(dense_spectrum(&op).unwrap(), vec![-1.0, 2.0, 3.0]);
        let big = TridiagonalOperator::new(vec![1.0; DENSE_CAP + 1], vec![0.0; DENSE_CAP]).unwrap();
        assert!(matches!(dense_spectrum(&big), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn spectral_distance_examples() {
        let op = TridiagonalOperator::new(vec![1.0, 3.0], vec![0.0]).unwrap();
        assert!((spectral_distance_bound(&op, 1.9, &[1.0, 0.0]).unwrap() - 0.9).abs() < 1e-15);
        let s = 1.0 / SQRT_2;
        assert!((spectral_distance_bound(&op, 2.0, &[s, s]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spectral_distance_bound(&op, 2.0, &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(spectral_distance_bound(&op, 2.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn orthogonality_of_low_modes() {
        let (grid, op) = harmonic(511, 16.0);
        let pairs: Vec<EigenPair> = (1..=4).map(|k| eigenpair_k(&op, k, 1e-10).unwrap()).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                let ip = grid.spacing() * dot(&pairs[i].vector, &pairs[j].vector);
                assert!(ip.abs() <= 1e-8, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn inverse_iteration_fallback() {
        let (_, op) = harmonic(255, 4.0);
        let l = eigenvalue_k(&op, 2, 1e-6).unwrap();
        let p = inverse_iteration(&op, l, 1e-12, vec![1.0; 255]).unwrap();
        assert!(p.residual <= 1e-12);
        assert_eq!(p.index, 2);
    }

    fn tridiag_strategy() -> impl Strategy<Value = TridiagonalOperator> {
        (2usize..=12).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-5.0f64..5.0, n - 1),
            )
                .prop_map(|(d, o)| TridiagonalOperator::new(d, o).unwrap())
        })
    }

    proptest! {
        #[test]
        fn bisection_matches_dense(op in tridiag_strategy()) {
            let dense = dense_spectrum(&op).unwrap();
            for (k, exact) in dense.iter().enumerate() {
                let l = eigenvalue_k(&op, k + 1, 1e-15).unwrap();
                prop_assert!((l - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
            }
        }

        #[test]
        fn sturm_consistency(op in tridiag_strategy()) {
            let tol = 1e-12;
            for k in 1..=op.dim() {
                let l = eigenvalue_k(&op, k, tol).unwrap();
                let eps = 10.0 * tol * (1.0 + l.abs());
                prop_assert!(sturm_count(&op, l - eps) < k);
                prop_assert!(sturm_count(&op, l + eps) >= k);
            }
        }

        #[test]
        fn sturm_count_monotone(op in tridiag_strategy(), a in -30.0f64..30.0, b in -30.0f64..30.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(sturm_count(&op, lo) <= sturm_count(&op, hi));
        }

        #[test]
        fn distance_bound_dominates(op in tridiag_strategy(), lambda in -15.0f64..15.0, seed in prop::collection::vec(-1.0f64..1.0, 12)) {
            let u: Vec<f64> = seed[..op.dim()].to_vec();
            prop_assume!(norm2(&u) > 1e-6);
            let dense = dense_spectrum(&op).unwrap();
            let dist = dense.iter().map(|e| (e - lambda).abs()).fold(f64::INFINITY, f64::min);
            let bound = spectral_distance_bound(&op, lambda, &u).unwrap();
            prop_assert!(bound >= dist - 1e-10 * (1.0 + dist));
        }
    }
}
