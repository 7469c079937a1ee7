//! Uniform grids and three-point finite-difference operators.
//!
//! x-direction operators discretize `-u'' + w(x) u` with Dirichlet conditions;
//! y-direction operators discretize `-(r(y)^2 u')'` in conservative flux form,
//! either Dirichlet or periodic (the latter stored with a corner entry).

use std::io::Write;

use crate::error::{Error, Result};
use crate::profiles::{DegeneracyProfile, PotentialSpec, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Uniform 1-D grid. Dirichlet grids hold `n` interior nodes with spacing
/// `(b - a) / (n + 1)`; periodic grids hold `n` nodes with spacing `(b - a) / n`
/// and node `n` identified with node `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub fn dirichlet(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(a, b, n, Boundary::Dirichlet)
    }

    pub fn periodic(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(a, b, n, Boundary::Periodic)
    }

    pub fn new(a: f64, b: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::invalid(format!("grid endpoints must satisfy a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b, n, boundary })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => (self.b - self.a) / (self.n as f64 + 1.0),
            Boundary::Periodic => (self.b - self.a) / self.n as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.a + (i as f64 + 1.0) * self.spacing(),
            Boundary::Periodic => self.a + i as f64 * self.spacing(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Half-length of the interval, used by the resolution rule.
    pub fn half_length(&self) -> f64 {
        0.5 * (self.b - self.a)
    }
}

/// Symmetric tridiagonal matrix, optionally with a periodic corner coupling
/// between the first and last unknowns.
///
/// `spacing` is the grid step used for the discrete L² inner product
/// `<u, v> = spacing * sum(u_i v_i)`; raw matrices use `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub corner: Option<f64>,
    pub spacing: f64,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len().saturating_sub(1),
                got: offdiag.len(),
            });
        }
        if diag.iter().chain(offdiag.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        Ok(Self {
            diag,
            offdiag,
            corner: None,
            spacing: 1.0,
        })
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_corner(mut self, corner: f64) -> Self {
        self.corner = Some(corner);
        self
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.corner.is_some()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(u.len(), n);
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.offdiag[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * u[i + 1];
            }
            out[i] = s;
        }
        if let Some(c) = self.corner {
            out[0] += c * u[n - 1];
            out[n - 1] += c * u[0];
        }
    }

    /// Gershgorin interval `[lo, hi]` containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    r += c.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm, an upper bound for the spectral norm of a symmetric matrix.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.offdiag[i];
                m[i + 1][i] = self.offdiag[i];
            }
        }
        if let Some(c) = self.corner {
            m[0][n - 1] += c;
            m[n - 1][0] += c;
        }
        m
    }

    /// Three-column CSV `index,diag,offdiag`; the last row's offdiag holds the
    /// corner entry (or 0 for Dirichlet operators).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,diag,offdiag")?;
        let n = self.dim();
        for i in 0..n {
            let off = if i + 1 < n {
                self.offdiag[i]
            } else {
                self.corner.unwrap_or(0.0)
            };
            writeln!(w, "{},{:.16e},{:.16e}", i, self.diag[i], off)?;
        }
        Ok(())
    }
}

/// Discretize `G_{V,xi} = -d²/dx² + xi² q(x)² + V(x)` on a Dirichlet grid.
///
/// With `classical = true` the potential `xi² q(x)²` is replaced by its
/// leading-order model `(q^(γ)(0)/γ!)² xi² x^{2γ}`.
pub fn assemble_x_operator(
    grid: &Grid1D,
    profile: &DegeneracyProfile,
    xi: f64,
    potential: &PotentialSpec,
    classical: bool,
) -> Result<TridiagonalOperator> {
    if grid.boundary() != Boundary::Dirichlet {
        return Err(Error::invalid("x-direction operators require a Dirichlet grid"));
    }
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let xi2 = xi * xi;
    let coeff = profile.leading_coefficient();
    let gamma = profile.gamma() as i32;
    let diag = grid
        .nodes()
        .into_iter()
        .map(|x| {
            let w = if classical {
                let m = coeff * x.powi(gamma);
                xi2 * m * m
            } else {
                let q = profile.eval(x);
                xi2 * q * q
            };
            2.0 * inv_h2 + w + potential.eval(x)
        })
        .collect::<Vec<_>>();
    let offdiag = vec![-inv_h2; grid.len() - 1];
    Ok(TridiagonalOperator::new(diag, offdiag)?.with_spacing(h))
}

/// Discretize `-(r(y)² u')'` with half-node weights.
pub fn assemble_y_operator(grid: &Grid1D, weight: &WeightSpec) -> Result<TridiagonalOperator> {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let n = grid.len();
    let r2 = |y: f64| -> Result<f64> {
        let r = weight.eval(y);
        if !(r >= weight.floor()) {
            return Err(Error::invalid(format!(
                "weight r({y}) = {r} is below the positivity floor {}",
                weight.floor()
            )));
        }
        Ok(r * r)
    };
    // flux weight between node i and node i+1 (index n-1 -> wrap for periodic,
    // right boundary for Dirichlet)
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        right.push(r2(grid.node(i) + 0.5 * h)?);
    }
    let left0 = r2(grid.node(0) - 0.5 * h)?;
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let left = if i == 0 {
            match grid.boundary() {
                Boundary::Dirichlet => left0,
                Boundary::Periodic => right[n - 1],
            }
        } else {
            right[i - 1]
        };
        diag.push((left + right[i]) * inv_h2);
    }
    let offdiag = right[..n - 1].iter().map(|w| -w * inv_h2).collect();
    let op = TridiagonalOperator::new(diag, offdiag)?.with_spacing(h);
    Ok(match grid.boundary() {
        Boundary::Dirichlet => op,
        Boundary::Periodic => op.with_corner(-right[n - 1] * inv_h2),
    })
}

/// Discrete L² norm `sqrt(h * sum v_i²)`; Dirichlet boundary values are zero,
/// so the trapezoid rule reduces to this sum.
pub fn weighted_norm(values: &[f64], grid: &Grid1D) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok((grid.spacing() * values.iter().map(|v| v * v).sum::<f64>()).sqrt())
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm2(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{dense_spectrum, eigenvalue_k};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn zero_xi_operator(n: usize) -> TridiagonalOperator {
        let grid = Grid1D::dirichlet(-1.0, 1.0, n).unwrap();
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        assemble_x_operator(&grid, &q, 0.0, &PotentialSpec::Zero, false).unwrap()
    }

    #[test]
    fn laplacian_closed_form_n3() {
        let op = zero_xi_operator(3);
        let h: f64 = 0.5;
        for (d, o) in op.diag.iter().zip(op.offdiag.iter().chain([&-4.0])) {
            assert!((d - 2.0 / (h * h)).abs() < 1e-12);
            assert!((o + 1.0 / (h * h)).abs() < 1e-12);
        }
        let ev = dense_spectrum(&op).unwrap();
        let expect = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()].map(|v| v / (h * h));
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn constant_potential_shifts_diagonal() {
        let grid = Grid1D::dirichlet(-1.0, 1.0, 17).unwrap();
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let a = assemble_x_operator(&grid, &q, 0.0, &PotentialSpec::Zero, false).unwrap();
        let b = assemble_x_operator(&grid, &q, 0.0, &PotentialSpec::Constant(5.0), false).unwrap();
        for (x, y) in a.diag.iter().zip(&b.diag) {
            assert_eq!(y - x, 5.0);
        }
        assert_eq!(a.offdiag, b.offdiag);
    }

    #[test]
    fn classical_matches_generalized_for_linear_q() {
        let grid = Grid1D::dirichlet(-1.0, 1.0, 65).unwrap();
        let q = DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap();
        let a = assemble_x_operator(&grid, &q, 100.0, &PotentialSpec::Zero, false).unwrap();
        let b = assemble_x_operator(&grid, &q, 100.0, &PotentialSpec::Zero, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn y_operator_dirichlet_sine_spectrum() {
        let grid = Grid1D::dirichlet(0.0, PI, 255).unwrap();
        let op = assemble_y_operator(&grid, &WeightSpec::one()).unwrap();
        for k in 1..=3 {
            let ev = eigenvalue_k(&op, k, 1e-13).unwrap();
            let exact = (k * k) as f64;
            assert!((ev - exact).abs() / exact < 1e-3, "k={k} ev={ev}");
        }
    }

    #[test]
    fn y_operator_periodic_has_constant_mode() {
        let grid = Grid1D::periodic(0.0, 2.0 * PI, 256).unwrap();
        let op = assemble_y_operator(&grid, &WeightSpec::one()).unwrap();
        assert!(op.is_periodic());
        let ones = vec![1.0; 256];
        assert!(norm2(&op.apply(&ones)) < 1e-9);
    }

    #[test]
    fn y_operator_scales_with_constant_weight() {
        let grid = Grid1D::dirichlet(0.0, PI, 31).unwrap();
        let one = assemble_y_operator(&grid, &WeightSpec::one()).unwrap();
        let two = assemble_y_operator(&grid, &WeightSpec::constant(2.0).unwrap()).unwrap();
        for (a, b) in one.diag.iter().zip(&two.diag) {
            assert!((4.0 * a - b).abs() < 1e-9 * b.abs());
        }
        for (a, b) in one.offdiag.iter().zip(&two.offdiag) {
            assert!((4.0 * a - b).abs() < 1e-9 * b.abs());
        }
    }

    #[test]
    fn weight_below_floor_rejected() {
        let grid = Grid1D::dirichlet(0.0, 1.0, 7).unwrap();
        let w = WeightSpec::polynomial(vec![0.0, 1.0], 0.1).unwrap();
        assert!(assemble_y_operator(&grid, &w).is_err());
    }

    #[test]
    fn weighted_norm_values() {
        let grid = Grid1D::dirichlet(0.0, PI, 4000).unwrap();
        let ones = vec![1.0; grid.len()];
        let n1 = weighted_norm(&ones, &grid).unwrap();
        assert!((n1 - PI.sqrt()).abs() / PI.sqrt() < 0.01);
        let zeros = vec![0.0; grid.len()];
        assert_eq!(weighted_norm(&zeros, &grid).unwrap(), 0.0);
        let s: Vec<f64> = grid.nodes().iter().map(|x| x.sin()).collect();
        let ns = weighted_norm(&s, &grid).unwrap();
        assert!((ns - (PI / 2.0).sqrt()).abs() < 1e-3);
        assert!(weighted_norm(&s[1..], &grid).is_err());
        let scaled: Vec<f64> = s.iter().map(|v| -3.0 * v).collect();
        assert!((weighted_norm(&scaled, &grid).unwrap() - 3.0 * ns).abs() < 1e-12);
    }

    #[test]
    fn assembled_operators_are_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = Grid1D::dirichlet(-1.0, 1.0, 101).unwrap();
        let q = DegeneracyProfile::tangent(1.0, 1.0).unwrap();
        let v = PotentialSpec::Polynomial(vec![1.0, 0.0, -3.0]);
        let ax = assemble_x_operator(&grid, &q, 37.0, &v, false).unwrap();
        let gy = Grid1D::periodic(0.0, 2.0 * PI, 64).unwrap();
        let ay = assemble_y_operator(&gy, &WeightSpec::polynomial(vec![1.0, 0.1], 0.5).unwrap()).unwrap();
        for op in [ax, ay] {
            for _ in 0..20 {
                let u: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let lhs = dot(&op.apply(&u), &w);
                let rhs = dot(&u, &op.apply(&w));
                let scale = op.norm_bound() * norm2(&u) * norm2(&w);
                assert!((lhs - rhs).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn second_order_convergence_of_ground_value() {
        let exact = PI * PI / 4.0;
        let e1 = (eigenvalue_k(&zero_xi_operator(63), 1, 1e-14).unwrap() - exact).abs();
        let e2 = (eigenvalue_k(&zero_xi_operator(127), 1, 1e-14).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gershgorin_lower_bound_holds() {
        let grid = Grid1D::dirichlet(-1.0, 1.0, 41).unwrap();
        let q = DegeneracyProfile::monomial(2, 1.0, 1.0).unwrap();
        for xi in [0.0, 10.0, 300.0] {
            let op = assemble_x_operator(&grid, &q, xi, &PotentialSpec::Constant(-2.0), false).unwrap();
            let (lo, _) = op.gershgorin();
            let ev = dense_spectrum(&op).unwrap();
            assert!(ev[0] >= lo - 1e-9);
        }
    }

    #[test]
    fn csv_export_has_one_row_per_node() {
        let op = zero_xi_operator(5);
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("index,diag,offdiag"));
    }
}
