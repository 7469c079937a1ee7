//! Crank–Nicolson integration of `∂_t f - ∂ₓ²f - q²∂_y(r²∂_y f) + V f = 0`
//! on tensor grids.

use std::io::Write;

use crate::discretize::{assemble_x_operator, assemble_y_operator, dot, Grid1D, TridiagonalOperator};
use crate::eigensolve::eigenpair_k;
use crate::error::{Error, Result};
use crate::generalized::y_eigenbasis;
use crate::profiles::{DegeneracyProfile, PotentialSpec, WeightSpec};

/// Values on an `n_x × n_y` tensor grid, stored x-major (`i * n_y + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    values: Vec<f64>,
    grid_x: Grid1D,
    grid_y: Grid1D,
    time: f64,
}

impl TensorField {
    pub fn new(values: Vec<f64>, grid_x: Grid1D, grid_y: Grid1D, time: f64) -> Result<Self> {
        let expected = grid_x.len() * grid_y.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tensor field has non-finite entries"));
        }
        if !time.is_finite() {
            return Err(Error::invalid("field time must be finite"));
        }
        Ok(Self {
            values,
            grid_x,
            grid_y,
            time,
        })
    }

    /// `u ⊗ w`.
    pub fn outer(u: &[f64], w: &[f64], grid_x: Grid1D, grid_y: Grid1D) -> Result<Self> {
        if u.len() != grid_x.len() || w.len() != grid_y.len() {
            return Err(Error::LengthMismatch {
                expected: grid_x.len() * grid_y.len(),
                got: u.len() * w.len(),
            });
        }
        let values = u.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect();
        Self::new(values, grid_x, grid_y, 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grids(&self) -> (Grid1D, Grid1D) {
        (self.grid_x, self.grid_y)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_y.len() + j]
    }

    fn cell(&self) -> f64 {
        self.grid_x.spacing() * self.grid_y.spacing()
    }

    /// Discrete `L²(Ω)` inner product.
    pub fn inner(&self, other: &TensorField) -> f64 {
        self.cell() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Relative distance from the rank-one field `u ⊗ w` spanned by `mode`.
    pub fn rank_one_defect(&self, mode: &TensorField) -> f64 {
        let c = self.inner(mode) / mode.inner(mode);
        let resid: f64 = self
            .values
            .iter()
            .zip(&mode.values)
            .map(|(a, b)| (a - c * b).powi(2))
            .sum::<f64>()
            * self.cell();
        resid.sqrt() / self.norm()
    }

    /// Flat CSV snapshot `(x, y, value)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,value")?;
        for i in 0..self.grid_x.len() {
            let x = self.grid_x.node(i);
            for j in 0..self.grid_y.len() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, self.grid_y.node(j), self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// `A = (Aₓ + V) ⊗ I + diag(q²) ⊗ A_y`, applied factor by factor.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatOperator {
    ax: TridiagonalOperator,
    q2: Vec<f64>,
    ay: TridiagonalOperator,
    grid_x: Grid1D,
    grid_y: Grid1D,
    lower_bound: f64,
    potential_floor: f64,
}

impl HeatOperator {
    pub fn assemble(
        grid_x: &Grid1D,
        grid_y: &Grid1D,
        profile: &DegeneracyProfile,
        potential: &PotentialSpec,
        weight: &WeightSpec,
    ) -> Result<Self> {
        let ax = assemble_x_operator(grid_x, profile, 0.0, potential, false)?;
        let ay = assemble_y_operator(grid_y, weight)?;
        let q2: Vec<f64> = grid_x.nodes().iter().map(|&x| profile.eval(x).powi(2)).collect();
        let q2_max = q2.iter().cloned().fold(0.0, f64::max);
        let ay_lo = ay.gershgorin().0;
        let lower_bound = ax.gershgorin().0 + if ay_lo < 0.0 { q2_max * ay_lo } else { 0.0 };
        let potential_floor = grid_x.nodes().iter().map(|&x| potential.eval(x)).fold(f64::INFINITY, f64::min);
        Ok(Self {
            ax,
            q2,
            ay,
            grid_x: *grid_x,
            grid_y: *grid_y,
            lower_bound,
            potential_floor,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid_x.len() * self.grid_y.len()
    }

    /// Smallest value of `V` on the x-grid.
    pub fn potential_floor(&self) -> f64 {
        self.potential_floor
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.grid_x.len(), self.grid_y.len());
        let mut row = vec![0.0; ny];
        for i in 0..nx {
            self.ay.apply_into(&u[i * ny..(i + 1) * ny], &mut row);
            for j in 0..ny {
                out[i * ny + j] = self.q2[i] * row[j];
            }
        }
        let d = &self.ax.diag;
        let e = &self.ax.offdiag;
        for i in 0..nx {
            for j in 0..ny {
                let mut s = d[i] * u[i * ny + j];
                if i > 0 {
                    s += e[i - 1] * u[(i - 1) * ny + j];
                }
                if i + 1 < nx {
                    s += e[i] * u[(i + 1) * ny + j];
                }
                out[i * ny + j] += s;
            }
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    fn diagonal(&self) -> Vec<f64> {
        let ny = self.grid_y.len();
        (0..self.dim())
            .map(|k| self.ax.diag[k / ny] + self.q2[k / ny] * self.ay.diag[k % ny])
            .collect()
    }
}

/// Conjugate-gradient controls for the implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    pub rel_tol: f64,
    /// Defaults to `10 √dim`.
    pub max_iter: Option<usize>,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

/// Jacobi-preconditioned CG for `(I + c A) x = b`, starting from `x`.
fn cg_solve(op: &HeatOperator, c: f64, b: &[f64], x: &mut [f64], settings: &CgSettings) -> Result<usize> {
    let n = b.len();
    let max_iter = settings.max_iter.unwrap_or((10.0 * (n as f64).sqrt()).ceil() as usize);
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / (1.0 + c * d)).collect();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut ax = vec![0.0; n];
    op.apply_into(x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|k| b[k] - x[k] - c * ax[k]).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt();
    for it in 0..=max_iter {
        if res <= settings.rel_tol * b_norm {
            return Ok(it);
        }
        if it == max_iter {
            break;
        }
        op.apply_into(&p, &mut ax);
        let ap: Vec<f64> = p.iter().zip(&ax).map(|(a, b)| a + c * b).collect();
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        res = dot(&r, &r).sqrt();
    }
    Err(Error::NonConvergence {
        what: "conjugate gradient",
        iterations: max_iter,
        residual: res / b_norm,
    })
}

/// One step of `(I + dt/2 A) f_new = (I - dt/2 A) f`; also returns the CG
/// iteration count.
pub fn step_crank_nicolson(
    field: &TensorField,
    dt: f64,
    op: &HeatOperator,
    settings: &CgSettings,
) -> Result<(TensorField, usize)> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if field.grid_x != op.grid_x || field.grid_y != op.grid_y {
        return Err(Error::invalid("field and operator live on different grids"));
    }
    if 1.0 + 0.5 * dt * op.lower_bound <= 0.0 {
        return Err(Error::invalid(format!(
            "I + dt/2 A is not positive definite for dt = {dt} (spectral lower bound {})",
            op.lower_bound
        )));
    }
    let c = 0.5 * dt;
    let av = op.apply(&field.values);
    let rhs: Vec<f64> = field.values.iter().zip(&av).map(|(f, a)| f - c * a).collect();
    let mut next = field.values.clone();
    let iterations = cg_solve(op, c, &rhs, &mut next, settings)?;
    Ok((
        TensorField {
            values: next,
            grid_x: field.grid_x,
            grid_y: field.grid_y,
            time: field.time + dt,
        },
        iterations,
    ))
}

/// Norm trajectory of a Crank–Nicolson run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub field: TensorField,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub max_cg_iterations: usize,
    /// First step at which the norm bound `‖f(t+dt)‖ <= e^{max(-V, 0) dt} ‖f(t)‖` failed.
    pub norm_violation: Option<usize>,
}

impl Trajectory {
    pub fn write_norm_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,norm")?;
        for (t, n) in self.times.iter().zip(&self.norms) {
            writeln!(w, "{:.16e},{:.16e}", t, n)?;
        }
        Ok(())
    }
}

pub fn evolve(field: TensorField, op: &HeatOperator, dt: f64, steps: usize, settings: &CgSettings) -> Result<Trajectory> {
    let growth = (-op.potential_floor()).max(0.0);
    let mut times = vec![field.time];
    let mut norms = vec![field.norm()];
    let mut max_cg_iterations = 0;
    let mut norm_violation = None;
    let mut f = field;
    for step in 0..steps {
        let (next, it) = step_crank_nicolson(&f, dt, op, settings)?;
        max_cg_iterations = max_cg_iterations.max(it);
        let n = next.norm();
        let prev = *norms.last().unwrap();
        if norm_violation.is_none() && n > prev * (growth * dt).exp() * (1.0 + 1e-10) {
            norm_violation = Some(step + 1);
        }
        times.push(next.time);
        norms.push(n);
        f = next;
    }
    Ok(Trajectory {
        field: f,
        times,
        norms,
        max_cg_iterations,
        norm_violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatComparison {
    pub mode: (usize, usize),
    /// `ξ_n`, the square root of the `n`-th eigenvalue of the y-operator.
    pub xi: f64,
    pub lambda: f64,
    pub dt: f64,
    pub steps: usize,
    /// `‖f(t)‖ / ‖f(0)‖` against `e^{-λt}`.
    pub predicted: Vec<f64>,
    pub max_rel_error: f64,
    pub rank_one_defect: f64,
    pub trajectory: Trajectory,
}

/// Start from the tensor mode `v_k ⊗ φ_n` and compare the simulated decay
/// with `e^{-λ_{k,n} t}`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_and_compare(
    profile: &DegeneracyProfile,
    potential: &PotentialSpec,
    weight: &WeightSpec,
    grid_x: &Grid1D,
    grid_y: &Grid1D,
    mode: (usize, usize),
    t_final: f64,
    dt: f64,
    settings: &CgSettings,
) -> Result<HeatComparison> {
    let (k, n) = mode;
    if k == 0 || n == 0 {
        return Err(Error::invalid("mode indices start at 1"));
    }
    if !(t_final >= 0.0) || !(dt > 0.0) {
        return Err(Error::invalid("need T >= 0 and dt > 0"));
    }
    let steps = (t_final / dt).round() as usize;
    if ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(Error::invalid(format!("T = {t_final} is not a multiple of dt = {dt}")));
    }
    let basis = y_eigenbasis(grid_y, weight, n)?;
    let xi = basis.frequencies()[n - 1];
    let ax = assemble_x_operator(grid_x, profile, xi, potential, false)?;
    let vx = eigenpair_k(&ax, k, 1e-12)?;
    let lambda = vx.value;
    if lambda > 0.0 && dt > 0.1 / lambda {
        return Err(Error::invalid(format!(
            "accuracy rule violated: dt = {dt} exceeds 0.1/lambda = {}",
            0.1 / lambda
        )));
    }
    let op = HeatOperator::assemble(grid_x, grid_y, profile, potential, weight)?;
    let initial = TensorField::outer(&vx.vector, &basis.vectors[n - 1], *grid_x, *grid_y)?;
    let n0 = initial.norm();
    let trajectory = evolve(initial.clone(), &op, dt, steps, settings)?;
    let predicted: Vec<f64> = trajectory.times.iter().map(|t| (-lambda * t).exp()).collect();
    let max_rel_error = trajectory
        .norms
        .iter()
        .zip(&predicted)
        .map(|(m, p)| (m / n0 - p).abs() / p)
        .fold(0.0, f64::max);
    let rank_one_defect = trajectory.field.rank_one_defect(&initial);
    Ok(HeatComparison {
        mode,
        xi,
        lambda,
        dt,
        steps,
        predicted,
        max_rel_error,
        rank_one_defect,
        trajectory,
    })
}
