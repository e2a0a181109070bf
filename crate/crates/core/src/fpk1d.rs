//! Kinetic Fokker–Planck solver in one space dimension.
//!
//! Solves `∂ₜρ + v ∂ₓρ = ε⁻¹ ∂ᵥ[(v - b(x,t)) ρ + ∂ᵥρ]` on `𝕋 × (-V, V)` with
//! zero flux at `±V`, by Strang splitting: a half-step translation in `x`
//! (three-point Lagrange interpolation along each velocity row), a full
//! Crank–Nicolson step of the velocity operator per spatial column with `b`
//! at the half-step time, and another half-step translation.
//!
//! The velocity flux at the face between cells `k` and `k+1` is
//! `q = (b - v_f)(ρ_k + ρ_{k+1})/2 - (ρ_{k+1} - ρ_k)/δv`.

use crate::addiff::{DensityLine, Grid1D};
use crate::linalg::{solve_tridiagonal, Tridiagonal};
use crate::{Eps, Error, Exec, FlowField, Result, TWO_PI};

/// Phase-space grid: `N` cells in `x`, `2M` cells in `v` on `(-V, V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    nx: usize,
    m: usize,
    v_cutoff: f64,
    dx: f64,
    dv: f64,
    pub dt: f64,
}

impl PhaseGrid {
    pub fn new(nx: usize, m: usize, v_cutoff: f64, dt: f64) -> Result<Self> {
        if nx < 4 || m < 2 {
            return Err(Error::Config(format!("phase grid needs N >= 4 and M >= 2, got N = {nx}, M = {m}")));
        }
        if !(v_cutoff.is_finite() && v_cutoff > 0.0) {
            return Err(Error::Config(format!("velocity cutoff must be positive, got {v_cutoff}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(PhaseGrid { nx, m, v_cutoff, dx: TWO_PI / nx as f64, dv: v_cutoff / m as f64, dt })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of velocity cells, `2M`.
    pub fn nv(&self) -> usize {
        2 * self.m
    }

    pub fn v_cutoff(&self) -> f64 {
        self.v_cutoff
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    pub fn v(&self, k: usize) -> f64 {
        (k as f64 - self.m as f64 + 0.5) * self.dv
    }

    /// Velocity at the face between cells `k` and `k + 1`.
    pub fn v_face(&self, k: usize) -> f64 {
        (k as f64 + 1.0 - self.m as f64) * self.dv
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        PhaseGrid::new(self.nx, self.m, self.v_cutoff, dt)
    }
}

/// Cell values `ρ_{jk}` stored as `values[j * 2M + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensity {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl PhaseDensity {
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.nv());
        for j in 0..grid.nx {
            for k in 0..grid.nv() {
                values.push(f(grid.x(j), grid.v(k)));
            }
        }
        PhaseDensity { grid, values, time: 0.0 }
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.nv() + k]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let nv = self.grid.nv();
        &self.values[j * nv..(j + 1) * nv]
    }

    /// `Σ ρ_{jk} δx δv`
    pub fn mass(&self) -> f64 {
        crate::stats::pairwise_sum(&self.values) * self.grid.dx * self.grid.dv
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `ρ = (2π)^{-3/2} e^{-v²/2}`, uniform in `x`.
pub fn init_maxwellian(grid: PhaseGrid) -> PhaseDensity {
    let c = TWO_PI.powf(-1.5);
    PhaseDensity::from_fn(grid, |_, v| c * (-v * v / 2.0).exp())
}

/// The exact stationary state of the discrete velocity operator for a
/// constant `b = center`, uniform in `x` and normalised to unit mass.
///
/// The zero-flux condition gives `ρ_{k+1}/ρ_k = (1/δv + w/2)/(1/δv - w/2)`
/// with `w = center - v_f`; it approaches the Gaussian as `δv → 0`.
pub fn discrete_maxwellian(grid: PhaseGrid, center: f64) -> Result<PhaseDensity> {
    let nv = grid.nv();
    let inv = 1.0 / grid.dv;
    let mut log_profile = vec![0.0; nv];
    for k in 0..nv - 1 {
        let w = center - grid.v_face(k);
        let (num, den) = (inv + w / 2.0, inv - w / 2.0);
        if num <= 0.0 || den <= 0.0 {
            return Err(Error::Config(format!("velocity cell {} too coarse for a positive stationary state", grid.dv)));
        }
        log_profile[k + 1] = log_profile[k] + (num / den).ln();
    }
    let peak = log_profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut profile: Vec<f64> = log_profile.iter().map(|l| (l - peak).exp()).collect();
    let column_mass = crate::stats::pairwise_sum(&profile) * grid.dv;
    let scale = 1.0 / (TWO_PI * column_mass);
    profile.iter_mut().for_each(|p| *p *= scale);
    let mut values = Vec::with_capacity(grid.nx * nv);
    for _ in 0..grid.nx {
        values.extend_from_slice(&profile);
    }
    Ok(PhaseDensity { grid, values, time: 0.0 })
}

/// Per-row interpolation data for a translation by `v_k τ`.
#[derive(Debug, Clone, Copy)]
struct RowShift {
    /// Integer part of the shift, reduced modulo `N`.
    cells: usize,
    /// Lagrange weights on source offsets `-1, 0, +1`, or `None` for an exact
    /// rotation.
    weights: Option<[f64; 3]>,
}

fn row_shifts(grid: &PhaseGrid, tau: f64) -> Vec<RowShift> {
    let n = grid.nx as f64;
    (0..grid.nv())
        .map(|k| {
            let m = (grid.v(k) * tau / grid.dx).rem_euclid(n);
            let r = m.round();
            let xi = -(m - r);
            let cells = (r as usize) % grid.nx;
            let weights = (xi.abs() >= 1e-12).then(|| [xi * (xi - 1.0) / 2.0, 1.0 - xi * xi, xi * (xi + 1.0) / 2.0]);
            RowShift { cells, weights }
        })
        .collect()
}

fn translate_into(src: &PhaseDensity, shifts: &[RowShift], out: &mut [f64], exec: Exec) {
    let (nx, nv) = (src.grid.nx, src.grid.nv());
    let values = &src.values;
    exec.for_each_chunk_mut(
        out,
        nv,
        || (),
        |_, j, column| {
            for (k, (dst, sh)) in column.iter_mut().zip(shifts).enumerate() {
                let base = (j + nx - sh.cells) % nx;
                *dst = match sh.weights {
                    None => values[base * nv + k],
                    Some([wm, w0, wp]) => {
                        let jm = if base == 0 { nx - 1 } else { base - 1 };
                        let jp = if base + 1 == nx { 0 } else { base + 1 };
                        wm * values[jm * nv + k] + w0 * values[base * nv + k] + wp * values[jp * nv + k]
                    }
                };
            }
        },
    );
}

/// Transports each velocity row by `v_k τ` in `x`.
///
/// Shifts that are whole cells are exact index rotations; otherwise the
/// value at the departure point is interpolated from the three nearest cells.
pub fn translate_x(rho: &PhaseDensity, tau: f64, exec: Exec) -> PhaseDensity {
    let shifts = row_shifts(&rho.grid, tau);
    let mut out = PhaseDensity { grid: rho.grid, values: vec![0.0; rho.values.len()], time: rho.time };
    translate_into(rho, &shifts, &mut out.values, exec);
    out
}

/// Crank–Nicolson matrices `(B₊, B₋)` of the velocity operator for one
/// column with local drift `b_val`; `B₊ ρⁿ⁺¹ = B₋ ρⁿ`.
pub fn build_velocity_matrices(grid: &PhaseGrid, b_val: f64, eps: Eps) -> (Tridiagonal, Tridiagonal) {
    let nv = grid.nv();
    let mut plus = Tridiagonal::zeros(nv);
    let mut minus = Tridiagonal::zeros(nv);
    fill_velocity_matrices(grid, b_val, eps.value(), &mut plus, &mut minus);
    (plus, minus)
}

fn fill_velocity_matrices(grid: &PhaseGrid, b_val: f64, eps: f64, plus: &mut Tridiagonal, minus: &mut Tridiagonal) {
    let nv = grid.nv();
    let inv = 1.0 / grid.dv;
    let c = grid.dt / (2.0 * eps * grid.dv);
    for k in 0..nv {
        // flux coefficients at the upper (k+½) and lower (k-½) faces
        let (up_self, up_next) = if k + 1 < nv {
            let w = b_val - grid.v_face(k);
            (w / 2.0 + inv, w / 2.0 - inv)
        } else {
            (0.0, 0.0)
        };
        let (lo_prev, lo_self) = if k > 0 {
            let w = b_val - grid.v_face(k - 1);
            (w / 2.0 + inv, w / 2.0 - inv)
        } else {
            (0.0, 0.0)
        };
        let d = up_self - lo_self;
        plus.lower[k] = -c * lo_prev;
        plus.diag[k] = 1.0 + c * d;
        plus.upper[k] = c * up_next;
        minus.lower[k] = c * lo_prev;
        minus.diag[k] = 1.0 - c * d;
        minus.upper[k] = -c * up_next;
    }
}

struct ColumnScratch {
    plus: Tridiagonal,
    minus: Tridiagonal,
    rhs: Vec<f64>,
    thomas: Vec<f64>,
}

impl ColumnScratch {
    fn new(nv: usize) -> Self {
        ColumnScratch {
            plus: Tridiagonal::zeros(nv),
            minus: Tridiagonal::zeros(nv),
            rhs: vec![0.0; nv],
            thomas: vec![0.0; nv],
        }
    }
}

fn velocity_step_in_place<F: FlowField<1> + ?Sized>(
    values: &mut [f64],
    grid: &PhaseGrid,
    field: &F,
    eps: f64,
    t_mid: f64,
    exec: Exec,
) -> Result<()> {
    let nv = grid.nv();
    let failure = std::sync::Mutex::new(None);
    exec.for_each_chunk_mut(
        values,
        nv,
        || ColumnScratch::new(nv),
        |ws, j, column| {
            let b = field.velocity(&[grid.x(j)], t_mid)[0];
            fill_velocity_matrices(grid, b, eps, &mut ws.plus, &mut ws.minus);
            ws.minus.mul_open(column, &mut ws.rhs);
            match solve_tridiagonal(&ws.plus, &mut ws.rhs, &mut ws.thomas) {
                Ok(()) => column.copy_from_slice(&ws.rhs),
                Err(e) => {
                    failure
                        .lock()
                        .unwrap()
                        .get_or_insert(Error::Numerical(format!("velocity solve failed in column {j} (b = {b}): {e}")));
                }
            }
        },
    );
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One Crank–Nicolson step of the velocity operator with `b(x_j, t_mid)`.
/// The density's time is not advanced.
pub fn velocity_step<F: FlowField<1> + ?Sized>(
    rho: &PhaseDensity,
    field: &F,
    eps: Eps,
    t_mid: f64,
    exec: Exec,
) -> Result<PhaseDensity> {
    let mut out = rho.clone();
    velocity_step_in_place(&mut out.values, &rho.grid, field, eps.value(), t_mid, exec)?;
    Ok(out)
}

/// Reusable Strang-splitting stepper.
pub struct KineticStepper {
    grid: PhaseGrid,
    eps: Eps,
    exec: Exec,
    shifts: Vec<RowShift>,
    buf: Vec<f64>,
}

impl KineticStepper {
    pub fn new(grid: PhaseGrid, eps: Eps, exec: Exec) -> Self {
        KineticStepper { shifts: row_shifts(&grid, grid.dt / 2.0), grid, eps, exec, buf: Vec::new() }
    }

    /// `ρ ← T(δt/2) V(t + δt/2) T(δt/2) ρ`
    pub fn step<F: FlowField<1> + ?Sized>(&mut self, rho: &mut PhaseDensity, field: &F) -> Result<()> {
        if rho.grid != self.grid {
            return Err(Error::Usage("density grid differs from the stepper's".into()));
        }
        let dt = self.grid.dt;
        self.buf.resize(rho.values.len(), 0.0);
        translate_into(rho, &self.shifts, &mut self.buf, self.exec);
        velocity_step_in_place(&mut self.buf, &self.grid, field, self.eps.value(), rho.time + dt / 2.0, self.exec)?;
        std::mem::swap(&mut rho.values, &mut self.buf);
        translate_into(rho, &self.shifts, &mut self.buf, self.exec);
        std::mem::swap(&mut rho.values, &mut self.buf);
        rho.time += dt;
        Ok(())
    }
}

/// One Strang step of length `rho.grid.dt`.
pub fn strang_step<F: FlowField<1> + ?Sized>(
    rho: &PhaseDensity,
    field: &F,
    eps: Eps,
    exec: Exec,
) -> Result<PhaseDensity> {
    let mut out = rho.clone();
    KineticStepper::new(rho.grid, eps, exec).step(&mut out, field)?;
    Ok(out)
}

/// Advances `rho0` by `t_final`, shortening the grid's `dt` so that an
/// integer number of steps lands on `t_final`.
pub fn run_to_time<F: FlowField<1> + ?Sized>(
    rho0: &PhaseDensity,
    field: &F,
    eps: Eps,
    t_final: f64,
    exec: Exec,
) -> Result<PhaseDensity> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::Config(format!("final time must be >= 0, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let n = ((t_final / rho0.grid.dt) - 1e-9).ceil().max(1.0) as usize;
    let grid = rho0.grid.with_dt(t_final / n as f64)?;
    let mut rho = PhaseDensity { grid, values: rho0.values.clone(), time: rho0.time };
    let mut stepper = KineticStepper::new(grid, eps, exec);
    for _ in 0..n {
        stepper.step(&mut rho, field)?;
    }
    rho.grid = rho0.grid;
    Ok(rho)
}

/// Spatial density `g_j = Σ_k ρ_{jk} δv`.
pub fn marginal_x(rho: &PhaseDensity) -> Result<DensityLine> {
    let grid = Grid1D::new(rho.grid.nx)?;
    let nv = rho.grid.nv();
    let values = rho.values.chunks(nv).map(|c| crate::stats::pairwise_sum(c) * rho.grid.dv).collect();
    Ok(DensityLine { grid, values, time: rho.time })
}
