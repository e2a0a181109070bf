//! Implicit upwind solver for `∂ₜu + ∇·(F u) = ε Δu` on the torus.
//!
//! In 1D the flux through the face between cells `i-1` and `i` is
//!
//! ```text
//! Φᵢ = a⁺ᵢ u_{i-1} - a⁻ᵢ uᵢ - ε (uᵢ - u_{i-1}) / δx,    a± = max(0, ±a)
//! ```
//!
//! with the drift `a` evaluated directly at the face at the half-step time.
//! Crank–Nicolson in time gives a periodic tridiagonal system per step, solved
//! by Sherman–Morrison around the Thomas algorithm. In 2D the operator is
//! split by dimension (x₁ half step, x₂ full step, x₁ half step).

use crate::linalg::{solve_cyclic, CyclicScratch, Tridiagonal};
use crate::sde::Drift;
use crate::{Eps, Error, Exec, FlowField, Result, TWO_PI};

/// Uniform periodic grid on `[0, 2π)` with cell centres at `(j + ½)δx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("grid needs at least 4 cells, got {n}")));
        }
        Ok(Grid1D { n, dx: TWO_PI / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Left face of cell `i`.
    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
}

/// Cell averages of a density on a 1D periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityLine {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityLine {
    pub fn uniform(grid: Grid1D, value: f64) -> Self {
        DensityLine { grid, values: vec![value; grid.n], time: 0.0 }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|j| f(grid.center(j))).collect();
        DensityLine { grid, values, time: 0.0 }
    }

    pub fn mass(&self) -> f64 {
        crate::stats::pairwise_sum(&self.values) * self.grid.dx
    }

    /// Exact cell averages on a grid of `n` cells, which must divide the
    /// current cell count.
    pub fn coarsen(&self, n: usize) -> Result<DensityLine> {
        if n == 0 || self.grid.n % n != 0 {
            return Err(Error::Usage(format!("cannot coarsen {} cells to {n}", self.grid.n)));
        }
        let grid = Grid1D::new(n)?;
        let r = self.grid.n / n;
        let values = self.values.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect();
        Ok(DensityLine { grid, values, time: self.time })
    }
}

/// Cell averages on an `n × n` periodic grid; `values[i * n + j]` is the cell
/// at `x₁ = (i + ½)δx`, `x₂ = (j + ½)δx`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField2D {
    pub n: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityField2D {
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Grid1D::new(n)?;
        Ok(DensityField2D { n, values: vec![value; n * n], time: 0.0 })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let g = Grid1D::new(n)?;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(g.center(i), g.center(j)));
            }
        }
        Ok(DensityField2D { n, values, time: 0.0 })
    }

    pub fn dx(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn mass(&self) -> f64 {
        let dx = self.dx();
        crate::stats::pairwise_sum(&self.values) * dx * dx
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Upwind split `a = a⁺ - a⁻` of the drift at the `N + 1` faces of a line;
/// the last face coincides with the first.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSpeeds {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl FaceSpeeds {
    /// Evaluates `a` at faces `0..n`; face `n` copies face `0`.
    pub fn from_fn(grid: &Grid1D, a: impl Fn(f64) -> f64) -> Self {
        let mut plus = Vec::with_capacity(grid.n + 1);
        let mut minus = Vec::with_capacity(grid.n + 1);
        for i in 0..grid.n {
            let v = a(grid.face(i));
            plus.push(v.max(0.0));
            minus.push((-v).max(0.0));
        }
        plus.push(plus[0]);
        minus.push(minus[0]);
        FaceSpeeds { plus, minus }
    }

    pub fn speed(&self, i: usize) -> f64 {
        self.plus[i] - self.minus[i]
    }
}

/// Face speeds of the corrected (or naive) drift of a 1D field at time `t`.
pub fn build_face_speeds<F: FlowField<1> + ?Sized>(
    field: &F,
    eps: Eps,
    grid: &Grid1D,
    t: f64,
    drift: Drift,
) -> FaceSpeeds {
    let e = eps.value();
    FaceSpeeds::from_fn(grid, |x| match drift {
        Drift::Corrected => field.corrected_drift_at(&[x], t, e)[0],
        Drift::Naive => field.velocity(&[x], t)[0],
    })
}

/// Time step, diffusivity and drift choice shared by the 1D and 2D solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvDiffSettings {
    pub eps: Eps,
    pub dt: f64,
    pub drift: Drift,
}

impl AdvDiffSettings {
    pub fn new(eps: Eps, dt: f64, drift: Drift) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(AdvDiffSettings { eps, dt, drift })
    }
}

/// Discrete generator `L` of one line: `du/dt = L u`.
pub fn line_generator(faces: &FaceSpeeds, eps: f64, dx: f64) -> Tridiagonal {
    let n = faces.plus.len() - 1;
    let k = eps / dx;
    let mut l = Tridiagonal::zeros(n);
    for j in 0..n {
        l.lower[j] = (faces.plus[j] + k) / dx;
        l.diag[j] = -(faces.plus[j + 1] + faces.minus[j] + 2.0 * k) / dx;
        l.upper[j] = (faces.minus[j + 1] + k) / dx;
    }
    l
}

/// Crank–Nicolson pair `(I - h/2 L, I + h/2 L)` for a step of length `h`.
#[derive(Debug, Clone)]
struct LineOperator {
    implicit: Tridiagonal,
    explicit: Tridiagonal,
}

impl LineOperator {
    fn new(faces: &FaceSpeeds, eps: f64, dx: f64, h: f64) -> Self {
        let l = line_generator(faces, eps, dx);
        let scale = |s: f64| Tridiagonal {
            lower: l.lower.iter().map(|v| s * v).collect(),
            diag: l.diag.iter().map(|v| 1.0 + s * v).collect(),
            upper: l.upper.iter().map(|v| s * v).collect(),
        };
        LineOperator { implicit: scale(-h / 2.0), explicit: scale(h / 2.0) }
    }

    fn apply(&self, u: &mut [f64], ws: &mut LineScratch) -> Result<()> {
        ws.rhs.resize(u.len(), 0.0);
        self.explicit.mul_cyclic(u, &mut ws.rhs);
        solve_cyclic(&self.implicit, &mut ws.rhs, &mut ws.cyclic)?;
        u.copy_from_slice(&ws.rhs);
        Ok(())
    }
}

#[derive(Default)]
struct LineScratch {
    rhs: Vec<f64>,
    cyclic: CyclicScratch,
}

/// One Crank–Nicolson step of the 1D equation, drift at `t + dt/2`.
pub fn step_1d<F: FlowField<1> + ?Sized>(
    u: &DensityLine,
    field: &F,
    settings: &AdvDiffSettings,
) -> Result<DensityLine> {
    let mut out = u.clone();
    Stepper1D::new(settings, u.grid).step(&mut out, field)?;
    Ok(out)
}

/// Reuses the line operator across steps for autonomous fields.
struct Stepper1D {
    settings: AdvDiffSettings,
    grid: Grid1D,
    cached: Option<LineOperator>,
    ws: LineScratch,
}

impl Stepper1D {
    fn new(settings: &AdvDiffSettings, grid: Grid1D) -> Self {
        Stepper1D { settings: *settings, grid, cached: None, ws: LineScratch::default() }
    }

    fn step<F: FlowField<1> + ?Sized>(&mut self, u: &mut DensityLine, field: &F) -> Result<()> {
        let s = self.settings;
        let build = || {
            let faces = build_face_speeds(field, s.eps, &self.grid, u.time + s.dt / 2.0, s.drift);
            LineOperator::new(&faces, s.eps.value(), self.grid.dx, s.dt)
        };
        if field.is_autonomous() {
            if self.cached.is_none() {
                self.cached = Some(build());
            }
            self.cached.as_ref().unwrap().apply(&mut u.values, &mut self.ws)?;
        } else {
            build().apply(&mut u.values, &mut self.ws)?;
        }
        u.time += s.dt;
        Ok(())
    }
}

/// Step count and effective step so that an integer number of steps reaches
/// `t_final` exactly.
fn time_grid(dt: f64, t_final: f64) -> Result<(usize, f64)> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::Config(format!("final time must be >= 0, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok((0, dt));
    }
    let n = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t_final / n as f64))
}

fn snapshot_steps(times: &[f64], dt: f64, n_steps: usize) -> Vec<usize> {
    times.iter().map(|t| ((t / dt).round().max(0.0) as usize).min(n_steps)).collect()
}

/// Advances `u0` to `t_final` (relative to `u0.time`), returning the final
/// density and copies at the steps nearest to each of `snapshot_times`.
pub fn run_to_time_1d<F: FlowField<1> + ?Sized>(
    u0: &DensityLine,
    field: &F,
    settings: &AdvDiffSettings,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<(DensityLine, Vec<DensityLine>)> {
    let (n_steps, dt) = time_grid(settings.dt, t_final)?;
    let settings = AdvDiffSettings { dt, ..*settings };
    let marks = snapshot_steps(snapshot_times, dt, n_steps);
    let mut stepper = Stepper1D::new(&settings, u0.grid);
    let mut u = u0.clone();
    let mut snaps = vec![None; marks.len()];
    for n in 0..=n_steps {
        for (slot, &m) in snaps.iter_mut().zip(&marks) {
            if m == n {
                *slot = Some(u.clone());
            }
        }
        if n < n_steps {
            stepper.step(&mut u, field)?;
        }
    }
    Ok((u, snaps.into_iter().map(Option::unwrap).collect()))
}

/// Operators for the lines of one direction.
type LineSet = Vec<LineOperator>;

/// Builds the operators of every line in direction `axis` (0 for x₁, 1 for
/// x₂) for a sub-step of length `h` with the drift at time `t`.
fn build_lines<F: FlowField<2> + ?Sized>(
    field: &F,
    settings: &AdvDiffSettings,
    grid: &Grid1D,
    axis: usize,
    t: f64,
    h: f64,
    exec: Exec,
) -> LineSet {
    let e = settings.eps.value();
    exec.map_range(grid.n, |line| {
        let across = grid.center(line);
        let faces = FaceSpeeds::from_fn(grid, |along| {
            let x = if axis == 0 { [along, across] } else { [across, along] };
            let a = match settings.drift {
                Drift::Corrected => field.corrected_drift_at(&x, t, e),
                Drift::Naive => field.velocity(&x, t),
            };
            a[axis]
        });
        LineOperator::new(&faces, e, grid.dx, h)
    })
}

/// Solves along contiguous lines (x₂ direction) of `values`.
fn sweep_contiguous(values: &mut [f64], n: usize, ops: &LineSet, exec: Exec) -> Result<()> {
    let failure = std::sync::Mutex::new(None);
    exec.for_each_chunk_mut(values, n, LineScratch::default, |ws, line, u| {
        if let Err(e) = ops[line].apply(u, ws) {
            failure.lock().unwrap().get_or_insert(e);
        }
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn transpose(src: &[f64], dst: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Solves along the x₁ direction through a transposed copy.
fn sweep_strided(values: &mut [f64], buf: &mut Vec<f64>, n: usize, ops: &LineSet, exec: Exec) -> Result<()> {
    buf.resize(n * n, 0.0);
    transpose(values, buf, n);
    sweep_contiguous(buf, n, ops, exec)?;
    transpose(buf, values, n);
    Ok(())
}

/// 2D dimensional-splitting stepper with cached operators for autonomous
/// fields.
pub struct Stepper2D {
    settings: AdvDiffSettings,
    grid: Grid1D,
    exec: Exec,
    cached: Option<(LineSet, LineSet)>,
    buf: Vec<f64>,
}

impl Stepper2D {
    pub fn new(settings: &AdvDiffSettings, n: usize, exec: Exec) -> Result<Self> {
        Ok(Stepper2D { settings: *settings, grid: Grid1D::new(n)?, exec, cached: None, buf: Vec::new() })
    }

    /// x₁ half step, x₂ full step, x₁ half step.
    pub fn step<F: FlowField<2> + ?Sized>(&mut self, u: &mut DensityField2D, field: &F) -> Result<()> {
        if u.n != self.grid.n {
            return Err(Error::Usage(format!("density has {} cells per axis, stepper {}", u.n, self.grid.n)));
        }
        let (s, g, exec, n) = (self.settings, self.grid, self.exec, self.grid.n);
        let t = u.time;
        let dt = s.dt;
        if field.is_autonomous() {
            if self.cached.is_none() {
                self.cached = Some((
                    build_lines(field, &s, &g, 0, t, dt / 2.0, exec),
                    build_lines(field, &s, &g, 1, t, dt, exec),
                ));
            }
            let (x1, x2) = self.cached.as_ref().unwrap();
            sweep_strided(&mut u.values, &mut self.buf, n, x1, exec)?;
            sweep_contiguous(&mut u.values, n, x2, exec)?;
            sweep_strided(&mut u.values, &mut self.buf, n, x1, exec)?;
        } else {
            let first = build_lines(field, &s, &g, 0, t + dt / 4.0, dt / 2.0, exec);
            sweep_strided(&mut u.values, &mut self.buf, n, &first, exec)?;
            let mid = build_lines(field, &s, &g, 1, t + dt / 2.0, dt, exec);
            sweep_contiguous(&mut u.values, n, &mid, exec)?;
            let last = build_lines(field, &s, &g, 0, t + 3.0 * dt / 4.0, dt / 2.0, exec);
            sweep_strided(&mut u.values, &mut self.buf, n, &last, exec)?;
        }
        u.time += dt;
        Ok(())
    }
}

/// One split step of the 2D equation.
pub fn step_2d_strang<F: FlowField<2> + ?Sized>(
    u: &DensityField2D,
    field: &F,
    settings: &AdvDiffSettings,
    exec: Exec,
) -> Result<DensityField2D> {
    let mut out = u.clone();
    Stepper2D::new(settings, u.n, exec)?.step(&mut out, field)?;
    Ok(out)
}

/// 2D counterpart of [`run_to_time_1d`].
pub fn run_to_time_2d<F: FlowField<2> + ?Sized>(
    u0: &DensityField2D,
    field: &F,
    settings: &AdvDiffSettings,
    exec: Exec,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<(DensityField2D, Vec<DensityField2D>)> {
    let (n_steps, dt) = time_grid(settings.dt, t_final)?;
    let settings = AdvDiffSettings { dt, ..*settings };
    let marks = snapshot_steps(snapshot_times, dt, n_steps);
    let mut stepper = Stepper2D::new(&settings, u0.n, exec)?;
    let mut u = u0.clone();
    let mut snaps = vec![None; marks.len()];
    for n in 0..=n_steps {
        for (slot, &m) in snaps.iter_mut().zip(&marks) {
            if m == n {
                *slot = Some(u.clone());
            }
        }
        if n < n_steps {
            stepper.step(&mut u, field)?;
        }
    }
    Ok((u, snaps.into_iter().map(Option::unwrap).collect()))
}
