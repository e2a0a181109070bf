use std::f64::consts::PI;

use super::summation::pairwise_sum;
use crate::addiff::DensityField2D;
use crate::{Error, Exec, Result, TWO_PI};

/// Kernel width per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// `h = 1.06 σ̂ m^{-1/5}` with `σ̂` the circular standard deviation,
    /// capped at that of the uniform law, `π/√3`.
    Silverman,
    Fixed(f64),
}

/// A kernel density estimate on the cell centres of an `n × n` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Density2DEstimate {
    pub density: DensityField2D,
    pub bandwidth: [f64; 2],
    pub n_samples: usize,
}

/// Circular standard deviation `√(-2 ln R̄)` of angles.
fn circular_std(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().count() as f64;
    let c: Vec<f64> = xs.clone().map(f64::cos).collect();
    let s: Vec<f64> = xs.map(f64::sin).collect();
    let r = (pairwise_sum(&c).powi(2) + pairwise_sum(&s).powi(2)).sqrt() / m;
    if r <= 0.0 {
        return f64::INFINITY;
    }
    (-2.0 * r.ln()).max(0.0).sqrt()
}

fn silverman(xs: impl Iterator<Item = f64> + Clone, m: usize) -> f64 {
    let sigma = circular_std(xs).min(PI / 3f64.sqrt());
    1.06 * sigma * (m as f64).powf(-0.2)
}

/// Periodic Gaussian weights of one sample on the cell centres of one axis,
/// as `(first cell, weights)` with indices taken modulo `n`.
fn axis_weights(s: f64, h: f64, n: usize, out: &mut Vec<f64>) -> usize {
    let dx = TWO_PI / n as f64;
    let norm = 1.0 / (h * (2.0 * PI).sqrt());
    let reach = 8.0 * h;
    out.clear();
    if 2.0 * reach >= TWO_PI {
        // whole circle, nearest three images
        for i in 0..n {
            let d = (i as f64 + 0.5) * dx - s;
            let w: f64 = [-TWO_PI, 0.0, TWO_PI]
                .iter()
                .map(|img| {
                    let z = (d + img) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            out.push(norm * w);
        }
        return 0;
    }
    // cells whose centre lies within `reach` of `s`, unwrapped around `s`
    let lo = ((s - reach) / dx - 0.5).floor() as i64;
    let hi = ((s + reach) / dx - 0.5).ceil() as i64;
    for i in lo..=hi {
        let z = ((i as f64 + 0.5) * dx - s) / h;
        out.push(norm * (-0.5 * z * z).exp());
    }
    lo.rem_euclid(n as i64) as usize
}

/// Gaussian product-kernel density estimate of samples on the torus.
///
/// Samples are processed in fixed-size chunks whose partial grids are added
/// in chunk order, so the estimate does not depend on the thread count.
pub fn kde_2d(samples: &[[f64; 2]], grid_n: usize, bandwidth: Bandwidth, exec: Exec) -> Result<Density2DEstimate> {
    if samples.is_empty() {
        return Err(Error::Usage("density estimate needs at least one sample".into()));
    }
    if let Some(p) = samples.iter().find(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Domain(format!("non-finite sample {p:?}")));
    }
    let m = samples.len();
    let h = match bandwidth {
        Bandwidth::Silverman => {
            [silverman(samples.iter().map(|p| p[0]), m), silverman(samples.iter().map(|p| p[1]), m)]
        }
        Bandwidth::Fixed(h) => [h, h],
    };
    if !h.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::Numerical(format!("degenerate bandwidth {h:?}")));
    }
    let mut density = DensityField2D::uniform(grid_n, 0.0)?;
    let n = grid_n;
    let chunk = (m.div_ceil(64)).max(4096);
    let n_chunks = m.div_ceil(chunk);
    let partials = exec.map_range(n_chunks, |c| {
        let mut grid = vec![0.0; n * n];
        let (mut wx, mut wy) = (Vec::new(), Vec::new());
        for p in &samples[c * chunk..((c + 1) * chunk).min(m)] {
            let ix = axis_weights(p[0], h[0], n, &mut wx);
            let iy = axis_weights(p[1], h[1], n, &mut wy);
            for (a, &kx) in wx.iter().enumerate() {
                let row = &mut grid[((ix + a) % n) * n..][..n];
                let mut j = iy;
                for &ky in &wy {
                    row[j] += kx * ky;
                    j += 1;
                    if j == n {
                        j = 0;
                    }
                }
            }
        }
        grid
    });
    for part in &partials {
        for (d, v) in density.values.iter_mut().zip(part) {
            *d += v;
        }
    }
    let inv_m = 1.0 / m as f64;
    density.values.iter_mut().for_each(|v| *v *= inv_m);
    Ok(Density2DEstimate { density, bandwidth: h, n_samples: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    LInf,
}

/// `‖a - b‖` by grid quadrature (`L2`) or as the largest cell difference.
pub fn density_distance(a: &DensityField2D, b: &DensityField2D, norm: Norm) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::Usage(format!("density grids differ: {} vs {}", a.n, b.n)));
    }
    let diffs = a.values.iter().zip(&b.values).map(|(x, y)| x - y);
    Ok(match norm {
        Norm::LInf => diffs.map(f64::abs).fold(0.0, f64::max),
        Norm::L2 => {
            let sq: Vec<f64> = diffs.map(|d| d * d).collect();
            let dx = a.dx();
            (pairwise_sum(&sq) * dx * dx).sqrt()
        }
    })
}
