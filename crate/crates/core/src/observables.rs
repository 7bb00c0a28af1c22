//! Diagnostics computed from fields and trajectories.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::physics::WaveField;
use crate::propagator::{ComSample, Side, Snapshot, StopReason};

/// Region-norm floor below which a center of mass is meaningless.
pub const COM_NORM_FLOOR: f64 = 1e-6;
/// Minimum region norm for a sech fit.
pub const FIT_NORM_FLOOR: f64 = 0.1;
/// Relative L2 residual separating a sech-shaped packet from a dispersing one.
pub const SOLITONIC_RESIDUAL: f64 = 0.05;

pub(crate) fn norm_of(psi: &[Complex64], dx: f64) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx
}

/// `Σ |ψ_j|² dx`, the surviving fraction once the initial state has unit norm.
pub fn norm(grid: &SpatialGrid, field: &WaveField) -> f64 {
    norm_of(&field.psi, grid.dx())
}

/// Index range of samples with `lo <= x_j < hi` (or `<= hi` when `hi` is
/// the right domain edge).
fn index_range(grid: &SpatialGrid, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let a = grid.first_index_at_or_after(lo);
    let b = if hi >= grid.x_max() {
        grid.n()
    } else {
        grid.first_index_at_or_after(hi)
    };
    a..b.max(a)
}

/// `(norm, center of mass)` of `psi` over `[lo, hi)`; the COM is NaN for an
/// empty region.
pub(crate) fn region_moments(grid: &SpatialGrid, psi: &[Complex64], lo: f64, hi: f64) -> (f64, f64) {
    let x = grid.positions();
    let (mut m0, mut m1) = (0.0, 0.0);
    for j in index_range(grid, lo, hi) {
        let rho = psi[j].norm_sqr();
        m0 += rho;
        m1 += rho * x[j];
    }
    (m0 * grid.dx(), m1 / m0)
}

pub(crate) fn com_unchecked(grid: &SpatialGrid, psi: &[Complex64], lo: f64, hi: f64) -> Option<f64> {
    let (n, c) = region_moments(grid, psi, lo, hi);
    (n > 0.0).then_some(c)
}

fn check_inside(grid: &SpatialGrid, x: f64) -> Result<()> {
    if grid.contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            x,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
        })
    }
}

/// Norm on the side of `boundary` given by `side`; a sample belongs to the
/// right side iff `x_j >= boundary`.
pub fn fraction_on_side(grid: &SpatialGrid, field: &WaveField, boundary: f64, side: Side) -> Result<f64> {
    grid.check_len(field.psi.len())?;
    check_inside(grid, boundary)?;
    let split = grid.first_index_at_or_after(boundary);
    let slice = match side {
        Side::Right => &field.psi[split..],
        Side::Left => &field.psi[..split],
    };
    Ok(norm_of(slice, grid.dx()))
}

/// `∫_{x_b}^{∞} |ψ|² dx` on the grid.
pub fn reflected_fraction(grid: &SpatialGrid, field: &WaveField, x_b: f64) -> Result<f64> {
    fraction_on_side(grid, field, x_b, Side::Right)
}

/// Density-weighted mean position over `region`.
pub fn center_of_mass(grid: &SpatialGrid, field: &WaveField, region: (f64, f64)) -> Result<f64> {
    grid.check_len(field.psi.len())?;
    let (lo, hi) = region;
    let (n, c) = region_moments(grid, &field.psi, lo, hi);
    if n.is_nan() || n < COM_NORM_FLOOR {
        return Err(Error::EmptyRegion {
            lo,
            hi,
            norm: n,
            floor: COM_NORM_FLOOR,
        });
    }
    Ok(c)
}

/// Least-squares slope of `(t, x)` samples with `t` inside `window`.
pub fn com_velocity(samples: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, x)| t >= window.0 && t <= window.1 && x.is_finite())
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let x_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, x) in &pts {
        sxy += (t - t_mean) * (x - x_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(sxy / sxx)
}

/// Incoming-side COM samples as `(t, x)` pairs.
pub fn incoming_com_series(com: &[ComSample]) -> Vec<(f64, f64)> {
    com.iter().filter_map(|s| s.incoming.map(|c| (s.t, c))).collect()
}

/// Parameters of `a · sech((x - c) / b)` fitted to `|ψ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechFit {
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// `‖|ψ| - fit‖ / ‖|ψ|‖` over the fitted region.
    pub residual: f64,
    pub converged: bool,
}

impl SechFit {
    pub fn is_solitonic(&self) -> bool {
        self.converged && self.residual < SOLITONIC_RESIDUAL
    }
}

/// Levenberg–Marquardt fit of `|ψ|` to a sech profile over `region`.
///
/// Non-convergence is reported through [`SechFit::converged`], not as an error.
pub fn fit_sech(grid: &SpatialGrid, field: &WaveField, region: (f64, f64)) -> Result<SechFit> {
    grid.check_len(field.psi.len())?;
    let (lo, hi) = region;
    let range = index_range(grid, lo, hi);
    let xs = &grid.positions()[range.clone()];
    let ys: Vec<f64> = field.psi[range].iter().map(|c| c.norm()).collect();
    let region_norm = ys.iter().map(|y| y * y).sum::<f64>() * grid.dx();
    if region_norm.is_nan() || region_norm < FIT_NORM_FLOOR {
        return Err(Error::EmptyRegion {
            lo,
            hi,
            norm: region_norm,
            floor: FIT_NORM_FLOOR,
        });
    }
    Ok(levenberg_marquardt(xs, &ys, grid.dx(), region_norm))
}

fn sse(xs: &[f64], ys: &[f64], p: [f64; 3]) -> f64 {
    let [a, b, c] = p;
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - a / ((x - c) / b).cosh();
            r * r
        })
        .sum()
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], dx: f64, region_norm: f64) -> SechFit {
    let (j_max, &a0) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty region");
    // ∫ a² sech²(x/b) dx = 2a²b
    let b0 = (region_norm / (2.0 * a0 * a0)).max(2.0 * dx);
    let mut p = [a0, b0, xs[j_max]];
    let mut cost = sse(xs, ys, p);
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..500 {
        let [a, b, c] = p;
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let u = (x - c) / b;
            let s = 1.0 / u.cosh();
            let th = u.tanh();
            let r = y - a * s;
            let grad = [s, a * s * th * u / b, a * s * th / b];
            for i in 0..3 {
                jtr[i] += grad[i] * r;
                for k in 0..3 {
                    jtj[i][k] += grad[i] * grad[k];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut m = jtj;
            for (i, row) in m.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(delta) = solve3(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            if trial[1] <= 0.0 || !trial.iter().all(|v| v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let trial_cost = sse(xs, ys, trial);
            if trial_cost <= cost {
                let step = (0..3)
                    .map(|i| (delta[i] / p[i].abs().max(1e-12)).abs())
                    .fold(0.0, f64::max);
                let drop = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if step < 1e-12 || drop < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left: we sit at a local minimum.
            converged = lambda > 1e6;
            break;
        }
        if converged {
            break;
        }
    }
    let norm_y = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
    SechFit {
        amplitude: p[0],
        width: p[1],
        center: p[2],
        residual: cost.sqrt() / norm_y,
        converged,
    }
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

/// Everything a scenario run reports.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    /// Norm left on the incoming side of the beam at `t_final_used`.
    pub p_refl: f64,
    /// Norm on the far side of the beam at `t_final_used`.
    pub transmitted: f64,
    pub surviving_series: Vec<(f64, f64)>,
    pub com_series: Vec<ComSample>,
    pub snapshots: Vec<Snapshot>,
    pub closest_encounter: Option<Snapshot>,
    pub t_final_used: f64,
    pub stop: StopReason,
    /// Reflection boundary used for `p_refl`.
    pub boundary: f64,
    pub fitted_out_velocity: Option<f64>,
    pub fitted_sech: Option<SechFit>,
    pub final_field: WaveField,
}

impl RunSummary {
    pub fn final_surviving(&self) -> f64 {
        self.surviving_series.last().map_or(f64::NAN, |p| p.1)
    }
}
