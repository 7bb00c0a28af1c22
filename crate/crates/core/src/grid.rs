//! Uniform periodic grid and the unitary discrete Fourier pair used by the
//! kinetic substep.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::physics::WaveField;

/// Uniform sampling of `[x_min, x_max)` with periodic wrap-around.
///
/// Wavenumbers are stored in the usual DFT order: `0, 1, …, n/2-1, -n/2, …, -1`
/// multiples of `2π / (x_max - x_min)`.
#[derive(Clone)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("n", &self.n())
            .field("dx", &self.dx)
            .finish()
    }
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Grid(format!(
                "extent [{x_min}, {x_max}] must be finite and non-empty"
            )));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("n = {n} is not a power of two >= 2")));
        }
        let length = x_max - x_min;
        let dx = length / n as f64;
        let x = (0..n).map(|j| x_min + j as f64 * dx).collect();
        let dk = 2.0 * PI / length;
        let k = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            x_min,
            x_max,
            dx,
            x,
            k,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the first sample with `x_j >= x`.
    pub fn first_index_at_or_after(&self, x: f64) -> usize {
        self.x.partition_point(|&xj| xj < x)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n(),
                found: len,
            })
        }
    }

    /// Unitary forward transform: `Σ|ψ̂|² = Σ|ψ|²`.
    pub fn to_spectrum(&self, field: &WaveField) -> Result<Vec<Complex64>> {
        self.check_len(field.psi.len())?;
        let mut buf = field.psi.clone();
        self.forward.process(&mut buf);
        let scale = 1.0 / (self.n() as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(buf)
    }

    /// Inverse of [`to_spectrum`](Self::to_spectrum); the result carries time `t`.
    pub fn from_spectrum(&self, spectrum: &[Complex64], t: f64) -> Result<WaveField> {
        self.check_len(spectrum.len())?;
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.n() as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(WaveField { psi: buf, t })
    }

    /// Unnormalized in-place transforms for the propagator's hot loop.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }
}
