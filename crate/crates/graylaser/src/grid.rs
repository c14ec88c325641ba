//! Uniform periodic 1D grids, FFT-based spectral operators and quadrature.
//!
//! Everything downstream (transfer maps, the three-level integrator, the
//! split-step NLSE solver) works on [`ComplexField`] values living on a
//! power-of-two [`Grid1D`]. All operators assume periodic boundary
//! conditions; domains are chosen large enough that fields are numerically
//! zero at the edges.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Uniform periodic grid with `n_points` samples covering `[origin, origin + length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_points: usize,
    length: f64,
    origin: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, length: f64, origin: f64) -> Result<Self> {
        if n_points == 0 || !n_points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two, got {n_points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid1D { n_points, length, origin })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.coord(j)).collect()
    }

    /// Standard periodic wavenumber ladder: 2π/L · (0, 1, …, n/2−1, −n/2, …, −1).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * dk
            })
            .collect()
    }
}

/// Complex amplitude samples on a [`Grid1D`]; the common currency of probe
/// pulses and matter waves.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_points()] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points()).map(|j| f(grid.coord(j))).collect();
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Σ|ψ|²·dx.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Forward FFT in place (unnormalized).
pub fn fft_forward(values: &mut [Complex64]) {
    let fft = FftPlanner::new().plan_fft_forward(values.len());
    fft.process(values);
}

/// Inverse FFT in place, normalized by 1/n so it exactly inverts [`fft_forward`].
pub fn fft_inverse(values: &mut [Complex64]) {
    let n = values.len();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    fft.process(values);
    let scale = 1.0 / n as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
}

/// Spectral derivative of order 1 or 2 on the periodic grid: forward
/// transform, multiply by (ik)^order, inverse transform. The Nyquist mode is
/// zeroed for odd orders.
pub fn spectral_derivative(f: &ComplexField, order: u32) -> Result<ComplexField> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    let grid = f.grid();
    let n = grid.n_points();
    let ks = grid.wavenumbers();
    let mut hat = f.values().to_vec();
    fft_forward(&mut hat);
    for (j, v) in hat.iter_mut().enumerate() {
        if order == 1 {
            if j == n / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, ks[j]);
            }
        } else {
            *v *= -ks[j] * ks[j];
        }
    }
    fft_inverse(&mut hat);
    ComplexField::new(grid, hat)
}

/// Periodic trapezoidal quadrature of a complex field: Σψ·dx.
pub fn quadrature_complex(f: &ComplexField) -> Complex64 {
    f.values().iter().sum::<Complex64>() * f.grid().spacing()
}

/// Periodic trapezoidal quadrature of real samples: Σf·dx.
pub fn quadrature(samples: &[f64], spacing: f64) -> f64 {
    samples.iter().sum::<f64>() * spacing
}

/// Exact band-limited translation: returns g(x) = f(x − delta) via a spectral
/// phase ramp.
pub fn spectral_shift(f: &ComplexField, delta: f64) -> ComplexField {
    let grid = f.grid();
    let ks = grid.wavenumbers();
    let mut hat = f.values().to_vec();
    fft_forward(&mut hat);
    for (j, v) in hat.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -ks[j] * delta);
    }
    fft_inverse(&mut hat);
    ComplexField { grid, values: hat }
}

/// Composite Simpson rule for ∫_a^b g(x) dx with `n` subintervals (rounded up
/// to even). Used for the cumulative transfer-stage integrals.
pub fn simpson(a: f64, b: f64, n: usize, g: impl Fn(f64) -> f64) -> f64 {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + j as f64 * h);
    }
    acc * h / 3.0
}
