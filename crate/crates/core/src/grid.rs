//! Periodic grids on `[-L, L)^n` and the continuum-normalized Fourier transform.
//!
//! A [`Field`] holds samples `f(x_m)` at `x_m = -L + m h`, `h = 2L / N`. Its
//! [`SpectralField`] holds `coeff_k = h^n * sum_m f(x_m) exp(-2 pi i <x_m, xi_k>)`
//! at the frequencies `xi_k = k / (2L)`, `k in [-N/2, N/2)`, which is the Riemann
//! sum of `f^(xi) = int f(x) exp(-2 pi i <x, xi>) dx`. With this scaling the
//! grid Plancherel identity reads
//!
//! ```text
//! h^n sum |f|^2 = (2L)^-n sum |coeff|^2
//! ```
//!
//! Coefficients are stored in FFT order (non-negative wavenumbers first).

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Shape of a periodic grid on `[-L, L)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridShape")]
pub struct GridSpec {
    dim: usize,
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    samples: usize,
}

// Deserialization goes through `GridSpec::new` so invalid shapes are rejected.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridShape {
    dim: usize,
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    samples: usize,
}

impl TryFrom<GridShape> for GridSpec {
    type Error = LabError;

    fn try_from(g: GridShape) -> Result<Self> {
        GridSpec::new(g.dim, g.half_width, g.samples)
    }
}

impl GridSpec {
    /// Validates and builds a grid: `dim` in {1, 2}, `samples` even and at least 8,
    /// `half_width` positive and finite.
    pub fn new(dim: usize, half_width: f64, samples: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            invalid!("grid dimension must be 1 or 2, got {dim}");
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            invalid!("grid half-width must be positive, got {half_width}");
        }
        if samples < 8 {
            invalid!("samples per axis must be at least 8, got {samples}");
        }
        if !samples.is_multiple_of(2) {
            invalid!("samples per axis must be even, got {samples}");
        }
        Ok(Self {
            dim,
            half_width,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.samples as f64
    }

    /// Cell measure `h^dim`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Measure of the whole periodic box, `(2L)^dim`.
    pub fn total_measure(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Spacing of the frequency lattice, `1 / (2L)`.
    pub fn frequency_spacing(&self) -> f64 {
        0.5 / self.half_width
    }

    /// Nyquist frequency `N / (4L)`.
    pub fn nyquist(&self) -> f64 {
        self.samples as f64 / (4.0 * self.half_width)
    }

    /// Same box, twice as many samples per axis.
    pub fn refined(&self) -> Self {
        Self {
            samples: self.samples * 2,
            ..*self
        }
    }

    /// Twice the box and twice the samples (same spacing).
    pub fn enlarged(&self) -> Self {
        Self {
            half_width: self.half_width * 2.0,
            samples: self.samples * 2,
            ..*self
        }
    }

    /// Per-axis indices of a flat index (axis 0 is the slow axis).
    pub fn unravel(&self, index: usize) -> [usize; 2] {
        if self.dim == 1 {
            [index, 0]
        } else {
            [index / self.samples, index % self.samples]
        }
    }

    pub fn ravel(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.samples + idx[1]
        }
    }

    /// Coordinate `-L + i h` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Spatial position of a flat index; the second component is 0 in 1D.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let [i, j] = self.unravel(index);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Signed wavenumber of an FFT-ordered index along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.samples as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT-ordered index of a signed wavenumber in `[-N/2, N/2)`.
    pub fn wavenumber_index(&self, k: i64) -> Option<usize> {
        let n = self.samples as i64;
        if k < -n / 2 || k >= n / 2 {
            None
        } else {
            Some(k.rem_euclid(n) as usize)
        }
    }

    /// Frequency `xi_k` of a flat FFT-ordered index.
    pub fn frequency(&self, index: usize) -> [f64; 2] {
        let [i, j] = self.unravel(index);
        let dk = self.frequency_spacing();
        if self.dim == 1 {
            [self.wavenumber(i) as f64 * dk, 0.0]
        } else {
            [self.wavenumber(i) as f64 * dk, self.wavenumber(j) as f64 * dk]
        }
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn norm2(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

/// Samples of a function on the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            invalid!("field values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub(crate) fn from_parts(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise moduli `|f(x)|`.
    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    /// Discrete `L^p` quasi-norm `(h^n sum |f|^p)^(1/p)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mu = self.grid.cell_measure();
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (mu * s).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid quadrature `h^n sum f`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_measure()
    }

    /// Largest pointwise distance to another field on the same grid.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Circular shift by whole cells: `g(x) = f(x - shift * h)`.
    pub fn translate(&self, shift: [i64; 2]) -> Self {
        let n = self.grid.samples as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let [i, j] = self.grid.unravel(idx);
            let si = (i as i64 - shift[0]).rem_euclid(n) as usize;
            let sj = if self.grid.dim == 1 {
                0
            } else {
                (j as i64 - shift[1]).rem_euclid(n) as usize
            };
            *slot = self.values[self.grid.ravel([si, sj])];
        }
        Self::from_parts(self.grid, out)
    }
}

/// Continuum-normalized Fourier coefficients on the frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "spectrum has {} coefficients, grid expects {}",
                coeffs.len(),
                grid.len()
            )));
        }
        if coeffs.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            invalid!("spectral coefficients must be finite");
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `F(xi_k)` at every lattice frequency.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.frequency(i))).collect();
        Self { grid, coeffs }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |xi| Complex64::new(f(xi), 0.0))
    }

    pub(crate) fn from_parts(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed wavenumbers `k` (ignored second entry in 1D).
    pub fn at(&self, k: [i64; 2]) -> Option<Complex64> {
        let i = self.grid.wavenumber_index(k[0])?;
        let j = if self.grid.dim == 1 {
            0
        } else {
            self.grid.wavenumber_index(k[1])?
        };
        Some(self.coeffs[self.grid.ravel([i, j])])
    }

    /// Multiplies every coefficient by `m(xi_k)`.
    pub fn multiply(&self, m: impl Fn([f64; 2]) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * m(self.grid.frequency(i)))
            .collect();
        Self::from_parts(self.grid, coeffs)
    }

    /// Multiplies by real multiplier `m(xi_k)`.
    pub fn multiply_real(&self, m: impl Fn([f64; 2]) -> f64) -> Self {
        self.multiply(|xi| Complex64::new(m(xi), 0.0))
    }

    /// Pointwise product with precomputed samples on the same lattice.
    pub fn multiply_samples(&self, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != self.coeffs.len() {
            return Err(LabError::GridMismatch(format!(
                "{} multiplier samples for {} coefficients",
                samples.len(),
                self.coeffs.len()
            )));
        }
        Ok(Self::from_parts(
            self.grid,
            self.coeffs.iter().zip(samples).map(|(a, b)| a * b).collect(),
        ))
    }
}

/// `(-1)^k` phase that re-centres the FFT on `[-L, L)`.
fn parity(grid: &GridSpec, index: usize) -> f64 {
    let [i, j] = grid.unravel(index);
    if (i + j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn fft_in_place(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.samples();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    if grid.dim() == 1 {
        fft.process(data);
        return;
    }
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

/// `coeff_k = h^n sum_x f(x) exp(-2 pi i <x, xi_k>)`.
pub fn forward_transform(f: &Field) -> SpectralField {
    let grid = *f.grid();
    let mut data = f.values().to_vec();
    fft_in_place(&grid, &mut data, false);
    let mu = grid.cell_measure();
    for (i, c) in data.iter_mut().enumerate() {
        *c *= mu * parity(&grid, i);
    }
    SpectralField::from_parts(grid, data)
}

/// Exact inverse of [`forward_transform`]:
/// `f(x) = (2L)^-n sum_k coeff_k exp(2 pi i <x, xi_k>)`.
pub fn inverse_transform(spec: &SpectralField) -> Field {
    let grid = *spec.grid();
    let mut data: Vec<Complex64> = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| c * parity(&grid, i))
        .collect();
    fft_in_place(&grid, &mut data, true);
    let scale = 1.0 / grid.total_measure();
    for v in data.iter_mut() {
        *v *= scale;
    }
    Field::from_parts(grid, data)
}

/// Plane wave `exp(2 pi i <x, xi>)` sampled on the grid.
pub fn plane_wave(grid: GridSpec, xi: [f64; 2]) -> Field {
    Field::from_fn(grid, |x| {
        Complex64::from_polar(1.0, 2.0 * PI * (x[0] * xi[0] + x[1] * xi[1]))
    })
}

/// Grid convolution `(f * g)(x) = h^n sum_y f(y) g(x - y)` (periodic), computed spectrally.
pub fn convolve(f: &Field, g: &Field) -> Result<Field> {
    f.grid().check_same(g.grid())?;
    let fh = forward_transform(f);
    let gh = forward_transform(g);
    let prod = fh.multiply_samples(gh.coeffs())?;
    Ok(inverse_transform(&prod))
}
