//! Fourier multiplier symbols and the operators they define.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, LabError, Result};
use crate::grid::{forward_transform, inverse_transform, Field, GridSpec, SpectralField};

/// A frequency-side function that can be evaluated anywhere.
///
/// `cell_sample` is what gets stored on a lattice whose cells have measure
/// `cell`; it defaults to the point value and is overridden by symbols with
/// integrable singularities, which store the cell average instead.
pub trait SymbolFn: Send + Sync {
    fn value(&self, xi: [f64; 2]) -> Complex64;

    fn cell_sample(&self, xi: [f64; 2], _cell: f64) -> Complex64 {
        self.value(xi)
    }
}

impl<F> SymbolFn for F
where
    F: Fn([f64; 2]) -> Complex64 + Send + Sync,
{
    fn value(&self, xi: [f64; 2]) -> Complex64 {
        self(xi)
    }
}

/// A ball containing the support of a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub center: [f64; 2],
    pub radius: f64,
}

/// A multiplier sampled on the frequency lattice of a grid.
#[derive(Clone)]
pub struct MultiplierSymbol {
    grid: GridSpec,
    samples: Vec<Complex64>,
    sup_norm: f64,
    closed_form: Option<Arc<dyn SymbolFn>>,
    support: Option<Support>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("grid", &self.grid)
            .field("sup_norm", &self.sup_norm)
            .field("closed_form", &self.closed_form.is_some())
            .field("support", &self.support)
            .finish()
    }
}

fn sup_of(samples: &[Complex64]) -> f64 {
    samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl MultiplierSymbol {
    /// Samples `f` on the lattice of `grid` and keeps it for off-lattice use.
    pub fn from_closed_form(grid: GridSpec, f: impl SymbolFn + 'static) -> Result<Self> {
        Self::from_shared(grid, Arc::new(f))
    }

    pub fn from_shared(grid: GridSpec, f: Arc<dyn SymbolFn>) -> Result<Self> {
        let cell = grid.frequency_spacing().powi(grid.dim() as i32);
        let samples: Vec<Complex64> = (0..grid.len())
            .map(|i| f.cell_sample(grid.frequency(i), cell))
            .collect();
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            invalid!("symbol is not finite on the frequency lattice");
        }
        Ok(MultiplierSymbol {
            grid,
            sup_norm: sup_of(&samples),
            samples,
            closed_form: Some(f),
            support: None,
        })
    }

    /// Wraps lattice samples given in FFT order.
    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            invalid!("symbol samples must be finite");
        }
        Ok(MultiplierSymbol {
            grid,
            sup_norm: sup_of(&samples),
            samples,
            closed_form: None,
            support: None,
        })
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        MultiplierSymbol::from_closed_form(grid, move |_: [f64; 2]| c)
            .expect("a finite constant is a valid symbol")
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = Some(support);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `max |sigma|` over the lattice.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn support(&self) -> Option<Support> {
        self.support
    }

    pub fn closed_form(&self) -> Option<&Arc<dyn SymbolFn>> {
        self.closed_form.as_ref()
    }

    /// Point value from the closed form, if there is one.
    pub fn eval(&self, xi: [f64; 2]) -> Option<Complex64> {
        self.closed_form.as_ref().map(|f| f.value(xi))
    }

    pub fn as_spectral(&self) -> SpectralField {
        SpectralField::new(self.grid, self.samples.clone()).expect("shape checked at construction")
    }
}

/// `T_sigma f = (sigma f^)^v`.
pub fn apply_multiplier(sigma: &MultiplierSymbol, f: &Field) -> Result<Field> {
    sigma.grid.check_same(f.grid())?;
    let spec = forward_transform(f).multiply_samples(&sigma.samples)?;
    Ok(inverse_transform(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::plane_wave;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(grid, v).unwrap()
    }

    #[test]
    fn identity_symbol() {
        let grid = GridSpec::new(2, 3.0, 32).unwrap();
        let f = random_field(grid, 1);
        let one = MultiplierSymbol::constant(grid, Complex64::new(1.0, 0.0));
        let g = apply_multiplier(&one, &f).unwrap();
        assert!(g.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn l2_bound_by_sup_norm() {
        let grid = GridSpec::new(1, 4.0, 256).unwrap();
        let sigma = MultiplierSymbol::from_closed_form(grid, |xi: [f64; 2]| {
            Complex64::new((3.0 * xi[0]).cos(), xi[0].sin() * 0.5)
        })
        .unwrap();
        for seed in 0..10 {
            let f = random_field(grid, seed);
            let g = apply_multiplier(&sigma, &f).unwrap();
            assert!(g.lp_norm(2.0) <= sigma.sup_norm() * f.lp_norm(2.0) * (1.0 + 1e-10));
        }
    }

    #[test]
    fn single_cell_projects_onto_plane_wave() {
        let grid = GridSpec::new(1, 2.0, 64).unwrap();
        let k0 = 5usize;
        let mut s = vec![Complex64::new(0.0, 0.0); grid.len()];
        s[k0] = Complex64::new(1.0, 0.0);
        let sigma = MultiplierSymbol::from_samples(grid, s).unwrap();
        let xi = grid.frequency(k0);
        let w = plane_wave(grid, xi);
        let c = Complex64::new(0.5, 2.0);
        let f = w.scale(c).add(&plane_wave(grid, grid.frequency(k0 + 3))).unwrap();
        let g = apply_multiplier(&sigma, &f).unwrap();
        assert!(g.max_abs_diff(&w.scale(c)) < 1e-12);
    }

    #[test]
    fn commutes_with_translation() {
        let grid = GridSpec::new(2, 2.0, 16).unwrap();
        let sigma = MultiplierSymbol::from_closed_form(grid, |xi: [f64; 2]| {
            Complex64::new(1.0 / (1.0 + xi[0] * xi[0] + 2.0 * xi[1] * xi[1]), xi[1])
        })
        .unwrap();
        let f = random_field(grid, 9);
        let a = apply_multiplier(&sigma, &f.translate([3, -2])).unwrap();
        let b = apply_multiplier(&sigma, &f).unwrap().translate([3, -2]);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn rejects_wrong_shape_and_grid() {
        let grid = GridSpec::new(1, 2.0, 16).unwrap();
        assert!(MultiplierSymbol::from_samples(grid, vec![Complex64::new(1.0, 0.0); 8]).is_err());
        let sigma = MultiplierSymbol::constant(grid, Complex64::new(2.0, 0.0));
        let other = Field::zeros(GridSpec::new(1, 2.0, 32).unwrap());
        assert!(apply_multiplier(&sigma, &other).is_err());
    }
}
