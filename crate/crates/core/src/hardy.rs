//! Hardy-space quasi-norms through the smooth maximal function, and
//! `L^inf`-atoms used as test vectors.
//!
//! With `Phi^ = chi(|xi|)`, `Phi_k ∗ f = (chi(2^-k |xi|) f^)^v`, and
//! `||f||_{H^p} = || max_k |Phi_k ∗ f| ||_{L^p}` over a finite window of `k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::grid::{forward_transform, inverse_transform, norm2, Field, GridSpec, SpectralField};
use crate::littlewood_paley::chi;
use crate::symbol::{apply_multiplier, MultiplierSymbol};

/// Default window `[-3, floor(log2 Nyquist) - 2]`.
pub fn default_k_range(grid: &GridSpec) -> (i32, i32) {
    (-3, grid.nyquist().log2().floor() as i32 - 2)
}

fn check_k_range(grid: &GridSpec, k: (i32, i32)) -> Result<()> {
    if k.0 > k.1 {
        invalid!("empty k range {k:?}");
    }
    if 2f64.powi(k.1) >= grid.nyquist() {
        invalid!("scale 2^{} is not below the Nyquist frequency {}", k.1, grid.nyquist());
    }
    if 2f64.powi(k.0 + 1) < grid.frequency_spacing() {
        invalid!("scale 2^{} is below the lattice spacing {}", k.0, grid.frequency_spacing());
    }
    Ok(())
}

/// Pointwise `max_k |Phi_k ∗ f|` and, per `k`, how many cells attain it.
#[derive(Debug, Clone)]
pub struct MaximalFunction {
    pub field: Field,
    pub k_range: (i32, i32),
    pub argmax_histogram: Vec<(i32, usize)>,
}

pub fn maximal_function(f: &Field, k_range: Option<(i32, i32)>) -> Result<MaximalFunction> {
    let grid = *f.grid();
    let k_range = k_range.unwrap_or_else(|| default_k_range(&grid));
    check_k_range(&grid, k_range)?;
    let spec = forward_transform(f);
    let layers: Vec<Vec<f64>> = (k_range.0..=k_range.1)
        .into_par_iter()
        .map(|k| {
            let s = 2f64.powi(-k);
            let smoothed = inverse_transform(&spec.multiply_real(|xi| chi(s * norm2(xi))));
            smoothed.moduli()
        })
        .collect();
    let mut best = vec![0.0; grid.len()];
    let mut arg = vec![0usize; grid.len()];
    for (layer_idx, layer) in layers.iter().enumerate() {
        for (i, &v) in layer.iter().enumerate() {
            if v > best[i] {
                best[i] = v;
                arg[i] = layer_idx;
            }
        }
    }
    let mut hist: Vec<(i32, usize)> = (k_range.0..=k_range.1).map(|k| (k, 0)).collect();
    for a in arg {
        hist[a].1 += 1;
    }
    Ok(MaximalFunction {
        field: Field::from_real(grid, &best)?,
        k_range,
        argmax_histogram: hist,
    })
}

pub fn hardy_norm(f: &Field, p: f64, k_range: Option<(i32, i32)>) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        invalid!("Hardy exponent must be positive, got {p}");
    }
    Ok(maximal_function(f, k_range)?.field.lp_norm(p))
}

/// Axis-parallel cube `center + [-side/2, side/2)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: [f64; 2],
    pub side: f64,
}

impl Cube {
    pub fn measure(&self, dim: usize) -> f64 {
        self.side.powi(dim as i32)
    }

    pub fn contains(&self, x: [f64; 2], dim: usize) -> bool {
        (0..dim).all(|a| {
            let d = x[a] - self.center[a];
            d >= -0.5 * self.side && d < 0.5 * self.side
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub cube: Cube,
    pub p: f64,
    pub seed: u64,
    pub values: Field,
}

impl Atom {
    /// Highest vanishing moment order `floor(n/p - n)`, or `None` when `p > 1`.
    pub fn moment_order(dim: usize, p: f64) -> Option<usize> {
        let n = dim as f64;
        let m = n / p - n;
        if m < -1e-12 {
            None
        } else {
            Some((m + 1e-12).floor() as usize)
        }
    }
}

fn multi_indices(dim: usize, order: usize) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..=order as u32 {
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for a in 0..=total {
                out.push([total - a, a]);
            }
        }
    }
    out
}

const ATOM_ATTEMPTS: u64 = 8;

/// Seeded atom on `cube`: a smooth random bump with the monomial moments up to
/// order `floor(n/p - n)` removed, scaled so that `max |a| = |Q|^(-1/p)`.
pub fn make_atom(grid: &GridSpec, cube: Cube, p: f64, seed: u64) -> Result<Atom> {
    if !(p > 0.0 && p.is_finite()) {
        invalid!("Hardy exponent must be positive, got {p}");
    }
    let dim = grid.dim();
    let h = grid.spacing();
    if cube.side < 8.0 * h {
        invalid!("cube side {} is below 8 grid cells ({})", cube.side, 8.0 * h);
    }
    let l = grid.half_width();
    for a in 0..dim {
        if cube.center[a] - 0.5 * cube.side < -l || cube.center[a] + 0.5 * cube.side > l {
            invalid!("cube {cube:?} leaves the grid [-{l}, {l})");
        }
    }
    let order = Atom::moment_order(dim, p);
    for attempt in 0..ATOM_ATTEMPTS {
        if let Some(values) = try_atom(grid, cube, p, seed.wrapping_add(attempt * 0x9E37_79B9), order)? {
            return Ok(Atom {
                cube,
                p,
                seed,
                values,
            });
        }
    }
    Err(LabError::Construction(format!(
        "moment projection annihilated {ATOM_ATTEMPTS} random bumps on {cube:?}"
    )))
}

fn try_atom(
    grid: &GridSpec,
    cube: Cube,
    p: f64,
    seed: u64,
    order: Option<usize>,
) -> Result<Option<Field>> {
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<([f64; 2], f64, f64)> = (0..6)
        .map(|_| {
            let k = [rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64];
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let half = 0.5 * cube.side;
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| cube.contains(grid.point(i), dim))
        .collect();
    // Scaled coordinates u in [-1, 1)^n and the window w(u) vanishing on the boundary.
    let scaled: Vec<[f64; 2]> = inside
        .iter()
        .map(|&i| {
            let x = grid.point(i);
            let mut u = [0.0; 2];
            for a in 0..dim {
                u[a] = (x[a] - cube.center[a]) / half;
            }
            u
        })
        .collect();
    let window = |u: [f64; 2]| -> f64 {
        (0..dim)
            .map(|a| {
                let v = u[a];
                if v.abs() < 1.0 {
                    (-1.0 / (1.0 - v * v)).exp()
                } else {
                    0.0
                }
            })
            .product()
    };
    let w: Vec<f64> = scaled.iter().map(|&u| window(u)).collect();
    let mut g: Vec<f64> = scaled
        .iter()
        .zip(&w)
        .map(|(&u, &wv)| {
            let s: f64 = waves
                .iter()
                .map(|(k, a, ph)| a * (std::f64::consts::PI * (k[0] * u[0] + k[1] * u[1]) + ph).cos())
                .sum();
            wv * s
        })
        .collect();
    let raw_max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(order) = order {
        let alphas = multi_indices(dim, order);
        let mono = |u: [f64; 2], a: [u32; 2]| u[0].powi(a[0] as i32) * u[1].powi(a[1] as i32);
        let m = alphas.len();
        let gram = DMatrix::from_fn(m, m, |r, c| {
            scaled
                .iter()
                .zip(&w)
                .map(|(&u, &wv)| wv * mono(u, alphas[r]) * mono(u, alphas[c]))
                .sum::<f64>()
        });
        let rhs = DVector::from_fn(m, |r, _| {
            scaled.iter().zip(&g).map(|(&u, &gv)| gv * mono(u, alphas[r])).sum::<f64>()
        });
        let Some(coef) = gram.lu().solve(&rhs) else {
            return Ok(None);
        };
        for ((gv, &u), &wv) in g.iter_mut().zip(&scaled).zip(&w) {
            let poly: f64 = alphas.iter().zip(coef.iter()).map(|(&a, c)| c * mono(u, a)).sum();
            *gv -= wv * poly;
        }
    }
    let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max > 1e-6 * raw_max) || max == 0.0 {
        return Ok(None);
    }
    let scale = cube.measure(dim).powf(-1.0 / p) / max;
    let mut values = vec![0.0; grid.len()];
    for (&i, gv) in inside.iter().zip(&g) {
        values[i] = gv * scale;
    }
    Ok(Some(Field::from_real(*grid, &values)?))
}

/// `sum_l lambda_l a_l`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicDecomposition {
    pub terms: Vec<(Complex64, Atom)>,
}

impl AtomicDecomposition {
    /// `(sum |lambda_l|^p)^(1/p)`, with `p` taken from the first atom.
    pub fn coefficient_norm(&self) -> f64 {
        let Some((_, first)) = self.terms.first() else {
            return 0.0;
        };
        let p = first.p;
        self.terms
            .iter()
            .map(|(l, _)| l.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

pub fn synthesize(decomp: &AtomicDecomposition) -> Result<Field> {
    let Some((_, first)) = decomp.terms.first() else {
        invalid!("empty decomposition");
    };
    let grid = *first.values.grid();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (lambda, atom) in &decomp.terms {
        grid.check_same(atom.values.grid())?;
        for (a, v) in acc.iter_mut().zip(atom.values.values()) {
            *a += lambda * v;
        }
    }
    Field::new(grid, acc)
}

/// `||T_sigma f||_{H^p} / ||f||_{H^p}`.
pub fn operator_ratio(
    sigma: &MultiplierSymbol,
    f: &Field,
    p: f64,
    k_range: Option<(i32, i32)>,
) -> Result<f64> {
    let base = hardy_norm(f, p, k_range)?;
    if !(base > 0.0) {
        invalid!("the input has zero Hardy norm");
    }
    let image = apply_multiplier(sigma, f)?;
    Ok(hardy_norm(&image, p, k_range)? / base)
}

/// JSON record of one atom probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub cube: Cube,
    pub p: f64,
    pub seed: u64,
    pub hardy_norm: f64,
    pub ratio: Option<f64>,
}

/// Low-pass of `f` keeping `|xi| < band`, useful for band-limited test inputs.
pub fn band_limit(f: &Field, band: f64) -> Field {
    let spec = forward_transform(f);
    let kept: SpectralField = spec.multiply_real(|xi| if norm2(xi) < band { 1.0 } else { 0.0 });
    inverse_transform(&kept)
}
