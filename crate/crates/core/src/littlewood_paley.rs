//! Smooth dyadic partitions of unity and the Hörmander-type symbol norm.
//!
//! Everything is built from the cutoff
//!
//! ```text
//! chi(u) = e(2 - u) / (e(2 - u) + e(u - 1)),   e(v) = exp(-1/v) for v > 0, else 0
//! ```
//!
//! which is exactly 1 on `u <= 1` and exactly 0 on `u >= 2`. Then
//! `Psi^(xi) = chi(|xi|) - chi(2|xi|)`, `Phi^ = chi(|xi|)` and
//! `Theta^(xi) = chi(|xi|/2) - chi(4|xi|)`, the telescoped form of
//! `Psi^(xi/2) + Psi^(xi) + Psi^(2 xi)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{lorentz_sobolev_norm, SobolevParams};
use crate::error::{invalid, LabError, Result};
use crate::grid::{forward_transform, inverse_transform, norm2, Field, GridSpec};
use crate::quadrature::integrate;
use crate::rearrangement::LorentzParams;
use crate::symbol::MultiplierSymbol;

fn glue(v: f64) -> f64 {
    if v > 0.0 {
        (-1.0 / v).exp()
    } else {
        0.0
    }
}

/// Smooth step equal to 1 for `u <= a` and 0 for `u >= b`.
pub fn smooth_step(u: f64, a: f64, b: f64) -> f64 {
    let (hi, lo) = (glue((b - u) / (b - a)), glue((u - a) / (b - a)));
    if lo == 0.0 {
        1.0
    } else if hi == 0.0 {
        0.0
    } else {
        hi / (hi + lo)
    }
}

/// The base cutoff `chi = smooth_step(., 1, 2)`.
pub fn chi(u: f64) -> f64 {
    smooth_step(u, 1.0, 2.0)
}

/// `J_0(z)` from `(1/pi) int_0^pi cos(z sin t) dt`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j0(z: f64) -> f64 {
    let m = 24 + z.abs().ceil() as usize;
    let dt = PI / m as f64;
    // Both endpoint values are cos(0) = 1.
    let mut acc = 1.0;
    for i in 1..m {
        acc += (z * (i as f64 * dt).sin()).cos();
    }
    acc / m as f64
}

/// Inverse Fourier transform of the radial function `g(|xi|)` on R^dim,
/// evaluated at radius `r`, for `g` supported in `[inner, outer]`.
pub fn radial_inverse_transform(
    g: impl Fn(f64) -> f64,
    inner: f64,
    outer: f64,
    dim: usize,
    r: f64,
) -> f64 {
    // Splitting at every half period keeps each panel non-oscillatory.
    let panels = ((outer - inner) * r * 2.0).ceil().max(1.0) as usize;
    let width = (outer - inner) / panels as f64;
    let scale = outer.powi(dim as i32);
    (0..panels)
        .map(|i| {
            let (a, b) = (inner + i as f64 * width, inner + (i + 1) as f64 * width);
            let res = if dim == 1 {
                integrate(|u| 2.0 * g(u) * (2.0 * PI * r * u).cos(), a, b, 1e-15 * scale, 1e-13, 400)
            } else {
                integrate(
                    |u| 2.0 * PI * u * g(u) * bessel_j0(2.0 * PI * r * u),
                    a,
                    b,
                    1e-15 * scale,
                    1e-13,
                    400,
                )
            };
            res.value
        })
        .sum()
}

/// The bump families used by the decomposition and the counterexample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    Psi,
    Theta,
    Phi,
    Lambda,
    Eta,
    EtaTilde,
}

/// A radial bump with its frequency-side profile in closed form.
///
/// For `Lambda` the frequency-side profile is the mollifier itself, which is
/// convolved with symbols; its "space side" is `Lambda^v`. For `Eta` the
/// frequency side is `eta^` and the space side is `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    kind: BumpKind,
    dim: usize,
    // Normalizes Lambda to unit mass.
    lambda_mass: f64,
    // Space-side value at 0 of Phi, used to normalize eta(0) = 1.
    phi_at_zero: f64,
}

// eta = |b^v|^2 with b^(xi) = chi(ETA_DILATION |xi|), supported in |xi| <= 1/2000.
const ETA_DILATION: f64 = 4000.0;

fn lambda_shape(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

pub fn make_bump(kind: BumpKind, dim: usize) -> Result<BumpProfile> {
    if dim != 1 && dim != 2 {
        invalid!("dimension must be 1 or 2, got {dim}");
    }
    let radial_mass = |g: &dyn Fn(f64) -> f64, outer: f64| {
        let w = |u: f64| if dim == 1 { 2.0 } else { 2.0 * PI * u };
        integrate(|u| w(u) * g(u), 0.0, outer, 1e-16, 1e-14, 400).value
    };
    let lambda_mass = radial_mass(&lambda_shape, 1.0);
    let phi_at_zero = radial_mass(&chi, 2.0);
    Ok(BumpProfile {
        kind,
        dim,
        lambda_mass,
        phi_at_zero,
    })
}

impl BumpProfile {
    pub fn kind(&self) -> BumpKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radii `[inner, outer]` containing the support of the frequency profile.
    pub fn frequency_support(&self) -> (f64, f64) {
        match self.kind {
            BumpKind::Psi => (0.5, 2.0),
            BumpKind::Theta => (0.25, 4.0),
            BumpKind::Phi => (0.0, 2.0),
            BumpKind::Lambda => (0.0, 1.0),
            BumpKind::Eta => (0.0, 2.0 * 2.0 / ETA_DILATION),
            BumpKind::EtaTilde => (0.0, 0.01),
        }
    }

    /// Frequency-side profile at radius `r`.
    pub fn frequency_value(&self, r: f64) -> f64 {
        match self.kind {
            BumpKind::Psi => chi(r) - chi(2.0 * r),
            BumpKind::Theta => chi(0.5 * r) - chi(4.0 * r),
            BumpKind::Phi => chi(r),
            BumpKind::Lambda => lambda_shape(r) / self.lambda_mass,
            BumpKind::EtaTilde => smooth_step(r, 1e-3, 1e-2),
            BumpKind::Eta => self.eta_hat(r),
        }
    }

    // eta^ = ETA_DILATION^n (chi * chi)(ETA_DILATION xi) / Phi(0)^2.
    fn eta_hat(&self, r: f64) -> f64 {
        let u = ETA_DILATION * r;
        if u >= 4.0 {
            return 0.0;
        }
        let auto = if self.dim == 1 {
            integrate(|z| chi(z.abs()) * chi((u - z).abs()), u - 2.0, 2.0, 1e-15, 1e-13, 400).value
        } else {
            // Overlap of two discs of radius 2 centred at 0 and (u, 0).
            integrate(
                |z1| {
                    let half = (4.0 - z1 * z1).max(0.0).sqrt();
                    integrate(
                        |z2| chi(z1.hypot(z2)) * chi((u - z1).hypot(z2)),
                        -half,
                        half,
                        1e-15,
                        1e-11,
                        200,
                    )
                    .value
                },
                u - 2.0,
                2.0,
                1e-14,
                1e-11,
                200,
            )
            .value
        };
        ETA_DILATION.powi(self.dim as i32) * auto / (self.phi_at_zero * self.phi_at_zero)
    }

    /// Space-side value at radius `r`.
    pub fn space_value(&self, r: f64) -> f64 {
        if self.kind == BumpKind::Eta {
            let b = radial_inverse_transform(chi, 0.0, 2.0, self.dim, r / ETA_DILATION);
            let b = b / self.phi_at_zero;
            return b * b;
        }
        let (inner, outer) = self.frequency_support();
        radial_inverse_transform(|u| self.frequency_value(u), inner, outer, self.dim, r)
    }

    /// Frequency profile at every lattice frequency of `grid`, in FFT order.
    pub fn frequency_samples(&self, grid: &GridSpec, dilation: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|i| self.frequency_value(dilation * norm2(grid.frequency(i))))
            .collect()
    }

    /// Space-side profile on `grid`, one quadrature per distinct radius.
    pub fn space_field(&self, grid: &GridSpec) -> Result<Field> {
        self.check_dim(grid)?;
        let half = (grid.samples() / 2) as i64;
        let h = grid.spacing();
        let key = |i: usize| -> i64 {
            let [a, b] = grid.unravel(i);
            let da = a as i64 - half;
            let db = if grid.dim() == 1 { 0 } else { b as i64 - half };
            da * da + db * db
        };
        let mut keys: Vec<i64> = (0..grid.len()).map(key).collect();
        keys.sort_unstable();
        keys.dedup();
        let values: HashMap<i64, f64> = keys
            .par_iter()
            .map(|&k| (k, self.space_value((k as f64).sqrt() * h)))
            .collect();
        let samples: Vec<f64> = (0..grid.len()).map(|i| values[&key(i)]).collect();
        Field::from_real(*grid, &samples)
    }

    /// Writes `(xi, value)` rows of the frequency profile along the first axis.
    pub fn write_csv<W: Write>(&self, grid: &GridSpec, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "value"])?;
        let n = grid.samples() as i64;
        for k in -n / 2..n / 2 {
            let xi = k as f64 * grid.frequency_spacing();
            w.serialize((xi, self.frequency_value(xi.abs())))?;
        }
        w.flush()
    }

    fn check_dim(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(LabError::GridMismatch(format!(
                "{}-dimensional bump on a {}-dimensional grid",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// Default dyadic window `[log2(1/(2L)) + 1, log2(Nyquist) - 1]` of a grid.
pub fn resolvable_window(grid: &GridSpec) -> (i32, i32) {
    let lo = grid.frequency_spacing().log2().ceil() as i32 + 1;
    let hi = grid.nyquist().log2().floor() as i32 - 1;
    (lo, hi)
}

/// `xi -> sigma(2^j xi) Psi^(xi)` sampled on `piece_grid`, whose points are read
/// as frequencies. When `sigma` carries a support ball the piece grid is centred
/// on the rescaled ball centre; norms are translation invariant.
pub fn dyadic_piece(
    sigma: &MultiplierSymbol,
    j: i32,
    psi: &BumpProfile,
    piece_grid: &GridSpec,
) -> Result<Field> {
    let (lo, hi) = resolvable_window(sigma.grid());
    if j < lo || j > hi {
        invalid!("j = {j} outside the resolvable window [{lo}, {hi}]");
    }
    psi.check_dim(piece_grid)?;
    let Some(f) = sigma.closed_form() else {
        invalid!("dyadic pieces need a symbol with a closed form");
    };
    let scale = 2f64.powi(j);
    let (center, needed) = match sigma.support() {
        Some(s) => (
            [s.center[0] / scale, s.center[1] / scale],
            (s.radius / scale).min(psi.frequency_support().1),
        ),
        None => ([0.0, 0.0], psi.frequency_support().1),
    };
    if needed > piece_grid.half_width() {
        invalid!(
            "piece grid half-width {} does not cover radius {needed}",
            piece_grid.half_width()
        );
    }
    let cell = piece_grid.cell_measure() * scale.powi(piece_grid.dim() as i32);
    Ok(Field::from_fn(*piece_grid, |x| {
        let xi = [center[0] + x[0], center[1] + x[1]];
        let bump = psi.frequency_value(norm2(xi));
        if bump == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f.cell_sample([scale * xi[0], scale * xi[1]], cell) * bump
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PieceNorm {
    pub j: i32,
    pub norm: f64,
}

/// Windowed `sup_j ||sigma(2^j .) Psi^||_{L^{p,q}_s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub value: f64,
    pub argmax_j: i32,
    pub window: (i32, i32),
    pub pieces: Vec<PieceNorm>,
    /// Always true: the supremum runs over a finite window only.
    pub windowed: bool,
}

pub fn hormander_norm(
    sigma: &MultiplierSymbol,
    s: f64,
    params: LorentzParams,
    j_range: Option<(i32, i32)>,
    psi: &BumpProfile,
    piece_grid: &GridSpec,
) -> Result<HormanderReport> {
    let window = j_range.unwrap_or_else(|| resolvable_window(sigma.grid()));
    if window.0 > window.1 {
        invalid!("empty j range {window:?}");
    }
    let sob = SobolevParams { s, lorentz: params };
    let pieces: Vec<PieceNorm> = (window.0..=window.1)
        .into_par_iter()
        .map(|j| {
            let piece = dyadic_piece(sigma, j, psi, piece_grid)?;
            Ok(PieceNorm {
                j,
                norm: lorentz_sobolev_norm(&piece, sob),
            })
        })
        .collect::<Result<_>>()?;
    let best = pieces
        .iter()
        .copied()
        .fold(pieces[0], |acc, p| if p.norm > acc.norm { p } else { acc });
    Ok(HormanderReport {
        value: best.norm,
        argmax_j: best.j,
        window,
        pieces,
        windowed: true,
    })
}

/// `L_j f = (b^(2^-j .) f^)^v` for the bump `b` (normally `Psi` or `Theta`).
pub fn lp_operator(f: &Field, j: i32, bump: &BumpProfile) -> Result<Field> {
    bump.check_dim(f.grid())?;
    let m = bump.frequency_samples(f.grid(), 2f64.powi(-j));
    let spec = forward_transform(f);
    let coeffs = spec.coeffs().iter().zip(&m).map(|(c, &w)| c * w).collect();
    Ok(inverse_transform(&crate::grid::SpectralField::new(*f.grid(), coeffs)?))
}

/// `(sum_j |L_j f|^2)^(1/2)` over `j_lo..=j_hi`.
pub fn square_function(f: &Field, j_range: (i32, i32), psi: &BumpProfile) -> Result<Field> {
    let mut acc = vec![0.0; f.grid().len()];
    for j in j_range.0..=j_range.1 {
        let piece = lp_operator(f, j, psi)?;
        for (a, v) in acc.iter_mut().zip(piece.values()) {
            *a += v.norm_sqr();
        }
    }
    let roots: Vec<f64> = acc.into_iter().map(f64::sqrt).collect();
    Field::from_real(*f.grid(), &roots)
}
