//! Fractional Laplacian, Lorentz-Sobolev norms, Bessel potentials and the
//! kernels `H^` of the logarithmically corrected symbols.
//!
//! Two independent routes compute the transform of a radial symbol `m(|x|)`:
//! the grid route samples `m` on a frequency lattice and inverts the FFT, and
//! the subordination route writes it as a superposition of Gaussians,
//!
//! ```text
//! G_a(r) = 1 / ((4 pi)^(a/2) Gamma(a/2)) int_0^inf exp(-pi r^2/d - d/(4 pi)) d^((a-n)/2) dd/d
//! ```
//!
//! and integrates in `w = ln d` with the trapezoid rule.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{invalid, Result};
use crate::grid::{forward_transform, inverse_transform, norm2, Field, GridSpec, SpectralField};
use crate::littlewood_paley::{BumpKind, BumpProfile};
use crate::quadrature::integrate;
use crate::rearrangement::{field_lorentz_norm, LorentzParams};
use crate::symbol::{MultiplierSymbol, SymbolFn};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub s: f64,
    pub lorentz: LorentzParams,
}

/// `(1 + 4 pi^2 r^2)^(-s/2)`.
pub fn bessel_symbol(s: f64, r: f64) -> f64 {
    (1.0 + 4.0 * PI * PI * r * r).powf(-0.5 * s)
}

/// `(1 + 4 pi^2 r^2)^(-t/2) (1 + ln(1 + 4 pi^2 r^2))^(-gamma/2)`.
pub fn h_profile(t: f64, gamma: f64, r: f64) -> f64 {
    let a = 4.0 * PI * PI * r * r;
    (-0.5 * t * a.ln_1p() - 0.5 * gamma * a.ln_1p().ln_1p()).exp()
}

/// `(I - Delta)^(s/2) f`.
pub fn fractional_laplacian(f: &Field, s: f64) -> Field {
    if s == 0.0 {
        return f.clone();
    }
    let spec = forward_transform(f).multiply_real(|xi| bessel_symbol(-s, norm2(xi)));
    inverse_transform(&spec)
}

pub fn lorentz_sobolev_norm(f: &Field, params: SobolevParams) -> f64 {
    field_lorentz_norm(&fractional_laplacian(f, params.s), params.lorentz)
}

type CacheKey = (u64, usize, u64, usize);

fn bessel_cache() -> &'static RwLock<HashMap<CacheKey, Arc<Field>>> {
    static CACHE: std::sync::OnceLock<RwLock<HashMap<CacheKey, Arc<Field>>>> =
        std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Bessel potential `G_s` on the spatial grid, from the sampled symbol.
///
/// Results are cached per `(s, grid)`. A `warn` record is logged when the
/// sampled kernel dips below `-1e-8` on `|x| <= L/2`.
pub fn bessel_potential(s: f64, grid: &GridSpec) -> Result<Arc<Field>> {
    if !(s > 0.0 && s.is_finite()) {
        invalid!("Bessel order must be positive, got {s}");
    }
    let key = (s.to_bits(), grid.dim(), grid.half_width().to_bits(), grid.samples());
    if let Some(hit) = bessel_cache().read().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let spec = SpectralField::from_real_fn(*grid, |xi| bessel_symbol(s, norm2(xi)));
    let field = Arc::new(symmetrize(&real_part(&inverse_transform(&spec))));
    let low = resolved_min(&field);
    if low < -1e-8 {
        log::warn!("G_{s} reaches {low:e} on the resolved region of {grid:?}");
    }
    bessel_cache()
        .write()
        .expect("cache lock")
        .entry(key)
        .or_insert_with(|| field.clone());
    Ok(field)
}

fn real_part(f: &Field) -> Field {
    let re: Vec<f64> = f.values().iter().map(|z| z.re).collect();
    Field::from_real(*f.grid(), &re).expect("same grid")
}

/// `(g(x) + g(-x)) / 2`, so an even kernel is exactly even despite FFT rounding.
fn symmetrize(g: &Field) -> Field {
    let grid = *g.grid();
    let n = grid.samples();
    let reflect = |i: usize| {
        let [a, b] = grid.unravel(i);
        let rb = if grid.dim() == 2 { (n - b) % n } else { 0 };
        grid.ravel([(n - a) % n, rb])
    };
    let v = g.values();
    Field::new(grid, (0..grid.len()).map(|i| 0.5 * (v[i] + v[reflect(i)])).collect())
        .expect("same grid")
}

fn resolved_min(f: &Field) -> f64 {
    let g = f.grid();
    let half = 0.5 * g.half_width();
    (0..g.len())
        .filter(|&i| norm2(g.point(i)) <= half)
        .map(|i| f.values()[i].re)
        .fold(f64::INFINITY, f64::min)
}

/// Comparison function for `G_s` near the origin:
/// `r^-(n-s)` for `s < n`, `ln(2/r)` for `s = n`, `1` for `s > n`.
pub fn frak_s(s: f64, dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    if s < n {
        r.powf(s - n)
    } else if s == n {
        (2.0 / r).ln()
    } else {
        1.0
    }
}

/// Comparison function for `H^` near the origin:
/// `r^-(n-s) (1 + 2 ln(1/r))^(-gamma/2)` for `s < n`, `1` otherwise.
pub fn frak_t(s: f64, gamma: f64, dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    if s < n {
        r.powf(s - n) * (1.0 - 2.0 * r.ln()).powf(-0.5 * gamma)
    } else {
        1.0
    }
}

// Sum of exp(phi_i) dw over nodes, computed relative to the largest term.
fn log_sum_exp(phis: &[f64], dw: f64) -> f64 {
    let top = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    top.exp() * phis.iter().map(|&p| (p - top).exp()).sum::<f64>() * dw
}

/// `G_a(r)` on R^dim by subordination; `+inf` at `r = 0` when `a <= dim`.
pub fn bessel_kernel_radial(a: f64, dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    if r == 0.0 {
        if a <= n {
            return f64::INFINITY;
        }
        return (ln_gamma(0.5 * (a - n)) - ln_gamma(0.5 * a)).exp() / FOUR_PI.powf(0.5 * n);
    }
    let phi = |w: f64| -PI * r * r * (-w).exp() - w.exp() / FOUR_PI + 0.5 * (a - n) * w;
    let dphi = |w: f64| PI * r * r * (-w).exp() - w.exp() / FOUR_PI + 0.5 * (a - n);
    // phi is concave; bisect for the stationary point.
    let (mut lo, mut hi) = (-800.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak = 0.5 * (lo + hi);
    let top = phi(peak);
    let dw = 0.02;
    let mut acc = 1.0;
    for dir in [-1.0, 1.0] {
        let mut k = 1.0;
        loop {
            let v = (phi(peak + dir * k * dw) - top).exp();
            acc += v;
            if v < 1e-18 {
                break;
            }
            k += 1.0;
        }
    }
    let log_norm = -0.5 * a * FOUR_PI.ln() - ln_gamma(0.5 * a);
    (top + log_norm).exp() * acc * dw
}

/// Grid-free evaluation of `H^(t, gamma)` (the transform of [`h_profile`]) by
/// subordination:
///
/// ```text
/// H^(r) = (4 pi)^(-t/2) int exp(-pi r^2/d - d/(4 pi)) d^((t-n)/2) I(d) dd/d
/// I(d)  = 1/Gamma(g/2) int_0^inf e^-u u^(g/2 - 1) (d/(4 pi))^u / Gamma(u + t/2) du
/// ```
///
/// `ln I` is tabulated on a uniform grid in `w = ln d`; below the table the
/// two-term expansion in `1/(1 + ln(4 pi/d))` is used.
#[derive(Debug, Clone)]
pub struct HHatOracle {
    t: f64,
    gamma: f64,
    dim: usize,
    w0: f64,
    dw: f64,
    log_i: Vec<f64>,
}

const ORACLE_W_MIN: f64 = -420.0;
const ORACLE_STEP: f64 = 0.1;

impl HHatOracle {
    pub fn new(t: f64, gamma: f64, dim: usize) -> Result<Self> {
        if !(t > 0.0 && gamma > 0.0 && t.is_finite() && gamma.is_finite()) {
            invalid!("need t > 0 and gamma > 0, got ({t}, {gamma})");
        }
        if dim != 1 && dim != 2 {
            invalid!("dimension must be 1 or 2, got {dim}");
        }
        let w_max = (FOUR_PI * 150.0).ln();
        let count = ((w_max - ORACLE_W_MIN) / ORACLE_STEP).ceil() as usize + 1;
        // Nodes u = exp(v); the left end resolves the u^(g/2) tail at the smallest d.
        let c_min = ORACLE_W_MIN - FOUR_PI.ln();
        let v_lo = (gamma / (2.0 * (12.0 - c_min))).ln() - 90.0 / gamma;
        let v_hi = 150f64.ln();
        let dv = 0.1;
        let nv = ((v_hi - v_lo) / dv).ceil() as usize + 1;
        let a: Vec<(f64, f64)> = (0..nv)
            .map(|k| {
                let v = v_lo + k as f64 * dv;
                let u = v.exp();
                (-u + 0.5 * gamma * v - ln_gamma(u + 0.5 * t), u)
            })
            .collect();
        let norm = ln_gamma(0.5 * gamma);
        let log_i = (0..count)
            .into_par_iter()
            .map(|i| {
                let c = ORACLE_W_MIN + i as f64 * ORACLE_STEP - FOUR_PI.ln();
                let phis: Vec<f64> = a.iter().map(|&(av, u)| av + u * c).collect();
                log_sum_exp(&phis, dv).ln() - norm
            })
            .collect();
        Ok(HHatOracle {
            t,
            gamma,
            dim,
            w0: ORACLE_W_MIN,
            dw: ORACLE_STEP,
            log_i,
        })
    }

    fn log_i_asymptotic(&self, w: f64) -> f64 {
        let lambda = 1.0 + FOUR_PI.ln() - w;
        let a = 0.5 * self.t;
        let g = 0.5 * self.gamma;
        -ln_gamma(a) - g * lambda.ln() + (-digamma(a) * g / lambda).ln_1p()
    }

    /// `H^(r)`; `+inf` at `r = 0` when the kernel is not integrable there.
    pub fn value(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let t = self.t;
        if r == 0.0 && (t < n || (t == n && self.gamma <= 2.0)) {
            return f64::INFINITY;
        }
        let phi = |w: f64, log_i: f64| {
            -PI * r * r * (-w).exp() - w.exp() / FOUR_PI + 0.5 * (t - n) * w + log_i
        };
        let mut phis: Vec<f64> = self
            .log_i
            .iter()
            .enumerate()
            .map(|(i, &li)| phi(self.w0 + i as f64 * self.dw, li))
            .collect();
        let top = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut k = 1.0;
        let mut extra = 0.0;
        // Extend below the table while the integrand is still relevant.
        loop {
            let w = self.w0 - k * self.dw;
            let p = phi(w, self.log_i_asymptotic(w));
            if p < top - 40.0 || k > 2.0e6 {
                break;
            }
            if p > top {
                extra += (p - top).exp();
            } else {
                phis.push(p);
            }
            k += 1.0;
        }
        if r == 0.0 && t == n {
            // Remaining tail int lambda^(-g/2) dw in closed form.
            let w = self.w0 - k * self.dw;
            let lambda = 1.0 + FOUR_PI.ln() - w;
            let g = 0.5 * self.gamma;
            extra += (-ln_gamma(0.5 * t) - top).exp() * lambda.powf(1.0 - g) / (g - 1.0) / self.dw;
        }
        let base = log_sum_exp(&phis, self.dw) + extra * top.exp() * self.dw;
        base * FOUR_PI.powf(-0.5 * t)
    }

    /// Average of `H^` over the ball of measure `cell` centred at the origin.
    pub fn origin_cell_average(&self, cell: f64) -> f64 {
        let n = self.dim as f64;
        let omega = if self.dim == 1 { 2.0 } else { PI };
        let rho = (cell / omega).powf(1.0 / n);
        // r = rho e^-v turns the ball average into n int_0^inf H^(rho e^-v) e^-nv dv.
        let vmax = 50.0 / self.t.min(n);
        let res = integrate(
            |v| n * self.value(rho * (-v).exp()) * (-n * v).exp(),
            0.0,
            vmax,
            1e-14,
            1e-9,
            400,
        );
        res.value
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `H^(t, gamma)` on the spatial grid via the inverse FFT of the sampled symbol.
pub fn h_hat_field(t: f64, gamma: f64, grid: &GridSpec) -> Result<Field> {
    if !(t > 0.0 && gamma > 0.0) {
        invalid!("need t > 0 and gamma > 0, got ({t}, {gamma})");
    }
    let spec = SpectralField::from_real_fn(*grid, |xi| h_profile(t, gamma, norm2(xi)));
    Ok(real_part(&inverse_transform(&spec)))
}

/// Measured constants of a radial kernel against its comparison functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub s: f64,
    pub gamma: Option<f64>,
    pub grid: GridSpec,
    /// Smallest `C` with `K(x) <= C exp(-|x|/2)` on `1 <= |x| <= L/2`.
    #[serde(rename = "C_exp")]
    pub c_exp: f64,
    /// Extremes of `K / comparison` on `lower_cutoff <= |x| <= 1`.
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub lower_cutoff: f64,
    /// Minimum of `K` on `|x| <= L/2`.
    pub min_value: f64,
    pub positive: bool,
    pub decay_finite: bool,
}

const LOWER_CUTOFF: f64 = 0.05;

fn measure_kernel(
    kernel: &Field,
    comparison: impl Fn(f64) -> f64,
    s: f64,
    gamma: Option<f64>,
) -> AsymptoticsReport {
    let g = *kernel.grid();
    let half = 0.5 * g.half_width();
    let (mut lo, mut hi, mut c_exp) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..g.len() {
        let r = norm2(g.point(i));
        let v = kernel.values()[i].re;
        if (LOWER_CUTOFF..=1.0).contains(&r) {
            let q = v / comparison(r);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if (1.0..=half).contains(&r) {
            c_exp = c_exp.max(v * (0.5 * r).exp());
        }
    }
    let min_value = resolved_min(kernel);
    AsymptoticsReport {
        s,
        gamma,
        grid: g,
        c_exp,
        ratio_low: lo,
        ratio_high: hi,
        lower_cutoff: LOWER_CUTOFF,
        min_value,
        positive: min_value > 0.0,
        decay_finite: c_exp.is_finite(),
    }
}

pub fn bessel_asymptotics_check(s: f64, grid: &GridSpec) -> Result<AsymptoticsReport> {
    let g = bessel_potential(s, grid)?;
    let dim = grid.dim();
    Ok(measure_kernel(&g, |r| frak_s(s, dim, r), s, None))
}

pub fn h_hat_check(s: f64, gamma: f64, grid: &GridSpec) -> Result<AsymptoticsReport> {
    let h = h_hat_field(s, gamma, grid)?;
    let dim = grid.dim();
    Ok(measure_kernel(&h, |r| frak_t(s, gamma, dim, r), s, Some(gamma)))
}

/// Cubic interpolation table of a radial function on `[0, r_max]`.
struct RadialTable {
    step: f64,
    values: Vec<f64>,
}

impl RadialTable {
    fn new(f: impl Fn(f64) -> f64 + Sync, r_max: f64, intervals: usize) -> Self {
        let step = r_max / intervals as f64;
        // Two guard nodes on each side keep the 4-point stencil inside.
        let values = (0..intervals + 4)
            .into_par_iter()
            .map(|i| f((i as f64 - 1.0).abs() * step))
            .collect();
        RadialTable { step, values }
    }

    fn eval(&self, r: f64) -> f64 {
        let x = r / self.step + 1.0;
        let i = (x.floor() as usize).clamp(1, self.values.len() - 3);
        let u = x - i as f64;
        let [a, b, c, d] = [
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        ];
        // Lagrange weights on nodes -1, 0, 1, 2.
        let wa = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let wb = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let wc = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let wd = (u + 1.0) * u * (u - 1.0) / 6.0;
        wa * a + wb * b + wc * c + wd * d
    }
}

/// `sigma^eps = sum_j (sigma Psi^(. / 2^j)) * Lambda^{j,eps}` with
/// `Lambda^{j,eps} = (2^j eps)^-n Lambda(. / (2^j eps))`.
///
/// Each frequency-side convolution is done as a product on the spatial grid
/// with `Lambda^v(2^j eps x)`. The sum runs over every `j` whose annulus meets
/// the lattice.
pub fn mollify_symbol(
    sigma: &MultiplierSymbol,
    eps: f64,
    lambda: &BumpProfile,
    psi: &BumpProfile,
) -> Result<MultiplierSymbol> {
    if !(eps > 0.0 && eps < 0.01) {
        invalid!("eps must lie in (0, 1/100), got {eps}");
    }
    if lambda.kind() != BumpKind::Lambda || psi.kind() != BumpKind::Psi {
        invalid!("mollify_symbol needs a lambda and a psi profile");
    }
    let grid = *sigma.grid();
    if lambda.dim() != grid.dim() || psi.dim() != grid.dim() {
        invalid!("profile dimension differs from the symbol grid");
    }
    let top = grid.nyquist() * (grid.dim() as f64).sqrt();
    let j_lo = grid.frequency_spacing().log2().floor() as i32 - 1;
    let j_hi = top.log2().ceil() as i32 + 1;
    let r_max = 2f64.powi(j_hi) * eps * grid.half_width() * (grid.dim() as f64).sqrt();
    let table = RadialTable::new(|r| lambda.space_value(r), r_max * 1.01, 4096);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in j_lo..=j_hi {
        let scale = 2f64.powi(-j);
        let piece: Vec<Complex64> = sigma
            .samples()
            .iter()
            .enumerate()
            .map(|(i, &z)| z * psi.frequency_value(scale * norm2(grid.frequency(i))))
            .collect();
        if piece.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let space = inverse_transform(&SpectralField::new(grid, piece)?);
        let dil = 2f64.powi(j) * eps;
        let damped = Field::new(
            grid,
            space
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| v * table.eval(dil * norm2(grid.point(i))))
                .collect(),
        )?;
        for (a, c) in acc.iter_mut().zip(forward_transform(&damped).coeffs()) {
            *a += c;
        }
    }
    MultiplierSymbol::from_samples(grid, acc)
}

/// `H^(t, gamma)(xi - e1) eta~^(xi - e1)` with the origin cell averaged.
pub(crate) struct ShiftedKernel {
    pub oracle: HHatOracle,
    pub cutoff: BumpProfile,
}

impl SymbolFn for ShiftedKernel {
    fn value(&self, xi: [f64; 2]) -> Complex64 {
        let r = norm2([xi[0] - 1.0, xi[1]]);
        let c = self.cutoff.frequency_value(r);
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(self.oracle.value(r) * c, 0.0)
    }

    fn cell_sample(&self, xi: [f64; 2], cell: f64) -> Complex64 {
        let r = norm2([xi[0] - 1.0, xi[1]]);
        let v = self.value(xi);
        if r == 0.0 && !v.re.is_finite() {
            // The cutoff is 1 on the whole (tiny) cell.
            return Complex64::new(self.oracle.origin_cell_average(cell), 0.0);
        }
        v
    }
}
