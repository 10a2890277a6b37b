//! Randomized checkers for the Lorentz-space inequalities.
//!
//! Each checker draws seeded wave-packet inputs, evaluates both sides of an
//! inequality on the grid and reports the largest ratio `LHS / RHS`. Only the
//! inequalities whose constant is exactly 1 on the grid carry a ceiling; the
//! others report the measured constant.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{fractional_laplacian, lorentz_sobolev_norm, SobolevParams};
use crate::error::{invalid, Result};
use crate::grid::{convolve, forward_transform, Field, GridSpec};
use crate::littlewood_paley::{BumpKind, BumpProfile};
use crate::random::{trial_rng, PacketRanges, WavePackets};
use crate::rearrangement::{field_lorentz_norm, lorentz_norm, LorentzParams, RearrangementProfile};

/// Slack allowed above a ceiling of 1 for rounding.
pub const CEILING_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    Young,
    HausdorffYoung,
    KatoPonce,
    Minkowski,
    Holder,
    Embedding,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::Young,
        LemmaId::HausdorffYoung,
        LemmaId::KatoPonce,
        LemmaId::Minkowski,
        LemmaId::Holder,
        LemmaId::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Young => "young",
            LemmaId::HausdorffYoung => "hausdorff_young",
            LemmaId::KatoPonce => "kato_ponce",
            LemmaId::Minkowski => "minkowski",
            LemmaId::Holder => "holder",
            LemmaId::Embedding => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(with = "crate::rearrangement::extended_real")]
    pub value: f64,
}

fn params(list: &[(&str, f64)]) -> Vec<Param> {
    list.iter()
        .map(|&(name, value)| Param {
            name: name.to_string(),
            value,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub lemma_id: LemmaId,
    pub params: Vec<Param>,
    pub trials: usize,
    pub worst_ratio: f64,
    /// Declared bound on `worst_ratio`, if the constant is known.
    pub ceiling: Option<f64>,
    /// `worst_ratio <= ceiling`, or finiteness when there is no ceiling.
    pub pass: bool,
    /// The multiplier profile, for checkers that take one.
    pub profile: Option<BumpKind>,
    pub seed: u64,
    pub grid: GridSpec,
}

impl CheckReport {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

/// Where and how often a checker samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSetup {
    pub grid: GridSpec,
    pub trials: usize,
    pub seed: u64,
    /// Every random input is multiplied by this; ratios are invariant under it.
    pub amplitude: f64,
    pub ranges: PacketRanges,
}

impl TrialSetup {
    pub fn new(grid: GridSpec, trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            invalid!("at least one trial is required");
        }
        Ok(TrialSetup {
            grid,
            trials,
            seed,
            amplitude: 1.0,
            ranges: PacketRanges::default(),
        })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_ranges(mut self, ranges: PacketRanges) -> Self {
        self.ranges = ranges;
        self
    }

    /// `count` independent inputs for trial `trial`.
    fn inputs(&self, trial: usize, count: usize) -> Result<Vec<Field>> {
        let mut rng = trial_rng(self.seed, trial as u64);
        (0..count)
            .map(|_| {
                let f = WavePackets::draw(self.grid.dim(), self.ranges, &mut rng)?.sample(&self.grid)?;
                Ok(f.scale(self.amplitude.into()))
            })
            .collect()
    }

    fn worst(&self, ratio: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<f64> {
        let ratios: Vec<f64> = (0..self.trials).into_par_iter().map(ratio).collect::<Result<_>>()?;
        if let Some(bad) = ratios.iter().find(|r| !r.is_finite()) {
            invalid!("a trial produced a non-finite ratio {bad}");
        }
        Ok(ratios.into_iter().fold(0.0, f64::max))
    }

    fn report(
        &self,
        lemma_id: LemmaId,
        params: Vec<Param>,
        worst_ratio: f64,
        ceiling: Option<f64>,
    ) -> CheckReport {
        let pass = match ceiling {
            Some(c) => worst_ratio <= c,
            None => worst_ratio.is_finite(),
        };
        CheckReport {
            lemma_id,
            params,
            trials: self.trials,
            worst_ratio,
            ceiling,
            pass,
            profile: None,
            seed: self.seed,
            grid: self.grid,
        }
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_second_index(name: &str, r: f64) -> Result<()> {
    if !(r > 0.0) || r.is_nan() {
        invalid!("{name} must lie in (0, inf], got {r}");
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// `||f * g||_{L^{r,t}} <= C ||f||_{L^{p,t}} ||g||_{L^q}` with `1/r + 1 = 1/p + 1/q`.
pub fn check_young(p: f64, q_conv: f64, r: f64, t: f64, setup: &TrialSetup) -> Result<CheckReport> {
    if !(1.0 < p && p <= r && r.is_finite()) {
        invalid!("Young requires 1 < p <= r < inf, got p = {p}, r = {r}");
    }
    if !(1.0 <= q_conv && q_conv < r) {
        invalid!("Young requires 1 <= q < r, got q = {q_conv}, r = {r}");
    }
    if !close(1.0 / r + 1.0, 1.0 / p + 1.0 / q_conv) {
        invalid!("Young requires 1/r + 1 = 1/p + 1/q");
    }
    check_second_index("t", t)?;
    let lhs_norm = LorentzParams::new(r, t)?;
    let f_norm = LorentzParams::new(p, t)?;
    let g_norm = LorentzParams::lebesgue(q_conv)?;
    let worst = setup.worst(|i| {
        let fg = setup.inputs(i, 2)?;
        let conv = convolve(&fg[0], &fg[1])?;
        let rhs = field_lorentz_norm(&fg[0], f_norm) * field_lorentz_norm(&fg[1], g_norm);
        Ok(field_lorentz_norm(&conv, lhs_norm) / rhs)
    })?;
    // Only the L^2 branch is classical Young with constant 1.
    let ceiling = (p == 2.0 && r == 2.0 && q_conv == 1.0 && t == 2.0).then_some(1.0 + CEILING_SLACK);
    Ok(setup.report(
        LemmaId::Young,
        params(&[("p", p), ("q_conv", q_conv), ("r", r), ("t", t)]),
        worst,
        ceiling,
    ))
}

/// Rearrangement profile of `|f^|` on the frequency lattice.
pub fn spectrum_profile(f: &Field) -> RearrangementProfile {
    let spec = forward_transform(f);
    let cell = f.grid().frequency_spacing().powi(f.grid().dim() as i32);
    let moduli: Vec<f64> = spec.coeffs().iter().map(|z| z.norm()).collect();
    RearrangementProfile::from_moduli(&moduli, cell)
}

/// `||f^||_{L^{p,r}} <= C ||f||_{L^{p',r}}` for `2 < p < inf`. Measured only.
pub fn check_hausdorff_young(p: f64, r: f64, setup: &TrialSetup) -> Result<CheckReport> {
    if !(2.0 < p && p.is_finite()) {
        invalid!("Hausdorff-Young requires 2 < p < inf, got {p}");
    }
    check_second_index("r", r)?;
    let lhs_norm = LorentzParams::new(p, r)?;
    let rhs_norm = LorentzParams::new(conjugate(p), r)?;
    let worst = setup.worst(|i| {
        let f = setup.inputs(i, 1)?.remove(0);
        Ok(lorentz_norm(&spectrum_profile(&f), lhs_norm) / field_lorentz_norm(&f, rhs_norm))
    })?;
    Ok(setup.report(
        LemmaId::HausdorffYoung,
        params(&[("p", p), ("r", r)]),
        worst,
        None,
    ))
}

/// `||theta f||_{L^{p,r}_s} <= C ||f||_{L^{p,r}_s}` with `theta` the space side of a bump.
pub fn check_kato_ponce(
    theta: &BumpProfile,
    p: f64,
    r: f64,
    s: f64,
    setup: &TrialSetup,
) -> Result<CheckReport> {
    if theta.dim() != setup.grid.dim() {
        invalid!("profile dimension {} differs from the grid's {}", theta.dim(), setup.grid.dim());
    }
    let weight = theta.space_field(&setup.grid)?;
    let mut report = check_kato_ponce_weight(&weight, p, r, s, setup)?;
    report.profile = Some(theta.kind());
    Ok(report)
}

/// As [`check_kato_ponce`] with an arbitrary sampled weight.
///
/// `s = 0` is accepted: it is the pointwise-multiplier bound, with constant
/// at most `sup |theta|`.
pub fn check_kato_ponce_weight(
    weight: &Field,
    p: f64,
    r: f64,
    s: f64,
    setup: &TrialSetup,
) -> Result<CheckReport> {
    setup.grid.check_same(weight.grid())?;
    if !(1.0 < p && p.is_finite()) {
        invalid!("Kato-Ponce requires 1 < p < inf, got {p}");
    }
    if !(s >= 0.0 && s.is_finite()) {
        invalid!("Kato-Ponce requires s >= 0, got {s}");
    }
    check_second_index("r", r)?;
    let norm = SobolevParams {
        s,
        lorentz: LorentzParams::new(p, r)?,
    };
    let worst = setup.worst(|i| {
        let f = setup.inputs(i, 1)?.remove(0);
        Ok(lorentz_sobolev_norm(&weight.mul(&f)?, norm) / lorentz_sobolev_norm(&f, norm))
    })?;
    Ok(setup.report(
        LemmaId::KatoPonce,
        params(&[("p", p), ("r", r), ("s", s)]),
        worst,
        None,
    ))
}

/// `||(sum |f_k|^q)^{1/q}||_{L^{p,r}} <= C (sum ||f_k||_{L^{p,r}}^q)^{1/q}` for `1 <= q < p`.
pub fn check_minkowski(
    q_inner: f64,
    p: f64,
    r: f64,
    family_size: usize,
    setup: &TrialSetup,
) -> Result<CheckReport> {
    if !(1.0 <= q_inner && q_inner < p && p.is_finite()) {
        invalid!("Minkowski requires 1 <= q < p < inf, got q = {q_inner}, p = {p}");
    }
    if family_size == 0 {
        invalid!("the family must have at least one member");
    }
    check_second_index("r", r)?;
    let norm = LorentzParams::new(p, r)?;
    let worst = setup.worst(|i| {
        let family = setup.inputs(i, family_size)?;
        Ok(minkowski_ratio(&family, q_inner, norm))
    })?;
    Ok(setup.report(
        LemmaId::Minkowski,
        params(&[("q_inner", q_inner), ("p", p), ("r", r), ("family_size", family_size as f64)]),
        worst,
        None,
    ))
}

/// Both sides of the vector-valued inequality for one family on a common grid.
pub fn minkowski_ratio(family: &[Field], q_inner: f64, norm: LorentzParams) -> f64 {
    let grid = *family[0].grid();
    let mut acc = vec![0.0; grid.len()];
    for f in family {
        for (a, v) in acc.iter_mut().zip(f.values()) {
            *a += v.norm().powf(q_inner);
        }
    }
    let root: Vec<f64> = acc.iter().map(|a| a.powf(1.0 / q_inner)).collect();
    let lhs = lorentz_norm(&RearrangementProfile::from_moduli(&root, grid.cell_measure()), norm);
    let rhs = family
        .iter()
        .map(|f| field_lorentz_norm(f, norm).powf(q_inner))
        .sum::<f64>()
        .powf(1.0 / q_inner);
    lhs / rhs
}

/// `int |f g| <= ||f||_{L^{p,q}} ||g||_{L^{p',q'}}`, constant 1.
///
/// Odd trials pair `f` with the co-monotone `|f|^{p-1}`, which is extremal
/// when `q = p`.
pub fn check_holder(p: f64, q: f64, setup: &TrialSetup) -> Result<CheckReport> {
    if !(1.0 < p && p.is_finite()) {
        invalid!("Holder requires 1 < p < inf, got {p}");
    }
    if !(q >= 1.0) {
        invalid!("Holder requires 1 <= q <= inf, got {q}");
    }
    let f_norm = LorentzParams::new(p, q)?;
    let g_norm = LorentzParams::new(conjugate(p), conjugate(q))?;
    let worst = setup.worst(|i| {
        let mut fg = setup.inputs(i, 2)?;
        if i % 2 == 1 {
            let grid = *fg[0].grid();
            let power: Vec<f64> = fg[0].moduli().iter().map(|m| m.powf(p - 1.0)).collect();
            fg[1] = Field::from_real(grid, &power)?;
        }
        Ok(holder_ratio(&fg[0], &fg[1], f_norm, g_norm))
    })?;
    Ok(setup.report(
        LemmaId::Holder,
        params(&[("p", p), ("q", q)]),
        worst,
        Some(1.0 + CEILING_SLACK),
    ))
}

pub fn holder_ratio(f: &Field, g: &Field, f_norm: LorentzParams, g_norm: LorentzParams) -> f64 {
    let lhs: f64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a.norm() * b.norm())
        .sum::<f64>()
        * f.grid().cell_measure();
    lhs / (field_lorentz_norm(f, f_norm) * field_lorentz_norm(g, g_norm))
}

/// `||f||_{L^{p1,r1}_{s1}} <= C ||f||_{L^{p0,r0}_{s0}}` in either admissible branch.
#[allow(clippy::too_many_arguments)]
pub fn check_embedding(
    p0: f64,
    r0: f64,
    s0: f64,
    p1: f64,
    r1: f64,
    s1: f64,
    setup: &TrialSetup,
) -> Result<CheckReport> {
    for (name, p) in [("p0", p0), ("p1", p1)] {
        if !(1.0 < p && p.is_finite()) {
            invalid!("{name} must lie in (1, inf), got {p}");
        }
    }
    check_second_index("r0", r0)?;
    check_second_index("r1", r1)?;
    if !(s0.is_finite() && s1.is_finite()) {
        invalid!("smoothness indices must be finite");
    }
    let n = setup.grid.dim() as f64;
    let same_p = p0 == p1 && s0 >= s1 && r0 <= r1;
    let gap = n / p0 - n / p1;
    let sobolev = gap > 0.0 && close(s0 - s1, gap);
    if !(same_p || sobolev) {
        invalid!(
            "embedding needs p0 = p1, s0 >= s1, r0 <= r1, or s0 - s1 = n/p0 - n/p1 > 0; \
             got s0 - s1 = {} and n/p0 - n/p1 = {gap}",
            s0 - s1
        );
    }
    let source = LorentzParams::new(p0, r0)?;
    let target = LorentzParams::new(p1, r1)?;
    let worst = setup.worst(|i| {
        let f = setup.inputs(i, 1)?.remove(0);
        let num = field_lorentz_norm(&fractional_laplacian(&f, s1), target);
        let den = field_lorentz_norm(&fractional_laplacian(&f, s0), source);
        Ok(num / den)
    })?;
    Ok(setup.report(
        LemmaId::Embedding,
        params(&[("p0", p0), ("r0", r0), ("s0", s0), ("p1", p1), ("r1", r1), ("s1", s1)]),
        worst,
        None,
    ))
}

/// Appends one JSON line per report.
pub fn append_ledger<W: Write>(mut out: W, reports: &[CheckReport]) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
