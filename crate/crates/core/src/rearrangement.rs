//! Distribution functions, decreasing rearrangements and Lorentz quasi-norms.
//!
//! A sampled field is a step function with cells of measure `h^n`, so its
//! decreasing rearrangement is again a step function and every Lorentz
//! quasi-norm has a closed form on each step. Nothing here uses quadrature.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::grid::Field;

/// One step of `f*`: the value on `[previous cumulative, cumulative)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub value: f64,
    pub cumulative: f64,
}

/// Right-continuous non-increasing step function `f*` on `(0, total)`.
///
/// Values are strictly decreasing and cumulative measures strictly increasing.
/// `f*` vanishes beyond the last cumulative measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementProfile {
    steps: Vec<Step>,
}

impl RearrangementProfile {
    /// Builds a profile from `(value, cumulative_measure)` pairs, validating the
    /// monotonicity invariants.
    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        let mut prev_t = 0.0;
        let mut prev_v = f64::INFINITY;
        for s in &steps {
            if !(s.value >= 0.0 && s.value.is_finite()) {
                invalid!("profile values must be finite and non-negative, got {}", s.value);
            }
            if s.value >= prev_v {
                invalid!("profile values must be strictly decreasing");
            }
            if !(s.cumulative > prev_t && s.cumulative.is_finite()) {
                invalid!("cumulative measures must be strictly increasing");
            }
            prev_t = s.cumulative;
            prev_v = s.value;
        }
        Ok(Self { steps })
    }

    /// Rearranges moduli that each carry measure `cell`.
    pub fn from_moduli(moduli: &[f64], cell: f64) -> Self {
        let mut sorted: Vec<f64> = moduli.to_vec();
        sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        Self::from_sorted_cells(&sorted, cell)
    }

    /// Merges a non-increasing sequence of cell values into steps.
    fn from_sorted_cells(sorted: &[f64], cell: f64) -> Self {
        let mut steps: Vec<Step> = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            let t = (i + 1) as f64 * cell;
            match steps.last_mut() {
                Some(last) if last.value == v => last.cumulative = t,
                _ => steps.push(Step {
                    value: v,
                    cumulative: t,
                }),
            }
        }
        Self { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Measure of the support of the underlying field (last cumulative).
    pub fn total_measure(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative)
    }

    /// `f*(t)` for `t >= 0`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let idx = self.steps.partition_point(|s| s.cumulative <= t);
        self.steps.get(idx).map_or(0.0, |s| s.value)
    }

    /// Measure of `{f* > s}`.
    pub fn distribution(&self, s: f64) -> f64 {
        let idx = self.steps.partition_point(|st| st.value > s);
        if idx == 0 {
            0.0
        } else {
            self.steps[idx - 1].cumulative
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 {
            let total = self.total_measure();
            return Self::from_steps(if total > 0.0 {
                vec![Step {
                    value: 0.0,
                    cumulative: total,
                }]
            } else {
                vec![]
            });
        }
        Self::from_steps(
            self.steps
                .iter()
                .map(|s| Step {
                    value: s.value * c.abs(),
                    cumulative: s.cumulative,
                })
                .collect(),
        )
    }

    /// Writes `value,cumulative_measure` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "cumulative_measure"])?;
        for s in &self.steps {
            w.serialize((s.value, s.cumulative))?;
        }
        w.flush()
    }
}

/// Lorentz indices `(p, q)` with `0 < p < inf` and `0 < q <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    pub p: f64,
    #[serde(with = "crate::rearrangement::extended_real")]
    pub q: f64,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            invalid!("Lorentz index p must lie in (0, inf), got {p}");
        }
        if !(q > 0.0) || q.is_nan() {
            invalid!("Lorentz index q must lie in (0, inf], got {q}");
        }
        Ok(Self { p, q })
    }

    /// The Lebesgue case `L^{p,p}`.
    pub fn lebesgue(p: f64) -> Result<Self> {
        Self::new(p, p)
    }
}

/// Serde helper writing `+inf` as the string `"inf"` so JSON stays valid.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("not a number: {s}"))),
        }
    }
}

/// `d_f(s) = |{x : |f(x)| > s}|` at grid level.
pub fn distribution_function(f: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        invalid!("distribution threshold must be non-negative, got {s}");
    }
    let count = f.values().iter().filter(|v| v.norm() > s).count();
    Ok(count as f64 * f.grid().cell_measure())
}

/// Sorted moduli of the field, one cell of measure `h^n` each, equal values merged.
pub fn decreasing_rearrangement(f: &Field) -> RearrangementProfile {
    RearrangementProfile::from_moduli(&f.moduli(), f.grid().cell_measure())
}

/// `b^e - a^e` for `0 <= a < b` without cancellation when `a` is close to `b`.
fn power_difference(a: f64, b: f64, e: f64) -> f64 {
    if a == 0.0 {
        b.powf(e)
    } else {
        a.powf(e) * (e * ((b - a) / a).ln_1p()).exp_m1()
    }
}

/// `||f||_{L^{p,q}}` of a step profile, in closed form.
///
/// For `q < inf` each step contributes `v^q (p/q) (b^{q/p} - a^{q/p})`; for
/// `q = inf` the supremum of `t^{1/p} f*(t)` is approached at the right end of
/// each step.
pub fn lorentz_norm(profile: &RearrangementProfile, params: LorentzParams) -> f64 {
    let LorentzParams { p, q } = params;
    if q.is_infinite() {
        return profile
            .steps()
            .iter()
            .map(|s| s.value * s.cumulative.powf(1.0 / p))
            .fold(0.0, f64::max);
    }
    let e = q / p;
    // Normalize by the largest value so that v^q neither overflows nor underflows.
    let vmax = profile.steps().first().map_or(0.0, |s| s.value);
    if vmax == 0.0 {
        return 0.0;
    }
    let mut prev = 0.0;
    let mut acc = 0.0;
    for s in profile.steps() {
        if s.value > 0.0 {
            acc += (s.value / vmax).powf(q) * power_difference(prev, s.cumulative, e);
        }
        prev = s.cumulative;
    }
    vmax * ((p / q) * acc).powf(1.0 / q)
}

/// Lorentz quasi-norm of a field.
pub fn field_lorentz_norm(f: &Field, params: LorentzParams) -> f64 {
    lorentz_norm(&decreasing_rearrangement(f), params)
}

/// Sorting permutation: `rank[x]` is the position of cell `x` in `f*`, so that
/// `|f(x)| = f*(rank[x] * h^n)`. Ties are broken by flat grid index.
pub fn transport_map(f: &Field) -> Vec<usize> {
    let moduli = f.moduli();
    let mut order: Vec<usize> = (0..moduli.len()).collect();
    order.sort_by(|&a, &b| {
        moduli[b]
            .partial_cmp(&moduli[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut rank = vec![0usize; moduli.len()];
    for (r, &idx) in order.iter().enumerate() {
        rank[idx] = r;
    }
    rank
}

/// Volume of the unit ball in `R^dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        d => {
            let d = d as f64;
            std::f64::consts::PI.powf(d / 2.0) / statrs::function::gamma::gamma(d / 2.0 + 1.0)
        }
    }
}

/// A radial profile `g(r)` constant on the shells `[i dr, (i+1) dr)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            invalid!("radial spacing must be positive, got {spacing}");
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            invalid!("radial profile values must be finite and non-negative");
        }
        Ok(Self { spacing, values })
    }

    pub fn from_fn(spacing: f64, shells: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(spacing, (0..shells).map(|i| g(i as f64 * spacing)).collect())
    }
}

/// `f*(t) = g*((t / Omega_n)^{1/n})` for the radial extension `f(x) = g(|x|)`.
///
/// `g*` is the rearrangement of `g` on the half line. The law is exact for
/// `dim = 1` and for radially non-increasing `g`; for non-monotone `g` in two
/// dimensions it describes `g*` transported by the ball volume, not the
/// rearrangement of the annular extension.
pub fn radial_profile_rearrangement(g: &RadialProfile, dim: usize) -> Result<RearrangementProfile> {
    if dim == 0 {
        return Err(LabError::InvalidParameter("dimension must be positive".into()));
    }
    let g_star = RearrangementProfile::from_moduli(&g.values, g.spacing);
    let omega = unit_ball_volume(dim);
    RearrangementProfile::from_steps(
        g_star
            .steps()
            .iter()
            .map(|s| Step {
                value: s.value,
                cumulative: omega * s.cumulative.powi(dim as i32),
            })
            .collect(),
    )
}
