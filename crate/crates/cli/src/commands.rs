//! Command implementations. Each returns a JSON result, a CSV table and
//! whether the scientific prediction (if any) held.

use std::f64::consts::PI;
use std::fs::OpenOptions;
use std::path::PathBuf;

use mlab_core::calculus::{bessel_asymptotics_check, h_hat_check, lorentz_sobolev_norm, SobolevParams};
use mlab_core::counterexample::{h_field, sharpness_case1, sharpness_case2, sigma_counter, tau};
use mlab_core::grid::{plane_wave, Field};
use mlab_core::hardy::{hardy_norm, make_atom, Cube};
use mlab_core::inequality::{
    append_ledger, check_embedding, check_hausdorff_young, check_holder, check_kato_ponce,
    check_minkowski, check_young, CheckReport, LemmaId, TrialSetup,
};
use mlab_core::littlewood_paley::{hormander_norm, make_bump, BumpKind};
use mlab_core::rearrangement::{extended_real, field_lorentz_norm, LorentzParams};
use mlab_core::GridSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{extended_real_option, GridConfig};
use crate::error::CliError;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

pub struct Output {
    pub result: Value,
    pub table: Table,
    /// False when a scientific prediction failed (exit status 1).
    pub matched: bool,
}

/// Grid and seed of a run, passed to every command.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub grid: GridConfig,
    pub seed: u64,
}

impl Context {
    fn spec(&self) -> Result<GridSpec, CliError> {
        Ok(self.grid.spec()?)
    }
}

fn num(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

// ---- norm ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FieldKind {
    Gaussian,
    PlaneWave,
    HField,
    Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    Lorentz,
    LorentzSobolev,
    Hardy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormParams {
    pub field: FieldKind,
    pub norm: NormKind,
    pub p: f64,
    #[serde(with = "extended_real")]
    pub q: f64,
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    /// First component of the plane-wave frequency.
    pub frequency: f64,
    pub cube_center: [f64; 2],
    pub cube_side: f64,
    pub atom_p: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            field: FieldKind::Gaussian,
            norm: NormKind::L2,
            p: 2.0,
            q: 2.0,
            s: 0.0,
            t: 1.0,
            gamma: 1.0,
            frequency: 1.0,
            cube_center: [0.0, 0.0],
            cube_side: 1.0,
            atom_p: 1.0,
        }
    }
}

fn build_field(params: &NormParams, grid: &GridSpec, seed: u64) -> Result<Field, CliError> {
    Ok(match params.field {
        FieldKind::Gaussian => Field::from_real_fn(*grid, |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp()),
        FieldKind::PlaneWave => plane_wave(*grid, [params.frequency, 0.0]),
        FieldKind::HField => h_field(params.t, params.gamma, grid)?,
        FieldKind::Atom => {
            let cube = Cube {
                center: params.cube_center,
                side: params.cube_side,
            };
            make_atom(grid, cube, params.atom_p, seed)?.values
        }
    })
}

fn field_id(params: &NormParams) -> String {
    match params.field {
        FieldKind::Gaussian => "gaussian".into(),
        FieldKind::PlaneWave => format!("plane_wave({})", params.frequency),
        FieldKind::HField => format!("h_field({},{})", params.t, params.gamma),
        FieldKind::Atom => format!(
            "atom([{},{}],{},{})",
            params.cube_center[0], params.cube_center[1], params.cube_side, params.atom_p
        ),
    }
}

pub fn norm(ctx: Context, params: &NormParams) -> Result<Output, CliError> {
    let grid = ctx.spec()?;
    let f = build_field(params, &grid, ctx.seed)?;
    let (norm_id, value) = match params.norm {
        NormKind::L2 => ("l2".to_string(), f.lp_norm(2.0)),
        NormKind::Lorentz => (
            format!("lorentz({},{})", num(params.p), num(params.q)),
            field_lorentz_norm(&f, LorentzParams::new(params.p, params.q)?),
        ),
        NormKind::LorentzSobolev => {
            let sob = SobolevParams {
                s: params.s,
                lorentz: LorentzParams::new(params.p, params.q)?,
            };
            (
                format!("lorentz_sobolev({},{},{})", num(params.p), num(params.q), params.s),
                lorentz_sobolev_norm(&f, sob),
            )
        }
        NormKind::Hardy => (format!("hardy({})", num(params.p)), hardy_norm(&f, params.p, None)?),
    };
    let field = field_id(params);
    let mut table = Table::new(&["field", "norm_id", "value"]);
    table.rows.push(vec![field.clone(), norm_id.clone(), num(value)]);
    Ok(Output {
        result: json!({ "field": field, "norm_id": norm_id, "value": value, "grid": grid }),
        table,
        matched: true,
    })
}

// ---- sharpness ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessParams {
    pub case: u8,
    /// Defaults to the grid dimension.
    pub n: Option<usize>,
    pub p: f64,
    pub s: f64,
    pub r: f64,
    #[serde(with = "extended_real")]
    pub q: f64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        SharpnessParams {
            case: 1,
            n: None,
            p: 1.0,
            s: 0.75,
            r: 1.0,
            q: 1.0,
        }
    }
}

pub fn sharpness(ctx: Context, params: &SharpnessParams) -> Result<Output, CliError> {
    let n = params.n.unwrap_or(ctx.grid.dim);
    let report = match params.case {
        1 => sharpness_case1(params.r, params.q, params.s, params.p, n)?,
        2 => sharpness_case2(params.q, params.s, params.p, n)?,
        c => return Err(CliError::Validation(format!("case must be 1 or 2, got {c}"))),
    };
    let mut table = Table::new(&["R", "lower_bound"]);
    for &(r, v) in &report.lower_sequence {
        table.rows.push(vec![num(r), num(v)]);
    }
    Ok(Output {
        matched: report.prediction_matched,
        result: serde_json::to_value(&report)?,
        table,
    })
}

// ---- bessel ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesselParams {
    pub s: f64,
    /// When given, the log-corrected kernel `H^(s, gamma)^` is checked instead of `G_s`.
    pub gamma: Option<f64>,
}

impl Default for BesselParams {
    fn default() -> Self {
        BesselParams { s: 2.0, gamma: None }
    }
}

pub fn bessel(ctx: Context, params: &BesselParams) -> Result<Output, CliError> {
    let grid = ctx.spec()?;
    let report = match params.gamma {
        None => bessel_asymptotics_check(params.s, &grid)?,
        Some(g) => h_hat_check(params.s, g, &grid)?,
    };
    let mut table = Table::new(&[
        "s", "gamma", "C_exp", "ratio_low", "ratio_high", "min_value", "positive", "decay_finite",
    ]);
    table.rows.push(vec![
        num(report.s),
        report.gamma.map_or(String::new(), num),
        num(report.c_exp),
        num(report.ratio_low),
        num(report.ratio_high),
        num(report.min_value),
        report.positive.to_string(),
        report.decay_finite.to_string(),
    ]);
    Ok(Output {
        matched: report.positive && report.decay_finite,
        result: serde_json::to_value(&report)?,
        table,
    })
}

// ---- inequalities ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LemmaChoice {
    All,
    Young,
    HausdorffYoung,
    KatoPonce,
    Minkowski,
    Holder,
    Embedding,
}

impl LemmaChoice {
    fn lemmas(self) -> Vec<LemmaId> {
        match self {
            LemmaChoice::All => LemmaId::ALL.to_vec(),
            LemmaChoice::Young => vec![LemmaId::Young],
            LemmaChoice::HausdorffYoung => vec![LemmaId::HausdorffYoung],
            LemmaChoice::KatoPonce => vec![LemmaId::KatoPonce],
            LemmaChoice::Minkowski => vec![LemmaId::Minkowski],
            LemmaChoice::Holder => vec![LemmaId::Holder],
            LemmaChoice::Embedding => vec![LemmaId::Embedding],
        }
    }
}

/// Unset exponents take per-lemma defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalityParams {
    pub lemma: LemmaChoice,
    pub trials: usize,
    pub p: Option<f64>,
    #[serde(with = "extended_real_option")]
    pub q: Option<f64>,
    #[serde(with = "extended_real_option")]
    pub r: Option<f64>,
    #[serde(with = "extended_real_option")]
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub q_conv: Option<f64>,
    pub q_inner: Option<f64>,
    pub family_size: Option<usize>,
    pub p0: Option<f64>,
    #[serde(with = "extended_real_option")]
    pub r0: Option<f64>,
    pub s0: Option<f64>,
    pub p1: Option<f64>,
    #[serde(with = "extended_real_option")]
    pub r1: Option<f64>,
    pub s1: Option<f64>,
    pub profile: BumpKind,
    /// JSON-lines file the reports are appended to.
    pub ledger: Option<PathBuf>,
}

impl Default for InequalityParams {
    fn default() -> Self {
        InequalityParams {
            lemma: LemmaChoice::All,
            trials: 100,
            p: None,
            q: None,
            r: None,
            t: None,
            s: None,
            q_conv: None,
            q_inner: None,
            family_size: None,
            p0: None,
            r0: None,
            s0: None,
            p1: None,
            r1: None,
            s1: None,
            profile: BumpKind::Psi,
            ledger: None,
        }
    }
}

fn run_lemma(id: LemmaId, pr: &InequalityParams, setup: &TrialSetup) -> Result<CheckReport, CliError> {
    let n = setup.grid.dim() as f64;
    let report = match id {
        LemmaId::Young => check_young(
            pr.p.unwrap_or(1.5),
            pr.q_conv.unwrap_or(1.2),
            pr.r.unwrap_or(2.0),
            pr.t.unwrap_or(1.0),
            setup,
        )?,
        LemmaId::HausdorffYoung => check_hausdorff_young(pr.p.unwrap_or(4.0), pr.r.unwrap_or(1.0), setup)?,
        LemmaId::KatoPonce => {
            let theta = make_bump(pr.profile, setup.grid.dim())?;
            check_kato_ponce(&theta, pr.p.unwrap_or(2.0), pr.r.unwrap_or(1.0), pr.s.unwrap_or(0.75), setup)?
        }
        LemmaId::Minkowski => check_minkowski(
            pr.q_inner.unwrap_or(1.0),
            pr.p.unwrap_or(2.0),
            pr.r.unwrap_or(1.0),
            pr.family_size.unwrap_or(8),
            setup,
        )?,
        LemmaId::Holder => check_holder(pr.p.unwrap_or(3.0), pr.q.unwrap_or(1.0), setup)?,
        LemmaId::Embedding => {
            let p0 = pr.p0.unwrap_or(4.0 / 3.0);
            let p1 = pr.p1.unwrap_or(2.0);
            let s0 = pr.s0.unwrap_or(0.75);
            // Default target smoothness sits on the Sobolev line.
            let s1 = pr.s1.unwrap_or(s0 - (n / p0 - n / p1));
            check_embedding(p0, pr.r0.unwrap_or(2.0), s0, p1, pr.r1.unwrap_or(2.0), s1, setup)?
        }
    };
    Ok(report)
}

pub fn inequalities(ctx: Context, params: &InequalityParams) -> Result<Output, CliError> {
    let setup = TrialSetup::new(ctx.spec()?, params.trials, ctx.seed)?;
    let reports = params
        .lemma
        .lemmas()
        .into_iter()
        .map(|id| run_lemma(id, params, &setup))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &params.ledger {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        append_ledger(std::io::BufWriter::new(file), &reports)?;
    }
    let mut table = Table::new(&["lemma", "params", "trials", "worst_ratio", "ceiling", "pass"]);
    let mut summary = Vec::new();
    for r in &reports {
        let plist: Vec<String> = r.params.iter().map(|p| format!("{}={}", p.name, num(p.value))).collect();
        table.rows.push(vec![
            r.lemma_id.name().to_string(),
            plist.join(";"),
            r.trials.to_string(),
            num(r.worst_ratio),
            r.ceiling.map_or(String::new(), num),
            r.pass.to_string(),
        ]);
        summary.push(json!({ "lemma": r.lemma_id, "worst_ratio": r.worst_ratio, "pass": r.pass }));
    }
    Ok(Output {
        matched: reports.iter().all(|r| r.pass),
        result: json!({ "summary": summary, "reports": reports }),
        table,
    })
}

// ---- hormander ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HormanderParams {
    pub t: f64,
    pub gamma: f64,
    /// Smoothness of the piece norm.
    pub s: f64,
    /// Lorentz indices of the piece norm; `p` defaults to the critical index for `p_hardy`.
    pub p: Option<f64>,
    #[serde(with = "extended_real")]
    pub q: f64,
    pub p_hardy: f64,
    pub j_lo: Option<i32>,
    pub j_hi: Option<i32>,
    /// Defaults to `dim,0.2,512` in 1D and `dim,0.2,128` in 2D.
    pub piece_grid: Option<GridConfig>,
}

impl Default for HormanderParams {
    fn default() -> Self {
        HormanderParams {
            t: 0.875,
            gamma: 1.0,
            s: 0.75,
            p: None,
            q: 1.0,
            p_hardy: 1.0,
            j_lo: None,
            j_hi: None,
            piece_grid: None,
        }
    }
}

pub fn hormander(ctx: Context, params: &HormanderParams) -> Result<Output, CliError> {
    let grid = ctx.spec()?;
    let dim = grid.dim();
    let piece = params.piece_grid.unwrap_or(GridConfig {
        dim,
        half_width: 0.2,
        samples: if dim == 1 { 512 } else { 128 },
    });
    let piece_grid = piece.spec()?;
    let p = match params.p {
        Some(p) => p,
        None => tau(dim, params.s, params.p_hardy)?,
    };
    let j_range = match (params.j_lo, params.j_hi) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(CliError::Validation("give both j_lo and j_hi or neither".into())),
    };
    let sigma = sigma_counter(params.t, params.gamma, &grid)?;
    let psi = make_bump(BumpKind::Psi, dim)?;
    let lorentz = LorentzParams::new(p, params.q)?;
    let report = hormander_norm(&sigma, params.s, lorentz, j_range, &psi, &piece_grid)?;
    let mut table = Table::new(&["j", "norm"]);
    for piece in &report.pieces {
        table.rows.push(vec![piece.j.to_string(), num(piece.norm)]);
    }
    Ok(Output {
        result: json!({
            "symbol": format!("sigma({},{})", params.t, params.gamma),
            "lorentz": lorentz,
            "piece_grid": piece,
            "report": report,
        }),
        table,
        matched: true,
    })
}
