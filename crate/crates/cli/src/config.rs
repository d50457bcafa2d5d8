//! Run configuration: TOML with `[wire]`, `[lead.left]`, `[lead.right]` and
//! `[task]` sections.
//!
//! Parsing keeps source spans so that validation errors point at a line.
//! [`RunConfig::echo`] renders the fully resolved configuration in the same
//! schema, so an echoed config parses back to an identical [`RunConfig`].

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use kitaev_core::{
    Boundary, ClassifyThresholds, Complex, LeadConfig64, QuadratureSpec, SelfEnergy, SweepSpec64, WireConfig64,
    WrapPairing,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Spectrum,
    Profiles,
    DefectSweep,
    Conductance,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Spectrum => "spectrum",
            TaskKind::Profiles => "profiles",
            TaskKind::DefectSweep => "defect_sweep",
            TaskKind::Conductance => "conductance",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BoundaryName {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WrapName {
    Uniform,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeName {
    None,
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefectFile {
    site: Spanned<i64>,
    mu_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFile {
    n: Spanned<i64>,
    j: f64,
    delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_im: Option<f64>,
    mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<BoundaryName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wrap_pairing: Option<WrapName>,
    #[serde(default)]
    defects: Vec<DefectFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadFile {
    site: Spanned<i64>,
    lambda: Spanned<f64>,
    omega_c: Spanned<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    temperature: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<LeadFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<LeadFile>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<Spanned<TaskKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    self_energy: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quad_rel_tol: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quad_abs_tol: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_gap_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    byproduct_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    write_matrix: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pairs: Option<Spanned<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defect_site: Option<Spanned<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_p: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_min: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Spanned<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refine: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_peak_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contact_sites: Option<Spanned<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    current_biases: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    wire: WireFile,
    #[serde(default, skip_serializing_if = "leads_empty")]
    lead: LeadsFile,
    #[serde(default)]
    task: TaskFile,
}

fn leads_empty(l: &LeadsFile) -> bool {
    l.left.is_none() && l.right.is_none()
}

/// Parameters that only some tasks use.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskParams {
    Spectrum { write_matrix: bool },
    /// Pair ids to profile; empty means every in-gap pair.
    Profiles { pairs: Vec<usize> },
    DefectSweep { site: usize, potentials: Vec<f64> },
    Conductance {
        sweep: SweepSpec64,
        /// Left-lead contact sites, one sweep each.
        contact_sites: Vec<usize>,
        current_biases: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wire: WireConfig64,
    pub leads: Vec<LeadConfig64>,
    pub task: TaskKind,
    pub params: TaskParams,
    pub out_dir: PathBuf,
    pub self_energy: SelfEnergy,
    pub quad: QuadratureSpec<f64>,
    pub thresholds: ClassifyThresholds<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<TaskKind>,
    pub out_dir: Option<PathBuf>,
    pub self_energy: Option<SelfEnergy>,
    pub quad_rel_tol: Option<f64>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> Option<usize> {
        if span.start == 0 && span.end == 0 {
            return None;
        }
        Some(self.text[..span.start.min(self.text.len())].matches('\n').count() + 1)
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError { line: self.line(span), message: message.into() })
    }

    fn site(&self, v: &Spanned<i64>, n: usize, what: &str) -> Result<usize, ConfigError> {
        let s = *v.get_ref();
        if s < 1 || s as usize > n {
            return self.err(v.span(), format!("{what} {s} outside 1..={n}"));
        }
        Ok(s as usize)
    }
}

fn missing(field: &str, task: TaskKind) -> ConfigError {
    ConfigError { line: None, message: format!("task `{task}` requires `task.{field}`") }
}

fn spanned<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with(text, &Overrides::default())
}

pub fn parse_with(text: &str, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ConfigError { line, message: e.message().trim().to_string() }
    })?;
    resolve(file, &Ctx { text }, ov)
}

fn resolve(file: ConfigFile, ctx: &Ctx<'_>, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let w = &file.wire;
    let n_raw = *w.n.get_ref();
    if n_raw < 2 {
        return ctx.err(w.n.span(), format!("wire.n must be >= 2, got {n_raw}"));
    }
    let n = n_raw as usize;
    let mut wire = match w.boundary.unwrap_or(BoundaryName::Open) {
        BoundaryName::Open => WireConfig64::open(n, w.j, 0.0, w.mu),
        BoundaryName::Closed => WireConfig64::closed(n, w.j, 0.0, w.mu),
    };
    wire = wire.with_pairing(Complex::new(w.delta, w.delta_im.unwrap_or(0.0)));
    if w.wrap_pairing == Some(WrapName::AsPrinted) {
        wire = wire.with_wrap_pairing(WrapPairing::AsPrinted);
    }
    for d in &w.defects {
        let site = ctx.site(&d.site, n, "defect site")?;
        if wire.defects.iter().any(|e| e.site == site) {
            return ctx.err(d.site.span(), format!("defect site {site} listed twice"));
        }
        wire = wire.with_defect(site, d.mu_p);
    }
    wire.validate().map_err(|e| ConfigError { line: None, message: e.to_string() })?;

    let mut leads = Vec::new();
    for (name, lead) in [("left", &file.lead.left), ("right", &file.lead.right)] {
        let Some(l) = lead else { continue };
        if name == "right" && file.lead.left.is_none() {
            return ctx.err(l.site.span(), "lead.right given without lead.left");
        }
        let site = ctx.site(&l.site, n, &format!("lead.{name}.site"))?;
        if !(*l.lambda.get_ref() >= 0.0) {
            return ctx.err(l.lambda.span(), format!("lead.{name}.lambda must be >= 0"));
        }
        if !(*l.omega_c.get_ref() > 0.0) {
            return ctx.err(l.omega_c.span(), format!("lead.{name}.omega_c must be > 0"));
        }
        let mut lc = LeadConfig64::new(site, *l.lambda.get_ref(), *l.omega_c.get_ref())
            .with_chem_potential(l.mu.unwrap_or(0.0));
        if let Some(t) = &l.temperature {
            if !(*t.get_ref() >= 0.0) {
                return ctx.err(t.span(), format!("lead.{name}.temperature must be >= 0"));
            }
            lc = lc.with_temperature(*t.get_ref());
        }
        leads.push(lc);
    }

    let t = &file.task;
    let task = match (&t.kind, ov.task) {
        (Some(k), Some(o)) if *k.get_ref() != o => {
            return ctx.err(k.span(), format!("config is for task `{}`, but `{o}` was requested", k.get_ref()));
        }
        (Some(k), _) => *k.get_ref(),
        (None, Some(o)) => o,
        (None, None) => return Err(ConfigError { line: None, message: "missing `task.kind`".into() }),
    };
    let task_span = t.kind.as_ref().map_or(0..0, |k| k.span());
    match task {
        TaskKind::Conductance if leads.len() != 2 => {
            return ctx.err(task_span, format!("task `conductance` requires two leads, got {}", leads.len()));
        }
        TaskKind::Conductance => {}
        _ if !leads.is_empty() => {
            return ctx.err(task_span, format!("task `{task}` takes no leads, got {}", leads.len()));
        }
        _ => {}
    }

    let self_energy = ov.self_energy.unwrap_or(match t.self_energy {
        Some(ModeName::Exact) => SelfEnergy::Exact,
        _ => SelfEnergy::None,
    });
    let mut quad = QuadratureSpec::<f64>::default();
    if let Some(r) = &t.quad_rel_tol {
        if !(*r.get_ref() > 0.0) {
            return ctx.err(r.span(), "task.quad_rel_tol must be > 0");
        }
        quad.rel_tol = *r.get_ref();
    }
    if let Some(a) = &t.quad_abs_tol {
        if !(*a.get_ref() >= 0.0) {
            return ctx.err(a.span(), "task.quad_abs_tol must be >= 0");
        }
        quad.abs_tol = *a.get_ref();
    }
    if let Some(r) = ov.quad_rel_tol {
        if !(r > 0.0) {
            return Err(ConfigError { line: None, message: "--quad-tol must be > 0".into() });
        }
        quad.rel_tol = r;
    }
    let mut thresholds = ClassifyThresholds::<f64>::default();
    if let Some(f) = t.in_gap_fraction {
        thresholds.in_gap_fraction = f;
    }
    if let Some(f) = t.byproduct_fraction {
        thresholds.byproduct_fraction = f;
    }

    let params = match task {
        TaskKind::Spectrum => TaskParams::Spectrum { write_matrix: t.write_matrix.unwrap_or(false) },
        TaskKind::Profiles => {
            let pairs = match &t.pairs {
                None => Vec::new(),
                Some(p) => {
                    let mut out = Vec::new();
                    for &id in p.get_ref() {
                        if id < 0 || id as usize >= n {
                            return ctx.err(p.span(), format!("pair id {id} outside 0..{n}"));
                        }
                        out.push(id as usize);
                    }
                    out
                }
            };
            TaskParams::Profiles { pairs }
        }
        TaskKind::DefectSweep => {
            let site = ctx.site(t.defect_site.as_ref().ok_or_else(|| missing("defect_site", task))?, n, "task.defect_site")?;
            let mp = t.mu_p.as_ref().ok_or_else(|| missing("mu_p", task))?;
            if mp.get_ref().is_empty() {
                return ctx.err(mp.span(), "task.mu_p is empty");
            }
            TaskParams::DefectSweep { site, potentials: mp.get_ref().clone() }
        }
        TaskKind::Conductance => {
            let v_min = t.v_min.as_ref().ok_or_else(|| missing("v_min", task))?;
            let v_max = t.v_max.ok_or_else(|| missing("v_max", task))?;
            let points = t.points.as_ref().ok_or_else(|| missing("points", task))?;
            if *points.get_ref() < 2 {
                return ctx.err(points.span(), "task.points must be >= 2");
            }
            let mut sweep = SweepSpec64::new(*v_min.get_ref(), v_max, *points.get_ref() as usize);
            sweep.refine = t.refine.unwrap_or(true);
            if let Some(h) = t.min_peak_height {
                sweep.min_peak_height = h;
            }
            sweep
                .validate()
                .or_else(|e| ctx.err(v_min.span(), e.to_string()))?;
            let contact_sites = match &t.contact_sites {
                None => vec![leads[0].contact_site],
                Some(s) => {
                    if s.get_ref().is_empty() {
                        return ctx.err(s.span(), "task.contact_sites is empty");
                    }
                    let mut out = Vec::new();
                    for &x in s.get_ref() {
                        out.push(ctx.site(&Spanned::new(s.span(), x), n, "contact site")?);
                    }
                    out
                }
            };
            TaskParams::Conductance {
                sweep,
                contact_sites,
                current_biases: t.current_biases.clone().unwrap_or_default(),
            }
        }
    };

    let out_dir = ov
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(t.out.clone().unwrap_or_else(|| "out".into())));

    Ok(RunConfig { wire, leads, task, params, out_dir, self_energy, quad, thresholds })
}

impl RunConfig {
    fn to_file(&self) -> ConfigFile {
        let w = &self.wire;
        let wire = WireFile {
            n: spanned(w.n_sites as i64),
            j: w.hopping,
            delta: w.pairing.re,
            delta_im: Some(w.pairing.im),
            mu: w.chem_potential,
            boundary: Some(match w.boundary {
                Boundary::Open => BoundaryName::Open,
                Boundary::Closed => BoundaryName::Closed,
            }),
            wrap_pairing: Some(match w.wrap_pairing {
                WrapPairing::Uniform => WrapName::Uniform,
                WrapPairing::AsPrinted => WrapName::AsPrinted,
            }),
            defects: w
                .defects
                .iter()
                .map(|d| DefectFile { site: spanned(d.site as i64), mu_p: d.potential })
                .collect(),
        };
        let lead = |l: &LeadConfig64| LeadFile {
            site: spanned(l.contact_site as i64),
            lambda: spanned(l.lambda),
            omega_c: spanned(l.omega_c),
            mu: Some(l.chem_potential),
            temperature: Some(spanned(l.temperature)),
        };
        let mut task = TaskFile {
            kind: Some(spanned(self.task)),
            out: Some(self.out_dir.to_string_lossy().into_owned()),
            self_energy: Some(match self.self_energy {
                SelfEnergy::None => ModeName::None,
                SelfEnergy::Exact => ModeName::Exact,
            }),
            quad_rel_tol: Some(spanned(self.quad.rel_tol)),
            quad_abs_tol: Some(spanned(self.quad.abs_tol)),
            in_gap_fraction: Some(self.thresholds.in_gap_fraction),
            byproduct_fraction: Some(self.thresholds.byproduct_fraction),
            ..TaskFile::default()
        };
        match &self.params {
            TaskParams::Spectrum { write_matrix } => task.write_matrix = Some(*write_matrix),
            TaskParams::Profiles { pairs } => {
                task.pairs = Some(spanned(pairs.iter().map(|&p| p as i64).collect()));
            }
            TaskParams::DefectSweep { site, potentials } => {
                task.defect_site = Some(spanned(*site as i64));
                task.mu_p = Some(spanned(potentials.clone()));
            }
            TaskParams::Conductance { sweep, contact_sites, current_biases } => {
                task.v_min = Some(spanned(sweep.v_min));
                task.v_max = Some(sweep.v_max);
                task.points = Some(spanned(sweep.points as i64));
                task.refine = Some(sweep.refine);
                task.min_peak_height = Some(sweep.min_peak_height);
                task.contact_sites = Some(spanned(contact_sites.iter().map(|&s| s as i64).collect()));
                task.current_biases = Some(current_biases.clone());
            }
        }
        ConfigFile {
            wire,
            lead: LeadsFile { left: self.leads.first().map(lead), right: self.leads.get(1).map(lead) },
            task,
        }
    }

    /// Fully resolved configuration as TOML in the input schema.
    pub fn echo(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }

    /// The same configuration with the left lead moved to `site`.
    pub fn with_left_site(&self, site: usize) -> RunConfig {
        let mut c = self.clone();
        if let Some(l) = c.leads.first_mut() {
            l.contact_site = site;
        }
        c
    }
}
