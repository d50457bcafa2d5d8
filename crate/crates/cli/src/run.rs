//! Task execution and file output.
//!
//! Every CSV starts with the resolved config as `# ` comment lines, followed
//! by a header row; numbers use 17 significant digits. A `run.meta.json`
//! sidecar lists the produced files and a short result summary.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kitaev_core::export::{write_majorana_csv, write_profile_csv, write_spectrum_csv};
use kitaev_core::{
    analyze, build_bdg, bulk_gap, labeled_modes, low_energy_couplings, majorana_rep, Defect, Junction, LabeledPair64,
    ModeClass, WireConfig64,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, TaskParams};
use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    header: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
        let mut header = format!("# kitaev-cli {} task={}\n", env!("CARGO_PKG_VERSION"), cfg.task);
        for line in cfg.echo().lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        Ok(Writer { cfg, header, files: Vec::new() })
    }

    fn file(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        let path = self.cfg.out_dir.join(name);
        let write = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            w.write_all(self.header.as_bytes())?;
            body(&mut w)?;
            w.flush()
        };
        write().map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, summary: Value) -> Result<RunReport, CliError> {
        let cfg = self.cfg;
        let config: Value = toml::from_str(&cfg.echo()).expect("echo parses as TOML");
        let meta = json!({
            "software": "kitaev-cli",
            "version": env!("CARGO_PKG_VERSION"),
            "task": cfg.task.name(),
            "self_energy": cfg.self_energy.to_string(),
            "quadrature": { "rel_tol": cfg.quad.rel_tol, "abs_tol": cfg.quad.abs_tol },
            "config": config,
            "files": self.files.iter().map(|p| p.file_name().unwrap().to_string_lossy()).collect::<Vec<_>>(),
            "summary": summary,
        });
        let path = cfg.out_dir.join("run.meta.json");
        let text = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(RunReport { out_dir: cfg.out_dir.clone(), files: self.files, summary: meta["summary"].clone() })
    }
}

fn pairs_csv(w: &mut dyn Write, labeled: &[LabeledPair64]) -> io::Result<()> {
    writeln!(w, "pair,energy,class,electron_weight")?;
    for l in labeled {
        writeln!(w, "{},{},{},{}", l.id, num(l.pair.energy()), l.class, num(l.pair.positive.electron_weight()))?;
    }
    Ok(())
}

fn spectrum_summary(cfg: &RunConfig, labeled: &[LabeledPair64]) -> Value {
    let w = &cfg.wire;
    let count = |c: ModeClass| labeled.iter().filter(|l| l.class == c).count();
    json!({
        "bulk_gap": bulk_gap(w.hopping, w.pairing, w.chem_potential),
        "in_gap_energies": low_energy_couplings(labeled).iter().map(|(_, e)| *e).collect::<Vec<_>>(),
        "pairs": { "in_gap": count(ModeClass::InGap), "bulk": count(ModeClass::Bulk),
                   "defect_byproduct": count(ModeClass::DefectByproduct) },
    })
}

/// Runs the configured task and writes its files into `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    match &cfg.params {
        TaskParams::Spectrum { write_matrix } => run_spectrum(cfg, *write_matrix),
        TaskParams::Profiles { pairs } => run_profiles(cfg, pairs),
        TaskParams::DefectSweep { site, potentials } => run_defect_sweep(cfg, *site, potentials),
        TaskParams::Conductance { sweep, contact_sites, current_biases } => {
            run_conductance(cfg, sweep, contact_sites, current_biases)
        }
    }
}

fn run_spectrum(cfg: &RunConfig, write_matrix: bool) -> Result<RunReport, CliError> {
    let labeled = analyze(&cfg.wire, &cfg.thresholds)?;
    let mut out = Writer::new(cfg)?;
    let modes = labeled_modes(&labeled);
    out.file("spectrum.csv", |w| write_spectrum_csv(w, &modes))?;
    out.file("pairs.csv", |w| pairs_csv(w, &labeled))?;
    if write_matrix {
        let h = build_bdg(&cfg.wire)?;
        out.file("bdg.tsv", |w| h.write_tsv(w))?;
    }
    out.finish(spectrum_summary(cfg, &labeled))
}

fn run_profiles(cfg: &RunConfig, pairs: &[usize]) -> Result<RunReport, CliError> {
    let labeled = analyze(&cfg.wire, &cfg.thresholds)?;
    let mut selected: Vec<usize> = if pairs.is_empty() {
        low_energy_couplings(&labeled).iter().map(|(id, _)| *id).collect()
    } else {
        pairs.to_vec()
    };
    if selected.is_empty() {
        // no in-gap pair: fall back to the lowest pair
        let lowest = labeled
            .iter()
            .min_by(|a, b| a.pair.energy().total_cmp(&b.pair.energy()))
            .expect("at least one pair");
        selected.push(lowest.id);
    }
    let mut out = Writer::new(cfg)?;
    let modes = labeled_modes(&labeled);
    out.file("spectrum.csv", |w| write_spectrum_csv(w, &modes))?;
    out.file("pairs.csv", |w| pairs_csv(w, &labeled))?;
    let mut weights = Vec::new();
    for id in &selected {
        let pair = &labeled[*id].pair;
        let mj = majorana_rep(&pair.positive);
        out.file(&format!("profile_pair{id}.csv"), |w| write_profile_csv(w, &pair.positive))?;
        out.file(&format!("majorana_pair{id}.csv"), |w| write_majorana_csv(w, &mj))?;
        weights.push(json!({ "pair": id, "energy": pair.energy(), "weight_g": mj.weight_g(), "weight_h": mj.weight_h() }));
    }
    let mut summary = spectrum_summary(cfg, &labeled);
    summary["profiled"] = Value::from(weights);
    out.finish(summary)
}

struct DefectRow {
    mu_p: f64,
    in_gap: Vec<f64>,
    byproduct: Option<f64>,
}

fn run_defect_sweep(cfg: &RunConfig, site: usize, potentials: &[f64]) -> Result<RunReport, CliError> {
    let rows: Vec<DefectRow> = potentials
        .par_iter()
        .map(|&mu_p| {
            let mut wire: WireConfig64 = cfg.wire.clone();
            wire.defects.retain(|d| d.site != site);
            wire.defects.push(Defect { site, potential: mu_p });
            let labeled = analyze(&wire, &cfg.thresholds)?;
            let in_gap = low_energy_couplings(&labeled).iter().map(|(_, e)| *e).collect();
            let byproduct = labeled
                .iter()
                .filter(|l| l.class == ModeClass::DefectByproduct)
                .map(|l| l.pair.energy())
                .min_by(|a, b| (a - mu_p.abs()).abs().total_cmp(&(b - mu_p.abs()).abs()));
            Ok(DefectRow { mu_p, in_gap, byproduct })
        })
        .collect::<Result<_, kitaev_core::Error>>()?;
    let lowest = |r: &DefectRow| r.in_gap.iter().copied().fold(f64::NAN, f64::min);
    let mut out = Writer::new(cfg)?;
    out.file("defect_sweep.csv", |w| {
        writeln!(w, "mu_p,eps_in_gap,n_in_gap,eps_byproduct")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                num(r.mu_p),
                num(lowest(r)),
                r.in_gap.len(),
                num(r.byproduct.unwrap_or(f64::NAN))
            )?;
        }
        Ok(())
    })?;
    let eps: Vec<f64> = rows.iter().map(lowest).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].mu_p.total_cmp(&rows[b].mu_p));
    let decreasing = order.windows(2).all(|p| eps[p[1]] < eps[p[0]]);
    out.finish(json!({ "defect_site": site, "strictly_decreasing": decreasing, "eps_in_gap": eps }))
}

fn run_conductance(
    cfg: &RunConfig,
    sweep: &kitaev_core::SweepSpec64,
    contact_sites: &[usize],
    current_biases: &[f64],
) -> Result<RunReport, CliError> {
    let h = build_bdg(&cfg.wire)?;
    let labeled = analyze(&cfg.wire, &cfg.thresholds)?;
    let mut out = Writer::new(cfg)?;
    let modes = labeled_modes(&labeled);
    out.file("spectrum.csv", |w| write_spectrum_csv(w, &modes))?;
    let gap = bulk_gap(cfg.wire.hopping, cfg.wire.pairing, cfg.wire.chem_potential);
    let mut per_site = Vec::new();
    for &x in contact_sites {
        let leads = cfg.with_left_site(x).leads;
        let junction = Junction::new(&h, &leads, cfg.self_energy)?;
        let curve = junction.sweep(sweep)?;
        out.file(&format!("conductance_x{x}.csv"), |w| {
            writeln!(w, "bias,didv_total,didv_direct,didv_crossed,didv_local_andreev")?;
            for s in &curve.samples {
                writeln!(w, "{},{},{},{},{}", num(s.bias), num(s.total), num(s.direct), num(s.crossed), num(s.local_andreev))?;
            }
            Ok(())
        })?;
        out.file(&format!("peaks_x{x}.csv"), |w| {
            writeln!(w, "location,height,fwhm")?;
            for p in &curve.peaks {
                writeln!(w, "{},{},{}", num(p.location), num(p.height), num(p.fwhm.unwrap_or(f64::NAN)))?;
            }
            Ok(())
        })?;
        if !current_biases.is_empty() {
            let rows: Vec<_> = current_biases
                .par_iter()
                .map(|&v| {
                    let mut shifted = leads.clone();
                    shifted[0].chem_potential = v;
                    Junction::new(&h, &shifted, cfg.self_energy)?.steady_current(&cfg.quad).map(|r| (v, r))
                })
                .collect::<Result<_, kitaev_core::Error>>()?;
            out.file(&format!("current_x{x}.csv"), |w| {
                writeln!(w, "bias,current,direct,crossed,local_andreev,error_bound,intervals")?;
                for (v, r) in &rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        num(*v),
                        num(r.current),
                        num(r.direct),
                        num(r.crossed),
                        num(r.local_andreev),
                        num(r.error_bound),
                        r.intervals
                    )?;
                }
                Ok(())
            })?;
        }
        let in_gap = curve.peaks.iter().filter(|p| p.location.abs() < gap).count();
        per_site.push(json!({
            "left_site": x,
            "right_site": leads[1].contact_site,
            "samples": curve.samples.len(),
            "peaks": curve.peaks.len(),
            "in_gap_peaks": in_gap,
            "max_didv": curve.max_total(),
            "singular_biases": curve.singular,
        }));
    }
    let mut summary = spectrum_summary(cfg, &labeled);
    summary["positive_energies_in_window"] = Value::from(
        modes.iter().filter(|m| m.energy > 0.0 && m.energy >= sweep.v_min && m.energy <= sweep.v_max).count(),
    );
    summary["sweeps"] = Value::from(per_site);
    out.finish(summary)
}

/// Numeric CSV rows of `path`: everything after the comment lines.
pub fn numeric_rows(path: &Path) -> io::Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// The config echoed at the top of an output file.
pub fn echoed_config(path: &Path) -> io::Result<String> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n")
}
