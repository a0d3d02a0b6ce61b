//! Execution of a validated [`RunConfig`] into output files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use gcs_core::coherent::{bgcs, gpcs_from, mucs, CoherentSeries, Definition};
use gcs_core::dynamics::{evolve, quasiperiod_scan};
use gcs_core::fields::{bilayer_fields, monolayer_fields, UnitSystem};
use gcs_core::ladder::LadderSpec;
use gcs_core::numeric::fmt17;
use gcs_core::observables::{current_density, mean_energy, probability_density, zp_moments};
use gcs_core::spinors::energy;
use gcs_core::verify::run_check_suite;
use gcs_core::{Complex64, LayerKind};

use crate::config::{Command, FSpec, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ftable::{ladder_from_table, read_table};

/// One file (or stdout when `path` is `None`) produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Everything a run produced; `failure` is set when the self-test suite failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<String>,
}

struct Csv(String);

impl Csv {
    fn new(header: &str) -> Self {
        Csv(format!("{header}\n"))
    }

    fn row(&mut self, cells: &[f64]) {
        let line: Vec<String> = cells.iter().map(|&v| fmt17(v)).collect();
        self.0.push_str(&line.join(","));
        self.0.push('\n');
    }

    fn row_with_index(&mut self, n: usize, cells: &[f64]) {
        self.0.push_str(&n.to_string());
        for &v in cells {
            self.0.push(',');
            self.0.push_str(&fmt17(v));
        }
        self.0.push('\n');
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn ladder(cfg: &RunConfig) -> CliResult<LadderSpec> {
    match &cfg.f_spec {
        FSpec::One => Ok(LadderSpec::oscillator()),
        FSpec::Table(path) => ladder_from_table(read_table(path)?),
    }
}

fn units(cfg: &RunConfig) -> CliResult<UnitSystem> {
    Ok(UnitSystem::new(cfg.omega, cfg.k, cfg.branch)?)
}

fn series(cfg: &RunConfig, spec: &LadderSpec, r: f64, theta: f64) -> CliResult<CoherentSeries> {
    let alpha = Complex64::from_polar(r, theta);
    if cfg.extremal != 0 && cfg.definition != Definition::GilmorePerelomov {
        return Err(CliError::Validation("extremal: only used with definition GP".into()));
    }
    Ok(match cfg.definition {
        Definition::BarutGirardello => bgcs(spec, cfg.kind, alpha, cfg.tol)?,
        Definition::GilmorePerelomov => gpcs_from(spec, cfg.kind, alpha, cfg.extremal, cfg.tol)?,
        Definition::MinimumUncertainty => mucs(spec, cfg.kind, alpha, cfg.tol)?,
    })
}

fn no_sweep(cfg: &RunConfig) -> CliResult<()> {
    if cfg.is_sweep() {
        Err(CliError::Validation(format!("scan/times: not supported by {:?}", cfg.command).to_lowercase()))
    } else {
        Ok(())
    }
}

fn single(cfg: &RunConfig, contents: String) -> Vec<Artifact> {
    vec![Artifact { path: cfg.output.clone(), contents }]
}

fn times(cfg: &RunConfig) -> Vec<f64> {
    if cfg.times.is_empty() {
        vec![0.0]
    } else {
        cfg.times.clone()
    }
}

/// Run one configuration. The config must already be validated.
pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    let mut failure = None;
    let artifacts = match cfg.command {
        Command::Spectrum => spectrum(cfg)?,
        Command::Density => density(cfg)?,
        Command::Current => current(cfg)?,
        Command::Energy => energy_cmd(cfg)?,
        Command::Uncertainty => uncertainty(cfg)?,
        Command::Fidelity => fidelity(cfg)?,
        Command::Potentials => potentials(cfg)?,
        Command::Coefficients => coefficients(cfg)?,
        Command::Check => {
            let (a, failed) = check(cfg)?;
            if !failed.is_empty() {
                failure = Some(failed.join(", "));
            }
            a
        }
    };
    Ok(RunOutput { artifacts, failure })
}

fn spectrum(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    no_sweep(cfg)?;
    let u = units(cfg)?;
    let levels: Vec<(usize, f64)> = (0..=cfg.n_max).map(|n| (n, energy(cfg.kind, n, &u))).collect();
    Ok(single(
        cfg,
        match cfg.format {
            Format::Csv => {
                let mut csv = Csv::new("n,energy");
                for (n, e) in levels {
                    csv.row_with_index(n, &[e]);
                }
                csv.0
            }
            Format::Json => to_json(&levels.iter().map(|(n, e)| json!({"n": n, "energy": e})).collect::<Vec<_>>()),
        },
    ))
}

fn density(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let (u, spec, xs) = (units(cfg)?, ladder(cfg)?, cfg.grid.xs());
    let sweep = cfg.is_sweep();
    let mut csv = Csv::new(if sweep { "r,theta,t,x,value" } else { "x,value" });
    let mut panels = Vec::new();
    for (r, th) in cfg.alphas() {
        let s = series(cfg, &spec, r, th)?;
        for t in times(cfg) {
            let g = probability_density(&evolve(&s, t), &xs, &u)?;
            for (x, v) in g.xs.iter().zip(&g.values) {
                if sweep {
                    csv.row(&[r, th, t, *x, *v]);
                } else {
                    csv.row(&[*x, *v]);
                }
            }
            panels.push(json!({"kind": cfg.kind, "r": r, "theta": th, "t": t, "quantity": g.meta.quantity, "xs": g.xs, "values": g.values}));
        }
    }
    Ok(single(cfg, if cfg.format == Format::Csv { csv.0 } else { to_json(&panels) }))
}

fn current(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let (u, spec, xs) = (units(cfg)?, ladder(cfg)?, cfg.grid.xs());
    let sweep = cfg.is_sweep();
    let mut csv = Csv::new(if sweep { "r,theta,t,x,jx,jy" } else { "x,jx,jy" });
    let mut panels = Vec::new();
    for (r, th) in cfg.alphas() {
        let s = series(cfg, &spec, r, th)?;
        for t in times(cfg) {
            let (jx, jy) = current_density(&evolve(&s, t), &xs, &u)?;
            for i in 0..xs.len() {
                if sweep {
                    csv.row(&[r, th, t, xs[i], jx.values[i], jy.values[i]]);
                } else {
                    csv.row(&[xs[i], jx.values[i], jy.values[i]]);
                }
            }
            panels.push(json!({"kind": cfg.kind, "r": r, "theta": th, "t": t, "xs": xs, "jx": jx.values, "jy": jy.values}));
        }
    }
    Ok(single(cfg, if cfg.format == Format::Csv { csv.0 } else { to_json(&panels) }))
}

fn energy_cmd(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    if !cfg.times.is_empty() {
        return Err(CliError::Validation("times: mean energy is conserved; not supported".into()));
    }
    let (u, spec) = (units(cfg)?, ladder(cfg)?);
    let mut csv = Csv::new("r,theta,energy");
    let mut rows = Vec::new();
    for (r, th) in cfg.alphas() {
        let e = mean_energy(&series(cfg, &spec, r, th)?, &u)?;
        csv.row(&[r, th, e]);
        rows.push(json!({"r": r, "theta": th, "energy": e}));
    }
    Ok(single(cfg, if cfg.format == Format::Csv { csv.0 } else { to_json(&rows) }))
}

fn uncertainty(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    if !cfg.times.is_empty() {
        return Err(CliError::Validation("times: not supported by uncertainty".into()));
    }
    let spec = ladder(cfg)?;
    let mut csv = Csv::new("r,theta,mean_z,mean_z2,mean_p,mean_p2,product");
    let mut rows = Vec::new();
    for (r, th) in cfg.alphas() {
        let m = zp_moments(&series(cfg, &spec, r, th)?)?;
        let p = m.uncertainty_product();
        csv.row(&[r, th, m.mean_z, m.mean_z2, m.mean_p, m.mean_p2, p]);
        rows.push(json!({"r": r, "theta": th, "moments": m, "product": p}));
    }
    Ok(single(cfg, if cfg.format == Format::Csv { csv.0 } else { to_json(&rows) }))
}

/// `out.csv` -> `out.quasiperiods.json`.
pub fn quasiperiod_path(output: &Path) -> PathBuf {
    output.with_extension("quasiperiods.json")
}

fn fidelity(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    if !cfg.times.is_empty() {
        return Err(CliError::Validation("times: use time.t_max and time.samples for fidelity".into()));
    }
    let spec = ladder(cfg)?;
    let sweep = cfg.is_sweep();
    let mut csv = Csv::new(if sweep { "r,theta,t,fidelity" } else { "t,fidelity" });
    let mut panels = Vec::new();
    let mut periods = Vec::new();
    for (r, th) in cfg.alphas() {
        let s = series(cfg, &spec, r, th)?;
        let tr = quasiperiod_scan(&s, cfg.time.t_max, cfg.time.samples, cfg.threshold)?;
        for (t, f) in tr.ts.iter().zip(&tr.values) {
            if sweep {
                csv.row(&[r, th, *t, *f]);
            } else {
                csv.row(&[*t, *f]);
            }
        }
        periods.push(json!({"r": r, "theta": th, "quasiperiods": tr.quasiperiods}));
        panels.push(json!({"kind": cfg.kind, "r": r, "theta": th, "ts": tr.ts, "values": tr.values, "quasiperiods": tr.quasiperiods}));
    }
    if cfg.format == Format::Json {
        return Ok(single(cfg, to_json(&panels)));
    }
    let side = if sweep {
        to_json(&periods)
    } else {
        let mut s = serde_json::to_string(&periods[0]["quasiperiods"]).expect("serializes");
        s.push('\n');
        s
    };
    let side_path = cfg.output.as_deref().map(quasiperiod_path);
    let mut out = single(cfg, csv.0);
    match side_path {
        Some(p) => out.push(Artifact { path: Some(p), contents: side }),
        None => eprint!("quasiperiods: {side}"),
    }
    Ok(out)
}

fn potentials(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    no_sweep(cfg)?;
    let u = units(cfg)?;
    let profile = u.profile();
    let xs = cfg.grid.xs();
    let mut rows = Vec::new();
    let mut csv;
    match cfg.kind {
        LayerKind::Monolayer => {
            csv = Csv::new("x,w,v_minus,v_plus");
            for &x in &xs {
                let f = monolayer_fields(&profile, x, cfg.k);
                csv.row(&[x, f.w, f.v_minus, f.v_plus]);
                rows.push(json!({"x": x, "w": f.w, "v_minus": f.v_minus, "v_plus": f.v_plus}));
            }
        }
        LayerKind::Bilayer => {
            let (e1, e2) = (cfg.eps1.unwrap_or(0.0), cfg.eps2.unwrap_or(cfg.omega));
            csv = Csv::new("x,eta,beta,gamma,v_minus,v_plus");
            for &x in &xs {
                match bilayer_fields(&profile, x, cfg.k, e1, e2) {
                    Ok(f) => {
                        csv.row(&[x, f.eta, f.beta, f.gamma, f.v_minus, f.v_plus]);
                        rows.push(json!({"x": x, "eta": f.eta, "beta": f.beta, "gamma": f.gamma, "v_minus": f.v_minus, "v_plus": f.v_plus}));
                    }
                    // singular point of the construction: emit NaN / null
                    Err(_) => {
                        let eta = 2.0 * (cfg.k + profile.a(x));
                        csv.row(&[x, eta, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
                        rows.push(json!({"x": x, "eta": eta, "beta": null, "gamma": null, "v_minus": null, "v_plus": null}));
                    }
                }
            }
        }
    }
    Ok(single(cfg, if cfg.format == Format::Csv { csv.0 } else { to_json(&rows) }))
}

fn coefficients(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    no_sweep(cfg)?;
    let s = series(cfg, &ladder(cfg)?, cfg.alpha.r, cfg.alpha.theta)?;
    Ok(single(
        cfg,
        match cfg.format {
            Format::Json => {
                let mut j = s.to_json();
                j.push('\n');
                j
            }
            Format::Csv => {
                let mut csv = Csv::new("n,re,im");
                for (n, a) in s.terms() {
                    csv.row_with_index(n, &[a.re, a.im]);
                }
                csv.0
            }
        },
    ))
}

fn check(cfg: &RunConfig) -> CliResult<(Vec<Artifact>, Vec<String>)> {
    no_sweep(cfg)?;
    let report = run_check_suite(cfg.check_tol);
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    let contents = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::new();
            for c in &report.checks {
                out.push_str(&c.to_string());
                out.push('\n');
            }
            out
        }
    };
    Ok((single(cfg, contents), failed))
}

/// Write artifacts, creating parent directories; `None` paths go to stdout.
pub fn write_artifacts(artifacts: &[Artifact]) -> CliResult<()> {
    use std::io::Write;
    for a in artifacts {
        match &a.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                std::fs::write(p, &a.contents).map_err(|e| CliError::io(p, e))?;
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(a.contents.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
            }
        }
    }
    Ok(())
}

/// Validate, execute and write one run.
pub fn run(cfg: &RunConfig) -> CliResult<()> {
    cfg.validate()?;
    let out = execute(cfg)?;
    write_artifacts(&out.artifacts)?;
    match out.failure {
        Some(f) => Err(CliError::Check(f)),
        None => Ok(()),
    }
}
