//! Numeric solves and short-time laws on one setup, joined into comparison tables.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{AsymptoticModel, Formula};
use crate::error::{Error, Result};
use crate::green::Lambda;
use crate::sausage::{SausageMode, SausageProfile};
use crate::series::{HeatContentSeries, HeatSample};
use crate::solver::{solve_2d_observed, SolverConfig};

pub const PRESETS: [&str; 6] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig5a", "fig5b"];

const PRESET_FILES: [(&str, &str); 6] = [
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
];

/// μ(ε) ≈ c·ε^{n−d}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeGennesSpec {
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SausageSpec {
    #[default]
    Auto,
    Analytic,
    Grid {
        resolution: usize,
    },
    MonteCarlo {
        samples: u64,
    },
}

/// An acceptance threshold evaluated on the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// max |N_num − N_f|/N_f over samples in [t_min, t_max] is at most `max`
    Deviation {
        formula: Formula,
        t_min: f64,
        t_max: f64,
        max: f64,
    },
    /// least-squares log–log slope of N_num over [t_min, t_max] is `expected` ± `tol`
    Slope {
        t_min: f64,
        t_max: f64,
        expected: f64,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub formulas: Vec<Formula>,
    /// formula for the deviation column, the first one when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Formula>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de_gennes: Option<DeGennesSpec>,
    /// apply the smooth-boundary laws to a boundary that is not flagged smooth
    #[serde(default)]
    pub assume_regular: bool,
    /// run the finite-volume solver
    #[serde(default = "yes")]
    pub solve: bool,
    #[serde(default)]
    pub sausage: SausageSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    pub solver: SolverConfig,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    /// Wrap a bare solver config, choosing the laws that apply to its regime.
    pub fn from_solver(name: impl Into<String>, solver: SolverConfig) -> Result<Self> {
        let med = solver.medium()?;
        let formulas = match med.lambda {
            Lambda::Infinite if (med.d_plus - med.d_minus).abs() <= 1e-12 * med.d_plus => {
                vec![Formula::EqualDiffusionLeading, Formula::EqualDiffusionFull]
            }
            Lambda::Infinite => vec![Formula::InfiniteLeading, Formula::InfiniteFull],
            Lambda::Finite(_) => vec![Formula::FiniteFull, Formula::FiniteLeading],
            Lambda::Zero => Vec::new(),
        };
        Ok(Self {
            name: name.into(),
            formulas,
            reference: None,
            de_gennes: None,
            assume_regular: false,
            solve: true,
            sausage: SausageSpec::Auto,
            seed: 0,
            checks: Vec::new(),
            solver,
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read an experiment file, or a bare solver file named after its stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let json = path.extension().and_then(|e| e.to_str()) == Some("json");
        let full = if json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        match full {
            Ok(c) => Ok(c),
            Err(first) => {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("run")
                    .to_string();
                match SolverConfig::load(path) {
                    Ok(s) => Self::from_solver(stem, s),
                    Err(_) => Err(first.context(path.display().to_string())),
                }
            }
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    pub fn reference_formula(&self) -> Option<Formula> {
        self.reference.or_else(|| self.formulas.first().copied())
    }

    /// Reject formulas that do not apply to the medium's λ regime.
    pub fn validate(&self) -> Result<()> {
        let med = self.solver.medium()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "experiment name '{}' is not a plain file stem",
                self.name
            )));
        }
        let equal = (med.d_plus - med.d_minus).abs() <= 1e-12 * med.d_plus.max(med.d_minus);
        for f in &self.formulas {
            let ok = match f {
                Formula::EqualDiffusionFull | Formula::EqualDiffusionLeading => {
                    med.lambda == Lambda::Infinite && equal
                }
                Formula::InfiniteFull | Formula::InfiniteLeading | Formula::RegularInfinite => {
                    med.lambda == Lambda::Infinite
                }
                Formula::FiniteFull | Formula::FiniteLeading | Formula::RegularFinite => {
                    med.lambda != Lambda::Infinite
                }
                Formula::DeGennes => self.de_gennes.is_some(),
            };
            if !ok {
                return Err(Error::Config(format!(
                    "formula {} does not apply to λ = {:?}, D₊ = {}, D₋ = {}",
                    f.id(),
                    med.lambda,
                    med.d_plus,
                    med.d_minus
                )));
            }
        }
        if let Some(r) = self.reference {
            if !self.formulas.contains(&r) {
                return Err(Error::Config(format!(
                    "reference formula {} is not in the formula list",
                    r.id()
                )));
            }
        }
        for c in &self.checks {
            let (t0, t1) = match *c {
                Check::Deviation {
                    formula,
                    t_min,
                    t_max,
                    ..
                } => {
                    if !self.formulas.contains(&formula) {
                        return Err(Error::Config(format!(
                            "check formula {} is not in the formula list",
                            formula.id()
                        )));
                    }
                    (t_min, t_max)
                }
                Check::Slope { t_min, t_max, .. } => (t_min, t_max),
            };
            if !(t0 > 0.0 && t1 > t0) {
                return Err(Error::Config(format!("check window [{t0}, {t1}] is empty")));
            }
        }
        self.solver.solve_params()?;
        Ok(())
    }

    /// Sausage evaluator for the configured domain, honouring `sausage` and `seed`.
    pub fn sausage_profile(&self) -> Result<SausageProfile> {
        let geom = self.solver.build_geometry()?;
        let mode = match self.sausage {
            SausageSpec::Auto => None,
            SausageSpec::Analytic => Some(SausageMode::Analytic),
            SausageSpec::Grid { resolution } => Some(SausageMode::Grid { resolution }),
            SausageSpec::MonteCarlo { samples } => Some(SausageMode::MonteCarlo {
                samples,
                seed: self.seed,
            }),
        };
        match mode {
            Some(m) => SausageProfile::new(geom, m),
            None => Ok(SausageProfile::auto(geom)),
        }
    }

    fn model(&self) -> Result<AsymptoticModel> {
        let mut m = AsymptoticModel::from_sausage(self.solver.medium()?, self.sausage_profile()?);
        if self.assume_regular {
            m = m.assume_regular();
        }
        Ok(m)
    }
}

/// A built-in experiment reproducing one figure setup.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESET_FILES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}'; available: {}",
                PRESETS.join(", ")
            ))
        })?;
    ExperimentConfig::from_toml_str(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: Check,
    /// observed max deviation or slope
    pub value: Option<f64>,
    /// None when the check could not be evaluated
    pub passed: Option<bool>,
}

impl CheckOutcome {
    pub fn describe(&self) -> String {
        let status = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let value = self.value.map_or("n/a".to_string(), |v| format!("{v:.4e}"));
        match self.check {
            Check::Deviation {
                formula,
                t_min,
                t_max,
                max,
            } => {
                format!("{status} deviation vs {} on [{t_min:e}, {t_max:e}]: max {value} (limit {max:e})", formula.id())
            }
            Check::Slope {
                t_min,
                t_max,
                expected,
                tol,
            } => {
                format!("{status} log-log slope on [{t_min:e}, {t_max:e}]: {value} (expected {expected} ± {tol})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub numeric: Option<f64>,
    /// one value per formula, in config order
    pub asymptotic: Vec<f64>,
    /// |N_num − N_ref|/N_ref
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub config_hash: String,
    pub formulas: Vec<Formula>,
    pub reference: Option<Formula>,
    pub numeric: Option<HeatContentSeries>,
    pub curves: Vec<HeatContentSeries>,
    pub rows: Vec<ComparisonRow>,
    pub checks: Vec<CheckOutcome>,
    pub steps: usize,
}

fn header(name: &str, hash: &str) -> String {
    format!("# heatlab experiment={name} config_sha256={hash}\n# units: t in units of length^2/D, N in units of area\n")
}

fn csv_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.15e}")).unwrap_or_default()
}

impl ComparisonReport {
    /// False when any evaluated check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn compare_csv(&self) -> String {
        let mut s = header(&self.name, &self.config_hash);
        s.push_str("t,N_numeric");
        for f in &self.formulas {
            let _ = write!(s, ",N_{}", f.id());
        }
        s.push_str(",deviation\n");
        for r in &self.rows {
            let _ = write!(s, "{:.15e},{}", r.t, csv_num(r.numeric));
            for v in &r.asymptotic {
                let _ = write!(s, ",{v:.15e}");
            }
            let _ = writeln!(s, ",{}", csv_num(r.deviation));
        }
        s
    }

    pub fn curve_csv(&self, series: &HeatContentSeries) -> String {
        header(&self.name, &self.config_hash) + &series.to_csv()
    }

    pub fn summary(&self) -> String {
        let mut s = header(&self.name, &self.config_hash);
        let _ = writeln!(
            s,
            "experiment {}: {} samples, {} solver steps",
            self.name,
            self.rows.len(),
            self.steps
        );
        if let Some(r) = self.reference {
            let _ = writeln!(s, "deviation column relative to {}", r.id());
        }
        for r in &self.rows {
            let _ = writeln!(
                s,
                "t={:.4e} N_num={} deviation={}",
                r.t,
                r.numeric.map_or("-".into(), |v| format!("{v:.6e}")),
                r.deviation.map_or("-".into(), |v| format!("{v:.4e}"))
            );
        }
        for c in &self.checks {
            let _ = writeln!(s, "{}", c.describe());
        }
        s
    }
}

/// Numeric CSV that is written row by row, so a failed run leaves what it reached.
struct SampleSink {
    out: Option<BufWriter<File>>,
}

impl SampleSink {
    fn new(path: Option<PathBuf>, head: &str) -> Result<Self> {
        let out = match path {
            Some(p) => {
                let mut w = BufWriter::new(
                    File::create(&p)
                        .map_err(|e| Error::from(e).context(p.display().to_string()))?,
                );
                w.write_all(head.as_bytes())?;
                w.write_all(b"t,N,mass,picard_iters\n")?;
                w.flush()?;
                Some(w)
            }
            None => None,
        };
        Ok(Self { out })
    }

    fn push(&mut self, s: &HeatSample) -> Result<()> {
        if let Some(w) = &mut self.out {
            let it = s.picard_iters.map(|i| i.to_string()).unwrap_or_default();
            writeln!(w, "{:.15e},{:.15e},{},{}", s.t, s.n, csv_num(s.mass), it)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn evaluate_checks(
    cfg: &ExperimentConfig,
    numeric: Option<&HeatContentSeries>,
    rows: &[ComparisonRow],
) -> Vec<CheckOutcome> {
    let in_window = |t: f64, a: f64, b: f64| t >= a * (1.0 - 1e-12) && t <= b * (1.0 + 1e-12);
    cfg.checks
        .iter()
        .map(|&check| {
            let value = match check {
                Check::Deviation {
                    formula,
                    t_min,
                    t_max,
                    ..
                } => {
                    let k = cfg
                        .formulas
                        .iter()
                        .position(|f| *f == formula)
                        .expect("validated");
                    let devs: Vec<f64> = rows
                        .iter()
                        .filter(|r| in_window(r.t, t_min, t_max))
                        .filter_map(|r| {
                            r.numeric
                                .map(|n| (n - r.asymptotic[k]).abs() / r.asymptotic[k].abs())
                        })
                        .collect();
                    if devs.is_empty() {
                        None
                    } else {
                        Some(devs.iter().cloned().fold(0.0, f64::max))
                    }
                }
                Check::Slope { t_min, t_max, .. } => {
                    numeric.and_then(|s| s.log_slope(t_min, t_max))
                }
            };
            let passed = value.map(|v| match check {
                Check::Deviation { max, .. } => v <= max,
                Check::Slope { expected, tol, .. } => (v - expected).abs() <= tol,
            });
            CheckOutcome {
                check,
                value,
                passed,
            }
        })
        .collect()
}

/// Run one experiment; with `out` set, write its CSV files and summary there.
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ComparisonReport> {
    let ctx = |e: Error| e.context(format!("experiment {}", cfg.name));
    cfg.validate().map_err(ctx)?;
    let hash = cfg.hash();
    let head = header(&cfg.name, &hash);
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| ctx(Error::from(e).context(dir.display().to_string())))?;
    }
    let file = |suffix: &str| out.map(|d| d.join(format!("{}.{suffix}", cfg.name)));
    let params = cfg.solver.solve_params().map_err(ctx)?;
    let times: Vec<f64> = params
        .sample_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= params.t_end)
        .collect();

    let model = cfg.model().map_err(ctx)?;
    let mut curves = Vec::new();
    for &f in &cfg.formulas {
        let m = match (f, cfg.de_gennes) {
            (Formula::DeGennes, Some(dg)) => model.de_gennes(dg.c, dg.d).map_err(ctx)?,
            _ => model.clone(),
        };
        let series = m.series(f, &times).map_err(|e| ctx(e.context(f.id())))?;
        if let Some(p) = file(&format!("{}.csv", f.id())) {
            write_file(&p, &(head.clone() + &series.to_csv()))?;
        }
        curves.push(series);
    }

    let (numeric, steps) = if cfg.solve {
        let geom = cfg.solver.build_geometry().map_err(ctx)?;
        let med = cfg.solver.medium().map_err(ctx)?;
        let mut sink = SampleSink::new(file("numeric.csv"), &head)?;
        let result = solve_2d_observed(&geom, &med, &params, |s| sink.push(s)).map_err(ctx)?;
        if let Some(dir) = out {
            for (k, snap) in result.snapshots.iter().enumerate() {
                snap.write_snapshot(dir, &format!("{}.u{k:03}", cfg.name))?;
            }
        }
        (Some(result.series), result.steps)
    } else {
        (None, 0)
    };

    let reference = cfg.reference_formula();
    let rk = reference.and_then(|r| cfg.formulas.iter().position(|f| *f == r));
    let rows: Vec<ComparisonRow> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let asymptotic: Vec<f64> = curves.iter().map(|c| c.samples[i].n).collect();
            let num = numeric
                .as_ref()
                .and_then(|s| s.samples.iter().find(|x| x.t == t))
                .map(|x| x.n);
            let deviation = match (num, rk) {
                (Some(n), Some(k)) => Some((n - asymptotic[k]).abs() / asymptotic[k].abs()),
                _ => None,
            };
            ComparisonRow {
                t,
                numeric: num,
                asymptotic,
                deviation,
            }
        })
        .collect();
    let checks = evaluate_checks(cfg, numeric.as_ref(), &rows);
    let report = ComparisonReport {
        name: cfg.name.clone(),
        config_hash: hash,
        formulas: cfg.formulas.clone(),
        reference,
        numeric,
        curves,
        rows,
        checks,
        steps,
    };
    if let Some(p) = file("compare.csv") {
        write_file(&p, &report.compare_csv())?;
    }
    if let Some(p) = file("summary.txt") {
        write_file(&p, &report.summary())?;
    }
    Ok(report)
}

/// Run several experiments on up to `threads` workers; results keep the input order.
pub fn run_batch(
    configs: &[ExperimentConfig],
    out: Option<&Path>,
    threads: usize,
) -> Vec<Result<ComparisonReport>> {
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<Result<ComparisonReport>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                if i >= configs.len() {
                    break;
                }
                let r = run(&configs[i], out);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every index is visited"))
        .collect()
}
