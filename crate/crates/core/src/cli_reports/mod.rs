//! Command-line front end: argument and config-file parsing, dispatch to the
//! owning modules, text reports and CSV artifacts.
//!
//! Precedence for every knob is built-in default, then `--config` file, then
//! explicit flag. Computed verdicts (including refusals and failed criteria)
//! exit 0; input, schema and range errors exit 2 with a one-line diagnostic.

pub mod suite;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::domain_sets::{AxisBox, ResidueVerdict};
use crate::error::{invalid, Error, Result};
use crate::frame_analysis::{estimate_frame_bounds, format_box, nyquist_trunc, write_frame_bounds_csv, Window};
use crate::frame_construction::{
    check_thm03, construct_prop51, construct_thm02, cosine_measure_certificate, estimate_matched,
    frame_coefficients, write_certificates_csv, Prop51Outcome,
};
use crate::gabor_zak::{certify_gabor, write_gabor_csv};
use crate::io::{load_comb, load_set, load_system, parse_lattice, parse_vector, to_json_pretty, SystemDesc};
use crate::point_measures::{density_closed_form, density_windowed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    Overlap,
    Residue,
    FrameBounds,
    Construct,
    Obstruction,
    CertifyMeasure,
    Gabor,
    Verify,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub set: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub lattice: Option<String>,
    pub windows: Vec<String>,
    pub x0: Option<Vec<f64>>,
    pub x: Option<Vec<f64>>,
    pub h: Vec<f64>,
    pub radii: Vec<f64>,
    pub grid_n: usize,
    /// Half-width of the frequency truncation cube; Nyquist-matched when absent.
    pub trunc: Option<f64>,
    pub step: f64,
    pub x_max: f64,
    pub m: usize,
    pub p: u64,
    pub q: u64,
    pub trials: usize,
    pub samples: usize,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            set: None,
            points: None,
            system: None,
            lattice: None,
            windows: Vec::new(),
            x0: None,
            x: None,
            h: vec![10.0, 100.0, 1000.0],
            radii: vec![0.0, 1.0, 2.0, 4.0],
            grid_n: 64,
            trunc: None,
            step: 0.01,
            x_max: 8.0,
            m: 256,
            p: 1,
            q: 1,
            trials: 20,
            samples: 64,
            seed: 0,
            csv: None,
            out: None,
        }
    }

    /// Range checks; each failure names its field.
    pub fn validate(&self) -> Result<()> {
        let in_range = |field: &'static str, v: f64, lo: f64, hi: f64| {
            if v.is_finite() && v >= lo && v <= hi {
                Ok(())
            } else {
                Err(invalid(field, format!("{v} is outside [{lo}, {hi}]")))
            }
        };
        in_range("grid_n", self.grid_n as f64, 1.0, 4096.0)?;
        if let Some(t) = self.trunc {
            in_range("trunc", t, 1e-6, 1e6)?;
        }
        in_range("step", self.step, 1e-6, 10.0)?;
        in_range("x_max", self.x_max, 0.0, 1e4)?;
        in_range("M", self.m as f64, 16.0, 65536.0)?;
        in_range("trials", self.trials as f64, 1.0, 10000.0)?;
        in_range("samples", self.samples as f64, 1.0, 100_000.0)?;
        in_range("p", self.p as f64, 1.0, 1e6)?;
        in_range("q", self.q as f64, 1.0, 1e6)?;
        for h in &self.h {
            in_range("h", *h, 1e-6, 1e9)?;
        }
        Ok(())
    }

    fn require<'a, T>(&self, v: &'a Option<T>, field: &'static str) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| invalid(field, format!("required by `{}`", command_name(self.command))))
    }
}

fn command_name(c: CommandKind) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// Knobs accepted in a `--config` file; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<CommandKind>,
    pub set: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub lattice: Option<String>,
    pub windows: Option<Vec<String>>,
    pub x0: Option<Vec<f64>>,
    pub x: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
    pub grid_n: Option<usize>,
    pub trunc: Option<f64>,
    pub step: Option<f64>,
    pub x_max: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "frameforge", version, about = "Frame bounds, constructions and certificates for exponential systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// JSON file with knob values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the CSV artifact here instead of standard output.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Seed for every randomized trial.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Beurling densities of a comb: closed form plus sliding-window trace.
    Density {
        #[arg(long)]
        points: Option<PathBuf>,
        /// Window sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// `|Ω ∩ (Ω + x)|` at one translate or sampled on `[-x_max, x_max]^d`.
    Overlap {
        #[arg(long)]
        set: Option<PathBuf>,
        /// Single translate, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Whether lattice translates of a set pack.
    Residue {
        #[arg(long)]
        set: Option<PathBuf>,
        /// Lattice file, or diagonal spacings such as `2` or `1,0.5`.
        #[arg(long)]
        lattice: Option<String>,
    },
    /// Frame bounds of a system file.
    FrameBounds {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long)]
        grid_n: Option<usize>,
        /// Half-width of the frequency truncation cube.
        #[arg(long)]
        trunc: Option<f64>,
    },
    /// Build a frame from windows (`--window`, repeatable) or a packing lattice (`--lattice`).
    Construct {
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long = "window")]
        windows: Vec<String>,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        trunc: Option<f64>,
        /// Write the constructed system file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan translate overlaps for the tight-frame obstruction.
    Obstruction {
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Candidate radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Certify `(1 + cos 2π⟨x0,ξ⟩) dξ` as a tight frame measure.
    CertifyMeasure {
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Gabor frame verdict at `a = p/q` from the Zak transform.
    Gabor {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long = "M", visible_alias = "m")]
        m: Option<usize>,
    },
    /// Run every acceptance criterion and print a PASS/FAIL table.
    Verify,
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn vector(arg: Option<String>, field: &'static str) -> Result<Option<Vec<f64>>> {
    arg.map(|s| parse_vector(&s, field)).transpose()
}

impl Cli {
    /// Merge defaults, the config file and flags into a [`RunConfig`].
    pub fn into_config(self) -> Result<RunConfig> {
        let kind = match &self.command {
            Cmd::Density { .. } => CommandKind::Density,
            Cmd::Overlap { .. } => CommandKind::Overlap,
            Cmd::Residue { .. } => CommandKind::Residue,
            Cmd::FrameBounds { .. } => CommandKind::FrameBounds,
            Cmd::Construct { .. } => CommandKind::Construct,
            Cmd::Obstruction { .. } => CommandKind::Obstruction,
            Cmd::CertifyMeasure { .. } => CommandKind::CertifyMeasure,
            Cmd::Gabor { .. } => CommandKind::Gabor,
            Cmd::Verify => CommandKind::Verify,
        };
        let mut c = RunConfig::new(kind);
        if let Some(path) = &self.config {
            let f = read_config(path)?;
            if let Some(k) = f.command {
                if k != kind {
                    return Err(invalid(
                        "command",
                        format!("config is for `{}`, not `{}`", command_name(k), command_name(kind)),
                    ));
                }
            }
            let base = path.parent().unwrap_or(Path::new(""));
            let rel = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
            set_opt(&mut c.set, rel(f.set));
            set_opt(&mut c.points, rel(f.points));
            set_opt(&mut c.system, rel(f.system));
            set_opt(&mut c.lattice, f.lattice);
            set(&mut c.windows, f.windows);
            set_opt(&mut c.x0, f.x0);
            set_opt(&mut c.x, f.x);
            set(&mut c.h, f.h);
            set(&mut c.radii, f.radii);
            set(&mut c.grid_n, f.grid_n);
            set_opt(&mut c.trunc, f.trunc);
            set(&mut c.step, f.step);
            set(&mut c.x_max, f.x_max);
            set(&mut c.m, f.m);
            set(&mut c.p, f.p);
            set(&mut c.q, f.q);
            set(&mut c.trials, f.trials);
            set(&mut c.samples, f.samples);
            set(&mut c.seed, f.seed);
        }
        set(&mut c.seed, self.seed);
        c.csv = self.csv;
        match self.command {
            Cmd::Density { points, h, samples } => {
                set_opt(&mut c.points, points);
                set(&mut c.h, h);
                set(&mut c.samples, samples);
            }
            Cmd::Overlap { set: s, x, x_max, step } => {
                set_opt(&mut c.set, s);
                set_opt(&mut c.x, vector(x, "x")?);
                set(&mut c.x_max, x_max);
                set(&mut c.step, step);
            }
            Cmd::Residue { set: s, lattice } => {
                set_opt(&mut c.set, s);
                set_opt(&mut c.lattice, lattice);
            }
            Cmd::FrameBounds { system, grid_n, trunc } => {
                set_opt(&mut c.system, system);
                set(&mut c.grid_n, grid_n);
                set_opt(&mut c.trunc, trunc);
            }
            Cmd::Construct {
                set: s,
                windows,
                lattice,
                grid_n,
                trunc,
                out,
            } => {
                set_opt(&mut c.set, s);
                if !windows.is_empty() {
                    c.windows = windows;
                }
                set_opt(&mut c.lattice, lattice);
                set(&mut c.grid_n, grid_n);
                set_opt(&mut c.trunc, trunc);
                c.out = out;
            }
            Cmd::Obstruction { set: s, x_max, step, radii } => {
                set_opt(&mut c.set, s);
                set(&mut c.x_max, x_max);
                set(&mut c.step, step);
                set(&mut c.radii, radii);
            }
            Cmd::CertifyMeasure { set: s, x0, grid_n, trials } => {
                set_opt(&mut c.set, s);
                set_opt(&mut c.x0, vector(x0, "x0")?);
                set(&mut c.grid_n, grid_n);
                set(&mut c.trials, trials);
            }
            Cmd::Gabor { window, p, q, m } => {
                if let Some(w) = window {
                    c.windows = vec![w];
                }
                set(&mut c.p, p);
                set(&mut c.q, q);
                set(&mut c.m, m);
            }
            Cmd::Verify => {}
        }
        c.validate()?;
        Ok(c)
    }
}

/// Destination for the CSV artifact: the `--csv` file or standard output.
fn emit_csv(cfg: &RunConfig, out: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cfg.csv {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            write(&mut f)?;
            writeln!(out, "csv: {}", path.display())?;
        }
        None => {
            writeln!(out)?;
            write(out)?;
        }
    }
    Ok(())
}

fn trunc_box(cfg: &RunConfig, omega: &crate::domain_sets::BoxUnionSet) -> Result<AxisBox> {
    match cfg.trunc {
        Some(t) => AxisBox::centered(omega.dim(), t),
        None => Ok(nyquist_trunc(omega, cfg.grid_n)),
    }
}

/// Execute a resolved configuration, writing the report (and the CSV when no
/// `--csv` path is set) to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    match cfg.command {
        CommandKind::Density => {
            let mu = load_comb(cfg.require(&cfg.points, "points")?)?;
            let exact = density_closed_form(&mu);
            let est = density_windowed(&mu, &cfg.h, cfg.samples)?;
            writeln!(out, "closed form: D- = {}, D+ = {}", exact.lower, exact.upper)?;
            writeln!(out, "windowed estimate at h = {}: D- ~ {}, D+ ~ {}", est.estimator_trace.last().map_or(0.0, |r| r.h), est.lower, est.upper)?;
            emit_csv(cfg, out, |w| est.write_trace_csv(w))
        }
        CommandKind::Overlap => {
            let omega = load_set(cfg.require(&cfg.set, "set")?)?.set;
            let d = omega.dim();
            let xs: Vec<Vec<f64>> = match &cfg.x {
                Some(x) => vec![x.clone()],
                None => {
                    let k = (cfg.x_max / cfg.step + 1e-9).floor() as i64;
                    let per_axis = (2 * k + 1) as usize;
                    let total = per_axis
                        .checked_pow(d as u32)
                        .filter(|t| *t <= 1_000_000)
                        .ok_or_else(|| invalid("step", "more than 10^6 sample translates"))?;
                    (0..total)
                        .map(|mut flat| {
                            let mut x = vec![0.0; d];
                            for i in (0..d).rev() {
                                x[i] = ((flat % per_axis) as i64 - k) as f64 * cfg.step;
                                flat /= per_axis;
                            }
                            x
                        })
                        .collect()
                }
            };
            let profile = omega.overlap_profile(&xs)?;
            let min = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            writeln!(out, "|Ω| = {}; {} translates; smallest overlap {min}", omega.measure(), profile.len())?;
            emit_csv(cfg, out, |w| {
                let mut w = csv::Writer::from_writer(w);
                let mut header: Vec<String> = if d == 1 { vec!["x".into()] } else { (1..=d).map(|i| format!("x{i}")).collect() };
                header.push("value".into());
                w.write_record(&header)?;
                for (x, v) in &profile {
                    let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
                    row.push(v.to_string());
                    w.write_record(&row)?;
                }
                w.flush()?;
                Ok(())
            })
        }
        CommandKind::Residue => {
            let omega = load_set(cfg.require(&cfg.set, "set")?)?.set;
            let lattice = parse_lattice(cfg.require(&cfg.lattice, "lattice")?, omega.dim())?;
            let v = omega.lattice_residue_check(&lattice)?;
            let (verdict, delta, measure) = match &v {
                ResidueVerdict::Holds => {
                    writeln!(out, "verdict: packs (translates overlap only on null sets)")?;
                    ("packs", String::new(), 0.0)
                }
                ResidueVerdict::Violated { gamma_prime, point, collision, .. } => {
                    writeln!(
                        out,
                        "verdict: overlaps; x = {point:?} and x + {gamma_prime:?} both lie in the set on a region of measure {}",
                        collision.measure()
                    )?;
                    let delta = gamma_prime.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
                    ("overlaps", delta, collision.measure())
                }
            };
            emit_csv(cfg, out, |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(["verdict", "delta", "collision_measure"])?;
                w.write_record([verdict.to_string(), delta, measure.to_string()])?;
                w.flush()?;
                Ok(())
            })
        }
        CommandKind::FrameBounds => {
            let path = cfg.require(&cfg.system, "system")?;
            let sys = load_system(path)?;
            let r = estimate_frame_bounds(&sys, cfg.grid_n, &trunc_box(cfg, sys.omega())?)?;
            writeln!(
                out,
                "A_est = {}, B_est = {}, B/A = {}; {} cells, trunc {}, solver {:?}",
                r.a_est,
                r.b_est,
                r.tight_ratio,
                r.model_cells,
                format_box(&r.trunc_box),
                r.solver
            )?;
            for n in &r.notes {
                writeln!(out, "note: {n}")?;
            }
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            emit_csv(cfg, out, |w| write_frame_bounds_csv(&[(&name, &r)], w))
        }
        CommandKind::Construct => construct(cfg, out),
        CommandKind::Obstruction => {
            let loaded = load_set(cfg.require(&cfg.set, "set")?)?;
            let r = check_thm03(&loaded.set, &cfg.radii, cfg.x_max, cfg.step, loaded.tail_measure)?;
            match r.radius {
                Some(rad) => writeln!(out, "verdict: every sampled overlap beyond radius {rad} is positive, so no tight Fourier frame")?,
                None => writeln!(out, "verdict: inconclusive; {} sampled translates have zero overlap", r.zero_overlap.len())?,
            }
            writeln!(out, "{}", r.caveat)?;
            emit_csv(cfg, out, |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(["start", "end"])?;
                for (a, b) in &r.witness_intervals {
                    w.write_record([a.to_string(), b.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })
        }
        CommandKind::CertifyMeasure => {
            let omega = load_set(cfg.require(&cfg.set, "set")?)?.set;
            let x0 = cfg.require(&cfg.x0, "x0")?;
            match cosine_measure_certificate(&omega, x0, cfg.grid_n, cfg.trials, cfg.seed) {
                Ok(cert) => {
                    writeln!(out, "verdict: tight with A = 1; residual {:e} over {} trials (seed {})", cert.residual, cert.test_family_size, cert.seed)?;
                    emit_csv(cfg, out, |w| write_certificates_csv(&[cert], w))
                }
                Err(Error::Refused(why)) => Ok(writeln!(out, "verdict: refused; {why}")?),
                Err(e) => Err(e),
            }
        }
        CommandKind::Gabor => {
            let text = cfg.windows.first().ok_or_else(|| invalid("window", "required by `gabor`"))?;
            let v = certify_gabor(&Window::parse(text)?, cfg.p, cfg.q, cfg.m)?;
            writeln!(out, "verdict: {}; {}", v.verdict, v.note)?;
            writeln!(out, "A53 = {}, B53 = {}, unitarity residual {:e}", v.a53, v.b53, v.unitarity_residual)?;
            emit_csv(cfg, out, |w| write_gabor_csv(&[v], w))
        }
        CommandKind::Verify => {
            let outcomes = suite::run_suite(cfg.seed)?;
            suite::write_verify_report(&outcomes, &mut *out)?;
            emit_csv(cfg, out, |w| suite::write_verify_csv(&outcomes, w))
        }
    }
}

fn construct(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let omega = load_set(cfg.require(&cfg.set, "set")?)?.set;
    let built = match (&cfg.lattice, cfg.windows.is_empty()) {
        (Some(_), false) => return Err(invalid("window", "give either windows or a lattice, not both")),
        (None, true) => return Err(invalid("window", "`construct` needs --window or --lattice")),
        (Some(l), true) => {
            let gamma = parse_lattice(l, omega.dim())?;
            let trunc = trunc_box(cfg, &omega)?;
            match construct_prop51(&omega, &gamma, cfg.grid_n, &trunc)? {
                Prop51Outcome::Tight(c) => c,
                Prop51Outcome::Refused(r) => {
                    writeln!(out, "verdict: refused; {}", r.reason)?;
                    let freqs = gamma.dual().enumerate_in_box(&trunc);
                    let worst = frame_coefficients(&r.counterexample, &freqs).iter().map(|c| c.norm()).fold(0.0, f64::max);
                    writeln!(out, "counterexample: largest frame coefficient {worst:e} over {} frequencies", freqs.len())?;
                    return emit_csv(cfg, out, |w| r.counterexample.write_csv(w));
                }
            }
        }
        (None, false) => {
            let windows = cfg.windows.iter().map(|w| Window::parse(w)).collect::<Result<Vec<_>>>()?;
            match construct_thm02(&windows, &omega, cfg.grid_n) {
                Ok(c) => c,
                Err(Error::Refused(why)) => return Ok(writeln!(out, "verdict: refused; {why}")?),
                Err(e) => return Err(e),
            }
        }
    };
    writeln!(out, "verdict: constructed; predicted A = {}, B = {}", built.predicted_a, built.predicted_b)?;
    writeln!(out, "{}", built.provenance)?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, to_json_pretty(&SystemDesc::from_construction(&built))?)?;
        writeln!(out, "system: {}", path.display())?;
    }
    let r = estimate_matched(&built)?;
    emit_csv(cfg, out, |w| write_frame_bounds_csv(&[("construction", &r)], w))
}

/// Cap rayon's worker count from `FRAMEFORGE_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("FRAMEFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| invalid("FRAMEFORGE_THREADS", format!("`{v}` is not a positive integer")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| cli.into_config()).and_then(|cfg| run(&cfg, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
            2
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["frameforge"];
        full.extend_from_slice(args);
        let code = main_with_args(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gabor_subcommand() {
        let (code, out, _) = run_args(&["gabor", "--window", "indicator(0,0.5)", "--p", "1", "--q", "2", "--M", "256"]);
        assert_eq!(code, 0);
        assert!(out.contains("frame_certified"));
        assert!(out.contains("p,q,M,A53,B53,verdict,zz_min,zz_max"));
    }

    #[test]
    fn negative_verdict_exits_zero() {
        let (code, out, _) = run_args(&["gabor", "--window", "indicator(0,0.5)", "--M", "64"]);
        assert_eq!(code, 0);
        assert!(out.contains("not_frame"));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let (code, _, err) = run_args(&["gabor", "--window", "x", "--M", "8"]);
        assert_eq!(code, 2);
        assert!(err.contains("`M`"), "{err}");
        assert_eq!(err.lines().count(), 1);
        let (code, _, err) = run_args(&["frame-bounds"]);
        assert_eq!(code, 2);
        assert!(err.contains("`system`"), "{err}");
        let (code, _, _) = run_args(&["no-such-command"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn config_file_precedence() {
        let dir = std::env::temp_dir().join(format!("frameforge-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"M": 128, "q": 2, "seed": 7}"#).unwrap();
        let cli = Cli::try_parse_from(["frameforge", "gabor", "--config", path.to_str().unwrap(), "--M", "64"]).unwrap();
        let c = cli.into_config().unwrap();
        assert_eq!((c.m, c.q, c.seed), (64, 2, 7));
        std::fs::write(&path, r#"{"grid": 3}"#).unwrap();
        let cli = Cli::try_parse_from(["frameforge", "gabor", "--config", path.to_str().unwrap()]).unwrap();
        let e = cli.into_config().unwrap_err().to_string();
        assert!(e.contains("grid"), "{e}");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
