//! Command-line front end. `run` takes the full argv and returns the exit
//! code so the binary stays a one-liner and tests can drive it in-process.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use okacert::basin::{self, BasinConfig, Slice};
use okacert::certify::{self, SamplingPlan, Verdict};
use okacert::convex::{ConvexError, ConvexSet, ConvexSetSpec};
use okacert::geometry::{self, ComplexPoint};
use okacert::gallery;
use okacert::sampling;
use okacert::smoothing::{outer_sequence, OuterOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Relative output paths resolve under this directory when it is set.
pub const OUT_DIR_VAR: &str = "OKACERT_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("polyhedron is infeasible")]
    InfeasiblePolyhedron,
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// Parses and constructs a set spec, so feasibility and PSD checks run here.
pub fn parse_set_spec(text: &str) -> Result<ConvexSetSpec, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ConvexSetSpec = serde_path_to_error::deserialize(de).map_err(|e| SpecError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    match ConvexSet::new(spec.clone()) {
        Ok(_) => Ok(spec),
        Err(ConvexError::EmptySet) if matches!(spec, ConvexSetSpec::Polyhedron { .. }) => Err(SpecError::InfeasiblePolyhedron),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub config: Value,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_time_ms: u128,
}

#[derive(Parser)]
#[command(name = "okacert", version, about = "Checks convex sets for the conditions that make their complements Oka")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SliceArg {
    Z1,
    Z2,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check on a set spec and emit a certificate.
    Certify {
        /// A JSON set spec, or the name of a gallery example.
        set: String,
        /// Boundary samples; the other counts keep their defaults.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build nested smooth outer approximations of a set.
    Approx {
        set: String,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, default_value_t = 5.0)]
        window: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design a contracting step and classify a grid slice of its basin.
    Basin {
        /// A JSON basin config; the defaults fill missing fields. Omit for the default run.
        config: Option<PathBuf>,
        /// Coordinate held fixed on the slice (at its value at f).
        #[arg(long, value_enum)]
        slice: Option<SliceArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Report path; the grid CSV and SVG go next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the Cayley transform identity on random points of the unit ball.
    Cayley {
        #[arg(long, default_value_t = 10_000)]
        check: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// The built-in example sets.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    Emit { name: String },
}

struct Outcome {
    code: i32,
    command: &'static str,
    inputs: Vec<String>,
    config: Value,
    /// Primary output and its sidecars, in order.
    files: Vec<(PathBuf, String)>,
    stdout: Option<String>,
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok(out) => match finish(out, &argv, start) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn finish(out: Outcome, argv: &[String], start: Instant) -> anyhow::Result<i32> {
    if let Some(s) = &out.stdout {
        print!("{s}");
    }
    if out.files.is_empty() {
        return Ok(out.code);
    }
    let mut written = Vec::new();
    for (path, body) in &out.files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path.display().to_string());
    }
    let manifest = RunManifest {
        command: out.command.to_string(),
        argv: argv.to_vec(),
        inputs: out.inputs,
        config: out.config,
        outputs: written,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis(),
    };
    let mpath = sidecar(&out.files[0].0, "manifest.json");
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")?;
    eprintln!("wrote {} (manifest {})", out.files[0].0.display(), mpath.display());
    Ok(out.code)
}

fn sidecar(primary: &Path, ext: &str) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::CertifiedExact | Verdict::VerifiedSampled => EXIT_OK,
        Verdict::Refuted => EXIT_REFUTED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// A file path, or a gallery name when no such file exists.
fn load_set(arg: &str) -> anyhow::Result<(ConvexSetSpec, String)> {
    let p = Path::new(arg);
    if p.exists() {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {arg}"))?;
        return Ok((parse_set_spec(&text).with_context(|| format!("in {arg}"))?, arg.to_string()));
    }
    gallery::lookup(arg)
        .map(|s| (s, format!("gallery:{arg}")))
        .ok_or_else(|| anyhow!("{arg} is neither a file nor a gallery example (try `okacert examples list`)"))
}

fn emit(out: Option<PathBuf>, body: String) -> (Vec<(PathBuf, String)>, Option<String>) {
    match out {
        Some(p) => (vec![(resolve_out(&p), body)], None),
        None => (vec![], Some(body)),
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Certify { set, samples, seed, tol, out } => {
            let (spec, input) = load_set(&set)?;
            let mut plan = SamplingPlan::default();
            if let Some(n) = samples {
                plan.boundary = n;
            }
            if let Some(s) = seed {
                plan.seed = s;
            }
            if let Some(t) = tol {
                plan.tol = t;
            }
            plan.validate().map_err(|e| anyhow!(e))?;
            let e = ConvexSet::new(spec)?;
            let cert = certify::certify_oka_complement(&e, &plan);
            let code = verdict_code(cert.overall);
            eprintln!("overall: {}", cert.overall.as_str());
            let (files, stdout) = emit(out, cert.to_json() + "\n");
            Ok(Outcome { code, command: "certify", inputs: vec![input], config: serde_json::to_value(plan)?, files, stdout })
        }
        Command::Approx { set, steps, window, seed, format, out } => {
            let (spec, input) = load_set(&set)?;
            let e = ConvexSet::new(spec)?;
            let opts = OuterOptions { seed, ..OuterOptions::default() };
            let state = outer_sequence(&e, steps, window, &opts)?;
            let nest = state.verify_nesting(&e, 100, opts.execution);
            eprintln!("nesting violations: {}, points of E outside: {}", nest.nesting_violations, nest.e_violations);
            let code = if nest.nesting_violations == 0 && nest.e_violations == 0 { EXIT_OK } else { EXIT_REFUTED };
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&state)? + "\n",
                Format::Csv => state.grid_csv(100),
            };
            let (files, stdout) = emit(out, body);
            let config = serde_json::json!({ "steps": steps, "window": window, "options": opts });
            Ok(Outcome { code, command: "approx", inputs: vec![input], config, files, stdout })
        }
        Command::Basin { config, slice, format, out } => {
            let (mut cfg, input) = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    let cfg: BasinConfig = serde_path_to_error::deserialize(de).map_err(|e| anyhow!("{}: {}", e.path(), e.inner()))?;
                    (cfg, p.display().to_string())
                }
                None => (BasinConfig::default(), "default".to_string()),
            };
            if let Some(s) = slice {
                let (slice, fixed, center) = match s {
                    SliceArg::Z1 => (Slice::Z1, cfg.f[0], cfg.f[1]),
                    SliceArg::Z2 => (Slice::Z2, cfg.f[1], cfg.f[0]),
                };
                cfg.grid = basin::GridSpec { slice, fixed, center, ..cfg.grid.clone() };
            }
            let rep = match basin::basin_report(&cfg) {
                Ok(r) => r,
                Err(basin::BasinError::InvalidConfig(m)) => bail!("invalid basin config: {m}"),
                Err(e) => return Err(e.into()),
            };
            eprintln!("design: {}", rep.design.note);
            eprintln!(
                "basin {} escape {} undecided {}; basin points in K {}, on z2 = 0 {}; bracket violations {}",
                rep.basin, rep.escape, rep.undecided, rep.basin_in_k, rep.basin_on_hyperplane, rep.bracket_violations
            );
            let code = verdict_code(rep.verdict);
            let json = serde_json::to_string_pretty(&rep)? + "\n";
            let csv = rep.grid.as_ref().map(|g| g.to_csv());
            let files = match out {
                Some(p) => {
                    let p = resolve_out(&p);
                    let mut v = Vec::new();
                    match (format, &csv) {
                        (Format::Csv, Some(c)) => v.push((p.clone(), c.clone())),
                        (Format::Csv, None) => bail!("no grid to export: the design was inconclusive"),
                        (Format::Json, _) => {
                            v.push((p.clone(), json.clone()));
                            if let Some(c) = &csv {
                                v.push((sidecar(&p, "csv"), c.clone()));
                            }
                        }
                    }
                    if let Some(g) = &rep.grid {
                        v.push((sidecar(&p, "svg"), g.to_svg()));
                    }
                    v
                }
                None => vec![],
            };
            let stdout = if files.is_empty() {
                Some(match format {
                    Format::Csv => csv.unwrap_or_default(),
                    Format::Json => json,
                })
            } else {
                None
            };
            Ok(Outcome { code, command: "basin", inputs: vec![input], config: serde_json::to_value(&cfg)?, files, stdout })
        }
        Command::Cayley { check, dim, seed } => {
            if dim < 1 {
                bail!("--dim must be at least 1");
            }
            let start = Instant::now();
            let mut rng = sampling::rng(seed, 0);
            let (mut worst, mut n) = (0.0f64, 0usize);
            while n < check {
                let w = ComplexPoint::from_real(&sampling::ball(&mut rng, 2 * dim, 1.0));
                if (geometry::C::new(1.0, 0.0) - w.0[dim - 1]).norm() <= 0.05 {
                    continue;
                }
                worst = worst.max(geometry::cayley_identity_residual(&w)?);
                n += 1;
            }
            let pass = worst <= 1e-10;
            let body = serde_json::to_string_pretty(&serde_json::json!({
                "samples": check,
                "dim": dim,
                "seed": seed,
                "max_residual": worst,
                "pass": pass,
            }))? + "\n";
            eprintln!("max residual {worst:.3e} in {:?}", start.elapsed());
            let code = if pass { EXIT_OK } else { EXIT_REFUTED };
            Ok(Outcome { code, command: "cayley", inputs: vec![], config: Value::Null, files: vec![], stdout: Some(body) })
        }
        Command::Examples { action } => {
            let body = match action {
                ExamplesAction::List => gallery::GALLERY.iter().map(|e| format!("{:<18} {}\n", e.name, e.about)).collect(),
                ExamplesAction::Emit { name } => {
                    let spec = gallery::lookup(&name).ok_or_else(|| anyhow!("no gallery example named {name}"))?;
                    spec.to_json() + "\n"
                }
            };
            Ok(Outcome { code: EXIT_OK, command: "examples", inputs: vec![], config: Value::Null, files: vec![], stdout: Some(body) })
        }
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let m: RunManifest = serde_json::from_str(&text)?;
            if m.version != env!("CARGO_PKG_VERSION") {
                eprintln!("warning: manifest written by version {}", m.version);
            }
            if m.argv.get(1).map(String::as_str) == Some("replay") {
                bail!("refusing to replay a replay");
            }
            let code = run(m.argv.clone());
            Ok(Outcome { code, command: "replay", inputs: vec![], config: Value::Null, files: vec![], stdout: None })
        }
    }
}
