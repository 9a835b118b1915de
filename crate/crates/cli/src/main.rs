use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use schro1d::harness::{
    default_energies, random_sweep, run_suite, scenario_trace, write_curve_csv, write_prufer_csv, write_trace_csv,
    FamilyKind, PotentialSpec, Scenario, SuiteConfig, SuiteReport,
};
use schro1d::spectral::simon_stolz_curve_with_norm;
use schro1d::{constants_with_floor, prufer_decompose, Energy, Error, NormKind};

#[derive(Parser)]
#[command(
    name = "schro1d",
    version,
    about = "Checks derivative estimates for 1D Schrödinger eigenfunctions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print C1 = sup_x ∫_x^{x+1} V₋ for a potential, and the constants at an energy.
    C1 {
        /// Potential JSON (explicit or family shorthand).
        #[arg(long)]
        config: PathBuf,
        /// Energy as `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<String>,
        #[arg(long)]
        c2_floor: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one scenario and write its trace as CSV.
    Solve {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        max_step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite and write its JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write all outcomes as a flat JSON array.
        #[arg(long)]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        c2_floor: Option<f64>,
    },
    /// Randomized sweep over potential families and energies.
    Sweep {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Comma-separated subset of square_well, spike_lattice, random_step.
        #[arg(long)]
        families: Option<String>,
        /// Semicolon-separated energies, each `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        energies: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        c2_floor: Option<f64>,
    },
    /// Running integral of 1/‖T(E,x,0)‖² on [0, X], as CSV.
    SimonStolz {
        /// Potential JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        energy: String,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        max_step: f64,
        #[arg(long, value_enum, default_value_t = Norm::Operator)]
        norm: Norm,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prüfer variables (R, θ) of a real scenario at E = k² > 0, as CSV.
    Prufer {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        max_step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    Operator,
    Frobenius,
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::InvalidPotential(_) | Error::InvalidFamily(_) => 2,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail(1, e.to_string())
    }
}

fn config_fail(location: impl std::fmt::Display, msg: impl std::fmt::Display) -> Fail {
    Fail(2, format!("config error at {location}: {msg}"))
}

fn read_json(path: &Path) -> Result<Value, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| config_fail(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| config_fail(path.display(), e))
}

fn parse_energy(s: &str) -> Result<Energy, Fail> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| config_fail("--energy", format!("{t:?}: {e}")))
    };
    let (re, im) = match parts.as_slice() {
        [re] => (num(re)?, 0.0),
        [re, im] => (num(re)?, num(im)?),
        _ => return Err(config_fail("--energy", format!("expected `re` or `re,im`, got {s:?}"))),
    };
    Energy::new(re, im).map_err(|e| config_fail("--energy", e))
}

fn load_potential(path: &Path, seed: Option<u64>) -> Result<schro1d::PiecewisePotential, Fail> {
    let v = read_json(path)?;
    let spec: PotentialSpec = serde_json::from_value(v).map_err(|e| config_fail(path.display(), e))?;
    Ok(spec.build(seed.unwrap_or(0))?)
}

fn load_scenario(path: &Path, max_step: Option<f64>) -> Result<Scenario, Fail> {
    let mut v = read_json(path)?;
    if let (Some(h), Some(obj)) = (max_step, v.as_object_mut()) {
        obj.insert("max_step".into(), json!(h));
    }
    let doc = json!({ "scenarios": [v] });
    let mut cfg = SuiteConfig::from_json(&doc.to_string())?;
    Ok(cfg.scenarios.remove(0))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Fail> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    let mut w = sink(out)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

fn finish_report(report: &SuiteReport, out: Option<&Path>, outcomes: Option<&Path>) -> Result<u8, Fail> {
    if let Some(p) = outcomes {
        let text = serde_json::to_string_pretty(&report.outcomes()).expect("outcomes serialize");
        write_text(Some(p), &text)?;
    }
    match out {
        Some(p) => {
            write_text(Some(p), &report.to_json())?;
            for s in &report.scenarios {
                eprintln!("{:<40} {:?}", s.id, s.status);
            }
            let m = &report.summary;
            eprintln!(
                "{} scenarios: {} pass, {} expected-fail, {} unexpected; {} checks, {} violations",
                m.total, m.passed, m.expected_fail, m.unexpected, m.checks, m.violations
            );
        }
        None => write_text(None, &report.to_json())?,
    }
    Ok(report.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.cmd {
        Cmd::C1 {
            config,
            energy,
            c2_floor,
            seed,
            out,
        } => {
            let v = load_potential(&config, seed)?;
            let profile = v.c1_sup();
            let mut doc = json!({ "c1": profile.supremum, "argmax": profile.argmax });
            if let Some(e) = energy {
                let consts = constants_with_floor(profile.supremum, parse_energy(&e)?, c2_floor)?;
                doc["constants"] = serde_json::to_value(consts).expect("constants serialize");
            }
            write_text(out.as_deref(), &serde_json::to_string_pretty(&doc).expect("json"))?;
            Ok(0)
        }
        Cmd::Solve { config, max_step, out } => {
            let sc = load_scenario(&config, max_step)?;
            let v = sc.potential.build(sc.seed)?;
            let trace = scenario_trace(&sc, &v)?;
            write_trace_csv(sink(out.as_deref())?, &trace)?;
            Ok(0)
        }
        Cmd::Verify {
            config,
            out,
            outcomes,
            c2_floor,
        } => {
            let cfg = SuiteConfig::from_path(&config)?;
            let report = run_suite(&cfg, c2_floor)?;
            finish_report(&report, out.as_deref(), outcomes.as_deref())
        }
        Cmd::Sweep {
            seed,
            n,
            families,
            energies,
            out,
            outcomes,
            c2_floor,
        } => {
            let families = match families {
                None => FamilyKind::ALL.to_vec(),
                Some(s) => s
                    .split(',')
                    .map(|f| {
                        FamilyKind::parse(f.trim())
                            .ok_or_else(|| config_fail("--families", format!("unknown family {f:?}")))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let energies = match energies {
                None => default_energies(),
                Some(s) => s.split(';').map(parse_energy).collect::<Result<_, _>>()?,
            };
            if n == 0 {
                return Err(config_fail("--n", "must be at least 1"));
            }
            let report = random_sweep(&families, n, &energies, seed, c2_floor)?;
            finish_report(&report, out.as_deref(), outcomes.as_deref())
        }
        Cmd::SimonStolz {
            config,
            energy,
            x_max,
            max_step,
            norm,
            seed,
            out,
        } => {
            let v = load_potential(&config, seed)?;
            let kind = match norm {
                Norm::Operator => NormKind::Operator,
                Norm::Frobenius => NormKind::Frobenius,
            };
            let curve = simon_stolz_curve_with_norm(&v, parse_energy(&energy)?, x_max, max_step, kind)?;
            write_curve_csv(sink(out.as_deref())?, &curve)?;
            eprintln!(
                "cumulative({x_max}) = {}, tail log-log slope = {}",
                curve.total(),
                curve.tail_slope.map_or("n/a".into(), |s| format!("{s:.4}"))
            );
            Ok(0)
        }
        Cmd::Prufer { config, max_step, out } => {
            let sc = load_scenario(&config, max_step)?;
            let v = sc.potential.build(sc.seed)?;
            let trace = scenario_trace(&sc, &v)?;
            let e = sc.energy;
            if !e.is_real() || e.re <= 0.0 {
                return Err(Fail(1, format!("prufer needs real E > 0, got {} + {}i", e.re, e.im)));
            }
            let p = prufer_decompose(&trace, e.re.sqrt())?;
            write_prufer_csv(sink(out.as_deref())?, &p)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
