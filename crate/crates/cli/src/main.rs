use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use g2cone::adams_simon::{slow_rate_report, write_state_csv, AsConfig, SCHEMA_VERSION};
use g2cone::calculus::{killing_identity_report, lie_report, nk_report, Calculus, IdentityCheck, IdentityReport};
use g2cone::cone::{
    generic_two_form, laplacian14_display, linearization_report, linearization_test_data, two_form_quadratic_identity,
    wedge_vanishing_report,
};
use g2cone::liealg::{calibrate, LieBasis, StructureConstants};
use g2cone::obstruction::{diag_zeta, obstruction_integral};
use g2cone::spectral_ode::{solve_mode, GridFunction, Kind, ModeSpec, SolveOptions};
use g2cone::tables::{emit_tables, tables_report, Fixtures};

/// Exact identity suites and reduced-model numerics for the G2 cone over SU(3)/T^2.
#[derive(Parser)]
#[command(name = "g2cone", version)]
struct Cli {
    /// Worker threads; overrides G2CONE_THREADS. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lie,
    Nk,
    Killing,
    Linearization,
    Tables,
    QuadraticIdentity,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a symbolic suite; exit 0 iff every identity holds exactly.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Structure-constant JSON in the `structure-constants` layout.
        #[arg(long)]
        structure_constants: Option<PathBuf>,
        /// Directory with the table fixtures; the built-in copies otherwise.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Print the computed tables.
    Tables {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Write one file per table into this directory instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the calibrated structure constants as JSON.
    StructureConstants,
    /// Monte Carlo of the obstruction integral over SU(3).
    Obstruction {
        /// Eight comma-separated coordinates; diag(i, i, -2i) by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        zeta: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed point of the reduced model and the slow-rate table.
    Slowrate {
        #[arg(long = "T", default_value_t = 50.0)]
        t0: f64,
        #[arg(long, default_value_t = 200.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.05)]
        grid: f64,
        #[arg(long, default_value_t = 1.25)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Writes `<out>.json` and `<out>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one mode equation with forcing read from CSV (`t,u0`).
    Ode {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        forcing: PathBuf,
        /// Boundary datum: Robin value for step3, functional value for step4.
        #[arg(long, allow_hyphen_values = true)]
        bc: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit 1 is an identity or numerical failure, exit 2 bad input.
enum Failure {
    Identity(String),
    Input(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| std::env::var("G2CONE_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.cmd {
        Cmd::Verify { suite, structure_constants, fixtures } => verify(suite, structure_constants.as_deref(), fixtures.as_deref()),
        Cmd::Tables { format, out } => tables(format, out.as_deref()),
        Cmd::StructureConstants => structure_constants(),
        Cmd::Obstruction { zeta, samples, seed, out } => obstruction(zeta, samples, seed, out.as_deref()),
        Cmd::Slowrate { t0, tmax, grid, q, c, out } => {
            let cfg = AsConfig { t0, tmax, grid, q, c, ..AsConfig::default() };
            slowrate(&cfg, out.as_deref())
        }
        Cmd::Ode { kind, lambda, forcing, bc, out } => ode(&kind, lambda, &forcing, bc, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Identity(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(input)? + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(input),
    }
}

fn load_constants(path: &Path) -> Result<(StructureConstants, i8), Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let sc = StructureConstants::from_json(&v).map_err(input)?;
    let mc = match v.get("mc") {
        None => -1,
        Some(m) => m.as_i64().filter(|m| m.abs() == 1).ok_or_else(|| input("mc must be 1 or -1"))? as i8,
    };
    Ok((sc, mc))
}

fn verify(suite: Suite, sc_path: Option<&Path>, fx_dir: Option<&Path>) -> Outcome {
    let cal = calibrate().map_err(|e| Failure::Identity(e.to_string()))?;
    let (sc, basis, owned);
    let calc: &Calculus = match sc_path {
        Some(p) => {
            let (c, mc) = load_constants(p)?;
            sc = c;
            basis = LieBasis::with_signs(cal.basis.sigma, mc);
            owned = Calculus::new(&sc, mc);
            &owned
        }
        None => {
            sc = cal.sc.clone();
            basis = cal.basis.clone();
            Calculus::calibrated()
        }
    };
    let fixtures = match fx_dir {
        Some(d) => Fixtures::from_dir(d).map_err(input)?,
        None => Fixtures::builtin(),
    };
    let want = |s: Suite| suite == s || suite == Suite::All;
    let mut reports: Vec<IdentityReport> = Vec::new();
    if want(Suite::Lie) {
        reports.push(lie_report(&basis, &sc));
    }
    if want(Suite::Nk) {
        reports.push(nk_report(calc));
        reports.push(wedge_vanishing_report(calc));
    }
    if want(Suite::Killing) {
        reports.push(killing_identity_report(calc));
    }
    if want(Suite::Linearization) {
        let (x, eta8) = linearization_test_data();
        let mut r = linearization_report(calc, &x, &eta8);
        let display = laplacian14_display(calc, &x, &eta8);
        r.checks.push(match display {
            Ok(d) => IdentityCheck::from_bool("Laplacian display (-6, -12, -8r d/dr, -4d(JX))", d.matches(), || {
                format!("radial {} vs {}", d.radial, d.radial_expected)
            }),
            Err(e) => IdentityCheck::from_bool("Laplacian display (-6, -12, -8r d/dr, -4d(JX))", false, || e.to_string()),
        });
        reports.push(r);
    }
    if want(Suite::Tables) {
        reports.push(tables_report(calc, &fixtures));
    }
    if want(Suite::QuadraticIdentity) {
        reports.push(two_form_quadratic_identity(&generic_two_form()));
    }
    let first = reports.iter().find_map(|r| r.first_failure().map(|c| format!("{}: {}", r.suite, c.identity)));
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "passed": first.is_none(),
        "first_failure": first,
        "suites": reports,
    });
    emit(&value, None)?;
    match first {
        None => Ok(()),
        Some(f) => Err(Failure::Identity(f)),
    }
}

fn tables(format: Format, out: Option<&Path>) -> Outcome {
    let all = emit_tables(Calculus::calibrated()).map_err(Failure::Identity)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Md => "md",
    };
    let mut stdout = String::new();
    for (name, csv, md) in all {
        let body = match format {
            Format::Csv => csv,
            Format::Md => md,
        };
        match out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(input)?;
                let p = dir.join(format!("{name}.{ext}"));
                fs::write(&p, body).map_err(|e| input(format!("{}: {e}", p.display())))?;
            }
            None => {
                stdout.push_str(&format!("# {name}\n{body}\n"));
            }
        }
    }
    std::io::stdout().write_all(stdout.as_bytes()).map_err(input)
}

fn structure_constants() -> Outcome {
    let cal = calibrate().map_err(|e| Failure::Identity(e.to_string()))?;
    let mut v = cal.sc.to_json();
    v["mc"] = json!(cal.basis.mc);
    emit(&v, None)
}

fn obstruction(zeta: Option<Vec<f64>>, samples: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let z: [f64; 8] = match zeta {
        Some(v) => v.try_into().map_err(|_| input("--zeta needs 8 values"))?,
        None => diag_zeta(),
    };
    let est = obstruction_integral(Calculus::calibrated(), &z, samples, seed).map_err(input)?;
    let mut v = serde_json::to_value(&est).map_err(input)?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    emit(&v, out)
}

fn slowrate(cfg: &AsConfig, out: Option<&Path>) -> Outcome {
    let res = slow_rate_report(cfg).map_err(|e| match e {
        g2cone::adams_simon::AsError::InvalidConfig(m) => Failure::Input(m),
        e => Failure::Identity(e.to_string()),
    })?;
    let v = serde_json::to_value(&res.report).map_err(input)?;
    if let Some(prefix) = out {
        let json_path = prefix.with_extension("json");
        emit(&v, Some(&json_path))?;
        let csv_path = prefix.with_extension("csv");
        let f = fs::File::create(&csv_path).map_err(|e| input(format!("{}: {e}", csv_path.display())))?;
        write_state_csv(&res.fixed_point.state, &res.u, std::io::BufWriter::new(f)).map_err(input)?;
    }
    emit(&v, None)
}

fn ode(kind: &str, lambda: f64, forcing: &Path, bc: Option<f64>, out: Option<&Path>) -> Outcome {
    let kind: Kind = kind.parse().map_err(input)?;
    let mode = ModeSpec::new(lambda, kind).map_err(input)?;
    let file = fs::File::open(forcing).map_err(|e| input(format!("{}: {e}", forcing.display())))?;
    let f = GridFunction::read_csv(BufReader::new(file)).map_err(input)?;
    let u = solve_mode(mode, &f, bc, &SolveOptions::default()).map_err(|e| Failure::Identity(e.to_string()))?;
    match out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            u.write_csv(std::io::BufWriter::new(file)).map_err(input)
        }
        None => u.write_csv(std::io::stdout().lock()).map_err(input),
    }
}
