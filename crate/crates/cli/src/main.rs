use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lubin_tate::chromatic;
use lubin_tate::config::{RunConfig, Suite};
use lubin_tate::exec::Exec;
use lubin_tate::fgl::UniversalDeformation;
use lubin_tate::padic::make_ring;
use lubin_tate::period::{format_point, jacobian_phi, period_point};
use lubin_tate::report::{CheckRecord, Report, Sink, Verdict};
use lubin_tate::suite::{self, padic_json, parse_point};
use lubin_tate::{Error, Result};

#[derive(Parser)]
#[command(name = "lubin-tate", version, about = "Lubin-Tate deformations and period map checks")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Opts {
    /// Flat key = value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Write the JSON-lines report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    out: Option<String>,
    #[arg(short = 'p', global = true)]
    p: Option<u64>,
    #[arg(short = 'n', global = true)]
    n: Option<usize>,
    /// Working precision N (W is kept mod p^N).
    #[arg(long, short = 'N', global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    du: Option<u32>,
    #[arg(long, global = true)]
    dx: Option<u32>,
    #[arg(long, global = true)]
    dxy: Option<u32>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    digits: Option<u32>,
    #[arg(long, global = true)]
    levels: Option<u32>,
    /// Run batches on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Universal deformation: build the group law or check integrality and height.
    Fgl {
        #[command(subcommand)]
        action: FglAction,
    },
    /// Period points and the Jacobian of the period map.
    Period {
        #[command(subcommand)]
        action: PeriodAction,
    },
    /// Run one verification suite.
    Check { suite: CheckKind },
    /// Suspension degree arithmetic.
    Chromatic {
        #[command(subcommand)]
        action: ChromaticAction,
    },
    /// Every suite selected in the config.
    Suite {
        #[command(subcommand)]
        action: SuiteAction,
    },
}

#[derive(Subcommand)]
enum FglAction {
    Build,
    Check {
        /// Perturb ℓ_k before checking.
        #[arg(long)]
        corrupt_log: Option<usize>,
    },
}

#[derive(Subcommand)]
enum PeriodAction {
    Compute {
        /// Comma-separated integer coordinates divisible by p, or 0.
        #[arg(long, default_value = "0")]
        point: String,
    },
    Jacobian {
        #[arg(long, default_value = "0")]
        point: String,
    },
}

#[derive(Subcommand)]
enum ChromaticAction {
    Alpha,
    Degree {
        #[arg(short = 'M', default_value_t = 1)]
        m: u32,
    },
}

#[derive(Subcommand)]
enum SuiteAction {
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Equivariance,
    Isogeny,
    Derivation,
    Canonical,
    Convergence,
    Etale,
    FixedPoint,
    Chromatic,
}

impl CheckKind {
    fn suite(self) -> Suite {
        match self {
            CheckKind::Equivariance => Suite::Equivariance,
            CheckKind::Isogeny => Suite::Isogeny,
            CheckKind::Derivation => Suite::Derivation,
            CheckKind::Canonical => Suite::Canonical,
            CheckKind::Convergence => Suite::Convergence,
            CheckKind::Etale => Suite::Etale,
            CheckKind::FixedPoint => Suite::FixedPoint,
            CheckKind::Chromatic => Suite::Chromatic,
        }
    }
}

fn load_config(o: &Opts) -> Result<RunConfig> {
    let mut text = match &o.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?,
        None => String::new(),
    };
    let mut flag = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            text.push_str(&format!("\n{k} = {v}"));
        }
    };
    flag("p", o.p.map(|x| x.to_string()));
    flag("n", o.n.map(|x| x.to_string()));
    flag("precision", o.precision.map(|x| x.to_string()));
    flag("du", o.du.map(|x| x.to_string()));
    flag("dx", o.dx.map(|x| x.to_string()));
    flag("dxy", o.dxy.map(|x| x.to_string()));
    flag("m_max", o.m_max.map(|x| x.to_string()));
    flag("samples", o.samples.map(|x| x.to_string()));
    flag("seed", o.seed.map(|x| x.to_string()));
    flag("digits", o.digits.map(|x| x.to_string()));
    flag("levels", o.levels.map(|x| x.to_string()));
    RunConfig::parse(&text)
}

fn timed(name: &str, params: serde_json::Value, f: impl FnOnce(&mut CheckRecord) -> Result<()>) -> CheckRecord {
    let start = Instant::now();
    let mut rec = CheckRecord::new(name, params.clone());
    if let Err(e) = f(&mut rec) {
        let v = match e {
            Error::Integrality { .. } => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };
        rec.fail_with(v, e.to_string(), params);
    }
    rec.runtime_ms = start.elapsed().as_millis() as u64;
    rec
}

fn fgl_build(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let params = json!({ "p": cfg.p, "n": cfg.n, "precision": cfg.precision, "caps": cfg.caps() });
    timed("fgl_build", params, |rec| {
        let ud = UniversalDeformation::new(cfg.p, cfg.n, cfg.caps(), cfg.precision)?;
        let law = ud.group_law(exec)?;
        let ps = ud.p_series(exec)?;
        rec.detail = json!({
            "log_digest": ud.digest()?,
            "group_law_degree": law.series.degree_cap(),
            "p_series_degree": ps.series.degree_cap(),
        });
        Ok(())
    })
}

fn period_compute(cfg: &RunConfig, point: &str) -> CheckRecord {
    let params = json!({ "p": cfg.p, "n": cfg.n, "precision": cfg.precision, "point": point, "digits": cfg.digits });
    timed("period_compute", params, |rec| {
        let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
        let a = parse_point(&ring, point)?;
        let (x, conv) = period_point(&ring, &a, cfg.digits, cfg.m_max)?;
        let ok = conv.converged && x.precision >= cfg.digits as i64;
        rec.case(if ok { Verdict::Pass } else { Verdict::Inconclusive }, x.precision, || json!(point));
        rec.detail = json!({
            "point": format_point(&ring, &x),
            "coords": x.coords.iter().map(|c| padic_json(&ring, c)).collect::<Vec<_>>(),
            "chart": x.chart,
            "convergence": conv,
        });
        Ok(())
    })
}

fn period_jacobian(cfg: &RunConfig, point: &str) -> CheckRecord {
    let params = json!({ "p": cfg.p, "n": cfg.n, "precision": cfg.precision, "point": point });
    timed("period_jacobian", params, |rec| {
        let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
        let a = parse_point(&ring, point)?;
        let s = if cfg.p == 2 { 2 } else { 1 };
        let j = jacobian_phi(&ring, &a, s, cfg.digits, cfg.m_max)?;
        rec.case(if j.etale { Verdict::Pass } else { Verdict::Fail }, j.det.valuation(), || json!(point));
        let rows: Vec<Vec<serde_json::Value>> = (0..j.matrix.rows())
            .map(|i| (0..j.matrix.cols()).map(|k| padic_json(&ring, &j.matrix.get(i, k))).collect())
            .collect();
        rec.detail = json!({
            "det": padic_json(&ring, &j.det),
            "matrix": rows,
            "chart": j.chart,
            "scale_gaps": [j.scale_gaps.0, j.scale_gaps.1],
        });
        Ok(())
    })
}

fn chromatic_alpha(cfg: &RunConfig) -> CheckRecord {
    let params = json!({ "p": cfg.p, "n": cfg.n, "levels": cfg.levels });
    timed("chromatic_alpha", params, |rec| {
        let a = chromatic::alpha(cfg.p, cfg.n as u32, cfg.levels)?;
        rec.case(
            if a.is_compatible() { Verdict::Pass } else { Verdict::Fail },
            a.levels() as i64,
            || json!({ "p": cfg.p, "n": cfg.n }),
        );
        rec.detail = json!(a);
        Ok(())
    })
}

fn chromatic_degree(cfg: &RunConfig, m: u32) -> CheckRecord {
    let params = json!({ "p": cfg.p, "n": cfg.n, "M": m });
    timed("chromatic_degree", params, |rec| {
        let d = chromatic::dualizing_degree(cfg.p, cfg.n as u32, m)?;
        let grading = chromatic::sphere_grading(cfg.n as u32)?;
        rec.detail = json!({ "degree": d.to_string(), "grading": grading });
        Ok(())
    })
}

fn run(cli: Cli) -> Result<Report> {
    let mut cfg = load_config(&cli.opts)?;
    let exec = if cli.opts.sequential { Exec::Sequential } else { Exec::Parallel };
    let record = match cli.command {
        Command::Fgl { action: FglAction::Build } => fgl_build(&cfg, exec),
        Command::Fgl { action: FglAction::Check { corrupt_log } } => {
            cfg.corrupt_log = corrupt_log;
            suite::fgl_check(&cfg, exec)
        }
        Command::Period { action: PeriodAction::Compute { point } } => period_compute(&cfg, &point),
        Command::Period { action: PeriodAction::Jacobian { point } } => period_jacobian(&cfg, &point),
        Command::Check { suite: kind } => suite::run_suite(kind.suite(), &cfg, exec),
        Command::Chromatic { action: ChromaticAction::Alpha } => chromatic_alpha(&cfg),
        Command::Chromatic { action: ChromaticAction::Degree { m } } => {
            cfg.m = m;
            chromatic_degree(&cfg, m)
        }
        Command::Suite { action: SuiteAction::All } => return Ok(suite::suite_all(&cfg, exec)),
    };
    let mut report = Report::new(cfg);
    report.records.push(record);
    Ok(report)
}

fn emit<W: Write>(report: &Report, w: W) -> io::Result<()> {
    let sink = Sink::new(w);
    sink.emit(&report.header())?;
    for r in &report.records {
        sink.emit(r)?;
    }
    sink.emit(&report.summary())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.opts.out.clone();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Verdict::Inconclusive.exit_code() as u8);
        }
    };
    let written = match &out {
        Some(path) => File::create(path).and_then(|f| emit(&report, f)),
        None => emit(&report, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(Verdict::Inconclusive.exit_code() as u8);
    }
    ExitCode::from(report.verdict().exit_code() as u8)
}
