//! `cclab` — seeded, reproducible runs of the laboratory's verifiers and
//! protocols with CSV/JSON report emission.
//!
//! Exit codes: 0 = all checks passed, 1 = a verified inequality was violated
//! (the report is still written), 2 = usage/config/IO error. Reports are
//! byte-stable for identical (config, seed); pass `--timestamps` to embed
//! wall-clock times at the cost of that stability.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng as _;
use serde_json::{json, Value};

use cclab::greater_than as gtm;
use cclab::lemma_verify::{self, Verification};
use cclab::pointer_jumping as pjm;
use cclab::protocol;
use cclab::qmath::invariants;
use cclab::seeds;
use cclab::{Error, Result};

#[derive(Parser)]
#[command(name = "cclab", version, about = "communication-complexity laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Numerical verification suites (inequalities and lemmas).
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Symmetric k-ary pointer jumping.
    #[command(subcommand)]
    Pj(PjCmd),
    /// The Greater-Than round/communication trade-off protocol.
    #[command(subcommand)]
    Gt(GtCmd),
}

#[derive(Args)]
struct ReportArgs {
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; csv is only valid for row payloads (gt run/sweep).
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Embed wall-clock start/stop timestamps (off by default: byte-stable
    /// reports).
    #[arg(long)]
    timestamps: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Random-instance checks of the basic distance/entropy inequalities.
    Qmath {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        /// Pass threshold on the max violation (default 1e-8).
        #[arg(long, env = "CCLAB_TOL")]
        tol: Option<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Constructed-instance verification of the entropy lemmas.
    Lemmas {
        #[arg(long, value_enum)]
        which: Which,
        /// Trial count; defaults per lemma (shearer 500, decoupling 200,
        /// onerd 100, multird 100, cutpaste 50).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        #[arg(long, env = "CCLAB_TOL")]
        tol: Option<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Which {
    Shearer,
    Decoupling,
    Onerd,
    Multird,
    Cutpaste,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    P,
    Mu0,
    Mu1,
}

impl DistArg {
    fn to_dist(self) -> pjm::Dist {
        match self {
            DistArg::P => pjm::Dist::P,
            DistArg::Mu0 => pjm::Dist::Mu0,
            DistArg::Mu1 => pjm::Dist::Mu1,
        }
    }
    fn name(self) -> &'static str {
        match self {
            DistArg::P => "p",
            DistArg::Mu0 => "mu0",
            DistArg::Mu1 => "mu1",
        }
    }
}

#[derive(Subcommand)]
enum PjCmd {
    /// Draw one instance and print it as JSON.
    Sample {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = DistArg::P)]
        dist: DistArg,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Run the follow-the-path protocol on sampled instances.
    Run {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = DistArg::P)]
        dist: DistArg,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Exact distribution table (p, mu0 or mu1) at enumerable sizes.
    Enumerate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = DistArg::P)]
        dist: DistArg,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Exhaustive marginal-equality check of p vs mu0/mu1.
    CheckMarginals {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Subcommand)]
enum GtCmd {
    /// Run the trade-off protocol at one budget; emits a single sweep row.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Budget sweep; budgets given as inclusive lo:hi.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        budgets: String,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, env = "CCLAB_SEED")]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Exact one-way information bound I(MB; X_J | X_<J J) ≤ 4c/n.
    InfoCheck {
        #[arg(long)]
        n: usize,
        /// zero | parity | full | bit:<i> | prefix:<c> | random:<c>
        #[arg(long)]
        message: String,
        /// Required only for message=random:<c>.
        #[arg(long, env = "CCLAB_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "CCLAB_TOL")]
        tol: Option<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs the subcommand, writes its report, and returns the overall pass flag.
fn dispatch(cmd: Cmd) -> Result<bool> {
    let (config, payload, csv, pass, report) = match cmd {
        Cmd::Verify(v) => verify(v)?,
        Cmd::Pj(p) => pj(p)?,
        Cmd::Gt(g) => gt(g)?,
    };
    emit(&config, payload, csv, pass, &report)?;
    Ok(pass)
}

type Prepared = (Value, Value, Option<String>, bool, ReportArgs);

fn verify(cmd: VerifyCmd) -> Result<Prepared> {
    match cmd {
        VerifyCmd::Qmath { trials, seed, tol, report } => {
            let tol = tol.unwrap_or(invariants::TOL);
            let checks = invariants::run_suite(trials, seed)?;
            let reports: Vec<Verification> = checks
                .iter()
                .map(|c| Verification::new(c.name, c.trials, c.max_violation, c.worst_seed, tol))
                .collect();
            let pass = reports.iter().all(|r| r.pass);
            let config = json!({
                "subcommand": "verify qmath", "trials": trials, "seed": seed, "tol": tol,
            });
            let payload = Value::Array(reports.iter().map(Verification::to_json).collect());
            Ok((config, payload, None, pass, report))
        }
        VerifyCmd::Lemmas { which, trials, seed, tol, report } => {
            let names: Vec<Which> = if which == Which::All {
                vec![Which::Shearer, Which::Decoupling, Which::Onerd, Which::Multird, Which::Cutpaste]
            } else {
                vec![which]
            };
            let mut reports = Vec::new();
            for w in names {
                reports.push(run_lemma(w, trials, seed, tol)?);
            }
            let pass = reports.iter().all(|r| r.pass);
            let config = json!({
                "subcommand": "verify lemmas",
                "which": which_name(which), "trials": trials, "seed": seed, "tol": tol,
            });
            let payload = Value::Array(reports.iter().map(Verification::to_json).collect());
            Ok((config, payload, None, pass, report))
        }
    }
}

fn which_name(w: Which) -> &'static str {
    match w {
        Which::Shearer => "shearer",
        Which::Decoupling => "decoupling",
        Which::Onerd => "onerd",
        Which::Multird => "multird",
        Which::Cutpaste => "cutpaste",
        Which::All => "all",
    }
}

fn run_lemma(which: Which, trials: Option<usize>, seed: u64, tol: Option<f64>) -> Result<Verification> {
    match which {
        Which::Shearer => {
            let trials = trials.unwrap_or(500);
            let tol = tol.unwrap_or(1e-8);
            // spread trials over the (m, k) grid; fold in the Bell equality case
            let grid: Vec<(usize, usize)> =
                (1..=4).flat_map(|m| (2..=4).map(move |k| (m, k))).collect();
            let per = trials.div_ceil(grid.len());
            let mut max_v = f64::NEG_INFINITY;
            let mut worst = 0u64;
            for (i, &(m, k)) in grid.iter().enumerate() {
                let (v, ws) = lemma_verify::verify_shearer(per, m, k, seed.wrapping_add(i as u64))?;
                if v > max_v {
                    max_v = v;
                    worst = ws;
                }
            }
            let (avg, total) = lemma_verify::shearer::bell_equality_case()?;
            max_v = max_v.max((avg - total / 2.0).abs());
            Ok(Verification::new("shearer", per * grid.len(), max_v, worst, tol))
        }
        Which::Decoupling => {
            let trials = trials.unwrap_or(200);
            let (v, ws) = lemma_verify::verify_decoupling(trials, seed)?;
            Ok(Verification::new("decoupling", trials, v, ws, tol.unwrap_or(1e-8)))
        }
        Which::Onerd => {
            let trials = trials.unwrap_or(100);
            let (v, ws) = lemma_verify::verify_oneway_directsum(trials, seed)?;
            Ok(Verification::new("onerd", trials, v, ws, tol.unwrap_or(1e-8)))
        }
        Which::Multird => {
            let trials = trials.unwrap_or(100);
            let (v, ws) = lemma_verify::verify_multiround_directsum_classical(trials, seed)?;
            Ok(Verification::new("multird", trials, v, ws, tol.unwrap_or(1e-10)))
        }
        Which::Cutpaste => {
            let trials = trials.unwrap_or(50);
            let (v, ws) = lemma_verify::verify_cut_and_paste_random(trials, seed)?;
            Ok(Verification::new("cutpaste", trials, v, ws, tol.unwrap_or(1e-8)))
        }
        Which::All => unreachable!("expanded by caller"),
    }
}

fn pj(cmd: PjCmd) -> Result<Prepared> {
    match cmd {
        PjCmd::Sample { k, n, dist, seed, report } => {
            let params = pjm::PJParams::new(k, n)?;
            let inst = match dist {
                DistArg::P => pjm::sample_fooling(params, seed),
                DistArg::Mu0 => pjm::sample_hard(params, 0, seed),
                DistArg::Mu1 => pjm::sample_hard(params, 1, seed),
            };
            let config = json!({
                "subcommand": "pj sample", "k": k, "n": n, "dist": dist.name(), "seed": seed,
            });
            Ok((config, inst.to_json(), None, true, report))
        }
        PjCmd::Run { k, n, dist, trials, seed, report } => {
            let params = pjm::PJParams::new(k, n)?;
            let proto = pjm::follow_path_protocol(params);
            let expected_bits = 2 * n * k.next_power_of_two().trailing_zeros().max(1) as usize + 1;
            let mut errors = 0usize;
            let mut bits_ok = true;
            for t in 0..trials as u64 {
                let mut rng = seeds::stream(seed, 2 * t);
                let inst = match dist {
                    DistArg::P => pjm::sample_fooling_rng(params, &mut rng),
                    DistArg::Mu0 => pjm::sample_hard_rng(params, 0, &mut rng),
                    DistArg::Mu1 => pjm::sample_hard_rng(params, 1, &mut rng),
                };
                let run_seed: u64 = seeds::stream(seed, 2 * t + 1).random();
                let out = protocol::run(
                    &proto,
                    &(inst.x.clone(), inst.f.clone()),
                    &(inst.y.clone(), inst.g.clone()),
                    run_seed,
                )?;
                if out.output != pjm::evaluate_task(&inst) as u64 {
                    errors += 1;
                }
                let bits = out.transcript.bits_a_to_b() + out.transcript.bits_b_to_a();
                bits_ok &= bits == expected_bits;
            }
            let pass = errors == 0 && bits_ok;
            let config = json!({
                "subcommand": "pj run", "k": k, "n": n, "dist": dist.name(),
                "trials": trials, "seed": seed,
            });
            let payload = json!({
                "trials": trials, "errors": errors,
                "bits_per_run": expected_bits, "bits_constant": bits_ok, "pass": pass,
            });
            Ok((config, payload, None, pass, report))
        }
        PjCmd::Enumerate { k, n, dist, report } => {
            let params = pjm::PJParams::new(k, n)?;
            let table = pjm::enumerate_distribution(params, dist.to_dist())?;
            let config = json!({
                "subcommand": "pj enumerate", "k": k, "n": n, "dist": dist.name(),
            });
            Ok((config, table.to_json(), None, true, report))
        }
        PjCmd::CheckMarginals { k, n, report } => {
            let params = pjm::PJParams::new(k, n)?;
            let equal = pjm::check_marginal_equality(params)?;
            let config = json!({ "subcommand": "pj check-marginals", "k": k, "n": n });
            let payload = json!({ "k": k, "n": n, "marginals_equal": equal, "pass": equal });
            Ok((config, payload, None, equal, report))
        }
    }
}

fn gt(cmd: GtCmd) -> Result<Prepared> {
    match cmd {
        GtCmd::Run { n, b, trials, seed, report } => {
            let rows = gtm::sweep(n, &[b], trials, seed)?;
            let pass = rows.iter().all(|r| r.bob_bits_max <= r.b);
            let config = json!({
                "subcommand": "gt run", "n": n, "b": b, "trials": trials, "seed": seed,
            });
            let csv = gtm::sweep_csv(&rows);
            let payload = Value::Array(rows.iter().map(row_json).collect());
            Ok((config, payload, Some(csv), pass, report))
        }
        GtCmd::Sweep { n, budgets, trials, seed, report } => {
            let budget_list = parse_budgets(&budgets)?;
            let rows = gtm::sweep(n, &budget_list, trials, seed)?;
            let pass = rows.iter().all(|r| r.bob_bits_max <= r.b);
            let config = json!({
                "subcommand": "gt sweep", "n": n, "budgets": budgets,
                "trials": trials, "seed": seed,
            });
            let csv = gtm::sweep_csv(&rows);
            let payload = Value::Array(rows.iter().map(row_json).collect());
            Ok((config, payload, Some(csv), pass, report))
        }
        GtCmd::InfoCheck { n, message, seed, tol, report } => {
            let (msg, c) = parse_message(&message, n, seed)?;
            let tol = tol.unwrap_or(1e-10);
            let check = gtm::oneway_info_check(msg, c, n)?;
            let pass = check.lhs <= check.rhs + tol;
            let config = json!({
                "subcommand": "gt info-check", "n": n, "message": message,
                "seed": seed, "tol": tol,
            });
            let payload = json!({
                "lhs": check.lhs, "rhs": check.rhs, "c": c, "pass": pass,
            });
            Ok((config, payload, None, pass, report))
        }
    }
}

fn row_json(r: &gtm::SweepRow) -> Value {
    json!({
        "n": r.n, "b": r.b, "trials": r.trials,
        "alice_bits_mean": r.alice_bits_mean, "alice_bits_max": r.alice_bits_max,
        "bob_bits_mean": r.bob_bits_mean, "bob_bits_max": r.bob_bits_max,
        "rounds_mean": r.rounds_mean, "error_rate": r.error_rate, "seed": r.seed,
    })
}

/// Inclusive budget range "lo:hi".
fn parse_budgets(s: &str) -> Result<Vec<usize>> {
    let err = || Error::Config(format!("budgets must be lo:hi with lo ≤ hi, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    let lo: usize = lo.trim().parse().map_err(|_| err())?;
    let hi: usize = hi.trim().parse().map_err(|_| err())?;
    if lo > hi {
        return Err(err());
    }
    Ok((lo..=hi).collect())
}

type MessageFn = Box<dyn Fn(&[bool]) -> Vec<bool>>;

fn parse_message(spec: &str, n: usize, seed: Option<u64>) -> Result<(MessageFn, usize)> {
    let arg = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad message argument in {spec:?}")))
    };
    match spec.split_once(':') {
        None => match spec {
            "zero" => Ok((Box::new(|_: &[bool]| vec![false]), 1)),
            "parity" => Ok((Box::new(|x: &[bool]| vec![x.iter().fold(false, |a, &b| a ^ b)]), 1)),
            "full" => Ok((Box::new(|x: &[bool]| x.to_vec()), n)),
            _ => Err(Error::Config(format!("unknown message spec {spec:?}"))),
        },
        Some(("bit", i)) => {
            let i = arg(i)?;
            if i == 0 || i > n {
                return Err(Error::Config(format!("bit index {i} out of 1..={n}")));
            }
            Ok((Box::new(move |x: &[bool]| vec![x[i - 1]]), 1))
        }
        Some(("prefix", c)) => {
            let c = arg(c)?;
            if c == 0 || c > n {
                return Err(Error::Config(format!("prefix length {c} out of 1..={n}")));
            }
            Ok((Box::new(move |x: &[bool]| x[..c].to_vec()), c))
        }
        Some(("random", c)) => {
            let c = arg(c)?;
            if c == 0 || c > n {
                return Err(Error::Config(format!("message width {c} out of 1..={n}")));
            }
            let seed = seed.ok_or_else(|| {
                Error::Config("message=random requires --seed (or CCLAB_SEED)".into())
            })?;
            let mut rng = seeds::rng(seed);
            let table: Vec<Vec<bool>> = (0..1usize << n)
                .map(|_| (0..c).map(|_| rng.random()).collect())
                .collect();
            Ok((
                Box::new(move |x: &[bool]| {
                    let idx = x.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
                    table[idx].clone()
                }),
                c,
            ))
        }
        Some(_) => Err(Error::Config(format!("unknown message spec {spec:?}"))),
    }
}

fn emit(config: &Value, payload: Value, csv: Option<String>, pass: bool, report: &ReportArgs) -> Result<()> {
    let text = match report.format {
        Format::Csv => csv.ok_or_else(|| {
            Error::Config("csv format is only valid for row payloads (gt run/sweep)".into())
        })?,
        Format::Json => {
            let (started, finished) = if report.timestamps {
                let now = || {
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map(|d| Value::from(d.as_secs_f64()))
                        .unwrap_or(Value::Null)
                };
                (now(), now())
            } else {
                (Value::Null, Value::Null)
            };
            let envelope = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "started": started,
                "finished": finished,
                "payload": payload,
                "pass": pass,
            });
            let mut s = serde_json::to_string_pretty(&envelope)?;
            s.push('\n');
            s
        }
    };
    match &report.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
