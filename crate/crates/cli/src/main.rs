use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use turnstile_core::bell::BellIndex;
use turnstile_core::config::{RunManifest, ScenarioConfig};
use turnstile_core::netsim::{simulate, to_csv};
use turnstile_core::petz::{predetect, Scenario};
use turnstile_core::turnstile::{invert, OutcomeSelector};
use turnstile_core::verify::{self, VerifyOptions};

#[derive(Parser)]
#[command(name = "turnstile", version, about = "Temporal Bell pairs, Petz pre-detection and repeater DDoS simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every closed-form identity and golden value
    Verify {
        /// One JSON object per check
        #[arg(long)]
        json: bool,
        /// Negative control: swap two entries of the correction table
        #[arg(long, hide = true)]
        corrupt_correction_table: bool,
    },
    /// Run one inversion of the input Bell pair |β_xy⟩
    Turnstile {
        #[arg(value_parser = clap::value_parser!(u8).range(0..=1))]
        x: u8,
        #[arg(value_parser = clap::value_parser!(u8).range(0..=1))]
        y: u8,
        /// Sample the projection outcome with this seed
        #[arg(long, conflicts_with = "forced_outcome")]
        seed: Option<u64>,
        /// Use this projection outcome, e.g. 01
        #[arg(long)]
        forced_outcome: Option<BellIndex>,
    },
    /// Pre-detect a future attack with the Petz recovery channel
    Petz {
        scenario: PetzScenario,
        /// Bell index left by a successful projection (normal only)
        index: Option<BellIndex>,
    },
    /// Run the network simulation and write per-tick CSV plus a manifest
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PetzScenario {
    Attack,
    Normal,
}

enum Failure {
    Verify,
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TURNSTILE_LOG", "off")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Verify { json, corrupt_correction_table } => cmd_verify(json, corrupt_correction_table),
        Command::Turnstile { x, y, seed, forced_outcome } => cmd_turnstile(x, y, seed, forced_outcome),
        Command::Petz { scenario, index } => cmd_petz(scenario, index),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verify => {}
                Failure::Usage(msg) | Failure::Io(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn cmd_verify(json: bool, corrupt: bool) -> Result<(), Failure> {
    let checks = verify::run(VerifyOptions { corrupt_correction_table: corrupt });
    for c in &checks {
        if json {
            println!("{}", serde_json::json!({
                "name": c.name,
                "expected": c.expected,
                "got": c.got,
                "tolerance": c.tolerance,
                "passed": c.passed(),
                "error": c.error,
            }));
        } else {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            print!("{status}  {:<52} expected {:>10.6}  got {:>10.6}", c.name, c.expected, c.got);
            match &c.error {
                Some(e) => println!("  ({e})"),
                None => println!(),
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if !json {
        println!("{} checks, {} failed", checks.len(), failed);
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn cmd_turnstile(x: u8, y: u8, seed: Option<u64>, forced: Option<BellIndex>) -> Result<(), Failure> {
    let input = BellIndex::new(x, y).map_err(|e| Failure::Usage(e.to_string()))?;
    let selector = match forced {
        Some(idx) => OutcomeSelector::Forced(idx),
        None => OutcomeSelector::Seeded(seed.unwrap_or(0)),
    };
    let rec = invert(input, 0, selector).map_err(|e| Failure::Usage(e.to_string()))?;
    let l = &rec.ledger;
    println!("input        β{}", rec.input_index);
    match rec.seed {
        Some(s) => println!("outcome      β{} (p = {:.6}, seed {s})", rec.outcome, rec.probability),
        None => println!("outcome      β{} (p = {:.6}, forced)", rec.outcome, rec.probability),
    }
    println!("correction   {}", rec.correction);
    println!("fidelity     {:.6}", rec.fidelity());
    println!("S(A|D)       before {:+.6}  after {:+.6}", l.cond_ad_before, l.cond_ad_after);
    println!("S(C|D)       before {:+.6}  after {:+.6}", l.cond_cd_before, l.cond_cd_after);
    println!("S(AD)        after {:.6}", l.joint_ad_after);
    println!("H(outcomes)  {:.6}", l.outcome_shannon);
    Ok(())
}

fn cmd_petz(scenario: PetzScenario, index: Option<BellIndex>) -> Result<(), Failure> {
    let s = match (scenario, index) {
        (PetzScenario::Attack, None) => Scenario::FutureAttack,
        (PetzScenario::Attack, Some(_)) => {
            return Err(Failure::Usage("the attack scenario takes no Bell index".into()))
        }
        (PetzScenario::Normal, idx) => Scenario::FutureNormal(idx.unwrap_or(BellIndex::B00)),
    };
    let v = predetect(s).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("scenario: {s}");
    println!("S(A|B): {:+.6}", v.conditional_entropy);
    println!("attack_in_future: {}", v.attack_in_future);
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let text = fs::read_to_string(config).map_err(|e| Failure::Io(format!("{}: {e}", config.display())))?;
    let mut cfg = ScenarioConfig::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let reports = simulate(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    fs::write(out, to_csv(&reports)).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let manifest = RunManifest::new(&cfg, out.to_string_lossy());
    let mpath = manifest_path(out);
    fs::write(&mpath, manifest.to_json() + "\n").map_err(|e| Failure::Io(format!("{}: {e}", mpath.display())))?;
    log::info!("wrote {} rows to {} and manifest {}", reports.len(), out.display(), mpath.display());
    Ok(())
}
