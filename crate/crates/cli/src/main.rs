use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use lensbeam::beamspace::{fast_beamspace, reduce, to_beamspace, BeamSet};
use lensbeam::channel::{generate_channel, steering_vector};
use lensbeam::harness::{self, ExperimentSpec, Grid, Method, Scenario, SweepResult};
use lensbeam::linalg::CMatrix;
use lensbeam::metrics::{gap_profile, sum_rate};
use lensbeam::selection::select_wideband;
use lensbeam::{LensMatrix64, SystemConfig};

#[derive(Parser)]
#[command(name = "lensbeam", version, about = "Wideband beam selection sweeps for lens-array MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// Base seed for the channel generator streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a spec file and emit the CSV.
    Run {
        #[arg(long, value_parser = ["fig3", "fig4", "fig5"], conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Rate gap of the wideband selector to the fully digital array.
    Gap,
    /// Quick invariant checks on small instances.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let o = &cli.overrides;
    match &cli.command {
        Command::Run { preset, spec } => {
            let spec = match (preset, spec) {
                (Some(name), _) => harness::preset(name)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    harness::parse_spec(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                (None, None) => bail!("run needs --preset or --spec"),
            };
            let spec = apply(spec, o);
            let to_stdout = spec.out_path.is_none();
            let result = execute(spec, o)?;
            if to_stdout {
                print!("{}", result.to_csv());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gap => {
            let result = execute(apply(harness::preset("fig5")?, o), o)?;
            print_gap_table(&result);
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => Ok(if selftest(o.threads) { ExitCode::SUCCESS } else { ExitCode::FAILURE }),
    }
}

fn apply(mut spec: ExperimentSpec, o: &Overrides) -> ExperimentSpec {
    if let Some(seed) = o.seed {
        spec.cfg.seed = seed;
    }
    if let Some(t) = o.trials {
        spec.trials = t;
    }
    if let Some(p) = &o.out {
        spec.out_path = Some(p.clone());
    }
    spec
}

fn execute(spec: ExperimentSpec, o: &Overrides) -> anyhow::Result<SweepResult> {
    let result = match o.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => harness::run_experiment_with_threads(&spec, n)?,
        None => harness::run_experiment(&spec)?,
    };
    if let Some(p) = &spec.out_path {
        eprintln!("wrote {} rows to {}", result.rows.len(), p.display());
    }
    Ok(result)
}

fn print_gap_table(r: &SweepResult) {
    let exact = r.extra_index("gap_exact_mean").expect("gap sweep");
    let bound = r.extra_index("gap_bound_mean").expect("gap sweep");
    println!("rate gap per subcarrier to the fully digital array (bits/s/Hz), {} trials", r.trials);
    println!("{:>8} {:>14} {:>14} {:>14}", "snr_db", "simulated", "exact", "bound");
    for row in r.rows_for(Method::Proposed.name()) {
        println!(
            "{:>8} {:>14.6} {:>14.6} {:>14.6}",
            row.x_value, row.mean, row.extras[exact], row.extras[bound]
        );
    }
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
    ok
}

fn selftest(threads: Option<usize>) -> bool {
    match run_selftest(threads) {
        Ok(all) => {
            println!("{}", if all { "selftest passed" } else { "selftest FAILED" });
            all
        }
        Err(e) => {
            println!("FAIL selftest aborted: {e:#}");
            false
        }
    }
}

fn run_selftest(threads: Option<usize>) -> anyhow::Result<bool> {
    let mut all = true;

    let n = 64;
    let lens = LensMatrix64::new(n);
    let dev = lens.matrix().gram().sub(&CMatrix::identity(n))?.frobenius_norm();
    all &= check("lens unitarity", dev < 1e-10, format!("‖UᴴU − I‖ = {dev:.2e}"));

    let a = steering_vector::<f64>(n, 0.3141);
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    all &= check("steering norm", (norm - 1.0).abs() < 1e-12, format!("‖a‖ = {norm:.15}"));

    let cfg = SystemConfig::with_dims(32, 8, 3, 3, 6);
    let h = generate_channel::<f64>(&cfg, 0)?;
    let hb = fast_beamspace(&h);
    let dense = to_beamspace(&h, &LensMatrix64::new(32))?;
    let (mut e_in, mut e_out, mut fft_dev) = (0.0, 0.0, 0.0f64);
    for k in 1..=cfg.n_subcarriers {
        e_in += h.at(k).frobenius_norm().powi(2);
        e_out += hb.at(k).frobenius_norm().powi(2);
        fft_dev = fft_dev.max(hb.at(k).sub(dense.at(k))?.frobenius_norm());
    }
    let rel = (e_in - e_out).abs() / e_in;
    all &= check("energy preservation", rel < 1e-10, format!("relative change {rel:.2e}"));
    all &= check("fft matches lens", fft_dev < 1e-10, format!("max deviation {fft_dev:.2e}"));

    let (set, diag) = select_wideband(&hb, &cfg)?;
    let mut init = diag.init_beams.clone();
    init.sort_unstable();
    init.dedup();
    all &= check(
        "selection size",
        set.len() == cfg.n_rf && diag.iterations == cfg.n_rf - init.len(),
        format!("{} beams, {} greedy steps", set.len(), diag.iterations),
    );

    let profile = gap_profile(&hb, &set)?;
    let full = BeamSet::from_indices((0..32).collect())?;
    let mut gap_ok = true;
    let mut prev = 0.0;
    for e in 0..=8 {
        let xi = 10f64.powi(e);
        let exact = profile.exact(xi);
        let sim = sum_rate(&reduce(&hb, &full)?, xi, 0.0)?.total - sum_rate(&reduce(&hb, &set)?, xi, 0.0)?.total;
        gap_ok &= exact <= profile.bound() * (1.0 + 1e-12) && exact >= prev * (1.0 - 1e-12);
        gap_ok &= (exact - sim).abs() <= 1e-8 * sim.abs().max(1.0);
        prev = exact;
    }
    all &= check("rate gap", gap_ok, format!("bound {:.6} bits/s/Hz", profile.bound()));

    let mut spec = ExperimentSpec::new(
        Scenario::SumRateVsSnr,
        SystemConfig::with_dims(16, 4, 2, 2, 4),
        Method::ALL.to_vec(),
        Grid::SnrDb(vec![0.0, 10.0, 20.0]),
    );
    spec.trials = 8;
    let one = harness::run_experiment_with_threads(&spec, 1)?.to_csv();
    let many = harness::run_experiment_with_threads(&spec, threads.unwrap_or(4).max(2))?.to_csv();
    all &= check("thread invariance", one == many, format!("{} CSV bytes", one.len()));

    Ok(all)
}
