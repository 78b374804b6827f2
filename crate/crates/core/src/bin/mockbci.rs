use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mockbci::study::{
    analyze_mrcp, analyze_smr, generate_sessions, read_sessions, run_study, stream_sim, write_driving_labels,
    write_json, write_mrcp_outputs, write_sessions, write_smr_outputs, write_stream_outputs, write_study_outputs,
    ExperimentConfig, StreamSimOptions,
};
use mockbci::Error;

#[derive(Parser)]
#[command(name = "mockbci", version, about = "Synthetic calibration-to-control BCI experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (also where session files are read from).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Read session files from here instead of the output directory.
    #[arg(long, global = true)]
    sessions: Option<PathBuf>,
    #[arg(long, global = true)]
    chunk_samples: Option<usize>,
    /// Real-time factor for streaming; 0 streams as fast as possible.
    #[arg(long, global = true)]
    pacing: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate calibration and driving sessions with ground truth.
    Synth,
    /// Calibration CV, driving CV and transfer classification, plus SMR and MRCP outputs.
    RunStudy,
    /// Stream the driving EMG through the online decoder and check it against the offline oracle.
    StreamSim {
        /// Perturb the decoder state so the equivalence check fails.
        #[arg(long, hide = true)]
        tamper: bool,
    },
    /// Time-frequency maps at the motor Laplacians.
    AnalyzeSmr,
    /// Slow-potential averages at C3 and C4.
    AnalyzeMrcp,
    /// Print the effective configuration as TOML.
    DumpDefaults,
}

fn config(common: &Common) -> mockbci::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if let Some(c) = common.chunk_samples {
        cfg.stream.chunk_samples = c;
    }
    if let Some(p) = common.pacing {
        cfg.stream.pacing = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> mockbci::Result<bool> {
    let cfg = config(&cli.common)?;
    let out = cfg.out_dir.clone();
    let sessions_dir = cli.common.sessions.clone().unwrap_or_else(|| out.clone());
    match &cli.command {
        Command::DumpDefaults => {
            print!("{}", cfg.to_toml()?);
        }
        Command::Synth => {
            let pair = generate_sessions(&cfg)?;
            for p in write_sessions(&pair, &out)? {
                println!("{}", p.display());
            }
        }
        Command::RunStudy => {
            let pair = read_sessions(&sessions_dir)?;
            let outcome = run_study(&cfg, &pair)?;
            write_study_outputs(&outcome, &out)?;
            let r = &outcome.report;
            println!("calibration macro-F1 {:.3}", r.calibration.macro_f1);
            println!("driving macro-F1     {:.3}", r.driving.macro_f1);
            println!("transfer macro-F1    {:.3}", r.transfer.macro_f1);
        }
        Command::StreamSim { tamper } => {
            let pair = read_sessions(&sessions_dir)?;
            let opts = StreamSimOptions {
                tamper: *tamper,
                ..StreamSimOptions::from_config(&cfg)
            };
            let o = stream_sim(&cfg, &pair, &opts)?;
            write_stream_outputs(&o, &out)?;
            let ok = o.report.equivalent && o.report.recorder_round_trip;
            println!(
                "{} online/offline equivalence: {} predictions, chunk {} samples, recorder round trip {}",
                if ok { "PASS" } else { "FAIL" },
                o.report.n_predictions,
                o.report.chunk_samples,
                o.report.recorder_round_trip
            );
            return Ok(ok);
        }
        Command::AnalyzeSmr => {
            let pair = read_sessions(&sessions_dir)?;
            let (smr, labels) = analyze_smr(&cfg, &pair)?;
            write_smr_outputs(&smr, &out)?;
            write_driving_labels(&labels, &out)?;
            for (name, maps) in [("calibration", &smr.calibration), ("driving", &smr.driving)] {
                println!("{name}: {:?} trials, {} rejected", maps.n_trials, maps.n_rejected);
            }
        }
        Command::AnalyzeMrcp => {
            let pair = read_sessions(&sessions_dir)?;
            let (m, labels) = analyze_mrcp(&cfg, &pair)?;
            write_mrcp_outputs(&m, &out)?;
            write_driving_labels(&labels, &out)?;
            write_json(&m.ica, &out.join("mrcp_ica.json"))?;
            println!("calibration negativity (µV) {:?}", m.calibration.negativity_uv);
            println!("driving negativity (µV)     {:?}", m.driving.negativity_uv);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) | Error::Format(_) | Error::InvalidSpec { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
