use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covhole::harness::pipeline::{self, files};
use covhole::harness::{run_pipeline, stage_sweep, Scenario};
use covhole::Result;

#[derive(Parser)]
#[command(name = "covhole", version, about = "Coverage-hole detection and look-ahead re-planning for AGVs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Preset name (`default`, `fig7`) or scenario file.
    #[arg(short, long, default_value = "default")]
    scenario: String,
    /// Run directory for artifacts.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Layout and RSS maps.
    Genmap(Common),
    /// Receiver samples and the train/validation/test split.
    Dataset(Common),
    /// Cross-validation, training and threshold selection.
    Train(Common),
    /// ROC, AUC and confusion matrix on the test split.
    Report(Common),
    /// Coverage-hole map from the trained model.
    Chmap(Common),
    /// Initial roadmap and reference trajectory.
    Plan(Common),
    /// Hole detection and look-ahead re-planning.
    Replan(Common),
    /// Tracking simulation of the (re-planned) reference.
    Follow(Common),
    /// All stages in order.
    Run(Common),
    /// Alternative length over look-ahead values and roadmap sizes.
    SweepLat(Common),
    /// Print the resolved scenario.
    Scenario(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    let (c, verb) = match &cmd {
        Command::Genmap(c) => (c, "genmap"),
        Command::Dataset(c) => (c, "dataset"),
        Command::Train(c) => (c, "train"),
        Command::Report(c) => (c, "report"),
        Command::Chmap(c) => (c, "chmap"),
        Command::Plan(c) => (c, "plan"),
        Command::Replan(c) => (c, "replan"),
        Command::Follow(c) => (c, "follow"),
        Command::Run(c) => (c, "run"),
        Command::SweepLat(c) => (c, "sweep-lat"),
        Command::Scenario(c) => (c, "scenario"),
    };
    let sc = Scenario::resolve(&c.scenario)?;
    let dir = c.out.as_path();
    match verb {
        "genmap" => {
            pipeline::stage_genmap(&sc, dir)?;
            println!("wrote {}, {}, {}", files::LAYOUT, files::RSS_PL, files::RSS_SF);
        }
        "dataset" => {
            pipeline::stage_dataset(&sc, dir)?;
            println!("wrote {}, {}, {}", files::TRAIN, files::VALIDATION, files::TEST);
        }
        "train" => {
            let det = pipeline::stage_train(&sc, dir)?;
            match (&det.cv, &det.operating_point) {
                (Some(cv), Some(op)) => println!(
                    "C = {}, gamma = {}, threshold = {:.6} (validation TPR {:.3}, FPR {:.3})",
                    cv.best_c, cv.best_gamma, op.threshold, op.tpr, op.fpr
                ),
                _ => println!("single-class training data: constant detector"),
            }
        }
        "report" => {
            let r = pipeline::stage_report(dir)?;
            println!(
                "AUC {:.4}; at threshold {:.6}: TPR {:.3}, FPR {:.3}",
                r.roc.auc,
                r.deployed_threshold,
                r.metrics.tpr.unwrap_or(f64::NAN),
                r.metrics.fpr.unwrap_or(f64::NAN)
            );
        }
        "chmap" => {
            let m = pipeline::stage_chmap(&sc, dir)?;
            println!("{} predicted hole cells", m.hole_count());
        }
        "plan" => {
            let p = pipeline::stage_plan(&sc, dir)?;
            println!(
                "initial trajectory: {} samples, {:.2} m",
                p.trajectory.len(),
                p.trajectory.length()
            );
        }
        "replan" => {
            let out = pipeline::stage_replan(&sc, dir)?;
            match (out.event, out.result()) {
                (Some(ev), Some(r)) => println!(
                    "hole at step {} ({:.2}, {:.2}); re-route from t = {:.1} s, alternative {:.2} m",
                    ev.k_bs, ev.position.x, ev.position.y, r.t_re, r.alt_length
                ),
                _ => println!("no coverage hole ahead"),
            }
        }
        "follow" => {
            let trace = pipeline::stage_follow(&sc, dir)?;
            let last = trace.last().expect("non-empty trace");
            println!("{} steps, final position error {:.3} m", trace.len(), last.xy_error());
        }
        "run" => {
            let s = run_pipeline(&sc, dir)?;
            print!("{}", s.to_text());
        }
        "sweep-lat" => {
            for r in stage_sweep(&sc, dir)? {
                println!(
                    "lat {:>5} N {:>4} D_max {:>4}: mean {:.3} m (std {:.3}), failures {}",
                    r.lat, r.nodes, r.d_max, r.mean_alt_length, r.std_alt_length, r.failures
                );
            }
        }
        _ => print!("{}", sc.to_text()),
    }
    Ok(())
}
