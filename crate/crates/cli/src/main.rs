//! `disasm-plan`: command-line front end for the disassembly planner.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use disasm_core::fixtures;
use disasm_core::motion::MotionPlan;
use disasm_core::pipeline::{self, FailureClass, PipelineConfig, PipelineError};
use disasm_core::schedule::{gantt_svg, ScheduleReport};
use disasm_core::task::TaskPlan;
use disasm_core::{AssemblyModel, Execution};

#[derive(Parser)]
#[command(name = "disasm-plan", version, about = "Plan robotic disassembly: sequence, arm tasks, motion and schedule")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on an assembly file.
    Plan {
        #[arg(long)]
        model: PathBuf,
        /// Random seed; required so runs are reproducible.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for the artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        /// Keep the rotary stage at 0 degrees.
        #[arg(long)]
        fixed_stage: bool,
        #[arg(long)]
        sequential: bool,
    },
    /// Compare how many initial chromosomes are admissible.
    InitCompare {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_genes: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Schedule an existing task plan and motion plan.
    ScheduleOnly {
        #[arg(long)]
        task_plan: PathBuf,
        #[arg(long)]
        motion_plan: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write assembly files: the seven-part example and the generated corpus,
    /// or one generated model.
    GenFixture {
        #[arg(long)]
        out: PathBuf,
        /// Generate a single model with this many parts.
        #[arg(long)]
        eta: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<PipelineError>()
                .map_or(FailureClass::Io.exit_code(), |p| p.class.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Plan {
            model,
            seed,
            config,
            out,
            generations,
            population,
            fixed_stage,
            sequential,
        } => {
            let mut cfg = load_config(config.as_deref())?.with_seed(seed);
            if let Some(g) = generations {
                cfg.ga.generations = g;
            }
            if let Some(n) = population {
                cfg.ga.population_size = n;
            }
            if fixed_stage {
                cfg.motion.stage_enabled = false;
            }
            if sequential {
                cfg.execution = Execution::Sequential;
            }
            let assembly = AssemblyModel::load(&model).map_err(PipelineError::from)?;
            let output = pipeline::run(&assembly, &cfg)?;
            if let Some(dir) = out.or_else(|| cfg.io.out_dir.clone()) {
                output.write(&dir)?;
                println!("artifacts written to {}", dir.display());
            }
            let r = &output.report;
            let order: Vec<String> = r.removal_order.iter().map(ToString::to_string).collect();
            println!("removal order: {}", order.join(" "));
            println!(
                "makespan {:.3} s, {} tool changes, {} pose adjustments{}",
                r.makespan_s,
                r.tool_change_count,
                r.pose_adjust_count,
                if r.schedule_optimal { "" } else { " (not proven optimal)" }
            );
            Ok(())
        }
        Command::InitCompare {
            model,
            n_genes,
            seeds,
            json,
        } => {
            let assembly = AssemblyModel::load(&model).map_err(PipelineError::from)?;
            let cmp = pipeline::compare_init(&assembly, n_genes, &seeds, Execution::default());
            if json {
                println!("{}", serde_json::to_string_pretty(&cmp)?);
            } else {
                println!("{:<10} {:>10} {:>10} {:>12}", "init", "generated", "available", "availability");
                for row in &cmp.rows {
                    println!(
                        "{:<10} {:>10} {:>10} {:>12}",
                        row.initializer,
                        row.generated,
                        row.available,
                        row.availability_text()
                    );
                }
                if let Some(exact) = cmp.exact_random_availability {
                    println!("exact share of admissible orders: {exact:.6}");
                }
            }
            Ok(())
        }
        Command::ScheduleOnly {
            task_plan,
            motion_plan,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let plan: TaskPlan = pipeline::read_json(&task_plan)?;
            let motion: MotionPlan = pipeline::read_json(&motion_plan)?;
            let (inst, schedule) = pipeline::schedule_only(&plan, &motion, &cfg.scheduler)?;
            fs::create_dir_all(&out).with_context(|| out.display().to_string())?;
            let mut body = serde_json::to_string_pretty(&ScheduleReport::new(&inst, &schedule))?;
            body.push('\n');
            fs::write(out.join("schedule.json"), body)?;
            fs::write(out.join("gantt.svg"), gantt_svg(&inst, &schedule))?;
            println!("makespan {:.3} s", schedule.makespan_ms as f64 / 1000.0);
            Ok(())
        }
        Command::GenFixture { out, eta, seed } => {
            if let Some(eta) = eta {
                if eta < 3 {
                    return Err(PipelineError {
                        layer: pipeline::Layer::Model,
                        class: FailureClass::Validation,
                        message: format!("a generated model needs at least 3 parts, got {eta}"),
                    }
                    .into());
                }
                if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                fixtures::generate(eta, seed).save(&out).map_err(PipelineError::from)?;
                return Ok(());
            }
            let corpus = out.join("corpus");
            fs::create_dir_all(&corpus).with_context(|| corpus.display().to_string())?;
            fixtures::fig3().save(out.join("fig3.json")).map_err(PipelineError::from)?;
            for i in 0..fixtures::CORPUS_SIZE {
                let e = fixtures::corpus_entry(i);
                fixtures::generate(e.eta, e.seed)
                    .save(corpus.join(format!("corpus_{i:02}_eta{}.json", e.eta)))
                    .map_err(PipelineError::from)?;
            }
            println!("wrote fig3.json and {} corpus models to {}", fixtures::CORPUS_SIZE, out.display());
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}
