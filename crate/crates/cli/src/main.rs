mod input;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qnetcode::gf::choose_field_size;
use qnetcode::netcode::{construct_linear_code, StepKind};
use qnetcode::netgraph::{parse_network, Feasibility, Network};
use qnetcode::oracle::{standard_suite, PropertyReport, TOLERANCE};
use qnetcode::protocol::{
    butterfly_walkthrough, run_full, MeasureSchedule, ProtocolError, RunOptions, TargetSelection,
};
use serde_json::json;

use input::InputSpec;

#[derive(Parser)]
#[command(
    name = "qnetcode",
    version,
    about = "Perfect quantum state transfer over coded networks"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report multicast feasibility with the max-flow to each target.
    Check { network: PathBuf },
    /// Build a random linear multicast code.
    Code {
        network: PathBuf,
        #[arg(long)]
        field: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the code document to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the transfer protocol end to end.
    Run {
        network: PathBuf,
        /// Ordered target subset, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        select: Vec<String>,
        /// 1-based permutation: qudit k goes to the perm[k]-th selected target.
        #[arg(long, value_delimiter = ',')]
        perm: Option<Vec<usize>>,
        /// zero, plus, random:<seed> or amps:<a0>,<a1>,...
        #[arg(long, default_value = "random:0")]
        input: InputSpec,
        /// Measurement seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        code_seed: u64,
        #[arg(long)]
        field: Option<u64>,
        #[arg(long, value_enum, default_value_t = Schedule::Auto)]
        schedule: Schedule,
        /// Write the transcript as JSON lines to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Walk through the butterfly example, printing each intermediate state.
    DemoButterfly {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the oracle checks on the shipped fixtures.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Auto,
    Deferred,
    Eager,
}

impl From<Schedule> for MeasureSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Auto => MeasureSchedule::Auto,
            Schedule::Deferred => MeasureSchedule::Deferred,
            Schedule::Eager => MeasureSchedule::Eager,
        }
    }
}

/// Bad input from the user; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

fn load(path: &Path) -> Result<Network> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn flows_text(f: &Feasibility) -> String {
    let parts: Vec<String> = f
        .flows()
        .iter()
        .map(|t| format!("{} to {}", t.flow, t.target))
        .collect();
    format!("max-flow {}", parts.join(", "))
}

fn check(net: &Network, json: bool) -> Result<bool> {
    let verdict = net.multicast_feasible();
    if json {
        println!("{}", serde_json::to_string_pretty(&verdict)?);
    } else {
        match &verdict {
            Feasibility::Feasible { .. } => println!("feasible: {}", flows_text(&verdict)),
            Feasibility::Infeasible {
                target,
                flow,
                required,
                ..
            } => {
                println!(
                    "infeasible: {target} has max-flow {flow} < {required} ({})",
                    flows_text(&verdict)
                )
            }
        }
    }
    Ok(verdict.is_feasible())
}

fn code(
    net: &Network,
    field: Option<u64>,
    seed: u64,
    out: Option<&Path>,
    json: bool,
) -> Result<bool> {
    let p = field.unwrap_or_else(|| choose_field_size(net));
    let code = construct_linear_code(&net.expand_capacities(), p, seed)?;
    let doc = code.to_document();
    if let Some(path) = out {
        std::fs::write(path, code.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        println!("{}", code.to_json());
        return Ok(true);
    }
    println!("field: F_{}, rate: {}", doc.field, doc.rate);
    for node in &doc.nodes {
        println!(
            "{} ({}): inputs [{}] -> outputs [{}]",
            node.node,
            kind_name(&node.kind),
            node.inputs.join(", "),
            node.outputs.join(", ")
        );
        for (input, row) in node.inputs.iter().zip(&node.gamma) {
            let row: Vec<String> = row.iter().map(u64::to_string).collect();
            println!("  {input}: [{}]", row.join(" "));
        }
    }
    for edge in &doc.edges {
        let v: Vec<String> = edge.global.iter().map(u64::to_string).collect();
        println!("{}: ({})", edge.edge, v.join(","));
    }
    Ok(true)
}

fn kind_name(kind: &StepKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn run(
    net: &Network,
    select: Vec<String>,
    perm: Option<Vec<usize>>,
    input: &InputSpec,
    options: RunOptions,
    transcript: Option<&Path>,
    json: bool,
) -> Result<bool> {
    let h = net.sources().len();
    let p = options.field.unwrap_or_else(|| choose_field_size(net));
    let perm = perm.unwrap_or_else(|| (1..=select.len()).collect());
    let selection = TargetSelection::one_based(select, &perm).map_err(usage)?;
    let (amps, warning) = input
        .amplitudes((p as usize).pow(h as u32))
        .map_err(usage)?;
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    let report = match run_full(net, &amps, &selection, &options) {
        Ok(r) => r,
        Err(e @ ProtocolError::Infeasible { .. }) => {
            if json {
                println!(
                    "{}",
                    json!({ "status": "infeasible", "error": e.to_string() })
                );
            } else {
                println!("{e}");
            }
            return Ok(false);
        }
        Err(e @ ProtocolError::Selection(_)) => return Err(usage(e)),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = transcript {
        std::fs::write(path, report.transcript.to_json_lines())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        let value = json!({
            "fidelity": report.fidelity,
            "transmissions": report.transmissions,
            "field": report.field,
            "schedule": report.schedule,
            "peak_registers": report.peak_registers,
            "outputs": report.outputs,
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!(
            "fidelity: {:.9}, transmissions: {}",
            report.fidelity, report.transmissions
        );
        println!("outputs: {}", report.outputs.join(", "));
    }
    Ok(report.fidelity >= 1.0 - TOLERANCE)
}

fn demo(seed: u64, json: bool) -> Result<bool> {
    let walk = butterfly_walkthrough(seed, seed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&walk)?);
    } else {
        for block in &walk.program.blocks {
            println!("[{}]", block.label);
            for ins in &block.instructions {
                println!("  {}", serde_json::to_string(ins)?);
            }
        }
        for s in &walk.snapshots {
            println!("{} over ({}):", s.label, s.snapshot.registers.join(", "));
            let n = s.snapshot.registers.len();
            for &(idx, re, im) in &s.snapshot.amplitudes {
                println!("  |{:0n$b}>  {re:+.6} {im:+.6}i", idx);
            }
        }
        println!("transmissions: {}", walk.transmissions);
        println!("fidelity (t1,t2): {:.9}", walk.fidelity_identity);
        println!("fidelity (t2,t1): {:.9}", walk.fidelity_swap);
    }
    Ok(walk.fidelity_identity >= 1.0 - TOLERANCE && walk.fidelity_swap >= 1.0 - TOLERANCE)
}

fn verify(json: bool) -> Result<bool> {
    let reports: Vec<PropertyReport> = standard_suite();
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        println!(
            "{:<20} {:<48} {:>7} {:>8}  worst",
            "property", "instance", "cases", "failures"
        );
        for r in &reports {
            let worst = match (r.max_deviation, r.min_fidelity) {
                (_, Some(f)) => format!("min fidelity {f:.12}"),
                (Some(d), None) => format!("max deviation {d:.1e}"),
                _ => String::new(),
            };
            println!(
                "{:<20} {:<48} {:>7} {:>8}  {worst}",
                r.property,
                r.instance,
                r.cases,
                r.failures.len()
            );
            for f in r.failures.iter().take(5) {
                println!("    {}: {}", f.case, f.detail);
            }
        }
    }
    Ok(reports.iter().all(PropertyReport::passed))
}

fn dispatch(cli: Cli) -> Result<bool> {
    let json = cli.json;
    match cli.command {
        Command::Check { network } => check(&load(&network)?, json),
        Command::Code {
            network,
            field,
            seed,
            out,
        } => code(&load(&network)?, field, seed, out.as_deref(), json),
        Command::Run {
            network,
            select,
            perm,
            input,
            seed,
            code_seed,
            field,
            schedule,
            transcript,
        } => {
            let options = RunOptions {
                field,
                code_seed,
                measurement_seed: seed,
                schedule: schedule.into(),
            };
            run(
                &load(&network)?,
                select,
                perm,
                &input,
                options,
                transcript.as_deref(),
                json,
            )
        }
        Command::DemoButterfly { seed } => demo(seed, json),
        Command::Verify => verify(json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
