use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qdsim::demos::{run_demo, Demo, DemoConfig, DemoReport, Scenario, Shots};
use qdsim::lattice::Lattice;
use qdsim::verify::{run_suite, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulator and protocol compiler for the D(S3) quantum double model.
#[derive(Parser)]
#[command(name = "qdsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the braiding or fusion demonstration.
    Demo(DemoArgs),
    /// Run a self-check suite; exits nonzero on any failure.
    Verify {
        suite: SuiteArg,
        /// Write the suite reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Inspect built-in lattices.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Print vertices, edges, faces, sites and ribbons of a lattice.
    Show {
        /// braid-min, fuse-min, their -reduced forms, or patch-MxN.
        name: String,
        /// Print the lattice spec as JSON instead.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoArg {
    Braid,
    Fuse,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Group,
    Operators,
    Ribbons,
    Braiding,
    Fusion,
    All,
}

#[derive(Args)]
struct DemoArgs {
    demo: DemoArg,
    /// Prepare the ground state and anyons with compiled circuits instead of direct operators.
    #[arg(long)]
    ground_prep: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sampled shots.
    #[arg(long, conflicts_with = "exact")]
    shots: Option<u64>,
    /// Exact outcome distribution (default).
    #[arg(long)]
    exact: bool,
    /// braid, no-braid, ground (braid demo); independent, vacuum-pair, ground (fuse demo).
    #[arg(long)]
    scenario: Option<String>,
    /// Run on the unreduced lattice and check that duplicated qudits stay identical.
    #[arg(long)]
    check_reduction: bool,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the outcome distribution as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the compiled program text.
    #[arg(long)]
    program: Option<PathBuf>,
}

fn print_report(r: &DemoReport) {
    println!("demo {:?} scenario {} on {} ({} qudits)", r.demo, r.scenario, r.lattice, r.qudits);
    println!("mode {}{}", r.mode, r.shots.map(|n| format!(", {n} shots, seed {}", r.seed)).unwrap_or_default());
    for (k, p) in &r.outcome_distribution {
        println!("  {k}  {p:.12}");
    }
    if let (Some(p), Some(o)) = (r.vacuum_probability, r.oracle_vacuum_probability) {
        println!("vacuum probability {p:.12} (dense oracle {o:.12})");
    }
    if let Some(ok) = r.duplicates_identical {
        println!("duplicated qudits identical: {ok}");
    }
    let c = &r.gate_counts;
    println!(
        "gates: {} single, {} controlled, {} measurements, {} conditionals",
        c.single, c.controlled, c.measure, c.conditional
    );
    println!("inferred: {}", r.inferred_state);
    println!("wall time {:.3}s", r.wall_time);
}

fn demo(a: DemoArgs) -> Result<ExitCode> {
    let demo = match a.demo {
        DemoArg::Braid => Demo::Braid,
        DemoArg::Fuse => Demo::Fuse,
    };
    let scenario = match &a.scenario {
        Some(s) => s.parse::<Scenario>()?,
        None => Scenario::default_for(demo),
    };
    let shots = match a.shots {
        Some(n) => Shots::Count(n),
        None => Shots::Exact,
    };
    let cfg = DemoConfig { demo, with_ground_prep: a.ground_prep, seed: a.seed, shots, scenario, check_reduction: a.check_reduction };
    let report = run_demo(&cfg)?;
    print_report(&report);
    if let Some(p) = a.json {
        std::fs::write(&p, report.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = a.csv {
        std::fs::write(&p, report.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = a.program {
        std::fs::write(&p, &report.program).with_context(|| format!("writing {}", p.display()))?;
    }
    if report.duplicates_identical == Some(false) {
        bail!("duplicated qudits diverged");
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: SuiteArg, json: Option<PathBuf>) -> Result<ExitCode> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::Group => vec![Suite::Group],
        SuiteArg::Operators => vec![Suite::Operators],
        SuiteArg::Ribbons => vec![Suite::Ribbons],
        SuiteArg::Braiding => vec![Suite::Braiding],
        SuiteArg::Fusion => vec![Suite::Fusion],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for s in suites {
        let rep = run_suite(s)?;
        println!("== {} ==", s.name());
        for c in &rep.checks {
            println!("{c}");
        }
        let failed = rep.checks.iter().filter(|c| !c.passed).count();
        println!("{}: {} checks, {failed} failed, {:.2}s", s.name(), rep.checks.len(), rep.wall_time);
        ok &= rep.passed();
        reports.push(rep);
    }
    if let Some(p) = json {
        std::fs::write(&p, serde_json::to_string_pretty(&reports)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn show_lattice(name: &str, json: bool) -> Result<ExitCode> {
    let lat = Lattice::named(name)?;
    if json {
        println!("{}", lat.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    println!("lattice {}", lat.name());
    let verts: Vec<String> = lat
        .vertex_ids()
        .map(|v| format!("{}{}", lat.vertex_name(v), if lat.is_interior(v) { "" } else { "*" }))
        .collect();
    println!("vertices ({}; * = boundary): {}", verts.len(), verts.join(" "));
    println!("edges ({}):", lat.edges().len());
    for e in lat.edges() {
        let name = e.name.as_deref().map(|n| format!(" {n}")).unwrap_or_default();
        println!("  {}{name}: {} -> {}", e.id, lat.vertex_name(e.tail), lat.vertex_name(e.head));
    }
    println!("faces ({}):", lat.faces().len());
    for f in lat.faces() {
        let walk: Vec<String> = f.walk.iter().map(|x| format!("{x:+}")).collect();
        println!("  {} from {}: {}", f.name, lat.vertex_name(f.start), walk.join(" "));
    }
    let spec = lat.spec();
    if !spec.sites.is_empty() {
        println!("sites:");
        for s in &spec.sites {
            println!("  {} = ({}, {})", s.name, s.vertex, s.face);
        }
    }
    if !spec.ribbons.is_empty() {
        println!("ribbons:");
        for r in &spec.ribbons {
            println!("  {}: {} -> {} [{}]", r.name, r.start_site, r.end_site, r.segments.join(" "));
        }
    }
    for (drop, keep) in lat.duplicates() {
        println!("duplicate: edge {drop} mirrors edge {keep}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QDSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Demo(a) => demo(a),
        Command::Verify { suite, json } => verify(suite, json),
        Command::Lattice { command: LatticeCommand::Show { name, json } } => show_lattice(&name, json),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
