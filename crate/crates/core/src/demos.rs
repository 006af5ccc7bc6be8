//! The two minimal demonstrations: braiding detection on `braid-min` and fusion detection on
//! `fuse-min`, each with or without compiled ground-state preparation.

use crate::dense::closed_ribbon_expectation;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::program::{Basis, Builder, Executor, GateCounts, GateProgram, Run, Vector};
use crate::protocols::{
    compile_controlled_braid, compile_create, compile_fusion, compile_ground, compile_move_shared_face, compile_vacuum_pair,
    emit_gauge, first_free, CreateVariant, GroundVariant, PairKind,
};
use crate::register::{rng_from_seed, Role, SparseState};
use crate::ribbon::{apply_superposed_ribbon, Ribbon, RibbonSuperposition};
use crate::s3::{Element, Irrep};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Demo {
    Braid,
    Fuse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// |0_R2⟩ followed by A_t0(s0).
    Braid,
    /// |0_R2⟩ only.
    NoBraid,
    /// No anyons.
    Ground,
    /// Two independently created |0_R2⟩ charges.
    Independent,
    /// An R2 vacuum pair stretched from x1 to x2.
    VacuumPair,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Braid => "braid",
            Scenario::NoBraid => "no-braid",
            Scenario::Ground => "ground",
            Scenario::Independent => "independent",
            Scenario::VacuumPair => "vacuum-pair",
        }
    }

    pub fn default_for(demo: Demo) -> Scenario {
        match demo {
            Demo::Braid => Scenario::Braid,
            Demo::Fuse => Scenario::Independent,
        }
    }

    pub fn valid_for(self, demo: Demo) -> bool {
        match demo {
            Demo::Braid => matches!(self, Scenario::Braid | Scenario::NoBraid | Scenario::Ground),
            Demo::Fuse => matches!(self, Scenario::Independent | Scenario::VacuumPair | Scenario::Ground),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scenario> {
        [Scenario::Braid, Scenario::NoBraid, Scenario::Ground, Scenario::Independent, Scenario::VacuumPair]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scenario `{s}`")))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(u64),
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub demo: Demo,
    pub with_ground_prep: bool,
    pub seed: u64,
    pub shots: Shots,
    pub scenario: Scenario,
    /// Run on the full lattice and check that duplicated qudits stay identical.
    pub check_reduction: bool,
}

impl DemoConfig {
    pub fn new(demo: Demo) -> Self {
        DemoConfig {
            demo,
            with_ground_prep: false,
            seed: 0,
            shots: Shots::Exact,
            scenario: Scenario::default_for(demo),
            check_reduction: false,
        }
    }
}

fn sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*x))
}

fn sig12_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, round12(*v))))
}

fn sig12_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round12(*v)),
        None => s.serialize_none(),
    }
}

/// Rounds to 12 significant digits; values below 1e-14 in magnitude become 0.
pub fn round12(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub schema_version: u32,
    pub demo: Demo,
    pub scenario: Scenario,
    pub lattice: String,
    pub ground_prep: bool,
    /// "exact" or "sampled".
    pub mode: String,
    pub seed: u64,
    pub shots: Option<u64>,
    /// Largest register size reached during the run.
    pub qudits: usize,
    #[serde(serialize_with = "sig12_map")]
    pub outcome_distribution: BTreeMap<String, f64>,
    pub inferred_state: String,
    pub gate_counts: GateCounts,
    #[serde(serialize_with = "sig12")]
    pub wall_time: f64,
    #[serde(serialize_with = "sig12_opt", skip_serializing_if = "Option::is_none")]
    pub vacuum_probability: Option<f64>,
    #[serde(serialize_with = "sig12_opt", skip_serializing_if = "Option::is_none")]
    pub oracle_vacuum_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicates_identical: Option<bool>,
    #[serde(skip)]
    pub program: String,
}

impl DemoReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        for (k, v) in &self.outcome_distribution {
            out.push_str(&format!("{k},{}\n", round12(*v)));
        }
        out
    }

    pub fn probability(&self, label: &str) -> f64 {
        self.outcome_distribution.get(label).copied().unwrap_or(0.0)
    }
}

struct Stage {
    name: &'static str,
    program: GateProgram,
}

/// Compiled demo: optional direct initial state, stages, and the detection register.
struct Plan {
    lat: Lattice,
    initial: SparseState,
    stages: Vec<Stage>,
    detect: usize,
    labels: Vec<String>,
    loop_ribbon: Ribbon,
}

fn demo_lattice(cfg: &DemoConfig) -> Result<Lattice> {
    let base = match cfg.demo {
        Demo::Braid => "braid-min",
        Demo::Fuse => "fuse-min",
    };
    Lattice::named(&if cfg.check_reduction { base.to_string() } else { format!("{base}-reduced") })
}

fn r2_zero() -> RibbonSuperposition {
    RibbonSuperposition::electric(Irrep::R2, 0, 0).expect("valid")
}

fn plan(cfg: &DemoConfig) -> Result<Plan> {
    if !cfg.scenario.valid_for(cfg.demo) {
        return Err(Error::Invalid(format!("scenario `{}` does not apply to this demo", cfg.scenario)));
    }
    let lat = demo_lattice(cfg)?;
    let c = Ribbon::named(&lat, "loop0")?;
    let fresh = lat.fresh_state();
    let mut next = first_free(&lat, &fresh);
    let mut stages = Vec::new();
    let mut push = |name: &'static str, f: &dyn Fn(&mut Builder) -> Result<()>, next: &mut u32| -> Result<()> {
        let mut b = Builder::new(*next);
        f(&mut b)?;
        *next += 16;
        stages.push(Stage { name, program: b.finish() });
        Ok(())
    };
    let initial = if cfg.with_ground_prep {
        push("ground", &|b| compile_ground(&lat, b, GroundVariant::PivotFourier), &mut next)?;
        match cfg.scenario {
            Scenario::Braid | Scenario::NoBraid => {
                let r = Ribbon::named(&lat, "r01")?;
                push("create", &|b| compile_create(&lat, b, &r, &r2_zero(), CreateVariant::Pivot), &mut next)?;
            }
            Scenario::Independent => {
                let r1 = Ribbon::named(&lat, "r01")?;
                let r2 = Ribbon::named(&lat, "r02")?;
                push("create x1", &|b| compile_create(&lat, b, &r1, &r2_zero(), CreateVariant::Pivot), &mut next)?;
                push("create x2", &|b| compile_create(&lat, b, &r2, &r2_zero(), CreateVariant::Pivot), &mut next)?;
            }
            Scenario::VacuumPair => {
                let r = Ribbon::named(&lat, "r10")?;
                let (x0, x2) = (lat.site_named("x0")?, lat.site_named("x2")?);
                push("pair", &|b| compile_vacuum_pair(&lat, b, PairKind::Electric(Irrep::R2), &r, CreateVariant::Pivot), &mut next)?;
                push("move", &|b| compile_move_shared_face(&lat, b, x0, x2).map(|_| ()), &mut next)?;
            }
            Scenario::Ground => {}
        }
        fresh
    } else {
        let gs = lat.ground_state()?;
        match cfg.scenario {
            Scenario::Braid | Scenario::NoBraid => apply_superposed_ribbon(&gs, &r2_zero(), &Ribbon::named(&lat, "r01")?)?.1,
            Scenario::Independent => {
                let s = apply_superposed_ribbon(&gs, &r2_zero(), &Ribbon::named(&lat, "r01")?)?.1;
                apply_superposed_ribbon(&s, &r2_zero(), &Ribbon::named(&lat, "r02")?)?.1
            }
            Scenario::VacuumPair => {
                let r = Ribbon::named(&lat, "r10")?;
                let x2 = lat.site_named("x2")?;
                let full = r.extended(&lat, crate::ribbon::Segment::Direct(5))?.reanchored(x2)?;
                apply_superposed_ribbon(&gs, &RibbonSuperposition::electric_pair(Irrep::R2), &full)?.1
            }
            Scenario::Ground => gs,
        }
    };
    if cfg.scenario == Scenario::Braid {
        let s0 = lat.site_named("x0")?.vertex;
        push("braid", &|b| emit_gauge(&lat, b, Element::T0, s0), &mut next)?;
    }
    let mut b = Builder::new(next);
    let (detect, labels) = match cfg.demo {
        Demo::Braid => {
            let zlist = vec![Element::E, Element::CP, Element::CM];
            let a = b.alloc(Role::VertexAncilla, Vector::Fourier { zlist: zlist.clone(), k: 0 });
            compile_controlled_braid(&lat, &mut b, a, &c)?;
            let m = b.measure(a, Basis::Fourier(zlist));
            b.release(a);
            (m, (0..3).map(|k| format!("|{k}>")).collect())
        }
        Demo::Fuse => {
            let regs = compile_fusion(&lat, &mut b, &c)?;
            (regs.charge, (0..6).map(|k| format!("|{k}>")).collect())
        }
    };
    stages.push(Stage { name: "detect", program: b.finish() });
    Ok(Plan { lat, initial, stages, detect, labels, loop_ribbon: c })
}

fn duplicates_identical(lat: &Lattice, s: &SparseState) -> Result<bool> {
    let ids = s.qudit_ids();
    for (drop, keep) in lat.duplicates() {
        let (Some(a), Some(b)) = (ids.iter().position(|q| q.0 == drop), ids.iter().position(|q| q.0 == keep)) else {
            continue;
        };
        if s.terms().iter().any(|(cfg, _)| cfg[a] != cfg[b]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn add_counts(a: &mut GateCounts, b: &GateCounts) {
    a.single += b.single;
    a.controlled += b.controlled;
    a.measure += b.measure;
    a.conditional += b.conditional;
    a.project += b.project;
    a.alloc += b.alloc;
    a.release += b.release;
    a.relabel += b.relabel;
}

fn inferred(demo: Demo, best: usize) -> String {
    match (demo, best) {
        (Demo::Braid, 0) => "ground state".into(),
        (Demo::Braid, 1) => "|0_R2>".into(),
        (Demo::Braid, 2) => "|1_R2>".into(),
        (Demo::Fuse, 0) => "vacuum after fusion".into(),
        (Demo::Fuse, _) => "quasi-excitation left behind".into(),
        _ => "undetermined".into(),
    }
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    let t0 = Instant::now();
    let plan = plan(cfg)?;
    let max_q = Cell::new(plan.initial.num_qudits());
    let exec = Executor::with_hook(|s: &SparseState| {
        max_q.set(max_q.get().max(s.num_qudits()));
        Ok(())
    });
    let (pre, detect) = plan.stages.split_at(plan.stages.len() - 1);
    let program = plan.stages.iter().map(|s| format!("# stage {}\n{}", s.name, s.program.to_text())).collect::<String>();
    let mut counts = GateCounts::default();
    let mut dist = vec![0.0; plan.labels.len()];
    let mut dup_ok = true;
    let mut oracle = None;
    match cfg.shots {
        Shots::Exact => {
            let mut state = plan.initial.clone();
            for st in pre {
                let runs = exec.run_exact(&st.program, state)?;
                let best = pick_consistent(&runs, st.name)?;
                add_counts(&mut counts, &best.counts);
                state = best.state.clone();
                dup_ok &= duplicates_identical(&plan.lat, &state)?;
                log::debug!("stage {} done: {} terms", st.name, state.len());
            }
            if cfg.demo == Demo::Fuse && state.num_qudits() <= crate::dense::MAX_DENSE_QUDITS {
                oracle = Some(closed_ribbon_expectation(&plan.lat, &state, &plan.loop_ribbon)?);
            }
            let runs = exec.run_exact(&detect[0].program, state)?;
            for r in &runs {
                dist[r.outcomes[&plan.detect]] += r.probability;
                dup_ok &= duplicates_identical(&plan.lat, &r.state)?;
            }
            if let Some(r) = runs.first() {
                add_counts(&mut counts, &r.counts);
            }
        }
        Shots::Count(n) => {
            if n == 0 {
                return Err(Error::Invalid("shots must be at least 1".into()));
            }
            let mut rng: ChaCha8Rng = rng_from_seed(cfg.seed);
            for shot in 0..n {
                let mut state = plan.initial.clone();
                let mut outcome = None;
                for st in &plan.stages {
                    let run = exec.run_sampled(&st.program, state, &mut rng)?;
                    if shot == 0 {
                        add_counts(&mut counts, &run.counts);
                    }
                    if let Some(&k) = run.outcomes.get(&plan.detect) {
                        if st.name == "detect" {
                            outcome = Some(k);
                        }
                    }
                    state = run.state;
                    dup_ok &= duplicates_identical(&plan.lat, &state)?;
                }
                let k = outcome.ok_or_else(|| Error::Program("detection register not written".into()))?;
                dist[k] += 1.0 / n as f64;
            }
        }
    }
    let best = (0..dist.len()).max_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap_or(0);
    let outcome_distribution = plan.labels.iter().cloned().zip(dist.iter().copied()).collect();
    Ok(DemoReport {
        schema_version: REPORT_VERSION,
        demo: cfg.demo,
        scenario: cfg.scenario,
        lattice: plan.lat.name().to_string(),
        ground_prep: cfg.with_ground_prep,
        mode: match cfg.shots {
            Shots::Exact => "exact".into(),
            Shots::Count(_) => "sampled".into(),
        },
        seed: cfg.seed,
        shots: match cfg.shots {
            Shots::Exact => None,
            Shots::Count(n) => Some(n),
        },
        qudits: max_q.get(),
        outcome_distribution,
        inferred_state: inferred(cfg.demo, best),
        gate_counts: counts,
        wall_time: t0.elapsed().as_secs_f64(),
        vacuum_probability: (cfg.demo == Demo::Fuse).then(|| dist[0]),
        oracle_vacuum_probability: oracle,
        duplicates_identical: cfg.check_reduction.then_some(dup_ok),
        program,
    })
}

/// The most probable run after checking that every branch reached the same state.
fn pick_consistent<'r>(runs: &'r [Run], stage: &str) -> Result<&'r Run> {
    let best = runs
        .iter()
        .max_by(|a, b| a.probability.total_cmp(&b.probability))
        .ok_or_else(|| Error::ImpossibleBranch(format!("stage {stage} has no branch")))?;
    for r in runs {
        if 1.0 - best.state.fidelity(&r.state)? > 1e-9 {
            return Err(Error::Program(format!("stage {stage}: measurement branches disagree")));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round12_keeps_twelve_digits() {
        assert_eq!(round12(0.1234567890123456), 0.123456789012);
        assert_eq!(round12(1e-17), 0.0);
        assert_eq!(round12(1.0), 1.0);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in ["braid", "no-braid", "ground", "independent", "vacuum-pair"] {
            assert_eq!(s.parse::<Scenario>().unwrap().name(), s);
        }
        assert!(!Scenario::Independent.valid_for(Demo::Braid));
    }
}
