//! Self-checks behind `qdsim verify`: each check compares two independent routes
//! (transcribed tables, closed forms, dense oracle, compiled programs, operator route).

use crate::demos::{run_demo, Demo, DemoConfig, Scenario, Shots};
use crate::dense::{dense_ribbon, CommutatorTables, ConfigOps, DenseState};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Matrix, C64, ONE};
use crate::protocols::{
    braid, create_anyon, create_vacuum_pair, fusion_measure, interfere, move_shared_face, move_shared_vertex, prepare_ground,
    AnyonHandle, CreateVariant, GroundVariant, Mode, PairKind, Part,
};
use crate::register::{rng_from_seed, SparseState};
use crate::ribbon::{apply_ribbon, apply_superposed_ribbon, closed_ribbon_vacuum_projector, Ribbon, RibbonSuperposition, Segment};
use crate::s3::{
    anyon_types, character, conjugacy_class, irrep_matrix, regular_action, semidirect_basis_change, ClassTag, Element, Irrep, Side, ORDER,
};
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub const TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    /// Passes when `err <= tol`.
    pub fn within(name: impl Into<String>, err: f64, tol: f64) -> Self {
        Check::new(name, err <= tol, format!("err={err:.3e} tol={tol:.0e}"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Group,
    Operators,
    Ribbons,
    Braiding,
    Fusion,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Group, Suite::Operators, Suite::Ribbons, Suite::Braiding, Suite::Fusion];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Group => "group",
            Suite::Operators => "operators",
            Suite::Ribbons => "ribbons",
            Suite::Braiding => "braiding",
            Suite::Fusion => "fusion",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let t0 = Instant::now();
    let checks = match suite {
        Suite::Group => [regular_matrices()?, semidirect_forms()?, group_axioms()?].concat(),
        Suite::Operators => [operator_algebra()?, ground_preparation()?].concat(),
        Suite::Ribbons => [dense_vs_sparse_ribbons()?, ribbon_commutators()?, creation_and_moves()?].concat(),
        Suite::Braiding => [braiding_relations()?, braid_demo()?, interferometry()?].concat(),
        Suite::Fusion => fusion_checks()?,
    };
    Ok(SuiteReport { suite, checks, wall_time: t0.elapsed().as_secs_f64() })
}

fn max_diff(a: &SparseState, b: &SparseState) -> Result<f64> {
    Ok((1.0 - a.fidelity(b)?).abs())
}

// ---------------------------------------------------------------- group

/// The twelve 6×6 L± matrices in basis order e, t0, t1, t2, c+, c-, row by row.
const L_PLUS: [(&str, &str); 6] = [
    ("e", "100000 010000 001000 000100 000010 000001"),
    ("t0", "010000 100000 000010 000001 001000 000100"),
    ("t1", "001000 000001 100000 000010 000100 010000"),
    ("t2", "000100 000010 000001 100000 010000 001000"),
    ("c+", "000001 001000 000100 010000 100000 000010"),
    ("c-", "000010 000100 010000 001000 000001 100000"),
];

const L_MINUS: [(&str, &str); 6] = [
    ("e", "100000 010000 001000 000100 000010 000001"),
    ("t0", "010000 100000 000001 000010 000100 001000"),
    ("t1", "001000 000010 100000 000001 010000 000100"),
    ("t2", "000100 000001 000010 100000 001000 010000"),
    ("c+", "000010 001000 000100 010000 000001 100000"),
    ("c-", "000001 000100 010000 001000 100000 000010"),
];

fn parse_rows(rows: &str) -> Matrix {
    let rows: Vec<Vec<f64>> =
        rows.split_whitespace().map(|r| r.chars().map(|c| if c == '1' { 1.0 } else { 0.0 }).collect()).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    Matrix::from_real_rows(&refs)
}

fn element(name: &str) -> Element {
    Element::ALL.into_iter().find(|g| g.name() == name).expect("table names are elements")
}

/// Every L±^g from `regular_action` equals its transcribed table exactly.
pub fn regular_matrices() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (side, sign, table) in [(Side::Left, "+", &L_PLUS), (Side::Right, "-", &L_MINUS)] {
        for (g, rows) in table.iter() {
            let m = regular_action(side, element(g));
            let exact = m == parse_rows(rows);
            out.push(Check::new(format!("L{sign}^{g} matches table"), exact, if exact { "exact" } else { "entry mismatch" }));
        }
    }
    Ok(out)
}

fn qutrit_flip(i: usize, j: usize) -> Matrix {
    let mut p = [0, 1, 2];
    p.swap(i, j);
    Matrix::permutation(&p)
}

fn qubit(rows: [[f64; 2]; 2]) -> Matrix {
    Matrix::from_real_rows(&[&rows[0], &rows[1]])
}

/// Qutrit⊗qubit factorized forms of L±^g in the basis |r⟩|s⟩ = |c+^r t0^s⟩.
pub fn semidirect_form(side: Side, g: Element) -> Matrix {
    let one3 = Matrix::identity(3);
    let one2 = Matrix::identity(2);
    let x = Matrix::permutation(&[1, 2, 0]);
    let x_inv = x.adjoint();
    let sx = qubit([[0.0, 1.0], [1.0, 0.0]]);
    let s_minus = qubit([[0.0, 0.0], [1.0, 0.0]]);
    let s_plus = qubit([[0.0, 1.0], [0.0, 0.0]]);
    let p0 = qubit([[1.0, 0.0], [0.0, 0.0]]);
    let p1 = qubit([[0.0, 0.0], [0.0, 1.0]]);
    match (side, g.name()) {
        (_, "e") => one3.kron(&one2),
        (Side::Left, "t0") => qutrit_flip(1, 2).kron(&sx),
        (Side::Left, "t1") => qutrit_flip(0, 2).kron(&sx),
        (Side::Left, "t2") => qutrit_flip(0, 1).kron(&sx),
        (Side::Left, "c+") => x.kron(&one2),
        (Side::Left, _) => x_inv.kron(&one2),
        (Side::Right, "t0") => one3.kron(&sx),
        (Side::Right, "t1") => x_inv.kron(&s_minus).add(&x.kron(&s_plus)),
        (Side::Right, "t2") => x_inv.kron(&s_plus).add(&x.kron(&s_minus)),
        (Side::Right, "c+") => x_inv.kron(&p0).add(&x.kron(&p1)),
        (Side::Right, _) => x.kron(&p0).add(&x_inv.kron(&p1)),
    }
}

pub fn semidirect_forms() -> Result<Vec<Check>> {
    let u = semidirect_basis_change();
    let mut out = Vec::new();
    for (side, sign) in [(Side::Left, "+"), (Side::Right, "-")] {
        for g in Element::ALL {
            let in_product = &(&u.adjoint() * &regular_action(side, g)) * &u;
            let d = in_product.max_abs_diff(&semidirect_form(side, g));
            out.push(Check::within(format!("L{sign}^{g} semidirect form"), d, 0.0));
        }
    }
    Ok(out)
}

pub fn group_axioms() -> Result<Vec<Check>> {
    let all = Element::ALL;
    let assoc = all.iter().all(|&a| all.iter().all(|&b| all.iter().all(|&c| (a * b) * c == a * (b * c))));
    let ident = all.iter().all(|&a| Element::E * a == a && a * Element::E == a);
    let inv = all.iter().all(|&a| a * a.inv() == Element::E && a.inv() * a == Element::E);
    let latin = all.iter().all(|&a| {
        let mut row: Vec<usize> = all.iter().map(|&b| (a * b).index()).collect();
        row.sort();
        row == (0..ORDER).collect::<Vec<_>>()
    });
    let mut hom = 0.0f64;
    for r in Irrep::ALL {
        for a in all {
            for b in all {
                hom = hom.max((&irrep_matrix(r, a) * &irrep_matrix(r, b)).max_abs_diff(&irrep_matrix(r, a * b)));
            }
        }
    }
    let mut orth = 0.0f64;
    for r in Irrep::ALL {
        for s in Irrep::ALL {
            let sum: C64 = all.iter().map(|&g| character(r, g) * character(s, g).conj()).sum();
            let expect = if r == s { ORDER as f64 } else { 0.0 };
            orth = orth.max((sum - C64::new(expect, 0.0)).norm());
        }
    }
    let class_eq = all.iter().all(|&g| {
        let c = conjugacy_class(g);
        c.members.len() * c.centralizer.len() == ORDER
    });
    let dims: usize = anyon_types().iter().map(|a| a.quantum_dim * a.quantum_dim).sum();
    let commute = all.iter().all(|&a| {
        all.iter().all(|&b| {
            let (l, r) = (regular_action(Side::Left, a), regular_action(Side::Right, b));
            &l * &r == &r * &l
        })
    });
    Ok(vec![
        Check::new("associativity", assoc, "216 triples"),
        Check::new("identity", ident, "e·g = g·e = g"),
        Check::new("inverses", inv, "g·g⁻¹ = e"),
        Check::new("latin square", latin, "each row a permutation"),
        Check::within("irreps are homomorphisms", hom, 1e-12),
        Check::within("character orthogonality", orth, 1e-12),
        Check::new("class equation", class_eq, "|class|·|centralizer| = 6"),
        Check::new("quantum dimensions", dims == 36, format!("Σd² = {dims}")),
        Check::new("[L+, L-] = 0", commute, "all 36 pairs"),
    ])
}

// ------------------------------------------------------------ operators

fn random_configs(n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let total = ORDER.pow(n as u32);
    if total <= count {
        return (0..total).map(|i| crate::dense::config_of(i, n)).collect();
    }
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(0..ORDER)).collect()).collect()
}

fn random_state(lat: &Lattice, seed: u64) -> Result<SparseState> {
    let mut rng = rng_from_seed(seed);
    let q = lat.edge_qudits();
    let n = q.len();
    let terms: Vec<_> = (0..ORDER.pow(n as u32))
        .map(|i| {
            let cfg: Vec<Element> = crate::dense::config_of(i, n).into_iter().map(Element::from_index).collect();
            (cfg, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        })
        .collect();
    SparseState::from_terms(&q, terms)?.normalized().map(|x| x.1).ok_or_else(|| Error::Invalid("zero state".into()))
}

/// Configuration-level algebra of A_g(s) and B_e(p), plus dense idempotence and self-adjointness.
pub fn operator_algebra() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for name in ["braid-min", "fuse-min-reduced", "patch-2x1", "patch-3x3"] {
        let lat = Lattice::named(name)?;
        let ops = ConfigOps::for_lattice(&lat);
        let configs = random_configs(lat.edges().len(), 1500, 5);
        let verts: Vec<_> = lat.vertex_ids().collect();
        let mut comp = true;
        let mut vv = true;
        let mut ab = true;
        for cfg in &configs {
            for &v in &verts {
                for g in Element::ALL {
                    for h in Element::ALL {
                        let (mut a, mut b) = (cfg.clone(), cfg.clone());
                        ops.gauge(&mut a, h, v)?;
                        ops.gauge(&mut a, g, v)?;
                        ops.gauge(&mut b, g * h, v)?;
                        comp &= a == b;
                    }
                    for &u in verts.iter().filter(|&&u| u != v) {
                        let (mut a, mut b) = (cfg.clone(), cfg.clone());
                        ops.gauge(&mut a, g, v)?;
                        ops.gauge(&mut a, Element::T1, u)?;
                        ops.gauge(&mut b, Element::T1, u)?;
                        ops.gauge(&mut b, g, v)?;
                        vv &= a == b;
                    }
                    let mut moved = cfg.clone();
                    ops.gauge(&mut moved, g, v)?;
                    for f in lat.face_ids() {
                        let start = lat.face(f).start;
                        ab &= ops.flux(cfg, f, start)?.is_identity() == ops.flux(&moved, f, start)?.is_identity();
                    }
                }
            }
        }
        let n = configs.len();
        out.push(Check::new(format!("{name}: A_g A_h = A_gh"), comp, format!("{n} configurations")));
        out.push(Check::new(format!("{name}: [A_g(s), A_h(s')] = 0"), vv, format!("{n} configurations")));
        out.push(Check::new(format!("{name}: [A(s), B(p)] = 0"), ab, format!("{n} configurations")));
    }
    // dense A(s), B(p) on braid-min
    let lat = Lattice::named("braid-min")?;
    let ops = ConfigOps::for_lattice(&lat);
    let psi = DenseState::from_sparse(&random_state(&lat, 1)?)?;
    let phi = DenseState::from_sparse(&random_state(&lat, 2)?)?;
    let a_of = |d: &DenseState, v| {
        d.map_columns(|cfg| {
            Element::ALL
                .iter()
                .map(|&g| {
                    let mut c = cfg.to_vec();
                    ops.gauge(&mut c, g, v).expect("lattice edge");
                    (c, C64::new(1.0 / 6.0, 0.0))
                })
                .collect()
        })
    };
    let b_of = |d: &DenseState, f| {
        d.map_columns(|cfg| {
            if ops.flux(cfg, f, lat.face(f).start).expect("face vertex").is_identity() {
                vec![(cfg.to_vec(), ONE)]
            } else {
                vec![]
            }
        })
    };
    let diff = |a: &DenseState, b: &DenseState| -> f64 { a.amps().iter().zip(b.amps()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) };
    let mut idem = 0.0f64;
    let mut herm = 0.0f64;
    for v in lat.interior_vertices() {
        let once = a_of(&psi, v);
        idem = idem.max(diff(&once, &a_of(&once, v)));
        herm = herm.max((phi.inner(&once)? - a_of(&phi, v).inner(&psi)?).norm());
    }
    for f in lat.face_ids() {
        let once = b_of(&psi, f);
        idem = idem.max(diff(&once, &b_of(&once, f)));
        herm = herm.max((phi.inner(&once)? - b_of(&phi, f).inner(&psi)?).norm());
    }
    out.push(Check::within("braid-min: A(s), B(p) idempotent (dense)", idem, 1e-12));
    out.push(Check::within("braid-min: A(s), B(p) self-adjoint (dense)", herm, 1e-12));
    Ok(out)
}

/// Σ_{g1,g2} |g1⁻¹⟩|g1⁻¹⟩|g1g2⁻¹⟩|g2⟩|g2⟩ on edges 1..5 of braid-min.
pub fn braid_min_closed_form() -> Result<SparseState> {
    let lat = Lattice::named("braid-min")?;
    let mut terms = Vec::new();
    for g1 in Element::ALL {
        for g2 in Element::ALL {
            terms.push((vec![g1.inv(), g1.inv(), g1 * g2.inv(), g2, g2], C64::new(1.0 / 6.0, 0.0)));
        }
    }
    SparseState::from_terms(&lat.edge_qudits(), terms)
}

/// Compiled ground preparation against the closed form and the syndrome.
pub fn ground_preparation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let closed = braid_min_closed_form()?;
    let lat = Lattice::named("braid-min")?;
    for v in GroundVariant::ALL {
        let s = prepare_ground(&lat, v, Mode::Exact)?.final_state;
        out.push(Check::within(format!("braid-min ground ({v:?}) vs closed form"), 1.0 - s.fidelity(&closed)?, TOL));
    }
    for name in ["braid-min", "fuse-min", "braid-min-reduced", "fuse-min-reduced", "patch-2x2"] {
        let lat = Lattice::named(name)?;
        let s = prepare_ground(&lat, GroundVariant::PivotFourier, Mode::Exact)?.final_state;
        out.push(Check::within(format!("{name}: ground syndrome"), lat.site_syndrome(&s)?.max(), TOL));
        out.push(Check::within(format!("{name}: compiled vs projected ground"), max_diff(&s, &lat.ground_state()?)?, TOL));
    }
    Ok(out)
}

// -------------------------------------------------------------- ribbons

fn seg(lat: &Lattice, s: &str) -> Result<Segment> {
    let (kind, name) = s.split_at(2);
    let j = lat.edge_named(name)? as i32;
    match kind {
        "D " => Ok(Segment::Direct(j)),
        "D-" => Ok(Segment::Direct(-j)),
        "d " => Ok(Segment::Dual(j as u32)),
        _ => Err(Error::Parse(format!("bad segment `{s}`"))),
    }
}

/// Ribbon from site (`v`, `f`) with segments written as `D h1,1`, `D-h1,2` or `d v2,1`.
pub fn ribbon_from(lat: &Lattice, v: &str, f: &str, segs: &[&str]) -> Result<Ribbon> {
    let x = lat.site(v, f)?;
    Ribbon::new(lat, x, segs.iter().map(|s| seg(lat, s)).collect::<Result<_>>()?)
}

/// Sparse ribbon application against the dense gluing route for all 36 (h,g).
pub fn dense_vs_sparse_ribbons() -> Result<Vec<Check>> {
    let lat = Lattice::patch(2, 1)?;
    let r = Ribbon::new(&lat, lat.site("0,0", "f0,0")?, vec![Segment::Direct(1), Segment::Dual(6), Segment::Direct(2)])?;
    let s = random_state(&lat, 7)?;
    let d = DenseState::from_sparse(&s)?;
    let mut worst = 0.0f64;
    for h in Element::ALL {
        for g in Element::ALL {
            let sp = apply_ribbon(&s, h, g, &r)?;
            let de = dense_ribbon(&lat, &d, &r, &[(h, g, ONE)])?;
            let sd = DenseState::from_sparse(&sp.aligned_to(d.ids())?)?;
            let diff: f64 = sd.amps().iter().zip(de.amps()).map(|(a, b)| (a - b).norm_sqr()).sum();
            worst = worst.max(diff.sqrt());
        }
    }
    Ok(vec![Check::within("F^{h,g} sparse vs dense gluing (36 pairs)", worst, TOL)])
}

/// Dense commutators of F^{h,g} with every A(s), B(p) on a three-segment ribbon.
pub fn ribbon_commutators() -> Result<Vec<Check>> {
    let lat = Lattice::patch(2, 1)?;
    let r = Ribbon::new(&lat, lat.site("0,0", "f0,0")?, vec![Segment::Direct(1), Segment::Dual(6), Segment::Direct(2)])?;
    let tables = CommutatorTables::new(&lat, &r)?;
    let mut interior = 0.0f64;
    let mut end_nonzero = 0;
    for h in Element::ALL {
        for g in Element::ALL {
            let rep = tables.report(h, g);
            interior = interior.max(rep.max_interior());
            if rep.entries.iter().any(|e| e.at_end && e.norm > 1e-6) {
                end_nonzero += 1;
            }
        }
    }
    Ok(vec![
        Check::within("commutators vanish away from ribbon ends (36 pairs)", interior, TOL),
        Check::new("commutators nonzero at ribbon ends", end_nonzero > 0, format!("{end_nonzero} of 36 pairs")),
    ])
}

/// Six ribbon labels exercised by the creation checks.
pub fn creation_specs() -> Result<Vec<RibbonSuperposition>> {
    let alpha = [ONE, C64::new(0.0, 1.0), ONE, ONE, C64::new(0.5, 0.0), ONE];
    Ok(vec![
        RibbonSuperposition::magnetic(Element::T0, Element::T0)?,
        RibbonSuperposition::magnetic(Element::T0, Element::T2)?,
        RibbonSuperposition::magnetic(Element::CP, Element::CM)?,
        RibbonSuperposition::electric(Irrep::R1Minus, 0, 0)?,
        RibbonSuperposition::electric(Irrep::R2, 1, 0)?,
        RibbonSuperposition::dyonic(Element::T1, &alpha)?,
    ])
}

fn operator_state(lat: &Lattice, spec: &RibbonSuperposition, r: &Ribbon) -> Result<SparseState> {
    Ok(apply_superposed_ribbon(&lat.ground_state()?, spec, r)?.1)
}

/// Compiled creation and both moves against direct ribbon application, and path independence.
pub fn creation_and_moves() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let lat = Lattice::patch(4, 2)?;
    let gs = lat.ground_state()?;
    let r1 = ribbon_from(&lat, "1,1", "f1,1", &["D h1,1", "d v2,1"])?;
    let face_target = lat.site("3,1", "f2,1")?;
    let vertex_start = ribbon_from(&lat, "1,1", "f1,1", &["D h1,1", "d v2,1", "D h2,1"])?;
    let vertex_target = lat.site("3,1", "f3,1")?;
    for spec in creation_specs()? {
        let direct = operator_state(&lat, &spec, &r1)?;
        for variant in [CreateVariant::Ancilla, CreateVariant::Pivot] {
            let (c, _) = create_anyon(&lat, &gs, &r1, &spec, variant, Mode::Exact)?;
            out.push(Check::within(format!("create {} ({variant:?})", spec.label), 1.0 - c.final_state.fidelity(&direct)?, TOL));
        }
        let (c, h) = create_anyon(&lat, &gs, &r1, &spec, CreateVariant::Ancilla, Mode::Exact)?;
        let (m, h2) = move_shared_face(&lat, &c.final_state, &h, face_target, Mode::Exact)?;
        let target = operator_state(&lat, &spec, &h2.ribbon)?;
        out.push(Check::within(format!("move shared face {}", spec.label), 1.0 - m.final_state.fidelity(&target)?, TOL));
        let start = operator_state(&lat, &spec, &vertex_start)?;
        let handle = AnyonHandle { site: vertex_start.end(), anyon_type: None, label: spec.label, ribbon: vertex_start.clone() };
        let (m, h3) = move_shared_vertex(&lat, &start, &handle, vertex_target, Mode::Exact)?;
        let target = operator_state(&lat, &spec, &h3.ribbon)?;
        out.push(Check::within(format!("move shared vertex {}", spec.label), 1.0 - m.final_state.fidelity(&target)?, TOL));
    }
    out.extend(path_independence()?);
    Ok(out)
}

/// An electric charge moved to the same vertex along two different paths.
pub fn path_independence() -> Result<Vec<Check>> {
    let lat = Lattice::patch(3, 3)?;
    let gs = lat.ground_state()?;
    let r = ribbon_from(&lat, "0,1", "f0,1", &["D h0,1"])?;
    let spec = RibbonSuperposition::electric(Irrep::R2, 0, 1)?;
    let (c, h) = create_anyon(&lat, &gs, &r, &spec, CreateVariant::Pivot, Mode::Exact)?;
    let site = |v: &str| lat.site(v, "f1,1");
    let walk = |path: [&str; 2]| -> Result<(SparseState, Ribbon)> {
        let (mut state, mut handle) = (c.final_state.clone(), h.clone());
        for v in path {
            let (m, nh) = move_shared_face(&lat, &state, &handle, site(v)?, Mode::Exact)?;
            state = m.final_state;
            handle = nh;
        }
        Ok((state, handle.ribbon))
    };
    let (a, ra) = walk(["2,1", "2,2"])?;
    let (b, _) = walk(["1,2", "2,2"])?;
    let direct = operator_state(&lat, &spec, &ra)?;
    Ok(vec![
        Check::within("two move paths agree", 1.0 - a.fidelity(&b)?, TOL),
        Check::within("moved charge vs direct ribbon", 1.0 - a.fidelity(&direct)?, TOL),
    ])
}

// ------------------------------------------------------------- braiding

fn combination(lat: &Lattice, r: &Ribbon, irrep: Irrep, coeffs: impl Fn(usize) -> C64) -> Result<SparseState> {
    let parts = (0..irrep.dim())
        .map(|k| Ok((coeffs(k), operator_state(lat, &RibbonSuperposition::electric(irrep, 0, k)?, r)?)))
        .collect::<Result<Vec<_>>>()?;
    SparseState::linear_combination(&parts)
}

/// Flux labels conjugate under braiding; charge labels transform by the irrep.
pub fn braiding_relations() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let lat = Lattice::patch(3, 2)?;
    let r = ribbon_from(&lat, "1,1", "f1,1", &["D h1,1", "d v2,1"])?;
    let star = Ribbon::star_loop(&lat, r.start())?;
    let gs = lat.ground_state()?;
    let mut worst = 0.0f64;
    for mu in [Element::T0, Element::CP] {
        for nu2 in mu.class_tag().members() {
            let spec = RibbonSuperposition::magnetic(mu, nu2)?;
            let (c, _) = create_anyon(&lat, &gs, &r, &spec, CreateVariant::Pivot, Mode::Exact)?;
            for nu1 in Element::ALL {
                let out_state = braid(&lat, &c.final_state, &star, nu1, Mode::Exact)?.final_state;
                let target = operator_state(&lat, &RibbonSuperposition::magnetic(mu, nu1 * nu2 * nu1.inv())?, &r)?;
                worst = worst.max(1.0 - out_state.fidelity(&target)?);
            }
        }
    }
    out.push(Check::within("flux braiding conjugates labels (all ν)", worst, TOL));
    let lat = Lattice::named("braid-min")?;
    let r = Ribbon::named(&lat, "r01")?;
    let c = Ribbon::named(&lat, "loop0")?;
    for irrep in [Irrep::R1Minus, Irrep::R2] {
        let mut worst = 0.0f64;
        for eta in 0..irrep.dim() {
            let start = operator_state(&lat, &RibbonSuperposition::electric(irrep, 0, eta)?, &r)?;
            for g in Element::ALL {
                let braided = braid(&lat, &start, &c, g, Mode::Exact)?.final_state;
                let m = irrep_matrix(irrep, g);
                let target = combination(&lat, &r, irrep, |k| m[(k, eta)])?;
                worst = worst.max((target.inner(&braided)? - ONE).norm());
            }
        }
        out.push(Check::within(format!("charge braiding acts by {} (all ν)", irrep.name()), worst, TOL));
    }
    Ok(out)
}

/// The 4-qudit braiding demo in every scenario, with and without ground preparation.
pub fn braid_demo() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for ground in [false, true] {
        for (sc, expect) in [(Scenario::Braid, [0.0, 0.0, 1.0]), (Scenario::NoBraid, [0.0, 1.0, 0.0]), (Scenario::Ground, [1.0, 0.0, 0.0])] {
            let cfg = DemoConfig { scenario: sc, with_ground_prep: ground, shots: Shots::Exact, ..DemoConfig::new(Demo::Braid) };
            let rep = run_demo(&cfg)?;
            let err = (0..3).map(|k| (rep.probability(&format!("|{k}>")) - expect[k]).abs()).fold(0.0, f64::max);
            let label = format!("braid demo {sc} (ground prep {ground}) = {expect:?}");
            out.push(Check::within(label, err, TOL));
            out.push(Check::new(format!("braid demo {sc} uses 4 qudits"), rep.qudits == 4, format!("{} qudits", rep.qudits)));
        }
    }
    Ok(out)
}

/// Re and Im of the probe expectation from interference against the irrep matrices.
pub fn interferometry() -> Result<Vec<Check>> {
    let lat = Lattice::named("braid-min")?;
    let r = Ribbon::named(&lat, "r01")?;
    let c = Ribbon::named(&lat, "loop0")?;
    let mut out = Vec::new();
    for h in [Element::CP, Element::T0] {
        for eta in 0..2 {
            let st = operator_state(&lat, &RibbonSuperposition::electric(Irrep::R2, 0, eta)?, &r)?;
            let expect = irrep_matrix(Irrep::R2, h)[(eta, eta)];
            let re = interfere(&lat, &st, &c, h, Part::Real)?.estimate;
            let im = interfere(&lat, &st, &c, h, Part::Imaginary)?.estimate;
            out.push(Check::within(format!("interference Re probe {h} on |{eta}_R2>"), (re - expect.re).abs(), TOL));
            out.push(Check::within(format!("interference Im probe {h} on |{eta}_R2>"), (im - expect.im).abs(), TOL));
        }
    }
    Ok(out)
}

// --------------------------------------------------------------- fusion

/// Closed 12-segment ring around the centre vertex of a 2×2 patch.
pub fn patch_ring(lat: &Lattice) -> Result<Ribbon> {
    ribbon_from(
        lat,
        "0,0",
        "f0,0",
        &["D h0,0", "d v1,0", "D h1,0", "D v2,0", "d h1,1", "D v2,1", "D-h1,2", "d v1,1", "D-h0,2", "D-v0,1", "d h0,1", "D-v0,0"],
    )
}

/// Vacuum pairs fuse to the vacuum; independent charges match the dense projector.
pub fn fusion_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for ground in [false, true] {
        let cfg = |sc| DemoConfig { scenario: sc, with_ground_prep: ground, shots: Shots::Exact, ..DemoConfig::new(Demo::Fuse) };
        let pair = run_demo(&cfg(Scenario::VacuumPair))?;
        let p = pair.vacuum_probability.unwrap_or(0.0);
        out.push(Check::within(format!("|I_R2> fuses to vacuum (ground prep {ground})"), (p - 1.0).abs(), TOL));
        let ind = run_demo(&cfg(Scenario::Independent))?;
        let (p, o) = (ind.vacuum_probability.unwrap_or(f64::NAN), ind.oracle_vacuum_probability.unwrap_or(f64::NAN));
        out.push(Check::within(format!("two |0_R2> vacuum probability {p:.6} vs dense (ground prep {ground})"), (p - o).abs(), TOL));
        out.push(Check::new(format!("fuse demo uses 6 qudits (ground prep {ground})"), ind.qudits == 6 && pair.qudits == 6, format!("{} qudits", ind.qudits)));
    }
    let lat = Lattice::patch(2, 2)?;
    let gs = lat.ground_state()?;
    let pair = ribbon_from(&lat, "1,1", "f0,1", &["d h0,1"])?;
    let (res, _, _) = create_vacuum_pair(&lat, &gs, PairKind::Magnetic(ClassTag::C), &pair, Mode::Exact)?;
    let target = operator_state(&lat, &RibbonSuperposition::magnetic_pair(ClassTag::C), &pair)?;
    out.push(Check::within("|I_[c]> compiled vs ribbon", 1.0 - res.final_state.fidelity(&target)?, TOL));
    let ring = patch_ring(&lat)?;
    let f = fusion_measure(&lat, &res.final_state, &ring)?;
    out.push(Check::within("|I_[c]> fuses to vacuum", (f.vacuum_probability - 1.0).abs(), TOL));
    let single = operator_state(&lat, &RibbonSuperposition::magnetic(Element::CP, Element::CP)?, &pair)?;
    let f1 = fusion_measure(&lat, &single, &ring)?;
    let (p1, _) = closed_ribbon_vacuum_projector(&single, &ring)?;
    out.push(Check::within("fusion readout vs vacuum projector (single label)", (f1.vacuum_probability - p1).abs(), TOL));
    Ok(out)
}

/// Sampled-vs-exact agreement of a demo within `sigmas` binomial standard deviations.
pub fn sampled_agreement(demo: Demo, scenario: Scenario, shots: u64, seed: u64, sigmas: f64) -> Result<Check> {
    let base = DemoConfig { scenario, with_ground_prep: true, seed, ..DemoConfig::new(demo) };
    let exact = run_demo(&base)?;
    let sampled = run_demo(&DemoConfig { shots: Shots::Count(shots), ..base })?;
    let mut worst = 0.0f64;
    for (k, p) in &exact.outcome_distribution {
        let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
        worst = worst.max((sampled.probability(k) - p).abs() / sigma);
    }
    Ok(Check::new(format!("{scenario} sampled vs exact"), worst <= sigmas, format!("max deviation {worst:.2}σ of {sigmas}σ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_suite_passes() {
        let rep = run_suite(Suite::Group).unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{c}");
        }
        assert_eq!(rep.checks.len(), 12 + 12 + 9);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }
}
