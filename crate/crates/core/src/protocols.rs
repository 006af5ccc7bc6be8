//! Compiles the lattice protocols into gate programs and executes them: ground-state
//! preparation, anyon creation, both movements, flux insertion along closed ribbons
//! (braiding), controlled braiding, fusion measurement, interferometry and vacuum pairs.

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteRef, VertexId};
use crate::linalg::{normalized, C64, ONE, ZERO};
use crate::program::{Basis, Builder, Executor, Family, Gate, GateCounts, GateProgram, Run, Vector};
use crate::register::{rng_from_seed, QuditId, Role, SparseState};
use crate::ribbon::{Label, Ribbon, RibbonSuperposition, Segment};
use crate::s3::{AnyonType, ClassTag, Element, Irrep, Side, ORDER};
use serde::Serialize;
use std::collections::BTreeMap;

/// Fidelity slack used when checking that feed-forward branches agree.
const BRANCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Follow every measurement branch.
    Exact,
    /// Follow one branch sampled with the given seed.
    Sampled(u64),
}

/// How a vertex projector is realized during ground-state preparation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroundVariant {
    /// Fourier on a pivot edge plus controlled gates onto the rest of the star.
    PivotFourier,
    /// Vertex ancilla controls the star, then is uncomputed from the pivot edge.
    AncillaUncompute,
    /// Vertex ancilla controls the star, then is measured and the phase corrected.
    AncillaMeasure,
}

impl GroundVariant {
    pub const ALL: [GroundVariant; 3] =
        [GroundVariant::PivotFourier, GroundVariant::AncillaUncompute, GroundVariant::AncillaMeasure];
}

/// How the superposition is loaded in anyon creation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CreateVariant {
    /// Vertex ancilla prepared in Σα|z⟩, measured in the Fourier basis of its support.
    Ancilla,
    /// Superposition prepared directly on the ribbon edge.
    Pivot,
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub final_state: SparseState,
    pub outcomes: BTreeMap<usize, usize>,
    pub success_probability: f64,
    pub gate_counts: GateCounts,
    pub program: GateProgram,
}

#[derive(Clone, Debug)]
pub struct AnyonHandle {
    pub site: SiteRef,
    pub anyon_type: Option<AnyonType>,
    pub label: Label,
    /// Ribbon from the partner end to this anyon.
    pub ribbon: Ribbon,
}

/// First qudit id above every edge and every qudit already in `state`.
pub fn first_free(lat: &Lattice, state: &SparseState) -> u32 {
    let e = lat.edge_ids().into_iter().max().unwrap_or(0);
    let s = state.qudit_ids().into_iter().map(|q| q.0).max().unwrap_or(0);
    e.max(s) + 1
}

/// Runs a program whose branches must all end in the same state.
pub fn run_deterministic(prog: GateProgram, state: SparseState, mode: Mode) -> Result<ProtocolResult> {
    match mode {
        Mode::Exact => {
            let runs = Executor::new().run_exact(&prog, state)?;
            let best = runs
                .iter()
                .max_by(|a, b| a.probability.total_cmp(&b.probability))
                .ok_or_else(|| Error::ImpossibleBranch("no branch survived".into()))?;
            for r in &runs {
                let f = best.state.fidelity(&r.state)?;
                if 1.0 - f > BRANCH_TOL {
                    return Err(Error::Program(format!("measurement branches disagree (fidelity {f:.12})")));
                }
            }
            let success = runs.iter().map(|r| r.probability).sum::<f64>().min(1.0);
            Ok(ProtocolResult {
                final_state: best.state.clone(),
                outcomes: best.outcomes.clone(),
                success_probability: success,
                gate_counts: best.counts,
                program: prog,
            })
        }
        Mode::Sampled(seed) => {
            let mut rng = rng_from_seed(seed);
            let run = Executor::new().run_sampled(&prog, state, &mut rng)?;
            Ok(ProtocolResult {
                final_state: run.state,
                outcomes: run.outcomes,
                success_probability: run.probability,
                gate_counts: run.counts,
                program: prog,
            })
        }
    }
}

/// L_g(j,v) as a single-qudit gate.
fn edge_gate(lat: &Lattice, g: Element, j: u32, v: VertexId) -> Result<Gate> {
    Ok(match lat.edge_side(j, v)? {
        Side::Left => Gate::Lplus(g),
        Side::Right => Gate::Lminus(g),
    })
}

fn is_tail(lat: &Lattice, j: u32, v: VertexId) -> Result<bool> {
    Ok(lat.edge_side(j, v)? == Side::Right)
}

/// A_x(v) as single-qudit gates on the star of `v`.
pub fn emit_gauge(lat: &Lattice, b: &mut Builder, x: Element, v: VertexId) -> Result<()> {
    if x.is_identity() {
        return Ok(());
    }
    for j in lat.star(v) {
        b.gate(lat.qudit(j), edge_gate(lat, x, j, v)?);
    }
    Ok(())
}

/// Controlled A_c(v) on the star of `v` (excluding `skip`) with control value c.
fn emit_controlled_gauge(lat: &Lattice, b: &mut Builder, control: QuditId, v: VertexId, skip: Option<u32>) -> Result<()> {
    for j in lat.star(v) {
        if Some(j) != skip {
            b.ctrl(control, lat.qudit(j), Family::edge(lat.edge_side(j, v)?, false));
        }
    }
    Ok(())
}

/// Given pivot edge `p` at `v` holding a value c, applies A_g(v) to the other star edges
/// where g is the group element that produced c from |e⟩.
fn emit_pivot_spread(lat: &Lattice, b: &mut Builder, p: u32, v: VertexId) -> Result<()> {
    let inverse = is_tail(lat, p, v)?;
    for j in lat.star(v) {
        if j != p {
            b.ctrl(lat.qudit(p), lat.qudit(j), Family::edge(lat.edge_side(j, v)?, inverse));
        }
    }
    Ok(())
}

/// Measures edge `j` in the group basis and gauges at `far` so that it ends in |e⟩.
fn emit_clear_edge(lat: &Lattice, b: &mut Builder, j: u32, far: VertexId) -> Result<()> {
    let tail = is_tail(lat, j, far)?;
    let m = b.measure(lat.qudit(j), Basis::Group);
    let mut err = None;
    b.cond(m, 1..ORDER, |k, sub| {
        let g = Element::from_index(k);
        let x = if tail { g } else { g.inv() };
        if let Err(e) = emit_gauge(lat, sub, x, far) {
            err = Some(e);
        }
    });
    err.map_or(Ok(()), Err)
}

/// Interior vertices with their pivot edges, farthest from the boundary first.
pub fn ground_schedule(lat: &Lattice) -> Result<Vec<(VertexId, u32)>> {
    let d = lat.boundary_distance();
    let mut verts = lat.interior_vertices();
    verts.sort_by_key(|v| (std::cmp::Reverse(d[v.0]), v.0));
    verts
        .into_iter()
        .map(|v| {
            let p = lat
                .star(v)
                .into_iter()
                .find(|&j| lat.neighbor(j, v).map(|u| d[u.0] < d[v.0]).unwrap_or(false))
                .ok_or_else(|| Error::Lattice(format!("vertex `{}` has no pivot edge", lat.vertex_name(v))))?;
            Ok((v, p))
        })
        .collect()
}

pub fn compile_ground(lat: &Lattice, b: &mut Builder, variant: GroundVariant) -> Result<()> {
    for (v, p) in ground_schedule(lat)? {
        b.comment(format!("A({}) pivot {p}", lat.vertex_name(v)));
        match variant {
            GroundVariant::PivotFourier => {
                b.gate(lat.qudit(p), Gate::Fourier);
                emit_pivot_spread(lat, b, p, v)?;
            }
            GroundVariant::AncillaUncompute => {
                let a = b.alloc(Role::VertexAncilla, Vector::uniform());
                emit_controlled_gauge(lat, b, a, v, None)?;
                let fam = if is_tail(lat, p, v)? { Family::LPLUS } else { Family::LPLUS_INV };
                b.ctrl(lat.qudit(p), a, fam);
                b.release(a);
            }
            GroundVariant::AncillaMeasure => {
                let a = b.alloc(Role::VertexAncilla, Vector::uniform());
                emit_controlled_gauge(lat, b, a, v, None)?;
                let m = b.measure(a, Basis::Fourier(Element::ALL.to_vec()));
                let tail = is_tail(lat, p, v)?;
                let zlist: Vec<Element> = Element::ALL.iter().map(|&g| if tail { g.inv() } else { g }).collect();
                b.cond(m, 1..ORDER, |k, sub| sub.gate(lat.qudit(p), Gate::Zk { zlist: zlist.clone(), k }));
                b.release(a);
            }
        }
    }
    Ok(())
}

/// Ground state from the fresh register.
pub fn prepare_ground(lat: &Lattice, variant: GroundVariant, mode: Mode) -> Result<ProtocolResult> {
    let state = lat.fresh_state();
    let mut b = Builder::new(first_free(lat, &state));
    compile_ground(lat, &mut b, variant)?;
    run_deterministic(b.finish(), state, mode)
}

fn anyon_type_of(label: Label) -> Option<AnyonType> {
    match label {
        Label::Magnetic { mu, .. } | Label::Flux { nu: mu } => Some(AnyonType::magnetic(mu.class_tag())),
        Label::Electric { irrep, .. } | Label::ElectricPair { irrep } => Some(AnyonType::electric(irrep)),
        Label::MagneticPair { class } => Some(AnyonType::magnetic(class)),
        Label::Vacuum => Some(AnyonType::vacuum()),
        Label::Dyonic { .. } => None,
    }
}

/// Checks the short-ribbon shape (one direct edge, trailing duals at its end) and returns
/// (direct edge, flux label μ, α over holonomy values).
fn creation_data(r: &Ribbon, spec: &RibbonSuperposition) -> Result<(u32, Element, Vec<C64>)> {
    if r.directs().len() != 1 || r.duals().iter().any(|d| d.after != 1) {
        return Err(Error::Ribbon("creation needs one direct edge followed only by dual edges".into()));
    }
    let mu = spec.terms.first().map(|t| t.0).unwrap_or(Element::E);
    if spec.terms.iter().any(|t| t.0 != mu) {
        return Err(Error::Invalid("creation needs a single flux label μ".into()));
    }
    let alpha: Vec<C64> = Element::ALL.iter().map(|&z| spec.coefficient(mu, z)).collect();
    let alpha = normalized(&alpha).ok_or_else(|| Error::Invalid("empty superposition".into()))?;
    Ok((r.directs()[0].edge, mu, alpha))
}

/// Four-step creation of Σ_z α_z F^{μ,z}(r) on a ground-like region.
pub fn compile_create(lat: &Lattice, b: &mut Builder, r: &Ribbon, spec: &RibbonSuperposition, variant: CreateVariant) -> Result<()> {
    let (j, mu, alpha) = creation_data(r, spec)?;
    let s1 = r.directs()[0].to;
    let tail = is_tail(lat, j, s1)?;
    b.comment(format!("create on edge {j} at {}", lat.vertex_name(s1)));
    emit_clear_edge(lat, b, j, s1)?;
    match variant {
        CreateVariant::Ancilla => {
            let a = b.alloc(Role::VertexAncilla, Vector::Custom(alpha.clone()));
            emit_controlled_gauge(lat, b, a, s1, None)?;
            let support: Vec<Element> = Element::ALL.iter().filter(|z| alpha[z.index()] != ZERO).copied().collect();
            let m = b.measure(a, Basis::Fourier(support.clone()));
            let zlist: Vec<Element> = support.iter().map(|&z| if tail { z.inv() } else { z }).collect();
            b.cond(m, 1..support.len(), |k, sub| sub.gate(lat.qudit(j), Gate::Zk { zlist: zlist.clone(), k }));
            b.release(a);
        }
        CreateVariant::Pivot => {
            let mut v = vec![ZERO; ORDER];
            for z in Element::ALL {
                v[if tail { z.inv() } else { z }.index()] = alpha[z.index()];
            }
            b.gate(lat.qudit(j), Gate::Prep(Vector::Custom(v)));
            emit_pivot_spread(lat, b, j, s1)?;
        }
    }
    if !mu.is_identity() {
        for d in r.duals() {
            b.gate(lat.qudit(d.edge), edge_gate(lat, mu, d.edge, d.vertex)?);
        }
    }
    Ok(())
}

pub fn create_anyon(
    lat: &Lattice,
    state: &SparseState,
    r: &Ribbon,
    spec: &RibbonSuperposition,
    variant: CreateVariant,
    mode: Mode,
) -> Result<(ProtocolResult, AnyonHandle)> {
    let mut b = Builder::new(first_free(lat, state));
    compile_create(lat, &mut b, r, spec, variant)?;
    let res = run_deterministic(b.finish(), state.clone(), mode)?;
    let handle = AnyonHandle { site: r.end(), anyon_type: anyon_type_of(spec.label), label: spec.label, ribbon: r.clone() };
    Ok((res, handle))
}

fn edge_between(lat: &Lattice, a: VertexId, b: VertexId) -> Result<u32> {
    lat.star(a)
        .into_iter()
        .find(|&j| lat.neighbor(j, a).map(|u| u == b).unwrap_or(false))
        .ok_or_else(|| Error::Lattice(format!("no edge between `{}` and `{}`", lat.vertex_name(a), lat.vertex_name(b))))
}

/// Moves the excitation at `from` to the neighbouring vertex of `to` along their shared edge.
pub fn compile_move_shared_face(lat: &Lattice, b: &mut Builder, from: SiteRef, to: SiteRef) -> Result<Segment> {
    let (s1, s2) = (from.vertex, to.vertex);
    if !lat.is_interior(s2) {
        return Err(Error::Lattice(format!("target vertex `{}` is not interior", lat.vertex_name(s2))));
    }
    let j = edge_between(lat, s1, s2)?;
    b.comment(format!("move {} -> {} over edge {j}", lat.vertex_name(s1), lat.vertex_name(s2)));
    emit_clear_edge(lat, b, j, s2)?;
    b.gate(lat.qudit(j), Gate::Fourier);
    emit_pivot_spread(lat, b, j, s1)?;
    let forward = lat.edge(j)?.tail == s1;
    Ok(Segment::Direct(if forward { j as i32 } else { -(j as i32) }))
}

/// Ribbon after a move: extended by `seg`, or shortened when the move retraces its last segment.
fn extend_handle(lat: &Lattice, h: &AnyonHandle, seg: Segment, to: SiteRef) -> Result<AnyonHandle> {
    let segs = h.ribbon.segments();
    let mut r = match segs.last() {
        Some(last) if last.edge() == seg.edge() && segs.len() > 1 => {
            Ribbon::new(lat, h.ribbon.start(), segs[..segs.len() - 1].to_vec())?
        }
        _ => h.ribbon.extended(lat, seg)?,
    };
    if r.duals().is_empty() {
        r = r.reanchored(to)?;
    } else if r.end() != to {
        return Err(Error::Ribbon("moved ribbon does not end at the target site".into()));
    }
    Ok(AnyonHandle { site: to, ribbon: r, ..h.clone() })
}

pub fn move_shared_face(
    lat: &Lattice,
    state: &SparseState,
    handle: &AnyonHandle,
    to: SiteRef,
    mode: Mode,
) -> Result<(ProtocolResult, AnyonHandle)> {
    let mut b = Builder::new(first_free(lat, state));
    let seg = compile_move_shared_face(lat, &mut b, handle.site, to)?;
    let res = run_deterministic(b.finish(), state.clone(), mode)?;
    Ok((res, extend_handle(lat, handle, seg, to)?))
}

/// Left-multiplies `target` by the face walk of `x`: the flux F (or F⁻¹ when `inverse`).
fn emit_flux_into(lat: &Lattice, b: &mut Builder, x: SiteRef, target: QuditId, inverse: bool) -> Result<()> {
    let walk = lat.walk(x)?;
    if inverse {
        for &y in &walk {
            b.ctrl(lat.qudit(y.unsigned_abs()), target, if y > 0 { Family::LPLUS } else { Family::LPLUS_INV });
        }
    } else {
        for &y in walk.iter().rev() {
            b.ctrl(lat.qudit(y.unsigned_abs()), target, if y > 0 { Family::LPLUS_INV } else { Family::LPLUS });
        }
    }
    Ok(())
}

/// Moves the excitation at `from` across the edge separating its face from the face of `to`
/// (same vertex), using a face ancilla that is relabelled instead of swapped.
pub fn compile_move_shared_vertex(lat: &Lattice, b: &mut Builder, from: SiteRef, to: SiteRef) -> Result<Segment> {
    if from.vertex != to.vertex {
        return Err(Error::Lattice("sites do not share a vertex".into()));
    }
    let s = from.vertex;
    let walk = lat.walk(from)?;
    let j = lat
        .star(s)
        .into_iter()
        .find(|&j| {
            let on_both = lat.faces_of_edge(j).contains(&from.face) && lat.faces_of_edge(j).contains(&to.face);
            let end = walk.first().map(|y| y.unsigned_abs()) == Some(j) || walk.last().map(|y| y.unsigned_abs()) == Some(j);
            on_both && end && lat.opposite_face(j, from.face).ok() == Some(to.face)
        })
        .ok_or_else(|| Error::Lattice("sites are not separated by a single edge".into()))?;
    let first = walk.first().map(|y| y.unsigned_abs()) == Some(j);
    b.comment(format!("move across edge {j} at {}", lat.vertex_name(s)));
    let p1 = b.alloc(Role::FaceAncilla, Vector::Group(Element::E));
    emit_flux_into(lat, b, from, p1, false)?;
    b.ctrl(p1, lat.qudit(j), Family::edge(lat.edge_side(j, s)?, first));
    let p2 = b.relabel(p1);
    emit_flux_into(lat, b, to, p2, true)?;
    b.release(p2);
    Ok(Segment::Dual(j))
}

pub fn move_shared_vertex(
    lat: &Lattice,
    state: &SparseState,
    handle: &AnyonHandle,
    to: SiteRef,
    mode: Mode,
) -> Result<(ProtocolResult, AnyonHandle)> {
    let mut b = Builder::new(first_free(lat, state));
    let seg = compile_move_shared_vertex(lat, &mut b, handle.site, to)?;
    let res = run_deterministic(b.finish(), state.clone(), mode)?;
    Ok((res, extend_handle(lat, handle, seg, to)?))
}

/// Σ_g F^{a,g}(c) with the flux label held in work qudit `a`; `a` is returned unchanged.
fn emit_flux_insertion(lat: &Lattice, b: &mut Builder, c: &Ribbon, a: QuditId) -> Result<()> {
    let dual_side = |seg: Segment| -> Result<Side> {
        let d = c.duals().iter().find(|d| d.edge == seg.edge()).expect("dual of this ribbon");
        Ok(d.side)
    };
    for &seg in c.segments().iter().rev() {
        match seg {
            Segment::Direct(x) => {
                b.ctrl(lat.qudit(x.unsigned_abs()), a, if x > 0 { Family::CONJ_INV } else { Family::CONJ })
            }
            Segment::Dual(j) => b.ctrl(a, lat.qudit(j), Family::edge(dual_side(seg)?, false)),
        }
    }
    for d in c.directs() {
        b.ctrl(lat.qudit(d.edge), a, if d.forward { Family::CONJ } else { Family::CONJ_INV });
    }
    Ok(())
}

fn require_closed(c: &Ribbon) -> Result<()> {
    if !c.is_closed() {
        return Err(Error::Ribbon("braiding and fusion need a closed ribbon".into()));
    }
    Ok(())
}

/// Flux insertion Σ_g F^{ν,g}(c) along a closed ribbon.
pub fn compile_braid(lat: &Lattice, b: &mut Builder, c: &Ribbon, nu: Element) -> Result<()> {
    require_closed(c)?;
    b.comment(format!("flux {nu} around closed ribbon"));
    if c.directs().is_empty() {
        if !nu.is_identity() {
            for d in c.duals() {
                b.gate(lat.qudit(d.edge), edge_gate(lat, nu, d.edge, d.vertex)?);
            }
        }
        return Ok(());
    }
    let a = b.alloc(Role::VertexAncilla, Vector::Group(nu));
    emit_flux_insertion(lat, b, c, a)?;
    b.gate(a, Gate::Lplus(nu.inv()));
    b.release(a);
    Ok(())
}

pub fn braid(lat: &Lattice, state: &SparseState, c: &Ribbon, nu: Element, mode: Mode) -> Result<ProtocolResult> {
    let mut b = Builder::new(first_free(lat, state));
    compile_braid(lat, &mut b, c, nu)?;
    run_deterministic(b.finish(), state.clone(), mode)
}

/// Flux insertion controlled by the group value of `control`.
pub fn compile_controlled_braid(lat: &Lattice, b: &mut Builder, control: QuditId, c: &Ribbon) -> Result<()> {
    require_closed(c)?;
    b.comment(format!("flux controlled by {control} around closed ribbon"));
    if c.directs().is_empty() {
        for d in c.duals() {
            b.ctrl(control, lat.qudit(d.edge), Family::edge(d.side, false));
        }
        return Ok(());
    }
    let a = b.alloc(Role::VertexAncilla, Vector::Group(Element::E));
    b.ctrl(control, a, Family::LPLUS);
    emit_flux_insertion(lat, b, c, a)?;
    b.ctrl(control, a, Family::LPLUS_INV);
    b.release(a);
    Ok(())
}

pub fn controlled_braid(lat: &Lattice, state: &SparseState, control: QuditId, c: &Ribbon, mode: Mode) -> Result<ProtocolResult> {
    let mut b = Builder::new(first_free(lat, state));
    compile_controlled_braid(lat, &mut b, control, c)?;
    run_deterministic(b.finish(), state.clone(), mode)
}

/// Registers written by a fusion measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FusionRegisters {
    /// Group-basis readout of the holonomy (absent for ribbons without direct edges).
    pub holonomy: Option<usize>,
    /// Fourier readout of the flux ancilla.
    pub charge: usize,
}

impl FusionRegisters {
    pub fn is_vacuum(&self, run: &Run) -> bool {
        self.holonomy.is_none_or(|r| run.outcomes.get(&r) == Some(&0)) && run.outcomes.get(&self.charge) == Some(&0)
    }
}

/// Closed-ribbon vacuum test with a uniform flux ancilla read out in |k_[G]⟩.
pub fn compile_fusion(lat: &Lattice, b: &mut Builder, c: &Ribbon) -> Result<FusionRegisters> {
    require_closed(c)?;
    let holonomy = if c.directs().is_empty() {
        None
    } else {
        b.comment("holonomy of the closed ribbon");
        let h = b.alloc(Role::FaceAncilla, Vector::Group(Element::E));
        for d in c.directs() {
            b.ctrl(lat.qudit(d.edge), h, if d.forward { Family::LPLUS } else { Family::LPLUS_INV });
        }
        let m = b.measure(h, Basis::Group);
        b.release(h);
        Some(m)
    };
    let p0 = b.alloc(Role::FaceAncilla, Vector::Group(Element::E));
    b.gate(p0, Gate::Fourier);
    compile_controlled_braid(lat, b, p0, c)?;
    let charge = b.measure(p0, Basis::Fourier(Element::ALL.to_vec()));
    b.release(p0);
    Ok(FusionRegisters { holonomy, charge })
}

#[derive(Clone, Debug, Serialize)]
pub struct FusionResult {
    pub vacuum_probability: f64,
    pub excitation_probability: f64,
    /// Probability of each Fourier readout k.
    pub charge_distribution: [f64; ORDER],
    #[serde(skip)]
    pub program: GateProgram,
    #[serde(skip)]
    pub vacuum_state: Option<SparseState>,
}

pub fn fusion_measure(lat: &Lattice, state: &SparseState, c: &Ribbon) -> Result<FusionResult> {
    let mut b = Builder::new(first_free(lat, state));
    let regs = compile_fusion(lat, &mut b, c)?;
    let prog = b.finish();
    let runs = Executor::new().run_exact(&prog, state.clone())?;
    let mut charge = [0.0; ORDER];
    let mut vac = 0.0;
    let mut vacuum_state = None;
    for r in &runs {
        if regs.is_vacuum(r) {
            vac += r.probability;
            vacuum_state = Some(r.state.clone());
        }
        if regs.holonomy.is_none_or(|h| r.outcomes.get(&h) == Some(&0)) {
            charge[r.outcomes[&regs.charge]] += r.probability;
        }
    }
    Ok(FusionResult { vacuum_probability: vac, excitation_probability: 1.0 - vac, charge_distribution: charge, program: prog, vacuum_state })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    Real,
    Imaginary,
}

#[derive(Clone, Debug, Serialize)]
pub struct Interference {
    pub p_plus: f64,
    pub p_minus: f64,
    /// P(+1) − P(−1).
    pub estimate: f64,
}

/// Probe ancilla basis: m=+1 first, m=−1 second.
pub fn interference_basis(h: Element, part: Part) -> Vec<Vec<C64>> {
    let s = 1.0 / 2f64.sqrt();
    let phase = match part {
        Part::Real => ONE,
        Part::Imaginary => C64::new(0.0, 1.0),
    };
    let mut plus = vec![ZERO; ORDER];
    let mut minus = vec![ZERO; ORDER];
    plus[0] = C64::new(s, 0.0);
    minus[0] = C64::new(s, 0.0);
    plus[h.index()] = phase * s;
    minus[h.index()] = -phase * s;
    vec![plus, minus]
}

/// Controlled flux insertion with the ancilla in (|e⟩+|h⟩)/√2; P(+1)−P(−1) gives the real or
/// imaginary part of ⟨ψ|Σ_g F^{h,g}(c)|ψ⟩.
pub fn compile_interfere(lat: &Lattice, b: &mut Builder, c: &Ribbon, h: Element, part: Part) -> Result<usize> {
    if h.is_identity() {
        return Err(Error::Invalid("interference needs h ≠ e".into()));
    }
    let mut v = vec![ZERO; ORDER];
    v[0] = ONE;
    v[h.index()] = ONE;
    let p1 = b.alloc(Role::VertexAncilla, Vector::custom(&v)?);
    compile_controlled_braid(lat, b, p1, c)?;
    let m = b.measure(p1, Basis::Custom(interference_basis(h, part)));
    b.release(p1);
    Ok(m)
}

pub fn interfere(lat: &Lattice, state: &SparseState, c: &Ribbon, h: Element, part: Part) -> Result<Interference> {
    let mut b = Builder::new(first_free(lat, state));
    let m = compile_interfere(lat, &mut b, c, h, part)?;
    let runs = Executor::new().run_exact(&b.finish(), state.clone())?;
    let p = |k: usize| runs.iter().filter(|r| r.outcomes[&m] == k).map(|r| r.probability).sum::<f64>();
    let (p_plus, p_minus) = (p(0), p(1));
    Ok(Interference { p_plus, p_minus, estimate: p_plus - p_minus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Electric(Irrep),
    Magnetic(ClassTag),
}

/// Vacuum-charge pair along `r`: electric pairs use the creation protocol with χ_R weights,
/// magnetic pairs need a single dual segment.
pub fn compile_vacuum_pair(lat: &Lattice, b: &mut Builder, kind: PairKind, r: &Ribbon, variant: CreateVariant) -> Result<()> {
    match kind {
        PairKind::Electric(irrep) => compile_create(lat, b, r, &RibbonSuperposition::electric_pair(irrep), variant),
        PairKind::Magnetic(class) => {
            if !r.directs().is_empty() || r.duals().len() != 1 {
                return Err(Error::Ribbon("magnetic pairs need a single dual segment".into()));
            }
            let d = r.duals()[0];
            b.comment(format!("magnetic {class} pair across edge {}", d.edge));
            let members = class.members();
            let a = b.alloc(Role::VertexAncilla, Vector::Fourier { zlist: members, k: 0 });
            b.ctrl(a, lat.qudit(d.edge), Family::edge(d.side, false));
            let (x, first) = lat
                .faces_of_edge(d.edge)
                .into_iter()
                .find_map(|f| {
                    let x = SiteRef { vertex: d.vertex, face: f };
                    let w = lat.walk(x).ok()?;
                    let j = d.edge;
                    if w.first().map(|y| y.unsigned_abs()) == Some(j) {
                        Some((x, true))
                    } else if w.last().map(|y| y.unsigned_abs()) == Some(j) {
                        Some((x, false))
                    } else {
                        None
                    }
                })
                .ok_or_else(|| Error::Lattice("no face starts or ends with the pair edge".into()))?;
            // flux at x is a when the edge leads the walk and a⁻¹ when it closes it
            emit_flux_into(lat, b, x, a, first)?;
            b.release(a);
            Ok(())
        }
    }
}

pub fn create_vacuum_pair(
    lat: &Lattice,
    state: &SparseState,
    kind: PairKind,
    r: &Ribbon,
    mode: Mode,
) -> Result<(ProtocolResult, AnyonHandle, AnyonHandle)> {
    let mut b = Builder::new(first_free(lat, state));
    compile_vacuum_pair(lat, &mut b, kind, r, CreateVariant::Ancilla)?;
    let res = run_deterministic(b.finish(), state.clone(), mode)?;
    let (label, ty) = match kind {
        PairKind::Electric(irrep) => (Label::ElectricPair { irrep }, AnyonType::electric(irrep)),
        PairKind::Magnetic(class) => (Label::MagneticPair { class }, AnyonType::magnetic(class)),
    };
    let end = AnyonHandle { site: r.end(), anyon_type: Some(ty), label, ribbon: r.clone() };
    let start = AnyonHandle { site: r.start(), ..end.clone() };
    Ok((res, start, end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::apply_superposed_ribbon;

    #[test]
    fn ground_variants_agree_with_projection() {
        for name in ["braid-min", "braid-min-reduced", "fuse-min-reduced", "patch-2x2"] {
            let lat = Lattice::named(name).unwrap();
            let target = lat.ground_state().unwrap();
            for v in GroundVariant::ALL {
                let res = prepare_ground(&lat, v, Mode::Exact).unwrap();
                assert!((res.success_probability - 1.0).abs() < 1e-10);
                assert!((res.final_state.fidelity(&target).unwrap() - 1.0).abs() < 1e-10, "{name} {v:?}");
                assert_eq!(res.final_state.num_qudits(), lat.edges().len());
            }
        }
    }

    #[test]
    fn creation_matches_ribbon() {
        let lat = Lattice::patch(4, 2).unwrap();
        let gs = lat.ground_state().unwrap();
        let x = lat.site("1,1", "f1,1").unwrap();
        let r = Ribbon::new(&lat, x, vec![Segment::Direct(lat.edge_named("h1,1").unwrap() as i32), Segment::Dual(lat.edge_named("v2,1").unwrap())]).unwrap();
        let specs = [
            RibbonSuperposition::magnetic(Element::T0, Element::T0).unwrap(),
            RibbonSuperposition::magnetic(Element::CP, Element::CM).unwrap(),
            RibbonSuperposition::electric(Irrep::R2, 0, 1).unwrap(),
        ];
        for spec in &specs {
            let (_, target) = apply_superposed_ribbon(&gs, spec, &r).unwrap();
            for v in [CreateVariant::Ancilla, CreateVariant::Pivot] {
                let (res, _) = create_anyon(&lat, &gs, &r, spec, v, Mode::Exact).unwrap();
                assert!((res.final_state.fidelity(&target).unwrap() - 1.0).abs() < 1e-10, "{:?} {v:?}", spec.label);
            }
        }
    }

    #[test]
    fn program_text_replays() {
        let lat = Lattice::named("braid-min-reduced").unwrap();
        let res = prepare_ground(&lat, GroundVariant::AncillaMeasure, Mode::Sampled(5)).unwrap();
        let text = res.program.to_text();
        let again = GateProgram::parse(&text).unwrap();
        let res2 = run_deterministic(again, lat.fresh_state(), Mode::Sampled(5)).unwrap();
        assert_eq!(res.final_state.terms(), res2.final_state.terms());
    }
}
