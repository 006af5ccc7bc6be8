//! Ribbons and the ribbon operators F^{(h,g)}.
//!
//! A ribbon is a list of segments from a start site ∂0 to an end site ∂1. A direct segment
//! walks an edge (signed: `+j` along its arrow, `-j` against it) and moves the current
//! vertex; a dual segment crosses an edge incident to the current vertex and moves the
//! current face to the other side.
//!
//! Write c_i for the group label of the i-th direct segment (z, or z⁻¹ when walked against
//! the arrow) and P = c_n⋯c_1. F^{(h,g)} keeps only configurations with P = g; a dual
//! segment preceded by i direct segments acts on its edge with L_k(j, v), where v is the
//! current vertex and k = Q⁻¹hQ with Q = c_n⋯c_{i+1} the product of the labels between the
//! dual segment and ∂1.

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteRef, VertexId};
use crate::linalg::{Matrix, C64, ONE, ZERO};
use crate::register::{digit, set_digit, SparseState};
use crate::s3::{act, character, irrep_matrix, ClassTag, Element, Irrep, Side};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RibbonSpec {
    pub name: String,
    pub start_site: String,
    pub end_site: String,
    pub segments: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Segment {
    /// Signed edge walked along (+) or against (-) its arrow.
    Direct(i32),
    /// Edge crossed at the current vertex.
    Dual(u32),
}

impl Segment {
    /// Parses `D+3`, `D-3` (direct) and `d6` (dual).
    pub fn parse(s: &str) -> Result<Segment> {
        let bad = || Error::Parse(format!("bad ribbon segment `{s}`"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('D') {
            let v: i32 = rest.trim_start_matches('+').parse().map_err(|_| bad())?;
            if v == 0 {
                return Err(bad());
            }
            Ok(Segment::Direct(v))
        } else if let Some(rest) = s.strip_prefix('d') {
            let v: u32 = rest.parse().map_err(|_| bad())?;
            if v == 0 {
                return Err(bad());
            }
            Ok(Segment::Dual(v))
        } else {
            Err(bad())
        }
    }

    pub fn edge(self) -> u32 {
        match self {
            Segment::Direct(x) => x.unsigned_abs(),
            Segment::Dual(j) => j,
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(self, Segment::Direct(_))
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Direct(x) if *x > 0 => write!(f, "D+{x}"),
            Segment::Direct(x) => write!(f, "D{x}"),
            Segment::Dual(j) => write!(f, "d{j}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DirectStep {
    pub edge: u32,
    /// Walked along the arrow.
    pub forward: bool,
    pub from: VertexId,
    pub to: VertexId,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DualStep {
    pub edge: u32,
    /// Vertex where the edge is crossed.
    pub vertex: VertexId,
    /// Side of L_k(j, vertex).
    pub side: Side,
    /// Number of direct steps before this one.
    pub after: usize,
}

/// A validated ribbon on a specific lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Ribbon {
    start: SiteRef,
    end: SiteRef,
    segments: Vec<Segment>,
    directs: Vec<DirectStep>,
    duals: Vec<DualStep>,
}

impl Ribbon {
    /// Validates `segments` from `start`. Pure-direct ribbons ignore faces and end on the
    /// start face when it contains the end vertex (else on the first face that does).
    pub fn new(lat: &Lattice, start: SiteRef, segments: Vec<Segment>) -> Result<Ribbon> {
        let bad = |m: String| Err(Error::Ribbon(m));
        let has_dual = segments.iter().any(|s| !s.is_direct());
        let (mut v, mut f) = (start.vertex, start.face);
        let mut used: Vec<u32> = Vec::new();
        let mut directs = Vec::new();
        let mut duals = Vec::new();
        for &seg in &segments {
            let j = seg.edge();
            let e = lat.edge(j).map_err(|e| Error::Ribbon(e.to_string()))?;
            if used.contains(&j) {
                return bad(format!("edge {j} used twice"));
            }
            used.push(j);
            let on_face = lat.faces_of_edge(j).contains(&f);
            match seg {
                Segment::Direct(x) => {
                    let (from, to) = if x > 0 { (e.tail, e.head) } else { (e.head, e.tail) };
                    if from != v {
                        return bad(format!("segment {seg} does not start at `{}`", lat.vertex_name(v)));
                    }
                    if has_dual && !on_face {
                        return bad(format!("segment {seg} leaves face `{}`", lat.face(f).name));
                    }
                    directs.push(DirectStep { edge: j, forward: x > 0, from, to });
                    v = to;
                }
                Segment::Dual(_) => {
                    let side = lat.edge_side(j, v).map_err(|_| {
                        Error::Ribbon(format!("segment {seg} is not incident to `{}`", lat.vertex_name(v)))
                    })?;
                    if !on_face {
                        return bad(format!("segment {seg} is not on face `{}`", lat.face(f).name));
                    }
                    f = lat.opposite_face(j, f).map_err(|e| Error::Ribbon(e.to_string()))?;
                    duals.push(DualStep { edge: j, vertex: v, side, after: directs.len() });
                }
            }
        }
        if !has_dual && !lat.face_vertices(f).contains(&v) {
            f = lat
                .face_ids()
                .find(|&g| lat.face_vertices(g).contains(&v))
                .ok_or_else(|| Error::Ribbon("end vertex is on no face".into()))?;
        }
        Ok(Ribbon { start, end: SiteRef { vertex: v, face: f }, segments, directs, duals })
    }

    /// Like [`Ribbon::new`] but requires the given end site.
    pub fn with_end(lat: &Lattice, start: SiteRef, end: SiteRef, segments: Vec<Segment>) -> Result<Ribbon> {
        let mut r = Ribbon::new(lat, start, segments)?;
        if r.end.vertex != end.vertex {
            return Err(Error::Ribbon(format!(
                "ribbon ends at `{}`, not `{}`",
                lat.vertex_name(r.end.vertex),
                lat.vertex_name(end.vertex)
            )));
        }
        if r.duals.is_empty() {
            if !lat.face_vertices(end.face).contains(&end.vertex) {
                return Err(Error::Ribbon("end site vertex is not on its face".into()));
            }
            r.end = end;
        } else if r.end.face != end.face {
            return Err(Error::Ribbon(format!(
                "ribbon ends on face `{}`, not `{}`",
                lat.face(r.end.face).name,
                lat.face(end.face).name
            )));
        }
        Ok(r)
    }

    pub fn from_spec(lat: &Lattice, spec: &RibbonSpec) -> Result<Ribbon> {
        let start = lat.site_named(&spec.start_site)?;
        let end = lat.site_named(&spec.end_site)?;
        let segs = spec.segments.iter().map(|s| Segment::parse(s)).collect::<Result<Vec<_>>>()?;
        Ribbon::with_end(lat, start, end, segs).map_err(|e| Error::Ribbon(format!("`{}`: {e}", spec.name)))
    }

    pub fn named(lat: &Lattice, name: &str) -> Result<Ribbon> {
        let spec = lat
            .ribbon_specs()
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::Ribbon(format!("unknown ribbon `{name}`")))?;
        Ribbon::from_spec(lat, spec)
    }

    /// Ribbon with one more segment at the ∂1 end.
    pub fn extended(&self, lat: &Lattice, seg: Segment) -> Result<Ribbon> {
        let mut segs = self.segments.clone();
        segs.push(seg);
        Ribbon::new(lat, self.start, segs)
    }

    /// Same segments, ending on a different face at the same vertex. Only pure-direct
    /// ribbons can be re-anchored.
    pub fn reanchored(&self, end: SiteRef) -> Result<Ribbon> {
        if !self.duals.is_empty() || end.vertex != self.end.vertex {
            return Err(Error::Ribbon("only pure-direct ribbons can change their end face".into()));
        }
        let mut r = self.clone();
        r.end = end;
        Ok(r)
    }

    /// Closed ribbon made of dual segments around `v`, crossing its star in the order
    /// given by the faces around it, starting from face `start.face`.
    pub fn star_loop(lat: &Lattice, start: SiteRef) -> Result<Ribbon> {
        let star = lat.star(start.vertex);
        let mut segs = Vec::new();
        let mut f = start.face;
        let mut left = star.clone();
        while !left.is_empty() {
            let next = left
                .iter()
                .position(|&j| lat.faces_of_edge(j).contains(&f))
                .ok_or_else(|| Error::Ribbon("star edges are not connected through faces".into()))?;
            let j = left.remove(next);
            segs.push(Segment::Dual(j));
            f = lat.opposite_face(j, f)?;
        }
        Ribbon::with_end(lat, start, start, segs)
    }

    pub fn start(&self) -> SiteRef {
        self.start
    }

    pub fn end(&self) -> SiteRef {
        self.end
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn directs(&self) -> &[DirectStep] {
        &self.directs
    }

    pub fn duals(&self) -> &[DualStep] {
        &self.duals
    }

    pub fn is_closed(&self) -> bool {
        !self.segments.is_empty() && self.start == self.end
    }

    pub fn edges(&self) -> Vec<u32> {
        self.segments.iter().map(|s| s.edge()).collect()
    }

    /// Segment list in spec notation.
    pub fn segment_strings(&self) -> Vec<String> {
        self.segments.iter().map(|s| s.to_string()).collect()
    }

    /// Direct labels c_1..c_n for a configuration given edge values.
    pub fn labels(&self, value: impl Fn(u32) -> Element) -> Vec<Element> {
        self.directs.iter().map(|d| if d.forward { value(d.edge) } else { value(d.edge).inv() }).collect()
    }

    /// P = c_n⋯c_1.
    pub fn holonomy(&self, value: impl Fn(u32) -> Element) -> Element {
        self.labels(value).into_iter().fold(Element::E, |p, c| c * p)
    }
}

/// Which superposition a ribbon operator realizes; carried on anyon handles.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum Label {
    /// |μ;ν⟩: local flux label μ, topological label ν ∈ [μ].
    Magnetic { mu: Element, nu: Element },
    /// |ξ;η⟩_R.
    Electric { irrep: Irrep, xi: usize, eta: usize },
    /// Σ_h α_h F^{μ,h}.
    Dyonic { mu: Element },
    /// Σ_g F^{ν,g}: pure flux insertion.
    Flux { nu: Element },
    /// Electric pair with total vacuum charge.
    ElectricPair { irrep: Irrep },
    /// Magnetic pair with total vacuum charge.
    MagneticPair { class: ClassTag },
    Vacuum,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Magnetic { mu, nu } => write!(f, "|{mu};{nu}>"),
            Label::Electric { irrep, xi, eta } => write!(f, "|{xi};{eta}>_{}", irrep.name()),
            Label::Dyonic { mu } => write!(f, "dyon[{mu}]"),
            Label::Flux { nu } => write!(f, "flux[{nu}]"),
            Label::ElectricPair { irrep } => write!(f, "|I_{}>", irrep.name()),
            Label::MagneticPair { class } => write!(f, "|I_[{class}]>"),
            Label::Vacuum => f.write_str("vacuum"),
        }
    }
}

/// Σ α F^{(h,g)} as a list of (h, g, α).
#[derive(Clone, PartialEq, Debug)]
pub struct RibbonSuperposition {
    pub label: Label,
    pub terms: Vec<(Element, Element, C64)>,
}

impl RibbonSuperposition {
    /// |μ;ν⟩ ∝ Σ_{z: z⁻¹μz=ν} F^{μ,z}.
    pub fn magnetic(mu: Element, nu: Element) -> Result<Self> {
        let terms: Vec<_> = Element::ALL.iter().filter(|&&z| mu.conj_by(z) == nu).map(|&z| (mu, z, ONE)).collect();
        if terms.is_empty() {
            return Err(Error::Invalid(format!("{nu} is not conjugate to {mu}")));
        }
        Ok(RibbonSuperposition { label: Label::Magnetic { mu, nu }, terms })
    }

    /// |ξ;η⟩_R ∝ Σ_g R(g)_{ξη} F^{e,g}.
    pub fn electric(irrep: Irrep, xi: usize, eta: usize) -> Result<Self> {
        if xi >= irrep.dim() || eta >= irrep.dim() {
            return Err(Error::Invalid(format!("index out of range for {irrep}")));
        }
        let terms =
            Element::ALL.iter().map(|&g| (Element::E, g, irrep_matrix(irrep, g)[(xi, eta)])).filter(|t| t.2 != ZERO).collect();
        Ok(RibbonSuperposition { label: Label::Electric { irrep, xi, eta }, terms })
    }

    /// Σ_h α_h F^{μ,h}.
    pub fn dyonic(mu: Element, alpha: &[C64]) -> Result<Self> {
        if alpha.len() != 6 || alpha.iter().all(|a| *a == ZERO) {
            return Err(Error::Invalid("dyonic superposition needs six coefficients, not all zero".into()));
        }
        let terms = Element::ALL.iter().zip(alpha).filter(|(_, a)| **a != ZERO).map(|(&h, &a)| (mu, h, a)).collect();
        Ok(RibbonSuperposition { label: Label::Dyonic { mu }, terms })
    }

    /// Σ_g F^{ν,g}.
    pub fn flux(nu: Element) -> Self {
        RibbonSuperposition { label: Label::Flux { nu }, terms: Element::ALL.iter().map(|&g| (nu, g, ONE)).collect() }
    }

    /// Σ_g χ_R(g) F^{e,g}: the pair Σ_η |η⟩|η⟩ with vacuum total charge.
    pub fn electric_pair(irrep: Irrep) -> Self {
        let terms =
            Element::ALL.iter().map(|&g| (Element::E, g, character(irrep, g))).filter(|t| t.2 != ZERO).collect();
        RibbonSuperposition { label: Label::ElectricPair { irrep }, terms }
    }

    /// Σ_{h∈C} Σ_g F^{h,g}: flux pair with vacuum total charge.
    pub fn magnetic_pair(class: ClassTag) -> Self {
        let mut terms = Vec::new();
        for h in class.members() {
            for g in Element::ALL {
                terms.push((h, g, ONE));
            }
        }
        RibbonSuperposition { label: Label::MagneticPair { class }, terms }
    }

    pub fn vacuum() -> Self {
        let mut s = Self::electric(Irrep::R1Plus, 0, 0).expect("valid");
        s.label = Label::Vacuum;
        s
    }

    /// Σ_{h,g} α_{h,g} F^{h,g} as (h → g-coefficients) for inspection.
    pub fn coefficient(&self, h: Element, g: Element) -> C64 {
        self.terms.iter().filter(|t| t.0 == h && t.1 == g).map(|t| t.2).sum()
    }
}

struct Resolved {
    directs: Vec<(usize, bool)>,
    duals: Vec<(usize, Side, usize)>,
}

fn resolve(r: &Ribbon, state: &SparseState) -> Result<Resolved> {
    let pos = |j: u32| state.position(crate::register::QuditId(j));
    Ok(Resolved {
        directs: r.directs.iter().map(|d| Ok((pos(d.edge)?, d.forward))).collect::<Result<_>>()?,
        duals: r.duals.iter().map(|d| Ok((pos(d.edge)?, d.side, d.after))).collect::<Result<_>>()?,
    })
}

/// Σ over (h, g, α) of α F^{(h,g)}(r)|ψ⟩, unnormalized.
fn apply_terms(state: &SparseState, r: &Ribbon, terms: &[(Element, Element, C64)]) -> Result<SparseState> {
    let res = resolve(r, state)?;
    let n = res.directs.len();
    let mut out: FxHashMap<u128, C64> = FxHashMap::default();
    let mut suffix = vec![Element::E; n + 1];
    for (&k, &a) in state.raw_terms() {
        for i in (0..n).rev() {
            let (p, fwd) = res.directs[i];
            let z = Element::from_index(digit(k, p));
            suffix[i] = suffix[i + 1] * if fwd { z } else { z.inv() };
        }
        let hol = suffix[0];
        for &(h, g, alpha) in terms {
            if hol != g {
                continue;
            }
            let mut key = k;
            for &(p, side, after) in &res.duals {
                let kk = h.conj_by(suffix[after]);
                let z = Element::from_index(digit(key, p));
                key = set_digit(key, p, act(side, kk, z).index());
            }
            *out.entry(key).or_insert(ZERO) += a * alpha;
        }
    }
    Ok(SparseState::from_raw(state.qudits().to_vec(), out))
}

/// F^{(h,g)}(r)|ψ⟩, unnormalized.
pub fn apply_ribbon(state: &SparseState, h: Element, g: Element, r: &Ribbon) -> Result<SparseState> {
    apply_terms(state, r, &[(h, g, ONE)])
}

/// Applies the superposition and renormalizes; returns (pre-normalization norm, state).
pub fn apply_superposed_ribbon(state: &SparseState, spec: &RibbonSuperposition, r: &Ribbon) -> Result<(f64, SparseState)> {
    let raw = apply_terms(state, r, &spec.terms)?;
    raw.normalized().ok_or_else(|| Error::ImpossibleBranch("ribbon superposition annihilates the state".into()))
}

/// (1/|G|)Σ_g F^{(g,e)}(c) for a closed ribbon: probability and normalized projection
/// (empty state when the probability vanishes).
pub fn closed_ribbon_vacuum_projector(state: &SparseState, c: &Ribbon) -> Result<(f64, SparseState)> {
    if !c.is_closed() {
        return Err(Error::Ribbon("vacuum projector needs a closed ribbon".into()));
    }
    let terms: Vec<_> = Element::ALL.iter().map(|&g| (g, Element::E, C64::new(1.0 / 6.0, 0.0))).collect();
    let raw = apply_terms(state, c, &terms)?;
    let p = raw.norm_sqr() / state.norm_sqr();
    Ok(match raw.normalized() {
        Some((_, s)) => (p, s),
        None => (0.0, raw),
    })
}

/// Matrix form of the dual action L_k(j,v) for inspection.
pub fn dual_action_matrix(side: Side, k: Element) -> Matrix {
    crate::s3::regular_action(side, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch21() -> (Lattice, Ribbon) {
        let lat = Lattice::patch(2, 1).unwrap();
        let a = lat.site("0,0", "f0,0").unwrap();
        let r = Ribbon::new(&lat, a, vec![Segment::Direct(1), Segment::Dual(6), Segment::Direct(2)]).unwrap();
        (lat, r)
    }

    #[test]
    fn parse_segments() {
        assert_eq!(Segment::parse("D+3").unwrap(), Segment::Direct(3));
        assert_eq!(Segment::parse("D-4").unwrap(), Segment::Direct(-4));
        assert_eq!(Segment::parse("d6").unwrap(), Segment::Dual(6));
        assert!(Segment::parse("x1").is_err());
        assert!(Segment::parse("D0").is_err());
    }

    #[test]
    fn validation() {
        let (lat, r) = patch21();
        assert_eq!(lat.vertex_name(r.end().vertex), "2,0");
        assert_eq!(lat.face(r.end().face).name, "f1,0");
        let a = lat.site("0,0", "f0,0").unwrap();
        assert!(Ribbon::new(&lat, a, vec![Segment::Direct(2)]).is_err());
        assert!(Ribbon::new(&lat, a, vec![Segment::Direct(1), Segment::Dual(1)]).is_err());
        // crossing the outer boundary is not allowed
        assert!(Ribbon::new(&lat, a, vec![Segment::Dual(5), Segment::Direct(1)]).is_err());
    }

    #[test]
    fn identity_sum() {
        let (lat, r) = patch21();
        let mut s = lat.fresh_state();
        for j in [1, 2, 6] {
            s = s.apply_local(crate::register::QuditId(j), &crate::linalg::dft(6)).unwrap();
        }
        let parts: Vec<_> =
            Element::ALL.iter().map(|&g| (ONE, apply_ribbon(&s, Element::E, g, &r).unwrap())).collect();
        let sum = SparseState::linear_combination(&parts).unwrap();
        assert!((sum.inner(&s).unwrap() - ONE).norm() < 1e-12);
    }

    #[test]
    fn three_segment_dual_actions() {
        // Two directs around a dual: the dual edge is multiplied by Q⁻¹hQ with Q = c_2.
        let (lat, r) = patch21();
        let cfg: Vec<Element> = lat.edge_ids().iter().map(|&j| match j {
            1 => Element::T0,
            2 => Element::CP,
            _ => Element::E,
        }).collect();
        let s = SparseState::basis_state(&lat.edge_qudits(), &cfg).unwrap();
        let g = Element::CP * Element::T0;
        let h = Element::T1;
        let out = apply_ribbon(&s, h, g, &r).unwrap();
        assert_eq!(out.len(), 1);
        let (cfg2, _) = out.terms().remove(0);
        // edge 6 is v1,0 with tail at the crossing vertex: z ↦ z k⁻¹
        let k = h.conj_by(Element::CP);
        let pos6 = lat.edge_ids().iter().position(|&j| j == 6).unwrap();
        assert_eq!(cfg2[pos6], k.inv());
        assert!(apply_ribbon(&s, h, Element::E, &r).unwrap().is_empty());
    }

    #[test]
    fn star_loop_is_gauge_transform() {
        let lat = Lattice::patch(2, 2).unwrap();
        let x = lat.site("1,1", "f1,1").unwrap();
        let c = Ribbon::star_loop(&lat, x).unwrap();
        assert!(c.is_closed());
        assert_eq!(c.duals().len(), 4);
        let s = lat.fresh_state().apply_local(crate::register::QuditId(1), &crate::linalg::dft(6)).unwrap();
        let s = lat.ground_state().unwrap().add_scaled(&s, ONE).unwrap();
        for h in Element::ALL {
            let a = apply_ribbon(&s, h, Element::E, &c).unwrap();
            let b = lat.gauge_transform(&s, h, x.vertex).unwrap();
            assert!(a.add_scaled(&b, -ONE).unwrap().norm_sqr() < 1e-20);
        }
    }

    #[test]
    fn named_ribbons_resolve() {
        let lat = Lattice::named("braid-min").unwrap();
        let r = Ribbon::named(&lat, "r01").unwrap();
        assert_eq!(r.directs().len(), 1);
        let c = Ribbon::named(&lat, "loop0").unwrap();
        assert!(c.is_closed());
        let red = lat.reduced().unwrap();
        assert_eq!(Ribbon::named(&red, "loop0").unwrap().duals().len(), 2);
    }
}
