//! Dense reference simulator over at most eight qudits, with its own implementation of
//! gauge transformations, face fluxes and ribbon operators. Used as an oracle for the
//! sparse register and the protocol compiler.

use crate::error::{Error, Result};
use crate::lattice::{FaceId, Lattice, SiteRef, VertexId};
use crate::linalg::{Matrix, C64, ZERO};
use crate::register::{QuditId, SparseState};
use crate::ribbon::{Ribbon, Segment};
use crate::s3::{Element, ORDER};
use serde::Serialize;

pub const MAX_DENSE_QUDITS: usize = 8;

/// Amplitudes indexed by Σ_i d_i 6^i over an ordered qudit list.
#[derive(Clone, Debug)]
pub struct DenseState {
    ids: Vec<QuditId>,
    amps: Vec<C64>,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUDITS {
        return Err(Error::TooLarge(format!("{n} qudits exceed the dense limit of {MAX_DENSE_QUDITS}")));
    }
    Ok(())
}

/// Digits of a dense index.
pub fn config_of(mut i: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for d in out.iter_mut() {
        *d = i % ORDER;
        i /= ORDER;
    }
    out
}

/// Dense index of digits.
pub fn index_of(cfg: &[usize]) -> usize {
    cfg.iter().rev().fold(0, |acc, &d| acc * ORDER + d)
}

impl DenseState {
    pub fn zero(ids: Vec<QuditId>) -> Result<Self> {
        check_size(ids.len())?;
        let dim = ORDER.pow(ids.len() as u32);
        Ok(DenseState { ids, amps: vec![ZERO; dim] })
    }

    pub fn from_sparse(s: &SparseState) -> Result<Self> {
        let mut d = DenseState::zero(s.qudit_ids())?;
        for (cfg, a) in s.terms() {
            let digits: Vec<usize> = cfg.iter().map(|g| g.index()).collect();
            d.amps[index_of(&digits)] += a;
        }
        Ok(d)
    }

    pub fn ids(&self) -> &[QuditId] {
        &self.ids
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    fn pos(&self, q: QuditId) -> Result<usize> {
        self.ids.iter().position(|&x| x == q).ok_or(Error::UnknownQudit(q.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ over identical qudit orderings.
    pub fn inner(&self, other: &DenseState) -> Result<C64> {
        if self.ids != other.ids {
            return Err(Error::Invalid("dense states have different qudit orders".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩) against a sparse state over the same qudits.
    pub fn fidelity_with(&self, s: &SparseState) -> Result<f64> {
        let other = DenseState::from_sparse(&s.aligned_to(&self.ids)?)?;
        let ip = self.inner(&other)?;
        Ok(ip.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    /// Applies a column map |i⟩ ↦ Σ c|j⟩.
    pub fn map_columns(&self, f: impl Fn(&[usize]) -> Vec<(Vec<usize>, C64)>) -> DenseState {
        let n = self.ids.len();
        let mut out = vec![ZERO; self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (cfg, c) in f(&config_of(i, n)) {
                out[index_of(&cfg)] += a * c;
            }
        }
        DenseState { ids: self.ids.clone(), amps: out }
    }

    pub fn apply_single(&self, q: QuditId, m: &Matrix) -> Result<DenseState> {
        let p = self.pos(q)?;
        Ok(self.map_columns(|cfg| {
            (0..ORDER)
                .filter(|&r| m[(r, cfg[p])] != ZERO)
                .map(|r| {
                    let mut c = cfg.to_vec();
                    c[p] = r;
                    (c, m[(r, cfg[p])])
                })
                .collect()
        }))
    }

    /// Σ_c |c⟩⟨c| ⊗ family[c].
    pub fn apply_controlled(&self, control: QuditId, target: QuditId, family: &[Matrix]) -> Result<DenseState> {
        let (pc, pt) = (self.pos(control)?, self.pos(target)?);
        Ok(self.map_columns(|cfg| {
            let m = &family[cfg[pc]];
            (0..ORDER)
                .filter(|&r| m[(r, cfg[pt])] != ZERO)
                .map(|r| {
                    let mut c = cfg.to_vec();
                    c[pt] = r;
                    (c, m[(r, cfg[pt])])
                })
                .collect()
        }))
    }

    /// (I ⊗ |v⟩⟨v|)|ψ⟩ left unnormalized, with its probability relative to ⟨ψ|ψ⟩.
    pub fn project(&self, q: QuditId, v: &[C64]) -> Result<(f64, DenseState)> {
        let p = self.pos(q)?;
        let out = self.map_columns(|cfg| {
            (0..ORDER)
                .filter(|&r| v[r] != ZERO && v[cfg[p]] != ZERO)
                .map(|r| {
                    let mut c = cfg.to_vec();
                    c[p] = r;
                    (c, v[r] * v[cfg[p]].conj())
                })
                .collect()
        });
        Ok((out.norm_sqr() / self.norm_sqr(), out))
    }
}

/// Lattice operators evaluated on single configurations over an ordered list of edges.
pub struct ConfigOps<'a> {
    lat: &'a Lattice,
    edges: Vec<u32>,
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Direct { pos: usize, forward: bool },
    /// `head` when the crossing vertex is the head of the edge.
    Dual { pos: usize, head: bool },
}

/// Ribbon as a list of configuration steps.
#[derive(Clone, Debug)]
pub struct ConfigRibbon {
    steps: Vec<Step>,
}

impl<'a> ConfigOps<'a> {
    pub fn new(lat: &'a Lattice, edges: Vec<u32>) -> Self {
        ConfigOps { lat, edges }
    }

    /// Ops over all lattice edges in lattice order.
    pub fn for_lattice(lat: &'a Lattice) -> Self {
        ConfigOps { lat, edges: lat.edge_ids() }
    }

    fn pos(&self, edge: u32) -> Result<usize> {
        self.edges.iter().position(|&e| e == edge).ok_or(Error::UnknownQudit(edge))
    }

    /// A_k(v) on one configuration.
    pub fn gauge(&self, cfg: &mut [usize], k: Element, v: VertexId) -> Result<()> {
        for e in self.lat.edges() {
            let g = Element::from_index(cfg[self.pos(e.id)?]);
            let mut z = g;
            if e.head == v {
                z = k * z;
            }
            if e.tail == v {
                z = z * k.inv();
            }
            cfg[self.pos(e.id)?] = z.index();
        }
        Ok(())
    }

    /// Product around face `f` starting from vertex `v`.
    pub fn flux(&self, cfg: &[usize], f: FaceId, v: VertexId) -> Result<Element> {
        let face = self.lat.face(f);
        let mut cur = face.start;
        let mut seq = Vec::new();
        for &s in &face.walk {
            let e = self.lat.edge(s.unsigned_abs())?;
            let z = Element::from_index(cfg[self.pos(e.id)?]);
            seq.push((cur, if s > 0 { z.inv() } else { z }));
            cur = if s > 0 { e.head } else { e.tail };
        }
        let i = seq
            .iter()
            .position(|x| x.0 == v)
            .ok_or_else(|| Error::Lattice(format!("vertex `{}` is not on face `{}`", self.lat.vertex_name(v), face.name)))?;
        Ok(seq[i..].iter().chain(&seq[..i]).fold(Element::E, |p, x| p * x.1))
    }

    /// Rebuilds the step list from the segments and the start vertex.
    pub fn ribbon(&self, r: &Ribbon) -> Result<ConfigRibbon> {
        let mut v = r.start().vertex;
        let mut steps = Vec::new();
        for &seg in r.segments() {
            let e = self.lat.edge(seg.edge())?;
            match seg {
                Segment::Direct(x) => {
                    let forward = x > 0;
                    v = if forward { e.head } else { e.tail };
                    steps.push(Step::Direct { pos: self.pos(e.id)?, forward });
                }
                Segment::Dual(_) => steps.push(Step::Dual { pos: self.pos(e.id)?, head: e.head == v }),
            }
        }
        Ok(ConfigRibbon { steps })
    }
}

impl ConfigRibbon {
    /// F^{h,g} on one configuration, glued segment by segment from the ∂1 end:
    /// F^{h,g}(r s) = Σ_k F^{k⁻¹hk, k⁻¹g}(r) F^{h,k}(s). Returns false when annihilated.
    pub fn apply(&self, cfg: &mut [usize], h: Element, g: Element) -> bool {
        let (mut h, mut g) = (h, g);
        for step in self.steps.iter().rev() {
            match *step {
                Step::Direct { pos, forward } => {
                    let z = Element::from_index(cfg[pos]);
                    let k = if forward { z } else { z.inv() };
                    h = k.inv() * h * k;
                    g = k.inv() * g;
                }
                Step::Dual { pos, head } => {
                    let z = Element::from_index(cfg[pos]);
                    cfg[pos] = if head { h * z } else { z * h.inv() }.index();
                }
            }
        }
        g.is_identity()
    }
}

/// Σ α F^{h,g}(r) on a dense state whose qudits include the ribbon edges.
pub fn dense_ribbon(
    lat: &Lattice,
    state: &DenseState,
    r: &Ribbon,
    terms: &[(Element, Element, C64)],
) -> Result<DenseState> {
    let ops = ConfigOps::new(lat, state.ids.iter().map(|q| q.0).collect());
    let cr = ops.ribbon(r)?;
    Ok(state.map_columns(|cfg| {
        terms
            .iter()
            .filter_map(|&(h, g, a)| {
                let mut c = cfg.to_vec();
                cr.apply(&mut c, h, g).then_some((c, a))
            })
            .collect()
    }))
}

/// ⟨ψ|(1/6)Σ_g F^{g,e}(c)|ψ⟩ / ⟨ψ|ψ⟩ on the dense oracle.
pub fn closed_ribbon_expectation(lat: &Lattice, state: &SparseState, c: &Ribbon) -> Result<f64> {
    let d = DenseState::from_sparse(state)?;
    let terms: Vec<_> = Element::ALL.iter().map(|&g| (g, Element::E, C64::new(1.0 / 6.0, 0.0))).collect();
    let out = dense_ribbon(lat, &d, c, &terms)?;
    Ok(d.inner(&out)?.re / d.norm_sqr())
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorEntry {
    /// "A" for vertex projectors, "B" for face projectors.
    pub kind: &'static str,
    pub site: String,
    pub at_end: bool,
    /// Frobenius norm of the commutator.
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub h: Element,
    pub g: Element,
    pub entries: Vec<CommutatorEntry>,
}

impl CommutationReport {
    /// Largest commutator away from the ribbon ends.
    pub fn max_interior(&self) -> f64 {
        self.entries.iter().filter(|e| !e.at_end).map(|e| e.norm).fold(0.0, f64::max)
    }

    pub fn norm_at(&self, kind: &str, site: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.kind == kind && e.site == site).map(|e| e.norm)
    }
}

/// Precomputed index maps for commutator evaluation over all lattice configurations.
pub struct CommutatorTables<'a> {
    lat: &'a Lattice,
    ribbon: Ribbon,
    cr: ConfigRibbon,
    /// gauge[v][k][i] = index of A_k(v)|i⟩.
    gauge: Vec<Vec<Vec<u32>>>,
    /// face_ok[f][i] = flux of face f is trivial on |i⟩.
    face_ok: Vec<Vec<bool>>,
}

const NONE: u32 = u32::MAX;

impl<'a> CommutatorTables<'a> {
    pub fn new(lat: &'a Lattice, r: &Ribbon) -> Result<Self> {
        let n = lat.edges().len();
        check_size(n)?;
        let ops = ConfigOps::for_lattice(lat);
        let cr = ops.ribbon(r)?;
        let dim = ORDER.pow(n as u32);
        let mut gauge = Vec::new();
        for v in lat.vertex_ids() {
            let mut per_k = Vec::with_capacity(ORDER);
            for k in Element::ALL {
                let mut t = Vec::with_capacity(dim);
                for i in 0..dim {
                    let mut c = config_of(i, n);
                    ops.gauge(&mut c, k, v)?;
                    t.push(index_of(&c) as u32);
                }
                per_k.push(t);
            }
            gauge.push(per_k);
        }
        let mut face_ok = Vec::new();
        for f in lat.face_ids() {
            let start = lat.face(f).start;
            let t = (0..dim).map(|i| ops.flux(&config_of(i, n), f, start).map(|x| x.is_identity())).collect::<Result<_>>()?;
            face_ok.push(t);
        }
        Ok(CommutatorTables { lat, ribbon: r.clone(), cr, gauge, face_ok })
    }

    fn ribbon_map(&self, h: Element, g: Element) -> Vec<u32> {
        let n = self.lat.edges().len();
        (0..ORDER.pow(n as u32))
            .map(|i| {
                let mut c = config_of(i, n);
                if self.cr.apply(&mut c, h, g) {
                    index_of(&c) as u32
                } else {
                    NONE
                }
            })
            .collect()
    }

    /// ‖[F^{h,g}, A(v)]‖ and ‖[F^{h,g}, B(p)]‖ for every vertex and face.
    pub fn report(&self, h: Element, g: Element) -> CommutationReport {
        let fmap = self.ribbon_map(h, g);
        let ends = [self.ribbon.start(), self.ribbon.end()];
        let mut entries = Vec::new();
        let sixth = 1.0 / 6.0;
        for v in self.lat.vertex_ids() {
            let tables = &self.gauge[v.0];
            let mut total = 0.0;
            let mut acc: Vec<(u32, f64)> = Vec::with_capacity(2 * ORDER);
            for i in 0..fmap.len() {
                acc.clear();
                for t in tables {
                    let j = fmap[t[i] as usize];
                    if j != NONE {
                        acc.push((j, sixth));
                    }
                }
                let fi = fmap[i];
                if fi != NONE {
                    for t in tables {
                        acc.push((t[fi as usize], -sixth));
                    }
                }
                acc.sort_unstable_by_key(|x| x.0);
                let mut k = 0;
                while k < acc.len() {
                    let mut s = 0.0;
                    let idx = acc[k].0;
                    while k < acc.len() && acc[k].0 == idx {
                        s += acc[k].1;
                        k += 1;
                    }
                    total += s * s;
                }
            }
            entries.push(CommutatorEntry {
                kind: "A",
                site: self.lat.vertex_name(v).to_string(),
                at_end: ends.iter().any(|x| x.vertex == v),
                norm: total.sqrt(),
            });
        }
        for f in self.lat.face_ids() {
            let ok = &self.face_ok[f.0];
            let total = (0..fmap.len()).filter(|&i| fmap[i] != NONE && ok[i] != ok[fmap[i] as usize]).count();
            entries.push(CommutatorEntry {
                kind: "B",
                site: self.lat.face(f).name.clone(),
                at_end: ends.iter().any(|x: &SiteRef| x.face == f),
                norm: (total as f64).sqrt(),
            });
        }
        CommutationReport { h, g, entries }
    }
}

/// Commutators of F^{h,g}(r) with every vertex and face projector (≤ 8 edges).
pub fn ribbon_end_commutation_report(h: Element, g: Element, r: &Ribbon, lat: &Lattice) -> Result<CommutationReport> {
    Ok(CommutatorTables::new(lat, r)?.report(h, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dft, ONE};
    use crate::register::rng_from_seed;
    use crate::ribbon::apply_ribbon;
    use rand::Rng;

    fn random_state(lat: &Lattice, seed: u64) -> SparseState {
        let mut rng = rng_from_seed(seed);
        let q = lat.edge_qudits();
        let n = q.len();
        let terms = (0..ORDER.pow(n as u32)).map(|i| {
            let cfg: Vec<Element> = config_of(i, n).into_iter().map(Element::from_index).collect();
            (cfg, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        });
        SparseState::from_terms(&q, terms).unwrap().normalized().unwrap().1
    }

    #[test]
    fn index_round_trip() {
        for i in [0, 1, 5, 6, 215, 1000] {
            assert_eq!(index_of(&config_of(i, 4)), i);
        }
    }

    #[test]
    fn dense_ribbon_matches_sparse() {
        let lat = Lattice::patch(2, 1).unwrap();
        let a = lat.site("0,0", "f0,0").unwrap();
        let r = Ribbon::new(&lat, a, vec![Segment::Direct(1), Segment::Dual(6), Segment::Direct(2)]).unwrap();
        let s = random_state(&lat, 7);
        let d = DenseState::from_sparse(&s).unwrap();
        for h in Element::ALL {
            for g in Element::ALL {
                let sp = apply_ribbon(&s, h, g, &r).unwrap();
                let de = dense_ribbon(&lat, &d, &r, &[(h, g, ONE)]).unwrap();
                let sd = DenseState::from_sparse(&sp.aligned_to(d.ids()).unwrap()).unwrap();
                let diff: f64 = sd.amps().iter().zip(de.amps()).map(|(a, b)| (a - b).norm_sqr()).sum();
                assert!(diff < 1e-20, "h={h} g={g}");
            }
        }
    }

    #[test]
    fn dense_single_matches_sparse() {
        let lat = Lattice::patch(1, 1).unwrap();
        let s = random_state(&lat, 3);
        let d = DenseState::from_sparse(&s).unwrap();
        let m = dft(6);
        let a = s.apply_single(QuditId(2), &m).unwrap();
        let b = d.apply_single(QuditId(2), &m).unwrap();
        assert!((b.fidelity_with(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_ribbon_projector_is_idempotent() {
        let lat = Lattice::named("braid-min").unwrap();
        let c = Ribbon::named(&lat, "loop0").unwrap();
        let s = random_state(&lat, 11);
        let d = DenseState::from_sparse(&s).unwrap();
        let terms: Vec<_> = Element::ALL.iter().map(|&g| (g, Element::E, C64::new(1.0 / 6.0, 0.0))).collect();
        let once = dense_ribbon(&lat, &d, &c, &terms).unwrap();
        let twice = dense_ribbon(&lat, &once, &c, &terms).unwrap();
        let diff: f64 = once.amps().iter().zip(twice.amps()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff < 1e-20);
        // self-adjoint: ⟨φ|Pψ⟩ = ⟨Pφ|ψ⟩
        let d2 = DenseState::from_sparse(&random_state(&lat, 12)).unwrap();
        let p2 = dense_ribbon(&lat, &d2, &c, &terms).unwrap();
        assert!((d2.inner(&once).unwrap() - p2.inner(&d).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn commutators_vanish_away_from_ends() {
        let lat = Lattice::patch(1, 1).unwrap();
        let a = lat.site("0,0", "f0,0").unwrap();
        let r = Ribbon::new(&lat, a, vec![Segment::Direct(1)]).unwrap();
        let t = CommutatorTables::new(&lat, &r).unwrap();
        let rep = t.report(Element::E, Element::T0);
        assert!(rep.max_interior() < 1e-10);
        assert!(rep.norm_at("A", "1,0").unwrap() > 0.1);
    }
}
