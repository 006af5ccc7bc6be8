//! Sparse state vectors over 6-dimensional qudits.
//!
//! A basis configuration is packed into a `u128` in base 6: the qudit at position `i`
//! contributes `digit · 6^i`. This caps a register at 49 qudits.

use crate::error::{Error, Result};
use crate::linalg::{is_orthonormal, norm_sqr, vdot, Matrix, C64, ONE, ZERO};
use crate::s3::{Element, ORDER};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_QUDITS: usize = 49;

/// Amplitudes below this modulus are dropped after every operation.
pub const PRUNE: f64 = 1e-14;

/// Branches with smaller probability are treated as impossible.
pub const MIN_PROB: f64 = 1e-14;

const NORM_TOL: f64 = 1e-10;

const fn pow6_table() -> [u128; MAX_QUDITS + 1] {
    let mut t = [1u128; MAX_QUDITS + 1];
    let mut i = 1;
    while i <= MAX_QUDITS {
        t[i] = t[i - 1] * 6;
        i += 1;
    }
    t
}

pub(crate) const POW6: [u128; MAX_QUDITS + 1] = pow6_table();

#[inline]
pub(crate) fn digit(key: u128, pos: usize) -> usize {
    ((key / POW6[pos]) % 6) as usize
}

#[inline]
pub(crate) fn set_digit(key: u128, pos: usize, value: usize) -> u128 {
    let old = digit(key, pos) as u128;
    key - old * POW6[pos] + value as u128 * POW6[pos]
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct QuditId(pub u32);

impl fmt::Display for QuditId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Role {
    SystemEdge,
    VertexAncilla,
    FaceAncilla,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::SystemEdge => "edge",
            Role::VertexAncilla => "vertex",
            Role::FaceAncilla => "face",
        }
    }

    pub fn parse(s: &str) -> Result<Role> {
        match s {
            "edge" => Ok(Role::SystemEdge),
            "vertex" => Ok(Role::VertexAncilla),
            "face" => Ok(Role::FaceAncilla),
            _ => Err(Error::Parse(format!("unknown qudit role `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Qudit {
    pub id: QuditId,
    pub role: Role,
}

impl Qudit {
    pub fn edge(id: u32) -> Qudit {
        Qudit { id: QuditId(id), role: Role::SystemEdge }
    }

    pub fn ancilla(id: u32, role: Role) -> Qudit {
        Qudit { id: QuditId(id), role }
    }
}

/// Single-qudit vector with amplitude 1 on `g`.
pub fn basis_vector(g: Element) -> Vec<C64> {
    let mut v = vec![ZERO; ORDER];
    v[g.index()] = ONE;
    v
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthonormal measurement family on one qudit. The family may be incomplete as long as
/// it spans the populated subspace of the measured qudit.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<Vec<C64>>,
}

impl MeasurementBasis {
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        if vectors.is_empty() || vectors.len() > ORDER || vectors.iter().any(|v| v.len() != ORDER) {
            return Err(Error::Invalid("measurement basis needs 1..=6 vectors of length 6".into()));
        }
        if !is_orthonormal(&vectors, 1e-12) {
            return Err(Error::Invalid("degenerate measurement basis".into()));
        }
        Ok(MeasurementBasis { vectors })
    }

    pub fn group() -> Self {
        MeasurementBasis { vectors: Element::ALL.iter().map(|&g| basis_vector(g)).collect() }
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// A (generally normalized) superposition of group-basis configurations.
#[derive(Clone)]
pub struct SparseState {
    qudits: Vec<Qudit>,
    terms: FxHashMap<u128, C64>,
}

impl SparseState {
    /// Register with no qudits holding amplitude 1.
    pub fn empty() -> Self {
        let mut terms = FxHashMap::default();
        terms.insert(0, ONE);
        SparseState { qudits: Vec::new(), terms }
    }

    pub fn new_product_state(qudits: &[(Qudit, Vec<C64>)]) -> Result<Self> {
        let mut s = SparseState::empty();
        for (q, v) in qudits {
            s = s.add_qudit(*q, v)?;
        }
        Ok(s)
    }

    /// Product of group-basis states.
    pub fn basis_state(qudits: &[Qudit], values: &[Element]) -> Result<Self> {
        if qudits.len() != values.len() {
            return Err(Error::Invalid("one value per qudit required".into()));
        }
        let pairs: Vec<_> = qudits.iter().zip(values).map(|(q, &g)| (*q, basis_vector(g))).collect();
        Self::new_product_state(&pairs)
    }

    /// State with the given amplitudes, not normalized.
    pub fn from_terms(qudits: &[Qudit], terms: impl IntoIterator<Item = (Vec<Element>, C64)>) -> Result<Self> {
        let mut s = SparseState { qudits: qudits.to_vec(), terms: FxHashMap::default() };
        s.check_ids()?;
        for (cfg, a) in terms {
            if cfg.len() != qudits.len() {
                return Err(Error::Invalid("configuration length mismatch".into()));
            }
            let key = Self::pack(&cfg);
            *s.terms.entry(key).or_insert(ZERO) += a;
        }
        s.prune();
        Ok(s)
    }

    fn check_ids(&self) -> Result<()> {
        if self.qudits.len() > MAX_QUDITS {
            return Err(Error::TooLarge(format!("{} qudits (max {MAX_QUDITS})", self.qudits.len())));
        }
        for (i, a) in self.qudits.iter().enumerate() {
            if self.qudits[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::Invalid(format!("duplicate qudit {}", a.id)));
            }
        }
        Ok(())
    }

    fn pack(cfg: &[Element]) -> u128 {
        cfg.iter().enumerate().map(|(i, g)| g.index() as u128 * POW6[i]).sum()
    }

    pub fn unpack(&self, key: u128) -> Vec<Element> {
        (0..self.qudits.len()).map(|i| Element::from_index(digit(key, i))).collect()
    }

    pub(crate) fn from_raw(qudits: Vec<Qudit>, terms: FxHashMap<u128, C64>) -> Self {
        let mut s = SparseState { qudits, terms };
        s.prune();
        s
    }

    fn with_terms(&self, terms: FxHashMap<u128, C64>) -> Self {
        Self::from_raw(self.qudits.clone(), terms)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE);
    }

    pub fn qudits(&self) -> &[Qudit] {
        &self.qudits
    }

    pub fn qudit_ids(&self) -> Vec<QuditId> {
        self.qudits.iter().map(|q| q.id).collect()
    }

    pub fn num_qudits(&self) -> usize {
        self.qudits.len()
    }

    /// Number of stored basis terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, q: QuditId) -> bool {
        self.qudits.iter().any(|x| x.id == q)
    }

    pub fn position(&self, q: QuditId) -> Result<usize> {
        self.qudits.iter().position(|x| x.id == q).ok_or(Error::UnknownQudit(q.0))
    }

    pub(crate) fn raw_terms(&self) -> &FxHashMap<u128, C64> {
        &self.terms
    }

    /// Terms as (configuration, amplitude), sorted by configuration.
    pub fn terms(&self) -> Vec<(Vec<Element>, C64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(&k, &a)| (self.unpack(k), a)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn amplitude(&self, cfg: &[Element]) -> C64 {
        if cfg.len() != self.qudits.len() {
            return ZERO;
        }
        self.terms.get(&Self::pack(cfg)).copied().unwrap_or(ZERO)
    }

    /// Value of qudit `q` in a packed configuration.
    pub fn value_in(&self, key: u128, q: QuditId) -> Result<Element> {
        Ok(Element::from_index(digit(key, self.position(q)?)))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// (norm, normalized state); `None` for the zero vector.
    pub fn normalized(&self) -> Option<(f64, SparseState)> {
        let n = self.norm_sqr().sqrt();
        if n * n < MIN_PROB {
            return None;
        }
        Some((n, self.scaled(C64::new(1.0 / n, 0.0))))
    }

    pub fn scaled(&self, c: C64) -> SparseState {
        self.with_terms(self.terms.iter().map(|(&k, &a)| (k, a * c)).collect())
    }

    /// self + c·other on the same qudits.
    pub fn add_scaled(&self, other: &SparseState, c: C64) -> Result<SparseState> {
        let other = other.aligned_to(&self.qudit_ids())?;
        let mut terms = self.terms.clone();
        for (&k, &a) in &other.terms {
            *terms.entry(k).or_insert(ZERO) += c * a;
        }
        Ok(self.with_terms(terms))
    }

    /// Sum of c_i·s_i over states on the same qudits.
    pub fn linear_combination(parts: &[(C64, SparseState)]) -> Result<SparseState> {
        let (first, rest) = parts.split_first().ok_or_else(|| Error::Invalid("empty combination".into()))?;
        let mut acc = first.1.scaled(first.0);
        for (c, s) in rest {
            acc = acc.add_scaled(s, *c)?;
        }
        Ok(acc)
    }

    /// Applies an arbitrary 6×6 matrix to one qudit; no unitarity check.
    pub fn apply_local(&self, q: QuditId, m: &Matrix) -> Result<SparseState> {
        if m.rows() != ORDER || m.cols() != ORDER {
            return Err(Error::Invalid("single-qudit matrix must be 6x6".into()));
        }
        let pos = self.position(q)?;
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        out.reserve(self.terms.len());
        for (&k, &a) in &self.terms {
            let z = digit(k, pos);
            for r in 0..ORDER {
                let c = m[(r, z)];
                if c != ZERO {
                    *out.entry(set_digit(k, pos, r)).or_insert(ZERO) += a * c;
                }
            }
        }
        Ok(self.with_terms(out))
    }

    pub fn apply_single(&self, q: QuditId, u: &Matrix) -> Result<SparseState> {
        if !u.is_unitary(1e-12) {
            return Err(Error::NotUnitary(format!("single-qudit gate on {q}")));
        }
        self.apply_local(q, u)
    }

    /// Relabels qudit `q` by a group-valued map. The map must be a bijection for the
    /// result to be unitary.
    pub fn map_value(&self, q: QuditId, f: impl Fn(Element) -> Element) -> Result<SparseState> {
        let pos = self.position(q)?;
        let table: Vec<usize> = Element::ALL.iter().map(|&g| f(g).index()).collect();
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        out.reserve(self.terms.len());
        for (&k, &a) in &self.terms {
            *out.entry(set_digit(k, pos, table[digit(k, pos)])).or_insert(ZERO) += a;
        }
        Ok(self.with_terms(out))
    }

    /// Σ_g |g⟩⟨g|_control ⊗ family[g] on the target.
    pub fn apply_controlled(&self, control: QuditId, target: QuditId, family: &[Matrix]) -> Result<SparseState> {
        if control == target {
            return Err(Error::Invalid("control equals target".into()));
        }
        if family.len() != ORDER {
            return Err(Error::Invalid("controlled family needs one matrix per group element".into()));
        }
        if let Some(g) = family.iter().position(|m| m.rows() != ORDER || !m.is_unitary(1e-12)) {
            return Err(Error::NotUnitary(format!("family member {}", Element::from_index(g))));
        }
        let (pc, pt) = (self.position(control)?, self.position(target)?);
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        for (&k, &a) in &self.terms {
            let m = &family[digit(k, pc)];
            let z = digit(k, pt);
            for r in 0..ORDER {
                let c = m[(r, z)];
                if c != ZERO {
                    *out.entry(set_digit(k, pt, r)).or_insert(ZERO) += a * c;
                }
            }
        }
        Ok(self.with_terms(out))
    }

    /// Controlled relabeling: target value z becomes f(control value, z).
    pub fn map_value_controlled(
        &self,
        control: QuditId,
        target: QuditId,
        f: impl Fn(Element, Element) -> Element,
    ) -> Result<SparseState> {
        if control == target {
            return Err(Error::Invalid("control equals target".into()));
        }
        let (pc, pt) = (self.position(control)?, self.position(target)?);
        let mut table = [[0usize; ORDER]; ORDER];
        for c in Element::ALL {
            for z in Element::ALL {
                table[c.index()][z.index()] = f(c, z).index();
            }
        }
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        out.reserve(self.terms.len());
        for (&k, &a) in &self.terms {
            let v = table[digit(k, pc)][digit(k, pt)];
            *out.entry(set_digit(k, pt, v)).or_insert(ZERO) += a;
        }
        Ok(self.with_terms(out))
    }

    /// Keeps the terms satisfying `keep`; the result is not renormalized.
    pub fn filter(&self, keep: impl Fn(&[Element]) -> bool) -> SparseState {
        let terms = self.terms.iter().filter(|(&k, _)| keep(&self.unpack(k))).map(|(&k, &a)| (k, a)).collect();
        self.with_terms(terms)
    }

    /// Unnormalized projection of qudit `q` onto `v` (the component ⟨v|·⟩ re-embedded along v).
    fn project_raw(&self, q: QuditId, v: &[C64]) -> Result<SparseState> {
        let pos = self.position(q)?;
        let mut rest: FxHashMap<u128, C64> = FxHashMap::default();
        for (&k, &a) in &self.terms {
            let z = digit(k, pos);
            let c = v[z].conj();
            if c != ZERO {
                *rest.entry(set_digit(k, pos, 0)).or_insert(ZERO) += c * a;
            }
        }
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        for (&k, &a) in &rest {
            for (r, &vr) in v.iter().enumerate() {
                if vr != ZERO {
                    *out.entry(set_digit(k, pos, r)).or_insert(ZERO) += a * vr;
                }
            }
        }
        Ok(self.with_terms(out))
    }

    /// Projects qudit `q` onto the normalized vector `v`; returns the probability and the
    /// renormalized state.
    pub fn project(&self, q: QuditId, v: &[C64]) -> Result<(f64, SparseState)> {
        if v.len() != ORDER {
            return Err(Error::Invalid("projection vector must have length 6".into()));
        }
        let n = norm_sqr(v);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(n));
        }
        let raw = self.project_raw(q, v)?;
        let p = raw.norm_sqr() / self.norm_sqr();
        if p < MIN_PROB {
            return Err(Error::ImpossibleBranch(format!("projection of {q} has zero probability")));
        }
        let (_, s) = raw.normalized().expect("nonzero");
        Ok((p, s))
    }

    /// Every outcome with nonzero probability: (index, probability, collapsed state).
    pub fn measure_branches(&self, q: QuditId, basis: &MeasurementBasis) -> Result<Vec<(usize, f64, SparseState)>> {
        let total = self.norm_sqr();
        let mut out = Vec::new();
        let mut covered = 0.0;
        for (i, v) in basis.vectors().iter().enumerate() {
            let raw = self.project_raw(q, v)?;
            let p = raw.norm_sqr() / total;
            covered += p;
            if p >= MIN_PROB {
                let (_, s) = raw.normalized().expect("nonzero");
                out.push((i, p, s));
            }
        }
        if (covered - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "measurement basis on {q} covers probability {covered:.12}, not 1"
            )));
        }
        Ok(out)
    }

    /// Samples one outcome with Born probabilities.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        q: QuditId,
        basis: &MeasurementBasis,
        rng: &mut R,
    ) -> Result<(usize, f64, SparseState)> {
        let mut branches = self.measure_branches(q, basis)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let last = branches.len() - 1;
        for (n, b) in branches.iter().enumerate() {
            acc += b.1;
            if u < acc || n == last {
                return Ok(branches.swap_remove(n));
            }
        }
        unreachable!("branches are non-empty")
    }

    /// Reordered copy whose qudit order follows `ids`.
    pub fn aligned_to(&self, ids: &[QuditId]) -> Result<SparseState> {
        if ids.len() != self.qudits.len() {
            return Err(Error::Invalid("qudit sets differ".into()));
        }
        if self.qudit_ids() == ids {
            return Ok(self.clone());
        }
        let perm: Vec<usize> = ids.iter().map(|&q| self.position(q)).collect::<Result<_>>()?;
        let qudits: Vec<Qudit> = perm.iter().map(|&p| self.qudits[p]).collect();
        let terms = self
            .terms
            .iter()
            .map(|(&k, &a)| {
                let nk: u128 = perm.iter().enumerate().map(|(i, &p)| digit(k, p) as u128 * POW6[i]).sum();
                (nk, a)
            })
            .collect();
        Ok(SparseState { qudits, terms })
    }

    /// ⟨self|other⟩ over identical qudit sets (order may differ).
    pub fn inner(&self, other: &SparseState) -> Result<C64> {
        let other = other.aligned_to(&self.qudit_ids())?;
        let (small, large, flip) =
            if self.terms.len() <= other.terms.len() { (&self.terms, &other.terms, false) } else { (&other.terms, &self.terms, true) };
        let mut acc = ZERO;
        for (k, a) in small {
            if let Some(b) = large.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// |⟨a|b⟩|² / (‖a‖²‖b‖²)
    pub fn fidelity(&self, other: &SparseState) -> Result<f64> {
        let ip = self.inner(other)?;
        Ok(ip.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    /// Appends a qudit in the given normalized single-qudit state.
    pub fn add_qudit(&self, q: Qudit, v: &[C64]) -> Result<SparseState> {
        if v.len() != ORDER {
            return Err(Error::Invalid("qudit vector must have length 6".into()));
        }
        let n = norm_sqr(v);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        if self.contains(q.id) {
            return Err(Error::Invalid(format!("qudit {} already present", q.id)));
        }
        let pos = self.qudits.len();
        if pos >= MAX_QUDITS {
            return Err(Error::TooLarge(format!("cannot add qudit {}", q.id)));
        }
        let mut qudits = self.qudits.clone();
        qudits.push(q);
        let mut terms = FxHashMap::default();
        for (&k, &a) in &self.terms {
            for (r, &c) in v.iter().enumerate() {
                if c != ZERO {
                    terms.insert(k + r as u128 * POW6[pos], a * c);
                }
            }
        }
        Ok(Self::from_raw(qudits, terms))
    }

    /// Removes a qudit that is in a product state with the rest; returns its normalized
    /// single-qudit vector (phase fixed by its first nonzero entry) and the remainder.
    pub fn remove_qudit(&self, q: QuditId) -> Result<(Vec<C64>, SparseState)> {
        let pos = self.position(q)?;
        let mut groups: FxHashMap<u128, [C64; ORDER]> = FxHashMap::default();
        for (&k, &a) in &self.terms {
            let rest = set_digit(k, pos, 0);
            groups.entry(rest).or_insert([ZERO; ORDER])[digit(k, pos)] += a;
        }
        // Reference direction: the group with the largest weight.
        let reference = groups
            .values()
            .max_by(|a, b| norm_sqr(&a[..]).partial_cmp(&norm_sqr(&b[..])).expect("finite"))
            .ok_or_else(|| Error::Invalid("cannot release from the zero vector".into()))?;
        let mut u: Vec<C64> = reference.to_vec();
        let first = u.iter().copied().find(|x| x.norm() > 1e-12).expect("nonzero group");
        let phase = first / first.norm();
        let n = norm_sqr(&u).sqrt();
        for x in &mut u {
            *x /= phase * n;
        }
        let mut terms: FxHashMap<u128, C64> = FxHashMap::default();
        let mut residual = 0.0;
        for (&rest, w) in &groups {
            let c = vdot(&u, &w[..]);
            residual += w.iter().zip(&u).map(|(wi, ui)| (wi - c * ui).norm_sqr()).sum::<f64>();
            let low = rest % POW6[pos];
            let high = rest / POW6[pos + 1];
            terms.insert(low + high * POW6[pos], c);
        }
        if residual > 1e-20 + 1e-10 * self.norm_sqr() {
            return Err(Error::Entangled(q.0));
        }
        let mut qudits = self.qudits.clone();
        qudits.remove(pos);
        Ok((u, Self::from_raw(qudits, terms)))
    }

    pub fn relabel(&self, from: QuditId, to: QuditId) -> Result<SparseState> {
        let pos = self.position(from)?;
        if from != to && self.contains(to) {
            return Err(Error::Invalid(format!("qudit {to} already present")));
        }
        let mut s = self.clone();
        s.qudits[pos].id = to;
        Ok(s)
    }

    /// Canonical text dump: one line per term, `base6digits re im`, sorted by digits.
    /// Digit `i` of the string is the qudit at position `i`.
    pub fn dump(&self) -> String {
        let fmt_f = |x: f64| {
            let s = format!("{x:.12}");
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        };
        let mut lines: Vec<String> = self
            .terms
            .iter()
            .map(|(&k, a)| {
                let digits: String = (0..self.qudits.len()).map(|i| char::from(b'0' + digit(k, i) as u8)).collect();
                format!("{} {} {}", digits, fmt_f(a.re), fmt_f(a.im))
            })
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Marginal distribution of one qudit in the group basis.
    pub fn marginal(&self, q: QuditId) -> Result<[f64; ORDER]> {
        let pos = self.position(q)?;
        let mut p = [0.0; ORDER];
        for (&k, a) in &self.terms {
            p[digit(k, pos)] += a.norm_sqr();
        }
        let total = self.norm_sqr();
        for x in &mut p {
            *x /= total;
        }
        Ok(p)
    }
}

impl fmt::Debug for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.qudits.iter().map(|q| q.id.to_string()).collect();
        writeln!(f, "SparseState[{}] {} terms", ids.join(","), self.terms.len())?;
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dft;
    use crate::s3::{regular_action, Side};

    fn q(i: u32) -> Qudit {
        Qudit::edge(i)
    }

    #[test]
    fn product_state_term_counts() {
        let s = SparseState::basis_state(&[q(1), q(2)], &[Element::E, Element::E]).unwrap();
        assert_eq!(s.len(), 1);
        let u = vec![C64::new(1.0 / 6f64.sqrt(), 0.0); 6];
        let s = SparseState::new_product_state(&[(q(1), u), (q(2), basis_vector(Element::E))]).unwrap();
        assert_eq!(s.len(), 6);
        let w = crate::linalg::xi();
        let r = 1.0 / 3f64.sqrt();
        let mut v = vec![ZERO; 6];
        v[0] = C64::new(r, 0.0);
        v[4] = w * r;
        v[5] = w.conj() * r;
        let s = SparseState::new_product_state(&[(q(3), v)]).unwrap();
        assert_eq!(s.len(), 3);
        assert!(SparseState::new_product_state(&[(q(1), vec![ONE; 6])]).is_err());
    }

    #[test]
    fn single_gates() {
        let s = SparseState::basis_state(&[q(1)], &[Element::E]).unwrap();
        let t = s.apply_single(QuditId(1), &regular_action(Side::Left, Element::T0)).unwrap();
        assert_eq!(t.amplitude(&[Element::T0]), ONE);
        let f = s.apply_single(QuditId(1), &dft(6)).unwrap();
        for g in Element::ALL {
            assert!((f.amplitude(&[g]).re - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        }
        assert!(s.apply_single(QuditId(1), &Matrix::zeros(6, 6)).is_err());
        assert!(s.apply_single(QuditId(9), &Matrix::identity(6)).is_err());
    }

    #[test]
    fn controlled_copy() {
        let u = vec![C64::new(1.0 / 6f64.sqrt(), 0.0); 6];
        let s = SparseState::new_product_state(&[(q(1), u), (q(2), basis_vector(Element::E))]).unwrap();
        let fam: Vec<Matrix> = Element::ALL.iter().map(|&g| regular_action(Side::Left, g)).collect();
        let t = s.apply_controlled(QuditId(1), QuditId(2), &fam).unwrap();
        assert_eq!(t.len(), 6);
        for g in Element::ALL {
            assert!(t.amplitude(&[g, g]).norm() > 0.4);
        }
        assert!(s.apply_controlled(QuditId(1), QuditId(1), &fam).is_err());
    }

    #[test]
    fn measurement_and_projection() {
        let s = SparseState::basis_state(&[q(1)], &[Element::T1]).unwrap();
        let mut rng = rng_from_seed(7);
        let (k, p, _) = s.measure(QuditId(1), &MeasurementBasis::group(), &mut rng).unwrap();
        assert_eq!((k, p), (2, 1.0));
        let r = 1.0 / 2f64.sqrt();
        let mut v = vec![ZERO; 6];
        v[0] = C64::new(r, 0.0);
        v[1] = C64::new(r, 0.0);
        let s = SparseState::new_product_state(&[(q(1), v)]).unwrap();
        let (p, t) = s.project(QuditId(1), &basis_vector(Element::E)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(t.amplitude(&[Element::E]), ONE);
        assert!(matches!(
            s.project(QuditId(1), &basis_vector(Element::CP)),
            Err(Error::ImpossibleBranch(_))
        ));
        let br = s.measure_branches(QuditId(1), &MeasurementBasis::group()).unwrap();
        assert_eq!(br.len(), 2);
    }

    #[test]
    fn release_requires_product() {
        let u = vec![C64::new(1.0 / 6f64.sqrt(), 0.0); 6];
        let s = SparseState::new_product_state(&[(q(1), u.clone()), (q(2), u)]).unwrap();
        let (v, rest) = s.remove_qudit(QuditId(1)).unwrap();
        assert_eq!(rest.num_qudits(), 1);
        assert!((v[3].re - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!(rest.is_normalized());
        let fam: Vec<Matrix> = Element::ALL.iter().map(|&g| regular_action(Side::Left, g)).collect();
        let s = rest.add_qudit(q(3), &basis_vector(Element::E)).unwrap();
        let e = s.apply_controlled(QuditId(2), QuditId(3), &fam).unwrap();
        assert_eq!(e.remove_qudit(QuditId(3)).unwrap_err(), Error::Entangled(3));
    }

    #[test]
    fn dump_is_sorted() {
        let s = SparseState::from_terms(
            &[q(1), q(2)],
            vec![(vec![Element::CM, Element::E], ONE), (vec![Element::E, Element::T0], -ONE)],
        )
        .unwrap();
        assert_eq!(s.dump(), "01 -1.000000000000 0.000000000000\n50 1.000000000000 0.000000000000\n");
    }

    #[test]
    fn inner_ignores_order() {
        let a = SparseState::basis_state(&[q(1), q(2)], &[Element::T0, Element::CP]).unwrap();
        let b = SparseState::basis_state(&[q(2), q(1)], &[Element::CP, Element::T0]).unwrap();
        assert_eq!(a.inner(&b).unwrap(), ONE);
    }
}
