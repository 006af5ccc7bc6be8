//! Gate programs: a small instruction set with measurement feed-forward, its canonical
//! text form, and sampling / exact-branching executors.
//!
//! Text form, one instruction per line:
//!
//! ```text
//! # comment
//! alloc q7 vertex F[e c+ c-]:0
//! gate q3 Lplus[t0]
//! ctrl q7 q3 Lminus[g]
//! measure q7 fourier[e c+ c-] -> m0
//! cond m0 {
//!   case 1 {
//!     gate q3 Zk[e c+ c-,1]
//!   }
//! }
//! project q3 e expect
//! release q7
//! relabel q8 q9
//! ```

use crate::error::{Error, Result};
use crate::linalg::{complete_basis, dft, normalized, omega, Matrix, C64, ONE, ZERO};
use crate::register::{basis_vector, MeasurementBasis, Qudit, QuditId, Role, SparseState, MIN_PROB};
use crate::s3::{act, regular_action, Element, Side, ORDER};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Group value fed into one side of a controlled multiplication.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    One,
    Ctrl,
    CtrlInv,
}

impl Slot {
    fn value(self, c: Element) -> Element {
        match self {
            Slot::One => Element::E,
            Slot::Ctrl => c,
            Slot::CtrlInv => c.inv(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Slot::One => "1",
            Slot::Ctrl => "g",
            Slot::CtrlInv => "g^-1",
        }
    }

    fn parse(s: &str) -> Result<Slot> {
        match s {
            "1" => Ok(Slot::One),
            "g" => Ok(Slot::Ctrl),
            "g^-1" => Ok(Slot::CtrlInv),
            _ => Err(Error::Parse(format!("bad family slot `{s}`"))),
        }
    }
}

/// Controlled family z ↦ l(g)·z·r(g), g the control value.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Family {
    pub left: Slot,
    pub right: Slot,
}

impl Family {
    /// L+^g
    pub const LPLUS: Family = Family { left: Slot::Ctrl, right: Slot::One };
    /// L+^{g⁻¹}
    pub const LPLUS_INV: Family = Family { left: Slot::CtrlInv, right: Slot::One };
    /// L-^g: z ↦ z g⁻¹
    pub const LMINUS: Family = Family { left: Slot::One, right: Slot::CtrlInv };
    /// L-^{g⁻¹}: z ↦ z g
    pub const LMINUS_INV: Family = Family { left: Slot::One, right: Slot::Ctrl };
    /// z ↦ g⁻¹ z g
    pub const CONJ_INV: Family = Family { left: Slot::CtrlInv, right: Slot::Ctrl };
    /// z ↦ g z g⁻¹
    pub const CONJ: Family = Family { left: Slot::Ctrl, right: Slot::CtrlInv };

    /// L_g(j,v) (or L_{g⁻¹}(j,v) when `inverse`) for an edge acted on from `side`.
    pub fn edge(side: Side, inverse: bool) -> Family {
        match (side, inverse) {
            (Side::Left, false) => Family::LPLUS,
            (Side::Left, true) => Family::LPLUS_INV,
            (Side::Right, false) => Family::LMINUS,
            (Side::Right, true) => Family::LMINUS_INV,
        }
    }

    /// Left multiplication by g (or g⁻¹).
    pub fn left_mul(inverse: bool) -> Family {
        Family::edge(Side::Left, inverse)
    }

    pub fn apply(self, c: Element, z: Element) -> Element {
        self.left.value(c) * z * self.right.value(c)
    }

    pub fn matrices(self) -> Vec<Matrix> {
        Element::ALL
            .iter()
            .map(|&c| {
                let perm: Vec<usize> = Element::ALL.iter().map(|&z| self.apply(c, z).index()).collect();
                Matrix::permutation(&perm)
            })
            .collect()
    }

    pub fn name(self) -> String {
        match (self.left, self.right) {
            (Slot::Ctrl, Slot::One) => "Lplus[g]".into(),
            (Slot::CtrlInv, Slot::One) => "Lplus[g^-1]".into(),
            (Slot::One, Slot::CtrlInv) => "Lminus[g]".into(),
            (Slot::One, Slot::Ctrl) => "Lminus[g^-1]".into(),
            (l, r) => format!("Act[{}|{}]", l.name(), r.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s {
            "Lplus[g]" => Ok(Family::LPLUS),
            "Lplus[g^-1]" => Ok(Family::LPLUS_INV),
            "Lminus[g]" => Ok(Family::LMINUS),
            "Lminus[g^-1]" => Ok(Family::LMINUS_INV),
            _ => {
                let inner = s
                    .strip_prefix("Act[")
                    .and_then(|x| x.strip_suffix(']'))
                    .and_then(|x| x.split_once('|'))
                    .ok_or_else(|| Error::Parse(format!("bad family `{s}`")))?;
                Ok(Family { left: Slot::parse(inner.0)?, right: Slot::parse(inner.1)? })
            }
        }
    }
}

fn fmt_zlist(z: &[Element]) -> String {
    z.iter().map(|g| g.name()).collect::<Vec<_>>().join(" ")
}

fn parse_zlist(s: &str) -> Result<Vec<Element>> {
    let z: Vec<Element> = s.split_whitespace().map(|x| x.parse()).collect::<Result<_>>()?;
    for (i, g) in z.iter().enumerate() {
        if z[..i].contains(g) {
            return Err(Error::Parse(format!("repeated element in z-list `{s}`")));
        }
    }
    if z.is_empty() {
        return Err(Error::Parse("empty z-list".into()));
    }
    Ok(z)
}

/// |k_[z]⟩ = Σ_j ω_m^{kj}|z_j⟩/√m.
pub fn fourier_vector(zlist: &[Element], k: usize) -> Vec<C64> {
    let m = zlist.len();
    let w = omega(m);
    let s = 1.0 / (m as f64).sqrt();
    let mut v = vec![ZERO; ORDER];
    for (j, z) in zlist.iter().enumerate() {
        v[z.index()] = w.powu((k * j % m) as u32) * s;
    }
    v
}

/// Z^k_[z] = Σ_j ω_m^{kj}|z_j⟩⟨z_j|, identity off the list.
pub fn zk_matrix(zlist: &[Element], k: usize) -> Matrix {
    let m = zlist.len();
    let w = omega(m);
    let mut d = vec![ONE; ORDER];
    for (j, z) in zlist.iter().enumerate() {
        d[z.index()] = w.powu((k * j % m) as u32);
    }
    Matrix::diag(&d)
}

fn fmt_c64(c: C64) -> String {
    format!("{:?}:{:?}", c.re, c.im)
}

fn parse_c64(s: &str) -> Result<C64> {
    let (a, b) = s.split_once(':').ok_or_else(|| Error::Parse(format!("bad complex `{s}`")))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{x}`")));
    Ok(C64::new(p(a)?, p(b)?))
}

/// Named single-qudit state.
#[derive(Clone, PartialEq, Debug)]
pub enum Vector {
    Group(Element),
    Fourier { zlist: Vec<Element>, k: usize },
    Custom(Vec<C64>),
}

impl Vector {
    pub fn uniform() -> Vector {
        Vector::Fourier { zlist: Element::ALL.to_vec(), k: 0 }
    }

    /// Normalized custom vector.
    pub fn custom(v: &[C64]) -> Result<Vector> {
        if v.len() != ORDER {
            return Err(Error::Invalid("vector must have length 6".into()));
        }
        Ok(Vector::Custom(normalized(v).ok_or_else(|| Error::Invalid("zero vector".into()))?))
    }

    pub fn amplitudes(&self) -> Vec<C64> {
        match self {
            Vector::Group(g) => basis_vector(*g),
            Vector::Fourier { zlist, k } => fourier_vector(zlist, *k),
            Vector::Custom(v) => v.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Vector::Group(g) => g.name().to_string(),
            Vector::Fourier { zlist, k } => format!("F[{}]:{k}", fmt_zlist(zlist)),
            Vector::Custom(v) => format!("v[{}]", v.iter().map(|c| fmt_c64(*c)).collect::<Vec<_>>().join(",")),
        }
    }

    pub fn parse(s: &str) -> Result<Vector> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("F[") {
            let (z, k) = rest.split_once("]:").ok_or_else(|| Error::Parse(format!("bad vector `{s}`")))?;
            let zlist = parse_zlist(z)?;
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad index in `{s}`")))?;
            if k >= zlist.len() {
                return Err(Error::Parse(format!("index out of range in `{s}`")));
            }
            Ok(Vector::Fourier { zlist, k })
        } else if let Some(rest) = s.strip_prefix("v[").and_then(|x| x.strip_suffix(']')) {
            let v: Vec<C64> = rest.split(',').map(parse_c64).collect::<Result<_>>()?;
            if v.len() != ORDER {
                return Err(Error::Parse(format!("vector `{s}` needs six entries")));
            }
            Ok(Vector::Custom(v))
        } else {
            Ok(Vector::Group(s.parse()?))
        }
    }
}

/// Measurement basis of one qudit; outcome i is the i-th vector.
#[derive(Clone, PartialEq, Debug)]
pub enum Basis {
    Group,
    /// |k_[z]⟩ for k < m, followed by the group vectors off the list.
    Fourier(Vec<Element>),
    Custom(Vec<Vec<C64>>),
}

impl Basis {
    pub fn vectors(&self) -> Vec<Vec<C64>> {
        match self {
            Basis::Group => Element::ALL.iter().map(|&g| basis_vector(g)).collect(),
            Basis::Fourier(z) => {
                let mut v: Vec<Vec<C64>> = (0..z.len()).map(|k| fourier_vector(z, k)).collect();
                v.extend(Element::ALL.iter().filter(|g| !z.contains(g)).map(|&g| basis_vector(g)));
                v
            }
            Basis::Custom(v) => v.clone(),
        }
    }

    pub fn measurement_basis(&self) -> Result<MeasurementBasis> {
        MeasurementBasis::new(self.vectors())
    }

    pub fn to_text(&self) -> String {
        match self {
            Basis::Group => "group".into(),
            Basis::Fourier(z) => format!("fourier[{}]", fmt_zlist(z)),
            Basis::Custom(vs) => format!(
                "custom{{{}}}",
                vs.iter().map(|v| Vector::Custom(v.clone()).to_text()).collect::<Vec<_>>().join(" ")
            ),
        }
    }

    pub fn parse(s: &str) -> Result<Basis> {
        let s = s.trim();
        if s == "group" {
            Ok(Basis::Group)
        } else if let Some(z) = s.strip_prefix("fourier[").and_then(|x| x.strip_suffix(']')) {
            Ok(Basis::Fourier(parse_zlist(z)?))
        } else if let Some(body) = s.strip_prefix("custom{").and_then(|x| x.strip_suffix('}')) {
            let vs = body
                .split_whitespace()
                .map(|v| match Vector::parse(v)? {
                    Vector::Custom(a) => Ok(a),
                    _ => Err(Error::Parse(format!("custom basis entry `{v}`"))),
                })
                .collect::<Result<_>>()?;
            Ok(Basis::Custom(vs))
        } else {
            Err(Error::Parse(format!("bad basis `{s}`")))
        }
    }
}

/// Named single-qudit unitary.
#[derive(Clone, PartialEq, Debug)]
pub enum Gate {
    Lplus(Element),
    Lminus(Element),
    /// F_{jk} = ω_6^{jk}/√6 in the group basis order.
    Fourier,
    FourierInv,
    Zk { zlist: Vec<Element>, k: usize },
    /// Unitary sending |e⟩ to the given state.
    Prep(Vector),
}

impl Gate {
    pub fn matrix(&self) -> Matrix {
        match self {
            Gate::Lplus(g) => regular_action(Side::Left, *g),
            Gate::Lminus(g) => regular_action(Side::Right, *g),
            Gate::Fourier => dft(ORDER),
            Gate::FourierInv => dft(ORDER).adjoint(),
            Gate::Zk { zlist, k } => zk_matrix(zlist, *k),
            Gate::Prep(v) => {
                let cols = complete_basis(&[v.amplitudes()], ORDER);
                Matrix::from_columns(&cols)
            }
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Gate::Lplus(g) => format!("Lplus[{g}]"),
            Gate::Lminus(g) => format!("Lminus[{g}]"),
            Gate::Fourier => "Fourier".into(),
            Gate::FourierInv => "FourierInv".into(),
            Gate::Zk { zlist, k } => format!("Zk[{},{k}]", fmt_zlist(zlist)),
            Gate::Prep(v) => format!("Prep[{}]", v.to_text()),
        }
    }

    pub fn parse(s: &str) -> Result<Gate> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad gate `{s}`"));
        if s == "Fourier" {
            return Ok(Gate::Fourier);
        }
        if s == "FourierInv" {
            return Ok(Gate::FourierInv);
        }
        let (head, rest) = s.split_once('[').ok_or_else(bad)?;
        let body = rest.strip_suffix(']').ok_or_else(bad)?;
        match head {
            "Lplus" => Ok(Gate::Lplus(body.parse()?)),
            "Lminus" => Ok(Gate::Lminus(body.parse()?)),
            "Zk" => {
                let (z, k) = body.rsplit_once(',').ok_or_else(bad)?;
                let zlist = parse_zlist(z)?;
                let k: usize = k.trim().parse().map_err(|_| bad())?;
                Ok(Gate::Zk { zlist, k })
            }
            "Prep" => Ok(Gate::Prep(Vector::parse(body)?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Instr {
    Comment(String),
    Alloc { q: QuditId, role: Role, init: Vector },
    Gate { q: QuditId, gate: Gate },
    Ctrl { control: QuditId, target: QuditId, family: Family },
    Measure { q: QuditId, basis: Basis, reg: usize },
    Conditional { reg: usize, branches: BTreeMap<usize, Vec<Instr>> },
    /// Post-selects `q` on `vector`. With `expect`, a zero-probability projection is an error.
    Project { q: QuditId, vector: Vector, expect: bool },
    /// Drops a qudit that is in a product state with the rest.
    Release { q: QuditId },
    /// Renames a qudit; free of cost.
    Relabel { from: QuditId, to: QuditId },
}

/// Executed-instruction tally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub single: usize,
    pub controlled: usize,
    pub measure: usize,
    pub conditional: usize,
    pub project: usize,
    pub alloc: usize,
    pub release: usize,
    pub relabel: usize,
}

impl GateCounts {
    pub fn total_gates(&self) -> usize {
        self.single + self.controlled
    }

    fn add(&mut self, o: &GateCounts) {
        self.single += o.single;
        self.controlled += o.controlled;
        self.measure += o.measure;
        self.conditional += o.conditional;
        self.project += o.project;
        self.alloc += o.alloc;
        self.release += o.release;
        self.relabel += o.relabel;
    }
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct GateProgram {
    pub instrs: Vec<Instr>,
}

fn parse_qudit(s: &str) -> Result<QuditId> {
    s.strip_prefix('q')
        .and_then(|x| x.parse().ok())
        .map(QuditId)
        .ok_or_else(|| Error::Parse(format!("bad qudit `{s}`")))
}

fn parse_reg(s: &str) -> Result<usize> {
    s.strip_prefix('m').and_then(|x| x.parse().ok()).ok_or_else(|| Error::Parse(format!("bad register `{s}`")))
}

impl GateProgram {
    pub fn new(instrs: Vec<Instr>) -> Self {
        GateProgram { instrs }
    }

    pub fn append(&mut self, other: GateProgram) {
        self.instrs.extend(other.instrs);
    }

    /// Instruction counts over the program text (every branch counted once).
    pub fn static_counts(&self) -> GateCounts {
        fn walk(instrs: &[Instr], c: &mut GateCounts) {
            for i in instrs {
                match i {
                    Instr::Comment(_) => {}
                    Instr::Alloc { .. } => c.alloc += 1,
                    Instr::Gate { .. } => c.single += 1,
                    Instr::Ctrl { .. } => c.controlled += 1,
                    Instr::Measure { .. } => c.measure += 1,
                    Instr::Conditional { branches, .. } => {
                        c.conditional += 1;
                        for b in branches.values() {
                            walk(b, c);
                        }
                    }
                    Instr::Project { .. } => c.project += 1,
                    Instr::Release { .. } => c.release += 1,
                    Instr::Relabel { .. } => c.relabel += 1,
                }
            }
        }
        let mut c = GateCounts::default();
        walk(&self.instrs, &mut c);
        c
    }

    pub fn to_text(&self) -> String {
        fn emit(out: &mut String, instrs: &[Instr], depth: usize) {
            let pad = "  ".repeat(depth);
            for i in instrs {
                let line = match i {
                    Instr::Comment(t) => format!("# {t}"),
                    Instr::Alloc { q, role, init } => format!("alloc {q} {} {}", role.name(), init.to_text()),
                    Instr::Gate { q, gate } => format!("gate {q} {}", gate.to_text()),
                    Instr::Ctrl { control, target, family } => format!("ctrl {control} {target} {}", family.name()),
                    Instr::Measure { q, basis, reg } => format!("measure {q} {} -> m{reg}", basis.to_text()),
                    Instr::Project { q, vector, expect } => {
                        format!("project {q} {}{}", vector.to_text(), if *expect { " expect" } else { "" })
                    }
                    Instr::Release { q } => format!("release {q}"),
                    Instr::Relabel { from, to } => format!("relabel {from} {to}"),
                    Instr::Conditional { reg, branches } => {
                        let _ = writeln!(out, "{pad}cond m{reg} {{");
                        for (v, body) in branches {
                            let _ = writeln!(out, "{pad}  case {v} {{");
                            emit(out, body, depth + 2);
                            let _ = writeln!(out, "{pad}  }}");
                        }
                        "}".to_string()
                    }
                };
                let _ = writeln!(out, "{pad}{line}");
            }
        }
        let mut out = String::new();
        emit(&mut out, &self.instrs, 0);
        out
    }

    pub fn parse(text: &str) -> Result<GateProgram> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let mut pos = 0;
        let instrs = Self::parse_block(&lines, &mut pos)?;
        if pos != lines.len() {
            return Err(Error::Parse(format!("unexpected `{}`", lines[pos])));
        }
        Ok(GateProgram { instrs })
    }

    fn parse_block(lines: &[&str], pos: &mut usize) -> Result<Vec<Instr>> {
        let mut out = Vec::new();
        while *pos < lines.len() {
            let line = lines[*pos];
            if line == "}" {
                return Ok(out);
            }
            *pos += 1;
            if let Some(t) = line.strip_prefix('#') {
                out.push(Instr::Comment(t.trim().to_string()));
                continue;
            }
            let bad = || Error::Parse(format!("bad instruction `{line}`"));
            let (op, rest) = line.split_once(' ').ok_or_else(bad)?;
            let instr = match op {
                "alloc" => {
                    let mut it = rest.splitn(3, ' ');
                    let q = parse_qudit(it.next().ok_or_else(bad)?)?;
                    let role = Role::parse(it.next().ok_or_else(bad)?)?;
                    let init = Vector::parse(it.next().ok_or_else(bad)?)?;
                    Instr::Alloc { q, role, init }
                }
                "gate" => {
                    let (q, g) = rest.split_once(' ').ok_or_else(bad)?;
                    Instr::Gate { q: parse_qudit(q)?, gate: Gate::parse(g)? }
                }
                "ctrl" => {
                    let mut it = rest.splitn(3, ' ');
                    let control = parse_qudit(it.next().ok_or_else(bad)?)?;
                    let target = parse_qudit(it.next().ok_or_else(bad)?)?;
                    let family = Family::parse(it.next().ok_or_else(bad)?)?;
                    Instr::Ctrl { control, target, family }
                }
                "measure" => {
                    let (head, reg) = rest.rsplit_once(" -> ").ok_or_else(bad)?;
                    let (q, basis) = head.split_once(' ').ok_or_else(bad)?;
                    Instr::Measure { q: parse_qudit(q)?, basis: Basis::parse(basis)?, reg: parse_reg(reg)? }
                }
                "project" => {
                    let (q, v) = rest.split_once(' ').ok_or_else(bad)?;
                    let (v, expect) = match v.strip_suffix(" expect") {
                        Some(x) => (x, true),
                        None => (v, false),
                    };
                    Instr::Project { q: parse_qudit(q)?, vector: Vector::parse(v)?, expect }
                }
                "release" => Instr::Release { q: parse_qudit(rest)? },
                "relabel" => {
                    let (a, b) = rest.split_once(' ').ok_or_else(bad)?;
                    Instr::Relabel { from: parse_qudit(a)?, to: parse_qudit(b)? }
                }
                "cond" => {
                    let reg = parse_reg(rest.strip_suffix(" {").ok_or_else(bad)?)?;
                    let mut branches = BTreeMap::new();
                    loop {
                        let l = *lines.get(*pos).ok_or_else(bad)?;
                        *pos += 1;
                        if l == "}" {
                            break;
                        }
                        let v: usize = l
                            .strip_prefix("case ")
                            .and_then(|x| x.strip_suffix(" {"))
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("bad case `{l}`")))?;
                        let body = Self::parse_block(lines, pos)?;
                        if lines.get(*pos) != Some(&"}") {
                            return Err(Error::Parse("unterminated case".into()));
                        }
                        *pos += 1;
                        branches.insert(v, body);
                    }
                    Instr::Conditional { reg, branches }
                }
                _ => return Err(bad()),
            };
            out.push(instr);
        }
        Ok(out)
    }
}

/// One execution path.
#[derive(Clone, Debug)]
pub struct Run {
    pub state: SparseState,
    /// Measurement register → outcome index.
    pub outcomes: BTreeMap<usize, usize>,
    /// Probability of this path (product of branch probabilities).
    pub probability: f64,
    pub counts: GateCounts,
}

impl Run {
    pub fn new(state: SparseState) -> Run {
        Run { state, outcomes: BTreeMap::new(), probability: 1.0, counts: GateCounts::default() }
    }
}

type Hook<'a> = Box<dyn Fn(&SparseState) -> Result<()> + 'a>;

/// Executes programs. An optional hook runs after every instruction.
#[derive(Default)]
pub struct Executor<'a> {
    hook: Option<Hook<'a>>,
}

enum Mode<'r, R: Rng + ?Sized> {
    Exact,
    Sample(&'r mut R),
}

impl<'a> Executor<'a> {
    pub fn new() -> Self {
        Executor { hook: None }
    }

    pub fn with_hook(hook: impl Fn(&SparseState) -> Result<()> + 'a) -> Self {
        Executor { hook: Some(Box::new(hook)) }
    }

    /// Follows one measurement path chosen with Born probabilities.
    pub fn run_sampled<R: Rng + ?Sized>(&self, prog: &GateProgram, state: SparseState, rng: &mut R) -> Result<Run> {
        let mut mode = Mode::Sample(rng);
        let mut runs = self.exec(&prog.instrs, vec![Run::new(state)], &mut mode)?;
        Ok(runs.remove(0))
    }

    /// Every measurement path with nonzero probability.
    pub fn run_exact(&self, prog: &GateProgram, state: SparseState) -> Result<Vec<Run>> {
        let mut mode: Mode<'_, rand_chacha::ChaCha8Rng> = Mode::Exact;
        self.exec(&prog.instrs, vec![Run::new(state)], &mut mode)
    }

    fn exec<R: Rng + ?Sized>(&self, instrs: &[Instr], mut runs: Vec<Run>, mode: &mut Mode<'_, R>) -> Result<Vec<Run>> {
        for instr in instrs {
            let mut next = Vec::with_capacity(runs.len());
            for run in runs {
                next.extend(self.step(instr, run, mode)?);
            }
            runs = next;
        }
        Ok(runs)
    }

    fn step<R: Rng + ?Sized>(&self, instr: &Instr, mut run: Run, mode: &mut Mode<'_, R>) -> Result<Vec<Run>> {
        let out = match instr {
            Instr::Comment(_) => vec![run],
            Instr::Alloc { q, role, init } => {
                run.state = run.state.add_qudit(Qudit::ancilla(q.0, *role), &init.amplitudes())?;
                run.counts.alloc += 1;
                vec![run]
            }
            Instr::Gate { q, gate } => {
                run.state = match gate {
                    Gate::Lplus(g) => run.state.map_value(*q, |z| act(Side::Left, *g, z))?,
                    Gate::Lminus(g) => run.state.map_value(*q, |z| act(Side::Right, *g, z))?,
                    _ => run.state.apply_single(*q, &gate.matrix())?,
                };
                run.counts.single += 1;
                vec![run]
            }
            Instr::Ctrl { control, target, family } => {
                let f = *family;
                run.state = run.state.map_value_controlled(*control, *target, move |c, z| f.apply(c, z))?;
                run.counts.controlled += 1;
                vec![run]
            }
            Instr::Measure { q, basis, reg } => {
                if run.outcomes.contains_key(reg) {
                    return Err(Error::Program(format!("register m{reg} written twice")));
                }
                let mb = basis.measurement_basis()?;
                run.counts.measure += 1;
                match mode {
                    Mode::Exact => run
                        .state
                        .measure_branches(*q, &mb)?
                        .into_iter()
                        .map(|(k, p, s)| {
                            let mut r = run.clone();
                            r.state = s;
                            r.probability *= p;
                            r.outcomes.insert(*reg, k);
                            r
                        })
                        .collect(),
                    Mode::Sample(rng) => {
                        let (k, p, s) = run.state.measure(*q, &mb, *rng)?;
                        run.state = s;
                        run.probability *= p;
                        run.outcomes.insert(*reg, k);
                        vec![run]
                    }
                }
            }
            Instr::Conditional { reg, branches } => {
                let v = *run
                    .outcomes
                    .get(reg)
                    .ok_or_else(|| Error::Program(format!("register m{reg} read before written")))?;
                run.counts.conditional += 1;
                match branches.get(&v) {
                    Some(body) => return self.exec(body, vec![run], mode),
                    None => vec![run],
                }
            }
            Instr::Project { q, vector, expect } => {
                run.counts.project += 1;
                match run.state.project(*q, &vector.amplitudes()) {
                    Ok((p, s)) => {
                        run.state = s;
                        run.probability *= p;
                        vec![run]
                    }
                    Err(Error::ImpossibleBranch(m)) if !*expect && matches!(mode, Mode::Exact) => {
                        log::debug!("dropping branch: {m}");
                        vec![]
                    }
                    Err(e) => return Err(e),
                }
            }
            Instr::Release { q } => {
                let (_, s) = run.state.remove_qudit(*q)?;
                run.state = s;
                run.counts.release += 1;
                vec![run]
            }
            Instr::Relabel { from, to } => {
                run.state = run.state.relabel(*from, *to)?;
                run.counts.relabel += 1;
                vec![run]
            }
        };
        if let Some(h) = &self.hook {
            for r in &out {
                h(&r.state)?;
            }
        }
        Ok(out.into_iter().filter(|r| r.probability >= MIN_PROB).collect())
    }
}

/// Accumulates instructions and hands out fresh qudit ids and registers.
#[derive(Debug)]
pub struct Builder {
    instrs: Vec<Instr>,
    next_qudit: u32,
    next_reg: usize,
}

impl Builder {
    /// Ancilla ids start at `first_free`.
    pub fn new(first_free: u32) -> Self {
        Builder { instrs: Vec::new(), next_qudit: first_free, next_reg: 0 }
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.instrs.push(Instr::Comment(text.into()));
    }

    pub fn fresh_id(&mut self) -> QuditId {
        let q = QuditId(self.next_qudit);
        self.next_qudit += 1;
        q
    }

    pub fn alloc(&mut self, role: Role, init: Vector) -> QuditId {
        let q = self.fresh_id();
        self.instrs.push(Instr::Alloc { q, role, init });
        q
    }

    pub fn gate(&mut self, q: QuditId, gate: Gate) {
        self.instrs.push(Instr::Gate { q, gate });
    }

    pub fn ctrl(&mut self, control: QuditId, target: QuditId, family: Family) {
        self.instrs.push(Instr::Ctrl { control, target, family });
    }

    pub fn measure(&mut self, q: QuditId, basis: Basis) -> usize {
        let reg = self.next_reg;
        self.next_reg += 1;
        self.instrs.push(Instr::Measure { q, basis, reg });
        reg
    }

    /// Emits a conditional with one case per value, each filled by `body`.
    pub fn cond(&mut self, reg: usize, values: impl IntoIterator<Item = usize>, mut body: impl FnMut(usize, &mut Builder)) {
        let mut branches = BTreeMap::new();
        for v in values {
            let mut sub = Builder { instrs: Vec::new(), next_qudit: self.next_qudit, next_reg: self.next_reg };
            body(v, &mut sub);
            self.next_qudit = self.next_qudit.max(sub.next_qudit);
            self.next_reg = self.next_reg.max(sub.next_reg);
            if !sub.instrs.is_empty() {
                branches.insert(v, sub.instrs);
            }
        }
        if !branches.is_empty() {
            self.instrs.push(Instr::Conditional { reg, branches });
        }
    }

    pub fn project(&mut self, q: QuditId, vector: Vector, expect: bool) {
        self.instrs.push(Instr::Project { q, vector, expect });
    }

    pub fn release(&mut self, q: QuditId) {
        self.instrs.push(Instr::Release { q });
    }

    pub fn relabel(&mut self, from: QuditId) -> QuditId {
        let to = self.fresh_id();
        self.instrs.push(Instr::Relabel { from, to });
        to
    }

    pub fn program(&self) -> GateProgram {
        GateProgram { instrs: self.instrs.clone() }
    }

    pub fn finish(self) -> GateProgram {
        GateProgram { instrs: self.instrs }
    }
}

/// Sums the counts of several runs.
pub fn total_counts(runs: &[Run]) -> GateCounts {
    let mut c = GateCounts::default();
    for r in runs {
        c.add(&r.counts);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::rng_from_seed;

    fn sample_program() -> GateProgram {
        let mut b = Builder::new(100);
        b.comment("demo");
        let a = b.alloc(Role::VertexAncilla, Vector::Fourier { zlist: vec![Element::E, Element::CP, Element::CM], k: 0 });
        b.gate(QuditId(1), Gate::Prep(Vector::custom(&[ONE, ZERO, ZERO, ZERO, ONE, ZERO]).unwrap()));
        b.ctrl(a, QuditId(1), Family::LMINUS);
        b.ctrl(a, QuditId(1), Family::CONJ_INV);
        let m = b.measure(a, Basis::Fourier(vec![Element::E, Element::CP, Element::CM]));
        b.cond(m, 0..3, |k, sub| {
            if k > 0 {
                sub.gate(QuditId(1), Gate::Zk { zlist: vec![Element::E, Element::CP], k: 1 });
            }
        });
        b.release(a);
        b.project(QuditId(1), Vector::Group(Element::E), false);
        b.finish()
    }

    #[test]
    fn text_round_trip() {
        let p = sample_program();
        let text = p.to_text();
        let q = GateProgram::parse(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_text(), text);
        assert!(text.contains("ctrl q100 q1 Lminus[g]"));
        assert!(text.contains("Act[g^-1|g]"));
    }

    #[test]
    fn families_match_matrices() {
        for f in [Family::LPLUS, Family::LPLUS_INV, Family::LMINUS, Family::LMINUS_INV] {
            let ms = f.matrices();
            for g in Element::ALL {
                let expect = match (f.left, f.right) {
                    (Slot::Ctrl, _) => regular_action(Side::Left, g),
                    (Slot::CtrlInv, _) => regular_action(Side::Left, g.inv()),
                    (_, Slot::CtrlInv) => regular_action(Side::Right, g),
                    _ => regular_action(Side::Right, g.inv()),
                };
                assert_eq!(ms[g.index()], expect);
            }
        }
    }

    #[test]
    fn exact_and_sampled_agree() {
        let p = sample_program();
        let s0 = SparseState::basis_state(&[Qudit::edge(1)], &[Element::E]).unwrap();
        let runs = Executor::new().run_exact(&p, s0.clone()).unwrap();
        let total: f64 = runs.iter().map(|r| r.probability).sum();
        assert!(total <= 1.0 + 1e-12);
        let mut rng = rng_from_seed(3);
        let one = Executor::new().run_sampled(&p, s0, &mut rng);
        assert!(one.is_ok() || matches!(one, Err(Error::ImpossibleBranch(_))));
    }

    #[test]
    fn prep_maps_identity_column() {
        let v = Vector::Fourier { zlist: vec![Element::E, Element::CP, Element::CM], k: 2 };
        let m = Gate::Prep(v.clone()).matrix();
        assert!(m.is_unitary(1e-12));
        let col = m.column(0);
        for (a, b) in col.iter().zip(v.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
