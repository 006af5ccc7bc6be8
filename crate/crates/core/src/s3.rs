//! The symmetric group S3: multiplication, conjugacy classes, irreps, regular actions
//! and the D(S3) anyon table.
//!
//! Basis order is e, t0, t1, t2, c+, c-. Every 6×6 matrix in the crate uses it.

use crate::error::{Error, Result};
use crate::linalg::{xi, Matrix, C64, ONE, ZERO};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const ORDER: usize = 6;

/// One of the six elements of S3.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

const NAMES: [&str; ORDER] = ["e", "t0", "t1", "t2", "c+", "c-"];

/// `MUL[a][b]` is the index of a·b.
const MUL: [[u8; ORDER]; ORDER] = [
    [0, 1, 2, 3, 4, 5],
    [1, 0, 4, 5, 2, 3],
    [2, 5, 0, 4, 3, 1],
    [3, 4, 5, 0, 1, 2],
    [4, 3, 1, 2, 5, 0],
    [5, 2, 3, 1, 0, 4],
];

const INV: [u8; ORDER] = [0, 1, 2, 3, 5, 4];

impl Element {
    pub const E: Element = Element(0);
    pub const T0: Element = Element(1);
    pub const T1: Element = Element(2);
    pub const T2: Element = Element(3);
    pub const CP: Element = Element(4);
    pub const CM: Element = Element(5);
    pub const ALL: [Element; ORDER] = [
        Element(0),
        Element(1),
        Element(2),
        Element(3),
        Element(4),
        Element(5),
    ];

    pub fn new(index: usize) -> Option<Element> {
        (index < ORDER).then_some(Element(index as u8))
    }

    /// Panics when `index >= 6`; for digits already known to be in range.
    pub fn from_index(index: usize) -> Element {
        Element::new(index).expect("group index out of range")
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        NAMES[self.index()]
    }

    pub fn inv(self) -> Element {
        Element(INV[self.index()])
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, n: u32) -> Element {
        (0..n).fold(Element::E, |acc, _| acc * self)
    }

    /// z⁻¹·self·z
    pub fn conj_by(self, z: Element) -> Element {
        z.inv() * self * z
    }

    pub fn class_tag(self) -> ClassTag {
        match self.0 {
            0 => ClassTag::E,
            1..=3 => ClassTag::T,
            _ => ClassTag::C,
        }
    }
}

impl std::ops::Mul for Element {
    type Output = Element;
    fn mul(self, rhs: Element) -> Element {
        Element(MUL[self.index()][rhs.index()])
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Element {
    type Err = Error;
    fn from_str(s: &str) -> Result<Element> {
        let s = s.trim();
        NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Element(i as u8))
            .ok_or_else(|| Error::Parse(format!("unknown group element `{s}`")))
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn mul(a: Element, b: Element) -> Element {
    a * b
}

pub fn inverse(g: Element) -> Element {
    g.inv()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "[e]")]
    E,
    #[serde(rename = "[t]")]
    T,
    #[serde(rename = "[c]")]
    C,
}

impl ClassTag {
    pub fn members(self) -> Vec<Element> {
        Element::ALL.into_iter().filter(|g| g.class_tag() == self).collect()
    }

    pub fn representative(self) -> Element {
        match self {
            ClassTag::E => Element::E,
            ClassTag::T => Element::T0,
            ClassTag::C => Element::CP,
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassTag::E => "[e]",
            ClassTag::T => "[t]",
            ClassTag::C => "[c]",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConjugacyClass {
    pub tag: ClassTag,
    pub members: Vec<Element>,
    /// Centralizer of the element the class was requested for.
    pub centralizer: Vec<Element>,
}

pub fn centralizer(g: Element) -> Vec<Element> {
    Element::ALL.into_iter().filter(|&z| z * g == g * z).collect()
}

pub fn conjugacy_class(g: Element) -> ConjugacyClass {
    let tag = g.class_tag();
    ConjugacyClass { tag, members: tag.members(), centralizer: centralizer(g) }
}

/// Irreducible representations of S3.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Irrep {
    R1Plus,
    R1Minus,
    R2,
}

impl Irrep {
    pub const ALL: [Irrep; 3] = [Irrep::R1Plus, Irrep::R1Minus, Irrep::R2];

    pub fn dim(self) -> usize {
        match self {
            Irrep::R2 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Irrep::R1Plus => "R1+",
            Irrep::R1Minus => "R1-",
            Irrep::R2 => "R2",
        }
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Irrep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Irrep> {
        match s.trim() {
            "R1+" => Ok(Irrep::R1Plus),
            "R1-" => Ok(Irrep::R1Minus),
            "R2" => Ok(Irrep::R2),
            other => Err(Error::Parse(format!("unknown irrep `{other}`"))),
        }
    }
}

pub fn irrep_matrix(r: Irrep, g: Element) -> Matrix {
    let one = |x: f64| Matrix::diag(&[C64::new(x, 0.0)]);
    match r {
        Irrep::R1Plus => one(1.0),
        Irrep::R1Minus => one(if g.class_tag() == ClassTag::T { -1.0 } else { 1.0 }),
        Irrep::R2 => {
            let w = xi();
            match g.index() {
                0 => Matrix::identity(2),
                k @ 1..=3 => {
                    let p = w.powi(k as i32 - 1);
                    Matrix::from_fn(2, 2, |i, j| match (i, j) {
                        (0, 1) => p.conj(),
                        (1, 0) => p,
                        _ => ZERO,
                    })
                }
                4 => Matrix::diag(&[w, w.conj()]),
                _ => Matrix::diag(&[w.conj(), w]),
            }
        }
    }
}

pub fn character(r: Irrep, g: Element) -> C64 {
    irrep_matrix(r, g).trace()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    /// L+^g|z⟩ = |gz⟩
    Left,
    /// L-^g|z⟩ = |zg⁻¹⟩
    Right,
}

/// Image of basis label `z` under L+^g or L-^g.
pub fn act(side: Side, g: Element, z: Element) -> Element {
    match side {
        Side::Left => g * z,
        Side::Right => z * g.inv(),
    }
}

pub fn regular_action(side: Side, g: Element) -> Matrix {
    let perm: Vec<usize> = Element::ALL.iter().map(|&z| act(side, g, z).index()).collect();
    Matrix::permutation(&perm)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

/// T+^h projects onto |h⟩, T-^h onto |h⁻¹⟩.
pub fn group_projector(sign: Sign, h: Element) -> Matrix {
    let target = match sign {
        Sign::Plus => h,
        Sign::Minus => h.inv(),
    };
    let d: Vec<C64> = Element::ALL.iter().map(|&z| if z == target { ONE } else { ZERO }).collect();
    Matrix::diag(&d)
}

/// (r, s) with g = c+^r t0^s.
pub fn semidirect_factor(g: Element) -> (usize, usize) {
    for r in 0..3 {
        for s in 0..2 {
            if Element::CP.pow(r) * Element::T0.pow(s) == g {
                return (r as usize, s as usize);
            }
        }
    }
    unreachable!("every element factors")
}

/// Unitary U with U(|r⟩⊗|s⟩) = |c+^r t0^s⟩, qutrit index major.
pub fn semidirect_basis_change() -> Matrix {
    let mut perm = vec![0; ORDER];
    for g in Element::ALL {
        let (r, s) = semidirect_factor(g);
        perm[2 * r + s] = g.index();
    }
    Matrix::permutation(&perm)
}

/// Irreps of the centralizers that label anyon charges.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum CentralizerIrrep {
    R1Plus,
    R1Minus,
    R2,
    Gamma0,
    Gamma1,
    Beta0,
    Beta1,
    Beta2,
}

impl CentralizerIrrep {
    pub fn dim(self) -> usize {
        match self {
            CentralizerIrrep::R2 => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AnyonType {
    pub class: ClassTag,
    pub irrep: CentralizerIrrep,
    pub quantum_dim: usize,
}

impl AnyonType {
    pub fn new(class: ClassTag, irrep: CentralizerIrrep) -> Result<AnyonType> {
        use CentralizerIrrep::*;
        let ok = matches!(
            (class, irrep),
            (ClassTag::E, R1Plus | R1Minus | R2)
                | (ClassTag::T, Gamma0 | Gamma1)
                | (ClassTag::C, Beta0 | Beta1 | Beta2)
        );
        if !ok {
            return Err(Error::Invalid(format!("{irrep:?} is not an irrep of the centralizer of {class}")));
        }
        Ok(AnyonType { class, irrep, quantum_dim: class.members().len() * irrep.dim() })
    }

    pub fn vacuum() -> AnyonType {
        AnyonType::new(ClassTag::E, CentralizerIrrep::R1Plus).expect("valid")
    }

    pub fn electric(r: Irrep) -> AnyonType {
        let irrep = match r {
            Irrep::R1Plus => CentralizerIrrep::R1Plus,
            Irrep::R1Minus => CentralizerIrrep::R1Minus,
            Irrep::R2 => CentralizerIrrep::R2,
        };
        AnyonType::new(ClassTag::E, irrep).expect("valid")
    }

    /// Pure flux of class [μ] with trivial centralizer charge.
    pub fn magnetic(class: ClassTag) -> AnyonType {
        let irrep = match class {
            ClassTag::E => CentralizerIrrep::R1Plus,
            ClassTag::T => CentralizerIrrep::Gamma0,
            ClassTag::C => CentralizerIrrep::Beta0,
        };
        AnyonType::new(class, irrep).expect("valid")
    }
}

/// The eight anyon types of D(S3).
pub fn anyon_types() -> Vec<AnyonType> {
    use CentralizerIrrep::*;
    [
        (ClassTag::E, R1Plus),
        (ClassTag::E, R1Minus),
        (ClassTag::E, R2),
        (ClassTag::C, Beta0),
        (ClassTag::T, Gamma0),
        (ClassTag::C, Beta1),
        (ClassTag::C, Beta2),
        (ClassTag::T, Gamma1),
    ]
    .into_iter()
    .map(|(c, r)| AnyonType::new(c, r).expect("table entries are valid"))
    .collect()
}
