//! Oriented-edge lattices and the local operators A_g(s), B_h(s,p), A(s), B(p), D_{h,g}(x).
//!
//! Every edge carries one system qudit whose id equals the edge id. Faces store an explicit
//! counterclockwise walk of signed edge ids: `+j` walks along the arrow of edge `j`, `-j`
//! against it. A face is left-adjacent to the edges it walks along.

use crate::error::{Error, Result};
use crate::register::{basis_vector, Qudit, QuditId, SparseState};
use crate::ribbon::RibbonSpec;
use crate::s3::{act, group_projector, regular_action, Element, Side, Sign};
use crate::linalg::{Matrix, C64};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeSpec {
    pub id: u32,
    pub tail: String,
    pub head: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub start_vertex: String,
    pub edges: Vec<i32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SiteSpec {
    pub name: String,
    pub vertex: String,
    pub face: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DuplicateSpec {
    pub drop: u32,
    pub keep: u32,
}

/// Serialized lattice description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LatticeSpec {
    #[serde(default)]
    pub name: String,
    pub vertices: Vec<String>,
    /// Vertices whose A(s) term belongs to the Hamiltonian. Defaults to all vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<Vec<String>>,
    pub edges: Vec<EdgeSpec>,
    pub faces: Vec<FaceSpec>,
    #[serde(default)]
    pub sites: Vec<SiteSpec>,
    #[serde(default)]
    pub ribbons: Vec<RibbonSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub duplicates: Vec<DuplicateSpec>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FaceId(pub usize);

/// A (vertex, adjacent face) pair.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SiteRef {
    pub vertex: VertexId,
    pub face: FaceId,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: u32,
    pub tail: VertexId,
    pub head: VertexId,
    pub name: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub name: String,
    pub start: VertexId,
    pub walk: Vec<i32>,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    spec: LatticeSpec,
    vertices: Vec<String>,
    interior: Vec<bool>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
}

/// Per-site expectation values of 1-A(s) and 1-B(p).
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Syndrome {
    pub vertices: Vec<(String, f64)>,
    pub faces: Vec<(String, f64)>,
}

impl Syndrome {
    pub fn max(&self) -> f64 {
        self.vertices.iter().chain(&self.faces).map(|x| x.1).fold(0.0, f64::max)
    }
}

const BRAID_MIN: &str = include_str!("../lattices/braid-min.json");
const FUSE_MIN: &str = include_str!("../lattices/fuse-min.json");

impl Lattice {
    pub fn from_json(text: &str) -> Result<Lattice> {
        let spec: LatticeSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Lattice::build(spec)
    }

    /// Built-in lattices: `braid-min`, `fuse-min`, their `-reduced` forms and `patch-MxN`.
    pub fn named(name: &str) -> Result<Lattice> {
        if let Some(base) = name.strip_suffix("-reduced") {
            return Lattice::named(base)?.reduced();
        }
        match name {
            "braid-min" => Lattice::from_json(BRAID_MIN),
            "fuse-min" => Lattice::from_json(FUSE_MIN),
            _ => {
                let dims = name
                    .strip_prefix("patch-")
                    .and_then(|d| d.split_once('x'))
                    .and_then(|(m, n)| Some((m.parse::<usize>().ok()?, n.parse::<usize>().ok()?)));
                match dims {
                    Some((m, n)) => Lattice::patch(m, n),
                    None => Err(Error::Lattice(format!("unknown lattice `{name}`"))),
                }
            }
        }
    }

    pub fn builtin_names() -> Vec<&'static str> {
        vec!["braid-min", "braid-min-reduced", "fuse-min", "fuse-min-reduced", "patch-MxN"]
    }

    /// Open m×n square patch. Vertex `x,y`; edges `hx,y`: (x,y)→(x+1,y) and
    /// `vx,y`: (x,y)→(x,y+1), numbered horizontals first; faces `fx,y` start at their
    /// lower-left corner. Interior vertices are those off the outer boundary.
    pub fn patch(m: usize, n: usize) -> Result<Lattice> {
        if m == 0 || n == 0 {
            return Err(Error::Lattice("patch dimensions must be positive".into()));
        }
        let vname = |x: usize, y: usize| format!("{x},{y}");
        let mut vertices = Vec::new();
        for y in 0..=n {
            for x in 0..=m {
                vertices.push(vname(x, y));
            }
        }
        let mut edges = Vec::new();
        let mut next = 1u32;
        let mut hid = std::collections::HashMap::new();
        let mut vid = std::collections::HashMap::new();
        for y in 0..=n {
            for x in 0..m {
                edges.push(EdgeSpec { id: next, tail: vname(x, y), head: vname(x + 1, y), name: Some(format!("h{x},{y}")) });
                hid.insert((x, y), next as i32);
                next += 1;
            }
        }
        for y in 0..n {
            for x in 0..=m {
                edges.push(EdgeSpec { id: next, tail: vname(x, y), head: vname(x, y + 1), name: Some(format!("v{x},{y}")) });
                vid.insert((x, y), next as i32);
                next += 1;
            }
        }
        let mut faces = Vec::new();
        for y in 0..n {
            for x in 0..m {
                faces.push(FaceSpec {
                    name: Some(format!("f{x},{y}")),
                    start_vertex: vname(x, y),
                    edges: vec![hid[&(x, y)], vid[&(x + 1, y)], -hid[&(x, y + 1)], -vid[&(x, y)]],
                });
            }
        }
        let mut interior = Vec::new();
        for y in 1..n {
            for x in 1..m {
                interior.push(vname(x, y));
            }
        }
        Lattice::build(LatticeSpec {
            name: format!("patch-{m}x{n}"),
            vertices,
            interior: Some(interior),
            edges,
            faces,
            sites: Vec::new(),
            ribbons: Vec::new(),
            duplicates: Vec::new(),
        })
    }

    pub fn build(spec: LatticeSpec) -> Result<Lattice> {
        let err = |m: String| Err(Error::Lattice(m));
        let vertices = spec.vertices.clone();
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return err(format!("duplicate vertex `{v}`"));
            }
        }
        let vix = |name: &str| -> Result<VertexId> {
            vertices
                .iter()
                .position(|v| v == name)
                .map(VertexId)
                .ok_or_else(|| Error::Lattice(format!("unknown vertex `{name}`")))
        };
        let mut edges = Vec::new();
        for e in &spec.edges {
            if e.id == 0 {
                return err("edge ids must be positive".into());
            }
            if edges.iter().any(|x: &Edge| x.id == e.id) {
                return err(format!("duplicate edge id {}", e.id));
            }
            let (tail, head) = (vix(&e.tail)?, vix(&e.head)?);
            if tail == head {
                return err(format!("edge {} is a self-loop", e.id));
            }
            edges.push(Edge { id: e.id, tail, head, name: e.name.clone() });
        }
        edges.sort_by_key(|e| e.id);
        let interior = match &spec.interior {
            None => vec![true; vertices.len()],
            Some(list) => {
                let mut flags = vec![false; vertices.len()];
                for v in list {
                    flags[vix(v)?.0] = true;
                }
                flags
            }
        };
        let mut lat = Lattice { spec: spec.clone(), vertices, interior, edges, faces: Vec::new() };
        for (i, f) in spec.faces.iter().enumerate() {
            let start = lat.vertex_named(&f.start_vertex)?;
            let name = f.name.clone().unwrap_or_else(|| format!("p{i}"));
            if lat.faces.iter().any(|x| x.name == name) {
                return err(format!("duplicate face `{name}`"));
            }
            if f.edges.is_empty() {
                return err(format!("face `{name}` has an empty boundary"));
            }
            let mut cur = start;
            for &x in &f.edges {
                let e = lat.edge(x.unsigned_abs())?;
                let (from, to) = if x > 0 { (e.tail, e.head) } else { (e.head, e.tail) };
                if from != cur {
                    return err(format!("face `{name}` boundary breaks at edge {x}"));
                }
                cur = to;
            }
            if cur != start {
                return err(format!("face `{name}` boundary is not closed"));
            }
            lat.faces.push(Face { name, start, walk: f.edges.clone() });
        }
        if !lat.faces.is_empty() {
            for e in &lat.edges {
                if lat.faces_of_edge(e.id).is_empty() {
                    return err(format!("edge {} is dangling (on no face)", e.id));
                }
            }
        }
        for s in &spec.sites {
            let site = SiteRef { vertex: lat.vertex_named(&s.vertex)?, face: lat.face_named(&s.face)? };
            if !lat.face_vertices(site.face).contains(&site.vertex) {
                return err(format!("site `{}`: vertex not on face", s.name));
            }
        }
        for d in &spec.duplicates {
            lat.edge(d.drop)?;
            lat.edge(d.keep)?;
        }
        for r in &spec.ribbons {
            crate::ribbon::Ribbon::from_spec(&lat, r)?;
        }
        Ok(lat)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("spec serializes")
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Drops the duplicated leaf edges listed in the spec, together with their dual
    /// segments in named ribbons.
    pub fn reduced(&self) -> Result<Lattice> {
        let drop: Vec<u32> = self.spec.duplicates.iter().map(|d| d.drop).collect();
        let mut spec = self.spec.clone();
        spec.name = format!("{}-reduced", spec.name);
        spec.edges.retain(|e| !drop.contains(&e.id));
        for f in &mut spec.faces {
            f.edges.retain(|x| !drop.contains(&x.unsigned_abs()));
        }
        for r in &mut spec.ribbons {
            let mut segs = Vec::new();
            for s in &r.segments {
                let seg = crate::ribbon::Segment::parse(s)?;
                if drop.contains(&seg.edge()) {
                    if seg.is_direct() {
                        return Err(Error::Lattice(format!("ribbon `{}` runs along dropped edge", r.name)));
                    }
                    continue;
                }
                segs.push(s.clone());
            }
            r.segments = segs;
        }
        spec.duplicates.clear();
        let used: Vec<String> = spec.edges.iter().flat_map(|e| [e.tail.clone(), e.head.clone()]).collect();
        spec.vertices.retain(|v| used.contains(v));
        if let Some(int) = &mut spec.interior {
            int.retain(|v| used.contains(v));
        }
        Lattice::build(spec)
    }

    /// (dropped, kept) edge pairs whose qudits stay equal.
    pub fn duplicates(&self) -> Vec<(u32, u32)> {
        self.spec.duplicates.iter().map(|d| (d.drop, d.keep)).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn face_ids(&self) -> impl Iterator<Item = FaceId> {
        (0..self.faces.len()).map(FaceId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex_named(&self, name: &str) -> Result<VertexId> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .map(VertexId)
            .ok_or_else(|| Error::Lattice(format!("unknown vertex `{name}`")))
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.interior[v.0]
    }

    pub fn interior_vertices(&self) -> Vec<VertexId> {
        self.vertex_ids().filter(|&v| self.is_interior(v)).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> Vec<u32> {
        self.edges.iter().map(|e| e.id).collect()
    }

    pub fn edge(&self, id: u32) -> Result<&Edge> {
        self.edges.iter().find(|e| e.id == id).ok_or_else(|| Error::Lattice(format!("unknown edge {id}")))
    }

    pub fn edge_named(&self, name: &str) -> Result<u32> {
        self.edges
            .iter()
            .find(|e| e.name.as_deref() == Some(name))
            .map(|e| e.id)
            .ok_or_else(|| Error::Lattice(format!("unknown edge `{name}`")))
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f.0]
    }

    pub fn face_named(&self, name: &str) -> Result<FaceId> {
        self.faces
            .iter()
            .position(|f| f.name == name)
            .map(FaceId)
            .ok_or_else(|| Error::Lattice(format!("unknown face `{name}`")))
    }

    pub fn site_named(&self, name: &str) -> Result<SiteRef> {
        let s = self
            .spec
            .sites
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Lattice(format!("unknown site `{name}`")))?;
        Ok(SiteRef { vertex: self.vertex_named(&s.vertex)?, face: self.face_named(&s.face)? })
    }

    /// Site from vertex and face names.
    pub fn site(&self, vertex: &str, face: &str) -> Result<SiteRef> {
        let site = SiteRef { vertex: self.vertex_named(vertex)?, face: self.face_named(face)? };
        if !self.face_vertices(site.face).contains(&site.vertex) {
            return Err(Error::Lattice(format!("vertex `{vertex}` is not on face `{face}`")));
        }
        Ok(site)
    }

    pub fn site_label(&self, x: SiteRef) -> String {
        format!("({}, {})", self.vertex_name(x.vertex), self.face(x.face).name)
    }

    pub fn ribbon_specs(&self) -> &[RibbonSpec] {
        &self.spec.ribbons
    }

    pub fn qudit(&self, edge: u32) -> QuditId {
        QuditId(edge)
    }

    pub fn edge_qudits(&self) -> Vec<Qudit> {
        self.edges.iter().map(|e| Qudit::edge(e.id)).collect()
    }

    /// All system qudits in |e⟩.
    pub fn fresh_state(&self) -> SparseState {
        let pairs: Vec<_> = self.edge_qudits().into_iter().map(|q| (q, basis_vector(Element::E))).collect();
        SparseState::new_product_state(&pairs).expect("valid product state")
    }

    /// Edges incident to `v`, by increasing id.
    pub fn star(&self, v: VertexId) -> Vec<u32> {
        self.edges.iter().filter(|e| e.tail == v || e.head == v).map(|e| e.id).collect()
    }

    pub fn neighbor(&self, edge: u32, v: VertexId) -> Result<VertexId> {
        let e = self.edge(edge)?;
        if e.tail == v {
            Ok(e.head)
        } else if e.head == v {
            Ok(e.tail)
        } else {
            Err(Error::Lattice(format!("vertex `{}` is not on edge {edge}", self.vertex_name(v))))
        }
    }

    /// Faces whose boundary walk contains the edge, left-adjacent ones first.
    pub fn faces_of_edge(&self, edge: u32) -> Vec<FaceId> {
        let id = edge as i32;
        let mut out: Vec<FaceId> = self.face_ids().filter(|&f| self.face(f).walk.contains(&id)).collect();
        for f in self.face_ids() {
            if self.face(f).walk.contains(&-id) && !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }

    /// Face across `edge` from `f`: the right face if `f` walks along the edge, the left
    /// face otherwise. A face that walks the edge both ways is its own opposite.
    pub fn opposite_face(&self, edge: u32, f: FaceId) -> Result<FaceId> {
        let id = edge as i32;
        let walk = &self.face(f).walk;
        let (fwd, bwd) = (walk.contains(&id), walk.contains(&-id));
        if !fwd && !bwd {
            return Err(Error::Lattice(format!("edge {edge} is not on face `{}`", self.face(f).name)));
        }
        if fwd && bwd {
            return Ok(f);
        }
        let want = if fwd { -id } else { id };
        self.face_ids()
            .find(|&g| self.face(g).walk.contains(&want))
            .ok_or_else(|| Error::Lattice(format!("edge {edge} is on the outer boundary")))
    }

    /// Vertices visited by the boundary walk of `f`, in order, starting at its start vertex.
    pub fn face_vertices(&self, f: FaceId) -> Vec<VertexId> {
        let face = self.face(f);
        let mut cur = face.start;
        let mut out = Vec::with_capacity(face.walk.len());
        for &x in &face.walk {
            out.push(cur);
            let e = self.edge(x.unsigned_abs()).expect("validated");
            cur = if x > 0 { e.head } else { e.tail };
        }
        out
    }

    /// Boundary walk of the site's face, rotated to start at the first visit of its vertex.
    pub fn walk(&self, x: SiteRef) -> Result<Vec<i32>> {
        let verts = self.face_vertices(x.face);
        let i = verts.iter().position(|&v| v == x.vertex).ok_or_else(|| {
            Error::Lattice(format!("vertex `{}` is not on face `{}`", self.vertex_name(x.vertex), self.face(x.face).name))
        })?;
        let w = &self.face(x.face).walk;
        Ok(w[i..].iter().chain(&w[..i]).copied().collect())
    }

    /// Ordered boundary product from the site's vertex; an edge walked along its arrow
    /// contributes z⁻¹, against it z.
    pub fn flux_of(&self, x: SiteRef, value: impl Fn(u32) -> Element) -> Result<Element> {
        Ok(self.walk(x)?.iter().fold(Element::E, |p, &s| {
            let z = value(s.unsigned_abs());
            p * if s > 0 { z.inv() } else { z }
        }))
    }

    /// Side of the regular action of L_g(j, v): left (L+) at the head, right (L-) at the tail.
    pub fn edge_side(&self, edge: u32, v: VertexId) -> Result<Side> {
        let e = self.edge(edge)?;
        if e.head == v {
            Ok(Side::Left)
        } else if e.tail == v {
            Ok(Side::Right)
        } else {
            Err(Error::Lattice(format!("vertex `{}` is not on edge {edge}", self.vertex_name(v))))
        }
    }

    pub fn edge_action(&self, g: Element, edge: u32, v: VertexId) -> Result<(QuditId, Matrix)> {
        Ok((self.qudit(edge), regular_action(self.edge_side(edge, v)?, g)))
    }

    /// T_h(j,p): T- when p is left-adjacent to j (walks along it), T+ when right-adjacent.
    pub fn face_projector_factor(&self, h: Element, edge: u32, face: FaceId) -> Result<(QuditId, Matrix)> {
        let walk = &self.face(face).walk;
        let sign = if walk.contains(&(edge as i32)) {
            Sign::Minus
        } else if walk.contains(&-(edge as i32)) {
            Sign::Plus
        } else {
            return Err(Error::Lattice(format!("edge {edge} is not on face `{}`", self.face(face).name)));
        };
        Ok((self.qudit(edge), group_projector(sign, h)))
    }

    /// A_g(s): L_g(j,s) on every edge of the star.
    pub fn gauge_transform(&self, state: &SparseState, g: Element, s: VertexId) -> Result<SparseState> {
        let mut out = state.clone();
        for j in self.star(s) {
            let side = self.edge_side(j, s)?;
            out = out.map_value(self.qudit(j), |z| act(side, g, z))?;
        }
        Ok(out)
    }

    /// A(s)|ψ⟩ = (1/6)Σ_g A_g(s)|ψ⟩, unnormalized.
    pub fn vertex_projector(&self, state: &SparseState, s: VertexId) -> Result<SparseState> {
        let parts: Vec<_> = Element::ALL
            .iter()
            .map(|&g| Ok((C64::new(1.0 / 6.0, 0.0), self.gauge_transform(state, g, s)?)))
            .collect::<Result<_>>()?;
        SparseState::linear_combination(&parts)
    }

    /// B_h(x)|ψ⟩, unnormalized.
    pub fn flux_filter(&self, state: &SparseState, h: Element, x: SiteRef) -> Result<SparseState> {
        let walk = self.walk(x)?;
        let ids = state.qudit_ids();
        let pos: Vec<(usize, bool)> = walk
            .iter()
            .map(|&s| Ok((ids.iter().position(|q| q.0 == s.unsigned_abs()).ok_or(Error::UnknownQudit(s.unsigned_abs()))?, s > 0)))
            .collect::<Result<_>>()?;
        Ok(state.filter(|cfg| {
            pos.iter().fold(Element::E, |p, &(i, fwd)| p * if fwd { cfg[i].inv() } else { cfg[i] }) == h
        }))
    }

    /// Probability of flux `h` at `x` and the normalized post-measurement state (empty
    /// when the probability vanishes).
    pub fn flux_projector(&self, state: &SparseState, h: Element, x: SiteRef) -> Result<(f64, SparseState)> {
        let raw = self.flux_filter(state, h, x)?;
        let p = raw.norm_sqr() / state.norm_sqr();
        Ok(match raw.normalized() {
            Some((_, s)) => (p, s),
            None => (0.0, raw),
        })
    }

    /// Distribution of the flux at `x` over the six group elements.
    pub fn flux_distribution(&self, state: &SparseState, x: SiteRef) -> Result<[f64; 6]> {
        let mut p = [0.0; 6];
        for h in Element::ALL {
            p[h.index()] = self.flux_projector(state, h, x)?.0;
        }
        Ok(p)
    }

    /// ⟨1-A(s)⟩ for interior vertices and ⟨1-B(p)⟩ for all faces.
    pub fn site_syndrome(&self, state: &SparseState) -> Result<Syndrome> {
        let norm = state.norm_sqr();
        let mut vertices = Vec::new();
        for v in self.interior_vertices() {
            let a = state.inner(&self.vertex_projector(state, v)?)?.re / norm;
            vertices.push((self.vertex_name(v).to_string(), (1.0 - a).clamp(0.0, 1.0)));
        }
        let mut faces = Vec::new();
        for f in self.face_ids() {
            let x = SiteRef { vertex: self.face(f).start, face: f };
            let p = self.flux_projector(state, Element::E, x)?.0;
            faces.push((self.face(f).name.clone(), (1.0 - p).clamp(0.0, 1.0)));
        }
        Ok(Syndrome { vertices, faces })
    }

    /// D_{h,g}(x) = B_h(x)A_g(x), unnormalized.
    pub fn dyon_operator(&self, state: &SparseState, h: Element, g: Element, x: SiteRef) -> Result<SparseState> {
        let a = self.gauge_transform(state, g, x.vertex)?;
        self.flux_filter(&a, h, x)
    }

    /// Ground state by direct projection: Π_s A(s) applied to |e…e⟩ for interior vertices.
    pub fn ground_state(&self) -> Result<SparseState> {
        let mut s = self.fresh_state();
        for v in self.interior_vertices() {
            s = self.vertex_projector(&s, v)?;
        }
        Ok(s.normalized().ok_or_else(|| Error::Lattice("ground projection vanished".into()))?.1)
    }

    /// Graph distance from every vertex to the nearest non-interior vertex
    /// (`usize::MAX` when none is reachable).
    pub fn boundary_distance(&self) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.vertices.len()];
        let mut queue = VecDeque::new();
        for v in self.vertex_ids() {
            if !self.is_interior(v) {
                d[v.0] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for j in self.star(v) {
                let u = self.neighbor(j, v).expect("incident");
                if d[u.0] == usize::MAX {
                    d[u.0] = d[v.0] + 1;
                    queue.push_back(u);
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_lattices() {
        let b = Lattice::named("braid-min").unwrap();
        assert_eq!(b.edges().len(), 5);
        assert_eq!(b.interior_vertices().len(), 2);
        let f = Lattice::named("fuse-min").unwrap();
        assert_eq!(f.edges().len(), 7);
        assert!(f.vertex_named("s2").is_ok());
        let p = Lattice::patch(2, 2).unwrap();
        assert_eq!((p.edges().len(), p.num_vertices(), p.faces().len()), (12, 9, 4));
        assert_eq!(Lattice::named("braid-min-reduced").unwrap().edges().len(), 3);
        assert_eq!(Lattice::named("fuse-min-reduced").unwrap().edges().len(), 5);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = Lattice::named("braid-min").unwrap().spec().clone();
        spec.faces[0].edges.pop();
        assert!(Lattice::build(spec).is_err());
        let mut spec = Lattice::named("braid-min").unwrap().spec().clone();
        spec.edges[0].head = "nowhere".into();
        assert!(Lattice::build(spec).is_err());
    }

    #[test]
    fn edge_action_sides() {
        let b = Lattice::named("braid-min").unwrap();
        let s0 = b.vertex_named("s0").unwrap();
        let (_, m) = b.edge_action(Element::T0, 3, s0).unwrap();
        assert_eq!(m, regular_action(Side::Right, Element::T0));
        let (_, m) = b.edge_action(Element::T0, 4, s0).unwrap();
        assert_eq!(m, regular_action(Side::Left, Element::T0));
        assert!(b.edge_action(Element::T0, 1, s0).is_err());
    }

    #[test]
    fn face_factor_sides() {
        let p = Lattice::patch(2, 1).unwrap();
        let l = p.face_named("f0,0").unwrap();
        let (_, m) = p.face_projector_factor(Element::CP, 1, l).unwrap();
        assert_eq!(m, group_projector(Sign::Minus, Element::CP));
        let r = p.face_named("f1,0").unwrap();
        let v1 = p.edge_named("v1,0").unwrap();
        let (_, m) = p.face_projector_factor(Element::CP, v1, r).unwrap();
        assert_eq!(m, group_projector(Sign::Plus, Element::CP));
    }

    #[test]
    fn all_e_syndrome() {
        let p = Lattice::patch(2, 2).unwrap();
        let syn = p.site_syndrome(&p.fresh_state()).unwrap();
        for (_, v) in &syn.vertices {
            assert!((v - 5.0 / 6.0).abs() < 1e-12);
        }
        for (_, f) in &syn.faces {
            assert!(f.abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_is_stabilized() {
        for name in ["braid-min", "fuse-min", "patch-3x2"] {
            let lat = Lattice::named(name).unwrap();
            let gs = lat.ground_state().unwrap();
            assert!(lat.site_syndrome(&gs).unwrap().max() < 1e-10, "{name}");
            for v in lat.interior_vertices() {
                for g in Element::ALL {
                    let t = lat.gauge_transform(&gs, g, v).unwrap();
                    assert!((gs.fidelity(&t).unwrap() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn flux_partition_of_unity() {
        let p = Lattice::patch(1, 1).unwrap();
        let x = p.site("0,0", "f0,0").unwrap();
        let s = p.fresh_state().apply_local(QuditId(1), &crate::linalg::dft(6)).unwrap();
        let total: f64 = p.flux_distribution(&s, x).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
