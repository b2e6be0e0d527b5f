//! Conforming triangulations of polygonal domains.
//!
//! Triangles are stored counter-clockwise. Local edge `i` of a triangle is the
//! edge opposite local vertex `i`, and each triangle carries the local index of
//! its refinement edge for newest vertex bisection. Boundary edges carry one
//! of the [`BoundaryTag`]s; tags survive every refinement because children of
//! a boundary edge inherit the tag of their parent.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
    Contact,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Interior => "interior",
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Neumann => "neumann",
            BoundaryTag::Contact => "contact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "interior" => Some(BoundaryTag::Interior),
            "dirichlet" => Some(BoundaryTag::Dirichlet),
            "neumann" => Some(BoundaryTag::Neumann),
            "contact" => Some(BoundaryTag::Contact),
            _ => None,
        }
    }

    /// Edges carrying the interior penalty terms (interior and Dirichlet).
    pub fn is_penalized(self) -> bool {
        matches!(self, BoundaryTag::Interior | BoundaryTag::Dirichlet)
    }
}

/// Geometric boundary classification plus the constant outward normal of the
/// contact boundary.
#[derive(Clone)]
pub struct BoundarySpec {
    classify: Arc<dyn Fn(Point) -> BoundaryTag + Send + Sync>,
    contact_normal: [f64; 2],
}

impl BoundarySpec {
    pub fn new<F>(contact_normal: [f64; 2], classify: F) -> Result<Self>
    where
        F: Fn(Point) -> BoundaryTag + Send + Sync + 'static,
    {
        let len = contact_normal[0].hypot(contact_normal[1]);
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "contact normal must have unit length, got {len}"
            )));
        }
        Ok(Self {
            classify: Arc::new(classify),
            contact_normal,
        })
    }

    pub fn classify(&self, midpoint: Point) -> BoundaryTag {
        (self.classify)(midpoint)
    }

    pub fn contact_normal(&self) -> [f64; 2] {
        self.contact_normal
    }
}

impl std::fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundarySpec")
            .field("contact_normal", &self.contact_normal)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    /// Local index of the refinement edge (the edge opposite the newest vertex).
    pub refinement_edge: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, ordered as they appear counter-clockwise in `left`.
    pub vertices: [usize; 2],
    /// Lower-indexed adjacent triangle; the normal points out of it.
    pub left: usize,
    pub right: Option<usize>,
    pub tag: BoundaryTag,
    pub normal: [f64; 2],
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn key(&self) -> (usize, usize) {
        edge_key(self.vertices[0], self.vertices[1])
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    id: u64,
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Longest edge, ties broken by the lexicographically smallest sorted vertex pair.
fn longest_edge(vertices: &[Point], tri: [usize; 3]) -> u8 {
    let mut best = 0u8;
    let mut best_len = -1.0;
    let mut best_key = (usize::MAX, usize::MAX);
    for i in 0..3 {
        let a = tri[(i + 1) % 3];
        let b = tri[(i + 2) % 3];
        let len = dist(vertices[a], vertices[b]);
        let key = edge_key(a, b);
        let tol = 1e-12 * len.max(best_len);
        if len > best_len + tol || ((len - best_len).abs() <= tol && key < best_key) {
            best = i as u8;
            best_len = len;
            best_key = key;
        }
    }
    best
}

impl Mesh {
    /// Assembles a mesh from raw connectivity. `boundary_tags` maps sorted
    /// vertex pairs of boundary edges to their tag.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<Triangle>,
        boundary_tags: &HashMap<(usize, usize), BoundaryTag>,
    ) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            if signed_area(vertices[a], vertices[b], vertices[c]) <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 2);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let a = tri.vertices[(i + 1) % 3];
                let b = tri.vertices[(i + 2) % 3];
                let key = edge_key(a, b);
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(Error::NonManifoldEdge(key.0, key.1));
                        }
                        edge.right = Some(t);
                        *slot = e;
                    }
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let length = dist(pa, pb);
                        let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                        lookup.insert(key, edges.len());
                        *slot = edges.len();
                        edges.push(Edge {
                            vertices: [a, b],
                            left: t,
                            right: None,
                            tag: BoundaryTag::Interior,
                            normal,
                            length,
                        });
                    }
                }
            }
            triangle_edges.push(local);
        }

        for (e, edge) in edges.iter_mut().enumerate() {
            let key = edge.key();
            match (edge.right, boundary_tags.get(&key)) {
                (None, Some(&tag)) if tag != BoundaryTag::Interior => edge.tag = tag,
                (None, _) => return Err(Error::UntaggedBoundary(key.0, key.1)),
                (Some(_), Some(&tag)) if tag != BoundaryTag::Interior => {
                    return Err(Error::TaggedInteriorEdge { edge: e, tag })
                }
                (Some(_), _) => {}
            }
        }

        Ok(Self {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            vertices,
            triangles,
            edges,
            triangle_edges,
        })
    }

    /// Structured mesh of the unit square: `n x n` cells, each split along the
    /// diagonal from its bottom-left to its top-right corner.
    pub fn unit_square(n: usize, spec: &BoundarySpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        let idx = |i: usize, j: usize| i + j * (n + 1);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (p00, p10, p01, p11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                for tri in [[p00, p10, p11], [p00, p11, p01]] {
                    triangles.push(Triangle {
                        vertices: tri,
                        refinement_edge: longest_edge(&vertices, tri),
                    });
                }
            }
        }
        let mut tags = HashMap::new();
        let side = |a: usize, b: usize| {
            let m = midpoint(vertices[a], vertices[b]);
            (edge_key(a, b), spec.classify(m))
        };
        for k in 0..n {
            for (a, b) in [
                (idx(k, 0), idx(k + 1, 0)),
                (idx(k, n), idx(k + 1, n)),
                (idx(0, k), idx(0, k + 1)),
                (idx(n, k), idx(n, k + 1)),
            ] {
                let (key, tag) = side(a, b);
                tags.insert(key, tag);
            }
        }
        Self::from_parts(vertices, triangles, &tags)
    }

    /// Tags every boundary edge of an arbitrary triangulation with `spec`.
    pub fn with_classified_boundary(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        spec: &BoundarySpec,
    ) -> Result<Self> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for i in 0..3 {
                *count.entry(edge_key(tri[i], tri[(i + 1) % 3])).or_default() += 1;
            }
        }
        let tags = count
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(k, _)| (k, spec.classify(midpoint(vertices[k.0], vertices[k.1]))))
            .collect();
        let triangles = triangles
            .into_iter()
            .map(|tri| Triangle {
                vertices: tri,
                refinement_edge: longest_edge(&vertices, tri),
            })
            .collect();
        Self::from_parts(vertices, triangles, &tags)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge indices of triangle `t`, local edge `i` opposite vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Diameter h_K (longest edge).
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Largest triangle diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edge_points(e);
        midpoint(a, b)
    }

    /// Local index (0..3) of edge `e` inside triangle `t`.
    pub fn local_edge_index(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.tag == tag)
            .map(|(i, _)| i)
    }

    pub fn contact_edges(&self) -> Vec<usize> {
        self.edges_with_tag(BoundaryTag::Contact).collect()
    }

    /// V - E + F, equal to 1 for a simply connected triangulated polygon.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Every triangle touching the contact boundary owns at most one contact edge.
    pub fn check_single_contact_edge(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let count = self.triangle_edges[t]
                .iter()
                .filter(|&&e| self.edges[e].tag == BoundaryTag::Contact)
                .count();
            if count > 1 {
                return Err(Error::MultipleContactEdges(t, count));
            }
        }
        Ok(())
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.triangle_points(t);
            for i in 0..3 {
                let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    fn boundary_tag_map(&self) -> HashMap<(usize, usize), BoundaryTag> {
        self.edges
            .iter()
            .filter(|e| e.is_boundary())
            .map(|e| (e.key(), e.tag))
            .collect()
    }

    /// Red refinement: every triangle is split into four similar children.
    pub fn uniform_refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut mids = Vec::with_capacity(self.n_edges());
        for e in 0..self.n_edges() {
            mids.push(vertices.len());
            vertices.push(self.edge_midpoint(e));
        }
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let [v0, v1, v2] = tri.vertices;
            let [e0, e1, e2] = self.triangle_edges[t];
            let (m0, m1, m2) = (mids[e0], mids[e1], mids[e2]);
            for child in [[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]] {
                triangles.push(Triangle {
                    vertices: child,
                    refinement_edge: longest_edge(&vertices, child),
                });
            }
        }
        let mut tags = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.is_boundary() {
                let [a, b] = edge.vertices;
                tags.insert(edge_key(a, mids[e]), edge.tag);
                tags.insert(edge_key(mids[e], b), edge.tag);
            }
        }
        Mesh::from_parts(vertices, triangles, &tags).expect("red refinement preserves validity")
    }

    /// Newest vertex bisection of the marked triangles with conforming closure.
    ///
    /// Every marked triangle is bisected at least once. Further bisections are
    /// added until no hanging node remains: whenever an edge of a triangle is
    /// split, its refinement edge is split as well.
    pub fn bisect(&self, marked: &[usize]) -> Mesh {
        if marked.is_empty() {
            return self.clone();
        }
        let mut split = vec![false; self.n_edges()];
        let mut queue = VecDeque::new();
        for &t in marked {
            let e = self.triangle_edges[t][self.triangles[t].refinement_edge as usize];
            if !split[e] {
                split[e] = true;
                queue.push_back(e);
            }
        }
        while let Some(e) = queue.pop_front() {
            let edge = &self.edges[e];
            for t in std::iter::once(edge.left).chain(edge.right) {
                let r = self.triangle_edges[t][self.triangles[t].refinement_edge as usize];
                if !split[r] {
                    split[r] = true;
                    queue.push_back(r);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tags = self.boundary_tag_map();
        for (e, _) in split.iter().enumerate().filter(|(_, &s)| s) {
            let edge = &self.edges[e];
            let m = vertices.len();
            vertices.push(self.edge_midpoint(e));
            mids.insert(edge.key(), m);
            if edge.is_boundary() {
                let [a, b] = edge.vertices;
                tags.remove(&edge.key());
                tags.insert(edge_key(a, m), edge.tag);
                tags.insert(edge_key(m, b), edge.tag);
            }
        }

        let mut triangles = Vec::with_capacity(self.n_triangles() + 2 * mids.len());
        for tri in &self.triangles {
            bisect_recursive(*tri, &mids, &mut triangles);
        }
        Mesh::from_parts(vertices, triangles, &tags).expect("bisection closure preserves conformity")
    }

    /// Plain-text export: `#vertices`, `#triangles` (with the local refinement
    /// edge index), `#edges` (with boundary tag) sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("#vertices\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e}", v[0], v[1]);
        }
        out.push_str("#triangles\n");
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            let _ = writeln!(out, "{a} {b} {c} {}", t.refinement_edge);
        }
        out.push_str("#edges\n");
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.as_str());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Vertices,
            Triangles,
            Edges,
        }
        let bad = |line: &str| Error::Parse(format!("malformed mesh line: {line:?}"));
        let mut section = Section::None;
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut tags = HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            match line {
                "#vertices" => section = Section::Vertices,
                "#triangles" => section = Section::Triangles,
                "#edges" => section = Section::Edges,
                _ => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    match section {
                        Section::Vertices if fields.len() == 2 => {
                            let x = fields[0].parse().map_err(|_| bad(line))?;
                            let y = fields[1].parse().map_err(|_| bad(line))?;
                            vertices.push([x, y]);
                        }
                        Section::Triangles if fields.len() == 4 => {
                            let mut v = [0usize; 4];
                            for (slot, f) in v.iter_mut().zip(&fields) {
                                *slot = f.parse().map_err(|_| bad(line))?;
                            }
                            if v[3] > 2 {
                                return Err(bad(line));
                            }
                            triangles.push(Triangle {
                                vertices: [v[0], v[1], v[2]],
                                refinement_edge: v[3] as u8,
                            });
                        }
                        Section::Edges if fields.len() == 3 => {
                            let a: usize = fields[0].parse().map_err(|_| bad(line))?;
                            let b: usize = fields[1].parse().map_err(|_| bad(line))?;
                            let tag = BoundaryTag::parse(fields[2]).ok_or_else(|| bad(line))?;
                            if tag != BoundaryTag::Interior {
                                tags.insert(edge_key(a, b), tag);
                            }
                        }
                        _ => return Err(bad(line)),
                    }
                }
            }
        }
        let n = vertices.len();
        if triangles.iter().any(|t| t.vertices.iter().any(|&v| v >= n)) {
            return Err(Error::Parse("triangle references a missing vertex".into()));
        }
        Self::from_parts(vertices, triangles, &tags)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn bisect_recursive(tri: Triangle, mids: &HashMap<(usize, usize), usize>, out: &mut Vec<Triangle>) {
    let r = tri.refinement_edge as usize;
    let a = tri.vertices[r];
    let b = tri.vertices[(r + 1) % 3];
    let c = tri.vertices[(r + 2) % 3];
    match mids.get(&edge_key(b, c)) {
        None => out.push(tri),
        Some(&m) => {
            // the new vertex is the newest in both children
            bisect_recursive(
                Triangle {
                    vertices: [a, b, m],
                    refinement_edge: 2,
                },
                mids,
                out,
            );
            bisect_recursive(
                Triangle {
                    vertices: [a, m, c],
                    refinement_edge: 1,
                },
                mids,
                out,
            );
        }
    }
}
