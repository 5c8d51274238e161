use std::collections::HashMap;
use std::sync::OnceLock;

use super::domain::{cross, dot, norm, sub, Domain};
use crate::fem::FemSpace;
use crate::{Error, Result};

/// Conforming P1 triangulation of a planar domain.
///
/// Immutable once built; the finite-element tables are computed lazily and
/// cached, so a mesh can be shared by reference between concurrent solves.
#[derive(Debug)]
pub struct Mesh {
    domain: Domain,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    h: f64,
    space: OnceLock<FemSpace>,
}

impl Clone for Mesh {
    fn clone(&self) -> Self {
        Mesh {
            domain: self.domain.clone(),
            nodes: self.nodes.clone(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            h: self.h,
            space: OnceLock::new(),
        }
    }
}

/// A boundary edge with its single adjacent triangle.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    /// Endpoints ordered so that the domain lies to the left of `a -> b`.
    pub a: usize,
    pub b: usize,
    pub triangle: usize,
    /// Unit outward normal.
    pub normal: [f64; 2],
    pub length: f64,
    pub midpoint: [f64; 2],
}

impl Mesh {
    /// Assemble a mesh from raw arrays and check every structural invariant.
    pub fn from_parts(
        domain: Domain,
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if boundary.len() != nodes.len() {
            return Err(Error::InvalidInput("boundary flag count differs from node count".into()));
        }
        let h = max_edge(&nodes, &triangles);
        let mesh = Mesh { domain, nodes, triangles, boundary, h, space: OnceLock::new() };
        mesh.check()?;
        Ok(mesh)
    }

    fn from_parts_unchecked(domain: Domain, nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Self {
        let boundary = boundary_flags(nodes.len(), &triangles);
        let h = max_edge(&nodes, &triangles);
        Mesh { domain, nodes, triangles, boundary, h, space: OnceLock::new() }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_boundary_nodes(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    /// Characteristic size: the longest edge.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(sub(self.nodes[b], self.nodes[a]), sub(self.nodes[c], self.nodes[a]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub(crate) fn fem_space(&self) -> &FemSpace {
        self.space.get_or_init(|| FemSpace::new(self))
    }

    /// All boundary edges, oriented with the domain on the left.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut edges = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if count[&(a.min(b), a.max(b))] == 1 {
                    let pa = self.nodes[a];
                    let pb = self.nodes[b];
                    let e = sub(pb, pa);
                    let length = norm(e);
                    edges.push(BoundaryEdge {
                        a,
                        b,
                        triangle: t,
                        normal: [e[1] / length, -e[0] / length],
                        length,
                        midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                    });
                }
            }
        }
        edges
    }

    /// Verify orientation, edge incidence and boundary-flag placement.
    pub fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidInput(format!("triangle {t} references a missing node")));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::InvalidInput(format!("triangle {t} has non-positive area {area:e}")));
            }
        }
        let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *incidence.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some((e, c)) = incidence.iter().find(|(_, c)| **c > 2) {
            return Err(Error::InvalidInput(format!("edge {e:?} shared by {c} triangles")));
        }
        let topo = boundary_flags(n, &self.triangles);
        for i in 0..n {
            if topo[i] && !self.boundary[i] {
                return Err(Error::InvalidInput(format!("node {i} lies on a boundary edge but is not flagged")));
            }
            if self.boundary[i] {
                let d = self.domain.distance_to_boundary(self.nodes[i]).abs();
                if d > self.h * self.h + 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "boundary node {i} is {d:e} away from the domain boundary"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same connectivity with coordinates multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Mesh {
        Mesh {
            domain: self.domain.scaled(s),
            nodes: self.nodes.iter().map(|x| [x[0] * s, x[1] * s]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            h: self.h * s,
            space: OnceLock::new(),
        }
    }
}

fn max_edge(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
        .map(|(a, b)| norm(sub(nodes[a], nodes[b])))
        .fold(0.0, f64::max)
}

/// Nodes touching an edge that belongs to exactly one triangle.
fn boundary_flags(n: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *incidence.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut flags = vec![false; n];
    for ((a, b), c) in incidence {
        if c == 1 {
            flags[a] = true;
            flags[b] = true;
        }
    }
    flags
}

/// Quasi-uniform triangulation of the disc of radius `radius` centred at the origin.
///
/// Concentric rings with `6k` nodes on ring `k` are zipped together and then
/// made Delaunay by edge flips. All boundary nodes lie exactly on the circle.
pub fn mesh_disc(radius: f64, h: f64) -> Result<Mesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("disc radius {radius} must be > 0")));
    }
    if !(h > 0.0 && h < radius) {
        return Err(Error::InvalidParameter(format!("target edge length {h} must lie in (0, {radius})")));
    }
    let rings = ((radius / h) - 1e-9).ceil().max(1.0) as usize;
    let mut nodes = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for k in 1..=rings {
        ring_start.push(nodes.len());
        let r = radius * k as f64 / rings as f64;
        let m = 6 * k;
        for j in 0..m {
            let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let (s, c) = a.sin_cos();
            nodes.push(if k == rings { [radius * c, radius * s] } else { [r * c, r * s] });
        }
    }
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for k in 1..=rings {
        let inner_n = if k == 1 { 1 } else { 6 * (k - 1) };
        let outer_n = 6 * k;
        let inner = |i: usize| ring_start[k - 1] + i % inner_n;
        let outer = |j: usize| ring_start[k] + j % outer_n;
        let (mut i, mut j) = (0usize, 0usize);
        while i < inner_n || j < outer_n {
            // advance along whichever ring has the smaller next angle; exact rational compare
            let take_outer = if k == 1 {
                true
            } else if i == inner_n {
                true
            } else if j == outer_n {
                false
            } else {
                (j + 1) * inner_n <= (i + 1) * outer_n
            };
            if take_outer {
                triangles.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
                if k == 1 && j == outer_n {
                    i = inner_n;
                }
            } else {
                triangles.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }
    let mut boundary = vec![false; nodes.len()];
    for flag in boundary.iter_mut().skip(ring_start[rings]) {
        *flag = true;
    }
    delaunay_flips(&nodes, &mut triangles);
    let h_actual = max_edge(&nodes, &triangles);
    let mesh = Mesh {
        domain: Domain::Ball { dim: 2, radius },
        nodes,
        triangles,
        boundary,
        h: h_actual,
        space: OnceLock::new(),
    };
    mesh.check()?;
    Ok(mesh)
}

/// Triangulation of a strictly convex counter-clockwise polygon: ear clipping of
/// the vertices, Delaunay flips, then uniform refinement until the longest
/// edge is at most `h`.
pub fn mesh_polygon(vertices: &[[f64; 2]], h: f64) -> Result<Mesh> {
    let domain = Domain::polygon(vertices.to_vec())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("target edge length {h} must be > 0")));
    }
    let nodes: Vec<[f64; 2]> = vertices.to_vec();
    let mut triangles = ear_clip(&nodes);
    delaunay_flips(&nodes, &mut triangles);
    let mut mesh = Mesh::from_parts_unchecked(domain, nodes, triangles);
    mesh.check()?;
    while mesh.h > h {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

fn ear_clip(poly: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let mut remaining: Vec<usize> = (0..poly.len()).collect();
    let mut triangles = Vec::with_capacity(poly.len() - 2);
    while remaining.len() > 3 {
        let m = remaining.len();
        let ear = (0..m)
            .find(|&k| {
                let (a, b, c) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
                let convex = cross(sub(poly[b], poly[a]), sub(poly[c], poly[b])) > 0.0;
                convex
                    && remaining
                        .iter()
                        .filter(|&&v| v != a && v != b && v != c)
                        .all(|&v| !point_in_triangle(poly[v], poly[a], poly[b], poly[c]))
            })
            .expect("a simple polygon always has an ear");
        let (a, b, c) = (remaining[(ear + m - 1) % m], remaining[ear], remaining[(ear + 1) % m]);
        triangles.push([a, b, c]);
        remaining.remove(ear);
    }
    triangles.push([remaining[0], remaining[1], remaining[2]]);
    triangles
}

fn point_in_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let d1 = cross(sub(b, a), sub(p, a));
    let d2 = cross(sub(c, b), sub(p, b));
    let d3 = cross(sub(a, c), sub(p, c));
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Lawson flips until every interior edge satisfies the empty-circumcircle test.
fn delaunay_flips(nodes: &[[f64; 2]], triangles: &mut [[usize; 3]]) {
    for _pass in 0..100 {
        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push((t, k));
            }
        }
        let mut keys: Vec<_> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        let mut touched = vec![false; triangles.len()];
        let mut flipped = 0;
        for key in keys {
            let inc = &edge_map[&key];
            if inc.len() != 2 {
                continue;
            }
            let (t1, k1) = inc[0];
            let (t2, k2) = inc[1];
            if touched[t1] || touched[t2] {
                continue;
            }
            let tri1 = triangles[t1];
            let tri2 = triangles[t2];
            let (a, b) = (tri1[k1], tri1[(k1 + 1) % 3]);
            let c = tri1[(k1 + 2) % 3];
            let d = tri2[(k2 + 2) % 3];
            let (pa, pb, pc, pd) = (nodes[a], nodes[b], nodes[c], nodes[d]);
            let angle = |apex: [f64; 2], x: [f64; 2], y: [f64; 2]| {
                let u = sub(x, apex);
                let v = sub(y, apex);
                cross(u, v).abs().atan2(dot(u, v))
            };
            if angle(pc, pa, pb) + angle(pd, pa, pb) <= std::f64::consts::PI + 1e-10 {
                continue;
            }
            // new triangles (c, a, d) and (d, b, c) must both be positively oriented
            let o1 = cross(sub(pa, pc), sub(pd, pc));
            let o2 = cross(sub(pb, pd), sub(pc, pd));
            if o1 <= 0.0 || o2 <= 0.0 {
                continue;
            }
            triangles[t1] = [c, a, d];
            triangles[t2] = [d, b, c];
            touched[t1] = true;
            touched[t2] = true;
            flipped += 1;
        }
        if flipped == 0 {
            break;
        }
    }
}

/// Uniform red refinement: every triangle split into four through its edge
/// midpoints. Boundary midpoints of disc meshes are projected back onto the circle.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mut boundary = mesh.boundary.clone();
    let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *incidence.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>, boundary: &mut Vec<bool>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let (pa, pb) = (nodes[a], nodes[b]);
            let mut x = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let on_boundary = incidence[&key] == 1;
            if on_boundary {
                if let Domain::Ball { radius, .. } = mesh.domain {
                    let r = norm(x);
                    x = [x[0] * radius / r, x[1] * radius / r];
                }
            }
            nodes.push(x);
            boundary.push(on_boundary);
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut nodes, &mut boundary);
        let bc = mid(b, c, &mut nodes, &mut boundary);
        let ca = mid(c, a, &mut nodes, &mut boundary);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let h = max_edge(&nodes, &triangles);
    Mesh { domain: mesh.domain.clone(), nodes, triangles, boundary, h, space: OnceLock::new() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coarse_disc_contract() {
        let m = mesh_disc(1.0, 0.5).unwrap();
        assert!(m.num_triangles() >= 4);
        for (i, x) in m.nodes().iter().enumerate() {
            if m.is_boundary(i) {
                assert!(norm(*x) >= 1.0 - 0.25);
            }
        }
        m.check().unwrap();
    }

    #[test]
    fn disc_counts_and_quality() {
        let m = mesh_disc(1.0, 0.05).unwrap();
        // 20 rings: 1 + 3·20·21 nodes, 6·20² triangles
        assert_eq!(m.num_nodes(), 1261);
        assert_eq!(m.num_triangles(), 2400);
        assert_eq!(m.num_boundary_nodes(), 120);
        assert!(m.h() <= 1.5 * 0.05);
        for (i, x) in m.nodes().iter().enumerate() {
            if m.is_boundary(i) {
                assert!((norm(*x) - 1.0).abs() <= 0.05 * 0.05);
            }
        }
    }

    #[test]
    fn disc_scaling_preserves_connectivity() {
        let a = mesh_disc(1.0, 0.05).unwrap();
        let b = mesh_disc(2.0, 0.1).unwrap();
        assert_eq!(a.triangles(), b.triangles());
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert!((2.0 * x[0] - y[0]).abs() < 1e-14 && (2.0 * x[1] - y[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn disc_rejects_bad_h() {
        assert!(matches!(mesh_disc(1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(mesh_disc(1.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(mesh_disc(1.0, -0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn square_mesh_flags_corners() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = mesh_polygon(&sq, 0.5).unwrap();
        assert!(m.h() <= 0.5);
        for c in &sq {
            let i = m.nodes().iter().position(|x| x == c).unwrap();
            assert!(m.is_boundary(i));
        }
        assert!((m.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polygon_rejects_collinear_triple() {
        let bad = [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(mesh_polygon(&bad, 0.2), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn hexagon_area_is_exact() {
        let hex = Domain::regular_polygon(6, 1.0).unwrap();
        let Domain::ConvexPolygon { vertices } = &hex else { unreachable!() };
        let m = mesh_polygon(vertices, 0.1).unwrap();
        let exact = 1.5 * 3f64.sqrt();
        assert!((m.total_area() - exact).abs() < 1e-10);
        m.check().unwrap();
    }

    #[test]
    fn refinement_quadruples_and_projects() {
        let m0 = mesh_disc(1.0, 0.25).unwrap();
        let m1 = refine(&m0);
        assert_eq!(m1.num_triangles(), 4 * m0.num_triangles());
        m1.check().unwrap();
        for (i, x) in m1.nodes().iter().enumerate() {
            if m1.is_boundary(i) {
                assert!((norm(*x) - 1.0).abs() < 1e-12);
            }
        }
        // boundary flags survive refinement
        for i in 0..m0.num_nodes() {
            assert_eq!(m0.is_boundary(i), m1.is_boundary(i));
        }
    }

    #[test]
    fn disc_area_converges_monotonically() {
        let mut m = mesh_disc(1.0, 0.5).unwrap();
        let mut prev = PI - m.total_area();
        assert!(prev > 0.0);
        for _ in 0..4 {
            m = refine(&m);
            let defect = PI - m.total_area();
            assert!(defect > 0.0 && defect < prev);
            // defect ~ h²
            assert!(defect < 1.1 * m.h() * m.h());
            prev = defect;
        }
    }

    #[test]
    fn boundary_edges_have_outward_normals() {
        let m = mesh_disc(1.0, 0.2).unwrap();
        let edges = m.boundary_edges();
        assert_eq!(edges.len(), m.num_boundary_nodes());
        for e in edges {
            assert!(dot(e.normal, e.midpoint) > 0.9 * norm(e.midpoint));
        }
    }
}
