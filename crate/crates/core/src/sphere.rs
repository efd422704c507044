//! Geometry of the unit 2-sphere and of discrete closed curves on it:
//! exponential map, Levi-Civita transport, arclength resampling, and a
//! contact-robust self-intersection counter for short great-circle segments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec3::{UnitVec3, Vec3, NEAR_ZERO};

/// Minimum number of vertices for a closed discrete curve.
pub const MIN_VERTICES: usize = 16;

/// Consecutive vertices must be separated by more than this geodesic gap.
pub const MIN_EDGE_GAP: f64 = 1e-10;

/// Segments longer than this are rejected by the intersection tests.
const MAX_SEGMENT_LENGTH: f64 = PI / 8.0;

/// Two strands closer than this are considered in contact.
const CONTACT_TOL: f64 = 1e-9;

/// Contact points closer than this count as one crossing.
const CLUSTER_TOL: f64 = 1e-6;

/// A closed curve on the sphere stored as a cyclic vertex list. Index
/// arithmetic is mod N everywhere; vertex i and vertex i+N are the same
/// point.
#[derive(Clone, Debug)]
pub struct DiscreteCurve {
    vertices: Vec<UnitVec3>,
}

impl DiscreteCurve {
    pub fn new(vertices: Vec<UnitVec3>) -> Result<Self> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::TooFewVertices { min: MIN_VERTICES, got: vertices.len() });
        }
        let n = vertices.len();
        for i in 0..n {
            let gap = vertices[i].geodesic_distance(vertices[(i + 1) % n]);
            if !(gap > MIN_EDGE_GAP) {
                return Err(Error::DegenerateEdge { index: i, length: gap });
            }
        }
        Ok(DiscreteCurve { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[UnitVec3] {
        &self.vertices
    }

    /// Vertex with cyclic index arithmetic; accepts any signed offset.
    pub fn vertex(&self, i: isize) -> UnitVec3 {
        let n = self.vertices.len() as isize;
        self.vertices[(i.rem_euclid(n)) as usize]
    }

    /// Geodesic length of edge i (from vertex i to vertex i+1).
    pub fn edge_length(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        self.vertices[i % n].geodesic_distance(self.vertices[(i + 1) % n])
    }

    /// Serializes to a JSON array of [x, y, z] triples.
    pub fn to_json(&self) -> String {
        let raw: Vec<[f64; 3]> = self.vertices.iter().map(|v| v.as_vec3().as_array()).collect();
        serde_json::to_string(&raw).expect("vector of triples always serializes")
    }

    /// Loads a curve from the JSON triple format, re-normalizing every vertex
    /// onto the sphere before validation.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<[f64; 3]> = serde_json::from_str(text)?;
        let mut vertices = Vec::with_capacity(raw.len());
        for triple in raw {
            vertices.push(UnitVec3::new(Vec3::from_array(triple))?);
        }
        DiscreteCurve::new(vertices)
    }

    /// Reverses the traversal orientation (same point set).
    pub fn reversed(&self) -> DiscreteCurve {
        let mut v = self.vertices.clone();
        v.reverse();
        DiscreteCurve { vertices: v }
    }

    /// Applies a rotation (given as axis and angle) to every vertex.
    pub fn rotated(&self, axis: UnitVec3, angle: f64) -> DiscreteCurve {
        let vertices = self
            .vertices
            .iter()
            .map(|v| UnitVec3::new_unchecked(rotate_about_axis(v.as_vec3(), axis, angle)))
            .collect();
        DiscreteCurve { vertices }
    }
}

/// An orthonormal frame adapted to a curve point: `normal = point x tangent`.
#[derive(Clone, Copy, Debug)]
pub struct TangentFrame {
    pub point: UnitVec3,
    pub tangent: UnitVec3,
    pub normal: UnitVec3,
}

impl TangentFrame {
    pub fn new(point: UnitVec3, tangent: UnitVec3) -> Result<Self> {
        let defect = point.dot(tangent).abs();
        if defect > 1e-10 {
            return Err(Error::NotTangent(defect));
        }
        let normal = UnitVec3::new(point.cross(tangent))?;
        Ok(TangentFrame { point, tangent, normal })
    }
}

/// Radial projection onto the sphere.
pub fn project_to_sphere(v: Vec3) -> Result<UnitVec3> {
    UnitVec3::new(v)
}

/// Riemannian exponential map: walks the geodesic from `base` with initial
/// velocity `w` for time 1. Requires `w` tangent to the sphere at `base`
/// (within 1e-10); returns `base` itself for displacements below 1e-14.
pub fn exp_map(base: UnitVec3, w: Vec3) -> Result<UnitVec3> {
    let r = w.norm();
    if r < NEAR_ZERO {
        return Ok(base);
    }
    let defect = w.dot(base.as_vec3()).abs();
    if defect > 1e-10 * (1.0 + r) {
        return Err(Error::NotTangent(defect));
    }
    // Kill the sub-tolerance radial component so the output is exactly unit.
    let t = w.reject_from_unit(base.as_vec3());
    let tn = t.norm();
    if tn < NEAR_ZERO {
        return Ok(base);
    }
    let dir = t * (1.0 / tn);
    UnitVec3::new(base.as_vec3() * r.cos() + dir * r.sin())
}

/// Rodrigues rotation of `v` about the unit `axis` by `angle`.
pub(crate) fn rotate_about_axis(v: Vec3, axis: UnitVec3, angle: f64) -> Vec3 {
    let a = axis.as_vec3();
    let (s, c) = angle.sin_cos();
    v * c + a.cross(v) * s + a * (a.dot(v) * (1.0 - c))
}

/// Levi-Civita parallel transport of `v` along the geodesic from `from` to
/// `to`: the rotation about `from x to` by the geodesic angle. Norms and
/// pairwise inner products are preserved exactly up to rounding.
pub fn parallel_transport(v: Vec3, from: UnitVec3, to: UnitVec3) -> Result<Vec3> {
    let cross = from.cross(to);
    let s = cross.norm();
    let c = from.dot(to);
    let angle = s.atan2(c);
    if PI - angle <= 1e-8 {
        return Err(Error::AntipodalPoints);
    }
    if s < NEAR_ZERO {
        return Ok(v);
    }
    let axis = UnitVec3::new_unchecked(cross * (1.0 / s));
    Ok(rotate_about_axis(v, axis, angle))
}

/// Spherical linear interpolation between two non-antipodal unit vectors.
fn slerp(a: UnitVec3, b: UnitVec3, t: f64) -> UnitVec3 {
    let theta = a.geodesic_distance(b);
    if theta < 1e-12 {
        return a;
    }
    let s = theta.sin();
    let va = a.as_vec3() * (((1.0 - t) * theta).sin() / s);
    let vb = b.as_vec3() * ((t * theta).sin() / s);
    UnitVec3::new_unchecked(va + vb)
}

/// Total geodesic length: the sum of great-circle edge lengths.
pub fn curve_length(c: &DiscreteCurve) -> f64 {
    (0..c.len()).map(|i| c.edge_length(i)).sum()
}

/// Resamples the curve to `n` vertices with uniform geodesic spacing along
/// the existing piecewise-geodesic path. Total length is preserved to second
/// order in the edge length; already-uniform curves are fixed points.
pub fn resample_uniform(c: &DiscreteCurve, n: usize) -> Result<DiscreteCurve> {
    if n < MIN_VERTICES {
        return Err(Error::TooFewVertices { min: MIN_VERTICES, got: n });
    }
    let m = c.len();
    let mut cumulative = Vec::with_capacity(m + 1);
    cumulative.push(0.0);
    for i in 0..m {
        let prev = cumulative[i];
        cumulative.push(prev + c.edge_length(i));
    }
    let total = cumulative[m];

    let mut vertices = Vec::with_capacity(n);
    let mut edge = 0usize;
    for j in 0..n {
        let target = total * j as f64 / n as f64;
        while edge + 1 < m && cumulative[edge + 1] <= target {
            edge += 1;
        }
        let span = cumulative[edge + 1] - cumulative[edge];
        let t = if span > 0.0 { (target - cumulative[edge]) / span } else { 0.0 };
        vertices.push(slerp(c.vertex(edge as isize), c.vertex(edge as isize + 1), t));
    }
    DiscreteCurve::new(vertices)
}

// ---------------------------------------------------------------------------
// Self-intersection counting
// ---------------------------------------------------------------------------

struct Contact {
    seg_a: usize,
    seg_b: usize,
    point: Vec3,
}

/// Distance from point `p` to the shorter arc between `a` and `b`.
fn point_to_arc_distance(p: UnitVec3, a: UnitVec3, b: UnitVec3) -> f64 {
    let n = a.cross(b);
    let nn = n.norm();
    if nn < NEAR_ZERO {
        return p.geodesic_distance(a);
    }
    let n_hat = n * (1.0 / nn);
    let q = p.as_vec3().reject_from_unit(n_hat);
    let qn = q.norm();
    if qn > NEAR_ZERO {
        let q = UnitVec3::new_unchecked(q * (1.0 / qn));
        let arc = a.geodesic_distance(b);
        let inside = a.geodesic_distance(q) + q.geodesic_distance(b) <= arc + 1e-12;
        if inside {
            return p.as_vec3().dot(n_hat).asin().abs();
        }
    }
    p.geodesic_distance(a).min(p.geodesic_distance(b))
}

fn on_arc(p: UnitVec3, a: UnitVec3, b: UnitVec3) -> bool {
    a.geodesic_distance(p) + p.geodesic_distance(b) <= a.geodesic_distance(b) + 1e-12
}

/// Contact between two short arcs: a proper transverse crossing point, or a
/// touch/overlap within `CONTACT_TOL`.
fn segment_contact(a0: UnitVec3, a1: UnitVec3, b0: UnitVec3, b1: UnitVec3) -> Option<Vec3> {
    let na = a0.cross(a1);
    let nb = b0.cross(b1);
    let sa0 = nb.dot(a0.as_vec3());
    let sa1 = nb.dot(a1.as_vec3());
    let sb0 = na.dot(b0.as_vec3());
    let sb1 = na.dot(b1.as_vec3());

    let degeneracy = 1e-13;
    let strict = sa0.abs() > degeneracy
        && sa1.abs() > degeneracy
        && sb0.abs() > degeneracy
        && sb1.abs() > degeneracy;

    if strict && sa0 * sa1 < 0.0 && sb0 * sb1 < 0.0 {
        // Both arcs straddle the other's great circle; locate the candidate
        // intersection direction and keep it only if it lies on both arcs.
        let d = na.cross(nb);
        if d.norm() > NEAR_ZERO {
            let mut t = UnitVec3::new_unchecked(d * (1.0 / d.norm()));
            if t.as_vec3().dot(a0.as_vec3() + a1.as_vec3()) < 0.0 {
                t = t.antipode();
            }
            if on_arc(t, a0, a1) && on_arc(t, b0, b1) {
                return Some(t.as_vec3());
            }
        }
        return None;
    }

    // Near-degenerate configuration: measure actual closeness. For
    // non-crossing short arcs the minimum distance is attained at one of the
    // four endpoints.
    let candidates = [
        (point_to_arc_distance(a0, b0, b1), a0),
        (point_to_arc_distance(a1, b0, b1), a1),
        (point_to_arc_distance(b0, a0, a1), b0),
        (point_to_arc_distance(b1, a0, a1), b1),
    ];
    let (dist, point) = candidates
        .iter()
        .fold((f64::INFINITY, a0), |best, &(d, p)| if d < best.0 { (d, p) } else { best });
    if dist <= CONTACT_TOL {
        return Some(point.as_vec3());
    }
    None
}

fn cyclic_close(a: usize, b: usize, n: usize) -> bool {
    let d = (a as isize - b as isize).rem_euclid(n as isize) as usize;
    d <= 1 || d >= n - 1
}

/// Counts self-intersection points of the curve: transverse crossings between
/// non-adjacent great-circle segments, with touching and overlapping contacts
/// merged into single events. Contacts closer than 1e-6 (or produced by
/// index-adjacent segment pairs) are clustered and counted once.
pub fn self_intersection_count(c: &DiscreteCurve) -> Result<usize> {
    let n = c.len();
    let mut mid = Vec::with_capacity(n);
    let mut radius = Vec::with_capacity(n);
    for i in 0..n {
        let len = c.edge_length(i);
        if len <= MIN_EDGE_GAP || len >= MAX_SEGMENT_LENGTH {
            return Err(Error::DegenerateSegment { index: i, length: len });
        }
        let m = c.vertex(i as isize).as_vec3() + c.vertex(i as isize + 1).as_vec3();
        mid.push(UnitVec3::new_unchecked(m * (1.0 / m.norm())));
        radius.push(0.5 * len);
    }

    let mut contacts: Vec<Contact> = Vec::new();
    for i in 0..n {
        for j in (i + 2)..n {
            if cyclic_close(i, j, n) {
                continue;
            }
            // Cheap bounding-cap rejection.
            let reach = radius[i] + radius[j] + 10.0 * CLUSTER_TOL;
            if mid[i].geodesic_distance(mid[j]) > reach {
                continue;
            }
            let (a0, a1) = (c.vertex(i as isize), c.vertex(i as isize + 1));
            let (b0, b1) = (c.vertex(j as isize), c.vertex(j as isize + 1));
            if let Some(point) = segment_contact(a0, a1, b0, b1) {
                contacts.push(Contact { seg_a: i, seg_b: j, point });
            }
        }
    }

    // Union-find over contact events: merge events produced by neighboring
    // segment pairs (one crossing often shows up in two adjacent pairs, and a
    // tangential overlap shows up in a whole chain of them) and events whose
    // points nearly coincide.
    let m = contacts.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for x in 0..m {
        for y in (x + 1)..m {
            let (ax, bx) = (contacts[x].seg_a, contacts[x].seg_b);
            let (ay, by) = (contacts[y].seg_a, contacts[y].seg_b);
            let index_adjacent = (cyclic_close(ax, ay, n) && cyclic_close(bx, by, n))
                || (cyclic_close(ax, by, n) && cyclic_close(bx, ay, n));
            let point_close = (contacts[x].point - contacts[y].point).norm() <= CLUSTER_TOL;
            if index_adjacent || point_close {
                let rx = find(&mut parent, x);
                let ry = find(&mut parent, y);
                if rx != ry {
                    parent[rx] = ry;
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}

// ---------------------------------------------------------------------------
// Reference curves
// ---------------------------------------------------------------------------

/// The equator z = 0 traversed counterclockwise (seen from +z), covered
/// `covers` times with `n` vertices in total.
pub fn covered_great_circle(covers: usize, n: usize) -> Result<DiscreteCurve> {
    if n < MIN_VERTICES {
        return Err(Error::TooFewVertices { min: MIN_VERTICES, got: n });
    }
    let mut vertices = Vec::with_capacity(n);
    for j in 0..n {
        let theta = 2.0 * PI * covers as f64 * j as f64 / n as f64;
        vertices.push(UnitVec3::new_unchecked(Vec3::new(theta.cos(), theta.sin(), 0.0)));
    }
    DiscreteCurve::new(vertices)
}

/// Great circle (single cover of the equator).
pub fn great_circle(n: usize) -> Result<DiscreteCurve> {
    covered_great_circle(1, n)
}

/// Circle of constant polar angle `theta` about the +z axis, traversed
/// counterclockwise. Geodesic curvature is cot(theta) against the
/// `point x tangent` normal.
pub fn latitude_circle(theta: f64, n: usize) -> Result<DiscreteCurve> {
    if n < MIN_VERTICES {
        return Err(Error::TooFewVertices { min: MIN_VERTICES, got: n });
    }
    let (st, ct) = (theta.sin(), theta.cos());
    let mut vertices = Vec::with_capacity(n);
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        vertices.push(UnitVec3::new_unchecked(Vec3::new(st * phi.cos(), st * phi.sin(), ct)));
    }
    DiscreteCurve::new(vertices)
}

/// A figure-eight: two circles of angular radius `rho` tangent at (1,0,0),
/// lying on opposite sides of their common tangent direction, traversed as a
/// single regular closed curve. It touches itself exactly once.
pub fn figure_eight(rho: f64, n: usize) -> Result<DiscreteCurve> {
    let half = n / 2;
    if half * 2 != n || half < MIN_VERTICES {
        return Err(Error::TooFewVertices { min: 2 * MIN_VERTICES, got: n });
    }
    let p = UnitVec3::from_components(1.0, 0.0, 0.0)?;
    let center_a = UnitVec3::from_components(rho.cos(), 0.0, rho.sin())?;
    let center_b = UnitVec3::from_components(rho.cos(), 0.0, -rho.sin())?;
    let mut vertices = Vec::with_capacity(n);
    for j in 0..half {
        let phi = 2.0 * PI * j as f64 / half as f64;
        vertices.push(UnitVec3::new_unchecked(rotate_about_axis(p.as_vec3(), center_a, phi)));
    }
    for j in 0..half {
        let phi = 2.0 * PI * j as f64 / half as f64;
        vertices.push(UnitVec3::new_unchecked(rotate_about_axis(p.as_vec3(), center_b, -phi)));
    }
    DiscreteCurve::new(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::from_components(x, y, z).unwrap()
    }

    #[test]
    fn projection_examples() {
        let p = project_to_sphere(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((p.as_vec3() - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        let q = project_to_sphere(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(q.as_vec3(), Vec3::new(0.0, 0.0, 1.0));
        let s = 1.0 / 3.0_f64.sqrt();
        let r = project_to_sphere(Vec3::new(s, s, s)).unwrap();
        assert!((r.as_vec3().norm() - 1.0).abs() < 1e-15);
        assert!(project_to_sphere(Vec3::ZERO).is_err());
    }

    #[test]
    fn exp_map_examples() {
        let base = unit(1.0, 0.0, 0.0);
        let quarter = exp_map(base, Vec3::new(0.0, FRAC_PI_2, 0.0)).unwrap();
        assert!((quarter.as_vec3() - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);

        assert_eq!(exp_map(base, Vec3::ZERO).unwrap(), base);

        let antipode = exp_map(base, Vec3::new(0.0, PI, 0.0)).unwrap();
        assert!((antipode.as_vec3() - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);

        assert!(matches!(
            exp_map(base, Vec3::new(0.5, 0.5, 0.0)),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn exp_map_small_time_recovers_velocity() {
        let base = unit(0.2, -0.4, 0.6);
        let w = Vec3::new(0.3, 0.5, 0.1).reject_from_unit(base.as_vec3());
        let t = 1e-4;
        let moved = exp_map(base, w * t).unwrap();
        let fd = (moved.as_vec3() - base.as_vec3()) * (1.0 / t);
        assert!((fd - w).norm() < 1e-6);
    }

    #[test]
    fn transport_preserves_norms_and_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let from = unit(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let to = unit(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if PI - from.geodesic_distance(to) < 1e-3 {
                continue;
            }
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.7)
                .reject_from_unit(from.as_vec3());
            let w = Vec3::new(0.1, rng.gen_range(-1.0..1.0), -0.3).reject_from_unit(from.as_vec3());
            let tv = parallel_transport(v, from, to).unwrap();
            let tw = parallel_transport(w, from, to).unwrap();
            assert!((tv.norm() - v.norm()).abs() < 1e-12);
            assert!((tv.dot(tw) - v.dot(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn transport_identity_and_antipodal() {
        let a = unit(0.0, 1.0, 0.0);
        let v = Vec3::new(1.0, 0.0, 0.5);
        assert_eq!(parallel_transport(v, a, a).unwrap(), v);
        assert!(matches!(
            parallel_transport(v, a, a.antipode()),
            Err(Error::AntipodalPoints)
        ));
    }

    #[test]
    fn transport_holonomy_around_octant_triangle() {
        // Geodesic triangle with three right angles encloses area pi/2; the
        // round trip rotates tangent vectors by exactly that angle.
        let a = unit(1.0, 0.0, 0.0);
        let b = unit(0.0, 1.0, 0.0);
        let c = unit(0.0, 0.0, 1.0);
        let v0 = Vec3::new(0.0, 0.3, 0.4); // tangent at a
        let v1 = parallel_transport(v0, a, b).unwrap();
        let v2 = parallel_transport(v1, b, c).unwrap();
        let v3 = parallel_transport(v2, c, a).unwrap();
        let cos_angle = v0.dot(v3) / (v0.norm() * v3.norm());
        let angle = cos_angle.clamp(-1.0, 1.0).acos();
        assert!(
            (angle - FRAC_PI_2).abs() < 1e-12,
            "holonomy angle {angle}, expected {FRAC_PI_2}"
        );
    }

    #[test]
    fn great_circle_length() {
        let c = great_circle(256).unwrap();
        assert!((curve_length(&c) - 2.0 * PI).abs() < 1e-4);
        let d = covered_great_circle(2, 512).unwrap();
        assert!((curve_length(&d) - 4.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn latitude_length_matches_formula() {
        for &theta in &[0.4, FRAC_PI_2, 2.0] {
            let c = latitude_circle(theta, 512).unwrap();
            assert!(
                (curve_length(&c) - 2.0 * PI * theta.sin()).abs() < 1e-3,
                "latitude {theta}"
            );
        }
    }

    #[test]
    fn resample_is_fixed_point_on_uniform_input() {
        let c = great_circle(64).unwrap();
        let r = resample_uniform(&c, 64).unwrap();
        for i in 0..64 {
            let d = (r.vertices()[i].as_vec3() - c.vertices()[i].as_vec3()).norm();
            assert!(d < 1e-9, "vertex {i} moved {d}");
        }
    }

    #[test]
    fn resample_preserves_length() {
        let c = great_circle(64).unwrap();
        let r = resample_uniform(&c, 128).unwrap();
        assert!((curve_length(&r) - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn resample_fixes_nonuniform_sampling() {
        // Strongly non-uniform parametrization of the equator.
        let mut vertices = Vec::new();
        for j in 0..200 {
            let u = j as f64 / 200.0;
            let theta = 2.0 * PI * (u + 0.35 * (2.0 * PI * u).sin() / (2.0 * PI));
            vertices.push(unit(theta.cos(), theta.sin(), 0.0));
        }
        let c = DiscreteCurve::new(vertices).unwrap();
        let r = resample_uniform(&c, 256).unwrap();
        assert!((curve_length(&r) - 2.0 * PI).abs() < 1e-3);
        let lengths: Vec<f64> = (0..r.len()).map(|i| r.edge_length(i)).collect();
        let min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = lengths.iter().cloned().fold(0.0, f64::max);
        assert!((max - min) / max < 0.01, "spread {}", (max - min) / max);
    }

    #[test]
    fn resample_rejects_tiny_target() {
        let c = great_circle(64).unwrap();
        assert!(matches!(
            resample_uniform(&c, 8),
            Err(Error::TooFewVertices { .. })
        ));
    }

    #[test]
    fn embedded_circle_has_no_self_intersections() {
        let c = great_circle(256).unwrap();
        assert_eq!(self_intersection_count(&c).unwrap(), 0);
        let l = latitude_circle(0.9, 256).unwrap();
        assert_eq!(self_intersection_count(&l).unwrap(), 0);
    }

    #[test]
    fn figure_eight_touches_once() {
        let c = figure_eight(0.6, 512).unwrap();
        assert_eq!(self_intersection_count(&c).unwrap(), 1);
    }

    #[test]
    fn oversized_segments_are_rejected() {
        let c = great_circle(16).unwrap(); // edges of length 2 pi / 16 > pi / 8
        assert!(matches!(
            self_intersection_count(&c),
            Err(Error::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn json_round_trip_renormalizes() {
        let c = latitude_circle(1.1, 64).unwrap();
        let text = c.to_json();
        let back = DiscreteCurve::from_json(&text).unwrap();
        assert_eq!(back.len(), 64);
        for (a, b) in c.vertices().iter().zip(back.vertices()) {
            assert!((a.as_vec3() - b.as_vec3()).norm() < 1e-14);
        }
        // Loader accepts un-normalized triples.
        let scaled = DiscreteCurve::from_json(
            &serde_json::to_string(
                &c.vertices().iter().map(|v| (v.as_vec3() * 3.0).as_array()).collect::<Vec<_>>(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!((curve_length(&scaled) - curve_length(&c)).abs() < 1e-12);
        assert!(DiscreteCurve::from_json("not json").is_err());
    }

    #[test]
    fn curve_validation_rejects_duplicates() {
        let mut vertices = great_circle(64).unwrap().vertices().to_vec();
        vertices[10] = vertices[11];
        assert!(matches!(
            DiscreteCurve::new(vertices),
            Err(Error::DegenerateEdge { .. })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn exp_map_outputs_stay_unit(
            bx in -1.0..1.0f64, by in -1.0..1.0f64, bz in 0.1..1.0f64,
            wx in -2.0..2.0f64, wy in -2.0..2.0f64, wz in -2.0..2.0f64,
        ) {
            let base = UnitVec3::from_components(bx, by, bz).unwrap();
            let w = Vec3::new(wx, wy, wz).reject_from_unit(base.as_vec3());
            let out = exp_map(base, w).unwrap();
            proptest::prop_assert!((out.as_vec3().norm() - 1.0).abs() < 1e-12);
        }
    }
}
