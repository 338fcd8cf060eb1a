//! Probe polyhedra on the qubit Bloch sphere and the radius of the largest
//! origin-centred ball inside their convex hull.
//!
//! Every vertex `v` stands for the projector `(1 + v·σ)/2`. Any measurement
//! whose Bloch vector lies inside the hull is a classical mixture of the
//! vertex measurements, so the inscribed radius `η` bounds how much the
//! probe set has to shrink the Bloch ball.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bloch::{MeasurementSet, PHYSICAL_TOL};
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

const ORIENT_TOL: f64 = 1e-12;
const COPLANAR_TOL: f64 = 1e-9;

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyhedronName {
    Octahedron,
    Icosahedron,
    Rhombicuboctahedron,
    Tetrahedron,
    Custom,
}

impl PolyhedronName {
    pub const BUILTIN: [PolyhedronName; 4] = [
        PolyhedronName::Octahedron,
        PolyhedronName::Icosahedron,
        PolyhedronName::Rhombicuboctahedron,
        PolyhedronName::Tetrahedron,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Octahedron => "octahedron",
            Self::Icosahedron => "icosahedron",
            Self::Rhombicuboctahedron => "rhombicuboctahedron",
            Self::Tetrahedron => "tetrahedron",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for PolyhedronName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolyhedronName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::BUILTIN.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::UnknownPolyhedron(s.to_string()))
    }
}

/// A named set of unit vectors on the Bloch sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronSpec {
    pub name: PolyhedronName,
    pub vertices: Vec<Vec3>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomFile {
    vertices: Vec<Vec3>,
}

impl PolyhedronSpec {
    /// Custom probe set; every vertex must have unit norm.
    pub fn custom(vertices: Vec<Vec3>) -> Result<Self> {
        for v in &vertices {
            if (norm(*v) - 1.0).abs() > PHYSICAL_TOL {
                return Err(Error::InvalidArgument(format!("vertex {v:?} does not lie on the unit sphere")));
            }
        }
        Ok(Self { name: PolyhedronName::Custom, vertices })
    }

    /// Parses `{"vertices": [[x, y, z], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CustomFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad polyhedron file: {e}")))?;
        Self::custom(file.vertices)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self.vertices.iter().map(|v| format!("[{}, {}, {}]", v[0], v[1], v[2])).collect();
        format!("{{\"vertices\": [{}]}}", rows.join(", "))
    }

    /// Whether `-v` is a vertex for every vertex `v`.
    pub fn is_antipodal(&self) -> bool {
        self.vertices.iter().all(|v| self.position(scale(*v, -1.0)).is_some())
    }

    fn position(&self, v: Vec3) -> Option<usize> {
        self.vertices.iter().position(|w| norm(sub(*w, v)) < COPLANAR_TOL)
    }

    pub fn hull(&self) -> Result<HullFacets> {
        convex_hull(&self.vertices)
    }

    /// Inscribed radius of the hull of the vertices.
    pub fn eta(&self) -> Result<f64> {
        inscribed_radius(&self.hull()?)
    }
}

/// Canonical unit-circumradius vertices of a built-in polyhedron.
pub fn polyhedron(name: PolyhedronName) -> Result<PolyhedronSpec> {
    let raw: Vec<Vec3> = match name {
        PolyhedronName::Octahedron => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        PolyhedronName::Icosahedron => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            let mut v = vec![];
            for (a, b) in [(1.0, phi), (1.0, -phi), (-1.0, phi), (-1.0, -phi)] {
                v.push([0.0, a, b]);
                v.push([a, b, 0.0]);
                v.push([b, 0.0, a]);
            }
            v
        }
        PolyhedronName::Rhombicuboctahedron => {
            let s = 1.0 + 2f64.sqrt();
            let mut v = vec![];
            for big in 0..3 {
                for signs in 0..8 {
                    let sign = |k: usize| if signs >> k & 1 == 0 { 1.0 } else { -1.0 };
                    let mut p = [sign(0), sign(1), sign(2)];
                    p[big] *= s;
                    v.push(p);
                }
            }
            v
        }
        PolyhedronName::Tetrahedron => vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
        PolyhedronName::Custom => return Err(Error::UnknownPolyhedron("custom (supply vertices instead)".into())),
    };
    let vertices = raw.into_iter().map(|p| scale(p, 1.0 / norm(p))).collect();
    Ok(PolyhedronSpec { name, vertices })
}

/// One binary projective measurement per antipodal vertex pair; the vertex
/// met first becomes outcome 0.
pub fn measurements_from_vertices(spec: &PolyhedronSpec) -> Result<Vec<MeasurementSet>> {
    let mut used = vec![false; spec.vertices.len()];
    let mut out = vec![];
    for (i, v) in spec.vertices.iter().enumerate() {
        if used[i] {
            continue;
        }
        let j = spec.position(scale(*v, -1.0)).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "vertex set of {} is not closed under negation ({v:?} has no antipode)",
                spec.name
            ))
        })?;
        used[i] = true;
        used[j] = true;
        out.push(MeasurementSet::qubit_projective(out.len(), *v)?);
    }
    Ok(out)
}

/// A supporting plane `{p : normal·p = offset}` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec3,
    pub offset: f64,
}

/// Facet description `{p : n·p ≤ c for every facet}` of a 3D convex hull.
/// Coplanar triangles are merged, so a square face is a single facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFacets {
    pub facets: Vec<Facet>,
}

impl HullFacets {
    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    /// Largest violation `n·p - c` over facets (non-positive when `p` is inside).
    pub fn violation(&self, p: Vec3) -> f64 {
        self.facets.iter().map(|f| dot(f.normal, p) - f.offset).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Triangle {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
}

impl Triangle {
    fn new(points: &[Vec3], v: [usize; 3]) -> Self {
        let n = cross(sub(points[v[1]], points[v[0]]), sub(points[v[2]], points[v[0]]));
        let len = norm(n);
        let normal = scale(n, 1.0 / len);
        Self { v, normal, offset: dot(normal, points[v[0]]) }
    }

    fn height(&self, p: Vec3) -> f64 {
        dot(self.normal, p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }
}

/// Incremental convex hull of a 3D point set. The origin must be strictly
/// interior, which all probe sets on the sphere satisfy when they span it.
pub fn convex_hull(points: &[Vec3]) -> Result<HullFacets> {
    if points.len() < 4 {
        return Err(Error::DegenerateHull(format!("{} points cannot span 3D", points.len())));
    }
    let extent = points.iter().map(|p| norm(*p)).fold(0.0, f64::max).max(1.0);
    let tol = ORIENT_TOL * extent;

    // Initial tetrahedron from extreme points.
    let i0 = 0;
    let i1 = (0..points.len())
        .max_by(|&a, &b| norm(sub(points[a], points[i0])).total_cmp(&norm(sub(points[b], points[i0]))))
        .unwrap();
    let line = sub(points[i1], points[i0]);
    if norm(line) <= tol {
        return Err(Error::DegenerateHull("all points coincide".into()));
    }
    let off_line = |k: usize| norm(cross(line, sub(points[k], points[i0])));
    let i2 = (0..points.len()).max_by(|&a, &b| off_line(a).total_cmp(&off_line(b))).unwrap();
    if off_line(i2) <= tol * norm(line) {
        return Err(Error::DegenerateHull("points are collinear".into()));
    }
    let plane_n = cross(line, sub(points[i2], points[i0]));
    let off_plane = |k: usize| dot(plane_n, sub(points[k], points[i0])).abs();
    let i3 = (0..points.len()).max_by(|&a, &b| off_plane(a).total_cmp(&off_plane(b))).unwrap();
    if off_plane(i3) <= tol * norm(plane_n) {
        return Err(Error::DegenerateHull("points are coplanar".into()));
    }

    let seed = [i0, i1, i2, i3];
    let centroid = scale(
        seed.iter().fold([0.0; 3], |acc, &k| [acc[0] + points[k][0], acc[1] + points[k][1], acc[2] + points[k][2]]),
        0.25,
    );
    let mut faces: Vec<Triangle> = vec![];
    for skip in 0..4 {
        let tri: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| seed[k]).collect();
        let mut t = Triangle::new(points, [tri[0], tri[1], tri[2]]);
        if t.height(centroid) > 0.0 {
            t = Triangle::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(t);
    }

    for (k, &p) in points.iter().enumerate() {
        if seed.contains(&k) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.height(p) > tol).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let visible_edges: Vec<(usize, usize)> =
            faces.iter().zip(&visible).filter(|(_, &v)| v).flat_map(|(f, _)| f.edges()).collect();
        let horizon: Vec<(usize, usize)> =
            visible_edges.iter().copied().filter(|&(a, b)| !visible_edges.contains(&(b, a))).collect();
        let mut next: Vec<Triangle> = faces.into_iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| f).collect();
        for (a, b) in horizon {
            next.push(Triangle::new(points, [a, b, k]));
        }
        faces = next;
    }

    let mut facets: Vec<Facet> = vec![];
    for t in &faces {
        let dup = facets
            .iter()
            .any(|f| norm(sub(f.normal, t.normal)) < COPLANAR_TOL && (f.offset - t.offset).abs() < COPLANAR_TOL);
        if !dup {
            facets.push(Facet { normal: t.normal, offset: t.offset });
        }
    }
    let min_offset = facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
    if min_offset <= ORIENT_TOL {
        return Err(Error::OriginNotInterior(min_offset));
    }
    Ok(HullFacets { facets })
}

/// Radius of the largest origin-centred ball inside the hull, `min_f c_f`.
///
/// For antipodally symmetric probe sets the origin-centred ball is also the
/// largest inscribed ball overall.
pub fn inscribed_radius(hull: &HullFacets) -> Result<f64> {
    let mut eta = f64::INFINITY;
    for f in &hull.facets {
        eta = eta.min(f.offset / norm(f.normal));
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::OriginNotInterior(eta));
    }
    Ok(eta)
}
