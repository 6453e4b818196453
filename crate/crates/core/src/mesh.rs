//! Structured triangulation of the space-time domain swept by the habitat.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// A point of the space-time plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Moving habitat edges `x = A(t)` and `x = A(t) + L(t)`.
    Lateral,
    /// Initial time `t = 0`.
    Bottom,
    /// Final time.
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    pub tag: BoundaryTag,
}

/// Interior edge shared by two triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub vertices: [usize; 2],
    /// `[K_i, K_j]`; the normal points out of `K_i`.
    pub triangles: [usize; 2],
    /// Unit normal `(n_x, n_t)` outward from `K_i`.
    pub normal: [f64; 2],
    pub length: f64,
}

impl Facet {
    /// True when the upwind (in time) side is `K_i`, i.e. `n_{i,t} ≥ 0`.
    pub fn upwind_is_first(&self) -> bool {
        self.normal[1] >= 0.0
    }
}

/// Conforming triangulation of `{(t, x): 0 < t < T, A(t) < x < A(t) + L(t)}`
/// with the boundary interpolated linearly between time levels.
///
/// Vertex `(k, j)` sits at `t_k = kT/nt`, `x = A(t_k) + (j/nx)L(t_k)`. Each
/// cell is split along its `(k, j)`–`(k+1, j+1)` diagonal into
/// `[(k,j), (k,j+1), (k+1,j+1)]` and `[(k,j), (k+1,j+1), (k+1,j)]`, both
/// counter-clockwise in the `(x, t)` plane.
#[derive(Debug, Clone)]
pub struct SpaceTimeMesh {
    pub nt: usize,
    pub nx: usize,
    pub horizon: f64,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    pub facets: Vec<Facet>,
    /// Element diameters `h_K`.
    pub diameters: Vec<f64>,
    /// Largest element diameter.
    pub h: f64,
}

impl SpaceTimeMesh {
    pub fn vertex_index(&self, k: usize, j: usize) -> usize {
        k * (self.nx + 1) + j
    }

    pub fn time_level(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.nt as f64
    }

    /// Cell `(k, j)` triangles: `2(k·nx + j)` and `2(k·nx + j) + 1`.
    pub fn cell_triangles(&self, k: usize, j: usize) -> [usize; 2] {
        let c = 2 * (k * self.nx + j);
        [c, c + 1]
    }

    /// Signed area in the `(x, t)` plane.
    pub fn area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangles[tri].map(|v| self.vertices[v]);
        0.5 * ((b.x - a.x) * (c.t - a.t) - (c.x - a.x) * (b.t - a.t))
    }

    /// `max h / h_K`.
    pub fn quasi_uniformity(&self) -> f64 {
        let min = self.diameters.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        self.h / min
    }

    /// Plain-text listing of vertices, triangles, boundary edges and facets.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# space-time mesh nt={} nx={} horizon={} h={:.6e}", self.nt, self.nx, self.horizon, self.h);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for (i, p) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.12e} {:.12e}", p.t, p.x);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {} {:.6e}", t[0], t[1], t[2], self.diameters[i]);
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for e in &self.boundary {
            let tag = match e.tag {
                BoundaryTag::Lateral => "lateral",
                BoundaryTag::Bottom => "bottom",
                BoundaryTag::Top => "top",
            };
            let _ = writeln!(s, "{} {} {} {tag}", e.vertices[0], e.vertices[1], e.triangle);
        }
        let _ = writeln!(s, "facets {}", self.facets.len());
        for f in &self.facets {
            let _ = writeln!(
                s,
                "{} {} {} {} {:.12e} {:.12e} {}",
                f.vertices[0],
                f.vertices[1],
                f.triangles[0],
                f.triangles[1],
                f.normal[0],
                f.normal[1],
                if f.upwind_is_first() { "up" } else { "down" }
            );
        }
        s
    }
}

pub fn build_mesh(s: &Scenario, nt: usize, nx: usize) -> Result<SpaceTimeMesh> {
    if nt == 0 || nx == 0 {
        return Err(Error::InvalidArgument(format!("mesh needs nt, nx >= 1 (got {nt}, {nx})")));
    }
    let horizon = s.horizon;
    let mut vertices = Vec::with_capacity((nt + 1) * (nx + 1));
    for k in 0..=nt {
        let t = horizon * k as f64 / nt as f64;
        let (a, l) = (s.motion.shift(t), s.motion.length(t));
        for j in 0..=nx {
            vertices.push(Point {
                t,
                x: a + l * j as f64 / nx as f64,
            });
        }
    }
    let vid = |k: usize, j: usize| k * (nx + 1) + j;
    let mut triangles = Vec::with_capacity(2 * nt * nx);
    for k in 0..nt {
        for j in 0..nx {
            triangles.push([vid(k, j), vid(k, j + 1), vid(k + 1, j + 1)]);
            triangles.push([vid(k, j), vid(k + 1, j + 1), vid(k + 1, j)]);
        }
    }
    let cell = |k: usize, j: usize| 2 * (k * nx + j);

    let mut mesh = SpaceTimeMesh {
        nt,
        nx,
        horizon,
        vertices,
        triangles,
        boundary: Vec::new(),
        facets: Vec::new(),
        diameters: Vec::new(),
        h: 0.0,
    };
    for tri in 0..mesh.triangles.len() {
        if !(mesh.area(tri) > 0.0) {
            return Err(Error::Numerical(format!("degenerate triangle {tri} (area {})", mesh.area(tri))));
        }
    }
    mesh.diameters = mesh
        .triangles
        .iter()
        .map(|t| {
            let p = t.map(|v| mesh.vertices[v]);
            (0..3).map(|e| dist(p[e], p[(e + 1) % 3])).fold(0.0, f64::max)
        })
        .collect();
    mesh.h = mesh.diameters.iter().fold(0.0, |m: f64, &v| m.max(v));

    for j in 0..nx {
        mesh.boundary.push(BoundaryEdge {
            vertices: [vid(0, j), vid(0, j + 1)],
            triangle: cell(0, j),
            tag: BoundaryTag::Bottom,
        });
        mesh.boundary.push(BoundaryEdge {
            vertices: [vid(nt, j), vid(nt, j + 1)],
            triangle: cell(nt - 1, j) + 1,
            tag: BoundaryTag::Top,
        });
    }
    for k in 0..nt {
        mesh.boundary.push(BoundaryEdge {
            vertices: [vid(k, 0), vid(k + 1, 0)],
            triangle: cell(k, 0) + 1,
            tag: BoundaryTag::Lateral,
        });
        mesh.boundary.push(BoundaryEdge {
            vertices: [vid(k, nx), vid(k + 1, nx)],
            triangle: cell(k, nx - 1),
            tag: BoundaryTag::Lateral,
        });
    }

    let mut facets = Vec::new();
    for k in 0..nt {
        for j in 0..nx {
            // diagonal
            facets.push(([vid(k, j), vid(k + 1, j + 1)], [cell(k, j), cell(k, j) + 1]));
            // edge (k, j+1)–(k+1, j+1) between neighbouring cells
            if j + 1 < nx {
                facets.push(([vid(k, j + 1), vid(k + 1, j + 1)], [cell(k, j), cell(k, j + 1) + 1]));
            }
            // time-level edge (k, j)–(k, j+1) between slabs
            if k > 0 {
                facets.push(([vid(k, j), vid(k, j + 1)], [cell(k, j), cell(k - 1, j) + 1]));
            }
        }
    }
    mesh.facets = facets
        .into_iter()
        .map(|(vertices, triangles)| {
            let (normal, length) = outward_normal(&mesh, triangles[0], vertices);
            Facet {
                vertices,
                triangles,
                normal,
                length,
            }
        })
        .collect();
    Ok(mesh)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.t - b.t).powi(2) + (a.x - b.x).powi(2)).sqrt()
}

/// Unit normal `(n_x, n_t)` of the edge, pointing away from the triangle's
/// third vertex, and the edge length.
pub(crate) fn outward_normal(mesh: &SpaceTimeMesh, tri: usize, edge: [usize; 2]) -> ([f64; 2], f64) {
    let p0 = mesh.vertices[edge[0]];
    let p1 = mesh.vertices[edge[1]];
    let opposite = mesh.triangles[tri]
        .iter()
        .copied()
        .find(|v| !edge.contains(v))
        .expect("edge belongs to triangle");
    let q = mesh.vertices[opposite];
    let (ex, et) = (p1.x - p0.x, p1.t - p0.t);
    let len = (ex * ex + et * et).sqrt();
    let mut n = [et / len, -ex / len];
    if n[0] * (q.x - p0.x) + n[1] * (q.t - p0.t) > 0.0 {
        n = [-n[0], -n[1]];
    }
    (n, len)
}

/// Facet operators for a scalar with traces `v_i` (from `K_i`) and `v_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetValues {
    /// `v_i n_{i,x} + v_j n_{j,x}`.
    pub jump_x: f64,
    /// `v_i n_{i,t} + v_j n_{j,t}`.
    pub jump_t: f64,
    /// `(v_i + v_j)/2`.
    pub average: f64,
    /// Upwind-in-time trace.
    pub upwind: f64,
    /// Downwind-in-time trace.
    pub downwind: f64,
}

/// Jump, average and up/downwind values across a facet with normal `n`
/// outward from `K_i` (so `n_j = −n`).
pub fn facet_calculus(v_i: f64, v_j: f64, normal: [f64; 2]) -> FacetValues {
    let up_first = normal[1] >= 0.0;
    FacetValues {
        jump_x: (v_i - v_j) * normal[0],
        jump_t: (v_i - v_j) * normal[1],
        average: 0.5 * (v_i + v_j),
        upwind: if up_first { v_i } else { v_j },
        downwind: if up_first { v_j } else { v_i },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{DomainMotion, PeriodicCoefficient};
    use proptest::prelude::*;

    fn scenario(motion: DomainMotion, horizon: f64) -> Scenario {
        let mut s = Scenario::fixed(
            1.0,
            1.0,
            PeriodicCoefficient::constant(1.0, 1.0),
            PeriodicCoefficient::constant(0.5, 1.0),
            1.0,
            horizon,
        );
        s.motion = motion;
        s
    }

    #[test]
    fn unit_square() {
        let m = build_mesh(&scenario(DomainMotion::Fixed { length: 1.0 }, 1.0), 1, 1).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.triangles.len(), 2);
        assert_eq!(m.facets.len(), 1);
        let count = |tag| m.boundary.iter().filter(|e| e.tag == tag).count();
        assert_eq!((count(BoundaryTag::Lateral), count(BoundaryTag::Bottom), count(BoundaryTag::Top)), (2, 1, 1));
        let n = m.facets[0].normal;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // diagonal of the unit square seen from the lower-right triangle
        assert!((n[0] + s).abs() < 1e-15 && (n[1] - s).abs() < 1e-15);
    }

    #[test]
    fn linear_shift_counts_and_normals() {
        let motion = DomainMotion::PowerShift {
            c: 2.0,
            exponent: 1.0,
            t0: 0.0,
            offset: 0.0,
            length: 3.0,
        };
        let m = build_mesh(&scenario(motion, 2.0), 4, 6).unwrap();
        assert_eq!(m.vertices.len(), 35);
        assert_eq!(m.triangles.len(), 48);
        // interior edges: diagonals + vertical + horizontal
        assert_eq!(m.facets.len(), 4 * 6 + 4 * 5 + 3 * 6);
        for f in &m.facets {
            assert!((f.normal[0].hypot(f.normal[1]) - 1.0).abs() < 1e-12);
            let (nj, _) = outward_normal(&m, f.triangles[1], f.vertices);
            assert!((nj[0] + f.normal[0]).abs() < 1e-14 && (nj[1] + f.normal[1]).abs() < 1e-14);
        }
        assert!(m.quasi_uniformity() <= 4.0);
    }

    #[test]
    fn area_matches_interpolated_length_integral() {
        let motion = DomainMotion::LinearGrowth { length: 1.0, slope: 0.3 };
        let s = scenario(motion, 11.0);
        let m = build_mesh(&s, 7, 5).unwrap();
        let total: f64 = (0..m.triangles.len()).map(|t| m.area(t)).sum();
        let exact = 11.0 + 0.3 * 121.0 / 2.0;
        assert!((total - exact).abs() < 1e-12 * exact);

        let sqrt_shift = DomainMotion::PowerShift {
            c: 1.0,
            exponent: 0.5,
            t0: 1.0,
            offset: -1.0,
            length: 2.0,
        };
        let m = build_mesh(&scenario(sqrt_shift, 5.0), 9, 4).unwrap();
        let total: f64 = (0..m.triangles.len()).map(|t| m.area(t)).sum();
        assert!((total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_halves_h() {
        let s = scenario(DomainMotion::Fixed { length: 1.5 }, 1.0);
        let coarse = build_mesh(&s, 8, 8).unwrap();
        let fine = build_mesh(&s, 16, 16).unwrap();
        let ratio = fine.h / coarse.h;
        assert!((ratio - 0.5).abs() < 0.05);
    }

    #[test]
    fn boundary_tags_lie_on_their_curves() {
        let motion = DomainMotion::PowerShift {
            c: 1.0,
            exponent: 1.35,
            t0: 0.0,
            offset: 0.0,
            length: 35.0,
        };
        let s = scenario(motion, 3.0);
        let m = build_mesh(&s, 6, 10).unwrap();
        for e in &m.boundary {
            for &v in &e.vertices {
                let p = m.vertices[v];
                match e.tag {
                    BoundaryTag::Bottom => assert_eq!(p.t, 0.0),
                    BoundaryTag::Top => assert_eq!(p.t, 3.0),
                    BoundaryTag::Lateral => {
                        let (a, b) = s.motion.bounds(p.t);
                        assert!((p.x - a).abs() < 1e-12 || (p.x - b).abs() < 1e-12);
                    }
                }
            }
        }
        assert_eq!(m.boundary.len(), 2 * 6 + 2 * 10);
    }

    #[test]
    fn dump_lists_everything() {
        let m = build_mesh(&scenario(DomainMotion::Fixed { length: 1.0 }, 1.0), 1, 1).unwrap();
        let text = m.dump();
        assert!(text.contains("vertices 4") && text.contains("triangles 2") && text.contains("facets 1"));
    }

    #[test]
    fn facet_calculus_example() {
        let f = facet_calculus(2.0, 1.0, [0.0, 1.0]);
        assert_eq!(f.upwind, 2.0);
        assert_eq!(f.jump_t, 1.0);
        let sq = facet_calculus(4.0, 1.0, [0.0, 1.0]);
        assert_eq!(f.upwind * f.jump_t - 0.5 * sq.jump_t, 0.5);
        let same = facet_calculus(3.0, 3.0, [0.6, -0.8]);
        assert_eq!((same.jump_x, same.jump_t, same.average, same.upwind, same.downwind), (0.0, 0.0, 3.0, 3.0, 3.0));
    }

    fn unit_normal() -> impl Strategy<Value = [f64; 2]> {
        (0.0f64..std::f64::consts::TAU).prop_map(|a| [a.cos(), a.sin()])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn jump_identities(ui in -5.0f64..5.0, uj in -5.0f64..5.0, vi in -5.0f64..5.0, vj in -5.0f64..5.0, n in unit_normal()) {
            let u = facet_calculus(ui, uj, n);
            let v = facet_calculus(vi, vj, n);
            let uv = facet_calculus(ui * vi, uj * vj, n);
            let vv = facet_calculus(vi * vi, vj * vj, n);
            let tol = 1e-13 * 100.0;
            prop_assert!((uv.jump_x - (u.average * v.jump_x + v.average * u.jump_x)).abs() <= tol);
            prop_assert!((uv.jump_t - (u.upwind * v.jump_t + v.downwind * u.jump_t)).abs() <= tol);
            let plain_jump = vi - vj;
            prop_assert!((v.upwind * v.jump_t - 0.5 * vv.jump_t - 0.5 * n[1].abs() * plain_jump * plain_jump).abs() <= tol);
        }
    }
}
