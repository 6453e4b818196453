use std::io::Write;

use rayon::prelude::*;

use super::assemble::lerp;
use super::space::{shape, Element, P2Space};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Point, SpaceTimeMesh};
use crate::quadrature::{UnitRule, TRIANGLE_RULE};

/// `(value, ∂_x, ∂_t)` at a point.
pub type Jet = [f64; 3];

/// A P2 dof vector `w` on a mesh, read as `u = w e^{ct}`.
#[derive(Debug, Clone, Copy)]
pub struct DofFunction<'a> {
    pub mesh: &'a SpaceTimeMesh,
    pub space: P2Space,
    pub values: &'a [f64],
    pub c: f64,
}

impl DofFunction<'_> {
    /// Jet of `u` restricted to triangle `tri` at `p` (which may lie on its boundary).
    pub fn jet(&self, tri: usize, p: Point) -> Jet {
        let el = Element::new(self.mesh, tri);
        let sh = shape(&el, el.barycentric(p));
        let dofs = self.space.element_dofs(tri);
        let mut w = [0.0; 3];
        for a in 0..6 {
            let c = self.values[dofs[a]];
            w[0] += c * sh.value[a];
            w[1] += c * sh.dx[a];
            w[2] += c * sh.dt[a];
        }
        if self.c == 0.0 {
            return w;
        }
        let e = (self.c * p.t).exp();
        [e * w[0], e * w[1], e * (w[2] + self.c * w[0])]
    }
}

/// Triangle containing `(t, x)` and the point itself, or `None` outside the meshed domain.
pub fn locate(mesh: &SpaceTimeMesh, t: f64, x: f64) -> Option<usize> {
    let dt = mesh.horizon / mesh.nt as f64;
    if !(t >= -1e-12 * mesh.horizon && t <= mesh.horizon * (1.0 + 1e-12)) {
        return None;
    }
    let k = ((t / dt).floor().max(0.0) as usize).min(mesh.nt - 1);
    let tau = (t - mesh.time_level(k)) / dt;
    let edge = |j: usize| {
        let a = mesh.vertices[mesh.vertex_index(k, j)].x;
        let b = mesh.vertices[mesh.vertex_index(k + 1, j)].x;
        a + tau * (b - a)
    };
    let (lo, hi) = (edge(0), edge(mesh.nx));
    let tol = 1e-12 * (hi - lo);
    if x < lo - tol || x > hi + tol {
        return None;
    }
    let j = ((((x - lo) / (hi - lo)) * mesh.nx as f64).floor().max(0.0) as usize).min(mesh.nx - 1);
    let [t1, t2] = mesh.cell_triangles(k, j);
    let l = Element::new(mesh, t1).barycentric(Point { t, x });
    Some(if l.iter().all(|&v| v >= -1e-10) { t1 } else { t2 })
}

/// Discrete solution `u_h = (w_h + g_h) e^{c t}`.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub mesh: SpaceTimeMesh,
    pub space: P2Space,
    /// Shifted dof values `w_h + g_h`.
    pub w: Vec<f64>,
    pub c_shift: f64,
    pub theta: f64,
    pub delta: f64,
    pub local_h: bool,
    /// `‖A x − b‖ / ‖b‖` of the linear solve.
    pub residual: f64,
}

/// Values of the solution along `t = const`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl SolutionField {
    pub fn function(&self) -> DofFunction<'_> {
        DofFunction {
            mesh: &self.mesh,
            space: self.space,
            values: &self.w,
            c: self.c_shift,
        }
    }

    /// `u_h(t, x)`; zero outside the meshed domain.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match locate(&self.mesh, t, x) {
            Some(tri) => self.function().jet(tri, Point { t, x })[0],
            None => 0.0,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.mesh.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("t = {t} outside [0, {}]", self.mesh.horizon)))
        }
    }

    /// Chord of cell `j` at time `t` split where it crosses the cell diagonal.
    fn chord_pieces(&self, t: f64) -> Vec<(f64, f64)> {
        let m = &self.mesh;
        let dt = m.horizon / m.nt as f64;
        let k = ((t / dt).floor() as usize).min(m.nt - 1);
        let tau = (t - m.time_level(k)) / dt;
        let x = |kk: usize, j: usize| m.vertices[m.vertex_index(kk, j)].x;
        let at = |j: usize| x(k, j) + tau * (x(k + 1, j) - x(k, j));
        let mut pieces = Vec::with_capacity(2 * m.nx);
        for j in 0..m.nx {
            let (a, b) = (at(j), at(j + 1));
            let diag = x(k, j) + tau * (x(k + 1, j + 1) - x(k, j));
            if diag > a && diag < b {
                pieces.push((a, diag));
                pieces.push((diag, b));
            } else {
                pieces.push((a, b));
            }
        }
        pieces
    }

    /// Profile on `[A(t), A(t)+L(t)]` (boundary interpolated linearly between
    /// time levels) with `per_cell` samples per mesh cell plus the right end.
    pub fn slice(&self, t: f64, per_cell: usize) -> Result<Slice> {
        self.check_time(t)?;
        let per_cell = per_cell.max(1);
        let m = &self.mesh;
        let dt = m.horizon / m.nt as f64;
        let k = ((t / dt).floor() as usize).min(m.nt - 1);
        let tau = (t - m.time_level(k)) / dt;
        let x = |j: usize| {
            let a = m.vertices[m.vertex_index(k, j)].x;
            a + tau * (m.vertices[m.vertex_index(k + 1, j)].x - a)
        };
        let (lo, hi) = (x(0), x(m.nx));
        let n = per_cell * m.nx;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let u = xs.iter().map(|&xv| self.eval(t, xv.clamp(lo, hi))).collect();
        Ok(Slice { t, x: xs, u })
    }

    /// `‖u_h(t, ·)‖_{L²}` integrated exactly piece by piece.
    pub fn slice_l2(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let gauss = UnitRule::new(4);
        let mut sum = 0.0;
        for (a, b) in self.chord_pieces(t) {
            let mid = 0.5 * (a + b);
            let Some(tri) = locate(&self.mesh, t, mid) else { continue };
            let f = self.function();
            sum += gauss.integrate(a, b, |x| f.jet(tri, Point { t, x })[0].powi(2));
        }
        Ok(sum.sqrt())
    }

    /// `max |u_h(t, ·)|` over a fine sample of the slice.
    pub fn slice_linf(&self, t: f64) -> Result<f64> {
        Ok(self.slice(t, 8)?.u.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    }

    /// `‖u_h‖_{L²(Σ_T)}`.
    pub fn l2_top(&self) -> f64 {
        let f = self.function();
        l2_top(&self.mesh, |tri, p| f.jet(tri, p))
    }

    /// Mesh-dependent norm of `u_h`.
    pub fn mesh_norm(&self) -> f64 {
        let f = self.function();
        mesh_norm(&self.mesh, self.theta, self.delta, self.local_h, |tri, p| f.jet(tri, p))
    }

    /// `‖u − u_h‖_h` for an exact solution given by its jet.
    pub fn mesh_norm_error(&self, exact: impl Fn(f64, f64) -> Jet + Sync) -> f64 {
        let f = self.function();
        mesh_norm(&self.mesh, self.theta, self.delta, self.local_h, |tri, p| {
            let (e, h) = (exact(p.t, p.x), f.jet(tri, p));
            [e[0] - h[0], e[1] - h[1], e[2] - h[2]]
        })
    }

    /// `(‖u − u_h‖_{L²(Q)}, ‖u‖_{L²(Q)})`.
    pub fn l2_error(&self, exact: impl Fn(f64, f64) -> f64 + Sync) -> (f64, f64) {
        let f = self.function();
        let (e, n) = (0..self.mesh.triangles.len())
            .into_par_iter()
            .map(|tri| {
                let el = Element::new(&self.mesh, tri);
                let mut acc = (0.0, 0.0);
                for &(l, w) in TRIANGLE_RULE.iter() {
                    let p = el.point(l);
                    let u = exact(p.t, p.x);
                    let diff = u - f.jet(tri, p)[0];
                    acc.0 += w * el.area * diff * diff;
                    acc.1 += w * el.area * u * u;
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        (e.sqrt(), n.sqrt())
    }

    /// Most negative nodal value relative to the largest one (zero when `u_h ≥ 0`).
    pub fn undershoot(&self) -> f64 {
        let (mut min, mut max) = (0.0f64, 0.0f64);
        for (dof, &w) in self.w.iter().enumerate() {
            let t = self.space.position(&self.mesh, dof).t;
            let u = w * (self.c_shift * t).exp();
            min = min.min(u);
            max = max.max(u.abs());
        }
        if max > 0.0 {
            -min / max
        } else {
            0.0
        }
    }

    /// CSV rows `t,x,u` for each requested time.
    pub fn write_slices_csv<W: Write>(&self, out: W, times: &[f64], per_cell: usize) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "x", "u"])?;
        for &t in times {
            let s = self.slice(t, per_cell)?;
            for (x, u) in s.x.iter().zip(&s.u) {
                wtr.write_record([fmt(t), fmt(*x), fmt(*u)])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Legacy ASCII VTK unstructured grid: points `(x, t, 0)`, quadratic
    /// triangles, point data `u`.
    pub fn write_vtk<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.space.n_dofs();
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "habitat space-time solution")?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {n} double")?;
        for dof in 0..n {
            let p = self.space.position(&self.mesh, dof);
            writeln!(out, "{} {} 0", fmt(p.x), fmt(p.t))?;
        }
        let ntri = self.mesh.triangles.len();
        writeln!(out, "CELLS {ntri} {}", ntri * 7)?;
        for tri in 0..ntri {
            let d = self.space.element_dofs(tri);
            writeln!(out, "6 {} {} {} {} {} {}", d[0], d[1], d[2], d[3], d[4], d[5])?;
        }
        writeln!(out, "CELL_TYPES {ntri}")?;
        for _ in 0..ntri {
            writeln!(out, "22")?;
        }
        writeln!(out, "POINT_DATA {n}")?;
        writeln!(out, "SCALARS u double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for dof in 0..n {
            let t = self.space.position(&self.mesh, dof).t;
            writeln!(out, "{}", fmt(self.w[dof] * (self.c_shift * t).exp()))?;
        }
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn top_edges(mesh: &SpaceTimeMesh) -> impl Iterator<Item = (usize, Point, Point)> + '_ {
    mesh.boundary
        .iter()
        .filter(|e| e.tag == BoundaryTag::Top)
        .map(|e| (e.triangle, mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]))
}

pub fn l2_top(mesh: &SpaceTimeMesh, jet: impl Fn(usize, Point) -> Jet) -> f64 {
    let gauss = UnitRule::new(3);
    let mut sum = 0.0;
    for (tri, p0, p1) in top_edges(mesh) {
        let len = (p1.x - p0.x).hypot(p1.t - p0.t);
        for (&g, &w) in gauss.nodes.iter().zip(&gauss.weights) {
            sum += w * len * jet(tri, lerp(p0, p1, g))[0].powi(2);
        }
    }
    sum.sqrt()
}

/// `‖v‖_h² = ‖∂_x v‖²_Q + θh‖∂_t v‖²_Q + ‖v‖²_{Σ_T} + θh‖∂_x v‖²_{Σ_T}
/// + θh Σ_F ‖⟦∂_x v⟧_t‖²_F + δ Σ_F ‖⟦∂_t v⟧_x‖²_F`, with `v` given per
/// triangle by its jet.
pub fn mesh_norm(
    mesh: &SpaceTimeMesh,
    theta: f64,
    delta: f64,
    local_h: bool,
    jet: impl Fn(usize, Point) -> Jet + Sync,
) -> f64 {
    let s_of = |tris: &[usize]| -> f64 {
        let h = if local_h {
            tris.iter().map(|&t| mesh.diameters[t]).sum::<f64>() / tris.len() as f64
        } else {
            mesh.h
        };
        theta * h
    };
    let volume: f64 = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|tri| {
            let el = Element::new(mesh, tri);
            let s = s_of(&[tri]);
            TRIANGLE_RULE
                .iter()
                .map(|&(l, w)| {
                    let j = jet(tri, el.point(l));
                    w * el.area * (j[1] * j[1] + s * j[2] * j[2])
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let gauss = UnitRule::new(3);
    let mut top = 0.0;
    for (tri, p0, p1) in top_edges(mesh) {
        let len = (p1.x - p0.x).hypot(p1.t - p0.t);
        let s = s_of(&[tri]);
        for (&g, &w) in gauss.nodes.iter().zip(&gauss.weights) {
            let j = jet(tri, lerp(p0, p1, g));
            top += w * len * (j[0] * j[0] + s * j[1] * j[1]);
        }
    }
    let facets: f64 = mesh
        .facets
        .par_iter()
        .map(|f| {
            let s = s_of(&f.triangles);
            let (p0, p1) = (mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]]);
            let mut acc = 0.0;
            for (&g, &w) in gauss.nodes.iter().zip(&gauss.weights) {
                let q = lerp(p0, p1, g);
                let (ji, jj) = (jet(f.triangles[0], q), jet(f.triangles[1], q));
                let jump_t_dx = (ji[1] - jj[1]) * f.normal[1];
                let jump_x_dt = (ji[2] - jj[2]) * f.normal[0];
                acc += w * f.length * (s * jump_t_dx * jump_t_dx + delta * jump_x_dt * jump_x_dt);
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    (volume + top + facets).sqrt()
}
