use rayon::prelude::*;

use super::space::{shape, Element, P2Space};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, Facet, Point, SpaceTimeMesh};
use crate::quadrature::{UnitRule, TRIANGLE_RULE};
use crate::scenario::Scenario;

/// Subset of the bilinear-form terms to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermMask(pub u16);

impl TermMask {
    /// `∫ ∂_t w (v + s ∂_t v)`.
    pub const TIME: TermMask = TermMask(1);
    /// `∫ d ∂_x w ∂_x v`.
    pub const DIFFUSION: TermMask = TermMask(1 << 1);
    /// `−∫ R̃ w (v + s ∂_t v)`.
    pub const REACTION: TermMask = TermMask(1 << 2);
    /// `−d s ∫_K ∂_{tx} w ∂_x v`.
    pub const MIXED: TermMask = TermMask(1 << 3);
    /// `d s ∫_F {∂_x w}^up ⟦∂_x v⟧_t`.
    pub const UPWIND_FACET: TermMask = TermMask(1 << 4);
    /// `−d s ∫_F {∂_x w} ⟦∂_t v⟧_x`.
    pub const AVERAGE_FACET: TermMask = TermMask(1 << 5);
    /// `s ∫_F d {∂_x v} ⟦∂_t w⟧_x`.
    pub const SYMMETRIZING: TermMask = TermMask(1 << 6);
    /// `δ ∫_F ⟦∂_t w⟧_x ⟦∂_t v⟧_x`.
    pub const PENALTY: TermMask = TermMask(1 << 7);
    /// `d s ∫_{Σ_T} ∂_x w ∂_x v`.
    pub const TOP: TermMask = TermMask(1 << 8);
    pub const ALL: TermMask = TermMask((1 << 9) - 1);

    pub fn has(self, other: TermMask) -> bool {
        self.0 & other.0 == other.0
    }
}

impl std::ops::BitOr for TermMask {
    type Output = TermMask;
    fn bitor(self, rhs: TermMask) -> TermMask {
        TermMask(self.0 | rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemOptions {
    /// Streamline weight `θ`; the stabilization scale is `s = θh`.
    pub theta: f64,
    /// Penalty on jumps of `∂_t` across facets.
    pub delta: f64,
    /// Use the element diameter `h_K` instead of the global `h` in `s`.
    pub local_h: bool,
    pub terms: TermMask,
}

impl Default for FemOptions {
    fn default() -> Self {
        FemOptions {
            theta: 1e-5,
            delta: 1e-6,
            local_h: false,
            terms: TermMask::ALL,
        }
    }
}

/// Linear system for the unknown dofs after moving the lifted initial datum
/// to the right-hand side.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub mesh: SpaceTimeMesh,
    pub space: P2Space,
    /// Rows and columns indexed by position in `unknowns`.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global dof of each unknown.
    pub unknowns: Vec<usize>,
    /// Inverse of `unknowns`.
    pub unknown_of: Vec<Option<usize>>,
    /// Nodal initial datum on `t = 0`, zero elsewhere (shifted variable).
    pub lifting: Vec<f64>,
    pub options: FemOptions,
    pub c_shift: f64,
    /// Lower bound `c − r` of `−R̃`.
    pub rho: f64,
}

/// Global matrix of `a_h` over all dofs of the P2 space, in the shifted
/// unknown `w = u e^{−ct}` with reaction `R̃ = R − c`.
pub fn assemble_global(mesh: &SpaceTimeMesh, s: &Scenario, opts: &FemOptions) -> Result<CsrMatrix> {
    if !(opts.theta >= 0.0 && opts.theta.is_finite()) || !(opts.delta >= 0.0 && opts.delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "theta and delta must be nonnegative (got {}, {})",
            opts.theta, opts.delta
        )));
    }
    let space = P2Space::new(mesh);
    let scale = |tris: &[usize]| -> f64 {
        let h = if opts.local_h {
            tris.iter().map(|&t| mesh.diameters[t]).sum::<f64>() / tris.len() as f64
        } else {
            mesh.h
        };
        opts.theta * h
    };
    let d = s.d;
    let terms = opts.terms;

    let volume: Vec<Vec<(usize, usize, f64)>> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|tri| {
            let el = Element::new(mesh, tri);
            let dofs = space.element_dofs(tri);
            let st = scale(&[tri]);
            let mut local = [[0.0; 6]; 6];
            for &(l, w) in TRIANGLE_RULE.iter() {
                let p = el.point(l);
                let sh = shape(&el, l);
                let wq = w * el.area;
                let rt = s.growth(p.t, p.x) - s.c_shift;
                for a in 0..6 {
                    let test = sh.value[a] + st * sh.dt[a];
                    for b in 0..6 {
                        let mut v = 0.0;
                        if terms.has(TermMask::TIME) {
                            v += sh.dt[b] * test;
                        }
                        if terms.has(TermMask::DIFFUSION) {
                            v += d * sh.dx[b] * sh.dx[a];
                        }
                        if terms.has(TermMask::REACTION) {
                            v -= rt * sh.value[b] * test;
                        }
                        if terms.has(TermMask::MIXED) {
                            v -= d * st * sh.dtx[b] * sh.dx[a];
                        }
                        local[a][b] += wq * v;
                    }
                }
            }
            let mut out = Vec::with_capacity(36);
            for a in 0..6 {
                for b in 0..6 {
                    out.push((dofs[a], dofs[b], local[a][b]));
                }
            }
            out
        })
        .collect();

    let gauss = UnitRule::new(3);
    let facets: Vec<Vec<(usize, usize, f64)>> = mesh
        .facets
        .par_iter()
        .map(|f| facet_block(mesh, &space, f, &gauss, d, scale(&f.triangles), opts.delta, terms))
        .collect();

    let top: Vec<Vec<(usize, usize, f64)>> = if terms.has(TermMask::TOP) {
        mesh.boundary
            .par_iter()
            .filter(|e| e.tag == BoundaryTag::Top)
            .map(|e| {
                let el = Element::new(mesh, e.triangle);
                let dofs = space.element_dofs(e.triangle);
                let st = scale(&[e.triangle]);
                let (p0, p1) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
                let len = ((p1.x - p0.x).powi(2) + (p1.t - p0.t).powi(2)).sqrt();
                let mut local = [[0.0; 6]; 6];
                for (&g, &w) in gauss.nodes.iter().zip(&gauss.weights) {
                    let q = lerp(p0, p1, g);
                    let sh = shape(&el, el.barycentric(q));
                    for a in 0..6 {
                        for b in 0..6 {
                            local[a][b] += w * len * d * st * sh.dx[b] * sh.dx[a];
                        }
                    }
                }
                let mut out = Vec::with_capacity(36);
                for a in 0..6 {
                    for b in 0..6 {
                        out.push((dofs[a], dofs[b], local[a][b]));
                    }
                }
                out
            })
            .collect()
    } else {
        Vec::new()
    };

    let triplets: Vec<(usize, usize, f64)> = volume
        .into_iter()
        .chain(facets)
        .chain(top)
        .flatten()
        .collect();
    Ok(CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), &triplets))
}

pub(crate) fn lerp(p0: Point, p1: Point, g: f64) -> Point {
    Point {
        t: p0.t + g * (p1.t - p0.t),
        x: p0.x + g * (p1.x - p0.x),
    }
}

/// Facet contributions for the 12 local functions of `K_i` then `K_j`.
#[allow(clippy::too_many_arguments)]
fn facet_block(
    mesh: &SpaceTimeMesh,
    space: &P2Space,
    f: &Facet,
    gauss: &UnitRule,
    d: f64,
    st: f64,
    delta: f64,
    terms: TermMask,
) -> Vec<(usize, usize, f64)> {
    let [ki, kj] = f.triangles;
    let (ei, ej) = (Element::new(mesh, ki), Element::new(mesh, kj));
    let dofs: Vec<usize> = space.element_dofs(ki).into_iter().chain(space.element_dofs(kj)).collect();
    let [nx, nt] = f.normal;
    let up_first = f.upwind_is_first();
    let (p0, p1) = (mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]]);
    let mut local = [[0.0; 12]; 12];
    for (&g, &w) in gauss.nodes.iter().zip(&gauss.weights) {
        let q = lerp(p0, p1, g);
        let si = shape(&ei, ei.barycentric(q));
        let sj = shape(&ej, ej.barycentric(q));
        // per local function: trace of ∂_x, ∂_t, side sign, upwind weight
        let mut dx = [0.0; 12];
        let mut dt = [0.0; 12];
        let mut sign = [0.0; 12];
        let mut up = [0.0; 12];
        for a in 0..6 {
            dx[a] = si.dx[a];
            dt[a] = si.dt[a];
            sign[a] = 1.0;
            up[a] = if up_first { 1.0 } else { 0.0 };
            dx[6 + a] = sj.dx[a];
            dt[6 + a] = sj.dt[a];
            sign[6 + a] = -1.0;
            up[6 + a] = if up_first { 0.0 } else { 1.0 };
        }
        let wq = w * f.length;
        for a in 0..12 {
            let jump_t_vx = sign[a] * dx[a] * nt;
            let jump_x_vt = sign[a] * dt[a] * nx;
            let avg_vx = 0.5 * dx[a];
            for b in 0..12 {
                let jump_x_wt = sign[b] * dt[b] * nx;
                let mut v = 0.0;
                if terms.has(TermMask::UPWIND_FACET) {
                    v += d * st * up[b] * dx[b] * jump_t_vx;
                }
                if terms.has(TermMask::AVERAGE_FACET) {
                    v -= d * st * 0.5 * dx[b] * jump_x_vt;
                }
                if terms.has(TermMask::SYMMETRIZING) {
                    v += st * d * avg_vx * jump_x_wt;
                }
                if terms.has(TermMask::PENALTY) {
                    v += delta * jump_x_wt * jump_x_vt;
                }
                local[a][b] += wq * v;
            }
        }
    }
    let mut out = Vec::with_capacity(144);
    for a in 0..12 {
        for b in 0..12 {
            out.push((dofs[a], dofs[b], local[a][b]));
        }
    }
    out
}

/// Assembles `a_h` on the unknown dofs and the right-hand side `−a_h(g_h, ·)`
/// from the nodal lifting `g_h` of the initial datum.
pub fn assemble(mesh: &SpaceTimeMesh, s: &Scenario, opts: &FemOptions) -> Result<AssembledSystem> {
    if !(opts.theta > 0.0) {
        return Err(Error::InvalidArgument(format!("theta must be positive (got {})", opts.theta)));
    }
    let rho = s.c_shift - s.r;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive rho after shift: c_shift = {} must exceed r = {}",
            s.c_shift, s.r
        )));
    }
    let space = P2Space::new(mesh);
    let global = assemble_global(mesh, s, opts)?;

    let mut lifting = vec![0.0; space.n_dofs()];
    for col in 1..space.cols() - 1 {
        let dof = space.dof(0, col);
        lifting[dof] = s.initial_value(space.position(mesh, dof).x);
    }

    let mut unknowns = Vec::new();
    let mut unknown_of = vec![None; space.n_dofs()];
    for dof in 0..space.n_dofs() {
        if !space.is_constrained(dof) {
            unknown_of[dof] = Some(unknowns.len());
            unknowns.push(dof);
        }
    }

    let mut triplets = Vec::with_capacity(global.nnz());
    let mut rhs = vec![0.0; unknowns.len()];
    for (i, &row) in unknowns.iter().enumerate() {
        for (col, v) in global.row(row) {
            match unknown_of[col] {
                Some(j) => triplets.push((i, j, v)),
                None => rhs[i] -= v * lifting[col],
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(unknowns.len(), unknowns.len(), &triplets);
    Ok(AssembledSystem {
        mesh: mesh.clone(),
        space,
        matrix,
        rhs,
        unknowns,
        unknown_of,
        lifting,
        options: *opts,
        c_shift: s.c_shift,
        rho,
    })
}
