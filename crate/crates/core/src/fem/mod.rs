//! Stabilized space-time P2 finite elements for the moving-habitat problem.
//!
//! The unknown is shifted, `w = u e^{−ct}`, so that the reaction `R − c` is
//! uniformly negative. The initial datum enters through its nodal lifting on
//! `t = 0`; lateral dofs are homogeneous Dirichlet.

mod assemble;
mod field;
mod space;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use assemble::{assemble, assemble_global, AssembledSystem, FemOptions, TermMask};
pub use field::{l2_top, locate, mesh_norm, DofFunction, Jet, Slice, SolutionField};
pub use space::{shape, Element, P2Space, ShapeValues, EDGES};

use crate::error::{Error, Result};
use crate::mesh::build_mesh;
use crate::scenario::Scenario;

/// Sparse LU solve of the assembled system.
pub fn solve(sys: &AssembledSystem) -> Result<SolutionField> {
    let n = sys.unknowns.len();
    let mut w = sys.lifting.clone();
    let bnorm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut residual = 0.0;
    if n > 0 && bnorm > 0.0 {
        let a = &sys.matrix;
        let mut triplets = Vec::with_capacity(a.nnz());
        for r in 0..n {
            triplets.extend(a.row(r).map(|(c, v)| Triplet::new(r, c, v)));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Numerical(format!("sparse matrix construction failed: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Numerical(format!("sparse LU factorization failed: {e:?}")))?;
        let b = Mat::<f64>::from_fn(n, 1, |i, _| sys.rhs[i]);
        let x = lu.solve(&b);
        let xs: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if xs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("sparse LU produced non-finite values".into()));
        }
        let ax = a.mul_vec(&xs);
        residual = ax.iter().zip(&sys.rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt() / bnorm;
        if !(residual <= 1e-8) {
            return Err(Error::Numerical(format!("linear solve residual {residual:e} too large")));
        }
        for (i, &dof) in sys.unknowns.iter().enumerate() {
            w[dof] = xs[i];
        }
    }
    Ok(SolutionField {
        mesh: sys.mesh.clone(),
        space: sys.space,
        w,
        c_shift: sys.c_shift,
        theta: sys.options.theta,
        delta: sys.options.delta,
        local_h: sys.options.local_h,
        residual,
    })
}

/// Builds the mesh, assembles and solves.
pub fn run(s: &Scenario, nt: usize, nx: usize, opts: &FemOptions) -> Result<SolutionField> {
    let mesh = build_mesh(s, nt, nx)?;
    let sys = assemble(&mesh, s, opts)?;
    solve(&sys)
}

/// Smallest observed ratio `a_h(v, v) / ‖v‖_h²` over `samples` random
/// discrete functions vanishing on the constrained dofs.
pub fn ellipticity_witness(sys: &AssembledSystem, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full = vec![0.0; sys.space.n_dofs()];
    let mut kappa = f64::INFINITY;
    for _ in 0..samples {
        let v: Vec<f64> = (0..sys.unknowns.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (i, &dof) in sys.unknowns.iter().enumerate() {
            full[dof] = v[i];
        }
        let f = DofFunction {
            mesh: &sys.mesh,
            space: sys.space,
            values: &full,
            c: 0.0,
        };
        let o = &sys.options;
        let norm = mesh_norm(&sys.mesh, o.theta, o.delta, o.local_h, |tri, p| f.jet(tri, p));
        kappa = kappa.min(sys.matrix.bilinear(&v, &v) / (norm * norm));
    }
    kappa
}
