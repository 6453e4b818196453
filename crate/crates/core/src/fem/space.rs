use crate::mesh::{Point, SpaceTimeMesh};

/// Degree-2 Lagrange space on a structured [`SpaceTimeMesh`].
///
/// Vertices and edge midpoints form a `(2nt+1) × (2nx+1)` lattice: vertex
/// `(k, j)` is lattice node `(2k, 2j)`, and the midpoint of an edge sits at
/// the average of its end nodes' lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P2Space {
    pub nt: usize,
    pub nx: usize,
}

impl P2Space {
    pub fn new(mesh: &SpaceTimeMesh) -> Self {
        P2Space { nt: mesh.nt, nx: mesh.nx }
    }

    pub fn rows(&self) -> usize {
        2 * self.nt + 1
    }

    pub fn cols(&self) -> usize {
        2 * self.nx + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn dof(&self, row: usize, col: usize) -> usize {
        row * self.cols() + col
    }

    pub fn lattice(&self, dof: usize) -> (usize, usize) {
        (dof / self.cols(), dof % self.cols())
    }

    /// Dofs on the lateral boundary or at `t = 0`; these are not unknowns.
    pub fn is_constrained(&self, dof: usize) -> bool {
        let (row, col) = self.lattice(dof);
        row == 0 || col == 0 || col == self.cols() - 1
    }

    pub fn is_bottom(&self, dof: usize) -> bool {
        self.lattice(dof).0 == 0
    }

    /// Global dofs of a triangle in local order: vertices 0, 1, 2, then the
    /// midpoints of edges 01, 12 and 20.
    pub fn element_dofs(&self, tri: usize) -> [usize; 6] {
        let cell = tri / 2;
        let (k, j) = (cell / self.nx, cell % self.nx);
        let (r, c) = (2 * k, 2 * j);
        let d = |dr: usize, dc: usize| self.dof(r + dr, c + dc);
        if tri % 2 == 0 {
            [d(0, 0), d(0, 2), d(2, 2), d(0, 1), d(1, 2), d(1, 1)]
        } else {
            [d(0, 0), d(2, 2), d(2, 0), d(1, 1), d(2, 1), d(1, 0)]
        }
    }

    /// Physical position of a dof.
    pub fn position(&self, mesh: &SpaceTimeMesh, dof: usize) -> Point {
        let (row, col) = self.lattice(dof);
        let corner = |r: usize, c: usize| mesh.vertices[mesh.vertex_index(r / 2, c / 2)];
        let (r0, r1) = (row - row % 2, row + row % 2);
        let (c0, c1) = (col - col % 2, col + col % 2);
        // Midpoints of vertical or diagonal edges pair (r0,c0) with (r1,c1);
        // the anti-diagonal pairing never occurs in this triangulation.
        let a = corner(r0, c0);
        let b = corner(r1, c1);
        Point {
            t: 0.5 * (a.t + b.t),
            x: 0.5 * (a.x + b.x),
        }
    }
}

/// Affine element data for one triangle in the `(x, t)` plane.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub vertices: [Point; 3],
    /// `∇λ_i = (∂_x λ_i, ∂_t λ_i)`.
    pub grad: [[f64; 2]; 3],
    pub area: f64,
}

impl Element {
    pub fn new(mesh: &SpaceTimeMesh, tri: usize) -> Self {
        let p = mesh.triangles[tri].map(|v| mesh.vertices[v]);
        let two_area = (p[1].x - p[0].x) * (p[2].t - p[0].t) - (p[2].x - p[0].x) * (p[1].t - p[0].t);
        let mut grad = [[0.0; 2]; 3];
        for i in 0..3 {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            grad[i] = [(a.t - b.t) / two_area, (b.x - a.x) / two_area];
        }
        Element {
            vertices: p,
            grad,
            area: 0.5 * two_area,
        }
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        let p = &self.vertices;
        Point {
            t: l[0] * p[0].t + l[1] * p[1].t + l[2] * p[2].t,
            x: l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x,
        }
    }

    pub fn barycentric(&self, q: Point) -> [f64; 3] {
        let p0 = self.vertices[0];
        let l1 = self.grad[1][0] * (q.x - p0.x) + self.grad[1][1] * (q.t - p0.t);
        let l2 = self.grad[2][0] * (q.x - p0.x) + self.grad[2][1] * (q.t - p0.t);
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Value, gradient `(∂_x, ∂_t)` and mixed derivative `∂_{tx}` of the six
/// local shape functions at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShapeValues {
    pub value: [f64; 6],
    pub dx: [f64; 6],
    pub dt: [f64; 6],
    pub dtx: [f64; 6],
}

pub const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn shape(el: &Element, l: [f64; 3]) -> ShapeValues {
    let g = &el.grad;
    let mut s = ShapeValues::default();
    for i in 0..3 {
        s.value[i] = l[i] * (2.0 * l[i] - 1.0);
        let f = 4.0 * l[i] - 1.0;
        s.dx[i] = f * g[i][0];
        s.dt[i] = f * g[i][1];
        s.dtx[i] = 4.0 * g[i][0] * g[i][1];
    }
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let m = 3 + e;
        s.value[m] = 4.0 * l[i] * l[j];
        s.dx[m] = 4.0 * (l[j] * g[i][0] + l[i] * g[j][0]);
        s.dt[m] = 4.0 * (l[j] * g[i][1] + l[i] * g[j][1]);
        s.dtx[m] = 4.0 * (g[i][0] * g[j][1] + g[j][0] * g[i][1]);
    }
    s
}
