//! The assembled matrix on a two-triangle mesh against a from-scratch
//! computation with monomial shape functions and collapsed Gauss quadrature.

use habitat::fem::{assemble_global, FemOptions, P2Space, TermMask};
use habitat::mesh::build_mesh;
use habitat::{DomainMotion, PeriodicCoefficient, Scenario};

type Poly = [f64; 6]; // 1, x, t, x², xt, t²

fn eval(p: &Poly, x: f64, t: f64) -> f64 {
    p[0] + p[1] * x + p[2] * t + p[3] * x * x + p[4] * x * t + p[5] * t * t
}
fn ddx(p: &Poly, x: f64, t: f64) -> f64 {
    p[1] + 2.0 * p[3] * x + p[4] * t
}
fn ddt(p: &Poly, x: f64, t: f64) -> f64 {
    p[2] + p[4] * x + 2.0 * p[5] * t
}
fn dtx(p: &Poly) -> f64 {
    p[4]
}

fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> [f64; 6] {
    for c in 0..6 {
        let piv = (c..6).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..6 {
            let f = a[r][c] / a[c][c];
            for k in c..6 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 6];
    for r in (0..6).rev() {
        let s: f64 = (r + 1..6).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

struct Tri {
    nodes: [(f64, f64); 6], // (x, t)
    basis: [Poly; 6],
}

fn tri(v: [(f64, f64); 3]) -> Tri {
    let mid = |a: (f64, f64), b: (f64, f64)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let nodes = [v[0], v[1], v[2], mid(v[0], v[1]), mid(v[1], v[2]), mid(v[2], v[0])];
    let mut vand = [[0.0; 6]; 6];
    for (i, &(x, t)) in nodes.iter().enumerate() {
        vand[i] = [1.0, x, t, x * x, x * t, t * t];
    }
    // columns of the inverse Vandermonde are the shape-function coefficients
    let mut basis = [[0.0; 6]; 6];
    for (k, b) in basis.iter_mut().enumerate() {
        let mut rhs = [0.0; 6];
        rhs[k] = 1.0;
        // solve V c = e_k where rows are evaluations: Σ_m c_m mono_m(node_i) = δ_ik
        *b = solve6(vand, rhs);
    }
    Tri { nodes, basis }
}

const G4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// Integral over the triangle via the Duffy collapse of the unit square.
fn integrate_tri(t: &Tri, f: impl Fn(f64, f64) -> f64) -> f64 {
    let [p0, p1, p2] = [t.nodes[0], t.nodes[1], t.nodes[2]];
    let jac = ((p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1)).abs();
    let mut sum = 0.0;
    for &(a, wa) in &G4 {
        for &(b, wb) in &G4 {
            let u = 0.5 * (a + 1.0);
            let v = 0.5 * (b + 1.0) * (1.0 - u);
            let w = 0.25 * wa * wb * (1.0 - u);
            let x = p0.0 + u * (p1.0 - p0.0) + v * (p2.0 - p0.0);
            let tt = p0.1 + u * (p1.1 - p0.1) + v * (p2.1 - p0.1);
            sum += w * jac * f(x, tt);
        }
    }
    sum
}

fn integrate_edge(a: (f64, f64), b: (f64, f64), f: impl Fn(f64, f64) -> f64) -> f64 {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    G4.iter()
        .map(|&(g, w)| {
            let s = 0.5 * (g + 1.0);
            0.5 * w * len * f(a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1))
        })
        .sum()
}

fn key(p: (f64, f64)) -> (i64, i64) {
    ((p.0 * 1e9).round() as i64, (p.1 * 1e9).round() as i64)
}

#[test]
fn two_triangle_matrix_matches_monomial_oracle() {
    let (length, horizon, speed) = (1.3, 0.7, 0.4);
    let (d, theta, delta) = (0.8, 0.1, 0.05);
    let mut s = Scenario::fixed(
        d,
        2.0,
        PeriodicCoefficient::constant(0.0, 1.0),
        PeriodicCoefficient::constant(0.5, 1.0),
        length,
        horizon,
    );
    s.c_shift = 3.0; // R̃ ≡ r − c = −1
    s.motion = DomainMotion::PowerShift {
        c: speed,
        exponent: 1.0,
        t0: 0.0,
        offset: 0.0,
        length,
    };
    let mesh = build_mesh(&s, 1, 1).unwrap();
    let opts = FemOptions {
        theta,
        delta,
        local_h: false,
        terms: TermMask::ALL,
    };
    let global = assemble_global(&mesh, &s, &opts).unwrap();

    // Geometry rebuilt by hand: lower-left, lower-right, upper-right, upper-left.
    let ll = (0.0, 0.0);
    let lr = (length, 0.0);
    let ur = (speed * horizon + length, horizon);
    let ul = (speed * horizon, horizon);
    let k0 = tri([ll, lr, ur]);
    let k1 = tri([ll, ur, ul]);
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let h = [dist(ll, lr), dist(lr, ur), dist(ur, ll), dist(ur, ul), dist(ul, ll)]
        .into_iter()
        .fold(0.0, f64::max);
    let st = theta * h;

    let mut oracle: std::collections::HashMap<((i64, i64), (i64, i64)), f64> = Default::default();
    let mut add = |a: (f64, f64), b: (f64, f64), v: f64| *oracle.entry((key(a), key(b))).or_insert(0.0) += v;

    for k in [&k0, &k1] {
        for a in 0..6 {
            for b in 0..6 {
                let (pa, pb) = (&k.basis[a], &k.basis[b]);
                let v = integrate_tri(k, |x, t| {
                    let test = eval(pa, x, t) + st * ddt(pa, x, t);
                    ddt(pb, x, t) * test + d * ddx(pb, x, t) * ddx(pa, x, t) + eval(pb, x, t) * test
                        - d * st * dtx(pb) * ddx(pa, x, t)
                });
                add(k.nodes[a], k.nodes[b], v);
            }
        }
    }

    // Diagonal facet ll–ur; normal outward from k0 (away from lr).
    let (ex, et) = (ur.0 - ll.0, ur.1 - ll.1);
    let len = (ex * ex + et * et).sqrt();
    let mut n = (et / len, -ex / len);
    if n.0 * (lr.0 - ll.0) + n.1 * (lr.1 - ll.1) > 0.0 {
        n = (-n.0, -n.1);
    }
    let up0 = n.1 >= 0.0;
    let sides = [(&k0, 1.0, up0), (&k1, -1.0, !up0)];
    for &(ka, sa, _) in &sides {
        for &(kb, sb, upb) in &sides {
            for a in 0..6 {
                for b in 0..6 {
                    let (pa, pb) = (&ka.basis[a], &kb.basis[b]);
                    let v = integrate_edge(ll, ur, |x, t| {
                        let jump_t_vx = sa * ddx(pa, x, t) * n.1;
                        let jump_x_vt = sa * ddt(pa, x, t) * n.0;
                        let jump_x_wt = sb * ddt(pb, x, t) * n.0;
                        let up_wx = if upb { ddx(pb, x, t) } else { 0.0 };
                        d * st * up_wx * jump_t_vx - d * st * 0.5 * ddx(pb, x, t) * jump_x_vt
                            + st * d * 0.5 * ddx(pa, x, t) * jump_x_wt
                            + delta * jump_x_wt * jump_x_vt
                    });
                    add(ka.nodes[a], kb.nodes[b], v);
                }
            }
        }
    }

    // Top edge ul–ur belongs to k1.
    for a in 0..6 {
        for b in 0..6 {
            let (pa, pb) = (&k1.basis[a], &k1.basis[b]);
            let v = integrate_edge(ul, ur, |x, t| d * st * ddx(pb, x, t) * ddx(pa, x, t));
            add(k1.nodes[a], k1.nodes[b], v);
        }
    }

    let space = P2Space::new(&mesh);
    assert_eq!(space.n_dofs(), 9);
    let dense = global.to_dense();
    let pos: Vec<(f64, f64)> = (0..9)
        .map(|i| {
            let p = space.position(&mesh, i);
            (p.x, p.t)
        })
        .collect();
    let scale = dense.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut checked = 0;
    for i in 0..9 {
        for j in 0..9 {
            let expect = oracle.get(&(key(pos[i]), key(pos[j]))).copied().unwrap_or(0.0);
            assert!(
                (dense[i][j] - expect).abs() <= 1e-12 * scale,
                "entry ({i},{j}): {} vs {expect}",
                dense[i][j]
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 81);
    assert_eq!(oracle.len(), 81);
}

#[test]
fn diffusion_block_is_symmetric_positive_semidefinite() {
    let s = Scenario::fixed(
        1.3,
        2.0,
        PeriodicCoefficient::constant(0.0, 1.0),
        PeriodicCoefficient::constant(0.5, 1.0),
        1.5,
        1.0,
    );
    let mesh = build_mesh(&s, 3, 4).unwrap();
    let opts = FemOptions {
        theta: 0.0,
        delta: 0.0,
        local_h: false,
        terms: TermMask::DIFFUSION,
    };
    let a = assemble_global(&mesh, &s, &opts).unwrap().to_dense();
    let n = a.len();
    for i in 0..n {
        for j in 0..n {
            assert!((a[i][j] - a[j][i]).abs() < 1e-13);
        }
    }
    // Gershgorin is too weak here; check vᵀAv ≥ 0 on many vectors instead.
    let mut seed = 12345u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for _ in 0..200 {
        let v: Vec<f64> = (0..n).map(|_| next()).collect();
        let q: f64 = (0..n).map(|i| v[i] * (0..n).map(|j| a[i][j] * v[j]).sum::<f64>()).sum();
        assert!(q >= -1e-12);
    }
}
