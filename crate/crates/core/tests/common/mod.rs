//! Finite-difference curvature of the weighted sphere metric in the chart
//! `ψ(u) = normalize(p + Σ u_a E_a)`, written without the library's
//! connection code.

#![allow(dead_code, clippy::needless_range_loop)]

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn complex_i(v: &[f64]) -> Vec<f64> {
    v.chunks_exact(2).flat_map(|c| [-c[1], c[0]]).collect()
}

/// `g_A(X,Y) = η(X)η(Y) + ⟨X_c, Y_c⟩ / f` at a unit point `q`.
pub fn weighted_metric(a: &[f64], q: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let f: f64 = a.iter().zip(q.chunks_exact(2)).map(|(w, c)| w * (c[0] * c[0] + c[1] * c[1])).sum();
    let iq = complex_i(q);
    let reeb: Vec<f64> = a.iter().zip(q.chunks_exact(2)).flat_map(|(w, c)| [-w * c[1], w * c[0]]).collect();
    let eta = |v: &[f64]| dot(&iq, v) / f;
    let (ex, ey) = (eta(x), eta(y));
    let xc: Vec<f64> = x.iter().zip(&reeb).map(|(v, r)| v - ex * r).collect();
    let yc: Vec<f64> = y.iter().zip(&reeb).map(|(v, r)| v - ey * r).collect();
    ex * ey + dot(&xc, &yc) / f
}

pub struct Chart {
    pub weights: Vec<f64>,
    pub p: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub step: f64,
}

impl Chart {
    pub fn new(weights: Vec<f64>, p: Vec<f64>, basis: Vec<Vec<f64>>) -> Self {
        Chart { weights, p, basis, step: 1e-4 }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let mut q = self.p.clone();
        for (ua, e) in u.iter().zip(&self.basis) {
            for (qj, ej) in q.iter_mut().zip(e) {
                *qj += ua * ej;
            }
        }
        let r = dot(&q, &q).sqrt();
        (q.iter().map(|v| v / r).collect(), r)
    }

    /// `g_ab(u)` with exact coordinate vectors `∂_a ψ`.
    pub fn metric(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let (q, r) = self.point(u);
        let partials: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|e| {
                let c = dot(e, &q);
                e.iter().zip(&q).map(|(ej, qj)| (ej - c * qj) / r).collect()
            })
            .collect();
        partials.iter().map(|x| partials.iter().map(|y| weighted_metric(&self.weights, &q, x, y)).collect()).collect()
    }

    fn shifted(&self, u: &[f64], c: usize, h: f64) -> Vec<f64> {
        let mut v = u.to_vec();
        v[c] += h;
        v
    }

    /// `Γ^d_{ab}(u)` from central differences of the metric.
    pub fn christoffel(&self, u: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim();
        let h = self.step;
        let dg: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|c| {
                let gp = self.metric(&self.shifted(u, c, h));
                let gm = self.metric(&self.shifted(u, c, -h));
                (0..n).map(|a| (0..n).map(|b| (gp[a][b] - gm[a][b]) / (2.0 * h)).collect()).collect()
            })
            .collect();
        let g = nalgebra::DMatrix::from_fn(n, n, |a, b| self.metric(u)[a][b]);
        let ginv = g.try_inverse().expect("chart metric is invertible");
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for e in 0..n {
                        s += ginv[(d, e)] * (dg[a][e][b] + dg[b][e][a] - dg[e][a][b]);
                    }
                    gamma[d][a][b] = 0.5 * s;
                }
            }
        }
        gamma
    }

    /// `R(∂_a, ∂_b)∂_c` components `R^d_{abc}` at the chart origin.
    pub fn curvature(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let n = self.dim();
        let h = self.step;
        let u0 = vec![0.0; n];
        let g0 = self.christoffel(&u0);
        let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
            .map(|c| {
                let gp = self.christoffel(&self.shifted(&u0, c, h));
                let gm = self.christoffel(&self.shifted(&u0, c, -h));
                (0..n)
                    .map(|d| (0..n).map(|a| (0..n).map(|b| (gp[d][a][b] - gm[d][a][b]) / (2.0 * h)).collect()).collect())
                    .collect()
            })
            .collect();
        let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut v = dgam[a][d][b][c] - dgam[b][d][a][c];
                        for e in 0..n {
                            v += g0[e][b][c] * g0[d][a][e] - g0[e][a][c] * g0[d][b][e];
                        }
                        r[d][a][b][c] = v;
                    }
                }
            }
        }
        r
    }

    /// `R(X,Y)Z` for ambient tangent vectors at `p`, returned in ambient form.
    pub fn curvature_ambient(&self, r: &[Vec<Vec<Vec<f64>>>], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let coords = |v: &[f64]| self.basis.iter().map(|e| dot(e, v)).collect::<Vec<_>>();
        let (cx, cy, cz) = (coords(x), coords(y), coords(z));
        let mut out = vec![0.0; self.p.len()];
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        s += r[d][a][b][c] * cx[a] * cy[b] * cz[c];
                    }
                }
            }
            for (o, e) in out.iter_mut().zip(&self.basis[d]) {
                *o += s * e;
            }
        }
        out
    }
}

/// Euclidean orthonormal basis of the tangent space of the unit sphere at `p`.
pub fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let m = p.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for b in std::iter::once(p.to_vec()).chain(out.iter().cloned()).collect::<Vec<_>>() {
            let c = dot(&v, &b);
            for (vi, bi) in v.iter_mut().zip(&b) {
                *vi -= c * bi;
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-6 {
            out.push(v.iter().map(|x| x / nv).collect());
        }
        if out.len() == m - 1 {
            break;
        }
    }
    out
}
