//! Primal log-barrier interior-point method for the relaxed design problem.
//!
//! Variables are the real and imaginary parts of the strict upper triangle
//! of every Gram; the unit diagonal is built in. Each centering step
//! minimizes `t tr(W F(G)^{-1}) - sum_n log det G_n` by damped Newton.
//! After each centering a dual-feasible point is formed from the gradient,
//! giving a certified lower bound; the solve stops once the relative gap to
//! that bound is below tolerance.
//!
//! Writing `F = L L^T`, `P = F^{-1}` and `R = P E` for the selection `E`,
//! the objective Hessian is `2 M^T M` with `M_u = vec(L^{-1} F_u R)`. `F_u`
//! does not depend on the iterate, so all of them are tabulated once and
//! `M` is produced by two large matrix products.

use faer::linalg::matmul::matmul;
use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{RelaxationSolver, SdpProblem, SdpSolution, SolverStatus};
use crate::error::{Error, Result};
use crate::model::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Target relative gap between the primal value and the certified bound.
    pub tolerance: f64,
    /// Factor applied to the barrier parameter after each centering.
    pub barrier_growth: f64,
    pub max_newton_steps: usize,
    /// Progress lines on stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            barrier_growth: 10.0,
            max_newton_steps: 300,
            verbose: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct BarrierSolver {
    pub settings: SolverSettings,
}

impl BarrierSolver {
    pub fn new(settings: SolverSettings) -> Self {
        Self { settings }
    }
}

type Terms = [(C64, usize, usize); 2];

fn re_terms(i: usize, j: usize) -> Terms {
    let one = C64::new(1.0, 0.0);
    [(one, i, j), (one, j, i)]
}

fn im_terms(i: usize, j: usize) -> Terms {
    let jj = C64::new(0.0, 1.0);
    [(jj, i, j), (-jj, j, i)]
}

struct Workspace<'a> {
    problem: &'a SdpProblem,
    mt: usize,
    pri: usize,
    pairs: Vec<(usize, usize)>,
    dim: usize,
    /// `vec F(I)`.
    f_base: Vec<f64>,
    /// Column `u` is `vec F_u`, column-major `dim^2 x vars`.
    jac: Vec<f64>,
    /// Same for the diagonal directions `e_i e_i^T`, column `n Mt + i`.
    jac_diag: Vec<f64>,
    par: Par,
}

struct Point {
    x: Vec<f64>,
    grams: Vec<DMatrix<C64>>,
    gram_inv: Vec<DMatrix<C64>>,
    logdet: f64,
    chol_l: DMatrix<f64>,
    p: DMatrix<f64>,
    f: f64,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a SdpProblem) -> Result<Self> {
        let map = &problem.map;
        let (mt, pri, dim) = (map.tx_count(), map.pri_count(), map.dim());
        let pairs: Vec<(usize, usize)> = (0..mt)
            .flat_map(|i| (i + 1..mt).map(move |j| (i, j)))
            .collect();
        let d2 = dim * dim;
        let per = 2 * pairs.len();
        let mut jac = vec![0.0; d2 * per * pri];
        let mut jac_diag = vec![0.0; d2 * mt * pri];
        for n in 0..pri {
            for (p, &(i, j)) in pairs.iter().enumerate() {
                for (s, terms) in [re_terms(i, j), im_terms(i, j)].iter().enumerate() {
                    let f = map.fim_from_q(&map.direction_q(n, terms));
                    let u = n * per + 2 * p + s;
                    jac[u * d2..(u + 1) * d2].copy_from_slice(f.as_slice());
                }
            }
            for i in 0..mt {
                let f = map.fim_from_q(&map.direction_q(n, &[(C64::new(1.0, 0.0), i, i)]));
                let u = n * mt + i;
                jac_diag[u * d2..(u + 1) * d2].copy_from_slice(f.as_slice());
            }
        }
        let identity = vec![DMatrix::identity(mt, mt); pri];
        let f_base = map.apply(&identity)?.entries.as_slice().to_vec();
        Ok(Self {
            problem,
            mt,
            pri,
            pairs,
            dim,
            f_base,
            jac,
            jac_diag,
            par: Par::rayon(0),
        })
    }

    fn vars(&self) -> usize {
        2 * self.pairs.len() * self.pri
    }

    fn per_gram(&self) -> usize {
        2 * self.pairs.len()
    }

    fn grams(&self, x: &[f64]) -> Vec<DMatrix<C64>> {
        let per = self.per_gram();
        (0..self.pri)
            .map(|n| {
                let mut g = DMatrix::<C64>::identity(self.mt, self.mt);
                for (p, &(i, j)) in self.pairs.iter().enumerate() {
                    let z = C64::new(x[n * per + 2 * p], x[n * per + 2 * p + 1]);
                    g[(i, j)] = z;
                    g[(j, i)] = z.conj();
                }
                g
            })
            .collect()
    }

    /// `None` when the point leaves the domain (a Gram or `F` not positive definite).
    fn point(&self, x: Vec<f64>) -> Option<Point> {
        let grams = self.grams(&x);
        let mut logdet = 0.0;
        let mut gram_inv = Vec::with_capacity(grams.len());
        for g in &grams {
            let ch = g.clone().cholesky()?;
            logdet += 2.0 * ch.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>();
            gram_inv.push(ch.inverse());
        }
        let d = self.dim;
        let mut fv = self.f_base.clone();
        if !x.is_empty() {
            let mut out = vec![0.0; d * d];
            let jac = MatRef::from_column_major_slice(&self.jac, d * d, x.len());
            let xv = MatRef::from_column_major_slice(&x, x.len(), 1);
            matmul(
                MatMut::from_column_major_slice_mut(&mut out, d * d, 1),
                Accum::Replace,
                jac,
                xv,
                1.0,
                self.par,
            );
            fv.iter_mut().zip(&out).for_each(|(a, b)| *a += b);
        }
        let f = DMatrix::from_column_slice(d, d, &fv);
        let f = (&f + f.transpose()) * 0.5;
        let ch = f.cholesky()?;
        let p = ch.inverse();
        let value: f64 = self.problem.indices.iter().map(|&i| p[(i, i)]).sum();
        if !(value.is_finite() && value > 0.0) {
            return None;
        }
        Some(Point {
            x,
            grams,
            gram_inv,
            logdet,
            chol_l: ch.l(),
            p,
            f: value,
        })
    }

    fn phi(&self, pt: &Point, t: f64) -> f64 {
        t * pt.f - pt.logdet
    }

    /// `P W P` with `W` the selection.
    fn weighted(&self, pt: &Point) -> (DMatrix<f64>, DMatrix<f64>) {
        let idx = &self.problem.indices;
        let r = DMatrix::from_fn(self.dim, idx.len(), |i, c| pt.p[(i, idx[c])]);
        let q = &r * r.transpose();
        (r, q)
    }

    /// `-<Q, F_u>` for every column of a tabulated Jacobian.
    fn objective_gradient(&self, jac: &[f64], cols: usize, q: &DMatrix<f64>) -> Vec<f64> {
        let d2 = self.dim * self.dim;
        let mut g = vec![0.0; cols];
        if cols == 0 {
            return g;
        }
        matmul(
            MatMut::from_column_major_slice_mut(&mut g, cols, 1),
            Accum::Replace,
            MatRef::from_column_major_slice(jac, d2, cols).transpose(),
            MatRef::from_column_major_slice(q.as_slice(), d2, 1),
            -1.0,
            self.par,
        );
        g
    }

    fn newton_direction(&self, pt: &Point, t: f64) -> Result<(Vec<f64>, f64)> {
        let (d, u_count, per) = (self.dim, self.vars(), self.per_gram());
        let (r, q) = self.weighted(pt);
        let s = r.ncols();

        // S1 = [F_1 R; F_2 R; ...] using the symmetry of every F_u.
        let jmat = MatRef::from_column_major_slice(&self.jac, d, d * u_count);
        let rf = Mat::from_fn(d, s, |i, j| r[(i, j)]);
        let mut s1 = Mat::<f64>::zeros(d * u_count, s);
        matmul(s1.as_mut(), Accum::Replace, jmat.transpose(), rf.as_ref(), 1.0, self.par);
        // Side by side: C = [F_1 R | F_2 R | ...], d x (s U).
        let mut c = vec![0.0; d * s * u_count];
        for col in 0..s {
            let src = s1.col_as_slice(col);
            for u in 0..u_count {
                let dst = (u * s + col) * d;
                c[dst..dst + d].copy_from_slice(&src[u * d..(u + 1) * d]);
            }
        }
        drop(s1);
        let linv = pt
            .chol_l
            .solve_lower_triangular(&DMatrix::identity(d, d))
            .ok_or_else(|| Error::Solver("singular FIM factor".into()))?;
        let linv = Mat::from_fn(d, d, |i, j| linv[(i, j)]);
        let mut mbuf = vec![0.0; d * s * u_count];
        matmul(
            MatMut::from_column_major_slice_mut(&mut mbuf, d, s * u_count),
            Accum::Replace,
            linv.as_ref(),
            MatRef::from_column_major_slice(&c, d, s * u_count),
            1.0,
            self.par,
        );
        drop(c);
        let m = MatRef::from_column_major_slice(&mbuf, d * s, u_count);
        let mut h = Mat::<f64>::zeros(u_count, u_count);
        triangular::matmul(
            h.as_mut(),
            BlockStructure::TriangularLower,
            Accum::Replace,
            m.transpose(),
            BlockStructure::Rectangular,
            m,
            BlockStructure::Rectangular,
            2.0 * t,
            self.par,
        );
        drop(mbuf);

        let mut grad = self.objective_gradient(&self.jac, u_count, &q);
        grad.iter_mut().for_each(|g| *g *= t);
        let terms: Vec<Terms> = self
            .pairs
            .iter()
            .flat_map(|&(i, j)| [re_terms(i, j), im_terms(i, j)])
            .collect();
        for (n, a) in pt.gram_inv.iter().enumerate() {
            let base = n * per;
            for (lu, tu) in terms.iter().enumerate() {
                grad[base + lu] -= tu.iter().map(|&(al, p, q)| (al * a[(q, p)]).re).sum::<f64>();
                for (lv, tv) in terms.iter().enumerate().take(lu + 1) {
                    let mut acc = C64::new(0.0, 0.0);
                    for &(al, p, q) in tu {
                        for &(be, rr, ss) in tv {
                            acc += al * be * a[(ss, p)] * a[(q, rr)];
                        }
                    }
                    h[(base + lu, base + lv)] += acc.re;
                }
            }
        }

        let rhs = Mat::from_fn(u_count, 1, |i, _| -grad[i]);
        let dir = match h.llt(Side::Lower) {
            Ok(llt) => llt.solve(&rhs),
            Err(_) => {
                let scale = (0..u_count).map(|i| h[(i, i)]).fold(0.0, f64::max);
                for i in 0..u_count {
                    h[(i, i)] += 1e-12 * scale;
                }
                h.llt(Side::Lower)
                    .map_err(|_| Error::Solver("Newton system not positive definite".into()))?
                    .solve(&rhs)
            }
        };
        let dir: Vec<f64> = (0..u_count).map(|i| dir[(i, 0)]).collect();
        let decrement = -grad.iter().zip(&dir).map(|(g, v)| g * v).sum::<f64>();
        Ok((dir, decrement))
    }

    /// Lower bound on the relaxed optimum from the supporting hyperplane at `pt`.
    fn certificate(&self, pt: &Point) -> f64 {
        let (_, q) = self.weighted(pt);
        let per = self.per_gram();
        let g_off = self.objective_gradient(&self.jac, self.vars(), &q);
        let g_diag = self.objective_gradient(&self.jac_diag, self.pri * self.mt, &q);
        let mut bound = pt.f;
        for (n, g) in pt.grams.iter().enumerate() {
            let mut dm = DMatrix::<C64>::zeros(self.mt, self.mt);
            for i in 0..self.mt {
                dm[(i, i)] = C64::new(g_diag[n * self.mt + i], 0.0);
            }
            for (p, &(i, j)) in self.pairs.iter().enumerate() {
                let z = C64::new(g_off[n * per + 2 * p], g_off[n * per + 2 * p + 1]) * 0.5;
                dm[(i, j)] = z;
                dm[(j, i)] = z.conj();
            }
            let dg = &dm * g;
            let inner: f64 = (0..self.mt).map(|i| dg[(i, i)].re).sum();
            let mut y: Vec<f64> = (0..self.mt).map(|i| dg[(i, i)].re).collect();
            let mut shifted = dm.clone();
            for i in 0..self.mt {
                shifted[(i, i)] -= C64::new(y[i], 0.0);
            }
            let lmin = shifted
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if lmin < 0.0 {
                y.iter_mut().for_each(|v| *v += lmin);
            }
            bound += y.iter().sum::<f64>() - inner;
        }
        bound
    }
}

impl RelaxationSolver for BarrierSolver {
    fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution> {
        let st = &self.settings;
        if !(st.tolerance > 0.0 && st.barrier_growth > 1.0) {
            return Err(Error::Parameter("solver tolerance and growth must be positive".into()));
        }
        let ws = Workspace::new(problem)?;
        let u_count = ws.vars();
        let mut pt = ws
            .point(vec![0.0; u_count])
            .ok_or_else(|| Error::Solver("identity Grams are not strictly feasible".into()))?;
        let nu = (ws.pri * ws.mt) as f64;
        let mut t = nu / pt.f;
        let mut lower = ws.certificate(&pt);
        let mut steps = 0;
        let mut status = SolverStatus::MaxIterations;
        loop {
            if pt.f - lower <= st.tolerance * pt.f.abs() {
                status = SolverStatus::Optimal;
                break;
            }
            if steps >= st.max_newton_steps {
                break;
            }
            // Centering.
            while steps < st.max_newton_steps && u_count > 0 {
                let (dir, dec) = ws.newton_direction(&pt, t)?;
                steps += 1;
                if !(dec > 0.0) || dec / 2.0 <= 1e-9 {
                    break;
                }
                let phi0 = ws.phi(&pt, t);
                let mut step = 1.0;
                let mut accepted = None;
                while step > 1e-12 {
                    let x: Vec<f64> = pt.x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
                    if let Some(cand) = ws.point(x) {
                        if ws.phi(&cand, t) <= phi0 - 0.25 * step * dec {
                            accepted = Some(cand);
                            break;
                        }
                    }
                    step *= 0.5;
                }
                let Some(c) = accepted else { break };
                let gain = phi0 - ws.phi(&c, t);
                pt = c;
                // The bound holds at any feasible point, so a certified gap ends
                // the solve without finishing the centering.
                lower = lower.max(ws.certificate(&pt));
                if dec / 2.0 <= 1e-7
                    || pt.f - lower <= st.tolerance * pt.f.abs()
                    || gain <= 1e-15 * phi0.abs()
                {
                    break;
                }
            }
            lower = lower.max(ws.certificate(&pt));
            if st.verbose {
                eprintln!(
                    "barrier t={t:.3e} steps={steps} f={:.9e} bound={lower:.9e}",
                    pt.f
                );
            }
            if u_count == 0 {
                lower = pt.f.min(lower.max(pt.f));
            }
            t *= st.barrier_growth;
        }
        Ok(SdpSolution {
            grams: pt.grams,
            objective: pt.f,
            lower_bound: lower.min(pt.f),
            status,
            iterations: steps,
        })
    }
}
