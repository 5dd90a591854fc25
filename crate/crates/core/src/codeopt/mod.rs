//! CRB-driven slow-time code design.
//!
//! The FIM depends on the code only through the per-PRI Gram matrices
//! `G_n = c_n^* c_n^T`, and it does so linearly. Relaxing the rank-one and
//! unit-modulus constraints on `G_n` (keeping `G_n ⪰ 0` with unit diagonal)
//! turns `min tr(W F^{-1})` into a convex semidefinite program. A unimodular
//! code is then read off the principal eigenvectors of the solution.

mod barrier;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use barrier::{BarrierSolver, SolverSettings};

use crate::error::{Error, Result};
use crate::fim::{
    self, fim_from_products, FimMatrix, ParamSelection, RxGrams, SlowTimeProducts,
};
use crate::model::{ula, ula_derivative, ArrayConfig, CodeMatrix, TargetScene, C64};

/// Per-PRI code Gram matrices `G_n`, each `Mt x Mt` Hermitian.
pub type CodeGram = Vec<DMatrix<C64>>;

/// Linear operator taking the code Grams of an anchor scene to its FIM.
///
/// With `Omega_n = [a_t(theta_k) e^{j w_k n} | da_t e^{j w_k n} | j n a_t e^{j w_k n}]`
/// (an `Mt x 3K` matrix), the slow-time products are the blocks of
/// `Q = sum_n Omega_n^H G_n Omega_n`.
#[derive(Clone, Debug)]
pub struct FimLinearMap {
    steer: Vec<DMatrix<C64>>,
    rx: RxGrams,
    amplitudes: DVector<C64>,
    noise_power: f64,
    tx_count: usize,
}

pub fn fim_linear_map(anchor: &TargetScene, cfg: &ArrayConfig) -> Result<FimLinearMap> {
    cfg.validate()?;
    if anchor.is_empty() {
        return Err(Error::EmptyScene);
    }
    if !(anchor.noise_power > 0.0) {
        return Err(Error::NoisePower(anchor.noise_power));
    }
    let k = anchor.len();
    let (mt, mr, n) = (cfg.tx_count, cfg.rx_count, cfg.pri_count);
    let mut ar = DMatrix::zeros(mr, k);
    let mut ar_dot = DMatrix::zeros(mr, k);
    let mut at = DMatrix::zeros(mt, k);
    let mut at_dot = DMatrix::zeros(mt, k);
    for (i, t) in anchor.targets.iter().enumerate() {
        if !(t.azimuth.abs() <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::AngleDomain(t.azimuth));
        }
        ar.set_column(i, &ula(mr, cfg.rx_spacing_wl(), t.azimuth));
        ar_dot.set_column(i, &ula_derivative(mr, cfg.rx_spacing_wl(), t.azimuth));
        at.set_column(i, &ula(mt, cfg.tx_spacing_wl(), t.azimuth));
        at_dot.set_column(i, &ula_derivative(mt, cfg.tx_spacing_wl(), t.azimuth));
    }
    let steer = (0..n)
        .map(|p| {
            let mut om = DMatrix::zeros(mt, 3 * k);
            for (i, t) in anchor.targets.iter().enumerate() {
                let ph = C64::from_polar(1.0, t.doppler * p as f64);
                let jn = C64::new(0.0, p as f64) * ph;
                for m in 0..mt {
                    om[(m, i)] = at[(m, i)] * ph;
                    om[(m, k + i)] = at_dot[(m, i)] * ph;
                    om[(m, 2 * k + i)] = at[(m, i)] * jn;
                }
            }
            om
        })
        .collect();
    Ok(FimLinearMap {
        steer,
        rx: RxGrams::new(&ar, &ar_dot),
        amplitudes: DVector::from_iterator(k, anchor.targets.iter().map(|t| t.amplitude)),
        noise_power: anchor.noise_power,
        tx_count: mt,
    })
}

impl FimLinearMap {
    pub fn target_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tx_count(&self) -> usize {
        self.tx_count
    }

    pub fn pri_count(&self) -> usize {
        self.steer.len()
    }

    /// Side of the information matrix, `4K`.
    pub fn dim(&self) -> usize {
        4 * self.target_count()
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    fn check_grams(&self, grams: &[DMatrix<C64>]) -> Result<()> {
        if grams.len() != self.pri_count() {
            return Err(Error::Dimension(format!(
                "{} grams for N = {}",
                grams.len(),
                self.pri_count()
            )));
        }
        if let Some(g) = grams.iter().find(|g| g.shape() != (self.tx_count, self.tx_count)) {
            return Err(Error::Dimension(format!(
                "gram is {:?}, expected {}x{}",
                g.shape(),
                self.tx_count,
                self.tx_count
            )));
        }
        Ok(())
    }

    /// `F(G_1, ..., G_N)`. Linear in the Grams, so it is meaningful for any
    /// Hermitian arguments, not only feasible ones.
    pub fn apply(&self, grams: &[DMatrix<C64>]) -> Result<FimMatrix> {
        self.check_grams(grams)?;
        let k3 = 3 * self.target_count();
        let mut q = DMatrix::<C64>::zeros(k3, k3);
        for (om, g) in self.steer.iter().zip(grams) {
            q += om.adjoint() * (g * om);
        }
        Ok(FimMatrix {
            entries: self.fim_from_q(&q),
            noise_power: self.noise_power,
        })
    }

    /// FIM for the code `code`, through its Grams.
    pub fn apply_code(&self, code: &CodeMatrix) -> Result<FimMatrix> {
        self.apply(&code.grams())
    }

    pub(crate) fn fim_from_q(&self, q: &DMatrix<C64>) -> DMatrix<f64> {
        let k = self.target_count();
        let blk = |i: usize, j: usize| q.view((i * k, j * k), (k, k)).into_owned();
        let p = SlowTimeProducts {
            vv: blk(0, 0),
            v_vt: blk(0, 1),
            v_vw: blk(0, 2),
            vt_vt: blk(1, 1),
            vt_vw: blk(1, 2),
            vw_vw: blk(2, 2),
        };
        fim_from_products(&self.rx, &p, &self.amplitudes, self.noise_power)
    }

    /// `Omega_n^H E Omega_n` for a single-entry direction `E`: entry `(a, b)`
    /// is `sum_s alpha_s conj(Omega[p_s, a]) Omega[q_s, b]` over the terms
    /// `alpha_s e_{p_s} e_{q_s}^T` of `E`.
    pub(crate) fn direction_q(&self, n: usize, terms: &[(C64, usize, usize)]) -> DMatrix<C64> {
        let om = &self.steer[n];
        let k3 = om.ncols();
        DMatrix::from_fn(k3, k3, |a, b| {
            terms
                .iter()
                .map(|&(alpha, p, q)| alpha * om[(p, a)].conj() * om[(q, b)])
                .sum()
        })
    }
}

/// A relaxed code-design problem: minimize `tr(W F(G)^{-1})` over
/// `G_n ⪰ 0`, `diag(G_n) = 1`, where `W` selects the parameters in `indices`.
///
/// The textbook epigraph form `min tr(T)` s.t. `[[F, I], [I, T]] ⪰ 0` has the
/// same optimum; the solver works with the eliminated form directly.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub map: FimLinearMap,
    pub selection: ParamSelection,
    pub indices: Vec<usize>,
}

impl SdpProblem {
    /// Selected trace of `F(G)^{-1}`.
    pub fn objective(&self, grams: &[DMatrix<C64>]) -> Result<f64> {
        let f = self.map.apply(grams)?;
        Ok(fim::crb(&f)?.trace(&self.indices))
    }

    pub fn code_objective(&self, code: &CodeMatrix) -> Result<f64> {
        self.objective(&code.grams())
    }
}

pub fn build_sdp(
    anchor: &TargetScene,
    cfg: &ArrayConfig,
    selection: ParamSelection,
) -> Result<SdpProblem> {
    let map = fim_linear_map(anchor, cfg)?;
    let indices = selection.indices(map.target_count());
    if let Some(&bad) = indices.iter().find(|&&i| i >= map.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: map.dim(),
        });
    }
    if indices.is_empty() {
        return Err(Error::Parameter("empty parameter selection".into()));
    }
    // G_n = I is strictly feasible; the solver starts there.
    let identity = vec![DMatrix::identity(cfg.tx_count, cfg.tx_count); cfg.pri_count];
    fim::crb(&map.apply(&identity)?)?;
    Ok(SdpProblem {
        map,
        selection,
        indices,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    /// Stopped on the iteration cap; the bound is still valid.
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub grams: CodeGram,
    /// `tr(W F^{-1})` at the returned Grams.
    pub objective: f64,
    /// Certified lower bound on the relaxed optimum, from a dual-feasible point.
    pub lower_bound: f64,
    pub status: SolverStatus,
    pub iterations: usize,
}

/// Anything able to solve the relaxed problem.
pub trait RelaxationSolver {
    fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution>;
}

pub fn solve_sdp(problem: &SdpProblem) -> Result<SdpSolution> {
    BarrierSolver::default().solve(problem)
}

/// Eigenvalues of each Gram, largest first.
pub fn rank_profiles(grams: &[DMatrix<C64>]) -> Vec<Vec<f64>> {
    grams
        .iter()
        .map(|g| {
            let mut ev: Vec<f64> = g.clone().symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            ev
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub code: CodeMatrix,
    /// `(m, n)` entries whose eigenvector component vanished and were set to 1.
    pub flagged: Vec<(usize, usize)>,
}

fn principal_eigenvector(g: &DMatrix<C64>) -> DVector<C64> {
    let eig = g.clone().symmetric_eigen();
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    eig.eigenvectors.column(best).into_owned()
}

/// Unimodular code from the principal eigenvectors of `conj(G_n)`.
pub fn extract_code(sol: &SdpSolution) -> Result<Extraction> {
    extract_from_grams(&sol.grams)
}

pub fn extract_from_grams(grams: &[DMatrix<C64>]) -> Result<Extraction> {
    let n = grams.len();
    if n == 0 {
        return Err(Error::Dimension("no grams".into()));
    }
    let mt = grams[0].nrows();
    let mut entries = DMatrix::from_element(mt, n, C64::new(1.0, 0.0));
    let mut flagged = Vec::new();
    for (p, g) in grams.iter().enumerate() {
        // conj(G_n) = c_n c_n^H for a feasible rank-one Gram.
        let u = principal_eigenvector(&g.map(|z| z.conj()));
        for m in 0..mt {
            let r = u[m].norm();
            if r < 1e-12 {
                flagged.push((m, p));
            } else {
                entries[(m, p)] = u[m] / r;
            }
        }
    }
    Ok(Extraction {
        code: CodeMatrix::new(entries)?,
        flagged,
    })
}

/// Best of `samples` codes drawn as `c_n = exp(j arg xi)`, `xi ~ CN(0, conj(G_n))`.
pub fn randomized_rounding(
    problem: &SdpProblem,
    grams: &[DMatrix<C64>],
    samples: usize,
    seed: u64,
) -> Result<Option<(CodeMatrix, f64)>> {
    let mt = problem.map.tx_count();
    // Square-root factors U diag(sqrt(max(l, 0))).
    let factors: Vec<DMatrix<C64>> = grams
        .iter()
        .map(|g| {
            let eig = g.map(|z| z.conj()).symmetric_eigen();
            let mut f = eig.eigenvectors.clone();
            for (j, l) in eig.eigenvalues.iter().enumerate() {
                let s = l.max(0.0).sqrt();
                f.column_mut(j).scale_mut(s);
            }
            f
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(CodeMatrix, f64)> = None;
    for _ in 0..samples {
        let mut entries = DMatrix::from_element(mt, grams.len(), C64::new(1.0, 0.0));
        for (p, f) in factors.iter().enumerate() {
            let z = DVector::from_fn(mt, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            });
            let xi = f * z;
            for m in 0..mt {
                let r = xi[m].norm();
                if r > 1e-300 {
                    entries[(m, p)] = xi[m] / r;
                }
            }
        }
        let code = CodeMatrix::new(entries)?;
        let value = match problem.code_objective(&code) {
            Ok(v) => v,
            Err(Error::Identifiability { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((code, value));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub selection: ParamSelection,
    pub rounding_samples: usize,
    pub rounding_seed: u64,
    pub solver: SolverSettings,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            selection: ParamSelection::All,
            rounding_samples: 100,
            rounding_seed: 0,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    PrincipalEigenvector,
    RandomizedRounding,
    /// Neither candidate beat the initial code, which is returned unchanged.
    Initial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub selection: ParamSelection,
    pub trace_before: f64,
    pub trace_after: f64,
    /// Selected trace at the principal-eigenvector code.
    pub trace_eigenvector: f64,
    pub relaxed_objective: f64,
    pub relaxed_lower_bound: f64,
    pub solver_status: SolverStatus,
    pub solver_iterations: usize,
    pub method: ExtractionMethod,
    /// Set when neither extraction nor rounding improved on the initial code.
    pub fallback_failed: bool,
    pub flagged_entries: Vec<(usize, usize)>,
    /// Eigenvalues of each relaxed Gram, largest first.
    pub rank_profiles: Vec<Vec<f64>>,
}

impl OptimizeReport {
    /// Relaxed bound <= achieved trace <= initial trace.
    pub fn sandwich_holds(&self) -> bool {
        self.relaxed_lower_bound <= self.trace_after * (1.0 + 1e-9)
            && self.trace_after <= self.trace_before * (1.0 + 1e-12)
    }
}

/// Relax, solve, extract, and round if extraction lost to the initial code.
pub fn optimize_code(
    anchor: &TargetScene,
    cfg: &ArrayConfig,
    initial: &CodeMatrix,
    options: &OptimizeOptions,
) -> Result<(CodeMatrix, OptimizeReport)> {
    initial.check_dims(cfg)?;
    let problem = build_sdp(anchor, cfg, options.selection.clone())?;
    let solver = BarrierSolver::new(options.solver.clone());
    optimize_with(&problem, &solver, initial, options)
}

pub fn optimize_with(
    problem: &SdpProblem,
    solver: &dyn RelaxationSolver,
    initial: &CodeMatrix,
    options: &OptimizeOptions,
) -> Result<(CodeMatrix, OptimizeReport)> {
    let trace_before = problem.code_objective(initial)?;
    let sol = solver.solve(problem)?;
    let ext = extract_code(&sol)?;
    let trace_eig = match problem.code_objective(&ext.code) {
        Ok(v) => v,
        Err(Error::Identifiability { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let (code, trace_after, method, fallback_failed) = if trace_eig <= trace_before {
        (ext.code, trace_eig, ExtractionMethod::PrincipalEigenvector, false)
    } else {
        match randomized_rounding(
            problem,
            &sol.grams,
            options.rounding_samples,
            options.rounding_seed,
        )? {
            Some((c, v)) if v <= trace_before => (c, v, ExtractionMethod::RandomizedRounding, false),
            _ => (initial.clone(), trace_before, ExtractionMethod::Initial, true),
        }
    };
    let report = OptimizeReport {
        selection: problem.selection.clone(),
        trace_before,
        trace_after,
        trace_eigenvector: trace_eig,
        relaxed_objective: sol.objective,
        relaxed_lower_bound: sol.lower_bound,
        solver_status: sol.status,
        solver_iterations: sol.iterations,
        method,
        fallback_failed,
        flagged_entries: ext.flagged,
        rank_profiles: rank_profiles(&sol.grams),
    };
    Ok((code, report))
}
