//! RELAX maximum-likelihood estimation of target azimuth, Doppler and amplitude.
//!
//! Targets are added one at a time. After adding target `k`, the estimates
//! are refined cyclically: each target is re-estimated from the residual
//! left by all others, until the relative change of the least-squares cost
//! between sweeps falls below the tolerance. The model order is chosen by
//! BIC over the orders tried.

mod fine;
mod grid;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use fine::{fine_search, FinePoint};
pub use grid::{
    criterion, grid_argmax, grid_objective, grid_objective_direct, v_energy, AngleDopplerGrid,
    GridEvaluator,
};

use crate::error::{Error, Result};
use crate::io::complex_pair;
use crate::model::{
    check_azimuth, rx_steering, v_vector, wrap_doppler, ArrayConfig, CodeMatrix, Snapshot, Target,
    TargetScene, C64,
};

/// Relative residual below which a fit is treated as exact.
pub const EXACT_FIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub grid: AngleDopplerGrid,
    /// Relative cost change that ends the cyclic refinement.
    pub tolerance: f64,
    pub max_targets: usize,
    pub fine_iterations: usize,
    pub max_sweeps: usize,
    /// Stop adding targets once BIC has not improved for this many orders.
    pub bic_patience: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            grid: AngleDopplerGrid::new(1024, 512),
            tolerance: 1e-3,
            max_targets: 30,
            fine_iterations: 200,
            max_sweeps: 100,
            bic_patience: 3,
        }
    }
}

impl EstimatorConfig {
    pub fn for_array(cfg: &ArrayConfig) -> Self {
        Self {
            grid: AngleDopplerGrid::for_array(cfg),
            ..Self::default()
        }
    }

    pub fn validate(&self, cfg: &ArrayConfig) -> Result<()> {
        self.grid.validate(cfg)?;
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub azimuth: f64,
    pub doppler: f64,
    #[serde(with = "complex_pair")]
    pub amplitude: C64,
}

impl TargetEstimate {
    pub fn to_target(&self) -> Result<Target> {
        Target::new(self.azimuth, self.doppler, self.amplitude)
    }
}

/// Estimates as a scene with the given noise power.
pub fn estimates_to_scene(estimates: &[TargetEstimate], noise_power: f64) -> Result<TargetScene> {
    let targets = estimates.iter().map(|e| e.to_target()).collect::<Result<Vec<_>>>()?;
    TargetScene::new(targets, noise_power)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxResult {
    pub estimates: Vec<TargetEstimate>,
    pub selected_order: usize,
    /// `bic[k]` is the criterion with `k` targets; `-inf` marks an exact fit.
    pub bic: Vec<f64>,
    /// Estimates at every order tried, `orders[k - 1]` holding `k` targets.
    pub orders: Vec<Vec<TargetEstimate>>,
    /// Cost after every sweep, across all orders.
    pub residual_norms: Vec<f64>,
    pub sweeps_per_order: Vec<usize>,
    /// Some order stopped on `max_sweeps` before converging.
    pub hit_sweep_cap: bool,
    pub used_fft: bool,
}

impl RelaxResult {
    pub fn rss(&self) -> f64 {
        *self.residual_norms.last().unwrap_or(&f64::NAN)
    }
}

fn component(e: &TargetEstimate, code: &CodeMatrix, cfg: &ArrayConfig) -> Result<DMatrix<C64>> {
    let ar = rx_steering(e.azimuth, cfg)?;
    let v = v_vector(e.azimuth, e.doppler, code, cfg)?;
    Ok((ar * e.amplitude) * v.transpose())
}

/// `X - sum_{i != omit} b_i a_r(theta_i) v_i^T`.
pub fn residual_snapshot(
    x: &Snapshot,
    estimates: &[TargetEstimate],
    omit: Option<usize>,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<Snapshot> {
    x.check_dims(cfg)?;
    if let Some(k) = omit {
        if k >= estimates.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: estimates.len(),
            });
        }
    }
    let mut r = x.data.clone();
    for (i, e) in estimates.iter().enumerate() {
        if Some(i) != omit {
            r -= component(e, code, cfg)?;
        }
    }
    Ok(Snapshot::new(r))
}

/// Least-squares cost `||X - sum_k b_k a_r v_k^T||_F^2`.
pub fn fit_cost(x: &Snapshot, estimates: &[TargetEstimate], code: &CodeMatrix, cfg: &ArrayConfig) -> Result<f64> {
    Ok(residual_snapshot(x, estimates, None, code, cfg)?.energy())
}

/// `a_r^H X v^* / (||a_r||^2 ||v||^2)`.
pub fn amplitude_estimate(
    x: &Snapshot,
    theta: f64,
    omega: f64,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<C64> {
    x.check_dims(cfg)?;
    let ar = rx_steering(theta, cfg)?;
    let v = v_vector(theta, omega, code, cfg)?;
    let energy = v.norm_squared();
    let scale = (cfg.pri_count * cfg.tx_count * cfg.tx_count) as f64;
    if !(energy > 1e-12 * scale) {
        return Err(Error::SingularSteering { theta });
    }
    let num = (ar.adjoint() * &x.data * v.map(|z| z.conj()))[(0, 0)];
    Ok(num / (cfg.rx_count as f64 * energy))
}

/// BIC cost of one target: each parameter pays the log of the rate at which
/// its Fisher information grows. With `L = N Mt Mr` that is `ln L` for each
/// amplitude part, `ln L + 2 ln N` for Doppler and `ln L + 2 ln(Mt Mr)` for
/// angle, `6 ln L` in total.
pub fn bic_penalty_per_target(cfg: &ArrayConfig) -> f64 {
    6.0 * ((cfg.pri_count * cfg.tx_count * cfg.rx_count) as f64).ln()
}

/// `2 N Mr ln(RSS / (N Mr)) + K * bic_penalty_per_target`; `-inf` for an exact fit.
pub fn bic_from_rss(rss: f64, energy: f64, target_count: usize, cfg: &ArrayConfig) -> f64 {
    let obs = (cfg.pri_count * cfg.rx_count) as f64;
    if rss <= EXACT_FIT * energy || rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    2.0 * obs * (rss / obs).ln() + target_count as f64 * bic_penalty_per_target(cfg)
}

pub fn bic_score(x: &Snapshot, estimates: &[TargetEstimate], code: &CodeMatrix, cfg: &ArrayConfig) -> Result<f64> {
    let rss = fit_cost(x, estimates, code, cfg)?;
    Ok(bic_from_rss(rss, x.energy(), estimates.len(), cfg))
}

/// Outcome of one RELAX step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub estimates: Vec<TargetEstimate>,
    /// Cost after each sweep.
    pub costs: Vec<f64>,
    pub hit_sweep_cap: bool,
}

/// RELAX estimator bound to one code, geometry and configuration.
#[derive(Clone, Debug)]
pub struct RelaxEstimator {
    code: CodeMatrix,
    cfg: ArrayConfig,
    econf: EstimatorConfig,
    grid: GridEvaluator,
}

impl RelaxEstimator {
    pub fn new(code: &CodeMatrix, cfg: &ArrayConfig, econf: &EstimatorConfig) -> Result<Self> {
        econf.validate(cfg)?;
        Ok(Self {
            code: code.clone(),
            cfg: cfg.clone(),
            econf: econf.clone(),
            grid: GridEvaluator::new(code, cfg, econf.grid)?,
        })
    }

    pub fn uses_fft(&self) -> bool {
        self.grid.uses_fft()
    }

    /// Best single target for the residual `xk`: grid peak, then fine search.
    pub fn single(&self, xk: &Snapshot) -> Result<TargetEstimate> {
        let values = self.grid.evaluate(xk)?;
        let (l, p) = grid_argmax(&values);
        let g = self.econf.grid;
        let theta = self.grid.angles()[l].ok_or_else(|| {
            Error::Solver("criterion vanishes on the whole grid".into())
        })?;
        let fp = fine_search(
            &xk.data,
            &self.code,
            &self.cfg,
            (theta, g.doppler(p)),
            g,
            self.econf.fine_iterations,
            3,
        );
        let amplitude = amplitude_estimate(xk, fp.azimuth, fp.doppler, &self.code, &self.cfg)?;
        Ok(TargetEstimate {
            azimuth: fp.azimuth,
            doppler: fp.doppler,
            amplitude,
        })
    }

    // Re-estimate target `i` from its residual, keeping the old position
    // when it scores at least as well.
    fn update(&self, x: &Snapshot, est: &mut [TargetEstimate], i: usize) -> Result<()> {
        let xk = residual_snapshot(x, est, Some(i), &self.code, &self.cfg)?;
        let cand = self.single(&xk)?;
        let old = est[i];
        let c_new = criterion(&xk.data, &self.code, &self.cfg, cand.azimuth, cand.doppler);
        let c_old = criterion(&xk.data, &self.code, &self.cfg, old.azimuth, old.doppler);
        est[i] = if c_new >= c_old {
            cand
        } else {
            TargetEstimate {
                amplitude: amplitude_estimate(&xk, old.azimuth, old.doppler, &self.code, &self.cfg)?,
                ..old
            }
        };
        Ok(())
    }

    /// Adds one target to `current` and refines all of them cyclically.
    pub fn step(&self, x: &Snapshot, current: &[TargetEstimate]) -> Result<StepOutcome> {
        x.check_dims(&self.cfg)?;
        let energy = x.energy();
        let mut est = current.to_vec();
        let fresh = self.single(&residual_snapshot(x, &est, None, &self.code, &self.cfg)?)?;
        est.push(fresh);
        let k = est.len();
        let mut prev = fit_cost(x, current, &self.code, &self.cfg)?;
        let mut costs = Vec::new();
        let mut hit = true;
        for sweep in 0..self.econf.max_sweeps {
            // The newest target first, then the older ones in order.
            if sweep > 0 {
                self.update(x, &mut est, k - 1)?;
            }
            for i in 0..k - 1 {
                self.update(x, &mut est, i)?;
            }
            let cost = fit_cost(x, &est, &self.code, &self.cfg)?;
            costs.push(cost);
            let change = (prev - cost).abs() / prev.max(f64::MIN_POSITIVE);
            prev = cost;
            if k == 1 || change < self.econf.tolerance || cost <= 1e-24 * energy {
                hit = false;
                break;
            }
        }
        Ok(StepOutcome {
            estimates: est,
            costs,
            hit_sweep_cap: hit,
        })
    }

    fn run(&self, x: &Snapshot, max_order: usize, select: bool) -> Result<RelaxResult> {
        x.check_dims(&self.cfg)?;
        let energy = x.energy();
        let mut bic = vec![bic_from_rss(energy, energy, 0, &self.cfg)];
        let mut orders: Vec<Vec<TargetEstimate>> = Vec::new();
        let mut residual_norms = Vec::new();
        let mut sweeps = Vec::new();
        let mut hit = false;
        let mut current: Vec<TargetEstimate> = Vec::new();
        let mut best = 0;
        for k in 1..=max_order {
            if select && bic[best] == f64::NEG_INFINITY {
                break;
            }
            let out = self.step(x, &current)?;
            hit |= out.hit_sweep_cap;
            sweeps.push(out.costs.len());
            let rss = *out.costs.last().expect("at least one sweep");
            residual_norms.extend(out.costs);
            bic.push(bic_from_rss(rss, energy, k, &self.cfg));
            current = out.estimates;
            orders.push(current.clone());
            if bic[k] < bic[best] {
                best = k;
            }
            if select && k - best >= self.econf.bic_patience {
                break;
            }
        }
        let selected = if select { best } else { orders.len() };
        Ok(RelaxResult {
            estimates: if selected == 0 { Vec::new() } else { orders[selected - 1].clone() },
            selected_order: selected,
            bic,
            orders,
            residual_norms,
            sweeps_per_order: sweeps,
            hit_sweep_cap: hit,
            used_fft: self.uses_fft(),
        })
    }

    /// RELAX with BIC order selection up to `max_targets`.
    pub fn estimate(&self, x: &Snapshot) -> Result<RelaxResult> {
        self.run(x, self.econf.max_targets, true)
    }

    /// RELAX with a known number of targets.
    pub fn estimate_order(&self, x: &Snapshot, order: usize) -> Result<RelaxResult> {
        if order == 0 {
            return Err(Error::Parameter("order must be at least 1".into()));
        }
        self.run(x, order, false)
    }
}

pub fn relax_step(
    x: &Snapshot,
    current: &[TargetEstimate],
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    econf: &EstimatorConfig,
) -> Result<StepOutcome> {
    RelaxEstimator::new(code, cfg, econf)?.step(x, current)
}

pub fn relax_estimate(
    x: &Snapshot,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    econf: &EstimatorConfig,
) -> Result<RelaxResult> {
    RelaxEstimator::new(code, cfg, econf)?.estimate(x)
}

pub fn relax_fixed_order(
    x: &Snapshot,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    econf: &EstimatorConfig,
    order: usize,
) -> Result<RelaxResult> {
    RelaxEstimator::new(code, cfg, econf)?.estimate_order(x, order)
}

/// Checks an estimate lies in the model's domain.
pub fn validate_estimate(e: &TargetEstimate) -> Result<()> {
    check_azimuth(e.azimuth)?;
    if wrap_doppler(e.doppler) != e.doppler {
        return Err(Error::Parameter(format!("Doppler {} not wrapped", e.doppler)));
    }
    Ok(())
}
