//! Coarse angle-Doppler grid of the concentrated ML criterion
//! `J(theta, w) = |a_r^H X v^*|^2 / (Mr ||v||^2)`.
//!
//! When `d_t = Mr d_r` the transmit-receive phase `d_t m + d_r r` is
//! `d_r (m Mr + r)`, so after forming `z_{q,n} = conj(C(m, n)) X(r, n)` with
//! `q = m Mr + r` the angle sum is a length-`Mt Mr` DFT and the Doppler sum
//! a length-`N` DFT. Both are zero-padded to the grid sizes.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ula, ArrayConfig, CodeMatrix, Snapshot, C64};

/// Grid sizes. Angle cells are uniform in `sin(theta)`, Doppler cells in `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleDopplerGrid {
    pub angle_bins: usize,
    pub doppler_bins: usize,
}

impl AngleDopplerGrid {
    pub fn new(angle_bins: usize, doppler_bins: usize) -> Self {
        Self {
            angle_bins,
            doppler_bins,
        }
    }

    /// `8 x` the next powers of two above the virtual aperture and `N`.
    pub fn for_array(cfg: &ArrayConfig) -> Self {
        Self {
            angle_bins: cfg.virtual_count().next_power_of_two() * 8,
            doppler_bins: cfg.pri_count.next_power_of_two() * 8,
        }
    }

    pub fn validate(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.angle_bins < cfg.virtual_count() || self.doppler_bins < cfg.pri_count {
            return Err(Error::InvalidConfig(format!(
                "grid {}x{} smaller than virtual aperture {} x N {}",
                self.angle_bins,
                self.doppler_bins,
                cfg.virtual_count(),
                cfg.pri_count
            )));
        }
        Ok(())
    }

    /// Largest `|sin theta|` spanned by the angle grid. With `d_r <= lambda/2`
    /// the electrical angle `2 pi d_r sin(theta) / lambda` covers `[-pi, pi)`.
    fn sine_span(cfg: &ArrayConfig) -> f64 {
        let s = cfg.rx_spacing_wl();
        if s <= 0.5 {
            0.5 / s
        } else {
            1.0
        }
    }

    /// Azimuth of angle cell `l`, `None` when the cell is outside `(-pi/2, pi/2)`.
    pub fn angle(&self, l: usize, cfg: &ArrayConfig) -> Option<f64> {
        let u = -1.0 + 2.0 * l as f64 / self.angle_bins as f64;
        let s = u * Self::sine_span(cfg);
        (s.abs() < 1.0).then(|| s.asin())
    }

    pub fn doppler(&self, p: usize) -> f64 {
        -PI + 2.0 * PI * p as f64 / self.doppler_bins as f64
    }

    pub fn angles(&self, cfg: &ArrayConfig) -> Vec<Option<f64>> {
        (0..self.angle_bins).map(|l| self.angle(l, cfg)).collect()
    }

    pub fn dopplers(&self) -> Vec<f64> {
        (0..self.doppler_bins).map(|p| self.doppler(p)).collect()
    }

    /// Whether the FFT path applies: uniform virtual array and `d_r <= lambda/2`.
    pub fn fft_capable(cfg: &ArrayConfig) -> bool {
        cfg.has_uniform_virtual_array() && cfg.rx_spacing_wl() <= 0.5
    }
}

/// `sum_n |c_n^T a_t(theta)|^2`.
pub fn v_energy(code: &CodeMatrix, cfg: &ArrayConfig, theta: f64) -> f64 {
    let at = ula(cfg.tx_count, cfg.tx_spacing_wl(), theta);
    (code.entries().transpose() * at).norm_squared()
}

/// Criterion `J` at one point, evaluated directly.
pub fn criterion(x: &DMatrix<C64>, code: &CodeMatrix, cfg: &ArrayConfig, theta: f64, omega: f64) -> f64 {
    let ar = ula(cfg.rx_count, cfg.rx_spacing_wl(), theta);
    let at = ula(cfg.tx_count, cfg.tx_spacing_wl(), theta);
    let proj = code.entries().transpose() * at;
    let energy = proj.norm_squared();
    if energy <= 0.0 {
        return 0.0;
    }
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..x.ncols() {
        let mut w = C64::new(0.0, 0.0);
        for r in 0..x.nrows() {
            w += ar[r].conj() * x[(r, n)];
        }
        acc += w * (proj[n] * C64::from_polar(1.0, omega * n as f64)).conj();
    }
    acc.norm_sqr() / (cfg.rx_count as f64 * energy)
}

/// Grid evaluator with cached FFT plans and `||v||^2` per angle cell.
#[derive(Clone)]
pub struct GridEvaluator {
    grid: AngleDopplerGrid,
    cfg: ArrayConfig,
    code: CodeMatrix,
    angles: Vec<Option<f64>>,
    energy: Vec<f64>,
    plans: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl std::fmt::Debug for GridEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridEvaluator")
            .field("grid", &self.grid)
            .field("fft", &self.plans.is_some())
            .finish()
    }
}

impl GridEvaluator {
    pub fn new(code: &CodeMatrix, cfg: &ArrayConfig, grid: AngleDopplerGrid) -> Result<Self> {
        cfg.validate()?;
        code.check_dims(cfg)?;
        grid.validate(cfg)?;
        let angles = grid.angles(cfg);
        let energy = angles
            .iter()
            .map(|a| a.map_or(0.0, |t| v_energy(code, cfg, t)))
            .collect();
        let plans = AngleDopplerGrid::fft_capable(cfg).then(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft_inverse(grid.angle_bins),
                planner.plan_fft_forward(grid.doppler_bins),
            )
        });
        Ok(Self {
            grid,
            cfg: cfg.clone(),
            code: code.clone(),
            angles,
            energy,
            plans,
        })
    }

    pub fn grid(&self) -> AngleDopplerGrid {
        self.grid
    }

    pub fn uses_fft(&self) -> bool {
        self.plans.is_some()
    }

    pub fn angles(&self) -> &[Option<f64>] {
        &self.angles
    }

    pub fn evaluate(&self, x: &Snapshot) -> Result<DMatrix<f64>> {
        x.check_dims(&self.cfg)?;
        Ok(match &self.plans {
            Some((spatial, doppler)) => self.evaluate_fft(&x.data, spatial.as_ref(), doppler.as_ref()),
            None => self.evaluate_direct(&x.data),
        })
    }

    fn evaluate_fft(&self, x: &DMatrix<C64>, spatial: &dyn Fft<f64>, doppler: &dyn Fft<f64>) -> DMatrix<f64> {
        let (mt, mr, n) = (self.cfg.tx_count, self.cfg.rx_count, self.cfg.pri_count);
        let (lt, lw) = (self.grid.angle_bins, self.grid.doppler_bins);
        let c = self.code.entries();
        let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        // Grid phases start at -pi, hence the (-1)^q and (-1)^n modulations.
        let mut cols = vec![C64::new(0.0, 0.0); lt * n];
        for p in 0..n {
            let buf = &mut cols[p * lt..(p + 1) * lt];
            for m in 0..mt {
                for r in 0..mr {
                    let q = m * mr + r;
                    buf[q] = c[(m, p)].conj() * x[(r, p)] * sign(q);
                }
            }
            spatial.process(buf);
        }
        let mut out = DMatrix::zeros(lt, lw);
        let mut row = vec![C64::new(0.0, 0.0); lw];
        for l in 0..lt {
            let e = self.energy[l];
            if e <= 0.0 {
                continue;
            }
            row.fill(C64::new(0.0, 0.0));
            for p in 0..n {
                row[p] = cols[p * lt + l] * sign(p);
            }
            doppler.process(&mut row);
            let scale = 1.0 / (mr as f64 * e);
            for (q, z) in row.iter().enumerate() {
                out[(l, q)] = z.norm_sqr() * scale;
            }
        }
        out
    }

    fn evaluate_direct(&self, x: &DMatrix<C64>) -> DMatrix<f64> {
        let (mr, n) = (self.cfg.rx_count, self.cfg.pri_count);
        let lw = self.grid.doppler_bins;
        let mut out = DMatrix::zeros(self.grid.angle_bins, lw);
        let c = self.code.entries();
        for (l, theta) in self.angles.iter().enumerate() {
            let Some(theta) = *theta else { continue };
            let e = self.energy[l];
            if e <= 0.0 {
                continue;
            }
            let ar = ula(mr, self.cfg.rx_spacing_wl(), theta);
            let at = ula(self.cfg.tx_count, self.cfg.tx_spacing_wl(), theta);
            let proj = c.transpose() * at;
            // w_n = conj(c_n^T a_t) a_r^H x_n
            let w: Vec<C64> = (0..n)
                .map(|p| proj[p].conj() * (0..mr).map(|r| ar[r].conj() * x[(r, p)]).sum::<C64>())
                .collect();
            for q in 0..lw {
                let om = self.grid.doppler(q);
                let s: C64 = w
                    .iter()
                    .enumerate()
                    .map(|(p, wp)| wp * C64::from_polar(1.0, -om * p as f64))
                    .sum();
                out[(l, q)] = s.norm_sqr() / (mr as f64 * e);
            }
        }
        out
    }
}

/// Grid of the criterion on `x`, through the FFT path whenever the geometry
/// allows it and by direct evaluation otherwise.
pub fn grid_objective(
    x: &Snapshot,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    grid: AngleDopplerGrid,
) -> Result<DMatrix<f64>> {
    let ev = GridEvaluator::new(code, cfg, grid)?;
    if !ev.uses_fft() {
        eprintln!("notice: virtual array is not uniform; grid evaluated directly");
    }
    ev.evaluate(x)
}

/// Direct evaluation regardless of geometry.
pub fn grid_objective_direct(
    x: &Snapshot,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    grid: AngleDopplerGrid,
) -> Result<DMatrix<f64>> {
    let ev = GridEvaluator::new(code, cfg, grid)?;
    x.check_dims(cfg)?;
    Ok(ev.evaluate_direct(&x.data))
}

/// Cell of the maximum; ties go to the lowest `l * L_w + p`.
pub fn grid_argmax(values: &DMatrix<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for l in 0..values.nrows() {
        for p in 0..values.ncols() {
            let v = values[(l, p)];
            if v > best_v {
                best_v = v;
                best = (l, p);
            }
        }
    }
    best
}
