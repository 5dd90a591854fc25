//! Signal model at a single range bin: array geometry, targets, slow-time
//! codes, steering vectors and snapshot synthesis.
//!
//! Antenna and PRI indices start at 0 and element 0 is the phase reference.
//! Doppler shifts are expressed in radians per PRI.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::complex_pair;

pub use num_complex::Complex64 as C64;

/// Tolerance on `|C(m, n)| = 1` for code entries.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Uniform linear transmit/receive arrays and the number of PRIs per CPI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub tx_count: usize,
    pub rx_count: usize,
    /// Transmit element spacing in meters.
    pub tx_spacing: f64,
    /// Receive element spacing in meters.
    pub rx_spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub pri_count: usize,
}

impl ArrayConfig {
    pub fn new(
        tx_count: usize,
        rx_count: usize,
        tx_spacing: f64,
        rx_spacing: f64,
        wavelength: f64,
        pri_count: usize,
    ) -> Result<Self> {
        let cfg = Self {
            tx_count,
            rx_count,
            tx_spacing,
            rx_spacing,
            wavelength,
            pri_count,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Half-wavelength receive array with `d_t = Mr * d_r`, i.e. a filled
    /// uniform virtual array of `Mt * Mr` elements. Wavelength is 1 m.
    pub fn filled_virtual(tx_count: usize, rx_count: usize, pri_count: usize) -> Result<Self> {
        Self::new(
            tx_count,
            rx_count,
            rx_count as f64 * 0.5,
            0.5,
            1.0,
            pri_count,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_count == 0 || self.rx_count == 0 {
            return Err(Error::InvalidConfig("antenna counts must be at least 1".into()));
        }
        if self.pri_count < 2 {
            return Err(Error::InvalidConfig("pri_count must be at least 2".into()));
        }
        for (name, v) in [
            ("tx_spacing", self.tx_spacing),
            ("rx_spacing", self.rx_spacing),
            ("wavelength", self.wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn virtual_count(&self) -> usize {
        self.tx_count * self.rx_count
    }

    /// True when `d_t = Mr * d_r`, so transmit/receive pairs tile a uniform
    /// virtual array with spacing `d_r`.
    pub fn has_uniform_virtual_array(&self) -> bool {
        let expected = self.rx_count as f64 * self.rx_spacing;
        (self.tx_spacing - expected).abs() <= 1e-9 * expected
    }

    /// Extent of the virtual aperture in meters, `(Mt-1) d_t + Mr d_r`.
    pub fn virtual_aperture(&self) -> f64 {
        (self.tx_count as f64 - 1.0) * self.tx_spacing + self.rx_count as f64 * self.rx_spacing
    }

    pub(crate) fn tx_spacing_wl(&self) -> f64 {
        self.tx_spacing / self.wavelength
    }

    pub(crate) fn rx_spacing_wl(&self) -> f64 {
        self.rx_spacing / self.wavelength
    }
}

/// A point target at the range bin of interest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// Azimuth in radians, inside `(-pi/2, pi/2)`.
    pub azimuth: f64,
    /// Doppler shift in radians per PRI, inside `[-pi, pi)`.
    pub doppler: f64,
    #[serde(with = "complex_pair")]
    pub amplitude: C64,
}

impl Target {
    pub fn new(azimuth: f64, doppler: f64, amplitude: C64) -> Result<Self> {
        check_azimuth(azimuth)?;
        if !doppler.is_finite() || !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(Error::Parameter("non-finite target parameter".into()));
        }
        Ok(Self {
            azimuth,
            doppler: wrap_doppler(doppler),
            amplitude,
        })
    }
}

/// Targets plus the white-noise power `sigma^2`.
///
/// `noise_power = 0` is accepted so that noiseless snapshots can be
/// synthesized; information-matrix computations reject it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScene {
    pub targets: Vec<Target>,
    pub noise_power: f64,
}

impl TargetScene {
    pub fn new(targets: Vec<Target>, noise_power: f64) -> Result<Self> {
        let scene = Self {
            targets,
            noise_power,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::NoisePower(self.noise_power));
        }
        for t in &self.targets {
            check_azimuth(t.azimuth)?;
            if !(-PI..PI).contains(&t.doppler) {
                return Err(Error::Parameter(format!(
                    "doppler {} outside [-pi, pi)",
                    t.doppler
                )));
            }
        }
        for (i, a) in self.targets.iter().enumerate() {
            for b in &self.targets[i + 1..] {
                if a.azimuth == b.azimuth && a.doppler == b.doppler {
                    return Err(Error::Parameter(format!(
                        "two targets share (theta, omega) = ({}, {})",
                        a.azimuth, a.doppler
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn with_noise_power(&self, noise_power: f64) -> Self {
        Self {
            targets: self.targets.clone(),
            noise_power,
        }
    }

    /// Rescales the noise so that `scene_snr` equals `snr_db`.
    pub fn with_snr(&self, snr_db: f64) -> Result<Self> {
        let weakest = self.min_power()?;
        Ok(self.with_noise_power(weakest * 10f64.powf(-snr_db / 10.0)))
    }

    fn min_power(&self) -> Result<f64> {
        self.targets
            .iter()
            .map(|t| t.amplitude.norm_sqr())
            .reduce(f64::min)
            .ok_or(Error::EmptyScene)
    }
}

/// Unimodular `Mt x N` slow-time code; column `n` holds the phases applied
/// by every transmitter during PRI `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeMatrix {
    entries: DMatrix<C64>,
}

impl CodeMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Dimension("code matrix must be non-empty".into()));
        }
        if let Some(bad) = entries
            .iter()
            .find(|c| !((c.norm() - 1.0).abs() <= UNIT_MODULUS_TOL))
        {
            return Err(Error::Parameter(format!(
                "code entry {bad} is not unit modulus"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_phases(phases: &DMatrix<f64>) -> Result<Self> {
        Self::new(phases.map(|p| C64::from_polar(1.0, p)))
    }

    /// Every entry equal to 1.
    pub fn ones(tx_count: usize, pri_count: usize) -> Self {
        Self {
            entries: DMatrix::from_element(tx_count, pri_count, C64::new(1.0, 0.0)),
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn tx_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn pri_count(&self) -> usize {
        self.entries.ncols()
    }

    pub fn phases(&self) -> DMatrix<f64> {
        self.entries.map(|c| c.arg())
    }

    pub fn column(&self, n: usize) -> DVector<C64> {
        self.entries.column(n).into_owned()
    }

    /// Per-PRI rank-one Gram matrices `conj(c_n) c_n^T`.
    pub fn grams(&self) -> Vec<DMatrix<C64>> {
        (0..self.pri_count())
            .map(|n| {
                let c = self.entries.column(n);
                c.map(|z| z.conj()) * c.transpose()
            })
            .collect()
    }

    /// Multiplies column `n` by `exp(j * phases[n])`.
    pub fn rotate_columns(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.pri_count() {
            return Err(Error::Dimension(format!(
                "{} column phases for {} PRIs",
                phases.len(),
                self.pri_count()
            )));
        }
        let mut entries = self.entries.clone();
        for (n, p) in phases.iter().enumerate() {
            let rot = C64::from_polar(1.0, *p);
            entries.column_mut(n).iter_mut().for_each(|z| *z *= rot);
        }
        Self::new(entries)
    }

    pub fn check_dims(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.tx_count() != cfg.tx_count || self.pri_count() != cfg.pri_count {
            return Err(Error::Dimension(format!(
                "code is {}x{}, array expects {}x{}",
                self.tx_count(),
                self.pri_count(),
                cfg.tx_count,
                cfg.pri_count
            )));
        }
        Ok(())
    }
}

/// Slow-time snapshot `X` (`Mr x N`) at one range bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub data: DMatrix<C64>,
}

impl Snapshot {
    pub fn new(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    pub fn check_dims(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.data.nrows() != cfg.rx_count || self.data.ncols() != cfg.pri_count {
            return Err(Error::Dimension(format!(
                "snapshot is {}x{}, array expects {}x{}",
                self.data.nrows(),
                self.data.ncols(),
                cfg.rx_count,
                cfg.pri_count
            )));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Wraps a Doppler shift into `[-pi, pi)`.
pub fn wrap_doppler(omega: f64) -> f64 {
    let w = (omega + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

pub fn check_azimuth(theta: f64) -> Result<()> {
    if theta.is_finite() && theta.abs() < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::AngleDomain(theta))
    }
}

// Element m: exp(-j 2 pi s m sin(theta)), s = spacing / wavelength.
pub(crate) fn ula(count: usize, spacing_wl: f64, theta: f64) -> DVector<C64> {
    let step = -2.0 * PI * spacing_wl * theta.sin();
    DVector::from_fn(count, |m, _| C64::from_polar(1.0, step * m as f64))
}

pub(crate) fn ula_derivative(count: usize, spacing_wl: f64, theta: f64) -> DVector<C64> {
    let k = -2.0 * PI * spacing_wl;
    let (s, c) = theta.sin_cos();
    DVector::from_fn(count, |m, _| {
        let m = m as f64;
        C64::new(0.0, k * m * c) * C64::from_polar(1.0, k * m * s)
    })
}

pub fn tx_steering(theta: f64, cfg: &ArrayConfig) -> Result<DVector<C64>> {
    check_azimuth(theta)?;
    Ok(ula(cfg.tx_count, cfg.tx_spacing_wl(), theta))
}

pub fn rx_steering(theta: f64, cfg: &ArrayConfig) -> Result<DVector<C64>> {
    check_azimuth(theta)?;
    Ok(ula(cfg.rx_count, cfg.rx_spacing_wl(), theta))
}

/// Slow-time steering `[1, e^{jw}, ..., e^{j(N-1)w}]`.
pub fn doppler_steering(omega: f64, pri_count: usize) -> DVector<C64> {
    let w = wrap_doppler(omega);
    DVector::from_fn(pri_count, |n, _| C64::from_polar(1.0, w * n as f64))
}

// v_n = (c_n^T a) e^{j w n} for an arbitrary transmit-side vector `a`.
pub(crate) fn code_project(code: &CodeMatrix, a: &DVector<C64>, omega: f64) -> DVector<C64> {
    let proj = code.entries().transpose() * a;
    DVector::from_fn(proj.len(), |n, _| {
        proj[n] * C64::from_polar(1.0, omega * n as f64)
    })
}

/// Column of `V = C^T A_t ⊙ D` for one target.
pub fn v_vector(
    theta: f64,
    omega: f64,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<DVector<C64>> {
    code.check_dims(cfg)?;
    let at = tx_steering(theta, cfg)?;
    Ok(code_project(code, &at, omega))
}

/// Derivatives of the receive steering and of `v` with respect to azimuth
/// and Doppler.
#[derive(Clone, Debug)]
pub struct SteeringDerivatives {
    pub rx: DVector<C64>,
    pub v_theta: DVector<C64>,
    pub v_omega: DVector<C64>,
}

/// Analytic derivatives. Unlike the steering vectors themselves these are
/// accepted on the closed interval `[-pi/2, pi/2]`.
pub fn steering_derivatives(
    theta: f64,
    omega: f64,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<SteeringDerivatives> {
    if !(theta.is_finite() && theta.abs() <= FRAC_PI_2) {
        return Err(Error::AngleDomain(theta));
    }
    code.check_dims(cfg)?;
    let rx = ula_derivative(cfg.rx_count, cfg.rx_spacing_wl(), theta);
    let at = ula(cfg.tx_count, cfg.tx_spacing_wl(), theta);
    let at_dot = ula_derivative(cfg.tx_count, cfg.tx_spacing_wl(), theta);
    let v = code_project(code, &at, omega);
    let v_theta = code_project(code, &at_dot, omega);
    let v_omega = DVector::from_fn(v.len(), |n, _| C64::new(0.0, n as f64) * v[n]);
    Ok(SteeringDerivatives {
        rx,
        v_theta,
        v_omega,
    })
}

/// Noise-free snapshot `sum_k a_r(theta_k) b_k v_k^T`.
pub fn noiseless_mean(
    targets: &[Target],
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<DMatrix<C64>> {
    code.check_dims(cfg)?;
    let mut x = DMatrix::zeros(cfg.rx_count, cfg.pri_count);
    for t in targets {
        let ar = rx_steering(t.azimuth, cfg)?;
        let v = v_vector(t.azimuth, t.doppler, code, cfg)?;
        x += (ar * t.amplitude) * v.transpose();
    }
    Ok(x)
}

/// Draws `X = sum_k a_r(theta_k) b_k v_k^T + E` with circular white noise of
/// per-entry variance `sigma^2`. Equal seeds give identical snapshots.
pub fn synthesize(
    scene: &TargetScene,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    seed: u64,
) -> Result<Snapshot> {
    cfg.validate()?;
    let mut x = noiseless_mean(&scene.targets, code, cfg)?;
    if scene.noise_power > 0.0 {
        let scale = (scene.noise_power / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for z in x.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += C64::new(scale * re, scale * im);
        }
    }
    Ok(Snapshot::new(x))
}

/// `10 log10(min_k |b_k|^2 / sigma^2)` in dB.
pub fn scene_snr(scene: &TargetScene) -> Result<f64> {
    let weakest = scene.min_power()?;
    Ok(10.0 * (weakest / scene.noise_power).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(mt: usize, mr: usize, dt: f64, dr: f64, n: usize) -> ArrayConfig {
        ArrayConfig::new(mt, mr, dt, dr, 1.0, n).unwrap()
    }

    fn random_code(mt: usize, n: usize, seed: u64) -> CodeMatrix {
        crate::sequences::random_code(mt, n, seed)
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let c = cfg(4, 3, 5.0, 0.5, 8);
        for v in [tx_steering(0.0, &c).unwrap(), rx_steering(0.0, &c).unwrap()] {
            assert!(v.iter().all(|z| (*z - C64::new(1.0, 0.0)).norm() == 0.0));
        }
    }

    #[test]
    fn endfire_half_wavelength_alternates() {
        // theta = pi/2 is outside the open domain; the unchecked builder covers it.
        let v = ula(2, 0.5, FRAC_PI_2);
        assert_relative_eq!(v[0].re, 1.0);
        assert!((v[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            tx_steering(FRAC_PI_2, &cfg(2, 2, 0.5, 0.5, 4)),
            Err(Error::AngleDomain(_))
        ));
    }

    #[test]
    fn tx_steering_matches_scalar_phase_loop() {
        let c = cfg(3, 2, 5.0, 0.5, 4);
        let theta = 15f64.to_radians();
        let v = tx_steering(theta, &c).unwrap();
        for m in 0..3 {
            let phase = -10.0 * PI * m as f64 * theta.sin();
            let expected = C64::new(phase.cos(), phase.sin());
            assert!((v[m] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn rx_steering_thirty_degrees_quarter_turns() {
        let c = cfg(1, 4, 0.5, 0.5, 4);
        let v = rx_steering(30f64.to_radians(), &c).unwrap();
        let expected = [
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
        ];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn doppler_steering_values() {
        assert!(doppler_steering(0.0, 5).iter().all(|z| z.re == 1.0 && z.im == 0.0));
        let d = doppler_steering(PI, 4);
        for (n, z) in d.iter().enumerate() {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((z - C64::new(s, 0.0)).norm() < 1e-14);
        }
        let d = doppler_steering(0.1, 64);
        assert!((d[63] - C64::from_polar(1.0, 6.3)).norm() < 1e-13);
    }

    #[test]
    fn steering_conjugate_symmetry() {
        let c = cfg(5, 3, 2.5, 0.5, 4);
        let a = tx_steering(0.4, &c).unwrap();
        let b = tx_steering(-0.4, &c).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.conj() - y).norm() < 1e-14);
        }
    }

    #[test]
    fn v_vector_special_cases() {
        let c = cfg(1, 2, 0.5, 0.5, 6);
        let code = CodeMatrix::ones(1, 6);
        let v = v_vector(0.3, 0.7, &code, &c).unwrap();
        let d = doppler_steering(0.7, 6);
        assert!((v - d).norm() < 1e-14);

        let c = cfg(4, 2, 1.0, 0.5, 6);
        let code = CodeMatrix::ones(4, 6);
        let v = v_vector(0.0, 0.7, &code, &c).unwrap();
        let d = doppler_steering(0.7, 6) * C64::new(4.0, 0.0);
        assert!((v - d).norm() < 1e-13);
    }

    #[test]
    fn v_vector_matches_two_loop_evaluation() {
        let c = cfg(4, 3, 1.5, 0.5, 8);
        let code = random_code(4, 8, 11);
        let (theta, omega) = (15f64.to_radians(), 0.1);
        let v = v_vector(theta, omega, &code, &c).unwrap();
        for n in 0..8 {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..4 {
                let ph = -2.0 * PI * 1.5 * m as f64 * theta.sin() + omega * n as f64;
                acc += code.entries()[(m, n)] * C64::from_polar(1.0, ph);
            }
            assert!((acc - v[n]).norm() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let c = cfg(4, 3, 1.5, 0.5, 8);
        let code = random_code(3, 8, 1);
        assert!(matches!(v_vector(0.1, 0.1, &code, &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn derivative_edge_cases() {
        let c = cfg(3, 4, 2.0, 0.5, 8);
        let code = random_code(3, 8, 5);
        for theta in [FRAC_PI_2, -FRAC_PI_2] {
            let d = steering_derivatives(theta, 0.3, &code, &c).unwrap();
            assert!(d.rx.norm() < 1e-12);
        }
        let d = steering_derivatives(0.2, 1.3, &code, &c).unwrap();
        assert_eq!(d.v_omega[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn derivatives_match_central_differences() {
        let c = cfg(4, 5, 2.5, 0.5, 16);
        let code = random_code(4, 16, 3);
        let (theta, omega, h) = (0.37, -0.8, 1e-6);
        let d = steering_derivatives(theta, omega, &code, &c).unwrap();
        let rel = |a: &DVector<C64>, b: &DVector<C64>| (a - b).norm() / b.norm();

        let fd_rx = (rx_steering(theta + h, &c).unwrap() - rx_steering(theta - h, &c).unwrap())
            / C64::new(2.0 * h, 0.0);
        assert!(rel(&fd_rx, &d.rx) < 1e-6);

        let fd_vt = (v_vector(theta + h, omega, &code, &c).unwrap()
            - v_vector(theta - h, omega, &code, &c).unwrap())
            / C64::new(2.0 * h, 0.0);
        assert!(rel(&fd_vt, &d.v_theta) < 1e-6);

        let fd_vw = (v_vector(theta, omega + h, &code, &c).unwrap()
            - v_vector(theta, omega - h, &code, &c).unwrap())
            / C64::new(2.0 * h, 0.0);
        assert!(rel(&fd_vw, &d.v_omega) < 1e-6);
    }

    #[test]
    fn synthesize_noiseless_cases() {
        let c = cfg(2, 3, 1.5, 0.5, 8);
        let code = random_code(2, 8, 2);
        let empty = TargetScene::new(vec![], 0.0).unwrap();
        let x = synthesize(&empty, &code, &c, 1).unwrap();
        assert!(x.data.iter().all(|z| z.norm() == 0.0));

        let c1 = cfg(1, 1, 0.5, 0.5, 8);
        let b = C64::new(0.3, -0.4);
        let scene = TargetScene::new(vec![Target::new(0.2, 0.9, b).unwrap()], 0.0).unwrap();
        let x = synthesize(&scene, &CodeMatrix::ones(1, 8), &c1, 0).unwrap();
        for n in 0..8 {
            let expected = b * C64::from_polar(1.0, 0.9 * n as f64);
            assert!((x.data[(0, n)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn synthesize_two_targets_is_superposition() {
        let c = cfg(3, 4, 2.0, 0.5, 8);
        let code = random_code(3, 8, 9);
        let t1 = Target::new(0.2, 0.5, C64::new(1.0, 0.5)).unwrap();
        let t2 = Target::new(-0.6, -2.0, C64::new(-0.2, 0.8)).unwrap();
        let scene = TargetScene::new(vec![t1, t2], 0.0).unwrap();
        let x = synthesize(&scene, &code, &c, 0).unwrap();
        let mut expected = DMatrix::<C64>::zeros(4, 8);
        for t in [t1, t2] {
            for r in 0..4 {
                for n in 0..8 {
                    let mut vn = C64::new(0.0, 0.0);
                    for m in 0..3 {
                        let ph = -2.0 * PI * 2.0 * m as f64 * t.azimuth.sin();
                        vn += code.entries()[(m, n)] * C64::from_polar(1.0, ph);
                    }
                    vn *= C64::from_polar(1.0, t.doppler * n as f64);
                    let ar = C64::from_polar(1.0, -PI * r as f64 * t.azimuth.sin());
                    expected[(r, n)] += ar * t.amplitude * vn;
                }
            }
        }
        assert!((x.data - expected).norm() < 1e-12);
    }

    #[test]
    fn synthesize_is_deterministic_and_noise_has_right_power() {
        let c = cfg(2, 8, 4.0, 0.5, 64);
        let code = random_code(2, 64, 4);
        let scene = TargetScene::new(vec![], 2.0).unwrap();
        let a = synthesize(&scene, &code, &c, 42).unwrap();
        let b = synthesize(&scene, &code, &c, 42).unwrap();
        assert_eq!(a, b);
        let c2 = synthesize(&scene, &code, &c, 43).unwrap();
        assert_ne!(a, c2);
        let power = a.energy() / (8.0 * 64.0);
        assert!((power - 2.0).abs() < 0.3, "{power}");
    }

    #[test]
    fn snr_definition() {
        let b = C64::new(1.0, 1.0) / (10.0 * 2f64.sqrt());
        let t = Target::new(15f64.to_radians(), 0.1, b).unwrap();
        let scene = TargetScene::new(vec![t], 1e-3).unwrap();
        assert_relative_eq!(scene_snr(&scene).unwrap(), 10.0, epsilon = 1e-12);
        let unit = TargetScene::new(vec![Target::new(0.0, 0.0, C64::new(1.0, 0.0)).unwrap()], 1.0)
            .unwrap();
        assert_relative_eq!(scene_snr(&unit).unwrap(), 0.0);
        assert!(matches!(
            scene_snr(&TargetScene::new(vec![], 1.0).unwrap()),
            Err(Error::EmptyScene)
        ));
    }

    #[test]
    fn scene_rejects_duplicates_and_bad_noise() {
        let t = Target::new(0.1, 0.2, C64::new(1.0, 0.0)).unwrap();
        assert!(TargetScene::new(vec![t, t], 1.0).is_err());
        assert!(TargetScene::new(vec![t], -1.0).is_err());
    }

    #[test]
    fn doppler_wraps_into_principal_interval() {
        assert_relative_eq!(wrap_doppler(PI), -PI);
        assert_relative_eq!(wrap_doppler(3.0 * PI + 0.5), -PI + 0.5, epsilon = 1e-12);
        assert_relative_eq!(wrap_doppler(-0.25), -0.25);
    }
}
