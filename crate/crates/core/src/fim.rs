//! Fisher information and Cramér-Rao bound for the real parameter vector
//! `[theta^T, omega^T, Re(b)^T, Im(b)^T]` of a `K`-target scene.
//!
//! The information matrix is built from Hadamard products of receive-side
//! Gram matrices and slow-time products such as `V^H V`, which keeps the
//! dependence on the code explicit (see [`crate::codeopt`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    code_project, noiseless_mean, ula, ula_derivative, ArrayConfig, CodeMatrix, Target,
    TargetScene, C64,
};

/// Largest FIM condition number accepted before declaring the parameters
/// unidentifiable.
pub const MAX_CONDITION: f64 = 1e12;

/// The four `K`-long blocks of the parameter vector, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamBlock {
    Azimuth,
    Doppler,
    AmplitudeRe,
    AmplitudeIm,
}

impl ParamBlock {
    /// Position of parameter `block` of target `k` in a `4K` vector.
    pub fn index(self, k: usize, target_count: usize) -> usize {
        let offset = match self {
            ParamBlock::Azimuth => 0,
            ParamBlock::Doppler => 1,
            ParamBlock::AmplitudeRe => 2,
            ParamBlock::AmplitudeIm => 3,
        };
        offset * target_count + k
    }
}

/// Which diagonal entries of the CRB enter a trace metric.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSelection {
    #[default]
    All,
    /// Azimuth and Doppler entries only.
    AngleDoppler,
    Indices(Vec<usize>),
}

impl ParamSelection {
    pub fn indices(&self, target_count: usize) -> Vec<usize> {
        match self {
            ParamSelection::All => (0..4 * target_count).collect(),
            ParamSelection::AngleDoppler => (0..2 * target_count).collect(),
            ParamSelection::Indices(v) => v.clone(),
        }
    }
}

/// Columns of the model matrices for a scene: `A_r`, its azimuth
/// derivative, `V` with both derivatives, and the amplitudes `b`.
#[derive(Clone, Debug)]
pub struct ModelMatrices {
    pub ar: DMatrix<C64>,
    pub ar_dot: DMatrix<C64>,
    pub v: DMatrix<C64>,
    pub v_theta: DMatrix<C64>,
    pub v_omega: DMatrix<C64>,
    pub amplitudes: DVector<C64>,
}

pub fn model_matrices(
    scene: &TargetScene,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
) -> Result<ModelMatrices> {
    if scene.is_empty() {
        return Err(Error::EmptyScene);
    }
    code.check_dims(cfg)?;
    let k = scene.len();
    let (mr, n) = (cfg.rx_count, cfg.pri_count);
    let mut mats = ModelMatrices {
        ar: DMatrix::zeros(mr, k),
        ar_dot: DMatrix::zeros(mr, k),
        v: DMatrix::zeros(n, k),
        v_theta: DMatrix::zeros(n, k),
        v_omega: DMatrix::zeros(n, k),
        amplitudes: DVector::from_iterator(k, scene.targets.iter().map(|t| t.amplitude)),
    };
    for (i, t) in scene.targets.iter().enumerate() {
        if !(t.azimuth.abs() <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::AngleDomain(t.azimuth));
        }
        let at = ula(cfg.tx_count, cfg.tx_spacing_wl(), t.azimuth);
        let at_dot = ula_derivative(cfg.tx_count, cfg.tx_spacing_wl(), t.azimuth);
        let v = code_project(code, &at, t.doppler);
        let v_omega = DVector::from_fn(n, |p, _| C64::new(0.0, p as f64) * v[p]);
        mats.ar
            .set_column(i, &ula(mr, cfg.rx_spacing_wl(), t.azimuth));
        mats.ar_dot
            .set_column(i, &ula_derivative(mr, cfg.rx_spacing_wl(), t.azimuth));
        mats.v_theta
            .set_column(i, &code_project(code, &at_dot, t.doppler));
        mats.v_omega.set_column(i, &v_omega);
        mats.v.set_column(i, &v);
    }
    Ok(mats)
}

/// Receive-side Gram matrices `A_r^H A_r`, `dA_r^H A_r`, `A_r^H dA_r`, `dA_r^H dA_r`.
#[derive(Clone, Debug)]
pub(crate) struct RxGrams {
    pub aa: DMatrix<C64>,
    pub da_a: DMatrix<C64>,
    pub a_da: DMatrix<C64>,
    pub da_da: DMatrix<C64>,
}

impl RxGrams {
    pub fn new(ar: &DMatrix<C64>, ar_dot: &DMatrix<C64>) -> Self {
        Self {
            aa: ar.adjoint() * ar,
            da_a: ar_dot.adjoint() * ar,
            a_da: ar.adjoint() * ar_dot,
            da_da: ar_dot.adjoint() * ar_dot,
        }
    }
}

/// Slow-time products `X^H Y` for `X, Y` in `{V, dV/dtheta, dV/domega}`.
#[derive(Clone, Debug)]
pub(crate) struct SlowTimeProducts {
    pub vv: DMatrix<C64>,
    pub v_vt: DMatrix<C64>,
    pub v_vw: DMatrix<C64>,
    pub vt_vt: DMatrix<C64>,
    pub vt_vw: DMatrix<C64>,
    pub vw_vw: DMatrix<C64>,
}

impl SlowTimeProducts {
    pub fn from_matrices(m: &ModelMatrices) -> Self {
        Self {
            vv: m.v.adjoint() * &m.v,
            v_vt: m.v.adjoint() * &m.v_theta,
            v_vw: m.v.adjoint() * &m.v_omega,
            vt_vt: m.v_theta.adjoint() * &m.v_theta,
            vt_vw: m.v_theta.adjoint() * &m.v_omega,
            vw_vw: m.v_omega.adjoint() * &m.v_omega,
        }
    }
}

fn hadamard(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.component_mul(b)
}

/// `(2/sigma^2) Re{...}` of the block information matrix, given the Gram
/// and slow-time products. Only the upper block triangle is formed; the
/// lower triangle is its transpose.
pub(crate) fn fim_from_products(
    rx: &RxGrams,
    p: &SlowTimeProducts,
    b: &DVector<C64>,
    noise_power: f64,
) -> DMatrix<f64> {
    let k = b.len();
    let bb = DMatrix::from_fn(k, k, |i, j| b[i].conj() * b[j]);
    let bc = DMatrix::from_fn(k, k, |i, _| b[i].conj());
    let vt_v = p.v_vt.adjoint();
    let vw_v = p.v_vw.adjoint();

    let f11 = (hadamard(&rx.da_da, &p.vv)
        + hadamard(&rx.da_a, &p.v_vt)
        + hadamard(&rx.a_da, &vt_v)
        + hadamard(&rx.aa, &p.vt_vt))
    .component_mul(&bb);
    let f12 = (hadamard(&rx.da_a, &p.v_vw) + hadamard(&rx.aa, &p.vt_vw)).component_mul(&bb);
    let f13 = (hadamard(&rx.da_a, &p.vv) + hadamard(&rx.aa, &vt_v)).component_mul(&bc);
    let f22 = hadamard(&rx.aa, &p.vw_vw).component_mul(&bb);
    let f23 = hadamard(&rx.aa, &vw_v).component_mul(&bc);
    let f33 = hadamard(&rx.aa, &p.vv);

    let j = C64::new(0.0, 1.0);
    let upper: [(usize, usize, DMatrix<C64>); 10] = [
        (0, 0, f11),
        (0, 1, f12),
        (0, 2, f13.clone()),
        (0, 3, f13 * j),
        (1, 1, f22),
        (1, 2, f23.clone()),
        (1, 3, f23 * j),
        (2, 2, f33.clone()),
        (2, 3, &f33 * j),
        (3, 3, f33),
    ];
    let scale = 2.0 / noise_power;
    let mut f = DMatrix::zeros(4 * k, 4 * k);
    for (bi, bj, blk) in upper.iter() {
        let re = blk.map(|z| z.re * scale);
        f.view_mut((bi * k, bj * k), (k, k)).copy_from(&re);
        if bi != bj {
            f.view_mut((bj * k, bi * k), (k, k)).copy_from(&re.transpose());
        }
    }
    // Diagonal blocks are Hermitian in exact arithmetic.
    (&f + f.transpose()) * 0.5
}

/// Real symmetric Fisher information matrix together with the noise power
/// it was computed for.
#[derive(Clone, Debug, PartialEq)]
pub struct FimMatrix {
    pub entries: DMatrix<f64>,
    pub noise_power: f64,
}

impl FimMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of targets, assuming the `4K` layout.
    pub fn target_count(&self) -> usize {
        self.dim() / 4
    }

    /// Sub-matrix over the given parameter indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<FimMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.dim(),
            });
        }
        let n = indices.len();
        Ok(FimMatrix {
            entries: DMatrix::from_fn(n, n, |i, j| self.entries[(indices[i], indices[j])]),
            noise_power: self.noise_power,
        })
    }

    /// Ratio of extreme eigenvalues; infinite when the smallest is not positive.
    pub fn condition_estimate(&self) -> f64 {
        let eig = self.entries.clone().symmetric_eigenvalues();
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Exact FIM of the scene under `code`.
pub fn assemble_fim(scene: &TargetScene, code: &CodeMatrix, cfg: &ArrayConfig) -> Result<FimMatrix> {
    if !(scene.noise_power > 0.0) {
        return Err(Error::NoisePower(scene.noise_power));
    }
    let m = model_matrices(scene, code, cfg)?;
    let rx = RxGrams::new(&m.ar, &m.ar_dot);
    let prod = SlowTimeProducts::from_matrices(&m);
    Ok(FimMatrix {
        entries: fim_from_products(&rx, &prod, &m.amplitudes, scene.noise_power),
        noise_power: scene.noise_power,
    })
}

/// Validation oracle: `(2/sigma^2) Re{J^H J}` with the Jacobian of the
/// vectorized noise-free snapshot taken by central differences.
pub fn fim_numeric_oracle(
    scene: &TargetScene,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    step: f64,
) -> Result<FimMatrix> {
    if !(1e-8..=1e-4).contains(&step) {
        return Err(Error::Parameter(format!("step {step} outside [1e-8, 1e-4]")));
    }
    if !(scene.noise_power > 0.0) {
        return Err(Error::NoisePower(scene.noise_power));
    }
    let k = scene.len();
    if k == 0 {
        return Err(Error::EmptyScene);
    }
    let obs = cfg.rx_count * cfg.pri_count;
    let mut jac = DMatrix::<C64>::zeros(obs, 4 * k);
    for p in 0..4 * k {
        let perturbed = |delta: f64| -> Result<DMatrix<C64>> {
            let mut targets: Vec<Target> = scene.targets.clone();
            let t = &mut targets[p % k];
            match p / k {
                0 => t.azimuth += delta,
                1 => t.doppler += delta,
                2 => t.amplitude.re += delta,
                _ => t.amplitude.im += delta,
            }
            noiseless_mean(&targets, code, cfg)
        };
        let diff = (perturbed(step)? - perturbed(-step)?) / C64::new(2.0 * step, 0.0);
        jac.set_column(p, &DVector::from_column_slice(diff.as_slice()));
    }
    let f = (jac.adjoint() * &jac).map(|z| z.re * 2.0 / scene.noise_power);
    Ok(FimMatrix {
        entries: (&f + f.transpose()) * 0.5,
        noise_power: scene.noise_power,
    })
}

/// FIM for `[phi, sigma]`: block diagonal with `4 N Mr / sigma^2` in the
/// noise slot.
pub fn fim_with_unknown_noise(f: &FimMatrix, cfg: &ArrayConfig) -> DMatrix<f64> {
    let d = f.dim();
    let mut ext = DMatrix::zeros(d + 1, d + 1);
    ext.view_mut((0, 0), (d, d)).copy_from(&f.entries);
    ext[(d, d)] = 4.0 * (cfg.pri_count * cfg.rx_count) as f64 / f.noise_power;
    ext
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrbMatrix {
    pub entries: DMatrix<f64>,
    /// Condition estimate of the inverted FIM.
    pub condition: f64,
}

impl CrbMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }

    pub fn trace(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.entries[(i, i)]).sum()
    }
}

/// `F^{-1}`, refusing singular or ill-conditioned information matrices.
pub fn crb(f: &FimMatrix) -> Result<CrbMatrix> {
    let condition = f.condition_estimate();
    if !(condition < MAX_CONDITION) {
        return Err(Error::Identifiability { condition });
    }
    let chol = f
        .entries
        .clone()
        .cholesky()
        .ok_or(Error::Identifiability { condition })?;
    let inv = chol.inverse();
    Ok(CrbMatrix {
        entries: (&inv + inv.transpose()) * 0.5,
        condition,
    })
}

/// Trace of `F^{-1}` over the selected parameters.
pub fn trace_crb(f: &FimMatrix, selection: &ParamSelection) -> Result<f64> {
    let c = crb(f)?;
    let idx = selection.indices(f.target_count());
    if let Some(&bad) = idx.iter().find(|&&i| i >= f.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: f.dim(),
        });
    }
    Ok(c.trace(&idx))
}

/// Convenience: CRB of a scene under a code.
pub fn scene_crb(scene: &TargetScene, code: &CodeMatrix, cfg: &ArrayConfig) -> Result<CrbMatrix> {
    crb(&assemble_fim(scene, code, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::random_code;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn rel_fro(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn two_target_case() -> (TargetScene, CodeMatrix, ArrayConfig) {
        let cfg = ArrayConfig::new(3, 3, 1.5, 0.5, 1.0, 8).unwrap();
        let scene = TargetScene::new(
            vec![
                Target::new(0.3, 0.4, C64::new(1.0, -0.5)).unwrap(),
                Target::new(-0.5, -1.9, C64::new(0.3, 0.7)).unwrap(),
            ],
            0.2,
        )
        .unwrap();
        (scene, random_code(3, 8, 17), cfg)
    }

    #[test]
    fn model_matrix_special_cases() {
        let cfg = ArrayConfig::new(3, 4, 2.0, 0.5, 1.0, 6).unwrap();
        let scene = TargetScene {
            targets: vec![Target {
                azimuth: 0.0,
                doppler: 0.4,
                amplitude: C64::new(1.0, 0.0),
            }],
            noise_power: 1.0,
        };
        let m = model_matrices(&scene, &CodeMatrix::ones(3, 6), &cfg).unwrap();
        for n in 0..6 {
            assert!((m.v[(n, 0)] - C64::from_polar(3.0, 0.4 * n as f64)).norm() < 1e-13);
        }
        let edge = TargetScene {
            targets: vec![Target {
                azimuth: FRAC_PI_2,
                doppler: 0.4,
                amplitude: C64::new(1.0, 0.0),
            }],
            noise_power: 1.0,
        };
        let m = model_matrices(&edge, &CodeMatrix::ones(3, 6), &cfg).unwrap();
        assert!(m.ar_dot.column(0).norm() < 1e-12);
    }

    #[test]
    fn model_matrices_match_elementwise_loops() {
        let (scene, code, cfg) = two_target_case();
        let m = model_matrices(&scene, &code, &cfg).unwrap();
        for (k, t) in scene.targets.iter().enumerate() {
            let s = t.azimuth.sin();
            let c = t.azimuth.cos();
            for r in 0..cfg.rx_count {
                let ph = -std::f64::consts::PI * r as f64 * s;
                assert!((m.ar[(r, k)] - C64::from_polar(1.0, ph)).norm() < 1e-14);
                let d = C64::new(0.0, -std::f64::consts::PI * r as f64 * c) * C64::from_polar(1.0, ph);
                assert!((m.ar_dot[(r, k)] - d).norm() < 1e-13);
            }
            for n in 0..cfg.pri_count {
                let mut v = C64::new(0.0, 0.0);
                let mut vt = C64::new(0.0, 0.0);
                for mt in 0..cfg.tx_count {
                    let ph = -2.0 * std::f64::consts::PI * 1.5 * mt as f64 * s;
                    let e = code.entries()[(mt, n)] * C64::from_polar(1.0, ph);
                    v += e;
                    vt += e * C64::new(0.0, -2.0 * std::f64::consts::PI * 1.5 * mt as f64 * c);
                }
                let dop = C64::from_polar(1.0, t.doppler * n as f64);
                assert!((m.v[(n, k)] - v * dop).norm() < 1e-12);
                assert!((m.v_theta[(n, k)] - vt * dop).norm() < 1e-11);
                assert!((m.v_omega[(n, k)] - v * dop * C64::new(0.0, n as f64)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn scalar_array_amplitude_information() {
        let cfg = ArrayConfig::new(1, 1, 0.5, 0.5, 1.0, 16).unwrap();
        let sigma2 = 0.3;
        let scene = TargetScene::new(
            vec![Target::new(0.2, 0.7, C64::new(0.8, 0.1)).unwrap()],
            sigma2,
        )
        .unwrap();
        let code = random_code(1, 16, 2);
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        assert_relative_eq!(f.entries[(2, 2)], 2.0 * 16.0 / sigma2, max_relative = 1e-12);
        let oracle = fim_numeric_oracle(&scene, &code, &cfg, 1e-6).unwrap();
        assert_relative_eq!(oracle.entries[(2, 2)], f.entries[(2, 2)], max_relative = 1e-8);
    }

    #[test]
    fn assembled_fim_matches_finite_difference_oracle() {
        let (scene, code, cfg) = two_target_case();
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        let o = fim_numeric_oracle(&scene, &code, &cfg, 1e-6).unwrap();
        assert!(rel_fro(&f.entries, &o.entries) < 1e-6);
        assert!((&o.entries - o.entries.transpose()).norm() < 1e-12 * o.entries.norm());
        assert!((&f.entries - f.entries.transpose()).norm() < 1e-10 * f.entries.norm());
    }

    #[test]
    fn zero_amplitude_kills_angle_doppler_rows() {
        let (mut scene, code, cfg) = two_target_case();
        scene.targets[1].amplitude = C64::new(0.0, 0.0);
        let o = fim_numeric_oracle(&scene, &code, &cfg, 1e-6).unwrap();
        for idx in [ParamBlock::Azimuth.index(1, 2), ParamBlock::Doppler.index(1, 2)] {
            assert!(o.entries.row(idx).norm() < 1e-9 * o.entries.norm());
        }
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        assert!(f.entries.row(ParamBlock::Doppler.index(1, 2)).norm() == 0.0);
    }

    #[test]
    fn single_tone_crb_closed_form() {
        for n in [8usize, 64] {
            let cfg = ArrayConfig::new(1, 1, 0.5, 0.5, 1.0, n).unwrap();
            let b = C64::new(0.6, -0.3);
            let sigma2 = 0.05;
            let scene =
                TargetScene::new(vec![Target::new(0.1, 0.9, b).unwrap()], sigma2).unwrap();
            let f = assemble_fim(&scene, &random_code(1, n, 4), &cfg).unwrap();
            // A single element carries no azimuth information.
            assert!(matches!(crb(&f), Err(Error::Identifiability { .. })));
            let sub = f.restrict(&[1, 2, 3]).unwrap();
            let c = crb(&sub).unwrap();
            let nf = n as f64;
            let expected = 6.0 * sigma2 / (b.norm_sqr() * nf * (nf * nf - 1.0));
            assert_relative_eq!(c.entries[(0, 0)], expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn unknown_noise_extension() {
        let (scene, code, cfg) = two_target_case();
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        let ext = fim_with_unknown_noise(&f, &cfg);
        let d = f.dim();
        assert_relative_eq!(ext[(d, d)], 4.0 * 8.0 * 3.0 / 0.2, max_relative = 1e-15);
        assert!(ext.row(d).iter().take(d).all(|v| *v == 0.0));
        let inv = ext.try_inverse().unwrap();
        let crb_phi = crb(&f).unwrap();
        let block = inv.view((0, 0), (d, d)).into_owned();
        assert!(rel_fro(&block, &crb_phi.entries) < 1e-8);
    }

    #[test]
    fn crb_of_diagonal_and_inverse_identity() {
        let f = FimMatrix {
            entries: DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0, 5.0, 10.0])),
            noise_power: 1.0,
        };
        let c = crb(&f).unwrap();
        assert_relative_eq!(c.entries[(1, 1)], 0.25);
        assert_relative_eq!(trace_crb(&f, &ParamSelection::All).unwrap(), 0.5 + 0.25 + 0.2 + 0.1);

        let (scene, code, cfg) = two_target_case();
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        let c = crb(&f).unwrap();
        let prod = &c.entries * &f.entries;
        assert!((prod - DMatrix::identity(8, 8)).norm() < 1e-8);
        let total: f64 = c.diagonal().iter().sum();
        assert_relative_eq!(trace_crb(&f, &ParamSelection::All).unwrap(), total);
        assert!(c.diagonal().iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn scaled_identity_trace() {
        let f = FimMatrix {
            entries: DMatrix::identity(8, 8) * 4.0,
            noise_power: 1.0,
        };
        assert_relative_eq!(trace_crb(&f, &ParamSelection::All).unwrap(), 2.0);
        assert_relative_eq!(trace_crb(&f, &ParamSelection::AngleDoppler).unwrap(), 1.0);
    }

    #[test]
    fn noise_scaling_scales_crb() {
        let (scene, code, cfg) = two_target_case();
        let a = scene_crb(&scene, &code, &cfg).unwrap();
        let b = scene_crb(&scene.with_noise_power(0.2 * 3.0), &code, &cfg).unwrap();
        assert!(rel_fro(&(a.entries * 3.0), &b.entries) < 1e-10);
    }

    #[test]
    fn permuting_targets_permutes_fim() {
        let (scene, code, cfg) = two_target_case();
        let mut swapped = scene.clone();
        swapped.targets.swap(0, 1);
        let f = assemble_fim(&scene, &code, &cfg).unwrap();
        let g = assemble_fim(&swapped, &code, &cfg).unwrap();
        let perm = |i: usize| (i / 2) * 2 + (1 - i % 2);
        let permuted = DMatrix::from_fn(8, 8, |i, j| f.entries[(perm(i), perm(j))]);
        assert!(rel_fro(&permuted, &g.entries) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (scene, code, cfg) = two_target_case();
        assert!(matches!(
            assemble_fim(&scene.with_noise_power(0.0), &code, &cfg),
            Err(Error::NoisePower(_))
        ));
        let empty = TargetScene::new(vec![], 1.0).unwrap();
        assert!(matches!(assemble_fim(&empty, &code, &cfg), Err(Error::EmptyScene)));
        assert!(fim_numeric_oracle(&scene, &code, &cfg, 1e-2).is_err());
    }
}
