//! Random code, snapshot, RELAX anchor, optimized code, then Monte-Carlo
//! curves for Zadoff-Chu, P4 and the optimized code.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{run_monte_carlo_with_code, McReport, Scenario};
use crate::codeopt::{optimize_code, OptimizeOptions, OptimizeReport};
use crate::error::{Error, Result};
use crate::fim::{scene_crb, ParamBlock, ParamSelection};
use crate::imaging::mf_image;
use crate::io::{real_matrix_to_csv, write_json, write_snapshot};
use crate::model::{synthesize, ArrayConfig, CodeMatrix, TargetScene};
use crate::relax::{estimates_to_scene, RelaxEstimator};
use crate::sequences::CodeFamily;

/// RCRB of one target under two codes and the gain in dB, `20 log10(ref / new)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrbImprovement {
    pub rcrb_theta_reference: f64,
    pub rcrb_theta: f64,
    pub rcrb_omega_reference: f64,
    pub rcrb_omega: f64,
    pub theta_db: f64,
    pub omega_db: f64,
}

pub fn crb_improvement(
    scene: &TargetScene,
    cfg: &ArrayConfig,
    reference: &CodeMatrix,
    candidate: &CodeMatrix,
    target: usize,
) -> Result<CrbImprovement> {
    let k = scene.len();
    if target >= k {
        return Err(Error::IndexOutOfRange { index: target, len: k });
    }
    let rcrb = |code: &CodeMatrix| -> Result<(f64, f64)> {
        let c = scene_crb(scene, code, cfg)?;
        let it = ParamBlock::Azimuth.index(target, k);
        let iw = ParamBlock::Doppler.index(target, k);
        Ok((c.entries[(it, it)].sqrt(), c.entries[(iw, iw)].sqrt()))
    };
    let (tr, wr) = rcrb(reference)?;
    let (tc, wc) = rcrb(candidate)?;
    Ok(CrbImprovement {
        rcrb_theta_reference: tr,
        rcrb_theta: tc,
        rcrb_omega_reference: wr,
        rcrb_omega: wc,
        theta_db: 20.0 * (tr / tc).log10(),
        omega_db: 20.0 * (wr / wc).log10(),
    })
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub out_dir: PathBuf,
    pub optimize: OptimizeOptions,
    /// Seed of the random code used to gather the anchor snapshot.
    pub initial_code_seed: u64,
}

impl ReproduceOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            optimize: OptimizeOptions {
                selection: ParamSelection::AngleDoppler,
                ..OptimizeOptions::default()
            },
            initial_code_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceSummary {
    pub anchor_order: usize,
    pub anchor_noise_power: f64,
    pub optimize: OptimizeReport,
    pub improvement_vs_zadoff_chu: CrbImprovement,
    pub improvement_vs_p_sequence: CrbImprovement,
    pub monte_carlo: Vec<McReport>,
}

fn write_code(dir: &Path, name: &str, code: &CodeMatrix) -> Result<()> {
    write_json(dir.join(name), code)
}

/// Runs the whole workflow on `scn` and writes every artifact to `opts.out_dir`.
pub fn reproduce(scn: &Scenario, opts: &ReproduceOptions) -> Result<ReproduceSummary> {
    scn.validate()?;
    let dir = &opts.out_dir;
    fs::create_dir_all(dir)?;
    let cfg = &scn.array;
    let econf = scn.estimator();
    let (mt, n) = (cfg.tx_count, cfg.pri_count);
    write_json(dir.join("scenario.json"), scn)?;

    // Angle-Doppler picture under Zadoff-Chu codes.
    let zc = CodeFamily::ZadoffChu { roots: None }.generate(mt, n)?;
    let p4 = CodeFamily::PSequence { shifts: None }.generate(mt, n)?;
    write_code(dir, "code_zadoff_chu.json", &zc)?;
    write_code(dir, "code_p_sequence.json", &p4)?;
    let x = synthesize(&scn.scene, &zc, cfg, scn.seed)?;
    write_snapshot(dir.join("fig2_snapshot.csv"), &x)?;
    let img = mf_image(&x, &zc, cfg, econf.grid)?;
    fs::write(dir.join("fig2_image.csv"), real_matrix_to_csv(&img.values))?;
    write_json(dir.join("fig2_image.json"), &img)?;
    let fig2 = RelaxEstimator::new(&zc, cfg, &econf)?.estimate(&x)?;
    write_json(dir.join("fig2_relax.json"), &fig2)?;

    // Anchor from data gathered with a random code.
    let initial = CodeFamily::Random { seed: opts.initial_code_seed }.generate(mt, n)?;
    write_code(dir, "code_initial.json", &initial)?;
    let xa = synthesize(&scn.scene, &initial, cfg, scn.seed.wrapping_add(1))?;
    write_snapshot(dir.join("anchor_snapshot.csv"), &xa)?;
    let fit = RelaxEstimator::new(&initial, cfg, &econf)?.estimate(&xa)?;
    write_json(dir.join("anchor_relax.json"), &fit)?;
    if fit.selected_order == 0 {
        return Err(Error::Solver("anchor RELAX found no targets".into()));
    }
    let noise = fit.rss() / (n * cfg.rx_count) as f64;
    let anchor = estimates_to_scene(&fit.estimates, noise)?;
    write_json(dir.join("anchor_scene.json"), &anchor)?;

    let (optimized, report) = optimize_code(&anchor, cfg, &initial, &opts.optimize)?;
    write_code(dir, "optimized_code.json", &optimized)?;
    write_json(dir.join("optimize_report.json"), &report)?;

    let toi = scn.target_of_interest;
    let vs_zc = crb_improvement(&scn.scene, cfg, &zc, &optimized, toi)?;
    let vs_p4 = crb_improvement(&scn.scene, cfg, &p4, &optimized, toi)?;
    write_json(dir.join("crb_improvement.json"), &serde_json::json!({
        "target_of_interest": toi,
        "vs_zadoff_chu": vs_zc,
        "vs_p_sequence": vs_p4,
    }))?;

    let mut mc = Vec::new();
    if !scn.snr_db.is_empty() {
        for (label, code) in [("zadoff_chu", &zc), ("p_sequence", &p4), ("optimized", &optimized)] {
            let r = run_monte_carlo_with_code(scn, code, label)?;
            fs::write(dir.join(format!("mc_{label}.csv")), r.to_csv())?;
            write_json(dir.join(format!("mc_{label}.json")), &r)?;
            mc.push(r);
        }
    }
    let summary = ReproduceSummary {
        anchor_order: fit.selected_order,
        anchor_noise_power: noise,
        optimize: report,
        improvement_vs_zadoff_chu: vs_zc,
        improvement_vs_p_sequence: vs_p4,
        monte_carlo: mc,
    };
    write_json(dir.join("summary.json"), &summary)?;
    Ok(summary)
}
