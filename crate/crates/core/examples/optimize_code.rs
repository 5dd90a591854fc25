//! CRB-driven code design on a small scene, compared with Zadoff-Chu.

use stcdm::codeopt::{optimize_code, OptimizeOptions};
use stcdm::experiments::crb_improvement;
use stcdm::fim::ParamSelection;
use stcdm::sequences::{random_code, CodeFamily};
use stcdm::{ArrayConfig, Target, TargetScene, C64};

fn main() -> stcdm::Result<()> {
    let cfg = ArrayConfig::new(4, 4, 2.0, 0.5, 1.0, 16)?;
    let scene = TargetScene::new(
        vec![
            Target::new(-0.6, 1.1, C64::new(1.0, 0.2))?,
            Target::new(0.1, -0.4, C64::new(0.3, -0.3))?,
            Target::new(0.7, 2.5, C64::new(0.1, 0.1))?,
        ],
        0.05,
    )?;
    let initial = random_code(4, 16, 3);
    let opts = OptimizeOptions { selection: ParamSelection::AngleDoppler, ..OptimizeOptions::default() };
    let (code, rep) = optimize_code(&scene, &cfg, &initial, &opts)?;
    println!("relaxation bound   {:.4e}", rep.relaxed_lower_bound);
    println!("optimized code     {:.4e} ({:?})", rep.trace_after, rep.method);
    println!("initial code       {:.4e}", rep.trace_before);
    println!("solver             {:?} after {} Newton steps", rep.solver_status, rep.solver_iterations);

    let zc = CodeFamily::ZadoffChu { roots: None }.generate(4, 16)?;
    for t in 0..scene.len() {
        let g = crb_improvement(&scene, &cfg, &zc, &code, t)?;
        println!("target {}: gain vs Zadoff-Chu {:+.2} dB angle, {:+.2} dB Doppler", t + 1, g.theta_db, g.omega_db);
    }
    Ok(())
}
