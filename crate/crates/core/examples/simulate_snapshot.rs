//! Steering vectors and a noisy slow-time snapshot for two targets.

use stcdm::model::{rx_steering, scene_snr, synthesize, tx_steering, v_vector};
use stcdm::sequences::zadoff_chu_code;
use stcdm::{ArrayConfig, Target, TargetScene, C64};

fn main() -> stcdm::Result<()> {
    // d_t = Mr * d_r, so the 12-element virtual array is a filled ULA.
    let cfg = ArrayConfig::filled_virtual(3, 4, 16)?;
    let theta = 20f64.to_radians();
    println!("a_t(20 deg) = {:.3}", tx_steering(theta, &cfg)?.transpose());
    println!("a_r(20 deg) = {:.3}", rx_steering(theta, &cfg)?.transpose());

    let code = zadoff_chu_code(3, 16, &[1, 3, 5])?;
    let v = v_vector(theta, 0.4, &code, &cfg)?;
    println!("|v|^2 = {:.3} (N Mt = {})", v.norm_squared(), 16 * 3);

    let scene = TargetScene::new(
        vec![
            Target::new(theta, 0.4, C64::new(1.0, 0.0))?,
            Target::new(-0.5, -1.2, C64::new(0.0, 0.5))?,
        ],
        1.0,
    )?
    .with_snr(15.0)?;
    println!("scene SNR = {:.2} dB, noise power = {:.4}", scene_snr(&scene)?, scene.noise_power);

    let x = synthesize(&scene, &code, &cfg, 42)?;
    println!("snapshot {}x{}, energy {:.2}", x.data.nrows(), x.data.ncols(), x.energy());
    Ok(())
}
