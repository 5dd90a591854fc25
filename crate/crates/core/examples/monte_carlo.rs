//! RMSE against RCRB over an SNR sweep on the bundled small scenario.

use stcdm::experiments::{run_monte_carlo, small_scenario};

fn main() -> stcdm::Result<()> {
    let mut scn = small_scenario();
    scn.trials = 50;
    scn.snr_db = vec![0.0, 10.0, 20.0, 30.0];
    let r = run_monte_carlo(&scn)?;
    print!("{}", r.to_csv());
    for w in &r.warnings {
        println!("warning: {w}");
    }
    println!("{:.1} s", r.wall_clock_seconds);
    Ok(())
}
