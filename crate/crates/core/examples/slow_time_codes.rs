//! Random, Zadoff-Chu and P4 slow-time codes and their autocorrelation.

use stcdm::sequences::{periodic_autocorrelation, CodeFamily};

fn main() -> stcdm::Result<()> {
    let (mt, n) = (4, 31);
    for family in [
        CodeFamily::Random { seed: 1 },
        CodeFamily::ZadoffChu { roots: None },
        CodeFamily::PSequence { shifts: None },
    ] {
        let code = family.generate(mt, n)?;
        let row: Vec<_> = code.entries().row(0).iter().copied().collect();
        let ac = periodic_autocorrelation(&row);
        let sidelobe = ac[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!("{:<12} peak {:.1}  max sidelobe {:.2e}", family.label(), ac[0].norm(), sidelobe);
    }
    Ok(())
}
