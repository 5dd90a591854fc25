//! Fisher information and Cramér-Rao bound of the bundled full-scale scene.

use stcdm::experiments::paper_scenario;
use stcdm::fim::{assemble_fim, crb, trace_crb, ParamBlock, ParamSelection};
use stcdm::sequences::CodeFamily;

fn main() -> stcdm::Result<()> {
    let scn = paper_scenario();
    let cfg = &scn.array;
    let k = scn.scene.len();
    for family in [CodeFamily::ZadoffChu { roots: None }, CodeFamily::PSequence { shifts: None }] {
        let code = family.generate(cfg.tx_count, cfg.pri_count)?;
        let f = assemble_fim(&scn.scene, &code, cfg)?;
        let c = crb(&f)?;
        let t = scn.target_of_interest;
        let it = ParamBlock::Azimuth.index(t, k);
        let iw = ParamBlock::Doppler.index(t, k);
        println!(
            "{:<12} tr CRB(angle, Doppler) = {:.3e}  target {} RCRB: angle {:.3e} rad, Doppler {:.3e} rad/PRI",
            family.label(),
            trace_crb(&f, &ParamSelection::AngleDoppler)?,
            t + 1,
            c.entries[(it, it)].sqrt(),
            c.entries[(iw, iw)].sqrt(),
        );
    }
    Ok(())
}
