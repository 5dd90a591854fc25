//! Bounded Nelder-Mead refinement of a coarse grid peak.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use super::grid::{criterion, AngleDopplerGrid};
use crate::model::{wrap_doppler, ArrayConfig, CodeMatrix, C64};

/// Outcome of a local search: the point and its criterion value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinePoint {
    pub azimuth: f64,
    pub doppler: f64,
    pub value: f64,
}

const EDGE: f64 = 1.0 - 1e-6;
const THETA_LIMIT: f64 = FRAC_PI_2 - 1e-9;

/// Minimizes `f` over `[-1, 1]^2` from the origin. Returns the best vertex.
fn nelder_mead(f: &mut dyn FnMut([f64; 2]) -> f64, iterations: usize) -> ([f64; 2], f64) {
    let clamp = |p: [f64; 2]| [p[0].clamp(-1.0, 1.0), p[1].clamp(-1.0, 1.0)];
    let comb = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut s: Vec<([f64; 2], f64)> = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]
        .into_iter()
        .map(|p| (p, f(p)))
        .collect();
    for _ in 0..iterations {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diam = s[1..]
            .iter()
            .map(|(p, _)| (p[0] - s[0].0[0]).abs().max((p[1] - s[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if diam < 1e-10 {
            break;
        }
        let centroid = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let worst = s[2];
        let xr = clamp(comb(centroid, worst.0, -1.0));
        let fr = f(xr);
        if fr < s[0].1 {
            let xe = clamp(comb(centroid, worst.0, -2.0));
            let fe = f(xe);
            s[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < s[1].1 {
            s[2] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let p = clamp(comb(centroid, worst.0, -0.5));
                (p, f(p))
            } else {
                let p = comb(centroid, worst.0, 0.5);
                (p, f(p))
            };
            if fc < worst.1.min(fr) {
                s[2] = (xc, fc);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    let p = comb(best, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    s[0]
}

/// Maximizes the criterion over `theta +- pi/L_theta`, `w +- pi/L_w` around
/// `coarse`. If the optimum lands on the box edge the box is re-centered,
/// at most `recenter` times. Never returns a worse point than `coarse`.
pub fn fine_search(
    x: &DMatrix<C64>,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    coarse: (f64, f64),
    grid: AngleDopplerGrid,
    iterations: usize,
    recenter: usize,
) -> FinePoint {
    let ht = PI / grid.angle_bins as f64;
    let hw = PI / grid.doppler_bins as f64;
    let eval = |t: f64, w: f64| criterion(x, code, cfg, t.clamp(-THETA_LIMIT, THETA_LIMIT), w);
    let start = FinePoint {
        azimuth: coarse.0,
        doppler: coarse.1,
        value: eval(coarse.0, coarse.1),
    };
    let mut best = start;
    for _ in 0..=recenter {
        let (tc, wc) = (best.azimuth, best.doppler);
        let mut f = |u: [f64; 2]| -eval(tc + u[0] * ht, wc + u[1] * hw);
        let (u, v) = nelder_mead(&mut f, iterations);
        if -v <= best.value {
            break;
        }
        best = FinePoint {
            azimuth: (tc + u[0] * ht).clamp(-THETA_LIMIT, THETA_LIMIT),
            doppler: wc + u[1] * hw,
            value: -v,
        };
        if u[0].abs() < EDGE && u[1].abs() < EDGE {
            break;
        }
    }
    best.doppler = wrap_doppler(best.doppler);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_interior_quadratic_minimum() {
        let mut f = |p: [f64; 2]| (p[0] - 0.3).powi(2) + 3.0 * (p[1] + 0.6).powi(2);
        let (p, v) = nelder_mead(&mut f, 200);
        assert!((p[0] - 0.3).abs() < 1e-8 && (p[1] + 0.6).abs() < 1e-8, "{p:?}");
        assert!(v < 1e-15);
    }

    #[test]
    fn nelder_mead_respects_the_box() {
        let mut f = |p: [f64; 2]| (p[0] - 3.0).powi(2) + p[1].powi(2);
        let (p, _) = nelder_mead(&mut f, 200);
        assert!((p[0] - 1.0).abs() < 1e-8);
    }
}
