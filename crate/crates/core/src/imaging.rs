//! Matched-filter angle-Doppler images.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::model::{ArrayConfig, CodeMatrix, Snapshot};
use crate::relax::{AngleDopplerGrid, GridEvaluator};

/// Floor applied after peak normalization.
pub const DB_FLOOR: f64 = -80.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleDopplerImage {
    /// `L_theta x L_w`, dB relative to the peak.
    #[serde(skip)]
    pub values: DMatrix<f64>,
    /// Azimuth per angle cell; `None` outside the visible region.
    pub angles: Vec<Option<f64>>,
    pub dopplers: Vec<f64>,
    /// Linear peak value the image was normalized by.
    pub reference: f64,
}

/// Peak-normalized dB map of a linear power grid, clamped at [`DB_FLOOR`].
pub fn to_db(linear: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let peak = linear.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return (DMatrix::from_element(linear.nrows(), linear.ncols(), DB_FLOOR), 0.0);
    }
    let db = linear.map(|v| {
        if v <= 0.0 {
            DB_FLOOR
        } else {
            (10.0 * (v / peak).log10()).max(DB_FLOOR)
        }
    });
    (db, peak)
}

/// The concentrated criterion on the full snapshot, in dB.
pub fn mf_image(
    x: &Snapshot,
    code: &CodeMatrix,
    cfg: &ArrayConfig,
    grid: AngleDopplerGrid,
) -> Result<AngleDopplerImage> {
    let ev = GridEvaluator::new(code, cfg, grid)?;
    let (values, reference) = to_db(&ev.evaluate(x)?);
    Ok(AngleDopplerImage {
        values,
        angles: ev.angles().to_vec(),
        dopplers: grid.dopplers(),
        reference,
    })
}
