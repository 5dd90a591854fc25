//! Slow-time code generators.
//!
//! Besides i.i.d. random phases, two CAZAC families are provided. Each
//! transmitter gets its own row: Zadoff-Chu rows use distinct roots (by
//! default the `Mt` smallest integers coprime with `N`), and P4 rows use
//! distinct cyclic shifts `floor(m N / Mt)`.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::model::{CodeMatrix, C64};

/// How a scenario obtains its slow-time code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeFamily {
    Random {
        seed: u64,
    },
    ZadoffChu {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roots: Option<Vec<u64>>,
    },
    PSequence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shifts: Option<Vec<usize>>,
    },
    /// A code document on disk.
    External {
        path: PathBuf,
    },
}

impl CodeFamily {
    pub fn generate(&self, tx_count: usize, pri_count: usize) -> Result<CodeMatrix> {
        let code = match self {
            CodeFamily::Random { seed } => random_code(tx_count, pri_count, *seed),
            CodeFamily::ZadoffChu { roots } => {
                let roots = match roots {
                    Some(r) => r.clone(),
                    None => default_zc_roots(tx_count, pri_count)?,
                };
                zadoff_chu_code(tx_count, pri_count, &roots)?
            }
            CodeFamily::PSequence { shifts } => {
                let shifts = match shifts {
                    Some(s) => s.clone(),
                    None => default_p_shifts(tx_count, pri_count),
                };
                p_sequence_code(tx_count, pri_count, &shifts)?
            }
            CodeFamily::External { path } => io::read_json::<CodeMatrix>(path)?,
        };
        if code.tx_count() != tx_count || code.pri_count() != pri_count {
            return Err(Error::Dimension(format!(
                "code is {}x{}, expected {tx_count}x{pri_count}",
                code.tx_count(),
                code.pri_count()
            )));
        }
        Ok(code)
    }

    pub fn label(&self) -> &'static str {
        match self {
            CodeFamily::Random { .. } => "random",
            CodeFamily::ZadoffChu { .. } => "zadoff_chu",
            CodeFamily::PSequence { .. } => "p_sequence",
            CodeFamily::External { .. } => "external",
        }
    }
}

/// Phases i.i.d. uniform on `[0, 2 pi)`.
pub fn random_code(tx_count: usize, pri_count: usize, seed: u64) -> CodeMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = DMatrix::from_fn(tx_count, pri_count, |_, _| rng.random_range(0.0..2.0 * PI));
    CodeMatrix::from_phases(&phases).expect("polar entries are unit modulus")
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The `tx_count` smallest positive integers coprime with `pri_count`.
pub fn default_zc_roots(tx_count: usize, pri_count: usize) -> Result<Vec<u64>> {
    let n = pri_count as u64;
    let roots: Vec<u64> = (1..n.max(2)).filter(|u| gcd(*u, n) == 1).take(tx_count).collect();
    if roots.len() < tx_count {
        return Err(Error::Parameter(format!(
            "only {} Zadoff-Chu roots coprime with N = {pri_count}, need {tx_count}",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Zadoff-Chu rows: `exp(-j pi u n (n+1) / N)` for odd `N`, `exp(-j pi u n^2 / N)`
/// for even `N`.
pub fn zadoff_chu_code(tx_count: usize, pri_count: usize, roots: &[u64]) -> Result<CodeMatrix> {
    if roots.len() != tx_count {
        return Err(Error::Parameter(format!(
            "{} roots for {tx_count} transmitters",
            roots.len()
        )));
    }
    let n = pri_count as u64;
    for &u in roots {
        if u == 0 || gcd(u, n) != 1 {
            return Err(Error::Parameter(format!("root {u} is not coprime with N = {n}")));
        }
    }
    let odd = n % 2 == 1;
    let entries = DMatrix::from_fn(tx_count, pri_count, |m, k| {
        let k = k as u64;
        // Reduce the quadratic index modulo 2N to keep the phase argument small.
        let q = if odd { k * (k + 1) } else { k * k };
        let q = ((roots[m] % (2 * n)) * (q % (2 * n))) % (2 * n);
        C64::from_polar(1.0, -PI * q as f64 / n as f64)
    });
    CodeMatrix::new(entries)
}

/// Cyclic shifts `floor(m N / Mt)`.
pub fn default_p_shifts(tx_count: usize, pri_count: usize) -> Vec<usize> {
    (0..tx_count).map(|m| m * pri_count / tx_count).collect()
}

/// P4 rows `phi(n) = pi n (n - N) / N`, row `m` cyclically advanced by `shifts[m]`.
pub fn p_sequence_code(tx_count: usize, pri_count: usize, shifts: &[usize]) -> Result<CodeMatrix> {
    if pri_count < 2 {
        return Err(Error::Parameter("P4 sequences need N >= 2".into()));
    }
    if shifts.len() != tx_count {
        return Err(Error::Parameter(format!(
            "{} shifts for {tx_count} transmitters",
            shifts.len()
        )));
    }
    let n = pri_count as i64;
    let entries = DMatrix::from_fn(tx_count, pri_count, |m, k| {
        let idx = ((k + shifts[m]) % pri_count) as i64;
        // n (n - N) is even-symmetric; reduce modulo 2N.
        let q = (idx * (idx - n)).rem_euclid(2 * n);
        C64::from_polar(1.0, PI * q as f64 / n as f64)
    });
    CodeMatrix::new(entries)
}

/// Periodic autocorrelation `r(k) = sum_n s(n + k) conj(s(n))`.
pub fn periodic_autocorrelation(row: &[C64]) -> Vec<C64> {
    let n = row.len();
    (0..n)
        .map(|k| (0..n).map(|i| row[(i + k) % n] * row[i].conj()).sum())
        .collect()
}
