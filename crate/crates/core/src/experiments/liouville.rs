//! Two independent oracles for the Liouville average of an observable.
//!
//! Oracle A samples the fundamental domain with the hyperbolic area density
//! and uniform fiber angles. Oracle B takes the Birkhoff average along one
//! long unstable horocycle orbit, which equidistributes towards the Liouville
//! measure uniformly in the base point. The two share no code beyond the
//! observable evaluation itself; their agreement within combined error bars
//! is enforced.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::Observable;
use crate::hyperbolic::{CotangentState, HorocycleBranch, UnitTangentFrame};
use crate::report::{stream_rng, Estimate};
use crate::surface::disk_to_halfplane;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LiouvilleConfig {
    /// Monte Carlo sample count for oracle A.
    pub mc_samples: usize,
    /// Parallel batches; each batch has its own RNG stream.
    pub mc_batches: usize,
    pub seed: u64,
    /// Horocycle half-span S for oracle B (integral over [-S, S]).
    pub horocycle_span: f64,
    /// Quadrature panel width along the horocycle.
    pub horocycle_panel: f64,
    /// Number of blocks for the batch-means error bar of oracle B.
    pub horocycle_batches: usize,
}

impl Default for LiouvilleConfig {
    fn default() -> Self {
        Self {
            mc_samples: 1_000_000,
            mc_batches: 64,
            seed: 0x10ca1,
            horocycle_span: 1e4,
            horocycle_panel: 0.25,
            horocycle_batches: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LiouvilleEstimate {
    /// The adopted value (oracle B) with its error bar.
    pub value: f64,
    pub error: f64,
    pub monte_carlo: Estimate,
    pub birkhoff: Estimate,
}

const GL8_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Oracle A: Monte Carlo over the unit bundle with hyperbolic-area weights.
fn monte_carlo_oracle(a: &Observable, cfg: &LiouvilleConfig) -> Result<Estimate> {
    let surface = a.surface().clone();
    let per_batch = (cfg.mc_samples / cfg.mc_batches).max(1);
    let r = surface.circumradius;
    let tanh2 = (r / 2.0).tanh().powi(2);
    let cum_max = 2.0 * tanh2 / (1.0 - tanh2);
    let batch_stats: Vec<Result<(f64, f64)>> = (0..cfg.mc_batches)
        .into_par_iter()
        .map(|batch| -> Result<(f64, f64)> {
            let mut rng = stream_rng(cfg.seed, batch as u64);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut accepted = 0;
            while accepted < per_batch {
                let c: f64 = rng.gen_range(0.0..cum_max);
                let rr = (c / (c + 2.0)).sqrt();
                let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let z = disk_to_halfplane(Complex64::from_polar(rr, theta))?;
                if !surface.in_domain(z, 0.0)? {
                    continue;
                }
                let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, phi))?;
                let v = a.eval_unit(&s)?;
                sum += v;
                sumsq += v * v;
                accepted += 1;
            }
            Ok((sum, sumsq))
        })
        .collect();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in batch_stats {
        let (a, b) = s?;
        sum += a;
        sumsq += b;
    }
    let n = (per_batch * cfg.mc_batches) as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}

/// Oracle B: Birkhoff average along the unstable horocycle through the
/// identity-frame state, `(1/2S) int_{-S}^{S} a o H_u^s ds`, by exact group
/// steps and composite panel quadrature with a running reduction.
fn birkhoff_oracle(a: &Observable, cfg: &LiouvilleConfig) -> Result<Estimate> {
    let surface = a.surface().clone();
    let span = cfg.horocycle_span;
    let panel = cfg.horocycle_panel;
    let blocks = cfg.horocycle_batches.max(2);
    let block_span = 2.0 * span / blocks as f64;
    let panels_per_block = (block_span / panel).ceil() as usize;

    // Walk the two directions separately, blockwise; block means feed the
    // batch-means error bar.
    let mut block_means = Vec::with_capacity(blocks);
    for half in [1.0_f64, -1.0] {
        let mut f = UnitTangentFrame::IDENTITY;
        for _block in 0..blocks / 2 {
            let mut acc = 0.0;
            for _ in 0..panels_per_block {
                for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
                    let s_local = 0.5 * panel * (1.0 + x);
                    let node = f
                        .horocycle_flow(half * s_local, HorocycleBranch::Unstable)
                        .to_state();
                    acc += w * 0.5 * panel * a.eval_unit(&node)?;
                }
                let stepped = f.horocycle_flow(half * panel, HorocycleBranch::Unstable);
                let (reduced, _) = surface.reduce_frame(&stepped)?;
                f = reduced;
            }
            block_means.push(acc / (panels_per_block as f64 * panel));
        }
    }
    let n = block_means.len() as f64;
    let mean = block_means.iter().sum::<f64>() / n;
    let var = block_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (n - 1.0);
    Ok(Estimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}

/// The Liouville average of an observable through both oracles; the adopted
/// value is the horocycle-Birkhoff one, cross-checked against Monte Carlo
/// within three combined error bars.
pub fn liouville_average(a: &Observable, cfg: &LiouvilleConfig) -> Result<LiouvilleEstimate> {
    if a.is_constant() {
        let v = a.offset();
        return Ok(LiouvilleEstimate {
            value: v,
            error: 0.0,
            monte_carlo: Estimate { value: v, error: 0.0 },
            birkhoff: Estimate { value: v, error: 0.0 },
        });
    }
    let mc = monte_carlo_oracle(a, cfg)?;
    let bk = birkhoff_oracle(a, cfg)?;
    let combined = (mc.error * mc.error + bk.error * bk.error).sqrt();
    if (mc.value - bk.value).abs() > 3.0 * combined {
        return Err(Error::Consistency(format!(
            "Liouville oracles disagree: Monte Carlo {} +- {}, horocycle {} +- {}",
            mc.value, mc.error, bk.value, bk.error
        )));
    }
    Ok(LiouvilleEstimate {
        value: bk.value,
        error: bk.error,
        monte_carlo: mc,
        birkhoff: bk,
    })
}
