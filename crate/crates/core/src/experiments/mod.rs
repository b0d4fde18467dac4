//! The verification suite: Liouville oracles, the eps-box average of evolved
//! observables, the equidistribution sweep at the critical logarithmic time
//! scale, horocycle equidistribution rates, the reduction-chain comparison,
//! the shadowing search and the energy-shell bounds.
//!
//! Every experiment is deterministic for a fixed configuration and master
//! seed: Monte Carlo uses counter-derived RNG streams indexed by logical
//! task, and parallel reductions run in task order regardless of the worker
//! count.

mod bounds;
mod equidist;
mod horocycle;
mod liouville;
mod reduction;
mod shadowing;

pub use bounds::{a_plus_minus_bounds, BoundsConfig, BoundsResult};
pub use equidist::{
    equidistribution_sweep, i_integral, EquidistConfig, EquidistResult, SweepPoint,
};
pub use horocycle::{horocycle_rate, HorocycleRateConfig, HorocycleRateResult};
pub use liouville::{liouville_average, LiouvilleConfig, LiouvilleEstimate};
pub use reduction::{reduction_chain_check, ReductionConfig, ReductionResult, ReductionRow};
pub use shadowing::{shadowing_point, shadowing_state, ShadowingConfig, ShadowingResult};

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::hyperbolic::CotangentState;
use crate::report::stream_rng;
use crate::surface::{disk_to_halfplane, FuchsianSurface};

/// The box of perturbation parameters `(-b0, b0)^{J+1}` with its sampling
/// scheme.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EpsBox {
    pub b0: f64,
    pub dim: usize,
    pub sampling: BoxSampling,
    /// Monte Carlo sample count (grid mode uses 8 Gauss nodes per axis).
    pub n_samples: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BoxSampling {
    MonteCarlo,
    Grid,
}

/// One weighted sample of the box; weights sum to one.
#[derive(Debug, Clone)]
pub struct EpsSample {
    pub eps: Vec<f64>,
    pub weight: f64,
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

impl EpsBox {
    pub fn monte_carlo(b0: f64, dim: usize, n_samples: usize, rng_seed: u64) -> Self {
        Self {
            b0,
            dim,
            sampling: BoxSampling::MonteCarlo,
            n_samples,
            rng_seed,
        }
    }

    /// Materialises the weighted sample list. Monte Carlo samples come from
    /// per-sample counter streams of the box seed; all lie strictly inside
    /// the open box.
    pub fn samples(&self) -> Vec<EpsSample> {
        match self.sampling {
            BoxSampling::MonteCarlo => {
                let w = 1.0 / self.n_samples as f64;
                (0..self.n_samples)
                    .map(|i| {
                        let mut rng = stream_rng(self.rng_seed, i as u64);
                        let eps = (0..self.dim)
                            .map(|_| rng.gen_range(-self.b0..self.b0))
                            .collect();
                        EpsSample { eps, weight: w }
                    })
                    .collect()
            }
            BoxSampling::Grid => {
                // Tensor Gauss-Legendre, 8 nodes per axis, weights
                // normalised to a probability measure on the box.
                let mut samples = vec![EpsSample {
                    eps: Vec::new(),
                    weight: 1.0,
                }];
                for _ in 0..self.dim {
                    let mut next = Vec::with_capacity(samples.len() * 8);
                    for s in &samples {
                        for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
                            let mut eps = s.eps.clone();
                            eps.push(self.b0 * x);
                            next.push(EpsSample {
                                eps,
                                weight: s.weight * w / 2.0,
                            });
                        }
                    }
                    samples = next;
                }
                samples
            }
        }
    }
}

/// Deterministic sample of unit-covector states, area-uniform over the
/// fundamental domain with uniform fiber angles.
pub fn sample_unit_states(
    surface: &FuchsianSurface,
    n: usize,
    seed: u64,
) -> Result<Vec<CotangentState>> {
    let mut states = Vec::with_capacity(n);
    let r = surface.circumradius;
    let cum_max = 2.0 * (r / 2.0).tanh().powi(2) / (1.0 - (r / 2.0).tanh().powi(2));
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        loop {
            let c: f64 = rng.gen_range(0.0..cum_max);
            let rr = (c / (c + 2.0)).sqrt();
            let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let z = disk_to_halfplane(Complex64::from_polar(rr, theta))?;
            if surface.in_domain(z, 0.0)? {
                let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                states.push(CotangentState::new(
                    z,
                    Complex64::from_polar(1.0 / z.im, phi),
                )?);
                break;
            }
        }
    }
    Ok(states)
}
