//! Empirical energy-shell bounds: the infimum and supremum over sampled
//! shells and base points of the box-averaged evolved observable.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{Observable, PerturbationFamily};
use crate::flows::IntegratorConfig;
use crate::hyperbolic::CotangentState;
use crate::report::stream_rng;
use crate::surface::disk_to_halfplane;

use super::{i_integral, EpsBox};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundsConfig {
    /// Energy window `[E1 - delta/2, E2 + delta/2]`.
    pub e1: f64,
    pub e2: f64,
    pub delta: f64,
    pub n_shells: usize,
    pub points_per_shell: usize,
    pub seed: u64,
    /// Critical exponent and box half-width: T0 = t |log b0|.
    pub t: f64,
    pub b0: f64,
    pub box_samples: usize,
    pub box_seed: u64,
    pub integrator: IntegratorConfig,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            e1: 0.45,
            e2: 0.55,
            delta: 0.02,
            n_shells: 3,
            points_per_shell: 6,
            seed: 0xb0d5,
            t: 1.3,
            b0: 1e-2,
            box_samples: 128,
            box_seed: 0xb0cc,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundsResult {
    pub a_minus: f64,
    pub a_plus: f64,
    /// `(energy, I value)` per sampled state, in sampling order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Samples states over the energy window and brackets the box average of the
/// evolved observable. These bracket the true shell extrema only up to the
/// sampling resolution.
pub fn a_plus_minus_bounds(
    family: &PerturbationFamily,
    a: &Observable,
    cfg: &BoundsConfig,
) -> Result<BoundsResult> {
    if !(cfg.e1 > 0.0) || cfg.e2 < cfg.e1 || cfg.e2 + cfg.delta / 2.0 > 1.0 {
        return Err(Error::Config(format!(
            "energy window [{} - {}/2, {} + {}/2] must sit inside (0, 1]",
            cfg.e1, cfg.delta, cfg.e2, cfg.delta
        )));
    }
    let surface = family.surface();
    let lo = cfg.e1 - cfg.delta / 2.0;
    let hi = cfg.e2 + cfg.delta / 2.0;
    let t0 = cfg.t * cfg.b0.ln().abs();
    let r = surface.circumradius;
    let tanh2 = (r / 2.0).tanh().powi(2);
    let cum_max = 2.0 * tanh2 / (1.0 - tanh2);

    let mut a_minus = f64::INFINITY;
    let mut a_plus = f64::NEG_INFINITY;
    let mut evaluations = Vec::new();
    for ks in 0..cfg.n_shells {
        let energy = if cfg.n_shells == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * ks as f64 / (cfg.n_shells - 1) as f64
        };
        let norm = (2.0 * energy).sqrt();
        for kp in 0..cfg.points_per_shell {
            let mut rng = stream_rng(cfg.seed, (ks * cfg.points_per_shell + kp) as u64);
            let state = loop {
                let c: f64 = rng.gen_range(0.0..cum_max);
                let rr = (c / (c + 2.0)).sqrt();
                let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let z = disk_to_halfplane(Complex64::from_polar(rr, theta))?;
                if surface.in_domain(z, 0.0)? {
                    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    break CotangentState::new(z, Complex64::from_polar(norm / z.im, phi))?;
                }
            };
            let eps_box = EpsBox::monte_carlo(
                cfg.b0,
                family.len(),
                cfg.box_samples,
                cfg.box_seed
                    .wrapping_add((ks * cfg.points_per_shell + kp) as u64),
            );
            let est = i_integral(&state, family, &eps_box, t0, a, &cfg.integrator)?;
            a_minus = a_minus.min(est.value);
            a_plus = a_plus.max(est.value);
            evaluations.push((energy, est.value));
        }
    }
    Ok(BoundsResult {
        a_minus,
        a_plus,
        evaluations,
    })
}
