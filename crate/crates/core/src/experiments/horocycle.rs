//! Empirical horocycle equidistribution rates: the worst deviation of finite
//! horocycle averages from the Liouville average, over a sample of base
//! states, as a function of the averaging span.

use rayon::prelude::*;

use crate::error::Result;
use crate::fields::Observable;
use crate::hyperbolic::{HorocycleBranch, UnitTangentFrame};
use crate::report::{fit_power_law, ExponentFit};

use super::sample_unit_states;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct HorocycleRateConfig {
    /// Averaging half-spans, increasing.
    pub t_list: Vec<f64>,
    pub n_states: usize,
    pub seed: u64,
    pub panel: f64,
}

impl Default for HorocycleRateConfig {
    fn default() -> Self {
        Self {
            t_list: vec![1e2, 1e3, 1e4],
            n_states: 20,
            seed: 0x0470,
            panel: 0.25,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HorocycleRateResult {
    /// `(T, R_hat(T))` pairs.
    pub r_hat: Vec<(f64, f64)>,
    pub fit: Option<ExponentFit>,
    pub nonincreasing: bool,
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

/// `R_hat(T) = max over sampled states of |(1/2T) int_{-T}^{T} a o H_u^s ds -
/// Liouville|`, with prefix accumulation so one orbit sweep serves all spans.
pub fn horocycle_rate(
    a: &Observable,
    liouville: f64,
    cfg: &HorocycleRateConfig,
) -> Result<HorocycleRateResult> {
    let surface = a.surface().clone();
    let mut t_list = cfg.t_list.clone();
    t_list.sort_by(f64::total_cmp);
    let t_max = *t_list.last().expect("nonempty span list");
    let states = sample_unit_states(&surface, cfg.n_states, cfg.seed)?;

    // For each state, integrate both directions to t_max, recording the
    // partial integrals at every checkpoint.
    let partials: Vec<Result<Vec<f64>>> = states
        .par_iter()
        .map(|rho| -> Result<Vec<f64>> {
            let f0 = UnitTangentFrame::from_state(rho)?;
            let mut sums = vec![0.0; t_list.len()];
            for sign in [1.0_f64, -1.0] {
                let mut f = f0;
                let mut s_done = 0.0;
                let mut check = 0usize;
                while s_done < t_max - 1e-9 {
                    let span = cfg.panel.min(t_max - s_done);
                    let mut acc = 0.0;
                    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
                        let s_local = 0.5 * span * (1.0 + x);
                        let node = f
                            .horocycle_flow(sign * s_local, HorocycleBranch::Unstable)
                            .to_state();
                        acc += w * 0.5 * span * a.eval_unit(&node)?;
                    }
                    for (k, &t) in t_list.iter().enumerate().skip(check) {
                        if s_done >= t {
                            check = k + 1;
                        } else {
                            sums[k] += acc;
                        }
                    }
                    let stepped = f.horocycle_flow(sign * span, HorocycleBranch::Unstable);
                    let (reduced, _) = surface.reduce_frame(&stepped)?;
                    f = reduced;
                    s_done += span;
                }
            }
            Ok(sums)
        })
        .collect();

    let mut r_hat = vec![0.0_f64; t_list.len()];
    for p in partials {
        let sums = p?;
        for (k, &t) in t_list.iter().enumerate() {
            let avg = sums[k] / (2.0 * t);
            r_hat[k] = r_hat[k].max((avg - liouville).abs());
        }
    }
    let pairs: Vec<(f64, f64)> = t_list.iter().copied().zip(r_hat.iter().copied()).collect();
    let nonincreasing = pairs.windows(2).all(|w| w[1].1 <= w[0].1);
    let fit = fit_power_law(&pairs);
    Ok(HorocycleRateResult {
        r_hat: pairs,
        fit,
        nonincreasing,
    })
}
