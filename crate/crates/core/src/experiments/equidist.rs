//! The eps-box average of an evolved observable and the equidistribution
//! sweep at the critical logarithmic time scale.

use rayon::prelude::*;

use crate::error::Result;
use crate::fields::{Observable, PerturbationFamily};
use crate::flows::{perturbed_flow, HamiltonianParams, IntegratorConfig};
use crate::hyperbolic::{CotangentState, UnitTangentFrame};
use crate::report::{fit_power_law, Estimate, ExponentFit};

use super::{sample_unit_states, EpsBox};

/// The box average
/// `I(b0, T0) = (2 b0)^{-(J+1)} int a~ o G_eps^{T0}(rho0) d eps`.
///
/// Monte Carlo boxes report the standard error of the weighted mean; grid
/// boxes report zero statistical error.
pub fn i_integral(
    rho0: &CotangentState,
    family: &PerturbationFamily,
    eps_box: &EpsBox,
    t0: f64,
    a: &Observable,
    integrator: &IntegratorConfig,
) -> Result<Estimate> {
    let samples = eps_box.samples();
    let values: Vec<Result<f64>> = samples
        .par_iter()
        .map(|s| -> Result<f64> {
            let params = HamiltonianParams::new(family, s.eps.clone())?;
            let end = perturbed_flow(rho0, &params, t0, integrator)?;
            a.eval_homogeneous(&end)
        })
        .collect();
    let mut mean = 0.0;
    let mut meansq = 0.0;
    for (s, v) in samples.iter().zip(values) {
        let v = v?;
        mean += s.weight * v;
        meansq += s.weight * v * v;
    }
    let error = match eps_box.sampling {
        super::BoxSampling::MonteCarlo => {
            let var = (meansq - mean * mean).max(0.0);
            (var / samples.len() as f64).sqrt()
        }
        super::BoxSampling::Grid => 0.0,
    };
    Ok(Estimate { value: mean, error })
}

/// Configuration of the equidistribution sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EquidistConfig {
    /// Critical exponent: T0 = t |log b0|, t in (1, 3/2).
    pub t: f64,
    pub b0_list: Vec<f64>,
    pub n_base_points: usize,
    pub base_point_seed: u64,
    /// Monte Carlo samples per (b0, base point) box.
    pub box_samples: usize,
    pub box_seed: u64,
    /// Sub-critical control exponent t' < 1 and its box half-width.
    pub t_subcritical: f64,
    pub b0_subcritical: f64,
    pub integrator: IntegratorConfig,
}

impl Default for EquidistConfig {
    fn default() -> Self {
        Self {
            t: 1.3,
            b0_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
            n_base_points: 10,
            base_point_seed: 0xba5e,
            box_samples: 256,
            box_seed: 0xb0c5,
            t_subcritical: 0.8,
            b0_subcritical: 1e-3,
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Deviations at one box half-width of the sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepPoint {
    pub b0: f64,
    pub t0: f64,
    /// Max over base points of |I - Liouville|.
    pub d_max: f64,
    /// Median over base points.
    pub d_median: f64,
    /// Largest Monte Carlo standard error among the base points.
    pub max_se: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquidistResult {
    pub liouville: f64,
    pub oscillation: f64,
    pub points: Vec<SweepPoint>,
    /// Fitted decay exponent of D(b0) against b0.
    pub fit: Option<ExponentFit>,
    /// D decreasing along the sweep within two combined error bars.
    pub decreasing_within_errors: bool,
    /// Max over base points of |I - a~ o G_0^{T0}(rho0)| in the sub-critical
    /// regime.
    pub subcritical_max_dev: f64,
    /// Energy-uniformity probe: max deviation over median deviation at the
    /// smallest b0.
    pub max_over_median: f64,
}

/// Runs the sweep: for each b0 and base point, compares the box average at
/// `T0 = t |log b0|` with the Liouville average, then checks the sub-critical
/// regime where the box average must instead track the unperturbed orbit.
pub fn equidistribution_sweep(
    family: &PerturbationFamily,
    a: &Observable,
    liouville: f64,
    cfg: &EquidistConfig,
) -> Result<EquidistResult> {
    let surface = family.surface();
    let base_points = sample_unit_states(surface, cfg.n_base_points, cfg.base_point_seed)?;
    let dim = family.len();

    let mut points = Vec::with_capacity(cfg.b0_list.len());
    for (ib, &b0) in cfg.b0_list.iter().enumerate() {
        let t0 = cfg.t * b0.ln().abs();
        let mut devs = Vec::with_capacity(base_points.len());
        let mut max_se = 0.0_f64;
        for (ip, rho0) in base_points.iter().enumerate() {
            let eps_box = EpsBox::monte_carlo(
                b0,
                dim,
                cfg.box_samples,
                cfg.box_seed
                    .wrapping_add((ib * base_points.len() + ip) as u64),
            );
            let est = i_integral(rho0, family, &eps_box, t0, a, &cfg.integrator)?;
            devs.push((est.value - liouville).abs());
            max_se = max_se.max(est.error);
        }
        devs.sort_by(f64::total_cmp);
        points.push(SweepPoint {
            b0,
            t0,
            d_max: *devs.last().unwrap(),
            d_median: devs[devs.len() / 2],
            max_se,
        });
    }

    let decreasing_within_errors = points.windows(2).all(|w| {
        w[1].d_max <= w[0].d_max + 2.0 * (w[0].max_se + w[1].max_se)
    });
    let fit = fit_power_law(
        &points
            .iter()
            .map(|p| (p.b0, p.d_max))
            .collect::<Vec<_>>(),
    );

    // Sub-critical control: at t' < 1 the box average tracks the value of
    // the observable along the unperturbed orbit.
    let t0_sub = cfg.t_subcritical * cfg.b0_subcritical.ln().abs();
    let mut subcritical_max_dev = 0.0_f64;
    for (ip, rho0) in base_points.iter().enumerate() {
        let eps_box = EpsBox::monte_carlo(
            cfg.b0_subcritical,
            dim,
            cfg.box_samples,
            cfg.box_seed.wrapping_add(0x5ab0 + ip as u64),
        );
        let est = i_integral(rho0, family, &eps_box, t0_sub, a, &cfg.integrator)?;
        let unperturbed = UnitTangentFrame::from_state(rho0)?
            .geodesic_flow(t0_sub)
            .to_state();
        let reference = a.eval_unit(&unperturbed)?;
        subcritical_max_dev = subcritical_max_dev.max((est.value - reference).abs());
    }

    let last = points.last().unwrap();
    let max_over_median = if last.d_median > 0.0 {
        last.d_max / last.d_median
    } else {
        f64::INFINITY
    };

    Ok(EquidistResult {
        liouville,
        oscillation: a.oscillation()?,
        points,
        fit,
        decreasing_within_errors,
        subcritical_max_dev,
        max_over_median,
    })
}
