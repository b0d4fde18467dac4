//! The reduction-chain comparison: the box average of the perturbed
//! evolution against the box average of the unperturbed flow started from
//! the horocycle-shifted point, sharing the same parameter samples so the
//! Monte Carlo noise cancels in the difference.

use rayon::prelude::*;

use crate::error::Result;
use crate::fields::{Observable, PerturbationFamily};
use crate::flows::{perturbed_flow, HamiltonianParams, IntegratorConfig};
use crate::functionals::{admissibility_values, beta_u_from_values, QuadratureConfig};
use crate::hyperbolic::{CotangentState, HorocycleBranch, UnitTangentFrame};

use super::EpsBox;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ReductionConfig {
    /// Critical exponent: T0 = t |log b0|.
    pub t: f64,
    pub b0_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Holder exponent used in the reported theorem budget.
    pub gamma1: f64,
    pub integrator: IntegratorConfig,
    pub quad: QuadratureConfig,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            t: 1.2,
            b0_list: vec![1e-2, 3e-3, 1e-3, 3e-4],
            samples: 256,
            seed: 0x2ed0,
            gamma1: 0.49,
            integrator: IntegratorConfig::default(),
            quad: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ReductionRow {
    pub b0: f64,
    pub t0: f64,
    /// |box avg of a~ o G_eps^{T0} - box avg of a~ o G_0^{T0 sqrt(2E)} o
    /// H_u^{beta^u(eps)}|.
    pub delta: f64,
    /// The lemma budget b0 (1 + e^{T0 sqrt(2E)} b0^{gamma1}) at unit
    /// constant.
    pub budget: f64,
    /// The log-absorbed normalisation Delta / (b0 |log b0|).
    pub log_absorbed_ratio: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ReductionResult {
    pub rows: Vec<ReductionRow>,
    pub decreasing: bool,
    /// max/min of the log-absorbed ratios across the sweep.
    pub ratio_spread: f64,
}

/// Runs the comparison at one base state over a decreasing list of box
/// half-widths.
pub fn reduction_chain_check(
    rho0: &CotangentState,
    family: &PerturbationFamily,
    a: &Observable,
    cfg: &ReductionConfig,
) -> Result<ReductionResult> {
    let surface = family.surface();
    let e_kin = rho0.kinetic_energy();
    let sqrt_2e = (2.0 * e_kin).sqrt();
    let unit = rho0.with_covector_norm(1.0)?;
    let unit_red = surface.reduce_to_domain(&unit)?.state;
    let frame0 = UnitTangentFrame::from_state(&unit_red)?;
    // beta^u(eps) is a fixed linear form in eps; cache the admissibility
    // values once.
    let l_values = admissibility_values(&unit_red, family, &cfg.quad)?;
    let l_scaled: Vec<f64> = l_values.iter().map(|l| l / rho0.covector_norm()).collect();

    let mut rows = Vec::with_capacity(cfg.b0_list.len());
    for (ib, &b0) in cfg.b0_list.iter().enumerate() {
        let t0 = cfg.t * b0.ln().abs();
        let eps_box = EpsBox::monte_carlo(
            b0,
            family.len(),
            cfg.samples,
            cfg.seed.wrapping_add(ib as u64),
        );
        let samples = eps_box.samples();
        let diffs: Vec<Result<(f64, f64)>> = samples
            .par_iter()
            .map(|s| -> Result<(f64, f64)> {
                let params = HamiltonianParams::new(family, s.eps.clone())?;
                let lhs_state = perturbed_flow(rho0, &params, t0, &cfg.integrator)?;
                let lhs = a.eval_homogeneous(&lhs_state)?;
                let beta = beta_u_from_values(&l_scaled, &s.eps);
                let rhs_state = frame0
                    .horocycle_flow(beta, HorocycleBranch::Unstable)
                    .geodesic_flow(t0 * sqrt_2e)
                    .to_state();
                let rhs = a.eval_unit(&rhs_state)?;
                Ok((lhs, rhs))
            })
            .collect();
        let mut lhs_mean = 0.0;
        let mut rhs_mean = 0.0;
        for (s, d) in samples.iter().zip(diffs) {
            let (l, r) = d?;
            lhs_mean += s.weight * l;
            rhs_mean += s.weight * r;
        }
        let delta = (lhs_mean - rhs_mean).abs();
        rows.push(ReductionRow {
            b0,
            t0,
            delta,
            budget: b0 * (1.0 + (t0 * sqrt_2e).exp() * b0.powf(cfg.gamma1)),
            log_absorbed_ratio: delta / (b0 * b0.ln().abs()),
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].delta <= w[0].delta);
    let ratios: Vec<f64> = rows.iter().map(|r| r.log_absorbed_ratio).collect();
    let ratio_spread = ratios.iter().cloned().fold(0.0, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ReductionResult {
        rows,
        decreasing,
        ratio_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_admissible_family, FamilySpec, ObservableSpec};
    use crate::surface::build_bolza;
    use std::sync::Arc;

    #[test]
    fn degenerate_box_gives_zero_delta() {
        // A single eps = 0 sample makes both sides the unperturbed flow.
        let surface = Arc::new(build_bolza().unwrap());
        let family = build_admissible_family(&surface, &FamilySpec::default()).unwrap();
        let a = crate::fields::Observable::from_spec(&surface, &ObservableSpec::default_bump())
            .unwrap();
        let rho0 = UnitTangentFrame::IDENTITY.to_state();
        let t0 = 4.0;
        let params = HamiltonianParams::new(&family, vec![0.0; family.len()]).unwrap();
        let lhs_state =
            perturbed_flow(&rho0, &params, t0, &IntegratorConfig::default()).unwrap();
        let lhs = a.eval_homogeneous(&lhs_state).unwrap();
        let rhs_state = UnitTangentFrame::from_state(&rho0)
            .unwrap()
            .geodesic_flow(t0)
            .to_state();
        let rhs = a.eval_unit(&rhs_state).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-9,
            "beta^u(0) = 0 should reduce to the unperturbed orbit: {lhs} vs {rhs}"
        );
    }
}
