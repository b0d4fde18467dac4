//! Shadowing search: the corrected initial point whose unperturbed orbit
//! tracks the projected perturbed orbit over a finite window, up to a small
//! free time shift. Realises the inverse image of the structural-stability
//! conjugacy at one point, with the horocycle-coefficient surrogate as the
//! initial guess.

use crate::error::{Error, Result};
use crate::fields::PerturbationFamily;
use crate::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use crate::functionals::{QuadratureConfig, ZCoefficients};
use crate::hyperbolic::{CotangentState, HorocycleBranch, UnitTangentFrame};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ShadowingConfig {
    /// Time half-window; `None` selects `min(2 + |ln ||eps|| |, 12)`.
    pub window: Option<f64>,
    /// Spacing of the trajectory samples compared along the window.
    pub dt_sample: f64,
    /// Half-count of the time-shift grid (2n+1 nodes plus a parabolic
    /// refinement).
    pub shift_nodes: usize,
    /// Convergence tolerance of the coordinate descent, in the horocycle
    /// parameters.
    pub param_tol: f64,
    pub max_sweeps: usize,
    pub integrator: IntegratorConfig,
    pub quad: QuadratureConfig,
}

impl Default for ShadowingConfig {
    fn default() -> Self {
        Self {
            window: None,
            dt_sample: 0.05,
            shift_nodes: 4,
            param_tol: 1e-10,
            max_sweeps: 50,
            integrator: IntegratorConfig::default(),
            quad: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ShadowingResult {
    pub s_u: f64,
    pub s_s: f64,
    /// The reparametrisation-tolerant divergence at the optimum.
    pub residual: f64,
    pub sweeps: usize,
    /// Set when the residual exceeds ten times ||eps||.
    pub quality_warning: bool,
}

struct SearchContext<'a> {
    frame0: UnitTangentFrame,
    surface: &'a crate::surface::FuchsianSurface,
    /// Projected perturbed orbit samples, backward half then forward half.
    backward: Vec<(f64, CotangentState)>,
    forward: Vec<(f64, CotangentState)>,
    delta_max: f64,
    shift_nodes: usize,
}

impl SearchContext<'_> {
    /// Divergence over one half-window: the worst, over the stored samples,
    /// of the time-shift-minimised distance between the unperturbed orbit of
    /// the candidate point and the projected perturbed orbit.
    fn divergence(&self, s_u: f64, s_s: f64, samples: &[(f64, CotangentState)]) -> Result<f64> {
        let alpha = self
            .frame0
            .horocycle_flow(s_u, HorocycleBranch::Unstable)
            .horocycle_flow(s_s, HorocycleBranch::Stable);
        let mut worst = 0.0_f64;
        for (t, phi) in samples {
            let mut best = f64::INFINITY;
            let mut best_i = 0usize;
            let n = self.shift_nodes as i64;
            let at = |delta: f64| -> Result<f64> {
                let moved = alpha.geodesic_flow(t + delta);
                let (red, _) = self.surface.reduce_frame(&moved)?;
                self.surface.quotient_distance(&red.to_state(), phi)
            };
            let mut grid_vals = Vec::with_capacity(2 * self.shift_nodes + 1);
            for i in -n..=n {
                let delta = self.delta_max * i as f64 / n as f64;
                let d = at(delta)?;
                grid_vals.push(d);
                if d < best {
                    best = d;
                    best_i = (i + n) as usize;
                }
            }
            // Parabolic refinement around the discrete minimum.
            if best_i > 0 && best_i + 1 < grid_vals.len() {
                let h = self.delta_max / n as f64;
                let (dm, d0, dp) = (
                    grid_vals[best_i - 1],
                    grid_vals[best_i],
                    grid_vals[best_i + 1],
                );
                let denom = dm - 2.0 * d0 + dp;
                if denom > 0.0 {
                    let frac = 0.5 * (dm - dp) / denom;
                    if frac.abs() <= 1.0 {
                        let delta =
                            self.delta_max * (best_i as f64 - n as f64) / n as f64 + frac * h;
                        best = best.min(at(delta)?);
                    }
                }
            }
            worst = worst.max(best);
        }
        Ok(worst)
    }
}

fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    const INV_PHI: f64 = 0.6180339887498949;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Finds the horocycle parameters `(s_u, s_s)` whose point
/// `H_s^{s_s} H_u^{s_u}(rho0)` shadows the projected perturbed flow over the
/// window, by coordinate descent: the unstable parameter against the
/// backward half-window, the stable one against the forward half-window,
/// initialised at the first-order coefficients.
pub fn shadowing_point(
    rho0: &CotangentState,
    family: &PerturbationFamily,
    eps: &[f64],
    cfg: &ShadowingConfig,
) -> Result<ShadowingResult> {
    let eps_norm = eps.iter().map(|e| e * e).sum::<f64>().sqrt();
    if eps_norm > 0.05 {
        return Err(Error::Config(format!(
            "shadowing search requires ||eps|| <= 0.05, got {eps_norm}"
        )));
    }
    let surface = family.surface();
    let red = surface.reduce_to_domain(rho0)?.state;
    let n = red.covector_norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("shadowing requires a unit state".into()));
    }
    let frame0 = UnitTangentFrame::from_state(&red)?;
    let window = cfg
        .window
        .unwrap_or_else(|| (2.0 + eps_norm.ln().abs()).min(12.0));

    // Projected perturbed orbit: lift to the p_eps shell of rho0, flow both
    // directions, project the samples back to unit covectors.
    let params = HamiltonianParams::new(family, eps.to_vec())?;
    let e_tot = crate::flows::energy(&red, &params)?;
    let sample_every = (cfg.dt_sample / cfg.integrator.h).round().max(1.0) as usize;
    let mut halves: Vec<Vec<(f64, CotangentState)>> = Vec::with_capacity(2);
    for sign in [-1.0_f64, 1.0] {
        let radicand = 2.0 * (e_tot - family.eval(red.z, eps)?);
        if radicand <= 0.0 {
            return Err(Error::Domain(
                "energy-shell lift failed in the shadowing search".into(),
            ));
        }
        let lifted = red.with_covector_norm(radicand.sqrt())?;
        let rows = flow_with_samples(
            &lifted,
            &params,
            sign * window / (2.0 * red.kinetic_energy()).sqrt(),
            &cfg.integrator,
            sample_every,
        )?;
        let mut half = Vec::with_capacity(rows.len());
        for r in rows {
            // Projected flow time runs sqrt(2E) times faster than the
            // Hamiltonian clock; with unit states they coincide.
            let t = r.t * (2.0 * red.kinetic_energy()).sqrt();
            half.push((t, r.state.with_covector_norm(1.0)?));
        }
        halves.push(half);
    }
    let backward = halves.remove(0);
    let forward = halves.remove(0);

    let zc = ZCoefficients::compute(&red, family, eps, &cfg.quad)?;
    let ctx = SearchContext {
        frame0,
        surface,
        backward,
        forward,
        delta_max: 5.0 * eps_norm * window,
        shift_nodes: cfg.shift_nodes,
    };

    let mut s_u = zc.c_u;
    let mut s_s = zc.c_s;
    let bracket0 = 4.0 * eps_norm + 8.0 * (zc.c_u.abs() + zc.c_s.abs());
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > cfg.max_sweeps {
            return Err(Error::SearchFailure(format!(
                "shadowing coordinate descent did not converge within {} sweeps",
                cfg.max_sweeps
            )));
        }
        let bracket = bracket0 / 2f64.powi(sweeps.min(20) as i32 - 1);
        let prev = (s_u, s_s);
        s_u = golden_min(
            |x| ctx.divergence(x, s_s, &ctx.backward),
            s_u - bracket,
            s_u + bracket,
            cfg.param_tol,
        )?;
        s_s = golden_min(
            |x| ctx.divergence(s_u, x, &ctx.forward),
            s_s - bracket,
            s_s + bracket,
            cfg.param_tol,
        )?;
        if (s_u - prev.0).abs() + (s_s - prev.1).abs() < cfg.param_tol && sweeps >= 2 {
            break;
        }
    }
    let residual = ctx
        .divergence(s_u, s_s, &ctx.backward)?
        .max(ctx.divergence(s_u, s_s, &ctx.forward)?);
    Ok(ShadowingResult {
        s_u,
        s_s,
        residual,
        sweeps,
        quality_warning: residual > 10.0 * eps_norm,
    })
}

/// The shadowed point itself.
pub fn shadowing_state(
    rho0: &CotangentState,
    family: &PerturbationFamily,
    result: &ShadowingResult,
) -> Result<CotangentState> {
    let surface = family.surface();
    let red = surface.reduce_to_domain(rho0)?.state;
    let f = UnitTangentFrame::from_state(&red)?
        .horocycle_flow(result.s_u, HorocycleBranch::Unstable)
        .horocycle_flow(result.s_s, HorocycleBranch::Stable);
    Ok(surface.reduce_to_domain(&f.to_state())?.state)
}
