//! r_max sweep for the candidate default family at x2 amplitudes.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use horolab_core::functionals::{admissibility_check, GridSpec};
use horolab_core::surface::build_bolza;
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    for r_max in [1.25, 1.35, 1.45] {
        let base = FamilySpec::default();
        let spec = FamilySpec {
            potentials: base
                .potentials
                .into_iter()
                .map(|p| PotentialSpec {
                    amplitudes: p.amplitudes.iter().map(|a| a * 2.0).collect(),
                    ..p
                })
                .collect(),
            r_max,
        };
        let family = build_admissible_family(&surface, &spec).unwrap();
        let t0 = std::time::Instant::now();
        let grid = GridSpec {
            n_base: 24,
            n_angles: 32,
            ..GridSpec::default()
        };
        let report = admissibility_check(&family, &grid).unwrap();
        let eps = vec![0.1 / 3f64.sqrt(); 3];
        let params = HamiltonianParams::new(&family, eps).unwrap();
        let cfg = IntegratorConfig {
            energy_tol_rel: 1.0,
            ..IntegratorConfig::default()
        };
        let z = Complex64::new(0.31, 1.21);
        let s =
            horolab_core::CotangentState::new(z, Complex64::from_polar(1.0 / z.im, 0.83)).unwrap();
        let samples = flow_with_samples(&s, &params, 50.0, &cfg, 100).unwrap();
        let e0 = samples[0].energy;
        let drift = samples
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max);
        println!(
            "r_max {r_max}: coarse min = {:.6} (argmin {:.3}+{:.3}i, {:.2}), drift = {:.3e}, {:.1?}",
            report.min_max_abs_l,
            report.argmin.z.re,
            report.argmin.z.im,
            report.argmin.covector_angle(),
            drift,
            t0.elapsed()
        );
    }
}
