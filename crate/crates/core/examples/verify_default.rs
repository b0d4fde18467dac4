//! Official certificate and drift runs for the frozen default family.

use horolab_core::fields::{build_admissible_family, FamilySpec};
use horolab_core::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use horolab_core::functionals::{admissibility_check, GridSpec};
use horolab_core::hyperbolic::CotangentState;
use horolab_core::surface::build_bolza;
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let family = build_admissible_family(&surface, &FamilySpec::default()).unwrap();
    for (nb, na) in [(40usize, 64usize), (80, 128)] {
        let t0 = std::time::Instant::now();
        let grid = GridSpec { n_base: nb, n_angles: na, ..GridSpec::default() };
        let r = admissibility_check(&family, &grid).unwrap();
        println!(
            "grid {nb}x{nb}x{na}: min = {:.6} at ({:.4},{:.4},{:.3}), {} states [{:.1?}]",
            r.min_max_abs_l, r.argmin.z.re, r.argmin.z.im, r.argmin.covector_angle(), r.n_states, t0.elapsed()
        );
    }
    let m = family.len();
    let eps = vec![0.1 / (m as f64).sqrt(); m];
    let params = HamiltonianParams::new(&family, eps).unwrap();
    let cfg = IntegratorConfig { energy_tol_rel: 1.0, ..IntegratorConfig::default() };
    for (zr, zi, th) in [(0.31, 1.21, 0.83), (-0.55, 0.84, 2.4), (1.02, 1.73, -1.2), (0.1, 0.6, 0.2)] {
        let z = Complex64::new(zr, zi);
        let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th)).unwrap();
        let samples = flow_with_samples(&s, &params, 50.0, &cfg, 200).unwrap();
        let e0 = samples[0].energy;
        let d = samples.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
        println!("drift at ({zr},{zi},{th}): {:.3e} rel", d / e0.abs());
    }
}
