//! Full-resolution certificate run for the candidate default family.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::functionals::{admissibility_check, GridSpec};
use horolab_core::surface::build_bolza;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
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
        r_max: base.r_max,
    };
    let family = build_admissible_family(&surface, &spec).unwrap();
    for (nb, na) in [(40usize, 64usize), (80, 128)] {
        let t0 = std::time::Instant::now();
        let grid = GridSpec {
            n_base: nb,
            n_angles: na,
            ..GridSpec::default()
        };
        let report = admissibility_check(&family, &grid).unwrap();
        println!(
            "grid {nb}x{nb}x{na}: min = {:.6} at ({:.4}+{:.4}i, {:.3}), {} states, {:.1?}",
            report.min_max_abs_l,
            report.argmin.z.re,
            report.argmin.z.im,
            report.argmin.covector_angle(),
            report.n_states,
            t0.elapsed()
        );
    }
}
