//! Local zoom around the certificate argmin: does min(max_j |L_j|) have a
//! positive floor there, or a genuine common zero?

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::functionals::{admissibility_values, QuadratureConfig};
use horolab_core::hyperbolic::CotangentState;
use horolab_core::surface::{build_bolza, disk_to_halfplane, halfplane_to_disk};
use num_complex::Complex64;
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
        r_max: 1.25,
    };
    let family = build_admissible_family(&surface, &spec).unwrap();
    let q = QuadratureConfig {
        t_max: 25.0,
        panel_width: 0.0625,
        tolerance: 1.0,
        nodes_per_panel: 8,
    };

    // Argmin of the 40x64 grid.
    let z0 = Complex64::new(1.3780, 0.9479);
    let th0 = -1.374;
    let w0 = halfplane_to_disk(z0);

    let mut center = (w0.re, w0.im, th0);
    let mut half = (0.02, 0.02, 0.10);
    for level in 0..5 {
        let mut best = (f64::INFINITY, center);
        let n = 12;
        for ix in -n..=n {
            for iy in -n..=n {
                for ia in -n..=n {
                    let w = Complex64::new(
                        center.0 + half.0 * ix as f64 / n as f64,
                        center.1 + half.1 * iy as f64 / n as f64,
                    );
                    if w.norm() >= 0.995 {
                        continue;
                    }
                    let th = center.2 + half.2 * ia as f64 / n as f64;
                    let z = disk_to_halfplane(w).unwrap();
                    let s =
                        CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th)).unwrap();
                    let vals = admissibility_values(&s, &family, &q).unwrap();
                    let m = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                    if m < best.0 {
                        best = (m, (w.re, w.im, th));
                    }
                }
            }
        }
        center = best.1;
        println!(
            "level {level}: local min {:.8} at disk ({:.5},{:.5}) angle {:.5}",
            best.0, center.0, center.1, center.2
        );
        let z = disk_to_halfplane(Complex64::new(center.0, center.1)).unwrap();
        let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, center.2)).unwrap();
        let vals = admissibility_values(&s, &family, &q).unwrap();
        println!("  L = {vals:?}");
        half = (half.0 / 4.0, half.1 / 4.0, half.2 / 4.0);
    }
}
