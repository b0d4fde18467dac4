//! Floors of multiplicity-heavy layouts: 12 balls assigned to 3 or 4
//! potentials.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::functionals::{
    admissibility_check, admissibility_values, GridSpec, QuadratureConfig,
};
use horolab_core::hyperbolic::CotangentState;
use horolab_core::surface::{build_bolza, disk_to_halfplane, halfplane_to_disk, FuchsianSurface};
use num_complex::Complex64;
use std::sync::Arc;

const SCAN_Q: QuadratureConfig = QuadratureConfig {
    t_max: 14.0,
    nodes_per_panel: 8,
    panel_width: 0.125,
    tolerance: 1.0,
};

fn refined_floor(surface: &Arc<FuchsianSurface>, spec: &FamilySpec) -> (f64, (f64, f64, f64)) {
    let family = build_admissible_family(surface, spec).unwrap();
    let grid = GridSpec {
        n_base: 16,
        n_angles: 24,
        quad: SCAN_Q,
        collect_rows: true,
        ..GridSpec::default()
    };
    let report = admissibility_check(&family, &grid).unwrap();
    let mut rows = report.rows;
    rows.sort_by(|a, b| a.max_abs_l.total_cmp(&b.max_abs_l));
    let mut floor = f64::INFINITY;
    let mut at = (0.0, 0.0, 0.0);
    for row in rows.iter().take(12) {
        let w = halfplane_to_disk(row.state.z);
        let mut center = (w.re, w.im, row.state.covector_angle());
        let mut half = (0.055_f64, 0.055_f64, 0.14_f64);
        let mut local = row.max_abs_l;
        for _ in 0..3 {
            let n = 4i32;
            let mut best = (local, center);
            for ix in -n..=n {
                for iy in -n..=n {
                    for ia in -n..=n {
                        let wz = Complex64::new(
                            center.0 + half.0 * ix as f64 / n as f64,
                            center.1 + half.1 * iy as f64 / n as f64,
                        );
                        if wz.norm() >= 0.995 {
                            continue;
                        }
                        let th = center.2 + half.2 * ia as f64 / n as f64;
                        let z = disk_to_halfplane(wz).unwrap();
                        let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th))
                            .unwrap();
                        let vals = admissibility_values(&s, &family, &SCAN_Q).unwrap();
                        let m = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                        if m < best.0 {
                            best = (m, (wz.re, wz.im, th));
                        }
                    }
                }
            }
            local = best.0;
            center = best.1;
            half = (half.0 / 3.0, half.1 / 3.0, half.2 / 3.0);
        }
        if local < floor {
            floor = local;
            at = center;
        }
    }
    (floor, at)
}

fn pol(r: f64, deg: f64) -> (f64, f64) {
    let a = deg.to_radians();
    (r * a.cos(), r * a.sin())
}

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let ring = 0.60;
    let inner = 0.25;

    // Config A: 3 potentials x 4 bumps.
    let a = FamilySpec {
        potentials: vec![
            PotentialSpec {
                centers_disk: vec![pol(ring, 0.0), pol(ring, 135.0), pol(ring, 270.0), pol(inner, 22.5)],
                amplitudes: vec![2.0, 1.8, 1.6, 1.9],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 45.0), pol(ring, 180.0), pol(ring, 315.0), pol(inner, 112.5)],
                amplitudes: vec![1.9, 1.7, 1.5, 1.8],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 90.0), pol(ring, 225.0), pol(inner, 202.5), pol(inner, 292.5)],
                amplitudes: vec![-1.85, -1.65, -1.75, -1.55],
            },
        ],
        r_max: 1.25,
    };
    let (fa, ata) = refined_floor(&surface, &a);
    println!("3 pots x 4 bumps: floor = {fa:.6} at ({:.4},{:.4},{:.3})", ata.0, ata.1, ata.2);

    // Config B: 4 potentials x 3 bumps.
    let b = FamilySpec {
        potentials: vec![
            PotentialSpec {
                centers_disk: vec![pol(ring, 0.0), pol(ring, 180.0), pol(inner, 22.5)],
                amplitudes: vec![2.0, 1.7, 1.9],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 45.0), pol(ring, 225.0), pol(inner, 112.5)],
                amplitudes: vec![1.85, 1.55, 1.75],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 90.0), pol(ring, 270.0), pol(inner, 202.5)],
                amplitudes: vec![-1.9, -1.6, -1.8],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 135.0), pol(ring, 315.0), pol(inner, 292.5)],
                amplitudes: vec![-1.95, -1.65, -1.45],
            },
        ],
        r_max: 1.25,
    };
    let (fb, atb) = refined_floor(&surface, &b);
    println!("4 pots x 3 bumps: floor = {fb:.6} at ({:.4},{:.4},{:.3})", atb.0, atb.1, atb.2);
}
