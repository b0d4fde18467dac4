//! Floor measurement for four- and five-potential families.

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
    let mut where_ = (0.0, 0.0, 0.0);
    for row in rows.iter().take(12) {
        let w = halfplane_to_disk(row.state.z);
        let mut center = (w.re, w.im, row.state.covector_angle());
        let mut half = (0.055_f64, 0.055_f64, 0.14_f64);
        let mut local = row.max_abs_l;
        for _level in 0..3 {
            let n = 4i32;
            let mut best = (local, center);
            for ix in -n..=n {
                for iy in -n..=n {
                    for ia in -n..=n {
                        let wx = center.0 + half.0 * ix as f64 / n as f64;
                        let wy = center.1 + half.1 * iy as f64 / n as f64;
                        let wz = Complex64::new(wx, wy);
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
                            best = (m, (wx, wy, th));
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
            where_ = center;
        }
    }
    (floor, where_)
}

fn main() {
    let surface = Arc::new(build_bolza().unwrap());

    // Four potentials: the tuned three plus one rotated pair.
    let four = FamilySpec {
        potentials: vec![
            PotentialSpec {
                centers_disk: vec![(0.55, 0.0), (-0.30, 0.0)],
                amplitudes: vec![2.0, 1.6],
            },
            PotentialSpec {
                centers_disk: vec![(-0.275, 0.476314), (0.15, -0.259808)],
                amplitudes: vec![1.8, 1.4],
            },
            PotentialSpec {
                centers_disk: vec![(-0.275, -0.476314), (0.15, 0.259808)],
                amplitudes: vec![-1.7, -1.3],
            },
            PotentialSpec {
                centers_disk: vec![(0.0, 0.55), (0.0, -0.30)],
                amplitudes: vec![1.9, -1.5],
            },
        ],
        r_max: 1.25,
    };
    let (floor, at) = refined_floor(&surface, &four);
    println!("four potentials: floor = {floor:.6} at disk ({:.4},{:.4}) angle {:.4}", at.0, at.1, at.2);

    let five = FamilySpec {
        potentials: {
            let mut p = four.potentials.clone();
            p.push(PotentialSpec {
                centers_disk: vec![(0.42, 0.42), (-0.2, -0.35)],
                amplitudes: vec![-1.85, 1.45],
            });
            p
        },
        r_max: 1.25,
    };
    let (floor5, at5) = refined_floor(&surface, &five);
    println!("five potentials: floor = {floor5:.6} at disk ({:.4},{:.4}) angle {:.4}", at5.0, at5.1, at5.2);
}
