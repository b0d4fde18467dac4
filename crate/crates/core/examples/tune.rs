//! Scratch measurement run used while freezing the default family: for
//! candidate bump layouts, reports the support covering radius, the
//! admissibility margin on a coarse grid, and the integrator energy drift.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use horolab_core::functionals::{admissibility_check, GridSpec};
use horolab_core::hyperbolic::hyperbolic_distance;
use horolab_core::surface::{build_bolza, disk_to_halfplane};
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());

    let mut layouts: Vec<(String, FamilySpec)> =
        vec![("default".into(), FamilySpec::default())];
    for scale in [1.5, 2.0] {
        let base = FamilySpec::default();
        layouts.push((
            format!("default x{scale}"),
            FamilySpec {
                potentials: base
                    .potentials
                    .into_iter()
                    .map(|p| PotentialSpec {
                        amplitudes: p.amplitudes.iter().map(|a| a * scale).collect(),
                        ..p
                    })
                    .collect(),
                r_max: base.r_max,
            },
        ));
    }
    // Vertex of the octagon: disk radius tanh(circumradius/2) at angle pi/8.
    let rv = ((3.0 + 2.0 * 2.0_f64.sqrt()).acosh() / 2.0).tanh();
    let vx = (
        rv * (std::f64::consts::PI / 8.0).cos(),
        rv * (std::f64::consts::PI / 8.0).sin(),
    );
    layouts.push((
        "vertex x2".into(),
        FamilySpec {
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
                    centers_disk: vec![(-0.275, -0.476314), vx],
                    amplitudes: vec![-1.7, -1.3],
                },
            ],
            r_max: 1.2,
        },
    ));
    layouts.push((
        "ring6 x2".into(),
        FamilySpec {
            potentials: vec![
                PotentialSpec {
                    centers_disk: vec![(0.62, 0.0), (0.25 * (1.047_f64).cos(), 0.25 * (1.047_f64).sin())],
                    amplitudes: vec![2.0, 1.6],
                },
                PotentialSpec {
                    centers_disk: vec![
                        (0.62 * (2.094_f64).cos(), 0.62 * (2.094_f64).sin()),
                        (0.25 * (3.1416_f64).cos(), 0.25 * (3.1416_f64).sin()),
                    ],
                    amplitudes: vec![1.8, 1.4],
                },
                PotentialSpec {
                    centers_disk: vec![
                        (0.62 * (4.189_f64).cos(), 0.62 * (4.189_f64).sin()),
                        (0.25 * (5.236_f64).cos(), 0.25 * (5.236_f64).sin()),
                    ],
                    amplitudes: vec![-1.7, -1.3],
                },
            ],
            r_max: 1.2,
        },
    ));

    for (name, spec) in layouts {
        let family = match build_admissible_family(&surface, &spec) {
            Ok(f) => f,
            Err(e) => {
                println!("{name}: build failed: {e}");
                continue;
            }
        };

        let centers: Vec<Complex64> = spec
            .potentials
            .iter()
            .flat_map(|p| p.centers_disk.iter())
            .map(|&(x, y)| disk_to_halfplane(Complex64::new(x, y)).unwrap())
            .collect();
        let ball = surface
            .translate_ball(2.0 * surface.injectivity_radius)
            .unwrap();
        let mut orbit = Vec::new();
        for g in &ball {
            for c in &centers {
                orbit.push(g.apply_point(*c));
            }
        }
        let mut covering = 0.0_f64;
        let disk_r = (surface.circumradius / 2.0).tanh();
        for ix in 0..40 {
            for iy in 0..40 {
                let w = Complex64::new(
                    -disk_r + (ix as f64 + 0.5) * disk_r / 20.0,
                    -disk_r + (iy as f64 + 0.5) * disk_r / 20.0,
                );
                if w.norm() >= 1.0 {
                    continue;
                }
                let z = disk_to_halfplane(w).unwrap();
                if !surface.in_domain(z, 1e-9).unwrap() {
                    continue;
                }
                let d = orbit
                    .iter()
                    .map(|c| hyperbolic_distance(z, *c).unwrap())
                    .fold(f64::INFINITY, f64::min);
                covering = covering.max(d);
            }
        }

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

        let am = report.argmin;
        println!(
            "{name:14}: covering r = {covering:.3}, admissibility min = {:.6} \
             (argmin z = {:.3}+{:.3}i, angle {:.2}), drift = {:.3e} ({:.1?})",
            report.min_max_abs_l,
            am.z.re,
            am.z.im,
            am.covector_angle(),
            drift,
            t0.elapsed()
        );
    }
}
