//! Jitter optimisation of the four-potential layout plus a five-potential
//! comparison, with energy-drift measurements.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use horolab_core::functionals::{
    admissibility_check, admissibility_values, GridSpec, QuadratureConfig,
};
use horolab_core::hyperbolic::CotangentState;
use horolab_core::surface::{build_bolza, disk_to_halfplane, halfplane_to_disk, FuchsianSurface};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::sync::Arc;

const SCAN_Q: QuadratureConfig = QuadratureConfig {
    t_max: 14.0,
    nodes_per_panel: 8,
    panel_width: 0.125,
    tolerance: 1.0,
};

fn refined_floor(surface: &Arc<FuchsianSurface>, spec: &FamilySpec) -> f64 {
    let family = match build_admissible_family(surface, spec) {
        Ok(f) => f,
        Err(_) => return 0.0,
    };
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
    for row in rows.iter().take(10) {
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
        floor = floor.min(local);
    }
    floor
}

fn drift_of(surface: &Arc<FuchsianSurface>, spec: &FamilySpec) -> f64 {
    let family = build_admissible_family(surface, spec).unwrap();
    let m = family.len();
    let eps = vec![0.1 / (m as f64).sqrt(); m];
    let params = HamiltonianParams::new(&family, eps).unwrap();
    let cfg = IntegratorConfig {
        energy_tol_rel: 1.0,
        ..IntegratorConfig::default()
    };
    let mut worst = 0.0_f64;
    for (zr, zi, th) in [(0.31, 1.21, 0.83), (-0.55, 0.84, 2.4), (1.02, 1.73, -1.2)] {
        let z = Complex64::new(zr, zi);
        let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th)).unwrap();
        let samples = flow_with_samples(&s, &params, 50.0, &cfg, 200).unwrap();
        let e0 = samples[0].energy;
        let d = samples
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d / e0.abs());
    }
    worst
}

fn pol(r: f64, deg: f64) -> (f64, f64) {
    let a = deg.to_radians();
    (r * a.cos(), r * a.sin())
}

fn four_base() -> FamilySpec {
    let ring = 0.60;
    let inner = 0.25;
    FamilySpec {
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
    }
}

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let mut rng = ChaCha12Rng::seed_from_u64(31415);

    let mut best = (refined_floor(&surface, &four_base()), four_base());
    println!("four base floor {:.6}, drift {:.3e}", best.0, drift_of(&surface, &best.1));
    let t0 = std::time::Instant::now();
    for round in 0..50 {
        let scale = if round < 25 { 0.05 } else { 0.02 };
        let mut cand = best.1.clone();
        for p in &mut cand.potentials {
            for c in &mut p.centers_disk {
                c.0 += rng.gen_range(-scale..scale);
                c.1 += rng.gen_range(-scale..scale);
                let n = (c.0 * c.0 + c.1 * c.1).sqrt();
                if n > 0.80 {
                    c.0 *= 0.80 / n;
                    c.1 *= 0.80 / n;
                }
            }
            for a in &mut p.amplitudes {
                *a *= 1.0 + rng.gen_range(-0.4 * scale..0.4 * scale);
            }
        }
        cand.r_max = (cand.r_max + rng.gen_range(-scale..scale)).clamp(1.1, 1.46);
        let sc = refined_floor(&surface, &cand);
        if sc > best.0 {
            println!("round {round}: floor {sc:.6} [{:?}]", t0.elapsed());
            best = (sc, cand);
        }
    }
    println!("best four floor {:.6}, drift {:.3e}", best.0, drift_of(&surface, &best.1));
    println!("best spec: {:?}", best.1);

    // Five potentials: split the twelve balls 5x(2..3).
    let ring = 0.60;
    let inner = 0.25;
    let five = FamilySpec {
        potentials: vec![
            PotentialSpec {
                centers_disk: vec![pol(ring, 0.0), pol(ring, 150.0), pol(inner, 60.0)],
                amplitudes: vec![2.0, 1.7, 1.85],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 30.0), pol(ring, 210.0), pol(inner, 150.0)],
                amplitudes: vec![1.9, 1.6, 1.75],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 60.0), pol(ring, 240.0), pol(inner, 240.0)],
                amplitudes: vec![-1.95, -1.55, -1.8],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 90.0), pol(ring, 300.0), pol(inner, 330.0)],
                amplitudes: vec![-1.85, -1.5, -1.65],
            },
            PotentialSpec {
                centers_disk: vec![pol(ring, 120.0), pol(ring, 330.0), pol(0.45, 195.0)],
                amplitudes: vec![1.8, -1.7, 1.6],
            },
        ],
        r_max: 1.25,
    };
    println!(
        "five floor {:.6}, drift {:.3e}",
        refined_floor(&surface, &five),
        drift_of(&surface, &five)
    );
}
