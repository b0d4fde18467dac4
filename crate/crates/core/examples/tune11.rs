//! Drift-constrained continuation of the four-potential optimisation.

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
const DRIFT_CAP: f64 = 7e-7;

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

fn score(surface: &Arc<FuchsianSurface>, spec: &FamilySpec) -> (f64, f64, f64) {
    if build_admissible_family(surface, spec).is_err() {
        return (0.0, 0.0, f64::INFINITY);
    }
    let floor = refined_floor(surface, spec);
    let drift = drift_of(surface, spec);
    let sc = if drift <= DRIFT_CAP {
        floor
    } else {
        floor * (DRIFT_CAP / drift).powi(3)
    };
    (sc, floor, drift)
}

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let mut rng = ChaCha12Rng::seed_from_u64(999331);
    // Winner of the previous run, amplitudes pre-scaled by 0.78 to sit
    // inside the drift budget.
    let start = FamilySpec {
        potentials: vec![
            PotentialSpec {
                centers_disk: vec![
                    (0.5676020196959016, -0.049528734337778546),
                    (-0.5438448984161812, 0.0023517904556799307),
                    (0.11494550368174455, 0.13382069600176646),
                ],
                amplitudes: vec![1.572842324, 1.336179369, 1.442504332],
            },
            PotentialSpec {
                centers_disk: vec![
                    (0.402426361131094, 0.5047676750396526),
                    (-0.42875040231956507, -0.37335734625629),
                    (-0.14900390898199514, 0.16960919004551286),
                ],
                amplitudes: vec![1.446058507, 1.209470919, 1.427063211],
            },
            PotentialSpec {
                centers_disk: vec![
                    (-0.06425166613055705, 0.6259490528509546),
                    (-0.0349061516370098, -0.48200710571774147),
                    (-0.2163532839049303, -0.041990329614861266),
                ],
                amplitudes: vec![-1.563061088, -1.241164820, -1.383729528],
            },
            PotentialSpec {
                centers_disk: vec![
                    (-0.4167596188933157, 0.3876998365764029),
                    (0.496097861206385, -0.3949128559330956),
                    (0.04128612300736676, -0.30089136019271107),
                ],
                amplitudes: vec![-1.504967035, -1.290329658, -1.109242541],
            },
        ],
        r_max: 1.2344788892946452,
    };
    let (sc0, f0, d0) = score(&surface, &start);
    println!("start: score {sc0:.6} floor {f0:.6} drift {d0:.3e}");
    let mut best = (sc0, start);
    let t0 = std::time::Instant::now();
    for round in 0..60 {
        let scale = if round < 30 { 0.035 } else { 0.015 };
        let mut cand = best.1.clone();
        for p in &mut cand.potentials {
            for c in &mut p.centers_disk {
                c.0 += rng.gen_range(-scale..scale);
                c.1 += rng.gen_range(-scale..scale);
                let n = (c.0 * c.0 + c.1 * c.1).sqrt();
                if n > 0.63 {
                    c.0 *= 0.63 / n;
                    c.1 *= 0.63 / n;
                }
            }
            for a in &mut p.amplitudes {
                *a *= 1.0 + rng.gen_range(-0.6 * scale..0.6 * scale);
            }
        }
        cand.r_max = (cand.r_max + rng.gen_range(-scale..scale)).clamp(1.1, 1.46);
        let (sc, fl, dr) = score(&surface, &cand);
        if sc > best.0 {
            println!("round {round}: score {sc:.6} floor {fl:.6} drift {dr:.3e} [{:?}]", t0.elapsed());
            best = (sc, cand);
        }
    }
    let (_, fl, dr) = score(&surface, &best.1);
    println!("final: floor {fl:.6} drift {dr:.3e}");
    println!("spec: {}", serde_json::to_string(&best.1).unwrap());
}
