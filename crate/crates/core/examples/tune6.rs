//! Placement optimiser with a dip-refining objective: score a family by the
//! locally refined minimum of max_j |L_j| (coarse grid, then zoom at the
//! worst states), then verify winners on the acceptance grids.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::functionals::{
    admissibility_check, admissibility_values, GridSpec, QuadratureConfig,
};
use horolab_core::hyperbolic::{hyperbolic_distance, CotangentState};
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

fn spec_ok(surface: &FuchsianSurface, spec: &FamilySpec) -> bool {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for p in &spec.potentials {
        let mut g = Vec::new();
        for &(x, y) in &p.centers_disk {
            let w = Complex64::new(x, y);
            if w.norm() > 0.82 {
                return false;
            }
            let z = disk_to_halfplane(w).unwrap();
            if !surface.in_domain(z, 1e-6).unwrap() {
                return false;
            }
            g.push(z);
        }
        groups.push(g);
    }
    for i in 0..groups.len() {
        for j in 0..i {
            for a in &groups[i] {
                for b in &groups[j] {
                    if hyperbolic_distance(*a, *b).unwrap() < 1.02 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Locally refined floor: coarse scan, then two zoom levels at the worst
/// states.
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
                        let s = CotangentState::new(
                            z,
                            Complex64::from_polar(1.0 / z.im, th),
                        )
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
        floor = floor.min(local);
    }
    floor
}

fn random_spec(rng: &mut impl Rng) -> FamilySpec {
    let mut pots = Vec::new();
    for _ in 0..3 {
        let n_bumps = if rng.gen_bool(0.5) { 2 } else { 3 };
        let mut centers = Vec::new();
        let mut amps = Vec::new();
        for _ in 0..n_bumps {
            let r: f64 = rng.gen_range(0.05..0.75);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            centers.push((r * th.cos(), r * th.sin()));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            amps.push(sign * rng.gen_range(1.0..2.4));
        }
        pots.push(PotentialSpec {
            centers_disk: centers,
            amplitudes: amps,
        });
    }
    FamilySpec {
        potentials: pots,
        r_max: rng.gen_range(1.15..1.45),
    }
}

fn jitter(spec: &FamilySpec, rng: &mut impl Rng, scale: f64) -> FamilySpec {
    let mut s = spec.clone();
    for p in &mut s.potentials {
        for c in &mut p.centers_disk {
            c.0 += rng.gen_range(-scale..scale);
            c.1 += rng.gen_range(-scale..scale);
        }
        for a in &mut p.amplitudes {
            *a *= 1.0 + rng.gen_range(-0.5 * scale..0.5 * scale);
        }
    }
    s.r_max = (s.r_max + rng.gen_range(-scale..scale)).clamp(1.1, 1.46);
    s
}

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let mut rng = ChaCha12Rng::seed_from_u64(7071);
    let base = FamilySpec::default();
    let baseline = FamilySpec {
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
    let mut best = (refined_floor(&surface, &baseline), baseline);
    println!("baseline floor: {:.6}", best.0);
    let t0 = std::time::Instant::now();
    for k in 0..60 {
        let cand = random_spec(&mut rng);
        if !spec_ok(&surface, &cand) {
            continue;
        }
        let sc = refined_floor(&surface, &cand);
        if sc > best.0 {
            println!("candidate {k}: floor {sc:.6} [{:?}]", t0.elapsed());
            best = (sc, cand);
        }
    }
    println!("-- local refinement --");
    for round in 0..40 {
        let scale = if round < 20 { 0.05 } else { 0.02 };
        let cand = jitter(&best.1, &mut rng, scale);
        if !spec_ok(&surface, &cand) {
            continue;
        }
        let sc = refined_floor(&surface, &cand);
        if sc > best.0 {
            println!("refine {round}: floor {sc:.6}");
            best = (sc, cand);
        }
    }
    println!("best floor {:.6}, spec: {:?}", best.0, best.1);
}
