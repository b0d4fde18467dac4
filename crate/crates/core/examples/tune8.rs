//! Inspect the admissibility integrands along the geodesic of the shared dip
//! state.

use horolab_core::fields::{build_admissible_family, FamilySpec, PotentialSpec};
use horolab_core::functionals::{admissibility_values, QuadratureConfig};
use horolab_core::hyperbolic::{CotangentState, UnitTangentFrame};
use horolab_core::surface::{build_bolza, disk_to_halfplane};
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let four = FamilySpec {
        potentials: vec![
            PotentialSpec { centers_disk: vec![(0.55, 0.0), (-0.30, 0.0)], amplitudes: vec![2.0, 1.6] },
            PotentialSpec { centers_disk: vec![(-0.275, 0.476314), (0.15, -0.259808)], amplitudes: vec![1.8, 1.4] },
            PotentialSpec { centers_disk: vec![(-0.275, -0.476314), (0.15, 0.259808)], amplitudes: vec![-1.7, -1.3] },
            PotentialSpec { centers_disk: vec![(0.0, 0.55), (0.0, -0.30)], amplitudes: vec![1.9, -1.5] },
        ],
        r_max: 1.25,
    };
    let family = build_admissible_family(&surface, &four).unwrap();
    let w = Complex64::new(-0.5880, 0.0435);
    let z = disk_to_halfplane(w).unwrap();
    let rho = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, -2.8448)).unwrap();
    let q = QuadratureConfig { t_max: 25.0, panel_width: 0.0625, tolerance: 1.0, nodes_per_panel: 8 };
    let vals = admissibility_values(&rho, &family, &q).unwrap();
    println!("L = {vals:?}");

    // Pairing profiles along the geodesic.
    let red = surface.reduce_to_domain(&rho).unwrap().state;
    let f0 = UnitTangentFrame::from_state(&red).unwrap();
    println!("t  | pairing_j ... | running integrals");
    let mut running = vec![0.0_f64; family.len()];
    let dt = 0.01;
    let mut f = f0;
    for k in 0..1500 {
        let t = k as f64 * dt;
        let node = surface.reduce_to_domain(&f.to_state()).unwrap().state;
        let y2 = node.z.im * node.z.im;
        let (px, py) = (node.xi.im, -node.xi.re);
        let mut line = String::new();
        for (j, p) in family.potentials().iter().enumerate() {
            let (gx, gy) = {
                // public grad at the reduced point
                p.grad(node.z).unwrap()
            };
            let pair = 0.5 * y2 * (gx * px + gy * py);
            running[j] += pair * (-t as f64).exp() * dt;
            line += &format!(" {pair:9.4}");
        }
        if k % 25 == 0 {
            println!("{t:5.2} |{line} | {:?}", running.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
        }
        f = surface.reduce_frame(&f.geodesic_flow(dt)).unwrap().0;
    }
}
