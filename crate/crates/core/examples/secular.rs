use horolab_core::fields::{build_admissible_family, FamilySpec};
use horolab_core::flows::{flow_with_samples, HamiltonianParams, IntegratorConfig};
use horolab_core::hyperbolic::CotangentState;
use horolab_core::surface::build_bolza;
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let surface = Arc::new(build_bolza().unwrap());
    let family = build_admissible_family(&surface, &FamilySpec::default()).unwrap();
    let m = family.len();
    let eps = vec![0.1 / (m as f64).sqrt(); m];
    let params = HamiltonianParams::new(&family, eps).unwrap();
    let cfg = IntegratorConfig { energy_tol_rel: 1.0, ..IntegratorConfig::default() };
    for (zr, zi, th) in [(0.31, 1.21, 0.83), (-0.55, 0.84, 2.4), (0.9, 1.4, 1.7)] {
        let z = Complex64::new(zr, zi);
        let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th)).unwrap();
        let rows = flow_with_samples(&s, &params, 50.0, &cfg, 50).unwrap();
        let e0 = rows[0].energy;
        // least squares slope of |err| vs t
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, (r.energy - e0).abs())).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let h1: f64 = pts.iter().filter(|p| p.0 <= 25.0).map(|p| p.1).fold(0.0, f64::max);
        let h2: f64 = pts.iter().filter(|p| p.0 > 25.0).map(|p| p.1).fold(0.0, f64::max);
        println!("state ({zr},{zi},{th}): env {:.3e}, lsq slope {:.3e}, halves {:.3e} / {:.3e}", 
            pts.iter().map(|p| p.1).fold(0.0, f64::max), slope, h1, h2);
    }
}
