//! Smooth potentials and observables on the quotient.
//!
//! Potentials are built from a radial profile in the cosh of the hyperbolic
//! distance, periodised over the group orbit of their centres; working in
//! `cosh d` instead of `d` keeps the gradient analytic through the bump
//! centre. All evaluations reduce the argument into the fundamental domain
//! first and transport differentials back through the reducing map, so values
//! and gradients are well defined on the quotient everywhere.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    apply_moebius, cosh_distance, hyperbolic_distance, CotangentState, HorocycleBranch,
    MoebiusMap, UnitTangentFrame,
};
use crate::surface::{disk_to_halfplane, FuchsianSurface};

/// Smooth compactly supported radial profile on `[1, cosh r_max]`:
/// `psi(u) = exp(1 - (1 - s^2)^{-2})` with `s = (u-1)/(cosh r_max - 1)`.
/// Vanishes to all orders at the support boundary; `psi(1) = 1`.
///
/// The squared reciprocal in the exponent pushes the profile below roundoff
/// well before the edge, so the derivative mass sits in the middle of the
/// support at moderate scale. The naive `exp(-s^2/(1-s^2))` bump instead
/// concentrates enormous high derivatives in a thin boundary layer, which
/// ruins both panel quadrature and splitting-integrator energy errors.
#[derive(Debug, Clone, Copy)]
pub struct BumpProfile {
    pub r_max: f64,
    u_max: f64,
}

impl BumpProfile {
    pub fn new(r_max: f64) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
        }
        Ok(Self {
            r_max,
            u_max: r_max.cosh(),
        })
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Profile value at `u = cosh d`.
    #[inline]
    pub fn psi(&self, u: f64) -> f64 {
        let s = (u - 1.0) / (self.u_max - 1.0);
        if s >= 1.0 || s < 0.0 {
            return 0.0;
        }
        let m = 1.0 - s * s;
        (1.0 - 1.0 / (m * m)).exp()
    }

    /// Derivative `d psi / d u`.
    #[inline]
    pub fn dpsi(&self, u: f64) -> f64 {
        let w = self.u_max - 1.0;
        let s = (u - 1.0) / w;
        if s >= 1.0 || s < 0.0 {
            return 0.0;
        }
        let m = 1.0 - s * s;
        (1.0 - 1.0 / (m * m)).exp() * (-4.0 * s / (m * m * m)) / w
    }
}

/// The standard flat bump `exp(1 - 1/(1 - x^2))` on `(-1, 1)`, normalised to
/// one at the origin. Used for the geodesic-patch cutoffs.
#[inline]
fn flat_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - x * x)).exp()
}

#[inline]
fn flat_bump_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let m = 1.0 - x * x;
    (1.0 - 1.0 / m).exp() * (-2.0 * x / (m * m))
}

/// Cutoff along the geodesic coordinate of a patch bump: a flat bump scaled
/// to the support `(lo, hi)` and normalised so `int chi1(t) e^{-t} dt = 2`.
#[derive(Debug, Clone, Copy)]
struct Chi1 {
    mid: f64,
    half: f64,
    norm: f64,
}

impl Chi1 {
    fn new(lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut c = Self {
            mid,
            half,
            norm: 1.0,
        };
        // 64-panel Gauss-Legendre of the weighted mass; smooth integrand.
        let mass = gauss_panels(lo, hi, 64, |t| c.value(t) * (-t).exp());
        c.norm = 2.0 / mass;
        c
    }

    #[inline]
    fn value(&self, t: f64) -> f64 {
        self.norm * flat_bump((t - self.mid) / self.half)
    }

    #[inline]
    fn deriv(&self, t: f64) -> f64 {
        self.norm * flat_bump_deriv((t - self.mid) / self.half) / self.half
    }
}

/// Cutoff along the horocycle coordinate: `chi2(tau) = B(tau/delta)(1+tau)`,
/// nonnegative on the support with `chi2'(0) = 1`.
#[derive(Debug, Clone, Copy)]
struct Chi2 {
    delta: f64,
}

impl Chi2 {
    #[inline]
    fn value(&self, tau: f64) -> f64 {
        flat_bump(tau / self.delta) * (1.0 + tau)
    }

    #[inline]
    fn deriv(&self, tau: f64) -> f64 {
        flat_bump_deriv(tau / self.delta) / self.delta * (1.0 + tau)
            + flat_bump(tau / self.delta)
    }
}

/// Fixed-order Gauss-Legendre on `[-1, 1]` (8 nodes), composited over panels.
const GL8_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Composite 8-node Gauss-Legendre over `panels` equal panels of `[a, b]`.
pub(crate) fn gauss_panels(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
            acc += w * f(mid + 0.5 * h * x);
        }
        total += acc * 0.5 * h;
    }
    total
}

#[derive(Debug, Clone)]
enum PotentialKind {
    /// Sum of radial bumps; each centre carries its list of orbit translates
    /// that can reach the closed fundamental domain.
    RadialBumps {
        amplitudes: Vec<f64>,
        profile: BumpProfile,
        orbit_centers: Vec<Vec<Complex64>>,
    },
    /// Bump in geodesic/horocycle coordinates through a reference frame,
    /// `V(w) = chi1(t) chi2(tau)` with `zeta = g0^{-1} w`, `t = ln(|zeta|^2 /
    /// Im zeta)`, `tau = Re zeta / Im zeta`.
    GeodesicPatch {
        frame_inv: MoebiusMap,
        frame: MoebiusMap,
        chi1: Chi1,
        chi2: Chi2,
        gammas: Vec<MoebiusMap>,
    },
}

/// A Gamma-invariant smooth potential on the surface.
#[derive(Debug, Clone)]
pub struct Potential {
    surface: Arc<FuchsianSurface>,
    kind: PotentialKind,
    sup_bound: f64,
}

impl Potential {
    /// Builds a sum of radial bumps with the given half-plane centres.
    pub fn radial_bumps(
        surface: Arc<FuchsianSurface>,
        centers: Vec<Complex64>,
        amplitudes: Vec<f64>,
        r_max: f64,
    ) -> Result<Self> {
        if centers.len() != amplitudes.len() || centers.is_empty() {
            return Err(Error::Config(
                "need matching nonempty centre and amplitude lists".into(),
            ));
        }
        if r_max >= surface.injectivity_radius {
            return Err(Error::Config(format!(
                "bump radius {r_max} must stay below the injectivity radius {}",
                surface.injectivity_radius
            )));
        }
        let profile = BumpProfile::new(r_max)?;
        let reach = surface.circumradius + r_max + 0.1;
        let mut orbit_centers = Vec::with_capacity(centers.len());
        for c in &centers {
            if !surface.in_domain(*c, 1e-6)? {
                return Err(Error::Config(format!(
                    "bump centre {c} is not in the fundamental domain"
                )));
            }
            let d_c = hyperbolic_distance(*c, surface.center)?;
            let ball = surface.translate_ball_internal(reach + d_c)?;
            let mut orbit = Vec::new();
            for g in &ball {
                let w = g.apply_point(*c);
                if hyperbolic_distance(w, surface.center)? <= reach {
                    orbit.push(w);
                }
            }
            orbit_centers.push(orbit);
        }
        let sup_bound = amplitudes.iter().map(|a| a.abs()).sum();
        Ok(Self {
            surface,
            kind: PotentialKind::RadialBumps {
                amplitudes,
                profile,
                orbit_centers,
            },
            sup_bound,
        })
    }

    pub fn surface(&self) -> &Arc<FuchsianSurface> {
        &self.surface
    }

    /// Upper bound on `sup |V|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Value of the potential; the argument may be anywhere in the plane.
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let probe = CotangentState::new(z, Complex64::new(0.0, 1.0 / z.im))?;
        let red = self.surface.reduce_to_domain(&probe)?;
        Ok(self.eval_at_reduced(red.state.z))
    }

    /// Coordinate differential `(dV/dx, dV/dy)` at `z`, computed analytically
    /// at the reduced point and pulled back through the reducing word.
    pub fn grad(&self, z: Complex64) -> Result<(f64, f64)> {
        let probe = CotangentState::new(z, Complex64::new(0.0, 1.0 / z.im))?;
        let red = self.surface.reduce_to_domain(&probe)?;
        let (gx, gy) = self.grad_at_reduced(red.state.z);
        if red.word.is_empty() {
            return Ok((gx, gy));
        }
        let m = red.reducing_map(&self.surface);
        let back = apply_moebius(
            &m.inverse(),
            &CotangentState {
                z: red.state.z,
                xi: Complex64::new(gx, gy),
            },
        );
        Ok((back.xi.re, back.xi.im))
    }

    /// Value at a point already reduced into the closed fundamental domain.
    pub(crate) fn eval_at_reduced(&self, z: Complex64) -> f64 {
        match &self.kind {
            PotentialKind::RadialBumps {
                amplitudes,
                profile,
                orbit_centers,
            } => {
                let mut v = 0.0;
                for (amp, orbit) in amplitudes.iter().zip(orbit_centers) {
                    for w in orbit {
                        let u = cosh_distance(z, *w);
                        if u < profile.u_max {
                            v += amp * profile.psi(u);
                        }
                    }
                }
                v
            }
            PotentialKind::GeodesicPatch {
                frame_inv,
                chi1,
                chi2,
                gammas,
                ..
            } => {
                let mut v = 0.0;
                for g in gammas {
                    let zeta = frame_inv.apply_point(g.apply_point(z));
                    if let Some((t, tau)) = patch_coords(zeta, chi1, chi2) {
                        v += chi1.value(t) * chi2.value(tau);
                    }
                }
                v
            }
        }
    }

    /// Analytic differential at a reduced point.
    pub(crate) fn grad_at_reduced(&self, z: Complex64) -> (f64, f64) {
        match &self.kind {
            PotentialKind::RadialBumps {
                amplitudes,
                profile,
                orbit_centers,
            } => {
                let (x, y) = (z.re, z.im);
                let mut gx = 0.0;
                let mut gy = 0.0;
                for (amp, orbit) in amplitudes.iter().zip(orbit_centers) {
                    for w in orbit {
                        let u = cosh_distance(z, *w);
                        if u < profile.u_max {
                            let dp = amp * profile.dpsi(u);
                            let (cx, cy) = (w.re, w.im);
                            // d/dx cosh d and d/dy cosh d in closed form.
                            gx += dp * (x - cx) / (y * cy);
                            gy += dp * ((y - cy) / (y * cy) - (u - 1.0) / y);
                        }
                    }
                }
                (gx, gy)
            }
            PotentialKind::GeodesicPatch {
                frame_inv,
                frame,
                chi1,
                chi2,
                gammas,
            } => {
                let mut total = Complex64::new(0.0, 0.0);
                for g in gammas {
                    let w = g.apply_point(z);
                    let zeta = frame_inv.apply_point(w);
                    let Some((t, tau)) = patch_coords(zeta, chi1, chi2) else {
                        continue;
                    };
                    let (p, q) = (zeta.re, zeta.im);
                    let r2 = p * p + q * q;
                    let c1 = chi1.value(t);
                    let dc1 = chi1.deriv(t);
                    let c2 = chi2.value(tau);
                    let dc2 = chi2.deriv(tau);
                    // t = ln(r^2 / q), tau = p / q.
                    let df_p = dc1 * c2 * (2.0 * p / r2) + c1 * dc2 / q;
                    let df_q = dc1 * c2 * (2.0 * q / r2 - 1.0 / q) - c1 * dc2 * p / (q * q);
                    // Transport the differential from the zeta chart to w,
                    // then pull back through g to the z chart.
                    let at_w = apply_moebius(
                        frame,
                        &CotangentState {
                            z: zeta,
                            xi: Complex64::new(df_p, df_q),
                        },
                    );
                    let at_z = apply_moebius(&g.inverse(), &at_w);
                    total += at_z.xi;
                }
                (total.re, total.im)
            }
        }
    }

    /// Pairing `g*(dV, xi)` at a state: `(Im z)^2 (V_x xi_x + V_y xi_y)`.
    pub fn covector_pairing(&self, s: &CotangentState) -> Result<f64> {
        let (gx, gy) = self.grad(s.z)?;
        Ok(s.z.im * s.z.im * (gx * s.xi.re + gy * s.xi.im))
    }
}

/// Patch coordinates of a point in the reference chart, if inside the
/// support rectangle.
#[inline]
fn patch_coords(zeta: Complex64, chi1: &Chi1, chi2: &Chi2) -> Option<(f64, f64)> {
    let q = zeta.im;
    if q <= 0.0 {
        return None;
    }
    let tau = zeta.re / q;
    if tau.abs() >= chi2.delta {
        return None;
    }
    let t = (zeta.norm_sqr() / q).ln();
    if (t - chi1.mid).abs() >= chi1.half {
        return None;
    }
    Some((t, tau))
}

/// The family of potentials `V(eps, x) = sum eps_j V_j(x)`.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    potentials: Vec<Potential>,
}

impl PerturbationFamily {
    pub fn new(potentials: Vec<Potential>) -> Result<Self> {
        if potentials.is_empty() {
            return Err(Error::Config("a family needs at least one potential".into()));
        }
        let s0 = Arc::as_ptr(potentials[0].surface());
        if potentials.iter().any(|p| Arc::as_ptr(p.surface()) != s0) {
            return Err(Error::Config(
                "all potentials in a family must share one surface".into(),
            ));
        }
        Ok(Self { potentials })
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    pub fn potentials(&self) -> &[Potential] {
        &self.potentials
    }

    pub fn surface(&self) -> &Arc<FuchsianSurface> {
        self.potentials[0].surface()
    }

    /// `V(eps, z)` at a reduced point.
    pub(crate) fn eval_at_reduced(&self, z: Complex64, eps: &[f64]) -> f64 {
        self.potentials
            .iter()
            .zip(eps)
            .map(|(p, e)| e * p.eval_at_reduced(z))
            .sum()
    }

    /// Differential of `V(eps, .)` at a reduced point.
    pub(crate) fn grad_at_reduced(&self, z: Complex64, eps: &[f64]) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (p, e) in self.potentials.iter().zip(eps) {
            let (px, py) = p.grad_at_reduced(z);
            gx += e * px;
            gy += e * py;
        }
        (gx, gy)
    }

    /// `V(eps, z)` anywhere in the plane.
    pub fn eval(&self, z: Complex64, eps: &[f64]) -> Result<f64> {
        let probe = CotangentState::new(z, Complex64::new(0.0, 1.0 / z.im))?;
        let red = self.surface().reduce_to_domain(&probe)?;
        Ok(self.eval_at_reduced(red.state.z, eps))
    }

    /// Upper bound on `sup |V(eps, .)|`.
    pub fn sup_v_bound(&self, eps: &[f64]) -> f64 {
        self.potentials
            .iter()
            .zip(eps)
            .map(|(p, e)| e.abs() * p.sup_bound())
            .sum()
    }
}

/// One potential in a family specification: its bump centres in disk-model
/// coordinates with one amplitude per centre.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PotentialSpec {
    pub centers_disk: Vec<(f64, f64)>,
    pub amplitudes: Vec<f64>,
}

/// Specification of a potential family.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FamilySpec {
    pub potentials: Vec<PotentialSpec>,
    pub r_max: f64,
}

impl Default for FamilySpec {
    /// Four potentials of three wide bumps each, with unequal amplitudes.
    ///
    /// The layout matters. The twelve overlapping supports cover the surface
    /// several times over, so every unit geodesic carries sizable gradients
    /// of more than one potential from time zero: families of narrow or
    /// sparse bumps leave corridors along which every admissibility
    /// functional collapses. Four potentials (rather than three) keep the
    /// common-zero locus of the functionals empty: three zero hypersurfaces
    /// in the three-dimensional unit bundle generically meet in points, and
    /// measured three-potential floors stall near 1e-3 however the bumps are
    /// placed. The coordinates below come from a seeded placement search
    /// maximising the certified floor of min over states of max_j |L_j|
    /// subject to the integrator energy-drift budget; the certificate for
    /// this family is re-run, not assumed, by the functionals module.
    fn default() -> Self {
        FamilySpec {
            potentials: vec![
                PotentialSpec {
                    centers_disk: vec![
                        (0.5612142704261804, -0.04407231257506763),
                        (-0.5393243946927305, 0.04597375961623848),
                        (0.11056149432089767, 0.17514124278207113),
                    ],
                    amplitudes: vec![1.573387031263972, 1.3381139381176632, 1.4106184527378076],
                },
                PotentialSpec {
                    centers_disk: vec![
                        (0.37866084942018496, 0.45859458435951767),
                        (-0.4002968594962602, -0.3420320124252342),
                        (-0.17067984832530947, 0.17667711015549248),
                    ],
                    amplitudes: vec![1.4381341149930618, 1.215223162506146, 1.4179299409893176],
                },
                PotentialSpec {
                    centers_disk: vec![
                        (-0.1036266030993995, 0.6199342334695367),
                        (-0.08038199856394387, -0.4848124224408482),
                        (-0.2377956168599404, 0.016956286913026655),
                    ],
                    amplitudes: vec![
                        -1.5373117672110932,
                        -1.2397817360011176,
                        -1.3455992779136359,
                    ],
                },
                PotentialSpec {
                    centers_disk: vec![
                        (-0.39373714592895653, 0.38550171420893664),
                        (0.47847169016463814, -0.35329937099955916),
                        (0.0421162968808307, -0.29672367532758787),
                    ],
                    amplitudes: vec![
                        -1.5166038438563234,
                        -1.3029226893345411,
                        -1.1413522131455374,
                    ],
                },
            ],
            r_max: 1.2847074168388726,
        }
    }
}

/// Builds the perturbation family `(V_j)` from a specification; admissibility
/// is certified separately.
pub fn build_admissible_family(
    surface: &Arc<FuchsianSurface>,
    spec: &FamilySpec,
) -> Result<PerturbationFamily> {
    if spec.potentials.is_empty() {
        return Err(Error::Config(
            "family specification lists no potentials".into(),
        ));
    }
    let mut potentials = Vec::with_capacity(spec.potentials.len());
    for p in &spec.potentials {
        let centers = p
            .centers_disk
            .iter()
            .map(|&(x, y)| disk_to_halfplane(Complex64::new(x, y)))
            .collect::<Result<Vec<_>>>()?;
        potentials.push(Potential::radial_bumps(
            Arc::clone(surface),
            centers,
            p.amplitudes.clone(),
            spec.r_max,
        )?);
    }
    PerturbationFamily::new(potentials)
}

/// Builds a potential supported on the geodesic/horocycle coordinate patch
/// through `rho0`, cut off by `chi1` along the geodesic (support in `(0, 1)`,
/// normalised so that `int chi1 e^{-t} dt = 2`) and by `chi2` across it
/// (`chi2'(0) = 1`). The admissibility functional of the result at `rho0` is
/// then one up to exponentially small translate contributions.
pub fn build_bump_along_geodesic(
    surface: &Arc<FuchsianSurface>,
    rho0: &CotangentState,
) -> Result<Potential> {
    let red = surface.reduce_to_domain(rho0)?;
    let frame = UnitTangentFrame::from_state(&red.state)?;
    let chi1 = Chi1::new(0.05, 0.95);
    let chi2 = Chi2 { delta: 0.1 };

    // Embeddedness: the patch must fit inside an embedded ball.
    let base = red.state.z;
    let mut patch_radius = 0.0_f64;
    for i in 0..=6 {
        let t = -0.5 + 1.5 * i as f64 / 6.0;
        for j in 0..=4 {
            let tau = chi2.delta * (-1.0 + 0.5 * j as f64);
            let w = frame
                .geodesic_flow(t)
                .horocycle_flow(tau, HorocycleBranch::Unstable)
                .to_state()
                .z;
            patch_radius = patch_radius.max(hyperbolic_distance(w, base)?);
        }
    }
    let systole = 2.0 * surface.injectivity_radius;
    if 2.0 * patch_radius >= systole - 0.05 {
        return Err(Error::Config(format!(
            "geodesic patch of radius {patch_radius} is not embedded \
             (systole {systole})"
        )));
    }

    let d_base = hyperbolic_distance(base, surface.center)?;
    let reach = surface.circumradius + patch_radius + d_base + 0.1;
    let ball = surface.translate_ball_internal(reach)?;
    let mut gammas = Vec::new();
    for g in &ball {
        let pnt = g.inverse().apply_point(base);
        if hyperbolic_distance(pnt, surface.center)? <= surface.circumradius + patch_radius + 0.05
        {
            gammas.push(*g);
        }
    }

    let sup_bound = chi1.norm * (1.0 + chi2.delta);
    Ok(Potential {
        surface: Arc::clone(surface),
        kind: PotentialKind::GeodesicPatch {
            frame_inv: frame.g.inverse(),
            frame: frame.g,
            chi1,
            chi2,
            gammas,
        },
        sup_bound,
    })
}

/// Trigonometric polynomial in the covector chart angle, order at most four.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FiberPoly {
    pub constant: f64,
    /// `(cos k theta, sin k theta)` coefficients for `k = 1..=len`.
    pub coeffs: Vec<(f64, f64)>,
}

impl FiberPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            coeffs: Vec::new(),
        }
    }

    #[inline]
    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.constant;
        for (k, (a, b)) in self.coeffs.iter().enumerate() {
            let kt = (k + 1) as f64 * theta;
            v += a * kt.cos() + b * kt.sin();
        }
        v
    }
}

/// One term of an observable: radial bump times a fiber polynomial, given on
/// the plane and periodised over the group.
#[derive(Debug, Clone)]
struct ObservableTerm {
    center: Complex64,
    amplitude: f64,
    profile: BumpProfile,
    fiber: FiberPoly,
    gammas: Vec<MoebiusMap>,
}

/// A Gamma-invariant observable on the unit cotangent bundle: a constant
/// offset plus periodised bump-times-fiber terms. Evaluation on arbitrary
/// covectors goes through the 0-homogeneous extension.
#[derive(Debug, Clone)]
pub struct Observable {
    surface: Arc<FuchsianSurface>,
    offset: f64,
    terms: Vec<ObservableTerm>,
}

/// Specification of one observable term (disk-model centre).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ObservableTermSpec {
    pub center_disk: (f64, f64),
    pub amplitude: f64,
    pub r_max: f64,
    pub fiber: FiberPoly,
}

/// Specification of an observable.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ObservableSpec {
    pub offset: f64,
    pub terms: Vec<ObservableTermSpec>,
}

impl ObservableSpec {
    /// The default experiment observable: one off-centre bump with a mixed
    /// fiber polynomial; nonzero Liouville average.
    pub fn default_bump() -> Self {
        ObservableSpec {
            offset: 0.0,
            terms: vec![ObservableTermSpec {
                center_disk: (0.25, 0.15),
                amplitude: 1.0,
                r_max: 0.7,
                fiber: FiberPoly {
                    constant: 1.0,
                    coeffs: vec![(0.7, 0.0), (0.0, 0.4)],
                },
            }],
        }
    }

    /// The odd-fiber observable `psi(x) cos(theta)`, whose Liouville average
    /// vanishes by symmetry.
    pub fn odd_fiber() -> Self {
        ObservableSpec {
            offset: 0.0,
            terms: vec![ObservableTermSpec {
                center_disk: (0.1, 0.05),
                amplitude: 1.0,
                r_max: 0.7,
                fiber: FiberPoly {
                    constant: 0.0,
                    coeffs: vec![(1.0, 0.0)],
                },
            }],
        }
    }
}

impl Observable {
    pub fn from_spec(surface: &Arc<FuchsianSurface>, spec: &ObservableSpec) -> Result<Self> {
        let mut terms = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            if t.fiber.coeffs.len() > 4 {
                return Err(Error::Config(format!(
                    "fiber order {} exceeds the supported maximum 4",
                    t.fiber.coeffs.len()
                )));
            }
            if t.r_max >= surface.injectivity_radius {
                return Err(Error::Config(
                    "observable bump radius must stay below the injectivity radius".into(),
                ));
            }
            let center = disk_to_halfplane(Complex64::new(t.center_disk.0, t.center_disk.1))?;
            let d_c = hyperbolic_distance(center, surface.center)?;
            let reach = surface.circumradius + t.r_max + 0.1;
            let ball = surface.translate_ball_internal(reach + d_c)?;
            let mut gammas = Vec::new();
            for g in &ball {
                // Keep g when the bump pulled back by g meets the domain.
                let pulled = g.inverse().apply_point(center);
                if hyperbolic_distance(pulled, surface.center)? <= reach {
                    gammas.push(*g);
                }
            }
            terms.push(ObservableTerm {
                center,
                amplitude: t.amplitude,
                profile: BumpProfile::new(t.r_max)?,
                fiber: t.fiber.clone(),
                gammas,
            });
        }
        Ok(Self {
            surface: Arc::clone(surface),
            offset: spec.offset,
            terms,
        })
    }

    pub fn constant(surface: &Arc<FuchsianSurface>, c: f64) -> Self {
        Self {
            surface: Arc::clone(surface),
            offset: c,
            terms: Vec::new(),
        }
    }

    pub fn surface(&self) -> &Arc<FuchsianSurface> {
        &self.surface
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Evaluates the observable at a unit-covector state anywhere in the
    /// plane.
    pub fn eval_unit(&self, s: &CotangentState) -> Result<f64> {
        if self.terms.is_empty() {
            return Ok(self.offset);
        }
        let red = self.surface.reduce_to_domain(s)?;
        Ok(self.eval_unit_reduced(&red.state))
    }

    /// Evaluation at an already reduced unit state.
    pub(crate) fn eval_unit_reduced(&self, s: &CotangentState) -> f64 {
        let mut v = self.offset;
        for term in &self.terms {
            for g in &term.gammas {
                let z = g.apply_point(s.z);
                let u = cosh_distance(z, term.center);
                if u < term.profile.u_max() {
                    let moved = apply_moebius(g, s);
                    v += term.amplitude
                        * term.profile.psi(u)
                        * term.fiber.eval(moved.covector_angle());
                }
            }
        }
        v
    }

    /// The 0-homogeneous extension `a(x, xi/||xi||)`, defined for any nonzero
    /// covector.
    pub fn eval_homogeneous(&self, s: &CotangentState) -> Result<f64> {
        if self.terms.is_empty() {
            return Ok(self.offset);
        }
        let unit = s.with_covector_norm(1.0)?;
        self.eval_unit(&unit)
    }

    /// Analytic Liouville average: the fiber polynomial integrates to its
    /// constant term and the radial mass unfolds to a 1D integral, so
    /// `int a dL = offset + sum amp * fiber_const * 2 pi int psi du / area`.
    pub fn liouville_average_closed_form(&self) -> f64 {
        let mut v = self.offset;
        for term in &self.terms {
            let mass = gauss_panels(1.0, term.profile.u_max(), 32, |u| term.profile.psi(u));
            v += term.amplitude * term.fiber.constant * 2.0 * std::f64::consts::PI * mass
                / self.surface.area;
        }
        v
    }

    /// Sampled oscillation `sup a - inf a` over a deterministic grid of the
    /// unit bundle.
    pub fn oscillation(&self) -> Result<f64> {
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let disk_r = ((self.surface.circumradius / 2.0).tanh()).min(0.999);
        let n_r = 24;
        let n_a = 24;
        let n_th = 32;
        for ir in 0..=n_r {
            for ia in 0..n_a {
                let r = disk_r * ir as f64 / n_r as f64;
                let ang = 2.0 * std::f64::consts::PI * ia as f64 / n_a as f64;
                let z = disk_to_halfplane(Complex64::from_polar(r, ang))?;
                if !self.surface.in_domain(z, 1e-9)? {
                    continue;
                }
                for it in 0..n_th {
                    let th = 2.0 * std::f64::consts::PI * it as f64 / n_th as f64;
                    let s = CotangentState::new(z, Complex64::from_polar(1.0 / z.im, th))?;
                    let v = self.eval_unit_reduced(&s);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        Ok(hi - lo)
    }
}
