//! Exact geometry of the hyperbolic plane in the upper half-plane model.
//!
//! Everything in this module is closed-form: Möbius actions of the projective
//! special linear group, covector transport, hyperbolic distance, and the
//! exact geodesic and horocycle flows on the unit cotangent bundle written in
//! group coordinates.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * Points live in `{z : Im z > 0}` with metric `(dx^2 + dy^2)/y^2`; the
//!   covector norm is `||xi|| = Im(z) * |xi|` when `xi` is read as the complex
//!   number `xi_x + i xi_y`.
//! * A [`UnitTangentFrame`] is a group element `g`; its state has base point
//!   `g(i)` and covector obtained by pushing the upward unit covector at `i`.
//! * The geodesic flow is right multiplication by `diag(e^{t/2}, e^{-t/2})`.
//! * The unstable horocycle flow is right multiplication by the lower
//!   unipotent `[[1,0],[s,1]]`, the stable one by the upper unipotent
//!   `[[1,s],[0,1]]`. With these choices the intertwining
//!   `G^t(H_u^s(f)) = H_u^{s e^t}(G^t(f))` holds exactly, forward separation
//!   along the unstable branch grows like `e^t`, and the parametrisation speed
//!   agrees with the unstable/stable vector fields `(I -+ J)W`.
//! * `rotate_covector_perp` maps `xi -> -i xi`; with this orientation the
//!   perpendicular direction points along the unstable horocycle, which is
//!   what [`orientation_self_test`] verifies at startup.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Determinant drift tolerated before a product is renormalised again.
pub const DET_TOL: f64 = 1e-12;

/// A real 2x2 unit-determinant matrix acting projectively on the upper
/// half-plane. The map and its negation are identified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusMap {
    pub const IDENTITY: MoebiusMap = MoebiusMap {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds a map from entries, renormalising the determinant to one.
    ///
    /// Fails if the determinant is not positive (the entries would not define
    /// an orientation-preserving isometry).
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::Domain(format!(
                "Moebius entries must have positive determinant, got {det}"
            )));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `diag(e^{t/2}, e^{-t/2})`: the geodesic one-parameter subgroup.
    pub fn geodesic_generator(t: f64) -> Self {
        let e = (0.5 * t).exp();
        Self {
            a: e,
            b: 0.0,
            c: 0.0,
            d: 1.0 / e,
        }
    }

    /// Lower unipotent `[[1,0],[s,1]]`: the unstable horocycle subgroup.
    pub fn unstable_generator(s: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: s,
            d: 1.0,
        }
    }

    /// Upper unipotent `[[1,s],[0,1]]`: the stable horocycle subgroup.
    pub fn stable_generator(s: f64) -> Self {
        Self {
            a: 1.0,
            b: s,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Matrix product, renormalised so `|det - 1| <= DET_TOL` afterwards.
    /// `(m1 * m2)(z) = m1(m2(z))`.
    pub fn compose(&self, rhs: &MoebiusMap) -> Self {
        let a = self.a * rhs.a + self.b * rhs.c;
        let b = self.a * rhs.b + self.b * rhs.d;
        let c = self.c * rhs.a + self.d * rhs.c;
        let d = self.c * rhs.b + self.d * rhs.d;
        let det = a * d - b * c;
        if (det - 1.0).abs() > DET_TOL {
            let s = det.sqrt();
            Self {
                a: a / s,
                b: b / s,
                c: c / s,
                d: d / s,
            }
        } else {
            Self { a, b, c, d }
        }
    }

    /// Applies the map to a point of the upper half-plane.
    ///
    /// The imaginary part is computed through `y / |cz + d|^2`, which stays
    /// positive and accurate even when the image is very close to the real
    /// axis.
    pub fn apply_point(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let u = self.c * x + self.d;
        let v = self.c * y;
        let den = u * u + v * v;
        let re = ((self.a * x + self.b) * u + self.a * self.c * y * y) / den;
        let im = y / den;
        Complex64::new(re, im)
    }

    /// `(cz + d)^2`, the reciprocal of the complex derivative at `z`.
    fn denom_sq(&self, z: Complex64) -> Complex64 {
        let w = Complex64::new(self.c, 0.0) * z + Complex64::new(self.d, 0.0);
        w * w
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }

    /// Relative distance between two maps modulo global sign.
    pub fn dist_up_to_sign(&self, other: &MoebiusMap) -> f64 {
        let plus = (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs());
        let minus = (self.a + other.a)
            .abs()
            .max((self.b + other.b).abs())
            .max((self.c + other.c).abs())
            .max((self.d + other.d).abs());
        plus.min(minus) / 1.0_f64.max(self.max_abs()).max(other.max_abs())
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.dist_up_to_sign(&Self::IDENTITY) <= tol
    }
}

impl std::ops::Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

/// A point-with-covector on the cotangent bundle of the half-plane.
///
/// `xi` packs the chart components as `xi_x + i xi_y`; the cotangent norm is
/// `Im(z) * |xi|` and the kinetic energy `p_0 = ||xi||^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotangentState {
    pub z: Complex64,
    pub xi: Complex64,
}

impl CotangentState {
    pub fn new(z: Complex64, xi: Complex64) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!(
                "cotangent state requires Im z > 0, got {}",
                z.im
            )));
        }
        if !z.is_finite() || !xi.is_finite() {
            return Err(Error::Domain("non-finite state components".into()));
        }
        Ok(Self { z, xi })
    }

    /// `||xi|| = Im(z) |xi|`.
    pub fn covector_norm(&self) -> f64 {
        self.z.im * self.xi.norm()
    }

    /// Kinetic energy `p_0 = ||xi||^2 / 2`.
    pub fn kinetic_energy(&self) -> f64 {
        let n = self.covector_norm();
        0.5 * n * n
    }

    /// Rescales the covector to the requested cotangent norm.
    pub fn with_covector_norm(&self, norm: f64) -> Result<Self> {
        let n = self.covector_norm();
        if n == 0.0 {
            return Err(Error::Domain(
                "cannot rescale a zero covector to a nonzero norm".into(),
            ));
        }
        Ok(Self {
            z: self.z,
            xi: self.xi * (norm / n),
        })
    }

    /// Chart angle of the covector, in `(-pi, pi]`.
    pub fn covector_angle(&self) -> f64 {
        self.xi.im.atan2(self.xi.re)
    }
}

/// `cosh` of the hyperbolic distance, `1 + |z1-z2|^2 / (2 Im z1 Im z2)`.
/// Monotone in the distance and free of inverse hyperbolics; the preferred
/// quantity for comparisons and for radial profiles.
#[inline]
pub fn cosh_distance(z1: Complex64, z2: Complex64) -> f64 {
    let dz = z1 - z2;
    1.0 + dz.norm_sqr() / (2.0 * z1.im * z2.im)
}

/// Hyperbolic distance `arccosh(1 + |z1-z2|^2 / (2 Im z1 Im z2))`.
pub fn hyperbolic_distance(z1: Complex64, z2: Complex64) -> Result<f64> {
    if !(z1.im > 0.0) || !(z2.im > 0.0) {
        return Err(Error::Domain(
            "hyperbolic distance requires both points in the upper half-plane".into(),
        ));
    }
    let dz = z1 - z2;
    let arg = 1.0 + dz.norm_sqr() / (2.0 * z1.im * z2.im);
    // Round-off can push the argument a hair below 1 for coincident points.
    Ok(arg.max(1.0).acosh())
}

/// Isometry action on a cotangent state: `z' = m(z)` and
/// `xi' = xi * conj((cz+d)^2)`, which preserves `Im(z)|xi|` exactly.
pub fn apply_moebius(m: &MoebiusMap, s: &CotangentState) -> CotangentState {
    let z = m.apply_point(s.z);
    let xi = s.xi * m.denom_sq(s.z).conj();
    CotangentState { z, xi }
}

/// Quarter-turn of the covector: `xi -> -i xi`.
///
/// The orientation is the one for which `xi_perp` points along the unstable
/// horocycle direction; applying it twice negates the covector exactly.
pub fn rotate_covector_perp(s: &CotangentState) -> Result<CotangentState> {
    if s.xi.norm_sqr() == 0.0 {
        return Err(Error::Domain("cannot rotate a zero covector".into()));
    }
    Ok(CotangentState {
        z: s.z,
        xi: s.xi * Complex64::new(0.0, -1.0),
    })
}

/// Which horocycle foliation a flow step follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorocycleBranch {
    Unstable,
    Stable,
}

/// A unit-covector state written as a group element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangentFrame {
    pub g: MoebiusMap,
}

impl UnitTangentFrame {
    pub const IDENTITY: UnitTangentFrame = UnitTangentFrame {
        g: MoebiusMap::IDENTITY,
    };

    /// Exact geodesic flow: `f * diag(e^{t/2}, e^{-t/2})`.
    pub fn geodesic_flow(&self, t: f64) -> Self {
        Self {
            g: self.g.compose(&MoebiusMap::geodesic_generator(t)),
        }
    }

    /// Exact horocycle flow along the requested branch.
    pub fn horocycle_flow(&self, s: f64, branch: HorocycleBranch) -> Self {
        let n = match branch {
            HorocycleBranch::Unstable => MoebiusMap::unstable_generator(s),
            HorocycleBranch::Stable => MoebiusMap::stable_generator(s),
        };
        Self {
            g: self.g.compose(&n),
        }
    }

    /// Converts the frame to its cotangent state. The covector always has
    /// unit norm by construction.
    pub fn to_state(&self) -> CotangentState {
        let i = Complex64::new(0.0, 1.0);
        let base = CotangentState { z: i, xi: i };
        apply_moebius(&self.g, &base)
    }

    /// Reconstructs the frame from a unit-norm cotangent state.
    ///
    /// The result is unique up to the global matrix sign. Inputs whose
    /// covector norm deviates from one by more than `1e-9` are rejected.
    pub fn from_state(s: &CotangentState) -> Result<Self> {
        let n = s.covector_norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "state_to_frame requires a unit covector, got norm {n}"
            )));
        }
        if !(s.z.im > 0.0) {
            return Err(Error::Domain("state_to_frame requires Im z > 0".into()));
        }
        let (x, y) = (s.z.re, s.z.im);
        let sy = y.sqrt();
        // Translate i -> z, then rotate about i; the chart covector angle
        // advances by twice the rotation parameter.
        let translate = MoebiusMap {
            a: sy,
            b: x / sy,
            c: 0.0,
            d: 1.0 / sy,
        };
        let phi = 0.5 * (s.covector_angle() - std::f64::consts::FRAC_PI_2);
        let (sp, cp) = phi.sin_cos();
        let rotate = MoebiusMap {
            a: cp,
            b: sp,
            c: -sp,
            d: cp,
        };
        Ok(Self {
            g: translate.compose(&rotate),
        })
    }

    pub fn dist_up_to_sign(&self, other: &UnitTangentFrame) -> f64 {
        self.g.dist_up_to_sign(&other.g)
    }
}

/// Constant-curvature constants: Riccati solutions and expansion rates for
/// curvature -1.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureConstants {
    pub u_u: f64,
    pub u_s: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    pub gamma_c: f64,
}

impl Default for CurvatureConstants {
    fn default() -> Self {
        Self {
            u_u: 1.0,
            u_s: -1.0,
            u_plus: 1.0,
            u_minus: 1.0,
            gamma_c: 0.5,
        }
    }
}

/// Distance between nearby cotangent states, measured through the group.
///
/// The unit parts are compared as frames: with `m = f1^{-1} f2` (sign chosen
/// so the trace is nonnegative) and `A = m - I` decomposed over the
/// generators of the geodesic and the two horocycle flows, the Sasaki
/// quadratic form gives `alpha^2 + 2 beta^2 + 2 gamma^2` since the flow
/// direction has unit norm and the unstable/stable directions have norm
/// sqrt(2) and are mutually orthogonal. The covector-norm mismatch enters in
/// quadrature. First-order exact in the separation, which is the regime all
/// callers use it in.
pub fn unit_state_distance(s1: &CotangentState, s2: &CotangentState) -> Result<f64> {
    let n1 = s1.covector_norm();
    let n2 = s2.covector_norm();
    if n1 <= 0.0 || n2 <= 0.0 {
        return Err(Error::Domain(
            "state distance requires nonzero covectors".into(),
        ));
    }
    let u1 = CotangentState {
        z: s1.z,
        xi: s1.xi / n1,
    };
    let u2 = CotangentState {
        z: s2.z,
        xi: s2.xi / n2,
    };
    let f1 = UnitTangentFrame::from_state(&u1)?;
    let f2 = UnitTangentFrame::from_state(&u2)?;
    let mut m = f1.g.inverse().compose(&f2.g);
    if m.a + m.d < 0.0 {
        m = MoebiusMap {
            a: -m.a,
            b: -m.b,
            c: -m.c,
            d: -m.d,
        };
    }
    let alpha = m.a - m.d;
    let beta = m.c;
    let gamma = m.b;
    let dn = n1 - n2;
    Ok((alpha * alpha + 2.0 * beta * beta + 2.0 * gamma * gamma + dn * dn).sqrt())
}

/// Startup check of the orientation conventions.
///
/// Verifies that the branch labelled unstable separates forward in time at
/// rate `e^t`, that the stable branch contracts, and that the base velocity of
/// the unstable horocycle is the sharp of `rotate_covector_perp`'s output.
pub fn orientation_self_test() -> Result<()> {
    let f = UnitTangentFrame::IDENTITY;
    let sigma = 1e-3;
    let fu = f.horocycle_flow(sigma, HorocycleBranch::Unstable);

    // Measured expansion rate over t in [0, 5].
    let d0 = hyperbolic_distance(
        f.geodesic_flow(0.0).to_state().z,
        fu.geodesic_flow(0.0).to_state().z,
    )?;
    let d5 = hyperbolic_distance(
        f.geodesic_flow(5.0).to_state().z,
        fu.geodesic_flow(5.0).to_state().z,
    )?;
    let slope = (d5 / d0).ln() / 5.0;
    if (slope - 1.0).abs() > 0.05 {
        return Err(Error::Internal(format!(
            "unstable branch expansion rate {slope}, expected 1"
        )));
    }

    // Base velocity of the unstable horocycle vs the sharp of xi_perp.
    let h = 1e-6;
    let p0 = f.to_state();
    let p1 = f.horocycle_flow(h, HorocycleBranch::Unstable).to_state();
    let vel = (p1.z - p0.z) / h;
    let perp = rotate_covector_perp(&p0)?;
    let sharp = perp.xi * p0.z.im * p0.z.im;
    if (vel - sharp).norm() > 1e-4 {
        return Err(Error::Internal(format!(
            "xi_perp sharp {sharp} does not match unstable base velocity {vel}"
        )));
    }
    Ok(())
}
