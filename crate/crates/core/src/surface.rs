//! The compact quotient: Fuchsian group generators, the Dirichlet fundamental
//! domain, reduction of points and states into the domain, and enumeration of
//! group translates for periodisation.
//!
//! The built-in surface is the genus-2 Bolza surface, whose Dirichlet domain
//! at the centre is the regular hyperbolic octagon with vertex angle pi/4.
//! Flows and charts live in the upper half-plane; the disk model is used only
//! here, for the octagon construction and for configuration coordinates,
//! through the fixed Cayley map `z -> (z - i)/(z + i)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    apply_moebius, cosh_distance, hyperbolic_distance, CotangentState, MoebiusMap,
    UnitTangentFrame,
};

/// Hard cap on greedy reduction iterations.
const REDUCTION_ITER_CAP: usize = 10_000;

/// Tolerance for accepting boundary points of the Dirichlet domain.
pub const DIRICHLET_TOL: f64 = 1e-9;

/// Disk-model point mapped to the upper half-plane, `w -> i(1+w)/(1-w)`.
pub fn disk_to_halfplane(w: Complex64) -> Result<Complex64> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "disk-model coordinate must satisfy |w| < 1, got |w| = {}",
            w.norm()
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    Ok(i * (1.0 + w) / (1.0 - w))
}

/// Upper half-plane point mapped to the disk model, `z -> (z-i)/(z+i)`.
pub fn halfplane_to_disk(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (z - i) / (z + i)
}

/// One geodesic side of the Dirichlet octagon: the perpendicular bisector of
/// the segment from the centre to `generator * centre`.
#[derive(Debug, Clone, Copy)]
pub struct SideDescription {
    /// Index into `generators` of the pairing map for this side.
    pub generator: usize,
    /// Foot of the side: the point of the side closest to the centre.
    pub foot: Complex64,
    /// Direction angle of the foot as seen from the centre, in the disk model.
    pub direction_angle: f64,
}

/// A point reduced into the closed fundamental domain together with the word
/// of generator indices that was applied to get there.
#[derive(Debug, Clone)]
pub struct ReducedPoint {
    pub state: CotangentState,
    /// Generator indices in application order: the reduction computed
    /// `g[w_k] * ... * g[w_1] * input`.
    pub word: Vec<usize>,
}

impl ReducedPoint {
    /// The group element carrying the input to the reduced state.
    pub fn reducing_map(&self, surface: &FuchsianSurface) -> MoebiusMap {
        let mut m = MoebiusMap::IDENTITY;
        for &i in &self.word {
            m = surface.generators[i].compose(&m);
        }
        m
    }
}

/// Generators, Dirichlet domain data and geometric constants of the compact
/// quotient. Built once, immutable, freely shareable.
#[derive(Debug, Clone)]
pub struct FuchsianSurface {
    /// Side-pairing maps: the `2g` canonical generators followed by their
    /// inverses; `generators[k]` and `generators[(k + 2g) % 4g]` are inverse.
    pub generators: Vec<MoebiusMap>,
    /// Centre of the Dirichlet domain in the half-plane (the image of the
    /// disk origin).
    pub center: Complex64,
    pub sides: Vec<SideDescription>,
    pub injectivity_radius: f64,
    pub area: f64,
    /// Circumradius of the Dirichlet domain.
    pub circumradius: f64,
    /// Cap on `translate_ball` radii.
    pub ball_radius_cap: f64,
    /// Cached translates `g_k * center`, one per signed generator.
    neighbor_centers: Vec<Complex64>,
    /// Elements used when comparing states on the quotient; large enough to
    /// relate any two reduced representatives of one point, including across
    /// domain vertices.
    comparison_ball: Vec<MoebiusMap>,
}

impl FuchsianSurface {
    /// Number of canonical generators (half of `generators.len()`).
    pub fn genus_generators(&self) -> usize {
        self.generators.len() / 2
    }

    pub fn inverse_index(&self, k: usize) -> usize {
        (k + self.genus_generators()) % self.generators.len()
    }

    /// Checks the Dirichlet inequalities `d(z, c) <= d(z, g c) + tol`.
    pub fn in_domain(&self, z: Complex64, tol: f64) -> Result<bool> {
        let d0 = hyperbolic_distance(z, self.center)?;
        for t in &self.neighbor_centers {
            if d0 > hyperbolic_distance(z, *t)? + tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Greedy reduction word for a bare point: while some signed generator
    /// strictly decreases the distance to the centre, apply the best one
    /// (lowest index on ties). Comparisons are done on `cosh d`, which is
    /// monotone in `d` and avoids `acosh` in the integrator hot path.
    pub fn reduction_word(&self, z: Complex64) -> Result<Vec<usize>> {
        if !(z.im > 0.0) {
            return Err(Error::Domain("reduction requires Im z > 0".into()));
        }
        let mut current = z;
        let mut word = Vec::new();
        let mut q0 = cosh_distance(current, self.center);
        for _ in 0..REDUCTION_ITER_CAP {
            let mut best: Option<(usize, f64)> = None;
            for (k, g) in self.generators.iter().enumerate() {
                let q = cosh_distance(g.apply_point(current), self.center);
                if q < q0 * (1.0 - 1e-14) && best.map_or(true, |(_, bq)| q < bq * (1.0 - 1e-14)) {
                    best = Some((k, q));
                }
            }
            match best {
                None => return Ok(word),
                Some((k, q)) => {
                    current = self.generators[k].apply_point(current);
                    word.push(k);
                    q0 = q;
                }
            }
        }
        Err(Error::Internal(format!(
            "reduction did not terminate within {REDUCTION_ITER_CAP} iterations; \
             started from {:.6}+{:.6}i, reached cosh-distance {q0:.6}",
            z.re, z.im
        )))
    }

    /// Greedy reduction into the fundamental domain, transporting the
    /// covector along the reducing word.
    pub fn reduce_to_domain(&self, s: &CotangentState) -> Result<ReducedPoint> {
        let word = self.reduction_word(s.z)?;
        if word.is_empty() {
            return Ok(ReducedPoint { state: *s, word });
        }
        let mut m = MoebiusMap::IDENTITY;
        for &i in &word {
            m = self.generators[i].compose(&m);
        }
        Ok(ReducedPoint {
            state: apply_moebius(&m, s),
            word,
        })
    }

    /// Reduces a frame by left multiplication with the reducing word; the
    /// frame stays an exact group element. Returns the word length.
    pub fn reduce_frame(&self, f: &UnitTangentFrame) -> Result<(UnitTangentFrame, usize)> {
        let z = f.g.apply_point(Complex64::new(0.0, 1.0));
        let word = self.reduction_word(z)?;
        if word.is_empty() {
            return Ok((*f, 0));
        }
        let mut g = f.g;
        for &i in &word {
            g = self.generators[i].compose(&g);
        }
        Ok((UnitTangentFrame { g }, word.len()))
    }

    /// All group elements moving the centre by at most `radius`, found by
    /// breadth-first word enumeration with distance pruning, deduplicated up
    /// to sign. The identity is always included.
    pub fn translate_ball(&self, radius: f64) -> Result<Vec<MoebiusMap>> {
        if radius > self.ball_radius_cap {
            return Err(Error::Config(format!(
                "translate_ball radius {radius} exceeds the configured cap {}",
                self.ball_radius_cap
            )));
        }
        self.translate_ball_internal(radius)
    }

    /// Ball enumeration without the public cap; the fields module needs
    /// periodisation lists whose radius combines the domain circumradius with
    /// bump support and centre offsets, which can exceed the public cap.
    pub(crate) fn translate_ball_internal(&self, radius: f64) -> Result<Vec<MoebiusMap>> {
        let systole = 2.0 * self.injectivity_radius;
        let prune = radius + systole + 0.5;
        let mut accepted: Vec<MoebiusMap> = vec![MoebiusMap::IDENTITY];
        let mut frontier: Vec<MoebiusMap> = vec![MoebiusMap::IDENTITY];
        let mut visited: Vec<MoebiusMap> = vec![MoebiusMap::IDENTITY];
        for _depth in 0..24 {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &self.generators {
                    let cand = g.compose(m);
                    let d = hyperbolic_distance(cand.apply_point(self.center), self.center)?;
                    if d > prune {
                        continue;
                    }
                    if visited.iter().any(|v| v.dist_up_to_sign(&cand) < 1e-9) {
                        continue;
                    }
                    visited.push(cand);
                    next.push(cand);
                    if d <= radius + 1e-9 {
                        accepted.push(cand);
                    }
                }
            }
            if next.is_empty() {
                return Ok(accepted);
            }
            frontier = next;
        }
        Err(Error::Internal(
            "translate_ball word enumeration did not close within depth 24".into(),
        ))
    }

    /// Monte Carlo estimate of the hyperbolic area of the Dirichlet domain,
    /// by uniform-area sampling of the circumscribed disk. Returns the
    /// estimate and its one-sigma statistical error.
    pub fn area_monte_carlo(&self, n: usize, seed: u64) -> Result<(f64, f64)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let r = self.circumradius + 1e-6;
        let ball_area = 2.0 * std::f64::consts::PI * (r.cosh() - 1.0);
        let cum_max = 2.0 * (r / 2.0).tanh().powi(2) / (1.0 - (r / 2.0).tanh().powi(2));
        let mut hits = 0usize;
        for _ in 0..n {
            let c: f64 = rng.gen_range(0.0..cum_max);
            let rr = (c / (c + 2.0)).sqrt();
            let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let w = Complex64::from_polar(rr, theta);
            let z = disk_to_halfplane(w)?;
            if self.in_domain(z, 0.0)? {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let est = p * ball_area;
        let sigma = ball_area * (p * (1.0 - p) / n as f64).sqrt();
        Ok((est, sigma))
    }

    /// Distance between two states seen on the quotient: minimum of the
    /// plane distance over the comparison ball. Intended for nearby states
    /// (both reduced, possibly across a side or a vertex of the domain).
    ///
    /// Every non-identity element of a torsion-free cocompact group displaces
    /// every point by at least the systole, so when the direct base distance
    /// is below half of it no translate can do better and the ball search is
    /// skipped.
    pub fn quotient_distance(&self, s1: &CotangentState, s2: &CotangentState) -> Result<f64> {
        let direct = hyperbolic_distance(s1.z, s2.z)?;
        if direct < self.injectivity_radius {
            return crate::hyperbolic::unit_state_distance(s1, s2);
        }
        let mut best = f64::INFINITY;
        for g in &self.comparison_ball {
            let moved = apply_moebius(g, s1);
            best = best.min(crate::hyperbolic::unit_state_distance(&moved, s2)?);
        }
        Ok(best)
    }

    /// Serialises the canonical generators to the surface definition format.
    pub fn to_definition_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# surface definition: canonical side-pairing generators, row-major\n");
        out.push_str(&format!("center {:.17} {:.17}\n", self.center.re, self.center.im));
        out.push_str(&format!("area {:.17}\n", self.area));
        for g in &self.generators[..self.genus_generators()] {
            out.push_str(&format!(
                "generator {:.17} {:.17} {:.17} {:.17}\n",
                g.a, g.b, g.c, g.d
            ));
        }
        out
    }
}

/// Complex 2x2 matrix product, used only while conjugating the disk-model
/// generators to the half-plane.
fn cmul(m1: &[[Complex64; 2]; 2], m2: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = m1[i][0] * m2[0][j] + m1[i][1] * m2[1][j];
        }
    }
    out
}

/// Builds the Bolza surface.
///
/// The disk-model side pairings are the eight hyperbolic translations
/// `rot(k pi/4) . T . rot(-k pi/4)` with `T` the translation of length
/// `2 arccosh(1 + sqrt 2)` along the real axis; as matrices in SU(1,1) they
/// read `[[alpha, beta e^{ik pi/4}], [beta e^{-ik pi/4}, alpha]]` with
/// `alpha = 1 + sqrt 2` and `beta^2 = 2(1 + sqrt 2)`. They are conjugated to
/// SL(2, R) by the Cayley map.
pub fn build_bolza() -> Result<FuchsianSurface> {
    let alpha = 1.0 + 2.0_f64.sqrt();
    let beta = (2.0 * (1.0 + 2.0_f64.sqrt())).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);

    // Cayley map K: half-plane -> disk, z -> (z-i)/(z+i), and its inverse.
    let k_mat = [[one, -i], [one, i]];
    let det_k = k_mat[0][0] * k_mat[1][1] - k_mat[0][1] * k_mat[1][0];
    let k_inv = [
        [k_mat[1][1] / det_k, -k_mat[0][1] / det_k],
        [-k_mat[1][0] / det_k, k_mat[0][0] / det_k],
    ];

    let mut generators = Vec::with_capacity(8);
    for j in 0..4 {
        let phase = Complex64::from_polar(1.0, j as f64 * std::f64::consts::FRAC_PI_4);
        let disk = [
            [Complex64::new(alpha, 0.0), beta * phase],
            [beta * phase.conj(), Complex64::new(alpha, 0.0)],
        ];
        let half = cmul(&k_inv, &cmul(&disk, &k_mat));
        let max_im = half
            .iter()
            .flatten()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max);
        if max_im > 1e-12 {
            return Err(Error::Internal(format!(
                "Cayley conjugation of a Bolza generator left imaginary parts {max_im}"
            )));
        }
        generators.push(MoebiusMap::new(
            half[0][0].re,
            half[0][1].re,
            half[1][0].re,
            half[1][1].re,
        )?);
    }
    for j in 0..4 {
        let inv = generators[j].inverse();
        generators.push(inv);
    }

    let center = Complex64::new(0.0, 1.0);
    let injectivity_radius = (1.0 + 2.0_f64.sqrt()).acosh();
    let circumradius = (3.0 + 2.0 * 2.0_f64.sqrt()).acosh();
    let area = 4.0 * std::f64::consts::PI;

    let neighbor_centers: Vec<Complex64> =
        generators.iter().map(|g| g.apply_point(center)).collect();

    // Side feet: midpoints of [centre, g_k centre], at distance inj along
    // the disk-model direction k pi/4.
    let foot_disk_radius = (injectivity_radius / 2.0).tanh();
    let mut sides = Vec::with_capacity(8);
    for k in 0..8 {
        let angle = k as f64 * std::f64::consts::FRAC_PI_4;
        let foot = disk_to_halfplane(Complex64::from_polar(foot_disk_radius, angle))?;
        sides.push(SideDescription {
            generator: k,
            foot,
            direction_angle: angle,
        });
    }

    let mut surface = FuchsianSurface {
        generators,
        center,
        sides,
        injectivity_radius,
        area,
        circumradius,
        ball_radius_cap: 3.0 * injectivity_radius,
        neighbor_centers,
        comparison_ball: Vec::new(),
    };
    surface.comparison_ball = surface.translate_ball_internal(2.0 * circumradius + 0.1)?;
    validate_surface(&surface)?;
    Ok(surface)
}

/// Canonical relator for the opposite-side pairing of the octagon:
/// `g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3`.
pub fn relator_product(generators: &[MoebiusMap]) -> MoebiusMap {
    let g = |k: usize| generators[k];
    let gi = |k: usize| generators[k].inverse();
    let order = [
        g(0),
        gi(1),
        g(2),
        gi(3),
        gi(0),
        g(1),
        gi(2),
        g(3),
    ];
    order
        .into_iter()
        .fold(MoebiusMap::IDENTITY, |acc, m| acc.compose(&m))
}

/// Structural validation shared by the builder and the file loader.
fn validate_surface(surface: &FuchsianSurface) -> Result<()> {
    for (k, g) in surface.generators.iter().enumerate() {
        let tr = (g.a + g.d).abs();
        if tr <= 2.0 {
            return Err(Error::Config(format!(
                "generator {k} is not hyperbolic: |trace| = {tr}"
            )));
        }
    }
    let rel = relator_product(&surface.generators[..surface.genus_generators()]);
    if !rel.is_identity(1e-9) {
        return Err(Error::Config(format!(
            "side-pairing relator is not the identity: deviation {}",
            rel.dist_up_to_sign(&MoebiusMap::IDENTITY)
        )));
    }
    // Discreteness sanity: no non-identity element close to the centre.
    for m in surface.translate_ball(0.1)? {
        if !m.is_identity(1e-9) {
            return Err(Error::Config(
                "found a non-identity group element moving the centre by < 0.1".into(),
            ));
        }
    }
    Ok(())
}

/// Loads a surface definition from the structured text format written by
/// [`FuchsianSurface::to_definition_string`]: `center`, `area` and four
/// `generator a b c d` lines, `#` comments allowed. All invariants are
/// re-validated, including a Monte Carlo check of the declared area.
pub fn load_surface(text: &str) -> Result<FuchsianSurface> {
    let mut center = None;
    let mut area = None;
    let mut gens: Vec<MoebiusMap> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {}: bad number '{p}'", lineno + 1))
                })
            })
            .collect::<Result<_>>()?;
        match key {
            "center" if nums.len() == 2 => center = Some(Complex64::new(nums[0], nums[1])),
            "area" if nums.len() == 1 => area = Some(nums[0]),
            "generator" if nums.len() == 4 => {
                gens.push(MoebiusMap::new(nums[0], nums[1], nums[2], nums[3])?)
            }
            _ => {
                return Err(Error::Config(format!(
                    "line {}: unrecognised entry '{line}'",
                    lineno + 1
                )))
            }
        }
    }
    let center = center.ok_or_else(|| Error::Config("missing 'center' line".into()))?;
    let area = area.ok_or_else(|| Error::Config("missing 'area' line".into()))?;
    if gens.len() != 4 {
        return Err(Error::Config(format!(
            "expected 4 canonical generators, got {}",
            gens.len()
        )));
    }
    if !(center.im > 0.0) {
        return Err(Error::Config("centre must lie in the upper half-plane".into()));
    }
    let mut generators = gens.clone();
    for g in &gens {
        generators.push(g.inverse());
    }
    let neighbor_centers: Vec<Complex64> =
        generators.iter().map(|g| g.apply_point(center)).collect();
    let min_move = neighbor_centers
        .iter()
        .map(|t| hyperbolic_distance(*t, center).unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    let injectivity_radius = min_move / 2.0;
    // Generic circumradius bound: the Dirichlet domain is contained in the
    // ball of radius systole around the centre.
    let circumradius = 2.0 * injectivity_radius;
    let mut surface = FuchsianSurface {
        generators,
        center,
        sides: Vec::new(),
        injectivity_radius,
        area,
        circumradius,
        ball_radius_cap: 3.0 * injectivity_radius,
        neighbor_centers,
        comparison_ball: Vec::new(),
    };
    surface.comparison_ball = surface.translate_ball_internal(2.0 * circumradius + 0.1)?;
    validate_surface(&surface)?;
    let (est, sigma) = surface.area_monte_carlo(200_000, 0x5eed)?;
    if (est - area).abs() > 5.0 * sigma.max(1e-3) {
        return Err(Error::Config(format!(
            "declared area {area} inconsistent with Monte Carlo estimate {est} +- {sigma}"
        )));
    }
    Ok(surface)
}
