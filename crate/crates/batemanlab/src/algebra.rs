//! The su(1,1) charge algebra carried by each pair, finite-difference
//! Poisson-bracket verification, and the canonical radial chart.
//!
//! In the rotated chart the charges are
//!
//! ```text
//! J1 = p1 p2 / (2 m Omega) - (m Omega / 2) x1 x2
//! J2 = (p1 x2 + p2 x1) / 2
//! J3 = (p1^2 + p2^2) / (4 m Omega) + (m Omega / 4) (x1^2 + x2^2)
//! C  = (p1^2 - p2^2 + (m Omega)^2 (x1^2 - x2^2)) / (4 m Omega)
//! ```
//!
//! with `{J2, J3} = J1`, `{J3, J1} = J2`, `{J1, J2} = -J3`, the Casimir
//! identity `C^2 = J3^2 - J2^2 - J1^2`, and the Hamiltonian in the
//! momentum-linear form `H = 2 (Omega C - Gamma J2)`. Both `C` and `J2`
//! commute with `H`, so they are conserved along the flow.
//!
//! Brackets are verified by central finite differences. All charges are
//! quadratic in phase space, so the central difference is exact up to
//! rounding; residuals measure implementation faithfulness, not truncation.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::phase::{
    from_hyperbolic, to_rotated, BatemanParams, CanonicalState, PhaseStateHyp, PhaseStateRot,
    PhaseStateXY,
};
use crate::quadrature::adaptive_simpson;
use crate::{Error, Result};

/// Tolerance for the angle-integral quadratures of the canonical chart.
const QUAD_TOL: f64 = 1e-12;

/// The five charges of one pair evaluated at a phase-space point.
///
/// `h` is assembled from its kinetic, damping and potential pieces rather
/// than from the charges, so `h == 2 (Omega c - Gamma j2)` is a nontrivial
/// cross check rather than a tautology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargeSet {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub c: f64,
    pub h: f64,
}

/// Charges in the rotated chart.
pub fn charges(p: &BatemanParams, s: &PhaseStateRot) -> ChargeSet {
    let m = p.m();
    let om = p.omega();
    let gg = p.big_gamma();
    let mo = m * om;
    let p_sum = s.p1 * s.p1 + s.p2 * s.p2;
    let p_diff = s.p1 * s.p1 - s.p2 * s.p2;
    let x_sum = s.x1 * s.x1 + s.x2 * s.x2;
    let x_diff = s.x1 * s.x1 - s.x2 * s.x2;
    ChargeSet {
        j1: s.p1 * s.p2 / (2.0 * mo) - 0.5 * mo * s.x1 * s.x2,
        j2: 0.5 * (s.p1 * s.x2 + s.p2 * s.x1),
        j3: p_sum / (4.0 * mo) + 0.25 * mo * x_sum,
        c: (p_diff + mo * mo * x_diff) / (4.0 * mo),
        h: p_diff / (2.0 * m) - gg * (s.p1 * s.x2 + s.p2 * s.x1) + 0.5 * m * om * om * x_diff,
    }
}

/// Charges in the hyperbolic chart, where `C` and `J2` take their simplest
/// forms:
///
/// ```text
/// C  = (p_r^2 - p_u^2 / r^2 + (m Omega r)^2) / (4 m Omega)
/// J2 = p_u / 2
/// ```
///
/// `J1` and `J3` need the angle explicitly and are evaluated through the
/// chart map. Fails on zero radius.
pub fn charges_hyp(p: &BatemanParams, s: &PhaseStateHyp) -> Result<ChargeSet> {
    let rot = from_hyperbolic(s)?;
    let full = charges(p, &rot);
    let m = p.m();
    let om = p.omega();
    let mo = m * om;
    let r_sq = s.r * s.r;
    let c = (s.p_r * s.p_r - s.p_u * s.p_u / r_sq + mo * mo * r_sq) / (4.0 * mo);
    let j2 = 0.5 * s.p_u;
    Ok(ChargeSet {
        j1: full.j1,
        j2,
        j3: full.j3,
        c,
        h: 2.0 * (om * c - p.big_gamma() * j2),
    })
}

/// Charge evaluation for any chart state. The physical and hyperbolic charts
/// go through their maps to the rotated chart; hyperbolic states must have
/// nonzero radius, which valid states always do.
pub trait ChargeBearing: CanonicalState {
    fn charge_set(&self, p: &BatemanParams) -> ChargeSet;
}

impl ChargeBearing for PhaseStateRot {
    fn charge_set(&self, p: &BatemanParams) -> ChargeSet {
        charges(p, self)
    }
}

impl ChargeBearing for PhaseStateXY {
    fn charge_set(&self, p: &BatemanParams) -> ChargeSet {
        charges(p, &to_rotated(self))
    }
}

impl ChargeBearing for PhaseStateHyp {
    fn charge_set(&self, p: &BatemanParams) -> ChargeSet {
        charges_hyp(p, self).expect("hyperbolic state with zero radius")
    }
}

/// Default relative finite-difference step, `eps^(1/3)`, the usual optimum
/// for central differences.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.cbrt()
}

fn gradient<S: CanonicalState, F: Fn(&S) -> f64>(f: &F, x: &[f64; 4], step: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let h = step * x[i].abs().max(1.0);
        let up = x[i] + h;
        let dn = x[i] - h;
        let mut xu = *x;
        xu[i] = up;
        let mut xd = *x;
        xd[i] = dn;
        out[i] = (f(&S::from_array(xu)) - f(&S::from_array(xd))) / (up - dn);
    }
    out
}

/// Central finite-difference Poisson bracket `{f, g}` at a point of any
/// canonical chart. `step` is relative; coordinates below 1 in magnitude use
/// it as an absolute step.
pub fn poisson_bracket<S, F, G>(f: F, g: G, at: &S, step: f64) -> f64
where
    S: CanonicalState,
    F: Fn(&S) -> f64,
    G: Fn(&S) -> f64,
{
    let x = at.to_array();
    let df = gradient(&f, &x, step);
    let dg = gradient(&g, &x, step);
    df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1]
}

/// Poisson bracket over the product phase space of two pairs, for functions
/// of both rotated states.
pub fn poisson_bracket_pair<F, G>(
    f: F,
    g: G,
    at_a: &PhaseStateRot,
    at_b: &PhaseStateRot,
    step: f64,
) -> f64
where
    F: Fn(&PhaseStateRot, &PhaseStateRot) -> f64,
    G: Fn(&PhaseStateRot, &PhaseStateRot) -> f64,
{
    poisson_bracket(|s| f(s, at_b), |s| g(s, at_b), at_a, step)
        + poisson_bracket(|s| f(at_a, s), |s| g(at_a, s), at_b, step)
}

/// Result of checking one bracket relation over a sample of points.
#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub relation: String,
    pub max_residual: f64,
    pub points_tested: usize,
}

/// Verify the full two-pair charge algebra at random points in the default
/// sampling box `[-2, 2]^4` per pair.
///
/// Covers, per pair: the three su(1,1) structure relations and conservation
/// of `J2` and `C` under `H`; across pairs: vanishing of all nine mixed
/// charge brackets. Returns one report per relation, 19 in total.
pub fn verify_su11(
    p_a: &BatemanParams,
    p_b: &BatemanParams,
    n_points: usize,
    seed: u64,
) -> Vec<BracketReport> {
    verify_su11_with_box(p_a, p_b, n_points, seed, 2.0)
}

/// Same as [`verify_su11`] with an explicit half-width for the sampling box.
pub fn verify_su11_with_box(
    p_a: &BatemanParams,
    p_b: &BatemanParams,
    n_points: usize,
    seed: u64,
    half_width: f64,
) -> Vec<BracketReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = default_fd_step();

    let pair_relations = 5;
    let cross_relations = 9;
    let mut maxima = vec![0.0f64; 2 * pair_relations + cross_relations];

    for _ in 0..n_points {
        let sa = sample_rot(&mut rng, half_width);
        let sb = sample_rot(&mut rng, half_width);

        for (pair_idx, (p, s)) in [(p_a, &sa), (p_b, &sb)].into_iter().enumerate() {
            let j1 = |t: &PhaseStateRot| charges(p, t).j1;
            let j2 = |t: &PhaseStateRot| charges(p, t).j2;
            let j3 = |t: &PhaseStateRot| charges(p, t).j3;
            let c = |t: &PhaseStateRot| charges(p, t).c;
            let h = |t: &PhaseStateRot| charges(p, t).h;
            let at = charges(p, s);
            let residuals = [
                (poisson_bracket(j2, j3, s, step) - at.j1).abs(),
                (poisson_bracket(j3, j1, s, step) - at.j2).abs(),
                (poisson_bracket(j1, j2, s, step) + at.j3).abs(),
                poisson_bracket(h, j2, s, step).abs(),
                poisson_bracket(h, c, s, step).abs(),
            ];
            for (k, r) in residuals.into_iter().enumerate() {
                let slot = pair_idx * pair_relations + k;
                maxima[slot] = maxima[slot].max(r);
            }
        }

        for alpha in 0..3 {
            for beta in 0..3 {
                let f = |ta: &PhaseStateRot, _: &PhaseStateRot| component(p_a, ta, alpha);
                let g = |_: &PhaseStateRot, tb: &PhaseStateRot| component(p_b, tb, beta);
                let r = poisson_bracket_pair(f, g, &sa, &sb, step).abs();
                let slot = 2 * pair_relations + 3 * alpha + beta;
                maxima[slot] = maxima[slot].max(r);
            }
        }
    }

    let mut names = Vec::new();
    for pair in ["A", "B"] {
        names.push(format!("{pair}: {{J2,J3}} - J1"));
        names.push(format!("{pair}: {{J3,J1}} - J2"));
        names.push(format!("{pair}: {{J1,J2}} + J3"));
        names.push(format!("{pair}: {{H,J2}}"));
        names.push(format!("{pair}: {{H,C}}"));
    }
    for alpha in 1..=3 {
        for beta in 1..=3 {
            names.push(format!("cross: {{J{alpha}_A,J{beta}_B}}"));
        }
    }

    names
        .into_iter()
        .zip(maxima)
        .map(|(relation, max_residual)| BracketReport {
            relation,
            max_residual,
            points_tested: n_points,
        })
        .collect()
}

fn component(p: &BatemanParams, s: &PhaseStateRot, idx: usize) -> f64 {
    let ch = charges(p, s);
    match idx {
        0 => ch.j1,
        1 => ch.j2,
        _ => ch.j3,
    }
}

fn sample_rot<R: Rng>(rng: &mut R, w: f64) -> PhaseStateRot {
    PhaseStateRot {
        x1: rng.random_range(-w..w),
        x2: rng.random_range(-w..w),
        p1: rng.random_range(-w..w),
        p2: rng.random_range(-w..w),
    }
}

/// The canonical coordinates built on the conserved pair `(C, J2)`.
///
/// `q1` is conjugate to `C` and `q2` to `J2`; `z_minus` and `z_plus` bound
/// the classically allowed band in `z = r^2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CanonicalCoords {
    pub q1: f64,
    pub q2: f64,
    pub c: f64,
    pub j2: f64,
    pub z_minus: f64,
    pub z_plus: f64,
}

/// Turning points of the radial motion in `z = r^2`: the roots of
/// `D(z) = 4 J2^2 + 4 m Omega C z - (m Omega z)^2`.
///
/// Requires `C > 0`. For `J2 != 0` the lower root is negative, so the whole
/// physical half-line up to `z_plus` is allowed.
pub fn turning_points(p: &BatemanParams, c: f64, j2: f64) -> Result<(f64, f64)> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::NonPositiveCasimir(c));
    }
    let a = p.m() * p.omega();
    let s = (c * c + j2 * j2).sqrt();
    Ok((2.0 * (c - s) / a, 2.0 * (c + s) / a))
}

/// Canonical chart at explicit `(C, J2, z, u)`. The angle integrals use the
/// substitution `z = z_minus + (z_plus - z_minus) sin^2 theta`, which removes
/// the square-root turning-point singularities exactly:
///
/// ```text
/// q1 = Integral m Omega dz / sqrt(D)            from z_minus to z
/// q2 = 2u - Integral (2 J2 / z) dz / sqrt(D)    from z to z_plus
/// ```
///
/// The `q2` integral taken from the lower turning point has a pole at `z = 0`
/// whose principal value exactly equals the plain integral anchored at the
/// upper turning point, which is what is computed here.
pub fn canonical_q_at(
    p: &BatemanParams,
    c: f64,
    j2: f64,
    z: f64,
    u: f64,
) -> Result<CanonicalCoords> {
    let (z_minus, z_plus) = turning_points(p, c, j2)?;
    let a = p.m() * p.omega();
    let d = 4.0 * j2 * j2 + 4.0 * a * c * z - a * a * z * z;
    let scale = (4.0 * j2 * j2)
        .max(a * a * z * z)
        .max(4.0 * a * c * z.abs());
    if z < 0.0 || d < -1e-12 * scale {
        return Err(Error::TurningPoint { z, z_minus, z_plus });
    }
    let width = z_plus - z_minus;
    let frac = ((z - z_minus) / width).clamp(0.0, 1.0);
    let theta_z = frac.sqrt().asin();

    // After the substitution the q1 integrand is the constant 2: the Jacobian
    // (z_plus - z_minus) sin(2 theta) cancels sqrt(D)/(m Omega) exactly.
    let q1 = adaptive_simpson(&|_| 2.0, 0.0, theta_z, QUAD_TOL)?;

    let q2 = if j2 == 0.0 {
        2.0 * u
    } else {
        let tail = adaptive_simpson(
            &|theta: f64| {
                let s = theta.sin();
                1.0 / (z_minus + width * s * s)
            },
            theta_z,
            std::f64::consts::FRAC_PI_2,
            QUAD_TOL,
        )?;
        2.0 * u - (4.0 * j2 / a) * tail
    };

    Ok(CanonicalCoords {
        q1,
        q2,
        c,
        j2,
        z_minus,
        z_plus,
    })
}

/// Canonical chart evaluated at a hyperbolic state. The conserved pair
/// `(C, J2)` is read off the state itself, so the point always lies in the
/// allowed band up to rounding; `q1` covers `[0, pi]` across the band, which
/// is the half-period of the radial oscillation.
///
/// On the outgoing branch (`p_r > 0`) the chart is canonical:
/// `{q1, C} = 1`, `{q2, J2} = 1`, and all other combinations vanish.
pub fn canonical_q(p: &BatemanParams, s: &PhaseStateHyp) -> Result<CanonicalCoords> {
    let ch = charges_hyp(p, s)?;
    canonical_q_at(p, ch.c, ch.j2, s.r * s.r, s.u)
}
