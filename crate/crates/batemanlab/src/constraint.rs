//! Splitting the indefinite energy into two non-negative sectors, the
//! two-pair composite with its global first-class constraint, the reduced
//! dynamics on the constraint surface, and the coarse-graining weight.
//!
//! The splitting trick: for any reference scale `rho > 0`,
//!
//! ```text
//! h = (rho + h)^2 / (4 rho) - (rho - h)^2 / (4 rho) = h_plus - h_minus
//! ```
//!
//! decomposes an indefinite Hamiltonian into a difference of squares. With
//! `rho = 2 Omega C` the defect `h_minus` collapses to `Gamma^2 J2^2 / (2
//! Omega C)` for a single pair, and to the same expression in the global
//! charges for the composite, because `rho - h = 2 Gamma J` is then exact.
//!
//! The composite couples two pairs only through the normalization: the global
//! charges are frequency- and rate-weighted means, and the surface `J = 0`
//! fixes the longitudinal momentum of pair B in terms of pair A. Eliminating
//! it yields a reduced Hamiltonian in which pair B sees an inverse-square
//! coupling to pair A's conserved `J2`, the analogue of a charge in a
//! magnetic-like background.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{charges_hyp, ChargeBearing};
use crate::phase::{BatemanParams, CompositeParams, PhaseStateHyp};
use crate::{Error, Result};

/// Outcome of the difference-of-squares decomposition: both parts are
/// non-negative and `h_plus - h_minus` reproduces the input exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitResult {
    pub h_plus: f64,
    pub h_minus: f64,
    pub rho: f64,
}

/// Split `h` against the reference scale `rho > 0`.
pub fn split(h: f64, rho: f64) -> Result<SplitResult> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::NonPositiveRho(rho));
    }
    if !h.is_finite() {
        return Err(Error::InvalidParams(format!(
            "cannot split a non-finite energy, got {h}"
        )));
    }
    let plus = rho + h;
    let minus = rho - h;
    Ok(SplitResult {
        h_plus: plus * plus / (4.0 * rho),
        h_minus: minus * minus / (4.0 * rho),
        rho,
    })
}

/// Residual of the single-pair constraint: just the pair's `J2`. Zero on the
/// pair's own surface.
pub fn local_ilc_residual<S: ChargeBearing>(p: &BatemanParams, s: &S) -> f64 {
    s.charge_set(p).j2
}

/// Globally weighted charges of a two-pair composite and the total energy
/// they generate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeCharges {
    pub c_global: f64,
    pub j_global: f64,
    pub h_total: f64,
}

/// Charges of the composite built from hyperbolic-chart states of the two
/// pairs. Both Casimirs must be positive; `h_total` is assembled as
/// `H_A + H_B`, which equals `2 Omega c_global - 2 Gamma j_global` up to
/// rounding (a real cross-check, not a definition).
pub fn composite_charges(
    cp: &CompositeParams,
    state_a: &PhaseStateHyp,
    state_b: &PhaseStateHyp,
) -> Result<CompositeCharges> {
    let ch_a = charges_hyp(&cp.a, state_a)?;
    let ch_b = charges_hyp(&cp.b, state_b)?;
    for c in [ch_a.c, ch_b.c] {
        if c <= 0.0 {
            return Err(Error::NonPositiveCasimir(c));
        }
    }
    let c_global = (cp.a.omega() * ch_a.c + cp.b.omega() * ch_b.c) / cp.omega_global();
    let j_global = (cp.a.big_gamma() * ch_a.j2 + cp.b.big_gamma() * ch_b.j2) / cp.gamma_global();
    Ok(CompositeCharges {
        c_global,
        j_global,
        h_total: ch_a.h + ch_b.h,
    })
}

/// Coordinate ranges for hyperbolic-chart draws. The `p_u` range applies
/// only where the longitudinal momentum is free; the surface completion
/// fixes it instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionBox {
    pub r: (f64, f64),
    pub u: (f64, f64),
    pub p_r: (f64, f64),
    pub p_u: (f64, f64),
}

impl Default for CompletionBox {
    fn default() -> Self {
        Self {
            r: (0.4, 2.2),
            u: (-1.2, 1.2),
            p_r: (-2.0, 2.0),
            p_u: (-2.0, 2.0),
        }
    }
}

impl CompletionBox {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("r", self.r),
            ("u", self.u),
            ("p_r", self.p_r),
            ("p_u", self.p_u),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParams(format!(
                    "box range for {name} must satisfy lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        if self.r.0 <= 0.0 && self.r.1 >= 0.0 {
            return Err(Error::InvalidParams(
                "box range for r must exclude the cone r = 0".into(),
            ));
        }
        Ok(())
    }
}

const MAX_SAMPLE_ATTEMPTS: usize = 1000;

/// Complete pair A's state to a point of the global surface `J = 0`: the
/// B-side longitudinal momentum is fixed by the constraint,
/// `p_uB = -(Gamma_A / Gamma_B) p_uA`, and the remaining B coordinates are
/// drawn from `bx` until the B Casimir is positive.
pub fn sample_global_surface(
    cp: &CompositeParams,
    state_a: &PhaseStateHyp,
    bx: &CompletionBox,
    rng: &mut impl Rng,
) -> Result<PhaseStateHyp> {
    bx.validate()?;
    if cp.b.big_gamma() == 0.0 {
        return Err(Error::ZeroGammaB);
    }
    let p_u_b = -(cp.a.big_gamma() / cp.b.big_gamma()) * state_a.p_u;
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let candidate = PhaseStateHyp {
            r: rng.random_range(bx.r.0..bx.r.1),
            u: rng.random_range(bx.u.0..bx.u.1),
            p_r: rng.random_range(bx.p_r.0..bx.p_r.1),
            p_u: p_u_b,
        };
        match charges_hyp(&cp.b, &candidate) {
            Ok(ch) if ch.c > 0.0 => return Ok(candidate),
            _ => continue,
        }
    }
    Err(Error::SamplingExhausted(MAX_SAMPLE_ATTEMPTS))
}

/// Radial energy of one pair with its longitudinal momentum folded into
/// `J2 = p_u/2`; equals `2 Omega C` identically.
fn radial_pair_energy(p: &BatemanParams, s: &PhaseStateHyp, j2: f64) -> f64 {
    let m = p.m();
    s.p_r * s.p_r / (2.0 * m) - 2.0 * j2 * j2 / (m * s.r * s.r)
        + 0.5 * m * p.omega() * p.omega() * s.r * s.r
}

const SURFACE_TOLERANCE: f64 = 1e-10;

/// Energy of the composite after the constraint eliminates pair B's
/// longitudinal momentum. Only valid on the surface `|J| < 1e-10`; off it
/// the elimination is meaningless and the call fails.
///
/// On the surface the value equals `H_A + H_B` and therefore
/// `2 Omega c_global`, but it is assembled from the reduced expression: pair
/// A's radial energy, pair B's bare radial energy, and the inverse-square
/// interaction carrying `(Gamma_A / Gamma_B)^2 J2_A^2`.
pub fn reduced_hamiltonian(
    cp: &CompositeParams,
    state_a: &PhaseStateHyp,
    state_b: &PhaseStateHyp,
) -> Result<f64> {
    if cp.b.big_gamma() == 0.0 {
        return Err(Error::ZeroGammaB);
    }
    let ch_a = charges_hyp(&cp.a, state_a)?;
    let ch_b = charges_hyp(&cp.b, state_b)?;
    let j_global = (cp.a.big_gamma() * ch_a.j2 + cp.b.big_gamma() * ch_b.j2) / cp.gamma_global();
    if j_global.abs() >= SURFACE_TOLERANCE {
        return Err(Error::OffSurface {
            j_abs: j_global.abs(),
        });
    }
    let term_a = radial_pair_energy(&cp.a, state_a, ch_a.j2);
    let m_b = cp.b.m();
    let term_b = state_b.p_r * state_b.p_r / (2.0 * m_b)
        + 0.5 * m_b * cp.b.omega() * cp.b.omega() * state_b.r * state_b.r;
    let ratio = cp.a.big_gamma() / cp.b.big_gamma();
    let h_int = -(2.0 / m_b) * ratio * ratio * ch_a.j2 * ch_a.j2 / (state_b.r * state_b.r);
    Ok(term_a + term_b + h_int)
}

/// What pair B experiences on the surface, phrased as an external field:
/// the inverse-square coupling strength, the conserved moment it multiplies,
/// and the ratio that controls the emergent level splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveFieldReport {
    pub b_magnitude: f64,
    pub mu_coupling: f64,
    pub h_int: f64,
    pub g_over_4c2: f64,
}

/// Evaluate the effective field seen by pair B at its current radius, given
/// pair A's conserved `J2`. Invariant under the rescaling
/// `(Gamma_A, J2_A) -> (lambda Gamma_A, J2_A / lambda)` in the interaction
/// term, which is why only the combination `Gamma_A J2_A` is observable.
pub fn effective_field(
    cp: &CompositeParams,
    state_b: &PhaseStateHyp,
    j2_a: f64,
) -> Result<EffectiveFieldReport> {
    if cp.b.big_gamma() == 0.0 {
        return Err(Error::ZeroGammaB);
    }
    if state_b.r == 0.0 {
        return Err(Error::ChartDomain(
            "effective field undefined on the cone r = 0".into(),
        ));
    }
    let m_b = cp.b.m();
    let r_sq = state_b.r * state_b.r;
    let ratio = cp.a.big_gamma() / cp.b.big_gamma();
    Ok(EffectiveFieldReport {
        b_magnitude: 2.0 / (m_b * cp.b.big_gamma() * r_sq),
        mu_coupling: cp.a.big_gamma(),
        h_int: -(2.0 / m_b) * ratio * ratio * j2_a * j2_a / r_sq,
        g_over_4c2: ratio,
    })
}

/// Fraction of the defect energy that survives coarse graining at scale
/// `e_planck`:
///
/// ```text
/// w = 1 - exp(-(E_P - E_plus) / E_plus)
/// ```
///
/// computed through `exp_m1` so the value stays exact near `E_plus = E_P`.
/// Requires `0 < e_plus <= e_planck`.
pub fn coarse_graining_weight(e_plus: f64, e_planck: f64) -> Result<f64> {
    let x = weight_exponent(e_plus, e_planck)?;
    Ok(-(-x).exp_m1())
}

/// The complement `1 - w = exp(-(E_P - E_plus)/E_plus)`, exposed separately
/// because at small `e_plus` the weight itself rounds to 1 while the
/// complement still resolves (it reaches `exp(-99)` at `E_P / 100`).
pub fn coarse_graining_complement(e_plus: f64, e_planck: f64) -> Result<f64> {
    let x = weight_exponent(e_plus, e_planck)?;
    Ok((-x).exp())
}

fn weight_exponent(e_plus: f64, e_planck: f64) -> Result<f64> {
    if !e_plus.is_finite() || !e_planck.is_finite() {
        return Err(Error::Domain(format!(
            "coarse-graining energies must be finite, got e_plus = {e_plus}, e_planck = {e_planck}"
        )));
    }
    if e_plus <= 0.0 {
        return Err(Error::Domain(format!(
            "coarse-graining needs e_plus > 0, got {e_plus}"
        )));
    }
    if e_plus > e_planck {
        return Err(Error::Domain(format!(
            "coarse-graining needs e_plus <= e_planck, got e_plus = {e_plus} > e_planck = {e_planck}"
        )));
    }
    Ok((e_planck - e_plus) / e_plus)
}

/// Summary of a seeded sweep over the global surface: how far the samples
/// sit from `J = 0` and how well the reduced energy reproduces the total.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceAudit {
    pub samples: usize,
    pub max_abs_j: f64,
    pub max_reduction_gap: f64,
}

/// Draw `n_samples` A-states from `bx` (rejecting non-positive Casimirs),
/// complete each to the surface, and audit the constraint residual and the
/// reduction identity `H_T = reduced`.
pub fn audit_global_surface(
    cp: &CompositeParams,
    bx: &CompletionBox,
    n_samples: usize,
    seed: u64,
) -> Result<SurfaceAudit> {
    bx.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_j: f64 = 0.0;
    let mut max_gap: f64 = 0.0;
    for _ in 0..n_samples {
        let state_a = draw_positive_casimir(&cp.a, bx, &mut rng)?;
        let state_b = sample_global_surface(cp, &state_a, bx, &mut rng)?;
        let cc = composite_charges(cp, &state_a, &state_b)?;
        let reduced = reduced_hamiltonian(cp, &state_a, &state_b)?;
        max_abs_j = max_abs_j.max(cc.j_global.abs());
        max_gap = max_gap.max((cc.h_total - reduced).abs());
    }
    Ok(SurfaceAudit {
        samples: n_samples,
        max_abs_j,
        max_reduction_gap: max_gap,
    })
}

fn draw_positive_casimir(
    p: &BatemanParams,
    bx: &CompletionBox,
    rng: &mut impl Rng,
) -> Result<PhaseStateHyp> {
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let s = PhaseStateHyp {
            r: rng.random_range(bx.r.0..bx.r.1),
            u: rng.random_range(bx.u.0..bx.u.1),
            p_r: rng.random_range(bx.p_r.0..bx.p_r.1),
            p_u: rng.random_range(bx.p_u.0..bx.p_u.1),
        };
        if let Ok(ch) = charges_hyp(p, &s) {
            if ch.c > 0.0 {
                return Ok(s);
            }
        }
    }
    Err(Error::SamplingExhausted(MAX_SAMPLE_ATTEMPTS))
}
