//! Closed-form level ladders and a finite-difference oracle for the radial
//! problem they come from.
//!
//! Everything here revolves around the singular oscillator
//!
//! ```text
//! -(N^2/2) psi'' + [ (Q^2/2) r^2 + (R^2 - N^2/4) / (2 r^2) ] psi = E psi
//! ```
//!
//! whose ladder is `E_{n,-+} = Q N (2n -+ R/N + 1)`. The ratio `R/N` decides
//! the branch structure: below 1/2 the inverse-square term is attractive and
//! both branches are admissible, above 1/2 only the `+` branch survives. The
//! emergent spectrum of the constrained composite and the sectors of the
//! two-mode model reduce to this ladder with specific radicals in place of
//! `R/N`; the decoupled limit is recovered as the radicals hit 1/2.

use serde::{Deserialize, Serialize};

use crate::phase::CompositeParams;
use crate::tridiag::lowest_eigenvalues;
use crate::{Error, Result};

/// Coefficients of the singular oscillator: `n_coef` scales the kinetic
/// term, `q_coef` the quadratic well, `r_coef` the inverse-square strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIsotonicParams", into = "RawIsotonicParams")]
pub struct IsotonicParams {
    n_coef: f64,
    q_coef: f64,
    r_coef: f64,
}

impl IsotonicParams {
    pub fn new(n_coef: f64, q_coef: f64, r_coef: f64) -> Result<Self> {
        for (name, v) in [("n_coef", n_coef), ("q_coef", q_coef)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !r_coef.is_finite() || r_coef < 0.0 {
            return Err(Error::InvalidParams(format!(
                "r_coef must be non-negative and finite, got {r_coef}"
            )));
        }
        Ok(Self {
            n_coef,
            q_coef,
            r_coef,
        })
    }

    pub fn n_coef(&self) -> f64 {
        self.n_coef
    }

    pub fn q_coef(&self) -> f64 {
        self.q_coef
    }

    pub fn r_coef(&self) -> f64 {
        self.r_coef
    }

    /// The branch-deciding ratio `R/N`.
    pub fn ratio(&self) -> f64 {
        self.r_coef / self.n_coef
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIsotonicParams {
    n_coef: f64,
    q_coef: f64,
    r_coef: f64,
}

impl TryFrom<RawIsotonicParams> for IsotonicParams {
    type Error = Error;

    fn try_from(raw: RawIsotonicParams) -> Result<Self> {
        Self::new(raw.n_coef, raw.q_coef, raw.r_coef)
    }
}

impl From<IsotonicParams> for RawIsotonicParams {
    fn from(p: IsotonicParams) -> Self {
        Self {
            n_coef: p.n_coef,
            q_coef: p.q_coef,
            r_coef: p.r_coef,
        }
    }
}

/// One energy level. `n` is the radial (or pair-A) quantum number; `n_b` is
/// present only for genuinely two-mode spectra. The branch string holds one
/// sign per radical ("" when the spectrum has none).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub n: u32,
    pub n_b: Option<u32>,
    pub branch: &'static str,
    pub energy: f64,
}

/// Which branches the parameters admit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Valid,
    AttractiveBothBranches,
    RepulsivePlusOnly,
}

/// A computed spectrum: levels grouped by branch, each branch sorted by
/// energy (strictly increasing in the quantum number for one-mode ladders).
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub levels: Vec<Level>,
    pub validity: Validity,
    pub warnings: Vec<String>,
}

/// Shared ladder assembly: energies `scale * (2n + 1 -+ ratio) + shift` with
/// the branch rule driven by `ratio`.
fn radial_ladder(scale: f64, ratio: f64, shift: f64, n_max: u32) -> SpectrumResult {
    let (branches, validity): (&[(&'static str, f64)], Validity) = if ratio > 0.5 {
        (&[("+", 1.0)], Validity::RepulsivePlusOnly)
    } else {
        (&[("-", -1.0), ("+", 1.0)], Validity::AttractiveBothBranches)
    };
    let mut levels = Vec::new();
    for &(label, sign) in branches {
        for n in 0..=n_max {
            let factor = (2 * n + 1) as f64 + sign * ratio;
            levels.push(Level {
                n,
                n_b: None,
                branch: label,
                energy: scale * factor + shift,
            });
        }
    }
    let mut warnings = Vec::new();
    if ratio == 0.0 {
        warnings.push("inverse-square term absent: branches are degenerate".into());
    } else if ratio == 0.5 {
        warnings
            .push("boundary ratio 1/2: branches interleave into a single oscillator ladder".into());
    }
    SpectrumResult {
        levels,
        validity,
        warnings,
    }
}

/// Ladder of the singular oscillator itself: `E = Q N (2n -+ R/N + 1)`.
pub fn isotonic_levels(params: &IsotonicParams, n_max: u32) -> SpectrumResult {
    radial_ladder(params.q_coef * params.n_coef, params.ratio(), 0.0, n_max)
}

/// The branch offset of the emergent spectrum,
/// `sqrt(1/4 - (2 Gamma_A mu / Gamma_B)^2)`, exactly 1/2 when pair A
/// decouples and shrinking as the coupling grows. Fails outside the real
/// regime.
pub fn emergent_radical(cp: &CompositeParams, mu: f64) -> Result<f64> {
    if cp.b.big_gamma() == 0.0 {
        return Err(Error::ZeroGammaB);
    }
    if !mu.is_finite() {
        return Err(Error::Domain(format!(
            "emergent coupling must be finite, got {mu}"
        )));
    }
    let w = 2.0 * cp.a.big_gamma() * mu / cp.b.big_gamma();
    let radicand = 0.25 - w * w;
    if radicand < 0.0 {
        return Err(Error::RadicalDomain(radicand));
    }
    Ok(radicand.sqrt())
}

/// Spectrum that pair B inherits on the global surface: oscillator spacing
/// `Omega_B` with the branch offset shrunk by the radical and shifted by
/// `c`. The radical collapses to 1/2 when pair A decouples
/// (`Gamma_A mu = 0`), giving back an exact oscillator ladder.
pub fn emergent_spectrum(
    cp: &CompositeParams,
    mu: f64,
    shift: f64,
    n_max: u32,
) -> Result<SpectrumResult> {
    if !shift.is_finite() {
        return Err(Error::Domain(format!(
            "emergent shift must be finite, got {shift}"
        )));
    }
    let radical = emergent_radical(cp, mu)?;
    Ok(radial_ladder(cp.b.omega(), radical, shift, n_max))
}

/// Two-mode spectrum with both radicals active:
///
/// ```text
/// E = Omega (2(n_a + n_b) + 2 + s1 sqrt(1/4 - 4 mu^2)
///                              + s2 sqrt(1/4 - (2 mu ratio)^2))
/// ```
///
/// over all four sign choices. Real couplings keep both radicands in
/// `[0, 1/4]`, so every branch is admissible; the domain bounds
/// `|mu| <= 1/4`, `|ratio| <= 1` are enforced, not clamped.
pub fn sw_spectrum(
    m: f64,
    omega: f64,
    mu: f64,
    gamma_ratio: f64,
    n_max: u32,
) -> Result<SpectrumResult> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "mass must be positive and finite, got {m}"
        )));
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "frequency must be positive and finite, got {omega}"
        )));
    }
    if !(-0.25..=0.25).contains(&mu) {
        return Err(Error::Domain(format!(
            "coupling mu must lie in [-1/4, 1/4], got {mu}"
        )));
    }
    if !(-1.0..=1.0).contains(&gamma_ratio) {
        return Err(Error::Domain(format!(
            "rate ratio must lie in [-1, 1], got {gamma_ratio}"
        )));
    }
    let rad1 = (0.25 - 4.0 * mu * mu).sqrt();
    let w2 = 2.0 * mu * gamma_ratio;
    let rad2 = (0.25 - w2 * w2).sqrt();

    let mut levels = Vec::new();
    for (label, s1, s2) in [
        ("--", -1.0, -1.0),
        ("-+", -1.0, 1.0),
        ("+-", 1.0, -1.0),
        ("++", 1.0, 1.0),
    ] {
        let mut branch_levels = Vec::new();
        for n_a in 0..=n_max {
            for n_b in 0..=n_max {
                let factor = (2 * (n_a + n_b) + 2) as f64 + s1 * rad1 + s2 * rad2;
                branch_levels.push(Level {
                    n: n_a,
                    n_b: Some(n_b),
                    branch: label,
                    energy: omega * factor,
                });
            }
        }
        branch_levels.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then(a.n.cmp(&b.n))
                .then(a.n_b.cmp(&b.n_b))
        });
        levels.extend(branch_levels);
    }
    Ok(SpectrumResult {
        levels,
        validity: Validity::AttractiveBothBranches,
        warnings: Vec::new(),
    })
}

/// Spectrum of two uncoupled pairs, the far-from-constraint reference:
/// `E = Omega_A (n_a + 1/2) + Omega_B (n_b + 1/2)`.
pub fn asymptotic_spectrum(cp: &CompositeParams, n_max: u32) -> SpectrumResult {
    let mut levels = Vec::new();
    for n_a in 0..=n_max {
        for n_b in 0..=n_max {
            levels.push(Level {
                n: n_a,
                n_b: Some(n_b),
                branch: "",
                energy: cp.a.omega() * (n_a as f64 + 0.5) + cp.b.omega() * (n_b as f64 + 0.5),
            });
        }
    }
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.n.cmp(&b.n))
            .then(a.n_b.cmp(&b.n_b))
    });
    SpectrumResult {
        levels,
        validity: Validity::Valid,
        warnings: Vec::new(),
    }
}

/// Coupling constant: either an ordinary real value or `i` times a real
/// magnitude. The discrete-series labels force the imaginary case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu {
    Real(f64),
    Imaginary(f64),
}

/// Discrete-series label `(j, l)` with `j` half-integer and `l = |j| + m`.
/// The natural coupling attached to the label is `mu = i (l + 1/2)`; a real
/// override is available for probing the attractive regime with the same
/// bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationLabel {
    twice_j: i32,
    m: u32,
    mu_override: Option<f64>,
}

impl RepresentationLabel {
    /// Build from twice the spin (so half-integers stay exact) and the
    /// ladder offset `m >= 0`.
    pub fn new(twice_j: i32, m: u32) -> Self {
        Self {
            twice_j,
            m,
            mu_override: None,
        }
    }

    pub fn with_real_mu(twice_j: i32, m: u32, mu: f64) -> Self {
        Self {
            twice_j,
            m,
            mu_override: Some(mu),
        }
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn l(&self) -> f64 {
        self.j().abs() + self.m as f64
    }

    pub fn mu(&self) -> Mu {
        match self.mu_override {
            Some(v) => Mu::Real(v),
            None => Mu::Imaginary(self.l() + 0.5),
        }
    }

    /// The constant shift `2 Omega_A j` the label contributes to the
    /// emergent ladder.
    pub fn c_shift(&self, omega_a: f64) -> f64 {
        2.0 * omega_a * self.j()
    }
}

/// Translate a label into singular-oscillator coefficients for pair B:
/// `N^2 = 1/m_B`, `Q^2 = m_B Omega_B^2`, and the ratio from the radical,
/// with imaginary `mu` flipping its sign:
///
/// ```text
/// (R/N)^2 = 1/4 - (2 Gamma_A mu / Gamma_B)^2        real mu
/// (R/N)^2 = 1/4 + (2 Gamma_A |mu| / Gamma_B)^2      imaginary mu
/// ```
///
/// Imaginary couplings therefore always land in the repulsive regime where
/// the numerical oracle applies.
pub fn isotonic_from_label(
    cp: &CompositeParams,
    label: &RepresentationLabel,
) -> Result<IsotonicParams> {
    if cp.b.big_gamma() == 0.0 {
        return Err(Error::ZeroGammaB);
    }
    let n_coef = (1.0 / cp.b.m()).sqrt();
    let q_coef = cp.b.m().sqrt() * cp.b.omega();
    let ratio_sq = match label.mu() {
        Mu::Real(v) => {
            let w = 2.0 * cp.a.big_gamma() * v / cp.b.big_gamma();
            let rs = 0.25 - w * w;
            if rs < 0.0 {
                return Err(Error::RadicalDomain(rs));
            }
            rs
        }
        Mu::Imaginary(v) => {
            let w = 2.0 * cp.a.big_gamma() * v.abs() / cp.b.big_gamma();
            0.25 + w * w
        }
    };
    IsotonicParams::new(n_coef, q_coef, n_coef * ratio_sq.sqrt())
}

/// How the spectrum ends: only simple Dirichlet walls are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Dirichlet,
}

/// Uniform radial grid on `(0, r_max)` with the endpoints excluded by the
/// Dirichlet condition. Choose `r_max` comfortably past the classical
/// turning point of the highest level wanted (twice is a good rule).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec", into = "RawGridSpec")]
pub struct GridSpec {
    r_max: f64,
    n_points: usize,
    boundary: Boundary,
}

impl GridSpec {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if n_points < 100 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 100 interior points, got {n_points}"
            )));
        }
        Ok(Self {
            r_max,
            n_points,
            boundary: Boundary::Dirichlet,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Interior spacing `h = r_max / (n_points + 1)`.
    pub fn spacing(&self) -> f64 {
        self.r_max / (self.n_points as f64 + 1.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridSpec {
    r_max: f64,
    n_points: usize,
    #[serde(default)]
    boundary: Boundary,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.r_max, raw.n_points)
    }
}

impl From<GridSpec> for RawGridSpec {
    fn from(g: GridSpec) -> Self {
        Self {
            r_max: g.r_max,
            n_points: g.n_points,
            boundary: g.boundary,
        }
    }
}

/// Relative discretization error above which the oracle refuses to answer.
const RICHARDSON_LIMIT: f64 = 1e-2;

fn fd_eigenvalues(params: &IsotonicParams, r_max: f64, n_points: usize, k: usize) -> Vec<f64> {
    let h = r_max / (n_points as f64 + 1.0);
    let kinetic = params.n_coef * params.n_coef / (h * h);
    let half_q_sq = 0.5 * params.q_coef * params.q_coef;
    let centrifugal = 0.5 * (params.r_coef * params.r_coef - 0.25 * params.n_coef * params.n_coef);
    let mut diag = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let r = (i as f64 + 1.0) * h;
        diag.push(kinetic + half_q_sq * r * r + centrifugal / (r * r));
    }
    let off = vec![-0.5 * kinetic; n_points.saturating_sub(1)];
    lowest_eigenvalues(&diag, &off, k)
}

/// Lowest `k` eigenvalues of the singular oscillator by second-order finite
/// differences and Sturm bisection, with a Richardson error estimate from a
/// half-resolution grid. Only the repulsive regime `R/N >= 1/2` is
/// supported: there the wavefunction vanishes fast enough at the origin for
/// the Dirichlet wall to be the correct boundary condition (at exactly 1/2
/// the wall selects the odd sector, which is the `+` branch).
pub fn solve_radial(params: &IsotonicParams, grid: &GridSpec, k: usize) -> Result<Vec<f64>> {
    let ratio = params.ratio();
    if ratio < 0.5 {
        return Err(Error::Domain(format!(
            "numerical oracle requires the repulsive regime R/N >= 1/2, got {ratio}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParams("need at least one level".into()));
    }
    let n_half = (grid.n_points() - 1) / 2;
    if k > n_half {
        return Err(Error::InvalidParams(format!(
            "{k} levels exceed what a {}-point grid can certify",
            grid.n_points()
        )));
    }

    let fine = fd_eigenvalues(params, grid.r_max(), grid.n_points(), k);
    let coarse = fd_eigenvalues(params, grid.r_max(), n_half, k);
    let h_fine = grid.r_max() / (grid.n_points() as f64 + 1.0);
    let h_coarse = grid.r_max() / (n_half as f64 + 1.0);
    let factor = (h_coarse / h_fine).powi(2);
    for (level, (lo, hi)) in fine.iter().zip(&coarse).enumerate() {
        let estimate = (hi - lo).abs() / (factor - 1.0) / lo.abs().max(1e-300);
        if estimate > RICHARDSON_LIMIT {
            return Err(Error::GridTooCoarse { level, estimate });
        }
    }
    Ok(fine)
}
