//! Parameters, phase-space states and the maps between coordinate charts.
//!
//! One "pair" is a damped oscillator `m x'' + gamma x' + kappa x = 0` together
//! with its amplified mirror `m y'' - gamma y' + kappa y = 0`. Three charts
//! describe the same four-dimensional phase space:
//!
//! * physical `(x, y, p_x, p_y)`, where `p_x` is conjugate to `x`;
//! * rotated `(x1, x2, p1, p2)` with `x1 = (x + y)/sqrt(2)`,
//!   `x2 = (x - y)/sqrt(2)` and the same rotation on the momenta;
//! * hyperbolic `(r, u, p_r, p_u)` with `x1 = r cosh u`, `x2 = r sinh u`,
//!   defined on the wedge `x1^2 > x2^2`.
//!
//! All maps are cotangent lifts of the point transformations, so they are
//! canonical by construction; the momentum parts are derived from the inverse
//! Jacobians, not guessed.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mass, damping and stiffness of one pair, with the derived frequency
/// `Omega = sqrt(kappa/m - (gamma/2m)^2)` and rate `Gamma = gamma/(2m)` cached.
///
/// Only underdamped pairs are representable: construction fails unless
/// `kappa > gamma^2/(4m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBatemanParams", into = "RawBatemanParams")]
pub struct BatemanParams {
    m: f64,
    gamma: f64,
    kappa: f64,
    omega: f64,
    big_gamma: f64,
}

impl BatemanParams {
    pub fn new(m: f64, gamma: f64, kappa: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "mass must be positive and finite, got {m}"
            )));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "damping coefficient must be nonnegative and finite, got {gamma}"
            )));
        }
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "stiffness must be positive and finite, got {kappa}"
            )));
        }
        let big_gamma = gamma / (2.0 * m);
        let omega_sq = kappa / m - big_gamma * big_gamma;
        if omega_sq <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "pair is not underdamped: kappa = {kappa} but gamma^2/(4m) = {}",
                gamma * gamma / (4.0 * m)
            )));
        }
        Ok(Self {
            m,
            gamma,
            kappa,
            omega: omega_sq.sqrt(),
            big_gamma,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Oscillation frequency of the underdamped pair.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Damping rate `gamma/(2m)`.
    pub fn big_gamma(&self) -> f64 {
        self.big_gamma
    }

    /// Oscillation period `2 pi / Omega`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBatemanParams {
    m: f64,
    gamma: f64,
    kappa: f64,
}

impl TryFrom<RawBatemanParams> for BatemanParams {
    type Error = Error;

    fn try_from(raw: RawBatemanParams) -> Result<Self> {
        Self::new(raw.m, raw.gamma, raw.kappa)
    }
}

impl From<BatemanParams> for RawBatemanParams {
    fn from(p: BatemanParams) -> Self {
        Self {
            m: p.m,
            gamma: p.gamma,
            kappa: p.kappa,
        }
    }
}

/// Two pairs A and B plus the global normalizations `Omega` and `Gamma` used
/// by the two-pair constraint machinery.
///
/// The global charge is `J = (Gamma_A J2_A + Gamma_B J2_B)/Gamma` and the
/// two-pair Hamiltonian is written as `2(Omega C - Gamma J)`; the
/// normalizations fix how the per-pair quantities are pooled. Both must be
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeParams {
    pub a: BatemanParams,
    pub b: BatemanParams,
    omega: f64,
    gamma: f64,
}

impl CompositeParams {
    pub fn new(a: BatemanParams, b: BatemanParams, omega: f64, gamma: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "global frequency normalization must be positive, got {omega}"
            )));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "global damping normalization must be positive, got {gamma}"
            )));
        }
        Ok(Self { a, b, omega, gamma })
    }

    /// Arithmetic-mean normalizations, the default when nothing else is
    /// specified: `Omega = (Omega_A + Omega_B)/2`, `Gamma = (Gamma_A + Gamma_B)/2`.
    pub fn with_mean_normalizations(a: BatemanParams, b: BatemanParams) -> Result<Self> {
        Self::new(
            a,
            b,
            0.5 * (a.omega() + b.omega()),
            0.5 * (a.big_gamma() + b.big_gamma()),
        )
    }

    pub fn omega_global(&self) -> f64 {
        self.omega
    }

    pub fn gamma_global(&self) -> f64 {
        self.gamma
    }
}

/// State of one pair in the physical chart: damped `x`, amplified `y`.
///
/// `p_x` is conjugate to `x` and `p_y` to `y`. Note that the Lagrangian of
/// the doubled system couples the two: `p_x = m y' - (gamma/2) y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseStateXY {
    pub x: f64,
    pub y: f64,
    pub p_x: f64,
    pub p_y: f64,
}

/// State in the rotated chart that diagonalizes the doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseStateRot {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// State in hyperbolic polar coordinates on the wedge `x1^2 > x2^2`.
///
/// `r` carries the sign of `x1`; `u` is the hyperbolic angle. The conjugate
/// momentum `p_u` is twice the charge `J2`, so it is conserved by the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseStateHyp {
    pub r: f64,
    pub u: f64,
    pub p_r: f64,
    pub p_u: f64,
}

/// Identifies which chart a state or trajectory lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Xy,
    Rot,
    Hyp,
}

impl Chart {
    /// Column names used in CSV headers, momenta after positions.
    pub fn field_names(&self) -> [&'static str; 4] {
        match self {
            Chart::Xy => ["x", "y", "p_x", "p_y"],
            Chart::Rot => ["x1", "x2", "p1", "p2"],
            Chart::Hyp => ["r", "u", "p_r", "p_u"],
        }
    }
}

/// Access to the flat coordinate layout `[q1, q2, pi1, pi2]` of a chart, with
/// `pi1` conjugate to `q1` and `pi2` to `q2`. Finite-difference brackets and
/// the integrators are generic over this.
pub trait CanonicalState: Copy {
    const CHART: Chart;

    fn to_array(&self) -> [f64; 4];
    fn from_array(a: [f64; 4]) -> Self;
}

impl CanonicalState for PhaseStateXY {
    const CHART: Chart = Chart::Xy;

    fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.p_x, self.p_y]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            p_x: a[2],
            p_y: a[3],
        }
    }
}

impl CanonicalState for PhaseStateRot {
    const CHART: Chart = Chart::Rot;

    fn to_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.p1, self.p2]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            x1: a[0],
            x2: a[1],
            p1: a[2],
            p2: a[3],
        }
    }
}

impl CanonicalState for PhaseStateHyp {
    const CHART: Chart = Chart::Hyp;

    fn to_array(&self) -> [f64; 4] {
        [self.r, self.u, self.p_r, self.p_u]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            r: a[0],
            u: a[1],
            p_r: a[2],
            p_u: a[3],
        }
    }
}

/// Rotate the physical chart into the diagonalizing chart. Linear and
/// orthogonal, hence canonical; total on phase space.
pub fn to_rotated(s: &PhaseStateXY) -> PhaseStateRot {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    PhaseStateRot {
        x1: c * (s.x + s.y),
        x2: c * (s.x - s.y),
        p1: c * (s.p_x + s.p_y),
        p2: c * (s.p_x - s.p_y),
    }
}

/// Inverse of [`to_rotated`]; the rotation is its own inverse up to swapping
/// the roles of the two coordinate pairs.
pub fn from_rotated(s: &PhaseStateRot) -> PhaseStateXY {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    PhaseStateXY {
        x: c * (s.x1 + s.x2),
        y: c * (s.x1 - s.x2),
        p_x: c * (s.p1 + s.p2),
        p_y: c * (s.p1 - s.p2),
    }
}

/// Map the rotated chart to hyperbolic polar coordinates.
///
/// Defined only on the wedge `x1^2 > x2^2`; elsewhere the hyperbolic radius
/// would be imaginary and a [`Error::ChartDomain`] is returned. `r` takes the
/// sign of `x1` so both wedge components are covered.
pub fn to_hyperbolic(s: &PhaseStateRot) -> Result<PhaseStateHyp> {
    let r_sq = s.x1 * s.x1 - s.x2 * s.x2;
    if r_sq <= 0.0 {
        return Err(Error::ChartDomain(format!(
            "hyperbolic chart needs x1^2 > x2^2, got x1 = {}, x2 = {}",
            s.x1, s.x2
        )));
    }
    let r = r_sq.sqrt().copysign(s.x1);
    let u = (s.x2 / s.x1).atanh();
    let (sh, ch) = (u.sinh(), u.cosh());
    Ok(PhaseStateHyp {
        r,
        u,
        p_r: s.p1 * ch + s.p2 * sh,
        p_u: r * (s.p1 * sh + s.p2 * ch),
    })
}

/// Inverse of [`to_hyperbolic`]. Requires `r != 0`.
pub fn from_hyperbolic(s: &PhaseStateHyp) -> Result<PhaseStateRot> {
    if s.r == 0.0 || !s.r.is_finite() {
        return Err(Error::ChartDomain(format!(
            "hyperbolic radius must be finite and nonzero, got {}",
            s.r
        )));
    }
    let (sh, ch) = (s.u.sinh(), s.u.cosh());
    Ok(PhaseStateRot {
        x1: s.r * ch,
        x2: s.r * sh,
        p1: s.p_r * ch - (s.p_u / s.r) * sh,
        p2: (s.p_u / s.r) * ch - s.p_r * sh,
    })
}
