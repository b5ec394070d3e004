//! Equations of motion in each chart, time integration, and the closed-form
//! solution used as an oracle.
//!
//! The physical-chart Hamiltonian couples the damped coordinate to the
//! momentum of its amplified mirror, so Hamilton's equations reproduce the
//! pair `m x'' + gamma x' + kappa x = 0`, `m y'' - gamma y' + kappa y = 0`.
//! Integration is always carried out in the physical or rotated chart, which
//! are globally regular; hyperbolic trajectories are produced by mapping
//! afterwards, avoiding the `r = 0` coordinate singularity.
//!
//! The system is linear and small, so fixed-step RK4 is the default; an
//! adaptive RK45 (Dormand-Prince) is available for strongly damped runs.
//! Conservation of `H`, `C`, `J2` is checked after the fact, not enforced.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::algebra::ChargeBearing;
use crate::phase::{
    BatemanParams, CanonicalState, Chart, PhaseStateHyp, PhaseStateRot, PhaseStateXY,
};
use crate::{Error, Result};

/// Time derivative of a physical-chart state.
///
/// ```text
/// x' = p_y/m - Gamma x        p_x' =  Gamma p_x - m Omega^2 y
/// y' = p_x/m + Gamma y        p_y' = -Gamma p_y - m Omega^2 x
/// ```
pub fn eom_xy(p: &BatemanParams, s: &PhaseStateXY) -> PhaseStateXY {
    let m = p.m();
    let gg = p.big_gamma();
    let k_eff = m * p.omega() * p.omega();
    PhaseStateXY {
        x: s.p_y / m - gg * s.x,
        y: s.p_x / m + gg * s.y,
        p_x: gg * s.p_x - k_eff * s.y,
        p_y: -gg * s.p_y - k_eff * s.x,
    }
}

/// Time derivative of a rotated-chart state.
pub fn eom_rot(p: &BatemanParams, s: &PhaseStateRot) -> PhaseStateRot {
    let m = p.m();
    let gg = p.big_gamma();
    let k_eff = m * p.omega() * p.omega();
    PhaseStateRot {
        x1: s.p1 / m - gg * s.x2,
        x2: -s.p2 / m - gg * s.x1,
        p1: gg * s.p2 - k_eff * s.x1,
        p2: gg * s.p1 + k_eff * s.x2,
    }
}

/// Time derivative of a hyperbolic-chart state, from
/// `H = (p_r^2 - p_u^2/r^2)/(2m) + m Omega^2 r^2 / 2 - Gamma p_u`.
///
/// `p_u` is manifestly conserved. Fails on `r = 0`.
pub fn eom_hyp(p: &BatemanParams, s: &PhaseStateHyp) -> Result<PhaseStateHyp> {
    if s.r == 0.0 {
        return Err(Error::ChartDomain(
            "equations of motion undefined at r = 0".into(),
        ));
    }
    let m = p.m();
    let r_sq = s.r * s.r;
    Ok(PhaseStateHyp {
        r: s.p_r / m,
        u: -s.p_u / (m * r_sq) - p.big_gamma(),
        p_r: -s.p_u * s.p_u / (m * r_sq * s.r) - m * p.omega() * p.omega() * s.r,
        p_u: 0.0,
    })
}

/// States that can be advanced in time directly. Only the two globally
/// regular charts qualify.
pub trait Integrable: CanonicalState {
    fn time_derivative(p: &BatemanParams, s: &Self) -> Self;
}

impl Integrable for PhaseStateXY {
    fn time_derivative(p: &BatemanParams, s: &Self) -> Self {
        eom_xy(p, s)
    }
}

impl Integrable for PhaseStateRot {
    fn time_derivative(p: &BatemanParams, s: &Self) -> Self {
        eom_rot(p, s)
    }
}

/// Integration method. For `Rk4` the `dt` field of [`IntegratorSpec`] is the
/// fixed step; for `Rk45` it is the error tolerance (used both absolutely and
/// relatively, 1e-10 recommended) and steps adapt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

/// How to integrate: method, step size or tolerance, final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntegratorSpec", into = "RawIntegratorSpec")]
pub struct IntegratorSpec {
    method: Method,
    dt: f64,
    t_end: f64,
}

impl IntegratorSpec {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "integrator dt must be positive and finite, got {dt}"
            )));
        }
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "integrator t_end must be positive and finite, got {t_end}"
            )));
        }
        Ok(Self { method, dt, t_end })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegratorSpec {
    method: Method,
    dt: f64,
    t_end: f64,
}

impl TryFrom<RawIntegratorSpec> for IntegratorSpec {
    type Error = Error;

    fn try_from(raw: RawIntegratorSpec) -> Result<Self> {
        Self::new(raw.method, raw.dt, raw.t_end)
    }
}

impl From<IntegratorSpec> for RawIntegratorSpec {
    fn from(s: IntegratorSpec) -> Self {
        Self {
            method: s.method,
            dt: s.dt,
            t_end: s.t_end,
        }
    }
}

/// A time-ordered sequence of states in one chart, sampled at the
/// integrator's accepted steps.
#[derive(Debug, Clone)]
pub struct Trajectory<S: CanonicalState> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S: CanonicalState> Trajectory<S> {
    pub fn chart(&self) -> Chart {
        S::CHART
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Relative drifts of the conserved quantities along a trajectory, measured
/// against the magnitude of the initial value (absolute when that value is
/// zero).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservationReport {
    #[serde(rename = "H_drift")]
    pub h_drift: f64,
    #[serde(rename = "C_drift")]
    pub c_drift: f64,
    #[serde(rename = "J2_drift")]
    pub j2_drift: f64,
}

impl<S: ChargeBearing> Trajectory<S> {
    /// Maximum drift of `H`, `C`, `J2` over the trajectory.
    pub fn conservation(&self, p: &BatemanParams) -> ConservationReport {
        let first = self.states[0].charge_set(p);
        let scale = |v: f64| if v.abs() > 0.0 { v.abs() } else { 1.0 };
        let (sh, sc, sj) = (scale(first.h), scale(first.c), scale(first.j2));
        let mut report = ConservationReport {
            h_drift: 0.0,
            c_drift: 0.0,
            j2_drift: 0.0,
        };
        for s in &self.states {
            let ch = s.charge_set(p);
            report.h_drift = report.h_drift.max((ch.h - first.h).abs() / sh);
            report.c_drift = report.c_drift.max((ch.c - first.c).abs() / sc);
            report.j2_drift = report.j2_drift.max((ch.j2 - first.j2).abs() / sj);
        }
        report
    }

    /// Write the trajectory as CSV: a chart-tag comment line, a header, then
    /// one row per sample with the charges appended. Floats carry 17
    /// significant digits so rereads are exact.
    pub fn write_csv<W: Write>(&self, p: &BatemanParams, w: &mut W) -> io::Result<()> {
        let names = S::CHART.field_names();
        writeln!(
            w,
            "# chart={}",
            match S::CHART {
                Chart::Xy => "xy",
                Chart::Rot => "rot",
                Chart::Hyp => "hyp",
            }
        )?;
        writeln!(
            w,
            "t,{},{},{},{},H,C,J2",
            names[0], names[1], names[2], names[3]
        )?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let a = s.to_array();
            let ch = s.charge_set(p);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, a[0], a[1], a[2], a[3], ch.h, ch.c, ch.j2
            )?;
        }
        Ok(())
    }
}

/// Integrate from `s0` for `spec.t_end()`. The chart is fixed by the state
/// type. RK4 lands within one step of `t_end`; RK45 hits it exactly and
/// fails with [`Error::StepFailure`] if the controller underflows.
pub fn integrate<S: Integrable>(
    p: &BatemanParams,
    s0: &S,
    spec: &IntegratorSpec,
) -> Result<Trajectory<S>> {
    match spec.method() {
        Method::Rk4 => Ok(integrate_rk4(p, s0, spec.dt(), spec.t_end())),
        Method::Rk45 => integrate_rk45(p, s0, spec.dt(), spec.t_end()),
    }
}

fn add<S: CanonicalState>(a: &S, b: &S, scale: f64) -> S {
    let mut out = a.to_array();
    let vb = b.to_array();
    for i in 0..4 {
        out[i] += scale * vb[i];
    }
    S::from_array(out)
}

fn integrate_rk4<S: Integrable>(p: &BatemanParams, s0: &S, dt: f64, t_end: f64) -> Trajectory<S> {
    let n_steps = ((t_end / dt) - 1e-12).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(*s0);
    let mut s = *s0;
    for i in 1..=n_steps {
        let k1 = S::time_derivative(p, &s);
        let k2 = S::time_derivative(p, &add(&s, &k1, 0.5 * dt));
        let k3 = S::time_derivative(p, &add(&s, &k2, 0.5 * dt));
        let k4 = S::time_derivative(p, &add(&s, &k3, dt));
        let mut arr = s.to_array();
        let (a1, a2, a3, a4) = (k1.to_array(), k2.to_array(), k3.to_array(), k4.to_array());
        for j in 0..4 {
            arr[j] += dt / 6.0 * (a1[j] + 2.0 * a2[j] + 2.0 * a3[j] + a4[j]);
        }
        s = S::from_array(arr);
        times.push(i as f64 * dt);
        states.push(s);
    }
    Trajectory { times, states }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate_rk45<S: Integrable>(
    p: &BatemanParams,
    s0: &S,
    tol: f64,
    t_end: f64,
) -> Result<Trajectory<S>> {
    let mut times = vec![0.0];
    let mut states = vec![*s0];
    let mut s = *s0;
    let mut t = 0.0;
    let mut h = (t_end / 100.0).min(0.1);
    let h_min = t_end * 1e-14;

    while t < t_end {
        if h < h_min {
            return Err(Error::StepFailure { t, dt: h });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k: [[f64; 4]; 7] = [[0.0; 4]; 7];
        k[0] = S::time_derivative(p, &s).to_array();
        for stage in 1..7 {
            let mut arr = s.to_array();
            for j in 0..stage {
                let a = A[stage - 1][j];
                if a != 0.0 {
                    for c in 0..4 {
                        arr[c] += h * a * k[j][c];
                    }
                }
            }
            k[stage] = S::time_derivative(p, &S::from_array(arr)).to_array();
        }
        let base = s.to_array();
        let mut y5 = base;
        let mut y4 = base;
        for c in 0..4 {
            for j in 0..7 {
                y5[c] += h * B5[j] * k[j][c];
                y4[c] += h * B4[j] * k[j][c];
            }
        }
        let mut err_sq = 0.0;
        for c in 0..4 {
            let magnitude = base[c].abs().max(y5[c].abs());
            let scale = tol + tol * magnitude;
            // The embedded estimate cannot certify errors below the rounding
            // floor of the state itself; flooring it keeps an unachievable
            // tolerance from being "met" by cancellation to exactly zero.
            let resolution = f64::EPSILON * magnitude;
            let e = (y5[c] - y4[c]).abs().max(resolution) / scale;
            err_sq += e * e;
        }
        let err = (err_sq / 4.0).sqrt();

        if err <= 1.0 {
            t += h;
            s = S::from_array(y5);
            times.push(t);
            states.push(s);
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(Trajectory { times, states })
}

/// Closed-form solution of the physical chart at time `t` (valid for any
/// underdamped parameters, negative `t` included):
///
/// ```text
/// x(t) = e^(-Gamma t) [x0 cos(Omega t) + ((v0 + Gamma x0)/Omega) sin(Omega t)]
/// y(t) = e^(+Gamma t) [y0 cos(Omega t) + ((w0 - Gamma y0)/Omega) sin(Omega t)]
/// ```
///
/// with the initial velocities `v0 = (p_y0 - (gamma/2) x0)/m` and
/// `w0 = (p_x0 + (gamma/2) y0)/m` read off the momentum definitions, and the
/// momenta reconstructed the same way at time `t`.
pub fn analytic_xy(p: &BatemanParams, s0: &PhaseStateXY, t: f64) -> PhaseStateXY {
    let m = p.m();
    let om = p.omega();
    let gg = p.big_gamma();
    let half_gamma = p.gamma() / 2.0;

    let v0 = (s0.p_y - half_gamma * s0.x) / m;
    let w0 = (s0.p_x + half_gamma * s0.y) / m;

    let (sin, cos) = (om * t).sin_cos();
    let env_x = (-gg * t).exp();
    let env_y = (gg * t).exp();

    let bx = (v0 + gg * s0.x) / om;
    let by = (w0 - gg * s0.y) / om;

    let x = env_x * (s0.x * cos + bx * sin);
    let y = env_y * (s0.y * cos + by * sin);
    let x_dot = -gg * x + om * env_x * (bx * cos - s0.x * sin);
    let y_dot = gg * y + om * env_y * (by * cos - s0.y * sin);

    PhaseStateXY {
        x,
        y,
        p_x: m * y_dot - half_gamma * y,
        p_y: m * x_dot + half_gamma * x,
    }
}
