//! Time integration of the rigid, accelerated-pivot, and elastic systems,
//! with per-sample energy diagnostics.
//!
//! Three schemes are offered:
//! - `Rk4`: the classical fixed-step fourth-order Runge-Kutta method.
//! - `Leapfrog`: position-Verlet. Symplectic and time-reversible, so the
//!   energy error stays bounded instead of drifting; restricted to the
//!   constant-speed rigid system, the only one here whose acceleration
//!   depends on the angle alone.
//! - `Adaptive`: the Dormand-Prince 5(4) embedded pair with step-size
//!   control; the fifth-order solution is propagated.
//!
//! Divergence policy: a non-finite state or diagnostic aborts integration and
//! returns the partial trajectory with an `Aborted` status rather than an
//! error, since the elastic system can legitimately reach the poles of its
//! equations. Every emitted sample is fully finite.

use crate::analysis::first_integral;
use crate::error::{Error, Result};
use crate::model::{
    elastic_energy, embed, embed_elastic, eom_accelerated, eom_elastic, eom_rigid, flat_lagrangian,
    hamiltonian, ElasticState, EmbeddedPoint, PendulumParams, PivotMotion, RigidState,
};

/// Integration scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Leapfrog,
    Adaptive,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "leapfrog" => Ok(Method::Leapfrog),
            "adaptive" => Ok(Method::Adaptive),
            other => Err(Error::InvalidParam {
                name: "integrator",
                reason: format!("unknown method {other:?}; expected rk4, leapfrog, or adaptive"),
            }),
        }
    }
}

/// Integration plan: scheme, step size (initial step for `Adaptive`),
/// tolerances (adaptive only), duration, and output stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub sample_stride: usize,
}

impl IntegratorSpec {
    /// Builds a spec with default tolerances (rel 1e-6, abs 1e-9) and
    /// stride 1.
    pub fn new(method: Method, dt: f64, t_end: f64) -> Result<Self> {
        let spec = IntegratorSpec {
            method,
            dt,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            t_end,
            sample_stride: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sample_stride(mut self, stride: usize) -> Result<Self> {
        self.sample_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParam {
                name: "dt",
                reason: format!("must be finite and positive, got {}", self.dt),
            });
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParam {
                name: "t_end",
                reason: format!("must be finite and positive, got {}", self.t_end),
            });
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0)
            || !(self.abs_tol.is_finite() && self.abs_tol > 0.0)
        {
            return Err(Error::InvalidParam {
                name: "tolerances",
                reason: format!(
                    "rel_tol and abs_tol must be finite and positive, got {} / {}",
                    self.rel_tol, self.abs_tol
                ),
            });
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParam {
                name: "sample_stride",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One stored trajectory point with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
    /// Conserved energy: the Hamiltonian for the rigid system (flat-limit
    /// kinetic energy when K = 0), the total energy for the elastic one.
    /// Evaluated with the instantaneous pivot speed.
    pub energy: f64,
    /// The conserved quadratic 2 zeta_dot^2 - K v^2 cos(2 zeta).
    pub first_integral: f64,
    /// Ambient pivot/mass coordinates, filled by `attach_embedding`.
    pub embedded: Option<(EmbeddedPoint, EmbeddedPoint)>,
}

/// Whether integration ran to completion or stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    /// Integration stopped at time `t`; the samples up to that point stand.
    Aborted {
        t: f64,
        reason: String,
    },
}

/// Time-ordered samples plus the completion status.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
    pub status: TrajectoryStatus,
}

impl<S> Trajectory<S> {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, TrajectoryStatus::Completed)
    }

    pub fn final_sample(&self) -> Option<&Sample<S>> {
        self.samples.last()
    }
}

fn non_finite(t: f64) -> Error {
    Error::NonFinite {
        what: "integration state",
        t,
    }
}

/// One classical RK4 step of y' = rhs(t, y).
pub fn step_rk4<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    dt: f64,
) -> Result<[f64; N]> {
    let shift = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * dt, &shift(y, &k1, 0.5 * dt));
    let k3 = rhs(t + 0.5 * dt, &shift(y, &k2, 0.5 * dt));
    let k4 = rhs(t + dt, &shift(y, &k3, dt));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(non_finite(t));
    }
    Ok(out)
}

/// One position-Verlet (leapfrog) step of x_ddot = accel(x):
/// half-drift, kick, half-drift. Symmetric in dt, hence time-reversible:
/// stepping with -dt undoes the step up to round-off.
pub fn step_leapfrog(accel: impl Fn(f64) -> f64, x: f64, v: f64, dt: f64) -> Result<(f64, f64)> {
    let x_half = x + 0.5 * dt * v;
    let v_next = v + dt * accel(x_half);
    let x_next = x_half + 0.5 * dt * v_next;
    if !(x_next.is_finite() && v_next.is_finite()) {
        return Err(non_finite(0.0));
    }
    Ok((x_next, v_next))
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Result of one accepted adaptive step.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveStep<const N: usize> {
    pub y: [f64; N],
    /// Step actually taken.
    pub dt_used: f64,
    /// Controller's suggestion for the next step.
    pub dt_next: f64,
}

/// One Dormand-Prince 5(4) step with rejection/retry. Shrinks the step
/// until the weighted error estimate passes, erroring out if the step
/// underflows; the fifth-order solution is returned.
pub fn step_adaptive<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    dt_init: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<AdaptiveStep<N>> {
    const SAFETY: f64 = 0.9;
    const SHRINK_MIN: f64 = 0.2;
    const GROW_MAX: f64 = 5.0;
    let dt_min = 1e-14 * t.abs().max(1.0);

    let mut dt = dt_init;
    loop {
        let mut k = [[0.0; N]; 7];
        k[0] = rhs(t, y);
        for stage in 1..7 {
            let mut ys = *y;
            for j in 0..stage {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += dt * a * k[j][i];
                    }
                }
            }
            k[stage] = rhs(t + DP_C[stage] * dt, &ys);
        }

        let mut y5 = *y;
        let mut y4 = *y;
        for j in 0..7 {
            for i in 0..N {
                y5[i] += dt * DP_B5[j] * k[j][i];
                y4[i] += dt * DP_B4[j] * k[j][i];
            }
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / scale;
            err_sq += e * e;
        }
        let err_norm = (err_sq / N as f64).sqrt();

        if err_norm.is_finite() && err_norm <= 1.0 && y5.iter().all(|x| x.is_finite()) {
            let grow = if err_norm == 0.0 {
                GROW_MAX
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(SHRINK_MIN, GROW_MAX)
            };
            return Ok(AdaptiveStep {
                y: y5,
                dt_used: dt,
                dt_next: dt * grow,
            });
        }

        let shrink = if err_norm.is_finite() {
            (SAFETY * err_norm.powf(-0.2)).clamp(SHRINK_MIN, 1.0)
        } else {
            SHRINK_MIN
        };
        dt *= shrink;
        if dt < dt_min {
            return Err(Error::StepUnderflow { t, dt });
        }
    }
}

/// Step count and exact-landing bookkeeping for fixed-step methods: if
/// t_end is an integer multiple of dt (within 1e-9 relative) the grid is
/// uniform; otherwise a shorter final step lands on t_end.
fn fixed_step_plan(dt: f64, t_end: f64) -> (usize, Option<f64>) {
    let quotient = t_end / dt;
    let rounded = quotient.round();
    if rounded >= 1.0 && (rounded * dt - t_end).abs() <= 1e-9 * t_end.max(1.0) {
        (rounded as usize, None)
    } else {
        let full = quotient.floor() as usize;
        let remainder = t_end - full as f64 * dt;
        if remainder > 1e-12 * t_end.max(1.0) {
            (full, Some(remainder))
        } else {
            (full.max(1), None)
        }
    }
}

fn rigid_diagnostics(p: &PendulumParams, v: f64, s: &RigidState) -> (f64, f64) {
    let energy = if p.curvature().is_flat() {
        flat_lagrangian(p, s)
    } else {
        hamiltonian(p, v, s).expect("curved")
    };
    (energy, first_integral(p, v, s))
}

/// Integrates the rigid system under the given pivot motion.
///
/// Leapfrog requires `ConstantSpeed` motion; a non-constant profile on a
/// flat surface is rejected (the acceleration coupling needs curvature).
/// Numeric blow-ups return a partial trajectory flagged `Aborted`.
pub fn simulate_rigid(
    p: &PendulumParams,
    motion: &PivotMotion,
    s0: &RigidState,
    spec: &IntegratorSpec,
) -> Result<Trajectory<RigidState>> {
    spec.validate()?;
    motion.validate()?;
    if !s0.is_finite() {
        return Err(Error::InvalidParam {
            name: "initial_state",
            reason: "must be finite".into(),
        });
    }
    if !motion.is_constant_speed() {
        if spec.method == Method::Leapfrog {
            return Err(Error::UnsupportedPairing {
                method: "leapfrog",
                system: "accelerated-pivot rigid",
            });
        }
        if p.curvature().is_flat() {
            return Err(Error::FlatCurvature {
                op: "eom_accelerated",
            });
        }
    }

    let rhs = |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let s = RigidState::new(y[0], y[1]);
        let acc = match motion {
            PivotMotion::ConstantSpeed(v) => eom_rigid(p, *v, &s),
            _ => eom_accelerated(p, motion, t, &s).unwrap_or(f64::NAN),
        };
        [y[1], acc]
    };

    let mut samples = Vec::new();
    // Every emitted sample is fully finite: the state can stay finite while a
    // diagnostic overflows, so the check lives here, not in the stepper.
    let push = |samples: &mut Vec<Sample<RigidState>>, t: f64, s: RigidState| -> bool {
        let (energy, fi) = rigid_diagnostics(p, motion.speed(t), &s);
        if !energy.is_finite() || !fi.is_finite() {
            return false;
        }
        samples.push(Sample {
            t,
            state: s,
            energy,
            first_integral: fi,
            embedded: None,
        });
        true
    };
    if !push(&mut samples, 0.0, *s0) {
        return Ok(Trajectory {
            samples,
            status: TrajectoryStatus::Aborted {
                t: 0.0,
                reason: "non-finite diagnostics".into(),
            },
        });
    }

    let mut status = TrajectoryStatus::Completed;
    match spec.method {
        Method::Leapfrog => {
            let v_pivot = match motion {
                PivotMotion::ConstantSpeed(v) => *v,
                _ => unreachable!("gated above"),
            };
            let accel = |zeta: f64| eom_rigid(p, v_pivot, &RigidState::new(zeta, 0.0));
            let (n_steps, last) = fixed_step_plan(spec.dt, spec.t_end);
            let mut state = *s0;
            for i in 0..n_steps {
                match step_leapfrog(accel, state.zeta, state.zeta_dot, spec.dt) {
                    Ok((z, zd)) => state = RigidState::new(z, zd),
                    Err(_) => {
                        status = TrajectoryStatus::Aborted {
                            t: i as f64 * spec.dt,
                            reason: "non-finite state".into(),
                        };
                        break;
                    }
                }
                let t = (i + 1) as f64 * spec.dt;
                if ((i + 1).is_multiple_of(spec.sample_stride)
                    || (i + 1 == n_steps && last.is_none()))
                    && !push(&mut samples, t, state)
                {
                    status = TrajectoryStatus::Aborted {
                        t,
                        reason: "non-finite diagnostics".into(),
                    };
                    break;
                }
            }
            if status == TrajectoryStatus::Completed {
                if let Some(dt_last) = last {
                    let t0 = n_steps as f64 * spec.dt;
                    match step_leapfrog(accel, state.zeta, state.zeta_dot, dt_last) {
                        Ok((z, zd)) => {
                            if !push(&mut samples, spec.t_end, RigidState::new(z, zd)) {
                                status = TrajectoryStatus::Aborted {
                                    t: spec.t_end,
                                    reason: "non-finite diagnostics".into(),
                                };
                            }
                        }
                        Err(_) => {
                            status = TrajectoryStatus::Aborted {
                                t: t0,
                                reason: "non-finite state".into(),
                            }
                        }
                    }
                }
            }
        }
        Method::Rk4 => {
            let (n_steps, last) = fixed_step_plan(spec.dt, spec.t_end);
            let mut y = [s0.zeta, s0.zeta_dot];
            for i in 0..n_steps {
                let t = i as f64 * spec.dt;
                match step_rk4(rhs, t, &y, spec.dt) {
                    Ok(next) => y = next,
                    Err(_) => {
                        status = TrajectoryStatus::Aborted {
                            t,
                            reason: "non-finite state".into(),
                        };
                        break;
                    }
                }
                if (i + 1).is_multiple_of(spec.sample_stride)
                    || (i + 1 == n_steps && last.is_none())
                {
                    let t_next = (i + 1) as f64 * spec.dt;
                    if !push(&mut samples, t_next, RigidState::new(y[0], y[1])) {
                        status = TrajectoryStatus::Aborted {
                            t: t_next,
                            reason: "non-finite diagnostics".into(),
                        };
                        break;
                    }
                }
            }
            if status == TrajectoryStatus::Completed {
                if let Some(dt_last) = last {
                    let t0 = n_steps as f64 * spec.dt;
                    match step_rk4(rhs, t0, &y, dt_last) {
                        Ok(next) => {
                            if !push(&mut samples, spec.t_end, RigidState::new(next[0], next[1])) {
                                status = TrajectoryStatus::Aborted {
                                    t: spec.t_end,
                                    reason: "non-finite diagnostics".into(),
                                };
                            }
                        }
                        Err(_) => {
                            status = TrajectoryStatus::Aborted {
                                t: t0,
                                reason: "non-finite state".into(),
                            }
                        }
                    }
                }
            }
        }
        Method::Adaptive => {
            let mut t = 0.0;
            let mut dt = spec.dt.min(spec.t_end);
            let mut y = [s0.zeta, s0.zeta_dot];
            let mut accepted = 0usize;
            while t < spec.t_end {
                let dt_try = dt.min(spec.t_end - t);
                match step_adaptive(rhs, t, &y, dt_try, spec.rel_tol, spec.abs_tol) {
                    Ok(step) => {
                        y = step.y;
                        t += step.dt_used;
                        dt = step.dt_next;
                        accepted += 1;
                        if (accepted.is_multiple_of(spec.sample_stride) || t >= spec.t_end)
                            && !push(&mut samples, t, RigidState::new(y[0], y[1]))
                        {
                            status = TrajectoryStatus::Aborted {
                                t,
                                reason: "non-finite diagnostics".into(),
                            };
                            break;
                        }
                    }
                    Err(Error::StepUnderflow { t: t_fail, dt }) => {
                        status = TrajectoryStatus::Aborted {
                            t: t_fail,
                            reason: format!("step underflow (dt = {dt:.3e})"),
                        };
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    Ok(Trajectory { samples, status })
}

/// Integrates the elastic system at constant pivot speed.
///
/// Leapfrog is not offered here: the angular acceleration depends on the
/// rates, which breaks the separable form position-Verlet assumes.
pub fn simulate_elastic(
    p: &PendulumParams,
    v_pivot: f64,
    s0: &ElasticState,
    spec: &IntegratorSpec,
) -> Result<Trajectory<ElasticState>> {
    spec.validate()?;
    if spec.method == Method::Leapfrog {
        return Err(Error::UnsupportedPairing {
            method: "leapfrog",
            system: "elastic",
        });
    }
    if p.curvature().is_flat() {
        return Err(Error::FlatCurvature { op: "eom_elastic" });
    }
    if !s0.is_finite() || !v_pivot.is_finite() {
        return Err(Error::InvalidParam {
            name: "initial_state",
            reason: "must be finite".into(),
        });
    }
    let r0 = p.rod_length() + s0.elongation;
    if r0 <= 0.0 {
        return Err(Error::InvalidParam {
            name: "l0",
            reason: format!("rod length rho + l = {r0} must be positive"),
        });
    }
    if p.curvature().k() > 0.0 && r0 * p.curvature().sqrt_abs() >= std::f64::consts::PI {
        return Err(Error::InvalidParam {
            name: "l0",
            reason: format!(
                "stretched rod (rho + l)*sqrt(K) = {} must stay below pi",
                r0 * p.curvature().sqrt_abs()
            ),
        });
    }

    let rhs = |_t: f64, y: &[f64; 4]| -> [f64; 4] {
        let s = ElasticState::new(y[0], y[1], y[2], y[3]);
        match eom_elastic(p, v_pivot, &s) {
            Ok((zdd, ldd)) => [y[2], y[3], zdd, ldd],
            Err(_) => [f64::NAN; 4],
        }
    };

    let mut samples = Vec::new();
    // Finite state does not imply finite diagnostics: a huge elongation keeps
    // l finite while k*l^2 overflows. Only fully finite samples are emitted.
    let push = |samples: &mut Vec<Sample<ElasticState>>, t: f64, s: ElasticState| -> bool {
        let energy = elastic_energy(p, v_pivot, &s).expect("curved");
        let rigid_view = RigidState::new(s.zeta, s.zeta_dot);
        let fi = first_integral(p, v_pivot, &rigid_view);
        if !energy.is_finite() || !fi.is_finite() {
            return false;
        }
        samples.push(Sample {
            t,
            state: s,
            energy,
            first_integral: fi,
            embedded: None,
        });
        true
    };
    if !push(&mut samples, 0.0, *s0) {
        return Ok(Trajectory {
            samples,
            status: TrajectoryStatus::Aborted {
                t: 0.0,
                reason: "non-finite diagnostics".into(),
            },
        });
    }

    let state_of = |y: &[f64; 4]| ElasticState::new(y[0], y[1], y[2], y[3]);
    let mut status = TrajectoryStatus::Completed;
    match spec.method {
        Method::Leapfrog => unreachable!("rejected above"),
        Method::Rk4 => {
            let (n_steps, last) = fixed_step_plan(spec.dt, spec.t_end);
            let mut y = [s0.zeta, s0.elongation, s0.zeta_dot, s0.elongation_dot];
            for i in 0..n_steps {
                let t = i as f64 * spec.dt;
                match step_rk4(rhs, t, &y, spec.dt) {
                    Ok(next) => y = next,
                    Err(_) => {
                        status = TrajectoryStatus::Aborted {
                            t,
                            reason: "non-finite state".into(),
                        };
                        break;
                    }
                }
                if (i + 1).is_multiple_of(spec.sample_stride)
                    || (i + 1 == n_steps && last.is_none())
                {
                    let t_next = (i + 1) as f64 * spec.dt;
                    if !push(&mut samples, t_next, state_of(&y)) {
                        status = TrajectoryStatus::Aborted {
                            t: t_next,
                            reason: "non-finite diagnostics".into(),
                        };
                        break;
                    }
                }
            }
            if status == TrajectoryStatus::Completed {
                if let Some(dt_last) = last {
                    let t0 = n_steps as f64 * spec.dt;
                    match step_rk4(rhs, t0, &y, dt_last) {
                        Ok(next) => {
                            if !push(&mut samples, spec.t_end, state_of(&next)) {
                                status = TrajectoryStatus::Aborted {
                                    t: spec.t_end,
                                    reason: "non-finite diagnostics".into(),
                                };
                            }
                        }
                        Err(_) => {
                            status = TrajectoryStatus::Aborted {
                                t: t0,
                                reason: "non-finite state".into(),
                            }
                        }
                    }
                }
            }
        }
        Method::Adaptive => {
            let mut t = 0.0;
            let mut dt = spec.dt.min(spec.t_end);
            let mut y = [s0.zeta, s0.elongation, s0.zeta_dot, s0.elongation_dot];
            let mut accepted = 0usize;
            while t < spec.t_end {
                let dt_try = dt.min(spec.t_end - t);
                match step_adaptive(rhs, t, &y, dt_try, spec.rel_tol, spec.abs_tol) {
                    Ok(step) => {
                        y = step.y;
                        t += step.dt_used;
                        dt = step.dt_next;
                        accepted += 1;
                        if (accepted.is_multiple_of(spec.sample_stride) || t >= spec.t_end)
                            && !push(&mut samples, t, state_of(&y))
                        {
                            status = TrajectoryStatus::Aborted {
                                t,
                                reason: "non-finite diagnostics".into(),
                            };
                            break;
                        }
                    }
                    Err(Error::StepUnderflow { t: t_fail, dt }) => {
                        status = TrajectoryStatus::Aborted {
                            t: t_fail,
                            reason: format!("step underflow (dt = {dt:.3e})"),
                        };
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    Ok(Trajectory { samples, status })
}

impl Trajectory<RigidState> {
    /// Fills ambient pivot/mass coordinates on every sample, placing the
    /// pivot at its arclength position under `motion`.
    pub fn attach_embedding(&mut self, p: &PendulumParams, motion: &PivotMotion) -> Result<()> {
        for sample in &mut self.samples {
            let sigma = motion.arclength(sample.t);
            sample.embedded = Some(embed(p, sigma, &sample.state)?);
        }
        Ok(())
    }
}

impl Trajectory<ElasticState> {
    /// Fills ambient pivot/mass coordinates on every sample (constant pivot
    /// speed, so the arclength is v * t).
    pub fn attach_embedding(&mut self, p: &PendulumParams, v_pivot: f64) -> Result<()> {
        for sample in &mut self.samples {
            let sigma = v_pivot * sample.t;
            sample.embedded = Some(embed_elastic(p, sigma, &sample.state)?);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktrig::Curvature;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(m: f64, rho: f64, k: f64) -> PendulumParams {
        PendulumParams::new(m, rho, Curvature::new(k).unwrap()).unwrap()
    }

    #[test]
    fn rk4_zero_rhs_is_identity() {
        let y = [1.25, -0.75];
        let next = step_rk4(|_t, _y| [0.0, 0.0], 0.0, &y, 0.1).unwrap();
        assert_eq!(next, y);
    }

    #[test]
    fn rk4_single_harmonic_step_is_fifth_order_accurate() {
        let next = step_rk4(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, &[1.0, 0.0], 0.1).unwrap();
        assert!((next[0] - (0.1_f64).cos()).abs() < 2e-7);
        assert!((next[1] + (0.1_f64).sin()).abs() < 2e-7);
    }

    #[test]
    fn leapfrog_is_time_reversible() {
        let accel = |x: f64| -x.sin();
        let (mut x, mut v) = (1.0, 0.3);
        let dt = 1e-3;
        for _ in 0..1000 {
            let (xn, vn) = step_leapfrog(accel, x, v, dt).unwrap();
            x = xn;
            v = vn;
        }
        for _ in 0..1000 {
            let (xn, vn) = step_leapfrog(accel, x, v, -dt).unwrap();
            x = xn;
            v = vn;
        }
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let p = params(1.0, 1.0, 1.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-2, 1.0).unwrap();
        let traj = simulate_rigid(
            &p,
            &PivotMotion::ConstantSpeed(1.0),
            &RigidState::new(0.0, 0.0),
            &spec,
        )
        .unwrap();
        assert!(traj.is_complete());
        assert_eq!(traj.samples.len(), 101);
        for s in &traj.samples {
            assert_eq!(s.state.zeta, 0.0);
            assert_eq!(s.state.zeta_dot, 0.0);
            assert_eq!(s.energy, 0.0);
        }
    }

    #[test]
    fn trajectory_times_increase_and_start_at_zero() {
        let p = params(1.0, 1.0, -1.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-2, 0.5)
            .unwrap()
            .with_sample_stride(7)
            .unwrap();
        let s0 = RigidState::new(0.4, -0.2);
        let traj = simulate_rigid(&p, &PivotMotion::ConstantSpeed(0.8), &s0, &spec).unwrap();
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.samples[0].state, s0);
        for pair in traj.samples.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
        // Final sample lands on t_end regardless of stride.
        assert_relative_eq!(traj.final_sample().unwrap().t, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn flat_rigid_motion_is_uniform_rotation() {
        let p = params(1.0, 2.0, 0.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-3, 2.0).unwrap();
        let traj = simulate_rigid(
            &p,
            &PivotMotion::ConstantSpeed(1.0),
            &RigidState::new(0.3, 0.5),
            &spec,
        )
        .unwrap();
        let last = traj.final_sample().unwrap();
        assert_relative_eq!(last.state.zeta, 0.3 + 0.5 * 2.0, max_relative = 1e-12);
        assert_relative_eq!(last.energy, 0.5 * 1.0 * 0.25 * 4.0, max_relative = 1e-12);
    }

    #[test]
    fn leapfrog_rejects_non_constant_motion_and_elastic() {
        let p = params(1.0, 1.0, 1.0);
        let spec = IntegratorSpec::new(Method::Leapfrog, 1e-3, 1.0).unwrap();
        let motion = PivotMotion::SinusoidalAccel {
            amplitude: 0.1,
            angular_freq: 1.0,
            initial_speed: 1.0,
        };
        assert!(matches!(
            simulate_rigid(&p, &motion, &RigidState::new(0.1, 0.0), &spec),
            Err(Error::UnsupportedPairing { .. })
        ));
        assert!(matches!(
            simulate_elastic(&p, 1.0, &ElasticState::new(0.1, 0.0, 0.0, 0.0), &spec),
            Err(Error::UnsupportedPairing { .. })
        ));
    }

    #[test]
    fn spec_validation_rejects_bad_values() {
        assert!(IntegratorSpec::new(Method::Rk4, 0.0, 1.0).is_err());
        assert!(IntegratorSpec::new(Method::Rk4, 1e-3, -1.0).is_err());
        assert!(IntegratorSpec::new(Method::Rk4, 1e-3, 1.0)
            .unwrap()
            .with_tolerances(0.0, 1e-9)
            .is_err());
        assert!(IntegratorSpec::new(Method::Rk4, 1e-3, 1.0)
            .unwrap()
            .with_sample_stride(0)
            .is_err());
        assert!("rk4".parse::<Method>().is_ok());
        assert!("euler".parse::<Method>().is_err());
    }

    #[test]
    fn stiff_elastic_blowup_aborts_with_partial_trajectory() {
        // Far too large a step for a 1e6-stiff spring: RK4 goes unstable and
        // overflows; the run must flag the abort and keep earlier samples.
        let p = params(1.0, 1.0, 1.0).with_spring_k(1e6).unwrap();
        let spec = IntegratorSpec::new(Method::Rk4, 0.1, 10.0).unwrap();
        let traj =
            simulate_elastic(&p, 1.0, &ElasticState::new(0.3, 0.01, 0.0, 0.0), &spec).unwrap();
        assert!(!traj.is_complete());
        assert!(!traj.samples.is_empty());
        match &traj.status {
            TrajectoryStatus::Aborted { reason, .. } => {
                assert!(reason.contains("non-finite"));
            }
            other => panic!("expected abort, got {other:?}"),
        }
        for s in &traj.samples {
            assert!(s.state.is_finite());
        }
    }

    #[test]
    fn elastic_initial_state_validation() {
        let p = params(1.0, 1.0, 1.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-3, 1.0).unwrap();
        assert!(simulate_elastic(&p, 1.0, &ElasticState::new(0.0, -1.0, 0.0, 0.0), &spec).is_err());
        assert!(simulate_elastic(&p, 1.0, &ElasticState::new(0.0, 3.0, 0.0, 0.0), &spec).is_err());
        let flat = params(1.0, 1.0, 0.0);
        assert!(matches!(
            simulate_elastic(&flat, 1.0, &ElasticState::new(0.0, 0.0, 0.0, 0.0), &spec),
            Err(Error::FlatCurvature { .. })
        ));
    }

    #[test]
    fn adaptive_meets_tolerance_on_harmonic_motion() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut t = 0.0;
        let mut dt = 1e-2_f64;
        let mut y = [1.0, 0.0];
        while t < 10.0 {
            let step = step_adaptive(rhs, t, &y, dt.min(10.0 - t), 1e-6, 1e-9).unwrap();
            y = step.y;
            t += step.dt_used;
            dt = step.dt_next;
        }
        assert!((y[0] - t.cos()).abs() < 1e-5);
        assert!((y[1] + t.sin()).abs() < 1e-5);
    }

    #[test]
    fn adaptive_underflows_at_a_derivative_singularity() {
        // rhs is NaN for t > 1, so every trial step spanning it is rejected
        // and the controller shrinks dt into the floor.
        let rhs = |t: f64, _y: &[f64; 1]| [(1.0 - t).sqrt()];
        let mut t = 0.0;
        let mut dt = 0.1_f64;
        let mut y = [0.0];
        let result = loop {
            match step_adaptive(rhs, t, &y, dt.min(2.0 - t), 1e-6, 1e-9) {
                Ok(step) => {
                    y = step.y;
                    t += step.dt_used;
                    dt = step.dt_next;
                    if t >= 2.0 {
                        break Ok(());
                    }
                }
                Err(e) => break Err(e),
            }
        };
        assert!(matches!(result, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn embedding_attaches_to_all_samples() {
        let p = params(1.0, 0.5, 1.0);
        let motion = PivotMotion::ConstantSpeed(1.0);
        let spec = IntegratorSpec::new(Method::Rk4, 1e-2, 1.0).unwrap();
        let mut traj = simulate_rigid(&p, &motion, &RigidState::new(0.3, 0.0), &spec).unwrap();
        traj.attach_embedding(&p, &motion).unwrap();
        for s in &traj.samples {
            let (pivot, mass) = s.embedded.as_ref().unwrap();
            let r2 = 1.0;
            assert_abs_diff_eq!(
                pivot.x * pivot.x + pivot.y * pivot.y + pivot.z * pivot.z,
                r2,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                mass.x * mass.x + mass.y * mass.y + mass.z * mass.z,
                r2,
                epsilon = 1e-12
            );
        }
    }
}
