//! Physical configuration, energies, equations of motion, and ambient-space
//! embedding for a pendulum whose pivot rides a geodesic of a surface of
//! constant curvature K.
//!
//! Conventions used throughout:
//! - `zeta` is the angle between the rod and the pivot's direction of
//!   motion, measured counterclockwise in the surface's induced
//!   orientation. It is stored unwrapped; trajectories may wind.
//! - `potential_energy` returns V(zeta) = -1/2 m v^2 sgn(K) sin_k(rho)^2 sin^2(zeta).
//!   The Lagrangian is `kinetic_energy + potential_energy` and the conserved
//!   energy is `hamiltonian = kinetic_energy - potential_energy`.
//! - The restoring term of the rigid equation of motion uses circular trig
//!   of the angle: zeta_ddot = -v^2 K sin(zeta) cos(zeta). This is what
//!   Euler-Lagrange produces from the Lagrangian above (the finite-difference
//!   oracle in [`crate::oracle`] checks it), and it is consistent with the
//!   conserved quadratic 2 zeta_dot^2 - K v^2 cos(2 zeta).

use crate::error::{Error, Result};
use crate::ktrig::{chord, cos_k, cot_k, sin_k, Curvature};

/// Full physical configuration: mass, rod length, curvature, and (for the
/// elastic rod) spring stiffness. The reduced mass
/// m_bar = m sin_k(K, rho)^2 / |K| is cached at construction; it extends
/// continuously to m rho^2 in the flat case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    mass: f64,
    rod_length: f64,
    curvature: Curvature,
    spring_k: f64,
    reduced_mass: f64,
}

impl PendulumParams {
    /// Builds a rigid-rod configuration (spring stiffness 0).
    ///
    /// Requires `mass > 0`, `rod_length > 0`, and for K > 0 the rod must fit
    /// inside the sphere's injectivity radius: `rod_length * sqrt(K) < pi`.
    pub fn new(mass: f64, rod_length: f64, curvature: Curvature) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParam {
                name: "mass",
                reason: format!("must be finite and positive, got {mass}"),
            });
        }
        if !(rod_length.is_finite() && rod_length > 0.0) {
            return Err(Error::InvalidParam {
                name: "rod_length",
                reason: format!("must be finite and positive, got {rod_length}"),
            });
        }
        if curvature.k() > 0.0 && rod_length * curvature.sqrt_abs() >= std::f64::consts::PI {
            return Err(Error::InvalidParam {
                name: "rod_length",
                reason: format!(
                    "rod_length*sqrt(K) = {} must be below pi on a sphere",
                    rod_length * curvature.sqrt_abs()
                ),
            });
        }
        let c = chord(curvature, rod_length);
        Ok(PendulumParams {
            mass,
            rod_length,
            curvature,
            spring_k: 0.0,
            reduced_mass: mass * c * c,
        })
    }

    /// Sets the spring stiffness for the elastic-rod system (>= 0).
    pub fn with_spring_k(mut self, spring_k: f64) -> Result<Self> {
        if !(spring_k.is_finite() && spring_k >= 0.0) {
            return Err(Error::InvalidParam {
                name: "spring_k",
                reason: format!("must be finite and non-negative, got {spring_k}"),
            });
        }
        self.spring_k = spring_k;
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn rod_length(&self) -> f64 {
        self.rod_length
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn spring_k(&self) -> f64 {
        self.spring_k
    }

    /// m_bar = m sin_k(K, rho)^2 / |K|, continuously m rho^2 at K = 0.
    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }
}

/// Prescribed speed profile of the pivot along its geodesic.
#[derive(Debug, Clone, PartialEq)]
pub enum PivotMotion {
    /// v(t) = v for all t.
    ConstantSpeed(f64),
    /// Piecewise-constant acceleration: `segments[i].accel` applies on
    /// [segments[i].start, segments[i+1].start), the last segment extends
    /// to infinity, and speed starts at `initial_speed`. An empty segment
    /// list degrades to constant speed.
    PiecewiseAccel {
        initial_speed: f64,
        segments: Vec<AccelSegment>,
    },
    /// a(t) = amplitude * sin(angular_freq * t) starting from `initial_speed`.
    SinusoidalAccel {
        amplitude: f64,
        angular_freq: f64,
        initial_speed: f64,
    },
}

/// One piecewise-constant acceleration segment starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSegment {
    pub start: f64,
    pub accel: f64,
}

impl PivotMotion {
    /// Checks finiteness and segment ordering; the first piecewise segment
    /// must start at t = 0 and starts must be strictly increasing.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidParam {
            name: "pivot_motion",
            reason,
        };
        match self {
            PivotMotion::ConstantSpeed(v) => {
                if !v.is_finite() {
                    return Err(bad(format!("speed must be finite, got {v}")));
                }
            }
            PivotMotion::PiecewiseAccel {
                initial_speed,
                segments,
            } => {
                if !initial_speed.is_finite() {
                    return Err(bad(format!(
                        "initial speed must be finite, got {initial_speed}"
                    )));
                }
                if let Some(first) = segments.first() {
                    if first.start != 0.0 {
                        return Err(bad(format!(
                            "first acceleration segment must start at t = 0, got {}",
                            first.start
                        )));
                    }
                }
                if segments
                    .iter()
                    .any(|s| !s.start.is_finite() || !s.accel.is_finite())
                {
                    return Err(bad("segment values must be finite".into()));
                }
                for pair in segments.windows(2) {
                    if pair[1].start <= pair[0].start {
                        return Err(bad(format!(
                            "segment starts must increase strictly ({} then {})",
                            pair[0].start, pair[1].start
                        )));
                    }
                }
            }
            PivotMotion::SinusoidalAccel {
                amplitude,
                angular_freq,
                initial_speed,
            } => {
                if !(amplitude.is_finite() && angular_freq.is_finite() && initial_speed.is_finite())
                {
                    return Err(bad("sinusoidal profile values must be finite".into()));
                }
                if *angular_freq == 0.0 {
                    return Err(bad("sinusoidal angular frequency must be nonzero".into()));
                }
            }
        }
        Ok(())
    }

    /// Instantaneous speed v(t).
    pub fn speed(&self, t: f64) -> f64 {
        match self {
            PivotMotion::ConstantSpeed(v) => *v,
            PivotMotion::PiecewiseAccel {
                initial_speed,
                segments,
            } => {
                let mut v = *initial_speed;
                for (i, seg) in segments.iter().enumerate() {
                    if t <= seg.start {
                        break;
                    }
                    let end = segments.get(i + 1).map_or(f64::INFINITY, |s| s.start);
                    v += seg.accel * (t.min(end) - seg.start);
                }
                v
            }
            PivotMotion::SinusoidalAccel {
                amplitude,
                angular_freq,
                initial_speed,
            } => initial_speed + amplitude / angular_freq * (1.0 - (angular_freq * t).cos()),
        }
    }

    /// Instantaneous acceleration a(t) = dv/dt; right-continuous at
    /// piecewise breakpoints.
    pub fn accel(&self, t: f64) -> f64 {
        match self {
            PivotMotion::ConstantSpeed(_) => 0.0,
            PivotMotion::PiecewiseAccel { segments, .. } => segments
                .iter()
                .rev()
                .find(|seg| t >= seg.start)
                .map_or(0.0, |seg| seg.accel),
            PivotMotion::SinusoidalAccel {
                amplitude,
                angular_freq,
                ..
            } => amplitude * (angular_freq * t).sin(),
        }
    }

    /// Arclength travelled along the geodesic: integral of speed from 0 to t.
    pub fn arclength(&self, t: f64) -> f64 {
        match self {
            PivotMotion::ConstantSpeed(v) => v * t,
            PivotMotion::PiecewiseAccel {
                initial_speed,
                segments,
            } => {
                if t <= 0.0 || segments.is_empty() {
                    return initial_speed * t;
                }
                let mut sigma = 0.0;
                let mut v = *initial_speed;
                for (i, seg) in segments.iter().enumerate() {
                    if t <= seg.start {
                        break;
                    }
                    let end = segments.get(i + 1).map_or(f64::INFINITY, |s| s.start);
                    let span = t.min(end) - seg.start;
                    sigma += v * span + 0.5 * seg.accel * span * span;
                    v += seg.accel * span;
                }
                sigma
            }
            PivotMotion::SinusoidalAccel {
                amplitude,
                angular_freq,
                initial_speed,
            } => {
                (initial_speed + amplitude / angular_freq) * t
                    - amplitude / (angular_freq * angular_freq) * (angular_freq * t).sin()
            }
        }
    }

    /// True only for the `ConstantSpeed` variant (the gate for leapfrog).
    pub fn is_constant_speed(&self) -> bool {
        matches!(self, PivotMotion::ConstantSpeed(_))
    }
}

/// Phase-space point of the rigid system: (zeta, zeta_dot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidState {
    pub zeta: f64,
    pub zeta_dot: f64,
}

impl RigidState {
    pub fn new(zeta: f64, zeta_dot: f64) -> Self {
        RigidState { zeta, zeta_dot }
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.is_finite() && self.zeta_dot.is_finite()
    }
}

/// Phase-space point of the elastic system: (zeta, l, zeta_dot, l_dot),
/// where l is the elongation of the rod (total length rho + l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticState {
    pub zeta: f64,
    pub elongation: f64,
    pub zeta_dot: f64,
    pub elongation_dot: f64,
}

impl ElasticState {
    pub fn new(zeta: f64, elongation: f64, zeta_dot: f64, elongation_dot: f64) -> Self {
        ElasticState {
            zeta,
            elongation,
            zeta_dot,
            elongation_dot,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.is_finite()
            && self.elongation.is_finite()
            && self.zeta_dot.is_finite()
            && self.elongation_dot.is_finite()
    }
}

/// Ambient coordinates of a surface point: R^3 for K > 0 (sphere
/// x^2+y^2+z^2 = R^2), Minkowski L^3 for K < 0 (upper hyperboloid
/// x^2+y^2-z^2 = -R^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn require_curved(p: &PendulumParams, op: &'static str) -> Result<f64> {
    if p.curvature().is_flat() {
        Err(Error::FlatCurvature { op })
    } else {
        Ok(p.curvature().k())
    }
}

/// Kinetic energy T = 1/2 m zeta_dot^2 chord(K, rho)^2.
///
/// `_v_pivot` is accepted for signature uniformity with the other energy
/// functions; the kinetic term does not involve the pivot speed.
pub fn kinetic_energy(p: &PendulumParams, _v_pivot: f64, s: &RigidState) -> Result<f64> {
    require_curved(p, "kinetic_energy")?;
    Ok(0.5 * p.reduced_mass() * s.zeta_dot * s.zeta_dot)
}

/// Potential V(zeta) = -1/2 m v^2 sgn(K) sin_k(K, rho)^2 sin^2(zeta).
///
/// Note the circular sin of the angle regardless of the curvature sign;
/// only the rod-length factor uses curvature trig.
pub fn potential_energy(p: &PendulumParams, v_pivot: f64, s: &RigidState) -> Result<f64> {
    require_curved(p, "potential_energy")?;
    let k = p.curvature();
    let sr = sin_k(k, p.rod_length());
    let sz = s.zeta.sin();
    Ok(-0.5 * p.mass() * v_pivot * v_pivot * k.sgn() * sr * sr * sz * sz)
}

/// L = kinetic_energy + potential_energy
///   = 1/2 m_bar (zeta_dot^2 - v^2 K sin^2(zeta)).
pub fn lagrangian(p: &PendulumParams, v_pivot: f64, s: &RigidState) -> Result<f64> {
    Ok(kinetic_energy(p, v_pivot, s)? + potential_energy(p, v_pivot, s)?)
}

/// Flat-limit Lagrangian 1/2 m zeta_dot^2 rho^2 (kinetic only; the
/// potential vanishes with K).
pub fn flat_lagrangian(p: &PendulumParams, s: &RigidState) -> f64 {
    0.5 * p.mass() * s.zeta_dot * s.zeta_dot * p.rod_length() * p.rod_length()
}

/// Conjugate momentum p_zeta = m_bar zeta_dot.
pub fn momentum(p: &PendulumParams, s: &RigidState) -> Result<f64> {
    require_curved(p, "momentum")?;
    Ok(p.reduced_mass() * s.zeta_dot)
}

/// Conserved energy H = kinetic_energy - potential_energy
///   = 1/2 m_bar (zeta_dot^2 + v^2 K sin^2(zeta)).
///
/// Constant along rigid trajectories with constant pivot speed.
pub fn hamiltonian(p: &PendulumParams, v_pivot: f64, s: &RigidState) -> Result<f64> {
    Ok(kinetic_energy(p, v_pivot, s)? - potential_energy(p, v_pivot, s)?)
}

/// Shared restoring expression; kept in one place so the constant-speed and
/// zero-acceleration code paths produce bit-identical values.
#[inline]
fn rigid_restoring(k: f64, v: f64, zeta: f64) -> f64 {
    -v * v * k * zeta.sin() * zeta.cos()
}

/// Angular acceleration of the rigid pendulum with constant pivot speed:
/// zeta_ddot = -v^2 K sin(zeta) cos(zeta).
///
/// Independent of zeta_dot, mass, and rod length (the rod factor cancels in
/// Euler-Lagrange); returns 0 in the flat case.
pub fn eom_rigid(p: &PendulumParams, v_pivot: f64, s: &RigidState) -> f64 {
    rigid_restoring(p.curvature().k(), v_pivot, s.zeta)
}

/// Angular acceleration with an accelerating pivot:
/// zeta_ddot = -v(t)^2 K sin(zeta) cos(zeta) + sqrt(|K|) a(t) cot_k(K, rho) sin(zeta).
///
/// Reduces exactly to [`eom_rigid`] when a(t) = 0. Requires K != 0 and a rod
/// length away from the zeros of sin_k.
pub fn eom_accelerated(
    p: &PendulumParams,
    motion: &PivotMotion,
    t: f64,
    s: &RigidState,
) -> Result<f64> {
    let k = require_curved(p, "eom_accelerated")?;
    let v = motion.speed(t);
    let restoring = rigid_restoring(k, v, s.zeta);
    let a = motion.accel(t);
    if a == 0.0 {
        return Ok(restoring);
    }
    let cot = cot_k(p.curvature(), p.rod_length())?;
    Ok(restoring + p.curvature().sqrt_abs() * a * cot * s.zeta.sin())
}

/// Angular and radial accelerations of the elastic-rod pendulum with
/// constant pivot speed. With r = rho + l:
///
/// zeta_ddot = -2 sqrt(|K|) cot_k(K, r) l_dot zeta_dot - v^2 K sin(zeta) cos(zeta)
/// l_ddot    = zeta_dot^2 sin_k(K, r) cos_k(K, r) / sqrt(|K|)
///             - v^2 sgn(K) sqrt(|K|) sin_k(K, r) cos_k(K, r) sin^2(zeta)
///             - (spring_k / m) l
///
/// Errors where sin_k(K, r) vanishes (the rod degenerates to a point or
/// wraps to the antipode).
pub fn eom_elastic(p: &PendulumParams, v_pivot: f64, s: &ElasticState) -> Result<(f64, f64)> {
    let k = require_curved(p, "eom_elastic")?;
    let kc = p.curvature();
    let r = p.rod_length() + s.elongation;
    let cot = cot_k(kc, r)?;
    let sqrt_k = kc.sqrt_abs();
    let (sz, cz) = (s.zeta.sin(), s.zeta.cos());

    let zeta_ddot =
        -2.0 * sqrt_k * cot * s.elongation_dot * s.zeta_dot - v_pivot * v_pivot * k * sz * cz;

    let sc = sin_k(kc, r) * cos_k(kc, r);
    let l_ddot = s.zeta_dot * s.zeta_dot * sc / sqrt_k
        - v_pivot * v_pivot * kc.sgn() * sqrt_k * sc * sz * sz
        - p.spring_k() / p.mass() * s.elongation;

    Ok((zeta_ddot, l_ddot))
}

/// Total energy of the elastic system (conserved for constant pivot speed):
/// T_zeta + T_l + V_curv + V_spring with r = rho + l,
/// = 1/2 m zeta_dot^2 chord(K,r)^2 + 1/2 m l_dot^2
///   + 1/2 m v^2 sgn(K) sin_k(K,r)^2 sin^2(zeta) + 1/2 spring_k l^2.
pub fn elastic_energy(p: &PendulumParams, v_pivot: f64, s: &ElasticState) -> Result<f64> {
    require_curved(p, "elastic_energy")?;
    let kc = p.curvature();
    let r = p.rod_length() + s.elongation;
    let c = chord(kc, r);
    let sr = sin_k(kc, r);
    let sz = s.zeta.sin();
    Ok(0.5 * p.mass() * s.zeta_dot * s.zeta_dot * c * c
        + 0.5 * p.mass() * s.elongation_dot * s.elongation_dot
        + 0.5 * p.mass() * v_pivot * v_pivot * kc.sgn() * sr * sr * sz * sz
        + 0.5 * p.spring_k() * s.elongation * s.elongation)
}

/// Places pivot and mass in ambient coordinates for a rigid configuration.
pub fn embed(
    p: &PendulumParams,
    pivot_arclength: f64,
    s: &RigidState,
) -> Result<(EmbeddedPoint, EmbeddedPoint)> {
    embed_at(p, pivot_arclength, s.zeta, p.rod_length())
}

/// Places pivot and mass for an elastic configuration (rod length rho + l).
pub fn embed_elastic(
    p: &PendulumParams,
    pivot_arclength: f64,
    s: &ElasticState,
) -> Result<(EmbeddedPoint, EmbeddedPoint)> {
    embed_at(p, pivot_arclength, s.zeta, p.rod_length() + s.elongation)
}

/// Shared embedding: the pivot sits on the reference geodesic (the equator
/// for K > 0, the x-z hyperbola for K < 0) at the given arclength; the mass
/// lies a geodesic distance `rod` away, at angle `zeta` counterclockwise
/// from the pivot's velocity direction:
///
/// mass = cos_k(K, rod) * pivot + chord(K, rod) * w,
/// w = cos(zeta) * T + sin(zeta) * U,
///
/// with T the unit tangent of the geodesic and U the unit normal completing
/// the oriented frame (U = surface_normal x T on the sphere; U = (0, 1, 0)
/// on the hyperboloid).
fn embed_at(
    p: &PendulumParams,
    sigma: f64,
    zeta: f64,
    rod: f64,
) -> Result<(EmbeddedPoint, EmbeddedPoint)> {
    require_curved(p, "embed")?;
    let kc = p.curvature();
    let radius = kc.radius().expect("curved by construction");
    let (cz, sz) = (zeta.cos(), zeta.sin());
    let cr = cos_k(kc, rod);
    let hr = chord(kc, rod);

    if kc.k() > 0.0 {
        // Sphere of radius R: pivot on the equator at angle theta = sigma/R,
        // T the equatorial tangent, U = (pivot/R) x T = (0, 0, 1).
        let theta = sigma / radius;
        let (st, ct) = theta.sin_cos();
        let pivot = EmbeddedPoint {
            x: radius * ct,
            y: radius * st,
            z: 0.0,
        };
        let t = [-st, ct, 0.0];
        let w = [cz * t[0], cz * t[1], sz];
        let mass = EmbeddedPoint {
            x: cr * pivot.x + hr * w[0],
            y: cr * pivot.y + hr * w[1],
            z: hr * w[2],
        };
        Ok((pivot, mass))
    } else {
        // Upper hyperboloid x^2+y^2-z^2 = -R^2: pivot on the x-z geodesic at
        // Minkowski arclength sigma, T its tangent, U = (0, 1, 0).
        let beta = sigma / radius;
        let (shb, chb) = (beta.sinh(), beta.cosh());
        let pivot = EmbeddedPoint {
            x: radius * shb,
            y: 0.0,
            z: radius * chb,
        };
        let t = [chb, 0.0, shb];
        let w = [cz * t[0], sz, cz * t[2]];
        let mass = EmbeddedPoint {
            x: cr * pivot.x + hr * w[0],
            y: hr * w[1],
            z: cr * pivot.z + hr * w[2],
        };
        Ok((pivot, mass))
    }
}
