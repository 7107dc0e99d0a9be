//! Closed-form analysis: the conserved quadratic, equilibria and their
//! linearized rates, small-oscillation frequency, the exact libration
//! period via the complete elliptic integral, and the quantum spectrum
//! (closed form and finite-difference eigensolver).
//!
//! The angle substitution u = 2*zeta (K > 0) or u = pi - 2*zeta (K < 0)
//! maps the rigid system onto a planar pendulum u_ddot = -v^2 |K| sin(u)
//! about its stable equilibrium; amplitude-dependent quantities are
//! expressed in u throughout.

use crate::error::{Error, Result};
use crate::integrate::step_leapfrog;
use crate::ktrig::Curvature;
use crate::model::{PendulumParams, RigidState};
use nalgebra::DMatrix;

/// The conserved quadratic 2 zeta_dot^2 - K v^2 cos(2 zeta); an affine
/// image of the Hamiltonian (H = m_bar/4 * first_integral + m_bar K v^2/4).
pub fn first_integral(p: &PendulumParams, v_pivot: f64, s: &RigidState) -> f64 {
    2.0 * s.zeta_dot * s.zeta_dot - p.curvature().k() * v_pivot * v_pivot * (2.0 * s.zeta).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

/// A rest point of the rigid system with its linearized rate: oscillation
/// frequency if stable, exponential growth rate if unstable. Both equal
/// |v| sqrt(|K|) here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub zeta: f64,
    pub stability: Stability,
    pub rate: f64,
}

/// Rest points in [0, pi/2]: zeta = 0 and zeta = pi/2 swap roles with the
/// sign of the curvature (aligned is stable on the sphere, perpendicular is
/// stable on the hyperbolic plane).
pub fn equilibria(curvature: Curvature, speed: f64) -> Result<Vec<Equilibrium>> {
    if curvature.is_flat() {
        return Err(Error::FlatCurvature { op: "equilibria" });
    }
    if !(speed.is_finite() && speed != 0.0) {
        return Err(Error::InvalidParam {
            name: "speed",
            reason: format!("must be finite and nonzero, got {speed}"),
        });
    }
    let rate = speed.abs() * curvature.sqrt_abs();
    let (at_zero, at_perp) = if curvature.k() > 0.0 {
        (Stability::Stable, Stability::Unstable)
    } else {
        (Stability::Unstable, Stability::Stable)
    };
    Ok(vec![
        Equilibrium {
            zeta: 0.0,
            stability: at_zero,
            rate,
        },
        Equilibrium {
            zeta: std::f64::consts::FRAC_PI_2,
            stability: at_perp,
            rate,
        },
    ])
}

/// Harmonic frequency about the stable equilibrium in the u-variable:
/// omega = |v| sqrt(|K|).
pub fn small_osc_frequency(curvature: Curvature, speed: f64) -> Result<f64> {
    if curvature.is_flat() {
        return Err(Error::FlatCurvature {
            op: "small_osc_frequency",
        });
    }
    Ok(speed.abs() * curvature.sqrt_abs())
}

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 60;

fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a.abs() {
            break;
        }
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind in the modulus convention,
/// K(k) = integral_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta), via the
/// quadratically convergent arithmetic-geometric mean:
/// K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
pub fn complete_elliptic_k(modulus: f64) -> Result<f64> {
    if !(modulus.is_finite() && modulus.abs() < 1.0) {
        return Err(Error::OutOfDomain {
            what: "elliptic modulus",
            value: modulus,
            domain: "(-1, 1)",
        });
    }
    Ok(elliptic_k_from_complement((1.0 - modulus * modulus).sqrt()))
}

/// Same integral parametrized by the complementary modulus k' = sqrt(1-k^2).
/// Preferred near k -> 1, where forming 1 - k^2 in double precision loses
/// all accuracy.
fn elliptic_k_from_complement(k_comp: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / agm(1.0, k_comp)
}

/// Exact libration period at amplitude u0 (in the u-variable, about the
/// stable equilibrium):
///
///   T = 4 / (|v| sqrt(|K|)) * K(sin(u0/2)),   0 < u0 < pi.
///
/// The modulus complement cos(u0/2) is fed to the AGM directly, so the
/// value stays accurate arbitrarily close to the separatrix. T grows
/// monotonically with u0 and diverges logarithmically as u0 -> pi; the
/// growth is slow (T(0.999*pi) is only about 4.2 times T(pi/2); ten times
/// T(pi/2) is reached within about 1e-8 of pi).
pub fn period_exact(curvature: Curvature, speed: f64, u0: f64) -> Result<f64> {
    if curvature.is_flat() {
        return Err(Error::FlatCurvature { op: "period_exact" });
    }
    if !(speed.is_finite() && speed != 0.0) {
        return Err(Error::InvalidParam {
            name: "speed",
            reason: format!("must be finite and nonzero, got {speed}"),
        });
    }
    if !(u0 > 0.0 && u0 < std::f64::consts::PI) {
        return Err(Error::OutOfDomain {
            what: "amplitude u0",
            value: u0,
            domain: "(0, pi)",
        });
    }
    let omega = speed.abs() * curvature.sqrt_abs();
    Ok(4.0 / omega * elliptic_k_from_complement((0.5 * u0).cos()))
}

/// Libration period measured from a leapfrog simulation: the pendulum is
/// released at amplitude u0 and the period is inferred from the mean gap
/// between successive crossings of the stable equilibrium (crossing times
/// located by linear interpolation within a step).
pub fn simulated_period(curvature: Curvature, speed: f64, u0: f64, dt: f64) -> Result<f64> {
    let t_exact = period_exact(curvature, speed, u0)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParam {
            name: "dt",
            reason: format!("must be finite and positive, got {dt}"),
        });
    }
    let k = curvature.k();
    let zeta_eq = if k > 0.0 {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let zeta0 = if k > 0.0 {
        0.5 * u0
    } else {
        0.5 * (std::f64::consts::PI - u0)
    };
    let accel = |zeta: f64| -speed * speed * k * zeta.sin() * zeta.cos();

    let t_end = 3.2 * t_exact;
    let n_steps = (t_end / dt).ceil() as usize;
    let mut crossings = Vec::new();
    let (mut x, mut v) = (zeta0, 0.0);
    let mut offset_prev = x - zeta_eq;
    for i in 0..n_steps {
        let (xn, vn) = step_leapfrog(accel, x, v, dt)?;
        let offset = xn - zeta_eq;
        if offset_prev != 0.0 && offset_prev.signum() != offset.signum() {
            let frac = offset_prev / (offset_prev - offset);
            crossings.push((i as f64 + frac) * dt);
        }
        x = xn;
        v = vn;
        offset_prev = offset;
    }
    if crossings.len() < 2 {
        return Err(Error::NonFinite {
            what: "period measurement (no crossings found)",
            t: t_end,
        });
    }
    let gaps = crossings.len() - 1;
    Ok(2.0 * (crossings[gaps] - crossings[0]) / gaps as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    ClosedForm,
    FiniteDifference,
}

/// Energy levels with their provenance. `levels` is sorted ascending.
///
/// For the finite-difference method the potential sin^2(zeta) has period pi,
/// so the periodic operator on [-pi, pi) is a symmetric double well and its
/// levels genuinely come in near-degenerate pairs; they are reported exactly
/// as computed (ties at double precision included), not collapsed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub levels: Vec<f64>,
    pub method: SpectrumMethod,
    pub grid_n: Option<usize>,
    pub domain: Option<(f64, f64)>,
    pub hbar: f64,
}

impl SpectrumResult {
    /// Differences between adjacent levels.
    pub fn spacings(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Means of consecutive level pairs (E0,E1), (E2,E3), ...; the natural
    /// "single-well" levels of the double-well numeric spectrum.
    pub fn doublet_means(&self) -> Vec<f64> {
        self.levels
            .chunks_exact(2)
            .map(|c| 0.5 * (c[0] + c[1]))
            .collect()
    }

    /// Splittings |E1-E0|, |E3-E2|, ... of consecutive pairs.
    pub fn doublet_splittings(&self) -> Vec<f64> {
        self.levels.chunks_exact(2).map(|c| c[1] - c[0]).collect()
    }
}

/// Closed-form levels E_n = hbar |v| sqrt(|K|) (n + 1/2) for n = 0..=n_max.
pub fn quantum_levels(
    p: &PendulumParams,
    v_pivot: f64,
    hbar: f64,
    n_max: usize,
) -> Result<SpectrumResult> {
    if p.curvature().is_flat() {
        return Err(Error::FlatCurvature {
            op: "quantum_levels",
        });
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParam {
            name: "hbar",
            reason: format!("must be finite and positive, got {hbar}"),
        });
    }
    let omega = v_pivot.abs() * p.curvature().sqrt_abs();
    let levels = (0..=n_max)
        .map(|n| hbar * omega * (n as f64 + 0.5))
        .collect();
    Ok(SpectrumResult {
        levels,
        method: SpectrumMethod::ClosedForm,
        grid_n: None,
        domain: None,
        hbar,
    })
}

/// Minimum admissible grid for the finite-difference operator.
pub const MIN_GRID_N: usize = 200;

fn schrodinger_matrix(p: &PendulumParams, v_pivot: f64, hbar: f64, grid_n: usize) -> DMatrix<f64> {
    let n = grid_n;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let m_bar = p.reduced_mass();
    let kin = hbar * hbar / (2.0 * m_bar * h * h);
    let v_coeff = 0.5 * m_bar * v_pivot * v_pivot * p.curvature().k();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let zeta = -std::f64::consts::PI + j as f64 * h;
        let s = zeta.sin();
        m[(j, j)] = 2.0 * kin + v_coeff * s * s;
        let next = (j + 1) % n;
        m[(j, next)] = -kin;
        m[(next, j)] = -kin;
    }
    m
}

fn validate_spectrum_args(
    p: &PendulumParams,
    hbar: f64,
    grid_n: usize,
    n_levels: usize,
) -> Result<()> {
    if p.curvature().k() <= 0.0 {
        return Err(Error::InvalidParam {
            name: "curvature",
            reason: "numeric spectrum requires K > 0 (the hyperbolic case differs only by an additive offset and is not computed)".into(),
        });
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParam {
            name: "hbar",
            reason: format!("must be finite and positive, got {hbar}"),
        });
    }
    if grid_n < MIN_GRID_N {
        return Err(Error::InvalidParam {
            name: "grid_n",
            reason: format!("must be at least {MIN_GRID_N}, got {grid_n}"),
        });
    }
    if n_levels == 0 || n_levels > grid_n {
        return Err(Error::InvalidParam {
            name: "n_levels",
            reason: format!("must be in 1..={grid_n}, got {n_levels}"),
        });
    }
    Ok(())
}

/// Lowest `n_levels` eigenvalues of the second-order central-difference
/// discretization of
///
///   -(hbar^2 / 2 m_bar) psi'' + (1/2) m_bar v^2 K sin^2(zeta) psi = E psi
///
/// on the periodic grid zeta in [-pi, pi). The operator is symmetric
/// tridiagonal plus periodic corner entries; a dense symmetric
/// eigendecomposition solves it at these grid sizes.
pub fn schrodinger_spectrum(
    p: &PendulumParams,
    v_pivot: f64,
    hbar: f64,
    grid_n: usize,
    n_levels: usize,
) -> Result<SpectrumResult> {
    let (result, _) = schrodinger_eigenpairs(p, v_pivot, hbar, grid_n, n_levels)?;
    Ok(result)
}

/// As [`schrodinger_spectrum`], additionally returning the eigenvectors of
/// the reported levels, orthonormalized under the grid inner product
/// <psi, phi> = h * sum_j psi_j phi_j.
pub fn schrodinger_eigenpairs(
    p: &PendulumParams,
    v_pivot: f64,
    hbar: f64,
    grid_n: usize,
    n_levels: usize,
) -> Result<(SpectrumResult, Vec<Vec<f64>>)> {
    validate_spectrum_args(p, hbar, grid_n, n_levels)?;
    let matrix = schrodinger_matrix(p, v_pivot, hbar, grid_n);
    let eigen = nalgebra::SymmetricEigen::try_new(matrix, f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure { n: grid_n })?;

    let mut order: Vec<usize> = (0..grid_n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .expect("eigenvalues of a real symmetric operator are finite")
    });

    let h = 2.0 * std::f64::consts::PI / grid_n as f64;
    let inv_sqrt_h = 1.0 / h.sqrt();
    let levels: Vec<f64> = order[..n_levels]
        .iter()
        .map(|&i| eigen.eigenvalues[i])
        .collect();
    let vectors: Vec<Vec<f64>> = order[..n_levels]
        .iter()
        .map(|&i| {
            eigen
                .eigenvectors
                .column(i)
                .iter()
                .map(|x| x * inv_sqrt_h)
                .collect()
        })
        .collect();

    Ok((
        SpectrumResult {
            levels,
            method: SpectrumMethod::FiniteDifference,
            grid_n: Some(grid_n),
            domain: Some((-std::f64::consts::PI, std::f64::consts::PI)),
            hbar,
        },
        vectors,
    ))
}
