//! Relative phase, post-selection statistics and the Pancharatnam phase,
//! computed three ways: the gauge-invariant overlap formula, closed forms
//! for the polarizer/wave-plate setup, and the spherical-triangle solid
//! angle on the Poincaré sphere.
//!
//! Stokes convention: `s1` is the H/V axis, `s2` the D/X axis and `s3` the
//! R/L axis, with |R⟩ = (|H⟩ − i|V⟩)/√2 at the north pole. Solid angles are
//! oriented so that `pancharatnam_phase(a, b, c) = Ω(a, b, c)/2` (mod 2π);
//! in this orientation Ω is positive when `a·(b×c) < 0`.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use libm::{atan, atan2, cos, sin, sqrt, tan};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::wrap;
use crate::polarization::{inner, prepare_setup_states, PolarizationState, SetupConfig, SetupStates};
use crate::DEGENERATE_OVERLAP;

/// Everything the one-photon interferometer reveals for a given setup.
/// Phases are in (−π, π]; the solid angle is in (−2π, 2π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    /// `v_m = |⟨ψB|ψA⟩|`, visibility without post-selection.
    pub visibility_m: f64,
    /// `φ_m = arg⟨ψB|ψA⟩`.
    pub phase_m: f64,
    pub success_probability: f64,
    /// Visibility after post-selection onto ψ₂.
    pub visibility_f: f64,
    /// `φ_f = arg⟨ψB|ψ₂⟩⟨ψ₂|ψA⟩`.
    pub phase_f: f64,
    /// Pancharatnam phase γ(ψA, ψB, ψ₂).
    pub geometric: f64,
    /// Oriented solid angle Ω(ψA, ψB, ψ₂) in steradians.
    pub solid_angle: f64,
    /// `c_A = ⟨ψ₂|ψA⟩`
    pub overlap_a: Complex64,
    /// `c_B = ⟨ψ₂|ψB⟩`
    pub overlap_b: Complex64,
}

/// Unit Stokes vector (point on the Poincaré sphere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.s1 * o.s1 + self.s2 * o.s2 + self.s3 * o.s3
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.s2 * o.s3 - self.s3 * o.s2,
            self.s3 * o.s1 - self.s1 * o.s3,
            self.s1 * o.s2 - self.s2 * o.s1,
        )
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.dot(self))
    }

    /// Angle above the linear-polarization equator.
    pub fn latitude(&self) -> f64 {
        atan2(self.s3, libm::hypot(self.s1, self.s2))
    }

    /// Azimuth measured from |H⟩ toward |D⟩; a linear polarizer at θ sits at 2θ.
    pub fn longitude(&self) -> f64 {
        atan2(self.s2, self.s1)
    }
}

/// Post-selection outcome for two arm states projected onto ψ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelection {
    pub success_probability: f64,
    pub visibility: f64,
    /// `None` when one of the overlaps vanishes and the fringe has no phase.
    pub phase: Option<f64>,
    pub overlap_a: Complex64,
    pub overlap_b: Complex64,
}

fn defined_arg(z: Complex64, scale: f64) -> Result<f64> {
    let magnitude = z.norm();
    if magnitude <= DEGENERATE_OVERLAP * scale {
        return Err(Error::DegenerateOverlap { magnitude });
    }
    Ok(wrap(z.arg()))
}

/// `arg⟨b|a⟩`, the interferometric phase of `a` relative to `b`.
pub fn relative_phase(a: &PolarizationState, b: &PolarizationState) -> Result<f64> {
    defined_arg(inner(b, a), a.norm() * b.norm())
}

/// Success probability, visibility and phase of the fringe after both arms
/// are projected onto `psi2`.
pub fn postselect_stats(
    psi_a: &PolarizationState,
    psi_b: &PolarizationState,
    psi2: &PolarizationState,
) -> Result<PostSelection> {
    let ca = inner(psi2, psi_a);
    let cb = inner(psi2, psi_b);
    let (na, nb) = (ca.norm_sqr(), cb.norm_sqr());
    let scale = psi2.norm() * psi_a.norm().max(psi_b.norm());
    if sqrt(na.max(nb)) <= DEGENERATE_OVERLAP * scale {
        return Err(Error::DegenerateOverlap {
            magnitude: sqrt(na.max(nb)),
        });
    }
    let sum = na + nb;
    let product = cb.conj() * ca;
    let phase = defined_arg(product, scale * scale).ok();
    Ok(PostSelection {
        success_probability: 0.5 * sum,
        visibility: 2.0 * sqrt(na * nb) / sum,
        phase,
        overlap_a: ca,
        overlap_b: cb,
    })
}

/// `arg(⟨a|b⟩⟨b|c⟩⟨c|a⟩)`, invariant under a separate global phase on each
/// argument.
pub fn pancharatnam_phase(
    a: &PolarizationState,
    b: &PolarizationState,
    c: &PolarizationState,
) -> Result<f64> {
    let ab = inner(a, b);
    let bc = inner(b, c);
    let ca = inner(c, a);
    for (z, scale) in [
        (ab, a.norm() * b.norm()),
        (bc, b.norm() * c.norm()),
        (ca, c.norm() * a.norm()),
    ] {
        if z.norm() <= DEGENERATE_OVERLAP * scale {
            return Err(Error::DegenerateOverlap { magnitude: z.norm() });
        }
    }
    Ok(wrap((ab * bc * ca).arg()))
}

/// Poincaré-sphere point of a state. The input is normalized internally; the
/// zero vector has no direction and maps to NaN components.
pub fn to_stokes(s: &PolarizationState) -> StokesVector {
    let n = s.norm_sqr();
    let hv = s.h().conj() * s.v();
    StokesVector::new(
        (s.h().norm_sqr() - s.v().norm_sqr()) / n,
        2.0 * hv.re / n,
        -2.0 * hv.im / n,
    )
}

/// Sine of the angle below which two Stokes vectors count as (anti)parallel.
const PARALLEL_TOL: f64 = 1e-9;

/// Oriented solid angle of the geodesic triangle `a → b → c`, in (−2π, 2π].
///
/// The unsigned area is the spherical excess of the three vertex angles;
/// each vertex angle is the dihedral angle between the great circles
/// through that vertex. The sign follows the scalar triple product.
pub fn signed_solid_angle(a: &StokesVector, b: &StokesVector, c: &StokesVector) -> Result<f64> {
    let (a, b, c) = (unit(a), unit(b), unit(c));
    for (p, q) in [(&a, &b), (&b, &c), (&c, &a)] {
        if p.cross(q).norm() <= PARALLEL_TOL {
            return Err(Error::DegenerateTriangle);
        }
    }
    let triple = a.dot(&b.cross(&c));
    let t = triple.abs();
    let (ab, bc, ca) = (a.dot(&b), b.dot(&c), c.dot(&a));
    // (a×b)·(a×c) = b·c − (a·b)(a·c), and |(a×b)×(a×c)| = |a·(b×c)|.
    let angle_a = atan2(t, bc - ab * ca);
    let angle_b = atan2(t, ca - ab * bc);
    let angle_c = atan2(t, ab - bc * ca);
    let excess = (angle_a + angle_b + angle_c - PI).max(0.0);
    if triple > 0.0 {
        let omega = -excess;
        Ok(if omega <= -TAU { TAU } else { omega })
    } else {
        Ok(excess.min(TAU))
    }
}

fn unit(v: &StokesVector) -> StokesVector {
    let n = v.norm();
    StokesVector::new(v.s1 / n, v.s2 / n, v.s3 / n)
}

impl PhaseReport {
    /// General route: every quantity from overlaps of the given states.
    ///
    /// Fails with [`Error::DegenerateOverlap`] when the arms are orthogonal
    /// (φ_m and γ undefined) or either arm is blocked by ψ₂.
    pub fn from_states(states: &SetupStates) -> Result<Self> {
        let SetupStates {
            psi_a, psi_b, psi2, ..
        } = states;
        let phase_m = relative_phase(psi_a, psi_b)?;
        let post = postselect_stats(psi_a, psi_b, psi2)?;
        let phase_f = post.phase.ok_or(Error::DegenerateOverlap {
            magnitude: post.overlap_a.norm().min(post.overlap_b.norm()),
        })?;
        let geometric = pancharatnam_phase(psi_a, psi_b, psi2)?;
        let solid_angle = solid_angle_allowing_coincident(
            &to_stokes(psi_a),
            &to_stokes(psi_b),
            &to_stokes(psi2),
        )?;
        Ok(Self {
            visibility_m: inner(psi_b, psi_a).norm(),
            phase_m,
            success_probability: post.success_probability,
            visibility_f: post.visibility,
            phase_f,
            geometric,
            solid_angle,
            overlap_a: post.overlap_a,
            overlap_b: post.overlap_b,
        })
    }

    /// General route for a configured interferometer.
    pub fn for_setup(config: &SetupConfig) -> Result<Self> {
        Self::from_states(&prepare_setup_states(config))
    }
}

/// Two coincident vertices span no area; antipodal ones stay an error.
fn solid_angle_allowing_coincident(
    a: &StokesVector,
    b: &StokesVector,
    c: &StokesVector,
) -> Result<f64> {
    match signed_solid_angle(a, b, c) {
        Err(Error::DegenerateTriangle) => {
            let coincident = [(a, b), (b, c), (c, a)]
                .iter()
                .any(|(p, q)| p.dot(q) > 0.0 && p.cross(q).norm() <= PARALLEL_TOL);
            if coincident {
                Ok(0.0)
            } else {
                Err(Error::DegenerateTriangle)
            }
        }
        other => other,
    }
}

fn require_theta2(theta2: f64) -> Result<()> {
    if !theta2.is_finite() || sin(theta2).abs() < 1e-15 {
        return Err(Error::InvalidAngle {
            name: "theta2",
            value: theta2,
            reason: "tan(theta2) must be nonzero",
        });
    }
    Ok(())
}

/// `tan⁻¹(tanθ₁/tanθ₂)` with the principal range (−π/2, π/2].
pub fn half_geometric_angle(theta1: f64, theta2: f64) -> f64 {
    let x = atan(tan(theta1) / tan(theta2));
    if x <= -FRAC_PI_2 {
        FRAC_PI_2
    } else {
        x
    }
}

/// Continuous counterpart of [`half_geometric_angle`] for θ₁ ∈ [−π/2, π/2]
/// and θ₂ ∈ (0, π): runs monotonically from ∓π/2 to ±π/2 with no branch
/// point, which is what phase-shift curves need.
pub fn continuous_half_angle(theta1: f64, theta2: f64) -> f64 {
    atan2(sin(theta1) * cos(theta2), cos(theta1) * sin(theta2))
}

/// Closed-form relative phase: π/2 when cos2θ₁ ≥ 0, −π/2 otherwise.
pub fn closed_form_relative_phase(theta1: f64) -> f64 {
    if cos(2.0 * theta1) >= 0.0 {
        FRAC_PI_2
    } else {
        -FRAC_PI_2
    }
}

/// Closed-form geometric phase before wrapping:
/// `2tan⁻¹(tanθ₁/tanθ₂)`, plus π when cos2θ₁ < 0.
pub fn closed_form_geometric_raw(theta1: f64, theta2: f64) -> f64 {
    let base = 2.0 * half_geometric_angle(theta1, theta2);
    if cos(2.0 * theta1) >= 0.0 {
        base
    } else {
        base + PI
    }
}

/// Closed-form post-selected phase before wrapping: `2tan⁻¹(tanθ₁/tanθ₂) + π/2`.
pub fn closed_form_phase_f_raw(theta1: f64, theta2: f64) -> f64 {
    2.0 * half_geometric_angle(theta1, theta2) + FRAC_PI_2
}

/// `p = sin²θ₁cos²θ₂ + cos²θ₁sin²θ₂`.
pub fn closed_form_success_probability(theta1: f64, theta2: f64) -> f64 {
    let (s1, c1, s2, c2) = (sin(theta1), cos(theta1), sin(theta2), cos(theta2));
    s1 * s1 * c2 * c2 + c1 * c1 * s2 * s2
}

/// One-photon phases and probabilities from the closed forms for the
/// polarizer/wave-plate setup.
pub fn closed_form_one_photon(theta1: f64, theta2: f64) -> Result<PhaseReport> {
    require_theta2(theta2)?;
    let (s1, c1, s2, c2) = (sin(theta1), cos(theta1), sin(theta2), cos(theta2));
    let geometric = wrap(closed_form_geometric_raw(theta1, theta2));
    Ok(PhaseReport {
        visibility_m: cos(2.0 * theta1).abs(),
        phase_m: closed_form_relative_phase(theta1),
        success_probability: closed_form_success_probability(theta1, theta2),
        visibility_f: 1.0,
        phase_f: wrap(closed_form_phase_f_raw(theta1, theta2)),
        geometric,
        solid_angle: 2.0 * geometric,
        overlap_a: Complex64::new(-s1 * c2, c1 * s2),
        overlap_b: Complex64::new(c1 * s2, -s1 * c2),
    })
}
