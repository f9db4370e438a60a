//! Jones vectors, Jones matrices, and the four polarization states of the
//! interferometer.
//!
//! Quarter-wave plates use the convention "fast axis unchanged, slow axis
//! multiplied by i", so the arm states come out exactly as
//! `ψA = −sinθ₁|H⟩ + i·cosθ₁|V⟩` and `ψB = −i·sinθ₁|H⟩ + cosθ₁|V⟩` rather
//! than merely up to a global phase.

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use core::ops::Mul;

use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitude norm treated as complete extinction; covers the rounding
/// residue of `cos(π/2)` in crossed-polarizer products.
pub const BLOCKED_NORM: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pure polarization state as horizontal/vertical amplitudes.
///
/// States are not normalized automatically: a polarizer that blocks the
/// beam yields the zero vector, and that has to stay observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    h: Complex64,
    v: Complex64,
}

impl PolarizationState {
    pub const fn new(h: Complex64, v: Complex64) -> Self {
        Self { h, v }
    }

    pub const fn from_real(h: f64, v: f64) -> Self {
        Self::new(Complex64::new(h, 0.0), Complex64::new(v, 0.0))
    }

    pub const fn horizontal() -> Self {
        Self::from_real(1.0, 0.0)
    }

    pub const fn vertical() -> Self {
        Self::from_real(0.0, 1.0)
    }

    /// 45° linear polarization.
    pub const fn diagonal() -> Self {
        Self::from_real(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    /// 135° linear polarization.
    pub const fn antidiagonal() -> Self {
        Self::from_real(-FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    /// Right circular polarization, `(|H⟩ − i|V⟩)/√2`; the north pole of
    /// the Poincaré sphere in this crate's Stokes convention.
    pub const fn right() -> Self {
        Self::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        )
    }

    /// Left circular polarization, `(|H⟩ + i|V⟩)/√2`.
    pub const fn left() -> Self {
        Self::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
    }

    /// Linear polarization at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        Self::from_real(cos(angle), sin(angle))
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sqr())
    }

    /// Unit-norm copy, or `None` when the state is blocked (norm at or
    /// below [`BLOCKED_NORM`]).
    pub fn normalize(&self) -> Option<Self> {
        let n = self.norm();
        if self.is_blocked() || !n.is_finite() {
            return None;
        }
        Some(Self::new(self.h / n, self.v / n))
    }

    /// True when a polarizer has extinguished the beam.
    pub fn is_blocked(&self) -> bool {
        self.norm() <= BLOCKED_NORM
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// Multiplies both amplitudes by `e^{iα}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let u = Complex64::from_polar(1.0, alpha);
        Self::new(self.h * u, self.v * u)
    }

    /// Ray equality: `|⟨self|other⟩| = ‖self‖‖other‖` within `tol`.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        (self.inner(other).norm() - self.norm() * other.norm()).abs() <= tol
    }
}

/// 2×2 complex Jones matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    m: [[Complex64; 2]; 2],
}

impl JonesMatrix {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn apply(&self, s: &PolarizationState) -> PolarizationState {
        let m = &self.m;
        PolarizationState::new(m[0][0] * s.h + m[0][1] * s.v, m[1][0] * s.h + m[1][1] * s.v)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }

    /// `R(angle)·self·R(−angle)`, i.e. the element physically rotated by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        let r = Self::new([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ]);
        let r_inv = Self::new([
            [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
        ]);
        r * *self * r_inv
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        JonesMatrix::new(out)
    }
}

impl Mul<PolarizationState> for JonesMatrix {
    type Output = PolarizationState;

    fn mul(self, rhs: PolarizationState) -> PolarizationState {
        self.apply(&rhs)
    }
}

/// Projector onto linear polarization at `angle` from horizontal.
pub fn linear_polarizer(angle: f64) -> JonesMatrix {
    let (s, c) = (sin(angle), cos(angle));
    let re = |x: f64| Complex64::new(x, 0.0);
    JonesMatrix::new([[re(c * c), re(c * s)], [re(c * s), re(s * s)]])
}

/// Quarter-wave plate with its fast axis at `fast_axis_angle`. The fast
/// component keeps its phase and the slow component picks up a factor i.
pub fn quarter_wave_plate(fast_axis_angle: f64) -> JonesMatrix {
    JonesMatrix::new([[ONE, ZERO], [ZERO, I]]).rotated(fast_axis_angle)
}

/// Interferometer geometry: polarizer angles, photon number and the U(1)
/// offset χ added to arm B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupConfig {
    theta1: f64,
    theta2: f64,
    photon_number: u32,
    chi: f64,
}

/// Slack for range checks so that angles converted from degrees at the
/// boundary (e.g. −90°) are accepted.
const RANGE_SLACK: f64 = 1e-12;

impl SetupConfig {
    /// `theta1` is LP₁'s tilt from vertical in [−π/2, π/2]; `theta2` is LP₂'s
    /// axis from horizontal in (0, π). `theta2 ∈ {0, π}` makes the closed
    /// forms singular and is rejected.
    pub fn new(theta1: f64, theta2: f64, photon_number: u32, chi: f64) -> Result<Self> {
        if !theta1.is_finite() || theta1.abs() > FRAC_PI_2 + RANGE_SLACK {
            return Err(Error::InvalidAngle {
                name: "theta1",
                value: theta1,
                reason: "must lie in [-pi/2, pi/2]",
            });
        }
        if !theta2.is_finite() || theta2 <= 0.0 || theta2 >= PI || sin(theta2).abs() < 1e-15 {
            return Err(Error::InvalidAngle {
                name: "theta2",
                value: theta2,
                reason: "must lie strictly inside (0, pi)",
            });
        }
        if !chi.is_finite() {
            return Err(Error::InvalidAngle {
                name: "chi",
                value: chi,
                reason: "must be finite",
            });
        }
        if photon_number == 0 {
            return Err(Error::InvalidPhotonNumber);
        }
        Ok(Self {
            theta1: theta1.clamp(-FRAC_PI_2, FRAC_PI_2),
            theta2,
            photon_number,
            chi,
        })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn photon_number(&self) -> u32 {
        self.photon_number
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn with_theta1(&self, theta1: f64) -> Result<Self> {
        Self::new(theta1, self.theta2, self.photon_number, self.chi)
    }

    pub fn with_photon_number(&self, n: u32) -> Result<Self> {
        Self::new(self.theta1, self.theta2, n, self.chi)
    }

    pub fn with_chi(&self, chi: f64) -> Self {
        Self { chi, ..*self }
    }

    /// Offset `χ = (N+1)π/2N` that nulls the ratio estimator at θ₁ = 0.
    pub fn null_offset(&self) -> f64 {
        let n = f64::from(self.photon_number);
        (n + 1.0) * PI / (2.0 * n)
    }

    /// Copy with χ set to [`Self::null_offset`].
    pub fn with_null_offset(&self) -> Self {
        self.with_chi(self.null_offset())
    }
}

/// ψ₁ after LP₁, the two arm states after the wave plates, and the
/// post-selected state ψ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupStates {
    pub psi1: PolarizationState,
    pub psi_a: PolarizationState,
    pub psi_b: PolarizationState,
    pub psi2: PolarizationState,
}

/// Builds ψ₁, ψA, ψB, ψ₂. The arm states are the wave-plate matrices
/// applied to ψ₁.
pub fn prepare_setup_states(config: &SetupConfig) -> SetupStates {
    let (s1, c1) = (sin(config.theta1), cos(config.theta1));
    // LP₁ sits at 90° + θ₁; its axis vector is written out directly.
    let psi1 = PolarizationState::from_real(-s1, c1);
    let psi_a = quarter_wave_plate(0.0).apply(&psi1);
    let psi_b = quarter_wave_plate(FRAC_PI_2).apply(&psi1);
    let psi2 = PolarizationState::linear(config.theta2);
    SetupStates {
        psi1,
        psi_a,
        psi_b,
        psi2,
    }
}

/// `⟨a|b⟩` with the first argument conjugated.
pub fn inner(a: &PolarizationState, b: &PolarizationState) -> Complex64 {
    a.inner(b)
}
