//! N identically polarized photons in the interferometer (NOON-type path
//! states) and the two-photon beam-splitter algebra.
//!
//! N-photon overlaps are never built as 2^N-dimensional tensors: for
//! product states `⟨Ψa|Ψb⟩ = ⟨ψa|ψb⟩^N`, which is exact.

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use libm::{cos, pow};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometric::{
    closed_form_relative_phase, closed_form_success_probability, half_geometric_angle,
};
use crate::phase::wrap;
use crate::polarization::{inner, SetupConfig, SetupStates};
use crate::DEGENERATE_OVERLAP;

/// N-photon fringe parameters before and after post-selection.
///
/// From [`nphoton_postselect`] the phases are the literal closed-form values
/// (not wrapped), so they vary continuously in θ₁ for plotting; from
/// [`nphoton_from_states`] they are wrapped to (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NPhotonReport {
    /// `P`, probability that all N photons pass the final polarizer.
    pub success_probability: f64,
    /// `V_f`
    pub visibility: f64,
    /// `Φ_f`
    pub phase: f64,
    /// `Φ_m`
    pub phase_m: f64,
    /// `V_m`
    pub visibility_m: f64,
    pub photon_number: u32,
}

impl NPhotonReport {
    /// N-photon geometric phase `Φ_f − Φ_m`.
    pub fn geometric(&self) -> f64 {
        self.phase - self.phase_m
    }
}

/// Closed forms for the setup states:
/// `P = pᴺ`, `V_f = 1`, `Φ_f = 2N·tan⁻¹(tanθ₁/tanθ₂) + Nπ/2`,
/// `V_m = |cos2θ₁|ᴺ`, `Φ_m = N·(±π/2)`.
pub fn nphoton_postselect(config: &SetupConfig) -> Result<NPhotonReport> {
    let (t1, t2) = (config.theta1(), config.theta2());
    if libm::sin(t2).abs() < 1e-15 {
        return Err(Error::InvalidAngle {
            name: "theta2",
            value: t2,
            reason: "tan(theta2) must be nonzero",
        });
    }
    let n = config.photon_number();
    let nf = f64::from(n);
    Ok(NPhotonReport {
        success_probability: pow(closed_form_success_probability(t1, t2), nf),
        visibility: 1.0,
        phase: 2.0 * nf * half_geometric_angle(t1, t2) + nf * FRAC_PI_2,
        phase_m: nf * closed_form_relative_phase(t1),
        visibility_m: pow(cos(2.0 * t1).abs(), nf),
        photon_number: n,
    })
}

/// Overlap-power route from arbitrary arm states and post-selected state.
/// Fails when a phase is undefined (orthogonal arms, or a blocked arm).
pub fn nphoton_from_states(states: &SetupStates, photon_number: u32) -> Result<NPhotonReport> {
    if photon_number == 0 {
        return Err(Error::InvalidPhotonNumber);
    }
    let n = photon_number as i32;
    let nf = f64::from(photon_number);
    let SetupStates {
        psi_a, psi_b, psi2, ..
    } = states;
    let ba = inner(psi_b, psi_a);
    let ca = inner(psi2, psi_a);
    let cb = inner(psi2, psi_b);
    for z in [ba, ca, cb] {
        if z.norm() <= DEGENERATE_OVERLAP {
            return Err(Error::DegenerateOverlap { magnitude: z.norm() });
        }
    }
    let (pa, pb) = (ca.norm_sqr().powi(n), cb.norm_sqr().powi(n));
    Ok(NPhotonReport {
        success_probability: 0.5 * (pa + pb),
        visibility: 2.0 * (ca * cb).norm().powi(n) / (pa + pb),
        phase: wrap(nf * (cb.conj() * ca).arg()),
        phase_m: wrap(nf * ba.arg()),
        visibility_m: ba.norm().powi(n),
        photon_number,
    })
}

/// Post-selected N-photon intensity `2P[1 + V_f cos(Nχ − Φ_f)]` (arbitrary units).
pub fn nphoton_fringe(config: &SetupConfig, chi: f64) -> Result<f64> {
    let r = nphoton_postselect(config)?;
    let nf = f64::from(r.photon_number);
    Ok(2.0 * r.success_probability * (1.0 + r.visibility * cos(nf * chi - r.phase)))
}

/// Intensity without post-selection, `2[1 + V_m cos(Nχ − Φ_m)]`.
pub fn preselection_fringe(config: &SetupConfig, chi: f64) -> Result<f64> {
    let r = nphoton_postselect(config)?;
    let nf = f64::from(r.photon_number);
    Ok(2.0 * (1.0 + r.visibility_m * cos(nf * chi - r.phase_m)))
}

/// Two photons inside the interferometer, as coefficients of
/// `a†²`, `b†²` and `a†b†` acting on vacuum (paths A and B). Unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonPathState {
    pub amp_20: Complex64,
    pub amp_02: Complex64,
    pub amp_11: Complex64,
}

impl TwoPhotonPathState {
    /// `⟨state|state⟩`; `a†²|0⟩` has squared norm 2.
    pub fn norm_sqr(&self) -> f64 {
        2.0 * self.amp_20.norm_sqr() + 2.0 * self.amp_02.norm_sqr() + self.amp_11.norm_sqr()
    }
}

/// First beam splitter acting on `|2⟩₁|0⟩₁′`, with χ on path B:
/// `(1, e^{i2χ}, 2e^{iχ})`.
pub fn mz_two_photon_expand(chi: f64) -> TwoPhotonPathState {
    TwoPhotonPathState {
        amp_20: Complex64::new(1.0, 0.0),
        amp_02: Complex64::from_polar(1.0, 2.0 * chi),
        amp_11: Complex64::from_polar(2.0, chi),
    }
}

/// Symmetric lossless 50:50 splitter: `a† → t·c† + r·d†`, `b† → r·c† + t·d†`
/// with `t = 1/√2`, `r = i/√2`.
const T: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);
const R: Complex64 = Complex64::new(0.0, FRAC_1_SQRT_2);

/// Contributions of each path term to the `c†d†` (one photon in each
/// output port) coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceBreakdown {
    pub from_20: Complex64,
    pub from_02: Complex64,
    pub from_11: Complex64,
}

impl CoincidenceBreakdown {
    pub fn total(&self) -> Complex64 {
        self.from_20 + self.from_02 + self.from_11
    }
}

pub fn coincidence_breakdown(state: &TwoPhotonPathState) -> CoincidenceBreakdown {
    CoincidenceBreakdown {
        from_20: state.amp_20 * (T * R + R * T),
        from_02: state.amp_02 * (R * T + T * R),
        // a†b† → (t c† + r d†)(r c† + t d†); the c†d† coefficient t² + r² vanishes
        from_11: state.amp_11 * (T * T + R * R),
    }
}

/// Amplitude for one photon at port 2 and one at port 2′ after the second
/// beam splitter. For the interferometer state this is `i(1 + e^{i2χ})`.
pub fn coincidence_amplitude(state: &TwoPhotonPathState) -> Complex64 {
    coincidence_breakdown(state).total()
}

/// Normalized output-port distribution `(P(2,0), P(0,2), P(1,1))` after the
/// second beam splitter.
pub fn output_distribution(state: &TwoPhotonPathState) -> (f64, f64, f64) {
    let c2 = state.amp_20 * T * T + state.amp_02 * R * R + state.amp_11 * T * R;
    let d2 = state.amp_20 * R * R + state.amp_02 * T * T + state.amp_11 * R * T;
    let cd = coincidence_amplitude(state);
    let norm = state.norm_sqr();
    (
        2.0 * c2.norm_sqr() / norm,
        2.0 * d2.norm_sqr() / norm,
        cd.norm_sqr() / norm,
    )
}

/// Two-photon coincidence probability between ports 2 and 2′ at offset χ.
pub fn coincidence_probability(chi: f64) -> f64 {
    output_distribution(&mz_two_photon_expand(chi)).2
}

/// One-photon probability at port 2 for a single photon entering port 1.
pub fn single_photon_port_probability(chi: f64) -> f64 {
    // same first-splitter convention as the two-photon expansion: equal
    // real amplitudes on A and B, χ on B
    let amp = (T + Complex64::from_polar(1.0, chi) * R) * FRAC_1_SQRT_2;
    amp.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometric::{closed_form_one_photon, continuous_half_angle};
    use crate::phase::mod_2pi_distance;
    use crate::polarization::{prepare_setup_states, PolarizationState};
    use core::f64::consts::{FRAC_PI_4, PI, TAU};
    use std::vec::Vec;

    fn cfg(t1: f64, t2: f64, n: u32) -> SetupConfig {
        SetupConfig::new(t1, t2, n, 0.0).unwrap()
    }

    /// ψ^{⊗N} as an explicit 2^N vector.
    fn tensor_power(s: &PolarizationState, n: u32) -> Vec<Complex64> {
        let mut v = std::vec![Complex64::new(1.0, 0.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(v.len() * 2);
            for x in &v {
                next.push(*x * s.h());
                next.push(*x * s.v());
            }
            v = next;
        }
        v
    }

    fn tensor_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn n1_reduces_to_one_photon() {
        for &(t1, t2) in &[(0.1, 0.3), (-0.7, 1.2), (1.0, 2.5), (0.0, 0.4)] {
            let one = closed_form_one_photon(t1, t2).unwrap();
            let n = nphoton_postselect(&cfg(t1, t2, 1)).unwrap();
            assert_eq!(n.success_probability, one.success_probability);
            assert!(mod_2pi_distance(n.phase, one.phase_f).abs() < 1e-12);
            assert!(mod_2pi_distance(n.phase_m, one.phase_m).abs() < 1e-12);
            assert!(mod_2pi_distance(n.geometric(), one.geometric).abs() < 1e-12);
            assert_eq!(n.visibility_m, one.visibility_m);
        }
    }

    #[test]
    fn two_photon_example() {
        let r = nphoton_postselect(&cfg(0.0, FRAC_PI_4, 2)).unwrap();
        assert!((r.success_probability - 0.25).abs() < 1e-15);
        assert!((r.phase - PI).abs() < 1e-15);
    }

    #[test]
    fn two_photon_slope_is_twice_one_photon() {
        let h = 1e-6;
        for &t2 in &[PI / 50.0, PI / 10.0, FRAC_PI_4, 1.3, 2.0] {
            let slope = |n| {
                let hi = nphoton_postselect(&cfg(h, t2, n)).unwrap().phase;
                let lo = nphoton_postselect(&cfg(-h, t2, n)).unwrap().phase;
                (hi - lo) / (2.0 * h)
            };
            let ratio = slope(2) / slope(1);
            assert!((ratio - 2.0).abs() < 1e-6, "theta2 = {t2}: {ratio}");
        }
    }

    #[test]
    fn overlap_power_route_matches_tensor_products() {
        for n in 1..=5u32 {
            for &(t1, t2) in &[(0.2, 0.3), (-0.6, 1.0), (1.2, 2.7), (0.05, PI / 50.0)] {
                let states = prepare_setup_states(&cfg(t1, t2, n));
                let r = nphoton_from_states(&states, n).unwrap();
                let (ta, tb, t2v) = (
                    tensor_power(&states.psi_a, n),
                    tensor_power(&states.psi_b, n),
                    tensor_power(&states.psi2, n),
                );
                let ca = tensor_inner(&t2v, &ta);
                let cb = tensor_inner(&t2v, &tb);
                let ba = tensor_inner(&tb, &ta);
                let p = 0.5 * (ca.norm_sqr() + cb.norm_sqr());
                assert!((r.success_probability - p).abs() < 1e-12);
                assert!(mod_2pi_distance(r.phase, (cb.conj() * ca).arg()).abs() < 1e-9);
                assert!(mod_2pi_distance(r.phase_m, ba.arg()).abs() < 1e-9);
                assert!((r.visibility_m - ba.norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn power_law_and_unit_visibility() {
        for n in 1..=5u32 {
            for i in 0..=18 {
                let t1 = -FRAC_PI_2 + PI * f64::from(i) / 18.0;
                for j in 1..18 {
                    let t2 = PI * f64::from(j) / 18.0;
                    let r = nphoton_postselect(&cfg(t1, t2, n)).unwrap();
                    let p = closed_form_one_photon(t1, t2).unwrap().success_probability;
                    assert!((r.success_probability - p.powi(n as i32)).abs() < 1e-12);
                    assert_eq!(r.visibility, 1.0);
                    let one = closed_form_one_photon(t1, t2).unwrap().phase_f;
                    assert!(mod_2pi_distance(r.phase, f64::from(n) * one).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn n_fold_phase_span() {
        for n in 1..=3u32 {
            for &t2 in &[PI / 50.0, PI / 10.0, FRAC_PI_4] {
                let nf = f64::from(n);
                let span = 2.0 * nf * (continuous_half_angle(FRAC_PI_2, t2) - continuous_half_angle(-FRAC_PI_2, t2));
                assert!((span - TAU * nf).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fringe_examples() {
        let c = cfg(0.2, 0.5, 2);
        let r = nphoton_postselect(&c).unwrap();
        // period π in χ for N = 2
        for k in 0..20 {
            let chi = 0.31 * f64::from(k);
            let a = nphoton_fringe(&c, chi).unwrap();
            let b = nphoton_fringe(&c, chi + PI).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let chi_min = (r.phase + PI) / 2.0;
        assert!(nphoton_fringe(&c, chi_min).unwrap().abs() < 1e-12);

        let flat = cfg(FRAC_PI_4, 0.5, 2);
        let r = nphoton_postselect(&flat).unwrap();
        assert!(r.visibility_m < 1e-12);
        let vals: Vec<f64> = (0..10)
            .map(|k| preselection_fringe(&flat, 0.4 * f64::from(k)).unwrap())
            .collect();
        assert!(vals.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn expansion_examples() {
        let s = mz_two_photon_expand(0.0);
        assert_eq!(s.amp_20, Complex64::new(1.0, 0.0));
        assert!((s.amp_02 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s.amp_11 - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let s = mz_two_photon_expand(FRAC_PI_2);
        assert!((s.amp_02 - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.amp_11 - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        for k in 0..10 {
            let s = mz_two_photon_expand(0.7 * f64::from(k));
            assert!((s.amp_20.norm() - 1.0).abs() < 1e-15);
            assert!((s.amp_02.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hong_ou_mandel_suppression() {
        let only_11 = TwoPhotonPathState {
            amp_20: Complex64::new(0.0, 0.0),
            amp_02: Complex64::new(0.0, 0.0),
            amp_11: Complex64::new(0.3, -1.7),
        };
        assert_eq!(coincidence_amplitude(&only_11), Complex64::new(0.0, 0.0));
        assert!(coincidence_amplitude(&mz_two_photon_expand(FRAC_PI_2)).norm() < 1e-15);
        let max = coincidence_probability(0.0);
        for k in 1..50 {
            assert!(coincidence_probability(0.1 * f64::from(k)) <= max + 1e-15);
        }
    }

    #[test]
    fn output_distribution_is_normalized() {
        for k in 0..30 {
            let (a, b, c) = output_distribution(&mz_two_photon_expand(0.23 * f64::from(k)));
            assert!((a + b + c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coincidence_fringe_has_half_period() {
        for k in 0..40 {
            let chi = 0.17 * f64::from(k);
            let one = single_photon_port_probability(chi);
            assert!((one - single_photon_port_probability(chi + TAU)).abs() < 1e-12);
            let two = coincidence_probability(chi);
            assert!((two - coincidence_probability(chi + PI)).abs() < 1e-12);
            // 1 + cos2χ up to scale
            assert!((two - 0.25 * (1.0 + libm::cos(2.0 * chi))).abs() < 1e-12);
        }
        // the one-photon fringe does not repeat after π
        assert!((single_photon_port_probability(0.3) - single_photon_port_probability(0.3 + PI)).abs() > 0.1);
    }
}
