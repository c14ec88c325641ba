//! Soliton phase-angle perturbation theory.
//!
//! On a slowly varying background the gray-soliton phase angle α = cos⁻¹η
//! obeys
//!
//!   dα/d𝒯 = ½ cos²α ∫ d𝒵 sech²𝒵 [ (1/|Φ₂|)∂|Φ₂|/∂𝒵 + (1/|S|)∂|S|/∂𝒵 ]
//!
//! with 𝒵 the co-moving soliton coordinate, |Φ₂| the background magnitude in
//! the soliton frame and |S| the condensate-fraction amplitude of the
//! quantum-depletion model (|R|² + |S|² = 1, |S| ≡ 1 means no depletion).
//! The kinematic closure is dξ₀/d𝒯 = sin α in scaled sound-speed units.

use crate::error::{Error, Result};

/// Soliton phase angle α ∈ [0, π/2), scaled center ξ₀ and scaled time 𝒯.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngleState {
    pub alpha: f64,
    pub xi0: f64,
    pub tau: f64,
}

impl PhaseAngleState {
    /// Grayness η = cos α.
    pub fn eta(&self) -> f64 {
        self.alpha.cos()
    }
}

/// Condensate fraction amplitude |S|(𝒵, 𝒯) ∈ (0, 1].
#[derive(Debug, Clone, Copy)]
pub enum DepletionProfile {
    /// |S| ≡ 1: no depletion; reduces the depleted equation bit-identically
    /// to the undepleted one.
    Uniform,
    /// |S|(𝒵) = √(1 − d·sech²𝒵): depletion localized at the soliton,
    /// d ∈ [0, 0.5).
    SechDip { depth: f64 },
}

impl DepletionProfile {
    pub fn s_mag(&self, zcap: f64, _tau: f64) -> f64 {
        match self {
            DepletionProfile::Uniform => 1.0,
            DepletionProfile::SechDip { depth } => {
                (1.0 - depth / zcap.cosh().powi(2)).sqrt()
            }
        }
    }
}

// sech²(20) < 1e-17: truncation below double-precision noise.
const WINDOW: f64 = 20.0;
const QUAD_POINTS: usize = 2048;

/// Right-hand side of the phase-angle equation. `background` is |Φ₂|(𝒵) in
/// the soliton frame at the current scaled time; it must be strictly
/// positive over |𝒵| ≤ 20.
pub fn phase_angle_rhs(
    state: &PhaseAngleState,
    background: impl Fn(f64) -> f64,
    depletion: &DepletionProfile,
) -> Result<f64> {
    let h = 2.0 * WINDOW / QUAD_POINTS as f64;
    let mut integral = 0.0;
    for j in 0..QUAD_POINTS {
        let zc = -WINDOW + j as f64 * h;
        let bg = background(zc);
        if !(bg > 0.0) {
            return Err(Error::Domain(format!(
                "background must be strictly positive over the window, got |Φ₂|({zc}) = {bg}"
            )));
        }
        // Centered differences for the 𝒵-gradients.
        let dbg = (background(zc + h) - background(zc - h)) / (2.0 * h);
        let s = depletion.s_mag(zc, state.tau);
        let ds =
            (depletion.s_mag(zc + h, state.tau) - depletion.s_mag(zc - h, state.tau)) / (2.0 * h);
        let sech2 = 1.0 / zc.cosh().powi(2);
        integral += sech2 * (dbg / bg + ds / s);
    }
    integral *= h;
    Ok(0.5 * state.alpha.cos().powi(2) * integral)
}

/// Same equation fed with a complex background wave function: only the
/// magnitude enters, so the phase profile of the background (its frequency
/// chirp in particular) has no influence on the soliton.
pub fn phase_angle_rhs_complex(
    state: &PhaseAngleState,
    background: impl Fn(f64) -> num_complex::Complex64,
    depletion: &DepletionProfile,
) -> Result<f64> {
    phase_angle_rhs(state, |zc| background(zc).norm(), depletion)
}

/// Trajectory of the coupled (α, ξ₀) system plus a saturation flag set when
/// α hit a boundary of [0, π/2) and was clamped (the soliton became fully
/// dark or disappeared).
#[derive(Debug, Clone)]
pub struct PhaseAngleTrajectory {
    pub states: Vec<PhaseAngleState>,
    pub saturated: bool,
}

const ALPHA_MAX: f64 = std::f64::consts::FRAC_PI_2 - 1e-9;

/// Classic 4th-order explicit integration of dα/d𝒯 = RHS, dξ₀/d𝒯 = sin α.
/// `background(𝒵, 𝒯)` is the soliton-frame background magnitude.
pub fn evolve_phase_angle(
    initial: PhaseAngleState,
    background: impl Fn(f64, f64) -> f64,
    depletion: &DepletionProfile,
    dtau: f64,
    n_steps: usize,
) -> Result<PhaseAngleTrajectory> {
    if !(dtau > 0.0) {
        return Err(Error::InvalidArgument(format!("dtau must be positive, got {dtau}")));
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial);
    let mut saturated = false;
    let mut s = initial;
    for _ in 0..n_steps {
        let deriv = |alpha: f64, tau: f64| -> Result<(f64, f64)> {
            let st = PhaseAngleState { alpha, xi0: s.xi0, tau };
            let da = phase_angle_rhs(&st, |zc| background(zc, tau), depletion)?;
            Ok((da, alpha.sin()))
        };
        let (k1a, k1x) = deriv(s.alpha, s.tau)?;
        let (k2a, k2x) = deriv(s.alpha + 0.5 * dtau * k1a, s.tau + 0.5 * dtau)?;
        let (k3a, k3x) = deriv(s.alpha + 0.5 * dtau * k2a, s.tau + 0.5 * dtau)?;
        let (k4a, k4x) = deriv(s.alpha + dtau * k3a, s.tau + dtau)?;
        let mut alpha = s.alpha + dtau / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        let xi0 = s.xi0 + dtau / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        if !(0.0..=ALPHA_MAX).contains(&alpha) {
            alpha = alpha.clamp(0.0, ALPHA_MAX);
            saturated = true;
        }
        s = PhaseAngleState { alpha, xi0, tau: s.tau + dtau };
        states.push(s);
    }
    Ok(PhaseAngleTrajectory { states, saturated })
}

/// Scaled variables for a spatially uniform background amplitude history:
/// 𝒯(t) = ∫₀ᵗ U₂₂·|Φ₂|²(t′) dt′ and ξ(t, z) = √U₂₂·|Φ₂|(t)·z.
pub fn scaled_variables(
    t: f64,
    z: f64,
    u22: f64,
    amplitude: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let amp_now = amplitude(t);
    if !(amp_now > 0.0) {
        return Err(Error::Domain(format!(
            "degenerate scaling: background amplitude must be positive, got {amp_now} at t = {t}"
        )));
    }
    let tau = crate::grid::simpson(0.0, t, 4096, |tp| {
        let a = amplitude(tp);
        u22 * a * a
    });
    let xi = u22.sqrt() * amp_now * z;
    Ok((tau, xi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(alpha: f64) -> PhaseAngleState {
        PhaseAngleState { alpha, xi0: 0.0, tau: 0.0 }
    }

    #[test]
    fn rhs_zero_on_uniform_background() {
        let rhs = phase_angle_rhs(&state(0.4), |_| 1.0, &DepletionProfile::Uniform).unwrap();
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn rhs_constant_relative_slope() {
        // (1/|Φ₂|)∂𝒵|Φ₂| = s constant: dα/d𝒯 = cos²α·s using ∫sech² = 2.
        let slope = 1e-3;
        let alpha = 0.7;
        let rhs =
            phase_angle_rhs(&state(alpha), |zc| (slope * zc).exp(), &DepletionProfile::Uniform)
                .unwrap();
        let want = alpha.cos().powi(2) * slope;
        assert!((rhs - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn depletion_with_matching_gradient_doubles_rhs() {
        // |S| with the same relative gradient as |Φ₂| doubles the result.
        // Use the exponential-slope background against a synthetic depletion
        // comparison computed by doubling the background slope.
        let slope = 5e-4;
        let alpha = 0.3;
        let single =
            phase_angle_rhs(&state(alpha), |zc| (slope * zc).exp(), &DepletionProfile::Uniform)
                .unwrap();
        let doubled = phase_angle_rhs(
            &state(alpha),
            |zc| (2.0 * slope * zc).exp(),
            &DepletionProfile::Uniform,
        )
        .unwrap();
        assert!((doubled - 2.0 * single).abs() < 1e-9 * single.abs());
    }

    #[test]
    fn rhs_cos2_scaling_exact() {
        let bg = |zc: f64| 1.0 + 0.05 * (0.2 * zc).tanh();
        let base = phase_angle_rhs(&state(0.0), bg, &DepletionProfile::Uniform).unwrap();
        for &alpha in &[0.2, 0.7, 1.1, 1.5] {
            let rhs = phase_angle_rhs(&state(alpha), bg, &DepletionProfile::Uniform).unwrap();
            assert!((rhs - alpha.cos().powi(2) * base).abs() <= 1e-12 * base.abs().max(1.0));
        }
    }

    #[test]
    fn rhs_antisymmetric_in_gradient_sign() {
        let plus = phase_angle_rhs(
            &state(0.5),
            |zc| 1.0 + 0.03 * (0.3 * zc).tanh(),
            &DepletionProfile::Uniform,
        )
        .unwrap();
        let minus = phase_angle_rhs(
            &state(0.5),
            |zc| 1.0 - 0.03 * (0.3 * zc).tanh(),
            &DepletionProfile::Uniform,
        )
        .unwrap();
        // Not exactly equal magnitudes (1/|Φ₂| differs), so flip the
        // gradient by reflecting the profile instead.
        let reflected = phase_angle_rhs(
            &state(0.5),
            |zc| 1.0 + 0.03 * (-0.3 * zc).tanh(),
            &DepletionProfile::Uniform,
        )
        .unwrap();
        assert!((plus + reflected).abs() < 1e-12 * plus.abs().max(1e-30));
        let _ = minus;
    }

    #[test]
    fn rhs_rejects_nonpositive_background() {
        let err =
            phase_angle_rhs(&state(0.4), |zc| 1.0 - 0.2 * zc, &DepletionProfile::Uniform);
        assert!(err.is_err());
    }

    #[test]
    fn uniform_background_keeps_alpha_constant() {
        let traj = evolve_phase_angle(
            state(0.6),
            |_, _| 1.0,
            &DepletionProfile::Uniform,
            1e-3,
            1000,
        )
        .unwrap();
        assert!(!traj.saturated);
        for s in &traj.states {
            assert!((s.alpha - 0.6).abs() < 1e-12);
        }
        // ξ₀ advances at sin α.
        let last = traj.states.last().unwrap();
        assert!((last.xi0 - 0.6f64.sin() * last.tau).abs() < 1e-10);
    }

    #[test]
    fn rk4_richardson_ratio() {
        // Halving d𝒯 changes the final α by O(d𝒯⁴): ratio ≈ 16.
        let bg = |zc: f64, tau: f64| 1.0 + 0.2 * ((0.3 * (zc - 0.5 * tau)).tanh());
        let run = |dtau: f64, n: usize| {
            evolve_phase_angle(state(0.5), bg, &DepletionProfile::Uniform, dtau, n)
                .unwrap()
                .states
                .last()
                .unwrap()
                .alpha
        };
        let a1 = run(0.2, 10);
        let a2 = run(0.1, 20);
        let a3 = run(0.05, 40);
        let ratio = (a1 - a2) / (a2 - a3);
        assert!(
            (14.0..=18.0).contains(&ratio),
            "Richardson ratio {ratio} outside [14, 18]"
        );
    }

    #[test]
    fn uniform_depletion_is_bit_exact_reduction() {
        let bg = |zc: f64| 1.0 + 0.01 * (0.1 * zc).sin();
        let undepleted =
            phase_angle_rhs(&state(0.8), bg, &DepletionProfile::Uniform).unwrap();
        let depleted =
            phase_angle_rhs(&state(0.8), bg, &DepletionProfile::SechDip { depth: 0.0 }).unwrap();
        assert_eq!(undepleted.to_bits(), depleted.to_bits());
    }

    #[test]
    fn scaled_variables_constant_background() {
        let (tau, xi) = scaled_variables(3.0, 5.0, 1.0, |_| 1.0).unwrap();
        assert!((tau - 3.0).abs() < 1e-12);
        assert!((xi - 5.0).abs() < 1e-12);
        // |Φ₂| = 2: 𝒯 = 4t, ξ = 2z.
        let (tau, xi) = scaled_variables(3.0, 5.0, 1.0, |_| 2.0).unwrap();
        assert!((tau - 12.0).abs() < 1e-10);
        assert!((xi - 10.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_time_matches_analytic_for_decaying_background() {
        // amplitude(t) = a₀(1+(t/t_d)²)^{−1/4}: 𝒯 = U₂₂a₀²t_d·asinh(t/t_d).
        let (a0, td, u22) = (1.3, 20.0, 0.8);
        let amp = move |t: f64| a0 * (1.0 + (t / td).powi(2)).powf(-0.25);
        let t = 17.0;
        let (tau, _) = scaled_variables(t, 0.0, u22, amp).unwrap();
        let analytic = u22 * a0 * a0 * td * (t / td).asinh();
        assert!((tau - analytic).abs() < 1e-8 * analytic);
    }
}
