//! Browser bindings for the simulator: three interactive operations behind
//! `wasm-bindgen`, each returning flat `Vec<f64>` buffers that the page
//! plots on a canvas.

use wasm_bindgen::prelude::wasm_bindgen;

use graylaser::grid::Grid1D;
use graylaser::nlse::{two_soliton_field, BackgroundSpec, Evolver, NlseParams};
use graylaser::perturbation::{evolve_phase_angle, DepletionProfile, PhaseAngleState};
use graylaser::transfer::{chirp_analytic, ChirpSpec};

/// Analytic output chirp, normalized to its scale Λ₀, for a pulse of order
/// `m` (1 = Gaussian, 3 = super-Gaussian). Returns `n` interleaved
/// (T/T0, chirp/Λ₀) pairs over T/T0 ∈ [−3, 3].
#[wasm_bindgen]
pub fn chirp_curve(m: u32, n: usize) -> Vec<f64> {
    let m = m.clamp(1, 5);
    let n = n.clamp(2, 16384);
    let spec = ChirpSpec { m, t0: 1.0, lambda0: 1.0 };
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let u = -3.0 + 6.0 * j as f64 / (n - 1) as f64;
        out.push(u);
        out.push(chirp_analytic(u, &spec));
    }
    out
}

/// Split a two-soliton initial state on a decaying background and return the
/// final density profile as interleaved (z, ρ/ρ_bg) pairs. `eta` is the
/// initial grayness, `t_d` the background decay time, `t_final` the
/// evolution time.
#[wasm_bindgen]
pub fn soliton_split_density(eta: f64, t_d: f64, t_final: f64) -> Vec<f64> {
    let eta = eta.clamp(0.05, 0.99);
    let t_d = t_d.clamp(1.0, 100.0);
    let t_final = t_final.clamp(0.0, 40.0);
    let grid = Grid1D::new(1024, 120.0, -60.0).unwrap();
    let params = NlseParams { g22: 1.0, k_bg: 0.0 };
    let field = two_soliton_field(eta, 1.0, &params, grid, 0.0).unwrap();
    let bg = BackgroundSpec::GaussianPeakDecay { a0: 1.0, t_d };
    let dt = 2e-3;
    let n_steps = (t_final / dt).round() as usize;
    let evolver = Evolver::new(grid, params);
    let final_field = if n_steps == 0 {
        field
    } else {
        let traj = evolver.evolve(&field, dt, n_steps, &bg, n_steps, 0.0).unwrap();
        traj.snapshots.last().unwrap().clone()
    };
    let rho_bg = bg.amplitude(t_final).powi(2);
    let mut out = Vec::with_capacity(2 * grid.n_points());
    for (z, v) in grid.coords().iter().zip(final_field.values()) {
        out.push(*z);
        out.push(v.norm_sqr() / rho_bg);
    }
    out
}

/// Integrate the soliton phase-angle law on an exponential-slope background
/// and return interleaved (𝒯, α, η, ξ₀) quadruples.
#[wasm_bindgen]
pub fn phase_angle_trajectory(
    alpha0: f64,
    bg_slope: f64,
    depletion_depth: f64,
    tau_final: f64,
) -> Vec<f64> {
    let alpha0 = alpha0.clamp(0.0, 1.5);
    let bg_slope = bg_slope.clamp(-0.2, 0.2);
    let depletion_depth = depletion_depth.clamp(0.0, 0.45);
    let tau_final = tau_final.clamp(0.1, 100.0);
    let n_steps = 400;
    let dtau = tau_final / n_steps as f64;
    let depletion = if depletion_depth > 0.0 {
        DepletionProfile::SechDip { depth: depletion_depth }
    } else {
        DepletionProfile::Uniform
    };
    let initial = PhaseAngleState { alpha: alpha0, xi0: 0.0, tau: 0.0 };
    let traj = evolve_phase_angle(
        initial,
        |zc, _tau| (bg_slope * zc).exp(),
        &depletion,
        dtau,
        n_steps,
    )
    .unwrap();
    let mut out = Vec::with_capacity(4 * traj.states.len());
    for s in &traj.states {
        out.push(s.tau);
        out.push(s.alpha);
        out.push(s.eta());
        out.push(s.xi0);
    }
    out
}

// Keep the bindings honest on the host target too.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chirp_curve_shape_and_peak() {
        let pts = chirp_curve(1, 601);
        assert_eq!(pts.len(), 1202);
        let (mut peak_u, mut peak) = (0.0, f64::MIN);
        for pair in pts.chunks(2) {
            assert!(pair[0].is_finite() && pair[1].is_finite());
            if pair[1] > peak {
                peak = pair[1];
                peak_u = pair[0];
            }
        }
        assert!((peak_u - 1.0 / 2.0f64.sqrt()).abs() < 0.02);
        assert!((peak - 0.4289).abs() < 1e-3);
    }

    #[test]
    fn soliton_split_density_is_normalized() {
        let pts = soliton_split_density(0.5, 20.0, 4.0);
        assert_eq!(pts.len(), 2048);
        let max = pts.chunks(2).map(|p| p[1]).fold(f64::MIN, f64::max);
        let min = pts.chunks(2).map(|p| p[1]).fold(f64::MAX, f64::min);
        assert!(max < 1.5, "density ratio peak {max}");
        assert!(min > 0.0 && min < 0.9, "dip {min} missing");
    }

    #[test]
    fn phase_angle_trajectory_monotone_for_negative_slope() {
        let pts = phase_angle_trajectory(0.5, -0.05, 0.0, 10.0);
        assert_eq!(pts.len(), 4 * 401);
        let alphas: Vec<f64> = pts.chunks(4).map(|q| q[1]).collect();
        assert!(alphas.windows(2).all(|w| w[1] <= w[0]));
        assert!(*alphas.last().unwrap() < 0.5);
    }
}
