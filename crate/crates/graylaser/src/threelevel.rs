//! Mean-field three-level oracle for the transfer stage.
//!
//! Co-propagates the probe amplitude ℰ with the atomic amplitudes Φ₂, Φ₃
//! under the frozen-pump equations (Ψ₁ ≈ √n, all phases absorbed into the
//! slowly varying frames):
//!
//!   (∂t + c∂z)ℰ            = −i g√n Φ₃
//!   i∂tΦ₂ = (−i v∂z − κ·½∂²z + δ₂ + U₂₂|Φ₂|²)Φ₂ + Ω₀(z)Φ₃
//!   i∂tΦ₃ = (−i v∂z − κ·½∂²z + ε₁₃ − iγ)Φ₃ + g√n ℰ + Ω₀(z)Φ₂
//!
//! with δ₂ = ε₁₂ + V₂ + nU₂₁ and κ the kinetic-term switch. Strang split:
//! spectral transport, exact pointwise integration of the static 3×3
//! coupling/loss system (precomputed matrix exponentials), pointwise
//! nonlinear phase.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid1D};
use crate::transfer::{group_velocity, mixing_angle, ControlProfile, TransferParams};

#[derive(Debug, Clone, Copy)]
pub struct ThreeLevelParams {
    pub transfer: TransferParams,
    /// Loss rate out of the excited state.
    pub gamma: f64,
    /// Two-photon detuning.
    pub eps12: f64,
    /// One-photon detuning.
    pub eps13: f64,
    /// Retain the −½∂²z atomic kinetic terms (negligible at the chosen
    /// scales; off by default in the comparison preset for speed).
    pub include_kinetic: bool,
}

impl ThreeLevelParams {
    pub fn coupling(&self) -> f64 {
        self.transfer.g2n.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ThreeLevelState {
    pub probe: ComplexField,
    pub psi2: ComplexField,
    pub psi3: ComplexField,
    pub t: f64,
}

impl ThreeLevelState {
    pub fn vacuum(grid: Grid1D) -> Self {
        ThreeLevelState {
            probe: ComplexField::zeros(grid),
            psi2: ComplexField::zeros(grid),
            psi3: ComplexField::zeros(grid),
            t: 0.0,
        }
    }

    /// Total excitation number N = ∫(|ℰ|² + |Φ₂|² + |Φ₃|²)dz; conserved for
    /// γ = 0, U₂₂ = 0 and non-increasing for γ > 0.
    pub fn excitation_number(&self) -> f64 {
        self.probe.norm_sq() + self.psi2.norm_sq() + self.psi3.norm_sq()
    }
}

type Mat3 = [[Complex64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn mat_norm(a: &Mat3) -> f64 {
    (0..3)
        .map(|i| a[i].iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// exp(A) for a 3×3 complex matrix by scaling-and-squaring with a Taylor
/// series summed to machine precision.
fn expm(a: &Mat3) -> Mat3 {
    let norm = mat_norm(a);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(s as i32);
    let mut scaled = *a;
    for row in scaled.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let mut result: Mat3 = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let mut term = result;
    for k in 1..=30 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
        if mat_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}

/// Strang-split time stepper with precomputed per-point propagators (the
/// control profile is static, so the pointwise 3×3 system is integrated
/// exactly once and reused every step).
pub struct Stepper {
    grid: Grid1D,
    params: ThreeLevelParams,
    dt: f64,
    probe_phase: Vec<Complex64>,
    atom_phase: Vec<Complex64>,
    half_props: Vec<Mat3>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Stepper {
    pub fn new(
        grid: Grid1D,
        params: ThreeLevelParams,
        profile: &ControlProfile,
        dt: f64,
    ) -> Result<Self> {
        let cfl = grid.spacing() / params.transfer.c;
        if !(dt > 0.0) || dt > cfl {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} violates the advection stability bound dt <= dx/c = {cfl:.6e}"
            )));
        }
        let gn = params.coupling();
        let v = params.transfer.v();
        let kappa = if params.include_kinetic { 1.0 } else { 0.0 };
        let ks = grid.wavenumbers();
        let probe_phase = ks
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -params.transfer.c * k * dt))
            .collect();
        let atom_phase = ks
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -(v * k + kappa * 0.5 * k * k) * dt))
            .collect();
        let delta2 = params.eps12 + params.transfer.v2 + params.transfer.u21;
        let half_props = (0..grid.n_points())
            .map(|j| {
                let omega = profile.omega0(grid.coord(j));
                let zero = Complex64::new(0.0, 0.0);
                // −iH·dt/2 with H = [[0,0,gn],[0,δ₂,Ω],[gn,Ω,ε₁₃−iγ]].
                let f = Complex64::new(0.0, -0.5 * dt);
                let h: Mat3 = [
                    [zero, zero, f * gn],
                    [zero, f * delta2, f * omega],
                    [f * gn, f * omega, f * Complex64::new(params.eps13, -params.gamma)],
                ];
                expm(&h)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Stepper {
            grid,
            params,
            dt,
            probe_phase,
            atom_phase,
            half_props,
            fft: planner.plan_fft_forward(grid.n_points()),
            ifft: planner.plan_fft_inverse(grid.n_points()),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn pointwise_half(
        &self,
        probe: &mut [Complex64],
        psi2: &mut [Complex64],
        psi3: &mut [Complex64],
    ) {
        let u22 = self.params.transfer.u22;
        let quarter = 0.25 * self.dt;
        for j in 0..probe.len() {
            if u22 != 0.0 {
                psi2[j] *= Complex64::from_polar(1.0, -u22 * psi2[j].norm_sqr() * quarter);
            }
            let m = &self.half_props[j];
            let (e, p2, p3) = (probe[j], psi2[j], psi3[j]);
            probe[j] = m[0][0] * e + m[0][1] * p2 + m[0][2] * p3;
            psi2[j] = m[1][0] * e + m[1][1] * p2 + m[1][2] * p3;
            psi3[j] = m[2][0] * e + m[2][1] * p2 + m[2][2] * p3;
            if u22 != 0.0 {
                psi2[j] *= Complex64::from_polar(1.0, -u22 * psi2[j].norm_sqr() * quarter);
            }
        }
    }

    fn transport(&self, values: &mut [Complex64], phases: &[Complex64]) {
        self.fft.process(values);
        let scale = 1.0 / values.len() as f64;
        for (v, ph) in values.iter_mut().zip(phases) {
            *v *= ph * scale;
        }
        self.ifft.process(values);
    }

    /// One Strang step.
    pub fn step(&self, state: &ThreeLevelState) -> Result<ThreeLevelState> {
        let mut probe = state.probe.values().to_vec();
        let mut psi2 = state.psi2.values().to_vec();
        let mut psi3 = state.psi3.values().to_vec();
        self.pointwise_half(&mut probe, &mut psi2, &mut psi3);
        self.transport(&mut probe, &self.probe_phase);
        self.transport(&mut psi2, &self.atom_phase);
        self.transport(&mut psi3, &self.atom_phase);
        self.pointwise_half(&mut probe, &mut psi2, &mut psi3);
        Ok(ThreeLevelState {
            probe: ComplexField::new(self.grid, probe)?,
            psi2: ComplexField::new(self.grid, psi2)?,
            psi3: ComplexField::new(self.grid, psi3)?,
            t: state.t + self.dt,
        })
    }
}

/// Input probe pulse: amplitude·exp(−½((z−center)/σ)^{2m}) with spatial
/// width σ = V_g(center)·t0.
#[derive(Debug, Clone, Copy)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub t0: f64,
    pub order: u32,
    pub center: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RunDiagnostics {
    /// max over sampled steps of ∫|Φ₃|²dz / ∫|Φ₂|²dz.
    pub peak_excited_fraction: f64,
    pub initial_excitation: f64,
    pub final_excitation: f64,
}

#[derive(Debug)]
pub struct TransferRun {
    pub state: ThreeLevelState,
    pub diagnostics: RunDiagnostics,
}

const EDGE_POINTS: usize = 4;
const EDGE_CHECK_STRIDE: usize = 50;

fn edge_amplitude(field: &ComplexField) -> f64 {
    let n = field.grid().n_points();
    let vals = field.values();
    (0..EDGE_POINTS)
        .map(|j| vals[j].norm().max(vals[n - 1 - j].norm()))
        .fold(0.0, f64::max)
}

/// Drive the three-level system from a dark-state-consistent initial pulse
/// to time `t_final`. Errors if any field touches the window edges.
pub fn run_transfer(
    grid: Grid1D,
    params: &ThreeLevelParams,
    prof: &ControlProfile,
    pulse: &PulseSpec,
    dt: f64,
    t_final: f64,
) -> Result<TransferRun> {
    params.transfer.validate()?;
    let stepper = Stepper::new(grid, *params, prof, dt)?;
    let gn = params.coupling();
    let vg0 = group_velocity(pulse.center, prof, &params.transfer)?;
    let sigma = vg0 * pulse.t0;
    let probe = ComplexField::from_fn(grid, |z| {
        let u = (z - pulse.center) / sigma;
        Complex64::new(pulse.amplitude * (-0.5 * u.powi(2 * pulse.order as i32)).exp(), 0.0)
    });
    // Local dark state: Φ₂ = −(g√n/Ω₀)ℰ, Φ₃ = 0.
    let psi2 = ComplexField::new(
        grid,
        probe
            .values()
            .iter()
            .enumerate()
            .map(|(j, &e)| -gn / prof.omega0(grid.coord(j)) * e)
            .collect(),
    )?;
    let mut state = ThreeLevelState { probe, psi2, psi3: ComplexField::zeros(grid), t: 0.0 };

    let initial_excitation = state.excitation_number();
    let mut peak_excited_fraction: f64 = 0.0;
    let n_steps = (t_final / dt).ceil() as usize;
    for step in 0..n_steps {
        state = stepper.step(&state)?;
        if step % EDGE_CHECK_STRIDE == 0 {
            let peak = state
                .probe
                .max_abs()
                .max(state.psi2.max_abs())
                .max(state.psi3.max_abs());
            let edge = edge_amplitude(&state.probe)
                .max(edge_amplitude(&state.psi2))
                .max(edge_amplitude(&state.psi3));
            if peak > 0.0 && edge > 1e-6 * peak {
                return Err(Error::Windowing(format!(
                    "pulse touched the window boundary at t = {:.4} (edge/peak = {:.3e})",
                    state.t,
                    edge / peak
                )));
            }
            let n2 = state.psi2.norm_sq();
            if n2 > 0.0 {
                peak_excited_fraction = peak_excited_fraction.max(state.psi3.norm_sq() / n2);
            }
        }
    }
    let final_excitation = state.excitation_number();
    Ok(TransferRun {
        state,
        diagnostics: RunDiagnostics {
            peak_excited_fraction,
            initial_excitation,
            final_excitation,
        },
    })
}

/// Fraction of the state-2 excitation satisfying the dark-state relation
/// Φ₂ = −(g√n/Ω₀)ℰ, clipped to [0, 1]. A zero Φ₂ is vacuously dark.
pub fn dark_state_projection(
    state: &ThreeLevelState,
    prof: &ControlProfile,
    params: &ThreeLevelParams,
) -> f64 {
    let gn = params.coupling();
    let grid = state.psi2.grid();
    let denom = state.psi2.norm_sq();
    if denom == 0.0 {
        return 1.0;
    }
    let mut residual = 0.0;
    for j in 0..grid.n_points() {
        let want = -gn / prof.omega0(grid.coord(j)) * state.probe.values()[j];
        residual += (state.psi2.values()[j] - want).norm_sqr();
    }
    residual *= grid.spacing();
    (1.0 - residual / denom).clamp(0.0, 1.0)
}

/// |Φ₂|(z) predicted by the adiabatic transfer map at lab time `t`:
/// √(c/v)·sinθ(z)/cosθ(0)·|ℰ(0, t − τ(z))| with τ the cumulative inverse
/// group velocity anchored at z = 0.
pub fn adiabatic_prediction(
    grid: Grid1D,
    prof: &ControlProfile,
    p: &TransferParams,
    pulse: &PulseSpec,
    t: f64,
) -> Result<Vec<f64>> {
    let n = grid.n_points();
    let dx = grid.spacing();
    // Cumulative trapezoid of 1/V_g across the grid, then re-anchor at z = 0.
    let inv_vg: Vec<f64> = (0..n)
        .map(|j| group_velocity(grid.coord(j), prof, p).map(|vg| 1.0 / vg))
        .collect::<Result<_>>()?;
    let mut cum = vec![0.0f64; n];
    for j in 1..n {
        cum[j] = cum[j - 1] + 0.5 * dx * (inv_vg[j - 1] + inv_vg[j]);
    }
    let x0 = (0.0 - grid.origin()) / dx;
    let j0 = (x0.floor() as usize).min(n - 2);
    let w0 = x0 - j0 as f64;
    let tau_at_zero = cum[j0] * (1.0 - w0) + cum[j0 + 1] * w0;

    let vg0 = group_velocity(pulse.center, prof, p)?;
    let t_arrival = -pulse.center / vg0;
    let cos0 = mixing_angle(0.0, prof, p)?.cos();
    let amp = (p.c / p.v()).sqrt();
    (0..n)
        .map(|j| {
            let theta = mixing_angle(grid.coord(j), prof, p)?;
            let tt = t - (cum[j] - tau_at_zero) - t_arrival;
            let env = pulse.amplitude
                * (-0.5 * (tt / pulse.t0).powi(2 * pulse.order as i32)).exp();
            Ok(amp * theta.sin() / cos0 * env)
        })
        .collect()
}

/// Relative L2 discrepancy between a simulated Φ₂ snapshot and the
/// adiabatic-map envelope prediction.
pub fn adiabatic_discrepancy(sim_psi2: &ComplexField, predicted_abs: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &p) in sim_psi2.values().iter().zip(predicted_abs) {
        num += (v.norm() - p).powi(2);
        den += p * p;
    }
    (num / den).sqrt()
}
