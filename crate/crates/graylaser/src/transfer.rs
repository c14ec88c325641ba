//! Light-to-matter state-transfer stage.
//!
//! The probe pulse entering the control-field region is mapped onto a matter
//! wave: the mixing angle θ(z) rotates from ~0 (pure light) to ~π/2 (pure
//! matter), the pulse is delayed by the cumulative inverse group velocity,
//! rescaled by √(c/v), and picks up a self-phase-modulation phase whose time
//! derivative is the frequency chirp of the output atom laser.
//!
//! Normalized units throughout: ħ = m = 1, so the beam velocity equals the
//! beam wavenumber (v₀ = k₀) and all interaction strengths are plain numbers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{simpson, spectral_derivative, spectral_shift, ComplexField};

/// Control Rabi frequency Ω₀(z) with analytic first and second
/// log-derivatives for the built-in shapes; tabulated profiles fall back to
/// finite differences.
#[derive(Debug, Clone)]
pub enum ControlProfile {
    Constant {
        omega: f64,
    },
    /// Ω₀(z) = peak·√(½(1 − tanh((z−center)/width)) + floor_frac²).
    /// Monotone ramp from ≈`peak` down to `peak·floor_frac`; the additive
    /// floor keeps Ω₀ strictly positive (θ = π/2 approached, never reached)
    /// while leaving the profile smooth, so quadratures converge at full
    /// order.
    TanhRamp {
        peak: f64,
        center: f64,
        width: f64,
        floor_frac: f64,
    },
    /// Ω₀(z) = peak·e^{−rate·z}.
    Exponential {
        peak: f64,
        rate: f64,
    },
    /// Samples of Ω₀ on a uniform z-table; log-derivatives by centered
    /// finite differences of ln Ω₀.
    Tabulated {
        z0: f64,
        dz: f64,
        omegas: Vec<f64>,
    },
}

impl ControlProfile {
    /// Default profile for the figure presets: tanh ramp centered at L/2
    /// with width L/10 and a 1e-3 floor.
    pub fn default_ramp(peak: f64, region_length: f64) -> Self {
        ControlProfile::TanhRamp {
            peak,
            center: region_length / 2.0,
            width: region_length / 10.0,
            floor_frac: 1e-3,
        }
    }

    pub fn omega0(&self, z: f64) -> f64 {
        match self {
            ControlProfile::Constant { omega } => *omega,
            ControlProfile::TanhRamp { peak, center, width, floor_frac } => {
                let s = 0.5 * (1.0 - ((z - center) / width).tanh()) + floor_frac * floor_frac;
                peak * s.sqrt()
            }
            ControlProfile::Exponential { peak, rate } => peak * (-rate * z).exp(),
            ControlProfile::Tabulated { z0, dz, omegas } => {
                let x = (z - z0) / dz;
                let j = (x.floor() as isize).clamp(0, omegas.len() as isize - 2) as usize;
                let w = x - j as f64;
                omegas[j] * (1.0 - w) + omegas[j + 1] * w
            }
        }
    }

    /// ∂z ln Ω₀.
    pub fn dlog(&self, z: f64) -> f64 {
        match self {
            ControlProfile::Constant { .. } => 0.0,
            ControlProfile::TanhRamp { center, width, floor_frac, .. } => {
                // ln Ω₀ = ½ ln(s) + const with s = ½(1 − tanh x) + ff².
                let x = (z - center) / width;
                let s = 0.5 * (1.0 - x.tanh()) + floor_frac * floor_frac;
                let ds = -0.5 / (x.cosh().powi(2) * width);
                ds / (2.0 * s)
            }
            ControlProfile::Exponential { rate, .. } => -rate,
            ControlProfile::Tabulated { dz, .. } => {
                let h = *dz;
                ((self.omega0(z + h)).ln() - (self.omega0(z - h)).ln()) / (2.0 * h)
            }
        }
    }

    /// ∂²z ln Ω₀.
    pub fn d2log(&self, z: f64) -> f64 {
        match self {
            ControlProfile::Constant { .. } => 0.0,
            ControlProfile::TanhRamp { center, width, floor_frac, .. } => {
                let x = (z - center) / width;
                let s = 0.5 * (1.0 - x.tanh()) + floor_frac * floor_frac;
                let sech2 = 1.0 / x.cosh().powi(2);
                let ds = -0.5 * sech2 / width;
                let dds = sech2 * x.tanh() / (width * width);
                (dds * s - ds * ds) / (2.0 * s * s)
            }
            ControlProfile::Exponential { .. } => 0.0,
            ControlProfile::Tabulated { dz, .. } => {
                let h = *dz;
                ((self.omega0(z + h)).ln() - 2.0 * (self.omega0(z)).ln()
                    + (self.omega0(z - h)).ln())
                    / (h * h)
            }
        }
    }
}

/// Constants of the transfer stage. `u21` is the cross interaction already
/// multiplied by the beam density (the nU₂₁ entering the linear phase);
/// `u22` is the self interaction of the generated atoms.
#[derive(Debug, Clone, Copy)]
pub struct TransferParams {
    /// Squared collective coupling g²n.
    pub g2n: f64,
    /// Probe phase speed.
    pub c: f64,
    /// Beam velocity v₀ = k₀ (ħ = m = 1).
    pub v0: f64,
    /// Recoil velocity v_r = k_p − k_c.
    pub vr: f64,
    /// Beam wavenumber k₀.
    pub k0: f64,
    /// Cross interaction times density, nU₂₁.
    pub u21: f64,
    /// Self interaction U₂₂.
    pub u22: f64,
    /// Uniform state-2 potential V₂.
    pub v2: f64,
    /// Transfer-region length.
    pub region_length: f64,
}

impl TransferParams {
    pub fn validate(&self) -> Result<()> {
        let v = self.v();
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("beam velocity v must be positive, got {v}")));
        }
        if !(self.c > v) {
            return Err(Error::InvalidArgument(format!(
                "atoms faster than light: require c > v, got c = {}, v = {v}",
                self.c
            )));
        }
        if self.g2n < 0.0 {
            return Err(Error::InvalidArgument("g2n must be non-negative".into()));
        }
        // k₀ ≫ |k_p − k_c|, asserted as a factor-100 separation.
        if self.vr != 0.0 && self.k0 < 100.0 * self.vr.abs() {
            return Err(Error::InvalidArgument(format!(
                "require k0 >= 100 |k_p - k_c|, got k0 = {}, |k_p - k_c| = {}",
                self.k0,
                self.vr.abs()
            )));
        }
        if !(self.region_length > 0.0) {
            return Err(Error::InvalidArgument("region length must be positive".into()));
        }
        Ok(())
    }

    /// Total beam velocity v = v₀ + v_r.
    pub fn v(&self) -> f64 {
        self.v0 + self.vr
    }

    /// Output-beam wavenumber k = k₀ + k_p − k_c.
    pub fn k(&self) -> f64 {
        self.k0 + self.vr
    }

    /// Default figure-preset parameters: ultra-slow regime at the output end
    /// with every integral O(1).
    pub fn default_preset() -> Self {
        TransferParams {
            g2n: 100.0,
            c: 100.0,
            v0: 1.0,
            vr: 0.0,
            k0: 1.0,
            u21: 0.0,
            u22: 1.0,
            v2: 0.0,
            region_length: 10.0,
        }
    }
}

/// Input-pulse order and scales for the analytic chirp law: m = 1 is
/// Gaussian, m = 3 super-Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct ChirpSpec {
    pub m: u32,
    pub t0: f64,
    pub lambda0: f64,
}

/// Mixing angle θ(z) = arctan(√(g²n·v/c)/Ω₀(z)) ∈ [0, π/2).
pub fn mixing_angle(z: f64, prof: &ControlProfile, p: &TransferParams) -> Result<f64> {
    let omega = prof.omega0(z);
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("control field must be positive, got Ω₀({z}) = {omega}")));
    }
    Ok(((p.g2n * p.v() / p.c).sqrt() / omega).atan())
}

/// Group velocity V_g = c(1 + (g²n/Ω₀²)(v/c)) / (1 + g²n/Ω₀²).
pub fn group_velocity(z: f64, prof: &ControlProfile, p: &TransferParams) -> Result<f64> {
    let omega = prof.omega0(z);
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("control field must be positive, got Ω₀({z}) = {omega}")));
    }
    let r = p.g2n / (omega * omega);
    Ok(p.c * (1.0 + r * p.v() / p.c) / (1.0 + r))
}

/// Propagation delay τ(z) = ∫₀ᶻ dξ / V_g(ξ), composite Simpson with
/// `n_intervals` panels.
pub fn delay(z: f64, prof: &ControlProfile, p: &TransferParams, n_intervals: usize) -> Result<f64> {
    if z < 0.0 {
        return Err(Error::Domain(format!("delay is defined for z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(simpson(0.0, z, n_intervals, |xi| {
        1.0 / group_velocity(xi, prof, p).expect("positive control field")
    }))
}

/// Linear and nonlinear phase-accumulation coefficients at z.
#[derive(Debug, Clone, Copy)]
pub struct PhaseCoefficients {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
}

/// A(z) = (g²n/Ω₀²)[(V₂+nU₂₁) + (v₀²/2k₀²)((∂z lnΩ₀)² − ∂²z lnΩ₀)],
/// B(z) = U₂₂·(g²n)²/Ω₀⁴; primes are divided by (1 + g²n/Ω₀²) (ħ = 1).
pub fn phase_coefficients(z: f64, prof: &ControlProfile, p: &TransferParams) -> Result<PhaseCoefficients> {
    let omega = prof.omega0(z);
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("control field must be positive, got Ω₀({z}) = {omega}")));
    }
    let r = p.g2n / (omega * omega);
    let dl = prof.dlog(z);
    let d2l = prof.d2log(z);
    let kinetic = p.v0 * p.v0 / (2.0 * p.k0 * p.k0) * (dl * dl - d2l);
    let a = r * ((p.v2 + p.u21) + kinetic);
    let b = p.u22 * r * r;
    let denom = 1.0 + r;
    Ok(PhaseCoefficients { a, b, a_prime: a / denom, b_prime: b / denom })
}

/// Accumulated phase integrals over [0, z]:
/// `linear` = ∫ A′dξ and `nonlinear` = ∫ |cosθ|² B′ dξ.
#[derive(Debug, Clone, Copy)]
pub struct PhaseIntegrals {
    pub linear: f64,
    pub nonlinear: f64,
}

pub fn phase_integrals(
    z: f64,
    prof: &ControlProfile,
    p: &TransferParams,
    n_intervals: usize,
) -> Result<PhaseIntegrals> {
    let linear = simpson(0.0, z, n_intervals, |xi| {
        phase_coefficients(xi, prof, p).expect("positive control field").a_prime
    });
    let nonlinear = simpson(0.0, z, n_intervals, |xi| {
        let pc = phase_coefficients(xi, prof, p).expect("positive control field");
        let theta = mixing_angle(xi, prof, p).expect("positive control field");
        theta.cos().powi(2) * pc.b_prime
    });
    Ok(PhaseIntegrals { linear, nonlinear })
}

/// Output of [`transfer_map`]: the matter wave over the lab time grid, the
/// accumulated delay and the phase integrals that produced it.
#[derive(Debug, Clone)]
pub struct TransferOutput {
    pub field: ComplexField,
    pub tau: f64,
    pub integrals: PhaseIntegrals,
}

const COS_THETA_INPUT_MIN: f64 = 0.999;
const COS_THETA_OUTPUT_MAX: f64 = 0.05;
const QUADRATURE_PANELS: usize = 8192;

/// Adiabatic transfer map: Φ₂(t) = √(c/v)·ℰ(0, t−τ(z))·exp(iΔφ) with
/// Δφ(T) = ∫₀ᶻ A′dξ + |ℰ(0,T)|²·∫₀ᶻ |cosθ|² B′ dξ.
///
/// The input field samples ℰ(0, t) on a time grid; the pulse must be
/// numerically zero at the window edges, and the mixing angle must satisfy
/// cosθ(0) ≥ 0.999 and cosθ(z_out) ≤ 0.05.
pub fn transfer_map(
    input: &ComplexField,
    p: &TransferParams,
    prof: &ControlProfile,
    z_out: f64,
) -> Result<TransferOutput> {
    p.validate()?;
    if z_out < p.region_length {
        return Err(Error::Config(format!(
            "output plane z = {z_out} lies inside the transfer region (L = {})",
            p.region_length
        )));
    }
    let cos_in = mixing_angle(0.0, prof, p)?.cos();
    if cos_in < COS_THETA_INPUT_MIN {
        return Err(Error::Config(format!(
            "input endpoint not in the light limit: cos θ(0) = {cos_in:.6} < {COS_THETA_INPUT_MIN}"
        )));
    }
    let cos_out = mixing_angle(z_out, prof, p)?.cos();
    if cos_out > COS_THETA_OUTPUT_MAX {
        return Err(Error::Config(format!(
            "output endpoint not in the matter limit: cos θ({z_out}) = {cos_out:.6} > {COS_THETA_OUTPUT_MAX}"
        )));
    }
    let peak = input.max_abs();
    let n = input.grid().n_points();
    let edge = input.values()[0].norm().max(input.values()[n - 1].norm());
    if peak > 0.0 && edge > 1e-8 * peak {
        return Err(Error::Windowing(format!(
            "input pulse is not numerically zero at the window edges (edge/peak = {:.3e})",
            edge / peak
        )));
    }

    let tau = delay(z_out, prof, p, QUADRATURE_PANELS)?;
    let integrals = phase_integrals(z_out, prof, p, QUADRATURE_PANELS)?;
    let delayed = spectral_shift(input, tau);
    let amp = (p.c / p.v()).sqrt();
    let values = delayed
        .values()
        .iter()
        .map(|&e| {
            let dphi = integrals.linear + e.norm_sqr() * integrals.nonlinear;
            amp * e * Complex64::from_polar(1.0, dphi)
        })
        .collect();
    Ok(TransferOutput {
        field: ComplexField::new(input.grid(), values)?,
        tau,
        integrals,
    })
}

/// Analytic chirp law: δω(T) = Λ₀·m·(T/T₀)^{2m−1}·exp[−(T/T₀)^{2m}].
pub fn chirp_analytic(t: f64, spec: &ChirpSpec) -> f64 {
    let u = t / spec.t0;
    spec.lambda0 * spec.m as f64 * u.powi(2 * spec.m as i32 - 1) * (-u.powi(2 * spec.m as i32)).exp()
}

/// Numerical chirp δω = −∂(arg Φ₂)/∂T of a transfer-map output with known
/// carrier removed: unwrap the phase, hold it through negligible-amplitude
/// regions, differentiate spectrally.
pub fn chirp_numeric(output: &ComplexField) -> Result<Vec<f64>> {
    let n = output.grid().n_points();
    // Below ~1e-6 of peak the argument is dominated by FFT roundoff
    // (phase noise ~ ε/|value|), which the spectral derivative would
    // amplify; hold the phase through those stretches instead.
    let peak = output.max_abs();
    let amp_floor = 1e-6 * peak;
    let jump_floor = 1e-3 * peak;

    let mut phase = vec![0.0f64; n];
    let mut prev = 0.0;
    let mut started = false;
    let mut first_valid = 0usize;
    for j in 0..n {
        let v = output.values()[j];
        if v.norm() > amp_floor {
            let raw = v.arg();
            if !started {
                prev = raw;
                started = true;
                first_valid = j;
            } else {
                let mut d = raw - prev;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                // A near-π wrapped jump at non-negligible amplitude means the
                // phase is undersampled and the unwrap is ambiguous.
                if d.abs() > 3.0 && v.norm() > jump_floor {
                    return Err(Error::PhaseUnwrap(format!(
                        "phase jump {:.3} rad between adjacent samples at index {j}",
                        d.abs()
                    )));
                }
                prev += d;
            }
        }
        phase[j] = prev;
    }
    // Backfill the stretch before the first valid sample so the held phase
    // is flat (not a step) across the leading tail.
    let fill = phase[first_valid];
    for p in phase.iter_mut().take(first_valid) {
        *p = fill;
    }

    let phase_field = ComplexField::new(
        output.grid(),
        phase.iter().map(|&p| Complex64::new(p, 0.0)).collect(),
    )?;
    let dphi = spectral_derivative(&phase_field, 1)?;
    Ok(dphi.values().iter().map(|v| -v.re).collect())
}
