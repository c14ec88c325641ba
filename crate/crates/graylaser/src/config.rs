//! Line-oriented `key = value` experiment configuration.
//!
//! The format is deliberately ecosystem-neutral: `#` starts a comment,
//! dotted namespaces group module parameters (`nlse.g22 = 1.0`), and any
//! unrecognized key is an error — typos never become silent defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ChirpAnalytic,
    Transfer,
    ThreeLevelCompare,
    SolitonSingle,
    SolitonSplitFig3a,
    SolitonSplitFig3b,
    PhaseAngle,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Experiment> {
        Some(match s {
            "chirp_analytic" => Experiment::ChirpAnalytic,
            "transfer" => Experiment::Transfer,
            "three_level_compare" => Experiment::ThreeLevelCompare,
            "soliton_single" => Experiment::SolitonSingle,
            "soliton_split_fig3a" => Experiment::SolitonSplitFig3a,
            "soliton_split_fig3b" => Experiment::SolitonSplitFig3b,
            "phase_angle" => Experiment::PhaseAngle,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ChirpAnalytic => "chirp_analytic",
            Experiment::Transfer => "transfer",
            Experiment::ThreeLevelCompare => "three_level_compare",
            Experiment::SolitonSingle => "soliton_single",
            Experiment::SolitonSplitFig3a => "soliton_split_fig3a",
            Experiment::SolitonSplitFig3b => "soliton_split_fig3b",
            Experiment::PhaseAngle => "phase_angle",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    pub n_points: usize,
    pub length: f64,
    pub origin: f64,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub snapshot_stride: usize,
    pub emit_svg: bool,
}

/// A parsed experiment configuration: the experiment selector, the numeric
/// grid, output settings, and the experiment's flat parameter map (values
/// kept as strings; typed extraction happens per experiment).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub output: OutputConfig,
    pub params: BTreeMap<String, String>,
    /// Source line of each key, for diagnostics.
    pub lines: BTreeMap<String, usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut raw: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let stripped = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {lineno}: expected `key = value`, got `{stripped}`"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!("line {lineno}: empty key or value")));
            }
            if let Some((_, first)) = raw.get(&key) {
                return Err(Error::Config(format!(
                    "line {lineno}: duplicate key `{key}` (first set on line {first})"
                )));
            }
            raw.insert(key, (value, lineno));
        }
        if raw.is_empty() {
            return Err(Error::Config("config is empty".into()));
        }

        let mut take = |key: &str| -> Option<(String, usize)> { raw.remove(key) };
        let (exp_str, exp_line) = take("experiment")
            .ok_or_else(|| Error::Config("missing required key `experiment`".into()))?;
        let experiment = Experiment::parse(&exp_str).ok_or_else(|| {
            Error::Config(format!("line {exp_line}: unknown experiment `{exp_str}`"))
        })?;

        let mut req_f64 = |key: &str| -> Result<(f64, usize)> {
            let (v, l) =
                take(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))?;
            let x = v
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("line {l}: `{key}` is not a number: `{v}`")))?;
            Ok((x, l))
        };
        let (n_points_f, npl) = req_f64("grid.n_points")?;
        let n_points = n_points_f as usize;
        if n_points_f.fract() != 0.0 || n_points == 0 {
            return Err(Error::Config(format!(
                "line {npl}: `grid.n_points` must be a positive integer"
            )));
        }
        let (length, _) = req_f64("grid.length")?;
        let (origin, _) = req_f64("grid.origin")?;

        let directory = raw
            .remove("output.directory")
            .map(|(v, _)| PathBuf::from(v))
            .ok_or_else(|| Error::Config("missing required key `output.directory`".into()))?;
        let snapshot_stride = match raw.remove("output.snapshot_stride") {
            Some((v, l)) => v.parse::<usize>().map_err(|_| {
                Error::Config(format!("line {l}: `output.snapshot_stride` must be an integer"))
            })?,
            None => 1000,
        };
        let emit_svg = match raw.remove("output.emit_svg") {
            Some((v, l)) => match v.as_str() {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => {
                    return Err(Error::Config(format!(
                        "line {l}: `output.emit_svg` must be true or false"
                    )))
                }
            },
            None => false,
        };

        let mut params = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for (k, (v, l)) in raw {
            params.insert(k.clone(), v);
            lines.insert(k, l);
        }
        Ok(ExperimentConfig {
            experiment,
            grid: GridConfig { n_points, length, origin },
            output: OutputConfig { directory, snapshot_stride, emit_svg },
            params,
            lines,
        })
    }

    /// Typed parameter accessor that records consumption; unknown leftovers
    /// are rejected by [`Params::finish`].
    pub fn params(&self) -> Params<'_> {
        Params { config: self, taken: Vec::new() }
    }
}

pub struct Params<'a> {
    config: &'a ExperimentConfig,
    taken: Vec<String>,
}

impl<'a> Params<'a> {
    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.taken.push(key.to_string());
        self.config.params.get(key).map(|s| s.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.config.lines.get(key).copied().unwrap_or(0)
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                let l = self.line(key);
                v.parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {l}: `{key}` is not a number: `{v}`"))
                })
            }
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                let l = self.line(key);
                v.parse::<usize>().map_err(|_| {
                    Error::Config(format!("line {l}: `{key}` must be a non-negative integer"))
                })
            }
        }
    }

    pub fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(v) => {
                let l = self.line(key);
                Err(Error::Config(format!("line {l}: `{key}` must be true or false, got `{v}`")))
            }
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    /// Reject any parameter that no accessor consumed.
    pub fn finish(self) -> Result<()> {
        let unknown: Vec<String> = self
            .config
            .params
            .keys()
            .filter(|k| !self.taken.iter().any(|t| t == *k))
            .map(|k| format!("`{}` (line {})", k, self.line(k)))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "unknown key(s) for experiment {}: {}",
                self.config.experiment.name(),
                unknown.join(", ")
            )))
        }
    }
}

/// Built-in preset configs, printable via `graylaser preset <name>`.
pub fn preset(name: &str) -> Option<String> {
    let body = match name {
        // Normalized frequency chirp of the output matter wave for Gaussian
        // (m=1) and super-Gaussian (m=3) input pulses, plus a full
        // transfer-map cross-check of the numerical chirp.
        "fig2b" => {
            "experiment = chirp_analytic\n\
             grid.n_points = 16384\n\
             grid.length = 24.0\n\
             grid.origin = -12.0\n\
             output.directory = out/fig2b\n\
             output.emit_svg = true\n\
             transfer.g2n = 100.0\n\
             transfer.c = 100.0\n\
             transfer.v0 = 1.0\n\
             transfer.vr = 0.0\n\
             transfer.k0 = 1.0\n\
             transfer.u21 = 0.0\n\
             transfer.u22 = 1.0\n\
             transfer.v2 = 0.0\n\
             transfer.region_length = 10.0\n\
             profile.peak = 30.0\n\
             chirp.t0 = 1.0\n\
             chirp.z_out = 12.0\n"
        }
        // Adiabatic transfer map applied to a Gaussian probe pulse.
        "transfer" => {
            "experiment = transfer\n\
             grid.n_points = 16384\n\
             grid.length = 24.0\n\
             grid.origin = -12.0\n\
             output.directory = out/transfer\n\
             transfer.g2n = 100.0\n\
             transfer.c = 100.0\n\
             transfer.v0 = 1.0\n\
             transfer.vr = 0.0\n\
             transfer.k0 = 1.0\n\
             transfer.u21 = 0.0\n\
             transfer.u22 = 1.0\n\
             transfer.v2 = 0.0\n\
             transfer.region_length = 10.0\n\
             profile.peak = 30.0\n\
             pulse.t0 = 1.0\n\
             pulse.order = 1\n\
             pulse.amplitude = 1.0\n\
             chirp.z_out = 12.0\n"
        }
        // Full three-level integration against the adiabatic transfer map.
        "three_level_compare" => {
            "experiment = three_level_compare\n\
             grid.n_points = 8192\n\
             grid.length = 664.0\n\
             grid.origin = -568.0\n\
             output.directory = out/three_level_compare\n\
             transfer.g2n = 1600.0\n\
             transfer.c = 50.0\n\
             transfer.v0 = 1.0\n\
             transfer.vr = 0.0\n\
             transfer.k0 = 1.0\n\
             transfer.u21 = 0.0\n\
             transfer.u22 = 1.0\n\
             transfer.v2 = 0.0\n\
             transfer.region_length = 80.0\n\
             profile.peak = 240.0\n\
             profile.center = 20.0\n\
             profile.width = 5.0\n\
             profile.floor_frac = 0.0005\n\
             threelevel.gamma = 0.1\n\
             threelevel.eps12 = 0.0\n\
             threelevel.eps13 = 0.0\n\
             threelevel.include_kinetic = false\n\
             pulse.amplitude = 0.001\n\
             pulse.t0 = 1.0\n\
             pulse.order = 1\n\
             pulse.center = -240.0\n\
             run.dt = 0.0015\n\
             run.t_final = 10.0\n"
        }
        // Single gray soliton on a constant background.
        "soliton_single" => {
            "experiment = soliton_single\n\
             grid.n_points = 512\n\
             grid.length = 100.0\n\
             grid.origin = -50.0\n\
             output.directory = out/soliton_single\n\
             output.snapshot_stride = 2000\n\
             nlse.g22 = 1.0\n\
             nlse.k_bg = 0.0\n\
             soliton.eta = 0.5\n\
             soliton.z0 = 0.0\n\
             soliton.sign = 1.0\n\
             background.a0 = 1.0\n\
             run.dt = 0.0005\n\
             run.n_steps = 40000\n"
        }
        // Two-soliton splitting on a decaying background, fixed grayness.
        "fig3a" => {
            "experiment = soliton_split_fig3a\n\
             grid.n_points = 2048\n\
             grid.length = 120.0\n\
             grid.origin = -60.0\n\
             output.directory = out/fig3a\n\
             output.snapshot_stride = 2000\n\
             output.emit_svg = true\n\
             nlse.g22 = 1.0\n\
             nlse.k_bg = 0.0\n\
             soliton.eta = 0.5\n\
             soliton.z0 = 0.0\n\
             background.a0 = 1.0\n\
             background.t_d = 20.0\n\
             run.dt = 0.0005\n\
             run.n_steps = 40000\n"
        }
        // Same splitting run, with the soliton phase angle integrated by the
        // perturbative law and compared against the tracked dip depths.
        "fig3b" => {
            "experiment = soliton_split_fig3b\n\
             grid.n_points = 2048\n\
             grid.length = 120.0\n\
             grid.origin = -60.0\n\
             output.directory = out/fig3b\n\
             output.snapshot_stride = 2000\n\
             output.emit_svg = true\n\
             nlse.g22 = 1.0\n\
             nlse.k_bg = 0.0\n\
             soliton.eta = 0.5\n\
             soliton.z0 = 0.0\n\
             background.a0 = 1.0\n\
             background.t_d = 20.0\n\
             run.dt = 0.0005\n\
             run.n_steps = 40000\n\
             ode.n_steps = 1000\n"
        }
        // Standalone phase-angle integration on an exponential-slope
        // background profile (closed-form check: tan α = tan α₀ + s·𝒯).
        "phase_angle" => {
            "experiment = phase_angle\n\
             grid.n_points = 2048\n\
             grid.length = 40.0\n\
             grid.origin = -20.0\n\
             output.directory = out/phase_angle\n\
             ode.alpha0 = 0.5\n\
             ode.xi0 = 0.0\n\
             ode.bg_slope = -0.02\n\
             ode.dtau = 0.01\n\
             ode.n_steps = 1000\n\
             ode.depletion_depth = 0.0\n"
        }
        _ => return None,
    };
    let mut out = String::new();
    let _ = writeln!(out, "# graylaser preset: {name}");
    out.push_str(body);
    Some(out)
}

pub const PRESET_NAMES: &[&str] = &[
    "fig2b",
    "transfer",
    "three_level_compare",
    "soliton_single",
    "fig3a",
    "fig3b",
    "phase_angle",
];
