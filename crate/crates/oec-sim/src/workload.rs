//! Tenant function profiles: estimation from measured samples, invocation
//! simulation, and the deployment uplink model.
//!
//! A profile summarizes a function by the mean energy and wall time of one
//! invocation and by its compression ratio (mean output bytes over input
//! bytes). Geographic or content selectivity inside a function is folded
//! into those means.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::framesource::FrameMeta;
use crate::{Error, Result};

/// Measured per-invocation parameters of one tenant function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionProfile {
    pub name: String,
    pub energy_j: f64,
    pub time_s: f64,
    pub compression_ratio: f64,
    #[serde(default)]
    pub package_bytes: u64,
}

impl FunctionProfile {
    pub fn new(
        name: impl Into<String>,
        energy_j: f64,
        time_s: f64,
        compression_ratio: f64,
    ) -> Self {
        FunctionProfile {
            name: name.into(),
            energy_j,
            time_s,
            compression_ratio,
            package_bytes: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.energy_j < 0.0 || self.time_s < 0.0 {
            return Err(Error::OutOfRange(format!(
                "profile '{}' has negative energy or time",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.compression_ratio) {
            return Err(Error::OutOfRange(format!(
                "profile '{}' compression ratio {} not in [0, 1]",
                self.name, self.compression_ratio
            )));
        }
        Ok(())
    }
}

/// One measured invocation used for profile estimation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvocationSample {
    pub energy_j: f64,
    pub duration_s: f64,
    pub output_bytes: u64,
    pub input_bytes: u64,
}

/// Result of one simulated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct InvocationResult {
    pub function: String,
    pub frame: u64,
    pub duration_s: f64,
    pub energy_j: f64,
    pub output_bytes: u64,
}

/// Estimates a profile from invocation samples: mean energy, mean duration,
/// and total output over total input as the compression ratio.
pub fn estimate_profile(name: impl Into<String>, samples: &[InvocationSample]) -> Result<FunctionProfile> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let n = samples.len() as f64;
    let energy_j = samples.iter().map(|s| s.energy_j).sum::<f64>() / n;
    let time_s = samples.iter().map(|s| s.duration_s).sum::<f64>() / n;
    let out: u64 = samples.iter().map(|s| s.output_bytes).sum();
    let inp: u64 = samples.iter().map(|s| s.input_bytes).sum();
    let compression_ratio = if inp == 0 { 0.0 } else { out as f64 / inp as f64 };
    Ok(FunctionProfile {
        name: name.into(),
        energy_j,
        time_s,
        compression_ratio,
        package_bytes: 0,
    })
}

/// How invocation output sizes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OutputModel {
    /// Every invocation emits `round(compression_ratio * frame_size)` bytes.
    Deterministic,
    /// With probability `p_emit` the invocation emits a fixed kept-output
    /// size chosen so the mean matches the deterministic model; otherwise it
    /// emits nothing.
    Stochastic { p_emit: f64 },
}

impl Default for OutputModel {
    fn default() -> Self {
        OutputModel::Deterministic
    }
}

/// Simulates one invocation in deterministic mode.
pub fn simulate_invocation(profile: &FunctionProfile, frame: &FrameMeta) -> InvocationResult {
    InvocationResult {
        function: profile.name.clone(),
        frame: frame.id,
        duration_s: profile.time_s,
        energy_j: profile.energy_j,
        output_bytes: (profile.compression_ratio * frame.size_bytes as f64).round() as u64,
    }
}

/// Simulates one invocation under the configured output model.
pub fn simulate_invocation_with<R: Rng>(
    profile: &FunctionProfile,
    frame: &FrameMeta,
    model: OutputModel,
    rng: &mut R,
) -> InvocationResult {
    match model {
        OutputModel::Deterministic => simulate_invocation(profile, frame),
        OutputModel::Stochastic { p_emit } => {
            let mean = profile.compression_ratio * frame.size_bytes as f64;
            let kept_size = if p_emit > 0.0 { mean / p_emit } else { 0.0 };
            let output_bytes = if p_emit > 0.0 && rng.gen::<f64>() < p_emit {
                kept_size.round() as u64
            } else {
                0
            };
            InvocationResult {
                function: profile.name.clone(),
                frame: frame.id,
                duration_s: profile.time_s,
                energy_j: profile.energy_j,
                output_bytes,
            }
        }
    }
}

/// Seconds needed to uplink a deployment package of `package_bytes` over a
/// link with the given raw bit rate and overhead fraction.
pub fn deployment_uplink_seconds(
    package_bytes: u64,
    uplink_rate_bps: f64,
    overhead: f64,
) -> Result<f64> {
    if uplink_rate_bps <= 0.0 {
        return Err(Error::NonPositiveRate);
    }
    if !(0.0..1.0).contains(&overhead) {
        return Err(Error::OutOfRange(format!("overhead {overhead} not in [0, 1)")));
    }
    Ok(package_bytes as f64 * 8.0 / (uplink_rate_bps * (1.0 - overhead)))
}

// ---------------------------------------------------------------------------
// Profile file I/O: CSV with header
// `name,energy_j,time_s,compression_ratio,package_bytes`
// ---------------------------------------------------------------------------

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<FunctionProfile>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Malformed {
            file: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let profile: FunctionProfile = row.map_err(|e| Error::Malformed {
            file: path.display().to_string(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        profile.validate()?;
        out.push(profile);
    }
    Ok(out)
}

pub fn save_profiles(path: impl AsRef<Path>, profiles: &[FunctionProfile]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path.as_ref())?;
    for p in profiles {
        wtr.serialize(p).map_err(|e| Error::Malformed {
            file: path.as_ref().display().to_string(),
            line: 0,
            msg: e.to_string(),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Formats a profile as a pasteable profiles-file snippet (header + row).
pub fn profile_csv_row(profile: &FunctionProfile) -> String {
    format!(
        "name,energy_j,time_s,compression_ratio,package_bytes\n{},{},{},{},{}\n",
        profile.name,
        profile.energy_j,
        profile.time_s,
        profile.compression_ratio,
        profile.package_bytes
    )
}

/// Selects profiles by name, preserving the requested order.
pub fn select_profiles(
    all: &[FunctionProfile],
    names: &[String],
) -> Result<Vec<FunctionProfile>> {
    names
        .iter()
        .map(|n| {
            all.iter()
                .find(|p| &p.name == n)
                .cloned()
                .ok_or_else(|| Error::UnknownFunction(n.clone()))
        })
        .collect()
}
