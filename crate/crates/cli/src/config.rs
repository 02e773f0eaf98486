//! Experiment configuration: file format, presets, flag overrides, hashing.
//!
//! - One [`ExperimentConfig`] fixes the full point grid (distances x cer x
//!   ber), the noise switches, shot counts, seed, and output directory.
//! - Precedence: built-in defaults, then the config file, then a preset,
//!   then individual flags. Each layer is a [`ConfigPatch`] of options.
//! - `hash()` digests the science fields only (not the output path), so a
//!   store can recognize rows produced under the same physical settings.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qeclab_core::circuit::{Basis, CzErrorSource, ShuttleChannel};
use qeclab_core::physics::HardwareParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Schema tag written into every config file this tool emits.
pub const CONFIG_VERSION: &str = "config-v1";

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Code distances to simulate; odd, ascending.
    pub distances: Vec<u32>,
    /// Measurement rounds; `None` means rounds = distance at each point.
    pub rounds: Option<u32>,
    /// Circuit error rates to scan.
    pub cers: Vec<f64>,
    /// Bus error rates to scan.
    pub bers: Vec<f64>,
    pub shuttle: ShuttleChannel,
    pub basis: Basis,
    pub cz_source: CzErrorSource,
    /// Shots per grid point.
    pub shots: u64,
    /// Optional larger shot count applied to the two largest distances.
    pub boost_shots: Option<u64>,
    /// Master seed; every point derives its own stream from it.
    pub seed: u64,
    /// Output directory for the result store and reports.
    pub out: PathBuf,
    /// Hardware parameters for the physics estimator, if provided.
    pub hardware: Option<HardwareBlock>,
}

/// Partial configuration: one precedence layer (file, preset, or flags).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    /// Optional schema tag; rejected unless it matches [`CONFIG_VERSION`].
    pub version: Option<String>,
    pub distances: Option<Vec<u32>>,
    pub rounds: Option<u32>,
    pub cers: Option<Vec<f64>>,
    pub bers: Option<Vec<f64>>,
    pub shuttle: Option<ShuttleChannel>,
    pub basis: Option<Basis>,
    pub cz_source: Option<CzErrorSource>,
    pub shots: Option<u64>,
    pub boost_shots: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub hardware: Option<HardwareBlock>,
    /// Rates a previous `estimate-physics --write` appended; informational,
    /// never applied automatically.
    pub suggested: Option<SuggestedBlock>,
}

/// Output block of the physics estimator, tolerated on config reload.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestedBlock {
    pub ber_biased: Option<f64>,
    pub ber_unbiased: Option<f64>,
    pub cer_idle_floor: Option<f64>,
}

/// Serializable mirror of [`HardwareParams`]; missing fields take the
/// published typical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareBlock {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub l_c: Option<f64>,
    pub l_s: Option<f64>,
    pub v: Option<f64>,
    pub t_idle: Option<f64>,
}

impl HardwareBlock {
    /// Concrete parameters with typical values filling the gaps.
    pub fn resolve(&self) -> HardwareParams {
        let base = HardwareParams::typical();
        HardwareParams {
            t1: self.t1.unwrap_or(base.t1),
            t2: self.t2.unwrap_or(base.t2),
            l_c: self.l_c.unwrap_or(base.l_c),
            l_s: self.l_s.unwrap_or(base.l_s),
            v: self.v.unwrap_or(base.v),
            t_idle: self.t_idle.unwrap_or(base.t_idle),
        }
    }
}

/// Built-in scale presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Hour-scale grid: distances 5..11, 1e5 shots.
    Desk,
    /// Publication-scale grid: distances 5..17, 1e6 shots everywhere.
    Paper,
}

impl Preset {
    /// The fields a preset pins; everything else falls through.
    pub fn patch(self) -> ConfigPatch {
        let (distances, shots) = match self {
            Preset::Desk => (vec![5, 7, 9, 11], 100_000),
            Preset::Paper => (vec![5, 7, 9, 11, 13, 15, 17], 1_000_000),
        };
        ConfigPatch { distances: Some(distances), shots: Some(shots), ..ConfigPatch::default() }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            distances: vec![5, 7, 9, 11],
            rounds: None,
            cers: vec![0.0030, 0.0033, 0.0036, 0.0039, 0.0042, 0.0045],
            bers: vec![0.0],
            shuttle: ShuttleChannel::Unbiased,
            basis: Basis::Z,
            cz_source: CzErrorSource::Cer,
            shots: 100_000,
            boost_shots: None,
            seed: 1,
            out: PathBuf::from("runs/qeclab"),
            hardware: None,
        }
    }
}

impl ExperimentConfig {
    /// Overlay one patch; set fields win.
    pub fn apply(&mut self, patch: ConfigPatch) {
        let ConfigPatch {
            version: _,
            distances,
            rounds,
            cers,
            bers,
            shuttle,
            basis,
            cz_source,
            shots,
            boost_shots,
            seed,
            out,
            hardware,
            suggested: _,
        } = patch;
        if let Some(v) = distances {
            self.distances = v;
        }
        if let Some(v) = rounds {
            self.rounds = Some(v);
        }
        if let Some(v) = cers {
            self.cers = v;
        }
        if let Some(v) = bers {
            self.bers = v;
        }
        if let Some(v) = shuttle {
            self.shuttle = v;
        }
        if let Some(v) = basis {
            self.basis = v;
        }
        if let Some(v) = cz_source {
            self.cz_source = v;
        }
        if let Some(v) = shots {
            self.shots = v;
        }
        if let Some(v) = boost_shots {
            self.boost_shots = Some(v);
        }
        if let Some(v) = seed {
            self.seed = v;
        }
        if let Some(v) = out {
            self.out = v;
        }
        if let Some(v) = hardware {
            self.hardware = Some(v);
        }
    }

    /// Parse a TOML config file into a patch, rejecting unknown schema tags.
    pub fn load_patch(path: &Path) -> Result<ConfigPatch> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let patch: ConfigPatch = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(version) = &patch.version {
            if version != CONFIG_VERSION {
                bail!("config {}: unknown schema version {version:?}", path.display());
            }
        }
        Ok(patch)
    }

    /// Grid and parameter invariants; called before any run.
    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() {
            bail!("distances must be non-empty");
        }
        for &d in &self.distances {
            if d < 3 || d % 2 == 0 {
                bail!("distance {d} must be odd and >= 3");
            }
        }
        if self.distances.windows(2).any(|w| w[0] >= w[1]) {
            bail!("distances must be strictly ascending");
        }
        if let Some(r) = self.rounds {
            if r < 1 {
                bail!("rounds must be >= 1");
            }
        }
        for (name, grid) in [("cers", &self.cers), ("bers", &self.bers)] {
            if grid.is_empty() {
                bail!("{name} must be non-empty");
            }
            for &p in grid {
                if !(0.0..0.5).contains(&p) || !p.is_finite() {
                    bail!("{name} value {p} must lie in [0, 0.5)");
                }
            }
        }
        if self.shots < 1_000 {
            bail!("shots must be >= 1000 so rate estimates can bound a fit");
        }
        if let Some(b) = self.boost_shots {
            if b < self.shots {
                bail!("boost_shots {b} must be >= shots {}", self.shots);
            }
        }
        Ok(())
    }

    /// Rounds at a given distance: the explicit setting or d itself.
    pub fn rounds_at(&self, d: u32) -> u32 {
        self.rounds.unwrap_or(d)
    }

    /// Shots at a given distance: boosted for the two largest distances.
    pub fn shots_at(&self, d: u32) -> u64 {
        match self.boost_shots {
            Some(boost) => {
                let n = self.distances.len();
                let boosted = &self.distances[n.saturating_sub(2)..];
                if boosted.contains(&d) {
                    boost
                } else {
                    self.shots
                }
            }
            None => self.shots,
        }
    }

    /// Hex digest (12 chars) of the science fields, excluding output paths.
    pub fn hash(&self) -> String {
        // Field order is fixed by this struct, so the digest is stable.
        #[derive(Serialize)]
        struct ScienceView<'a> {
            distances: &'a [u32],
            rounds: Option<u32>,
            cers: &'a [f64],
            bers: &'a [f64],
            shuttle: ShuttleChannel,
            basis: Basis,
            cz_source: CzErrorSource,
            shots: u64,
            boost_shots: Option<u64>,
            seed: u64,
        }
        let view = ScienceView {
            distances: &self.distances,
            rounds: self.rounds,
            cers: &self.cers,
            bers: &self.bers,
            shuttle: self.shuttle,
            basis: self.basis,
            cz_source: self.cz_source,
            shots: self.shots,
            boost_shots: self.boost_shots,
            seed: self.seed,
        };
        let json = serde_json::to_string(&view).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(12);
        for byte in &digest[..6] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_patch_precedence_file_then_preset_then_flags() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(ConfigPatch {
            distances: Some(vec![3, 5]),
            seed: Some(9),
            ..ConfigPatch::default()
        });
        cfg.apply(Preset::Paper.patch());
        cfg.apply(ConfigPatch { shots: Some(2_000), ..ConfigPatch::default() });
        assert_eq!(cfg.distances, vec![5, 7, 9, 11, 13, 15, 17]);
        assert_eq!(cfg.shots, 2_000);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.basis, Basis::Z);
    }

    #[test]
    fn test_toml_round_trip_and_unknown_field_rejected() {
        let text = "version = \"config-v1\"\ndistances = [3, 5]\ncers = [0.002]\n\
                    shuttle = \"Biased\"\nseed = 4\n\n[hardware]\nv = 4.0\n";
        let patch: ConfigPatch = toml::from_str(text).unwrap();
        assert_eq!(patch.distances.as_deref(), Some(&[3, 5][..]));
        assert_eq!(patch.shuttle, Some(ShuttleChannel::Biased));
        let hw = patch.hardware.unwrap().resolve();
        assert_eq!(hw.v, 4.0);
        assert_eq!(hw.t1, HardwareParams::typical().t1);
        assert!(toml::from_str::<ConfigPatch>("wat = 3\n").is_err());
    }

    #[test]
    fn test_validation_rejects_bad_grids() {
        let ok = ExperimentConfig::default();
        ok.validate().unwrap();
        let even = ExperimentConfig { distances: vec![4], ..ok.clone() };
        assert!(even.validate().is_err());
        let empty = ExperimentConfig { cers: vec![], ..ok.clone() };
        assert!(empty.validate().is_err());
        let wild = ExperimentConfig { bers: vec![0.7], ..ok.clone() };
        assert!(wild.validate().is_err());
        let thin = ExperimentConfig { shots: 10, ..ok.clone() };
        assert!(thin.validate().is_err());
        let unordered = ExperimentConfig { distances: vec![5, 5], ..ok };
        assert!(unordered.validate().is_err());
    }

    #[test]
    fn test_hash_tracks_science_fields_only() {
        let base = ExperimentConfig::default();
        let moved = ExperimentConfig { out: PathBuf::from("elsewhere"), ..base.clone() };
        assert_eq!(base.hash(), moved.hash());
        let reseeded = ExperimentConfig { seed: 2, ..base.clone() };
        assert_ne!(base.hash(), reseeded.hash());
        let regrid = ExperimentConfig { bers: vec![0.001], ..base.clone() };
        assert_ne!(base.hash(), regrid.hash());
        assert_eq!(base.hash().len(), 12);
    }

    #[test]
    fn test_boosted_shots_cover_two_largest_distances() {
        let cfg = ExperimentConfig {
            distances: vec![7, 9, 11, 13],
            boost_shots: Some(1_000_000),
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.shots_at(7), 100_000);
        assert_eq!(cfg.shots_at(9), 100_000);
        assert_eq!(cfg.shots_at(11), 1_000_000);
        assert_eq!(cfg.shots_at(13), 1_000_000);
        assert_eq!(cfg.rounds_at(9), 9);
    }
}
