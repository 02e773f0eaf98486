//! Command-line surface: subcommands, value enums, flag-to-config patches.
//!
//! Exit-code contract (enforced by `main`): 0 success, 1 usage error,
//! 2 data or validation failure. Run settings resolve as defaults, then
//! the config file, then a preset, then individual flags.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qeclab_core::analysis::ScanAxis;
use qeclab_core::circuit::{
    build_memory_circuit, Basis, Circuit, CzErrorSource, NoiseParams, ShuttleChannel,
};
use qeclab_core::geom::build_layout;

use crate::config::{ConfigPatch, ExperimentConfig, HardwareBlock, Preset};

/// Surface-code memory Monte Carlo under bus-style shuttling noise.
#[derive(Debug, Parser)]
#[command(name = "qeclab", version, about)]
pub struct Cli {
    /// Worker threads (default: QECLAB_WORKERS, else all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the lattice of a distance: qubits, stabilizers, logicals.
    Layout {
        /// Code distance (odd, >= 3).
        #[arg(long, short = 'd')]
        distance: u32,
        /// Swap the middle CZ slots of Z stabilizers (hook-unsafe control).
        #[arg(long)]
        misordered: bool,
    },
    /// Print a scheduled memory circuit in the text format.
    BuildCircuit {
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Sample packed detector/observable bits into a dump file.
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Shots to sample.
        #[arg(long)]
        shots: u64,
        /// RNG stream seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output dump path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a dump against its circuit and report the failure rate.
    Decode {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Dump produced by `sample` with the same circuit flags.
        #[arg(long)]
        bits: PathBuf,
    },
    /// Run every missing grid point of a config into the result store.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Bracket, refine, and fit the threshold along one noise axis.
    Threshold {
        #[command(flatten)]
        run: RunArgs,
        /// Which rate to scan; the other axis provides the slices.
        #[arg(long, value_enum)]
        axis: AxisArg,
    },
    /// Extrapolate teraquop footprints over the (cer, ber) grid.
    Teraquop {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Derive suggested noise rates from hardware parameters.
    EstimatePhysics {
        #[command(flatten)]
        physics: PhysicsArgs,
    },
    /// Run the self-check suites (exit 2 on any failure).
    Verify,
}

/// Flags identifying one circuit; shared by sample/decode so a dump can be
/// decoded against exactly the circuit that produced it.
#[derive(Debug, Args)]
pub struct CircuitArgs {
    /// Code distance (odd, >= 3).
    #[arg(long, short = 'd')]
    pub distance: u32,
    /// Measurement rounds; defaults to the distance.
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long, value_enum, default_value_t = BasisArg::Z)]
    pub basis: BasisArg,
    /// Circuit error rate.
    #[arg(long, default_value_t = 0.0)]
    pub cer: f64,
    /// Bus error rate.
    #[arg(long, default_value_t = 0.0)]
    pub ber: f64,
    #[arg(long, value_enum, default_value_t = ShuttleArg::Unbiased)]
    pub shuttle: ShuttleArg,
    /// Which rate drives the post-CZ depolarizing channel.
    #[arg(long, value_enum, default_value_t = CzArg::Cer)]
    pub cz_source: CzArg,
}

impl CircuitArgs {
    /// Build the described circuit.
    pub fn build(&self) -> Result<Circuit> {
        let layout = build_layout(self.distance)?;
        let noise = NoiseParams {
            cer: self.cer,
            ber: self.ber,
            shuttle: self.shuttle.into(),
            cz_source: self.cz_source.into(),
        };
        let rounds = self.rounds.unwrap_or(self.distance);
        Ok(build_memory_circuit(&layout, rounds, self.basis.into(), &noise)?)
    }
}

/// Flags shared by the sweep-shaped commands.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in scale preset, applied over the config file.
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Code distances, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub distances: Option<Vec<u32>>,
    /// Circuit error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub cers: Option<Vec<f64>>,
    /// Bus error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bers: Option<Vec<f64>>,
    /// Measurement rounds; defaults to the distance at each point.
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub shots: Option<u64>,
    /// Larger shot count for the two largest distances.
    #[arg(long)]
    pub boost_shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long, value_enum)]
    pub shuttle: Option<ShuttleArg>,
    #[arg(long, value_enum)]
    pub cz_source: Option<CzArg>,
    /// Output directory for the store and reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            version: None,
            distances: self.distances.clone(),
            rounds: self.rounds,
            cers: self.cers.clone(),
            bers: self.bers.clone(),
            shuttle: self.shuttle.map(Into::into),
            basis: self.basis.map(Into::into),
            cz_source: self.cz_source.map(Into::into),
            shots: self.shots,
            boost_shots: self.boost_shots,
            seed: self.seed,
            out: self.out.clone(),
            hardware: None,
            suggested: None,
        }
    }

    /// Layer defaults, config file, preset, and flags into one config.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply(ExperimentConfig::load_patch(path)?);
        }
        if let Some(preset) = self.preset {
            cfg.apply(Preset::from(preset).patch());
        }
        cfg.apply(self.patch());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Hardware parameters for the physics estimator.
#[derive(Debug, Args)]
pub struct PhysicsArgs {
    /// Config file whose [hardware] table seeds the parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relaxation time (s).
    #[arg(long)]
    pub t1: Option<f64>,
    /// Dephasing time (s).
    #[arg(long)]
    pub t2: Option<f64>,
    /// Noise correlation length along the lane (m).
    #[arg(long)]
    pub l_c: Option<f64>,
    /// Shuttle lane length (m).
    #[arg(long)]
    pub l_s: Option<f64>,
    /// Shuttle velocity (m/s).
    #[arg(long)]
    pub v: Option<f64>,
    /// Idle window per circuit step (s).
    #[arg(long)]
    pub t_idle: Option<f64>,
    /// Append the suggested block to the config file.
    #[arg(long)]
    pub write: bool,
}

impl PhysicsArgs {
    /// Merge the config's [hardware] table with flag overrides.
    pub fn resolve(&self) -> Result<HardwareBlock> {
        let mut block = match &self.config {
            Some(path) => ExperimentConfig::load_patch(path)?.hardware.unwrap_or(EMPTY_BLOCK),
            None => EMPTY_BLOCK,
        };
        if self.write && self.config.is_none() {
            bail!("--write needs --config to know which file to extend");
        }
        block.t1 = self.t1.or(block.t1);
        block.t2 = self.t2.or(block.t2);
        block.l_c = self.l_c.or(block.l_c);
        block.l_s = self.l_s.or(block.l_s);
        block.v = self.v.or(block.v);
        block.t_idle = self.t_idle.or(block.t_idle);
        Ok(block)
    }
}

const EMPTY_BLOCK: HardwareBlock =
    HardwareBlock { t1: None, t2: None, l_c: None, l_s: None, v: None, t_idle: None };

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Z,
    X,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::Z => Basis::Z,
            BasisArg::X => Basis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShuttleArg {
    Unbiased,
    Biased,
}

impl From<ShuttleArg> for ShuttleChannel {
    fn from(s: ShuttleArg) -> ShuttleChannel {
        match s {
            ShuttleArg::Unbiased => ShuttleChannel::Unbiased,
            ShuttleArg::Biased => ShuttleChannel::Biased,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CzArg {
    Cer,
    Ber,
}

impl From<CzArg> for CzErrorSource {
    fn from(c: CzArg) -> CzErrorSource {
        match c {
            CzArg::Cer => CzErrorSource::Cer,
            CzArg::Ber => CzErrorSource::Ber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Cer,
    Ber,
}

impl From<AxisArg> for ScanAxis {
    fn from(a: AxisArg) -> ScanAxis {
        match a {
            AxisArg::Cer => ScanAxis::Cer,
            AxisArg::Ber => ScanAxis::Ber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Desk,
    Paper,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Paper => Preset::Paper,
        }
    }
}
