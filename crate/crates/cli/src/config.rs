//! Experiment configuration: the JSON document a run is driven by, its
//! per-experiment defaults, and validation.

use std::path::PathBuf;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use scarchain::dynamics::{KrylovOptions, Payload, TransferJob};
use scarchain::hilbert::ChainConfig;
use scarchain::models::{CouplingKind, RandomInteractionSpec, Variant};
use scarchain::perturbations::{default_epsilons, PerturbationBase, PerturbationKind, Propagation};

use crate::error::{CliError, CliResult};

/// Largest Hilbert dimension the runner accepts. Dense operators at this size
/// take 1 GiB each.
pub const MAX_DIM: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Fidelity traces for the spin-1/2 chain (N=12).
    Fig2Transfer,
    /// Level statistics, entanglement and scar census for spin-1/2 (N=12).
    Fig2Spectral,
    /// Fidelity traces for the spin-1 chain (N=8, 1/r³ pairs).
    Fig3Transfer,
    /// Level statistics, entanglement and scar census for spin-1 (N=8).
    Fig3Spectral,
    /// Infidelity versus perturbation strength on spin-1 bases (N=8).
    Fig4Perturbation,
    /// Counts two-site interactions annihilated / fixed by the spin-1 projector.
    Classify,
    /// Commutator norms and kernel dimensions for the projector constructions.
    AppendixChecks,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Self::Fig2Transfer,
        Self::Fig2Spectral,
        Self::Fig3Transfer,
        Self::Fig3Spectral,
        Self::Fig4Perturbation,
        Self::Classify,
        Self::AppendixChecks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2Transfer => "fig2-transfer",
            Self::Fig2Spectral => "fig2-spectral",
            Self::Fig3Transfer => "fig3-transfer",
            Self::Fig3Spectral => "fig3-spectral",
            Self::Fig4Perturbation => "fig4-perturbation",
            Self::Classify => "classify",
            Self::AppendixChecks => "appendix-checks",
        }
    }

    /// Local dimension the experiment runs on, if it uses a chain.
    pub fn local_dim(self) -> Option<usize> {
        match self {
            Self::Fig2Transfer | Self::Fig2Spectral | Self::AppendixChecks => Some(2),
            Self::Fig3Transfer | Self::Fig3Spectral | Self::Fig4Perturbation => Some(3),
            Self::Classify => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

/// Uniform sampling of the fidelity traces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Number of samples, endpoints included. Default 400.
    pub samples: usize,
    /// Last sample in units of 1/λ. Default 3π.
    pub t_max_lambda: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { samples: TransferJob::DEFAULT_SAMPLES, t_max_lambda: 3.0 * std::f64::consts::PI }
    }
}

/// Monte-Carlo reference for the mean gap ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GueOracleConfig {
    /// Matrix dimension. Default 1000.
    pub dim: usize,
    /// Number of sampled matrices. Default 20.
    pub samples: usize,
    /// Default 1.
    pub seed: u64,
}

impl Default for GueOracleConfig {
    fn default() -> Self {
        Self { dim: 1000, samples: 20, seed: 1 }
    }
}

/// One run. Every field except `experiment` is optional; omitted fields take
/// the experiment preset shown in the field docs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Chain parameters. Default: N=12, local_dim=2 for fig2 and appendix
    /// checks; N=8, local_dim=3 for fig3 and fig4; ω=0, λ=1, seed=1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainConfig>,
    /// Random interaction terms. Default: 3-site homogeneous windows for
    /// spin-1/2, independent 1/r³ pairs for spin-1, seeded by `chain.seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<RandomInteractionSpec>,
    /// Directory for result files. Default `scarchain-out/<experiment>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Default `both`.
    #[serde(default)]
    pub format: OutputFormat,
    /// Nearest-neighbour coupling profile. Default `engineered`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingKind>,
    /// Hamiltonians to evaluate. Default: all three for transfer runs,
    /// thermal and scar for spectral runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<Variant>>,
    /// Transferred state as `[re, im]` pairs. Default (|0⟩+|1⟩)/√2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<TimeGrid>,
    /// Time evolution for transfer runs and perturbation scans. Default:
    /// spectral for fig2, Krylov for fig3 and fig4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation: Option<Propagation>,
    /// Perturbation strengths. Default 1e-3..1e-1, four per decade.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Default: all three kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbations: Option<Vec<PerturbationKind>>,
    /// Default: scar-spin1 and pst-spin1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<PerturbationBase>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gue_oracle: Option<GueOracleConfig>,
    /// Seeds for the multi-seed scar transfer check. Default 1..=5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_seeds: Option<Vec<u64>>,
}

impl ExperimentConfig {
    pub fn preset(experiment: Experiment) -> Self {
        Self {
            experiment,
            chain: None,
            interaction: None,
            output_dir: None,
            format: OutputFormat::default(),
            coupling: None,
            variants: None,
            payload: None,
            time_grid: None,
            propagation: None,
            epsilons: None,
            perturbations: None,
            bases: None,
            gue_oracle: None,
            check_seeds: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Replaces the chain seed and the interaction seed.
    pub fn override_seed(&mut self, seed: u64) -> CliResult<()> {
        let mut chain = self.resolve_chain()?;
        chain.seed = seed;
        self.chain = Some(chain);
        if let Some(spec) = &mut self.interaction {
            spec.seed = seed;
        }
        Ok(())
    }

    fn resolve_chain(&self) -> CliResult<ChainConfig> {
        if let Some(chain) = self.chain {
            return Ok(chain);
        }
        let chain = match self.experiment {
            Experiment::Fig2Transfer | Experiment::Fig2Spectral | Experiment::AppendixChecks => {
                ChainConfig::spin_half(12, 0.0, 1.0, 1)
            }
            Experiment::Fig3Transfer | Experiment::Fig3Spectral | Experiment::Fig4Perturbation => {
                ChainConfig::spin_one(8, 0.0, 1.0, 1)
            }
            // unused by the pipeline; recorded so the manifest echo is complete
            Experiment::Classify => ChainConfig::spin_one(2, 0.0, 1.0, 1),
        };
        chain.map_err(|e| CliError::Config(e.to_string()))
    }

    /// All defaults filled in and every constraint checked.
    pub fn resolve(&self) -> CliResult<ResolvedConfig> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let chain = self.resolve_chain()?;
        chain.validate_with_limit(MAX_DIM).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(d) = self.experiment.local_dim() {
            if chain.local_dim != d {
                return bad(format!("{} needs local_dim = {d}, got {}", self.experiment.name(), chain.local_dim));
            }
        }
        let interaction = match self.interaction {
            Some(spec) => spec,
            None if chain.local_dim == 2 => RandomInteractionSpec::spin_half(chain.seed),
            None => RandomInteractionSpec::spin_one(chain.seed),
        };
        interaction.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if chain.local_dim == 2 && interaction.window_size > chain.n_sites {
            return bad(format!("window_size {} exceeds N = {}", interaction.window_size, chain.n_sites));
        }

        let transfer = matches!(self.experiment, Experiment::Fig2Transfer | Experiment::Fig3Transfer);
        let spectral = matches!(self.experiment, Experiment::Fig2Spectral | Experiment::Fig3Spectral);
        let variants = match &self.variants {
            Some(v) if v.is_empty() => return bad("variants must not be empty".into()),
            Some(v) => dedup(v),
            None if spectral => vec![Variant::Thermal, Variant::Scar],
            None => Variant::ALL.to_vec(),
        };
        let payload = self.payload.unwrap_or_else(Payload::plus_x);
        payload.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let time_grid = self.time_grid.unwrap_or_default();
        if time_grid.samples < 2 || !(time_grid.t_max_lambda.is_finite() && time_grid.t_max_lambda > 0.0) {
            return bad("time_grid needs samples >= 2 and t_max_lambda > 0".into());
        }
        if time_grid.samples > 100_000 {
            return bad("time_grid.samples is capped at 100000".into());
        }
        let propagation = self.propagation.unwrap_or(match self.experiment {
            Experiment::Fig2Transfer => Propagation::Spectral,
            _ => Propagation::Krylov(KrylovOptions::default()),
        });
        if let Propagation::Krylov(opts) = propagation {
            if opts.subspace_dim < 2 || opts.subspace_dim > 200 || !(opts.tolerance > 0.0 && opts.tolerance < 1e-3) {
                return bad("Krylov options need 2 <= subspace_dim <= 200 and 0 < tolerance < 1e-3".into());
            }
        }
        let epsilons = self.epsilons.clone().unwrap_or_else(default_epsilons);
        if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) || epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return bad("epsilons must be positive and strictly ascending".into());
        }
        let perturbations = match &self.perturbations {
            Some(p) if p.is_empty() => return bad("perturbations must not be empty".into()),
            Some(p) => dedup(p),
            None => PerturbationKind::ALL.to_vec(),
        };
        if self.experiment == Experiment::Fig4Perturbation
            && perturbations.contains(&PerturbationKind::LocalX)
            && chain.n_sites % 2 != 0
        {
            return bad("the local-x perturbation needs an even chain length".into());
        }
        let bases = match &self.bases {
            Some(b) if b.is_empty() => return bad("bases must not be empty".into()),
            Some(b) => dedup(b),
            None => vec![PerturbationBase::ScarSpin1, PerturbationBase::PstSpin1],
        };
        let gue_oracle = self.gue_oracle.unwrap_or_default();
        if gue_oracle.dim < 10 || gue_oracle.dim > 4096 || gue_oracle.samples == 0 || gue_oracle.samples > 1000 {
            return bad("gue_oracle needs 10 <= dim <= 4096 and 1 <= samples <= 1000".into());
        }
        let check_seeds = match &self.check_seeds {
            Some(s) if s.is_empty() => return bad("check_seeds must not be empty".into()),
            Some(s) => dedup(s),
            None => (1..=5).collect(),
        };
        if self.experiment == Experiment::AppendixChecks && chain.n_sites < 3 {
            return bad("appendix-checks needs N >= 3".into());
        }
        if transfer && time_grid.t_max_lambda < 3.0 * std::f64::consts::PI {
            // the thermal plateau window ends at 3π/λ
            return bad("transfer runs need t_max_lambda >= 3π".into());
        }
        let output_dir = self
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("scarchain-out").join(self.experiment.name()));
        Ok(ResolvedConfig {
            experiment: self.experiment,
            chain,
            interaction,
            output_dir,
            format: self.format,
            coupling: self.coupling.unwrap_or(CouplingKind::Engineered),
            variants,
            payload,
            time_grid,
            propagation,
            epsilons,
            perturbations,
            bases,
            gue_oracle,
            check_seeds,
        })
    }
}

fn dedup<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// A configuration with every default applied; echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub chain: ChainConfig,
    pub interaction: RandomInteractionSpec,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub coupling: CouplingKind,
    pub variants: Vec<Variant>,
    pub payload: Payload,
    pub time_grid: TimeGrid,
    pub propagation: Propagation,
    pub epsilons: Vec<f64>,
    pub perturbations: Vec<PerturbationKind>,
    pub bases: Vec<PerturbationBase>,
    pub gue_oracle: GueOracleConfig,
    pub check_seeds: Vec<u64>,
}

impl ResolvedConfig {
    /// Times of the fidelity traces.
    pub fn times(&self) -> Vec<f64> {
        let stop = self.time_grid.t_max_lambda / self.chain.lambda;
        scarchain::dynamics::uniform_grid(0.0, stop, self.time_grid.samples)
    }

    /// Same configuration on another seed, for chain and interaction alike.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.chain.seed = seed;
        out.interaction.seed = seed;
        out
    }

    /// Hashed input: the resolved configuration minus the output location.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        serde_json::to_string(&value).expect("config serializes")
    }
}

/// JSON Schema of [`ExperimentConfig`].
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for e in Experiment::ALL {
            let r = ExperimentConfig::preset(e).resolve().unwrap();
            assert_eq!(r.chain.seed, 1);
            if let Some(d) = e.local_dim() {
                assert_eq!(r.chain.local_dim, d);
            }
        }
        let fig2 = ExperimentConfig::preset(Experiment::Fig2Transfer).resolve().unwrap();
        assert_eq!((fig2.chain.n_sites, fig2.chain.omega), (12, 0.0));
        assert_eq!(fig2.propagation, Propagation::Spectral);
        let fig3 = ExperimentConfig::preset(Experiment::Fig3Spectral).resolve().unwrap();
        assert_eq!(fig3.chain.n_sites, 8);
        assert_eq!(fig3.interaction.decay_power, 3.0);
        assert_eq!(fig3.variants, vec![Variant::Thermal, Variant::Scar]);
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let text = r#"{"experiment":"fig2-transfer","chain":{"n_sites":6,"local_dim":2,"omega":0.5,"lambda":1.0,"seed":9},
            "payload":{"alpha":[1.0,0.0],"beta":[0.0,0.0]},"variants":["scar"],"format":"csv"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.interaction.seed, 9);
        assert_eq!(r.payload, Payload::up());
        assert_eq!(ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap(), c);
        assert!(ExperimentConfig::from_json(r#"{"experiment":"classify","typo":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"fig9"}"#).is_err());
    }

    #[test]
    fn constraints_rejected_before_work() {
        let mut c = ExperimentConfig::preset(Experiment::Fig3Transfer);
        c.chain = Some(ChainConfig::spin_half(6, 0.0, 1.0, 1).unwrap());
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::preset(Experiment::Fig2Spectral);
        c.chain = Some(ChainConfig::spin_half(14, 0.0, 1.0, 1).unwrap());
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::preset(Experiment::Fig4Perturbation);
        c.chain = Some(ChainConfig::spin_one(5, 0.0, 1.0, 1).unwrap());
        assert!(c.resolve().is_err());
        c.perturbations = Some(vec![PerturbationKind::GlobalX]);
        assert!(c.resolve().is_ok());
        let mut c = ExperimentConfig::preset(Experiment::Fig4Perturbation);
        c.epsilons = Some(vec![0.1, 0.01]);
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::preset(Experiment::Fig2Transfer);
        c.payload = Some(Payload { alpha: 1.0.into(), beta: 1.0.into() });
        assert!(c.resolve().is_err());
    }

    #[test]
    fn seed_override_reaches_interactions() {
        let mut c = ExperimentConfig::preset(Experiment::Fig2Spectral);
        c.override_seed(42).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!((r.chain.seed, r.interaction.seed), (42, 42));
        assert_eq!(r.with_seed(7).interaction.seed, 7);
    }

    #[test]
    fn schema_names_experiments() {
        let s = schema_json();
        assert!(s.contains("fig4-perturbation") && s.contains("appendix-checks"));
    }
}
