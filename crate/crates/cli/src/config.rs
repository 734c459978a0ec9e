//! The JSON experiment configuration.
//!
//! A config file is merged key by key over the defaults of its experiment, so
//! `--print-config` always shows every setting that a run will use.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use mlab_core::construct::EpsilonSequence;
use mlab_core::domain::{CuspProfile, GraphDomain, Symmetry};
use mlab_core::hermite::{FlatCapInterpolant, HermiteKnot};
use mlab_core::markov::{Direction, FitModel};
use mlab_core::quad::GradedMesh;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// The experiments `mlab` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    JacobiCheck,
    DomainInfo,
    MarkovSweep,
    EigenSweep,
    Lemma31,
    Construct,
    Logcusp,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::JacobiCheck => "jacobi-check",
            Experiment::DomainInfo => "domain-info",
            Experiment::MarkovSweep => "markov-sweep",
            Experiment::EigenSweep => "eigen-sweep",
            Experiment::Lemma31 => "lemma31",
            Experiment::Construct => "construct",
            Experiment::Logcusp => "logcusp",
        }
    }
}

/// A profile as JSON: `{kind, parameters, knots?, symmetry?, start?}`.
///
/// `kind` is one of `power` (`k`), `log` (`iota`), `constant` (`height`) or
/// `flat-cap` (`cap_value` plus a knot list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<KnotSpec>>,
    #[serde(default = "default_symmetry")]
    pub symmetry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

fn default_symmetry() -> String {
    "upper".into()
}

/// A Hermite knot in the original coordinate: `F(x) = value`, `F'(x) = slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotSpec {
    pub x: f64,
    pub value: f64,
    pub slope: f64,
}

impl DomainSpec {
    pub fn power(k: f64) -> Self {
        Self::simple("power", "k", k)
    }

    pub fn log(iota: f64) -> Self {
        Self::simple("log", "iota", iota)
    }

    pub fn constant(height: f64) -> Self {
        Self::simple("constant", "height", height)
    }

    fn simple(kind: &str, key: &str, v: f64) -> Self {
        Self {
            kind: kind.into(),
            parameters: BTreeMap::from([(key.to_string(), v)]),
            knots: None,
            symmetry: default_symmetry(),
            start: None,
        }
    }

    pub fn from_interpolant(interp: &FlatCapInterpolant) -> Self {
        let knots = interp.knots().iter().map(|k| KnotSpec { x: 1.0 - k.gap, value: k.value, slope: -k.slope }).collect();
        Self {
            kind: "flat-cap".into(),
            parameters: BTreeMap::from([("cap_value".to_string(), interp.cap_value())]),
            knots: Some(knots),
            symmetry: default_symmetry(),
            start: None,
        }
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.parameters.get(key).copied().with_context(|| format!("{} profile needs parameters.{key}", self.kind))
    }

    fn expect_params(&self, keys: &[&str]) -> Result<()> {
        if let Some(extra) = self.parameters.keys().find(|k| !keys.contains(&k.as_str())) {
            bail!("{} profile does not take parameter '{extra}'", self.kind);
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<CuspProfile> {
        let profile = match self.kind.as_str() {
            "power" => {
                self.expect_params(&["k"])?;
                CuspProfile::power(self.param("k")?)?
            }
            "log" => {
                self.expect_params(&["iota"])?;
                CuspProfile::log(self.param("iota")?)?
            }
            "constant" => {
                self.expect_params(&["height"])?;
                CuspProfile::constant(self.param("height")?)?
            }
            "flat-cap" => {
                self.expect_params(&["cap_value"])?;
                let knots = self.knots.as_ref().context("flat-cap profile needs a knot list")?;
                let hermite = knots.iter().map(|k| HermiteKnot { gap: 1.0 - k.x, value: k.value, slope: -k.slope }).collect();
                CuspProfile::flat_cap(FlatCapInterpolant::from_knots(self.param("cap_value")?, hermite)?)
            }
            other => bail!("unknown profile kind '{other}' (expected power, log, constant or flat-cap)"),
        };
        if self.kind != "flat-cap" && self.knots.is_some() {
            bail!("only flat-cap profiles take knots");
        }
        Ok(match self.start {
            Some(s) => profile.with_start(s)?,
            None => profile,
        })
    }

    pub fn symmetry(&self) -> Result<Symmetry> {
        match self.symmetry.as_str() {
            "upper" => Ok(Symmetry::UpperOnly),
            "symmetric" => Ok(Symmetry::Symmetric),
            other => bail!("unknown symmetry '{other}' (expected upper or symmetric)"),
        }
    }

    pub fn domain(&self) -> Result<GraphDomain> {
        Ok(GraphDomain::new(self.profile()?, self.symmetry()?)?)
    }
}

/// Degrees to sweep: `{values}`, `{start, stop, ratio}` (geometric) or
/// `{start, stop, step}`. Both `start` and `stop` are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NRange {
    Values { values: Vec<usize> },
    Geometric { start: usize, stop: usize, ratio: usize },
    Linear { start: usize, stop: usize, step: usize },
}

impl NRange {
    pub fn degrees(&self) -> Result<Vec<usize>> {
        let out = match self {
            NRange::Values { values } => {
                let mut v = values.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            NRange::Geometric { start, stop, ratio } => {
                ensure!(*start >= 1 && *ratio >= 2, "geometric n_range needs start ≥ 1 and ratio ≥ 2");
                std::iter::successors(Some(*start), |&n| n.checked_mul(*ratio)).take_while(|&n| n <= *stop).collect()
            }
            NRange::Linear { start, stop, step } => {
                ensure!(*step >= 1, "n_range step must be ≥ 1");
                (*start..=*stop).step_by(*step).collect()
            }
        };
        ensure!(!out.is_empty(), "n_range is empty");
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSpec {
    pub ratio: f64,
    pub depth: usize,
    pub nodes_per_panel: Option<usize>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        let m = GradedMesh::default();
        Self { ratio: m.ratio(), depth: m.depth(), nodes_per_panel: None }
    }
}

impl MeshSpec {
    pub fn mesh(&self) -> Result<GradedMesh> {
        let mesh = GradedMesh::new(self.ratio, self.depth)?;
        Ok(match self.nodes_per_panel {
            Some(m) => mesh.with_nodes_per_panel(m)?,
            None => mesh,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// `pure-power` or `log-corrected`.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
}

impl FitSpec {
    pub fn pure() -> Self {
        Self { model: "pure-power".into(), iota: None }
    }

    pub fn model(&self) -> Result<FitModel> {
        match self.model.as_str() {
            "pure-power" => Ok(FitModel::PurePower),
            "log-corrected" => Ok(FitModel::LogCorrected { iota: self.iota.context("log-corrected fit needs iota")? }),
            other => bail!("unknown fit model '{other}' (expected pure-power or log-corrected)"),
        }
    }
}

/// The `ε_n, C_n` data for `construct`: explicit lists, a power law
/// `ε_n = n^{2-2s}, C_n = 2s`, or a JSON file `{epsilons, constants}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Explicit { epsilons: Vec<f64>, constants: Vec<f64> },
    PowerLaw { power_law: f64, length: usize },
    File { file: String },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    epsilons: Vec<f64>,
    constants: Vec<f64>,
}

impl SequenceSpec {
    /// Relative file paths resolve against `base`, the config's directory.
    pub fn sequence(&self, base: &Path) -> Result<EpsilonSequence> {
        Ok(match self {
            SequenceSpec::Explicit { epsilons, constants } => EpsilonSequence::new(epsilons.clone(), constants.clone())?,
            SequenceSpec::PowerLaw { power_law, length } => EpsilonSequence::power_law(*power_law, *length),
            SequenceSpec::File { file } => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let parsed: SequenceFile =
                    serde_json::from_str(&text).with_context(|| format!("parsing sequence file {}", path.display()))?;
                EpsilonSequence::new(parsed.epsilons, parsed.constants)?
            }
        })
    }
}

/// Artifact names, relative to `--out`. `null` disables an artifact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub json: Option<String>,
    /// Exported profile (only `construct` writes one).
    pub profile: Option<String>,
}

impl OutputSpec {
    fn named(stem: &str) -> Self {
        Self { csv: Some(format!("{stem}.csv")), json: Some(format!("{stem}.json")), profile: None }
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: Experiment,
    pub domain: DomainSpec,
    pub p: f64,
    pub n_range: NRange,
    /// Jacobi `α`; `null` selects it from the convexity index.
    pub alpha: Option<f64>,
    pub alpha_margin: f64,
    pub beta: f64,
    pub mesh: MeshSpec,
    pub seed: u64,
    /// Pass band `[lo, hi]` for the experiment's headline statistic.
    pub band: Option<[f64; 2]>,
    pub fit: FitSpec,
    /// `x`, `y` or `max`.
    pub direction: String,
    pub threshold: f64,
    pub allow_large_degree: bool,
    pub restarts: usize,
    pub upsilon: f64,
    /// Mehler–Heine argument.
    pub z: f64,
    /// Darboux errors are measured on `[θ_margin, π - θ_margin]`.
    pub theta_margin: f64,
    pub omega_points: usize,
    pub sequence: SequenceSpec,
    pub n_max: usize,
    pub secant_samples: usize,
    pub recovery_band: [f64; 2],
    /// Inclusive `[lo, hi]`; `null` means `[4, n_max / 2]`.
    pub recovery_range: Option<[usize; 2]>,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            schema: SCHEMA,
            experiment,
            domain: DomainSpec::power(2.0),
            p: 2.0,
            n_range: NRange::Geometric { start: 8, stop: 64, ratio: 2 },
            alpha: None,
            alpha_margin: 1.0,
            beta: 0.0,
            mesh: MeshSpec::default(),
            seed: 0,
            band: None,
            fit: FitSpec::pure(),
            direction: "max".into(),
            threshold: 1e-12,
            allow_large_degree: false,
            restarts: 8,
            upsilon: 0.5,
            z: 1.0,
            theta_margin: 0.6,
            omega_points: 12,
            sequence: SequenceSpec::PowerLaw { power_law: 2.0, length: 64 },
            n_max: 64,
            secant_samples: 10_000,
            recovery_band: [0.9, 1.1],
            recovery_range: None,
            output: OutputSpec::named(experiment.name()),
        };
        match experiment {
            Experiment::JacobiCheck => Self {
                alpha: Some(0.0),
                n_range: NRange::Geometric { start: 50, stop: 400, ratio: 2 },
                band: Some([-1.8, -1.2]),
                ..base
            },
            Experiment::DomainInfo => {
                Self { domain: DomainSpec::log(1.0), n_range: NRange::Geometric { start: 1, stop: 1024, ratio: 2 }, ..base }
            }
            Experiment::MarkovSweep => Self { band: Some([3.6, 4.4]), ..base },
            Experiment::EigenSweep => Self {
                domain: DomainSpec::constant(1.0),
                n_range: NRange::Linear { start: 2, stop: 10, step: 1 },
                band: Some([1.8, 2.2]),
                ..base
            },
            Experiment::Lemma31 => Self {
                alpha: Some(7.5),
                n_range: NRange::Values { values: vec![16, 24, 32, 48, 64] },
                band: Some([1.0, 3.0]),
                ..base
            },
            Experiment::Construct => Self {
                band: Some([3.5, 4.5]),
                output: OutputSpec { profile: Some("profile.json".into()), ..OutputSpec::named("construct") },
                ..base
            },
            Experiment::Logcusp => Self {
                domain: DomainSpec::log(1.0),
                fit: FitSpec { model: "log-corrected".into(), iota: Some(1.0) },
                band: Some([1.7, 2.3]),
                ..base
            },
        }
    }

    /// Overlays the top-level keys of `user` on the defaults for `experiment`.
    pub fn resolve(experiment: Experiment, user: Option<Value>) -> Result<Self> {
        let mut merged = serde_json::to_value(Self::defaults(experiment))?;
        if let Some(user) = user {
            let Value::Object(user) = user else { bail!("config must be a JSON object") };
            if let Some(v) = user.get("experiment") {
                let named: Experiment = serde_json::from_value(v.clone()).context("config field 'experiment'")?;
                ensure!(
                    named == experiment,
                    "config is for '{}' but '{}' was requested",
                    named.name(),
                    experiment.name()
                );
            }
            let target = merged.as_object_mut().expect("defaults serialise to an object");
            for (k, v) in user {
                target.insert(k, v);
            }
        }
        let config: Self = serde_json::from_value(merged).context("invalid config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self> {
        let user = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                Some(serde_json::from_str(&text).with_context(|| format!("config parse error in {}", path.display()))?)
            }
            None => None,
        };
        Self::resolve(experiment, user)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.schema == SCHEMA, "unsupported config schema {} (expected {SCHEMA})", self.schema);
        ensure!(self.p >= 1.0 && self.p.is_finite(), "p = {} must be ≥ 1", self.p);
        self.n_range.degrees()?;
        if let Some([lo, hi]) = self.band {
            ensure!(lo <= hi, "band [{lo}, {hi}] is reversed");
        }
        ensure!(self.recovery_band[0] <= self.recovery_band[1], "recovery_band is reversed");
        ensure!(self.restarts >= 1, "restarts must be ≥ 1");
        ensure!(self.n_max >= 2, "n_max must be ≥ 2");
        self.direction()?;
        self.fit.model()?;
        self.mesh.mesh()?;
        self.domain.symmetry()?;
        Ok(())
    }

    pub fn direction(&self) -> Result<Direction> {
        Ok(self.direction.parse()?)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.n_range.degrees().expect("validated")
    }

    pub fn in_band(&self, value: f64) -> bool {
        match self.band {
            Some([lo, hi]) => value >= lo && value <= hi,
            None => true,
        }
    }
}
