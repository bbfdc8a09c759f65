//! Experiment configs: one JSON document per run.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use polarity_core::conditions::{
    Case, ClassifyConfig, ComparabilitySampling, Family, Sampling, WeightPair, DEFAULT_DISK_RADIUS,
};
use polarity_core::fourier::{GridConfig, LevelSetConfig, SimpleFunction};
use polarity_core::geometry::{Body, Region, VolumeMethod};
use polarity_core::search::{Candidate, Direction, SearchConfig};
use polarity_core::weights::{Exponents, Weight};

use crate::CliError;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Polar,
    Mahler,
    CheckCondition,
    CheckNqprime,
    Comparability,
    EpsilonMap,
    Region,
    Classify,
    LowerBound,
    Rwt,
    StrongType,
    Hy,
    Conjecture,
    MahlerSearch,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Polar => "polar",
            Command::Mahler => "mahler",
            Command::CheckCondition => "check-condition",
            Command::CheckNqprime => "check-nqprime",
            Command::Comparability => "comparability",
            Command::EpsilonMap => "epsilon-map",
            Command::Region => "region",
            Command::Classify => "classify",
            Command::LowerBound => "lower-bound",
            Command::Rwt => "rwt",
            Command::StrongType => "strong-type",
            Command::Hy => "hy",
            Command::Conjecture => "conjecture",
            Command::MahlerSearch => "mahler-search",
        }
    }
}

/// `u` with exactly one of `v` and `w`; the other is derived.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub u: Weight,
    #[serde(default)]
    pub v: Option<Weight>,
    #[serde(default)]
    pub w: Option<Weight>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarParams {
    body: Body,
}

fn default_volume_method() -> VolumeMethod {
    VolumeMethod::Auto { samples: 1_000_000, seed: 0 }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MahlerParams {
    body: Body,
    #[serde(default = "default_volume_method")]
    method: VolumeMethod,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    #[serde(default = "default_family")]
    family: Family,
    #[serde(default)]
    sampling: Sampling,
}

fn default_family() -> Family {
    Family::Cubes
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NqprimeParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    #[serde(default)]
    sampling: Sampling,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComparabilityParams {
    mu1: Weight,
    mu2: Weight,
    delta: f64,
    sampling: ComparabilitySampling,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsilonParams {
    c: f64,
    n: usize,
    deltas: Vec<f64>,
}

fn default_radius() -> f64 {
    DEFAULT_DISK_RADIUS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionParams {
    exponents: ExponentSpec,
    case: Case,
    #[serde(default = "default_radius")]
    radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    #[serde(default)]
    condition: Sampling,
    comparability: ComparabilitySampling,
}

fn default_lower_samples() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerBoundParams {
    body: Body,
    #[serde(default = "default_lower_samples")]
    samples: usize,
    #[serde(default)]
    grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RwtParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    set: Region,
    #[serde(default)]
    levels: LevelSetConfig,
    /// Dilations of `set` to sweep; the set must then be a plain body.
    #[serde(default)]
    scales: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrongTypeParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    functions: Vec<SimpleFunction>,
    #[serde(default)]
    grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyParams {
    function: SimpleFunction,
    p: f64,
    #[serde(default)]
    grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RayParams {
    /// Defaults to the best configuration found by the search.
    #[serde(default)]
    start: Option<Candidate>,
    scales: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConjectureParams {
    pair: PairSpec,
    exponents: ExponentSpec,
    search: SearchConfig,
    #[serde(default)]
    ray: Option<RayParams>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MahlerSearchParams {
    dim: usize,
    direction: Direction,
    search: SearchConfig,
}

/// A validated run, ready to execute.
#[derive(Debug)]
pub enum Job {
    Polar { body: Body },
    Mahler { body: Body, method: VolumeMethod },
    CheckCondition { pair: WeightPair, exps: Exponents, family: Family, sampling: Sampling },
    CheckNqprime { pair: WeightPair, exps: Exponents, sampling: Sampling },
    Comparability { mu1: Weight, mu2: Weight, delta: f64, sampling: ComparabilitySampling },
    EpsilonMap { c: f64, n: usize, deltas: Vec<f64> },
    Region { exps: Exponents, case: Case, radius: f64 },
    Classify { pair: WeightPair, exps: Exponents, config: ClassifyConfig },
    LowerBound { body: Body, samples: usize, seed: u64, grid: GridConfig },
    Rwt { pair: WeightPair, exps: Exponents, set: Region, levels: LevelSetConfig, scales: Option<Vec<f64>> },
    StrongType { pair: WeightPair, exps: Exponents, functions: Vec<SimpleFunction>, grid: GridConfig },
    Hy { function: SimpleFunction, p: f64, grid: GridConfig },
    Conjecture { pair: WeightPair, exps: Exponents, search: SearchConfig, ray: Option<(Option<Candidate>, Vec<f64>)> },
    MahlerSearch { dim: usize, direction: Direction, search: SearchConfig },
}

/// Config header plus the command's parameter block.
#[derive(Debug)]
pub struct Experiment {
    pub seed: u64,
    pub job: Job,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}

fn params<T: DeserializeOwned>(rest: Value) -> Result<T, CliError> {
    serde_json::from_value(rest).map_err(|e| invalid(e.to_string()))
}

fn exponents(e: ExponentSpec) -> Result<Exponents, CliError> {
    Exponents::new(e.p, e.q).map_err(|err| invalid(format!("exponents: {err}")))
}

/// Checks that every fixed dimension agrees and returns it.
fn common_dim(dims: &[(&str, Option<usize>)]) -> Result<Option<usize>, CliError> {
    let mut seen: Option<(&str, usize)> = None;
    for &(what, d) in dims {
        let Some(d) = d else { continue };
        match seen {
            Some((other, e)) if e != d => {
                return Err(invalid(format!("dimension mismatch: {other} is {e}-dimensional, {what} is {d}-dimensional")))
            }
            None => seen = Some((what, d)),
            _ => {}
        }
    }
    Ok(seen.map(|s| s.1))
}

fn pair(spec: PairSpec, exps: &Exponents, dim: Option<usize>) -> Result<WeightPair, CliError> {
    let pair = match (spec.v, spec.w) {
        (Some(v), None) => WeightPair::new(spec.u, v, exps),
        (None, Some(w)) => WeightPair::from_dual(spec.u, w, exps),
        _ => return Err(invalid("pair needs exactly one of v and w")),
    }
    .map_err(|e| invalid(format!("pair: {e}")))?;
    let dims = [
        ("u", pair.u.dim_hint()),
        ("v", pair.v.dim_hint()),
        ("w", pair.w.dim_hint()),
        ("configured dimension", dim),
    ];
    let n = common_dim(&dims)?.unwrap_or(1);
    pair.u.validate(n).map_err(|e| invalid(format!("u: {e}")))?;
    pair.v.validate_lenient(n).map_err(|e| invalid(format!("v: {e}")))?;
    pair.w.validate_lenient(n).map_err(|e| invalid(format!("w: {e}")))?;
    Ok(pair)
}

/// `sampling.dim` only counts when written in the config.
fn explicit_dim(rest: &Value, pointer: &str) -> Option<usize> {
    rest.pointer(pointer).and_then(Value::as_u64).map(|d| d as usize)
}

/// Sets `sampling.dim` from the weights when the config leaves it out.
fn fill_dim(sampling: &mut Sampling, pair: &WeightPair, explicit: Option<usize>) {
    if explicit.is_none() {
        if let Some(n) = pair.u.dim_hint().or(pair.v.dim_hint()).or(pair.w.dim_hint()) {
            sampling.dim = n;
        }
    }
}

/// Parses and validates a config. `seed_override` replaces the stored seed.
/// Every inner seed field is replaced by the run seed, so the header is the
/// single source of randomness.
pub fn parse(command: Command, bytes: &[u8], seed_override: Option<u64>) -> Result<Experiment, CliError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| invalid(format!("config is not valid JSON: {e}")))?;
    let Value::Object(mut map) = doc else {
        return Err(invalid("config must be a JSON object"));
    };
    match map.remove("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(invalid(format!("unsupported schema_version {v}"))),
        None => return Err(invalid("missing schema_version")),
    }
    let stored_seed = match map.remove("seed") {
        Some(v) => Some(v.as_u64().ok_or_else(|| invalid("seed must be an unsigned 64-bit integer"))?),
        None => None,
    };
    let seed = seed_override.or(stored_seed).ok_or_else(|| invalid("missing seed"))?;
    if let Some(c) = map.remove("command") {
        if c.as_str() != Some(command.as_str()) {
            return Err(invalid(format!("config is for command {c}, not {}", command.as_str())));
        }
    }
    let rest = Value::Object(map);
    let job = build(command, rest, seed)?;
    Ok(Experiment { seed, job })
}

fn build(command: Command, rest: Value, seed: u64) -> Result<Job, CliError> {
    Ok(match command {
        Command::Polar => {
            let p: PolarParams = params(rest)?;
            Job::Polar { body: p.body }
        }
        Command::Mahler => {
            let p: MahlerParams = params(rest)?;
            let method = match p.method {
                VolumeMethod::Exact => VolumeMethod::Exact,
                VolumeMethod::MonteCarlo { samples, .. } => VolumeMethod::MonteCarlo { samples, seed },
                VolumeMethod::Auto { samples, .. } => VolumeMethod::Auto { samples, seed },
            };
            Job::Mahler { body: p.body, method }
        }
        Command::CheckCondition => {
            let explicit = explicit_dim(&rest, "/sampling/dim");
            let p: ConditionParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let pair = pair(p.pair, &exps, explicit)?;
            let mut sampling = p.sampling;
            fill_dim(&mut sampling, &pair, explicit);
            sampling.seed = seed;
            Job::CheckCondition { pair, exps, family: p.family, sampling }
        }
        Command::CheckNqprime => {
            let explicit = explicit_dim(&rest, "/sampling/dim");
            let p: NqprimeParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let pair = pair(p.pair, &exps, explicit)?;
            let mut sampling = p.sampling;
            fill_dim(&mut sampling, &pair, explicit);
            sampling.seed = seed;
            Job::CheckNqprime { pair, exps, sampling }
        }
        Command::Comparability => {
            let p: ComparabilityParams = params(rest)?;
            let cube_dim = p.sampling.cubes.centers.first().map(Vec::len);
            common_dim(&[("mu1", p.mu1.dim_hint()), ("mu2", p.mu2.dim_hint()), ("cube centers", cube_dim)])?;
            let mut sampling = p.sampling;
            sampling.cubes.seed = seed;
            Job::Comparability { mu1: p.mu1, mu2: p.mu2, delta: p.delta, sampling }
        }
        Command::EpsilonMap => {
            let p: EpsilonParams = params(rest)?;
            if p.deltas.is_empty() {
                return Err(invalid("deltas must not be empty"));
            }
            Job::EpsilonMap { c: p.c, n: p.n, deltas: p.deltas }
        }
        Command::Region => {
            let p: RegionParams = params(rest)?;
            Job::Region { exps: exponents(p.exponents)?, case: p.case, radius: p.radius }
        }
        Command::Classify => {
            let explicit = explicit_dim(&rest, "/condition/dim");
            let p: ClassifyParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let pair = pair(p.pair, &exps, explicit)?;
            let mut config = ClassifyConfig { condition: p.condition, comparability: p.comparability };
            fill_dim(&mut config.condition, &pair, explicit);
            config.condition.seed = seed;
            config.comparability.cubes.seed = seed;
            Job::Classify { pair, exps, config }
        }
        Command::LowerBound => {
            let p: LowerBoundParams = params(rest)?;
            let mut grid = p.grid;
            grid.seed = seed;
            Job::LowerBound { body: p.body, samples: p.samples, seed, grid }
        }
        Command::Rwt => {
            let p: RwtParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let pair = pair(p.pair, &exps, Some(p.set.dim()))?;
            if p.scales.is_some() && matches!(p.set, Region::Translated(_)) {
                return Err(invalid("a dilation sweep needs an untranslated set"));
            }
            let mut levels = p.levels;
            levels.grid.seed = seed;
            Job::Rwt { pair, exps, set: p.set, levels, scales: p.scales }
        }
        Command::StrongType => {
            let p: StrongTypeParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let dims: Vec<(&str, Option<usize>)> = p.functions.iter().map(|f| ("function", Some(f.dim()))).collect();
            let n = common_dim(&dims)?;
            let pair = pair(p.pair, &exps, n)?;
            let mut grid = p.grid;
            grid.seed = seed;
            Job::StrongType { pair, exps, functions: p.functions, grid }
        }
        Command::Hy => {
            let p: HyParams = params(rest)?;
            let mut grid = p.grid;
            grid.seed = seed;
            Job::Hy { function: p.function, p: p.p, grid }
        }
        Command::Conjecture => {
            let p: ConjectureParams = params(rest)?;
            let exps = exponents(p.exponents)?;
            let mut search = p.search;
            search.validate().map_err(|e| invalid(format!("search: {e}")))?;
            let pair = pair(p.pair, &exps, Some(search.parameterization.dim()))?;
            search.seed = seed;
            let ray = p.ray.map(|r| (r.start, r.scales));
            Job::Conjecture { pair, exps, search, ray }
        }
        Command::MahlerSearch => {
            let p: MahlerSearchParams = params(rest)?;
            let mut search = p.search;
            search.validate().map_err(|e| invalid(format!("search: {e}")))?;
            common_dim(&[("dim", Some(p.dim)), ("parameterization", Some(search.parameterization.dim()))])?;
            search.seed = seed;
            Job::MahlerSearch { dim: p.dim, direction: p.direction, search }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_is_invalid() {
        let cfg = br#"{"schema_version": 1, "body": {"variant": "box", "dim": 1, "center": [0], "half_extents": [1], "rotation": [1]}}"#;
        let err = parse(Command::Polar, cfg, None).unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid(ref m) if m.contains("seed")), "{err}");
        assert!(parse(Command::Polar, cfg, Some(3)).is_ok());
    }

    #[test]
    fn unknown_fields_and_bad_exponents_are_rejected() {
        let cfg = br#"{"schema_version": 1, "seed": 0, "exponents": {"p": 0.5, "q": 2}, "case": "a"}"#;
        assert!(parse(Command::Region, cfg, None).is_err());
        let cfg = br#"{"schema_version": 1, "seed": 0, "exponents": {"p": 2, "q": 4}, "case": "b", "colour": 1}"#;
        assert!(parse(Command::Region, cfg, None).is_err());
    }

    #[test]
    fn weight_dimensions_must_agree() {
        let cfg = br#"{"schema_version": 1, "seed": 0, "exponents": {"p": 2, "q": 2},
            "pair": {"u": {"kind": "aniso", "alphas": [0.1, 0.2]}, "v": {"kind": "constant", "value": 1}},
            "sampling": {"dim": 3}}"#;
        let err = parse(Command::CheckCondition, cfg, None).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
    }
}
