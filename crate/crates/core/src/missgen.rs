//! Synthetic missingness with known ground truth.
//!
//! Three procedures inject structure into a complete table: per-variable
//! amounts (`am`), pairs with a prescribed joint-missing amount (`jm`), and
//! pairs where missingness in one variable concentrates in a tertile of the
//! other (`cm`). Every run is driven by one seeded ChaCha8 stream, consumed in
//! a fixed order, so identical input, spec and seed give identical output.
//!
//! Fractional counts resolve with half-up rounding: `round(N·p)`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, IncompleteDataset, VariableKind};
use crate::error::{Error, Result};
use crate::item_set::ItemSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    Am,
    Jm,
    Cm,
}

impl fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenerationMode::Am => "am",
            GenerationMode::Jm => "jm",
            GenerationMode::Cm => "cm",
        })
    }
}

impl std::str::FromStr for GenerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "am" => Ok(GenerationMode::Am),
            "jm" => Ok(GenerationMode::Jm),
            "cm" => Ok(GenerationMode::Cm),
            other => Err(Error::InvalidSpec(format!("unknown mode `{other}`"))),
        }
    }
}

/// A variable by position or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariableRef {
    Index(usize),
    Name(String),
}

impl VariableRef {
    pub fn resolve(&self, d: &IncompleteDataset) -> Result<usize> {
        match self {
            VariableRef::Index(i) => d.variable(*i).map(|_| *i),
            VariableRef::Name(n) => d.require_index(n),
        }
    }
}

impl From<&str> for VariableRef {
    fn from(s: &str) -> Self {
        VariableRef::Name(s.to_string())
    }
}

/// Per-variable missing fractions for `am` mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmTargets {
    /// Each variable draws its fraction uniformly from `[lo, hi]`.
    Range([f64; 2]),
    /// Explicit fractions; unlisted variables stay complete.
    PerVariable(BTreeMap<String, f64>),
}

impl Default for AmTargets {
    fn default() -> Self {
        AmTargets::Range([0.0, 0.5])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JmPattern {
    /// Joint missingness equals the independence baseline.
    Equal,
    Above,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmPairSpec {
    pub j: VariableRef,
    pub k: VariableRef,
    pub p_j: f64,
    pub p_k: f64,
    pub pattern: JmPattern,
    /// Drawn from the range the pattern allows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_jk: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeType {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrengthLevel {
    Low,
    Medium,
    High,
}

/// Fraction of injected missing items whose condition value lies in range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strength {
    Level(StrengthLevel),
    Fraction(f64),
}

impl Strength {
    pub fn fraction(self) -> f64 {
        match self {
            Strength::Level(StrengthLevel::Low) => 0.3,
            Strength::Level(StrengthLevel::Medium) => 0.6,
            Strength::Level(StrengthLevel::High) => 0.9,
            Strength::Fraction(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmPairSpec {
    /// Receives the missing values.
    pub j: VariableRef,
    /// Condition variable; stays complete.
    pub k: VariableRef,
    pub am_j: f64,
    pub range_type: RangeType,
    pub strength: Strength,
}

/// Declarative description of one generator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<GenerationMode>,
    /// Complete table the spec applies to, for front ends that read it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
    #[serde(default)]
    pub am_targets: AmTargets,
    #[serde(default)]
    pub jm_pairs: Vec<JmPairSpec>,
    #[serde(default)]
    pub cm_pairs: Vec<CmPairSpec>,
}

impl MissingnessSpec {
    pub fn new(mode: GenerationMode, seed: u64) -> Self {
        Self {
            seed,
            mode: Some(mode),
            source: None,
            am_targets: AmTargets::default(),
            jm_pairs: Vec::new(),
            cm_pairs: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    /// JSON unless the extension is `.toml`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn require_mode(&self) -> Result<GenerationMode> {
        self.mode
            .ok_or_else(|| Error::InvalidSpec("no generation mode given".into()))
    }

    /// Checks fractions and pair disjointness against `d` without drawing anything.
    pub fn validate(&self, d: &IncompleteDataset) -> Result<()> {
        fn fraction(name: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} = {v} is not in [0, 1]")))
            }
        }
        match self.require_mode()? {
            GenerationMode::Am => match &self.am_targets {
                AmTargets::Range([lo, hi]) => {
                    fraction("am range lower", *lo)?;
                    fraction("am range upper", *hi)?;
                    if lo > hi {
                        return Err(Error::InvalidSpec(format!("am range [{lo}, {hi}] is reversed")));
                    }
                }
                AmTargets::PerVariable(map) => {
                    for (name, v) in map {
                        d.require_index(name)?;
                        fraction(name, *v)?;
                    }
                }
            },
            GenerationMode::Jm => {
                let mut used = HashSet::new();
                for p in &self.jm_pairs {
                    claim_pair(d, &p.j, &p.k, &mut used)?;
                    fraction("p_j", p.p_j)?;
                    fraction("p_k", p.p_k)?;
                    if let Some(pjk) = p.p_jk {
                        fraction("p_jk", pjk)?;
                    }
                }
            }
            GenerationMode::Cm => {
                let mut used = HashSet::new();
                for p in &self.cm_pairs {
                    claim_pair(d, &p.j, &p.k, &mut used)?;
                    fraction("am_j", p.am_j)?;
                    fraction("strength", p.strength.fraction())?;
                }
            }
        }
        Ok(())
    }
}

fn claim_pair(
    d: &IncompleteDataset,
    j: &VariableRef,
    k: &VariableRef,
    used: &mut HashSet<usize>,
) -> Result<(usize, usize)> {
    let (j, k) = (j.resolve(d)?, k.resolve(d)?);
    if j == k {
        return Err(Error::InvalidSpec(format!(
            "pair uses `{}` twice",
            d.variables()[j].name()
        )));
    }
    for v in [j, k] {
        if !used.insert(v) {
            return Err(Error::InvalidSpec(format!(
                "variable `{}` appears in more than one pair",
                d.variables()[v].name()
            )));
        }
    }
    Ok((j, k))
}

/// `round(N·fraction)`, halves rounding up.
pub fn round_count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 0.5 + 1e-9).floor() as usize
}

/// Value interval of a condition range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConditionRange {
    Numeric { min: f64, max: f64 },
    Categorical { labels: Vec<String> },
}

impl ConditionRange {
    pub fn contains(&self, cell: Cell<'_>) -> bool {
        match (self, cell) {
            (ConditionRange::Numeric { min, max }, Cell::Number(x)) => *min <= x && x <= *max,
            (ConditionRange::Categorical { labels }, Cell::Label(s)) => labels.iter().any(|l| l == s),
            _ => false,
        }
    }
}

impl fmt::Display for ConditionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionRange::Numeric { min, max } => write!(f, "{min:?} - {max:?}"),
            ConditionRange::Categorical { labels } => write!(f, "{{{}}}", labels.join(", ")),
        }
    }
}

/// Items of variable `k` falling in the requested third of its recorded
/// values, and the value interval they span. Thirds split the sorted values at
/// ranks `⌈n/3⌉` and `⌈2n/3⌉`; values tied across a split stay in the lower
/// third. Categorical variables use their label-sorted order.
pub fn condition_range(
    d: &IncompleteDataset,
    k: usize,
    range_type: RangeType,
) -> Result<(ItemSet, Option<ConditionRange>)> {
    let col = d.variable(k)?;
    let (keyed, labels): (Vec<(usize, f64)>, Option<Vec<String>>) = match col.kind() {
        VariableKind::Numerical => (col.recorded_numbers().collect(), None),
        VariableKind::Categorical => {
            let mut names: Vec<String> = col.recorded_labels().map(|(_, l)| l.to_string()).collect();
            names.sort();
            names.dedup();
            let keyed = col
                .recorded_labels()
                .map(|(i, l)| (i, names.binary_search_by(|n| n.as_str().cmp(l)).unwrap() as f64))
                .collect();
            (keyed, Some(names))
        }
    };
    if keyed.is_empty() {
        return Err(Error::NoSupport(col.name().to_string()));
    }
    let mut sorted: Vec<f64> = keyed.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let cut_low = sorted[n.div_ceil(3) - 1];
    let cut_mid = sorted[(2 * n).div_ceil(3) - 1];
    let inside = |v: f64| match range_type {
        RangeType::Low => v <= cut_low,
        RangeType::Medium => v > cut_low && v <= cut_mid,
        RangeType::High => v > cut_mid,
    };

    let members = ItemSet::from_indices(
        d.item_count(),
        keyed.iter().filter(|(_, v)| inside(*v)).map(|(i, _)| *i),
    );
    let values: Vec<f64> = keyed.iter().map(|(_, v)| *v).filter(|v| inside(*v)).collect();
    let range = if values.is_empty() {
        None
    } else {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(match labels {
            None => ConditionRange::Numeric { min: lo, max: hi },
            Some(names) => ConditionRange::Categorical {
                labels: names[lo as usize..=hi as usize].to_vec(),
            },
        })
    };
    Ok((members, range))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableTruth {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_fraction: Option<f64>,
    pub missing_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmTruth {
    pub j: String,
    pub k: String,
    pub pattern: JmPattern,
    pub target_p_j: f64,
    pub target_p_k: f64,
    pub target_p_jk: f64,
    pub missing_j: usize,
    pub missing_k: usize,
    pub joint_count: usize,
    /// Achieved minus target fractions, from rounding to whole items.
    pub residual_p_j: f64,
    pub residual_p_k: f64,
    pub residual_p_jk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmTruth {
    pub j: String,
    pub k: String,
    pub range_type: RangeType,
    pub condition_range: Option<ConditionRange>,
    pub strength: f64,
    pub target_am_j: f64,
    pub missing_count: usize,
    /// Missing items of `j` whose `k` value lies in the condition range.
    pub in_range_count: usize,
    /// Items of `k` inside the condition range.
    pub range_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub seed: u64,
    pub mode: GenerationMode,
    pub item_count: usize,
    pub variables: Vec<VariableTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jm_pairs: Vec<JmTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cm_pairs: Vec<CmTruth>,
}

impl GroundTruthManifest {
    fn new(d: &IncompleteDataset, seed: u64, mode: GenerationMode) -> Self {
        Self {
            seed,
            mode,
            item_count: d.item_count(),
            variables: Vec::new(),
            jm_pairs: Vec::new(),
            cm_pairs: Vec::new(),
        }
    }

    fn finish(mut self, out: &IncompleteDataset, targets: &BTreeMap<usize, f64>) -> Self {
        self.variables = out
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| VariableTruth {
                name: v.name().to_string(),
                target_fraction: targets.get(&i).copied(),
                missing_count: v.missing_count(),
            })
            .collect();
        self
    }
}

/// Runs the procedure selected by `spec.mode`.
pub fn generate(
    complete: &IncompleteDataset,
    spec: &MissingnessSpec,
) -> Result<(IncompleteDataset, GroundTruthManifest)> {
    match spec.require_mode()? {
        GenerationMode::Am => inject_am(complete, spec),
        GenerationMode::Jm => inject_jm(complete, spec),
        GenerationMode::Cm => inject_cm(complete, spec),
    }
}

fn rng_for(spec: &MissingnessSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &[usize], amount: usize, universe: usize) -> ItemSet {
    ItemSet::from_indices(
        universe,
        sample(rng, pool.len(), amount).into_iter().map(|i| pool[i]),
    )
}

fn require_complete(d: &IncompleteDataset, vars: &[usize]) -> Result<()> {
    let missing: usize = vars.iter().map(|&v| d.variables()[v].missing_count()).sum();
    if missing > 0 {
        return Err(Error::NotComplete(missing));
    }
    Ok(())
}

/// Masks `round(N·target)` uniformly chosen items per variable. The whole
/// input must be complete.
pub fn inject_am(
    complete: &IncompleteDataset,
    spec: &MissingnessSpec,
) -> Result<(IncompleteDataset, GroundTruthManifest)> {
    let mut spec = spec.clone();
    spec.mode = Some(GenerationMode::Am);
    spec.validate(complete)?;
    if !complete.is_complete() {
        return Err(Error::NotComplete(complete.total_missing()));
    }
    let mut rng = rng_for(&spec);
    let n = complete.item_count();
    let all: Vec<usize> = (0..n).collect();

    let targets: BTreeMap<usize, f64> = match &spec.am_targets {
        AmTargets::Range([lo, hi]) => (0..complete.variable_count())
            .map(|j| (j, if lo == hi { *lo } else { rng.random_range(*lo..=*hi) }))
            .collect(),
        AmTargets::PerVariable(map) => map
            .iter()
            .map(|(name, v)| Ok((complete.require_index(name)?, *v)))
            .collect::<Result<_>>()?,
    };

    let mut out = complete.clone();
    for (&j, &target) in &targets {
        let items = random_subset(&mut rng, &all, round_count(n, target), n);
        out = out.with_missing(j, &items)?;
    }
    let out = out.with_name(format!("{}_am", complete.name()));
    let manifest = GroundTruthManifest::new(complete, spec.seed, GenerationMode::Am).finish(&out, &targets);
    Ok((out, manifest))
}

fn resolve_p_jk(pair: &JmPairSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let expected = pair.p_j * pair.p_k;
    let lower = (pair.p_j + pair.p_k - 1.0).max(0.0);
    let upper = pair.p_j.min(pair.p_k);
    match (pair.p_jk, pair.pattern) {
        (Some(p), JmPattern::Equal) => {
            if round_count(n, p) != round_count(n, expected) {
                return Err(Error::Infeasible(format!(
                    "pattern `equal` needs p_jk ≈ p_j·p_k = {expected}, got {p}"
                )));
            }
            Ok(p)
        }
        (Some(p), JmPattern::Above) if p <= expected => Err(Error::Infeasible(format!(
            "pattern `above` needs p_jk > p_j·p_k = {expected}, got {p}"
        ))),
        (Some(p), JmPattern::Below) if p >= expected => Err(Error::Infeasible(format!(
            "pattern `below` needs p_jk < p_j·p_k = {expected}, got {p}"
        ))),
        (Some(p), _) => Ok(p),
        (None, JmPattern::Equal) => Ok(expected),
        (None, JmPattern::Above) if upper > expected => Ok(rng.random_range(expected..upper)
            .max(expected + f64::EPSILON)
            .min(upper)),
        (None, JmPattern::Below) if expected > lower => Ok(rng.random_range(lower..expected)),
        (None, pattern) => Err(Error::Infeasible(format!(
            "no joint fraction for pattern `{pattern:?}` between {lower} and {upper} around {expected}"
        ))),
    }
}

fn check_frechet(p_j: f64, p_k: f64, p_jk: f64) -> Result<()> {
    let upper = p_j.min(p_k);
    if p_jk > upper + 1e-12 {
        return Err(Error::Infeasible(format!(
            "upper Fréchet bound: p_jk = {p_jk} > min(p_j, p_k) = {upper}"
        )));
    }
    let union = p_j + p_k - p_jk;
    if union > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "lower Fréchet bound: p_j + p_k - p_jk = {union} > 1"
        )));
    }
    Ok(())
}

/// Per pair: `round(N·p_jk)` items missing in both, then the remainders of
/// `round(N·p_j)` and `round(N·p_k)` on disjoint further items.
pub fn inject_jm(
    complete: &IncompleteDataset,
    spec: &MissingnessSpec,
) -> Result<(IncompleteDataset, GroundTruthManifest)> {
    let mut spec = spec.clone();
    spec.mode = Some(GenerationMode::Jm);
    spec.validate(complete)?;
    let n = complete.item_count();
    let mut rng = rng_for(&spec);
    let mut out = complete.clone();
    let mut manifest = GroundTruthManifest::new(complete, spec.seed, GenerationMode::Jm);
    let mut targets = BTreeMap::new();
    let all: Vec<usize> = (0..n).collect();

    for pair in &spec.jm_pairs {
        let (j, k) = (pair.j.resolve(complete)?, pair.k.resolve(complete)?);
        require_complete(complete, &[j, k])?;
        let p_jk = resolve_p_jk(pair, n, &mut rng)?;
        check_frechet(pair.p_j, pair.p_k, p_jk)?;
        let (mj, mk, joint) = (round_count(n, pair.p_j), round_count(n, pair.p_k), round_count(n, p_jk));
        if joint > mj.min(mk) {
            return Err(Error::Infeasible(format!(
                "upper Fréchet bound after rounding: {joint} joint > min({mj}, {mk})"
            )));
        }
        if mj + mk - joint > n {
            return Err(Error::Infeasible(format!(
                "lower Fréchet bound after rounding: {mj} + {mk} - {joint} > N = {n}"
            )));
        }

        let chosen: Vec<usize> = sample(&mut rng, n, mj + mk - joint)
            .into_iter()
            .map(|i| all[i])
            .collect();
        let both = &chosen[..joint];
        let only_j = &chosen[joint..mj];
        let only_k = &chosen[mj..];
        let set_j = ItemSet::from_indices(n, both.iter().chain(only_j).copied());
        let set_k = ItemSet::from_indices(n, both.iter().chain(only_k).copied());
        out = out.with_missing(j, &set_j)?.with_missing(k, &set_k)?;
        targets.insert(j, pair.p_j);
        targets.insert(k, pair.p_k);

        let nf = n as f64;
        manifest.jm_pairs.push(JmTruth {
            j: complete.variables()[j].name().to_string(),
            k: complete.variables()[k].name().to_string(),
            pattern: pair.pattern,
            target_p_j: pair.p_j,
            target_p_k: pair.p_k,
            target_p_jk: p_jk,
            missing_j: mj,
            missing_k: mk,
            joint_count: joint,
            residual_p_j: mj as f64 / nf - pair.p_j,
            residual_p_k: mk as f64 / nf - pair.p_k,
            residual_p_jk: joint as f64 / nf - p_jk,
        });
    }
    let out = out.with_name(format!("{}_jm", complete.name()));
    Ok((out.clone(), manifest.finish(&out, &targets)))
}

/// Per pair: `m = round(N·am_j)` items of `j` masked, `round(m·strength)` of
/// them among items whose `k` value lies in the condition range and the rest
/// among items outside it. `k` is never masked.
pub fn inject_cm(
    complete: &IncompleteDataset,
    spec: &MissingnessSpec,
) -> Result<(IncompleteDataset, GroundTruthManifest)> {
    let mut spec = spec.clone();
    spec.mode = Some(GenerationMode::Cm);
    spec.validate(complete)?;
    let n = complete.item_count();
    let mut rng = rng_for(&spec);
    let mut out = complete.clone();
    let mut manifest = GroundTruthManifest::new(complete, spec.seed, GenerationMode::Cm);
    let mut targets = BTreeMap::new();

    for pair in &spec.cm_pairs {
        let (j, k) = (pair.j.resolve(complete)?, pair.k.resolve(complete)?);
        require_complete(complete, &[j, k])?;
        let (members, range) = condition_range(complete, k, pair.range_type)?;
        let strength = pair.strength.fraction();
        let m = round_count(n, pair.am_j);
        let inside = round_count(m, strength);
        let outside = m - inside;

        let pool_in: Vec<usize> = members.iter().collect();
        let pool_out: Vec<usize> = members.complement().iter().collect();
        let (jn, kn) = (complete.variables()[j].name(), complete.variables()[k].name());
        if pool_in.len() < inside {
            return Err(Error::Infeasible(format!(
                "condition range of `{kn}` holds {} items, {inside} needed inside for `{jn}`",
                pool_in.len()
            )));
        }
        if pool_out.len() < outside {
            return Err(Error::Infeasible(format!(
                "only {} items of `{kn}` lie outside the condition range, {outside} needed for `{jn}`",
                pool_out.len()
            )));
        }
        let chosen = random_subset(&mut rng, &pool_in, inside, n)
            .union(&random_subset(&mut rng, &pool_out, outside, n));
        out = out.with_missing(j, &chosen)?;
        targets.insert(j, pair.am_j);
        targets.insert(k, 0.0);

        manifest.cm_pairs.push(CmTruth {
            j: jn.to_string(),
            k: kn.to_string(),
            range_type: pair.range_type,
            condition_range: range,
            strength,
            target_am_j: pair.am_j,
            missing_count: m,
            in_range_count: inside,
            range_size: pool_in.len(),
        });
    }
    let out = out.with_name(format!("{}_cm", complete.name()));
    Ok((out.clone(), manifest.finish(&out, &targets)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableColumn;

    fn complete(n: usize, k: usize) -> IncompleteDataset {
        let cols = (0..k)
            .map(|j| {
                VariableColumn::complete(format!("v{j}"), (0..n).map(|i| ((i * (j + 3)) % 17) as f64).collect())
                    .unwrap()
            })
            .collect();
        IncompleteDataset::new("base", cols).unwrap()
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_count(100, 0.3), 30);
        assert_eq!(round_count(3, 0.5), 2);
        assert_eq!(round_count(116, 0.26), 30);
        assert_eq!(round_count(116, 0.383), 44);
        assert_eq!(round_count(10, 0.0), 0);
    }

    #[test]
    fn am_zero_targets_is_identity() {
        let d = complete(50, 4);
        let mut spec = MissingnessSpec::new(GenerationMode::Am, 1);
        spec.am_targets = AmTargets::Range([0.0, 0.0]);
        let (out, manifest) = inject_am(&d, &spec).unwrap();
        assert_eq!(out.clone().with_name("base"), d);
        assert!(manifest.variables.iter().all(|v| v.missing_count == 0));
    }

    #[test]
    fn am_exact_count() {
        let d = complete(100, 3);
        let mut spec = MissingnessSpec::new(GenerationMode::Am, 9);
        spec.am_targets = AmTargets::PerVariable([("v1".to_string(), 0.3)].into());
        let (out, manifest) = inject_am(&d, &spec).unwrap();
        assert_eq!(out.variable(1).unwrap().missing_count(), 30);
        assert_eq!(out.variable(0).unwrap().missing_count(), 0);
        assert_eq!(manifest.variables[1].target_fraction, Some(0.3));
    }

    #[test]
    fn am_rejects_incomplete_input() {
        let d = complete(10, 2);
        let d = d.with_missing(0, &ItemSet::from_indices(10, [3])).unwrap();
        let spec = MissingnessSpec::new(GenerationMode::Am, 1);
        assert!(matches!(inject_am(&d, &spec), Err(Error::NotComplete(1))));
    }

    #[test]
    fn jm_infeasible_triple() {
        let d = complete(100, 2);
        let mut spec = MissingnessSpec::new(GenerationMode::Jm, 1);
        spec.jm_pairs.push(JmPairSpec {
            j: "v0".into(),
            k: "v1".into(),
            p_j: 0.6,
            p_k: 0.6,
            pattern: JmPattern::Below,
            p_jk: Some(0.1),
        });
        let err = inject_jm(&d, &spec).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Feasibility);
        assert!(err.to_string().contains("lower Fréchet bound"), "{err}");

        spec.jm_pairs[0].p_jk = Some(0.7);
        spec.jm_pairs[0].pattern = JmPattern::Above;
        assert!(inject_jm(&d, &spec).unwrap_err().to_string().contains("upper Fréchet bound"));
    }

    #[test]
    fn jm_pattern_mismatch_rejected() {
        let d = complete(100, 2);
        let mut spec = MissingnessSpec::new(GenerationMode::Jm, 1);
        spec.jm_pairs.push(JmPairSpec {
            j: VariableRef::Index(0),
            k: VariableRef::Index(1),
            p_j: 0.4,
            p_k: 0.4,
            pattern: JmPattern::Above,
            p_jk: Some(0.1),
        });
        assert!(matches!(inject_jm(&d, &spec), Err(Error::Infeasible(_))));
    }

    #[test]
    fn jm_drawn_joint_respects_pattern() {
        let d = complete(200, 4);
        for (pattern, seed) in [(JmPattern::Above, 3), (JmPattern::Below, 4), (JmPattern::Equal, 5)] {
            let mut spec = MissingnessSpec::new(GenerationMode::Jm, seed);
            spec.jm_pairs.push(JmPairSpec {
                j: "v0".into(),
                k: "v2".into(),
                p_j: 0.4,
                p_k: 0.5,
                pattern,
                p_jk: None,
            });
            let (out, manifest) = inject_jm(&d, &spec).unwrap();
            let t = &manifest.jm_pairs[0];
            match pattern {
                JmPattern::Above => assert!(t.target_p_jk > 0.2),
                JmPattern::Below => assert!(t.target_p_jk < 0.2),
                JmPattern::Equal => assert_eq!(t.target_p_jk, 0.2),
            }
            let joint = out
                .variable(0)
                .unwrap()
                .missing_set()
                .intersection_len(out.variable(2).unwrap().missing_set());
            assert_eq!(joint, t.joint_count);
            assert_eq!(out.variable(1).unwrap().missing_count(), 0);
        }
    }

    #[test]
    fn overlapping_pairs_rejected() {
        let d = complete(20, 3);
        let mut spec = MissingnessSpec::new(GenerationMode::Cm, 1);
        for (j, k) in [("v0", "v1"), ("v1", "v2")] {
            spec.cm_pairs.push(CmPairSpec {
                j: j.into(),
                k: k.into(),
                am_j: 0.1,
                range_type: RangeType::Low,
                strength: Strength::Level(StrengthLevel::Low),
            });
        }
        let err = inject_cm(&d, &spec).unwrap_err();
        assert!(err.to_string().contains("more than one pair"), "{err}");
    }

    #[test]
    fn binary_low_range_is_single_value() {
        let values: Vec<f64> = (0..116).map(|i| if i % 9 < 4 { 1.0 } else { 2.0 }).collect();
        let ones = values.iter().filter(|&&v| v == 1.0).count();
        assert!(ones > 39);
        let d = IncompleteDataset::new(
            "t",
            vec![VariableColumn::complete("Classification", values).unwrap()],
        )
        .unwrap();
        let (members, range) = condition_range(&d, 0, RangeType::Low).unwrap();
        assert_eq!(range, Some(ConditionRange::Numeric { min: 1.0, max: 1.0 }));
        assert_eq!(members.len(), ones);
        let (high, range) = condition_range(&d, 0, RangeType::High).unwrap();
        assert!(high.is_empty());
        assert_eq!(range, None);
    }

    #[test]
    fn tertiles_of_distinct_values() {
        let d = IncompleteDataset::new(
            "t",
            vec![VariableColumn::complete("x", (1..=9).map(f64::from).collect()).unwrap()],
        )
        .unwrap();
        let expect = [
            (RangeType::Low, 1.0, 3.0),
            (RangeType::Medium, 4.0, 6.0),
            (RangeType::High, 7.0, 9.0),
        ];
        for (t, lo, hi) in expect {
            let (members, range) = condition_range(&d, 0, t).unwrap();
            assert_eq!(members.len(), 3);
            assert_eq!(range, Some(ConditionRange::Numeric { min: lo, max: hi }));
        }
    }

    #[test]
    fn categorical_tertiles_follow_label_order() {
        let labels = ["b", "a", "c", "a", "b", "c"];
        let d = IncompleteDataset::new(
            "t",
            vec![VariableColumn::categorical(
                "c",
                labels.iter().map(|s| Some(s.to_string())).collect(),
            )],
        )
        .unwrap();
        let (members, range) = condition_range(&d, 0, RangeType::Low).unwrap();
        assert_eq!(members.to_vec(), vec![1, 3]);
        assert_eq!(range, Some(ConditionRange::Categorical { labels: vec!["a".into()] }));
    }

    #[test]
    fn full_strength_puts_everything_in_range() {
        let d = complete(100, 2);
        let mut spec = MissingnessSpec::new(GenerationMode::Cm, 11);
        spec.cm_pairs.push(CmPairSpec {
            j: "v0".into(),
            k: "v1".into(),
            am_j: 0.1,
            range_type: RangeType::Medium,
            strength: Strength::Fraction(1.0),
        });
        let (out, manifest) = inject_cm(&d, &spec).unwrap();
        let range = manifest.cm_pairs[0].condition_range.clone().unwrap();
        let j = out.variable(0).unwrap();
        let k = out.variable(1).unwrap();
        assert_eq!(j.missing_count(), 10);
        assert_eq!(k.missing_count(), 0);
        assert!(j.missing_set().iter().all(|i| range.contains(k.cell(i))));
    }

    #[test]
    fn cm_range_too_small() {
        let d = complete(30, 2);
        let mut spec = MissingnessSpec::new(GenerationMode::Cm, 1);
        spec.cm_pairs.push(CmPairSpec {
            j: "v0".into(),
            k: "v1".into(),
            am_j: 0.9,
            range_type: RangeType::Low,
            strength: Strength::Level(StrengthLevel::High),
        });
        assert!(matches!(inject_cm(&d, &spec), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spec_documents_parse() {
        let json = r#"{
            "seed": 7, "mode": "jm",
            "jm_pairs": [{"j": "HOMA", "k": 5, "p_j": 0.26, "p_k": 0.41, "pattern": "equal"}]
        }"#;
        let spec = MissingnessSpec::from_json(json).unwrap();
        assert_eq!(spec.jm_pairs[0].k, VariableRef::Index(5));
        assert_eq!(spec.am_targets, AmTargets::Range([0.0, 0.5]));

        let toml = r#"
            seed = 3
            mode = "cm"
            [[cm_pairs]]
            j = "MCP.1"
            k = "Classification"
            am_j = 0.14
            range_type = "low"
            strength = "medium"
            [[cm_pairs]]
            j = "Age"
            k = "BMI"
            am_j = 0.28
            range_type = "medium"
            strength = 0.3
        "#;
        let spec = MissingnessSpec::from_toml(toml).unwrap();
        assert_eq!(spec.cm_pairs[0].strength.fraction(), 0.6);
        assert_eq!(spec.cm_pairs[1].strength.fraction(), 0.3);
        assert!(MissingnessSpec::from_json("{\"mode\": \"xx\"}").is_err());
    }
}
