//! Reproducible random campaigns over the check catalog.
//!
//! Every trial is addressed by `(dim, rank, trial)` and draws its seed from
//! the master seed alone, so a campaign report does not depend on the number
//! of worker threads, and any trial can be regenerated from its id.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{catalog, definition, CheckOptions, Evaluator, OperandBundle, Outcome, Verdict};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMeta};
use crate::linalg::{ComplexMatrix, Tolerances};
use crate::sampler::{derive_seed, sample_bundle, sample_space_with, SampleConfig, SpectrumLaw};
use crate::space::SemiHilbertSpace;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "semiradius";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub dims: Vec<usize>,
    /// Ranks to sample for every dimension; `None` means `1..=dim`.
    /// Ranks above a dimension are skipped for that dimension.
    pub ranks: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub law: SpectrumLaw,
    /// Standard deviation of operator entries.
    pub scale: f64,
    /// Check ids in catalog order.
    pub checks: Vec<String>,
    pub options: CheckOptions,
    pub tolerances: Tolerances,
    /// A-unit vectors drawn per trial.
    pub vectors: usize,
    /// Use `A = I` instead of sampling the seed matrix; ranks are ignored.
    pub identity_seed: bool,
    /// Replace every sampled operator by zero.
    pub zero_operators: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            ranks: None,
            trials: 100,
            seed: 0,
            law: SpectrumLaw::default(),
            scale: 1.0,
            checks: catalog().iter().map(|d| d.id.to_string()).collect(),
            options: CheckOptions::default(),
            tolerances: Tolerances::default(),
            vectors: 32,
            identity_seed: false,
            zero_operators: false,
        }
    }
}

/// Address of one trial, written `d{dim}-r{rank}-t{trial}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub dim: usize,
    pub rank: usize,
    pub trial: usize,
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}-r{}-t{}", self.dim, self.rank, self.trial)
    }
}

impl FromStr for TrialKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadConfig(format!("malformed trial id {s:?}"));
        let mut parts = s.split('-');
        let mut field = |prefix: char| -> Result<usize> {
            parts
                .next()
                .and_then(|p| p.strip_prefix(prefix))
                .and_then(|p| p.parse().ok())
                .ok_or_else(bad)
        };
        let key = TrialKey {
            dim: field('d')?,
            rank: field('r')?,
            trial: field('t')?,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(key)
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadConfig(msg));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dimensions must be a nonempty list of positive integers".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.checks.is_empty() {
            return bad("no checks selected".into());
        }
        for id in &self.checks {
            definition(id)?;
        }
        if self.keys().is_empty() {
            return bad("no rank is admissible for the selected dimensions".into());
        }
        self.options.radius.validate()?;
        if !(0.0..1.0).contains(&self.tolerances.cutoff) {
            return bad(format!("cutoff {} outside [0, 1)", self.tolerances.cutoff));
        }
        for &dim in &self.dims {
            for rank in self.ranks_for(dim) {
                self.sample_config(TrialKey { dim, rank, trial: 0 }).validate(&self.tolerances)?;
            }
        }
        Ok(())
    }

    fn ranks_for(&self, dim: usize) -> Vec<usize> {
        if self.identity_seed {
            return vec![dim];
        }
        match &self.ranks {
            None => (1..=dim).collect(),
            Some(list) => list.iter().copied().filter(|&r| r <= dim).collect(),
        }
    }

    /// Every trial of the campaign in report order.
    pub fn keys(&self) -> Vec<TrialKey> {
        let mut keys = Vec::new();
        for &dim in &self.dims {
            for rank in self.ranks_for(dim) {
                keys.extend((0..self.trials).map(|trial| TrialKey { dim, rank, trial }));
            }
        }
        keys
    }

    pub fn trial_seed(&self, key: TrialKey) -> u64 {
        derive_seed(self.seed, &[key.dim as u64, key.rank as u64, key.trial as u64])
    }

    fn sample_config(&self, key: TrialKey) -> SampleConfig {
        SampleConfig {
            dim: key.dim,
            rank: key.rank,
            law: self.law,
            scale: self.scale,
            seed: self.trial_seed(key),
        }
    }

    fn check_ids(&self) -> Result<Vec<&'static str>> {
        let mut ids = self.checks.iter().map(|id| definition(id).map(|d| d.id)).collect::<Result<Vec<_>>>()?;
        let order = |id: &&str| catalog().iter().position(|d| d.id == *id);
        ids.sort_by_key(order);
        ids.dedup();
        Ok(ids)
    }

    /// Regenerates the space and operands of one trial.
    pub fn generate(&self, key: TrialKey) -> Result<(SemiHilbertSpace, OperandBundle)> {
        let sc = self.sample_config(key);
        let space = if self.identity_seed {
            SemiHilbertSpace::new(&ComplexMatrix::identity(key.dim, key.dim), self.tolerances)?
        } else {
            sample_space_with(&sc, self.tolerances)?
        };
        let mut bundle = sample_bundle(&space, self.scale, sc.seed, self.vectors)?;
        if self.zero_operators {
            for m in bundle.operators.values_mut() {
                m.fill(crate::linalg::c64(0.0, 0.0));
            }
        }
        Ok((space, bundle))
    }

    /// The instance file of one trial, with the slacks it produced.
    pub fn instance(&self, key: TrialKey) -> Result<Instance> {
        let (space, bundle) = self.generate(key)?;
        let record = evaluate(self, key, &space, &bundle)?;
        let recorded = record
            .checks
            .iter()
            .filter_map(|c| match &c.status {
                Status::Evaluated { slack, .. } => Some((c.id.to_string(), *slack)),
                _ => None,
            })
            .collect();
        Ok(Instance {
            cutoff: self.tolerances.cutoff,
            a: space.a().clone(),
            operators: bundle.operators,
            vectors: bundle.vectors,
            meta: Some(InstanceMeta {
                id: Some(key.to_string()),
                master_seed: Some(self.seed),
                trial_seed: Some(self.trial_seed(key)),
                options: Some(self.options),
                tolerances: Some(self.tolerances),
                recorded,
            }),
        })
    }
}

/// What happened to one check on one trial.
#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Evaluated {
        verdict: Verdict,
        slack: f64,
        tightness: f64,
        relation: String,
    },
    Skipped(String),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialCheck {
    pub id: &'static str,
    pub status: Status,
}

/// `lhs <= rhs` observed on one trial, where both sides are bounds for
/// the same quantity and `lhs` is claimed to be the sharper one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominanceSample {
    pub name: &'static str,
    /// `rhs.hi - lhs.lo`; negative only when the claim fails.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub key: TrialKey,
    pub checks: Vec<TrialCheck>,
    pub dominance: Vec<DominanceSample>,
}

pub const DOMINANCE: [(&str, &str); 2] = [
    ("C13 middle <= outer", "the middle bound of C13 never exceeds its outer bound"),
    ("C21 rhs <= C5 rhs", "the right-hand side of C21 never exceeds that of C5"),
];

fn dominance(name: &'static str, lhs: Enclosure, rhs: Enclosure, opts: &CheckOptions) -> DominanceSample {
    let margin = rhs.hi - lhs.lo;
    DominanceSample {
        name,
        margin,
        holds: margin >= -opts.cert_floor * (1.0 + rhs.hi.abs()),
    }
}

fn status(result: Result<crate::catalog::CheckResult>) -> Status {
    match result {
        Ok(r) => {
            let relation = r
                .relations
                .iter()
                .min_by(|a, b| a.slack.total_cmp(&b.slack))
                .map(|rel| rel.label.clone())
                .unwrap_or_default();
            Status::Evaluated {
                verdict: r.verdict,
                slack: r.slack,
                tightness: r.tightness,
                relation,
            }
        }
        Err(Error::PreconditionFailed(why)) => Status::Skipped(why),
        Err(e) => Status::Failed(e.to_string()),
    }
}

fn evaluate(config: &CampaignConfig, key: TrialKey, space: &SemiHilbertSpace, bundle: &OperandBundle) -> Result<TrialRecord> {
    let ids = config.check_ids()?;
    let opts = &config.options;
    let mut eval = Evaluator::new(space, bundle, opts)?;
    let checks = ids
        .iter()
        .map(|&id| TrialCheck {
            id,
            status: status(eval.run(id)),
        })
        .collect();
    let mut dom = Vec::new();
    if ids.contains(&"C13") {
        if let Ok((mid, outer)) = eval.c13_bounds() {
            dom.push(dominance(DOMINANCE[0].0, mid, outer, opts));
        }
    }
    if ids.contains(&"C5") && ids.contains(&"C21") {
        if let (Ok(refined), Ok(plain)) = (eval.c21_rhs(), eval.c5_bound()) {
            dom.push(dominance(DOMINANCE[1].0, refined, plain, opts));
        }
    }
    Ok(TrialRecord {
        key,
        checks,
        dominance: dom,
    })
}

/// Generates and evaluates one trial.
pub fn run_trial(config: &CampaignConfig, key: TrialKey) -> Result<TrialRecord> {
    let (space, bundle) = config.generate(key)?;
    evaluate(config, key, &space, &bundle)
}

/// Runs every trial on a pool of `threads` workers (0 picks the machine
/// default). Records come back in [`CampaignConfig::keys`] order.
pub fn run_trials(config: &CampaignConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::BadConfig(format!("cannot start worker pool: {e}")))?;
    let keys = config.keys();
    pool.install(|| keys.par_iter().map(|&key| run_trial(config, key)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckAggregate {
    pub id: String,
    pub title: String,
    pub trials: usize,
    pub pass_certified: usize,
    pub pass_uncertified: usize,
    pub violations: usize,
    pub diagnostics: usize,
    /// Trials whose operands did not meet the check's hypotheses.
    pub skipped: usize,
    pub errors: usize,
    pub min_slack: Option<f64>,
    pub median_slack: Option<f64>,
    pub max_tightness: Option<f64>,
    pub argmin_instance: Option<String>,
    pub argmin_relation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceAggregate {
    pub name: String,
    pub statement: String,
    pub trials: usize,
    pub holds: usize,
    pub failures: usize,
    pub min_margin: Option<f64>,
    pub argmin_instance: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Totals {
    pub trials: usize,
    pub evaluations: usize,
    pub pass_certified: usize,
    pub pass_uncertified: usize,
    pub violations: usize,
    pub diagnostics: usize,
    pub skipped: usize,
    pub errors: usize,
    /// Uncertified share of all pass/fail verdicts.
    pub uncertified_rate: f64,
    pub dominance_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Runtime {
    pub wall_time_s: f64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub master_seed: u64,
    pub config: CampaignConfig,
    pub totals: Totals,
    pub checks: Vec<CheckAggregate>,
    pub dominance: Vec<DominanceAggregate>,
    pub runtime: Runtime,
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

fn aggregate_check(id: &'static str, records: &[TrialRecord]) -> CheckAggregate {
    let mut agg = CheckAggregate {
        id: id.to_string(),
        title: definition(id).map(|d| d.title.to_string()).unwrap_or_default(),
        trials: 0,
        pass_certified: 0,
        pass_uncertified: 0,
        violations: 0,
        diagnostics: 0,
        skipped: 0,
        errors: 0,
        min_slack: None,
        median_slack: None,
        max_tightness: None,
        argmin_instance: None,
        argmin_relation: None,
    };
    let mut slacks = Vec::new();
    for rec in records {
        let Some(check) = rec.checks.iter().find(|c| c.id == id) else {
            continue;
        };
        agg.trials += 1;
        match &check.status {
            Status::Evaluated {
                verdict,
                slack,
                tightness,
                relation,
            } => {
                match verdict {
                    Verdict::PassCertified => agg.pass_certified += 1,
                    Verdict::PassUncertified => agg.pass_uncertified += 1,
                    Verdict::ViolationCandidate => agg.violations += 1,
                    Verdict::Diagnostic => agg.diagnostics += 1,
                }
                slacks.push(*slack);
                if agg.min_slack.is_none_or(|m| *slack < m) {
                    agg.min_slack = Some(*slack);
                    agg.argmin_instance = Some(rec.key.to_string());
                    agg.argmin_relation = Some(relation.clone());
                }
                agg.max_tightness = Some(agg.max_tightness.map_or(*tightness, |t: f64| t.max(*tightness)));
            }
            Status::Skipped(_) => agg.skipped += 1,
            Status::Failed(_) => agg.errors += 1,
        }
    }
    slacks.sort_by(f64::total_cmp);
    agg.median_slack = median(&slacks);
    agg
}

fn aggregate_dominance(name: &'static str, statement: &str, records: &[TrialRecord]) -> Option<DominanceAggregate> {
    let mut agg = DominanceAggregate {
        name: name.to_string(),
        statement: statement.to_string(),
        trials: 0,
        holds: 0,
        failures: 0,
        min_margin: None,
        argmin_instance: None,
    };
    for rec in records {
        for s in rec.dominance.iter().filter(|s| s.name == name) {
            agg.trials += 1;
            if s.holds {
                agg.holds += 1;
            } else {
                agg.failures += 1;
            }
            if agg.min_margin.is_none_or(|m| s.margin < m) {
                agg.min_margin = Some(s.margin);
                agg.argmin_instance = Some(rec.key.to_string());
            }
        }
    }
    (agg.trials > 0).then_some(agg)
}

impl CampaignReport {
    /// Aggregates trial records in the fixed order of the catalog.
    pub fn from_records(config: &CampaignConfig, records: &[TrialRecord], runtime: Runtime) -> Result<Self> {
        let checks: Vec<CheckAggregate> = config.check_ids()?.into_iter().map(|id| aggregate_check(id, records)).collect();
        let dominance: Vec<DominanceAggregate> = DOMINANCE
            .iter()
            .filter_map(|(name, statement)| aggregate_dominance(name, statement, records))
            .collect();
        let mut totals = Totals {
            trials: records.len(),
            ..Totals::default()
        };
        for c in &checks {
            totals.evaluations += c.trials;
            totals.pass_certified += c.pass_certified;
            totals.pass_uncertified += c.pass_uncertified;
            totals.violations += c.violations;
            totals.diagnostics += c.diagnostics;
            totals.skipped += c.skipped;
            totals.errors += c.errors;
        }
        let decided = totals.pass_certified + totals.pass_uncertified + totals.violations;
        totals.uncertified_rate = if decided == 0 {
            0.0
        } else {
            totals.pass_uncertified as f64 / decided as f64
        };
        totals.dominance_failures = dominance.iter().map(|d| d.failures).sum();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            master_seed: config.seed,
            config: config.clone(),
            totals,
            checks,
            dominance,
            runtime,
        })
    }

    pub fn check(&self, id: &str) -> Option<&CheckAggregate> {
        self.checks.iter().find(|c| c.id.eq_ignore_ascii_case(id))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    /// The report without its runtime section. Identical for identical
    /// configurations whatever the thread count.
    pub fn payload_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("reports serialize");
        if let Some(map) = value.as_object_mut() {
            map.remove("runtime");
        }
        serde_json::to_string_pretty(&value).expect("values serialize") + "\n"
    }

    /// Parses a report and checks its schema version and count invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let report: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                line: inner.line(),
                column: inner.column(),
                field: (path != ".").then_some(path),
                message: inner.to_string(),
            }
        })?;
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadConfig(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {}", self.schema_version));
        }
        for c in &self.checks {
            let counted = c.pass_certified + c.pass_uncertified + c.violations + c.diagnostics + c.skipped + c.errors;
            if counted != c.trials {
                return bad(format!("{}: verdict counts sum to {counted}, expected {}", c.id, c.trials));
            }
            if c.trials > c.skipped + c.errors && c.min_slack.is_none() {
                return bad(format!("{}: evaluated trials without slack statistics", c.id));
            }
        }
        for d in &self.dominance {
            if d.holds + d.failures != d.trials {
                return bad(format!("{}: counts do not add up", d.name));
            }
        }
        Ok(())
    }

    /// Per-check aggregates as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(c).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// 3 with violation candidates, 2 with uncertified verdicts, 1 with
    /// evaluation errors or failed dominance relations, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        let t = &self.totals;
        if t.violations > 0 {
            3
        } else if t.pass_uncertified > 0 {
            2
        } else if t.errors > 0 || t.dominance_failures > 0 {
            1
        } else {
            0
        }
    }
}

/// Runs a campaign and aggregates its report.
pub fn run_campaign(config: &CampaignConfig, threads: usize) -> Result<CampaignReport> {
    let start = Instant::now();
    let records = run_trials(config, threads)?;
    let used = if threads == 0 { rayon::current_num_threads() } else { threads };
    let runtime = Runtime {
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: used,
    };
    CampaignReport::from_records(config, &records, runtime)
}

/// Writes the trial attaining each check's minimum slack to
/// `dir/{check}_{trial}.json` and returns the paths in check order.
pub fn save_extremes(config: &CampaignConfig, report: &CampaignReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut cache: BTreeMap<String, Instance> = BTreeMap::new();
    let mut paths = Vec::new();
    for c in &report.checks {
        let Some(id) = &c.argmin_instance else {
            continue;
        };
        if !cache.contains_key(id) {
            cache.insert(id.clone(), config.instance(id.parse()?)?);
        }
        let path = dir.join(format!("{}_{id}.json", c.id));
        cache[id].write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Re-evaluates every check on a stored instance with the options it was
/// saved with. Operands that are not admissible fail the whole file.
pub fn verify_instance(path: &Path) -> Result<Vec<Outcome>> {
    verify(&Instance::read(path)?)
}

pub fn verify(instance: &Instance) -> Result<Vec<Outcome>> {
    let space = instance.space()?;
    let outcomes = crate::catalog::run_all(&space, &instance.bundle(), &instance.options())?;
    if let Some(err) = outcomes.iter().find_map(|o| match &o.result {
        Err(e @ Error::MembershipViolated { .. }) => Some(e.clone()),
        _ => None,
    }) {
        return Err(err);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CampaignConfig {
        CampaignConfig {
            dims: vec![2, 3],
            trials: 2,
            seed: 5,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn trial_keys_round_trip() {
        let key = TrialKey { dim: 4, rank: 0, trial: 17 };
        assert_eq!(key.to_string(), "d4-r0-t17");
        assert_eq!("d4-r0-t17".parse::<TrialKey>().unwrap(), key);
        for bad in ["d4-r0", "d4-r0-t1-x", "x4-r0-t1", "d4-rx-t1"] {
            assert!(bad.parse::<TrialKey>().is_err(), "{bad}");
        }
    }

    #[test]
    fn keys_follow_dims_then_ranks() {
        let mut c = small();
        assert_eq!(c.keys().len(), (2 + 3) * 2);
        c.ranks = Some(vec![0, 3]);
        let keys: Vec<String> = c.keys().iter().map(|k| k.to_string()).collect();
        assert_eq!(keys, ["d2-r0-t0", "d2-r0-t1", "d3-r0-t0", "d3-r0-t1", "d3-r3-t0", "d3-r3-t1"]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cases = [
            CampaignConfig { dims: vec![], ..small() },
            CampaignConfig { trials: 0, ..small() },
            CampaignConfig { checks: vec!["C99".into()], ..small() },
            CampaignConfig { ranks: Some(vec![5]), ..small() },
            CampaignConfig { scale: -1.0, ..small() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let text = r#"{"dims": [2], "trails": 3}"#;
        assert!(serde_json::from_str::<CampaignConfig>(text).is_err());
    }

    #[test]
    fn identity_seed_with_zero_operators_passes() {
        let config = CampaignConfig {
            dims: vec![2],
            trials: 1,
            seed: 0,
            identity_seed: true,
            zero_operators: true,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&config, 1).unwrap();
        assert_eq!(report.totals.violations, 0);
        assert_eq!(report.totals.pass_uncertified, 0);
        assert_eq!(report.totals.errors, 0);
        assert_eq!(report.exit_code(), 0);
        let parsed = CampaignReport::from_json(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn aggregation_counts_are_consistent() {
        let config = small();
        let records = run_trials(&config, 1).unwrap();
        let report = CampaignReport::from_records(&config, &records, Runtime { wall_time_s: 0.0, threads: 1 }).unwrap();
        report.validate().unwrap();
        assert_eq!(report.totals.trials, config.keys().len());
        assert_eq!(report.checks.len(), 23);
        for c in &report.checks {
            assert_eq!(c.trials, records.len(), "{}", c.id);
        }
        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 24);
        assert!(csv.starts_with("id,title,trials,"));
    }

    #[test]
    fn extremes_replay_their_recorded_slacks() {
        let config = CampaignConfig {
            checks: vec!["C5".into(), "C9".into()],
            ..small()
        };
        let report = run_campaign(&config, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = save_extremes(&config, &report, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        for (path, agg) in paths.iter().zip(&report.checks) {
            let outcomes = verify_instance(path).unwrap();
            let replayed = outcomes.iter().find(|o| o.id == agg.id).unwrap().result.as_ref().unwrap();
            assert!((replayed.slack - agg.min_slack.unwrap()).abs() <= 1e-12);
        }
    }
}
