//! End-to-end orchestration: configuration, the file layout of an output
//! directory, and one function per pipeline step.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{read_dataset, read_designs, write_dataset, write_designs, DatasetRow, DesignRow};
use crate::error::{Error, Result};
use crate::fea::{simulate_design, SimulationSettings};
use crate::model::{DesignVector, FeasibilityLimits, Material, ParamId, ParamValue, N_CONTINUOUS};
use crate::optimizer::{
    evolve, final_sample, validate, write_counterfactuals, Bound, CounterfactualQuery, CounterfactualResult, GaConfig,
    ResolvedTargets, SearchContext,
};
use crate::performance::{PerformanceRecord, Target, TipAngle};
use crate::sampling::{generate_batch_from, Interval, ParameterRanges};
use crate::stability::{tipping_angle, StabilityInput, DEFAULT_TIPPING_FORCE_LBF};
use crate::stats::{gaussian_kde, kde_at, pearson};
use crate::surrogate::{evaluate, split, train, EvaluationReport, SurrogateConfig, SurrogateEnsemble};

pub const DESIGNS_FILE: &str = "designs.csv";
pub const DATASET_FILE: &str = "dataset.csv";
pub const MODEL_FILE: &str = "model.bin";
pub const REPORT_FILE: &str = "r2_report.csv";
pub const COUNTERFACTUALS_FILE: &str = "counterfactuals.csv";
pub const VALIDATION_FILE: &str = "validation_report.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const KDE_FILE: &str = "kde.csv";
pub const CORRELATION_FILE: &str = "correlations.csv";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// Sobol points drawn before the feasibility filter.
    pub n_designs: usize,
    /// First Sobol index used.
    pub sobol_skip: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            n_designs: 9000,
            sobol_skip: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Hypothetical handle force, lbf.
    pub tipping_force: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            tipping_force: DEFAULT_TIPPING_FORCE_LBF,
        }
    }
}

/// A parameter value in config: a number for continuous parameters, a
/// name for materials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigValue {
    Number(f64),
    Name(String),
}

/// Per-parameter search bounds in config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExplorationEntry {
    Interval([f64; 2]),
    Materials(Vec<Material>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Overrides applied to the original walker to form the query design.
    pub query: BTreeMap<String, ConfigValue>,
    pub targets: BTreeMap<Target, Bound>,
    /// Parameters locked to the query's values.
    pub frozen: Vec<String>,
    /// Search bounds; unlisted parameters use the dataset ranges.
    pub exploration: BTreeMap<String, ExplorationEntry>,
    pub allow_unreliable: bool,
    /// Re-simulate every returned design.
    pub validate: bool,
    pub ga: GaConfig,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let generic = CounterfactualQuery::generic(DesignVector::original(), &ParameterRanges::default());
        OptimizeConfig {
            query: BTreeMap::new(),
            targets: generic.targets,
            frozen: Vec::new(),
            exploration: BTreeMap::from([
                ("overall_height".into(), ExplorationEntry::Interval([32.0, 38.0])),
                ("handle_distance".into(), ExplorationEntry::Interval([18.5, 19.5])),
            ]),
            allow_unreliable: false,
            validate: true,
            ga: GaConfig::default(),
        }
    }
}

fn param(field: &str, name: &str) -> Result<ParamId> {
    name.parse()
        .map_err(|_| Error::config(format!("{field}.{name}"), "unknown design parameter"))
}

impl OptimizeConfig {
    pub fn query_design(&self) -> Result<DesignVector> {
        let mut d = DesignVector::original();
        for (name, v) in &self.query {
            let p = param("optimize.query", name)?;
            let value = match (v, p.is_categorical()) {
                (ConfigValue::Number(x), false) => ParamValue::Continuous(*x),
                (ConfigValue::Name(s), true) => ParamValue::Material(
                    s.parse()
                        .map_err(|_| Error::config(format!("optimize.query.{name}"), format!("unknown material `{s}`")))?,
                ),
                _ => return Err(Error::config(format!("optimize.query.{name}"), "value kind does not match parameter")),
            };
            d.set(p, value)?;
        }
        Ok(d)
    }

    pub fn to_query(&self, dataset_ranges: &ParameterRanges) -> Result<CounterfactualQuery> {
        let mut exploration = dataset_ranges.clone();
        for (name, e) in &self.exploration {
            let p = param("optimize.exploration", name)?;
            let field = format!("optimize.exploration.{name}");
            match (e, p.is_categorical()) {
                (ExplorationEntry::Interval([lo, hi]), false) => {
                    if !(lo <= hi) {
                        return Err(Error::config(field, "min must not exceed max"));
                    }
                    exploration.continuous[p.index()] = Interval::from_bounds(*lo, *hi);
                }
                (ExplorationEntry::Materials(m), true) => exploration.materials[p.index() - N_CONTINUOUS] = m.clone(),
                _ => return Err(Error::config(field, "entry kind does not match parameter")),
            }
        }
        let frozen = self
            .frozen
            .iter()
            .map(|n| param("optimize.frozen", n))
            .collect::<Result<Vec<_>>>()?;
        Ok(CounterfactualQuery {
            query_design: self.query_design()?,
            targets: self.targets.clone(),
            frozen,
            exploration,
            allow_unreliable: self.allow_unreliable,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    pub targets: Vec<Target>,
    pub kde_points: usize,
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig {
            targets: vec![Target::Mass, Target::HandleDx, Target::HandleDy, Target::HandleDz, Target::MinSafetyFactor],
            kde_points: 256,
        }
    }
}

/// The whole pipeline's configuration; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    /// Seed for design generation.
    pub seed: u64,
    pub generate: GenerateConfig,
    pub ranges: ParameterRanges,
    pub limits: FeasibilityLimits,
    pub simulation: SimulationSettings,
    pub stability: StabilityConfig,
    pub surrogate: SurrogateConfig,
    pub optimize: OptimizeConfig,
    pub plotdata: PlotConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("walker-forge-out"),
            seed: 0,
            generate: GenerateConfig::default(),
            ranges: ParameterRanges::default(),
            limits: FeasibilityLimits::default(),
            simulation: SimulationSettings::default(),
            stability: StabilityConfig::default(),
            surrogate: SurrogateConfig::default(),
            optimize: OptimizeConfig::default(),
            plotdata: PlotConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { field, message } => Error::config(field, format!("{message} (in {})", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Overrides the generation, surrogate and optimizer seeds at once.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.surrogate.seed = seed;
        self.optimize.ga.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.ranges.validate()?;
        self.surrogate.validate()?;
        self.optimize.ga.validate()?;
        self.optimize.to_query(&self.ranges)?;
        if self.generate.n_designs == 0 {
            return Err(Error::config("generate.n_designs", "must be positive"));
        }
        if !(self.simulation.max_element_length > 0.0) {
            return Err(Error::config("simulation.max_element_length", "must be positive"));
        }
        if !(self.stability.tipping_force > 0.0) {
            return Err(Error::config("stability.tipping_force", "must be positive"));
        }
        for t in &self.plotdata.targets {
            if self.plotdata.targets.iter().filter(|u| *u == t).count() > 1 {
                return Err(Error::config("plotdata.targets", format!("`{t}` listed twice")));
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            limits: self.limits,
            ..self.simulation
        }
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.output_dir.join(file)
    }

    /// Writes the effective configuration next to the outputs.
    pub fn write_resolved(&self) -> Result<()> {
        ensure_dir(&self.output_dir)?;
        let path = self.path(RESOLVED_CONFIG_FILE);
        std::fs::write(&path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "required input is missing; run the previous step first"),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerateSummary {
    pub requested: usize,
    pub dropped: usize,
    pub valid: usize,
}

impl std::fmt::Display for GenerateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "requested={} dropped={} valid={}", self.requested, self.dropped, self.valid)
    }
}

/// Samples `n` designs (or the configured count), filters them and writes `designs.csv`.
pub fn cmd_generate(cfg: &PipelineConfig, n: Option<usize>) -> Result<GenerateSummary> {
    let n = n.unwrap_or(cfg.generate.n_designs);
    let batch = generate_batch_from(n, &cfg.ranges, &cfg.limits, cfg.seed, cfg.generate.sobol_skip)?;
    let rows: Vec<DesignRow> = batch
        .designs
        .iter()
        .enumerate()
        .map(|(i, s)| DesignRow {
            design_id: i as u64,
            sobol_index: s.sobol_index,
            design: s.design,
        })
        .collect();
    ensure_dir(&cfg.output_dir)?;
    write_designs(&cfg.path(DESIGNS_FILE), &rows)?;
    Ok(GenerateSummary {
        requested: batch.requested,
        dropped: batch.dropped_infeasible,
        valid: rows.len(),
    })
}

/// Simulates one design and evaluates its tipping angle.
pub fn simulate_row(row: &DesignRow, settings: &SimulationSettings, tipping_force_lbf: f64) -> DatasetRow {
    let performance = simulate_design(row.design_id, &row.design, settings).and_then(|mut p| {
        let s = StabilityInput::for_design(&row.design, p.mass, tipping_force_lbf);
        p.theta = Some(tipping_angle(&s)?.theta);
        Ok(p)
    });
    let performance = match performance {
        Ok(p) => Some(p),
        Err(e) => {
            log::warn!("{e}");
            None
        }
    };
    DatasetRow {
        design_id: row.design_id,
        sobol_index: row.sobol_index,
        design: row.design,
        performance,
    }
}

/// Simulates every design in parallel; output order follows the input.
pub fn simulate_rows(rows: &[DesignRow], settings: &SimulationSettings, tipping_force_lbf: f64) -> Vec<DatasetRow> {
    rows.par_iter().map(|r| simulate_row(r, settings, tipping_force_lbf)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulateSummary {
    pub total: usize,
    pub simulated: usize,
    pub reused: usize,
    pub failed: usize,
}

impl std::fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "total={} simulated={} reused={} failed={}",
            self.total, self.simulated, self.reused, self.failed
        )
    }
}

/// Simulates `designs.csv` into `dataset.csv`. Rows already present in an
/// existing dataset with the same design are reused unless `force`.
pub fn cmd_simulate(cfg: &PipelineConfig, force: bool) -> Result<SimulateSummary> {
    let designs_path = cfg.path(DESIGNS_FILE);
    require(&designs_path)?;
    let designs = read_designs(&designs_path)?;
    let out = cfg.path(DATASET_FILE);
    let mut done: HashMap<u64, DatasetRow> = HashMap::new();
    if !force && out.is_file() {
        for r in read_dataset(&out)? {
            done.insert(r.design_id, r);
        }
    }
    let settings = cfg.settings();
    let force_lbf = cfg.stability.tipping_force;
    let reusable = |d: &DesignRow| {
        done.get(&d.design_id)
            .filter(|r| r.design == d.design && r.sobol_index == d.sobol_index)
            .copied()
    };
    let rows: Vec<(DatasetRow, bool)> = designs
        .par_iter()
        .map(|d| match reusable(d) {
            Some(r) => (r, true),
            None => (simulate_row(d, &settings, force_lbf), false),
        })
        .collect();
    let reused = rows.iter().filter(|(_, r)| *r).count();
    let rows: Vec<DatasetRow> = rows.into_iter().map(|(r, _)| r).collect();
    write_dataset(&out, &rows)?;
    Ok(SimulateSummary {
        total: rows.len(),
        simulated: rows.len() - reused,
        reused,
        failed: rows.iter().filter(|r| r.performance.is_none()).count(),
    })
}

/// Trains on the configured split, evaluates on the held-out part, and
/// writes the model and the R² report.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<EvaluationReport> {
    let path = cfg.path(DATASET_FILE);
    require(&path)?;
    let rows = read_dataset(&path)?;
    let (tr, te) = split(&rows, cfg.surrogate.test_fraction, cfg.surrogate.seed)?;
    let mut model = train(&tr, &cfg.ranges, &cfg.surrogate)?;
    let report = evaluate(&model, &te)?;
    model.held_out_r2 = Some(std::array::from_fn(|k| report.targets[k].r2));
    model.save(&cfg.path(MODEL_FILE))?;
    report.write_csv(&cfg.path(REPORT_FILE))?;
    Ok(report)
}

/// Re-evaluates a saved model on the configured held-out split.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<EvaluationReport> {
    let path = cfg.path(DATASET_FILE);
    require(&path)?;
    let model_path = cfg.path(MODEL_FILE);
    require(&model_path)?;
    let rows = read_dataset(&path)?;
    let model = SurrogateEnsemble::load(&model_path)?;
    let (_, te) = split(&rows, model.config.test_fraction, model.config.seed)?;
    let report = evaluate(&model, &te)?;
    report.write_csv(&cfg.path(REPORT_FILE))?;
    Ok(report)
}

/// The query design's predicted and simulated performance.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub design: DesignVector,
    pub predicted: PerformanceRecord,
    pub simulated: Option<PerformanceRecord>,
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub baseline: Baseline,
    pub targets: ResolvedTargets,
    pub archive_size: usize,
    pub evaluations: usize,
    pub results: Vec<CounterfactualResult>,
}

/// Runs the counterfactual search on the saved model and writes
/// `counterfactuals.csv` and (when validating) `validation_report.csv`.
pub fn cmd_optimize(cfg: &PipelineConfig) -> Result<OptimizeOutcome> {
    let model_path = cfg.path(MODEL_FILE);
    require(&model_path)?;
    let data_path = cfg.path(DATASET_FILE);
    require(&data_path)?;
    let model = SurrogateEnsemble::load(&model_path)?;
    let rows = read_dataset(&data_path)?;
    let (tr, _) = split(&rows, model.config.test_fraction, model.config.seed)?;
    let manifold: Vec<DesignVector> = tr.iter().map(|r| r.design).collect();
    let query = cfg.optimize.to_query(&cfg.ranges)?;
    let ctx = SearchContext {
        ensemble: &model,
        dataset: &manifold,
        ranges: &cfg.ranges,
        limits: &cfg.limits,
    };
    let archive = evolve(&query, &ctx, &cfg.optimize.ga)?;
    let mut results = final_sample(&archive, &cfg.ranges, &cfg.optimize.ga);
    let baseline = baseline(cfg, &model, query.query_design);
    if cfg.optimize.validate {
        results = validate(&results, &archive.targets, &cfg.settings(), cfg.stability.tipping_force);
        write_validation_report(&cfg.path(VALIDATION_FILE), &baseline, &results)?;
    }
    write_counterfactuals(&cfg.path(COUNTERFACTUALS_FILE), &results)?;
    Ok(OptimizeOutcome {
        baseline,
        targets: archive.targets,
        archive_size: archive.candidates.len(),
        evaluations: archive.evaluations,
        results,
    })
}

fn baseline(cfg: &PipelineConfig, model: &SurrogateEnsemble, d: DesignVector) -> Baseline {
    let row = DesignRow {
        design_id: u64::MAX,
        sobol_index: 0,
        design: d,
    };
    Baseline {
        design: d,
        predicted: model.predict(&d).unwrap_or_else(|_| PerformanceRecord::from_values(&[f64::NAN; Target::COUNT])),
        simulated: simulate_row(&row, &cfg.settings(), cfg.stability.tipping_force).performance,
    }
}

/// Re-simulates the designs in `counterfactuals.csv` and rewrites both
/// result files.
pub fn cmd_validate(cfg: &PipelineConfig) -> Result<Vec<CounterfactualResult>> {
    let path = cfg.path(COUNTERFACTUALS_FILE);
    require(&path)?;
    let model_path = cfg.path(MODEL_FILE);
    require(&model_path)?;
    let model = SurrogateEnsemble::load(&model_path)?;
    let query = cfg.optimize.to_query(&cfg.ranges)?;
    let targets = query.resolve(&model)?;
    let results = read_counterfactual_designs(&path)?
        .into_iter()
        .map(|(design, predicted, objectives)| CounterfactualResult {
            design,
            predicted,
            simulated: None,
            objectives,
            constraint_satisfied: crate::optimizer::constraint_check(&predicted, &targets).satisfied,
            simulated_satisfied: None,
            relative_error: None,
            failure: None,
        })
        .collect::<Vec<_>>();
    let results = validate(&results, &targets, &cfg.settings(), cfg.stability.tipping_force);
    let base = baseline(cfg, &model, query.query_design);
    write_validation_report(&cfg.path(VALIDATION_FILE), &base, &results)?;
    write_counterfactuals(&path, &results)?;
    Ok(results)
}

/// Designs, predictions and objectives from a counterfactuals file.
fn read_counterfactual_designs(path: &Path) -> Result<Vec<(DesignVector, PerformanceRecord, [f64; 3])>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.into(),
            row: 0,
            message: format!("missing column `{name}`"),
        })
    };
    let design_cols = ParamId::ALL.map(|p| col(p.column()));
    let pred_cols = Target::ALL.map(|t| col(&format!("pred_{}", t.column())));
    let status_col = col("pred_tip_status")?;
    let objective_cols = ["gower_to_query", "changed_ratio", "dataset_proximity"].map(col);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |m: String| Error::Parse {
            path: path.into(),
            row: i + 1,
            message: m,
        };
        let num = |c: &Result<usize>| -> Result<f64> {
            let c = *c.as_ref().map_err(|e| bad(e.to_string()))?;
            let s = rec.get(c).unwrap_or("").trim();
            s.parse().map_err(|_| bad(format!("`{s}` is not a number")))
        };
        let mut values = [0.0; N_CONTINUOUS];
        for (k, v) in values.iter_mut().enumerate() {
            *v = num(&design_cols[k])?;
        }
        let mut mats = [Material::Aluminum; 2];
        for (k, m) in mats.iter_mut().enumerate() {
            let c = *design_cols[N_CONTINUOUS + k].as_ref().map_err(|e| bad(e.to_string()))?;
            let s = rec.get(c).unwrap_or("");
            *m = s.parse().map_err(|_| bad(format!("unknown material `{s}`")))?;
        }
        let no_tip = rec.get(status_col).unwrap_or("") == "no_tip";
        let mut p = [0.0; Target::COUNT];
        for (k, v) in p.iter_mut().enumerate() {
            *v = if k == Target::Theta.index() && no_tip { 90.0 } else { num(&pred_cols[k])? };
        }
        let mut pred = PerformanceRecord::from_values(&p);
        if no_tip {
            pred.theta = Some(TipAngle::NoTip);
        }
        let mut objectives = [0.0; 3];
        for (o, c) in objectives.iter_mut().zip(&objective_cols) {
            *o = num(c)?;
        }
        out.push((DesignVector::from_parts(&values, mats), pred, objectives));
    }
    Ok(out)
}

/// Whether `value` is at least as good as `base` for target `t`.
pub fn not_worse(t: Target, value: &PerformanceRecord, base: &PerformanceRecord) -> Option<bool> {
    if t == Target::Theta {
        return Some(value.theta?.stability_cmp(&base.theta?).is_ge());
    }
    let (v, b) = (value.get(t)?, base.get(t)?);
    Some(Bound::better_than(t, b).violation(v, false) == 0.0)
}

fn write_validation_report(path: &Path, base: &Baseline, results: &[CounterfactualResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "design",
        "target",
        "predicted",
        "simulated",
        "relative_error",
        "baseline_simulated",
        "change_vs_baseline",
        "not_worse_than_baseline",
        "satisfies_bound",
    ])
    .map_err(|e| Error::csv(path, e))?;
    let fmt = |v: Option<f64>| v.filter(|x| x.is_finite()).map(|x| x.to_string()).unwrap_or_default();
    let theta_str = |p: Option<&PerformanceRecord>| match p.and_then(|p| p.theta) {
        Some(TipAngle::NoTip) => "no_tip".to_string(),
        Some(TipAngle::Degrees(d)) => d.to_string(),
        None => String::new(),
    };
    let sim_base = base.simulated.as_ref();
    for t in Target::ALL {
        let val = |p: Option<&PerformanceRecord>| if t == Target::Theta { theta_str(p) } else { fmt(p.and_then(|p| p.get(t))) };
        w.write_record([
            "baseline".to_string(),
            t.name().into(),
            val(Some(&base.predicted)),
            val(sim_base),
            String::new(),
            val(sim_base),
            String::new(),
            String::new(),
            String::new(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    for (i, r) in results.iter().enumerate() {
        let sim = r.simulated.as_ref();
        for t in Target::ALL {
            let k = t.index();
            let val = |p: Option<&PerformanceRecord>| if t == Target::Theta { theta_str(p) } else { fmt(p.and_then(|p| p.get(t))) };
            let change = match (sim.and_then(|p| p.get(t)), sim_base.and_then(|p| p.get(t))) {
                (Some(a), Some(b)) if t != Target::Theta => fmt(Some(a - b)),
                _ => String::new(),
            };
            let nw = match (sim, sim_base) {
                (Some(s), Some(b)) => not_worse(t, s, b).map(|x| x.to_string()).unwrap_or_default(),
                _ => String::new(),
            };
            w.write_record([
                format!("cf_{i}"),
                t.name().into(),
                val(Some(&r.predicted)),
                val(sim),
                fmt(r.relative_error.map(|e| e[k])),
                val(sim_base),
                change,
                nw,
                r.simulated_satisfied.map(|s| s[k].to_string()).unwrap_or_default(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Deflection-like targets whose magnitudes are plotted.
fn is_displacement(t: Target) -> bool {
    matches!(t, Target::HandleDx | Target::HandleDy | Target::HandleDz | Target::LegDisplacement)
}

/// Plot value: absolute value for deflections, raw otherwise.
pub fn plot_value(t: Target, p: &PerformanceRecord) -> Option<f64> {
    let v = p.get(t)?;
    Some(if is_displacement(t) { v.abs() } else { v })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSummary {
    pub rows: usize,
    /// Pearson correlation for every ordered pair of selected targets.
    pub correlations: Vec<(Target, Target, Option<f64>)>,
}

/// Writes scatter, KDE and correlation tables for the selected targets.
/// The original design's simulated values appear as marked overlay rows.
pub fn cmd_plotdata(cfg: &PipelineConfig, targets: &[Target]) -> Result<PlotSummary> {
    let targets = if targets.is_empty() { &cfg.plotdata.targets[..] } else { targets };
    let path = cfg.path(DATASET_FILE);
    require(&path)?;
    let rows = read_dataset(&path)?;
    let ok: Vec<(u64, PerformanceRecord)> = rows.iter().filter_map(|r| r.complete().map(|p| (r.design_id, *p))).collect();
    if ok.len() < 2 {
        return Err(Error::InsufficientData {
            usable: ok.len(),
            required: 2,
        });
    }
    let original = simulate_row(
        &DesignRow {
            design_id: u64::MAX,
            sobol_index: 0,
            design: cfg.optimize.query_design()?,
        },
        &cfg.settings(),
        cfg.stability.tipping_force,
    )
    .performance;

    let columns: Vec<Vec<f64>> = targets
        .iter()
        .map(|&t| ok.iter().map(|(_, p)| plot_value(t, p).unwrap_or(f64::NAN)).collect())
        .collect();

    let scatter = cfg.path(SCATTER_FILE);
    let mut w = csv::Writer::from_path(&scatter).map_err(|e| Error::csv(&scatter, e))?;
    let mut header = vec!["design_id".to_string(), "kind".into()];
    header.extend(targets.iter().map(|t| plot_column(*t)));
    w.write_record(&header).map_err(|e| Error::csv(&scatter, e))?;
    for (i, (id, _)) in ok.iter().enumerate() {
        let mut rec = vec![id.to_string(), "dataset".into()];
        rec.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&rec).map_err(|e| Error::csv(&scatter, e))?;
    }
    if let Some(p) = &original {
        let mut rec = vec![String::new(), "original".into()];
        rec.extend(targets.iter().map(|&t| plot_value(t, p).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec).map_err(|e| Error::csv(&scatter, e))?;
    }
    w.flush().map_err(|e| Error::io(&scatter, e))?;

    let kde = cfg.path(KDE_FILE);
    let mut w = csv::Writer::from_path(&kde).map_err(|e| Error::csv(&kde, e))?;
    w.write_record(["target", "kind", "x", "density", "bandwidth"]).map_err(|e| Error::csv(&kde, e))?;
    for (t, col) in targets.iter().zip(&columns) {
        let curve = gaussian_kde(col, cfg.plotdata.kde_points);
        let h = curve.bandwidth.to_string();
        for (x, d) in curve.x.iter().zip(&curve.density) {
            w.write_record([plot_column(*t), "curve".into(), x.to_string(), d.to_string(), h.clone()])
                .map_err(|e| Error::csv(&kde, e))?;
        }
        if let Some(v) = original.as_ref().and_then(|p| plot_value(*t, p)) {
            w.write_record([plot_column(*t), "original".into(), v.to_string(), kde_at(col, curve.bandwidth, v).to_string(), h])
                .map_err(|e| Error::csv(&kde, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&kde, e))?;

    let mut correlations = Vec::new();
    let corr = cfg.path(CORRELATION_FILE);
    let mut w = csv::Writer::from_path(&corr).map_err(|e| Error::csv(&corr, e))?;
    w.write_record(["x", "y", "pearson"]).map_err(|e| Error::csv(&corr, e))?;
    for (i, a) in targets.iter().enumerate() {
        for (j, b) in targets.iter().enumerate() {
            if i == j {
                continue;
            }
            let r = pearson(&columns[i], &columns[j]);
            w.write_record([plot_column(*a), plot_column(*b), r.map(|v| v.to_string()).unwrap_or_default()])
                .map_err(|e| Error::csv(&corr, e))?;
            correlations.push((*a, *b, r));
        }
    }
    w.flush().map_err(|e| Error::io(&corr, e))?;
    Ok(PlotSummary {
        rows: ok.len(),
        correlations,
    })
}

fn plot_column(t: Target) -> String {
    if is_displacement(t) {
        format!("abs_{}", t.column())
    } else {
        t.column().to_string()
    }
}

/// One-shot tipping-angle evaluation in pounds, inches and pound-force.
pub fn cmd_stability(mass_lb: f64, leg_width_in: f64, handle_distance_in: f64, height_in: f64, force_lbf: f64) -> Result<crate::stability::StabilityResult> {
    tipping_angle(&StabilityInput::imperial(mass_lb, leg_width_in, handle_distance_in, height_in, force_lbf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn documented_defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.simulation.loads.handle_down_force, 350.0);
        assert_eq!(cfg.simulation.loads.handle_lateral_force, 17.5);
        assert_eq!(cfg.stability.tipping_force, 400.0);
        let q = cfg.optimize.to_query(&cfg.ranges).unwrap();
        let h = q.exploration.continuous[ParamId::OverallHeight.index()];
        assert_eq!((h.lower, h.upper()), (32.0, 38.0));
        let hd = q.exploration.continuous[ParamId::HandleDistance.index()];
        assert_eq!((hd.lower, hd.upper()), (18.5, 19.5));
        assert_eq!(q.targets[&Target::Mass], Bound::AtMost(6.0));
        assert_eq!(q.query_design, DesignVector::original());
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = PipelineConfig::from_toml("[optimize]\nfrozen = [\"wheel_size\"]\n").unwrap_err();
        assert!(err.to_string().contains("optimize.frozen.wheel_size"), "{err}");
        let err = PipelineConfig::from_toml("[surrogate]\nfolds = 1\n").unwrap_err();
        assert!(err.to_string().contains("surrogate.folds"), "{err}");
        let err = PipelineConfig::from_toml("bogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let err = PipelineConfig::from_toml("[optimize.query]\nframe_material = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("optimize.query.frame_material"), "{err}");
    }

    #[test]
    fn custom_query_and_exploration_parse() {
        let cfg = PipelineConfig::from_toml(
            r#"
[optimize]
frozen = ["handle_distance"]
[optimize.query]
handle_distance = 20.0
frame_material = "Titanium"
[optimize.exploration]
front_crossbeam_material = ["Aluminum", "Titanium"]
[optimize.targets]
theta = { at_least = 4.0 }
"#,
        )
        .unwrap();
        let q = cfg.optimize.to_query(&cfg.ranges).unwrap();
        assert_eq!(q.query_design.handle_distance, 20.0);
        assert_eq!(q.query_design.frame_material, Material::Titanium);
        assert_eq!(q.frozen, vec![ParamId::HandleDistance]);
        assert_eq!(q.exploration.materials[0], vec![Material::Aluminum, Material::Titanium]);
        assert_eq!(q.targets.len(), 1);
    }

    #[test]
    fn seed_override_reaches_every_stage() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_seed(9);
        assert_eq!((cfg.seed, cfg.surrogate.seed, cfg.optimize.ga.seed), (9, 9, 9));
    }

    #[test]
    fn stability_one_shot() {
        let r = cmd_stability(7.5, 22.0, 19.0, 35.0, 400.0).unwrap();
        assert!((r.theta.as_degrees() - 2.792).abs() < 1e-3);
        assert_eq!(cmd_stability(7.5, 22.0, 19.0, 35.0, 0.01).unwrap().theta, TipAngle::NoTip);
    }

    #[test]
    fn not_worse_directions() {
        let base = PerformanceRecord::from_values(&[7.5, 0.1, 0.1, -0.1, 0.2, 3.0, 1.0, 20.0, 3.0]);
        let mut v = base;
        v.mass = 6.0;
        v.handle_dz = -0.05;
        v.min_safety_factor = 2.0;
        assert_eq!(not_worse(Target::Mass, &v, &base), Some(true));
        assert_eq!(not_worse(Target::HandleDz, &v, &base), Some(true));
        assert_eq!(not_worse(Target::MinSafetyFactor, &v, &base), Some(false));
        v.theta = Some(TipAngle::NoTip);
        assert_eq!(not_worse(Target::Theta, &v, &base), Some(true));
    }
}
