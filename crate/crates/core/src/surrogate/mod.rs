//! Stacked-ensemble surrogates for every performance target.
//!
//! Each target gets k-NN, random-forest, gradient-boosting and ridge base
//! learners whose out-of-fold predictions feed a ridge meta-learner. All
//! targets share one encoding, one fold assignment and one split.

pub mod encoding;
pub mod knn;
pub mod linear;
pub mod tree;

use std::io::{BufWriter, Write};

use bincode::Options;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetRow;
use crate::error::{Error, Result};
use crate::model::DesignVector;
use crate::performance::{PerformanceRecord, Target, TipAngle};
use crate::sampling::ParameterRanges;
pub use encoding::{schema_hash, FeatureEncoder, Features, N_FEATURES};
use knn::NeighborIndex;
use linear::Ridge;
pub use tree::{BoostingConfig, ForestConfig, GradientBoosting, RandomForest};
use tree::Binned;

/// Minimum number of usable rows for [`split`].
pub const MIN_USABLE_ROWS: usize = 50;

/// A design with complete simulated performance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledDesign {
    pub design_id: u64,
    pub design: DesignVector,
    pub performance: PerformanceRecord,
}

impl LabeledDesign {
    /// Target value; `NoTip` reads as 90°.
    pub fn value(&self, t: Target) -> f64 {
        self.performance.get(t).unwrap_or(f64::NAN)
    }
}

/// Deterministic disjoint train/test partition of the simulated rows.
pub fn split(rows: &[DatasetRow], test_fraction: f64, seed: u64) -> Result<(Vec<LabeledDesign>, Vec<LabeledDesign>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config("test_fraction", format!("must lie in (0, 1), got {test_fraction}")));
    }
    let usable: Vec<LabeledDesign> = rows
        .iter()
        .filter_map(|r| {
            r.complete().map(|p| LabeledDesign {
                design_id: r.design_id,
                design: r.design,
                performance: *p,
            })
        })
        .collect();
    if usable.len() < MIN_USABLE_ROWS {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            required: MIN_USABLE_ROWS,
        });
    }
    let mut order: Vec<usize> = (0..usable.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((usable.len() as f64 * test_fraction).round() as usize).clamp(1, usable.len() - 1);
    let (test_idx, train_idx) = order.split_at(n_test);
    let pick = |ix: &[usize]| {
        let mut v: Vec<usize> = ix.to_vec();
        v.sort_unstable();
        v.into_iter().map(|i| usable[i]).collect::<Vec<_>>()
    };
    Ok((pick(train_idx), pick(test_idx)))
}

/// 1 − SS_res/SS_tot; constant actuals give 0.
pub fn r_squared(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    if predictions.len() != actuals.len() {
        return Err(Error::DimensionMismatch {
            expected: actuals.len(),
            actual: predictions.len(),
        });
    }
    if actuals.len() < 2 {
        return Err(Error::InsufficientData {
            usable: actuals.len(),
            required: 2,
        });
    }
    let mean = actuals.iter().sum::<f64>() / actuals.len() as f64;
    let ss_tot: f64 = actuals.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(0.0);
    }
    let ss_res: f64 = predictions.iter().zip(actuals).map(|(p, a)| (a - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseLearner {
    Knn,
    RandomForest,
    GradientBoosting,
    Ridge,
}

impl BaseLearner {
    pub const ALL: [BaseLearner; 4] = [
        BaseLearner::Knn,
        BaseLearner::RandomForest,
        BaseLearner::GradientBoosting,
        BaseLearner::Ridge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseLearner::Knn => "knn",
            BaseLearner::RandomForest => "random_forest",
            BaseLearner::GradientBoosting => "gradient_boosting",
            BaseLearner::Ridge => "ridge",
        }
    }
}

/// Which base learners take part in the stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Roster {
    pub knn: bool,
    pub random_forest: bool,
    pub gradient_boosting: bool,
    pub ridge: bool,
}

impl Default for Roster {
    fn default() -> Self {
        Roster {
            knn: true,
            random_forest: true,
            gradient_boosting: true,
            ridge: true,
        }
    }
}

impl Roster {
    pub fn enabled(&self) -> Vec<BaseLearner> {
        BaseLearner::ALL
            .into_iter()
            .filter(|b| match b {
                BaseLearner::Knn => self.knn,
                BaseLearner::RandomForest => self.random_forest,
                BaseLearner::GradientBoosting => self.gradient_boosting,
                BaseLearner::Ridge => self.ridge,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub test_fraction: f64,
    pub seed: u64,
    pub folds: usize,
    pub knn_k: usize,
    pub roster: Roster,
    pub forest: ForestConfig,
    pub boosting: BoostingConfig,
    pub ridge_alpha: f64,
    /// Polynomial degree of the ridge learner's feature map (1 or 2).
    pub ridge_degree: usize,
    pub meta_alpha: f64,
    pub max_bins: usize,
    /// Fit strictly positive targets (mass, safety factor) as logarithms.
    pub log_positive_targets: bool,
    pub reliability_threshold: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            test_fraction: 0.2,
            seed: 0,
            folds: 5,
            knn_k: 5,
            roster: Roster::default(),
            forest: ForestConfig::default(),
            boosting: BoostingConfig::default(),
            ridge_alpha: 1e-3,
            ridge_degree: 2,
            meta_alpha: 1e-6,
            max_bins: 64,
            log_positive_targets: true,
            reliability_threshold: 0.5,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.roster.enabled().is_empty() {
            return Err(Error::config("surrogate.roster", "at least one base learner must be enabled"));
        }
        if self.folds < 2 {
            return Err(Error::config("surrogate.folds", "need at least two folds"));
        }
        if !(1..=2).contains(&self.ridge_degree) {
            return Err(Error::config("surrogate.ridge_degree", "must be 1 or 2"));
        }
        if self.knn_k == 0 {
            return Err(Error::config("surrogate.knn_k", "must be positive"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config("surrogate.test_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    Identity,
    Log,
}

impl Transform {
    fn forward(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.ln(),
        }
    }

    fn inverse(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Base {
    Knn { y: Vec<f64> },
    Forest(RandomForest),
    Boosting(GradientBoosting),
    Ridge { degree: usize, model: Ridge },
}

/// Degree-2 map: the features followed by all pairwise products `x_i·x_j`, `i ≤ j`.
fn expand(x: &[f64], degree: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    if degree >= 2 {
        for i in 0..x.len() {
            for j in i..x.len() {
                out.push(x[i] * x[j]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TargetModel {
    target: Target,
    transform: Transform,
    /// Set for zero-variance targets; the stack is skipped.
    constant: Option<f64>,
    bases: Vec<Base>,
    meta: Ridge,
    /// Largest |prediction − actual| over the training rows, original units.
    train_residual_max: f64,
}

/// The trained surrogate for all targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEnsemble {
    pub encoder: FeatureEncoder,
    pub config: SurrogateConfig,
    pub train_size: usize,
    neighbors: NeighborIndex,
    models: Vec<TargetModel>,
    /// Held-out R² per target, once evaluated.
    pub held_out_r2: Option<[f64; Target::COUNT]>,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fit_base(
    kind: BaseLearner,
    cfg: &SurrogateConfig,
    binned: &Binned,
    y: &[f64],
    rows: &[u32],
    seed: u64,
) -> Base {
    match kind {
        BaseLearner::Knn => Base::Knn { y: rows.iter().map(|&i| y[i as usize]).collect() },
        BaseLearner::RandomForest => Base::Forest(RandomForest::fit(binned, y, rows, &cfg.forest, seed)),
        BaseLearner::GradientBoosting => Base::Boosting(GradientBoosting::fit(binned, y, rows, &cfg.boosting, seed)),
        BaseLearner::Ridge => {
            let x: Vec<Vec<f64>> = rows.iter().map(|&i| expand(&binned.rows[i as usize], cfg.ridge_degree)).collect();
            let ys: Vec<f64> = rows.iter().map(|&i| y[i as usize]).collect();
            Base::Ridge {
                degree: cfg.ridge_degree,
                model: Ridge::fit(&x, &ys, cfg.ridge_alpha),
            }
        }
    }
}

/// `neighbors` are positions within the rows the k-NN base was fit on.
/// `expanded` is `expand(x, 2)`, used by degree-2 ridge learners.
fn predict_base(b: &Base, x: &Features, expanded: &[f64], neighbors: &[usize]) -> f64 {
    match b {
        Base::Knn { y } => knn::average(neighbors, y),
        Base::Forest(f) => f.predict(x),
        Base::Boosting(g) => g.predict(x),
        Base::Ridge { degree: 1, model } => model.predict(x),
        Base::Ridge { model, .. } => model.predict(expanded),
    }
}

fn transform_for(t: Target, y: &[f64], cfg: &SurrogateConfig) -> Transform {
    let positive = matches!(t, Target::Mass | Target::MinSafetyFactor);
    if cfg.log_positive_targets && positive && y.iter().all(|&v| v > 0.0) {
        Transform::Log
    } else {
        Transform::Identity
    }
}

/// Trains one stacked ensemble per target on `train`.
pub fn train(train: &[LabeledDesign], ranges: &ParameterRanges, cfg: &SurrogateConfig) -> Result<SurrogateEnsemble> {
    cfg.validate()?;
    if train.len() < cfg.folds.max(2) {
        return Err(Error::InsufficientData {
            usable: train.len(),
            required: cfg.folds.max(2),
        });
    }
    let encoder = FeatureEncoder::from_ranges(ranges);
    let x: Vec<Features> = train.iter().map(|r| encoder.encode(&r.design)).collect::<Result<_>>()?;
    let n = x.len();
    let binned = Binned::new(x.clone(), cfg.max_bins);
    let roster = cfg.roster.enabled();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(cfg.seed, 0xF01D, 0)));
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % cfg.folds;
    }
    let fold_rows: Vec<Vec<u32>> = (0..cfg.folds)
        .map(|f| (0..n as u32).filter(|&i| fold_of[i as usize] != f).collect())
        .collect();

    // Out-of-fold neighbour lists, shared by every target; positions are
    // within each fold's training rows.
    let oof_neighbors: Vec<Vec<usize>> = if cfg.roster.knn {
        let indices: Vec<NeighborIndex> = fold_rows
            .iter()
            .map(|rows| NeighborIndex::new(rows.iter().map(|&i| x[i as usize]).collect()))
            .collect();
        (0..n).into_par_iter().map(|i| indices[fold_of[i]].nearest(&x[i], cfg.knn_k)).collect()
    } else {
        vec![Vec::new(); n]
    };
    let all_rows: Vec<u32> = (0..n as u32).collect();
    let neighbors = NeighborIndex::new(x.clone());

    let models = Target::ALL
        .par_iter()
        .map(|&t| {
            let raw: Vec<f64> = train.iter().map(|r| r.value(t)).collect();
            let transform = transform_for(t, &raw, cfg);
            let y: Vec<f64> = raw.iter().map(|&v| transform.forward(v)).collect();
            let mean = y.iter().sum::<f64>() / n as f64;
            if y.iter().all(|&v| v == y[0]) {
                log::warn!("target {t} has zero variance; using a constant model");
                return TargetModel {
                    target: t,
                    transform,
                    constant: Some(mean),
                    bases: Vec::new(),
                    meta: Ridge { intercept: mean, weights: Vec::new() },
                    train_residual_max: 0.0,
                };
            }
            let mut oof = vec![vec![0.0; roster.len()]; n];
            for (f, rows) in fold_rows.iter().enumerate() {
                let bases: Vec<Base> = roster
                    .par_iter()
                    .enumerate()
                    .map(|(k, &b)| fit_base(b, cfg, &binned, &y, rows, mix(cfg.seed, t.index() as u64 + 1, (f * 8 + k) as u64)))
                    .collect();
                for i in (0..n).filter(|&i| fold_of[i] == f) {
                    let ex = expand(&x[i], 2);
                    for (k, b) in bases.iter().enumerate() {
                        oof[i][k] = predict_base(b, &x[i], &ex, &oof_neighbors[i]);
                    }
                }
            }
            let meta = Ridge::fit(&oof, &y, cfg.meta_alpha);
            let bases: Vec<Base> = roster
                .par_iter()
                .enumerate()
                .map(|(k, &b)| fit_base(b, cfg, &binned, &y, &all_rows, mix(cfg.seed, t.index() as u64 + 1, (cfg.folds * 8 + k) as u64)))
                .collect();
            TargetModel {
                target: t,
                transform,
                constant: None,
                bases,
                meta,
                train_residual_max: 0.0,
            }
        })
        .collect();

    let mut ens = SurrogateEnsemble {
        encoder,
        config: cfg.clone(),
        train_size: n,
        neighbors,
        models,
        held_out_r2: None,
    };
    let preds: Vec<[f64; Target::COUNT]> = train.par_iter().map(|r| ens.predict_values(&r.design)).collect::<Result<_>>()?;
    for (k, m) in ens.models.iter_mut().enumerate() {
        m.train_residual_max = train
            .iter()
            .zip(&preds)
            .map(|(r, p)| (p[k] - r.value(m.target)).abs())
            .fold(0.0, f64::max);
    }
    Ok(ens)
}

/// Per-target predictions with each base learner's contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailedPrediction {
    pub stacked: [f64; Target::COUNT],
    /// `(learner, prediction)` in original units; empty for constant targets.
    pub bases: Vec<Vec<(BaseLearner, f64)>>,
}

impl SurrogateEnsemble {
    pub fn roster(&self) -> Vec<BaseLearner> {
        self.config.roster.enabled()
    }

    fn neighbor_list(&self, x: &Features) -> Vec<usize> {
        if self.config.roster.knn {
            self.neighbors.nearest(x, self.config.knn_k)
        } else {
            Vec::new()
        }
    }

    pub fn predict_detailed(&self, d: &DesignVector) -> Result<DetailedPrediction> {
        let x = self.encoder.encode(d)?;
        let nb = self.neighbor_list(&x);
        let ex = expand(&x, 2);
        let roster = self.roster();
        let mut stacked = [0.0; Target::COUNT];
        let mut bases = Vec::with_capacity(Target::COUNT);
        for (k, m) in self.models.iter().enumerate() {
            if let Some(c) = m.constant {
                stacked[k] = m.transform.inverse(c);
                bases.push(Vec::new());
                continue;
            }
            let z: Vec<f64> = m.bases.iter().map(|b| predict_base(b, &x, &ex, &nb)).collect();
            stacked[k] = m.transform.inverse(m.meta.predict(&z));
            bases.push(roster.iter().zip(&z).map(|(&b, &v)| (b, m.transform.inverse(v))).collect());
        }
        Ok(DetailedPrediction { stacked, bases })
    }

    /// Predicted values in [`Target::ALL`] order.
    pub fn predict_values(&self, d: &DesignVector) -> Result<[f64; Target::COUNT]> {
        let x = self.encoder.encode(d)?;
        let nb = self.neighbor_list(&x);
        let ex = expand(&x, 2);
        let mut out = [0.0; Target::COUNT];
        for (k, m) in self.models.iter().enumerate() {
            out[k] = match m.constant {
                Some(c) => m.transform.inverse(c),
                None => {
                    let mut z = [0.0; 4];
                    for (j, b) in m.bases.iter().enumerate() {
                        z[j] = predict_base(b, &x, &ex, &nb);
                    }
                    m.transform.inverse(m.meta.predict(&z[..m.bases.len()]))
                }
            };
        }
        Ok(out)
    }

    /// Predicted record; a predicted θ of 90° or more reads as `NoTip`.
    pub fn predict(&self, d: &DesignVector) -> Result<PerformanceRecord> {
        let v = self.predict_values(d)?;
        let mut p = PerformanceRecord::from_values(&v);
        if v[Target::Theta.index()] >= 90.0 {
            p.theta = Some(TipAngle::NoTip);
        }
        Ok(p)
    }

    pub fn train_residual_max(&self, t: Target) -> f64 {
        self.models[t.index()].train_residual_max
    }

    pub fn is_constant(&self, t: Target) -> bool {
        self.models[t.index()].constant.is_some()
    }

    /// Targets whose held-out R² fell below the reliability threshold.
    pub fn unreliable_targets(&self) -> Vec<Target> {
        match &self.held_out_r2 {
            Some(r2) => Target::ALL
                .into_iter()
                .filter(|t| r2[t.index()] < self.config.reliability_threshold)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(MODEL_MAGIC).map_err(|e| Error::io(path, e))?;
        let saved = SavedModel {
            version: MODEL_VERSION,
            schema_hash: schema_hash(),
            ensemble: self.clone(),
        };
        bincode_options()
            .serialize_into(&mut w, &saved)
            .map_err(|e| Error::Model {
                path: path.into(),
                message: e.to_string(),
            })?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let err = |message: String| Error::Model {
            path: path.into(),
            message,
        };
        let body = bytes
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| err("not a surrogate model file".into()))?;
        let saved: SavedModel = bincode_options()
            .with_limit(body.len() as u64)
            .deserialize(body)
            .map_err(|e| err(e.to_string()))?;
        if saved.version != MODEL_VERSION {
            return Err(err(format!("unsupported model version {}", saved.version)));
        }
        if saved.schema_hash != schema_hash() {
            return Err(err("feature schema hash mismatch".into()));
        }
        Ok(saved.ensemble)
    }
}

const MODEL_MAGIC: &[u8] = b"WFSURR\0\x01";
const MODEL_VERSION: u32 = 1;

fn bincode_options() -> impl bincode::Options {
    bincode::DefaultOptions::new().with_fixint_encoding()
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    version: u32,
    schema_hash: String,
    ensemble: SurrogateEnsemble,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetReport {
    pub target: Target,
    pub r2: f64,
    pub reliable: bool,
    pub base_r2: Vec<(BaseLearner, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub train_size: usize,
    pub test_size: usize,
    pub threshold: f64,
    pub targets: Vec<TargetReport>,
}

impl EvaluationReport {
    pub fn r2(&self, t: Target) -> f64 {
        self.targets[t.index()].r2
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["target".to_string(), "performance_value".into(), "r2".into(), "reliable".into()];
        header.extend(BaseLearner::ALL.iter().map(|b| format!("{}_r2", b.name())));
        header.extend(["train_size".into(), "test_size".into()]);
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for r in &self.targets {
            let mut rec = vec![r.target.name().to_string(), r.target.label().into(), format!("{:.6}", r.r2), r.reliable.to_string()];
            for b in BaseLearner::ALL {
                rec.push(
                    r.base_r2
                        .iter()
                        .find(|(k, _)| *k == b)
                        .map(|(_, v)| format!("{v:.6}"))
                        .unwrap_or_default(),
                );
            }
            rec.extend([self.train_size.to_string(), self.test_size.to_string()]);
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Held-out R² for every target, stacked and per base learner.
pub fn evaluate(e: &SurrogateEnsemble, test: &[LabeledDesign]) -> Result<EvaluationReport> {
    let preds: Vec<DetailedPrediction> = test.par_iter().map(|r| e.predict_detailed(&r.design)).collect::<Result<_>>()?;
    let roster = e.roster();
    let mut targets = Vec::with_capacity(Target::COUNT);
    for t in Target::ALL {
        let k = t.index();
        let actual: Vec<f64> = test.iter().map(|r| r.value(t)).collect();
        let stacked: Vec<f64> = preds.iter().map(|p| p.stacked[k]).collect();
        let r2 = r_squared(&stacked, &actual)?;
        let base_r2 = if e.is_constant(t) {
            Vec::new()
        } else {
            roster
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let v: Vec<f64> = preds.iter().map(|p| p.bases[k][j].1).collect();
                    r_squared(&v, &actual).map(|r| (b, r))
                })
                .collect::<Result<_>>()?
        };
        targets.push(TargetReport {
            target: t,
            r2,
            reliable: r2 >= e.config.reliability_threshold,
            base_r2,
        });
    }
    Ok(EvaluationReport {
        train_size: e.train_size,
        test_size: test.len(),
        threshold: e.config.reliability_threshold,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Material;
    use crate::sampling::scale_samples;
    use crate::sampling::sobol_points;

    #[test]
    fn r_squared_definitions() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&a, &a).unwrap(), 1.0);
        assert_eq!(r_squared(&[2.0; 3], &a).unwrap(), 0.0);
        assert_eq!(r_squared(&[3.0, 2.0, 1.0], &a).unwrap(), -3.0);
        assert_eq!(r_squared(&[1.0, 1.0], &[5.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(r_squared(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    /// Synthetic rows whose targets are smooth functions of the design.
    fn synthetic(n: usize) -> Vec<DatasetRow> {
        let ranges = ParameterRanges::default();
        let u = sobol_points(14, n, 1).unwrap();
        let vals = scale_samples(&u, &ranges).unwrap();
        vals.iter()
            .enumerate()
            .map(|(i, v)| {
                let m = Material::ALL[i % 3];
                let d = DesignVector::from_parts(v, [Material::Aluminum, m]);
                let mass = 0.2 * v[0] + 3.0 * v[9] + if m == Material::Steel { 2.0 } else { 0.0 };
                let p = PerformanceRecord::from_values(&[mass, 0.01 * v[1], 0.0, -0.1 * v[0] / v[9], 0.02, 2.0 + v[12], 1.0, 0.5 * v[0], 3.0 + 0.1 * v[2]]);
                DatasetRow { design_id: i as u64, sobol_index: i as u64 + 1, design: d, performance: Some(p) }
            })
            .collect()
    }

    fn small_cfg() -> SurrogateConfig {
        SurrogateConfig {
            forest: ForestConfig { n_trees: 20, ..Default::default() },
            boosting: BoostingConfig { n_rounds: 60, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn split_is_disjoint_deterministic_and_sized() {
        let rows = synthetic(500);
        let (tr, te) = split(&rows, 0.2, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (400, 100));
        let ids: std::collections::HashSet<u64> = tr.iter().map(|r| r.design_id).collect();
        assert!(te.iter().all(|r| !ids.contains(&r.design_id)));
        assert_eq!(split(&rows, 0.2, 3).unwrap(), (tr, te));
        assert!(matches!(split(&rows[..10], 0.2, 3), Err(Error::InsufficientData { usable: 10, .. })));
        let mut failed = rows.clone();
        for r in failed.iter_mut().skip(40) {
            r.performance = None;
        }
        assert!(split(&failed, 0.2, 3).is_err());
    }

    #[test]
    fn trains_predicts_and_round_trips() {
        let rows = synthetic(400);
        let (tr, te) = split(&rows, 0.2, 1).unwrap();
        let cfg = small_cfg();
        let e = train(&tr, &ParameterRanges::default(), &cfg).unwrap();
        let rep = evaluate(&e, &te).unwrap();
        assert_eq!(rep.targets.len(), 9);
        assert!(rep.r2(Target::Mass) > 0.95, "{rep:?}");
        assert!(e.is_constant(Target::HandleDy));
        assert_eq!(rep.r2(Target::HandleDy), 0.0);
        assert!(!rep.targets[Target::HandleDy.index()].reliable);
        for r in &tr[..20] {
            let p = e.predict_values(&r.design).unwrap();
            for t in Target::ALL {
                assert!((p[t.index()] - r.value(t)).abs() <= e.train_residual_max(t) + 1e-12);
            }
        }
        let e2 = train(&tr, &ParameterRanges::default(), &cfg).unwrap();
        assert_eq!(e, e2);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        e.save(&path).unwrap();
        let back = SurrogateEnsemble::load(&path).unwrap();
        for r in &te {
            let (a, b) = (e.predict_values(&r.design).unwrap(), back.predict_values(&r.design).unwrap());
            for k in 0..9 {
                assert!((a[k] - b[k]).abs() <= 1e-12 * a[k].abs().max(1.0));
            }
        }
        let path2 = dir.path().join("report.csv");
        rep.write_csv(&path2).unwrap();
        assert_eq!(std::fs::read_to_string(&path2).unwrap().lines().count(), 10);
    }

    #[test]
    fn corrupt_model_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        std::fs::write(&path, b"not a model").unwrap();
        assert!(matches!(SurrogateEnsemble::load(&path), Err(Error::Model { .. })));
    }

    #[test]
    fn empty_roster_is_a_config_error() {
        let cfg = SurrogateConfig {
            roster: Roster { knn: false, random_forest: false, gradient_boosting: false, ridge: false },
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
    }
}
