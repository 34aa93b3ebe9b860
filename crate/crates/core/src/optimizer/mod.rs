//! Constrained multi-objective counterfactual search over walker designs.
//!
//! Candidates are scored by the surrogate, constrained by per-target bounds
//! and ranked with NSGA-II on three objectives: Gower distance to the query,
//! fraction of changed parameters and mean Gower distance to the nearest
//! dataset designs.

pub mod nsga;
pub mod objectives;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fea::{simulate_design, SimulationSettings};
use crate::model::{check_feasibility, design_columns, DesignVector, FeasibilityLimits, Material, ParamId, N_CATEGORICAL, N_CONTINUOUS};
use crate::performance::{PerformanceRecord, Target, TipAngle};
use crate::sampling::{Interval, ParameterRanges};
use crate::stability::{tipping_angle, StabilityInput};
use crate::surrogate::SurrogateEnsemble;
pub use objectives::{changed_feature_ratio, counterfactual_objectives, dataset_proximity, gower_distance, GowerScale};

/// A performance requirement, in dataset units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Unconstrained,
    AtMost(f64),
    AtLeast(f64),
    Between(f64, f64),
    /// `|value| ≤ limit`.
    MagnitudeAtMost(f64),
    /// Resolved against the query's own predicted value in the direction
    /// that counts as better for the target.
    BetterThanQuery,
}

/// Normaliser floor for relative overshoot.
const BOUND_EPS: f64 = 1e-6;

impl Bound {
    /// Concrete bound implied by `BetterThanQuery` for the given predicted value.
    pub fn better_than(t: Target, query_value: f64) -> Bound {
        match t {
            Target::MinSafetyFactor | Target::Theta => Bound::AtLeast(query_value),
            Target::Mass | Target::ComVertical => Bound::AtMost(query_value),
            _ => Bound::MagnitudeAtMost(query_value.abs()),
        }
    }

    pub fn is_constraint(&self) -> bool {
        !matches!(self, Bound::Unconstrained)
    }

    /// Normalised overshoot, 0 when satisfied. `NoTip` satisfies any lower bound on θ.
    pub fn violation(&self, value: f64, no_tip: bool) -> f64 {
        let over = |excess: f64, b: f64| (excess.max(0.0)) / b.abs().max(BOUND_EPS);
        if value.is_nan() {
            return if self.is_constraint() { f64::INFINITY } else { 0.0 };
        }
        match *self {
            Bound::Unconstrained | Bound::BetterThanQuery => 0.0,
            Bound::AtMost(b) => over(value - b, b),
            Bound::AtLeast(_) if no_tip => 0.0,
            Bound::AtLeast(b) => over(b - value, b),
            Bound::Between(lo, hi) => over(lo - value, lo) + over(value - hi, hi),
            Bound::MagnitudeAtMost(b) => over(value.abs() - b, b),
        }
    }
}

/// Per-target bounds after `BetterThanQuery` has been resolved.
pub type ResolvedTargets = [Bound; Target::COUNT];

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub satisfied: [bool; Target::COUNT],
    pub violation: f64,
}

/// Checks a record against resolved bounds; `violation` is the summed
/// normalised overshoot.
pub fn constraint_check(p: &PerformanceRecord, targets: &ResolvedTargets) -> ConstraintReport {
    let mut satisfied = [true; Target::COUNT];
    let mut violation = 0.0;
    let no_tip = matches!(p.theta, Some(TipAngle::NoTip));
    for t in Target::ALL {
        let v = p.get(t).unwrap_or(f64::NAN);
        let x = targets[t.index()].violation(v, t == Target::Theta && no_tip);
        satisfied[t.index()] = x == 0.0;
        violation += x;
    }
    ConstraintReport { satisfied, violation }
}

/// What to search for, and where.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualQuery {
    pub query_design: DesignVector,
    pub targets: BTreeMap<Target, Bound>,
    pub frozen: Vec<ParamId>,
    /// Search bounds; must lie inside the dataset ranges.
    pub exploration: ParameterRanges,
    /// Permit constraints on targets the surrogate flags as unreliable.
    pub allow_unreliable: bool,
}

impl CounterfactualQuery {
    /// The generic scenario: height 32-38 in, handle distance 19 ± 0.5 in,
    /// mass under 6 lb, and safety factor, handle-Y and leg deflection
    /// magnitudes and θ no worse than the query's predictions.
    pub fn generic(query: DesignVector, dataset_ranges: &ParameterRanges) -> Self {
        let mut exploration = dataset_ranges.clone();
        exploration.continuous[ParamId::OverallHeight.index()] = Interval::from_bounds(32.0, 38.0);
        exploration.continuous[ParamId::HandleDistance.index()] = Interval::from_bounds(18.5, 19.5);
        let targets = BTreeMap::from([
            (Target::Mass, Bound::AtMost(6.0)),
            (Target::MinSafetyFactor, Bound::BetterThanQuery),
            (Target::HandleDy, Bound::BetterThanQuery),
            (Target::LegDisplacement, Bound::BetterThanQuery),
            (Target::Theta, Bound::BetterThanQuery),
        ]);
        CounterfactualQuery {
            query_design: query,
            targets,
            frozen: Vec::new(),
            exploration,
            allow_unreliable: false,
        }
    }

    /// Replaces `BetterThanQuery` by concrete bounds and applies the
    /// reliability policy.
    pub fn resolve(&self, e: &SurrogateEnsemble) -> Result<ResolvedTargets> {
        let unreliable = e.unreliable_targets();
        let q = e.predict_values(&self.query_design)?;
        let mut out = [Bound::Unconstrained; Target::COUNT];
        for (&t, &b) in &self.targets {
            if b.is_constraint() && unreliable.contains(&t) && !self.allow_unreliable {
                return Err(Error::InvalidQuery(format!(
                    "target {t} is flagged unreliable by the surrogate; set allow_unreliable to constrain it"
                )));
            }
            out[t.index()] = match b {
                Bound::BetterThanQuery => Bound::better_than(t, q[t.index()]),
                Bound::Between(lo, hi) if lo > hi => {
                    return Err(Error::InvalidQuery(format!("target {t}: empty interval [{lo}, {hi}]")))
                }
                other => other,
            };
        }
        Ok(out)
    }

    fn validate(&self, dataset_ranges: &ParameterRanges) -> Result<()> {
        self.exploration.validate()?;
        if !dataset_ranges.covers(&self.exploration) {
            return Err(Error::InvalidQuery("exploration ranges must lie inside the dataset ranges".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// Per-gene mutation probability; defaults to 1/16.
    pub mutation_probability: f64,
    pub sbx_eta: f64,
    pub mutation_eta: f64,
    pub seed: u64,
    pub sample_count: usize,
    pub diversity_weight: f64,
    /// Neighbours used by the dataset-proximity objective.
    pub proximity_k: usize,
    /// Normalised change below which a parameter counts as unchanged.
    pub change_tolerance: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 1000,
            crossover_probability: 0.9,
            mutation_probability: 1.0 / 16.0,
            sbx_eta: 15.0,
            mutation_eta: 20.0,
            seed: 0,
            sample_count: 10,
            diversity_weight: 0.3,
            proximity_k: 5,
            change_tolerance: 0.01,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 10 {
            return Err(Error::config("optimize.ga.population_size", "must be at least 10"));
        }
        if self.generations < 1 {
            return Err(Error::config("optimize.ga.generations", "must be at least 1"));
        }
        for (name, p) in [
            ("crossover_probability", self.crossover_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("optimize.ga.{name}"), "must lie in [0, 1]"));
            }
        }
        if self.diversity_weight < 0.0 || !self.diversity_weight.is_finite() {
            return Err(Error::config("optimize.ga.diversity_weight", "must be non-negative"));
        }
        Ok(())
    }
}

/// Everything the search reads but never changes.
pub struct SearchContext<'a> {
    pub ensemble: &'a SurrogateEnsemble,
    /// Designs defining the data manifold (usually the training set).
    pub dataset: &'a [DesignVector],
    /// Dataset ranges; normalise Gower distances.
    pub ranges: &'a ParameterRanges,
    pub limits: &'a FeasibilityLimits,
}

/// One evaluated constraint-satisfying design.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub design: DesignVector,
    pub predicted: PerformanceRecord,
    pub objectives: [f64; 3],
    pub satisfied: [bool; Target::COUNT],
}

/// Every satisfying design seen during a run, plus the run's bookkeeping.
#[derive(Clone, Debug)]
pub struct Archive {
    pub candidates: Vec<Candidate>,
    pub targets: ResolvedTargets,
    /// Mean predicted mass of the feasible designs in the initial population.
    pub initial_mean_mass: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
struct Individual {
    design: DesignVector,
    predicted: Option<PerformanceRecord>,
    satisfied: [bool; Target::COUNT],
    violation: f64,
    objectives: [f64; 3],
}

/// Penalty for geometrically infeasible candidates; never predicted.
const INFEASIBLE: f64 = 1e12;

struct Engine<'a> {
    ctx: &'a SearchContext<'a>,
    query: &'a CounterfactualQuery,
    targets: ResolvedTargets,
    scale: GowerScale,
    frozen: [bool; N_CONTINUOUS + N_CATEGORICAL],
    cfg: &'a GaConfig,
}

impl Engine<'_> {
    fn repair(&self, d: &mut DesignVector) {
        let q = self.query.query_design;
        let mut v = d.continuous();
        let qv = q.continuous();
        for k in 0..N_CONTINUOUS {
            v[k] = if self.frozen[k] { qv[k] } else { self.query.exploration.continuous[k].clamp(v[k]) };
        }
        let mut m = d.materials();
        for k in 0..N_CATEGORICAL {
            let allowed = &self.query.exploration.materials[k];
            if self.frozen[N_CONTINUOUS + k] {
                m[k] = q.materials()[k];
            } else if !allowed.contains(&m[k]) {
                m[k] = allowed[0];
            }
        }
        *d = DesignVector::from_parts(&v, m);
    }

    fn evaluate(&self, d: DesignVector) -> Result<Individual> {
        let report = check_feasibility(&d, self.ctx.limits);
        if !report.valid {
            return Ok(Individual {
                design: d,
                predicted: None,
                satisfied: [false; Target::COUNT],
                violation: INFEASIBLE * (1.0 + report.violations.len() as f64),
                objectives: [1.0; 3],
            });
        }
        let predicted = self.ctx.ensemble.predict(&d)?;
        let c = constraint_check(&predicted, &self.targets);
        let q = &self.query.query_design;
        Ok(Individual {
            design: d,
            predicted: Some(predicted),
            satisfied: c.satisfied,
            violation: c.violation,
            objectives: [
                self.scale.distance(&d, q),
                changed_feature_ratio(&self.scale, &d, q, self.cfg.change_tolerance),
                dataset_proximity(&self.scale, &d, self.ctx.dataset, self.cfg.proximity_k),
            ],
        })
    }

    fn evaluate_all(&self, designs: Vec<DesignVector>) -> Result<Vec<Individual>> {
        designs.into_par_iter().map(|d| self.evaluate(d)).collect()
    }

    fn random_design(&self, rng: &mut ChaCha8Rng) -> DesignVector {
        let ex = &self.query.exploration;
        let v: [f64; N_CONTINUOUS] = std::array::from_fn(|k| ex.continuous[k].lower + rng.random::<f64>() * ex.continuous[k].range);
        let m: [Material; N_CATEGORICAL] = std::array::from_fn(|k| *ex.materials[k].choose(rng).expect("validated non-empty"));
        let mut d = DesignVector::from_parts(&v, m);
        self.repair(&mut d);
        d
    }

    fn initial_population(&self, rng: &mut ChaCha8Rng) -> Vec<DesignVector> {
        let n = self.cfg.population_size;
        let q = self.query.query_design;
        let mut pop = vec![{
            let mut d = q;
            self.repair(&mut d);
            d
        }];
        // Nearest dataset designs to the query, projected into the search box.
        let mut near: Vec<(f64, usize)> = self
            .ctx
            .dataset
            .iter()
            .enumerate()
            .map(|(i, d)| (self.scale.distance(d, &q), i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in near.iter().take(n / 2) {
            let mut d = self.ctx.dataset[i];
            self.repair(&mut d);
            pop.push(d);
        }
        while pop.len() < n {
            pop.push(self.random_design(rng));
        }
        pop
    }

    fn vary(&self, a: &DesignVector, b: &DesignVector, rng: &mut ChaCha8Rng) -> (DesignVector, DesignVector) {
        let ex = &self.query.exploration;
        let (mut va, mut vb) = (a.continuous(), b.continuous());
        let (mut ma, mut mb) = (a.materials(), b.materials());
        if rng.random_bool(self.cfg.crossover_probability) {
            for k in 0..N_CONTINUOUS {
                if !self.frozen[k] && rng.random_bool(0.5) {
                    let iv = ex.continuous[k];
                    (va[k], vb[k]) = nsga::sbx(rng, va[k], vb[k], iv.lower, iv.upper(), self.cfg.sbx_eta);
                }
            }
            for k in 0..N_CATEGORICAL {
                if rng.random_bool(0.5) {
                    std::mem::swap(&mut ma[k], &mut mb[k]);
                }
            }
        }
        for (v, m) in [(&mut va, &mut ma), (&mut vb, &mut mb)] {
            for k in 0..N_CONTINUOUS {
                if !self.frozen[k] && rng.random_bool(self.cfg.mutation_probability) {
                    let iv = ex.continuous[k];
                    v[k] = nsga::polynomial_mutation(rng, v[k], iv.lower, iv.upper(), self.cfg.mutation_eta);
                }
            }
            for k in 0..N_CATEGORICAL {
                if !self.frozen[N_CONTINUOUS + k] && rng.random_bool(self.cfg.mutation_probability) {
                    m[k] = *ex.materials[k].choose(rng).expect("validated non-empty");
                }
            }
        }
        let mut a = DesignVector::from_parts(&va, ma);
        let mut b = DesignVector::from_parts(&vb, mb);
        self.repair(&mut a);
        self.repair(&mut b);
        (a, b)
    }
}

/// Ranks and crowding distances for a population.
fn rank(pop: &[Individual]) -> (Vec<usize>, Vec<f64>, Vec<Vec<usize>>) {
    let fr = nsga::fronts(pop.len(), |i, j| {
        nsga::constrained_dominates(pop[i].violation, &pop[i].objectives, pop[j].violation, &pop[j].objectives)
    });
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, f) in fr.iter().enumerate() {
        let c = nsga::crowding(f, |i| pop[i].objectives);
        for (k, &i) in f.iter().enumerate() {
            rank[i] = r;
            crowd[i] = c[k];
        }
    }
    (rank, crowd, fr)
}

fn archive_key(d: &DesignVector) -> [u64; N_CONTINUOUS + N_CATEGORICAL] {
    let v = d.continuous();
    let m = d.materials();
    std::array::from_fn(|k| if k < N_CONTINUOUS { v[k].to_bits() } else { m[k - N_CONTINUOUS].index() as u64 })
}

/// NSGA-II search. Returns every constraint-satisfying design evaluated.
pub fn evolve(query: &CounterfactualQuery, ctx: &SearchContext<'_>, cfg: &GaConfig) -> Result<Archive> {
    cfg.validate()?;
    query.validate(ctx.ranges)?;
    if ctx.dataset.is_empty() {
        return Err(Error::InsufficientData { usable: 0, required: 1 });
    }
    if cfg.proximity_k > ctx.dataset.len() {
        log::warn!("proximity_k = {} exceeds the dataset size {}; clamped", cfg.proximity_k, ctx.dataset.len());
    }
    let targets = query.resolve(ctx.ensemble)?;
    let mut frozen = [false; N_CONTINUOUS + N_CATEGORICAL];
    for p in &query.frozen {
        frozen[p.index()] = true;
    }
    let engine = Engine {
        ctx,
        query,
        targets,
        scale: GowerScale::new(ctx.ranges),
        frozen,
        cfg,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = engine.evaluate_all(engine.initial_population(&mut rng))?;
    let mut evaluations = pop.len();
    let masses: Vec<f64> = pop.iter().filter_map(|i| i.predicted.map(|p| p.mass)).collect();
    let initial_mean_mass = masses.iter().sum::<f64>() / masses.len().max(1) as f64;

    let mut archive = Vec::new();
    let mut seen = HashSet::new();
    let mut collect = |inds: &[Individual], archive: &mut Vec<Candidate>| {
        for ind in inds {
            if let (0.0, Some(p)) = (ind.violation, ind.predicted) {
                if seen.insert(archive_key(&ind.design)) {
                    archive.push(Candidate {
                        design: ind.design,
                        predicted: p,
                        objectives: ind.objectives,
                        satisfied: ind.satisfied,
                    });
                }
            }
        }
    };
    collect(&pop, &mut archive);

    let n = cfg.population_size;
    for _ in 0..cfg.generations {
        let (rk, cr, _) = rank(&pop);
        let pick = |rng: &mut ChaCha8Rng| {
            let (a, b) = (rng.random_range(0..pop.len()), rng.random_range(0..pop.len()));
            if nsga::better(rk[a], cr[a], rk[b], cr[b]).is_le() {
                a
            } else {
                b
            }
        };
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            let (c1, c2) = engine.vary(&pop[a].design, &pop[b].design, &mut rng);
            children.push(c1);
            if children.len() < n {
                children.push(c2);
            }
        }
        let children = engine.evaluate_all(children)?;
        evaluations += children.len();
        collect(&children, &mut archive);

        pop.extend(children);
        let (_, _, fr) = rank(&pop);
        let mut next = Vec::with_capacity(n);
        for f in fr {
            if next.len() + f.len() <= n {
                next.extend(f);
            } else {
                let c = nsga::crowding(&f, |i| pop[i].objectives);
                let mut order: Vec<usize> = (0..f.len()).collect();
                order.sort_by(|&a, &b| c[b].total_cmp(&c[a]).then(f[a].cmp(&f[b])));
                next.extend(order.into_iter().take(n - next.len()).map(|k| f[k]));
                break;
            }
        }
        next.sort_unstable();
        pop = next.into_iter().map(|i| pop[i].clone()).collect();
    }

    if archive.is_empty() {
        let best = pop.iter().min_by(|a, b| a.violation.total_cmp(&b.violation));
        let unmet = best
            .map(|b| {
                Target::ALL
                    .into_iter()
                    .filter(|t| !b.satisfied[t.index()])
                    .filter(|t| targets[t.index()].is_constraint() || b.predicted.is_none())
                    .map(|t| t.name().to_string())
                    .collect()
            })
            .unwrap_or_default();
        return Err(Error::NoCounterfactualsFound { unmet });
    }
    Ok(Archive {
        candidates: archive,
        targets,
        initial_mean_mass,
        evaluations,
    })
}

/// A returned design with its predicted and (after [`validate`]) simulated
/// performance.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualResult {
    pub design: DesignVector,
    pub predicted: PerformanceRecord,
    pub simulated: Option<PerformanceRecord>,
    /// (Gower to query, changed-feature ratio, dataset proximity).
    pub objectives: [f64; 3],
    pub constraint_satisfied: [bool; Target::COUNT],
    /// Per-target simulated satisfaction; `None` until validated or when
    /// simulation failed.
    pub simulated_satisfied: Option<[bool; Target::COUNT]>,
    /// |predicted − simulated| / |simulated| per target.
    pub relative_error: Option<[f64; Target::COUNT]>,
    pub failure: Option<String>,
}

impl CounterfactualResult {
    fn from_candidate(c: &Candidate) -> Self {
        CounterfactualResult {
            design: c.design,
            predicted: c.predicted,
            simulated: None,
            objectives: c.objectives,
            constraint_satisfied: c.satisfied,
            simulated_satisfied: None,
            relative_error: None,
            failure: None,
        }
    }

    /// True when simulation ran and broke at least one bound.
    pub fn flagged(&self) -> bool {
        self.failure.is_some() || self.simulated_satisfied.is_some_and(|s| s.iter().any(|ok| !ok))
    }
}

/// Greedy pick from the archive's first Pareto front: each step takes the
/// candidate maximising `−mean(objectives) + diversity_weight × mean Gower
/// distance to those already picked`. Duplicates of a picked design are
/// never chosen while `diversity_weight > 0`.
pub fn final_sample(archive: &Archive, ranges: &ParameterRanges, cfg: &GaConfig) -> Vec<CounterfactualResult> {
    let c = &archive.candidates;
    if c.is_empty() || cfg.sample_count == 0 {
        return Vec::new();
    }
    let front = nsga::fronts(c.len(), |i, j| nsga::dominates(&c[i].objectives, &c[j].objectives))
        .into_iter()
        .next()
        .unwrap_or_default();
    let scale = GowerScale::new(ranges);
    let base = |i: usize| -c[i].objectives.iter().sum::<f64>() / 3.0;
    let mut chosen: Vec<usize> = Vec::new();
    let mut pool = front;
    while chosen.len() < cfg.sample_count && !pool.is_empty() {
        let mut best: Option<(f64, usize)> = None;
        for (pos, &i) in pool.iter().enumerate() {
            let div = if chosen.is_empty() {
                0.0
            } else {
                let ds: Vec<f64> = chosen.iter().map(|&j| scale.distance(&c[i].design, &c[j].design)).collect();
                if cfg.diversity_weight > 0.0 && ds.contains(&0.0) {
                    continue;
                }
                ds.iter().sum::<f64>() / ds.len() as f64
            };
            let score = base(i) + cfg.diversity_weight * div;
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, pos));
            }
        }
        let Some((_, pos)) = best else { break };
        chosen.push(pool.remove(pos));
    }
    chosen.into_iter().map(|i| CounterfactualResult::from_candidate(&c[i])).collect()
}

/// Re-simulates every result, recording simulated values, relative
/// prediction errors and bound violations. Failures are flagged, not dropped.
pub fn validate(
    results: &[CounterfactualResult],
    targets: &ResolvedTargets,
    settings: &SimulationSettings,
    tipping_force_lbf: f64,
) -> Vec<CounterfactualResult> {
    results
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut out = r.clone();
            let sim = simulate_design(i as u64, &r.design, settings).and_then(|mut p| {
                p.theta = Some(tipping_angle(&StabilityInput::for_design(&r.design, p.mass, tipping_force_lbf))?.theta);
                Ok(p)
            });
            match sim {
                Ok(p) => {
                    out.simulated = Some(p);
                    out.simulated_satisfied = Some(constraint_check(&p, targets).satisfied);
                    out.relative_error = Some(std::array::from_fn(|k| {
                        let t = Target::ALL[k];
                        let (a, b) = (r.predicted.get(t).unwrap_or(f64::NAN), p.get(t).unwrap_or(f64::NAN));
                        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
                    }));
                }
                Err(e) => out.failure = Some(e.to_string()),
            }
            out
        })
        .collect()
}

/// Writes results with design columns, `pred_`/`sim_` performance columns,
/// objectives and flags.
pub fn write_counterfactuals(path: &Path, results: &[CounterfactualResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<String> = vec!["rank".into()];
    header.extend(design_columns().iter().map(|s| s.to_string()));
    for prefix in ["pred_", "sim_"] {
        header.extend(Target::ALL.iter().map(|t| format!("{prefix}{}", t.column())));
        header.push(format!("{prefix}tip_status"));
    }
    header.extend(["gower_to_query", "changed_ratio", "dataset_proximity", "mass_rel_error", "pred_satisfied", "sim_satisfied", "sim_status"].map(String::from));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let perf = |p: Option<&PerformanceRecord>, rec: &mut Vec<String>| {
        for t in Target::ALL {
            let v = match (p, t) {
                (Some(p), Target::Theta) => match p.theta {
                    Some(TipAngle::Degrees(d)) => d.to_string(),
                    _ => String::new(),
                },
                (Some(p), t) => p.get(t).map(|v| v.to_string()).unwrap_or_default(),
                (None, _) => String::new(),
            };
            rec.push(v);
        }
        rec.push(p.and_then(|p| p.theta).map(|t| t.status().to_string()).unwrap_or_default());
    };
    for (i, r) in results.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(r.design.continuous().iter().map(f64::to_string));
        rec.extend(r.design.materials().iter().map(|m| m.name().to_string()));
        perf(Some(&r.predicted), &mut rec);
        perf(r.simulated.as_ref(), &mut rec);
        rec.extend(r.objectives.iter().map(f64::to_string));
        rec.push(r.relative_error.map(|e| e[Target::Mass.index()].to_string()).unwrap_or_default());
        rec.push(r.constraint_satisfied.iter().all(|&s| s).to_string());
        rec.push(r.simulated_satisfied.map(|s| s.iter().all(|&x| x).to_string()).unwrap_or_default());
        rec.push(
            match (&r.simulated, &r.failure) {
                (Some(_), _) => "ok",
                (None, Some(_)) => "failed",
                (None, None) => "not_run",
            }
            .into(),
        );
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_violation_examples() {
        let b = Bound::AtMost(6.0);
        assert_eq!(b.violation(5.9, false), 0.0);
        assert!((b.violation(6.3, false) - 0.3 / 6.0).abs() < 1e-12);
        assert_eq!(Bound::AtLeast(3.0).violation(0.0, true), 0.0);
        assert_eq!(Bound::MagnitudeAtMost(0.1).violation(-0.05, false), 0.0);
        assert!(Bound::MagnitudeAtMost(0.1).violation(-0.2, false) > 0.0);
        assert_eq!(Bound::Between(1.0, 2.0).violation(1.5, false), 0.0);
        assert_eq!(Bound::Unconstrained.violation(f64::NAN, false), 0.0);
        assert!(Bound::AtMost(0.0).violation(1.0, false) > 1e5);
    }

    #[test]
    fn constraint_check_vacuous_and_no_tip() {
        let mut p = PerformanceRecord::from_values(&[7.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 20.0, 3.0]);
        let free = [Bound::Unconstrained; Target::COUNT];
        let r = constraint_check(&p, &free);
        assert_eq!(r.violation, 0.0);
        assert!(r.satisfied.iter().all(|&s| s));
        let mut t = free;
        t[Target::Theta.index()] = Bound::AtLeast(10.0);
        assert!(!constraint_check(&p, &t).satisfied[Target::Theta.index()]);
        p.theta = Some(TipAngle::NoTip);
        assert_eq!(constraint_check(&p, &t).violation, 0.0);
    }

    #[test]
    fn better_than_query_directions() {
        assert_eq!(Bound::better_than(Target::Mass, 7.5), Bound::AtMost(7.5));
        assert_eq!(Bound::better_than(Target::MinSafetyFactor, 3.0), Bound::AtLeast(3.0));
        assert_eq!(Bound::better_than(Target::HandleDy, -0.2), Bound::MagnitudeAtMost(0.2));
    }

    #[test]
    fn bounds_parse_from_toml() {
        #[derive(Deserialize)]
        struct T {
            targets: BTreeMap<Target, Bound>,
        }
        let t: T = toml::from_str(
            "[targets]\nmass = { at_most = 6.0 }\ntheta = \"better_than_query\"\nhandle_dz = { between = [-1.0, 0.0] }\n",
        )
        .unwrap();
        assert_eq!(t.targets[&Target::Mass], Bound::AtMost(6.0));
        assert_eq!(t.targets[&Target::Theta], Bound::BetterThanQuery);
        assert_eq!(t.targets[&Target::HandleDz], Bound::Between(-1.0, 0.0));
    }

    #[test]
    fn ga_config_limits() {
        assert!(GaConfig { population_size: 5, ..Default::default() }.validate().is_err());
        assert!(GaConfig { generations: 0, ..Default::default() }.validate().is_err());
        assert!(GaConfig::default().validate().is_ok());
    }

    fn candidate(obj: [f64; 3], height: f64) -> Candidate {
        let mut d = DesignVector::original();
        d.overall_height = height;
        Candidate {
            design: d,
            predicted: PerformanceRecord::from_values(&[1.0; 9]),
            objectives: obj,
            satisfied: [true; 9],
        }
    }

    fn archive(c: Vec<Candidate>) -> Archive {
        Archive {
            candidates: c,
            targets: [Bound::Unconstrained; 9],
            initial_mean_mass: 0.0,
            evaluations: 0,
        }
    }

    #[test]
    fn final_sample_cases() {
        let r = ParameterRanges::default();
        let one = archive(vec![candidate([0.1, 0.1, 0.1], 35.0)]);
        assert_eq!(final_sample(&one, &r, &GaConfig::default()).len(), 1);

        let front = archive(vec![
            candidate([0.1, 0.5, 0.3], 30.0),
            candidate([0.5, 0.1, 0.3], 31.0),
            candidate([0.3, 0.3, 0.1], 32.0),
            candidate([0.9, 0.9, 0.9], 33.0),
        ]);
        let cfg = GaConfig { sample_count: 2, diversity_weight: 0.0, ..Default::default() };
        let out = final_sample(&front, &r, &cfg);
        let hs: Vec<f64> = out.iter().map(|o| o.design.overall_height).collect();
        assert_eq!(hs, vec![32.0, 30.0]);

        let dup = archive(vec![candidate([0.1, 0.5, 0.3], 30.0), candidate([0.1, 0.5, 0.3], 30.0), candidate([0.5, 0.1, 0.3], 36.0)]);
        let out = final_sample(&dup, &r, &GaConfig { sample_count: 3, ..Default::default() });
        assert_eq!(out.len(), 2);
        for a in &out {
            for b in &out {
                assert!(!nsga::dominates(&a.objectives, &b.objectives));
            }
        }
    }

    #[test]
    fn validate_empty_is_empty() {
        let t = [Bound::Unconstrained; 9];
        assert!(validate(&[], &t, &SimulationSettings::default(), 400.0).is_empty());
    }
}
