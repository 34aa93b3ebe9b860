//! Quasi-random design generation: Sobol points scaled onto parameter
//! ranges, material assignment, and feasibility filtering.

pub mod sobol;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_feasibility, DesignVector, FeasibilityLimits, Material, ParamId, N_CATEGORICAL, N_CONTINUOUS, N_PARAMS};
pub use sobol::{sobol_points, SobolSequence};

/// Closed-open interval `[lower, lower + range)` of one continuous parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub range: f64,
}

impl Interval {
    pub fn from_bounds(min: f64, max: f64) -> Self {
        Interval {
            lower: min,
            range: max - min,
        }
    }

    pub fn upper(&self) -> f64 {
        self.lower + self.range
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper()
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper())
    }
}

/// Sampling bounds for every design parameter, in inches and degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RangesTable", into = "RangesTable")]
pub struct ParameterRanges {
    pub continuous: [Interval; N_CONTINUOUS],
    /// Allowed categories for the front-crossbeam and frame materials.
    pub materials: [Vec<Material>; N_CATEGORICAL],
}

impl Default for ParameterRanges {
    fn default() -> Self {
        let iv = Interval::from_bounds;
        let heights = iv(6.0, 34.0);
        let inner = iv(0.15, 1.0);
        let thickness = iv(0.03, 0.125);
        ParameterRanges {
            continuous: [
                iv(28.0, 42.0),
                iv(16.0, 26.0),
                iv(18.0, 26.0),
                iv(15.0, 23.0),
                iv(6.0, 12.0),
                heights,
                heights,
                heights,
                iv(140.0, 180.0),
                inner,
                inner,
                inner,
                thickness,
                thickness,
            ],
            materials: [Material::ALL.to_vec(), Material::ALL.to_vec()],
        }
    }
}

impl ParameterRanges {
    /// Degenerate ranges containing exactly one design.
    pub fn point(d: &DesignVector) -> Self {
        ParameterRanges {
            continuous: d.continuous().map(|v| Interval { lower: v, range: 0.0 }),
            materials: d.materials().map(|m| vec![m]),
        }
    }

    pub fn interval(&self, p: ParamId) -> Option<Interval> {
        (!p.is_categorical()).then(|| self.continuous[p.index()])
    }

    pub fn validate(&self) -> Result<()> {
        for (p, iv) in ParamId::ALL.iter().zip(&self.continuous) {
            if !(iv.range >= 0.0) || !iv.lower.is_finite() || !iv.range.is_finite() {
                return Err(Error::config(format!("ranges.{p}"), "range must be finite with max >= min"));
            }
        }
        for (p, allowed) in ParamId::ALL[N_CONTINUOUS..].iter().zip(&self.materials) {
            if allowed.is_empty() {
                return Err(Error::config(format!("ranges.{p}"), "at least one material must be allowed"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, d: &DesignVector) -> bool {
        self.continuous.iter().zip(d.continuous()).all(|(iv, v)| iv.contains(v))
            && self.materials.iter().zip(d.materials()).all(|(allowed, m)| allowed.contains(&m))
    }

    /// Maps a continuous value onto [0, 1] by its range; zero-width ranges map to 0.
    pub fn normalize(&self, k: usize, v: f64) -> f64 {
        let iv = self.continuous[k];
        if iv.range > 0.0 {
            (v - iv.lower) / iv.range
        } else {
            0.0
        }
    }

    /// True when `inner` lies inside `self` on every parameter.
    pub fn covers(&self, inner: &ParameterRanges) -> bool {
        self.continuous
            .iter()
            .zip(&inner.continuous)
            .all(|(o, i)| i.lower >= o.lower && i.upper() <= o.upper())
            && self
                .materials
                .iter()
                .zip(&inner.materials)
                .all(|(o, i)| i.iter().all(|m| o.contains(m)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RangeEntry {
    Interval([f64; 2]),
    Categories(Vec<Material>),
}

/// Config representation: `name = [min, max]` or `name = ["Aluminum", ...]`.
/// Parameters left out keep their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct RangesTable(BTreeMap<String, RangeEntry>);

impl TryFrom<RangesTable> for ParameterRanges {
    type Error = Error;

    fn try_from(table: RangesTable) -> Result<Self> {
        let mut ranges = ParameterRanges::default();
        for (name, entry) in table.0 {
            let p: ParamId = name.parse()?;
            match (p.is_categorical(), entry) {
                (false, RangeEntry::Interval([min, max])) => {
                    ranges.continuous[p.index()] = Interval::from_bounds(min, max);
                }
                (true, RangeEntry::Categories(allowed)) => {
                    ranges.materials[p.index() - N_CONTINUOUS] = allowed;
                }
                _ => return Err(Error::config(format!("ranges.{name}"), "wrong value kind for parameter")),
            }
        }
        ranges.validate()?;
        Ok(ranges)
    }
}

impl From<ParameterRanges> for RangesTable {
    fn from(r: ParameterRanges) -> Self {
        let mut map = BTreeMap::new();
        for p in ParamId::ALL {
            let entry = if p.is_categorical() {
                RangeEntry::Categories(r.materials[p.index() - N_CONTINUOUS].clone())
            } else {
                let iv = r.continuous[p.index()];
                RangeEntry::Interval([iv.lower, iv.upper()])
            };
            map.insert(p.name().to_string(), entry);
        }
        RangesTable(map)
    }
}

/// Affine map of unit-cube rows onto the continuous ranges:
/// `s[j][k] = u[j][k] * r[k] + l[k]`.
pub fn scale_samples<R: AsRef<[f64]>>(u: &[R], ranges: &ParameterRanges) -> Result<Vec<[f64; N_CONTINUOUS]>> {
    u.iter()
        .map(|row| {
            let row = row.as_ref();
            if row.len() != N_CONTINUOUS {
                return Err(Error::DimensionMismatch {
                    expected: N_CONTINUOUS,
                    actual: row.len(),
                });
            }
            let mut s = [0.0; N_CONTINUOUS];
            for (k, (sk, iv)) in s.iter_mut().zip(&ranges.continuous).enumerate() {
                *sk = row[k] * iv.range + iv.lower;
            }
            Ok(s)
        })
        .collect()
}

/// Seeded toroidal shift applied to the two material coordinates.
fn material_shift(seed: u64) -> [f64; N_CATEGORICAL] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.random(), rng.random()]
}

fn bin(u: f64, allowed: &[Material]) -> Material {
    let k = ((u * allowed.len() as f64).floor() as usize).min(allowed.len() - 1);
    allowed[k]
}

fn materials_from_unit(u: [f64; N_CATEGORICAL], shift: [f64; N_CATEGORICAL], allowed: &[Vec<Material>; N_CATEGORICAL]) -> [Material; N_CATEGORICAL] {
    [0, 1].map(|k| bin((u[k] + shift[k]).fract(), &allowed[k]))
}

/// Material pairs drawn from the two Sobol dimensions that follow the
/// continuous ones, each split into equal bins over the three alloys.
pub fn assign_materials(n: usize, seed: u64) -> Result<Vec<[Material; N_CATEGORICAL]>> {
    let points = sobol_points(N_PARAMS, n, 0)?;
    let shift = material_shift(seed);
    let allowed = [Material::ALL.to_vec(), Material::ALL.to_vec()];
    Ok(points
        .iter()
        .map(|p| materials_from_unit([p[N_CONTINUOUS], p[N_CONTINUOUS + 1]], shift, &allowed))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledDesign {
    /// Position of the point in the Sobol sequence.
    pub sobol_index: u64,
    pub design: DesignVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    /// Feasible designs in sequence order.
    pub designs: Vec<SampledDesign>,
    pub requested: usize,
    pub dropped_infeasible: usize,
    pub seed: u64,
    pub sobol_skip: u64,
}

impl SampleBatch {
    pub fn drop_fraction(&self) -> f64 {
        self.dropped_infeasible as f64 / self.requested as f64
    }
}

pub fn generate_batch(n_requested: usize, ranges: &ParameterRanges, limits: &FeasibilityLimits, seed: u64) -> Result<SampleBatch> {
    generate_batch_from(n_requested, ranges, limits, seed, 0)
}

/// Samples `n_requested` designs starting at Sobol index `skip`, keeping
/// only those that pass every feasibility check.
pub fn generate_batch_from(
    n_requested: usize,
    ranges: &ParameterRanges,
    limits: &FeasibilityLimits,
    seed: u64,
    skip: u64,
) -> Result<SampleBatch> {
    ranges.validate()?;
    let points = sobol_points(N_PARAMS, n_requested, skip)?;
    let shift = material_shift(seed);

    let designs: Vec<SampledDesign> = points
        .par_iter()
        .enumerate()
        .filter_map(|(j, p)| {
            let scaled = scale_samples(&[&p[..N_CONTINUOUS]], ranges).ok()?[0];
            let materials = materials_from_unit([p[N_CONTINUOUS], p[N_CONTINUOUS + 1]], shift, &ranges.materials);
            let design = DesignVector::from_parts(&scaled, materials);
            check_feasibility(&design, limits).valid.then_some(SampledDesign {
                sobol_index: skip + j as u64,
                design,
            })
        })
        .collect();

    if designs.is_empty() {
        return Err(Error::EmptyBatch { requested: n_requested });
    }
    Ok(SampleBatch {
        dropped_infeasible: n_requested - designs.len(),
        requested: n_requested,
        designs,
        seed,
        sobol_skip: skip,
    })
}
