use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{DesignVector, Material, ParamId, N_CATEGORICAL, N_CONTINUOUS};
use crate::sampling::ParameterRanges;

/// 14 min-max scaled continuous values followed by two 3-way one-hots.
pub const N_FEATURES: usize = N_CONTINUOUS + N_CATEGORICAL * 3;

pub type Features = [f64; N_FEATURES];

/// Min-max scaling constants taken from the sampling ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub lower: [f64; N_CONTINUOUS],
    pub range: [f64; N_CONTINUOUS],
}

impl FeatureEncoder {
    pub fn from_ranges(r: &ParameterRanges) -> Self {
        FeatureEncoder {
            lower: r.continuous.map(|i| i.lower),
            range: r.continuous.map(|i| i.range),
        }
    }

    /// Collapsed ranges encode to 0.
    pub fn encode(&self, d: &DesignVector) -> Result<Features> {
        let mut f = [0.0; N_FEATURES];
        for (i, v) in d.continuous().into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::EncodingError(format!("{} is not finite", ParamId::ALL[i].name())));
            }
            f[i] = if self.range[i] > 0.0 { (v - self.lower[i]) / self.range[i] } else { 0.0 };
        }
        for (k, m) in d.materials().into_iter().enumerate() {
            f[N_CONTINUOUS + 3 * k + m.index()] = 1.0;
        }
        Ok(f)
    }

    /// Inverse of [`encode`](Self::encode) for continuous slots; the
    /// one-hot blocks pick their arg-max.
    pub fn decode(&self, f: &Features) -> DesignVector {
        let mut values = [0.0; N_CONTINUOUS];
        for i in 0..N_CONTINUOUS {
            values[i] = self.lower[i] + f[i] * self.range[i];
        }
        let mats = std::array::from_fn(|k| {
            let block = &f[N_CONTINUOUS + 3 * k..N_CONTINUOUS + 3 * k + 3];
            let best = (0..3).fold(0, |b, j| if block[j] > block[b] { j } else { b });
            Material::ALL[best]
        });
        DesignVector::from_parts(&values, mats)
    }
}

/// Hash of the feature layout; changes whenever columns or categories do.
pub fn schema_hash() -> String {
    let mut h = Sha256::new();
    h.update(format!("features={N_FEATURES};"));
    for p in ParamId::ALL {
        h.update(p.column().as_bytes());
        h.update(b";");
    }
    for m in Material::ALL {
        h.update(m.name().as_bytes());
        h.update(b";");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
