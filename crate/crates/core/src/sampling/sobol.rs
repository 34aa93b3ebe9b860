//! Unscrambled Sobol sequence in Gray-code order, Joe-Kuo D6 direction
//! numbers (new-joe-kuo-6.21201).

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest dimension covered by the direction-number table.
pub const MAX_DIM: usize = 21201;
const BITS: usize = 32;

/// Primitive polynomial degree, its coefficients and initial direction numbers.
struct DimParams {
    s: usize,
    a: u32,
    m: Vec<u32>,
}

fn table() -> &'static [DimParams] {
    static TABLE: OnceLock<Vec<DimParams>> = OnceLock::new();
    TABLE.get_or_init(|| {
        sobol::params::JoeKuoD6::extended()
            .dim_params
            .into_iter()
            .map(|p| DimParams {
                s: p.m.len(),
                a: p.a,
                m: p.m,
            })
            .collect()
    })
}

/// Direction numbers `v[k]` (already shifted to 32-bit fixed point) for one dimension.
fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (31 - k);
        }
        return v;
    }
    let p = &table()[dim - 1];
    let s = p.s;
    for k in 0..BITS.min(s) {
        v[k] = p.m[k] << (31 - k);
    }
    for k in s..BITS {
        v[k] = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (p.a >> (s - 1 - j)) & 1 == 1 {
                v[k] ^= v[k - j];
            }
        }
    }
    v
}

/// Generator over one fixed dimensionality.
pub struct SobolSequence {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidSampleRequest(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        Ok(SobolSequence {
            directions: (0..dim).map(direction_numbers).collect(),
            state: vec![0; dim],
            index: 0,
        })
    }

    /// Positions the generator so that the next point is `index`.
    pub fn seek(&mut self, index: u64) {
        let gray = index ^ (index >> 1);
        for (x, v) in self.state.iter_mut().zip(&self.directions) {
            *x = (0..BITS).filter(|&b| (gray >> b) & 1 == 1).fold(0, |acc, b| acc ^ v[b]);
        }
        self.index = index;
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Writes the current point into `out` and advances.
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / 4_294_967_296.0;
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = x as f64 * SCALE;
        }
        let c = self.index.trailing_ones() as usize;
        for (x, v) in self.state.iter_mut().zip(&self.directions) {
            *x ^= v[c];
        }
        self.index += 1;
    }
}

/// `n` consecutive points of the `dim`-dimensional sequence starting at
/// index `skip`; rows are points, values in [0, 1).
pub fn sobol_points(dim: usize, n: usize, skip: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidSampleRequest("n must be at least 1".into()));
    }
    if skip.checked_add(n as u64).is_none_or(|end| end > 1u64 << BITS) {
        return Err(Error::InvalidSampleRequest(format!(
            "indices {skip}..{skip}+{n} exceed the 2^32 sequence period"
        )));
    }
    let mut seq = SobolSequence::new(dim)?;
    seq.seek(skip);
    Ok((0..n)
        .map(|_| {
            let mut row = vec![0.0; dim];
            seq.next_into(&mut row);
            row
        })
        .collect())
}
