use std::collections::HashMap;

use crate::error::{Error, Result};

/// Default ceiling on the full Fock ⊗ spin dimension.
pub const DEFAULT_DIM_LIMIT: usize = 20_000;

/// Truncated Fock ⊗ spin basis with total occupancy `Σ n_i ≤ n_max`.
///
/// Occupation tuples are ordered by total occupancy, then lexicographically
/// with the first mode most significant. The full index is
/// `occupation_index · 2^N + spin_index`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    n_max: usize,
    n_spins: usize,
    occupations: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// `C(n, k)` in floating point, for dimension checks that may overflow.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl FockBasis {
    pub fn new(n_modes: usize, n_max: usize, n_spins: usize, dim_limit: usize) -> Result<Self> {
        if n_modes == 0 || n_spins == 0 {
            return Err(Error::config("Fock basis needs at least one mode and one spin"));
        }
        let dim = binomial(n_modes + n_max, n_modes) * (1u64 << n_spins.min(60)) as f64;
        if dim > dim_limit as f64 {
            return Err(Error::config(format!(
                "Fock basis dimension {dim:.0} exceeds the limit {dim_limit} \
                 ({n_modes} modes, n_max = {n_max}, {n_spins} spins)"
            )));
        }
        let mut occupations = Vec::new();
        for total in 0..=n_max {
            let mut cur = vec![0u32; n_modes];
            fill_shell(&mut occupations, &mut cur, 0, total as u32);
        }
        let index = occupations.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        Ok(Self { n_modes, n_max, n_spins, occupations, index })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn n_occupations(&self) -> usize {
        self.occupations.len()
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() * self.spin_dim()
    }

    pub fn occupation(&self, i: usize) -> &[u32] {
        &self.occupations[i]
    }

    pub fn occupation_index(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn total(&self, i: usize) -> usize {
        self.occupations[i].iter().map(|&n| n as usize).sum()
    }

    /// Full index of `(occupation i, spin s)`.
    pub fn full_index(&self, occ: usize, spin: usize) -> usize {
        occ * self.spin_dim() + spin
    }

    /// `(occupation index, spin index)` of a full index.
    pub fn split(&self, full: usize) -> (usize, usize) {
        (full / self.spin_dim(), full % self.spin_dim())
    }
}

fn fill_shell(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        cur[pos] = n;
        fill_shell(out, cur, pos + 1, remaining - n);
    }
    cur[pos] = 0;
}
