use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Contiguous split of `n` rows into `M` blocks whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sizes: Vec<usize>,
}

impl Partition {
    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn rows(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }
}

/// Splits `n` rows into `blocks` contiguous ranges; the first `n mod M` blocks get one extra row.
pub fn partition(n: usize, blocks: usize) -> Result<Partition> {
    if blocks == 0 || blocks > n {
        return Err(Error::Partition { rows: n, blocks });
    }
    let base = n / blocks;
    let extra = n % blocks;
    Ok(Partition {
        sizes: (0..blocks).map(|m| base + usize::from(m < extra)).collect(),
    })
}

/// Seeded permutation of `0..n`, used by the row-shuffle option.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}
