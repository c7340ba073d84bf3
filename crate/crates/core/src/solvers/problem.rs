use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::data::{partition, Partition};
use crate::error::{Error, Result};
use crate::linalg::RidgeFactor;
use crate::matrix::DenseMatrix;
use crate::model::Dataset;
use crate::scalar::Real;

/// Data held by one block: its rows of `X̃`, `ỹ` and the cached ridge factor.
#[derive(Debug, Clone)]
pub struct BlockData<T> {
    pub rows: Range<usize>,
    pub x: Arc<DenseMatrix<T>>,
    pub y: Vec<T>,
    pub factor: RidgeFactor<T>,
}

impl<T: Real> BlockData<T> {
    pub fn new(x: DenseMatrix<T>, y: Vec<T>, rows: Range<usize>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension {
                expected: x.rows(),
                actual: y.len(),
            });
        }
        let x = Arc::new(x);
        let factor = RidgeFactor::new(Arc::clone(&x))?;
        Ok(Self { rows, x, y, factor })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// A dataset split into blocks with factorizations computed once, reusable across fits.
#[derive(Debug, Clone)]
pub struct Problem<'a, T> {
    pub data: &'a Dataset<T>,
    pub partition: Partition,
    pub blocks: Vec<BlockData<T>>,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn new(data: &'a Dataset<T>, blocks: usize) -> Result<Self> {
        let partition = partition(data.n(), blocks)?;
        let blocks = partition
            .ranges()
            .into_par_iter()
            .map(|r| {
                let x = data.features().row_block(r.clone());
                let y = data.response()[r.clone()].to_vec();
                BlockData::new(x, y, r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            data,
            partition,
            blocks,
        })
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }
}
