use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Bit-packed binary matrix. Stores both row-major and column-major bit
/// planes so that per-row and per-column class counts are popcount loops.
/// Immutable after construction; shared read-only across workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinMat {
    m: usize,
    n: usize,
    row_words: usize,
    col_words: usize,
    rows: Vec<u64>,
    cols: Vec<u64>,
}

impl BinMat {
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain("matrix dimensions must be at least 1".into()));
        }
        let row_words = words_for(n);
        let col_words = words_for(m);
        let mut rows = vec![0u64; m * row_words];
        let mut cols = vec![0u64; n * col_words];
        for i in 0..m {
            for j in 0..n {
                if f(i, j) {
                    rows[i * row_words + j / WORD] |= 1 << (j % WORD);
                    cols[j * col_words + i / WORD] |= 1 << (i % WORD);
                }
            }
        }
        Ok(BinMat { m, n, row_words, col_words, rows, cols })
    }

    pub fn from_rows(bits: &[Vec<u8>]) -> Result<Self> {
        let m = bits.len();
        if m == 0 || bits[0].is_empty() {
            return Err(Error::Domain("matrix dimensions must be at least 1".into()));
        }
        let n = bits[0].len();
        if bits.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged adjacency rows".into()));
        }
        BinMat::from_fn(m, n, |i, j| bits[i][j] != 0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.row_words + j / WORD] >> (j % WORD) & 1 == 1
    }

    pub fn row_words(&self) -> usize {
        self.row_words
    }

    pub fn col_words(&self) -> usize {
        self.col_words
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.row_words..(i + 1) * self.row_words]
    }

    pub fn col(&self, j: usize) -> &[u64] {
        &self.cols[j * self.col_words..(j + 1) * self.col_words]
    }

    pub fn count_ones(&self) -> u64 {
        self.rows.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn mean(&self) -> f64 {
        self.count_ones() as f64 / (self.m as f64 * self.n as f64)
    }

    /// Ones in row `i` whose column index lies in the mask.
    pub fn row_mask_count(&self, i: usize, mask: &[u64]) -> usize {
        debug_assert_eq!(mask.len(), self.row_words);
        self.row(i).iter().zip(mask).map(|(w, m)| (w & m).count_ones() as usize).sum()
    }

    /// Ones in column `j` whose row index lies in the mask.
    pub fn col_mask_count(&self, j: usize, mask: &[u64]) -> usize {
        debug_assert_eq!(mask.len(), self.col_words);
        self.col(j).iter().zip(mask).map(|(w, m)| (w & m).count_ones() as usize).sum()
    }

    /// Visit the column index of every set bit in row `i`.
    pub fn for_each_one_in_row(&self, i: usize, mut f: impl FnMut(usize)) {
        for (wi, &word) in self.row(i).iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                f(wi * WORD + b);
                w &= w - 1;
            }
        }
    }
}

/// Per-class bitmasks over one axis, derived from a labeling.
#[derive(Debug, Clone)]
pub struct ClassMasks {
    k: usize,
    words: usize,
    bits: Vec<u64>,
}

impl ClassMasks {
    pub fn new(labels: &[u32], k: usize, words: usize) -> Self {
        let mut bits = vec![0u64; k * words];
        for (idx, &lab) in labels.iter().enumerate() {
            bits[lab as usize * words + idx / WORD] |= 1 << (idx % WORD);
        }
        ClassMasks { k, words, bits }
    }

    pub fn mask(&self, class: usize) -> &[u64] {
        &self.bits[class * self.words..(class + 1) * self.words]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn move_index(&mut self, idx: usize, from: usize, to: usize) {
        let w = idx / WORD;
        let b = 1u64 << (idx % WORD);
        self.bits[from * self.words + w] &= !b;
        self.bits[to * self.words + w] |= b;
    }
}
