//! Dense bit-matrix representation of a binary relation on `0..n`.
//!
//! Rows are packed into `u64` words so that subset tests and row
//! intersections, which dominate the order-theoretic checks, run a word at
//! a time.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRel {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitRel {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitRel {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.n && j < self.n);
        self.data[i * self.words + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub fn unset(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.n && j < self.n);
        self.data[i * self.words + j / 64] &= !(1u64 << (j % 64));
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        self.data[i * self.words + j / 64] & (1u64 << (j % 64)) != 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    /// row(i) ⊆ row(j)
    pub fn row_subset(&self, i: usize, j: usize) -> bool {
        let a = self.row(i);
        let b = self.row(j);
        a.iter().zip(b).all(|(x, y)| x & !y == 0)
    }

    /// First element of row(i) ∖ row(j), if any.
    pub fn row_diff_first(&self, i: usize, j: usize) -> Option<usize> {
        let a = self.row(i);
        let b = self.row(j);
        for (w, (x, y)) in a.iter().zip(b).enumerate() {
            let d = x & !y;
            if d != 0 {
                return Some(w * 64 + d.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_row(&self, i: usize) -> RowIter<'_> {
        RowIter {
            row: self.row(i),
            word: 0,
            bits: if self.n == 0 { 0 } else { self.row(i)[0] },
            n: self.n,
        }
    }

    pub fn transpose(&self) -> BitRel {
        let mut t = BitRel::new(self.n);
        for i in 0..self.n {
            for j in self.iter_row(i) {
                t.set(j, i);
            }
        }
        t
    }

    /// Reflexive-transitive closure in place (Warshall with word-parallel rows).
    pub fn reflexive_transitive_close(&mut self) {
        for i in 0..self.n {
            self.set(i, i);
        }
        for k in 0..self.n {
            let krow = self.row(k).to_vec();
            for i in 0..self.n {
                if self.get(i, k) {
                    let irow = self.row_mut(i);
                    for (w, kw) in irow.iter_mut().zip(&krow) {
                        *w |= kw;
                    }
                }
            }
        }
    }
}

pub struct RowIter<'a> {
    row: &'a [u64],
    word: usize,
    bits: u64,
    n: usize,
}

impl Iterator for RowIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let b = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                let idx = self.word * 64 + b;
                return if idx < self.n { Some(idx) } else { None };
            }
            self.word += 1;
            if self.word >= self.row.len() {
                return None;
            }
            self.bits = self.row[self.word];
        }
    }
}
