//! Dense matrices over GF(2) with bit-packed rows.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Gf2Matrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// `row[dst] ^= row[src]`.
    pub fn row_add(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        for w in 0..self.words {
            let s = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= s;
        }
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Column indices set in row `r`.
    pub fn row_ones(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    /// Reduces to reduced row echelon form using only row additions; every
    /// addition `(src, dst)` is reported to `record` in order. Returns the rank.
    pub fn gauss_reduce(&mut self, mut record: impl FnMut(usize, usize)) -> usize {
        let mut pivot_row = 0;
        for c in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(p) = (pivot_row..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            if p != pivot_row {
                self.row_add(p, pivot_row);
                record(p, pivot_row);
            }
            for r in 0..self.rows {
                if r != pivot_row && self.get(r, c) {
                    self.row_add(pivot_row, r);
                    record(pivot_row, r);
                }
            }
            pivot_row += 1;
        }
        pivot_row
    }

    pub fn rank(&self) -> usize {
        self.clone().gauss_reduce(|_, _| {})
    }

    /// Some `x` with `self * x = b`, if the system is consistent.
    pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Gf2Matrix::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                b[r]
            }
        });
        // Eliminate only over the coefficient columns.
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for c in 0..self.cols {
            if pivot_row == aug.rows {
                break;
            }
            let Some(p) = (pivot_row..aug.rows).find(|&r| aug.get(r, c)) else {
                continue;
            };
            if p != pivot_row {
                aug.row_add(p, pivot_row);
            }
            for r in 0..aug.rows {
                if r != pivot_row && aug.get(r, c) {
                    aug.row_add(pivot_row, r);
                }
            }
            pivots.push(c);
            pivot_row += 1;
        }
        if (pivot_row..aug.rows).any(|r| aug.get(r, self.cols)) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Some(x)
    }

    pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
        (0..self.rows)
            .map(|r| (0..self.cols).filter(|&c| self.get(r, c) && x[c]).count() % 2 == 1)
            .collect()
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_matrix() -> impl Strategy<Value = Gf2Matrix> {
        (1usize..8, 1usize..70).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c)
                .prop_map(move |bits| Gf2Matrix::from_fn(r, c, |i, j| bits[i * c + j]))
        })
    }

    #[test]
    fn reduces_identity_like() {
        let mut m = Gf2Matrix::from_fn(3, 3, |r, c| r <= c);
        let mut ops = Vec::new();
        assert_eq!(m.gauss_reduce(|s, d| ops.push((s, d))), 3);
        assert_eq!(m, Gf2Matrix::from_fn(3, 3, |r, c| r == c));
        assert!(!ops.is_empty());
    }

    #[test]
    fn inconsistent_system_has_no_solution() {
        let m = Gf2Matrix::from_fn(2, 1, |_, _| true);
        assert!(m.solve(&[true, false]).is_none());
        assert_eq!(m.solve(&[true, true]), Some(vec![true]));
    }

    proptest! {
        #[test]
        fn recorded_ops_replay_to_the_reduced_form(m in arb_matrix()) {
            let mut reduced = m.clone();
            let mut ops = Vec::new();
            let rank = reduced.gauss_reduce(|s, d| ops.push((s, d)));
            let mut replay = m.clone();
            for (s, d) in ops {
                replay.row_add(s, d);
            }
            prop_assert_eq!(&replay, &reduced);
            // Pivot columns are unit vectors.
            for r in 0..rank {
                let lead = (0..reduced.cols()).find(|&c| reduced.get(r, c)).unwrap();
                prop_assert!((0..reduced.rows()).all(|o| o == r || !reduced.get(o, lead)));
            }
        }

        #[test]
        fn solutions_satisfy_the_system(m in arb_matrix(), seed in any::<u64>()) {
            let x: Vec<bool> = (0..m.cols()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let b = m.mul_vec(&x);
            let sol = m.solve(&b).expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&sol), b);
        }
    }
}
