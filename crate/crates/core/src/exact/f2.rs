//! Linear systems over the two-element field, on bit-packed rows.

/// `A v = b` over GF(2). Rows are packed into 64-bit words.
#[derive(Clone, Debug, Default)]
pub struct F2System {
    num_vars: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
    rhs: Vec<bool>,
}

impl F2System {
    pub fn new(num_vars: usize) -> Self {
        F2System { num_vars, words: num_vars.div_ceil(64), rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Add the row `sum v[i] = rhs (mod 2)` where `i` ranges over `vars`;
    /// repeated indices toggle, so integer coefficients reduce naturally.
    pub fn add_row(&mut self, vars: impl IntoIterator<Item = usize>, rhs: bool) {
        let mut row = vec![0u64; self.words];
        for v in vars {
            assert!(v < self.num_vars, "variable index out of range");
            row[v / 64] ^= 1u64 << (v % 64);
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Exact substitution check.
    pub fn check(&self, v: &[bool]) -> bool {
        if v.len() != self.num_vars {
            return false;
        }
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = false;
            for (w, word) in row.iter().enumerate() {
                let mut bits = *word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    if v[w * 64 + b] {
                        acc = !acc;
                    }
                    bits &= bits - 1;
                }
            }
            if acc != self.rhs[i] {
                return false;
            }
        }
        true
    }
}

/// Gaussian elimination mod 2. Free variables are set to zero.
pub fn f2_solve(sys: &F2System) -> Option<Vec<bool>> {
    let mut rows = sys.rows.clone();
    let mut rhs = sys.rhs.clone();
    let m = rows.len();
    let mut pivot_col_of_row: Vec<Option<usize>> = vec![None; m];
    let mut r = 0usize;
    for col in 0..sys.num_vars {
        let word = col / 64;
        let bit = 1u64 << (col % 64);
        let Some(p) = (r..m).find(|&i| rows[i][word] & bit != 0) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        for i in 0..m {
            if i != r && rows[i][word] & bit != 0 {
                let (head, tail) = if i < r {
                    let (a, b) = rows.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in head.iter_mut().zip(tail.iter()) {
                    *x ^= *y;
                }
                let flip = rhs[r];
                if flip {
                    rhs[i] = !rhs[i];
                }
            }
        }
        pivot_col_of_row[r] = Some(col);
        r += 1;
        if r == m {
            break;
        }
    }
    // Rows reduced to zero must have a zero right-hand side.
    for i in 0..m {
        if pivot_col_of_row[i].is_none() {
            debug_assert!(rows[i].iter().all(|&w| w == 0));
            if rhs[i] {
                return None;
            }
        }
    }
    let mut v = vec![false; sys.num_vars];
    for i in 0..m {
        if let Some(col) = pivot_col_of_row[i] {
            v[col] = rhs[i];
        }
    }
    debug_assert!(sys.check(&v));
    Some(v)
}
