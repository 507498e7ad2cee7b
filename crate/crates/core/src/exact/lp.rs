//! Exact two-phase simplex over big rationals with Bland's rule.
//!
//! Inputs are equation systems `A x = b` with `x >= 0` (after dropping pinned
//! columns). Infeasibility comes with a Farkas certificate, unboundedness with
//! a feasible point plus an improving ray, so every outcome can be checked by
//! exact substitution.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{LinearSystem, Rat, VarDomain};

/// Row multipliers proving `A x = b, x >= 0` infeasible: `y^T A <= 0`
/// componentwise on the free columns while `y^T b > 0`.
#[derive(Clone, Debug)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rat>,
}

impl FarkasCertificate {
    /// Exact verification of the certificate against the original system.
    pub fn verify(&self, sys: &LinearSystem) -> bool {
        if self.multipliers.len() != sys.num_rows() {
            return false;
        }
        let mut rhs_combo = Rat::zero();
        for (y, b) in self.multipliers.iter().zip(&sys.rhs) {
            rhs_combo += y * Rat::from_integer(b.clone());
        }
        if !rhs_combo.is_positive() {
            return false;
        }
        for j in sys.free_columns() {
            let mut col_combo = Rat::zero();
            for (y, row) in self.multipliers.iter().zip(&sys.coeffs) {
                if !row[j].is_zero() {
                    col_combo += y * Rat::from_integer(row[j].clone());
                }
            }
            if col_combo.is_positive() {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Values for all variables of the system, pinned columns included.
    pub values: Vec<Rat>,
    /// Value of the objective variable, when one was given.
    pub objective: Option<Rat>,
}

#[derive(Clone, Debug)]
pub enum LpResult {
    Feasible(LpSolution),
    Infeasible(FarkasCertificate),
    /// Only possible when maximizing: `point` is feasible and `point + t*ray`
    /// stays feasible with growing objective for every `t >= 0`.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

impl LpResult {
    pub fn feasible(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Feasible(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    /// Each row has `rhs_idx + 1` entries, the right-hand side last.
    rows: Vec<Vec<Rat>>,
    z: Vec<Rat>,
    basis: Vec<usize>,
    n_struct: usize,
    rhs_idx: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        debug_assert!(!piv.is_zero());
        if !piv.is_one() {
            for x in self.rows[row].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        if !self.z[col].is_zero() {
            let f = self.z[col].clone();
            for (x, p) in self.z.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the smallest index with a negative
    /// reduced cost; the leaving row minimizes the ratio, ties broken by the
    /// smallest basis variable. `Err(col)` signals an unbounded direction on
    /// the entering column.
    fn optimize(&mut self, allow_enter: impl Fn(usize) -> bool) -> Result<(), usize> {
        loop {
            let mut entering = None;
            for j in 0..self.rhs_idx {
                if self.z[j].is_negative() && allow_enter(j) {
                    entering = Some(j);
                    break;
                }
            }
            let Some(e) = entering else { return Ok(()) };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][e].is_positive() {
                    let ratio = &self.rows[i][self.rhs_idx] / &self.rows[i][e];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, e),
                None => return Err(e),
            }
        }
    }
}

/// Solve `A x = b` restricted to `RatNonNeg`/`FixedZero` columns, optionally
/// maximizing one variable. Feasible answers are verified by substitution
/// before being returned.
pub fn lp_solve(sys: &LinearSystem, objective: Option<usize>) -> LpResult {
    for d in &sys.domains {
        assert!(
            matches!(d, VarDomain::RatNonNeg | VarDomain::FixedZero),
            "lp_solve expects rational nonnegative or pinned columns"
        );
    }
    let cols = sys.free_columns();
    let n = cols.len();
    let m = sys.num_rows();
    let rhs_idx = n + m;

    // Rows are normalized to a nonnegative right-hand side; the flips are
    // remembered for the certificate.
    let mut sign = vec![false; m];
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (i, flip) in sign.iter_mut().enumerate() {
        let neg = sys.rhs[i].is_negative();
        *flip = neg;
        let mut row: Vec<Rat> = Vec::with_capacity(rhs_idx + 1);
        for &j in &cols {
            let c = Rat::from_integer(sys.coeffs[i][j].clone());
            row.push(if neg { -c } else { c });
        }
        for k in 0..m {
            row.push(if k == i { Rat::one() } else { Rat::zero() });
        }
        let b = Rat::from_integer(sys.rhs[i].clone());
        row.push(if neg { -b } else { b });
        rows.push(row);
    }

    // Phase 1: maximize -(sum of artificials) from the all-artificial basis.
    let mut z = vec![Rat::zero(); rhs_idx + 1];
    for (j, zj) in z.iter_mut().enumerate().take(n) {
        let mut acc = Rat::zero();
        for row in &rows {
            acc -= &row[j];
        }
        *zj = acc;
    }
    let mut zrhs = Rat::zero();
    for row in &rows {
        zrhs -= &row[rhs_idx];
    }
    z[rhs_idx] = zrhs;

    let mut t = Tableau { rows, z, basis: (n..n + m).collect(), n_struct: n, rhs_idx };
    t.optimize(|_| true).expect("phase 1 is bounded");

    if t.z[rhs_idx].is_negative() {
        // Infeasible: the dual multipliers sit in the artificial columns of
        // the reduced-cost row, shifted by the artificial cost.
        let mut mult = vec![Rat::zero(); m];
        for i in 0..m {
            let y = t.z[n + i].clone() - Rat::one();
            mult[i] = if sign[i] { y } else { -y };
        }
        let cert = FarkasCertificate { multipliers: mult };
        assert!(cert.verify(sys), "internal error: Farkas certificate failed verification");
        return LpResult::Infeasible(cert);
    }

    // Drive leftover artificials out of the basis; a row without any nonzero
    // structural entry is redundant and gets dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let obj_col = objective.and_then(|v| cols.iter().position(|&c| c == v));
    if let Some(oc) = obj_col {
        // Phase 2: reduced costs for "maximize x_oc" over the current basis.
        let mut z = vec![Rat::zero(); rhs_idx + 1];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = Rat::zero();
            for (i, row) in t.rows.iter().enumerate() {
                if t.basis[i] == oc {
                    acc += &row[j];
                }
            }
            *zj = acc;
        }
        z[oc] -= Rat::one();
        t.z = z;
        let n_struct = t.n_struct;
        if let Err(e) = t.optimize(|j| j < n_struct) {
            let point = extract(&t, sys, &cols);
            let mut ray_cols = vec![Rat::zero(); n];
            ray_cols[e] = Rat::one();
            for (i, row) in t.rows.iter().enumerate() {
                if t.basis[i] < n && !row[e].is_zero() {
                    ray_cols[t.basis[i]] = -row[e].clone();
                }
            }
            let mut ray = vec![Rat::zero(); sys.num_vars()];
            for (k, &j) in cols.iter().enumerate() {
                ray[j] = ray_cols[k].clone();
            }
            debug_assert!(ray.iter().all(|r| !r.is_negative()));
            return LpResult::Unbounded { point, ray };
        }
    }

    let values = extract(&t, sys, &cols);
    assert!(sys.check_rat(&values), "internal error: LP solution failed substitution");
    let objective_value = objective.map(|v| values[v].clone());
    LpResult::Feasible(LpSolution { values, objective: objective_value })
}

fn extract(t: &Tableau, sys: &LinearSystem, cols: &[usize]) -> Vec<Rat> {
    let mut values = vec![Rat::zero(); sys.num_vars()];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < t.n_struct {
            values[cols[b]] = t.rows[i][t.rhs_idx].clone();
        }
    }
    values
}

#[allow(unused)]
fn big(n: i64) -> BigInt {
    BigInt::from(n)
}
