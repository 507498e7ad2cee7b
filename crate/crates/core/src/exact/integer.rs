//! Integer linear systems `A y = b` over `Z`, solved by unimodular column
//! elimination (Hermite-style). Infeasibility is a lattice fact, never a
//! search budget.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{LinearSystem, VarDomain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntResult {
    Feasible(Vec<BigInt>),
    Infeasible,
}

/// Solve over the integers with `Int`/`FixedZero` domain tags. Pinned columns
/// are removed before elimination and reported as zero.
pub fn integer_solve(sys: &LinearSystem) -> IntResult {
    for d in &sys.domains {
        assert!(
            matches!(d, VarDomain::Int | VarDomain::FixedZero),
            "integer_solve expects integer or pinned columns"
        );
    }
    let cols = sys.free_columns();
    let n = cols.len();
    let m = sys.num_rows();

    // Column-major working copy: mat[j] is column j restricted to free vars.
    let mut mat: Vec<Vec<BigInt>> = cols
        .iter()
        .map(|&j| (0..m).map(|i| sys.coeffs[i][j].clone()).collect())
        .collect();
    // Unimodular transform accumulator, also column-major: columns of `mat`
    // stay equal to A * u throughout.
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|k| if k == j { BigInt::from(1) } else { BigInt::zero() }).collect())
        .collect();

    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut next = 0usize;
    for i in 0..m {
        loop {
            // Smallest nonzero entry of row i among columns >= next.
            let mut best: Option<usize> = None;
            for j in next..n {
                if !mat[j][i].is_zero() {
                    best = match best {
                        None => Some(j),
                        Some(b) if mat[j][i].abs() < mat[b][i].abs() => Some(j),
                        keep => keep,
                    };
                }
            }
            let Some(p) = best else { break };
            let mut others = false;
            for j in next..n {
                if j == p || mat[j][i].is_zero() {
                    continue;
                }
                others = true;
                let q = rounded_div(&mat[j][i], &mat[p][i]);
                if !q.is_zero() {
                    col_submul(&mut mat, &mut u, j, p, &q);
                }
            }
            if !others {
                mat.swap(p, next);
                u.swap(p, next);
                pivot_of_row[i] = Some(next);
                next += 1;
                break;
            }
        }
    }

    // Forward substitution over the echelon columns.
    let mut z = vec![BigInt::zero(); n];
    for i in 0..m {
        let mut s = sys.rhs[i].clone();
        for (j, zj) in z.iter().enumerate() {
            if !zj.is_zero() && !mat[j][i].is_zero() {
                s -= &mat[j][i] * zj;
            }
        }
        match pivot_of_row[i] {
            Some(p) => {
                let d = &mat[p][i];
                let (q, r) = s.div_rem(d);
                if !r.is_zero() {
                    return IntResult::Infeasible;
                }
                z[p] = q;
            }
            None => {
                if !s.is_zero() {
                    return IntResult::Infeasible;
                }
            }
        }
    }

    // Map back through the accumulated transform.
    let mut y = vec![BigInt::zero(); sys.num_vars()];
    for (j, col) in u.iter().enumerate() {
        if z[j].is_zero() {
            continue;
        }
        for (k, &var) in cols.iter().enumerate() {
            if !col[k].is_zero() {
                y[var] += &col[k] * &z[j];
            }
        }
    }
    assert!(sys.check_int(&y), "internal error: integer solution failed substitution");
    IntResult::Feasible(y)
}

/// Division rounded to the nearest integer; keeps remainders shrinking.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    if r.abs() * 2 > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

fn col_submul(mat: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], j: usize, p: usize, q: &BigInt) {
    for i in 0..mat[j].len() {
        if !mat[p][i].is_zero() {
            let d = &mat[p][i] * q;
            mat[j][i] -= d;
        }
    }
    for k in 0..u[j].len() {
        if !u[p][k].is_zero() {
            let d = &u[p][k] * q;
            u[j][k] -= d;
        }
    }
}
