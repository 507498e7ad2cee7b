//! Exact arithmetic kernels: rational linear programming with certificates,
//! integer linear systems, GF(2) systems and small integer-program
//! feasibility.
//!
//! All solvers work over arbitrary-precision numbers and every `Feasible`
//! answer is checked by substitution before it is returned.

mod f2;
mod ilp;
mod integer;
mod lp;

pub use f2::{f2_solve, F2System};
pub use ilp::{ilp_feasible, IlpResult};
pub use integer::{integer_solve, IntResult};
pub use lp::{lp_solve, FarkasCertificate, LpResult, LpSolution};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// Exact rational scalar: reduced fraction of big integers, denominator > 0.
pub type Rat = num_rational::BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Domain tag for one variable of a [`LinearSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarDomain {
    /// Rational, >= 0.
    RatNonNeg,
    /// Integer, unconstrained sign.
    Int,
    /// Integer, >= 0.
    IntNonNeg,
    /// Integer, >= 1.
    IntAtLeastOne,
    /// Pinned to zero (column is dropped before solving).
    FixedZero,
}

/// A system of exact linear equations `A x = b` with per-variable domains.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Row-major coefficient matrix.
    pub coeffs: Vec<Vec<BigInt>>,
    pub rhs: Vec<BigInt>,
    pub domains: Vec<VarDomain>,
}

impl LinearSystem {
    pub fn new(coeffs: Vec<Vec<BigInt>>, rhs: Vec<BigInt>, domains: Vec<VarDomain>) -> Self {
        assert_eq!(coeffs.len(), rhs.len(), "row/rhs count mismatch");
        for row in &coeffs {
            assert_eq!(row.len(), domains.len(), "row width/domain count mismatch");
        }
        LinearSystem { coeffs, rhs, domains }
    }

    pub fn num_rows(&self) -> usize {
        self.coeffs.len()
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    /// Indices of the columns that are not pinned to zero.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.num_vars())
            .filter(|&j| self.domains[j] != VarDomain::FixedZero)
            .collect()
    }

    /// Exact residual `A x - b` for a rational candidate.
    pub fn residual_rat(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(x.len(), self.num_vars());
        self.coeffs
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut acc = -Rat::from_integer(b.clone());
                for (c, xj) in row.iter().zip(x) {
                    if !c.is_zero() && !xj.is_zero() {
                        acc += Rat::from_integer(c.clone()) * xj;
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact check that a rational candidate solves the system and respects
    /// the domain tags.
    pub fn check_rat(&self, x: &[Rat]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        for (j, xj) in x.iter().enumerate() {
            match self.domains[j] {
                VarDomain::RatNonNeg => {
                    if xj.is_negative() {
                        return false;
                    }
                }
                VarDomain::FixedZero
                    if !xj.is_zero() => {
                        return false;
                    }
                _ => {}
            }
        }
        self.residual_rat(x).iter().all(Rat::is_zero)
    }

    /// Exact check for an integer candidate.
    pub fn check_int(&self, y: &[BigInt]) -> bool {
        if y.len() != self.num_vars() {
            return false;
        }
        for (j, yj) in y.iter().enumerate() {
            match self.domains[j] {
                VarDomain::FixedZero => {
                    if !yj.is_zero() {
                        return false;
                    }
                }
                VarDomain::IntNonNeg | VarDomain::RatNonNeg => {
                    if yj.is_negative() {
                        return false;
                    }
                }
                VarDomain::IntAtLeastOne => {
                    if yj < &BigInt::from(1) {
                        return false;
                    }
                }
                VarDomain::Int => {}
            }
        }
        for (row, b) in self.coeffs.iter().zip(&self.rhs) {
            let mut acc = -b.clone();
            for (c, yj) in row.iter().zip(y) {
                if !c.is_zero() && !yj.is_zero() {
                    acc += c * yj;
                }
            }
            if !acc.is_zero() {
                return false;
            }
        }
        true
    }
}

/// A per-transition solution vector, in rational or integer mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionVector {
    Rational(Vec<Rat>),
    Integer(Vec<BigInt>),
}

impl SolutionVector {
    pub fn len(&self) -> usize {
        match self {
            SolutionVector::Rational(v) => v.len(),
            SolutionVector::Integer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Indices with a nonzero entry.
    pub fn support(&self) -> BTreeSet<usize> {
        match self {
            SolutionVector::Rational(v) => support_rat(v),
            SolutionVector::Integer(v) => support_int(v),
        }
    }
}

pub fn support_rat(v: &[Rat]) -> BTreeSet<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

pub fn support_int(v: &[BigInt]) -> BTreeSet<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// `sum_i |v_i|` of an integer vector.
pub fn one_norm_int(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).sum()
}

/// `sum_i |v_i|` of a rational vector.
pub fn one_norm_rat(v: &[Rat]) -> Rat {
    v.iter().map(|x| x.abs()).sum()
}

#[cfg(test)]
mod tests;
