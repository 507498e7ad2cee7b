//! Integer feasibility by branch-and-bound on the exact rational relaxation.
//!
//! The search first rules out solutions over the full integer lattice
//! (ignoring sign constraints): when that system has no solution, branching
//! cannot help and `Infeasible` is immediate. Otherwise nodes branch on the
//! most fractional variable, depth first, and the node budget is the only
//! thing that can stop the search early; running out is reported as
//! `BudgetExceeded`, never as `Infeasible`.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::{integer_solve, lp_solve, IntResult, LinearSystem, LpResult, Rat, VarDomain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IlpResult {
    Feasible(Vec<BigInt>),
    Infeasible,
    BudgetExceeded,
}

struct Node {
    lb: Vec<BigInt>,
    ub: Vec<Option<BigInt>>,
}

/// Decide feasibility of `A x = b` with `IntNonNeg`/`IntAtLeastOne`/
/// `FixedZero` domains within `node_budget` relaxation solves.
pub fn ilp_feasible(sys: &LinearSystem, node_budget: u64) -> IlpResult {
    assert!(node_budget > 0, "node budget must be positive");
    for d in &sys.domains {
        assert!(
            matches!(d, VarDomain::IntNonNeg | VarDomain::IntAtLeastOne | VarDomain::FixedZero),
            "ilp_feasible expects nonnegative integer or pinned columns"
        );
    }

    // Lattice precheck: relax signs to all of Z. Infeasibility there is
    // inherited exactly.
    let lattice = LinearSystem::new(
        sys.coeffs.clone(),
        sys.rhs.clone(),
        sys.domains
            .iter()
            .map(|d| match d {
                VarDomain::FixedZero => VarDomain::FixedZero,
                _ => VarDomain::Int,
            })
            .collect(),
    );
    if integer_solve(&lattice) == IntResult::Infeasible {
        return IlpResult::Infeasible;
    }

    let cols = sys.free_columns();
    let base_lb: Vec<BigInt> = cols
        .iter()
        .map(|&j| match sys.domains[j] {
            VarDomain::IntAtLeastOne => BigInt::one(),
            _ => BigInt::zero(),
        })
        .collect();

    let mut stack = vec![Node { lb: base_lb, ub: vec![None; cols.len()] }];
    let mut nodes = 0u64;
    while let Some(node) = stack.pop() {
        if nodes >= node_budget {
            return IlpResult::BudgetExceeded;
        }
        nodes += 1;
        let Some(x) = solve_relaxation(sys, &cols, &node) else { continue };
        match most_fractional(&x) {
            None => {
                let mut y = vec![BigInt::zero(); sys.num_vars()];
                for (k, &j) in cols.iter().enumerate() {
                    y[j] = x[k].to_integer();
                }
                assert!(sys.check_int(&y), "internal error: ILP solution failed substitution");
                return IlpResult::Feasible(y);
            }
            Some(j) => {
                let floor = x[j].floor().to_integer();
                let mut up = Node { lb: node.lb.clone(), ub: node.ub.clone() };
                up.lb[j] = &floor + 1;
                let mut down = node;
                down.ub[j] = Some(floor);
                // Depth first, lower branch explored first.
                stack.push(up);
                stack.push(down);
            }
        }
    }
    IlpResult::Infeasible
}

/// Solve the rational relaxation of a node. Variables are shifted by their
/// lower bound and upper bounds become slack rows.
fn solve_relaxation(sys: &LinearSystem, cols: &[usize], node: &Node) -> Option<Vec<Rat>> {
    let n = cols.len();
    let ub_rows: Vec<(usize, BigInt)> = node
        .ub
        .iter()
        .enumerate()
        .filter_map(|(k, ub)| ub.as_ref().map(|u| (k, u - &node.lb[k])))
        .collect();
    // A shifted variable with an empty box means an infeasible node.
    if ub_rows.iter().any(|(_, gap)| gap.is_negative()) {
        return None;
    }
    let num_slack = ub_rows.len();
    let mut coeffs: Vec<Vec<BigInt>> = Vec::with_capacity(sys.num_rows() + num_slack);
    let mut rhs: Vec<BigInt> = Vec::with_capacity(sys.num_rows() + num_slack);
    for (row, b) in sys.coeffs.iter().zip(&sys.rhs) {
        let mut r: Vec<BigInt> = cols.iter().map(|&j| row[j].clone()).collect();
        r.extend(std::iter::repeat_with(BigInt::zero).take(num_slack));
        let mut shift = b.clone();
        for (k, &j) in cols.iter().enumerate() {
            if !node.lb[k].is_zero() && !row[j].is_zero() {
                shift -= &row[j] * &node.lb[k];
            }
        }
        coeffs.push(r);
        rhs.push(shift);
    }
    for (s, (k, gap)) in ub_rows.iter().enumerate() {
        let mut r = vec![BigInt::zero(); n + num_slack];
        r[*k] = BigInt::one();
        r[n + s] = BigInt::one();
        coeffs.push(r);
        rhs.push(gap.clone());
    }
    let domains = vec![VarDomain::RatNonNeg; n + num_slack];
    let relax = LinearSystem::new(coeffs, rhs, domains);
    match lp_solve(&relax, None) {
        LpResult::Feasible(sol) => Some(
            (0..n)
                .map(|k| sol.values[k].clone() + Rat::from_integer(node.lb[k].clone()))
                .collect(),
        ),
        LpResult::Infeasible(_) => None,
        LpResult::Unbounded { .. } => unreachable!("feasibility solve cannot be unbounded"),
    }
}

/// Index whose fractional part is closest to 1/2; `None` when all integral.
fn most_fractional(x: &[Rat]) -> Option<usize> {
    let half = Ratio::new(BigInt::one(), BigInt::from(2));
    let mut best: Option<(usize, Rat)> = None;
    for (j, v) in x.iter().enumerate() {
        let frac = v - v.floor();
        if frac.is_zero() {
            continue;
        }
        let dist = (&frac - &half).abs();
        best = match best {
            None => Some((j, dist)),
            Some((bj, bd)) => {
                if dist < bd {
                    Some((j, dist))
                } else {
                    Some((bj, bd))
                }
            }
        };
    }
    best.map(|(j, _)| j)
}
