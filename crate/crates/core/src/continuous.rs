//! Continuous Petri net semantics: maximal fireable sets, maximum-support
//! solutions of the marking equation, and continuous reachability and
//! coverability decisions with re-checkable certificates.
//!
//! Continuous reachability `M ->* M'` holds exactly when some nonnegative
//! rational solution `x` of the marking equation has a support that can be
//! saturated forward from `M` and backward from `M'`. The decision procedure
//! below iterates maximum-support solving against both saturations until the
//! support stabilizes.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

use crate::exact::{lp_solve, support_rat, LinearSystem, LpResult, Rat, VarDomain};
use crate::model::{Marking, PetriNet, PetriNetSystem, PlaceId, TransId};
use crate::par;

/// A set of transitions, ordered for deterministic iteration.
pub type SupportSet = BTreeSet<TransId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Certificate for a continuous reachability or coverability decision.
#[derive(Clone, Debug)]
pub struct ContinuousCertificate {
    pub support: SupportSet,
    /// Nonnegative rational solution whose support equals `support`.
    pub solution: Vec<Rat>,
    pub forward_ok: bool,
    pub backward_ok: bool,
}

/// The unique maximal subset of `allowed` saturable from `m`: repeatedly add
/// transitions whose pre-places (post-places for backward) already carry
/// mass, marking their outputs. Order independent.
pub fn max_fireable(
    net: &PetriNet,
    m: &Marking,
    allowed: &SupportSet,
    direction: Direction,
) -> SupportSet {
    let mut marked: BTreeSet<PlaceId> = m.support();
    let mut fired = SupportSet::new();
    loop {
        let mut grew = false;
        for &t in allowed {
            if fired.contains(&t) {
                continue;
            }
            let inputs_ready = match direction {
                Direction::Forward => net.pre_places(t).all(|p| marked.contains(&p)),
                Direction::Backward => net.post_places(t).all(|p| marked.contains(&p)),
            };
            if inputs_ready {
                fired.insert(t);
                match direction {
                    Direction::Forward => marked.extend(net.post_places(t)),
                    Direction::Backward => marked.extend(net.pre_places(t)),
                }
                grew = true;
            }
        }
        if !grew {
            return fired;
        }
    }
}

/// Marking-equation system `A v = delta` over `v >= 0` rational with columns
/// outside `restrict` pinned to zero.
fn marking_equation_system(net: &PetriNet, delta: &[BigInt], restrict: &SupportSet) -> LinearSystem {
    let np = net.num_places();
    let nt = net.num_transitions();
    let coeffs = (0..np)
        .map(|p| (0..nt).map(|t| BigInt::from(net.incidence(p, t))).collect())
        .collect();
    let domains = (0..nt)
        .map(|t| if restrict.contains(&t) { VarDomain::RatNonNeg } else { VarDomain::FixedZero })
        .collect();
    LinearSystem::new(coeffs, delta.to_vec(), domains)
}

/// Turn an "objective is positive or unbounded" outcome into a feasible point
/// with a positive objective coordinate.
fn positive_point(result: LpResult) -> Option<Vec<Rat>> {
    match result {
        LpResult::Feasible(sol) => {
            if sol.objective.as_ref().is_some_and(Rat::is_positive) {
                Some(sol.values)
            } else {
                None
            }
        }
        LpResult::Unbounded { point, ray } => {
            Some(point.iter().zip(&ray).map(|(p, r)| p + r).collect())
        }
        LpResult::Infeasible(_) => None,
    }
}

/// Maximum-support nonnegative rational solution of `A v = delta` with
/// support inside `restrict`: `None` when infeasible, otherwise the support
/// together with one solution attaining it (an average of per-transition
/// positivity witnesses; supports of solutions are closed under averaging).
pub fn max_support_solution(
    net: &PetriNet,
    delta: &[BigInt],
    restrict: &SupportSet,
) -> Option<(SupportSet, Vec<Rat>)> {
    let sys = marking_equation_system(net, delta, restrict);
    let base = match lp_solve(&sys, None) {
        LpResult::Feasible(sol) => sol.values,
        LpResult::Infeasible(_) => return None,
        LpResult::Unbounded { .. } => unreachable!("feasibility solve cannot be unbounded"),
    };
    let base_support = support_rat(&base);
    // Transitions not already covered get an independent positivity test;
    // the tests are disjoint work items and run in input order regardless of
    // the execution schedule.
    let candidates: Vec<TransId> =
        restrict.iter().copied().filter(|t| !base_support.contains(t)).collect();
    let extras = par::map_slice(&candidates, |&t| positive_point(lp_solve(&sys, Some(t))));

    let mut witnesses: Vec<Vec<Rat>> = vec![base];
    witnesses.extend(extras.into_iter().flatten());
    let count = Rat::from_integer(BigInt::from(witnesses.len() as u64));
    let nt = net.num_transitions();
    let mut avg = vec![Rat::zero(); nt];
    for w in &witnesses {
        for (a, v) in avg.iter_mut().zip(w) {
            if !v.is_zero() {
                *a += v;
            }
        }
    }
    for a in avg.iter_mut() {
        if !a.is_zero() {
            *a /= &count;
        }
    }
    let support = support_rat(&avg);
    debug_assert!(sys.check_rat(&avg));
    Some((support, avg))
}

/// Decide continuous reachability of `final` from `initial`, with a
/// certificate. Identical markings are reachable via the empty run.
pub fn continuous_reachable(sys: &PetriNetSystem) -> Option<ContinuousCertificate> {
    if sys.initial == sys.final_marking {
        return Some(ContinuousCertificate {
            support: SupportSet::new(),
            solution: vec![Rat::zero(); sys.net.num_transitions()],
            forward_ok: true,
            backward_ok: true,
        });
    }
    let delta = sys.delta();
    let mut allowed: SupportSet = (0..sys.net.num_transitions()).collect();
    loop {
        let (support, solution) = max_support_solution(&sys.net, &delta, &allowed)?;
        if support.is_empty() {
            // Zero solution with distinct markings: unreachable.
            return None;
        }
        let fwd = max_fireable(&sys.net, &sys.initial, &support, Direction::Forward);
        let bwd = max_fireable(&sys.net, &sys.final_marking, &support, Direction::Backward);
        let trimmed: SupportSet = support.intersection(&fwd).copied().collect();
        let trimmed: SupportSet = trimmed.intersection(&bwd).copied().collect();
        if trimmed == support {
            return Some(ContinuousCertificate {
                support,
                solution,
                forward_ok: true,
                backward_ok: true,
            });
        }
        allowed = trimmed;
    }
}

/// Coverability system: `A v + m >= 0` via slack variables, one per place.
/// Variables are `v` (transitions, possibly pinned) then slacks; slack of
/// `target` equals the reached mass on it.
fn cover_system(net: &PetriNet, m: &Marking, restrict: &SupportSet) -> (LinearSystem, usize) {
    let np = net.num_places();
    let nt = net.num_transitions();
    let mut coeffs = Vec::with_capacity(np);
    let mut rhs = Vec::with_capacity(np);
    for p in 0..np {
        let mut row: Vec<BigInt> = (0..nt).map(|t| BigInt::from(net.incidence(p, t))).collect();
        for s in 0..np {
            row.push(if s == p { BigInt::from(-1) } else { BigInt::zero() });
        }
        coeffs.push(row);
        rhs.push(-BigInt::from(m.0[p].clone()));
    }
    let mut domains: Vec<VarDomain> = (0..nt)
        .map(|t| if restrict.contains(&t) { VarDomain::RatNonNeg } else { VarDomain::FixedZero })
        .collect();
    domains.extend(std::iter::repeat_n(VarDomain::RatNonNeg, np));
    (LinearSystem::new(coeffs, rhs, domains), nt)
}

/// Decide whether some continuous run from `m` puts positive mass on
/// `target`. Only the forward saturation applies; the reached marking is
/// existential. A target already marked is covered by the empty run.
pub fn continuous_coverable(
    net: &PetriNet,
    m: &Marking,
    target: PlaceId,
) -> Option<ContinuousCertificate> {
    if !m.0[target].is_zero() {
        return Some(ContinuousCertificate {
            support: SupportSet::new(),
            solution: vec![Rat::zero(); net.num_transitions()],
            forward_ok: true,
            backward_ok: true,
        });
    }
    let mut allowed: SupportSet = (0..net.num_transitions()).collect();
    loop {
        let (sys, nt) = cover_system(net, m, &allowed);
        let target_var = nt + target;
        let base = positive_point(lp_solve(&sys, Some(target_var)))?;
        let base_support: SupportSet =
            support_rat(&base).into_iter().filter(|&v| v < nt).collect();
        let candidates: Vec<TransId> =
            allowed.iter().copied().filter(|t| !base_support.contains(t)).collect();
        // Positivity per transition needs only target mass >= 0, which the
        // system already enforces; averaging with `base` keeps the target
        // coordinate positive.
        let extras = par::map_slice(&candidates, |&t| match lp_solve(&sys, Some(t)) {
            LpResult::Feasible(sol) => {
                if sol.objective.as_ref().is_some_and(Rat::is_positive) {
                    Some(sol.values)
                } else {
                    None
                }
            }
            LpResult::Unbounded { point, ray } => {
                Some(point.iter().zip(&ray).map(|(p, r)| p + r).collect())
            }
            LpResult::Infeasible(_) => None,
        });
        let mut witnesses: Vec<Vec<Rat>> = vec![base];
        witnesses.extend(extras.into_iter().flatten());
        let count = Rat::from_integer(BigInt::from(witnesses.len() as u64));
        let mut avg = vec![Rat::zero(); nt];
        for w in &witnesses {
            for (a, v) in avg.iter_mut().zip(w.iter().take(nt)) {
                if !v.is_zero() {
                    *a += v;
                }
            }
        }
        for a in avg.iter_mut() {
            if !a.is_zero() {
                *a /= &count;
            }
        }
        let support = support_rat(&avg);
        let fwd = max_fireable(net, m, &support, Direction::Forward);
        let trimmed: SupportSet = support.intersection(&fwd).copied().collect();
        if trimmed == support {
            return Some(ContinuousCertificate {
                support,
                solution: avg,
                forward_ok: true,
                backward_ok: true,
            });
        }
        allowed = trimmed;
    }
}

/// Re-check a reachability certificate from scratch: exact marking equation,
/// support equality, and both saturations.
pub fn verify_reachability_certificate(
    sys: &PetriNetSystem,
    cert: &ContinuousCertificate,
) -> Result<(), String> {
    if cert.solution.len() != sys.net.num_transitions() {
        return Err("solution width mismatch".into());
    }
    if support_rat(&cert.solution) != cert.support {
        return Err("solution support differs from certificate support".into());
    }
    if cert.solution.iter().any(Rat::is_negative) {
        return Err("negative solution entry".into());
    }
    let delta = sys.delta();
    for (p, d) in delta.iter().enumerate() {
        let mut acc = -Rat::from_integer(d.clone());
        for (t, v) in cert.solution.iter().enumerate() {
            if !v.is_zero() {
                acc += Rat::from_integer(BigInt::from(sys.net.incidence(p, t))) * v;
            }
        }
        if !acc.is_zero() {
            return Err(format!("marking equation violated at place {p}"));
        }
    }
    let fwd = max_fireable(&sys.net, &sys.initial, &cert.support, Direction::Forward);
    if fwd != cert.support {
        return Err("forward saturation does not cover the support".into());
    }
    let bwd = max_fireable(&sys.net, &sys.final_marking, &cert.support, Direction::Backward);
    if bwd != cert.support {
        return Err("backward saturation does not cover the support".into());
    }
    Ok(())
}

/// Re-check a coverability certificate: `A v + m >= 0`, positive target mass
/// (unless already marked), support equality and forward saturation.
pub fn verify_coverability_certificate(
    net: &PetriNet,
    m: &Marking,
    target: PlaceId,
    cert: &ContinuousCertificate,
) -> Result<(), String> {
    if cert.solution.len() != net.num_transitions() {
        return Err("solution width mismatch".into());
    }
    if support_rat(&cert.solution) != cert.support {
        return Err("solution support differs from certificate support".into());
    }
    if cert.solution.iter().any(Rat::is_negative) {
        return Err("negative solution entry".into());
    }
    let mut reached: Vec<Rat> = m.0.iter().map(|c| Rat::from_integer(BigInt::from(c.clone()))).collect();
    for (t, v) in cert.solution.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        for (p, r) in reached.iter_mut().enumerate() {
            let a = net.incidence(p, t);
            if a != 0 {
                *r += Rat::from_integer(BigInt::from(a)) * v;
            }
        }
    }
    if reached.iter().any(Rat::is_negative) {
        return Err("reached marking has a negative entry".into());
    }
    if !reached[target].is_positive() && m.0[target].is_zero() {
        return Err("target mass is not positive".into());
    }
    let fwd = max_fireable(net, m, &cert.support, Direction::Forward);
    if fwd != cert.support {
        return Err("forward saturation does not cover the support".into());
    }
    Ok(())
}
