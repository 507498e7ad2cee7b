//! Constructive witness runs: the three-stage scaling run turning a
//! continuous witness into a discrete one, and the insertion run absorbing an
//! extra integer solution into many parallel copies of a base run.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

use super::{RleBlock, RleRun, ScalingParams};
use crate::continuous::{ContinuousCertificate, Direction, SupportSet};
use crate::exact::one_norm_int;
use crate::model::{Marking, PetriNet, PetriNetSystem, PlaceId, TransId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no firing order realizes the requested occurrence counts")]
    SearchExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Run(RleRun),
    /// The expanded run would exceed the step budget; the parameters say by
    /// how much.
    TooLarge { params: Option<ScalingParams>, expanded_steps: BigUint },
}

/// Transitions of `allowed` in the order the saturation fixpoint discovers
/// them; each one's input places are marked by the start marking and the
/// outputs of its predecessors.
fn saturation_order(
    net: &PetriNet,
    m: &Marking,
    allowed: &SupportSet,
    direction: Direction,
) -> Vec<TransId> {
    let mut marked: BTreeSet<PlaceId> = m.support();
    let mut order = Vec::new();
    let mut fired = SupportSet::new();
    loop {
        let mut grew = false;
        for &t in allowed {
            if fired.contains(&t) {
                continue;
            }
            let ready = match direction {
                Direction::Forward => net.pre_places(t).all(|p| marked.contains(&p)),
                Direction::Backward => net.post_places(t).all(|p| marked.contains(&p)),
            };
            if ready {
                fired.insert(t);
                order.push(t);
                match direction {
                    Direction::Forward => marked.extend(net.post_places(t)),
                    Direction::Backward => marked.extend(net.pre_places(t)),
                }
                grew = true;
            }
        }
        if !grew {
            return order;
        }
    }
}

/// Body `t_1^{beta_{m-1}} t_2^{beta_{m-2}} ... t_m^{beta_0}` with
/// `beta_j = (w+1)^j`: each transition is repeated often enough to flood its
/// successors' input places.
fn saturation_body(order: &[TransId], w: u32) -> Vec<TransId> {
    let m = order.len();
    let mut body = Vec::new();
    for (i, &t) in order.iter().enumerate() {
        let exp = (w as u64 + 1).pow((m - 1 - i) as u32);
        body.extend(std::iter::repeat_n(t, exp as usize));
    }
    body
}

/// Build the three-stage scaling run `N*M ->* N*M'` for a reachability
/// certificate: a forward saturation block, a middle block carrying the bulk
/// of the scaled solution, and a reversed backward saturation block, each
/// repeated `gamma` times.
pub fn build_scaling_witness(
    sys: &PetriNetSystem,
    cert: &ContinuousCertificate,
    step_budget: u64,
) -> Result<WitnessOutcome, WitnessError> {
    if cert.support.is_empty() {
        if sys.initial != sys.final_marking {
            return Err(WitnessError::Precondition(
                "empty support with distinct markings".into(),
            ));
        }
        return Ok(WitnessOutcome::Run(RleRun::default()));
    }
    let net = &sys.net;
    let params = ScalingParams::from_solution(net, &cert.solution);
    let total = params.total_steps();
    if total > BigUint::from(step_budget) {
        return Ok(WitnessOutcome::TooLarge { params: Some(params), expanded_steps: total });
    }
    // Saturation exponents can exceed the budget even when the run total does
    // not only by a corrupted certificate; sizes are u64-safe from here on.
    let w = params.weight;

    let fwd_order = saturation_order(net, &sys.initial, &cert.support, Direction::Forward);
    if fwd_order.len() != cert.support.len() {
        return Err(WitnessError::Precondition("support is not forward saturable".into()));
    }
    let bwd_order =
        saturation_order(net, &sys.final_marking, &cert.support, Direction::Backward);
    if bwd_order.len() != cert.support.len() {
        return Err(WitnessError::Precondition("support is not backward saturable".into()));
    }
    let tau1 = saturation_body(&fwd_order, w);
    let mut tau2 = saturation_body(&bwd_order, w);
    tau2.reverse();

    // Middle Parikh: 4*beta*(k*x) minus both saturation bodies.
    let nt = net.num_transitions();
    let mut middle = vec![BigInt::zero(); nt];
    let four_beta = BigInt::from(4u8) * BigInt::from(params.beta.clone());
    let k_rat = crate::exact::Rat::from_integer(BigInt::from(params.k.clone()));
    for (t, v) in cert.solution.iter().enumerate() {
        if !v.is_zero() {
            let scaled = v * &k_rat;
            debug_assert!(scaled.is_integer());
            middle[t] = &four_beta * scaled.to_integer();
        }
    }
    for &t in tau1.iter().chain(&tau2) {
        middle[t] -= BigInt::one();
    }
    if middle.iter().any(|v| v.is_negative()) {
        return Err(WitnessError::Precondition("middle block went negative".into()));
    }
    let mut mid_body = Vec::new();
    for (t, v) in middle.iter().enumerate() {
        let reps = v.to_u64().expect("bounded by the step budget");
        mid_body.extend(std::iter::repeat_n(t, reps as usize));
    }

    let gamma = params.gamma.clone();
    let mut blocks = Vec::new();
    for body in [tau1, mid_body, tau2] {
        if !body.is_empty() {
            blocks.push(RleBlock { body, reps: gamma.clone() });
        }
    }
    Ok(WitnessOutcome::Run(RleRun { blocks }))
}

/// Depth-first search for a firing order with the requested occurrence
/// counts, with memoization on the remaining counts.
pub fn find_run_with_parikh(
    net: &PetriNet,
    start: &Marking,
    parikh: &[u64],
) -> Result<Vec<TransId>, WitnessError> {
    let nt = net.num_transitions();
    assert_eq!(parikh.len(), nt);
    let mut remaining: Vec<u64> = parikh.to_vec();
    let mut marking = start.clone();
    let mut path: Vec<TransId> = Vec::new();
    let mut choice: Vec<TransId> = vec![0];
    let mut dead: HashSet<Vec<u64>> = HashSet::new();
    let budget = 1_000_000usize;

    loop {
        if remaining.iter().all(|&r| r == 0) {
            return Ok(path);
        }
        let mut t = *choice.last().expect("one cursor per depth");
        let mut advanced = false;
        while t < nt {
            if remaining[t] > 0 && !dead.contains(&decremented(&remaining, t)) {
                if let Some(next) = marking.fire(net, t) {
                    *choice.last_mut().unwrap() = t;
                    remaining[t] -= 1;
                    marking = next;
                    path.push(t);
                    choice.push(0);
                    advanced = true;
                    break;
                }
            }
            t += 1;
        }
        if advanced {
            continue;
        }
        // Backtrack.
        if dead.len() >= budget {
            return Err(WitnessError::SearchExhausted);
        }
        dead.insert(remaining.clone());
        choice.pop();
        let Some(&last) = path.last() else {
            return Err(WitnessError::SearchExhausted);
        };
        path.pop();
        remaining[last] += 1;
        // Un-fire by replaying the incidence backwards.
        let mut back = marking.0.clone();
        for (p, c) in back.iter_mut().enumerate() {
            let v = BigInt::from(c.clone()) - BigInt::from(net.incidence(p, last));
            *c = v.to_biguint().expect("previous marking was valid");
        }
        marking = Marking(back);
        *choice.last_mut().expect("cursor for the resumed depth") = last + 1;
    }
}

fn decremented(remaining: &[u64], t: usize) -> Vec<u64> {
    let mut r = remaining.to_vec();
    r[t] -= 1;
    r
}

/// Build the insertion run `mu*M + L ->* mu*M' + L'` from a base run with
/// occurrence counts `base_parikh` (a run of `sys` from its initial to its
/// final marking) and an integer solution `y` of the `L`-to-`L'` marking
/// equation supported inside the base run. Stage one fans out prefixes of
/// the base run until every input place of the support holds a large pile,
/// stage two fires one block with counts `|y|*base + y`, and stage three
/// finishes the interrupted copies.
pub fn build_insertion_witness(
    sys: &PetriNetSystem,
    base_parikh: &[u64],
    y: &[BigInt],
    l: &Marking,
    l_prime: &Marking,
    step_budget: u64,
) -> Result<WitnessOutcome, WitnessError> {
    let net = &sys.net;
    let nt = net.num_transitions();
    if base_parikh.len() != nt || y.len() != nt {
        return Err(WitnessError::Precondition("vector width mismatch".into()));
    }
    let y_support: BTreeSet<usize> =
        (0..nt).filter(|&t| !y[t].is_zero()).collect();
    let base_support: BTreeSet<usize> = (0..nt).filter(|&t| base_parikh[t] > 0).collect();
    if !y_support.is_subset(&base_support) {
        return Err(WitnessError::Precondition(
            "integer solution leaks outside the base run support".into(),
        ));
    }
    // L' = L + A y, exactly.
    for p in 0..net.num_places() {
        let mut acc = BigInt::from(l.0[p].clone()) - BigInt::from(l_prime.0[p].clone());
        for (t, yt) in y.iter().enumerate() {
            let a = net.incidence(p, t);
            if a != 0 && !yt.is_zero() {
                acc += BigInt::from(a) * yt;
            }
        }
        if !acc.is_zero() {
            return Err(WitnessError::Precondition(format!(
                "markings do not differ by the solution at place {p}"
            )));
        }
    }

    let lambda_y = one_norm_int(y);
    if lambda_y.is_zero() {
        // mu = 0: nothing to do, L' = L was just checked.
        return Ok(WitnessOutcome::Run(RleRun::default()));
    }
    let lambda_x: u64 = base_parikh.iter().sum();
    if BigUint::from(lambda_x) > BigUint::from(step_budget) {
        return Ok(WitnessOutcome::TooLarge {
            params: None,
            expanded_steps: BigUint::from(lambda_x),
        });
    }

    let sigma = find_run_with_parikh(net, &sys.initial, base_parikh)?;
    let end = crate::oracle::replay(net, &sys.initial, &sigma)
        .map_err(|_| WitnessError::Precondition("base run does not replay".into()))?;
    if end != sys.final_marking {
        return Err(WitnessError::Precondition("base run misses the final marking".into()));
    }

    // First positive prefix index per input place of the support.
    let pre_places: Vec<PlaceId> = net.pre_of_set(&base_support).into_iter().collect();
    let mut first_index: Vec<(PlaceId, usize)> = Vec::with_capacity(pre_places.len());
    {
        let mut m = sys.initial.clone();
        let mut pending: BTreeSet<PlaceId> = pre_places.iter().copied().collect();
        pending.retain(|&p| m.0[p].is_zero());
        for p in pre_places.iter().filter(|p| !pending.contains(p)) {
            first_index.push((*p, 0));
        }
        for (i, &t) in sigma.iter().enumerate() {
            if pending.is_empty() {
                break;
            }
            m = m.fire(net, t).expect("base run replays");
            let newly: Vec<PlaceId> =
                pending.iter().copied().filter(|&p| !m.0[p].is_zero()).collect();
            for p in newly {
                pending.remove(&p);
                first_index.push((p, i + 1));
            }
        }
        if !pending.is_empty() {
            return Err(WitnessError::Precondition(
                "an input place of the support is never marked by the base run".into(),
            ));
        }
        first_index.sort_unstable();
    }

    let w = BigUint::from(net.weight());
    // Pile multiplicity: |y| * w * (lambda_x + 1); mu = n_p * pile + |y|.
    let lambda_y_u = lambda_y.to_biguint().expect("one-norm is nonnegative");
    let pile = &lambda_y_u * &w * (BigUint::from(lambda_x) + BigUint::one());

    // Insert block: counts |y|*base + y, emitted in ascending transition
    // order.
    let mut insert_counts: Vec<BigUint> = Vec::with_capacity(nt);
    for t in 0..nt {
        let c = BigInt::from(&lambda_y_u * BigUint::from(base_parikh[t])) + &y[t];
        if c.is_negative() {
            return Err(WitnessError::Precondition("insert block went negative".into()));
        }
        insert_counts.push(c.to_biguint().expect("checked nonnegative"));
    }

    // Expanded size check before materializing.
    let prefix_steps: BigUint = first_index
        .iter()
        .map(|&(_, i)| BigUint::from(i as u64) * &pile)
        .sum();
    let suffix_steps: BigUint = first_index
        .iter()
        .map(|&(_, i)| BigUint::from((sigma.len() - i) as u64) * &pile)
        .sum();
    let insert_steps: BigUint = insert_counts.iter().cloned().sum();
    let expanded = &prefix_steps + &suffix_steps + &insert_steps;
    if expanded > BigUint::from(step_budget) {
        return Ok(WitnessOutcome::TooLarge { params: None, expanded_steps: expanded });
    }

    let mut blocks = Vec::new();
    for &(_, i) in &first_index {
        if i > 0 {
            blocks.push(RleBlock { body: sigma[..i].to_vec(), reps: pile.clone() });
        }
    }
    let mut insert_body = Vec::new();
    for (t, c) in insert_counts.iter().enumerate() {
        let c = c.to_u64().expect("bounded by the step budget");
        insert_body.extend(std::iter::repeat_n(t, c as usize));
    }
    if !insert_body.is_empty() {
        blocks.push(RleBlock { body: insert_body, reps: BigUint::one() });
    }
    for &(_, i) in &first_index {
        if i < sigma.len() {
            blocks.push(RleBlock { body: sigma[i..].to_vec(), reps: pile.clone() });
        }
    }
    Ok(WitnessOutcome::Run(RleRun { blocks }))
}

/// `mu = |y| * (|base| * n_p * w + n_p * w + 1)` for the insertion run; the
/// start marking is `mu*M + L`.
pub fn insertion_multiplier(sys: &PetriNetSystem, base_parikh: &[u64], y: &[BigInt]) -> BigUint {
    let base_support: BTreeSet<usize> =
        (0..base_parikh.len()).filter(|&t| base_parikh[t] > 0).collect();
    let n_p = BigUint::from(sys.net.pre_of_set(&base_support).len() as u64);
    let w = BigUint::from(sys.net.weight());
    let lambda_x = BigUint::from(base_parikh.iter().sum::<u64>());
    let lambda_y = one_norm_int(y).to_biguint().expect("one-norm is nonnegative");
    &lambda_y * (&lambda_x * &n_p * &w + &n_p * &w + BigUint::one())
}
