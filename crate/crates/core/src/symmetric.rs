//! Specialized deciders for symmetric protocols.
//!
//! Leaderless: a cut-off exists exactly when the final state is reachable in
//! the protocol graph (even populations) and the parity system over GF(2) is
//! feasible (odd populations). Bounded loss degenerates to graph
//! reachability.
//!
//! With a leader: a population parity is realizable exactly when some set `S`
//! of leader transitions whose graph is reachable from the leader's initial
//! state supports an integer solution of the marking equation with `v >= 1`
//! on `S`. Sets that admit no unit leader flow from the initial to the final
//! leader state can never satisfy the leader rows of the equation, so the
//! enumeration walks the leader graph and collects edge sets of walks instead
//! of guessing blindly.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use thiserror::Error;

use crate::analysis::{Decision, ParityCert};
use crate::exact::{f2_solve, ilp_feasible, F2System, IlpResult, LinearSystem, VarDomain};
use crate::model::{
    leader_to_net, protocol_to_net, LeaderNetAnnotation, LeaderProtocolPair, Marking, PetriNet,
    PetriNetSystem, PlaceId, Protocol, Rule, StateId, SymmetricProtocol, TransId, TransKind,
};
use crate::par;

/// Directed graph over state (or place) indices.
#[derive(Clone, Debug, Default)]
pub struct DerivedGraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl DerivedGraph {
    fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        adj
    }

    pub fn reachable_from(&self, start: usize) -> BTreeSet<usize> {
        let adj = self.successors();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn co_reachable_to(&self, target: usize) -> BTreeSet<usize> {
        let rev = DerivedGraph {
            num_vertices: self.num_vertices,
            edges: self.edges.iter().map(|&(a, b)| (b, a)).collect(),
        };
        rev.reachable_from(target)
    }

    /// Shortest path as a vertex list, including both endpoints.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let adj = self.successors();
        let mut prev: Vec<Option<usize>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(p) = prev[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// The protocol graph: one edge per rule, send and receive alike.
pub fn protocol_graph(p: &Protocol) -> DerivedGraph {
    let mut edges: Vec<(usize, usize)> = p.rules.iter().map(|r| (r.from, r.to)).collect();
    edges.sort_unstable();
    edges.dedup();
    DerivedGraph { num_vertices: p.states.len(), edges }
}

/// States both reachable from `init` and co-reachable to `fin`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodStateSet {
    pub good: BTreeSet<StateId>,
}

pub fn good_states(p: &Protocol) -> GoodStateSet {
    let g = protocol_graph(p);
    let fwd = g.reachable_from(p.init);
    let bwd = g.co_reachable_to(p.fin);
    GoodStateSet { good: fwd.intersection(&bwd).copied().collect() }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymmetricError {
    #[error("guard violated: {0}")]
    Guard(String),
}

/// Cut-off decision for leaderless symmetric protocols: graph reachability
/// for the even case, feasibility of the parity system over GF(2) for the
/// odd case.
pub fn decide_symmetric_cutoff(p: &SymmetricProtocol) -> Decision {
    if p.init == p.fin {
        return Decision {
            answer: true,
            bound: Some(BigUint::zero()),
            graph_path: Some(vec![p.init]),
            notes: vec!["initial and final states coincide".into()],
            ..Decision::default()
        };
    }
    let graph = protocol_graph(p);
    let Some(path) = graph.path(p.init, p.fin) else {
        return Decision::no("final state unreachable in the protocol graph");
    };
    let (_net, var_of, f2) = symmetric_parity_system(p);
    match f2_solve(&f2) {
        None => Decision {
            answer: false,
            graph_path: Some(path),
            notes: vec!["parity system infeasible: no odd witness".into()],
            ..Decision::default()
        },
        Some(bits) => {
            let nt = var_of.len();
            let mut full = vec![false; nt];
            for (t, var) in var_of.iter().enumerate() {
                if let Some(v) = var {
                    full[t] = bits[*v];
                }
            }
            Decision {
                answer: true,
                graph_path: Some(path),
                f2_solution: Some(full),
                ..Decision::default()
            }
        }
    }
}

/// The parity system of a symmetric protocol: variables are the net
/// transitions not touching a bad state; one row per state requires the
/// incidence parities to telescope to `fin - init` mod 2.
pub(crate) fn symmetric_parity_system(
    p: &SymmetricProtocol,
) -> (PetriNetSystem, Vec<Option<usize>>, F2System) {
    let sys = protocol_to_net(p.protocol());
    let net = &sys.net;
    let good = good_states(p.protocol()).good;
    let nt = net.num_transitions();
    let mut var_of: Vec<Option<usize>> = vec![None; nt];
    let mut n_vars = 0;
    for (t, var) in var_of.iter_mut().enumerate() {
        let touches_bad = net
            .pre_places(t)
            .chain(net.post_places(t))
            .any(|pl| !good.contains(&pl));
        if !touches_bad {
            *var = Some(n_vars);
            n_vars += 1;
        }
    }
    let mut f2 = F2System::new(n_vars);
    for q in 0..net.num_places() {
        let mut vars = Vec::new();
        for (t, var) in var_of.iter().enumerate() {
            if let Some(v) = var {
                let a = net.incidence(q, t).unsigned_abs() % 2;
                for _ in 0..a {
                    vars.push(*v);
                }
            }
        }
        // -1 on the initial row reduces to 1 mod 2.
        let rhs = q == p.init || q == p.fin;
        f2.add_row(vars, rhs);
    }
    (sys, var_of, f2)
}

/// Bounded-loss cut-off for symmetric protocols: plain graph reachability;
/// one agent of unmatched parity may stay behind, so 1 bounds the loss.
pub fn decide_symmetric_bounded_loss(p: &SymmetricProtocol) -> Decision {
    let graph = protocol_graph(p);
    match graph.path(p.init, p.fin) {
        Some(path) => Decision {
            answer: true,
            bound: Some(BigUint::one()),
            graph_path: Some(path),
            ..Decision::default()
        },
        None => Decision::no("final state unreachable in the protocol graph"),
    }
}

// ---------------------------------------------------------------------------
// Symmetric protocols with a leader
// ---------------------------------------------------------------------------

/// Which transitions the guessed support constrains. The leader-only reading
/// pins leader transitions outside `S` and leaves follower-only transitions
/// free; the all-transitions reading additionally forces the reported
/// support to match the full solution support exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SupportReading {
    #[default]
    LeaderTransitionsOnly,
    AllTransitions,
}

#[derive(Clone, Debug)]
pub enum LeaderDecision {
    Decided(Decision),
    /// Some integer program ran out of budget before a feasible alternative
    /// was found; the answer is unknown.
    Inconclusive { notes: Vec<String> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LeaderError {
    #[error("guard violated: {0}")]
    Guard(String),
}

/// Outcome of one parity branch.
enum ParityOutcome {
    Feasible(Box<ParityCert>),
    Infeasible,
    Budget,
}

/// Prune the follower component to states lying on a path from its initial
/// to its final state; agents on a successful run never leave them. `None`
/// when the follower's final state is unreachable.
pub fn prune_follower(lp: &LeaderProtocolPair) -> Option<LeaderProtocolPair> {
    let f = lp.follower.protocol();
    let good = good_states(f).good;
    if !good.contains(&f.init) || !good.contains(&f.fin) {
        return None;
    }
    if good.len() == f.states.len() {
        return Some(lp.clone());
    }
    let keep: Vec<StateId> = good.iter().copied().collect();
    let renumber: BTreeMap<StateId, StateId> =
        keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let states: Vec<String> = keep.iter().map(|&s| f.states[s].clone()).collect();
    let rules: Vec<Rule> = f
        .rules
        .iter()
        .filter(|r| good.contains(&r.from) && good.contains(&r.to))
        .map(|r| Rule { from: renumber[&r.from], action: r.action, to: renumber[&r.to] })
        .collect();
    let pruned = Protocol::new(states, f.alphabet.clone(), renumber[&f.init], renumber[&f.fin], rules)
        .expect("pruning keeps the protocol well formed");
    let follower = SymmetricProtocol::new(pruned).expect("pruning preserves symmetry");
    Some(LeaderProtocolPair::new(lp.leader.clone(), follower).expect("pruning keeps states disjoint"))
}

/// Group leader transitions by their effect; interchangeable duplicatesecome
/// one representative column and the rest stay pinned to zero.
fn leader_classes(net: &PetriNet, ann: &LeaderNetAnnotation) -> Vec<Vec<TransId>> {
    let mut groups: BTreeMap<(Vec<u32>, Vec<u32>), Vec<TransId>> = BTreeMap::new();
    for t in 0..net.num_transitions() {
        if matches!(ann.kinds[t], TransKind::Leader { .. }) {
            let pre: Vec<u32> = (0..net.num_places()).map(|p| net.pre(p, t)).collect();
            let post: Vec<u32> = (0..net.num_places()).map(|p| net.post(p, t)).collect();
            groups.entry((pre, post)).or_default().push(t);
        }
    }
    groups.into_values().collect()
}

/// Every edge set of a walk from `init` to `fin` over the class edges,
/// deduplicated and capped. These are exactly the leader supports admitting
/// a unit flow with `v >= 1` on every chosen class.
fn walk_supports(
    class_edges: &[(PlaceId, PlaceId)],
    init: PlaceId,
    fin: PlaceId,
    cap: usize,
) -> Result<Vec<u64>, LeaderError> {
    assert!(class_edges.len() <= 63);
    let mut results: BTreeSet<u64> = BTreeSet::new();
    let mut visited: HashSet<(PlaceId, u64)> = HashSet::new();
    let mut stack: Vec<(PlaceId, u64)> = vec![(init, 0)];
    visited.insert((init, 0));
    while let Some((v, mask)) = stack.pop() {
        if v == fin {
            results.insert(mask);
            if results.len() > cap {
                return Err(LeaderError::Guard(format!(
                    "more than {cap} candidate leader supports"
                )));
            }
        }
        for (c, &(from, to)) in class_edges.iter().enumerate() {
            if from != v {
                continue;
            }
            let next = (to, mask | 1 << c);
            if visited.insert(next) {
                stack.push(next);
            }
        }
        if visited.len() > cap.saturating_mul(8) {
            return Err(LeaderError::Guard("leader walk state space exploded".into()));
        }
    }
    let mut out: Vec<u64> = results.into_iter().collect();
    out.sort_by_key(|m| (m.count_ones(), *m));
    Ok(out)
}

struct LeaderSearch {
    net: PetriNet,
    ann: LeaderNetAnnotation,
    classes: Vec<Vec<TransId>>,
    candidates: Vec<u64>,
}

impl LeaderSearch {
    /// Marking-equation rows over the class representatives, the follower-only
    /// transitions, and the half-population variable `k` (`n = 2k + parity`).
    fn ilp_for(&self, mask: u64, parity: u8, force_support: Option<&BTreeSet<TransId>>) -> LinearSystem {
        let net = &self.net;
        let ann = &self.ann;
        let nt = net.num_transitions();
        let mut domains: Vec<VarDomain> = (0..nt)
            .map(|t| match ann.kinds[t] {
                TransKind::Leader { .. } => VarDomain::FixedZero,
                TransKind::FollowerOnly => VarDomain::IntNonNeg,
            })
            .collect();
        for (c, members) in self.classes.iter().enumerate() {
            if mask & (1 << c) != 0 {
                domains[members[0]] = VarDomain::IntAtLeastOne;
            }
        }
        if let Some(support) = force_support {
            for (t, d) in domains.iter_mut().enumerate() {
                *d = if support.contains(&t) {
                    VarDomain::IntAtLeastOne
                } else {
                    VarDomain::FixedZero
                };
            }
        }
        domains.push(VarDomain::IntNonNeg); // k

        let np = net.num_places();
        let mut coeffs = Vec::with_capacity(np);
        let mut rhs = Vec::with_capacity(np);
        for p in 0..np {
            let mut row: Vec<BigInt> =
                (0..nt).map(|t| BigInt::from(net.incidence(p, t))).collect();
            let mut k_coef = BigInt::zero();
            let mut r = BigInt::zero();
            if p == ann.init_leader {
                r -= BigInt::one();
            }
            if p == ann.fin_leader {
                r += BigInt::one();
            }
            if p == ann.init_follower {
                // A v = -n = -(2k + parity)
                k_coef += BigInt::from(2);
                r -= BigInt::from(parity);
            }
            if p == ann.fin_follower {
                k_coef -= BigInt::from(2);
                r += BigInt::from(parity);
            }
            row.push(k_coef);
            coeffs.push(row);
            rhs.push(r);
        }
        LinearSystem::new(coeffs, rhs, domains)
    }

    /// Necessary parity condition: the marking equation mod 2 with the
    /// support pinned; `k` drops out because its coefficients are even.
    fn parity_precheck(&self, mask: u64, parity: u8) -> bool {
        let net = &self.net;
        let ann = &self.ann;
        let nt = net.num_transitions();
        let mut var_of: Vec<Option<usize>> = vec![None; nt];
        let mut n_vars = 0;
        for (t, var) in var_of.iter_mut().enumerate() {
            let free = match ann.kinds[t] {
                TransKind::FollowerOnly => true,
                TransKind::Leader { .. } => self
                    .classes
                    .iter()
                    .enumerate()
                    .any(|(c, members)| mask & (1 << c) != 0 && members[0] == t),
            };
            if free {
                *var = Some(n_vars);
                n_vars += 1;
            }
        }
        let mut f2 = F2System::new(n_vars);
        for p in 0..net.num_places() {
            let mut vars = Vec::new();
            for (t, var) in var_of.iter().enumerate() {
                if let Some(v) = var {
                    for _ in 0..(net.incidence(p, t).unsigned_abs() % 2) {
                        vars.push(*v);
                    }
                }
            }
            let mut r = false;
            if p == ann.init_leader {
                r = !r;
            }
            if p == ann.fin_leader {
                r = !r;
            }
            if parity == 1 {
                if p == ann.init_follower {
                    r = !r;
                }
                if p == ann.fin_follower {
                    r = !r;
                }
            }
            f2.add_row(vars, r);
        }
        f2_solve(&f2).is_some()
    }

    fn search_parity(&self, parity: u8, ilp_budget: u64, reading: SupportReading) -> ParityOutcome {
        let mut budget_hit = false;
        for &mask in &self.candidates {
            if !self.parity_precheck(mask, parity) {
                continue;
            }
            let sys = self.ilp_for(mask, parity, None);
            match ilp_feasible(&sys, ilp_budget) {
                IlpResult::Infeasible => continue,
                IlpResult::BudgetExceeded => {
                    budget_hit = true;
                    continue;
                }
                IlpResult::Feasible(y) => {
                    let cert = self.certify(mask, parity, &y, reading, ilp_budget);
                    match cert {
                        Some(c) => return ParityOutcome::Feasible(Box::new(c)),
                        None => {
                            budget_hit = true;
                            continue;
                        }
                    }
                }
            }
        }
        if budget_hit {
            ParityOutcome::Budget
        } else {
            ParityOutcome::Infeasible
        }
    }

    fn certify(
        &self,
        mask: u64,
        parity: u8,
        y: &[BigInt],
        reading: SupportReading,
        ilp_budget: u64,
    ) -> Option<ParityCert> {
        let nt = self.net.num_transitions();
        let (solution, support) = match reading {
            SupportReading::LeaderTransitionsOnly => {
                let solution: Vec<BigUint> =
                    y[..nt].iter().map(|v| v.to_biguint().expect("nonnegative")).collect();
                let support: BTreeSet<TransId> = self
                    .classes
                    .iter()
                    .enumerate()
                    .filter(|(c, _)| mask & (1 << c) != 0)
                    .map(|(_, members)| members[0])
                    .collect();
                (solution, support)
            }
            SupportReading::AllTransitions => {
                // Pin the support to exactly the nonzero coordinates and
                // re-solve so v >= 1 holds on all of it.
                let support: BTreeSet<TransId> =
                    (0..nt).filter(|&t| !y[t].is_zero()).collect();
                let sys = self.ilp_for(mask, parity, Some(&support));
                match ilp_feasible(&sys, ilp_budget) {
                    IlpResult::Feasible(y2) => {
                        let solution: Vec<BigUint> = y2[..nt]
                            .iter()
                            .map(|v| v.to_biguint().expect("nonnegative"))
                            .collect();
                        (solution, support)
                    }
                    _ => return None,
                }
            }
        };
        let k = y[nt].to_biguint().expect("nonnegative");
        let n = BigUint::from(2u8) * k + BigUint::from(parity);
        Some(ParityCert { parity, n, support, solution })
    }
}

/// Cut-off decision for symmetric leader protocols: both population parities
/// must be realizable.
pub fn decide_leader_cutoff(
    lp: &LeaderProtocolPair,
    ilp_budget: u64,
    reading: SupportReading,
) -> Result<LeaderDecision, LeaderError> {
    let Some(pruned) = prune_follower(lp) else {
        return Ok(LeaderDecision::Decided(Decision::no(
            "follower final state unreachable from its initial state",
        )));
    };
    let (sys, ann) = leader_to_net(&pruned);
    let classes = leader_classes(&sys.net, &ann);
    if classes.len() > 24 {
        return Err(LeaderError::Guard(format!(
            "{} distinct leader transition effects exceed the search guard of 24",
            classes.len()
        )));
    }
    let class_edges: Vec<(PlaceId, PlaceId)> = classes
        .iter()
        .map(|members| match ann.kinds[members[0]] {
            TransKind::Leader { from, to } => (from, to),
            TransKind::FollowerOnly => unreachable!("classes hold leader transitions"),
        })
        .collect();
    let candidates = walk_supports(&class_edges, ann.init_leader, ann.fin_leader, 100_000)?;
    let search = LeaderSearch { net: sys.net.clone(), ann, classes, candidates };

    let outcomes = par::map_range(2, |parity| {
        search.search_parity(parity as u8, ilp_budget, reading)
    });
    let mut certs = Vec::new();
    let mut notes = Vec::new();
    let mut inconclusive = false;
    for (parity, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            ParityOutcome::Feasible(c) => certs.push(*c),
            ParityOutcome::Infeasible => {
                return Ok(LeaderDecision::Decided(Decision {
                    answer: false,
                    notes: vec![format!("no realizable population with parity {parity}")],
                    ..Decision::default()
                }));
            }
            ParityOutcome::Budget => {
                inconclusive = true;
                notes.push(format!("parity {parity}: integer program budget exhausted"));
            }
        }
    }
    if inconclusive {
        return Ok(LeaderDecision::Inconclusive { notes });
    }
    Ok(LeaderDecision::Decided(Decision {
        answer: true,
        parity_certs: certs,
        ..Decision::default()
    }))
}

/// Re-verify one leader parity certificate against the pruned net.
pub fn verify_leader_cert(
    net: &PetriNet,
    ann: &LeaderNetAnnotation,
    cert: &ParityCert,
) -> Result<(), String> {
    let nt = net.num_transitions();
    if cert.solution.len() != nt {
        return Err("solution width mismatch".into());
    }
    if (&cert.n % BigUint::from(2u8)).to_u8().unwrap_or(2) != cert.parity {
        return Err("population parity mismatch".into());
    }
    for &t in &cert.support {
        if cert.solution[t].is_zero() {
            return Err("support transition with zero count".into());
        }
        if !matches!(ann.kinds[t], TransKind::Leader { .. }) {
            return Err("support contains a follower-only transition".into());
        }
    }
    // Marking equation: C_fin^n = C_init^n + A v.
    let np = net.num_places();
    let c_init = ann.initial_config(np, 0);
    let c_fin = ann.final_config(np, 0);
    for p in 0..np {
        let mut acc = BigInt::from(c_init.0[p].clone()) - BigInt::from(c_fin.0[p].clone());
        if p == ann.init_follower {
            acc += BigInt::from(cert.n.clone());
        }
        if p == ann.fin_follower {
            acc -= BigInt::from(cert.n.clone());
        }
        for t in 0..nt {
            let a = net.incidence(p, t);
            if a != 0 && !cert.solution[t].is_zero() {
                acc += BigInt::from(a) * BigInt::from(cert.solution[t].clone());
            }
        }
        if !acc.is_zero() {
            return Err(format!("marking equation violated at place {p}"));
        }
    }
    // Leader-graph reachability of the used leader transitions.
    let used: Vec<TransId> = (0..nt)
        .filter(|&t| {
            matches!(ann.kinds[t], TransKind::Leader { .. }) && !cert.solution[t].is_zero()
        })
        .collect();
    let edges: Vec<(usize, usize)> = used
        .iter()
        .map(|&t| match ann.kinds[t] {
            TransKind::Leader { from, to } => (from, to),
            TransKind::FollowerOnly => unreachable!(),
        })
        .collect();
    let graph = DerivedGraph { num_vertices: np, edges };
    let reach = graph.reachable_from(ann.init_leader);
    for &(a, b) in &graph.edges {
        if !reach.contains(&a) || !reach.contains(&b) {
            return Err("used leader transition not reachable from the initial leader state".into());
        }
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealizeError {
    #[error("pair is not compatible: {0}")]
    NotCompatible(String),
    #[error("guard violated: every follower state needs at least twice the total count")]
    Guard,
}

/// Produce a concrete firing sequence with the requested occurrence counts
/// from a configuration holding plenty of followers everywhere: follower-only
/// transitions fire first; a leader transition is taken along a cycle through
/// the current leader state when one exists, and along the unique outgoing
/// edge otherwise.
pub fn realize_compatible_run(
    net: &PetriNet,
    ann: &LeaderNetAnnotation,
    config: &Marking,
    counts: &[u64],
) -> Result<Vec<TransId>, RealizeError> {
    let nt = net.num_transitions();
    assert_eq!(counts.len(), nt);
    let total: u64 = counts.iter().sum();
    // Guard: C(q) >= 2 * |x| for every follower place.
    for p in 0..net.num_places() {
        if !ann.leader_places.contains(&p) && config.0[p] < BigUint::from(2 * total) {
            return Err(RealizeError::Guard);
        }
    }
    // Compatibility: C + A x >= 0 and leader-graph reachability.
    for p in 0..net.num_places() {
        let mut acc = BigInt::from(config.0[p].clone());
        for (t, &count) in counts.iter().enumerate() {
            let a = net.incidence(p, t);
            if a != 0 && count > 0 {
                acc += BigInt::from(a) * BigInt::from(count);
            }
        }
        if acc.is_negative() {
            return Err(RealizeError::NotCompatible(format!(
                "net effect negative at place {p}"
            )));
        }
    }
    let lead_of = |m: &Marking| -> PlaceId {
        ann.leader_places
            .iter()
            .copied()
            .find(|&p| !m.0[p].is_zero())
            .expect("exactly one leader token")
    };
    let leader_graph = |x: &[u64]| -> DerivedGraph {
        let edges = (0..nt)
            .filter(|&t| x[t] > 0)
            .filter_map(|t| match ann.kinds[t] {
                TransKind::Leader { from, to } => Some((from, to)),
                TransKind::FollowerOnly => None,
            })
            .collect();
        DerivedGraph { num_vertices: net.num_places(), edges }
    };
    {
        let g = leader_graph(counts);
        let reach = g.reachable_from(lead_of(config));
        for &(a, b) in &g.edges {
            if !reach.contains(&a) || !reach.contains(&b) {
                return Err(RealizeError::NotCompatible(
                    "leader graph not reachable from the current leader state".into(),
                ));
            }
        }
    }

    let mut remaining = counts.to_vec();
    let mut current = config.clone();
    let mut run = Vec::with_capacity(total as usize);
    while remaining.iter().any(|&c| c > 0) {
        let follower_only = (0..nt).find(|&t| {
            remaining[t] > 0 && matches!(ann.kinds[t], TransKind::FollowerOnly)
        });
        let chosen = if let Some(t) = follower_only {
            t
        } else {
            let p = lead_of(&current);
            let outgoing: Vec<TransId> = (0..nt)
                .filter(|&t| remaining[t] > 0)
                .filter(|&t| matches!(ann.kinds[t], TransKind::Leader { from, .. } if from == p))
                .collect();
            // Prefer an edge lying on a cycle through the leader state.
            let on_cycle = outgoing.iter().copied().find(|&t| {
                let TransKind::Leader { to, .. } = ann.kinds[t] else { unreachable!() };
                let mut probe = remaining.clone();
                probe[t] -= 1;
                leader_graph(&probe).reachable_from(to).contains(&p)
                    || to == p
            });
            match on_cycle.or_else(|| {
                if outgoing.len() == 1 {
                    Some(outgoing[0])
                } else {
                    None
                }
            }) {
                Some(t) => t,
                None => {
                    return Err(RealizeError::NotCompatible(
                        "leader is stuck outside every cycle with multiple exits".into(),
                    ))
                }
            }
        };
        match current.fire(net, chosen) {
            Some(next) => current = next,
            None => {
                return Err(RealizeError::NotCompatible(format!(
                    "transition {chosen} disabled during realization"
                )))
            }
        }
        remaining[chosen] -= 1;
        run.push(chosen);
    }
    Ok(run)
}

#[cfg(test)]
mod tests;
