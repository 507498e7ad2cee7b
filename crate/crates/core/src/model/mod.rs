//! Data model: rendez-vous protocols, symmetric and leader variants, Petri
//! nets, markings, and the protocol-to-net translations.

pub mod text;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

pub type StateId = usize;
pub type LetterId = usize;
pub type PlaceId = usize;
pub type TransId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleAction {
    Send(LetterId),
    Receive(LetterId),
}

impl RuleAction {
    pub fn letter(&self) -> LetterId {
        match self {
            RuleAction::Send(a) | RuleAction::Receive(a) => *a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rule {
    pub from: StateId,
    pub action: RuleAction,
    pub to: StateId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate identifier `{0}`")]
    Duplicate(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("symmetry violated: rule `{0}` has no swapped counterpart")]
    SymmetryViolated(String),
    #[error("leader and follower state names overlap on `{0}`")]
    OverlappingStates(String),
    #[error("leader and follower alphabets differ")]
    AlphabetMismatch,
    #[error("{0}")]
    Invalid(String),
}

/// A rendez-vous protocol: finite states, send/receive rules over a finite
/// alphabet, one initial and one final state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Protocol {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub init: StateId,
    pub fin: StateId,
    pub rules: Vec<Rule>,
}

fn check_unique(names: &[String]) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Duplicate(n.clone()));
        }
    }
    Ok(())
}

impl Protocol {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        init: StateId,
        fin: StateId,
        rules: Vec<Rule>,
    ) -> Result<Self, ModelError> {
        check_unique(&states)?;
        check_unique(&alphabet)?;
        if init >= states.len() || fin >= states.len() {
            return Err(ModelError::IndexOutOfRange("init/fin state".into()));
        }
        for r in &rules {
            if r.from >= states.len() || r.to >= states.len() {
                return Err(ModelError::IndexOutOfRange("rule endpoint".into()));
            }
            if r.action.letter() >= alphabet.len() {
                return Err(ModelError::IndexOutOfRange("rule letter".into()));
            }
        }
        Ok(Protocol { states, alphabet, init, fin, rules })
    }

    pub fn has_rule(&self, from: StateId, action: RuleAction, to: StateId) -> bool {
        self.rules.iter().any(|r| r.from == from && r.action == action && r.to == to)
    }

    /// Human-readable form of a rule, for diagnostics.
    pub fn rule_text(&self, r: &Rule) -> String {
        let (mark, a) = match r.action {
            RuleAction::Send(a) => ("!", a),
            RuleAction::Receive(a) => ("?", a),
        };
        format!("{} {}{} {}", self.states[r.from], mark, self.alphabet[a], self.states[r.to])
    }
}

/// A protocol whose rule set is closed under swapping send and receive on
/// every letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricProtocol(Protocol);

impl SymmetricProtocol {
    pub fn new(p: Protocol) -> Result<Self, ModelError> {
        for r in &p.rules {
            let swapped = match r.action {
                RuleAction::Send(a) => RuleAction::Receive(a),
                RuleAction::Receive(a) => RuleAction::Send(a),
            };
            if !p.has_rule(r.from, swapped, r.to) {
                return Err(ModelError::SymmetryViolated(p.rule_text(r)));
            }
        }
        Ok(SymmetricProtocol(p))
    }

    pub fn protocol(&self) -> &Protocol {
        &self.0
    }

    pub fn into_protocol(self) -> Protocol {
        self.0
    }
}

impl std::ops::Deref for SymmetricProtocol {
    type Target = Protocol;
    fn deref(&self) -> &Protocol {
        &self.0
    }
}

/// A symmetric leader protocol: one leader agent running its own symmetric
/// component next to arbitrarily many symmetric followers, over a shared
/// alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderProtocolPair {
    pub leader: SymmetricProtocol,
    pub follower: SymmetricProtocol,
}

impl LeaderProtocolPair {
    pub fn new(leader: SymmetricProtocol, follower: SymmetricProtocol) -> Result<Self, ModelError> {
        if leader.alphabet != follower.alphabet {
            return Err(ModelError::AlphabetMismatch);
        }
        for s in &leader.states {
            if follower.states.contains(s) {
                return Err(ModelError::OverlappingStates(s.clone()));
            }
        }
        Ok(LeaderProtocolPair { leader, follower })
    }
}

/// A Petri net with natural-number `pre`/`post` matrices, stored per
/// transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pre: Vec<Vec<u32>>,
    post: Vec<Vec<u32>>,
}

impl PetriNet {
    pub fn new(
        places: Vec<String>,
        transitions: Vec<String>,
        pre: Vec<Vec<u32>>,
        post: Vec<Vec<u32>>,
    ) -> Result<Self, ModelError> {
        check_unique(&places)?;
        check_unique(&transitions)?;
        if pre.len() != transitions.len() || post.len() != transitions.len() {
            return Err(ModelError::Invalid("pre/post column count mismatch".into()));
        }
        for col in pre.iter().chain(&post) {
            if col.len() != places.len() {
                return Err(ModelError::Invalid("pre/post column height mismatch".into()));
            }
        }
        Ok(PetriNet { places, transitions, pre, post })
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn pre(&self, p: PlaceId, t: TransId) -> u32 {
        self.pre[t][p]
    }

    pub fn post(&self, p: PlaceId, t: TransId) -> u32 {
        self.post[t][p]
    }

    pub fn incidence(&self, p: PlaceId, t: TransId) -> i64 {
        self.post[t][p] as i64 - self.pre[t][p] as i64
    }

    /// Largest entry of the `pre`/`post` matrices.
    pub fn weight(&self) -> u32 {
        self.pre
            .iter()
            .chain(&self.post)
            .flat_map(|col| col.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn pre_places(&self, t: TransId) -> impl Iterator<Item = PlaceId> + '_ {
        self.pre[t].iter().enumerate().filter(|(_, w)| **w > 0).map(|(p, _)| p)
    }

    pub fn post_places(&self, t: TransId) -> impl Iterator<Item = PlaceId> + '_ {
        self.post[t].iter().enumerate().filter(|(_, w)| **w > 0).map(|(p, _)| p)
    }

    /// Pre-places of a set of transitions.
    pub fn pre_of_set(&self, ts: &BTreeSet<TransId>) -> BTreeSet<PlaceId> {
        ts.iter().flat_map(|&t| self.pre_places(t)).collect()
    }

    pub fn post_of_set(&self, ts: &BTreeSet<TransId>) -> BTreeSet<PlaceId> {
        ts.iter().flat_map(|&t| self.post_places(t)).collect()
    }

    /// The same net with `pre` and `post` swapped.
    pub fn reversed(&self) -> PetriNet {
        PetriNet {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            pre: self.post.clone(),
            post: self.pre.clone(),
        }
    }

    /// True when every transition moves exactly two tokens in and two out, as
    /// nets derived from protocols do.
    pub fn is_token_conserving_pairwise(&self) -> bool {
        (0..self.num_transitions()).all(|t| {
            self.pre[t].iter().map(|&w| w as u64).sum::<u64>() == 2
                && self.post[t].iter().map(|&w| w as u64).sum::<u64>() == 2
        })
    }
}

/// A marking: nonnegative token counts per place.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<BigUint>);

impl Marking {
    pub fn zero(num_places: usize) -> Self {
        Marking(vec![BigUint::zero(); num_places])
    }

    pub fn single(num_places: usize, p: PlaceId) -> Self {
        let mut m = Self::zero(num_places);
        m.0[p] = BigUint::one();
        m
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        Marking(counts.into_iter().map(BigUint::from).collect())
    }

    pub fn size(&self) -> BigUint {
        self.0.iter().sum()
    }

    pub fn support(&self) -> BTreeSet<PlaceId> {
        self.0.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(p, _)| p).collect()
    }

    pub fn scaled(&self, n: &BigUint) -> Marking {
        Marking(self.0.iter().map(|c| c * n).collect())
    }

    pub fn plus(&self, other: &Marking) -> Marking {
        Marking(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn ge(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// Tokens required by `pre` available here?
    pub fn enables(&self, net: &PetriNet, t: TransId) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(p, c)| *c >= BigUint::from(net.pre(p, t)))
    }

    /// Fire `t`; `None` when disabled.
    pub fn fire(&self, net: &PetriNet, t: TransId) -> Option<Marking> {
        if !self.enables(net, t) {
            return None;
        }
        Some(Marking(
            self.0
                .iter()
                .enumerate()
                .map(|(p, c)| c - BigUint::from(net.pre(p, t)) + BigUint::from(net.post(p, t)))
                .collect(),
        ))
    }
}

/// A net together with an initial and a final marking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNetSystem {
    pub net: PetriNet,
    pub initial: Marking,
    pub final_marking: Marking,
}

impl PetriNetSystem {
    pub fn new(net: PetriNet, initial: Marking, final_marking: Marking) -> Result<Self, ModelError> {
        if initial.0.len() != net.num_places() || final_marking.0.len() != net.num_places() {
            return Err(ModelError::Invalid("marking width differs from place count".into()));
        }
        Ok(PetriNetSystem { net, initial, final_marking })
    }

    /// `final - initial` as exact integers, one entry per place.
    pub fn delta(&self) -> Vec<num_bigint::BigInt> {
        self.initial
            .0
            .iter()
            .zip(&self.final_marking.0)
            .map(|(a, b)| num_bigint::BigInt::from(b.clone()) - num_bigint::BigInt::from(a.clone()))
            .collect()
    }

    pub fn scaled(&self, n: u64) -> (Marking, Marking) {
        let n = BigUint::from(n);
        (self.initial.scaled(&n), self.final_marking.scaled(&n))
    }
}

/// Build the net of a protocol: one place per state and one transition per
/// letter and ordered pair of a send rule and a receive rule on that letter.
/// A pair sharing its source state consumes two tokens there, encoding that a
/// rendez-vous needs two distinct agents.
pub fn protocol_to_net(p: &Protocol) -> PetriNetSystem {
    let np = p.states.len();
    let mut names = Vec::new();
    let mut pre = Vec::new();
    let mut post = Vec::new();
    for (ai, letter) in p.alphabet.iter().enumerate() {
        for (ri, r) in p.rules.iter().enumerate() {
            if r.action != RuleAction::Send(ai) {
                continue;
            }
            for (rj, r2) in p.rules.iter().enumerate() {
                if r2.action != RuleAction::Receive(ai) {
                    continue;
                }
                names.push(format!("{letter}_{ri}_{rj}"));
                let mut pr = vec![0u32; np];
                pr[r.from] += 1;
                pr[r2.from] += 1;
                let mut po = vec![0u32; np];
                po[r.to] += 1;
                po[r2.to] += 1;
                pre.push(pr);
                post.push(po);
            }
        }
    }
    let net = PetriNet::new(p.states.clone(), names, pre, post)
        .expect("translated net is well formed");
    let initial = Marking::single(np, p.init);
    let final_marking = Marking::single(np, p.fin);
    PetriNetSystem { net, initial, final_marking }
}

/// Classification of the transitions of a leader net.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransKind {
    /// Exactly one of the paired rules belongs to the leader; `from`/`to` are
    /// the unique leader pre- and post-place.
    Leader { from: PlaceId, to: PlaceId },
    FollowerOnly,
}

/// Side information for nets built from leader protocols.
#[derive(Clone, Debug)]
pub struct LeaderNetAnnotation {
    pub kinds: Vec<TransKind>,
    pub leader_places: BTreeSet<PlaceId>,
    pub init_leader: PlaceId,
    pub fin_leader: PlaceId,
    /// Designated follower places; the follower population is parametric.
    pub init_follower: PlaceId,
    pub fin_follower: PlaceId,
}

impl LeaderNetAnnotation {
    /// Configuration with the leader at its initial state and `n` followers.
    pub fn initial_config(&self, num_places: usize, n: u64) -> Marking {
        let mut m = Marking::zero(num_places);
        m.0[self.init_leader] = BigUint::one();
        m.0[self.init_follower] = BigUint::from(n);
        m
    }

    pub fn final_config(&self, num_places: usize, n: u64) -> Marking {
        let mut m = Marking::zero(num_places);
        m.0[self.fin_leader] = BigUint::one();
        m.0[self.fin_follower] = BigUint::from(n);
        m
    }
}

/// Net of a leader protocol: same pairing as [`protocol_to_net`] over the
/// union of leader and follower rules, except that pairs where both rules are
/// leader rules are excluded (there is only one leader).
pub fn leader_to_net(lp: &LeaderProtocolPair) -> (PetriNetSystem, LeaderNetAnnotation) {
    let leader = lp.leader.protocol();
    let follower = lp.follower.protocol();
    let n_lead = leader.states.len();
    let places: Vec<String> =
        leader.states.iter().chain(&follower.states).cloned().collect();
    let np = places.len();

    // Combined rule list; follower state ids get shifted past the leader's.
    #[derive(Clone, Copy)]
    struct CRule {
        from: usize,
        to: usize,
        action: RuleAction,
        leader: bool,
    }
    let mut rules: Vec<CRule> = Vec::new();
    for r in &leader.rules {
        rules.push(CRule { from: r.from, to: r.to, action: r.action, leader: true });
    }
    for r in &follower.rules {
        rules.push(CRule { from: r.from + n_lead, to: r.to + n_lead, action: r.action, leader: false });
    }

    let mut names = Vec::new();
    let mut pre = Vec::new();
    let mut post = Vec::new();
    let mut kinds = Vec::new();
    for (ai, letter) in leader.alphabet.iter().enumerate() {
        for (ri, r) in rules.iter().enumerate() {
            if r.action != RuleAction::Send(ai) {
                continue;
            }
            for (rj, r2) in rules.iter().enumerate() {
                if r2.action != RuleAction::Receive(ai) {
                    continue;
                }
                if r.leader && r2.leader {
                    continue;
                }
                names.push(format!("{letter}_{ri}_{rj}"));
                let mut pr = vec![0u32; np];
                pr[r.from] += 1;
                pr[r2.from] += 1;
                let mut po = vec![0u32; np];
                po[r.to] += 1;
                po[r2.to] += 1;
                pre.push(pr);
                post.push(po);
                kinds.push(if r.leader {
                    TransKind::Leader { from: r.from, to: r.to }
                } else if r2.leader {
                    TransKind::Leader { from: r2.from, to: r2.to }
                } else {
                    TransKind::FollowerOnly
                });
            }
        }
    }
    let net = PetriNet::new(places, names, pre, post).expect("translated net is well formed");
    let ann = LeaderNetAnnotation {
        kinds,
        leader_places: (0..n_lead).collect(),
        init_leader: leader.init,
        fin_leader: leader.fin,
        init_follower: follower.init + n_lead,
        fin_follower: follower.fin + n_lead,
    };
    let initial = Marking::single(np, ann.init_leader);
    let final_marking = Marking::single(np, ann.fin_leader);
    let sys = PetriNetSystem { net, initial, final_marking };
    (sys, ann)
}

/// Adjacency of the bipartite place/transition graph: nodes `0..P` are
/// places, `P..P+T` transitions.
pub fn net_graph(net: &PetriNet) -> Vec<Vec<usize>> {
    let np = net.num_places();
    let mut adj = vec![Vec::new(); np + net.num_transitions()];
    for t in 0..net.num_transitions() {
        for p in net.pre_places(t) {
            adj[p].push(np + t);
        }
        for p in net.post_places(t) {
            adj[np + t].push(p);
        }
    }
    adj
}

/// Acyclicity of the place/transition graph, by iterative three-color DFS.
pub fn is_acyclic(net: &PetriNet) -> bool {
    let adj = net_graph(net);
    let n = adj.len();
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; n];
    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = Color::Gray;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let w = adj[v][*idx];
                *idx += 1;
                match color[w] {
                    Color::Gray => return false,
                    Color::White => {
                        color[w] = Color::Gray;
                        stack.push((w, 0));
                    }
                    Color::Black => {}
                }
            } else {
                color[v] = Color::Black;
                stack.pop();
            }
        }
    }
    true
}

#[cfg(test)]
mod tests;
