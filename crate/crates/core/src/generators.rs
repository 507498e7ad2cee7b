//! Instance generators: the circuit-value and 3-SAT reductions, seeded random
//! protocols, nets, circuits and formulas, and the built-in catalog.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use thiserror::Error;

use crate::model::{
    LeaderProtocolPair, Marking, PetriNet, PetriNetSystem, Protocol, Rule, RuleAction,
    SymmetricProtocol,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("guard violated: {0}")]
    Guard(String),
}

fn perr<T>(line: usize, message: impl Into<String>) -> Result<T, GenError> {
    Err(GenError::Parse { line, message: message.into() })
}

// ---------------------------------------------------------------------------
// Circuits and the circuit-value reduction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Input(usize),
    Gate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateOp {
    And(Operand, Operand),
    Or(Operand, Operand),
    Not(Operand),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub op: GateOp,
}

/// A boolean circuit in topological order, with a fixed input assignment and
/// a designated output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    /// Input name and assigned value.
    pub inputs: Vec<(String, bool)>,
    pub gates: Vec<Gate>,
    pub output: Operand,
}

impl Circuit {
    pub fn validate(&self) -> Result<(), GenError> {
        let mut names: Vec<&str> = self.inputs.iter().map(|(n, _)| n.as_str()).collect();
        for g in &self.gates {
            names.push(&g.name);
        }
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(GenError::Guard("duplicate circuit identifier".into()));
        }
        let check = |op: Operand, at: usize| -> Result<(), GenError> {
            match op {
                Operand::Input(i) if i < self.inputs.len() => Ok(()),
                Operand::Gate(g) if g < at => Ok(()),
                _ => Err(GenError::Guard("operand violates topological order".into())),
            }
        };
        for (gi, g) in self.gates.iter().enumerate() {
            match g.op {
                GateOp::And(a, b) | GateOp::Or(a, b) => {
                    check(a, gi)?;
                    check(b, gi)?;
                }
                GateOp::Not(a) => check(a, gi)?,
            }
        }
        check(self.output, self.gates.len())
    }
}

/// Topological evaluation under the stored assignment.
pub fn eval_circuit(c: &Circuit) -> bool {
    let mut values = Vec::with_capacity(c.gates.len());
    let read = |op: Operand, values: &[bool]| match op {
        Operand::Input(i) => c.inputs[i].1,
        Operand::Gate(g) => values[g],
    };
    for g in &c.gates {
        let v = match g.op {
            GateOp::And(a, b) => read(a, &values) && read(b, &values),
            GateOp::Or(a, b) => read(a, &values) || read(b, &values),
            GateOp::Not(a) => !read(a, &values),
        };
        values.push(v);
    }
    read(c.output, &values)
}

fn operand_label(c: &Circuit, op: Operand) -> &str {
    match op {
        Operand::Input(i) => &c.inputs[i].0,
        Operand::Gate(g) => &c.gates[g].name,
    }
}

/// The circuit-value reduction: a protocol that admits a cut-off (and a
/// bounded-loss cut-off) exactly when the circuit evaluates to 1.
///
/// States are `init`, `fin` and a pair `h_0`/`h_1` per input or gate `h`.
/// Rules: setting each input to its assigned value on letter `a`; gate
/// propagation on per-gate letters; a hop from the true output to `fin` on
/// letter `b`; and a broadcast on letter `c` that lets one agent at `fin`
/// absorb everybody else.
pub fn gen_cvp_protocol(c: &Circuit) -> Protocol {
    c.validate().expect("valid circuit");
    let mut states = vec!["init".to_string(), "fin".to_string()];
    let mut state_of = std::collections::HashMap::new();
    for (name, _) in &c.inputs {
        for b in 0..2 {
            state_of.insert(format!("{name}_{b}"), states.len());
            states.push(format!("{name}_{b}"));
        }
    }
    for g in &c.gates {
        for b in 0..2 {
            state_of.insert(format!("{}_{b}", g.name), states.len());
            states.push(format!("{}_{b}", g.name));
        }
    }
    let sid = |label: &str, b: bool| state_of[&format!("{label}_{}", b as u8)];

    let mut alphabet = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let mut rules: Vec<Rule> = Vec::new();
    let rule = |from: usize, send: bool, letter: usize, to: usize, rules: &mut Vec<Rule>| {
        let action = if send { RuleAction::Send(letter) } else { RuleAction::Receive(letter) };
        rules.push(Rule { from, action, to });
    };

    // Input setting.
    for (i, (name, value)) in c.inputs.iter().enumerate() {
        let _ = i;
        let q = sid(name, *value);
        rule(0, true, 0, q, &mut rules);
        rule(0, false, 0, q, &mut rules);
    }
    // Gate propagation.
    for (gi, g) in c.gates.iter().enumerate() {
        match g.op {
            GateOp::And(s1, s2) | GateOp::Or(s1, s2) => {
                let is_and = matches!(g.op, GateOp::And(..));
                for b1 in [false, true] {
                    for b2 in [false, true] {
                        let letter = alphabet.len();
                        alphabet.push(format!("{}_{}{}", g.name, b1 as u8, b2 as u8));
                        let out = if is_and { b1 && b2 } else { b1 || b2 };
                        let q_out = sid(&c.gates[gi].name, out);
                        rule(sid(operand_label(c, s1), b1), true, letter, q_out, &mut rules);
                        rule(sid(operand_label(c, s2), b2), false, letter, q_out, &mut rules);
                    }
                }
            }
            GateOp::Not(s) => {
                for b in [false, true] {
                    let letter = alphabet.len();
                    alphabet.push(format!("{}_{}", g.name, b as u8));
                    let q_out = sid(&c.gates[gi].name, !b);
                    let q_in = sid(operand_label(c, s), b);
                    rule(q_in, true, letter, q_out, &mut rules);
                    rule(q_in, false, letter, q_out, &mut rules);
                }
            }
        }
    }
    // Output hop.
    let q_out1 = sid(operand_label(c, c.output), true);
    rule(q_out1, true, 1, 1, &mut rules);
    rule(q_out1, false, 1, 1, &mut rules);
    // Broadcast: one sender at fin, a receiver rule for every state.
    rule(1, true, 2, 1, &mut rules);
    for q in 0..states.len() {
        rule(q, false, 2, 1, &mut rules);
    }

    Protocol::new(states, alphabet, 0, 1, rules).expect("reduction output is well formed")
}

/// Rule count of [`gen_cvp_protocol`], derivable from the construction:
/// `2n` input rules, 8 per binary gate, 4 per not gate, 2 output rules and
/// `1 + #states` broadcast rules.
pub fn cvp_rule_count(c: &Circuit) -> usize {
    let binary =
        c.gates.iter().filter(|g| matches!(g.op, GateOp::And(..) | GateOp::Or(..))).count();
    let nots = c.gates.len() - binary;
    let states = 2 + 2 * (c.inputs.len() + c.gates.len());
    2 * c.inputs.len() + 8 * binary + 4 * nots + 2 + 1 + states
}

// ---------------------------------------------------------------------------
// 3-CNF formulas and the 3-SAT reduction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lit {
    /// 0-based variable index.
    pub var: usize,
    pub negated: bool,
}

/// A 3-CNF formula: every clause has exactly three literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[Lit; 3]>,
}

impl CnfFormula {
    pub fn validate(&self) -> Result<(), GenError> {
        for c in &self.clauses {
            for l in c {
                if l.var >= self.num_vars {
                    return Err(GenError::Guard("literal index out of range".into()));
                }
            }
        }
        Ok(())
    }
}

/// Exhaustive satisfiability check, guarded to at most 20 variables.
pub fn sat_brute_force(f: &CnfFormula) -> Result<bool, GenError> {
    f.validate()?;
    if f.num_vars > 20 {
        return Err(GenError::Guard("brute-force SAT limited to 20 variables".into()));
    }
    for bits in 0u32..(1u32 << f.num_vars) {
        let assignment = |v: usize| bits >> v & 1 == 1;
        if f.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment(l.var) != l.negated))
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The 3-SAT reduction to symmetric leader protocols. The leader walks a
/// chain of variable gadgets choosing a polarity per variable and can notify
/// one waiting follower per clause made true; followers climb a clause chain
/// and the parity of the follower count forces every clause to be notified.
pub fn gen_3sat_leader_protocol(f: &CnfFormula) -> LeaderProtocolPair {
    f.validate().expect("valid formula");
    let n = f.num_vars;
    let m = f.clauses.len();

    let mut leader_states: Vec<String> = Vec::with_capacity(3 * n + 1);
    leader_states.push("p0".into());
    for j in 1..=n {
        leader_states.push(format!("T{j}"));
        leader_states.push(format!("F{j}"));
        leader_states.push(format!("p{j}"));
    }
    let p = |j: usize| if j == 0 { 0 } else { 3 * j };
    let top = |j: usize| 3 * j - 2;
    let bot = |j: usize| 3 * j - 1;

    // Letters: `a` then one letter per clause.
    let mut alphabet: Vec<String> = vec!["a".into()];
    for k in 1..=m {
        alphabet.push(format!("c{k}"));
    }

    let mut leader_rules: Vec<Rule> = Vec::new();
    let sym = |from: usize, letter: usize, to: usize, rules: &mut Vec<Rule>| {
        rules.push(Rule { from, action: RuleAction::Send(letter), to });
        rules.push(Rule { from, action: RuleAction::Receive(letter), to });
    };
    for j in 0..n {
        sym(p(j), 0, top(j + 1), &mut leader_rules);
        sym(p(j), 0, bot(j + 1), &mut leader_rules);
        sym(top(j + 1), 0, p(j + 1), &mut leader_rules);
        sym(bot(j + 1), 0, p(j + 1), &mut leader_rules);
        for (k, clause) in f.clauses.iter().enumerate() {
            if clause.iter().any(|l| l.var == j && !l.negated) {
                sym(top(j + 1), k + 1, top(j + 1), &mut leader_rules);
            }
            if clause.iter().any(|l| l.var == j && l.negated) {
                sym(bot(j + 1), k + 1, bot(j + 1), &mut leader_rules);
            }
        }
    }
    let leader = SymmetricProtocol::new(
        Protocol::new(leader_states, alphabet.clone(), 0, p(n), leader_rules)
            .expect("leader gadget is well formed"),
    )
    .expect("leader gadget is symmetric");

    let follower_states: Vec<String> = (0..=m).map(|j| format!("q{j}")).collect();
    let mut follower_rules: Vec<Rule> = Vec::new();
    for j in 0..m {
        sym(j, j + 1, j + 1, &mut follower_rules);
    }
    sym(0, 0, m, &mut follower_rules);
    let follower = SymmetricProtocol::new(
        Protocol::new(follower_states, alphabet, 0, m, follower_rules)
            .expect("follower chain is well formed"),
    )
    .expect("follower chain is symmetric");

    LeaderProtocolPair::new(leader, follower).expect("reduction output is well formed")
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct RandomProtocolParams {
    pub max_states: usize,
    pub max_letters: usize,
    pub max_rules: usize,
    pub symmetric: bool,
    pub seed: u64,
}

/// Seeded random protocol with `init != fin`. Unless the rule budget forbids
/// it, at least one letter carries both a send and a receive rule so the
/// derived net is non-degenerate. Symmetric mode emits paired rules.
pub fn gen_random_protocol(params: &RandomProtocolParams) -> Protocol {
    assert!(params.max_states >= 2, "need at least two states");
    assert!(params.max_letters >= 1, "need at least one letter");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let ns = rng.random_range(2..=params.max_states);
    let nl = rng.random_range(1..=params.max_letters);
    let states: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let alphabet: Vec<String> = (0..nl).map(|i| format!("l{i}")).collect();
    let init = 0;
    let fin = rng.random_range(1..ns);

    let mut rules: Vec<Rule> = Vec::new();
    let target = rng.random_range(0..=params.max_rules);
    if params.symmetric {
        while rules.len() + 2 <= target {
            let from = rng.random_range(0..ns);
            let to = rng.random_range(0..ns);
            let a = rng.random_range(0..nl);
            rules.push(Rule { from, action: RuleAction::Send(a), to });
            rules.push(Rule { from, action: RuleAction::Receive(a), to });
        }
    } else {
        while rules.len() < target {
            let from = rng.random_range(0..ns);
            let to = rng.random_range(0..ns);
            let a = rng.random_range(0..nl);
            let send = rng.random_range(0..2) == 0;
            let action = if send { RuleAction::Send(a) } else { RuleAction::Receive(a) };
            rules.push(Rule { from, action, to });
        }
        // Guarantee one send/receive pairing when the budget allows it.
        let paired = (0..nl).any(|a| {
            rules.iter().any(|r| r.action == RuleAction::Send(a))
                && rules.iter().any(|r| r.action == RuleAction::Receive(a))
        });
        if !paired && params.max_rules >= 2 {
            while rules.len() > params.max_rules - 2 {
                rules.pop();
            }
            let a = rng.random_range(0..nl);
            let from = rng.random_range(0..ns);
            let to = rng.random_range(0..ns);
            rules.push(Rule { from, action: RuleAction::Send(a), to });
            let from = rng.random_range(0..ns);
            let to = rng.random_range(0..ns);
            rules.push(Rule { from, action: RuleAction::Receive(a), to });
        }
    }
    Protocol::new(states, alphabet, init, fin, rules).expect("random protocol is well formed")
}

/// Random symmetric protocol, as a validated [`SymmetricProtocol`].
pub fn gen_random_symmetric(params: &RandomProtocolParams) -> SymmetricProtocol {
    let mut p = *params;
    p.symmetric = true;
    SymmetricProtocol::new(gen_random_protocol(&p)).expect("generator emits paired rules")
}

#[derive(Clone, Copy, Debug)]
pub struct RandomNetParams {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_weight: u32,
    pub max_tokens: u64,
    pub seed: u64,
}

/// Seeded random acyclic net system: places and transitions are interleaved
/// on a random rank line and arcs only point forward, so the bipartite graph
/// is a DAG by construction.
pub fn gen_random_acyclic_net(params: &RandomNetParams) -> PetriNetSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let np = rng.random_range(1..=params.max_places);
    let nt = rng.random_range(0..=params.max_transitions);
    // Random strict ranks: place p gets rank_p[p], transition t rank_t[t].
    let total = np + nt;
    let mut ranks: Vec<usize> = (0..total).collect();
    for i in (1..total).rev() {
        let j = rng.random_range(0..=i);
        ranks.swap(i, j);
    }
    let (rank_p, rank_t) = ranks.split_at(np);

    let places: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let transitions: Vec<String> = (0..nt).map(|i| format!("t{i}")).collect();
    let mut pre = vec![vec![0u32; np]; nt];
    let mut post = vec![vec![0u32; np]; nt];
    for t in 0..nt {
        let before: Vec<usize> = (0..np).filter(|&p| rank_p[p] < rank_t[t]).collect();
        let after: Vec<usize> = (0..np).filter(|&p| rank_p[p] > rank_t[t]).collect();
        for _ in 0..rng.random_range(0..=2usize) {
            if let Some(&p) = pick(&mut rng, &before) {
                pre[t][p] += rng.random_range(1..=params.max_weight);
            }
        }
        for _ in 0..rng.random_range(0..=2usize) {
            if let Some(&p) = pick(&mut rng, &after) {
                post[t][p] += rng.random_range(1..=params.max_weight);
            }
        }
    }
    let net = PetriNet::new(places, transitions, pre, post).expect("random net is well formed");
    debug_assert!(crate::model::is_acyclic(&net));
    let initial =
        Marking::from_counts((0..np).map(|_| rng.random_range(0..=params.max_tokens)).collect());
    let final_marking =
        Marking::from_counts((0..np).map(|_| rng.random_range(0..=params.max_tokens)).collect());
    PetriNetSystem { net, initial, final_marking }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.random_range(0..items.len())])
    }
}

/// Seeded random circuit with up to `max_gates` gates.
pub fn gen_random_circuit(max_inputs: usize, max_gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ni = rng.random_range(1..=max_inputs);
    let ng = rng.random_range(1..=max_gates);
    let inputs: Vec<(String, bool)> =
        (0..ni).map(|i| (format!("x{i}"), rng.random_range(0..2) == 1)).collect();
    let mut gates = Vec::with_capacity(ng);
    for gi in 0..ng {
        let operand = |rng: &mut ChaCha8Rng| {
            let pool = ni + gi;
            let k = rng.random_range(0..pool);
            if k < ni {
                Operand::Input(k)
            } else {
                Operand::Gate(k - ni)
            }
        };
        let op = match rng.random_range(0..3) {
            0 => GateOp::And(operand(&mut rng), operand(&mut rng)),
            1 => GateOp::Or(operand(&mut rng), operand(&mut rng)),
            _ => GateOp::Not(operand(&mut rng)),
        };
        gates.push(Gate { name: format!("g{gi}"), op });
    }
    let c = Circuit { inputs, gates, output: Operand::Gate(ng - 1) };
    c.validate().expect("random circuit is a DAG");
    c
}

/// Seeded random 3-CNF formula; clauses may repeat literals (padding).
pub fn gen_random_cnf(max_vars: usize, max_clauses: usize, seed: u64) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            [0; 3].map(|_| Lit {
                var: rng.random_range(0..n),
                negated: rng.random_range(0..2) == 1,
            })
        })
        .collect();
    CnfFormula { num_vars: n, clauses }
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

/// Parse a circuit file: `[circuit]`, an `inputs:` line of `name=bit`
/// entries, one gate per line (`g = and x y` / `g = not x`), and an
/// `output:` line.
pub fn parse_circuit(text: &str) -> Result<Circuit, GenError> {
    let mut inputs: Vec<(String, bool)> = Vec::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut output: Option<String> = None;
    let mut saw_header = false;
    let mut saw_inputs = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "[circuit]" {
                return perr(ln, format!("expected `[circuit]`, found `{line}`"));
            }
            saw_header = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("inputs:") {
            if saw_inputs {
                return perr(ln, "duplicate `inputs:` line");
            }
            saw_inputs = true;
            for item in rest.split_whitespace() {
                let Some((name, v)) = item.split_once('=') else {
                    return perr(ln, format!("expected `name=bit`, found `{item}`"));
                };
                let bit = match v {
                    "0" => false,
                    "1" => true,
                    _ => return perr(ln, format!("expected 0 or 1, found `{v}`")),
                };
                inputs.push((name.to_string(), bit));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("output:") {
            if output.is_some() {
                return perr(ln, "duplicate `output:` line");
            }
            output = Some(rest.trim().to_string());
            continue;
        }
        let Some((name, body)) = line.split_once('=') else {
            return perr(ln, format!("expected a gate definition, found `{line}`"));
        };
        let name = name.trim().to_string();
        let parts: Vec<&str> = body.split_whitespace().collect();
        let resolve = |token: &str| -> Result<Operand, GenError> {
            if let Some(i) = inputs.iter().position(|(n, _)| n == token) {
                return Ok(Operand::Input(i));
            }
            if let Some(g) = gates.iter().position(|g| g.name == token) {
                return Ok(Operand::Gate(g));
            }
            perr(ln, format!("undeclared identifier `{token}`"))
        };
        let op = match parts.as_slice() {
            ["and", a, b] => GateOp::And(resolve(a)?, resolve(b)?),
            ["or", a, b] => GateOp::Or(resolve(a)?, resolve(b)?),
            ["not", a] => GateOp::Not(resolve(a)?),
            _ => return perr(ln, "expected `and x y`, `or x y` or `not x`".to_string()),
        };
        gates.push(Gate { name, op });
    }
    let Some(out_name) = output else {
        return perr(0, "missing `output:` line");
    };
    let output = if let Some(i) = inputs.iter().position(|(n, _)| *n == out_name) {
        Operand::Input(i)
    } else if let Some(g) = gates.iter().position(|g| g.name == out_name) {
        Operand::Gate(g)
    } else {
        return perr(0, format!("undeclared output `{out_name}`"));
    };
    let c = Circuit { inputs, gates, output };
    c.validate()?;
    Ok(c)
}

pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::from("[circuit]\n");
    let inputs: Vec<String> =
        c.inputs.iter().map(|(n, v)| format!("{n}={}", *v as u8)).collect();
    let _ = writeln!(out, "inputs: {}", inputs.join(" "));
    for g in &c.gates {
        match g.op {
            GateOp::And(a, b) => {
                let _ = writeln!(out, "{} = and {} {}", g.name, operand_label(c, a), operand_label(c, b));
            }
            GateOp::Or(a, b) => {
                let _ = writeln!(out, "{} = or {} {}", g.name, operand_label(c, a), operand_label(c, b));
            }
            GateOp::Not(a) => {
                let _ = writeln!(out, "{} = not {}", g.name, operand_label(c, a));
            }
        }
    }
    let _ = writeln!(out, "output: {}", operand_label(c, c.output));
    out
}

/// Parse the DIMACS subset: `p cnf <vars> <clauses>` followed by
/// zero-terminated clauses of exactly three literals; `c` lines are comments.
pub fn parse_cnf(text: &str) -> Result<CnfFormula, GenError> {
    let mut num_vars: Option<usize> = None;
    let mut expected_clauses = 0usize;
    let mut clauses: Vec<[Lit; 3]> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            if num_vars.is_some() {
                return perr(ln, "duplicate problem line");
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return perr(ln, "expected `p cnf <vars> <clauses>`");
            }
            num_vars = Some(
                parts[0].parse().map_err(|_| GenError::Parse {
                    line: ln,
                    message: format!("bad variable count `{}`", parts[0]),
                })?,
            );
            expected_clauses = parts[1].parse().map_err(|_| GenError::Parse {
                line: ln,
                message: format!("bad clause count `{}`", parts[1]),
            })?;
            continue;
        }
        let Some(n) = num_vars else {
            return perr(ln, "clause before problem line");
        };
        let lits: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
        let lits = lits.map_err(|_| GenError::Parse {
            line: ln,
            message: format!("bad clause `{line}`"),
        })?;
        if lits.len() != 4 || lits[3] != 0 {
            return perr(ln, "expected exactly three literals terminated by 0");
        }
        let mut clause = [Lit { var: 0, negated: false }; 3];
        for (k, &l) in lits[..3].iter().enumerate() {
            if l == 0 || l.unsigned_abs() as usize > n {
                return perr(ln, format!("literal `{l}` out of range"));
            }
            clause[k] = Lit { var: l.unsigned_abs() as usize - 1, negated: l < 0 };
        }
        clauses.push(clause);
    }
    let Some(num_vars) = num_vars else {
        return perr(0, "missing problem line");
    };
    if clauses.len() != expected_clauses {
        return perr(0, format!("expected {expected_clauses} clauses, found {}", clauses.len()));
    }
    Ok(CnfFormula { num_vars, clauses })
}

pub fn serialize_cnf(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        let lits: Vec<String> = c
            .iter()
            .map(|l| {
                let v = (l.var + 1) as i64;
                format!("{}", if l.negated { -v } else { v })
            })
            .collect();
        let _ = writeln!(out, "{} 0", lits.join(" "));
    }
    out
}

// ---------------------------------------------------------------------------
// Built-in catalog
// ---------------------------------------------------------------------------

/// Small named instances used throughout the test suites and reachable from
/// the command line as `builtin:<name>`.
pub mod catalog {
    use super::*;

    /// Five-place diamond net with arc weights up to 2; it admits a cut-off
    /// and the smallest even/odd scaling witnesses are 2 and 3.
    pub fn diamond() -> PetriNetSystem {
        let net = PetriNet::new(
            vec!["i".into(), "pl".into(), "pm".into(), "pr".into(), "f".into()],
            vec!["t1".into(), "t2".into(), "t3".into(), "t4".into()],
            vec![
                vec![2, 0, 0, 0, 0],
                vec![1, 1, 0, 0, 0],
                vec![2, 0, 0, 0, 0],
                vec![0, 0, 1, 1, 0],
            ],
            vec![
                vec![0, 0, 0, 0, 2],
                vec![0, 0, 0, 1, 1],
                vec![0, 1, 1, 0, 0],
                vec![0, 0, 0, 0, 2],
            ],
        )
        .unwrap();
        PetriNetSystem {
            net,
            initial: Marking::from_counts(vec![1, 0, 0, 0, 0]),
            final_marking: Marking::from_counts(vec![0, 0, 0, 0, 1]),
        }
    }

    /// One symmetric rule `init a fin`: the derived net moves tokens in
    /// pairs, so only even populations make it.
    pub fn single_rule() -> SymmetricProtocol {
        SymmetricProtocol::new(
            Protocol::new(
                vec!["init".into(), "fin".into()],
                vec!["a".into()],
                0,
                1,
                vec![
                    Rule { from: 0, action: RuleAction::Send(0), to: 1 },
                    Rule { from: 0, action: RuleAction::Receive(0), to: 1 },
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    /// Two letters with a mixed rendez-vous `init+fin -> 2 fin`; both
    /// parities work, so a cut-off exists.
    pub fn two_letter() -> SymmetricProtocol {
        SymmetricProtocol::new(
            Protocol::new(
                vec!["init".into(), "fin".into()],
                vec!["a".into(), "b".into()],
                0,
                1,
                vec![
                    Rule { from: 0, action: RuleAction::Send(0), to: 1 },
                    Rule { from: 0, action: RuleAction::Receive(0), to: 1 },
                    Rule { from: 0, action: RuleAction::Send(1), to: 1 },
                    Rule { from: 0, action: RuleAction::Receive(1), to: 1 },
                    Rule { from: 1, action: RuleAction::Send(1), to: 1 },
                    Rule { from: 1, action: RuleAction::Receive(1), to: 1 },
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    /// One transition moving a single token from `p` to `q`; small enough
    /// that scaling and insertion witnesses materialize fully.
    pub fn relay() -> PetriNetSystem {
        let net = PetriNet::new(
            vec!["p".into(), "q".into()],
            vec!["t".into()],
            vec![vec![1, 0]],
            vec![vec![0, 1]],
        )
        .unwrap();
        PetriNetSystem {
            net,
            initial: Marking::from_counts(vec![1, 0]),
            final_marking: Marking::from_counts(vec![0, 1]),
        }
    }

    pub fn sat_demo_formula() -> CnfFormula {
        CnfFormula {
            num_vars: 1,
            clauses: vec![[Lit { var: 0, negated: false }; 3]],
        }
    }

    pub fn unsat_demo_formula() -> CnfFormula {
        CnfFormula {
            num_vars: 1,
            clauses: vec![
                [Lit { var: 0, negated: false }; 3],
                [Lit { var: 0, negated: true }; 3],
            ],
        }
    }

    /// Leader protocol of a satisfiable one-variable formula.
    pub fn sat_demo() -> LeaderProtocolPair {
        gen_3sat_leader_protocol(&sat_demo_formula())
    }

    /// Leader protocol of `x and not x`.
    pub fn unsat_demo() -> LeaderProtocolPair {
        gen_3sat_leader_protocol(&unsat_demo_formula())
    }

    pub const NAMES: &[&str] =
        &["diamond", "single-rule", "two-letter", "relay", "sat-demo", "unsat-demo"];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RuleAction;

    fn and_circuit(a: bool, b: bool) -> Circuit {
        Circuit {
            inputs: vec![("x1".into(), a), ("x2".into(), b)],
            gates: vec![Gate { name: "g1".into(), op: GateOp::And(Operand::Input(0), Operand::Input(1)) }],
            output: Operand::Gate(0),
        }
    }

    #[test]
    fn eval_basics() {
        assert!(eval_circuit(&and_circuit(true, true)));
        assert!(!eval_circuit(&and_circuit(true, false)));
        let not1 = Circuit {
            inputs: vec![("x".into(), true)],
            gates: vec![Gate { name: "g".into(), op: GateOp::Not(Operand::Input(0)) }],
            output: Operand::Gate(0),
        };
        assert!(!eval_circuit(&not1));
        let or = Circuit {
            inputs: vec![("x".into(), true), ("y".into(), false)],
            gates: vec![
                Gate { name: "g1".into(), op: GateOp::And(Operand::Input(0), Operand::Input(1)) },
                Gate { name: "g2".into(), op: GateOp::Not(Operand::Input(1)) },
                Gate { name: "g3".into(), op: GateOp::Or(Operand::Gate(0), Operand::Gate(1)) },
            ],
            output: Operand::Gate(2),
        };
        assert!(eval_circuit(&or));
    }

    #[test]
    fn cvp_rule_count_matches_construction() {
        for c in [
            and_circuit(true, true),
            gen_random_circuit(3, 5, 11),
            gen_random_circuit(4, 8, 12),
        ] {
            let p = gen_cvp_protocol(&c);
            assert_eq!(p.rules.len(), cvp_rule_count(&c));
        }
    }

    #[test]
    fn cvp_states_cover_inputs_and_gates() {
        let c = and_circuit(true, false);
        let p = gen_cvp_protocol(&c);
        assert_eq!(p.states.len(), 2 + 2 * (c.inputs.len() + c.gates.len()));
        assert!(p.states.contains(&"x1_0".to_string()));
        assert!(p.states.contains(&"g1_1".to_string()));
    }

    #[test]
    fn sat_reduction_counts() {
        let f = gen_random_cnf(3, 4, 99);
        let lp = gen_3sat_leader_protocol(&f);
        assert_eq!(lp.leader.states.len(), 3 * f.num_vars + 1);
        assert_eq!(lp.follower.states.len(), f.clauses.len() + 1);
    }

    #[test]
    fn sat_gadget_leader_senders_stay_in_gadget() {
        let f = catalog::sat_demo_formula();
        let lp = gen_3sat_leader_protocol(&f);
        // Every leader rule on letter `a` starts in {p0, T1, F1}.
        let a = 0;
        for r in &lp.leader.rules {
            if r.action == RuleAction::Send(a) {
                let name = &lp.leader.states[r.from];
                assert!(["p0", "T1", "F1"].contains(&name.as_str()), "bad source {name}");
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(sat_brute_force(&catalog::sat_demo_formula()), Ok(true));
        assert_eq!(sat_brute_force(&catalog::unsat_demo_formula()), Ok(false));
        assert_eq!(sat_brute_force(&CnfFormula { num_vars: 1, clauses: vec![] }), Ok(true));
    }

    #[test]
    fn random_protocol_is_deterministic() {
        let params = RandomProtocolParams {
            max_states: 4,
            max_letters: 2,
            max_rules: 6,
            symmetric: false,
            seed: 42,
        };
        assert_eq!(gen_random_protocol(&params), gen_random_protocol(&params));
        let none = RandomProtocolParams { max_rules: 0, ..params };
        assert!(gen_random_protocol(&none).rules.is_empty());
    }

    #[test]
    fn random_symmetric_is_symmetric() {
        for seed in 0..20 {
            let params = RandomProtocolParams {
                max_states: 4,
                max_letters: 2,
                max_rules: 6,
                symmetric: true,
                seed,
            };
            gen_random_symmetric(&params); // constructor validates
        }
    }

    #[test]
    fn circuit_text_round_trip() {
        for seed in 0..10 {
            let c = gen_random_circuit(3, 6, seed);
            assert_eq!(parse_circuit(&serialize_circuit(&c)).unwrap(), c);
        }
    }

    #[test]
    fn cnf_text_round_trip() {
        for seed in 0..10 {
            let f = gen_random_cnf(3, 4, seed);
            assert_eq!(parse_cnf(&serialize_cnf(&f)).unwrap(), f);
        }
    }

    #[test]
    fn random_acyclic_nets_are_acyclic() {
        for seed in 0..30 {
            let sys = gen_random_acyclic_net(&RandomNetParams {
                max_places: 6,
                max_transitions: 6,
                max_weight: 2,
                max_tokens: 2,
                seed,
            });
            assert!(crate::model::is_acyclic(&sys.net));
        }
    }
}
