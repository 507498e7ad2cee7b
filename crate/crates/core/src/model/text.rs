//! Line-oriented text formats for protocols and nets, with deterministic
//! serializers that preserve declaration order.

use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

use super::{
    LeaderProtocolPair, Marking, ModelError, PetriNet, PetriNetSystem, Protocol, Rule, RuleAction,
    SymmetricProtocol,
};

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedInput {
    Plain(Protocol),
    Symmetric(SymmetricProtocol),
    Leader(LeaderProtocolPair),
    Net(PetriNetSystem),
}

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let body = match l.find('#') {
                    Some(k) => &l[..k],
                    None => l,
                };
                (i + 1, body.trim())
            })
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { items, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }
}

/// Parse a protocol, leader-protocol or net file, dispatching on the header.
pub fn parse_input(text: &str) -> Result<ParsedInput, ParseError> {
    let mut lines = Lines::new(text);
    let Some((ln, header)) = lines.next() else {
        return err(1, "empty input");
    };
    let parsed = match header {
        "[protocol]" => {
            ParsedInput::Plain(parse_protocol_block(&mut lines, false, None, ln)?.into_protocol_raw())
        }
        "[symmetric-protocol]" => {
            let p = parse_protocol_block(&mut lines, true, None, ln)?;
            ParsedInput::Symmetric(p.into_symmetric(ln)?)
        }
        "[leader-protocol]" => ParsedInput::Leader(parse_leader(&mut lines, ln)?),
        "[petrinet]" => ParsedInput::Net(parse_net_block(&mut lines, ln)?),
        other => return err(ln, format!("unknown header `{other}`")),
    };
    if let Some((ln, l)) = lines.peek() {
        return err(ln, format!("unexpected trailing content `{l}`"));
    }
    Ok(parsed)
}

/// Parse a protocol file; net files are rejected here.
pub fn parse_protocol(text: &str) -> Result<ParsedInput, ParseError> {
    match parse_input(text)? {
        ParsedInput::Net(_) => err(1, "expected a protocol file, found a net"),
        other => Ok(other),
    }
}

/// Parse a net file.
pub fn parse_net(text: &str) -> Result<PetriNetSystem, ParseError> {
    match parse_input(text)? {
        ParsedInput::Net(n) => Ok(n),
        _ => err(1, "expected a net file, found a protocol"),
    }
}

struct ParsedBlock {
    protocol: Protocol,
}

impl ParsedBlock {
    fn into_protocol_raw(self) -> Protocol {
        self.protocol
    }

    fn into_symmetric(self, line: usize) -> Result<SymmetricProtocol, ParseError> {
        SymmetricProtocol::new(self.protocol)
            .map_err(|e| ParseError { line, message: format!("{e}") })
    }
}

fn key_line<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str), ParseError> {
    match lines.next() {
        Some((ln, l)) => match l.strip_prefix(key) {
            Some(rest) => Ok((ln, rest.trim())),
            None => err(ln, format!("expected `{key}` line, found `{l}`")),
        },
        None => err(0, format!("unexpected end of input, expected `{key}`")),
    }
}

/// Shared parser for `[protocol]`, `[symmetric-protocol]` and the leader and
/// follower sub-blocks. A shared alphabet suppresses the `alphabet:` line.
fn parse_protocol_block(
    lines: &mut Lines<'_>,
    allow_shorthand: bool,
    shared_alphabet: Option<&[String]>,
    block_line: usize,
) -> Result<ParsedBlock, ParseError> {
    let (ln_states, states_s) = key_line(lines, "states:")?;
    let states: Vec<String> = states_s.split_whitespace().map(str::to_owned).collect();
    if states.is_empty() {
        return err(ln_states, "at least one state is required");
    }
    let alphabet: Vec<String> = match shared_alphabet {
        Some(a) => a.to_vec(),
        None => {
            let (_, alpha_s) = key_line(lines, "alphabet:")?;
            alpha_s.split_whitespace().map(str::to_owned).collect()
        }
    };
    let index: HashMap<&str, usize> =
        states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let letter_index: HashMap<&str, usize> =
        alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let (ln_init, init_s) = key_line(lines, "init:")?;
    let Some(&init) = index.get(init_s) else {
        return err(ln_init, format!("undeclared identifier `{init_s}`"));
    };
    let (ln_fin, fin_s) = key_line(lines, "fin:")?;
    let Some(&fin) = index.get(fin_s) else {
        return err(ln_fin, format!("undeclared identifier `{fin_s}`"));
    };
    let (ln_rules, rest) = key_line(lines, "rules:")?;
    if !rest.is_empty() {
        return err(ln_rules, "rules start on the following lines");
    }

    let mut rules = Vec::new();
    while let Some((ln, l)) = lines.peek() {
        if l.starts_with('[') {
            break;
        }
        lines.next();
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return err(ln, format!("expected `state action state`, found `{l}`"));
        }
        let Some(&from) = index.get(parts[0]) else {
            return err(ln, format!("undeclared identifier `{}`", parts[0]));
        };
        let Some(&to) = index.get(parts[2]) else {
            return err(ln, format!("undeclared identifier `{}`", parts[2]));
        };
        let action = parts[1];
        let lookup = |name: &str| -> Result<usize, ParseError> {
            match letter_index.get(name) {
                Some(&a) => Ok(a),
                None => err(ln, format!("undeclared identifier `{name}`")),
            }
        };
        if let Some(name) = action.strip_prefix('!') {
            rules.push(Rule { from, action: RuleAction::Send(lookup(name)?), to });
        } else if let Some(name) = action.strip_prefix('?') {
            rules.push(Rule { from, action: RuleAction::Receive(lookup(name)?), to });
        } else {
            if !allow_shorthand {
                return err(ln, "shorthand rules are only allowed in symmetric blocks");
            }
            let a = lookup(action)?;
            rules.push(Rule { from, action: RuleAction::Send(a), to });
            rules.push(Rule { from, action: RuleAction::Receive(a), to });
        }
    }
    let protocol = Protocol::new(states, alphabet, init, fin, rules)
        .map_err(|e| ParseError { line: block_line, message: format!("{e}") })?;
    Ok(ParsedBlock { protocol })
}

fn parse_leader(lines: &mut Lines<'_>, header_line: usize) -> Result<LeaderProtocolPair, ParseError> {
    let (_, alpha_s) = key_line(lines, "alphabet:")?;
    let alphabet: Vec<String> = alpha_s.split_whitespace().map(str::to_owned).collect();
    let (ln_l, l) = match lines.next() {
        Some(x) => x,
        None => return err(header_line, "missing `[leader]` block"),
    };
    if l != "[leader]" {
        return err(ln_l, format!("expected `[leader]`, found `{l}`"));
    }
    let leader = parse_protocol_block(lines, true, Some(&alphabet), ln_l)?.into_symmetric(ln_l)?;
    let (ln_f, f) = match lines.next() {
        Some(x) => x,
        None => return err(header_line, "missing `[follower]` block"),
    };
    if f != "[follower]" {
        return err(ln_f, format!("expected `[follower]`, found `{f}`"));
    }
    let follower = parse_protocol_block(lines, true, Some(&alphabet), ln_f)?.into_symmetric(ln_f)?;
    LeaderProtocolPair::new(leader, follower)
        .map_err(|e| ParseError { line: header_line, message: format!("{e}") })
}

fn parse_net_block(lines: &mut Lines<'_>, header_line: usize) -> Result<PetriNetSystem, ParseError> {
    let (_, places_s) = key_line(lines, "places:")?;
    let places: Vec<String> = places_s.split_whitespace().map(str::to_owned).collect();
    let (_, trans_s) = key_line(lines, "transitions:")?;
    let transitions: Vec<String> = trans_s.split_whitespace().map(str::to_owned).collect();
    let place_index: HashMap<&str, usize> =
        places.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let trans_index: HashMap<&str, usize> =
        transitions.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut pre = vec![vec![0u32; places.len()]; transitions.len()];
    let mut post = vec![vec![0u32; places.len()]; transitions.len()];
    let mut initial = Marking::zero(places.len());
    let mut final_marking = Marking::zero(places.len());
    let mut seen_initial = vec![false; places.len()];
    let mut seen_final = vec![false; places.len()];

    while let Some((ln, l)) = lines.next() {
        let (key, rest) = match l.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => return err(ln, format!("expected `key: ...`, found `{l}`")),
        };
        match key {
            "pre" | "post" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return err(ln, format!("expected `{key}: transition place weight`"));
                }
                let Some(&t) = trans_index.get(parts[0]) else {
                    return err(ln, format!("undeclared identifier `{}`", parts[0]));
                };
                let Some(&p) = place_index.get(parts[1]) else {
                    return err(ln, format!("undeclared identifier `{}`", parts[1]));
                };
                let w: i64 = parts[2].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad weight `{}`", parts[2]),
                })?;
                if w < 0 {
                    return err(ln, format!("negative weight `{w}`"));
                }
                if w == 0 {
                    continue; // zero-weight arcs are absent
                }
                let w = u32::try_from(w).map_err(|_| ParseError {
                    line: ln,
                    message: format!("weight `{w}` too large"),
                })?;
                if key == "pre" {
                    pre[t][p] += w;
                } else {
                    post[t][p] += w;
                }
            }
            "initial" | "final" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return err(ln, format!("expected `{key}: place count`"));
                }
                let Some(&p) = place_index.get(parts[0]) else {
                    return err(ln, format!("undeclared identifier `{}`", parts[0]));
                };
                let n: BigUint = parts[1].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad count `{}`", parts[1]),
                })?;
                let (marking, seen) = if key == "initial" {
                    (&mut initial, &mut seen_initial)
                } else {
                    (&mut final_marking, &mut seen_final)
                };
                if seen[p] {
                    return err(ln, format!("duplicate declaration for place `{}`", parts[0]));
                }
                seen[p] = true;
                marking.0[p] = n;
            }
            other => return err(ln, format!("unknown key `{other}`")),
        }
    }
    let net = PetriNet::new(places, transitions, pre, post)
        .map_err(|e| ParseError { line: header_line, message: format!("{e}") })?;
    PetriNetSystem::new(net, initial, final_marking)
        .map_err(|e| ParseError { line: header_line, message: format!("{e}") })
}

fn write_rules(out: &mut String, p: &Protocol) {
    for r in &p.rules {
        let (mark, a) = match r.action {
            RuleAction::Send(a) => ('!', a),
            RuleAction::Receive(a) => ('?', a),
        };
        let _ = writeln!(out, "{} {}{} {}", p.states[r.from], mark, p.alphabet[a], p.states[r.to]);
    }
}

fn write_component(out: &mut String, p: &Protocol) {
    let _ = writeln!(out, "states: {}", p.states.join(" "));
    let _ = writeln!(out, "init: {}", p.states[p.init]);
    let _ = writeln!(out, "fin: {}", p.states[p.fin]);
    let _ = writeln!(out, "rules:");
    write_rules(out, p);
}

pub fn serialize_protocol(p: &Protocol) -> String {
    let mut out = String::from("[protocol]\n");
    let _ = writeln!(out, "states: {}", p.states.join(" "));
    let _ = writeln!(out, "alphabet: {}", p.alphabet.join(" "));
    let _ = writeln!(out, "init: {}", p.states[p.init]);
    let _ = writeln!(out, "fin: {}", p.states[p.fin]);
    let _ = writeln!(out, "rules:");
    write_rules(&mut out, p);
    out
}

pub fn serialize_symmetric(p: &SymmetricProtocol) -> String {
    serialize_protocol(p.protocol()).replacen("[protocol]", "[symmetric-protocol]", 1)
}

pub fn serialize_leader(lp: &LeaderProtocolPair) -> String {
    let mut out = String::from("[leader-protocol]\n");
    let _ = writeln!(out, "alphabet: {}", lp.leader.alphabet.join(" "));
    let _ = writeln!(out, "[leader]");
    write_component(&mut out, lp.leader.protocol());
    let _ = writeln!(out, "[follower]");
    write_component(&mut out, lp.follower.protocol());
    out
}

pub fn serialize_net(sys: &PetriNetSystem) -> String {
    let net = &sys.net;
    let mut out = String::from("[petrinet]\n");
    let _ = writeln!(out, "places: {}", net.places.join(" "));
    let _ = writeln!(out, "transitions: {}", net.transitions.join(" "));
    for t in 0..net.num_transitions() {
        for p in 0..net.num_places() {
            if net.pre(p, t) > 0 {
                let _ =
                    writeln!(out, "pre: {} {} {}", net.transitions[t], net.places[p], net.pre(p, t));
            }
        }
        for p in 0..net.num_places() {
            if net.post(p, t) > 0 {
                let _ =
                    writeln!(out, "post: {} {} {}", net.transitions[t], net.places[p], net.post(p, t));
            }
        }
    }
    for p in 0..net.num_places() {
        if !sys.initial.0[p].is_zero() {
            let _ = writeln!(out, "initial: {} {}", net.places[p], sys.initial.0[p]);
        }
    }
    for p in 0..net.num_places() {
        if !sys.final_marking.0[p].is_zero() {
            let _ = writeln!(out, "final: {} {}", net.places[p], sys.final_marking.0[p]);
        }
    }
    out
}

pub fn serialize_input(input: &ParsedInput) -> String {
    match input {
        ParsedInput::Plain(p) => serialize_protocol(p),
        ParsedInput::Symmetric(p) => serialize_symmetric(p),
        ParsedInput::Leader(p) => serialize_leader(p),
        ParsedInput::Net(n) => serialize_net(n),
    }
}

impl From<ModelError> for ParseError {
    fn from(e: ModelError) -> Self {
        ParseError { line: 0, message: format!("{e}") }
    }
}
