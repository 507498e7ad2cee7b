//! The report emitted by every subcommand: answer plus re-verifiable
//! certificates. Rationals serialize as `p/q` strings and big integers as
//! decimal strings, so no JSON consumer loses precision.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::Serialize;

use cutoff_core::analysis::{Decision, RleRun};
use cutoff_core::exact::{Rat, SolutionVector};
use cutoff_core::model::PetriNet;
use cutoff_core::oracle::ParityWitnesses;

#[derive(Serialize, Debug, Default)]
pub struct Certificates {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational_solution: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integer_solution: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2_solution: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub parity_certs: Vec<ParityCertReport>,
}

#[derive(Serialize, Debug)]
pub struct ParityCertReport {
    pub parity: u8,
    pub n: String,
    pub support: Vec<String>,
    pub solution: BTreeMap<String, String>,
}

#[derive(Serialize, Debug)]
pub struct ParityWitnessReport {
    pub even: Option<u64>,
    pub odd: Option<u64>,
    pub search_limit: u64,
}

#[derive(Serialize, Debug)]
pub struct WitnessReport {
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expanded_steps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockReport>>,
}

#[derive(Serialize, Debug)]
pub struct BlockReport {
    pub reps: String,
    pub body: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub problem: String,
    pub input_digest: String,
    pub answer: String,
    pub certificates: Certificates,
    pub parity_witnesses: Option<ParityWitnessReport>,
    pub oracle_cross_check: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    pub timing_ms: u128,
}

/// 64-bit FNV-1a of the raw input text.
pub fn input_digest(text: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("fnv1a64:{hash:016x}")
}

pub fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn solution_map<T, F: Fn(&T) -> String>(
    net: &PetriNet,
    values: &[T],
    is_zero: impl Fn(&T) -> bool,
    fmt: F,
) -> BTreeMap<String, String> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !is_zero(v))
        .map(|(t, v)| (net.transitions[t].clone(), fmt(v)))
        .collect()
}

pub fn certificates_of(net: &PetriNet, names: &[String], d: &Decision) -> Certificates {
    use num_traits::Zero;
    let mut c = Certificates::default();
    if let Some(s) = &d.support {
        c.support = Some(s.iter().map(|&t| net.transitions[t].clone()).collect());
    }
    if let Some(x) = &d.rational_solution {
        c.rational_solution = Some(solution_map(net, x, |v: &Rat| v.is_zero(), rat_string));
    }
    match &d.integer_solution {
        Some(SolutionVector::Integer(y)) => {
            c.integer_solution =
                Some(solution_map(net, y, |v| v.is_zero(), |v| v.to_string()));
        }
        Some(SolutionVector::Rational(y)) => {
            c.integer_solution = Some(solution_map(net, y, |v: &Rat| v.is_zero(), rat_string));
        }
        None => {}
    }
    if let Some(b) = &d.bound {
        c.bound = Some(b.to_string());
    }
    if let Some(p) = &d.graph_path {
        c.graph_path = Some(p.iter().map(|&s| names[s].clone()).collect());
    }
    if let Some(bits) = &d.f2_solution {
        c.f2_solution = Some(
            bits.iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(t, _)| net.transitions[t].clone())
                .collect(),
        );
    }
    for pc in &d.parity_certs {
        c.parity_certs.push(ParityCertReport {
            parity: pc.parity,
            n: pc.n.to_string(),
            support: pc.support.iter().map(|&t| net.transitions[t].clone()).collect(),
            solution: pc
                .solution
                .iter()
                .enumerate()
                .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
                .map(|(t, v)| (net.transitions[t].clone(), v.to_string()))
                .collect(),
        });
    }
    c
}

pub fn witness_blocks(net: &PetriNet, run: &RleRun) -> Vec<BlockReport> {
    run.blocks
        .iter()
        .map(|b| BlockReport {
            reps: b.reps.to_string(),
            body: b.body.iter().map(|&t| net.transitions[t].clone()).collect(),
        })
        .collect()
}

impl From<&ParityWitnesses> for ParityWitnessReport {
    fn from(w: &ParityWitnesses) -> Self {
        ParityWitnessReport { even: w.even, odd: w.odd, search_limit: w.search_limit }
    }
}

/// Human-readable rendering used without `--json`.
pub fn print_text(report: &Report) {
    println!("problem:  {}", report.problem);
    println!("input:    {}", report.input_digest);
    println!("answer:   {}", report.answer);
    if let Some(s) = &report.certificates.support {
        println!("support:  {{{}}}", s.join(", "));
    }
    if let Some(x) = &report.certificates.rational_solution {
        let body: Vec<String> = x.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("rational: {}", body.join(" "));
    }
    if let Some(y) = &report.certificates.integer_solution {
        let body: Vec<String> = y.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("second:   {}", body.join(" "));
    }
    if let Some(b) = &report.certificates.bound {
        println!("bound:    {b}");
    }
    if let Some(p) = &report.certificates.graph_path {
        println!("path:     {}", p.join(" -> "));
    }
    if let Some(f) = &report.certificates.f2_solution {
        println!("odd bits: {{{}}}", f.join(", "));
    }
    for pc in &report.certificates.parity_certs {
        let sol: Vec<String> = pc.solution.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("parity {}: n={} support={{{}}} {}", pc.parity, pc.n, pc.support.join(", "), sol.join(" "));
    }
    if let Some(w) = &report.parity_witnesses {
        let even = w.even.map_or("-".to_string(), |n| n.to_string());
        let odd = w.odd.map_or("-".to_string(), |n| n.to_string());
        println!("oracle:   even={} odd={} (searched to {})", even, odd, w.search_limit);
    }
    if let Some(o) = &report.oracle_cross_check {
        println!("check:    {o}");
    }
    if let Some(w) = &report.witness {
        let steps = w.expanded_steps.clone().unwrap_or_default();
        println!("witness:  {} steps={}", w.outcome, steps);
        if let Some(v) = w.validated {
            println!("validated: {v}");
        }
    }
    for n in &report.notes {
        println!("note:     {n}");
    }
    println!("time:     {} ms", report.timing_ms);
}
