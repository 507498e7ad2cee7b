//! Text format for run-length-encoded runs:
//!
//! ```text
//! [rle-run]
//! start: p 64          # optional; defaults to the net's initial marking
//! block: 8 t t t
//! ```

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;

use cutoff_core::analysis::{RleBlock, RleRun};
use cutoff_core::model::{Marking, PetriNet};

pub fn parse_run(
    text: &str,
    net: &PetriNet,
    default_start: &Marking,
) -> Result<(Marking, RleRun), String> {
    let mut start = default_start.clone();
    let mut start_overridden = false;
    let mut blocks = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "[rle-run]" {
                return Err(format!("line {ln}: expected `[rle-run]`"));
            }
            saw_header = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("start:") {
            if !start_overridden {
                start = Marking::zero(net.num_places());
                start_overridden = true;
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(format!("line {ln}: expected `start: place count`"));
            }
            let Some(p) = net.places.iter().position(|n| n == parts[0]) else {
                return Err(format!("line {ln}: undeclared place `{}`", parts[0]));
            };
            let count: BigUint =
                parts[1].parse().map_err(|_| format!("line {ln}: bad count `{}`", parts[1]))?;
            start.0[p] = count;
        } else if let Some(rest) = line.strip_prefix("block:") {
            let mut parts = rest.split_whitespace();
            let Some(reps_s) = parts.next() else {
                return Err(format!("line {ln}: expected `block: reps t...`"));
            };
            let reps: BigUint =
                reps_s.parse().map_err(|_| format!("line {ln}: bad repetition `{reps_s}`"))?;
            if reps.is_zero() {
                return Err(format!("line {ln}: repetition count must be positive"));
            }
            let mut body = Vec::new();
            for name in parts {
                let Some(t) = net.transitions.iter().position(|n| n == name) else {
                    return Err(format!("line {ln}: undeclared transition `{name}`"));
                };
                body.push(t);
            }
            if body.is_empty() {
                return Err(format!("line {ln}: empty block body"));
            }
            blocks.push(RleBlock { body, reps });
        } else {
            return Err(format!("line {ln}: unknown line `{line}`"));
        }
    }
    if !saw_header {
        return Err("missing `[rle-run]` header".into());
    }
    Ok((start, RleRun { blocks }))
}

pub fn serialize_run(net: &PetriNet, start: &Marking, run: &RleRun) -> String {
    let mut out = String::from("[rle-run]\n");
    for (p, c) in start.0.iter().enumerate() {
        if !c.is_zero() {
            let _ = writeln!(out, "start: {} {}", net.places[p], c);
        }
    }
    for b in &run.blocks {
        let names: Vec<&str> = b.body.iter().map(|&t| net.transitions[t].as_str()).collect();
        let _ = writeln!(out, "block: {} {}", b.reps, names.join(" "));
    }
    out
}
