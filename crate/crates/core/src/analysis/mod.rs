//! The main decision procedures: cut-off for acyclic and general net
//! systems, bounded-loss cut-off for protocols, explicit cut-off bounds and
//! constructive witness runs.
//!
//! A system admits a cut-off exactly when continuous reachability holds with
//! some maximal support `S` and the marking equation also has an integer
//! solution supported inside `S`. For acyclic nets the continuous condition
//! degenerates to plain nonnegative-rational feasibility. Bounded loss
//! replaces reachability by coverability of the final place and the integer
//! solution by a nonnegative rational one.

pub mod witness;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

use crate::continuous::{
    continuous_coverable, continuous_reachable, max_support_solution, ContinuousCertificate,
    SupportSet,
};
use crate::exact::{
    integer_solve, lp_solve, one_norm_int, one_norm_rat, support_int, support_rat, IntResult,
    LinearSystem, LpResult, Rat, SolutionVector, VarDomain,
};
use crate::model::{is_acyclic, protocol_to_net, PetriNet, PetriNetSystem, Protocol, TransId};

pub use witness::{
    build_insertion_witness, build_scaling_witness, find_run_with_parikh, insertion_multiplier,
    WitnessError, WitnessOutcome,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("the net is not acyclic")]
    NotAcyclic,
}

/// Certificate of one parity branch of a leader decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCert {
    /// 0 for even follower counts, 1 for odd.
    pub parity: u8,
    /// Follower count `n` realizing this parity.
    pub n: BigUint,
    /// Chosen leader-transition support.
    pub support: BTreeSet<TransId>,
    /// Transition counts witnessing the marking equation for `n`.
    pub solution: Vec<BigUint>,
}

/// Answer plus machine-checkable certificates. Which certificate fields are
/// set depends on the decision procedure that produced it.
#[derive(Clone, Debug, Default)]
pub struct Decision {
    pub answer: bool,
    /// Maximal support of the continuous (or rational) witness.
    pub support: Option<SupportSet>,
    /// Nonnegative rational solution of the marking equation.
    pub rational_solution: Option<Vec<Rat>>,
    /// Second solution: integer for cut-off decisions, nonnegative rational
    /// for bounded-loss decisions.
    pub integer_solution: Option<SolutionVector>,
    /// An explicit cut-off bound, when one is computed.
    pub bound: Option<BigUint>,
    /// State path witnessing graph reachability (symmetric deciders).
    pub graph_path: Option<Vec<usize>>,
    /// Solution bits of the parity system (symmetric deciders).
    pub f2_solution: Option<Vec<bool>>,
    /// Even/odd certificates (leader decider).
    pub parity_certs: Vec<ParityCert>,
    pub notes: Vec<String>,
}

impl Decision {
    pub fn no(note: impl Into<String>) -> Self {
        Decision { answer: false, notes: vec![note.into()], ..Decision::default() }
    }
}

/// The marking-equation system of `sys` over integer variables, with columns
/// outside `support` pinned to zero.
fn integer_restriction(sys: &PetriNetSystem, support: &SupportSet) -> LinearSystem {
    let net = &sys.net;
    let coeffs = (0..net.num_places())
        .map(|p| (0..net.num_transitions()).map(|t| BigInt::from(net.incidence(p, t))).collect())
        .collect();
    let domains = (0..net.num_transitions())
        .map(|t| if support.contains(&t) { VarDomain::Int } else { VarDomain::FixedZero })
        .collect();
    LinearSystem::new(coeffs, sys.delta(), domains)
}

/// Cut-off decision for acyclic systems: a nonnegative rational solution of
/// the marking equation with maximal support `S`, plus an integer solution
/// supported inside `S`.
pub fn decide_cutoff_acyclic(sys: &PetriNetSystem) -> Result<Decision, AnalysisError> {
    if !is_acyclic(&sys.net) {
        return Err(AnalysisError::NotAcyclic);
    }
    let all: SupportSet = (0..sys.net.num_transitions()).collect();
    let Some((support, x)) = max_support_solution(&sys.net, &sys.delta(), &all) else {
        return Ok(Decision::no("marking equation infeasible over nonnegative rationals"));
    };
    let int_sys = integer_restriction(sys, &support);
    match integer_solve(&int_sys) {
        IntResult::Infeasible => Ok(Decision {
            answer: false,
            support: Some(support),
            rational_solution: Some(x),
            notes: vec!["no integer solution inside the maximal rational support".into()],
            ..Decision::default()
        }),
        IntResult::Feasible(y) => {
            let bound = acyclic_bound(&x, &y);
            Ok(Decision {
                answer: true,
                support: Some(support),
                rational_solution: Some(x),
                integer_solution: Some(SolutionVector::Integer(y)),
                bound: Some(bound),
                ..Decision::default()
            })
        }
    }
}

/// `(a*u)^2` where `u` is the least common denominator of `x` and `a` the
/// largest magnitude in `y`: scaling `x` by `a*u` gives consecutive
/// reachable multiples, and the square of a consecutive pair is a cut-off.
fn acyclic_bound(x: &[Rat], y: &[BigInt]) -> BigUint {
    let mut lcd = BigInt::one();
    for v in x {
        lcd = lcd.lcm(v.denom());
    }
    let alpha = y.iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero);
    let n = alpha * lcd;
    (&n * &n).to_biguint().expect("square is nonnegative")
}

/// Cut-off decision for arbitrary net systems.
pub fn decide_cutoff(sys: &PetriNetSystem) -> Decision {
    if sys.initial == sys.final_marking {
        let nt = sys.net.num_transitions();
        return Decision {
            answer: true,
            support: Some(SupportSet::new()),
            rational_solution: Some(vec![Rat::zero(); nt]),
            integer_solution: Some(SolutionVector::Integer(vec![BigInt::zero(); nt])),
            bound: Some(BigUint::zero()),
            notes: vec!["identical markings: every population reaches itself".into()],
            ..Decision::default()
        };
    }
    let Some(cert) = continuous_reachable(sys) else {
        return Decision::no("not continuously reachable");
    };
    let int_sys = integer_restriction(sys, &cert.support);
    match integer_solve(&int_sys) {
        IntResult::Infeasible => Decision {
            answer: false,
            support: Some(cert.support),
            rational_solution: Some(cert.solution),
            notes: vec!["no integer solution inside the continuous support".into()],
            ..Decision::default()
        },
        IntResult::Feasible(y) => {
            let bound = compute_cutoff_bound(sys, &cert, &y);
            Decision {
                answer: true,
                support: Some(cert.support),
                rational_solution: Some(cert.solution),
                integer_solution: Some(SolutionVector::Integer(y)),
                bound: Some(bound),
                ..Decision::default()
            }
        }
    }
}

/// Bounded-loss cut-off decision for protocols: coverability of the final
/// place plus a nonnegative rational solution of the marking equation
/// supported inside the covering support.
pub fn decide_bounded_loss(p: &Protocol) -> Decision {
    let sys = protocol_to_net(p);
    let Some(cert) = continuous_coverable(&sys.net, &sys.initial, p.fin) else {
        return Decision::no("final state is not continuously coverable");
    };
    let net = &sys.net;
    let coeffs: Vec<Vec<BigInt>> = (0..net.num_places())
        .map(|pl| (0..net.num_transitions()).map(|t| BigInt::from(net.incidence(pl, t))).collect())
        .collect();
    let domains = (0..net.num_transitions())
        .map(|t| if cert.support.contains(&t) { VarDomain::RatNonNeg } else { VarDomain::FixedZero })
        .collect();
    let lp = LinearSystem::new(coeffs, sys.delta(), domains);
    match lp_solve(&lp, None) {
        LpResult::Feasible(sol) => Decision {
            answer: true,
            support: Some(cert.support),
            rational_solution: Some(cert.solution),
            integer_solution: Some(SolutionVector::Rational(sol.values)),
            ..Decision::default()
        },
        LpResult::Infeasible(_) => Decision {
            answer: false,
            support: Some(cert.support),
            rational_solution: Some(cert.solution),
            notes: vec!["no nonnegative rational solution inside the covering support".into()],
            ..Decision::default()
        },
        LpResult::Unbounded { .. } => unreachable!("feasibility solve cannot be unbounded"),
    }
}

/// Quantities of the explicit scaling construction for a continuous solution
/// `x` with support size `m` on a net of weight `w`: `k` clears the
/// denominators, `ell = |x|`, `beta = (w+1)^m`, `gamma = 4 w beta k ell` and
/// the overall scale is `4 k beta gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingParams {
    pub weight: u32,
    pub support_size: usize,
    /// Least `k >= 1` with `k*x` integral.
    pub k: BigUint,
    /// `|x|`, exact.
    pub ell: Rat,
    /// `k * ell`, integral by choice of `k`.
    pub k_ell: BigUint,
    pub beta: BigUint,
    pub gamma: BigUint,
    /// The scaling factor `N = 4 k beta gamma`.
    pub scale_n: BigUint,
}

impl ScalingParams {
    pub fn from_solution(net: &PetriNet, x: &[Rat]) -> ScalingParams {
        let support = support_rat(x);
        let m = support.len();
        let w = net.weight();
        assert!(m == 0 || w >= 1, "a transition with arcs is needed to move mass");
        let mut k = BigInt::one();
        for v in x {
            k = k.lcm(v.denom());
        }
        let k = k.to_biguint().expect("lcm of positive denominators");
        let ell = one_norm_rat(x);
        let k_ell_rat = Rat::from_integer(BigInt::from(k.clone())) * &ell;
        assert!(k_ell_rat.is_integer());
        let k_ell = k_ell_rat.to_integer().to_biguint().expect("nonnegative");
        let beta = BigUint::from(w + 1).pow(m as u32);
        let gamma = BigUint::from(4u8) * BigUint::from(w) * &beta * &k_ell;
        let scale_n = BigUint::from(4u8) * &k * &beta * &gamma;
        ScalingParams { weight: w, support_size: m, k, ell, k_ell, beta, gamma, scale_n }
    }

    /// Total length of the materialized scaling run, `N * ell`.
    pub fn total_steps(&self) -> BigUint {
        BigUint::from(4u8) * &self.beta * &self.gamma * &self.k_ell
    }
}

/// Explicit cut-off bound `(mu * N)^2` for a yes-decision: `N` scales the
/// continuous witness to a discrete run and `mu` copies admit the insertion
/// of the integer solution `y`, so `mu*N` and `mu*N + 1` are both reachable
/// multiples.
pub fn compute_cutoff_bound(
    sys: &PetriNetSystem,
    cert: &ContinuousCertificate,
    y: &[BigInt],
) -> BigUint {
    if cert.support.is_empty() {
        return BigUint::zero();
    }
    let params = ScalingParams::from_solution(&sys.net, &cert.solution);
    let n = BigInt::from(params.scale_n.clone());
    let lambda_x = BigInt::from(params.total_steps());
    let lambda_y = one_norm_int(y);
    let n_p = BigInt::from(sys.net.pre_of_set(&cert.support).len());
    let w = BigInt::from(sys.net.weight());
    let mu = &lambda_y * (&lambda_x * &n_p * &w + &n_p * &w + BigInt::one());
    let b = &mu * &n;
    (&b * &b).to_biguint().expect("square is nonnegative")
}

/// One block of a run-length-encoded firing sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RleBlock {
    pub body: Vec<TransId>,
    pub reps: BigUint,
}

/// A firing sequence as repeated blocks; repetition counts may be
/// astronomically large.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RleRun {
    pub blocks: Vec<RleBlock>,
}

impl RleRun {
    pub fn expanded_len(&self) -> BigUint {
        self.blocks
            .iter()
            .map(|b| BigUint::from(b.body.len() as u64) * &b.reps)
            .sum()
    }

    /// Per-transition occurrence counts.
    pub fn parikh(&self, num_transitions: usize) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); num_transitions];
        for b in &self.blocks {
            for &t in &b.body {
                out[t] += &b.reps;
            }
        }
        out
    }
}

/// Re-verify a cut-off decision from scratch. `check_saturations` is off for
/// acyclic decisions, whose supports come from plain feasibility.
pub fn verify_cutoff_decision(
    sys: &PetriNetSystem,
    d: &Decision,
    check_saturations: bool,
) -> Result<(), String> {
    if !d.answer {
        return Ok(());
    }
    let support = d.support.as_ref().ok_or("missing support")?;
    let x = d.rational_solution.as_ref().ok_or("missing rational solution")?;
    let Some(SolutionVector::Integer(y)) = d.integer_solution.as_ref() else {
        return Err("missing integer solution".into());
    };
    if &support_rat(x) != support {
        return Err("support differs from rational solution support".into());
    }
    if !support_int(y).is_subset(support) {
        return Err("integer support leaks outside the rational support".into());
    }
    let delta = sys.delta();
    let net = &sys.net;
    for (p, dv) in delta.iter().enumerate() {
        let mut rat_acc = -Rat::from_integer(dv.clone());
        let mut int_acc = -dv.clone();
        for t in 0..net.num_transitions() {
            let a = net.incidence(p, t);
            if a == 0 {
                continue;
            }
            if !x[t].is_zero() {
                rat_acc += Rat::from_integer(BigInt::from(a)) * &x[t];
            }
            if !y[t].is_zero() {
                int_acc += BigInt::from(a) * &y[t];
            }
        }
        if !rat_acc.is_zero() || !int_acc.is_zero() {
            return Err(format!("marking equation violated at place {p}"));
        }
    }
    if x.iter().any(Rat::is_negative) {
        return Err("negative rational entry".into());
    }
    if check_saturations {
        let cert = ContinuousCertificate {
            support: support.clone(),
            solution: x.clone(),
            forward_ok: true,
            backward_ok: true,
        };
        crate::continuous::verify_reachability_certificate(sys, &cert)?;
    }
    Ok(())
}

/// Re-verify a bounded-loss decision from scratch.
pub fn verify_bounded_loss_decision(p: &Protocol, d: &Decision) -> Result<(), String> {
    if !d.answer {
        return Ok(());
    }
    let sys = protocol_to_net(p);
    let support = d.support.as_ref().ok_or("missing support")?;
    let x = d.rational_solution.as_ref().ok_or("missing covering solution")?;
    let Some(SolutionVector::Rational(y)) = d.integer_solution.as_ref() else {
        return Err("missing rational equation solution".into());
    };
    let cert = ContinuousCertificate {
        support: support.clone(),
        solution: x.clone(),
        forward_ok: true,
        backward_ok: true,
    };
    crate::continuous::verify_coverability_certificate(&sys.net, &sys.initial, p.fin, &cert)?;
    if !support_rat(y).is_subset(support) {
        return Err("equation solution leaks outside the covering support".into());
    }
    if y.iter().any(Rat::is_negative) {
        return Err("negative equation solution entry".into());
    }
    let delta = sys.delta();
    for (pl, dv) in delta.iter().enumerate() {
        let mut acc = -Rat::from_integer(dv.clone());
        for (t, yt) in y.iter().enumerate() {
            let a = sys.net.incidence(pl, t);
            if a != 0 && !yt.is_zero() {
                acc += Rat::from_integer(BigInt::from(a)) * yt;
            }
        }
        if !acc.is_zero() {
            return Err(format!("marking equation violated at place {pl}"));
        }
    }
    Ok(())
}

#[allow(unused)]
fn to_u64(v: &BigUint) -> Option<u64> {
    v.to_u64()
}
