use super::*;
use crate::analysis::decide_cutoff;
use crate::exact::f2_solve;
use crate::generators::{catalog, gen_3sat_leader_protocol, sat_brute_force};
use crate::model::RuleAction;
use crate::oracle::{bfs_reach, ReachTarget};

fn one_state_leader(alphabet: Vec<String>) -> SymmetricProtocol {
    SymmetricProtocol::new(
        Protocol::new(vec!["lead".into()], alphabet, 0, 0, vec![]).unwrap(),
    )
    .unwrap()
}

#[test]
fn single_rule_symmetric_has_no_cutoff() {
    let d = decide_symmetric_cutoff(&catalog::single_rule());
    assert!(!d.answer);
    // The path exists; the parity system is what fails.
    assert!(d.notes.iter().any(|n| n.contains("parity")));
}

#[test]
fn two_letter_symmetric_has_cutoff() {
    let p = catalog::two_letter();
    let d = decide_symmetric_cutoff(&p);
    assert!(d.answer);
    let bits = d.f2_solution.expect("odd witness bits");
    // Re-substitute the returned bits into the parity system.
    let (_net, var_of, f2) = symmetric_parity_system(&p);
    let reduced: Vec<bool> = var_of
        .iter()
        .enumerate()
        .filter_map(|(t, v)| v.map(|_| bits[t]))
        .collect();
    assert!(f2.check(&reduced));
    // And the oracle confirms an odd witness at 3.
    let sys = protocol_to_net(p.protocol());
    let w = crate::oracle::semi_decide_cutoff(&sys, 10, 100_000);
    assert_eq!(w.odd, Some(3));
}

#[test]
fn unreachable_final_state_is_no() {
    let p = SymmetricProtocol::new(
        Protocol::new(
            vec!["init".into(), "fin".into(), "x".into()],
            vec!["a".into()],
            0,
            1,
            vec![
                Rule { from: 0, action: RuleAction::Send(0), to: 2 },
                Rule { from: 0, action: RuleAction::Receive(0), to: 2 },
            ],
        )
        .unwrap(),
    )
    .unwrap();
    assert!(!decide_symmetric_cutoff(&p).answer);
    assert!(!decide_symmetric_bounded_loss(&p).answer);
}

#[test]
fn bounded_loss_symmetric_examples() {
    let d = decide_symmetric_bounded_loss(&catalog::single_rule());
    assert!(d.answer);
    assert_eq!(d.bound, Some(BigUint::one()));
    assert_eq!(d.graph_path, Some(vec![0, 1]));

    let no_rules = SymmetricProtocol::new(
        Protocol::new(vec!["init".into(), "fin".into()], vec!["a".into()], 0, 1, vec![]).unwrap(),
    )
    .unwrap();
    assert!(!decide_symmetric_bounded_loss(&no_rules).answer);

    assert!(decide_symmetric_bounded_loss(&catalog::two_letter()).answer);
}

#[test]
fn good_states_need_both_directions() {
    // init -> x with no way back to fin: x is reachable but bad.
    let p = Protocol::new(
        vec!["init".into(), "fin".into(), "x".into()],
        vec!["a".into()],
        0,
        1,
        vec![
            Rule { from: 0, action: RuleAction::Send(0), to: 2 },
            Rule { from: 0, action: RuleAction::Receive(0), to: 2 },
            Rule { from: 0, action: RuleAction::Send(0), to: 1 },
            Rule { from: 0, action: RuleAction::Receive(0), to: 1 },
        ],
    )
    .unwrap();
    let g = good_states(&p);
    assert_eq!(g.good, BTreeSet::from([0, 1]));
}

/// Every good state is visitable by an agent pair on the way from init to
/// fin, confirmed by the oracle on small instances.
#[test]
fn good_states_are_pairwise_visitable() {
    let p = catalog::two_letter();
    let sys = protocol_to_net(p.protocol());
    for &q in &good_states(p.protocol()).good {
        let start = Marking::from_counts(vec![2, 0]);
        let via = Marking::single(sys.net.num_places(), q).scaled(&BigUint::from(2u8));
        let r = bfs_reach(&sys.net, &start, ReachTarget::Marking(&via), 100_000);
        assert!(r.status.is_yes(), "state {q} not reachable as a pair");
        let target = Marking::from_counts(vec![0, 2]);
        let r2 = bfs_reach(&sys.net, &via, ReachTarget::Marking(&target), 100_000);
        assert!(r2.status.is_yes(), "fin pair not reachable from state {q}");
    }
}

#[test]
fn specialization_agrees_with_general_decider() {
    use crate::generators::{gen_random_symmetric, RandomProtocolParams};
    for seed in 0..60 {
        let p = gen_random_symmetric(&RandomProtocolParams {
            max_states: 4,
            max_letters: 2,
            max_rules: 6,
            symmetric: true,
            seed,
        });
        let special = decide_symmetric_cutoff(&p);
        let general = decide_cutoff(&protocol_to_net(p.protocol()));
        assert_eq!(special.answer, general.answer, "seed {seed}");
    }
}

#[test]
fn trivial_leader_with_single_rule_follower_is_no() {
    let lp = LeaderProtocolPair::new(
        one_state_leader(vec!["a".into()]),
        catalog::single_rule(),
    )
    .unwrap();
    match decide_leader_cutoff(&lp, 100_000, SupportReading::default()).unwrap() {
        LeaderDecision::Decided(d) => {
            assert!(!d.answer);
            assert!(d.notes.iter().any(|n| n.contains("parity 1")));
        }
        LeaderDecision::Inconclusive { .. } => panic!("expected a decision"),
    }
}

#[test]
fn trivial_leader_with_two_letter_follower_is_yes() {
    let lp = LeaderProtocolPair::new(
        one_state_leader(vec!["a".into(), "b".into()]),
        catalog::two_letter(),
    )
    .unwrap();
    match decide_leader_cutoff(&lp, 100_000, SupportReading::default()).unwrap() {
        LeaderDecision::Decided(d) => {
            assert!(d.answer);
            assert_eq!(d.parity_certs.len(), 2);
            let (net_sys, ann) = leader_to_net(&lp);
            for cert in &d.parity_certs {
                verify_leader_cert(&net_sys.net, &ann, cert).unwrap();
            }
        }
        LeaderDecision::Inconclusive { .. } => panic!("expected a decision"),
    }
}

#[test]
fn sat_demo_is_yes_and_unsat_demo_is_no() {
    match decide_leader_cutoff(&catalog::sat_demo(), 100_000, SupportReading::default()).unwrap() {
        LeaderDecision::Decided(d) => assert!(d.answer),
        LeaderDecision::Inconclusive { .. } => panic!("sat demo must decide"),
    }
    match decide_leader_cutoff(&catalog::unsat_demo(), 100_000, SupportReading::default()).unwrap()
    {
        LeaderDecision::Decided(d) => assert!(!d.answer),
        LeaderDecision::Inconclusive { .. } => panic!("unsat demo must decide"),
    }
}

#[test]
fn sat_gadget_leader_senders_sit_in_the_first_gadget() {
    // One-variable formula: every letter-a transition driven by the leader
    // starts at p0, T1 or F1.
    let lp = catalog::sat_demo();
    let (sys, ann) = leader_to_net(&lp);
    let allowed: BTreeSet<usize> = ["p0", "T1", "F1"]
        .iter()
        .map(|n| sys.net.places.iter().position(|p| p == n).unwrap())
        .collect();
    let mut seen = 0;
    for (t, kind) in ann.kinds.iter().enumerate() {
        if let TransKind::Leader { from, .. } = kind {
            if sys.net.transitions[t].starts_with("a_") {
                assert!(allowed.contains(from), "transition {}", sys.net.transitions[t]);
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn sat_demo_oracle_cross_check_at_five_followers() {
    // 2m + 2n + 1 followers for one variable and one clause.
    let lp = catalog::sat_demo();
    let (sys, ann) = leader_to_net(&lp);
    let start = ann.initial_config(sys.net.num_places(), 5);
    let target = ann.final_config(sys.net.num_places(), 5);
    let r = bfs_reach(&sys.net, &start, ReachTarget::Marking(&target), 200_000);
    assert!(r.status.is_yes());
}

#[test]
fn both_support_readings_agree() {
    for f in [catalog::sat_demo_formula(), catalog::unsat_demo_formula()] {
        let lp = gen_3sat_leader_protocol(&f);
        let a = decide_leader_cutoff(&lp, 100_000, SupportReading::LeaderTransitionsOnly).unwrap();
        let b = decide_leader_cutoff(&lp, 100_000, SupportReading::AllTransitions).unwrap();
        match (a, b) {
            (LeaderDecision::Decided(da), LeaderDecision::Decided(db)) => {
                assert_eq!(da.answer, db.answer);
            }
            _ => panic!("both readings must decide"),
        }
    }
}

#[test]
fn sat_faithfulness_small_sample() {
    use crate::generators::gen_random_cnf;
    for seed in 0..8 {
        let f = gen_random_cnf(3, 4, seed);
        let expected = sat_brute_force(&f).unwrap();
        let lp = gen_3sat_leader_protocol(&f);
        match decide_leader_cutoff(&lp, 100_000, SupportReading::default()).unwrap() {
            LeaderDecision::Decided(d) => assert_eq!(d.answer, expected, "seed {seed}"),
            LeaderDecision::Inconclusive { .. } => panic!("seed {seed}: inconclusive"),
        }
    }
}

#[test]
fn realize_empty_counts_is_empty_run() {
    let lp = catalog::sat_demo();
    let (sys, ann) = leader_to_net(&lp);
    let config = ann.initial_config(sys.net.num_places(), 4);
    let run =
        realize_compatible_run(&sys.net, &ann, &config, &vec![0; sys.net.num_transitions()])
            .unwrap();
    assert!(run.is_empty());
}

#[test]
fn realize_single_follower_step() {
    let lp = LeaderProtocolPair::new(
        one_state_leader(vec!["a".into()]),
        catalog::single_rule(),
    )
    .unwrap();
    let (sys, ann) = leader_to_net(&lp);
    // One follower-only transition moving a pair; park two tokens per
    // follower state.
    let t = (0..sys.net.num_transitions())
        .find(|&t| matches!(ann.kinds[t], TransKind::FollowerOnly))
        .unwrap();
    let mut counts = vec![0u64; sys.net.num_transitions()];
    counts[t] = 1;
    let mut config = ann.initial_config(sys.net.num_places(), 2);
    for p in 0..sys.net.num_places() {
        if !ann.leader_places.contains(&p) {
            config.0[p] = BigUint::from(2u8).max(config.0[p].clone());
        }
    }
    let run = realize_compatible_run(&sys.net, &ann, &config, &counts).unwrap();
    assert_eq!(run, vec![t]);
}

#[test]
fn realize_leader_cert_on_padded_configuration() {
    // Realize the yes-certificates of the sat demo from the saturated
    // configuration with 2|x| followers parked everywhere.
    let lp = catalog::sat_demo();
    let pruned = prune_follower(&lp).unwrap();
    let (sys, ann) = leader_to_net(&pruned);
    let LeaderDecision::Decided(d) =
        decide_leader_cutoff(&lp, 100_000, SupportReading::default()).unwrap()
    else {
        panic!("sat demo must decide");
    };
    assert!(d.answer);
    for cert in &d.parity_certs {
        let counts: Vec<u64> =
            cert.solution.iter().map(|c| c.to_u64().expect("small cert")).collect();
        let total: u64 = counts.iter().sum();
        let n = cert.n.to_u64().expect("small cert");
        let mut config = ann.initial_config(sys.net.num_places(), n);
        for p in 0..sys.net.num_places() {
            if !ann.leader_places.contains(&p) {
                config.0[p] += BigUint::from(2 * total);
            }
        }
        let run = realize_compatible_run(&sys.net, &ann, &config, &counts).unwrap();
        let end = crate::oracle::replay(&sys.net, &config, &run).unwrap();
        // The run moves the leader to its final state and n followers into
        // theirs, leaving the parked padding in place.
        let mut expected = ann.final_config(sys.net.num_places(), n);
        for p in 0..sys.net.num_places() {
            if !ann.leader_places.contains(&p) {
                expected.0[p] += BigUint::from(2 * total);
            }
        }
        assert_eq!(end, expected);
    }
}

#[test]
fn parity_agreement_with_oracle_sweep() {
    use crate::generators::gen_random_cnf;
    for seed in [0u64, 3, 5] {
        let f = gen_random_cnf(2, 2, seed);
        let lp = gen_3sat_leader_protocol(&f);
        let (sys, ann) = leader_to_net(&lp);
        let mut even = None;
        let mut odd = None;
        for n in 0..=7u64 {
            let start = ann.initial_config(sys.net.num_places(), n);
            let target = ann.final_config(sys.net.num_places(), n);
            if bfs_reach(&sys.net, &start, ReachTarget::Marking(&target), 150_000)
                .status
                .is_yes()
            {
                if n % 2 == 0 {
                    even.get_or_insert(n);
                } else {
                    odd.get_or_insert(n);
                }
            }
        }
        let LeaderDecision::Decided(d) =
            decide_leader_cutoff(&lp, 100_000, SupportReading::default()).unwrap()
        else {
            panic!("seed {seed}: inconclusive");
        };
        if even.is_some() && odd.is_some() {
            assert!(d.answer, "seed {seed}: oracle found both parities");
        }
        if !d.answer {
            assert!(even.is_none() || odd.is_none(), "seed {seed}");
        }
    }
}

#[test]
fn f2_parity_system_of_single_rule_is_infeasible() {
    let (_net, _vars, f2) = symmetric_parity_system(&catalog::single_rule());
    assert!(f2_solve(&f2).is_none());
}
