use super::text::{parse_input, parse_net, serialize_input, ParsedInput};
use super::*;
use crate::generators::catalog;

#[test]
fn shorthand_expands_to_both_directions() {
    let text = "[symmetric-protocol]\nstates: init fin\nalphabet: a\ninit: init\nfin: fin\nrules:\ninit a fin\n";
    let ParsedInput::Symmetric(p) = parse_input(text).unwrap() else {
        panic!("expected symmetric protocol")
    };
    assert_eq!(p.rules.len(), 2);
    assert!(p.has_rule(0, RuleAction::Send(0), 1));
    assert!(p.has_rule(0, RuleAction::Receive(0), 1));
}

#[test]
fn symmetry_violation_is_an_error() {
    let text = "[symmetric-protocol]\nstates: init fin\nalphabet: a\ninit: init\nfin: fin\nrules:\ninit !a fin\n";
    let e = parse_input(text).unwrap_err();
    assert!(e.message.contains("symmetry violated"), "{e}");
}

#[test]
fn undeclared_identifier_reports_line() {
    let text = "[protocol]\nstates: init fin\nalphabet: a\ninit: init\nfin: fin\nrules:\ninit !b fin\n";
    let e = parse_input(text).unwrap_err();
    assert_eq!(e.line, 7);
    assert!(e.message.contains("undeclared"));
}

#[test]
fn duplicate_state_is_an_error() {
    let text = "[protocol]\nstates: a a\nalphabet: x\ninit: a\nfin: a\nrules:\n";
    let e = parse_input(text).unwrap_err();
    assert!(e.message.contains("duplicate"), "{e}");
}

#[test]
fn round_trip_is_identity() {
    let diamond = catalog::diamond();
    let text = serialize_input(&ParsedInput::Net(diamond.clone()));
    assert_eq!(parse_net(&text).unwrap(), diamond);

    for input in [
        ParsedInput::Symmetric(catalog::single_rule()),
        ParsedInput::Symmetric(catalog::two_letter()),
        ParsedInput::Leader(catalog::sat_demo()),
        ParsedInput::Plain(catalog::single_rule().into_protocol()),
    ] {
        let text = serialize_input(&input);
        assert_eq!(parse_input(&text).unwrap(), input, "round trip failed for:\n{text}");
    }
}

#[test]
fn diamond_net_parses_with_weight_two() {
    let sys = catalog::diamond();
    assert_eq!(sys.net.weight(), 2);
    assert_eq!(sys.net.num_places(), 5);
    assert_eq!(sys.net.num_transitions(), 4);
    assert!(is_acyclic(&sys.net));
}

#[test]
fn empty_transition_list_is_valid() {
    let text = "[petrinet]\nplaces: p\ntransitions:\ninitial: p 1\nfinal: p 1\n";
    let sys = parse_net(text).unwrap();
    assert_eq!(sys.net.num_transitions(), 0);
    assert_eq!(sys.initial, sys.final_marking);
}

#[test]
fn zero_weight_arc_is_absent() {
    let text = "[petrinet]\nplaces: p q\ntransitions: t\npre: t p 0\npre: t q 1\npost: t p 1\n";
    let sys = parse_net(text).unwrap();
    assert_eq!(sys.net.pre(0, 0), 0);
    assert_eq!(sys.net.pre(1, 0), 1);
}

#[test]
fn negative_weight_is_an_error() {
    let text = "[petrinet]\nplaces: p\ntransitions: t\npre: t p -1\n";
    let e = parse_input(text).unwrap_err();
    assert!(e.message.contains("negative weight"), "{e}");
}

#[test]
fn single_rule_net_has_one_doubled_transition() {
    let sys = protocol_to_net(catalog::single_rule().protocol());
    assert_eq!(sys.net.num_transitions(), 1);
    assert_eq!(sys.net.pre(0, 0), 2);
    assert_eq!(sys.net.post(1, 0), 2);
    assert!(sys.net.is_token_conserving_pairwise());
}

#[test]
fn distinct_sender_receiver_get_unit_arcs() {
    let p = Protocol::new(
        vec!["p".into(), "p2".into(), "q".into(), "q2".into()],
        vec!["a".into()],
        0,
        3,
        vec![
            Rule { from: 0, action: RuleAction::Send(0), to: 1 },
            Rule { from: 2, action: RuleAction::Receive(0), to: 3 },
        ],
    )
    .unwrap();
    let sys = protocol_to_net(&p);
    assert_eq!(sys.net.num_transitions(), 1);
    assert_eq!(sys.net.pre(0, 0), 1);
    assert_eq!(sys.net.pre(2, 0), 1);
    assert_eq!(sys.net.post(1, 0), 1);
    assert_eq!(sys.net.post(3, 0), 1);
}

#[test]
fn transition_count_matches_pair_enumeration() {
    let p = catalog::two_letter();
    let sys = protocol_to_net(p.protocol());
    let mut expected = 0;
    for a in 0..p.alphabet.len() {
        let sends = p.rules.iter().filter(|r| r.action == RuleAction::Send(a)).count();
        let recvs = p.rules.iter().filter(|r| r.action == RuleAction::Receive(a)).count();
        expected += sends * recvs;
    }
    assert_eq!(sys.net.num_transitions(), expected);
}

#[test]
fn leader_net_excludes_leader_leader_pairs() {
    // A leader with a rule on the same letter as the follower: pairs where
    // both rules are leader rules must not appear.
    let leader = SymmetricProtocol::new(
        Protocol::new(
            vec!["p".into(), "p2".into()],
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
    .unwrap();
    let follower = SymmetricProtocol::new(
        Protocol::new(
            vec!["q".into(), "q2".into()],
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
    .unwrap();
    let lp = LeaderProtocolPair::new(leader, follower).unwrap();
    let (sys, ann) = leader_to_net(&lp);
    // leader!+follower?, follower!+leader?, follower!+follower? - never
    // leader!+leader?.
    assert_eq!(sys.net.num_transitions(), 3);
    let leader_count =
        ann.kinds.iter().filter(|k| matches!(k, TransKind::Leader { .. })).count();
    assert_eq!(leader_count, 2);
    for (t, kind) in ann.kinds.iter().enumerate() {
        if let TransKind::Leader { from, to } = kind {
            assert!(ann.leader_places.contains(from));
            assert!(ann.leader_places.contains(to));
            assert_eq!(sys.net.pre(*from, t), 1);
            assert_eq!(sys.net.post(*to, t), 1);
        }
    }
}

#[test]
fn leader_without_rules_yields_follower_only_net() {
    let leader = SymmetricProtocol::new(
        Protocol::new(vec!["p".into()], vec!["a".into()], 0, 0, vec![]).unwrap(),
    )
    .unwrap();
    let follower = catalog::single_rule();
    let lp = LeaderProtocolPair::new(leader, follower).unwrap();
    let (_, ann) = leader_to_net(&lp);
    assert!(ann.kinds.iter().all(|k| matches!(k, TransKind::FollowerOnly)));
}

#[test]
fn acyclicity_checks() {
    assert!(is_acyclic(&catalog::diamond().net));
    let selfloop = PetriNet::new(
        vec!["p".into()],
        vec!["t".into()],
        vec![vec![1]],
        vec![vec![1]],
    )
    .unwrap();
    assert!(!is_acyclic(&selfloop));
    let empty = PetriNet::new(vec![], vec![], vec![], vec![]).unwrap();
    assert!(is_acyclic(&empty));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_protocol() -> impl Strategy<Value = Protocol> {
        (2usize..5, 1usize..3, proptest::collection::vec((0usize..5, 0usize..3, 0usize..5, any::<bool>()), 0..8))
            .prop_map(|(ns, nl, raw_rules)| {
                let states: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
                let alphabet: Vec<String> = (0..nl).map(|i| format!("l{i}")).collect();
                let rules = raw_rules
                    .into_iter()
                    .map(|(f, a, t, send)| Rule {
                        from: f % ns,
                        action: if send {
                            RuleAction::Send(a % nl)
                        } else {
                            RuleAction::Receive(a % nl)
                        },
                        to: t % ns,
                    })
                    .collect();
                Protocol::new(states, alphabet, 0, 1, rules).expect("indices are in range")
            })
    }

    proptest! {
        /// Serialization round-trips exactly on arbitrary protocols.
        #[test]
        fn protocol_round_trip(p in arb_protocol()) {
            let text = text::serialize_protocol(&p);
            let ParsedInput::Plain(back) = parse_input(&text).unwrap() else {
                panic!("expected a plain protocol");
            };
            prop_assert_eq!(back, p);
        }

        /// Net serialization round-trips through the translated protocol net.
        #[test]
        fn net_round_trip(p in arb_protocol()) {
            let sys = protocol_to_net(&p);
            let text = text::serialize_net(&sys);
            prop_assert_eq!(parse_net(&text).unwrap(), sys);
        }

        /// Every transition of a protocol net moves exactly two tokens.
        #[test]
        fn protocol_nets_conserve_tokens(p in arb_protocol()) {
            prop_assert!(protocol_to_net(&p).net.is_token_conserving_pairwise());
        }
    }
}

#[test]
fn token_conservation_on_generated_corpus() {
    use rand::SeedableRng;
    let mut seeds = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    use rand::Rng;
    for _ in 0..50 {
        let params = crate::generators::RandomProtocolParams {
            max_states: 4,
            max_letters: 2,
            max_rules: 6,
            symmetric: seeds.random_range(0..2) == 0,
            seed: seeds.random(),
        };
        let p = crate::generators::gen_random_protocol(&params);
        let sys = protocol_to_net(&p);
        assert!(sys.net.is_token_conserving_pairwise());
    }
}
