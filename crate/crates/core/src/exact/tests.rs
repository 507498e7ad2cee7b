use super::*;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn sys(coeffs: Vec<Vec<i64>>, rhs: Vec<i64>, domains: Vec<VarDomain>) -> LinearSystem {
    LinearSystem::new(
        coeffs.into_iter().map(|r| r.into_iter().map(big).collect()).collect(),
        rhs.into_iter().map(big).collect(),
        domains,
    )
}

/// Marking equation of the five-place diamond net over its four transitions:
/// rows i, pl, pm, pr, f; delta = target - start.
fn diamond_marking_system(domains: Vec<VarDomain>) -> LinearSystem {
    sys(
        vec![
            vec![-2, -1, -2, 0],
            vec![0, -1, 1, 0],
            vec![0, 0, 1, -1],
            vec![0, 1, 0, -1],
            vec![2, 1, 0, 2],
        ],
        vec![-1, 0, 0, 0, 1],
        domains,
    )
}

#[test]
fn lp_diamond_marking_equation_feasible() {
    let s = diamond_marking_system(vec![VarDomain::RatNonNeg; 4]);
    match lp_solve(&s, None) {
        LpResult::Feasible(sol) => assert!(s.check_rat(&sol.values)),
        other => panic!("expected feasible, got {other:?}"),
    }
    // One known solution: every transition fired with rate 1/5.
    let known = vec![rat(1, 5), rat(1, 5), rat(1, 5), rat(1, 5)];
    assert!(s.check_rat(&known));
}

#[test]
fn lp_trivial_negative_is_infeasible_with_certificate() {
    let s = sys(vec![vec![1]], vec![-1], vec![VarDomain::RatNonNeg]);
    match lp_solve(&s, None) {
        LpResult::Infeasible(cert) => assert!(cert.verify(&s)),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn lp_unbounded_objective() {
    // maximize v1 subject to v1 - v2 = 0.
    let s = sys(vec![vec![1, -1]], vec![0], vec![VarDomain::RatNonNeg; 2]);
    match lp_solve(&s, Some(0)) {
        LpResult::Unbounded { point, ray } => {
            assert!(s.check_rat(&point));
            assert!(ray[0].is_positive());
            // point + ray stays feasible.
            let shifted: Vec<Rat> = point.iter().zip(&ray).map(|(p, r)| p + r).collect();
            assert!(s.check_rat(&shifted));
        }
        other => panic!("expected unbounded, got {other:?}"),
    }
}

#[test]
fn lp_respects_pinned_columns() {
    let s = sys(
        vec![vec![1, 1]],
        vec![1],
        vec![VarDomain::FixedZero, VarDomain::RatNonNeg],
    );
    match lp_solve(&s, Some(1)) {
        LpResult::Feasible(sol) => {
            assert!(sol.values[0].is_zero());
            assert_eq!(sol.objective.unwrap(), rat_int(1));
        }
        other => panic!("expected feasible, got {other:?}"),
    }
}

#[test]
fn lp_maximize_reports_maximum() {
    // maximize v1 with v1 + v2 = 3: max is 3.
    let s = sys(vec![vec![1, 1]], vec![3], vec![VarDomain::RatNonNeg; 2]);
    match lp_solve(&s, Some(0)) {
        LpResult::Feasible(sol) => assert_eq!(sol.objective.unwrap(), rat_int(3)),
        other => panic!("expected feasible, got {other:?}"),
    }
}

#[test]
fn integer_parity_infeasible() {
    let s = sys(vec![vec![2]], vec![-1], vec![VarDomain::Int]);
    assert_eq!(integer_solve(&s), IntResult::Infeasible);
}

#[test]
fn integer_simple_feasible() {
    let s = sys(vec![vec![1, 1]], vec![3], vec![VarDomain::Int; 2]);
    match integer_solve(&s) {
        IntResult::Feasible(y) => assert!(s.check_int(&y)),
        IntResult::Infeasible => panic!("expected feasible"),
    }
}

#[test]
fn integer_diamond_marking_equation() {
    let s = diamond_marking_system(vec![VarDomain::Int; 4]);
    match integer_solve(&s) {
        IntResult::Feasible(y) => assert!(s.check_int(&y)),
        IntResult::Infeasible => panic!("expected feasible"),
    }
    // The known solution (-1, 1, 1, 1) substitutes exactly.
    assert!(s.check_int(&[big(-1), big(1), big(1), big(1)]));
}

#[test]
fn f2_small_examples() {
    let mut s = F2System::new(2);
    s.add_row([0, 1], true);
    s.add_row([1], true);
    let v = f2_solve(&s).expect("feasible");
    assert_eq!(v, vec![false, true]);

    let mut s = F2System::new(1);
    s.add_row([0], false);
    s.add_row([0], true);
    assert!(f2_solve(&s).is_none());
}

#[test]
fn f2_even_coefficient_row_is_zero() {
    // A single transition moving two tokens has an even column: row reads
    // 0 = 1 after reduction, so the system is infeasible.
    let mut s = F2System::new(1);
    s.add_row([0, 0], true);
    assert!(f2_solve(&s).is_none());
}

#[test]
fn ilp_even_parity_family() {
    // v - k = 0 and 2v - 2k = 0 style family: v = k, n = 2k.
    let s = sys(
        vec![vec![-2, 2], vec![2, -2]],
        vec![0, 0],
        vec![VarDomain::IntNonNeg; 2],
    );
    match ilp_feasible(&s, 1000) {
        IlpResult::Feasible(y) => assert!(s.check_int(&y)),
        other => panic!("expected feasible, got {other:?}"),
    }
}

#[test]
fn ilp_odd_parity_infeasible() {
    // 2v = 2k + 1 has no integer solution at all.
    let s = sys(vec![vec![2, -2]], vec![1], vec![VarDomain::IntNonNeg; 2]);
    assert_eq!(ilp_feasible(&s, 1000), IlpResult::Infeasible);
}

#[test]
fn ilp_rational_feasible_integer_infeasible() {
    let s = sys(vec![vec![2]], vec![1], vec![VarDomain::IntNonNeg]);
    assert_eq!(ilp_feasible(&s, 1000), IlpResult::Infeasible);
}

#[test]
fn ilp_bounded_box_exhausts() {
    // y1 + y2 + y3 = 1 with 2y1 - 3y2 = 1 is LP-feasible and lattice-feasible
    // but has no nonnegative integer solution; the box is bounded, so the
    // search must exhaust.
    let s = sys(
        vec![vec![2, -3, 0], vec![1, 1, 1]],
        vec![1, 1],
        vec![VarDomain::IntNonNeg; 3],
    );
    assert_eq!(ilp_feasible(&s, 10_000), IlpResult::Infeasible);
}

#[test]
fn ilp_respects_at_least_one() {
    let s = sys(vec![vec![1, 1]], vec![1], vec![VarDomain::IntAtLeastOne, VarDomain::IntNonNeg]);
    match ilp_feasible(&s, 1000) {
        IlpResult::Feasible(y) => {
            assert!(y[0] >= big(1));
            assert!(s.check_int(&y));
        }
        other => panic!("expected feasible, got {other:?}"),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(lo..=hi)).collect()).collect()
}

fn box_search_int(coeffs: &[Vec<i64>], rhs: &[i64], radius: i64) -> Option<Vec<i64>> {
    let n = coeffs[0].len();
    let mut y = vec![-radius; n];
    loop {
        let ok = coeffs
            .iter()
            .zip(rhs)
            .all(|(row, b)| row.iter().zip(&y).map(|(c, v)| c * v).sum::<i64>() == *b);
        if ok {
            return Some(y.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return None;
            }
            y[i] += 1;
            if y[i] <= radius {
                break;
            }
            y[i] = -radius;
            i += 1;
        }
    }
}

/// Random 3x4 systems with entries in [-3,3]: feasible-by-construction
/// instances agree with box search, and the even/odd family is infeasible for
/// both the solver and the box.
#[test]
fn integer_solver_agrees_with_box_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for round in 0..250 {
        let a = random_matrix(&mut rng, 3, 4, -3, 3);
        let y0: Vec<i64> = (0..4).map(|_| rng.random_range(-2..=2)).collect();
        let b: Vec<i64> = a
            .iter()
            .map(|row| row.iter().zip(&y0).map(|(c, v)| c * v).sum())
            .collect();
        let s = sys(a.clone(), b.clone(), vec![VarDomain::Int; 4]);
        match integer_solve(&s) {
            IntResult::Feasible(y) => assert!(s.check_int(&y), "round {round}"),
            IntResult::Infeasible => panic!("feasible-by-construction solved infeasible"),
        }
        assert!(box_search_int(&a, &b, 8).is_some());

        // Parity-infeasible family: double every entry, make one rhs odd.
        let a2: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|c| 2 * c).collect()).collect();
        let mut b2: Vec<i64> = b.iter().map(|v| 2 * v).collect();
        b2[0] += 1;
        let s2 = sys(a2.clone(), b2.clone(), vec![VarDomain::Int; 4]);
        assert_eq!(integer_solve(&s2), IntResult::Infeasible, "round {round}");
        assert!(box_search_int(&a2, &b2, 8).is_none());
    }
}

fn f2_enumerate(sys: &F2System) -> Option<Vec<bool>> {
    let n = sys.num_vars();
    assert!(n <= 10);
    for bits in 0..(1u32 << n) {
        let v: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        if sys.check(&v) {
            return Some(v);
        }
    }
    None
}

#[test]
fn f2_solver_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..500 {
        let n = rng.random_range(1..=8usize);
        let m = rng.random_range(1..=8usize);
        let mut s = F2System::new(n);
        for _ in 0..m {
            let vars: Vec<usize> =
                (0..n).filter(|_| rng.random_range(0..2) == 1).collect();
            s.add_row(vars, rng.random_range(0..2) == 1);
        }
        let solved = f2_solve(&s);
        let brute = f2_enumerate(&s);
        assert_eq!(solved.is_some(), brute.is_some());
        if let Some(v) = solved {
            assert!(s.check(&v));
        }
    }
}

/// Every LP outcome over random systems carries a verifying artifact.
#[test]
fn lp_random_outcomes_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..300 {
        let m = rng.random_range(1..=4usize);
        let n = rng.random_range(1..=5usize);
        let a = random_matrix(&mut rng, m, n, -3, 3);
        let b: Vec<i64> = (0..m).map(|_| rng.random_range(-3..=3)).collect();
        let s = sys(a, b, vec![VarDomain::RatNonNeg; n]);
        match lp_solve(&s, Some(0)) {
            LpResult::Feasible(sol) => assert!(s.check_rat(&sol.values)),
            LpResult::Infeasible(cert) => assert!(cert.verify(&s)),
            LpResult::Unbounded { point, ray } => {
                assert!(s.check_rat(&point));
                assert!(ray.iter().all(|r| !r.is_negative()));
                assert!(ray[0].is_positive());
                let shifted: Vec<Rat> = point.iter().zip(&ray).map(|(p, r)| p + r).collect();
                assert!(s.check_rat(&shifted));
            }
        }
    }
}
