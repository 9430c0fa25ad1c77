//! Search verdicts against exhaustive enumeration of manipulator ballots.

use std::sync::Arc;

use proptest::prelude::*;
use stv_manip::votegen::{sample, BaseProfile, Distribution, UrnParam};
use stv_manip::{
    brute_force_manipulate, manipulate_with, stv_winner, verify_witness, CandidateId, Decision,
    ManipulationInstance, RngSeed, SearchLimits, SearchOptions, Strategy, TieRule,
};

fn dist(which: usize) -> Distribution {
    match which {
        0 => Distribution::Ic,
        1 => Distribution::Urn(UrnParam::new(1.0).unwrap()),
        _ => Distribution::Resample(Arc::new(BaseProfile::hiring_shape())),
    }
}

fn options() -> [SearchOptions; 4] {
    [
        SearchOptions {
            strategy: Strategy::Deferred,
            memoize: true,
        },
        SearchOptions {
            strategy: Strategy::Deferred,
            memoize: false,
        },
        SearchOptions {
            strategy: Strategy::EveryHolder,
            memoize: true,
        },
        SearchOptions {
            strategy: Strategy::EveryHolder,
            memoize: false,
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn search_agrees_with_enumeration(
        which in 0usize..3,
        m in 1usize..=5,
        n in 0usize..=16,
        weight in prop::sample::select(vec![1u64, 2, 3, 4]),
        seed: u64,
        random_ties: bool,
    ) {
        let fixed = sample(&dist(which), m, n, &mut RngSeed(seed).rng()).unwrap();
        let tie = if random_ties { TieRule::SeededRandom(seed) } else { TieRule::MaxIndex };
        let p = CandidateId((seed % m as u64) as u8);
        let inst = ManipulationInstance::new(fixed, weight, p, tie).unwrap();
        let oracle = brute_force_manipulate(&inst).unwrap();
        for opt in options() {
            let r = manipulate_with(&inst, SearchLimits::NONE, opt).unwrap();
            prop_assert_eq!(r.decision, oracle.decision, "{:?}", opt);
            if let Some(w) = &r.witness {
                prop_assert!(verify_witness(&inst, w).unwrap());
            }
            prop_assert_eq!(r.witness.is_some(), r.decision == Decision::Manipulable);
        }
    }

    #[test]
    fn zero_weight_is_honest_winner(which in 0usize..3, m in 1usize..=12, n in 1usize..=20, seed: u64) {
        let fixed = sample(&dist(which), m, n, &mut RngSeed(seed).rng()).unwrap();
        let honest = stv_winner(&fixed, TieRule::MaxIndex).unwrap().winner;
        let p = CandidateId((seed % m as u64) as u8);
        let inst = ManipulationInstance::new(fixed, 0, p, TieRule::MaxIndex).unwrap();
        let r = manipulate_with(&inst, SearchLimits::NONE, SearchOptions::default()).unwrap();
        prop_assert_eq!(r.decision == Decision::Manipulable, p == honest);
        prop_assert_eq!(r.nodes, 1);
    }

    #[test]
    fn sincere_top_that_wins_is_found(m in 1usize..=30, n in 0usize..=30, seed: u64) {
        let fixed = sample(&Distribution::Ic, m, n, &mut RngSeed(seed).rng()).unwrap();
        let p = CandidateId((seed % m as u64) as u8);
        let mut with_p_first = fixed.clone();
        let mut ranking = vec![p];
        ranking.extend((0..m as u8).map(CandidateId).filter(|&c| c != p));
        with_p_first.push(stv_manip::Ballot::new(ranking, 1).unwrap()).unwrap();
        let inst = ManipulationInstance::new(fixed, 1, p, TieRule::MaxIndex).unwrap();
        if stv_winner(&with_p_first, TieRule::MaxIndex).unwrap().winner == p {
            let r = manipulate_with(&inst, SearchLimits::NONE, SearchOptions::default()).unwrap();
            prop_assert_eq!(r.decision, Decision::Manipulable);
        }
    }

    #[test]
    fn memoization_is_transparent_at_scale(m in 6usize..=14, n in 1usize..=24, seed: u64) {
        let fixed = sample(&Distribution::Ic, m, n, &mut RngSeed(seed).rng()).unwrap();
        let p = CandidateId((seed % m as u64) as u8);
        let inst = ManipulationInstance::new(fixed, 1, p, TieRule::MaxIndex).unwrap();
        let a = manipulate_with(&inst, SearchLimits::NONE, SearchOptions { strategy: Strategy::Deferred, memoize: true }).unwrap();
        let b = manipulate_with(&inst, SearchLimits::NONE, SearchOptions { strategy: Strategy::Deferred, memoize: false }).unwrap();
        let c = manipulate_with(&inst, SearchLimits::NONE, SearchOptions { strategy: Strategy::EveryHolder, memoize: true }).unwrap();
        prop_assert_eq!(a.decision, b.decision);
        prop_assert_eq!(a.decision, c.decision);
        prop_assert!(a.nodes <= b.nodes);
    }
}

#[test]
fn deterministic_rerun() {
    let fixed = sample(&Distribution::Ic, 40, 40, &mut RngSeed(5).rng()).unwrap();
    let inst = ManipulationInstance::new(fixed, 1, CandidateId(3), TieRule::MaxIndex).unwrap();
    let a = manipulate_with(&inst, SearchLimits::NONE, SearchOptions::default()).unwrap();
    let b = manipulate_with(&inst, SearchLimits::NONE, SearchOptions::default()).unwrap();
    assert_eq!(
        (a.decision, a.witness, a.nodes),
        (b.decision, b.witness, b.nodes)
    );
}
