mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use fair_gossip::adversary::StrategySpec;
use fair_gossip::analysis::legitimate_winner;
use fair_gossip::protocol::{AgentId, Outcome, Phase};
use fair_gossip::sim::{classify_good_execution, run_trial, CalibrationConstants, MessageKind, SimConfig, Trace};
use proptest::prelude::*;

fn strategies() -> Vec<StrategySpec> {
    vec![
        StrategySpec::named("honest"),
        StrategySpec::named("k_underbid"),
        StrategySpec::named("k_underbid").with_param("mode", "drop_all"),
        StrategySpec::named("commitment_mismatch"),
        StrategySpec::named("commitment_mismatch").with_param("per_peer", true).with_param("steer", false),
        StrategySpec::named("fake_faulty"),
        StrategySpec::named("fake_faulty").with_param("silent_in_voting", true),
        StrategySpec::named("coherence_silence"),
        StrategySpec::named("coherence_silence").with_param("targets", "all"),
    ]
}

/// n, faulty set, coalition (disjoint from the faulty set), strategy index, seed.
fn setups() -> impl Strategy<Value = (SimConfig, usize)> {
    (1u32..=12, any::<u64>(), 0usize..9)
        .prop_flat_map(|(n, seed, s)| {
            let roles = prop::collection::vec(0u8..4, n as usize);
            (Just(n), Just(seed), Just(s), roles)
        })
        .prop_map(|(n, seed, s, roles)| {
            // role 0: faulty, role 1: coalition, otherwise honest
            let faulty: Vec<u32> = (1..=n).filter(|&i| roles[i as usize - 1] == 0).collect();
            let members: Vec<u32> = (1..=n).filter(|&i| roles[i as usize - 1] == 1).collect();
            let mut cfg = split(n).with_faulty(ids(&faulty)).with_seed(seed);
            if !members.is_empty() {
                cfg = with_coalition(cfg, &members, strategies()[s].clone());
            }
            (cfg, s)
        })
}

fn honest(trace: &Trace) -> BTreeSet<AgentId> {
    trace.honest().collect()
}

fn pull_targets(trace: &Trace, phase: Phase, who: &BTreeSet<AgentId>) -> Vec<(u32, AgentId, AgentId)> {
    trace
        .messages_in(phase)
        .filter(|m| m.kind == MessageKind::PullRequest && who.contains(&m.sender))
        .map(|m| (m.round, m.sender, m.receiver))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinism((cfg, _) in setups()) {
        prop_assert_eq!(run_trial(&cfg).unwrap(), run_trial(&cfg).unwrap());
    }

    #[test]
    fn per_round_budget_and_rounds((cfg, _) in setups()) {
        let t = run_trial(&cfg).unwrap();
        prop_assert_eq!(t.stats.rounds_elapsed, 4 * t.params().q);
        let active = t.active().count();
        let mut per_round: BTreeMap<u32, usize> = BTreeMap::new();
        let mut per_sender: BTreeMap<(u32, AgentId), usize> = BTreeMap::new();
        for m in t.messages.iter().filter(|m| m.kind.is_origination()) {
            *per_round.entry(m.round).or_default() += 1;
            *per_sender.entry((m.round, m.sender)).or_default() += 1;
            prop_assert!(m.round >= 1 && m.round <= 4 * t.params().q);
        }
        prop_assert!(per_round.values().all(|&c| c <= active));
        prop_assert!(per_sender.values().all(|&c| c == 1));
    }

    #[test]
    fn quiescence_and_no_forgery((cfg, _) in setups()) {
        let t = run_trial(&cfg).unwrap();
        let pulls: BTreeSet<(u32, AgentId, AgentId)> = t
            .messages
            .iter()
            .filter(|m| m.kind == MessageKind::PullRequest)
            .map(|m| (m.round, m.sender, m.receiver))
            .collect();
        for m in &t.messages {
            prop_assert!(!t.config.is_faulty(m.sender), "faulty sender {:?}", m);
            if matches!(m.kind, MessageKind::IntentionReply | MessageKind::CertReply) {
                // a reply comes from the agent that was pulled, to the agent that pulled
                prop_assert!(pulls.contains(&(m.round, m.receiver, m.sender)), "unsolicited {:?}", m);
            }
        }
    }

    #[test]
    fn honest_draws_are_coupled((cfg, _) in setups()) {
        let deviating = run_trial(&cfg).unwrap();
        let baseline = run_trial(&cfg.clone().with_coalition(None)).unwrap();
        let h = honest(&deviating);
        for u in &h {
            prop_assert_eq!(&deviating.agent(*u).intention, &baseline.agent(*u).intention);
        }
        for phase in [Phase::Commitment, Phase::FindMin] {
            prop_assert_eq!(pull_targets(&deviating, phase, &h), pull_targets(&baseline, phase, &h));
        }
    }

    #[test]
    fn validity_without_coalition(n in 1u32..=12, seed in any::<u64>(), faults in prop::collection::btree_set(1u32..=12, 0..6)) {
        let faulty: Vec<u32> = faults.into_iter().filter(|&f| f <= n).collect();
        let t = run_trial(&split(n).with_faulty(ids(&faulty)).with_seed(seed)).unwrap();
        if let Outcome::Color(c) = t.outcome {
            prop_assert!(t.active().any(|u| t.agent(u).color == c));
        }
    }

    #[test]
    fn oracle_matches_honest_k(n in 2u32..=12, seed in any::<u64>()) {
        let t = run_trial(&split(n).with_seed(seed)).unwrap();
        let flags = classify_good_execution(&t, &CalibrationConstants::default());
        let rec = legitimate_winner(&t, &BTreeSet::new());
        if flags.d3_commit_covered {
            for u in t.active() {
                prop_assert_eq!(rec.k_star[&u], t.agent(u).k.unwrap());
            }
        }
        prop_assert!(!rec.e_c && !rec.e_c_prime);
        if !t.outcome.is_fail() && flags.d2_k_distinct {
            prop_assert_eq!(rec.winner, rec.legitimate_winner);
        }
    }
}
