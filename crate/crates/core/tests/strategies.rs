mod common;

use std::collections::BTreeSet;

use common::*;
use fair_gossip::adversary::StrategySpec;
use fair_gossip::analysis::legitimate_winner;
use fair_gossip::protocol::{AgentId, FailReason, Phase, VerifyResult, VoterRecord};
use fair_gossip::sim::{classify_good_execution, export, run_trial, CalibrationConstants, MessageKind, Payload};

fn exported(t: &fair_gossip::sim::Trace, flags: fair_gossip::sim::GoodExecutionFlags) -> Vec<u8> {
    let mut out = Vec::new();
    export::write_jsonl(t, flags, &mut out).unwrap();
    out
}

#[test]
fn honest_coalition_is_trace_identical() {
    for (n, members) in [(8u32, vec![1u32]), (16, vec![2, 9, 15]), (5, vec![1, 2, 3, 4, 5])] {
        for seed in 0..10 {
            let plain = split(n).with_seed(seed);
            let coal = with_coalition(plain.clone(), &members, StrategySpec::named("honest"));
            let a = run_trial(&plain).unwrap();
            let b = run_trial(&coal).unwrap();
            assert_eq!(a.messages, b.messages);
            assert_eq!(a.transitions, b.transitions);
            assert_eq!(a.agents, b.agents);
            assert_eq!(a.outcome, b.outcome);
            // the coalition-dependent flags may differ, the bytes under equal flags may not
            let flags = classify_good_execution(&a, &CalibrationConstants::default());
            assert_eq!(exported(&a, flags), exported(&b, flags));
        }
    }
}

#[test]
fn k_underbid_is_exposed() {
    let mut failed = 0;
    let trials = 2000;
    for seed in 0..trials {
        let cfg = with_coalition(split(64).with_seed(seed), &[1], StrategySpec::named("k_underbid"));
        let t = run_trial(&cfg).unwrap();
        assert_eq!(t.declared[0].as_ref().unwrap().k, 0);
        failed += t.outcome.is_fail() as u32;
    }
    assert!(failed as f64 >= 0.95 * trials as f64, "{failed}/{trials}");
}

#[test]
fn dropped_tally_is_missing_votes() {
    let mut missing = 0;
    for seed in 0..50 {
        let spec = StrategySpec::named("k_underbid").with_param("mode", "drop_all");
        let t = run_trial(&with_coalition(split(32).with_seed(seed), &[4], spec)).unwrap();
        let cert = t.declared[3].as_ref().unwrap();
        assert!(cert.w.is_empty() && cert.k == 0);
        assert!(t.outcome.is_fail());
        missing +=
            t.verification.iter().flatten().any(|r| matches!(r, VerifyResult::Fail(FailReason::MissingVote { .. })))
                as u32;
    }
    assert!(missing >= 45, "{missing}");
}

#[test]
fn per_peer_lists_and_first_declaration_binding() {
    let spec = StrategySpec::named("commitment_mismatch").with_param("per_peer", true);
    let member = AgentId(3);
    for seed in 0..20 {
        let t = run_trial(&with_coalition(split(16).with_seed(seed), &[3], spec.clone())).unwrap();
        let replies: Vec<_> = t
            .messages_in(Phase::Commitment)
            .filter(|m| m.kind == MessageKind::IntentionReply && m.sender == member && m.receiver != member)
            .collect();
        let distinct: BTreeSet<_> = replies
            .iter()
            .map(|m| match &m.payload {
                Payload::Intention(h) => (**h).clone(),
                _ => unreachable!(),
            })
            .map(|h| format!("{h:?}"))
            .collect();
        let pullers: BTreeSet<_> = replies.iter().map(|m| m.receiver).collect();
        assert_eq!(distinct.len(), pullers.len());

        // h*_{3,u} comes from the first reply to an honest puller
        let first = replies.iter().min_by_key(|m| (m.round, m.receiver));
        let rec = legitimate_winner(&t, &[member].into());
        if let Some(first) = first {
            let Payload::Intention(h) = &first.payload else { unreachable!() };
            assert!(std::sync::Arc::ptr_eq(h, &t.first_declarations[&member].intention));
            let m = t.params().m;
            let bound: u64 = h.votes().iter().filter(|v| v.z == AgentId(5)).map(|v| v.h).sum::<u64>() % m;
            let others: u64 = t
                .first_declarations
                .iter()
                .filter(|(v, _)| **v != member)
                .flat_map(|(_, d)| d.intention.votes().iter().filter(|v| v.z == AgentId(5)).map(|v| v.h))
                .sum::<u64>()
                % m;
            assert_eq!(rec.k_star[&AgentId(5)], (bound + others) % m);
        }
    }
}

#[test]
fn fake_faulty_is_marked_faulty() {
    let spec = StrategySpec::named("fake_faulty");
    for seed in 0..10 {
        let t = run_trial(&with_coalition(split(16).with_seed(seed), &[7], spec.clone())).unwrap();
        assert!(!t
            .messages
            .iter()
            .any(|m| m.kind == MessageKind::IntentionReply && m.sender == AgentId(7) && m.receiver != AgentId(7)));
        for u in t.honest() {
            if let Some(r) = t.agent(u).ledger.record(AgentId(7)) {
                assert_eq!(r, &VoterRecord::FaultyMark);
            }
        }
        // it still votes
        assert!(t.messages.iter().any(|m| m.kind == MessageKind::VotePush && m.sender == AgentId(7)));
    }
}

#[test]
fn coherence_silence_all_sends_nothing_late() {
    let spec = StrategySpec::named("coherence_silence").with_param("targets", "all");
    for seed in 0..10 {
        let t = run_trial(&with_coalition(split(16).with_seed(seed), &[2], spec.clone())).unwrap();
        assert!(!t.messages.iter().any(|m| m.sender == AgentId(2)
            && m.receiver != AgentId(2)
            && matches!(m.kind, MessageKind::CertPush | MessageKind::CertReply)));
    }
}

#[test]
fn unknown_strategy_is_rejected() {
    let cfg = with_coalition(split(8), &[1], StrategySpec::named("nope"));
    assert_eq!(run_trial(&cfg).unwrap_err(), fair_gossip::ConfigError::UnknownStrategy("nope".to_string()));
}
