use geoproof_core::curriculum::{
    advantages, by_name, expected_abs_advantage, rollout, run_cbrl_sim, step_reward, update_kappa, CurriculumState,
    LogisticPolicy, OraclePolicy, RandomPolicy, ScriptedPolicy, SimConfig,
};
use geoproof_core::dsl::{parse_problem, parse_statements, Action, ActionKind};
use geoproof_core::engine::{SessionConfig, Status};
use geoproof_core::synth::{run_sequential, MemoryCache, SynthItem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kite() -> SynthItem {
    SynthItem {
        problem: parse_problem("a b c = triangle; d = reflect b a c; g = midpoint a c ? cong b g d g").unwrap(),
        aux: parse_statements("e = foot a b d").unwrap(),
        proof_len: 3,
        seed: 0,
    }
}

#[test]
fn reward_is_a_conjunction() {
    for kind in [ActionKind::Build, ActionKind::Add, ActionKind::Propose] {
        for outcome in [false, true] {
            for effective in [false, true] {
                let r = step_reward(outcome, kind, effective);
                assert_eq!(r.combined, outcome && effective);
                assert_eq!((r.outcome, r.step_effective), (outcome, effective));
            }
        }
    }
}

#[test]
fn advantage_examples() {
    let b = advantages(&[vec![1.0, 1.0], vec![0.0, 0.0]]);
    assert_eq!(b.advantages, [vec![1.0, 1.0], vec![-1.0, -1.0]]);
    let b = advantages(&[vec![1.0, 1.0, 1.0], vec![1.0]]);
    assert_eq!(b.advantages, [vec![0.0; 3], vec![0.0]]);
    assert_eq!(advantages(&[vec![1.0]]).advantages, [vec![0.0]]);
    assert_eq!(b.mean_abs(), 0.0);
}

#[test]
fn expected_abs_advantage_examples() {
    assert_eq!(expected_abs_advantage(0.5), 1.0);
    assert_eq!(expected_abs_advantage(0.0), 0.0);
    assert!((expected_abs_advantage(0.9) - 0.6).abs() < 1e-12);
}

#[test]
fn abs_advantage_law_by_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (batches, k) = (4000, 64);
    let mut means = Vec::new();
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let samples: Vec<f64> = (0..batches)
            .map(|_| {
                let r: Vec<Vec<f64>> = (0..k).map(|_| vec![if rng.gen_bool(p) { 1.0 } else { 0.0 }]).collect();
                advantages(&r).mean_abs()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / batches as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        // The batch estimate converges to the law from below; allow the O(1/k) bias.
        let bias = 1.0 / k as f64;
        let diff = (mean - expected_abs_advantage(p)).abs();
        assert!(diff <= 3.0 * se + bias, "p={p}: {mean} vs {} (se {se})", expected_abs_advantage(p));
        means.push((p, mean));
    }
    let best = means.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(best.0, 0.5);
}

#[test]
fn kappa_update_examples() {
    let mut s = CurriculumState::new(10.0, 2.0, 1.0);
    update_kappa(&mut s, 0.7);
    assert_eq!(s.kappa, 12.0);
    let mut s = CurriculumState::new(10.0, 2.0, 1.0);
    update_kappa(&mut s, 0.5);
    assert_eq!(s.kappa, 8.0);
    let mut s = CurriculumState::new(1.0, 2.0, 1.0);
    update_kappa(&mut s, 0.2);
    assert_eq!(s.kappa, 1.0);
    assert_eq!(s.history.len(), 1);
    assert_eq!((s.history[0].kappa, s.history[0].mean_reward), (1.0, 0.2));
}

#[test]
fn kappa_responds_monotonically() {
    let mut s = CurriculumState::new(5.0, 0.5, 2.0);
    for _ in 0..10 {
        let before = s.kappa;
        update_kappa(&mut s, 0.8);
        assert!(s.kappa > before);
    }
    let mut prev = s.kappa;
    for _ in 0..40 {
        update_kappa(&mut s, 0.1);
        assert!(s.kappa < prev || s.kappa == 2.0);
        assert!(s.kappa >= 2.0);
        prev = s.kappa;
    }
    assert_eq!(s.kappa, 2.0);
}

#[test]
fn oracle_rollout_earns_every_step() {
    let item = kite();
    let t = rollout(&item, &OraclePolicy.plan(&item, &mut ChaCha8Rng::seed_from_u64(0)), &SessionConfig::default());
    assert!(t.solved);
    assert_eq!(t.steps.len(), 3);
    assert_eq!(t.steps.last().unwrap().status, Status::SessionSolved);
    assert_eq!(t.rewards(), [1.0, 1.0, 1.0]);
}

#[test]
fn unused_construction_earns_nothing() {
    let item = kite();
    let actions = vec![
        Action::Add(parse_statements("z = midpoint a b").unwrap()),
        Action::Add(item.aux.clone()),
        Action::Propose(item.problem.goals[0].clone()),
    ];
    let t = rollout(&item, &actions, &SessionConfig::default());
    assert!(t.solved);
    assert_eq!(t.rewards(), [1.0, 0.0, 1.0, 1.0]);
}

#[test]
fn failed_rollout_earns_nothing() {
    let item = kite();
    let actions = vec![Action::Propose(item.problem.goals[0].clone())];
    let t = rollout(&item, &actions, &SessionConfig::default());
    assert!(!t.solved);
    assert_eq!(t.steps[1].status, Status::NotProven);
    assert_eq!(t.rewards(), [0.0, 0.0]);
    let t = rollout(&item, &RandomPolicy::default().plan(&item, &mut ChaCha8Rng::seed_from_u64(3)), &SessionConfig::default());
    assert!(t.rewards().iter().all(|&r| r == 0.0) || t.solved);
}

#[test]
fn logistic_policy_success_rate() {
    let mut p = LogisticPolicy::new(5.0, 0.1);
    assert_eq!(p.success_probability(5.0), 0.5);
    let mut item = kite();
    item.proof_len = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let wins = (0..2000).filter(|_| p.plan(&item, &mut rng).len() == 2).count();
    assert!((wins as f64 / 2000.0 - 0.5).abs() < 0.05, "{wins}");
    p.update(0.5, 1.0);
    assert!((p.skill() - 5.1).abs() < 1e-12);
}

#[test]
fn policies_by_name() {
    for n in ["logistic", "frozen", "oracle", "random"] {
        assert_eq!(by_name(n, 5.0, 0.1).unwrap().name(), if n == "frozen" { "logistic" } else { n });
    }
    assert!(by_name("greedy", 5.0, 0.1).is_none());
    let mut f = by_name("frozen", 5.0, 0.1).unwrap();
    f.update(0.5, 1.0);
    assert_eq!(f.skill(), 5.0);
}

#[test]
fn zero_alpha_keeps_kappa() {
    let cfg = SimConfig::new(4, 4, 0.0, 3);
    let mut policy = LogisticPolicy::new(6.0, 0.05);
    let (state, trace) = run_cbrl_sim(&mut policy, &cfg, &mut MemoryCache::new(), &run_sequential, &mut || false);
    assert_eq!(trace.len(), 4);
    assert!(trace.iter().all(|r| r.kappa == 6.0 && r.skipped.is_none() && r.items == 4));
    assert_eq!(state.kappa, 6.0);
}

#[test]
fn frozen_skill_oscillates_around_balance() {
    // Success is even where item proof lengths average the skill; batch items
    // lie within the tolerance of kappa, so that balance point lies within
    // tolerance of the skill.
    let cfg = SimConfig { kappa0: 4.0, ..SimConfig::new(24, 16, 1.0, 5) };
    let mut policy = LogisticPolicy::new(7.0, 0.0);
    let (_, trace) = run_cbrl_sim(&mut policy, &cfg, &mut MemoryCache::new(), &run_sequential, &mut || false);
    assert!(trace.iter().all(|r| r.skipped.is_none()));
    let late: Vec<f64> = trace[8..].iter().map(|r| r.kappa).collect();
    let (lo, hi) = late.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &k| (lo.min(k), hi.max(k)));
    assert!(hi - lo <= 2.0 * cfg.alpha, "{late:?}");
    let mean = late.iter().sum::<f64>() / late.len() as f64;
    assert!((mean - 7.0).abs() <= cfg.synth.tolerance + cfg.alpha, "{late:?}");
    // Above the balance the batch fails, below it succeeds.
    for r in &trace[8..] {
        if r.kappa == hi {
            assert!(r.mean_reward <= 0.5);
        }
        if r.kappa == lo {
            assert!(r.mean_reward > 0.5);
        }
    }
}

#[test]
fn timeouts_skip_rounds() {
    let mut cfg = SimConfig { kappa0: 40.0, ..SimConfig::new(2, 2, 1.0, 0) };
    cfg.synth.max_sample = 16;
    let mut policy = OraclePolicy;
    let (state, trace) = run_cbrl_sim(&mut policy, &cfg, &mut MemoryCache::new(), &run_sequential, &mut || false);
    assert!(trace.iter().all(|r| r.skipped.as_deref() == Some("synthesis shortfall of 2")));
    assert_eq!(state.kappa, 40.0);
}

proptest! {
    #[test]
    fn advantages_are_normalized(rewards in proptest::collection::vec(proptest::collection::vec(0u8..2, 1..6), 1..8)) {
        let r: Vec<Vec<f64>> = rewards.iter().map(|t| t.iter().map(|&x| x as f64).collect()).collect();
        let b = advantages(&r);
        prop_assert_eq!(b.advantages.iter().map(Vec::len).collect::<Vec<_>>(), r.iter().map(Vec::len).collect::<Vec<_>>());
        let flat: Vec<f64> = b.advantages.iter().flatten().copied().collect();
        let n = flat.len() as f64;
        let constant = r.iter().flatten().all(|&x| x == r[0][0]);
        if constant {
            prop_assert!(flat.iter().all(|&a| a == 0.0));
        } else {
            let mean = flat.iter().sum::<f64>() / n;
            let var = flat.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-12);
            prop_assert!((var - 1.0).abs() < 1e-12);
        }
    }
}
