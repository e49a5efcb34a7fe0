//! Complexity-boosting curriculum: binary step rewards, group-normalized
//! advantages and the difficulty schedule, with scripted policies standing in
//! for a trained agent.

mod policy;

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{Action, ActionKind};
use crate::engine::{start_session, SessionConfig, Status};
use crate::synth::{pipeline, sample_seed, BatchRunner, Cache, SynthConfig, SynthError, SynthItem};

pub use policy::{by_name, LogisticPolicy, OraclePolicy, RandomPolicy, ScriptedPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReward {
    pub outcome: bool,
    pub step_effective: bool,
    pub combined: bool,
}

/// Reward of one step. `effective` is whether a proposal was proven, or
/// whether an added construction is used in the final proof.
pub fn step_reward(outcome: bool, _kind: ActionKind, effective: bool) -> StepReward {
    StepReward { outcome, step_effective: effective, combined: outcome && effective }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdvantageBatch {
    pub rewards: Vec<Vec<f64>>,
    pub advantages: Vec<Vec<f64>>,
}

impl AdvantageBatch {
    pub fn mean_abs(&self) -> f64 {
        let n: usize = self.advantages.iter().map(Vec::len).sum();
        if n == 0 {
            return 0.0;
        }
        self.advantages.iter().flatten().map(|a| libm::fabs(*a)).sum::<f64>() / n as f64
    }
}

/// Normalizes rewards by the mean and population standard deviation of all
/// steps of all trajectories. A constant batch gets zero advantages.
pub fn advantages(rewards: &[Vec<f64>]) -> AdvantageBatch {
    let flat: Vec<f64> = rewards.iter().flatten().copied().collect();
    let n = flat.len() as f64;
    let (mean, std) = if flat.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = flat.iter().sum::<f64>() / n;
        let var = flat.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        (mean, libm::sqrt(var))
    };
    let advantages = rewards
        .iter()
        .map(|traj| traj.iter().map(|r| if std > 0.0 { (r - mean) / std } else { 0.0 }).collect())
        .collect();
    AdvantageBatch { rewards: rewards.to_vec(), advantages }
}

/// Mean absolute advantage of Bernoulli(`p`) rewards: `2 sqrt(p (1 - p))`.
pub fn expected_abs_advantage(p: f64) -> f64 {
    2.0 * libm::sqrt(p * (1.0 - p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub kappa: f64,
    pub mean_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    pub kappa: f64,
    pub alpha: f64,
    pub kappa_min: f64,
    pub round: usize,
    pub history: Vec<RoundRecord>,
}

impl CurriculumState {
    pub fn new(kappa: f64, alpha: f64, kappa_min: f64) -> CurriculumState {
        CurriculumState { kappa: kappa.max(kappa_min), alpha, kappa_min, round: 0, history: Vec::new() }
    }
}

/// Raises `kappa` by `alpha` when the batch succeeded more than half the
/// time and lowers it otherwise, never below `kappa_min`.
pub fn update_kappa(state: &mut CurriculumState, mean_reward: f64) {
    state.history.push(RoundRecord { round: state.round, kappa: state.kappa, mean_reward });
    let next = if mean_reward > 0.5 { state.kappa + state.alpha } else { state.kappa - state.alpha };
    state.kappa = next.max(state.kappa_min);
    state.round += 1;
}

/// One played step of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayedStep {
    pub kind: ActionKind,
    pub status: Status,
    pub reward: StepReward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub solved: bool,
    pub steps: Vec<PlayedStep>,
}

impl Trajectory {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| if s.reward.combined { 1.0 } else { 0.0 }).collect()
    }
}

/// Plays `actions` on a fresh session of `item`'s problem and scores every
/// step once the outcome is known.
pub fn rollout(item: &SynthItem, actions: &[Action], cfg: &SessionConfig) -> Trajectory {
    let mut played: Vec<(ActionKind, Status, Option<Vec<String>>)> = Vec::new();
    let build = Action::Build(item.problem.clone());
    let Ok((mut s, fb)) = start_session(&build, item.seed, cfg) else {
        let r = step_reward(false, ActionKind::Build, false);
        return Trajectory { solved: false, steps: alloc::vec![PlayedStep { kind: ActionKind::Build, status: Status::Error, reward: r }] };
    };
    played.push((ActionKind::Build, fb.status, None));
    for a in actions {
        if s.is_solved() {
            break;
        }
        let added = match a {
            Action::Add(stmts) => Some(stmts.iter().map(|x| alloc::string::ToString::to_string(x)).collect()),
            _ => None,
        };
        let kind = a.kind();
        match s.step(a.clone()) {
            Ok(fb) => played.push((kind, fb.status, added)),
            Err(_) => break,
        }
    }
    let solved = s.is_solved();
    let used: Vec<String> = if solved { s.extract_proof().map(|d| d.aux_used).unwrap_or_default() } else { Vec::new() };
    let steps = played
        .into_iter()
        .map(|(kind, status, added)| {
            let effective = match kind {
                ActionKind::Build => status != Status::Error,
                ActionKind::Propose => matches!(status, Status::Proven | Status::SessionSolved),
                ActionKind::Add => {
                    status == Status::Ok && added.is_some_and(|v| v.iter().all(|stmt| used.contains(stmt)))
                }
            };
            PlayedStep { kind, status, reward: step_reward(solved, kind, effective) }
        })
        .collect();
    Trajectory { solved, steps }
}

/// One round of the simulation, as written to the trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub kappa: f64,
    pub mean_reward: f64,
    pub mean_abs_adv: f64,
    pub items: usize,
    pub skill: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub rounds: usize,
    pub batch_size: usize,
    pub kappa0: f64,
    pub alpha: f64,
    pub kappa_min: f64,
    pub seed: u64,
    pub synth: SynthConfig,
    pub session: SessionConfig,
}

impl SimConfig {
    pub fn new(rounds: usize, batch_size: usize, alpha: f64, seed: u64) -> SimConfig {
        SimConfig {
            rounds,
            batch_size,
            kappa0: 6.0,
            alpha,
            kappa_min: 3.0,
            seed,
            synth: SynthConfig::new(6.0),
            session: SessionConfig::default(),
        }
    }
}

/// Runs the curriculum loop: each round draws a batch at the current
/// difficulty, plays the policy on it, updates the policy and then the
/// difficulty. Rounds whose batch cannot be synthesized are skipped.
pub fn run_cbrl_sim(
    policy: &mut dyn ScriptedPolicy,
    cfg: &SimConfig,
    cache: &mut dyn Cache,
    runner: BatchRunner<'_>,
    expired: &mut dyn FnMut() -> bool,
) -> (CurriculumState, Vec<RoundTrace>) {
    let mut state = CurriculumState::new(cfg.kappa0, cfg.alpha, cfg.kappa_min);
    let mut trace = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for round in 0..cfg.rounds {
        let synth = SynthConfig { kappa: state.kappa, ..cfg.synth.clone() };
        let batch = match pipeline(&synth, cfg.batch_size, sample_seed(cfg.seed, round as u64), cache, runner, expired) {
            Ok((items, _)) => items,
            Err(e) => {
                let reason = match e {
                    SynthError::Timeout { shortfall, .. } => alloc::format!("synthesis shortfall of {shortfall}"),
                    other => alloc::format!("{other}"),
                };
                trace.push(RoundTrace {
                    round,
                    kappa: state.kappa,
                    mean_reward: 0.0,
                    mean_abs_adv: 0.0,
                    items: 0,
                    skill: policy.skill(),
                    skipped: Some(reason),
                });
                continue;
            }
        };
        let trajectories: Vec<Trajectory> = batch
            .iter()
            .map(|item| {
                let plan = policy.plan(item, &mut rng);
                rollout(item, &plan, &cfg.session)
            })
            .collect();
        let rewards: Vec<Vec<f64>> = trajectories.iter().map(Trajectory::rewards).collect();
        let adv = advantages(&rewards);
        let mean_reward = trajectories.iter().filter(|t| t.solved).count() as f64 / trajectories.len() as f64;
        policy.update(mean_reward, adv.mean_abs());
        trace.push(RoundTrace {
            round,
            kappa: state.kappa,
            mean_reward,
            mean_abs_adv: adv.mean_abs(),
            items: batch.len(),
            skill: policy.skill(),
            skipped: None,
        });
        state.round = round;
        update_kappa(&mut state, mean_reward);
    }
    (state, trace)
}
