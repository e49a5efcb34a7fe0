//! Scripted stand-ins for the agent.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::{Action, Arg, ConstructionStmt, Constructor, PointName};
use crate::synth::SynthItem;

pub trait ScriptedPolicy {
    fn name(&self) -> &'static str;
    /// Actions to play after the build.
    fn plan(&mut self, item: &SynthItem, rng: &mut ChaCha8Rng) -> Vec<Action>;
    /// Stand-in for a training step, given the round's statistics.
    fn update(&mut self, mean_reward: f64, mean_abs_adv: f64);
    fn skill(&self) -> f64 {
        0.0
    }
}

/// The winning script: reveal the withheld constructions, then propose
/// every goal.
fn oracle_plan(item: &SynthItem) -> Vec<Action> {
    let mut out = vec![Action::Add(item.aux.clone())];
    out.extend(item.problem.goals.iter().cloned().map(Action::Propose));
    out
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Always plays the winning script.
#[derive(Debug, Clone, Default)]
pub struct OraclePolicy;

impl ScriptedPolicy for OraclePolicy {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn plan(&mut self, item: &SynthItem, _rng: &mut ChaCha8Rng) -> Vec<Action> {
        oracle_plan(item)
    }

    fn update(&mut self, _mean_reward: f64, _mean_abs_adv: f64) {}
}

/// Solves a task of proof length `n` with probability `sigmoid(skill - n)`
/// and otherwise proposes the goal without constructions. Skill grows by
/// `rate` times the mean absolute advantage of each round.
#[derive(Debug, Clone)]
pub struct LogisticPolicy {
    pub skill: f64,
    pub rate: f64,
}

impl LogisticPolicy {
    pub fn new(skill: f64, rate: f64) -> LogisticPolicy {
        LogisticPolicy { skill, rate }
    }

    pub fn success_probability(&self, difficulty: f64) -> f64 {
        sigmoid(self.skill - difficulty)
    }
}

impl ScriptedPolicy for LogisticPolicy {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn plan(&mut self, item: &SynthItem, rng: &mut ChaCha8Rng) -> Vec<Action> {
        if rng.gen_bool(self.success_probability(item.proof_len as f64).clamp(0.0, 1.0)) {
            oracle_plan(item)
        } else {
            item.problem.goals.iter().cloned().map(Action::Propose).collect()
        }
    }

    fn update(&mut self, _mean_reward: f64, mean_abs_adv: f64) {
        self.skill += self.rate * mean_abs_adv;
    }

    fn skill(&self) -> f64 {
        self.skill
    }
}

/// Adds a few random midpoints, feet and circumcenters, then proposes the goals.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    pub adds: usize,
}

impl Default for RandomPolicy {
    fn default() -> Self {
        RandomPolicy { adds: 2 }
    }
}

impl ScriptedPolicy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn plan(&mut self, item: &SynthItem, rng: &mut ChaCha8Rng) -> Vec<Action> {
        let mut points: Vec<PointName> = item.problem.points();
        let mut out = Vec::new();
        for i in 0..self.adds {
            let c = *[Constructor::Midpoint, Constructor::Foot, Constructor::Circumcenter].choose(rng).expect("non-empty");
            let n = c.signature().point_args;
            if points.len() < n {
                break;
            }
            let args: Vec<Arg> = points.choose_multiple(rng, n).cloned().map(Arg::Point).collect();
            let name = PointName::new(&alloc::format!("r{i}")).expect("valid name");
            out.push(Action::Add(vec![ConstructionStmt {
                new_points: vec![name.clone()],
                constructor: c,
                args,
                allow_double: false,
                constraints: Vec::new(),
            }]));
            points.push(name);
        }
        out.extend(item.problem.goals.iter().cloned().map(Action::Propose));
        out
    }

    fn update(&mut self, _mean_reward: f64, _mean_abs_adv: f64) {}
}

/// Policy by command-line name: `logistic`, `frozen` (logistic without
/// learning), `oracle` or `random`.
pub fn by_name(name: &str, skill: f64, rate: f64) -> Option<Box<dyn ScriptedPolicy>> {
    match name {
        "logistic" => Some(Box::new(LogisticPolicy::new(skill, rate))),
        "frozen" => Some(Box::new(LogisticPolicy::new(skill, 0.0))),
        "oracle" => Some(Box::new(OraclePolicy)),
        "random" => Some(Box::new(RandomPolicy::default())),
        _ => None,
    }
}
