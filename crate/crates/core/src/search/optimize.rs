use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Direction, SearchError};
use crate::mc::{block_rng, derive_seed};

/// Probe evaluations used to set the initial temperature.
pub const PROBES: usize = 100;

fn default_cooling() -> f64 {
    0.995
}

fn default_anneal_step() -> f64 {
    0.25
}

fn default_local_step() -> f64 {
    0.5
}

fn default_step_decay() -> f64 {
    0.99
}

/// Derivative-free optimizer over a parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    /// Metropolis chain with temperature `t0 · cooling^k`. Without `t0` the
    /// temperature starts at the interquartile range of 100 probe values.
    Annealing {
        steps: usize,
        #[serde(default = "default_cooling")]
        cooling: f64,
        #[serde(default = "default_anneal_step")]
        step_size: f64,
        #[serde(default)]
        t0: Option<f64>,
    },
    /// Independent greedy chains from random starts, proposal width
    /// `step_size · step_decay^k`.
    MultiStart {
        restarts: usize,
        steps: usize,
        #[serde(default = "default_local_step")]
        step_size: f64,
        #[serde(default = "default_step_decay")]
        step_decay: f64,
    },
}

impl Optimizer {
    pub(crate) fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.into()));
        match *self {
            Optimizer::Annealing { steps, cooling, step_size, t0 } => {
                if steps < 100 {
                    return bad("annealing needs at least 100 steps");
                }
                if !(cooling > 0.0 && cooling <= 1.0) {
                    return bad("cooling must lie in (0, 1]");
                }
                if !(step_size.is_finite() && step_size > 0.0) {
                    return bad("step_size must be positive");
                }
                if t0.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
                    return bad("t0 must be positive");
                }
            }
            Optimizer::MultiStart { restarts, steps, step_size, step_decay } => {
                if restarts == 0 {
                    return bad("restarts must be positive");
                }
                if steps < 100 {
                    return bad("local search needs at least 100 steps");
                }
                if !(step_size.is_finite() && step_size > 0.0) {
                    return bad("step_size must be positive");
                }
                if !(step_decay > 0.0 && step_decay <= 1.0) {
                    return bad("step_decay must lie in (0, 1]");
                }
            }
        }
        Ok(())
    }
}

/// Running best of one chain, recorded whenever it improves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub start: usize,
    pub step: usize,
    pub value: f64,
}

/// One objective value with its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Eval {
    pub value: f64,
    pub error: f64,
}

pub(crate) struct Outcome {
    pub theta: Vec<f64>,
    pub best: Eval,
    pub trajectory: Vec<TrajectoryPoint>,
    pub evaluations: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub t0: Option<f64>,
}

/// The objective returns `Ok(None)` for an infeasible parameter vector.
pub(crate) trait Objective: Sync {
    fn prior(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn eval(&self, theta: &[f64]) -> Result<Option<Eval>, SearchError>;
}

struct Chain<'a, O: Objective> {
    objective: &'a O,
    sign: f64,
    start: usize,
    theta: Vec<f64>,
    current: Eval,
    best_theta: Vec<f64>,
    best: Eval,
    trajectory: Vec<TrajectoryPoint>,
    evaluations: usize,
    accepted: usize,
    rejected: usize,
}

impl<'a, O: Objective> Chain<'a, O> {
    fn new(objective: &'a O, sign: f64, start: usize, theta: Vec<f64>, value: Eval) -> Self {
        Self {
            objective,
            sign,
            start,
            best_theta: theta.clone(),
            theta,
            current: value,
            best: value,
            trajectory: vec![TrajectoryPoint { start, step: 0, value: value.value }],
            evaluations: 0,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Proposes a Gaussian move and accepts it when `accept(gain)` holds.
    fn step(
        &mut self,
        k: usize,
        width: f64,
        rng: &mut ChaCha8Rng,
        accept: impl FnOnce(f64, &mut ChaCha8Rng) -> bool,
    ) -> Result<(), SearchError> {
        let proposal: Vec<f64> = self
            .theta
            .iter()
            .map(|t| t + width * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.evaluations += 1;
        let Some(e) = self.objective.eval(&proposal)?.filter(|e| e.value.is_finite()) else {
            self.rejected += 1;
            return Ok(());
        };
        let gain = self.sign * (e.value - self.current.value);
        if !accept(gain, rng) {
            return Ok(());
        }
        self.accepted += 1;
        self.theta = proposal;
        self.current = e;
        if self.sign * (e.value - self.best.value) > 0.0 {
            self.best = e;
            self.best_theta = self.theta.clone();
            self.trajectory.push(TrajectoryPoint { start: self.start, step: k, value: e.value });
        }
        Ok(())
    }
}

/// Draws prior samples until one is feasible, up to `tries`.
fn feasible_draw<O: Objective>(
    objective: &O,
    rng: &mut ChaCha8Rng,
    tries: usize,
    evaluations: &mut usize,
) -> Result<Option<(Vec<f64>, Eval)>, SearchError> {
    for _ in 0..tries {
        let theta = objective.prior(rng);
        *evaluations += 1;
        if let Some(e) = objective.eval(&theta)?.filter(|e| e.value.is_finite()) {
            return Ok(Some((theta, e)));
        }
    }
    Ok(None)
}

fn interquartile_range(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let q = |f: f64| {
        let x = f * (values.len() - 1) as f64;
        let (i, t) = (x.floor() as usize, x.fract());
        if i + 1 < values.len() {
            values[i] * (1.0 - t) + values[i + 1] * t
        } else {
            values[i]
        }
    };
    q(0.75) - q(0.25)
}

pub(crate) fn run<O: Objective>(
    objective: &O,
    optimizer: &Optimizer,
    direction: Direction,
    seed: u64,
) -> Result<Outcome, SearchError> {
    let sign = match direction {
        Direction::Max => 1.0,
        Direction::Min => -1.0,
    };
    match *optimizer {
        Optimizer::Annealing { steps, cooling, step_size, t0 } => {
            let mut rng = block_rng(derive_seed(seed, &[0]), 0);
            let mut evaluations = 0;
            let mut probes = Vec::with_capacity(PROBES);
            for _ in 0..PROBES {
                let theta = objective.prior(&mut rng);
                evaluations += 1;
                if let Some(e) = objective.eval(&theta)?.filter(|e| e.value.is_finite()) {
                    probes.push((theta, e));
                }
            }
            let Some(first) = probes
                .iter()
                .max_by(|a, b| (sign * a.1.value).total_cmp(&(sign * b.1.value)))
                .cloned()
            else {
                return Err(SearchError::DegenerateInput("no feasible probe among 100 draws".into()));
            };
            let t0 = t0.unwrap_or_else(|| {
                let mut vals: Vec<f64> = probes.iter().map(|p| p.1.value).collect();
                let iqr = interquartile_range(&mut vals);
                if iqr > 0.0 {
                    iqr
                } else {
                    1e-3 * first.1.value.abs().max(1e-12)
                }
            });
            let mut chain = Chain::new(objective, sign, 0, first.0, first.1);
            chain.evaluations = evaluations;
            let mut rng = block_rng(derive_seed(seed, &[1]), 0);
            let mut t = t0;
            for k in 1..=steps {
                chain.step(k, step_size, &mut rng, |gain, rng| gain >= 0.0 || rng.gen::<f64>() < (gain / t).exp())?;
                t *= cooling;
            }
            Ok(Outcome {
                theta: chain.best_theta,
                best: chain.best,
                trajectory: chain.trajectory,
                evaluations: chain.evaluations,
                accepted: chain.accepted,
                rejected: chain.rejected,
                t0: Some(t0),
            })
        }
        Optimizer::MultiStart { restarts, steps, step_size, step_decay } => {
            let chains: Vec<Result<Option<Chain<O>>, SearchError>> = (0..restarts)
                .into_par_iter()
                .map(|r| {
                    let mut rng = block_rng(derive_seed(seed, &[2, r as u64]), 0);
                    let mut evaluations = 0;
                    let Some((theta, e)) = feasible_draw(objective, &mut rng, PROBES, &mut evaluations)? else {
                        return Ok(None);
                    };
                    let mut chain = Chain::new(objective, sign, r, theta, e);
                    chain.evaluations = evaluations;
                    let mut width = step_size;
                    for k in 1..=steps {
                        chain.step(k, width, &mut rng, |gain, _| gain > 0.0)?;
                        width *= step_decay;
                    }
                    Ok(Some(chain))
                })
                .collect();
            let mut merged: Option<Outcome> = None;
            let (mut evaluations, mut accepted, mut rejected) = (0, 0, 0);
            let mut trajectory = Vec::new();
            for chain in chains {
                let Some(c) = chain? else { continue };
                evaluations += c.evaluations;
                accepted += c.accepted;
                rejected += c.rejected;
                trajectory.extend(c.trajectory.iter().copied());
                let better = merged.as_ref().is_none_or(|m| sign * (c.best.value - m.best.value) > 0.0);
                if better {
                    merged = Some(Outcome {
                        theta: c.best_theta,
                        best: c.best,
                        trajectory: Vec::new(),
                        evaluations: 0,
                        accepted: 0,
                        rejected: 0,
                        t0: None,
                    });
                }
            }
            let mut out = merged.ok_or_else(|| SearchError::DegenerateInput("no start found a feasible point".into()))?;
            out.trajectory = trajectory;
            out.evaluations = evaluations;
            out.accepted = accepted;
            out.rejected = rejected;
            Ok(out)
        }
    }
}
