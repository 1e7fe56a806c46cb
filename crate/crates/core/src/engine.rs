//! Single-tree simulation of the maximal displacement.
//!
//! Trees are traversed depth first. A frontier entry is a brood: the common
//! birth point of `remaining` unprocessed siblings, so a brood of a million
//! children costs one stack slot.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Exp1;

use crate::motion::{MotionModel, Span};
use crate::offspring::OffspringLaw;
use crate::rng::{open_unit, tree_stream, TreeRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Branching Lévy process: exponential lifetimes with rate `beta`.
    ContinuousTime { beta: f64 },
    /// Branching random walk: one lattice step per generation.
    DiscreteTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub mode: Mode,
    /// Maximum number of particles ever created.
    pub budget: u64,
    /// Abort a tree as soon as its running maximum reaches this level.
    pub stop_threshold: Option<f64>,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self, model: &MotionModel) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::ConfigMismatch("budget must be at least 1"));
        }
        match self.mode {
            Mode::ContinuousTime { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::ConfigMismatch("branching rate must be positive"));
                }
                if model.is_discrete_time() {
                    return Err(Error::ConfigMismatch(
                        "continuous-time mode needs a Brownian or compound-Poisson motion",
                    ));
                }
            }
            Mode::DiscreteTime => {
                if !model.is_discrete_time() {
                    return Err(Error::ConfigMismatch("discrete-time mode needs a lattice walk"));
                }
            }
        }
        if let Some(x) = self.stop_threshold {
            if x.is_nan() {
                return Err(Error::ConfigMismatch("stop threshold is NaN"));
            }
        }
        Ok(())
    }
}

/// Result of one tree.
///
/// When `censored` is set the budget ran out and `m_observed` is only a lower
/// bound on the tree's true maximum. `stopped_early` means the stop threshold
/// was reached, which takes precedence over censoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOutcome {
    pub m_observed: f64,
    pub censored: bool,
    pub stopped_early: bool,
    pub particles_created: u64,
    pub generations: u64,
}

struct Brood {
    origin: f64,
    generation: u64,
    remaining: u64,
}

struct Tracker {
    m: f64,
    created: u64,
    generations: u64,
    stop: f64,
    budget: u64,
}

enum Step {
    Continue,
    Stopped,
    Censored,
}

impl Tracker {
    fn observe(&mut self, level: f64) -> bool {
        if level > self.m {
            self.m = level;
        }
        self.m >= self.stop
    }

    // accounts for a brood of `k`; the final brood may overshoot the budget
    fn spawn(&mut self, k: u64) -> Step {
        if self.created.saturating_add(k) > self.budget {
            self.created = self.created.saturating_add(k);
            return Step::Censored;
        }
        self.created += k;
        Step::Continue
    }

    fn finish(self, step: Step) -> TreeOutcome {
        TreeOutcome {
            m_observed: self.m,
            censored: matches!(step, Step::Censored),
            stopped_early: matches!(step, Step::Stopped),
            particles_created: self.created,
            generations: self.generations,
        }
    }
}

/// Simulate tree number `tree_index`; a pure function of
/// `(law, model, config, tree_index)`.
pub fn simulate_tree(
    law: &OffspringLaw,
    model: &MotionModel,
    config: &SimConfig,
    tree_index: u64,
) -> Result<TreeOutcome> {
    config.validate(model)?;
    let mut rng = tree_stream(config.master_seed, tree_index);
    let mut tracker = Tracker {
        m: 0.0,
        created: 1,
        generations: 0,
        stop: config.stop_threshold.unwrap_or(f64::INFINITY),
        budget: config.budget,
    };
    // the root sits at the origin at time zero
    if tracker.observe(0.0) {
        return Ok(tracker.finish(Step::Stopped));
    }
    let end = match config.mode {
        Mode::ContinuousTime { beta } => continuous_tree(law, model, beta, &mut tracker, &mut rng)?,
        Mode::DiscreteTime => discrete_tree(law, model, &mut tracker, &mut rng)?,
    };
    Ok(tracker.finish(end))
}

fn continuous_tree(
    law: &OffspringLaw,
    model: &MotionModel,
    beta: f64,
    tracker: &mut Tracker,
    rng: &mut TreeRng,
) -> Result<Step> {
    let mut frontier = Vec::new();
    frontier.push(Brood {
        origin: 0.0,
        generation: 0,
        remaining: 1,
    });
    while let Some(top) = frontier.last_mut() {
        let origin = top.origin;
        let generation = top.generation;
        top.remaining -= 1;
        if top.remaining == 0 {
            frontier.pop();
        }
        tracker.generations = tracker.generations.max(generation);

        let e: f64 = rng.sample(Exp1);
        let lifetime = e / beta;
        let seg = model.sample_segment(Span::Time(lifetime), rng)?;
        if tracker.observe(origin + seg.path_max) {
            return Ok(Step::Stopped);
        }
        let k = law.sample_offspring(open_unit(rng));
        if k > 0 {
            if let Step::Censored = tracker.spawn(k) {
                return Ok(Step::Censored);
            }
            frontier.push(Brood {
                origin: origin + seg.displacement,
                generation: generation + 1,
                remaining: k,
            });
        }
    }
    Ok(Step::Continue)
}

fn discrete_tree(
    law: &OffspringLaw,
    model: &MotionModel,
    tracker: &mut Tracker,
    rng: &mut TreeRng,
) -> Result<Step> {
    let MotionModel::LatticeWalk { step } = model else {
        return Err(Error::ConfigMismatch("discrete-time mode needs a lattice walk"));
    };
    let mut frontier = Vec::new();
    // the root reproduces in place; each child is displaced from its parent
    let k = law.sample_offspring(open_unit(rng));
    if k > 0 {
        if let Step::Censored = tracker.spawn(k) {
            return Ok(Step::Censored);
        }
        frontier.push(Brood {
            origin: 0.0,
            generation: 1,
            remaining: k,
        });
    }
    while let Some(top) = frontier.last_mut() {
        let origin = top.origin;
        let generation = top.generation;
        top.remaining -= 1;
        if top.remaining == 0 {
            frontier.pop();
        }
        tracker.generations = tracker.generations.max(generation);

        let position = origin + step.sample(rng) as f64;
        if tracker.observe(position) {
            return Ok(Step::Stopped);
        }
        let k = law.sample_offspring(open_unit(rng));
        if k > 0 {
            if let Step::Censored = tracker.spawn(k) {
                return Ok(Step::Censored);
            }
            frontier.push(Brood {
                origin: position,
                generation: generation + 1,
                remaining: k,
            });
        }
    }
    Ok(Step::Continue)
}

/// Trees `range` in index order on the calling thread.
pub fn simulate_range(
    law: &OffspringLaw,
    model: &MotionModel,
    config: &SimConfig,
    range: core::ops::Range<u64>,
) -> Result<Vec<TreeOutcome>> {
    config.validate(model)?;
    range.map(|i| simulate_tree(law, model, config, i)).collect()
}
