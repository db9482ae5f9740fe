//! Monte Carlo MPC over a particle set of control sequences.
//!
//! Each control step scores every sequence by rendering its predicted views,
//! turns costs into normalized weights, emits the first input of the best
//! sequence, then resamples the set systematically, shifts the horizon by one
//! step and injects noise against degeneracy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::belief::GridBelief;
use crate::cost::{CostConfig, RolloutScorer};
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::image::{Descriptor, Image};
use crate::motion::{Channel, ControlBounds, ControlInput, ControlSequence};
use crate::real::Real;
use crate::scene::{Camera, SceneModel};
use crate::similarity::{dissimilarity, ImageDescriptor};

/// Divisor applied to costs before exponentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature<T> {
    /// Median of the finite costs in the batch (1 if that is not positive).
    Median,
    Fixed(T),
}

fn median<T: Real>(mut s: Vec<T>) -> T {
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        (s[m / 2 - 1] + s[m / 2]) * T::half()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig<T> {
    pub rollouts: usize,
    pub horizon: usize,
    /// Per-input probability of replacement by a fresh random input.
    pub mutation_prob: T,
    /// Standard deviation of the magnitude noise (meters or radians).
    pub magnitude_sigma: T,
    pub seed: u64,
    pub bounds: ControlBounds<T>,
    pub temperature: Temperature<T>,
    /// Extra score/resample passes over the ensemble before each control is chosen.
    pub refinements: usize,
    /// Evaluate rollouts on the ambient rayon pool.
    pub parallel: bool,
}

impl<T: Real> Default for PlannerConfig<T> {
    fn default() -> Self {
        Self {
            rollouts: 32,
            horizon: 5,
            mutation_prob: T::lit(0.2),
            magnitude_sigma: T::lit(0.15),
            seed: 0,
            bounds: ControlBounds::default(),
            temperature: Temperature::Median,
            refinements: 0,
            parallel: true,
        }
    }
}

impl<T: Real> PlannerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.rollouts < 2 || self.horizon < 1 {
            return Err(Error::InvalidConfig("planner needs at least 2 rollouts and horizon 1".into()));
        }
        if !(self.mutation_prob >= T::zero() && self.mutation_prob <= T::one()) {
            return Err(Error::InvalidConfig("mutation_prob must lie in [0, 1]".into()));
        }
        if !(self.magnitude_sigma >= T::zero()) {
            return Err(Error::InvalidConfig("magnitude_sigma must be non-negative".into()));
        }
        if let Temperature::Fixed(t) = self.temperature {
            if !(t > T::zero()) {
                return Err(Error::InvalidConfig("temperature must be positive".into()));
            }
        }
        self.bounds.validate()
    }
}

/// A fresh input: one of the eight signed channels, magnitude uniform in `(0, bound]`.
pub fn sample_input<T: Real, R: Rng + ?Sized>(rng: &mut R, bounds: &ControlBounds<T>) -> ControlInput<T> {
    let k = rng.random_range(0..8usize);
    let channel = Channel::ALL[k / 2];
    let sign = if k % 2 == 0 { T::one() } else { -T::one() };
    let u: f64 = rng.random();
    let magnitude = bounds.limit(channel) * T::lit(1.0 - u) * sign;
    ControlInput::new(channel, magnitude)
}

/// Systematic resampling: ancestor indices for `n` draws at positions `(u + i) / n`, `u ∈ [0, 1)`.
pub fn systematic_resample<T: Real>(weights: &[T], n: usize, u: T) -> Vec<usize> {
    let total: T = weights.iter().copied().sum();
    let mut out = Vec::with_capacity(n);
    let mut cum = weights.first().copied().unwrap_or_else(T::zero) / total;
    let mut j = 0;
    let n_t = T::from_usize_lossy(n);
    for i in 0..n {
        let pos = (u + T::from_usize_lossy(i)) / n_t;
        while pos >= cum && j + 1 < weights.len() {
            j += 1;
            cum = cum + weights[j] / total;
        }
        out.push(j);
    }
    out
}

/// Normalized `exp(-J / τ)` weights; non-finite costs get zero weight.
pub fn normalized_weights<T: Real>(costs: &[T], temperature: Temperature<T>) -> Result<Vec<T>> {
    let finite: Vec<T> = costs.iter().copied().filter(|c| c.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::EnsembleCollapse);
    }
    // Shifting by the minimum leaves normalized weights unchanged and keeps the best at exp(0).
    let min = finite.iter().copied().fold(T::infinity(), T::min);
    let positive_or_one = |v: T| if v > T::zero() { v } else { T::one() };
    let tau = match temperature {
        Temperature::Fixed(t) => t,
        Temperature::Median => positive_or_one(median(finite)),
    };
    let raw: Vec<T> = costs.iter().map(|c| if c.is_finite() { (-(*c - min) / tau).exp() } else { T::zero() }).collect();
    let total: T = raw.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::EnsembleCollapse);
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Weighted particle set of control sequences.
#[derive(Debug, Clone)]
pub struct RolloutEnsemble<T> {
    sequences: Vec<ControlSequence<T>>,
    weights: Vec<T>,
    costs: Vec<T>,
    scored: bool,
    rng: ChaCha8Rng,
}

impl<T: Real> RolloutEnsemble<T> {
    /// `N` random sequences of horizon `K` with uniform weights.
    pub fn init(cfg: &PlannerConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sequences = (0..cfg.rollouts)
            .map(|_| ControlSequence::new((0..cfg.horizon).map(|_| sample_input(&mut rng, &cfg.bounds)).collect()))
            .collect();
        let w = T::one() / T::from_usize_lossy(cfg.rollouts);
        Ok(Self { sequences, weights: vec![w; cfg.rollouts], costs: vec![T::nan(); cfg.rollouts], scored: false, rng })
    }

    pub fn from_sequences(sequences: Vec<ControlSequence<T>>, seed: u64) -> Result<Self> {
        let n = sequences.len();
        if n == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one sequence".into()));
        }
        let k = sequences[0].len();
        if sequences.iter().any(|s| s.len() != k) {
            return Err(Error::InvalidArgument("all sequences must share one horizon".into()));
        }
        let w = T::one() / T::from_usize_lossy(n);
        Ok(Self { sequences, weights: vec![w; n], costs: vec![T::nan(); n], scored: false, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn sequences(&self) -> &[ControlSequence<T>] {
        &self.sequences
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Costs from the last scoring (NaN before any).
    pub fn costs(&self) -> &[T] {
        &self.costs
    }

    pub fn is_scored(&self) -> bool {
        self.scored
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.sequences[0].len()
    }

    /// Installs weights derived from externally computed costs.
    pub fn set_costs(&mut self, costs: Vec<T>, temperature: Temperature<T>) -> Result<()> {
        if costs.len() != self.sequences.len() {
            return Err(Error::ContractViolation("one cost per rollout required".into()));
        }
        self.weights = normalized_weights(&costs, temperature)?;
        self.costs = costs;
        self.scored = true;
        Ok(())
    }

    /// Marks the ensemble scored with uniform weights (scoring disabled).
    pub fn set_uniform(&mut self) {
        let w = T::one() / T::from_usize_lossy(self.len());
        self.weights = vec![w; self.len()];
        self.costs = vec![T::nan(); self.len()];
        self.scored = true;
    }

    /// Scores every rollout from `s` and normalizes the weights.
    pub fn score<D: ImageDescriptor<T>>(&mut self, s: &Pose<T>, scorer: &RolloutScorer<'_, T, D>, cfg: &PlannerConfig<T>) -> Result<()> {
        let eval = |seq: &ControlSequence<T>| {
            scorer.sequence_cost(s, seq.inputs()).map(|c| if c.is_nan() { T::infinity() } else { c })
        };
        let costs: Vec<T> = if cfg.parallel {
            self.sequences.par_iter().map(eval).collect::<Result<_>>()?
        } else {
            self.sequences.iter().map(eval).collect::<Result<_>>()?
        };
        self.set_costs(costs, cfg.temperature)
    }

    /// Index of the maximum-weight rollout, lowest index on ties.
    pub fn best_index(&self) -> Result<usize> {
        if !self.scored {
            return Err(Error::ContractViolation("best_control requires a scored ensemble".into()));
        }
        let mut best = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn best_control(&self) -> Result<ControlInput<T>> {
        let i = self.best_index()?;
        self.sequences[i].first().copied().ok_or_else(|| Error::ContractViolation("empty control sequence".into()))
    }

    /// Systematic resampling, horizon shift with a fresh tail, then mutation. Returns the ancestor of each offspring.
    pub fn resample_and_shift(&mut self, cfg: &PlannerConfig<T>) -> Vec<usize> {
        self.resample(cfg, true)
    }

    /// Resample and mutate without advancing the horizon.
    pub fn resample_in_place(&mut self, cfg: &PlannerConfig<T>) -> Vec<usize> {
        self.resample(cfg, false)
    }

    fn resample(&mut self, cfg: &PlannerConfig<T>, shift: bool) -> Vec<usize> {
        let n = self.sequences.len();
        let u: f64 = self.rng.random();
        let ancestors = systematic_resample(&self.weights, n, T::lit(u));
        let mut next = Vec::with_capacity(n);
        for &a in &ancestors {
            let mut seq = self.sequences[a].clone();
            if shift {
                let tail = sample_input(&mut self.rng, &cfg.bounds);
                seq.shift(tail);
            }
            for input in seq.0.iter_mut() {
                let r: f64 = self.rng.random();
                if T::lit(r) < cfg.mutation_prob {
                    *input = sample_input(&mut self.rng, &cfg.bounds);
                } else if cfg.magnitude_sigma > T::zero() {
                    let z: f64 = StandardNormal.sample(&mut self.rng);
                    let m = input.magnitude + cfg.magnitude_sigma * T::lit(z);
                    *input = ControlInput::new(input.channel, m).clamped(&cfg.bounds);
                }
            }
            next.push(seq);
        }
        self.sequences = next;
        self.set_unscored();
        ancestors
    }

    fn set_unscored(&mut self) {
        let w = T::one() / T::from_usize_lossy(self.len());
        self.weights = vec![w; self.len()];
        self.costs = vec![T::nan(); self.len()];
        self.scored = false;
    }
}

/// Which halves of the method are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerMode {
    /// Update the belief from real measurements.
    pub belief_updates: bool,
    /// Score rollouts; otherwise every rollout keeps a uniform weight.
    pub scoring: bool,
}

impl PlannerMode {
    pub const FULL: Self = Self { belief_updates: true, scoring: true };
    pub const BAYES_ONLY: Self = Self { belief_updates: true, scoring: false };
    pub const MCMPC_ONLY: Self = Self { belief_updates: false, scoring: true };
    pub const RANDOM: Self = Self { belief_updates: false, scoring: false };
}

/// Read-only inputs of one control step.
pub struct PlanContext<'a, T: Real, D: ImageDescriptor<T>> {
    pub scene: &'a SceneModel<T>,
    /// Camera used for predicted (rollout) views.
    pub camera: &'a Camera<T>,
    pub descriptor: &'a D,
    pub goal: &'a Descriptor<T>,
    pub cost: &'a CostConfig<T>,
    /// Success threshold on the measured dissimilarity.
    pub epsilon: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome<T> {
    /// The measurement already matches the goal; nothing to execute.
    Complete { dissimilarity: T },
    Control { input: ControlInput<T>, dissimilarity: T },
}

/// The scored ensemble of the last control step, before resampling.
#[derive(Debug, Clone)]
pub struct StepTelemetry<T> {
    pub sequences: Vec<ControlSequence<T>>,
    pub weights: Vec<T>,
    pub costs: Vec<T>,
    pub best: usize,
}

/// Planner state carried across control steps: the ensemble and the belief.
#[derive(Debug, Clone)]
pub struct Planner<T> {
    cfg: PlannerConfig<T>,
    mode: PlannerMode,
    ensemble: RolloutEnsemble<T>,
    belief: GridBelief<T>,
    telemetry: Option<StepTelemetry<T>>,
}

impl<T: Real> Planner<T> {
    pub fn new(cfg: PlannerConfig<T>, mode: PlannerMode, belief: GridBelief<T>) -> Result<Self> {
        let ensemble = RolloutEnsemble::init(&cfg)?;
        Ok(Self { cfg, mode, ensemble, belief, telemetry: None })
    }

    pub fn config(&self) -> &PlannerConfig<T> {
        &self.cfg
    }

    pub fn mode(&self) -> PlannerMode {
        self.mode
    }

    pub fn ensemble(&self) -> &RolloutEnsemble<T> {
        &self.ensemble
    }

    pub fn belief(&self) -> &GridBelief<T> {
        &self.belief
    }

    pub fn telemetry(&self) -> Option<&StepTelemetry<T>> {
        self.telemetry.as_ref()
    }

    /// One iteration of the receding-horizon loop for a measurement captured at `pose`.
    pub fn plan_step<D: ImageDescriptor<T>>(
        &mut self,
        pose: &Pose<T>,
        measurement: &Image<T>,
        ctx: &PlanContext<'_, T, D>,
    ) -> Result<StepOutcome<T>> {
        let d = dissimilarity(ctx.goal, &ctx.descriptor.describe(measurement))?;
        if d < ctx.epsilon {
            return Ok(StepOutcome::Complete { dissimilarity: d });
        }
        if self.mode.belief_updates {
            self.belief.observe(pose, T::one() - d)?;
        }
        if self.mode.scoring {
            let scorer = RolloutScorer {
                scene: ctx.scene,
                camera: ctx.camera,
                descriptor: ctx.descriptor,
                goal: ctx.goal,
                belief: &self.belief,
                cfg: ctx.cost,
            };
            self.ensemble.score(pose, &scorer, &self.cfg)?;
            for _ in 0..self.cfg.refinements {
                self.ensemble.resample_in_place(&self.cfg);
                self.ensemble.score(pose, &scorer, &self.cfg)?;
            }
        } else {
            self.ensemble.set_uniform();
        }
        let best = self.ensemble.best_index()?;
        let input = self.ensemble.best_control()?;
        self.telemetry = Some(StepTelemetry {
            sequences: self.ensemble.sequences().to_vec(),
            weights: self.ensemble.weights().to_vec(),
            costs: self.ensemble.costs().to_vec(),
            best,
        });
        self.ensemble.resample_and_shift(&self.cfg);
        Ok(StepOutcome::Control { input, dissimilarity: d })
    }

    /// Fresh ensemble from the configured seed mixed with `salt`, keeping the belief.
    pub fn reinitialize(&mut self, salt: u64) -> Result<()> {
        let cfg = PlannerConfig { seed: self.cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), ..self.cfg };
        self.ensemble = RolloutEnsemble::init(&cfg)?;
        Ok(())
    }
}
