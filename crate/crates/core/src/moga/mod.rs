//! NSGA-III style many-objective GA core.
//!
//! Survival works on the merged parent and offspring population: whole
//! non-dominated fronts are admitted while they fit, and the front that
//! overflows is thinned by reference-direction niching. Objectives are
//! minimized and expected to lie in `[0, 1]`.

mod engine;
mod niching;
mod operators;
mod refs;
mod sort;

pub use engine::{evolve, knee_point, trace_to_csv, EvolveResult, GaError, Individual, Problem, TraceRow};
pub use niching::niching_select;
pub use operators::{
    flip_mutation, flip_position, order_crossover, swap_mutation, swap_positions, uniform_crossover,
};
pub use refs::{binomial, reference_points};
pub use sort::{dominates, non_dominated_sort};

use serde::{Deserialize, Serialize};

use crate::par::Execution;

/// Objective values of one chromosome, all minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Mean of the objective values; the scalar used for traces and knee
    /// selection.
    pub fn scalar(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub reference_divisions: usize,
    pub rng_seed: u64,
    pub execution: Execution,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            reference_divisions: 4,
            rng_seed: 0,
            execution: Execution::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 4 {
            return Err(GaError::Config(format!(
                "population size must be at least 4, got {}",
                self.population_size
            )));
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(GaError::Config(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        if self.reference_divisions == 0 {
            return Err(GaError::Config("reference divisions must be at least 1".into()));
        }
        Ok(())
    }
}
