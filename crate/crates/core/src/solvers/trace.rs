use std::time::Duration;

use crate::scalar::Real;

/// Per-iteration record of a solve.
#[derive(Debug, Clone, Default)]
pub struct SolverTrace<T: Real> {
    /// Objective after each outer iteration.
    pub objective: Vec<T>,
    /// NMSE against the configured reference after each iteration (empty without one).
    pub nmse: Vec<T>,
    /// Accepted step size of each iteration.
    pub step_sizes: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Step size and shrinkage constants resolved for this run.
    pub initial_step: T,
    pub aux_c: Option<T>,
    /// Set when the run stopped early because no acceptable step existed.
    pub failure: Option<String>,
    pub wall_time: Duration,
}

/// Equality over the numerical content; wall time is ignored.
impl<T: Real> PartialEq for SolverTrace<T> {
    fn eq(&self, other: &Self) -> bool {
        self.objective == other.objective
            && self.nmse == other.nmse
            && self.step_sizes == other.step_sizes
            && self.iterations == other.iterations
            && self.converged == other.converged
            && self.initial_step == other.initial_step
            && self.aux_c == other.aux_c
            && self.failure == other.failure
    }
}

impl<T: Real> SolverTrace<T> {
    pub fn final_objective(&self) -> Option<T> {
        self.objective.last().copied()
    }

    /// First iteration (1-based) whose objective is at most `target`.
    pub fn iterations_to_reach(&self, target: T) -> Option<usize> {
        self.objective.iter().position(|&f| f <= target).map(|i| i + 1)
    }
}
