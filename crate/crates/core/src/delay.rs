//! Bounded-delay refresh schedules and the aggregated stale-gradient table.
//!
//! A schedule decides which components get a fresh gradient at iteration `k`.
//! Every other component keeps the gradient it was last evaluated with, so its
//! staleness `tau_k^i = k - (iteration of last refresh)` grows by one. All
//! schedules keep `tau_k^i <= tau`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PiagError, Result};
use crate::model::{Problem, Vector};

/// Iterations between full recomputations of the incrementally updated aggregate.
pub const RECOMPUTE_EVERY: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Every component refreshed at every iteration.
    None,
    /// Refresh `block` consecutive indices (mod N) per iteration.
    Cyclic { block: usize },
    /// Random subsets; any component that would exceed `tau` is forced.
    UniformRandom { seed: u64 },
    /// Refresh a component only once its age reaches `tau`.
    AdversarialMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelaySchedule {
    pub kind: ScheduleKind,
    pub tau: usize,
}

impl DelaySchedule {
    pub fn new(kind: ScheduleKind, tau: usize) -> Self {
        Self { kind, tau }
    }

    pub fn none() -> Self {
        Self { kind: ScheduleKind::None, tau: 0 }
    }

    /// Smallest cyclic block respecting `tau` for `n` components.
    pub fn min_cyclic_block(n: usize, tau: usize) -> usize {
        n.div_ceil(tau + 1).max(1)
    }

    /// Checks the schedule against `n` components.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(PiagError::InvalidConfiguration("schedule needs at least one component".into()));
        }
        if let ScheduleKind::Cyclic { block } = self.kind {
            let need = Self::min_cyclic_block(n, self.tau);
            if block < need {
                return Err(PiagError::InvalidConfiguration(format!(
                    "cyclic block {block} cannot keep delays <= {} for N = {n}; need block >= {need}",
                    self.tau
                )));
            }
        }
        Ok(())
    }

    pub fn planner(&self, n: usize) -> Result<RefreshPlanner> {
        self.validate(n)?;
        let rng = match self.kind {
            ScheduleKind::UniformRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Ok(RefreshPlanner { schedule: *self, n, rng })
    }
}

/// Stateful realization of a [`DelaySchedule`] for a fixed number of components.
#[derive(Debug, Clone)]
pub struct RefreshPlanner {
    schedule: DelaySchedule,
    n: usize,
    rng: Option<ChaCha8Rng>,
}

impl RefreshPlanner {
    /// Ascending component indices to refresh at iteration `k`.
    ///
    /// `table` supplies the refresh stamps; the returned set guarantees that
    /// after refreshing, every age is at most `tau`.
    pub fn next_refresh_set(&mut self, k: usize, table: &GradientTable) -> Vec<usize> {
        let n = self.n;
        let tau = self.schedule.tau;
        match self.schedule.kind {
            ScheduleKind::None => (0..n).collect(),
            ScheduleKind::Cyclic { block } => {
                if block >= n {
                    return (0..n).collect();
                }
                let start = (k % n) * block % n;
                let mut set: Vec<usize> = (0..block).map(|j| (start + j) % n).collect();
                set.sort_unstable();
                set
            }
            ScheduleKind::UniformRandom { .. } => {
                let rng = self.rng.as_mut().expect("random planner owns an rng");
                let p = 1.0 / (tau as f64 + 1.0);
                (0..n)
                    .filter(|&i| {
                        // draw for every index so the stream does not depend on ages
                        let coin = rng.random::<f64>() < p;
                        coin || table.pending_age(i, k) > tau
                    })
                    .collect()
            }
            ScheduleKind::AdversarialMax => (0..n).filter(|&i| table.pending_age(i, k) > tau).collect(),
        }
    }
}

/// Free-function form of [`RefreshPlanner::next_refresh_set`].
pub fn next_refresh_set(planner: &mut RefreshPlanner, k: usize, table: &GradientTable) -> Vec<usize> {
    planner.next_refresh_set(k, table)
}

/// Per-component cached gradients and their running sum `g_k`.
///
/// All entries start at `x_0` with age zero, which is the padding `x_{-j} = x_0`.
#[derive(Debug, Clone)]
pub struct GradientTable {
    entries: Vec<Vector>,
    stamps: Vec<usize>,
    ages: Vec<usize>,
    aggregate: Vector,
    tau: usize,
    // squared norms |x_{j+1} - x_j|^2 of the last `tau` steps, oldest first
    history: VecDeque<f64>,
    last_recompute: usize,
}

impl GradientTable {
    pub fn new(problem: &Problem, x0: &Vector, tau: usize) -> Result<Self> {
        problem.check_dimension(x0)?;
        let entries: Vec<Vector> = problem.components().iter().map(|c| c.gradient(x0)).collect();
        let n = entries.len();
        let mut table = Self {
            aggregate: Vector::zeros(problem.dimension()),
            entries,
            stamps: vec![0; n],
            ages: vec![0; n],
            tau,
            history: VecDeque::with_capacity(tau + 1),
            last_recompute: 0,
        };
        table.recompute_aggregate();
        Ok(table)
    }

    /// Age entry `i` would have at iteration `k` without a refresh.
    pub fn pending_age(&self, i: usize, k: usize) -> usize {
        k.saturating_sub(self.stamps[i])
    }

    /// Refreshes the listed components at `x_k` and returns `g_k`.
    ///
    /// A full refresh recomputes the aggregate from scratch in index order, so
    /// with every component refreshed `g_k` is bitwise the full gradient.
    /// Partial refreshes update the sum incrementally.
    pub fn refresh_and_aggregate(
        &mut self,
        problem: &Problem,
        k: usize,
        x_k: &Vector,
        refresh_set: &[usize],
    ) -> Result<&Vector> {
        let n = self.entries.len();
        if let Some(&bad) = refresh_set.iter().find(|&&i| i >= n) {
            return Err(PiagError::invalid(format!("refresh index {bad} out of range for N = {n}")));
        }
        let full = refresh_set.len() == n;
        for &i in refresh_set {
            let fresh = problem.components()[i].gradient(x_k);
            if !full {
                self.aggregate -= &self.entries[i];
                self.aggregate += &fresh;
            }
            self.entries[i] = fresh;
            self.stamps[i] = k;
        }
        if full || k >= self.last_recompute + RECOMPUTE_EVERY {
            self.recompute_aggregate();
            self.last_recompute = k;
        }
        for i in 0..n {
            self.ages[i] = k - self.stamps[i];
        }
        if let Some(i) = (0..n).find(|&i| self.ages[i] > self.tau) {
            return Err(PiagError::InvalidConfiguration(format!(
                "component {i} reached age {} > tau = {} at k = {k}",
                self.ages[i], self.tau
            )));
        }
        Ok(&self.aggregate)
    }

    fn recompute_aggregate(&mut self) {
        self.aggregate.fill(0.0);
        for e in &self.entries {
            self.aggregate += e;
        }
    }

    /// Records `|x_{k+1} - x_k|^2` after step `k`.
    pub fn push_step(&mut self, step_norm_sq: f64) {
        if self.tau == 0 {
            return;
        }
        if self.history.len() == self.tau {
            self.history.pop_front();
        }
        self.history.push_back(step_norm_sq);
    }

    /// `Delta_k`: sum of the last `tau` squared step norms; steps before
    /// `x_0` count as zero.
    pub fn delta(&self) -> f64 {
        self.history.iter().sum()
    }

    pub fn max_staleness(&self) -> usize {
        self.ages.iter().copied().max().unwrap_or(0)
    }

    pub fn ages(&self) -> &[usize] {
        &self.ages
    }

    /// Iteration at which each entry was last evaluated.
    pub fn stamps(&self) -> &[usize] {
        &self.stamps
    }

    pub fn aggregate(&self) -> &Vector {
        &self.aggregate
    }

    pub fn entries(&self) -> &[Vector] {
        &self.entries
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// `|aggregate - sum entries|` with the sum recomputed in index order.
    pub fn aggregate_drift(&self) -> f64 {
        let mut sum = Vector::zeros(self.aggregate.len());
        for e in &self.entries {
            sum += e;
        }
        (&self.aggregate - sum).norm()
    }
}

/// Free-function form of [`GradientTable::max_staleness`].
pub fn max_staleness(table: &GradientTable) -> usize {
    table.max_staleness()
}
