//! Small dense strictly convex QPs of the form
//!
//! ```text
//! min |u - u0|^2   s.t.   c_i . u + lo_i >= 0
//! ```
//!
//! Rows are either hard or soft. Soft rows always carry a quadratic slack
//! penalty. When the hard rows conflict, [`QpSolver::solve`] falls back to the
//! least-infeasible point: every hard row is relaxed with a much stiffer
//! penalty and the result is flagged infeasible.
//!
//! Internally every variant becomes a projection problem with an identity
//! Hessian: a relaxed row `c . u + lo + s >= 0` with cost `rho s^2` is
//! rewritten with the scaled slack `sigma = sqrt(rho) s`. Rows are scaled to
//! unit norm before solving.

mod dual;
pub mod kkt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use kkt::{verify, KktReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Hard,
    Soft,
}

/// One inequality `coef . u + lo >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coef: Vec<f64>,
    pub lo: f64,
    pub kind: RowKind,
}

impl Constraint {
    pub fn hard(coef: Vec<f64>, lo: f64) -> Self {
        Self { coef, lo, kind: RowKind::Hard }
    }

    pub fn soft(coef: Vec<f64>, lo: f64) -> Self {
        Self { coef, lo, kind: RowKind::Soft }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        dual::dot(&self.coef, u) + self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpProblem {
    pub dim: usize,
    pub cost_center: Vec<f64>,
    pub rows: Vec<Constraint>,
}

impl QpProblem {
    pub fn new(cost_center: Vec<f64>) -> Self {
        Self { dim: cost_center.len(), cost_center, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Constraint) {
        self.rows.push(row);
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Input("QP dimension must be at least 1".into()));
        }
        if self.cost_center.len() != self.dim {
            return Err(Error::Input(format!(
                "cost center has {} entries for dimension {}",
                self.cost_center.len(),
                self.dim
            )));
        }
        if !self.cost_center.iter().all(|x| x.is_finite()) {
            return Err(Error::Input("non-finite cost center".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coef.len() != self.dim {
                return Err(Error::Input(format!(
                    "row {i} has {} coefficients for dimension {}",
                    row.coef.len(),
                    self.dim
                )));
            }
            if !(row.lo.is_finite() && row.coef.iter().all(|x| x.is_finite())) {
                return Err(Error::Input(format!("row {i} is not finite")));
            }
        }
        Ok(())
    }
}

/// Which rows of a solved problem carried a slack, and with what penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    /// Penalty `rho` on hard-row slacks, `None` when hard rows were enforced.
    pub hard: Option<f64>,
    pub soft: f64,
}

impl Relaxation {
    pub fn penalty(&self, kind: RowKind) -> Option<f64> {
        match kind {
            RowKind::Hard => self.hard,
            RowKind::Soft => Some(self.soft),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub u_star: Vec<f64>,
    /// Hard rows hold at `u_star` without relaxation.
    pub feasible: bool,
    /// Largest hard-row shortfall; zero when feasible.
    pub max_violation: f64,
    /// Largest soft-row shortfall.
    pub soft_violation: f64,
    /// Per-row slack `s_i`; zero for rows solved without relaxation.
    pub slacks: Vec<f64>,
    /// Per-row multipliers for the half-scaled objective
    /// `1/2 |u - u0|^2 + 1/2 sum rho_i s_i^2`.
    pub multipliers: Vec<f64>,
    pub active_set: Vec<usize>,
    pub kkt_residual: f64,
    pub relaxation: Relaxation,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpSolver {
    /// Slack penalty for hard rows in the least-infeasible fallback.
    pub hard_penalty: f64,
    /// Slack penalty for soft rows.
    pub soft_penalty: f64,
    /// Iteration cap per row of the solved problem.
    pub iterations_per_row: usize,
}

impl Default for QpSolver {
    fn default() -> Self {
        Self { hard_penalty: 1e6, soft_penalty: 1e4, iterations_per_row: 100 }
    }
}

impl QpSolver {
    /// Minimizes `|u - u0|^2` plus the soft-row penalty subject to the hard
    /// rows; falls back to [`QpSolver::solve_relaxed`] when they conflict.
    pub fn solve(&self, p: &QpProblem) -> Result<QpSolution> {
        p.validate()?;
        let relax = Relaxation { hard: None, soft: self.soft_penalty };
        match self.run(p, relax)? {
            Some(sol) => Ok(sol),
            None => self.solve_relaxed(p),
        }
    }

    /// Least-infeasible solve: every row carries a slack, hard rows with
    /// `hard_penalty`. Always has a solution.
    pub fn solve_relaxed(&self, p: &QpProblem) -> Result<QpSolution> {
        p.validate()?;
        let relax = Relaxation { hard: Some(self.hard_penalty), soft: self.soft_penalty };
        let mut sol = self
            .run(p, relax)?
            .ok_or_else(|| Error::Input("relaxed QP reported infeasible".into()))?;
        sol.feasible = false;
        Ok(sol)
    }

    /// `Ok(None)` means the unrelaxed rows are infeasible.
    fn run(&self, p: &QpProblem, relax: Relaxation) -> Result<Option<QpSolution>> {
        let n = p.dim;
        let m = p.rows.len();
        let weights: Vec<Option<f64>> = p.rows.iter().map(|r| relax.penalty(r.kind)).collect();
        let slack_of: Vec<Option<usize>> = weights
            .iter()
            .scan(0, |next, w| {
                Some(w.map(|_| {
                    *next += 1;
                    n + *next - 1
                }))
            })
            .collect();
        let ext = n + weights.iter().filter(|w| w.is_some()).count();

        let mut z0 = vec![0.0; ext];
        z0[..n].copy_from_slice(&p.cost_center);
        let mut g = vec![0.0; m * ext];
        let mut h = vec![0.0; m];
        let mut scale = vec![1.0; m];
        for (i, row) in p.rows.iter().enumerate() {
            let gi = &mut g[i * ext..(i + 1) * ext];
            gi[..n].copy_from_slice(&row.coef);
            if let (Some(rho), Some(k)) = (weights[i], slack_of[i]) {
                gi[k] = 1.0 / rho.sqrt();
            }
            let norm = dual::dot(gi, gi).sqrt();
            h[i] = -row.lo;
            if norm > 0.0 {
                gi.iter_mut().for_each(|x| *x /= norm);
                h[i] /= norm;
                scale[i] = norm;
            }
        }

        let projection = dual::Projection { n: ext, z0: &z0, g: &g, h: &h };
        let max_iter = self.iterations_per_row * m.max(1);
        let (z, lambda, active, iterations) = match dual::solve(&projection, max_iter) {
            dual::Outcome::Optimal { z, lambda, active, iterations } => (z, lambda, active, iterations),
            dual::Outcome::Infeasible => return Ok(None),
            dual::Outcome::IterationLimit { active, iterations } => {
                return Err(Error::SolverFailure { iterations, dim: n, rows: m, active_set: active })
            }
        };

        let u_star = z[..n].to_vec();
        let mut slacks = vec![0.0; m];
        let mut multipliers = vec![0.0; m];
        for i in 0..m {
            multipliers[i] = lambda[i] / scale[i];
            // s = lambda / rho at the optimum; exact zero for inactive rows
            if let Some(rho) = weights[i] {
                slacks[i] = multipliers[i] / rho;
            }
        }
        let mut active_set = active;
        active_set.sort_unstable();

        let (mut max_violation, mut soft_violation) = (0.0f64, 0.0f64);
        for row in &p.rows {
            let short = (-row.value(&u_star)).max(0.0);
            match row.kind {
                RowKind::Hard => max_violation = max_violation.max(short),
                RowKind::Soft => soft_violation = soft_violation.max(short),
            }
        }
        let mut sol = QpSolution {
            u_star,
            feasible: relax.hard.is_none(),
            max_violation: if relax.hard.is_none() { 0.0 } else { max_violation },
            soft_violation,
            slacks,
            multipliers,
            active_set,
            kkt_residual: 0.0,
            relaxation: relax,
            iterations,
        };
        sol.kkt_residual = kkt::verify(p, &sol).max();
        Ok(Some(sol))
    }
}
