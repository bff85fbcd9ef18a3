//! KKT residuals of a returned solution, recomputed from the raw problem data.
//!
//! The solved problem is
//!
//! ```text
//! min 1/2 |u - u0|^2 + 1/2 sum_{relaxed} rho_i s_i^2
//! s.t. c_i . u + lo_i + s_i >= 0   (s_i = 0 for unrelaxed rows)
//! ```
//!
//! and every residual is measured in the identity-Hessian coordinates
//! `sigma_i = sqrt(rho_i) s_i`, with rows scaled to unit norm. That makes the
//! residuals invariant to how a caller scales a constraint. Stationarity and
//! complementarity are divided by `1 + max_i |lambda_i| |g_i|`, the size of
//! the largest term in the gradient balance. A row's shortfall is divided by
//! `|g_i| + sum_k |c_ik u_k| + |lo_i| + |s_i|`, the size of what it sums.

use serde::{Deserialize, Serialize};

use super::{QpProblem, QpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

pub fn verify(p: &QpProblem, sol: &QpSolution) -> KktReport {
    let n = p.dim;
    let u = &sol.u_star;
    let mut grad: Vec<f64> = (0..n).map(|k| u[k] - p.cost_center[k]).collect();
    let mut report = KktReport::default();
    let mut force = 0.0f64;

    for (i, row) in p.rows.iter().enumerate() {
        let lambda = sol.multipliers[i];
        let slack = sol.slacks[i];
        let rho = sol.relaxation.penalty(row.kind);

        let coef_sq: f64 = row.coef.iter().map(|c| c * c).sum();
        let norm = match rho {
            Some(rho) => (coef_sq + 1.0 / rho).sqrt(),
            None => coef_sq.sqrt(),
        };
        let norm = if norm > 0.0 { norm } else { 1.0 };
        force = force.max(lambda.abs() * norm);

        for (g, c) in grad.iter_mut().zip(&row.coef) {
            *g -= lambda * c;
        }
        match rho {
            Some(rho) => {
                let r = (rho * slack - lambda).abs() / rho.sqrt();
                report.stationarity = report.stationarity.max(r);
                report.primal = report.primal.max((-slack).max(0.0) * rho.sqrt());
            }
            None => {
                report.primal = report.primal.max(slack.abs());
            }
        }
        let value = row.value(u) + slack;
        let magnitude: f64 = row.coef.iter().zip(u).map(|(c, x)| (c * x).abs()).sum::<f64>() + row.lo.abs() + slack.abs();
        report.primal = report.primal.max((-value).max(0.0) / (norm + magnitude));
        report.dual = report.dual.max((-lambda).max(0.0) * norm);
        report.complementarity = report.complementarity.max((lambda * value).abs());
    }
    let stat_u = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    report.stationarity = report.stationarity.max(stat_u) / (1.0 + force);
    report.complementarity /= 1.0 + force;
    report
}
