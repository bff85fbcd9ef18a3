//! Dual active-set (Goldfarb-Idnani) method for projection problems
//!
//! ```text
//! min 1/2 |z - z0|^2   s.t.   g_i . z >= h_i
//! ```
//!
//! The Hessian is the identity, so the factorization reduces to an orthogonal
//! `J` and an upper-triangular `R` with `J^T N_A = [R; 0]` for the active
//! normals `N_A`. Iterates are always dual feasible; the primal iterate
//! starts at the unconstrained minimizer `z0`. A violated row that cannot be
//! reached by any dual step proves the constraint set empty.

/// Rows must be pre-scaled to unit norm (or be exactly zero).
pub(crate) struct Projection<'a> {
    pub n: usize,
    pub z0: &'a [f64],
    /// Row-major `m x n`.
    pub g: &'a [f64],
    pub h: &'a [f64],
}

pub(crate) enum Outcome {
    Optimal {
        z: Vec<f64>,
        /// One multiplier per row.
        lambda: Vec<f64>,
        /// Active rows in the order they were added.
        active: Vec<usize>,
        iterations: usize,
    },
    /// No dual step can satisfy the row being added.
    Infeasible,
    IterationLimit {
        active: Vec<usize>,
        iterations: usize,
    },
}

const VIOLATION_TOL: f64 = 1e-12;
const DEPENDENT_TOL: f64 = 1e-24;
const STEP_TOL: f64 = 1e-13;

pub(crate) fn solve(p: &Projection<'_>, max_iter: usize) -> Outcome {
    let n = p.n;
    let m = p.h.len();
    debug_assert_eq!(p.g.len(), m * n);

    let mut z = p.z0.to_vec();
    // Column-major n x n; columns q.. span the null space of the active normals.
    let mut j = vec![0.0; n * n];
    for k in 0..n {
        j[k * n + k] = 1.0;
    }
    // Column-major n x n upper triangle, first q columns in use.
    let mut r = vec![0.0; n * n];
    let mut active: Vec<usize> = Vec::with_capacity(n);
    let mut mult: Vec<f64> = Vec::with_capacity(n);
    let mut is_active = vec![false; m];

    let mut d = vec![0.0; n];
    let mut step = vec![0.0; n];
    let mut rdir = vec![0.0; n];
    let mut iterations = 0;

    let row = |i: usize| &p.g[i * n..(i + 1) * n];
    let slack = |z: &[f64], i: usize| dot(row(i), z) - p.h[i];

    loop {
        // Most violated inactive row; ties go to the lowest index.
        let mut pick = None;
        let mut worst = 0.0;
        for i in 0..m {
            if is_active[i] {
                continue;
            }
            let s = slack(&z, i);
            if s < -VIOLATION_TOL * (1.0 + p.h[i].abs()) && s < worst {
                worst = s;
                pick = Some(i);
            }
        }
        let Some(pr) = pick else {
            let mut lambda = vec![0.0; m];
            for (&i, &u) in active.iter().zip(&mult) {
                lambda[i] = u;
            }
            return Outcome::Optimal { z, lambda, active, iterations };
        };

        let mut theta = 0.0;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Outcome::IterationLimit { active, iterations };
            }
            let q = active.len();
            let np = row(pr);
            for k in 0..n {
                d[k] = dot(&j[k * n..(k + 1) * n], np);
            }
            // Primal direction: component of n_p in the null space of the actives.
            step.iter_mut().for_each(|s| *s = 0.0);
            let mut d2 = 0.0;
            for k in q..n {
                d2 += d[k] * d[k];
                let col = &j[k * n..(k + 1) * n];
                for (s, &c) in step.iter_mut().zip(col) {
                    *s += d[k] * c;
                }
            }
            // Dual direction r = R^{-1} d[..q].
            for k in (0..q).rev() {
                let mut acc = d[k];
                for c in k + 1..q {
                    acc -= r[c * n + k] * rdir[c];
                }
                rdir[k] = acc / r[k * n + k];
            }

            let mut t1 = f64::INFINITY;
            let mut drop_at = None;
            for k in 0..q {
                if rdir[k] > STEP_TOL {
                    let t = mult[k] / rdir[k];
                    if t < t1 {
                        t1 = t;
                        drop_at = Some(k);
                    }
                }
            }
            let t2 = if d2 > DEPENDENT_TOL { -slack(&z, pr) / d2 } else { f64::INFINITY };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Outcome::Infeasible;
            }

            for k in 0..q {
                mult[k] -= t * rdir[k];
            }
            theta += t;
            if t2.is_finite() {
                for (zi, &s) in z.iter_mut().zip(&step) {
                    *zi += t * s;
                }
            }

            if t2 <= t1 {
                add_constraint(n, q, &mut j, &mut r, &mut d);
                active.push(pr);
                mult.push(theta.max(0.0));
                is_active[pr] = true;
                break;
            }
            let l = drop_at.expect("finite partial step has a blocking row");
            is_active[active[l]] = false;
            active.remove(l);
            mult.remove(l);
            drop_constraint(n, q, l, &mut j, &mut r);
        }
    }
}

/// Rotates `d = J^T n_p` so only its first `q + 1` entries are nonzero, then
/// appends them to `R` as column `q`.
fn add_constraint(n: usize, q: usize, j: &mut [f64], r: &mut [f64], d: &mut [f64]) {
    for k in (q + 1..n).rev() {
        let (a, b) = (d[k - 1], d[k]);
        if b == 0.0 {
            continue;
        }
        let h = a.hypot(b);
        let (c, s) = (a / h, b / h);
        d[k - 1] = h;
        d[k] = 0.0;
        rotate_columns(n, j, k - 1, k, c, s);
    }
    for k in 0..=q {
        r[q * n + k] = d[k];
    }
}

/// Removes column `l` of the `q`-column triangle `R` and restores its shape.
fn drop_constraint(n: usize, q: usize, l: usize, j: &mut [f64], r: &mut [f64]) {
    for c in l..q - 1 {
        for k in 0..n {
            r[c * n + k] = r[(c + 1) * n + k];
        }
    }
    for k in 0..n {
        r[(q - 1) * n + k] = 0.0;
    }
    for k in l..q - 1 {
        let (a, b) = (r[k * n + k], r[k * n + k + 1]);
        if b == 0.0 {
            continue;
        }
        let h = a.hypot(b);
        let (c, s) = (a / h, b / h);
        for col in k..q - 1 {
            let (x, y) = (r[col * n + k], r[col * n + k + 1]);
            r[col * n + k] = c * x + s * y;
            r[col * n + k + 1] = -s * x + c * y;
        }
        r[k * n + k + 1] = 0.0;
        rotate_columns(n, j, k, k + 1, c, s);
    }
}

fn rotate_columns(n: usize, j: &mut [f64], a: usize, b: usize, c: f64, s: f64) {
    for k in 0..n {
        let (x, y) = (j[a * n + k], j[b * n + k]);
        j[a * n + k] = c * x + s * y;
        j[b * n + k] = -s * x + c * y;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
