//! Reference implementations shared by the integration tests. None of this
//! code calls into the solver or the closed-form gains it checks.
#![allow(dead_code)]

use cbf_swarm::barrier::diagnostics;
use cbf_swarm::policies::pairs;
use cbf_swarm::qp::{Constraint, QpProblem, RowKind};
use cbf_swarm::{AgentState, ScenarioConfig, Vec2, WorldState};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HARD_PENALTY: f64 = 1e6;
pub const SOFT_PENALTY: f64 = 1e4;

/// Minimizer of `|u - u0|^2 + sum rho_i s_i^2` over rows `c_i . u + lo_i + s_i >= 0`,
/// found by trying every active set. `hard` is the slack penalty for hard
/// rows; `None` enforces them exactly. Every active set whose KKT point
/// passes is a candidate and the cheapest wins, which guards against
/// accepting a near-degenerate set within tolerance. Returns `None` when no
/// active set passes, i.e. the exact problem is infeasible.
pub fn enumerate(p: &QpProblem, hard: Option<f64>, soft: f64) -> Option<Vec<f64>> {
    const TOL: f64 = 1e-10;
    let n = p.dim;
    let m = p.rows.len();
    let rho: Vec<Option<f64>> = p
        .rows
        .iter()
        .map(|r| match r.kind {
            RowKind::Hard => hard,
            RowKind::Soft => Some(soft),
        })
        .collect();
    let rank_bound = n + rho.iter().filter(|r| r.is_some()).count();
    let u0 = DVector::from_column_slice(&p.cost_center);
    // unit-norm rows; a relaxed row's penalty rescales with its slack
    let mut coef = Vec::with_capacity(m);
    let mut lo = Vec::with_capacity(m);
    let mut inv_rho = Vec::with_capacity(m);
    for (row, r) in p.rows.iter().zip(&rho) {
        let c = DVector::from_column_slice(&row.coef);
        let norm = c.norm();
        let a = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        coef.push(c * a);
        lo.push(row.lo * a);
        inv_rho.push(r.map_or(0.0, |r| a * a / r));
    }

    let cost = |u: &DVector<f64>| -> f64 {
        let mut j = (u - &u0).norm_squared();
        for i in 0..m {
            let short = (-(coef[i].dot(u) + lo[i])).max(0.0);
            if inv_rho[i] > 0.0 {
                j += short * short / inv_rho[i];
            }
        }
        j
    };
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        if k > rank_bound {
            continue;
        }
        // [I  -C_A^T; C_A  D_A] [u; lambda] = [u0; -lo_A]
        let dim = n + k;
        let mut mat = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        for r in 0..n {
            mat[(r, r)] = 1.0;
            rhs[r] = u0[r];
        }
        for (a, &i) in idx.iter().enumerate() {
            for r in 0..n {
                mat[(r, n + a)] = -coef[i][r];
                mat[(n + a, r)] = coef[i][r];
            }
            mat[(n + a, n + a)] = inv_rho[i];
            rhs[n + a] = -lo[i];
        }
        // nalgebra's SVD loses digits on these saddle-point systems, so it
        // only screens for singularity; full-pivot LU does the solve
        let sv = mat.clone().singular_values();
        if sv.min() <= 1e-14 * sv.max() {
            continue;
        }
        let lu = mat.clone().full_piv_lu();
        let Some(mut sol) = lu.solve(&rhs) else { continue };
        for _ in 0..3 {
            let resid = &rhs - &mat * &sol;
            sol += lu.solve(&resid).expect("same factorization");
        }
        if sol.rows(n, k).iter().any(|&l| l < -TOL) {
            continue;
        }
        let u = sol.rows(0, n).into_owned();
        let primal_ok = (0..m).all(|i| {
            if idx.contains(&i) {
                return true;
            }
            coef[i].dot(&u) + lo[i] >= -TOL * (1.0 + lo[i].abs() + u.norm())
        });
        if primal_ok {
            let j = cost(&u);
            if best.as_ref().is_none_or(|(b, _)| j < *b) {
                best = Some((j, u));
            }
        }
    }
    best.map(|(_, u)| u.iter().copied().collect())
}

/// The exact solution when the hard rows admit one, else the relaxed one.
pub fn oracle_solve(p: &QpProblem) -> (Vec<f64>, bool) {
    match enumerate(p, None, SOFT_PENALTY) {
        Some(u) => (u, true),
        None => (
            enumerate(p, Some(HARD_PENALTY), SOFT_PENALTY).expect("relaxed problem always has a minimizer"),
            false,
        ),
    }
}

/// A random QP. Some draws contain an opposed pair of hard rows whose
/// offsets cannot both hold, so roughly a third are infeasible.
pub fn random_qp(rng: &mut ChaCha8Rng, max_dim: usize, max_rows: usize) -> QpProblem {
    let n = rng.random_range(1..=max_dim);
    let m = rng.random_range(0..=max_rows);
    let mut p = QpProblem::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let scale = 10f64.powf(rng.random_range(-0.5..0.5));
        (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
    };
    let conflict = m >= 2 && rng.random_bool(0.35);
    for i in 0..m {
        if conflict && i == 1 {
            // opposite normal with an offset that leaves no room
            let c: Vec<f64> = p.rows[0].coef.iter().map(|x| -x).collect();
            let lo = -p.rows[0].lo - rng.random_range(0.1..2.0);
            p.push(Constraint::hard(c, lo));
            continue;
        }
        let c = row(rng);
        let lo = rng.random_range(-2.0..1.0);
        let hard = (conflict && i == 0) || rng.random_bool(0.7);
        p.push(if hard { Constraint::hard(c, lo) } else { Constraint::soft(c, lo) });
    }
    p
}

/// `max |a - b| / (1 + max |b|)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b) / (1.0 + b.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Stabilizing solution of `A^T P + P A - P B R^-1 B^T P + Q = 0` by
/// Newton-Kleinman iteration, each Lyapunov step solved through its
/// Kronecker form.
pub fn kleinman(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, k0: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let r_inv = r.clone().try_inverse().expect("R invertible");
    let eye = DMatrix::<f64>::identity(n, n);
    let mut k = k0;
    let mut p = DMatrix::zeros(n, n);
    for _ in 0..100 {
        let ak = a - b * &k;
        let qk = q + k.transpose() * r * &k;
        let lyap = eye.kronecker(&ak.transpose()) + ak.transpose().kronecker(&eye);
        let rhs = -DVector::from_column_slice(qk.as_slice());
        let vec_p = lyap.lu().solve(&rhs).expect("closed loop is stable");
        let next = DMatrix::from_column_slice(n, n, vec_p.as_slice());
        let next = (&next + next.transpose()) * 0.5;
        let done = (&next - &p).abs().max() < 1e-15 * next.abs().max().max(1.0);
        p = next;
        k = &r_inv * b.transpose() * &p;
        if done {
            break;
        }
    }
    p
}

pub fn care_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let r_inv = r.clone().try_inverse().expect("R invertible");
    (a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q).abs().max()
}

/// Double integrator in the plane with state `(x, y, vx, vy)`.
pub fn planar_double_integrator() -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    let mut b = DMatrix::zeros(4, 2);
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    (a, b)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random world of `n` agents inside the admissible set of every pair.
/// Velocities are drawn freely and then shrunk until each pair satisfies
/// `h >= -hdot / lambda1`; about one draw in four is pushed to within a hair
/// of that boundary.
pub fn random_cstar_world(rng: &mut ChaCha8Rng, n: usize, cfg: &ScenarioConfig) -> WorldState {
    let r_sq = cfg.barrier_radius_sq();
    let lambda1 = cfg.lambda1();
    let spread = 2.0 * r_sq.sqrt() + 3.0 * n as f64;
    let pos = loop {
        let pos: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread)))
            .collect();
        if pairs(n).all(|(i, j)| (pos[i] - pos[j]).norm_sq() > r_sq) {
            break pos;
        }
    };
    let speed = rng.random_range(0.0..6.0);
    let vel: Vec<Vec2> = (0..n)
        .map(|_| Vec2::new(speed * rng.random_range(-1.0..1.0), speed * rng.random_range(-1.0..1.0)))
        .collect();
    // largest uniform velocity scale that keeps every pair admissible
    let mut scale: f64 = 1.0;
    for (i, j) in pairs(n) {
        let xi = pos[i] - pos[j];
        let hdot = 2.0 * xi.dot(vel[i] - vel[j]);
        if hdot < 0.0 {
            scale = scale.min(lambda1 * (xi.norm_sq() - r_sq) / -hdot);
        }
    }
    let shrink = if rng.random_bool(0.25) { 1.0 - 1e-7 } else { rng.random_range(0.0..1.0) };
    let s = scale * shrink;
    let world = WorldState {
        agents: pos.iter().zip(&vel).map(|(&p, &v)| AgentState { pos: p, vel: v * s }).collect(),
        time: 0.0,
        step_index: 0,
    };
    debug_assert!(in_cstar(&world, cfg));
    world
}

pub fn in_cstar(world: &WorldState, cfg: &ScenarioConfig) -> bool {
    pairs(world.len()).all(|(i, j)| {
        let (xi, v) = world.relative_state(i, j).unwrap();
        diagnostics(xi, v, cfg.barrier_radius_sq(), cfg.r0, cfg.lambda1()).in_cstar
    })
}

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec2 {
    Vec2::new(scale * rng.random_range(-1.0..1.0), scale * rng.random_range(-1.0..1.0))
}
