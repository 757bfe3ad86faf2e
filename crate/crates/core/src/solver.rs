//! Barrier-aware minimization of the discrete potential energy.
//!
//! The method is limited-memory quasi-Newton descent (two-loop recursion)
//! with Armijo backtracking. Because the barrier makes the feasible set open,
//! the line search first halves the step until the minimum nodal area
//! Jacobian is positive, and only then evaluates the energy; no iterate ever
//! sees J at or below the floor. Constrained nodal values are held fixed by
//! projecting both the gradient and every search direction, so the iteration
//! moves in the discrete variation space.
//!
//! The flat natural state is a critical point of the unloaded problem, so
//! buckling studies need the optional seeded perturbation of the start
//! iterate; descent alone never leaves a critical point.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{
    min_jacobian, total_energy, total_gradient, DeformationField, EnergyTerms, ProblemSpec,
};
use crate::energy::EnergyBreakdown;
use crate::error::Error;
use crate::kinematics::J_FLOOR;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Stop when the projected gradient max-norm falls to this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Backtracking shrink factor in (0, 1).
    pub ls_shrink: f64,
    /// Armijo slope fraction in (0, 1/2).
    pub ls_armijo: f64,
    /// Quasi-Newton history length.
    pub memory: usize,
    /// Amplitude of the seeded symmetry-breaking start perturbation;
    /// zero leaves the start iterate untouched.
    pub perturbation_amplitude: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            grad_tol: 1e-8,
            max_iters: 500,
            ls_shrink: 0.5,
            ls_armijo: 1e-4,
            memory: 10,
            perturbation_amplitude: 0.0,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::config("solver.grad_tol", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("solver.max_iters", "must be positive"));
        }
        if !(self.ls_shrink > 0.0 && self.ls_shrink < 1.0) {
            return Err(Error::config("solver.ls_shrink", "must lie in (0, 1)"));
        }
        if !(self.ls_armijo > 0.0 && self.ls_armijo < 0.5) {
            return Err(Error::config("solver.ls_armijo", "must lie in (0, 1/2)"));
        }
        if self.memory == 0 {
            return Err(Error::config("solver.memory", "must be positive"));
        }
        if !(self.perturbation_amplitude >= 0.0 && self.perturbation_amplitude.is_finite()) {
            return Err(Error::config("solver.perturbation_amplitude", "must be nonnegative"));
        }
        Ok(())
    }
}

/// One accepted iterate. Row 0 is the start state with zero step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Potential energy (stored minus load work).
    pub energy: f64,
    pub membrane: f64,
    pub bending: f64,
    pub barrier: f64,
    pub load_work: f64,
    pub grad_norm: f64,
    pub min_j: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No feasible decreasing step was found even along steepest descent.
    LineSearchStalled,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub field: DeformationField,
    /// Integrated stored energy of the final iterate.
    pub energy: EnergyBreakdown,
    pub load_work: f64,
    pub potential: f64,
    /// Projected gradient max-norm at the final iterate.
    pub grad_norm: f64,
    pub min_j: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

fn dot(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
        .sum()
}

fn inf_norm(a: &[[f64; 3]]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn stepped(base: &DeformationField, t: f64, dir: &[[f64; 3]]) -> DeformationField {
    DeformationField {
        values: base
            .values
            .iter()
            .zip(dir)
            .map(|(y, d)| [y[0] + t * d[0], y[1] + t * d[1], y[2] + t * d[2]])
            .collect(),
    }
}

/// Smooth seeded perturbation, a few low sine modes per component. Vanishes
/// on the boundary; interior nodes of a clamped layer are reprojected by the
/// caller anyway.
fn perturbation(problem: &ProblemSpec, config: &SolveConfig) -> Vec<[f64; 3]> {
    let grid = &problem.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut modes = [[0.0f64; 3]; 3]; // per component: kx, ky, amplitude
    for m in modes.iter_mut() {
        m[0] = rng.random_range(1..=3) as f64;
        m[1] = rng.random_range(1..=3) as f64;
        m[2] = rng.random_range(-1.0..1.0);
    }
    let mut delta = vec![[0.0f64; 3]; grid.node_count()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.coords(i, j);
            let sx = std::f64::consts::PI * x / grid.lx;
            let sy = std::f64::consts::PI * y / grid.ly;
            for comp in 0..3 {
                let [kx, ky, a] = modes[comp];
                delta[grid.idx(i, j)][comp] =
                    config.perturbation_amplitude * a * (kx * sx).sin() * (ky * sy).sin();
            }
        }
    }
    delta
}

fn feasible(field: &DeformationField, problem: &ProblemSpec) -> bool {
    min_jacobian(field, &problem.grid).0 > J_FLOOR
}

/// Energy of a trial point, with the positivity scan run first so the
/// density is never evaluated on a folded state.
fn try_energy(field: &DeformationField, problem: &ProblemSpec) -> Option<EnergyTerms> {
    if !feasible(field, problem) {
        return None;
    }
    total_energy(field, problem).ok()
}

/// Absolute noise level of the integrated energy. The density is a
/// difference of order-one invariant combinations at every node, so the sum
/// carries rounding noise proportional to the material scale and the stored
/// pieces, not to the (possibly tiny) total. Energy comparisons below this
/// level are meaningless.
fn energy_noise(terms: &EnergyTerms, problem: &ProblemSpec) -> f64 {
    let m = &problem.material;
    let density_scale =
        problem.grid.lx * problem.grid.ly * (m.alpha + m.beta + m.c_j * (m.q + 1.0));
    1024.0
        * f64::EPSILON
        * (1.0
            + density_scale
            + terms.breakdown.membrane.abs()
            + terms.breakdown.bending.abs()
            + terms.breakdown.barrier.abs()
            + terms.load_work.abs())
}

pub fn minimize(
    initial: &DeformationField,
    problem: &ProblemSpec,
    config: &SolveConfig,
) -> Result<MinimizeResult, Error> {
    config.validate()?;
    if initial.len() != problem.grid.node_count() {
        return Err(Error::InvalidInput("start field does not match the grid".into()));
    }
    if !problem.is_projected(initial) {
        return Err(Error::InfeasibleStart(
            "start field violates the boundary constraints".into(),
        ));
    }
    let (j0, node) = min_jacobian(initial, &problem.grid);
    if j0 <= J_FLOOR {
        return Err(Error::InfeasibleStart(format!(
            "start field has min J = {j0:.3e} at node ({}, {})",
            node.0, node.1
        )));
    }

    let mut x = initial.clone();
    if config.perturbation_amplitude > 0.0 {
        let delta = perturbation(problem, config);
        let mut scale = 1.0;
        for _ in 0..60 {
            let mut trial = stepped(&x, scale, &delta);
            problem.project_field(&mut trial);
            if feasible(&trial, problem) {
                x = trial;
                break;
            }
            scale *= 0.5;
        }
    }

    let mut terms = total_energy(&x, problem)?;
    let mut grad = total_gradient(&x, problem)?;
    let mut gnorm = inf_norm(&grad);
    let mut minj = min_jacobian(&x, &problem.grid).0;

    let mut trace = Vec::new();
    let push_row = |trace: &mut Vec<TraceRow>, iter, terms: &EnergyTerms, gnorm, minj, step| {
        trace.push(TraceRow {
            iter,
            energy: terms.potential,
            membrane: terms.breakdown.membrane,
            bending: terms.breakdown.bending,
            barrier: terms.breakdown.barrier,
            load_work: terms.load_work,
            grad_norm: gnorm,
            min_j: minj,
            step,
        });
    };
    push_row(&mut trace, 0, &terms, gnorm, minj, 0.0);

    let mut history: VecDeque<(Vec<[f64; 3]>, Vec<[f64; 3]>, f64)> = VecDeque::new();
    let mut iterations = 0usize;
    let stop;
    let h_min = problem.grid.hx.min(problem.grid.hy);
    let mut retried_steepest = false;

    loop {
        if gnorm <= config.grad_tol {
            stop = StopReason::Converged;
            break;
        }
        if iterations >= config.max_iters {
            stop = StopReason::MaxIterations;
            break;
        }

        // two-loop recursion; fall back to steepest descent when the
        // history is empty or fails to produce a descent direction
        let mut d: Vec<[f64; 3]> = grad.iter().map(|g| [-g[0], -g[1], -g[2]]).collect();
        if !history.is_empty() {
            let mut q: Vec<[f64; 3]> = grad.clone();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, ygrad, rho) in history.iter().rev() {
                let a = rho * dot(s, &q);
                for (qv, yv) in q.iter_mut().zip(ygrad) {
                    for c in 0..3 {
                        qv[c] -= a * yv[c];
                    }
                }
                alphas.push(a);
            }
            let (s_last, y_last, _) = history.back().expect("nonempty");
            let gamma = dot(s_last, y_last) / dot(y_last, y_last);
            for qv in q.iter_mut() {
                for c in 0..3 {
                    qv[c] *= gamma;
                }
            }
            for ((s, ygrad, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let beta = rho * dot(ygrad, &q);
                for (qv, sv) in q.iter_mut().zip(s) {
                    for c in 0..3 {
                        qv[c] += (a - beta) * sv[c];
                    }
                }
            }
            d = q.iter().map(|v| [-v[0], -v[1], -v[2]]).collect();
        }
        let mut gd = dot(&grad, &d);
        if gd >= 0.0 {
            history.clear();
            d = grad.iter().map(|g| [-g[0], -g[1], -g[2]]).collect();
            gd = -dot(&grad, &grad);
        }

        // cautious first step while no curvature information exists
        let mut t = if history.is_empty() {
            (0.1 * h_min / inf_norm(&d).max(1e-300)).min(1.0)
        } else {
            1.0
        };

        let noise = energy_noise(&terms, problem);
        let mut accepted: Option<(DeformationField, EnergyTerms, f64, Option<Vec<[f64; 3]>>)> =
            None;
        while t >= 1e-16 {
            let trial = stepped(&x, t, &d);
            if let Some(trial_terms) = try_energy(&trial, problem) {
                // strict decrease guards against accepting a step so small
                // that the Armijo threshold rounds back to the current energy
                if trial_terms.potential <= terms.potential + config.ls_armijo * t * gd
                    && trial_terms.potential < terms.potential
                {
                    accepted = Some((trial, trial_terms, t, None));
                    break;
                }
                // once the decrease the Armijo rule asks for drops below the
                // evaluation noise, energy comparisons stop carrying
                // information; the directional derivative is still clean, so
                // accept near-exact line search points by slope flattening
                // (approximate Wolfe) as long as the energy did not rise
                if config.ls_armijo * t * gd.abs() < noise
                    && trial_terms.potential <= terms.potential
                {
                    let trial_grad = total_gradient(&trial, problem)?;
                    let slope = dot(&trial_grad, &d);
                    if slope >= 0.9 * gd && slope <= (2.0 * config.ls_armijo - 1.0) * gd {
                        accepted = Some((trial, trial_terms, t, Some(trial_grad)));
                        break;
                    }
                }
            }
            t *= config.ls_shrink;
        }

        let Some((xn, terms_n, step, grad_ready)) = accepted else {
            if !history.is_empty() && !retried_steepest {
                // curvature model stalled; retry this iteration as plain descent
                history.clear();
                retried_steepest = true;
                continue;
            }
            stop = StopReason::LineSearchStalled;
            break;
        };
        retried_steepest = false;

        let grad_n = match grad_ready {
            Some(g) => g,
            None => total_gradient(&xn, problem)?,
        };
        let s: Vec<[f64; 3]> = xn
            .values
            .iter()
            .zip(&x.values)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        let y: Vec<[f64; 3]> = grad_n
            .iter()
            .zip(&grad)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        let sy = dot(&s, &y);
        let sn = dot(&s, &s).sqrt();
        let yn = dot(&y, &y).sqrt();
        // drop rounding-level displacements: their gradient difference is
        // noise and one such pair poisons every later direction
        let significant = inf_norm(&s) > 32.0 * f64::EPSILON * (1.0 + inf_norm(&x.values));
        if significant && sy > 1e-12 * sn * yn {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        x = xn;
        terms = terms_n;
        grad = grad_n;
        gnorm = inf_norm(&grad);
        minj = min_jacobian(&x, &problem.grid).0;
        iterations += 1;
        push_row(&mut trace, iterations, &terms, gnorm, minj, step);
    }

    Ok(MinimizeResult {
        field: x,
        energy: terms.breakdown,
        load_work: terms.load_work,
        potential: terms.potential,
        grad_norm: gnorm,
        min_j: minj,
        iterations,
        converged: stop == StopReason::Converged,
        stop,
        trace,
    })
}

/// Solve a schedule of problems in order, warm-starting each step from the
/// previous minimizer reprojected onto the step's own constraints. Fails with
/// the index of the first step that does not converge; the error carries the
/// results obtained so far, the failed step's included.
pub fn continuation_sweep(
    schedule: &[ProblemSpec],
    initial: &DeformationField,
    config: &SolveConfig,
) -> Result<Vec<MinimizeResult>, Error> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("continuation schedule is empty".into()));
    }
    let mut results: Vec<MinimizeResult> = Vec::with_capacity(schedule.len());
    let mut start = initial.clone();
    for (step, problem) in schedule.iter().enumerate() {
        problem.project_field(&mut start);
        let result = minimize(&start, problem, config)?;
        start = result.field.clone();
        let converged = result.converged;
        results.push(result);
        if !converged {
            return Err(Error::SweepNotConverged {
                step,
                completed: results,
            });
        }
    }
    Ok(results)
}
