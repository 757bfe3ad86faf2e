//! Acceptance suite. Each test covers one numbered criterion, prints a single
//! `criterion N (...): pass|FAIL [...]` line with the measured quantities and
//! asserts it. Tolerances are pinned as constants next to the criteria that
//! use them.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use velum::analysis::{eta_estimate, h_inverse, residual_suite, weak_residual, BasisSpec};
use velum::discretization::{
    divergence_identity_check, evaluate_kinematics, min_jacobian, total_energy, total_gradient,
    BoundarySpec, DeformationField, Edge, EdgeTag, Grid2D, LoadSpec, ProblemSpec,
};
use velum::energy::{hypothesis_check, MaterialParams, Status};
use velum::kinematics::{evaluate, gaussian_from_minors, Tensor32};
use velum::sampling;
use velum::solver::{minimize, MinimizeResult, SolveConfig, StopReason};

// Criterion 1: assembled gradient vs central finite differences.
const FD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-6;
const GRAD_TIME_LIMIT: Duration = Duration::from_secs(10);

// Criterion 2: unloaded natural state.
const NATURAL_ENERGY_TOL: f64 = 1e-8;
const NATURAL_GRAD_TOL: f64 = 1e-10;
const NATURAL_J_TOL: f64 = 1e-12;
const NATURAL_TIME_LIMIT: Duration = Duration::from_secs(1);

// Criterion 3: frame indifference.
const OBJECTIVITY_SAMPLE_TOL: f64 = 1e-12;
const OBJECTIVITY_ENERGY_TOL: f64 = 1e-10;

// Criterion 4: minor identities and curvature recovery.
const MINOR_REL_TOL: f64 = 1e-10;
const EXACT_RECOVERY_TOL: f64 = 1e-12;
const MIN_ORDER: f64 = 1.9;

// Criterion 5 shares MIN_ORDER.

// Criterion 6: weak-form residuals after a converged solve.
const RESIDUAL_TOL: f64 = 1e-7;
const CONSISTENCY_REL_TOL: f64 = 1e-11;

// Criterion 7: Jacobian lower-bound surrogate.
const ETA_INVERSE_ABS_TOL: f64 = 1e-9;
const ETA_SAFETY: f64 = 0.99;

// Criterion 9: buckling energy comparison.
const BUCKLING_TIME_TARGET: Duration = Duration::from_secs(120);

fn verdict(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} ({name}): {} [{detail}]",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn clamped_flat(n: usize, body_force: Option<[f64; 3]>) -> ProblemSpec {
    let grid = Grid2D::new(n, n, 1.0, 1.0).unwrap();
    let material = MaterialParams {
        c_b: 0.05,
        ..MaterialParams::default()
    };
    let boundary = BoundarySpec {
        south: EdgeTag::Clamped,
        east: EdgeTag::Clamped,
        north: EdgeTag::Clamped,
        west: EdgeTag::Clamped,
        f_o: DeformationField::identity(&grid),
    };
    let mut loads = LoadSpec::none();
    if let Some(b) = body_force {
        loads.body_force = Some(vec![b; grid.node_count()]);
    }
    ProblemSpec::new(grid, material, boundary, loads).unwrap()
}

/// Mixed problem exercising every load path: body force, generalized body
/// force, and traction plus hypertraction on both free edges. Soft bending
/// and barrier weights keep the third derivative of the energy small along
/// test directions, which the finite-difference reference needs; the loads
/// are strong so directional derivatives stay well away from zero.
fn mixed_loaded(n: usize) -> ProblemSpec {
    let grid = Grid2D::new(n, n, 1.0, 1.0).unwrap();
    let material = MaterialParams {
        c_b: 1e-4,
        c_j: 0.1,
        ..MaterialParams::default()
    };
    let boundary = BoundarySpec {
        south: EdgeTag::Clamped,
        east: EdgeTag::Free,
        north: EdgeTag::Clamped,
        west: EdgeTag::Free,
        f_o: DeformationField::identity(&grid),
    };
    let mut loads = LoadSpec::none();
    loads.body_force = Some(vec![[0.3, -0.6, -0.9]; grid.node_count()]);
    loads.body_couple = Some(vec![
        Tensor32([[0.12, -0.06], [0.03, 0.09], [0.06, 0.15]]);
        grid.node_count()
    ]);
    loads.traction[Edge::East.index()] = Some(vec![[0.6, 0.0, 0.3]; grid.ny]);
    loads.hypertraction[Edge::East.index()] = Some(vec![[0.0, 0.3, -0.6]; grid.ny]);
    loads.traction[Edge::West.index()] = Some(vec![[-0.3, 0.15, 0.0]; grid.ny]);
    ProblemSpec::new(grid, material, boundary, loads).unwrap()
}

/// Superposition of low sine modes with random coefficients and phases plus
/// bounded nodal noise, one draw per component. Discrete second derivatives
/// stay O(1) on the coarse acceptance grids, unlike pure nodal noise.
fn random_waves(
    grid: &Grid2D,
    rng: &mut ChaCha8Rng,
    wave_amp: f64,
    noise_amp: f64,
    max_mode: u32,
) -> Vec<[f64; 3]> {
    let mut modes = [[[0.0f64; 5]; 2]; 3];
    for comp in modes.iter_mut() {
        for m in comp.iter_mut() {
            *m = [
                rng.random_range(-wave_amp..wave_amp),
                rng.random_range(1..=max_mode) as f64,
                rng.random_range(1..=max_mode) as f64,
                rng.random_range(0.0..TAU),
                rng.random_range(0.0..TAU),
            ];
        }
    }
    let mut out = vec![[0.0f64; 3]; grid.node_count()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.coords(i, j);
            let v = &mut out[grid.idx(i, j)];
            for (c, comp) in modes.iter().enumerate() {
                for [a, kx, ky, px, py] in comp {
                    v[c] += a * (kx * PI * x + px).sin() * (ky * PI * y + py).sin();
                }
                v[c] += rng.random_range(-noise_amp..noise_amp);
            }
        }
    }
    out
}

/// Identity plus bounded nodal noise; feasible with a wide margin.
fn noisy_field(grid: &Grid2D, rng: &mut ChaCha8Rng, amp: f64) -> DeformationField {
    let mut field = DeformationField::identity(grid);
    for v in &mut field.values {
        for c in v.iter_mut() {
            *c += rng.random_range(-amp..amp);
        }
    }
    assert!(min_jacobian(&field, grid).0 > 0.3, "test field lost feasibility");
    field
}

fn dot_nodes(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
        .sum()
}

fn fabricate(field: DeformationField, problem: &ProblemSpec) -> MinimizeResult {
    let terms = total_energy(&field, problem).unwrap();
    let min_j = min_jacobian(&field, &problem.grid).0;
    MinimizeResult {
        field,
        energy: terms.breakdown,
        load_work: terms.load_work,
        potential: terms.potential,
        grad_norm: f64::NAN,
        min_j,
        iterations: 0,
        converged: true,
        stop: StopReason::Converged,
        trace: Vec::new(),
    }
}

#[test]
fn criterion_1_gradient_consistency() {
    let start = Instant::now();
    let problem = mixed_loaded(9);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        // Gentle random states keep the cumulative third derivative of the
        // quartic terms small, so the pinned central-difference step stays
        // well inside its truncation budget.
        let mut field = DeformationField::identity(&problem.grid);
        for (v, d) in field
            .values
            .iter_mut()
            .zip(random_waves(&problem.grid, &mut rng, 0.005, 0.0002, 2))
        {
            for c in 0..3 {
                v[c] += d[c];
            }
        }
        problem.project_field(&mut field);
        assert!(
            min_jacobian(&field, &problem.grid).0 > 0.5,
            "test field lost feasibility"
        );
        let grad = total_gradient(&field, &problem).unwrap();
        let (mut kept, mut draws) = (0usize, 0usize);
        while kept < 20 {
            draws += 1;
            assert!(draws <= 200, "direction sampling stalled");
            // Smooth random directions keep the central-difference reference
            // accurate at the pinned step; the nodal noise makes every free
            // gradient entry participate. The assembled gradient zeroes
            // constrained entries, so the directions must be admissible
            // variations.
            let mut dir = random_waves(&problem.grid, &mut rng, 1.0, 0.005, 1);
            problem.project_variation(&mut dir);
            let scale = dir
                .iter()
                .flat_map(|d| d.iter())
                .fold(0.0f64, |m, c| m.max(c.abs()));
            for d in &mut dir {
                for c in d.iter_mut() {
                    *c /= scale;
                }
            }
            let eval = |t: f64| {
                let mut shifted = field.clone();
                for (v, d) in shifted.values.iter_mut().zip(&dir) {
                    for c in 0..3 {
                        v[c] += t * d[c];
                    }
                }
                total_energy(&shifted, &problem).unwrap().potential
            };
            let fd = (eval(FD_STEP) - eval(-FD_STEP)) / (2.0 * FD_STEP);
            if fd.abs() < 0.05 {
                // A relative comparison needs a well-resolved denominator;
                // redraw directions nearly orthogonal to the gradient. The
                // decision uses the difference reference, never the assembled
                // value under test.
                continue;
            }
            kept += 1;
            let assembled = dot_nodes(&grad, &dir);
            worst = worst.max((assembled - fd).abs() / fd.abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= GRAD_REL_TOL && elapsed < GRAD_TIME_LIMIT;
    verdict(
        1,
        "gradient consistency",
        pass,
        &format!(
            "max relative error {worst:.3e} over 3 fields x 20 directions, tol {GRAD_REL_TOL:.0e}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_2_natural_state() {
    let start = Instant::now();
    let problem = clamped_flat(17, None);
    let result = minimize(
        &DeformationField::identity(&problem.grid),
        &problem,
        &SolveConfig::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = result.converged
        && result.energy.total <= NATURAL_ENERGY_TOL
        && result.grad_norm <= NATURAL_GRAD_TOL
        && (result.min_j - 1.0).abs() <= NATURAL_J_TOL
        && elapsed < NATURAL_TIME_LIMIT;
    verdict(
        2,
        "natural state",
        pass,
        &format!(
            "energy {:.3e} (tol {NATURAL_ENERGY_TOL:.0e}), grad {:.3e} (tol {NATURAL_GRAD_TOL:.0e}), |min J - 1| {:.3e} (tol {NATURAL_J_TOL:.0e}), {elapsed:.2?}",
            result.energy.total,
            result.grad_norm,
            (result.min_j - 1.0).abs(),
        ),
    );
}

#[test]
fn criterion_3_objectivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let params = MaterialParams::default();
    let report = velum::energy::objectivity_check(&params, 1000, &mut rng).unwrap();

    // Discrete energy invariance under a rigid rotation of the nodal values.
    let problem = clamped_flat(9, None);
    let mut worst_energy_dev = 0.0f64;
    for _ in 0..3 {
        let field = noisy_field(&problem.grid, &mut rng, 0.02);
        let q = sampling::random_rotation(&mut rng);
        let rotated = DeformationField {
            values: field
                .values
                .iter()
                .map(|v| {
                    let mut out = [0.0f64; 3];
                    for i in 0..3 {
                        out[i] = q[i][0] * v[0] + q[i][1] * v[1] + q[i][2] * v[2];
                    }
                    out
                })
                .collect(),
        };
        let e = total_energy(&field, &problem).unwrap().breakdown.total;
        let e_rot = total_energy(&rotated, &problem).unwrap().breakdown.total;
        worst_energy_dev = worst_energy_dev.max((e - e_rot).abs());
    }

    let pass = report.max_relative_deviation <= OBJECTIVITY_SAMPLE_TOL
        && worst_energy_dev <= OBJECTIVITY_ENERGY_TOL;
    verdict(
        3,
        "objectivity",
        pass,
        &format!(
            "density deviation {:.3e} over 1000 samples (tol {OBJECTIVITY_SAMPLE_TOL:.0e}), energy deviation {worst_energy_dev:.3e} over 3 rotated fields (tol {OBJECTIVITY_ENERGY_TOL:.0e})",
            report.max_relative_deviation,
        ),
    );
}

/// Analytic curvature of the Monge patch z = h(x, y) from its derivatives:
/// K_ab = h_ab / W with W = sqrt(1 + hx^2 + hy^2), kappa = det(hess h) / W^4.
struct Patch {
    field: fn(f64, f64) -> [f64; 3],
    k22: fn(f64, f64) -> f64,
    kappa: fn(f64, f64) -> f64,
}

#[test]
fn criterion_4_minor_identities_and_curvature_recovery() {
    // Pointwise identity: Gaussian curvature reassembled from the fifteen
    // minors equals det K / J^2 on random states.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst_rel = 0.0f64;
    for _ in 0..1000 {
        let (g, f) = sampling::random_state(&mut rng, 0.1, 3.0, 3.0);
        let state = evaluate(&f, &g);
        let surface = state.surface.expect("J >= 0.1 is above the floor");
        let from_minors = gaussian_from_minors(&surface.normal, &state.minors, state.j).unwrap();
        worst_rel = worst_rel
            .max((from_minors - surface.kappa).abs() / (1.0 + surface.kappa.abs()));
    }

    // Curvature recovery on analytic patches over grids 17/33/65. Quadratic
    // patches are reproduced exactly by the stencils, so the paraboloid
    // checks exactness while the cylinder (K_22) and a sphere cap (kappa)
    // provide measurable second-order convergence.
    let paraboloid = Patch {
        field: |x, y| [x, y, 0.4 * x * x + 0.25 * y * y],
        k22: |x, y| {
            let (hx, hy) = (0.8 * x, 0.5 * y);
            0.5 / (1.0 + hx * hx + hy * hy).sqrt()
        },
        kappa: |x, y| {
            let (hx, hy) = (0.8 * x, 0.5 * y);
            0.8 * 0.5 / (1.0 + hx * hx + hy * hy).powi(2)
        },
    };
    let cylinder = Patch {
        field: |x, y| [x, 0.8 * (y / 0.8).sin(), 0.8 * (y / 0.8).cos()],
        k22: |_, _| -1.0 / 0.8,
        kappa: |_, _| 0.0,
    };
    let sphere = Patch {
        field: |x, y| {
            let (u, v) = (x - 0.5, y - 0.5);
            [x, y, (4.0 - u * u - v * v).sqrt()]
        },
        k22: |x, y| {
            // h = sqrt(R^2 - u^2 - v^2): h_22 = -(R^2 - u^2) / h^3.
            let (u, v) = (x - 0.5, y - 0.5);
            let h2 = 4.0 - u * u - v * v;
            let w2 = 1.0 + (u * u + v * v) / h2;
            -((4.0 - u * u) / h2.powf(1.5)) / w2.sqrt()
        },
        kappa: |_, _| 0.25,
    };

    let errors = |patch: &Patch| -> Vec<(f64, f64)> {
        [17usize, 33, 65]
            .iter()
            .map(|&n| {
                let grid = Grid2D::new(n, n, 1.0, 1.0).unwrap();
                let field = DeformationField::from_fn(&grid, patch.field);
                let center = grid.idx(n / 2, n / 2);
                let (x, y) = grid.coords(n / 2, n / 2);
                let state = &evaluate_kinematics(&field, &grid)[center];
                let surface = state.surface.as_ref().expect("patch is non-degenerate");
                (
                    (surface.curvature.a22 - (patch.k22)(x, y)).abs(),
                    (surface.kappa - (patch.kappa)(x, y)).abs(),
                )
            })
            .collect()
    };
    let order = |e: &[f64]| -> f64 {
        e.windows(2)
            .map(|w| (w[0] / w[1]).log2())
            .fold(f64::INFINITY, f64::min)
    };

    let para = errors(&paraboloid);
    let para_exact = para.iter().all(|(ek, eg)| *ek <= EXACT_RECOVERY_TOL && *eg <= EXACT_RECOVERY_TOL);

    let cyl = errors(&cylinder);
    let cyl_k: Vec<f64> = cyl.iter().map(|(ek, _)| *ek).collect();
    let cyl_k_order = order(&cyl_k);
    let cyl_kappa_exact = cyl.iter().all(|(_, eg)| *eg <= EXACT_RECOVERY_TOL);

    let sph = errors(&sphere);
    let sph_kappa: Vec<f64> = sph.iter().map(|(_, eg)| *eg).collect();
    let sph_kappa_order = order(&sph_kappa);

    let pass = worst_rel <= MINOR_REL_TOL
        && para_exact
        && cyl_k_order >= MIN_ORDER
        && cyl_kappa_exact
        && sph_kappa_order >= MIN_ORDER;
    verdict(
        4,
        "minor identities and curvature recovery",
        pass,
        &format!(
            "minor identity rel {worst_rel:.3e} on 1000 states (tol {MINOR_REL_TOL:.0e}); paraboloid exact to {EXACT_RECOVERY_TOL:.0e}: {para_exact}; cylinder K22 order {cyl_k_order:.2}, kappa exact: {cyl_kappa_exact}; sphere kappa order {sph_kappa_order:.2} (min {MIN_ORDER})"
        ),
    );
}

#[test]
fn criterion_5_divergence_identity_order() {
    // Cubic-vanishing cutoff keeps the boundary term of the discrete
    // integration by parts at the quadrature error.
    let phi_fun = |x: f64, y: f64| (x * (1.0 - x) * y * (1.0 - y)).powi(3) * 600.0;

    // Pair built from first partials of a smooth deformation: w = (df2/dx,
    // df3/dx) for f2 = 0.2 sin(pi x) cos(pi y) + 0.15 x^2 y and
    // f3 = 0.3 cos(pi x) sin(pi y) + 0.1 x y^2. The polynomial parts break
    // the mirror symmetry that would otherwise make both integrals vanish
    // identically.
    let from_partials = |x: f64, y: f64| -> [f64; 2] {
        use std::f64::consts::PI;
        [
            0.2 * PI * (PI * x).cos() * (PI * y).cos() + 0.3 * x * y,
            -0.3 * PI * (PI * x).sin() * (PI * y).sin() + 0.1 * y * y,
        ]
    };
    let generic = |x: f64, y: f64| -> [f64; 2] {
        use std::f64::consts::PI;
        [(PI * x).sin() * (PI * y).cos() + x * x, x * y * y + (PI * x).cos()]
    };

    let mut detail = String::new();
    let mut pass = true;
    for (name, w_fun) in [
        ("derivative pair", from_partials as fn(f64, f64) -> [f64; 2]),
        ("generic pair", generic),
    ] {
        let errors: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&n| {
                let grid = Grid2D::new(n, n, 1.0, 1.0).unwrap();
                let mut w = Vec::with_capacity(grid.node_count());
                let mut phi = Vec::with_capacity(grid.node_count());
                for j in 0..n {
                    for i in 0..n {
                        let (x, y) = grid.coords(i, j);
                        w.push(w_fun(x, y));
                        phi.push(phi_fun(x, y));
                    }
                }
                let (lhs, rhs) = divergence_identity_check(&w, &phi, &grid);
                (lhs - rhs).abs()
            })
            .collect();
        let order = errors
            .windows(2)
            .map(|p| (p[0] / p[1]).log2())
            .fold(f64::INFINITY, f64::min);
        pass &= order >= MIN_ORDER;
        detail.push_str(&format!(
            "{name}: errors {:.3e}/{:.3e}/{:.3e}, order {order:.2}; ",
            errors[0], errors[1], errors[2]
        ));
    }
    detail.push_str(&format!("min order {MIN_ORDER}"));
    verdict(5, "divergence identity order", pass, &detail);
}

#[test]
fn criterion_6_weak_form_residuals() {
    // Converged loaded solve, then the variational residual over the bump
    // suite.
    let problem = clamped_flat(17, Some([0.0, 0.0, -0.02]));
    let config = SolveConfig {
        grad_tol: 1e-8,
        ..SolveConfig::default()
    };
    let result = minimize(&DeformationField::identity(&problem.grid), &problem, &config).unwrap();
    assert!(result.converged, "loaded 17x17 solve must converge: {:?}", result.stop);
    let report = residual_suite(&result, &problem, &BasisSpec::default()).unwrap();

    // Residual-gradient consistency on random states of the fully loaded
    // mixed problem.
    let consistency_problem = mixed_loaded(9);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_rel = 0.0f64;
    for _ in 0..5 {
        let field = noisy_field(&consistency_problem.grid, &mut rng, 0.02);
        let fab = fabricate(field, &consistency_problem);
        let grad = total_gradient(&fab.field, &consistency_problem).unwrap();
        let mut phi = DeformationField::zeros(&consistency_problem.grid);
        for v in &mut phi.values {
            for c in v.iter_mut() {
                *c = rng.random_range(-0.5..0.5);
            }
        }
        consistency_problem.project_variation(&mut phi.values);
        let residual = weak_residual(&fab, &phi, &consistency_problem).unwrap();
        let pairing = dot_nodes(&grad, &phi.values);
        worst_rel = worst_rel
            .max((residual - pairing).abs() / (1.0 + residual.abs() + pairing.abs()));
    }

    let pass = report.max_normalized <= RESIDUAL_TOL && worst_rel <= CONSISTENCY_REL_TOL;
    verdict(
        6,
        "weak form residuals",
        pass,
        &format!(
            "max normalized residual {:.3e} over {} bumps (tol {RESIDUAL_TOL:.0e}); gradient consistency rel {worst_rel:.3e} on 5 random states (tol {CONSISTENCY_REL_TOL:.0e})",
            report.max_normalized,
            report.samples.len(),
        ),
    );
}

#[test]
fn criterion_7_jacobian_lower_bound() {
    // Closed form: M = 0, delta = 1, q = 4 gives h(t) = t^-4 / 2, so
    // h^-1(0.5) = 1 exactly.
    let inverse = h_inverse(0.5, 0.0, 0.5, 1.0, 4.0).unwrap();
    let closed_form_err = (inverse - 1.0).abs();

    // Every converged solve in this suite gets a valid positive bound.
    let flat = clamped_flat(9, None);
    let pressure = clamped_flat(17, Some([0.0, 0.0, -0.02]));
    let stretched = {
        let grid = Grid2D::new(9, 9, 1.0, 1.0).unwrap();
        let material = MaterialParams {
            c_b: 0.05,
            ..MaterialParams::default()
        };
        let boundary = BoundarySpec {
            south: EdgeTag::Clamped,
            east: EdgeTag::Clamped,
            north: EdgeTag::Clamped,
            west: EdgeTag::Clamped,
            f_o: DeformationField::from_fn(&grid, |x, y| [1.05 * x, y, 0.0]),
        };
        ProblemSpec::new(grid, material, boundary, LoadSpec::none()).unwrap()
    };

    let mut detail = format!("closed-form |h^-1(0.5) - 1| = {closed_form_err:.3e} (tol {ETA_INVERSE_ABS_TOL:.0e})");
    let mut pass = closed_form_err <= ETA_INVERSE_ABS_TOL;
    for (name, problem) in [("flat", &flat), ("pressure", &pressure), ("stretched", &stretched)] {
        let result = minimize(
            &problem.boundary.f_o.clone(),
            problem,
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(result.converged, "{name} solve must converge");
        let report = eta_estimate(&result, problem).unwrap();
        let ok = report.eta > 0.0 && report.observed_min_j >= ETA_SAFETY * report.eta;
        pass &= ok;
        detail.push_str(&format!(
            "; {name}: eta {:.3e}, observed min J {:.3e}",
            report.eta, report.observed_min_j
        ));
    }
    verdict(7, "Jacobian lower bound", pass, &detail);
}

#[test]
fn criterion_8_hypothesis_gate() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let good = hypothesis_check(&MaterialParams::default(), 2000, 0.1, 10.0, &mut rng).unwrap();

    let subcritical = MaterialParams {
        q: 2.0,
        ..MaterialParams::default()
    };
    let bad = hypothesis_check(&subcritical, 2000, 0.1, 10.0, &mut rng).unwrap();

    let split = MaterialParams {
        split_mode: true,
        c_k: 1.0,
        c_gamma: 0.0,
        ..MaterialParams::default()
    };
    let warned = hypothesis_check(&split, 500, 0.1, 10.0, &mut rng).unwrap();
    let split_warn = warned
        .records
        .iter()
        .any(|r| r.check == "split_tangential_coercivity" && r.status == Status::Warn);

    let pass = good.passed()
        && good.growth_ok
        && !bad.growth_ok
        && !bad.passed()
        && bad.growth_threshold == 4.0
        && warned.noncoercive_split
        && split_warn;
    verdict(
        8,
        "hypothesis gate",
        pass,
        &format!(
            "p=4,q=4 passed: {}; p=4,q=2 failed with threshold {} reported; non-coercive split warned: {}",
            good.passed(),
            bad.growth_threshold,
            warned.noncoercive_split && split_warn,
        ),
    );
}

#[test]
fn criterion_9_buckling_energy_comparison() {
    let start = Instant::now();
    let grid = Grid2D::new(33, 33, 1.0, 1.0).unwrap();
    let material = MaterialParams {
        c_b: 1e-3,
        ..MaterialParams::default()
    };
    // 2% end-shortening in x, all edges pinned to the compressed placement.
    let boundary = BoundarySpec {
        south: EdgeTag::Pinned,
        east: EdgeTag::Pinned,
        north: EdgeTag::Pinned,
        west: EdgeTag::Pinned,
        f_o: DeformationField::from_fn(&grid, |x, y| [0.98 * x, y, 0.0]),
    };
    let problem = ProblemSpec::new(grid, material, boundary, LoadSpec::none()).unwrap();
    let config = SolveConfig {
        grad_tol: 1e-6,
        max_iters: 1500,
        ..SolveConfig::default()
    };

    let flat = minimize(&problem.boundary.f_o.clone(), &problem, &config).unwrap();
    let perturbed = minimize(
        &problem.boundary.f_o.clone(),
        &problem,
        &SolveConfig {
            perturbation_amplitude: 0.01,
            seed: 11,
            ..config
        },
    )
    .unwrap();
    let elapsed = start.elapsed();

    let deflection = perturbed
        .field
        .values
        .iter()
        .map(|v| v[2].abs())
        .fold(0.0, f64::max);
    let within_target = elapsed < BUCKLING_TIME_TARGET;
    if !within_target {
        // The runtime target is advisory: report it, gate only the physics.
        println!(
            "criterion 9 note: runtime {elapsed:.2?} exceeded the {BUCKLING_TIME_TARGET:?} target on this hardware"
        );
    }
    let pass = flat.converged
        && perturbed.converged
        && perturbed.energy.total < flat.energy.total;
    verdict(
        9,
        "buckling energy comparison",
        pass,
        &format!(
            "flat energy {:.6e}, perturbed energy {:.6e}, max |z| {:.3e}, {elapsed:.2?}",
            flat.energy.total, perturbed.energy.total, deflection,
        ),
    );
}
