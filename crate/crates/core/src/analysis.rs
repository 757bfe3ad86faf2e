//! Post-solve verification.
//!
//! Two diagnostics run on a minimizer: the weak equilibrium residual against
//! smooth test variations (a discrete stationarity certificate independent of
//! the solver's own stopping test), and a computable lower-bound estimate for
//! the area Jacobian built from the energy value, the coercivity witness and
//! the Hoelder continuity of J. The Jacobian bound is a discrete diagnostic
//! surrogate for the continuum statement, not a proof, and every report says
//! so and prints all ingredients so the numbers can be recomputed by hand.

use std::f64::consts::PI;

use serde::Serialize;

use crate::discretization::{
    discrete_norms, load_functional, node_derivatives, quadrature_weights, DeformationField,
    ProblemSpec,
};
use crate::energy::psi_grad;
use crate::error::Error;
use crate::kinematics::metric;
use crate::solver::MinimizeResult;

/// Weak equilibrium residual of the solved field against one test variation:
/// the quadrature of the density gradients contracted with the variation's
/// derivatives, minus the load work of the variation. Algebraically equal to
/// the inner product of the assembled discrete gradient with the variation's
/// nodal values, so a converged solve makes it small for every admissible phi.
///
/// `phi` must lie in the discrete variation space (zero on constrained nodes).
pub fn weak_residual(
    result: &MinimizeResult,
    phi: &DeformationField,
    problem: &ProblemSpec,
) -> Result<f64, Error> {
    let grid = &problem.grid;
    assert_eq!(phi.len(), grid.node_count(), "variation does not match grid");
    let mask = problem.constrained_mask();
    assert!(
        mask.iter()
            .zip(&phi.values)
            .all(|(&constrained, v)| !constrained || *v == [0.0; 3]),
        "variation must vanish on constrained nodes"
    );

    let weights = quadrature_weights(grid);
    let state = node_derivatives(&result.field, grid);
    let test = node_derivatives(phi, grid);
    let mut interior = 0.0;
    for ((w, (f, g)), (pf, pg)) in weights.iter().zip(&state).zip(&test) {
        let grad = psi_grad(g, f, &problem.material)?;
        interior += w * (grad.wrt_g.dot(pg) + grad.wrt_f.dot(pf));
    }
    Ok(interior - load_functional(phi, problem))
}

/// Which test variations [`residual_suite`] builds: one compactly supported
/// C^2 bump (1 - s^2)^3 per enabled component per lattice center.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BasisSpec {
    /// Bump centers per axis, placed at interior fractions k/(n+1).
    pub centers_x: usize,
    pub centers_y: usize,
    /// Support half-width as a fraction of the domain extent per axis.
    pub half_width: f64,
    /// Deformation components that receive bumps.
    pub components: [bool; 3],
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec {
            centers_x: 3,
            centers_y: 3,
            half_width: 0.35,
            components: [true; 3],
        }
    }
}

impl BasisSpec {
    fn describe(&self) -> String {
        format!(
            "tensor-product (1-s^2)^3 bumps, {}x{} centers, half-width {} of the extent, components {:?}",
            self.centers_x, self.centers_y, self.half_width, self.components
        )
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualSample {
    pub component: usize,
    pub center: [f64; 2],
    pub residual: f64,
    /// W^{2,p} norm of the projected test variation, the normalizer.
    pub norm: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub basis: String,
    pub samples: Vec<ResidualSample>,
    pub max_normalized: f64,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let t = 1.0 - s * s;
        t * t * t
    }
}

/// Evaluate [`weak_residual`] over a basis of projected bump variations and
/// report each residual normalized by the variation's W^{2,p} norm. On a
/// converged solve the maximum stays within a small multiple of the gradient
/// tolerance; an unconverged state shows visibly larger values.
pub fn residual_suite(
    result: &MinimizeResult,
    problem: &ProblemSpec,
    spec: &BasisSpec,
) -> Result<ResidualReport, Error> {
    let grid = &problem.grid;
    let p = problem.material.p;
    let mut samples = Vec::new();
    let mut max_normalized = 0.0f64;
    for comp in 0..3 {
        if !spec.components[comp] {
            continue;
        }
        for kx in 1..=spec.centers_x {
            for ky in 1..=spec.centers_y {
                let cx = grid.lx * kx as f64 / (spec.centers_x + 1) as f64;
                let cy = grid.ly * ky as f64 / (spec.centers_y + 1) as f64;
                let wx = spec.half_width * grid.lx;
                let wy = spec.half_width * grid.ly;
                let mut phi = DeformationField::from_fn(grid, |x, y| {
                    let mut v = [0.0; 3];
                    v[comp] = bump((x - cx) / wx) * bump((y - cy) / wy);
                    v
                });
                problem.project_variation(&mut phi.values);
                let norm = discrete_norms(&phi, grid, p).w2p;
                if norm == 0.0 {
                    continue; // bump fully swallowed by the constrained band
                }
                let residual = weak_residual(result, &phi, problem)?;
                let normalized = residual.abs() / norm;
                max_normalized = max_normalized.max(normalized);
                samples.push(ResidualSample {
                    component: comp,
                    center: [cx, cy],
                    residual,
                    norm,
                    normalized,
                });
            }
        }
    }
    Ok(ResidualReport {
        basis: spec.describe(),
        samples,
        max_normalized,
    })
}

/// Lower-bound estimate for the area Jacobian of a converged minimizer,
/// together with every quantity entering it.
#[derive(Clone, Debug, Serialize)]
pub struct EtaReport {
    /// The bound itself: min(eta1, eta2).
    pub eta: f64,
    /// Interior bound h^{-1}(C_star).
    pub eta1: f64,
    /// Minimum boundary Jacobian of the boundary datum.
    pub eta2: f64,
    /// Hoelder constant of the discrete Jacobian field over pairs within
    /// the cone radius.
    #[serde(rename = "M")]
    pub m: f64,
    /// Hoelder exponent 1 - 2/p.
    pub alpha: f64,
    /// Cone radius.
    pub delta: f64,
    /// Cone angle.
    pub gamma: f64,
    #[serde(rename = "C_star")]
    pub c_star: f64,
    /// Witnessed coercivity constant the energy bound uses.
    pub c_low: f64,
    /// Additive offset of the coercivity witness, folded into C_star.
    pub offset: f64,
    #[serde(rename = "observed_min_J")]
    pub observed_min_j: f64,
    pub note: String,
}

/// h(t) = integral over r in (0, delta) of (t + M r^alpha)^{-q} r dr,
/// the cone mass of the barrier at a hypothetical Jacobian value t.
/// Strictly decreasing in t; blows up as t -> 0 when q alpha >= 2.
pub fn h_integral(t: f64, m: f64, alpha: f64, delta: f64, q: f64) -> f64 {
    assert!(t > 0.0 && delta > 0.0 && q > 0.0, "h needs positive t, delta, q");
    assert!((0.0..=1.0).contains(&alpha) && alpha > 0.0, "alpha must lie in (0, 1]");
    if m == 0.0 {
        return t.powf(-q) * delta * delta / 2.0;
    }
    // substitute u = r^alpha: the integrand becomes
    // (t + M u)^{-q} u^{2/alpha - 1} / alpha, smooth on [0, delta^alpha]
    let e = 2.0 / alpha - 1.0;
    let f = |u: f64| (t + m * u).powf(-q) * u.powf(e) / alpha;
    adaptive_simpson(&f, 0.0, delta.powf(alpha), 1e-13)
}

/// Inverse of [`h_integral`] in t by bisection on a verified-monotone
/// bracket; closed form when M = 0.
pub fn h_inverse(c_star: f64, m: f64, alpha: f64, delta: f64, q: f64) -> Result<f64, Error> {
    assert!(c_star > 0.0, "h inverse needs a positive target");
    if m == 0.0 {
        return Ok((2.0 * c_star / (delta * delta)).powf(-1.0 / q));
    }
    let h = |t: f64| h_integral(t, m, alpha, delta, q);

    let mut t_hi = 1.0;
    while h(t_hi) > c_star {
        t_hi *= 2.0;
        if t_hi > 1e12 {
            return Err(Error::BisectionFailure {
                c_star,
                t_lo: 1.0,
                h_lo: h(1.0),
                t_hi,
                h_hi: h(t_hi),
            });
        }
    }
    let mut t_lo = t_hi;
    while h(t_lo) < c_star {
        t_lo *= 0.5;
        if t_lo < 1e-300 {
            return Err(Error::BisectionFailure {
                c_star,
                t_lo,
                h_lo: h(t_lo),
                t_hi,
                h_hi: h(t_hi),
            });
        }
    }

    // strict decrease across the bracket, checked on a log-spaced grid
    if t_lo < t_hi {
        let mut prev = f64::INFINITY;
        for k in 0..=16 {
            let t = t_lo * (t_hi / t_lo).powf(k as f64 / 16.0);
            let v = h(t);
            assert!(
                v <= prev * (1.0 + 1e-9),
                "cone integral failed to decrease between samples near t = {t}"
            );
            prev = v;
        }
    }

    let mut lo = t_lo;
    let mut hi = t_hi;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        if h(mid) >= c_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    let eps = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Estimate the Jacobian lower bound for a converged solve. Needs the growth
/// exponent at or above 2p/(p-2); below it the estimate is inapplicable.
pub fn eta_estimate(result: &MinimizeResult, problem: &ProblemSpec) -> Result<EtaReport, Error> {
    let material = &problem.material;
    if !result.converged {
        return Err(Error::InvalidInput(
            "the Jacobian bound is only meaningful for a converged solve".into(),
        ));
    }
    if !material.growth_satisfied() {
        return Err(Error::Inapplicable {
            q: material.q,
            threshold: material.growth_threshold(),
        });
    }
    let (c_low, offset) = material.coercivity_witness();
    if c_low <= 0.0 {
        return Err(Error::InvalidInput(
            "no coercivity witness: the split bending weights leave the energy non-coercive"
                .into(),
        ));
    }

    let grid = &problem.grid;
    let alpha = 1.0 - 2.0 / material.p;
    let delta = grid.lx.min(grid.ly) / 4.0;
    let gamma = PI / 2.0;

    // nodal Jacobian field of the solved state
    let state = node_derivatives(&result.field, grid);
    let jfield: Vec<f64> = state.iter().map(|(f, _)| metric(f).1).collect();
    let observed_min_j = jfield.iter().copied().fold(f64::INFINITY, f64::min);

    // Hoelder constant over node pairs within the cone radius
    let mut m_hoelder = 0.0f64;
    for j1 in 0..grid.ny {
        for i1 in 0..grid.nx {
            let (x1, y1) = grid.coords(i1, j1);
            let a = jfield[grid.idx(i1, j1)];
            for j2 in j1..grid.ny {
                for i2 in 0..grid.nx {
                    if j2 == j1 && i2 <= i1 {
                        continue;
                    }
                    let (x2, y2) = grid.coords(i2, j2);
                    let dist = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
                    if dist > delta {
                        continue;
                    }
                    let b = jfield[grid.idx(i2, j2)];
                    m_hoelder = m_hoelder.max((a - b).abs() / dist.powf(alpha));
                }
            }
        }
    }

    let area = grid.lx * grid.ly;
    let c_star =
        (result.energy.total + result.load_work.abs() + offset * area) / (gamma * c_low);
    let eta1 = h_inverse(c_star, m_hoelder, alpha, delta, material.q)?;

    // boundary bound: minimum Jacobian of the boundary datum on the edges
    let datum = node_derivatives(&problem.boundary.f_o, grid);
    let mut eta2 = f64::INFINITY;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1 {
                eta2 = eta2.min(metric(&datum[grid.idx(i, j)].0).1);
            }
        }
    }

    let eta = eta1.min(eta2);
    assert!(
        observed_min_j >= 0.99 * eta,
        "Jacobian bound {eta} exceeds the observed minimum {observed_min_j}; the estimate is not a valid lower bound here"
    );
    Ok(EtaReport {
        eta,
        eta1,
        eta2,
        m: m_hoelder,
        alpha,
        delta,
        gamma,
        c_star,
        c_low,
        offset,
        observed_min_j,
        note: "discrete diagnostic surrogate for the continuum Jacobian bound; \
               not a certified inequality"
            .into(),
    })
}
