//! Quadrature, the discrete total energy and its exact gradient, the
//! divergence identity of the minor d12, and discrete Sobolev norms.
//!
//! All area integrals use the trapezoid rule with product weights
//! `w = hx hy cx cy` (half weight at boundary nodes per axis); boundary
//! integrals use the 1-D trapezoid rule along each edge. The gradient is the
//! exact transpose of the difference stencils against the density gradients,
//! so it is the true derivative of the discrete energy, not a discretization
//! of the continuous Euler-Lagrange operator. Assembly runs in a fixed node
//! order, keeping results bit-reproducible.

use crate::energy::{psi, psi_grad, EnergyBreakdown};
use crate::error::Error;
use crate::kinematics::{metric, J_FLOOR, SYM_11, SYM_12, SYM_22};

use super::stencil::{grid_stencils, node_f, node_g};
use super::{DeformationField, Edge, Grid2D, ProblemSpec};

/// Trapezoid weight of node (i, j).
#[inline]
fn node_weight(grid: &Grid2D, i: usize, j: usize) -> f64 {
    let cx = if i == 0 || i == grid.nx - 1 { 0.5 } else { 1.0 };
    let cy = if j == 0 || j == grid.ny - 1 { 0.5 } else { 1.0 };
    grid.hx * grid.hy * cx * cy
}

/// Trapezoid weight of the k-th node along an edge.
#[inline]
fn edge_weight(grid: &Grid2D, edge: Edge, k: usize) -> f64 {
    let n = edge.node_count(grid);
    let c = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
    edge.spacing(grid) * c
}

/// Neumaier compensated accumulator. The solver compares energies of nearly
/// identical fields, so the quadrature sum must not add reassociation noise
/// on top of the nodal density rounding.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.carry += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EnergyTerms {
    /// Integrated stored energy, split by physical origin.
    pub breakdown: EnergyBreakdown,
    /// Work of the dead loads on the current field.
    pub load_work: f64,
    /// Stored energy minus load work: the minimized objective.
    pub potential: f64,
}

/// Work of the dead loads: body force against f, generalized body force
/// against the gradient, tractions against boundary values, hypertractions
/// against the outward normal derivative.
pub fn load_functional(field: &DeformationField, problem: &ProblemSpec) -> f64 {
    let grid = &problem.grid;
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    let loads = &problem.loads;
    let mut total = Compensated::default();

    let needs_gradient = loads.body_couple.is_some();
    let st = grid_stencils(grid);
    if loads.body_force.is_some() || needs_gradient {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let idx = grid.idx(i, j);
                let w = node_weight(grid, i, j);
                if let Some(b) = &loads.body_force {
                    let y = field.values[idx];
                    total.add(w * (b[idx][0] * y[0] + b[idx][1] * y[1] + b[idx][2] * y[2]));
                }
                if let Some(bb) = &loads.body_couple {
                    let f = node_f(field, grid, &st, i, j);
                    total.add(w * bb[idx].dot(&f));
                }
            }
        }
    }

    for edge in Edge::ALL {
        let nu = edge.outward_normal();
        if let Some(tau) = &loads.traction[edge.index()] {
            for k in 0..edge.node_count(grid) {
                let (i, j) = edge.node(grid, k);
                let y = field.values[grid.idx(i, j)];
                let ew = edge_weight(grid, edge, k);
                total.add(ew * (tau[k][0] * y[0] + tau[k][1] * y[1] + tau[k][2] * y[2]));
            }
        }
        if let Some(mu) = &loads.hypertraction[edge.index()] {
            for k in 0..edge.node_count(grid) {
                let (i, j) = edge.node(grid, k);
                let f = node_f(field, grid, &st, i, j);
                let ew = edge_weight(grid, edge, k);
                for comp in 0..3 {
                    let dn = nu[0] * f.0[comp][0] + nu[1] * f.0[comp][1];
                    total.add(ew * mu[k][comp] * dn);
                }
            }
        }
    }
    total.value()
}

/// Total potential energy of the field: quadrature of the density minus the
/// load work. Fails on the first node whose area Jacobian is at the floor.
pub fn total_energy(field: &DeformationField, problem: &ProblemSpec) -> Result<EnergyTerms, Error> {
    let grid = &problem.grid;
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    let st = grid_stencils(grid);
    let mut membrane = Compensated::default();
    let mut bending = Compensated::default();
    let mut barrier = Compensated::default();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let f = node_f(field, grid, &st, i, j);
            let (_, jac) = metric(&f);
            if jac <= J_FLOOR {
                return Err(Error::DegenerateMetric { j: jac, node: Some((i, j)) });
            }
            let g = node_g(field, grid, &st, i, j);
            let b = psi(&g, &f, &problem.material)?;
            let w = node_weight(grid, i, j);
            membrane.add(w * b.membrane);
            bending.add(w * b.bending);
            barrier.add(w * b.barrier);
        }
    }
    let breakdown = EnergyBreakdown {
        membrane: membrane.value(),
        bending: bending.value(),
        barrier: barrier.value(),
        total: membrane.value() + bending.value() + barrier.value(),
    };
    let load_work = load_functional(field, problem);
    Ok(EnergyTerms {
        breakdown,
        load_work,
        potential: breakdown.total - load_work,
    })
}

fn scatter_axis(
    grad: &mut [[f64; 3]],
    grid: &Grid2D,
    i: usize,
    j: usize,
    taps: &[(isize, f64)],
    along_x: bool,
    weight_per_comp: &[f64; 3],
) {
    for &(o, c) in taps {
        let idx = if along_x {
            grid.idx((i as isize + o) as usize, j)
        } else {
            grid.idx(i, (j as isize + o) as usize)
        };
        for comp in 0..3 {
            grad[idx][comp] += weight_per_comp[comp] * c;
        }
    }
}

/// Exact gradient of [`total_energy`] with respect to nodal values, with
/// constrained entries zeroed.
pub fn total_gradient(field: &DeformationField, problem: &ProblemSpec) -> Result<Vec<[f64; 3]>, Error> {
    let grid = &problem.grid;
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    let st = grid_stencils(grid);
    let mut grad = vec![[0.0f64; 3]; grid.node_count()];

    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let f = node_f(field, grid, &st, i, j);
            let (_, jac) = metric(&f);
            if jac <= J_FLOOR {
                return Err(Error::DegenerateMetric { j: jac, node: Some((i, j)) });
            }
            let g = node_g(field, grid, &st, i, j);
            let pg = psi_grad(&g, &f, &problem.material)?;
            let w = node_weight(grid, i, j);

            // dF columns through the two first-derivative stencils
            let wf0 = [w * pg.wrt_f.0[0][0], w * pg.wrt_f.0[1][0], w * pg.wrt_f.0[2][0]];
            let wf1 = [w * pg.wrt_f.0[0][1], w * pg.wrt_f.0[1][1], w * pg.wrt_f.0[2][1]];
            scatter_axis(&mut grad, grid, i, j, &st.x.d1[i], true, &wf0);
            scatter_axis(&mut grad, grid, i, j, &st.y.d1[j], false, &wf1);

            // dG: pure second derivatives, then the mixed pair (counted twice)
            let wg11 = [
                w * pg.wrt_g.0[0][SYM_11],
                w * pg.wrt_g.0[1][SYM_11],
                w * pg.wrt_g.0[2][SYM_11],
            ];
            let wg22 = [
                w * pg.wrt_g.0[0][SYM_22],
                w * pg.wrt_g.0[1][SYM_22],
                w * pg.wrt_g.0[2][SYM_22],
            ];
            scatter_axis(&mut grad, grid, i, j, &st.x.d2[i], true, &wg11);
            scatter_axis(&mut grad, grid, i, j, &st.y.d2[j], false, &wg22);
            for &(ox, cx) in &st.x.d1[i] {
                for &(oy, cy) in &st.y.d1[j] {
                    let idx = grid.idx((i as isize + ox) as usize, (j as isize + oy) as usize);
                    let c = 2.0 * w * cx * cy;
                    for comp in 0..3 {
                        grad[idx][comp] += c * pg.wrt_g.0[comp][SYM_12];
                    }
                }
            }
        }
    }

    // loads enter the potential with a minus sign
    let loads = &problem.loads;
    if loads.body_force.is_some() || loads.body_couple.is_some() {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let idx = grid.idx(i, j);
                let w = node_weight(grid, i, j);
                if let Some(b) = &loads.body_force {
                    for comp in 0..3 {
                        grad[idx][comp] -= w * b[idx][comp];
                    }
                }
                if let Some(bb) = &loads.body_couple {
                    let c0 = [
                        -w * bb[idx].0[0][0],
                        -w * bb[idx].0[1][0],
                        -w * bb[idx].0[2][0],
                    ];
                    let c1 = [
                        -w * bb[idx].0[0][1],
                        -w * bb[idx].0[1][1],
                        -w * bb[idx].0[2][1],
                    ];
                    scatter_axis(&mut grad, grid, i, j, &st.x.d1[i], true, &c0);
                    scatter_axis(&mut grad, grid, i, j, &st.y.d1[j], false, &c1);
                }
            }
        }
    }
    for edge in Edge::ALL {
        let nu = edge.outward_normal();
        if let Some(tau) = &loads.traction[edge.index()] {
            for k in 0..edge.node_count(grid) {
                let (i, j) = edge.node(grid, k);
                let ew = edge_weight(grid, edge, k);
                for comp in 0..3 {
                    grad[grid.idx(i, j)][comp] -= ew * tau[k][comp];
                }
            }
        }
        if let Some(mu) = &loads.hypertraction[edge.index()] {
            for k in 0..edge.node_count(grid) {
                let (i, j) = edge.node(grid, k);
                let ew = edge_weight(grid, edge, k);
                if nu[0] != 0.0 {
                    let wc = [
                        -ew * nu[0] * mu[k][0],
                        -ew * nu[0] * mu[k][1],
                        -ew * nu[0] * mu[k][2],
                    ];
                    scatter_axis(&mut grad, grid, i, j, &st.x.d1[i], true, &wc);
                }
                if nu[1] != 0.0 {
                    let wc = [
                        -ew * nu[1] * mu[k][0],
                        -ew * nu[1] * mu[k][1],
                        -ew * nu[1] * mu[k][2],
                    ];
                    scatter_axis(&mut grad, grid, i, j, &st.y.d1[j], false, &wc);
                }
            }
        }
    }

    problem.project_variation(&mut grad);
    Ok(grad)
}

/// Both sides of the discrete divergence identity for planar vector fields:
/// `lhs = ∫ det(Dw) φ dx`, `rhs = -1/2 ∫ (Cof(Dw) ∇φ) · w dx`. For φ vanishing
/// on the boundary the two agree up to the quadrature/stencil error O(h²).
pub fn divergence_identity_check(w: &[[f64; 2]], phi: &[f64], grid: &Grid2D) -> (f64, f64) {
    assert_eq!(w.len(), grid.node_count(), "w does not match grid");
    assert_eq!(phi.len(), grid.node_count(), "phi does not match grid");
    let st = grid_stencils(grid);
    let d1 = |vals: &dyn Fn(usize) -> f64, i: usize, j: usize| -> [f64; 2] {
        let mut out = [0.0; 2];
        for &(o, c) in &st.x.d1[i] {
            out[0] += c * vals(grid.idx((i as isize + o) as usize, j));
        }
        for &(o, c) in &st.y.d1[j] {
            out[1] += c * vals(grid.idx(i, (j as isize + o) as usize));
        }
        out
    };
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let idx = grid.idx(i, j);
            let qw = node_weight(grid, i, j);
            let dw1 = d1(&|k| w[k][0], i, j);
            let dw2 = d1(&|k| w[k][1], i, j);
            // rows of Dw: dw1 = grad of w1, dw2 = grad of w2
            let det = dw1[0] * dw2[1] - dw1[1] * dw2[0];
            lhs += qw * det * phi[idx];
            let gphi = d1(&|k| phi[k], i, j);
            // Cof [[a, b], [c, d]] = [[d, -c], [-b, a]]
            let cof = [[dw2[1], -dw2[0]], [-dw1[1], dw1[0]]];
            let cg = [
                cof[0][0] * gphi[0] + cof[0][1] * gphi[1],
                cof[1][0] * gphi[0] + cof[1][1] * gphi[1],
            ];
            rhs -= 0.5 * qw * (cg[0] * w[idx][0] + cg[1] * w[idx][1]);
        }
    }
    (lhs, rhs)
}

/// Discrete Lebesgue/Sobolev seminorms and norms of a nodal field for a given
/// exponent. Integrand magnitudes are Euclidean on vectors and tensors, with
/// the mixed second-derivative component counted twice.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Norms {
    pub lp: f64,
    pub grad_lp: f64,
    pub hess_lp: f64,
    pub w1p: f64,
    pub w2p: f64,
}

pub fn discrete_norms(field: &DeformationField, grid: &Grid2D, p: f64) -> Norms {
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    assert!(p >= 1.0, "norm exponent must be >= 1");
    let st = grid_stencils(grid);
    let (mut sv, mut sg, mut sh) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let w = node_weight(grid, i, j);
            let y = field.values[grid.idx(i, j)];
            let ynorm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            sv += w * ynorm.powf(p);
            let f = node_f(field, grid, &st, i, j);
            sg += w * f.norm().powf(p);
            let g = node_g(field, grid, &st, i, j);
            sh += w * g.norm().powf(p);
        }
    }
    let lp = sv.powf(1.0 / p);
    let grad_lp = sg.powf(1.0 / p);
    let hess_lp = sh.powf(1.0 / p);
    Norms {
        lp,
        grad_lp,
        hess_lp,
        w1p: (sv + sg).powf(1.0 / p),
        w2p: (sv + sg + sh).powf(1.0 / p),
    }
}

/// The trapezoid weights of all nodes, in grid index order. Exposed for the
/// weak-form residual, which quadratures density gradients against test
/// functions with the same rule as the energy.
pub fn quadrature_weights(grid: &Grid2D) -> Vec<f64> {
    let mut w = Vec::with_capacity(grid.node_count());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            w.push(node_weight(grid, i, j));
        }
    }
    w
}
