//! Second-order difference stencils on the node-centered grid and the
//! per-node evaluation of (F, G) from a deformation field.
//!
//! Interior nodes use central differences; boundary nodes use one-sided
//! stencils of matching order (three points for the first derivative, four
//! for the second, so both are exact on quadratics). Mixed derivatives come
//! from the tensor product of the two first-derivative stencils, which makes
//! the two differentiation orders identical term by term, so the stored G is
//! symmetric by construction.

use crate::kinematics::{self, KinematicState, SymThirdTensor, Tensor32, SYM_11, SYM_12, SYM_22};

use super::{DeformationField, Grid2D};

/// (offset, coefficient) pairs; offsets stay inside the axis by construction.
type Taps = Vec<(isize, f64)>;

pub(crate) struct AxisStencils {
    pub d1: Vec<Taps>,
    pub d2: Vec<Taps>,
}

pub(crate) fn axis_stencils(n: usize, h: f64) -> AxisStencils {
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        d1.push(first_derivative_taps(i, n, h));
        d2.push(second_derivative_taps(i, n, h));
    }
    AxisStencils { d1, d2 }
}

fn first_derivative_taps(i: usize, n: usize, h: f64) -> Taps {
    if i == 0 {
        vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
    } else if i == n - 1 {
        vec![(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)]
    } else {
        vec![(-1, -0.5 / h), (1, 0.5 / h)]
    }
}

fn second_derivative_taps(i: usize, n: usize, h: f64) -> Taps {
    let h2 = h * h;
    if i == 0 {
        if n >= 4 {
            vec![(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)]
        } else {
            // three-node axis: the centered stencil evaluated at the wall is
            // the only consistent choice; still exact on quadratics
            vec![(0, 1.0 / h2), (1, -2.0 / h2), (2, 1.0 / h2)]
        }
    } else if i == n - 1 {
        second_derivative_taps(0, n, h)
            .into_iter()
            .map(|(o, c)| (-o, c))
            .collect()
    } else {
        vec![(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)]
    }
}

pub(crate) struct GridStencils {
    pub x: AxisStencils,
    pub y: AxisStencils,
}

pub(crate) fn grid_stencils(grid: &Grid2D) -> GridStencils {
    GridStencils {
        x: axis_stencils(grid.nx, grid.hx),
        y: axis_stencils(grid.ny, grid.hy),
    }
}

#[inline]
fn offset_idx(grid: &Grid2D, i: usize, j: usize, oi: isize, oj: isize) -> usize {
    let ii = (i as isize + oi) as usize;
    let jj = (j as isize + oj) as usize;
    grid.idx(ii, jj)
}

pub(crate) fn node_f(
    field: &DeformationField,
    grid: &Grid2D,
    st: &GridStencils,
    i: usize,
    j: usize,
) -> Tensor32 {
    let mut f = Tensor32::ZERO;
    for &(o, c) in &st.x.d1[i] {
        let v = field.values[offset_idx(grid, i, j, o, 0)];
        for comp in 0..3 {
            f.0[comp][0] += c * v[comp];
        }
    }
    for &(o, c) in &st.y.d1[j] {
        let v = field.values[offset_idx(grid, i, j, 0, o)];
        for comp in 0..3 {
            f.0[comp][1] += c * v[comp];
        }
    }
    f
}

pub(crate) fn node_g(
    field: &DeformationField,
    grid: &Grid2D,
    st: &GridStencils,
    i: usize,
    j: usize,
) -> SymThirdTensor {
    let mut g = SymThirdTensor::ZERO;
    for &(o, c) in &st.x.d2[i] {
        let v = field.values[offset_idx(grid, i, j, o, 0)];
        for comp in 0..3 {
            g.0[comp][SYM_11] += c * v[comp];
        }
    }
    for &(o, c) in &st.y.d2[j] {
        let v = field.values[offset_idx(grid, i, j, 0, o)];
        for comp in 0..3 {
            g.0[comp][SYM_22] += c * v[comp];
        }
    }
    for &(ox, cx) in &st.x.d1[i] {
        for &(oy, cy) in &st.y.d1[j] {
            let v = field.values[offset_idx(grid, i, j, ox, oy)];
            let c = cx * cy;
            for comp in 0..3 {
                g.0[comp][SYM_12] += c * v[comp];
            }
        }
    }
    g
}

/// (F, G) at every node, in grid index order.
pub fn node_derivatives(field: &DeformationField, grid: &Grid2D) -> Vec<(Tensor32, SymThirdTensor)> {
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    let st = grid_stencils(grid);
    let mut out = Vec::with_capacity(grid.node_count());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            out.push((node_f(field, grid, &st, i, j), node_g(field, grid, &st, i, j)));
        }
    }
    out
}

/// Full kinematic evaluation at every node. Degenerate nodes carry no surface
/// data but do not fail; callers that need a positive area gate on
/// [`min_jacobian`].
pub fn evaluate_kinematics(field: &DeformationField, grid: &Grid2D) -> Vec<KinematicState> {
    node_derivatives(field, grid)
        .into_iter()
        .map(|(f, g)| kinematics::evaluate(&f, &g))
        .collect()
}

/// Minimum nodal area Jacobian and the node attaining it. Cheaper than a full
/// kinematic evaluation; used by the feasibility check of the line search.
pub fn min_jacobian(field: &DeformationField, grid: &Grid2D) -> (f64, (usize, usize)) {
    assert_eq!(field.len(), grid.node_count(), "field does not match grid");
    let st = grid_stencils(grid);
    let mut min_j = f64::INFINITY;
    let mut at = (0, 0);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let f = node_f(field, grid, &st, i, j);
            let (_, jac) = kinematics::metric(&f);
            if jac < min_j {
                min_j = jac;
                at = (i, j);
            }
        }
    }
    (min_j, at)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: f64, b: f64) -> f64 {
        (a - b).abs()
    }

    #[test]
    fn stencils_are_exact_on_quadratics_along_an_axis() {
        for n in [3usize, 4, 9] {
            let h = 0.37;
            let st = axis_stencils(n, h);
            let poly = |x: f64| 1.7 - 0.3 * x + 2.1 * x * x;
            let dpoly = |x: f64| -0.3 + 4.2 * x;
            for i in 0..n {
                let x = i as f64 * h;
                let d1: f64 = st.d1[i]
                    .iter()
                    .map(|&(o, c)| c * poly((i as isize + o) as f64 * h))
                    .sum();
                let d2: f64 = st.d2[i]
                    .iter()
                    .map(|&(o, c)| c * poly((i as isize + o) as f64 * h))
                    .sum();
                assert!(max_abs(d1, dpoly(x)) < 1e-12, "d1 at node {i} of {n}");
                assert!(max_abs(d2, 4.2) < 1e-11, "d2 at node {i} of {n}");
            }
        }
    }

    #[test]
    fn boundary_second_derivative_is_exact_on_cubics() {
        let n = 7;
        let h = 0.21;
        let st = axis_stencils(n, h);
        let poly = |x: f64| 0.4 * x * x * x - x * x + 2.0 * x;
        let d2poly = |x: f64| 2.4 * x - 2.0;
        for i in [0, n - 1] {
            let d2: f64 = st.d2[i]
                .iter()
                .map(|&(o, c)| c * poly((i as isize + o) as f64 * h))
                .sum();
            assert!(max_abs(d2, d2poly(i as f64 * h)) < 1e-11);
        }
    }

    #[test]
    fn affine_fields_have_exact_gradient_and_zero_curvature() {
        let grid = Grid2D::new(6, 5, 1.3, 0.9).unwrap();
        let a = Tensor32([[1.1, 0.4], [-0.2, 0.8], [0.3, -0.5]]);
        let field = DeformationField::from_fn(&grid, |x, y| {
            [
                a.0[0][0] * x + a.0[0][1] * y + 0.7,
                a.0[1][0] * x + a.0[1][1] * y - 0.2,
                a.0[2][0] * x + a.0[2][1] * y,
            ]
        });
        for (f, g) in node_derivatives(&field, &grid) {
            for comp in 0..3 {
                for al in 0..2 {
                    assert!(max_abs(f.0[comp][al], a.0[comp][al]) < 1e-12);
                }
                for c in 0..3 {
                    assert!(g.0[comp][c].abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn quadratic_fields_have_exact_second_derivatives() {
        let grid = Grid2D::new(8, 6, 1.0, 1.0).unwrap();
        // f_comp = x M x / 2 with distinct symmetric M per component
        let ms = [
            [[2.0, 0.5], [0.5, -1.0]],
            [[0.0, 1.5], [1.5, 0.0]],
            [[-0.7, 0.2], [0.2, 0.9]],
        ];
        let field = DeformationField::from_fn(&grid, |x, y| {
            let mut v = [0.0; 3];
            for (comp, m) in ms.iter().enumerate() {
                v[comp] = 0.5 * (m[0][0] * x * x + 2.0 * m[0][1] * x * y + m[1][1] * y * y);
            }
            v
        });
        for (_, g) in node_derivatives(&field, &grid) {
            for (comp, m) in ms.iter().enumerate() {
                assert!(max_abs(g.0[comp][SYM_11], m[0][0]) < 1e-10);
                assert!(max_abs(g.0[comp][SYM_22], m[1][1]) < 1e-10);
                assert!(max_abs(g.0[comp][SYM_12], m[0][1]) < 1e-10);
            }
        }
    }

    #[test]
    fn smooth_field_errors_decay_at_second_order() {
        // f = (sin x, y, cos x) on refining grids; exact F and G known
        let err = |n: usize| -> (f64, f64) {
            let grid = Grid2D::new(n, n, 2.0, 1.0).unwrap();
            let field = DeformationField::from_fn(&grid, |x, y| [x.sin(), y, x.cos()]);
            let mut ef = 0.0f64;
            let mut eg = 0.0f64;
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let (x, _) = grid.coords(i, j);
                    let (f, g) = {
                        let st = grid_stencils(&grid);
                        (node_f(&field, &grid, &st, i, j), node_g(&field, &grid, &st, i, j))
                    };
                    let fx = Tensor32([[x.cos(), 0.0], [0.0, 1.0], [-x.sin(), 0.0]]);
                    let mut gx = SymThirdTensor::ZERO;
                    gx.0[0][SYM_11] = -x.sin();
                    gx.0[2][SYM_11] = -x.cos();
                    ef = ef.max(f.add_scaled(-1.0, &fx).norm());
                    eg = eg.max(g.add_scaled(-1.0, &gx).norm());
                }
            }
            (ef, eg)
        };
        let (f17, g17) = err(17);
        let (f33, g33) = err(33);
        let rate_f = (f17 / f33).log2();
        let rate_g = (g17 / g33).log2();
        assert!(rate_f > 1.8, "gradient rate {rate_f}");
        assert!(rate_g > 1.8, "second-derivative rate {rate_g}");
    }

    #[test]
    fn mixed_derivative_is_symmetric_by_construction_and_accurate() {
        let grid = Grid2D::new(21, 21, 1.0, 1.0).unwrap();
        let field = DeformationField::from_fn(&grid, |x, y| {
            [(x * y).sin(), x * x * y, (2.0 * x + y).cos()]
        });
        let st = grid_stencils(&grid);
        let mut max_err = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.coords(i, j);
                let g = node_g(&field, &grid, &st, i, j);
                let exact = [
                    (x * y).cos() - x * y * (x * y).sin(),
                    2.0 * x,
                    -2.0 * (2.0 * x + y).cos(),
                ];
                for comp in 0..3 {
                    max_err = max_err.max((g.0[comp][SYM_12] - exact[comp]).abs());
                }
            }
        }
        assert!(max_err < 5e-2, "mixed derivative error {max_err}");
    }

    #[test]
    fn min_jacobian_finds_the_pinched_node() {
        let grid = Grid2D::new(9, 9, 1.0, 1.0).unwrap();
        // area shrinks most where the in-plane stretch is smallest: x = 1
        let field = DeformationField::from_fn(&grid, |x, y| [x - 0.25 * x * x, y, 0.0]);
        let (jmin, (i, _)) = min_jacobian(&field, &grid);
        assert_eq!(i, 8);
        assert!((jmin - 0.5).abs() < 0.03, "min J {jmin}");
        let ident = DeformationField::identity(&grid);
        let (j1, _) = min_jacobian(&ident, &grid);
        assert!((j1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn evaluate_kinematics_populates_surface_data() {
        let grid = Grid2D::new(7, 7, 1.0, 1.0).unwrap();
        let field = DeformationField::identity(&grid);
        let states = evaluate_kinematics(&field, &grid);
        assert_eq!(states.len(), grid.node_count());
        for s in &states {
            assert!((s.j - 1.0).abs() < 1e-14);
            let surf = s.surface.as_ref().expect("identity embedding is regular");
            assert!((surf.normal[2] - 1.0).abs() < 1e-14);
            assert_eq!(surf.kappa, 0.0);
        }
    }
}
