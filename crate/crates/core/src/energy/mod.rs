//! Stored-energy density of the surface model and its pointwise gradients.
//!
//! The density is evaluated per material point from the pair (G, F):
//!
//! ```text
//! psi(G, F) = W_m(C) + psi_J(J) + psi_b(G, F)
//! W_m(C)    = alpha (tr C + 1/det C - 3) + beta (det C + tr C / det C - 3)
//! psi_J(J)  = c_J (J^-q + q J - (q + 1))
//! psi_b     = (c_b / p) |G|^p                          (full mode)
//!           = (c_K / p) |K n ⊗ .|^p + (c_Γ / p) |Γ a ⊗ .|^p   (split mode)
//! ```
//!
//! with C = FᵀF and J = sqrt(det C). The membrane part is a balanced
//! plane-stress Mooney-Rivlin form: nonnegative, zero exactly at C = I, and
//! blowing up as det C falls to zero. The barrier is convex in J with its
//! minimum normalized to zero at J = 1, so the flat identity embedding is
//! stress free. The bending part grows with exponent p > 2; in split mode
//! the normal (curvature-carrying) and tangential parts of G are weighted
//! separately, and c_Γ = 0 loses coercivity in the tangential directions.
//!
//! `psi_grad` returns the exact analytic gradients used by the assembled
//! discrete gradient and the weak-form residual. Gradients with respect to G
//! follow the full-index convention: the mixed component stores dpsi/dG_i12
//! ( = dpsi/dG_i21), and contractions against symmetric directions count it
//! twice, matching [`SymThirdTensor::dot`].

mod checks;

pub use checks::{
    density_objectivity_deviation, hypothesis_check, induced_minors, lifted_bending_density,
    objectivity_check, polyconvexity_probe, ConvexityViolation, HypothesisReport,
    ObjectivityReport, PolyconvexityReport, Status, ValidatorRecord,
};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kinematics::{
    cross3, dot3, metric, unit_normal, Sym2, SymThirdTensor, Tensor32, J_FLOOR, SYM_11, SYM_12,
    SYM_22,
};

/// Constitutive parameters. Serialized names follow the run-config schema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub alpha: f64,
    pub beta: f64,
    /// Bending weight in full mode.
    #[serde(default = "default_c_b")]
    pub c_b: f64,
    /// Bending growth exponent, p > 2.
    pub p: f64,
    /// Barrier weight.
    #[serde(rename = "c_J")]
    pub c_j: f64,
    /// Barrier exponent, q > 0.
    pub q: f64,
    #[serde(default)]
    pub split_mode: bool,
    /// Weight of the normal (curvature) part in split mode.
    #[serde(rename = "c_K", default)]
    pub c_k: f64,
    /// Weight of the tangential part in split mode.
    #[serde(rename = "c_Gamma", default)]
    pub c_gamma: f64,
}

fn default_c_b() -> f64 {
    1.0
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            alpha: 1.0,
            beta: 1.0,
            c_b: 1.0,
            p: 4.0,
            c_j: 1.0,
            q: 4.0,
            split_mode: false,
            c_k: 0.0,
            c_gamma: 0.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), Error> {
        let finite = [
            self.alpha,
            self.beta,
            self.c_b,
            self.p,
            self.c_j,
            self.q,
            self.c_k,
            self.c_gamma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("material parameters must be finite".into()));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(Error::InvalidInput(
                "membrane weights alpha, beta must be positive".into(),
            ));
        }
        if self.c_j <= 0.0 {
            return Err(Error::InvalidInput("barrier weight c_J must be positive".into()));
        }
        if self.p <= 2.0 {
            return Err(Error::InvalidInput("bending exponent p must exceed 2".into()));
        }
        if self.q <= 0.0 {
            return Err(Error::InvalidInput("barrier exponent q must be positive".into()));
        }
        if self.split_mode {
            if self.c_k <= 0.0 {
                return Err(Error::InvalidInput(
                    "split mode requires a positive curvature weight c_K".into(),
                ));
            }
            if self.c_gamma < 0.0 {
                return Err(Error::InvalidInput(
                    "tangential weight c_Gamma must be nonnegative".into(),
                ));
            }
        } else if self.c_b <= 0.0 {
            return Err(Error::InvalidInput("bending weight c_b must be positive".into()));
        }
        Ok(())
    }

    /// Exponent threshold 2p/(p-2) that q must meet for the Jacobian
    /// lower-bound machinery (it makes q alpha >= 2 for alpha = 1 - 2/p).
    pub fn growth_threshold(&self) -> f64 {
        2.0 * self.p / (self.p - 2.0)
    }

    pub fn growth_satisfied(&self) -> bool {
        self.q >= self.growth_threshold() - 1e-12
    }

    /// Split mode with a vanishing tangential weight controls only the
    /// normal part of G and is therefore not coercive in |G|.
    pub fn noncoercive_split(&self) -> bool {
        self.split_mode && self.c_gamma == 0.0
    }

    /// Analytic coercivity witness (c_low, offset) for
    /// psi >= c_low (|G|^p + J^-q) - offset.
    ///
    /// The bending part yields (c_b/p)|G|^p directly in full mode; in split
    /// mode u^{p/2} + v^{p/2} >= 2^{1-p/2} (u+v)^{p/2} costs an extra factor.
    /// The barrier yields c_J J^-q after discarding its nonnegative linear
    /// part, at the price of the additive offset c_J (q+1).
    pub fn coercivity_witness(&self) -> (f64, f64) {
        let bend = if self.split_mode {
            self.c_k.min(self.c_gamma) * 2.0f64.powf(1.0 - self.p / 2.0) / self.p
        } else {
            self.c_b / self.p
        };
        (bend.min(self.c_j), self.c_j * (self.q + 1.0))
    }
}

/// Density value split by physical origin; `total` is the sum of the parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub membrane: f64,
    pub bending: f64,
    pub barrier: f64,
    pub total: f64,
}

/// Membrane part. Requires det C > 0; returns infinity otherwise, which the
/// feasibility-first line search never accepts.
///
/// Evaluated through the strain E = C - I. The raw invariant combination
/// alpha (tr C + 1/det C - 3) + beta (det C + tr C / det C - 3) cancels two
/// order-one quantities near C = I, which leaves absolute rounding noise of
/// a few ULP of 1 in every nodal density regardless of how small the strain
/// is; summed over a grid that noise is larger than the energy decrease a
/// nearly converged minimizer step produces, and the line search goes blind.
/// With u = tr E and v = det C - 1 = u + det E the same function is
///   [alpha (u v - det E) + beta (v^2 - det E)] / det C,
/// a combination of small quantities whose rounding scales with the strain.
pub fn membrane_energy(c: &Sym2, alpha: f64, beta: f64) -> f64 {
    let e11 = c.a11 - 1.0;
    let e22 = c.a22 - 1.0;
    let dete = e11 * e22 - c.a12 * c.a12;
    let u = e11 + e22;
    let v = u + dete;
    let d = 1.0 + v;
    if d <= 0.0 {
        return f64::INFINITY;
    }
    (alpha * (u * v - dete) + beta * (v * v - dete)) / d
}

/// Orientation barrier, convex in J, zero with zero slope at J = 1.
///
/// The power-sum J^-q + qJ - (q+1) cancels to O((J-1)^2) near J = 1; the
/// expm1/ln_1p form below evaluates that difference directly so the nodal
/// value stays accurate (and exactly zero at J = 1) instead of carrying ULP
/// noise of the order-one terms.
pub fn barrier_energy(j: f64, c_j: f64, q: f64) -> f64 {
    if j <= 0.0 {
        return f64::INFINITY;
    }
    let delta = j - 1.0;
    c_j * ((-q * delta.ln_1p()).exp_m1() + q * delta)
}

/// Bending part of the density.
pub fn bending_energy(g: &SymThirdTensor, f: &Tensor32, params: &MaterialParams) -> Result<f64, Error> {
    if params.split_mode {
        warn_noncoercive_once(params);
        let split = split_state(g, f)?;
        Ok(params.c_k / params.p * split.u.powf(params.p / 2.0)
            + params.c_gamma / params.p * split.v.powf(params.p / 2.0))
    } else {
        Ok(params.c_b / params.p * g.norm_sq().powf(params.p / 2.0))
    }
}

/// Full density at a point.
pub fn psi(g: &SymThirdTensor, f: &Tensor32, params: &MaterialParams) -> Result<EnergyBreakdown, Error> {
    let (c, j) = metric(f);
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    let membrane = membrane_energy(&c, params.alpha, params.beta);
    let barrier = barrier_energy(j, params.c_j, params.q);
    let bending = bending_energy(g, f, params)?;
    Ok(EnergyBreakdown {
        membrane,
        bending,
        barrier,
        total: membrane + bending + barrier,
    })
}

/// Pointwise gradients of the density with respect to G and F.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PsiGradient {
    /// dpsi/dG in the full-index convention (see module docs).
    pub wrt_g: SymThirdTensor,
    /// dpsi/dF, a plain 3x2 matrix.
    pub wrt_f: Tensor32,
}

/// Analytic gradients of [`psi`].
pub fn psi_grad(g: &SymThirdTensor, f: &Tensor32, params: &MaterialParams) -> Result<PsiGradient, Error> {
    let (c, j) = metric(f);
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    let cinv = c.inverse();
    let s = c.trace();
    let d = c.det();

    // membrane: dW/dF = 2 F A with A = (dW/ds) I + (dW/dd) d C^-1
    let dw_ds = params.alpha + params.beta / d;
    let dw_dd = -params.alpha / (d * d) + params.beta * (1.0 - s / (d * d));
    let a = Sym2 {
        a11: dw_ds + dw_dd * d * cinv.a11,
        a22: dw_ds + dw_dd * d * cinv.a22,
        a12: dw_dd * d * cinv.a12,
    };
    let mut wrt_f = Tensor32::ZERO;
    for i in 0..3 {
        for al in 0..2 {
            wrt_f.0[i][al] = 2.0 * (f.0[i][0] * a.get(0, al) + f.0[i][1] * a.get(1, al));
        }
    }

    // barrier: dpsi/dF = psi_J'(J) J F C^-1
    let dbar = params.c_j * params.q * (1.0 - j.powf(-params.q - 1.0));
    for i in 0..3 {
        for al in 0..2 {
            let fcinv = f.0[i][0] * cinv.get(0, al) + f.0[i][1] * cinv.get(1, al);
            wrt_f.0[i][al] += dbar * j * fcinv;
        }
    }

    // bending
    let mut wrt_g = SymThirdTensor::ZERO;
    if params.split_mode {
        let sp = split_state(g, f)?;
        let pw = params.p / 2.0 - 1.0;
        let cu = if sp.u > 0.0 { params.c_k * sp.u.powf(pw) } else { 0.0 };
        let cv = if sp.v > 0.0 { params.c_gamma * sp.v.powf(pw) } else { 0.0 };
        for i in 0..3 {
            for comp in 0..3 {
                wrt_g.0[i][comp] = cu * sp.pk.0[i][comp] + cv * sp.pg.0[i][comp];
            }
        }
        // F enters through the normal. With u = sum_ab (n . G_ab)^2,
        // du/dF has columns (a2 x w, w x a1) for w = (2/J)(m - (m.n) n),
        // m = sum_ab K_ab G_ab; v = |G|^2 - u contributes the opposite sign.
        let mut m = [0.0f64; 3];
        for i in 0..3 {
            m[i] = sp.k.a11 * g.0[i][SYM_11]
                + sp.k.a22 * g.0[i][SYM_22]
                + 2.0 * sp.k.a12 * g.0[i][SYM_12];
        }
        let mn = dot3(&m, &sp.n);
        let w = [
            2.0 / j * (m[0] - mn * sp.n[0]),
            2.0 / j * (m[1] - mn * sp.n[1]),
            2.0 / j * (m[2] - mn * sp.n[2]),
        ];
        let a1 = f.column(0);
        let a2 = f.column(1);
        let du_col0 = cross3(&a2, &w);
        let du_col1 = cross3(&w, &a1);
        let coef = 0.5 * (cu - cv);
        for i in 0..3 {
            wrt_f.0[i][0] += coef * du_col0[i];
            wrt_f.0[i][1] += coef * du_col1[i];
        }
    } else {
        let ns = g.norm_sq();
        if ns > 0.0 {
            let factor = params.c_b * ns.powf(params.p / 2.0 - 1.0);
            for i in 0..3 {
                for comp in 0..3 {
                    wrt_g.0[i][comp] = factor * g.0[i][comp];
                }
            }
        }
    }

    Ok(PsiGradient { wrt_g, wrt_f })
}

struct SplitParts {
    n: [f64; 3],
    k: Sym2,
    /// Normal part K_ab n.
    pk: SymThirdTensor,
    /// Tangential remainder G - pk.
    pg: SymThirdTensor,
    u: f64,
    v: f64,
}

fn split_state(g: &SymThirdTensor, f: &Tensor32) -> Result<SplitParts, Error> {
    let n = unit_normal(f)?;
    let mut k = Sym2::default();
    k.a11 = dot3(&n, &g.vector(0, 0));
    k.a22 = dot3(&n, &g.vector(1, 1));
    k.a12 = dot3(&n, &g.vector(0, 1));
    let kv = [k.a11, k.a22, k.a12];
    let mut pk = SymThirdTensor::ZERO;
    for i in 0..3 {
        for comp in 0..3 {
            pk.0[i][comp] = kv[comp] * n[i];
        }
    }
    let pg = g.add_scaled(-1.0, &pk);
    Ok(SplitParts {
        n,
        k,
        u: pk.norm_sq(),
        v: pg.norm_sq(),
        pk,
        pg,
    })
}

fn warn_noncoercive_once(params: &MaterialParams) {
    use std::sync::Once;
    static WARNED: Once = Once::new();
    if params.noncoercive_split() {
        WARNED.call_once(|| {
            eprintln!(
                "warning: split bending with c_Gamma = 0 controls only the normal part of G; \
                 the density is not coercive in |G|"
            );
        });
    }
}
