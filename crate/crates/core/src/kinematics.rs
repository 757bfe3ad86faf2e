//! Pointwise kinematics of a deformed surface patch.
//!
//! A configuration is a map f: Ω ⊂ R² → R³. At a material point we carry its
//! first gradient F (3x2) and second gradient G (3x2x2, symmetric in the two
//! trailing indices). Everything else derives from that pair:
//!
//! - metric C = FᵀF and area Jacobian J = sqrt(det C),
//! - oriented unit normal n = (Fe₁ × Fe₂)/J,
//! - relative curvature K with K_ab = n · G_ab and tangential coefficients
//!   Γ^c_ab = aᶜ · G_ab, where aᶜ is the dual tangent basis; together they
//!   recompose G exactly: G_ab = K_ab n + Γ^c_ab a_c,
//! - the 15 pairwise 2x2 minors of G arranged as a 6x2 matrix (rows indexed
//!   by component and first derivative direction, columns by the second),
//! - Gaussian curvature κ = det K / J², also expressible in the minors.

use crate::error::Error;

/// Positivity floor for the area Jacobian. At or below this the tangent
/// plane is treated as degenerate: the normal, curvatures and the barrier
/// term are unavailable.
pub const J_FLOOR: f64 = 1e-12;

/// Storage order of the symmetric trailing index pair: 11, 22, 12.
pub const SYM_11: usize = 0;
/// See [`SYM_11`].
pub const SYM_22: usize = 1;
/// See [`SYM_11`].
pub const SYM_12: usize = 2;

/// First deformation gradient, a 3x2 matrix indexed `[i][a]` with i the
/// ambient component and a the reference direction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor32(pub [[f64; 2]; 3]);

impl Tensor32 {
    pub const ZERO: Tensor32 = Tensor32([[0.0; 2]; 3]);

    /// Gradient of the flat identity embedding (x₁, x₂) ↦ (x₁, x₂, 0).
    pub fn identity_embedding() -> Self {
        Tensor32([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    }

    /// Tangent vector a_a = F e_a.
    pub fn column(&self, a: usize) -> [f64; 3] {
        [self.0[0][a], self.0[1][a], self.0[2][a]]
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Tensor32) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for a in 0..2 {
                s += self.0[i][a] * other.0[i][a];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add_scaled(&self, t: f64, other: &Tensor32) -> Tensor32 {
        let mut out = *self;
        for i in 0..3 {
            for a in 0..2 {
                out.0[i][a] += t * other.0[i][a];
            }
        }
        out
    }

    /// Left action of a rotation on the ambient index: (QF)_ia = Q_ik F_ka.
    pub fn rotated(&self, q: &[[f64; 3]; 3]) -> Tensor32 {
        let mut out = Tensor32::ZERO;
        for i in 0..3 {
            for a in 0..2 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += q[i][k] * self.0[k][a];
                }
                out.0[i][a] = s;
            }
        }
        out
    }
}

/// Symmetric 2x2 tensor on the reference plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        a11: 1.0,
        a22: 1.0,
        a12: 0.0,
    };

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Inverse; the caller is responsible for det being safely away
    /// from zero (guarded by [`J_FLOOR`] on J = sqrt(det) upstream).
    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 {
            a11: self.a22 / d,
            a22: self.a11 / d,
            a12: -self.a12 / d,
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.a11,
            (1, 1) => self.a22,
            _ => self.a12,
        }
    }
}

/// Second deformation gradient G, symmetric in the trailing pair, stored as
/// three independent components per ambient index: `[i][{11, 22, 12}]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymThirdTensor(pub [[f64; 3]; 3]);

impl SymThirdTensor {
    pub const ZERO: SymThirdTensor = SymThirdTensor([[0.0; 3]; 3]);

    /// Full-index access; `get(i, 0, 1)` and `get(i, 1, 0)` alias.
    pub fn get(&self, i: usize, a: usize, b: usize) -> f64 {
        self.0[i][sym_index(a, b)]
    }

    /// The second-derivative 3-vector G_ab = f_,ab.
    pub fn vector(&self, a: usize, b: usize) -> [f64; 3] {
        let c = sym_index(a, b);
        [self.0[0][c], self.0[1][c], self.0[2][c]]
    }

    /// Squared tensor-Euclidean norm over all four trailing index pairs,
    /// so the mixed component counts twice.
    pub fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            s += self.0[i][SYM_11] * self.0[i][SYM_11]
                + self.0[i][SYM_22] * self.0[i][SYM_22]
                + 2.0 * self.0[i][SYM_12] * self.0[i][SYM_12];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Full contraction A : B = Σ A_iab B_iab, mixed components twice.
    pub fn dot(&self, other: &SymThirdTensor) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            s += self.0[i][SYM_11] * other.0[i][SYM_11]
                + self.0[i][SYM_22] * other.0[i][SYM_22]
                + 2.0 * self.0[i][SYM_12] * other.0[i][SYM_12];
        }
        s
    }

    pub fn scale(&self, t: f64) -> SymThirdTensor {
        let mut out = *self;
        for i in 0..3 {
            for c in 0..3 {
                out.0[i][c] *= t;
            }
        }
        out
    }

    pub fn add_scaled(&self, t: f64, other: &SymThirdTensor) -> SymThirdTensor {
        let mut out = *self;
        for i in 0..3 {
            for c in 0..3 {
                out.0[i][c] += t * other.0[i][c];
            }
        }
        out
    }

    /// Left action of a rotation on the ambient index.
    pub fn rotated(&self, q: &[[f64; 3]; 3]) -> SymThirdTensor {
        let mut out = SymThirdTensor::ZERO;
        for c in 0..3 {
            for i in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += q[i][k] * self.0[k][c];
                }
                out.0[i][c] = s;
            }
        }
        out
    }
}

fn sym_index(a: usize, b: usize) -> usize {
    match (a, b) {
        (0, 0) => SYM_11,
        (1, 1) => SYM_22,
        _ => SYM_12,
    }
}

/// Tangential (Christoffel-like) coefficients Γ^c_ab, stored `[c][{11,22,12}]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Christoffel(pub [[f64; 3]; 2]);

impl Christoffel {
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.0[c][sym_index(a, b)]
    }
}

/// Normal-dependent part of the state; present only when J > [`J_FLOOR`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceState {
    pub normal: [f64; 3],
    /// Relative curvature K_ab = n · G_ab.
    pub curvature: Sym2,
    pub christoffel: Christoffel,
    /// Gaussian curvature det K / J².
    pub kappa: f64,
}

/// Everything derived from one (F, G) pair at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicState {
    pub f: Tensor32,
    pub g: SymThirdTensor,
    pub c: Sym2,
    pub j: f64,
    pub minors: [f64; 15],
    pub surface: Option<SurfaceState>,
}

/// Pulled-back metric C = FᵀF and area Jacobian J = sqrt(det C) >= 0.
pub fn metric(f: &Tensor32) -> (Sym2, f64) {
    let a1 = f.column(0);
    let a2 = f.column(1);
    let c = Sym2 {
        a11: dot3(&a1, &a1),
        a22: dot3(&a2, &a2),
        a12: dot3(&a1, &a2),
    };
    (c, c.det().max(0.0).sqrt())
}

/// Oriented unit normal n = (Fe₁ × Fe₂) / |Fe₁ × Fe₂|.
///
/// The denominator equals J by the Lagrange identity; normalizing by the
/// cross-product length keeps |n| = 1 to rounding even near the floor.
pub fn unit_normal(f: &Tensor32) -> Result<[f64; 3], Error> {
    let (_, j) = metric(f);
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    let c = cross3(&f.column(0), &f.column(1));
    let len = norm3(&c);
    Ok([c[0] / len, c[1] / len, c[2] / len])
}

/// Split G into its normal and tangential parts.
///
/// Returns (K, Γ) with K_ab = n · G_ab and Γ^c_ab = aᶜ · G_ab, where the dual
/// basis is aᶜ = (C⁻¹)_cd a_d. The parts recompose to G exactly, see
/// [`recompose`].
pub fn curvature_split(g: &SymThirdTensor, f: &Tensor32) -> Result<(Sym2, Christoffel), Error> {
    let (c, j) = metric(f);
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    let n = unit_normal(f)?;
    let cinv = c.inverse();
    let a = [f.column(0), f.column(1)];
    // dual tangent basis
    let mut dual = [[0.0f64; 3]; 2];
    for cc in 0..2 {
        for k in 0..3 {
            dual[cc][k] = cinv.get(cc, 0) * a[0][k] + cinv.get(cc, 1) * a[1][k];
        }
    }
    let mut k = Sym2::default();
    let mut gamma = Christoffel::default();
    for comp in 0..3 {
        let pair = comp_pair(comp);
        let v = g.vector(pair.0, pair.1);
        let kv = dot3(&n, &v);
        match comp {
            SYM_11 => k.a11 = kv,
            SYM_22 => k.a22 = kv,
            _ => k.a12 = kv,
        }
        for cc in 0..2 {
            gamma.0[cc][comp] = dot3(&dual[cc], &v);
        }
    }
    Ok((k, gamma))
}

fn comp_pair(comp: usize) -> (usize, usize) {
    match comp {
        SYM_11 => (0, 0),
        SYM_22 => (1, 1),
        _ => (0, 1),
    }
}

/// Rebuild G from a curvature/tangential split relative to F:
/// G_ab = K_ab n + Γ^c_ab a_c.
pub fn recompose(k: &Sym2, gamma: &Christoffel, f: &Tensor32) -> Result<SymThirdTensor, Error> {
    let n = unit_normal(f)?;
    let a = [f.column(0), f.column(1)];
    let mut g = SymThirdTensor::ZERO;
    for comp in 0..3 {
        let (pa, pb) = comp_pair(comp);
        let kv = k.get(pa, pb);
        for i in 0..3 {
            g.0[i][comp] =
                kv * n[i] + gamma.0[0][comp] * a[0][i] + gamma.0[1][comp] * a[1][i];
        }
    }
    Ok(g)
}

/// Row pairs of the 6x2 component matrix that generate the 15 minors, in
/// their conventional order. Row 2i+a of the matrix is
/// [G_ia1, G_ia2], so d₁..d₃ are the per-component determinants
/// G_i11 G_i22 - G_i12², and the rest pair distinct rows.
const MINOR_PAIRS: [(usize, usize); 15] = [
    (0, 1), // d1: component 1 with itself
    (2, 3), // d2
    (4, 5), // d3
    (0, 2), // d4
    (0, 4), // d5
    (0, 3), // d6
    (0, 5), // d7
    (1, 2), // d8
    (1, 4), // d9
    (1, 3), // d10
    (1, 5), // d11
    (2, 4), // d12
    (2, 5), // d13
    (3, 4), // d14
    (3, 5), // d15
];

/// All 15 pairwise 2x2 minors of G viewed as a 6x2 matrix.
///
/// Each minor is quadratic in G; d₁₂ in particular equals det Dw for the
/// planar field w = (f₂,₁ , f₃,₁).
pub fn minors(g: &SymThirdTensor) -> [f64; 15] {
    let mut rows = [[0.0f64; 2]; 6];
    for i in 0..3 {
        for a in 0..2 {
            rows[2 * i + a] = [g.get(i, a, 0), g.get(i, a, 1)];
        }
    }
    let mut d = [0.0f64; 15];
    for (l, &(r, s)) in MINOR_PAIRS.iter().enumerate() {
        d[l] = rows[r][0] * rows[s][1] - rows[r][1] * rows[s][0];
    }
    d
}

/// Gaussian curvature κ = det K / J².
pub fn gaussian_curvature(k: &Sym2, j: f64) -> Result<f64, Error> {
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    Ok(k.det() / (j * j))
}

/// Gaussian curvature reconstructed from the normal and the minors:
///
/// det K expands over components of n into
/// n₁²d₁ + n₂²d₂ + n₃²d₃ + n₁n₂(d₆-d₈) + n₁n₃(d₇-d₉) + n₂n₃(d₁₃-d₁₄),
/// and κ is that divided by J².
pub fn gaussian_from_minors(n: &[f64; 3], d: &[f64; 15], j: f64) -> Result<f64, Error> {
    if j <= J_FLOOR {
        return Err(Error::DegenerateMetric { j, node: None });
    }
    let det_k = n[0] * n[0] * d[0]
        + n[1] * n[1] * d[1]
        + n[2] * n[2] * d[2]
        + n[0] * n[1] * (d[5] - d[7])
        + n[0] * n[2] * (d[6] - d[8])
        + n[1] * n[2] * (d[12] - d[13]);
    Ok(det_k / (j * j))
}

/// Derive the full state at a point. Never fails: when J is at or below
/// [`J_FLOOR`] the normal-dependent part is simply absent.
pub fn evaluate(f: &Tensor32, g: &SymThirdTensor) -> KinematicState {
    let (c, j) = metric(f);
    let d = minors(g);
    let surface = if j > J_FLOOR {
        let n = unit_normal(f).expect("J above floor");
        let (k, gamma) = curvature_split(g, f).expect("J above floor");
        let kappa = k.det() / (j * j);
        Some(SurfaceState {
            normal: n,
            curvature: k,
            christoffel: gamma,
            kappa,
        })
    } else {
        None
    };
    KinematicState {
        f: *f,
        g: *g,
        c,
        j,
        minors: d,
        surface,
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
