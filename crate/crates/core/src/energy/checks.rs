//! Sampling-based validators for the density: growth/coercivity reporting,
//! frame-indifference, and convexity probing in the lifted minor variables.
//!
//! These are reporting operations: a failed inequality shows up in the
//! returned record, not as an `Err`. Callers that must gate on the outcome
//! (the CLI's check command, the acceptance suite) inspect the report.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::energy::{psi, psi_grad, MaterialParams};
use crate::error::Error;
use crate::kinematics::{metric, minors, SymThirdTensor, Tensor32};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

/// One named check with the constants that witness it and, on failure or
/// warning, the worst sample encountered.
#[derive(Clone, Debug, Serialize)]
pub struct ValidatorRecord {
    pub check: String,
    pub status: Status,
    pub witness_constants: BTreeMap<String, f64>,
    pub worst_sample: Option<BTreeMap<String, f64>>,
}

/// Outcome of [`hypothesis_check`]: growth-exponent arithmetic, a sampled
/// coercivity bound with explicit constants, and empirical constants for the
/// pointwise density/gradient growth bounds on { J >= eta, |F| <= r }.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub q: f64,
    pub growth_threshold: f64,
    pub growth_ok: bool,
    pub c_low: f64,
    pub offset: f64,
    /// min over samples of (psi + offset) / (|G|^p + J^-q); coercivity holds
    /// on the sample set iff this is >= c_low.
    pub min_coercivity_ratio: f64,
    pub coercivity_violations: usize,
    pub eta: f64,
    pub r: f64,
    /// Witnessed constants: psi <= c_psi (|G|^p + 1), |Psi_G| <= c_psi_g
    /// (|G|^{p-1} + 1), |Psi_F| <= c_psi_f (|G|^p + 1) on the window.
    pub c_psi: f64,
    pub c_psi_g: f64,
    pub c_psi_f: f64,
    pub window_samples: usize,
    pub sample_count: usize,
    pub noncoercive_split: bool,
    pub records: Vec<ValidatorRecord>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.growth_ok && self.coercivity_violations == 0
    }
}

/// Samples random states and reports on the growth condition q >= 2p/(p-2),
/// the coercivity bound psi >= c_low (|G|^p + J^-q) - offset, and the
/// empirical growth constants on the window { J >= eta, |F| <= r }.
pub fn hypothesis_check<R: Rng + ?Sized>(
    params: &MaterialParams,
    sample_count: usize,
    eta: f64,
    r: f64,
    rng: &mut R,
) -> Result<HypothesisReport, Error> {
    params.validate()?;
    if !(eta > 0.0 && r > 0.0) {
        return Err(Error::InvalidInput(
            "hypothesis window requires eta > 0 and r > 0".into(),
        ));
    }
    let threshold = params.growth_threshold();
    let growth_ok = params.growth_satisfied();
    let (c_low, offset) = params.coercivity_witness();

    let mut min_ratio = f64::INFINITY;
    let mut violations = 0usize;
    let mut worst: Option<BTreeMap<String, f64>> = None;
    let (mut c_psi, mut c_psi_g, mut c_psi_f) = (0.0f64, 0.0f64, 0.0f64);
    let mut window_samples = 0usize;

    for _ in 0..sample_count {
        let (g, f) = sampling::random_state(rng, 0.05, 3.0, 3.0);
        let (_, j) = metric(&f);
        let b = psi(&g, &f, params)?;
        let gp = g.norm().powf(params.p);
        let scale = gp + j.powf(-params.q);
        let ratio = (b.total + offset) / scale;
        if ratio < min_ratio {
            min_ratio = ratio;
            let mut sample = BTreeMap::new();
            sample.insert("j".into(), j);
            sample.insert("g_norm".into(), g.norm());
            sample.insert("psi".into(), b.total);
            sample.insert("ratio".into(), ratio);
            worst = Some(sample);
        }
        if ratio < c_low * (1.0 - 1e-9) {
            violations += 1;
        }
        if j >= eta && f.norm() <= r {
            window_samples += 1;
            c_psi = c_psi.max(b.total / (gp + 1.0));
            let grad = psi_grad(&g, &f, params)?;
            c_psi_g = c_psi_g.max(grad.wrt_g.norm() / (g.norm().powf(params.p - 1.0) + 1.0));
            c_psi_f = c_psi_f.max(grad.wrt_f.norm() / (gp + 1.0));
        }
    }

    let mut records = Vec::new();
    records.push(ValidatorRecord {
        check: "growth_exponent".into(),
        status: if growth_ok { Status::Pass } else { Status::Fail },
        witness_constants: BTreeMap::from([
            ("q".into(), params.q),
            ("threshold".into(), threshold),
        ]),
        worst_sample: None,
    });
    records.push(ValidatorRecord {
        check: "coercivity_lower_bound".into(),
        status: if violations == 0 { Status::Pass } else { Status::Fail },
        witness_constants: BTreeMap::from([
            ("c_low".into(), c_low),
            ("offset".into(), offset),
            ("min_ratio".into(), min_ratio),
        ]),
        worst_sample: worst,
    });
    records.push(ValidatorRecord {
        check: "growth_window_constants".into(),
        status: if window_samples > 0 { Status::Pass } else { Status::Warn },
        witness_constants: BTreeMap::from([
            ("c_psi".into(), c_psi),
            ("c_psi_g".into(), c_psi_g),
            ("c_psi_f".into(), c_psi_f),
            ("window_samples".into(), window_samples as f64),
        ]),
        worst_sample: None,
    });
    if params.split_mode {
        records.push(ValidatorRecord {
            check: "split_tangential_coercivity".into(),
            status: if params.noncoercive_split() { Status::Warn } else { Status::Pass },
            witness_constants: BTreeMap::from([
                ("c_K".into(), params.c_k),
                ("c_Gamma".into(), params.c_gamma),
            ]),
            worst_sample: None,
        });
    }

    Ok(HypothesisReport {
        q: params.q,
        growth_threshold: threshold,
        growth_ok,
        c_low,
        offset,
        min_coercivity_ratio: min_ratio,
        coercivity_violations: violations,
        eta,
        r,
        c_psi,
        c_psi_g,
        c_psi_f,
        window_samples,
        sample_count,
        noncoercive_split: params.noncoercive_split(),
        records,
    })
}

/// Frame-indifference deviation of an arbitrary density under random
/// rotations: max over samples of |d(QG, QF) - d(G, F)| / (1 + |d(G, F)|).
pub fn density_objectivity_deviation<R, D>(density: D, sample_count: usize, rng: &mut R) -> f64
where
    R: Rng + ?Sized,
    D: Fn(&SymThirdTensor, &Tensor32) -> f64,
{
    let mut max_dev = 0.0f64;
    for _ in 0..sample_count {
        let (g, f) = sampling::random_state(rng, 0.3, 2.5, 2.0);
        let q = sampling::random_rotation(rng);
        let base = density(&g, &f);
        let rot = density(&g.rotated(&q), &f.rotated(&q));
        max_dev = max_dev.max((rot - base).abs() / (1.0 + base.abs()));
    }
    max_dev
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectivityReport {
    pub max_relative_deviation: f64,
    pub sample_count: usize,
}

/// Frame-indifference of the model density itself.
pub fn objectivity_check<R: Rng + ?Sized>(
    params: &MaterialParams,
    sample_count: usize,
    rng: &mut R,
) -> Result<ObjectivityReport, Error> {
    params.validate()?;
    let p = *params;
    let max_relative_deviation = density_objectivity_deviation(
        move |g, f| psi(g, f, &p).expect("sampled states stay above the area floor").total,
        sample_count,
        rng,
    );
    Ok(ObjectivityReport {
        max_relative_deviation,
        sample_count,
    })
}

/// One failed convexity inequality from [`polyconvexity_probe`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexityViolation {
    pub segment: usize,
    pub t: f64,
    pub value: f64,
    pub chord: f64,
    /// value - chord; positive beyond the tolerance means non-convex.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyconvexityReport {
    pub segment_count: usize,
    pub checks: usize,
    pub violations: Vec<ConvexityViolation>,
}

/// Convexity probe in the lifted variables: for each segment a deformation
/// gradient is frozen, endpoints (G, d) are drawn with the fifteen d-values
/// independent of G (lifted, not induced), and the chord inequality
/// phi(t X0 + (1-t) X1) <= t phi(X0) + (1-t) phi(X1) is tested at several t.
pub fn polyconvexity_probe<R, D>(
    density: D,
    segment_count: usize,
    rng: &mut R,
) -> PolyconvexityReport
where
    R: Rng + ?Sized,
    D: Fn(&SymThirdTensor, &[f64; 15], &Tensor32) -> f64,
{
    let mut checks = 0usize;
    let mut violations = Vec::new();
    for segment in 0..segment_count {
        let f = sampling::random_deformation_gradient(rng, 0.3, 2.0);
        let g0 = sampling::random_second_gradient(rng, 3.0);
        let g1 = sampling::random_second_gradient(rng, 3.0);
        let mut d0 = [0.0f64; 15];
        let mut d1 = [0.0f64; 15];
        for l in 0..15 {
            d0[l] = rng.random_range(-3.0..3.0);
            d1[l] = rng.random_range(-3.0..3.0);
        }
        let v0 = density(&g0, &d0, &f);
        let v1 = density(&g1, &d1, &f);
        let tol = 1e-10 * (1.0 + v0.abs() + v1.abs());
        let ts = [0.25, 0.5, 0.75, rng.random_range(0.01..0.99)];
        for &t in &ts {
            let gt = g1.add_scaled(t, &g0.add_scaled(-1.0, &g1));
            let mut dt = [0.0f64; 15];
            for l in 0..15 {
                dt[l] = t * d0[l] + (1.0 - t) * d1[l];
            }
            let value = density(&gt, &dt, &f);
            let chord = t * v0 + (1.0 - t) * v1;
            checks += 1;
            if value > chord + tol {
                violations.push(ConvexityViolation {
                    segment,
                    t,
                    value,
                    chord,
                    gap: value - chord,
                });
            }
        }
    }
    PolyconvexityReport {
        segment_count,
        checks,
        violations,
    }
}

/// Lifted form of the model's bending term for probing: uses G only, so it is
/// a valid candidate for the convexity test with the minors along for the ride.
pub fn lifted_bending_density(params: &MaterialParams) -> impl Fn(&SymThirdTensor, &[f64; 15], &Tensor32) -> f64 {
    let c_b = params.c_b;
    let p = params.p;
    move |g, _d, _f| c_b / p * g.norm_sq().powf(p / 2.0)
}

/// Induced minors of an actual second gradient, for callers probing densities
/// that consume the true lifted point (G, D(G)).
pub fn induced_minors(g: &SymThirdTensor) -> [f64; 15] {
    minors(g)
}
