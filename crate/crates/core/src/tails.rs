//! Closed-form tail and exponential-moment bounds.
//!
//! Every evaluator checks its validity window and refuses to extrapolate.
//! Probabilities are capped at 1 after evaluation; `capped` records whether
//! the cap was hit.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{Kind, MatrixParams, VarianceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    SmallDev,
    LargeDev,
    PropForm,
}

impl Flavor {
    pub fn parse(s: &str) -> Result<Flavor> {
        match s {
            "small" | "smalldev" => Ok(Flavor::SmallDev),
            "large" | "largedev" => Ok(Flavor::LargeDev),
            "prop" | "propform" => Ok(Flavor::PropForm),
            _ => Err(Error::InvalidConfig(format!("unknown flavor {s:?}"))),
        }
    }
}

/// Constants left unspecified by the symmetric and rectangular small-deviation
/// results, which hold with some universal `C` in both the exponent and the
/// prefactor `n σ*² / (C σ²)`.
///
/// Defaults: exponent constant `1/64`; prefactor `40 e`, where `40` is the
/// envelope constant of the Wishart moment sweep in [`crate::wishart`] and `e`
/// the factor produced by the moment-to-tail step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailConstants {
    pub exponent: f64,
    pub prefactor: f64,
}

impl Default for TailConstants {
    fn default() -> Self {
        TailConstants { exponent: 1.0 / 64.0, prefactor: 40.0 * E }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub model: Kind,
    pub flavor: Flavor,
    pub threshold: f64,
    pub prob: f64,
    /// Value before capping at 1.
    pub raw_prob: f64,
    pub capped: bool,
    pub t_or_eps: f64,
    pub window: (f64, f64),
    pub constants: BTreeMap<String, f64>,
}

fn check_window(x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfWindow { value: x, lo, hi });
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::DegenerateProfile(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(v)
}

struct Sigmas {
    /// σ (self-adjoint) or σ₁ (rectangular).
    s1: f64,
    /// σ₂ (rectangular only; equals `s1` otherwise).
    s2: f64,
    star: f64,
}

fn sigmas(model: Kind, params: &MatrixParams<f64>) -> Result<Sigmas> {
    match (model, params) {
        (Kind::Rectangular, MatrixParams::Rectangular { sigma1_sq, sigma2_sq, sigma_star_sq }) => Ok(Sigmas {
            s1: positive("sigma_1", sigma1_sq.sqrt())?,
            s2: positive("sigma_2", sigma2_sq.sqrt())?,
            star: positive("sigma_*", sigma_star_sq.sqrt())?,
        }),
        (Kind::Hermitian | Kind::RealSymmetric, MatrixParams::SelfAdjoint { sigma_sq, sigma_star_sq, .. }) => {
            let s = positive("sigma", sigma_sq.sqrt())?;
            Ok(Sigmas { s1: s, s2: s, star: positive("sigma_*", sigma_star_sq.sqrt())? })
        }
        _ => Err(Error::InvalidConfig(format!("parameters do not match the {} model", model.name()))),
    }
}

fn finish(
    model: Kind,
    flavor: Flavor,
    threshold: f64,
    raw: f64,
    t: f64,
    window: (f64, f64),
    constants: BTreeMap<String, f64>,
) -> TailBound {
    let capped = raw >= 1.0;
    TailBound {
        model,
        flavor,
        threshold,
        prob: if capped { 1.0 } else { raw },
        raw_prob: raw,
        capped,
        t_or_eps: t,
        window,
        constants,
    }
}

fn constant_map(c: &TailConstants) -> BTreeMap<String, f64> {
    BTreeMap::from([("C_exponent".to_string(), c.exponent), ("C_prefactor".to_string(), c.prefactor)])
}

/// Small-deviation bound at parameter `t` for an `n`-row matrix.
pub fn small_dev_bound(
    model: Kind,
    params: &MatrixParams<f64>,
    n: usize,
    t: f64,
    constants: &TailConstants,
) -> Result<TailBound> {
    let s = sigmas(model, params)?;
    let nf = n as f64;
    match model {
        Kind::Hermitian => {
            let hi = (s.s1 / s.star).powf(4.0 / 3.0);
            check_window(t, 0.0, hi)?;
            let threshold = 2.0 * s.s1 + 4.0 * s.star.powf(4.0 / 3.0) * s.s1.powf(-1.0 / 3.0) * t;
            let raw = E * nf * s.star * s.star / (s.s1 * s.s1) * (-t.powf(1.5)).exp();
            Ok(finish(model, Flavor::SmallDev, threshold, raw, t, (0.0, hi), BTreeMap::new()))
        }
        Kind::RealSymmetric => {
            let hi = (s.s1 / s.star).powf(4.0 / 3.0);
            check_window(t, 0.0, hi)?;
            let threshold = 2.0 * s.s1 + s.star.powf(4.0 / 3.0) * s.s1.powf(-1.0 / 3.0) * t;
            let raw = constants.prefactor * nf * s.star * s.star / (s.s1 * s.s1)
                * (-constants.exponent * t.powf(1.5)).exp();
            Ok(finish(model, Flavor::SmallDev, threshold, raw, t, (0.0, hi), constant_map(constants)))
        }
        Kind::Rectangular => {
            if s.s1 > s.s2 {
                return Err(Error::TransposeRequired(format!(
                    "sigma_1 = {} exceeds sigma_2 = {}; evaluate on the adjoint",
                    s.s1, s.s2
                )));
            }
            let hi = s.s1.powf(1.0 / 3.0) * s.s2 / s.star.powf(4.0 / 3.0);
            check_window(t, 0.0, hi)?;
            let threshold = s.s1 + s.s2 + s.star.powf(4.0 / 3.0) * s.s1.powf(-1.0 / 3.0) * t;
            let raw = constants.prefactor * nf * s.star * s.star / (s.s1 * s.s1)
                * (-constants.exponent * t.powf(1.5)).exp();
            Ok(finish(model, Flavor::SmallDev, threshold, raw, t, (0.0, hi), constant_map(constants)))
        }
    }
}

pub fn large_dev_bound(model: Kind, params: &MatrixParams<f64>, n: usize, m: usize, t: f64) -> Result<TailBound> {
    let s = sigmas(model, params)?;
    check_window(t, 0.0, f64::INFINITY)?;
    let nf = n as f64;
    let (threshold, raw) = match model {
        Kind::Hermitian => (2.0 * s.s1 + s.star * (1.0 + t), 2.0 * nf * (-t * t / 2.0).exp()),
        Kind::RealSymmetric => (2.0 * s.s1 + s.star * (1.0 + t), 2.0 * nf * (-t * t / 4.0).exp()),
        Kind::Rectangular => {
            if n > m {
                return Err(Error::DimensionError(format!(
                    "large-deviation bound needs n <= m, got {n} x {m}; evaluate on the adjoint"
                )));
            }
            (s.s1 + s.s2 + s.star * (1.0 + t), 2.0 * nf * (-t * t / 2.0).exp())
        }
    };
    Ok(finish(model, Flavor::LargeDev, threshold, raw, t, (0.0, f64::INFINITY), BTreeMap::new()))
}

/// Proposition-form bound at relative deviation `eps ∈ [0, 1]`.
pub fn prop_bound(
    model: Kind,
    params: &MatrixParams<f64>,
    n: usize,
    eps: f64,
    constants: &TailConstants,
) -> Result<TailBound> {
    let s = sigmas(model, params)?;
    check_window(eps, 0.0, 1.0)?;
    let nf = n as f64;
    let (s2, star2) = (s.s1 * s.s1, s.star * s.star);
    let e32 = eps.powf(1.5);
    match model {
        Kind::Hermitian => {
            let threshold = 2.0 * (s2 + star2).sqrt() * (1.0 + eps);
            let raw = E * nf * star2 / s2 * (-(s2 / star2) * e32).exp();
            Ok(finish(model, Flavor::PropForm, threshold, raw, eps, (0.0, 1.0), BTreeMap::new()))
        }
        Kind::RealSymmetric => {
            let threshold = 2.0 * (s2 + star2).sqrt() * (1.0 + eps);
            let raw = constants.prefactor * nf * star2 / s2 * (-0.25 * (s2 / star2) * e32).exp();
            Ok(finish(model, Flavor::PropForm, threshold, raw, eps, (0.0, 1.0), constant_map(constants)))
        }
        Kind::Rectangular => {
            if s.s1 > s.s2 {
                return Err(Error::TransposeRequired(format!(
                    "sigma_1 = {} exceeds sigma_2 = {}; evaluate on the adjoint",
                    s.s1, s.s2
                )));
            }
            let threshold = ((s2 + star2).sqrt() + (s.s2 * s.s2 + star2).sqrt()) * (1.0 + eps);
            let rate = 0.125 * s.s1.sqrt() * s.s2.powf(1.5) / star2;
            let raw = constants.prefactor * nf * star2 / s2 * (-rate * e32).exp();
            Ok(finish(model, Flavor::PropForm, threshold, raw, eps, (0.0, 1.0), constant_map(constants)))
        }
    }
}

/// Orients a rectangular profile the way the bounds require: `σ₁ ≤ σ₂`, ties
/// broken by `n ≤ m`. Self-adjoint profiles are returned unchanged.
pub fn oriented(profile: &VarianceProfile) -> VarianceProfile {
    if profile.kind() != Kind::Rectangular {
        return profile.clone();
    }
    let MatrixParams::Rectangular { sigma1_sq, sigma2_sq, .. } = profile.params() else { unreachable!() };
    if sigma1_sq > sigma2_sq || (sigma1_sq == sigma2_sq && profile.n() > profile.m()) {
        profile.transpose()
    } else {
        profile.clone()
    }
}

/// Evaluates the requested flavor for a profile, transposing rectangular
/// profiles first when needed (the norm of `X` and `X*` agree).
pub fn bound_for_profile(profile: &VarianceProfile, flavor: Flavor, t: f64, constants: &TailConstants) -> Result<TailBound> {
    let p = oriented(profile);
    let params = p.params();
    match flavor {
        Flavor::SmallDev => small_dev_bound(p.kind(), &params, p.n(), t, constants),
        Flavor::LargeDev => large_dev_bound(p.kind(), &params, p.n(), p.m(), t),
        Flavor::PropForm => prop_bound(p.kind(), &params, p.n(), t, constants),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MgfModel {
    /// `d × d` GUE: `E tr e^{tY} ≤ e^{2√d t + t²/2}`.
    Gue { d: usize },
    /// `d × d` GOE with `N(0, 2)` diagonal: `E tr e^{tY} ≤ e^{2√d t + t²}`.
    Goe { d: usize },
    /// `d1 × d2` real Gaussian: `E tr e^{t (YY*)^{1/2}} ≤ e^{(√d1 + √d2) t + t²/2}`.
    Wishart { d1: usize, d2: usize },
}

pub fn mgf_bound(model: MgfModel, t: f64) -> Result<f64> {
    check_window(t, 0.0, f64::INFINITY)?;
    Ok(match model {
        MgfModel::Gue { d } => (2.0 * (d as f64).sqrt() * t + t * t / 2.0).exp(),
        MgfModel::Goe { d } => (2.0 * (d as f64).sqrt() * t + t * t).exp(),
        MgfModel::Wishart { d1, d2 } => (((d1 as f64).sqrt() + (d2 as f64).sqrt()) * t + t * t / 2.0).exp(),
    })
}
