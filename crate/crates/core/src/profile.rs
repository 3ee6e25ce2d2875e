//! Variance profiles and their matrix parameters.
//!
//! A profile stores the coefficient matrix `b` (row-major). For the
//! self-adjoint kinds `b` must be square and symmetric; the √2 diagonal scaling
//! of the real symmetric model is applied by the samplers, not here.

use std::path::Path;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Rectangular,
    Hermitian,
    #[serde(rename = "symmetric")]
    RealSymmetric,
}

impl Kind {
    pub fn is_self_adjoint(self) -> bool {
        !matches!(self, Kind::Rectangular)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Rectangular => "rectangular",
            Kind::Hermitian => "hermitian",
            Kind::RealSymmetric => "symmetric",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" => Ok(Kind::Rectangular),
            "hermitian" | "herm" => Ok(Kind::Hermitian),
            "symmetric" | "sym" | "realsymmetric" => Ok(Kind::RealSymmetric),
            _ => Err(Error::InvalidConfig(format!("unknown kind {s:?}"))),
        }
    }
}

/// Matrix parameters. `T` is `f64` for float profiles and `BigRational` for
/// exact ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MatrixParams<T> {
    Rectangular { sigma1_sq: T, sigma2_sq: T, sigma_star_sq: T },
    SelfAdjoint { sigma_sq: T, sigma_tilde_sq: T, sigma_star_sq: T },
}

impl<T: Clone> MatrixParams<T> {
    pub fn sigma_star_sq(&self) -> T {
        match self {
            MatrixParams::Rectangular { sigma_star_sq, .. } => sigma_star_sq.clone(),
            MatrixParams::SelfAdjoint { sigma_star_sq, .. } => sigma_star_sq.clone(),
        }
    }
}

/// Generic pattern shared by the float and the exact profile.
fn params_from<T, S>(kind: Kind, n: usize, m: usize, w: &[T], sum: S) -> MatrixParams<T>
where
    T: Clone + PartialOrd + Zero,
    S: Fn(&mut dyn Iterator<Item = T>) -> T,
{
    let max = |it: &mut dyn Iterator<Item = T>| {
        let mut best = T::zero();
        for v in it {
            if v > best {
                best = v;
            }
        }
        best
    };
    let star = max(&mut w.iter().cloned());
    let row = |i: usize| sum(&mut w[i * m..(i + 1) * m].iter().cloned());
    if kind.is_self_adjoint() {
        let sigma = max(&mut (0..n).map(row));
        let tilde = max(&mut (0..n).map(|i| sum(&mut w[i * m..(i + 1) * m].iter().cloned().chain(std::iter::once(w[i * m + i].clone())))));
        MatrixParams::SelfAdjoint { sigma_sq: sigma, sigma_tilde_sq: tilde, sigma_star_sq: star }
    } else {
        let col = |j: usize| sum(&mut (0..n).map(|i| w[i * m + j].clone()));
        let s1 = max(&mut (0..m).map(col));
        let s2 = max(&mut (0..n).map(row));
        MatrixParams::Rectangular { sigma1_sq: s1, sigma2_sq: s2, sigma_star_sq: star }
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(it: &mut dyn Iterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    kind: Kind,
    n: usize,
    m: usize,
    b: Vec<f64>,
}

impl VarianceProfile {
    pub fn new(kind: Kind, n: usize, m: usize, b: Vec<f64>) -> Result<Self> {
        validate_shape(kind, n, m, b.len())?;
        for (idx, &v) in b.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "entry ({}, {}) = {v} is not a finite nonnegative number",
                    idx / m,
                    idx % m
                )));
            }
        }
        if kind.is_self_adjoint() {
            for i in 0..n {
                for j in 0..i {
                    if b[i * m + j] != b[j * m + i] {
                        return Err(Error::InvalidProfile(format!("b is not symmetric at ({i}, {j})")));
                    }
                }
            }
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidProfile("all coefficients are zero".into()));
        }
        Ok(VarianceProfile { kind, n, m, b })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.m + j]
    }

    pub fn params(&self) -> MatrixParams<f64> {
        let w: Vec<f64> = self.b.iter().map(|v| v * v).collect();
        params_from(self.kind, self.n, self.m, &w, compensated_sum)
    }

    /// The m×n profile of the adjoint matrix (rectangular kind only changes).
    pub fn transpose(&self) -> VarianceProfile {
        let mut b = vec![0.0; self.b.len()];
        for i in 0..self.n {
            for j in 0..self.m {
                b[j * self.n + i] = self.b[i * self.m + j];
            }
        }
        VarianceProfile { kind: self.kind, n: self.m, m: self.n, b }
    }

    pub fn scaled(&self, s: f64) -> Result<VarianceProfile> {
        VarianceProfile::new(self.kind, self.n, self.m, self.b.iter().map(|v| v * s).collect())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawProfile<f64> = serde_json::from_str(s)?;
        VarianceProfile::new(raw.kind, raw.n, raw.m, raw.b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawProfile { kind: self.kind, n: self.n, m: self.m, b: self.b.clone() }).unwrap()
    }
}

fn validate_shape(kind: Kind, n: usize, m: usize, len: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidProfile("dimensions must be positive".into()));
    }
    if kind.is_self_adjoint() && n != m {
        return Err(Error::InvalidProfile(format!("{} profile must be square, got {n}x{m}", kind.name())));
    }
    if len != n * m {
        return Err(Error::InvalidProfile(format!("expected {} coefficients, got {len}", n * m)));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawProfile<T> {
    kind: Kind,
    n: usize,
    m: usize,
    b: Vec<T>,
}

/// Profile with exact rational squared coefficients `w_ij = b_ij²`.
///
/// Only the squares enter the moment computations, so profiles such as the
/// spiked model with irrational `b` are still exact here.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProfile {
    kind: Kind,
    n: usize,
    m: usize,
    w: Vec<BigRational>,
}

impl ExactProfile {
    pub fn from_weights(kind: Kind, n: usize, m: usize, w: Vec<BigRational>) -> Result<Self> {
        validate_shape(kind, n, m, w.len())?;
        if let Some(i) = w.iter().position(|v| v.is_negative()) {
            return Err(Error::InvalidProfile(format!("weight at ({}, {}) is negative", i / m, i % m)));
        }
        if kind.is_self_adjoint() {
            for i in 0..n {
                for j in 0..i {
                    if w[i * m + j] != w[j * m + i] {
                        return Err(Error::InvalidProfile(format!("b is not symmetric at ({i}, {j})")));
                    }
                }
            }
        }
        if w.iter().all(|v| v.is_zero()) {
            return Err(Error::InvalidProfile("all coefficients are zero".into()));
        }
        Ok(ExactProfile { kind, n, m, w })
    }

    pub fn from_b(kind: Kind, n: usize, m: usize, b: Vec<BigRational>) -> Result<Self> {
        if let Some(i) = b.iter().position(|v| v.is_negative()) {
            return Err(Error::InvalidProfile(format!("entry at ({}, {}) is negative", i / m.max(1), i % m.max(1))));
        }
        Self::from_weights(kind, n, m, b.iter().map(|v| v * v).collect())
    }

    pub fn ones(kind: Kind, n: usize, m: usize) -> Result<Self> {
        Self::from_weights(kind, n, m, vec![rational::int(1); n * m])
    }

    /// Loads a profile whose `b` entries are strings holding exact rationals.
    /// Float entries are rejected so that oracles never start from rounded data.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let raw: RawProfile<serde_json::Value> = serde_json::from_value(v)?;
        let mut b = Vec::with_capacity(raw.b.len());
        for (i, e) in raw.b.iter().enumerate() {
            match e {
                serde_json::Value::String(s) => b.push(rational::parse(s)?),
                serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => {
                    b.push(rational::parse(&n.to_string())?)
                }
                other => {
                    return Err(Error::InvalidProfile(format!(
                        "entry {i} must be an integer or a string rational for exact loading, got {other}"
                    )))
                }
            }
        }
        Self::from_b(raw.kind, raw.n, raw.m, b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn weights(&self) -> &[BigRational] {
        &self.w
    }
    pub fn weight(&self, i: usize, j: usize) -> &BigRational {
        &self.w[i * self.m + j]
    }

    pub fn params(&self) -> MatrixParams<BigRational> {
        params_from(self.kind, self.n, self.m, &self.w, |it| it.fold(BigRational::zero(), |a, b| a + b))
    }

    pub fn to_float(&self) -> Result<VarianceProfile> {
        VarianceProfile::new(self.kind, self.n, self.m, self.w.iter().map(|w| rational::to_f64(w).sqrt()).collect())
    }
}

/// Profile generators.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Iid { n: usize, m: usize },
    Band { n: usize, k: usize },
    BlockDiagonal { n: usize, m: usize, d1: usize, d2: usize },
    Spiked { n: usize, delta: f64 },
}

pub fn make_profile(kind: Kind, generator: &Generator) -> Result<VarianceProfile> {
    match *generator {
        Generator::Iid { n, m } => VarianceProfile::new(kind, n, m, vec![1.0; n * m]),
        Generator::Band { n, k } => {
            let mut b = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i.abs_diff(j) <= k {
                        b[i * n + j] = 1.0;
                    }
                }
            }
            VarianceProfile::new(kind, n, n, b)
        }
        Generator::BlockDiagonal { n, m, d1, d2 } => {
            let mask = block_mask(n, m, d1, d2)?;
            VarianceProfile::new(kind, n, m, mask.into_iter().map(|x| if x { 1.0 } else { 0.0 }).collect())
        }
        Generator::Spiked { n, delta } => {
            if kind.is_self_adjoint() {
                return Err(Error::InvalidProfile("the spiked profile is only defined for rectangular matrices".into()));
            }
            if n == 0 || !delta.is_finite() {
                return Err(Error::InvalidProfile("spiked profile needs n > 0 and finite delta".into()));
            }
            let base = (1.0 / n as f64).sqrt();
            let first = ((1.0 + delta * delta) / n as f64).sqrt();
            let mut b = vec![base; n * n];
            b[..n].fill(first);
            VarianceProfile::new(kind, n, n, b)
        }
    }
}

/// Exact counterpart of [`make_profile`]; `delta_sq` replaces `delta` so that
/// the spiked weights stay rational.
pub fn make_exact_profile(kind: Kind, generator: &Generator, delta_sq: Option<BigRational>) -> Result<ExactProfile> {
    let one = rational::int(1);
    let zero = rational::int(0);
    match *generator {
        Generator::Iid { n, m } => ExactProfile::ones(kind, n, m),
        Generator::Band { n, k } => {
            let w = (0..n * n).map(|x| if (x / n).abs_diff(x % n) <= k { one.clone() } else { zero.clone() }).collect();
            ExactProfile::from_weights(kind, n, n, w)
        }
        Generator::BlockDiagonal { n, m, d1, d2 } => {
            let w = block_mask(n, m, d1, d2)?.into_iter().map(|x| if x { one.clone() } else { zero.clone() }).collect();
            ExactProfile::from_weights(kind, n, m, w)
        }
        Generator::Spiked { n, delta } => {
            if kind.is_self_adjoint() {
                return Err(Error::InvalidProfile("the spiked profile is only defined for rectangular matrices".into()));
            }
            let d2 = match delta_sq {
                Some(d) => d,
                None => rational::from_f64(delta * delta)
                    .ok_or_else(|| Error::InvalidProfile("delta must be finite".into()))?,
            };
            let nn = rational::int(n as i64);
            let mut w = vec![&one / &nn; n * n];
            for x in w.iter_mut().take(n) {
                *x = (&one + &d2) / &nn;
            }
            ExactProfile::from_weights(kind, n, n, w)
        }
    }
}

fn block_mask(n: usize, m: usize, d1: usize, d2: usize) -> Result<Vec<bool>> {
    if d1 == 0 || d2 == 0 || !n.is_multiple_of(d1) {
        return Err(Error::DimensionError(format!("block rows d1 = {d1} must divide n = {n}")));
    }
    let blocks = n / d1;
    if m / d2 < blocks {
        return Err(Error::DimensionError(format!("need m/d2 >= n/d1, got m = {m}, d2 = {d2}, n/d1 = {blocks}")));
    }
    let mut mask = vec![false; n * m];
    for t in 0..blocks {
        for i in t * d1..(t + 1) * d1 {
            for j in t * d2..(t + 1) * d2 {
                mask[i * m + j] = true;
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn iid_params() {
        let p = make_profile(Kind::Rectangular, &Generator::Iid { n: 3, m: 5 }).unwrap();
        assert_eq!(p.params(), MatrixParams::Rectangular { sigma1_sq: 3.0, sigma2_sq: 5.0, sigma_star_sq: 1.0 });
        let s = make_profile(Kind::RealSymmetric, &Generator::Iid { n: 4, m: 4 }).unwrap();
        assert_eq!(s.params(), MatrixParams::SelfAdjoint { sigma_sq: 4.0, sigma_tilde_sq: 5.0, sigma_star_sq: 1.0 });
    }

    #[test]
    fn band_params() {
        let p = make_profile(Kind::Rectangular, &Generator::Band { n: 9, k: 2 }).unwrap();
        assert_eq!(p.params(), MatrixParams::Rectangular { sigma1_sq: 5.0, sigma2_sq: 5.0, sigma_star_sq: 1.0 });
        let id = make_profile(Kind::Hermitian, &Generator::Band { n: 5, k: 0 }).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(id.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn block_diagonal_pattern() {
        let p = make_profile(Kind::Rectangular, &Generator::BlockDiagonal { n: 4, m: 4, d1: 2, d2: 2 }).unwrap();
        let expected = [1., 1., 0., 0., 1., 1., 0., 0., 0., 0., 1., 1., 0., 0., 1., 1.];
        assert_eq!(p.b(), &expected);
        assert!(matches!(
            make_profile(Kind::Rectangular, &Generator::BlockDiagonal { n: 5, m: 4, d1: 2, d2: 2 }),
            Err(Error::DimensionError(_))
        ));
        assert!(matches!(
            make_profile(Kind::Rectangular, &Generator::BlockDiagonal { n: 4, m: 5, d1: 2, d2: 3 }),
            Err(Error::DimensionError(_))
        ));
    }

    #[test]
    fn spiked_weights() {
        let e = make_exact_profile(Kind::Rectangular, &Generator::Spiked { n: 4, delta: 1.0 }, None).unwrap();
        assert_eq!(e.weight(0, 3), &ratio(2, 4));
        assert_eq!(e.weight(1, 0), &ratio(1, 4));
        let f = make_profile(Kind::Rectangular, &Generator::Spiked { n: 4, delta: 1.0 }).unwrap();
        assert!((f.get(0, 2).powi(2) - 0.5).abs() < 1e-15);
        assert!((f.get(3, 2).powi(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(VarianceProfile::new(Kind::Rectangular, 1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(VarianceProfile::new(Kind::Rectangular, 1, 2, vec![1.0, -1.0]).is_err());
        assert!(VarianceProfile::new(Kind::Rectangular, 1, 2, vec![0.0, 0.0]).is_err());
        assert!(VarianceProfile::new(Kind::RealSymmetric, 2, 2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(VarianceProfile::new(Kind::Hermitian, 1, 2, vec![1.0, 2.0]).is_err());
        assert!(VarianceProfile::from_json_str(r#"{"kind":"rectangular","n":1,"m":2,"b":[1.0]}"#).is_err());
    }

    #[test]
    fn exact_loading_rejects_floats() {
        let ok = ExactProfile::from_json_str(r#"{"kind":"symmetric","n":2,"m":2,"b":["1/2","1","1",2]}"#).unwrap();
        assert_eq!(ok.weight(0, 0), &ratio(1, 4));
        assert_eq!(ok.weight(1, 1), &int(4));
        assert!(ExactProfile::from_json_str(r#"{"kind":"symmetric","n":1,"m":1,"b":[0.5]}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = make_profile(Kind::RealSymmetric, &Generator::Band { n: 3, k: 1 }).unwrap();
        assert_eq!(VarianceProfile::from_json_str(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn exact_params_match_float() {
        let e = ExactProfile::from_b(
            Kind::RealSymmetric,
            2,
            2,
            vec![ratio(1, 2), int(1), int(1), ratio(3, 2)],
        )
        .unwrap();
        let MatrixParams::SelfAdjoint { sigma_sq, sigma_tilde_sq, sigma_star_sq } = e.params() else { panic!() };
        assert_eq!(sigma_sq, ratio(13, 4));
        assert_eq!(sigma_tilde_sq, ratio(22, 4));
        assert_eq!(sigma_star_sq, ratio(9, 4));
    }
}
