//! Exact Wishart moment recursions and numerical checks of the moment bounds.
//!
//! Normalizations: for an `n × m` matrix with iid standard complex Gaussian
//! entries `Z`, `A_p = E Tr (ZZ*)^p / n^{p+1}`; `A′_p` is the same quantity for
//! the `(n-1) × (m-1)` minor rescaled to dimension `n`; `B_p` is the real
//! analogue of `A_p`, and `D_p = B_p − A′_p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pairing::catalan_chi;
use crate::rational::{self, int};

pub const DEFAULT_PMAX_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct WishartTable {
    pub n: usize,
    pub m: usize,
    pub c: BigRational,
    pub pmax: usize,
    pub a: Vec<BigRational>,
    pub a_prime: Vec<BigRational>,
    pub b: Vec<BigRational>,
    pub d: Vec<BigRational>,
    pub chi: Vec<BigRational>,
}

fn q(n: i64) -> BigRational {
    int(n)
}

/// `A_p` for `p = 0..=pmax` with the given `c` and `n`, using `shift` in place
/// of `c + 1` in the first coefficient (`c + 1` for `A`, `c + 1 − 2/n` for `A′`).
fn three_term(
    pmax: usize,
    a0: BigRational,
    a1: BigRational,
    shift: &BigRational,
    c: &BigRational,
    inv_n: &BigRational,
) -> Vec<BigRational> {
    let mut a = vec![a0, a1];
    let cm1_sq = (c - q(1)) * (c - q(1));
    for p in 1..pmax.max(1) {
        let pi = p as i64;
        let first = q(2) * shift * BigRational::new(BigInt::from(2 * pi + 1), BigInt::from(2 * pi + 4));
        let pn = q(pi) * inv_n;
        let second = (&cm1_sq - &pn * &pn) * BigRational::new(BigInt::from(pi - 1), BigInt::from(pi + 2));
        let next = first * &a[p] - second * &a[p - 1];
        a.push(next);
    }
    a.truncate(pmax + 1);
    a
}

pub fn build_table(n: usize, m: usize, pmax: usize) -> Result<WishartTable> {
    if n == 0 || m < n {
        return Err(Error::DimensionError(format!("need 1 <= n <= m, got n = {n}, m = {m}")));
    }
    if pmax > DEFAULT_PMAX_CAP {
        return Err(Error::CapExceeded { p: pmax, cap: DEFAULT_PMAX_CAP });
    }
    let c = BigRational::new(BigInt::from(m), BigInt::from(n));
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
    let one = q(1);

    let a = three_term(pmax, one.clone(), c.clone(), &(&c + &one), &c, &inv_n);
    let frac = &one - &inv_n;
    let a_prime = three_term(
        pmax,
        frac.clone(),
        &frac * (&c - &inv_n),
        &(&c + &one - q(2) * &inv_n),
        &c,
        &inv_n,
    );

    let inv_n2 = &inv_n * &inv_n;
    let cm1_sq = (&c - &one) * (&c - &one);
    let lead = &c + &one - &inv_n;
    // Coefficient of the second-order term shared by the B and D recursions.
    let tail = |p: usize| {
        let p = p as i64;
        &cm1_sq - q(4 * p * (p - 1) + 1) * &inv_n2
    };

    let mut b = vec![one.clone(), c.clone(), (&c + &one + &inv_n) * &c];
    for p in 2..pmax.max(2) {
        let pi = p as i64;
        let inhom = BigRational::new(BigInt::from(3), BigInt::from(pi - 1))
            * ((&c + &one - q(pi + 1) * &inv_n) * &a_prime[p] - &a_prime[p + 1]);
        let next = q(2) * &lead * &b[p] - tail(p) * &b[p - 1] + inhom;
        b.push(next);
    }
    b.truncate(pmax + 1);

    let mut d = vec![inv_n.clone(), &inv_n * &lead];
    for p in 1..pmax.max(1) {
        let pi = p as i64;
        let next = q(2) * &lead * &d[p] - tail(p) * &d[p - 1] - &inv_n * &a_prime[p]
            + q((3 * pi - 1) * (pi - 1)) * &inv_n2 * &a_prime[p - 1];
        d.push(next);
    }
    d.truncate(pmax + 1);

    for p in 0..=pmax {
        if b[p] != &d[p] + &a_prime[p] {
            return Err(Error::InvalidConfig(format!(
                "internal inconsistency: B_{p} differs from D_{p} + A'_{p} for n = {n}, m = {m}"
            )));
        }
    }

    let chi = (0..=pmax).map(catalan_chi).collect();
    Ok(WishartTable { n, m, c, pmax, a, a_prime, b, d, chi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Small,
    Large,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WishartProofParams {
    pub p: usize,
    pub lambda: f64,
    pub lambda_bar: f64,
    pub mu: f64,
    pub mu_bar: f64,
    /// `λλ̄ = (c−1)² − p²/n²`, exact.
    pub lambda_product: BigRational,
    /// `μμ̄ = (c−1)² − 4p²/n²`, exact.
    pub mu_product: BigRational,
    pub regime: Regime,
}

impl WishartTable {
    /// `K_p = (A_{p+1}/A_p)(χ_p/χ_{p+1})` for `p = 1..pmax-1`; index 0 unused.
    pub fn k_ratios(&self) -> Vec<BigRational> {
        let mut k = vec![BigRational::zero()];
        for p in 1..self.pmax {
            k.push(&self.a[p + 1] / &self.a[p] * (&self.chi[p] / &self.chi[p + 1]));
        }
        k
    }

    /// `K_p` from its own recursion, starting at `K_1 = 2(c + 1)`.
    pub fn k_recursion(&self) -> Vec<BigRational> {
        let one = q(1);
        let mut k = vec![BigRational::zero()];
        if self.pmax >= 2 {
            k.push(q(2) * (&self.c + &one));
        }
        let inv_n = BigRational::new(BigInt::one(), BigInt::from(self.n));
        for p in 2..self.pmax {
            let pi = p as i64;
            let coef = &one - BigRational::new(BigInt::from(3), BigInt::from(4 * pi * pi - 1));
            let pn = q(pi) * &inv_n;
            let lb = (&self.c - &one) * (&self.c - &one) - &pn * &pn;
            let next = q(2) * (&self.c + &one) - coef * lb / &k[p - 1];
            k.push(next);
        }
        k
    }

    pub fn proof_params(&self, p: usize) -> WishartProofParams {
        let c = rational::to_f64(&self.c);
        let pn = p as f64 / self.n as f64;
        let s = (4.0 * c + pn * pn).sqrt();
        let t = 2.0 * (c + pn * pn).sqrt();
        let one = q(1);
        let pn_q = BigRational::new(BigInt::from(p), BigInt::from(self.n));
        let cm1_sq = (&self.c - &one) * (&self.c - &one);
        let lambda_product = &cm1_sq - &pn_q * &pn_q;
        let mu_product = &cm1_sq - q(4) * &pn_q * &pn_q;
        let regime = if q(p as i64) < (&self.c - &one) * q(self.n as i64) { Regime::Small } else { Regime::Large };
        WishartProofParams {
            p,
            lambda: c + 1.0 + s,
            lambda_bar: c + 1.0 - s,
            mu: c + 1.0 + t,
            mu_bar: c + 1.0 - t,
            lambda_product,
            mu_product,
            regime,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckReport {
    pub n: usize,
    pub m: usize,
    /// Natural logs of the ratios, entry `p - 1` for `p = 1..=pmax`. Logs keep
    /// ratios far below `f64::MIN_POSITIVE` distinguishable from zero.
    ///
    /// `A_p / [(√c+1)^{2p} (1 + 2p²/(c^{3/2} n²))^p c^{3/4} p^{-3/2}]`.
    pub log_complex_ratios: Vec<f64>,
    /// `B_p / [(√c+1)^{2p} (1 + 8p²/(c^{3/2} n²))^p (c^{3/4} p^{-3/2} + 1/n)]`.
    pub log_real_ratios: Vec<f64>,
    /// `D_p / [(1/n)(√c+1)^{2p}(1 + s p²/(c^{3/2} n²))^p]` with `s = 1` for
    /// `2p < (c−1)n` and `s = 8` otherwise. `-inf` where `D_p = 0`.
    pub log_d_ratios: Vec<f64>,
    pub max_complex: f64,
    pub max_real: f64,
    pub max_d: f64,
    pub k_lemma_checked: usize,
    /// `(k, p, which)` for every failed `K_k` inequality (`which` is 1 for the
    /// `2√c/k²` form, 2 for the `3/(2k)` form).
    pub k_lemma_violations: Vec<(usize, usize, u8)>,
    /// Indices where `D_p < 0` or `A′_p > A_p` or `A_p > B_p`.
    pub order_violations: Vec<usize>,
}

/// Relative slack allowed in the `K_k` inequalities.
pub const K_LEMMA_SLACK: f64 = 1e-12;

pub fn verify_bounds(t: &WishartTable) -> BoundCheckReport {
    let c = rational::to_f64(&t.c);
    let n = t.n as f64;
    let ln_base = 2.0 * (c.sqrt() + 1.0).ln();
    let c32 = c.powf(1.5);
    let mut log_complex_ratios = Vec::new();
    let mut log_real_ratios = Vec::new();
    let mut log_d_ratios = Vec::new();
    for p in 1..=t.pmax {
        let pf = p as f64;
        let growth = |s: f64| pf * ln_base + pf * (s * pf * pf / (c32 * n * n)).ln_1p();
        let ln_cplx = growth(2.0) + 0.75 * c.ln() - 1.5 * pf.ln();
        log_complex_ratios.push(rational::ln(&t.a[p]) - ln_cplx);
        let ln_real = growth(8.0) + (c.powf(0.75) / pf.powf(1.5) + 1.0 / n).ln();
        log_real_ratios.push(rational::ln(&t.b[p]) - ln_real);
        let s = if 2.0 * pf < (c - 1.0) * n { 1.0 } else { 8.0 };
        let ln_d = growth(s) - n.ln();
        log_d_ratios.push(rational::ln(&t.d[p]) - ln_d);
    }

    let k = t.k_ratios();
    let mut k_lemma_checked = 0;
    let mut k_lemma_violations = Vec::new();
    for p in 1..t.pmax {
        let pp = t.proof_params(p);
        if pp.regime != Regime::Small {
            continue;
        }
        for (kk, kv) in k.iter().enumerate().take(p + 1).skip(1) {
            let kv = rational::to_f64(kv);
            let kf = kk as f64;
            let b1 = (1.0 + 2.0 * c.sqrt() / (kf * kf)) * pp.lambda;
            let b2 = (1.0 + 1.5 / kf) * pp.lambda;
            k_lemma_checked += 1;
            if kv > b1 * (1.0 + K_LEMMA_SLACK) {
                k_lemma_violations.push((kk, p, 1));
            }
            if kv > b2 * (1.0 + K_LEMMA_SLACK) {
                k_lemma_violations.push((kk, p, 2));
            }
        }
    }

    let order_violations = (0..=t.pmax)
        .filter(|&p| !rational::is_nonnegative(&t.d[p]) || t.a_prime[p] > t.a[p] || t.a[p] > t.b[p])
        .collect();

    let fmax = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    BoundCheckReport {
        n: t.n,
        m: t.m,
        max_complex: fmax(&log_complex_ratios).exp(),
        max_real: fmax(&log_real_ratios).exp(),
        max_d: fmax(&log_d_ratios).exp(),
        log_complex_ratios,
        log_real_ratios,
        log_d_ratios,
        k_lemma_checked,
        k_lemma_violations,
        order_violations,
    }
}

/// Moments of the Marchenko–Pastur law with ratio `c`, normalized like `A_p`
/// with the `1/n^p` scale removed: the `n → ∞` limit of the `A_p` recursion.
pub fn mp_moment_exact(c: &BigRational, p: usize) -> BigRational {
    let one = q(1);
    let mut a = vec![one.clone(), c.clone()];
    let cm1_sq = (c - &one) * (c - &one);
    for k in 1..p.max(1) {
        let ki = k as i64;
        let next = q(2) * (c + &one) * BigRational::new(BigInt::from(2 * ki + 1), BigInt::from(2 * ki + 4)) * &a[k]
            - &cm1_sq * BigRational::new(BigInt::from(ki - 1), BigInt::from(ki + 2)) * &a[k - 1];
        a.push(next);
    }
    a[p].clone()
}

pub fn mp_moment(c: f64, p: usize) -> Result<f64> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!("mp_moment needs finite c >= 1, got {c}")));
    }
    let cq = rational::from_f64(c).expect("finite");
    Ok(rational::to_f64(&mp_moment_exact(&cq, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn square_two_by_two() {
        let t = build_table(2, 2, 6).unwrap();
        assert_eq!(t.a[0], int(1));
        assert_eq!(t.a[1], int(1));
        assert_eq!(t.a[2], int(2));
        assert_eq!(t.b[2], ratio(5, 2));
        assert_eq!(t.d[0], ratio(1, 2));
        assert_eq!(t.d[1], ratio(3, 4));
        assert_eq!(t.a_prime[0], ratio(1, 2));
        assert_eq!(t.a_prime[1], ratio(1, 2) * (int(1) - ratio(1, 2)));
    }

    #[test]
    fn a_prime_is_rescaled_minor() {
        // A′_p(n, m) = ((n-1)/n)^{p+1} A_p(n-1, m-1).
        for (n, m) in [(2, 3), (3, 3), (3, 5), (4, 9)] {
            let t = build_table(n, m, 12).unwrap();
            let minor = build_table(n - 1, m - 1, 12).unwrap();
            let f = ratio(n as i64 - 1, n as i64);
            for p in 0..=12 {
                assert_eq!(t.a_prime[p], rational::pow(&f, p as u32 + 1) * &minor.a[p], "n={n} m={m} p={p}");
            }
        }
        let t = build_table(1, 4, 8).unwrap();
        assert!(t.a_prime.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn k_recursion_matches_ratios() {
        for (n, m) in [(3, 3), (5, 12), (10, 25)] {
            let t = build_table(n, m, 40).unwrap();
            assert_eq!(t.k_ratios(), t.k_recursion());
            assert_eq!(t.k_ratios()[1], int(2) * (&t.c + int(1)));
        }
    }

    #[test]
    fn proof_params_identities() {
        let t = build_table(10, 30, 20).unwrap();
        for p in 1..20 {
            let pp = t.proof_params(p);
            let alt = (&t.c + int(1)) * (&t.c + int(1)) - (int(4) * &t.c + ratio(p as i64 * p as i64, 100));
            assert_eq!(pp.lambda_product, alt);
            let lp = rational::to_f64(&pp.lambda_product);
            assert!((pp.lambda * pp.lambda_bar - lp).abs() <= 1e-12 * (1.0 + lp.abs()));
            let c = rational::to_f64(&t.c);
            assert!((pp.lambda + pp.lambda_bar - 2.0 * (c + 1.0)).abs() < 1e-12);
            let mp = rational::to_f64(&pp.mu_product);
            assert!((pp.mu * pp.mu_bar - mp).abs() <= 1e-12 * (1.0 + mp.abs()));
            if pp.regime == Regime::Small {
                assert!(pp.lambda_bar > 0.0);
            }
        }
    }

    #[test]
    fn mp_examples() {
        assert_eq!(mp_moment(1.0, 1).unwrap(), 1.0);
        assert_eq!(mp_moment(1.0, 2).unwrap(), 2.0);
        assert_eq!(mp_moment(2.0, 2).unwrap(), 6.0);
        assert_eq!(mp_moment(1.0, 5).unwrap(), 42.0);
        // Large-n table values approach the limit.
        let t = build_table(1_000_000, 2_000_000, 6).unwrap();
        let lim = mp_moment_exact(&int(2), 6);
        let rel = rational::to_f64(&((&t.a[6] - &lim) / &lim));
        assert!(rel.abs() < 1e-9);
        assert!(mp_moment(0.5, 2).is_err());
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(build_table(3, 2, 4), Err(Error::DimensionError(_))));
        assert!(matches!(build_table(0, 2, 4), Err(Error::DimensionError(_))));
        assert!(build_table(2, 2, 0).unwrap().a.len() == 1);
    }
}
