//! Exact Gaussian moments by the Wick formula.
//!
//! For a fixed pairing, the sum over index assignments is a sum over closed
//! walks: letter `k` moves along an edge of the index graph, and the two
//! letters of a pair must use the same edge (in the orientation the model
//! dictates). The walk branches only at the first letter of each pair, so a
//! pairing costs at most `n^(p+1)` leaves instead of `n^(2p)`.
//!
//! Weights are scaled to integers by a common denominator so the inner loop
//! runs on `BigUint`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pairing::{enumerate_pairings_capped, Pairing, DEFAULT_P_MAX};
use crate::profile::{ExactProfile, Kind};

#[derive(Debug, Clone, PartialEq)]
pub struct PairingContribution {
    pub pairing: Pairing,
    /// Row-major `n × n` matrix: `H(π)` for self-adjoint models, `E(π)` for
    /// rectangular ones.
    pub matrix: Vec<BigRational>,
    pub n: usize,
    /// `(1/n) Σ_r matrix_rr`.
    pub trace: BigRational,
    /// `max_r matrix_rr`.
    pub max_diag: BigRational,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Walk {
    Symmetric,
    Hermitian,
    Rectangular,
}

struct Walker<'a> {
    walk: Walk,
    n: usize,
    m: usize,
    /// Scaled weights `w_ij · L`.
    w: Vec<BigUint>,
    partner: &'a [usize],
}

impl Walker<'_> {
    fn edge_weight(&self, x: usize, y: usize) -> BigUint {
        match self.walk {
            Walk::Symmetric if x == y => &self.w[x * self.m + y] * 2u32,
            _ => self.w[x * self.m + y].clone(),
        }
    }

    /// Sums path weights into `acc[start * n + end]`.
    fn run(&self, acc: &mut [BigUint]) {
        let len = self.partner.len();
        let mut edges = vec![(0usize, 0usize); len];
        for start in 0..self.n {
            self.step(0, start, start, &BigUint::one(), &mut edges, acc);
        }
        debug_assert!(len.is_multiple_of(2));
    }

    fn step(&self, k: usize, v: usize, start: usize, weight: &BigUint, edges: &mut [(usize, usize)], acc: &mut [BigUint]) {
        if weight.is_zero() {
            return;
        }
        if k == self.partner.len() {
            // Rectangular walks end on a row after an even number of letters.
            acc[start * self.n + v] += weight;
            return;
        }
        let q = self.partner[k];
        // Rectangular letters alternate E (row -> col) and E* (col -> row).
        let forward = k.is_multiple_of(2);
        if q > k {
            let targets = match self.walk {
                Walk::Rectangular if forward => self.m,
                Walk::Rectangular => self.n,
                _ => self.n,
            };
            for u in 0..targets {
                let (edge, w) = match self.walk {
                    Walk::Symmetric => {
                        let e = (v.min(u), v.max(u));
                        (e, self.edge_weight(e.0, e.1))
                    }
                    Walk::Hermitian => ((v, u), self.edge_weight(v, u)),
                    Walk::Rectangular => {
                        let e = if forward { (v, u) } else { (u, v) };
                        (e, self.edge_weight(e.0, e.1))
                    }
                };
                if w.is_zero() {
                    continue;
                }
                edges[k] = edge;
                self.step(k + 1, u, start, &(weight * w), edges, acc);
            }
        } else {
            let (x, y) = edges[q];
            let next = match self.walk {
                Walk::Symmetric => {
                    if v == x {
                        Some(y)
                    } else if v == y {
                        Some(x)
                    } else {
                        None
                    }
                }
                // The adjoint letter runs the stored directed edge backwards.
                Walk::Hermitian => (v == y).then_some(x),
                Walk::Rectangular => {
                    if forward {
                        (v == x).then_some(y)
                    } else {
                        (v == y).then_some(x)
                    }
                }
            };
            if let Some(u) = next {
                self.step(k + 1, u, start, weight, edges, acc);
            }
        }
    }
}

fn common_denominator(w: &[BigRational]) -> BigInt {
    w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn contribution(profile: &ExactProfile, walk: Walk, pi: &Pairing) -> PairingContribution {
    let (n, m) = (profile.n(), profile.m());
    let den = common_denominator(profile.weights());
    let w: Vec<BigUint> = profile
        .weights()
        .iter()
        .map(|x| (x.numer() * (&den / x.denom())).to_biguint().expect("weights are nonnegative"))
        .collect();
    let walker = Walker { walk, n, m, w, partner: pi.partners0() };
    let mut acc = vec![BigUint::zero(); n * n];
    walker.run(&mut acc);
    let scale = num_traits::pow(den, pi.p());
    let matrix: Vec<BigRational> = acc.into_iter().map(|x| BigRational::new(BigInt::from(x), scale.clone())).collect();
    let diag: Vec<&BigRational> = (0..n).map(|r| &matrix[r * n + r]).collect();
    let trace = diag.iter().fold(BigRational::zero(), |a, b| a + *b) / BigRational::from_integer(BigInt::from(n));
    let max_diag = diag.iter().copied().max().cloned().unwrap_or_else(BigRational::zero);
    PairingContribution { pairing: pi.clone(), matrix, n, trace, max_diag }
}

fn walk_for(kind: Kind) -> Walk {
    match kind {
        Kind::Rectangular => Walk::Rectangular,
        Kind::Hermitian => Walk::Hermitian,
        Kind::RealSymmetric => Walk::Symmetric,
    }
}

/// Per-pairing contributions for the model matching the profile kind. For a
/// rectangular profile this is the real model.
pub fn contributions(profile: &ExactProfile, p: usize) -> Result<Vec<PairingContribution>> {
    contributions_capped(profile, p, DEFAULT_P_MAX)
}

pub fn contributions_capped(profile: &ExactProfile, p: usize, p_max: usize) -> Result<Vec<PairingContribution>> {
    let walk = walk_for(profile.kind());
    let pairings: Vec<Pairing> = enumerate_pairings_capped(p, p_max)?.collect();
    Ok(pairings.par_iter().map(|pi| contribution(profile, walk, pi)).collect())
}

fn sum_traces(c: &[PairingContribution]) -> BigRational {
    c.iter().fold(BigRational::zero(), |a, x| a + &x.trace)
}

fn require(profile: &ExactProfile, kind: Kind) -> Result<()> {
    if profile.kind() != kind {
        return Err(Error::InvalidProfile(format!(
            "expected a {} profile, got {}",
            kind.name(),
            profile.kind().name()
        )));
    }
    Ok(())
}

/// `E tr X^{2p}` for the complex Hermitian model.
pub fn moment_hermitian(profile: &ExactProfile, p: usize) -> Result<BigRational> {
    require(profile, Kind::Hermitian)?;
    Ok(sum_traces(&contributions(profile, p)?))
}

/// `E tr X^{2p}` for the real symmetric model.
pub fn moment_symmetric(profile: &ExactProfile, p: usize) -> Result<BigRational> {
    require(profile, Kind::RealSymmetric)?;
    Ok(sum_traces(&contributions(profile, p)?))
}

/// `E tr (XX*)^p` for the real rectangular model.
pub fn moment_rect_real(profile: &ExactProfile, p: usize) -> Result<BigRational> {
    require(profile, Kind::Rectangular)?;
    Ok(sum_traces(&contributions(profile, p)?))
}

/// `E tr (ZZ*)^p` for an `n × m` matrix of iid standard complex Gaussians.
/// Only pairings that match odd with even positions contribute.
pub fn moment_rect_complex(n: usize, m: usize, p: usize) -> Result<BigRational> {
    let profile = ExactProfile::ones(Kind::Rectangular, n, m)?;
    let pairings: Vec<Pairing> = enumerate_pairings_capped(p, DEFAULT_P_MAX)?
        .filter(|pi| pi.partners0().iter().enumerate().all(|(k, &q)| k % 2 != q % 2))
        .collect();
    let parts: Vec<PairingContribution> =
        pairings.par_iter().map(|pi| contribution(&profile, Walk::Rectangular, pi)).collect();
    Ok(sum_traces(&parts))
}

/// Dispatches on the profile kind (real model for rectangular profiles).
pub fn moment(profile: &ExactProfile, p: usize) -> Result<BigRational> {
    Ok(sum_traces(&contributions(profile, p)?))
}
