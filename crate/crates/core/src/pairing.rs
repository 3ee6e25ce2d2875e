//! Pairings of `[2p]`, their crossings, and Catalan quantities.
//!
//! Indices in the public API are 1-based, matching the usual notation
//! `{1, ..., 2p}`. Storage is 0-based.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::rational;

pub const DEFAULT_P_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pairing {
    partner: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Crossing {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taxonomy {
    SelfAdjoint,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingClass {
    SymType1,
    SymType2,
    RectType1,
    RectType2,
    RectType3,
}

impl Pairing {
    /// Builds a pairing from 1-based pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Pairing> {
        let len = 2 * pairs.len();
        let mut partner = vec![usize::MAX; len];
        for &(a, b) in pairs {
            if a == b || a == 0 || b == 0 || a > len || b > len {
                return Err(Error::InvalidConfig(format!("invalid pair {{{a}, {b}}}")));
            }
            for x in [a, b] {
                if partner[x - 1] != usize::MAX {
                    return Err(Error::InvalidConfig(format!("index {x} appears twice")));
                }
            }
            partner[a - 1] = b - 1;
            partner[b - 1] = a - 1;
        }
        Ok(Pairing { partner })
    }

    /// Builds a pairing from a 0-based partner array.
    pub fn from_partner(partner: Vec<usize>) -> Result<Pairing> {
        let len = partner.len();
        if !len.is_multiple_of(2) {
            return Err(Error::InvalidConfig("pairing needs an even number of points".into()));
        }
        for (k, &q) in partner.iter().enumerate() {
            if q >= len || q == k || partner[q] != k {
                return Err(Error::InvalidConfig(format!("partner array is not a fixed-point-free involution at {k}")));
            }
        }
        Ok(Pairing { partner })
    }

    pub fn p(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// 1-based partner of the 1-based index `k`.
    pub fn partner(&self, k: usize) -> usize {
        self.partner[k - 1] + 1
    }

    /// 0-based partner array.
    pub fn partners0(&self) -> &[usize] {
        &self.partner
    }

    /// Pairs `(a, b)` with `a < b`, 1-based, sorted by `a`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len()).filter(|&k| k < self.partner[k]).map(|k| (k + 1, self.partner[k] + 1)).collect()
    }

    pub fn is_noncrossing(&self) -> bool {
        let mut stack = Vec::new();
        for k in 0..self.len() {
            let q = self.partner[k];
            if q > k {
                stack.push(k);
            } else if stack.pop() != Some(q) {
                return false;
            }
        }
        true
    }

    /// All crossings in lexicographic order of `(i, j, k, l)`.
    pub fn crossings(&self) -> Vec<Crossing> {
        let mut out = Vec::new();
        let n = self.len();
        for i in 0..n {
            let k = self.partner[i];
            if k < i {
                continue;
            }
            for j in i + 1..k {
                let l = self.partner[j];
                if l > k {
                    out.push(Crossing { i: i + 1, j: j + 1, k: k + 1, l: l + 1 });
                }
            }
        }
        out.sort();
        out
    }

    fn is_crossing(&self, x: &Crossing) -> bool {
        let n = self.len();
        x.i >= 1
            && x.i < x.j
            && x.j < x.k
            && x.k < x.l
            && x.l <= n
            && self.partner(x.i) == x.k
            && self.partner(x.j) == x.l
    }

    /// Whether some pair has exactly one endpoint in the open set `(i,j) ∪ (k,l)`.
    pub fn has_straddler(&self, x: &Crossing) -> bool {
        let inside = |a: usize| (x.i < a && a < x.j) || (x.k < a && a < x.l);
        (1..=self.len()).any(|a| inside(a) && !inside(self.partner(a)))
    }

    pub fn classify_crossing(&self, x: &Crossing, taxonomy: Taxonomy) -> Result<CrossingClass> {
        if !self.is_crossing(x) {
            return Err(Error::NotACrossing(format!("{x} is not a crossing of {self}")));
        }
        let straddled = self.has_straddler(x);
        Ok(match taxonomy {
            Taxonomy::SelfAdjoint => {
                if straddled {
                    CrossingClass::SymType1
                } else {
                    CrossingClass::SymType2
                }
            }
            Taxonomy::Rectangular => {
                if x.i % 2 != x.k % 2 || x.j % 2 != x.l % 2 {
                    CrossingClass::RectType1
                } else if straddled {
                    CrossingClass::RectType2
                } else {
                    CrossingClass::RectType3
                }
            }
        })
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, (a, b)) in self.pairs().into_iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{{a},{b}}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.i, self.j, self.k, self.l)
    }
}

/// Streaming enumeration of all pairings of `[2p]`.
///
/// Order: the smallest unpaired index is paired first, with its partner taken
/// in ascending order. Internally a mixed-radix counter whose digit `t` has
/// radix `2p - 2t - 1`.
pub struct Pairings {
    p: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Pairings {
    fn decode(&self) -> Pairing {
        let n = 2 * self.p;
        let mut free: Vec<usize> = (0..n).collect();
        let mut partner = vec![0; n];
        for &d in &self.digits {
            let a = free.remove(0);
            let b = free.remove(d);
            partner[a] = b;
            partner[b] = a;
        }
        Pairing { partner }
    }
}

impl Iterator for Pairings {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.done {
            return None;
        }
        let out = self.decode();
        let mut t = self.digits.len();
        loop {
            if t == 0 {
                self.done = true;
                break;
            }
            t -= 1;
            let radix = 2 * self.p - 2 * t - 1;
            if self.digits[t] + 1 < radix {
                self.digits[t] += 1;
                break;
            }
            self.digits[t] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_pairings(p: usize) -> Result<Pairings> {
    enumerate_pairings_capped(p, DEFAULT_P_MAX)
}

pub fn enumerate_pairings_capped(p: usize, p_max: usize) -> Result<Pairings> {
    if p > p_max {
        return Err(Error::CapExceeded { p, cap: p_max });
    }
    Ok(Pairings { p, digits: vec![0; p], done: false })
}

/// `(2p - 1)!!`, the number of pairings of `[2p]`.
pub fn pairing_count(p: usize) -> BigUint {
    (1..=p).fold(BigUint::one(), |acc, k| acc * BigUint::from(2 * k - 1))
}

/// Catalan number `C_p = binom(2p, p) / (p + 1)`.
pub fn catalan(p: usize) -> BigUint {
    let mut c = BigUint::one();
    for k in 0..p {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

/// `χ_p = 4^{-p} C_p`, via `χ_{p+1} = (2p+1)/(2p+4) χ_p`.
pub fn catalan_chi(p: usize) -> BigRational {
    let mut chi = BigRational::one();
    for k in 0..p {
        chi *= rational::ratio(2 * k as i64 + 1, 2 * k as i64 + 4);
    }
    chi
}

/// Float version of [`catalan_chi`] for large `p`, computed by the same
/// recursion in floating point.
pub fn catalan_chi_f64(p: usize) -> f64 {
    (0..p).fold(1.0, |chi, k| chi * (2 * k + 1) as f64 / (2 * k + 4) as f64)
}
