//! Crossing reductions and the extremal moment bounds they produce.
//!
//! A pairing of `[2p]` is handled as a word: letter `k` carries the label of
//! its pair and, for rectangular words, whether it is an adjoint letter
//! (`E*`). Each reduction rewrites the word at its lexicographically smallest
//! crossing `a < b < c < d` with segments `M0 a M1 b M2 c M3 d M4`, exactly as
//! the matrix identities dictate, and bounds the removed coefficients by the
//! matrix parameters. Reduced words are memoized by their canonical form.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pairing::{enumerate_pairings, enumerate_pairings_capped, Pairing};
use crate::profile::{ExactProfile, Kind, MatrixParams};
use crate::rational;

pub const DEFAULT_REDUCE_CAP: usize = 5;

/// Repeatedly removes the smallest crossing following the Hermitian
/// reordering rule and counts the removals.
pub fn genus_exponent(pi: &Pairing) -> usize {
    let mut partner: Vec<usize> = pi.partners0().to_vec();
    let mut ell = 0;
    loop {
        let p = Pairing::from_partner(partner.clone()).expect("reduction keeps a valid pairing");
        let Some(x) = p.crossings().into_iter().next() else {
            return ell;
        };
        let len = partner.len();
        // Rotate so that i becomes 1. The crossing pairs are then {1, l}, {k, m}.
        let rot = |t: usize| (t + len - x.i) % len + 1;
        let (k, l, m) = (rot(x.j), rot(x.k), rot(x.l));
        let order: Vec<usize> = (l + 1..m).chain(k + 1..l).chain(2..k).chain(m + 1..=len).collect();
        // old rotated position -> new 0-based position
        let mut new_pos = vec![usize::MAX; len + 1];
        for (t, &old) in order.iter().enumerate() {
            new_pos[old] = t;
        }
        let mut next = vec![0usize; order.len()];
        for &old in &order {
            // rotated position `old` corresponds to original 0-based index
            let orig = (old - 1 + x.i - 1) % len;
            let mate = rot(partner[orig] + 1);
            next[new_pos[old]] = new_pos[mate];
        }
        partner = next;
        ell += 1;
    }
}

/// Coefficient table of an extremal moment bound.
///
/// * Hermitian: `coeffs[(ℓ, 0)]` multiplies `σ^{2p-4ℓ} σ*^{4ℓ}`.
/// * RealSymmetric: `coeffs[(k, l)]` multiplies `σ̃^{2k} σ^{2l} σ*^{2(p-k-l)}`.
/// * Rectangular: `coeffs[(k, l)]` multiplies `σ₁^{2k} σ₂^{2l} σ*^{2(p-k-l)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPolynomial {
    pub p: usize,
    pub taxonomy: Kind,
    pub coeffs: BTreeMap<(u32, u32), BigUint>,
}

impl MomentPolynomial {
    pub fn mass(&self) -> BigUint {
        self.coeffs.values().sum()
    }

    /// Evaluates at squared parameters. For Hermitian tables `x = σ²` and `y`
    /// is ignored; otherwise `(x, y)` are the first two squared parameters.
    pub fn evaluate(&self, x: &BigRational, y: &BigRational, star: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        for ((k, l), c) in &self.coeffs {
            let c = BigRational::from_integer(BigInt::from(c.clone()));
            let term = match self.taxonomy {
                Kind::Hermitian => {
                    c * rational::pow(x, self.p as u32 - 2 * k) * rational::pow(star, 2 * k)
                }
                _ => {
                    c * rational::pow(x, *k)
                        * rational::pow(y, *l)
                        * rational::pow(star, self.p as u32 - k - l)
                }
            };
            total += term;
        }
        total
    }

    pub fn evaluate_f64(&self, x: f64, y: f64, star: f64) -> f64 {
        let conv = |v: f64| rational::from_f64(v).expect("finite parameter");
        rational::to_f64(&self.evaluate(&conv(x), &conv(y), &conv(star)))
    }
}

/// `Σ_π σ^{2p-4ℓ(π)} σ*^{4ℓ(π)}` as an ℓ-histogram over all pairings.
pub fn hermitian_polynomial(p: usize) -> Result<MomentPolynomial> {
    let mut coeffs = BTreeMap::new();
    for pi in enumerate_pairings(p)? {
        *coeffs.entry((genus_exponent(&pi) as u32, 0)).or_insert_with(BigUint::zero) += 1u32;
    }
    Ok(MomentPolynomial { p, taxonomy: Kind::Hermitian, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Letter {
    pair: u8,
    adj: bool,
}

type Word = Vec<Letter>;

/// Monomials keyed by exponents of (first, second, star) squared parameters.
type Poly = BTreeMap<[u32; 3], BigUint>;

fn unit() -> Poly {
    let mut p = Poly::new();
    p.insert([0, 0, 0], BigUint::one());
    p
}

fn add_scaled(acc: &mut Poly, src: &Poly, shift: [u32; 3]) {
    for (e, c) in src {
        let key = [e[0] + shift[0], e[1] + shift[1], e[2] + shift[2]];
        *acc.entry(key).or_insert_with(BigUint::zero) += c;
    }
}

fn product(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let key = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            *out.entry(key).or_insert_with(BigUint::zero) += ca * cb;
        }
    }
    out
}

struct Segments {
    a: usize,
    b: usize,
    c: usize,
    d: usize,
}

impl Segments {
    fn m0<'w>(&self, w: &'w [Letter]) -> &'w [Letter] {
        &w[..self.a]
    }
    fn m1<'w>(&self, w: &'w [Letter]) -> &'w [Letter] {
        &w[self.a + 1..self.b]
    }
    fn m2<'w>(&self, w: &'w [Letter]) -> &'w [Letter] {
        &w[self.b + 1..self.c]
    }
    fn m3<'w>(&self, w: &'w [Letter]) -> &'w [Letter] {
        &w[self.c + 1..self.d]
    }
    fn m4<'w>(&self, w: &'w [Letter]) -> &'w [Letter] {
        &w[self.d + 1..]
    }
    fn inside(&self, x: usize) -> bool {
        (self.a < x && x < self.b) || (self.c < x && x < self.d)
    }
}

fn partners(w: &[Letter]) -> Vec<usize> {
    let mut first: HashMap<u8, usize> = HashMap::new();
    let mut out = vec![0; w.len()];
    for (t, l) in w.iter().enumerate() {
        if let Some(s) = first.remove(&l.pair) {
            out[s] = t;
            out[t] = s;
        } else {
            first.insert(l.pair, t);
        }
    }
    debug_assert!(first.is_empty(), "every label appears twice");
    out
}

fn smallest_crossing(partner: &[usize]) -> Option<Segments> {
    for a in 0..partner.len() {
        let c = partner[a];
        if c < a {
            continue;
        }
        for b in a + 1..c {
            if partner[b] > c {
                return Some(Segments { a, b, c, d: partner[b] });
            }
        }
    }
    None
}

/// Lexicographically smallest pair with exactly one endpoint inside the
/// crossing's open intervals, returned as (inside endpoint, outside endpoint).
fn smallest_straddler(partner: &[usize], s: &Segments) -> Option<(usize, usize)> {
    (0..partner.len())
        .filter(|&x| x < partner[x])
        .find(|&x| s.inside(x) != s.inside(partner[x]))
        .map(|x| if s.inside(x) { (x, partner[x]) } else { (partner[x], x) })
}

struct Reducer {
    /// Whether the adjoint flips letter orientation (rectangular words).
    oriented: bool,
    memo: HashMap<Vec<u8>, Poly>,
}

impl Reducer {
    fn new(oriented: bool) -> Self {
        Reducer { oriented, memo: HashMap::new() }
    }

    fn adjoint(&self, seg: &[Letter]) -> Word {
        seg.iter().rev().map(|l| Letter { pair: l.pair, adj: l.adj ^ self.oriented }).collect()
    }

    fn key(w: &[Letter]) -> Vec<u8> {
        let mut map: HashMap<u8, u8> = HashMap::new();
        w.iter()
            .map(|l| {
                let next = map.len() as u8;
                let id = *map.entry(l.pair).or_insert(next);
                (id << 1) | l.adj as u8
            })
            .collect()
    }

    fn reduce(&mut self, w: &[Letter]) -> Poly {
        if w.is_empty() {
            return unit();
        }
        let key = Self::key(w);
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let out = if self.oriented { self.reduce_rect(w) } else { self.reduce_sym(w) };
        self.memo.insert(key, out.clone());
        out
    }

    /// Splits off the trace `Tr[M1* M3]` and the outer word `M0 M2* M4`.
    fn trace_split(&self, w: &[Letter], s: &Segments) -> (Word, Word) {
        let mut tr = self.adjoint(s.m1(w));
        tr.extend_from_slice(s.m3(w));
        let mut outer = s.m0(w).to_vec();
        outer.extend(self.adjoint(s.m2(w)));
        outer.extend_from_slice(s.m4(w));
        (tr, outer)
    }

    /// Position of an original letter index inside the trace word / outer word.
    fn trace_index(s: &Segments, x: usize) -> usize {
        if x < s.b {
            // M1 is reversed in M1*.
            s.b - 1 - x
        } else {
            (s.b - s.a - 1) + (x - s.c - 1)
        }
    }

    fn outer_index(s: &Segments, x: usize) -> usize {
        if x < s.a {
            x
        } else if x < s.c {
            s.a + (s.c - 1 - x)
        } else {
            s.a + (s.c - s.b - 1) + (x - s.d - 1)
        }
    }

    /// The straddler replacement: the trace word rotated to start after the
    /// letter `e`, substituted for the letter `f` in the outer word.
    fn substitute(&self, w: &[Letter], s: &Segments, e: usize, f: usize, adjoint: bool) -> Word {
        let (tr, outer) = self.trace_split(w, s);
        let ie = Self::trace_index(s, e);
        let jf = Self::outer_index(s, f);
        debug_assert_eq!(tr[ie].pair, w[e].pair);
        debug_assert_eq!(outer[jf].pair, w[f].pair);
        let mut rot: Word = tr[ie + 1..].to_vec();
        rot.extend_from_slice(&tr[..ie]);
        let rot = if adjoint { self.adjoint(&rot) } else { rot };
        let mut out = outer[..jf].to_vec();
        out.extend(rot);
        out.extend_from_slice(&outer[jf + 1..]);
        out
    }

    fn concat(parts: &[&[Letter]]) -> Word {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }

    fn reduce_sym(&mut self, w: &[Letter]) -> Poly {
        let partner = partners(w);
        let Some(s) = smallest_crossing(&partner) else {
            let mut p = Poly::new();
            p.insert([(w.len() / 2) as u32, 0, 0], BigUint::one());
            return p;
        };
        let (m0, m1, m2, m3, m4) = (s.m0(w), s.m1(w), s.m2(w), s.m3(w), s.m4(w));
        let (m1a, m2a, m3a) = (self.adjoint(m1), self.adjoint(m2), self.adjoint(m3));
        let mut out = Poly::new();
        for t in [
            Self::concat(&[m0, m3, m2, m1, m4]),
            Self::concat(&[m0, m3, &m1a, &m2a, m4]),
            Self::concat(&[m0, &m2a, &m3a, m1, m4]),
        ] {
            let r = self.reduce(&t);
            add_scaled(&mut out, &r, [0, 0, 2]);
        }
        match smallest_straddler(&partner, &s) {
            Some((e, f)) => {
                for adjoint in [false, true] {
                    let t = self.substitute(w, &s, e, f, adjoint);
                    let r = self.reduce(&t);
                    add_scaled(&mut out, &r, [0, 0, 3]);
                }
            }
            None => {
                let (tr, outer) = self.trace_split(w, &s);
                let r = product(&self.reduce(&tr), &self.reduce(&outer));
                add_scaled(&mut out, &r, [0, 1, 1]);
            }
        }
        out
    }

    fn reduce_rect(&mut self, w: &[Letter]) -> Poly {
        let partner = partners(w);
        let Some(s) = smallest_crossing(&partner) else {
            let mut k = 0;
            let mut l = 0;
            for (t, letter) in w.iter().enumerate() {
                if t < partner[t] {
                    if letter.adj {
                        k += 1;
                    } else {
                        l += 1;
                    }
                }
            }
            let mut p = Poly::new();
            p.insert([k, l, 0], BigUint::one());
            return p;
        };
        let (m0, m1, m2, m3, m4) = (s.m0(w), s.m1(w), s.m2(w), s.m3(w), s.m4(w));
        let same_ac = w[s.a].adj == w[s.c].adj;
        let same_bd = w[s.b].adj == w[s.d].adj;
        let mut out = Poly::new();
        if !same_ac || !same_bd {
            let t = match (same_ac, same_bd) {
                (true, false) => Self::concat(&[m0, &self.adjoint(m2), &self.adjoint(m3), m1, m4]),
                (false, true) => Self::concat(&[m0, m3, &self.adjoint(m1), &self.adjoint(m2), m4]),
                _ => Self::concat(&[m0, m3, m2, m1, m4]),
            };
            let r = self.reduce(&t);
            add_scaled(&mut out, &r, [0, 0, 2]);
            return out;
        }
        match smallest_straddler(&partner, &s) {
            Some((e, f)) => {
                let (tr, outer) = self.trace_split(w, &s);
                let same = tr[Self::trace_index(&s, e)].adj == outer[Self::outer_index(&s, f)].adj;
                let t = self.substitute(w, &s, e, f, same);
                let r = self.reduce(&t);
                add_scaled(&mut out, &r, [0, 0, 3]);
            }
            None => {
                let (tr, outer) = self.trace_split(w, &s);
                let r = product(&self.reduce(&tr), &self.reduce(&outer));
                // Summing the b/d index over rows gives a column sum (σ₁²) when
                // those letters are E, a row sum (σ₂²) when they are E*.
                let shift = if w[s.b].adj { [0, 1, 1] } else { [1, 0, 1] };
                add_scaled(&mut out, &r, shift);
            }
        }
        out
    }
}

fn word_of(pi: &Pairing, oriented: bool) -> Word {
    let mut label = vec![0u8; pi.len()];
    for (t, (a, b)) in pi.pairs().into_iter().enumerate() {
        label[a - 1] = t as u8;
        label[b - 1] = t as u8;
    }
    label.into_iter().enumerate().map(|(k, pair)| Letter { pair, adj: oriented && k % 2 == 1 }).collect()
}

fn kappa_table(p: usize, cap: usize, taxonomy: Kind) -> Result<MomentPolynomial> {
    if p > cap {
        return Err(Error::CapExceeded { p, cap });
    }
    let oriented = taxonomy == Kind::Rectangular;
    let mut reducer = Reducer::new(oriented);
    let mut total = Poly::new();
    for pi in enumerate_pairings_capped(p, cap.max(p))? {
        let r = reducer.reduce(&word_of(&pi, oriented));
        add_scaled(&mut total, &r, [0, 0, 0]);
    }
    let coeffs = total
        .into_iter()
        .map(|(e, c)| {
            debug_assert_eq!((e[0] + e[1] + e[2]) as usize, p);
            ((e[0], e[1]), c)
        })
        .collect();
    Ok(MomentPolynomial { p, taxonomy, coeffs })
}

/// `κ_p(k, l)` for the real symmetric model.
pub fn kappa_table_symmetric(p: usize) -> Result<MomentPolynomial> {
    kappa_table(p, DEFAULT_REDUCE_CAP, Kind::RealSymmetric)
}

pub fn kappa_table_symmetric_capped(p: usize, cap: usize) -> Result<MomentPolynomial> {
    kappa_table(p, cap, Kind::RealSymmetric)
}

/// `κ̃_p(k, l)` for the real rectangular model.
pub fn kappa_table_rectangular(p: usize) -> Result<MomentPolynomial> {
    kappa_table(p, DEFAULT_REDUCE_CAP, Kind::Rectangular)
}

pub fn kappa_table_rectangular_capped(p: usize, cap: usize) -> Result<MomentPolynomial> {
    kappa_table(p, cap, Kind::Rectangular)
}

/// Reduction of a single pairing, for inspection.
pub fn reduce_pairing(pi: &Pairing, taxonomy: Kind) -> MomentPolynomial {
    let oriented = taxonomy == Kind::Rectangular;
    let mut reducer = Reducer::new(oriented);
    let r = reducer.reduce(&word_of(pi, oriented));
    let coeffs = r.into_iter().map(|(e, c)| ((e[0], e[1]), c)).collect();
    MomentPolynomial { p: pi.p(), taxonomy, coeffs }
}

pub fn polynomial_for(taxonomy: Kind, p: usize) -> Result<MomentPolynomial> {
    match taxonomy {
        Kind::Hermitian => hermitian_polynomial(p),
        Kind::RealSymmetric => kappa_table_symmetric(p),
        Kind::Rectangular => kappa_table_rectangular(p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalBound {
    /// Polynomial evaluated at the profile's own parameters.
    pub at_params: BigRational,
    /// Polynomial evaluated at the integer ceilings of the normalized
    /// parameters, i.e. the moment of the comparison iid matrix.
    pub at_ceilings: BigRational,
    /// The ceilings used: `(⌈σ²⌉ + 1, ⌈σ²⌉)`, `(⌈σ²⌉, 0)` or `(⌈σ₁²⌉, ⌈σ₂²⌉)`.
    pub ceilings: (BigInt, BigInt),
}

/// Evaluates the extremal bound of order `p` for the profile's own model.
pub fn extremal_bound(profile: &ExactProfile, p: usize) -> Result<ExtremalBound> {
    let poly = polynomial_for(profile.kind(), p)?;
    extremal_bound_with(profile, &poly)
}

pub fn extremal_bound_with(profile: &ExactProfile, poly: &MomentPolynomial) -> Result<ExtremalBound> {
    if poly.taxonomy != profile.kind() {
        return Err(Error::InvalidProfile(format!(
            "table for {} does not match a {} profile",
            poly.taxonomy.name(),
            profile.kind().name()
        )));
    }
    let params = profile.params();
    let star = params.sigma_star_sq();
    if star.is_zero() {
        return Err(Error::DegenerateProfile("sigma_* is zero".into()));
    }
    let (x, y) = match &params {
        MatrixParams::Rectangular { sigma1_sq, sigma2_sq, .. } => (sigma1_sq / &star, sigma2_sq / &star),
        MatrixParams::SelfAdjoint { sigma_sq, sigma_tilde_sq, .. } => match profile.kind() {
            Kind::Hermitian => (sigma_sq / &star, BigRational::zero()),
            _ => (sigma_tilde_sq / &star, sigma_sq / &star),
        },
    };
    let one = BigRational::one();
    let scale = rational::pow(&star, poly.p as u32);
    let at_params = poly.evaluate(&x, &y, &one) * &scale;
    let (cx, cy) = match (&params, profile.kind()) {
        (MatrixParams::Rectangular { .. }, _) => (rational::ceil(&x), rational::ceil(&y)),
        (_, Kind::Hermitian) => (rational::ceil(&x), BigInt::zero()),
        _ => {
            let d = rational::ceil(&y);
            (&d + 1, d)
        }
    };
    let at_ceilings = poly.evaluate(
        &BigRational::from_integer(cx.clone()),
        &BigRational::from_integer(cy.clone()),
        &one,
    ) * &scale;
    Ok(ExtremalBound { at_params, at_ceilings, ceilings: (cx, cy) })
}
