//! Exponents as polynomials over the unknown secrets, and linear-span
//! membership of target-group exponents.
//!
//! An adversary holding source elements `g^{p_i}` and target elements
//! `e(g,g)^{q_j}` can produce, with group operations and pairings, exactly
//! `e(g,g)^{f}` for `f` in the span of `{p_i · p_k} ∪ {q_j}` with known
//! coefficients. Deciding whether a secret exponent lies in that span is
//! Gaussian elimination over `Z_p`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::pairing::{Field, ToyScalar, MERSENNE_61};

pub type Fp = ToyScalar<MERSENNE_61>;

/// Unknown secrets of a deployment, as seen by a coalition that knows
/// the authorities' secrets but not the CA's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Y0,
    Y1,
    W1,
    W2,
    Z,
    H,
    S,
}

pub const VARS: usize = 9;

/// A monomial as sorted variable indices, repeated by degree.
type Monomial = Vec<Var>;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(BTreeMap<Monomial, Fp>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: Fp) -> Self {
        Self::term(c, &[])
    }

    pub fn var(v: Var) -> Self {
        Self::term(Fp::one(), &[v])
    }

    pub fn term(c: Fp, vars: &[Var]) -> Self {
        let mut m = vars.to_vec();
        m.sort();
        let mut p = BTreeMap::new();
        if !c.is_zero() {
            p.insert(m, c);
        }
        Poly(p)
    }

    pub fn scale(&self, c: Fp) -> Self {
        Poly(
            self.0
                .iter()
                .filter_map(|(m, x)| {
                    let y = x.mul(&c);
                    (!y.is_zero()).then(|| (m.clone(), y))
                })
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn eval(&self, values: &[Fp; VARS]) -> Fp {
        self.0.iter().fold(Fp::zero(), |acc, (m, c)| {
            let v = m.iter().fold(*c, |x, var| x.mul(&values[*var as usize]));
            acc.add(&v)
        })
    }

    fn add_term(&mut self, m: Monomial, c: Fp) {
        let e = self.0.entry(m).or_insert_with(Fp::zero);
        *e = Field::add(e, &c);
        if e.is_zero() {
            self.0.retain(|_, v| !v.is_zero());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Fp::one().neg())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &rhs.0 {
                let mut m = ma.clone();
                m.extend_from_slice(mb);
                m.sort();
                out.add_term(m, ca.mul(cb));
            }
        }
        out
    }
}

/// Row-reduced basis of a set of polynomials.
#[derive(Default)]
pub struct Span {
    rows: Vec<(Monomial, Poly)>,
}

impl Span {
    pub fn new() -> Self {
        Self::default()
    }

    fn reduce(&self, p: &Poly) -> Poly {
        let mut r = p.clone();
        for (pivot, row) in &self.rows {
            if let Some(c) = r.0.get(pivot).copied() {
                r = &r - &row.scale(c);
            }
        }
        r
    }

    /// Adds `p`; returns whether the dimension grew.
    pub fn insert(&mut self, p: &Poly) -> bool {
        let r = self.reduce(p);
        let Some((pivot, c)) = r.0.iter().next().map(|(m, c)| (m.clone(), *c)) else {
            return false;
        };
        let row = r.scale(c.inverse().expect("nonzero leading coefficient"));
        // keep earlier rows reduced against the new pivot
        for (_, other) in &mut self.rows {
            if let Some(k) = other.0.get(&pivot).copied() {
                *other = &*other - &row.scale(k);
            }
        }
        self.rows.push((pivot, row));
        true
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.reduce(p).is_zero()
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }
}

/// Span of all pairwise products of `sources` together with `targets`.
pub fn pairing_closure(sources: &[Poly], targets: &[Poly]) -> Span {
    let mut span = Span::new();
    for (i, a) in sources.iter().enumerate() {
        for b in &sources[i..] {
            span.insert(&(a * b));
        }
    }
    for t in targets {
        span.insert(t);
    }
    span
}
