//! Symmetric bilinear group contract.
//!
//! The scheme is written against a type-1 pairing `e: G1 x G1 -> G2`. Two
//! backends realize it: [`Bls12`] emulates a symmetric pairing on BLS12-381,
//! and [`Toy`] is a verification oracle whose elements carry their discrete
//! logarithm so every identity can be checked with integer arithmetic.
//!
//! Group operations are written multiplicatively throughout.

use std::fmt::Debug;

use num_bigint::BigUint;
use rand::RngCore;

use crate::error::{Error, Result};

pub mod counters;
mod curve;
mod toy;

pub use counters::{measure, OpCounters};
pub use curve::{Bls12, CurvePoint, CurveTarget};
pub use toy::{Toy, Toy101, ToyM61, ToyScalar, ToySource, ToyTarget, MERSENNE_61};

/// Version byte prefixed to every canonical element encoding.
pub const ELEMENT_ENCODING_VERSION: u8 = 1;

/// Arithmetic in `Z_p`.
pub trait Field: Copy + Clone + Eq + Ord + Debug + Send + Sync + 'static {
    /// Width of the canonical big-endian encoding.
    const BYTES: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;

    /// Bit length of the modulus `p`.
    fn modulus_bits() -> u32;
    fn modulus() -> BigUint;

    /// Uniform over `Z_p`.
    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self;

    /// Uniform over `Z_p*`.
    fn random_nonzero<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Self::random(rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    fn to_bytes(&self) -> Vec<u8>;
    /// Parses a canonical encoding; values `>= p` are rejected.
    fn from_bytes(bytes: &[u8]) -> Option<Self>;

    fn div(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|inv| self.mul(&inv))
    }

    fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.to_bytes())
    }
}

/// A cyclic group of prime order, written multiplicatively.
///
/// Implementations record `mul` and `pow` in the thread's [`OpCounters`].
pub trait Group: Clone + Eq + Debug + Send + Sync + 'static {
    type Scalar: Field;

    fn identity() -> Self;
    fn is_identity(&self) -> bool;
    fn mul(&self, rhs: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn pow(&self, exponent: &Self::Scalar) -> Self;

    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inverse())
    }
}

/// Which family of group a backend belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    ProductionCurve,
    ToyOracle,
}

/// The parameters `(p, g)` of a configured bilinear group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDescriptor<B: Backend> {
    pub prime_order: BigUint,
    pub generator: B::Source,
    pub backend: BackendKind,
}

/// A symmetric pairing `e: G1 x G1 -> G2` over groups of prime order `p`.
pub trait Backend: Copy + Clone + Debug + Default + Send + Sync + 'static {
    type Scalar: Field;
    type Source: Group<Scalar = Self::Scalar>;
    type Target: Group<Scalar = Self::Scalar>;

    /// Backend byte written into every element and envelope encoding.
    const ID: u8;
    const NAME: &'static str;
    const KIND: BackendKind;
    /// Encoded payload widths, excluding the two header bytes.
    const SOURCE_BYTES: usize;
    const TARGET_BYTES: usize;

    /// The generator `g` of the source group.
    fn generator() -> Self::Source;

    fn pair(a: &Self::Source, b: &Self::Source) -> Self::Target;

    /// Product of pairings. Counted as one pairing per term.
    fn multi_pair(terms: &[(&Self::Source, &Self::Source)]) -> Self::Target {
        terms
            .iter()
            .fold(Self::Target::identity(), |acc, (a, b)| acc.mul(&Self::pair(a, b)))
    }

    fn descriptor() -> GroupDescriptor<Self> {
        GroupDescriptor {
            prime_order: Self::Scalar::modulus(),
            generator: Self::generator(),
            backend: Self::KIND,
        }
    }

    /// `log_g(x)`; only the toy oracle can answer.
    fn source_dlog(_x: &Self::Source) -> Result<Self::Scalar> {
        Err(Error::Unsupported("discrete logarithm on a production backend"))
    }

    /// `log_{e(g,g)}(x)`; only the toy oracle can answer.
    fn target_dlog(_x: &Self::Target) -> Result<Self::Scalar> {
        Err(Error::Unsupported("discrete logarithm on a production backend"))
    }

    fn encode_source_payload(x: &Self::Source, out: &mut Vec<u8>);
    fn decode_source_payload(bytes: &[u8]) -> Result<Self::Source>;
    fn encode_target_payload(x: &Self::Target, out: &mut Vec<u8>);
    fn decode_target_payload(bytes: &[u8]) -> Result<Self::Target>;
}

pub fn random_scalar<B: Backend, R: RngCore + ?Sized>(rng: &mut R) -> B::Scalar {
    B::Scalar::random_nonzero(rng)
}

/// A random non-identity element `g^r`, `r` uniform in `Z_p*`.
pub fn random_source_element<B: Backend, R: RngCore + ?Sized>(rng: &mut R) -> B::Source {
    B::generator().pow(&random_scalar::<B, _>(rng))
}

/// A random non-identity element of the target group.
pub fn random_target_element<B: Backend, R: RngCore + ?Sized>(rng: &mut R) -> B::Target {
    gt_generator::<B>().pow(&random_scalar::<B, _>(rng))
}

/// `e(g, g)`.
pub fn gt_generator<B: Backend>() -> B::Target {
    let g = B::generator();
    B::pair(&g, &g)
}

/// Canonical element encoding: version byte, backend byte, fixed-width payload.
pub fn encode_source<B: Backend>(x: &B::Source, out: &mut Vec<u8>) {
    out.push(ELEMENT_ENCODING_VERSION);
    out.push(B::ID);
    B::encode_source_payload(x, out);
}

pub fn encode_target<B: Backend>(x: &B::Target, out: &mut Vec<u8>) {
    out.push(ELEMENT_ENCODING_VERSION);
    out.push(B::ID);
    B::encode_target_payload(x, out);
}

fn check_element_header<B: Backend>(bytes: &[u8], payload: usize) -> Result<&[u8]> {
    if bytes.len() != payload + 2 {
        return Err(Error::Validation(format!(
            "element encoding has {} bytes, expected {}",
            bytes.len(),
            payload + 2
        )));
    }
    if bytes[0] != ELEMENT_ENCODING_VERSION {
        return Err(Error::Version(bytes[0]));
    }
    if bytes[1] != B::ID {
        return Err(Error::BackendMismatch {
            expected: B::ID,
            found: bytes[1],
        });
    }
    Ok(&bytes[2..])
}

pub fn decode_source<B: Backend>(bytes: &[u8]) -> Result<B::Source> {
    B::decode_source_payload(check_element_header::<B>(bytes, B::SOURCE_BYTES)?)
}

pub fn decode_target<B: Backend>(bytes: &[u8]) -> Result<B::Target> {
    B::decode_target_payload(check_element_header::<B>(bytes, B::TARGET_BYTES)?)
}
