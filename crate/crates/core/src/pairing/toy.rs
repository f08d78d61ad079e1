//! Exponent-carrying oracle group.
//!
//! `G1` and `G2` are both represented by `Z_p` under addition: an element
//! stores its discrete logarithm relative to the generator. The pairing
//! multiplies logarithms. Useless for security, exact for verification.


use num_bigint::BigUint;
use rand::{Rng, RngCore};

use super::counters::{record, Op};
use super::{Backend, BackendKind, Field, Group};
use crate::error::{Error, Result};

/// `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Toy group of order 101, for unit tests and exhaustive sweeps.
pub type Toy101 = Toy<101>;
/// Toy group of order `2^61 - 1`, for property tests where collisions must be negligible.
pub type ToyM61 = Toy<MERSENNE_61>;

const fn toy_backend_id(p: u64) -> u8 {
    match p {
        101 => 0x02,
        MERSENNE_61 => 0x03,
        _ => 0x7f,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Toy<const P: u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyScalar<const P: u64>(u64);

impl<const P: u64> ToyScalar<P> {
    pub fn new(v: u64) -> Self {
        ToyScalar(v % P)
    }

    pub fn value(&self) -> u64 {
        self.0
    }

    fn pow_u64(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl<const P: u64> Field for ToyScalar<P> {
    const BYTES: usize = 8;

    fn zero() -> Self {
        ToyScalar(0)
    }

    fn one() -> Self {
        ToyScalar(1)
    }

    fn from_u64(v: u64) -> Self {
        Self::new(v)
    }

    fn add(&self, rhs: &Self) -> Self {
        ToyScalar(((self.0 as u128 + rhs.0 as u128) % P as u128) as u64)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Self) -> Self {
        ToyScalar(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }

    fn neg(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            ToyScalar(P - self.0)
        }
    }

    fn inverse(&self) -> Option<Self> {
        (self.0 != 0).then(|| self.pow_u64(P - 2))
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn modulus_bits() -> u32 {
        64 - P.leading_zeros()
    }

    fn modulus() -> BigUint {
        BigUint::from(P)
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        ToyScalar(rng.gen_range(0..P))
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_be_bytes().to_vec()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let v = u64::from_be_bytes(bytes.try_into().ok()?);
        (v < P).then_some(ToyScalar(v))
    }
}

/// `g^a`, stored as `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ToySource<const P: u64>(ToyScalar<P>);

/// `e(g,g)^a`, stored as `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ToyTarget<const P: u64>(ToyScalar<P>);

impl<const P: u64> ToySource<P> {
    pub fn from_log(log: ToyScalar<P>) -> Self {
        ToySource(log)
    }

    pub fn log(&self) -> ToyScalar<P> {
        self.0
    }
}

impl<const P: u64> ToyTarget<P> {
    pub fn from_log(log: ToyScalar<P>) -> Self {
        ToyTarget(log)
    }

    pub fn log(&self) -> ToyScalar<P> {
        self.0
    }
}

macro_rules! toy_group {
    ($ty:ident, $exp:expr) => {
        impl<const P: u64> Group for $ty<P> {
            type Scalar = ToyScalar<P>;

            fn identity() -> Self {
                $ty(ToyScalar::zero())
            }

            fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            fn mul(&self, rhs: &Self) -> Self {
                record(Op::Mul);
                $ty(self.0.add(&rhs.0))
            }

            fn inverse(&self) -> Self {
                $ty(self.0.neg())
            }

            fn pow(&self, exponent: &ToyScalar<P>) -> Self {
                record($exp);
                $ty(self.0.mul(exponent))
            }
        }
    };
}

toy_group!(ToySource, Op::SourceExp);
toy_group!(ToyTarget, Op::TargetExp);

fn decode_log<const P: u64>(bytes: &[u8]) -> Result<ToyScalar<P>> {
    ToyScalar::from_bytes(bytes)
        .ok_or_else(|| Error::Validation("toy element exponent is not reduced modulo p".into()))
}

impl<const P: u64> Backend for Toy<P> {
    type Scalar = ToyScalar<P>;
    type Source = ToySource<P>;
    type Target = ToyTarget<P>;

    const ID: u8 = toy_backend_id(P);
    const NAME: &'static str = "toy";
    const KIND: BackendKind = BackendKind::ToyOracle;
    const SOURCE_BYTES: usize = 8;
    const TARGET_BYTES: usize = 8;

    fn generator() -> Self::Source {
        debug_assert!(primal_check::miller_rabin(P), "toy modulus must be prime");
        ToySource(ToyScalar::one())
    }

    fn pair(a: &Self::Source, b: &Self::Source) -> Self::Target {
        record(Op::Pairing(1));
        ToyTarget(a.0.mul(&b.0))
    }

    fn source_dlog(x: &Self::Source) -> Result<Self::Scalar> {
        Ok(x.0)
    }

    fn target_dlog(x: &Self::Target) -> Result<Self::Scalar> {
        Ok(x.0)
    }

    fn encode_source_payload(x: &Self::Source, out: &mut Vec<u8>) {
        out.extend_from_slice(&x.0.to_bytes());
    }

    fn decode_source_payload(bytes: &[u8]) -> Result<Self::Source> {
        decode_log(bytes).map(ToySource)
    }

    fn encode_target_payload(x: &Self::Target, out: &mut Vec<u8>) {
        out.extend_from_slice(&x.0.to_bytes());
    }

    fn decode_target_payload(bytes: &[u8]) -> Result<Self::Target> {
        decode_log(bytes).map(ToyTarget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = ToyScalar<101>;

    #[test]
    fn field_arithmetic() {
        assert_eq!(S::new(100).add(&S::new(5)), S::new(4));
        assert_eq!(S::new(3).sub(&S::new(5)), S::new(99));
        assert_eq!(S::new(7).inverse().unwrap().mul(&S::new(7)), S::one());
        assert!(S::zero().inverse().is_none());
        for v in 1..101 {
            assert_eq!(S::new(v).inverse().unwrap().mul(&S::new(v)), S::one());
        }
        let m = ToyScalar::<MERSENNE_61>::new(MERSENNE_61 - 1);
        assert_eq!(m.mul(&m), ToyScalar::one());
    }

    #[test]
    fn element_order_divides_p() {
        let g = Toy101::generator();
        assert!(g.pow(&S::new(101)).is_identity());
        assert_eq!(S::from_bytes(&101u64.to_be_bytes()), None);
    }

    #[test]
    fn backend_ids_are_distinct() {
        assert_ne!(Toy101::ID, ToyM61::ID);
        assert_eq!(ToyScalar::<MERSENNE_61>::modulus_bits(), 61);
        assert_eq!(S::modulus_bits(), 7);
    }
}
