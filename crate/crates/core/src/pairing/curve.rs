//! Symmetric pairing emulated on BLS12-381.
//!
//! BLS12-381 is a type-3 curve. A source element `g^a` is stored as the pair
//! `(a·P, a·Q)` with `P`, `Q` the generators of the curve's two source groups,
//! and `e(A, B)` is evaluated as `ê(A.g1, B.g2)`. Because both coordinates share
//! the exponent, `e(A, B) = ê(P, Q)^{ab} = e(B, A)`.

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::{BigInteger, One, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use num_bigint::BigUint;
use rand::RngCore;

use super::counters::{record, Op};
use super::{Backend, BackendKind, Field, Group};
use crate::error::{Error, Result};

const G1_BYTES: usize = 48;
const G2_BYTES: usize = 96;
const GT_BYTES: usize = 576;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Bls12;

impl Field for Fr {
    const BYTES: usize = 32;

    fn zero() -> Self {
        <Fr as Zero>::zero()
    }

    fn one() -> Self {
        <Fr as One>::one()
    }

    fn from_u64(v: u64) -> Self {
        Fr::from(v)
    }

    fn add(&self, rhs: &Self) -> Self {
        *self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        *self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        *self * rhs
    }

    fn neg(&self) -> Self {
        -*self
    }

    fn inverse(&self) -> Option<Self> {
        ark_ff::Field::inverse(self)
    }

    fn is_zero(&self) -> bool {
        <Fr as Zero>::is_zero(self)
    }

    fn modulus_bits() -> u32 {
        Fr::MODULUS_BIT_SIZE
    }

    fn modulus() -> BigUint {
        BigUint::from_bytes_be(&Fr::MODULUS.to_bytes_be())
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Fr::rand(rng)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.into_bigint().to_bytes_be()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::BYTES {
            return None;
        }
        let v = Fr::from_be_bytes_mod_order(bytes);
        (v.into_bigint().to_bytes_be() == bytes).then_some(v)
    }
}

/// `g^a` as the synchronized pair `(a·P, a·Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    g1: G1Projective,
    g2: G2Projective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveTarget(PairingOutput<Bls12_381>);

impl Group for CurvePoint {
    type Scalar = Fr;

    fn identity() -> Self {
        CurvePoint {
            g1: G1Projective::zero(),
            g2: G2Projective::zero(),
        }
    }

    fn is_identity(&self) -> bool {
        self.g1.is_zero()
    }

    fn mul(&self, rhs: &Self) -> Self {
        record(Op::Mul);
        CurvePoint {
            g1: self.g1 + rhs.g1,
            g2: self.g2 + rhs.g2,
        }
    }

    fn inverse(&self) -> Self {
        CurvePoint {
            g1: -self.g1,
            g2: -self.g2,
        }
    }

    fn pow(&self, exponent: &Fr) -> Self {
        record(Op::SourceExp);
        CurvePoint {
            g1: self.g1 * exponent,
            g2: self.g2 * exponent,
        }
    }
}

impl Group for CurveTarget {
    type Scalar = Fr;

    fn identity() -> Self {
        CurveTarget(PairingOutput::zero())
    }

    fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    fn mul(&self, rhs: &Self) -> Self {
        record(Op::Mul);
        CurveTarget(self.0 + rhs.0)
    }

    fn inverse(&self) -> Self {
        CurveTarget(-self.0)
    }

    fn pow(&self, exponent: &Fr) -> Self {
        record(Op::TargetExp);
        CurveTarget(self.0 * exponent)
    }
}

fn invalid(what: &str) -> Error {
    Error::Validation(format!("invalid {what} encoding"))
}

impl Backend for Bls12 {
    type Scalar = Fr;
    type Source = CurvePoint;
    type Target = CurveTarget;

    const ID: u8 = 0x01;
    const NAME: &'static str = "curve";
    const KIND: BackendKind = BackendKind::ProductionCurve;
    const SOURCE_BYTES: usize = G1_BYTES + G2_BYTES;
    const TARGET_BYTES: usize = GT_BYTES;

    fn generator() -> Self::Source {
        CurvePoint {
            g1: G1Projective::generator(),
            g2: G2Projective::generator(),
        }
    }

    fn pair(a: &Self::Source, b: &Self::Source) -> Self::Target {
        record(Op::Pairing(1));
        CurveTarget(Bls12_381::pairing(a.g1, b.g2))
    }

    fn multi_pair(terms: &[(&Self::Source, &Self::Source)]) -> Self::Target {
        record(Op::Pairing(terms.len() as u64));
        let lhs: Vec<G1Affine> = terms.iter().map(|(a, _)| a.g1.into_affine()).collect();
        let rhs: Vec<G2Affine> = terms.iter().map(|(_, b)| b.g2.into_affine()).collect();
        CurveTarget(Bls12_381::multi_pairing(lhs, rhs))
    }

    fn encode_source_payload(x: &Self::Source, out: &mut Vec<u8>) {
        x.g1
            .into_affine()
            .serialize_compressed(&mut *out)
            .expect("writing to a Vec cannot fail");
        x.g2
            .into_affine()
            .serialize_compressed(&mut *out)
            .expect("writing to a Vec cannot fail");
    }

    fn decode_source_payload(bytes: &[u8]) -> Result<Self::Source> {
        let (b1, b2) = bytes.split_at(G1_BYTES);
        // deserialize_compressed checks curve and subgroup membership
        let g1 = G1Affine::deserialize_compressed(b1).map_err(|_| invalid("G1"))?;
        let g2 = G2Affine::deserialize_compressed(b2).map_err(|_| invalid("G2"))?;
        let point = CurvePoint {
            g1: g1.into(),
            g2: g2.into(),
        };
        let mut canonical = Vec::with_capacity(Self::SOURCE_BYTES);
        Self::encode_source_payload(&point, &mut canonical);
        if canonical != bytes {
            return Err(Error::Validation("non-canonical source element".into()));
        }
        // both halves must carry the same exponent: ê(A1, Q) = ê(P, A2)
        let check = Bls12_381::multi_pairing(
            [g1, (-G1Projective::generator()).into_affine()],
            [G2Projective::generator().into_affine(), g2],
        );
        if !check.is_zero() {
            return Err(Error::Validation(
                "source element halves are not synchronized".into(),
            ));
        }
        Ok(point)
    }

    fn encode_target_payload(x: &Self::Target, out: &mut Vec<u8>) {
        x.0.serialize_compressed(&mut *out)
            .expect("writing to a Vec cannot fail");
    }

    fn decode_target_payload(bytes: &[u8]) -> Result<Self::Target> {
        // validation checks membership in the order-r subgroup
        let t = PairingOutput::<Bls12_381>::deserialize_compressed(bytes)
            .map_err(|_| invalid("target"))?;
        let mut canonical = Vec::with_capacity(GT_BYTES);
        t.serialize_compressed(&mut canonical)
            .expect("writing to a Vec cannot fail");
        if canonical != bytes {
            return Err(Error::Validation("non-canonical target element".into()));
        }
        if t.0.is_zero() {
            return Err(invalid("target"));
        }
        Ok(CurveTarget(t))
    }
}
