//! Proof of knowledge of a two-base opening `R = h^{s0} · X^{θ}`.
//!
//! The prover commits to `t = h^{k1} X^{k2}`, receives a challenge `c` and
//! answers `z1 = k1 + c·s0`, `z2 = k2 + c·θ`. The verifier accepts iff
//! `h^{z1} X^{z2} = t · R^c`. The protocol is special-sound and perfectly
//! witness indistinguishable (every opening of `R` yields the same
//! transcript distribution).
//!
//! The interactive form takes its challenge from the verifier. The
//! non-interactive form derives it by hashing `(t, R, context)`.

use rand::RngCore;

use crate::formats::{Reader, Writer};
use crate::hash::{hash_to_scalar, DOMAIN_CHALLENGE};
use crate::pairing::{Backend, Field, Group};
use crate::scheme::PublicParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PokTranscript<B: Backend> {
    pub commitment: B::Source,
    pub challenge: B::Scalar,
    pub responses: (B::Scalar, B::Scalar),
}

/// An opening `(s0, θ)` of `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness<F> {
    pub s0: F,
    pub theta: F,
}

/// Commitment randomness. Consumed by [`respond`](Self::respond): answering
/// two challenges with the same state reveals the witness.
#[derive(Debug)]
pub struct ProverState<B: Backend> {
    k1: B::Scalar,
    k2: B::Scalar,
}

impl<B: Backend> ProverState<B> {
    pub fn respond(self, witness: &Witness<B::Scalar>, challenge: &B::Scalar) -> (B::Scalar, B::Scalar) {
        (
            self.k1.add(&challenge.mul(&witness.s0)),
            self.k2.add(&challenge.mul(&witness.theta)),
        )
    }

    #[cfg(test)]
    pub(crate) fn from_parts(k1: B::Scalar, k2: B::Scalar) -> Self {
        ProverState { k1, k2 }
    }
}

/// `R = h^{s0} X^{θ}`.
pub fn commitment_of<B: Backend>(mpk: &PublicParams<B>, witness: &Witness<B::Scalar>) -> B::Source {
    mpk.h.pow(&witness.s0).mul(&mpk.gx.pow(&witness.theta))
}

pub fn pok_commit<B: Backend, R: RngCore + ?Sized>(
    mpk: &PublicParams<B>,
    rng: &mut R,
) -> (ProverState<B>, B::Source) {
    let k1 = B::Scalar::random(rng);
    let k2 = B::Scalar::random(rng);
    pok_commit_with(mpk, k1, k2)
}

/// Commitment with caller-chosen randomness `(k1, k2)`, uniform over `Z_p^2`
/// for an honest prover.
pub fn pok_commit_with<B: Backend>(mpk: &PublicParams<B>, k1: B::Scalar, k2: B::Scalar) -> (ProverState<B>, B::Source) {
    let t = mpk.h.pow(&k1).mul(&mpk.gx.pow(&k2));
    (ProverState { k1, k2 }, t)
}

/// Verifier's challenge in the interactive protocol.
pub fn pok_challenge<B: Backend, R: RngCore + ?Sized>(rng: &mut R) -> B::Scalar {
    B::Scalar::random(rng)
}

pub fn pok_verify<B: Backend>(mpk: &PublicParams<B>, r: &B::Source, transcript: &PokTranscript<B>) -> bool {
    let (z1, z2) = &transcript.responses;
    let lhs = mpk.h.pow(z1).mul(&mpk.gx.pow(z2));
    let rhs = transcript.commitment.mul(&r.pow(&transcript.challenge));
    lhs == rhs
}

/// Fiat-Shamir challenge bound to `(t, R, context)`.
pub fn derived_challenge<B: Backend>(commitment: &B::Source, r: &B::Source, context: &[u8]) -> B::Scalar {
    let mut w = Writer::<B>::new();
    w.source(commitment);
    w.source(r);
    w.bytes(context);
    hash_to_scalar(DOMAIN_CHALLENGE, &w.into_bytes(), false)
}

pub fn prove_noninteractive<B: Backend, R: RngCore + ?Sized>(
    mpk: &PublicParams<B>,
    r: &B::Source,
    witness: &Witness<B::Scalar>,
    context: &[u8],
    rng: &mut R,
) -> PokTranscript<B> {
    let (state, commitment) = pok_commit(mpk, rng);
    let challenge = derived_challenge::<B>(&commitment, r, context);
    let responses = state.respond(witness, &challenge);
    PokTranscript {
        commitment,
        challenge,
        responses,
    }
}

pub fn verify_noninteractive<B: Backend>(
    mpk: &PublicParams<B>,
    r: &B::Source,
    transcript: &PokTranscript<B>,
    context: &[u8],
) -> bool {
    transcript.challenge == derived_challenge::<B>(&transcript.commitment, r, context)
        && pok_verify(mpk, r, transcript)
}

/// Special-soundness extractor: two accepting transcripts with the same
/// commitment and different challenges reveal an opening of `R`.
pub fn extract<B: Backend>(a: &PokTranscript<B>, b: &PokTranscript<B>) -> Option<Witness<B::Scalar>> {
    if a.commitment != b.commitment {
        return None;
    }
    let dc = a.challenge.sub(&b.challenge).inverse()?;
    Some(Witness {
        s0: a.responses.0.sub(&b.responses.0).mul(&dc),
        theta: a.responses.1.sub(&b.responses.1).mul(&dc),
    })
}

impl<B: Backend> PokTranscript<B> {
    pub(crate) fn write(&self, w: &mut Writer<B>) {
        w.source(&self.commitment);
        w.scalar(&self.challenge);
        w.scalar(&self.responses.0);
        w.scalar(&self.responses.1);
    }

    pub(crate) fn read(r: &mut Reader<'_, B>) -> crate::Result<Self> {
        Ok(PokTranscript {
            commitment: r.source()?,
            challenge: r.scalar()?,
            responses: (r.scalar()?, r.scalar()?),
        })
    }
}
