//! Global setup, user-side key handling, encryption and decryption.
//!
//! Public parameters, with `g` the group generator:
//!
//! | name     | value            |
//! |----------|------------------|
//! | `gx`     | `X = g^x`        |
//! | `gy`     | `Y = g^y`        |
//! | `z`, `h` | random           |
//! | `g1`     | `g^{y0}`         |
//! | `g2`     | `g^{w1}`         |
//! | `g3`     | `g^{w2}`         |
//! | `g4`     | `g2 · g3 = g^w`  |
//! | `y1`     | `g3^{y0}`        |
//! | `pair_y0`| `e(g,g)^{y0}`    |
//! | `pair_y1`| `e(g,g)^{y1}`    |
//!
//! `Y`, `e(g,g)^{y0}` and `e(g,g)^{y1}` are published but take part in no
//! algorithm.
//!
//! A ciphertext under attribute set `A` with randomness `s` is
//! `(A, X^s, g^s, Z^s, M · e(g1, g4)^s, {T_{k,i}^s})`. Decryption recovers
//! `e(g,g2)^{y0·s}` from the attribute shares and the aggregate component,
//! and `e(g,g3)^{y0·s}` from the identity-bound part of the key; their
//! product is the blinding factor `e(g,g4)^{y0·s}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::ChaCha20Poly1305;
use hkdf::Hkdf;
use rand::RngCore;
use sha2::Sha256;

use crate::access_tree::AttributeId;
use crate::authority::{AttributeKeyShare, AuthorityPublic};
use crate::central_authority::{key_wellformed, PartialKey};
use crate::error::{Error, Result};
use crate::formats::{Wire, Writer};
use crate::hash::{hash_to_scalar, DOMAIN_IDENTITY};
use crate::pairing::{encode_target, random_scalar, random_source_element, random_target_element, Backend, Field, Group};
use crate::pok::{commitment_of, prove_noninteractive, PokTranscript, Witness};

/// A user's global identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identity(String);

impl Identity {
    pub fn new(id: impl Into<String>) -> Self {
        Identity(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    /// The exponent used for `g^{id}`.
    pub fn scalar<F: Field>(&self) -> F {
        hash_to_scalar(DOMAIN_IDENTITY, self.as_bytes(), true)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams<B: Backend> {
    pub authority_count: u32,
    pub gx: B::Source,
    pub gy: B::Source,
    pub z: B::Source,
    pub h: B::Source,
    pub g1: B::Source,
    pub g2: B::Source,
    pub g3: B::Source,
    pub g4: B::Source,
    pub y1: B::Source,
    pub pair_y0: B::Target,
    pub pair_y1: B::Target,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecret<B: Backend> {
    pub x: B::Scalar,
    pub y: B::Scalar,
    pub y0: B::Scalar,
    pub y1: B::Scalar,
    pub w: B::Scalar,
    pub w1: B::Scalar,
    pub w2: B::Scalar,
}

impl<B: Backend> MasterSecret<B> {
    pub fn from_parts(x: B::Scalar, y: B::Scalar, y0: B::Scalar, y1: B::Scalar, w1: B::Scalar, w2: B::Scalar) -> Result<Self> {
        let w = w1.add(&w2);
        if [x, y, y0, y1, w1, w2, w].iter().any(Field::is_zero) {
            return Err(Error::Argument("master secret components must be nonzero".into()));
        }
        Ok(MasterSecret { x, y, y0, y1, w, w1, w2 })
    }

    /// Derives the public parameters.
    pub fn public_params(&self, authority_count: u32, z: B::Source, h: B::Source) -> PublicParams<B> {
        let g = B::generator();
        let g2 = g.pow(&self.w1);
        let g3 = g.pow(&self.w2);
        let egg = B::pair(&g, &g);
        PublicParams {
            authority_count,
            gx: g.pow(&self.x),
            gy: g.pow(&self.y),
            z,
            h,
            g1: g.pow(&self.y0),
            g4: g2.mul(&g3),
            y1: g3.pow(&self.y0),
            g2,
            g3,
            pair_y0: egg.pow(&self.y0),
            pair_y1: egg.pow(&self.y1),
        }
    }
}

pub fn global_setup<B: Backend, R: RngCore + ?Sized>(
    authority_count: u32,
    rng: &mut R,
) -> Result<(PublicParams<B>, MasterSecret<B>)> {
    if authority_count == 0 {
        return Err(Error::Argument("at least one attribute authority is required".into()));
    }
    let msk = loop {
        let draw = MasterSecret::<B>::from_parts(
            random_scalar::<B, _>(rng),
            random_scalar::<B, _>(rng),
            random_scalar::<B, _>(rng),
            random_scalar::<B, _>(rng),
            random_scalar::<B, _>(rng),
            random_scalar::<B, _>(rng),
        );
        // only fails when w1 + w2 = 0
        if let Ok(msk) = draw {
            break msk;
        }
    };
    let z = random_source_element::<B, _>(rng);
    let h = random_source_element::<B, _>(rng);
    Ok((msk.public_params(authority_count, z, h), msk))
}

/// The user's private state for one key request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyRequest<B: Backend> {
    /// `s0`, added to the CA's `V(id)` in the final key.
    pub blinding: B::Scalar,
    /// `θ`, hides `s0` inside the commitment.
    pub mask: B::Scalar,
    /// `R = h^{s0} X^{θ}`.
    pub commitment: B::Source,
    /// `r''`, the user's re-randomization of the CA's `r'`.
    pub rerandomizer: B::Scalar,
}

impl<B: Backend> KeyRequest<B> {
    pub fn new<R: RngCore + ?Sized>(mpk: &PublicParams<B>, rng: &mut R) -> Self {
        let witness = Witness {
            s0: random_scalar::<B, _>(rng),
            theta: random_scalar::<B, _>(rng),
        };
        KeyRequest {
            blinding: witness.s0,
            mask: witness.theta,
            commitment: commitment_of(mpk, &witness),
            rerandomizer: random_scalar::<B, _>(rng),
        }
    }

    pub fn witness(&self) -> Witness<B::Scalar> {
        Witness {
            s0: self.blinding,
            theta: self.mask,
        }
    }
}

/// What the user sends to the CA: its identity, `R`, and a non-interactive
/// proof of knowledge of the opening of `R` bound to the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuanceRequest<B: Backend> {
    pub id: Identity,
    pub commitment: B::Source,
    pub proof: PokTranscript<B>,
}

/// Fresh request plus a non-interactive proof bound to `id`.
pub fn request_key<B: Backend, R: RngCore + ?Sized>(
    mpk: &PublicParams<B>,
    id: &Identity,
    rng: &mut R,
) -> (KeyRequest<B>, IssuanceRequest<B>) {
    let request = KeyRequest::new(mpk, rng);
    let proof = prove_noninteractive(mpk, &request.commitment, &request.witness(), id.as_bytes(), rng);
    let message = IssuanceRequest {
        id: id.clone(),
        commitment: request.commitment.clone(),
        proof,
    };
    (request, message)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserKey<B: Backend> {
    pub id: Identity,
    /// `d1 = (Y1 · h^{d3})^{1/x} · (g^{id} Z)^r`.
    pub id_binding: B::Source,
    /// `d2 = X^r`.
    pub randomizer: B::Source,
    /// `d3 = s0 + V(id)`.
    pub blind_sum: B::Scalar,
    /// `d4`, one share per authority, ordered by authority index.
    pub attribute_shares: Vec<AttributeKeyShare<B>>,
    /// `d5 = g2^{y0 - Σ_k y_{k,u}}`.
    pub aggregate: B::Source,
}

impl<B: Backend> UserKey<B> {
    pub fn share(&self, authority: u32) -> Option<&AttributeKeyShare<B>> {
        self.attribute_shares.iter().find(|s| s.authority == authority)
    }

    /// Multiplies a further `(g^{id} Z)^{r}`, `X^{r}` into `d1`, `d2`.
    pub fn rerandomize<R: RngCore + ?Sized>(&self, mpk: &PublicParams<B>, rng: &mut R) -> Self {
        let r = random_scalar::<B, _>(rng);
        let base = id_base(mpk, &self.id);
        UserKey {
            id_binding: self.id_binding.mul(&base.pow(&r)),
            randomizer: self.randomizer.mul(&mpk.gx.pow(&r)),
            ..self.clone()
        }
    }

    /// Number of attribute leaves across all authorities.
    pub fn attribute_count(&self) -> usize {
        self.attribute_shares.iter().map(|s| s.keys.len()).sum()
    }
}

/// `g^{id} · Z`.
pub(crate) fn id_base<B: Backend>(mpk: &PublicParams<B>, id: &Identity) -> B::Source {
    B::generator().pow(&id.scalar()).mul(&mpk.z)
}

/// Removes the `θ` mask, re-randomizes and adds `s0` into the CA's partial key.
pub fn finalize_key<B: Backend>(
    mpk: &PublicParams<B>,
    request: &KeyRequest<B>,
    partial: PartialKey<B>,
    id: &Identity,
) -> Result<UserKey<B>> {
    let g = B::generator();
    let r2 = &request.rerandomizer;
    let key = UserKey {
        id: id.clone(),
        id_binding: partial
            .id_binding
            .div(&g.pow(&request.mask))
            .mul(&id_base(mpk, id).pow(r2)),
        randomizer: partial.randomizer.mul(&mpk.gx.pow(r2)),
        blind_sum: partial.trace_value.add(&request.blinding),
        attribute_shares: partial.attribute_shares,
        aggregate: partial.aggregate,
    };
    if !key_wellformed(mpk, &key, &id.scalar()) {
        return Err(Error::IssuanceInconsistency);
    }
    Ok(key)
}

/// Ciphertext `(A, C1..C5)`. The attribute set `A` is the key set of
/// `attribute_parts`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<B: Backend> {
    /// `C1 = X^s`.
    pub c_x: B::Source,
    /// `C2 = g^s`.
    pub c_g: B::Source,
    /// `C3 = Z^s`.
    pub c_z: B::Source,
    /// `C4 = M · e(g, g4)^{y0·s}`.
    pub blinded: B::Target,
    /// `C5 = {T_{k,i}^s}`.
    pub attribute_parts: BTreeMap<AttributeId, B::Source>,
}

impl<B: Backend> Ciphertext<B> {
    pub fn attributes(&self) -> BTreeSet<AttributeId> {
        self.attribute_parts.keys().copied().collect()
    }
}

fn attribute_key<'a, B: Backend>(publics: &'a [AuthorityPublic<B>], attr: AttributeId) -> Result<&'a B::Source> {
    publics
        .iter()
        .find(|p| p.index == attr.authority)
        .ok_or_else(|| Error::Argument(format!("no public keys for authority {}", attr.authority)))?
        .attribute_key(attr)
        .map_err(|_| Error::Argument(format!("unknown attribute {attr}")))
}

pub fn encrypt<B: Backend, R: RngCore + ?Sized>(
    mpk: &PublicParams<B>,
    authority_publics: &[AuthorityPublic<B>],
    attrs: &BTreeSet<AttributeId>,
    message: &B::Target,
    rng: &mut R,
) -> Result<Ciphertext<B>> {
    if attrs.is_empty() {
        return Err(Error::Argument("ciphertext attribute set is empty".into()));
    }
    let keys = attrs
        .iter()
        .map(|a| attribute_key(authority_publics, *a).map(|t| (*a, t)))
        .collect::<Result<Vec<_>>>()?;
    let s = random_scalar::<B, _>(rng);
    Ok(encrypt_with_randomness(mpk, &keys, message, &s))
}

fn encrypt_with_randomness<B: Backend>(
    mpk: &PublicParams<B>,
    keys: &[(AttributeId, &B::Source)],
    message: &B::Target,
    s: &B::Scalar,
) -> Ciphertext<B> {
    Ciphertext {
        c_x: mpk.gx.pow(s),
        c_g: B::generator().pow(s),
        c_z: mpk.z.pow(s),
        blinded: message.mul(&B::pair(&mpk.g1, &mpk.g4).pow(s)),
        attribute_parts: keys.iter().map(|(a, t)| (*a, t.pow(s))).collect(),
    }
}

/// The two factors whose product unblinds `C4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecryptionFactors<B: Backend> {
    /// `e(C2, d5) · ∏_k Y_{k,u}^s = e(g, g2)^{y0·s}`.
    pub attribute_part: B::Target,
    /// `e(d1, C1) / (e(C2, h)^{d3} · e(C2^{id} C3, d2)) = e(g, g3)^{y0·s}`.
    pub identity_part: B::Target,
}

/// Policy gate plus key-shape checks, without pairings.
fn check_policy<B: Backend>(mpk: &PublicParams<B>, key: &UserKey<B>, attrs: &BTreeSet<AttributeId>) -> Result<()> {
    let authorities: Vec<u32> = key.attribute_shares.iter().map(|s| s.authority).collect();
    if authorities != (1..=mpk.authority_count).collect::<Vec<_>>() {
        return Err(Error::InvalidKey);
    }
    for share in &key.attribute_shares {
        if !share.tree.satisfies(attrs) {
            return Err(Error::PolicyNotSatisfied);
        }
    }
    Ok(())
}

/// `Y_{k,u}^s = e(g, g2)^{y_{k,u}·s}` for every authority.
pub fn attribute_secrets<B: Backend>(key: &UserKey<B>, ct: &Ciphertext<B>) -> Result<Vec<B::Target>> {
    let attrs = ct.attributes();
    key.attribute_shares
        .iter()
        .map(|share| {
            let selected = share.tree.selected_leaves(&attrs).ok_or(Error::PolicyNotSatisfied)?;
            let mut values = BTreeMap::new();
            for a in selected {
                let d = share.keys.get(&a).ok_or(Error::InvalidKey)?;
                values.insert(a, B::pair(&ct.attribute_parts[&a], d));
            }
            share.tree.reconstruct_in_target::<B>(&values, &attrs)
        })
        .collect()
}

/// Computes both unblinding factors. Does not check the key.
pub fn decryption_factors<B: Backend>(
    mpk: &PublicParams<B>,
    key: &UserKey<B>,
    ct: &Ciphertext<B>,
) -> Result<DecryptionFactors<B>> {
    let attribute_part = attribute_secrets(key, ct)?
        .iter()
        .fold(B::pair(&ct.c_g, &key.aggregate), |acc, y| acc.mul(y));
    let id = key.id.scalar::<B::Scalar>();
    let denominator = B::pair(&ct.c_g, &mpk.h)
        .pow(&key.blind_sum)
        .mul(&B::pair(&ct.c_g.pow(&id).mul(&ct.c_z), &key.randomizer));
    let identity_part = B::pair(&key.id_binding, &ct.c_x).div(&denominator);
    Ok(DecryptionFactors {
        attribute_part,
        identity_part,
    })
}

/// Decrypts with a key the caller has already validated.
pub fn decrypt_trusted_key<B: Backend>(
    mpk: &PublicParams<B>,
    key: &UserKey<B>,
    ct: &Ciphertext<B>,
) -> Result<B::Target> {
    check_policy(mpk, key, &ct.attributes())?;
    let f = decryption_factors(mpk, key, ct)?;
    Ok(ct.blinded.div(&f.attribute_part.mul(&f.identity_part)))
}

pub fn decrypt<B: Backend>(mpk: &PublicParams<B>, key: &UserKey<B>, ct: &Ciphertext<B>) -> Result<B::Target> {
    check_policy(mpk, key, &ct.attributes())?;
    if !key_wellformed(mpk, key, &key.id.scalar()) {
        return Err(Error::InvalidKey);
    }
    decrypt_trusted_key(mpk, key, ct)
}

pub const NONCE_BYTES: usize = 12;
const HYBRID_INFO: &[u8] = b"maabe/v1/hybrid-dem";

/// A random target element encapsulated under the attribute set, keying an
/// AEAD seal of the payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridCiphertext<B: Backend> {
    pub header: Ciphertext<B>,
    pub nonce: [u8; NONCE_BYTES],
    pub sealed: Vec<u8>,
}

fn dem_cipher<B: Backend>(session: &B::Target) -> ChaCha20Poly1305 {
    let mut ikm = Vec::new();
    encode_target::<B>(session, &mut ikm);
    let mut okm = [0u8; 32];
    Hkdf::<Sha256>::new(None, &ikm)
        .expand(HYBRID_INFO, &mut okm)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    ChaCha20Poly1305::new_from_slice(&okm).expect("32-byte key")
}

fn header_aad<B: Backend>(header: &Ciphertext<B>) -> Vec<u8> {
    let mut w = Writer::<B>::new();
    header.write(&mut w);
    w.into_bytes()
}

pub fn encrypt_hybrid<B: Backend, R: RngCore + ?Sized>(
    mpk: &PublicParams<B>,
    authority_publics: &[AuthorityPublic<B>],
    attrs: &BTreeSet<AttributeId>,
    plaintext: &[u8],
    rng: &mut R,
) -> Result<HybridCiphertext<B>> {
    let session = random_target_element::<B, _>(rng);
    let header = encrypt(mpk, authority_publics, attrs, &session, rng)?;
    let mut nonce = [0u8; NONCE_BYTES];
    rng.fill_bytes(&mut nonce);
    let aad = header_aad(&header);
    let sealed = dem_cipher::<B>(&session)
        .encrypt(
            (&nonce).into(),
            Payload {
                msg: plaintext,
                aad: &aad,
            },
        )
        .map_err(|_| Error::Argument("payload too large to seal".into()))?;
    Ok(HybridCiphertext { header, nonce, sealed })
}

pub fn decrypt_hybrid<B: Backend>(
    mpk: &PublicParams<B>,
    key: &UserKey<B>,
    ct: &HybridCiphertext<B>,
) -> Result<Vec<u8>> {
    let session = decrypt(mpk, key, &ct.header)?;
    let aad = header_aad(&ct.header);
    dem_cipher::<B>(&session)
        .decrypt(
            (&ct.nonce).into(),
            Payload {
                msg: &ct.sealed,
                aad: &aad,
            },
        )
        .map_err(|_| Error::Tampering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_tree::AccessNode;
    use crate::authority::{authority_setup, AuthoritySecret};
    use crate::central_authority::{ca_issue, CaSecret, ChallengeOrigin, TraceTable};
    use crate::pairing::{gt_generator, Bls12, Toy101, ToyM61, ToyScalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    pub(crate) struct System<B: Backend> {
        pub mpk: PublicParams<B>,
        pub ca: CaSecret<B>,
        pub authorities: Vec<AuthoritySecret<B>>,
        pub publics: Vec<AuthorityPublic<B>>,
        pub table: TraceTable<B>,
    }

    pub(crate) fn system<B: Backend>(k: u32, n: u32, rng: &mut ChaCha20Rng) -> System<B> {
        let (mpk, msk) = global_setup::<B, _>(k, rng).unwrap();
        let mut ca = CaSecret::new(msk, rng);
        let mut authorities = Vec::new();
        let mut publics = Vec::new();
        for idx in 1..=k {
            let (s, p) = authority_setup::<B, _>(idx, n, rng).unwrap();
            ca.enroll_authority(idx, s.seed().clone());
            authorities.push(s);
            publics.push(p);
        }
        System {
            mpk,
            ca,
            authorities,
            publics,
            table: TraceTable::new(),
        }
    }

    impl<B: Backend> System<B> {
        pub fn keygen(&mut self, id: &str, trees: &[AccessNode], rng: &mut ChaCha20Rng) -> (UserKey<B>, KeyRequest<B>, PartialKey<B>) {
            let id = Identity::new(id);
            let (req, msg) = request_key(&self.mpk, &id, rng);
            let shares = self
                .authorities
                .iter()
                .zip(trees)
                .map(|(a, t)| a.issue_attribute_keys(&self.mpk, &id, t, rng).unwrap())
                .collect();
            let partial = ca_issue(
                &self.ca,
                &self.mpk,
                &mut self.table,
                &id,
                &msg.commitment,
                &msg.proof,
                ChallengeOrigin::Derived,
                shares,
                rng,
            )
            .unwrap();
            let key = finalize_key(&self.mpk, &req, partial.clone(), &id).unwrap();
            (key, req, partial)
        }
    }

    fn attrs(list: &[(u32, u32)]) -> BTreeSet<AttributeId> {
        list.iter().map(|&(k, i)| AttributeId::new(k, i)).collect()
    }

    #[test]
    fn setup_relations_hold() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (mpk, msk) = global_setup::<Toy101, _>(2, &mut rng).unwrap();
        let log = |x| Toy101::source_dlog(x).unwrap();
        assert_eq!(mpk.g4, mpk.g2.mul(&mpk.g3));
        assert_eq!(log(&mpk.gx), msk.x);
        assert_eq!(log(&mpk.g2), msk.w1);
        assert_eq!(log(&mpk.g3), msk.w2);
        assert_eq!(log(&mpk.g4), msk.w);
        assert_eq!(log(&mpk.g1), msk.y0);
        assert_eq!(log(&mpk.y1), msk.w2.mul(&msk.y0));
        assert_eq!(Toy101::target_dlog(&mpk.pair_y0).unwrap(), msk.y0);
        assert_eq!(Toy101::target_dlog(&mpk.pair_y1).unwrap(), msk.y1);
        assert_eq!(
            Toy101::pair(&mpk.g1, &mpk.g4),
            gt_generator::<Toy101>().pow(&msk.y0.mul(&msk.w))
        );
    }

    #[test]
    fn blinding_factor_example() {
        // p = 101, y0 = 3, w1 = 5, w2 = 7, s = 2: blinding log is 2·3·12 = 72
        type S = ToyScalar<101>;
        let msk = MasterSecret::<Toy101>::from_parts(S::new(11), S::new(13), S::new(3), S::new(17), S::new(5), S::new(7)).unwrap();
        let g = Toy101::generator();
        let mpk = msk.public_params(1, g.pow(&S::new(19)), g.pow(&S::new(23)));
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, publ) = authority_setup::<Toy101, _>(1, 1, &mut rng).unwrap();
        let t = &publ.attr_keys[0];
        let one = <Toy101 as Backend>::Target::identity();
        let ct = encrypt_with_randomness(&mpk, &[(AttributeId::new(1, 1), t)], &one, &S::new(2));
        assert_eq!(Toy101::target_dlog(&ct.blinded).unwrap(), S::new(72));
        let m = gt_generator::<Toy101>().pow(&S::new(40));
        let ct = encrypt_with_randomness(&mpk, &[(AttributeId::new(1, 1), t)], &m, &S::new(2));
        assert_eq!(Toy101::target_dlog(&ct.blinded).unwrap(), S::new(112 % 101));
        assert_eq!(
            Toy101::source_dlog(&ct.attribute_parts[&AttributeId::new(1, 1)]).unwrap(),
            Toy101::source_dlog(t).unwrap().mul(&S::new(2))
        );
    }

    #[test]
    fn finalize_with_trivial_rerandomization_keeps_partial() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut sys = system::<Toy101>(1, 2, &mut rng);
        let id = Identity::new("alice");
        let mut req = KeyRequest::new(&sys.mpk, &mut rng);
        req.mask = ToyScalar::zero();
        req.commitment = sys.mpk.h.pow(&req.blinding);
        req.rerandomizer = ToyScalar::zero();
        let proof = prove_noninteractive(&sys.mpk, &req.commitment, &req.witness(), id.as_bytes(), &mut rng);
        let share = sys.authorities[0]
            .issue_attribute_keys(&sys.mpk, &id, &AccessNode::leaf(1, 1), &mut rng)
            .unwrap();
        let partial = ca_issue(&sys.ca, &sys.mpk, &mut sys.table, &id, &req.commitment, &proof, ChallengeOrigin::Derived, vec![share], &mut rng).unwrap();
        let key = finalize_key(&sys.mpk, &req, partial.clone(), &id).unwrap();
        assert_eq!(key.id_binding, partial.id_binding);
        assert_eq!(key.randomizer, partial.randomizer);
    }

    #[test]
    fn finalized_key_matches_integer_replay() {
        type B = ToyM61;
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut sys = system::<B>(2, 3, &mut rng);
        let trees = [AccessNode::leaf(1, 1), AccessNode::leaf(2, 3)];
        let (key, req, partial) = sys.keygen("alice", &trees, &mut rng);
        let msk = &sys.ca.master;
        let log = |x| B::source_dlog(x).unwrap();
        let s1 = sys.ca.trace_value(&key.id);
        assert_eq!(partial.trace_value, s1);
        assert_eq!(key.blind_sum, s1.add(&req.blinding));
        // r = r' + r'', recovered from d2 = X^r
        let r = log(&key.randomizer).div(&msk.x).unwrap();
        let id = key.id.scalar::<<B as Backend>::Scalar>();
        let expected = msk
            .w2
            .mul(&msk.y0)
            .add(&key.blind_sum.mul(&log(&sys.mpk.h)))
            .add(&msk.x.mul(&id.add(&log(&sys.mpk.z))).mul(&r));
        assert_eq!(msk.x.mul(&log(&key.id_binding)), expected);
    }

    #[test]
    fn two_finalizations_differ_but_both_work() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut sys = system::<ToyM61>(1, 2, &mut rng);
        let trees = [AccessNode::leaf(1, 1)];
        let (k1, mut req, partial) = sys.keygen("alice", &trees, &mut rng);
        req.rerandomizer = req.rerandomizer.add(&ToyScalar::one());
        let k2 = finalize_key(&sys.mpk, &req, partial, &Identity::new("alice")).unwrap();
        assert_ne!(k1.id_binding, k2.id_binding);
        assert_ne!(k1.randomizer, k2.randomizer);
        assert_eq!(k1.blind_sum, k2.blind_sum);
        let m = random_target_element::<ToyM61, _>(&mut rng);
        let ct = encrypt(&sys.mpk, &sys.publics, &attrs(&[(1, 1)]), &m, &mut rng).unwrap();
        assert_eq!(decrypt(&sys.mpk, &k1, &ct).unwrap(), m);
        assert_eq!(decrypt(&sys.mpk, &k2, &ct).unwrap(), m);
    }

    #[test]
    fn decryption_factor_logs() {
        type B = ToyM61;
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mut sys = system::<B>(2, 4, &mut rng);
        let t1: AccessNode = "(2of3 (leaf 1:1) (leaf 1:2) (1of2 (leaf 1:3) (leaf 1:4)))".parse().unwrap();
        let t2: AccessNode = "(1of2 (leaf 2:1) (leaf 2:2))".parse().unwrap();
        let (key, _, _) = sys.keygen("bob", &[t1, t2], &mut rng);
        let m = random_target_element::<B, _>(&mut rng);
        let ct = encrypt(&sys.mpk, &sys.publics, &attrs(&[(1, 1), (1, 4), (2, 2)]), &m, &mut rng).unwrap();
        let s = B::source_dlog(&ct.c_g).unwrap();
        let f = decryption_factors(&sys.mpk, &key, &ct).unwrap();
        let msk = &sys.ca.master;
        assert_eq!(B::target_dlog(&f.attribute_part).unwrap(), msk.w1.mul(&msk.y0).mul(&s));
        assert_eq!(B::target_dlog(&f.identity_part).unwrap(), msk.w2.mul(&msk.y0).mul(&s));
        assert_eq!(decrypt(&sys.mpk, &key, &ct).unwrap(), m);
    }

    #[test]
    fn unsatisfied_policy_is_reported_not_decrypted() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut sys = system::<Bls12>(2, 3, &mut rng);
        let trees = [
            AccessNode::threshold_of(2, [AttributeId::new(1, 1), AttributeId::new(1, 2)]).unwrap(),
            AccessNode::leaf(2, 1),
        ];
        let (key, _, _) = sys.keygen("carol", &trees, &mut rng);
        let m = random_target_element::<Bls12, _>(&mut rng);
        let ct = encrypt(&sys.mpk, &sys.publics, &attrs(&[(1, 1), (2, 1)]), &m, &mut rng).unwrap();
        assert!(matches!(decrypt(&sys.mpk, &key, &ct), Err(Error::PolicyNotSatisfied)));
        let ct = encrypt(&sys.mpk, &sys.publics, &attrs(&[(1, 1), (1, 2), (2, 1)]), &m, &mut rng).unwrap();
        assert_eq!(decrypt(&sys.mpk, &key, &ct).unwrap(), m);
    }

    #[test]
    fn tampered_key_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let mut sys = system::<ToyM61>(1, 1, &mut rng);
        let (mut key, _, _) = sys.keygen("dave", &[AccessNode::leaf(1, 1)], &mut rng);
        let m = random_target_element::<ToyM61, _>(&mut rng);
        let ct = encrypt(&sys.mpk, &sys.publics, &attrs(&[(1, 1)]), &m, &mut rng).unwrap();
        key.blind_sum = key.blind_sum.add(&ToyScalar::one());
        assert!(matches!(decrypt(&sys.mpk, &key, &ct), Err(Error::InvalidKey)));
    }

    #[test]
    fn encrypt_rejects_unknown_attributes() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let sys = system::<Toy101>(1, 2, &mut rng);
        let m = random_target_element::<Toy101, _>(&mut rng);
        for bad in [attrs(&[(1, 3)]), attrs(&[(2, 1)]), BTreeSet::new()] {
            assert!(matches!(
                encrypt(&sys.mpk, &sys.publics, &bad, &m, &mut rng),
                Err(Error::Argument(_))
            ));
        }
    }

    #[test]
    fn hybrid_round_trip_and_tamper() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let mut sys = system::<Bls12>(1, 2, &mut rng);
        let (key, _, _) = sys.keygen("erin", &[AccessNode::leaf(1, 2)], &mut rng);
        let mut payload = vec![0u8; 1024];
        rng.fill_bytes(&mut payload);
        let a = attrs(&[(1, 2)]);
        let ct = encrypt_hybrid(&sys.mpk, &sys.publics, &a, &payload, &mut rng).unwrap();
        assert_eq!(decrypt_hybrid(&sys.mpk, &key, &ct).unwrap(), payload);
        let again = encrypt_hybrid(&sys.mpk, &sys.publics, &a, &payload, &mut rng).unwrap();
        assert_ne!(again.sealed, ct.sealed);
        let mut bad = ct.clone();
        bad.sealed[17] ^= 0x04;
        assert!(matches!(decrypt_hybrid(&sys.mpk, &key, &bad), Err(Error::Tampering)));
        let mut bad = ct.clone();
        bad.nonce[0] ^= 1;
        assert!(matches!(decrypt_hybrid(&sys.mpk, &key, &bad), Err(Error::Tampering)));
    }
}
