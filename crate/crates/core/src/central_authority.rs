//! The central authority: issues the identity-bound part of each key, keeps
//! the trace table, and traces leaked keys back to an identity.
//!
//! The CA knows the master secret, a trace key for the map `V`, and every
//! authority's PRF seed, which it needs for the aggregate component
//! `d5 = g2^{y0 - Σ_k y_{k,u}}`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::RngCore;

use crate::authority::{AttributeKeyShare, PrfSeed};
use crate::error::{Error, Result};
use crate::hash::{keyed_hash_to_scalar, DOMAIN_TRACE};
use crate::pairing::{random_scalar, Backend, Field, Group};
use crate::pok::{derived_challenge, PokTranscript};
use crate::scheme::{id_base, Identity, MasterSecret, PublicParams, UserKey};

pub const TRACE_KEY_BYTES: usize = 32;

#[derive(Clone, PartialEq, Eq)]
pub struct CaSecret<B: Backend> {
    pub master: MasterSecret<B>,
    pub(crate) trace_key: [u8; TRACE_KEY_BYTES],
    pub(crate) authority_seeds: BTreeMap<u32, PrfSeed>,
}

impl<B: Backend> std::fmt::Debug for CaSecret<B> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaSecret")
            .field("authorities", &self.authority_seeds.keys().collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl<B: Backend> CaSecret<B> {
    pub fn new<R: RngCore + ?Sized>(master: MasterSecret<B>, rng: &mut R) -> Self {
        let mut trace_key = [0u8; TRACE_KEY_BYTES];
        rng.fill_bytes(&mut trace_key);
        Self::from_parts(master, trace_key, BTreeMap::new())
    }

    pub fn from_parts(
        master: MasterSecret<B>,
        trace_key: [u8; TRACE_KEY_BYTES],
        authority_seeds: BTreeMap<u32, PrfSeed>,
    ) -> Self {
        CaSecret {
            master,
            trace_key,
            authority_seeds,
        }
    }

    /// Records authority `index`'s PRF seed. Re-enrolling replaces it.
    pub fn enroll_authority(&mut self, index: u32, seed: PrfSeed) {
        self.authority_seeds.insert(index, seed);
    }

    pub fn enrolled(&self) -> impl Iterator<Item = u32> + '_ {
        self.authority_seeds.keys().copied()
    }

    /// `V(id)`, the CA's share `s1` of the user's `d3`.
    pub fn trace_value(&self, id: &Identity) -> B::Scalar {
        keyed_hash_to_scalar(&self.trace_key, DOMAIN_TRACE, id.as_bytes(), false)
    }

    /// `d5 = g2^{y0 - Σ y_{k,u}}` over the given authorities.
    pub(crate) fn aggregate_over(
        &self,
        mpk: &PublicParams<B>,
        id: &Identity,
        authorities: impl IntoIterator<Item = u32>,
    ) -> Result<B::Source> {
        let mut exponent = self.master.y0;
        for k in authorities {
            let seed = self
                .authority_seeds
                .get(&k)
                .ok_or_else(|| Error::Config(format!("authority {k} is not enrolled with the CA")))?;
            exponent = exponent.sub(&seed.eval(id));
        }
        Ok(mpk.g2.pow(&exponent))
    }
}

/// One row of the trace table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow<B: Backend> {
    pub id: Identity,
    pub value: B::Scalar,
}

/// Registered identities and their `V(id)`, in registration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTable<B: Backend> {
    rows: Vec<TraceRow<B>>,
    by_id: HashMap<Identity, usize>,
}

impl<B: Backend> Default for TraceTable<B> {
    fn default() -> Self {
        Self::new()
    }
}

impl<B: Backend> TraceTable<B> {
    pub fn new() -> Self {
        TraceTable {
            rows: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    /// Builds a table from rows, rejecting repeated identities or values.
    pub fn from_rows(rows: Vec<TraceRow<B>>) -> Result<Self> {
        let mut table = Self::new();
        for row in rows {
            table.push(row)?;
        }
        Ok(table)
    }

    fn push(&mut self, row: TraceRow<B>) -> Result<()> {
        if self.by_id.contains_key(&row.id) {
            return Err(Error::TableIntegrity(format!("identity {} appears twice", row.id)));
        }
        if self.rows.iter().any(|r| r.value == row.value) {
            return Err(Error::TableIntegrity(format!("trace value of {} collides with another row", row.id)));
        }
        self.by_id.insert(row.id.clone(), self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    /// Adds `id` if absent and returns `V(id)`. Idempotent.
    pub fn register(&mut self, ca: &CaSecret<B>, id: &Identity) -> Result<B::Scalar> {
        let value = ca.trace_value(id);
        match self.lookup(id) {
            Some(v) if *v == value => Ok(value),
            Some(_) => Err(Error::TableIntegrity(format!("stored trace value for {id} does not match the CA key"))),
            None => {
                self.push(TraceRow { id: id.clone(), value })?;
                Ok(value)
            }
        }
    }

    pub fn lookup(&self, id: &Identity) -> Option<&B::Scalar> {
        self.by_id.get(id).map(|&i| &self.rows[i].value)
    }

    pub fn rows(&self) -> &[TraceRow<B>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::formats::load(&fs::read(path)?)
    }

    /// Writes the whole table to a temporary file and renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = sibling(path, ".tmp");
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&crate::formats::save(self))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Registers `id` in the table stored at `path` (created if missing),
    /// holding an exclusive lock on `<path>.lock` throughout.
    pub fn register_at(path: &Path, ca: &CaSecret<B>, id: &Identity) -> Result<B::Scalar> {
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(sibling(path, ".lock"))?;
        lock.lock()?;
        let mut table = if path.exists() { Self::load(path)? } else { Self::new() };
        let known = table.lookup(id).is_some();
        let value = table.register(ca, id)?;
        if !known {
            table.save(path)?;
        }
        lock.unlock()?;
        Ok(value)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// The CA's output to the user; the user completes it with
/// [`crate::scheme::finalize_key`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialKey<B: Backend> {
    /// `d1' = (Y1 · R · h^{s1})^{1/x} · (g^{id} Z)^{r'}`.
    pub id_binding: B::Source,
    /// `d2' = X^{r'}`.
    pub randomizer: B::Source,
    /// `d3' = s1 = V(id)`.
    pub trace_value: B::Scalar,
    pub attribute_shares: Vec<AttributeKeyShare<B>>,
    pub aggregate: B::Source,
}

/// Where the proof's challenge came from.
#[derive(Clone, Copy, Debug)]
pub enum ChallengeOrigin<F> {
    /// Interactive run: the CA sent this challenge.
    Issued(F),
    /// Non-interactive: recomputed from the transcript and the identity.
    Derived,
}

/// Verifies the proof on `R`, registers `id`, and issues the partial key.
///
/// `shares` must hold exactly one share from each authority `1..=K`.
#[allow(clippy::too_many_arguments)]
pub fn ca_issue<B: Backend, R: RngCore + ?Sized>(
    ca: &CaSecret<B>,
    mpk: &PublicParams<B>,
    table: &mut TraceTable<B>,
    id: &Identity,
    commitment: &B::Source,
    proof: &PokTranscript<B>,
    origin: ChallengeOrigin<B::Scalar>,
    shares: Vec<AttributeKeyShare<B>>,
    rng: &mut R,
) -> Result<PartialKey<B>> {
    let expected = match origin {
        ChallengeOrigin::Issued(c) => c,
        ChallengeOrigin::Derived => derived_challenge::<B>(&proof.commitment, commitment, id.as_bytes()),
    };
    if proof.challenge != expected || !crate::pok::pok_verify(mpk, commitment, proof) {
        return Err(Error::ProofRejected);
    }
    let mut shares = shares;
    shares.sort_by_key(|s| s.authority);
    let got: Vec<u32> = shares.iter().map(|s| s.authority).collect();
    if got != (1..=mpk.authority_count).collect::<Vec<_>>() {
        return Err(Error::Protocol(format!(
            "need one attribute share from each of authorities 1..={}, got {:?}",
            mpk.authority_count, got
        )));
    }
    for share in &shares {
        if share.keys.keys().any(|a| a.authority != share.authority) {
            return Err(Error::Protocol(format!("share from authority {} covers foreign attributes", share.authority)));
        }
    }
    issue_partial(ca, mpk, table, id, commitment, shares, 1..=mpk.authority_count, rng)
}

/// Issuance without proof or coverage checks. `aggregate_authorities`
/// selects whose PRF outputs are subtracted in `d5`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn issue_partial<B: Backend, R: RngCore + ?Sized>(
    ca: &CaSecret<B>,
    mpk: &PublicParams<B>,
    table: &mut TraceTable<B>,
    id: &Identity,
    commitment: &B::Source,
    shares: Vec<AttributeKeyShare<B>>,
    aggregate_authorities: impl IntoIterator<Item = u32>,
    rng: &mut R,
) -> Result<PartialKey<B>> {
    let aggregate = ca.aggregate_over(mpk, id, aggregate_authorities)?;
    let s1 = table.register(ca, id)?;
    let inv_x = ca.master.x.inverse().ok_or(Error::InvalidKey)?;
    let r1 = random_scalar::<B, _>(rng);
    let id_binding = mpk
        .y1
        .mul(commitment)
        .mul(&mpk.h.pow(&s1))
        .pow(&inv_x)
        .mul(&id_base(mpk, id).pow(&r1));
    Ok(PartialKey {
        id_binding,
        randomizer: mpk.gx.pow(&r1),
        trace_value: s1,
        attribute_shares: shares,
        aggregate,
    })
}

/// `e(Y1 · h^{d3}, g)`, the part of the well-formedness equation that does
/// not depend on the identity.
fn identity_free_side<B: Backend>(mpk: &PublicParams<B>, key: &UserKey<B>) -> B::Target {
    B::multi_pair(&[
        (&key.id_binding, &mpk.gx),
        (&mpk.y1.mul(&mpk.h.pow(&key.blind_sum)).inverse(), &B::generator()),
    ])
}

/// Checks `e(d1, X) = e(Y1, g) · e(h, g)^{d3} · e(g^{id} Z, d2)`.
pub fn key_wellformed<B: Backend>(mpk: &PublicParams<B>, key: &UserKey<B>, id_scalar: &B::Scalar) -> bool {
    let base = B::generator().pow(id_scalar).mul(&mpk.z);
    identity_free_side(mpk, key) == B::pair(&base, &key.randomizer)
}

/// Finds the registered identity whose `g^{id} Z` makes `(d1, d2, d3)`
/// well-formed. The key's own `id` field is ignored.
pub fn trace<B: Backend>(mpk: &PublicParams<B>, table: &TraceTable<B>, key: &UserKey<B>) -> Result<Identity> {
    let lhs = identity_free_side(mpk, key);
    let mut hits = table.rows().iter().filter(|row| {
        let base = id_base(mpk, &row.id);
        B::pair(&base, &key.randomizer) == lhs
    });
    match (hits.next(), hits.next()) {
        (Some(row), None) => Ok(row.id.clone()),
        (None, _) => Err(Error::UntraceableKey),
        (Some(a), Some(b)) => Err(Error::TableIntegrity(format!(
            "key is well-formed for both {} and {}",
            a.id, b.id
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_tree::AccessNode;
    use crate::authority::authority_setup;
    use crate::pairing::{Bls12, Toy101, ToyM61, ToyScalar};
    use crate::pok::prove_noninteractive;
    use crate::scheme::{finalize_key, global_setup, request_key, KeyRequest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup<B: Backend>(seed: u64, k: u32) -> (PublicParams<B>, CaSecret<B>, Vec<crate::AuthoritySecret<B>>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (mpk, msk) = global_setup::<B, _>(k, &mut rng).unwrap();
        let mut ca = CaSecret::new(msk, &mut rng);
        let mut auths = Vec::new();
        for idx in 1..=k {
            let (s, _) = authority_setup::<B, _>(idx, 3, &mut rng).unwrap();
            ca.enroll_authority(idx, s.seed().clone());
            auths.push(s);
        }
        (mpk, ca, auths, rng)
    }

    fn shares_for<B: Backend>(
        mpk: &PublicParams<B>,
        auths: &[crate::AuthoritySecret<B>],
        id: &Identity,
        rng: &mut ChaCha20Rng,
    ) -> Vec<AttributeKeyShare<B>> {
        auths
            .iter()
            .map(|a| a.issue_attribute_keys(mpk, id, &AccessNode::leaf(a.index, 1), rng).unwrap())
            .collect()
    }

    fn issue<B: Backend>(
        mpk: &PublicParams<B>,
        ca: &CaSecret<B>,
        auths: &[crate::AuthoritySecret<B>],
        table: &mut TraceTable<B>,
        name: &str,
        rng: &mut ChaCha20Rng,
    ) -> UserKey<B> {
        let id = Identity::new(name);
        let (req, msg) = request_key(mpk, &id, rng);
        let shares = shares_for(mpk, auths, &id, rng);
        let partial = ca_issue(ca, mpk, table, &id, &msg.commitment, &msg.proof, ChallengeOrigin::Derived, shares, rng).unwrap();
        finalize_key(mpk, &req, partial, &id).unwrap()
    }

    #[test]
    fn partial_key_exponent_matches_integer_replay() {
        type B = Toy101;
        let (mpk, ca, auths, mut rng) = setup::<B>(1, 1);
        let mut table = TraceTable::new();
        let id = Identity::new("alice");
        let req = KeyRequest::new(&mpk, &mut rng);
        let shares = shares_for(&mpk, &auths, &id, &mut rng);
        let p = issue_partial(&ca, &mpk, &mut table, &id, &req.commitment, shares, [1], &mut rng).unwrap();
        let m = &ca.master;
        let log = |x| B::source_dlog(x).unwrap();
        let r1 = log(&p.randomizer).div(&m.x).unwrap();
        let inner = m.w2.mul(&m.y0).add(&log(&req.commitment)).add(&p.trace_value.mul(&log(&mpk.h)));
        let expected = inner
            .div(&m.x)
            .unwrap()
            .add(&r1.mul(&id.scalar::<ToyScalar<101>>().add(&log(&mpk.z))));
        assert_eq!(log(&p.id_binding), expected);
        let d5 = m.y0.sub(&auths[0].prf_eval(&id)).mul(&m.w1);
        assert_eq!(log(&p.aggregate), d5);
    }

    #[test]
    fn trace_value_is_deterministic_and_registration_idempotent() {
        let (_, ca, _, _) = setup::<ToyM61>(2, 1);
        let mut table = TraceTable::new();
        let a = Identity::new("a");
        let v = table.register(&ca, &a).unwrap();
        assert_eq!(table.register(&ca, &a).unwrap(), v);
        assert_eq!(table.len(), 1);
        assert_eq!(ca.trace_value(&a), v);
        table.register(&ca, &Identity::new("b")).unwrap();
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn duplicate_rows_rejected() {
        let row = |id: &str, v| TraceRow::<Toy101> {
            id: Identity::new(id),
            value: ToyScalar::new(v),
        };
        assert!(matches!(TraceTable::from_rows(vec![row("a", 1), row("a", 2)]), Err(Error::TableIntegrity(_))));
        assert!(matches!(TraceTable::from_rows(vec![row("a", 1), row("b", 1)]), Err(Error::TableIntegrity(_))));
        assert_eq!(TraceTable::from_rows(vec![row("a", 1), row("b", 2)]).unwrap().len(), 2);
    }

    #[test]
    fn proof_checks() {
        let (mpk, ca, auths, mut rng) = setup::<Bls12>(3, 2);
        let mut table = TraceTable::new();
        let id = Identity::new("alice");
        let (req, msg) = request_key(&mpk, &id, &mut rng);
        let shares = shares_for(&mpk, &auths, &id, &mut rng);

        // proof bound to another identity
        let other = Identity::new("mallory");
        let r = ca_issue(&ca, &mpk, &mut table, &other, &msg.commitment, &msg.proof, ChallengeOrigin::Derived, shares.clone(), &mut rng);
        assert!(matches!(r, Err(Error::ProofRejected)));

        // proof for a different commitment
        let (_, msg2) = request_key(&mpk, &id, &mut rng);
        let r = ca_issue(&ca, &mpk, &mut table, &id, &msg2.commitment, &msg.proof, ChallengeOrigin::Derived, shares.clone(), &mut rng);
        assert!(matches!(r, Err(Error::ProofRejected)));

        // interactive challenge mismatch
        let wrong = msg.proof.challenge.add(&Field::one());
        let r = ca_issue(&ca, &mpk, &mut table, &id, &msg.commitment, &msg.proof, ChallengeOrigin::Issued(wrong), shares.clone(), &mut rng);
        assert!(matches!(r, Err(Error::ProofRejected)));

        // missing share
        let r = ca_issue(&ca, &mpk, &mut table, &id, &msg.commitment, &msg.proof, ChallengeOrigin::Derived, shares[..1].to_vec(), &mut rng);
        assert!(matches!(r, Err(Error::Protocol(_))));
        assert!(table.is_empty());

        let p = ca_issue(&ca, &mpk, &mut table, &id, &msg.commitment, &msg.proof, ChallengeOrigin::Derived, shares, &mut rng).unwrap();
        assert_eq!(table.len(), 1);
        finalize_key(&mpk, &req, p, &id).unwrap();
    }

    #[test]
    fn interactive_proof_accepted() {
        let (mpk, ca, auths, mut rng) = setup::<ToyM61>(4, 1);
        let mut table = TraceTable::new();
        let id = Identity::new("ivy");
        let req = KeyRequest::new(&mpk, &mut rng);
        let (state, t) = crate::pok::pok_commit(&mpk, &mut rng);
        let c = crate::pok::pok_challenge::<ToyM61, _>(&mut rng);
        let proof = PokTranscript {
            commitment: t,
            challenge: c,
            responses: state.respond(&req.witness(), &c),
        };
        let shares = shares_for(&mpk, &auths, &id, &mut rng);
        let p = ca_issue(&ca, &mpk, &mut table, &id, &req.commitment, &proof, ChallengeOrigin::Issued(c), shares, &mut rng).unwrap();
        finalize_key(&mpk, &req, p, &id).unwrap();
    }

    #[test]
    fn wrong_opening_fails_finalization() {
        let (mpk, ca, auths, mut rng) = setup::<ToyM61>(5, 1);
        let mut table = TraceTable::new();
        let id = Identity::new("alice");
        let req = KeyRequest::new(&mpk, &mut rng);
        let proof = prove_noninteractive(&mpk, &req.commitment, &req.witness(), id.as_bytes(), &mut rng);
        let shares = shares_for(&mpk, &auths, &id, &mut rng);
        let p = ca_issue(&ca, &mpk, &mut table, &id, &req.commitment, &proof, ChallengeOrigin::Derived, shares, &mut rng).unwrap();
        let mut lying = req.clone();
        lying.blinding = lying.blinding.add(&Field::one());
        assert!(matches!(finalize_key(&mpk, &lying, p, &id), Err(Error::IssuanceInconsistency)));
    }

    #[test]
    fn trace_finds_owner_and_ignores_id_field() {
        let (mpk, ca, auths, mut rng) = setup::<Bls12>(6, 1);
        let mut table = TraceTable::new();
        let keys: Vec<_> = ["u0", "u1", "u2"]
            .iter()
            .map(|n| issue(&mpk, &ca, &auths, &mut table, n, &mut rng))
            .collect();
        for (i, k) in keys.iter().enumerate() {
            assert_eq!(trace(&mpk, &table, k).unwrap(), Identity::new(format!("u{i}")));
            let mut relabeled = k.clone();
            relabeled.id = Identity::new("u0");
            assert_eq!(trace(&mpk, &table, &relabeled).unwrap(), k.id);
        }
        let mut forged = keys[1].clone();
        forged.blind_sum = forged.blind_sum.add(&Field::one());
        assert!(matches!(trace(&mpk, &table, &forged), Err(Error::UntraceableKey)));
        let empty = TraceTable::new();
        assert!(matches!(trace(&mpk, &empty, &keys[0]), Err(Error::UntraceableKey)));
    }

    #[test]
    fn persistent_registration() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.tbl");
        let (_, ca, _, _) = setup::<ToyM61>(7, 1);
        let a = TraceTable::register_at(&path, &ca, &Identity::new("a")).unwrap();
        TraceTable::register_at(&path, &ca, &Identity::new("b")).unwrap();
        assert_eq!(TraceTable::register_at(&path, &ca, &Identity::new("a")).unwrap(), a);
        let t = TraceTable::<ToyM61>::load(&path).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows()[0].id, Identity::new("a"));
    }
}
