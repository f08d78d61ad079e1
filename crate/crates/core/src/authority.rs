//! Attribute authorities.
//!
//! Authority `k` owns attributes `k:1..=k:N`, each with a secret exponent
//! `t_{k,i}` and public key `T_{k,i} = g^{t_{k,i}}`. For user `u` it derives
//! `y_{k,u}` from its PRF seed, shares it over the user's access tree and
//! hands out `D_{k,i} = g2^{share_i / t_{k,i}}` for every leaf.
//!
//! Authorities keep no per-user state: `y_{k,u}` is re-derived on demand.

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;

use crate::access_tree::{AccessNode, AttributeId};
use crate::error::{Error, Result};
use crate::hash::{keyed_hash_to_scalar, DOMAIN_PRF};
use crate::pairing::{random_scalar, Backend, Field, Group};
use crate::scheme::{Identity, PublicParams};

pub const SEED_BYTES: usize = 32;

/// PRF seed `se_k`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrfSeed(pub(crate) [u8; SEED_BYTES]);

impl PrfSeed {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; SEED_BYTES];
        rng.fill_bytes(&mut bytes);
        PrfSeed(bytes)
    }

    pub fn from_bytes(bytes: [u8; SEED_BYTES]) -> Self {
        PrfSeed(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SEED_BYTES] {
        &self.0
    }

    /// `F_seed(id)`, a nonzero scalar.
    pub fn eval<F: Field>(&self, id: &Identity) -> F {
        keyed_hash_to_scalar(&self.0, DOMAIN_PRF, id.as_bytes(), true)
    }
}

impl fmt::Debug for PrfSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PrfSeed(..)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthoritySecret<B: Backend> {
    pub index: u32,
    pub(crate) seed: PrfSeed,
    /// `t_{k,i}` at position `i - 1`.
    pub(crate) attr_exponents: Vec<B::Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorityPublic<B: Backend> {
    pub index: u32,
    /// `T_{k,i}` at position `i - 1`.
    pub attr_keys: Vec<B::Source>,
}

/// One authority's contribution to a user key: the user's policy tree for
/// that authority and `D_{k,i}` for each of its leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeKeyShare<B: Backend> {
    pub authority: u32,
    pub tree: AccessNode,
    pub keys: BTreeMap<AttributeId, B::Source>,
}

pub fn authority_setup<B: Backend, R: RngCore + ?Sized>(
    index: u32,
    attribute_count: u32,
    rng: &mut R,
) -> Result<(AuthoritySecret<B>, AuthorityPublic<B>)> {
    if index == 0 {
        return Err(Error::Argument("authority indices start at 1".into()));
    }
    if attribute_count == 0 {
        return Err(Error::Argument("an authority needs at least one attribute".into()));
    }
    let secret = AuthoritySecret {
        index,
        seed: PrfSeed::random(rng),
        attr_exponents: (0..attribute_count).map(|_| random_scalar::<B, _>(rng)).collect(),
    };
    let public = secret.public();
    Ok((secret, public))
}

impl<B: Backend> AuthoritySecret<B> {
    pub fn from_parts(index: u32, seed: PrfSeed, attr_exponents: Vec<B::Scalar>) -> Result<Self> {
        if index == 0 || attr_exponents.is_empty() {
            return Err(Error::Argument("authority index and attribute count must be positive".into()));
        }
        if attr_exponents.iter().any(Field::is_zero) {
            return Err(Error::Argument("attribute exponents must be nonzero".into()));
        }
        Ok(AuthoritySecret {
            index,
            seed,
            attr_exponents,
        })
    }

    pub fn public(&self) -> AuthorityPublic<B> {
        let g = B::generator();
        AuthorityPublic {
            index: self.index,
            attr_keys: self.attr_exponents.iter().map(|t| g.pow(t)).collect(),
        }
    }

    pub fn seed(&self) -> &PrfSeed {
        &self.seed
    }

    pub fn attribute_count(&self) -> u32 {
        self.attr_exponents.len() as u32
    }

    /// `t_{k,i}`.
    pub fn exponent(&self, attr: AttributeId) -> Result<B::Scalar> {
        self.check_attribute(attr)?;
        Ok(self.attr_exponents[attr.index as usize - 1])
    }

    fn check_attribute(&self, attr: AttributeId) -> Result<()> {
        if attr.authority != self.index {
            return Err(Error::Jurisdiction {
                attribute: attr,
                authority: self.index,
            });
        }
        if attr.index == 0 || attr.index > self.attribute_count() {
            return Err(Error::Argument(format!(
                "attribute {attr} is not in authority {}'s universe of {}",
                self.index,
                self.attribute_count()
            )));
        }
        Ok(())
    }

    /// `y_{k,u} = F_{se_k}(u)`.
    pub fn prf_eval(&self, id: &Identity) -> B::Scalar {
        self.seed.eval(id)
    }

    /// Shares `y_{k,u}` over `tree` and returns `D_{k,i}` per leaf.
    pub fn issue_attribute_keys<R: RngCore + ?Sized>(
        &self,
        mpk: &PublicParams<B>,
        id: &Identity,
        tree: &AccessNode,
        rng: &mut R,
    ) -> Result<AttributeKeyShare<B>> {
        tree.validate()?;
        for leaf in tree.leaves() {
            self.check_attribute(leaf)?;
        }
        let shares = tree.share_secret(self.prf_eval(id), rng)?;
        let mut keys = BTreeMap::new();
        for (attr, share) in shares {
            let t = self.exponent(attr)?;
            let exponent = share.div(&t).expect("attribute exponents are nonzero");
            keys.insert(attr, mpk.g2.pow(&exponent));
        }
        Ok(AttributeKeyShare {
            authority: self.index,
            tree: tree.clone(),
            keys,
        })
    }
}

impl<B: Backend> AuthorityPublic<B> {
    /// `T_{k,i}`.
    pub fn attribute_key(&self, attr: AttributeId) -> Result<&B::Source> {
        if attr.authority != self.index {
            return Err(Error::Jurisdiction {
                attribute: attr,
                authority: self.index,
            });
        }
        attr.index
            .checked_sub(1)
            .and_then(|i| self.attr_keys.get(i as usize))
            .ok_or_else(|| Error::Argument(format!("no public key for attribute {attr}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{gt_generator, Toy101, ToyM61, ToyScalar, MERSENNE_61};
    use crate::scheme::global_setup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::{BTreeSet, HashSet};

    #[test]
    fn public_keys_are_g_to_the_exponents() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (sec, publ) = authority_setup::<Toy101, _>(1, 1, &mut rng).unwrap();
        assert_eq!(Toy101::source_dlog(&publ.attr_keys[0]).unwrap(), sec.attr_exponents[0]);
        assert!(!sec.attr_exponents[0].is_zero());
        assert!(authority_setup::<Toy101, _>(1, 0, &mut rng).is_err());
    }

    #[test]
    fn distinct_setups_have_disjoint_exponents() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (a, _) = authority_setup::<ToyM61, _>(1, 1000, &mut rng).unwrap();
        let (b, _) = authority_setup::<ToyM61, _>(2, 1000, &mut rng).unwrap();
        let a: HashSet<_> = a.attr_exponents.iter().collect();
        assert!(b.attr_exponents.iter().all(|t| !a.contains(t)));
    }

    #[test]
    fn prf_is_deterministic_and_collision_free() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (sec, _) = authority_setup::<ToyM61, _>(1, 1, &mut rng).unwrap();
        let (other, _) = authority_setup::<ToyM61, _>(2, 1, &mut rng).unwrap();
        let alice = Identity::new("alice");
        assert_eq!(sec.prf_eval(&alice), sec.prf_eval(&alice));
        assert_ne!(sec.prf_eval(&alice), other.prf_eval(&alice));
        let values: HashSet<_> = (0..10_000)
            .map(|i| sec.prf_eval(&Identity::new(format!("user-{i}"))))
            .collect();
        assert_eq!(values.len(), 10_000);
    }

    #[test]
    fn prf_outputs_of_distinct_seeds_are_independent() {
        // Over Z_101, the pair (F_a(u), F_b(u)) should be uniform on the
        // 100x100 grid; bin by (a mod 10, b mod 10) and chi-square.
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (a, _) = authority_setup::<Toy101, _>(1, 1, &mut rng).unwrap();
        let (b, _) = authority_setup::<Toy101, _>(2, 1, &mut rng).unwrap();
        let mut bins = [[0u32; 10]; 10];
        let n = 20_000;
        for i in 0..n {
            let id = Identity::new(format!("u{i}"));
            let x: ToyScalar<101> = a.prf_eval(&id);
            let y: ToyScalar<101> = b.prf_eval(&id);
            bins[(x.value() % 10) as usize][(y.value() % 10) as usize] += 1;
        }
        // expected mass per bin on residues 1..=100 is exactly 10x10 / 100^2 = 1/100
        let expected = n as f64 / 100.0;
        let chi2: f64 = bins.iter().flatten().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99 dof, 99.9th percentile ~148.2
        assert!(chi2 < 148.2, "chi2 = {chi2}");
    }

    #[test]
    fn issued_shares_pair_to_w1_times_share() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (mpk, msk) = global_setup::<Toy101, _>(1, &mut rng).unwrap();
        let (sec, publ) = authority_setup::<Toy101, _>(1, 3, &mut rng).unwrap();
        let id = Identity::new("alice");
        let leaf = AccessNode::leaf(1, 2);
        let share = sec.issue_attribute_keys(&mpk, &id, &leaf, &mut rng).unwrap();
        let d = share.keys[&AttributeId::new(1, 2)];
        // D = g2^{y/t}
        let expected = mpk.g2.pow(&sec.prf_eval(&id).div(&sec.attr_exponents[1]).unwrap());
        assert_eq!(d, expected);
        let paired = Toy101::pair(&d, &publ.attr_keys[1]);
        assert_eq!(Toy101::target_dlog(&paired).unwrap(), msk.w1.mul(&sec.prf_eval(&id)));
    }

    #[test]
    fn threshold_reconstruction_needs_d_shares() {
        type B = ToyM61;
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (mpk, msk) = global_setup::<B, _>(1, &mut rng).unwrap();
        let (sec, publ) = authority_setup::<B, _>(1, 5, &mut rng).unwrap();
        let id = Identity::new("bob");
        let tree = AccessNode::threshold_of(3, (1..=5).map(|i| AttributeId::new(1, i))).unwrap();
        let share = sec.issue_attribute_keys(&mpk, &id, &tree, &mut rng).unwrap();
        let s = ToyScalar::<MERSENNE_61>::new(12345);
        let g_s = B::generator().pow(&s);
        let leaf_values: BTreeMap<_, _> = share
            .keys
            .iter()
            .map(|(a, d)| (*a, B::pair(&publ.attribute_key(*a).unwrap().pow(&s), d)))
            .collect();
        let expected = B::pair(&g_s, &mpk.g2).pow(&sec.prf_eval(&id));
        let three: BTreeSet<_> = [1, 3, 5].iter().map(|&i| AttributeId::new(1, i)).collect();
        assert_eq!(tree.reconstruct_in_target::<B>(&leaf_values, &three).unwrap(), expected);
        // d-1 shares interpolated as if they were enough do not yield Y^s
        let two = AccessNode::threshold_of(2, [AttributeId::new(1, 1), AttributeId::new(1, 3)]).unwrap();
        let wrong = two
            .reconstruct_in_target::<B>(&leaf_values, &three)
            .unwrap();
        assert_ne!(wrong, expected);
        let _ = msk;
        let _ = gt_generator::<B>();
    }

    #[test]
    fn mixing_users_breaks_reconstruction() {
        type B = ToyM61;
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (mpk, _) = global_setup::<B, _>(1, &mut rng).unwrap();
        let (sec, publ) = authority_setup::<B, _>(1, 2, &mut rng).unwrap();
        let tree = AccessNode::threshold_of(2, [AttributeId::new(1, 1), AttributeId::new(1, 2)]).unwrap();
        let alice = Identity::new("alice");
        let bob = Identity::new("bob");
        let sa = sec.issue_attribute_keys(&mpk, &alice, &tree, &mut rng).unwrap();
        let sb = sec.issue_attribute_keys(&mpk, &bob, &tree, &mut rng).unwrap();
        let s = ToyScalar::new(99);
        let a1 = AttributeId::new(1, 1);
        let a2 = AttributeId::new(1, 2);
        let val = |d: &<B as Backend>::Source, a| B::pair(&publ.attribute_key(a).unwrap().pow(&s), d);
        let mixed = BTreeMap::from([(a1, val(&sa.keys[&a1], a1)), (a2, val(&sb.keys[&a2], a2))]);
        let all: BTreeSet<_> = [a1, a2].into();
        let out = tree.reconstruct_in_target::<B>(&mixed, &all).unwrap();
        let g_s = B::generator().pow(&s);
        for y in [sec.prf_eval(&alice), sec.prf_eval(&bob)] {
            assert_ne!(out, B::pair(&g_s, &mpk.g2).pow(&y));
        }
    }

    #[test]
    fn issuance_errors() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (mpk, _) = global_setup::<Toy101, _>(2, &mut rng).unwrap();
        let (sec, _) = authority_setup::<Toy101, _>(1, 2, &mut rng).unwrap();
        let id = Identity::new("carol");
        assert!(matches!(
            sec.issue_attribute_keys(&mpk, &id, &AccessNode::leaf(2, 1), &mut rng),
            Err(Error::Jurisdiction { .. })
        ));
        assert!(matches!(
            sec.issue_attribute_keys(&mpk, &id, &AccessNode::leaf(1, 3), &mut rng),
            Err(Error::Argument(_))
        ));
    }
}
