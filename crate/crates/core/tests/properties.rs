use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use maabe::central_authority::{key_wellformed, trace};
use maabe::formats::{load, save};
use maabe::harness::Deployment;
use maabe::pairing::random_target_element;
use maabe::scheme::{decrypt, decryption_factors, encrypt};
use maabe::{AccessNode, AttributeId, Backend, Field, Identity, ToyM61, UserKey};

const N: u32 = 5;

/// `(threshold, picks)` per authority: a `t`-of-`N` gate, and which leaves
/// the ciphertext carries.
fn policy() -> impl Strategy<Value = Vec<(u32, Vec<bool>)>> {
    prop::collection::vec(
        (1..=N).prop_flat_map(|t| (Just(t), prop::collection::vec(any::<bool>(), N as usize))),
        1..=3,
    )
}

fn build(spec: &[(u32, Vec<bool>)]) -> (Vec<AccessNode>, BTreeSet<AttributeId>, bool) {
    let mut trees = Vec::new();
    let mut attrs = BTreeSet::new();
    let mut satisfied = true;
    for (k, (t, picks)) in spec.iter().enumerate() {
        let a = k as u32 + 1;
        trees.push(AccessNode::threshold_of(*t, (1..=N).map(|i| AttributeId::new(a, i))).unwrap());
        let chosen: Vec<_> = (1..=N).filter(|i| picks[*i as usize - 1]).collect();
        satisfied &= chosen.len() as u32 >= *t;
        attrs.extend(chosen.into_iter().map(|i| AttributeId::new(a, i)));
    }
    (trees, attrs, satisfied)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decrypts_exactly_when_every_tree_accepts(spec in policy(), seed in any::<u64>()) {
        let (trees, attrs, satisfied) = build(&spec);
        prop_assume!(!attrs.is_empty());
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut world = Deployment::<ToyM61>::new(spec.len() as u32, N, &mut rng).unwrap();
        let key = world.issue_key(&Identity::new("p"), &trees, &mut rng).unwrap();
        let m = random_target_element::<ToyM61, _>(&mut rng);
        let ct = encrypt(&world.mpk, &world.publics, &attrs, &m, &mut rng).unwrap();
        let out = decrypt(&world.mpk, &key, &ct);
        if satisfied {
            prop_assert_eq!(out.unwrap(), m);
        } else {
            prop_assert!(matches!(out, Err(maabe::Error::PolicyNotSatisfied)));
        }
    }

    #[test]
    fn rerandomized_keys_decrypt_trace_and_round_trip(seed in any::<u64>(), rounds in 1usize..4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut world = Deployment::<ToyM61>::new(2, 3, &mut rng).unwrap();
        let trees = [AccessNode::leaf(1, 2), AccessNode::leaf(2, 3)];
        let id = Identity::new(format!("u{seed}"));
        let mut key = world.issue_key(&id, &trees, &mut rng).unwrap();
        let attrs: BTreeSet<_> = [AttributeId::new(1, 2), AttributeId::new(2, 3)].into();
        let m = random_target_element::<ToyM61, _>(&mut rng);
        let ct = encrypt(&world.mpk, &world.publics, &attrs, &m, &mut rng).unwrap();
        for _ in 0..rounds {
            key = key.rerandomize(&world.mpk, &mut rng);
            prop_assert!(key_wellformed(&world.mpk, &key, &id.scalar()));
            prop_assert_eq!(&trace(&world.mpk, &world.table, &key).unwrap(), &id);
            prop_assert_eq!(decrypt(&world.mpk, &key, &ct).unwrap(), m.clone());
        }
        let back: UserKey<ToyM61> = load(&save(&key)).unwrap();
        prop_assert_eq!(save(&back), save(&key));
    }

    #[test]
    fn factor_exponents_follow_the_secrets(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut world = Deployment::<ToyM61>::new(1, 2, &mut rng).unwrap();
        let key = world.issue_key(&Identity::new("f"), &[AccessNode::leaf(1, 1)], &mut rng).unwrap();
        let attrs: BTreeSet<_> = [AttributeId::new(1, 1)].into();
        let m = random_target_element::<ToyM61, _>(&mut rng);
        let ct = encrypt(&world.mpk, &world.publics, &attrs, &m, &mut rng).unwrap();
        let f = decryption_factors(&world.mpk, &key, &ct).unwrap();
        let msk = &world.ca.master;
        let s = ToyM61::source_dlog(&ct.c_g).unwrap();
        let y0s = msk.y0.mul(&s);
        prop_assert_eq!(ToyM61::target_dlog(&f.attribute_part).unwrap(), msk.w1.mul(&y0s));
        prop_assert_eq!(ToyM61::target_dlog(&f.identity_part).unwrap(), msk.w2.mul(&y0s));
    }

    #[test]
    fn corrupted_envelopes_never_load(seed in any::<u64>(), pos in any::<prop::sample::Index>(), bit in 0u8..8) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut world = Deployment::<ToyM61>::new(1, 2, &mut rng).unwrap();
        let key = world.issue_key(&Identity::new("c"), &[AccessNode::leaf(1, 1)], &mut rng).unwrap();
        let mut bytes = save(&key);
        let i = pos.index(bytes.len());
        bytes[i] ^= 1 << bit;
        prop_assert!(load::<ToyM61, UserKey<ToyM61>>(&bytes).is_err());
    }
}
