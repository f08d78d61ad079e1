//! The IND-SS-CPA game against the real scheme.
//!
//! Init: the adversary names `ω*`. Setup: public parameters and authority
//! public keys go out. Phase 1 and Phase 2: key queries, each refused with a
//! game abort when the key's policy accepts `ω*`. Challenge: `M_v` under
//! `ω*` for a fair coin `v`. Guess: the adversary wins iff `v' = v`.

use std::collections::BTreeSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::Deployment;
use crate::access_tree::{AccessNode, AttributeId};
use crate::authority::AuthorityPublic;
use crate::error::{Error, Result};
use crate::pairing::{random_target_element, Backend};
use crate::scheme::{decrypt, decrypt_trusted_key, encrypt, Ciphertext, Identity, PublicParams, UserKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub authority_count: u32,
    pub attributes_per_authority: u32,
    /// Hand the adversary a key for `ω*` outside the query interface.
    pub plant_key: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            authority_count: 2,
            attributes_per_authority: 3,
            plant_key: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyQuery {
    pub id: Identity,
    /// One tree per authority, in authority order.
    pub trees: Vec<AccessNode>,
}

pub trait GameAdversary<B: Backend> {
    fn declare_target(&mut self, config: &GameConfig, rng: &mut dyn RngCore) -> BTreeSet<AttributeId>;

    fn setup(&mut self, _mpk: &PublicParams<B>, _publics: &[AuthorityPublic<B>]) {}

    fn key_queries(&mut self, _phase: Phase, _rng: &mut dyn RngCore) -> Vec<KeyQuery> {
        Vec::new()
    }

    fn receive_keys(&mut self, _phase: Phase, _keys: Vec<UserKey<B>>) {}

    fn receive_planted_key(&mut self, _key: UserKey<B>) {}

    fn choose_messages(&mut self, rng: &mut dyn RngCore) -> (B::Target, B::Target) {
        (random_target_element::<B, _>(rng), random_target_element::<B, _>(rng))
    }

    /// Returns `v'`: `false` for `M_0`, `true` for `M_1`.
    fn guess(&mut self, challenge: &Ciphertext<B>, rng: &mut dyn RngCore) -> bool;
}

fn answer_queries<B: Backend, A: GameAdversary<B> + ?Sized>(
    adversary: &mut A,
    phase: Phase,
    world: &mut Deployment<B>,
    target: &BTreeSet<AttributeId>,
    rng: &mut ChaCha20Rng,
) -> Result<()> {
    let queries = adversary.key_queries(phase, rng);
    let mut keys = Vec::with_capacity(queries.len());
    for q in queries {
        if q.trees.len() != world.authorities.len() {
            return Err(Error::GameAbort(format!("query for {} has {} trees", q.id, q.trees.len())));
        }
        if q.trees.iter().all(|t| t.satisfies(target)) {
            return Err(Error::GameAbort(format!("query for {} accepts the target set", q.id)));
        }
        let key = world
            .issue_key(&q.id, &q.trees, rng)
            .map_err(|e| Error::GameAbort(format!("query for {} is malformed: {e}", q.id)))?;
        keys.push(key);
    }
    adversary.receive_keys(phase, keys);
    Ok(())
}

/// One execution of the game. `Ok(true)` when the adversary guesses `v`.
pub fn run_ind_ss_cpa_game<B: Backend, A: GameAdversary<B> + ?Sized>(
    adversary: &mut A,
    config: &GameConfig,
    rng: &mut ChaCha20Rng,
) -> Result<bool> {
    let target = adversary.declare_target(config, rng);
    let in_universe = |a: &AttributeId| {
        (1..=config.authority_count).contains(&a.authority) && (1..=config.attributes_per_authority).contains(&a.index)
    };
    if target.is_empty() || !target.iter().all(in_universe) {
        return Err(Error::GameAbort("target set is empty or outside the attribute universe".into()));
    }

    let mut world = Deployment::<B>::new(config.authority_count, config.attributes_per_authority, rng)?;
    adversary.setup(&world.mpk, &world.publics);

    if config.plant_key {
        let trees = (1..=config.authority_count)
            .map(|k| AccessNode::threshold_of(1, target.iter().copied().filter(|a| a.authority == k)))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::GameAbort("target set misses an authority; no key can be planted".into()))?;
        let key = world.issue_key(&Identity::new("planted"), &trees, rng)?;
        adversary.receive_planted_key(key);
    }

    answer_queries(adversary, Phase::One, &mut world, &target, rng)?;

    let (m0, m1) = adversary.choose_messages(rng);
    let v = rng.gen::<bool>();
    let challenge = encrypt(&world.mpk, &world.publics, &target, if v { &m1 } else { &m0 }, rng)?;

    answer_queries(adversary, Phase::Two, &mut world, &target, rng)?;

    Ok(adversary.guess(&challenge, rng) == v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameStats {
    pub seed: u64,
    pub runs: u64,
    pub wins: u64,
    pub aborts: u64,
    pub win_rate: f64,
}

impl GameStats {
    /// Distance of the win rate from 1/2 in standard errors.
    pub fn sigma_from_half(&self) -> f64 {
        let n = (self.runs - self.aborts) as f64;
        if n == 0.0 {
            return 0.0;
        }
        (self.win_rate - 0.5) / (0.25 / n).sqrt()
    }
}

/// Runs `runs` independent games; run `i` uses stream `i` of `seed`.
pub fn win_rate<B: Backend, A: GameAdversary<B>>(
    mut make: impl FnMut() -> A,
    config: &GameConfig,
    runs: u64,
    seed: u64,
) -> GameStats {
    let (mut wins, mut aborts) = (0, 0);
    for i in 0..runs {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(i);
        match run_ind_ss_cpa_game::<B, A>(&mut make(), config, &mut rng) {
            Ok(true) => wins += 1,
            Ok(false) => {}
            Err(_) => aborts += 1,
        }
    }
    let played = runs - aborts;
    GameStats {
        seed,
        runs,
        wins,
        aborts,
        win_rate: if played == 0 { 0.0 } else { wins as f64 / played as f64 },
    }
}

/// Target `{k:1 : k ∈ 1..=K}`, one attribute per authority.
fn diagonal_target(config: &GameConfig) -> BTreeSet<AttributeId> {
    (1..=config.authority_count).map(|k| AttributeId::new(k, 1)).collect()
}

/// Ignores everything and flips a coin.
#[derive(Default)]
pub struct UniformGuesser;

impl<B: Backend> GameAdversary<B> for UniformGuesser {
    fn declare_target(&mut self, config: &GameConfig, _rng: &mut dyn RngCore) -> BTreeSet<AttributeId> {
        diagonal_target(config)
    }

    fn guess(&mut self, _challenge: &Ciphertext<B>, rng: &mut dyn RngCore) -> bool {
        rng.next_u32() & 1 == 1
    }
}

/// Asks for a key whose policy accepts `ω*` in the given phase.
pub struct ViolatingAdversary {
    pub phase: Phase,
    config: Option<GameConfig>,
}

impl ViolatingAdversary {
    pub fn new(phase: Phase) -> Self {
        ViolatingAdversary { phase, config: None }
    }
}

impl<B: Backend> GameAdversary<B> for ViolatingAdversary {
    fn declare_target(&mut self, config: &GameConfig, _rng: &mut dyn RngCore) -> BTreeSet<AttributeId> {
        self.config = Some(*config);
        diagonal_target(config)
    }

    fn key_queries(&mut self, phase: Phase, _rng: &mut dyn RngCore) -> Vec<KeyQuery> {
        if phase != self.phase {
            return Vec::new();
        }
        let config = self.config.expect("target declared first");
        vec![KeyQuery {
            id: Identity::new("greedy"),
            trees: (1..=config.authority_count).map(|k| AccessNode::leaf(k, 1)).collect(),
        }]
    }

    fn guess(&mut self, _challenge: &Ciphertext<B>, _rng: &mut dyn RngCore) -> bool {
        false
    }
}

/// Decrypts the challenge with a key obtained outside the game's checks.
pub struct PlantedKeyAdversary<B: Backend> {
    mpk: Option<PublicParams<B>>,
    key: Option<UserKey<B>>,
    messages: Option<(B::Target, B::Target)>,
}

impl<B: Backend> Default for PlantedKeyAdversary<B> {
    fn default() -> Self {
        PlantedKeyAdversary {
            mpk: None,
            key: None,
            messages: None,
        }
    }
}

impl<B: Backend> GameAdversary<B> for PlantedKeyAdversary<B> {
    fn declare_target(&mut self, config: &GameConfig, _rng: &mut dyn RngCore) -> BTreeSet<AttributeId> {
        diagonal_target(config)
    }

    fn setup(&mut self, mpk: &PublicParams<B>, _publics: &[AuthorityPublic<B>]) {
        self.mpk = Some(mpk.clone());
    }

    fn receive_planted_key(&mut self, key: UserKey<B>) {
        self.key = Some(key);
    }

    fn choose_messages(&mut self, rng: &mut dyn RngCore) -> (B::Target, B::Target) {
        let m = (random_target_element::<B, _>(rng), random_target_element::<B, _>(rng));
        self.messages = Some(m.clone());
        m
    }

    fn guess(&mut self, challenge: &Ciphertext<B>, rng: &mut dyn RngCore) -> bool {
        let (Some(mpk), Some(key), Some((m0, _))) = (&self.mpk, &self.key, &self.messages) else {
            return rng.next_u32() & 1 == 1;
        };
        match decrypt(mpk, key, challenge) {
            Ok(m) => m != *m0,
            Err(_) => rng.next_u32() & 1 == 1,
        }
    }
}

/// Two legal keys, each covering `ω*` at a different authority, spliced
/// into one key and used on the challenge.
pub struct ShareMixingAdversary<B: Backend> {
    mpk: Option<PublicParams<B>>,
    keys: Vec<UserKey<B>>,
    messages: Option<(B::Target, B::Target)>,
}

impl<B: Backend> Default for ShareMixingAdversary<B> {
    fn default() -> Self {
        ShareMixingAdversary {
            mpk: None,
            keys: Vec::new(),
            messages: None,
        }
    }
}

impl<B: Backend> GameAdversary<B> for ShareMixingAdversary<B> {
    fn declare_target(&mut self, _config: &GameConfig, _rng: &mut dyn RngCore) -> BTreeSet<AttributeId> {
        [AttributeId::new(1, 1), AttributeId::new(2, 1)].into()
    }

    fn setup(&mut self, mpk: &PublicParams<B>, _publics: &[AuthorityPublic<B>]) {
        self.mpk = Some(mpk.clone());
    }

    fn key_queries(&mut self, phase: Phase, _rng: &mut dyn RngCore) -> Vec<KeyQuery> {
        if phase == Phase::Two {
            return Vec::new();
        }
        vec![
            KeyQuery {
                id: Identity::new("left"),
                trees: vec![AccessNode::leaf(1, 1), AccessNode::leaf(2, 2)],
            },
            KeyQuery {
                id: Identity::new("right"),
                trees: vec![AccessNode::leaf(1, 2), AccessNode::leaf(2, 1)],
            },
        ]
    }

    fn receive_keys(&mut self, _phase: Phase, keys: Vec<UserKey<B>>) {
        self.keys.extend(keys);
    }

    fn choose_messages(&mut self, rng: &mut dyn RngCore) -> (B::Target, B::Target) {
        let m = (random_target_element::<B, _>(rng), random_target_element::<B, _>(rng));
        self.messages = Some(m.clone());
        m
    }

    fn guess(&mut self, challenge: &Ciphertext<B>, rng: &mut dyn RngCore) -> bool {
        let (Some(mpk), Some((m0, m1)), [left, right]) = (&self.mpk, &self.messages, self.keys.as_slice()) else {
            return rng.next_u32() & 1 == 1;
        };
        let mut spliced = left.clone();
        spliced.attribute_shares[1] = right.attribute_shares[1].clone();
        match decrypt_trusted_key(mpk, &spliced, challenge) {
            Ok(m) if m == *m0 => false,
            Ok(m) if m == *m1 => true,
            _ => rng.next_u32() & 1 == 1,
        }
    }
}
