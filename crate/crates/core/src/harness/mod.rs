//! Executable security and cost evidence: the selective-set CPA game, the
//! collusion experiments, and the instrumented benchmark.

pub mod bench;
pub mod collusion;
pub mod game;
pub mod symbolic;

use rand::RngCore;

use crate::access_tree::AccessNode;
use crate::authority::{authority_setup, AuthorityPublic, AuthoritySecret};
use crate::central_authority::{ca_issue, CaSecret, ChallengeOrigin, TraceTable};
use crate::error::{Error, Result};
use crate::pairing::Backend;
use crate::scheme::{finalize_key, global_setup, request_key, Identity, PublicParams, UserKey};

pub use bench::{bench, BenchParams, BenchReport};
pub use collusion::{collusion_authority_pool_test, collusion_user_pool_test, AuthorityPoolReport, CollusionReport};
pub use game::{run_ind_ss_cpa_game, win_rate, GameAdversary, GameConfig, GameStats, KeyQuery, Phase};

/// Every party of a deployment in one place, for tests and experiments.
pub struct Deployment<B: Backend> {
    pub mpk: PublicParams<B>,
    pub ca: CaSecret<B>,
    pub authorities: Vec<AuthoritySecret<B>>,
    pub publics: Vec<AuthorityPublic<B>>,
    pub table: TraceTable<B>,
}

impl<B: Backend> Deployment<B> {
    /// `authority_count` authorities with `attributes_per_authority` attributes each.
    pub fn new<R: RngCore + ?Sized>(authority_count: u32, attributes_per_authority: u32, rng: &mut R) -> Result<Self> {
        let (mpk, msk) = global_setup::<B, _>(authority_count, rng)?;
        let mut ca = CaSecret::new(msk, rng);
        let mut authorities = Vec::new();
        let mut publics = Vec::new();
        for k in 1..=authority_count {
            let (s, p) = authority_setup::<B, _>(k, attributes_per_authority, rng)?;
            ca.enroll_authority(k, s.seed().clone());
            authorities.push(s);
            publics.push(p);
        }
        Ok(Deployment {
            mpk,
            ca,
            authorities,
            publics,
            table: TraceTable::new(),
        })
    }

    /// Runs the full issuance protocol; `trees[k-1]` goes to authority `k`.
    pub fn issue_key<R: RngCore + ?Sized>(&mut self, id: &Identity, trees: &[AccessNode], rng: &mut R) -> Result<UserKey<B>> {
        if trees.len() != self.authorities.len() {
            return Err(Error::Argument(format!(
                "need {} trees, got {}",
                self.authorities.len(),
                trees.len()
            )));
        }
        let (request, message) = request_key(&self.mpk, id, rng);
        let shares = self
            .authorities
            .iter()
            .zip(trees)
            .map(|(a, t)| a.issue_attribute_keys(&self.mpk, id, t, rng))
            .collect::<Result<Vec<_>>>()?;
        let partial = ca_issue(
            &self.ca,
            &self.mpk,
            &mut self.table,
            id,
            &message.commitment,
            &message.proof,
            ChallengeOrigin::Derived,
            shares,
            rng,
        )?;
        finalize_key(&self.mpk, &request, partial, id)
    }
}
