//! Multi-authority attribute-based encryption with white-box traceability.
//!
//! `K` attribute authorities each manage a disjoint attribute universe and
//! hand out per-user key shares laid over threshold access trees. A fully
//! trusted central authority binds those shares to a registered identity
//! through a blinded issuing protocol, which also makes every well-formed
//! decryption key traceable back to its owner.
//!
//! Every algorithm is generic over a [`pairing::Backend`]: [`pairing::Bls12`]
//! for real use, and [`pairing::Toy`] (an exponent-carrying group that exposes
//! discrete logarithms) for exact algebraic testing.

pub mod access_tree;
pub mod authority;
pub mod central_authority;
pub mod error;
pub mod formats;
pub mod harness;
pub mod hash;
pub mod pairing;
pub mod pok;
pub mod scheme;

pub use access_tree::{AccessNode, AttributeId};
pub use authority::{AttributeKeyShare, AuthorityPublic, AuthoritySecret};
pub use central_authority::{CaSecret, PartialKey, TraceTable};
pub use error::{Error, Result};
pub use pairing::{Backend, Bls12, Field, Group, Toy, Toy101, ToyM61};
pub use pok::PokTranscript;
pub use scheme::{Ciphertext, HybridCiphertext, Identity, IssuanceRequest, KeyRequest, MasterSecret, PublicParams, UserKey};
