//! Keyed hashing into `Z_p`.
//!
//! HMAC-SHA256 in counter mode; the output is masked to the bit length of
//! `p` and rejected when `>= p`, so the result is unbiased.

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use crate::pairing::Field;

type HmacSha256 = Hmac<Sha256>;

pub(crate) const DOMAIN_IDENTITY: &[u8] = b"maabe/v1/identity";
pub(crate) const DOMAIN_PRF: &[u8] = b"maabe/v1/authority-prf";
pub(crate) const DOMAIN_TRACE: &[u8] = b"maabe/v1/trace-map";
pub(crate) const DOMAIN_CHALLENGE: &[u8] = b"maabe/v1/pok-challenge";

/// Public key for unkeyed uses (identity encoding, Fiat-Shamir challenges).
const PUBLIC_KEY: &[u8] = b"maabe/v1/public-hash-key";

fn block(key: &[u8], domain: &[u8], msg: &[u8], counter: u32) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(&(domain.len() as u32).to_be_bytes());
    mac.update(domain);
    mac.update(&counter.to_be_bytes());
    mac.update(msg);
    mac.finalize().into_bytes().into()
}

/// Maps `(key, domain, msg)` to a scalar. With `nonzero`, zero is rejected too.
pub fn keyed_hash_to_scalar<F: Field>(key: &[u8], domain: &[u8], msg: &[u8], nonzero: bool) -> F {
    let bits = F::modulus_bits() as usize;
    let excess = F::BYTES * 8 - bits;
    let mut counter = 0u32;
    loop {
        let mut bytes = Vec::with_capacity(F::BYTES);
        while bytes.len() < F::BYTES {
            bytes.extend_from_slice(&block(key, domain, msg, counter));
            counter += 1;
        }
        bytes.truncate(F::BYTES);
        for (i, b) in bytes.iter_mut().enumerate().take(excess.div_ceil(8)) {
            let drop = excess.saturating_sub(8 * i).min(8);
            *b &= (0xffu16 >> drop) as u8;
        }
        if let Some(v) = F::from_bytes(&bytes) {
            if !(nonzero && v.is_zero()) {
                return v;
            }
        }
    }
}

pub fn hash_to_scalar<F: Field>(domain: &[u8], msg: &[u8], nonzero: bool) -> F {
    keyed_hash_to_scalar(PUBLIC_KEY, domain, msg, nonzero)
}
