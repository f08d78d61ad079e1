//! Binary encodings and file envelopes.
//!
//! Every persisted object is wrapped as
//!
//! ```text
//! magic[12] | version u8 | backend u8 | payload_len u32 BE | payload | sha256[32]
//! ```
//!
//! where the checksum covers everything before it. The magic is the object's
//! role, NUL-padded. Payloads start with a variant byte where a role holds
//! more than one kind of object.
//!
//! Inside a payload, integers are big-endian, byte strings and lists carry a
//! `u32` length, scalars are fixed-width big-endian, and group elements use
//! the self-describing element encoding from [`crate::pairing`].

use std::collections::{BTreeMap, BTreeSet};
use std::marker::PhantomData;

use sha2::{Digest, Sha256};

use crate::access_tree::{AccessNode, AttributeId};
use crate::authority::{AttributeKeyShare, AuthorityPublic, AuthoritySecret, PrfSeed, SEED_BYTES};
use crate::central_authority::{CaSecret, PartialKey, TraceRow, TraceTable, TRACE_KEY_BYTES};
use crate::error::{Error, Result};
use crate::pairing::{decode_source, decode_target, encode_source, encode_target, Backend, Field};
use crate::pok::PokTranscript;
use crate::scheme::{Ciphertext, HybridCiphertext, Identity, IssuanceRequest, KeyRequest, MasterSecret, PublicParams, UserKey, NONCE_BYTES};

pub const FORMAT_VERSION: u8 = 1;
pub const MAGIC_BYTES: usize = 12;
const HEADER_BYTES: usize = MAGIC_BYTES + 1 + 1 + 4;
const CHECKSUM_BYTES: usize = 32;
const MAX_TREE_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    PublicParams,
    MasterSecret,
    Authority,
    Key,
    Ciphertext,
    Proof,
    Table,
}

impl Role {
    pub fn magic(self) -> [u8; MAGIC_BYTES] {
        let name: &[u8] = match self {
            Role::PublicParams => b"MAABE1-MPK",
            Role::MasterSecret => b"MAABE1-MSK",
            Role::Authority => b"MAABE1-AUTH",
            Role::Key => b"MAABE1-KEY",
            Role::Ciphertext => b"MAABE1-CT",
            Role::Proof => b"MAABE1-POK",
            Role::Table => b"MAABE1-TBL",
        };
        let mut m = [0u8; MAGIC_BYTES];
        m[..name.len()].copy_from_slice(name);
        m
    }
}

/// Sizes of the group-element and scalar content read from a payload.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ElementCounts {
    pub scalars: usize,
    pub sources: usize,
    pub targets: usize,
}

pub struct Writer<B: Backend> {
    buf: Vec<u8>,
    _backend: PhantomData<B>,
}

impl<B: Backend> Default for Writer<B> {
    fn default() -> Self {
        Self::new()
    }
}

impl<B: Backend> Writer<B> {
    pub fn new() -> Self {
        Writer {
            buf: Vec::new(),
            _backend: PhantomData,
        }
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("length fits in u32"));
    }

    pub fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn bytes(&mut self, bytes: &[u8]) {
        self.len(bytes.len());
        self.raw(bytes);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    pub fn scalar(&mut self, x: &B::Scalar) {
        self.raw(&x.to_bytes());
    }

    pub fn source(&mut self, x: &B::Source) {
        encode_source::<B>(x, &mut self.buf);
    }

    pub fn target(&mut self, x: &B::Target) {
        encode_target::<B>(x, &mut self.buf);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a, B: Backend> {
    buf: &'a [u8],
    pos: usize,
    pub counts: ElementCounts,
    _backend: PhantomData<B>,
}

impl<'a, B: Backend> Reader<'a, B> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader {
            buf,
            pos: 0,
            counts: ElementCounts::default(),
            _backend: PhantomData,
        }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Validation(format!(
                "truncated: need {n} bytes at offset {}, have {}",
                self.pos,
                self.remaining()
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.raw(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.raw(4)?.try_into().unwrap()))
    }

    /// A list length, bounded by the bytes left assuming `min_item` bytes per item.
    pub fn len(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item.max(1)) > self.remaining() {
            return Err(Error::Validation(format!("length {n} exceeds remaining input")));
        }
        Ok(n)
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.len(1)?;
        self.raw(n)
    }

    pub fn str(&mut self) -> Result<&'a str> {
        std::str::from_utf8(self.bytes()?).map_err(|_| Error::Validation("string is not UTF-8".into()))
    }

    pub fn scalar(&mut self) -> Result<B::Scalar> {
        let bytes = self.raw(<B::Scalar as Field>::BYTES)?;
        let x = B::Scalar::from_bytes(bytes).ok_or_else(|| Error::Validation("scalar is not reduced".into()))?;
        self.counts.scalars += 1;
        Ok(x)
    }

    pub fn source(&mut self) -> Result<B::Source> {
        let x = decode_source::<B>(self.raw(B::SOURCE_BYTES + 2)?)?;
        self.counts.sources += 1;
        Ok(x)
    }

    pub fn target(&mut self) -> Result<B::Target> {
        let x = decode_target::<B>(self.raw(B::TARGET_BYTES + 2)?)?;
        self.counts.targets += 1;
        Ok(x)
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Validation(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

/// Payload encoding of one object.
pub trait Wire<B: Backend>: Sized {
    fn write(&self, w: &mut Writer<B>);
    fn read(r: &mut Reader<'_, B>) -> Result<Self>;
}

/// An object that can be saved as a file.
pub trait Artifact<B: Backend>: Wire<B> {
    const ROLE: Role;
    const VARIANT: u8;
    const SECRET: bool;
}

pub fn to_payload<B: Backend, T: Wire<B>>(x: &T) -> Vec<u8> {
    let mut w = Writer::<B>::new();
    x.write(&mut w);
    w.into_bytes()
}

/// Envelope bytes for `x`.
pub fn save<B: Backend, T: Artifact<B>>(x: &T) -> Vec<u8> {
    let mut w = Writer::<B>::new();
    w.u8(T::VARIANT);
    x.write(&mut w);
    let payload = w.into_bytes();
    let mut out = Vec::with_capacity(HEADER_BYTES + payload.len() + CHECKSUM_BYTES);
    out.extend_from_slice(&T::ROLE.magic());
    out.push(FORMAT_VERSION);
    out.push(B::ID);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

/// Like [`save`] but refuses secret material.
pub fn save_public<B: Backend, T: Artifact<B>>(x: &T) -> Result<Vec<u8>> {
    if T::SECRET {
        return Err(Error::Argument(format!("{:?} holds secret material", T::ROLE)));
    }
    Ok(save(x))
}

/// Header fields of an envelope, checked only for shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvelopeHeader {
    pub role: Option<Role>,
    pub version: u8,
    pub backend: u8,
}

pub fn peek_header(bytes: &[u8]) -> Result<EnvelopeHeader> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Validation("file too short for an envelope".into()));
    }
    let magic: [u8; MAGIC_BYTES] = bytes[..MAGIC_BYTES].try_into().unwrap();
    let role = [
        Role::PublicParams,
        Role::MasterSecret,
        Role::Authority,
        Role::Key,
        Role::Ciphertext,
        Role::Proof,
        Role::Table,
    ]
    .into_iter()
    .find(|r| r.magic() == magic);
    Ok(EnvelopeHeader {
        role,
        version: bytes[MAGIC_BYTES],
        backend: bytes[MAGIC_BYTES + 1],
    })
}

/// Parses an envelope holding a `T`, with element counts of its payload.
pub fn load_counted<B: Backend, T: Artifact<B>>(bytes: &[u8]) -> Result<(T, ElementCounts)> {
    let header = peek_header(bytes)?;
    if header.role != Some(T::ROLE) {
        return Err(Error::Validation(format!("not a {:?} file", T::ROLE)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Version(header.version));
    }
    if header.backend != B::ID {
        return Err(Error::BackendMismatch {
            expected: B::ID,
            found: header.backend,
        });
    }
    let len = u32::from_be_bytes(bytes[MAGIC_BYTES + 2..HEADER_BYTES].try_into().unwrap()) as usize;
    if bytes.len() != HEADER_BYTES + len + CHECKSUM_BYTES {
        return Err(Error::Corruption);
    }
    let (body, digest) = bytes.split_at(HEADER_BYTES + len);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Corruption);
    }
    let mut r = Reader::<B>::new(&body[HEADER_BYTES..]);
    let variant = r.u8()?;
    if variant != T::VARIANT {
        return Err(Error::Validation(format!("unexpected {:?} variant {variant}", T::ROLE)));
    }
    let x = T::read(&mut r)?;
    r.finish()?;
    if save(&x) != bytes {
        return Err(Error::Validation("non-canonical encoding".into()));
    }
    Ok((x, r.counts))
}

pub fn load<B: Backend, T: Artifact<B>>(bytes: &[u8]) -> Result<T> {
    load_counted(bytes).map(|(x, _)| x)
}

macro_rules! artifact {
    ($ty:ident, $role:expr, $variant:expr, $secret:expr) => {
        impl<B: Backend> Artifact<B> for $ty<B> {
            const ROLE: Role = $role;
            const VARIANT: u8 = $variant;
            const SECRET: bool = $secret;
        }
    };
}

artifact!(PublicParams, Role::PublicParams, 0, false);
artifact!(CaSecret, Role::MasterSecret, 0, true);
artifact!(AuthoritySecret, Role::Authority, 0, true);
artifact!(AuthorityPublic, Role::Authority, 1, false);
artifact!(UserKey, Role::Key, 0, true);
artifact!(PartialKey, Role::Key, 1, true);
artifact!(KeyRequest, Role::Key, 2, true);
artifact!(AttributeKeyShare, Role::Key, 3, true);
artifact!(Ciphertext, Role::Ciphertext, 0, false);
artifact!(HybridCiphertext, Role::Ciphertext, 1, false);
artifact!(IssuanceRequest, Role::Proof, 0, false);
artifact!(TraceTable, Role::Table, 0, true);

fn write_attr<B: Backend>(w: &mut Writer<B>, a: AttributeId) {
    w.u32(a.authority);
    w.u32(a.index);
}

fn read_attr<B: Backend>(r: &mut Reader<'_, B>) -> Result<AttributeId> {
    let a = AttributeId {
        authority: r.u32()?,
        index: r.u32()?,
    };
    if a.authority == 0 || a.index == 0 {
        return Err(Error::Validation(format!("attribute {a} uses a zero index")));
    }
    Ok(a)
}

/// Writes a map sorted by key; readers reject unsorted or repeated keys.
fn write_source_map<B: Backend>(w: &mut Writer<B>, m: &BTreeMap<AttributeId, B::Source>) {
    w.len(m.len());
    for (a, x) in m {
        write_attr(w, *a);
        w.source(x);
    }
}

fn read_source_map<B: Backend>(r: &mut Reader<'_, B>) -> Result<BTreeMap<AttributeId, B::Source>> {
    let n = r.len(8 + B::SOURCE_BYTES + 2)?;
    let mut m = BTreeMap::new();
    let mut last = None;
    for _ in 0..n {
        let a = read_attr(r)?;
        if last.is_some_and(|l| l >= a) {
            return Err(Error::Validation("attribute map is not strictly ordered".into()));
        }
        last = Some(a);
        m.insert(a, r.source()?);
    }
    Ok(m)
}

impl<B: Backend> Wire<B> for AccessNode {
    fn write(&self, w: &mut Writer<B>) {
        match self {
            AccessNode::Leaf(a) => {
                w.u8(0);
                write_attr(w, *a);
            }
            AccessNode::Gate { threshold, children } => {
                w.u8(1);
                w.u32(*threshold);
                w.len(children.len());
                for c in children {
                    Wire::<B>::write(c, w);
                }
            }
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        fn node<B: Backend>(r: &mut Reader<'_, B>, depth: usize) -> Result<AccessNode> {
            if depth > MAX_TREE_DEPTH {
                return Err(Error::Validation("access tree too deep".into()));
            }
            match r.u8()? {
                0 => Ok(AccessNode::Leaf(read_attr(r)?)),
                1 => {
                    let threshold = r.u32()?;
                    let n = r.len(9)?;
                    let children = (0..n).map(|_| node(r, depth + 1)).collect::<Result<Vec<_>>>()?;
                    Ok(AccessNode::Gate { threshold, children })
                }
                t => Err(Error::Validation(format!("unknown tree node tag {t}"))),
            }
        }
        let tree = node(r, 0)?;
        tree.validate().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(tree)
    }
}

impl<B: Backend> Wire<B> for Identity {
    fn write(&self, w: &mut Writer<B>) {
        w.str(self.as_str());
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(Identity::new(r.str()?))
    }
}

impl<B: Backend> Wire<B> for PublicParams<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.u32(self.authority_count);
        for x in [&self.gx, &self.gy, &self.z, &self.h, &self.g1, &self.g2, &self.g3, &self.g4, &self.y1] {
            w.source(x);
        }
        w.target(&self.pair_y0);
        w.target(&self.pair_y1);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let authority_count = r.u32()?;
        if authority_count == 0 {
            return Err(Error::Validation("zero authorities".into()));
        }
        let mpk = PublicParams {
            authority_count,
            gx: r.source()?,
            gy: r.source()?,
            z: r.source()?,
            h: r.source()?,
            g1: r.source()?,
            g2: r.source()?,
            g3: r.source()?,
            g4: r.source()?,
            y1: r.source()?,
            pair_y0: r.target()?,
            pair_y1: r.target()?,
        };
        if mpk.g4 != crate::pairing::Group::mul(&mpk.g2, &mpk.g3) {
            return Err(Error::Validation("g4 is not g2 * g3".into()));
        }
        Ok(mpk)
    }
}

impl<B: Backend> Wire<B> for MasterSecret<B> {
    fn write(&self, w: &mut Writer<B>) {
        for x in [&self.x, &self.y, &self.y0, &self.y1, &self.w1, &self.w2] {
            w.scalar(x);
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        MasterSecret::from_parts(r.scalar()?, r.scalar()?, r.scalar()?, r.scalar()?, r.scalar()?, r.scalar()?)
            .map_err(|e| Error::Validation(e.to_string()))
    }
}

impl<B: Backend> Wire<B> for CaSecret<B> {
    fn write(&self, w: &mut Writer<B>) {
        self.master.write(w);
        w.raw(&self.trace_key);
        w.len(self.authority_seeds.len());
        for (k, seed) in &self.authority_seeds {
            w.u32(*k);
            w.raw(seed.as_bytes());
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let master = MasterSecret::read(r)?;
        let trace_key: [u8; TRACE_KEY_BYTES] = r.raw(TRACE_KEY_BYTES)?.try_into().unwrap();
        let n = r.len(4 + SEED_BYTES)?;
        let mut seeds = BTreeMap::new();
        for _ in 0..n {
            let k = r.u32()?;
            let seed = PrfSeed::from_bytes(r.raw(SEED_BYTES)?.try_into().unwrap());
            if seeds.last_key_value().is_some_and(|(last, _)| *last >= k) {
                return Err(Error::Validation("authority seeds out of order".into()));
            }
            seeds.insert(k, seed);
        }
        Ok(CaSecret::from_parts(master, trace_key, seeds))
    }
}

impl<B: Backend> Wire<B> for AuthoritySecret<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.u32(self.index);
        w.raw(self.seed.as_bytes());
        w.len(self.attr_exponents.len());
        for t in &self.attr_exponents {
            w.scalar(t);
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let index = r.u32()?;
        let seed = PrfSeed::from_bytes(r.raw(SEED_BYTES)?.try_into().unwrap());
        let n = r.len(<B::Scalar as Field>::BYTES)?;
        let exps = (0..n).map(|_| r.scalar()).collect::<Result<Vec<_>>>()?;
        AuthoritySecret::from_parts(index, seed, exps).map_err(|e| Error::Validation(e.to_string()))
    }
}

impl<B: Backend> Wire<B> for AuthorityPublic<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.u32(self.index);
        w.len(self.attr_keys.len());
        for t in &self.attr_keys {
            w.source(t);
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let index = r.u32()?;
        if index == 0 {
            return Err(Error::Validation("authority index 0".into()));
        }
        let n = r.len(B::SOURCE_BYTES + 2)?;
        let attr_keys = (0..n).map(|_| r.source()).collect::<Result<Vec<_>>>()?;
        Ok(AuthorityPublic { index, attr_keys })
    }
}

impl<B: Backend> Wire<B> for AttributeKeyShare<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.u32(self.authority);
        Wire::<B>::write(&self.tree, w);
        write_source_map(w, &self.keys);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let authority = r.u32()?;
        let tree: AccessNode = Wire::<B>::read(r)?;
        let keys = read_source_map(r)?;
        let leaves: BTreeSet<_> = tree.leaves().into_iter().collect();
        if leaves != keys.keys().copied().collect() {
            return Err(Error::Validation("attribute keys do not match the tree's leaves".into()));
        }
        if leaves.iter().any(|a| a.authority != authority) {
            return Err(Error::Validation(format!("tree of authority {authority} has foreign leaves")));
        }
        Ok(AttributeKeyShare { authority, tree, keys })
    }
}

fn write_shares<B: Backend>(w: &mut Writer<B>, shares: &[AttributeKeyShare<B>]) {
    w.len(shares.len());
    for s in shares {
        s.write(w);
    }
}

fn read_shares<B: Backend>(r: &mut Reader<'_, B>) -> Result<Vec<AttributeKeyShare<B>>> {
    let n = r.len(4)?;
    let shares = (0..n).map(|_| AttributeKeyShare::read(r)).collect::<Result<Vec<_>>>()?;
    if shares.windows(2).any(|p| p[0].authority >= p[1].authority) {
        return Err(Error::Validation("attribute shares out of order".into()));
    }
    Ok(shares)
}

impl<B: Backend> Wire<B> for UserKey<B> {
    fn write(&self, w: &mut Writer<B>) {
        self.id.write(w);
        w.source(&self.id_binding);
        w.source(&self.randomizer);
        w.scalar(&self.blind_sum);
        write_shares(w, &self.attribute_shares);
        w.source(&self.aggregate);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(UserKey {
            id: Identity::read(r)?,
            id_binding: r.source()?,
            randomizer: r.source()?,
            blind_sum: r.scalar()?,
            attribute_shares: read_shares(r)?,
            aggregate: r.source()?,
        })
    }
}

impl<B: Backend> Wire<B> for PartialKey<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.source(&self.id_binding);
        w.source(&self.randomizer);
        w.scalar(&self.trace_value);
        write_shares(w, &self.attribute_shares);
        w.source(&self.aggregate);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(PartialKey {
            id_binding: r.source()?,
            randomizer: r.source()?,
            trace_value: r.scalar()?,
            attribute_shares: read_shares(r)?,
            aggregate: r.source()?,
        })
    }
}

impl<B: Backend> Wire<B> for KeyRequest<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.scalar(&self.blinding);
        w.scalar(&self.mask);
        w.source(&self.commitment);
        w.scalar(&self.rerandomizer);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(KeyRequest {
            blinding: r.scalar()?,
            mask: r.scalar()?,
            commitment: r.source()?,
            rerandomizer: r.scalar()?,
        })
    }
}

impl<B: Backend> Wire<B> for PokTranscript<B> {
    fn write(&self, w: &mut Writer<B>) {
        PokTranscript::write(self, w)
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        PokTranscript::read(r)
    }
}

impl<B: Backend> Wire<B> for IssuanceRequest<B> {
    fn write(&self, w: &mut Writer<B>) {
        self.id.write(w);
        w.source(&self.commitment);
        Wire::write(&self.proof, w);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(IssuanceRequest {
            id: Identity::read(r)?,
            commitment: r.source()?,
            proof: Wire::read(r)?,
        })
    }
}

impl<B: Backend> Wire<B> for Ciphertext<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.source(&self.c_x);
        w.source(&self.c_g);
        w.source(&self.c_z);
        w.target(&self.blinded);
        write_source_map(w, &self.attribute_parts);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let ct = Ciphertext {
            c_x: r.source()?,
            c_g: r.source()?,
            c_z: r.source()?,
            blinded: r.target()?,
            attribute_parts: read_source_map(r)?,
        };
        if ct.attribute_parts.is_empty() {
            return Err(Error::Validation("ciphertext has no attributes".into()));
        }
        Ok(ct)
    }
}

impl<B: Backend> Wire<B> for HybridCiphertext<B> {
    fn write(&self, w: &mut Writer<B>) {
        self.header.write(w);
        w.raw(&self.nonce);
        w.bytes(&self.sealed);
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        Ok(HybridCiphertext {
            header: Ciphertext::read(r)?,
            nonce: r.raw(NONCE_BYTES)?.try_into().unwrap(),
            sealed: r.bytes()?.to_vec(),
        })
    }
}

fn row_checksum<B: Backend>(row: &TraceRow<B>) -> [u8; 32] {
    let mut w = Writer::<B>::new();
    row.id.write(&mut w);
    w.scalar(&row.value);
    Sha256::digest(w.into_bytes()).into()
}

impl<B: Backend> Wire<B> for TraceTable<B> {
    fn write(&self, w: &mut Writer<B>) {
        w.len(self.len());
        for row in self.rows() {
            row.id.write(w);
            w.scalar(&row.value);
            w.raw(&row_checksum(row));
        }
    }

    fn read(r: &mut Reader<'_, B>) -> Result<Self> {
        let n = r.len(4 + <B::Scalar as Field>::BYTES + 32)?;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let row = TraceRow {
                id: Identity::read(r)?,
                value: r.scalar()?,
            };
            if r.raw(32)? != row_checksum(&row) {
                return Err(Error::TableIntegrity(format!("row {i} checksum mismatch")));
            }
            rows.push(row);
        }
        TraceTable::from_rows(rows)
    }
}
