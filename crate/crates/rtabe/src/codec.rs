//! Deterministic binary serialization for parameters, keys, ciphertexts,
//! and policies.
//!
//! Every artifact is framed as an envelope:
//!
//! ```text
//! magic "RTABE1" (6 bytes) | kind (1 byte) | mode (1 byte) | body
//! ```
//!
//! Kinds: 1 = Params, 2 = PublicKey, 3 = MasterSecretKey,
//! 4 = UserSecretKey, 5 = Ciphertext. The mode byte encodes the scheme
//! variant (inverse convention in bit 1, noise flag in bit 0). Parameters
//! are embedded in every body so files are self-describing. Ring elements
//! are little-endian fixed-width coefficient arrays, the width being the
//! smallest of 2/4/8 bytes that holds q-1; counts are 4-byte little-endian;
//! trees are stored preorder (tag, then attribute or threshold and child
//! count). Decoding rejects wrong magic, unknown kinds, out-of-range
//! coefficients, and trailing bytes, and re-validates every invariant.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::policy::{AccessTree, LeafId, Node};
use crate::ring::{Params, RingElement, SchemeMode};
use crate::scheme::{
    Ciphertext, KeyRegistry, MasterSecretKey, PublicKey, RegistryEntry, UserSecretKey,
};

pub const MAGIC: &[u8; 6] = b"RTABE1";
/// Authority-local registry files use a sibling magic so they can never be
/// mistaken for one of the five public envelope kinds.
pub const REGISTRY_MAGIC: &[u8; 6] = b"RTABER";

/// Nesting bound for decoded trees; deeper input is rejected as malformed.
const MAX_TREE_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("input does not start with the envelope magic")]
    BadMagic,
    #[error("unknown envelope kind {value}")]
    UnknownKind { value: u8 },
    #[error("unknown mode byte {value}")]
    UnknownMode { value: u8 },
    #[error("truncated input at offset {offset}")]
    Truncated { offset: usize },
    #[error("trailing bytes after offset {offset}")]
    TrailingBytes { offset: usize },
    #[error("invalid data at offset {offset}: {message}")]
    Invalid { offset: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    Params = 1,
    PublicKey = 2,
    MasterSecretKey = 3,
    UserSecretKey = 4,
    Ciphertext = 5,
}

impl Kind {
    fn from_byte(value: u8) -> Result<Kind, CodecError> {
        match value {
            1 => Ok(Kind::Params),
            2 => Ok(Kind::PublicKey),
            3 => Ok(Kind::MasterSecretKey),
            4 => Ok(Kind::UserSecretKey),
            5 => Ok(Kind::Ciphertext),
            value => Err(CodecError::UnknownKind { value }),
        }
    }
}

/// Any of the five envelope payloads.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Params(Params),
    PublicKey(PublicKey),
    MasterSecretKey(MasterSecretKey),
    UserSecretKey(UserSecretKey),
    Ciphertext(Ciphertext),
}

impl Artifact {
    pub fn kind(&self) -> Kind {
        match self {
            Artifact::Params(_) => Kind::Params,
            Artifact::PublicKey(_) => Kind::PublicKey,
            Artifact::MasterSecretKey(_) => Kind::MasterSecretKey,
            Artifact::UserSecretKey(_) => Kind::UserSecretKey,
            Artifact::Ciphertext(_) => Kind::Ciphertext,
        }
    }

    fn params(&self) -> &Params {
        match self {
            Artifact::Params(p) => p,
            Artifact::PublicKey(pk) => &pk.params,
            Artifact::MasterSecretKey(msk) => &msk.params,
            Artifact::UserSecretKey(usk) => &usk.params,
            Artifact::Ciphertext(ct) => &ct.params,
        }
    }
}

/// Coefficient byte width: the smallest of 2/4/8 holding q-1.
fn coeff_width(q: u64) -> usize {
    if q - 1 <= u16::MAX as u64 {
        2
    } else if q - 1 <= u32::MAX as u64 {
        4
    } else {
        8
    }
}

// ---------------------------------------------------------------- writing

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    fn params(&mut self, params: &Params) {
        self.u32(params.n() as u32);
        self.u64(params.q());
        self.u64(params.p());
        self.f64(params.sigma());
    }

    fn element(&mut self, elem: &RingElement, width: usize) {
        for &c in elem.coeffs() {
            self.buf.extend_from_slice(&c.to_le_bytes()[..width]);
        }
    }

    fn tree(&mut self, node: &Node) {
        match node {
            Node::Leaf { attribute } => {
                self.u8(0);
                self.u32(*attribute);
            }
            Node::Inner {
                threshold,
                children,
            } => {
                self.u8(1);
                self.u32(*threshold as u32);
                self.u32(children.len() as u32);
                for child in children {
                    self.tree(child);
                }
            }
        }
    }

    fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }
}

fn write_body(w: &mut Writer, artifact: &Artifact) {
    let params = artifact.params();
    let width = coeff_width(params.q());
    w.params(params);
    match artifact {
        Artifact::Params(_) => {}
        Artifact::PublicKey(pk) => {
            w.u32(pk.n_attrs);
            w.element(&pk.a_prime, width);
            for component in pk.components() {
                w.element(component, width);
            }
        }
        Artifact::MasterSecretKey(msk) => {
            w.u32(msk.n_attrs);
            w.element(&msk.s, width);
            w.element(&msk.a, width);
            for a_i in msk.attr_elements() {
                w.element(a_i, width);
            }
        }
        Artifact::UserSecretKey(usk) => {
            w.string(&usk.identity);
            w.element(&usk.sk_u, width);
            w.u32(usk.per_attr().len() as u32);
            for (attr, key) in usk.per_attr() {
                w.u32(*attr);
                w.element(key, width);
            }
        }
        Artifact::Ciphertext(ct) => {
            w.tree(ct.tree.root());
            w.u32(ct.c_leaves().len() as u32);
            for (leaf, elem) in ct.c_leaves() {
                w.u32(leaf.0);
                w.element(elem, width);
            }
            w.element(&ct.c_prime, width);
            w.element(&ct.c_body, width);
        }
    }
}

/// Serializes an artifact into its envelope. Deterministic: equal inputs
/// produce identical bytes.
pub fn encode(artifact: &Artifact) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u8(artifact.kind() as u8);
    w.u8(artifact.params().mode.to_byte());
    write_body(&mut w, artifact);
    w.buf
}

// ---------------------------------------------------------------- reading

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn invalid(&self, message: impl Into<String>) -> CodecError {
        CodecError::Invalid {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < len {
            return Err(CodecError::Truncated { offset: self.pos });
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn params(&mut self, mode: SchemeMode) -> Result<Params, CodecError> {
        let start = self.pos;
        let n = self.u32()? as usize;
        let q = self.u64()?;
        let p = self.u64()?;
        let sigma = self.f64()?;
        Params::new(n, q, p, sigma, mode).map_err(|e| CodecError::Invalid {
            offset: start,
            message: e.to_string(),
        })
    }

    fn element(&mut self, params: &Params, width: usize) -> Result<RingElement, CodecError> {
        let start = self.pos;
        let raw = self.take(params.n() * width)?;
        let mut coeffs = Vec::with_capacity(params.n());
        for chunk in raw.chunks_exact(width) {
            let mut le = [0u8; 8];
            le[..width].copy_from_slice(chunk);
            coeffs.push(u64::from_le_bytes(le));
        }
        RingElement::from_coeffs(coeffs, params.q()).map_err(|e| CodecError::Invalid {
            offset: start,
            message: e.to_string(),
        })
    }

    fn tree_node(&mut self, depth: usize) -> Result<Node, CodecError> {
        if depth > MAX_TREE_DEPTH {
            return Err(self.invalid("access tree nesting too deep"));
        }
        match self.u8()? {
            0 => {
                let attribute = self.u32()?;
                Ok(Node::Leaf { attribute })
            }
            1 => {
                let threshold = self.u32()? as usize;
                let count = self.u32()? as usize;
                let mut children = Vec::new();
                for _ in 0..count {
                    children.push(self.tree_node(depth + 1)?);
                }
                Ok(Node::Inner {
                    threshold,
                    children,
                })
            }
            tag => Err(self.invalid(format!("unknown tree node tag {tag}"))),
        }
    }

    fn tree(&mut self) -> Result<AccessTree, CodecError> {
        let start = self.pos;
        let root = self.tree_node(0)?;
        AccessTree::new(root).map_err(|e| CodecError::Invalid {
            offset: start,
            message: e.to_string(),
        })
    }

    fn string(&mut self) -> Result<String, CodecError> {
        let len = self.u32()? as usize;
        let start = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| CodecError::Invalid {
            offset: start,
            message: "identity is not valid UTF-8".into(),
        })
    }

    fn done(&self) -> Result<(), CodecError> {
        if self.pos != self.buf.len() {
            return Err(CodecError::TrailingBytes { offset: self.pos });
        }
        Ok(())
    }
}

fn read_envelope(r: &mut Reader) -> Result<Artifact, CodecError> {
    let magic = r.take(MAGIC.len()).map_err(|_| CodecError::BadMagic)?;
    if magic != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let kind = Kind::from_byte(r.u8()?)?;
    let mode_byte = r.u8()?;
    let mode =
        SchemeMode::from_byte(mode_byte).ok_or(CodecError::UnknownMode { value: mode_byte })?;
    let params = r.params(mode)?;
    let width = coeff_width(params.q());

    let artifact = match kind {
        Kind::Params => Artifact::Params(params),
        Kind::PublicKey => {
            let n_attrs = r.u32()?;
            let a_prime = r.element(&params, width)?;
            // Counts come from untrusted input; let the vectors grow as
            // elements actually parse instead of preallocating.
            let mut components = Vec::new();
            for _ in 0..=n_attrs {
                components.push(r.element(&params, width)?);
            }
            let pk = PublicKey::from_parts(params, n_attrs, a_prime, components)
                .map_err(|e| r.invalid(e.to_string()))?;
            Artifact::PublicKey(pk)
        }
        Kind::MasterSecretKey => {
            let n_attrs = r.u32()?;
            let s = r.element(&params, width)?;
            let a = r.element(&params, width)?;
            let mut attr_elements = Vec::new();
            for _ in 0..n_attrs {
                attr_elements.push(r.element(&params, width)?);
            }
            let msk = MasterSecretKey::from_parts(params, n_attrs, s, a, attr_elements)
                .map_err(|e| r.invalid(e.to_string()))?;
            Artifact::MasterSecretKey(msk)
        }
        Kind::UserSecretKey => {
            let identity = r.string()?;
            let sk_u = r.element(&params, width)?;
            let count = r.u32()?;
            let mut per_attr = BTreeMap::new();
            let mut last = 0u32;
            for _ in 0..count {
                let attr = r.u32()?;
                if attr == 0 || attr <= last {
                    return Err(r.invalid("attribute keys must be sorted and positive"));
                }
                last = attr;
                per_attr.insert(attr, r.element(&params, width)?);
            }
            Artifact::UserSecretKey(UserSecretKey::from_parts(params, identity, sk_u, per_attr))
        }
        Kind::Ciphertext => {
            let tree = r.tree()?;
            let count = r.u32()?;
            let mut c_leaves = BTreeMap::new();
            let mut last: Option<u32> = None;
            for _ in 0..count {
                let leaf = r.u32()?;
                if last.is_some_and(|prev| leaf <= prev) {
                    return Err(r.invalid("leaf ids must be strictly increasing"));
                }
                last = Some(leaf);
                c_leaves.insert(LeafId(leaf), r.element(&params, width)?);
            }
            let c_prime = r.element(&params, width)?;
            let c_body = r.element(&params, width)?;
            let ct = Ciphertext::from_parts(params, tree, c_leaves, c_prime, c_body)
                .map_err(|e| r.invalid(e.to_string()))?;
            Artifact::Ciphertext(ct)
        }
    };
    Ok(artifact)
}

/// Decodes one envelope, requiring the input to contain nothing else.
pub fn decode(bytes: &[u8]) -> Result<Artifact, CodecError> {
    let mut r = Reader::new(bytes);
    let artifact = read_envelope(&mut r)?;
    r.done()?;
    Ok(artifact)
}

/// Decodes a ciphertext envelope from the front of `bytes`, returning the
/// number of bytes consumed. Used to split concatenated ciphertexts.
pub fn decode_ciphertext_prefix(bytes: &[u8]) -> Result<(Ciphertext, usize), CodecError> {
    let mut r = Reader::new(bytes);
    match read_envelope(&mut r)? {
        Artifact::Ciphertext(ct) => Ok((ct, r.pos)),
        other => Err(CodecError::Invalid {
            offset: 6,
            message: format!("expected a ciphertext envelope, found {:?}", other.kind()),
        }),
    }
}

macro_rules! typed_codec {
    ($enc:ident, $dec:ident, $variant:ident, $ty:ty) => {
        pub fn $enc(value: &$ty) -> Vec<u8> {
            encode(&Artifact::$variant(value.clone()))
        }

        pub fn $dec(bytes: &[u8]) -> Result<$ty, CodecError> {
            match decode(bytes)? {
                Artifact::$variant(v) => Ok(v),
                other => Err(CodecError::Invalid {
                    offset: 6,
                    message: format!(
                        "expected {:?} envelope, found {:?}",
                        Kind::$variant,
                        other.kind()
                    ),
                }),
            }
        }
    };
}

typed_codec!(encode_params, decode_params, Params, Params);
typed_codec!(encode_public_key, decode_public_key, PublicKey, PublicKey);
typed_codec!(
    encode_master_secret_key,
    decode_master_secret_key,
    MasterSecretKey,
    MasterSecretKey
);
typed_codec!(
    encode_user_secret_key,
    decode_user_secret_key,
    UserSecretKey,
    UserSecretKey
);
typed_codec!(encode_ciphertext, decode_ciphertext, Ciphertext, Ciphertext);

// ------------------------------------------------------------- registry

/// Serializes the authority's identity registry (u, SK_u, and issued
/// attributes per identity). This format is local to the key authority and
/// carries its own magic.
pub fn encode_registry(params: &Params, registry: &KeyRegistry) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(REGISTRY_MAGIC);
    w.u8(params.mode.to_byte());
    w.params(params);
    let width = coeff_width(params.q());
    w.u32(registry.len() as u32);
    for (identity, entry) in registry.entries() {
        w.string(identity);
        w.element(&entry.u, width);
        w.element(&entry.sk_u, width);
        w.u32(entry.issued.len() as u32);
        for &attr in &entry.issued {
            w.u32(attr);
        }
    }
    w.buf
}

pub fn decode_registry(bytes: &[u8]) -> Result<(Params, KeyRegistry), CodecError> {
    let mut r = Reader::new(bytes);
    let magic = r
        .take(REGISTRY_MAGIC.len())
        .map_err(|_| CodecError::BadMagic)?;
    if magic != REGISTRY_MAGIC {
        return Err(CodecError::BadMagic);
    }
    let mode_byte = r.u8()?;
    let mode =
        SchemeMode::from_byte(mode_byte).ok_or(CodecError::UnknownMode { value: mode_byte })?;
    let params = r.params(mode)?;
    let width = coeff_width(params.q());
    let count = r.u32()?;
    let mut entries = BTreeMap::new();
    let mut previous: Option<String> = None;
    for _ in 0..count {
        let identity = r.string()?;
        // Entries are written sorted; enforce it so encoding is canonical.
        if previous.as_ref().is_some_and(|prev| identity <= *prev) {
            return Err(r.invalid("registry identities must be sorted and unique"));
        }
        previous = Some(identity.clone());
        let u = r.element(&params, width)?;
        let sk_u = r.element(&params, width)?;
        let attr_count = r.u32()?;
        let mut issued = BTreeSet::new();
        let mut last_attr = 0u32;
        for _ in 0..attr_count {
            let attr = r.u32()?;
            if attr == 0 || attr <= last_attr {
                return Err(r.invalid("issued attributes must be sorted and positive"));
            }
            last_attr = attr;
            issued.insert(attr);
        }
        entries.insert(identity, RegistryEntry { u, sk_u, issued });
    }
    r.done()?;
    Ok((params, KeyRegistry::from_entries(entries)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{parse_policy, AttributeSet};
    use crate::ring::SchemeMode;
    use crate::scheme;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture() -> (
        Params,
        PublicKey,
        MasterSecretKey,
        UserSecretKey,
        Ciphertext,
        KeyRegistry,
    ) {
        let params = Params::toy(SchemeMode::exact_noiseless());
        let mut rng = ChaCha20Rng::seed_from_u64(60);
        let (pk, msk) = scheme::setup(&params, 5, &mut rng).unwrap();
        let mut registry = KeyRegistry::new();
        let usk = scheme::keygen(
            &msk,
            "alice",
            &AttributeSet::new([1u32, 2, 4]).unwrap(),
            &mut rng,
            &mut registry,
        )
        .unwrap();
        let tree = parse_policy("thresh(2, att1, att2, att5)").unwrap();
        let message = scheme::message_embed(b"hi", &params).unwrap();
        let ct = scheme::encrypt(&pk, &message, &tree, &mut rng).unwrap();
        (params, pk, msk, usk, ct, registry)
    }

    #[test]
    fn round_trip_all_kinds() {
        let (params, pk, msk, usk, ct, _) = fixture();
        assert_eq!(decode_params(&encode_params(&params)).unwrap(), params);
        assert_eq!(decode_public_key(&encode_public_key(&pk)).unwrap(), pk);
        assert_eq!(
            decode_master_secret_key(&encode_master_secret_key(&msk)).unwrap(),
            msk
        );
        assert_eq!(
            decode_user_secret_key(&encode_user_secret_key(&usk)).unwrap(),
            usk
        );
        assert_eq!(decode_ciphertext(&encode_ciphertext(&ct)).unwrap(), ct);
    }

    #[test]
    fn encoding_is_deterministic() {
        let (_, pk, _, _, ct, _) = fixture();
        assert_eq!(encode_public_key(&pk), encode_public_key(&pk));
        assert_eq!(encode_ciphertext(&ct), encode_ciphertext(&ct));
    }

    #[test]
    fn empty_input_is_bad_magic() {
        assert_eq!(decode(&[]), Err(CodecError::BadMagic));
        assert_eq!(decode(b"RTABEX_"), Err(CodecError::BadMagic));
    }

    #[test]
    fn unknown_kind_and_mode_rejected() {
        let (params, ..) = fixture();
        let mut bytes = encode_params(&params);
        bytes[6] = 9;
        assert_eq!(decode(&bytes), Err(CodecError::UnknownKind { value: 9 }));
        let mut bytes = encode_params(&params);
        bytes[7] = 17;
        assert_eq!(decode(&bytes), Err(CodecError::UnknownMode { value: 17 }));
    }

    #[test]
    fn truncation_names_offset() {
        let (_, pk, ..) = fixture();
        let bytes = encode_public_key(&pk);
        let cut = bytes.len() - 3;
        match decode(&bytes[..cut]) {
            Err(CodecError::Truncated { offset }) => assert!(offset <= cut),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let (params, ..) = fixture();
        let mut bytes = encode_params(&params);
        let end = bytes.len();
        bytes.push(0);
        assert_eq!(
            decode(&bytes),
            Err(CodecError::TrailingBytes { offset: end })
        );
    }

    #[test]
    fn out_of_range_coefficient_rejected() {
        let (_, pk, ..) = fixture();
        let mut bytes = encode_public_key(&pk);
        // First coefficient of a' sits right after the envelope header,
        // params body, and the n_attrs count.
        let coeff_offset = 8 + 28 + 4;
        bytes[coeff_offset..coeff_offset + 2].copy_from_slice(&0x7fffu16.to_le_bytes());
        match decode(&bytes) {
            Err(CodecError::Invalid { offset, .. }) => assert_eq!(offset, coeff_offset),
            other => panic!("expected invalid-coefficient error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_typed_decode_rejected() {
        let (params, ..) = fixture();
        let bytes = encode_params(&params);
        assert!(decode_public_key(&bytes).is_err());
    }

    #[test]
    fn ciphertext_prefix_decoding() {
        let (_, _, _, _, ct, _) = fixture();
        let one = encode_ciphertext(&ct);
        let mut two = one.clone();
        two.extend_from_slice(&one);
        let (first, used) = decode_ciphertext_prefix(&two).unwrap();
        assert_eq!(first, ct);
        assert_eq!(used, one.len());
        let (second, used2) = decode_ciphertext_prefix(&two[used..]).unwrap();
        assert_eq!(second, ct);
        assert_eq!(used + used2, two.len());
    }

    #[test]
    fn registry_round_trip() {
        let (params, _, _, _, _, registry) = fixture();
        let bytes = encode_registry(&params, &registry);
        let (decoded_params, decoded) = decode_registry(&bytes).unwrap();
        assert_eq!(decoded_params, params);
        assert_eq!(decoded, registry);
        assert_eq!(bytes, encode_registry(&params, &registry));
    }

    #[test]
    fn registry_magic_distinct() {
        let (params, _, _, _, _, registry) = fixture();
        let bytes = encode_registry(&params, &registry);
        assert_eq!(decode(&bytes), Err(CodecError::BadMagic));
    }

    #[test]
    fn oversized_count_fails_fast() {
        let (_, pk, ..) = fixture();
        let mut bytes = encode_public_key(&pk);
        // n_attrs field sits right after the header and params body.
        bytes[36..40].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(CodecError::Truncated { .. })));
    }

    #[test]
    fn registry_rejects_unsorted_entries() {
        let (params, _, msk, _, _, _) = fixture();
        let mut rng = ChaCha20Rng::seed_from_u64(61);
        let mut registry = KeyRegistry::new();
        // Same-length identities keep the serialized entries equal-sized.
        for identity in ["zzz", "aaa"] {
            scheme::keygen(
                &msk,
                identity,
                &AttributeSet::new([1u32]).unwrap(),
                &mut rng,
                &mut registry,
            )
            .unwrap();
        }
        let good = encode_registry(&params, &registry);
        assert!(decode_registry(&good).is_ok());

        // Swap the two identity records to break the ordering. The
        // registry header is magic + mode + params + count.
        let header = 6 + 1 + 28 + 4;
        let entry_len = (good.len() - header) / 2;
        let mut swapped = good[..header].to_vec();
        swapped.extend_from_slice(&good[header + entry_len..]);
        swapped.extend_from_slice(&good[header..header + entry_len]);
        assert!(matches!(
            decode_registry(&swapped),
            Err(CodecError::Invalid { .. })
        ));
    }

    #[test]
    fn corrupted_tree_rejected() {
        let (_, _, _, _, ct, _) = fixture();
        let mut bytes = encode_ciphertext(&ct);
        // Tree starts right after header + params; set an invalid node tag.
        let tree_offset = 8 + 28;
        bytes[tree_offset] = 7;
        assert!(matches!(decode(&bytes), Err(CodecError::Invalid { .. })));
    }
}
