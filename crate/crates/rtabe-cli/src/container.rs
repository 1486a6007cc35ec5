//! Multi-block ciphertext container.
//!
//! Payloads larger than one ring element are chunked into capacity-sized
//! blocks, each encrypted under the same access tree with fresh
//! randomness. Layout:
//!
//! ```text
//! magic "RTABE1" | kind 6 | mode | block count (u32 le)
//!   | concatenated ciphertext envelopes | original length (u64 le)
//! ```
//!
//! Kind 6 marks a container; the library's envelope decoder rejects it as
//! an unknown kind, and this parser rejects anything else.

use rand::Rng;

use rtabe::codec;
use rtabe::policy::AccessTree;
use rtabe::ring::Params;
use rtabe::scheme::{self, PublicKey, SchemeError, UserSecretKey};

use crate::{CliError, CliResult};

const CONTAINER_KIND: u8 = 6;

/// Blocks needed for a payload of `len` bytes.
pub fn block_count(params: &Params, len: usize) -> usize {
    let capacity = scheme::message_capacity(params);
    len.div_ceil(capacity)
}

/// Chunks, embeds, and encrypts a payload under one tree.
pub fn seal<R: Rng + ?Sized>(
    pk: &PublicKey,
    tree: &AccessTree,
    payload: &[u8],
    rng: &mut R,
) -> CliResult<Vec<u8>> {
    let capacity = scheme::message_capacity(&pk.params);
    let mut out = Vec::new();
    out.extend_from_slice(codec::MAGIC);
    out.push(CONTAINER_KIND);
    out.push(pk.params.mode.to_byte());

    let blocks: Vec<&[u8]> = payload.chunks(capacity).collect();
    out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    for chunk in blocks {
        let message = scheme::message_embed(chunk, &pk.params)
            .map_err(|e| CliError::Internal(format!("chunking bug: {e}")))?;
        let ct = scheme::encrypt(pk, &message, tree, rng)
            .map_err(|e| CliError::Internal(format!("encrypt failed: {e}")))?;
        out.extend_from_slice(&codec::encode_ciphertext(&ct));
    }
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    Ok(out)
}

/// Parses and decrypts a container. Authorization failures map to the
/// dedicated exit code; anything structurally wrong is malformed input.
pub fn open(sealed: &[u8], usk: &UserSecretKey, pk: &PublicKey) -> CliResult<Vec<u8>> {
    let malformed = |m: &str| CliError::Malformed(format!("bad container: {m}"));

    if sealed.len() < 8 || &sealed[..6] != codec::MAGIC {
        return Err(malformed("missing container magic"));
    }
    if sealed[6] != CONTAINER_KIND {
        return Err(malformed("not a ciphertext container"));
    }
    let mut pos = 8usize;
    let take = |pos: &mut usize, len: usize| -> CliResult<&[u8]> {
        if sealed.len() - *pos < len {
            return Err(malformed(&format!("truncated at offset {pos}", pos = *pos)));
        }
        let out = &sealed[*pos..*pos + len];
        *pos += len;
        Ok(out)
    };

    let block_count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut payload = Vec::new();
    for _ in 0..block_count {
        let (ct, used) = codec::decode_ciphertext_prefix(&sealed[pos..])
            .map_err(|e| malformed(&format!("block at offset {pos}: {e}")))?;
        pos += used;
        let message = match scheme::decrypt(&ct, usk, pk) {
            Ok(message) => message,
            Err(SchemeError::NotAuthorized) => return Err(CliError::NotAuthorized),
            Err(e) => return Err(CliError::Malformed(format!("decryption failed: {e}"))),
        };
        let chunk = scheme::message_extract(&message, &pk.params)
            .map_err(|e| CliError::Malformed(format!("block does not decode: {e}")))?;
        payload.extend_from_slice(&chunk);
    }
    let declared = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    if pos != sealed.len() {
        return Err(malformed("trailing bytes"));
    }
    if declared != payload.len() as u64 {
        return Err(malformed(&format!(
            "length mismatch: header says {declared}, blocks held {}",
            payload.len()
        )));
    }
    Ok(payload)
}
