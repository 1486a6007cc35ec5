//! Ciphertext-policy attribute-based encryption over the polynomial ring
//! `Z_q[x]/(x^n + 1)`, with threshold access trees.
//!
//! Data owners encrypt under a policy tree whose leaves are attributes and
//! whose inner nodes are k-of-m threshold gates; the key authority issues
//! per-attribute keys bound to one identity randomizer, and a key decrypts
//! exactly when its attributes satisfy the tree. Security rests on the
//! hardness of distinguishing ring-LWE samples from uniform pairs, and a
//! runnable challenger/adversary game plus a sample-set reduction harness
//! make that claim empirically exercisable.
//!
//! Modules:
//!
//! - [`ring`]: arithmetic in R_q, negacyclic NTT, Gaussian and uniform
//!   sampling, the two inverse notions.
//! - [`policy`]: access trees, the policy text language, satisfaction,
//!   and the Share/Combine secret-sharing pair.
//! - [`scheme`]: setup / keygen / encrypt / decrypt plus byte-payload
//!   embedding.
//! - [`game`]: the IND-CPA game harness and the R-LWE reduction.
//! - [`codec`]: deterministic binary envelopes for every artifact.
//!
//! This is a research artifact. The variant faithful to exact inverses
//! with noise disabled is exactly correct and is the default everywhere;
//! the noisy, mod-p-inverse variant is shipped for measurement and fails
//! to decrypt at realistic parameters. None of this code is hardened
//! against side channels. Do not deploy it to protect real data.
//!
//! # Example
//!
//! ```
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha20Rng;
//! use rtabe::policy::parse_policy;
//! use rtabe::scheme::{decrypt, encrypt, keygen, message_embed, message_extract, setup};
//! use rtabe::{AttributeSet, KeyRegistry, Params, SchemeMode};
//!
//! let params = Params::toy(SchemeMode::exact_noiseless());
//! let mut rng = ChaCha20Rng::seed_from_u64(7);
//! let (pk, msk) = setup(&params, 4, &mut rng)?;
//!
//! let mut registry = KeyRegistry::new();
//! let alice = AttributeSet::new([1u32, 3])?;
//! let key = keygen(&msk, "alice", &alice, &mut rng, &mut registry)?;
//!
//! let tree = parse_policy("and(att1, or(att2, att3))")?;
//! let message = message_embed(b"hi", &params)?;
//! let ct = encrypt(&pk, &message, &tree, &mut rng)?;
//!
//! let opened = decrypt(&ct, &key, &pk)?;
//! assert_eq!(message_extract(&opened, &params)?, b"hi".to_vec());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod codec;
pub mod game;
pub mod policy;
pub mod ring;
pub mod scheme;

pub use policy::{AccessTree, AttributeSet, PolicyError};
pub use ring::{InverseConvention, NoiseMode, Params, RingElement, RingError, SchemeMode};
pub use scheme::{Ciphertext, KeyRegistry, MasterSecretKey, PublicKey, SchemeError, UserSecretKey};
