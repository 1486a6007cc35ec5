//! Executable IND-CPA game and the R-LWE distinguisher reduction.
//!
//! The challenger runs setup, answers adaptive per-attribute key queries
//! while recording them in a per-identity ledger, encrypts one of two
//! adversary-chosen messages under the adversary's access tree (aborting
//! when a queried identity already satisfies it), answers restricted
//! phase-2 queries, and scores the final guess.
//!
//! The reduction wraps the same game flow around a set of (a_j, b_j)
//! pairs that are either R-LWE samples or uniform: public-key components
//! are taken straight from the b_j, each queried identity consumes a fresh
//! sample (a_u, b_u) with SK_u = b_u and SK_{i,u} = a_i^{-1}·a_u + p·e,
//! and the challenge is encrypted against the synthetic public key. The
//! inner adversary's success turns into an LWE/uniform decision.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{AccessTree, AttributeSet};
use crate::ring::{InverseConvention, Params, RingElement};
use crate::scheme::{self, Ciphertext, KeyRegistry, MasterSecretKey, PublicKey, SchemeError};

pub type Bit = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("sample set exhausted after {0} samples; provide a larger set")]
    SampleSetExhausted(usize),
    #[error("sample set too small: need at least {needed} samples, got {got}")]
    SampleSetTooSmall { needed: usize, got: usize },
    #[error("challenge aborted: a queried identity satisfies the challenge tree")]
    ChallengeAborted,
    #[error("adversary protocol violation: {0}")]
    InvalidAdversary(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

// ----------------------------------------------------------------- ledger

/// Per-identity record of queried attributes, append-only within a game.
#[derive(Debug, Clone, Default)]
pub struct AttributeLedger {
    lists: BTreeMap<String, Vec<u32>>,
}

impl AttributeLedger {
    pub fn new() -> Self {
        AttributeLedger::default()
    }

    fn record(&mut self, identity: &str, attribute: u32) {
        self.lists
            .entry(identity.to_string())
            .or_default()
            .push(attribute);
    }

    pub fn attributes(&self, identity: &str) -> AttributeSet {
        let attrs = self.lists.get(identity).cloned().unwrap_or_default();
        AttributeSet::new(attrs).expect("ledger stores positive attributes")
    }

    pub fn identities(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    /// Total recorded (identity, attribute) events.
    pub fn entry_count(&self) -> usize {
        self.lists.values().map(Vec::len).sum()
    }

    pub fn any_satisfies(&self, tree: &AccessTree) -> bool {
        self.lists
            .keys()
            .any(|id| tree.evaluate(&self.attributes(id)))
    }

    fn would_satisfy(&self, identity: &str, attribute: u32, tree: &AccessTree) -> bool {
        let mut attrs = self.attributes(identity);
        attrs.insert(attribute).expect("attribute is positive");
        tree.evaluate(&attrs)
    }
}

// ---------------------------------------------------------------- oracles

/// A single-attribute key as handed to the adversary: SK_u plus SK_{i,u}.
#[derive(Debug, Clone, PartialEq)]
pub struct IssuedAttributeKey {
    pub identity: String,
    pub attribute: u32,
    pub sk_u: RingElement,
    pub attr_key: RingElement,
}

/// Oracle answer; refusals keep the game running.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryOutcome {
    Granted(IssuedAttributeKey),
    Refused,
}

/// Backend that actually produces keys (real scheme or reduction samples).
pub trait KeyIssuer {
    fn issue(&mut self, identity: &str, attribute: u32) -> Result<IssuedAttributeKey, GameError>;
}

#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub identity: String,
    pub attribute: u32,
    pub granted: bool,
}

/// The key-generation oracle the adversary talks to. Updates the ledger on
/// grants; in phase 2 it refuses queries that would let some identity
/// satisfy the challenge tree.
pub struct KeyGenOracle<'a> {
    universe: u32,
    issuer: &'a mut dyn KeyIssuer,
    ledger: &'a mut AttributeLedger,
    challenge_tree: Option<&'a AccessTree>,
    queries: &'a mut Vec<QueryRecord>,
    failure: Option<GameError>,
}

impl KeyGenOracle<'_> {
    pub fn query(&mut self, identity: &str, attribute: u32) -> QueryOutcome {
        if self.failure.is_some() {
            return QueryOutcome::Refused;
        }
        let mut granted = false;
        let refused = attribute == 0
            || attribute > self.universe
            || self
                .challenge_tree
                .is_some_and(|tree| self.ledger.would_satisfy(identity, attribute, tree));
        let outcome = if refused {
            QueryOutcome::Refused
        } else {
            match self.issuer.issue(identity, attribute) {
                Ok(key) => {
                    granted = true;
                    self.ledger.record(identity, attribute);
                    QueryOutcome::Granted(key)
                }
                Err(err) => {
                    self.failure = Some(err);
                    QueryOutcome::Refused
                }
            }
        };
        self.queries.push(QueryRecord {
            identity: identity.to_string(),
            attribute,
            granted,
        });
        outcome
    }
}

/// Issues one single-attribute key through the real scheme, updating the
/// shared registry (so repeat identities bind the same u) and the ledger.
pub fn keygen_oracle<R: Rng + ?Sized>(
    ledger: &mut AttributeLedger,
    identity: &str,
    attribute: u32,
    msk: &MasterSecretKey,
    registry: &mut KeyRegistry,
    rng: &mut R,
) -> Result<IssuedAttributeKey, GameError> {
    let att = AttributeSet::new([attribute]).map_err(SchemeError::from)?;
    let usk = scheme::keygen(msk, identity, &att, rng, registry)?;
    let attr_key = usk
        .attr_key(attribute)
        .expect("keygen issued the requested attribute")
        .clone();
    ledger.record(identity, attribute);
    Ok(IssuedAttributeKey {
        identity: identity.to_string(),
        attribute,
        sk_u: usk.sk_u,
        attr_key,
    })
}

struct RealKeyIssuer<'a> {
    msk: &'a MasterSecretKey,
    registry: KeyRegistry,
    rng: ChaCha20Rng,
}

impl KeyIssuer for RealKeyIssuer<'_> {
    fn issue(&mut self, identity: &str, attribute: u32) -> Result<IssuedAttributeKey, GameError> {
        let att = AttributeSet::new([attribute]).map_err(SchemeError::from)?;
        let usk = scheme::keygen(self.msk, identity, &att, &mut self.rng, &mut self.registry)?;
        let attr_key = usk
            .attr_key(attribute)
            .expect("keygen issued the requested attribute")
            .clone();
        Ok(IssuedAttributeKey {
            identity: identity.to_string(),
            attribute,
            sk_u: usk.sk_u,
            attr_key,
        })
    }
}

// ------------------------------------------------------------- adversary

/// What the adversary declares at challenge time.
#[derive(Debug, Clone)]
pub struct ChallengeRequest {
    pub tree: AccessTree,
    pub m0: RingElement,
    pub m1: RingElement,
}

/// The adversary side of the game. The harness drives the phases in
/// order; nothing here exposes the coin, the master secret, or a sample
/// set's ground truth.
pub trait Adversary {
    fn phase1(&mut self, pk: &PublicKey, oracle: &mut KeyGenOracle<'_>);
    fn challenge(&mut self) -> ChallengeRequest;
    fn phase2(&mut self, ct: &Ciphertext, oracle: &mut KeyGenOracle<'_>);
    fn guess(&mut self) -> Bit;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameOutcome {
    Win,
    Lose,
    Abort,
    Invalid,
}

/// Everything observable about one game run.
#[derive(Debug, Clone)]
pub struct GameTranscript {
    pub queries: Vec<QueryRecord>,
    pub challenge_tree: AccessTree,
    pub coin: Option<Bit>,
    pub guess: Option<Bit>,
    pub outcome: GameOutcome,
}

impl GameTranscript {
    pub fn won(&self) -> bool {
        self.outcome == GameOutcome::Win
    }
}

fn validate_challenge(req: &ChallengeRequest, params: &Params, n_attrs: u32) -> Result<(), String> {
    if req.tree.check_universe(n_attrs).is_err() {
        return Err("challenge tree uses attributes outside the universe".into());
    }
    for (name, msg) in [("M0", &req.m0), ("M1", &req.m1)] {
        if !params.owns(msg) {
            return Err(format!("{name} lies outside the parameter ring"));
        }
        if msg.coeffs().iter().any(|&c| c >= params.p()) {
            return Err(format!("{name} is not in the message space R_p"));
        }
    }
    Ok(())
}

/// Shared game flow for the real scheme and the reduction: phase 1,
/// challenge with the abort rule, phase 2 with the satisfaction
/// restriction, guess.
fn drive<R: Rng + ?Sized>(
    adversary: &mut dyn Adversary,
    pk: &PublicKey,
    issuer: &mut dyn KeyIssuer,
    rng: &mut R,
    forced_coin: Option<Bit>,
) -> Result<GameTranscript, GameError> {
    let mut ledger = AttributeLedger::new();
    let mut queries = Vec::new();

    let mut oracle = KeyGenOracle {
        universe: pk.n_attrs,
        issuer,
        ledger: &mut ledger,
        challenge_tree: None,
        queries: &mut queries,
        failure: None,
    };
    adversary.phase1(pk, &mut oracle);
    if let Some(err) = oracle.failure.take() {
        return Err(err);
    }

    let request = adversary.challenge();
    // Malformed challenges are surfaced through the transcript, not an error.
    if validate_challenge(&request, &pk.params, pk.n_attrs).is_err() {
        return Ok(GameTranscript {
            queries,
            challenge_tree: request.tree,
            coin: None,
            guess: None,
            outcome: GameOutcome::Invalid,
        });
    }

    if ledger.any_satisfies(&request.tree) {
        return Ok(GameTranscript {
            queries,
            challenge_tree: request.tree,
            coin: None,
            guess: None,
            outcome: GameOutcome::Abort,
        });
    }

    let coin: Bit = forced_coin.unwrap_or_else(|| rng.gen_range(0..=1));
    let chosen = if coin == 0 { &request.m0 } else { &request.m1 };
    let ct = scheme::encrypt(pk, chosen, &request.tree, rng)?;

    let mut oracle = KeyGenOracle {
        universe: pk.n_attrs,
        issuer,
        ledger: &mut ledger,
        challenge_tree: Some(&request.tree),
        queries: &mut queries,
        failure: None,
    };
    adversary.phase2(&ct, &mut oracle);
    if let Some(err) = oracle.failure.take() {
        return Err(err);
    }

    let guess = adversary.guess();
    let outcome = if guess == coin {
        GameOutcome::Win
    } else {
        GameOutcome::Lose
    };
    Ok(GameTranscript {
        queries,
        challenge_tree: request.tree,
        coin: Some(coin),
        guess: Some(guess),
        outcome,
    })
}

/// Runs the full IND-CPA game against a fresh setup.
pub fn run_game<R: Rng + ?Sized>(
    adversary: &mut dyn Adversary,
    params: &Params,
    n_attrs: u32,
    rng: &mut R,
) -> Result<GameTranscript, GameError> {
    run_game_forced_coin(adversary, params, n_attrs, rng, None)
}

/// Like `run_game` but with the challenge coin pinned from outside —
/// harness wiring checks only.
pub fn run_game_forced_coin<R: Rng + ?Sized>(
    adversary: &mut dyn Adversary,
    params: &Params,
    n_attrs: u32,
    rng: &mut R,
    forced_coin: Option<Bit>,
) -> Result<GameTranscript, GameError> {
    let (pk, msk) = scheme::setup(params, n_attrs, rng)?;
    let issuer_rng = ChaCha20Rng::from_rng(&mut *rng).expect("fork issuer rng");
    let mut issuer = RealKeyIssuer {
        msk: &msk,
        registry: KeyRegistry::new(),
        rng: issuer_rng,
    };
    drive(adversary, &pk, &mut issuer, rng, forced_coin)
}

// ------------------------------------------------------------ sample sets

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Lwe,
    Uniform,
}

/// A set of (a_j, b_j) pairs, either R-LWE samples under one hidden secret
/// or fully uniform. The ground truth and secret stay out of the
/// distinguisher path; `reveal_*` is for tests and harness scoring only.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pairs: Vec<(RingElement, RingElement)>,
    ground_truth: GroundTruth,
    secret: Option<RingElement>,
}

impl SampleSet {
    pub fn pairs(&self) -> &[(RingElement, RingElement)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn reveal_ground_truth(&self) -> GroundTruth {
        self.ground_truth
    }

    pub fn reveal_secret(&self) -> Option<&RingElement> {
        self.secret.as_ref()
    }
}

/// Draws `m` pairs. The LWE case fixes one hidden uniform s and sets
/// b_j = a_j·s + p·e_j with e_j from the error distribution (zero when the
/// parameter mode disables noise); the uniform case draws b_j uniformly.
pub fn make_sample_set<R: Rng + ?Sized>(
    params: &Params,
    m: usize,
    ground_truth: GroundTruth,
    rng: &mut R,
) -> SampleSet {
    let p = params.p();
    match ground_truth {
        GroundTruth::Lwe => {
            let s = params.sample_uniform(rng);
            let pairs = (0..m)
                .map(|_| {
                    let a = params.sample_uniform(rng);
                    let e = params.sample_error(rng);
                    let b = a
                        .mul(&s)
                        .and_then(|as_| as_.add(&e.scalar_mul(p)))
                        .expect("sample elements share parameters");
                    (a, b)
                })
                .collect();
            SampleSet {
                pairs,
                ground_truth,
                secret: Some(s),
            }
        }
        GroundTruth::Uniform => {
            let pairs = (0..m)
                .map(|_| (params.sample_uniform(rng), params.sample_uniform(rng)))
                .collect();
            SampleSet {
                pairs,
                ground_truth,
                secret: None,
            }
        }
    }
}

// -------------------------------------------------------------- reduction

struct ReductionKeyIssuer<'a> {
    params: Params,
    set: &'a SampleSet,
    cursor: usize,
    /// Inverse of the a_j backing PK_i, under the active convention.
    attr_inverses: Vec<RingElement>,
    identity_samples: BTreeMap<String, usize>,
    rng: ChaCha20Rng,
}

impl ReductionKeyIssuer<'_> {
    fn next_sample(&mut self) -> Result<usize, GameError> {
        if self.cursor >= self.set.len() {
            return Err(GameError::SampleSetExhausted(self.set.len()));
        }
        let idx = self.cursor;
        self.cursor += 1;
        Ok(idx)
    }
}

impl KeyIssuer for ReductionKeyIssuer<'_> {
    fn issue(&mut self, identity: &str, attribute: u32) -> Result<IssuedAttributeKey, GameError> {
        let sample_idx = match self.identity_samples.get(identity) {
            Some(&idx) => idx,
            None => {
                let idx = self.next_sample()?;
                self.identity_samples.insert(identity.to_string(), idx);
                idx
            }
        };
        let (a_u, b_u) = &self.set.pairs()[sample_idx];
        let inverse = &self.attr_inverses[attribute as usize - 1];
        let e = self.params.sample_error(&mut self.rng);
        let attr_key = inverse
            .mul(a_u)
            .and_then(|x| x.add(&e.scalar_mul(self.params.p())))
            .map_err(SchemeError::from)?;
        Ok(IssuedAttributeKey {
            identity: identity.to_string(),
            attribute,
            sk_u: b_u.clone(),
            attr_key,
        })
    }
}

/// Bookkeeping from one reduction run, for structural checks.
#[derive(Debug, Clone)]
pub struct ReductionTrace {
    /// Sample indices whose b_j became PK_0..PK_n, in component order.
    pub pk_sample_indices: Vec<usize>,
    /// Sample index consumed per queried identity.
    pub identity_samples: BTreeMap<String, usize>,
    pub synthetic_pk: PublicKey,
    pub transcript: GameTranscript,
}

/// Runs the ABE adversary against a public key synthesized from the sample
/// set and maps its success onto an LWE/uniform decision: a correct guess
/// means "LWE".
pub fn run_reduction_on_set<R: Rng + ?Sized>(
    adversary: &mut dyn Adversary,
    params: &Params,
    n_attrs: u32,
    set: &SampleSet,
    rng: &mut R,
) -> Result<(GroundTruth, ReductionTrace), GameError> {
    if set.len() <= n_attrs as usize {
        return Err(GameError::SampleSetTooSmall {
            needed: n_attrs as usize + 1,
            got: set.len(),
        });
    }

    // PK_0 = b_0; PK_i = b_j for the next samples whose a_j is invertible
    // under the active convention (the inverse is needed for key queries).
    let mut cursor = 0usize;
    let mut pk_sample_indices = Vec::with_capacity(n_attrs as usize + 1);
    let mut components = Vec::with_capacity(n_attrs as usize + 1);
    let mut attr_inverses = Vec::with_capacity(n_attrs as usize);

    components.push(set.pairs()[cursor].1.clone());
    pk_sample_indices.push(cursor);
    cursor += 1;

    while attr_inverses.len() < n_attrs as usize {
        if cursor >= set.len() {
            return Err(GameError::SampleSetExhausted(set.len()));
        }
        let (a_j, b_j) = &set.pairs()[cursor];
        let inverse = match params.mode.inverse_convention {
            InverseConvention::ExactInverse => a_j.inv_q(),
            InverseConvention::PaperLiteral => a_j.inv_mod_p(params.p()),
        };
        if let Ok(inverse) = inverse {
            components.push(b_j.clone());
            attr_inverses.push(inverse);
            pk_sample_indices.push(cursor);
        }
        cursor += 1;
    }

    let a_prime = params.sample_uniform(rng);
    let synthetic_pk = PublicKey::from_parts(*params, n_attrs, a_prime, components)?;

    let issuer_rng = ChaCha20Rng::from_rng(&mut *rng).expect("fork issuer rng");
    let mut issuer = ReductionKeyIssuer {
        params: *params,
        set,
        cursor,
        attr_inverses,
        identity_samples: BTreeMap::new(),
        rng: issuer_rng,
    };

    let transcript = drive(adversary, &synthetic_pk, &mut issuer, rng, None)?;
    let decision = match transcript.outcome {
        GameOutcome::Win => GroundTruth::Lwe,
        GameOutcome::Lose => GroundTruth::Uniform,
        GameOutcome::Abort => return Err(GameError::ChallengeAborted),
        GameOutcome::Invalid => {
            return Err(GameError::InvalidAdversary("challenge was rejected".into()))
        }
    };
    let trace = ReductionTrace {
        pk_sample_indices,
        identity_samples: issuer.identity_samples,
        synthetic_pk,
        transcript,
    };
    Ok((decision, trace))
}

/// Builds a fresh sample set of size `m` with the given ground truth and
/// runs the reduction over it, returning the decision.
pub fn run_reduction<R: Rng + ?Sized>(
    adversary: &mut dyn Adversary,
    params: &Params,
    n_attrs: u32,
    m: usize,
    rng: &mut R,
    ground_truth: GroundTruth,
) -> Result<GroundTruth, GameError> {
    let set = make_sample_set(params, m, ground_truth, rng);
    run_reduction_on_set(adversary, params, n_attrs, &set, rng).map(|(decision, _)| decision)
}

// ------------------------------------------------------------ adversaries

/// Baseline adversary: no queries, fixed challenge, uniformly random guess.
pub struct CoinFlipAdversary {
    tree: AccessTree,
    m0: RingElement,
    m1: RingElement,
    rng: ChaCha20Rng,
}

impl CoinFlipAdversary {
    pub fn new(params: &Params, seed: u64) -> Self {
        let tree = AccessTree::leaf(1).expect("attribute 1 is valid");
        CoinFlipAdversary {
            tree,
            m0: params.zero(),
            m1: params.constant(1),
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl Adversary for CoinFlipAdversary {
    fn phase1(&mut self, _pk: &PublicKey, _oracle: &mut KeyGenOracle<'_>) {}

    fn challenge(&mut self) -> ChallengeRequest {
        ChallengeRequest {
            tree: self.tree.clone(),
            m0: self.m0.clone(),
            m1: self.m1.clone(),
        }
    }

    fn phase2(&mut self, _ct: &Ciphertext, _oracle: &mut KeyGenOracle<'_>) {}

    fn guess(&mut self) -> Bit {
        self.rng.gen_range(0..=1)
    }
}

/// Queries every attribute of its challenge tree for one identity before
/// challenging on it; the challenger must abort.
pub struct SatisfyingKeyAdversary {
    tree: AccessTree,
    m0: RingElement,
    m1: RingElement,
}

impl SatisfyingKeyAdversary {
    pub fn new(params: &Params, tree: AccessTree) -> Self {
        SatisfyingKeyAdversary {
            tree,
            m0: params.zero(),
            m1: params.constant(1),
        }
    }
}

impl Adversary for SatisfyingKeyAdversary {
    fn phase1(&mut self, _pk: &PublicKey, oracle: &mut KeyGenOracle<'_>) {
        for attribute in self.tree.attributes() {
            oracle.query("greedy", attribute);
        }
    }

    fn challenge(&mut self) -> ChallengeRequest {
        ChallengeRequest {
            tree: self.tree.clone(),
            m0: self.m0.clone(),
            m1: self.m1.clone(),
        }
    }

    fn phase2(&mut self, _ct: &Ciphertext, _oracle: &mut KeyGenOracle<'_>) {}

    fn guess(&mut self) -> Bit {
        0
    }
}

/// Wiring check only: told the forced coin out-of-band, so it must win
/// every forced-coin game.
pub struct OmniscientAdversary {
    known_coin: Bit,
    tree: AccessTree,
    m0: RingElement,
    m1: RingElement,
}

impl OmniscientAdversary {
    pub fn new(params: &Params, known_coin: Bit) -> Self {
        OmniscientAdversary {
            known_coin,
            tree: AccessTree::leaf(1).expect("attribute 1 is valid"),
            m0: params.zero(),
            m1: params.constant(1),
        }
    }
}

impl Adversary for OmniscientAdversary {
    fn phase1(&mut self, _pk: &PublicKey, _oracle: &mut KeyGenOracle<'_>) {}

    fn challenge(&mut self) -> ChallengeRequest {
        ChallengeRequest {
            tree: self.tree.clone(),
            m0: self.m0.clone(),
            m1: self.m1.clone(),
        }
    }

    fn phase2(&mut self, _ct: &Ciphertext, _oracle: &mut KeyGenOracle<'_>) {}

    fn guess(&mut self) -> Bit {
        self.known_coin
    }
}

// ------------------------------------------------------------ shape checks

/// Structural fingerprint of a ciphertext: parameter geometry, leaf ids,
/// and component count — everything except the element values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextShape {
    pub n: usize,
    pub q: u64,
    pub leaf_ids: Vec<u32>,
    pub element_lengths_uniform: bool,
}

pub fn ciphertext_shape(ct: &Ciphertext) -> CiphertextShape {
    let n = ct.params.n();
    let uniform = ct
        .c_leaves()
        .values()
        .chain([&ct.c_prime, &ct.c_body])
        .all(|e| e.len() == n);
    CiphertextShape {
        n,
        q: ct.params.q(),
        leaf_ids: ct.c_leaves().keys().map(|l| l.0).collect(),
        element_lengths_uniform: uniform,
    }
}

/// Structural fingerprint of an issued key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyShape {
    pub n: usize,
    pub q: u64,
    pub attribute: u32,
}

pub fn key_shape(key: &IssuedAttributeKey) -> KeyShape {
    debug_assert_eq!(key.sk_u.len(), key.attr_key.len());
    KeyShape {
        n: key.sk_u.len(),
        q: key.sk_u.modulus(),
        attribute: key.attribute,
    }
}

// ----------------------------------------------------------- trial records

/// One line of the game report stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcome: GameOutcome,
    pub queries: usize,
}

/// Writes records as line-delimited JSON.
pub fn write_records<W: Write>(mut sink: W, records: &[TrialRecord]) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a line-delimited JSON record stream.
pub fn read_records<R: io::Read>(source: R) -> io::Result<Vec<TrialRecord>> {
    let reader = io::BufReader::new(source);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// True when successes/trials sits within `z` binomial standard errors of
/// the null rate `p0`.
pub fn within_binomial_band(successes: usize, trials: usize, p0: f64, z: f64) -> bool {
    let rate = successes as f64 / trials as f64;
    let se = (p0 * (1.0 - p0) / trials as f64).sqrt();
    (rate - p0).abs() <= z * se
}
