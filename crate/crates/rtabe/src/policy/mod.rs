//! Threshold access trees and polynomial secret sharing along them.
//!
//! Leaves carry attributes; an inner node with children c_1..c_m and
//! threshold k is satisfied when at least k children are satisfied.
//! Sharing walks the tree top-down: each node with threshold k holds a
//! degree-(k-1) polynomial over R_q whose constant term is the value to
//! share, and child c_i receives the evaluation at the scalar i. Combining
//! walks bottom-up, recovering each node's constant term from k child
//! values by Lagrange interpolation at zero.

mod parse;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::ring::{inv_mod, mul_mod, sub_mod, Params, RingElement, RingError};

pub use parse::{format_policy, parse_policy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("threshold {threshold} exceeds child count {children}")]
    ThresholdTooLarge { threshold: usize, children: usize },
    #[error("threshold must be at least 1")]
    ThresholdZero,
    #[error("inner node must have at least one child")]
    NoChildren,
    #[error("attribute ids are 1-based; 0 is not a valid attribute")]
    AttributeZero,
    #[error("attribute {attribute} outside the universe 1..={universe}")]
    AttributeOutOfUniverse { attribute: u32, universe: u32 },
    #[error("node has {children} children; modulus {q} requires fewer than q")]
    TooManyChildren { children: usize, q: u64 },
    #[error("Lagrange indices must be distinct")]
    DuplicateIndices,
    #[error("Lagrange index selection out of range")]
    IndexOutOfRange,
    #[error("shares do not satisfy the access tree")]
    Unsatisfied,
    #[error("share map references a leaf outside the tree")]
    UnknownLeaf,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Stable identifier of a leaf: its zero-based position in a left-to-right
/// depth-first walk of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf {
        attribute: u32,
    },
    Inner {
        threshold: usize,
        children: Vec<Node>,
    },
}

/// A validated threshold access tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessTree {
    root: Node,
}

/// A set of attribute ids (positive integers, no duplicates).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeSet(BTreeSet<u32>);

impl AttributeSet {
    pub fn new(attrs: impl IntoIterator<Item = u32>) -> Result<Self, PolicyError> {
        let mut set = BTreeSet::new();
        for a in attrs {
            if a == 0 {
                return Err(PolicyError::AttributeZero);
            }
            set.insert(a);
        }
        Ok(AttributeSet(set))
    }

    pub fn empty() -> Self {
        AttributeSet(BTreeSet::new())
    }

    pub fn contains(&self, attribute: u32) -> bool {
        self.0.contains(&attribute)
    }

    pub fn insert(&mut self, attribute: u32) -> Result<(), PolicyError> {
        if attribute == 0 {
            return Err(PolicyError::AttributeZero);
        }
        self.0.insert(attribute);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.iter().next_back().copied()
    }

    pub fn is_subset(&self, other: &AttributeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn check_universe(&self, universe: u32) -> Result<(), PolicyError> {
        if let Some(max) = self.max() {
            if max > universe {
                return Err(PolicyError::AttributeOutOfUniverse {
                    attribute: max,
                    universe,
                });
            }
        }
        Ok(())
    }
}

/// Maps each leaf to the constant term of its assigned polynomial. Produced
/// complete by `share`; decryption restricts it to a satisfying subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareMap {
    entries: BTreeMap<LeafId, RingElement>,
}

impl ShareMap {
    pub fn from_entries(entries: BTreeMap<LeafId, RingElement>) -> Self {
        ShareMap { entries }
    }

    pub fn get(&self, leaf: LeafId) -> Option<&RingElement> {
        self.entries.get(&leaf)
    }

    pub fn entries(&self) -> &BTreeMap<LeafId, RingElement> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The sub-map over `leaves`; missing leaves are silently dropped.
    pub fn restrict(&self, leaves: &BTreeSet<LeafId>) -> ShareMap {
        ShareMap {
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| leaves.contains(id))
                .map(|(id, v)| (*id, v.clone()))
                .collect(),
        }
    }
}

impl Node {
    pub fn leaf(attribute: u32) -> Node {
        Node::Leaf { attribute }
    }

    pub fn inner(threshold: usize, children: Vec<Node>) -> Node {
        Node::Inner {
            threshold,
            children,
        }
    }

    fn validate(&self) -> Result<(), PolicyError> {
        match self {
            Node::Leaf { attribute } => {
                if *attribute == 0 {
                    return Err(PolicyError::AttributeZero);
                }
                Ok(())
            }
            Node::Inner {
                threshold,
                children,
            } => {
                if children.is_empty() {
                    return Err(PolicyError::NoChildren);
                }
                if *threshold == 0 {
                    return Err(PolicyError::ThresholdZero);
                }
                if *threshold > children.len() {
                    return Err(PolicyError::ThresholdTooLarge {
                        threshold: *threshold,
                        children: children.len(),
                    });
                }
                children.iter().try_for_each(Node::validate)
            }
        }
    }
}

impl AccessTree {
    pub fn new(root: Node) -> Result<Self, PolicyError> {
        root.validate()?;
        Ok(AccessTree { root })
    }

    /// Single-leaf tree for one attribute.
    pub fn leaf(attribute: u32) -> Result<Self, PolicyError> {
        AccessTree::new(Node::leaf(attribute))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// All leaves in id order, paired with their attributes.
    pub fn leaves(&self) -> Vec<(LeafId, u32)> {
        let mut out = Vec::new();
        fn walk(node: &Node, next: &mut u32, out: &mut Vec<(LeafId, u32)>) {
            match node {
                Node::Leaf { attribute } => {
                    out.push((LeafId(*next), *attribute));
                    *next += 1;
                }
                Node::Inner { children, .. } => {
                    for child in children {
                        walk(child, next, out);
                    }
                }
            }
        }
        walk(&self.root, &mut 0, &mut out);
        out
    }

    pub fn leaf_ids(&self) -> BTreeSet<LeafId> {
        self.leaves().into_iter().map(|(id, _)| id).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Distinct attributes appearing on leaves.
    pub fn attributes(&self) -> BTreeSet<u32> {
        self.leaves().into_iter().map(|(_, a)| a).collect()
    }

    pub fn max_attribute(&self) -> u32 {
        self.attributes().into_iter().next_back().unwrap_or(0)
    }

    pub fn check_universe(&self, universe: u32) -> Result<(), PolicyError> {
        let max = self.max_attribute();
        if max > universe {
            return Err(PolicyError::AttributeOutOfUniverse {
                attribute: max,
                universe,
            });
        }
        Ok(())
    }

    fn check_arity(&self, q: u64) -> Result<(), PolicyError> {
        fn walk(node: &Node, q: u64) -> Result<(), PolicyError> {
            if let Node::Inner { children, .. } = node {
                if children.len() as u64 >= q {
                    return Err(PolicyError::TooManyChildren {
                        children: children.len(),
                        q,
                    });
                }
                children.iter().try_for_each(|c| walk(c, q))?;
            }
            Ok(())
        }
        walk(&self.root, q)
    }

    /// The satisfaction function: true iff `att` satisfies this tree.
    pub fn evaluate(&self, att: &AttributeSet) -> bool {
        fn eval(node: &Node, att: &AttributeSet) -> bool {
            match node {
                Node::Leaf { attribute } => att.contains(*attribute),
                Node::Inner {
                    threshold,
                    children,
                } => children.iter().filter(|c| eval(c, att)).count() >= *threshold,
            }
        }
        eval(&self.root, att)
    }

    /// Picks a minimal satisfying leaf set: at every inner node used, exactly
    /// `threshold` satisfied children are kept, lowest child index first.
    /// Returns `None` when `att` does not satisfy the tree.
    pub fn select_satisfying_subset(&self, att: &AttributeSet) -> Option<BTreeSet<LeafId>> {
        fn select(node: &Node, att: &AttributeSet, next: &mut u32) -> Option<BTreeSet<LeafId>> {
            match node {
                Node::Leaf { attribute } => {
                    let id = LeafId(*next);
                    *next += 1;
                    att.contains(*attribute).then(|| BTreeSet::from([id]))
                }
                Node::Inner {
                    threshold,
                    children,
                } => {
                    let mut picked: Vec<BTreeSet<LeafId>> = Vec::new();
                    for child in children {
                        // Recurse into every child so leaf numbering stays aligned.
                        let sub = select(child, att, next);
                        if let Some(sub) = sub {
                            if picked.len() < *threshold {
                                picked.push(sub);
                            }
                        }
                    }
                    if picked.len() < *threshold {
                        return None;
                    }
                    Some(picked.into_iter().flatten().collect())
                }
            }
        }
        let mut next = 0;
        select(&self.root, att, &mut next)
    }
}

/// Lagrange coefficient at zero for position `which` of the evaluation
/// points `indices`: Π_{t≠j} (0 - i_t) / (i_j - i_t) mod q.
pub fn lagrange_at_zero(indices: &[u64], which: usize, q: u64) -> Result<u64, PolicyError> {
    let &x_j = indices.get(which).ok_or(PolicyError::IndexOutOfRange)?;
    if indices.iter().any(|&i| i == 0 || i >= q) {
        return Err(PolicyError::IndexOutOfRange);
    }
    let mut acc = 1u64;
    for (t, &x_t) in indices.iter().enumerate() {
        if t == which {
            continue;
        }
        if x_t == x_j {
            return Err(PolicyError::DuplicateIndices);
        }
        let numer = sub_mod(0, x_t, q);
        let denom = inv_mod(sub_mod(x_j, x_t, q), q).ok_or(PolicyError::DuplicateIndices)?;
        acc = mul_mod(acc, mul_mod(numer, denom, q), q);
    }
    Ok(acc)
}

/// Shares `secret` over the tree. Every node with threshold k gets a
/// degree-(k-1) polynomial: constant term the node's value, remaining
/// coefficients fresh uniform ring elements; child i receives the
/// evaluation at the scalar i (1-based). The result maps each leaf to its
/// polynomial's constant term.
pub fn share<R: Rng + ?Sized>(
    tree: &AccessTree,
    params: &Params,
    secret: &RingElement,
    rng: &mut R,
) -> Result<ShareMap, PolicyError> {
    if !params.owns(secret) {
        return Err(PolicyError::Ring(RingError::ParamsMismatch(
            "secret does not belong to the parameter ring".into(),
        )));
    }
    tree.check_arity(params.q())?;

    fn eval_at(poly: &[RingElement], x: u64) -> Result<RingElement, RingError> {
        // Horner with the scalar point x.
        let mut acc = poly.last().expect("polynomial is nonempty").clone();
        for coeff in poly.iter().rev().skip(1) {
            acc = acc.scalar_mul(x).add(coeff)?;
        }
        Ok(acc)
    }

    fn assign<R: Rng + ?Sized>(
        node: &Node,
        value: RingElement,
        params: &Params,
        rng: &mut R,
        next: &mut u32,
        out: &mut BTreeMap<LeafId, RingElement>,
    ) -> Result<(), PolicyError> {
        match node {
            Node::Leaf { .. } => {
                out.insert(LeafId(*next), value);
                *next += 1;
                Ok(())
            }
            Node::Inner {
                threshold,
                children,
            } => {
                let mut poly = Vec::with_capacity(*threshold);
                poly.push(value);
                for _ in 1..*threshold {
                    poly.push(params.sample_uniform(rng));
                }
                for (i, child) in children.iter().enumerate() {
                    let point = (i as u64 + 1) % params.q();
                    let child_value = eval_at(&poly, point)?;
                    assign(child, child_value, params, rng, next, out)?;
                }
                Ok(())
            }
        }
    }

    let mut entries = BTreeMap::new();
    let mut next = 0;
    assign(
        &tree.root,
        secret.clone(),
        params,
        rng,
        &mut next,
        &mut entries,
    )?;
    Ok(ShareMap::from_entries(entries))
}

/// Reconstructs the shared secret from leaf values over a satisfying subset.
/// Every inner node with at least `threshold` recovered children combines
/// the lowest-indexed `threshold` of them by Lagrange interpolation at zero;
/// if the provided shares do not satisfy the tree this aborts with
/// `Unsatisfied`.
pub fn combine(
    tree: &AccessTree,
    params: &Params,
    shares: &ShareMap,
) -> Result<RingElement, PolicyError> {
    let known = tree.leaf_ids();
    if shares.entries.keys().any(|id| !known.contains(id)) {
        return Err(PolicyError::UnknownLeaf);
    }

    fn recover(
        node: &Node,
        shares: &ShareMap,
        params: &Params,
        next: &mut u32,
    ) -> Result<Option<RingElement>, PolicyError> {
        match node {
            Node::Leaf { .. } => {
                let id = LeafId(*next);
                *next += 1;
                Ok(shares.get(id).cloned())
            }
            Node::Inner {
                threshold,
                children,
            } => {
                let mut picked: Vec<(u64, RingElement)> = Vec::new();
                for (i, child) in children.iter().enumerate() {
                    let sub = recover(child, shares, params, next)?;
                    if let Some(value) = sub {
                        if picked.len() < *threshold {
                            picked.push((i as u64 + 1, value));
                        }
                    }
                }
                if picked.len() < *threshold {
                    return Ok(None);
                }
                let indices: Vec<u64> = picked.iter().map(|(i, _)| *i).collect();
                let mut acc = params.zero();
                for (j, (_, value)) in picked.iter().enumerate() {
                    let weight = lagrange_at_zero(&indices, j, params.q())?;
                    acc = acc.add(&value.scalar_mul(weight))?;
                }
                Ok(Some(acc))
            }
        }
    }

    let mut next = 0;
    recover(&tree.root, shares, params, &mut next)?.ok_or(PolicyError::Unsatisfied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::SchemeMode;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> Params {
        Params::toy(SchemeMode::exact_noiseless())
    }

    fn attrs(list: &[u32]) -> AttributeSet {
        AttributeSet::new(list.iter().copied()).unwrap()
    }

    /// Random tree with at most `max_leaves` leaves, attributes in
    /// 1..=universe, depth at most `max_depth`.
    pub(crate) fn random_tree<R: Rng>(
        rng: &mut R,
        max_leaves: usize,
        max_depth: usize,
        universe: u32,
    ) -> AccessTree {
        fn gen<R: Rng>(rng: &mut R, budget: usize, depth: usize, universe: u32) -> (Node, usize) {
            if depth == 0 || budget <= 1 || rng.gen_bool(0.3) {
                return (Node::leaf(rng.gen_range(1..=universe)), 1);
            }
            let arity = rng.gen_range(2..=budget.min(4));
            let mut children = Vec::with_capacity(arity);
            let mut used = 0;
            for j in 0..arity {
                // Reserve one leaf for each child still to come.
                let remaining = budget - used - (arity - j - 1);
                let (child, leaves) = gen(rng, remaining, depth - 1, universe);
                used += leaves;
                children.push(child);
            }
            let threshold = rng.gen_range(1..=children.len());
            (Node::inner(threshold, children), used)
        }
        let (root, _) = gen(rng, max_leaves.max(1), max_depth, universe);
        AccessTree::new(root).unwrap()
    }

    #[test]
    fn tree_validation() {
        assert!(AccessTree::leaf(1).is_ok());
        assert!(matches!(
            AccessTree::new(Node::leaf(0)),
            Err(PolicyError::AttributeZero)
        ));
        assert!(matches!(
            AccessTree::new(Node::inner(0, vec![Node::leaf(1)])),
            Err(PolicyError::ThresholdZero)
        ));
        assert!(matches!(
            AccessTree::new(Node::inner(3, vec![Node::leaf(1), Node::leaf(2)])),
            Err(PolicyError::ThresholdTooLarge { .. })
        ));
        assert!(matches!(
            AccessTree::new(Node::inner(1, vec![])),
            Err(PolicyError::NoChildren)
        ));
    }

    #[test]
    fn evaluate_gates() {
        let or = parse_policy("or(att1, att2)").unwrap();
        assert!(or.evaluate(&attrs(&[2])));
        let and = parse_policy("and(att1, att2)").unwrap();
        assert!(!and.evaluate(&attrs(&[1])));
        assert!(and.evaluate(&attrs(&[1, 2])));
    }

    /// Literal transcription of the satisfaction definition: an inner node
    /// is satisfied iff some size-threshold subset of children is entirely
    /// satisfied. Exponential, for cross-checking only.
    fn brute_force_eval(node: &Node, att: &AttributeSet) -> bool {
        match node {
            Node::Leaf { attribute } => att.contains(*attribute),
            Node::Inner {
                threshold,
                children,
            } => {
                let sat: Vec<bool> = children.iter().map(|c| brute_force_eval(c, att)).collect();
                for mask in 0u32..(1 << children.len()) {
                    if (mask.count_ones() as usize) >= *threshold
                        && (0..children.len())
                            .filter(|i| mask & (1 << i) != 0)
                            .all(|i| sat[i])
                    {
                        return true;
                    }
                }
                false
            }
        }
    }

    #[test]
    fn evaluate_matches_brute_force_on_random_trees() {
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        for _ in 0..200 {
            let tree = random_tree(&mut rng, 10, 3, 6);
            let tree_attrs: Vec<u32> = tree.attributes().into_iter().collect();
            for mask in 0u32..(1 << tree_attrs.len()) {
                let subset: Vec<u32> = tree_attrs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &a)| a)
                    .collect();
                let att = attrs(&subset);
                assert_eq!(tree.evaluate(&att), brute_force_eval(tree.root(), &att));
            }
        }
    }

    #[test]
    fn monotonicity() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..300 {
            let tree = random_tree(&mut rng, 10, 3, 6);
            let all: Vec<u32> = tree.attributes().into_iter().collect();
            let mut small: Vec<u32> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            let att_small = attrs(&small);
            small.extend(all.iter().copied().filter(|_| rng.gen_bool(0.5)));
            let att_big = attrs(&small);
            if tree.evaluate(&att_small) {
                assert!(tree.evaluate(&att_big), "satisfaction must be monotone");
            }
        }
    }

    #[test]
    fn select_forced_and_pruned() {
        let and = parse_policy("and(att1, att2)").unwrap();
        let picked = and.select_satisfying_subset(&attrs(&[1, 2])).unwrap();
        assert_eq!(picked.len(), 2);

        let or = parse_policy("or(att1, att2)").unwrap();
        let picked = or.select_satisfying_subset(&attrs(&[1, 2])).unwrap();
        assert_eq!(picked, BTreeSet::from([LeafId(0)]), "lowest index wins");

        assert!(and.select_satisfying_subset(&attrs(&[1])).is_none());
    }

    /// Checks that `selected` uses exactly `threshold` children at every
    /// inner node it passes through, and satisfies the tree.
    fn selection_well_formed(
        node: &Node,
        selected: &BTreeSet<LeafId>,
        next: &mut u32,
    ) -> Option<bool> {
        match node {
            Node::Leaf { .. } => {
                let id = LeafId(*next);
                *next += 1;
                Some(selected.contains(&id))
            }
            Node::Inner {
                threshold,
                children,
            } => {
                let mut used = 0;
                for child in children {
                    match selection_well_formed(child, selected, next) {
                        Some(true) => used += 1,
                        Some(false) => {}
                        None => return None,
                    }
                }
                if used == 0 {
                    Some(false)
                } else if used == *threshold {
                    Some(true)
                } else {
                    // A used node with any other count breaks minimality.
                    None
                }
            }
        }
    }

    #[test]
    fn selection_minimal_on_random_trees() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        for _ in 0..400 {
            let tree = random_tree(&mut rng, 12, 4, 8);
            let all: Vec<u32> = tree.attributes().into_iter().collect();
            let subset: Vec<u32> = all.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            let att = attrs(&subset);
            match tree.select_satisfying_subset(&att) {
                Some(selection) => {
                    assert!(tree.evaluate(&att));
                    let mut next = 0;
                    assert_eq!(
                        selection_well_formed(tree.root(), &selection, &mut next),
                        Some(true)
                    );
                }
                None => assert!(!tree.evaluate(&att)),
            }
        }
    }

    #[test]
    fn lagrange_small_cases() {
        let q = toy().q();
        assert_eq!(lagrange_at_zero(&[1], 0, q).unwrap(), 1);
        assert_eq!(lagrange_at_zero(&[1, 2], 0, q).unwrap(), 2);
        assert_eq!(lagrange_at_zero(&[1, 2], 1, q).unwrap(), q - 1);
        assert_eq!(lagrange_at_zero(&[1, 2, 3], 0, q).unwrap(), 3);
        assert_eq!(lagrange_at_zero(&[1, 2, 3], 1, q).unwrap(), q - 3);
        assert_eq!(lagrange_at_zero(&[1, 2, 3], 2, q).unwrap(), 1);
        assert!(matches!(
            lagrange_at_zero(&[1, 1], 0, q),
            Err(PolicyError::DuplicateIndices)
        ));
        assert!(lagrange_at_zero(&[1], 3, q).is_err());
    }

    #[test]
    fn share_base_cases() {
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let secret = params.sample_uniform(&mut rng);

        let single = AccessTree::leaf(1).unwrap();
        let shares = share(&single, &params, &secret, &mut rng).unwrap();
        assert_eq!(shares.len(), 1);
        assert_eq!(shares.get(LeafId(0)).unwrap(), &secret);

        // Threshold-1 root: the constant polynomial hands the secret to
        // every child.
        let or = parse_policy("or(att1, att2)").unwrap();
        let shares = share(&or, &params, &secret, &mut rng).unwrap();
        assert_eq!(shares.get(LeafId(0)).unwrap(), &secret);
        assert_eq!(shares.get(LeafId(1)).unwrap(), &secret);
    }

    #[test]
    fn share_combine_round_trip_random_trees() {
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        for _ in 0..300 {
            let tree = random_tree(&mut rng, 12, 4, 8);
            let secret = params.sample_uniform(&mut rng);
            let shares = share(&tree, &params, &secret, &mut rng).unwrap();
            assert_eq!(
                shares.entries().keys().copied().collect::<BTreeSet<_>>(),
                tree.leaf_ids()
            );

            // A random satisfying attribute set, if one exists.
            let all: Vec<u32> = tree.attributes().into_iter().collect();
            let mut chosen: Vec<u32> = all.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
            if !tree.evaluate(&attrs(&chosen)) {
                chosen = all.clone();
            }
            let att = attrs(&chosen);
            if let Some(selection) = tree.select_satisfying_subset(&att) {
                let recovered = combine(&tree, &params, &shares.restrict(&selection)).unwrap();
                assert_eq!(recovered, secret);
            }
        }
    }

    #[test]
    fn combine_aborts_on_unsatisfying_shares() {
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(25);
        let tree = parse_policy("and(att1, att2)").unwrap();
        let secret = params.sample_uniform(&mut rng);
        let shares = share(&tree, &params, &secret, &mut rng).unwrap();
        let partial = shares.restrict(&BTreeSet::from([LeafId(0)]));
        assert_eq!(
            combine(&tree, &params, &partial),
            Err(PolicyError::Unsatisfied)
        );
        // Leaf id outside the tree.
        let mut bogus = shares.entries().clone();
        bogus.insert(LeafId(99), params.zero());
        assert_eq!(
            combine(&tree, &params, &ShareMap::from_entries(bogus)),
            Err(PolicyError::UnknownLeaf)
        );
    }

    #[test]
    fn combine_single_leaf() {
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(26);
        let tree = AccessTree::leaf(4).unwrap();
        let value = params.sample_uniform(&mut rng);
        let mut entries = BTreeMap::new();
        entries.insert(LeafId(0), value.clone());
        assert_eq!(
            combine(&tree, &params, &ShareMap::from_entries(entries)).unwrap(),
            value
        );
    }

    #[test]
    fn combine_tolerates_extra_satisfied_children() {
        // With more than `threshold` recovered children, the lowest-indexed
        // ones are used and reconstruction still lands on the secret.
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(27);
        let tree = parse_policy("thresh(2, att1, att2, att3)").unwrap();
        let secret = params.sample_uniform(&mut rng);
        let shares = share(&tree, &params, &secret, &mut rng).unwrap();
        assert_eq!(combine(&tree, &params, &shares).unwrap(), secret);
    }

    #[test]
    fn hiding_below_threshold() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        // For a 2-of-3 root, a single leaf share is uniform whatever the
        // secret: compare coefficient histograms for two fixed secrets.
        let params = toy();
        let tree = parse_policy("thresh(2, att1, att2, att3)").unwrap();
        let q = params.q();
        let bins = 64usize;
        let bin_width = q as usize / bins + 1;
        let mut rng = ChaCha20Rng::seed_from_u64(28);
        let secret0 = params.zero();
        let secret1 = params.sample_uniform(&mut rng);
        let mut hist = [vec![0u64; bins], vec![0u64; bins]];
        for trial in 0..10_000 {
            let _ = trial;
            for (pop, secret) in [&secret0, &secret1].into_iter().enumerate() {
                let shares = share(&tree, &params, secret, &mut rng).unwrap();
                for &c in shares.get(LeafId(0)).unwrap().coeffs() {
                    hist[pop][c as usize / bin_width] += 1;
                }
            }
        }
        // Two-sample chi-square homogeneity test.
        let total: u64 = hist[0].iter().sum::<u64>() + hist[1].iter().sum::<u64>();
        let row: [u64; 2] = [hist[0].iter().sum(), hist[1].iter().sum()];
        let mut stat = 0.0;
        for (bin0, bin1) in hist[0].iter().zip(&hist[1]) {
            let col = bin0 + bin1;
            if col == 0 {
                continue;
            }
            for (pop, &observed) in [bin0, bin1].into_iter().enumerate() {
                let expected = row[pop] as f64 * col as f64 / total as f64;
                let diff = observed as f64 - expected;
                stat += diff * diff / expected;
            }
        }
        let critical = ChiSquared::new((bins - 1) as f64)
            .unwrap()
            .inverse_cdf(0.999);
        assert!(
            stat < critical,
            "share distributions distinguishable: chi2 {stat} >= {critical}"
        );
    }

    #[test]
    fn share_rejects_foreign_secret() {
        let params = toy();
        let tree = AccessTree::leaf(1).unwrap();
        let foreign = RingElement::from_coeffs(vec![1, 2, 3, 4], 17).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(29);
        assert!(share(&tree, &params, &foreign, &mut rng).is_err());
    }

    #[test]
    fn shuffled_share_subsets_reconstruct() {
        // Any minimal satisfying subset works, not just the canonical one.
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        let tree = parse_policy("thresh(2, att1, att2, att3, att4)").unwrap();
        let secret = params.sample_uniform(&mut rng);
        let shares = share(&tree, &params, &secret, &mut rng).unwrap();
        let ids: Vec<LeafId> = tree.leaf_ids().into_iter().collect();
        for _ in 0..20 {
            let mut pick = ids.clone();
            pick.shuffle(&mut rng);
            let subset: BTreeSet<LeafId> = pick.into_iter().take(2).collect();
            let recovered = combine(&tree, &params, &shares.restrict(&subset)).unwrap();
            assert_eq!(recovered, secret);
        }
    }
}
