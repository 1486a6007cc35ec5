//! Shared generators for the integration suites.

use rand::Rng;

use rtabe::policy::{AccessTree, AttributeSet, Node};

/// Random access tree with at most `max_leaves` leaves and depth at most
/// `max_depth`, attributes drawn (with repetition) from 1..=universe.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    max_leaves: usize,
    max_depth: usize,
    universe: u32,
) -> AccessTree {
    fn gen<R: Rng>(rng: &mut R, budget: usize, depth: usize, universe: u32) -> (Node, usize) {
        if depth == 0 || budget <= 1 || rng.gen_bool(0.3) {
            return (
                Node::Leaf {
                    attribute: rng.gen_range(1..=universe),
                },
                1,
            );
        }
        let arity = rng.gen_range(2..=budget.min(4));
        let mut children = Vec::with_capacity(arity);
        let mut used = 0;
        for j in 0..arity {
            let remaining = budget - used - (arity - j - 1);
            let (child, leaves) = gen(rng, remaining, depth - 1, universe);
            used += leaves;
            children.push(child);
        }
        let threshold = rng.gen_range(1..=children.len());
        (
            Node::Inner {
                threshold,
                children,
            },
            used,
        )
    }
    let (root, _) = gen(rng, max_leaves.max(1), max_depth, universe);
    AccessTree::new(root).expect("generated trees satisfy the invariants")
}

/// A random attribute set that satisfies the tree (falling back to the
/// full attribute set, which always satisfies).
pub fn satisfying_attributes<R: Rng>(rng: &mut R, tree: &AccessTree) -> AttributeSet {
    let all: Vec<u32> = tree.attributes().into_iter().collect();
    for _ in 0..20 {
        let subset: Vec<u32> = all.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        let att = AttributeSet::new(subset).unwrap();
        if tree.evaluate(&att) {
            return att;
        }
    }
    AttributeSet::new(all).unwrap()
}

/// A random attribute set that does not satisfy the tree; the empty set is
/// the fallback (no tree is satisfied by it).
pub fn unsatisfying_attributes<R: Rng>(rng: &mut R, tree: &AccessTree) -> AttributeSet {
    let all: Vec<u32> = tree.attributes().into_iter().collect();
    for _ in 0..50 {
        let subset: Vec<u32> = all.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        let att = AttributeSet::new(subset).unwrap();
        if !tree.evaluate(&att) {
            return att;
        }
    }
    AttributeSet::empty()
}
