use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use treepoly::rng::stream_rng;
use treepoly::{
    evaluate, parse_newick, to_newick, tree_polynomial, BetaSplitter, BivariatePolynomial,
    RootedTree,
};

/// leaf -> a, internal -> b + product of children, in exact integers.
fn numeric_recursion(tree: &RootedTree, a: i64, b: i64) -> BigInt {
    fn go(t: &RootedTree, v: usize, a: i64, b: i64) -> BigInt {
        if t.is_leaf(v) {
            return BigInt::from(a);
        }
        let prod = t.children(v).iter().fold(BigInt::from(1), |acc, &c| acc * go(t, c, a, b));
        prod + BigInt::from(b)
    }
    go(tree, tree.root(), a, b)
}

fn at(p: &BivariatePolynomial, a: i64, b: i64) -> BigRational {
    evaluate(p, &BigRational::from_integer(a.into()), &BigRational::from_integer(b.into()))
}

/// Every unordered rooted binary shape with `n` leaves, each exactly once.
fn binary_shapes(max_n: usize) -> Vec<Vec<RootedTree>> {
    let mut by_size: Vec<Vec<RootedTree>> = vec![Vec::new(), vec![RootedTree::leaf()]];
    for n in 2..=max_n {
        let mut out = Vec::new();
        for left in 1..=n / 2 {
            let right = n - left;
            for (i, a) in by_size[left].iter().enumerate() {
                for (j, b) in by_size[right].iter().enumerate() {
                    if left == right && j < i {
                        continue;
                    }
                    out.push(RootedTree::join([a.clone(), b.clone()]));
                }
            }
        }
        by_size.push(out);
    }
    by_size
}

fn balanced(leaves: usize) -> RootedTree {
    if leaves == 1 {
        return RootedTree::leaf();
    }
    RootedTree::join([balanced(leaves / 2), balanced(leaves - leaves / 2)])
}

#[test]
fn shapes_up_to_eight_leaves_have_distinct_polynomials() {
    let shapes = binary_shapes(8);
    let counts: Vec<usize> = shapes[1..].iter().map(Vec::len).collect();
    assert_eq!(counts, [1, 1, 1, 2, 3, 6, 11, 23]);
    let mut seen = HashSet::new();
    for tree in shapes.iter().flatten() {
        assert!(seen.insert(tree_polynomial(tree)), "collision at {}", to_newick(tree));
    }
    assert_eq!(seen.len(), 48);
}

#[test]
fn balanced_trees_outgrow_64_bits() {
    let t = balanced(64);
    let p = tree_polynomial(&t);
    let two_63 = BigRational::from_integer(BigInt::from(2).pow(63));
    for (a, b) in [(1, 1), (2, 1), (1, 2), (3, 5)] {
        assert_eq!(at(&p, a, b), BigRational::from_integer(numeric_recursion(&t, a, b)));
    }
    // a -> 1 + a^2 from a leaf valued 1: 1, 2, 5, 26, 677, 458330, ~2.1e11,
    // ~4.4e22 for 1, 2, 4, ..., 128 leaves.
    let seq: Vec<BigInt> =
        [1, 2, 4, 8, 16, 32, 64].iter().map(|&n| numeric_recursion(&balanced(n), 1, 1)).collect();
    let want: Vec<BigInt> =
        [1i64, 2, 5, 26, 677, 458330, 210066388901].iter().map(|&v| BigInt::from(v)).collect();
    assert_eq!(seq, want);
    // At (2, 1) the 64-leaf value is the eighth term, ~4.4e22.
    assert!(at(&p, 2, 1) > two_63);
    assert!(at(&p, 3, 5) > two_63);
    // The 128-leaf tree has individual coefficients past u64::MAX.
    let p128 = tree_polynomial(&balanced(128));
    assert!(at(&p128, 1, 1) > two_63);
    assert!(p128.terms().any(|(_, _, c)| c.bits() > 64));
}

fn arb_tree() -> impl Strategy<Value = RootedTree> {
    (1usize..=60, prop::sample::select(vec![-1.5, -1.0, 0.0, 1.0]), any::<u64>()).prop_map(
        |(n, beta, seed)| {
            let mut r = stream_rng(seed, 0);
            BetaSplitter::new(beta, n).unwrap().generate(n, &mut r)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_matches_numeric_recursion(tree in arb_tree()) {
        let p = tree_polynomial(&tree);
        for (a, b) in [(1, 1), (2, 1), (1, 2), (3, 5)] {
            prop_assert_eq!(at(&p, a, b), BigRational::from_integer(numeric_recursion(&tree, a, b)));
        }
        prop_assert_eq!(at(&p, 0, 0), BigRational::from_integer(0.into()));
    }

    #[test]
    fn degree_and_leading_coefficient(tree in arb_tree()) {
        let p = tree_polynomial(&tree);
        let n = tree.leaf_count();
        prop_assert_eq!(p.x_degree(), n);
        prop_assert_eq!(p.coeff(n, 0), 1u32.into());
        prop_assert!(p.y_degree() <= n);
        if n >= 2 {
            prop_assert!(p.coeff(0, 1) >= 1u32.into());
        }
    }

    #[test]
    fn child_order_does_not_matter(tree in arb_tree(), salt in any::<u64>()) {
        let shuffled = tree.reorder_children(|v, kids| {
            if (salt >> (v % 64)) & 1 == 1 {
                kids.reverse();
            }
        });
        prop_assert_eq!(tree_polynomial(&tree), tree_polynomial(&shuffled));
    }

    #[test]
    fn newick_round_trip_keeps_polynomial(tree in arb_tree()) {
        let back = parse_newick(&to_newick(&tree)).unwrap();
        prop_assert_eq!(to_newick(&back), to_newick(&tree));
        prop_assert_eq!(tree_polynomial(&back), tree_polynomial(&tree));
    }
}
