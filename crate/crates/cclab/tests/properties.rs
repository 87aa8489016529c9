//! Property tests for the combinatorial and classical-information layers.

use proptest::collection::vec;
use proptest::prelude::*;

use cclab::greater_than::{gt, hash_equal, BudgetConfig};
use cclab::pointer_jumping as pjm;
use cclab::qmath::{ProbTable, Variable};
use cclab::seeds;

fn bit_pair(max_len: usize) -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1..=max_len).prop_flat_map(|l| (vec(any::<bool>(), l), vec(any::<bool>(), l)))
}

fn to_int(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |a, &b| (a << 1) | b as u64)
}

proptest! {
    #[test]
    fn gt_agrees_with_integer_order((x, y) in bit_pair(16)) {
        prop_assert_eq!(gt(&x, &y).unwrap(), (to_int(&x) >= to_int(&y)) as u8);
        prop_assert_eq!(gt(&x, &x).unwrap(), 1);
    }

    #[test]
    fn equal_slices_always_hash_equal(x in vec(any::<bool>(), 1..24), t in 1usize..6, seed: u64) {
        let (eq, a_bits, b_bits) = hash_equal(&x, &x, t, &mut seeds::rng(seed)).unwrap();
        prop_assert!(eq);
        prop_assert_eq!((a_bits, b_bits), (t, 1));
    }

    #[test]
    fn budget_rule_respects_bobs_budget(n in 2usize..2048, b in 2usize..16) {
        if let Ok(cfg) = BudgetConfig::derive(n, b, 1.0 / 3.0) {
            prop_assert!(cfg.s >= 1);
            prop_assert!(cfg.t >= 1);
            // Bob: one verdict per walk step plus the initial equality check.
            prop_assert!(1 + cfg.s <= b);
            // the interval partition covers the whole string
            prop_assert!(cfg.blocks() * cfg.block_len() >= n);
            prop_assert_eq!(cfg.block_len(), n.div_ceil(cfg.blocks()));
        }
    }

    #[test]
    fn target_string_is_always_consistent(
        k in 2usize..=3,
        n in 1usize..=3,
        xv_seed: u64,
        j_pick: u8,
    ) {
        let params = pjm::PJParams::new(k, n).unwrap();
        let mut rng = seeds::rng(xv_seed);
        let inst = pjm::sample_fooling_rng(params, &mut rng);
        let zhat = pjm::target_string(&inst.x, &inst.y);
        prop_assert_eq!(zhat.len(), n);
        let j = (j_pick as usize) % n;
        prop_assert!(pjm::is_consistent(&zhat, &inst.x, &inst.y, j).unwrap());
        // exactly one consistent child per depth-j node
        let set = pjm::consistent_children(&inst.x, &inst.y, j);
        let expected = k.pow(j as u32) * (k.pow((n - j) as u32) - 1) / (k - 1);
        prop_assert_eq!(set.size(), expected);
    }

    #[test]
    fn classical_measures_are_well_behaved(raw in vec(0.0f64..1.0, 8), extra in 0.01f64..1.0) {
        let total: f64 = raw.iter().sum::<f64>() + extra;
        let vars = vec![Variable::new("a", 2), Variable::new("b", 2), Variable::new("c", 2)];
        let mut w = raw.clone();
        w[0] += extra; // guarantees a strictly positive total
        let p = ProbTable::from_fn(vars, |asg| {
            w[asg[0] * 4 + asg[1] * 2 + asg[2]] / total
        }).unwrap();
        let h_a = p.entropy(&["a"]).unwrap();
        let h_b = p.entropy(&["b"]).unwrap();
        let h_ab = p.entropy(&["a", "b"]).unwrap();
        prop_assert!(h_ab <= h_a + h_b + 1e-10);
        prop_assert!(h_ab + 1e-10 >= h_a.max(h_b));
        prop_assert!(p.mutual_information(&["a"], &["b"]).unwrap() >= -1e-10);
        prop_assert!(p.conditional_mutual_information(&["a"], &["b"], &["c"]).unwrap() >= -1e-10);
        // chain rule: I(A;BC) = I(A;B) + I(A;C|B)
        let lhs = p.mutual_information(&["a"], &["b", "c"]).unwrap();
        let rhs = p.mutual_information(&["a"], &["b"]).unwrap()
            + p.conditional_mutual_information(&["a"], &["c"], &["b"]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}
