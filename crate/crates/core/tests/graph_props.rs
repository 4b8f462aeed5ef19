mod common;

use common::{random_cutset, random_stable, rng, CutsetShape};
use netdetect::graph::{distance, verify_cutset, CutsetCondition};
use proptest::prelude::*;
use rand::Rng;

fn shape(seed: u64) -> CutsetShape {
    let mut r = rng(seed ^ 0x5eed);
    let ns = r.random_range(1..=3);
    CutsetShape {
        ns,
        nc: r.random_range(1..=3),
        np: r.random_range(1..=3),
        r: r.random_range(1..=ns),
        nonneg: r.random_bool(0.5),
        rho: None,
        feedback: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permuted_adjacency_has_exact_zero_blocks(seed in any::<u64>()) {
        let sh = shape(seed);
        let inst = random_cutset(&mut rng(seed), &sh);
        let g = &inst.partition.permuted;
        let p0 = sh.ns + sh.nc;
        for i in 0..sh.ns {
            for j in p0..g.ncols() {
                prop_assert_eq!(g[(i, j)], 0.0);
                prop_assert_eq!(g[(j, i)], 0.0);
            }
        }
        let b = &inst.partition.blocks;
        prop_assert_eq!(b.pp.shape(), (sh.np, sh.np));
        prop_assert_eq!(b.pc.shape(), (sh.np, sh.nc));
        prop_assert_eq!(b.cp.shape(), (sh.nc, sh.np));
    }

    #[test]
    fn enlarging_the_separator_keeps_separation(seed in any::<u64>(), take in 0usize..3) {
        let sh = shape(seed);
        let inst = random_cutset(&mut rng(seed), &sh);
        let part = &inst.partition;
        let moved = take.min(part.partitioned.len() - 1);
        let mut cut = part.cutset.clone();
        cut.extend_from_slice(&part.partitioned[..moved]);
        let rest = &part.partitioned[moved..];
        match verify_cutset(&inst.model, &part.source, &cut, rest, 1) {
            Ok(_) => {}
            Err(e) => prop_assert!(!e.violates(CutsetCondition::Separation), "{e}"),
        }
    }

    #[test]
    fn distance_is_symmetric_under_reversal(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let model = random_stable(&mut r, n, 1, 0.25, false, 0.5);
        let a: Vec<usize> = (0..n).filter(|_| r.random_bool(0.3)).collect();
        let b: Vec<usize> = (0..n).filter(|_| r.random_bool(0.3)).collect();
        prop_assume!(!a.is_empty() && !b.is_empty());
        let forward = distance(&model, &a, &b).unwrap();
        let backward = distance(&model.reversed(), &b, &a).unwrap();
        prop_assert_eq!(forward, backward);
    }
}
