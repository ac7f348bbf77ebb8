use hilb_core::egl_cobordism::{
    ch_chern_convert, symbolic_chern_number, ChernOptions, ChernPolynomial, Direction, SymbolicClass, Truncation, Var,
};
use hilb_core::fock::block_dims;
use hilb_core::frobenius::synthetic;
use hilb_core::goettsche::{euler_series, poincare_series};
use hilb_core::heisenberg::Budget;
use hilb_core::rational::q;
use proptest::prelude::*;

/// A class of degree `2k` built from `c_k` of the Hilbert factor and `l^k`.
fn class(k: usize, a: i64, b: i64, d: i64) -> SymbolicClass {
    let t = Truncation::new(40);
    let mut out = SymbolicClass::var(Var::Hilb(k as u8)).scaled(&q(a, d));
    out.add_scaled(&SymbolicClass::var(Var::L).pow(k as u32, &t), &q(b, d));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chern_character_round_trip(coeffs in prop::collection::vec((-5i64..6, -5i64..6, 1i64..4), 4), rank in -3i64..5) {
        let t = Truncation::new(40);
        let mut c = vec![SymbolicClass::one()];
        c.extend(coeffs.iter().enumerate().map(|(i, (a, b, d))| class(i + 1, *a, *b, *d)));
        let ch = ch_chern_convert(&Direction::ChernToCh { rank: q(rank, 1) }, 4, &c, &t);
        prop_assert_eq!(ch[0].clone(), SymbolicClass::constant(q(rank, 1)));
        let back = ch_chern_convert(&Direction::ChToChern, 4, &ch, &t);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn betti_numbers_are_symmetric_and_specialise_to_euler(b1 in 0i64..4, b2 in 0i64..12, n in 0usize..5) {
        let s = poincare_series([1, b1, b2, b1, 1], n).unwrap();
        for k in 0..=n {
            let row = s.row(k);
            prop_assert_eq!(row.len(), 4 * k + 1);
            for d in 0..row.len() {
                prop_assert_eq!(row[d], row[row.len() - 1 - d]);
                prop_assert!(row[d] >= 0);
            }
        }
        prop_assert_eq!(s.at_minus_one(), euler_series(2 - 2 * b1 + b2, n).unwrap());
    }

    #[test]
    fn fock_blocks_match_betti_numbers(b2 in 0usize..7, n in 0usize..4) {
        let model = synthetic(b2, &vec![0; b2], 0).unwrap();
        let s = poincare_series(model.betti(), n).unwrap();
        for k in 0..=n {
            let dims: Vec<i128> = block_dims(&model, k).into_iter().map(|d| d as i128).collect();
            prop_assert_eq!(dims.as_slice(), s.row(k));
        }
    }
}

fn degree_eight_polynomials() -> impl Strategy<Value = String> {
    let monomials = ["c4", "c1^4", "c2^2", "c1^2*c2", "c1*c3"];
    prop::collection::vec((-3i64..4, 0usize..monomials.len()), 1..4).prop_map(move |terms| {
        terms
            .iter()
            .map(|(c, m)| format!("{c}*{}", monomials[*m]))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The reduction result does not depend on the order in which factors are rewritten.
    #[test]
    fn reduction_is_confluent(p in degree_eight_polynomials(), seed in any::<u64>()) {
        let p: ChernPolynomial = p.parse().unwrap();
        let budget = Budget::unlimited();
        let canonical = symbolic_chern_number(2, &p, &ChernOptions::default(), &budget).unwrap();
        let shuffled = symbolic_chern_number(2, &p, &ChernOptions { order_seed: Some(seed), ..Default::default() }, &budget).unwrap();
        prop_assert_eq!(canonical, shuffled);
    }
}

#[test]
fn confluence_at_three_points() {
    let p: ChernPolynomial = "c6 + c1^2*c4 - c2*c4".parse().unwrap();
    let budget = Budget::unlimited();
    let canonical = symbolic_chern_number(3, &p, &ChernOptions::default(), &budget).unwrap();
    for seed in [1, 7, 0xdead_beef] {
        let opts = ChernOptions {
            order_seed: Some(seed),
            ..Default::default()
        };
        assert_eq!(symbolic_chern_number(3, &p, &opts, &budget).unwrap(), canonical);
    }
}
