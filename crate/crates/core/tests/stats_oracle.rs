use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use warpwatch_core::stats::{chi_square_sf, kruskal_wallis, rank_with_ties};

// scipy.special.erfc(sqrt(1.2)), evaluated independently
const P_H_2_4_DOF_1: f64 = 0.121_335_250_358_482_2;

#[test]
fn two_group_example_h_and_p() {
    let kw = kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert!((kw.h - 2.4).abs() < 1e-9);
    assert!((kw.p - P_H_2_4_DOF_1).abs() < 1e-10);
    assert!((chi_square_sf(2.4, 1) - erfc((1.2f64).sqrt())).abs() < 1e-10);
}

#[test]
fn chi_square_matches_reference_grid() {
    for dof in 1..=10usize {
        let dist = ChiSquared::new(dof as f64).unwrap();
        let mut x = 0.0;
        while x <= 200.0 {
            let ours = chi_square_sf(x, dof);
            let reference = if x == 0.0 { 1.0 } else { dist.sf(x) };
            assert!(
                (ours - reference).abs() <= 1e-10,
                "dof={dof} x={x}: {ours} vs {reference}"
            );
            x += 0.37;
        }
    }
}

#[test]
fn chi_square_even_dof_closed_form() {
    // Q(k, x/2) = e^{-x/2} sum_{i<k} (x/2)^i / i!
    for dof in [2usize, 4, 6, 8, 10] {
        for x in [0.1, 1.0, 2.0, 7.5, 30.0, 120.0, 199.0] {
            let half = x / 2.0;
            let mut term = 1.0;
            let mut sum = 0.0;
            for i in 0..dof / 2 {
                if i > 0 {
                    term *= half / i as f64;
                }
                sum += term;
            }
            let exact = (-half).exp() * sum;
            assert!((chi_square_sf(x, dof) - exact).abs() <= 1e-10, "dof={dof} x={x}");
        }
    }
}

#[test]
fn p_is_nonincreasing_in_h() {
    for dof in 1..=6 {
        let mut prev = 1.0;
        for k in 0..2000 {
            let p = chi_square_sf(k as f64 * 0.1, dof);
            assert!(p <= prev + 1e-15, "dof={dof} h={}", k as f64 * 0.1);
            prev = p;
        }
    }
}

fn groups() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0i32..20).prop_map(f64::from), 1..8), 2..5)
        .prop_filter("need 3 observations", |g| g.iter().map(Vec::len).sum::<usize>() >= 3)
}

proptest! {
    #[test]
    fn ranks_sum_to_triangular_number(v in prop::collection::vec(-5i32..5, 1..40)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let n = v.len() as f64;
        prop_assert_eq!(rank_with_ties(&v).iter().sum::<f64>(), n * (n + 1.0) / 2.0);
    }

    #[test]
    fn kw_invariant_to_shift_and_permutation(g in groups(), shift in -100.0f64..100.0, seed in any::<u64>()) {
        let base = kruskal_wallis(&g).unwrap();
        prop_assert!(base.h >= 0.0 && (0.0..=1.0).contains(&base.p));

        let shifted: Vec<Vec<f64>> = g.iter().map(|grp| grp.iter().map(|v| v + shift).collect()).collect();
        let s = kruskal_wallis(&shifted).unwrap();
        prop_assert!((s.h - base.h).abs() < 1e-9);

        let permuted: Vec<Vec<f64>> = g
            .iter()
            .map(|grp| {
                let mut grp = grp.clone();
                let k = (seed as usize) % grp.len();
                grp.rotate_left(k);
                grp.reverse();
                grp
            })
            .collect();
        let p = kruskal_wallis(&permuted).unwrap();
        prop_assert!((p.h - base.h).abs() < 1e-9);
    }
}
