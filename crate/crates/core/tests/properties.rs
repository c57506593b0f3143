use conigap::coulomb::{log_weight, EnsembleConfig};
use conigap::elliptic::{lambda_pair, lambda_z, phi_log_slope, phi_of_log};
use conigap::ratseries::{rat, Series};
use proptest::prelude::*;

fn series(offset: i64, len: usize) -> impl Strategy<Value = Series> {
    prop::collection::vec((-20i64..20, 1i64..6), len).prop_map(move |cs| {
        Series::new("y", offset, cs.into_iter().map(|(n, d)| rat(n, d)).collect())
    })
}

fn same(a: &Series, b: &Series) -> bool {
    a.sub(b).map(|d| d.is_zero()).unwrap_or(false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in series(-1, 7), b in series(0, 6), c in series(1, 5)) {
        prop_assert!(same(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
        prop_assert!(same(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(same(&lhs, &rhs));
        prop_assert_eq!(lhs.order(), rhs.order());
    }

    #[test]
    fn inverse_is_inverse(a in series(0, 8)) {
        prop_assume!(!a.coeffs()[0].eq(&rat(0, 1)));
        let p = a.mul(&a.inv().unwrap()).unwrap();
        prop_assert!(same(&p, &Series::one("y", p.order())));
    }

    #[test]
    fn revert_round_trip(tail in series(2, 6), lead in 1i64..4) {
        let s = Series::monomial("y", 1, rat(lead, 1), 8).add(&tail).unwrap();
        let r = s.revert("y").unwrap();
        let back = s.compose(&r).unwrap();
        prop_assert!(same(&back, &Series::var("y", back.order())));
    }

    #[test]
    fn truncation_is_monotone(a in series(0, 9), k in 1i64..9, j in 1i64..9) {
        let (lo, hi) = (k.min(j), k.max(j));
        prop_assert!(same(&a.truncate(hi).truncate(lo), &a.truncate(lo)));
        prop_assert!(a.truncate(lo).order() <= a.truncate(hi).order());
        for n in 0..lo {
            prop_assert_eq!(a.truncate(lo).coeff(n).unwrap(), a.coeff(n).unwrap());
        }
    }

    #[test]
    fn exp_log_round_trip(tail in series(1, 6)) {
        let e = tail.exp().unwrap();
        prop_assert!(same(&e.log().unwrap(), &tail));
    }

    #[test]
    fn phi_inversion_symmetric(s in -30.0f64..30.0) {
        prop_assert!((phi_of_log(s) - phi_of_log(-s)).abs() < 1e-14);
        prop_assert!((phi_log_slope(s) + phi_log_slope(-s)).abs() < 1e-15);
        prop_assert!(phi_of_log(s) >= 0.0);
    }

    #[test]
    fn lambda_shift_identity(a in -5.0f64..5.0, z in 0.01f64..6.0, c in -3.0f64..3.0) {
        // log|x - y| + Lambda(x, y) depends on log x - log y alone
        let (x, y) = ((a + z).exp(), a.exp());
        let lhs = (x - y).abs().ln() + lambda_pair(x, y);
        prop_assert!((lhs - lambda_z(z)).abs() < 1e-10);
        let (xs, ys) = (x * c.exp(), y * c.exp());
        prop_assert!(((xs - ys).abs().ln() + lambda_pair(xs, ys) - lhs).abs() < 1e-10);
        prop_assert!((lambda_pair(x, y) - lambda_pair(y, x)).abs() < 1e-14);
    }

    #[test]
    fn log_weight_permutation_invariant(mut xs in prop::collection::vec(0.3f64..3.0, 6), k in 0usize..6) {
        let cfg = EnsembleConfig { n: 6, ..EnsembleConfig::default() };
        let w = log_weight(&xs, &cfg).unwrap();
        xs.rotate_left(k);
        prop_assert!((log_weight(&xs, &cfg).unwrap() - w).abs() < 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn log_weight_two_body_term(x in 0.3f64..3.0, gap in 0.05f64..2.0) {
        // with two eigenvalues the pair part is 2 log|x-y| + 2 Lambda(x,y) + Lambda(x,x) + Lambda(y,y)
        let y = x + gap;
        let cfg = EnsembleConfig { n: 2, ..EnsembleConfig::default() };
        let pot = -(2.0 / cfg.t) * (phi_of_log(x.ln()) + phi_of_log(y.ln()));
        let want = pot + 2.0 * gap.ln() + 2.0 * lambda_pair(x, y) + lambda_pair(x, x) + lambda_pair(y, y);
        prop_assert!((log_weight(&[x, y], &cfg).unwrap() - want).abs() < 1e-9 * want.abs().max(1.0));
    }
}

#[test]
fn phi_vanishes_at_one() {
    assert_eq!(phi_of_log(0.0), 0.0);
    assert_eq!(phi_log_slope(0.0), 0.0);
}

#[test]
fn log_weight_rejects_nonpositive() {
    let cfg = EnsembleConfig { n: 2, ..EnsembleConfig::default() };
    assert!(log_weight(&[0.5, -0.1], &cfg).is_err());
    assert!(log_weight(&[0.5, 0.5], &cfg).is_err());
}
