use conigap::cseries;
use conigap::elliptic::EllipticFrame;
use conigap::hae::HaeSolver;
use conigap::tr::{self, Recursion, SpectralCurve, DEFAULT_ORDER};
use num_complex::Complex64 as C;

fn curve(q: f64) -> SpectralCurve {
    SpectralCurve::conifold(&EllipticFrame::solve(q).unwrap(), DEFAULT_ORDER).unwrap()
}

fn rec(q: f64, g: u32) -> Recursion {
    let mut r = Recursion::new(curve(q));
    r.compute_through(g).unwrap();
    r
}

#[test]
fn denominator_flips_sign_under_deck() {
    let cv = curve(1e-2);
    let deck = cv.deck_involution().unwrap();
    for (a, s) in deck.deck_series.iter().enumerate() {
        let ds = cseries::der(s);
        for hh in [C::new(0.004, 0.001), C::new(-0.002, 0.003)] {
            // as a density: den(sigma h) sigma'(h) = -den(h)
            let back = cv.kernel_denominator(a, cseries::eval(s, hh)) * cseries::eval(&ds, hh);
            let ratio = back / cv.kernel_denominator(a, hh);
            assert!((ratio + 1.0).norm() < 1e-10, "{ratio}");
        }
    }
}

#[test]
fn kernel_scales_inversely_with_omega01() {
    let cv = curve(1e-2);
    let cv2 = cv.scaled(2.0);
    let u0 = C::new(0.31, 0.04);
    let hh = C::new(0.003, 0.002);
    for a in 0..cv.locals.len() {
        let r = cv2.recursion_kernel(u0, a, hh).unwrap() / cv.recursion_kernel(u0, a, hh).unwrap();
        assert!((r - 0.5).norm() < 1e-12, "{r}");
    }
}

#[test]
fn denominator_has_double_zero() {
    let cv = curve(1e-2);
    let lim = |h: f64| {
        let hh = C::new(h, 0.3 * h);
        cv.kernel_denominator(0, hh) / (hh * hh)
    };
    let (a, b) = (lim(1e-3), lim(1e-4));
    assert!(b.norm() > 1.0);
    assert!((a - b).norm() < 1e-2 * b.norm(), "{a} {b}");
}

#[test]
fn kernel_refuses_the_ramification_point() {
    let cv = curve(1e-2);
    assert!(cv.recursion_kernel(C::new(0.3, 0.0), 0, C::new(1e-9, 0.0)).is_err());
}

#[test]
fn omega03_table_matches_pointwise_quadrature() {
    let mut r = rec(1e-2, 1);
    r.compute(0, 3).unwrap();
    let p = [C::new(0.11, 0.02), C::new(0.27, -0.05), C::new(0.4, 0.01)];
    let table = r.omega(0, &p).unwrap();
    let quad = r.omega03_checked(p).unwrap();
    assert!((table - quad).norm() < 1e-9 * table.norm(), "{table} {quad}");
    let perm = r.omega(0, &[p[1], p[2], p[0]]).unwrap();
    assert!((table - perm).norm() < 1e-9 * table.norm());
}

#[test]
fn bergmann_symmetric_with_vanishing_a_period() {
    let cv = curve(1e-2);
    let (u1, u2) = (C::new(0.13, 0.07), C::new(0.52, -0.03));
    assert!((cv.bergmann(u1, u2) - cv.bergmann(u2, u1)).norm() < 1e-12);
    let n = 256;
    let per: C = (0..n).map(|k| cv.bergmann(C::new(k as f64 / n as f64, 0.1), u2)).sum::<C>() / n as f64;
    assert!(per.norm() < 1e-8, "{per}");
    // near the diagonal B ~ 1/h^2
    let h = C::new(1e-4, 0.0);
    assert!((cv.bergmann(u1 + h, u1) * h * h - 1.0).norm() < 1e-6);
}

#[test]
fn omega11_has_vanishing_a_period() {
    let r = rec(1e-2, 1);
    for im in [0.05, 0.2] {
        let p = r.a_period(1, im, 256).unwrap();
        assert!(p.norm() < 1e-8, "{p}");
    }
}

#[test]
fn free_energy_independent_of_anchor_and_real() {
    let r = rec(1e-2, 2);
    let a = r.free_energy(2).unwrap();
    let b = r.free_energy_anchored(2, C::new(0.3, 0.1)).unwrap();
    assert!((a - b).norm() < 1e-9);
    assert!(a.im.abs() < 1e-8);
}

#[test]
fn correlators_are_cache_stable() {
    let p = [C::new(0.21, 0.03)];
    let mut r = rec(1e-2, 2);
    let first = r.omega(2, &p).unwrap();
    r.compute_through(2).unwrap();
    assert_eq!(first, r.omega(2, &p).unwrap());
    assert_eq!(first, rec(1e-2, 2).omega(2, &p).unwrap());
}

// The recursion on the mirror curve itself reproduces the conifold-frame
// genus-2 potential up to a constant.
#[test]
fn mirror_curve_genus_two_matches_anomaly_solution() {
    let mut solver = HaeSolver::with_order(2, 40).unwrap();
    let gw = solver.gw_cf(2).unwrap();
    for q in [1e-3, 1e-2, 3e-2] {
        let t = EllipticFrame::solve(q).unwrap().t;
        let f2 = tr::mirror_free_energies(q, 2, DEFAULT_ORDER).unwrap()[0];
        let want = -gw.eval_f64(9.0 * t) - 1.0 / 1920.0;
        assert!((f2.re - want).abs() < 1e-10 * want.abs().max(1.0), "q={q}: {} vs {want}", f2.re);
    }
}
