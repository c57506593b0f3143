//! Independent reference values for genus 0 and 1, computed with plain
//! truncated coefficient vectors. Nothing here touches the library's series type.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type R = BigRational;

fn r(n: i64, d: i64) -> R {
    R::new(BigInt::from(n), BigInt::from(d))
}

fn fact(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn mul(a: &[R], b: &[R], m: usize) -> Vec<R> {
    let mut out = vec![R::zero(); m];
    for i in 0..m {
        for j in 0..m - i {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

fn inv(a: &[R], m: usize) -> Vec<R> {
    let mut out = vec![R::zero(); m];
    out[0] = a[0].recip();
    for n in 1..m {
        let mut s = R::zero();
        for k in 1..=n {
            s += &a[k] * &out[n - k];
        }
        out[n] = -s / &a[0];
    }
    out
}

// exp of a series with zero constant term
fn exp0(a: &[R], m: usize) -> Vec<R> {
    let mut out = vec![R::zero(); m];
    out[0] = R::one();
    for n in 1..m {
        let mut s = R::zero();
        for k in 1..=n {
            s += r(k as i64, 1) * &a[k] * &out[n - k];
        }
        out[n] = s / r(n as i64, 1);
    }
    out
}

// log of a series with unit constant term
fn log1(a: &[R], m: usize) -> Vec<R> {
    let th: Vec<R> = (0..m).map(|n| r(n as i64, 1) * &a[n]).collect();
    let q = mul(&th, &inv(a, m), m);
    let mut out = vec![R::zero(); m];
    for n in 1..m {
        out[n] = &q[n] / r(n as i64, 1);
    }
    out
}

// a(z(Q)) for z(Q) with zero constant term
fn compose(a: &[R], z: &[R], m: usize) -> Vec<R> {
    let mut out = vec![R::zero(); m];
    let mut p = vec![R::zero(); m];
    p[0] = R::one();
    for ak in a.iter().take(m) {
        for i in 0..m {
            out[i] += ak * &p[i];
        }
        p = mul(&p, z, m);
    }
    out
}

pub struct Reference {
    /// Q(y) = y exp(S(y)).
    pub q_of_y: Vec<R>,
    pub n0: Vec<R>,
    pub n1: Vec<R>,
}

/// Reference data through degree `dmax`.
pub fn reference(dmax: usize) -> Reference {
    let m = dmax + 1;
    // S(y) = sum 3 (-1)^n (3n-1)!/(n!)^3 y^n
    let mut s = vec![R::zero(); m];
    for n in 1..m {
        let sign = if n % 2 == 0 { 1 } else { -1 };
        s[n] = R::from_integer(BigInt::from(3 * sign) * fact(3 * n as u64 - 1)) / R::from_integer(fact(n as u64).pow(3));
    }
    let q_over_y = exp0(&s, m);
    let mut q_of_y = vec![R::zero(); m];
    q_of_y[1..m].clone_from_slice(&q_over_y[..m - 1]);

    // fixed point for y(Q) = Q u(Q), u = 1 / (Q/y)(y(Q))
    let mut u = vec![R::zero(); m];
    u[0] = R::one();
    let mut y = vec![R::zero(); m];
    for _ in 0..=m {
        y = std::iter::once(R::zero()).chain(u[..m - 1].iter().cloned()).collect();
        u = inv(&compose(&q_over_y, &y, m), m);
    }
    y = std::iter::once(R::zero()).chain(u[..m - 1].iter().cloned()).collect();

    let mut theta_t = s.iter().enumerate().map(|(n, c)| r(n as i64, 1) * c).collect::<Vec<_>>();
    theta_t[0] = R::one();
    let mut disc = vec![R::zero(); m];
    disc[0] = R::one();
    if m > 1 {
        disc[1] = r(27, 1);
    }

    // Yukawa coupling in the flat coordinate, 1/((1+27y)(theta t)^3)
    let t3 = mul(&theta_t, &mul(&theta_t, &theta_t, m), m);
    let yuk = compose(&mul(&inv(&disc, m), &inv(&t3, m), m), &y, m);
    let n0 = (1..m).map(|d| -&yuk[d] / r(3 * (d as i64).pow(3), 1)).collect();

    // F_1 = -1/2 log(theta t) - 1/12 log(y(1+27y)), with the log y piece traded for -S
    let lt = log1(&theta_t, m);
    let ld = log1(&disc, m);
    let f1y: Vec<R> = (0..m).map(|i| r(-1, 2) * &lt[i] - r(1, 12) * &ld[i] + r(1, 12) * &s[i]).collect();
    let f1 = compose(&f1y, &y, m);
    let n1 = f1[1..].to_vec();
    Reference { q_of_y, n0, n1 }
}
