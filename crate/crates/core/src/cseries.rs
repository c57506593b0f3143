//! Fixed-length complex power series (Taylor data at a point).
//! All functions truncate to the length of their first argument.

use num_complex::Complex64 as C;

pub fn zeros(n: usize) -> Vec<C> {
    vec![C::new(0.0, 0.0); n]
}

pub fn mul(a: &[C], b: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    for (i, x) in a.iter().enumerate() {
        if *x == C::new(0.0, 0.0) {
            continue;
        }
        for (j, y) in b.iter().take(n - i).enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

pub fn inv(a: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    r[0] = 1.0 / a[0];
    for k in 1..n {
        let mut s = C::new(0.0, 0.0);
        for j in 1..=k {
            s += a[j] * r[k - j];
        }
        r[k] = -s * r[0];
    }
    r
}

pub fn der(a: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    for i in 1..n {
        r[i - 1] = a[i] * i as f64;
    }
    r
}

/// Antiderivative with zero constant term.
pub fn integ(a: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    for i in 1..n {
        r[i] = a[i - 1] / i as f64;
    }
    r
}

/// Principal log of a0 plus the integral of a'/a.
pub fn log(a: &[C]) -> Vec<C> {
    let mut r = integ(&mul(&der(a), &inv(a)));
    r[0] = a[0].ln();
    r
}

pub fn exp(a: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    r[0] = a[0].exp();
    let da = der(a);
    for k in 1..n {
        let mut s = C::new(0.0, 0.0);
        for j in 0..k {
            s += da[j] * r[k - 1 - j];
        }
        r[k] = s / k as f64;
    }
    r
}

/// a(b(x)) with b(0) = 0, by Horner.
pub fn compose(a: &[C], b: &[C]) -> Vec<C> {
    let n = a.len();
    let mut r = zeros(n);
    let b: Vec<C> = b.iter().copied().chain(std::iter::repeat(C::new(0.0, 0.0))).take(n).collect();
    for c in a.iter().rev() {
        r = mul(&r, &b);
        r[0] += c;
    }
    r
}

/// Compositional inverse of a = a1 x + ..., by Lagrange inversion.
pub fn revert(a: &[C]) -> Vec<C> {
    let n = a.len();
    // phi = x / a(x)
    let shifted: Vec<C> = a[1..].iter().copied().chain(std::iter::once(C::new(0.0, 0.0))).collect();
    let phi = inv(&shifted);
    let mut g = zeros(n);
    let mut p = zeros(n);
    p[0] = C::new(1.0, 0.0);
    for k in 1..n {
        p = mul(&p, &phi);
        g[k] = p[k - 1] / k as f64;
    }
    g
}

/// Sum of the truncated series at x.
pub fn eval(a: &[C], x: C) -> C {
    a.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn exp_log_and_revert() {
        let a = vec![c(1.0), c(0.5), c(-0.25), c(0.1), c(0.0), c(0.0), c(0.0)];
        let b = exp(&log(&a));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
        let s = vec![c(0.0), c(2.0), c(1.0), c(-0.3), c(0.0), c(0.0), c(0.0), c(0.0)];
        let g = revert(&s);
        let id = compose(&s, &g);
        for (k, v) in id.iter().enumerate() {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-13, "{k} {v}");
        }
    }
}
