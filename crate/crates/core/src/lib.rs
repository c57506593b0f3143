//! Exact direct integration of the holomorphic anomaly equations for local P^2
//! with conifold-gap fixing, plus numeric cross-checks: topological recursion
//! on the elliptic spectral curve and a Coulomb-gas Monte Carlo sampler.

pub mod coulomb;
pub mod cseries;
pub mod elliptic;
pub mod hae;
pub mod mirror;
pub mod qmpoly;
pub mod ratseries;
pub mod tr;
pub mod verify;

/// A float as a JSON number written with 17 significant digits; non-finite values become null.
pub fn json_f17(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).unwrap_or(serde_json::Value::Null)
}
