use super::params::ApdParams;
use crate::error::{Error, Result};
use crate::objectives::ObjectiveSuite;
use crate::scalar::Scalar;
use nalgebra::DVector;

/// Iterate `k` of the centralized recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct AgmIterate<T: Scalar> {
    pub x: DVector<T>,
    pub y: DVector<T>,
    pub z: DVector<T>,
}

/// Simplified accelerated gradient method on the average objective:
/// `y⁺ = x − η∇f(x)`, `z⁺ = z − α_kη∇f(x)`, `x⁺ = (1 − τ_{k+1})y⁺ + τ_{k+1}z⁺`,
/// started from `x = y = z = x0`. Returns iterates `0..=iterations`.
pub fn centralized_agm_run<T: Scalar>(
    x0: DVector<T>,
    suite: &ObjectiveSuite<T>,
    params: &ApdParams<T>,
    iterations: usize,
) -> Result<Vec<AgmIterate<T>>> {
    params.validate()?;
    if x0.len() != suite.dim() {
        return Err(Error::InvalidArgument(format!("x0 has length {}, expected {}", x0.len(), suite.dim())));
    }
    let mut out = Vec::with_capacity(iterations + 1);
    let mut cur = AgmIterate { x: x0.clone(), y: x0.clone(), z: x0 };
    out.push(cur.clone());
    for k in 0..iterations {
        let eg = suite.average_gradient(&cur.x) * params.eta;
        let y = &cur.x - &eg;
        let z = &cur.z - &eg * params.alpha(k);
        let tau = params.tau(k + 1);
        let x = &y * (T::one() - tau) + &z * tau;
        if [&x, &y, &z].iter().any(|a| a.iter().any(|c| !c.is_finite_value())) {
            return Err(Error::Divergence { iteration: k + 1, quantity: "x" });
        }
        cur = AgmIterate { x, y, z };
        out.push(cur.clone());
    }
    Ok(out)
}
