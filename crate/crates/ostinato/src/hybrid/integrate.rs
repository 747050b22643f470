//! Fixed-step classical Runge-Kutta integration.

use super::automaton::VectorField;
use super::simulate::SimError;

/// One classical RK4 step of `x' = f(x, u)` under constant input `u`.
///
/// The update is computed as `x + h * ((k1 + 2 k2 + 2 k3 + k4) / 6)` per
/// coordinate; for a coordinate with constant derivative `v` the bracket is
/// exactly `v` in floating point (the stage sum is `6 v` for `v` in `{0, 1}`),
/// so clocks advance by exactly `h` and frozen coordinates do not drift.
pub fn rk4_step(f: &VectorField, x: &[f64], u: &[f64], h: f64) -> Result<Vec<f64>, SimError> {
    debug_assert!(h > 0.0);
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    f(x, u, &mut k1);
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k1[i];
    }
    f(&stage, u, &mut k2);
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k2[i];
    }
    f(&stage, u, &mut k3);
    for i in 0..n {
        stage[i] = x[i] + h * k3[i];
    }
    f(&stage, u, &mut k4);

    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = x[i] + h * ((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
        if !out[i].is_finite() {
            return Err(SimError::IntegrationDiverged { coord: i });
        }
    }
    Ok(out)
}
