//! Fixed-step explicit integrators.

/// One classical fourth-order Runge-Kutta step for `y' = f(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(y, dt, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Number of steps of size `dt` covering `duration`; errors unless the
/// duration is an integer multiple of `dt` to 1e-9 relative.
pub fn step_count(duration: f64, dt: f64) -> crate::Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(crate::Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let n = (duration / dt).round();
    if n < 1.0 || ((n * dt - duration).abs() > 1e-9 * duration) {
        return Err(crate::Error::invalid(format!(
            "duration {duration} is not a multiple of dt {dt}"
        )));
    }
    Ok(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order() {
        // y' = y, y(0) = 1 on [0, 1]
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = rk4_step(&f, i as f64 * dt, &y, dt);
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn step_count_checks_multiple() {
        assert_eq!(step_count(1.0, 0.25).unwrap(), 4);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(1.0, 0.0).is_err());
    }
}
