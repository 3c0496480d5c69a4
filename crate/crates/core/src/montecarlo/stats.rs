//! Binomial confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `reps`, clamped to `[0, 1]`.
pub fn wilson(successes: u32, reps: u32) -> (f64, f64) {
    wilson_z(successes, reps, Z95)
}

pub fn wilson_z(successes: u32, reps: u32, z: f64) -> (f64, f64) {
    assert!(
        reps > 0 && successes <= reps,
        "need 0 <= successes <= reps, reps > 0"
    );
    let n = f64::from(reps);
    let p = f64::from(successes) / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == reps {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}
