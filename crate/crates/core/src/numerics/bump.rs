//! Smooth cutoffs built from `exp(-1/t)`.

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth, nonincreasing step: 1 for t ≤ 0, 0 for t ≥ 1, flat to all orders at both ends.
pub fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = psi(1.0 - t);
    a / (a + psi(t))
}

/// Compactly supported bump on (-1, 1), equal to exp(1 - 1/(1 - u²)) inside (peak 1 at u = 0).
pub fn bump(u: f64) -> f64 {
    let q = 1.0 - u * u;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

/// Plateau cutoff on an interval: 1 on [lo, hi], 0 outside [lo - w, hi + w].
pub fn plateau(x: f64, lo: f64, hi: f64, w: f64) -> f64 {
    if x < lo {
        smooth_step_down((lo - x) / w)
    } else if x > hi {
        smooth_step_down((x - hi) / w)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits_and_monotonicity() {
        assert_eq!(smooth_step_down(-0.3), 1.0);
        assert_eq!(smooth_step_down(1.2), 0.0);
        assert!((smooth_step_down(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = smooth_step_down(i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn plateau_is_one_inside() {
        assert_eq!(plateau(0.3, -1.0, 1.0, 0.5), 1.0);
        assert_eq!(plateau(1.6, -1.0, 1.0, 0.5), 0.0);
        assert!(plateau(1.2, -1.0, 1.0, 0.5) > 0.0);
    }
}
