use std::f64::consts::PI;

/// Maps an angle into (-pi, pi].
pub fn wrap_phase(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Removes 2 pi jumps so every successive difference lies in [-pi, pi].
///
/// The first element is kept as is. A difference of exactly +pi is left
/// alone, which makes the operation idempotent.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let Some(&first) = phases.first() else {
        return out;
    };
    out.push(first);
    let mut offset = 0.0;
    for w in phases.windows(2) {
        let d = w[1] - w[0];
        let turns = ((wrap_phase(d) - d) / (2.0 * PI)).round();
        offset += turns * 2.0 * PI;
        out.push(w[1] + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_crossing() {
        let u = unwrap_phase(&[0.0, PI - 0.1, -PI + 0.1]);
        assert_eq!(u[0], 0.0);
        assert!((u[1] - (PI - 0.1)).abs() < 1e-15);
        assert!((u[2] - (PI + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn smooth_series_unchanged() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(unwrap_phase(&x), x);
    }

    #[test]
    fn empty_and_single() {
        assert!(unwrap_phase(&[]).is_empty());
        assert_eq!(unwrap_phase(&[2.5]), vec![2.5]);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn recovers_linear_ramp() {
        let ramp: Vec<f64> = (0..500).map(|i| 0.3 * i as f64).collect();
        let wrapped: Vec<f64> = ramp.iter().map(|&v| wrap_phase(v)).collect();
        let u = unwrap_phase(&wrapped);
        for (a, b) in u.iter().zip(&ramp) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn differences_bounded_and_idempotent(v in prop::collection::vec(-50.0f64..50.0, 1..200)) {
            let u = unwrap_phase(&v);
            prop_assert_eq!(u[0], v[0]);
            for w in u.windows(2) {
                prop_assert!((w[1] - w[0]).abs() <= PI + 1e-9);
            }
            let uu = unwrap_phase(&u);
            for (a, b) in uu.iter().zip(&u) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn wrap_consistent(v in prop::collection::vec(-50.0f64..50.0, 1..200)) {
            let u = unwrap_phase(&v);
            for (a, b) in u.iter().zip(&v) {
                let d = wrap_phase(wrap_phase(*a) - wrap_phase(*b));
                prop_assert!(d.abs() < 1e-9);
            }
        }
    }
}
