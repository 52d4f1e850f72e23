//! Continued-fraction rational approximation.

/// Best rational approximation `p/q` of `x` with `q <= max_den`, taken from the
/// continued-fraction convergents.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    let mut rem = x;
    let mut best = (x.round() as i64, 1u64);
    for _ in 0..64 {
        let a = rem.floor();
        let ai = a as i64;
        let p2 = ai.saturating_mul(p1).saturating_add(p0);
        let q2 = (ai as u64).saturating_mul(q1).saturating_add(q0);
        if q2 > max_den || q2 == 0 {
            break;
        }
        best = (p2, q2);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rem - a;
        if frac.abs() < 1e-300 || (x - p2 as f64 / q2 as f64).abs() == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    best
}

/// `Some((p, q))` when `x` equals a fraction with denominator at most `max_den`
/// to within `tol`, otherwise `None`.
pub fn as_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    let (p, q) = best_rational(x, max_den);
    ((x - p as f64 / q as f64).abs() <= tol).then_some((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recognises_simple_fractions() {
        assert_eq!(as_rational(0.25, 1_000_000, 1e-14), Some((1, 4)));
        assert_eq!(as_rational(0.1, 1_000_000, 1e-14), Some((1, 10)));
        assert_eq!(as_rational(-0.75, 1_000_000, 1e-14), Some((-3, 4)));
        assert_eq!(as_rational(2.0 / 7.0, 1_000_000, 1e-14), Some((2, 7)));
    }

    #[test]
    fn golden_mean_is_not_rational_at_bound() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(as_rational(golden, 1_000_000, 1e-14), None);
        let (p, q) = best_rational(golden, 1_000);
        assert_eq!((p, q), (610, 987));
    }
}
