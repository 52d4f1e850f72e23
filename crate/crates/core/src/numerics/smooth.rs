//! Smooth cutoffs built from `exp(-1/t)`.

/// Value and first two derivatives of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet1 {
    pub const ZERO: Jet1 = Jet1 {
        v: 0.0,
        d1: 0.0,
        d2: 0.0,
    };
}

fn flat(t: f64) -> Jet1 {
    if t <= 0.0 {
        return Jet1::ZERO;
    }
    let e = (-1.0 / t).exp();
    let t2 = t * t;
    Jet1 {
        v: e,
        d1: e / t2,
        d2: e * (1.0 / (t2 * t2) - 2.0 / (t2 * t)),
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in between.
pub fn transition(t: f64) -> Jet1 {
    if t <= 0.0 {
        return Jet1::ZERO;
    }
    if t >= 1.0 {
        return Jet1 {
            v: 1.0,
            d1: 0.0,
            d2: 0.0,
        };
    }
    let a = flat(t);
    let b = flat(1.0 - t);
    // b(1 - t): chain rule flips the sign of the first derivative.
    let (b1, b2) = (-b.d1, b.d2);
    let d = a.v + b.v;
    let d1 = a.d1 + b1;
    let d2 = a.d2 + b2;
    let v = a.v / d;
    let num1 = a.d1 * d - a.v * d1;
    let first = num1 / (d * d);
    let second = (a.d2 * d - a.v * d2) / (d * d) - 2.0 * d1 * num1 / (d * d * d);
    Jet1 {
        v,
        d1: first,
        d2: second,
    }
}

/// Normalised bump `exp(1 - 1/(1 - t))` on `t < 1`, zero for `t >= 1`; equals 1 at `t = 0`.
pub fn bump(t: f64) -> Jet1 {
    if t >= 1.0 {
        return Jet1::ZERO;
    }
    let u = 1.0 - t;
    let v = (1.0 - 1.0 / u).exp();
    let u2 = u * u;
    Jet1 {
        v,
        d1: -v / u2,
        d2: v * (1.0 / (u2 * u2) - 2.0 / (u2 * u)),
    }
}

/// Bump supported on `lo < s < hi`, peak value 1 at the midpoint.
pub fn window(s: f64, lo: f64, hi: f64) -> Jet1 {
    if s <= lo || s >= hi {
        return Jet1::ZERO;
    }
    let w = hi - lo;
    let q = 4.0 * (s - lo) * (hi - s) / (w * w);
    let q1 = 4.0 * (hi + lo - 2.0 * s) / (w * w);
    let q2 = -8.0 / (w * w);
    let v = (1.0 - 1.0 / q).exp();
    let qq = q * q;
    Jet1 {
        v,
        d1: v * q1 / qq,
        d2: v * (q1 * q1 / (qq * qq) + q2 / qq - 2.0 * q1 * q1 / (qq * q)),
    }
}
