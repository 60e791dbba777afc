//! A sound rational upper bound on `ln k`.
//!
//! `k = 2^m * x` with `x` in `[1, 2)`, and `ln y = 2 atanh((y - 1) / (y + 1))`
//! is summed for `y = 2` and `y = x`. Every truncated series gets its tail
//! bound `2 z^(2N+1) / ((2N+1)(1 - z^2))` added, so the result never
//! underestimates. The total overshoot is below `1e-10` for all `u32` inputs.

use crate::rational::Rational;

const TERMS: u32 = 12;
const DENOMINATOR: u64 = 1_000_000_000_000;

/// Upper bound on `ln y` for a rational `y >= 1`.
fn ln_upper(y: &Rational) -> Rational {
    let one = Rational::one();
    let z = (y - &one) / (y + &one);
    let z2 = &z * &z;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    for n in 0..TERMS {
        sum += &power / Rational::from(u64::from(2 * n + 1));
        power = &power * &z2;
    }
    let tail = &power / (Rational::from(u64::from(2 * TERMS + 1)) * (&one - &z2));
    Rational::from_integer(2) * (sum + tail)
}

/// Rational `b` with `ln k <= b <= ln k + 1e-9`, denominator dividing `10^12`.
pub fn ln_upper_bound(k: u32) -> Rational {
    assert!(k >= 1, "ln bound needs k >= 1");
    let m = 31 - k.leading_zeros();
    let x = Rational::from(u64::from(k)) / Rational::from(1u64 << m);
    let bound = Rational::from(u64::from(m)) * ln_upper(&Rational::from_integer(2)) + ln_upper(&x);
    bound.ceil_to_denominator(DENOMINATOR)
}
