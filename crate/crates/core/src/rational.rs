//! Exact rationals used for densities, exponents and the `ε` bounds.

use num_rational::Ratio;

pub type Rational = Ratio<i128>;

/// `"p/q"` rendering, always with an explicit denominator.
pub fn to_fraction_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings_keep_denominator() {
        assert_eq!(to_fraction_string(&Rational::from_integer(3)), "3/1");
        assert_eq!(to_fraction_string(&Rational::new(30, 14)), "15/7");
        assert_eq!(to_f64(&Rational::new(1, 4)), 0.25);
    }
}
