// Float methods for no_std builds. In std builds the inherent methods win and
// this import is unused.
#[allow(unused_imports)]
pub(crate) use num_traits::Float;

pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const TAU: f64 = core::f64::consts::TAU;

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Wrap an angle into (-π, π].
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let mut y = x % TAU;
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(7.0 / 6.0) - 0.927_719_333_630_039_2).abs() < 1e-14);
        assert!((ln_gamma(101.0) - 363.739_375_555_563_5).abs() < 1e-9);
    }

    #[test]
    fn wrap_is_periodic() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
