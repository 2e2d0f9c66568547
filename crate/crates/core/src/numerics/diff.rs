use crate::error::{Error, Result};
use crate::C64;

/// Second-order central difference along the real direction of the argument.
///
/// `order` selects the first (`1`) or second (`2`) derivative.
pub fn central_diff<F>(f: F, x: C64, h: f64, order: u8) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    match order {
        1 => Ok((f(x + h)? - f(x - h)?) / (2.0 * h)),
        2 => Ok((f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h)),
        _ => Err(Error::invalid(format!("unsupported derivative order {order}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_zero_derivatives() {
        let f = |_: C64| Ok(C64::new(3.0, -1.0));
        assert_eq!(central_diff(f, C64::new(0.2, 0.0), 0.1, 1).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(central_diff(f, C64::new(0.2, 0.0), 0.1, 2).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn exact_on_quadratics() {
        let f = |x: C64| Ok(x * x);
        for h in [0.5, 0.125, 1e-3] {
            let d = central_diff(f, C64::new(3.0, 0.0), h, 1).unwrap();
            assert!((d - 6.0).norm() < 1e-9);
        }
    }

    #[test]
    fn second_derivative_of_sine_at_zero() {
        let d = central_diff(|x: C64| Ok(x.sin()), C64::new(0.0, 0.0), 1e-3, 2).unwrap();
        assert!(d.norm() < 1e-6);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(central_diff(|x: C64| Ok(x), C64::new(0.0, 0.0), 0.1, 3).is_err());
    }
}
