use crate::error::{invalid, Result};

/// A bivariate distribution function on the extended plane.
pub trait JointCdf: Send + Sync {
    fn cdf(&self, x1: f64, x2: f64) -> f64;
}

impl<F> JointCdf for F
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn cdf(&self, x1: f64, x2: f64) -> f64 {
        self(x1, x2)
    }
}

/// Probability of the rectangle `(a1, b1] x (a2, b2]` by inclusion-exclusion.
///
/// Rounding noise down to `-1e-12` is clamped to zero; anything more negative
/// is returned as is, since it means `law` is not 2-increasing.
pub fn rectangle_mass<J: JointCdf + ?Sized>(
    law: &J,
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
) -> Result<f64> {
    if [a1, b1, a2, b2].iter().any(|v| v.is_nan()) {
        return Err(invalid("rectangle corner is NaN"));
    }
    if a1 > b1 || a2 > b2 {
        return Err(invalid(format!("reversed rectangle ({a1},{b1}]x({a2},{b2}]")));
    }
    if a1 == b1 || a2 == b2 {
        return Ok(0.0);
    }
    let m = law.cdf(b1, b2) - law.cdf(a1, b2) - law.cdf(b1, a2) + law.cdf(a1, a2);
    if m < -crate::PROB_SLACK {
        Ok(m)
    } else {
        Ok(m.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comonotone_square() {
        let m = |x1: f64, x2: f64| x1.min(x2).clamp(0.0, 1.0);
        assert!((rectangle_mass(&m, 0.0, 0.5, 0.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rectangle_mass(&m, 0.3, 0.3, 0.0, 1.0).unwrap(), 0.0);
        assert!(rectangle_mass(&m, 0.5, 0.3, 0.0, 1.0).is_err());
    }
}
