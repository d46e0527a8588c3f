use crate::error::{Error, Result};

/// Max over parameters of `|analytic − fd| / max(1, |fd|)`, where `fd` is
/// the central difference `(f(p+h) − f(p−h)) / 2h`.
pub fn check_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    h: f64,
) -> Result<f64> {
    if params.len() != analytic.len() {
        return Err(Error::Shape(format!(
            "check_gradient: {} params, {} analytic entries",
            params.len(),
            analytic.len()
        )));
    }
    let mut p = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let plus = f(&p);
        p[i] = orig - h;
        let minus = f(&p);
        p[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::numeric(format!("param[{i}]"), "objective not finite under perturbation"));
        }
        let fd = (plus - minus) / (2.0 * h);
        let err = (analytic[i] - fd).abs() / fd.abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let e = check_gradient(&mut |p: &[f64]| p[0] * p[0], &[3.0], &[6.0], 1e-5).unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn linear_is_exact() {
        let c = [0.5, -2.0, 3.25];
        let e = check_gradient(
            &mut |p: &[f64]| p.iter().zip(&c).map(|(x, c)| x * c).sum(),
            &[1.0, 2.0, -4.0],
            &c,
            1e-5,
        )
        .unwrap();
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn non_finite_objective() {
        let r = check_gradient(&mut |p: &[f64]| 1.0 / p[0], &[1e-5], &[0.0], 1e-5);
        assert!(matches!(r, Err(Error::Numeric { .. })));
    }
}
