//! Central finite differences with one level of Richardson extrapolation.

/// Derivative of order 1 or 2 of `f` at `x` with base step `h`.
///
/// The result combines the stencils at `h` and `h / 2`, which removes the
/// leading `h^2` error term.
pub fn derivative<E, F>(f: F, x: f64, h: f64, order: u8) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let stencil = |h: f64| -> Result<f64, E> {
        match order {
            1 => Ok((f(x + h)? - f(x - h)?) / (2.0 * h)),
            _ => Ok((f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h)),
        }
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_exp() {
        let f = |x: f64| Ok::<_, ()>(x.exp());
        let d1 = derivative(f, 1.0, 1e-3, 1).unwrap();
        let d2 = derivative(f, 1.0, 1e-2, 2).unwrap();
        assert!((d1 - 1.0f64.exp()).abs() < 1e-11);
        assert!((d2 - 1.0f64.exp()).abs() < 1e-8);
    }
}
