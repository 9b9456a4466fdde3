//! Bracketed scalar root finding.

/// Result of [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: u32,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `x_tol`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (a zero at either end is
/// accepted). Returns `None` otherwise. The returned abscissa is the point
/// with the smaller `|f|` among the final bracket ends and midpoint.
pub fn bisect<F, E>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<Option<Root>, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Some(Root { x: a, fx: fa, iterations: 0 }));
    }
    if fb == 0.0 {
        return Ok(Some(Root { x: b, fx: fb, iterations: 0 }));
    }
    if !(fa.signum() != fb.signum()) || !(b > a) {
        return Ok(None);
    }
    let mut iterations = 0;
    while b - a > x_tol && iterations < 200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        iterations += 1;
        if fm == 0.0 {
            return Ok(Some(Root { x: m, fx: fm, iterations }));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let best = [(m, fm), (a, fa), (b, fb)]
        .into_iter()
        .min_by(|x, y| libm::fabs(x.1).total_cmp(&libm::fabs(y.1)))
        .unwrap();
    Ok(Some(Root { x: best.0, fx: best.1, iterations }))
}
