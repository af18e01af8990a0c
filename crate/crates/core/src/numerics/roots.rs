use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("bracket expansion from {start} failed")]
    Expansion { start: f64 },
    #[error("non-finite function value at {0}")]
    NonFinite(f64),
}

/// Bisection safeguarded Newton. `f` returns (value, derivative). The bracket
/// [lo, hi] must contain a sign change.
pub fn newton_bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if !flo.is_finite() {
        return Err(RootError::NonFinite(lo));
    }
    if !fhi.is_finite() {
        return Err(RootError::NonFinite(hi));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoSignChange { lo, hi });
    }
    let lo_neg = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite(x));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == lo_neg {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= xtol * (1.0 + x.abs()) || (hi - lo) <= xtol * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Plain bisection to width `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64, RootError> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(RootError::NoSignChange { lo, hi });
    }
    let lo_neg = flo < 0.0;
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Doubles `hi` (starting at `start`) until `f(hi)` has the requested sign.
pub fn expand_until<F: Fn(f64) -> f64>(f: F, start: f64, positive: bool) -> Result<f64, RootError> {
    let mut x = start;
    for _ in 0..80 {
        let v = f(x);
        if v.is_finite() && (v > 0.0) == positive && v != 0.0 {
            return Ok(x);
        }
        if !v.is_finite() {
            break;
        }
        x *= 2.0;
    }
    Err(RootError::Expansion { start })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 3.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = bisect(|x| x * x - 2.0, 0.0, 3.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change() {
        assert!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn expansion() {
        let hi = expand_until(|x| x - 100.0, 1.0, true).unwrap();
        assert!(hi > 100.0);
    }
}
