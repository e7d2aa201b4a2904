//! Quadrature, compensated summation, line fits and the few special
//! functions the checkers need.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Neumaier-compensated sum. Order of accumulation is the iterator order.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut acc = CompensatedSum::default();
    for x in items {
        acc.add(x);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Default absolute tolerance of the adaptive Simpson rule.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 4_000_000;

struct SimpsonState {
    evals: usize,
    exhausted: bool,
    non_finite: bool,
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute
/// tolerance `tol`. Fails (never clamps) on non-finite integrand values or
/// when the recursion budget is exhausted before the tolerance is met.
pub fn adaptive_simpson<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Result<T> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("quadrature bounds"));
    }
    if a == b {
        return Ok(T::zero());
    }
    let mut state = SimpsonState {
        evals: 0,
        exhausted: false,
        non_finite: false,
    };
    // Four starting panels keep a lucky symmetric sample from ending the
    // recursion on the first level.
    let panels = 4;
    let h = (b - a) / T::lit(panels as f64);
    let mut total = CompensatedSum::default();
    let mut x0 = a;
    let mut f0 = eval(&mut f, x0, &mut state);
    for i in 0..panels {
        let x2 = if i + 1 == panels { b } else { a + h * T::lit((i + 1) as f64) };
        let x1 = (x0 + x2) * T::lit(0.5);
        let f1 = eval(&mut f, x1, &mut state);
        let f2 = eval(&mut f, x2, &mut state);
        let whole = (x2 - x0) / T::lit(6.0) * (f0 + T::lit(4.0) * f1 + f2);
        let part = simpson_rec(
            &mut f,
            x0,
            f0,
            x1,
            f1,
            x2,
            f2,
            whole,
            tol / T::lit(panels as f64),
            MAX_DEPTH,
            &mut state,
        );
        total.add(part);
        x0 = x2;
        f0 = f2;
    }
    if state.non_finite {
        return Err(Error::Quadrature {
            a: a.as_f64(),
            b: b.as_f64(),
            reason: "integrand returned a non-finite value".into(),
        });
    }
    if state.exhausted {
        return Err(Error::Quadrature {
            a: a.as_f64(),
            b: b.as_f64(),
            reason: format!("tolerance {:e} not reached within budget ({} evaluations)", tol.as_f64(), state.evals),
        });
    }
    Ok(total.value())
}

#[inline]
fn eval<T: Real, F: FnMut(T) -> T>(f: &mut F, x: T, state: &mut SimpsonState) -> T {
    state.evals += 1;
    let y = f(x);
    if !y.is_finite() {
        state.non_finite = true;
        return T::zero();
    }
    y
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real, F: FnMut(T) -> T>(
    f: &mut F,
    a: T,
    fa: T,
    m: T,
    fm: T,
    b: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    state: &mut SimpsonState,
) -> T {
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = eval(f, lm, state);
    let frm = eval(f, rm, state);
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol || state.non_finite {
        return left + right + delta / T::lit(15.0);
    }
    if depth == 0 || state.evals > MAX_EVALS || lm <= a || rm >= b {
        state.exhausted = true;
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    simpson_rec(f, a, fa, lm, flm, m, fm, left, half, depth - 1, state)
        + simpson_rec(f, m, fm, rm, frm, b, fb, right, half, depth - 1, state)
}

/// Integrates `f` over `(0, b]` where `f` may have an integrable
/// singularity at 0: adaptive Simpson on the dyadic pieces
/// `[b 2^{-j-1}, b 2^{-j}]`, stopped once the geometric tail estimate of
/// the remaining pieces falls below `tol`.
pub fn integrate_toward_zero<T: Real, F: FnMut(T) -> T>(mut f: F, b: T, tol: T) -> Result<T> {
    if b <= T::zero() {
        return Ok(T::zero());
    }
    let mut total = CompensatedSum::default();
    let mut hi = b;
    let mut prev: Option<T> = None;
    let mut prev_ratio: Option<T> = None;
    let max_pieces = if std::mem::size_of::<T>() < 8 { 100 } else { 400 };
    for j in 0..max_pieces {
        let lo = hi * T::lit(0.5);
        let piece = adaptive_simpson(&mut f, lo, hi, tol * T::lit(0.25))?;
        total.add(piece);
        if let Some(p) = prev {
            let ratio = if p != T::zero() { (piece / p).abs() } else { T::zero() };
            if j >= 4 {
                if ratio >= T::one() - T::lit(1e-9) && piece.abs() > tol {
                    return Err(Error::Quadrature {
                        a: 0.0,
                        b: b.as_f64(),
                        reason: "dyadic pieces do not decay; singularity is not integrable".into(),
                    });
                }
                let tail = if ratio < T::one() {
                    piece.abs() * ratio / (T::one() - ratio)
                } else {
                    piece.abs()
                };
                if tail < tol {
                    return Ok(total.value());
                }
                // Power-law behaviour near zero makes the pieces exactly
                // geometric; once the ratio has settled the tail is summed
                // in closed form.
                if let Some(pr) = prev_ratio {
                    if j >= 8 && ratio < T::one() && (ratio - pr).abs() <= T::lit(1e-10) * ratio {
                        total.add(piece * ratio / (T::one() - ratio));
                        return Ok(total.value());
                    }
                }
            }
            prev_ratio = Some(ratio);
        }
        prev = Some(piece);
        hi = lo;
    }
    Err(Error::Quadrature {
        a: 0.0,
        b: b.as_f64(),
        reason: "dyadic refinement toward zero did not settle".into(),
    })
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub max_residual: T,
}

pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Option<LineFit<T>> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = compensated_sum(xs.iter().copied()) / nf;
    let my = compensated_sum(ys.iter().copied()) / nf;
    let sxx = compensated_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    if sxx == T::zero() {
        return None;
    }
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - intercept - slope * x).abs())
        .fold(T::zero(), T::max);
    Some(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

pub fn ln_gamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

pub fn erf<T: Real>(x: T) -> T {
    T::lit(statrs::function::erf::erf(x.as_f64()))
}

pub fn erfc<T: Real>(x: T) -> T {
    T::lit(statrs::function::erf::erfc(x.as_f64()))
}

/// Median of a copy of `xs` (mean of the two central values for even length).
pub fn median<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut v: Vec<T> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::lit(0.5)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exponential() {
        let v = adaptive_simpson(|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x: f64| (-3.0 * x).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1.0 - (-3.0f64).exp()) / 3.0).abs() < 1e-11);
    }

    #[test]
    fn simpson_reports_non_finite_integrand() {
        let err = adaptive_simpson(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, 1e-10);
        assert!(err.is_err());
    }

    #[test]
    fn dyadic_refinement_handles_root_singularity() {
        // \int_0^1 s^{-1/2} ds = 2
        let v = integrate_toward_zero(|s: f64| s.powf(-0.5), 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn dyadic_refinement_rejects_non_integrable() {
        assert!(integrate_toward_zero(|s: f64| 1.0 / s, 1.0, 1e-10).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = std::iter::once(1e16).chain(std::iter::repeat_n(1.0, 1000)).chain(std::iter::once(-1e16));
        assert_eq!(compensated_sum(xs), 1000.0);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
    }
}
