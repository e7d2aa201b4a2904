//! Diagonal (spectral) model of the generator `A` and the noise operator
//! `B`, semigroup evaluation, Hilbert–Schmidt functionals and the
//! stochastic-integrability checkers.
//!
//! On the shared basis, `T*(t) h_k = e^{-λ_k t} h_k` and `B* h_k = b_k e_k`.
//! Every integrability condition reduces to the convergence of a series
//! over modes (or of an integral whose integrand is such a series). No
//! finite computation decides convergence of an infinite series, so the
//! checkers fit the decay of dyadic block sums and answer with a three-way
//! [`Decision`].

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::noise::{ComponentLaw, CylindricalNoiseSpec, NoiseKind};
use crate::numerics::{self, compensated_sum, fit_line, DEFAULT_QUAD_TOL};
use crate::scalar::Real;

/// Closed-form or explicit sequence indexed by `k = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceRule<T> {
    Constant(T),
    /// `coef · k^exponent`
    Power { coef: T, exponent: T },
    /// `coef · ln(k + 1)`
    Log { coef: T },
    List(Vec<T>),
}

impl<T: Real> SequenceRule<T> {
    pub fn generate(&self, n: usize) -> Result<Vec<T>> {
        let out: Vec<T> = match self {
            Self::Constant(c) => vec![*c; n],
            Self::Power { coef, exponent } => (1..=n).map(|k| *coef * T::from_usize_lossy(k).powf(*exponent)).collect(),
            Self::Log { coef } => (1..=n).map(|k| *coef * T::from_usize_lossy(k + 1).ln()).collect(),
            Self::List(v) => {
                if v.len() < n {
                    return Err(Error::DimensionMismatch {
                        what: "explicit sequence",
                        expected: n,
                        found: v.len(),
                    });
                }
                v[..n].to_vec()
            }
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("generated sequence"));
        }
        Ok(out)
    }

    /// True for rules that can be extended to any length.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Self::List(_))
    }
}

/// Eigenvalues `λ_k` of `-A` and diagonal coefficients `b_k` of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperatorPair<T> {
    lambdas: Vec<T>,
    b: Vec<T>,
    horizon: T,
}

impl<T: Real> SpectralOperatorPair<T> {
    pub fn new(lambdas: Vec<T>, b: Vec<T>, horizon: T) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(invalid("lambdas", "at least one mode is required"));
        }
        if lambdas.len() != b.len() {
            return Err(Error::DimensionMismatch {
                what: "b coefficients",
                expected: lambdas.len(),
                found: b.len(),
            });
        }
        if lambdas.iter().any(|&l| !(l.is_finite() && l >= T::zero())) {
            return Err(invalid("lambdas", "eigenvalues must be finite and nonnegative"));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("b"));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive and finite, got {horizon}")));
        }
        Ok(Self { lambdas, b, horizon })
    }

    /// `B = Id` on the first `lambdas.len()` modes.
    pub fn with_identity_b(lambdas: Vec<T>, horizon: T) -> Result<Self> {
        let b = vec![T::one(); lambdas.len()];
        Self::new(lambdas, b, horizon)
    }

    pub fn from_rules(lambda: &SequenceRule<T>, b: &SequenceRule<T>, n_modes: usize, horizon: T) -> Result<Self> {
        Self::new(lambda.generate(n_modes)?, b.generate(n_modes)?, horizon)
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    /// Restriction to the first `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_modes() {
            return Err(invalid("n", format!("must lie in 1..={}", self.n_modes())));
        }
        Ok(Self {
            lambdas: self.lambdas[..n].to_vec(),
            b: self.b[..n].to_vec(),
            horizon: self.horizon,
        })
    }

    #[inline]
    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    #[inline]
    pub fn b(&self) -> &[T] {
        &self.b
    }

    #[inline]
    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// Warning text when the spectrum is too flat to represent the
    /// `λ_k → ∞` regime the checkers assume.
    pub fn spectral_warning(&self) -> Option<String> {
        let max = self.lambdas.iter().copied().fold(T::zero(), T::max);
        (self.n_modes() > 1 && max * self.horizon < T::lit(10.0))
            .then(|| format!("largest eigenvalue {max} is small relative to the horizon"))
    }

    /// Coordinate-wise `v_k ↦ e^{-λ_k t} v_k`. Missing coordinates are zero.
    pub fn semigroup_apply(&self, t: T, v: &[T]) -> Result<Vec<T>> {
        if !(t >= T::zero()) {
            return Err(invalid("t", format!("semigroup time must be nonnegative, got {t}")));
        }
        if v.len() > self.n_modes() {
            return Err(Error::DimensionMismatch {
                what: "semigroup argument",
                expected: self.n_modes(),
                found: v.len(),
            });
        }
        Ok(v.iter().zip(&self.lambdas).map(|(&x, &l)| (-l * t).exp() * x).collect())
    }

    /// `‖T(t)B‖²_HS` over the first `n` modes: `Σ_{k≤n} b_k² e^{-2λ_k t}`.
    pub fn hs_norm_sq(&self, t: T, n: usize) -> Result<T> {
        if !(t > T::zero()) {
            return Err(invalid("t", format!("must be positive, got {t}")));
        }
        if n > self.n_modes() {
            return Err(invalid("n", format!("must not exceed {} modes", self.n_modes())));
        }
        Ok(self.hs_unchecked(t, n))
    }

    fn hs_unchecked(&self, t: T, n: usize) -> T {
        let two = T::lit(2.0);
        compensated_sum(
            self.lambdas[..n]
                .iter()
                .zip(&self.b[..n])
                .map(|(&l, &b)| b * b * (-two * l * t).exp()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Integrable,
    NotIntegrable,
    Inconclusive,
}

impl Decision {
    /// Worst of two decisions: `NotIntegrable` beats `Inconclusive` beats `Integrable`.
    pub fn combine(self, other: Decision) -> Decision {
        use Decision::*;
        match (self, other) {
            (NotIntegrable, _) | (_, NotIntegrable) => NotIntegrable,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Integrable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Integrable => "integrable",
            Decision::NotIntegrable => "not_integrable",
            Decision::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckVerdict<T> {
    pub decision: Decision,
    /// Value of the decisive series or integral (`Integrable`), or the
    /// divergence rate estimate (`NotIntegrable`).
    pub witness: T,
    pub detail: String,
}

impl<T: Real> CheckVerdict<T> {
    fn new(decision: Decision, witness: T, detail: impl Into<String>) -> Self {
        Self {
            decision,
            witness,
            detail: detail.into(),
        }
    }
}

/// Parameters of the dyadic convergence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceTest {
    /// Number of trailing dyadic block sums in the exponent fit.
    pub points: usize,
    /// Exponent margin separating the convergent and divergent regimes.
    pub margin: f64,
}

impl Default for ConvergenceTest {
    fn default() -> Self {
        Self { points: 8, margin: 0.1 }
    }
}

/// Below this many nonzero leading terms a series is treated as a finite sum.
pub const MIN_FIT_MODES: usize = 16;

/// Classifies `Σ_k terms[k]` (nonnegative terms, `k` 1-based) by the growth
/// exponent `s` of the dyadic block sums `B_j = Σ_{2^j ≤ k < 2^{j+1}} terms`:
/// `B_j ~ 2^{js}` with `s = p + 1` for terms `~ k^p`.
///
/// `s < -margin` is convergent, `s ≥ -margin/2` divergent (the harmonic
/// series sits at `s = 0`), in between inconclusive.
pub fn series_verdict<T: Real>(terms: &[T], test: &ConvergenceTest) -> CheckVerdict<T> {
    if let Some(k) = terms.iter().position(|x| !x.is_finite()) {
        return CheckVerdict::new(Decision::NotIntegrable, T::infinity(), format!("term {} is not finite", k + 1));
    }
    let total = compensated_sum(terms.iter().copied());
    let Some(last) = terms.iter().rposition(|&x| x != T::zero()) else {
        return CheckVerdict::new(Decision::Integrable, T::zero(), "all terms vanish");
    };
    if last + 1 < MIN_FIT_MODES {
        return CheckVerdict::new(
            Decision::Integrable,
            total,
            format!("finite sum over {} nonzero leading terms", last + 1),
        );
    }
    let mut blocks = Vec::new();
    let mut j = 0u32;
    while (1usize << (j + 1)) - 1 <= terms.len() {
        let lo = (1usize << j) - 1;
        let hi = (1usize << (j + 1)) - 1;
        blocks.push(compensated_sum(terms[lo..hi].iter().copied()));
        j += 1;
    }
    if blocks.last().is_some_and(|&b| b == T::zero()) {
        return CheckVerdict::new(Decision::Integrable, total, "terms vanish beyond a finite index");
    }
    let start = blocks.len().saturating_sub(test.points);
    let (xs, ys): (Vec<T>, Vec<T>) = blocks[start..]
        .iter()
        .enumerate()
        .filter(|(_, &b)| b > T::zero())
        .map(|(i, &b)| (T::from_usize_lossy(start + i), b.log2()))
        .unzip();
    let Some(fit) = fit_line(&xs, &ys) else {
        return CheckVerdict::new(Decision::Inconclusive, total, "too few positive block sums to fit");
    };
    let s = fit.slope;
    let detail = format!(
        "dyadic block exponent {:.4} over {} blocks (term decay exponent {:.4}), {} terms",
        s.as_f64(),
        xs.len(),
        (s - T::one()).as_f64(),
        terms.len()
    );
    if fit.max_residual > T::lit(0.75) {
        return CheckVerdict::new(Decision::Inconclusive, total, format!("unstable fit; {detail}"));
    }
    let margin = T::lit(test.margin);
    if s < -margin {
        let r = T::lit(2.0).powf(s);
        let tail = *blocks.last().unwrap() * r / (T::one() - r);
        CheckVerdict::new(Decision::Integrable, total + tail, detail)
    } else if s >= -margin * T::lit(0.5) {
        CheckVerdict::new(Decision::NotIntegrable, s, detail)
    } else {
        CheckVerdict::new(Decision::Inconclusive, total, detail)
    }
}

/// Series α-stable criterion `Σ_k |b_k σ_k|^α / λ_k < ∞`.
pub fn check_series_stable<T: Real>(pair: &SpectralOperatorPair<T>, sigmas: &[T], alpha: T) -> Result<CheckVerdict<T>> {
    if !(alpha > T::zero() && alpha < T::lit(2.0)) {
        return Err(invalid("alpha", format!("must lie strictly inside (0, 2), got {alpha}")));
    }
    let n = pair.n_modes();
    if sigmas.len() < n {
        return Err(Error::DimensionMismatch {
            what: "sigmas",
            expected: n,
            found: sigmas.len(),
        });
    }
    if let Some(k) = pair.lambdas().iter().position(|&l| l <= T::zero()) {
        return Err(invalid(
            "lambdas",
            format!("reduced series criterion needs λ_k > 0 (mode {} has λ = 0)", k + 1),
        ));
    }
    let terms: Vec<T> = (0..n)
        .map(|k| (pair.b()[k] * sigmas[k]).abs().powf(alpha) / pair.lambdas()[k])
        .collect();
    Ok(series_verdict(&terms, &ConvergenceTest::default()))
}

/// General series criterion: per mode,
/// `∫_0^T ∫ (e^{-2λ_k s} |b_k β|² ∧ 1) μ_k(dβ) ds` for the jump part plus
/// the trace term `∫_0^T b_k² var_k e^{-2λ_k s} ds` for Gaussian laws.
pub fn check_series_general<T: Real>(
    pair: &SpectralOperatorPair<T>,
    laws: &[ComponentLaw<T>],
) -> Result<CheckVerdict<T>> {
    let n = pair.n_modes();
    if laws.len() < n {
        return Err(Error::DimensionMismatch {
            what: "laws",
            expected: n,
            found: laws.len(),
        });
    }
    let horizon = pair.horizon();
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        match mode_integrability_term(&laws[k], pair.lambdas()[k], pair.b()[k], horizon) {
            Ok(v) => terms.push(v),
            Err(e) => {
                return Ok(CheckVerdict::new(
                    Decision::Inconclusive,
                    T::nan(),
                    format!("mode {}: {e}", k + 1),
                ))
            }
        }
    }
    Ok(series_verdict(&terms, &ConvergenceTest::default()))
}

/// Contribution of a single mode to the general series criterion.
pub fn mode_integrability_term<T: Real>(law: &ComponentLaw<T>, lambda: T, b: T, horizon: T) -> Result<T> {
    if law.is_degenerate() || b == T::zero() {
        return Ok(T::zero());
    }
    let g = |decay: T| -> T {
        match *law {
            ComponentLaw::Gaussian { variance } => b * b * variance * decay * decay,
            _ => law.clipped_quadratic_moment(decay * b),
        }
    };
    let peak = g(T::one());
    if lambda <= T::zero() {
        return Ok(peak * horizon);
    }
    // With w = −λs the integrand g(e^w) is smooth and decays like e^{pw},
    // so the window is cut where it has fallen below e^{−60} of the peak.
    let p = match *law {
        ComponentLaw::StableSymmetric { alpha, .. } => alpha,
        _ => T::lit(2.0),
    };
    let width = (lambda * horizon).min(T::lit(60.0) / p);
    // The verdict needs only the decay rate of the terms.
    let tol = (T::lit(1e-8) * peak).max(T::min_positive_value());
    let v = numerics::adaptive_simpson(|w: T| g(w.exp()), -width, T::zero(), tol)?;
    Ok(v / lambda)
}

/// Canonical α-stable criterion `∫_0^T ‖T(s)B‖_HS^α ds < ∞`.
///
/// The HS series is first tested for convergence on the dyadic times
/// `s_j = T 2^{-j}`; divergence at any `s_j` means `‖T(s)B‖_HS = ∞` on
/// `(0, s_j]`. Otherwise the blow-up `‖T(s)B‖²_HS ~ s^{-ρ}` is fitted on the
/// smallest times where the truncation is negligible, and the integral is
/// finite iff `ρα/2 < 1`.
pub fn check_canonical<T: Real>(pair: &SpectralOperatorPair<T>, alpha: T) -> Result<CheckVerdict<T>> {
    if !(alpha > T::zero() && alpha < T::lit(2.0)) {
        return Err(invalid("alpha", format!("must lie strictly inside (0, 2), got {alpha}")));
    }
    let test = ConvergenceTest::default();
    let n = pair.n_modes();
    let horizon = pair.horizon();
    let half_alpha = alpha / T::lit(2.0);
    let nonzero = pair.b().iter().filter(|&&b| b != T::zero()).count();

    let witness = |label: &str| -> CheckVerdict<T> {
        let f = |s: T| pair.hs_unchecked(s, n).powf(half_alpha);
        let scale = pair.hs_unchecked(horizon, n).powf(half_alpha) * horizon;
        let tol = (T::lit(DEFAULT_QUAD_TOL) * scale).max(T::lit(1e-300));
        match numerics::integrate_toward_zero(f, horizon, tol) {
            Ok(v) => CheckVerdict::new(Decision::Integrable, v, label.to_string()),
            Err(e) => CheckVerdict::new(Decision::Inconclusive, T::nan(), format!("{label}; witness quadrature: {e}")),
        }
    };

    if nonzero < MIN_FIT_MODES {
        return Ok(witness(&format!("{nonzero} nonzero modes: bounded integrand")));
    }

    let two = T::lit(2.0);
    let lambda_mid = pair.lambdas()[n / 2];
    let mut usable: Vec<(T, T)> = Vec::new();
    let max_level = if std::mem::size_of::<T>() < 8 { 40 } else { 80 };
    for j in 0..=max_level {
        let s = horizon * two.powi(-j);
        // Below this time the kernel over the upper half of the modes has not
        // started to decay, so the truncated sum cannot reveal divergence.
        if two * s * lambda_mid < T::lit(4.0) {
            break;
        }
        let terms: Vec<T> = pair
            .lambdas()
            .iter()
            .zip(pair.b())
            .map(|(&l, &b)| b * b * (-two * l * s).exp())
            .collect();
        let v = series_verdict(&terms, &test);
        match v.decision {
            Decision::NotIntegrable => {
                return Ok(CheckVerdict::new(
                    Decision::NotIntegrable,
                    s,
                    format!("‖T(s)B‖²_HS diverges for s ≤ {}: {}", s, v.detail),
                ));
            }
            // Faster than polynomial decay also fails the power-law fit, so
            // an inconclusive series is kept when its tail is negligible.
            Decision::Integrable | Decision::Inconclusive => {
                let hs = compensated_sum(terms.iter().copied());
                let last_block = compensated_sum(terms[n / 2..].iter().copied());
                if hs > T::zero() && last_block <= T::lit(1e-4) * hs {
                    usable.push((s, hs));
                }
            }
        }
    }
    if usable.len() < 4 {
        return Ok(CheckVerdict::new(
            Decision::Inconclusive,
            T::nan(),
            format!(
                "only {} dyadic times resolve the HS blow-up with {} modes",
                usable.len(),
                n
            ),
        ));
    }
    let tail = &usable[usable.len().saturating_sub(test.points)..];
    let xs: Vec<T> = tail.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<T> = tail.iter().map(|(_, h)| h.ln()).collect();
    let fit = fit_line(&xs, &ys).expect("at least four distinct dyadic points");
    let rho = (-fit.slope).max(T::zero());
    let exponent = rho * half_alpha;
    let detail = format!(
        "HS blow-up exponent ρ = {:.4} on s ∈ [{:.3e}, {:.3e}], ρα/2 = {:.4}",
        rho.as_f64(),
        tail[tail.len() - 1].0.as_f64(),
        tail[0].0.as_f64(),
        exponent.as_f64()
    );
    if fit.max_residual > T::lit(0.05) {
        return Ok(CheckVerdict::new(Decision::Inconclusive, T::nan(), format!("unstable fit; {detail}")));
    }
    let margin = T::lit(test.margin);
    if exponent < T::one() - margin {
        Ok(witness(&detail))
    } else if exponent > T::one() + margin {
        Ok(CheckVerdict::new(Decision::NotIntegrable, exponent, detail))
    } else {
        Ok(CheckVerdict::new(Decision::Inconclusive, exponent, detail))
    }
}

/// Linear-drift condition: `Σ_k (ã_k b_k)² min(1/(2λ_k), T) < ∞`.
pub fn check_drift_condition<T: Real>(
    pair: &SpectralOperatorPair<T>,
    spec: &CylindricalNoiseSpec<T>,
) -> Result<CheckVerdict<T>> {
    if spec.drift().is_none() {
        return Ok(CheckVerdict::new(Decision::Integrable, T::zero(), "no drift"));
    }
    let horizon = pair.horizon();
    let terms: Vec<T> = (0..pair.n_modes())
        .map(|k| {
            let a = spec.drift_at(k) * pair.b()[k];
            let l = pair.lambdas()[k];
            let w = if l > T::zero() { (T::one() / (T::lit(2.0) * l)).min(horizon) } else { horizon };
            a * a * w
        })
        .collect();
    Ok(series_verdict(&terms, &ConvergenceTest::default()))
}

/// Runs every checker that applies to `(spec, pair)`.
pub fn applicable_checks<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
) -> Result<Vec<(&'static str, CheckVerdict<T>)>> {
    let mut out = Vec::new();
    match spec.kind() {
        NoiseKind::SeriesIndependent(laws) => {
            let laws = &laws[..pair.n_modes().min(laws.len())];
            if let Some((alpha, sigmas)) = common_stable(laws) {
                if pair.lambdas().iter().all(|&l| l > T::zero()) {
                    out.push(("series_stable", check_series_stable(pair, &sigmas, alpha)?));
                }
            }
            out.push(("series_general", check_series_general(pair, laws)?));
        }
        NoiseKind::CanonicalStable { alpha } => {
            out.push(("canonical", check_canonical(pair, *alpha)?));
        }
    }
    if spec.drift().is_some() {
        out.push(("drift", check_drift_condition(pair, spec)?));
    }
    Ok(out)
}

fn common_stable<T: Real>(laws: &[ComponentLaw<T>]) -> Option<(T, Vec<T>)> {
    let mut alpha = None;
    let mut sigmas = Vec::with_capacity(laws.len());
    for law in laws {
        match *law {
            ComponentLaw::StableSymmetric { alpha: a, scale } => {
                if alpha.is_some_and(|x| x != a) {
                    return None;
                }
                alpha = Some(a);
                sigmas.push(scale);
            }
            _ => return None,
        }
    }
    alpha.map(|a| (a, sigmas))
}

/// Worst decision across a set of verdicts.
pub fn overall<T: Real>(verdicts: &[(&'static str, CheckVerdict<T>)]) -> Decision {
    verdicts
        .iter()
        .fold(Decision::Integrable, |acc, (_, v)| acc.combine(v.decision))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_pair(p: f64, n: usize) -> SpectralOperatorPair<f64> {
        SpectralOperatorPair::from_rules(
            &SequenceRule::Power { coef: 1.0, exponent: p },
            &SequenceRule::Constant(1.0),
            n,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn semigroup_identity_and_values() {
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0, 2.0], 1.0).unwrap();
        assert_eq!(pair.semigroup_apply(0.0, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let v = pair.semigroup_apply(std::f64::consts::LN_2, &[1.0, 1.0]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.25).abs() < 1e-15);
        assert!(pair.semigroup_apply(-1.0, &[1.0]).is_err());
    }

    #[test]
    fn semigroup_property_exact_for_dyadic_times() {
        let pair = SpectralOperatorPair::with_identity_b(vec![0.5, 3.0, 7.0], 1.0).unwrap();
        let v = [1.0f64, 2.0, -3.0];
        let a = pair.semigroup_apply(0.25, &pair.semigroup_apply(0.5, &v).unwrap()).unwrap();
        let b = pair.semigroup_apply(0.75, &v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn hs_norm_geometric_series() {
        let pair = power_pair(1.0, 2000);
        for &t in &[0.1f64, 0.5, 2.0] {
            let want = (-2.0 * t).exp() / (1.0 - (-2.0 * t).exp());
            let got = pair.hs_norm_sq(t, 2000).unwrap();
            assert!((got - want).abs() < 1e-12 * want, "t={t}");
        }
    }

    #[test]
    fn hs_norm_zero_b_and_decay() {
        let pair = SpectralOperatorPair::new(vec![1.0, 2.0], vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(pair.hs_norm_sq(0.3, 2).unwrap(), 0.0);
        let pair = power_pair(1.0, 10);
        assert!(pair.hs_norm_sq(1e3, 10).unwrap() < 1e-300);
        assert!(pair.hs_norm_sq(0.0, 10).is_err());
    }

    #[test]
    fn series_stable_verdicts() {
        let sig = vec![1.0; 4096];
        let v = check_series_stable(&power_pair(2.0, 4096), &sig, 1.0).unwrap();
        assert_eq!(v.decision, Decision::Integrable, "{}", v.detail);
        assert!((v.witness - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-3);
        let v = check_series_stable(&power_pair(1.0, 4096), &sig, 1.0).unwrap();
        assert_eq!(v.decision, Decision::NotIntegrable, "{}", v.detail);
        // σ_k = k^{2/α} with λ_k = k²: terms do not vanish.
        let alpha = 1.3;
        let sig: Vec<f64> = (1..=4096).map(|k| (k as f64).powf(2.0 / alpha)).collect();
        let v = check_series_stable(&power_pair(2.0, 4096), &sig, alpha).unwrap();
        assert_eq!(v.decision, Decision::NotIntegrable, "{}", v.detail);
    }

    #[test]
    fn series_stable_rejects_zero_eigenvalue() {
        let pair = SpectralOperatorPair::with_identity_b(vec![0.0, 1.0], 1.0).unwrap();
        assert!(check_series_stable(&pair, &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn general_zero_scales_integrable() {
        let laws = vec![ComponentLaw::stable(1.0, 0.0).unwrap(); 64];
        let v = check_series_general(&power_pair(1.0, 64), &laws).unwrap();
        assert_eq!(v.decision, Decision::Integrable);
        assert_eq!(v.witness, 0.0);
    }

    #[test]
    fn general_single_stable_mode_closed_form() {
        // 4 C_1 (1 - e^{-1}) for α = 1, σ = b = λ = T = 1.
        let law = ComponentLaw::stable(1.0, 1.0).unwrap();
        let term = mode_integrability_term(&law, 1.0, 1.0, 1.0).unwrap();
        let want = 4.0 / std::f64::consts::PI * (1.0 - (-1.0f64).exp());
        assert!((term - want).abs() < 1e-9, "{term} vs {want}");
    }

    #[test]
    fn general_gaussian_trace_term() {
        let law = ComponentLaw::gaussian(2.0).unwrap();
        let term = mode_integrability_term(&law, 3.0, 0.5, 1.0).unwrap();
        let want = 0.25 * 2.0 * (1.0 - (-6.0f64).exp()) / 6.0;
        assert!((term - want).abs() < 1e-12);
    }

    #[test]
    fn canonical_heat_spectrum_integrable() {
        let pair = power_pair(2.0, 4096);
        for &a in &[0.5, 1.0, 1.9] {
            let v = check_canonical(&pair, a).unwrap();
            assert_eq!(v.decision, Decision::Integrable, "alpha={a}: {}", v.detail);
        }
    }

    #[test]
    fn canonical_log_spectrum_not_integrable() {
        let pair = SpectralOperatorPair::from_rules(
            &SequenceRule::Log { coef: 1.0 },
            &SequenceRule::Constant(1.0),
            4096,
            1.0,
        )
        .unwrap();
        let v = check_canonical(&pair, 1.0).unwrap();
        assert_eq!(v.decision, Decision::NotIntegrable, "{}", v.detail);
    }

    #[test]
    fn canonical_finite_rank_and_single_mode() {
        let mut b = vec![0.0; 512];
        b[..10].iter_mut().for_each(|x| *x = 1.0);
        let lambdas = SequenceRule::Log { coef: 1.0 }.generate(512).unwrap();
        let pair = SpectralOperatorPair::new(lambdas, b, 1.0).unwrap();
        assert_eq!(check_canonical(&pair, 1.5).unwrap().decision, Decision::Integrable);
        let one = SpectralOperatorPair::<f64>::with_identity_b(vec![0.0], 2.0).unwrap();
        let v = check_canonical(&one, 1.2).unwrap();
        assert_eq!(v.decision, Decision::Integrable);
        assert!((v.witness - 2.0).abs() < 1e-8);
    }

    #[test]
    fn drift_condition_cases() {
        let pair = power_pair(1.0, 4096);
        let spec = CylindricalNoiseSpec::canonical(1.0, 4096).unwrap();
        let v = check_drift_condition(&pair, &spec).unwrap();
        assert_eq!((v.decision, v.witness), (Decision::Integrable, 0.0));
        let e1 = spec.clone().with_drift(vec![1.0]).unwrap();
        assert_eq!(check_drift_condition(&pair, &e1).unwrap().decision, Decision::Integrable);
        let ones = spec.with_drift(vec![1.0; 4096]).unwrap();
        assert_eq!(check_drift_condition(&pair, &ones).unwrap().decision, Decision::NotIntegrable);
    }

    #[test]
    fn sequence_rules() {
        assert_eq!(
            SequenceRule::Power { coef: 2.0, exponent: 2.0 }.generate(3).unwrap(),
            vec![2.0, 8.0, 18.0]
        );
        let l = SequenceRule::Log { coef: 1.0 }.generate(2).unwrap();
        assert!((l[0] - 2f64.ln()).abs() < 1e-15);
        assert!(SequenceRule::List(vec![1.0]).generate(2).is_err());
    }

    #[test]
    fn decision_combination() {
        use Decision::*;
        assert_eq!(Integrable.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(NotIntegrable), NotIntegrable);
        assert_eq!(Integrable.combine(Integrable), Integrable);
    }
}
