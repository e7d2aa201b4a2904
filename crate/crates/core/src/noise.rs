//! Cylindrical Lévy noise: specifications, symbols, Lévy-measure
//! functionals, and increment sampling on time grids.
//!
//! A noise is only ever touched through its first `n_modes` coordinates
//! `L(t)e_1, ..., L(t)e_n`. Two constructions are supported:
//!
//! * **series**: `L(t)u = sum_k <e_k, u> l_k(t)` with independent symmetric
//!   one-dimensional Lévy processes `l_k`;
//! * **canonical α-stable**: the isotropic process with
//!   `E exp(i L(t)u) = exp(-t |u|^α)`, sampled by subordinating a Gaussian
//!   vector to a positive (α/2)-stable time change.
//!
//! An optional linear drift `t <ã, u>` can be added to either.

use std::io::Write;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;
use crate::numerics::{self, compensated_sum, CompensatedSum};
use crate::rng::{self, StreamRng};
use crate::scalar::Real;

/// Law of one coordinate process `l_k` in the series construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentLaw<T> {
    /// Symmetric α-stable with characteristic function `exp(-|scale β|^α)` at time 1.
    StableSymmetric { alpha: T, scale: T },
    /// Brownian motion with the given variance per unit time.
    Gaussian { variance: T },
    /// Compound Poisson with `N(0, jump_std²)` jumps arriving at `rate`.
    CompoundPoissonGaussianJumps { rate: T, jump_std: T },
}

impl<T: Real> ComponentLaw<T> {
    pub fn stable(alpha: T, scale: T) -> Result<Self> {
        let law = Self::StableSymmetric { alpha, scale };
        law.validate()?;
        Ok(law)
    }

    pub fn gaussian(variance: T) -> Result<Self> {
        let law = Self::Gaussian { variance };
        law.validate()?;
        Ok(law)
    }

    pub fn compound_poisson(rate: T, jump_std: T) -> Result<Self> {
        let law = Self::CompoundPoissonGaussianJumps { rate, jump_std };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::StableSymmetric { alpha, scale } => {
                check_alpha(alpha)?;
                check_nonneg("scale", scale)
            }
            Self::Gaussian { variance } => check_nonneg("variance", variance),
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => {
                check_nonneg("rate", rate)?;
                check_nonneg("jump_std", jump_std)
            }
        }
    }

    /// One-dimensional Lévy symbol `ψ(β)`, real because every law is symmetric.
    pub fn symbol(&self, beta: T) -> T {
        match *self {
            Self::StableSymmetric { alpha, scale } => -(scale * beta).abs().powf(alpha),
            Self::Gaussian { variance } => -T::lit(0.5) * variance * beta * beta,
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => {
                rate * ((-T::lit(0.5) * jump_std * jump_std * beta * beta).exp() - T::one())
            }
        }
    }

    /// True when the law is a point mass at 0.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            Self::StableSymmetric { scale, .. } => scale == T::zero(),
            Self::Gaussian { variance } => variance == T::zero(),
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => rate == T::zero() || jump_std == T::zero(),
        }
    }

    pub fn has_second_moment(&self) -> bool {
        !matches!(self, Self::StableSymmetric { scale, .. } if *scale != T::zero())
    }

    /// Draws the increment of the process over a step of length `dt`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: T, rng: &mut R) -> T {
        match *self {
            Self::StableSymmetric { alpha, scale } => {
                let s = scale * dt.powf(T::one() / alpha);
                stable_unchecked(alpha, s, rng)
            }
            Self::Gaussian { variance } => (variance * dt).sqrt() * rng::standard_normal::<T, R>(rng),
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => {
                let count = rng::poisson((rate * dt).as_f64(), rng);
                let mut acc = CompensatedSum::default();
                for _ in 0..count {
                    acc.add(jump_std * rng::standard_normal::<T, R>(rng));
                }
                acc.value()
            }
        }
    }

    /// Lévy-measure mass of `{β : |β| > x}`, `x > 0`.
    pub fn tail_mass(&self, x: T) -> T {
        match *self {
            Self::StableSymmetric { alpha, scale } => {
                if scale == T::zero() {
                    T::zero()
                } else {
                    T::lit(2.0) * stable_levy_constant(alpha) * (scale / x).powf(alpha)
                }
            }
            Self::Gaussian { .. } => T::zero(),
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => {
                if rate == T::zero() || jump_std == T::zero() {
                    T::zero()
                } else {
                    rate * numerics::erfc(x / (jump_std * T::SQRT_2()))
                }
            }
        }
    }

    /// `∫ (a² β² ∧ 1) μ(dβ)` over the Lévy measure `μ` of the law. Zero for
    /// the Gaussian law, whose contribution enters through its variance.
    pub fn clipped_quadratic_moment(&self, a: T) -> T {
        let a = a.abs();
        match *self {
            Self::StableSymmetric { alpha, scale } => {
                if scale == T::zero() || a == T::zero() {
                    T::zero()
                } else {
                    (a * scale).powf(alpha) * stable_clipped_constant(alpha)
                }
            }
            Self::Gaussian { .. } => T::zero(),
            Self::CompoundPoissonGaussianJumps { rate, jump_std } => {
                if rate == T::zero() || jump_std == T::zero() || a == T::zero() {
                    return T::zero();
                }
                let c = T::one() / a;
                let z = c / (jump_std * T::SQRT_2());
                let inner = jump_std
                    * jump_std
                    * (numerics::erf(z) - (T::lit(2.0) / T::PI()).sqrt() * (c / jump_std) * (-z * z).exp());
                rate * (a * a * inner.max(T::zero()) + numerics::erfc(z))
            }
        }
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::lit(2.0) {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie strictly inside (0, 2), got {alpha}")))
    }
}

fn check_nonneg<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x.is_finite() && x >= T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and nonnegative, got {x}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind<T> {
    SeriesIndependent(Vec<ComponentLaw<T>>),
    CanonicalStable { alpha: T },
}

/// Declarative description of a cylindrical Lévy process truncated to its
/// first `n_modes` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalNoiseSpec<T> {
    kind: NoiseKind<T>,
    drift: Option<Vec<T>>,
    n_modes: usize,
}

impl<T: Real> CylindricalNoiseSpec<T> {
    pub fn series(laws: Vec<ComponentLaw<T>>, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("n_modes", "must be positive"));
        }
        if laws.len() < n_modes {
            return Err(Error::DimensionMismatch {
                what: "series laws",
                expected: n_modes,
                found: laws.len(),
            });
        }
        for law in &laws {
            law.validate()?;
        }
        Ok(Self {
            kind: NoiseKind::SeriesIndependent(laws),
            drift: None,
            n_modes,
        })
    }

    pub fn canonical(alpha: T, n_modes: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if n_modes == 0 {
            return Err(invalid("n_modes", "must be positive"));
        }
        Ok(Self {
            kind: NoiseKind::CanonicalStable { alpha },
            drift: None,
            n_modes,
        })
    }

    /// Adds the linear drift `a(u) = <ã, u>`; missing coordinates are zero.
    pub fn with_drift(mut self, drift: Vec<T>) -> Result<Self> {
        if drift.len() > self.n_modes {
            return Err(Error::DimensionMismatch {
                what: "drift",
                expected: self.n_modes,
                found: drift.len(),
            });
        }
        if drift.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("drift"));
        }
        self.drift = Some(drift);
        Ok(self)
    }

    #[inline]
    pub fn kind(&self) -> &NoiseKind<T> {
        &self.kind
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn drift(&self) -> Option<&[T]> {
        self.drift.as_deref()
    }

    /// Drift coordinate `ã_k` (zero when absent).
    #[inline]
    pub fn drift_at(&self, k: usize) -> T {
        self.drift
            .as_ref()
            .and_then(|d| d.get(k).copied())
            .unwrap_or_else(T::zero)
    }

    pub fn laws(&self) -> Option<&[ComponentLaw<T>]> {
        match &self.kind {
            NoiseKind::SeriesIndependent(laws) => Some(&laws[..self.n_modes]),
            NoiseKind::CanonicalStable { .. } => None,
        }
    }

    /// Same noise restricted to fewer modes.
    pub fn truncated(&self, n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > self.n_modes {
            return Err(invalid("n_modes", format!("must lie in 1..={}", self.n_modes)));
        }
        let mut out = self.clone();
        out.n_modes = n_modes;
        if let Some(d) = &mut out.drift {
            d.truncate(n_modes);
        }
        Ok(out)
    }

    /// True when every increment is an independent symmetric law with a
    /// finite second moment (Gaussian and compound-Poisson components only).
    pub fn has_weak_second_moments(&self) -> bool {
        match &self.kind {
            NoiseKind::SeriesIndependent(laws) => laws[..self.n_modes].iter().all(|l| l.has_second_moment()),
            NoiseKind::CanonicalStable { .. } => false,
        }
    }

    /// Lévy symbol `Ψ(u)` of `L(1)` at the truncated vector `u`.
    pub fn symbol_eval(&self, u: &[T]) -> Result<Complex<T>> {
        if u.len() > self.n_modes {
            return Err(Error::DimensionMismatch {
                what: "symbol argument",
                expected: self.n_modes,
                found: u.len(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("symbol argument"));
        }
        Ok(self.symbol_unchecked(u))
    }

    pub(crate) fn symbol_unchecked(&self, u: &[T]) -> Complex<T> {
        let re = match &self.kind {
            NoiseKind::SeriesIndependent(laws) => compensated_sum(u.iter().zip(laws).map(|(&x, law)| law.symbol(x))),
            NoiseKind::CanonicalStable { alpha } => {
                let sq = compensated_sum(u.iter().map(|&x| x * x));
                -sq.powf(*alpha / T::lit(2.0))
            }
        };
        let im = match &self.drift {
            Some(d) => compensated_sum(d.iter().zip(u).map(|(&a, &x)| a * x)),
            None => T::zero(),
        };
        Complex::new(re, im)
    }
}

/// Noise increments `(L(t_{j+1}) - L(t_j))(e_k)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTable<T> {
    grid: TimeGrid<T>,
    n_modes: usize,
    values: Vec<T>,
    seed: u64,
    stream_id: u64,
}

impl<T: Real> IncrementTable<T> {
    /// Wraps externally produced increments, row-major `[n_steps × n_modes]`.
    pub fn from_values(grid: TimeGrid<T>, n_modes: usize, values: Vec<T>, seed: u64, stream_id: u64) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("n_modes", "must be positive"));
        }
        if values.len() != grid.n_steps() * n_modes {
            return Err(Error::DimensionMismatch {
                what: "increment values",
                expected: grid.n_steps() * n_modes,
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            n_modes,
            values,
            seed,
            stream_id,
        })
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn get(&self, step: usize, mode: usize) -> T {
        self.values[step * self.n_modes + mode]
    }

    #[inline]
    pub fn row(&self, step: usize) -> &[T] {
        &self.values[step * self.n_modes..(step + 1) * self.n_modes]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Sums `factor` consecutive steps, holding the underlying path fixed.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let n = self.n_modes;
        let mut values = Vec::with_capacity(grid.n_steps() * n);
        for j in 0..grid.n_steps() {
            for k in 0..n {
                values.push(compensated_sum((0..factor).map(|i| self.get(j * factor + i, k))));
            }
        }
        Ok(Self {
            grid,
            n_modes: n,
            values,
            seed: self.seed,
            stream_id: self.stream_id,
        })
    }

    /// `L(t_j)(u)` for `j = 0..=N`, with `L(0) = 0`.
    pub fn cumulative(&self, u: &[T]) -> Result<Vec<T>> {
        if u.len() > self.n_modes {
            return Err(Error::DimensionMismatch {
                what: "test vector",
                expected: self.n_modes,
                found: u.len(),
            });
        }
        let mut out = Vec::with_capacity(self.n_steps() + 1);
        let mut acc = CompensatedSum::default();
        out.push(T::zero());
        for j in 0..self.n_steps() {
            acc.add(compensated_sum(self.row(j).iter().zip(u).map(|(&x, &w)| x * w)));
            out.push(acc.value());
        }
        Ok(out)
    }

    /// CSV dump: header `t_index,mode,increment`, row-major, modes 1-based,
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_index,mode,increment")?;
        for j in 0..self.n_steps() {
            for (k, x) in self.row(j).iter().enumerate() {
                writeln!(w, "{},{},{:.16e}", j, k + 1, x.as_f64())?;
            }
        }
        Ok(())
    }
}

/// Samples increments of the first `n_modes` coordinates on `grid`.
///
/// Series noise: mode `k` draws from its own stream `(seed, stream_id, k)`.
/// Canonical noise: the subordinator draws from the reserved lane and the
/// Gaussian factors of mode `k` from lane `k`, so the first `m` columns of an
/// `n`-mode table equal an `m`-mode table bit for bit.
pub fn sample_increments<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    grid: &TimeGrid<T>,
    n_modes: usize,
    seed: u64,
    stream_id: u64,
) -> Result<IncrementTable<T>> {
    if n_modes == 0 || n_modes > spec.n_modes() {
        return Err(invalid("n_modes", format!("must lie in 1..={}", spec.n_modes())));
    }
    let steps = grid.n_steps();
    let mut values = vec![T::zero(); steps * n_modes];
    match spec.kind() {
        NoiseKind::SeriesIndependent(laws) => {
            for (k, law) in laws.iter().take(n_modes).enumerate() {
                let mut r = rng::mode_stream(seed, stream_id, k);
                for j in 0..steps {
                    values[j * n_modes + k] = law.sample_increment(grid.dt(j), &mut r);
                }
            }
        }
        NoiseKind::CanonicalStable { alpha } => {
            let alpha = *alpha;
            check_alpha(alpha)?;
            let mut sub = rng::stream(seed, stream_id, rng::SUBORDINATOR_LANE);
            let mut lanes: Vec<StreamRng> = (0..n_modes).map(|k| rng::mode_stream(seed, stream_id, k)).collect();
            let gamma = alpha / T::lit(2.0);
            for j in 0..steps {
                let ds = grid.dt(j).powf(T::one() / gamma) * positive_stable_unchecked(gamma, &mut sub);
                let amp = (T::lit(2.0) * ds).sqrt();
                for (k, lane) in lanes.iter_mut().enumerate() {
                    values[j * n_modes + k] = amp * rng::standard_normal::<T, _>(lane);
                }
            }
        }
    }
    if spec.drift().is_some() {
        for j in 0..steps {
            let dt = grid.dt(j);
            for k in 0..n_modes {
                values[j * n_modes + k] = values[j * n_modes + k] + spec.drift_at(k) * dt;
            }
        }
    }
    IncrementTable::from_values(grid.clone(), n_modes, values, seed, stream_id)
}

/// One draw of a symmetric α-stable variable with characteristic function
/// `exp(-|scale β|^α)` (Chambers–Mallows–Stuck).
pub fn one_dim_stable_sample<T: Real, R: Rng + ?Sized>(alpha: T, scale: T, rng: &mut R) -> Result<T> {
    check_alpha(alpha)?;
    check_nonneg("scale", scale)?;
    Ok(stable_unchecked(alpha, scale, rng))
}

pub(crate) fn stable_unchecked<T: Real, R: Rng + ?Sized>(alpha: T, scale: T, rng: &mut R) -> T {
    if scale == T::zero() {
        return T::zero();
    }
    let v = T::PI() * (rng::open_uniform::<T, R>(rng) - T::lit(0.5));
    if alpha == T::one() {
        return scale * v.tan();
    }
    let w = rng::standard_exponential::<T, R>(rng);
    let x = (alpha * v).sin() / v.cos().powf(T::one() / alpha)
        * ((((T::one() - alpha) * v).cos()) / w).powf((T::one() - alpha) / alpha);
    scale * x
}

/// One draw of a positive γ-stable variable, `γ ∈ (0, 1)`, with Laplace
/// transform `E exp(-uS) = exp(-u^γ)` (Kanter's one-sided form of the
/// Chambers–Mallows–Stuck transform).
pub fn positive_stable_sample<T: Real, R: Rng + ?Sized>(gamma: T, rng: &mut R) -> Result<T> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(invalid("gamma", format!("must lie strictly inside (0, 1), got {gamma}")));
    }
    Ok(positive_stable_unchecked(gamma, rng))
}

fn positive_stable_unchecked<T: Real, R: Rng + ?Sized>(gamma: T, rng: &mut R) -> T {
    let u = T::PI() * rng::open_uniform::<T, R>(rng);
    let w = rng::standard_exponential::<T, R>(rng);
    let one = T::one();
    (gamma * u).sin() / u.sin().powf(one / gamma) * (((one - gamma) * u).sin() / w).powf((one - gamma) / gamma)
}

/// Standardizing constant `C_α` of the symmetric α-stable Lévy measure
/// `C_α α |x|^{-1-α} dx`, fixed by `∫ (1 - cos(βx)) C_α α |x|^{-1-α} dx = |β|^α`.
///
/// Evaluated numerically once per α and cached.
pub fn stable_levy_constant<T: Real>(alpha: T) -> T {
    T::lit(cached(alpha.as_f64(), 0, compute_stable_levy_constant))
}

/// `∫ (β² ∧ 1) C_α α |β|^{-1-α} dβ`, evaluated by dyadic quadrature toward
/// the singular endpoints of both pieces.
pub fn stable_clipped_constant<T: Real>(alpha: T) -> T {
    T::lit(cached(alpha.as_f64(), 1, |a| {
        let c = compute_stable_levy_constant(a);
        let inner = numerics::integrate_toward_zero(|x: f64| x.powf(1.0 - a), 1.0, 1e-13).unwrap_or(f64::NAN);
        // |β| > 1 mapped to w = 1/β ∈ (0, 1).
        let outer = numerics::integrate_toward_zero(|w: f64| w.powf(a - 1.0), 1.0, 1e-13).unwrap_or(f64::NAN);
        2.0 * c * a * (inner + outer)
    }))
}

fn cached(alpha: f64, which: u8, f: impl FnOnce(f64) -> f64) -> f64 {
    static CACHE: OnceLock<Mutex<Vec<(u64, u8, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let key = alpha.to_bits();
    if let Some(&(_, _, v)) = cache
        .lock()
        .expect("constant cache poisoned")
        .iter()
        .find(|(k, w, _)| *k == key && *w == which)
    {
        return v;
    }
    let v = f(alpha);
    cache.lock().expect("constant cache poisoned").push((key, which, v));
    v
}

fn compute_stable_levy_constant(alpha: f64) -> f64 {
    // ∫_0^∞ (1 - cos x) x^{-1-α} dx, split at 1.
    let mut near = 0.0;
    let mut fact = 1.0;
    for j in 1..40 {
        let two_j = 2 * j;
        fact *= (two_j - 1) as f64 * two_j as f64;
        let term = 1.0 / (fact * (two_j as f64 - alpha));
        near += if j % 2 == 1 { term } else { -term };
    }
    let far = 1.0 / alpha - cos_power_tail(1.0 + alpha);
    1.0 / (2.0 * alpha * (near + far))
}

/// `∫_1^∞ cos(x) x^{-p} dx` after four integrations by parts, leaving an
/// integrand decaying like `x^{-p-4}`.
fn cos_power_tail(p: f64) -> f64 {
    let (s1, c1) = (1.0f64.sin(), 1.0f64.cos());
    let far = p + 4.0;
    let limit = 2_000.0 * std::f64::consts::PI;
    let panels = 2_000;
    let h = (limit - 1.0) / panels as f64;
    let mut rest = CompensatedSum::default();
    for i in 0..panels {
        let a = 1.0 + h * i as f64;
        let piece = numerics::adaptive_simpson(|x: f64| x.cos() * x.powf(-far), a, a + h, 1e-14).unwrap_or(f64::NAN);
        rest.add(piece);
    }
    // I_c(q) = -sin 1 + q I_s(q+1),  I_s(q) = cos 1 - q I_c(q+1)
    let ic4 = rest.value();
    let is3 = c1 - (p + 3.0) * ic4;
    let ic2 = -s1 + (p + 2.0) * is3;
    let is1 = c1 - (p + 1.0) * ic2;
    -s1 + p * is1
}

/// Lévy-measure mass `μ({u : Σ_{k≤n} <u, B* h_k>² > c})` of the first `n`
/// projections under the diagonal operator `b`.
///
/// Series noise charges only the coordinate axes, so the mass is the sum of
/// one-dimensional tails at `√c / |b_k|`. Canonical noise is supported for
/// `|b_k| = 1` and returns the Gamma-ratio closed form.
pub fn levy_tail_mass<T: Real>(spec: &CylindricalNoiseSpec<T>, b: &[T], c: T, n: usize) -> Result<T> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(invalid("c", format!("must be positive and finite, got {c}")));
    }
    if n == 0 || n > spec.n_modes() || n > b.len() {
        return Err(invalid("n", format!("must lie in 1..={}", spec.n_modes().min(b.len()))));
    }
    let root = c.sqrt();
    match spec.kind() {
        NoiseKind::SeriesIndependent(laws) => Ok(compensated_sum(laws.iter().zip(b).take(n).map(|(law, &bk)| {
            if bk == T::zero() {
                T::zero()
            } else {
                law.tail_mass(root / bk.abs())
            }
        }))),
        NoiseKind::CanonicalStable { alpha } => {
            if b[..n].iter().any(|&bk| bk.abs() != T::one()) {
                return Err(Error::Unsupported(
                    "canonical tail mass is only available in closed form for |b_k| = 1".into(),
                ));
            }
            let a = *alpha;
            let half = T::lit(0.5);
            let nf = T::from_usize_lossy(n);
            let log_ratio = numerics::ln_gamma(half) + numerics::ln_gamma((nf + a) * half)
                - numerics::ln_gamma(nf * half)
                - numerics::ln_gamma((T::one() + a) * half);
            Ok(log_ratio.exp() / (c.powf(a) * stable_levy_constant(a)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ln_gamma;

    fn closed_form_constant(alpha: f64) -> f64 {
        // 1 / (2 Γ(1-α) cos(πα/2)), via Γ(1-α) = Γ(2-α)/(1-α) near α = 1.
        if (alpha - 1.0).abs() < 1e-12 {
            return 1.0 / std::f64::consts::PI;
        }
        let g = ln_gamma(2.0 - alpha).exp() / (1.0 - alpha);
        1.0 / (2.0 * g * (std::f64::consts::PI * alpha / 2.0).cos())
    }

    #[test]
    fn levy_constant_cauchy_case() {
        let c: f64 = stable_levy_constant(1.0);
        assert!((c - std::f64::consts::FRAC_1_PI).abs() < 1e-10, "{c}");
    }

    #[test]
    fn levy_constant_matches_closed_form() {
        for &a in &[0.3, 0.5, 0.9, 1.2, 1.5, 1.8, 1.95] {
            let c: f64 = stable_levy_constant(a);
            let want = closed_form_constant(a);
            assert!((c - want).abs() < 1e-8 * want, "alpha={a}: {c} vs {want}");
        }
    }

    #[test]
    fn clipped_constant_matches_closed_form() {
        // 4 C_α / (2 - α)
        for &a in &[0.5, 1.0, 1.5, 1.9] {
            let k: f64 = stable_clipped_constant(a);
            let want = 4.0 * closed_form_constant(a) / (2.0 - a);
            assert!((k - want).abs() < 1e-8 * want, "alpha={a}: {k} vs {want}");
        }
    }

    #[test]
    fn canonical_symbol_on_unit_vector() {
        let spec = CylindricalNoiseSpec::canonical(1.5f64, 4).unwrap();
        let u = [0.6, 0.8];
        let psi = spec.symbol_eval(&u).unwrap();
        assert!((psi.re + 1.0).abs() < 1e-15);
        assert_eq!(psi.im, 0.0);
    }

    #[test]
    fn symbol_at_zero_vanishes() {
        let laws = vec![
            ComponentLaw::stable(0.7, 2.0).unwrap(),
            ComponentLaw::gaussian(3.0).unwrap(),
            ComponentLaw::compound_poisson(2.0, 1.5).unwrap(),
        ];
        let spec = CylindricalNoiseSpec::series(laws, 3).unwrap().with_drift(vec![1.0, 2.0]).unwrap();
        assert_eq!(spec.symbol_eval(&[0.0, 0.0, 0.0]).unwrap(), Complex::new(0.0, 0.0));
        let can = CylindricalNoiseSpec::canonical(1.2f64, 2).unwrap();
        assert_eq!(can.symbol_eval(&[]).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn series_cauchy_symbol_is_l1_norm() {
        let laws = vec![ComponentLaw::stable(1.0f64, 1.0).unwrap(); 2];
        let spec = CylindricalNoiseSpec::series(laws, 2).unwrap();
        let psi = spec.symbol_eval(&[3.0, 4.0]).unwrap();
        assert!((psi.re + 7.0).abs() < 1e-14);
    }

    #[test]
    fn drift_adds_imaginary_part() {
        let spec = CylindricalNoiseSpec::canonical(1.0f64, 3).unwrap().with_drift(vec![2.0, -1.0]).unwrap();
        let psi = spec.symbol_eval(&[1.0, 1.0, 1.0]).unwrap();
        assert!((psi.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symbol_rejects_bad_input() {
        let spec = CylindricalNoiseSpec::canonical(1.0f64, 2).unwrap();
        assert!(spec.symbol_eval(&[1.0, 2.0, 3.0]).is_err());
        assert!(spec.symbol_eval(&[f64::NAN]).is_err());
    }

    #[test]
    fn alpha_domain_is_open() {
        assert!(ComponentLaw::stable(2.0f64, 1.0).is_err());
        assert!(ComponentLaw::stable(0.0f64, 1.0).is_err());
        assert!(CylindricalNoiseSpec::canonical(2.0f64, 1).is_err());
        let mut r = rng::stream(0, 0, 0);
        assert!(one_dim_stable_sample(2.0f64, 1.0, &mut r).is_err());
    }

    #[test]
    fn zero_scale_sample_is_zero() {
        let mut r = rng::stream(0, 0, 0);
        assert_eq!(one_dim_stable_sample(1.3f64, 0.0, &mut r).unwrap(), 0.0);
    }

    #[test]
    fn zero_variance_gaussian_increments_vanish() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(0.0f64).unwrap(); 3], 3).unwrap();
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let table = sample_increments(&spec, &grid, 3, 1, 2).unwrap();
        assert!(table.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn increments_are_reproducible() {
        let spec = CylindricalNoiseSpec::canonical(1.3f64, 5).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let a = sample_increments(&spec, &grid, 5, 11, 3).unwrap();
        let b = sample_increments(&spec, &grid, 5, 11, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_increments(&spec, &grid, 5, 11, 4).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn canonical_columns_are_projection_consistent() {
        let spec = CylindricalNoiseSpec::canonical(0.8f64, 8).unwrap();
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let wide = sample_increments(&spec, &grid, 8, 5, 1).unwrap();
        let narrow = sample_increments(&spec, &grid, 3, 5, 1).unwrap();
        for j in 0..16 {
            assert_eq!(&wide.row(j)[..3], narrow.row(j));
        }
    }

    #[test]
    fn coarsen_preserves_totals() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(1.0f64).unwrap(); 2], 2).unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let fine = sample_increments(&spec, &grid, 2, 3, 0).unwrap();
        let coarse = fine.coarsen(4).unwrap();
        let u = [1.0, -0.5];
        let a = fine.cumulative(&u).unwrap();
        let b = coarse.cumulative(&u).unwrap();
        assert!((a[8] - b[2]).abs() < 1e-14);
        assert!((a[4] - b[1]).abs() < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let grid = TimeGrid::uniform(1.0f64, 2).unwrap();
        let t = IncrementTable::from_values(grid, 2, vec![1.0, 2.0, 3.0, 0.1], 0, 0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "t_index,mode,increment");
        assert_eq!(lines[1], "0,1,1.0000000000000000e0");
        assert_eq!(lines[4], "1,2,1.0000000000000001e-1");
    }

    #[test]
    fn tail_mass_rejects_nonpositive_level() {
        let spec = CylindricalNoiseSpec::canonical(1.0f64, 4).unwrap();
        assert!(levy_tail_mass(&spec, &[1.0; 4], 0.0, 2).is_err());
    }

    #[test]
    fn gaussian_series_has_no_tail_mass() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(2.0f64).unwrap(); 6], 6).unwrap();
        for n in 1..=6 {
            for &c in &[0.01, 1.0, 100.0] {
                assert_eq!(levy_tail_mass(&spec, &[1.0; 6], c, n).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn series_cauchy_tail_mass() {
        // Cauchy Lévy measure dx/(πx²): mass of {|x| > √c} is 2/(π√c) per mode.
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(1.0f64, 1.0).unwrap(); 10], 10).unwrap();
        for &c in &[0.25, 1.0, 4.0] {
            let m = levy_tail_mass(&spec, &[1.0; 10], c, 7).unwrap();
            let want = 7.0 * 2.0 / (std::f64::consts::PI * c.sqrt());
            assert!((m - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn gamma_ratio_is_one_for_single_mode() {
        let spec = CylindricalNoiseSpec::canonical(1.5f64, 4).unwrap();
        let m = levy_tail_mass(&spec, &[1.0; 4], 1.0, 1).unwrap();
        assert!((m - 1.0 / stable_levy_constant(1.5f64)).abs() < 1e-10);
    }

    #[test]
    fn positive_stable_laplace_transform() {
        // E exp(-S) = exp(-1) for any γ.
        let mut r = rng::stream(9, 0, 0);
        for &g in &[0.25f64, 0.5, 0.75] {
            let m = 200_000;
            let mean = (0..m)
                .map(|_| (-positive_stable_sample(g, &mut r).unwrap()).exp())
                .sum::<f64>()
                / m as f64;
            assert!((mean - (-1.0f64).exp()).abs() < 0.005, "gamma={g}: {mean}");
        }
    }
}
