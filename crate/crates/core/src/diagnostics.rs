//! Distributional and pathwise diagnostics of simulated solutions.
//!
//! Monte Carlo estimators fan out over replicate stream ids `0..M` with
//! rayon; results are collected in replicate order and reduced with
//! compensated summation, so they do not depend on the thread count.

use num_complex::Complex;
use rayon::prelude::*;

use crate::convolution::{forcing_for, left_point_forcing, propagate, SolutionPath};
use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{sample_increments, ComponentLaw, CylindricalNoiseSpec, IncrementTable, NoiseKind};
use crate::numerics::{self, compensated_sum, CompensatedSum, DEFAULT_QUAD_TOL};
use crate::scalar::Real;
use crate::semigroup::SpectralOperatorPair;

/// Default CF tolerance before the Monte Carlo floor `3/√M`.
pub const DEFAULT_CF_TOLERANCE: f64 = 0.02;

/// 101 equispaced points on `[−5, 5]`.
pub fn default_beta_grid<T: Real>() -> Vec<T> {
    (0..101).map(|i| T::lit(-5.0 + 0.1 * i as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfComparison<T> {
    pub beta_grid: Vec<T>,
    pub empirical: Vec<Complex<T>>,
    pub analytic: Vec<Complex<T>>,
    pub sup_distance: T,
    pub n_samples: usize,
    /// `3/√M`
    pub standard_error_bound: T,
    pub tolerance: T,
}

impl<T: Real> CfComparison<T> {
    pub fn threshold(&self) -> T {
        self.tolerance.max(self.standard_error_bound)
    }

    pub fn passed(&self) -> bool {
        self.sup_distance <= self.threshold()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment<T> {
    /// `‖∫₀ᵗ T(s)Bã ds‖²`
    pub drift: T,
    /// `Σ_k b_k² var_k (1−e^{−2λ_k t})/(2λ_k)`
    pub gaussian: T,
    /// `Σ_k b_k² rate_k jump_std_k² (1−e^{−2λ_k t})/(2λ_k)`
    pub jump: T,
}

impl<T: Real> SecondMoment<T> {
    pub fn total(&self) -> T {
        self.drift + self.gaussian + self.jump
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentComparison<T> {
    pub t: T,
    pub analytic: SecondMoment<T>,
    pub empirical: T,
    pub std_error: T,
}

impl<T: Real> MomentComparison<T> {
    pub fn passed(&self) -> bool {
        (self.empirical - self.analytic.total()).abs() <= T::lit(3.0) * self.std_error
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub epsilon: T,
    pub mean: T,
    pub std_error: T,
}

/// `(mean, standard error of the mean)` of `xs`.
pub fn mean_and_se<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let var = compensated_sum(xs.iter().map(|&x| (x - mean) * (x - mean))) / (n - T::one());
    (mean, (var / n).sqrt())
}

/// True when each estimate at a smaller ε is at most the previous one plus
/// `k` combined standard errors. Estimates are sorted by decreasing ε.
pub fn nonincreasing_within<T: Real>(estimates: &[Estimate<T>], k: T) -> bool {
    let mut sorted = estimates.to_vec();
    sorted.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap_or(std::cmp::Ordering::Equal));
    sorted.windows(2).all(|w| {
        let band = k * (w[0].std_error * w[0].std_error + w[1].std_error * w[1].std_error).sqrt();
        w[1].mean <= w[0].mean + band
    })
}

/// `exp(∫₀ᵗ Ψ(B*T*(s)v) ds)`, the characteristic function of `⟨Y(t), v⟩`
/// for `y₀ = 0`, with absolute quadrature tolerance `quad_tol`.
pub fn analytic_cf<T: Real>(
    v: &[T],
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    quad_tol: T,
) -> Result<Complex<T>> {
    let exponent = cf_exponent(v, T::zero(), t, spec, pair, quad_tol)?;
    Ok(exponent.exp())
}

/// `∫_{t0}^{t1} Ψ(B*T*(s)v) ds`.
pub fn cf_exponent<T: Real>(
    v: &[T],
    t0: T,
    t1: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    quad_tol: T,
) -> Result<Complex<T>> {
    if v.len() > pair.n_modes() || v.len() > spec.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "test vector",
            expected: pair.n_modes().min(spec.n_modes()),
            found: v.len(),
        });
    }
    if !(t0 >= T::zero() && t1 >= t0) {
        return Err(invalid("t", format!("need 0 ≤ t0 ≤ t1, got [{t0}, {t1}]")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("test vector"));
    }
    if t1 == t0 {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let m = v.len();
    let mut u = vec![T::zero(); m];
    let mut eval = |s: T| -> Complex<T> {
        for k in 0..m {
            u[k] = pair.b()[k] * (-pair.lambdas()[k] * s).exp() * v[k];
        }
        spec.symbol_unchecked(&u)
    };
    // Real and imaginary parts are integrated separately, each to `quad_tol`.
    let re = numerics::adaptive_simpson(|s| eval(s).re, t0, t1, quad_tol)?;
    let has_drift = spec.drift().is_some();
    let im = if has_drift {
        numerics::adaptive_simpson(|s| eval(s).im, t0, t1, quad_tol)?
    } else {
        T::zero()
    };
    Ok(Complex::new(re, im))
}

/// Analytic CF of `⟨Y(t), v⟩` at each `β` of the grid.
pub fn analytic_cf_grid<T: Real>(
    v: &[T],
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    beta_grid: &[T],
    quad_tol: T,
) -> Result<Vec<Complex<T>>> {
    beta_grid
        .iter()
        .map(|&beta| {
            let bv: Vec<T> = v.iter().map(|&x| beta * x).collect();
            analytic_cf(&bv, t, spec, pair, quad_tol)
        })
        .collect()
}

/// `(1/M) Σ_m exp(iβx_m)` per `β`, and the uniform error bound `3/√M`.
pub fn empirical_cf<T: Real>(samples: &[T], beta_grid: &[T]) -> Result<(Vec<Complex<T>>, T)> {
    if samples.len() < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let m = T::from_usize_lossy(samples.len());
    let cf = beta_grid
        .par_iter()
        .map(|&beta| {
            let mut re = CompensatedSum::default();
            let mut im = CompensatedSum::default();
            for &x in samples {
                let (s, c) = (beta * x).sin_cos();
                re.add(c);
                im.add(s);
            }
            Complex::new(re.value() / m, im.value() / m)
        })
        .collect();
    Ok((cf, T::lit(3.0) / m.sqrt()))
}

pub fn sup_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(T::zero(), T::max)
}

/// `⟨Y(t_N), v⟩` for `M` replicates (`y₀ = 0`) on `grid`, replicate `r`
/// using stream id `r`. Only the modes that `v` touches are simulated.
pub fn sample_projections<T: Real>(
    v: &[T],
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    m: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let (spec, pair) = restrict(v.len(), spec, pair)?;
    let n = pair.n_modes();
    let zero = vec![T::zero(); n];
    (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let f = forcing_for(&spec, &pair, grid, seed, r)?;
            let y = propagate(&pair, &f, 0, grid.n_steps(), &zero)?;
            Ok(compensated_sum(y.iter().zip(v).map(|(&a, &b)| a * b)))
        })
        .collect()
}

fn restrict<T: Real>(
    n: usize,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
) -> Result<(CylindricalNoiseSpec<T>, SpectralOperatorPair<T>)> {
    if n == 0 {
        return Err(invalid("v", "test vector must be nonempty"));
    }
    if n > pair.n_modes() || n > spec.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "test vector",
            expected: pair.n_modes().min(spec.n_modes()),
            found: n,
        });
    }
    Ok((spec.truncated(n)?, pair.truncated(n)?))
}

/// Simulates `M` replicates of `⟨Y(t), v⟩` on a uniform grid of `steps`
/// steps over `[0, t]` and compares empirical and analytic CFs.
#[allow(clippy::too_many_arguments)]
pub fn cf_match<T: Real>(
    v: &[T],
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    m: usize,
    beta_grid: &[T],
    seed: u64,
    steps: usize,
    tolerance: T,
) -> Result<CfComparison<T>> {
    let grid = TimeGrid::uniform(t, steps)?;
    let samples = sample_projections(v, spec, pair, &grid, m, seed)?;
    compare(&samples, v, t, spec, pair, beta_grid, tolerance)
}

fn compare<T: Real>(
    samples: &[T],
    v: &[T],
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    beta_grid: &[T],
    tolerance: T,
) -> Result<CfComparison<T>> {
    let (empirical, bound) = empirical_cf(samples, beta_grid)?;
    let analytic = analytic_cf_grid(v, t, spec, pair, beta_grid, T::lit(DEFAULT_QUAD_TOL))?;
    Ok(CfComparison {
        beta_grid: beta_grid.to_vec(),
        sup_distance: sup_distance(&empirical, &analytic),
        empirical,
        analytic,
        n_samples: samples.len(),
        standard_error_bound: bound,
        tolerance,
    })
}

/// CF comparisons for left-point canonical paths on meshes `t/N` with
/// `N = finest_steps / 2^level`, coarsest first. All meshes reuse the
/// finest increments of each replicate, coarsened by summation.
#[allow(clippy::too_many_arguments)]
pub fn canonical_cf_refinement<T: Real>(
    v: &[T],
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    m: usize,
    beta_grid: &[T],
    seed: u64,
    finest_steps: usize,
    levels: u32,
) -> Result<Vec<CfComparison<T>>> {
    if !matches!(spec.kind(), NoiseKind::CanonicalStable { .. }) {
        return Err(Error::Unsupported("refinement study needs canonical noise".into()));
    }
    if !finest_steps.is_multiple_of(1usize << levels) {
        return Err(invalid("finest_steps", format!("must be divisible by 2^{levels}")));
    }
    let (spec, pair) = restrict(v.len(), spec, pair)?;
    let grid = TimeGrid::uniform(t, finest_steps)?;
    let n = pair.n_modes();
    let zero = vec![T::zero(); n];
    let per_replicate: Vec<Vec<T>> = (0..m as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<T>> {
            let fine = sample_increments(&spec, &grid, n, seed, r)?;
            (0..=levels)
                .map(|level| {
                    let inc = fine.coarsen(1usize << (levels - level))?;
                    let f = left_point_forcing(&pair, &inc)?;
                    let y = propagate(&pair, &f, 0, inc.n_steps(), &zero)?;
                    Ok(compensated_sum(y.iter().zip(v).map(|(&a, &b)| a * b)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    (0..=levels as usize)
        .map(|level| {
            let samples: Vec<T> = per_replicate.iter().map(|row| row[level]).collect();
            compare(&samples, v, t, &spec, &pair, beta_grid, T::lit(DEFAULT_CF_TOLERANCE))
        })
        .collect()
}

/// Three-term second moment `E‖Y(t)‖²` for `y₀ = 0`.
pub fn second_moment_analytic<T: Real>(t: T, spec: &CylindricalNoiseSpec<T>, pair: &SpectralOperatorPair<T>) -> Result<SecondMoment<T>> {
    if !(t >= T::zero() && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and nonnegative, got {t}")));
    }
    let laws = weak_second_moment_laws(spec)?;
    let n = pair.n_modes();
    if laws.len() < n {
        return Err(Error::DimensionMismatch {
            what: "noise modes",
            expected: n,
            found: laws.len(),
        });
    }
    let two = T::lit(2.0);
    let mut drift = CompensatedSum::default();
    let mut gaussian = CompensatedSum::default();
    let mut jump = CompensatedSum::default();
    for k in 0..n {
        let (l, b) = (pair.lambdas()[k], pair.b()[k]);
        let sq_time = if l > T::zero() { -(-two * l * t).exp_m1() / (two * l) } else { t };
        let time = if l > T::zero() { -(-l * t).exp_m1() / l } else { t };
        let d = spec.drift_at(k) * b * time;
        drift.add(d * d);
        match laws[k] {
            ComponentLaw::Gaussian { variance } => gaussian.add(b * b * variance * sq_time),
            ComponentLaw::CompoundPoissonGaussianJumps { rate, jump_std } => {
                jump.add(b * b * rate * jump_std * jump_std * sq_time)
            }
            ComponentLaw::StableSymmetric { .. } => {}
        }
    }
    Ok(SecondMoment {
        drift: drift.value(),
        gaussian: gaussian.value(),
        jump: jump.value(),
    })
}

fn weak_second_moment_laws<T: Real>(spec: &CylindricalNoiseSpec<T>) -> Result<&[ComponentLaw<T>]> {
    let laws = spec
        .laws()
        .ok_or_else(|| Error::InfiniteSecondMoment("canonical stable noise".into()))?;
    if let Some(k) = laws.iter().position(|l| !l.has_second_moment()) {
        return Err(Error::InfiniteSecondMoment(format!("mode {} is a nondegenerate stable law", k + 1)));
    }
    Ok(laws)
}

/// Monte Carlo `E‖Y(t)‖²` against the analytic formula. The series scheme
/// is exact, so a grid of `steps` steps is only needed for path output.
pub fn second_moment_empirical<T: Real>(
    t: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    m: usize,
    seed: u64,
    steps: usize,
) -> Result<MomentComparison<T>> {
    let analytic = second_moment_analytic(t, spec, pair)?;
    if m < 2 {
        return Err(invalid("m", "need at least two replicates"));
    }
    let grid = TimeGrid::uniform(t, steps)?;
    let zero = vec![T::zero(); pair.n_modes()];
    let values: Vec<T> = (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let f = forcing_for(spec, pair, &grid, seed, r)?;
            let y = propagate(pair, &f, 0, grid.n_steps(), &zero)?;
            Ok(compensated_sum(y.iter().map(|&x| x * x)))
        })
        .collect::<Result<_>>()?;
    let (empirical, std_error) = mean_and_se(&values);
    Ok(MomentComparison {
        t,
        analytic,
        empirical,
        std_error,
    })
}

/// Grid with nodes at `0`, `t` and every `t + ε`.
fn coupling_grid<T: Real>(t: T, epsilons: &[T], horizon: T) -> Result<(TimeGrid<T>, usize, Vec<usize>)> {
    if !(t > T::zero()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    if epsilons.iter().any(|&e| !(e >= T::zero())) {
        return Err(invalid("epsilons", "must be nonnegative"));
    }
    let max_eps = epsilons.iter().copied().fold(T::zero(), T::max);
    if t + max_eps > horizon * (T::one() + T::lit(1e-12)) {
        return Err(invalid("epsilons", format!("t + max ε = {} exceeds the horizon {horizon}", t + max_eps)));
    }
    let mut pts = vec![T::zero(), t];
    pts.extend(epsilons.iter().filter(|&&e| e > T::zero()).map(|&e| t + e));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let grid = TimeGrid::from_points(pts)?;
    let base = grid.index_of(t)?;
    let idx = epsilons.iter().map(|&e| grid.index_of(t + e)).collect::<Result<_>>()?;
    Ok((grid, base, idx))
}

/// Coupled estimates of `E‖Y(t+ε) − Y(t)‖²`.
#[allow(clippy::too_many_arguments)]
pub fn mean_square_modulus<T: Real>(
    t: T,
    epsilons: &[T],
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    y0: &[T],
    m: usize,
    seed: u64,
) -> Result<Vec<Estimate<T>>> {
    weak_second_moment_laws(spec)?;
    let (grid, base, idx) = coupling_grid(t, epsilons, pair.horizon())?;
    let samples = coupled_differences(spec, pair, &grid, base, &idx, y0, m, seed, |d: &[T], _| {
        compensated_sum(d.iter().map(|&x| x * x))
    })?;
    Ok(summarize(epsilons, &samples))
}

/// Coupled estimates of `P(|⟨Y(t+ε) − Y(t), v⟩| > δ)`.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_continuity_probe<T: Real>(
    t: T,
    epsilons: &[T],
    v: &[T],
    delta: T,
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    y0: &[T],
    m: usize,
    seed: u64,
) -> Result<Vec<Estimate<T>>> {
    if !(delta > T::zero()) {
        return Err(invalid("delta", "must be positive"));
    }
    if v.len() > pair.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "test vector",
            expected: pair.n_modes(),
            found: v.len(),
        });
    }
    let (grid, base, idx) = coupling_grid(t, epsilons, pair.horizon())?;
    let samples = coupled_differences(spec, pair, &grid, base, &idx, y0, m, seed, |d: &[T], _| {
        let p = compensated_sum(d.iter().zip(v).map(|(&a, &b)| a * b));
        if p.abs() > delta {
            T::one()
        } else {
            T::zero()
        }
    })?;
    Ok(summarize(epsilons, &samples))
}

/// Per replicate and per ε, `stat(Y(t+ε) − Y(t))` on shared randomness.
#[allow(clippy::too_many_arguments)]
fn coupled_differences<T: Real, F>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    base: usize,
    idx: &[usize],
    y0: &[T],
    m: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<Vec<T>>>
where
    F: Fn(&[T], usize) -> T + Sync,
{
    if y0.len() != pair.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: pair.n_modes(),
            found: y0.len(),
        });
    }
    if m < 2 {
        return Err(invalid("m", "need at least two replicates"));
    }
    (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let f = forcing_for(spec, pair, grid, seed, r)?;
            let yt = propagate(pair, &f, 0, base, y0)?;
            idx.iter()
                .enumerate()
                .map(|(i, &j)| {
                    let ye = propagate(pair, &f, base, j, &yt)?;
                    let d: Vec<T> = ye.iter().zip(&yt).map(|(&a, &b)| a - b).collect();
                    Ok(stat(&d, i))
                })
                .collect()
        })
        .collect()
}

fn summarize<T: Real>(epsilons: &[T], samples: &[Vec<T>]) -> Vec<Estimate<T>> {
    epsilons
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| {
            let col: Vec<T> = samples.iter().map(|row| row[i]).collect();
            let (mean, std_error) = mean_and_se(&col);
            Estimate { epsilon, mean, std_error }
        })
        .collect()
}

/// Trapezoidal `∫₀ᵀ ⟨Y(t), v⟩² dt` on the grid skeleton.
pub fn scalar_l2_path<T: Real>(path: &SolutionPath<T>, v: &[T]) -> Result<T> {
    let p = path.project(v)?;
    let grid = path.grid();
    let half = T::lit(0.5);
    Ok(compensated_sum(
        (0..grid.n_steps()).map(|j| half * grid.dt(j) * (p[j] * p[j] + p[j + 1] * p[j + 1])),
    ))
}

/// `max_j Σ_{k≤n} (b_k ΔL_j(e_k))²`.
pub fn jump_sup_statistic<T: Real>(increments: &IncrementTable<T>, b: &[T], n: usize) -> Result<T> {
    if n > increments.n_modes() || n > b.len() {
        return Err(invalid("n", format!("must not exceed {} modes", increments.n_modes().min(b.len()))));
    }
    Ok((0..increments.n_steps())
        .map(|j| {
            compensated_sum(increments.row(j)[..n].iter().zip(b).map(|(&x, &bk)| (bk * x) * (bk * x)))
        })
        .fold(T::zero(), T::max))
}

/// Median over seeds `0..seeds` (stream id 0) of the jump-sup statistic at
/// each `n`, all `n` sharing one increment table per seed.
pub fn jump_sup_medians<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    b: &[T],
    ns: &[usize],
    grid: &TimeGrid<T>,
    seeds: u64,
) -> Result<Vec<T>> {
    let n_max = ns.iter().copied().max().ok_or_else(|| invalid("ns", "must be nonempty"))?;
    let per_seed: Vec<Vec<T>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let inc = sample_increments(spec, grid, n_max, seed, 0)?;
            ns.iter().map(|&n| jump_sup_statistic(&inc, b, n)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..ns.len())
        .map(|i| {
            let col: Vec<T> = per_seed.iter().map(|r| r[i]).collect();
            numerics::median(&col).unwrap_or_else(T::nan)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::simulate;

    fn one_mode(l: f64) -> SpectralOperatorPair<f64> {
        SpectralOperatorPair::with_identity_b(vec![l], 10.0).unwrap()
    }

    #[test]
    fn analytic_cf_trivial_cases() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(1.5, 1.0).unwrap()], 1).unwrap();
        assert_eq!(analytic_cf(&[2.0], 0.0, &spec, &one_mode(1.0), 1e-10).unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(analytic_cf(&[0.0], 1.0, &spec, &one_mode(1.0), 1e-10).unwrap(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn analytic_cf_series_closed_form() {
        for &(alpha, lambda, sigma, b, t) in &[(1.5f64, 1.0f64, 1.0f64, 1.0f64, 1.0f64), (0.7, 3.0, 2.0, 0.5, 0.4), (1.9, 0.0, 1.0, 1.0, 2.0)] {
            let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(alpha, sigma).unwrap()], 1).unwrap();
            let pair = SpectralOperatorPair::new(vec![lambda], vec![b], 10.0).unwrap();
            for &beta in &[-3.0f64, 0.5, 2.0] {
                let time = if lambda > 0.0 { (1.0 - (-alpha * lambda * t).exp()) / (alpha * lambda) } else { t };
                let want = (-(sigma * b * beta).abs().powf(alpha) * time).exp();
                let got = analytic_cf(&[beta], t, &spec, &pair, 1e-10).unwrap();
                assert!((got.re - want).abs() < 1e-8 && got.im.abs() < 1e-15, "{alpha} {beta}");
            }
        }
    }

    #[test]
    fn analytic_cf_canonical_flat_spectrum() {
        let spec = CylindricalNoiseSpec::canonical(1.3, 3).unwrap();
        let pair = SpectralOperatorPair::with_identity_b(vec![0.0; 3], 5.0).unwrap();
        let v = [0.3, -1.0, 0.5];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let got = analytic_cf(&v, 2.0, &spec, &pair, 1e-10).unwrap();
        assert!((got.re - (-2.0 * norm.powf(1.3)).exp()).abs() < 1e-10);
    }

    #[test]
    fn cf_exponent_additive() {
        let spec = CylindricalNoiseSpec::canonical(1.5, 2).unwrap().with_drift(vec![0.3, 0.1]).unwrap();
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0, 2.0], 5.0).unwrap();
        let v = [1.0, 2.0];
        let whole = cf_exponent(&v, 0.0, 1.5, &spec, &pair, 1e-12).unwrap();
        let parts = cf_exponent(&v, 0.0, 0.6, &spec, &pair, 1e-12).unwrap() + cf_exponent(&v, 0.6, 1.5, &spec, &pair, 1e-12).unwrap();
        assert!((whole - parts).norm() < 1e-10);
        assert!(analytic_cf(&v, 1.5, &spec, &pair, 1e-10).unwrap().norm() <= 1.0);
    }

    #[test]
    fn empirical_cf_trivial_cases() {
        let beta = default_beta_grid::<f64>();
        let (cf, bound) = empirical_cf(&[0.0; 4], &beta).unwrap();
        assert!(cf.iter().all(|z| *z == Complex::new(1.0, 0.0)));
        assert!((bound - 1.5).abs() < 1e-15);
        let (cf, _) = empirical_cf(&[1.0, -1.0], &beta).unwrap();
        for (z, &b) in cf.iter().zip(&beta) {
            assert!((z.re - b.cos()).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
        assert!(empirical_cf::<f64>(&[], &beta).is_err());
    }

    #[test]
    fn second_moment_closed_forms() {
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0f64], 100.0).unwrap();
        let g = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(1.0).unwrap()], 1).unwrap();
        assert!((second_moment_analytic(60.0, &g, &pair).unwrap().total() - 0.5).abs() < 1e-15);
        let cp = CylindricalNoiseSpec::series(vec![ComponentLaw::compound_poisson(2.0, 3.0).unwrap()], 1).unwrap();
        assert!((second_moment_analytic(60.0, &cp, &pair).unwrap().total() - 9.0).abs() < 1e-12);
        let zero = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(0.0).unwrap()], 1).unwrap();
        assert_eq!(second_moment_analytic(1.0, &zero, &pair).unwrap().total(), 0.0);
        let st = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(1.0, 1.0).unwrap()], 1).unwrap();
        assert!(matches!(second_moment_analytic(1.0, &st, &pair), Err(Error::InfiniteSecondMoment(_))));
    }

    #[test]
    fn modulus_zero_noise_is_deterministic() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(0.0).unwrap(); 2], 2).unwrap();
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0, 3.0], 2.0).unwrap();
        let y0 = [1.0, -2.0];
        let est = mean_square_modulus(0.5, &[0.0, 0.25], &spec, &pair, &y0, 4, 1).unwrap();
        assert_eq!(est[0].mean, 0.0);
        let want: f64 = [(1.0, 1.0), (3.0, -2.0)]
            .iter()
            .map(|&(l, y): &(f64, f64)| (((-l * 0.75).exp() - (-l * 0.5).exp()) * y).powi(2))
            .sum();
        assert!((est[1].mean - want).abs() < 1e-14);
    }

    #[test]
    fn probe_zero_noise_indicator() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(1.0, 0.0).unwrap()], 1).unwrap();
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0], 2.0).unwrap();
        let est = stochastic_continuity_probe(0.5, &[0.0, 0.5], &[1.0], 0.1, &spec, &pair, &[1.0], 3, 0).unwrap();
        assert_eq!(est[0].mean, 0.0);
        // |e^{-1} − e^{-0.5}| ≈ 0.239 > 0.1
        assert_eq!(est[1].mean, 1.0);
    }

    #[test]
    fn l2_path_deterministic_decay() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(0.0).unwrap(); 2], 2).unwrap();
        let pair = SpectralOperatorPair::with_identity_b(vec![1.0, 2.0], 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 4000).unwrap();
        let path = simulate(&spec, &pair, &grid, &[1.0, 1.0], 0, 0).unwrap();
        let v = [0.5, 1.0];
        let want = 0.25 * (1.0 - (-2.0f64).exp()) / 2.0 + (1.0 - (-4.0f64).exp()) / 4.0;
        let cross = 2.0 * 0.5 * (1.0 - (-3.0f64).exp()) / 3.0;
        let got = scalar_l2_path(&path, &v).unwrap();
        assert!((got - (want + cross)).abs() < 1e-7, "{got}");
    }

    #[test]
    fn jump_sup_monotone_and_zero() {
        let spec = CylindricalNoiseSpec::canonical(1.2, 8).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let inc = sample_increments(&spec, &grid, 8, 3, 0).unwrap();
        let b = [1.0; 8];
        let mut last = 0.0;
        for n in 1..=8 {
            let s = jump_sup_statistic(&inc, &b, n).unwrap();
            assert!(s >= last);
            last = s;
        }
        let zero = IncrementTable::from_values(grid, 2, vec![0.0; 40], 0, 0).unwrap();
        assert_eq!(jump_sup_statistic(&zero, &b, 2).unwrap(), 0.0);
    }

    #[test]
    fn monotonicity_helper() {
        let e = |epsilon, mean| Estimate { epsilon, mean, std_error: 0.01 };
        assert!(nonincreasing_within(&[e(0.1, 0.5), e(0.2, 0.8), e(0.05, 0.3)], 2.0));
        assert!(!nonincreasing_within(&[e(0.1, 0.5), e(0.05, 0.6)], 2.0));
    }
}
