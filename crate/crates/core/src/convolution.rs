//! Mild-solution simulation `Y(t) = T(t)y₀ + ∫₀ᵗ T(t−s)B dL(s)` on the
//! spectral model, the flow operators `Φ_{s,t}`, and the left-point
//! elementary stochastic integral.
//!
//! Every scheme is a per-step affine recursion
//! `Y(t_{j+1}) = e^{−ΛΔ_j} Y(t_j) + ξ_j`. The forcing `ξ` is materialized as
//! a [`StepForcing`] table so the simulators and [`flow_apply`] run the same
//! recursion on the same randomness.
//!
//! * Series noise: `ξ_{j,k}` is drawn from the exact law of
//!   `∫_{t_j}^{t_{j+1}} e^{−λ_k(t_{j+1}−s)} b_k dℓ_k(s)`, so marginals do not
//!   depend on the mesh.
//! * Canonical noise: `ξ_j = e^{−ΛΔ_j} B ΔL_j` (left-point kernel), weak
//!   error `O(Δ)`.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
pub use crate::grid::TimeGrid;
use crate::noise::{self, ComponentLaw, CylindricalNoiseSpec, IncrementTable, NoiseKind};
use crate::numerics::{compensated_sum, CompensatedSum};
use crate::rng;
use crate::scalar::Real;
use crate::semigroup::{applicable_checks, overall, Decision, SpectralOperatorPair};

/// Additive part `ξ_j` of each step recursion, row-major `[n_steps × n_modes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepForcing<T> {
    grid: TimeGrid<T>,
    n_modes: usize,
    values: Vec<T>,
}

impl<T: Real> StepForcing<T> {
    pub fn from_values(grid: TimeGrid<T>, n_modes: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_steps() * n_modes {
            return Err(Error::DimensionMismatch {
                what: "forcing values",
                expected: grid.n_steps() * n_modes,
                found: values.len(),
            });
        }
        Ok(Self { grid, n_modes, values })
    }

    pub fn zero(grid: TimeGrid<T>, n_modes: usize) -> Self {
        let values = vec![T::zero(); grid.n_steps() * n_modes];
        Self { grid, n_modes, values }
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
    pub fn row(&self, step: usize) -> &[T] {
        &self.values[step * self.n_modes..(step + 1) * self.n_modes]
    }
}

/// Step-noise law parameters for one mode over a step of length `dt`.
pub fn exact_step_scale<T: Real>(law: &ComponentLaw<T>, lambda: T, b: T, dt: T) -> T {
    match *law {
        ComponentLaw::StableSymmetric { alpha, scale } => {
            let time = if lambda > T::zero() {
                -(-alpha * lambda * dt).exp_m1() / (alpha * lambda)
            } else {
                dt
            };
            (b * scale).abs() * time.powf(T::one() / alpha)
        }
        ComponentLaw::Gaussian { variance } => {
            let time = if lambda > T::zero() {
                -(-T::lit(2.0) * lambda * dt).exp_m1() / (T::lit(2.0) * lambda)
            } else {
                dt
            };
            (b * b * variance * time).sqrt()
        }
        // Not a single scale: see `sample_exact_step`.
        ComponentLaw::CompoundPoissonGaussianJumps { .. } => T::nan(),
    }
}

/// `∫_0^dt e^{−λ(dt−s)} ds`, with the `λ = 0` limit.
fn decayed_time<T: Real>(lambda: T, dt: T) -> T {
    if lambda > T::zero() {
        -(-lambda * dt).exp_m1() / lambda
    } else {
        dt
    }
}

/// One draw of `∫_0^dt e^{−λ(dt−s)} b dℓ(s)` for a driftless component.
pub fn sample_exact_step<T: Real, R: Rng + ?Sized>(law: &ComponentLaw<T>, lambda: T, b: T, dt: T, rng: &mut R) -> T {
    match *law {
        ComponentLaw::StableSymmetric { alpha, .. } => {
            noise::stable_unchecked(alpha, exact_step_scale(law, lambda, b, dt), rng)
        }
        ComponentLaw::Gaussian { .. } => exact_step_scale(law, lambda, b, dt) * rng::standard_normal::<T, R>(rng),
        ComponentLaw::CompoundPoissonGaussianJumps { rate, jump_std } => {
            let count = rng::poisson((rate * dt).as_f64(), rng);
            let mut acc = CompensatedSum::default();
            for _ in 0..count {
                let u = dt * rng::open_uniform::<T, R>(rng);
                let jump = jump_std * rng::standard_normal::<T, R>(rng);
                acc.add(jump * (-lambda * (dt - u)).exp());
            }
            b * acc.value()
        }
    }
}

/// Exact forcing for series noise. Mode `k` draws from stream
/// `(seed, stream_id, k)`; modes are generated in parallel.
pub fn series_forcing<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    seed: u64,
    stream_id: u64,
) -> Result<StepForcing<T>> {
    let laws = spec
        .laws()
        .ok_or_else(|| Error::Unsupported("exact series forcing needs series noise".into()))?;
    let n = pair.n_modes();
    check_modes(spec, n)?;
    let steps = grid.n_steps();
    let columns: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (law, lambda, b) = (&laws[k], pair.lambdas()[k], pair.b()[k]);
            let drift = spec.drift_at(k) * b;
            let mut r = rng::mode_stream(seed, stream_id, k);
            (0..steps)
                .map(|j| {
                    let dt = grid.dt(j);
                    let mut x = sample_exact_step(law, lambda, b, dt, &mut r);
                    if drift != T::zero() {
                        x = x + drift * decayed_time(lambda, dt);
                    }
                    x
                })
                .collect()
        })
        .collect();
    let mut values = vec![T::zero(); steps * n];
    for (k, col) in columns.iter().enumerate() {
        for (j, &x) in col.iter().enumerate() {
            values[j * n + k] = x;
        }
    }
    StepForcing::from_values(grid.clone(), n, values)
}

/// Left-point forcing `ξ_j = e^{−ΛΔ_j} B ΔL_j` from sampled increments.
pub fn left_point_forcing<T: Real>(pair: &SpectralOperatorPair<T>, increments: &IncrementTable<T>) -> Result<StepForcing<T>> {
    let n = pair.n_modes();
    if increments.n_modes() < n {
        return Err(Error::DimensionMismatch {
            what: "increment modes",
            expected: n,
            found: increments.n_modes(),
        });
    }
    let grid = increments.grid();
    let mut values = Vec::with_capacity(grid.n_steps() * n);
    for j in 0..grid.n_steps() {
        let dt = grid.dt(j);
        let row = increments.row(j);
        for k in 0..n {
            values.push((-pair.lambdas()[k] * dt).exp() * pair.b()[k] * row[k]);
        }
    }
    StepForcing::from_values(grid.clone(), n, values)
}

/// Runs the recursion from node `from` to node `to` starting at `v`.
pub fn propagate<T: Real>(
    pair: &SpectralOperatorPair<T>,
    forcing: &StepForcing<T>,
    from: usize,
    to: usize,
    v: &[T],
) -> Result<Vec<T>> {
    let n = pair.n_modes();
    if forcing.n_modes() != n || v.len() != n {
        return Err(Error::DimensionMismatch {
            what: "propagated state",
            expected: n,
            found: if forcing.n_modes() != n { forcing.n_modes() } else { v.len() },
        });
    }
    if from > to || to > forcing.grid().n_steps() {
        return Err(invalid("steps", format!("need from ≤ to ≤ {}, got {from}..{to}", forcing.grid().n_steps())));
    }
    let mut y = v.to_vec();
    for j in from..to {
        step(pair, forcing, j, &mut y);
    }
    Ok(y)
}

#[inline]
fn step<T: Real>(pair: &SpectralOperatorPair<T>, forcing: &StepForcing<T>, j: usize, y: &mut [T]) {
    let dt = forcing.grid().dt(j);
    for ((yk, &l), &xi) in y.iter_mut().zip(pair.lambdas()).zip(forcing.row(j)) {
        *yk = (-l * dt).exp() * *yk + xi;
    }
}

/// `Φ_{s,t}(v) = T(t−s)v + ∫_s^t T(t−r)B dL(r)` on one path.
pub fn flow_apply<T: Real>(pair: &SpectralOperatorPair<T>, s: T, t: T, v: &[T], forcing: &StepForcing<T>) -> Result<Vec<T>> {
    if s > t {
        return Err(invalid("s", format!("flow needs s ≤ t, got s = {s}, t = {t}")));
    }
    let grid = forcing.grid();
    propagate(pair, forcing, grid.index_of(s)?, grid.index_of(t)?, v)
}

/// `Σ_j ⟨f(t_j), ΔL_j⟩` in ascending `(j, k)` order.
pub fn riemann_stochastic_integral<T: Real, V: AsRef<[T]>>(f_values: &[V], increments: &IncrementTable<T>) -> Result<T> {
    if f_values.len() != increments.n_steps() {
        return Err(Error::DimensionMismatch {
            what: "integrand steps",
            expected: increments.n_steps(),
            found: f_values.len(),
        });
    }
    let mut acc = CompensatedSum::default();
    for (j, f) in f_values.iter().enumerate() {
        let f = f.as_ref();
        if f.len() > increments.n_modes() {
            return Err(Error::DimensionMismatch {
                what: "integrand modes",
                expected: increments.n_modes(),
                found: f.len(),
            });
        }
        acc.add(compensated_sum(f.iter().zip(increments.row(j)).map(|(&a, &x)| a * x)));
    }
    Ok(acc.value())
}

/// Run metadata carried by a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub scheme: &'static str,
    pub noise: String,
    pub operator: String,
    pub seed: u64,
    pub stream_id: u64,
}

/// Grid skeleton of a solution: `coeffs[j][k] = ⟨Y(t_j), h_k⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath<T> {
    grid: TimeGrid<T>,
    n_modes: usize,
    coeffs: Vec<T>,
    y0: Vec<T>,
    provenance: Provenance,
}

impl<T: Real> SolutionPath<T> {
    fn run(pair: &SpectralOperatorPair<T>, forcing: &StepForcing<T>, y0: &[T], provenance: Provenance) -> Self {
        let grid = forcing.grid().clone();
        let n = pair.n_modes();
        let mut coeffs = Vec::with_capacity((grid.n_steps() + 1) * n);
        let mut y = y0.to_vec();
        coeffs.extend_from_slice(&y);
        for j in 0..grid.n_steps() {
            step(pair, forcing, j, &mut y);
            coeffs.extend_from_slice(&y);
        }
        Self {
            grid,
            n_modes: n,
            coeffs,
            y0: y0.to_vec(),
            provenance,
        }
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
    pub fn y0(&self) -> &[T] {
        &self.y0
    }

    #[inline]
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// State at node `j`.
    #[inline]
    pub fn state(&self, j: usize) -> &[T] {
        &self.coeffs[j * self.n_modes..(j + 1) * self.n_modes]
    }

    #[inline]
    pub fn coeff(&self, j: usize, k: usize) -> T {
        self.coeffs[j * self.n_modes + k]
    }

    pub fn final_state(&self) -> &[T] {
        self.state(self.grid.n_steps())
    }

    pub fn state_at(&self, t: T) -> Result<&[T]> {
        Ok(self.state(self.grid.index_of(t)?))
    }

    /// `⟨Y(t_j), v⟩` for every node.
    pub fn project(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() > self.n_modes {
            return Err(Error::DimensionMismatch {
                what: "projection vector",
                expected: self.n_modes,
                found: v.len(),
            });
        }
        Ok((0..=self.grid.n_steps())
            .map(|j| compensated_sum(self.state(j).iter().zip(v).map(|(&y, &w)| y * w)))
            .collect())
    }

    /// CSV dump: `# key=value` provenance lines, header `t,mode,coeff`,
    /// modes 1-based, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = &self.provenance;
        writeln!(w, "# scheme={}", p.scheme)?;
        writeln!(w, "# noise={}", p.noise)?;
        writeln!(w, "# operator={}", p.operator)?;
        writeln!(w, "# seed={}", p.seed)?;
        writeln!(w, "# stream_id={}", p.stream_id)?;
        writeln!(w, "# n_modes={}", self.n_modes)?;
        writeln!(w, "# n_steps={}", self.grid.n_steps())?;
        writeln!(w, "t,mode,coeff")?;
        for (j, &t) in self.grid.points().iter().enumerate() {
            for (k, y) in self.state(j).iter().enumerate() {
                writeln!(w, "{:.16e},{},{:.16e}", t.as_f64(), k + 1, y.as_f64())?;
            }
        }
        Ok(())
    }
}

fn check_modes<T: Real>(spec: &CylindricalNoiseSpec<T>, n: usize) -> Result<()> {
    if spec.n_modes() < n {
        return Err(Error::DimensionMismatch {
            what: "noise modes",
            expected: n,
            found: spec.n_modes(),
        });
    }
    Ok(())
}

fn check_y0<T: Real>(pair: &SpectralOperatorPair<T>, y0: &[T]) -> Result<()> {
    if y0.len() != pair.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: pair.n_modes(),
            found: y0.len(),
        });
    }
    if y0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("y0"));
    }
    Ok(())
}

/// Short description of a spec for provenance lines.
pub fn describe_noise<T: Real>(spec: &CylindricalNoiseSpec<T>) -> String {
    let kind = match spec.kind() {
        NoiseKind::SeriesIndependent(laws) => {
            let first = laws.first().map(|l| format!("{l:?}")).unwrap_or_default();
            format!("series(first={first})")
        }
        NoiseKind::CanonicalStable { alpha } => format!("canonical(alpha={alpha})"),
    };
    let drift = if spec.drift().is_some() { " +drift" } else { "" };
    format!("{kind}{drift} n_modes={}", spec.n_modes())
}

fn describe_pair<T: Real>(pair: &SpectralOperatorPair<T>) -> String {
    let l = pair.lambdas();
    format!(
        "n_modes={} lambda_1={} lambda_n={} horizon={}",
        pair.n_modes(),
        l[0],
        l[l.len() - 1],
        pair.horizon()
    )
}

/// Exact-recursion path for series noise. Does not run the integrability
/// checks; see [`Simulator`] for the guarded entry point.
pub fn simulate_series<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    y0: &[T],
    seed: u64,
    stream_id: u64,
) -> Result<SolutionPath<T>> {
    check_y0(pair, y0)?;
    let forcing = series_forcing(spec, pair, grid, seed, stream_id)?;
    Ok(SolutionPath::run(
        pair,
        &forcing,
        y0,
        Provenance {
            scheme: "series_exact",
            noise: describe_noise(spec),
            operator: describe_pair(pair),
            seed,
            stream_id,
        },
    ))
}

/// Left-point path for canonical stable noise. Does not run the
/// integrability checks.
pub fn simulate_canonical<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    y0: &[T],
    seed: u64,
    stream_id: u64,
) -> Result<SolutionPath<T>> {
    if !matches!(spec.kind(), NoiseKind::CanonicalStable { .. }) {
        return Err(Error::Unsupported("left-point canonical scheme needs canonical noise".into()));
    }
    check_y0(pair, y0)?;
    check_modes(spec, pair.n_modes())?;
    let increments = noise::sample_increments(spec, grid, pair.n_modes(), seed, stream_id)?;
    let forcing = left_point_forcing(pair, &increments)?;
    Ok(SolutionPath::run(
        pair,
        &forcing,
        y0,
        Provenance {
            scheme: "canonical_left_point",
            noise: describe_noise(spec),
            operator: describe_pair(pair),
            seed,
            stream_id,
        },
    ))
}

/// Forcing the matching simulator uses for `(spec, seed, stream_id)`.
pub fn forcing_for<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    seed: u64,
    stream_id: u64,
) -> Result<StepForcing<T>> {
    match spec.kind() {
        NoiseKind::SeriesIndependent(_) => series_forcing(spec, pair, grid, seed, stream_id),
        NoiseKind::CanonicalStable { .. } => {
            check_modes(spec, pair.n_modes())?;
            let inc = noise::sample_increments(spec, grid, pair.n_modes(), seed, stream_id)?;
            left_point_forcing(pair, &inc)
        }
    }
}

/// Dispatches on the noise kind without integrability checks.
pub fn simulate<T: Real>(
    spec: &CylindricalNoiseSpec<T>,
    pair: &SpectralOperatorPair<T>,
    grid: &TimeGrid<T>,
    y0: &[T],
    seed: u64,
    stream_id: u64,
) -> Result<SolutionPath<T>> {
    match spec.kind() {
        NoiseKind::SeriesIndependent(_) => simulate_series(spec, pair, grid, y0, seed, stream_id),
        NoiseKind::CanonicalStable { .. } => simulate_canonical(spec, pair, grid, y0, seed, stream_id),
    }
}

/// Outcome of the pre-simulation integrability gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub decision: Decision,
    pub notes: Vec<String>,
}

impl fmt::Display for Admission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.decision)?;
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        Ok(())
    }
}

/// Simulation entry point that refuses non-integrable inputs unless forced.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    spec: CylindricalNoiseSpec<T>,
    pair: SpectralOperatorPair<T>,
    force: bool,
}

impl<T: Real> Simulator<T> {
    pub fn new(spec: CylindricalNoiseSpec<T>, pair: SpectralOperatorPair<T>) -> Result<Self> {
        check_modes(&spec, pair.n_modes())?;
        Ok(Self { spec, pair, force: false })
    }

    pub fn force(mut self, force: bool) -> Self {
        self.force = force;
        self
    }

    pub fn spec(&self) -> &CylindricalNoiseSpec<T> {
        &self.spec
    }

    pub fn pair(&self) -> &SpectralOperatorPair<T> {
        &self.pair
    }

    /// Runs the integrability checks. `NotIntegrable` is an error unless forced.
    pub fn admit(&self) -> Result<Admission> {
        let verdicts = applicable_checks(&self.spec, &self.pair)?;
        let decision = overall(&verdicts);
        let mut notes: Vec<String> = verdicts
            .iter()
            .map(|(name, v)| format!("{name}: {} ({})", v.decision, v.detail))
            .collect();
        if let Some(w) = self.pair.spectral_warning() {
            notes.push(w);
        }
        if decision == Decision::NotIntegrable && !self.force {
            return Err(Error::NotIntegrable(notes.join("; ")));
        }
        Ok(Admission { decision, notes })
    }

    pub fn run(&self, grid: &TimeGrid<T>, y0: &[T], seed: u64, stream_id: u64) -> Result<(SolutionPath<T>, Admission)> {
        let admission = self.admit()?;
        let path = simulate(&self.spec, &self.pair, grid, y0, seed, stream_id)?;
        Ok((path, admission))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(lambdas: Vec<f64>) -> SpectralOperatorPair<f64> {
        SpectralOperatorPair::with_identity_b(lambdas, 1.0).unwrap()
    }

    #[test]
    fn stable_step_scale_examples() {
        let law = ComponentLaw::stable(1.0, 1.0).unwrap();
        assert!((exact_step_scale(&law, 1.0, 1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let law = ComponentLaw::stable(1.5, 2.0).unwrap();
        let s = exact_step_scale(&law, 0.0, 0.5, 0.25);
        assert!((s - 0.25f64.powf(1.0 / 1.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_is_deterministic_decay() {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::stable(1.2, 0.0).unwrap(); 3], 3).unwrap();
        let p = pair(vec![0.0, 1.0, 4.0]);
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let path = simulate_series(&spec, &p, &grid, &[1.0, 2.0, 3.0], 1, 0).unwrap();
        for (j, &t) in grid.points().iter().enumerate() {
            let want = p.semigroup_apply(t, &[1.0, 2.0, 3.0]).unwrap();
            for k in 0..3 {
                assert!((path.coeff(j, k) - want[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn flow_identity_and_composition() {
        let spec = CylindricalNoiseSpec::canonical(1.5, 4).unwrap();
        let p = pair(vec![1.0, 2.0, 3.0, 4.0]);
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let f = forcing_for(&spec, &p, &grid, 3, 1).unwrap();
        let v = [0.5, -1.0, 2.0, 0.0];
        assert_eq!(flow_apply(&p, 0.25, 0.25, &v, &f).unwrap(), v.to_vec());
        let mid = flow_apply(&p, 0.125, 0.5, &v, &f).unwrap();
        let two = flow_apply(&p, 0.5, 0.875, &mid, &f).unwrap();
        let one = flow_apply(&p, 0.125, 0.875, &v, &f).unwrap();
        for (a, b) in two.iter().zip(&one) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(flow_apply(&p, 0.5, 0.25, &v, &f).is_err());
        assert!(flow_apply(&p, 0.3, 0.5, &v, &f).is_err());
    }

    #[test]
    fn path_matches_flow_from_zero() {
        let laws = vec![
            ComponentLaw::gaussian(1.0).unwrap(),
            ComponentLaw::compound_poisson(2.0, 0.5).unwrap(),
        ];
        let spec = CylindricalNoiseSpec::series(laws, 2).unwrap().with_drift(vec![1.0, -1.0]).unwrap();
        let p = pair(vec![1.0, 0.0]);
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let path = simulate(&spec, &p, &grid, &[0.3, 0.1], 9, 2).unwrap();
        let f = forcing_for(&spec, &p, &grid, 9, 2).unwrap();
        let y = flow_apply(&p, 0.0, 1.0, &[0.3, 0.1], &f).unwrap();
        assert_eq!(y, path.final_state().to_vec());
    }

    #[test]
    fn riemann_integral_basics() {
        let spec = CylindricalNoiseSpec::canonical(1.0, 2).unwrap();
        let grid = TimeGrid::uniform(1.0, 5).unwrap();
        let inc = noise::sample_increments(&spec, &grid, 2, 4, 0).unwrap();
        let zero = vec![vec![0.0; 2]; 5];
        assert_eq!(riemann_stochastic_integral(&zero, &inc).unwrap(), 0.0);
        let e1 = vec![vec![1.0f64]; 5];
        let total = inc.cumulative(&[1.0]).unwrap()[5];
        assert!((riemann_stochastic_integral(&e1, &inc).unwrap() - total as f64).abs() < 1e-12);
        assert!(riemann_stochastic_integral(&e1[..4], &inc).is_err());
    }

    #[test]
    fn csv_has_provenance_and_rows() {
        let spec = CylindricalNoiseSpec::canonical(1.0, 2).unwrap();
        let p = pair(vec![1.0, 4.0]);
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let path = simulate_canonical(&spec, &p, &grid, &[0.0, 0.0], 1, 0).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# scheme=canonical_left_point\n"));
        assert!(text.contains("\nt,mode,coeff\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 2);
    }

    #[test]
    fn simulator_refuses_divergent_without_force() {
        let laws = vec![ComponentLaw::stable(1.0, 1.0).unwrap(); 4096];
        let spec = CylindricalNoiseSpec::series(laws, 4096).unwrap();
        let lambdas: Vec<f64> = (1..=4096).map(|k| k as f64).collect();
        let sim = Simulator::new(spec, pair(lambdas)).unwrap();
        assert!(matches!(sim.admit(), Err(Error::NotIntegrable(_))));
        let sim = sim.force(true);
        assert_eq!(sim.admit().unwrap().decision, Decision::NotIntegrable);
    }

    #[test]
    fn mode_count_mismatch_rejected() {
        let spec = CylindricalNoiseSpec::canonical(1.0, 2).unwrap();
        let p = pair(vec![1.0, 2.0, 3.0]);
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        assert!(simulate_canonical(&spec, &p, &grid, &[0.0; 3], 1, 0).is_err());
        let spec = CylindricalNoiseSpec::canonical(1.0, 3).unwrap();
        assert!(simulate_canonical(&spec, &p, &grid, &[0.0; 2], 1, 0).is_err());
    }
}
