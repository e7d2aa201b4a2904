//! Numerical stochastic Fubini and integration-by-parts checks.
//!
//! `S` is a finite set with atomic weights `η(s)`. At a fixed grid and fixed
//! increments both sides of the Fubini identity are finite sums, so they
//! agree up to rounding for any integrand. The content under test is the
//! stability of the integral under the mode-truncated, piecewise-constant
//! approximations `g_{m,n}` as the partition is refined on one fixed path.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::convolution::riemann_stochastic_integral;
use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;
use crate::noise::IncrementTable;
use crate::numerics::{compensated_sum, CompensatedSum};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// Piecewise constant in `t` on the simulation grid.
    Simple,
    /// Finitely many jumps in `t` for each `s`.
    Regulated,
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularity::Simple => "simple",
            Regularity::Regulated => "regulated",
        })
    }
}

/// Evaluation rule `(s, t) ↦ g(s, t)`; may return fewer than `n_modes` coordinates.
pub type IntegrandFn<T> = Arc<dyn Fn(T, T) -> Vec<T> + Send + Sync>;

/// `g : S × [0, T] → U`, truncated to `n_modes` coordinates.
#[derive(Clone)]
pub struct TwoParameterIntegrand<T> {
    points: Vec<T>,
    weights: Vec<T>,
    n_modes: usize,
    regularity: Regularity,
    eval: IntegrandFn<T>,
}

impl<T: Real> fmt::Debug for TwoParameterIntegrand<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoParameterIntegrand")
            .field("points", &self.points)
            .field("weights", &self.weights)
            .field("n_modes", &self.n_modes)
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

impl<T: Real> TwoParameterIntegrand<T> {
    pub fn new<F>(points: Vec<T>, weights: Vec<T>, n_modes: usize, regularity: Regularity, eval: F) -> Result<Self>
    where
        F: Fn(T, T) -> Vec<T> + Send + Sync + 'static,
    {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "weights",
                expected: points.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w.is_finite() && w >= T::zero())) {
            return Err(invalid("weights", "must be finite and nonnegative"));
        }
        if points.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("integrand points"));
        }
        Ok(Self {
            points,
            weights,
            n_modes,
            regularity,
            eval: Arc::new(eval),
        })
    }

    #[inline]
    pub fn points(&self) -> &[T] {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// Same integrand with weights `c·η`.
    pub fn scaled_weights(&self, c: T) -> Result<Self> {
        if !(c.is_finite() && c >= T::zero()) {
            return Err(invalid("c", "weight scale must be finite and nonnegative"));
        }
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w = *w * c);
        Ok(out)
    }

    /// `g(s_i, t)` padded or cut to `n_modes` coordinates.
    pub fn value(&self, i: usize, t: T) -> Vec<T> {
        let mut v = (self.eval)(self.points[i], t);
        v.resize(self.n_modes, T::zero());
        v
    }

    /// `Σ_s η(s) g(s, t)`.
    pub fn weighted_sum(&self, t: T) -> Vec<T> {
        let mut acc = vec![CompensatedSum::default(); self.n_modes];
        for (i, &w) in self.weights.iter().enumerate() {
            for (a, x) in acc.iter_mut().zip(self.value(i, t)) {
                a.add(w * x);
            }
        }
        acc.iter().map(|a| a.value()).collect()
    }

    /// Left-point values `g(s_i, t_j)` on the steps of `grid`.
    pub fn left_point_values(&self, i: usize, grid: &TimeGrid<T>) -> Vec<Vec<T>> {
        let pts = grid.points();
        (0..grid.n_steps()).map(|j| self.value(i, pts[j])).collect()
    }
}

/// Approximation `g_{m,n}`: coordinates beyond `m` dropped, node values at
/// partition points and midpoint values on the open partition intervals.
pub fn build_g_mn<T: Real>(g: &TwoParameterIntegrand<T>, m: usize, partition: &TimeGrid<T>) -> Result<TwoParameterIntegrand<T>> {
    if m > g.n_modes() {
        return Err(invalid("m", format!("must not exceed {} modes", g.n_modes())));
    }
    let inner = g.eval.clone();
    let nodes = partition.points().to_vec();
    let tol = T::lit(1e-12) * partition.horizon();
    let eval = move |s: T, t: T| -> Vec<T> {
        let tq = piecewise_argument(&nodes, t, tol);
        let mut v = inner(s, tq);
        v.truncate(m);
        v
    };
    Ok(TwoParameterIntegrand {
        points: g.points.clone(),
        weights: g.weights.clone(),
        n_modes: g.n_modes,
        regularity: Regularity::Simple,
        eval: Arc::new(eval),
    })
}

/// Node if `t` is a partition point, otherwise the midpoint of its interval.
fn piecewise_argument<T: Real>(nodes: &[T], t: T, tol: T) -> T {
    let last = nodes[nodes.len() - 1];
    if t <= nodes[0] + tol {
        return nodes[0];
    }
    if t >= last - tol {
        return last;
    }
    let k = nodes.partition_point(|&x| x <= t);
    let (lo, hi) = (nodes[k - 1], nodes[k]);
    if (t - lo).abs() <= tol {
        lo
    } else if (hi - t).abs() <= tol {
        hi
    } else {
        (lo + hi) / T::lit(2.0)
    }
}

/// `max ‖g(s,t) − h(s,t)‖` over `S` and the points of `reference`.
pub fn sup_distance<T: Real>(g: &TwoParameterIntegrand<T>, h: &TwoParameterIntegrand<T>, reference: &TimeGrid<T>) -> Result<T> {
    if g.points() != h.points() || g.n_modes() != h.n_modes() {
        return Err(invalid("h", "integrands must share S and the mode count"));
    }
    let mut sup = T::zero();
    for i in 0..g.points().len() {
        for &t in reference.points() {
            let d = compensated_sum(g.value(i, t).iter().zip(h.value(i, t)).map(|(a, b)| (*a - b) * (*a - b))).sqrt();
            sup = sup.max(d);
        }
    }
    Ok(sup)
}

/// Both sides of the discretized Fubini identity on one increment table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FubiniSides<T> {
    /// `Σ_s η(s) ∫ g(s,t) dL(t)`
    pub lhs: T,
    /// `∫ Σ_s η(s) g(s,t) dL(t)`
    pub rhs: T,
}

impl<T: Real> FubiniSides<T> {
    pub fn residual(&self) -> T {
        (self.lhs - self.rhs).abs()
    }

    /// `|LHS − RHS| / (1 + |LHS|)`
    pub fn relative_residual(&self) -> T {
        self.residual() / (T::one() + self.lhs.abs())
    }
}

pub fn fubini_sides<T: Real>(g: &TwoParameterIntegrand<T>, increments: &IncrementTable<T>) -> Result<FubiniSides<T>> {
    if g.n_modes() > increments.n_modes() {
        return Err(Error::DimensionMismatch {
            what: "integrand modes",
            expected: increments.n_modes(),
            found: g.n_modes(),
        });
    }
    let grid = increments.grid();
    let mut lhs = CompensatedSum::default();
    for (i, &w) in g.weights().iter().enumerate() {
        lhs.add(w * riemann_stochastic_integral(&g.left_point_values(i, grid), increments)?);
    }
    let pts = grid.points();
    let summed: Vec<Vec<T>> = (0..grid.n_steps()).map(|j| g.weighted_sum(pts[j])).collect();
    let rhs = riemann_stochastic_integral(&summed, increments)?;
    Ok(FubiniSides { lhs: lhs.value(), rhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow<T> {
    pub mesh: T,
    pub residual: T,
}

/// Residuals of one check across meshes, coarsest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T> {
    pub check: String,
    pub rows: Vec<ResidualRow<T>>,
}

impl<T: Real> ResidualReport<T> {
    pub fn residuals(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.residual).collect()
    }

    pub fn max_residual(&self) -> T {
        self.rows.iter().map(|r| r.residual).fold(T::zero(), T::max)
    }

    /// CSV rows `check,mesh,residual` (no header).
    pub fn write_csv_rows<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(w, "{},{:.16e},{:.16e}", self.check, r.mesh.as_f64(), r.residual.as_f64())?;
        }
        Ok(())
    }
}

/// Refinement study on one path: for each level, `g_{m,n}` is built on the
/// fine grid coarsened by `2^{levels−level}` and its integral over the fine
/// increments is compared with the integral of `g` itself. Mode cutoff
/// follows the diagonal `m = min(n_modes, 2^level)`.
pub fn refinement_residuals<T: Real>(
    g: &TwoParameterIntegrand<T>,
    fine: &IncrementTable<T>,
    levels: u32,
) -> Result<ResidualReport<T>> {
    let grid = fine.grid();
    let reference = fubini_sides(g, fine)?.lhs;
    let mut rows = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        let partition = grid.coarsen(1usize << (levels - level))?;
        let m = g.n_modes().min(1usize << level);
        let approx = build_g_mn(g, m, &partition)?;
        let value = fubini_sides(&approx, fine)?.lhs;
        rows.push(ResidualRow {
            mesh: partition.mesh(),
            residual: (value - reference).abs(),
        });
    }
    Ok(ResidualReport {
        check: format!("fubini_{}", g.regularity()),
        rows,
    })
}

/// Fubini check on a fine path: exactness residual at each coarsened mesh
/// for simple integrands, `g_{m,n}` refinement residuals for regulated ones.
pub fn verify_fubini<T: Real>(g: &TwoParameterIntegrand<T>, fine: &IncrementTable<T>, levels: u32) -> Result<ResidualReport<T>> {
    match g.regularity() {
        Regularity::Regulated => refinement_residuals(g, fine, levels),
        Regularity::Simple => {
            let mut rows = Vec::with_capacity(levels as usize + 1);
            for level in 0..=levels {
                let inc = fine.coarsen(1usize << (levels - level))?;
                let sides = fubini_sides(g, &inc)?;
                rows.push(ResidualRow {
                    mesh: inc.grid().mesh(),
                    residual: sides.relative_residual(),
                });
            }
            Ok(ResidualReport {
                check: "fubini_simple".into(),
                rows,
            })
        }
    }
}

/// Terms of the discretized by-parts identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ByPartsSides<T> {
    /// `Σ_j τ(t_j) ΔL_j(u)`
    pub stochastic: T,
    /// `−Σ_j τ'(t_j) L(t_j)(u) Δ_j + τ(T) L(T)(u)`
    pub by_parts: T,
}

impl<T: Real> ByPartsSides<T> {
    pub fn residual(&self) -> T {
        (self.stochastic - self.by_parts).abs()
    }
}

pub fn by_parts_sides<T: Real, F, D>(tau: F, dtau: D, u: &[T], increments: &IncrementTable<T>) -> Result<ByPartsSides<T>>
where
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let grid = increments.grid();
    let pts = grid.points();
    let f: Vec<Vec<T>> = (0..grid.n_steps())
        .map(|j| u.iter().map(|&x| tau(pts[j]) * x).collect())
        .collect();
    let stochastic = riemann_stochastic_integral(&f, increments)?;
    let path = increments.cumulative(u)?;
    let n = grid.n_steps();
    let mut acc = CompensatedSum::default();
    for j in 0..n {
        acc.add(-dtau(pts[j]) * path[j] * grid.dt(j));
    }
    acc.add(tau(grid.horizon()) * path[n]);
    Ok(ByPartsSides {
        stochastic,
        by_parts: acc.value(),
    })
}

/// `D(Δ)` on `fine` coarsened by `2^{levels}, …, 2, 1`, coarsest first.
pub fn verify_integration_by_parts<T: Real, F, D>(
    tau: F,
    dtau: D,
    u: &[T],
    fine: &IncrementTable<T>,
    levels: u32,
) -> Result<ResidualReport<T>>
where
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let mut rows = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        let inc = fine.coarsen(1usize << (levels - level))?;
        let sides = by_parts_sides(&tau, &dtau, u, &inc)?;
        rows.push(ResidualRow {
            mesh: inc.grid().mesh(),
            residual: sides.residual(),
        });
    }
    Ok(ResidualReport {
        check: "integration_by_parts".into(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_increments, ComponentLaw, CylindricalNoiseSpec};

    fn gaussian_increments(n_modes: usize, steps: usize, seed: u64) -> IncrementTable<f64> {
        let spec = CylindricalNoiseSpec::series(vec![ComponentLaw::gaussian(1.0).unwrap(); n_modes], n_modes).unwrap();
        let grid = TimeGrid::uniform(1.0, steps).unwrap();
        sample_increments(&spec, &grid, n_modes, seed, 0).unwrap()
    }

    fn indicator() -> TwoParameterIntegrand<f64> {
        TwoParameterIntegrand::new(vec![0.25, 0.5, 0.75], vec![1.0, 2.0, 0.5], 2, Regularity::Regulated, |s, t| {
            vec![if t <= s { 1.0 } else { 0.0 }]
        })
        .unwrap()
    }

    #[test]
    fn simple_integrand_sides_agree() {
        let g = TwoParameterIntegrand::new(vec![0.1, 0.2], vec![0.3, 0.7], 2, Regularity::Simple, |s: f64, t: f64| {
            vec![s + t, (s * t).sin()]
        })
        .unwrap();
        let inc = gaussian_increments(2, 64, 1);
        let sides = fubini_sides(&g, &inc).unwrap();
        assert!(sides.relative_residual() <= 1e-12);
    }

    #[test]
    fn zero_weights_give_zero() {
        let g = indicator().scaled_weights(0.0).unwrap();
        let sides = fubini_sides(&g, &gaussian_increments(2, 16, 2)).unwrap();
        assert_eq!((sides.lhs, sides.rhs), (0.0, 0.0));
    }

    #[test]
    fn g_mn_fixed_point_zero_and_idempotent() {
        let partition = TimeGrid::uniform(1.0, 4).unwrap();
        let simple = TwoParameterIntegrand::new(vec![0.5], vec![1.0], 2, Regularity::Simple, |_, t: f64| {
            vec![(4.0 * t).floor().min(3.0)]
        })
        .unwrap();
        let reference = TimeGrid::uniform(1.0, 64).unwrap();
        let gmn = build_g_mn(&simple, 2, &partition).unwrap();
        assert_eq!(sup_distance(&simple, &gmn, &reference).unwrap(), 0.0);
        let zero = build_g_mn(&simple, 0, &partition).unwrap();
        assert!(zero.value(0, 0.3).iter().all(|&x| x == 0.0));
        let twice = build_g_mn(&gmn, 2, &partition).unwrap();
        assert_eq!(sup_distance(&twice, &gmn, &reference).unwrap(), 0.0);
    }

    #[test]
    fn g_mn_sup_distance_shrinks() {
        let g = TwoParameterIntegrand::new(vec![0.5, 1.0, 2.0], vec![1.0; 3], 4, Regularity::Regulated, |s, t: f64| {
            vec![(-s * t).exp()]
        })
        .unwrap();
        let reference = TimeGrid::uniform(1.0, 1024).unwrap();
        let mut last = f64::INFINITY;
        for level in 0..5u32 {
            let partition = TimeGrid::uniform(1.0, 2 << level).unwrap();
            let m = 4usize.min(1 << level);
            let d = sup_distance(&g, &build_g_mn(&g, m, &partition).unwrap(), &reference).unwrap();
            assert!(d < last, "level {level}: {d} vs {last}");
            last = d;
        }
    }

    #[test]
    fn homogeneity_in_weights() {
        let g = indicator();
        let inc = gaussian_increments(2, 32, 5);
        let a = fubini_sides(&g, &inc).unwrap();
        let b = fubini_sides(&g.scaled_weights(3.0).unwrap(), &inc).unwrap();
        assert!((b.lhs - 3.0 * a.lhs).abs() < 1e-12 && (b.rhs - 3.0 * a.rhs).abs() < 1e-12);
    }

    #[test]
    fn refinement_last_level_exact_when_nodes_align() {
        let inc = gaussian_increments(2, 64, 7);
        let report = refinement_residuals(&indicator(), &inc, 3).unwrap();
        assert_eq!(report.rows.len(), 4);
        // s ∈ {0.25, 0.5, 0.75} are nodes of every partition with at least 4 steps.
        assert!(report.max_residual() < 1e-12);
        let mut buf = Vec::new();
        report.write_csv_rows(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("fubini_regulated,"));
    }

    #[test]
    fn by_parts_constant_tau() {
        let inc = gaussian_increments(1, 32, 3);
        let sides = by_parts_sides(|_| 2.5, |_| 0.0, &[1.0], &inc).unwrap();
        assert!(sides.residual() <= 1e-12);
    }

    #[test]
    fn by_parts_deterministic_drift() {
        for &n in &[8usize, 16, 32] {
            let grid = TimeGrid::uniform(1.0, n).unwrap();
            let dt = 1.0 / n as f64;
            let inc = IncrementTable::from_values(grid, 1, vec![dt; n], 0, 0).unwrap();
            let sides = by_parts_sides(|t| t, |_| 1.0, &[1.0], &inc).unwrap();
            assert!((sides.stochastic - (0.5 - dt / 2.0)).abs() < 1e-12);
            assert!((sides.by_parts - (0.5 + dt / 2.0)).abs() < 1e-12);
        }
    }
}
