//! Self-consistent price trajectory of a slow latent book under a constant
//! rate metaorder, and the crossover scaling function built from it.
//!
//! The displacement `y(t)` of the price solves
//!
//! ```text
//! y(t) = (m / L) ∫_0^t ds / sqrt(4 π D (t - s)) · exp(-(y(t) - y(s))² / (4 D (t - s)))
//! ```
//!
//! and the impact is `I = y(T) = sqrt(D Q / J) F(eta)` with `eta = Q / (J T)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{self, exp, ln, sqrt, MonotoneCubic};
use crate::params::{participation_rate, BookParams, MetaorderSpec};
use crate::{Error, Result};

pub const MIN_STEPS: usize = 50;
pub const MAX_TOL: f64 = 1e-4;
pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;
/// Exponent beyond which older history segments are dropped.
const KERNEL_CUTOFF: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySolution {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    /// Every node met the residual tolerance.
    pub converged: bool,
    /// Root-finder iterations summed over all nodes.
    pub iterations: usize,
}

impl TrajectorySolution {
    /// Final displacement `y(T)`.
    pub fn impact(&self) -> f64 {
        self.y[self.y.len() - 1]
    }
}

/// Exponent increment per sub-segment when a segment is refined.
const REFINE_STEP: f64 = 0.25;

/// Nodes uniform in `sqrt(t)`: `t_k = T (k / n)²`.
struct Nodes {
    times: Vec<f64>,
    /// `n / sqrt(T)`, maps a time to its fractional node index.
    index_scale: f64,
}

impl Nodes {
    fn new(horizon: f64, n_steps: usize) -> Self {
        let times = (0..=n_steps)
            .map(|k| {
                let s = k as f64 / n_steps as f64;
                horizon * s * s
            })
            .collect();
        Self { times, index_scale: n_steps as f64 / sqrt(horizon) }
    }

    /// History integral at node `k` for a trial value `y` of `y(t_k)`,
    /// without the `m / L` prefactor.
    ///
    /// Product integration: on every segment the exponent is interpolated
    /// linearly in `u = t_k - s` and the segment is integrated exactly,
    /// singularity included. Segments across which the exponent changes by
    /// more than `REFINE_STEP` are split at exponent levels, with `y`
    /// interpolated linearly in the node index.
    fn history(&self, ys: &[f64], k: usize, y: f64, d: f64) -> f64 {
        let times = &self.times;
        let tk = times[k];
        let mut total = 0.0;
        let (mut ua, mut ga) = (0.0, 0.0);
        for j in (0..k).rev() {
            // G grows with u for a monotone concave path; later segments vanish.
            if ga > KERNEL_CUTOFF {
                break;
            }
            let ub = tk - times[j];
            let dy = y - ys[j];
            let gb = dy * dy / (4.0 * d * ub);
            if gb - ga > REFINE_STEP {
                let y_near = if j + 1 == k { y } else { ys[j + 1] };
                total += self.refined_segment(j, ys[j], y_near, y, d, (ua, ga), (ub, gb));
            } else {
                total += math::sqrt_kernel_integral(ua, ub, ga, gb);
            }
            ua = ub;
            ga = gb;
        }
        total / sqrt(4.0 * PI * d)
    }

    #[allow(clippy::too_many_arguments)]
    fn refined_segment(
        &self,
        j: usize,
        y_far: f64,
        y_near: f64,
        y: f64,
        d: f64,
        (ua, ga): (f64, f64),
        (ub, gb): (f64, f64),
    ) -> f64 {
        let tk = ua + self.times[j + 1];
        let top = gb.min(KERNEL_CUTOFF);
        let pieces = ((top - ga) / REFINE_STEP) as usize;
        let mut total = 0.0;
        let (mut u0, mut g0) = (ua, ga);
        for i in 1..=pieces {
            let level = ga + REFINE_STEP * i as f64;
            let u = ua + (ub - ua) * (level - ga) / (gb - ga);
            let theta = (sqrt(tk - u) * self.index_scale - j as f64).clamp(0.0, 1.0);
            let ys = y_far + theta * (y_near - y_far);
            let dy = y - ys;
            let g = dy * dy / (4.0 * d * u);
            total += math::sqrt_kernel_integral(u0, u, g0, g);
            u0 = u;
            g0 = g;
        }
        total + math::sqrt_kernel_integral(u0, ub, g0, gb)
    }
}

/// Time-marching solution of the self-consistent trajectory on nodes uniform
/// in `sqrt(t)`.
pub fn solve_trajectory(
    params: &BookParams,
    spec: &MetaorderSpec,
    n_steps: usize,
    tol: f64,
) -> Result<TrajectorySolution> {
    if n_steps < MIN_STEPS {
        return Err(Error::invalid("n_steps", "must be >= 50"));
    }
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(Error::invalid("tol", "must lie in (0, 1e-4]"));
    }
    let nodes = Nodes::new(spec.duration(), n_steps);
    let mut ys = alloc::vec![0.0; n_steps + 1];
    let amplitude = spec.rate() / params.slope();
    if amplitude == 0.0 {
        return Ok(TrajectorySolution { times: nodes.times, y: ys, converged: true, iterations: 0 });
    }
    let d = params.d();
    let mut converged = true;
    let mut iterations = 0;

    for k in 1..=n_steps {
        let residual = |y: f64, ys: &[f64]| y - amplitude * nodes.history(ys, k, y, d);
        let mut lo = ys[k - 1];
        let mut f_lo = residual(lo, &ys);
        if f_lo > 0.0 {
            lo = 0.0;
            f_lo = residual(lo, &ys);
        }
        if !f_lo.is_finite() {
            return Err(Error::NonFinite("trajectory kernel"));
        }
        let mut hi = lo + (lo - f_lo).max(f64::MIN_POSITIVE);
        let mut f_hi = residual(hi, &ys);
        let mut expansions = 0;
        while f_hi < 0.0 {
            if expansions == 60 || !f_hi.is_finite() {
                return Err(Error::NonFinite("trajectory bracket"));
            }
            hi = lo + 2.0 * (hi - lo);
            f_hi = residual(hi, &ys);
            expansions += 1;
        }
        let root = math::brent(
            |y| residual(y, &ys),
            lo,
            hi,
            f_lo,
            f_hi,
            |y, fy| math::abs(fy) <= tol * math::abs(y),
            MAX_ITER,
        );
        if !root.x.is_finite() {
            return Err(Error::NonFinite("trajectory iterate"));
        }
        converged &= root.converged;
        iterations += root.iterations;
        ys[k] = root.x;
    }

    let sign = spec.side().sign();
    if sign < 0.0 {
        ys.iter_mut().for_each(|y| *y = -*y);
    }
    Ok(TrajectorySolution { times: nodes.times, y: ys, converged, iterations })
}

/// `F(eta)` from the nondimensional problem `D = L = T = 1`, `m = eta`.
pub fn scaling_function(eta: f64, n_steps: usize, tol: f64) -> Result<f64> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", "must be finite and > 0"));
    }
    let unit = BookParams::new(1.0, 1.0, 1.0)?;
    let spec = MetaorderSpec::buy(eta, 1.0)?;
    let solution = solve_trajectory(&unit, &spec, n_steps, tol)?;
    Ok(solution.impact() / sqrt(eta))
}

/// Anything that evaluates the crossover function `F(eta)`.
pub trait ScalingFn {
    fn value(&self, eta: f64) -> f64;
}

impl<T: ScalingFn + ?Sized> ScalingFn for &T {
    fn value(&self, eta: f64) -> f64 {
        (**self).value(eta)
    }
}

/// Solves the trajectory on every call. Returns NaN where the solver fails.
#[derive(Debug, Clone, Copy)]
pub struct DirectScaling {
    pub n_steps: usize,
    pub tol: f64,
}

impl Default for DirectScaling {
    fn default() -> Self {
        Self { n_steps: DEFAULT_STEPS, tol: DEFAULT_TOL }
    }
}

impl ScalingFn for DirectScaling {
    fn value(&self, eta: f64) -> f64 {
        if eta == 0.0 {
            return 0.0;
        }
        scaling_function(eta, self.n_steps, self.tol).unwrap_or(f64::NAN)
    }
}

/// The two closed-form limits of `F`.
pub fn small_eta_asymptote(eta: f64) -> f64 {
    sqrt(eta / PI)
}

pub const LARGE_ETA_PLATEAU: f64 = core::f64::consts::SQRT_2;

pub const TABLE_POINTS: usize = 200;
pub const TABLE_ETA_MIN: f64 = 1e-6;
pub const TABLE_ETA_MAX: f64 = 1e6;

/// Log-spaced participation rates, endpoints included.
pub fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (ln(lo), ln(hi));
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                exp(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Memoised `F` on a log grid with shape-preserving interpolation of
/// `ln F` against `ln eta`. Outside the grid the asymptotic forms are
/// continued from the end values.
#[derive(Debug, Clone)]
pub struct ScalingTable {
    interp: MonotoneCubic,
    eta_min: f64,
    eta_max: f64,
    f_min: f64,
    f_max: f64,
}

impl ScalingTable {
    /// Sequential build over the default grid.
    pub fn build(n_steps: usize, tol: f64) -> Result<Self> {
        let etas = log_grid(TABLE_POINTS, TABLE_ETA_MIN, TABLE_ETA_MAX);
        let values = etas
            .iter()
            .map(|&eta| scaling_function(eta, n_steps, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(&etas, &values)
    }

    /// Builds the table from precomputed `(eta, F)` samples.
    pub fn from_samples(etas: &[f64], values: &[f64]) -> Result<Self> {
        if etas.len() != values.len() || etas.len() < 2 {
            return Err(Error::invalid("samples", "need matching eta and F arrays of length >= 2"));
        }
        if values.iter().chain(etas).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("samples", "eta and F must be finite and > 0"));
        }
        let xs = etas.iter().map(|&e| ln(e)).collect();
        let ys = values.iter().map(|&f| ln(f)).collect();
        let interp = MonotoneCubic::new(xs, ys)?;
        Ok(Self {
            interp,
            eta_min: etas[0],
            eta_max: etas[etas.len() - 1],
            f_min: values[0],
            f_max: values[values.len() - 1],
        })
    }

    pub fn eta_range(&self) -> (f64, f64) {
        (self.eta_min, self.eta_max)
    }
}

impl ScalingFn for ScalingTable {
    fn value(&self, eta: f64) -> f64 {
        if !(eta > 0.0) {
            return 0.0;
        }
        if eta < self.eta_min {
            self.f_min * sqrt(eta / self.eta_min)
        } else if eta > self.eta_max {
            self.f_max
        } else {
            exp(self.interp.eval(ln(eta)))
        }
    }
}

/// Impact `sign · sqrt(D Q / J) · F(Q / (J T))` of a single book.
pub fn impact<F: ScalingFn>(params: &BookParams, spec: &MetaorderSpec, scaling: &F) -> f64 {
    if spec.volume() == 0.0 {
        return 0.0;
    }
    let j = params.transaction_rate();
    let eta = participation_rate(spec, j);
    spec.side().sign() * sqrt(params.d() * spec.volume() / j) * scaling.value(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Side;

    #[test]
    fn zero_rate_gives_zero_path() {
        let p = BookParams::new(1.0, 1.0, 1.0).unwrap();
        let sol = solve_trajectory(&p, &MetaorderSpec::buy(0.0, 1.0).unwrap(), 60, 1e-8).unwrap();
        assert!(sol.converged);
        assert!(sol.y.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn rejects_bad_discretisation() {
        let p = BookParams::new(1.0, 1.0, 1.0).unwrap();
        let s = MetaorderSpec::buy(1.0, 1.0).unwrap();
        assert!(solve_trajectory(&p, &s, 49, 1e-8).is_err());
        assert!(solve_trajectory(&p, &s, 60, 1e-3).is_err());
        assert!(solve_trajectory(&p, &s, 60, 0.0).is_err());
        assert!(scaling_function(0.0, 60, 1e-8).is_err());
    }

    #[test]
    fn trajectory_is_monotone_and_starts_at_zero() {
        let p = BookParams::new(0.7, 0.01, 0.3).unwrap();
        for q in [1e-3, 0.5, 40.0] {
            let sol = solve_trajectory(&p, &MetaorderSpec::buy(q, 2.0).unwrap(), 80, 1e-10).unwrap();
            assert!(sol.converged);
            assert_eq!(sol.y[0], 0.0);
            assert!(sol.y.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn sell_mirrors_buy() {
        let p = BookParams::new(1.0, 1.0, 1.0).unwrap();
        let buy = MetaorderSpec::buy(2.0, 1.0).unwrap();
        let a = solve_trajectory(&p, &buy, 60, 1e-10).unwrap();
        let b = solve_trajectory(&p, &buy.with_side(Side::Sell), 60, 1e-10).unwrap();
        assert!(a.y.iter().zip(&b.y).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn small_eta_limit_of_trajectory() {
        let p = BookParams::new(2.0, 1.0, 3.0).unwrap();
        let spec = MetaorderSpec::buy(1e-4, 0.5).unwrap();
        let sol = solve_trajectory(&p, &spec, 100, 1e-10).unwrap();
        let expected = spec.rate() / p.slope() * sqrt(spec.duration() / (PI * p.d()));
        assert!((sol.impact() / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn table_reproduces_samples_and_extends_asymptotically() {
        let etas = log_grid(5, 1e-2, 1e2);
        let vals: Vec<f64> = etas.iter().map(|&e| scaling_function(e, 80, 1e-10).unwrap()).collect();
        let table = ScalingTable::from_samples(&etas, &vals).unwrap();
        for (e, v) in etas.iter().zip(&vals) {
            assert!((table.value(*e) / v - 1.0).abs() < 1e-12);
        }
        assert!((table.value(1e-4) / (vals[0] * 0.1) - 1.0).abs() < 1e-12);
        assert_eq!(table.value(1e4), vals[4]);
        assert_eq!(table.value(0.0), 0.0);
    }

    #[test]
    fn impact_of_empty_order_is_zero() {
        let p = BookParams::new(1.0, 1.0, 1.0).unwrap();
        let spec = MetaorderSpec::buy(0.0, 1.0).unwrap();
        assert_eq!(impact(&p, &spec, &DirectScaling::default()), 0.0);
    }
}
