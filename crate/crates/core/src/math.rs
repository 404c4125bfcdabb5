//! Numerical building blocks shared by the solvers and the estimation code.

use alloc::vec::Vec;

pub(crate) use libm::{erfc, exp, fabs as abs, log as ln, sqrt};

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    if x < 12.0 {
        return exp(x * x) * erfc(x);
    }
    // Asymptotic series; terms shrink monotonically for x this large.
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
        if abs(term) < 1e-17 {
            break;
        }
    }
    sum / (x * SQRT_PI)
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_{ua}^{ub} u^{-1/2} exp(-G(u)) du` with `G` linear between `(ua, ga)` and
/// `(ub, gb)`. Requires `0 <= ua < ub`.
///
/// This is the product-integration weight of the heat kernel: the `u^{-1/2}`
/// singularity and the exponential are both integrated exactly, so a
/// kernel much narrower than the segment is still accounted for.
pub fn sqrt_kernel_integral(ua: f64, ub: f64, ga: f64, gb: f64) -> f64 {
    if ga.min(gb) > 745.0 {
        return 0.0;
    }
    let width = ub - ua;
    let beta = (gb - ga) / width;
    let (sa, sb) = (sqrt(ua), sqrt(ub));

    if abs(beta) * ub <= 1e-3 {
        let alpha = ga - beta * ua;
        let mut total = 2.0 * width / (sa + sb);
        let mut coeff = 1.0;
        let (mut pa, mut pb) = (sa, sb);
        for n in 1..5 {
            coeff *= -beta / n as f64;
            pa *= ua;
            pb *= ub;
            total += coeff * (pb - pa) / (n as f64 + 0.5);
        }
        return exp(-alpha) * total;
    }

    if beta > 0.0 {
        let xa = sqrt(beta * ua);
        let xb = sqrt(beta * ub);
        let diff = exp(-ga) * erfcx(xa) - exp(-gb) * erfcx(xb);
        return sqrt(core::f64::consts::PI / beta) * diff.max(0.0);
    }

    // Decreasing exponent: smooth in v = sqrt(u), composite Gauss-Legendre.
    let panels = (abs(ga - gb) / 2.0).clamp(1.0, 64.0) as usize;
    let h = (sb - sa) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = sa + (p as f64 + 0.5) * h;
        for (node, weight) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            for v in [mid - 0.5 * h * node, mid + 0.5 * h * node] {
                let g = ga + beta * (v * v - ua);
                total += weight * exp(-g);
            }
        }
    }
    // du = 2 v dv, u^{-1/2} du = 2 dv; GL weights on [-1, 1] carry h / 2.
    total * h
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Brent's bracketing root finder. `fa` and `fb` must have opposite signs
/// (or one of them be zero). Stops as soon as `done(x, f(x))` holds.
pub fn brent<F, D>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    done: D,
    max_iter: usize,
) -> Root
where
    F: FnMut(f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    if done(a, fa) {
        return Root { x: a, fx: fa, iterations: 0, converged: true };
    }
    if done(b, fb) {
        return Root { x: b, fx: fb, iterations: 0, converged: true };
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if abs(fc) < abs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * abs(b);
        let xm = 0.5 * (c - b);
        if abs(xm) <= tol1 || fb == 0.0 {
            return Root { x: b, fx: fb, iterations: iter, converged: true };
        }
        if abs(e) >= tol1 && abs(fa) > abs(fb) {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = abs(p);
            let min1 = 3.0 * xm * q - abs(tol1 * q);
            let min2 = abs(e * q);
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if abs(d) > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if done(b, fb) {
            return Root { x: b, fx: fb, iterations: iter, converged: true };
        }
    }
    Root { x: b, fx: fb, iterations: max_iter, converged: false }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while abs(b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes). Monotone data stays monotone between the knots.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing and contain at least two knots.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> crate::Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(crate::Error::invalid("knots", "need at least two (x, y) pairs"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(crate::Error::invalid("knots", "abscissae must be strictly increasing"));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = alloc::vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Evaluates the interpolant; arguments outside the knots are clamped.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && abs(d) > abs(3.0 * d0) {
        3.0 * d0
    } else {
        d
    }
}

/// Ordinary least squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` with fewer than three points.
    pub slope_stderr: Option<f64>,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> crate::Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(crate::Error::InsufficientData { needed: 2, available: n.min(ys.len()) });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(crate::Error::InsufficientSpan("regressor has no variance"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (n > 2).then(|| {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        sqrt(ssr / (nf - 2.0) / sxx)
    });
    Ok(LinearFit { slope, intercept, slope_stderr, n })
}
