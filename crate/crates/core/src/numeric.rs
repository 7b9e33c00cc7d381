//! Quadrature and special-function helpers.

use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, scratch);
    for k in 0..dim {
        kronrod[k] = WGK[7] * scratch[k];
        gauss[k] = WG[3] * scratch[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, scratch);
        let lo: Vec<f64> = scratch.to_vec();
        f(center + dx, scratch);
        for k in 0..dim {
            let sum = lo[k] + scratch[k];
            kronrod[k] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
    }
    let value: Vec<f64> = kronrod.iter().map(|v| v * half).collect();
    let error: Vec<f64> = kronrod
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).abs())
        .collect();
    (value, error)
}

/// Adaptive Gauss-Kronrod integration of a vector-valued integrand over
/// `[a, b]`, split initially at `breaks`. Every component must meet
/// `err <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate_vec<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    dim: usize,
    settings: QuadSettings,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Numerical(format!("bad integration interval [{a}, {b}]")));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let mut scratch = vec![0.0; dim];
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);

    let mut segments: Vec<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, error) = gk15(&mut f, w[0], w[1], dim, &mut scratch);
            Segment { a: w[0], b: w[1], value, error }
        })
        .collect();

    loop {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        for s in &segments {
            for k in 0..dim {
                total[k] += s.value[k];
                total_err[k] += s.error[k];
            }
        }
        if total.iter().chain(&total_err).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("integrand produced a non-finite value".into()));
        }
        // Worst component relative to its own tolerance.
        let worst = (0..dim)
            .map(|k| {
                let tol = settings.abs_tol.max(settings.rel_tol * total[k].abs());
                (total_err[k] / tol, k)
            })
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .expect("dim > 0");
        if worst.0 <= 1.0 {
            return Ok(total);
        }
        if segments.len() >= settings.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge after {} intervals (error ratio {:.3e})",
                segments.len(),
                worst.0
            )));
        }
        let k = worst.1;
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error[k].total_cmp(&y.1.error[k]))
            .expect("non-empty");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Numerical("interval underflow during bisection".into()));
        }
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (value, error) = gk15(&mut f, lo, hi, dim, &mut scratch);
            segments.push(Segment { a: lo, b: hi, value, error });
        }
    }
}

/// Scalar convenience wrapper over [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: QuadSettings) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), a, b, &[], 1, settings).map(|v| v[0])
}

/// Truncation point for `∫_0^∞ g(t) e^{-t} dt` with `|g| <= 1`: the tail
/// beyond it is below `e^{-46} ≈ 1e-20`.
pub const EXP_TAIL_CUTOFF: f64 = 46.0;

const EXP_BREAKS: [f64; 5] = [0.5, 2.0, 6.0, 14.0, 28.0];

/// Computes `∫_c^∞ g(a) e^{-a} da` for a vector of bounded integrands by
/// substituting `t = a - c`.
pub fn integrate_exp_tail_vec<F>(
    mut g: F,
    c: f64,
    dim: usize,
    settings: QuadSettings,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Numerical(format!("bad lower limit {c}")));
    }
    let scale = (-c).exp();
    if scale == 0.0 {
        return Ok(vec![0.0; dim]);
    }
    let mut v = integrate_vec(
        |t, out| {
            g(c + t, out);
            let w = (-t).exp();
            out.iter_mut().for_each(|o| *o *= w);
        },
        0.0,
        EXP_TAIL_CUTOFF,
        &EXP_BREAKS,
        dim,
        settings,
    )?;
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(v)
}

/// `x^{-s} γ(s, x)` with `γ` the lower incomplete gamma function; tends to
/// `1/s` as `x → 0`.
pub fn scaled_lower_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0 / s;
    }
    if x < 1.0 {
        // Σ (-x)^k / (k! (s + k)), alternating with shrinking terms
        let mut term = 1.0;
        let mut sum = 1.0 / s;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / (s + k as f64);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    gamma_lr(s, x) * gamma(s) * x.powf(-s)
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
