//! Closed-form error and complexity expressions.

use thiserror::Error;

use crate::nomographic::{modulus_eval, ModulusDescriptor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("true value at index {0} is zero; NMSE is undefined")]
    ZeroTrueValue(usize),
    #[error("length mismatch: {0} true values vs {1} estimates")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("ln argument {0} <= 1: q is too small for the asymptotic expression")]
    OutOfAsymptoticRegime(f64),
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Number of lattice rows along one axis of the received grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    Finite(u64),
    /// The `M -> inf` limit: the quantizer searches the whole ring.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModelInputs {
    pub q1: u64,
    pub q2: u64,
    pub rho_abs: f64,
    pub m1: Extent,
    pub m2: Extent,
    /// Per-component noise standard deviation.
    pub sigma: f64,
}

// Beyond this argument Q underflows to zero in double precision.
const Q_CUTOFF: f64 = 40.0;

/// Sums `weight(l) * Q((2l - 1) scale / (2 sigma))` over `l = 1..M-1`.
fn axis_sum(extent: Extent, scale: f64, sigma: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let last = match extent {
        Extent::Finite(m) => m.saturating_sub(1),
        Extent::Unbounded => u64::MAX,
    };
    let mut total = 0.0;
    let mut l = 1u64;
    while l <= last {
        let arg = (2 * l - 1) as f64 * scale / (2.0 * sigma);
        if arg > Q_CUTOFF || arg.is_nan() {
            break;
        }
        total += weight(l as f64) * q_function(arg);
        l += 1;
    }
    total
}

fn alpha(extent: Extent, scale: f64, sigma: f64) -> f64 {
    2.0 * match extent {
        Extent::Finite(m) => {
            let m = m as f64;
            axis_sum(extent, scale, sigma, |l| {
                2.0 * l - 1.0 + (3.0 * l * (1.0 - l) - 1.0) / m
            })
        }
        Extent::Unbounded => axis_sum(extent, scale, sigma, |l| 2.0 * l - 1.0),
    }
}

fn beta(extent: Extent, scale: f64, sigma: f64) -> f64 {
    2.0 * match extent {
        Extent::Finite(m) => {
            let m = m as f64;
            axis_sum(extent, scale, sigma, |l| 1.0 + (1.0 - 2.0 * l) / m)
        }
        Extent::Unbounded => axis_sum(extent, scale, sigma, |_| 1.0),
    }
}

/// `(alpha1, alpha2)`.
pub fn alphas(inp: &ErrorModelInputs) -> (f64, f64) {
    (
        alpha(inp.m1, 1.0, inp.sigma),
        alpha(inp.m2, inp.rho_abs, inp.sigma),
    )
}

/// `(beta1, beta2)`.
pub fn betas(inp: &ErrorModelInputs) -> (f64, f64) {
    (
        beta(inp.m1, 1.0, inp.sigma),
        beta(inp.m2, inp.rho_abs, inp.sigma),
    )
}

/// `MSE = q1^2 alpha1 + q2^2 alpha2`.
pub fn mse_analytic(inp: &ErrorModelInputs) -> f64 {
    let (a1, a2) = alphas(inp);
    let (q1, q2) = (inp.q1 as f64, inp.q2 as f64);
    q1 * q1 * a1 + q2 * q2 * a2
}

/// Second moment of the axis error written directly over the probabilities
/// `zeta(l) = Q((2l-1)/(2 s)) - Q((2l+1)/(2 s))` of landing `l` rows away.
fn zeta_axis(extent: Extent, axis_sigma: f64) -> f64 {
    let last = match extent {
        Extent::Finite(m) => m.saturating_sub(1),
        Extent::Unbounded => u64::MAX,
    };
    let inv_m = match extent {
        Extent::Finite(m) => 1.0 / m as f64,
        Extent::Unbounded => 0.0,
    };
    let mut total = 0.0;
    let mut l = 1u64;
    while l <= last {
        let lf = l as f64;
        let lo = (2.0 * lf - 1.0) / (2.0 * axis_sigma);
        if lo > Q_CUTOFF || lo.is_nan() {
            break;
        }
        let zeta = q_function(lo) - q_function((2.0 * lf + 1.0) / (2.0 * axis_sigma));
        total += (lf * lf - lf * lf * lf * inv_m) * zeta;
        l += 1;
    }
    2.0 * total
}

pub fn mse_zeta_oracle(inp: &ErrorModelInputs) -> f64 {
    let (q1, q2) = (inp.q1 as f64, inp.q2 as f64);
    q1 * q1 * zeta_axis(inp.m1, inp.sigma) + q2 * q2 * zeta_axis(inp.m2, inp.sigma / inp.rho_abs)
}

/// The boundary term dropped when the zeta form is summed by parts:
/// `mse_analytic - mse_zeta_oracle` equals this exactly.
pub fn mse_boundary_residual(inp: &ErrorModelInputs) -> f64 {
    let axis = |extent: Extent, scale: f64| match extent {
        Extent::Finite(m) if m >= 2 => {
            let mf = m as f64;
            2.0 * (mf - 1.0).powi(2) / mf * q_function((2.0 * mf - 1.0) * scale / (2.0 * inp.sigma))
        }
        _ => 0.0,
    };
    let (q1, q2) = (inp.q1 as f64, inp.q2 as f64);
    q1 * q1 * axis(inp.m1, 1.0) + q2 * q2 * axis(inp.m2, inp.rho_abs)
}

/// `w(q1 beta1 + q2 beta2)`.
pub fn mae_bound(inp: &ErrorModelInputs, w: ModulusDescriptor) -> f64 {
    let (b1, b2) = betas(inp);
    modulus_eval(w, inp.q1 as f64 * b1 + inp.q2 as f64 * b2)
}

/// `sum_j |f_j - est_j|^2 / (N |f_j|)`.
pub fn nmse(true_vals: &[f64], est_vals: &[f64]) -> Result<f64, AnalyticError> {
    if true_vals.len() != est_vals.len() {
        return Err(AnalyticError::LengthMismatch(true_vals.len(), est_vals.len()));
    }
    if true_vals.is_empty() {
        return Err(AnalyticError::Empty);
    }
    let mut total = 0.0;
    for (j, (&f, &g)) in true_vals.iter().zip(est_vals).enumerate() {
        if f == 0.0 {
            return Err(AnalyticError::ZeroTrueValue(j));
        }
        total += (f - g).powi(2) / f.abs();
    }
    Ok(total / true_vals.len() as f64)
}

/// Principal branch of the Lambert W function on `[0, inf)`.
pub fn lambert_w0(x: f64) -> f64 {
    assert!(x >= 0.0, "lambert_w0 is only defined here for x >= 0, got {x}");
    if x == 0.0 || x.is_infinite() {
        return x;
    }
    if x > 1e200 {
        // w + ln w = ln x, solved by Newton in log space where w e^w would
        // overflow.
        let lx = x.ln();
        let mut w = lx - lx.ln();
        for _ in 0..50 {
            let step = (w + w.ln() - lx) / (1.0 + 1.0 / w);
            w -= step;
            if step.abs() <= 4.0 * f64::EPSILON * w {
                break;
            }
        }
        return w;
    }
    // Winitzki's approximation, good to about 1% over the whole half-line.
    let l = x.ln_1p();
    let mut w = l * (1.0 - l.ln_1p() / (2.0 + l));
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityInputs {
    pub k: usize,
    pub q: f64,
    /// Half-width of the input domain.
    pub a: f64,
    /// Half-width of the range of the post-processing function.
    pub b: f64,
    /// Derivative bounds of each node's pre-processing function.
    pub e_k: Vec<f64>,
    /// Derivative bound of the post-processing function.
    pub d: f64,
}

impl ComplexityInputs {
    /// All `K` nodes share the derivative bound `e`.
    pub fn uniform(k: usize, q: f64, a: f64, b: f64, e: f64, d: f64) -> Self {
        ComplexityInputs {
            k,
            q,
            a,
            b,
            e_k: vec![e; k],
            d,
        }
    }
}

fn taylor_terms(bound: f64, q: f64, ln_width: f64, w_width: f64) -> Result<f64, AnalyticError> {
    let arg = bound * q / (2.0 * ln_width * (2.0 * std::f64::consts::PI).sqrt());
    if !(arg > 1.0) {
        return Err(AnalyticError::OutOfAsymptoticRegime(arg));
    }
    let l = arg.ln();
    Ok(l / lambert_w0(l / (2.0 * w_width * std::f64::consts::E)))
}

/// `sum_k L_k / W(L_k / (2 a e))` with `L_k = ln(E_k q / (2 a sqrt(2 pi)))`.
pub fn bops_encoder(inp: &ComplexityInputs) -> Result<f64, AnalyticError> {
    inp.e_k
        .iter()
        .map(|&e| taylor_terms(e, inp.q, inp.a, inp.a))
        .sum()
}

/// `L / W(L / (2 b e))` with `L = ln(D q / (2 a sqrt(2 pi)))`, as printed.
pub fn bops_decoder(inp: &ComplexityInputs) -> Result<f64, AnalyticError> {
    taylor_terms(inp.d, inp.q, inp.a, inp.b)
}

/// `log10` of the optimization-based encoder cost: `sqrt(K) q^(8K + 1/2)` for
/// general functions, `sqrt(q) e^(4(K + q - 1))` for symmetric ones.
pub fn channelcomp_encoder_log10(k: usize, q: f64, symmetric: bool) -> f64 {
    let kf = k as f64;
    if symmetric {
        0.5 * q.log10() + 4.0 * (kf + q - 1.0) * std::f64::consts::LOG10_E
    } else {
        0.5 * kf.log10() + (8.0 * kf + 0.5) * q.log10()
    }
}

/// `log10(q^K)`: linear search over at most `q^K` received points.
pub fn channelcomp_decoder_log10(k: usize, q: f64) -> f64 {
    k as f64 * q.log10()
}
