//! Nomographic functions `f(s) = psi(sum_k phi(s_k))`, the uniform quantizer
//! that maps `phi` outputs onto `Z_q`, and moduli of continuity for `psi`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NomographicError {
    #[error("unknown function preset {0:?}")]
    UnknownPreset(String),
    #[error("input domain [{lo}, {hi}] is invalid for {name}")]
    InvalidDomain { name: PresetName, lo: f64, hi: f64 },
    #[error("quantizer needs lo < hi and at least two levels (got [{lo}, {hi}], q = {q})")]
    InvalidQuantizer { lo: f64, hi: f64, q: u64 },
    #[error("number of nodes must be positive")]
    ZeroNodes,
}

/// Modulus of continuity `w` with `|psi(x) - psi(y)| <= w(|x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusDescriptor {
    Identity,
    Lipschitz(f64),
    Hoelder { c: f64, alpha: f64 },
}

impl ModulusDescriptor {
    /// `t -> w(s * t)`, for errors measured in units of a quantizer step `s`.
    pub fn rescaled(self, s: f64) -> ModulusDescriptor {
        match self {
            ModulusDescriptor::Identity => ModulusDescriptor::Lipschitz(s),
            ModulusDescriptor::Lipschitz(l) => ModulusDescriptor::Lipschitz(l * s),
            ModulusDescriptor::Hoelder { c, alpha } => ModulusDescriptor::Hoelder {
                c: c * s.powf(alpha),
                alpha,
            },
        }
    }
}

pub fn modulus_eval(w: ModulusDescriptor, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    match w {
        ModulusDescriptor::Identity => t,
        ModulusDescriptor::Lipschitz(l) => l * t,
        ModulusDescriptor::Hoelder { c, alpha } => c * t.powf(alpha),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantized {
    pub level: u64,
    pub saturated: bool,
}

/// `q` evenly spaced levels covering `[lo, hi]`, level `0` at `lo` and level
/// `q - 1` at `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer {
    lo: f64,
    hi: f64,
    q: u64,
}

impl UniformQuantizer {
    pub fn new(lo: f64, hi: f64, q: u64) -> Result<Self, NomographicError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || q < 2 {
            return Err(NomographicError::InvalidQuantizer { lo, hi, q });
        }
        Ok(UniformQuantizer { lo, hi, q })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn levels(&self) -> u64 {
        self.q
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.q - 1) as f64
    }

    pub fn quantize(&self, c: f64) -> Quantized {
        let saturated = !(self.lo..=self.hi).contains(&c);
        let c = c.clamp(self.lo, self.hi);
        let level = ((c - self.lo) / (self.hi - self.lo) * (self.q - 1) as f64).round() as u64;
        Quantized {
            level: level.min(self.q - 1),
            saturated,
        }
    }

    pub fn dequantize(&self, level: u64) -> f64 {
        self.dequantize_real(level as f64)
    }

    /// Affine inverse extended to fractional (or out-of-range) levels.
    pub fn dequantize_real(&self, level: f64) -> f64 {
        self.lo + level * self.step()
    }
}

pub fn quantize_pre(c: f64, quant: &UniformQuantizer) -> Quantized {
    quant.quantize(c)
}

pub fn dequantize(level: u64, quant: &UniformQuantizer) -> f64 {
    quant.dequantize(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    ArithmeticMean,
    ArithmeticSum,
    GeometricMean,
    MaxApprox,
    EuclideanNorm,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::ArithmeticMean,
        PresetName::ArithmeticSum,
        PresetName::GeometricMean,
        PresetName::MaxApprox,
        PresetName::EuclideanNorm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::ArithmeticMean => "arithmetic_mean",
            PresetName::ArithmeticSum => "arithmetic_sum",
            PresetName::GeometricMean => "geometric_mean",
            PresetName::MaxApprox => "max_approx",
            PresetName::EuclideanNorm => "euclidean_norm",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = NomographicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| NomographicError::UnknownPreset(s.to_string()))
    }
}

pub const DEFAULT_P0: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomographicSpec {
    name: PresetName,
    k: usize,
    input_domain: (f64, f64),
    p0: Option<f64>,
    modulus: ModulusDescriptor,
    epsilon: f64,
}

/// Builds the named function for `k` nodes with inputs in `input_domain`.
///
/// The domain fixes the Lipschitz constants of the approximate presets:
/// `exp(x/K)` on `[K ln(lo + 1/p0), K ln(hi + 1/p0)]` has slope at most
/// `(hi + 1/p0)/K`, and `ln` on `[K e^lo, inf)` has slope at most `1/(K e^lo)`.
pub fn preset(
    name: PresetName,
    k: usize,
    input_domain: (f64, f64),
) -> Result<NomographicSpec, NomographicError> {
    if k == 0 {
        return Err(NomographicError::ZeroNodes);
    }
    let (lo, hi) = input_domain;
    let bad_domain = Err(NomographicError::InvalidDomain { name, lo, hi });
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return bad_domain;
    }
    let kf = k as f64;
    let (modulus, p0, epsilon) = match name {
        PresetName::ArithmeticMean => (ModulusDescriptor::Lipschitz(1.0 / kf), None, 0.0),
        PresetName::ArithmeticSum => (ModulusDescriptor::Identity, None, 0.0),
        PresetName::GeometricMean => {
            let p0 = DEFAULT_P0;
            if lo < 0.0 {
                return bad_domain;
            }
            // The geometric mean is concave with slope GM * mean(1/s) <= hi/lo
            // along the all-ones direction, which bounds the 1/p0 shift.
            let epsilon = if lo > 0.0 {
                hi / (lo * p0)
            } else {
                hi + 1.0 / p0
            };
            (
                ModulusDescriptor::Lipschitz((hi + 1.0 / p0) / kf),
                Some(p0),
                epsilon,
            )
        }
        PresetName::MaxApprox => {
            let theta = kf * lo.exp();
            (ModulusDescriptor::Lipschitz(1.0 / theta), None, kf.ln())
        }
        PresetName::EuclideanNorm => {
            if lo < 0.0 {
                return bad_domain;
            }
            (ModulusDescriptor::Hoelder { c: 1.0, alpha: 0.5 }, None, 0.0)
        }
    };
    Ok(NomographicSpec {
        name,
        k,
        input_domain,
        p0,
        modulus,
        epsilon,
    })
}

pub fn preset_by_name(
    name: &str,
    k: usize,
    input_domain: (f64, f64),
) -> Result<NomographicSpec, NomographicError> {
    preset(name.parse()?, k, input_domain)
}

impl NomographicSpec {
    pub fn name(&self) -> PresetName {
        self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn input_domain(&self) -> (f64, f64) {
        self.input_domain
    }

    pub fn p0(&self) -> Option<f64> {
        self.p0
    }

    pub fn modulus(&self) -> ModulusDescriptor {
        self.modulus
    }

    /// Upper bound on `|psi(sum phi(s_k)) - f(s)|` over the input domain.
    pub fn approximation_error(&self) -> f64 {
        self.epsilon
    }

    pub fn phi(&self, s: f64) -> f64 {
        match self.name {
            PresetName::ArithmeticMean | PresetName::ArithmeticSum => s,
            PresetName::GeometricMean => (s + 1.0 / self.p0.unwrap_or(DEFAULT_P0)).ln(),
            PresetName::MaxApprox => s.exp(),
            PresetName::EuclideanNorm => s * s,
        }
    }

    /// Inverse of `phi` on its image.
    pub fn phi_inverse(&self, c: f64) -> f64 {
        match self.name {
            PresetName::ArithmeticMean | PresetName::ArithmeticSum => c,
            PresetName::GeometricMean => c.exp() - 1.0 / self.p0.unwrap_or(DEFAULT_P0),
            PresetName::MaxApprox => c.ln(),
            PresetName::EuclideanNorm => c.max(0.0).sqrt(),
        }
    }

    /// `psi`, with the argument clamped to the function's domain where noise
    /// could push it outside (`sqrt` below 0, `ln` below `K e^lo`).
    pub fn psi(&self, x: f64) -> f64 {
        let kf = self.k as f64;
        match self.name {
            PresetName::ArithmeticMean => x / kf,
            PresetName::ArithmeticSum => x,
            PresetName::GeometricMean => (x / kf).exp(),
            PresetName::MaxApprox => x.max(kf * self.input_domain.0.exp()).ln(),
            PresetName::EuclideanNorm => x.max(0.0).sqrt(),
        }
    }

    /// The target function itself.
    pub fn evaluate_exact(&self, s: &[f64]) -> f64 {
        let n = s.len() as f64;
        match self.name {
            PresetName::ArithmeticMean => s.iter().sum::<f64>() / n,
            PresetName::ArithmeticSum => s.iter().sum(),
            PresetName::GeometricMean => (s.iter().map(|v| v.ln()).sum::<f64>() / n).exp(),
            PresetName::MaxApprox => s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            PresetName::EuclideanNorm => s.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn evaluate_nomographic(&self, s: &[f64]) -> f64 {
        self.psi(s.iter().map(|&v| self.phi(v)).sum())
    }

    /// Exact image of `phi` over the input domain.
    pub fn phi_range(&self) -> (f64, f64) {
        let (lo, hi) = self.input_domain;
        let (a, b) = (self.phi(lo), self.phi(hi));
        (a.min(b), a.max(b))
    }

    pub fn quantizer(&self, q: u64) -> Result<UniformQuantizer, NomographicError> {
        let (lo, hi) = self.phi_range();
        UniformQuantizer::new(lo, hi, q)
    }

    /// `psi` applied to the sum of `K` quantized `phi` values given the sum
    /// of their levels.
    pub fn post_process(&self, level_sum: f64, quant: &UniformQuantizer) -> f64 {
        self.psi(self.k as f64 * quant.lo() + level_sum * quant.step())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn preset_examples() {
        let mean = preset(PresetName::ArithmeticMean, 3, (0.0, 10.0)).unwrap();
        assert_eq!(mean.evaluate_nomographic(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(mean.modulus(), ModulusDescriptor::Lipschitz(1.0 / 3.0));

        let norm = preset(PresetName::EuclideanNorm, 2, (0.0, 10.0)).unwrap();
        assert_eq!(norm.evaluate_nomographic(&[3.0, 4.0]), 5.0);

        let geo = preset(PresetName::GeometricMean, 4, (1.0, 8.0)).unwrap();
        let s = [1.0, 2.0, 4.0, 8.0];
        let want = 64f64.powf(0.25);
        assert!((geo.evaluate_exact(&s) - want).abs() < 1e-12);
        let approx = geo.evaluate_nomographic(&s);
        assert!(approx >= want && approx - want <= geo.approximation_error());

        let mx = preset(PresetName::MaxApprox, 5, (0.0, 3.0)).unwrap();
        let s = [0.5, 2.9, 1.0, 2.8, 0.0];
        let approx = mx.evaluate_nomographic(&s);
        assert!(approx >= 2.9 && approx - 2.9 <= mx.approximation_error());
        assert_eq!(mx.modulus(), ModulusDescriptor::Lipschitz(1.0 / 5.0));
    }

    #[test]
    fn names_roundtrip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert_eq!(
            "median".parse::<PresetName>(),
            Err(NomographicError::UnknownPreset("median".into()))
        );
        assert!(preset_by_name("median", 2, (0.0, 1.0)).is_err());
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(preset(PresetName::EuclideanNorm, 2, (-1.0, 1.0)).is_err());
        assert!(preset(PresetName::ArithmeticMean, 2, (1.0, 1.0)).is_err());
        assert_eq!(
            preset(PresetName::ArithmeticMean, 0, (0.0, 1.0)),
            Err(NomographicError::ZeroNodes)
        );
    }

    #[test]
    fn quantizer_examples() {
        let qz = UniformQuantizer::new(0.0, 63.0, 64).unwrap();
        assert_eq!(qz.quantize(0.0).level, 0);
        assert_eq!(qz.quantize(63.0).level, 63);
        assert_eq!(quantize_pre(5.2, &qz), Quantized { level: 5, saturated: false });
        assert_eq!(dequantize(5, &qz), 5.0);
        assert_eq!(qz.quantize(70.0), Quantized { level: 63, saturated: true });
        assert_eq!(qz.quantize(-1.0), Quantized { level: 0, saturated: true });
        assert!(UniformQuantizer::new(1.0, 1.0, 4).is_err());
        assert!(UniformQuantizer::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn integer_inputs_map_to_exact_levels() {
        // s in 0..q-1 with identity phi lands on level s.
        let mean = preset(PresetName::ArithmeticMean, 10, (0.0, 63.0)).unwrap();
        let qz = mean.quantizer(64).unwrap();
        for s in 0..64 {
            assert_eq!(qz.quantize(mean.phi(s as f64)).level, s);
        }
        // s in 1..8 with phi = s^2 lands on level s^2 - 1.
        let norm = preset(PresetName::EuclideanNorm, 3, (1.0, 8.0)).unwrap();
        let qz = norm.quantizer(64).unwrap();
        for s in 1..=8u64 {
            assert_eq!(qz.quantize(norm.phi(s as f64)).level, s * s - 1);
        }
        let levels = [3u64, 15, 63];
        let f = norm.post_process(levels.iter().sum::<u64>() as f64, &qz);
        assert!((f - (4.0f64 + 16.0 + 64.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modulus_examples() {
        for w in [
            ModulusDescriptor::Identity,
            ModulusDescriptor::Lipschitz(0.1),
            ModulusDescriptor::Hoelder { c: 1.0, alpha: 0.5 },
        ] {
            assert_eq!(modulus_eval(w, 0.0), 0.0);
        }
        assert_eq!(modulus_eval(ModulusDescriptor::Lipschitz(0.1), 5.0), 0.5);
        assert_eq!(modulus_eval(ModulusDescriptor::Hoelder { c: 1.0, alpha: 0.5 }, 4.0), 2.0);
    }

    #[test]
    fn moduli_nondecreasing_and_concave() {
        for w in [
            ModulusDescriptor::Identity,
            ModulusDescriptor::Lipschitz(0.3),
            ModulusDescriptor::Hoelder { c: 2.0, alpha: 0.5 },
            ModulusDescriptor::Hoelder { c: 1.0, alpha: 0.2 },
        ] {
            let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
            let ws: Vec<f64> = ts.iter().map(|&t| modulus_eval(w, t)).collect();
            for i in 1..ws.len() {
                assert!(ws[i] >= ws[i - 1]);
            }
            for i in 1..ws.len() - 1 {
                assert!(ws[i] >= 0.5 * (ws[i - 1] + ws[i + 1]) - 1e-12, "{w:?} at {}", ts[i]);
            }
        }
    }

    #[test]
    fn rescaled_modulus() {
        for w in [
            ModulusDescriptor::Identity,
            ModulusDescriptor::Lipschitz(0.3),
            ModulusDescriptor::Hoelder { c: 2.0, alpha: 0.5 },
        ] {
            for t in [0.0, 0.5, 3.0, 17.0] {
                let a = modulus_eval(w.rescaled(2.5), t);
                let b = modulus_eval(w, 2.5 * t);
                assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn phi_inverse_undoes_phi() {
        for name in PresetName::ALL {
            let spec = preset(name, 4, (0.5, 8.0)).unwrap();
            for i in 0..=30 {
                let s = 0.5 + i as f64 * 0.25;
                let back = spec.phi_inverse(spec.phi(s));
                assert!((back - s).abs() < 1e-12, "{name} s={s} back={back}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100_000))]
        #[test]
        fn quantizer_roundtrip_within_half_step(
            lo in -1e3f64..1e3, width in 1e-3f64..1e4, q in 2u64..4096, u in 0.0f64..=1.0
        ) {
            let qz = UniformQuantizer::new(lo, lo + width, q).unwrap();
            let c = lo + u * width;
            let qd = qz.quantize(c);
            prop_assert!(!qd.saturated);
            let err = (qz.dequantize(qd.level) - c).abs();
            prop_assert!(err <= width / (2.0 * (q - 1) as f64) * (1.0 + 1e-9) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn exact_presets_on_integer_inputs(s in prop::collection::vec(0i32..64, 1..40)) {
            let k = s.len();
            let s: Vec<f64> = s.into_iter().map(f64::from).collect();
            let mean = preset(PresetName::ArithmeticMean, k, (0.0, 63.0)).unwrap();
            prop_assert_eq!(mean.evaluate_nomographic(&s), mean.evaluate_exact(&s));
            let sum = preset(PresetName::ArithmeticSum, k, (0.0, 63.0)).unwrap();
            prop_assert_eq!(sum.evaluate_nomographic(&s), sum.evaluate_exact(&s));
            let norm = preset(PresetName::EuclideanNorm, k, (0.0, 63.0)).unwrap();
            prop_assert_eq!(norm.evaluate_nomographic(&s), norm.evaluate_exact(&s));
        }

        #[test]
        fn approximate_presets_within_epsilon(s in prop::collection::vec(1.0f64..8.0, 1..20)) {
            let k = s.len();
            let geo = preset(PresetName::GeometricMean, k, (1.0, 8.0)).unwrap();
            let d = geo.evaluate_nomographic(&s) - geo.evaluate_exact(&s);
            prop_assert!(d >= -1e-12 && d <= geo.approximation_error() + 1e-12);
            let mx = preset(PresetName::MaxApprox, k, (1.0, 8.0)).unwrap();
            let d = mx.evaluate_nomographic(&s) - mx.evaluate_exact(&s);
            prop_assert!(d >= -1e-12 && d <= mx.approximation_error() + 1e-12);
        }
    }
}
