//! Exact lattice arithmetic over the ring of integers `Z[rho]`.
//!
//! A Gaussian integer `a + bi` is embedded in the complex plane as
//! `a + b*rho*i`, i.e. the lattice with basis `{1, rho*i}`. The SumComp value
//! map only ever looks at the integer coordinates `(a, b)`, so everything that
//! touches floating point is confined to [`g_rho`] and [`quantize_to_ring`].

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RingError {
    #[error("moduli must be positive, got ({q1}, {q2})")]
    NonPositiveModulus { q1: u64, q2: u64 },
    #[error("({q1}, {q2}) are not coprime (gcd = {gcd})")]
    NotCoprime { q1: u64, q2: u64, gcd: u64 },
    #[error("rho = {0} does not span a 2-D lattice with 1 (its real part must be non-zero)")]
    DegenerateRho(Complex64),
}

/// A Gaussian integer `re + im*i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const ZERO: GaussianInt = GaussianInt { re: 0, im: 0 };

    pub const fn new(re: i64, im: i64) -> Self {
        GaussianInt { re, im }
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussianInt {
    type Output = GaussianInt;
    fn add(self, rhs: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for GaussianInt {
    fn add_assign(&mut self, rhs: GaussianInt) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for GaussianInt {
    type Output = GaussianInt;
    fn sub(self, rhs: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl SubAssign for GaussianInt {
    fn sub_assign(&mut self, rhs: GaussianInt) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl Neg for GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt::new(-self.re, -self.im)
    }
}

impl Mul<i64> for GaussianInt {
    type Output = GaussianInt;
    fn mul(self, k: i64) -> GaussianInt {
        GaussianInt::new(self.re * k, self.im * k)
    }
}

impl Sum for GaussianInt {
    fn sum<I: Iterator<Item = GaussianInt>>(iter: I) -> GaussianInt {
        iter.fold(GaussianInt::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a GaussianInt> for GaussianInt {
    fn sum<I: Iterator<Item = &'a GaussianInt>>(iter: I) -> GaussianInt {
        iter.copied().sum()
    }
}

/// Lagrange-reduced basis of the lattice spanned by `{1, rho*i}`.
///
/// `u = tu[0] + tu[1]*rho*i` and likewise for `v`; the integer transforms map
/// reduced coordinates back to `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ReducedBasis {
    u: Complex64,
    v: Complex64,
    tu: [i64; 2],
    tv: [i64; 2],
}

fn dot(x: Complex64, y: Complex64) -> f64 {
    x.re * y.re + x.im * y.im
}

impl ReducedBasis {
    fn new(rho: Complex64) -> Self {
        let mut u = Complex64::new(1.0, 0.0);
        let mut tu = [1, 0];
        let mut v = rho * Complex64::i();
        let mut tv = [0, 1];
        if dot(u, u) > dot(v, v) {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut tu, &mut tv);
        }
        loop {
            let m = (dot(u, v) / dot(u, u)).round();
            if m != 0.0 {
                v -= u * m;
                let m = m as i64;
                tv = [tv[0] - m * tu[0], tv[1] - m * tu[1]];
            }
            if dot(v, v) >= dot(u, u) {
                break;
            }
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut tu, &mut tv);
        }
        ReducedBasis { u, v, tu, tv }
    }

    fn to_ab(&self, x: i64, y: i64) -> (i64, i64) {
        (
            x * self.tu[0] + y * self.tv[0],
            x * self.tu[1] + y * self.tv[1],
        )
    }
}

/// The lattice parameter `rho` of `Z[rho]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParams {
    rho: Complex64,
    basis: ReducedBasis,
}

impl RingParams {
    /// Rejects any `rho` with zero real part: `rho*i` would then be real and
    /// `{1, rho*i}` would not span the plane.
    pub fn new(rho: Complex64) -> Result<Self, RingError> {
        if !rho.re.is_finite() || !rho.im.is_finite() || rho.re == 0.0 {
            return Err(RingError::DegenerateRho(rho));
        }
        Ok(RingParams {
            rho,
            basis: ReducedBasis::new(rho),
        })
    }

    pub fn real(rho: f64) -> Result<Self, RingError> {
        Self::new(Complex64::new(rho, 0.0))
    }

    /// `rho = 1`, the Gaussian integers themselves.
    pub fn gaussian() -> Self {
        Self::real(1.0).expect("rho = 1 is non-degenerate")
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    pub fn is_real(&self) -> bool {
        self.rho.im == 0.0
    }
}

/// The point `a + b*rho*i` of `Z[rho]`, carried by its integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingPoint {
    pub a: i64,
    pub b: i64,
    pub params: RingParams,
}

impl RingPoint {
    pub fn new(a: i64, b: i64, params: RingParams) -> Self {
        RingPoint { a, b, params }
    }

    pub fn value(&self) -> Complex64 {
        g_rho(GaussianInt::new(self.a, self.b), &self.params)
    }
}

/// Coprime moduli together with Bezout coefficients `q1*mu1 + q2*mu2 = 1`,
/// normalized so that `0 <= mu1 < q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BezoutPair {
    pub q1: u64,
    pub q2: u64,
    pub mu1: i64,
    pub mu2: i64,
}

impl BezoutPair {
    /// Another valid Bezout pair on the same line, `(mu1 + k*q2, mu2 - k*q1)`.
    /// Only the canonical pair is produced by [`extended_euclid`]; this exists
    /// to exercise the encoder's invariance to the choice.
    pub fn shifted(&self, k: i64) -> BezoutPair {
        BezoutPair {
            mu1: self.mu1 + k * self.q2 as i64,
            mu2: self.mu2 - k * self.q1 as i64,
            ..*self
        }
    }
}

/// Extended Euclidean algorithm returning the canonical Bezout pair.
pub fn extended_euclid(q1: u64, q2: u64) -> Result<BezoutPair, RingError> {
    if q1 == 0 || q2 == 0 {
        return Err(RingError::NonPositiveModulus { q1, q2 });
    }
    let (mut old_r, mut r) = (q1 as i128, q2 as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quotient = old_r / r;
        (old_r, r) = (r, old_r - quotient * r);
        (old_s, s) = (s, old_s - quotient * s);
    }
    if old_r != 1 {
        return Err(RingError::NotCoprime {
            q1,
            q2,
            gcd: old_r as u64,
        });
    }
    let (a, b) = (q1 as i128, q2 as i128);
    let mu1 = old_s.rem_euclid(b);
    let mu2 = (1 - a * mu1) / b;
    debug_assert_eq!(a * mu1 + b * mu2, 1);
    Ok(BezoutPair {
        q1,
        q2,
        mu1: mu1 as i64,
        mu2: mu2 as i64,
    })
}

/// `G_rho(a + bi) = a + b*rho*i`.
pub fn g_rho(g: GaussianInt, params: &RingParams) -> Complex64 {
    Complex64::new(g.re as f64, 0.0) + params.rho * Complex64::i() * g.im as f64
}

pub fn g_rho_inverse(p: &RingPoint) -> GaussianInt {
    GaussianInt::new(p.a, p.b)
}

/// Nearest point of `Z[rho]` to `mu` in Euclidean distance.
///
/// Real `rho` gives an orthogonal basis and the search is separable rounding.
/// Otherwise the coordinates are taken in a Lagrange-reduced basis, rounded,
/// and the 3x3 neighbourhood is searched. Ties round half away from zero.
pub fn quantize_to_ring(mu: Complex64, params: &RingParams) -> RingPoint {
    if params.is_real() {
        let a = mu.re.round() as i64;
        let b = (mu.im / params.rho.re).round() as i64;
        return RingPoint::new(a, b, *params);
    }

    let ReducedBasis { u, v, .. } = params.basis;
    // Solve mu = x*u + y*v.
    let det = u.re * v.im - u.im * v.re;
    let x = (mu.re * v.im - mu.im * v.re) / det;
    let y = (u.re * mu.im - u.im * mu.re) / det;
    let (x0, y0) = (x.round() as i64, y.round() as i64);

    let mut best = (x0, y0);
    let mut best_dist = (mu - (u * x0 as f64 + v * y0 as f64)).norm_sqr();
    for dx in -1..=1 {
        for dy in -1..=1 {
            let (cx, cy) = (x0 + dx, y0 + dy);
            let d = (mu - (u * cx as f64 + v * cy as f64)).norm_sqr();
            if d < best_dist {
                best = (cx, cy);
                best_dist = d;
            }
        }
    }
    let (a, b) = params.basis.to_ab(best.0, best.1);
    RingPoint::new(a, b, *params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    fn brute_nearest(mu: Complex64, params: &RingParams, center: (i64, i64), r: i64) -> (i64, i64) {
        let mut best = center;
        let mut best_d = f64::INFINITY;
        for a in center.0 - r..=center.0 + r {
            for b in center.1 - r..=center.1 + r {
                let d = (mu - g_rho(GaussianInt::new(a, b), params)).norm_sqr();
                if d < best_d {
                    best_d = d;
                    best = (a, b);
                }
            }
        }
        best
    }

    #[test]
    fn bezout_examples() {
        let p = extended_euclid(1, 4).unwrap();
        assert_eq!((p.mu1, p.mu2), (1, 0));
        let p = extended_euclid(2, 3).unwrap();
        assert_eq!((p.mu1, p.mu2), (2, -1));
        assert_eq!(
            extended_euclid(4, 6),
            Err(RingError::NotCoprime { q1: 4, q2: 6, gcd: 2 })
        );
        assert!(matches!(
            extended_euclid(0, 3),
            Err(RingError::NonPositiveModulus { .. })
        ));
    }

    #[test]
    fn bezout_exhaustive_small_moduli() {
        for q1 in 1..=64u64 {
            for q2 in 1..=64u64 {
                match extended_euclid(q1, q2) {
                    Ok(p) => {
                        assert_eq!(gcd(q1, q2), 1);
                        assert_eq!(q1 as i64 * p.mu1 + q2 as i64 * p.mu2, 1);
                        assert!(0 <= p.mu1 && p.mu1 < q2 as i64, "{q1},{q2}: {p:?}");
                    }
                    Err(RingError::NotCoprime { gcd: g, .. }) => {
                        assert_eq!(g, gcd(q1, q2));
                        assert!(g > 1);
                    }
                    Err(e) => panic!("unexpected {e}"),
                }
            }
        }
    }

    #[test]
    fn bezout_large_moduli() {
        let p = extended_euclid(1 << 40, (1 << 40) + 1).unwrap();
        assert_eq!(
            (p.q1 as i128) * p.mu1 as i128 + (p.q2 as i128) * p.mu2 as i128,
            1
        );
    }

    #[test]
    fn g_rho_examples() {
        let any = RingParams::new(Complex64::new(0.7, 1.3)).unwrap();
        assert_eq!(g_rho(GaussianInt::ZERO, &any), Complex64::new(0.0, 0.0));
        let one = RingParams::gaussian();
        assert_eq!(g_rho(GaussianInt::new(2, 3), &one), Complex64::new(2.0, 3.0));
        let two = RingParams::real(2.0).unwrap();
        assert_eq!(g_rho(GaussianInt::new(1, 1), &two), Complex64::new(1.0, 2.0));
    }

    #[test]
    fn g_rho_inverse_carries_coordinates() {
        let half = RingParams::real(0.5).unwrap();
        let p = RingPoint::new(-3, 5, half);
        assert_eq!(g_rho_inverse(&p), GaussianInt::new(-3, 5));
        let p = RingPoint::new(0, 0, RingParams::gaussian());
        assert_eq!(g_rho_inverse(&p), GaussianInt::ZERO);
    }

    #[test]
    fn rejects_degenerate_rho() {
        assert!(RingParams::new(Complex64::new(0.0, 2.0)).is_err());
        assert!(RingParams::new(Complex64::new(0.0, 0.0)).is_err());
        assert!(RingParams::new(Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(RingParams::new(Complex64::new(1e-3, 5.0)).is_ok());
    }

    #[test]
    fn quantize_examples() {
        let one = RingParams::gaussian();
        let p = quantize_to_ring(Complex64::new(0.0, 0.0), &one);
        assert_eq!((p.a, p.b), (0, 0));
        let p = quantize_to_ring(Complex64::new(2.4, 3.6), &one);
        assert_eq!((p.a, p.b), (2, 4));

        let two = RingParams::real(2.0).unwrap();
        let mu = Complex64::new(1.2, 2.6);
        let p = quantize_to_ring(mu, &two);
        assert_eq!((p.a, p.b), (1, 1));
        assert_eq!(brute_nearest(mu, &two, (0, 0), 4), (1, 1));
    }

    #[test]
    fn quantize_ties_round_away_from_zero() {
        let one = RingParams::gaussian();
        let p = quantize_to_ring(Complex64::new(0.5, -1.5), &one);
        assert_eq!((p.a, p.b), (1, -2));
        let p = quantize_to_ring(Complex64::new(-2.5, 2.5), &one);
        assert_eq!((p.a, p.b), (-3, 3));
    }

    #[test]
    fn reduced_basis_handles_skewed_rho() {
        // rho*i = -7.9 + 0.1i is nearly parallel to 1: plain Babai rounding in
        // the {1, rho*i} basis lands far from the true nearest point.
        let params = RingParams::new(Complex64::new(0.1, 7.9)).unwrap();
        let mut rng_state = 0x1234_5678_u64;
        for _ in 0..2000 {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = ((rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 40.0;
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = ((rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 40.0;
            let mu = Complex64::new(re, im);
            let p = quantize_to_ring(mu, &params);
            let d = (mu - p.value()).norm_sqr();
            let (ba, bb) = brute_nearest(mu, &params, (p.a, p.b), 12);
            let bd = (mu - g_rho(GaussianInt::new(ba, bb), &params)).norm_sqr();
            assert!(d <= bd + 1e-9, "mu={mu}: got ({}, {}) d={d}, brute ({ba}, {bb}) d={bd}", p.a, p.b);
        }
    }

    fn rho_strategy() -> impl Strategy<Value = RingParams> {
        prop_oneof![
            Just(RingParams::real(0.5).unwrap()),
            Just(RingParams::real(1.0).unwrap()),
            Just(RingParams::real(2.0).unwrap()),
            Just(RingParams::new(Complex64::new(1.0, 0.3)).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn inverse_undoes_embedding(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000, params in rho_strategy()) {
            let g = GaussianInt::new(a, b);
            let p = RingPoint::new(a, b, params);
            prop_assert_eq!(g_rho_inverse(&p), g);
        }

        #[test]
        fn quantizer_is_identity_on_lattice(a in -1000i64..=1000, b in -1000i64..=1000, params in rho_strategy()) {
            let g = GaussianInt::new(a, b);
            let p = quantize_to_ring(g_rho(g, &params), &params);
            prop_assert_eq!(g_rho_inverse(&p), g);
        }
    }

    proptest! {
        #[test]
        fn separable_rounding_matches_neighbourhood_search(
            re in -1e4f64..1e4, im in -1e4f64..1e4, rho in prop_oneof![Just(0.5), Just(1.0), Just(2.0), Just(3.7)]
        ) {
            let params = RingParams::real(rho).unwrap();
            let mu = Complex64::new(re, im);
            let p = quantize_to_ring(mu, &params);
            let best = brute_nearest(mu, &params, (p.a, p.b), 1);
            prop_assert_eq!(best, (p.a, p.b));
        }

        #[test]
        fn general_rho_matches_brute_force(
            re in -50f64..50.0, im in -50f64..50.0,
            rho_re in prop_oneof![-3.0f64..-0.05, 0.05f64..3.0], rho_im in -3f64..3.0,
        ) {
            let params = RingParams::new(Complex64::new(rho_re, rho_im)).unwrap();
            let mu = Complex64::new(re, im);
            let p = quantize_to_ring(mu, &params);
            let d = (mu - p.value()).norm_sqr();
            let (ba, bb) = brute_nearest(mu, &params, (p.a, p.b), 8);
            let bd = (mu - g_rho(GaussianInt::new(ba, bb), &params)).norm_sqr();
            prop_assert!(d <= bd * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn embedding_is_additive(
            a1 in -1_000_000i64..1_000_000, b1 in -1_000_000i64..1_000_000,
            a2 in -1_000_000i64..1_000_000, b2 in -1_000_000i64..1_000_000,
            params in rho_strategy(),
        ) {
            let (g1, g2) = (GaussianInt::new(a1, b1), GaussianInt::new(a2, b2));
            let lhs = g_rho(g1 + g2, &params);
            let rhs = g_rho(g1, &params) + g_rho(g2, &params);
            let scale = lhs.norm().max(1.0);
            prop_assert!((lhs - rhs).norm() <= 4.0 * f64::EPSILON * scale);
        }
    }
}
