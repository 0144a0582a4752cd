//! SumComp encoder and decoder, constellation presets and the Gray PAM-4
//! reference used to demonstrate destructive overlaps.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use crate::ring::{
    extended_euclid, g_rho, g_rho_inverse, quantize_to_ring, BezoutPair, GaussianInt, RingError,
    RingParams, RingPoint,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("grid subset is empty")]
    EmptyLambda,
    #[error("value {0} has no representative in the constellation")]
    ValueNotRepresentable(i64),
    #[error("QAM order {0} is not a perfect square >= 4")]
    NotPerfectSquare(u64),
    #[error("PAM order must be at least 2, got {0}")]
    OrderTooSmall(u64),
    #[error("gamma2 must be non-zero and finite")]
    ZeroScale,
    #[error("Gray PAM-4 symbol index must be in 0..=3, got {0}")]
    SymbolOutOfRange(u8),
}

/// `E(m) = m*mu1 + k*q2 + (m*mu2 - k*q1) i`: the `k`-th point on the line of
/// Gaussian integers that all carry the value `m`.
pub fn encode_line(m: i64, k: i64, bezout: &BezoutPair) -> GaussianInt {
    let (q1, q2) = (bezout.q1 as i64, bezout.q2 as i64);
    GaussianInt::new(m * bezout.mu1 + k * q2, m * bezout.mu2 - k * q1)
}

/// The value map `c = re*q1 + im*q2`.
pub fn value_of(g: GaussianInt, bezout: &BezoutPair) -> i64 {
    g.re * bezout.q1 as i64 + g.im * bezout.q2 as i64
}

/// A finite set of lattice coordinates from which constellation points are
/// drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSubset {
    points: Vec<GaussianInt>,
    extents: Option<(u64, u64)>,
}

impl GridSubset {
    /// `{(a, b) : 0 <= a < m1, 0 <= b < m2}`.
    pub fn rectangular(m1: u64, m2: u64) -> Self {
        let mut points = Vec::with_capacity((m1 * m2) as usize);
        for a in 0..m1 as i64 {
            for b in 0..m2 as i64 {
                points.push(GaussianInt::new(a, b));
            }
        }
        points.sort();
        GridSubset {
            points,
            extents: Some((m1, m2)),
        }
    }

    pub fn from_points<I: IntoIterator<Item = (i64, i64)>>(points: I) -> Self {
        let mut points: Vec<GaussianInt> = points
            .into_iter()
            .map(|(a, b)| GaussianInt::new(a, b))
            .collect();
        points.sort();
        points.dedup();
        GridSubset {
            points,
            extents: None,
        }
    }

    pub fn points(&self) -> &[GaussianInt] {
        &self.points
    }

    /// `(M1, M2)` for rectangular grids.
    pub fn extents(&self) -> Option<(u64, u64)> {
        self.extents
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inclusive coordinate ranges `((a_min, a_max), (b_min, b_max))`.
    pub fn bounds(&self) -> Option<((i64, i64), (i64, i64))> {
        let first = self.points.first()?;
        let mut a = (first.re, first.re);
        let mut b = (first.im, first.im);
        for p in &self.points {
            a = (a.0.min(p.re), a.1.max(p.re));
            b = (b.0.min(p.im), b.1.max(p.im));
        }
        Some((a, b))
    }

    /// Number of distinct values each coordinate axis spans, i.e. the extents
    /// of the bounding box.
    pub fn axis_levels(&self) -> (u64, u64) {
        match self.bounds() {
            Some(((a0, a1), (b0, b1))) => ((a1 - a0 + 1) as u64, (b1 - b0 + 1) as u64),
            None => (0, 0),
        }
    }
}

/// A finite map from input values to complex transmit symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    symbols: Vec<(i64, Complex64)>,
}

impl Constellation {
    pub fn new(symbols: Vec<(i64, Complex64)>) -> Self {
        Constellation { symbols }
    }

    pub fn symbols(&self) -> &[(i64, Complex64)] {
        &self.symbols
    }

    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.symbols.iter().map(|&(_, x)| x)
    }

    pub fn centroid(&self) -> Complex64 {
        if self.symbols.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        self.points().sum::<Complex64>() / self.symbols.len() as f64
    }

    /// `(c, re, im)` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "c,re,im")?;
        for &(c, x) in &self.symbols {
            writeln!(out, "{c},{},{}", x.re, x.im)?;
        }
        Ok(())
    }
}

/// Mean symbol energy `(1/q) * sum |x_i|^2`.
pub fn constellation_energy(c: &Constellation) -> f64 {
    if c.order() == 0 {
        return 0.0;
    }
    c.points().map(|x| x.norm_sqr()).sum::<f64>() / c.order() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumCompCode {
    bezout: BezoutPair,
    params: RingParams,
    lambda: GridSubset,
    gamma1: Complex64,
    gamma2: Complex64,
    reps: BTreeMap<i64, GaussianInt>,
    all_reps: BTreeMap<i64, Vec<GaussianInt>>,
    // Grid axes that carry a single coordinate are pinned at K times that
    // coordinate in the aggregate, so the decoder ignores that direction.
    pinned_a: Option<i64>,
    pinned_b: Option<i64>,
}

/// Groups the points of `lambda` by value; among several points with the same
/// value the lexicographically smallest `(a, b)` becomes the representative.
pub fn build_code(
    q1: u64,
    q2: u64,
    rho: Complex64,
    lambda: GridSubset,
    gamma1: Complex64,
    gamma2: Complex64,
) -> Result<SumCompCode, CodecError> {
    let bezout = extended_euclid(q1, q2)?;
    let params = RingParams::new(rho)?;
    if lambda.is_empty() {
        return Err(CodecError::EmptyLambda);
    }
    if gamma2.norm_sqr() == 0.0 || !gamma2.re.is_finite() || !gamma2.im.is_finite() {
        return Err(CodecError::ZeroScale);
    }
    let mut all_reps: BTreeMap<i64, Vec<GaussianInt>> = BTreeMap::new();
    for &p in lambda.points() {
        all_reps.entry(value_of(p, &bezout)).or_default().push(p);
    }
    // Points are already sorted, so the first entry of each group is the
    // lexicographic minimum.
    let reps = all_reps.iter().map(|(&c, ps)| (c, ps[0])).collect();
    let ((a0, a1), (b0, b1)) = lambda.bounds().expect("non-empty");
    Ok(SumCompCode {
        bezout,
        params,
        gamma1,
        gamma2,
        reps,
        all_reps,
        pinned_a: (a0 == a1).then_some(a0),
        pinned_b: (b0 == b1).then_some(b0),
        lambda,
    })
}

impl SumCompCode {
    pub fn bezout(&self) -> &BezoutPair {
        &self.bezout
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn lambda(&self) -> &GridSubset {
        &self.lambda
    }

    pub fn gamma1(&self) -> Complex64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> Complex64 {
        self.gamma2
    }

    /// Number of representable input values.
    pub fn order(&self) -> usize {
        self.reps.len()
    }

    /// Representable values in ascending order.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        self.reps.keys().copied()
    }

    pub fn is_representable(&self, c: i64) -> bool {
        self.reps.contains_key(&c)
    }

    pub fn representative(&self, c: i64) -> Result<GaussianInt, CodecError> {
        self.reps
            .get(&c)
            .copied()
            .ok_or(CodecError::ValueNotRepresentable(c))
    }

    /// Every grid point carrying `c`, in lexicographic order.
    pub fn grid_points_of(&self, c: i64) -> &[GaussianInt] {
        self.all_reps.get(&c).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn encode(&self, c: i64) -> Result<Complex64, CodecError> {
        let g = self.representative(c)?;
        Ok(self.gamma2 * g_rho(g, &self.params) + self.gamma1)
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::new(
            self.reps
                .iter()
                .map(|(&c, &g)| (c, self.gamma2 * g_rho(g, &self.params) + self.gamma1))
                .collect(),
        )
    }

    /// Same code with `gamma1` shifted so the constellation centroid is at
    /// the origin.
    pub fn centered(&self) -> SumCompCode {
        let centroid = self.constellation().centroid();
        SumCompCode {
            gamma1: self.gamma1 - centroid,
            ..self.clone()
        }
    }

    /// `(r - K*gamma1) / gamma2`.
    pub fn denormalize(&self, r: Complex64, k: u64) -> Complex64 {
        (r - self.gamma1 * k as f64) / self.gamma2
    }

    /// Nearest lattice point to a de-normalized aggregate of `k` symbols.
    pub fn quantize_aggregate(&self, mu: Complex64, k: u64) -> RingPoint {
        let k = k as i64;
        let rho_i = self.params.rho() * Complex64::i();
        match (self.pinned_a, self.pinned_b) {
            (Some(a0), Some(b0)) => RingPoint::new(k * a0, k * b0, self.params),
            (None, Some(b0)) => {
                let b = k * b0;
                let a = (mu - rho_i * b as f64).re.round() as i64;
                RingPoint::new(a, b, self.params)
            }
            (Some(a0), None) => {
                let a = k * a0;
                let t = (mu - Complex64::new(a as f64, 0.0)) * rho_i.conj();
                let b = (t.re / rho_i.norm_sqr()).round() as i64;
                RingPoint::new(a, b, self.params)
            }
            (None, None) => quantize_to_ring(mu, &self.params),
        }
    }

    /// Full receiver: estimate of `sum c_k` from the channel output `r` of `k`
    /// superposed symbols.
    pub fn decode(&self, r: Complex64, k: u64) -> i64 {
        let mu = self.denormalize(r, k);
        decode_sum(&self.quantize_aggregate(mu, k), self)
    }

    /// Exact mean energy of the centered constellation, available when the
    /// lattice is the Gaussian integers and `gamma2 = 1`.
    pub fn centered_energy_exact(&self) -> Option<BigRational> {
        let rho = self.params.rho();
        if rho != Complex64::new(1.0, 0.0) || self.gamma2 != Complex64::new(1.0, 0.0) {
            return None;
        }
        let n = BigInt::from(self.reps.len());
        let (sa, sb) = self.reps.values().fold((0i128, 0i128), |(sa, sb), g| {
            (sa + g.re as i128, sb + g.im as i128)
        });
        let mean_a = BigRational::new(BigInt::from(sa), n.clone());
        let mean_b = BigRational::new(BigInt::from(sb), n.clone());
        let total = self.reps.values().fold(BigRational::from_integer(0.into()), |acc, g| {
            let da = BigRational::from_integer(g.re.into()) - &mean_a;
            let db = BigRational::from_integer(g.im.into()) - &mean_b;
            acc + &da * &da + &db * &db
        });
        Some(total / BigRational::from_integer(n))
    }
}

pub fn encode(c: i64, code: &SumCompCode) -> Result<Complex64, CodecError> {
    code.encode(c)
}

pub fn denormalize(r: Complex64, k: u64, code: &SumCompCode) -> Complex64 {
    code.denormalize(r, k)
}

/// Value carried by a quantized, de-normalized aggregate. The `K*gamma1`
/// offset has already been removed by [`denormalize`], so this is just the
/// value map.
pub fn decode_sum(r_lattice: &RingPoint, code: &SumCompCode) -> i64 {
    value_of(g_rho_inverse(r_lattice), &code.bezout)
}

fn isqrt(q: u64) -> Option<u64> {
    let r = (q as f64).sqrt().round() as u64;
    (r * r == q).then_some(r)
}

/// Square QAM: `(q1, q2) = (1, sqrt q)` on the `sqrt q x sqrt q` grid, with
/// the constant `-(sqrt q)(1 + i)` offset carried by `gamma1`.
pub fn qam_preset(q: u64) -> Result<SumCompCode, CodecError> {
    let m = match isqrt(q) {
        Some(m) if q >= 4 => m,
        _ => return Err(CodecError::NotPerfectSquare(q)),
    };
    let s = m as f64;
    build_code(
        1,
        m,
        Complex64::new(1.0, 0.0),
        GridSubset::rectangular(m, m),
        Complex64::new(-s, -s),
        Complex64::new(1.0, 0.0),
    )
}

/// PAM: `(q1, q2) = (1, q)`, symbols `c - floor(q/2)` on the real line. Even
/// orders give the asymmetric set `{-q/2, ..., q/2 - 1}`.
pub fn pam_preset(q: u64) -> Result<SumCompCode, CodecError> {
    if q < 2 {
        return Err(CodecError::OrderTooSmall(q));
    }
    build_code(
        1,
        q,
        Complex64::new(1.0, 0.0),
        GridSubset::rectangular(q, 1),
        Complex64::new(-((q / 2) as f64), 0.0),
        Complex64::new(1.0, 0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexVariant {
    /// `(q1, q2) = (2, 3)`: values `{0..=8} \ {4}`.
    A,
    /// `(q1, q2) = (1, 2)`: values `0..=5`, with 1 and 4 on two points each.
    B,
}

/// Eight points in three staggered rows: two, four, two.
pub const HEX_QAM8_GRID: [(i64, i64); 8] = [
    (0, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (2, 1),
    (0, 2),
    (1, 2),
];

/// `rho = e^{-i pi/6}` so that `rho*i = e^{i pi/3}` and the grid is the
/// hexagonal lattice.
pub fn hex_rho() -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_6)
}

pub fn hex_qam8_preset(variant: HexVariant) -> Result<SumCompCode, CodecError> {
    let (q1, q2) = match variant {
        HexVariant::A => (2, 3),
        HexVariant::B => (1, 2),
    };
    build_code(
        q1,
        q2,
        hex_rho(),
        GridSubset::from_points(HEX_QAM8_GRID),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    )
}

/// Gray-coded PAM-4 amplitude `(s + floor(s/2) - 2 floor(s/3) - 3) * Es/2`.
pub fn gray_pam4_baseline(s: u8, es: f64) -> Result<f64, CodecError> {
    if s > 3 {
        return Err(CodecError::SymbolOutOfRange(s));
    }
    let s = s as i32;
    Ok((s + s / 2 - 2 * (s / 3) - 3) as f64 * es / 2.0)
}
