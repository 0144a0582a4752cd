//! Monte Carlo experiments and deterministic tables.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{
    bops_decoder, bops_encoder, channelcomp_decoder_log10, channelcomp_encoder_log10, mae_bound,
    mse_analytic, ComplexityInputs, ErrorModelInputs, Extent,
};
use crate::channel::{
    awgn, rayleigh_channel, sigma_from_snr, transmit_faded, transmit_mac, trial_rng, ChannelError,
    Fading, CHANNEL_FLOOR,
};
use crate::codec::{
    constellation_energy, gray_pam4_baseline, hex_qam8_preset, pam_preset, qam_preset, CodecError,
    HexVariant, SumCompCode,
};
use crate::harness::config::{ConfigError, Experiment, ExperimentConfig, ExtentMode, InputDistribution, Modulation};
use crate::harness::csv::{Cell, Table};
use crate::harness::stats::{merge_pairwise, TrialStats};
use crate::nomographic::{preset, NomographicError, NomographicSpec, PresetName, UniformQuantizer};

/// Trials per work unit. Fixed so that results do not depend on the number
/// of workers.
pub const CHUNK: u64 = 1024;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Nomographic(#[from] NomographicError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// Whether the error stems from the requested parameters rather than
    /// from the run itself.
    pub fn is_config(&self) -> bool {
        !matches!(self, HarnessError::Pool(_))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes `parts` into `seed`; used to give every SNR point its own stream
/// family.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn build_modulation(preset: Modulation, q: u64, centered: bool) -> Result<SumCompCode, HarnessError> {
    let code = match preset {
        Modulation::Qam => qam_preset(q)?,
        Modulation::Pam => pam_preset(q)?,
        Modulation::HexA => hex_qam8_preset(HexVariant::A)?,
        Modulation::HexB => hex_qam8_preset(HexVariant::B)?,
    };
    Ok(if centered { code.centered() } else { code })
}

/// Error-model inputs for `k` superposed symbols of `code` at noise `sigma`.
pub fn error_model(code: &SumCompCode, k: usize, sigma: f64, mode: ExtentMode) -> ErrorModelInputs {
    let bz = code.bezout();
    let (la, lb) = code.lambda().axis_levels();
    let extent = |levels: u64| match mode {
        ExtentMode::Unbounded if levels <= 1 => Extent::Finite(1),
        ExtentMode::Unbounded => Extent::Unbounded,
        ExtentMode::Aggregate => Extent::Finite(k as u64 * (levels - 1) + 1),
    };
    ErrorModelInputs {
        q1: bz.q1,
        q2: bz.q2,
        rho_abs: code.params().rho().norm(),
        m1: extent(la),
        m2: extent(lb),
        sigma: sigma / code.gamma2().norm(),
    }
}

/// Runs trials in fixed-size chunks on a private thread pool and merges the
/// chunk results in index order.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        Ok(Runner { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn run<T, F, M>(&self, trials: u64, chunk: F, merge: M) -> T
    where
        T: Clone + Default + Send,
        F: Fn(u64, u64) -> T + Sync,
        M: Fn(&mut T, &T),
    {
        let n_chunks = trials.div_ceil(CHUNK);
        let parts: Vec<T> = self.pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(|c| chunk(c * CHUNK, ((c + 1) * CHUNK).min(trials)))
                .collect()
        });
        merge_pairwise(parts, merge).unwrap_or_default()
    }
}

fn receive<R: Rng>(symbols: &[Complex64], sigma: f64, fading: Fading, rng: &mut R) -> Complex64 {
    match fading {
        Fading::None => transmit_mac(symbols, sigma, rng),
        Fading::Rayleigh => {
            let hs: Vec<Complex64> = symbols
                .iter()
                .map(|_| loop {
                    let h = rayleigh_channel(rng);
                    if h.norm() >= CHANNEL_FLOOR {
                        break h;
                    }
                })
                .collect();
            transmit_faded(symbols, &hs, sigma, rng).expect("channels are above the floor")
        }
    }
}

fn snr_cell(snr: f64) -> Cell {
    Cell::Float(snr)
}

pub fn run_mse_sweep(cfg: &ExperimentConfig, runner: &Runner) -> Result<Table, HarnessError> {
    let code = build_modulation(cfg.preset, cfg.q, cfg.centered())?;
    let constellation = code.constellation();
    let values: Vec<i64> = code.values().collect();
    let symbols: Vec<Complex64> = constellation.points().collect();
    let k = cfg.k;

    let mut table = Table::new(&["snr_db", "sigma", "mse_empirical", "mse_analytic", "stderr", "trials"]);
    for snr in cfg.snr_grid() {
        let sigma = sigma_from_snr(&constellation, snr)?;
        let seed = derive_seed(cfg.seed, &[cfg.experiment.tag(), snr.to_bits()]);
        let stats = runner.run(
            cfg.trials,
            |start, end| {
                let mut st = TrialStats::default();
                let mut buf = Vec::with_capacity(k);
                for t in start..end {
                    let mut rng = trial_rng(seed, t);
                    buf.clear();
                    let mut sum = 0i64;
                    for _ in 0..k {
                        let j = rng.random_range(0..values.len());
                        sum += values[j];
                        buf.push(symbols[j]);
                    }
                    let r = receive(&buf, sigma, cfg.fading, &mut rng);
                    st.push_sum_error(code.decode(r, k as u64) - sum);
                }
                st
            },
            TrialStats::merge,
        );
        let analytic = mse_analytic(&error_model(&code, k, sigma, cfg.extents));
        table.push(vec![
            snr_cell(snr),
            sigma.into(),
            stats.sum_err.mse().into(),
            analytic.into(),
            stats.sum_err.mse_stderr().into(),
            Cell::Int(stats.sum_err.n as i64),
        ]);
    }
    Ok(table)
}

/// The pieces shared by experiments that evaluate a nomographic function.
pub struct FunctionSetup {
    pub code: SumCompCode,
    pub spec: NomographicSpec,
    pub quant: UniformQuantizer,
    /// Transmit symbol of each quantizer level.
    pub symbols: Vec<Complex64>,
    /// Inclusive integer range of the inputs `s_k`.
    pub s_range: (i64, i64),
    /// Quantizer level of each input, indexed by `s - s_range.0`.
    pub level_of: Vec<u64>,
}

fn isqrt(q: u64) -> u64 {
    let mut r = (q as f64).sqrt() as u64;
    while r * r > q {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= q {
        r += 1;
    }
    r
}

/// Inputs used when the configuration does not choose them.
pub fn default_input(cfg: &ExperimentConfig) -> InputDistribution {
    let q = cfg.q as i64;
    match cfg.function {
        PresetName::ArithmeticMean | PresetName::ArithmeticSum => {
            if cfg.experiment == Experiment::NmseCompare {
                InputDistribution::UniformOverRange(1, q)
            } else {
                InputDistribution::UniformOverZq
            }
        }
        PresetName::EuclideanNorm => InputDistribution::UniformOverRange(1, isqrt(cfg.q) as i64),
        PresetName::GeometricMean | PresetName::MaxApprox => InputDistribution::UniformOverRange(1, 8),
    }
}

pub fn function_setup(cfg: &ExperimentConfig, k: usize) -> Result<FunctionSetup, HarnessError> {
    let code = build_modulation(cfg.preset, cfg.q, cfg.centered())?;
    let q = cfg.q;
    let contiguous = code.order() as u64 == q && code.values().eq(0..q as i64);
    if !contiguous {
        return Err(ConfigError::Invalid(format!(
            "{} does not carry every level 0..{}; function experiments need a full alphabet",
            cfg.preset,
            q - 1
        ))
        .into());
    }
    let s_range = match cfg.input_distribution.unwrap_or_else(|| default_input(cfg)) {
        InputDistribution::UniformOverZq => (0, q as i64 - 1),
        InputDistribution::UniformOverRange(lo, hi) => (lo, hi),
    };
    let spec = preset(cfg.function, k, (s_range.0 as f64, s_range.1 as f64))?;
    let quant = spec.quantizer(q)?;
    let symbols = (0..q as i64).map(|c| code.encode(c)).collect::<Result<Vec<_>, _>>()?;
    let level_of = (s_range.0..=s_range.1)
        .map(|s| quant.quantize(spec.phi(s as f64)).level)
        .collect();
    Ok(FunctionSetup {
        code,
        spec,
        quant,
        symbols,
        s_range,
        level_of,
    })
}

impl FunctionSetup {
    fn draw<R: Rng>(&self, rng: &mut R, k: usize, s: &mut Vec<f64>, levels: &mut Vec<u64>) {
        s.clear();
        levels.clear();
        for _ in 0..k {
            let v = rng.random_range(self.s_range.0..=self.s_range.1);
            s.push(v as f64);
            levels.push(self.level_of[(v - self.s_range.0) as usize]);
        }
    }

    fn mae_modulus_bound(&self, k: usize, sigma: f64, mode: ExtentMode) -> f64 {
        let model = error_model(&self.code, k, sigma, mode);
        mae_bound(&model, self.spec.modulus().rescaled(self.quant.step()))
    }
}

pub fn run_mae_sweep(cfg: &ExperimentConfig, runner: &Runner) -> Result<Table, HarnessError> {
    let k = cfg.k;
    let setup = function_setup(cfg, k)?;
    let constellation = setup.code.constellation();
    let mut table = Table::new(&["snr_db", "sigma", "mae_empirical", "mae_bound", "stderr", "trials"]);
    for snr in cfg.snr_grid() {
        let sigma = sigma_from_snr(&constellation, snr)?;
        let seed = derive_seed(cfg.seed, &[cfg.experiment.tag(), snr.to_bits()]);
        let stats = runner.run(
            cfg.trials,
            |start, end| {
                let mut st = TrialStats::default();
                let (mut s, mut levels, mut buf) = (Vec::new(), Vec::new(), Vec::with_capacity(k));
                for t in start..end {
                    let mut rng = trial_rng(seed, t);
                    setup.draw(&mut rng, k, &mut s, &mut levels);
                    buf.clear();
                    buf.extend(levels.iter().map(|&c| setup.symbols[c as usize]));
                    let r = receive(&buf, sigma, cfg.fading, &mut rng);
                    let level_sum = setup.code.decode(r, k as u64);
                    let f_hat = setup.spec.post_process(level_sum as f64, &setup.quant);
                    let f = setup.spec.evaluate_exact(&s);
                    st.push_sum_error(level_sum - levels.iter().sum::<u64>() as i64);
                    st.push_error(f, f_hat);
                }
                st
            },
            TrialStats::merge,
        );
        let bound = setup.mae_modulus_bound(k, sigma, cfg.extents);
        table.push(vec![
            snr_cell(snr),
            sigma.into(),
            stats.abs_err.mean().into(),
            bound.into(),
            stats.abs_err.stderr().into(),
            Cell::Int(stats.abs_err.n as i64),
        ]);
    }
    Ok(table)
}

pub const NMSE_CHANNELCOMP_NOTE: &str =
    "nmse_channelcomp is left empty: the ChannelComp baseline needs an SDP solver and is not implemented";

/// NMSE of SumComp against the analog AirComp and orthogonal OFDMA baselines.
///
/// AirComp sends the real amplitude `A c_k` with `A` chosen so that its mean
/// energy over uniform levels equals the SumComp constellation's; the
/// receiver takes `Re(r)/A` as the level sum. OFDMA detects every node's
/// symbol separately and evaluates `f` on the recovered inputs. All three see
/// the same inputs and the same per-component `sigma`.
pub fn run_nmse_compare(cfg: &ExperimentConfig, runner: &Runner) -> Result<Table, HarnessError> {
    let k = cfg.k;
    let setup = function_setup(cfg, k)?;
    if setup.s_range.0 <= 0 && setup.spec.name() != PresetName::MaxApprox {
        return Err(ConfigError::Invalid("NMSE divides by f, so inputs must be positive".into()).into());
    }
    let constellation = setup.code.constellation();
    let q = cfg.q as f64;
    let mean_level_sq = (q - 1.0) * (2.0 * q - 1.0) / 6.0;
    let amp = (constellation_energy(&constellation) / mean_level_sq).sqrt();

    let mut table = Table::new(&[
        "snr_db",
        "sigma",
        "nmse_sumcomp",
        "stderr_sumcomp",
        "nmse_aircomp",
        "stderr_aircomp",
        "nmse_ofdma",
        "stderr_ofdma",
        "nmse_channelcomp",
    ]);
    table.comments.push(NMSE_CHANNELCOMP_NOTE.into());
    type Triple = [TrialStats; 3];
    for snr in cfg.snr_grid() {
        let sigma = sigma_from_snr(&constellation, snr)?;
        let seed = derive_seed(cfg.seed, &[cfg.experiment.tag(), snr.to_bits()]);
        let stats: Triple = runner.run(
            cfg.trials,
            |start, end| {
                let mut st: Triple = Default::default();
                let (mut s, mut levels) = (Vec::new(), Vec::new());
                let (mut buf, mut air, mut s_hat) = (Vec::new(), Vec::new(), Vec::new());
                for t in start..end {
                    let mut rng = trial_rng(seed, t);
                    setup.draw(&mut rng, k, &mut s, &mut levels);
                    let f = setup.spec.evaluate_exact(&s);

                    buf.clear();
                    buf.extend(levels.iter().map(|&c| setup.symbols[c as usize]));
                    let r = receive(&buf, sigma, cfg.fading, &mut rng);
                    let level_sum = setup.code.decode(r, k as u64) as f64;
                    st[0].push_estimate(f, setup.spec.post_process(level_sum, &setup.quant));

                    air.clear();
                    air.extend(levels.iter().map(|&c| Complex64::new(amp * c as f64, 0.0)));
                    let r = receive(&air, sigma, cfg.fading, &mut rng);
                    st[1].push_estimate(f, setup.spec.post_process(r.re / amp, &setup.quant));

                    s_hat.clear();
                    for x in &buf {
                        let y = x + awgn(sigma, &mut rng);
                        let level = nearest_symbol(&setup.symbols, y);
                        s_hat.push(setup.spec.phi_inverse(setup.quant.dequantize(level)));
                    }
                    st[2].push_estimate(f, setup.spec.evaluate_exact(&s_hat));
                }
                st
            },
            |a: &mut Triple, b: &Triple| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.merge(y);
                }
            },
        );
        table.push(vec![
            snr_cell(snr),
            sigma.into(),
            stats[0].nmse.mean().into(),
            stats[0].nmse.stderr().into(),
            stats[1].nmse.mean().into(),
            stats[1].nmse.stderr().into(),
            stats[2].nmse.mean().into(),
            stats[2].nmse.stderr().into(),
            Cell::Empty,
        ]);
    }
    Ok(table)
}

/// Index of the symbol closest to `y`; ties go to the lower index.
pub fn nearest_symbol(symbols: &[Complex64], y: Complex64) -> u64 {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, x) in symbols.iter().enumerate() {
        let d = (y - x).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best as u64
}

/// All input pairs that land on one received point.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapClass {
    pub received: Complex64,
    pub pairs: Vec<(u8, u8)>,
    /// Distinct input sums, ascending.
    pub sums: Vec<i64>,
}

impl OverlapClass {
    pub fn is_collision(&self) -> bool {
        self.sums.len() >= 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub scheme: &'static str,
    pub classes: Vec<OverlapClass>,
}

impl OverlapReport {
    pub fn collisions(&self) -> Vec<&OverlapClass> {
        self.classes.iter().filter(|c| c.is_collision()).collect()
    }
}

fn group_pairs(scheme: &'static str, symbol: impl Fn(u8) -> Complex64) -> OverlapReport {
    let mut groups: BTreeMap<(i64, i64), (Complex64, Vec<(u8, u8)>)> = BTreeMap::new();
    for s1 in 0..4u8 {
        for s2 in 0..4u8 {
            let r = symbol(s1) + symbol(s2);
            // Symbols here sit on a half-integer grid, so this key is exact.
            let key = ((r.re * 2.0).round() as i64, (r.im * 2.0).round() as i64);
            groups.entry(key).or_insert((r, Vec::new())).1.push((s1, s2));
        }
    }
    let classes = groups
        .into_values()
        .map(|(received, pairs)| {
            let mut sums: Vec<i64> = pairs.iter().map(|&(a, b)| a as i64 + b as i64).collect();
            sums.sort();
            sums.dedup();
            OverlapClass { received, pairs, sums }
        })
        .collect();
    OverlapReport { scheme, classes }
}

/// Two-node superposition of Gray-coded PAM-4 (`Es = 2`).
pub fn gray_pam4_overlaps() -> OverlapReport {
    group_pairs("gray-pam4", |s| {
        Complex64::new(gray_pam4_baseline(s, 2.0).expect("s < 4"), 0.0)
    })
}

/// Two-node superposition of the SumComp PAM-4 code.
pub fn sumcomp_pam4_overlaps() -> OverlapReport {
    let code = pam_preset(4).expect("PAM-4 is valid");
    group_pairs("sumcomp-pam4", move |s| code.encode(s as i64).expect("0..4 representable"))
}

pub fn run_overlap_demo() -> Table {
    let mut table = Table::new(&["scheme", "received_re", "received_im", "pairs", "sums", "collision"]);
    for report in [gray_pam4_overlaps(), sumcomp_pam4_overlaps()] {
        for class in &report.classes {
            let pairs: Vec<String> = class.pairs.iter().map(|(a, b)| format!("{a}+{b}")).collect();
            let sums: Vec<String> = class.sums.iter().map(i64::to_string).collect();
            table.push(vec![
                report.scheme.into(),
                class.received.re.into(),
                class.received.im.into(),
                Cell::Text(pairs.join(";")),
                Cell::Text(sums.join(";")),
                Cell::Int(class.is_collision() as i64),
            ]);
        }
    }
    table
}

pub fn run_analytic_table(cfg: &ExperimentConfig) -> Result<Table, HarnessError> {
    let code = build_modulation(cfg.preset, cfg.q, cfg.centered())?;
    let constellation = code.constellation();
    let q = cfg.q as f64;
    let mut table = Table::new(&[
        "k",
        "q",
        "snr_db",
        "sigma",
        "mse_analytic",
        "mae_bound",
        "bops_encoder",
        "bops_decoder",
        "channelcomp_encoder_log10",
        "channelcomp_symmetric_encoder_log10",
        "channelcomp_decoder_log10",
    ]);
    let or_empty = |v: Result<f64, _>| v.map(Cell::Float).unwrap_or(Cell::Empty);
    for k in cfg.k_values() {
        let domain = match cfg.input_distribution.unwrap_or_else(|| default_input(cfg)) {
            InputDistribution::UniformOverZq => (0.0, q - 1.0),
            InputDistribution::UniformOverRange(lo, hi) => (lo as f64, hi as f64),
        };
        let spec = preset(cfg.function, k, domain)?;
        let quant = spec.quantizer(cfg.q)?;
        let w = spec.modulus().rescaled(quant.step());
        let cx = ComplexityInputs::uniform(k, q, cfg.bops_a, cfg.bops_b, cfg.bops_e, cfg.bops_d);
        let (enc, dec) = (or_empty(bops_encoder(&cx)), or_empty(bops_decoder(&cx)));
        for snr in cfg.snr_grid() {
            let sigma = sigma_from_snr(&constellation, snr)?;
            let model = error_model(&code, k, sigma, cfg.extents);
            table.push(vec![
                Cell::Int(k as i64),
                Cell::Int(cfg.q as i64),
                snr_cell(snr),
                sigma.into(),
                mse_analytic(&model).into(),
                mae_bound(&model, w).into(),
                enc.clone(),
                dec.clone(),
                channelcomp_encoder_log10(k, q, false).into(),
                channelcomp_encoder_log10(k, q, true).into(),
                channelcomp_decoder_log10(k, q).into(),
            ]);
        }
    }
    Ok(table)
}

/// Validates `cfg` and runs the experiment it names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table, HarnessError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::OverlapDemo => Ok(run_overlap_demo()),
        Experiment::AnalyticTable => run_analytic_table(cfg),
        exp => {
            let runner = Runner::new(cfg.workers)?;
            match exp {
                Experiment::MseSweep => run_mse_sweep(cfg, &runner),
                Experiment::MaeSweep => run_mae_sweep(cfg, &runner),
                Experiment::NmseCompare => run_nmse_compare(cfg, &runner),
                _ => unreachable!(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(exp: Experiment) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(exp);
        cfg.trials = 3000;
        cfg.snr_list = Some(vec![-5.0, 10.0, f64::INFINITY]);
        cfg
    }

    #[test]
    fn seeds_are_spread() {
        assert_ne!(derive_seed(1, &[1, 2]), derive_seed(1, &[2, 1]));
        assert_ne!(derive_seed(1, &[1]), derive_seed(2, &[1]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }

    #[test]
    fn runner_is_worker_independent() {
        let sum = |workers| {
            Runner::new(workers).unwrap().run(
                10_000,
                |a, b| {
                    let mut st = TrialStats::default();
                    for t in a..b {
                        let x: f64 = trial_rng(3, t).random();
                        st.push_error(1.0, x);
                    }
                    st
                },
                TrialStats::merge,
            )
        };
        let one = sum(1);
        assert_eq!(one.abs_err.n, 10_000);
        assert_eq!(one, sum(3));
    }

    #[test]
    fn noiseless_rows_are_exact() {
        let t = run_experiment(&small(Experiment::MseSweep)).unwrap();
        let last = t.rows.last().unwrap();
        assert_eq!(last[2], Cell::Float(0.0));
        assert_eq!(last[3], Cell::Float(0.0));

        let t = run_experiment(&small(Experiment::MaeSweep)).unwrap();
        assert_eq!(t.rows.last().unwrap()[2], Cell::Float(0.0));

        let t = run_experiment(&small(Experiment::NmseCompare)).unwrap();
        let last = t.rows.last().unwrap();
        assert_eq!(last[2], Cell::Float(0.0));
        assert_eq!(last[6], Cell::Float(0.0));
        // AirComp divides by the amplitude scale, so only rounding noise is left.
        assert!(last[4].as_f64().unwrap() < 1e-20);
        assert_eq!(last[8], Cell::Empty);
    }

    #[test]
    fn overlap_counts() {
        let gray = gray_pam4_overlaps();
        let collisions = gray.collisions();
        assert_eq!(collisions.len(), 3);
        let witness = collisions
            .iter()
            .find(|c| c.pairs.contains(&(1, 1)))
            .expect("(1,1) collides");
        assert!(witness.pairs.contains(&(0, 3)) && witness.pairs.contains(&(3, 0)));
        assert_eq!(witness.sums, vec![2, 3]);
        assert!(sumcomp_pam4_overlaps().collisions().is_empty());
        assert_eq!(sumcomp_pam4_overlaps().classes.len(), 7);
    }

    #[test]
    fn error_model_extents() {
        let pam = pam_preset(16).unwrap();
        let m = error_model(&pam, 100, 1.0, ExtentMode::Unbounded);
        assert_eq!((m.m1, m.m2), (Extent::Unbounded, Extent::Finite(1)));
        let m = error_model(&pam, 100, 1.0, ExtentMode::Aggregate);
        assert_eq!((m.m1, m.m2), (Extent::Finite(1501), Extent::Finite(1)));
        let qam = qam_preset(16).unwrap();
        let m = error_model(&qam, 100, 1.0, ExtentMode::Aggregate);
        assert_eq!((m.q1, m.q2, m.m1, m.m2), (1, 4, Extent::Finite(301), Extent::Finite(301)));
    }

    #[test]
    fn hex_codes_rejected_for_functions() {
        let mut cfg = small(Experiment::MaeSweep);
        cfg.preset = Modulation::HexA;
        cfg.q = 8;
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
        let mut cfg = small(Experiment::MseSweep);
        cfg.preset = Modulation::HexB;
        cfg.q = 8;
        cfg.k = 10;
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.last().unwrap()[2], Cell::Float(0.0));
    }

    #[test]
    fn analytic_table_zero_noise_and_k_scaling() {
        let mut cfg = ExperimentConfig::defaults(Experiment::AnalyticTable);
        cfg.q = 256;
        cfg.k_list = Some(vec![10, 20]);
        cfg.snr_list = Some(vec![0.0, f64::INFINITY]);
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        let mse = t.values("mse_analytic");
        assert_eq!(mse[1], Some(0.0));
        assert_eq!(mse[3], Some(0.0));
        let enc = t.values("bops_encoder");
        let ratio = enc[2].unwrap() / enc[0].unwrap();
        assert!((1.8..=2.2).contains(&ratio));
        assert_eq!(t.to_csv_string(), run_experiment(&cfg).unwrap().to_csv_string());
    }
}
