//! Monte Carlo sweeps over error strength, with deterministic per-sample
//! random streams and CSV output.
//!
//! Sample `j` at grid index `g` owns the stream `derive_substream(seed, [g, j])`.
//! From it the sample draws, in order: the phase `φ ~ U[0,1)`, the three
//! disorder components, then whatever the run consumes. Two sweeps with the
//! same seed and grid therefore see the same phases and the same (unscaled)
//! disorders, whatever the scenario, and results do not depend on how samples
//! are scheduled across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{calibrate_a, CalibrationConvention, NoisePolicy};
use crate::iqpe::{run_algorithm, RunConfig, DEFAULT_GAPS_PER_ITERATION, MAX_BITS};
use crate::parec::GapPolicy;
use crate::Stream;

pub const CSV_HEADER: &str = "scenario,epsilon1,epsilon2,n_p,m,n_samples,success_rate,std_err,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Ideal,
    /// Random errors on the Hadamard gates only.
    RndH,
    RndRz,
    RndCu,
    /// Random errors on every algorithm gate.
    RndAll,
    Static,
    StaticPlusRnd,
    /// Static imperfections with PAREC; algorithm gates are noisy whenever ε₁ > 0.
    Parec {
        n_p: u32,
        noisy_pulses: bool,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Ideal => "ideal",
            Scenario::RndH => "rnd_h",
            Scenario::RndRz => "rnd_rz",
            Scenario::RndCu => "rnd_cu",
            Scenario::RndAll => "rnd_all",
            Scenario::Static => "static",
            Scenario::StaticPlusRnd => "static_plus_rnd",
            Scenario::Parec {
                noisy_pulses: false,
                ..
            } => "parec",
            Scenario::Parec {
                noisy_pulses: true, ..
            } => "parec_noisy",
        }
    }

    pub fn n_p(&self) -> u32 {
        match self {
            Scenario::Parec { n_p, .. } => *n_p,
            _ => 0,
        }
    }

    fn random_only(&self) -> bool {
        matches!(
            self,
            Scenario::RndH | Scenario::RndRz | Scenario::RndCu | Scenario::RndAll
        )
    }

    /// Noise policy, ε₂ and gap policy for coupled strengths `(ε₁, ε₂)`.
    pub fn resolve(&self, epsilon1: f64, epsilon2: f64) -> (NoisePolicy, f64, GapPolicy) {
        let gates = |h: bool, rz: bool, cu: bool| NoisePolicy {
            epsilon1,
            hadamard: h,
            rz,
            controlled_u: cu,
            pauli: false,
        };
        match *self {
            Scenario::Ideal => (NoisePolicy::NONE, 0.0, GapPolicy::BARE),
            Scenario::RndH => (gates(true, false, false), 0.0, GapPolicy::BARE),
            Scenario::RndRz => (gates(false, true, false), 0.0, GapPolicy::BARE),
            Scenario::RndCu => (gates(false, false, true), 0.0, GapPolicy::BARE),
            Scenario::RndAll => (gates(true, true, true), 0.0, GapPolicy::BARE),
            Scenario::Static => (NoisePolicy::NONE, epsilon2, GapPolicy::BARE),
            Scenario::StaticPlusRnd => (gates(true, true, true), epsilon2, GapPolicy::BARE),
            Scenario::Parec { n_p, noisy_pulses } => {
                let noise = NoisePolicy {
                    pauli: noisy_pulses,
                    ..gates(true, true, true)
                };
                (noise, epsilon2, GapPolicy::parec(n_p, noisy_pulses))
            }
        }
    }

    /// The `(ε₁, ε₂)` actually in effect, as reported in the CSV.
    pub fn effective_strengths(&self, epsilon1: f64, epsilon2: f64) -> (f64, f64) {
        match self {
            Scenario::Ideal => (0.0, 0.0),
            Scenario::Static => (0.0, epsilon2),
            s if s.random_only() => (epsilon1, 0.0),
            _ => (epsilon1, epsilon2),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a scenario name; `parec` and `parec_noisy` get `n_p = 1` until
/// overridden with [`Scenario::with_n_p`].
impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let scenario = match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ideal" => Scenario::Ideal,
            "rnd_h" => Scenario::RndH,
            "rnd_rz" => Scenario::RndRz,
            "rnd_cu" => Scenario::RndCu,
            "rnd_all" => Scenario::RndAll,
            "static" => Scenario::Static,
            "static_plus_rnd" => Scenario::StaticPlusRnd,
            "parec" => Scenario::Parec { n_p: 1, noisy_pulses: false },
            "parec_noisy" => Scenario::Parec { n_p: 1, noisy_pulses: true },
            other => {
                return Err(Error::config(format!(
                    "unknown scenario '{other}' (expected ideal, rnd_h, rnd_rz, rnd_cu, rnd_all, static, \
                     static_plus_rnd, parec or parec_noisy)"
                )))
            }
        };
        Ok(scenario)
    }
}

impl Scenario {
    pub fn with_n_p(self, n_p: u32) -> Self {
        match self {
            Scenario::Parec { noisy_pulses, .. } => Scenario::Parec { n_p, noisy_pulses },
            other => other,
        }
    }
}

/// How one sweep parameter `ε` maps onto `(ε₁, ε₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Coupling {
    /// `ε₁ = ε₂ = ε`.
    #[default]
    Equal,
    /// `ε₂ = ε`, `ε₁ = ε/5`.
    Fifth,
    /// `ε₂ = ε`, `ε₁ = 0`.
    StaticOnly,
}

impl Coupling {
    pub fn split(self, epsilon: f64) -> (f64, f64) {
        match self {
            Coupling::Equal => (epsilon, epsilon),
            Coupling::Fifth => (epsilon / 5.0, epsilon),
            Coupling::StaticOnly => (0.0, epsilon),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coupling::Equal => "equal",
            Coupling::Fifth => "fifth",
            Coupling::StaticOnly => "static-only",
        }
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "equal" => Ok(Coupling::Equal),
            "fifth" => Ok(Coupling::Fifth),
            "static-only" => Ok(Coupling::StaticOnly),
            other => Err(Error::config(format!(
                "unknown coupling '{other}' (expected equal, fifth or static-only)"
            ))),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: Scenario,
    /// Strictly increasing sweep values of `ε`.
    pub epsilons: Vec<f64>,
    pub coupling: Coupling,
    pub m: u32,
    pub n_samples: u64,
    pub seed: u64,
    pub a_convention: CalibrationConvention,
    pub gaps_per_iteration: u32,
}

impl SweepSpec {
    pub fn new(scenario: Scenario, epsilons: Vec<f64>) -> Self {
        Self {
            scenario,
            epsilons,
            coupling: Coupling::Equal,
            m: 10,
            n_samples: 2000,
            seed: 0,
            a_convention: CalibrationConvention::Published,
            gaps_per_iteration: DEFAULT_GAPS_PER_ITERATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::config("samples must be at least 1"));
        }
        if self.m == 0 || self.m > MAX_BITS {
            return Err(Error::config(format!(
                "m must be in 1..={MAX_BITS}, got {}",
                self.m
            )));
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilon grid is empty"));
        }
        if let Some(bad) = self
            .epsilons
            .iter()
            .find(|e| !(e.is_finite() && **e >= 0.0))
        {
            return Err(Error::config(format!(
                "epsilon values must be finite and >= 0, got {bad}"
            )));
        }
        if let Some(w) = self.epsilons.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::config(format!(
                "epsilon grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if self.scenario.random_only() && self.coupling == Coupling::StaticOnly {
            return Err(Error::config(format!(
                "scenario {} has no noise under coupling static-only",
                self.scenario
            )));
        }
        if self.gaps_per_iteration > 3 {
            return Err(Error::config(format!(
                "gaps per iteration must be at most 3, got {}",
                self.gaps_per_iteration
            )));
        }
        Ok(())
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(Error::config("eps-steps must be at least 1")),
        1 => Ok(vec![min]),
        _ if max <= min || max.is_nan() || min.is_nan() => Err(Error::config(format!(
            "eps-max ({max}) must exceed eps-min ({min})"
        ))),
        _ => Ok((0..steps)
            .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
            .collect()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scenario: String,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub n_p: u32,
    pub m: u32,
    pub n_samples: u64,
    pub success_rate: f64,
    pub std_err: f64,
    pub seed: u64,
}

impl SweepRecord {
    pub fn successes(&self) -> u64 {
        (self.success_rate * self.n_samples as f64).round() as u64
    }
}

/// Binomial standard error `√(p(1−p)/n)`.
pub fn standard_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha8 stream keyed by `(master, indices)`.
///
/// `key = splitmix64(master ^ splitmix64(len))`, then for each index
/// `key = splitmix64(key ^ splitmix64(index))`. The 32-byte ChaCha seed is
/// `splitmix64(key + w)` for `w = 0..4`, each little-endian. `splitmix64` is
/// the standard SplitMix64 finalizer applied to `x + 0x9E3779B97F4A7C15`.
pub fn derive_substream(master: u64, indices: &[u64]) -> Stream {
    let mut key = splitmix64(master ^ splitmix64(indices.len() as u64));
    for &idx in indices {
        key = splitmix64(key ^ splitmix64(idx));
    }
    let mut seed = [0u8; 32];
    for (w, chunk) in seed.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(key.wrapping_add(w as u64)).to_le_bytes());
    }
    Stream::from_seed(seed)
}

fn run_point(spec: &SweepSpec, grid_index: usize, a: f64) -> Result<SweepRecord> {
    let epsilon = spec.epsilons[grid_index];
    let (eps1, eps2) = spec.coupling.split(epsilon);
    let (eps1, eps2) = spec.scenario.effective_strengths(eps1, eps2);
    let (noise, epsilon2, gap_policy) = spec.scenario.resolve(eps1, eps2);

    let successes = (0..spec.n_samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = derive_substream(spec.seed, &[grid_index as u64, j]);
            let phi: f64 = rng.random();
            let cfg = RunConfig {
                m: spec.m,
                phi,
                noise,
                epsilon2,
                a,
                gap_policy,
                gaps_per_iteration: spec.gaps_per_iteration,
            };
            run_algorithm(&cfg, &mut rng).map(|r| u64::from(r.success))
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;

    let p = successes as f64 / spec.n_samples as f64;
    Ok(SweepRecord {
        scenario: spec.scenario.name().to_string(),
        epsilon1: eps1,
        epsilon2: eps2,
        n_p: spec.scenario.n_p(),
        m: spec.m,
        n_samples: spec.n_samples,
        success_rate: p,
        std_err: standard_error(p, spec.n_samples),
        seed: spec.seed,
    })
}

/// Runs every grid point on the current rayon pool. Output is identical for
/// any pool size.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let a = calibrate_a(spec.a_convention);
    (0..spec.epsilons.len())
        .map(|g| run_point(spec, g, a))
        .collect()
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

/// `x` with `digits` significant digits, formatted like C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv_to<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario,
            format_sig(r.epsilon1, 6),
            format_sig(r.epsilon2, 6),
            r.n_p,
            r.m,
            r.n_samples,
            format_sig(r.success_rate, 6),
            format_sig(r.std_err, 6),
            r.seed
        )?;
    }
    w.flush()
}

pub fn to_csv_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_csv_to(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv_to(records, BufWriter::new(file)).map_err(io_err)
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys are normalized to lowercase with `_` replaced by `-`.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!(
                "config line {}: expected 'key = value', got '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_ascii_lowercase().replace('_', "-");
        if key.is_empty() {
            return Err(Error::config(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::expected_ideal_success;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let take = |mut s: Stream| -> Vec<u64> { (0..4).map(|_| s.random::<u64>()).collect() };
        assert_eq!(
            take(derive_substream(42, &[0, 0])),
            take(derive_substream(42, &[0, 0]))
        );
        let a = take(derive_substream(42, &[0, 0]));
        let b = take(derive_substream(42, &[0, 1]));
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
        assert_ne!(
            take(derive_substream(42, &[0, 0])),
            take(derive_substream(43, &[0, 0]))
        );
        assert_ne!(
            take(derive_substream(42, &[0])),
            take(derive_substream(42, &[0, 0]))
        );
    }

    #[test]
    fn substream_prefixes_do_not_collide() {
        let mut seen = std::collections::HashSet::new();
        for g in 0..20u64 {
            for j in 0..500u64 {
                let mut s = derive_substream(7, &[g, j]);
                let prefix: [u64; 4] = std::array::from_fn(|_| s.random());
                assert!(seen.insert(prefix));
            }
        }
    }

    #[test]
    fn format_sig_matches_printf_g() {
        assert_eq!(format_sig(0.9035, 6), "0.9035");
        assert_eq!(format_sig(0.123456789, 6), "0.123457");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(0.30000000000000004, 6), "0.3");
        assert_eq!(format_sig(0.00012345678, 6), "0.000123457");
        assert_eq!(format_sig(0.000012345678, 6), "1.23457e-05");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(999999.7, 6), "1e+06");
        assert_eq!(format_sig(0.0066874, 6), "0.0066874");
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(to_csv_string(&[]), format!("{CSV_HEADER}\n"));
        let rec = SweepRecord {
            scenario: "ideal".into(),
            epsilon1: 0.0,
            epsilon2: 0.0,
            n_p: 0,
            m: 10,
            n_samples: 2000,
            success_rate: 0.9035,
            std_err: standard_error(0.9035, 2000),
            seed: 42,
        };
        let text = to_csv_string(&[rec]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "ideal,0,0,0,10,2000,0.9035,0.00660257,42");
    }

    #[test]
    fn write_csv_reports_path_on_failure() {
        let err = write_csv(&[], Path::new("/nonexistent-dir/for/sure/out.csv")).unwrap_err();
        assert!(err
            .to_string()
            .contains("/nonexistent-dir/for/sure/out.csv"));
    }

    #[test]
    fn grids() {
        assert_eq!(linear_grid(0.0, 0.4, 9).unwrap().len(), 9);
        assert_eq!(linear_grid(0.1, 0.1, 1).unwrap(), vec![0.1]);
        assert!(linear_grid(0.0, 0.4, 0).is_err());
        assert!(linear_grid(0.4, 0.0, 3).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(Scenario::Static, vec![0.1, 0.2]);
        spec.validate().unwrap();
        spec.n_samples = 0;
        assert!(spec.validate().is_err());
        spec.n_samples = 10;
        spec.epsilons = vec![0.2, 0.1];
        assert!(spec
            .validate()
            .unwrap_err()
            .to_string()
            .contains("strictly increasing"));
        spec.epsilons = vec![0.1];
        spec.scenario = Scenario::RndH;
        spec.coupling = Coupling::StaticOnly;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn scenario_parsing_and_resolution() {
        assert_eq!("rnd-all".parse::<Scenario>().unwrap(), Scenario::RndAll);
        assert_eq!(
            "parec_noisy".parse::<Scenario>().unwrap().with_n_p(5),
            Scenario::Parec {
                n_p: 5,
                noisy_pulses: true
            }
        );
        assert!("nope".parse::<Scenario>().is_err());
        let (noise, eps2, gap) = Scenario::RndH.resolve(0.2, 0.0);
        assert!(noise.hadamard && !noise.rz && !noise.controlled_u);
        assert_eq!((eps2, gap), (0.0, GapPolicy::BARE));
        let (noise, eps2, gap) = Scenario::Parec {
            n_p: 3,
            noisy_pulses: true,
        }
        .resolve(0.02, 0.1);
        assert!(noise.pauli && noise.hadamard);
        assert_eq!((eps2, gap.n_p, gap.noisy_pulses), (0.1, 3, true));
        assert_eq!(Scenario::Static.effective_strengths(0.3, 0.3), (0.0, 0.3));
        assert_eq!(Scenario::RndAll.effective_strengths(0.3, 0.3), (0.3, 0.0));
        assert_eq!(Coupling::Fifth.split(0.5), (0.1, 0.5));
    }

    #[test]
    fn ideal_sweep_tracks_theory() {
        let mut spec = SweepSpec::new(Scenario::Ideal, vec![0.0]);
        spec.m = 6;
        spec.n_samples = 4000;
        spec.seed = 3;
        let rec = &run_sweep(&spec).unwrap()[0];
        let want = expected_ideal_success(6);
        assert!(
            (rec.success_rate - want).abs() <= 3.0 * rec.std_err,
            "{} vs {want}",
            rec.success_rate
        );
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let mut spec = SweepSpec::new(
            Scenario::Parec {
                n_p: 2,
                noisy_pulses: true,
            },
            vec![0.1, 0.3],
        );
        spec.coupling = Coupling::Fifth;
        spec.n_samples = 300;
        spec.seed = 99;
        let one = run_sweep_with_threads(&spec, 1).unwrap();
        let four = run_sweep_with_threads(&spec, 4).unwrap();
        assert_eq!(to_csv_string(&one), to_csv_string(&four));
    }

    #[test]
    fn config_parsing() {
        let text =
            "# decay curve\nscenario = static\n  eps_max=0.4  # upper end\n\nsamples = 100\n";
        let kv = parse_key_values(text).unwrap();
        assert_eq!(kv["scenario"], "static");
        assert_eq!(kv["eps-max"], "0.4");
        assert_eq!(kv["samples"], "100");
        assert!(parse_key_values("just words")
            .unwrap_err()
            .to_string()
            .contains("line 1"));
    }
}
