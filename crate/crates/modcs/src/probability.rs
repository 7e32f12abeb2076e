//! Recovery probability for a fixed measurement matrix: exact exhaustion
//! of the quad space Z and seeded Monte Carlo estimation.
//!
//! A quad bundles one configuration of the random signal/support model:
//! the true support N (size ell), the correctly known part S of the
//! support (size p2 = p - p1), the erroneous part H of the known support
//! (size p1, outside N), and a sign pattern on Delta = N \ S. The known
//! support handed to the solver is T = S union H.
//!
//! Randomness contract: all sampling uses ChaCha8 seeded from a 64-bit
//! value, with draw i taken from ChaCha8 stream i of that seed. Results
//! are therefore identical across runs, platforms and thread counts.

use crate::numkit::{DenseMatrix, IndexSet, NumKitError, SignPattern};
use crate::snc::{self, SncError, SncInstance};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Deterministic generator used for every random draw in the crate.
pub type SeededStream = ChaCha8Rng;

/// Independent substream `stream` of a 64-bit master seed.
pub fn substream(seed: u64, stream: u64) -> SeededStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Default cap on exhaustive enumeration.
pub const DEFAULT_ENUM_CAP: u64 = 100_000_000;

/// Hoeffding confidence level (two-sided) for Monte Carlo half-widths.
pub const DEFAULT_ALPHA: f64 = 0.01;

// SncCertificate costs 2^|Delta| LPs per quad; past this many subsets a
// single direct solve is cheaper.
const SNC_SUBSET_LIMIT: u64 = 4096;

#[derive(Debug, Error)]
pub enum ProbabilityError {
    #[error("quad space has {size} elements, above the cap of {cap}")]
    SpaceTooLarge { size: BigUint, cap: u64 },
    #[error(transparent)]
    Snc(#[from] SncError),
    #[error(transparent)]
    NumKit(#[from] NumKitError),
}

/// One point of the signal/support model: ambient dimension, sparsity,
/// known-support size and error count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Scenario {
    pub n: usize,
    pub ell: usize,
    pub p: usize,
    pub p1: usize,
}

impl Scenario {
    pub fn new(n: usize, ell: usize, p: usize, p1: usize) -> Result<Self, NumKitError> {
        let s = Self { n, ell, p, p1 };
        if ell < 1 {
            return Err(NumKitError::InvalidValue("sparsity ell must be at least 1".into()));
        }
        if ell > n {
            return Err(NumKitError::InvalidValue(format!("ell = {ell} exceeds n = {n}")));
        }
        if p1 > p {
            return Err(NumKitError::InvalidValue(format!("p1 = {p1} exceeds p = {p}")));
        }
        if p - p1 > ell {
            return Err(NumKitError::InvalidValue(format!(
                "p2 = p - p1 = {} exceeds ell = {ell}",
                p - p1
            )));
        }
        if p1 > n - ell {
            return Err(NumKitError::InvalidValue(format!(
                "p1 = {p1} exceeds n - ell = {}",
                n - ell
            )));
        }
        Ok(s)
    }

    /// Correctly known support size p2 = p - p1.
    pub fn p2(&self) -> usize {
        self.p - self.p1
    }
}

/// One element of the quad space Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quad {
    pub support: IndexSet,
    pub known_true: IndexSet,
    pub errors: IndexSet,
    pub pattern: SignPattern,
}

impl Quad {
    /// Known support handed to the solver: T = S union H.
    pub fn known_support(&self) -> IndexSet {
        self.known_true.union(&self.errors).expect("same universe")
    }

    /// Unknown support part Delta = N \ S.
    pub fn delta(&self) -> IndexSet {
        self.support.difference(&self.known_true).expect("same universe")
    }

    pub fn snc_instance(&self, a: &DenseMatrix) -> Result<SncInstance, SncError> {
        SncInstance::new(a.clone(), self.known_support(), self.delta(), self.pattern.clone())
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut res = BigUint::from(1u32);
    for i in 0..k as u64 {
        res = res * (n as u64 - i) / (i + 1);
    }
    res
}

/// |Z| = C(n,ell) C(ell,p2) C(n-ell,p1) 2^(ell-p2), exactly.
pub fn quad_space_size(s: &Scenario) -> BigUint {
    binomial(s.n, s.ell)
        * binomial(s.ell, s.p2())
        * binomial(s.n - s.ell, s.p1)
        * BigUint::from(2u32).pow((s.ell - s.p2()) as u32)
}

/// Lexicographic stream over Z: support outer, then known-true part,
/// then error part, then sign patterns as a binary counter (+ before -).
pub fn enumerate_quads(
    s: &Scenario,
) -> Result<impl Iterator<Item = Quad>, ProbabilityError> {
    enumerate_quads_capped(s, DEFAULT_ENUM_CAP)
}

pub fn enumerate_quads_capped(
    s: &Scenario,
    cap: u64,
) -> Result<impl Iterator<Item = Quad>, ProbabilityError> {
    let size = quad_space_size(s);
    if size > BigUint::from(cap) {
        return Err(ProbabilityError::SpaceTooLarge { size, cap });
    }
    let s = *s;
    let n = s.n;
    let iter = combinations(n, s.ell).into_iter().flat_map(move |support| {
        let complement: Vec<usize> = (0..n).filter(|i| !support.contains(i)).collect();
        combinations_of(&support, s.p2()).into_iter().flat_map(move |known_true| {
            let delta: Vec<usize> =
                support.iter().copied().filter(|i| !known_true.contains(i)).collect();
            let support = support.clone();
            combinations_of(&complement, s.p1).into_iter().flat_map(move |errors| {
                let d = delta.len();
                let support = support.clone();
                let known_true = known_true.clone();
                let delta = delta.clone();
                (0u64..(1u64 << d)).map(move |tau| {
                    let signs: Vec<i8> = (0..d)
                        .map(|j| if tau >> (d - 1 - j) & 1 == 0 { 1 } else { -1 })
                        .collect();
                    Quad {
                        support: IndexSet::new(n, support.clone()).unwrap(),
                        known_true: IndexSet::new(n, known_true.clone()).unwrap(),
                        errors: IndexSet::new(n, errors.clone()).unwrap(),
                        pattern: SignPattern::new(
                            IndexSet::new(n, delta.clone()).unwrap(),
                            signs,
                        )
                        .unwrap(),
                    }
                })
            })
        })
    });
    Ok(iter)
}

// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    combinations_of(&(0..n).collect::<Vec<_>>(), k)
}

fn combinations_of(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let needed = k - current.len();
        for i in start..=items.len().saturating_sub(needed) {
            current.push(items[i]);
            rec(items, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, k, 0, &mut current, &mut out);
    out
}

/// One uniform draw from Z.
pub fn sample_quad(s: &Scenario, rng: &mut SeededStream) -> Quad {
    let n = s.n;
    let support: Vec<usize> = {
        let mut v = index_sample(rng, n, s.ell).into_vec();
        v.sort_unstable();
        v
    };
    let known_true: Vec<usize> = {
        let mut v: Vec<usize> = index_sample(rng, s.ell, s.p2())
            .into_iter()
            .map(|i| support[i])
            .collect();
        v.sort_unstable();
        v
    };
    let complement: Vec<usize> = (0..n).filter(|i| !support.contains(i)).collect();
    let errors: Vec<usize> = {
        let mut v: Vec<usize> = index_sample(rng, complement.len(), s.p1)
            .into_iter()
            .map(|i| complement[i])
            .collect();
        v.sort_unstable();
        v
    };
    let delta: Vec<usize> =
        support.iter().copied().filter(|i| !known_true.contains(i)).collect();
    let signs: Vec<i8> = delta.iter().map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    Quad {
        support: IndexSet::new(n, support).unwrap(),
        known_true: IndexSet::new(n, known_true).unwrap(),
        errors: IndexSet::new(n, errors).unwrap(),
        pattern: SignPattern::new(IndexSet::new(n, delta).unwrap(), signs).unwrap(),
    }
}

/// How a single quad is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckerKind {
    /// Full Theorem-style certificate: 2^|Delta| subset LPs per quad.
    SncCertificate,
    /// One truncated-l1 solve with unit magnitudes per quad.
    DirectSolve,
    /// Certificate when 2^|Delta| stays small, direct solve otherwise.
    Auto,
}

impl CheckerKind {
    fn resolve(&self, delta_len: usize) -> CheckerKind {
        match self {
            CheckerKind::Auto => {
                if delta_len < 64 && (1u64 << delta_len) <= SNC_SUBSET_LIMIT {
                    CheckerKind::SncCertificate
                } else {
                    CheckerKind::DirectSolve
                }
            }
            other => *other,
        }
    }
}

impl std::str::FromStr for CheckerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "snc" | "snc-certificate" => Ok(CheckerKind::SncCertificate),
            "solve" | "direct-solve" => Ok(CheckerKind::DirectSolve),
            "auto" => Ok(CheckerKind::Auto),
            other => Err(format!("unknown checker '{other}' (expected snc, solve or auto)")),
        }
    }
}

/// Decide whether one quad is exactly recoverable.
pub fn check_quad(
    a: &DenseMatrix,
    quad: &Quad,
    checker: CheckerKind,
    margin_tol: f64,
) -> Result<bool, ProbabilityError> {
    let delta = quad.delta();
    match checker.resolve(delta.len()) {
        CheckerKind::SncCertificate => {
            let inst = quad.snc_instance(a)?;
            Ok(snc::check_snc(&inst, margin_tol)?.recoverable)
        }
        CheckerKind::DirectSolve => Ok(snc::check_by_solving_unit(
            a,
            &quad.known_support(),
            &quad.known_true,
            &quad.pattern,
            crate::recovery::DEFAULT_RECOVERY_TOL,
        )?),
        CheckerKind::Auto => unreachable!("resolved above"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

/// A recovery-probability value with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    #[serde(serialize_with = "ser_biguint")]
    pub recoverable_count: BigUint,
    #[serde(serialize_with = "ser_biguint")]
    pub total_count: BigUint,
    pub hoeffding_halfwidth: Option<f64>,
    pub seed: Option<u64>,
    pub checker: CheckerKind,
}

fn ser_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

const PAR_CHUNK: usize = 1024;

/// Exhaust Z and count recoverable quads. Quads are checked in parallel
/// chunks; the count is an exact integer so the result does not depend on
/// evaluation order.
pub fn exact_probability(
    a: &DenseMatrix,
    s: &Scenario,
    checker: CheckerKind,
    margin_tol: f64,
) -> Result<ProbabilityEstimate, ProbabilityError> {
    exact_probability_capped(a, s, checker, margin_tol, DEFAULT_ENUM_CAP)
}

pub fn exact_probability_capped(
    a: &DenseMatrix,
    s: &Scenario,
    checker: CheckerKind,
    margin_tol: f64,
    cap: u64,
) -> Result<ProbabilityEstimate, ProbabilityError> {
    if a.cols() != s.n {
        return Err(NumKitError::DimensionMismatch(format!(
            "matrix has {} columns, scenario n = {}",
            a.cols(),
            s.n
        ))
        .into());
    }
    let total = quad_space_size(s);
    let mut quads = enumerate_quads_capped(s, cap)?;
    let mut recoverable: u64 = 0;
    let mut seen: u64 = 0;
    loop {
        let chunk: Vec<Quad> = quads.by_ref().take(PAR_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        seen += chunk.len() as u64;
        recoverable += chunk
            .par_iter()
            .map(|q| check_quad(a, q, checker, margin_tol).map(u64::from))
            .try_reduce(|| 0, |x, y| Ok(x + y))?;
    }
    debug_assert_eq!(BigUint::from(seen), total);
    let value = recoverable as f64 / total.to_f64().expect("within cap");
    Ok(ProbabilityEstimate {
        value,
        method: EstimateMethod::Exact,
        recoverable_count: BigUint::from(recoverable),
        total_count: total,
        hoeffding_halfwidth: None,
        seed: None,
        checker,
    })
}

/// Monte Carlo estimate over `samples` uniform draws from Z. Draw i uses
/// substream i of `seed`, so the estimate is reproducible regardless of
/// parallelism.
pub fn mc_probability(
    a: &DenseMatrix,
    s: &Scenario,
    samples: u64,
    seed: u64,
    checker: CheckerKind,
    margin_tol: f64,
) -> Result<ProbabilityEstimate, ProbabilityError> {
    assert!(samples >= 1);
    if a.cols() != s.n {
        return Err(NumKitError::DimensionMismatch(format!(
            "matrix has {} columns, scenario n = {}",
            a.cols(),
            s.n
        ))
        .into());
    }
    let recoverable: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let quad = sample_quad(s, &mut rng);
            check_quad(a, &quad, checker, margin_tol).map(u64::from)
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;
    let halfwidth = ((2.0 / DEFAULT_ALPHA).ln() / (2.0 * samples as f64)).sqrt();
    Ok(ProbabilityEstimate {
        value: recoverable as f64 / samples as f64,
        method: EstimateMethod::MonteCarlo,
        recoverable_count: BigUint::from(recoverable),
        total_count: BigUint::from(samples),
        hoeffding_halfwidth: Some(halfwidth),
        seed: Some(seed),
        checker,
    })
}
