//! Executable checks of the scheme's structural and privacy properties, and
//! brute-force cross-checks of the code algebra. [`run_suite`] bundles them
//! into machine-readable reports.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::codes::{
    self_dual_multipliers_char2, default_locators, CartesianPairCode, CodeError, GrsCode,
};
use crate::galois::Field;
use crate::linalg::{LinalgError, Matrix};
use crate::oracle::{run_dense_protocol, server_privacy_trace_bound, weyl_apply, OracleError, StateVector, WeylLabel};
use crate::protocol::{
    combinations, derive_params, qpir_rate, random_files, run_protocol, ProtocolError, RunOptions,
    Scheme, StorageSystem, Transcript,
};
use crate::symplectic::{j_matrix, symp_form};

/// Subset checks on G_S are exhaustive up to this length.
pub const EXHAUSTIVE_LENGTH: usize = 8;
/// Random subsets drawn above [`EXHAUSTIVE_LENGTH`].
pub const SAMPLED_SUBSETS: usize = 1000;
/// Largest colluding-view support for the chi-square test.
pub const MAX_SUPPORT: u64 = 10_000;
/// Largest code enumerated for its minimum distance.
pub const MAX_CODEWORDS: u64 = 100_000;
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("{check} failed: {detail}")]
    CheckFailed {
        check: String,
        detail: String,
        witness: Option<Vec<usize>>,
    },
    #[error("{0} outcomes exceed the enumeration limit")]
    SupportTooLarge(u64),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn failed(check: &str, detail: String, witness: Option<Vec<usize>>) -> VerifyError {
    VerifyError::CheckFailed {
        check: check.into(),
        detail,
        witness,
    }
}

fn checked_pow(q: u32, e: usize) -> Option<u64> {
    (0..e).try_fold(1u64, |acc, _| acc.checked_mul(q as u64))
}

/// Columns `(1, s)` and `(2, s)` for the 1-based servers in `set`.
fn pair_columns(set: &[usize], n: usize) -> Vec<usize> {
    set.iter()
        .map(|&s| s - 1)
        .chain(set.iter().map(|&s| n + s - 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma5Report {
    pub subsets_checked: usize,
    pub exhaustive: bool,
}

/// (a) for `k_s`-subsets `S` of the servers, the columns `{s, s + n : s in S}`
/// of `G_S` are independent; (b) `H_S J^T G_S^T = 0`.
///
/// Subsets are enumerated for `n <= 8` and sampled (1000, seeded) above.
pub fn lemma5_checks(
    g_s: &Matrix,
    h_s: &Matrix,
    n: usize,
    ks: usize,
    seed: u64,
) -> Result<Lemma5Report, VerifyError> {
    if g_s.cols() != 2 * n || h_s.cols() != 2 * n || g_s.rows() != 2 * ks {
        return Err(failed(
            "lemma5",
            format!(
                "G_S is {}x{}, H_S is {}x{}, expected {}x{}",
                g_s.rows(),
                g_s.cols(),
                h_s.rows(),
                h_s.cols(),
                2 * ks,
                2 * n
            ),
            None,
        ));
    }
    let subsets: Vec<Vec<usize>> = if n <= EXHAUSTIVE_LENGTH {
        combinations(n, ks)
            .map(|c| c.into_iter().map(|x| x as usize + 1).collect())
            .collect()
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..SAMPLED_SUBSETS)
            .map(|_| {
                let mut s: Vec<usize> = sample(&mut rng, n, ks).into_iter().map(|x| x + 1).collect();
                s.sort_unstable();
                s
            })
            .collect()
    };
    for set in &subsets {
        let rank = g_s.select_columns(&pair_columns(set, n)).rank();
        if rank != 2 * ks {
            return Err(failed(
                "lemma5(a)",
                format!("columns of servers {set:?} have rank {rank} < {}", 2 * ks),
                Some(set.clone()),
            ));
        }
    }
    let j = j_matrix(g_s.field(), n);
    let product = h_s.mul(&j.transpose())?.mul(&g_s.transpose())?;
    if !product.is_zero() {
        return Err(failed("lemma5(b)", "H_S J^T G_S^T is nonzero".into(), None));
    }
    Ok(Lemma5Report {
        subsets_checked: subsets.len(),
        exhaustive: n <= EXHAUSTIVE_LENGTH,
    })
}

/// The columns of `G_D` for the colluding servers `t_set` (1-based) have
/// full rank `2|T|`, so the colluders' share of `Z G_D` is uniform. For
/// `|T| = t` this is invertibility of the `2t x 2t` submatrix.
pub fn user_privacy_rank(d: &CartesianPairCode, t_set: &[usize]) -> bool {
    if t_set.is_empty() {
        return true;
    }
    let n = d.base.len();
    if t_set.iter().any(|&s| s == 0 || s > n) {
        return false;
    }
    d.generator.select_columns(&pair_columns(t_set, n)).rank() == 2 * t_set.len()
}

/// Runs [`user_privacy_rank`] over every `t_eff`-subset of the servers.
pub fn user_privacy_rank_all(scheme: &Scheme) -> Result<usize, VerifyError> {
    let d = CartesianPairCode::new(scheme.code_d.clone());
    let mut count = 0;
    for c in combinations(scheme.params.n_eff, scheme.params.t_eff) {
        let set: Vec<usize> = c.into_iter().map(|x| x as usize + 1).collect();
        if !user_privacy_rank(&d, &set) {
            return Err(failed(
                "user_privacy_rank",
                format!("G_D restricted to servers {set:?} is singular"),
                Some(set),
            ));
        }
        count += 1;
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub k1: usize,
    pub k2: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub distinguishable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub collusion_set: Vec<usize>,
    pub rank_verdict: bool,
    pub tests: Vec<ChiSquareResult>,
    pub samples: usize,
    pub significance: f64,
}

/// How `Z` is drawn; `Zero` is the broken scheme used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryRandomness {
    Uniform,
    Zero,
}

/// Two-sample chi-square statistic over shared bins, with its degrees of
/// freedom and p-value.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (ra, rb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        bins += 1;
        let d = ra * x as f64 - rb * y as f64;
        stat += d * d / (x + y) as f64;
    }
    let dof = bins.saturating_sub(1);
    let p = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map(|c| c.sf(stat)).unwrap_or(0.0)
    };
    (stat, dof, p)
}

fn colluding_view(q: &Matrix, t_set: &[usize], n_eff: usize) -> u64 {
    let cols = pair_columns(t_set, n_eff);
    let order = q.field().order() as u64;
    let mut key = 0u64;
    for r in 0..q.rows() {
        for &c in &cols {
            key = key * order + q.get(r, c) as u64;
        }
    }
    key
}

fn sample_views(
    scheme: &Scheme,
    t_set: &[usize],
    target: usize,
    samples: usize,
    randomness: QueryRandomness,
    rng: &mut ChaCha20Rng,
) -> Result<HashMap<u64, u64>, VerifyError> {
    let p = &scheme.params;
    let mut counts = HashMap::new();
    for _ in 0..samples {
        let state = match randomness {
            QueryRandomness::Uniform => scheme.build_queries(target, 1, rng)?,
            QueryRandomness::Zero => scheme.assemble_queries(
                target,
                1,
                Matrix::zeros(&scheme.field, p.rows(), 2 * p.t_eff),
            )?,
        };
        *counts.entry(colluding_view(&state.queries, t_set, p.n_eff)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Samples the first-round queries seen by the colluding servers `t_set`
/// for targets `k1` and `k2` and compares the two empirical distributions.
pub fn user_privacy_empirical(
    scheme: &Scheme,
    t_set: &[usize],
    k1: usize,
    k2: usize,
    samples: usize,
    seed: u64,
    randomness: QueryRandomness,
) -> Result<PrivacyReport, VerifyError> {
    let p = &scheme.params;
    let support = checked_pow(p.q, p.rows() * 2 * t_set.len()).unwrap_or(u64::MAX);
    if support > MAX_SUPPORT {
        return Err(VerifyError::SupportTooLarge(support));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = sample_views(scheme, t_set, k1, samples, randomness, &mut rng)?;
    let b = sample_views(scheme, t_set, k2, samples, randomness, &mut rng)?;
    let mut keys: Vec<u64> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let ca: Vec<u64> = keys.iter().map(|k| a.get(k).copied().unwrap_or(0)).collect();
    let cb: Vec<u64> = keys.iter().map(|k| b.get(k).copied().unwrap_or(0)).collect();
    let (statistic, dof, p_value) = chi_square_two_sample(&ca, &cb);
    Ok(PrivacyReport {
        collusion_set: t_set.to_vec(),
        rank_verdict: user_privacy_rank(&CartesianPairCode::new(scheme.code_d.clone()), t_set),
        tests: vec![ChiSquareResult {
            k1,
            k2,
            statistic,
            dof,
            p_value,
            distinguishable: p_value < SIGNIFICANCE,
        }],
        samples,
        significance: SIGNIFICANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerPrivacyVerdict {
    pub rounds: usize,
    /// First round (1-based) whose outcomes differ.
    pub first_difference: Option<usize>,
}

impl ServerPrivacyVerdict {
    pub fn identical(&self) -> bool {
        self.first_difference.is_none()
    }
}

/// Runs the protocol on both storage systems with the same seed and
/// compares the measurement outcomes round by round.
pub fn server_privacy_check(
    scheme: &Scheme,
    first: &StorageSystem,
    second: &StorageSystem,
    target: usize,
    seed: u64,
) -> Result<ServerPrivacyVerdict, VerifyError> {
    let opts = RunOptions::default();
    let a = run_protocol(scheme, first, target, seed, &opts)?;
    let b = run_protocol(scheme, second, target, seed, &opts)?;
    let first_difference = a
        .rounds
        .iter()
        .zip(&b.rounds)
        .find(|(x, y)| x.outcome != y.outcome)
        .map(|(x, _)| x.r);
    Ok(ServerPrivacyVerdict {
        rounds: a.rounds.len(),
        first_difference,
    })
}

/// Each round's response minus `o M` lies in the span of `G_S`.
pub fn decomposition_check(scheme: &Scheme, transcript: &Transcript) -> Result<(), VerifyError> {
    let f = &scheme.field;
    for (rec, sched) in transcript.rounds.iter().zip(&scheme.schedules) {
        let om = sched.m_sel.vec_mul(&rec.outcome)?;
        let rest: Vec<u32> = rec.responses.iter().zip(&om).map(|(&a, &b)| f.sub(a, b)).collect();
        if !scheme.bundle.g_s.in_row_space(&rest) {
            return Err(failed(
                "decomposition",
                format!("round {}: A - oM is outside span(G_S)", rec.r),
                Some(vec![rec.r]),
            ));
        }
    }
    Ok(())
}

fn star_rows(a: &Matrix, b: &Matrix) -> Result<Matrix, VerifyError> {
    let f = a.field();
    let mut rows = Vec::with_capacity(a.rows() * b.rows());
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            rows.push(a.row(i).iter().zip(b.row(j)).map(|(&x, &y)| f.mul(x, y)).collect());
        }
    }
    Ok(Matrix::from_rows(f, &rows)?)
}

/// The span of all pairwise stars of generator rows equals the row space of
/// the GRS star code (or everything, when `k + t - 1 >= n`), and the
/// Cartesian identity `(C x C) * (D x D) = (C * D) x (C * D)` holds on the
/// block-diagonal generators.
pub fn star_span_bruteforce(cp: &GrsCode, dp: &GrsCode) -> Result<bool, VerifyError> {
    let (gc, gd) = (cp.generator(), dp.generator());
    let span = star_rows(&gc, &gd)?;
    let n = cp.len();
    let single = match cp.star(dp) {
        Ok(s) => span.same_row_space(&s.generator()),
        Err(CodeError::DimensionOverflow(..)) => span.rank() == n,
        Err(e) => return Err(e.into()),
    };
    let pair = star_rows(&Matrix::block_diag(&gc, &gc), &Matrix::block_diag(&gd, &gd))?;
    let cartesian = pair.same_row_space(&Matrix::block_diag(&span, &span));
    Ok(single && cartesian)
}

/// Minimum Hamming weight over all nonzero codewords.
pub fn min_distance_exhaustive(code: &GrsCode) -> Result<usize, VerifyError> {
    let f = code.field();
    let q = f.order();
    let k = code.dim();
    let total = checked_pow(q, k).unwrap_or(u64::MAX);
    if total > MAX_CODEWORDS {
        return Err(VerifyError::SupportTooLarge(total));
    }
    let g = code.generator();
    let n = code.len();
    // mixed-radix walk over coefficient vectors, updating the codeword in place
    let mut coeffs = vec![0u32; k];
    let mut word = vec![0u32; n];
    let mut best = n + 1;
    for _ in 1..total {
        let mut i = 0;
        loop {
            let old = coeffs[i];
            let new = (old + 1) % q;
            coeffs[i] = new;
            let delta = f.sub(new, old);
            for (w, &gv) in word.iter_mut().zip(g.row(i)) {
                *w = f.add(*w, f.mul(delta, gv));
            }
            if new != 0 {
                break;
            }
            i += 1;
        }
        best = best.min(word.iter().filter(|&&x| x != 0).count());
    }
    Ok(best)
}

/// Whether any GRS code of length `n` and dimension `dim` over a prime
/// field contains its dual, by enumerating every locator set and every
/// multiplier vector (normalized so the first multiplier is 1). Only for
/// tiny fields.
pub fn exists_weakly_self_dual_bruteforce(
    field: &Field,
    n: usize,
    dim: usize,
) -> Result<bool, VerifyError> {
    let q = field.order();
    let per_set = checked_pow(q - 1, n - 1).unwrap_or(u64::MAX);
    if per_set > MAX_CODEWORDS {
        return Err(VerifyError::SupportTooLarge(per_set));
    }
    for locs in combinations(q as usize, n) {
        for idx in 0..per_set {
            let mut v = vec![1u32];
            let mut rest = idx;
            for _ in 1..n {
                v.push((rest % (q as u64 - 1)) as u32 + 1);
                rest /= q as u64 - 1;
            }
            let g = GrsCode::new(field, locs.clone(), v, dim)?.generator();
            let dual = g.kernel();
            if dual.rows() == 0 || g.contains_row_space(&dual) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// One entry of a suite report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Codes,
    Protocol,
    Privacy,
    Oracle,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Codes => "codes",
            Suite::Protocol => "protocol",
            Suite::Privacy => "privacy",
            Suite::Oracle => "oracle",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "codes" => Ok(Suite::Codes),
            "protocol" => Ok(Suite::Protocol),
            "privacy" => Ok(Suite::Privacy),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

/// Collects check outcomes; an `Err` becomes a failed entry carrying the
/// error text and any witness.
struct Checks(Vec<CheckResult>);

impl Checks {
    fn record(&mut self, name: &str, outcome: Result<String, VerifyError>) {
        let entry = match outcome {
            Ok(detail) => CheckResult {
                name: name.into(),
                passed: true,
                detail,
                witness: None,
            },
            Err(e) => {
                let witness = match &e {
                    VerifyError::CheckFailed {
                        witness: Some(w), ..
                    } => Some(json!(w)),
                    _ => None,
                };
                CheckResult {
                    name: name.into(),
                    passed: false,
                    detail: e.to_string(),
                    witness,
                }
            }
        };
        self.0.push(entry);
    }

}

fn example_scheme(m: usize) -> Result<Scheme, VerifyError> {
    Ok(Scheme::new(&derive_params(7, 6, 3, 2, m)?)?)
}

fn storage_for(scheme: &Scheme, files: &[Vec<u32>]) -> Result<StorageSystem, VerifyError> {
    Ok(StorageSystem::from_files(files, &scheme.storage_code, scheme.params.beta)?)
}

fn codes_suite(checks: &mut Checks, seed: u64) {
    for (q, n) in [(8u32, 4usize), (16, 8)] {
        checks.record(&format!("self_dual_gf{q}_n{n}"), (|| {
            let f = Field::of_order(q).map_err(CodeError::from)?;
            let c = self_dual_multipliers_char2(&f, &default_locators(&f, n)?)?
                .with_dim(n / 2)?;
            let g = c.generator();
            if !g.same_row_space(&g.kernel()) {
                return Err(failed("self_dual", "C^perp != C".into(), None));
            }
            Ok(format!("[{n}, {}] code over GF({q}) equals its dual", n / 2))
        })());
    }
    checks.record("dual_closed_form", (|| {
        for (q, n, k) in [(7u32, 6usize, 2usize), (8, 7, 3), (11, 10, 4), (16, 12, 5)] {
            let f = Field::of_order(q).map_err(CodeError::from)?;
            let c = GrsCode::prs(&f, n, k)?;
            if !c.dual()?.generator().same_row_space(&c.generator().kernel()) {
                return Err(failed("dual", format!("closed-form dual differs for q={q}, n={n}, k={k}"), None));
            }
        }
        Ok("closed-form GRS duals match kernels".into())
    })());
    checks.record("star_span_example", (|| {
        let s = example_scheme(1)?;
        let ok = star_span_bruteforce(&s.code_c, &s.code_d)?;
        let dim = s.code_s.dim();
        if !ok || dim != 4 {
            return Err(failed("star_span", format!("spans differ or dimension {dim} != 4"), None));
        }
        Ok("C' * D' span has dimension 4".into())
    })());
    checks.record("star_span_gf8_sweep", (|| {
        let f = Field::of_order(8).map_err(CodeError::from)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut tested = 0;
        for n in 2..=8usize {
            for k in 1..=n {
                for t in 1..=n {
                    let locs = default_locators(&f, n)?;
                    let v1: Vec<u32> = (0..n).map(|_| 1 + rand::Rng::gen_range(&mut rng, 0..7)).collect();
                    let v2: Vec<u32> = (0..n).map(|_| 1 + rand::Rng::gen_range(&mut rng, 0..7)).collect();
                    let c = GrsCode::new(&f, locs.clone(), v1, k)?;
                    let d = GrsCode::new(&f, locs, v2, t)?;
                    if !star_span_bruteforce(&c, &d)? {
                        return Err(failed("star_span", format!("n={n}, k={k}, t={t}"), None));
                    }
                    tested += 1;
                }
            }
        }
        Ok(format!("{tested} random GRS pairs over GF(8)"))
    })());
    checks.record("min_distance_example", (|| {
        let s = example_scheme(1)?;
        let d = min_distance_exhaustive(&s.code_s)?;
        if d != 3 {
            return Err(failed("min_distance", format!("d(S') = {d}, expected 3"), None));
        }
        Ok("d(S') = n - k - t + 2 = 3".into())
    })());
}

fn protocol_suite(checks: &mut Checks, seed: u64) {
    checks.record("golden_example", (|| {
        let s = example_scheme(2)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let files = random_files(&s.field, 2, s.params.file_len(), &mut rng);
        let sys = storage_for(&s, &files)?;
        let t = run_protocol(&s, &sys, 2, seed, &RunOptions::default())?;
        let ok = t.rounds.len() == 3
            && t.q_in == 18
            && t.symbols_retrieved == 12
            && t.rate.ratio() == num_rational::Ratio::new(2, 3)
            && t.decoded == files[1];
        if !ok {
            return Err(failed("golden_example", format!("rounds {}, qudits {}, symbols {}, rate {}/{}", t.rounds.len(), t.q_in, t.symbols_retrieved, t.rate.numerator, t.rate.denominator), None));
        }
        decomposition_check(&s, &t)?;
        Ok("3 rounds, 18 qudits, 12 symbols, rate 2/3, file decoded".into())
    })());
    for (q, n, k, t) in [(7u32, 6usize, 3usize, 2usize), (8, 6, 2, 2), (16, 10, 3, 3), (13, 12, 5, 3), (11, 10, 2, 5)] {
        checks.record(&format!("lemma5_q{q}_n{n}_k{k}_t{t}"), (|| {
            let s = Scheme::new(&derive_params(q, n, k, t, 1)?)?;
            let r = lemma5_checks(&s.bundle.g_s, &s.bundle.h_s, s.params.n_eff, s.params.star_dim(), seed)?;
            Ok(format!("{} subsets ({}), H_S J^T G_S^T = 0", r.subsets_checked, if r.exhaustive { "exhaustive" } else { "sampled" }))
        })());
    }
    checks.record("rate_formula", (|| {
        for (q, n, k, t) in [(7u32, 6usize, 3usize, 2usize), (8, 8, 2, 1), (16, 9, 2, 2), (11, 10, 4, 3)] {
            let s = Scheme::new(&derive_params(q, n, k, t, 1)?)?;
            let (sym, qud) = s.accounting();
            let measured = num_rational::Ratio::new(sym as u64, qud as u64);
            let expect = num_rational::Ratio::new(2 * (n - k - t + 1) as u64, n as u64).min(1.into());
            if measured != qpir_rate(&s.params) || measured != expect {
                return Err(failed("rate", format!("(n,k,t)=({n},{k},{t}): {measured} vs {expect}"), None));
            }
        }
        Ok("measured rates equal min(1, 2(n-k-t+1)/n)".into())
    })());
}

fn privacy_suite(checks: &mut Checks, seed: u64) {
    checks.record("user_privacy_rank_example", (|| {
        let s = example_scheme(1)?;
        let count = user_privacy_rank_all(&s)?;
        let d = CartesianPairCode::new(s.code_d.clone());
        if !user_privacy_rank(&d, &[]) {
            return Err(failed("user_privacy_rank", "empty set".into(), None));
        }
        Ok(format!("all {count} collusion sets of size 2 invertible"))
    })());
    checks.record("user_privacy_rank_beyond_design", (|| {
        let s = Scheme::new(&derive_params(7, 6, 3, 3, 1)?)?;
        let d = CartesianPairCode::new(s.code_d.clone());
        let witness = combinations(6, 4)
            .map(|c| c.into_iter().map(|x| x as usize + 1).collect::<Vec<_>>())
            .find(|set| !user_privacy_rank(&d, set));
        match witness {
            Some(w) => Ok(format!("t = n - k = 3, colluding set {w:?} of size 4 sees structure")),
            None => Err(failed("beyond_design", "no witness found".into(), None)),
        }
    })());
    let small = || Scheme::new(&derive_params(3, 3, 1, 2, 2).expect("valid parameters"));
    checks.record("user_privacy_empirical", (|| {
        let s = small()?;
        let r = user_privacy_empirical(&s, &[1, 2], 1, 2, 100_000, seed, QueryRandomness::Uniform)?;
        let t = &r.tests[0];
        if t.distinguishable || !r.rank_verdict {
            return Err(failed("user_privacy_empirical", format!("chi2 = {:.2}, dof {}, p = {:.4}", t.statistic, t.dof, t.p_value), None));
        }
        Ok(format!("K=1 vs K=2: chi2 = {:.2}, dof {}, p = {:.4}", t.statistic, t.dof, t.p_value))
    })());
    checks.record("user_privacy_zero_z_control", (|| {
        let s = small()?;
        let r = user_privacy_empirical(&s, &[1, 2], 1, 2, 10_000, seed, QueryRandomness::Zero)?;
        let t = &r.tests[0];
        if !t.distinguishable {
            return Err(failed("zero_z_control", format!("not detected, p = {}", t.p_value), None));
        }
        Ok(format!("Z = 0 detected: p = {:.3e}", t.p_value))
    })());
    checks.record("server_privacy", (|| {
        let s = example_scheme(3)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let len = s.params.file_len();
        let files = random_files(&s.field, 3, len, &mut rng);
        let mut others = files.clone();
        others[0] = random_files(&s.field, 1, len, &mut rng).remove(0);
        others[2] = random_files(&s.field, 1, len, &mut rng).remove(0);
        let v = server_privacy_check(&s, &storage_for(&s, &files)?, &storage_for(&s, &others)?, 2, seed)?;
        if let Some(r) = v.first_difference {
            return Err(failed("server_privacy", format!("outcomes differ in round {r}"), Some(vec![r])));
        }
        let mut target = files.clone();
        target[1][0] = s.field.add(target[1][0], 1);
        let w = server_privacy_check(&s, &storage_for(&s, &files)?, &storage_for(&s, &target)?, 2, seed)?;
        if w.identical() {
            return Err(failed("server_privacy_control", "perturbing file K went unnoticed".into(), None));
        }
        Ok(format!("{} rounds identical; perturbing file K changes round {}", v.rounds, w.first_difference.unwrap_or(0)))
    })());
}

fn oracle_suite(checks: &mut Checks, seed: u64) {
    checks.record("weyl_commutation", (|| {
        let f = Field::of_order(5).map_err(CodeError::from)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = 2;
        for _ in 0..20 {
            let mut label = || WeylLabel::new((0..n).map(|_| f.random(&mut rng)).collect(), (0..n).map(|_| f.random(&mut rng)).collect());
            let (x, y) = (label(), label());
            let psi = StateVector::basis(&f, n, 0, &[1, 2], 0)?;
            let xy = weyl_apply(&weyl_apply(&psi, &y)?, &x)?;
            let yx = weyl_apply(&weyl_apply(&psi, &x)?, &y)?;
            let k = symp_form(&f, &x.to_vector(), &y.to_vector()).map_err(ProtocolError::from)?;
            let w = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 5.0);
            let err: f64 = xy.amplitudes().iter().zip(yx.amplitudes()).map(|(a, b)| (a - w * b).norm()).sum();
            if err > 1e-9 {
                let pair: Vec<usize> = x.to_vector().iter().chain(&y.to_vector()).map(|&v| v as usize).collect();
                return Err(failed("weyl_commutation", format!("W(x)W(y) != omega^<x,y> W(y)W(x) for x={:?}, y={:?}", x.to_vector(), y.to_vector()), Some(pair)));
            }
        }
        Ok("W(x)W(y) = omega^{tr<x,y>} W(y)W(x) on 20 random pairs".into())
    })());
    checks.record("gf5_length4_infeasible", (|| {
        let f = Field::of_order(5).map_err(CodeError::from)?;
        if exists_weakly_self_dual_bruteforce(&f, 4, 2)? {
            return Err(failed("gf5_length4", "a self-dual [4,2] GRS code exists".into(), None));
        }
        Ok("no [4,2] GRS code over GF(5) contains its dual, so (k,t) = (1,2), (2,1) at q=5, n=4 cannot be built".into())
    })());
    for (q, k, t) in [(5u32, 2usize, 2usize), (7, 1, 2), (7, 2, 1)] {
        checks.record(&format!("dense_equivalence_q{q}_n4_k{k}_t{t}"), (|| {
            let s = Scheme::new(&derive_params(q, 4, k, t, 2)?)?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let files = random_files(&s.field, 2, s.params.file_len(), &mut rng);
            let sys = storage_for(&s, &files)?;
            let run = run_dense_protocol(&s, &sys, 2, seed)?;
            let worst = run.rounds.iter().map(|r| r.max_probability).fold(1.0, f64::min);
            if !run.is_consistent() || run.transcript.decoded != files[1] {
                let bad = run.rounds.iter().find(|r| r.outcome != r.coset_outcome || r.max_probability < 1.0 - 1e-9).map(|r| r.r);
                return Err(failed("dense_equivalence", format!("min max-probability {worst}"), bad.map(|r| vec![r])));
            }
            Ok(format!("{} rounds, point masses (min {worst:.12}), outcomes equal coset decode", run.rounds.len()))
        })());
    }
    checks.record("reduced_state_server_privacy", (|| {
        let s = Scheme::new(&derive_params(5, 4, 2, 2, 2)?)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let len = s.params.file_len();
        let files = random_files(&s.field, 2, len, &mut rng);
        let mut others = files.clone();
        others[0] = random_files(&s.field, 1, len, &mut rng).remove(0);
        let (a, b) = (storage_for(&s, &files)?, storage_for(&s, &others)?);
        let mut worst: f64 = 0.0;
        for r in 1..=s.params.rho {
            worst = worst.max(server_privacy_trace_bound(&s, &a, &b, 2, r, seed)?);
        }
        if worst >= 1e-9 {
            return Err(failed("reduced_state", format!("trace distance bound {worst:e}"), None));
        }
        Ok(format!("trace distance bound {worst:.1e}"))
    })());
}

/// Runs a suite; every check is recorded even if earlier ones fail.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut checks = Checks(Vec::new());
    match suite {
        Suite::Codes => codes_suite(&mut checks, seed),
        Suite::Protocol => protocol_suite(&mut checks, seed),
        Suite::Privacy => privacy_suite(&mut checks, seed),
        Suite::Oracle => oracle_suite(&mut checks, seed),
        Suite::All => {
            codes_suite(&mut checks, seed);
            protocol_suite(&mut checks, seed);
            privacy_suite(&mut checks, seed);
            oracle_suite(&mut checks, seed);
        }
    }
    SuiteReport {
        suite: suite.name().into(),
        passed: checks.0.iter().all(|c| c.passed),
        checks: checks.0,
    }
}
