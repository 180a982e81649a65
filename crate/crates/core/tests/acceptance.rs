//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! A criterion that cannot be met for a reason proven at run time (an
//! instance that does not exist) prints FAIL with the proof attached and is
//! tallied as "unattainable"; the process exits non-zero only on other
//! failures.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use qpir::codes::{self_dual_multipliers_char2, CodeError, GrsCode};
use qpir::galois::Field;
use qpir::oracle::run_dense_protocol;
use qpir::protocol::{
    derive_params, random_files, run_protocol, ProtocolError, RunOptions, Scheme, SchemeParams,
    StorageSystem,
};
use qpir::verify::{
    lemma5_checks, min_distance_exhaustive, server_privacy_check, star_span_bruteforce,
    user_privacy_empirical, user_privacy_rank_all, QueryRandomness,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const SWEEP_FIELDS: [u32; 5] = [7, 8, 11, 13, 16];
const RUNS_PER_TUPLE: usize = 100;
const MAX_M: usize = 4;
const POINT_MASS_TOL: f64 = 1e-9;
const SIGNIFICANCE: f64 = 0.01;
const PRIVACY_SAMPLES: usize = 100_000;
const MAX_CODEWORDS: u64 = 100_000;

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails because the required instance provably does not exist.
    Unattainable(String),
}

struct Harness {
    failures: usize,
    unattainable: usize,
}

impl Harness {
    fn criterion(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let verdict = f();
        let took = start.elapsed();
        let timing = match limit {
            Some(l) => format!("{:.2}s, limit {}s", took.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", took.as_secs_f64()),
        };
        let verdict = match (verdict, limit) {
            (Verdict::Pass(d), Some(l)) if took > l => Verdict::Fail(format!("{d}; over time limit")),
            (v, _) => v,
        };
        match verdict {
            Verdict::Pass(d) => println!("PASS [{id}] {name}: {d} ({timing})"),
            Verdict::Fail(d) => {
                self.failures += 1;
                println!("FAIL [{id}] {name}: {d} ({timing})");
            }
            Verdict::Unattainable(d) => {
                self.unattainable += 1;
                println!("FAIL [{id}] {name}: unattainable: {d} ({timing})");
            }
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verdict(r: Result<String, String>) -> Verdict {
    match r {
        Ok(d) => Verdict::Pass(d),
        Err(d) => Verdict::Fail(d),
    }
}

/// `min(1, 2(n-k-t+1)/n)`: rate 1 whenever `k + t - 1 < n/2`.
fn expected_rate(n: usize, k: usize, t: usize) -> Ratio<u64> {
    if 2 * (k + t - 1) < n {
        Ratio::from_integer(1)
    } else {
        Ratio::new(2 * (n - k - t + 1) as u64, n as u64)
    }
}

fn storage_for(scheme: &Scheme, rng: &mut ChaCha20Rng) -> (Vec<Vec<u32>>, StorageSystem) {
    let p = &scheme.params;
    let files = random_files(&scheme.field, p.m, p.file_len(), rng);
    let storage = StorageSystem::from_files(&files, &scheme.storage_code, p.beta).unwrap();
    (files, storage)
}

// ---------------------------------------------------------------------------
// Independent existence test for weakly self-dual GRS codes, written from
// scratch over prime fields. A GRS code on locators a_1..a_n with multipliers
// v contains its dual iff 1/(v_j^2 L_j) = f(a_j) for some f of degree at most
// 2 dim - n, L_j = prod_{i != j} (a_j - a_i). Such v exist iff f(a_j) L_j is a
// nonzero square for every j. In characteristic 2 every element is a square.

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn subsets(q: usize, size: usize, out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, start: usize) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for x in start..q {
        if q - x < size - cur.len() {
            break;
        }
        cur.push(x as u64);
        subsets(q, size, out, cur, x + 1);
        cur.pop();
    }
}

fn wsd_grs_exists(q: u32, n: usize, dim: usize) -> bool {
    if q.is_multiple_of(2) {
        return true;
    }
    let p = q as u64;
    assert!(2 * dim >= n);
    let deg = 2 * dim - n;
    let mut sets = Vec::new();
    subsets(q as usize, n, &mut sets, &mut Vec::new(), 0);
    let polys = p.pow(deg as u32 + 1);
    for a in &sets {
        let l: Vec<u64> = a
            .iter()
            .map(|&x| a.iter().filter(|&&y| y != x).fold(1, |acc, &y| acc * ((x + p - y) % p) % p))
            .collect();
        for code in 1..polys {
            let coeffs: Vec<u64> = (0..=deg).map(|i| code / p.pow(i as u32) % p).collect();
            let ok = a.iter().zip(&l).all(|(&x, &lx)| {
                let fx = coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % p);
                let v = fx * lx % p;
                v != 0 && pow_mod(v, (p - 1) / 2, p) == 1
            });
            if ok {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------

struct Instance {
    scheme: Scheme,
}

struct Sweep {
    instances: Vec<Instance>,
    /// Tuples with no admissible retrieval code, `(q, n, k, t)`.
    infeasible: Vec<(u32, usize, usize, usize)>,
}

fn valid_tuples(q: u32) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for n in 2..=q as usize {
        for k in 1..n {
            for t in 1..=n - k {
                v.push((n, k, t));
            }
        }
    }
    v
}

fn build_sweep() -> Result<Sweep, String> {
    let mut instances = Vec::new();
    let mut infeasible = Vec::new();
    for q in SWEEP_FIELDS {
        for (n, k, t) in valid_tuples(q) {
            let params = derive_params(q, n, k, t, 1).map_err(|e| format!("({q},{n},{k},{t}): {e}"))?;
            match Scheme::new(&params) {
                Ok(scheme) => instances.push(Instance { scheme }),
                Err(ProtocolError::Code(CodeError::NotFound)) => infeasible.push((q, n, k, t)),
                Err(e) => return Err(format!("({q},{n},{k},{t}): {e}")),
            }
        }
    }
    Ok(Sweep {
        instances,
        infeasible,
    })
}

fn with_m(scheme: &Scheme, m: usize) -> Scheme {
    let p = &scheme.params;
    let params = derive_params(p.q, p.n, p.k, p.t, m).unwrap();
    Scheme::from_codes(&params, scheme.code_c.clone(), scheme.code_d.clone(), scheme.code_s.clone()).unwrap()
}

// ---------------------------------------------------------------------------

fn criterion1() -> Result<String, String> {
    let params = derive_params(7, 6, 3, 2, 2).map_err(|e| e.to_string())?;
    let scheme = Scheme::new(&params).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (files, storage) = storage_for(&scheme, &mut rng);
        for target in 1..=2 {
            let t = run_protocol(&scheme, &storage, target, seed, &RunOptions::default())
                .map_err(|e| e.to_string())?;
            check(t.rounds.len() == 3, || format!("{} rounds", t.rounds.len()))?;
            check(t.q_in == 18, || format!("{} qudits", t.q_in))?;
            check(t.symbols_retrieved == 12, || format!("{} symbols", t.symbols_retrieved))?;
            check(t.decoded == files[target - 1], || format!("seed {seed}, K={target}: wrong file"))?;
            let measured = Ratio::new(t.symbols_retrieved as u64, t.q_in as u64);
            check(measured == Ratio::new(2, 3) && t.rate.ratio() == Ratio::new(2, 3), || {
                format!("rate {measured}, reported {}", t.rate.ratio())
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs: 3 rounds, 18 qudits, 12 symbols, rate 12/18 = 2/3, exact decode"))
}

fn criterion2() -> Result<String, String> {
    let mut tuples: Vec<(u32, usize, usize, usize)> = Vec::new();
    for q in [7, 8] {
        tuples.extend(valid_tuples(q).into_iter().map(|(n, k, t)| (q, n, k, t)));
    }
    tuples.extend([
        (11, 10, 4, 3),
        (11, 10, 2, 5),
        (11, 11, 3, 3),
        (13, 12, 5, 3),
        (13, 13, 2, 2),
        (16, 10, 3, 3),
        (16, 16, 4, 5),
        (16, 9, 2, 2),
        (16, 15, 7, 1),
        (16, 12, 1, 1),
    ]);
    let (mut checked, mut normalized, mut skipped) = (0, 0, 0);
    for (q, n, k, t) in tuples {
        let params = derive_params(q, n, k, t, 2).map_err(|e| e.to_string())?;
        let scheme = match Scheme::new(&params) {
            Ok(s) => s,
            Err(ProtocolError::Code(CodeError::NotFound)) if !wsd_grs_exists(q, params.n_eff, params.star_dim()) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(format!("({q},{n},{k},{t}): {e}")),
        };
        let mut rng = ChaCha20Rng::seed_from_u64(q as u64 * 1000 + n as u64);
        let (files, storage) = storage_for(&scheme, &mut rng);
        let tr = run_protocol(&scheme, &storage, 2, 7, &RunOptions::default()).map_err(|e| e.to_string())?;
        check(tr.decoded == files[1], || format!("({q},{n},{k},{t}): wrong file"))?;
        let measured = Ratio::new(tr.symbols_retrieved as u64, tr.q_in as u64);
        let want = expected_rate(n, k, t);
        check(measured == want, || format!("({q},{n},{k},{t}): measured {measured}, expected {want}"))?;
        if 2 * (k + t - 1) < n {
            check(measured == Ratio::from_integer(1), || format!("({q},{n},{k},{t}) normalized but rate {measured}"))?;
            normalized += 1;
        }
        checked += 1;
    }
    check(checked >= 20, || format!("only {checked} tuples"))?;
    check(normalized > 0, || "no normalized instance".into())?;
    Ok(format!(
        "{checked} tuples (incl. {normalized} normalized at rate 1) match min(1, 2(n-k-t+1)/n); {skipped} infeasible tuples skipped"
    ))
}

fn criterion3(sweep: &Result<Sweep, String>, setup: Duration) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    for &(q, n, k, t) in &sweep.infeasible {
        let p = derive_params(q, n, k, t, 1).unwrap();
        check(!wsd_grs_exists(q, p.n_eff, p.star_dim()), || {
            format!("({q},{n},{k},{t}) reported infeasible but a dual-containing GRS code exists")
        })?;
    }
    for inst in &sweep.instances {
        let p = &inst.scheme.params;
        check(wsd_grs_exists(p.q, p.n_eff, p.star_dim()), || {
            format!("existence test disagrees with the constructed code at {:?}", tuple(p))
        })?;
    }
    let mut runs = 0usize;
    for (idx, inst) in sweep.instances.iter().enumerate() {
        let schemes: Vec<Scheme> = (1..=MAX_M).map(|m| with_m(&inst.scheme, m)).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(0xc0ffee ^ idx as u64);
        for run in 0..RUNS_PER_TUPLE {
            let scheme = &schemes[run % MAX_M];
            let m = scheme.params.m;
            let target = 1 + (run / MAX_M) % m;
            let (files, storage) = storage_for(scheme, &mut rng);
            let seed = rng.gen();
            let p = &scheme.params;
            let tr = run_protocol(scheme, &storage, target, seed, &RunOptions::default())
                .map_err(|e| format!("({},{},{},{}) m={m}: {e}", p.q, p.n, p.k, p.t))?;
            check(tr.decoded == files[target - 1], || {
                format!("({},{},{},{}) m={m} K={target} seed {seed}: decoded file differs", p.q, p.n, p.k, p.t)
            })?;
            runs += 1;
        }
    }
    let odd: BTreeSet<String> = sweep
        .infeasible
        .iter()
        .map(|(q, n, k, t)| format!("({q},{n},{k},{t})"))
        .collect();
    Ok(format!(
        "{runs} runs over {} tuples, m = 1..{MAX_M}, all decoded exactly (setup {:.1}s); {} tuples have no dual-containing GRS star code over any locator set (checked independently) and were skipped: {}",
        sweep.instances.len(),
        setup.as_secs_f64(),
        sweep.infeasible.len(),
        odd.into_iter().collect::<Vec<_>>().join(" ")
    ))
}

/// `G G^T = 0` and `dim = n/2`, computed entry by entry.
fn is_self_dual(code: &GrsCode) -> bool {
    let f = code.field();
    let g = code.generator();
    let n = code.len();
    if 2 * code.dim() != n || g.rank() != code.dim() {
        return false;
    }
    (0..g.rows()).all(|i| {
        (0..g.rows()).all(|j| (0..n).fold(0, |acc, c| f.add(acc, f.mul(g.get(i, c), g.get(j, c)))) == 0)
    })
}

fn criterion4(sweep: &Result<Sweep, String>) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    // (i)
    let mut self_dual = 0;
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for q in [8u32, 16] {
        let f = Field::of_order(q).map_err(|e| e.to_string())?;
        for n in (2..=q as usize).step_by(2) {
            for trial in 0..5 {
                let mut locs: Vec<u32> = f.elements().collect();
                if trial > 0 {
                    for i in (1..locs.len()).rev() {
                        locs.swap(i, rng.gen_range(0..=i));
                    }
                }
                locs.truncate(n);
                let code = self_dual_multipliers_char2(&f, &locs).map_err(|e| e.to_string())?;
                check(is_self_dual(&code), || format!("GF({q}) locators {locs:?}: not self-dual"))?;
                let dual = code.dual().map_err(|e| e.to_string())?;
                check(dual.generator().same_row_space(&code.generator()), || {
                    format!("GF({q}) locators {locs:?}: closed-form dual differs")
                })?;
                self_dual += 1;
            }
        }
    }
    // (ii)
    let mut star = 0;
    for inst in &sweep.instances {
        let s = &inst.scheme;
        if s.params.n_eff <= 8 {
            let ok = star_span_bruteforce(&s.code_c, &s.code_d).map_err(|e| e.to_string())?;
            check(ok, || format!("star span mismatch at {:?}", tuple(&s.params)))?;
            star += 1;
        }
    }
    // (iii)
    let mut seen = BTreeSet::new();
    for inst in &sweep.instances {
        let s = &inst.scheme;
        let p = &s.params;
        let ks = p.star_dim();
        if (p.q as u64).checked_pow(ks as u32).is_none_or(|c| c > MAX_CODEWORDS) {
            continue;
        }
        let d = &s.code_s;
        if !seen.insert((p.q, d.locators().to_vec(), d.multipliers().to_vec(), ks)) {
            continue;
        }
        let dist = min_distance_exhaustive(d).map_err(|e| e.to_string())?;
        let want = p.n_eff - p.k - p.t_eff + 2;
        check(dist == want, || format!("{:?}: d(S') = {dist}, expected {want}", tuple(p)))?;
    }
    Ok(format!(
        "(i) {self_dual} self-dual codes over GF(8)/GF(16); (ii) {star} star spans with n <= 8; (iii) {} distinct S' with d = n-k-t+2",
        seen.len()
    ))
}

fn tuple(p: &SchemeParams) -> (u32, usize, usize, usize) {
    (p.q, p.n, p.k, p.t)
}

fn criterion5(sweep: &Result<Sweep, String>) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    let (mut exhaustive, mut sampled) = (0, 0);
    for (i, inst) in sweep.instances.iter().enumerate() {
        let s = &inst.scheme;
        let report = lemma5_checks(&s.bundle.g_s, &s.bundle.h_s, s.params.n_eff, s.params.star_dim(), i as u64)
            .map_err(|e| format!("{:?}: {e}", tuple(&s.params)))?;
        if report.exhaustive {
            exhaustive += 1;
        } else {
            sampled += 1;
        }
    }
    Ok(format!(
        "(b) exact on all {} instances; (a) exhaustive on {exhaustive} with n <= 8, sampled on {sampled}",
        sweep.instances.len()
    ))
}

fn criterion6(sweep: &Result<Sweep, String>) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    let (mut instances, mut subsets) = (0, 0);
    for inst in &sweep.instances {
        let s = &inst.scheme;
        if s.params.n_eff <= 12 {
            subsets += user_privacy_rank_all(s).map_err(|e| format!("{:?}: {e}", tuple(&s.params)))?;
            instances += 1;
        }
    }
    // two files are needed to compare K = 1 with K = 2
    let params = derive_params(3, 3, 1, 2, 2).map_err(|e| e.to_string())?;
    let scheme = Scheme::new(&params).map_err(|e| e.to_string())?;
    let t_set = [1, 2];
    let uniform = user_privacy_empirical(&scheme, &t_set, 1, 2, PRIVACY_SAMPLES, 6, QueryRandomness::Uniform)
        .map_err(|e| e.to_string())?;
    let control = user_privacy_empirical(&scheme, &t_set, 1, 2, PRIVACY_SAMPLES, 6, QueryRandomness::Zero)
        .map_err(|e| e.to_string())?;
    let (u, c) = (&uniform.tests[0], &control.tests[0]);
    check(u.p_value >= SIGNIFICANCE, || format!("uniform queries distinguished: p = {:.4}", u.p_value))?;
    check(c.p_value < SIGNIFICANCE, || format!("Z = 0 control not distinguished: p = {:.4}", c.p_value))?;
    Ok(format!(
        "{subsets} t-subsets invertible over {instances} instances with n <= 12; q=3 n=3 k=1 t=2 m=2, T={{1,2}}, 1e5 samples: chi2 = {:.1} (dof {}), p = {:.4}; Z = 0 control p = {:.1e}",
        u.statistic, u.dof, u.p_value, c.p_value
    ))
}

fn criterion7() -> Result<String, String> {
    let mut pairs = 0;
    for (q, n, k, t, m) in [(7u32, 6, 3, 2, 3), (8, 6, 2, 2, 3), (11, 10, 4, 3, 4), (13, 12, 5, 3, 2), (16, 10, 3, 3, 4)] {
        let params = derive_params(q, n, k, t, m).map_err(|e| e.to_string())?;
        let scheme = Scheme::new(&params).map_err(|e| e.to_string())?;
        for seed in 0..5u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed + 100);
            let target = 1 + seed as usize % m;
            let (files, first) = storage_for(&scheme, &mut rng);
            let mut others = files.clone();
            let mut target_changed = files.clone();
            for (i, file) in others.iter_mut().enumerate() {
                if i + 1 != target {
                    for x in file.iter_mut() {
                        *x = rng.gen_range(0..q);
                    }
                }
            }
            let pos = rng.gen_range(0..files[0].len());
            let x = &mut target_changed[target - 1][pos];
            *x = scheme.field.add(*x, 1);
            let beta = params.beta;
            let second = StorageSystem::from_files(&others, &scheme.storage_code, beta).map_err(|e| e.to_string())?;
            let third = StorageSystem::from_files(&target_changed, &scheme.storage_code, beta).map_err(|e| e.to_string())?;
            let same = server_privacy_check(&scheme, &first, &second, target, seed).map_err(|e| e.to_string())?;
            check(same.identical(), || {
                format!("({q},{n},{k},{t}) seed {seed}: outputs differ in round {:?}", same.first_difference)
            })?;
            let diff = server_privacy_check(&scheme, &first, &third, target, seed).map_err(|e| e.to_string())?;
            check(!diff.identical(), || format!("({q},{n},{k},{t}) seed {seed}: perturbing file K went unnoticed"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} paired runs: identical outputs when only files i != K differ; perturbing file K changes an output every time"))
}

/// Dense runs for `(k, t)` at `(q, n)`; `Err` for a real failure, `Ok(None)`
/// when no scheme exists.
fn dense_instance(q: u32, n: usize, k: usize, t: usize) -> Result<Option<String>, String> {
    let params = derive_params(q, n, k, t, 2).map_err(|e| e.to_string())?;
    let scheme = match Scheme::new(&params) {
        Ok(s) => s,
        Err(ProtocolError::Code(CodeError::NotFound)) => return Ok(None),
        Err(e) => return Err(e.to_string()),
    };
    let (mut rounds, mut min_max, mut worst_total) = (0, 1.0f64, 0.0f64);
    for seed in 0..4u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (files, storage) = storage_for(&scheme, &mut rng);
        let target = 1 + seed as usize % 2;
        let run = run_dense_protocol(&scheme, &storage, target, seed).map_err(|e| e.to_string())?;
        for r in &run.rounds {
            check(r.max_probability >= 1.0 - POINT_MASS_TOL, || {
                format!("(k,t)=({k},{t}) round {}: max probability {}", r.r, r.max_probability)
            })?;
            check((r.total_probability - 1.0).abs() <= POINT_MASS_TOL, || {
                format!("(k,t)=({k},{t}) round {}: total probability {}", r.r, r.total_probability)
            })?;
            check(r.outcome == r.coset_outcome, || format!("(k,t)=({k},{t}) round {}: outcome differs from coset decode", r.r))?;
            min_max = min_max.min(r.max_probability);
            worst_total = worst_total.max((r.total_probability - 1.0).abs());
            rounds += 1;
        }
        check(run.transcript.decoded == files[target - 1], || format!("(k,t)=({k},{t}): wrong file"))?;
    }
    Ok(Some(format!(
        "(k,t)=({k},{t}): {rounds} rounds, min max-probability {min_max:.12}, |sum-1| <= {worst_total:.1e}"
    )))
}

fn criterion8(supplementary: &mut Vec<String>) -> Verdict {
    let (q, n) = (5u32, 4usize);
    let mut passed = Vec::new();
    let mut missing = Vec::new();
    for (k, t) in [(1, 2), (2, 1), (2, 2)] {
        match dense_instance(q, n, k, t) {
            Ok(Some(d)) => passed.push(d),
            Ok(None) => {
                let p = derive_params(q, n, k, t, 1).unwrap();
                if wsd_grs_exists(q, p.n_eff, p.star_dim()) {
                    return Verdict::Fail(format!("(k,t)=({k},{t}): construction failed although a code exists"));
                }
                missing.push(format!("({k},{t})"));
            }
            Err(e) => return Verdict::Fail(e),
        }
    }
    // same (n, k, t) over GF(7), where the codes exist
    for (k, t) in [(1, 2), (2, 1)] {
        match dense_instance(7, n, k, t) {
            Ok(Some(d)) => supplementary.push(format!("q=7, n=4 {d}")),
            Ok(None) => supplementary.push(format!("q=7, n=4 (k,t)=({k},{t}): no scheme")),
            Err(e) => supplementary.push(format!("q=7, n=4 FAILED {e}")),
        }
    }
    if missing.is_empty() {
        Verdict::Pass(passed.join("; "))
    } else {
        Verdict::Unattainable(format!(
            "(k,t) = {} at q=5, n=4 need a [4,2] GRS code over GF(5) containing its dual, and exhaustive search over all locator sets and multipliers shows none exists; passed: {}",
            missing.join(", "),
            passed.join("; ")
        ))
    }
}

fn main() {
    let mut h = Harness {
        failures: 0,
        unattainable: 0,
    };
    h.criterion(1, "golden example", Some(Duration::from_secs(1)), || verdict(criterion1()));
    h.criterion(2, "rate formula", Some(Duration::from_secs(10)), || verdict(criterion2()));

    let start = Instant::now();
    let sweep = build_sweep();
    let setup = start.elapsed();
    // the time limit covers building the schemes as well as the runs
    h.criterion(3, "correctness sweep", Some(Duration::from_secs(120)), || {
        let rest = Instant::now();
        let r = criterion3(&sweep, setup);
        match r {
            Ok(d) if setup + rest.elapsed() > Duration::from_secs(120) => {
                Verdict::Fail(format!("{d}; setup + runs over 120s"))
            }
            r => verdict(r),
        }
    });
    h.criterion(4, "code algebra", None, || verdict(criterion4(&sweep)));
    h.criterion(5, "stabilizer conditions", None, || verdict(criterion5(&sweep)));
    h.criterion(6, "user privacy", None, || verdict(criterion6(&sweep)));
    h.criterion(7, "server privacy", None, || verdict(criterion7()));
    let mut supplementary = Vec::new();
    h.criterion(8, "oracle equivalence", Some(Duration::from_secs(300)), || criterion8(&mut supplementary));
    for s in &supplementary {
        println!("INFO [8] {s}");
    }

    println!(
        "acceptance: {} failed, {} unattainable",
        h.failures, h.unattainable
    );
    if h.failures > 0 {
        std::process::exit(1);
    }
}
