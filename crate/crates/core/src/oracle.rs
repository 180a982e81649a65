//! Dense state-vector model of the quantum channel, used to cross-check the
//! coset simulation on tiny instances. Odd characteristic only.
//!
//! The system is `n` qudits of dimension `q`. Basis state `|x>` is indexed by
//! the field indices of `x_1, ..., x_n` read as base-`q` digits, most
//! significant first. A reference register of dimension `q^aux` purifies the
//! mixed part of the initial state, and amplitude `(x, r)` is stored at
//! `x * q^aux + r`. Weyl operators are applied matrix-free.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::galois::Field;
use crate::linalg::Matrix;
use crate::protocol::{run_rounds, ProtocolError, RunOptions, Scheme, StorageSystem, Transcript};
use crate::symplectic::{is_self_orthogonal, symp_bilinear, symp_form};

/// Cap on the number of amplitudes, `q^(n + aux)`.
pub const MAX_AMPLITUDES: u64 = 1_000_000;

/// Tolerance for treating a distribution as a point mass.
pub const POINT_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("the dense oracle supports odd characteristic only")]
    EvenCharacteristicUnsupported,
    #[error("stabilizer basis is not self-orthogonal")]
    NotSelfOrthogonal,
    #[error("dense simulation needs {needed} amplitudes, limit is {limit}")]
    TooLarge { needed: u64, limit: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("stabilizer projector has rank {got}, expected {expected}")]
    ProjectorRank { got: usize, expected: usize },
    #[error("no phase convention maps displacements to their coset labels")]
    CalibrationFailed,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn require_odd(field: &Field) -> Result<(), OracleError> {
    if field.is_char2() {
        Err(OracleError::EvenCharacteristicUnsupported)
    } else {
        Ok(())
    }
}

fn checked_pow(q: u32, e: usize) -> Option<u64> {
    (0..e).try_fold(1u64, |acc, _| acc.checked_mul(q as u64))
}

fn bounded_pow(q: u32, e: usize) -> Result<usize, OracleError> {
    match checked_pow(q, e) {
        Some(v) if v <= MAX_AMPLITUDES => Ok(v as usize),
        Some(v) => Err(OracleError::TooLarge {
            needed: v,
            limit: MAX_AMPLITUDES,
        }),
        None => Err(OracleError::TooLarge {
            needed: u64::MAX,
            limit: MAX_AMPLITUDES,
        }),
    }
}

/// `omega^k` for `k = 0..p`, `omega = exp(2 pi i / p)`.
fn roots_of_unity(p: u32) -> Vec<Complex64> {
    (0..p)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64))
        .collect()
}

fn digits(q: u32, n: usize, mut idx: usize) -> Vec<u32> {
    let mut d = vec![0; n];
    for s in (0..n).rev() {
        d[s] = (idx % q as usize) as u32;
        idx /= q as usize;
    }
    d
}

fn index_of(q: u32, d: &[u32]) -> usize {
    d.iter().fold(0, |acc, &x| acc * q as usize + x as usize)
}

fn trace_table(field: &Field) -> Vec<u32> {
    field.elements().map(|x| field.trace(x)).collect()
}

fn dot(field: &Field, a: &[u32], b: &[u32]) -> u32 {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// Pure state of the system together with its reference register.
#[derive(Debug, Clone)]
pub struct StateVector {
    field: Field,
    n: usize,
    aux_exp: usize,
    amplitudes: Vec<Complex64>,
    layout: Arc<Layout>,
}

/// Tables shared by all states of one shape.
#[derive(Debug)]
struct Layout {
    /// Digits of every system basis index, `n` per index.
    digits: Vec<u32>,
    roots: Vec<Complex64>,
    trace: Vec<u32>,
}

impl StateVector {
    pub fn from_amplitudes(
        field: &Field,
        n: usize,
        aux_exp: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, OracleError> {
        require_odd(field)?;
        let len = bounded_pow(field.order(), n + aux_exp)?;
        if amplitudes.len() != len {
            return Err(OracleError::DimensionMismatch(format!(
                "{} amplitudes for q^(n+aux) = {len}",
                amplitudes.len()
            )));
        }
        let sys = bounded_pow(field.order(), n)?;
        let layout = Layout {
            digits: (0..sys).flat_map(|x| digits(field.order(), n, x)).collect(),
            roots: roots_of_unity(field.p()),
            trace: trace_table(field),
        };
        Ok(StateVector {
            field: field.clone(),
            n,
            aux_exp,
            amplitudes,
            layout: Arc::new(layout),
        })
    }

    /// `|x> (x) |r>`.
    pub fn basis(field: &Field, n: usize, aux_exp: usize, x: &[u32], r: usize) -> Result<Self, OracleError> {
        require_odd(field)?;
        let len = bounded_pow(field.order(), n + aux_exp)?;
        let aux_dim = len / bounded_pow(field.order(), n)?;
        if x.len() != n || r >= aux_dim || x.iter().any(|&v| !field.contains(v)) {
            return Err(OracleError::DimensionMismatch("basis label out of range".into()));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index_of(field.order(), x) * aux_dim + r] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(field, n, aux_exp, amplitudes)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn aux_exp(&self) -> usize {
        self.aux_exp
    }

    pub fn system_dim(&self) -> usize {
        self.amplitudes.len() / self.aux_dim()
    }

    pub fn aux_dim(&self) -> usize {
        (self.field.order() as usize).pow(self.aux_exp as u32)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn zeroed(&self) -> StateVector {
        StateVector {
            amplitudes: vec![Complex64::new(0.0, 0.0); self.amplitudes.len()],
            ..self.clone()
        }
    }
}

/// `W(a, b) = X(a) Z(b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylLabel {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl WeylLabel {
    pub fn new(a: Vec<u32>, b: Vec<u32>) -> Self {
        WeylLabel { a, b }
    }

    pub fn identity(n: usize) -> Self {
        WeylLabel {
            a: vec![0; n],
            b: vec![0; n],
        }
    }

    /// Splits `(a | b)`.
    pub fn from_vector(w: &[u32]) -> Self {
        let (a, b) = w.split_at(w.len() / 2);
        WeylLabel {
            a: a.to_vec(),
            b: b.to_vec(),
        }
    }

    pub fn to_vector(&self) -> Vec<u32> {
        self.a.iter().chain(&self.b).copied().collect()
    }
}

/// Calls `visit(x, y, phase)` for each system basis index `x`, with `y` the
/// index of `x + a` and `phase = omega^{tr(b.x)}`.
fn for_each_shift(
    state: &StateVector,
    label: &WeylLabel,
    mut visit: impl FnMut(usize, usize, Complex64),
) -> Result<(), OracleError> {
    let f = &state.field;
    require_odd(f)?;
    let n = state.n;
    if label.a.len() != n || label.b.len() != n {
        return Err(OracleError::DimensionMismatch(format!(
            "label of length ({}, {}) on {n} qudits",
            label.a.len(),
            label.b.len(),
        )));
    }
    let q = f.order() as usize;
    let lay = &*state.layout;
    for x in 0..state.system_dim() {
        let d = &lay.digits[x * n..(x + 1) * n];
        let mut phase = 0;
        let mut y = 0;
        for s in 0..n {
            phase = f.add(phase, f.mul(label.b[s], d[s]));
            y = y * q + f.add(d[s], label.a[s]) as usize;
        }
        visit(x, y, lay.roots[lay.trace[phase as usize] as usize]);
    }
    Ok(())
}

/// `W(a, b)|x> = omega^{tr(b.x)} |x + a>` on the system factor.
pub fn weyl_apply(state: &StateVector, label: &WeylLabel) -> Result<StateVector, OracleError> {
    let aux = state.aux_dim();
    let mut out = state.zeroed();
    for_each_shift(state, label, |x, y, w| {
        for r in 0..aux {
            out.amplitudes[y * aux + r] = w * state.amplitudes[x * aux + r];
        }
    })?;
    Ok(out)
}

/// `<psi| W(a, b) |psi>`.
pub fn weyl_expectation(state: &StateVector, label: &WeylLabel) -> Result<Complex64, OracleError> {
    let aux = state.aux_dim();
    let amps = &state.amplitudes;
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_shift(state, label, |x, y, w| {
        let mut s = Complex64::new(0.0, 0.0);
        for r in 0..aux {
            s += amps[y * aux + r].conj() * amps[x * aux + r];
        }
        acc += w * s;
    })?;
    Ok(acc)
}

/// Every element of the row space of `basis`.
fn span_elements(basis: &Matrix) -> Vec<Vec<u32>> {
    let f = basis.field();
    let q = f.order();
    let d = basis.rows();
    let count = (q as usize).pow(d as u32);
    (0..count)
        .map(|i| {
            let c = digits(q, d, i);
            let mut v = vec![0u32; basis.cols()];
            for (r, &cr) in c.iter().enumerate() {
                if cr == 0 {
                    continue;
                }
                for (vj, &bj) in v.iter_mut().zip(basis.row(r)) {
                    *vj = f.add(*vj, f.mul(cr, bj));
                }
            }
            v
        })
        .collect()
}

/// `q^{-dim V} sum_v omega^{sign * form(w, v)} W(v)` applied to `state`.
fn apply_coset_projector(
    state: &StateVector,
    v_elems: &[Vec<u32>],
    w: &[u32],
    sign: i8,
) -> Result<StateVector, OracleError> {
    let f = &state.field;
    let p = f.p();
    let roots = roots_of_unity(p);
    let aux = state.aux_dim();
    let mut out = state.zeroed();
    for v in v_elems {
        let k = symp_form(f, w, v).map_err(ProtocolError::from)?;
        let k = if sign < 0 { (p - k) % p } else { k };
        let phase = roots[k as usize];
        for_each_shift(state, &WeylLabel::from_vector(v), |x, y, u| {
            let c = phase * u;
            for r in 0..aux {
                out.amplitudes[y * aux + r] += c * state.amplitudes[x * aux + r];
            }
        })?;
    }
    let scale = 1.0 / v_elems.len() as f64;
    out.amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(out)
}

/// Projector onto the joint `+1` eigenspace of `{W(v) : v in V}`.
pub fn stabilizer_projector(state: &StateVector, v_basis: &Matrix) -> Result<StateVector, OracleError> {
    let elems = span_elements(&v_basis.row_basis());
    apply_coset_projector(state, &elems, &vec![0; 2 * state.n], 1)
}

/// Purification of `P_0 / tr(P_0)`: the code state tensored with the
/// maximally mixed state on `q^{n - dim V}` levels, entangled with a
/// reference register of that dimension.
pub fn stabilizer_initial_state(v_basis: &Matrix) -> Result<StateVector, OracleError> {
    let f = v_basis.field();
    require_odd(f)?;
    if !v_basis.cols().is_multiple_of(2) {
        return Err(OracleError::DimensionMismatch("odd symplectic length".into()));
    }
    if !is_self_orthogonal(v_basis) {
        return Err(OracleError::NotSelfOrthogonal);
    }
    let n = v_basis.cols() / 2;
    let basis = v_basis.row_basis();
    let aux_exp = n - basis.rows();
    let q = f.order();
    bounded_pow(q, n + aux_exp)?;
    let sys_dim = bounded_pow(q, n)?;
    let aux_dim = bounded_pow(q, aux_exp)?;
    let elems = span_elements(&basis);
    let roots = roots_of_unity(f.p());

    // orthonormal basis of range(P_0) by Gram-Schmidt on P_0 |x>
    let mut range: Vec<Vec<Complex64>> = Vec::with_capacity(aux_dim);
    for x in 0..sys_dim {
        if range.len() == aux_dim {
            break;
        }
        // P_0 |x> = |V|^{-1} sum_v omega^{tr(b_v . x)} |x + a_v>
        let d = digits(q, n, x);
        let mut u = vec![Complex64::new(0.0, 0.0); sys_dim];
        for v in &elems {
            let (a, b) = v.split_at(n);
            let shifted: Vec<u32> = d.iter().zip(a).map(|(&s, &t)| f.add(s, t)).collect();
            u[index_of(q, &shifted)] += roots[f.trace(dot(f, b, &d)) as usize];
        }
        let scale = 1.0 / elems.len() as f64;
        u.iter_mut().for_each(|z| *z *= scale);
        for _ in 0..2 {
            for b in &range {
                let c: Complex64 = b.iter().zip(&u).map(|(bi, ui)| bi.conj() * ui).sum();
                u.iter_mut().zip(b).for_each(|(ui, bi)| *ui -= c * bi);
            }
        }
        let norm = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            u.iter_mut().for_each(|a| *a /= norm);
            range.push(u);
        }
    }
    if range.len() != aux_dim {
        return Err(OracleError::ProjectorRank {
            got: range.len(),
            expected: aux_dim,
        });
    }
    let scale = 1.0 / (aux_dim as f64).sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); sys_dim * aux_dim];
    for (r, b) in range.iter().enumerate() {
        for (x, &v) in b.iter().enumerate() {
            amplitudes[x * aux_dim + r] = v * scale;
        }
    }
    StateVector::from_amplitudes(f, n, aux_exp, amplitudes)
}

/// Outcome distribution over the coset labels `x in F_q^{2c}`.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<Vec<u32>>,
    pub probabilities: Vec<f64>,
    /// Largest imaginary residue seen; should be rounding noise.
    pub max_imaginary: f64,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn argmax(&self) -> (&[u32], f64) {
        let (i, &p) = self
            .probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty distribution");
        (&self.outcomes[i], p)
    }

    pub fn probability_of(&self, x: &[u32]) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| o == x)
            .map(|i| self.probabilities[i])
    }

    pub fn is_point_mass(&self) -> bool {
        self.argmax().1 >= 1.0 - POINT_MASS_TOL
    }
}

/// The PVM `{P_x}` for one round: `P_x` projects onto the eigenspace reached
/// from the code space by the displacement `x M`.
#[derive(Debug, Clone)]
pub struct DenseMeasurement {
    reps: Matrix,
    v_elems: Vec<Vec<u32>>,
    labels: Vec<Vec<u32>>,
    shifts: Vec<Vec<u32>>,
    sign: i8,
}

impl DenseMeasurement {
    pub fn new(v_basis: &Matrix, reps: &Matrix, sign: i8) -> Result<Self, OracleError> {
        let f = v_basis.field();
        require_odd(f)?;
        let basis = v_basis.row_basis();
        if reps.cols() != v_basis.cols() || reps.rows() != basis.rows() {
            return Err(OracleError::DimensionMismatch(format!(
                "{} representatives for a stabilizer of dimension {}",
                reps.rows(),
                basis.rows()
            )));
        }
        let q = f.order();
        let count = bounded_pow(q, reps.rows())?;
        let labels: Vec<Vec<u32>> = (0..count).map(|i| digits(q, reps.rows(), i)).collect();
        let shifts = labels
            .iter()
            .map(|x| reps.vec_mul(x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ProtocolError::from)?;
        Ok(DenseMeasurement {
            reps: reps.clone(),
            v_elems: span_elements(&basis),
            labels,
            shifts,
            sign: if sign < 0 { -1 } else { 1 },
        })
    }

    /// Picks the sign of the pairing under which each displacement `x M` of
    /// `initial` is measured as `x`.
    pub fn calibrated(
        initial: &StateVector,
        v_basis: &Matrix,
        reps: &Matrix,
    ) -> Result<Self, OracleError> {
        let f = v_basis.field();
        let d = reps.rows();
        // x and -x differ in odd characteristic, so one nonzero probe already
        // separates the two signs; the second checks the whole label
        let probes: Vec<Vec<u32>> = vec![
            (0..d).map(|j| u32::from(j == 0)).collect(),
            (0..d).map(|j| (j as u32 + 1) % f.p()).collect(),
        ];
        for sign in [1i8, -1] {
            let pvm = Self::new(v_basis, reps, sign)?;
            let mut ok = true;
            for x in &probes {
                let shift = reps.vec_mul(x).map_err(ProtocolError::from)?;
                let moved = weyl_apply(initial, &WeylLabel::from_vector(&shift))?;
                let dist = pvm.probabilities(&moved)?;
                let (best, p) = dist.argmax();
                if best != x.as_slice() || p < 1.0 - POINT_MASS_TOL {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(pvm);
            }
        }
        Err(OracleError::CalibrationFailed)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `p(x) = <psi| P_x |psi>` through the characteristic function
    /// `chi(v) = <psi| W(v) |psi>`.
    pub fn probabilities(&self, state: &StateVector) -> Result<OutcomeDistribution, OracleError> {
        let f = state.field.clone();
        let p = f.p();
        let roots = roots_of_unity(p);
        let chi = self
            .v_elems
            .iter()
            .map(|v| weyl_expectation(state, &WeylLabel::from_vector(v)))
            .collect::<Result<Vec<Complex64>, OracleError>>()?;
        // the pairing is linear in the label: <x M, v> = sum_i x_i <M_i, v>
        let pairings = self
            .v_elems
            .iter()
            .map(|v| {
                self.reps
                    .to_rows()
                    .iter()
                    .map(|m| symp_bilinear(&f, m, v))
                    .collect::<Result<Vec<u32>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(ProtocolError::from)?;
        let tr = trace_table(&f);
        let scale = 1.0 / self.v_elems.len() as f64;
        let mut probabilities = Vec::with_capacity(self.labels.len());
        let mut max_imaginary: f64 = 0.0;
        for x in &self.labels {
            let mut acc = Complex64::new(0.0, 0.0);
            for (beta, c) in pairings.iter().zip(&chi) {
                let k = tr[dot(&f, x, beta) as usize];
                let k = if self.sign < 0 { (p - k) % p } else { k };
                acc += roots[k as usize] * c;
            }
            acc *= scale;
            max_imaginary = max_imaginary.max(acc.im.abs());
            probabilities.push(acc.re);
        }
        Ok(OutcomeDistribution {
            outcomes: self.labels.clone(),
            probabilities,
            max_imaginary,
        })
    }

    /// `|| P_x psi ||^2`, computed by applying the projector.
    pub fn probability_by_norm(&self, state: &StateVector, x: &[u32]) -> Result<f64, OracleError> {
        let i = self
            .labels
            .iter()
            .position(|l| l == x)
            .ok_or_else(|| OracleError::DimensionMismatch("unknown outcome label".into()))?;
        let projected = apply_coset_projector(state, &self.v_elems, &self.shifts[i], self.sign)?;
        Ok(projected.norm().powi(2))
    }
}

pub fn pvm_probabilities(
    state: &StateVector,
    v_basis: &Matrix,
    reps: &Matrix,
    sign: i8,
) -> Result<OutcomeDistribution, OracleError> {
    DenseMeasurement::new(v_basis, reps, sign)?.probabilities(state)
}

/// Per-round record of a dense run.
#[derive(Debug, Clone)]
pub struct DenseRound {
    pub r: usize,
    /// Sampled from the PVM distribution.
    pub outcome: Vec<u32>,
    /// What the coset decoder says for the same response vector.
    pub coset_outcome: Vec<u32>,
    pub max_probability: f64,
    pub total_probability: f64,
}

#[derive(Debug, Clone)]
pub struct DenseRun {
    pub transcript: Transcript,
    pub rounds: Vec<DenseRound>,
}

impl DenseRun {
    /// Every round is a point mass that agrees with the coset decoder and
    /// the probabilities sum to 1.
    pub fn is_consistent(&self) -> bool {
        self.rounds.iter().all(|r| {
            r.max_probability >= 1.0 - POINT_MASS_TOL
                && (r.total_probability - 1.0).abs() <= POINT_MASS_TOL
                && r.outcome == r.coset_outcome
        })
    }
}

fn check_scheme_size(scheme: &Scheme) -> Result<(), OracleError> {
    require_odd(&scheme.field)?;
    bounded_pow(scheme.field.order(), 2 * scheme.params.star_dim())?;
    Ok(())
}

/// Runs the protocol with the quantum side simulated densely: each round the
/// servers' Weyl operators act on the initial state and the outcome is
/// sampled from the PVM.
pub fn run_dense_protocol(
    scheme: &Scheme,
    storage: &StorageSystem,
    target: usize,
    seed: u64,
) -> Result<DenseRun, OracleError> {
    check_scheme_size(scheme)?;
    let v = &scheme.bundle.h_s;
    let initial = stabilizer_initial_state(v)?;
    let sign = DenseMeasurement::calibrated(&initial, v, &scheme.schedules[0].m_sel)?.sign();
    let pvms = scheme
        .schedules
        .iter()
        .map(|s| DenseMeasurement::new(v, &s.m_sel, sign))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sampler = ChaCha20Rng::seed_from_u64(seed ^ 0x5bd1_e995_9e37_79b9);
    let mut rounds = Vec::new();
    let mut failure = None;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut measure = |r: usize, a: &[u32]| -> Result<Vec<u32>, OracleError> {
        let state = weyl_apply(&initial, &WeylLabel::from_vector(a))?;
        let dist = pvms[r - 1].probabilities(&state)?;
        let weights: Vec<f64> = dist.probabilities.iter().map(|&p| p.max(0.0)).collect();
        let pick = WeightedIndex::new(&weights)
            .map_err(|e| OracleError::DimensionMismatch(e.to_string()))?
            .sample(&mut sampler);
        let outcome = dist.outcomes[pick].clone();
        rounds.push(DenseRound {
            r,
            outcome: outcome.clone(),
            coset_outcome: scheme.measure(r, a)?,
            max_probability: dist.argmax().1,
            total_probability: dist.total(),
        });
        Ok(outcome)
    };
    let result = run_rounds(
        scheme,
        storage,
        target,
        seed,
        &RunOptions::default(),
        |r, a| {
            measure(r, a).map_err(|e| {
                let msg = e.to_string();
                failure = Some(e);
                ProtocolError::Measurement(msg)
            })
        },
        &mut rng,
    );
    let mut transcript = match (result, failure) {
        (_, Some(e)) => return Err(e),
        (r, None) => r?,
    };
    transcript.oracle_phase_sign = Some(sign);
    Ok(DenseRun { transcript, rounds })
}

/// `1/2 sqrt(d) ||rho_a - rho_b||_F`, an upper bound on the trace distance of
/// the reduced system states (`d` the system dimension).
pub fn reduced_trace_distance_bound(a: &StateVector, b: &StateVector) -> Result<f64, OracleError> {
    if a.amplitudes.len() != b.amplitudes.len() || a.aux_exp != b.aux_exp {
        return Err(OracleError::DimensionMismatch("states of different shape".into()));
    }
    let aux = a.aux_dim();
    let sys = a.system_dim();
    fn row(s: &StateVector, aux: usize, x: usize) -> &[Complex64] {
        &s.amplitudes[x * aux..(x + 1) * aux]
    }
    let live: Vec<usize> = (0..sys)
        .filter(|&x| row(a, aux, x).iter().chain(row(b, aux, x)).any(|z| z.norm_sqr() > 0.0))
        .collect();
    let mut frob = 0.0;
    for &x in &live {
        for &y in &live {
            let mut d = Complex64::new(0.0, 0.0);
            for r in 0..aux {
                d += row(a, aux, x)[r] * row(a, aux, y)[r].conj()
                    - row(b, aux, x)[r] * row(b, aux, y)[r].conj();
            }
            frob += d.norm_sqr();
        }
    }
    Ok(0.5 * (sys as f64).sqrt() * frob.sqrt())
}

/// Trace-distance bound between the pre-measurement system states of round
/// `r` for two storage systems, under identical query randomness.
pub fn server_privacy_trace_bound(
    scheme: &Scheme,
    first: &StorageSystem,
    second: &StorageSystem,
    target: usize,
    r: usize,
    seed: u64,
) -> Result<f64, OracleError> {
    check_scheme_size(scheme)?;
    let initial = stabilizer_initial_state(&scheme.bundle.h_s)?;
    let state = scheme.build_queries(target, r, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let a = scheme.responses(first, &state.queries)?;
    let b = scheme.responses(second, &state.queries)?;
    let sa = weyl_apply(&initial, &WeylLabel::from_vector(&a))?;
    let sb = weyl_apply(&initial, &WeylLabel::from_vector(&b))?;
    reduced_trace_distance_bound(&sa, &sb)
}
