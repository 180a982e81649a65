//! The retrieval scheme over `[n, k]` GRS-coded storage with `t`-collusion.
//!
//! Layout conventions (all user-facing indices are 1-based):
//!
//! * the file matrix `X` is `m*beta x 2k`; row `(i, b)` is `(i-1)*beta + b`;
//! * the encoded matrix `Y = X diag(G_C', G_C')` is `m*beta x 2n` and server
//!   `s` stores columns `(1, s)` and `(2, s)`, i.e. `s` and `n + s`;
//! * one file is `2*beta*k` symbols, the `beta x 2k` block of `X` read row by
//!   row.
//!
//! Each round the user sends `Q = Z G_D + E_(K) M`, the servers answer with
//! dot products of their stored and received columns, and the measurement
//! returns the coset of the response vector modulo `span(G_S)` expressed in
//! the rows of `M`. After `rho` rounds every block holds `k` symbols per half,
//! which determine the file through a `k x k` submatrix of `G_C'`.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{
    retrieval_codes, split_wsd_generator, CodeDescriptor, CodeError, GrsCode, SearchBudget,
    StarGeneratorBundle,
};
use crate::galois::{Field, FieldSpec, GaloisError};
use crate::linalg::{LinalgError, Matrix, MatrixSerial};
use crate::symplectic::{CosetDecoder, SymplecticError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("retrieval needs {expected} rounds, got {got}")]
    IncompleteRounds { expected: usize, got: usize },
    #[error("decoding submatrix for block {0} is singular")]
    SingularSubmatrix(usize),
    #[error("measurement failed: {0}")]
    Measurement(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error(transparent)]
    Field(#[from] GaloisError),
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Scheme parameters, including the effective values after the rate-1
/// normalization for small collusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub m: usize,
    pub n_eff: usize,
    pub t_eff: usize,
    /// `n_eff - k - t_eff + 1`, symbols per half retrieved each round.
    pub c: usize,
    pub beta: usize,
    pub rho: usize,
    /// `c / beta = k / rho`, positions per block per round.
    pub g: usize,
    /// `max(c, k)`; servers `1..=j_max` are targeted.
    pub j_max: usize,
    pub normalized: bool,
}

impl SchemeParams {
    /// Dimension of the star-product code, `k + t_eff - 1`.
    pub fn star_dim(&self) -> usize {
        self.k + self.t_eff - 1
    }

    /// Symbols per file, `2 beta k`.
    pub fn file_len(&self) -> usize {
        2 * self.beta * self.k
    }

    pub fn rows(&self) -> usize {
        self.m * self.beta
    }

    /// Qudits prepared and sent back over the whole run.
    pub fn qudits(&self) -> usize {
        self.rho * self.n_eff
    }
}

/// Validates `(q, n, k, t, m)` and derives the scheme constants.
///
/// If `k + t - 1 < n/2` the collusion parameter is raised to
/// `t_eff = n/2 - k + 1` (even `n`), or the last server is dropped and
/// `t_eff = (n+1)/2 - k` (odd `n`); either way the rate is 1.
pub fn derive_params(
    q: u32,
    n: usize,
    k: usize,
    t: usize,
    m: usize,
) -> Result<SchemeParams, ProtocolError> {
    let bad = |msg: String| Err(ProtocolError::InvalidParams(msg));
    if k == 0 || t == 0 || m == 0 || n == 0 {
        return bad(format!("n, k, t, m must be positive (n={n}, k={k}, t={t}, m={m})"));
    }
    if n as u64 > q as u64 {
        return bad(format!("n = {n} exceeds q = {q}"));
    }
    if k >= n || t > n - k {
        return bad(format!("need 1 <= t <= n - k, got n = {n}, k = {k}, t = {t}"));
    }
    if k + t > n {
        return bad(format!("k + t - 1 = {} must be below n = {n}", k + t - 1));
    }
    let (n_eff, t_eff, normalized) = if 2 * (k + t - 1) < n {
        if n.is_multiple_of(2) {
            (n, n / 2 - k + 1, true)
        } else {
            (n - 1, n.div_ceil(2) - k, true)
        }
    } else {
        (n, t, false)
    };
    let c = n_eff - k - t_eff + 1;
    let l = lcm(c, k);
    let beta = l / k;
    let rho = l / c;
    Ok(SchemeParams {
        q,
        n,
        k,
        t,
        m,
        n_eff,
        t_eff,
        c,
        beta,
        rho,
        g: c / beta,
        j_max: c.max(k),
        normalized,
    })
}

/// `2 (n_eff - k - t_eff + 1) / n_eff`.
pub fn qpir_rate(params: &SchemeParams) -> Ratio<u64> {
    Ratio::new(2 * params.c as u64, params.n_eff as u64)
}

/// Rate recomputed from a run: symbols retrieved over qudits received. The
/// `log2 q` factors of numerator and denominator cancel.
pub fn measured_rate(symbols_retrieved: usize, qudits: usize) -> Ratio<u64> {
    Ratio::new(symbols_retrieved as u64, qudits as u64)
}

/// Targets of one round.
#[derive(Debug, Clone)]
pub struct RoundSchedule {
    pub r: usize,
    /// `J_r^b` for `b = 1..=beta`, 1-based server indices.
    pub blocks: Vec<Vec<usize>>,
    /// `(b, a)` attributed to each row of `N`, blocks ascending then `j`.
    pub rows: Vec<(usize, usize)>,
    /// `N^(r)`, `c x n_eff`.
    pub n_sel: Matrix,
    /// `M^(r) = diag(N, N)`, `2c x 2 n_eff`.
    pub m_sel: Matrix,
}

/// Cyclic schedule
/// `J_r^b = { ((r + b - 2) g + j - 1 mod max(c, k)) + 1 : j = 1..=g }`.
pub fn schedule(
    params: &SchemeParams,
    field: &Field,
    r: usize,
) -> Result<RoundSchedule, ProtocolError> {
    if r == 0 || r > params.rho {
        return Err(ProtocolError::InvalidParams(format!(
            "round {r} outside 1..={}",
            params.rho
        )));
    }
    let g = params.g;
    let modulus = params.j_max;
    let blocks: Vec<Vec<usize>> = (1..=params.beta)
        .map(|b| {
            (1..=g)
                .map(|j| ((r + b - 2) * g + j - 1) % modulus + 1)
                .collect()
        })
        .collect();
    let rows: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, set)| set.iter().map(move |&a| (bi + 1, a)))
        .collect();
    let mut n_sel = Matrix::zeros(field, params.c, params.n_eff);
    for (l, &(_, a)) in rows.iter().enumerate() {
        n_sel.set(l, a - 1, 1);
    }
    let m_sel = Matrix::block_diag(&n_sel, &n_sel);
    Ok(RoundSchedule {
        r,
        blocks,
        rows,
        n_sel,
        m_sel,
    })
}

/// Knobs for [`Scheme::new`].
#[derive(Debug, Clone)]
pub struct SetupOptions {
    pub search: SearchBudget,
    /// Locator sets tried (default locators first, then lexicographic
    /// subsets of the field) before giving up.
    pub max_locator_sets: usize,
}

impl Default for SetupOptions {
    fn default() -> Self {
        SetupOptions {
            search: SearchBudget::default(),
            max_locator_sets: 5000,
        }
    }
}

/// Lexicographic `size`-subsets of `0..q`.
pub(crate) fn combinations(q: usize, size: usize) -> impl Iterator<Item = Vec<u32>> {
    let mut current: Option<Vec<usize>> = (size <= q).then(|| (0..size).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let next = {
            let mut c = out.clone();
            let mut i = size;
            loop {
                if i == 0 {
                    break None;
                }
                i -= 1;
                if c[i] < q - size + i {
                    c[i] += 1;
                    for j in i + 1..size {
                        c[j] = c[j - 1] + 1;
                    }
                    break Some(c);
                }
            }
        };
        current = next;
        Some(out.into_iter().map(|x| x as u32).collect())
    })
}

/// Everything fixed before the first round: codes, structured generator,
/// per-round schedules and coset decoders.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub params: SchemeParams,
    pub field: Field,
    /// `[n, k]` storage code on all `n` servers.
    pub storage_code: GrsCode,
    /// Storage code restricted to the `n_eff` participating servers.
    pub code_c: GrsCode,
    pub code_d: GrsCode,
    pub code_s: GrsCode,
    /// `G_D = diag(G_D', G_D')`, `2 t_eff x 2 n_eff`.
    pub g_d: Matrix,
    pub bundle: StarGeneratorBundle,
    pub schedules: Vec<RoundSchedule>,
    pub decoders: Vec<CosetDecoder>,
}

impl Scheme {
    pub fn new(params: &SchemeParams) -> Result<Self, ProtocolError> {
        Self::with_options(params, &SetupOptions::default())
    }

    pub fn with_options(
        params: &SchemeParams,
        opts: &SetupOptions,
    ) -> Result<Self, ProtocolError> {
        let field = Field::of_order(params.q)?;
        let default = crate::codes::default_locators(&field, params.n_eff)?;
        let candidates = std::iter::once(default.clone()).chain(
            combinations(field.order() as usize, params.n_eff).filter(move |c| *c != default),
        );
        let mut found = None;
        for locs in candidates.take(opts.max_locator_sets.max(1)) {
            let cp = GrsCode::new(&field, locs, vec![1; params.n_eff], params.k)?;
            match retrieval_codes(&cp, params.t_eff, &opts.search) {
                Ok((dp, sp)) => {
                    found = Some((cp, dp, sp));
                    break;
                }
                Err(CodeError::NotFound) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        let (code_c, code_d, code_s) = found.ok_or(CodeError::NotFound)?;
        Self::from_codes(params, code_c, code_d, code_s)
    }

    /// Builds the scheme from explicit codes. `code_c` has length `n_eff`;
    /// missing servers get the smallest unused locators.
    pub fn from_codes(
        params: &SchemeParams,
        code_c: GrsCode,
        code_d: GrsCode,
        code_s: GrsCode,
    ) -> Result<Self, ProtocolError> {
        let field = code_c.field().clone();
        if code_c.len() != params.n_eff
            || code_c.dim() != params.k
            || code_d.dim() != params.t_eff
            || code_s.dim() != params.star_dim()
        {
            return Err(ProtocolError::DimensionMismatch(
                "codes do not match the scheme parameters".into(),
            ));
        }
        let mut locs = code_c.locators().to_vec();
        let mut mults = code_c.multipliers().to_vec();
        let mut spare = field.elements().filter(|x| !code_c.locators().contains(x));
        while locs.len() < params.n {
            locs.push(spare.next().expect("n <= q"));
            mults.push(1);
        }
        let storage_code = GrsCode::new(&field, locs, mults, params.k)?;
        let gdp = code_d.generator();
        let g_d = Matrix::block_diag(&gdp, &gdp);
        let bundle = split_wsd_generator(&code_s)?;
        let mut schedules = Vec::with_capacity(params.rho);
        let mut decoders = Vec::with_capacity(params.rho);
        for r in 1..=params.rho {
            let sched = schedule(params, &field, r)?;
            decoders.push(CosetDecoder::new(&bundle.g_s, &sched.m_sel)?);
            schedules.push(sched);
        }
        Ok(Scheme {
            params: params.clone(),
            field,
            storage_code,
            code_c,
            code_d,
            code_s,
            g_d,
            bundle,
            schedules,
            decoders,
        })
    }

    /// `E_(K)`, `m beta x 2c`: column `(p, l)` is the unit vector at row
    /// `(K, b_l)`, where `b_l` is the block of row `l` of `N^(r)`.
    pub fn selector(&self, target: usize, r: usize) -> Result<Matrix, ProtocolError> {
        let p = &self.params;
        if target == 0 || target > p.m {
            return Err(ProtocolError::InvalidParams(format!(
                "file index {target} outside 1..={}",
                p.m
            )));
        }
        let sched = &self.schedules[r - 1];
        let mut e = Matrix::zeros(&self.field, p.rows(), 2 * p.c);
        for (l, &(b, _)) in sched.rows.iter().enumerate() {
            let row = (target - 1) * p.beta + (b - 1);
            e.set(row, l, 1);
            e.set(row, p.c + l, 1);
        }
        Ok(e)
    }

    /// `Q = Z G_D + E_(K) M^(r)` for a given `Z`.
    pub fn assemble_queries(
        &self,
        target: usize,
        r: usize,
        z: Matrix,
    ) -> Result<RoundState, ProtocolError> {
        let p = &self.params;
        if r == 0 || r > p.rho {
            return Err(ProtocolError::InvalidParams(format!("round {r}")));
        }
        if z.rows() != p.rows() || z.cols() != 2 * p.t_eff {
            return Err(ProtocolError::DimensionMismatch(format!(
                "Z must be {}x{}",
                p.rows(),
                2 * p.t_eff
            )));
        }
        let e = self.selector(target, r)?;
        let q = z
            .mul(&self.g_d)?
            .add(&e.mul(&self.schedules[r - 1].m_sel)?)?;
        Ok(RoundState {
            r,
            z,
            e,
            queries: q,
        })
    }

    /// Draws `Z` uniformly and assembles the queries.
    pub fn build_queries<R: rand::Rng + ?Sized>(
        &self,
        target: usize,
        r: usize,
        rng: &mut R,
    ) -> Result<RoundState, ProtocolError> {
        let p = &self.params;
        let mut z = Matrix::zeros(&self.field, p.rows(), 2 * p.t_eff);
        for i in 0..z.rows() {
            for j in 0..z.cols() {
                z.set(i, j, self.field.random(rng));
            }
        }
        self.assemble_queries(target, r, z)
    }

    /// `(A_1 | A_2)` over the participating servers.
    pub fn responses(
        &self,
        storage: &StorageSystem,
        queries: &Matrix,
    ) -> Result<Vec<u32>, ProtocolError> {
        let ne = self.params.n_eff;
        let mut a = vec![0u32; 2 * ne];
        for s in 1..=ne {
            let (a1, a2) = server_response(storage, s, queries)?;
            a[s - 1] = a1;
            a[ne + s - 1] = a2;
        }
        Ok(a)
    }

    /// Coset label of the response vector in round `r`.
    pub fn measure(&self, r: usize, a: &[u32]) -> Result<Vec<u32>, ProtocolError> {
        Ok(self.decoders[r - 1].decode(a)?)
    }

    /// Recovers file `K` from the outcomes of all `rho` rounds.
    pub fn retrieve(&self, outcomes: &[Vec<u32>]) -> Result<Vec<u32>, ProtocolError> {
        let p = &self.params;
        if outcomes.len() != p.rho {
            return Err(ProtocolError::IncompleteRounds {
                expected: p.rho,
                got: outcomes.len(),
            });
        }
        // collected[b][a] = (Y_{1,a}^{K,b}, Y_{2,a}^{K,b})
        let mut collected: Vec<Vec<Option<(u32, u32)>>> = vec![vec![None; p.n_eff]; p.beta];
        for (sched, o) in self.schedules.iter().zip(outcomes) {
            if o.len() != 2 * p.c {
                return Err(ProtocolError::DimensionMismatch(format!(
                    "outcome of length {}, expected {}",
                    o.len(),
                    2 * p.c
                )));
            }
            for (l, &(b, a)) in sched.rows.iter().enumerate() {
                collected[b - 1][a - 1] = Some((o[l], o[p.c + l]));
            }
        }
        let g = self.code_c.generator();
        let mut file = Vec::with_capacity(p.file_len());
        for (bi, block) in collected.iter().enumerate() {
            let positions: Vec<usize> = (0..p.n_eff).filter(|&a| block[a].is_some()).collect();
            if positions.len() < p.k {
                return Err(ProtocolError::IncompleteRounds {
                    expected: p.k,
                    got: positions.len(),
                });
            }
            let positions = &positions[..p.k];
            let sub = g.select_columns(positions);
            let y1: Vec<u32> = positions.iter().map(|&a| block[a].unwrap().0).collect();
            let y2: Vec<u32> = positions.iter().map(|&a| block[a].unwrap().1).collect();
            let x1 = sub
                .solve_left(&y1)
                .map_err(|_| ProtocolError::SingularSubmatrix(bi + 1))?;
            let x2 = sub
                .solve_left(&y2)
                .map_err(|_| ProtocolError::SingularSubmatrix(bi + 1))?;
            file.extend(x1);
            file.extend(x2);
        }
        Ok(file)
    }

    /// Symbols retrieved and qudits downloaded per run.
    pub fn accounting(&self) -> (usize, usize) {
        let p = &self.params;
        (2 * p.rho * p.c, p.qudits())
    }
}

/// Queries of one round.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub r: usize,
    /// `m beta x 2 t_eff`, uniform.
    pub z: Matrix,
    /// `E_(K)`, `m beta x 2c`.
    pub e: Matrix,
    /// `Q^(r)`, `m beta x 2 n_eff`.
    pub queries: Matrix,
}

/// Encoded files and the code that produced them.
#[derive(Debug, Clone)]
pub struct StorageSystem {
    pub code: GrsCode,
    pub m: usize,
    pub beta: usize,
    /// `m beta x 2k`.
    pub x: Matrix,
    /// `m beta x 2n`.
    pub y: Matrix,
}

/// `Y = X diag(G_C', G_C')`.
pub fn encode_storage(
    x: &Matrix,
    code: &GrsCode,
    beta: usize,
) -> Result<StorageSystem, ProtocolError> {
    if beta == 0 || !x.rows().is_multiple_of(beta) || x.cols() != 2 * code.dim() {
        return Err(ProtocolError::DimensionMismatch(format!(
            "X is {}x{}, expected (m*{beta})x{}",
            x.rows(),
            x.cols(),
            2 * code.dim()
        )));
    }
    if x.field() != code.field() {
        return Err(GaloisError::FieldMismatch.into());
    }
    let g = code.generator();
    let y = x.mul(&Matrix::block_diag(&g, &g))?;
    Ok(StorageSystem {
        code: code.clone(),
        m: x.rows() / beta,
        beta,
        x: x.clone(),
        y,
    })
}

impl StorageSystem {
    /// Builds `X` from `m` files of `2 beta k` symbols each.
    pub fn from_files(
        files: &[Vec<u32>],
        code: &GrsCode,
        beta: usize,
    ) -> Result<Self, ProtocolError> {
        let k = code.dim();
        let len = 2 * beta * k;
        let mut rows = Vec::with_capacity(files.len() * beta);
        for (i, file) in files.iter().enumerate() {
            if file.len() != len {
                return Err(ProtocolError::DimensionMismatch(format!(
                    "file {} has {} symbols, expected 2*beta*k = {len}",
                    i + 1,
                    file.len()
                )));
            }
            rows.extend(file.chunks(2 * k).map(<[u32]>::to_vec));
        }
        if rows.is_empty() {
            return Err(ProtocolError::DimensionMismatch("no files".into()));
        }
        let x = Matrix::from_rows(code.field(), &rows)?;
        encode_storage(&x, code, beta)
    }

    pub fn n(&self) -> usize {
        self.code.len()
    }

    /// File `i` (1-based) as `2 beta k` symbols.
    pub fn file(&self, i: usize) -> Vec<u32> {
        (0..self.beta)
            .flat_map(|b| self.x.row((i - 1) * self.beta + b).to_vec())
            .collect()
    }

    /// Columns `(1, s)` and `(2, s)` of `Y`, the data server `s` holds.
    pub fn server_view(&self, s: usize) -> (Vec<u32>, Vec<u32>) {
        (self.y.col(s - 1), self.y.col(self.n() + s - 1))
    }
}

/// Uniform random files.
pub fn random_files<R: rand::Rng + ?Sized>(
    field: &Field,
    m: usize,
    len: usize,
    rng: &mut R,
) -> Vec<Vec<u32>> {
    (0..m)
        .map(|_| (0..len).map(|_| field.random(rng)).collect())
        .collect()
}

/// `A_{p,s} = Y_{p,s} . Q_{p,s}` from server `s`'s own columns only. The
/// query matrix covers the participating servers, `2 * n_active` columns.
pub fn server_response(
    storage: &StorageSystem,
    s: usize,
    queries: &Matrix,
) -> Result<(u32, u32), ProtocolError> {
    let active = queries.cols() / 2;
    if s == 0 || s > active || active > storage.n() || queries.rows() != storage.y.rows() {
        return Err(ProtocolError::DimensionMismatch(format!(
            "server {s} with a {}x{} query matrix",
            queries.rows(),
            queries.cols()
        )));
    }
    let f = storage.code.field();
    let (y1, y2) = storage.server_view(s);
    let dot = |y: &[u32], col: usize| {
        y.iter()
            .enumerate()
            .fold(0, |acc, (row, &v)| f.add(acc, f.mul(v, queries.get(row, col))))
    };
    Ok((dot(&y1, s - 1), dot(&y2, active + s - 1)))
}

/// Measurement outcome: coset of `A` in the coordinates of `M^(r)`.
pub fn simulate_measurement(
    a: &[u32],
    decoder: &CosetDecoder,
) -> Result<Vec<u32>, ProtocolError> {
    Ok(decoder.decode(a)?)
}

/// Rational in wire form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSerial {
    pub numerator: u64,
    pub denominator: u64,
}

impl From<Ratio<u64>> for RateSerial {
    fn from(r: Ratio<u64>) -> Self {
        RateSerial {
            numerator: *r.numer(),
            denominator: *r.denom(),
        }
    }
}

impl RateSerial {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub r: usize,
    /// `J_r^b` for each block.
    pub j_sets: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub queries: Option<MatrixSerial>,
    pub responses: Vec<u32>,
    pub outcome: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptCodes {
    pub storage: CodeDescriptor,
    pub query: CodeDescriptor,
    pub star: CodeDescriptor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: SchemeParams,
    pub field: FieldSpec,
    pub codes: TranscriptCodes,
    pub target: usize,
    pub seed: u64,
    /// `(b, a)` attributed to each outcome entry, per round.
    pub outcome_layout: Vec<Vec<(usize, usize)>>,
    pub rounds: Vec<RoundRecord>,
    pub decoded: Vec<u32>,
    pub symbols_retrieved: usize,
    pub q_in: usize,
    pub q_out: usize,
    pub rate: RateSerial,
    /// Phase convention picked by the dense oracle, when it was used.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_phase_sign: Option<i8>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep every `Q^(r)` in the transcript.
    pub record_queries: bool,
}

/// Runs all rounds for file `target` with randomness seeded by `seed`.
pub fn run_protocol(
    scheme: &Scheme,
    storage: &StorageSystem,
    target: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<Transcript, ProtocolError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    run_rounds(scheme, storage, target, seed, opts, |r, a| scheme.measure(r, a), &mut rng)
}

/// Shared round loop; `measure` turns a response vector into an outcome.
pub(crate) fn run_rounds<F, R>(
    scheme: &Scheme,
    storage: &StorageSystem,
    target: usize,
    seed: u64,
    opts: &RunOptions,
    mut measure: F,
    rng: &mut R,
) -> Result<Transcript, ProtocolError>
where
    F: FnMut(usize, &[u32]) -> Result<Vec<u32>, ProtocolError>,
    R: rand::Rng,
{
    let p = &scheme.params;
    if storage.beta != p.beta || storage.code.dim() != p.k || storage.n() != p.n {
        return Err(ProtocolError::DimensionMismatch(
            "storage system does not match the scheme".into(),
        ));
    }
    if storage.m != p.m {
        return Err(ProtocolError::DimensionMismatch(format!(
            "storage holds {} files, parameters say m = {}",
            storage.m, p.m
        )));
    }
    let mut rounds = Vec::with_capacity(p.rho);
    let mut outcomes = Vec::with_capacity(p.rho);
    for r in 1..=p.rho {
        let state = scheme.build_queries(target, r, rng)?;
        let a = scheme.responses(storage, &state.queries)?;
        let o = measure(r, &a)?;
        rounds.push(RoundRecord {
            r,
            j_sets: scheme.schedules[r - 1].blocks.clone(),
            queries: opts.record_queries.then(|| state.queries.to_serial()),
            responses: a,
            outcome: o.clone(),
        });
        outcomes.push(o);
    }
    let decoded = scheme.retrieve(&outcomes)?;
    let (symbols, qudits) = scheme.accounting();
    let rate = measured_rate(symbols, qudits);
    debug_assert_eq!(rate, qpir_rate(p));
    Ok(Transcript {
        params: p.clone(),
        field: scheme.field.spec().clone(),
        codes: TranscriptCodes {
            storage: scheme.storage_code.descriptor(),
            query: scheme.code_d.descriptor(),
            star: scheme.code_s.descriptor(),
        },
        target,
        seed,
        outcome_layout: scheme.schedules.iter().map(|s| s.rows.clone()).collect(),
        rounds,
        decoded,
        symbols_retrieved: symbols,
        q_in: qudits,
        q_out: qudits,
        rate: rate.into(),
        oracle_phase_sign: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn example_params(m: usize) -> SchemeParams {
        derive_params(7, 6, 3, 2, m).unwrap()
    }

    #[test]
    fn derive_example_params() {
        let p = example_params(2);
        assert_eq!((p.c, p.beta, p.rho, p.g, p.j_max), (2, 2, 3, 1, 3));
        assert!(!p.normalized);
        assert_eq!(qpir_rate(&p), Ratio::new(2, 3));
    }

    #[test]
    fn derive_normalized_params() {
        let p = derive_params(8, 8, 2, 1, 1).unwrap();
        assert!(p.normalized);
        assert_eq!((p.t_eff, p.c, p.n_eff), (3, 4, 8));
        assert_eq!(qpir_rate(&p), Ratio::from_integer(1));
        let odd = derive_params(8, 7, 1, 1, 1).unwrap();
        assert_eq!((odd.n_eff, odd.t_eff, odd.c), (6, 3, 3));
        assert_eq!(qpir_rate(&odd), Ratio::from_integer(1));
        let p = derive_params(7, 6, 3, 1, 1).unwrap();
        assert!(!p.normalized);
        assert_eq!(qpir_rate(&p), Ratio::new(1, 1));
    }

    #[test]
    fn derive_rejects_invalid() {
        assert!(matches!(derive_params(7, 6, 3, 4, 1), Err(ProtocolError::InvalidParams(_))));
        assert!(matches!(derive_params(7, 8, 3, 2, 1), Err(ProtocolError::InvalidParams(_))));
        assert!(matches!(derive_params(7, 6, 3, 0, 1), Err(ProtocolError::InvalidParams(_))));
        assert!(matches!(derive_params(7, 6, 6, 1, 1), Err(ProtocolError::InvalidParams(_))));
        assert!(matches!(derive_params(7, 6, 3, 2, 0), Err(ProtocolError::InvalidParams(_))));
    }

    #[test]
    fn example_schedule() {
        let p = example_params(1);
        let f = Field::prime(7).unwrap();
        let s1 = schedule(&p, &f, 1).unwrap();
        assert_eq!(s1.blocks, vec![vec![1], vec![2]]);
        let mut n1 = Matrix::zeros(&f, 2, 6);
        n1.set(0, 0, 1);
        n1.set(1, 1, 1);
        assert_eq!(s1.n_sel, n1);
        assert_eq!(s1.m_sel, Matrix::block_diag(&n1, &n1));
        assert_eq!(schedule(&p, &f, 2).unwrap().blocks, vec![vec![2], vec![3]]);
        assert_eq!(schedule(&p, &f, 3).unwrap().blocks, vec![vec![3], vec![1]]);
        assert!(schedule(&p, &f, 4).is_err());
    }

    #[test]
    fn schedule_covers_k_positions_per_block() {
        for (q, n) in [(7u32, 6usize), (8, 8), (13, 12), (16, 16), (11, 9)] {
            let f = Field::of_order(q).unwrap();
            for k in 1..n {
                for t in 1..=n - k {
                    let p = derive_params(q, n, k, t, 1).unwrap();
                    let mut per_block = vec![std::collections::BTreeSet::new(); p.beta];
                    for r in 1..=p.rho {
                        let s = schedule(&p, &f, r).unwrap();
                        let mut in_round = std::collections::BTreeSet::new();
                        for (b, set) in s.blocks.iter().enumerate() {
                            assert_eq!(set.len(), p.g);
                            for &a in set {
                                assert!(a >= 1 && a <= p.j_max);
                                assert!(in_round.insert(a), "position reused within a round");
                                assert!(per_block[b].insert(a), "position reused within a block");
                            }
                        }
                        assert_eq!(in_round.len(), p.c);
                    }
                    assert!(per_block.iter().all(|s| s.len() == p.k));
                }
            }
        }
    }

    fn example_scheme(m: usize) -> Scheme {
        Scheme::new(&example_params(m)).unwrap()
    }

    #[test]
    fn example_storage_server_two() {
        let scheme = example_scheme(2);
        let f = &scheme.field;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let files = random_files(f, 2, 12, &mut rng);
        let st = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        for row in 0..4 {
            for p in 0..2 {
                let x = |kappa: usize| st.x.get(row, p * 3 + kappa);
                let expect = f.add(f.add(x(0), f.mul(3, x(1))), f.mul(2, x(2)));
                assert_eq!(st.y.get(row, p * 6 + 1), expect);
            }
        }
        let zero = StorageSystem::from_files(&[vec![0; 12]], &scheme.storage_code, 2).unwrap();
        assert!(zero.y.is_zero());
        // each row's first half is a codeword of C'
        let h = scheme.storage_code.parity_check();
        for row in 0..4 {
            let first: Vec<u32> = st.y.row(row)[..6].to_vec();
            assert!(h.mul(&Matrix::row_vector(f, &first).transpose()).unwrap().is_zero());
        }
        assert!(encode_storage(&Matrix::zeros(f, 3, 6), &scheme.storage_code, 2).is_err());
    }

    #[test]
    fn example_queries_server_two() {
        let scheme = example_scheme(2);
        let f = &scheme.field;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let target = 2;
        let st = scheme.build_queries(target, 1, &mut rng).unwrap();
        for i in 1..=2 {
            for b in 1..=2 {
                let row = (i - 1) * 2 + (b - 1);
                for p in 0..2 {
                    let z = |j: usize| st.z.get(row, p * 2 + j);
                    let delta = u32::from(i == target && b == 2);
                    let expect = f.add(f.add(z(0), f.mul(3, z(1))), delta);
                    assert_eq!(st.queries.get(row, p * 6 + 1), expect);
                }
            }
        }
        // pure selector when Z = 0, and Q - E M row-wise in span(G_D)
        let z0 = Matrix::zeros(f, 4, 4);
        let pure = scheme.assemble_queries(target, 1, z0).unwrap();
        let em = pure.e.mul(&scheme.schedules[0].m_sel).unwrap();
        assert_eq!(pure.queries, em);
        let diff = st.queries.sub(&em).unwrap();
        for row in 0..diff.rows() {
            assert!(scheme.g_d.in_row_space(diff.row(row)));
        }
    }

    #[test]
    fn responses_edge_cases() {
        let p = derive_params(7, 6, 3, 2, 1).unwrap();
        let scheme = Scheme::new(&p).unwrap();
        let f = &scheme.field;
        let zero = StorageSystem::from_files(&[vec![0; 12]], &scheme.storage_code, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let st = scheme.build_queries(1, 1, &mut rng).unwrap();
        for s in 1..=6 {
            assert_eq!(server_response(&zero, s, &st.queries).unwrap(), (0, 0));
        }
        assert!(server_response(&zero, 7, &st.queries).is_err());
        // unit query at server s picks out Y_{p,s}^{1,1}
        let files = random_files(f, 1, 12, &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        let mut q = Matrix::zeros(f, 2, 12);
        q.set(0, 3, 1);
        q.set(0, 9, 1);
        assert_eq!(
            server_response(&sys, 4, &q).unwrap(),
            (sys.y.get(0, 3), sys.y.get(0, 9))
        );
    }

    #[test]
    fn responses_match_star_expansion() {
        let scheme = example_scheme(3);
        let f = &scheme.field;
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let files = random_files(f, 3, 12, &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        let st = scheme.build_queries(2, 2, &mut rng).unwrap();
        let a = scheme.responses(&sys, &st.queries).unwrap();
        // sum over rows of Y^{i,b} * Q^{i,b} coordinatewise
        let mut expect = vec![0u32; 12];
        for row in 0..sys.y.rows() {
            for (col, e) in expect.iter_mut().enumerate() {
                *e = f.add(*e, f.mul(sys.y.get(row, col), st.queries.get(row, col)));
            }
        }
        assert_eq!(a, expect);
    }

    #[test]
    fn measurement_example_round_one() {
        let scheme = example_scheme(2);
        let f = &scheme.field;
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let files = random_files(f, 2, 12, &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        let target = 2;
        let y = |p: usize, a: usize, b: usize| sys.y.get((target - 1) * 2 + b - 1, (p - 1) * 6 + a - 1);
        let expected = vec![y(1, 1, 1), y(1, 2, 2), y(2, 1, 1), y(2, 2, 2)];
        for seed in 0..100 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let st = scheme.build_queries(target, 1, &mut rng).unwrap();
            let a = scheme.responses(&sys, &st.queries).unwrap();
            let o = simulate_measurement(&a, &scheme.decoders[0]).unwrap();
            assert_eq!(o, expected);
        }
        let zero = vec![0u32; 12];
        assert_eq!(scheme.measure(1, &zero).unwrap(), vec![0; 4]);
    }

    #[test]
    fn run_example_end_to_end() {
        let scheme = example_scheme(3);
        let f = &scheme.field;
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let files = random_files(f, 3, 12, &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        for target in 1..=3 {
            let tr = run_protocol(&scheme, &sys, target, 77, &RunOptions::default()).unwrap();
            assert_eq!(tr.decoded, files[target - 1]);
            assert_eq!(tr.rounds.len(), 3);
            assert_eq!((tr.q_in, tr.q_out, tr.symbols_retrieved), (18, 18, 12));
            assert_eq!(tr.rate.ratio(), Ratio::new(2, 3));
        }
    }

    #[test]
    fn run_single_file_and_zero_file() {
        let p = derive_params(8, 6, 2, 2, 1).unwrap();
        let scheme = Scheme::new(&p).unwrap();
        let zero = StorageSystem::from_files(&[vec![0; p.file_len()]], &scheme.storage_code, p.beta)
            .unwrap();
        let tr = run_protocol(&scheme, &zero, 1, 3, &RunOptions::default()).unwrap();
        assert!(tr.decoded.iter().all(|&x| x == 0));
        assert_eq!(qpir_rate(&p), Ratio::from_integer(1));
    }

    #[test]
    fn retrieve_needs_all_rounds() {
        let scheme = example_scheme(1);
        assert_eq!(
            scheme.retrieve(&[vec![0; 4]]),
            Err(ProtocolError::IncompleteRounds { expected: 3, got: 1 })
        );
    }

    #[test]
    fn k_equals_n_minus_t_large_rounds() {
        // k = 4, c = 2 over GF(8): one block, two rounds
        let p = derive_params(8, 8, 4, 3, 2).unwrap();
        assert_eq!((p.c, p.beta, p.rho), (2, 1, 2));
        let scheme = Scheme::new(&p).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let files = random_files(&scheme.field, 2, p.file_len(), &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, p.beta).unwrap();
        let tr = run_protocol(&scheme, &sys, 2, rng.gen(), &RunOptions::default()).unwrap();
        assert_eq!(tr.decoded, files[1]);
    }

    #[test]
    fn normalized_odd_n_uses_one_fewer_server() {
        let p = derive_params(8, 7, 1, 1, 2).unwrap();
        let scheme = Scheme::new(&p).unwrap();
        assert_eq!(scheme.storage_code.len(), 7);
        assert_eq!(scheme.code_c.len(), 6);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let files = random_files(&scheme.field, 2, p.file_len(), &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, p.beta).unwrap();
        let tr = run_protocol(&scheme, &sys, 1, 5, &RunOptions::default()).unwrap();
        assert_eq!(tr.decoded, files[0]);
        assert_eq!(tr.q_in, p.rho * 6);
    }

    #[test]
    fn transcript_is_deterministic() {
        let scheme = example_scheme(2);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let files = random_files(&scheme.field, 2, 12, &mut rng);
        let sys = StorageSystem::from_files(&files, &scheme.storage_code, 2).unwrap();
        let opts = RunOptions { record_queries: true };
        let a = serde_json::to_string(&run_protocol(&scheme, &sys, 1, 42, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&run_protocol(&scheme, &sys, 1, 42, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
        let back: Transcript = serde_json::from_str(&a).unwrap();
        assert_eq!(back.rate, RateSerial { numerator: 2, denominator: 3 });
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<u32>> = combinations(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 3).count(), 1);
    }
}
