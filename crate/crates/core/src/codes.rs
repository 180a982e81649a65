//! Generalized Reed-Solomon codes and the star-product machinery behind the
//! retrieval scheme.
//!
//! A GRS code is described by `n` distinct locators `a_j`, `n` nonzero column
//! multipliers `v_j` and a dimension `k`; its generator has entry
//! `v_j * a_j^i` in row `i` (zero-based) and column `j`.
//!
//! Write `L_j = prod_{i != j} (a_j - a_i)`. The dual of `GRS_k(a, v)` is
//! `GRS_{n-k}(a, u)` with `u_j = 1 / (v_j L_j)`, so `GRS_k(a, v)` contains its
//! dual exactly when `1 / (v_j^2 L_j) = f(a_j)` for a polynomial `f` of degree
//! at most `2k - n`. The constructions below all reduce to choosing such an
//! `f` and taking square roots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{Field, FieldSpec, GaloisError};
use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("codes use different locators or fields")]
    LocatorMismatch,
    #[error("star product dimension {0} exceeds length {1}")]
    DimensionOverflow(usize, usize),
    #[error("construction requires characteristic 2, field has characteristic {0}")]
    OddCharacteristic(u32),
    #[error("self-dual construction requires even length, got {0}")]
    OddLength(usize),
    #[error("dimension {0} is below half the length {1}")]
    DimensionTooSmall(usize, usize),
    #[error("no weakly self-dual multipliers found within the search budget")]
    NotFound,
    #[error("parameter constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("code is not weakly self-dual")]
    NotWeaklySelfDual,
    #[error("the dual of a full-length code is the zero code")]
    FullLength,
    #[error(transparent)]
    Field(#[from] GaloisError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrsCode {
    field: Field,
    locators: Vec<u32>,
    multipliers: Vec<u32>,
    dim: usize,
}

/// Serialized code descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub field: FieldSpec,
    pub locators: Vec<u32>,
    pub multipliers: Vec<u32>,
    pub dim: usize,
}

/// Powers of the primitive element, `1, g, g^2, ...`, with `0` appended when
/// all `q` elements are needed.
pub fn default_locators(field: &Field, n: usize) -> Result<Vec<u32>, CodeError> {
    let q = field.order() as usize;
    if n == 0 || n > q {
        return Err(CodeError::InvalidCode(format!("length {n} for q = {q}")));
    }
    let g = field.primitive();
    let mut locs: Vec<u32> = (0..n.min(q - 1) as u64).map(|i| field.pow(g, i)).collect();
    if n == q {
        locs.push(0);
    }
    Ok(locs)
}

impl GrsCode {
    pub fn new(
        field: &Field,
        locators: Vec<u32>,
        multipliers: Vec<u32>,
        dim: usize,
    ) -> Result<Self, CodeError> {
        let n = locators.len();
        if multipliers.len() != n {
            return Err(CodeError::InvalidCode(format!(
                "{} locators but {} multipliers",
                n,
                multipliers.len()
            )));
        }
        if dim == 0 || dim > n || n > field.order() as usize {
            return Err(CodeError::InvalidCode(format!(
                "need 1 <= k <= n <= q, got k = {dim}, n = {n}, q = {}",
                field.order()
            )));
        }
        if let Some(&x) = locators
            .iter()
            .chain(&multipliers)
            .find(|&&x| !field.contains(x))
        {
            return Err(GaloisError::OutOfRange(x as u64, field.order()).into());
        }
        let mut sorted = locators.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CodeError::InvalidCode("locators are not distinct".into()));
        }
        if multipliers.contains(&0) {
            return Err(CodeError::InvalidCode("zero column multiplier".into()));
        }
        Ok(GrsCode {
            field: field.clone(),
            locators,
            multipliers,
            dim,
        })
    }

    /// Primitive Reed-Solomon code: default locators, unit multipliers.
    pub fn prs(field: &Field, n: usize, dim: usize) -> Result<Self, CodeError> {
        let locs = default_locators(field, n)?;
        Self::new(field, locs, vec![1; n], dim)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn locators(&self) -> &[u32] {
        &self.locators
    }

    pub fn multipliers(&self) -> &[u32] {
        &self.multipliers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.locators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locators.is_empty()
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self, CodeError> {
        Self::new(&self.field, self.locators.clone(), self.multipliers.clone(), dim)
    }

    /// `k x n` generator, entry `(i, j) = v_j * a_j^i`.
    pub fn generator(&self) -> Matrix {
        let f = &self.field;
        let n = self.len();
        let mut g = Matrix::zeros(f, self.dim, n);
        for j in 0..n {
            let mut x = self.multipliers[j];
            for i in 0..self.dim {
                g.set(i, j, x);
                x = f.mul(x, self.locators[j]);
            }
        }
        g
    }

    /// Restriction to the first `len` coordinates.
    pub fn puncture(&self, len: usize) -> Result<Self, CodeError> {
        Self::new(
            &self.field,
            self.locators[..len].to_vec(),
            self.multipliers[..len].to_vec(),
            self.dim,
        )
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            field: self.field.spec().clone(),
            locators: self.locators.clone(),
            multipliers: self.multipliers.clone(),
            dim: self.dim,
        }
    }

    pub fn from_descriptor(d: &CodeDescriptor) -> Result<Self, CodeError> {
        let field = Field::from_spec(&d.field)?;
        Self::new(&field, d.locators.clone(), d.multipliers.clone(), d.dim)
    }

    /// Closed-form GRS dual.
    pub fn dual(&self) -> Result<Self, CodeError> {
        if self.dim == self.len() {
            return Err(CodeError::FullLength);
        }
        let f = &self.field;
        let l = locator_products(f, &self.locators);
        let u = self
            .multipliers
            .iter()
            .zip(&l)
            .map(|(&v, &lj)| f.inv(f.mul(v, lj)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(f, self.locators.clone(), u, self.len() - self.dim)
    }

    /// Parity-check matrix: the dual's generator, or an empty basis for a
    /// full-length code.
    pub fn parity_check(&self) -> Matrix {
        match self.dual() {
            Ok(d) => d.generator(),
            Err(_) => Matrix::empty(&self.field, self.len()),
        }
    }

    /// `C^perp ⊆ C`, checked through the kernel of the generator.
    pub fn is_weakly_self_dual(&self) -> bool {
        let g = self.generator();
        let k = g.kernel();
        k.rows() == 0 || g.contains_row_space(&k)
    }

    pub fn is_self_dual(&self) -> bool {
        let g = self.generator();
        2 * self.dim == self.len() && g.same_row_space(&g.kernel())
    }

    /// Star (Schur) product as a GRS code: same locators, multipliers
    /// multiplied coordinatewise, dimension `k + t - 1`.
    pub fn star(&self, other: &GrsCode) -> Result<Self, CodeError> {
        if self.field != other.field || self.locators != other.locators {
            return Err(CodeError::LocatorMismatch);
        }
        let dim = self.dim + other.dim - 1;
        if dim > self.len() {
            return Err(CodeError::DimensionOverflow(dim, self.len()));
        }
        let f = &self.field;
        let v = self
            .multipliers
            .iter()
            .zip(&other.multipliers)
            .map(|(&a, &b)| f.mul(a, b))
            .collect();
        Self::new(f, self.locators.clone(), v, dim)
    }
}

/// `L_j = prod_{i != j} (a_j - a_i)`.
pub fn locator_products(field: &Field, locators: &[u32]) -> Vec<u32> {
    locators
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            locators
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .fold(1, |acc, (_, &ai)| field.mul(acc, field.sub(aj, ai)))
        })
        .collect()
}

/// Multipliers `v_j = sqrt(1 / (L_j f(a_j)))` for the polynomial `f` with
/// coefficients `poly` (low to high), or `None` if some `f(a_j)` vanishes or
/// some `L_j f(a_j)` is a non-square.
fn multipliers_for(field: &Field, locators: &[u32], l: &[u32], poly: &[u32]) -> Option<Vec<u32>> {
    locators
        .iter()
        .zip(l)
        .map(|(&a, &lj)| {
            let fa = poly.iter().rev().fold(0, |acc, &c| field.add(field.mul(acc, a), c));
            let denom = field.mul(lj, fa);
            if denom == 0 {
                return None;
            }
            field.sqrt(field.inv(denom).ok()?)
        })
        .collect()
}

/// Self-dual `[2k, k]` GRS code on the given locators, characteristic 2.
pub fn self_dual_multipliers_char2(field: &Field, locators: &[u32]) -> Result<GrsCode, CodeError> {
    if !field.is_char2() {
        return Err(CodeError::OddCharacteristic(field.p()));
    }
    let n = locators.len();
    if !n.is_multiple_of(2) {
        return Err(CodeError::OddLength(n));
    }
    weakly_self_dual_grs(field, locators, n / 2)
}

/// Weakly self-dual `[n, k]` GRS code, characteristic 2, `2k >= n`.
///
/// Uses the self-dual multipliers `v_j = sqrt(1 / L_j)` and raises the
/// dimension: the `[n, ceil(n/2)]` code with these multipliers contains its
/// dual, and so does every supercode with the same multipliers.
pub fn weakly_self_dual_grs(field: &Field, locators: &[u32], k: usize) -> Result<GrsCode, CodeError> {
    if !field.is_char2() {
        return Err(CodeError::OddCharacteristic(field.p()));
    }
    let n = locators.len();
    if 2 * k < n {
        return Err(CodeError::DimensionTooSmall(k, n));
    }
    let l = locator_products(field, locators);
    let v = multipliers_for(field, locators, &l, &[1]).ok_or_else(|| {
        CodeError::InvalidCode("locators are not distinct".into())
    })?;
    GrsCode::new(field, locators.to_vec(), v, k)
}

/// Budget for [`find_wsd_multipliers_search`].
#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Maximum number of nonzero coefficients in the structured phase.
    pub max_support: usize,
    /// Enumerate every polynomial when `q^(2k-n+1)` is at most this.
    pub exhaustive_limit: u64,
    /// Random polynomials tried when the exhaustive phase does not apply.
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_support: 3,
            exhaustive_limit: 100_000,
            random_trials: 10_000,
            seed: 0,
        }
    }
}

/// Polynomials of degree exactly `deg` with at most `max_support` nonzero
/// coefficients, leading coefficient from `leads`, in a fixed order.
fn sparse_polys(field: &Field, deg: usize, leads: &[u32], max_support: usize) -> Vec<Vec<u32>> {
    let q = field.order();
    let mut out = Vec::new();
    let mut supports: Vec<Vec<usize>> = vec![vec![]];
    for extra in 1..max_support.min(deg + 1) {
        let mut next = Vec::new();
        for s in supports.iter().filter(|s| s.len() == extra - 1) {
            let start = s.last().map_or(0, |&x| x + 1);
            for pos in start..deg {
                let mut t = s.clone();
                t.push(pos);
                next.push(t);
            }
        }
        supports.extend(next);
    }
    for &lead in leads {
        for support in &supports {
            let combos = ((q - 1) as u64).pow(support.len() as u32);
            for mut idx in 0..combos {
                let mut poly = vec![0u32; deg + 1];
                poly[deg] = lead;
                for &pos in support {
                    poly[pos] = (idx % (q as u64 - 1)) as u32 + 1;
                    idx /= q as u64 - 1;
                }
                out.push(poly);
            }
        }
    }
    out
}

/// Searches multipliers making `GRS_k(locators, v)` weakly self-dual, over
/// any field. Candidates `f` have degree at most `2k - n`; scaling `f` by a
/// square does not change the code, so leading coefficients range over `1`
/// and one non-square.
pub fn find_wsd_multipliers_search(
    field: &Field,
    locators: &[u32],
    k: usize,
    budget: &SearchBudget,
) -> Result<GrsCode, CodeError> {
    let n = locators.len();
    if 2 * k < n {
        return Err(CodeError::DimensionTooSmall(k, n));
    }
    if k == n {
        return GrsCode::new(field, locators.to_vec(), vec![1; n], k);
    }
    let max_deg = 2 * k - n;
    let l = locator_products(field, locators);
    let mut leads = vec![1];
    leads.extend(field.non_square());

    let accept = |poly: &[u32]| -> Option<GrsCode> {
        let v = multipliers_for(field, locators, &l, poly)?;
        let code = GrsCode::new(field, locators.to_vec(), v, k).ok()?;
        code.is_weakly_self_dual().then_some(code)
    };

    for deg in 0..=max_deg {
        for poly in sparse_polys(field, deg, &leads, budget.max_support) {
            if let Some(code) = accept(&poly) {
                return Ok(code);
            }
        }
    }

    let q = field.order() as u64;
    let space = q.checked_pow(max_deg as u32 + 1).unwrap_or(u64::MAX);
    if space <= budget.exhaustive_limit {
        for idx in 1..space {
            let mut rest = idx;
            let poly: Vec<u32> = (0..=max_deg)
                .map(|_| {
                    let c = (rest % q) as u32;
                    rest /= q;
                    c
                })
                .collect();
            if let Some(code) = accept(&poly) {
                return Ok(code);
            }
        }
        return Err(CodeError::NotFound);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.random_trials {
        let poly: Vec<u32> = (0..=max_deg).map(|_| rng.gen_range(0..q as u32)).collect();
        if let Some(code) = accept(&poly) {
            return Ok(code);
        }
    }
    Err(CodeError::NotFound)
}

/// Weakly self-dual `[n, k]` GRS code on the given locators: the constructive
/// path in characteristic 2, the bounded search otherwise.
pub fn weakly_self_dual_on(
    field: &Field,
    locators: &[u32],
    k: usize,
    budget: &SearchBudget,
) -> Result<GrsCode, CodeError> {
    if field.is_char2() {
        weakly_self_dual_grs(field, locators, k)
    } else {
        find_wsd_multipliers_search(field, locators, k, budget)
    }
}

/// The `[n, t]` query code `D'` whose star product with `C'` is weakly
/// self-dual, together with that star product `S'`.
pub fn retrieval_codes(
    cp: &GrsCode,
    t: usize,
    budget: &SearchBudget,
) -> Result<(GrsCode, GrsCode), CodeError> {
    let n = cp.len();
    let ks = cp.dim() + t - 1;
    if t == 0 || 2 * ks < n || ks >= n {
        return Err(CodeError::ConstraintViolated(format!(
            "need n/2 <= k+t-1 < n, got n = {n}, k+t-1 = {ks}"
        )));
    }
    let f = cp.field();
    let sp = weakly_self_dual_on(f, cp.locators(), ks, budget)?;
    // a common scale keeps the code and its weak self-duality; fixing the
    // first multiplier to 1 makes the query generator canonical
    let lead = f.inv(sp.multipliers()[0])?;
    let vd = sp
        .multipliers()
        .iter()
        .map(|&s| f.mul(s, lead))
        .zip(cp.multipliers())
        .map(|(s, &c)| f.div(s, c))
        .collect::<Result<Vec<_>, _>>()?;
    let dp = GrsCode::new(f, cp.locators().to_vec(), vd, t)?;
    let star = cp.star(&dp)?;
    debug_assert!(star.generator().same_row_space(&sp.generator()));
    Ok((dp, star))
}

pub fn retrieval_code(cp: &GrsCode, t: usize, budget: &SearchBudget) -> Result<GrsCode, CodeError> {
    retrieval_codes(cp, t, budget).map(|(d, _)| d)
}

/// `C' x C'` with generator `diag(G, G)`.
#[derive(Debug, Clone)]
pub struct CartesianPairCode {
    pub base: GrsCode,
    pub generator: Matrix,
}

impl CartesianPairCode {
    pub fn new(base: GrsCode) -> Self {
        let g = base.generator();
        CartesianPairCode {
            generator: Matrix::block_diag(&g, &g),
            base,
        }
    }
}

/// Parity-check/completion split of a weakly self-dual `S'` and the
/// structured generator of `S' x S'`.
#[derive(Debug, Clone)]
pub struct StarGeneratorBundle {
    /// Parity-check of `S'`, `(n - k_s) x n`.
    pub h: Matrix,
    /// Rows completing `h` to a basis of `S'`, `(2 k_s - n) x n`.
    pub f: Matrix,
    /// `[diag(H, H); diag(F, F)]`, `2 k_s x 2n`.
    pub g_s: Matrix,
    /// First `2(n - k_s)` rows of `g_s`.
    pub h_s: Matrix,
}

pub fn split_wsd_generator(sp: &GrsCode) -> Result<StarGeneratorBundle, CodeError> {
    if !sp.is_weakly_self_dual() {
        return Err(CodeError::NotWeaklySelfDual);
    }
    let g = sp.generator();
    let h = sp.parity_check();
    let mut basis = h.clone();
    let mut rank = basis.rank();
    let mut chosen = Vec::new();
    for r in 0..g.rows() {
        if rank == sp.dim() {
            break;
        }
        let trial = basis.vstack(&g.select_rows(&[r]))?;
        let tr = trial.rank();
        if tr > rank {
            basis = trial;
            rank = tr;
            chosen.push(r);
        }
    }
    let f = g.select_rows(&chosen);
    let h_s = Matrix::block_diag(&h, &h);
    let g_s = h_s.vstack(&Matrix::block_diag(&f, &f))?;
    Ok(StarGeneratorBundle { h, f, g_s, h_s })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u32) -> Field {
        Field::of_order(q).unwrap()
    }

    fn example_cp() -> GrsCode {
        GrsCode::prs(&gf(7), 6, 3).unwrap()
    }

    fn rows(f: &Field, r: &[&[u32]]) -> Matrix {
        Matrix::from_rows(f, &r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn example_generator_matches_printed() {
        let f = gf(7);
        let g = example_cp().generator();
        let printed = rows(
            &f,
            &[&[1, 1, 1, 1, 1, 1], &[1, 3, 2, 6, 4, 5], &[1, 2, 4, 1, 2, 4]],
        );
        assert_eq!(g, printed);
        assert_eq!(example_cp().locators(), &[1, 3, 2, 6, 4, 5]);
    }

    #[test]
    fn generator_edge_cases() {
        let f = gf(7);
        let c = GrsCode::prs(&f, 6, 1).unwrap();
        assert_eq!(c.generator(), Matrix::row_vector(&f, &[1; 6]));
        let full = GrsCode::prs(&f, 6, 6).unwrap();
        assert_eq!(full.generator().rank(), 6);
        assert!(full.is_weakly_self_dual());
        assert_eq!(full.dual(), Err(CodeError::FullLength));
    }

    #[test]
    fn invalid_codes_rejected() {
        let f = gf(7);
        assert!(GrsCode::new(&f, vec![1, 1, 2], vec![1, 1, 1], 2).is_err());
        assert!(GrsCode::new(&f, vec![1, 2, 3], vec![1, 0, 1], 2).is_err());
        assert!(GrsCode::new(&f, vec![1, 2, 3], vec![1, 1, 1], 0).is_err());
        assert!(GrsCode::new(&f, vec![1, 2, 3], vec![1, 1, 1], 4).is_err());
        assert!(default_locators(&f, 8).is_err());
        assert_eq!(default_locators(&f, 7).unwrap(), vec![1, 3, 2, 6, 4, 5, 0]);
    }

    #[test]
    fn dual_matches_kernel() {
        for q in [5, 7, 8, 9, 16] {
            let f = gf(q);
            for n in 2..=(q as usize).min(8) {
                for k in 1..n {
                    let c = GrsCode::prs(&f, n, k).unwrap();
                    let d = c.dual().unwrap();
                    assert!(d.generator().same_row_space(&c.generator().kernel()));
                    assert!(d.dual().unwrap().generator().same_row_space(&c.generator()));
                }
            }
        }
    }

    #[test]
    fn repetition_dual_is_sum_zero_code() {
        let f = gf(7);
        let c = GrsCode::prs(&f, 6, 1).unwrap();
        let d = c.dual().unwrap();
        assert_eq!(d.dim(), 5);
        let k = Matrix::row_vector(&f, &[1; 6]).kernel();
        assert!(d.generator().same_row_space(&k));
        // 6 = -1 in GF(7), so the all-ones word has nonzero sum and is excluded
        assert!(!d.generator().in_row_space(&[1; 6]));
    }

    #[test]
    fn star_examples() {
        let f = gf(7);
        let cp = example_cp();
        let dp = GrsCode::prs(&f, 6, 2).unwrap();
        let s = cp.star(&dp).unwrap();
        assert_eq!(s.dim(), 4);
        let ones = GrsCode::prs(&f, 6, 1).unwrap();
        assert!(cp.star(&ones).unwrap().generator().same_row_space(&cp.generator()));
        let other = GrsCode::new(&f, vec![1, 2, 3, 4, 5, 6], vec![1; 6], 2).unwrap();
        assert_eq!(cp.star(&other), Err(CodeError::LocatorMismatch));
        let big = GrsCode::prs(&f, 6, 5).unwrap();
        assert_eq!(cp.star(&big), Err(CodeError::DimensionOverflow(7, 6)));
    }

    #[test]
    fn self_dual_char2() {
        let f8 = gf(8);
        let locs: Vec<u32> = vec![1, 2, 3, 4];
        let c = self_dual_multipliers_char2(&f8, &locs).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.is_self_dual());
        let f16 = gf(16);
        let locs = default_locators(&f16, 8).unwrap();
        assert!(self_dual_multipliers_char2(&f16, &locs).unwrap().is_self_dual());
        assert_eq!(
            self_dual_multipliers_char2(&gf(7), &[1, 2]),
            Err(CodeError::OddCharacteristic(7))
        );
        assert_eq!(
            self_dual_multipliers_char2(&f8, &[1, 2, 3]),
            Err(CodeError::OddLength(3))
        );
    }

    #[test]
    fn weakly_self_dual_char2() {
        let f8 = gf(8);
        let locs = default_locators(&f8, 6).unwrap();
        let c = weakly_self_dual_grs(&f8, &locs, 4).unwrap();
        assert!(c.is_weakly_self_dual());
        assert!(!c.is_self_dual());
        assert!(weakly_self_dual_grs(&f8, &locs, 6).unwrap().is_weakly_self_dual());
        assert!(weakly_self_dual_grs(&f8, &locs, 3).unwrap().is_self_dual());
        assert_eq!(
            weakly_self_dual_grs(&f8, &locs, 2),
            Err(CodeError::DimensionTooSmall(2, 6))
        );
        // odd length works with the same multipliers
        let locs7 = default_locators(&f8, 7).unwrap();
        assert!(weakly_self_dual_grs(&f8, &locs7, 4).unwrap().is_weakly_self_dual());
    }

    #[test]
    fn search_finds_example_star_code() {
        let f = gf(7);
        let locs = default_locators(&f, 6).unwrap();
        let sp = find_wsd_multipliers_search(&f, &locs, 4, &SearchBudget::default()).unwrap();
        assert!(sp.is_weakly_self_dual());
        let printed = rows(
            &f,
            &[
                &[1, 3, 2, 6, 4, 5],
                &[1, 2, 4, 1, 2, 4],
                &[1, 1, 1, 1, 1, 1],
                &[1, 6, 1, 6, 1, 6],
            ],
        );
        assert!(printed.same_row_space(&sp.generator()));
        assert!(GrsCode::new(&f, locs.clone(), vec![1; 6], 4)
            .unwrap()
            .is_weakly_self_dual());
        assert_eq!(
            find_wsd_multipliers_search(&f, &locs, 2, &SearchBudget::default()),
            Err(CodeError::DimensionTooSmall(2, 6))
        );
    }

    #[test]
    fn search_agrees_with_construction_in_char2() {
        let f = gf(16);
        for n in 2..=10 {
            let locs = default_locators(&f, n).unwrap();
            for k in n.div_ceil(2)..=n {
                let a = weakly_self_dual_grs(&f, &locs, k).unwrap();
                let b = find_wsd_multipliers_search(&f, &locs, k, &SearchBudget::default()).unwrap();
                assert!(a.is_weakly_self_dual() && b.is_weakly_self_dual());
                assert!(a.generator().same_row_space(&b.generator()));
            }
        }
    }

    #[test]
    fn self_dual_length_two_over_gf7_does_not_exist() {
        // L_1 = -L_2 and -1 is a non-square mod 7
        let f = gf(7);
        assert_eq!(
            find_wsd_multipliers_search(&f, &[1, 3], 1, &SearchBudget::default()),
            Err(CodeError::NotFound)
        );
    }

    #[test]
    fn retrieval_code_example() {
        let f = gf(7);
        let cp = example_cp();
        let (dp, sp) = retrieval_codes(&cp, 2, &SearchBudget::default()).unwrap();
        assert_eq!(dp.dim(), 2);
        let printed = rows(&f, &[&[1, 1, 1, 1, 1, 1], &[1, 3, 2, 6, 4, 5]]);
        assert!(printed.same_row_space(&dp.generator()));
        assert!(sp.is_weakly_self_dual());
        assert!(cp.star(&dp).unwrap().is_weakly_self_dual());
    }

    #[test]
    fn retrieval_code_char2_self_dual() {
        let f = gf(8);
        let cp = GrsCode::prs(&f, 6, 2).unwrap();
        let (dp, sp) = retrieval_codes(&cp, 2, &SearchBudget::default()).unwrap();
        assert_eq!(dp.dim(), 2);
        assert_eq!(sp.dim(), 3);
        assert!(sp.is_self_dual());
        assert!(matches!(
            retrieval_code(&cp, 5, &SearchBudget::default()),
            Err(CodeError::ConstraintViolated(_))
        ));
        assert!(matches!(
            retrieval_code(&cp, 1, &SearchBudget::default()),
            Err(CodeError::ConstraintViolated(_))
        ));
    }

    #[test]
    fn split_example() {
        let f = gf(7);
        let sp = GrsCode::prs(&f, 6, 4).unwrap();
        let b = split_wsd_generator(&sp).unwrap();
        let h_printed = rows(&f, &[&[1, 3, 2, 6, 4, 5], &[1, 2, 4, 1, 2, 4]]);
        let f_printed = rows(&f, &[&[1, 1, 1, 1, 1, 1], &[1, 6, 1, 6, 1, 6]]);
        assert!(b.h.same_row_space(&h_printed));
        assert_eq!(b.f, f_printed);
        assert_eq!(b.g_s.rows(), 8);
        assert_eq!(b.g_s.rank(), 8);
        assert_eq!(b.h_s.rows(), 4);
        assert!(b.h.mul(&sp.generator().transpose()).unwrap().is_zero());
        let not_wsd = GrsCode::prs(&f, 6, 3).unwrap();
        assert!(!not_wsd.is_weakly_self_dual());
        assert_eq!(
            split_wsd_generator(&not_wsd).unwrap_err(),
            CodeError::NotWeaklySelfDual
        );
    }

    #[test]
    fn descriptor_roundtrip() {
        let c = example_cp();
        let json = serde_json::to_string(&c.descriptor()).unwrap();
        let back: CodeDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(GrsCode::from_descriptor(&back).unwrap(), c);
    }
}
