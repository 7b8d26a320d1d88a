//! Koszul complex of a commuting operator tuple.
//!
//! For a tuple `X = (X_1, ..., X_k)` of commuting operators on `V` and a
//! co-form `lambda`, the Koszul differential acts on `V (x) Lambda^j R^k` by
//!
//! ```text
//! d_{X+lambda}(u (x) e_I) = sum_k (X_k + lambda_k) u (x) e_k ^ e_I
//! ```
//!
//! and the divergence of a second tuple `Y` lowers the grade,
//!
//! ```text
//! delta_Y(u (x) e_{i_1} ^ ... ^ e_{i_j}) =
//!     sum_m (-1)^m (Y_{i_m} u) (x) e_{i_1} ^ ... ^ {e_{i_m} omitted} ^ ... ^ e_{i_j}.
//! ```
//!
//! Vectors in `V (x) Lambda^j` are stored as a concatenation over the exterior
//! basis (lexicographic within each grade) of coordinate blocks in `V`.

use std::collections::HashMap;

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Hard ceiling on the rank; `2^16` exterior basis elements is already absurd.
pub const MAX_KAPPA: usize = 16;

/// A strictly increasing subset of `{1, ..., kappa}` indexing a wedge monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExteriorIndex {
    members: Vec<u8>,
}

impl ExteriorIndex {
    pub fn new(members: Vec<u8>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self { members }
    }

    pub fn members(&self) -> &[u8] {
        &self.members
    }

    /// The grade `j`, i.e. the number of wedge factors.
    pub fn grade(&self) -> usize {
        self.members.len()
    }

    /// Wedge with `e_k` from the left: returns the resulting index and the
    /// sign `(-1)^{#{i in I : i < k}}`, or `None` when `k` already occurs.
    pub fn wedge(&self, k: u8) -> Option<(ExteriorIndex, f64)> {
        match self.members.binary_search(&k) {
            Ok(_) => None,
            Err(pos) => {
                let mut m = self.members.clone();
                m.insert(pos, k);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                Some((ExteriorIndex::new(m), sign))
            }
        }
    }

    /// Contraction with `e_k`: removes `k` with the anti-derivation sign
    /// `(-1)^{m-1}` for `k` in the `m`-th slot; `None` when `k` is absent.
    pub fn contract(&self, k: u8) -> Option<(ExteriorIndex, f64)> {
        match self.members.binary_search(&k) {
            Err(_) => None,
            Ok(pos) => {
                let mut m = self.members.clone();
                m.remove(pos);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                Some((ExteriorIndex::new(m), sign))
            }
        }
    }
}

/// Ordered basis of the full exterior algebra `Lambda R^kappa`, grouped by
/// grade, with positional lookup.
#[derive(Debug, Clone)]
pub struct ExteriorBasis {
    pub kappa: usize,
    by_grade: Vec<Vec<ExteriorIndex>>,
    position: HashMap<Vec<u8>, usize>,
}

impl ExteriorBasis {
    pub fn grade(&self, j: usize) -> &[ExteriorIndex] {
        &self.by_grade[j]
    }

    pub fn grade_size(&self, j: usize) -> usize {
        if j > self.kappa {
            0
        } else {
            self.by_grade[j].len()
        }
    }

    /// Position of an index within its grade.
    pub fn position(&self, idx: &ExteriorIndex) -> usize {
        self.position[idx.members()]
    }
}

/// Enumerate the exterior basis in lexicographic order within each grade.
pub fn exterior_basis(kappa: usize) -> Result<ExteriorBasis> {
    if kappa == 0 || kappa > MAX_KAPPA {
        return Err(Error::InvalidRank(kappa));
    }
    let mut by_grade: Vec<Vec<ExteriorIndex>> = vec![Vec::new(); kappa + 1];
    // Lexicographic enumeration per grade via the classic combination walk.
    for j in 0..=kappa {
        let mut comb: Vec<u8> = (1..=j as u8).collect();
        loop {
            by_grade[j].push(ExteriorIndex::new(comb.clone()));
            if j == 0 {
                break;
            }
            // advance to the next combination
            let mut i = j;
            loop {
                if i == 0 {
                    break;
                }
                if comb[i - 1] < (kappa - (j - i)) as u8 {
                    comb[i - 1] += 1;
                    for t in i..j {
                        comb[t] = comb[t - 1] + 1;
                    }
                    break;
                }
                i -= 1;
            }
            if i == 0 {
                break;
            }
        }
    }
    let mut position = HashMap::new();
    for grade in &by_grade {
        for (p, idx) in grade.iter().enumerate() {
            position.insert(idx.members().to_vec(), p);
        }
    }
    Ok(ExteriorBasis {
        kappa,
        by_grade,
        position,
    })
}

/// A coordinate vector `lambda` in the complexified dual, paired against the
/// generator basis; units are inverse time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoForm(pub Vec<Complex64>);

impl CoForm {
    pub fn zero(kappa: usize) -> Self {
        CoForm(vec![Complex64::new(0.0, 0.0); kappa])
    }

    pub fn kappa(&self) -> usize {
        self.0.len()
    }

    /// Pairing `lambda(A)` with a real direction.
    pub fn pair(&self, a: &[f64]) -> Complex64 {
        self.0
            .iter()
            .zip(a)
            .map(|(l, &x)| l * Complex64::new(x, 0.0))
            .sum()
    }
}

/// A tuple of commuting square matrices, the finite-dimensional stand-in for
/// the generators of an abelian action.
#[derive(Debug, Clone)]
pub struct CommutingTuple {
    kappa: usize,
    dim: usize,
    mats: Vec<CMat>,
}

impl CommutingTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let kappa = mats.len();
        if kappa == 0 || kappa > MAX_KAPPA {
            return Err(Error::InvalidRank(kappa));
        }
        let dim = mats[0].nrows();
        if dim == 0 {
            return Err(Error::DimensionMismatch("empty matrices".into()));
        }
        for (j, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {j} has shape {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { kappa, dim, mats })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn mat(&self, j: usize) -> &CMat {
        &self.mats[j]
    }

    /// Largest pairwise commutator norm `max_{i<j} |[X_i, X_j]|_F`.
    pub fn comm_defect(&self) -> f64 {
        self.worst_pair().2
    }

    /// The pair of generators with the largest commutator, and its norm.
    pub fn worst_pair(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0f64);
        for i in 0..self.kappa {
            for j in (i + 1)..self.kappa {
                let c = &self.mats[i].dot(&self.mats[j]) - &self.mats[j].dot(&self.mats[i]);
                let d = linalg::frob(&c);
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    /// Frobenius scale of the tuple, `max_j |X_j|_F`, floored at 1.
    pub fn scale(&self) -> f64 {
        self.mats
            .iter()
            .map(linalg::frob)
            .fold(0.0f64, f64::max)
            .max(1.0)
    }

    pub fn validate(&self, tol_comm: f64) -> Result<()> {
        let (i, j, d) = self.worst_pair();
        if d > tol_comm * self.scale() {
            return Err(Error::CommutationDefect {
                i,
                j,
                defect: d,
                tol: tol_comm * self.scale(),
            });
        }
        Ok(())
    }

    /// The shifted tuple `(X_j + lambda_j)_j`.
    pub fn shifted(&self, lambda: &CoForm) -> Result<CommutingTuple> {
        if lambda.kappa() != self.kappa {
            return Err(Error::DimensionMismatch(format!(
                "lambda has {} coordinates, tuple has rank {}",
                lambda.kappa(),
                self.kappa
            )));
        }
        let mats = self
            .mats
            .iter()
            .zip(&lambda.0)
            .map(|(m, &l)| m + &(linalg::eye(self.dim).mapv(|z| z * l)))
            .collect();
        CommutingTuple::new(mats)
    }

    /// Stacked matrix `[(X_j + lambda_j)]_j` of shape `kappa*n x n`, whose
    /// kernel is the joint eigenspace at `-lambda`.
    pub fn stacked(&self, lambda: &CoForm) -> CMat {
        let n = self.dim;
        let mut out = Array2::zeros((self.kappa * n, n));
        for j in 0..self.kappa {
            let block = &self.mats[j] + &(linalg::eye(n).mapv(|z| z * lambda.0[j]));
            out.slice_mut(s![j * n..(j + 1) * n, ..]).assign(&block);
        }
        out
    }
}

/// Graded block matrix of the Koszul differential `d_{X+lambda}`.
///
/// `blocks[j]` raises grade `j` to `j+1` and has shape
/// `n*C(kappa, j+1) x n*C(kappa, j)`.
#[derive(Debug, Clone)]
pub struct KoszulOperator {
    pub kappa: usize,
    pub dim: usize,
    pub blocks: Vec<CMat>,
}

impl KoszulOperator {
    /// Largest norm among consecutive products `d_{j+1} d_j`.
    pub fn complex_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.blocks.len().saturating_sub(1) {
            let p = self.blocks[j + 1].dot(&self.blocks[j]);
            worst = worst.max(linalg::frob(&p));
        }
        worst
    }

    pub fn grade_dim(&self, j: usize) -> usize {
        if j < self.blocks.len() {
            self.blocks[j].ncols()
        } else {
            self.blocks[self.blocks.len() - 1].nrows()
        }
    }
}

/// Graded block matrix of a divergence `delta_{Y+lambda}`; `blocks[j]` lowers
/// grade `j+1` to `j`.
#[derive(Debug, Clone)]
pub struct DivergenceOperator {
    pub kappa: usize,
    pub dim: usize,
    pub blocks: Vec<CMat>,
}

impl DivergenceOperator {
    pub fn complex_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.blocks.len().saturating_sub(1) {
            let p = self.blocks[j].dot(&self.blocks[j + 1]);
            worst = worst.max(linalg::frob(&p));
        }
        worst
    }
}

/// Assemble the Koszul differential of the shifted tuple.
pub fn build_d(tuple: &CommutingTuple, lambda: &CoForm) -> Result<KoszulOperator> {
    if lambda.kappa() != tuple.kappa() {
        return Err(Error::DimensionMismatch(format!(
            "lambda rank {} vs tuple rank {}",
            lambda.kappa(),
            tuple.kappa()
        )));
    }
    let kappa = tuple.kappa();
    let n = tuple.dim();
    let basis = exterior_basis(kappa)?;
    let shifted: Vec<CMat> = (0..kappa)
        .map(|k| tuple.mat(k) + &(linalg::eye(n).mapv(|z| z * lambda.0[k])))
        .collect();
    let mut blocks = Vec::with_capacity(kappa);
    for j in 0..kappa {
        let src = basis.grade(j);
        let dst_count = basis.grade_size(j + 1);
        let mut block: CMat = Array2::zeros((dst_count * n, src.len() * n));
        for (q, idx) in src.iter().enumerate() {
            for k in 1..=kappa as u8 {
                if let Some((target, sign)) = idx.wedge(k) {
                    let p = basis.position(&target);
                    let m = shifted[(k - 1) as usize].mapv(|z| z * sign);
                    block
                        .slice_mut(s![p * n..(p + 1) * n, q * n..(q + 1) * n])
                        .assign(&m);
                }
            }
        }
        blocks.push(block);
    }
    Ok(KoszulOperator {
        kappa,
        dim: n,
        blocks,
    })
}

/// Assemble the divergence operator of the shifted tuple.
pub fn build_delta(tuple: &CommutingTuple, lambda: &CoForm) -> Result<DivergenceOperator> {
    if lambda.kappa() != tuple.kappa() {
        return Err(Error::DimensionMismatch(format!(
            "lambda rank {} vs tuple rank {}",
            lambda.kappa(),
            tuple.kappa()
        )));
    }
    let kappa = tuple.kappa();
    let n = tuple.dim();
    let basis = exterior_basis(kappa)?;
    let shifted: Vec<CMat> = (0..kappa)
        .map(|k| tuple.mat(k) + &(linalg::eye(n).mapv(|z| z * lambda.0[k])))
        .collect();
    let mut blocks = Vec::with_capacity(kappa);
    for j in 1..=kappa {
        let src = basis.grade(j);
        let dst_count = basis.grade_size(j - 1);
        let mut block: CMat = Array2::zeros((dst_count * n, src.len() * n));
        for (q, idx) in src.iter().enumerate() {
            for (slot, &k) in idx.members().iter().enumerate() {
                // divergence sign is (-1)^m with m the 1-based slot
                let sign = if slot % 2 == 0 { -1.0 } else { 1.0 };
                let (target, _) = idx.contract(k).expect("member contracts");
                let p = basis.position(&target);
                let m = shifted[(k - 1) as usize].mapv(|z| z * sign);
                block
                    .slice_mut(s![p * n..(p + 1) * n, q * n..(q + 1) * n])
                    .assign(&m);
            }
        }
        blocks.push(block);
    }
    Ok(DivergenceOperator {
        kappa,
        dim: n,
        blocks,
    })
}

/// Contraction `iota_A` on the bare exterior algebra: real blocks mapping
/// grade `j+1` to grade `j`.
pub fn contraction(a: &[f64], kappa: usize) -> Result<Vec<Array2<f64>>> {
    if a.len() != kappa {
        return Err(Error::DimensionMismatch(format!(
            "direction has {} coordinates, expected {kappa}",
            a.len()
        )));
    }
    let basis = exterior_basis(kappa)?;
    let mut blocks = Vec::with_capacity(kappa);
    for j in 1..=kappa {
        let src = basis.grade(j);
        let mut block = Array2::zeros((basis.grade_size(j - 1), src.len()));
        for (q, idx) in src.iter().enumerate() {
            for &k in idx.members() {
                let (target, sign) = idx.contract(k).expect("member contracts");
                let p = basis.position(&target);
                block[(p, q)] += sign * a[(k - 1) as usize];
            }
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Lift an operator `S` on `V` to the Lambda-scalar operator `S (x) Id` on
/// grade `j` (our layout tensors the exterior index on the left).
pub fn lambda_scalar(s_op: &CMat, grade_size: usize) -> CMat {
    linalg::kron(&linalg::eye(grade_size), s_op)
}

/// Defect of the homotopy identity
/// `delta_Y d_{X+lambda} + d_{X+lambda} delta_Y + (sum_k (X_k+lambda_k) Y_k) (x) Id = 0`,
/// valid when all `X_i` and `Y_j` pairwise commute.
///
/// Returns the largest Frobenius norm over the grades. Inputs violating the
/// commutation hypothesis beyond `tol_comm * scale` are rejected with the
/// worst pair in the diagnostic.
pub fn homotopy_defect(
    tuple_x: &CommutingTuple,
    tuple_y: &CommutingTuple,
    lambda: &CoForm,
    tol_comm: f64,
) -> Result<f64> {
    if tuple_x.kappa() != tuple_y.kappa() || tuple_x.dim() != tuple_y.dim() {
        return Err(Error::DimensionMismatch(
            "tuples must share rank and dimension".into(),
        ));
    }
    let kappa = tuple_x.kappa();
    let n = tuple_x.dim();
    let scale = tuple_x.scale().max(tuple_y.scale());
    // the lemma's hypothesis: every X_i commutes with every Y_j (and X, Y
    // commute among themselves)
    let mut worst = (0usize, 0usize, 0.0f64);
    for i in 0..kappa {
        for j in 0..kappa {
            let c = &tuple_x.mat(i).dot(tuple_y.mat(j)) - &tuple_y.mat(j).dot(tuple_x.mat(i));
            let d = linalg::frob(&c);
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    tuple_x.validate(tol_comm)?;
    tuple_y.validate(tol_comm)?;
    if worst.2 > tol_comm * scale {
        return Err(Error::CommutationDefect {
            i: worst.0,
            j: worst.1,
            defect: worst.2,
            tol: tol_comm * scale,
        });
    }

    let basis = exterior_basis(kappa)?;
    let d = build_d(tuple_x, lambda)?;
    let delta = build_delta(tuple_y, &CoForm::zero(kappa))?;
    // S = sum_k (X_k + lambda_k) Y_k
    let mut s_op: CMat = Array2::zeros((n, n));
    for k in 0..kappa {
        let xk = tuple_x.mat(k) + &(linalg::eye(n).mapv(|z| z * lambda.0[k]));
        s_op = &s_op + &xk.dot(tuple_y.mat(k));
    }
    let mut defect = 0.0f64;
    for j in 0..=kappa {
        let size = basis.grade_size(j) * n;
        let mut acc: CMat = Array2::zeros((size, size));
        if j < kappa {
            // delta_{j+1} d_j
            acc = &acc + &delta.blocks[j].dot(&d.blocks[j]);
        }
        if j > 0 {
            // d_{j-1} delta_j
            acc = &acc + &d.blocks[j - 1].dot(&delta.blocks[j - 1]);
        }
        acc = &acc + &lambda_scalar(&s_op, basis.grade_size(j));
        defect = defect.max(linalg::frob(&acc));
    }
    Ok(defect)
}

/// Cohomology dimensions of a Koszul complex, with a conditioning flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dims: Vec<usize>,
    /// Set when a rank decision fell inside a weakly separated singular value
    /// cluster; the dims are still returned.
    pub ill_conditioned: bool,
}

/// Ranks per grade via singular value decompositions,
/// `h_j = dim ker d_j - rank d_{j-1}`.
///
/// The rank cutoff is `rank_tol` times the largest singular value across the
/// whole complex, so grades that vanish up to roundoff are ranked zero.
pub fn cohomology_dims(d: &KoszulOperator, rank_tol: f64) -> Result<CohomologyReport> {
    cohomology_dims_scaled(d, rank_tol, 0.0)
}

/// As [`cohomology_dims`], with an external reference scale for complexes
/// obtained by compressing larger data (the compression may be pure roundoff
/// relative to the parent scale).
pub fn cohomology_dims_scaled(
    d: &KoszulOperator,
    rank_tol: f64,
    scale: f64,
) -> Result<CohomologyReport> {
    let kappa = d.kappa;
    let mut svals: Vec<Vec<f64>> = Vec::with_capacity(kappa);
    let mut global = scale;
    for j in 0..kappa {
        let s = linalg::svdvals(&d.blocks[j])?;
        if let Some(&top) = s.first() {
            global = global.max(top);
        }
        svals.push(s);
    }
    let mut ranks = vec![0usize; kappa + 1]; // ranks[j] = rank of d_j, d_kappa = 0
    let mut fuzzy = false;
    for j in 0..kappa {
        let (r, f) = linalg::rank_with_flag_scaled(&svals[j], rank_tol, global);
        ranks[j] = r;
        fuzzy |= f;
    }
    let mut dims = Vec::with_capacity(kappa + 1);
    for j in 0..=kappa {
        let cols = d.grade_dim(j);
        let ker = cols - ranks.get(j).copied().unwrap_or(0);
        let im = if j == 0 { 0 } else { ranks[j - 1] };
        if im > ker {
            // cannot happen for a genuine complex; treat as conditioning noise
            fuzzy = true;
            dims.push(0);
        } else {
            dims.push(ker - im);
        }
    }
    Ok(CohomologyReport {
        dims,
        ill_conditioned: fuzzy,
    })
}

/// Euler characteristic `sum_j (-1)^j h_j` of the cohomology.
pub fn fredholm_index(dims: &[usize]) -> i64 {
    dims.iter()
        .enumerate()
        .map(|(j, &h)| if j % 2 == 0 { h as i64 } else { -(h as i64) })
        .sum()
}

/// Binomial coefficient, used by tests and bookkeeping.
pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, frob, ONE, ZERO};
    use crate::tuples;
    use ndarray::array;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_small_ranks() {
        // kappa = 1: grades [(), (1)]
        let b = exterior_basis(1).unwrap();
        assert_eq!(b.grade_size(0), 1);
        assert_eq!(b.grade_size(1), 1);
        // kappa = 2: 1, 2, 1
        let b = exterior_basis(2).unwrap();
        assert_eq!(b.grade_size(0), 1);
        assert_eq!(b.grade_size(1), 2);
        assert_eq!(b.grade_size(2), 1);
        assert_eq!(b.grade(1)[0].members(), &[1]);
        assert_eq!(b.grade(1)[1].members(), &[2]);
        // kappa = 3: binomial row 1, 3, 3, 1
        let b = exterior_basis(3).unwrap();
        let sizes: Vec<usize> = (0..=3).map(|j| b.grade_size(j)).collect();
        assert_eq!(sizes, vec![1, 3, 3, 1]);
        // lexicographic order in grade 2
        let g2: Vec<&[u8]> = b.grade(2).iter().map(|i| i.members()).collect();
        assert_eq!(g2, vec![&[1u8, 2][..], &[1, 3][..], &[2, 3][..]]);
    }

    #[test]
    fn basis_rejects_bad_rank() {
        assert!(exterior_basis(0).is_err());
        assert!(exterior_basis(17).is_err());
        assert!(exterior_basis(16).is_ok());
    }

    #[test]
    fn basis_total_size_is_power_of_two() {
        for kappa in 1..=8 {
            let b = exterior_basis(kappa).unwrap();
            let total: usize = (0..=kappa).map(|j| b.grade_size(j)).sum();
            assert_eq!(total, 1 << kappa);
        }
    }

    #[test]
    fn build_d_scalar_rank_one() {
        // kappa=1, X = [[2]], lambda = 0: single 1x1 block [[2]]
        let t = CommutingTuple::new(vec![array![[c(2.0, 0.0)]]]).unwrap();
        let d = build_d(&t, &CoForm::zero(1)).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.blocks[0].dim(), (1, 1));
        assert!((d.blocks[0][(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn build_d_zero_tuple_grade0_stacks_identity_scalars() {
        // kappa=2, X_1 = X_2 = 0 (2x2), lambda = (1, i): grade-0 block stacks
        // [Id, i*Id] with wedge signs (+ for both since e_k ^ 1 has no swaps).
        let z = Array2::<Complex64>::zeros((2, 2));
        let t = CommutingTuple::new(vec![z.clone(), z]).unwrap();
        let lam = CoForm(vec![ONE, c(0.0, 1.0)]);
        let d = build_d(&t, &lam).unwrap();
        assert_eq!(d.blocks[0].dim(), (4, 2));
        let top = d.blocks[0].slice(s![0..2, ..]).to_owned();
        let bot = d.blocks[0].slice(s![2..4, ..]).to_owned();
        assert!(frob(&(&top - &eye(2))) < 1e-15);
        assert!(frob(&(&bot - &eye(2).mapv(|z| z * c(0.0, 1.0)))) < 1e-15);
    }

    #[test]
    fn d_squares_to_zero_on_random_commuting_pair() {
        let t = tuples::polynomial_pair(4, 7);
        let d = build_d(&t, &CoForm(vec![c(0.3, -0.2), c(-1.0, 0.5)])).unwrap();
        assert!(d.complex_defect() < 1e-12 * t.scale());
    }

    #[test]
    fn delta_signs_rank_one_and_two() {
        // kappa=1: delta on grade 1 is -(X_1 + lambda_1)
        let t = CommutingTuple::new(vec![array![[c(3.0, 0.0)]]]).unwrap();
        let lam = CoForm(vec![c(1.0, 0.0)]);
        let delta = build_delta(&t, &lam).unwrap();
        assert!((delta.blocks[0][(0, 0)] - c(-4.0, 0.0)).norm() < 1e-15);

        // kappa=2, grade-2 input u (x) e1^e2 ->
        //   -(X_1+l_1) u (x) e2 + (X_2+l_2) u (x) e1
        let x1 = array![[c(2.0, 0.0)]];
        let x2 = array![[c(5.0, 0.0)]];
        let t2 = CommutingTuple::new(vec![x1, x2]).unwrap();
        let delta2 = build_delta(&t2, &CoForm::zero(2)).unwrap();
        let block = &delta2.blocks[1]; // grade 2 -> 1, shape 2x1
        assert!((block[(0, 0)] - c(5.0, 0.0)).norm() < 1e-15, "e1 slot gets +X_2");
        assert!((block[(1, 0)] - c(-2.0, 0.0)).norm() < 1e-15, "e2 slot gets -X_1");
    }

    #[test]
    fn delta_squares_to_zero_on_random_commuting_pair() {
        let t = tuples::polynomial_pair(4, 11);
        let delta = build_delta(&t, &CoForm(vec![c(0.1, 0.0), c(0.0, -0.7)])).unwrap();
        assert!(delta.complex_defect() < 1e-12 * t.scale());
    }

    #[test]
    fn contraction_basis_actions() {
        let blocks = contraction(&[1.0, 0.0], 2).unwrap();
        // iota_{e1}(e1^e2) = e2: grade-2 block maps the single e1^e2 slot
        let g2 = &blocks[1]; // grade 2 -> 1
        assert!((g2[(1, 0)] - 1.0).abs() < 1e-15, "coefficient of e2");
        assert!(g2[(0, 0)].abs() < 1e-15);
        let blocks2 = contraction(&[0.0, 1.0], 2).unwrap();
        // iota_{e2}(e1^e2) = -e1
        let g2 = &blocks2[1];
        assert!((g2[(0, 0)] + 1.0).abs() < 1e-15, "coefficient of e1 is -1");
        // iota on grade 0 does not exist as a block; grade-1 block maps to grade 0
        let g1 = &blocks2[0];
        assert_eq!(g1.dim(), (1, 2));
        assert!((g1[(0, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contraction_squares_to_zero() {
        let a = [0.7, -1.3, 0.4];
        let blocks = contraction(&a, 3).unwrap();
        for j in 0..blocks.len() - 1 {
            let p = blocks[j].dot(&blocks[j + 1]);
            let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(norm < 1e-14);
        }
    }

    #[test]
    fn cartan_identity_iota_d_plus_d_iota() {
        // iota_A d_X + d_X iota_A = X_A (x) Id on every grade
        let t = tuples::polynomial_pair(3, 23);
        let kappa = 2;
        let n = t.dim();
        let basis = exterior_basis(kappa).unwrap();
        let d = build_d(&t, &CoForm::zero(kappa)).unwrap();
        for a in [[1.0, 0.0], [0.0, 1.0], [0.3, -0.9]] {
            let iota = contraction(&a, kappa).unwrap();
            let xa = t.mat(0).mapv(|z| z * c(a[0], 0.0)) + t.mat(1).mapv(|z| z * c(a[1], 0.0));
            for j in 0..=kappa {
                let size = basis.grade_size(j) * n;
                let mut acc: CMat = Array2::zeros((size, size));
                if j < kappa {
                    let iota_lift = linalg::complexify(&iota[j]);
                    acc = &acc + &linalg::kron(&iota_lift, &eye(n)).dot(&d.blocks[j]);
                }
                if j > 0 {
                    let iota_lift = linalg::complexify(&iota[j - 1]);
                    acc = &acc + &d.blocks[j - 1].dot(&linalg::kron(&iota_lift, &eye(n)));
                }
                acc = &acc - &lambda_scalar(&xa, basis.grade_size(j));
                assert!(
                    frob(&acc) < 1e-12 * t.scale(),
                    "grade {j} defect {}",
                    frob(&acc)
                );
            }
        }
    }

    #[test]
    fn homotopy_defect_diagonal_self() {
        // Y = X diagonal, lambda = 0: defect 0 and d delta + delta d = -sum X_k^2
        let x1 = array![
            [c(1.0, 0.0), ZERO],
            [ZERO, c(-2.0, 0.0)]
        ];
        let x2 = array![
            [c(0.5, 0.0), ZERO],
            [ZERO, c(3.0, 0.0)]
        ];
        let t = CommutingTuple::new(vec![x1, x2]).unwrap();
        let d = homotopy_defect(&t, &t, &CoForm::zero(2), 1e-10).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn homotopy_defect_zero_tuple() {
        // X = 0: identity reads 0 = 0 for any commuting Y
        let z = Array2::<Complex64>::zeros((3, 3));
        let x = CommutingTuple::new(vec![z.clone(), z]).unwrap();
        let y = tuples::polynomial_pair(3, 5);
        let d = homotopy_defect(&x, &y, &CoForm::zero(2), 1e-10).unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn homotopy_defect_random_commuting() {
        for seed in [1u64, 2, 3] {
            let x = tuples::polynomial_pair(3, seed);
            // Y commuting with X: more polynomials in the same generator
            let y = tuples::polynomial_pair(3, seed); // same A, different coeffs? same seed -> same A
            let lam = CoForm(vec![c(0.2, 0.1), c(-0.4, 0.0)]);
            let d = homotopy_defect(&x, &y, &lam, 1e-8).unwrap();
            assert!(d < 1e-10 * x.scale().max(y.scale()), "defect {d}");
        }
    }

    #[test]
    fn homotopy_rejects_noncommuting() {
        let x = CommutingTuple::new(vec![
            array![[ZERO, ONE], [ZERO, ZERO]],
            array![[ZERO, ZERO], [ZERO, ONE]],
        ]);
        // [X_1, X_2] != 0
        let x = x.unwrap();
        let err = homotopy_defect(&x, &x, &CoForm::zero(2), 1e-10);
        assert!(matches!(err, Err(Error::CommutationDefect { .. })));
    }

    #[test]
    fn cohomology_zero_tuple() {
        // X = 0 on C^n, kappa=2: dims (n, 2n, n)
        let n = 3;
        let z = Array2::<Complex64>::zeros((n, n));
        let t = CommutingTuple::new(vec![z.clone(), z]).unwrap();
        let d = build_d(&t, &CoForm::zero(2)).unwrap();
        let rep = cohomology_dims(&d, 1e-8).unwrap();
        assert_eq!(rep.dims, vec![n, 2 * n, n]);
        assert_eq!(fredholm_index(&rep.dims), 0);
    }

    #[test]
    fn cohomology_vanishes_off_spectrum() {
        // lambda not a joint eigenvalue: all h_j = 0
        let t = tuples::diagonal_pair(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(3.0, 0.0), c(4.0, 0.0)]);
        let lam = CoForm(vec![c(-0.5, 0.0), c(-3.0, 0.0)]); // (0.5, 3.0) is not joint
        let d = build_d(&t, &lam).unwrap();
        let rep = cohomology_dims(&d, 1e-8).unwrap();
        assert_eq!(rep.dims, vec![0, 0, 0]);
    }

    #[test]
    fn cohomology_at_joint_eigenvalue_semisimple() {
        // symmetric commuting tuple; at a joint eigenvalue with m-dim common
        // eigenspace, h_j = m * binom(kappa, j)
        let t = tuples::diagonal_pair(
            &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
            &[c(5.0, 0.0), c(5.0, 0.0), c(7.0, 0.0)],
        );
        // shift so that the joint eigenvalue (1,5) sits at zero of X + lambda
        let lam = CoForm(vec![c(-1.0, 0.0), c(-5.0, 0.0)]);
        let d = build_d(&t, &lam).unwrap();
        let rep = cohomology_dims(&d, 1e-8).unwrap();
        assert_eq!(rep.dims, vec![2, 4, 2]); // m = 2, binom(2, j) = 1, 2, 1
        assert_eq!(fredholm_index(&rep.dims), 0);
    }

    #[test]
    fn cohomology_invariant_under_unitary_conjugation() {
        let t = tuples::polynomial_pair(5, 31);
        let q = tuples::haar_unitary(5, 77);
        let qh = q.t().mapv(|z| z.conj());
        let conj =
            CommutingTuple::new(t.mats().iter().map(|m| qh.dot(&m.dot(&q))).collect()).unwrap();
        // pick lambda = -(joint eigenvalue) so cohomology is nontrivial
        let ev = linalg::eigvals(t.mat(0)).unwrap();
        let ew = linalg::eigvals(t.mat(1)).unwrap();
        // brute-force any joint eigenvalue: test candidates from eigenvalue pairs
        let mut found = None;
        for &a in ev.iter() {
            for &b in ew.iter() {
                let lam = CoForm(vec![-a, -b]);
                let s = t.stacked(&lam);
                let sv = linalg::svdvals(&s).unwrap();
                if sv[sv.len() - 1] < 1e-8 * t.scale() {
                    found = Some(lam);
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        let lam = found.expect("polynomial pair has a joint eigenvalue");
        let d1 = build_d(&t, &lam).unwrap();
        let d2 = build_d(&conj, &lam).unwrap();
        let r1 = cohomology_dims(&d1, 1e-8).unwrap();
        let r2 = cohomology_dims(&d2, 1e-8).unwrap();
        assert_eq!(r1.dims, r2.dims);
    }

    #[test]
    fn fredholm_index_cases() {
        assert_eq!(fredholm_index(&[1, 2, 1]), 0);
        assert_eq!(fredholm_index(&[3, 6, 3]), 0);
        assert_eq!(fredholm_index(&[0, 0, 0]), 0);
    }

    #[test]
    fn binom_row() {
        assert_eq!(
            (0..=4).map(|k| binom(4, k)).collect::<Vec<_>>(),
            vec![1, 4, 6, 4, 1]
        );
    }
}
