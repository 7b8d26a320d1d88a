//! Seeded generators of commuting matrix tuples for identity suites and
//! oracle comparisons.
//!
//! All constructions commute exactly up to floating-point products: tuples
//! are polynomials in a single matrix, simultaneous conjugations of
//! diagonals, or explicit shared Jordan structures.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::koszul::CommutingTuple;
use crate::linalg::{self, CMat};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per call is fine at this scale.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    Array2::from_shape_fn((n, n), |_| Complex64::new(gaussian(rng), gaussian(rng)))
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
pub fn haar_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = seeded_rng(seed);
    let g = random_complex(n, &mut rng);
    linalg::orth(&g).expect("qr of gaussian")
}

/// Real orthogonal matrix via QR of a real Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> CMat {
    let mut rng = seeded_rng(seed);
    let g = Array2::from_shape_fn((n, n), |_| Complex64::new(gaussian(&mut rng), 0.0));
    linalg::orth(&g).expect("qr of gaussian")
}

/// Diagonal entries with pairwise separation at least `min_gap`.
fn separated_diag(n: usize, min_gap: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut vals: Vec<Complex64> = Vec::with_capacity(n);
    while vals.len() < n {
        let cand = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if vals.iter().all(|v| (v - cand).norm() >= min_gap) {
            vals.push(cand);
        }
    }
    vals
}

/// Two commuting matrices as polynomials of a common normal matrix.
pub fn polynomial_pair(n: usize, seed: u64) -> CommutingTuple {
    polynomial_tuple(n, 2, seed)
}

/// `kappa` commuting matrices `p_j(A)` with `A = V D V^*`, `V` Haar unitary
/// and `D` separated; polynomials have degree at most 3.
pub fn polynomial_tuple(n: usize, kappa: usize, seed: u64) -> CommutingTuple {
    let mut rng = seeded_rng(seed);
    let d = separated_diag(n, 0.35, &mut rng);
    let v = haar_unitary(n, seed.wrapping_add(0x9e37_79b9));
    let vh = v.t().mapv(|z| z.conj());
    let mut mats = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let coeffs: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(gaussian(&mut rng) * 0.5, gaussian(&mut rng) * 0.5))
            .collect();
        let pd: Vec<Complex64> = d
            .iter()
            .map(|&z| coeffs[0] + coeffs[1] * z + coeffs[2] * z * z + coeffs[3] * z * z * z)
            .collect();
        let diag = Array2::from_diag(&ndarray::Array1::from_vec(pd));
        mats.push(v.dot(&diag).dot(&vh));
    }
    CommutingTuple::new(mats).expect("polynomial tuple is square")
}

/// The common generator and its polynomial images, for eigen-decomposition
/// oracles: returns `(A_eigenvalues, tuple, per_matrix_eigenvalues)` where
/// `per_matrix_eigenvalues[j][i] = p_j(mu_i)`.
pub fn polynomial_tuple_with_oracle(
    n: usize,
    kappa: usize,
    seed: u64,
) -> (Vec<Complex64>, CommutingTuple, Vec<Vec<Complex64>>) {
    let mut rng = seeded_rng(seed);
    let d = separated_diag(n, 0.35, &mut rng);
    let v = haar_unitary(n, seed.wrapping_add(0x9e37_79b9));
    let vh = v.t().mapv(|z| z.conj());
    let mut mats = Vec::with_capacity(kappa);
    let mut evs = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let coeffs: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(gaussian(&mut rng) * 0.5, gaussian(&mut rng) * 0.5))
            .collect();
        let pd: Vec<Complex64> = d
            .iter()
            .map(|&z| coeffs[0] + coeffs[1] * z + coeffs[2] * z * z + coeffs[3] * z * z * z)
            .collect();
        let diag = Array2::from_diag(&ndarray::Array1::from_vec(pd.clone()));
        mats.push(v.dot(&diag).dot(&vh));
        evs.push(pd);
    }
    (
        d,
        CommutingTuple::new(mats).expect("square"),
        evs,
    )
}

/// A pair of diagonal matrices (always commuting).
pub fn diagonal_pair(d1: &[Complex64], d2: &[Complex64]) -> CommutingTuple {
    let m1 = Array2::from_diag(&ndarray::Array1::from_vec(d1.to_vec()));
    let m2 = Array2::from_diag(&ndarray::Array1::from_vec(d2.to_vec()));
    CommutingTuple::new(vec![m1, m2]).expect("diagonal pair")
}

/// Real symmetric commuting tuple `Q D_j Q^T` with a shared eigenvalue of
/// multiplicity `mult` in every generator.
pub fn symmetric_tuple(n: usize, kappa: usize, mult: usize, seed: u64) -> CommutingTuple {
    assert!(mult >= 1 && mult <= n);
    let mut rng = seeded_rng(seed);
    let q = random_orthogonal(n, seed.wrapping_add(17));
    let qt = q.t().to_owned();
    let mut mats = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let shared = (rng.gen_range(-150i64..150) as f64) / 100.0;
        let mut vals = vec![shared; mult];
        while vals.len() < n {
            let cand = (rng.gen_range(-300i64..300) as f64) / 100.0;
            if vals.iter().all(|&v| (v - cand).abs() > 0.3) {
                vals.push(cand);
            }
        }
        let diag = Array2::from_diag(&ndarray::Array1::from_vec(
            vals.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        ));
        mats.push(q.dot(&diag).dot(&qt));
    }
    CommutingTuple::new(mats).expect("symmetric tuple")
}

/// Shared Jordan structure: `X_1 = J_2(0) (+) D`, `X_2 = 0 (+) D'` where the
/// Jordan block sits on the first two coordinates.
pub fn jordan_pair(n: usize, seed: u64) -> CommutingTuple {
    assert!(n >= 2);
    let mut rng = seeded_rng(seed);
    let mut m1: CMat = Array2::zeros((n, n));
    let mut m2: CMat = Array2::zeros((n, n));
    m1[(0, 1)] = Complex64::new(1.0, 0.0);
    for i in 2..n {
        m1[(i, i)] = Complex64::new(rng.gen_range(1..6) as f64, 0.0);
        m2[(i, i)] = Complex64::new(rng.gen_range(1..6) as f64, 0.0);
    }
    CommutingTuple::new(vec![m1, m2]).expect("jordan pair")
}

/// Nilpotent pair `(J_m(0), J_m(0)^2)` of full Jordan order `m`.
pub fn nilpotent_pair(m: usize) -> CommutingTuple {
    let mut j: CMat = Array2::zeros((m, m));
    for i in 0..m - 1 {
        j[(i, i + 1)] = Complex64::new(1.0, 0.0);
    }
    let j2 = j.dot(&j);
    CommutingTuple::new(vec![j, j2]).expect("nilpotent pair")
}

/// A deliberately non-commuting pair, for error-path coverage.
pub fn noncommuting_pair(n: usize, seed: u64) -> CommutingTuple {
    let mut rng = seeded_rng(seed);
    let a = random_complex(n, &mut rng);
    let b = random_complex(n, &mut rng);
    CommutingTuple::new(vec![a, b]).expect("square")
}

/// Families exercised by the identity suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleFamily {
    Polynomial,
    Symmetric,
    Jordan,
    Nilpotent,
    Zero,
}

/// Deterministic mixed-family generator: `index` selects both family and
/// shape from the stream seeded by `seed`.
pub fn mixed_family(index: usize, seed: u64) -> (TupleFamily, CommutingTuple) {
    let mut rng = seeded_rng(seed.wrapping_add(index as u64 * 0x57c1));
    let n = rng.gen_range(2..=12);
    let kappa = rng.gen_range(1..=3);
    match index % 5 {
        0 | 3 => (TupleFamily::Polynomial, polynomial_tuple(n, kappa, seed + index as u64)),
        1 => (
            TupleFamily::Symmetric,
            symmetric_tuple(n.max(3), kappa.max(2), 1 + n % 2, seed + index as u64),
        ),
        2 => (TupleFamily::Jordan, jordan_pair(n.max(2), seed + index as u64)),
        _ => {
            if index % 10 == 4 {
                let z = Array2::zeros((n, n));
                (
                    TupleFamily::Zero,
                    CommutingTuple::new(vec![z; kappa]).expect("zero tuple"),
                )
            } else {
                (TupleFamily::Nilpotent, nilpotent_pair(3 + n % 3))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_tuples_commute() {
        for seed in 0..5 {
            let t = polynomial_tuple(6, 3, seed);
            assert!(t.comm_defect() < 1e-12 * t.scale());
        }
    }

    #[test]
    fn symmetric_tuples_are_symmetric_and_commute() {
        let t = symmetric_tuple(5, 2, 2, 3);
        assert!(t.comm_defect() < 1e-12 * t.scale());
        for m in t.mats() {
            let d = m - &m.t().mapv(|z| z.conj());
            assert!(linalg::frob(&d) < 1e-12);
        }
    }

    #[test]
    fn mixed_family_is_deterministic() {
        let (f1, t1) = mixed_family(7, 42);
        let (f2, t2) = mixed_family(7, 42);
        assert_eq!(f1, f2);
        assert_eq!(t1.dim(), t2.dim());
        let diff = t1.mat(0) - t2.mat(0);
        assert_eq!(linalg::frob(&diff), 0.0);
    }
}
