//! Dense complex linear algebra helpers shared across the crate.
//!
//! Thin wrappers over LAPACK (through `ndarray-linalg`) plus the few dense
//! kernels that the backend does not provide directly: numerical kernels and
//! ranks with explicit tolerances, Kronecker products, and a scaling-and-
//! squaring matrix exponential.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, Inverse, Norm, Solve, QR, SVD};
use num_complex::Complex64;

use crate::error::Result;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn eye(n: usize) -> CMat {
    Array2::from_diag_elem(n, ONE)
}

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_vec(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
            block.assign(&b.mapv(|z| z * aij));
        }
    }
    out
}

/// Real matrix promoted to a complex one.
pub fn complexify(a: &Array2<f64>) -> CMat {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Singular values in descending order.
pub fn svdvals(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(vec![]);
    }
    let (_, s, _) = m.svd(false, false)?;
    Ok(s.to_vec())
}

/// Smallest singular value together with its left/right singular vectors.
pub fn min_singular_triplet(m: &CMat) -> Result<(f64, CVec, CVec)> {
    let (u, s, vt) = m.svd(true, true)?;
    let u = u.expect("svd: u requested");
    let vt = vt.expect("svd: vt requested");
    let k = s.len() - 1;
    let sigma = s[k];
    let uvec = u.column(k).to_owned();
    let vvec = vt.row(k).mapv(|z| z.conj());
    Ok((sigma, uvec, vvec))
}

/// Numerical rank at a relative cutoff, with a conditioning flag.
///
/// The rank counts singular values above `rel_tol * s_max`. The flag is set
/// when singular values fall inside `[cutoff/10, 10*cutoff]`, i.e. when the
/// rank decision sits inside a poorly separated part of the spectrum.
pub fn rank_with_flag(singular: &[f64], rel_tol: f64) -> (usize, bool) {
    rank_with_flag_scaled(singular, rel_tol, 0.0)
}

/// Rank with an external reference scale: the cutoff is
/// `rel_tol * max(s_max, scale)`, so blocks that are pure roundoff relative
/// to the parent data are ranked zero.
pub fn rank_with_flag_scaled(singular: &[f64], rel_tol: f64, scale: f64) -> (usize, bool) {
    if singular.is_empty() {
        return (0, false);
    }
    let smax = singular[0].max(scale);
    if smax == 0.0 {
        return (0, false);
    }
    let cutoff = rel_tol * smax;
    let rank = singular.iter().take_while(|&&x| x > cutoff).count();
    let fuzzy = singular
        .iter()
        .any(|&x| x >= cutoff * 0.1 && x <= cutoff * 10.0);
    (rank, fuzzy)
}

/// Orthonormal basis of the numerical kernel, as matrix columns.
pub fn kernel(m: &CMat, rel_tol: f64) -> Result<CMat> {
    kernel_scaled(m, rel_tol, 0.0)
}

/// Kernel with an external reference scale (see [`rank_with_flag_scaled`]).
pub fn kernel_scaled(m: &CMat, rel_tol: f64, scale: f64) -> Result<CMat> {
    let ncols = m.ncols();
    if m.nrows() == 0 || ncols == 0 {
        return Ok(eye(ncols));
    }
    let (_, s, vt) = m.svd(false, true)?;
    let vt = vt.expect("svd: vt requested");
    let (rank, _) = rank_with_flag_scaled(s.as_slice().unwrap(), rel_tol, scale);
    // Right singular vectors for sigma <= cutoff span the kernel. LAPACK may
    // return only min(m, n) rows of VT; remaining directions are exact kernel.
    let mut cols: Vec<CVec> = Vec::new();
    for r in rank..vt.nrows() {
        cols.push(vt.row(r).mapv(|z| z.conj()));
    }
    let mut out = Array2::zeros((ncols, cols.len() + ncols.saturating_sub(vt.nrows())));
    for (j, c) in cols.iter().enumerate() {
        out.column_mut(j).assign(c);
    }
    if vt.nrows() < ncols {
        // Wide-matrix completion: the SVD basis is partial, complete by
        // projecting coordinate vectors out of the row space.
        let extra = complete_orthonormal(&vt, cols.len());
        for (j, c) in extra.into_iter().enumerate() {
            out.column_mut(cols.len() + j).assign(&c);
        }
    }
    Ok(out)
}

fn complete_orthonormal(vt: &CMat, already: usize) -> Vec<CVec> {
    let n = vt.ncols();
    let want = n - vt.nrows();
    let mut basis: Vec<CVec> = (0..vt.nrows())
        .map(|r| vt.row(r).mapv(|z| z.conj()))
        .collect();
    let mut extra = Vec::new();
    'next: for k in 0..n {
        if extra.len() == want {
            break;
        }
        let mut v: CVec = Array1::zeros(n);
        v[k] = ONE;
        for b in &basis {
            let proj: Complex64 = b.iter().zip(v.iter()).map(|(a, x)| a.conj() * x).sum();
            v = &v - &b.mapv(|z| z * proj);
        }
        let nrm = frob_vec(&v);
        if nrm < 1e-8 {
            continue 'next;
        }
        let v = v.mapv(|z| z / nrm);
        basis.push(v.clone());
        extra.push(v);
    }
    let _ = already;
    extra
}

/// Orthonormalize the columns via a thin QR factorization.
pub fn orth(m: &CMat) -> Result<CMat> {
    let (q, _) = m.qr()?;
    Ok(q)
}

pub fn eig(m: &CMat) -> Result<(CVec, CMat)> {
    let (vals, vecs) = m.eig()?;
    Ok((vals, vecs))
}

pub fn eigvals(m: &CMat) -> Result<CVec> {
    let (vals, _) = m.eig()?;
    Ok(vals)
}

pub fn inv(m: &CMat) -> Result<CMat> {
    Ok(m.inv()?)
}

/// Solve `A X = B` column by column.
pub fn solve_mat(a: &CMat, b: &CMat) -> Result<CMat> {
    let mut out = Array2::zeros(b.dim());
    for j in 0..b.ncols() {
        let col = b.column(j).to_owned();
        let x = a.solve(&col)?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

/// Condition estimate of an eigenvector matrix, `s_max / s_min`.
pub fn cond2(m: &CMat) -> Result<f64> {
    let s = svdvals(m)?;
    if s.is_empty() || s[s.len() - 1] == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s[0] / s[s.len() - 1])
}

/// Matrix exponential by degree-13 Pade approximation with scaling and squaring.
pub fn expm(a: &CMat) -> Result<CMat> {
    const THETA13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm1 = a.norm_l1();
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = Complex64::new(2f64.powi(-s), 0.0);
    let a = a.mapv(|z| z * scale);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let id = eye(n);
    let w1 = &a6.mapv(|z| z * B[13]) + &a4.mapv(|z| z * B[11]) + &a2.mapv(|z| z * B[9]);
    let w2 = &a6.mapv(|z| z * B[7])
        + &a4.mapv(|z| z * B[5])
        + &a2.mapv(|z| z * B[3])
        + &id.mapv(|z| z * B[1]);
    let u = a.dot(&(&a6.dot(&w1) + &w2));
    let z1 = &a6.mapv(|z| z * B[12]) + &a4.mapv(|z| z * B[10]) + &a2.mapv(|z| z * B[8]);
    let v = &a6.dot(&z1)
        + &a6.mapv(|z| z * B[6])
        + &a4.mapv(|z| z * B[4])
        + &a2.mapv(|z| z * B[2])
        + &id.mapv(|z| z * B[0]);
    let num = &v + &u;
    let den = &v - &u;
    let mut r = solve_mat(&den, &num)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &CMat) -> Result<f64> {
    let vals = eigvals(m)?;
    Ok(vals.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
