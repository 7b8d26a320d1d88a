//! Joint eigenvalues, generalized weight spaces and spectral projectors of
//! commuting matrix tuples.
//!
//! The extraction triangularizes a generic random combination
//! `T = sum_j c_j X_j` (coefficients drawn once per call from a seeded
//! generator), clusters its eigenvalues, reads each joint eigenvalue from the
//! compression of the tuple to the cluster's invariant subspace, and
//! cross-checks every candidate with the stacked-kernel residual.

use ndarray::{s, Array2};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::koszul::{CoForm, CommutingTuple};
use crate::linalg::{self, CMat};
use crate::tuples::seeded_rng;

/// A joint eigenvalue with its multiplicities and detection residual.
#[derive(Debug, Clone)]
pub struct JointEigenvalue {
    pub lambda: CoForm,
    /// Dimension of the generalized weight space.
    pub alg_mult: usize,
    /// Dimension of the joint kernel.
    pub geom_mult: usize,
    /// Minimal `J` such that all degree-`J` monomials in the shifted tuple
    /// annihilate the weight space.
    pub jordan_order: usize,
    /// Smallest singular value of the stacked `[(X_j - lambda_j)]_j`,
    /// relative to the tuple scale.
    pub residual: f64,
    /// Set when unresolved clusters were merged.
    pub merged: bool,
}

#[derive(Debug, Clone)]
pub struct JointSpecOptions {
    /// Residual tolerance for accepting a candidate.
    pub tol: f64,
    /// Base clustering radius relative to the tuple scale.
    pub cluster_radius: f64,
    /// Seed for the generic-combination coefficients.
    pub seed: u64,
}

impl Default for JointSpecOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            cluster_radius: 1e-7,
            seed: 0x5eed,
        }
    }
}

/// Adaptive merge radius: Jordan structure of order `m` splits an exact
/// eigenvalue into a cluster of diameter on the order of `eps^(1/m)`.
fn merge_radius(m: usize, base: f64) -> f64 {
    let m_eff = m.min(4) as f64;
    let jordan = (1e5 * f64::EPSILON).powf(1.0 / m_eff);
    base.max(jordan)
}

#[derive(Debug, Clone)]
struct Cluster {
    center: Complex64,
    members: Vec<usize>,
}

fn cluster_values(vals: &[Complex64], scale: f64, base_radius: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = vals
        .iter()
        .enumerate()
        .map(|(i, &v)| Cluster {
            center: v,
            members: vec![i],
        })
        .collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let gap = (clusters[a].center - clusters[b].center).norm();
                match best {
                    Some((_, _, g)) if g <= gap => {}
                    _ => best = Some((a, b, gap)),
                }
            }
        }
        let Some((a, b, gap)) = best else { break };
        let m = clusters[a].members.len() + clusters[b].members.len();
        if gap > scale * merge_radius(m, base_radius) {
            break;
        }
        let Cluster { members, .. } = clusters.remove(b);
        clusters[a].members.extend(members);
        let total: Complex64 = clusters[a].members.iter().map(|&i| vals[i]).sum();
        clusters[a].center = total / (clusters[a].members.len() as f64);
    }
    clusters
}

/// Orthonormal basis of the invariant subspace of `t_mat` for the cluster at
/// `mu` with multiplicity `m`: the kernel of the normalized power
/// `((T - mu)/|T - mu|)^m`.
fn cluster_subspace(t_mat: &CMat, mu: Complex64, m: usize, tol: f64) -> Result<CMat> {
    let n = t_mat.nrows();
    let shifted = t_mat - &linalg::eye(n).mapv(|z| z * mu);
    let nrm = linalg::frob(&shifted).max(f64::EPSILON);
    let b = shifted.mapv(|z| z / nrm);
    let mut p = b.clone();
    for _ in 1..m {
        p = p.dot(&b);
    }
    let ker = linalg::kernel_scaled(&p, tol, 1.0)?;
    Ok(ker)
}

/// Joint eigenvalue extraction for a commuting tuple.
pub fn joint_eigenvalues(
    tuple: &CommutingTuple,
    opts: &JointSpecOptions,
) -> Result<Vec<JointEigenvalue>> {
    let kappa = tuple.kappa();
    let n = tuple.dim();
    let scale = tuple.scale();
    let mut rng = seeded_rng(opts.seed);
    // one generic draw per call
    let coeffs: Vec<Complex64> = (0..kappa)
        .map(|_| {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.gen_range(0.5..1.5);
            Complex64::from_polar(r, phi)
        })
        .collect();
    let mut t_mat: CMat = Array2::zeros((n, n));
    for j in 0..kappa {
        t_mat = &t_mat + &tuple.mat(j).mapv(|z| z * coeffs[j]);
    }
    let t_scale = linalg::frob(&t_mat).max(1.0);
    let vals = linalg::eigvals(&t_mat)?;
    let vals_vec: Vec<Complex64> = vals.to_vec();

    let mut clusters = cluster_values(&vals_vec, t_scale, opts.cluster_radius);
    // Split oversized clusters whose compressed residual rejects the merge.
    let mut out: Vec<JointEigenvalue> = Vec::new();
    let mut merged_any = false;
    while let Some(cl) = clusters.pop() {
        let m = cl.members.len();
        let w = cluster_subspace(&t_mat, cl.center, m, 1e-8)?;
        if w.ncols() != m {
            // weight space dimension disagrees with the cluster size; retry
            // with a finer split when possible, otherwise accept what we see
            if m > 1 {
                let sub: Vec<Complex64> = cl.members.iter().map(|&i| vals_vec[i]).collect();
                let finer = cluster_values(&sub, t_scale, opts.cluster_radius * 1e-2);
                if finer.len() > 1 {
                    merged_any = true;
                    for f in finer {
                        clusters.push(Cluster {
                            center: f.center,
                            members: f.members.iter().map(|&i| cl.members[i]).collect(),
                        });
                    }
                    continue;
                }
            }
        }
        let m_eff = w.ncols().max(1);
        let wh = w.t().mapv(|z| z.conj());
        // compressed tuple on the weight space; its sole joint eigenvalue is
        // read off stably from the trace
        let mut lambda = Vec::with_capacity(kappa);
        let mut compressed = Vec::with_capacity(kappa);
        for j in 0..kappa {
            let c = wh.dot(&tuple.mat(j).dot(&w));
            let tr: Complex64 = (0..c.nrows()).map(|i| c[(i, i)]).sum();
            lambda.push(tr / (m_eff as f64));
            compressed.push(c);
        }
        let lam = CoForm(lambda);
        // stacked-kernel verification on the full tuple
        let neg = CoForm(lam.0.iter().map(|z| -z).collect());
        let stacked = tuple.stacked(&neg);
        let sv = linalg::svdvals(&stacked)?;
        let residual = sv[sv.len() - 1] / scale;
        if residual > opts.tol && m > 1 {
            // wrong merge of genuinely distinct joint eigenvalues: resplit
            let sub: Vec<Complex64> = cl.members.iter().map(|&i| vals_vec[i]).collect();
            let finer = cluster_values(&sub, t_scale, opts.cluster_radius * 1e-3);
            if finer.len() > 1 {
                for f in finer {
                    clusters.push(Cluster {
                        center: f.center,
                        members: f.members.iter().map(|&i| cl.members[i]).collect(),
                    });
                }
                continue;
            }
        }
        let (geom, jordan) = multiplicities(&compressed, &lam)?;
        out.push(JointEigenvalue {
            lambda: lam,
            alg_mult: m,
            geom_mult: geom,
            jordan_order: jordan,
            residual,
            merged: merged_any && m > 1,
        });
    }
    // Coalesce candidates that converged to the same lambda (robustness for
    // clusters the combination separated but the tuple does not).
    out = coalesce(out, scale, opts);
    out.sort_by(|a, b| {
        let ka = (a.lambda.0[0].re, a.lambda.0[0].im);
        let kb = (b.lambda.0[0].re, b.lambda.0[0].im);
        ka.partial_cmp(&kb).unwrap()
    });
    Ok(out)
}

fn coalesce(
    mut cands: Vec<JointEigenvalue>,
    _scale: f64,
    opts: &JointSpecOptions,
) -> Vec<JointEigenvalue> {
    let mut out: Vec<JointEigenvalue> = Vec::new();
    'outer: while let Some(c) = cands.pop() {
        for o in out.iter_mut() {
            let dist = c
                .lambda
                .0
                .iter()
                .zip(&o.lambda.0)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            let radius = merge_radius(c.alg_mult + o.alg_mult, opts.cluster_radius);
            if dist <= radius {
                o.alg_mult += c.alg_mult;
                o.geom_mult += c.geom_mult;
                o.jordan_order = o.jordan_order.max(c.jordan_order);
                o.residual = o.residual.max(c.residual);
                o.merged = true;
                continue 'outer;
            }
        }
        out.push(c);
    }
    out
}

/// Geometric multiplicity and Jordan order from the compressed tuple.
fn multiplicities(compressed: &[CMat], lambda: &CoForm) -> Result<(usize, usize)> {
    let m = compressed[0].nrows();
    let kappa = compressed.len();
    // nilpotent parts N_j = C_j - lambda_j
    let nil: Vec<CMat> = compressed
        .iter()
        .zip(&lambda.0)
        .map(|(c, &l)| c - &linalg::eye(m).mapv(|z| z * l))
        .collect();
    // geometric multiplicity: dim of the joint kernel on the weight space
    let mut stacked = Array2::zeros((kappa * m, m));
    for j in 0..kappa {
        stacked
            .slice_mut(s![j * m..(j + 1) * m, ..])
            .assign(&nil[j]);
    }
    let ref_scale = compressed.iter().map(linalg::frob).fold(0.0f64, f64::max);
    let ker = linalg::kernel_scaled(&stacked, 1e-8, ref_scale)?;
    let geom = ker.ncols().max(1).min(m);
    // Jordan order: smallest J with all degree-J monomials vanishing
    let nil_scale = nil
        .iter()
        .map(linalg::frob)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut jordan = m; // fallback
    'search: for j_ord in 1..=m {
        // all monomials of total degree j_ord
        let mut monomials: Vec<CMat> = vec![linalg::eye(m)];
        for _ in 0..j_ord {
            let mut next = Vec::new();
            for mono in &monomials {
                for njj in &nil {
                    next.push(mono.dot(njj));
                }
            }
            monomials = next;
        }
        let worst = monomials
            .iter()
            .map(linalg::frob)
            .fold(0.0f64, f64::max);
        if worst <= 1e-8 * nil_scale.powi(j_ord as i32).max(1e-30) * (m as f64) {
            jordan = j_ord;
            break 'search;
        }
    }
    Ok((geom, jordan))
}

/// Orthonormal basis of the generalized joint eigenspace at `lambda`:
/// the intersection of the kernels of `(X_j - lambda_j)^n`.
pub fn weight_space(tuple: &CommutingTuple, lambda: &CoForm, tol: f64) -> Result<CMat> {
    let n = tuple.dim();
    let kappa = tuple.kappa();
    let mut stacked = Array2::zeros((kappa * n, n));
    for j in 0..kappa {
        let shifted = tuple.mat(j) - &linalg::eye(n).mapv(|z| z * lambda.0[j]);
        let nrm = linalg::frob(&shifted);
        if nrm < tol {
            // the whole space is a weight space for this generator
            continue;
        }
        let b = shifted.mapv(|z| z / nrm);
        let mut p = b.clone();
        for _ in 1..n {
            p = p.dot(&b);
        }
        stacked.slice_mut(s![j * n..(j + 1) * n, ..]).assign(&p);
    }
    let ker = linalg::kernel_scaled(&stacked, tol, 1.0)?;
    Ok(ker)
}

/// Minimal `J` with `X^alpha(lambda)` annihilating the weight space for all
/// `|alpha| = J`. Errors when `lambda` is not a joint eigenvalue.
pub fn jordan_order(tuple: &CommutingTuple, lambda: &CoForm, tol: f64) -> Result<usize> {
    let w = weight_space(tuple, lambda, tol)?;
    if w.ncols() == 0 {
        return Err(Error::EmptyWeightSpace);
    }
    let wh = w.t().mapv(|z| z.conj());
    let compressed: Vec<CMat> = tuple
        .mats()
        .iter()
        .map(|m| wh.dot(&m.dot(&w)))
        .collect();
    let (_, jordan) = multiplicities(&compressed, lambda)?;
    Ok(jordan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorMethod {
    Contour,
    Power,
}

/// A spectral projector with its certification data.
#[derive(Debug, Clone)]
pub struct SpectralProjector {
    pub matrix: CMat,
    pub target: Complex64,
    pub method: ProjectorMethod,
    pub rank: usize,
    /// `|P^2 - P| / |P|`
    pub idempotency_defect: f64,
    /// geometric contraction rate observed by the power method, if used
    pub convergence_rate: Option<f64>,
}

fn certify(p: &CMat, generator: &CMat) -> (f64, f64) {
    let p2 = p.dot(p);
    let idem = linalg::frob(&(&p2 - p)) / linalg::frob(p).max(1e-300);
    let comm = &p.dot(generator) - &generator.dot(p);
    let comm_defect =
        linalg::frob(&comm) / (linalg::frob(p) * linalg::frob(generator)).max(1e-300);
    (idem, comm_defect)
}

/// Riesz projector of `F` at the eigenvalue `0` by trapezoid quadrature of
/// the resolvent over `|z| = eps`; spectrally accurate for analytic
/// integrands, node count configurable.
pub fn projector_contour(f_mat: &CMat, eps: f64, nodes: usize) -> Result<SpectralProjector> {
    let n = f_mat.nrows();
    let vals = linalg::eigvals(f_mat)?;
    // no eigenvalue may sit within 0.1*eps of the contour
    let mut closest = f64::INFINITY;
    for &v in vals.iter() {
        let d = (v.norm() - eps).abs();
        if d < closest {
            closest = d;
        }
    }
    if closest < 0.1 * eps {
        // suggest a radius in the widest modulus gap around eps
        let mut moduli: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = moduli.iter().copied().filter(|&x| x < eps).last().unwrap_or(0.0);
        let hi = moduli
            .iter()
            .copied()
            .find(|&x| x >= eps)
            .unwrap_or(2.0 * eps);
        let offender = moduli
            .iter()
            .copied()
            .min_by(|a, b| (a - eps).abs().partial_cmp(&(b - eps).abs()).unwrap())
            .unwrap_or(eps);
        return Err(Error::ContourTooClose {
            eps,
            closest: offender,
            suggestion: 0.5 * (lo + hi),
        });
    }
    let quad = |m: usize| -> Result<CMat> {
        let mut acc: CMat = Array2::zeros((n, n));
        for k in 0..m {
            let theta = std::f64::consts::TAU * (k as f64) / (m as f64);
            let z = Complex64::from_polar(eps, theta);
            let a = linalg::eye(n).mapv(|w| w * z) - f_mat;
            let r = linalg::solve_mat(&a, &linalg::eye(n))?;
            acc = &acc + &r.mapv(|w| w * z);
        }
        Ok(acc.mapv(|w| w / (m as f64)))
    };
    let p = quad(nodes)?;
    let p2 = quad(nodes * 2)?;
    let change = linalg::frob(&(&p2 - &p));
    if change > 1e-8 * linalg::frob(&p2).max(1.0) {
        return Err(Error::QuadratureNotConverged {
            change,
            nodes: nodes * 2,
        });
    }
    let p = p2;
    let rank_f: f64 = (0..n).map(|i| p[(i, i)].re).sum();
    let (idem, _) = certify(&p, f_mat);
    Ok(SpectralProjector {
        rank: rank_f.round().max(0.0) as usize,
        matrix: p,
        target: Complex64::new(0.0, 0.0),
        method: ProjectorMethod::Contour,
        idempotency_defect: idem,
        convergence_rate: None,
    })
}

/// Projector at the eigenvalue `1` as the limit of powers `R^k`, valid when
/// `1` is semisimple and the remaining spectrum is strictly contracting.
pub fn projector_power(r_mat: &CMat, max_iter: usize, tol: f64) -> Result<SpectralProjector> {
    let vals = linalg::eigvals(r_mat)?;
    let rho = vals.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if rho > 1.0 + tol {
        return Err(Error::SpectralRadiusExceeded { rho });
    }
    for &v in vals.iter() {
        if v.norm() >= 1.0 - tol && (v - Complex64::new(1.0, 0.0)).norm() > tol.max(1e-8) {
            return Err(Error::PeripheralEigenvalue {
                value: format!("{v}"),
            });
        }
    }
    // repeated squaring: M_k = R^(2^k); |M_{k+1} - M_k| must contract
    // geometrically, otherwise a Jordan block at 1 is present
    let mut m = r_mat.clone();
    let mut prev_diff = f64::INFINITY;
    let mut rate = None;
    let mut stagnations = 0usize;
    let doublings = (max_iter.max(2) as f64).log2().ceil() as usize + 1;
    for _ in 0..doublings.max(8) {
        let m2 = m.dot(&m);
        let diff = linalg::frob(&(&m2 - &m));
        if diff <= tol * linalg::frob(&m2).max(1.0) {
            let (idem, _) = certify(&m2, r_mat);
            let rank_f: f64 = (0..m2.nrows()).map(|i| m2[(i, i)].re).sum();
            return Ok(SpectralProjector {
                rank: rank_f.round().max(0.0) as usize,
                matrix: m2,
                target: Complex64::new(1.0, 0.0),
                method: ProjectorMethod::Power,
                idempotency_defect: idem,
                convergence_rate: rate,
            });
        }
        if prev_diff.is_finite() {
            let r = diff / prev_diff;
            rate = Some(r);
            if r > 0.9 {
                stagnations += 1;
                if stagnations >= 2 {
                    return Err(Error::PowerNotContracting { ratio: r });
                }
            } else {
                stagnations = 0;
            }
        }
        prev_diff = diff;
        m = m2;
    }
    Err(Error::PowerNotContracting {
        ratio: rate.unwrap_or(1.0),
    })
}
