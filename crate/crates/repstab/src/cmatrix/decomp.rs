//! Jacobi decompositions: one-sided SVD for general complex matrices and a
//! two-sided eigensolver for Hermitian ones, plus polar rounding and
//! orthonormal completions built on top of them.
//!
//! Sweeps run in a fixed (p, q) order so results are reproducible, and each
//! left singular vector is normalized so its first nonzero entry is real and
//! non-negative.

use num_complex::Complex64;

use super::CMatrix;
use crate::{Error, Result};

/// Off-diagonal convergence threshold, relative to the local column scale.
const JACOBI_TOL: f64 = 1e-13;
/// Sweep cap multiplier; exceeding it signals pathologically conditioned input.
const SWEEP_CAP_FACTOR: usize = 100;

/// Singular value decomposition A = left · diag(singulars) · right*.
///
/// `left` is rows x k and `right` is cols x k with k = min(rows, cols); both
/// have orthonormal columns (zero singular directions carry a completed
/// orthonormal basis), and `singulars` is sorted descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: CMatrix,
    pub singulars: Vec<f64>,
    pub right: CMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMatrix {
        let k = self.singulars.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            for i in 0..scaled.rows() {
                let v = scaled.at(i, j) * self.singulars[j];
                scaled.set(i, j, v);
            }
        }
        scaled.mul(&self.right.adjoint())
    }
}

/// 2x2 symmetric Schur rotation (c, s) diagonalizing [[a, g], [g, b]]
/// via [[c, s], [-s, c]], g > 0.
fn schur2(a: f64, b: f64, g: f64) -> (f64, f64) {
    let tau = (b - a) / (2.0 * g);
    // the asymptotic branch keeps tau² from overflowing, which would turn
    // the rotation into a no-op and stall the sweep
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

/// One-sided Jacobi SVD.
pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(SvdResult { left: t.right, singulars: t.singulars, right: t.left });
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let cap = SWEEP_CAP_FACTOR * m.max(n);
    let mut converged = false;
    for _sweep in 0..cap {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w.at(i, p);
                    let wq = w.at(i, q);
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() || g < 1e-300 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // e^{i phi}
                let (c, s) = schur2(alpha, beta, g);
                let pc = phase.conj();
                for i in 0..m {
                    let wp = w.at(i, p);
                    let wq = pc * w.at(i, q);
                    w.set(i, p, wp * c - wq * s);
                    w.set(i, q, wp * s + wq * c);
                }
                for i in 0..n {
                    let vp = v.at(i, p);
                    let vq = pc * v.at(i, q);
                    v.set(i, p, vp * c - vq * s);
                    v.set(i, q, vp * s + vq * c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && n > 1 {
        return Err(Error::NonConvergence(format!(
            "svd sweep cap {cap} hit on a {m}x{n} matrix"
        )));
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w.at(i, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    sigma = order.iter().map(|&j| sigma[j]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let rank_floor = sigma_max * 1e-13;

    let mut left = CMatrix::zeros(m, n);
    let mut right = CMatrix::zeros(n, n);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            right.set(i, dst, v.at(i, src));
        }
        if sigma[dst] > rank_floor && sigma[dst] > 0.0 {
            for i in 0..m {
                left.set(i, dst, w.at(i, src) / sigma[dst]);
            }
        } else {
            deficient.push(dst);
        }
    }
    if !deficient.is_empty() {
        let good: Vec<usize> = (0..n).filter(|j| !deficient.contains(j)).collect();
        let base = CMatrix::from_fn(m, good.len().max(1), |i, j| {
            if good.is_empty() {
                Complex64::new(0.0, 0.0)
            } else {
                left.at(i, good[j])
            }
        });
        let fill = if good.is_empty() {
            canonical_orthonormal(m, deficient.len())
        } else {
            complete_some_columns(&base, deficient.len())
        };
        for (k, &dst) in deficient.iter().enumerate() {
            for i in 0..m {
                left.set(i, dst, fill.at(i, k));
            }
        }
    }

    // phase convention: first nonzero entry of each left vector real >= 0
    for j in 0..n {
        let col_max = (0..m).map(|i| left.at(i, j).norm()).fold(0.0, f64::max);
        if col_max == 0.0 {
            continue;
        }
        let lead = (0..m).find(|&i| left.at(i, j).norm() > 1e-12 * col_max).unwrap_or(0);
        let z = left.at(lead, j);
        if z.norm() > 0.0 {
            let phase = (z / z.norm()).conj();
            for i in 0..m {
                let lv = left.at(i, j) * phase;
                left.set(i, j, lv);
            }
            for i in 0..right.rows() {
                let rv = right.at(i, j) * phase;
                right.set(i, j, rv);
            }
        }
    }

    Ok(SvdResult { left, singulars: sigma, right })
}

/// Singular values only, descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.singulars)
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// orthonormal eigenvector columns. The input must be Hermitian within
/// 1e-10 relative to its magnitude.
pub fn herm_eig(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch("herm_eig needs a square matrix".into()));
    }
    let n = h.rows();
    let scale = h.max_abs().max(1.0);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((h.at(i, j) - h.at(j, i).conj()).norm());
        }
    }
    if asym > 1e-10 * scale {
        return Err(Error::BadParameter(format!(
            "matrix is not Hermitian: asymmetry {asym:.3e} at scale {scale:.3e}"
        )));
    }
    // symmetrize away roundoff before iterating
    let mut a = h.add(&h.adjoint()).scale(0.5);
    let mut v = CMatrix::identity(n);
    let cap = SWEEP_CAP_FACTOR * n;
    let off_scale = a.hs_norm().max(1e-300);
    let mut converged = n <= 1;
    for _sweep in 0..cap {
        if n <= 1 {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.at(p, q);
                let g = apq.norm();
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                let local = (app.abs() + aqq.abs()).max(off_scale * 1e-3);
                if g <= JACOBI_TOL * local || g < 1e-300 {
                    continue;
                }
                rotated = true;
                let phase = apq / g;
                let (c, s) = schur2(app, aqq, g);
                let pc = phase.conj();
                // column update A <- A J
                for i in 0..n {
                    let ap = a.at(i, p);
                    let aq = pc * a.at(i, q);
                    a.set(i, p, ap * c - aq * s);
                    a.set(i, q, ap * s + aq * c);
                }
                // row update A <- J* A
                for j in 0..n {
                    let rp = a.at(p, j);
                    let rq = phase * a.at(q, j);
                    a.set(p, j, rp * c - rq * s);
                    a.set(q, j, rp * s + rq * c);
                }
                for i in 0..n {
                    let vp = v.at(i, p);
                    let vq = pc * v.at(i, q);
                    v.set(i, p, vp * c - vq * s);
                    v.set(i, q, vp * s + vq * c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!("herm_eig sweep cap {cap} hit")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v.at(i, order[j]));
    Ok((values, vectors))
}

/// Replaces every singular value by 1: the partial unitary (unitary, for
/// square input) maximizing Re tr(A W*) over partial unitaries W. Zero
/// singular directions are completed with an arbitrary orthonormal basis.
pub fn polar_partial_unitary(a: &CMatrix) -> CMatrix {
    let s = svd(a).expect("svd did not converge in polar rounding");
    s.left.mul(&s.right.adjoint())
}

/// Orthonormal basis of the complement: given n x k with orthonormal columns,
/// returns n x (n-k) columns completing it to an orthonormal basis.
pub fn complete_orthonormal_columns(basis: &CMatrix) -> CMatrix {
    let (n, k) = basis.shape();
    assert!(k < n, "nothing to complete");
    complete_some_columns(basis, n - k)
}

/// Greedy Gram-Schmidt completion of `count` extra columns against `basis`.
fn complete_some_columns(basis: &CMatrix, count: usize) -> CMatrix {
    let (n, k) = basis.shape();
    let zero_base = k == 1 && basis.max_abs() == 0.0; // placeholder empty basis
    let cols: Vec<Vec<Complex64>> = if zero_base {
        Vec::new()
    } else {
        (0..k).map(|j| basis.column(j)).collect()
    };
    let mut added = Vec::new();
    for _ in 0..count {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for cand in 0..n {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[cand] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for col in cols.iter().chain(added.iter()) {
                    let proj: Complex64 = col.iter().zip(&v).map(|(u, x)| u.conj() * x).sum();
                    for i in 0..n {
                        v[i] -= proj * col[i];
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("dimension available for completion");
        assert!(norm > 1e-8, "completion failed: basis nearly spans the space");
        for z in &mut v {
            *z /= norm;
        }
        added.push(v);
    }
    CMatrix::from_fn(n, count, |i, j| added[j][i])
}

fn canonical_orthonormal(n: usize, count: usize) -> CMatrix {
    CMatrix::from_fn(n, count, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Extends an n x m partial unitary to a square unitary of size max(n, m) by
/// appending columns (m < n) or rows (m > n); the input occupies the leading
/// block of the result.
pub fn unitary_completion(u: &CMatrix) -> CMatrix {
    let (n, m) = u.shape();
    if n == m {
        return u.clone();
    }
    if m < n {
        let ext = complete_orthonormal_columns(u);
        CMatrix::hstack(&[u, &ext])
    } else {
        let ut = u.adjoint();
        let ext = complete_orthonormal_columns(&ut);
        CMatrix::hstack(&[&ut, &ext]).adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_svd(a: &CMatrix, tol: f64) {
        let s = svd(a).unwrap();
        let k = a.rows().min(a.cols());
        assert_eq!(s.singulars.len(), k);
        for w in s.singulars.windows(2) {
            assert!(w[0] >= w[1] - 1e-15, "singular values not sorted: {:?}", s.singulars);
        }
        assert!(s.singulars.iter().all(|&x| x >= 0.0));
        let resid = s.reconstruct().sub(a).hs_norm();
        assert!(resid <= tol * a.hs_norm().max(1e-12), "reconstruction residual {resid}");
        let lo = s.left.adjoint().mul(&s.left).sub(&CMatrix::identity(k)).max_abs();
        let ro = s.right.adjoint().mul(&s.right).sub(&CMatrix::identity(k)).max_abs();
        assert!(lo < 1e-10, "left orthonormality {lo}");
        assert!(ro < 1e-10, "right orthonormality {ro}");
    }

    #[test]
    fn svd_identity_and_diag() {
        let s = svd(&CMatrix::identity(3)).unwrap();
        for &x in &s.singulars {
            assert!((x - 1.0).abs() < 1e-14);
        }
        let d = CMatrix::diag_real(&[2.0, 0.5]);
        let s = svd(&d).unwrap();
        assert!((s.singulars[0] - 2.0).abs() < 1e-14);
        assert!((s.singulars[1] - 0.5).abs() < 1e-14);
        check_svd(&d, 1e-12);
    }

    #[test]
    fn svd_matches_hermitian_eigen_oracle() {
        // singular values of A must be the square roots of the eigenvalues
        // of A A*, computed by the independent Hermitian solver
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = CMatrix::random_gaussian(&mut rng, 4, 7);
        check_svd(&a, 1e-10);
        let s = svd(&a).unwrap();
        let gram = a.mul(&a.adjoint());
        let (mut evals, _) = herm_eig(&gram).unwrap();
        evals.reverse();
        for (sv, ev) in s.singulars.iter().zip(evals.iter()) {
            assert!((sv * sv - ev).abs() < 1e-9 * (1.0 + ev.abs()), "{sv} vs {ev}");
        }
    }

    #[test]
    fn svd_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &(m, n) in &[(1, 1), (1, 5), (5, 1), (3, 3), (6, 2), (2, 6), (8, 8)] {
            let a = CMatrix::random_gaussian(&mut rng, m, n);
            check_svd(&a, 1e-10);
        }
    }

    #[test]
    fn svd_rank_deficient_completes_basis() {
        // rank-1 3x3
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = CMatrix::random_gaussian(&mut rng, 3, 1);
        let v = CMatrix::random_gaussian(&mut rng, 3, 1);
        let a = u.mul(&v.adjoint());
        check_svd(&a, 1e-10);
        let s = svd(&a).unwrap();
        assert!(s.singulars[1] < 1e-12 * s.singulars[0]);
        // zero matrix
        check_svd(&CMatrix::zeros(3, 2), 1e-10);
    }

    #[test]
    fn svd_phase_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = CMatrix::random_gaussian(&mut rng, 4, 4);
        let s1 = svd(&a).unwrap();
        let s2 = svd(&a).unwrap();
        assert!(s1.left.sub(&s2.left).max_abs() == 0.0);
        // leading entries real non-negative
        for j in 0..4 {
            let lead = (0..4).find(|&i| s1.left.at(i, j).norm() > 1e-9).unwrap();
            let z = s1.left.at(lead, j);
            assert!(z.im.abs() < 1e-12 && z.re >= 0.0);
        }
    }

    #[test]
    fn herm_eig_diag_and_random() {
        let (vals, _) = herm_eig(&CMatrix::diag_real(&[3.0, 1.0])).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-13 && (vals[1] - 3.0).abs() < 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = CMatrix::random_hermitian(&mut rng, 6);
        let (vals, vecs) = herm_eig(&h).unwrap();
        // ascending
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        // H V = V D and orthonormal V
        let d = CMatrix::diag_real(&vals);
        let resid = h.mul(&vecs).sub(&vecs.mul(&d)).max_abs();
        assert!(resid < 1e-10, "eigen residual {resid}");
        let ortho = vecs.adjoint().mul(&vecs).sub(&CMatrix::identity(6)).max_abs();
        assert!(ortho < 1e-10);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = CMatrix::random_gaussian(&mut rng, 3, 3);
        assert!(herm_eig(&a).is_err());
    }

    #[test]
    fn polar_examples() {
        // already positive diagonal
        let d = CMatrix::diag_real(&[0.5, 2.0]);
        assert!(polar_partial_unitary(&d).sub(&CMatrix::identity(2)).max_abs() < 1e-12);
        // unitary input is a fixed point
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = CMatrix::random_unitary(&mut rng, 3);
        assert!(polar_partial_unitary(&u).sub(&u).max_abs() < 1e-9);
        // trace identity tr(A out*) = sum of singular values
        let a = CMatrix::random_gaussian(&mut rng, 3, 5);
        let out = polar_partial_unitary(&a);
        let s = svd(&a).unwrap();
        let total: f64 = s.singulars.iter().sum();
        let tr = a.hs_inner(&out);
        assert!((tr.re - total).abs() < 1e-9 && tr.im.abs() < 1e-9);
    }

    #[test]
    fn polar_maximizes_over_random_partial_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = CMatrix::random_gaussian(&mut rng, 2, 4);
        let out = polar_partial_unitary(&a);
        let best = a.hs_inner(&out).re;
        for _ in 0..100 {
            // random partial unitary from Gram-Schmidt, independent of svd
            let w = CMatrix::random_unitary(&mut rng, 4).block(0, 0, 2, 4);
            let val = a.hs_inner(&w).norm();
            assert!(val <= best + 1e-9, "random candidate beat polar: {val} > {best}");
        }
    }

    #[test]
    fn unitary_completion_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let q = CMatrix::random_unitary(&mut rng, 5);
        // tall: orthonormal columns
        let cols = q.block(0, 0, 5, 2);
        let full = unitary_completion(&cols);
        assert_eq!(full.shape(), (5, 5));
        assert!(full.adjoint().mul(&full).sub(&CMatrix::identity(5)).max_abs() < 1e-9);
        assert!(full.block(0, 0, 5, 2).sub(&cols).max_abs() == 0.0);
        // wide: orthonormal rows
        let rows = q.block(0, 0, 2, 5);
        let full = unitary_completion(&rows);
        assert_eq!(full.shape(), (5, 5));
        assert!(full.adjoint().mul(&full).sub(&CMatrix::identity(5)).max_abs() < 1e-9);
        assert!(full.block(0, 0, 2, 5).sub(&rows).max_abs() == 0.0);
    }
}
