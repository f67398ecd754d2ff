//! Singular-value functionals: Schatten norms, the box norm, nuclear/operator
//! duality, partial unitary tests, and the constructive soft-threshold split
//! of a matrix into a small-operator-norm part plus a small-nuclear-norm part.

use super::decomp::{singular_values, svd};
use super::CMatrix;
use crate::{Error, Result};

/// Schatten p-norm (Σ λᵢᵖ)^{1/p} for p in [1, ∞]; p = ∞ gives the operator
/// norm. The normalized variant divides by rows^{1/p}.
pub fn schatten_norm(a: &CMatrix, p: f64, normalized: bool) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::BadParameter(format!("schatten norm needs p >= 1, got {p}")));
    }
    let sv = singular_values(a)?;
    Ok(schatten_from_singulars(&sv, p, if normalized { Some(a.rows()) } else { None }))
}

/// Same as [`schatten_norm`] but on a precomputed singular value list;
/// `normalized_dim` is the dimension used for normalization when present.
pub fn schatten_from_singulars(sv: &[f64], p: f64, normalized_dim: Option<usize>) -> f64 {
    let raw = if p.is_infinite() {
        sv.iter().copied().fold(0.0, f64::max)
    } else if (p - 1.0).abs() < 1e-15 {
        sv.iter().sum()
    } else if (p - 2.0).abs() < 1e-15 {
        sv.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        sv.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    match normalized_dim {
        Some(n) if !p.is_infinite() => raw / (n as f64).powf(1.0 / p),
        _ => raw,
    }
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).expect("svd did not converge in op_norm")[0].max(0.0)
}

/// Nuclear norm (sum of singular values).
pub fn nuclear_norm(a: &CMatrix) -> f64 {
    singular_values(a).expect("svd did not converge in nuclear_norm").iter().sum()
}

/// Normalized Schatten-p distance ‖a − b‖'_p, the workhorse metric of the
/// stability pipeline. Falls back to a closed form at p = 2.
pub fn normalized_p_dist(a: &CMatrix, b: &CMatrix, p: f64) -> f64 {
    let d = a.sub(b);
    if (p - 2.0).abs() < 1e-15 {
        (d.hs_norm_sq() / d.rows() as f64).sqrt()
    } else {
        schatten_norm(&d, p, true).expect("p validated by caller")
    }
}

/// Fourth power of the box norm: tr(AA*AA*) = Σ λᵢ⁴ = ‖AA*‖²_HS.
pub fn box_norm4(a: &CMatrix) -> f64 {
    a.mul(&a.adjoint()).hs_norm_sq()
}

/// Returns (|tr(AB*)|, ‖A‖_op · ‖B‖_nuc); the first never exceeds the second.
pub fn nuclear_op_duality_check(a: &CMatrix, b: &CMatrix) -> Result<(f64, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "duality check needs equal shapes, got {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok((a.hs_inner(b).norm(), op_norm(a) * nuclear_norm(b)))
}

/// True iff every singular value lies within `tol` of 1.
pub fn is_partial_unitary(a: &CMatrix, tol: f64) -> bool {
    singular_values(a)
        .map(|sv| sv.iter().all(|&x| (x - 1.0).abs() <= tol))
        .unwrap_or(false)
}

/// Splits A = A' + A'' by clipping singular values at s = C/2: A' keeps
/// min(λ, s) and A'' the excess (λ − s)₊, so that
/// C⁻¹‖A'‖_op + C m⁻¹‖A''‖_nuc ≤ 1 whenever ‖A‖²_HS ≤ m.
pub fn soft_threshold_split(a: &CMatrix, c: f64, m: usize) -> Result<(CMatrix, CMatrix)> {
    if c <= 0.0 {
        return Err(Error::BadParameter(format!("threshold constant must be positive, got {c}")));
    }
    let hs_sq = a.hs_norm_sq();
    if hs_sq > m as f64 * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Precondition(format!(
            "soft_threshold_split needs ‖A‖²_HS ≤ m: got {hs_sq:.6} > {m}"
        )));
    }
    let s = svd(a)?;
    let cut = c / 2.0;
    let clipped: Vec<f64> = s.singulars.iter().map(|&x| x.min(cut)).collect();
    let excess: Vec<f64> = s.singulars.iter().map(|&x| (x - cut).max(0.0)).collect();
    let rebuild = |vals: &[f64]| {
        let mut scaled = s.left.clone();
        for (j, &val) in vals.iter().enumerate() {
            for i in 0..scaled.rows() {
                let v = scaled.at(i, j) * val;
                scaled.set(i, j, v);
            }
        }
        scaled.mul(&s.right.adjoint())
    };
    Ok((rebuild(&clipped), rebuild(&excess)))
}
