//! From a large U² norm to a correlating partial affine representation.
//!
//! The pipeline: svd every Fourier block, keep the singular values above the
//! (c/2)^{1/2} cutoff (`extract_candidates`), concatenate the paired singular
//! vectors into (U₀, V₀) with a block-diagonal representation P (`assemble`),
//! and round both sides to partial unitaries by nuclear-norm-maximizing polar
//! steps (`round_to_partial_unitaries`). Each polar step realizes the best
//! correlating partial unitary exactly, so the final correlation dominates
//! the θ⁴ existential guarantee.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::{
    is_partial_unitary, normalized_p_dist, nuclear_norm, polar_partial_unitary, svd, CMatrix,
};
use crate::fourier::{fourier_transform, u2_norm4_direct, u2_norm4_fourier, MatrixFn};
use crate::irreps::IrrepTable;
use crate::{Error, Result};

/// τ(c) = max{ (c/2)^{1/2}, (c/(2−c))² } for c in (0, 1].
pub fn tau(c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 || c > 1.0 {
        return Err(Error::BadParameter(format!("tau needs c in (0,1], got {c}")));
    }
    Ok(((c / 2.0).sqrt()).max((c / (2.0 - c)).powi(2)))
}

/// Indices A = {i : aᵢ ≥ c/2} of a weighted sequence with first moment at
/// most n and second moment at least c·n. The survivors then satisfy
/// c·n/(2−c) ≤ Σ_A wᵢ ≤ (2−c)·n/c and Σ_A wᵢaᵢ ≥ c·n/(2−c).
///
/// The first moment equals n exactly when the values come from the squared
/// singular values of a unitary-valued function; bounded functions only reach
/// n from below, which the guarantees tolerate.
pub fn threshold_select(
    values: &[f64],
    weights: &[usize],
    n: usize,
    c: f64,
) -> Result<Vec<usize>> {
    if values.len() != weights.len() {
        return Err(Error::ShapeMismatch("values and weights must pair up".into()));
    }
    if c.is_nan() || c <= 0.0 || c > 1.0 {
        return Err(Error::BadParameter(format!("threshold needs c in (0,1], got {c}")));
    }
    if !values.iter().all(|&a| (-1e-9..=1.0 + 1e-9).contains(&a)) {
        return Err(Error::BadParameter("values must lie in [0,1]".into()));
    }
    let first: f64 = values.iter().zip(weights).map(|(a, &w)| a * w as f64).sum();
    let second: f64 = values.iter().zip(weights).map(|(a, &w)| a * a * w as f64).sum();
    let nf = n as f64;
    if first > nf + 1e-6 {
        return Err(Error::Precondition(format!(
            "weighted first moment {first:.9} exceeds n = {n}"
        )));
    }
    if second < c * nf - 1e-6 {
        return Err(Error::Precondition(format!(
            "weighted second moment {second:.9} below c·n = {:.9}",
            c * nf
        )));
    }
    let cut = c / 2.0;
    Ok((0..values.len()).filter(|&i| values[i] >= cut - 1e-12).collect())
}

/// One surviving singular triple of a Fourier block: λ together with the
/// singular-vector pair reshaped to n x n_ρ and scaled to squared
/// Hilbert-Schmidt norm n_ρ.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub irrep_index: usize,
    pub lambda: f64,
    pub u: CMatrix,
    pub v: CMatrix,
}

/// All candidates extracted from one function at one threshold c.
#[derive(Debug, Clone)]
pub struct SpectralSelection {
    pub n: usize,
    pub c: f64,
    pub candidates: Vec<Candidate>,
    /// dimension of the irrep behind each candidate
    pub dims: Vec<usize>,
}

impl SpectralSelection {
    /// Σ n_ρᵢ over all candidates: the dimension of the assembled rep.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Σ n_ρᵢ λᵢ²: condition-4 quantity of the selection.
    pub fn weighted_sq_mass(&self) -> f64 {
        self.candidates
            .iter()
            .zip(&self.dims)
            .map(|(cand, &d)| d as f64 * cand.lambda * cand.lambda)
            .sum()
    }

    /// Σ n_ρᵢ λᵢ: the correlation the assembled triple achieves.
    pub fn weighted_mass(&self) -> f64 {
        self.candidates
            .iter()
            .zip(&self.dims)
            .map(|(cand, &d)| d as f64 * cand.lambda)
            .sum()
    }
}

/// Svd every Fourier block and keep the singular values with λ² ≥ c/2.
pub fn extract_candidates(
    f: &MatrixFn,
    table: &IrrepTable,
    c: f64,
) -> Result<SpectralSelection> {
    let n = f.n();
    let sup = f.max_op_norm();
    if sup > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "sup_x ‖f(x)‖_op must be at most 1, measured {sup:.9}"
        )));
    }
    let coeffs = fourier_transform(f, table)?;
    let svds: Vec<_> = coeffs.blocks().iter().map(svd).collect::<Result<_>>()?;

    let u2_4: f64 = svds
        .iter()
        .zip(coeffs.irrep_dims())
        .map(|(s, &d)| d as f64 * s.singulars.iter().map(|x| x.powi(4)).sum::<f64>())
        .sum();
    if u2_4 < c * n as f64 - 1e-9 {
        return Err(Error::Precondition(format!(
            "‖f‖⁴_U² = {u2_4:.9} below c·n = {:.9}",
            c * n as f64
        )));
    }

    // flatten (irrep, singular index) with squared values for the selection lemma
    let mut values = Vec::new();
    let mut weights = Vec::new();
    let mut origin = Vec::new();
    for (ri, s) in svds.iter().enumerate() {
        let d = coeffs.irrep_dims()[ri];
        for (k, &sv) in s.singulars.iter().enumerate() {
            values.push((sv * sv).min(1.0));
            weights.push(d);
            origin.push((ri, k));
        }
    }
    let picked = threshold_select(&values, &weights, n, c)?;

    let mut candidates = Vec::new();
    let mut dims = Vec::new();
    for &i in &picked {
        let (ri, k) = origin[i];
        let d = coeffs.irrep_dims()[ri];
        let s = &svds[ri];
        let scale = (d as f64).sqrt();
        let u = CMatrix::from_vec_rowmajor(n, d, &s.right.column(k)).scale(scale);
        let v = CMatrix::from_vec_rowmajor(n, d, &s.left.column(k)).scale(scale);
        candidates.push(Candidate { irrep_index: ri, lambda: s.singulars[k], u, v });
        dims.push(d);
    }
    Ok(SpectralSelection { n, c, candidates, dims })
}

/// The concatenated triple (U₀ | V₀ | P) with Λ = ⊕ λᵢ I_{n_ρᵢ}.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub u0: CMatrix,
    pub v0: CMatrix,
    pub p: MatrixFn,
    pub lambda: CMatrix,
}

/// Stacks the candidate blocks into U₀ = (U₁|…|U_m), V₀ likewise, and the
/// block-diagonal representation P(x) = ρ₁(x) ⊕ … ⊕ ρ_m(x).
pub fn assemble(sel: &SpectralSelection, table: &IrrepTable) -> Result<Assembled> {
    if sel.candidates.is_empty() {
        return Err(Error::Precondition("selection is empty".into()));
    }
    let us: Vec<&CMatrix> = sel.candidates.iter().map(|c| &c.u).collect();
    let vs: Vec<&CMatrix> = sel.candidates.iter().map(|c| &c.v).collect();
    let u0 = CMatrix::hstack(&us);
    let v0 = CMatrix::hstack(&vs);

    let m = sel.total_dim();
    let group = Arc::clone(table.group());
    let p = MatrixFn::from_fn(Arc::clone(&group), |x| {
        let mut out = CMatrix::zeros(m, m);
        let mut at = 0;
        for cand in &sel.candidates {
            let rho = &table.irreps()[cand.irrep_index];
            out.set_block(at, at, rho.matrix(x));
            at += rho.dim();
        }
        out
    })?;

    let mut lam = Vec::with_capacity(m);
    for (cand, &d) in sel.candidates.iter().zip(&sel.dims) {
        lam.extend(std::iter::repeat_n(cand.lambda, d));
    }
    Ok(Assembled { u0, v0, p, lambda: CMatrix::diag_real(&lam) })
}

/// A map x ↦ V·P(x)·U* with partial unitary U, V and a genuine
/// representation P.
#[derive(Debug, Clone)]
pub struct PartialAffineRep {
    pub n: usize,
    pub m: usize,
    pub u: CMatrix,
    pub v: CMatrix,
    pub p: MatrixFn,
}

impl PartialAffineRep {
    pub fn eval(&self, x: usize) -> CMatrix {
        self.v.mul(self.p.value(x)).mul(&self.u.adjoint())
    }

    pub fn to_matrix_fn(&self) -> MatrixFn {
        MatrixFn::from_fn(Arc::clone(self.p.group()), |x| self.eval(x))
            .expect("partial affine rep evaluates to square matrices")
    }

    /// E_x ⟨f(x), V P(x) U*⟩.
    pub fn correlation(&self, f: &MatrixFn) -> Result<Complex64> {
        if f.group().fingerprint() != self.p.group().fingerprint() || f.n() != self.n {
            return Err(Error::GroupMismatch("correlation needs matching group and n".into()));
        }
        let g = f.group().as_ref();
        let total: Complex64 = g.elements().map(|x| f.value(x).hs_inner(&self.eval(x))).sum();
        Ok(total / g.order() as f64)
    }

    /// η in the approximate multiplicativity bound for quadruples:
    /// 0 when m ≤ n, otherwise 2((m−n)/n)^{1/p}.
    pub fn eta_bound(&self, p_norm: f64) -> f64 {
        if self.m <= self.n {
            0.0
        } else {
            2.0 * ((self.m - self.n) as f64 / self.n as f64).powf(1.0 / p_norm)
        }
    }

    /// Worst ‖σ(x)σ(y)*σ(z) − σ(w)‖'_p over the constrained quadruples;
    /// cost |G|³.
    pub fn flexible_defect(&self, p_norm: f64) -> f64 {
        let g = self.p.group().as_ref();
        let vals: Vec<CMatrix> = g.elements().map(|x| self.eval(x)).collect();
        let mut worst: f64 = 0.0;
        for (x, y, z, w) in g.quadruples() {
            let lhs = vals[x].mul(&vals[y].adjoint()).mul(&vals[z]);
            worst = worst.max(normalized_p_dist(&lhs, &vals[w], p_norm));
        }
        worst
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        is_partial_unitary(&self.u, tol)
            && is_partial_unitary(&self.v, tol)
            && self.p.multiplicativity_residual() < 1e-9
    }
}

/// Max over random trial matrices W of E_x ‖W P(x) U₀*‖_nuc / ‖W‖_nuc.
/// Stays at most 1 when the blocks of U₀ have the orthogonality and norm
/// structure produced by `extract_candidates`.
pub fn nuclear_contraction_check(
    u0: &CMatrix,
    p: &MatrixFn,
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = p.group().as_ref();
    let (n, m) = u0.shape();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let w = CMatrix::random_gaussian(&mut rng, n, m);
        worst = worst.max(contraction_ratio(&w, u0, p, g.order()));
    }
    worst
}

fn contraction_ratio(w: &CMatrix, u0: &CMatrix, p: &MatrixFn, order: usize) -> f64 {
    let mut avg = 0.0;
    for x in 0..order {
        avg += nuclear_norm(&w.mul(p.value(x)).mul(&u0.adjoint()));
    }
    avg / order as f64 / nuclear_norm(w)
}

/// Polar-rounds V then U to partial unitaries, returning the rep together
/// with its (real, non-negative) correlation against f. Starting correlation
/// θ·m is never degraded below θ⁴·m.
pub fn round_to_partial_unitaries(
    f: &MatrixFn,
    u0: &CMatrix,
    v0: &CMatrix,
    p: &MatrixFn,
) -> Result<(PartialAffineRep, f64)> {
    let n = f.n();
    let m = u0.cols();
    if v0.shape() != (n, m) || u0.rows() != n || p.n() != m {
        return Err(Error::ShapeMismatch("round expects n x m blocks and an m-dim rep".into()));
    }
    let vhs = v0.hs_norm_sq();
    if vhs > m as f64 * (1.0 + 1e-9) {
        return Err(Error::Precondition(format!("‖V₀‖²_HS = {vhs:.9} exceeds m = {m}")));
    }
    let g = f.group().as_ref();
    let order = g.order() as f64;

    let corr0 = {
        let mut avg = CMatrix::zeros(n, m);
        for x in g.elements() {
            avg = avg.add(&f.value(x).mul(u0).mul(&p.value(x).adjoint()));
        }
        avg.scale(1.0 / order).hs_inner(v0).norm()
    };
    if corr0 <= 1e-12 {
        return Err(Error::Precondition(
            "starting correlation is zero; nothing to round".into(),
        ));
    }

    // step 1: optimal partial unitary on the V side
    let mut m1 = CMatrix::zeros(n, m);
    for x in g.elements() {
        m1 = m1.add(&f.value(x).mul(u0).mul(&p.value(x).adjoint()));
    }
    m1 = m1.scale(1.0 / order);
    let v_new = polar_partial_unitary(&m1);

    // step 2: optimal partial unitary on the U side
    let mut m2 = CMatrix::zeros(n, m);
    for x in g.elements() {
        m2 = m2.add(&f.value(x).adjoint().mul(&v_new).mul(p.value(x)));
    }
    m2 = m2.scale(1.0 / order);
    let u_new = polar_partial_unitary(&m2);
    let correlation = nuclear_norm(&m2);

    let rep = PartialAffineRep { n, m, u: u_new, v: v_new, p: p.clone() };
    Ok((rep, correlation))
}

/// Everything the inverse theorem promises about one run.
#[derive(Debug, Clone)]
pub struct InverseOutcome {
    pub rep: PartialAffineRep,
    pub correlation: f64,
    pub m: usize,
    pub c: f64,
    /// τ(c)⁴·m, the certified correlation floor
    pub tau4_bound: f64,
    /// [c·n/(2−c), (2−c)·n/c], the certified window for m
    pub m_window: (f64, f64),
    /// intermediate correlation Σ n_ρᵢ λᵢ of the unrounded triple
    pub pre_rounding_correlation: f64,
    /// ‖E_x f(x)U₀P(x)*‖_nuc after the first polar step
    pub v_step_correlation: f64,
}

/// Runs extraction, assembly and rounding for a function with sup operator
/// norm at most 1 and ‖f‖⁴_U² ≥ c·n.
pub fn inverse_theorem(f: &MatrixFn, table: &IrrepTable, c: f64) -> Result<InverseOutcome> {
    let t = tau(c)?;
    let sel = extract_candidates(f, table, c)?;
    let asm = assemble(&sel, table)?;
    let m = sel.total_dim();

    let mut m1 = CMatrix::zeros(f.n(), m);
    let g = f.group().as_ref();
    for x in g.elements() {
        m1 = m1.add(&f.value(x).mul(&asm.u0).mul(&asm.p.value(x).adjoint()));
    }
    m1 = m1.scale(1.0 / g.order() as f64);
    let v_step_correlation = nuclear_norm(&m1);

    let (rep, correlation) = round_to_partial_unitaries(f, &asm.u0, &asm.v0, &asm.p)?;
    let nf = f.n() as f64;
    Ok(InverseOutcome {
        rep,
        correlation,
        m,
        c,
        tau4_bound: t.powi(4) * m as f64,
        m_window: (c * nf / (2.0 - c), (2.0 - c) * nf / c),
        pre_rounding_correlation: sel.weighted_mass(),
        v_step_correlation,
    })
}

/// Converse direction: a correlation of c·m against a partial affine rep
/// forces ‖f‖⁴_U² ≥ c⁴·m. Returns (passed, measured fourth power, bound).
pub fn converse_check(
    f: &MatrixFn,
    rep: &PartialAffineRep,
    c: f64,
    table: Option<&IrrepTable>,
) -> Result<(bool, f64, f64)> {
    let corr = rep.correlation(f)?.norm();
    let m = rep.m as f64;
    if corr < c * m - 1e-9 {
        return Err(Error::Precondition(format!(
            "correlation {corr:.9} below c·m = {:.9}",
            c * m
        )));
    }
    let u2_4 = match table {
        Some(t) => u2_norm4_fourier(f, t)?,
        None => u2_norm4_direct(f)?,
    };
    let bound = c.powi(4) * m;
    Ok((u2_4 >= bound - 1e-6, u2_4, bound))
}
