//! Complete tables of irreducible unitary representations.
//!
//! The decomposition is randomized but certified: a seeded random Hermitian
//! matrix is averaged into the commutant of the regular representation, its
//! eigenspaces split off subrepresentations, and the recursion bottoms out
//! when the character norm certifies irreducibility. Correctness is checked
//! by the Schur delta identity and character orthogonality, so the
//! certificates hold regardless of how the table was produced.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::{herm_eig, polar_partial_unitary, CMatrix};
use crate::fourier::MatrixFn;
use crate::group::FiniteGroup;
use crate::{Error, Result};

/// Relative tolerance for clustering eigenvalues of an averaged Hermitian.
const EIG_CLUSTER_TOL: f64 = 1e-8;
/// Character-norm tolerance certifying irreducibility.
const IRREDUCIBLE_TOL: f64 = 1e-6;
/// Attempts at splitting a reducible block before giving up.
const MAX_RESEEDS: usize = 5;

/// One irreducible unitary representation: a dim x dim unitary matrix per
/// group element, plus its character.
#[derive(Debug, Clone)]
pub struct Irrep {
    dim: usize,
    matrices: Vec<CMatrix>,
    character: Vec<Complex64>,
}

impl Irrep {
    fn from_matrices(matrices: Vec<CMatrix>) -> Self {
        let dim = matrices[0].rows();
        let character = matrices.iter().map(|m| m.trace()).collect();
        Irrep { dim, matrices, character }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, x: usize) -> &CMatrix {
        &self.matrices[x]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn character(&self) -> &[Complex64] {
        &self.character
    }

    /// (1/|G|) Σ_x |χ(x)|²; equals 1 exactly when irreducible.
    pub fn character_norm_sq(&self) -> f64 {
        self.character.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.character.len() as f64
    }

    /// Max over pairs of ‖ρ(x)ρ(y) − ρ(xy)‖_max; exhaustive for orders up to
    /// 512, on a fixed pseudorandom sample of pairs beyond that.
    pub fn multiplicativity_residual(&self, g: &FiniteGroup) -> f64 {
        let o = g.order();
        let mut worst: f64 = 0.0;
        let check = |x: usize, y: usize, worst: &mut f64| {
            let prod = self.matrices[x].mul(&self.matrices[y]);
            let d = prod.sub(&self.matrices[g.mul(x, y)]).max_abs();
            if d > *worst {
                *worst = d;
            }
        };
        if o <= 512 {
            for x in 0..o {
                for y in 0..o {
                    check(x, y, &mut worst);
                }
            }
        } else {
            let mut state = 0x2545f4914f6cdd1du64;
            for _ in 0..8192 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = (state >> 33) as usize % o;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let y = (state >> 33) as usize % o;
                check(x, y, &mut worst);
            }
        }
        worst
    }

    /// Max over elements of ‖ρ(x)*ρ(x) − I‖_max.
    pub fn unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.dim);
        self.matrices
            .iter()
            .map(|m| m.adjoint().mul(m).sub(&id).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Residuals recorded while certifying a table.
#[derive(Debug, Clone, Copy)]
pub struct TableCertificate {
    /// max_x |Σ_ρ n_ρ χ_ρ(x) − |G|·δ_{x=e}|
    pub schur_delta: f64,
    /// max over pairs of distinct irreps of |⟨χ_ρ, χ_σ⟩| / |G|
    pub character_orthogonality: f64,
    pub multiplicativity: f64,
    pub unitarity: f64,
}

/// A complete list of pairwise-inequivalent irreducible unitary
/// representations of one group.
#[derive(Debug, Clone)]
pub struct IrrepTable {
    group: Arc<FiniteGroup>,
    irreps: Vec<Irrep>,
    certificate: TableCertificate,
}

impl IrrepTable {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(|r| r.dim).collect()
    }

    pub fn sum_dim_sq(&self) -> usize {
        self.irreps.iter().map(|r| r.dim * r.dim).sum()
    }

    pub fn certificate(&self) -> &TableCertificate {
        &self.certificate
    }
}

/// The left regular representation: x maps to the |G| x |G| permutation
/// matrix of left multiplication by x. Dense; meant for desk-scale orders.
pub fn regular_representation(group: &Arc<FiniteGroup>) -> MatrixFn {
    let o = group.order();
    let values = group
        .elements()
        .map(|x| {
            CMatrix::from_fn(o, o, |i, j| {
                if i == group.mul(x, j) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    MatrixFn::new(Arc::clone(group), values).expect("regular representation is well formed")
}

/// Decomposes the regular representation into a complete irrep table.
/// Deterministic for a fixed seed.
pub fn decompose_irreps(group: &Arc<FiniteGroup>, seed: u64) -> Result<IrrepTable> {
    let o = group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // First split: the regular representation is handled through its
    // permutation structure, so the |G| x |G| matrices are never stored.
    let mut pending: Vec<Vec<CMatrix>> = Vec::new();
    if o == 1 {
        pending.push(vec![CMatrix::identity(1)]);
    } else {
        let mut split_ok = false;
        for _ in 0..MAX_RESEEDS {
            let h = CMatrix::random_hermitian(&mut rng, o);
            let avg = average_commutant_regular(group, &h);
            let (vals, vecs) = herm_eig(&avg)?;
            let clusters = cluster_ranges(&vals);
            if clusters.len() == 1 {
                continue;
            }
            for (lo, hi) in clusters {
                let basis = vecs.block(0, lo, o, hi - lo);
                pending.push(restrict_regular(group, &basis));
            }
            split_ok = true;
            break;
        }
        if !split_ok {
            return Err(Error::NonConvergence(
                "failed to split the regular representation after reseeding".into(),
            ));
        }
    }

    // Recursive refinement of the pending subrepresentations.
    let mut finished: Vec<Vec<CMatrix>> = Vec::new();
    while let Some(rep) = pending.pop() {
        let norm_sq = char_norm_sq(&rep);
        if (norm_sq - 1.0).abs() <= IRREDUCIBLE_TOL {
            finished.push(rep);
            continue;
        }
        let d = rep[0].rows();
        let mut split_ok = false;
        for _ in 0..MAX_RESEEDS {
            let h = CMatrix::random_hermitian(&mut rng, d);
            let avg = average_commutant_dense(&rep, &h);
            let (vals, vecs) = herm_eig(&avg)?;
            let clusters = cluster_ranges(&vals);
            if clusters.len() == 1 {
                continue;
            }
            for (lo, hi) in clusters {
                let basis = vecs.block(0, lo, d, hi - lo);
                pending.push(restrict_dense(&rep, &basis));
            }
            split_ok = true;
            break;
        }
        if !split_ok {
            return Err(Error::NonConvergence(format!(
                "failed to split a reducible block of dimension {d} after {MAX_RESEEDS} reseeds"
            )));
        }
    }

    // Deduplicate equivalent copies by character distance, keeping the first
    // representative of each class.
    let mut kept: Vec<Irrep> = Vec::new();
    for rep in finished {
        let cand = Irrep::from_matrices(rep);
        let mut duplicate = false;
        for have in &kept {
            if have.dim == cand.dim && equivalent(group, have, &cand) {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            kept.push(cand);
        }
    }
    kept.sort_by_key(|r| r.dim);

    // Unitarity polish: snap each matrix to the nearest unitary.
    let kept: Vec<Irrep> = kept
        .into_iter()
        .map(|r| {
            let matrices = r.matrices.iter().map(polar_partial_unitary).collect();
            Irrep::from_matrices(matrices)
        })
        .collect();

    let table = IrrepTable {
        group: Arc::clone(group),
        irreps: kept,
        certificate: TableCertificate {
            schur_delta: 0.0,
            character_orthogonality: 0.0,
            multiplicativity: 0.0,
            unitarity: 0.0,
        },
    };
    let table = certify(table);

    if table.sum_dim_sq() != o {
        return Err(Error::NonConvergence(format!(
            "irrep dimensions {:?} square-sum to {} instead of {o}",
            table.dims(),
            table.sum_dim_sq()
        )));
    }
    Ok(table)
}

fn certify(mut table: IrrepTable) -> IrrepTable {
    let g = Arc::clone(&table.group);
    let g = g.as_ref();
    table.certificate.schur_delta = verify_schur_delta(g, &table);
    let mut ortho: f64 = 0.0;
    for i in 0..table.irreps.len() {
        for j in 0..i {
            let inner: Complex64 = table.irreps[i]
                .character
                .iter()
                .zip(&table.irreps[j].character)
                .map(|(a, b)| a * b.conj())
                .sum();
            ortho = ortho.max(inner.norm() / g.order() as f64);
        }
    }
    table.certificate.character_orthogonality = ortho;
    table.certificate.multiplicativity = table
        .irreps
        .iter()
        .map(|r| r.multiplicativity_residual(g))
        .fold(0.0, f64::max);
    table.certificate.unitarity =
        table.irreps.iter().map(|r| r.unitarity_residual()).fold(0.0, f64::max);
    table
}

/// max_x |Σ_ρ n_ρ χ_ρ(x) − |G|·δ_{x=e}|: zero exactly when the table is a
/// complete set of pairwise-inequivalent irreps.
pub fn verify_schur_delta(group: &FiniteGroup, table: &IrrepTable) -> f64 {
    let o = group.order();
    let mut worst: f64 = 0.0;
    for x in group.elements() {
        let sum: Complex64 = table
            .irreps
            .iter()
            .map(|r| r.character[x] * r.dim as f64)
            .sum();
        let target = if x == group.identity() { o as f64 } else { 0.0 };
        worst = worst.max((sum - Complex64::new(target, 0.0)).norm());
    }
    worst
}

/// Max residual of E_x ρ_p(x)_{kj} conj(ρ_q(x)_{sr}) against the Schur
/// orthogonality pattern δ_{pq} δ_{ks} δ_{jr} / n_ρ, exhaustively over all
/// index tuples for irreps of dimension at most 4.
pub fn matrix_element_orthogonality_check(table: &IrrepTable) -> f64 {
    let g = table.group.as_ref();
    let o = g.order() as f64;
    let small: Vec<&Irrep> = table.irreps.iter().filter(|r| r.dim <= 4).collect();
    let mut worst: f64 = 0.0;
    for (pi, p) in small.iter().enumerate() {
        for (qi, q) in small.iter().enumerate() {
            for k in 0..p.dim {
                for j in 0..p.dim {
                    for s in 0..q.dim {
                        for r in 0..q.dim {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for x in g.elements() {
                                acc += p.matrices[x].at(k, j) * q.matrices[x].at(s, r).conj();
                            }
                            acc /= o;
                            let expect = if pi == qi && k == s && j == r {
                                1.0 / p.dim as f64
                            } else {
                                0.0
                            };
                            worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
                        }
                    }
                }
            }
        }
    }
    worst
}

/// E_t R(t) H R(t)* for the left regular representation, using only index
/// permutations: the (a, b) entry averages H over the orbit (t⁻¹a, t⁻¹b).
fn average_commutant_regular(g: &FiniteGroup, h: &CMatrix) -> CMatrix {
    let o = g.order();
    let mut out = CMatrix::zeros(o, o);
    let scale = 1.0 / o as f64;
    for t in g.elements() {
        let ti = g.inv(t);
        for a in 0..o {
            let ra = g.mul(ti, a);
            for b in 0..o {
                let v = out.at(a, b) + h.at(ra, g.mul(ti, b)) * scale;
                out.set(a, b, v);
            }
        }
    }
    // exact Hermitian symmetrization to absorb roundoff
    out.add(&out.adjoint()).scale(0.5)
}

/// E_x S(x) H S(x)* for a dense representation.
fn average_commutant_dense(rep: &[CMatrix], h: &CMatrix) -> CMatrix {
    let d = h.rows();
    let mut acc = CMatrix::zeros(d, d);
    for m in rep {
        acc = acc.add(&m.mul(h).mul(&m.adjoint()));
    }
    acc = acc.scale(1.0 / rep.len() as f64);
    acc.add(&acc.adjoint()).scale(0.5)
}

/// Restriction B* R(x) B of the regular representation to the column space
/// of B, computed through the permutation action.
fn restrict_regular(g: &FiniteGroup, basis: &CMatrix) -> Vec<CMatrix> {
    let o = g.order();
    let d = basis.cols();
    let bh = basis.adjoint();
    g.elements()
        .map(|x| {
            let xi = g.inv(x);
            // (R(x) B)[i][j] = B[x⁻¹ i][j]
            let permuted = CMatrix::from_fn(o, d, |i, j| basis.at(g.mul(xi, i), j));
            bh.mul(&permuted)
        })
        .collect()
}

fn restrict_dense(rep: &[CMatrix], basis: &CMatrix) -> Vec<CMatrix> {
    let bh = basis.adjoint();
    rep.iter().map(|m| bh.mul(&m.mul(basis))).collect()
}

fn char_norm_sq(rep: &[CMatrix]) -> f64 {
    rep.iter().map(|m| m.trace().norm_sqr()).sum::<f64>() / rep.len() as f64
}

/// Splits an ascending eigenvalue list into maximal runs of nearly equal
/// values; returns half-open index ranges.
fn cluster_ranges(vals: &[f64]) -> Vec<(usize, usize)> {
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = EIG_CLUSTER_TOL * scale;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..vals.len() {
        if vals[i] - vals[i - 1] > tol {
            out.push((start, i));
            start = i;
        }
    }
    out.push((start, vals.len()));
    out
}

/// Character-distance equivalence with an intertwiner fallback for the
/// borderline zone.
fn equivalent(g: &Arc<FiniteGroup>, a: &Irrep, b: &Irrep) -> bool {
    let dist_sq: f64 = a
        .character
        .iter()
        .zip(&b.character)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let dist = dist_sq.sqrt();
    let thr = 1e-6 * g.order() as f64;
    if dist < thr {
        return true;
    }
    if dist < 1.0 {
        // borderline: decide by averaging an intertwiner candidate
        let d = a.dim;
        let mut t = CMatrix::zeros(d, d);
        for x in g.elements() {
            t = t.add(&a.matrices[x].mul(&b.matrices[x].adjoint()));
        }
        t = t.scale(1.0 / g.order() as f64);
        return t.max_abs() > 1e-6;
    }
    false
}
