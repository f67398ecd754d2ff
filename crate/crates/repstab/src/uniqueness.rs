//! Approximate uniqueness: nearby representations share a large common
//! component, witnessed by an intertwiner whose singular values are snapped
//! to 0 or 1.
//!
//! The averaged intertwiner T = E_x ρ(x)σ(x)* commutes with the two actions;
//! rescaling each cluster of equal singular values to 1 (and zeroing the
//! near-kernel) preserves the intertwining exactly while moving T within
//! 2ε of itself, so the result stays within 3ε of the identity.

use crate::cmatrix::{normalized_p_dist, op_norm, svd, CMatrix};
use crate::fourier::MatrixFn;
use crate::{Error, Result};

/// Absolute floor under which a singular value belongs to the zero cluster.
const ZERO_CLUSTER_TOL: f64 = 1e-8;
/// Relative merge tolerance for equal-singular-value clusters.
const CLUSTER_MERGE_TOL: f64 = 1e-8;

/// A matrix with singular values in {0, 1} and small ‖TT* − I‖'_p.
#[derive(Debug, Clone)]
pub struct EpsUnitary {
    pub matrix: CMatrix,
    pub rank: usize,
    /// measured ‖TT* − I‖'_p
    pub eps_budget: f64,
    pub p: f64,
}

/// T = E_x ρ(x) σ(x)* for two genuine representations; intertwines them:
/// ρ(x) T = T σ(x) for every x.
pub fn intertwiner(rho: &MatrixFn, sigma: &MatrixFn) -> Result<CMatrix> {
    check_rep_pair(rho, sigma)?;
    Ok(raw_intertwiner(rho, sigma))
}

fn raw_intertwiner(rho: &MatrixFn, sigma: &MatrixFn) -> CMatrix {
    let g = rho.group().as_ref();
    let n = rho.n();
    let mut t = CMatrix::zeros(n, n);
    for x in g.elements() {
        t = t.add(&rho.value(x).mul(&sigma.value(x).adjoint()));
    }
    t.scale(1.0 / g.order() as f64)
}

fn check_rep_pair(rho: &MatrixFn, sigma: &MatrixFn) -> Result<()> {
    if rho.group().fingerprint() != sigma.group().fingerprint() || rho.n() != sigma.n() {
        return Err(Error::GroupMismatch(
            "representations must share the group and dimension".into(),
        ));
    }
    for (name, f) in [("first", rho), ("second", sigma)] {
        let mult = f.multiplicativity_residual();
        if mult > 1e-8 {
            return Err(Error::Precondition(format!(
                "{name} input is not a representation: multiplicativity residual {mult:.3e}"
            )));
        }
        let unit = f.unitarity_residual();
        if unit > 1e-8 {
            return Err(Error::Precondition(format!(
                "{name} input is not unitary: residual {unit:.3e}"
            )));
        }
    }
    Ok(())
}

/// Everything the uniqueness theorem certifies about one pair.
#[derive(Debug, Clone)]
pub struct UniquenessOutcome {
    pub t_prime: EpsUnitary,
    /// rank of T′, a lower bound for the dimension of the common component
    pub common_dim: usize,
    /// measured ε = max_x ‖ρ(x) − σ(x)‖'_p
    pub epsilon: f64,
    /// ‖T − I‖'_p (at most ε)
    pub t_dist: f64,
    /// ‖T − T′‖'_p (at most 2ε)
    pub snap_dist: f64,
    /// ‖T′ − I‖'_p (at most 3ε)
    pub t_prime_dist: f64,
    /// max_x ‖ρ(x)T′ − T′σ(x)‖_max
    pub intertwining_residual: f64,
    /// smallest gap between distinct singular-value clusters of T, as a
    /// multiple of the merge tolerance; bounds are only asserted when this
    /// exceeds 100
    pub cluster_gap_ratio: f64,
    /// character distance between the two restricted representations on the
    /// common component
    pub restriction_char_dist: f64,
}

/// Builds the ε-unitary intertwiner between two nearby representations.
pub fn eps_unitary_intertwiner(
    rho: &MatrixFn,
    sigma: &MatrixFn,
    p: f64,
) -> Result<UniquenessOutcome> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::BadParameter(format!("needs p in [1,2], got {p}")));
    }
    check_rep_pair(rho, sigma)?;
    let g = rho.group().as_ref();
    let n = rho.n();
    let epsilon = g
        .elements()
        .map(|x| normalized_p_dist(rho.value(x), sigma.value(x), p))
        .fold(0.0, f64::max);
    if epsilon >= 0.5 {
        return Err(Error::Precondition(format!(
            "representations are {epsilon:.4} apart; the statement is vacuous at ε ≥ 1/2"
        )));
    }

    let t = raw_intertwiner(rho, sigma);
    let id = CMatrix::identity(n);
    let t_dist = normalized_p_dist(&t, &id, p);

    // cluster the singular values and snap: nonzero clusters to 1, the
    // near-kernel to 0
    let s = svd(&t).expect("svd of the averaged intertwiner");
    let scale = s.singulars.first().copied().unwrap_or(0.0).max(1.0);
    let merge = CLUSTER_MERGE_TOL * scale;
    let snapped: Vec<f64> = s
        .singulars
        .iter()
        .map(|&x| if x > ZERO_CLUSTER_TOL { 1.0 } else { 0.0 })
        .collect();
    let rank = snapped.iter().filter(|&&x| x == 1.0).count();

    // smallest inter-cluster gap (including the gap down to the zero class)
    let mut gap = f64::INFINITY;
    for w in s.singulars.windows(2) {
        let d = w[0] - w[1];
        if d > merge {
            gap = gap.min(d);
        }
    }
    if rank < n {
        if let Some(&last_kept) = s.singulars.get(rank.saturating_sub(1)) {
            if rank > 0 {
                gap = gap.min(last_kept - s.singulars[rank]);
            }
        }
    }
    let cluster_gap_ratio = if gap.is_finite() { gap / merge } else { f64::INFINITY };

    let mut scaled = s.left.clone();
    for (j, &v) in snapped.iter().enumerate() {
        for i in 0..n {
            let z = scaled.at(i, j) * v;
            scaled.set(i, j, z);
        }
    }
    let t_prime = scaled.mul(&s.right.adjoint());

    let snap_dist = normalized_p_dist(&t, &t_prime, p);
    let t_prime_dist = normalized_p_dist(&t_prime, &id, p);
    let tt = t_prime.mul(&t_prime.adjoint());
    let eps_budget = normalized_p_dist(&tt, &id, p);

    let intertwining_residual = g
        .elements()
        .map(|x| rho.value(x).mul(&t_prime).sub(&t_prime.mul(sigma.value(x))).max_abs())
        .fold(0.0, f64::max);

    // compare the restricted representations through their characters:
    // ranges of T′ (ρ side) and T′* (σ side)
    let restriction_char_dist = if rank == 0 {
        0.0
    } else {
        let v_basis = s.left.block(0, 0, n, rank);
        let u_basis = s.right.block(0, 0, n, rank);
        let mut dist_sq = 0.0;
        for x in g.elements() {
            let chi_rho = v_basis.adjoint().mul(rho.value(x)).mul(&v_basis).trace();
            let chi_sigma = u_basis.adjoint().mul(sigma.value(x)).mul(&u_basis).trace();
            dist_sq += (chi_rho - chi_sigma).norm_sqr();
        }
        dist_sq.sqrt()
    };

    Ok(UniquenessOutcome {
        t_prime: EpsUnitary { matrix: t_prime, rank, eps_budget, p },
        common_dim: rank,
        epsilon,
        t_dist,
        snap_dist,
        t_prime_dist,
        intertwining_residual,
        cluster_gap_ratio,
        restriction_char_dist,
    })
}

/// Orthonormal basis of range(T′) together with the ρ-invariance residual
/// max_x ‖(I − Π) ρ(x) Π‖_op of the projection Π onto the range.
pub fn invariant_subspace_extract(
    rho: &MatrixFn,
    t_prime: &EpsUnitary,
) -> Result<(Option<CMatrix>, f64)> {
    let n = rho.n();
    if t_prime.matrix.shape() != (n, n) {
        return Err(Error::ShapeMismatch("intertwiner size differs from the representation".into()));
    }
    if t_prime.rank == 0 {
        return Ok((None, 0.0));
    }
    let s = svd(&t_prime.matrix).expect("svd of an eps-unitary");
    let basis = s.left.block(0, 0, n, t_prime.rank);
    let proj = basis.mul(&basis.adjoint());
    let id = CMatrix::identity(n);
    let resid = rho
        .group()
        .elements()
        .map(|x| {
            let m = id.sub(&proj).mul(rho.value(x)).mul(&proj);
            op_norm(&m)
        })
        .fold(0.0, f64::max);
    Ok((Some(basis), resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::herm_eig;
    use crate::group::build_group_str;
    use crate::irreps::decompose_irreps;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn s3_pieces() -> (Arc<crate::group::FiniteGroup>, Vec<MatrixFn>) {
        let g = build_group_str("symmetric:3").unwrap();
        let t = decompose_irreps(&g, 1).unwrap();
        let fns = t
            .irreps()
            .iter()
            .map(|r| MatrixFn::from_irrep(Arc::clone(&g), r))
            .collect();
        (g, fns)
    }

    fn direct_sum(parts: &[&MatrixFn]) -> MatrixFn {
        let g = Arc::clone(parts[0].group());
        MatrixFn::from_fn(g, |x| {
            let mut acc = parts[0].value(x).clone();
            for part in &parts[1..] {
                acc = acc.direct_sum(part.value(x));
            }
            acc
        })
        .unwrap()
    }

    fn small_unitary(n: usize, strength: f64, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = CMatrix::random_hermitian(&mut rng, n);
        let (vals, vecs) = herm_eig(&h).unwrap();
        let phases: Vec<Complex64> =
            vals.iter().map(|&l| Complex64::from_polar(1.0, strength * l)).collect();
        vecs.mul(&CMatrix::diag(&phases)).mul(&vecs.adjoint())
    }

    #[test]
    fn intertwiner_schur_cases() {
        let (g, fns) = s3_pieces();
        let two = fns.iter().find(|f| f.n() == 2).unwrap();
        // irrep against itself averages to the identity
        let t = intertwiner(two, two).unwrap();
        assert!(t.sub(&CMatrix::identity(2)).max_abs() < 1e-9);
        // inequivalent 1-dim irreps give zero
        let trivial = &fns[0];
        let sign = fns.iter().skip(1).find(|f| f.n() == 1).unwrap();
        let t = intertwiner(trivial, sign).unwrap();
        assert!(t.max_abs() < 1e-10);
        // conjugated copy: T is W* up to the averaging scalar, intertwining exact
        let w = small_unitary(2, 0.3, 3);
        let conj = MatrixFn::from_fn(Arc::clone(&g), |x| {
            w.mul(two.value(x)).mul(&w.adjoint())
        })
        .unwrap();
        let t = intertwiner(two, &conj).unwrap();
        for x in g.elements() {
            let resid = two.value(x).mul(&t).sub(&t.mul(conj.value(x))).max_abs();
            assert!(resid < 1e-9);
        }
        // non-representation input is refused
        let not_rep = MatrixFn::constant(Arc::clone(&g), small_unitary(2, 0.5, 4)).unwrap();
        assert!(intertwiner(two, &not_rep).is_err());
    }

    #[test]
    fn identical_reps_give_identity_intertwiner() {
        let (_, fns) = s3_pieces();
        let two = fns.iter().find(|f| f.n() == 2).unwrap();
        let out = eps_unitary_intertwiner(two, two, 2.0).unwrap();
        assert_eq!(out.common_dim, 2);
        assert!(out.t_prime.matrix.sub(&CMatrix::identity(2)).max_abs() < 1e-9);
        assert!(out.epsilon < 1e-9);
    }

    #[test]
    fn conjugated_rep_stays_within_three_eps() {
        let (g, fns) = s3_pieces();
        let two = fns.iter().find(|f| f.n() == 2).unwrap();
        let rho = direct_sum(&[two, &fns[0], two]);
        let n = rho.n();
        for (strength, seed) in [(0.05, 7), (0.12, 8)] {
            let w = small_unitary(n, strength, seed);
            let sigma = MatrixFn::from_fn(Arc::clone(&g), |x| {
                w.mul(rho.value(x)).mul(&w.adjoint())
            })
            .unwrap();
            for p in [1.0, 2.0] {
                let out = eps_unitary_intertwiner(&rho, &sigma, p).unwrap();
                assert!(out.epsilon < 0.5);
                // singular values snapped exactly
                let sv = svd(&out.t_prime.matrix).unwrap().singulars;
                assert!(sv.iter().all(|&x| (x - 1.0).abs() < 1e-9 || x < 1e-9));
                assert!(out.t_dist <= out.epsilon + 1e-9);
                assert!(out.snap_dist <= 2.0 * out.epsilon + 1e-9);
                assert!(out.t_prime_dist <= 3.0 * out.epsilon + 1e-9, "p={p}");
                assert!(out.intertwining_residual < 1e-8, "p={p}");
                let floor = (1.0 - (2.0 * out.epsilon).powf(p)) * n as f64;
                assert!(out.common_dim as f64 >= floor - 1e-9);
            }
        }
    }

    #[test]
    fn disjoint_blocks_expose_common_component() {
        // ρ = triv^16 ⊕ χ1 and σ = triv^16 ⊕ χ2 on a cyclic group: the two
        // characters are inequivalent, so T has a 16-dim common block and a
        // zero singular value on the extra character
        let g = build_group_str("cyclic:24").unwrap();
        let t = decompose_irreps(&g, 2).unwrap();
        let trivial = MatrixFn::from_irrep(Arc::clone(&g), &t.irreps()[0]);
        // locate two distinct nontrivial characters
        let chis: Vec<MatrixFn> = t
            .irreps()
            .iter()
            .skip(1)
            .take(2)
            .map(|r| MatrixFn::from_irrep(Arc::clone(&g), r))
            .collect();
        let mut blocks_rho: Vec<&MatrixFn> = vec![&trivial; 16];
        blocks_rho.push(&chis[0]);
        let mut blocks_sigma: Vec<&MatrixFn> = vec![&trivial; 16];
        blocks_sigma.push(&chis[1]);
        let rho = direct_sum(&blocks_rho);
        let sigma = direct_sum(&blocks_sigma);

        let out = eps_unitary_intertwiner(&rho, &sigma, 2.0).unwrap();
        assert!(out.epsilon < 0.5, "eps {}", out.epsilon);
        assert_eq!(out.common_dim, 16, "the shared block is recovered exactly");
        assert!(out.intertwining_residual < 1e-8);
        assert!(out.restriction_char_dist < 1e-6);

        // the extracted invariant subspace is the trivial isotypic block
        let (basis, resid) = invariant_subspace_extract(&rho, &out.t_prime).unwrap();
        let basis = basis.unwrap();
        assert_eq!(basis.cols(), 16);
        assert!(resid < 1e-7);
        // basis spans the first 16 coordinates: last coordinate row vanishes
        for j in 0..16 {
            assert!(basis.at(16, j).norm() < 1e-7);
        }
    }

    #[test]
    fn zero_and_full_intertwiners_extract_cleanly() {
        let (_, fns) = s3_pieces();
        let two = fns.iter().find(|f| f.n() == 2).unwrap();
        let out = eps_unitary_intertwiner(two, two, 2.0).unwrap();
        let (basis, resid) = invariant_subspace_extract(two, &out.t_prime).unwrap();
        assert_eq!(basis.unwrap().cols(), 2);
        assert!(resid < 1e-8);

        let zero = EpsUnitary { matrix: CMatrix::zeros(2, 2), rank: 0, eps_budget: 1.0, p: 2.0 };
        let (basis, resid) = invariant_subspace_extract(two, &zero).unwrap();
        assert!(basis.is_none());
        assert_eq!(resid, 0.0);
    }

    #[test]
    fn far_apart_reps_are_refused() {
        let (_, fns) = s3_pieces();
        let trivial = &fns[0];
        let sign = fns.iter().skip(1).find(|f| f.n() == 1).unwrap();
        match eps_unitary_intertwiner(trivial, sign, 2.0) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("vacuous")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn swap_of_equal_blocks_keeps_degenerate_clusters_intact() {
        // ρ = α ⊕ α with the two copies swapped and lightly conjugated: the
        // intertwiner has highly degenerate singular values
        let (g, fns) = s3_pieces();
        let two = fns.iter().find(|f| f.n() == 2).unwrap();
        let rho = direct_sum(&[two, two]);
        let n = rho.n();
        let mut swap = CMatrix::zeros(n, n);
        for i in 0..2 {
            swap.set(i, i + 2, Complex64::new(1.0, 0.0));
            swap.set(i + 2, i, Complex64::new(1.0, 0.0));
        }
        let w = small_unitary(n, 0.08, 13).mul(&swap);
        let sigma = MatrixFn::from_fn(Arc::clone(&g), |x| {
            w.mul(rho.value(x)).mul(&w.adjoint())
        })
        .unwrap();
        let out = eps_unitary_intertwiner(&rho, &sigma, 2.0).unwrap();
        assert!(out.epsilon < 0.5);
        assert_eq!(out.common_dim, n);
        assert!(out.intertwining_residual < 1e-8);
        assert!(out.t_prime_dist <= 3.0 * out.epsilon + 1e-9);
    }
}
