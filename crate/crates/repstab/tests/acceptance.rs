//! Acceptance suite: one test per criterion, each printing a PASS line once
//! its assertions hold. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` to see the lines).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repstab::cmatrix::{
    is_partial_unitary, normalized_p_dist, nuclear_norm, op_norm, polar_partial_unitary,
    schatten_norm, soft_threshold_split, svd, unitary_completion, CMatrix,
};
use repstab::fourier::{
    convolution_check, fourier_transform, invert, parseval_check, quad_inner, u2_norm4_direct,
    u2_norm4_fourier, MatrixFn,
};
use repstab::group::{build_group_str, FiniteGroup};
use repstab::harness::{gen_perturbed_rep, gen_projection_example};
use repstab::inverse::{
    converse_check, inverse_theorem, nuclear_contraction_check, tau, PartialAffineRep,
};
use repstab::irreps::{decompose_irreps, verify_schur_delta, IrrepTable};
use repstab::stability::{
    affine_constant, defect, distance_from_identity_bound, lidskii_nearest_check, rep_constant,
    stabilize, stabilize_with, weyl_monotonicity_check, DefectFlavor, StabilizeOptions,
};
use repstab::uniqueness::eps_unitary_intertwiner;

const GROUPS: [&str; 7] = [
    "cyclic:5",
    "cyclic:12",
    "symmetric:3",
    "symmetric:4",
    "dihedral:4",
    "dihedral:6",
    "quaternion",
];

fn setup(spec: &str, seed: u64) -> (Arc<FiniteGroup>, IrrepTable) {
    let g = build_group_str(spec).expect("group spec");
    let t = decompose_irreps(&g, seed).expect("irrep table");
    (g, t)
}

fn random_fn(g: &Arc<FiniteGroup>, n: usize, rng: &mut ChaCha8Rng) -> MatrixFn {
    MatrixFn::from_fn(Arc::clone(g), |_| CMatrix::random_gaussian(rng, n, n).scale(0.5))
        .expect("random function")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Criterion 1: Parseval (both forms), convolution, inversion roundtrip and
/// the U² identity agree within 1e-8 relative on 50 random functions per
/// (group, n) pair.
#[test]
fn criterion_1_fourier_identity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for spec in GROUPS {
        let (g, t) = setup(spec, 10);
        for n in [1usize, 2, 3] {
            for _ in 0..50 {
                let f = random_fn(&g, n, &mut rng);
                let h = random_fn(&g, n, &mut rng);

                // Parseval, norm form (f against itself)
                let (lhs, rhs) = parseval_check(&f, &f, &t).expect("parseval");
                assert!(
                    rel_close(lhs.re, rhs.re, 1e-8) && (lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()),
                    "{spec} n={n}: parseval-1 {lhs} vs {rhs}"
                );
                // Parseval, inner-product form (f against g)
                let (lhs, rhs) = parseval_check(&f, &h, &t).expect("parseval");
                assert!(
                    (lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()),
                    "{spec} n={n}: parseval-2 {lhs} vs {rhs}"
                );
                // convolution formula
                let resid = convolution_check(&f, &h, &t).expect("convolution");
                assert!(resid <= 1e-8, "{spec} n={n}: convolution residual {resid}");
                // inversion roundtrip
                let back = invert(&fourier_transform(&f, &t).unwrap(), &t).unwrap();
                let worst = g
                    .elements()
                    .map(|x| back.value(x).sub(f.value(x)).max_abs())
                    .fold(0.0, f64::max);
                assert!(worst <= 1e-8, "{spec} n={n}: inversion residual {worst}");
                // U² identity: direct quadruple average vs Fourier series
                let direct = u2_norm4_direct(&f).unwrap();
                let series = u2_norm4_fourier(&f, &t).unwrap();
                assert!(
                    rel_close(direct, series, 1e-8),
                    "{spec} n={n}: u2 {direct} vs {series}"
                );
            }
        }
    }
    println!("acceptance criterion 1 (fourier identity suite): PASS");
}

/// Criterion 2: Σ n_ρ² = |G| exactly and the Schur delta residual stays
/// below 1e-6 for every built-in group.
#[test]
fn criterion_2_irrep_certification() {
    for spec in GROUPS {
        let (g, t) = setup(spec, 20);
        assert_eq!(t.sum_dim_sq(), g.order(), "{spec}: dims {:?}", t.dims());
        let resid = verify_schur_delta(&g, &t);
        assert!(resid < 1e-6, "{spec}: schur residual {resid}");
    }
    println!("acceptance criterion 2 (irrep certification): PASS");
}

/// Criterion 3: generalized Cauchy-Schwarz on 200 random quadruples and the
/// U² triangle inequality on 200 random pairs per group, within 1e-9 slack.
#[test]
fn criterion_3_cauchy_schwarz_and_triangle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    for spec in GROUPS {
        let (g, t) = setup(spec, 30);
        let u2 = |f: &MatrixFn| u2_norm4_fourier(f, &t).unwrap().max(0.0).powf(0.25);
        for _ in 0..200 {
            let fs: Vec<MatrixFn> = (0..4).map(|_| random_fn(&g, 2, &mut rng)).collect();
            let val = quad_inner(&fs[0], &fs[1], &fs[2], &fs[3]).unwrap().norm();
            let bound: f64 = fs.iter().map(&u2).product();
            assert!(val <= bound + 1e-9, "{spec}: CS {val} > {bound}");
        }
        for _ in 0..200 {
            let f = random_fn(&g, 2, &mut rng);
            let h = random_fn(&g, 2, &mut rng);
            let sum = f.add(&h).unwrap();
            assert!(
                u2(&sum) <= u2(&f) + u2(&h) + 1e-9,
                "{spec}: triangle {} > {} + {}",
                u2(&sum),
                u2(&f),
                u2(&h)
            );
        }
    }
    println!("acceptance criterion 3 (cauchy-schwarz and triangle): PASS");
}

/// Criterion 4: the inverse theorem end to end at c in {0.5, 0.8, 0.95} on
/// perturbed representations, with the converse closing the loop.
#[test]
fn criterion_4_inverse_theorem_end_to_end() {
    let (g, t) = setup("quaternion", 7);
    let rho = t.irreps().iter().find(|r| r.dim() == 2).unwrap();
    let n = 2.0;
    // perturbation strength chosen per c so that ‖f‖⁴_U² ≥ c·n with margin
    for (c, eps_target) in [(0.5, 1.0), (0.8, 0.45), (0.95, 0.2)] {
        let f = gen_perturbed_rep(&g, rho, eps_target, 2.0, 300).expect("perturbed rep");
        let u2_4 = u2_norm4_fourier(&f, &t).unwrap();
        assert!(u2_4 >= c * n, "setup: u2^4 {u2_4} below c·n");

        let out = inverse_theorem(&f, &t, c).expect("inverse theorem");
        let m = out.m as f64;
        assert!(
            m >= c * n / (2.0 - c) - 1e-7 && m <= (2.0 - c) * n / c + 1e-7,
            "c={c}: m={m} outside window {:?}",
            out.m_window
        );
        let floor = tau(c).unwrap().powi(4) * m;
        assert!(
            out.correlation >= floor - 1e-7,
            "c={c}: correlation {} below tau^4 m = {floor}",
            out.correlation
        );
        assert!(out.rep.is_valid(1e-8), "c={c}: output rep invalid");

        // converse: feed the achieved correlation level back
        let c_back = out.correlation / m;
        let (ok, measured, bound) =
            converse_check(&f, &out.rep, c_back, Some(&t)).expect("converse");
        assert!(ok, "c={c}: converse failed, u2^4 {measured} < {bound}");

        println!(
            "  c={c}: m={}, correlation={:.9}, tau4m={:.6}, u2^4={:.9}",
            out.m, out.correlation, floor, u2_4
        );
    }
    // regression pins for the fixed seed above
    let f = gen_perturbed_rep(&g, rho, 0.2, 2.0, 300).unwrap();
    let out = inverse_theorem(&f, &t, 0.95).unwrap();
    assert!(
        (out.correlation - 1.996_835_781_608_455).abs() < 1e-9,
        "regression: correlation {:.15} drifted",
        out.correlation
    );
    println!("acceptance criterion 4 (inverse theorem end-to-end): PASS");
}

/// Criterion 5: stabilization constants across measured defects
/// {0.005, 0.02, 0.05} and p in {1, 1.5, 2}; distances must respect
/// (1 + 2 D_p + 8^{1/p})·ε and m the (1 − 4 ε^p) window. Measured distances
/// land far below the bound and are recorded as regression values.
#[test]
fn criterion_5_stability_constants() {
    let (g, t) = setup("quaternion", 7);
    let rho = t.irreps().iter().find(|r| r.dim() == 2).unwrap();
    // headline constants (the p = 1 value evaluates to 107, within the
    // documented ceiling of 131; p = 2 stays below 30)
    assert!(rep_constant(1.0) <= 131.0);
    assert!(rep_constant(2.0) < 30.0);
    assert!((affine_constant(1.0) - 49.0).abs() < 1e-12);
    assert!(affine_constant(2.0) < 12.0);

    let mut measured = Vec::new();
    for eps_target in [0.005, 0.02, 0.05] {
        for p in [1.0, 1.5, 2.0] {
            let f = gen_perturbed_rep(&g, rho, eps_target, p, 500).expect("perturbed rep");
            let eps = defect(&f, DefectFlavor::Multiplicative, p, false).unwrap();
            assert!(eps <= 1.0 / 16.0, "setup: eps {eps}");
            let out = stabilize(&f, &t, p).expect("stabilize");
            let r = &out.report;
            let bound = rep_constant(p) * r.epsilon;
            assert!(
                r.max_distance <= bound,
                "eps={eps_target} p={p}: distance {} above {bound}",
                r.max_distance
            );
            assert!(r.max_distance <= 131.0 * r.epsilon, "headline ceiling");
            let nf = r.n as f64;
            let delta = 4.0 * r.epsilon.powf(p);
            assert!(delta < 1.0, "window formula degenerate");
            let (lo, hi) = ((1.0 - delta) * nf, nf / (1.0 - delta));
            let m = r.m as f64;
            assert!(m >= lo && m <= hi, "eps={eps_target} p={p}: m={m} outside [{lo}, {hi}]");
            assert!(r.passed);
            println!(
                "  eps={:.6} p={p}: max distance {:.9} (bound {:.6}, ratio {:.4})",
                r.epsilon,
                r.max_distance,
                bound,
                r.max_distance / r.epsilon
            );
            measured.push(r.max_distance);
        }
    }
    // regression pin: the p = 2, eps = 0.02 cell for the fixed seed
    assert!(
        (measured[5] - 0.008_981_491_564_515).abs() < 1e-9,
        "regression: measured distance {:.15} drifted",
        measured[5]
    );
    println!("acceptance criterion 5 (stability constants): PASS");
}

/// Criterion 6: the projection counterexample on the 3-dimensional irrep of
/// S4 (input dimension n = 2) recovers m = 3 = n + 1 after unitarize
/// preprocessing, with the measured distance within the reported bound.
#[test]
fn criterion_6_projection_counterexample() {
    let (g, t) = setup("symmetric:4", 7);
    let rho = t.irreps().iter().find(|r| r.dim() == 3).unwrap();
    let f = gen_projection_example(&g, rho).expect("projection example");
    assert_eq!(f.n(), 2);
    assert!(f.max_op_norm() <= 1.0 + 1e-9);
    // the corner of a d-dim irrep has hs-defect at most (d-1)^{-1/2}
    let eps_hs = defect(&f, DefectFlavor::Multiplicative, 2.0, true).unwrap();
    assert!(eps_hs <= 2f64.powf(-0.5) + 1e-9, "hs defect {eps_hs}");

    // the bounded function itself already satisfies the inverse theorem at
    // its own U² level: a single Fourier singular value 2/3 on the 3-dim
    // irrep, so the correlating representation has dimension n + 1
    let u2_4 = u2_norm4_direct(&f).unwrap();
    assert!((u2_4 - 16.0 / 27.0).abs() < 1e-9, "u2^4 of the corner block is (2/3)^4·3");
    let c_raw = u2_4 / 2.0 - 1e-9;
    let raw = inverse_theorem(&f, &t, c_raw).expect("inverse theorem on the raw corner");
    assert_eq!(raw.m, 3, "single candidate on the 3-dim irrep");
    assert!(raw.correlation >= raw.tau4_bound - 1e-7);
    assert!((raw.correlation - 4.0 / 3.0).abs() < 1e-8, "nuclear mass 2·(2/3)");

    // the defect is far beyond the 1/16 theorem gate, so this runs as a
    // forced diagnostic: unitarize, then recover the representation
    let out = stabilize_with(
        &f,
        &t,
        2.0,
        StabilizeOptions { relaxed: true, force: true, ..Default::default() },
    )
    .expect("diagnostic stabilize");
    assert_eq!(out.report.m, 3, "recovered dimension must be n + 1 = 3");
    assert!(
        out.report.max_distance <= out.report.bound,
        "distance {} above bound {}",
        out.report.max_distance,
        out.report.bound
    );
    assert!(!out.theorem_applicable, "the theorem gate cannot hold at this defect");
    println!(
        "  projection on S4: n=2 -> m=3, defect_hs={:.6}, max distance={:.6} (bound {:.4})",
        eps_hs, out.report.max_distance, out.report.bound
    );
    // regression pin for the fixed table seed
    assert!(
        (out.report.max_distance - 0.125_352_436_972).abs() < 1e-9,
        "regression: distance {:.12} drifted",
        out.report.max_distance
    );
    println!("acceptance criterion 6 (projection counterexample): PASS");
}

/// Criterion 7: uniqueness. For nearby representations built by small
/// unitary conjugation plus swaps of equal blocks, the snapped intertwiner
/// has singular values in {0, 1}, stays within 3ε of the identity,
/// intertwines within 1e-8 and has rank at least (1 − (2ε)^p)·n.
#[test]
fn criterion_7_uniqueness() {
    let (g, t) = setup("symmetric:3", 7);
    let two = MatrixFn::from_irrep(
        Arc::clone(&g),
        t.irreps().iter().find(|r| r.dim() == 2).unwrap(),
    );
    let triv = MatrixFn::from_irrep(Arc::clone(&g), &t.irreps()[0]);

    let direct_sum = |parts: &[&MatrixFn]| -> MatrixFn {
        let grp = Arc::clone(parts[0].group());
        let parts: Vec<MatrixFn> = parts.iter().map(|f| (*f).clone()).collect();
        MatrixFn::from_fn(grp, move |x| {
            let mut acc = parts[0].value(x).clone();
            for part in &parts[1..] {
                acc = acc.direct_sum(part.value(x));
            }
            acc
        })
        .unwrap()
    };
    // ρ = 2 ⊕ 1 ⊕ 2: repeated blocks make the intertwiner spectrum degenerate
    let rho = direct_sum(&[&two, &triv, &two]);
    let n = rho.n();

    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    for p in [1.0, 1.5, 2.0] {
        for round in 0..5 {
            // small unitary conjugation composed with a swap of the two
            // equal 2-dim blocks (the swap alone acts trivially)
            let h = CMatrix::random_hermitian(&mut rng, n);
            let (vals, vecs) = repstab::cmatrix::herm_eig(&h).unwrap();
            let strength = 0.003 + 0.005 * round as f64;
            // spectrally normalized phases keep eps at most 2·strength
            let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
            let phases: Vec<num_complex::Complex64> = vals
                .iter()
                .map(|&l| num_complex::Complex64::from_polar(1.0, strength * l / top))
                .collect();
            let w_small = vecs.mul(&CMatrix::diag(&phases)).mul(&vecs.adjoint());
            let mut swap = CMatrix::zeros(n, n);
            for i in 0..2 {
                swap.set(i, i + 3, num_complex::Complex64::new(1.0, 0.0));
                swap.set(i + 3, i, num_complex::Complex64::new(1.0, 0.0));
            }
            swap.set(2, 2, num_complex::Complex64::new(1.0, 0.0));
            let w = w_small.mul(&swap);
            let sigma =
                MatrixFn::from_fn(Arc::clone(&g), |x| w.mul(rho.value(x)).mul(&w.adjoint()))
                    .unwrap();

            let out = eps_unitary_intertwiner(&rho, &sigma, p).expect("uniqueness");
            assert!(out.epsilon <= 0.05, "p={p} round {round}: eps {} too big", out.epsilon);
            // singular values snapped exactly to {0, 1}
            let sv = svd(&out.t_prime.matrix).unwrap().singulars;
            assert!(
                sv.iter().all(|&x| (x - 1.0).abs() < 1e-9 || x.abs() < 1e-9),
                "p={p}: singular values not snapped: {sv:?}"
            );
            assert!(
                out.t_prime_dist <= 3.0 * out.epsilon + 1e-9,
                "p={p}: |T'-I| = {} > 3 eps = {}",
                out.t_prime_dist,
                3.0 * out.epsilon
            );
            assert!(
                out.intertwining_residual < 1e-8,
                "p={p}: intertwining residual {}",
                out.intertwining_residual
            );
            let floor = (1.0 - (2.0 * out.epsilon).powf(p)) * n as f64;
            assert!(
                out.common_dim as f64 >= floor - 1e-9,
                "p={p}: rank {} below {floor}",
                out.common_dim
            );
        }
    }
    println!("acceptance criterion 7 (uniqueness): PASS");
}

/// Criterion 8: the constructive-lemma suite on at least 500 random
/// instances each, at the stated tolerances.
#[test]
fn criterion_8_constructive_lemma_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);

    // soft-threshold split: bound never exceeds 1
    for k in 0..500 {
        let m = 2 + k % 3;
        let raw = CMatrix::random_gaussian(&mut rng, m, m);
        let a = raw.scale((m as f64 / raw.hs_norm_sq()).sqrt());
        let c = 0.2 + 2.0 * rng.gen::<f64>();
        let (ap, app) = soft_threshold_split(&a, c, m).unwrap();
        let bound = op_norm(&ap) / c + c / m as f64 * nuclear_norm(&app);
        assert!(bound <= 1.0 + 1e-12, "soft threshold bound {bound} at c={c}");
        assert!(ap.add(&app).sub(&a).max_abs() < 1e-10);
    }

    // nuclear contraction for pipeline-produced (U, P) pairs
    {
        let (g, t) = setup("quaternion", 9);
        let rho = t.irreps().iter().find(|r| r.dim() == 2).unwrap();
        let mut ratios = 0usize;
        for seed in 0..100 {
            let eps = 0.02 + 0.002 * seed as f64;
            let f = gen_perturbed_rep(&g, rho, eps, 2.0, seed).unwrap();
            let sel = repstab::inverse::extract_candidates(&f, &t, 0.8).unwrap();
            let asm = repstab::inverse::assemble(&sel, &t).unwrap();
            let ratio = nuclear_contraction_check(&asm.u0, &asm.p, 5, seed);
            assert!(ratio <= 1.0 + 1e-8, "contraction ratio {ratio} at seed {seed}");
            ratios += 5;
        }
        assert!(ratios >= 500);
    }

    // ‖BAC*‖_p ≤ ‖A‖_p ‖B‖_op ‖C‖_op on non-square factors
    for _ in 0..500 {
        let a = CMatrix::random_gaussian(&mut rng, 3, 3);
        let b = CMatrix::random_gaussian(&mut rng, 5, 3);
        let c = CMatrix::random_gaussian(&mut rng, 5, 3);
        let p = 1.0 + 2.0 * rng.gen::<f64>();
        let lhs = schatten_norm(&b.mul(&a).mul(&c.adjoint()), p, false).unwrap();
        let rhs = schatten_norm(&a, p, false).unwrap() * op_norm(&b) * op_norm(&c);
        assert!(lhs <= rhs + 1e-12 * (1.0 + rhs), "multiply-by-small-op {lhs} > {rhs}");
    }

    // |tr(AB*)| ≤ ‖A‖_op ‖B‖_nuc
    for _ in 0..500 {
        let a = CMatrix::random_gaussian(&mut rng, 3, 4);
        let b = CMatrix::random_gaussian(&mut rng, 3, 4);
        let lhs = a.hs_inner(&b).norm();
        let rhs = op_norm(&a) * nuclear_norm(&b);
        assert!(lhs <= rhs + 1e-9, "duality {lhs} > {rhs}");
    }

    // almost-unitary completion: ‖VU* − W‖'_p ≤ (|m−n|/n)^{1/p}
    for k in 0..500 {
        let p = [1.0, 1.5, 2.0][k % 3];
        let (n, m) = if k % 2 == 0 { (5, 3) } else { (3, 5) };
        let qu = CMatrix::random_unitary(&mut rng, n.max(m));
        let qv = CMatrix::random_unitary(&mut rng, n.max(m));
        let u = qu.block(0, 0, n, m);
        let v = qv.block(0, 0, n, m);
        let product = v.mul(&u.adjoint());
        let w = polar_partial_unitary(&product);
        let dist = normalized_p_dist(&product, &w, p);
        let delta = ((m as f64 - n as f64).abs() / n as f64).powf(1.0 / p);
        assert!(dist <= delta + 1e-9, "almost-unitary {dist} > {delta} (n={n} m={m} p={p})");
    }

    // eigenvalue monotonicity under positive perturbations
    for _ in 0..500 {
        let b = CMatrix::random_hermitian(&mut rng, 4);
        let v = CMatrix::random_gaussian(&mut rng, 4, 1);
        let a = b.add(&v.mul(&v.adjoint()));
        assert!(weyl_monotonicity_check(&a, &b).unwrap());
    }

    // nearest-unitary optimality against arbitrary contractions
    for _ in 0..500 {
        let raw_a = CMatrix::random_gaussian(&mut rng, 3, 3);
        let raw_b = CMatrix::random_gaussian(&mut rng, 3, 3);
        let a = raw_a.scale(0.999 / op_norm(&raw_a).max(1e-9));
        let b = raw_b.scale(0.999 / op_norm(&raw_b).max(1e-9));
        let p = [1.0, 1.5, 2.0][(rng.gen::<f64>() * 3.0) as usize % 3];
        let (lhs, rhs) = lidskii_nearest_check(&a, &b, p).unwrap();
        assert!(lhs <= rhs + 1e-10, "lidskii {lhs} > {rhs} at p={p}");
    }

    // trace lower bound from distance to the identity, 1000 unitaries per p
    for _ in 0..1000 {
        let u = CMatrix::random_unitary(&mut rng, 4);
        for p in [1.0, 1.5, 2.0] {
            let (lhs, rhs) = distance_from_identity_bound(&u, p).unwrap();
            assert!(lhs >= rhs - 1e-11, "distance-from-identity {lhs} < {rhs}");
        }
    }

    // partial affine representations are approximately multiplicative on
    // constrained quadruples
    {
        let (g, t) = setup("quaternion", 11);
        let mut count = 0;
        while count < 500 {
            // random direct sum of irreps as P, random partial unitaries U, V
            let picks = 1 + count % 2;
            let mut blocks: Vec<usize> = Vec::new();
            let mut m = 0usize;
            for _ in 0..=picks {
                let idx = (rng.gen::<f64>() * t.irreps().len() as f64) as usize
                    % t.irreps().len();
                m += t.irreps()[idx].dim();
                blocks.push(idx);
            }
            let n = 1 + (m as i64 + (rng.gen::<f64>() * 5.0) as i64 - 2).max(0) as usize;
            let p_rep = MatrixFn::from_fn(Arc::clone(&g), |x| {
                let mut acc = t.irreps()[blocks[0]].matrix(x).clone();
                for &b in &blocks[1..] {
                    acc = acc.direct_sum(t.irreps()[b].matrix(x));
                }
                acc
            })
            .unwrap();
            let k = n.max(m);
            let u = CMatrix::random_unitary(&mut rng, k).block(0, 0, n, m);
            let v = CMatrix::random_unitary(&mut rng, k).block(0, 0, n, m);
            assert!(is_partial_unitary(&u, 1e-8));
            let rep = PartialAffineRep { n, m, u, v, p: p_rep };
            let p = [1.0, 2.0][count % 2];
            let measured = rep.flexible_defect(p);
            let eta = rep.eta_bound(p);
            assert!(
                measured <= eta + 1e-9,
                "flexible defect {measured} > eta {eta} (n={n} m={m} p={p})"
            );
            count += 1;
        }
    }

    // partial unitary completion stays faithful to its input
    for _ in 0..100 {
        let q = CMatrix::random_unitary(&mut rng, 5);
        let u = q.block(0, 0, 5, 2);
        let full = unitary_completion(&u);
        assert!(is_partial_unitary(&full, 1e-9));
        assert!(full.block(0, 0, 5, 2).sub(&u).max_abs() == 0.0);
    }

    println!("acceptance criterion 8 (constructive lemma suite): PASS");
}
