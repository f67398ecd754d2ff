//! The matrix-valued Fourier transform and the U² norm.
//!
//! For f : G -> M_n(C) and an irrep ρ of dimension n_ρ, the coefficient is
//! the (n·n_ρ) x (n·n_ρ) matrix f̂(ρ) = E_x f(x) ⊗ conj(ρ(x)). Viewed as a
//! linear map on n x n_ρ matrices (row-major flattening) it sends A to
//! E_x f(x) A ρ(x)*, which is what the inverse-theorem pipeline consumes.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{block_scalar_mul, box_norm4, op_norm, partial_trace_blocks, CMatrix, MatrixJson};
use crate::group::{build_group_str, FiniteGroup};
use crate::irreps::{Irrep, IrrepTable};
use crate::{Error, Result};

/// Largest order for which the |G|³ direct U² sum is attempted; beyond it
/// the Fourier route is the intended path.
pub const U2_DIRECT_ORDER_CAP: usize = 60;
/// Schur residual above which a table is refused for inversion.
const INVERT_TABLE_TOL: f64 = 1e-4;

/// A function from group elements to n x n complex matrices.
#[derive(Debug, Clone)]
pub struct MatrixFn {
    group: Arc<FiniteGroup>,
    n: usize,
    values: Vec<CMatrix>,
}

impl MatrixFn {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        let n = values[0].rows();
        if n == 0 || values.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::ShapeMismatch("values must all be square of equal size".into()));
        }
        Ok(MatrixFn { group, n, values })
    }

    pub fn constant(group: Arc<FiniteGroup>, value: CMatrix) -> Result<Self> {
        let values = vec![value; group.order()];
        MatrixFn::new(group, values)
    }

    pub fn from_fn(
        group: Arc<FiniteGroup>,
        mut f: impl FnMut(usize) -> CMatrix,
    ) -> Result<Self> {
        let values = group.elements().map(&mut f).collect();
        MatrixFn::new(group, values)
    }

    /// Packages the matrices of an irrep as a MatrixFn.
    pub fn from_irrep(group: Arc<FiniteGroup>, irrep: &Irrep) -> Self {
        MatrixFn { group, n: irrep.dim(), values: irrep.matrices().to_vec() }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, x: usize) -> &CMatrix {
        &self.values[x]
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn map(&self, mut f: impl FnMut(&CMatrix) -> CMatrix) -> MatrixFn {
        MatrixFn {
            group: Arc::clone(&self.group),
            n: self.n,
            values: self.values.iter().map(&mut f).collect(),
        }
    }

    pub fn add(&self, other: &MatrixFn) -> Result<MatrixFn> {
        same_group(self, other)?;
        Ok(MatrixFn {
            group: Arc::clone(&self.group),
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> MatrixFn {
        self.map(|m| m.scale(s))
    }

    pub fn max_op_norm(&self) -> f64 {
        self.values.iter().map(op_norm).fold(0.0, f64::max)
    }

    /// Max over pairs of ‖f(x)f(y) − f(xy)‖_max; zero for representations.
    pub fn multiplicativity_residual(&self) -> f64 {
        let g = self.group.as_ref();
        let mut worst: f64 = 0.0;
        for x in g.elements() {
            for y in g.elements() {
                let d = self.values[x]
                    .mul(&self.values[y])
                    .sub(&self.values[g.mul(x, y)])
                    .max_abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.n);
        self.values.iter().map(|m| m.adjoint().mul(m).sub(&id).max_abs()).fold(0.0, f64::max)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = MatrixFnFile::from(self);
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MatrixFn> {
        let text = std::fs::read_to_string(path)?;
        let file: MatrixFnFile = serde_json::from_str(&text)?;
        file.build()
    }
}

fn same_group(a: &MatrixFn, b: &MatrixFn) -> Result<()> {
    if a.group.fingerprint() != b.group.fingerprint() || a.n != b.n {
        return Err(Error::GroupMismatch(format!(
            "functions live on {} (n={}) vs {} (n={})",
            a.group.name(),
            a.n,
            b.group.name(),
            b.n
        )));
    }
    Ok(())
}

fn table_matches(f: &MatrixFn, table: &IrrepTable) -> Result<()> {
    if f.group.fingerprint() != table.group().fingerprint() {
        return Err(Error::GroupMismatch(format!(
            "function on {} but table for {}",
            f.group.name(),
            table.group().name()
        )));
    }
    Ok(())
}

/// On-disk form: group spec string, n, and one matrix per element index.
#[derive(Serialize, Deserialize)]
pub struct MatrixFnFile {
    pub group: String,
    pub n: usize,
    pub values: Vec<MatrixJson>,
}

impl From<&MatrixFn> for MatrixFnFile {
    fn from(f: &MatrixFn) -> Self {
        MatrixFnFile {
            group: f.group.name().to_string(),
            n: f.n,
            values: f.values.iter().map(MatrixJson::from).collect(),
        }
    }
}

impl MatrixFnFile {
    pub fn build(&self) -> Result<MatrixFn> {
        let group = build_group_str(&self.group)?;
        let values: Vec<CMatrix> =
            self.values.iter().map(CMatrix::try_from).collect::<Result<_>>()?;
        let f = MatrixFn::new(group, values)?;
        if f.n() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "file claims n={} but matrices are {}x{}",
                self.n,
                f.n(),
                f.n()
            )));
        }
        Ok(f)
    }
}

/// Fourier coefficients of one function against a complete table.
#[derive(Debug, Clone)]
pub struct FourierCoeffs {
    n: usize,
    group_fingerprint: u64,
    blocks: Vec<CMatrix>,
    dims: Vec<usize>,
}

impl FourierCoeffs {
    pub fn block(&self, idx: usize) -> &CMatrix {
        &self.blocks[idx]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn irrep_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_block_op_norm(&self) -> f64 {
        self.blocks.iter().map(op_norm).fold(0.0, f64::max)
    }
}

/// f̂(ρ) = E_x f(x) ⊗ conj(ρ(x)) for every irrep in the table.
pub fn fourier_transform(f: &MatrixFn, table: &IrrepTable) -> Result<FourierCoeffs> {
    table_matches(f, table)?;
    let g = f.group.as_ref();
    let scale = 1.0 / g.order() as f64;
    let blocks = table
        .irreps()
        .iter()
        .map(|rho| {
            let size = f.n * rho.dim();
            let mut acc = CMatrix::zeros(size, size);
            for x in g.elements() {
                acc = acc.add(&f.values[x].kron(&rho.matrix(x).conj()));
            }
            acc.scale(scale)
        })
        .collect();
    Ok(FourierCoeffs {
        n: f.n,
        group_fingerprint: g.fingerprint(),
        blocks,
        dims: table.dims(),
    })
}

/// The coefficient viewed as an operator: E_x f(x) A ρ(x)* for an n x n_ρ
/// argument. Agrees with multiplying f̂(ρ) against A flattened row-major.
pub fn apply_coeff(f: &MatrixFn, rho: &Irrep, a: &CMatrix) -> Result<CMatrix> {
    if a.shape() != (f.n, rho.dim()) {
        return Err(Error::ShapeMismatch(format!(
            "argument must be {}x{}, got {}x{}",
            f.n,
            rho.dim(),
            a.rows(),
            a.cols()
        )));
    }
    let g = f.group.as_ref();
    let mut acc = CMatrix::zeros(f.n, rho.dim());
    for x in g.elements() {
        acc = acc.add(&f.values[x].mul(a).mul(&rho.matrix(x).adjoint()));
    }
    Ok(acc.scale(1.0 / g.order() as f64))
}

/// Both sides of Parseval: (E_x tr(f(x) g(x)*), Σ_ρ n_ρ tr(f̂(ρ) ĝ(ρ)*)).
pub fn parseval_check(
    f: &MatrixFn,
    g: &MatrixFn,
    table: &IrrepTable,
) -> Result<(Complex64, Complex64)> {
    same_group(f, g)?;
    let fh = fourier_transform(f, table)?;
    let gh = fourier_transform(g, table)?;
    let grp = f.group.as_ref();
    let lhs = grp
        .elements()
        .map(|x| f.values[x].hs_inner(&g.values[x]))
        .sum::<Complex64>()
        / grp.order() as f64;
    let rhs = fh
        .blocks
        .iter()
        .zip(&gh.blocks)
        .zip(&fh.dims)
        .map(|((a, b), &d)| a.hs_inner(b) * d as f64)
        .sum();
    Ok((lhs, rhs))
}

/// Convolution (f*g)(x) = E_{yz=x} f(y) g(z).
pub fn convolve(f: &MatrixFn, g: &MatrixFn) -> Result<MatrixFn> {
    same_group(f, g)?;
    let grp = Arc::clone(&f.group);
    let scale = 1.0 / grp.order() as f64;
    let values: Vec<CMatrix> = grp
        .elements()
        .map(|x| {
            let mut acc = CMatrix::zeros(f.n, f.n);
            for y in grp.elements() {
                // z = y⁻¹ x
                let z = grp.mul(grp.inv(y), x);
                acc = acc.add(&f.values[y].mul(&g.values[z]));
            }
            acc.scale(scale)
        })
        .collect();
    MatrixFn::new(grp, values)
}

/// Max blockwise residual of the convolution formula f̂·ĝ = (f*g)^.
pub fn convolution_check(f: &MatrixFn, g: &MatrixFn, table: &IrrepTable) -> Result<f64> {
    let conv = convolve(f, g)?;
    let lhs = fourier_transform(&conv, table)?;
    let fh = fourier_transform(f, table)?;
    let gh = fourier_transform(g, table)?;
    let mut worst: f64 = 0.0;
    for ((l, a), b) in lhs.blocks.iter().zip(&fh.blocks).zip(&gh.blocks) {
        worst = worst.max(l.sub(&a.mul(b)).max_abs());
    }
    Ok(worst)
}

/// Fourier inversion: f(x) = Σ_ρ n_ρ tr_ρ( conj(ρ(x⁻¹)) · f̂(ρ) ).
pub fn invert(coeffs: &FourierCoeffs, table: &IrrepTable) -> Result<MatrixFn> {
    if coeffs.group_fingerprint != table.group().fingerprint() {
        return Err(Error::GroupMismatch("coefficients come from a different group".into()));
    }
    let residual = table.certificate().schur_delta;
    if residual > INVERT_TABLE_TOL {
        return Err(Error::IncompleteTable { residual });
    }
    let g = Arc::clone(table.group());
    let n = coeffs.n;
    let values: Vec<CMatrix> = g
        .elements()
        .map(|x| {
            let xi = g.inv(x);
            let mut acc = CMatrix::zeros(n, n);
            for (rho, block) in table.irreps().iter().zip(&coeffs.blocks) {
                let rot = block_scalar_mul(&rho.matrix(xi).conj(), block)?;
                let traced = partial_trace_blocks(&rot, n, rho.dim())?;
                acc = acc.add(&traced.scale(rho.dim() as f64));
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    MatrixFn::new(g, values)
}

/// Fourth power of the U² norm by direct averaging of
/// tr(f(x) f(y)* f(z) f(w)*) over the constrained quadruples. Cost grows as
/// |G|³, so orders beyond the cap are refused in favor of the Fourier route.
pub fn u2_norm4_direct(f: &MatrixFn) -> Result<f64> {
    let g = f.group.as_ref();
    if g.order() > U2_DIRECT_ORDER_CAP {
        return Err(Error::Precondition(format!(
            "direct U² path is capped at order {U2_DIRECT_ORDER_CAP}; use the Fourier route"
        )));
    }
    let total = quad_inner(f, f, f, f)?;
    assert!(
        total.im.abs() < 1e-9,
        "U² fourth power must be real, imaginary residue {:.3e}",
        total.im
    );
    Ok(total.re)
}

/// Fourth power of the U² norm through the transform: Σ_ρ n_ρ ‖f̂(ρ)‖_box⁴.
pub fn u2_norm4_fourier(f: &MatrixFn, table: &IrrepTable) -> Result<f64> {
    let residual = table.certificate().schur_delta;
    if residual > INVERT_TABLE_TOL {
        return Err(Error::IncompleteTable { residual });
    }
    let coeffs = fourier_transform(f, table)?;
    Ok(coeffs
        .blocks
        .iter()
        .zip(&coeffs.dims)
        .map(|(b, &d)| d as f64 * box_norm4(b))
        .sum())
}

/// Normalized variant ‖f‖_u²⁴ = ‖f‖_U²⁴ / n.
pub fn u2_norm4_normalized(f: &MatrixFn, table: &IrrepTable) -> Result<f64> {
    Ok(u2_norm4_fourier(f, table)? / f.n as f64)
}

/// Generalized inner product [f1,f2,f3,f4] =
/// E_{xy⁻¹zw⁻¹=e} tr(f1(x) f2(y)* f3(z) f4(w)*).
pub fn quad_inner(
    f1: &MatrixFn,
    f2: &MatrixFn,
    f3: &MatrixFn,
    f4: &MatrixFn,
) -> Result<Complex64> {
    same_group(f1, f2)?;
    same_group(f1, f3)?;
    same_group(f1, f4)?;
    let g = f1.group.as_ref();
    let o = g.order();
    // summed in fixed x-major order; per (x, y) the left factor is reused
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..o {
        let mut sum_x = Complex64::new(0.0, 0.0);
        for y in 0..o {
            let left = f1.values[x].mul(&f2.values[y].adjoint());
            let left_adj = left.adjoint();
            let xy_inv = g.mul(x, g.inv(y));
            for z in 0..o {
                let w = g.mul(xy_inv, z);
                let right = f3.values[z].mul(&f4.values[w].adjoint());
                // tr(left · right) = <right, left*>
                sum_x += right.hs_inner(&left_adj);
            }
        }
        total += sum_x;
    }
    Ok(total / (o * o * o) as f64)
}
