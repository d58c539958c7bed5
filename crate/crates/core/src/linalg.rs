//! Dense kernels shared by the analysis and synthesis passes.
//!
//! Everything here works on [`nalgebra::DMatrix`] with either `f64` or
//! [`Complex64`] entries. Empty matrices (zero rows or zero columns) are
//! valid inputs and outputs throughout; the synthesis path produces a
//! `0 × n` noise coupling whenever no extra noise channels are needed.
//!
//! The structured constants follow the quadrature-pair convention used by
//! linear quantum systems: system variables come in `(q, p)` pairs and the
//! commutation matrix is block diagonal in `J = [[0, 1], [-1, 0]]`.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical thresholds used by rank decisions and identity checks.
///
/// All three are relative: `rank_rel_tol` is a fraction of the largest
/// singular value (or of a caller-supplied reference scale, whichever is
/// larger), `residual_tol` bounds residual norms divided by the norm of the
/// quantity being reproduced, and `symmetry_tol` bounds `‖M - Mᵀ‖ / ‖M‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rank_rel_tol: f64,
    pub residual_tol: f64,
    pub symmetry_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-9,
            residual_tol: 1e-8,
            symmetry_tol: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, residual_tol: f64, symmetry_tol: f64) -> Result<Self> {
        let tol = Self {
            rank_rel_tol,
            residual_tol,
            symmetry_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("residual_tol", self.residual_tol),
            ("symmetry_tol", self.symmetry_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Tolerance { name, value });
            }
        }
        Ok(())
    }

    /// Absolute threshold below which a singular value counts as zero.
    pub fn rank_cutoff(&self, sigma_max: f64, reference_scale: f64) -> f64 {
        self.rank_rel_tol * sigma_max.max(reference_scale)
    }
}

/// `diff / scale`, falling back to the absolute value when the scale is zero.
pub fn relative_residual(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn frobenius<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    m.iter()
        .map(|x| x.clone().modulus_squared())
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// Predicates

pub fn is_symmetric(m: &RealMatrix, tol: f64) -> bool {
    m.is_square() && frobenius(&(m - m.transpose())) <= tol * frobenius(m)
}

pub fn is_skew_symmetric(m: &RealMatrix, tol: f64) -> bool {
    m.is_square() && frobenius(&(m + m.transpose())) <= tol * frobenius(m)
}

pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    relative_residual(frobenius(&(m - m.adjoint())), frobenius(m))
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && hermitian_residual(m) <= tol
}

/// Hermitian and no eigenvalue below `-tol · max|λ|`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !is_hermitian(m, tol) {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let values = m.clone().symmetric_eigenvalues();
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    values.iter().all(|&v| v >= -tol * scale)
}

// ---------------------------------------------------------------------------
// Structured constants

fn require_even(size: usize, what: &str) -> Result<()> {
    if size == 0 || !size.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "{what} needs a positive even size, got {size}"
        )));
    }
    Ok(())
}

/// Block-diagonal canonical commutation matrix `diag(J, …, J)` of size `k`.
pub fn build_theta(k: usize) -> Result<RealMatrix> {
    require_even(k, "commutation matrix")?;
    let mut theta = RealMatrix::zeros(k, k);
    for block in 0..k / 2 {
        theta[(2 * block, 2 * block + 1)] = 1.0;
        theta[(2 * block + 1, 2 * block)] = -1.0;
    }
    Ok(theta)
}

/// Permutation gathering odd-position entries ahead of even-position ones.
///
/// Acting on a column vector: `P·(a₁, a₂, …, a₂ₘ) = (a₁, a₃, …, a₂ₘ₋₁, a₂, a₄, …, a₂ₘ)`.
pub fn build_permutation(size: usize) -> Result<RealMatrix> {
    require_even(size, "interleaving permutation")?;
    let half = size / 2;
    let mut p = RealMatrix::zeros(size, size);
    for k in 0..half {
        p[(k, 2 * k)] = 1.0;
        p[(half + k, 2 * k + 1)] = 1.0;
    }
    Ok(p)
}

/// `Pᵀ [[0, I], [-I, 0]] P`; equal to `diag(J)` of the same size.
pub fn interleaved_symplectic(size: usize) -> Result<RealMatrix> {
    let p = build_permutation(size)?;
    let half = size / 2;
    let mut block = RealMatrix::zeros(size, size);
    for k in 0..half {
        block[(k, half + k)] = 1.0;
        block[(half + k, k)] = -1.0;
    }
    Ok(p.transpose() * block * p)
}

/// The 2×2 quadrature-to-mode matrix `M = ½[[1, i], [1, -i]]`.
pub fn mode_matrix() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, I, ONE, -I]) * Complex64::new(0.5, 0.0)
}

/// `diag(M, …, M)` of the given even size.
pub fn block_diag_mode(size: usize) -> Result<ComplexMatrix> {
    require_even(size, "mode matrix")?;
    let m = mode_matrix();
    let mut out = ComplexMatrix::zeros(size, size);
    for block in 0..size / 2 {
        out.view_mut((2 * block, 2 * block), (2, 2)).copy_from(&m);
    }
    Ok(out)
}

/// `Γ = P · diag(M)`.
pub fn build_gamma(size: usize) -> Result<ComplexMatrix> {
    let p = to_complex(&build_permutation(size)?);
    Ok(p * block_diag_mode(size)?)
}

/// Row selector `[I_{keep/2}  0]` of shape `keep/2 × total/2`.
pub fn build_selector(keep: usize, total: usize) -> Result<RealMatrix> {
    require_even(keep, "selector")?;
    if !total.is_multiple_of(2) || total < keep {
        return Err(Error::Dimension(format!(
            "selector needs an even total >= {keep}, got {total}"
        )));
    }
    let mut sigma = RealMatrix::zeros(keep / 2, total / 2);
    sigma.fill_diagonal(1.0);
    Ok(sigma)
}

/// `G·diag(J)·Gᵀ` for a matrix with an even number of columns.
///
/// Each entry is accumulated as `Σₖ (g_{i,2k} g_{j,2k+1} − g_{i,2k+1} g_{j,2k})`,
/// so the result is skew-symmetric bit for bit.
pub fn symplectic_form(g: &RealMatrix) -> Result<RealMatrix> {
    if !g.ncols().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "symplectic form needs an even column count, got {}",
            g.ncols()
        )));
    }
    let n = g.nrows();
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for k in 0..g.ncols() / 2 {
                acc += g[(i, 2 * k)] * g[(j, 2 * k + 1)] - g[(i, 2 * k + 1)] * g[(j, 2 * k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = -acc;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Small helpers

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.im)
}

/// Horizontal concatenation; all blocks must share a row count.
pub fn hstack<T: ComplexField>(blocks: &[&DMatrix<T>]) -> Result<DMatrix<T>> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(Error::Dimension("hstack: row counts differ".into()));
    }
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::<T>::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    Ok(out)
}

/// Vertical concatenation; all blocks must share a column count.
pub fn vstack<T: ComplexField>(blocks: &[&DMatrix<T>]) -> Result<DMatrix<T>> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    if blocks.iter().any(|b| b.ncols() != cols) {
        return Err(Error::Dimension("vstack: column counts differ".into()));
    }
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Eigen / rank kernels

/// Eigen-decomposition `H = U†·diag(values)·U` of a Hermitian matrix.
///
/// Rows of `unitary` are the conjugated eigenvectors. Eigenvalues are sorted
/// descending; each eigenvector is rotated so its first non-negligible
/// component is real and positive, which fixes the phase freedom.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub unitary: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|v| v)
    }

    /// `U†·diag(f(λ))·U`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.unitary.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let w = f(v);
            scaled.row_mut(k).scale_mut(w);
        }
        let out = self.unitary.adjoint() * scaled;
        debug_assert_eq!(out.shape(), (n, n));
        out
    }
}

pub fn hermitian_eig(h: &ComplexMatrix, tol: &TolerancePolicy) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let residual = hermitian_residual(h);
    if residual > tol.symmetry_tol {
        return Err(Error::NotHermitian {
            residual,
            tol: tol.symmetry_tol,
        });
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            unitary: ComplexMatrix::zeros(0, 0),
        });
    }

    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut unitary = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (row, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        let peak = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let lead = v
            .iter()
            .find(|z| z.norm() > 1e-8 * peak)
            .copied()
            .unwrap_or(ONE);
        let phase = lead.conj() / lead.norm();
        for j in 0..n {
            unitary[(row, j)] = (v[j] * phase).conj();
        }
    }
    Ok(HermitianEigen { values, unitary })
}

/// Singular values, largest first. Empty for a matrix with a zero dimension.
pub fn singular_values<T>(m: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Count of singular values above `rank_rel_tol × σ_max`.
pub fn numerical_rank<T>(m: &DMatrix<T>, tol: &TolerancePolicy) -> usize
where
    T: ComplexField<RealField = f64>,
{
    rank_with_scale(m, tol, 0.0)
}

/// Like [`numerical_rank`], with the cutoff measured against
/// `max(σ_max, reference_scale)`.
///
/// The reference scale matters when a matrix is assembled from terms that
/// cancel: floating-point leftovers of a cancelled sum are relative to the
/// terms, not to the (tiny) result.
pub fn rank_with_scale<T>(m: &DMatrix<T>, tol: &TolerancePolicy, reference_scale: f64) -> usize
where
    T: ComplexField<RealField = f64>,
{
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 && reference_scale == 0.0 {
        return 0;
    }
    let cutoff = tol.rank_cutoff(top, reference_scale);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// `[[re, im], [-im, re]]`.
pub fn real_embedding(re: &RealMatrix, im: &RealMatrix) -> Result<RealMatrix> {
    if re.shape() != im.shape() {
        return Err(Error::Dimension(format!(
            "real and imaginary parts differ in shape: {:?} vs {:?}",
            re.shape(),
            im.shape()
        )));
    }
    let top = hstack(&[re, im])?;
    let neg = -im;
    let bottom = hstack(&[&neg, re])?;
    vstack(&[&top, &bottom])
}

/// Rank of `re + i·im`, computed as half the rank of its real embedding.
pub fn complex_rank_via_real_embedding(
    re: &RealMatrix,
    im: &RealMatrix,
    tol: &TolerancePolicy,
) -> Result<usize> {
    complex_rank_via_real_embedding_scaled(re, im, tol, 0.0)
}

pub fn complex_rank_via_real_embedding_scaled(
    re: &RealMatrix,
    im: &RealMatrix,
    tol: &TolerancePolicy,
    reference_scale: f64,
) -> Result<usize> {
    let embedded = real_embedding(re, im)?;
    let rank = rank_with_scale(&embedded, tol, reference_scale);
    if rank % 2 != 0 {
        return Err(Error::Numerical(format!(
            "real embedding has odd rank {rank}; singular values straddle the cutoff"
        )));
    }
    Ok(rank / 2)
}

/// Factor a PSD matrix of rank `k` as `Λ†Λ` with `Λ` of shape `k × n`.
///
/// Uses the top-`k` eigenpairs: `Λ = diag(√λ₁, …, √λₖ)·U₊` where the rows of
/// `U₊` are the matching conjugated eigenvectors.
pub fn psd_low_rank_factor(
    xi: &ComplexMatrix,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<ComplexMatrix> {
    psd_low_rank_factor_scaled(xi, k, tol, 0.0)
}

pub fn psd_low_rank_factor_scaled(
    xi: &ComplexMatrix,
    k: usize,
    tol: &TolerancePolicy,
    reference_scale: f64,
) -> Result<ComplexMatrix> {
    let n = xi.nrows();
    let eig = hermitian_eig(xi, tol)?;
    let top = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let scale = top.max(reference_scale);

    if let Some(&lowest) = eig.values.last() {
        if lowest < -tol.residual_tol * scale {
            return Err(Error::Factorization(format!(
                "matrix is not positive semidefinite: eigenvalue {lowest:.3e} (scale {scale:.3e})"
            )));
        }
    }
    let cutoff = tol.rank_cutoff(top, reference_scale);
    let rank = if scale == 0.0 {
        0
    } else {
        eig.values.iter().filter(|&&v| v > cutoff).count()
    };
    if rank != k {
        return Err(Error::Factorization(format!(
            "expected rank {k}, found numerical rank {rank}"
        )));
    }

    let mut factor = ComplexMatrix::zeros(k, n);
    for row in 0..k {
        let weight = eig.values[row].sqrt();
        for j in 0..n {
            factor[(row, j)] = eig.unitary[(row, j)] * weight;
        }
    }
    Ok(factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_small_sizes() {
        let j = build_theta(2).unwrap();
        assert_eq!(j, RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));

        let t4 = build_theta(4).unwrap();
        let mut expected = RealMatrix::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).copy_from(&j);
        expected.view_mut((2, 2), (2, 2)).copy_from(&j);
        assert_eq!(t4, expected);
        assert_eq!(&t4 * &t4, -RealMatrix::identity(4, 4));
    }

    #[test]
    fn theta_rejects_bad_sizes() {
        assert!(matches!(build_theta(0), Err(Error::Dimension(_))));
        assert!(matches!(build_theta(3), Err(Error::Dimension(_))));
    }

    #[test]
    fn theta_is_skew_and_squares_to_minus_identity() {
        for k in (2..=20).step_by(2) {
            let t = build_theta(k).unwrap();
            assert_eq!(t.transpose(), -&t);
            assert_eq!(&t * &t, -RealMatrix::identity(k, k));
        }
    }

    #[test]
    fn permutation_action() {
        assert_eq!(build_permutation(2).unwrap(), RealMatrix::identity(2, 2));

        let p = build_permutation(4).unwrap();
        let a = nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!((p * a).as_slice(), &[1.0, 3.0, 2.0, 4.0]);

        let p6 = build_permutation(6).unwrap();
        assert_eq!(&p6 * p6.transpose(), RealMatrix::identity(6, 6));
        for i in 0..6 {
            assert_eq!(p6.row(i).sum(), 1.0);
            assert_eq!(p6.column(i).sum(), 1.0);
        }
        assert!(build_permutation(5).is_err());
    }

    #[test]
    fn interleaved_symplectic_matches_theta() {
        for size in [2, 4, 6, 8] {
            assert_eq!(
                interleaved_symplectic(size).unwrap(),
                build_theta(size).unwrap()
            );
        }
    }

    #[test]
    fn gamma_structure() {
        assert_eq!(build_gamma(2).unwrap(), mode_matrix());

        let g = build_gamma(4).unwrap();
        let m = mode_matrix();
        // Row 2 of Γ (1-based) is the first row of the second M block.
        for j in 0..2 {
            assert_eq!(g[(1, 2 + j)], m[(0, j)]);
            assert_eq!(g[(1, j)], ZERO);
        }

        // Direct multiplication oracle for 2·Γ†Γ.
        let mut gram = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += g[(k, i)].conj() * g[(k, j)];
                }
                gram[(i, j)] = acc * 2.0;
            }
        }
        assert_relative_eq!(
            frobenius(&(gram - ComplexMatrix::identity(4, 4))),
            0.0,
            epsilon = 1e-15
        );
        assert!(build_gamma(3).is_err());
    }

    #[test]
    fn selector_shape() {
        let s = build_selector(2, 6).unwrap();
        assert_eq!(s.shape(), (1, 3));
        assert_eq!(s[(0, 0)], 1.0);
        assert_eq!(s.sum(), 1.0);
        assert!(build_selector(4, 2).is_err());
    }

    #[test]
    fn eig_of_zero() {
        let tol = TolerancePolicy::default();
        let e = hermitian_eig(&ComplexMatrix::zeros(3, 3), &tol).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.unitary, ComplexMatrix::identity(3, 3));
    }

    #[test]
    fn eig_of_two_by_two_skew_companion() {
        // (i/4)·(-2J) = [[0, -i/2], [i/2, 0]]; characteristic polynomial λ² - 1/4.
        let h = ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -0.5), c(0.0, 0.5), ZERO]);
        let e = hermitian_eig(&h, &TolerancePolicy::default()).unwrap();
        assert_relative_eq!(e.values[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], -0.5, epsilon = 1e-14);
        assert!(frobenius(&(e.reconstruct() - &h)) < 1e-14);
        let uu = &e.unitary * e.unitary.adjoint();
        assert!(frobenius(&(uu - ComplexMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let h = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(
            hermitian_eig(&h, &TolerancePolicy::default()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_phase_convention_is_deterministic() {
        let h = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.3, 0.4),
                c(0.0, -1.0),
                c(0.3, -0.4),
                c(1.0, 0.0),
                c(0.5, 0.0),
                c(0.0, 1.0),
                c(0.5, 0.0),
                c(-1.0, 0.0),
            ],
        );
        let tol = TolerancePolicy::default();
        let a = hermitian_eig(&h, &tol).unwrap();
        let b = hermitian_eig(&h, &tol).unwrap();
        assert_eq!(a.unitary, b.unitary);
        for row in a.unitary.row_iter() {
            let lead = row.iter().find(|z| z.norm() > 1e-8).unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
        assert!(a.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn symplectic_form_matches_product() {
        let g = RealMatrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) * 0.3 - (j as f64) * 0.7 + 0.1);
        let direct = &g * build_theta(4).unwrap() * g.transpose();
        let form = symplectic_form(&g).unwrap();
        assert!(frobenius(&(&form - direct)) < 1e-14);
        assert_eq!(form.transpose(), -&form);
        assert!(symplectic_form(&RealMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rank_basics() {
        let tol = TolerancePolicy::default();
        assert_eq!(numerical_rank(&RealMatrix::zeros(4, 4), &tol), 0);
        assert_eq!(numerical_rank(&RealMatrix::zeros(0, 4), &tol), 0);
        let minus_two_j = build_theta(2).unwrap() * -2.0;
        assert_eq!(numerical_rank(&minus_two_j, &tol), 2);
        let rank_one = RealMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(numerical_rank(&rank_one, &tol), 1);
    }

    #[test]
    fn rank_with_reference_scale_suppresses_cancellation_noise() {
        let tol = TolerancePolicy::default();
        let noise = RealMatrix::from_row_slice(2, 2, &[0.0, 3e-17, -3e-17, 0.0]);
        assert_eq!(numerical_rank(&noise, &tol), 2);
        assert_eq!(rank_with_scale(&noise, &tol, 1.0), 0);
    }

    #[test]
    fn embedding_rank_small_cases() {
        let tol = TolerancePolicy::default();
        let id = RealMatrix::identity(2, 2);
        let zero = RealMatrix::zeros(2, 2);
        assert_eq!(
            complex_rank_via_real_embedding(&id, &zero, &tol).unwrap(),
            2
        );
        assert_eq!(
            complex_rank_via_real_embedding(&zero, &zero, &tol).unwrap(),
            0
        );
        assert!(complex_rank_via_real_embedding(&id, &RealMatrix::zeros(2, 3), &tol).is_err());
    }

    #[test]
    fn psd_factor_cases() {
        let tol = TolerancePolicy::default();

        let empty = psd_low_rank_factor(&ComplexMatrix::zeros(3, 3), 0, &tol).unwrap();
        assert_eq!(empty.shape(), (0, 3));

        let d = ComplexMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), ZERO, ZERO, ZERO]);
        let f = psd_low_rank_factor(&d, 1, &tol).unwrap();
        assert_eq!(f.shape(), (1, 2));
        assert_relative_eq!(f[(0, 0)].norm(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(f[(0, 1)].norm(), 0.0, epsilon = 1e-14);
        assert!(frobenius(&(f.adjoint() * &f - &d)) < 1e-14);

        // ½I + (i/4)(-2J) has eigenvalues {1, 0}.
        let xi = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)],
        );
        let f = psd_low_rank_factor(&xi, 1, &tol).unwrap();
        assert_eq!(f.shape(), (1, 2));
        assert!(frobenius(&(f.adjoint() * &f - &xi)) < 1e-10);
    }

    #[test]
    fn psd_factor_errors() {
        let tol = TolerancePolicy::default();
        let d = ComplexMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), ZERO, ZERO, ZERO]);
        assert!(matches!(
            psd_low_rank_factor(&d, 2, &tol),
            Err(Error::Factorization(_))
        ));
        let indefinite = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert!(matches!(
            psd_low_rank_factor(&indefinite, 1, &tol),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn predicates() {
        let tol = 1e-12;
        let j = build_theta(2).unwrap();
        assert!(is_skew_symmetric(&j, tol));
        assert!(!is_symmetric(&j, tol));
        assert!(is_symmetric(&RealMatrix::identity(3, 3), tol));
        let h = to_complex(&j) * I;
        assert!(is_hermitian(&h, tol));
        assert!(!is_psd(&h, tol));
        assert!(is_psd(&ComplexMatrix::identity(2, 2), tol));
    }

    #[test]
    fn tolerance_validation() {
        assert!(TolerancePolicy::new(1e-9, 1e-8, 1e-9).is_ok());
        assert!(matches!(
            TolerancePolicy::new(0.0, 1e-8, 1e-9),
            Err(Error::Tolerance {
                name: "rank_rel_tol",
                ..
            })
        ));
        assert!(TolerancePolicy::new(1e-9, f64::NAN, 1e-9).is_err());
        assert!(TolerancePolicy::new(1e-9, 1e-8, -1.0).is_err());
    }
}
