//! Dense real linear algebra used by every other module: determinants,
//! inverses, Schur complements, characteristic-polynomial coefficients and
//! spectral helpers.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SYM_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-8;
pub const SINGULAR_TOL: f64 = 1e-12;
pub const NUM_TOL: f64 = 1e-9;
pub const DET_RTOL: f64 = 1e-9;
pub const INTERP_TOL: f64 = 1e-6;
pub const MINOR_TOL: f64 = 1e-9;
pub const CLAMP_TOL: f64 = 1e-9;

/// Relative size below which a spectral quantity is treated as roundoff.
pub(crate) const SPECTRAL_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    SymmetricPsd,
    NonsymmetricPsd,
    Unclassified,
}

/// Ensemble matrix `L` together with its classification.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMatrix {
    m: DMatrix<f64>,
    kind: MatrixKind,
}

impl EnsembleMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let kind = classify(&m);
        let m = if kind == MatrixKind::SymmetricPsd { symmetrize(&m) } else { m };
        Ok(Self { m, kind })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("expected {n} entries per row")));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n), kind: MatrixKind::SymmetricPsd }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n), kind: MatrixKind::SymmetricPsd }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub(crate) fn with_kind(m: DMatrix<f64>, kind: MatrixKind) -> Self {
        Self { m, kind }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind == MatrixKind::SymmetricPsd
    }

    pub fn principal(&self, idx: &[usize]) -> DMatrix<f64> {
        principal_submatrix(&self.m, idx)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * s, kind: self.kind }
    }
}

/// Marginal kernel `K`; `K_ii` is the inclusion probability of `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalKernel {
    m: DMatrix<f64>,
}

impl MarginalKernel {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().copied().collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * s }
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidMatrix(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn classify(m: &DMatrix<f64>) -> MatrixKind {
    if m.nrows() == 0 {
        return MatrixKind::SymmetricPsd;
    }
    let asym = (m - m.transpose()).amax();
    let sym = symmetrize(m);
    let min_eig = symmetric_eigenvalues(&sym).into_iter().fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL {
        MatrixKind::Unclassified
    } else if asym <= SYM_TOL {
        MatrixKind::SymmetricPsd
    } else {
        MatrixKind::NonsymmetricPsd
    }
}

/// `K = L(I+L)^{-1}`.
pub fn kernel_from_ensemble(l: &EnsembleMatrix) -> Result<MarginalKernel> {
    let n = l.dim();
    let i_plus_l = DMatrix::identity(n, n) + l.matrix();
    if det(&i_plus_l).abs() <= SINGULAR_TOL {
        return Err(Error::SingularMatrix);
    }
    let inv = i_plus_l.try_inverse().ok_or(Error::SingularMatrix)?;
    let k = l.matrix() * inv;
    let k = if l.is_symmetric() { symmetrize(&k) } else { k };
    MarginalKernel::new(k)
}

/// `L = K(I-K)^{-1}`.
pub fn ensemble_from_kernel(k: &MarginalKernel) -> Result<EnsembleMatrix> {
    let n = k.dim();
    let i_minus_k = DMatrix::identity(n, n) - k.matrix();
    if det(&i_minus_k).abs() <= SINGULAR_TOL {
        return Err(Error::SingularMatrix);
    }
    let inv = i_minus_k.try_inverse().ok_or(Error::SingularMatrix)?;
    EnsembleMatrix::new(k.matrix() * inv)
}

/// Determinant by LU with partial pivoting. Zero for singular input.
pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// `(sign, ln|det|)`; sign is 0 and the log is `-inf` for singular input.
pub fn log_abs_det(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (1.0, 0.0);
    }
    let lu = m.clone().lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log = 0.0;
    let u = lu.u();
    for d in u.diagonal().iter() {
        if *d == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        sign *= d.signum();
        log += d.abs().ln();
    }
    (sign, log)
}

pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or(Error::SingularMatrix)
}

pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

pub(crate) fn check_index_set(t: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = t.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("repeated element in {t:?}")));
    }
    if let Some(&x) = s.last() {
        if x >= n {
            return Err(Error::InvalidArgument(format!("element {x} outside ground set of size {n}")));
        }
    }
    Ok(s)
}

pub(crate) fn complement(sorted: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - sorted.len());
    let mut it = sorted.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// `ln det` of a block from its LU factors; `None` when some pivot is at most
/// `SINGULAR_TOL` relative to the block scale.
fn block_log_det(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, scale: f64) -> Result<Option<f64>> {
    let mut sign: f64 = lu.p().determinant();
    let mut log = 0.0;
    for d in lu.u().diagonal().iter() {
        if d.abs() <= SINGULAR_TOL * scale.max(1.0) {
            return Ok(None);
        }
        sign *= d.signum();
        log += d.abs().ln();
    }
    if sign < 0.0 {
        return Err(Error::NegativeMass(-log.exp()));
    }
    Ok(Some(log))
}

/// Schur complement of `m` on the sorted set `t`, plus `ln det(m_{t,t})`.
/// `None` when the block is singular.
pub(crate) fn schur_parts(m: &DMatrix<f64>, t: &[usize]) -> Result<Option<(DMatrix<f64>, f64)>> {
    let n = m.nrows();
    if t.is_empty() {
        return Ok(Some((m.clone(), 0.0)));
    }
    let rest = complement(t, n);
    let block = principal_submatrix(m, t);
    let scale = block.amax();
    let lu = block.lu();
    let Some(log_det) = block_log_det(&lu, scale)? else {
        return Ok(None);
    };
    let cross = DMatrix::from_fn(t.len(), rest.len(), |a, b| m[(t[a], rest[b])]);
    let solved = lu.solve(&cross).ok_or(Error::SingularBlock)?;
    let left = DMatrix::from_fn(rest.len(), t.len(), |a, b| m[(rest[a], t[b])]);
    let mut out = principal_submatrix(m, &rest);
    out.gemm(-1.0, &left, &solved, 1.0);
    Ok(Some((out, log_det)))
}

/// `L^T = L_{T̄} - L_{T̄,T} L_{T,T}^{-1} L_{T,T̄}` on the complement of `t`, in
/// increasing index order.
pub fn schur_complement(l: &EnsembleMatrix, t: &[usize]) -> Result<EnsembleMatrix> {
    let t = check_index_set(t, l.dim())?;
    let (m, _) = schur_parts(l.matrix(), &t)?.ok_or(Error::SingularBlock)?;
    let m = if l.is_symmetric() { symmetrize(&m) } else { m };
    Ok(EnsembleMatrix::with_kind(m, l.kind()))
}

/// `e_0..e_n` of the eigenvalues of `L`, from `det(L + zI)` at `z = 0..n`
/// and Newton divided differences.
pub fn char_poly_coeffs(l: &EnsembleMatrix) -> Result<Vec<f64>> {
    let n = l.dim();
    let shifted = |z: f64| det(&(l.matrix() + DMatrix::identity(n, n) * z));
    let c = monomial_from_integer_nodes(&(0..=n).map(|m| shifted(m as f64)).collect::<Vec<_>>());
    let probe = -0.5;
    let (mut value, mut scale, mut pw) = (0.0, 0.0, 1.0);
    for &cm in &c {
        value += cm * pw;
        scale += cm.abs() * pw.abs();
        pw *= probe;
    }
    let residual = (value - shifted(probe)).abs() / scale.max(1.0);
    if !(residual <= INTERP_TOL) {
        return Err(Error::IllConditioned { residual });
    }
    Ok((0..=n).map(|j| c[n - j]).collect())
}

/// Monomial coefficients of the polynomial taking `values[m]` at `z = m`,
/// via Newton divided differences.
pub fn monomial_from_integer_nodes(values: &[f64]) -> Vec<f64> {
    let n = values.len().saturating_sub(1);
    let mut a = values.to_vec();
    for level in 1..=n {
        for m in (level..=n).rev() {
            a[m] = (a[m] - a[m - 1]) / level as f64;
        }
    }
    let mut c = vec![0.0; n + 1];
    if values.is_empty() {
        return c;
    }
    c[0] = a[n];
    for j in (0..n).rev() {
        let x = j as f64;
        for m in (0..=(n - 1 - j)).rev() {
            c[m + 1] += c[m];
            c[m] *= -x;
        }
        c[0] += a[j];
    }
    c
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == 0.0))
}

/// Eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if is_diagonal(m) {
        return m.diagonal().iter().copied().collect();
    }
    m.symmetric_eigenvalues().iter().copied().collect()
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a symmetric matrix.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if is_diagonal(m) {
        return (m.diagonal().iter().copied().collect(), DMatrix::identity(n, n));
    }
    let e = SymmetricEigen::new(m.clone());
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn largest_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Elementary symmetric polynomials `e_0..e_d` of `values`.
pub fn elementary_symmetric(values: &[f64], d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d + 1];
    e[0] = 1.0;
    for (seen, &v) in values.iter().enumerate() {
        for j in (1..=d.min(seen + 1)).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

fn elementary_symmetric_complex(values: &[Complex<f64>], d: usize) -> Vec<Complex<f64>> {
    let mut e = vec![Complex::new(0.0, 0.0); d + 1];
    e[0] = Complex::new(1.0, 0.0);
    for (seen, &v) in values.iter().enumerate() {
        for j in (1..=d.min(seen + 1)).rev() {
            let prev = e[j - 1];
            e[j] += v * prev;
        }
    }
    e
}

/// Elementary symmetric polynomials of a matrix spectrum, kept relative to
/// the spectral radius so large degrees neither overflow nor underflow.
#[derive(Clone, Debug)]
pub struct SpectralEsp {
    scaled: Vec<f64>,
    bound: Vec<f64>,
    log_scale: f64,
}

impl SpectralEsp {
    pub fn of_matrix(m: &DMatrix<f64>, symmetric: bool, degree: usize) -> Self {
        let n = m.nrows();
        let degree = degree.min(n);
        if symmetric {
            Self::from_real(&symmetric_eigenvalues(m), degree)
        } else {
            let eig: Vec<Complex<f64>> = if n == 0 {
                Vec::new()
            } else {
                m.clone().complex_eigenvalues().iter().copied().collect()
            };
            let s = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if s == 0.0 {
                return Self::trivial(degree);
            }
            let eig: Vec<Complex<f64>> =
                eig.iter().filter(|z| z.norm() > SPECTRAL_RTOL * s).map(|z| z / s).collect();
            let abs: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
            let scaled = elementary_symmetric_complex(&eig, degree).iter().map(|z| z.re).collect();
            Self { scaled, bound: elementary_symmetric(&abs, degree), log_scale: s.ln() }
        }
    }

    pub fn from_real(values: &[f64], degree: usize) -> Self {
        let s = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if s == 0.0 {
            return Self::trivial(degree);
        }
        let v: Vec<f64> = values.iter().filter(|x| x.abs() > SPECTRAL_RTOL * s).map(|x| x / s).collect();
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        Self {
            scaled: elementary_symmetric(&v, degree),
            bound: elementary_symmetric(&abs, degree),
            log_scale: s.ln(),
        }
    }

    fn trivial(degree: usize) -> Self {
        let mut scaled = vec![0.0; degree + 1];
        scaled[0] = 1.0;
        Self { bound: scaled.clone(), scaled, log_scale: 0.0 }
    }

    pub fn degree(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `ln e_j`, `-inf` for a vanishing coefficient.
    pub fn ln(&self, j: usize) -> Result<f64> {
        if j >= self.scaled.len() {
            return Ok(f64::NEG_INFINITY);
        }
        let v = clamp_relative(self.scaled[j], self.bound[j])?;
        Ok(if v == 0.0 { f64::NEG_INFINITY } else { v.ln() + j as f64 * self.log_scale })
    }
}

/// Clamps a computed mass that should be nonnegative, relative to the size
/// of the terms that produced it.
pub(crate) fn clamp_relative(v: f64, scale: f64) -> Result<f64> {
    if v > SPECTRAL_RTOL * scale {
        Ok(v)
    } else if v >= -MINOR_TOL * scale {
        Ok(0.0)
    } else {
        Err(Error::NegativeMass(v / scale))
    }
}

/// Clamps a ratio-of-determinants probability into `[0, 1]`.
pub fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_from_ensemble(&EnsembleMatrix::identity(2)).unwrap();
        assert!((k.matrix() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        let k = kernel_from_ensemble(&EnsembleMatrix::zeros(2)).unwrap();
        assert_eq!(k.matrix().amax(), 0.0);
        let l = EnsembleMatrix::new(m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let k = kernel_from_ensemble(&l).unwrap();
        let want = m(&[&[0.625, 0.125], &[0.125, 0.625]]);
        assert!((k.matrix() - &want).amax() < 1e-12);
        let back = ensemble_from_kernel(&MarginalKernel::new(want).unwrap()).unwrap();
        assert!((back.matrix() - l.matrix()).amax() < 1e-12);
    }

    #[test]
    fn kernel_with_unit_marginal_has_no_ensemble() {
        let k = MarginalKernel::new(DMatrix::from_diagonal_element(2, 2, 1.0)).unwrap();
        assert_eq!(ensemble_from_kernel(&k), Err(Error::SingularMatrix));
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&DMatrix::identity(3, 3)), 1.0);
        assert!((det(&m(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]])) - 6.0).abs() < 1e-14);
        assert!((det(&m(&[&[2.0, 1.0], &[1.0, 2.0]])) - 3.0).abs() < 1e-14);
        assert_eq!(det(&m(&[&[1.0, 2.0], &[2.0, 4.0]])), 0.0);
        let (s, l) = log_abs_det(&m(&[&[0.0, 1.0], &[2.0, 0.0]]));
        assert_eq!(s, -1.0);
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn schur_examples() {
        let s = schur_complement(&EnsembleMatrix::identity(3), &[0]).unwrap();
        assert_eq!(s.matrix(), &DMatrix::identity(2, 2));
        let l = EnsembleMatrix::new(m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let s = schur_complement(&l, &[0]).unwrap();
        assert!((s.matrix()[(0, 0)] - 1.5).abs() < 1e-15);
        let l = EnsembleMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(schur_complement(&l, &[0]), Err(Error::SingularBlock));
    }

    #[test]
    fn char_poly_examples() {
        let c = char_poly_coeffs(&EnsembleMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
        for (a, b) in c.iter().zip([1.0, 6.0, 11.0, 6.0]) {
            assert!((a - b).abs() < 1e-9, "{c:?}");
        }
        assert_eq!(char_poly_coeffs(&EnsembleMatrix::zeros(2)).unwrap(), vec![1.0, 0.0, 0.0]);
        let c = char_poly_coeffs(&EnsembleMatrix::identity(2)).unwrap();
        assert!((c[0] - 1.0).abs() + (c[1] - 2.0).abs() + (c[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_esp_matches_char_poly() {
        let l = m(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        let esp = SpectralEsp::of_matrix(&l, false, 2);
        assert!((esp.ln(1).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((esp.ln(2).unwrap() - 2f64.ln()).abs() < 1e-12);
        let esp = SpectralEsp::from_real(&[1.0, 2.0, 3.0], 3);
        assert!((esp.ln(2).unwrap().exp() - 11.0).abs() < 1e-12);
        let rank_one = SpectralEsp::from_real(&[1.0, 0.0, 0.0], 2);
        assert_eq!(rank_one.ln(2).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&m(&[&[1.0, 1.0], &[-1.0, 1.0]])), MatrixKind::NonsymmetricPsd);
        assert_eq!(classify(&m(&[&[1.0, 0.5], &[0.5, 1.0]])), MatrixKind::SymmetricPsd);
        assert_eq!(classify(&m(&[&[-1.0, 0.0], &[0.0, 1.0]])), MatrixKind::Unclassified);
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_probability(1.0 + 1e-12).unwrap(), 1.0);
        assert_eq!(clamp_probability(-1e-12).unwrap(), 0.0);
        assert!(clamp_probability(1.01).is_err());
    }
}
