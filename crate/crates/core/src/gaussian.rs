//! Covariance-matrix algebra for zero-mean N-mode Gaussian states.
//!
//! Quadratures are mode-ordered `(x1, p1, x2, p2, ...)` and the vacuum has the
//! identity as its covariance matrix.

use crate::ddouble::DoubleDouble as Dd;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Mode labels of the four-mode ground-to-satellite layout.
pub mod modes {
    /// Photon kept at the ground station.
    pub const B1: usize = 0;
    /// Photon sent to the satellite.
    pub const B2: usize = 1;
    pub const B1_PERP: usize = 2;
    pub const B2_PERP: usize = 3;
}

const SYMMETRY_TOL: f64 = 1e-12;
const SYMPLECTIC_TOL: f64 = 1e-12;

/// Real symmetric `2N x 2N` covariance matrix.
///
/// Construction checks shape, finiteness and symmetry. Physicality is a separate
/// question answered by [`is_bona_fide`], since intermediate objects such as
/// Schur complements are legitimately sub-vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::InvalidModes(format!(
                "covariance matrix must be 2N x 2N with N >= 1, got {r} x {c}"
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if diff > SYMMETRY_TOL * m[(i, j)].abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Ok(Self { m })
    }

    /// Vacuum state of `n_modes` modes.
    pub fn identity(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "a Gaussian state needs at least one mode");
        Self {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode thermal state `nu * I2`.
    pub fn thermal(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::param("nu", nu, "must be positive and finite"));
        }
        Ok(Self {
            m: DMatrix::identity(2, 2) * nu,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CovMatrix) -> CovMatrix {
        let (a, b) = (self.m.nrows(), other.m.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        CovMatrix { m }
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &CovMatrix) -> f64 {
        assert_eq!(self.m.shape(), other.m.shape());
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Block-diagonal symplectic form with per-mode blocks `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    m: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

pub fn symplectic_form(n_modes: usize) -> SymplecticForm {
    assert!(n_modes >= 1, "symplectic form needs at least one mode");
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    SymplecticForm { m }
}

/// Real `2N x 2N` matrix `S` with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    m: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Checks the symplectic condition entrywise to `1e-12`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::InvalidModes(format!(
                "symplectic matrix must be 2N x 2N with N >= 1, got {r} x {c}"
            )));
        }
        let s = Self { m };
        let defect = s.symplectic_defect();
        if !(defect <= SYMPLECTIC_TOL) {
            return Err(Error::param(
                "symplectic_defect",
                defect,
                "S Ω Sᵀ differs from Ω",
            ));
        }
        Ok(s)
    }

    pub fn identity(n_modes: usize) -> Self {
        assert!(n_modes >= 1);
        Self {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `max |S Ω Sᵀ - Ω|` over all entries.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        let lhs = &self.m * omega.matrix() * self.m.transpose();
        (lhs - omega.matrix()).amax()
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticTransform) -> Result<SymplecticTransform> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                found: other.n_modes(),
            });
        }
        Ok(SymplecticTransform {
            m: &self.m * &other.m,
        })
    }
}

fn check_squeezing(s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::param("s", s, "squeezing must be finite and >= 0"));
    }
    Ok(())
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::param("theta", theta, "overlap must lie in [0, 1]"));
    }
    Ok(())
}

/// Two-mode squeezed vacuum: `cosh 2s` on the diagonal blocks and `sinh 2s σz`
/// off the diagonal.
pub fn two_mode_squeezed_cm(s: f64) -> Result<CovMatrix> {
    check_squeezing(s)?;
    let (c, sh) = ((2.0 * s).cosh(), (2.0 * s).sinh());
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, sh, 0.0, //
            0.0, c, 0.0, -sh, //
            sh, 0.0, c, 0.0, //
            0.0, -sh, 0.0, c,
        ],
    );
    Ok(CovMatrix { m })
}

/// Squeezed pair `(b1, b2)` with the orthogonal modes `(b1⊥, b2⊥)` in vacuum.
pub fn initial_four_mode_cm(s: f64) -> Result<CovMatrix> {
    Ok(two_mode_squeezed_cm(s)?.direct_sum(&CovMatrix::identity(2)))
}

/// Beam-splitter-like mixing of `b2` with `b2⊥` at amplitude transmissivity
/// `theta`. `b1` is untouched and `b1⊥` is negated, as in the printed transform.
pub fn lossy_bogoliubov(theta: f64) -> Result<SymplecticTransform> {
    check_theta(theta)?;
    let t = (1.0 - theta * theta).max(0.0).sqrt();
    // Mode-level 4x4 matrix in the (b1, b2, b1⊥, b2⊥) basis, expanded with I2.
    let mode = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, theta, 0.0, t],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, t, 0.0, -theta],
    ];
    let mut m = DMatrix::zeros(8, 8);
    for (i, row) in mode.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(2 * i, 2 * j)] = v;
            m[(2 * i + 1, 2 * j + 1)] = v;
        }
    }
    Ok(SymplecticTransform { m })
}

/// `S σ Sᵀ`.
pub fn apply_symplectic(s: &SymplecticTransform, sigma: &CovMatrix) -> Result<CovMatrix> {
    if s.n_modes() != sigma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: s.n_modes(),
            found: sigma.n_modes(),
        });
    }
    let m = &s.m * &sigma.m * s.m.transpose();
    Ok(CovMatrix { m: symmetrize(m) })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn check_modes(n_modes: usize, modes: &[usize]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidModes("mode list is empty".into()));
    }
    for (k, &i) in modes.iter().enumerate() {
        if i >= n_modes {
            return Err(Error::InvalidModes(format!(
                "mode index {i} out of range for {n_modes} modes"
            )));
        }
        if modes[..k].contains(&i) {
            return Err(Error::InvalidModes(format!("mode index {i} repeated")));
        }
    }
    Ok(())
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Reduced state on `keep`, in the order given.
pub fn partial_trace(sigma: &CovMatrix, keep: &[usize]) -> Result<CovMatrix> {
    check_modes(sigma.n_modes(), keep)?;
    let idx = quadrature_indices(keep);
    Ok(CovMatrix {
        m: submatrix(&sigma.m, &idx, &idx),
    })
}

/// Symplectic eigenvalues in descending order.
///
/// Computed from the spectrum of `K Kᵀ` with `K = σ^½ Ω σ^½`, which carries
/// every `ν²` twice.
pub fn symplectic_eigenvalues(sigma: &CovMatrix) -> Result<Vec<f64>> {
    let n = sigma.n_modes();
    if sigma.m.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(sigma.m.clone());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n).matrix() * &root;
    let gram = symmetrize(&k * k.transpose());
    let mut sq: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    Ok(sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// Closed-form symplectic eigenvalues for one or two modes, descending.
///
/// One mode: `√det σ`. Two modes: `ν±² = (Δ ± √(Δ² − 4 det σ)) / 2` with the
/// seralian `Δ = det A + det B + 2 det C`.
pub fn symplectic_eigenvalues_closed(sigma: &CovMatrix) -> Result<Vec<f64>> {
    match sigma.n_modes() {
        1 => {
            let d = sigma.det();
            if d <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(vec![d.sqrt()])
        }
        2 => {
            let m = &sigma.m;
            let a = m.view((0, 0), (2, 2)).determinant();
            let b = m.view((2, 2), (2, 2)).determinant();
            let c = m.view((0, 2), (2, 2)).determinant();
            let d = sigma.det();
            if d <= 0.0 || a <= 0.0 || b <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
            let delta = a + b + 2.0 * c;
            let disc = (delta * delta - 4.0 * d).max(0.0).sqrt();
            let plus = 0.5 * (delta + disc);
            // ν+² ν-² = det σ avoids cancellation in the smaller root.
            let minus = d / plus;
            Ok(vec![plus.sqrt(), minus.sqrt()])
        }
        n => Err(Error::InvalidModes(format!(
            "closed-form symplectic spectrum needs 1 or 2 modes, got {n}"
        ))),
    }
}

/// True iff the smallest symplectic eigenvalue is at least `1 - tol`.
pub fn is_bona_fide(sigma: &CovMatrix, tol: f64) -> bool {
    match symplectic_eigenvalues(sigma) {
        Ok(nu) => nu.iter().all(|&v| v >= 1.0 - tol),
        Err(_) => false,
    }
}

/// Rényi-2 entropy `½ ln det σ`.
pub fn renyi2_entropy(sigma: &CovMatrix) -> Result<f64> {
    let d = sigma.det();
    if !(d > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((0.5 * d.ln()).max(0.0))
}

/// Schur complement `B − Cᵀ A⁻¹ C`, where `B` is the block of the `steered`
/// modes and `A` the block of all remaining modes.
pub fn schur_complement(sigma: &CovMatrix, steered: &[usize]) -> Result<DMatrix<f64>> {
    let n = sigma.n_modes();
    check_modes(n, steered)?;
    let party: Vec<usize> = (0..n).filter(|k| !steered.contains(k)).collect();
    if party.is_empty() {
        return Err(Error::InvalidModes(
            "steering party is empty: every mode is steered".into(),
        ));
    }
    let (ia, ib) = (quadrature_indices(&party), quadrature_indices(steered));
    let a = submatrix(&sigma.m, &ia, &ia);
    let b = submatrix(&sigma.m, &ib, &ib);
    let c = submatrix(&sigma.m, &ia, &ib);
    if a.clone().cholesky().is_none() {
        return Err(Error::SingularBlock);
    }
    // B and CᵀA⁻¹C nearly cancel for close-to-pure states, so the correction
    // is formed and subtracted in double-double.
    let x = solve_dd(&a, &c).ok_or(Error::SingularBlock)?;
    let (p, q) = (c.nrows(), c.ncols());
    let out = DMatrix::from_fn(q, q, |i, j| {
        let mut acc = Dd::from_f64(b[(i, j)]);
        for k in 0..p {
            acc = acc - Dd::from_f64(c[(k, i)]) * x[k * q + j];
        }
        acc.to_f64()
    });
    Ok(symmetrize(out))
}

/// `A⁻¹ C` by Gaussian elimination with partial pivoting, row-major result.
fn solve_dd(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Option<Vec<Dd>> {
    let (p, q) = (c.nrows(), c.ncols());
    let w = p + q;
    let mut m: Vec<Dd> = (0..p)
        .flat_map(|i| (0..w).map(move |j| (i, j)))
        .map(|(i, j)| Dd::from_f64(if j < p { a[(i, j)] } else { c[(i, j - p)] }))
        .collect();
    for col in 0..p {
        let pivot = (col..p).max_by(|&r, &s| m[r * w + col].hi.abs().total_cmp(&m[s * w + col].hi.abs()))?;
        if m[pivot * w + col].hi == 0.0 {
            return None;
        }
        if pivot != col {
            for j in 0..w {
                m.swap(col * w + j, pivot * w + j);
            }
        }
        let d = m[col * w + col];
        for r in (0..p).filter(|&r| r != col) {
            let f = m[r * w + col] / d;
            for j in col..w {
                m[r * w + j] = m[r * w + j] - f * m[col * w + j];
            }
        }
    }
    let mut x = Vec::with_capacity(p * q);
    for i in 0..p {
        let d = m[i * w + i];
        x.extend((0..q).map(|j| m[i * w + p + j] / d));
    }
    Some(x)
}
