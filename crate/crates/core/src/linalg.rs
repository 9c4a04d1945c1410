//! Dense complex linear algebra for small Hermitian generators and the
//! unitaries they produce.
//!
//! Every generator in this crate is Hermitian and at most a few dozen modes
//! wide, so the matrix exponential is evaluated through a spectral
//! decomposition rather than a Padé or Taylor scheme.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Dense complex matrix, row/column indexed as `m[(row, col)]`.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Maximum entrywise deviation from Hermiticity accepted by [`hermitian_eig`],
/// scaled by `max(1, ‖H‖_max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum entrywise deviation of `U†U` from the identity for a matrix to be
/// treated as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Relative residual bound `‖HV − VΛ‖_max ≤ EIG_RESIDUAL_TOL · ‖H‖_max`.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian at entry ({row}, {col}): deviation {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not unitary: max |U†U - I| = {defect:e}")]
    NotUnitary { defect: f64 },
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Spectral decomposition `H = V Λ V†` with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns, in the same order as `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuild `V f(Λ) V†` for a function applied to the spectrum.
    pub fn reconstruct_with<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (col, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for row in 0..n {
                scaled[(row, col)] *= w;
            }
        }
        scaled * v.adjoint()
    }
}

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ensure_square(m: &ComplexMatrix) -> LinalgResult<usize> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Checks Hermiticity and reports the worst violating entry.
pub fn check_hermitian(h: &ComplexMatrix) -> LinalgResult<()> {
    let n = ensure_square(h)?;
    let tol = HERMITIAN_TOL * max_abs(h).max(1.0);
    let mut worst: Option<(usize, usize, f64)> = None;
    for row in 0..n {
        for col in row..n {
            let deviation = (h[(row, col)] - h[(col, row)].conj()).norm();
            if deviation > tol && worst.is_none_or(|(_, _, d)| deviation > d) {
                worst = Some((row, col, deviation));
            }
        }
    }
    match worst {
        Some((row, col, deviation)) => Err(LinalgError::NotHermitian {
            row,
            col,
            deviation,
        }),
        None => Ok(()),
    }
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    let gram = u.adjoint() * u;
    let mut defect = 0.0_f64;
    for row in 0..n {
        for col in 0..n {
            let target = if row == col { 1.0 } else { 0.0 };
            defect = defect.max((gram[(row, col)] - target).norm());
        }
    }
    defect
}

pub fn is_unitary(u: &ComplexMatrix) -> bool {
    u.is_square() && unitarity_defect(u) <= UNITARY_TOL
}

pub fn ensure_unitary(u: &ComplexMatrix) -> LinalgResult<()> {
    ensure_square(u)?;
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(LinalgError::NotUnitary { defect });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &ComplexMatrix) -> LinalgResult<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    // Project onto the exactly Hermitian part before handing off.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, order[col])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(−iHt)` for Hermitian `H`.
pub fn expm_unitary(h: &ComplexMatrix, t: f64) -> LinalgResult<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|lambda| Complex64::from_polar(1.0, -lambda * t)))
}

/// Gate fidelity `|Tr(U·U_D†)| / M`.
pub fn gate_fidelity(u: &ComplexMatrix, decomposed: &ComplexMatrix) -> LinalgResult<f64> {
    let n = ensure_square(u)?;
    let m = ensure_square(decomposed)?;
    if n != m {
        return Err(LinalgError::DimensionMismatch { left: n, right: m });
    }
    if n == 0 {
        return Ok(1.0);
    }
    // Tr(U·D†) = Σ_ij U_ij conj(D_ij)
    let trace: Complex64 = u
        .iter()
        .zip(decomposed.iter())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok((trace.norm() / n as f64).min(1.0))
}

/// Draws a Haar-distributed unitary by QR-factorizing a complex Ginibre matrix
/// and fixing the phases of R's diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for col in 0..n {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..n {
            q[(row, col)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with standard-normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        h[(row, row)] = Complex64::new(d, 0.0);
        for col in row + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im);
            h[(row, col)] = z;
            h[(col, row)] = z.conj();
        }
    }
    h
}
