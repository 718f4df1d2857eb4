//! Density matrices and state functionals: validation, Gibbs states,
//! entropy, trace distance.

use ndarray::prelude::*;

use crate::operators::{
    dagger, hermitian_eig, hermiticity_defect, max_norm, trace, CMat, CVec, C64,
};
use crate::{tol, Error, Result};

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
///
/// Construction goes through [`DensityMatrix::new`], which enforces the
/// invariants (Hermiticity to `1e-12`, trace 1 to `1e-12`, eigenvalues
/// ≥ `−1e-10`), so holders of a value can rely on them.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validate and wrap a matrix as a quantum state.
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState(format!(
                "matrix is {}×{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = hermiticity_defect(&mat);
        if herm >= tol::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian: ‖ρ − ρ†‖_max = {herm:.3e}"
            )));
        }
        let tr = trace(&mat);
        if (tr - C64::new(1.0, 0.0)).norm() >= tol::TRACE {
            return Err(Error::InvalidState(format!("trace = {tr}, expected 1")));
        }
        let (w, _) = hermitian_eig(&mat)?;
        let min_eig = w.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -tol::POSITIVITY {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Pure state `|ψ⟩⟨ψ|` (the vector is normalized first).
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let d = psi.len();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj() / norm2);
        Self::new(mat)
    }

    /// The maximally mixed state `𝟙/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: crate::operators::eye(d).mapv(|z| z / d as f64),
        }
    }

    /// Computational-basis projector `|i⟩⟨i|`.
    pub fn basis_state(d: usize, i: usize) -> Self {
        let mut mat: CMat = Array2::zeros((d, d));
        mat[[i, i]] = C64::new(1.0, 0.0);
        Self { mat }
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Consume into the underlying matrix.
    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Population `⟨i|ρ|i⟩` of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.mat[[i, i]].re
    }

    /// Re-validate a matrix produced by numerical evolution.
    ///
    /// Re-Hermitizes via `(ρ+ρ†)/2`; eigenvalues in `(−abort_tol, 0)` are
    /// clamped to zero and the trace renormalized (round-off repair);
    /// anything below `−abort_tol` is a hard numerical failure.
    pub(crate) fn repair(mat: CMat, abort_tol: f64) -> Result<Self> {
        let herm = (&mat + &dagger(&mat)).mapv(|z| z * 0.5);
        let tr = trace(&herm).re;
        if !(0.5..1.5).contains(&tr) {
            return Err(Error::Numerical(format!(
                "state trace drifted to {tr:.6e} during evolution"
            )));
        }
        let (w, v) = hermitian_eig(&herm)?;
        let min_eig = w.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -abort_tol {
            return Err(Error::Numerical(format!(
                "state positivity violated: eigenvalue {min_eig:.3e} below -{abort_tol:.1e}"
            )));
        }
        let trace_defect = (tr - 1.0).abs();
        if min_eig >= 0.0 && trace_defect < tol::TRACE && herm.is_square() {
            // Fast path: nothing to repair.
            return Ok(Self { mat: herm });
        }
        let clamped: Array1<f64> = w.mapv(|x| x.max(0.0));
        let norm: f64 = clamped.sum();
        let mut scaled = v.clone();
        for (mut col, &wi) in scaled.columns_mut().into_iter().zip(clamped.iter()) {
            let p = C64::new(wi / norm, 0.0);
            col.mapv_inplace(|z| z * p);
        }
        Ok(Self {
            mat: scaled.dot(&dagger(&v)),
        })
    }
}

/// Thermal (Gibbs) state `e^{−βH}/Z` of a Hermitian Hamiltonian.
///
/// `β = +∞` returns the normalized projector onto the ground space (an equal
/// mixture when the ground energy is degenerate). `β = 0` is `𝟙/d`.
pub fn gibbs_state(h: &CMat, beta: f64) -> Result<DensityMatrix> {
    if beta.is_nan() {
        return Err(Error::InvalidParameter("β is NaN".into()));
    }
    let (w, v) = hermitian_eig(h)?;
    let d = h.nrows();
    let w_min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Array1<f64> = if beta.is_infinite() {
        // Ground-space projector; tolerance absorbs eigensolver round-off.
        let gap_tol = 1e-10 * (1.0 + w_min.abs());
        w.mapv(|x| if x - w_min <= gap_tol { 1.0 } else { 0.0 })
    } else {
        // Shift by the ground energy so exponentials stay bounded.
        w.mapv(|x| (-beta * (x - w_min)).exp())
    };
    let z: f64 = weights.sum();
    let mut scaled = v.clone();
    for (mut col, &wi) in scaled.columns_mut().into_iter().zip(weights.iter()) {
        let p = C64::new(wi / z, 0.0);
        col.mapv_inplace(|z| z * p);
    }
    let mat = scaled.dot(&dagger(&v));
    debug_assert!(mat.nrows() == d);
    DensityMatrix::new(mat)
}

/// Von Neumann entropy `−Σ λ ln λ` (natural logarithm, `0·ln 0 = 0`).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (w, _) = hermitian_eig(rho.matrix()).expect("validated state is Hermitian");
    -w.iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum::<f64>()
}

/// Trace distance `½‖ρ − σ‖₁ = ½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a.matrix() - b.matrix();
    if max_norm(&diff) == 0.0 {
        return 0.0;
    }
    let (w, _) = hermitian_eig(&diff).expect("difference of states is Hermitian");
    0.5 * w.iter().map(|x| x.abs()).sum::<f64>()
}

/// Basis vector `|i⟩` in dimension `d`.
pub fn basis_ket(d: usize, i: usize) -> CVec {
    let mut v: CVec = Array1::zeros(d);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Qubit `|+⟩ = (|↑⟩ + |↓⟩)/√2`, the equal superposition with maximal
/// coherence `|⟨J_+⟩| = ½`.
pub fn plus_ket() -> CVec {
    let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    array![c, c]
}
