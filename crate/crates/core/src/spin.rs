//! Angular-momentum operator algebra for arbitrary half-integer spin.
//!
//! Basis convention: eigenstates of `J_z` ordered by descending magnetic
//! quantum number, `m = J, J−1, …, −J`, so index `i` carries `m = J − i`.

use ndarray::prelude::*;

use crate::operators::{dagger, CMat, C64};
use crate::{Error, Result};

/// The complete `(2J+1)`-dimensional spin operator set for one value of `J`.
///
/// Satisfies `[J_k, J_ℓ] = i ε_{kℓn} J_n`, `J_z|m⟩ = m|m⟩`, and the Casimir
/// identity `J_x² + J_y² + J_z² = J(J+1)·𝟙`.
#[derive(Clone, Debug)]
pub struct SpinAlgebra {
    /// Total spin quantum number (non-negative half-integer).
    pub j: f64,
    /// Hilbert-space dimension `2J+1`.
    pub dim: usize,
    /// Cartesian component `J_x = (J_+ + J_−)/2`.
    pub jx: CMat,
    /// Cartesian component `J_y = (J_+ − J_−)/2i`.
    pub jy: CMat,
    /// Diagonal component with eigenvalues `J … −J`.
    pub jz: CMat,
    /// Raising operator, `⟨m+1|J_+|m⟩ = √(J(J+1) − m(m+1))`.
    pub jplus: CMat,
    /// Lowering operator, `J_− = J_+†`.
    pub jminus: CMat,
}

impl SpinAlgebra {
    /// Magnetic quantum number carried by basis index `i`.
    pub fn m(&self, i: usize) -> f64 {
        self.j - i as f64
    }

    /// Basis index of magnetic quantum number `m` (must be in `−J..=J`
    /// in integer steps from `J`).
    pub fn index_of(&self, m: f64) -> usize {
        (self.j - m).round() as usize
    }
}

/// Construct the spin algebra for total spin `J`.
///
/// Rejects negative or non-half-integer `J` (2J must be a non-negative
/// integer).
pub fn spin_algebra(j: f64) -> Result<SpinAlgebra> {
    let two_j = 2.0 * j;
    if !(j >= 0.0) || (two_j - two_j.round()).abs() > 1e-9 {
        return Err(Error::InvalidSpin(j));
    }
    let dim = two_j.round() as usize + 1;

    let jz = Array2::from_diag(&Array1::from_shape_fn(dim, |i| {
        C64::new(j - i as f64, 0.0)
    }));

    // ⟨m+1|J_+|m⟩ with m = J − i: raising moves index i → i−1.
    let mut jplus: CMat = Array2::zeros((dim, dim));
    for i in 1..dim {
        let m = j - i as f64;
        jplus[[i - 1, i]] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jminus = dagger(&jplus);
    let jx = (&jplus + &jminus).mapv(|z| z * 0.5);
    let jy = (&jplus - &jminus).mapv(|z| z * C64::new(0.0, -0.5));

    Ok(SpinAlgebra {
        j,
        dim,
        jx,
        jy,
        jz,
        jplus,
        jminus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutator, eye, max_diff, max_norm};

    #[test]
    fn qubit_operators_match_definitions() {
        let s = spin_algebra(0.5).unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.jz[[0, 0]], C64::new(0.5, 0.0));
        assert_eq!(s.jz[[1, 1]], C64::new(-0.5, 0.0));
        // Single ladder element ⟨1/2|J_+|−1/2⟩ = 1.
        assert_eq!(s.jplus[[0, 1]], C64::new(1.0, 0.0));
        assert!(max_norm(&s.jplus) == 1.0);
    }

    #[test]
    fn spin_two_has_dim_five_with_integer_ladder() {
        let s = spin_algebra(2.0).unwrap();
        assert_eq!(s.dim, 5);
        for (i, m) in [2.0, 1.0, 0.0, -1.0, -2.0].iter().enumerate() {
            assert_eq!(s.jz[[i, i]], C64::new(*m, 0.0));
            assert_eq!(s.m(i), *m);
            assert_eq!(s.index_of(*m), i);
        }
    }

    #[test]
    fn commutation_and_casimir_identities() {
        for &j in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            let s = spin_algebra(j).unwrap();
            let i = C64::i();
            assert!(max_diff(&commutator(&s.jx, &s.jy), &s.jz.mapv(|z| z * i)) < 1e-12);
            assert!(max_diff(&commutator(&s.jy, &s.jz), &s.jx.mapv(|z| z * i)) < 1e-12);
            assert!(max_diff(&commutator(&s.jz, &s.jx), &s.jy.mapv(|z| z * i)) < 1e-12);
            let casimir = s.jx.dot(&s.jx) + s.jy.dot(&s.jy) + s.jz.dot(&s.jz);
            let expect = eye(s.dim).mapv(|z| z * (j * (j + 1.0)));
            assert!(max_diff(&casimir, &expect) < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_spin() {
        assert!(spin_algebra(-0.5).is_err());
        assert!(spin_algebra(0.7).is_err());
        assert!(spin_algebra(f64::NAN).is_err());
    }
}
