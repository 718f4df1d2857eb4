//! Dense complex matrix primitives: tensor products, partial traces,
//! Hermitian propagators, and superoperator vectorization.
//!
//! All dimensions in this crate are small (≤ a few hundred), so every method
//! here is eigendecomposition-based rather than iterative: the same
//! factorization that exponentiates a Hamiltonian also provides spectra for
//! the closed-form cross-checks.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};

use crate::{tol, Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = Array2<C64>;
/// Dense complex vector.
pub type CVec = Array1<C64>;

/// `d × d` identity matrix.
pub fn eye(d: usize) -> CMat {
    Array2::eye(d)
}

/// Conjugate transpose `A†`.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Matrix trace.
pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// Commutator `[A, B] = AB − BA`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Largest entry magnitude, `‖A‖_max`.
pub fn max_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise difference `‖A − B‖_max`.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Row-sum norm `‖A‖_∞`, used for integrator step-size bounds.
pub fn inf_norm(a: &CMat) -> f64 {
    a.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum())
        .fold(0.0, f64::max)
}

/// True when `‖A − A†‖_max < tol`.
pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    hermiticity_defect(a) < tol
}

/// `‖A − A†‖_max`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let d = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// `‖U†U − 𝟙‖_max`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    max_diff(&dagger(u).dot(u), &eye(u.nrows()))
}

/// Kronecker (tensor) product `A ⊗ B`.
///
/// Entry convention: `(A⊗B)[i·d_B + k, j·d_B + l] = A[i,j] B[k,l]`, so the
/// second factor is the trailing (fastest-varying) index. System states
/// always occupy the first factor, probes the second.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

/// Which tensor factor [`partial_trace`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// Keep the leading factor (the system, in this crate's ordering).
    First,
    /// Keep the trailing factor (the probe).
    Second,
}

/// Partial trace of an operator on a bipartite space of dimensions
/// `dims = (d_A, d_B)`, keeping the requested factor.
pub fn partial_trace(ab: &CMat, dims: (usize, usize), keep: Subsystem) -> Result<CMat> {
    let (da, db) = dims;
    if ab.nrows() != da * db || ab.ncols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "partial_trace: matrix is {}×{}, expected {}×{}",
            ab.nrows(),
            ab.ncols(),
            da * db,
            da * db
        )));
    }
    let out = match keep {
        Subsystem::First => Array2::from_shape_fn((da, da), |(a, b)| {
            (0..db).map(|k| ab[[a * db + k, b * db + k]]).sum()
        }),
        Subsystem::Second => Array2::from_shape_fn((db, db), |(k, l)| {
            (0..da).map(|a| ab[[a * db + k, a * db + l]]).sum()
        }),
    };
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: `H = V diag(w) V†` with real
/// eigenvalues ascending and orthonormal eigenvector columns.
pub fn hermitian_eig(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let defect = hermiticity_defect(h);
    if defect >= tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    let (w, v) = h.eigh(UPLO::Lower)?;
    // The backing LAPACK call sees our row-major H as its conjugate, so the
    // returned matrix satisfies H V* = V* diag(w): conjugate to restore the
    // standard column-eigenvector convention. (Invisible for real H; the
    // regression test `eig_conventions_match_definitions` pins it down.)
    Ok((w, v.mapv(|z| z.conj())))
}

/// Apply a scalar function to a Hermitian matrix through its spectrum:
/// `f(H) = V diag(f(w)) V†`.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (w, v) = hermitian_eig(h)?;
    // Fold the diagonal of f(w) into the columns of V, then close with V†.
    let mut scaled = v.clone();
    for (mut col, &wi) in scaled.columns_mut().into_iter().zip(w.iter()) {
        let fi = f(wi);
        col.mapv_inplace(|z| z * fi);
    }
    Ok(scaled.dot(&dagger(&v)))
}

/// Unitary propagator `exp(−iHt)` of a Hermitian generator.
pub fn hermitian_propagator(h: &CMat, t: f64) -> Result<CMat> {
    hermitian_function(h, |w| (-C64::i() * w * t).exp())
}

/// Largest eigenvalue magnitude of a Hermitian matrix (its 2-norm).
pub fn spectral_norm_hermitian(h: &CMat) -> Result<f64> {
    let (w, _) = hermitian_eig(h)?;
    Ok(w.iter().fold(0.0_f64, |m, &x| m.max(x.abs())))
}

/// Column-stacking vectorization: `vec(ρ)[j·d + i] = ρ[i, j]`.
///
/// This convention gives `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` and is fixed so that
/// Liouvillian matrices are bit-reproducible across the crate and its dumps.
pub fn vectorize(rho: &CMat) -> CVec {
    let d = rho.nrows();
    Array1::from_shape_fn(d * d, |k| rho[[k % d, k / d]])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec) -> Result<CMat> {
    let d2 = v.len();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 {
        return Err(Error::DimensionMismatch(format!(
            "unvectorize: length {d2} is not a perfect square"
        )));
    }
    Ok(Array2::from_shape_fn((d, d), |(i, j)| v[j * d + i]))
}

/// Superoperator matrix of `ρ ↦ AρB` under the column-stacking convention:
/// `(Bᵀ ⊗ A)`.
pub fn sprepost(a: &CMat, b: &CMat) -> CMat {
    kron(&b.t().to_owned(), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMat {
        let a = Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        &a + &dagger(&a)
    }

    #[test]
    fn kron_identities() {
        let i2 = eye(2);
        assert_eq!(kron(&i2, &i2), eye(4));
        let a = Array2::from_diag(&array![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let b = Array2::from_diag(&array![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let expect = Array2::from_diag(&array![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0)
        ]);
        assert_eq!(kron(&a, &b), expect);
    }

    #[test]
    fn kron_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let c = random_hermitian(&mut rng, 2);
        // Entries are triple products evaluated in different association
        // orders, so agreement is to rounding, not bit-exact.
        assert!(max_diff(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c))) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Build two random density-like Hermitian matrices with unit trace.
        let mut rho = random_hermitian(&mut rng, 3);
        rho = rho.dot(&rho); // positive
        let tr = trace(&rho);
        rho.mapv_inplace(|z| z / tr);
        let mut eta = random_hermitian(&mut rng, 2);
        eta = eta.dot(&eta);
        let tr = trace(&eta);
        eta.mapv_inplace(|z| z / tr);

        let joint = kron(&rho, &eta);
        let back = partial_trace(&joint, (3, 2), Subsystem::First).unwrap();
        assert!(max_diff(&back, &rho) < 1e-14);
        let back_p = partial_trace(&joint, (3, 2), Subsystem::Second).unwrap();
        assert!(max_diff(&back_p, &eta) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        // |Φ+⟩ = (|00⟩ + |11⟩)/√2 reduces to 𝟙/2 on either side.
        let mut psi = Array1::zeros(4);
        psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let proj = Array2::from_shape_fn((4, 4), |(i, j)| psi[i] * psi[j].conj());
        let red = partial_trace(&proj, (2, 2), Subsystem::First).unwrap();
        let half = eye(2).mapv(|z| z * 0.5);
        assert!(max_diff(&red, &half) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = eye(6);
        assert!(partial_trace(&m, (2, 2), Subsystem::First).is_err());
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 4);
        let u = hermitian_propagator(&h, 0.0).unwrap();
        assert!(max_diff(&u, &eye(4)) < 1e-14);
    }

    #[test]
    fn propagator_of_diagonal_hamiltonian() {
        // H = ω J_z on a qubit gives diag(e^{−iωt/2}, e^{iωt/2}).
        let omega = 1.7;
        let t = 0.9;
        let h = Array2::from_diag(&array![C64::new(omega / 2.0, 0.0), C64::new(-omega / 2.0, 0.0)]);
        let u = hermitian_propagator(&h, t).unwrap();
        let expect = Array2::from_diag(&array![
            (-C64::i() * omega * t / 2.0).exp(),
            (C64::i() * omega * t / 2.0).exp()
        ]);
        assert!(max_diff(&u, &expect) < 1e-14);
    }

    #[test]
    fn propagator_is_unitary_and_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.gen_range(2..6);
            let h = random_hermitian(&mut rng, d);
            let t: f64 = 4.0 * (rng.gen::<f64>() - 0.5);
            let u = hermitian_propagator(&h, t).unwrap();
            let back = hermitian_propagator(&h, -t).unwrap();
            assert!(unitarity_defect(&u) < crate::tol::UNITARY);
            assert!(max_diff(&u.dot(&back), &eye(d)) < crate::tol::UNITARY);
        }
    }

    #[test]
    fn eig_conventions_match_definitions() {
        // Pin the column-eigenvector convention H V = V diag(w) on genuinely
        // complex input; a conjugated or transposed V would pass unitarity
        // checks but silently transpose every derived matrix function.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let d = rng.gen_range(2..7);
            let h = random_hermitian(&mut rng, d);
            let (w, v) = hermitian_eig(&h).unwrap();
            let mut vw = v.clone();
            for (j, &wj) in w.iter().enumerate() {
                for i in 0..d {
                    vw[[i, j]] *= wj;
                }
            }
            assert!(max_diff(&h.dot(&v), &vw) < 1e-12);
            assert!(unitarity_defect(&v) < 1e-12);
        }
    }

    #[test]
    fn propagator_matches_taylor_series() {
        // Independent construction: Σ_k (−iHt)^k / k! for small ‖Ht‖.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4).mapv(|z| z * 0.1);
            let t = rng.gen_range(0.1..1.0);
            let u = hermitian_propagator(&h, t).unwrap();
            let miht = h.mapv(|z| z * C64::new(0.0, -t));
            let mut term = eye(4);
            let mut taylor = eye(4);
            for k in 1..30 {
                term = term.dot(&miht).mapv(|z| z / (k as f64));
                taylor = taylor + &term;
            }
            assert!(max_diff(&u, &taylor) < 1e-13);
        }
    }

    #[test]
    fn propagator_rejects_non_hermitian() {
        let m = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        assert!(matches!(
            hermitian_propagator(&m, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn vectorization_round_trip_and_sandwich_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 3;
        let rho = random_hermitian(&mut rng, d);
        let a = random_hermitian(&mut rng, d);
        let b = random_hermitian(&mut rng, d);

        let v = vectorize(&rho);
        assert!(max_diff(&unvectorize(&v).unwrap(), &rho) < 1e-15);

        // vec(AρB) = (Bᵀ⊗A) vec(ρ)
        let direct = a.dot(&rho).dot(&b);
        let via_super = unvectorize(&sprepost(&a, &b).dot(&v)).unwrap();
        assert!(max_diff(&direct, &via_super) < 1e-12);
    }

    #[test]
    fn norms_and_hermiticity_checks() {
        let m = array![
            [C64::new(1.0, 0.0), C64::new(0.0, -0.5)],
            [C64::new(0.0, 0.5), C64::new(-1.0, 0.0)]
        ];
        assert!(is_hermitian(&m, 1e-14));
        assert!((max_norm(&m) - 1.0).abs() < 1e-15);
        assert!((inf_norm(&m) - 1.5).abs() < 1e-15);
        let sn = spectral_norm_hermitian(&m).unwrap();
        assert!((sn - 1.25_f64.sqrt()).abs() < 1e-12);
    }
}
