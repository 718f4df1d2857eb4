//! Coarse-grained generator of the event-averaged dynamics, its Lindblad
//! decomposition, time integration, steady states, and the exact discrete
//! per-event map.
//!
//! With interaction events arriving as a Poisson process of rate `γ`, the
//! averaged system state obeys
//!
//! ```text
//! ρ̇ = −i[H_s, ρ] + γ ( tr_p{ S (ρ⊗η) S† } − ρ ),
//! ```
//!
//! generalized to a weighted sum over probe preparations. Everything here
//! acts on column-stacked vectorized density matrices, `vec(ρ)[j·d+i] =
//! ρ[i,j]`, so the generator is an ordinary `d²×d²` complex matrix.

use ndarray_linalg::{Eig, LeastSquaresSvd, Solve};

use crate::model::{free_hamiltonian, RepeatedInteractionModel};
use crate::operators::{
    dagger, eye, inf_norm, kron, partial_trace, sprepost, unvectorize, vectorize, CMat, CVec,
    Subsystem, C64,
};
use crate::scattering::{
    bare_unitary, eikonal_operator, jump_operator_for, scattering_operator, JumpKind, JumpOperator,
};
use crate::states::DensityMatrix;
use crate::{tol, Error, Result};

/// Generator of the event-averaged dynamics as a matrix on vectorized
/// density matrices.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    /// System dimension `d` (the matrix is `d²×d²`).
    pub dim: usize,
    /// Generator matrix acting on column-stacked `vec(ρ)`.
    pub matrix: CMat,
    /// Event rate the dissipative part was built with.
    pub gamma: f64,
}

impl Liouvillian {
    /// Apply the generator to a density matrix: `unvec(L · vec(ρ))`.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "Liouvillian acts on {0}×{0}, got {1}×{2}",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        unvectorize(&self.matrix.dot(&vectorize(rho)))
    }

    /// `‖L‖_∞` (max absolute row sum), the step-size control norm.
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.matrix)
    }

    /// Largest entry of `vec(𝟙)† · L`; zero for a trace-preserving generator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..d * d {
            let s: C64 = (0..d).map(|j| self.matrix[[j * d + j, col]]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}

/// Coherent part `−i[H, ·]` as a superoperator matrix.
pub fn hamiltonian_superoperator(h: &CMat) -> CMat {
    let d = h.nrows();
    let id = eye(d);
    (sprepost(h, &id) - sprepost(&id, h)).mapv(|z| z * C64::new(0.0, -1.0))
}

/// Single-channel dissipator `D[L](ρ) = LρL† − ½{L†L, ρ}` as a
/// superoperator matrix.
pub fn lindblad_superoperator(l: &CMat) -> CMat {
    let d = l.nrows();
    let id = eye(d);
    let ld = dagger(l);
    let ldl = ld.dot(l);
    sprepost(l, &ld) - (sprepost(&ldl, &id) + sprepost(&id, &ldl)).mapv(|z| z * 0.5)
}

/// Dissipative part `D(ρ) = γ ( tr_p{ S (ρ⊗η) S† } − ρ )` of the generator,
/// built by applying the map to matrix units (no structural assumptions
/// about `S` beyond dimensions).
pub fn dissipator(jump: &JumpOperator, eta: &DensityMatrix, gamma: f64) -> Result<Liouvillian> {
    let d_p = eta.dim();
    let n = jump.op.nrows();
    if n % d_p != 0 || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "jump operator is {n}-dim, not a multiple of probe dimension {d_p}"
        )));
    }
    let d_s = n / d_p;
    let s_dag = dagger(&jump.op);
    let mut matrix = CMat::zeros((d_s * d_s, d_s * d_s));
    for j in 0..d_s {
        for i in 0..d_s {
            let mut unit = CMat::zeros((d_s, d_s));
            unit[[i, j]] = C64::new(1.0, 0.0);
            let joint = jump.op.dot(&kron(&unit, eta.matrix())).dot(&s_dag);
            let reduced = partial_trace(&joint, (d_s, d_p), Subsystem::First)?;
            let image = (reduced - &unit).mapv(|z| z * gamma);
            matrix.column_mut(j * d_s + i).assign(&vectorize(&image));
        }
    }
    Ok(Liouvillian {
        dim: d_s,
        matrix,
        gamma,
    })
}

/// One jump channel of the Lindblad form: non-negative rate and operator.
#[derive(Clone, Debug)]
pub struct LindbladDecomposition {
    /// `(rate, L)` pairs; rates are `γ·η_k ≥ 0`.
    pub terms: Vec<(f64, CMat)>,
}

impl LindbladDecomposition {
    /// Reassemble the dissipator matrix
    /// `Σ rate (L·L† − ½{L†L, ·})` from the channels.
    pub fn reconstruct(&self, dim: usize) -> CMat {
        let mut out = CMat::zeros((dim * dim, dim * dim));
        for (rate, l) in &self.terms {
            out = out + lindblad_superoperator(l).mapv(|z| z * *rate);
        }
        out
    }

    /// `Σ_k rate_k L†_k L_k / γ` should be `𝟙` when `S` is unitary; returns
    /// the max-norm defect (caller supplies γ to undo the rate scaling).
    pub fn completeness_defect(&self, dim: usize, gamma: f64) -> f64 {
        let mut acc = CMat::zeros((dim, dim));
        for (rate, l) in &self.terms {
            acc = acc + dagger(l).dot(l).mapv(|z| z * (*rate / gamma));
        }
        crate::operators::max_diff(&acc, &eye(dim))
    }
}

/// Rates below this fraction of the total are dropped from the Lindblad
/// decomposition: they correspond to probe eigenstates with (numerically)
/// zero population and contribute nothing to the generator.
const RATE_FLOOR: f64 = 1e-14;

/// Decompose the dissipator into jump channels: with `η = Σ_k η_k |k⟩⟨k|`,
/// each pair `(k,ℓ)` contributes the operator `L_{kℓ} = ⟨ℓ|S|k⟩` (a partial
/// matrix element over the probe) at rate `γ·η_k`. Pairs with `η_k` at
/// numerical zero are omitted.
pub fn lindblad_decomposition(
    jump: &JumpOperator,
    eta: &DensityMatrix,
    gamma: f64,
) -> Result<LindbladDecomposition> {
    let d_p = eta.dim();
    let n = jump.op.nrows();
    if n % d_p != 0 || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "jump operator is {n}-dim, not a multiple of probe dimension {d_p}"
        )));
    }
    let d_s = n / d_p;
    let (pops, basis) = crate::operators::hermitian_eig(eta.matrix())?;
    let mut terms = Vec::new();
    for k in 0..d_p {
        if pops[k] < RATE_FLOOR {
            continue;
        }
        for l in 0..d_p {
            // L_{kℓ}[a,b] = Σ_{p,q} basis[p,ℓ]* S[a·d_p+p, b·d_p+q] basis[q,k]
            let mut op = CMat::zeros((d_s, d_s));
            for a in 0..d_s {
                for b in 0..d_s {
                    let mut z = C64::new(0.0, 0.0);
                    for p in 0..d_p {
                        for q in 0..d_p {
                            z += basis[[p, l]].conj()
                                * jump.op[[a * d_p + p, b * d_p + q]]
                                * basis[[q, k]];
                        }
                    }
                    op[[a, b]] = z;
                }
            }
            terms.push((gamma * pops[k], op));
        }
    }
    Ok(LindbladDecomposition { terms })
}

/// Full generator `L = −i[H_s,·] + Σ_ξ p_ξ D_ξ` with the jump-operator kind
/// applied uniformly across ensemble members.
pub fn ensemble_liouvillian(
    model: &RepeatedInteractionModel,
    kind: JumpKind,
) -> Result<Liouvillian> {
    let d = model.system_dim();
    let mut matrix = hamiltonian_superoperator(&model.h_s);
    for member in model.ensemble.members() {
        let jump = jump_operator_for(model, member, kind)?;
        let part = dissipator(&jump, &member.eta, model.gamma)?;
        matrix = matrix + part.matrix.mapv(|z| z * member.weight);
    }
    Ok(Liouvillian {
        dim: d,
        matrix,
        gamma: model.gamma,
    })
}

/// Time-integration method for [`evolve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Fixed-step RK4 with `h ≤ min(0.01/‖L‖_∞, grid spacing)`.
    Rk4,
    /// Exact `e^{Lt}` through the (non-Hermitian) eigendecomposition of L;
    /// preferred for horizons `≫ 1/‖L‖` where step counts explode.
    Exact,
}

pub(crate) fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if let Some(&t0) = t_grid.first() {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time grid must start at t ≥ 0, got {t0}"
            )));
        }
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(format!(
                "time grid must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn snapshot(x: &CVec, abort_tol: f64) -> Result<DensityMatrix> {
    let rho = unvectorize(x)?;
    let herm = (&rho + &dagger(&rho)).mapv(|z| z * 0.5);
    DensityMatrix::repair(herm, abort_tol)
}

fn rk4_segment(l: &CMat, x: &mut CVec, span: f64, h_max: f64) {
    if span <= 0.0 {
        return;
    }
    let n_steps = (span / h_max).ceil().max(1.0) as usize;
    let h = span / n_steps as f64;
    for _ in 0..n_steps {
        let k1 = l.dot(x);
        let k2 = l.dot(&(&*x + &k1.mapv(|z| z * (h / 2.0))));
        let k3 = l.dot(&(&*x + &k2.mapv(|z| z * (h / 2.0))));
        let k4 = l.dot(&(&*x + &k3.mapv(|z| z * h)));
        *x = &*x
            + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
    }
}

/// Integrate `ρ̇ = L(ρ)` from `ρ₀` at `t = 0`, returning the state at each
/// grid time. Fixed-step RK4; each snapshot is re-Hermitized and validated
/// (positivity violations beyond `−tol::EVOLVE_POSITIVITY` abort).
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    evolve_with(l, rho0, t_grid, Propagation::Rk4)
}

/// [`evolve`] with an explicit propagation method.
pub fn evolve_with(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    method: Propagation,
) -> Result<Vec<DensityMatrix>> {
    if rho0.dim() != l.dim {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {}-dim, generator acts on {}-dim",
            rho0.dim(),
            l.dim
        )));
    }
    validate_grid(t_grid)?;
    match method {
        Propagation::Rk4 => {
            let norm = l.inf_norm();
            let h_max = if norm > 0.0 { 0.01 / norm } else { f64::INFINITY };
            let mut x = vectorize(rho0.matrix());
            let mut t_cur = 0.0;
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                rk4_segment(&l.matrix, &mut x, t - t_cur, h_max);
                t_cur = t;
                out.push(snapshot(&x, tol::EVOLVE_POSITIVITY)?);
            }
            Ok(out)
        }
        Propagation::Exact => {
            let (w, v) = l.matrix.eig()?;
            let y0 = v.solve(&vectorize(rho0.matrix()))?;
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                let yt: CVec = w
                    .iter()
                    .zip(y0.iter())
                    .map(|(&wi, &yi)| yi * (wi * t).exp())
                    .collect();
                let x = v.dot(&yt);
                out.push(snapshot(&x, tol::EVOLVE_POSITIVITY)?);
            }
            Ok(out)
        }
    }
}

/// Candidate kernel eigenvalues must sit below `tol::KERNEL · ‖L‖_∞`; within
/// the candidates, a jump of this ratio between consecutive magnitudes
/// separates the true kernel (machine-precision zeros) from merely slow
/// relaxation modes that also slipped under the threshold.
const KERNEL_GAP_RATIO: f64 = 1e4;

/// Stationary state(s) of the generator.
///
/// Returns the trace-normalized kernel element and the kernel dimension.
/// With a degenerate kernel the returned state is the infinite-time limit
/// of the maximally mixed initial condition (the projection of `vec(𝟙/d)`
/// onto the kernel along the spectral decomposition), which is the state an
/// unbiased long evolution would settle into.
pub fn steady_state(l: &Liouvillian) -> Result<(DensityMatrix, usize)> {
    let d = l.dim;
    let (w, v) = l.matrix.eig()?;
    let threshold = tol::KERNEL * l.inf_norm();
    let mut candidates: Vec<(f64, usize)> = w
        .iter()
        .enumerate()
        .filter(|(_, wi)| wi.norm() <= threshold)
        .map(|(i, wi)| (wi.norm(), i))
        .collect();
    if candidates.is_empty() {
        return Err(Error::Numerical(format!(
            "no generator eigenvalue within {threshold:.3e} of zero; \
             smallest is {:.3e}",
            w.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
        )));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut kernel = vec![candidates[0].1];
    for pair in candidates.windows(2) {
        if pair[1].0 > KERNEL_GAP_RATIO * pair[0].0 {
            break;
        }
        kernel.push(pair[1].1);
    }
    let degeneracy = kernel.len();

    if degeneracy == 1 {
        // Least-squares polish: solve [L; trace-row]·x = [0; 1] so the
        // output has exactly unit trace and minimal residual ‖Lx‖.
        let n = d * d;
        let mut a = CMat::zeros((n + 1, n));
        a.slice_mut(ndarray::s![..n, ..]).assign(&l.matrix);
        for j in 0..d {
            a[[n, j * d + j]] = C64::new(1.0, 0.0);
        }
        let mut b = CVec::zeros(n + 1);
        b[n] = C64::new(1.0, 0.0);
        let sol = a.least_squares(&b)?.solution;
        let rho = unvectorize(&sol)?;
        let herm = (&rho + &dagger(&rho)).mapv(|z| z * 0.5);
        Ok((DensityMatrix::repair(herm, tol::EVOLVE_POSITIVITY)?, 1))
    } else {
        // Project the maximally mixed state onto the kernel.
        let x0 = vectorize(&eye(d).mapv(|z| z / (d as f64)));
        let y = v.solve(&x0)?;
        let mut x = CVec::zeros(d * d);
        for &i in &kernel {
            let col = v.column(i);
            for (xi, &ci) in x.iter_mut().zip(col.iter()) {
                *xi += y[i] * ci;
            }
        }
        let rho = unvectorize(&x)?;
        let herm = (&rho + &dagger(&rho)).mapv(|z| z * 0.5);
        Ok((
            DensityMatrix::repair(herm, tol::EVOLVE_POSITIVITY)?,
            degeneracy,
        ))
    }
}

/// The exact discrete map of one interaction cycle at fixed spacing `Δt`:
/// free evolution for `Δt − τ`, then the interaction window, then the probe
/// is traced out.
#[derive(Clone, Debug)]
pub struct RegularMap {
    /// CPTP map as a matrix on vectorized density matrices.
    pub phi: CMat,
    /// System dimension.
    pub dim: usize,
    /// Cycle spacing.
    pub delta_t: f64,
    /// Window-propagator variant the map was built with.
    pub kind: JumpKind,
}

impl RegularMap {
    /// Apply the cycle map once.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        unvectorize(&self.phi.dot(&vectorize(rho)))
    }

    /// Fixed point via the eigenvector of Φ at eigenvalue 1 (which exists
    /// for any CPTP map).
    pub fn fixed_point(&self) -> Result<DensityMatrix> {
        let (w, v) = self.phi.eig()?;
        let one = C64::new(1.0, 0.0);
        let (k, dist) = w
            .iter()
            .map(|wi| (wi - one).norm())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        if dist > 1e-8 {
            return Err(Error::Numerical(format!(
                "no map eigenvalue within 1e-8 of 1 (closest at distance {dist:.3e})"
            )));
        }
        let rho = unvectorize(&v.column(k).to_owned())?;
        let tr: C64 = (0..self.dim).map(|i| rho[[i, i]]).sum();
        if tr.norm() < 1e-12 {
            return Err(Error::Numerical(
                "fixed-point eigenvector is traceless".into(),
            ));
        }
        let scaled = rho.mapv(|z| z / tr);
        let herm = (&scaled + &dagger(&scaled)).mapv(|z| z * 0.5);
        DensityMatrix::repair(herm, tol::EVOLVE_POSITIVITY)
    }
}

/// Build the regular-interaction cycle map at spacing `delta_t ≥ τ`.
///
/// Per event the joint propagator is `U₀(Δt−τ) · W(τ)` where the window
/// kick `W` depends on the kind: the bare window unitary `U(τ)`, the
/// scattering form `U₀(τ/2) S U₀(τ/2)` (identical to `U(τ)` by
/// construction), or its eikonal approximation `U₀(τ/2) S_eik U₀(τ/2)`.
pub fn regular_map(
    model: &RepeatedInteractionModel,
    kind: JumpKind,
    delta_t: f64,
) -> Result<RegularMap> {
    let d = model.system_dim();
    for (i, member) in model.ensemble.members().iter().enumerate() {
        if delta_t < member.tau {
            return Err(Error::InvalidParameter(format!(
                "cycle spacing Δt = {delta_t} shorter than member {i}'s window τ = {}",
                member.tau
            )));
        }
    }
    let mut phi = CMat::zeros((d * d, d * d));
    for member in model.ensemble.members() {
        let h0 = free_hamiltonian(&model.h_s, &member.h_p);
        let tau = member.tau;
        let window = match kind {
            JumpKind::BareUnitary => bare_unitary(&h0, &member.h_int, tau)?,
            JumpKind::Scattering => {
                let half = crate::operators::hermitian_propagator(&h0, tau / 2.0)?;
                half.dot(&scattering_operator(&h0, &member.h_int, tau)?)
                    .dot(&half)
            }
            JumpKind::Eikonal => {
                let half = crate::operators::hermitian_propagator(&h0, tau / 2.0)?;
                half.dot(&eikonal_operator(&member.h_int, tau)?).dot(&half)
            }
        };
        let drift = crate::operators::hermitian_propagator(&h0, delta_t - tau)?;
        let cycle = drift.dot(&window);
        let cycle_dag = dagger(&cycle);
        let d_p = member.probe_dim();
        for j in 0..d {
            for i in 0..d {
                let mut unit = CMat::zeros((d, d));
                unit[[i, j]] = C64::new(1.0, 0.0);
                let joint = cycle.dot(&kron(&unit, member.eta.matrix())).dot(&cycle_dag);
                let reduced = partial_trace(&joint, (d, d_p), Subsystem::First)?;
                let scaled = reduced.mapv(|z| z * member.weight);
                let mut col = phi.column_mut(j * d + i);
                col += &vectorize(&scaled);
            }
        }
    }
    Ok(RegularMap {
        phi,
        dim: d,
        delta_t,
        kind,
    })
}
