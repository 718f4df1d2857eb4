//! Finite-duration interaction unitaries and their approximations.
//!
//! Each interaction event applies one unitary kick to the joint
//! system⊗probe state. Three variants of the kick are supported:
//!
//! * **scattering** — the free evolution during the interaction window is
//!   stripped off symmetrically, `S = e^{+iH₀τ/2} e^{−i(H₀+H_int)τ} e^{+iH₀τ/2}`,
//!   so the kick commutes with interleaving free evolution by construction
//!   whenever `[H₀, H_int] = 0` and captures only the interaction's effect;
//! * **bare unitary** — the unmodified window propagator `U = e^{−i(H₀+H_int)τ}`,
//!   which double-counts free evolution when composed with a free
//!   inter-event drift;
//! * **eikonal** — the sudden-kick limit `e^{−iτ H_int}`, exact when
//!   `[H₀, H_int] = 0` and accurate for `‖H₀‖τ ≪ 1`.

use ndarray_linalg::Eig;

use crate::model::{free_hamiltonian, ProbeMember, RepeatedInteractionModel};
use crate::operators::{commutator, hermitian_propagator, max_norm, CMat, C64};
use crate::{tol, Error, Result};

/// Which interaction-kick variant to apply per event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JumpKind {
    /// Free-evolution-stripped window propagator (the physical choice).
    Scattering,
    /// Raw window propagator including free evolution.
    BareUnitary,
    /// Sudden-kick limit `e^{−iτH_int}`.
    Eikonal,
}

impl JumpKind {
    /// All variants, in comparison order.
    pub const ALL: [JumpKind; 3] = [
        JumpKind::Scattering,
        JumpKind::BareUnitary,
        JumpKind::Eikonal,
    ];

    /// Short lowercase label for file columns and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            JumpKind::Scattering => "scattering",
            JumpKind::BareUnitary => "bare",
            JumpKind::Eikonal => "eikonal",
        }
    }
}

impl std::fmt::Display for JumpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for JumpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scattering" => Ok(JumpKind::Scattering),
            "bare" | "bare_unitary" => Ok(JumpKind::BareUnitary),
            "eikonal" => Ok(JumpKind::Eikonal),
            other => Err(Error::InvalidParameter(format!(
                "unknown jump kind '{other}' (expected scattering | bare | eikonal)"
            ))),
        }
    }
}

/// One interaction kick: the joint unitary, its variant, and the window
/// duration it stands for.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    /// Joint system⊗probe unitary applied per event.
    pub op: CMat,
    /// Which variant produced it.
    pub kind: JumpKind,
    /// Interaction window duration.
    pub tau: f64,
}

/// `S = e^{+iH₀τ/2} e^{−i(H₀+H_int)τ} e^{+iH₀τ/2}`.
pub fn scattering_operator(h_0: &CMat, h_int: &CMat, tau: f64) -> Result<CMat> {
    let half = hermitian_propagator(h_0, -tau / 2.0)?;
    let full = hermitian_propagator(&(h_0 + h_int), tau)?;
    Ok(half.dot(&full).dot(&half))
}

/// `U = e^{−i(H₀+H_int)τ}`, the window propagator with free evolution left in.
pub fn bare_unitary(h_0: &CMat, h_int: &CMat, tau: f64) -> Result<CMat> {
    hermitian_propagator(&(h_0 + h_int), tau)
}

/// `e^{−iτH_int}`, the sudden-kick limit.
pub fn eikonal_operator(h_int: &CMat, tau: f64) -> Result<CMat> {
    hermitian_propagator(h_int, tau)
}

/// `true` when `‖[H₀, H_int]‖_max < tol`, i.e. the interaction conserves
/// the free energy and the scattering operator reduces to the eikonal one.
pub fn is_energy_preserving(h_0: &CMat, h_int: &CMat, tol: f64) -> bool {
    max_norm(&commutator(h_0, h_int)) < tol
}

/// Fourth-order small-`τ` expansion of `ln S`:
///
/// ```text
/// ln S ≈ −iτ ( H_int + τ²/12 [H_int, [H_int, H₀]] − τ²/24 [H₀, [H₀, H_int]] )
/// ```
///
/// The leading omitted term is O(τ⁵), so halving τ shrinks the defect
/// `‖ln S − bch‖` by ~32×. Useful as an accuracy reference for the exact
/// scattering operator at small τ.
pub fn bch_reference_log(h_0: &CMat, h_int: &CMat, tau: f64) -> CMat {
    let c1 = commutator(h_int, h_0);
    let t1 = commutator(h_int, &c1);
    let c2 = commutator(h_0, h_int);
    let t2 = commutator(h_0, &c2);
    let factor = tau * tau;
    let combo = h_int + &t1.mapv(|z| z * (factor / 12.0)) - &t2.mapv(|z| z * (factor / 24.0));
    combo.mapv(|z| z * C64::new(0.0, -tau))
}

/// Matrix logarithm of a unitary via eigendecomposition, taking each
/// eigenphase in `(−π, π]`. Only the principal branch is meaningful, so the
/// caller must keep `‖generator‖·τ < π` (enforced loosely by checking the
/// unitarity defect rather than the phase span, which is unknowable here).
pub fn unitary_log(u: &CMat) -> Result<CMat> {
    let defect = crate::operators::unitarity_defect(u);
    if defect > tol::UNITARY {
        return Err(Error::Numerical(format!(
            "unitary_log: input has unitarity defect {defect:.3e}"
        )));
    }
    let (w, v) = u.eig()?;
    // Unitary ⇒ normal ⇒ eigenvector matrix is invertible; columns may not
    // be orthonormal as returned, so close with the inverse, not the dagger.
    let v_inv = ndarray_linalg::Inverse::inv(&v)?;
    let d = u.nrows();
    let mut scaled = v.clone();
    for (j, &wj) in w.iter().enumerate() {
        let log_w = C64::new(0.0, wj.arg());
        for i in 0..d {
            scaled[[i, j]] *= log_w;
        }
    }
    Ok(scaled.dot(&v_inv))
}

/// Build the jump operator of the requested kind for one probe member of a
/// model. The joint space is system ⊗ probe with `H₀ = H_s⊗𝟙 + 𝟙⊗H_p`.
pub fn jump_operator_for(
    model: &RepeatedInteractionModel,
    member: &ProbeMember,
    kind: JumpKind,
) -> Result<JumpOperator> {
    let h_0 = free_hamiltonian(&model.h_s, &member.h_p);
    let op = match kind {
        JumpKind::Scattering => scattering_operator(&h_0, &member.h_int, member.tau)?,
        JumpKind::BareUnitary => bare_unitary(&h_0, &member.h_int, member.tau)?,
        JumpKind::Eikonal => eikonal_operator(&member.h_int, member.tau)?,
    };
    Ok(JumpOperator {
        op,
        kind,
        tau: member.tau,
    })
}
