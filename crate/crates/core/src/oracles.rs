//! Closed-form solutions for three exactly solvable model families, used as
//! independent cross-checks ("oracles") against the generic pipeline in
//! [`crate::master`]:
//!
//! * a qubit linearly coupled to thermal qubit probes (`g_x J_x⊗j_x + …`),
//!   where the scattering operator block-diagonalizes into co- and
//!   counter-rotating 2×2 sectors;
//! * a spin-`J` exchange-coupled (`g_x = g_y`) to thermal qubit probes,
//!   where each `|m,−½⟩ ↔ |m−1,+½⟩` pair forms an independent sector;
//! * a qubit monitored by pointer probes (`ω_p = 0`), where the scattering
//!   operator is block-diagonal in the probe's `j_x` eigenbasis with 2×2
//!   unitary Kraus blocks.
//!
//! The closed forms here are derived purely on paper (plus trigonometry);
//! none of them call into the scattering/master machinery, which is what
//! makes them usable as oracles for it.

use crate::master::{hamiltonian_superoperator, lindblad_superoperator, Liouvillian};
use crate::operators::{dagger, CMat, C64};
use crate::spin::spin_algebra;
use crate::{Error, Result};

/// Amplitudes of one 2×2 interaction sector: the diagonal survival
/// amplitude `C` and the real exchange amplitude `K`, with `|C|² + K² = 1`.
///
/// For a sector with coupling `G` and frequency sum/detuning `w`:
/// `s = √(G²+w²)`, `a = w+s`,
/// `C = e^{−i·w_ref·τ/2} (e^{isτ/2}a² + e^{−isτ/2}G²)/(G²+a²)`,
/// `K = 2Ga·sin(sτ/2)/(G²+a²)`.
/// `w_ref` is the phase-reference frequency (equal to `w` except in the
/// spin-J family, where the reference stays at the bare detuning).
fn sector_amplitudes(g: f64, w: f64, w_ref: f64, tau: f64) -> (C64, f64) {
    let s = (g * g + w * w).sqrt();
    let a = w + s;
    let den = g * g + a * a;
    let prefix = (-C64::i() * w_ref * tau / 2.0).exp();
    if den == 0.0 {
        // G = 0 with w < 0: the a→0 limit keeps only the e^{−isτ/2} term.
        return (prefix * (-C64::i() * s * tau / 2.0).exp(), 0.0);
    }
    let c = prefix
        * ((C64::i() * s * tau / 2.0).exp() * a * a + (-C64::i() * s * tau / 2.0).exp() * g * g)
        / den;
    let k = 2.0 * g * a / den * (s * tau / 2.0).sin();
    (c, k)
}

// ---------------------------------------------------------------------------
// Family 1: qubit with general linear coupling to thermal qubit probes.
// ---------------------------------------------------------------------------

/// Closed-form coefficients of the qubit–qubit linear-coupling model.
///
/// The joint Hamiltonian splits into a counter-rotating sector
/// (`|++⟩, |−−⟩`; frequency `Ω = ω_s+ω_p`, coupling `G_Ω = (g_x−g_y)/2`)
/// and a co-rotating sector (`|+−⟩, |−+⟩`; detuning `Δ = ω_s−ω_p`,
/// coupling `G_Δ = (g_x+g_y)/2`), each with its own `(C, K)` pair.
///
/// The grouped aggregate rates (`delta_omega` … `gamma_minus`) are the
/// resonant, `g_z = 0` reduction of the generator to a frequency shift plus
/// four dissipation channels along `J_z, J_x, J_±`; they are reporting
/// quantities only (possibly sign-indefinite) and are never propagated.
#[derive(Clone, Debug)]
pub struct QubitLinearCoefficients {
    /// Frequency sum `Ω = ω_s + ω_p` of the counter-rotating sector.
    pub omega_sum: f64,
    /// Detuning `Δ = ω_s − ω_p` of the co-rotating sector.
    pub detuning: f64,
    /// Counter-rotating coupling `G_Ω = (g_x − g_y)/2`.
    pub g_omega: f64,
    /// Co-rotating coupling `G_Δ = (g_x + g_y)/2`.
    pub g_delta: f64,
    /// Survival amplitude of the counter-rotating sector.
    pub c_omega: C64,
    /// Exchange amplitude of the counter-rotating sector.
    pub k_omega: f64,
    /// Survival amplitude of the co-rotating sector.
    pub c_delta: C64,
    /// Exchange amplitude of the co-rotating sector.
    pub k_delta: f64,
    /// Resonant aggregate: coherent frequency shift.
    pub delta_omega: f64,
    /// Resonant aggregate: dephasing rate.
    pub gamma_z: f64,
    /// Resonant aggregate: transverse rate (may be negative).
    pub gamma_x: f64,
    /// Resonant aggregate: upward-exchange rate.
    pub gamma_plus: f64,
    /// Resonant aggregate: downward-exchange rate.
    pub gamma_minus: f64,
    omega_s: f64,
    omega_p: f64,
    g_z: f64,
    tau: f64,
    beta: f64,
    gamma: f64,
}

/// Evaluate the closed-form coefficients of the qubit–qubit model.
#[allow(clippy::too_many_arguments)]
pub fn qubit_linear_coefficients(
    omega_s: f64,
    omega_p: f64,
    g_x: f64,
    g_y: f64,
    g_z: f64,
    tau: f64,
    beta: f64,
    gamma: f64,
) -> QubitLinearCoefficients {
    let omega_sum = omega_s + omega_p;
    let detuning = omega_s - omega_p;
    let g_omega = (g_x - g_y) / 2.0;
    let g_delta = (g_x + g_y) / 2.0;
    let (c_omega, k_omega) = sector_amplitudes(g_omega, omega_sum, omega_sum, tau);
    let (c_delta, k_delta) = sector_amplitudes(g_delta, detuning, detuning, tau);

    // Resonant (ω_p = ω_s), g_z = 0 aggregates; evaluated from the same
    // C_Ω/K_Ω regardless so they are cheap diagnostics at any parameters.
    let g_p = g_delta;
    let (cos_half, sin_half) = ((g_p * tau / 2.0).cos(), (g_p * tau / 2.0).sin());
    let z_p = (beta * omega_s / 2.0).exp() + (-beta * omega_s / 2.0).exp();
    let delta_omega = gamma * c_omega.im * cos_half;
    let gamma_z = gamma * (c_omega - C64::new(cos_half, 0.0)).norm_sqr();
    let gamma_x = 4.0 * gamma * k_omega * sin_half;
    let gamma_plus = gamma * (beta * omega_s / 2.0).exp() / z_p
        * (k_omega - sin_half)
        * (k_omega - (-beta * omega_s).exp() * sin_half);
    let gamma_minus = gamma * (-beta * omega_s / 2.0).exp() / z_p
        * (k_omega - sin_half)
        * (k_omega - (beta * omega_s).exp() * sin_half);

    QubitLinearCoefficients {
        omega_sum,
        detuning,
        g_omega,
        g_delta,
        c_omega,
        k_omega,
        c_delta,
        k_delta,
        delta_omega,
        gamma_z,
        gamma_x,
        gamma_plus,
        gamma_minus,
        omega_s,
        omega_p,
        g_z,
        tau,
        beta,
        gamma,
    }
}

impl QubitLinearCoefficients {
    /// Joint 4×4 scattering operator in the basis
    /// `|++⟩, |+−⟩, |−+⟩, |−−⟩` (system ⊗ probe, m descending).
    pub fn scattering_matrix(&self) -> CMat {
        let mut s = CMat::zeros((4, 4));
        let e_cr = (-C64::i() * self.g_z * self.tau / 4.0).exp();
        s[[3, 3]] = e_cr * self.c_omega;
        s[[0, 0]] = e_cr * self.c_omega.conj();
        s[[3, 0]] = e_cr * (-C64::i() * self.k_omega);
        s[[0, 3]] = e_cr * (-C64::i() * self.k_omega);
        let e_co = (C64::i() * self.g_z * self.tau / 4.0).exp();
        s[[2, 2]] = e_co * self.c_delta;
        s[[1, 1]] = e_co * self.c_delta.conj();
        s[[2, 1]] = e_co * (-C64::i() * self.k_delta);
        s[[1, 2]] = e_co * (-C64::i() * self.k_delta);
        s
    }

    /// The four joint eigenvalues of `H₀ + H_int`:
    /// `(−g_z ± 2√(G_Δ²+Δ²))/4` and `(g_z ± 2√(G_Ω²+Ω²))/4`.
    pub fn joint_eigenvalues(&self) -> [f64; 4] {
        let s_d = (self.g_delta * self.g_delta + self.detuning * self.detuning).sqrt();
        let s_o = (self.g_omega * self.g_omega + self.omega_sum * self.omega_sum).sqrt();
        [
            (-self.g_z + 2.0 * s_d) / 4.0,
            (-self.g_z - 2.0 * s_d) / 4.0,
            (self.g_z + 2.0 * s_o) / 4.0,
            (self.g_z - 2.0 * s_o) / 4.0,
        ]
    }

    /// Closed-form generator of the reduced qubit dynamics: a shifted
    /// precession plus dephasing, exchange, and (for `g_z ≠ 0`) two tilted
    /// transverse channels.
    pub fn generator(&self) -> Liouvillian {
        let spin = spin_algebra(0.5).expect("qubit algebra");
        let (ep, em) = (
            (self.beta * self.omega_p / 2.0).exp(),
            (-self.beta * self.omega_p / 2.0).exp(),
        );
        let z_p = ep + em;
        let g = self.gamma;
        let phase = (-C64::i() * self.g_z * self.tau / 2.0).exp();
        let shift = g
            * (ep * (phase * self.c_omega * self.c_delta).im
                + em * (phase.conj() * self.c_omega * self.c_delta).im)
            / z_p;

        let h = spin.jz.mapv(|z| z * (self.omega_s + shift));
        let mut matrix = hamiltonian_superoperator(&h);

        let e4 = (-C64::i() * self.g_z * self.tau / 4.0).exp();
        let deph = g / z_p
            * (ep * (self.c_omega * e4 - self.c_delta.conj() * e4.conj()).norm_sqr()
                + em * (self.c_omega * e4.conj() - self.c_delta.conj() * e4).norm_sqr());
        matrix = matrix + lindblad_superoperator(&spin.jz).mapv(|z| z * deph);

        let (ko, kd) = (self.k_omega, self.k_delta);
        let rate_plus = g / z_p * (ep * ko * ko + em * kd * kd - z_p * ko * kd);
        let rate_minus = g / z_p * (ep * kd * kd + em * ko * ko - z_p * ko * kd);
        matrix = matrix + lindblad_superoperator(&spin.jplus).mapv(|z| z * rate_plus);
        matrix = matrix + lindblad_superoperator(&spin.jminus).mapv(|z| z * rate_minus);

        let (c4, s4) = ((self.g_z * self.tau / 4.0).cos(), (self.g_z * self.tau / 4.0).sin());
        let tilt_a = spin.jx.mapv(|z| z * c4) + spin.jy.mapv(|z| z * s4);
        let tilt_b = spin.jx.mapv(|z| z * c4) - spin.jy.mapv(|z| z * s4);
        let tilt_rate = 4.0 * g * ko * kd / z_p;
        matrix = matrix + lindblad_superoperator(&tilt_a).mapv(|z| z * (tilt_rate * ep));
        matrix = matrix + lindblad_superoperator(&tilt_b).mapv(|z| z * (tilt_rate * em));

        Liouvillian {
            dim: 2,
            matrix,
            gamma: g,
        }
    }

    /// The grouped-rate generator (resonant, `g_z = 0` reduction): shifted
    /// precession plus `Γ_z D[J_z] + Γ_x D[J_x] + Γ_± D[J_±]`. `Γ_x` can be
    /// negative, so this form is for comparison only, never propagation.
    pub fn grouped_generator(&self) -> Liouvillian {
        let spin = spin_algebra(0.5).expect("qubit algebra");
        let h = spin.jz.mapv(|z| z * (self.omega_s + self.delta_omega));
        let matrix = hamiltonian_superoperator(&h)
            + lindblad_superoperator(&spin.jz).mapv(|z| z * self.gamma_z)
            + lindblad_superoperator(&spin.jx).mapv(|z| z * self.gamma_x)
            + lindblad_superoperator(&spin.jplus).mapv(|z| z * self.gamma_plus)
            + lindblad_superoperator(&spin.jminus).mapv(|z| z * self.gamma_minus);
        Liouvillian {
            dim: 2,
            matrix,
            gamma: self.gamma,
        }
    }
}

/// Steady-state excited/ground population ratio of the qubit–qubit model:
///
/// ```text
/// χ = (e^{βω_p/2} K_Ω² + e^{−βω_p/2} K_Δ²) / (e^{βω_p/2} K_Δ² + e^{−βω_p/2} K_Ω²)
/// ```
///
/// Errors when both exchange amplitudes vanish — the populations then never
/// relax and the ratio is undefined.
pub fn qubit_population_ratio(coeffs: &QubitLinearCoefficients) -> Result<f64> {
    let (ko2, kd2) = (
        coeffs.k_omega * coeffs.k_omega,
        coeffs.k_delta * coeffs.k_delta,
    );
    if ko2 == 0.0 && kd2 == 0.0 {
        return Err(Error::InvalidState(
            "no relaxation: both exchange amplitudes vanish, population ratio undefined".into(),
        ));
    }
    let (ep, em) = (
        (coeffs.beta * coeffs.omega_p / 2.0).exp(),
        (-coeffs.beta * coeffs.omega_p / 2.0).exp(),
    );
    Ok((ep * ko2 + em * kd2) / (ep * kd2 + em * ko2))
}

/// Leading small-`τ` limit of the population ratio (resonant, `g_z = 0`):
///
/// ```text
/// χ ≈ 1 − 4 g_x g_y sinh(βω_p/2) / ((g_x²+g_y²)cosh(βω_p/2) + 2g_xg_y sinh(βω_p/2))
/// ```
pub fn qubit_population_ratio_short_time(g_x: f64, g_y: f64, beta: f64, omega_p: f64) -> f64 {
    let sh = (beta * omega_p / 2.0).sinh();
    let ch = (beta * omega_p / 2.0).cosh();
    1.0 - 4.0 * g_x * g_y * sh / ((g_x * g_x + g_y * g_y) * ch + 2.0 * g_x * g_y * sh)
}

// ---------------------------------------------------------------------------
// Family 2: spin J exchange-coupled to thermal qubit probes.
// ---------------------------------------------------------------------------

/// Closed-form data of the spin-`J` exchange model (`g_x = g_y = g`,
/// arbitrary `g_z`, qubit probes).
///
/// Each sector couples `|m,−½⟩ ↔ |m−1,+½⟩` for `m ∈ (−J, J]` with coupling
/// `G_m = g√(J(J+1)−m(m−1))` and shifted detuning `Δ_m = Δ − (m−½)g_z`; the
/// stretched states `|J,+½⟩, |−J,−½⟩` only pick up phases.
#[derive(Clone, Debug)]
pub struct SpinJExchangeData {
    /// System spin.
    pub j: f64,
    /// System dimension `2J+1`.
    pub dim: usize,
    /// Survival amplitudes `C_m`, indexed by `k = J−m` (so `m = J…−J+1`).
    pub c: Vec<C64>,
    /// Exchange amplitudes `K_m`, same indexing.
    pub k: Vec<f64>,
    /// Sector eigenvalues `(m−½)ω_s + (−g_z + 2s_m)/4`.
    pub lambda_plus: Vec<f64>,
    /// Sector eigenvalues `(m−½)ω_s + (−g_z − 2s_m)/4`.
    pub lambda_minus: Vec<f64>,
    /// Eigenvalue of the stretched `|J,+½⟩` state.
    pub lambda_top: f64,
    /// Eigenvalue of the stretched `|−J,−½⟩` state.
    pub lambda_bottom: f64,
    /// Probe-stays-in-ground channel (diagonal, survival amplitudes).
    pub l_1: CMat,
    /// Probe-stays-in-excited channel (diagonal).
    pub l_2: CMat,
    /// System-raising exchange channel.
    pub l_plus: CMat,
    /// System-lowering exchange channel, `L_− = L_+†`.
    pub l_minus: CMat,
    omega_s: f64,
    omega_p: f64,
    g: f64,
    g_z: f64,
    tau: f64,
    beta: f64,
    gamma: f64,
}

/// Evaluate the closed-form sector data and Lindblad channels of the
/// spin-`J` exchange model.
#[allow(clippy::too_many_arguments)]
pub fn spin_j_exchange_lindblads(
    j: f64,
    omega_s: f64,
    omega_p: f64,
    g: f64,
    g_z: f64,
    tau: f64,
    beta: f64,
    gamma: f64,
) -> Result<SpinJExchangeData> {
    let algebra = spin_algebra(j)?;
    let d = algebra.dim;
    let detuning = omega_s - omega_p;
    let mut c = Vec::with_capacity(d.saturating_sub(1));
    let mut k = Vec::with_capacity(d.saturating_sub(1));
    let mut lambda_plus = Vec::with_capacity(d.saturating_sub(1));
    let mut lambda_minus = Vec::with_capacity(d.saturating_sub(1));
    for idx in 0..d.saturating_sub(1) {
        let m = j - idx as f64;
        let g_m = g * (j * (j + 1.0) - m * (m - 1.0)).sqrt();
        let d_m = detuning - (m - 0.5) * g_z;
        let (cm, km) = sector_amplitudes(g_m, d_m, detuning, tau);
        let s = (g_m * g_m + d_m * d_m).sqrt();
        c.push(cm);
        k.push(km);
        lambda_plus.push((m - 0.5) * omega_s + (-g_z + 2.0 * s) / 4.0);
        lambda_minus.push((m - 0.5) * omega_s + (-g_z - 2.0 * s) / 4.0);
    }
    let lambda_top = omega_s * j + omega_p / 2.0 + g_z * j / 2.0;
    let lambda_bottom = -(2.0 * omega_s * j + omega_p - g_z * j) / 2.0;

    let e4 = (C64::i() * g_z * tau / 4.0).exp();
    let e_edge = (-C64::i() * g_z * j * tau / 2.0).exp();
    let mut l_1 = CMat::zeros((d, d));
    let mut l_2 = CMat::zeros((d, d));
    let mut l_plus = CMat::zeros((d, d));
    // Stretched states: the probe cannot flip further, so the diagonal
    // channels carry a bare phase there.
    l_1[[d - 1, d - 1]] = e_edge; // m = −J survives in L_1
    l_2[[0, 0]] = e_edge; // m = +J survives in L_2
    for (idx, (&cm, &km)) in c.iter().zip(k.iter()).enumerate() {
        // idx ↔ m = J − idx; system row for m is idx, for m−1 is idx+1.
        l_1[[idx, idx]] = e4 * cm.conj();
        l_2[[idx + 1, idx + 1]] = e4 * cm;
        l_plus[[idx, idx + 1]] = C64::new(km, 0.0);
    }
    let l_minus = dagger(&l_plus);

    Ok(SpinJExchangeData {
        j,
        dim: d,
        c,
        k,
        lambda_plus,
        lambda_minus,
        lambda_top,
        lambda_bottom,
        l_1,
        l_2,
        l_plus,
        l_minus,
        omega_s,
        omega_p,
        g,
        g_z,
        tau,
        beta,
        gamma,
    })
}

impl SpinJExchangeData {
    /// Joint index of `|m, p⟩` with the probe qubit: `2(J−m) + (0|1)` for
    /// `p = ±½`.
    fn idx(&self, m: f64, p_up: bool) -> usize {
        let sys = (self.j - m).round() as usize;
        2 * sys + usize::from(!p_up)
    }

    /// Joint `(2J+1)·2`-dimensional scattering operator assembled from the
    /// sector amplitudes and edge phases.
    pub fn scattering_matrix(&self) -> CMat {
        let n = 2 * self.dim;
        let mut s = CMat::zeros((n, n));
        let e4 = (C64::i() * self.g_z * self.tau / 4.0).exp();
        let e_edge = (-C64::i() * self.g_z * self.j * self.tau / 2.0).exp();
        for (idx, (&cm, &km)) in self.c.iter().zip(self.k.iter()).enumerate() {
            let m = self.j - idx as f64;
            let lo = self.idx(m, false);
            let hi = self.idx(m - 1.0, true);
            s[[lo, lo]] += e4 * cm.conj();
            s[[hi, hi]] += e4 * cm;
            s[[lo, hi]] += e4 * (-C64::i() * km);
            s[[hi, lo]] += e4 * (-C64::i() * km);
        }
        let top = self.idx(self.j, true);
        let bottom = self.idx(-self.j, false);
        s[[top, top]] += e_edge;
        s[[bottom, bottom]] += e_edge;
        s
    }

    /// Joint bare window unitary `e^{−i(H₀+H_int)τ}` assembled from the
    /// sector eigensystem (normalized eigenvectors, stretched-state phases).
    pub fn bare_unitary_matrix(&self) -> CMat {
        let n = 2 * self.dim;
        let mut u = CMat::zeros((n, n));
        let detuning = self.omega_s - self.omega_p;
        for idx in 0..self.dim.saturating_sub(1) {
            let m = self.j - idx as f64;
            let g_m = self.g * (self.j * (self.j + 1.0) - m * (m - 1.0)).sqrt();
            let d_m = detuning - (m - 0.5) * self.g_z;
            let s = (g_m * g_m + d_m * d_m).sqrt();
            let a = d_m + s;
            let lo = self.idx(m, false);
            let hi = self.idx(m - 1.0, true);
            // Sector eigenvectors: v_+ ∝ a|m,−½⟩ + G_m|m−1,+½⟩ belongs to
            // λ_m^+; v_− ∝ −G_m|m,−½⟩ + a|m−1,+½⟩ to λ_m^−.
            for (amp_lo, amp_hi, lam) in [
                (a, g_m, self.lambda_plus[idx]),
                (-g_m, a, self.lambda_minus[idx]),
            ] {
                let norm = (amp_lo * amp_lo + amp_hi * amp_hi).sqrt();
                if norm < 1e-14 {
                    continue;
                }
                let (v_lo, v_hi) = (amp_lo / norm, amp_hi / norm);
                let phase = (-C64::i() * lam * self.tau).exp();
                u[[lo, lo]] += phase * v_lo * v_lo;
                u[[lo, hi]] += phase * v_lo * v_hi;
                u[[hi, lo]] += phase * v_hi * v_lo;
                u[[hi, hi]] += phase * v_hi * v_hi;
            }
        }
        let top = self.idx(self.j, true);
        let bottom = self.idx(-self.j, false);
        u[[top, top]] = (-C64::i() * self.lambda_top * self.tau).exp();
        u[[bottom, bottom]] = (-C64::i() * self.lambda_bottom * self.tau).exp();
        u
    }

    /// Closed-form generator: precession plus the four thermal channels,
    ///
    /// ```text
    /// L = −iω_s[J_z,·] + γ e^{+βω_p/2}/Z_p (D[L_1] + D[L_−])
    ///                  + γ e^{−βω_p/2}/Z_p (D[L_2] + D[L_+]).
    /// ```
    pub fn generator(&self) -> Liouvillian {
        let algebra = spin_algebra(self.j).expect("validated spin");
        let h = algebra.jz.mapv(|z| z * self.omega_s);
        let (ep, em) = (
            (self.beta * self.omega_p / 2.0).exp(),
            (-self.beta * self.omega_p / 2.0).exp(),
        );
        let z_p = ep + em;
        let (wp, wm) = (self.gamma * ep / z_p, self.gamma * em / z_p);
        let matrix = hamiltonian_superoperator(&h)
            + lindblad_superoperator(&self.l_1).mapv(|z| z * wp)
            + lindblad_superoperator(&self.l_minus).mapv(|z| z * wp)
            + lindblad_superoperator(&self.l_2).mapv(|z| z * wm)
            + lindblad_superoperator(&self.l_plus).mapv(|z| z * wm);
        Liouvillian {
            dim: self.dim,
            matrix,
            gamma: self.gamma,
        }
    }

    /// The `J = ½`, `g_z = 0` reduction: shifted precession, dephasing at
    /// `γ|1−C|²`, and thermally weighted exchange at `γK²e^{±βω_p/2}/Z_p`.
    pub fn spin_half_generator(&self) -> Result<Liouvillian> {
        if self.dim != 2 || self.g_z != 0.0 {
            return Err(Error::InvalidParameter(
                "spin-half reduction requires J = 1/2 and g_z = 0".into(),
            ));
        }
        let spin = spin_algebra(0.5)?;
        let (c0, k0) = (self.c[0], self.k[0]);
        let h = spin.jz.mapv(|z| z * (self.omega_s + self.gamma * c0.im));
        let (ep, em) = (
            (self.beta * self.omega_p / 2.0).exp(),
            (-self.beta * self.omega_p / 2.0).exp(),
        );
        let z_p = ep + em;
        let deph = self.gamma * (C64::new(1.0, 0.0) - c0).norm_sqr();
        let matrix = hamiltonian_superoperator(&h)
            + lindblad_superoperator(&spin.jz).mapv(|z| z * deph)
            + lindblad_superoperator(&spin.jminus).mapv(|z| z * (self.gamma * k0 * k0 * ep / z_p))
            + lindblad_superoperator(&spin.jplus).mapv(|z| z * (self.gamma * k0 * k0 * em / z_p));
        Ok(Liouvillian {
            dim: 2,
            matrix,
            gamma: self.gamma,
        })
    }
}

/// The textbook spin-thermalization generator this model approaches as
/// `gτ → 0` on resonance:
///
/// ```text
/// L = −iω_s[J_z,·] + rate/Z_p (e^{+βω_p/2} D[J_−] + e^{−βω_p/2} D[J_+]).
/// ```
pub fn standard_thermalization_generator(
    j: f64,
    omega_s: f64,
    omega_p: f64,
    beta: f64,
    rate: f64,
) -> Result<Liouvillian> {
    let algebra = spin_algebra(j)?;
    let h = algebra.jz.mapv(|z| z * omega_s);
    let (ep, em) = ((beta * omega_p / 2.0).exp(), (-beta * omega_p / 2.0).exp());
    let z_p = ep + em;
    let matrix = hamiltonian_superoperator(&h)
        + lindblad_superoperator(&algebra.jminus).mapv(|z| z * (rate * ep / z_p))
        + lindblad_superoperator(&algebra.jplus).mapv(|z| z * (rate * em / z_p));
    Ok(Liouvillian {
        dim: algebra.dim,
        matrix,
        gamma: rate,
    })
}

// ---------------------------------------------------------------------------
// Family 3: monitored qubit (pointer probes, ω_p = 0).
// ---------------------------------------------------------------------------

/// Closed-form Kraus blocks of the monitored qubit.
///
/// In the probe's `j_x` eigenbasis the scattering operator block-
/// diagonalizes, `S = K_+ ⊗ |+⟩⟨+| + K_− ⊗ |−⟩⟨−|`, with unitary 2×2
/// blocks `K_± = A_±𝟙 + 2iB_± J_z ∓ 2iC_± J_x` and `A² + B² + C² = 1`.
#[derive(Clone, Debug)]
pub struct MeasurementKrausData {
    /// Identity coefficients `A_±`.
    pub a: [f64; 2],
    /// `J_z` coefficients `B_±`.
    pub b: [f64; 2],
    /// `J_x` coefficients `C_±`.
    pub c: [f64; 2],
    /// Sector Rabi frequencies `R_± = ½√(a_±² + b_±²)`.
    pub r: [f64; 2],
    /// Kraus block for the probe `|+⟩` branch.
    pub k_plus: CMat,
    /// Kraus block for the probe `|−⟩` branch.
    pub k_minus: CMat,
    omega_s: f64,
    gamma: f64,
}

/// Evaluate the closed-form Kraus blocks of the monitored-qubit model.
pub fn measurement_kraus(
    omega_s: f64,
    g: f64,
    theta: f64,
    tau: f64,
    gamma: f64,
) -> MeasurementKrausData {
    let spin = spin_algebra(0.5).expect("qubit algebra");
    let mut a_out = [0.0; 2];
    let mut b_out = [0.0; 2];
    let mut c_out = [0.0; 2];
    let mut r_out = [0.0; 2];
    let mut blocks = Vec::with_capacity(2);
    for (slot, sign) in [1.0_f64, -1.0].into_iter().enumerate() {
        let a_freq = omega_s + sign * 0.5 * g * theta.cos();
        let b_freq = sign * 0.5 * g * theta.sin();
        let r = 0.5 * (a_freq * a_freq + b_freq * b_freq).sqrt();
        // sin(rτ)/(2r) with its r→0 limit τ/2.
        let sinc_half = if r > 0.0 {
            (r * tau).sin() / (2.0 * r)
        } else {
            tau / 2.0
        };
        let (cos_w, sin_w) = ((omega_s * tau / 2.0).cos(), (omega_s * tau / 2.0).sin());
        let cos_r = (r * tau).cos();
        let a = cos_w * cos_r + sin_w * a_freq * sinc_half;
        let b = sin_w * cos_r - cos_w * a_freq * sinc_half;
        let c = sign * b_freq * sinc_half;
        a_out[slot] = a;
        b_out[slot] = b;
        c_out[slot] = c;
        r_out[slot] = r;
        let block = crate::operators::eye(2).mapv(|z| z * a)
            + spin.jz.mapv(|z| z * C64::new(0.0, 2.0 * b))
            - spin.jx.mapv(|z| z * C64::new(0.0, sign * 2.0 * c));
        blocks.push(block);
    }
    let k_minus = blocks.pop().expect("two blocks");
    let k_plus = blocks.pop().expect("two blocks");
    MeasurementKrausData {
        a: a_out,
        b: b_out,
        c: c_out,
        r: r_out,
        k_plus,
        k_minus,
        omega_s,
        gamma,
    }
}

impl MeasurementKrausData {
    /// Joint 4×4 scattering operator `K_+⊗|+⟩⟨+| + K_−⊗|−⟩⟨−|` in the
    /// computational (`j_z`) probe basis.
    pub fn scattering_matrix(&self) -> CMat {
        let half = C64::new(0.5, 0.0);
        let mut s = CMat::zeros((4, 4));
        for (block, sign) in [(&self.k_plus, 1.0), (&self.k_minus, -1.0)] {
            // |±⟩⟨±| = ½(𝟙 ± 2j_x) has entries ½ on the diagonal and ±½ off.
            for sys_r in 0..2 {
                for sys_c in 0..2 {
                    let k = block[[sys_r, sys_c]];
                    s[[2 * sys_r, 2 * sys_c]] += k * half;
                    s[[2 * sys_r + 1, 2 * sys_c + 1]] += k * half;
                    s[[2 * sys_r, 2 * sys_c + 1]] += k * half * sign;
                    s[[2 * sys_r + 1, 2 * sys_c]] += k * half * sign;
                }
            }
        }
        s
    }

    /// Exact reduced generator: because the probe starts in a `j_z`
    /// eigenstate and `S` is block-diagonal in `j_x`, the cross terms vanish
    /// and the dissipator is an equal mixture of the two Kraus conjugations,
    ///
    /// ```text
    /// L(ρ) = −iω_s[J_z,ρ] + γ/2 (K_+ρK_+† + K_−ρK_−† − 2ρ).
    /// ```
    pub fn generator(&self) -> Liouvillian {
        let spin = spin_algebra(0.5).expect("qubit algebra");
        let h = spin.jz.mapv(|z| z * self.omega_s);
        let id4 = crate::operators::eye(4);
        let matrix = hamiltonian_superoperator(&h)
            + (crate::operators::sprepost(&self.k_plus, &dagger(&self.k_plus))
                + crate::operators::sprepost(&self.k_minus, &dagger(&self.k_minus))
                - id4.mapv(|z| z * 2.0))
            .mapv(|z| z * (self.gamma / 2.0));
        Liouvillian {
            dim: 2,
            matrix,
            gamma: self.gamma,
        }
    }

    /// The same generator in explicit Lindblad form: writing
    /// `K_± = A_± + 2iV_±` with Hermitian axes `V_+ = B_+J_z − C_+J_x` and
    /// `V_− = B_−J_z + C_−J_x`,
    ///
    /// ```text
    /// L = −i[ω_sJ_z − γ(A_+V_+ + A_−V_−), ·] + 2γ(D[V_+] + D[V_−]).
    /// ```
    pub fn lindblad_form_generator(&self) -> Liouvillian {
        let spin = spin_algebra(0.5).expect("qubit algebra");
        let v_plus = spin.jz.mapv(|z| z * self.b[0]) - spin.jx.mapv(|z| z * self.c[0]);
        let v_minus = spin.jz.mapv(|z| z * self.b[1]) + spin.jx.mapv(|z| z * self.c[1]);
        let h = spin.jz.mapv(|z| z * self.omega_s)
            - (v_plus.mapv(|z| z * self.a[0]) + v_minus.mapv(|z| z * self.a[1]))
                .mapv(|z| z * self.gamma);
        let matrix = hamiltonian_superoperator(&h)
            + (lindblad_superoperator(&v_plus) + lindblad_superoperator(&v_minus))
                .mapv(|z| z * (2.0 * self.gamma));
        Liouvillian {
            dim: 2,
            matrix,
            gamma: self.gamma,
        }
    }
}
