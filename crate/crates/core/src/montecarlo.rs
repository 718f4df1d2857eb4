//! Stochastic trajectory simulation of the repeated-interaction process:
//! probes arrive at Poisson-distributed times, each interacting with the
//! system for a finite window. Ensemble averages over many trajectories are
//! an independent check on the master equation — the generator makes a
//! point-process approximation (collisions cannot overlap, windows are
//! rare), so the two agree only where `γτ ≪ 1`, and the simulation is what
//! exposes the breakdown.
//!
//! Randomness enters only through waiting times and probe-ensemble draws;
//! each trajectory carries a density matrix (not a pure-state unraveling),
//! so a trajectory is a deterministic function of its arrival times.
//!
//! Conventions (the stream picture): a collision centred at `c` occupies
//! the window `[c−τ/2, c+τ/2]`. Centres march as `c₁ = max(E₁, τ/2)`,
//! `c_{k+1} = c_k + max(E_{k+1}, τ)` with `E ~ Exp(γ)`, which clips
//! overlapping windows (counted in `clipped`). The jump operator acts
//! instantaneously at the centre with free evolution across the full
//! inter-centre span — for the scattering kind this reproduces the windowed
//! unitary process exactly whenever the probe state is stationary under its
//! own Hamiltonian. A grid time inside a window is recorded from the
//! nearest window edge (pre-kick before the centre, post-kick after) and
//! flagged via `window_fraction`.

use crate::master::{evolve_with, validate_grid, Liouvillian, Propagation};
use crate::model::RepeatedInteractionModel;
use crate::operators::{dagger, hermitian_eig, kron, partial_trace, CMat, Subsystem, C64};
use crate::scattering::{jump_operator_for, JumpKind};
use crate::spin::spin_algebra;
use crate::states::DensityMatrix;
use crate::{Error, Result};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Signal-to-noise threshold for including a grid point in the coherence
/// decay-rate fit: the ensemble mean must exceed this many standard errors
/// so the logarithm is not noise-dominated.
const FIT_SNR: f64 = 8.0;

/// Splitmix64 finalizer, used to decorrelate per-trajectory seeds: adjacent
/// trajectory indices map to statistically independent 64-bit streams.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// `Exp(γ)` waiting time by inversion sampling; `γ ≤ 0` means no event.
fn waiting_time(rng: &mut ChaCha8Rng, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / gamma
}

/// Ensemble averages of a trajectory simulation.
#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    /// Recording grid.
    pub times: Vec<f64>,
    /// Number of trajectories averaged.
    pub n: usize,
    /// Base seed the per-trajectory streams were derived from.
    pub seed: u64,
    /// Jump-operator kind applied at the collision centres.
    pub kind: JumpKind,
    /// Ensemble mean of `⟨J_z⟩` per grid point.
    pub mean_jz: Vec<f64>,
    /// Standard error (sample stddev / √N) of `⟨J_z⟩`.
    pub stderr_jz: Vec<f64>,
    /// Modulus of the ensemble-averaged complex `⟨J_+⟩`.
    pub mean_jplus_abs: Vec<f64>,
    /// Standard error of the complex mean, `√((Var Re + Var Im)/N)`.
    pub stderr_jplus: Vec<f64>,
    /// Fraction of recordings that fell inside an interaction window.
    pub window_fraction: f64,
    /// Number of waiting intervals clipped to keep windows disjoint.
    pub clipped: usize,
}

/// Per-member data precomputed once and shared across trajectories.
struct KickData {
    op: CMat,
    eta: CMat,
    d_p: usize,
    tau: f64,
    cum_weight: f64,
}

/// Free system propagation in the eigenbasis of `H_s`.
struct FreeEvolution {
    w: Array1<f64>,
    v: CMat,
    v_dag: CMat,
}

impl FreeEvolution {
    fn new(h_s: &CMat) -> Result<Self> {
        let (w, v) = hermitian_eig(h_s)?;
        let v_dag = dagger(&v);
        Ok(Self { w, v, v_dag })
    }

    fn propagate(&self, rho: &CMat, dt: f64) -> CMat {
        if dt == 0.0 {
            return rho.clone();
        }
        let mut m = self.v_dag.dot(rho).dot(&self.v);
        for j in 0..m.nrows() {
            for k in 0..m.ncols() {
                m[[j, k]] *= (-C64::i() * (self.w[j] - self.w[k]) * dt).exp();
            }
        }
        self.v.dot(&m).dot(&self.v_dag)
    }
}

/// Raw per-trajectory record prior to reduction.
struct TrajectoryRecord {
    jz: Vec<f64>,
    jplus: Vec<C64>,
    window_hits: usize,
    clips: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    rho0: &CMat,
    free: &FreeEvolution,
    kicks: &[KickData],
    gamma: f64,
    t_grid: &[f64],
    jz_op: &CMat,
    jplus_op: &CMat,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = rho0.clone();
    let mut anchor = 0.0; // time the current `state` is pinned to
    let mut grid_idx = 0;
    let mut record = TrajectoryRecord {
        jz: Vec::with_capacity(t_grid.len()),
        jplus: Vec::with_capacity(t_grid.len()),
        window_hits: 0,
        clips: 0,
    };
    // (centre, τ) of the most recent processed kick, for window flagging.
    let mut prev_kick: Option<(f64, f64)> = None;

    while grid_idx < t_grid.len() {
        let e = waiting_time(&mut rng, gamma);
        let kick = if kicks.len() == 1 {
            &kicks[0]
        } else {
            let u: f64 = rng.gen();
            kicks
                .iter()
                .find(|k| u < k.cum_weight)
                .unwrap_or(&kicks[kicks.len() - 1])
        };
        let centre = match prev_kick {
            None => {
                if e < kick.tau / 2.0 {
                    record.clips += 1;
                }
                e.max(kick.tau / 2.0)
            }
            Some((c_prev, _)) => {
                if e < kick.tau {
                    record.clips += 1;
                }
                c_prev + e.max(kick.tau)
            }
        };

        // Record every grid point before this centre: free evolution of
        // the post-kick state from the previous centre.
        while grid_idx < t_grid.len() && t_grid[grid_idx] < centre {
            let t = t_grid[grid_idx];
            let rho_t = free.propagate(&state, t - anchor);
            record.jz.push(rho_t.dot(jz_op).diag().sum().re);
            record.jplus.push(rho_t.dot(jplus_op).diag().sum());
            let in_upcoming = centre - t <= kick.tau / 2.0;
            let in_previous = prev_kick
                .map(|(c, tau)| t - c <= tau / 2.0)
                .unwrap_or(false);
            if in_upcoming || in_previous {
                record.window_hits += 1;
            }
            grid_idx += 1;
        }
        if grid_idx == t_grid.len() {
            break;
        }
        if !centre.is_finite() {
            // γ = 0: no collisions ever arrive.
            continue;
        }

        // Apply the kick at its centre and re-validate the state.
        let freely = free.propagate(&state, centre - anchor);
        let joint = kron(&freely, &kick.eta);
        let after = kick.op.dot(&joint).dot(&dagger(&kick.op));
        let d_s = freely.nrows();
        let reduced = partial_trace(&after, (d_s, kick.d_p), Subsystem::First)?;
        state = DensityMatrix::new(reduced)?.into_matrix();
        anchor = centre;
        prev_kick = Some((centre, kick.tau));
    }
    Ok(record)
}

/// Simulate `n` trajectories of the collision stream and average the spin
/// observables on `t_grid`. Identical `(model, rho0, t_grid, n, seed,
/// kind)` give bit-identical results regardless of thread count: each
/// trajectory derives its own stream from `seed ⊕ splitmix64(index)` and
/// the reduction runs in index order.
pub fn simulate(
    model: &RepeatedInteractionModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    n: usize,
    seed: u64,
    kind: JumpKind,
) -> Result<TrajectoryEnsemble> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "trajectory count must be at least 1".into(),
        ));
    }
    validate_grid(t_grid)?;
    let d_s = model.system_dim();
    if rho0.dim() != d_s {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {}-dim, model system is {}-dim",
            rho0.dim(),
            d_s
        )));
    }
    let free = FreeEvolution::new(&model.h_s)?;
    let mut kicks = Vec::new();
    let mut cum = 0.0;
    for member in model.ensemble.members() {
        cum += member.weight;
        kicks.push(KickData {
            op: jump_operator_for(model, member, kind)?.op,
            eta: member.eta.matrix().clone(),
            d_p: member.probe_dim(),
            tau: member.tau,
            cum_weight: cum,
        });
    }
    let algebra = spin_algebra((d_s as f64 - 1.0) / 2.0)?;

    let records: Vec<TrajectoryRecord> = (0..n)
        .into_par_iter()
        .map(|i| {
            run_trajectory(
                rho0.matrix(),
                &free,
                &kicks,
                model.gamma,
                t_grid,
                &algebra.jz,
                &algebra.jplus,
                seed ^ splitmix64(i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    // Ordered reduction: accumulate in trajectory order so results do not
    // depend on the parallel schedule.
    let g = t_grid.len();
    let nf = n as f64;
    let mut mean_jz = vec![0.0; g];
    let mut mean_jp = vec![C64::new(0.0, 0.0); g];
    let mut window_hits = 0usize;
    let mut clipped = 0usize;
    for rec in &records {
        for k in 0..g {
            mean_jz[k] += rec.jz[k];
            mean_jp[k] += rec.jplus[k];
        }
        window_hits += rec.window_hits;
        clipped += rec.clips;
    }
    for k in 0..g {
        mean_jz[k] /= nf;
        mean_jp[k] /= nf;
    }
    let mut stderr_jz = vec![0.0; g];
    let mut stderr_jplus = vec![0.0; g];
    if n > 1 {
        let mut var_jz = vec![0.0; g];
        let mut var_jp = vec![0.0; g];
        for rec in &records {
            for k in 0..g {
                let dz = rec.jz[k] - mean_jz[k];
                var_jz[k] += dz * dz;
                let dp = rec.jplus[k] - mean_jp[k];
                var_jp[k] += dp.norm_sqr();
            }
        }
        for k in 0..g {
            stderr_jz[k] = (var_jz[k] / (nf - 1.0) / nf).sqrt();
            stderr_jplus[k] = (var_jp[k] / (nf - 1.0) / nf).sqrt();
        }
    }

    Ok(TrajectoryEnsemble {
        times: t_grid.to_vec(),
        n,
        seed,
        kind,
        mean_jz,
        stderr_jz,
        mean_jplus_abs: mean_jp.iter().map(|z| z.norm()).collect(),
        stderr_jplus,
        window_fraction: window_hits as f64 / (nf * g as f64),
        clipped,
    })
}

/// Master-equation curves compared against the stochastic oracle for one
/// jump-operator kind.
#[derive(Clone, Debug)]
pub struct KindComparison {
    /// Kind whose generator produced these curves.
    pub kind: JumpKind,
    /// Largest `|⟨J_z⟩_ME − ⟨J_z⟩_MC| / stderr` over the grid.
    pub max_z_jz: f64,
    /// Largest coherence deviation in standard errors.
    pub max_z_jplus: f64,
    /// Exponential decay rate fitted to the generator's `|⟨J_+⟩|` curve
    /// over the oracle's fit window.
    pub coherence_rate: f64,
}

/// Result of [`compare_kinds`]: the stochastic oracle plus one comparison
/// per generator kind.
#[derive(Clone, Debug)]
pub struct CompareReport {
    /// The scattering-kind trajectory ensemble all generators are judged
    /// against.
    pub oracle: TrajectoryEnsemble,
    /// Decay rate fitted to the oracle's coherence curve.
    pub oracle_coherence_rate: f64,
    /// Per-kind deviations and rates, in [`JumpKind::ALL`] order.
    pub kinds: Vec<KindComparison>,
    /// Grid indices where the oracle coherence is strong enough
    /// (mean > 8 standard errors) to support a log-linear rate fit.
    pub fit_window: Vec<usize>,
}

/// Least-squares slope of `ln y` versus `t` over the selected indices,
/// returned as a decay rate (positive for decaying signals).
fn fitted_decay_rate(times: &[f64], values: &[f64], window: &[usize]) -> Result<f64> {
    if window.len() < 3 {
        return Err(Error::InvalidState(
            "coherence rate fit needs at least 3 usable grid points".into(),
        ));
    }
    if window.iter().any(|&k| values[k] <= 0.0) {
        return Err(Error::InvalidState(
            "coherence rate fit needs positive signal".into(),
        ));
    }
    let n = window.len() as f64;
    let t_mean = window.iter().map(|&k| times[k]).sum::<f64>() / n;
    let l_mean = window.iter().map(|&k| values[k].ln()).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &k in window {
        cov += (times[k] - t_mean) * (values[k].ln() - l_mean);
        var += (times[k] - t_mean) * (times[k] - t_mean);
    }
    Ok(-cov / var)
}

/// Run the stochastic process once (scattering kind — the physical
/// windowed dynamics) and compare every generator kind's master-equation
/// curves against it: deviation z-scores for both observables plus fitted
/// coherence decay rates.
pub fn compare_kinds(
    model: &RepeatedInteractionModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<CompareReport> {
    let oracle = simulate(model, rho0, t_grid, n, seed, JumpKind::Scattering)?;
    let fit_window: Vec<usize> = (0..t_grid.len())
        .filter(|&k| {
            oracle.stderr_jplus[k] > 0.0
                && oracle.mean_jplus_abs[k] > FIT_SNR * oracle.stderr_jplus[k]
        })
        .collect();
    let oracle_coherence_rate =
        fitted_decay_rate(t_grid, &oracle.mean_jplus_abs, &fit_window)?;

    let algebra = spin_algebra((model.system_dim() as f64 - 1.0) / 2.0)?;
    let mut kinds = Vec::new();
    for kind in JumpKind::ALL {
        let l: Liouvillian = crate::master::ensemble_liouvillian(model, kind)?;
        let states = evolve_with(&l, rho0, t_grid, Propagation::Exact)?;
        let jz: Vec<f64> = states
            .iter()
            .map(|s| s.matrix().dot(&algebra.jz).diag().sum().re)
            .collect();
        let jp: Vec<f64> = states
            .iter()
            .map(|s| s.matrix().dot(&algebra.jplus).diag().sum().norm())
            .collect();
        let mut max_z_jz = 0.0_f64;
        let mut max_z_jplus = 0.0_f64;
        for k in 0..t_grid.len() {
            if oracle.stderr_jz[k] > 0.0 {
                max_z_jz = max_z_jz.max((jz[k] - oracle.mean_jz[k]).abs() / oracle.stderr_jz[k]);
            }
            if oracle.stderr_jplus[k] > 0.0 {
                max_z_jplus = max_z_jplus
                    .max((jp[k] - oracle.mean_jplus_abs[k]).abs() / oracle.stderr_jplus[k]);
            }
        }
        kinds.push(KindComparison {
            kind,
            max_z_jz,
            max_z_jplus,
            coherence_rate: fitted_decay_rate(t_grid, &jp, &fit_window)?,
        });
    }
    Ok(CompareReport {
        oracle,
        oracle_coherence_rate,
        kinds,
        fit_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::ensemble_liouvillian;
    use crate::model::build_single_spin_model;
    use crate::states::plus_ket;

    /// Fig.-style qubit stream: resonant probes, mixed linear coupling.
    fn qubit_stream(gamma: f64, tau: f64) -> RepeatedInteractionModel {
        build_single_spin_model(0.5, 1.0, 0.5, 1.0, 4.0 / 3.0, 0.05, 0.025, 0.01, tau, gamma)
            .unwrap()
    }

    #[test]
    fn waiting_time_mean_matches_rate() {
        let gamma = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| waiting_time(&mut rng, gamma)).sum::<f64>() / n as f64;
        assert!(
            (mean - 1.0 / gamma).abs() < 0.01 / gamma,
            "sample mean {mean} vs expected {}",
            1.0 / gamma
        );
    }

    #[test]
    fn zero_rate_reproduces_free_evolution() {
        let model = qubit_stream(0.0, 20.0);
        let rho0 = DensityMatrix::pure(&plus_ket()).unwrap();
        let grid = [5.0, 10.0, 30.0];
        let ens = simulate(&model, &rho0, &grid, 8, 3, JumpKind::Scattering).unwrap();
        for k in 0..grid.len() {
            assert!(ens.mean_jz[k].abs() < 1e-14);
            assert!((ens.mean_jplus_abs[k] - 0.5).abs() < 1e-12);
            // Identical trajectories: spread is pure summation roundoff.
            assert!(ens.stderr_jz[k] < 1e-15);
            assert!(ens.stderr_jplus[k] < 1e-15);
        }
        assert_eq!(ens.clipped, 0);
        assert_eq!(ens.window_fraction, 0.0);
    }

    #[test]
    fn results_are_deterministic_across_thread_counts() {
        let model = qubit_stream(2.5e-3, 40.0);
        let rho0 = DensityMatrix::pure(&plus_ket()).unwrap();
        let grid: Vec<f64> = (1..=6).map(|k| 250.0 * k as f64).collect();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate(&model, &rho0, &grid, 64, 7, JumpKind::Scattering))
            .unwrap();
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate(&model, &rho0, &grid, 64, 7, JumpKind::Scattering))
            .unwrap();
        assert_eq!(serial.mean_jz, parallel.mean_jz);
        assert_eq!(serial.mean_jplus_abs, parallel.mean_jplus_abs);
        assert_eq!(serial.stderr_jz, parallel.stderr_jz);
        assert_eq!(serial.clipped, parallel.clipped);
    }

    #[test]
    fn weak_rate_ensemble_tracks_master_equation() {
        // γτ = 0.1: the point-process approximation is good, so the
        // ensemble mean should sit within a few standard errors of the
        // generator curves (fixed seed, margin above the 3σ criterion).
        let model = qubit_stream(2.5e-3, 40.0);
        let rho0 = DensityMatrix::pure(&plus_ket()).unwrap();
        let grid: Vec<f64> = (1..=10).map(|k| 300.0 * k as f64).collect();
        let ens = simulate(&model, &rho0, &grid, 2000, 11, JumpKind::Scattering).unwrap();
        let l = ensemble_liouvillian(&model, JumpKind::Scattering).unwrap();
        let states = evolve_with(&l, &rho0, &grid, Propagation::Exact).unwrap();
        let algebra = spin_algebra(0.5).unwrap();
        for (k, state) in states.iter().enumerate() {
            let jz = state.matrix().dot(&algebra.jz).diag().sum().re;
            let z = (jz - ens.mean_jz[k]).abs() / ens.stderr_jz[k];
            assert!(z < 4.0, "⟨J_z⟩ deviates by {z:.1}σ at t = {}", grid[k]);
            let jp = state.matrix().dot(&algebra.jplus).diag().sum().norm();
            let zp = (jp - ens.mean_jplus_abs[k]).abs() / ens.stderr_jplus[k];
            assert!(zp < 4.0, "|⟨J_+⟩| deviates by {zp:.1}σ at t = {}", grid[k]);
        }
    }

    #[test]
    fn dense_stream_clips_and_flags_windows() {
        // γτ = 1: windows cover a large fraction of the timeline, so
        // clipping and in-window recordings must both show up.
        let model = qubit_stream(2.5e-3, 400.0);
        let rho0 = DensityMatrix::pure(&plus_ket()).unwrap();
        let grid: Vec<f64> = (1..=10).map(|k| 500.0 * k as f64).collect();
        let ens = simulate(&model, &rho0, &grid, 200, 13, JumpKind::Scattering).unwrap();
        assert!(ens.clipped > 0, "no clipped intervals at γτ = 1");
        assert!(
            ens.window_fraction > 0.1,
            "window fraction {} suspiciously low at γτ = 1",
            ens.window_fraction
        );
    }

    #[test]
    fn compare_report_ranks_decoherence_rates() {
        // The bare-unitary generator keeps the free phases inside the
        // window and so over-predicts coherence decay; the scattering
        // generator should fit the oracle rate closely.
        let model = qubit_stream(2.5e-3, 40.0);
        let rho0 = DensityMatrix::pure(&plus_ket()).unwrap();
        let grid: Vec<f64> = (1..=10).map(|k| 300.0 * k as f64).collect();
        let report = compare_kinds(&model, &rho0, &grid, 1500, 19).unwrap();
        assert_eq!(report.kinds.len(), 3);
        assert!(!report.fit_window.is_empty());
        let rate_of = |kind: JumpKind| {
            report
                .kinds
                .iter()
                .find(|c| c.kind == kind)
                .unwrap()
                .coherence_rate
        };
        let scattering = rate_of(JumpKind::Scattering);
        let bare = rate_of(JumpKind::BareUnitary);
        assert!(
            bare > 1.2 * scattering,
            "bare rate {bare:.3e} not above scattering rate {scattering:.3e}"
        );
        let rel = (report.oracle_coherence_rate - scattering).abs() / scattering;
        assert!(
            rel < 0.2,
            "oracle rate {:.3e} vs scattering {scattering:.3e}",
            report.oracle_coherence_rate
        );
    }
}
