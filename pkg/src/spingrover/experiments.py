"""Ensemble runs, fidelity statistics and decay-model fitting.

Averaging the projector of the final state over many noisy repetitions
turns the output into a mixed state; its overlap with the ideal outcome,

    F = (1/n) sum_r |<ideal | psi_r>|^2,

is the figure of merit.  The statistical error of an ensemble average uses
sub-ensemble grouping: split the repetitions into p equal groups, average
each, and take sigma(F) = sqrt(var(group means) / p).

Final fidelities as a function of the noise amplitude are summarized by
one of two phenomenological decay models,

    exp_gauss:  f(e) = f0 + (1 - f0) exp[-(e/e2)^2 - e/e1]
    algebraic:  g(e) = g0 + (1 - g0) / sqrt((e/e2)^2 + e/e1 + 1),

fitted by damped (Levenberg-Marquardt style) weighted least squares.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engines import EngineKind, Trajectory, basis_vector, run_program
from .noise_model import NoiseSpec, sample_realization
from .pulse_kernel import PulseProgram
from .spin_model import SpinSystem

REFERENCE_MODES = ("noiseless_pulses", "resonant_only", "target_state")


class FitError(RuntimeError):
    """Fit did not converge; ``best`` carries the best parameters found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDataError(ValueError):
    """The data carry no decay signal to fit."""


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Squared overlap of two pure states.

    The norm check allows 1e-3 of slack to accommodate integrator drift in
    states produced by the fixed-step engine.
    """
    for s in (a, b):
        if abs(np.linalg.norm(s) - 1.0) > 1e-3:
            raise ValueError("states must be normalized")
    return float(abs(np.vdot(a, b)) ** 2)


def mixed_fidelity(ideal: np.ndarray, runs: list[np.ndarray]) -> float:
    """Projection of the run-averaged density operator onto the ideal state."""
    if not len(runs):
        raise ValueError("need at least one run")
    return float(np.mean([fidelity(ideal, r) for r in runs]))


def subensemble_error(fidelities, p: int) -> tuple[float, float]:
    """Ensemble mean and its statistical error from p equal sub-groups."""
    values = np.asarray(fidelities, dtype=float)
    if p < 2:
        raise ValueError("need at least two groups")
    if p > values.size:
        raise ValueError(f"cannot split {values.size} values into {p} groups")
    size = values.size // p
    groups = values[: p * size].reshape(p, size)
    means = groups.mean(axis=1)
    mean = float(means.mean())
    var = float(np.sum((means - mean) ** 2) / (p - 1))
    return mean, float(np.sqrt(var / p))


def default_thread_count() -> int:
    env = os.environ.get("SPINGROVER_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class EnsembleResult:
    """Per-repetition fidelities of one noisy ensemble."""

    fidelities: np.ndarray
    n_rep: int
    spec: NoiseSpec
    reference_mode: str
    curves: np.ndarray | None = None      # (n_rep, n_pulses + 1) if collected
    times_tph: np.ndarray | None = None

    def summary(self, p: int = 10) -> tuple[float, float]:
        p = min(p, max(2, self.n_rep // 2)) if self.n_rep < 2 * p else p
        if self.n_rep == 1:
            return float(self.fidelities[0]), 0.0
        return subensemble_error(self.fidelities, p)


def _extract_target(program: PulseProgram) -> int:
    for m in program.markers:
        if m.label.startswith("oracle("):
            return int(m.label[len("oracle("):-1])
    raise ValueError("program carries no oracle marker to define a target state")


def reference_trajectory(
    system: SpinSystem,
    program: PulseProgram,
    engine: EngineKind,
    initial: np.ndarray,
    reference_mode: str,
) -> Trajectory:
    """Noise-free reference against which fidelities are measured."""
    if reference_mode not in REFERENCE_MODES:
        raise ValueError(f"reference_mode must be one of {REFERENCE_MODES}")
    if reference_mode == "resonant_only":
        return run_program(EngineKind(kind="resonant_only"), system, program, initial)
    if reference_mode == "noiseless_pulses":
        return run_program(engine, system, program, initial)
    # target_state: constant reference at the target basis state
    target = _extract_target(program)
    ref = basis_vector(system.n_spins, target)
    traj = Trajectory(
        states=[ref] * (len(program) + 1),
        times_tph=np.zeros(len(program) + 1),
        labels=program.gate_labels(),
    )
    return traj


def run_ensemble(
    system: SpinSystem,
    program: PulseProgram,
    engine: EngineKind,
    noise_spec: NoiseSpec,
    n_rep: int,
    reference_mode: str = "noiseless_pulses",
    initial: np.ndarray | None = None,
    collect_curves: bool = False,
    max_workers: int | None = None,
) -> EnsembleResult:
    """n_rep noisy executions with fresh realizations, merged by repetition."""
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    if initial is None:
        initial = basis_vector(system.n_spins, 0)
    ref = reference_trajectory(system, program, engine, initial, reference_mode)

    def one(rep: int):
        real = sample_realization(noise_spec, rep, len(program), system.n_spins)
        traj = run_program(engine, system, program, initial, noise=real)
        if collect_curves:
            return traj.fidelity_curve(ref)
        return fidelity(ref.final, traj.final)

    workers = max_workers if max_workers is not None else default_thread_count()
    if workers > 1 and n_rep > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(n_rep)))
    else:
        results = [one(rep) for rep in range(n_rep)]

    if collect_curves:
        curves = np.array(results)
        return EnsembleResult(
            fidelities=curves[:, -1],
            n_rep=n_rep,
            spec=noise_spec,
            reference_mode=reference_mode,
            curves=curves,
            times_tph=ref.times_tph,
        )
    return EnsembleResult(
        fidelities=np.array(results),
        n_rep=n_rep,
        spec=noise_spec,
        reference_mode=reference_mode,
    )


def sweep_amplitudes(
    system: SpinSystem,
    program: PulseProgram,
    engine: EngineKind,
    noise_spec: NoiseSpec,
    amplitudes,
    n_rep: int,
    reference_mode: str = "noiseless_pulses",
    p_groups: int = 10,
    max_workers: int | None = None,
) -> list[tuple[float, float, float, int]]:
    """Rows (epsilon, mean fidelity, sigma, n_rep) over a noise-amplitude grid."""
    import dataclasses

    rows = []
    for eps in amplitudes:
        spec = dataclasses.replace(noise_spec, amplitude=float(eps))
        res = run_ensemble(
            system, program, engine, spec, n_rep,
            reference_mode=reference_mode, max_workers=max_workers,
        )
        mean, sigma = res.summary(p=p_groups)
        rows.append((float(eps), mean, sigma, n_rep))
    return rows


# ---------------------------------------------------------------------------
# decay models and fitting

MODELS = ("exp_gauss", "algebraic")


@dataclass(frozen=True)
class FitResult:
    model: str
    params: tuple[float, float, float]       # (baseline, eps2, eps1)
    sigmas: tuple[float, float, float]
    chi2_reduced: float
    residual_norm: float


def eval_decay_model(model: str, params, eps):
    """Evaluate a decay model; both give exactly 1 at eps = 0."""
    baseline, e2, e1 = params
    eps = np.asarray(eps, dtype=float)
    if model == "exp_gauss":
        out = baseline + (1 - baseline) * np.exp(-((eps / e2) ** 2) - eps / e1)
    elif model == "algebraic":
        out = baseline + (1 - baseline) / np.sqrt((eps / e2) ** 2 + eps / e1 + 1)
    else:
        raise ValueError(f"model must be one of {MODELS}")
    return float(out) if out.ndim == 0 else out


def _jacobian(model: str, params, eps):
    baseline, e2, e1 = params
    eps = np.asarray(eps, dtype=float)
    if model == "exp_gauss":
        core = np.exp(-((eps / e2) ** 2) - eps / e1)
        d_b = 1 - core
        d_e2 = (1 - baseline) * core * (2 * eps**2 / e2**3)
        d_e1 = (1 - baseline) * core * (eps / e1**2)
    else:
        q = (eps / e2) ** 2 + eps / e1 + 1
        d_b = 1 - 1 / np.sqrt(q)
        d_e2 = (1 - baseline) * (eps**2 / e2**3) / q**1.5
        d_e1 = (1 - baseline) * (eps / (2 * e1**2)) / q**1.5
    return np.column_stack([d_b, d_e2, d_e1])


def _params_valid(p) -> bool:
    baseline, e2, e1 = p
    return 0 <= baseline < 1 and e2 > 0 and e1 > 0


def fit_decay(points, model: str) -> FitResult:
    """Weighted damped least squares of a decay model to (eps, F, sigma) rows.

    Damping guarantees a monotone non-increasing weighted residual;
    convergence when the relative parameter change drops below 1e-8
    (200 iterations maximum).  Parameter uncertainties come from the
    diagonal of the inverse curvature matrix scaled by the reduced
    chi-square.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    pts = sorted((float(e), float(f), float(s)) for e, f, s in points)
    if len(pts) < 4:
        raise ValueError("need at least four points")
    eps = np.array([p[0] for p in pts])
    fval = np.array([p[1] for p in pts])
    sig = np.array([p[2] for p in pts])
    if np.any(sig <= 0):
        raise ValueError("all sigmas must be positive")
    if np.ptp(fval) == 0:
        raise DegenerateDataError("all fidelities are equal; nothing to fit")

    baseline0 = min(max(float(fval.min()), 0.0), 0.999)
    drop = eps[fval < (1 + baseline0) / 2]
    scale0 = float(drop[0]) if drop.size else float(np.median(eps))
    if scale0 <= 0:
        scale0 = float(np.median(eps[eps > 0])) if np.any(eps > 0) else 1.0
    p = np.array([baseline0, scale0, scale0])

    def cost(par):
        return float(np.sum(((eval_decay_model(model, par, eps) - fval) / sig) ** 2))

    lam = 1e-3
    chi2 = cost(p)
    converged = False
    for _ in range(200):
        r = (eval_decay_model(model, p, eps) - fval) / sig
        jac = _jacobian(model, p, eps) / sig[:, None]
        jtj = jac.T @ jac
        g = jac.T @ r
        stepped = False
        for _ in range(40):
            try:
                dp = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            cand = p + dp
            if _params_valid(cand) and cost(cand) <= chi2:
                rel = float(np.max(np.abs(dp) / (np.abs(p) + 1e-300)))
                p, chi2 = cand, cost(cand)
                lam = max(lam / 10, 1e-12)
                stepped = True
                if rel < 1e-8:
                    converged = True
                break
            lam *= 10
        if not stepped:
            # no damped step lowers the residual: at a minimum already
            converged = True
        if converged:
            break
    jac = _jacobian(model, p, eps) / sig[:, None]
    jtj = jac.T @ jac
    dof = max(len(pts) - 3, 1)
    chi2_red = chi2 / dof
    try:
        cov = np.linalg.inv(jtj) * chi2_red
        sigmas = tuple(float(s) for s in np.sqrt(np.maximum(np.diag(cov), 0.0)))
    except np.linalg.LinAlgError:
        sigmas = (float("nan"),) * 3
    result = FitResult(
        model=model,
        params=(float(p[0]), float(p[1]), float(p[2])),
        sigmas=sigmas,
        chi2_reduced=float(chi2_red),
        residual_norm=float(np.sqrt(chi2)),
    )
    if not converged:
        raise FitError("fit did not converge within 200 iterations", best=result)
    return result
