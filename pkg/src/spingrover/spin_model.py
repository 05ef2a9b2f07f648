"""Spin register, diagonal Hamiltonian and transition bookkeeping.

The register is an open chain of spin-1/2 nuclei with Larmor frequencies
``w_k`` and diagonal Ising couplings ``J`` (first neighbor) and ``Jp``
(second neighbor).  The diagonal energies of the computational basis states

    E_a / hbar = - sum_k w_k (-1)^{a_k}/2
                 - 2 J  sum_k [(-1)^{a_k}/2][(-1)^{a_{k+1}}/2]
                 - 2 Jp sum_k [(-1)^{a_k}/2][(-1)^{a_{k+2}}/2]

(sums over existing neighbors only) give rise to conditional single-qubit
transition frequencies

    w_k + mu*J + nu*Jp

where (mu, nu) are the signed sums of the neighbor-spin orientations.  A
rectangular RF pulse addressed to one (k, mu, nu) triple therefore acts
selectively on the basis pairs whose neighbor pattern matches.

All frequencies are plain reals in a single angular-frequency unit
(2*pi*MHz in the reference parameter set); only ratios matter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class SpinSystem:
    """Open chain of ``n_spins`` spins with Ising couplings J and Jp."""

    n_spins: int
    larmor: tuple[float, ...]
    coupling_j: float
    coupling_jp: float

    def __post_init__(self):
        object.__setattr__(self, "larmor", tuple(float(w) for w in self.larmor))
        if self.n_spins < 3:
            raise ValueError(f"n_spins must be >= 3, got {self.n_spins}")
        if len(self.larmor) != self.n_spins:
            raise ValueError(
                f"expected {self.n_spins} Larmor frequencies, got {len(self.larmor)}"
            )
        if any(w <= 0 for w in self.larmor):
            raise ValueError("Larmor frequencies must be positive")
        if len(set(self.larmor)) != self.n_spins:
            raise ValueError("Larmor frequencies must be pairwise distinct")
        j, jp = self.coupling_j, self.coupling_jp
        if not (j > 0 and jp > 0 and jp < j):
            raise ValueError("couplings must satisfy 0 < Jp < J")
        gap = min(
            abs(a - b) for a, b in itertools.combinations(self.larmor, 2)
        )
        if gap <= 2 * j + 2 * jp:
            raise ValueError(
                "Larmor spacing must exceed 2J + 2Jp to keep qubit "
                f"transition manifolds separated (gap {gap}, need > {2*j + 2*jp})"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    def min_larmor_gap(self) -> float:
        return min(abs(a - b) for a, b in itertools.combinations(self.larmor, 2))


@dataclass(frozen=True)
class BasisState:
    """Computational basis state, bit k of ``index`` is the orientation a_k."""

    index: int

    def bit(self, k: int) -> int:
        return (self.index >> k) & 1


@dataclass(frozen=True)
class TransitionLabel:
    """A conditional transition of ``qubit``: frequency w_k + mu*J + nu*Jp."""

    qubit: int
    mu: int
    nu: int


def first_neighbors(n_spins: int, qubit: int) -> tuple[int, ...]:
    return tuple(j for j in (qubit - 1, qubit + 1) if 0 <= j < n_spins)


def second_neighbors(n_spins: int, qubit: int) -> tuple[int, ...]:
    return tuple(j for j in (qubit - 2, qubit + 2) if 0 <= j < n_spins)


def _check_index(system: SpinSystem, state: BasisState) -> None:
    if not 0 <= state.index < system.dim:
        raise ValueError(
            f"basis index {state.index} out of range for {system.n_spins} spins"
        )


def diagonal_energy(system: SpinSystem, state: BasisState) -> float:
    """Diagonal energy E/hbar of a basis state (sums over existing neighbors)."""
    _check_index(system, state)
    n = system.n_spins
    iz = [0.5 * (-1) ** state.bit(k) for k in range(n)]
    e = -sum(w * z for w, z in zip(system.larmor, iz))
    e -= 2 * system.coupling_j * sum(iz[k] * iz[k + 1] for k in range(n - 1))
    e -= 2 * system.coupling_jp * sum(iz[k] * iz[k + 2] for k in range(n - 2))
    return e


def validate_label(system: SpinSystem, label: TransitionLabel) -> None:
    """Raise if (mu, nu) cannot arise from any neighbor configuration."""
    if not 0 <= label.qubit < system.n_spins:
        raise ValueError(f"qubit {label.qubit} out of range")
    for name, val, count in (
        ("mu", label.mu, len(first_neighbors(system.n_spins, label.qubit))),
        ("nu", label.nu, len(second_neighbors(system.n_spins, label.qubit))),
    ):
        if abs(val) > count or (val - count) % 2 != 0:
            raise ValueError(
                f"{name}={val} invalid for qubit {label.qubit} "
                f"({count} neighbors: parity and range must match)"
            )


def transition_frequency(system: SpinSystem, label: TransitionLabel) -> float:
    """Frequency w_k + mu*J + nu*Jp of a conditional transition."""
    validate_label(system, label)
    return (
        system.larmor[label.qubit]
        + label.mu * system.coupling_j
        + label.nu * system.coupling_jp
    )


def transition_context(system: SpinSystem, state: BasisState, qubit: int) -> TransitionLabel:
    """The (mu, nu) context selecting the transition of ``qubit`` in ``state``.

    mu (nu) is the sum of (-1)^{a_j} over the existing first (second)
    neighbors j; it is the same for both members of the basis pair that
    differs only in ``qubit``.
    """
    _check_index(system, state)
    if not 0 <= qubit < system.n_spins:
        raise ValueError(f"qubit {qubit} out of range")
    mu = sum((-1) ** state.bit(j) for j in first_neighbors(system.n_spins, qubit))
    nu = sum((-1) ** state.bit(j) for j in second_neighbors(system.n_spins, qubit))
    return TransitionLabel(qubit, mu, nu)


@lru_cache(maxsize=None)
def _context_values(count: int) -> tuple[int, ...]:
    # possible signed sums of `count` neighbor orientations, descending
    sums = {sum(s) for s in itertools.product((1, -1), repeat=count)} or {0}
    return tuple(sorted(sums, reverse=True))


def valid_contexts(system: SpinSystem, qubit: int) -> list[TransitionLabel]:
    """All physically realizable (mu, nu) labels of ``qubit``, mu then nu descending."""
    if not 0 <= qubit < system.n_spins:
        raise ValueError(f"qubit {qubit} out of range")
    mus = _context_values(len(first_neighbors(system.n_spins, qubit)))
    nus = _context_values(len(second_neighbors(system.n_spins, qubit)))
    return [TransitionLabel(qubit, mu, nu) for mu in mus for nu in nus]


def validate_spectrum(
    system: SpinSystem, tolerance: float | None = None
) -> list[tuple[TransitionLabel, TransitionLabel]]:
    """Cross-qubit transition pairs closer in frequency than ``tolerance``.

    An empty list means every RF carrier addresses a unique qubit manifold.
    Same-qubit pairs are the intended conditional-transition manifold and are
    never reported.  Default tolerance is 2*Jp, the smallest detuning the
    pulse-level error suppression has to resolve.
    """
    if tolerance is None:
        tolerance = 2 * system.coupling_jp
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    labels = [
        lab for k in range(system.n_spins) for lab in valid_contexts(system, k)
    ]
    freqs = [transition_frequency(system, lab) for lab in labels]
    collisions = []
    for (la, fa), (lb, fb) in itertools.combinations(zip(labels, freqs), 2):
        if la.qubit != lb.qubit and abs(fa - fb) < tolerance:
            collisions.append((la, lb))
    return collisions
