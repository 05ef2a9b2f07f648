"""Compilation of Grover search into a conditional-pulse program.

Layout: one ancilla qubit sits within coupling distance two of every data
qubit, so a single 2 pi pulse on the ancilla at a context-selective carrier
implements a conditional phase flip.  For four spins the chain reads
``xx.x`` (ancilla = 1); for five spins ``xx.xx`` (ancilla = 2, the only
position coupled to all four data qubits).

Gates:

* Hadamard on data qubit k: three pulse groups over all of k's valid
  contexts, in time order R(pi, pi) then R(pi/2, pi/2) then R(pi/2, pi).
  The 2x2 composite R(pi/2,pi) R(pi/2,pi/2) R(pi,pi) equals i H.
* Conditional reflection: one 2 pi ancilla pulse per valid ancilla context
  except the all-data-zero one; net ideal action -(1 - 2 P0).
* Oracle for a target pattern: a single 2 pi ancilla pulse at the target's
  context, which must determine the data pattern uniquely (mu != 0 and
  nu != 0); otherwise the oracle is ambiguous.

Time order of a Grover step is oracle first, then Hadamards, reflection,
Hadamards.  Data-qubit gates are emitted in ascending qubit order and
group pulses in (mu descending, nu descending) order; ideal action is
order-independent because the pairs are disjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .pulse_kernel import GateMarker, Pulse, PulseProgram, make_pulse
from .spin_model import BasisState, SpinSystem, transition_context, valid_contexts


class AmbiguousOracleError(ValueError):
    """The target's ancilla context does not identify the data pattern."""


@dataclass(frozen=True)
class RegisterLayout:
    """Data/ancilla assignment on the chain."""

    n_spins: int

    def __post_init__(self):
        if self.n_spins not in (4, 5):
            raise ValueError("supported register sizes are 4 and 5 spins")

    @property
    def ancilla(self) -> int:
        return 1 if self.n_spins == 4 else 2

    @property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n_spins) if k != self.ancilla)

    @property
    def n_data(self) -> int:
        return self.n_spins - 1

    def data_index(self, index: int) -> int:
        """Project a full-register basis index onto the data register."""
        out = 0
        for pos, k in enumerate(self.data_qubits):
            out |= ((index >> k) & 1) << pos
        return out


def grover_steps(search_space: int) -> int:
    """Optimal number of Grover iterations for a search space of size N."""
    if search_space < 2 or search_space & (search_space - 1):
        raise ValueError(f"search space size {search_space} is not a power of two >= 2")
    return round(math.pi * math.sqrt(search_space) / 4 - 0.5)


# time order of the Hadamard groups: the operator product
# R(pi/2,pi) R(pi/2,pi/2) R(pi,pi) applies its rightmost factor first
_HADAMARD_GROUPS = ((math.pi, math.pi), (math.pi / 2, math.pi / 2), (math.pi / 2, math.pi))


def compile_hadamard(
    system: SpinSystem, layout: RegisterLayout, qubit: int, rabi: float
) -> list[Pulse]:
    """Hadamard (up to a global phase i) on one data qubit."""
    if qubit == layout.ancilla:
        raise ValueError(f"qubit {qubit} is the ancilla")
    if qubit not in layout.data_qubits:
        raise ValueError(f"qubit {qubit} is not a data qubit")
    return [
        make_pulse(system, label, phase, angle, rabi)
        for phase, angle in _HADAMARD_GROUPS
        for label in valid_contexts(system, qubit)
    ]


def compile_s0(system: SpinSystem, layout: RegisterLayout, rabi: float) -> list[Pulse]:
    """Conditional reflection: sign flip of everything but the data-zero states."""
    anc = layout.ancilla
    zero_context = transition_context(system, BasisState(0), anc)
    return [
        make_pulse(system, label, 0.0, 2 * math.pi, rabi)
        for label in valid_contexts(system, anc)
        if (label.mu, label.nu) != (zero_context.mu, zero_context.nu)
    ]


def compile_oracle(
    system: SpinSystem, layout: RegisterLayout, target: BasisState, rabi: float
) -> list[Pulse]:
    """Single 2 pi ancilla pulse flipping the sign of the target data pattern."""
    anc = layout.ancilla
    if target.bit(anc):
        raise ValueError("target must have the ancilla bit clear")
    label = transition_context(system, target, anc)
    if label.mu == 0 or label.nu == 0:
        raise AmbiguousOracleError(
            f"context (mu={label.mu}, nu={label.nu}) of target {target.index} "
            "matches more than one data pattern"
        )
    return [make_pulse(system, label, 0.0, 2 * math.pi, rabi)]


def compile_grover(
    system: SpinSystem, layout: RegisterLayout, target: BasisState, rabi: float
) -> PulseProgram:
    """Initial superposition plus the optimal number of Grover steps."""
    pulses: list[Pulse] = []
    markers: list[GateMarker] = []

    def emit(batch: list[Pulse], label: str) -> None:
        markers.append(GateMarker(len(pulses), len(pulses) + len(batch), label))
        pulses.extend(batch)

    def hadamards() -> None:
        for k in layout.data_qubits:
            emit(compile_hadamard(system, layout, k, rabi), f"hadamard({k})")

    oracle = compile_oracle(system, layout, target, rabi)
    hadamards()
    for _ in range(grover_steps(2**layout.n_data)):
        emit(oracle, f"oracle({target.index})")
        hadamards()
        emit(compile_s0(system, layout, rabi), "conditional_reflection")
        hadamards()
    return PulseProgram(pulses=pulses, markers=markers)
