"""Rectangular RF pulses and their two-level propagators.

A pulse is a rectangular RF drive at carrier frequency w with phase phi,
Rabi frequency Omega and duration tau, addressed to one conditional
transition (k, mu, nu).  On the two-level subspace it drives, the exact
propagator in the frame rotating at the carrier is

    U = diag(e^{i D tau/2}, e^{-i D tau/2}) *
        [[cos(Oe tau/2) - i (D/Oe) sin(Oe tau/2),  i (O/Oe) e^{i phi}  sin(Oe tau/2)],
         [i (O/Oe) e^{-i phi} sin(Oe tau/2),       cos(Oe tau/2) + i (D/Oe) sin(Oe tau/2)]]

with detuning D and effective Rabi frequency Oe = sqrt(O^2 + D^2).  On
resonance (D = 0) this reduces to the rotation

    R(phi, theta) = [[cos(theta/2), i e^{i phi} sin(theta/2)],
                     [i e^{-i phi} sin(theta/2), cos(theta/2)]],  theta = O tau.

Basis convention for the 2x2 blocks: (ground, excited) of the addressed
qubit, i.e. amplitude with a_k = 0 first.

Selecting O so that Oe*tau = 2 pi k makes a near-resonant unwanted
transition complete exactly k full Rabi cycles during the pulse, returning
zero transition amplitude (the "2 pi k" suppression used throughout).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .spin_model import TransitionLabel


def resonant_rotation(phase: float, angle: float) -> np.ndarray:
    """Exact on-resonance rotation R(phase, angle)."""
    c = math.cos(angle / 2)
    s = math.sin(angle / 2)
    return np.array(
        [
            [c, 1j * np.exp(1j * phase) * s],
            [1j * np.exp(-1j * phase) * s, c],
        ],
        dtype=np.complex128,
    )


def detuned_block(phase: float, rabi: float, detuning: float, duration: float) -> np.ndarray:
    """Exact two-level propagator of a rectangular pulse at finite detuning."""
    if rabi <= 0:
        raise ValueError("rabi must be positive")
    if duration <= 0:
        raise ValueError("duration must be positive")
    oe = math.hypot(rabi, detuning)
    half = oe * duration / 2
    c, s = math.cos(half), math.sin(half)
    rab = np.array(
        [
            [c - 1j * (detuning / oe) * s, 1j * (rabi / oe) * np.exp(1j * phase) * s],
            [1j * (rabi / oe) * np.exp(-1j * phase) * s, c + 1j * (detuning / oe) * s],
        ],
        dtype=np.complex128,
    )
    ph = detuning * duration / 2
    return np.diag([np.exp(1j * ph), np.exp(-1j * ph)]) @ rab


def rabi_for_2pik(detuning: float, k: int, angle: float) -> float:
    """Rabi frequency suppressing a transition at ``detuning`` for an ``angle`` pulse.

    Solves Oe * tau = 2 pi k with tau = angle / Omega, i.e.
    Omega = detuning / sqrt((2 pi k / angle)^2 - 1).
    """
    if detuning == 0:
        raise ValueError("detuning must be nonzero")
    if k < 1:
        raise ValueError("k must be a positive integer")
    ratio = 2 * math.pi * k / angle
    if ratio <= 1:
        raise ValueError(
            f"no solution: 2 pi k = {2 * math.pi * k:g} must exceed angle {angle:g}"
        )
    return abs(detuning) / math.sqrt(ratio**2 - 1)


def pulse_duration(angle: float, rabi: float) -> float:
    """Duration of a rotation by ``angle`` at Rabi frequency ``rabi``."""
    if rabi <= 0:
        raise ValueError("rabi must be positive")
    return angle / rabi


def phase_time_unit(rabi: float) -> float:
    """The trace time unit: duration of a pi/2 pulse, pi / (2 Omega)."""
    return pulse_duration(math.pi / 2, rabi)


@dataclass(frozen=True)
class Pulse:
    """One rectangular RF pulse addressed to a conditional transition."""

    target: TransitionLabel
    phase: float
    angle: float
    rabi: float
    carrier: float
    duration: float

    def __post_init__(self):
        if self.angle <= 0:
            raise ValueError("angle must be positive")
        if self.rabi <= 0:
            raise ValueError("rabi must be positive")
        if self.carrier <= 0:
            raise ValueError("carrier must be positive")
        if abs(self.duration * self.rabi - self.angle) > 1e-9 * max(1.0, self.angle):
            raise ValueError("duration * rabi must equal angle")


def make_pulse(system, label: TransitionLabel, phase: float, angle: float, rabi: float) -> Pulse:
    """Pulse resonant with ``label`` in the (nominal) ``system``."""
    from .spin_model import transition_frequency

    return Pulse(
        target=label,
        phase=phase,
        angle=angle,
        rabi=rabi,
        carrier=transition_frequency(system, label),
        duration=pulse_duration(angle, rabi),
    )


@dataclass(frozen=True)
class GateMarker:
    """Annotation of a contiguous pulse range as one logical gate."""

    start: int  # first pulse index, inclusive
    stop: int   # last pulse index, exclusive
    label: str  # "hadamard(k)", "oracle(t)", "conditional_reflection", "other"


@dataclass
class PulseProgram:
    """Ordered pulse sequence with gate-boundary markers covering every pulse."""

    pulses: list[Pulse]
    markers: list[GateMarker] = field(default_factory=list)

    def __post_init__(self):
        pos = 0
        for m in self.markers:
            if m.start != pos or m.stop <= m.start:
                raise ValueError("markers must be disjoint, ordered and gap-free")
            pos = m.stop
        if self.markers and pos != len(self.pulses):
            raise ValueError("markers must cover every pulse exactly once")

    def __len__(self) -> int:
        return len(self.pulses)

    def gate_labels(self) -> list[str]:
        """Per-pulse gate label, aligned with ``pulses``."""
        labels = ["other"] * len(self.pulses)
        for m in self.markers:
            for i in range(m.start, m.stop):
                labels[i] = m.label
        return labels

    def dump(self) -> str:
        """Deterministic line-oriented text table of the program."""
        out = io.StringIO()
        out.write("# index k mu nu phase angle rabi carrier duration gate\n")
        for i, (p, g) in enumerate(zip(self.pulses, self.gate_labels())):
            out.write(
                f"{i} {p.target.qubit} {p.target.mu} {p.target.nu} "
                f"{p.phase:.10g} {p.angle:.10g} {p.rabi:.10g} "
                f"{p.carrier:.10g} {p.duration:.10g} {g}\n"
            )
        out.write("# markers\n")
        for m in self.markers:
            out.write(f"# [{m.start},{m.stop}) {m.label}\n")
        return out.getvalue()
