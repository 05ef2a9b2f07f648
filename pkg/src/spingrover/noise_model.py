"""Gaussian detuning noise on the Larmor or Rabi frequencies.

Two channels:

* ``larmor``: w_k -> w_k + eps * xi, modeling fluctuations of the static
  field.  By default every spin draws its own xi (``per_spin=True``);
  with ``per_spin=False`` a single xi shifts all spins together.  Pulse
  carriers stay nominal, so the addressed transition of every pulse is
  detuned by -eps*xi of its qubit.
* ``rabi``: Omega -> Omega + eps * xi with the pulse duration unchanged,
  so the rotation angle becomes theta + eps*xi*tau.

Two modes: ``static`` draws once per repetition and holds it for the whole
program; ``random`` redraws for every pulse.

Sampling is counter-based (Philox keyed on (seed, repetition)), so the
draw seen by pulse j of repetition r is a pure function of
(seed, repetition, pulse index) independent of execution order or thread
count.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .pulse_kernel import Pulse
from .spin_model import SpinSystem

CHANNELS = ("larmor", "rabi")
MODES = ("static", "random")


class RejectedSampleError(ValueError):
    """A sampled Rabi frequency came out non-positive; the repetition is void."""


@dataclass(frozen=True)
class NoiseSpec:
    channel: str
    mode: str
    amplitude: float
    seed: int
    per_spin: bool = True  # larmor channel only

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")


@dataclass(frozen=True)
class NoiseRealization:
    """Standard-normal draws for one repetition.

    ``xi`` has shape (n_draws,) for the rabi channel or shared-larmor noise
    and (n_draws, n_spins) for per-spin larmor noise, with n_draws = 1
    (static) or n_pulses (random).
    """

    channel: str
    mode: str
    amplitude: float
    xi: np.ndarray

    @property
    def n_draws(self) -> int:
        return 1 if self.mode == "static" else self.xi.shape[0]

    def draw(self, pulse_index: int):
        """xi seen by one pulse: a scalar, or a per-spin vector."""
        row = self.xi[0] if self.mode == "static" else self.xi[pulse_index]
        return row


def sample_realization(
    spec: NoiseSpec, repetition: int, n_pulses: int, n_spins: int = 1
) -> NoiseRealization:
    """Deterministic realization for (spec.seed, repetition)."""
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    key = np.array([np.uint64(spec.seed & (2**64 - 1)), np.uint64(repetition)])
    rng = np.random.Generator(np.random.Philox(key=key))
    n_draws = 1 if spec.mode == "static" else n_pulses
    if spec.channel == "larmor" and spec.per_spin:
        xi = rng.standard_normal((n_draws, n_spins))
    else:
        xi = rng.standard_normal(n_draws)
    return NoiseRealization(
        channel=spec.channel, mode=spec.mode, amplitude=spec.amplitude, xi=xi
    )


def apply_larmor_noise(
    system: SpinSystem, realization: NoiseRealization, pulse_index: int
) -> SpinSystem:
    """System with detuned Larmor frequencies; couplings unchanged."""
    if realization.channel != "larmor":
        raise ValueError(f"expected larmor realization, got {realization.channel}")
    xi = realization.draw(pulse_index)
    shift = realization.amplitude * np.atleast_1d(xi)
    if shift.size == 1:
        shift = np.repeat(shift, system.n_spins)
    if np.all(shift == 0.0):
        return system
    return dataclasses.replace(
        system, larmor=tuple(w + s for w, s in zip(system.larmor, shift))
    )


def apply_rabi_noise(
    pulse: Pulse, realization: NoiseRealization, pulse_index: int
) -> Pulse:
    """Pulse with detuned Rabi frequency at unchanged duration."""
    if realization.channel != "rabi":
        raise ValueError(f"expected rabi realization, got {realization.channel}")
    xi = float(realization.draw(pulse_index))
    if xi == 0.0 or realization.amplitude == 0.0:
        return pulse
    rabi = pulse.rabi + realization.amplitude * xi
    if rabi <= 0:
        raise RejectedSampleError(
            f"sampled Rabi frequency {rabi:g} <= 0 (amplitude {realization.amplitude:g})"
        )
    # duration is the experimenter-set nominal; effective angle follows rabi
    return dataclasses.replace(pulse, rabi=rabi, angle=rabi * pulse.duration)
