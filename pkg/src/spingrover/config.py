"""YAML run configuration with field-level diagnostics and reference defaults."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .engines import EngineKind
from .noise_model import CHANNELS, MODES, NoiseSpec
from .pulse_kernel import rabi_for_2pik
from .spin_model import SpinSystem


class ConfigError(ValueError):
    """Configuration problem, carrying the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


DEFAULT_LARMOR = {4: (50.0, 200.0, 350.0, 500.0), 5: (50.0, 200.0, 350.0, 500.0, 650.0)}

_ANGLES = {"pi": math.pi, "pi/2": math.pi / 2, "2pi": 2 * math.pi}


@dataclass
class RunConfig:
    system: SpinSystem
    rabi: float
    target: int
    engine: EngineKind
    noise: NoiseSpec
    n_rep: int = 100
    amplitudes: tuple[float, ...] = ()
    reference_mode: str = "noiseless_pulses"
    trace_reference_mode: str = "resonant_only"
    p_groups: int = 10
    trace_path: str | None = "trace.csv"
    sweep_path: str | None = "sweep.csv"
    fit_path: str | None = "fit.csv"
    plot_script_path: str | None = None
    trace: bool = True
    fit_model: str = "exp_gauss"
    threads: int | None = None


def _get(block: dict, path: str, key: str, default, types, choices=None):
    value = block.get(key, default)
    if value is None and default is None:
        return None
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        raise ConfigError(f"{path}.{key}", f"expected {getattr(types, '__name__', types)}, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(f"{path}.{key}", f"must be one of {choices}, got {value!r}")
    return value


def _angle(value, path):
    if isinstance(value, str):
        if value not in _ANGLES:
            raise ConfigError(path, f"unknown angle {value!r}; use a number or {sorted(_ANGLES)}")
        return _ANGLES[value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(path, f"expected an angle, got {value!r}")


def _block(raw: dict, key: str) -> dict:
    block = raw.get(key, {})
    if block is None:
        block = {}
    if not isinstance(block, dict):
        raise ConfigError(key, f"expected a mapping, got {block!r}")
    return block


def parse_config(raw: dict) -> RunConfig:
    """Build a RunConfig from parsed YAML, raising ConfigError with a field path."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")

    sysb = _block(raw, "system")
    n_spins = _get(sysb, "system", "n_spins", 4, int)
    larmor = sysb.get("larmor", DEFAULT_LARMOR.get(n_spins))
    if larmor is None:
        raise ConfigError("system.larmor", f"required for n_spins={n_spins}")
    if not isinstance(larmor, (list, tuple)) or not all(
        isinstance(w, (int, float)) and not isinstance(w, bool) for w in larmor
    ):
        raise ConfigError("system.larmor", f"expected a list of frequencies, got {larmor!r}")
    j = _get(sysb, "system", "coupling_j", 10.0, float)
    jp = _get(sysb, "system", "coupling_jp", 0.4, float)
    try:
        system = SpinSystem(n_spins=n_spins, larmor=tuple(larmor), coupling_j=j, coupling_jp=jp)
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from exc

    pulseb = _block(raw, "pulse")
    if "two_pi_k" in pulseb:
        tpk = pulseb["two_pi_k"]
        if not isinstance(tpk, dict):
            raise ConfigError("pulse.two_pi_k", "expected a mapping {detuning, k, angle}")
        det = _get(tpk, "pulse.two_pi_k", "detuning", 2 * jp, float)
        k = _get(tpk, "pulse.two_pi_k", "k", 4, int)
        ang = _angle(tpk.get("angle", "pi"), "pulse.two_pi_k.angle")
        try:
            rabi = rabi_for_2pik(det, k, ang)
        except ValueError as exc:
            raise ConfigError("pulse.two_pi_k", str(exc)) from exc
    else:
        rabi = _get(pulseb, "pulse", "rabi", 0.1008, float)
    if rabi <= 0:
        raise ConfigError("pulse.rabi", "must be positive")

    algob = _block(raw, "algorithm")
    target = _get(algob, "algorithm", "target", 0, int)

    engb = _block(raw, "engine")
    kind = _get(engb, "engine", "kind", "exact", str,
                choices=("exact", "near_resonant", "resonant_only"))
    cutoff = _get(engb, "engine", "cutoff", None, float)
    substeps = _get(engb, "engine", "substeps", 4, int)
    try:
        engine = EngineKind(kind=kind, cutoff=cutoff, substeps=substeps)
    except ValueError as exc:
        raise ConfigError("engine", str(exc)) from exc

    noiseb = _block(raw, "noise")
    channel = _get(noiseb, "noise", "channel", "larmor", str, choices=CHANNELS)
    mode = _get(noiseb, "noise", "mode", "static", str, choices=MODES)
    amplitude = _get(noiseb, "noise", "amplitude", 0.0, float)
    seed = _get(noiseb, "noise", "seed", 1, int)
    per_spin = _get(noiseb, "noise", "per_spin", True, bool)
    n_rep = _get(noiseb, "noise", "n_rep", 100, int)
    if n_rep < 1:
        raise ConfigError("noise.n_rep", "must be >= 1")
    grid = noiseb.get("amplitudes", ())
    if grid and (
        not isinstance(grid, (list, tuple))
        or not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in grid)
    ):
        raise ConfigError("noise.amplitudes", f"expected a list of amplitudes, got {grid!r}")
    try:
        noise = NoiseSpec(channel=channel, mode=mode, amplitude=amplitude,
                          seed=seed, per_spin=per_spin)
    except ValueError as exc:
        raise ConfigError("noise", str(exc)) from exc

    outb = _block(raw, "output")
    cfg = RunConfig(
        system=system,
        rabi=rabi,
        target=target,
        engine=engine,
        noise=noise,
        n_rep=n_rep,
        amplitudes=tuple(float(a) for a in grid),
        reference_mode=_get(outb, "output", "reference_mode", "noiseless_pulses", str,
                            choices=("noiseless_pulses", "resonant_only", "target_state")),
        trace_reference_mode=_get(outb, "output", "trace_reference_mode", "resonant_only", str,
                                  choices=("noiseless_pulses", "resonant_only", "target_state")),
        p_groups=_get(outb, "output", "p_groups", 10, int),
        trace_path=_get(outb, "output", "trace", "trace.csv", str),
        sweep_path=_get(outb, "output", "sweep", "sweep.csv", str),
        fit_path=_get(outb, "output", "fit", "fit.csv", str),
        plot_script_path=_get(outb, "output", "plot_script", None, str),
        fit_model=_get(outb, "output", "fit_model", "exp_gauss", str,
                       choices=("exp_gauss", "algebraic")),
        threads=_get(outb, "output", "threads", None, int),
    )
    return cfg


def load_config(path: str, overrides: list[str] | None = None) -> RunConfig:
    """Load YAML from ``path`` and apply ``key.path=value`` overrides."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(path, f"invalid YAML: {exc}") from exc
    raw = raw or {}
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        dotted, text = item.split("=", 1)
        keys = dotted.split(".")
        node = raw
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(dotted, "override path crosses a non-mapping value")
        node[keys[-1]] = yaml.safe_load(text)
    return parse_config(raw)
