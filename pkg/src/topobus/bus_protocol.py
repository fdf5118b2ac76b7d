"""Device-level protocols: flux-qubit interferometers measuring joint parity.

The default layout has four logical qubits, two topological (T1, T2) and two
conventional double-dot qubits (C1, C2), and three interferometers:

    flux 1: (T1, C1)   topological-conventional
    flux 2: (T1, T2)   topological-topological
    flux 3: (C1, C2)   conventional-conventional

Teleportation from ``source`` to ``target`` uses an ancilla joined to the
source by one interferometer and to the target by another: the second one
prepares the resource singlet, the first performs the Bell measurement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cache

import numpy as np

from . import qsim
from .flux_qubit import (
    FluxQubitParameters,
    TunnelingResult,
    readout_is_degenerate,
    splitting_for_charge,
    wkb_tunneling_amplitude,
)
from .qsim import BellOutcome, Parity, ParityOutcome, StateVector

DEGENERACY_FLUX = 0.5
DETUNED_FLUX = 0.45


class DecoupledError(RuntimeError):
    pass


class QubitKind(str, Enum):
    TOPOLOGICAL = "topological"
    CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class Interferometer:
    flux_id: int
    pair: tuple[int, int]
    params: FluxQubitParameters = field(default_factory=FluxQubitParameters)
    coupled: bool = True


@dataclass(frozen=True)
class DeviceLayout:
    qubits: tuple[QubitKind, ...]
    interferometers: tuple[Interferometer, ...]

    def __post_init__(self):
        ids = [f.flux_id for f in self.interferometers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate flux ids: {ids}")
        for f in self.interferometers:
            i, j = f.pair
            if i == j or not (0 <= i < len(self.qubits) and 0 <= j < len(self.qubits)):
                raise ValueError(f"interferometer {f.flux_id} has invalid pair {f.pair}")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def interferometer(self, flux_id: int) -> Interferometer:
        for f in self.interferometers:
            if f.flux_id == flux_id:
                return f
        raise KeyError(f"unknown flux id {flux_id}; known: {[f.flux_id for f in self.interferometers]}")

    def between(self, a: int, b: int) -> Interferometer | None:
        for f in self.interferometers:
            if set(f.pair) == {a, b}:
                return f
        return None

    def to_dict(self) -> dict:
        return {
            "qubits": [k.value for k in self.qubits],
            "interferometers": [
                {
                    "flux_id": f.flux_id,
                    "pair": list(f.pair),
                    "coupled": f.coupled,
                    "params": {
                        "e_j": f.params.e_j,
                        "e_j2": f.params.e_j2,
                        "e_c": f.params.e_c,
                        "flux": f.params.flux,
                        "attempt_frequency": f.params.attempt_frequency,
                    },
                }
                for f in self.interferometers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceLayout":
        return cls(
            tuple(QubitKind(k) for k in d["qubits"]),
            tuple(
                Interferometer(f["flux_id"], tuple(f["pair"]), FluxQubitParameters(**f["params"]), f["coupled"])
                for f in d["interferometers"]
            ),
        )


T1, C1, T2, C2 = 0, 1, 2, 3


def default_layout(params: FluxQubitParameters | None = None) -> DeviceLayout:
    params = params or FluxQubitParameters()
    params = replace(params, flux=DEGENERACY_FLUX)
    kinds = (QubitKind.TOPOLOGICAL, QubitKind.CONVENTIONAL, QubitKind.TOPOLOGICAL, QubitKind.CONVENTIONAL)
    return DeviceLayout(
        kinds,
        (
            Interferometer(1, (T1, C1), params),
            Interferometer(2, (T1, T2), params),
            Interferometer(3, (C1, C2), params),
        ),
    )


def set_coupling(d: DeviceLayout, flux_id: int, coupled: bool, detuned_flux: float = DETUNED_FLUX) -> DeviceLayout:
    f = d.interferometer(flux_id)
    flux = DEGENERACY_FLUX if coupled else detuned_flux
    new = replace(f, params=replace(f.params, flux=flux), coupled=coupled)
    return replace(d, interferometers=tuple(new if g.flux_id == flux_id else g for g in d.interferometers))


@dataclass
class TraceStep:
    op: str
    flux_id: int | None = None
    pair: tuple[int, ...] | None = None
    outcome: str | int | None = None
    probability: float | None = None
    splitting: float | None = None
    correction: str | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "flux_id": self.flux_id,
            "pair": list(self.pair) if self.pair is not None else None,
            "outcome": self.outcome,
            "probability": self.probability,
            "splitting": self.splitting,
            "correction": self.correction,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceStep":
        pair = tuple(d["pair"]) if d.get("pair") is not None else None
        return cls(d["op"], d.get("flux_id"), pair, d.get("outcome"), d.get("probability"),
                   d.get("splitting"), d.get("correction"), list(d.get("flags", [])))


def _state_to_json(s: StateVector | None):
    if s is None:
        return None
    return [[float(a.real), float(a.imag)] for a in s.amplitudes]


def _state_from_json(v) -> StateVector | None:
    if v is None:
        return None
    return StateVector(np.array([complex(re, im) for re, im in v]))


@dataclass
class ProtocolTrace:
    layout: DeviceLayout
    seed: int | None
    steps: list[TraceStep] = field(default_factory=list)
    final_state: StateVector | None = None
    fidelity: float | None = None

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "seed": self.seed,
            "steps": [s.to_dict() for s in self.steps],
            "final_state": _state_to_json(self.final_state),
            "fidelity": self.fidelity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolTrace":
        return cls(
            DeviceLayout.from_dict(d["layout"]),
            d["seed"],
            [TraceStep.from_dict(s) for s in d["steps"]],
            _state_from_json(d["final_state"]),
            d["fidelity"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ProtocolTrace":
        return cls.from_dict(json.loads(text))


@cache
def _tunneling(params: FluxQubitParameters) -> TunnelingResult:
    return wkb_tunneling_amplitude(params)


def _coupled(d: DeviceLayout, flux_id: int) -> Interferometer:
    f = d.interferometer(flux_id)
    if not f.coupled:
        raise DecoupledError(f"interferometer {flux_id} decoupled (flux detuned to {f.params.flux})")
    return f


def predicted_splitting(params: FluxQubitParameters, parity: int, q_ext: float = 0.0) -> float:
    """|Delta| seen by a coupled interferometer for a given joint parity bit."""
    return abs(splitting_for_charge(_tunneling(replace(params, flux=DEGENERACY_FLUX)), parity + q_ext))


def measure_joint_parity(
    d: DeviceLayout,
    flux_id: int,
    s: StateVector,
    q_ext: float = 0.0,
    rng_seed=None,
    force: int | None = None,
) -> tuple[ParityOutcome, float, TraceStep]:
    f = _coupled(d, flux_id)
    if s.num_qubits != d.num_qubits:
        raise ValueError(f"state has {s.num_qubits} qubits, layout has {d.num_qubits}")
    outcome = qsim.sample_parity_measurement(s, *f.pair, rng_seed, force)
    splitting = predicted_splitting(f.params, int(outcome.parity), q_ext)
    step = TraceStep("parity", flux_id, f.pair, str(outcome.parity), outcome.probability, splitting)
    if readout_is_degenerate(_tunneling(f.params), q_ext):
        step.flags.append("readout degenerate")
    return outcome, splitting, step


def bell_measurement_via_device(
    d: DeviceLayout, flux_id: int, s: StateVector, rng_seed=None, force: int | None = None
) -> tuple[BellOutcome, list[TraceStep]]:
    """Parity, H x H, parity, H x H on the interferometer's pair."""
    f = _coupled(d, flux_id)
    i, j = f.pair
    rng = qsim.make_rng(rng_seed) if force is None else None
    forced = (None, None)
    if force is not None:
        forced = next(k for k, v in qsim.BELL_TABLE.items() if v == force)
    first, _, step1 = measure_joint_parity(d, flux_id, s, rng_seed=rng, force=forced[0])
    rotated = qsim.apply_hadamard(qsim.apply_hadamard(first.post_state, i), j)
    second, _, step3 = measure_joint_parity(d, flux_id, rotated, rng_seed=rng, force=forced[1])
    post = qsim.apply_hadamard(qsim.apply_hadamard(second.post_state, i), j)
    key = (first.parity, second.parity)
    steps = [
        step1,
        TraceStep("hadamard_pair", flux_id, f.pair),
        step3,
        TraceStep("hadamard_pair", flux_id, f.pair),
    ]
    mu = qsim.BELL_TABLE[key]
    steps[-1].outcome = mu
    return BellOutcome(mu, key, first.probability * second.probability, post), steps


def _single(pair) -> tuple[complex, complex]:
    a, b = pair
    return complex(a), complex(b)


def entangle_pair(
    d: DeviceLayout,
    flux_id: int,
    psi_t: tuple[complex, complex],
    psi_c: tuple[complex, complex],
    rng_seed=None,
    q_ext: float = 0.0,
    force: int | None = None,
) -> tuple[ProtocolTrace, StateVector]:
    """One joint-parity measurement on product inputs; returns the pair's post-state."""
    f = d.interferometer(flux_id)
    i, j = f.pair
    kinds = {d.qubits[i], d.qubits[j]}
    if kinds != {QubitKind.TOPOLOGICAL, QubitKind.CONVENTIONAL}:
        raise ValueError(f"interferometer {flux_id} does not couple a topological-conventional pair")
    t_idx, c_idx = (i, j) if d.qubits[i] is QubitKind.TOPOLOGICAL else (j, i)
    amps = [(1.0, 0.0)] * d.num_qubits
    amps[t_idx] = _single(psi_t)
    amps[c_idx] = _single(psi_c)
    s = qsim.init_product_state(amps)
    trace = ProtocolTrace(d, rng_seed if isinstance(rng_seed, int) else None)
    trace.steps.append(TraceStep("prepare", pair=(t_idx, c_idx)))
    outcome, _, step = measure_joint_parity(d, flux_id, s, q_ext, qsim.make_rng(rng_seed, 0) if force is None else None, force)
    trace.steps.append(step)
    pair_state = qsim.reduced_pure_state(outcome.post_state, [t_idx, c_idx])
    trace.final_state = pair_state
    trace.steps.append(TraceStep("concurrence", pair=(t_idx, c_idx), outcome=qsim.concurrence(pair_state)))
    return trace, pair_state


@cache
def pauli_correction_table() -> dict[int, int]:
    """Bell outcome -> Pauli index restoring the input on the target.

    Derived by brute force on a 3-qubit register (source 0, ancilla 1,
    target 2) with the singlet on (ancilla, target): every forced branch,
    every candidate correction, a set of probe inputs.
    """
    probes = [(1, 0), (0, 1), (2**-0.5, 2**-0.5), (2**-0.5, 1j * 2**-0.5), (0.6, 0.8j)]
    table = {}
    for mu in range(4):
        for nu in range(4):
            ok = True
            for a, b in probes:
                s = _inject(a, b)
                out = qsim.bell_measurement(s, 0, 1, force=mu).post_state
                out = qsim.apply_pauli(out, 2, nu)
                got = qsim.reduced_pure_state(out, [2])
                if qsim.fidelity(got, StateVector(np.array([a, b]))) < 1 - 1e-12:
                    ok = False
                    break
            if ok:
                table[mu] = nu
                break
        else:
            raise RuntimeError(f"no Pauli correction restores branch {mu}")
    return table


def _inject(a: complex, b: complex) -> StateVector:
    src = np.array([a, b], dtype=complex)
    pair = qsim.bell_state(0).amplitudes  # index = ancilla + 2*target
    return StateVector(np.kron(pair, src))


def find_ancilla(d: DeviceLayout, source: int, target: int) -> tuple[int, Interferometer, Interferometer]:
    for a in range(d.num_qubits):
        if a in (source, target):
            continue
        bell_f, res_f = d.between(source, a), d.between(a, target)
        if bell_f is not None and res_f is not None:
            return a, bell_f, res_f
    raise ValueError(f"no ancilla connects qubit {source} to qubit {target} in this layout")


def prepare_resource(
    d: DeviceLayout, flux_id: int, s: StateVector, ancilla: int, target: int, rng_seed=None, force: int | None = None
) -> tuple[StateVector, list[TraceStep]]:
    """Singlet on (ancilla, target) from |0>|0> via H x H and one parity measurement."""
    steps = []
    s = qsim.apply_hadamard(qsim.apply_hadamard(s, ancilla), target)
    steps.append(TraceStep("hadamard_pair", flux_id, (ancilla, target)))
    outcome, _, step = measure_joint_parity(d, flux_id, s, rng_seed=rng_seed, force=force)
    steps.append(step)
    s = outcome.post_state
    # even -> (|00>+|11>)/sqrt2: X on target gives the odd triplet
    if outcome.parity is Parity.EVEN:
        s = qsim.apply_pauli(s, target, 1)
        steps.append(TraceStep("fixup", pair=(target,), correction="X"))
    # (|01>+|10>)/sqrt2 -> Z on ancilla -> (|01>-|10>)/sqrt2
    s = qsim.apply_pauli(s, ancilla, 3)
    steps.append(TraceStep("fixup", pair=(ancilla,), correction="Z"))
    return s, steps


_PAULI_NAMES = ("I", "X", "Y", "Z")


def teleport(
    d: DeviceLayout,
    source: int,
    target: int,
    psi: tuple[complex, complex],
    rng_seed=None,
    resource: str = "measured",
    force_bell: int | None = None,
    force_resource: int | None = None,
) -> tuple[ProtocolTrace, StateVector]:
    """Teleport ``psi`` from ``source`` to ``target``; returns trace and target state."""
    if source == target:
        raise ValueError("source and target must differ")
    ancilla, bell_f, res_f = find_ancilla(d, source, target)
    a, b = _single(psi)
    amps = [(1.0, 0.0)] * d.num_qubits
    amps[source] = (a, b)
    trace = ProtocolTrace(d, rng_seed if isinstance(rng_seed, int) else None)
    trace.steps.append(TraceStep("prepare", pair=(source,)))
    if resource == "measured":
        _coupled(d, res_f.flux_id)
        s = qsim.init_product_state(amps)
        s, steps = prepare_resource(d, res_f.flux_id, s, ancilla, target,
                                    qsim.make_rng(rng_seed, 0) if force_resource is None else None, force_resource)
        trace.steps.extend(steps)
    elif resource == "injected":
        s = _inject_into(qsim.init_product_state(amps), ancilla, target)
        trace.steps.append(TraceStep("inject_resource", res_f.flux_id, (ancilla, target)))
    else:
        raise ValueError(f"resource must be 'measured' or 'injected', got {resource!r}")
    bell, steps = bell_measurement_via_device(
        d, bell_f.flux_id, s, qsim.make_rng(rng_seed, 1) if force_bell is None else None, force_bell
    )
    trace.steps.extend(steps)
    nu = pauli_correction_table()[bell.mu]
    out = qsim.apply_pauli(bell.post_state, target, nu)
    trace.steps.append(TraceStep("correction", pair=(target,), outcome=bell.mu, correction=_PAULI_NAMES[nu]))
    result = qsim.reduced_pure_state(out, [target])
    trace.final_state = result
    trace.fidelity = qsim.fidelity(result, StateVector(np.array([a, b])))
    return trace, result


def _inject_into(s: StateVector, ancilla: int, target: int) -> StateVector:
    """Replace |0>_ancilla |0>_target with the singlet (ancilla first)."""
    n = s.num_qubits
    idx = np.arange(2**n)
    touched = (((idx >> ancilla) & 1) | ((idx >> target) & 1)).astype(bool)
    if np.any(np.abs(s.amplitudes[touched]) > 0):
        raise ValueError("ancilla and target must start in |0>")
    base = idx[~touched]
    amp = np.zeros_like(s.amplitudes)
    # |singlet><00| on the pair; singlet index = ancilla bit + 2 * target bit
    for k, c in enumerate(qsim.bell_state(0).amplitudes):
        shift = ((k & 1) << ancilla) | (((k >> 1) & 1) << target)
        amp[base | shift] += c * s.amplitudes[base]
    return StateVector(amp)


def enumerate_teleport_branches(
    d: DeviceLayout, source: int, target: int, psi: tuple[complex, complex], resource: str = "measured"
) -> list[tuple[float, float]]:
    """(branch probability, fidelity) for every resource x Bell outcome branch."""
    out = []
    res_outcomes = (0, 1) if resource == "measured" else (None,)
    for r in res_outcomes:
        for mu in range(4):
            try:
                trace, _ = teleport(d, source, target, psi, resource=resource, force_bell=mu, force_resource=r)
            except qsim.ImpossibleOutcomeError:
                continue
            prob = 1.0
            for st in trace.steps:
                if st.op == "parity":
                    prob *= st.probability
            out.append((prob, trace.fidelity))
    return out


def bell_statistics(
    d: DeviceLayout, flux_id: int, s: StateVector, samples: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical Bell-outcome counts over seeded runs and the Born probabilities."""
    f = _coupled(d, flux_id)
    counts = np.zeros(4, dtype=int)
    for k in range(samples):
        bell, _ = bell_measurement_via_device(d, flux_id, s, qsim.make_rng(seed, k))
        counts[bell.mu] += 1
    born = np.array([qsim.project(s, qsim.bell_projector(mu, *f.pair, s.num_qubits))[0] for mu in range(4)])
    return counts, born
