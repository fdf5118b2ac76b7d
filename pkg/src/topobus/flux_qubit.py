"""Three-junction flux qubit used as an Aharonov-Casher interferometer.

Energies are in frequency units (h = 1, GHz by convention) so that the
tunneling amplitude ``h nu_a exp(-S)`` is simply ``nu_a exp(-S)``. Flux is in
units of the flux quantum, charges in units of ``e``.

With the potential written as
``U/E_J = -[cos p1 + cos p2 + r cos(2 pi f - p1 - p2)]`` the degenerate minima
at half a flux quantum sit on the diagonal, ``(p*, p*)`` and ``(-p*, -p*)``
with ``cos p* = E_J / (2 E_J2)``; a phase slip across junction 1 connects
``(p*, p*)`` to ``(2 pi - p*, -p*)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize

from . import _accel

_DEGENERACY_TOL = 1e-12


class NoDoubleWellError(ValueError):
    pass


class ReadoutError(ValueError):
    """The two parity hypotheses predict splittings that cannot be told apart."""


@dataclass(frozen=True)
class FluxQubitParameters:
    e_j: float = 1.0
    e_j2: float = 1.25
    e_c: float = 0.1
    flux: float = 0.5
    attempt_frequency: float = 1.0

    def __post_init__(self):
        if not self.e_j > 0:
            raise ValueError(f"e_j must be positive, got {self.e_j}")
        if not self.e_j2 > 0:
            raise ValueError(f"e_j2 must be positive, got {self.e_j2}")
        if not self.e_c > 0:
            raise ValueError(f"e_c must be positive, got {self.e_c}")
        if not self.attempt_frequency > 0:
            raise ValueError(f"attempt_frequency must be positive, got {self.attempt_frequency}")

    @property
    def ratio(self) -> float:
        return self.e_j2 / self.e_j

    @property
    def has_double_well(self) -> bool:
        return self.e_j2 > self.e_j / 2


@dataclass(frozen=True)
class ChargeConfiguration:
    n_p: int
    q_ext: float = 0.0

    def __post_init__(self):
        if self.n_p not in (0, 1):
            raise ValueError(f"n_p must be 0 or 1, got {self.n_p}")


class TunnelingResult(NamedTuple):
    delta0: float
    phi_star: float
    action: float


class Minima(NamedTuple):
    first: tuple[float, float]
    second: tuple[float, float]
    phi_star: float


def josephson_potential(phi1, phi2, p: FluxQubitParameters):
    """Josephson energy in units of E_J; accepts scalars or arrays."""
    a1 = np.asarray(phi1, dtype=float)
    a2 = np.asarray(phi2, dtype=float)
    a1, a2 = np.broadcast_arrays(a1, a2)
    out = _accel.josephson_points(a1, a2, p.ratio, p.flux).reshape(a1.shape)
    return float(out) if out.ndim == 0 else out


def potential_gradient(phi1: float, phi2: float, p: FluxQubitParameters) -> np.ndarray:
    s = math.sin(2 * math.pi * p.flux - phi1 - phi2)
    return np.array([math.sin(phi1) - p.ratio * s, math.sin(phi2) - p.ratio * s])


def potential_landscape(p: FluxQubitParameters, num: int = 101, span: tuple[float, float] = (-math.pi, math.pi)):
    """Raster of the potential on a square grid; returns (axis, axis, values)."""
    axis = np.linspace(span[0], span[1], num)
    return axis, axis, _accel.josephson_grid(axis, axis, p.ratio, p.flux)


def find_minima(p: FluxQubitParameters) -> Minima:
    if not p.has_double_well:
        raise NoDoubleWellError(
            f"E_J2/E_J = {p.ratio:.6g} <= 1/2: the potential has a single well, no qubit"
        )
    if abs(p.flux - 0.5) > _DEGENERACY_TOL:
        raise ValueError(
            f"flux = {p.flux} is off the degeneracy point 0.5; use potential_landscape/numerical_minima"
        )
    phi_star = math.acos(p.e_j / (2 * p.e_j2))
    first = (phi_star, phi_star)
    second = (-phi_star, -phi_star)
    for pt in (first, second):
        g = _numerical_gradient(pt, p)
        if np.max(np.abs(g)) > 1e-6:
            raise RuntimeError(f"closed-form minimum {pt} is not stationary (|grad| = {g})")
    return Minima(first, second, phi_star)


def _numerical_gradient(pt, p: FluxQubitParameters, h: float = 1e-6) -> np.ndarray:
    x, y = pt
    return np.array(
        [
            (josephson_potential(x + h, y, p) - josephson_potential(x - h, y, p)) / (2 * h),
            (josephson_potential(x, y + h, p) - josephson_potential(x, y - h, p)) / (2 * h),
        ]
    )


def numerical_minima(p: FluxQubitParameters, num: int = 201, tol: float = 1e-14) -> list[tuple[float, float, float]]:
    """Local minima in the fundamental cell from a raster plus BFGS polish.

    Returns ``(phi1, phi2, U/E_J)`` for each distinct minimum, sorted by phi1.
    Works at any flux.
    """
    axis, _, grid = potential_landscape(p, num)
    # periodic neighbourhood test on the raster (last row duplicates the first)
    core = grid[:-1, :-1]
    is_min = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= core <= np.roll(np.roll(core, di, 0), dj, 1)
    found: list[tuple[float, float, float]] = []
    for i, j in zip(*np.nonzero(is_min)):
        res = minimize(
            lambda x: josephson_potential(x[0], x[1], p),
            x0=[axis[i], axis[j]],
            jac=lambda x: potential_gradient(x[0], x[1], p),
            method="BFGS",
            options={"gtol": tol},
        )
        x = (res.x + math.pi) % (2 * math.pi) - math.pi
        if not any(abs(x[0] - f[0]) < 1e-6 and abs(x[1] - f[1]) < 1e-6 for f in found):
            found.append((float(x[0]), float(x[1]), float(res.fun)))
    return sorted(found)


def numerical_phi_star(p: FluxQubitParameters, num: int = 201) -> float:
    """|phi1| of the global minimum found by 2-D numerical minimization."""
    mins = numerical_minima(p, num)
    lowest = min(m[2] for m in mins)
    glob = [m for m in mins if m[2] - lowest < 1e-9]
    return float(np.mean([abs(m[0]) for m in glob]))


def phase_slip_path(p: FluxQubitParameters, num: int = 4001) -> tuple[np.ndarray, np.ndarray, float]:
    """Straight junction-1 phase-slip segment from (p*, p*) to (2 pi - p*, -p*)."""
    m = find_minima(p)
    start = np.array(m.first)
    end = np.array([2 * math.pi - m.phi_star, -m.phi_star])
    s = np.linspace(0.0, 1.0, num)
    pts = start[None, :] + s[:, None] * (end - start)[None, :]
    return pts[:, 0], pts[:, 1], float(np.linalg.norm(end - start))


def wkb_tunneling_amplitude(p: FluxQubitParameters, num: int = 4001) -> TunnelingResult:
    """WKB amplitude ``nu_a exp(-S)`` along the junction-1 phase slip.

    Phase mass is ``1/(8 E_c)`` per unit phase, giving
    ``S = sqrt(E_J / 4E_c) * integral sqrt(u - u_min) dl`` with ``u = U/E_J``
    and ``dl`` the Euclidean arc length in the (phi1, phi2) plane. The action
    is measured from the well bottom.
    """
    m = find_minima(p)
    p1, p2, length = phase_slip_path(p, num)
    u = _accel.josephson_points(p1, p2, p.ratio, p.flux)
    u_min = josephson_potential(*m.first, p)
    integrand = np.sqrt(np.clip(u - u_min, 0.0, None))
    s = np.linspace(0.0, length, num)
    action = math.sqrt(p.e_j / (4 * p.e_c)) * float(simpson(integrand, x=s))
    return TunnelingResult(p.attempt_frequency * math.exp(-action), m.phi_star, action)


def aharonov_casher_phase(c: ChargeConfiguration) -> float:
    return math.pi * (c.n_p + c.q_ext)


def flux_qubit_splitting(t: TunnelingResult, c: ChargeConfiguration) -> float:
    """Signed splitting ``Delta_0 cos(phi_AC / 2)``; the observable gap is its magnitude."""
    return t.delta0 * math.cos(aharonov_casher_phase(c) / 2)


def splitting_for_charge(t: TunnelingResult, total_charge: float) -> float:
    """Signed splitting for an arbitrary enclosed charge (units of e)."""
    return t.delta0 * math.cos(math.pi * total_charge / 2)


def parity_readout(measured_splitting: float, t: TunnelingResult, q_ext: float, noise_sigma: float = 0.0) -> int:
    """Parity bit whose predicted |splitting| is closest to ``measured_splitting``."""
    even = abs(flux_qubit_splitting(t, ChargeConfiguration(0, q_ext)))
    odd = abs(flux_qubit_splitting(t, ChargeConfiguration(1, q_ext)))
    sep = abs(even - odd)
    if sep <= 4 * noise_sigma or sep <= 1e-12 * max(t.delta0, 1e-300):
        raise ReadoutError(
            f"parity hypotheses separated by {sep:.3e}, need > 4*sigma = {4 * noise_sigma:.3e}"
        )
    m = abs(measured_splitting)
    return 0 if abs(m - even) <= abs(m - odd) else 1


def readout_is_degenerate(t: TunnelingResult, q_ext: float, noise_sigma: float = 0.0) -> bool:
    try:
        parity_readout(0.0, t, q_ext, noise_sigma)
    except ReadoutError:
        return True
    return False


def noisy_splitting(t: TunnelingResult, c: ChargeConfiguration, noise_sigma: float, rng: np.random.Generator) -> float:
    """Observed |splitting| with additive Gaussian readout noise."""
    return abs(flux_qubit_splitting(t, c)) + noise_sigma * float(rng.standard_normal())
