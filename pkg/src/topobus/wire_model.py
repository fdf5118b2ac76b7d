"""Proximitized Rashba nanowire: BdG discretization, spectra and Majorana end modes.

Internal units: hbar = 1, energies in units of the hopping ``t`` and lengths
in units of the lattice spacing ``a`` when the wire is built with
``effective_mass=0.5`` and ``length == num_sites``. Physical inputs are
converted once by :meth:`WireParameters.from_physical`.

Basis per site is ``(c_up, c_dn, c_up^dag, c_dn^dag)``, interleaved so the
matrix is banded with upper bandwidth 7. Particle-hole conjugation acts as
``tau_x K`` on every site.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla
from scipy import constants
from scipy.stats import linregress

from . import _accel

# ratio (smallest |E|) / (next distinct |E|) below which end modes count as zero modes
ZERO_MODE_RATIO = 0.1

# hbar^2 / (2 m_e) in meV nm^2
_HBAR2_OVER_2ME = constants.hbar**2 / (2 * constants.m_e) / (constants.e * 1e-3) * 1e18
_BOHR_MAGNETON_MEV_PER_T = constants.physical_constants["Bohr magneton in eV/T"][0] * 1e3


class NotHermitianError(ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"matrix is not Hermitian: max |H - H^dag| = {deviation:.3e}")
        self.deviation = deviation


class TrivialPhaseError(ValueError):
    """Raised when no well-separated zero-energy pair exists."""

    def __init__(self, ratio: float):
        super().__init__(
            f"wire is not in the topological phase: splitting/gap ratio {ratio:.3e} >= {ZERO_MODE_RATIO}"
        )
        self.ratio = ratio


@dataclass(frozen=True)
class WireParameters:
    effective_mass: float = 0.5
    chemical_potential: float = 0.0
    rashba: float = 1.0
    zeeman: float = 1.0
    pairing: float = 0.5
    length: float = 200.0
    num_sites: int = 200

    def __post_init__(self):
        if int(self.num_sites) != self.num_sites or self.num_sites < 2:
            raise ValueError(f"num_sites must be an integer >= 2, got {self.num_sites}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.pairing < 0:
            raise ValueError(f"pairing must be non-negative, got {self.pairing}")
        if not self.effective_mass > 0:
            raise ValueError(f"effective_mass must be positive, got {self.effective_mass}")
        object.__setattr__(self, "num_sites", int(self.num_sites))

    @property
    def lattice_spacing(self) -> float:
        return self.length / self.num_sites

    @property
    def hopping(self) -> float:
        return 1.0 / (2.0 * self.effective_mass * self.lattice_spacing**2)

    @classmethod
    def from_physical(
        cls,
        effective_mass: float,
        chemical_potential_mev: float,
        rashba_mev_nm: float,
        zeeman_mev: float,
        pairing_mev: float,
        length_nm: float,
        num_sites: int,
    ) -> "WireParameters":
        """Convert physical inputs (m*/m_e, meV, meV nm, nm) to internal t = a = 1 units."""
        a = length_nm / num_sites
        t = _HBAR2_OVER_2ME / (effective_mass * a**2)
        return cls(
            effective_mass=0.5,
            chemical_potential=chemical_potential_mev / t,
            rashba=rashba_mev_nm / (t * a),
            zeeman=zeeman_mev / t,
            pairing=pairing_mev / t,
            length=float(num_sites),
            num_sites=num_sites,
        )


def physical_hopping_mev(effective_mass: float, lattice_spacing_nm: float) -> float:
    return _HBAR2_OVER_2ME / (effective_mass * lattice_spacing_nm**2)


def zeeman_splitting(g_factor: float, field_tesla: float) -> float:
    """Spin splitting ``g mu_B B / 2`` in meV for a field in tesla."""
    return g_factor * _BOHR_MAGNETON_MEV_PER_T * field_tesla / 2.0


def topological_phase_analytic(mu: float, pairing: float, zeeman: float) -> bool:
    if pairing < 0:
        raise ValueError("pairing must be non-negative")
    return zeeman**2 > mu**2 + pairing**2


def _band(p: WireParameters) -> np.ndarray:
    t = p.hopping
    return _accel.bdg_band(
        p.num_sites,
        t,
        2.0 * t - p.chemical_potential,
        p.rashba / (2.0 * p.lattice_spacing),
        p.zeeman,
        p.pairing,
    )


def build_bdg_hamiltonian(p: WireParameters) -> np.ndarray:
    """Dense 4N x 4N BdG matrix with open boundaries.

    The gauge chosen here makes every entry real, so the result is real
    symmetric (and therefore Hermitian).
    """
    if p.num_sites < 2:
        raise ValueError("num_sites must be >= 2")
    return _accel.band_to_dense(_band(p))


def particle_hole_conjugate(vectors: np.ndarray) -> np.ndarray:
    """Apply ``tau_x K`` site by site to a vector or to the columns of a matrix."""
    v = np.asarray(vectors)
    n = v.shape[0]
    perm = np.arange(n).reshape(-1, 4)[:, [2, 3, 0, 1]].ravel()
    return np.conj(v[perm])


def particle_hole_operator(num_sites: int) -> np.ndarray:
    """Unitary part of the particle-hole map (the antiunitary map is this times K)."""
    tx = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
    return np.kron(np.eye(num_sites), tx)


@dataclass(frozen=True)
class BdGSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    gap: float
    zero_mode_splitting: float
    zero_mode_ratio: float = field(default=math.inf)

    @property
    def has_zero_modes(self) -> bool:
        return self.zero_mode_ratio < ZERO_MODE_RATIO


def _summarize(abs_sorted: np.ndarray) -> tuple[float, float, float]:
    # |E| values come in particle-hole pairs, so [0] and [1] are partners
    split = float(abs_sorted[0])
    nxt = float(abs_sorted[2]) if abs_sorted.size > 2 else math.inf
    ratio = split / nxt if nxt > 0 else math.inf
    gap = nxt if ratio < ZERO_MODE_RATIO else split
    return split, gap, ratio


def diagonalize(H: np.ndarray, hermitian_tol: float = 1e-10) -> BdGSpectrum:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))))
    dev = float(np.max(np.abs(H - H.conj().T)))
    if dev > hermitian_tol * scale:
        raise NotHermitianError(dev)
    w, v = np.linalg.eigh(H)
    split, gap, ratio = _summarize(np.sort(np.abs(w)))
    return BdGSpectrum(w, v, gap, split, ratio)


def low_energy_spectrum(p: WireParameters, num_levels: int = 8) -> BdGSpectrum:
    """Eigenvalues closest to zero via the banded solver; no eigenvectors."""
    n = 4 * p.num_sites
    k = min(num_levels, n) // 2
    mid = n // 2
    w = sla.eig_banded(
        _band(p), eigvals_only=True, select="i", select_range=(mid - k, mid + k - 1), check_finite=False
    )
    split, gap, ratio = _summarize(np.sort(np.abs(w)))
    return BdGSpectrum(np.sort(w), None, gap, split, ratio)


@dataclass(frozen=True)
class MajoranaMode:
    site_weights: np.ndarray
    localization_end: str
    decay_length: float
    wavefunction: np.ndarray


def _site_weights(vec: np.ndarray) -> np.ndarray:
    w = (np.abs(vec) ** 2).reshape(-1, 4).sum(axis=1)
    return w / w.sum()


def _decay_length(weights: np.ndarray, from_left: bool, spacing: float) -> float:
    w = weights if from_left else weights[::-1]
    # tail sums smooth out Fermi-momentum oscillations; tail ~ exp(-2x/xi)
    tail = np.cumsum(w[::-1])[::-1]
    x = np.arange(w.size)
    sel = (tail < 1e-2) & (tail > 1e-10) & (x <= w.size // 2)
    if sel.sum() < 3:
        return math.inf
    fit = linregress(x[sel], np.log(tail[sel]))
    if fit.slope >= 0:
        return math.inf
    return -2.0 * spacing / fit.slope


def _to_real_coords(v: np.ndarray) -> np.ndarray:
    u = v.reshape(-1, 4)[:, :2]
    return np.concatenate([u.real.ravel(), u.imag.ravel()])


def _from_real_coords(x: np.ndarray, num_sites: int) -> np.ndarray:
    half = x.size // 2
    u = (x[:half] + 1j * x[half:]).reshape(num_sites, 2)
    return np.concatenate([u, u.conj()], axis=1).ravel()


def extract_majorana_modes(s: BdGSpectrum, p: WireParameters) -> tuple[MajoranaMode, MajoranaMode]:
    """Split the lowest particle-hole pair into left and right self-conjugate modes.

    Returned wavefunctions have unit norm, so the Dirac mode built from them is
    ``(gamma_1 + i gamma_2) / sqrt(2)`` with a canonical anticommutator.
    """
    if s.eigenvectors is None:
        raise ValueError("spectrum carries no eigenvectors; use diagonalize()")
    if not s.has_zero_modes:
        raise TrivialPhaseError(s.zero_mode_ratio)
    n_sites = p.num_sites
    idx = np.argsort(np.abs(s.eigenvalues))[:2]
    cands = []
    for k in idx:
        v = s.eigenvectors[:, k]
        cv = particle_hole_conjugate(v)
        cands.append(v + cv)
        cands.append(1j * (v - cv))
    # self-conjugate vectors <-> real coordinates (u_up, u_dn) with v = u*
    X = np.stack([_to_real_coords(c) for c in cands], axis=1)
    basis, sv, _ = np.linalg.svd(X, full_matrices=False)
    basis = basis[:, :2]
    # rotate within the real 2-plane to maximize left/right separation
    site_of = np.tile(np.repeat(np.arange(n_sites), 2), 2)
    left = (site_of < n_sites / 2).astype(float)
    A = basis.T @ (left[:, None] * basis)
    _, rot = np.linalg.eigh(A)
    modes = []
    for col, end in ((rot[:, 1], "left"), (rot[:, 0], "right")):
        x = basis @ col
        x /= np.linalg.norm(x)
        psi = _from_real_coords(x, n_sites)
        psi /= np.linalg.norm(psi)
        w = _site_weights(psi)
        modes.append(MajoranaMode(w, end, _decay_length(w, end == "left", p.lattice_spacing), psi))
    return modes[0], modes[1]


def profile_overlap(a: MajoranaMode, b: MajoranaMode) -> float:
    """Bhattacharyya overlap of two site-weight profiles (0 disjoint, 1 identical)."""
    return float(np.sum(np.sqrt(a.site_weights * b.site_weights)))


def zero_mode_splitting_vs_length(p: WireParameters, lengths: Sequence[float]) -> list[tuple[float, float]]:
    a = p.lattice_spacing
    out = []
    for L in lengths:
        n = int(round(L / a))
        q = replace(p, length=n * a, num_sites=n)
        spec = low_energy_spectrum(q)
        if not spec.has_zero_modes:
            raise TrivialPhaseError(spec.zero_mode_ratio)
        out.append((float(q.length), spec.zero_mode_splitting))
    return out


class CoherenceFit(NamedTuple):
    xi: float
    r_squared: float
    prefactor: float


def coherence_length_fit(samples: Sequence[tuple[float, float]]) -> CoherenceFit:
    """Fit ``E = A exp(-L / xi)`` by least squares on ``log E``."""
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples, got {len(samples)}")
    L = np.array([s[0] for s in samples], dtype=float)
    E = np.array([s[1] for s in samples], dtype=float)
    if np.any(E <= 0):
        raise ValueError("all energies must be positive for a logarithmic fit")
    fit = linregress(L, np.log(E))
    xi = -1.0 / fit.slope if fit.slope != 0 else math.inf
    return CoherenceFit(float(xi), float(fit.rvalue**2), float(math.exp(fit.intercept)))


@dataclass(frozen=True)
class PhasePoint:
    mu: float
    zeeman: float
    gap: float
    is_topological: bool


def finite_size_gap_estimate(p: WireParameters) -> float:
    """Level spacing scale ``pi v / L`` with v bounded by the larger of 2ta and alpha."""
    v = max(2.0 * p.hopping * p.lattice_spacing, abs(p.rashba))
    return math.pi * v / p.length


def _phase_point(p: WireParameters) -> PhasePoint:
    spec = low_energy_spectrum(p)
    return PhasePoint(p.chemical_potential, p.zeeman, spec.gap, spec.has_zero_modes)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TOPOBUS_WORKERS", "1")))
    except ValueError:
        return 1


def phase_diagram_scan(p_base: WireParameters, mu_grid: Sequence[float], zeeman_grid: Sequence[float]) -> list[PhasePoint]:
    """Numerical phase for every (mu, V_x) pair, mu-major order."""
    if len(mu_grid) == 0 or len(zeeman_grid) == 0:
        raise ValueError("grids must be non-empty")
    params = [replace(p_base, chemical_potential=float(m), zeeman=float(v)) for m in mu_grid for v in zeeman_grid]
    workers = _workers()
    if workers > 1:
        # LAPACK releases the GIL; map preserves input order
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(_phase_point, params))
    return [_phase_point(q) for q in params]


def locate_phase_boundary(p_base: WireParameters, mu: float, zeeman_lo: float, zeeman_hi: float, tol: float = 1e-3) -> float:
    """Bisect the numerically detected trivial/topological transition in V_x."""
    lo = replace(p_base, chemical_potential=mu, zeeman=zeeman_lo)
    hi = replace(p_base, chemical_potential=mu, zeeman=zeeman_hi)
    if _phase_point(lo).is_topological or not _phase_point(hi).is_topological:
        raise ValueError("bracket must start trivial and end topological")
    a, b = zeeman_lo, zeeman_hi
    while b - a > tol:
        m = 0.5 * (a + b)
        if _phase_point(replace(p_base, chemical_potential=mu, zeeman=m)).is_topological:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def gap_minimum_location(points: Sequence[PhasePoint]) -> float:
    """V_x of the smallest bulk gap among points (typically one mu row)."""
    best = min(points, key=lambda q: q.gap)
    return best.zeeman
