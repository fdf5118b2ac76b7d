"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``TOPOBUS_DISABLE_NUMBA`` is unset (or ``0``). Both paths are
always importable as ``*_numba`` / ``*_numpy`` so they can be compared.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAS_NUMBA = False

_DISABLED = os.environ.get("TOPOBUS_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = HAS_NUMBA and not _DISABLED

# upper bandwidth of the interleaved Nambu layout (4 components per site)
BDG_BANDWIDTH = 7


def _bdg_band_loop(num_sites, hopping, onsite, soc_bond, zeeman, pairing):
    # Upper banded storage: ab[u + i - j, j] = H[i, j] for i <= j, u = 7.
    n = 4 * num_sites
    ab = np.zeros((BDG_BANDWIDTH + 1, n))
    u = BDG_BANDWIDTH
    for site in range(num_sites):
        b = 4 * site
        # on-site block, rows/cols: (p_up, p_dn, h_up, h_dn)
        ab[u, b] = onsite
        ab[u, b + 1] = onsite
        ab[u, b + 2] = -onsite
        ab[u, b + 3] = -onsite
        ab[u - 1, b + 1] = zeeman
        ab[u - 1, b + 3] = -zeeman
        ab[u - 1, b + 2] = -pairing
        ab[u - 3, b + 3] = pairing
        if site + 1 < num_sites:
            c = b + 4
            # bond block H[b + r, c + k] lives at ab[3 + r - k, c + k]
            ab[3, c] = -hopping
            ab[2, c + 1] = soc_bond
            ab[4, c] = -soc_bond
            ab[3, c + 1] = -hopping
            ab[3, c + 2] = hopping
            ab[2, c + 3] = -soc_bond
            ab[4, c + 2] = soc_bond
            ab[3, c + 3] = hopping
    return ab


def _bdg_band_vectorized(num_sites, hopping, onsite, soc_bond, zeeman, pairing):
    n = 4 * num_sites
    u = BDG_BANDWIDTH
    ab = np.zeros((u + 1, n))
    b = 4 * np.arange(num_sites)
    ab[u, b] = onsite
    ab[u, b + 1] = onsite
    ab[u, b + 2] = -onsite
    ab[u, b + 3] = -onsite
    ab[u - 1, b + 1] = zeeman
    ab[u - 1, b + 3] = -zeeman
    ab[u - 1, b + 2] = -pairing
    ab[u - 3, b + 3] = pairing
    c = b[1:]
    ab[3, c] = -hopping
    ab[2, c + 1] = soc_bond
    ab[4, c] = -soc_bond
    ab[3, c + 1] = -hopping
    ab[3, c + 2] = hopping
    ab[2, c + 3] = -soc_bond
    ab[4, c + 2] = soc_bond
    ab[3, c + 3] = hopping
    return ab


def _josephson_loop(phi1, phi2, ratio, flux):
    out = np.empty(phi1.shape[0])
    two_pi_f = 2.0 * np.pi * flux
    for k in range(phi1.shape[0]):
        out[k] = -(np.cos(phi1[k]) + np.cos(phi2[k]) + ratio * np.cos(two_pi_f - phi1[k] - phi2[k]))
    return out


def _josephson_vectorized(phi1, phi2, ratio, flux):
    return -(np.cos(phi1) + np.cos(phi2) + ratio * np.cos(2.0 * np.pi * flux - phi1 - phi2))


def _josephson_grid_loop(axis1, axis2, ratio, flux):
    out = np.empty((axis1.shape[0], axis2.shape[0]))
    two_pi_f = 2.0 * np.pi * flux
    for i in range(axis1.shape[0]):
        c1 = np.cos(axis1[i])
        for j in range(axis2.shape[0]):
            out[i, j] = -(c1 + np.cos(axis2[j]) + ratio * np.cos(two_pi_f - axis1[i] - axis2[j]))
    return out


def _josephson_grid_vectorized(axis1, axis2, ratio, flux):
    p1, p2 = np.meshgrid(axis1, axis2, indexing="ij")
    return _josephson_vectorized(p1, p2, ratio, flux)


bdg_band_numpy = _bdg_band_vectorized
josephson_points_numpy = _josephson_vectorized
josephson_grid_numpy = _josephson_grid_vectorized

if HAS_NUMBA:
    bdg_band_numba = njit(cache=True)(_bdg_band_loop)
    josephson_points_numba = njit(cache=True)(_josephson_loop)
    josephson_grid_numba = njit(cache=True)(_josephson_grid_loop)
else:  # pragma: no cover
    bdg_band_numba = bdg_band_numpy
    josephson_points_numba = josephson_points_numpy
    josephson_grid_numba = josephson_grid_numpy


def bdg_band(num_sites: int, hopping: float, onsite: float, soc_bond: float, zeeman: float, pairing: float) -> np.ndarray:
    """Upper banded storage (``scipy.linalg.eig_banded`` layout) of the wire BdG matrix."""
    fn = bdg_band_numba if USE_NUMBA else bdg_band_numpy
    return fn(int(num_sites), float(hopping), float(onsite), float(soc_bond), float(zeeman), float(pairing))


def josephson_points(phi1: np.ndarray, phi2: np.ndarray, ratio: float, flux: float) -> np.ndarray:
    phi1 = np.ascontiguousarray(phi1, dtype=np.float64).ravel()
    phi2 = np.ascontiguousarray(phi2, dtype=np.float64).ravel()
    fn = josephson_points_numba if USE_NUMBA else josephson_points_numpy
    return fn(phi1, phi2, float(ratio), float(flux))


def josephson_grid(axis1: np.ndarray, axis2: np.ndarray, ratio: float, flux: float) -> np.ndarray:
    axis1 = np.ascontiguousarray(axis1, dtype=np.float64)
    axis2 = np.ascontiguousarray(axis2, dtype=np.float64)
    fn = josephson_grid_numba if USE_NUMBA else josephson_grid_numpy
    return fn(axis1, axis2, float(ratio), float(flux))


def band_to_dense(ab: np.ndarray) -> np.ndarray:
    """Expand upper banded storage into the full symmetric matrix."""
    u = ab.shape[0] - 1
    n = ab.shape[1]
    dense = np.zeros((n, n), dtype=ab.dtype)
    for k in range(u + 1):
        diag = ab[u - k, k:]
        idx = np.arange(n - k)
        dense[idx, idx + k] = diag
        if k:
            dense[idx + k, idx] = np.conj(diag)
    return dense
