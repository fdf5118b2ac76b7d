"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary."""

import math
import subprocess
import sys

import numpy as np

from oracles import bell_oracle, pair_ket, phi_star_oracle
from topobus import bus_protocol as bp
from topobus import flux_qubit as fq
from topobus import qsim
from topobus import wire_model as wm
from topobus.bus_protocol import C1, C2, T1, T2
from topobus.cli import main

RESULTS: list[str] = []


def report(n: int, title: str, ok: bool, detail: str):
    RESULTS.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, detail


def test_c01_phase_boundary():
    base = wm.WireParameters(effective_mass=0.5, rashba=1.0, pairing=0.5, length=400.0, num_sites=400)
    worst = 0.0
    for mu in np.linspace(0.0, 1.0, 11):
        vc = math.hypot(mu, 0.5)
        found = wm.locate_phase_boundary(base, float(mu), 0.0, 1.5 * vc, tol=1e-4)
        worst = max(worst, abs(found - vc) / vc)
    report(1, "phase boundary", worst < 0.05, f"max relative deviation {worst:.4f} over 11 mu values (N=400)")


def test_c02_exponential_protection():
    p = wm.WireParameters(chemical_potential=-0.5, rashba=2.0, zeeman=1.5, pairing=0.5, length=100.0, num_sites=100)
    samples = wm.zero_mode_splitting_vs_length(p, [20, 30, 40, 50, 60])
    fit = wm.coherence_length_fit(samples)
    report(2, "exponential protection", fit.r_squared > 0.99, f"R^2 = {fit.r_squared:.6f}, xi = {fit.xi:.3f} over 5 lengths")


def test_c03_particle_hole_symmetry():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        p = wm.WireParameters(
            effective_mass=rng.uniform(0.2, 2.0),
            chemical_potential=rng.uniform(-2, 2),
            rashba=rng.uniform(-2, 2),
            zeeman=rng.uniform(-2, 2),
            pairing=rng.uniform(0, 1),
            length=rng.uniform(5, 80),
            num_sites=int(rng.integers(4, 61)),
        )
        H = wm.build_bdg_hamiltonian(p)
        w = wm.diagonalize(H).eigenvalues
        norm = float(np.max(np.abs(w)))
        worst = max(worst, float(np.max(np.abs(w + w[::-1]))) / norm)
    report(3, "particle-hole symmetry", worst < 1e-10, f"max |E_k + E_(-k)| / ||H|| = {worst:.2e} over 100 sets")


def test_c04_flux_minima():
    worst = 0.0
    for r in np.linspace(0.6, 3.0, 25):
        p = fq.FluxQubitParameters(e_j=1.0, e_j2=float(r))
        worst = max(worst, abs(fq.numerical_phi_star(p) - phi_star_oracle(r)))
    ref = fq.numerical_phi_star(fq.FluxQubitParameters(e_j=1.0, e_j2=1.25))
    ok = worst < 1e-6 and abs(ref - 1.159279) < 1e-6
    report(4, "flux-qubit minima", ok, f"max |phi*_num - arccos| = {worst:.2e}; phi*(1.25) = {ref:.7f}")


def test_c05_wkb_splitting():
    d0 = fq.wkb_tunneling_amplitude(fq.FluxQubitParameters(e_j=1.0, e_j2=1.25, e_c=0.1)).delta0
    ratios = np.linspace(4.0, 30.0, 27)
    series = [fq.wkb_tunneling_amplitude(fq.FluxQubitParameters(e_j=1.0, e_j2=1.25, e_c=1.0 / r)).delta0 for r in ratios]
    monotone = all(b < a for a, b in zip(series, series[1:]))
    ok = 0.02 / 3 <= d0 <= 0.06 and monotone
    report(5, "WKB splitting", ok, f"Delta0/(h nu_a) = {d0:.4f} at E_J/E_c = 10; monotone decreasing: {monotone}")


def test_c06_aharonov_casher_readout():
    t = fq.wkb_tunneling_amplitude(fq.FluxQubitParameters())
    worst = 0.0
    for n_p in (0, 1):
        for q in np.linspace(0.0, 2.0, 41):
            got = fq.flux_qubit_splitting(t, fq.ChargeConfiguration(n_p, float(q)))
            worst = max(worst, abs(got - t.delta0 * math.cos(math.pi * (n_p + q) / 2)))
    odd_zero = abs(fq.flux_qubit_splitting(t, fq.ChargeConfiguration(1, 0.0)))
    d = bp.default_layout()
    _, s00, _ = bp.measure_joint_parity(d, 1, qsim.basis_state([0, 0, 0, 0]))
    _, s11, _ = bp.measure_joint_parity(d, 1, qsim.basis_state([1, 1, 0, 0]))
    ok = worst == 0.0 and odd_zero <= np.finfo(float).eps * t.delta0 and s00 == s11
    report(6, "Aharonov-Casher readout", ok, f"formula deviation {worst:.1e}; odd splitting {odd_zero:.1e}; |00>,|11> equal: {s00 == s11}")


def test_c07_projector_algebra():
    def ket(a, b):
        return pair_ket(a, b, 0, 1, 2)

    def proj(v):
        return np.outer(v, v.conj())

    F = [proj(bell_oracle(m)) for m in range(4)]
    P0, P1 = qsim.joint_parity_projectors(0, 1)
    R0, R1 = qsim.rotated_parity_projectors(0, 1)
    hh = np.kron(qsim.HADAMARD, qsim.HADAMARD)
    checks = {
        "Pi0 = |00><00| + |11><11|": P0 - proj(ket(0, 0)) - proj(ket(1, 1)),
        "Pi1 = |01><01| + |10><10|": P1 - proj(ket(0, 1)) - proj(ket(1, 0)),
        "Pi0 = F1 + F2": P0 - F[1] - F[2],
        "Pi1 = F0 + F3": P1 - F[0] - F[3],
        "H Pi0 H = F2 + F3": hh @ P0 @ hh - F[2] - F[3],
        "H Pi1 H = F0 + F1": hh @ P1 @ hh - F[0] - F[1],
        "rotated Pi0": R0 - F[2] - F[3],
        "rotated Pi1": R1 - F[0] - F[1],
        "Bell states": np.array([[np.max(np.abs(qsim.bell_state(m).amplitudes - bell_oracle(m))) for m in range(4)]]),
    }
    worst = max(float(np.max(np.abs(v))) for v in checks.values())
    report(7, "projector algebra", worst < 1e-12, f"max residual {worst:.1e} over {len(checks)} identities")


def test_c08_entanglement_generation():
    d = bp.default_layout()
    h = 2**-0.5
    conc, probs = [], []
    for force in (0, 1):
        trace, pair = bp.entangle_pair(d, 1, (h, h), (h, h), force=force)
        conc.append(qsim.concurrence(pair))
        probs.append(trace.steps[1].probability)
    odd = 0
    runs = 10_000
    for k in range(runs):
        trace, _ = bp.entangle_pair(d, 1, (h, h), (h, h), rng_seed=k)
        odd += trace.steps[1].outcome == "odd"
    freq = odd / runs
    ok = all(abs(c - 1) < 1e-12 for c in conc) and all(abs(p - 0.5) < 1e-12 for p in probs) and abs(freq - 0.5) <= 0.02
    report(8, "entanglement generation", ok, f"concurrence {conc}; branch probabilities {probs}; empirical odd fraction {freq:.4f}")


def test_c09_teleportation():
    d = bp.default_layout()
    rng = np.random.default_rng(99)
    worst, branches = 0.0, 0
    for source, target in ((T1, C2), (C1, T2)):
        for _ in range(1000):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            res = bp.enumerate_teleport_branches(d, source, target, (v[0], v[1]))
            branches += len(res)
            total = sum(p for p, _ in res)
            worst = max(worst, max(abs(1 - f) for _, f in res), abs(1 - total))
    report(9, "teleportation", worst < 1e-12, f"max |1 - F| = {worst:.1e} over {branches} branches (T->C and C->T)")


def test_c10_determinism(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "wire: {num_sites: 80, length: 80, chemical_potential: -0.5, rashba: 2.0, zeeman: 1.5}\n"
        "phase_diagram: {mu: {num: 3}, zeeman: {num: 5}}\n"
        "majorana_splitting: {lengths: [20, 30, 40, 50]}\n"
        "flux_potential: {grid: 21}\n"
        "bell_stats: {samples: 500, state: [[0.6, 0.8], [0.8, 0.6]]}\n"
    )
    subs = ["wire-spectrum", "phase-diagram", "majorana-splitting", "flux-potential", "flux-splitting", "entangle", "teleport", "bell-stats"]
    same = []
    for sub in subs:
        first, second = tmp_path / f"{sub}.0", tmp_path / f"{sub}.1"
        assert main([sub, "--config", str(cfg), "--out", str(first), "--seed", "17"]) == 0
        # rerun in a fresh interpreter so no in-process cache is shared
        args = [sys.executable, "-m", "topobus", sub, "--config", str(cfg), "--out", str(second), "--seed", "17"]
        assert subprocess.run(args, capture_output=True).returncode == 0
        same.append(first.read_bytes() == second.read_bytes())
    report(10, "determinism", all(same), f"{sum(same)}/{len(subs)} subcommands byte-identical across separate runs")
