"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict through the ``criterion`` fixture; the
lines are repeated in the terminal summary.  Criteria that do not hold at
the stated parameters are marked ``xfail(strict=True)`` with the full
assertion kept, so an unexpected pass is reported as well.
"""
import itertools
import time
import warnings

import numpy as np
import pytest

from speclocal.degree import (chern_fhs, degree_closed_form, degree_preimage, dirac_model,
                              fermi_projection)
from speclocal.fuzzy import (FuzzyTorus, clock_shift, det_path_winding, g_hat_operator, g_operator,
                             gap_bound_invertible, gap_bound_unitary, periodic_torus, reduce_graded)
from speclocal.errors import WidthTooLarge
from speclocal.inertia import pfaffian, signature, spectral_gap
from speclocal.lattice import (bloch_spectrum, lattice_sites, periodic_restriction,
                               random_hamiltonian, taper_matrix_elements)
from speclocal.localizer import (check_theorem_conditions, even_periodic_localizer, homotopy_s,
                                 homotopy_t, localizer_invariant, odd_periodic_localizer)
from speclocal.models import Disorder, aii_model, build_model, ssh_bulk, ssh_chain, ssh_winding
from speclocal.symmetry import d3_blocks, skew_localizer_d1, skew_localizer_d2, z2_index

FIG1_SEEDS = range(20)
FIG1 = dict(m=0.9j, rho=300, lam=0.5, s=0.05, eta=1.0)


def half_sig(mat, method="eigh"):
    return localizer_invariant(mat, method=method).half_signature


def fig1_chain(seed):
    return ssh_chain(FIG1["m"], FIG1["rho"], Disorder(FIG1["lam"], seed))


def near_two(eigs):
    return int(np.sum(np.abs(eigs - 2) < 0.2)), int(np.sum(np.abs(eigs + 2) < 0.2))


@pytest.fixture(scope="module")
def fig1_untapered():
    """Per seed: half-signature and counts near +-2 of the untapered localizer."""
    out = {}
    for seed in FIG1_SEEDS:
        w = np.linalg.eigvalsh(odd_periodic_localizer(fig1_chain(seed), FIG1["eta"]))
        out[seed] = (int(np.sum(np.sign(w))) // 2, near_two(w))
    return out


@pytest.mark.xfail(strict=True, reason="clean chain at eta = 1 gives 0 for rho <= 8; see ledger")
def test_criterion_01_ssh_clean(criterion):
    start = time.perf_counter()
    values = {rho: half_sig(odd_periodic_localizer(ssh_chain(0.9j, rho), 1.0))
              for rho in (4, 6, 8, 16, 32, 64)}
    winding = ssh_winding(0.9j)
    elapsed = time.perf_counter() - start
    ok = winding == -1 and all(v == -1 for v in values.values()) and elapsed < 5
    criterion(1, ok, f"half_sig by rho {values}, winding {winding}, {elapsed:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="only 13 of 20 seeds give -1 at rho = 300; see ledger")
def test_criterion_02_fig1(criterion, fig1_untapered):
    start = time.perf_counter()
    kernels, excess, sigs = [], [], []
    for seed in FIG1_SEEDS:
        h = taper_matrix_elements(fig1_chain(seed), FIG1["s"])
        w = np.linalg.eigvalsh(h.dense())
        kernels.append(int(np.sum(np.abs(w) < 1e-8 * np.abs(w).max())))
        loc = np.linalg.eigvalsh(odd_periodic_localizer(h, FIG1["eta"]))
        plus, minus = near_two(loc)
        base_plus, base_minus = fig1_untapered[seed][1]
        # the cluster created by the taper, on top of the bulk eigenvalues already near +-2
        excess.append((plus - base_plus, minus - base_minus))
        sigs.append(int(np.sum(np.sign(loc))) // 2)
    elapsed = time.perf_counter() - start
    good = sum(v == -1 for v in sigs)
    kernel_ok = all(abs(k - 60) <= 10 for k in kernels)
    cluster_ok = all(abs(e - 30) <= 10 for pair in excess for e in pair)
    ok = kernel_ok and cluster_ok and good >= 19 and elapsed < 120
    criterion(2, ok, f"kernel {min(kernels)}..{max(kernels)}, cluster excess "
                     f"{min(min(p) for p in excess)}..{max(max(p) for p in excess)}, "
                     f"half_sig -1 for {good}/20 seeds, {elapsed:.0f}s")
    assert ok


def test_criterion_03_locality(criterion, fig1_untapered):
    s = 0.9  # (1 - s) rho = 30
    clean = half_sig(odd_periodic_localizer(taper_matrix_elements(ssh_chain(0.9j, 300), s), 1.0))
    tapered = {seed: half_sig(odd_periodic_localizer(taper_matrix_elements(fig1_chain(seed), s), 1.0))
               for seed in FIG1_SEEDS}
    same = all(tapered[seed] == fig1_untapered[seed][0] for seed in FIG1_SEEDS)
    kept = all(tapered[seed] == -1 for seed in FIG1_SEEDS if fig1_untapered[seed][0] == -1)
    ok = clean == -1 and same and kept
    criterion(3, ok, f"clean {clean}; disordered tapered == untapered for all seeds: {same}")
    assert ok


def test_criterion_04_even_invariant(criterion):
    start = time.perf_counter()
    rows = {}
    for m in (-3.0, -1.0, 1.0, 3.0, 5.0):
        op = dirac_model(2, m)
        deg = degree_closed_form(2, m)
        fhs = chern_fhs(fermi_projection(op))
        sigs = []
        for rho in (8, 12, 16):
            h = periodic_restriction(op, rho)
            eta = float(np.abs(bloch_spectrum(op, rho)).max())  # equals ||H^per_rho||
            sigs.append(half_sig(even_periodic_localizer(h, eta), method="ldl"))
        rows[m] = (sigs, fhs, -deg)
    elapsed = time.perf_counter() - start
    ok = all(all(s == fhs == md for s in sigs) for sigs, fhs, md in rows.values()) and elapsed < 60
    criterion(4, ok, "m: (half_sig at rho 8,12,16 / FHS / -deg) "
              + ", ".join(f"{m:g}: {r[0]}/{r[1]}/{r[2]}" for m, r in rows.items())
              + f", {elapsed:.0f}s")
    assert ok


# frozen from the closed-form degree, one mass per interval
DEGREE_TABLE = {
    2: {-3.0: 0, -1.0: -1, 1.0: 1, 3.0: 0},
    4: {-5.0: 0, -3.0: -1, -1.0: 3, 1.0: -3, 3.0: 1, 5.0: 0},
}


def test_criterion_05_degree_table(criterion):
    mismatches = []
    for d, table in DEGREE_TABLE.items():
        for m, expected in table.items():
            got = (degree_closed_form(d, m), degree_preimage(d, m))
            if got != (expected, expected):
                mismatches.append((d, m, got, expected))
    ok = not mismatches
    criterion(5, ok, f"d=4 values {[DEGREE_TABLE[4][m] for m in (1.0, 3.0, -1.0, 5.0)]} for m = 1, 3, -1, 5;"
                     f" mismatches {mismatches}")
    assert ok


def test_criterion_06_graded_reduction(criterion):
    op = dirac_model(2, 1.0)
    torus = periodic_torus(periodic_restriction(op, 10), flatten=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        reduced = reduce_graded(torus)
    sig_reduced = signature(g_operator(reduced))
    sig_hat = signature(g_hat_operator(torus))
    chern = chern_fhs(fermi_projection(op))
    ok = sig_reduced == sig_hat == 2 * chern
    criterion(6, ok, f"Sig(G reduced) {sig_reduced}, Sig(G hat) {sig_hat}, 2 Ch {2 * chern}")
    assert ok


def test_criterion_07_fuzzy_cross_check(criterion):
    pairs = {}
    for n in (5, 10, 20, 30):
        u1, u2 = clock_shift(n)
        pairs[n] = (signature(g_operator(FuzzyTorus([u1, u2]))) // 2, det_path_winding(u1, u2))
    rng = np.random.default_rng(7)
    commuting = []
    for _ in range(5):
        q, _ = np.linalg.qr(rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12)))
        ops = [q @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 12))) @ q.conj().T for _ in range(2)]
        commuting.append(signature(g_operator(FuzzyTorus(ops))))
    ok = all(a == b for a, b in pairs.values()) and all(v == 0 for v in commuting)
    criterion(7, ok, f"(half_sig, winding) by N {pairs}; commuting Sig {commuting}")
    assert ok


def test_criterion_08_gap_bounds(criterion):
    rng = np.random.default_rng(8)
    checked = violations = 0
    for trial in range(200):
        d = 2 + trial % 2
        eps = 10 ** rng.uniform(-4, -1.5)
        base = [np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 6))) for _ in range(d)]
        ops = []
        for b in base:
            k = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            w, v = np.linalg.eigh(eps * (k + k.conj().T) / 2)
            ops.append(b @ (v * np.exp(1j * w)) @ v.conj().T)
        if trial % 2:
            torus = FuzzyTorus(ops)
            bound = gap_bound_unitary(torus)
        else:
            torus = FuzzyTorus([a + eps * rng.normal(size=a.shape) for a in ops])
            try:
                bound = gap_bound_invertible(torus)
            except WidthTooLarge:
                continue
        if bound > 0:
            checked += 1
            violations += spectral_gap(g_operator(torus)) ** 2 < bound
    ok = violations == 0 and checked > 0
    criterion(8, ok, f"{checked} tori with a positive bound, {violations} violations")
    assert ok


def _comm_norm(v, mat):
    return np.abs(np.linalg.eigvalsh(1j * (v[:, None] * mat - mat * v[None, :]))).max()


def lemma_ratios(op, rho, twists):
    """Measured over bound for the four commutator estimates, maximized over axes.

    The infinite-volume commutator with ``xi_rho(X_j)`` is periodic with
    period ``4 rho``, so its norm is the supremum over Bloch twists of the
    twisted periodic restriction at scale ``2 rho`` (sampled on a grid).
    """
    h = periodic_restriction(op, rho).dense()
    norm = op.norm()
    x = np.repeat(lattice_sites(op.d, rho), op.L, axis=0)
    xb = np.repeat(lattice_sites(op.d, 2 * rho), op.L, axis=0)
    grid = 2 * np.pi * np.arange(twists) / twists
    boxes = [periodic_restriction(op, 2 * rho, twist=tw).dense()
             for tw in itertools.product(grid, repeat=op.d)]
    out = []
    for j in range(op.d):
        m = op.commutator_norm(j)
        xi_big = np.sin(np.pi * xb[:, j] / (2 * rho))
        out.append((
            max(_comm_norm(xi_big, b) for b in boxes) / (np.pi / (2 * rho) * m),
            _comm_norm(np.cos(np.pi * x[:, j] / rho), h) / (np.pi / rho * m),
            _comm_norm(np.sin(np.pi * x[:, j] / rho), h) / (np.pi / rho * m),
            _comm_norm(np.abs(np.sin(np.pi * x[:, j] / (2 * rho))), h) ** 2
            / (25 * np.pi / (32 * rho) * norm * m),
        ))
    return np.max(out, axis=0)


def test_criterion_09_commutator_bounds(criterion):
    rng = np.random.default_rng(9)
    worst = np.zeros(4)
    inclusion = 0.0
    for i in range(50):
        d, R, L = 1 + i % 2, 1 + (i // 2) % 2, 1 + i % 3
        rho = int(rng.integers(R + 1, 4 if d == 2 else 9))
        op = random_hamiltonian(d, L, R, rng)
        worst = np.maximum(worst, lemma_ratios(op, rho, 32 if d == 1 else 8))
        w = np.linalg.eigvalsh(periodic_restriction(op, rho).dense())
        inclusion = max(inclusion, np.abs(np.sort(w) - bloch_spectrum(op, rho)).max())
    ok = np.all(worst <= 1) and inclusion <= 1e-9
    criterion(9, ok, f"max ratios xi/cos/sin/|xi| {np.round(worst, 3).tolist()}, "
                     f"inclusion error {inclusion:.1e}")
    assert ok


Z2_CASES = {
    "d1_diii": dict(name="diii", d=1, phases=(0.5, 2.0), rhos=(8, 16), seed_rho=8, lam=0.3, eta="auto"),
    "d2_aii": dict(name="aii", d=2, phases=(1.0, 3.0), rhos=(6, 12), seed_rho=6, lam=0.3, eta="auto"),
    "d3_aii": dict(name="aii", d=3, phases=(2.0, 4.0), rhos=(4, 8), seed_rho=4, lam=0.1, eta=1.0),
}


def _z2(name, d, rho, m, lam=0.0, seed=0, eta="auto"):
    h = build_model(name, rho, d=d, m=m, lam=lam, seed=seed)
    if eta == "auto":
        eta = float(np.abs(np.linalg.eigvalsh(h.dense())).max())
    return z2_index(h, eta).index


def test_criterion_10_z2_suite(criterion):
    start = time.perf_counter()
    # realness and skewness of the forms, with disorder
    residual = 0.0
    h1 = build_model("diii", 6, m=0.5, lam=0.3, seed=1)
    h2 = build_model("aii", 3, d=2, m=1.0, lam=0.3, seed=1)
    h3 = build_model("aii", 2, d=3, m=2.0, lam=0.3, seed=1)
    for forms in (skew_localizer_d1(h1, 1.0)[:2], skew_localizer_d2(h2, 3.0)[:2]):
        for f in forms:
            residual = max(residual, np.abs(f.imag).max(), np.abs(f + f.T).max())
    residual = max(residual, max(np.abs(b.imag).max() for b in d3_blocks(h3, 1.0)))
    # Pf^2 = det
    rng = np.random.default_rng(10)
    pf_error = 0.0
    for _ in range(100):
        n = 2 * int(rng.integers(1, 20))
        a = rng.normal(size=(n, n))
        a = a - a.T
        det = np.linalg.det(a)
        pf_error = max(pf_error, abs(pfaffian(a) ** 2 - det) / max(abs(det), 1e-300))
    # phases, rho doubling, disorder
    summary, ok_cases = {}, True
    for case, cfg in Z2_CASES.items():
        clean = {m: [_z2(cfg["name"], cfg["d"], rho, m, eta=cfg["eta"]) for rho in cfg["rhos"]]
                 for m in cfg["phases"]}
        dis = {m: [_z2(cfg["name"], cfg["d"], cfg["seed_rho"], m, cfg["lam"], s, cfg["eta"])
                   for s in range(10)] for m in cfg["phases"]}
        values = [set(clean[m] + dis[m]) for m in cfg["phases"]]
        good = all(len(v) == 1 for v in values) and values[0] != values[1]
        ok_cases &= good
        summary[case] = {m: v.pop() if len(v) == 1 else sorted(v) for m, v in zip(cfg["phases"], values)}
    elapsed = time.perf_counter() - start
    ok = residual <= 1e-10 and pf_error <= 1e-8 and ok_cases
    criterion(10, ok, f"skew/real residual {residual:.1e}, Pf^2=det rel error {pf_error:.1e}, "
                      f"index by phase {summary}, {elapsed:.0f}s")
    assert ok


def test_criterion_11_condition_ledger(criterion):
    flat = check_theorem_conditions(1, 1.0, 1.0, 1.0, 1.0, 300, 1)
    sufficient = all(
        check_theorem_conditions(d, norm, gap, 1.0, 1.25 * norm, 10, 1).eta_condition
        for d in (1, 2, 3) for norm in (1.0, 3.0) for gap in np.linspace(0.05, 1.0, 20) * norm)
    ssh = ssh_bulk(0.9j)
    dirac = dirac_model(2, 1.0)
    reports = {}
    exact = True
    for label, op, eta, rho in (("ssh", ssh, 1.0, 300), ("dirac", dirac, 3.0, 16)):
        norm, gap, comm = op.norm(), op.gap(), op.commutator_norm()
        rep = check_theorem_conditions(op.d, norm, gap, comm, eta, rho, op.range)
        expected = 15e6 * op.d ** 4 * comm * norm ** 3 * eta ** 2 / gap ** 6
        exact &= np.isclose(rep.rho_min, expected, rtol=1e-12)
        reports[label] = (rep.rho_min, rep.rho_condition)
    ok = (flat.eta_condition and flat.eta_lower_bound and sufficient and exact
          and not any(passed for _, passed in reports.values()))
    criterion(11, ok, f"flat band eta=1 admissible {flat.eta_condition}; eta=5/4||H|| sufficient "
                      f"{sufficient}; rho_min {({k: f'{v[0]:.2e}' for k, v in reports.items()})} "
                      f"not met at desk scale")
    assert ok


def test_criterion_12_homotopies(criterion):
    start = time.perf_counter()
    h = ssh_chain(0.9j, 300)
    end_sigs, gaps = [], []
    for path in ([homotopy_t(h, 300, 1.0, t) for t in np.linspace(0, 1, 11)],
                 [homotopy_s(h, 1.0, s) for s in np.linspace(0, 1, 21)]):
        results = [localizer_invariant(mat) for mat in path]
        gaps.append(min(r.gap for r in results))
        end_sigs.append((results[0].half_signature, results[-1].half_signature))
    elapsed = time.perf_counter() - start
    ok = all(g > 0 for g in gaps) and all(a == b for a, b in end_sigs) and elapsed < 180
    criterion(12, ok, f"min|eig| t-path {gaps[0]:.3f}, s-path {gaps[1]:.3f}; "
                      f"endpoint half_sig {end_sigs}; {elapsed:.0f}s")
    assert ok
