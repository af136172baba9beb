"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
summary lines.  All tolerances are pinned here, not configurable.
"""

import dataclasses

import numpy as np
import pytest

from opensys.decomposition import decompose, verify_block_form, verify_theorem
from opensys.dynamics import (
    ForcingSignal,
    make_grid,
    make_kernel,
    no_gain_check,
    propagate_full,
    reduction_discrepancy,
)
from opensys.lattice import (
    LatticeSpec,
    build_lattice_system,
    multiplicity_bound,
    surface_count,
    verify_example,
)
from opensys.systems import BlockSystem, assemble_full, random_system

N_RANDOM_SYSTEMS = 200
DISTANCE_TOL = 1e-8
BLOCK_TOL = 1e-9
CONSERVATION_TOL = 1e-10
REDUCTION_SUP_TOL = 1e-3
REDUCTION_STEP = 5e-3
ORDER_BAND = (1.7, 2.3)


def _report(criterion: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def random_suite():
    """200 random systems with their decompositions and theorem reports."""
    rng = np.random.default_rng(20240815)
    suite = []
    for i in range(N_RANDOM_SYSTEMS):
        d1 = int(rng.integers(1, 13))
        d2 = int(rng.integers(1, 21))
        rank = int(rng.integers(0, min(d1, d2) + 1))
        sys = random_system(d1, d2, rank, seed=1000 + i)
        dec = decompose(sys)
        report = verify_theorem(sys, dec)
        suite.append((sys, dec, report))
    return suite


@pytest.fixture(scope="module")
def lattice_reports():
    return {
        (n, m): verify_example(LatticeSpec.centered(m, n, dims=3))
        for n in (2, 3) for m in (6, 8)
    }


def test_criterion_1_theorem_equalities(random_suite):
    worst = max(r.max_distance for _, _, r in random_suite)
    _report(
        "1 (orbit equality suite)",
        worst <= DISTANCE_TOL,
        f"max projector distance over {len(random_suite)} systems: {worst:.3e} "
        f"(limit {DISTANCE_TOL:g})",
    )


def test_criterion_2_multiplicity_bound(random_suite, lattice_reports):
    violations = [
        r for _, _, r in random_suite if not r.bound_satisfied
    ] + [
        rep for rep in lattice_reports.values()
        if not rep.theorem.bound_satisfied
    ]
    _report(
        "2 (multiplicity bound)",
        not violations,
        f"{len(violations)} violations over "
        f"{len(random_suite)} random + {len(lattice_reports)} lattice instances",
    )


def test_criterion_3_lattice_formulas(lattice_reports):
    ok = (surface_count(2) == 8 and surface_count(3) == 26
          and multiplicity_bound(2) == 16 and multiplicity_bound(3) == 52)
    details = []
    for (n, m), rep in sorted(lattice_reports.items()):
        rank_ok = rep.rank_gamma <= surface_count(n)
        mult_ok = rep.multiplicity_omega_c <= multiplicity_bound(n)
        ok = ok and rank_ok and mult_ok
        details.append(
            f"N={n},M={m}: rank={rep.rank_gamma}<={surface_count(n)} "
            f"mult={rep.multiplicity_omega_c}<={multiplicity_bound(n)}"
        )
    _report("3 (lattice formulas)", ok, "; ".join(details))


def test_criterion_4_decoupling_evidence(lattice_reports):
    dims = {m: lattice_reports[(2, m)].dims_report["h2d"] for m in (6, 8)}
    _report(
        "4 (hidden decoupled modes)",
        all(v > 0 for v in dims.values()),
        f"dim(h2d) at N=2: M=6 -> {dims[6]}, M=8 -> {dims[8]}",
    )


def test_criterion_5_reduction_consistency():
    t_max = 10.0
    steps = int(round(t_max / REDUCTION_STEP))
    rng = np.random.default_rng(7)
    cases = [BlockSystem(np.array([[0.0]]), np.array([[0.0]]),
                         np.array([[1.0]]))]
    while len(cases) < 21:
        d1 = int(rng.integers(1, 5))
        d2 = int(rng.integers(1, 13 - d1))
        rank = int(rng.integers(1, min(d1, d2) + 1))
        cases.append(random_system(d1, d2, rank, seed=int(rng.integers(1e6))))

    worst_sup = 0.0
    orders = []
    for i, sys in enumerate(cases):
        v1 = rng.standard_normal(sys.d1) + 1j * rng.standard_normal(sys.d1)
        v1 /= np.linalg.norm(v1)
        if i == 0:
            v1 = np.array([1.0 + 0j])
        result = reduction_discrepancy(sys, v1, t_max, steps)
        worst_sup = max(worst_sup, result["sup_diff_coarse"])
        if result["sup_diff_fine"] > 1e-12:
            orders.append(result["order"])
    order_ok = all(ORDER_BAND[0] <= o <= ORDER_BAND[1] for o in orders)
    _report(
        "5 (reduction consistency)",
        worst_sup <= REDUCTION_SUP_TOL and order_ok,
        f"sup-norm gap <= {worst_sup:.3e} at h={REDUCTION_STEP:g} over "
        f"{len(cases)} systems incl. cos(t) case; orders in "
        f"[{min(orders):.2f}, {max(orders):.2f}]",
    )


def test_criterion_6_conservation():
    rng = np.random.default_rng(99)
    grid = make_grid(10.0, 1000)
    worst = 0.0
    for i in range(10):
        sys = random_system(int(rng.integers(1, 7)), int(rng.integers(1, 9)),
                            1, seed=500 + i)
        n = sys.d1 + sys.d2
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        traj = propagate_full(assemble_full(sys), v0, ForcingSignal.zero(),
                              grid)
        drift = np.max(np.abs(traj.norms() - np.linalg.norm(v0)))
        worst = max(worst, drift / np.linalg.norm(v0))
    _report(
        "6 (norm conservation)",
        worst <= CONSERVATION_TOL,
        f"max relative norm drift over [0,10]: {worst:.3e} "
        f"(limit {CONSERVATION_TOL:g})",
    )


def test_criterion_7_no_gain():
    kernels = [
        make_kernel(random_system(3, 6, 2, seed=61)),
        make_kernel(random_system(2, 8, 1, seed=62)),
        make_kernel(build_lattice_system(LatticeSpec.centered(6, 2, dims=3))),
    ]
    coarse = make_grid(20.0, 400)
    fine = make_grid(20.0, 800)
    total_trials = 0
    ok = True
    details = []
    for i, kernel in enumerate(kernels):
        res = no_gain_check(kernel, 20, coarse, seed=100 + i)
        total_trials += len(res.values)
        ok = ok and res.min_value >= -res.quad_error_bound
        if res.min_value < 0:
            refined = no_gain_check(kernel, 20, fine, seed=100 + i)
            ok = ok and refined.min_value >= res.min_value / 2
            details.append(
                f"kernel{i}: min {res.min_value:.2e} -> {refined.min_value:.2e}"
            )
        else:
            details.append(f"kernel{i}: min {res.min_value:.2e} >= 0")
    _report(
        "7 (no-gain dissipation)",
        ok and total_trials >= 50,
        f"{total_trials} trials; " + "; ".join(details),
    )


def test_criterion_8_block_form(random_suite):
    worst_rel = 0.0
    for sys, dec, _ in random_suite:
        omega_norm = max(np.linalg.norm(assemble_full(sys).omega, 2), 1e-300)
        worst_rel = max(worst_rel, verify_block_form(sys, dec) / omega_norm)

    # negative control: swap a decoupled vector into the coupled part
    control = _corrupted_control_ratio()
    _report(
        "8 (block-zero pattern)",
        worst_rel <= BLOCK_TOL and control > 1e-3,
        f"max relative forbidden-block norm {worst_rel:.3e} "
        f"(limit {BLOCK_TOL:g}); corrupted control {control:.3e} > 1e-3",
    )


def _corrupted_control_ratio() -> float:
    rng = np.random.default_rng(77)
    core = random_system(2, 3, 2, seed=88)
    extra = rng.standard_normal((2, 2))
    omega1 = np.block([
        [core.omega1, np.zeros((2, 2))],
        [np.zeros((2, 2)), (extra + extra.T) / 2],
    ])
    gamma = np.zeros((4, 3), dtype=complex)
    gamma[:2] = core.gamma
    sys = BlockSystem(omega1, core.omega2, gamma)
    dec = decompose(sys)
    h1d = dec.h1d.matrix.copy()
    h1c = dec.h1c.matrix.copy()
    h1d[:, 0], h1c[:, 0] = h1c[:, 0].copy(), h1d[:, 0].copy()
    bad = dataclasses.replace(
        dec,
        h1d=dataclasses.replace(dec.h1d, matrix=h1d),
        h1c=dataclasses.replace(dec.h1c, matrix=h1c),
    )
    omega_norm = np.linalg.norm(assemble_full(sys).omega, 2)
    return verify_block_form(sys, bad) / omega_norm
