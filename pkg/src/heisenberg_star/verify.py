"""Self-check suites behind the ``verify`` CLI subcommand.

Each suite returns a list of named checks with a pass flag and a short
detail string; the CLI prints one line per check and exits nonzero if
any failed. The checks are quick versions of the package's invariants,
meant as a smoke test on a fresh install rather than a substitute for
the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import make_params
from .dynamics import coherent_series, evolve, _coherent_block_state, _neel_block_state
from .operators import (
    build_bath_ring,
    build_star_hamiltonian,
    build_L_squared,
    build_modified_star,
    expectation,
)
from .spectrum import (
    bath_subground_energy,
    degeneracy,
    level_table,
    single_magnon_energy,
    state_count,
    sub_ground_energy,
    transition_point,
)
from .states import spin_coherent, subground_squared_norm, subground_state


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail="") -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def suite_identities() -> list[CheckResult]:
    """Counting identities and closed forms that need no diagonalization."""
    out = []
    for N in (4, 8, 12, 16):
        total = sum((2 * l + 1) * degeneracy(N, l) for l in range(N // 2 + 1))
        out.append(_check(f"multiplet-count N={N}", total == 2 ** N,
                          f"{total} vs {2 ** N}"))
    for N, two_S in ((8, 1), (8, 4), (16, 4), (16, 14)):
        got = state_count(N, two_S)
        want = (two_S + 1) * 2 ** N
        out.append(_check(f"state-count N={N} two_S={two_S}", got == want,
                          f"{got} vs {want}"))
    for two_S, two_l in ((1, 2), (2, 4), (3, 6), (4, 10), (6, 12)):
        got = subground_squared_norm(two_S, two_l)
        want = math.comb(two_l + 1, two_S)
        out.append(_check(f"norm-identity two_S={two_S} two_l={two_l}",
                          got == want, f"{got} vs {want}"))
    tp = transition_point(16, 2)
    out.append(_check("transition-point N=16 S=1", abs(tp - 0.125) < 1e-15,
                      f"{tp}"))
    return out


def suite_spectrum(N: int = 12, threads: int = 1) -> list[CheckResult]:
    """Ring block anchors and ordering at the requested size."""
    out = []
    table = level_table(N, threads=threads)
    top = table.energy(N)
    out.append(_check(f"polarized-block N={N}", abs(top - N / 4.0) <= 1e-9,
                      f"E1b(N/2)={top!r}"))
    one = table.energy(N - 2)
    want = N / 4.0 - 2.0
    out.append(_check(f"one-magnon-block N={N}", abs(one - want) <= 1e-9,
                      f"E1b(N/2-1)={one!r} vs {want}"))
    band = min(single_magnon_energy(N, k) for k in range(N))
    out.append(_check(f"magnon-band-minimum N={N}", abs(band - want) <= 1e-12,
                      f"{band!r}"))
    ordered = all(a.energy < b.energy
                  for a, b in zip(table.rows, table.rows[1:]))
    out.append(_check(f"level-ordering N={N}", ordered, "strictly increasing"))
    return out


def suite_subground(N: int = 8, threads: int = 1) -> list[CheckResult]:
    """Residuals of the closed-form eigenstates for every valid (l, m)."""
    out = []
    J, g = 0.85, 1.1
    for two_S in (2, 3, 4):
        params = make_params(N, two_S, J=J, g=g)
        worst = 0.0
        count = 0
        for two_l in range(0, N + 1, 2):
            two_j = abs(two_l - two_S)
            e1b = bath_subground_energy(N, two_l // 2)
            energy = sub_ground_energy(two_l, two_S, J, g, e1b)
            for two_m in range(-two_j, two_j + 1, 2):
                psi = subground_state(N, two_S, two_l, two_m)
                sector, x = psi.require_single()
                H = build_star_hamiltonian(sector, params)
                worst = max(worst, float(np.linalg.norm(
                    H.matrix @ x - energy * x)))
                count += 1
        out.append(_check(f"subground-residuals two_S={two_S}", worst <= 1e-8,
                          f"{count} states, worst residual {worst:.2e}"))
    return out


def suite_dynamics_oracle(N: int = 6, threads: int = 1) -> list[CheckResult]:
    """Krylov propagation against dense exponentials on a small star."""
    out = []
    params = make_params(N, 2, J=0.8, g=1.0)
    state = _neel_block_state(params, "uniform")
    hams = [build_star_hamiltonian(s, params) for s in state.sectors]
    t_grid = np.linspace(0.0, 20.0, 21)[1:] / params.gt
    worst = 0.0
    for t, st in zip(t_grid, evolve(hams, state, t_grid)):
        for i, h in enumerate(hams):
            dense = scipy.linalg.expm(-1j * t * h.matrix.toarray()) @ state.block(i)
            worst = max(worst, float(np.max(np.abs(dense - st.block(i)))))
    out.append(_check(f"krylov-vs-dense N={N}", worst <= 1e-9,
                      f"max amplitude deviation {worst:.2e}"))
    psi = spin_coherent(14, 2.0, 0.3)
    res = 0.0
    for i, sector in enumerate(psi.sectors):
        ring = build_bath_ring(sector, 1.0, 1.0)
        x = psi.block(i)
        r = ring.matrix @ x - (14 / 4.0) * x
        res += float(np.vdot(r, r).real)
    res = math.sqrt(res)
    out.append(_check("coherent-ring-eigenstate N=14", res <= 1e-10,
                      f"residual {res:.2e}"))
    return out


SUITES = {
    "identities": lambda n, threads: suite_identities(),
    "spectrum": lambda n, threads: suite_spectrum(n or 12, threads),
    "subground": lambda n, threads: suite_subground(n or 8, threads),
    "dynamics-oracle": lambda n, threads: suite_dynamics_oracle(n or 6, threads),
}


def run_suite(name: str, n: int | None = None, threads: int = 1) -> list[CheckResult]:
    if name == "all":
        results = []
        for key in SUITES:
            results.extend(SUITES[key](n, threads))
        return results
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](n, threads)
