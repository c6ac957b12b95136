"""Static spectrum of the star: ring level structure and closed forms.

The only numerical work in this module is the lowest eigenpair of the
isotropic ring inside one magnetization block. Everything else is
arithmetic on top of those numbers:

* each ring block ``l_m = l`` has a nondegenerate bottom level with
  total ring angular momentum ``l`` and energy ``E1b(l)``, strictly
  increasing with ``l`` (ferromagnetic states cost the most),
* attaching the central spin shifts a ring multiplet ``(l, E_b)`` by a
  closed-form amount depending only on quantum numbers, so the star
  spectrum and its per-``l`` sub-ground energies need no further
  diagonalization.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import BasisSector, StateVector, enumerate_bath_sector
from .errors import ConvergenceError, ParameterError, StarError
from .operators import SparseOperator, build_bath_ring, build_L_squared, expectation

# Fixed seed for the Lanczos start vector. A structured start (for
# example the all-ones vector, which is the maximal Dicke state and an
# exact ring eigenstate) can be orthogonal to the target level, so the
# start is pseudorandom but reproducible.
LANCZOS_SEED = 0x5EED5

# Blocks at or below this dimension go straight to the dense solver.
DENSE_CUTOFF = 1024


def degeneracy(N: int, l: int) -> int:
    """Number of ring multiplets with total angular momentum l.

    Counted as the difference of two binomials: states with
    magnetization l minus states with magnetization l + 1. Exact
    integer arithmetic.
    """
    if N % 2 != 0 or N < 2:
        raise ParameterError(f"N must be even and >= 2, got {N}")
    if l < 0 or l > N // 2:
        return 0
    first = math.comb(N, l + N // 2)
    second = math.comb(N, l + 1 + N // 2) if l + 1 + N // 2 <= N else 0
    return first - second


def lanczos_lowest(op: SparseOperator, k: int = 500, tol: float = 1e-10,
                   seed: int = LANCZOS_SEED) -> tuple[float, np.ndarray]:
    """Lowest eigenpair by Lanczos with full reorthogonalization.

    Builds up to ``k`` Krylov vectors from a seeded pseudorandom start,
    reorthogonalizing every new vector against the whole basis, and
    stops once the Ritz residual estimate drops below ``tol``. The
    returned pair satisfies ``|A v - lam v| <= tol`` (checked
    explicitly); ConvergenceError carries the best residual otherwise.
    """
    n = op.dim
    mat = op.matrix
    if n == 1:
        v = np.ones(1, dtype=np.complex128)
        lam = float(mat[0, 0].real)
        return lam, v
    rng = np.random.default_rng(seed)
    start = rng.standard_normal(n)
    for attempt in range(2):
        lam, vec, residual = _lanczos_run(mat, start, min(k, n), tol)
        if residual <= tol:
            return lam, vec
        # rare stall: retry once from an independent start
        start = rng.standard_normal(n)
    raise ConvergenceError(
        f"Lanczos did not reach tol={tol} within {k} iterations"
        f" (best residual {residual:.3e})", residual=residual,
    )


def _lanczos_run(mat, start, k, tol):
    n = mat.shape[0]
    Q = np.empty((k, n), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []
    q = start.astype(np.complex128)
    q /= np.linalg.norm(q)
    Q[0] = q
    best = (np.inf, None, np.inf)
    for j in range(k):
        w = mat @ Q[j]
        a = float(np.vdot(Q[j], w).real)
        alphas.append(a)
        w -= a * Q[j]
        if j > 0:
            w -= betas[j - 1] * Q[j - 1]
        # full reorthogonalization, twice is enough in double precision
        for _ in range(2):
            w -= Q[:j + 1].T @ (Q[:j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        theta, z = _tridiag_ground(alphas, betas)
        residual = b * abs(z[-1])
        if residual < best[0]:
            vec = Q[:j + 1].T @ z
            best = (residual, vec, theta)
        if residual <= 0.1 * tol or b <= 1e-14 * max(1.0, abs(a)):
            break
        if j + 1 < k:
            betas.append(b)
            Q[j + 1] = w / b
    residual, vec, theta = best[0], best[1], best[2]
    vec = vec / np.linalg.norm(vec)
    # report the true residual of the assembled pair, not the estimate
    lam = float(np.vdot(vec, mat @ vec).real)
    true_res = float(np.linalg.norm(mat @ vec - lam * vec))
    return lam, vec, true_res


def _tridiag_ground(alphas, betas):
    """Lowest eigenpair of the current Lanczos tridiagonal."""
    if len(alphas) == 1:
        return alphas[0], np.ones(1)
    evals, evecs = scipy.linalg.eigh_tridiagonal(
        np.asarray(alphas), np.asarray(betas[:len(alphas) - 1]))
    return float(evals[0]), evecs[:, 0]


def lowest_eigenpair(op: SparseOperator, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Route small blocks to the dense solver, large ones to Lanczos."""
    if op.dim <= DENSE_CUTOFF:
        dense = op.matrix.toarray()
        evals, evecs = np.linalg.eigh(dense)
        return float(evals[0]), np.ascontiguousarray(evecs[:, 0])
    return lanczos_lowest(op, tol=tol)


def bath_subground_state(N: int, two_l: int, tol: float = 1e-10
                         ) -> tuple[float, StateVector]:
    """Bottom level of the ring block ``l_m = l`` at unit coupling.

    Returns the energy and the eigenvector, after checking that the
    vector really carries ring angular momentum ``l`` (expectation of
    L squared within 1e-8 of l (l + 1)); the bottom of each block
    belongs to exactly that multiplet, which is what makes the
    identification safe.
    """
    if two_l % 2 != 0 or two_l < 0 or two_l > N:
        raise ParameterError(f"two_l={two_l} invalid for N={N}")
    l = two_l // 2
    sector = enumerate_bath_sector(N, N // 2 + l)
    ring = build_bath_ring(sector, 1.0, 1.0)
    energy, vec = lowest_eigenpair(ring, tol=tol)
    state = StateVector.single(sector, vec)
    l2 = expectation(build_L_squared(sector), state)
    want = l * (l + 1.0)
    if abs(l2 - want) > 1e-8:
        raise StarError(
            f"ring block n_up={N // 2 + l}: bottom level has <L^2>={l2:.12f},"
            f" expected {want}"
        )
    return energy, state


def bath_subground_energy(N: int, l: int, tol: float = 1e-10) -> float:
    """Energy of the bottom level in ring block ``l_m = l``, unit coupling."""
    energy, _ = bath_subground_state(N, 2 * l, tol=tol)
    return energy


@dataclass(frozen=True)
class LevelRow:
    two_l: int
    energy: float
    degeneracy: int

    @property
    def l(self) -> int:
        return self.two_l // 2


@dataclass(frozen=True)
class LevelTable:
    """Per-l bottom energies of the ring at unit coupling.

    Construction checks the strict increase of the energies with l and
    the multiplet counting identity sum_l (2l + 1) d_{N,l} = 2^N.
    """

    N: int
    rows: tuple[LevelRow, ...]

    def energy(self, two_l: int) -> float:
        for row in self.rows:
            if row.two_l == two_l:
                return row.energy
        raise KeyError(f"no row for two_l={two_l}")

    def __post_init__(self):
        total = 0
        prev = -np.inf
        for row in self.rows:
            if row.energy <= prev + 1e-9:
                raise StarError(
                    f"level ordering violated at l={row.l}:"
                    f" {row.energy} after {prev}"
                )
            prev = row.energy
            total += (row.two_l + 1) * row.degeneracy
        if total != 2 ** self.N:
            raise StarError(
                f"multiplet counting failed: {total} != 2^{self.N}"
            )


def level_table(N: int, tol: float = 1e-10, threads: int = 1) -> LevelTable:
    """Solve every ring block l = 0 .. N/2 and tabulate the bottom levels."""
    two_ls = list(range(0, N + 1, 2))

    def solve(two_l):
        energy, _ = bath_subground_state(N, two_l, tol=tol)
        return LevelRow(two_l=two_l, energy=energy,
                        degeneracy=degeneracy(N, two_l // 2))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(solve, two_ls))
    else:
        rows = [solve(t) for t in two_ls]
    return LevelTable(N=N, rows=tuple(rows))


def single_magnon_energy(N: int, k_index: int) -> float:
    """One flipped spin on the ferromagnetic ring: N/4 - (1 - cos k).

    ``k_index`` labels the allowed momentum k = 2 pi k_index / N. The
    band minimum sits at k = pi (k_index = N/2) and equals N/4 - 2,
    which is also the bottom of the ring block one step below maximal
    magnetization.
    """
    k = 2.0 * math.pi * k_index / N
    return N / 4.0 - (1.0 - math.cos(k))


def star_energy(two_l: int, two_s: int, two_S: int, J: float, g: float,
                E_b: float) -> float:
    """Energy of the star level grown from a ring multiplet (l, E_b).

    ``two_s`` is the doubled offset of the total angular momentum from
    the larger of l and S: j = l + s for S <= l, j = S + s for l < S.
    """
    l = two_l / 2.0
    s = two_s / 2.0
    S = two_S / 2.0
    if two_S <= two_l:
        if abs(two_s) > two_S or (two_s - two_S) % 2 != 0:
            raise ParameterError(f"two_s={two_s} invalid for branch S <= l")
        shift = s * s + s * (2.0 * l + 1.0) - S * (S + 1.0)
    else:
        if abs(two_s) > two_l or (two_s - two_l) % 2 != 0:
            raise ParameterError(f"two_s={two_s} invalid for branch l < S")
        shift = s * s + s * (2.0 * S + 1.0) - l * (l + 1.0)
    return J * E_b + 0.5 * g * shift


def sub_ground_energy(two_l: int, two_S: int, J: float, g: float,
                      E1b: float) -> float:
    """Lowest star level built on the bottom ring multiplet of given l.

    The minimum over the ladder offset lands at s = -min(S, l):

        S <= l:  J E1b - g S (l + 1)
        l < S:   J E1b - g l (S + 1)

    with degeneracy 2 |l - S| + 1.
    """
    l = two_l / 2.0
    S = two_S / 2.0
    if two_S <= two_l:
        return J * E1b - g * S * (l + 1.0)
    return J * E1b - g * l * (S + 1.0)


def sub_ground_degeneracy(two_l: int, two_S: int) -> int:
    return abs(two_l - two_S) + 1


@dataclass(frozen=True)
class GroundScanRow:
    J_over_gt: float
    EG_over_gt: float
    lG: int


def ground_scan(N: int, two_S: int, ratio_grid, table: LevelTable | None = None,
                tol: float = 1e-10, threads: int = 1) -> list[GroundScanRow]:
    """Ground energy and its ring quantum number along a J/gt grid.

    Energies are reported in units of the collective coupling
    gt = g sqrt(N). Ties between l values are broken toward larger l,
    matching the ferromagnetic side of each crossing.
    """
    if two_S < 1 or two_S > N:
        raise ParameterError(f"two_S={two_S} outside [1, N={N}]")
    if table is None:
        table = level_table(N, tol=tol, threads=threads)
    inv_sqrt_n = 1.0 / math.sqrt(N)
    branch = []
    for row in table.rows:
        l = row.two_l / 2.0
        S = two_S / 2.0
        if two_S <= row.two_l:
            weight = S * (l + 1.0)
        else:
            weight = l * (S + 1.0)
        branch.append((row.two_l, row.energy, weight * inv_sqrt_n))
    out = []
    for ratio in ratio_grid:
        best_l = -1
        best_e = np.inf
        # descending l so equal energies keep the larger l
        for two_l, e1b, weight in reversed(branch):
            e = ratio * e1b - weight
            if e < best_e:
                best_e = e
                best_l = two_l
        out.append(GroundScanRow(
            J_over_gt=float(ratio), EG_over_gt=float(best_e), lG=best_l // 2))
    return out


def scan_transitions(rows: list[GroundScanRow]) -> list[tuple[float, int, int]]:
    """Plateau edges of a ground scan: (first ratio of new plateau, from, to)."""
    edges = []
    for prev, cur in zip(rows, rows[1:]):
        if cur.lG != prev.lG:
            edges.append((cur.J_over_gt, prev.lG, cur.lG))
    return edges


def transition_point(N: int, two_S: int) -> float:
    """Crossing of the first two plateaus in J/gt: S / (2 sqrt(N))."""
    return (two_S / 2.0) / (2.0 * math.sqrt(N))


def state_count(N: int, two_S: int) -> int:
    """Total number of star levels counted multiplet by multiplet.

    Exact integer arithmetic; equals (two_S + 1) 2^N, which the
    construction must reproduce. Doubled integers keep half-integer
    central spins exact: 2 (l + s) + 1 = two_l + two_s + 1.
    """
    if two_S < 1 or two_S > N:
        raise ParameterError(f"two_S={two_S} outside [1, N={N}]")
    total = 0
    for two_l in range(0, N + 1, 2):
        d = degeneracy(N, two_l // 2)
        if two_S <= two_l:
            for two_s in range(-two_S, two_S + 1, 2):
                total += d * (two_l + two_s + 1)
        else:
            for two_s in range(-two_l, two_l + 1, 2):
                total += d * (two_S + two_s + 1)
    return total
