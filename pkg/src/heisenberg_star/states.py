"""Initial states and the closed-form sub-ground eigenstates.

The ring states come in three flavours used by the experiments: the
alternating (antiferromagnetic) product state, symmetric Dicke states,
and the spin coherent state that superposes all Dicke states of the
maximal multiplet. The central spin starts either polarized or in an
equal-weight superposition of its levels.

The sub-ground eigenstates of the isotropic star are assembled in
closed form: a string of coefficients couples the central levels to
the ring multiplet grown from the bottom of one magnetization block.
The coefficients depend only on quantum numbers, never on the
couplings, which is what the tests pin down.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BasisSector, StateVector, enumerate_bath_sector, enumerate_sector
from .errors import ParameterError, StarError
from .operators import apply_bath_lowering
from . import spectrum


def neel_state(N: int) -> StateVector:
    """Alternating product state, site 1 down: |down up down up ...>.

    Lives in the half-filled ring block (l_m = 0) and has staggered
    magnetization exactly +1/2.
    """
    sector = enumerate_bath_sector(N, N // 2)
    bits = sum(1 << a for a in range(1, N, 2))
    amps = np.zeros(sector.dim, dtype=np.complex128)
    amps[sector.index_of(0, bits)] = 1.0
    return StateVector.single(sector, amps, renormalize=False)


def central_initial(two_S: int, kind: str) -> np.ndarray:
    """Amplitudes over the central levels, index 0 being S_m = S.

    ``polarized`` puts all weight on the top level; ``uniform`` spreads
    equal real weight over all two_S + 1 levels.
    """
    if kind == "polarized":
        amps = np.zeros(two_S + 1, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    if kind == "uniform":
        return np.full(two_S + 1, 1.0 / math.sqrt(two_S + 1), dtype=np.complex128)
    raise ParameterError(f"unknown central state kind {kind!r}")


def dicke_state(N: int, n_up: int) -> StateVector:
    """Symmetric state of the maximal ring multiplet with n_up spins up."""
    sector = enumerate_bath_sector(N, n_up)
    amps = np.full(sector.dim, 1.0 / math.sqrt(sector.dim), dtype=np.complex128)
    return StateVector.single(sector, amps, renormalize=False)


@dataclass(frozen=True)
class CoherentSpec:
    """Direction (theta, phi) and Dicke weights Q_n of a coherent state."""

    N: int
    theta: float
    phi: float
    Q: np.ndarray  # complex, length N + 1, sum |Q_n|^2 = 1


def coherent_coefficients(N: int, theta: float, phi: float) -> CoherentSpec:
    """Dicke weights of the spin coherent state pointing along (theta, phi).

    Q_n = z^n / (1 + |z|^2)^(N/2) * sqrt(C(N, n)) with
    z = cot(theta/2) exp(-i phi). Magnitudes are assembled in log space
    so large N stays stable; theta = 0 and theta = pi collapse onto the
    fully polarized states and are special-cased to avoid log(0).
    """
    if not (0.0 <= theta <= math.pi):
        raise ParameterError(f"theta={theta} outside [0, pi]")
    Q = np.zeros(N + 1, dtype=np.complex128)
    if theta == 0.0:
        Q[N] = 1.0
    elif theta == math.pi:
        Q[0] = 1.0
    else:
        log_cos = math.log(math.cos(0.5 * theta))
        log_sin = math.log(math.sin(0.5 * theta))
        for n in range(N + 1):
            log_mag = (0.5 * (math.lgamma(N + 1) - math.lgamma(n + 1)
                              - math.lgamma(N - n + 1))
                       + n * log_cos + (N - n) * log_sin)
            Q[n] = math.exp(log_mag) * cmath.exp(-1j * n * phi)
    return CoherentSpec(N=N, theta=theta, phi=phi, Q=Q)


def spin_coherent(N: int, theta: float, phi: float) -> StateVector:
    """Spin coherent ring state as a block vector over all n_up sectors.

    Each occupied block is the Dicke state of that filling scaled by
    Q_n; blocks with zero weight are dropped. The state is an exact
    eigenstate of the isotropic ring at the top of the spectrum (energy
    N/4 at unit coupling), which the dynamics tests rely on.
    """
    spec = coherent_coefficients(N, theta, phi)
    blocks = []
    for n in range(N + 1):
        q = spec.Q[n]
        if q == 0:
            continue
        sector = enumerate_bath_sector(N, n)
        amps = np.full(sector.dim, q / math.sqrt(sector.dim), dtype=np.complex128)
        blocks.append((sector, amps))
    return StateVector.from_blocks(blocks, renormalize=False)


def _sq_coefficient(two_a: int, two_am: int, two_b: int, two_m: int) -> Fraction:
    """Exact squared magnitude of one string coefficient.

    Shared by both branches after the substitution that swaps the roles
    of the central spin and the ring multiplet: ``two_a`` is the
    doubled spin whose levels are summed over (S, or l in the swapped
    branch), ``two_am`` the doubled running level, ``two_b`` the
    doubled partner spin.
    """
    a = (two_b + two_m - two_am) // 2
    b = (two_b - two_m + two_am) // 2
    c = (two_b + two_m - two_a) // 2
    d = (two_b - two_m + two_a) // 2
    for v in (a, b, c, d):
        if v < 0:
            raise StarError("negative factorial argument in coefficient string")
    binom = math.comb(two_a, (two_a + two_am) // 2)
    num = math.factorial(a) * math.factorial(b)
    den = math.factorial(c) * math.factorial(d)
    return Fraction(binom) * Fraction(num, den)


def subground_coefficients(two_S: int, two_l: int, two_m: int
                           ) -> list[tuple[int, float]]:
    """Level-coupling coefficients of the sub-ground state (l, m).

    For S <= l the list pairs each doubled central level two_Sm with

        A_{S_m} = (-1)^(S - S_m) sqrt(C(2S, S + S_m))
                  * sqrt((l + m - S_m)! (l - m + S_m)!
                         / ((l + m - S)! (l - m + S)!))

    so the top coefficient A_S is +1. For l < S the same string runs
    over the ring levels two_lm with S and l swapped. The coefficients
    are unnormalized; squared magnitudes are exact rationals evaluated
    here through integer arithmetic, so the square root is the only
    rounding step.
    """
    if two_l % 2 != 0:
        raise ParameterError("the ring multiplet label two_l must be even")
    two_j = abs(two_l - two_S)
    if abs(two_m) > two_j or (two_m - two_j) % 2 != 0:
        raise ParameterError(
            f"two_m={two_m} invalid for the multiplet two_j={two_j}")
    out = []
    if two_S <= two_l:
        for two_Sm in range(two_S, -two_S - 1, -2):
            sq = _sq_coefficient(two_S, two_Sm, two_l, two_m)
            sign = -1.0 if ((two_S - two_Sm) // 2) % 2 else 1.0
            out.append((two_Sm, sign * math.sqrt(sq)))
    else:
        # swapped roles: sum over ring levels against central levels
        for two_lm in range(two_l, -two_l - 1, -2):
            sq = _sq_coefficient(two_l, two_lm, two_S, two_m)
            sign = -1.0 if ((two_l - two_lm) // 2) % 2 else 1.0
            out.append((two_lm, sign * math.sqrt(sq)))
    return out


def subground_squared_norm(two_S: int, two_l: int) -> Fraction:
    """Exact squared norm of the unnormalized top-weight string (m = l - S).

    Evaluates sum_{S_m} A_{S_m}^2 at two_m = two_l - two_S in rational
    arithmetic. Equals C(2l + 1, 2S) for every S <= l, the closed-form
    identity behind the normalized prefactor.
    """
    if two_S > two_l:
        raise ParameterError("the top-weight identity needs S <= l")
    two_m = two_l - two_S
    total = Fraction(0)
    for two_Sm in range(two_S, -two_S - 1, -2):
        total += _sq_coefficient(two_S, two_Sm, two_l, two_m)
    return total


def bath_multiplet(N: int, two_l: int, two_lm_stop: int | None = None,
                   tol: float = 1e-10) -> dict[int, StateVector]:
    """Bottom ring multiplet of block l, resolved over its levels.

    Solves the block l_m = l once, then walks down with the total ring
    lowering operator, normalizing after every step. Returns a map
    two_lm -> state for two_lm = two_l down to ``two_lm_stop``
    (default: all the way to -two_l).
    """
    if two_lm_stop is None:
        two_lm_stop = -two_l
    if two_lm_stop < -two_l or two_lm_stop > two_l or (two_lm_stop - two_l) % 2 != 0:
        raise ParameterError(f"two_lm_stop={two_lm_stop} invalid for two_l={two_l}")
    _, seed = spectrum.bath_subground_state(N, two_l, tol=tol)
    out = {two_l: seed}
    current = seed
    for two_lm in range(two_l - 2, two_lm_stop - 2, -2):
        src, amps = current.require_single()
        dst = enumerate_bath_sector(N, (two_lm + N) // 2)
        lowered = apply_bath_lowering(src, amps, dst)
        nrm = np.linalg.norm(lowered)
        if nrm < 1e-12:
            raise StarError(f"lowering annihilated the multiplet at two_lm={two_lm}")
        current = StateVector.single(dst, lowered / nrm, renormalize=False)
        out[two_lm] = current
    return out


def subground_state(N: int, two_S: int, two_l: int, two_m: int,
                    multiplet: dict[int, StateVector] | None = None,
                    tol: float = 1e-10) -> StateVector:
    """Closed-form sub-ground eigenstate of the isotropic star.

    Assembles sum over levels of coefficient * |central level> x |ring
    multiplet level> inside the star sector two_m and normalizes. The
    result is an exact eigenstate of the star for every J and g, with
    total angular momentum j = |l - S|; the couplings enter only
    through the energy, never the state.

    A precomputed ``multiplet`` from :func:`bath_multiplet` can be
    passed to amortize the ring solve across many (l, m) requests.
    """
    two_j = abs(two_l - two_S)
    if abs(two_m) > two_j or (two_m - two_j) % 2 != 0:
        raise ParameterError(f"two_m={two_m} invalid for two_j={two_j}")
    coeffs = subground_coefficients(two_S, two_l, two_m)
    if two_S <= two_l:
        needed = [(two_Sm, two_m - two_Sm) for two_Sm, _ in coeffs]
    else:
        needed = [(two_m - two_lm, two_lm) for two_lm, _ in coeffs]
    lowest_lm = min(lm for _, lm in needed)
    if multiplet is None:
        multiplet = bath_multiplet(N, two_l, two_lm_stop=lowest_lm, tol=tol)
    star = enumerate_sector(N, two_S, two_m)
    amps = np.zeros(star.dim, dtype=np.complex128)
    for (two_Sm, two_lm), (_, coeff) in zip(needed, coeffs):
        c = (two_S - two_Sm) // 2
        ring = multiplet[two_lm]
        ring_sector, ring_amps = ring.require_single()
        base = c << N
        for k in range(ring_sector.dim):
            a = ring_amps[k]
            if a == 0:
                continue
            amps[star.lookup[base | int(ring_sector.bits[k])]] += coeff * a
    return StateVector.single(star, amps, renormalize=True)
