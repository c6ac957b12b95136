"""Model parameters, magnetization sectors, and state vectors.

Conventions used everywhere in the package:

* Spin quantum numbers are carried as doubled integers (``two_S``,
  ``two_m``, ``two_l``) so that half-integer central spins stay exact.
* A bath configuration is an N-bit integer. Bit ``i`` (LSB is site 1)
  set means spin-up at site ``i + 1``. The ring bond (N, 1) wraps
  through bit ``N - 1`` and bit 0.
* A sector collects every product state ``|central_index, bits>`` with
  fixed total magnetization ``two_m = two_Sm + (2 n_up - N)`` where
  ``two_Sm = two_S - 2 * central_index``. ``central_index`` 0 is the
  maximal central level ``S_m = S``.
* Bath-only sectors reuse the same container with ``two_S = 0`` and a
  single central level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CentralSpinTooLarge,
    EmptySector,
    OddBathSize,
    ParameterError,
    SectorCapacityError,
    StarError,
)

# Hard cap on sector dimension; enumeration is eager and index maps are
# kept in memory, so refuse anything beyond desk scale.
SECTOR_CAPACITY = 2_000_000


@dataclass(frozen=True)
class ModelParams:
    """Coupling constants of the star in natural units (hbar = 1).

    ``J`` and ``Jp`` are the transverse and longitudinal intrabath
    couplings (equal for the isotropic ring), ``g`` the central-bath
    coupling, ``omega`` a field on the central spin only, and
    ``gt = g * sqrt(N)`` the collective coupling that sets the time
    scale of the central-spin motion.
    """

    N: int
    two_S: int
    J: float
    Jp: float
    g: float
    omega: float
    gt: float
    isotropic: bool

    @property
    def S(self) -> float:
        return self.two_S / 2.0


def make_params(
    N: int,
    two_S: int,
    J: float,
    Jp: float | None = None,
    g: float = 1.0,
    omega: float = 0.0,
) -> ModelParams:
    """Validate couplings and derive ``gt`` and the isotropy flag.

    ``Jp=None`` means an isotropic ring (``Jp = J``).
    """
    if not isinstance(N, int) or N < 2:
        raise ParameterError(f"ring length must be an integer >= 2, got {N!r}")
    if N % 2 != 0:
        raise OddBathSize(f"ring length must be even, got N={N}")
    if not isinstance(two_S, int) or two_S < 1:
        raise ParameterError(f"two_S must be an integer >= 1, got {two_S!r}")
    if two_S > N:
        raise CentralSpinTooLarge(f"two_S={two_S} exceeds the bath maximum N={N}")
    if Jp is None:
        Jp = J
    for name, value in (("J", J), ("Jp", Jp), ("g", g), ("omega", omega)):
        if not math.isfinite(value):
            raise ParameterError(f"coupling {name} must be finite, got {value!r}")
    return ModelParams(
        N=N,
        two_S=two_S,
        J=float(J),
        Jp=float(Jp),
        g=float(g),
        omega=float(omega),
        gt=float(g) * math.sqrt(N),
        isotropic=(float(J) == float(Jp)),
    )


def _bit_patterns(n_sites: int, n_up: int):
    """Yield every n_sites-bit integer with exactly n_up set bits, ascending.

    Gosper's hack produces the next larger integer with the same
    popcount, so the ordering comes for free.
    """
    if n_up == 0:
        yield 0
        return
    v = (1 << n_up) - 1
    top = 1 << n_sites
    while v < top:
        yield v
        t = v | (v - 1)
        v = (t + 1) | (((((t + 1) & -(t + 1)) // (v & -v)) >> 1) - 1)


@dataclass(frozen=True, eq=False)
class BasisSector:
    """Ordered basis of one total-magnetization sector.

    States are sorted by ascending ``central_index`` and then ascending
    ``bath_bits``; the arrays ``central``, ``bits`` and ``n_up`` are
    parallel. ``lookup`` maps the packed key
    ``(central_index << N) | bits`` back to the position.
    """

    N: int
    two_S: int
    two_m: int
    central: np.ndarray
    bits: np.ndarray
    n_up: np.ndarray
    lookup: dict

    @property
    def dim(self) -> int:
        return len(self.bits)

    @property
    def is_bath(self) -> bool:
        return self.two_S == 0

    @property
    def tag(self) -> str:
        return f"N={self.N}:2S={self.two_S}:2m={self.two_m}"

    def index_of(self, central_index: int, bath_bits: int) -> int:
        """Position of the product state, KeyError if not in the sector."""
        return self.lookup[(central_index << self.N) | bath_bits]

    def state(self, i: int) -> tuple[int, int]:
        return int(self.central[i]), int(self.bits[i])

    @property
    def states(self) -> list[tuple[int, int]]:
        return [(int(c), int(b)) for c, b in zip(self.central, self.bits)]

    def two_Sm(self, central_index: int) -> int:
        return self.two_S - 2 * central_index

    def __repr__(self) -> str:  # keep reprs short, sectors can be huge
        return f"BasisSector({self.tag}, dim={self.dim})"


def _admissible_n_up(N: int, two_S: int, two_m: int, central_index: int) -> int | None:
    """Ring occupation forced by the sector constraint, None if impossible."""
    two_Sm = two_S - 2 * central_index
    num = two_m - two_Sm + N
    if num % 2 != 0:
        return None
    n_up = num // 2
    if n_up < 0 or n_up > N:
        return None
    return n_up


def sector_dimension(N: int, two_S: int, two_m: int) -> int:
    """Dimension of the sector without materializing it."""
    total = 0
    for c in range(two_S + 1):
        n_up = _admissible_n_up(N, two_S, two_m, c)
        if n_up is not None:
            total += math.comb(N, n_up)
    return total


def enumerate_sector(N: int, two_S: int, two_m: int) -> BasisSector:
    """Materialize the sector basis with its index map.

    Raises EmptySector when no product state has the requested
    magnetization (out of range, or parity mismatch between ``two_m``
    and ``two_S``), and SectorCapacityError beyond the supported size.
    """
    if N % 2 != 0:
        raise OddBathSize(f"ring length must be even, got N={N}")
    if two_S < 0 or two_S > N:
        raise CentralSpinTooLarge(f"two_S={two_S} outside [0, N={N}]")
    if abs(two_m) > two_S + N:
        raise EmptySector(f"|two_m|={abs(two_m)} exceeds two_S + N = {two_S + N}")
    dim = sector_dimension(N, two_S, two_m)
    if dim == 0:
        raise EmptySector(
            f"no states with two_m={two_m} for N={N}, two_S={two_S}"
            " (parity mismatch)"
        )
    if dim > SECTOR_CAPACITY:
        raise SectorCapacityError(
            f"sector dim {dim} exceeds the cap {SECTOR_CAPACITY}"
        )
    central = np.empty(dim, dtype=np.int64)
    bits = np.empty(dim, dtype=np.int64)
    ups = np.empty(dim, dtype=np.int64)
    lookup: dict[int, int] = {}
    pos = 0
    for c in range(two_S + 1):
        n_up = _admissible_n_up(N, two_S, two_m, c)
        if n_up is None:
            continue
        base = c << N
        for pattern in _bit_patterns(N, n_up):
            central[pos] = c
            bits[pos] = pattern
            ups[pos] = n_up
            lookup[base | pattern] = pos
            pos += 1
    return BasisSector(
        N=N, two_S=two_S, two_m=two_m,
        central=central, bits=bits, n_up=ups, lookup=lookup,
    )


def enumerate_bath_sector(N: int, n_up: int) -> BasisSector:
    """Basis of the ring-only block with ``n_up`` up spins."""
    if n_up < 0 or n_up > N:
        raise EmptySector(f"n_up={n_up} outside [0, N={N}]")
    return enumerate_sector(N, 0, 2 * n_up - N)


@dataclass
class StateVector:
    """Complex amplitudes over one or more sectors.

    ``amps`` concatenates the per-sector blocks in the order of
    ``sectors``; ``offsets[i]`` is where block ``i`` starts. Single
    sector states simply have one block. ``normalized`` records whether
    the vector is meant to be unit norm (constructors enforce it,
    operator application does not).
    """

    sectors: tuple[BasisSector, ...]
    amps: np.ndarray
    offsets: tuple[int, ...]
    normalized: bool = True

    @classmethod
    def single(cls, sector: BasisSector, amps, *, renormalize: bool = True) -> "StateVector":
        return cls.from_blocks([(sector, amps)], renormalize=renormalize)

    @classmethod
    def from_blocks(cls, blocks, *, renormalize: bool = True) -> "StateVector":
        sectors = []
        parts = []
        offsets = []
        pos = 0
        for sector, amps in blocks:
            arr = np.asarray(amps, dtype=np.complex128).ravel()
            if arr.shape != (sector.dim,):
                raise StarError(
                    f"amplitude block of length {arr.size} does not match"
                    f" sector {sector.tag} of dim {sector.dim}"
                )
            sectors.append(sector)
            parts.append(arr)
            offsets.append(pos)
            pos += sector.dim
        if not parts:
            raise StarError("a state needs at least one sector block")
        vec = np.concatenate(parts)
        if renormalize:
            nrm = float(np.linalg.norm(vec))
            if nrm == 0.0:
                raise StarError("cannot normalize a zero vector")
            vec = vec / nrm
        return cls(
            sectors=tuple(sectors), amps=vec, offsets=tuple(offsets),
            normalized=renormalize,
        )

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def n_blocks(self) -> int:
        return len(self.sectors)

    def block(self, i: int) -> np.ndarray:
        """View of block i's amplitudes."""
        start = self.offsets[i]
        return self.amps[start:start + self.sectors[i].dim]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def require_single(self) -> tuple[BasisSector, np.ndarray]:
        if len(self.sectors) != 1:
            raise StarError(f"expected a single-sector state, got {len(self.sectors)} blocks")
        return self.sectors[0], self.amps

    def copy(self) -> "StateVector":
        return StateVector(
            sectors=self.sectors, amps=self.amps.copy(),
            offsets=self.offsets, normalized=self.normalized,
        )
