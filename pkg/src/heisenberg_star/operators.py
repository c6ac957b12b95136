"""Sparse Hermitian operators resolved on one magnetization sector.

Every builder walks the sector basis once, emits COO triplets for the
action on each product state, and converts to CSR. Ladder terms are
emitted in both directions (the pair of adjoint terms appears
explicitly in each Hamiltonian), so Hermiticity holds by construction
and is asserted in tests rather than symmetrized after the fact.

Matrix elements follow the usual spin ladder weights. For the central
spin with ``S_m = S - c``:

    S+ |c> -> sqrt(c (two_S - c + 1)) |c - 1>
    S- |c> -> sqrt((two_S - c) (c + 1)) |c + 1>

and a spin-1/2 raise or lower on a ring site carries weight 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import BasisSector, ModelParams, StateVector
from .errors import ParameterError, SectorMismatch, StarError


@dataclass
class SparseOperator:
    """CSR matrix tagged with the sector it acts on."""

    sector: BasisSector
    matrix: sp.csr_matrix
    hermitian: bool = True

    @property
    def tag(self) -> str:
        return self.sector.tag

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    # raw CSR views, mostly for tests and debugging
    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def __repr__(self) -> str:
        return f"SparseOperator({self.tag}, dim={self.dim}, nnz={self.matrix.nnz})"


def _to_operator(sector: BasisSector, rows, cols, vals, hermitian=True) -> SparseOperator:
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.complex128),
         (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(sector.dim, sector.dim),
    )
    mat.sum_duplicates()
    mat.sort_indices()
    return SparseOperator(sector=sector, matrix=mat, hermitian=hermitian)


def build_bath_ring(sector: BasisSector, J: float, Jp: float) -> SparseOperator:
    """Ring Hamiltonian sum_n [J/2 (S+_n S-_{n+1} + h.c.) + Jp Sz_n Sz_{n+1}].

    The bond list runs n = 1..N with site N+1 identified with site 1,
    taken literally: for N = 2 the same pair of sites appears twice and
    the bond is counted twice on purpose.
    """
    N = sector.N
    bonds = [(n, (n + 1) % N) for n in range(N)]
    lookup = sector.lookup
    rows, cols, vals = [], [], []
    half_J = 0.5 * J
    quarter_Jp = 0.25 * Jp
    for i in range(sector.dim):
        c = int(sector.central[i])
        bits = int(sector.bits[i])
        base = c << N
        diag = 0.0
        for a, b in bonds:
            ba = (bits >> a) & 1
            bb = (bits >> b) & 1
            if ba == bb:
                diag += quarter_Jp
            else:
                diag -= quarter_Jp
                if half_J != 0.0:
                    flipped = bits ^ ((1 << a) | (1 << b))
                    j = lookup[base | flipped]
                    rows.append(j)
                    cols.append(i)
                    vals.append(half_J)
        if diag != 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(diag)
    return _to_operator(sector, rows, cols, vals)


def build_system_bath(sector: BasisSector, prefactor: float) -> SparseOperator:
    """Coupling prefactor * [ (S+ L- + S- L+)/2 + Sz Lz ] on a star sector."""
    if sector.is_bath:
        raise ParameterError("system-bath coupling needs a central spin in the sector")
    N = sector.N
    two_S = sector.two_S
    lookup = sector.lookup
    rows, cols, vals = [], [], []
    half = 0.5 * prefactor
    for i in range(sector.dim):
        c = int(sector.central[i])
        bits = int(sector.bits[i])
        n_up = int(sector.n_up[i])
        s_m = 0.5 * (two_S - 2 * c)
        l_m = 0.5 * (2 * n_up - N)
        diag = prefactor * s_m * l_m
        if diag != 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(diag)
        if half == 0.0:
            continue
        if c > 0:
            # S+ on the centre, one ring spin lowered
            w = half * np.sqrt(c * (two_S - c + 1))
            base = (c - 1) << N
            for a in range(N):
                if (bits >> a) & 1:
                    j = lookup[base | (bits ^ (1 << a))]
                    rows.append(j)
                    cols.append(i)
                    vals.append(w)
        if c < two_S:
            # S- on the centre, one ring spin raised
            w = half * np.sqrt((two_S - c) * (c + 1))
            base = (c + 1) << N
            for a in range(N):
                if not (bits >> a) & 1:
                    j = lookup[base | (bits | (1 << a))]
                    rows.append(j)
                    cols.append(i)
                    vals.append(w)
    return _to_operator(sector, rows, cols, vals)


def build_zeeman(sector: BasisSector, omega: float) -> SparseOperator:
    """Diagonal field omega * Sz on the central spin."""
    if sector.is_bath:
        raise ParameterError("the Zeeman term acts on the central spin")
    s_m = 0.5 * (sector.two_S - 2 * sector.central)
    diag = (omega * s_m).astype(np.complex128)
    mat = sp.diags(diag, format="csr")
    return SparseOperator(sector=sector, matrix=mat)


def build_L_squared(sector: BasisSector) -> SparseOperator:
    """Total ring angular momentum squared, as L- L+ + Lz (Lz + 1).

    Acts on the ring part only; the central level rides along
    untouched. The L- L+ route stays inside the sector: its diagonal
    counts the down spins and its off-diagonal part exchanges one up
    spin with one down spin.
    """
    N = sector.N
    lookup = sector.lookup
    rows, cols, vals = [], [], []
    for i in range(sector.dim):
        c = int(sector.central[i])
        bits = int(sector.bits[i])
        n_up = int(sector.n_up[i])
        l_m = 0.5 * (2 * n_up - N)
        diag = l_m * (l_m + 1.0) + (N - n_up)
        rows.append(i)
        cols.append(i)
        vals.append(diag)
        base = c << N
        up_sites = [a for a in range(N) if (bits >> a) & 1]
        down_sites = [b for b in range(N) if not (bits >> b) & 1]
        for a in up_sites:
            for b in down_sites:
                j = lookup[base | (bits ^ ((1 << a) | (1 << b)))]
                rows.append(j)
                cols.append(i)
                vals.append(1.0)
    return _to_operator(sector, rows, cols, vals)


def build_staggered(sector: BasisSector) -> SparseOperator:
    """Diagonal staggered magnetization (1/N) sum_j (-1)^j Sz_j, site 1 first.

    Odd sites enter with sign -1, so the alternating state with site 1
    down has expectation +1/2.
    """
    N = sector.N
    diag = np.empty(sector.dim, dtype=np.complex128)
    # sign of site j = i_bit + 1 is (-1)^(i_bit + 1)
    signs = np.array([-1.0 if (a % 2 == 0) else 1.0 for a in range(N)])
    for i in range(sector.dim):
        bits = int(sector.bits[i])
        total = 0.0
        for a in range(N):
            sz = 0.5 if (bits >> a) & 1 else -0.5
            total += signs[a] * sz
        diag[i] = total / N
    return SparseOperator(sector=sector, matrix=sp.diags(diag, format="csr"))


def build_star_hamiltonian(sector: BasisSector, params: ModelParams) -> SparseOperator:
    """Isotropic star J * H_ring + g * S.L with no central field."""
    if not params.isotropic:
        raise ParameterError("the plain star Hamiltonian requires J == Jp")
    if params.omega != 0.0:
        raise ParameterError("the plain star Hamiltonian carries no central field")
    ring = build_bath_ring(sector, params.J, params.Jp)
    coupling = build_system_bath(sector, params.g)
    return SparseOperator(sector=sector, matrix=(ring.matrix + coupling.matrix).tocsr())


def build_modified_star(sector: BasisSector, params: ModelParams) -> SparseOperator:
    """Driven star omega Sz + ring(J, Jp) + 2 g S.L.

    Note the literal factor two on the coupling; the anisotropic ring
    (Jp != J) is allowed here and breaks conservation of the total ring
    angular momentum.
    """
    ring = build_bath_ring(sector, params.J, params.Jp)
    coupling = build_system_bath(sector, 2.0 * params.g)
    mat = ring.matrix + coupling.matrix
    if params.omega != 0.0:
        mat = mat + build_zeeman(sector, params.omega).matrix
    return SparseOperator(sector=sector, matrix=mat.tocsr())


def apply(op: SparseOperator, state: StateVector) -> StateVector:
    """Matrix-vector product; the result is returned unnormalized."""
    sector, amps = state.require_single()
    if sector.tag != op.tag or sector.dim != op.dim:
        raise SectorMismatch(
            f"operator on {op.tag} (dim {op.dim}) applied to state on"
            f" {sector.tag} (dim {sector.dim})"
        )
    return StateVector(
        sectors=(sector,), amps=op.matrix @ amps,
        offsets=(0,), normalized=False,
    )


def expectation(op: SparseOperator, state: StateVector) -> float:
    """Real expectation value <psi|A|psi> of a Hermitian block operator."""
    sector, amps = state.require_single()
    if sector.tag != op.tag:
        raise SectorMismatch(f"operator on {op.tag}, state on {sector.tag}")
    return float(np.vdot(amps, op.matrix @ amps).real)


def expectation_blocks(ops, state: StateVector) -> float:
    """Sum of per-block expectations for a block-diagonal observable."""
    if len(ops) != state.n_blocks:
        raise StarError("need one operator per occupied sector")
    total = 0.0
    for i, op in enumerate(ops):
        if op.sector.tag != state.sectors[i].tag:
            raise SectorMismatch(
                f"block {i}: operator on {op.sector.tag},"
                f" state on {state.sectors[i].tag}"
            )
        x = state.block(i)
        total += float(np.vdot(x, op.matrix @ x).real)
    return total


def apply_bath_lowering(sector: BasisSector, amps: np.ndarray,
                        dst: BasisSector) -> np.ndarray:
    """Total ring lowering L- = sum_n S-_n, mapping n_up -> n_up - 1.

    Source and destination sectors must agree on N, two_S, and differ
    by two units of two_m. Each up bit is flipped down with weight 1.
    """
    if dst.N != sector.N or dst.two_S != sector.two_S or dst.two_m != sector.two_m - 2:
        raise SectorMismatch(f"cannot lower {sector.tag} into {dst.tag}")
    N = sector.N
    out = np.zeros(dst.dim, dtype=np.complex128)
    lookup = dst.lookup
    for i in range(sector.dim):
        a_i = amps[i]
        if a_i == 0:
            continue
        c = int(sector.central[i])
        bits = int(sector.bits[i])
        base = c << N
        for a in range(N):
            if (bits >> a) & 1:
                out[lookup[base | (bits ^ (1 << a))]] += a_i
    return out


def apply_total_lowering(sector: BasisSector, amps: np.ndarray,
                         dst: BasisSector) -> np.ndarray:
    """Total lowering S- + L- on a star sector, two_m -> two_m - 2."""
    out = apply_bath_lowering(sector, amps, dst)
    N = sector.N
    two_S = sector.two_S
    lookup = dst.lookup
    for i in range(sector.dim):
        a_i = amps[i]
        if a_i == 0:
            continue
        c = int(sector.central[i])
        if c >= two_S:
            continue
        bits = int(sector.bits[i])
        w = np.sqrt((two_S - c) * (c + 1))
        out[lookup[((c + 1) << N) | bits]] += w * a_i
    return out
