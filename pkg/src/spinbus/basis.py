"""Fixed-charge many-body basis and elementary operators.

The device holds three electrons in five dots: one electron delocalized
over the double-dot pair (D1, D2) and two electrons in the triple-dot
chain (T1, T2, T3), plus a single resonator mode truncated at ``n_r``
Fock levels.  The charge sector therefore factorizes as

    4 single-electron DQD states x 15 two-electron TQD states x n_r,

for a total dimension of 60 * n_r.

Fermionic operators are constructed internally on the full 2**10 Fock
space of the ten spin-orbitals (five dots x two spins) using a
Jordan-Wigner convention with mode order

    D1_up, D1_dn, D2_up, D2_dn, T1_up, T1_dn, T2_up, T2_dn, T3_up, T3_dn

and are then restricted to the fixed-charge sector.  Keeping the signs
on the unrestricted space removes any hand bookkeeping of fermionic
phases; the restriction happens once per basis build.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DOTS = ("D1", "D2", "T1", "T2", "T3")
SPINS = ("up", "dn")
DQD_DOTS = ("D1", "D2")
TQD_DOTS = ("T1", "T2", "T3")

N_MODES = len(DOTS) * len(SPINS)


class BasisError(ValueError):
    """Raised for invalid basis parameters."""


def mode_index(dot: str, spin: str) -> int:
    """Spin-orbital mode index in the fixed Jordan-Wigner ordering."""
    return 2 * DOTS.index(dot) + SPINS.index(spin)


def _apply_cdag(mode: int, mask: int, sign: int) -> tuple[int, int]:
    """Apply a creation operator to an occupation bitmask.

    States are defined as ``|n0 n1 ...> = (c0^dag)^n0 (c1^dag)^n1 ... |0>``
    so that ``c_m^dag`` picks up ``(-1)**(number of occupied modes below m)``.
    Returns ``(new_mask, new_sign)``; a Pauli-blocked application returns
    sign 0.
    """
    if mask & (1 << mode):
        return mask, 0
    parity = bin(mask & ((1 << mode) - 1)).count("1")
    return mask | (1 << mode), sign * (-1) ** parity


def _apply_c(mode: int, mask: int, sign: int) -> tuple[int, int]:
    """Apply an annihilation operator to an occupation bitmask."""
    if not mask & (1 << mode):
        return mask, 0
    parity = bin(mask & ((1 << mode) - 1)).count("1")
    return mask & ~(1 << mode), sign * (-1) ** parity


def dqd_labels() -> list[tuple[tuple[str, str], ...]]:
    """The four single-electron DQD states, in the documented order."""
    return [
        (("D1", "up"),),
        (("D1", "dn"),),
        (("D2", "up"),),
        (("D2", "dn"),),
    ]


def tqd_labels() -> list[tuple[tuple[str, str], ...]]:
    """The fifteen two-electron TQD states, in the documented order.

    Pairs across (T1, T3), then (T2, T3), then (T1, T2), each in spin
    order up-up, up-dn, dn-up, dn-dn, followed by the three
    doubly-occupied states.
    """
    labels: list[tuple[tuple[str, str], ...]] = []
    for pair in (("T1", "T3"), ("T2", "T3"), ("T1", "T2")):
        for s1 in SPINS:
            for s2 in SPINS:
                labels.append(((pair[0], s1), (pair[1], s2)))
    for dot in TQD_DOTS:
        labels.append(((dot, "up"), (dot, "dn")))
    return labels


@dataclass(frozen=True)
class BasisIndex:
    """Bijective labeling of the 60 * n_r dimensional charge sector.

    ``sector_masks[i]`` and ``sector_signs[i]`` give the occupation
    bitmask and fermionic sign of matter state ``i`` relative to the
    canonical mode-ordered creation string.  The flat index convention is
    ``flat = matter_index * n_r + fock_level`` (resonator fastest).
    """

    n_r: int
    dqd_states: tuple = field(repr=False)
    tqd_states: tuple = field(repr=False)
    sector_masks: tuple = field(repr=False)
    sector_signs: tuple = field(repr=False)

    @property
    def matter_dim(self) -> int:
        return len(self.dqd_states) * len(self.tqd_states)

    @property
    def total_dim(self) -> int:
        return self.matter_dim * self.n_r

    def matter_index(self, dqd: int, tqd: int) -> int:
        return dqd * len(self.tqd_states) + tqd

    def flat_index(self, dqd: int, tqd: int, fock: int) -> int:
        return self.matter_index(dqd, tqd) * self.n_r + fock


def _label_state(label: tuple[tuple[str, str], ...]) -> tuple[int, int]:
    """Bitmask and sign of a creation-operator product applied to vacuum.

    Operators are applied right-to-left, matching the written order
    ``c^dag_{a} c^dag_{b} |0>``.
    """
    mask, sign = 0, 1
    for dot, spin in reversed(label):
        mask, sign = _apply_cdag(mode_index(dot, spin), mask, sign)
    if sign == 0:
        raise BasisError(f"label {label} is Pauli-blocked")
    return mask, sign


def build_basis(n_r: int) -> BasisIndex:
    """Enumerate the fixed-charge basis for ``n_r`` resonator levels."""
    if not isinstance(n_r, (int, np.integer)) or n_r < 1:
        raise BasisError(f"n_r must be an integer >= 1, got {n_r!r}")
    dqd = dqd_labels()
    tqd = tqd_labels()
    masks = []
    signs = []
    for d in dqd:
        for t in tqd:
            mask, sign = _label_state(tuple(d) + tuple(t))
            masks.append(mask)
            signs.append(sign)
    if len(set(masks)) != len(masks):
        raise BasisError("sector enumeration produced duplicate states")
    return BasisIndex(
        n_r=int(n_r),
        dqd_states=tuple(dqd),
        tqd_states=tuple(tqd),
        sector_masks=tuple(masks),
        sector_signs=tuple(signs),
    )


def _sector_bilinear(basis: BasisIndex, terms) -> np.ndarray:
    """Matter-sector matrix of a sum of c^dag_i c_j terms.

    ``terms`` is an iterable of ``(coeff, mode_i, mode_j)`` representing
    ``coeff * c_i^dag c_j``.  Charge-sector-preserving terms only.
    """
    dim = basis.matter_dim
    index_of = {m: i for i, m in enumerate(basis.sector_masks)}
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, mi, mj in terms:
        for col, (mask, sgn) in enumerate(
            zip(basis.sector_masks, basis.sector_signs)
        ):
            m1, s1 = _apply_c(mj, mask, sgn)
            if s1 == 0:
                continue
            m2, s2 = _apply_cdag(mi, m1, s1)
            if s2 == 0:
                continue
            row = index_of.get(m2)
            if row is None:
                continue  # left the fixed-charge sector
            out[row, col] += coeff * s2 * basis.sector_signs[row]
    return out


def full_space_c(mode: int) -> np.ndarray:
    """Annihilation operator on the unrestricted 2**10 Fock space.

    Used by the operator-algebra tests; the Hamiltonian itself only ever
    sees sector-restricted bilinears.
    """
    dim = 1 << N_MODES
    out = np.zeros((dim, dim))
    for mask in range(dim):
        new, sgn = _apply_c(mode, mask, 1)
        if sgn:
            out[new, mask] = sgn
    return out


@dataclass(frozen=True)
class OperatorSet:
    """Dense matter-sector operators plus the resonator ladder pair.

    All matter operators are ``matter_dim x matter_dim``; promotion to the
    full ``60 n_r`` space goes through :meth:`embed_matter` /
    :meth:`embed_resonator`.  ``spin[dot]`` holds the Pauli-convention
    spin vector (S_z eigenvalues +-1 on singly occupied dots).
    """

    basis: BasisIndex
    number: dict = field(repr=False)
    spin: dict = field(repr=False)
    hop: dict = field(repr=False)
    a: np.ndarray = field(repr=False)
    a_dag: np.ndarray = field(repr=False)

    @property
    def n_phot(self) -> np.ndarray:
        return self.a_dag @ self.a

    def embed_matter(self, op: np.ndarray) -> np.ndarray:
        return np.kron(op, np.eye(self.basis.n_r))

    def embed_resonator(self, op: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.basis.matter_dim), op)

    def identity(self) -> np.ndarray:
        return np.eye(self.basis.total_dim)


@lru_cache(maxsize=8)
def build_operators(n_r: int) -> OperatorSet:
    """Construct all elementary operators for a given truncation.

    Deterministic: repeated builds with equal ``n_r`` are bit-identical
    (and cached).
    """
    basis = build_basis(n_r)
    number = {}
    spin = {}
    for dot in DOTS:
        up, dn = mode_index(dot, "up"), mode_index(dot, "dn")
        number[dot] = _sector_bilinear(basis, [(1.0, up, up), (1.0, dn, dn)])
        sx = _sector_bilinear(basis, [(1.0, up, dn), (1.0, dn, up)])
        sy = _sector_bilinear(basis, [(-1j, up, dn), (1j, dn, up)])
        sz = _sector_bilinear(basis, [(1.0, up, up), (-1.0, dn, dn)])
        spin[dot] = (sx, sy, sz)
    # hop[(i, j)] = sum_s c^dag_{i s} c_{j s}; the Eq.-style tunneling term
    # for coupling t on link (j -> i) is -(t * hop[(i, j)] + h.c.).
    hop = {}
    for di, dj in (("D2", "D1"), ("T2", "T1"), ("T3", "T2"), ("T1", "T3")):
        terms = [
            (1.0, mode_index(di, s), mode_index(dj, s)) for s in SPINS
        ]
        hop[(di, dj)] = _sector_bilinear(basis, terms)
    a = np.diag(np.sqrt(np.arange(1, n_r)), k=1) if n_r > 1 else np.zeros((1, 1))
    return OperatorSet(
        basis=basis,
        number=number,
        spin=spin,
        hop=hop,
        a=a,
        a_dag=a.conj().T,
    )
