"""
Partial transposition of GHZ-diagonal states over qubit subsets.

Transposing the qubits in a mask S keeps the diagonal and moves the
antidiagonal entry of sector j to sector canon(j XOR S). Every PT spectrum is
therefore a table of 2x2 blocks solved in closed form.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from common_utils import (
    DomainError, check_size, dense_limit, subset_limit, subset_samples,
)
from state_core import canon, check_n, check_rep, full_mask, ones, qubit_bit, to_dense

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QubitSubset:
    n: int
    mask: int

    def __post_init__(self):
        check_n(self.n)
        if not 1 <= ones(self.mask) <= self.n - 1 or self.mask > full_mask(self.n):
            raise DomainError(f"Subset mask {self.mask:#x} must be a nonempty proper subset of {self.n} qubits")

    @classmethod
    def from_qubits(cls, n, qubits):
        mask = 0
        for q in qubits:
            mask |= qubit_bit(n, q)
        return cls(n, mask)

    @property
    def qubits(self):
        return tuple(q for q in range(1, self.n + 1) if self.mask & qubit_bit(self.n, q))

    @property
    def size(self):
        return ones(self.mask)

    def complement(self):
        return QubitSubset(self.n, full_mask(self.n) ^ self.mask)


@dataclass(frozen=True)
class OmegaSet:
    j: int
    members: frozenset


@dataclass(frozen=True)
class PtSpectrum:
    subset: QubitSubset
    pairs: tuple

    def values(self):
        return sorted(v for pair in self.pairs for v in pair)

    def min_eigenvalue(self):
        return min(min(pair) for pair in self.pairs)

    def is_positive(self):
        return self.min_eigenvalue() >= 0


@dataclass(frozen=True)
class PptCertificate:
    """Non-unlockable certificate: PPT under every single-qubit transposition."""
    holds: bool
    witness: tuple = None


@dataclass(frozen=True)
class CutRow:
    cut_size: int
    status: str
    witness_mask: int
    witness_qubits: tuple
    min_eigenvalue: Fraction
    subsets_checked: int
    exhaustive: bool


def transpose_partner(n, i, subset):
    check_rep(n, i)
    return canon(n, i ^ subset.mask)


def omega_set(n, j):
    """Sectors whose sums bound |lambda_j^+ - lambda_j^-| under single-qubit PT."""
    check_rep(n, j)
    return OmegaSet(j, frozenset(canon(n, j ^ qubit_bit(n, q)) for q in range(1, n + 1)))


def pt_spectrum(state, subset):
    if subset.n != state.n:
        raise DomainError(f"Subset is for n = {subset.n}, state has n = {state.n}")
    sums, diffs = state.sums, state.diffs
    pairs = []
    for i in range(state.size):
        j = canon(state.n, i ^ subset.mask)
        pairs.append(((sums[i] + diffs[j]) / 2, (sums[i] - diffs[j]) / 2))
    return PtSpectrum(subset, tuple(pairs))


def min_pt_eigenvalue(state, subset):
    return pt_spectrum(state, subset).min_eigenvalue()


def ppt_single_qubit_certificate(state):
    """
    Check min_{i in Omega_j} (lambda_i^+ + lambda_i^-) >= |lambda_j^+ - lambda_j^-|
    for every sector j. The witness is the first violating (j, i) pair.
    """
    sums, diffs = state.sums, state.diffs
    for j in range(state.size):
        if diffs[j] == 0:
            continue
        weakest = min(omega_set(state.n, j).members, key=lambda i: (sums[i], i))
        if sums[weakest] < abs(diffs[j]):
            return PptCertificate(False, (j, weakest))
    return PptCertificate(True)


def _mask_minimum(reps, full, sums, diffs, mask):
    x = reps ^ mask
    partners = np.minimum(x, full - x)
    return (sums - np.abs(diffs[partners])).min()


def _subset_masks(n, size, rng):
    limit = subset_limit()
    if n <= limit:
        for qubits in itertools.combinations(range(1, n + 1), size):
            yield qubits
        return
    samples = subset_samples()
    logger.warning(f"n = {n} exceeds subset limit {limit}; sampling {samples} subsets of size {size}")
    for _ in range(samples):
        yield tuple(sorted(int(q) for q in rng.choice(np.arange(1, n + 1), size=size, replace=False)))


def cut_classification(state, seed=0):
    """
    PPT/NPPT per cut size 1..n//2; a cut is NPPT if any subset of that size is.
    min_eigenvalue is the minimum over every subset scanned, the witness the subset attaining it.
    """
    n = state.n
    scale, sums, diffs = state.scaled_tables()
    reps = np.arange(state.size, dtype=np.int64)
    full = full_mask(n)
    rng = np.random.default_rng(seed)
    rows = []
    for size in range(1, n // 2 + 1):
        checked = 0
        lowest = None
        witness = None
        for qubits in _subset_masks(n, size, rng):
            subset = QubitSubset.from_qubits(n, qubits)
            value = int(_mask_minimum(reps, full, sums, diffs, subset.mask))
            checked += 1
            if lowest is None or value < lowest:
                lowest = value
                if value < 0:
                    witness = subset
        status = 'NPPT' if witness is not None else 'PPT'
        logger.debug(f"n = {n} cut {size}:{n - size} -> {status} after {checked} subsets")
        rows.append(CutRow(
            cut_size=size,
            status=status,
            witness_mask=witness.mask if witness else None,
            witness_qubits=witness.qubits if witness else None,
            min_eigenvalue=Fraction(lowest, 2 * scale),
            subsets_checked=checked,
            exhaustive=n <= subset_limit(),
        ))
    return rows


def pt_dense_oracle(state, subset):
    """Element-wise partial transpose of to_dense(state)."""
    n = state.n
    check_size(n, dense_limit(), 'Dense partial transpose')
    tensor = to_dense(state).reshape((2,) * (2 * n))
    for q in subset.qubits:
        tensor = np.swapaxes(tensor, q - 1, n + q - 1)
    return tensor.reshape(1 << n, 1 << n)


def oracle_deviation(state, subset):
    """Max |eigenvalue difference| between the dense oracle and pt_spectrum."""
    dense = np.linalg.eigvalsh(pt_dense_oracle(state, subset))
    fast = np.array([float(v) for v in pt_spectrum(state, subset).values()])
    return float(np.max(np.abs(np.sort(dense) - fast)))


def spectrum_complement_check(state, subset):
    return pt_spectrum(state, subset).values() == pt_spectrum(state, subset.complement()).values()
