"""
Full-correlation tensor of GHZ-diagonal states and the Hilbert-Schmidt bound
on the correlation Bell condition.

Only two families of Pauli tuples survive on a diagonal/antidiagonal state:
the all-z tuple, and tuples built from x and y alone. For the latter, with y
on the qubits of mask Y, T = i^|Y| sum_s (-1)^(s.Y) rho[s, ~s], so the whole
family is one Walsh-Hadamard transform of the antidiagonal.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from common_utils import DomainError, bell_limit, brute_limit, check_size
from qfi import qfi_ghz_diagonal
from state_core import full_mask, ones, qubit_bit, to_dense

logger = logging.getLogger(__name__)

X, Y, Z = 1, 2, 3
PAULI = {
    X: np.array([[0, 1], [1, 0]], dtype=complex),
    Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Z: np.array([[1, 0], [0, -1]], dtype=complex),
}
NONZERO_CUTOFF = 1e-12


@dataclass(frozen=True)
class CorrelationTensorSummary:
    n: int
    nonzero_elements: dict = field(compare=False)
    hs_norm_sq: float
    bell_upper_bound_satisfied: bool


@dataclass(frozen=True)
class DetectionRow:
    n: int
    label: str
    f_q: Fraction
    f_q_over_n: Fraction
    hs_norm_sq: float
    xy_plane_sum: float
    lower_bound: float
    verdict: str
    xy_verdict: str


def check_tuple(n, indices):
    indices = tuple(int(k) for k in indices)
    if len(indices) != n or any(k not in PAULI for k in indices):
        raise DomainError(f"Pauli tuple must have {n} entries from (1, 2, 3), got {indices}")
    return indices


def walsh_hadamard(values):
    """Unnormalised transform: out[Y] = sum_s (-1)^popcount(s & Y) values[s]."""
    a = np.array(values)
    h = 1
    while h < len(a):
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0, :] + a[:, 1, :], a[:, 0, :] - a[:, 1, :]), axis=1).reshape(-1)
        h *= 2
    return a


def _partner_index(n):
    s = np.arange(1 << n, dtype=np.int64)
    return np.minimum(s, full_mask(n) - s)


def _even_masks(n):
    y = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros_like(y)
    for b in range(n):
        parity ^= (y >> b) & 1
    return parity == 0


def _y_sign(y_count):
    return -1 if (y_count // 2) % 2 else 1


def z_correlation(state):
    """Exact all-z element; zero for odd n."""
    if state.n % 2:
        return Fraction(0)
    return sum((-1 if ones(i) % 2 else 1) * s for i, s in enumerate(state.sums))


def xy_transform(state, exact=False):
    """G[Y] = sum_s (-1)^(s.Y) rho[s, ~s] for every mask Y, float or exact."""
    canon_index = _partner_index(state.n)
    if exact:
        scale, _, diffs = state.scaled_tables()
        g = diffs.astype(object)[canon_index]
        return walsh_hadamard(g), 2 * scale
    diffs = np.array([float(v) for v in state.diffs]) / 2
    return walsh_hadamard(diffs[canon_index]), 1


def pauli_expectation(state, indices):
    n = state.n
    indices = check_tuple(n, indices)
    if all(k == Z for k in indices):
        return float(z_correlation(state))
    if Z in indices:
        return 0.0
    y_mask = sum(qubit_bit(n, q) for q, k in enumerate(indices, start=1) if k == Y)
    y_count = ones(y_mask)
    if y_count % 2:
        return 0.0
    s = np.arange(1 << n, dtype=np.int64)
    signs = np.where(np.array([ones(v) for v in (s & y_mask)]) % 2, -1.0, 1.0)
    diffs = np.array([float(v) for v in state.diffs]) / 2
    return _y_sign(y_count) * float(np.dot(signs, diffs[_partner_index(n)]))


def xy_plane_sum(state, exact=False):
    """Correlation sum with x and y measured on every qubit."""
    check_size(state.n, bell_limit(), 'Correlation tensor')
    g, scale = xy_transform(state, exact)
    even = g[_even_masks(state.n)]
    if exact:
        return Fraction(sum(int(v) * int(v) for v in even), scale * scale)
    return math.fsum(even * even)


def hs_norm_sq(state, exact=False):
    """||T||^2_HS over all 3^n full-correlation tuples."""
    z = z_correlation(state)
    if exact:
        return xy_plane_sum(state, exact=True) + z * z
    return math.fsum([xy_plane_sum(state), float(z) ** 2])


def correlation_lower_bound(state):
    """
    Best of three feasible local-basis choices for the correlation sum:
    x/y on every qubit, x/z on every qubit, y/z on every qubit.
    """
    g, _ = xy_transform(state)
    z = float(z_correlation(state))
    last = full_mask(state.n)
    y_all = _y_sign(state.n) * g[last] if state.n % 2 == 0 else 0.0
    return max(xy_plane_sum(state), g[0] ** 2 + z * z, y_all ** 2 + z * z)


def _mask_tuple(n, y_mask):
    return tuple(Y if y_mask & qubit_bit(n, q) else X for q in range(1, n + 1))


def tensor_summary(state):
    n = state.n
    check_size(n, bell_limit(), 'Correlation tensor')
    g, _ = xy_transform(state)
    elements = {}
    for y_mask in np.flatnonzero(_even_masks(n)):
        value = _y_sign(ones(int(y_mask))) * float(g[y_mask])
        if abs(value) > NONZERO_CUTOFF:
            elements[_mask_tuple(n, int(y_mask))] = value
    z = float(z_correlation(state))
    if abs(z) > NONZERO_CUTOFF:
        elements[(Z,) * n] = z
    hs = hs_norm_sq(state)
    return CorrelationTensorSummary(n, elements, hs, hs <= 1)


def brute_force_tensor(state):
    """All 3^n elements from dense traces."""
    n = state.n
    check_size(n, brute_limit(), 'Brute-force correlation tensor')
    rho = to_dense(state).astype(complex)
    elements = {}
    for indices in itertools.product((X, Y, Z), repeat=n):
        op = reduce(np.kron, [PAULI[k] for k in indices])
        value = float(np.real(np.sum(op * rho.T)))
        if abs(value) > NONZERO_CUTOFF:
            elements[indices] = value
    hs = math.fsum(v * v for v in elements.values())
    return CorrelationTensorSummary(n, elements, hs, hs <= 1)


def tensor_deviation(state):
    fast = tensor_summary(state).nonzero_elements
    slow = brute_force_tensor(state).nonzero_elements
    keys = set(fast) | set(slow)
    return max((abs(fast.get(key, 0.0) - slow.get(key, 0.0)) for key in keys), default=0.0)


def _verdict(qfi_detects, bell_detects):
    if bell_detects is None:
        return 'QFI detection, Bell undecided' if qfi_detects else 'undecided'
    if qfi_detects and bell_detects:
        return 'both'
    if qfi_detects:
        return 'QFI-only detection'
    if bell_detects:
        return 'Bell-only'
    return 'neither'


def detection_comparison(state, f_q=None):
    """
    QFI detects when F_Q > n. The correlation condition is violated when a
    feasible lower bound exceeds 1 and certainly holds when ||T||^2_HS < 1.
    """
    n = state.n
    f_q = qfi_ghz_diagonal(state) if f_q is None else f_q
    hs = hs_norm_sq(state)
    xy = xy_plane_sum(state)
    lower = correlation_lower_bound(state)
    qfi_detects = f_q > n
    if lower > 1:
        bell_detects = True
    elif hs < 1:
        bell_detects = False
    else:
        bell_detects = None
    row = DetectionRow(
        n=n,
        label=state.label,
        f_q=f_q,
        f_q_over_n=Fraction(f_q) / n,
        hs_norm_sq=hs,
        xy_plane_sum=xy,
        lower_bound=lower,
        verdict=_verdict(qfi_detects, bell_detects),
        xy_verdict=_verdict(qfi_detects, xy > 1),
    )
    logger.debug(f"{state.label}: F_Q/n = {float(row.f_q_over_n):.6f}, ||T||^2 = {hs:.6f} -> {row.verdict}")
    return row
