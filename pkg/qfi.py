"""
Quantum Fisher information for phase estimation with the generator
Z = (sigma_z^(1) + ... + sigma_z^(n)) / 2.

Closed forms are exact Fractions; the spectral formula works on a dense
eigendecomposition and serves as the oracle for them.
"""
import math
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from common_utils import (
    CrossCheckError, DomainError, NormalizationError, check_size, dense_limit,
)
from state_core import FamilyParams, binom_normalizer, check_n, to_dense, weight

logger = logging.getLogger(__name__)

SUPPORT_CUTOFF = 1e-12
SPECTRAL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PhaseGenerator:
    n: int

    @property
    def diagonal(self):
        r = np.arange(1 << self.n)
        pop = np.zeros_like(r)
        for b in range(self.n):
            pop += (r >> b) & 1
        return (self.n - 2 * pop) / 2.0


@dataclass(frozen=True)
class QfiReport:
    n: int
    k: int
    f_q: Fraction
    snl_ratio: Fraction
    bound_nk: Fraction
    s_nk: Fraction
    m: int = 0
    a: Fraction = None
    bound_nkm: Fraction = None
    ratio_quadratic: Fraction = None
    ratio_bound_quadratic: Fraction = None
    verdict: str = ''

    def as_row(self):
        return {
            'n': self.n, 'k': self.k, 'm': self.m, 'a': self.a,
            'f_q': self.f_q, 'snl_ratio': self.snl_ratio,
            'bound_13': self.bound_nk, 'bound_25': self.bound_nkm, 's_nk': self.s_nk,
            'ratio_paper15': self.ratio_quadratic,
            'ratio_13asymptotic': self.ratio_bound_quadratic,
            'verdict': self.verdict,
        }


def qfi_spectral(eigenvalues, eigenvectors, generator):
    """F_Q = 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|Z|j>|^2 over the support."""
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    vecs = np.asarray(eigenvectors)
    if abs(lam.sum() - 1.0) > SPECTRAL_TOLERANCE:
        raise NormalizationError(f"Spectrum sums to {lam.sum():.17g}, expected 1")
    gram = vecs.conj().T @ vecs
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) > SPECTRAL_TOLERANCE:
        raise DomainError("Eigenvectors are not orthonormal")
    z = vecs.conj().T @ (generator.diagonal[:, None] * vecs)
    total = lam[:, None] + lam[None, :]
    diff = lam[:, None] - lam[None, :]
    support = total > SUPPORT_CUTOFF
    terms = np.zeros_like(total)
    terms[support] = diff[support] ** 2 / total[support] * np.abs(z[support]) ** 2
    return float(2.0 * terms.sum())


def qfi_dense(state):
    check_size(state.n, dense_limit(), 'Spectral QFI')
    eigenvalues, eigenvectors = np.linalg.eigh(to_dense(state))
    return qfi_spectral(eigenvalues, eigenvectors, PhaseGenerator(state.n))


def qfi_ghz_diagonal(state):
    """sum_i w_i^2 (l_i^+ - l_i^-)^2 / (l_i^+ + l_i^-), empty sectors skipped."""
    total = Fraction(0)
    for i, (s, d) in enumerate(zip(state.sums, state.diffs)):
        if s:
            total += weight(state.n, i) ** 2 * d * d / s
    return total


def _coherent_sum(n, k):
    return sum((n - 2 * j) ** 2 * math.comb(n, j) for j in range(k))


def qfi_closed_nk(n, k):
    FamilyParams(n, k).validate()
    return binom_normalizer(n, k) * _coherent_sum(n, k)


def qfi_closed_nkm(n, k, m):
    FamilyParams(n, k, m).validate()
    return binom_normalizer(n, k + m) * _coherent_sum(n, k)


def qfi_lower_bound_nk(n, k):
    """(n - 2k)^2 k / (n + 1)."""
    FamilyParams(n, k).validate()
    return Fraction((n - 2 * k) ** 2 * k, n + 1)


def qfi_lower_bound_nkm(n, k, m):
    """
    (n-2k)^2 k(k+1)...(k+m) / [m (n-k)(n-k-1)...(n-k-m)] for m >= 1, products taken
    literally. It is not a valid lower bound once 2(k+m) > n; see bound_nkm_deviations.
    """
    FamilyParams(n, k, m).validate()
    if m < 1:
        raise DomainError(f"The rho_{{n,k,m}} bound needs m >= 1, got m = {m}")
    rising = math.prod(range(k, k + m + 1))
    falling = math.prod(n - k - t for t in range(m + 1))
    return Fraction((n - 2 * k) ** 2 * rising, m * falling)


def s_nk(n, k):
    return Fraction(
        sum(math.comb(n, j) for j in range(k)),
        sum(math.comb(n, j) for j in range(k + 1)),
    )


def s_nk_inverse_bound(n, k):
    """True when 1/S_{n,k} <= (n+1)/k."""
    return 1 / s_nk(n, k) <= Fraction(n + 1, k)


def separability_test(f_q, n):
    return 'entangled' if f_q > n else 'inconclusive'


def k_for_ratio(n, a):
    """k = round-half-up(a n), clipped to [1, ceil(n/2) - 1]."""
    a = Fraction(a)
    if not 0 < a < Fraction(1, 2):
        raise DomainError(f"Scaling ratio a must lie in (0, 1/2), got {a}")
    upper = -(-n // 2) - 1
    if upper < 1:
        raise DomainError(f"No k < n/2 exists for n = {n}")
    k = math.floor(a * n + Fraction(1, 2))
    return min(max(k, 1), upper)


def qfi_report(n, k, m=0):
    f_q = qfi_closed_nkm(n, k, m) if m else qfi_closed_nk(n, k)
    bound_nkm = qfi_lower_bound_nkm(n, k, m) if m >= 1 else None
    return QfiReport(
        n=n, k=k, m=m,
        f_q=f_q,
        snl_ratio=f_q / n,
        bound_nk=None if m else qfi_lower_bound_nk(n, k),
        bound_nkm=bound_nkm,
        s_nk=s_nk(n, k),
        verdict=separability_test(f_q, n),
    )


def asymptotic_report(n, a):
    """
    Report for k = k(n) at ratio a. Only f_q >= bound_nk is enforced; both
    quadratic normalisations are reported as-is.
    """
    params = FamilyParams(n, k_for_ratio(n, a), a=Fraction(a)).validate()
    k, a = params.k, params.a
    f_q = qfi_closed_nk(n, k)
    bound_nk = qfi_lower_bound_nk(n, k)
    if bound_nk > f_q:
        raise CrossCheckError(f"Lower bound {bound_nk} exceeds F_Q {f_q} at n = {n}, k = {k}")
    return QfiReport(
        n=n, k=k, a=a,
        f_q=f_q,
        snl_ratio=f_q / n,
        bound_nk=bound_nk,
        s_nk=s_nk(n, k),
        ratio_quadratic=f_q / (a * (1 - 2 * a) * n * n),
        ratio_bound_quadratic=f_q / (a * (1 - 2 * a) ** 2 * n * n),
        verdict=separability_test(f_q, n),
    )


def nk_limit_ratio(n, k):
    return qfi_closed_nk(n, k) / (n * k)


def bound_nk_deviations(n_max):
    """(n, k) cells in 2 <= n <= n_max where f_q < (n-2k)^2 k/(n+1)."""
    return [
        (n, k) for n in range(2, n_max + 1) for k in range(1, n // 2 + 1)
        if qfi_closed_nk(n, k) < qfi_lower_bound_nk(n, k)
    ]


def bound_nkm_deviations(n_max):
    """(n, k, m, f_q, bound) for feasible cells (m >= 1, k + m <= n - k) where f_q < bound."""
    deviations = []
    for n in range(2, n_max + 1):
        for k in range(1, n // 2 + 1):
            for m in range(1, n - 2 * k + 1):
                bound = qfi_lower_bound_nkm(n, k, m)
                f_q = qfi_closed_nkm(n, k, m)
                if f_q < bound:
                    logger.debug(f"rho_{{{n},{k},{m}}}: f_q = {f_q} < {bound}")
                    deviations.append((n, k, m, f_q, bound))
    if deviations:
        logger.warning(f"rho_{{n,k,m}} bound fails in {len(deviations)} cells up to n = {n_max}")
    return deviations


def sublinear_report(n, c, eps):
    """Weak-PPT scaling: k = round(c n), m = floor(n^(1-eps)); f_q reported against n^(1+eps)."""
    c = Fraction(c)
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    check_n(n)
    k = max(1, math.floor(c * n + Fraction(1, 2)))
    m = max(1, math.floor(n ** (1 - float(eps))))
    f_q = qfi_closed_nkm(n, k, m)
    return {
        'n': n, 'k': k, 'm': m, 'c': c, 'eps': eps,
        'f_q': f_q,
        'bound_25': qfi_lower_bound_nkm(n, k, m),
        'snl_ratio': f_q / n,
        'scaling_ratio': float(f_q) / n ** (1 + float(eps)),
    }
