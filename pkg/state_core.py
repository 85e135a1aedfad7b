"""
GHZ-diagonal states: representative indexing, the rho_{n,k} and rho_{n,k,m}
families, dense realisations and JSON serialisation.

A state is stored as two tables over representative indices i < 2^(n-1):
lambda_plus[i] and lambda_minus[i], the eigenvalues on |phi_i^+> and
|phi_i^->. Qubit q (1-based) is bit 1 << (n - q), so qubit 1 is the leftmost
bit of the n-bit string.
"""
import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import simplejson

from common_utils import (
    DomainError, NormalizationError, check_size, dense_limit, fraction_str,
    parse_fraction,
)

logger = logging.getLogger(__name__)

INT64_SAFE = 2 ** 62


# Bit helpers
def ones(x):
    return int(x).bit_count()


def full_mask(n):
    return (1 << n) - 1


def canon(n, r):
    """Representative of raw index r: min(r, 2^n - 1 - r)."""
    if not 0 <= r <= full_mask(n):
        raise DomainError(f"Index {r} out of range for n = {n}")
    return min(r, full_mask(n) - r)


def ones_class(n, r):
    """Ones count of the lighter string in {r, complement of r}."""
    c = ones(r)
    return min(c, n - c)


def qubit_bit(n, q):
    if not 1 <= q <= n:
        raise DomainError(f"Qubit {q} out of range 1..{n}")
    return 1 << (n - q)


def check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"Qubit count must be an integer >= 2, got {n!r}")


def check_rep(n, i):
    check_n(n)
    if not 0 <= i < (1 << (n - 1)):
        raise DomainError(f"Representative index {i} out of range [0, {(1 << (n - 1)) - 1}] for n = {n}")


def bitstring(n, r):
    return format(r, f'0{n}b')


def weight(n, i):
    """w_i = #0(i) - #1(i) over the n-bit representation of representative i."""
    check_rep(n, i)
    return n - 2 * ones(i)


def ghz_basis_vector(n, i, sign=+1):
    """(|i> + sign |~i>)/sqrt(2) as a dense column."""
    check_rep(n, i)
    if sign not in (+1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    check_size(n, dense_limit(), 'Dense vectors')
    vec = np.zeros(1 << n)
    vec[i] = 1.0 / math.sqrt(2.0)
    vec[full_mask(n) - i] = sign / math.sqrt(2.0)
    return vec


def binom_normalizer(n, k):
    """lambda = 1 / sum_{j<=k} C(n, j), exact."""
    if not 0 <= k <= n:
        raise DomainError(f"binom_normalizer needs 0 <= k <= n, got n = {n}, k = {k}")
    return Fraction(1, sum(math.comb(n, j) for j in range(k + 1)))


@dataclass(frozen=True)
class FamilyParams:
    n: int
    k: int
    m: int = 0
    a: Fraction = None

    def validate(self):
        check_n(self.n)
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got k = {self.k}")
        if self.m < 0:
            raise DomainError(f"m must be >= 0, got m = {self.m}")
        if self.k + self.m > self.n - self.k:
            raise DomainError(
                f"Need k + m <= n - k, got n = {self.n}, k = {self.k}, m = {self.m}")
        if self.a is not None and not 0 < self.a < Fraction(1, 2):
            raise DomainError(f"Scaling ratio a must lie in (0, 1/2), got {self.a}")
        return self

    @property
    def top(self):
        return self.k + self.m


@dataclass(frozen=True)
class GhzDiagonalState:
    n: int
    lambda_plus: tuple
    lambda_minus: tuple
    label: str = field(default='', compare=False)

    def __post_init__(self):
        check_n(self.n)
        half = 1 << (self.n - 1)
        if len(self.lambda_plus) != half or len(self.lambda_minus) != half:
            raise DomainError(f"Eigenvalue tables must have {half} entries for n = {self.n}")
        object.__setattr__(self, 'lambda_plus', tuple(Fraction(v) for v in self.lambda_plus))
        object.__setattr__(self, 'lambda_minus', tuple(Fraction(v) for v in self.lambda_minus))
        if any(v < 0 for v in self.lambda_plus + self.lambda_minus):
            raise DomainError("Eigenvalues must be nonnegative")
        total = sum(self.lambda_plus) + sum(self.lambda_minus)
        if total != 1:
            raise NormalizationError(f"Trace must be exactly 1, got {fraction_str(total)}")

    @property
    def size(self):
        return len(self.lambda_plus)

    @cached_property
    def sums(self):
        return tuple(p + m for p, m in zip(self.lambda_plus, self.lambda_minus))

    @cached_property
    def diffs(self):
        return tuple(p - m for p, m in zip(self.lambda_plus, self.lambda_minus))

    def swapped(self, sectors=None):
        """Copy with lambda^+ and lambda^- exchanged in the given sectors (all by default)."""
        sectors = range(self.size) if sectors is None else set(sectors)
        plus = list(self.lambda_plus)
        minus = list(self.lambda_minus)
        for i in sectors:
            plus[i], minus[i] = minus[i], plus[i]
        return GhzDiagonalState(self.n, tuple(plus), tuple(minus), self.label)

    def canonical(self):
        """Copy satisfying lambda^+ >= lambda^- in every sector."""
        return self.swapped(i for i in range(self.size) if self.lambda_plus[i] < self.lambda_minus[i])

    def spectrum(self):
        return sorted(self.lambda_plus + self.lambda_minus)

    def describe(self):
        pure_plus = mixed = empty = 0
        for p, m in zip(self.lambda_plus, self.lambda_minus):
            if p == 0 and m == 0:
                empty += 1
            elif p == m:
                mixed += 1
            elif m == 0 or p == 0:
                pure_plus += 1
            else:
                mixed += 1
        return {
            'n': self.n,
            'label': self.label,
            'trace': sum(self.sums),
            'pure_sectors': pure_plus,
            'mixed_sectors': mixed,
            'empty_sectors': empty,
        }

    def scaled_tables(self):
        """Sector sums and differences as integer arrays over a common denominator."""
        scale = math.lcm(*{v.denominator for v in self.lambda_plus + self.lambda_minus})
        sums = [int(v * scale) for v in self.sums]
        diffs = [int(v * scale) for v in self.diffs]
        dtype = np.int64 if 2 * scale < INT64_SAFE else object
        return scale, np.array(sums, dtype=dtype), np.array(diffs, dtype=dtype)


def _family_state(n, k, top, lo, hi, label):
    """Weight lambda per participating string: #1 < k, or lo <= #1 <= hi."""
    lam = binom_normalizer(n, top)
    half = 1 << (n - 1)
    plus = [Fraction(0)] * half
    minus = [Fraction(0)] * half
    for i in range(half):
        c = ones(i)
        members = sum(1 for x in (c, n - c) if x < k or lo <= x <= hi)
        if members == 0:
            continue
        if ones_class(n, i) < k:
            plus[i] = lam * members
        else:
            plus[i] = minus[i] = lam * members / 2
    try:
        state = GhzDiagonalState(n, tuple(plus), tuple(minus), label)
    except NormalizationError as e:
        raise NormalizationError(f"{label}: {e}")
    logger.debug(f"Built {label} with lambda = {fraction_str(lam)}")
    return state


def build_rho_nk(n, k):
    """rho_{n,k}: lambda on classes #1 < k (coherent), lambda/2 per sign on class k."""
    FamilyParams(n, k).validate()
    return _family_state(n, k, k, k, k, f"rho_{{{n},{k}}}")


def build_rho_nkm(n, k, m, mixing_range=None):
    """
    rho_{n,k,m}: coherent classes #1 < k plus mixed classes over the mixing
    range, with lambda' = 1/sum_{j<=k+m} C(n,j). The default range is k..k+m.
    An explicit range that does not give unit trace raises NormalizationError.
    """
    params = FamilyParams(n, k, m).validate()
    lo, hi = (k, k + m) if mixing_range is None else mixing_range
    if not k <= lo <= hi <= n - k:
        raise DomainError(f"Mixing range ({lo}, {hi}) must satisfy {k} <= lo <= hi <= {n - k}")
    return _family_state(n, k, params.top, lo, hi, f"rho_{{{n},{k},{m}}}")


def pure_ghz(n):
    check_n(n)
    half = 1 << (n - 1)
    plus = [Fraction(0)] * half
    plus[0] = Fraction(1)
    return GhzDiagonalState(n, tuple(plus), tuple([Fraction(0)] * half), f"GHZ_{n}")


def maximally_mixed(n):
    check_n(n)
    half = 1 << (n - 1)
    value = Fraction(1, 1 << n)
    return GhzDiagonalState(n, (value,) * half, (value,) * half, f"I/2^{n}")


def dephased_state(n, weights):
    """Sector weights split equally between signs; no antidiagonal coherence."""
    check_n(n)
    weights = [Fraction(w) for w in weights]
    return GhzDiagonalState(n, tuple(w / 2 for w in weights), tuple(w / 2 for w in weights), f"dephased_{n}")


def random_ghz_diagonal(n, rng, max_int=50, dephased=False, sparsity=0.0):
    """Random exact state: integer draws normalised to a Fraction table."""
    check_n(n)
    half = 1 << (n - 1)
    raw = rng.integers(0, max_int + 1, size=(2, half))
    if sparsity > 0:
        raw = raw * (rng.random(size=(2, half)) >= sparsity)
    if dephased:
        raw[1] = raw[0]
    total = int(raw.sum())
    if total == 0:
        raw[0, 0] = 1
        total = 1
    plus = tuple(Fraction(int(v), total) for v in raw[0])
    minus = tuple(Fraction(int(v), total) for v in raw[1])
    return GhzDiagonalState(n, plus, minus, f"random_{n}")


def to_dense(state):
    """2^n x 2^n float matrix with support on the diagonal and antidiagonal."""
    n = state.n
    check_size(n, dense_limit(), 'Dense matrices')
    dim = 1 << n
    reps = np.arange(state.size)
    comps = full_mask(n) - reps
    sums = np.array([float(v) for v in state.sums]) / 2
    diffs = np.array([float(v) for v in state.diffs]) / 2
    rho = np.zeros((dim, dim))
    rho[reps, reps] = sums
    rho[comps, comps] = sums
    rho[reps, comps] = diffs
    rho[comps, reps] = diffs
    return rho


def dense_entries(state):
    """Exact nonzero entries {(row, col): Fraction} of the dense realisation."""
    entries = {}
    n = state.n
    for i, (s, d) in enumerate(zip(state.sums, state.diffs)):
        j = full_mask(n) - i
        if s:
            entries[(i, i)] = entries[(j, j)] = s / 2
        if d:
            entries[(i, j)] = entries[(j, i)] = d / 2
    return entries


def state_to_dict(state):
    entries = [
        {'i': i, 'lp': fraction_str(p), 'lm': fraction_str(m)}
        for i, (p, m) in enumerate(zip(state.lambda_plus, state.lambda_minus))
        if p or m
    ]
    return {'n': state.n, 'entries': entries}


def to_json(state):
    return simplejson.dumps(state_to_dict(state), sort_keys=True)


def from_json(text):
    try:
        payload = simplejson.loads(text)
        n = int(payload['n'])
        entries = payload['entries']
    except (ValueError, KeyError, TypeError) as e:
        raise DomainError(f"Malformed state JSON: {e}")
    check_n(n)
    half = 1 << (n - 1)
    plus = [Fraction(0)] * half
    minus = [Fraction(0)] * half
    for entry in entries:
        i = int(entry['i'])
        check_rep(n, i)
        plus[i] = parse_fraction(entry['lp'])
        minus[i] = parse_fraction(entry['lm'])
    return GhzDiagonalState(n, tuple(plus), tuple(minus))
