"""
Phase-estimation simulation for GHZ-diagonal states under U = exp(-i theta Z).

Two measurements are modelled:
  global-parity  measure X^(x)n, outcomes +1 / -1
  sector-parity  project onto span{|i>, |~i>}, then onto |phi_i^+->, outcomes (i, +/-)
"""
import math
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import chi2

from common_utils import (
    DomainError, SingularPointError, check_size, dense_limit, rng_algorithm,
)
from qfi import PhaseGenerator, qfi_ghz_diagonal
from state_core import full_mask, ghz_basis_vector, to_dense, weight

logger = logging.getLogger(__name__)

GLOBAL_PARITY = 'global-parity'
SECTOR_PARITY = 'sector-parity'
MODELS = (GLOBAL_PARITY, SECTOR_PARITY)

ZERO_PROBABILITY = 1e-14
ZERO_DERIVATIVE = 1e-12
GRID_POINTS = 401
MLE_XATOL = 1e-8
MIN_SHOTS = 100

BIT_GENERATORS = {
    'philox': np.random.Philox,
    'pcg64': np.random.PCG64,
}


@dataclass(frozen=True)
class PhaseSetting:
    n: int
    theta: float

    @property
    def generator(self):
        return PhaseGenerator(self.n)

    def unitary_diagonal(self):
        """Diagonal of exp(-i theta Z) in the computational basis."""
        return np.exp(-1j * self.theta * self.generator.diagonal)


@dataclass(frozen=True)
class MeasurementModel:
    name: str

    def __post_init__(self):
        if self.name not in MODELS:
            raise DomainError(f"Unknown measurement model {self.name!r}; choose from {', '.join(MODELS)}")


@dataclass(frozen=True)
class EvolvedState:
    n: int
    theta: float
    sums: np.ndarray = field(compare=False)
    coherences: np.ndarray = field(compare=False)

    def to_dense(self):
        n = self.n
        check_size(n, dense_limit(), 'Dense evolved state')
        reps = np.arange(len(self.sums))
        comps = full_mask(n) - reps
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        rho[reps, reps] = self.sums / 2
        rho[comps, comps] = self.sums / 2
        rho[reps, comps] = self.coherences
        rho[comps, reps] = np.conj(self.coherences)
        return rho


@dataclass(frozen=True)
class ProbabilityTable:
    outcomes: tuple
    probabilities: np.ndarray = field(compare=False)
    derivatives: np.ndarray = field(compare=False)

    def as_dict(self):
        return dict(zip(self.outcomes, self.probabilities.tolist()))


@dataclass
class EstimationRun:
    state_label: str
    n: int
    model: str
    theta_true: float
    shots: int
    repetitions: int
    seed: int
    rng: str
    bracket: tuple
    estimates: tuple
    mean_estimate: float
    empirical_std: float
    crlb: float
    fisher_classical: float
    fisher_quantum: float
    degenerate_repetitions: tuple = ()

    def std_interval(self, confidence=0.999):
        return std_confidence_interval(self.empirical_std, self.repetitions, confidence)

    def crlb_respected(self, confidence=0.999):
        """True unless the sampled deviation is confidently below the bound."""
        return self.std_interval(confidence)[1] >= self.crlb

    def to_dict(self):
        payload = asdict(self)
        payload['std_interval_95'] = list(self.std_interval(0.95))
        return payload


def _sector_data(state):
    sums = np.array([float(v) for v in state.sums])
    diffs = np.array([float(v) for v in state.diffs])
    weights = np.array([weight(state.n, i) for i in range(state.size)], dtype=float)
    return sums, diffs, weights


def evolve(state, theta):
    """Sector coherences (l^+ - l^-)/2 rotated by exp(-i theta w_i); diagonal untouched."""
    sums, diffs, weights = _sector_data(state)
    return EvolvedState(state.n, float(theta), sums, diffs / 2 * np.exp(-1j * theta * weights))


def evolve_dense(state, theta):
    check_size(state.n, dense_limit(), 'Dense evolution')
    phases = PhaseSetting(state.n, theta).unitary_diagonal()
    rho = to_dense(state)
    return phases[:, None] * rho * np.conj(phases)[None, :]


def _fringe(sums, diffs, weights, theta):
    """(s + d cos x)/2 and (s - d cos x)/2 with their theta-derivatives, in half-angle form."""
    x = weights * theta
    mag = np.abs(diffs)
    sgn = np.sign(diffs)
    floor = sums - mag
    cos_sq = np.cos(x / 2) ** 2
    sin_sq = np.sin(x / 2) ** 2
    # 1 + sgn cos x and 1 - sgn cos x
    up = np.where(sgn >= 0, 2 * cos_sq, 2 * sin_sq)
    down = np.where(sgn >= 0, 2 * sin_sq, 2 * cos_sq)
    plus = (floor + mag * up) / 2
    minus = (floor + mag * down) / 2
    d_plus = -diffs * weights * np.sin(x) / 2
    return plus, minus, d_plus, -d_plus


def _probabilities(sectors, theta, name):
    plus, minus, d_plus, d_minus = _fringe(*sectors, theta)
    if name == GLOBAL_PARITY:
        return (
            np.array([math.fsum(plus), math.fsum(minus)]),
            np.array([math.fsum(d_plus), math.fsum(d_minus)]),
        )
    return (
        np.column_stack((plus, minus)).reshape(-1),
        np.column_stack((d_plus, d_minus)).reshape(-1),
    )


def outcome_distribution(state, theta, model):
    model = model if isinstance(model, MeasurementModel) else MeasurementModel(model)
    probabilities, derivatives = _probabilities(_sector_data(state), theta, model.name)
    if model.name == GLOBAL_PARITY:
        outcomes = (+1, -1)
    else:
        outcomes = tuple((i, sign) for i in range(state.size) for sign in (+1, -1))
    return ProbabilityTable(outcomes, probabilities, derivatives)


def outcome_distribution_dense(state, theta, model):
    """Born-rule probabilities on the dense evolved matrix."""
    model = model if isinstance(model, MeasurementModel) else MeasurementModel(model)
    rho = evolve_dense(state, theta)
    if model.name == GLOBAL_PARITY:
        parity = float(np.real(np.trace(np.fliplr(rho))))
        return np.array([(1 + parity) / 2, (1 - parity) / 2])
    probabilities = []
    for i in range(state.size):
        for sign in (+1, -1):
            vec = ghz_basis_vector(state.n, i, sign)
            probabilities.append(float(np.real(vec @ rho @ vec)))
    return np.array(probabilities)


def classical_fisher(state, theta, model):
    """sum_mu (dP/dtheta)^2 / P; outcomes with P = dP = 0 are dropped."""
    table = outcome_distribution(state, theta, model)
    total = []
    for outcome, p, dp in zip(table.outcomes, table.probabilities, table.derivatives):
        if p <= ZERO_PROBABILITY:
            if abs(dp) <= ZERO_DERIVATIVE:
                continue
            raise SingularPointError(
                f"Outcome {outcome} has P = {p:.3g} with dP/dtheta = {dp:.3g} at theta = {theta:.17g}")
        total.append(dp * dp / p)
    return math.fsum(total)


def derivative_check(state, theta, model, step=1e-5):
    """Max |analytic - central finite difference| over outcome derivatives."""
    analytic = outcome_distribution(state, theta, model).derivatives
    upper = outcome_distribution(state, theta + step, model).probabilities
    lower = outcome_distribution(state, theta - step, model).probabilities
    return float(np.max(np.abs(analytic - (upper - lower) / (2 * step))))


def std_confidence_interval(std, repetitions, confidence=0.95):
    """Chi-square interval for the true deviation given a sample std with R-1 dof."""
    dof = repetitions - 1
    tail = (1 - confidence) / 2
    low = std * math.sqrt(dof / chi2.ppf(1 - tail, dof))
    high = std * math.sqrt(dof / chi2.ppf(tail, dof))
    return low, high


def mle_bracket(state, theta_true):
    """Half period of the fastest coherent sector that contains theta_true."""
    _, diffs, weights = _sector_data(state)
    active = np.abs(weights[diffs != 0])
    active = active[active > 0]
    if active.size == 0:
        raise DomainError(f"{state.label or 'State'} carries no phase information")
    w_max = float(active.max())
    half_period = math.pi / w_max
    m = math.floor(theta_true / half_period)
    return m * half_period, (m + 1) * half_period


def make_generator(child):
    return np.random.Generator(BIT_GENERATORS[rng_algorithm()](child))


def _log_likelihood(sectors, name, counts, theta):
    probabilities, _ = _probabilities(sectors, theta, name)
    observed = counts > 0
    return float(np.dot(counts[observed], np.log(np.maximum(probabilities[observed], 1e-300))))


def _estimate(sectors, name, counts, bracket):
    grid = np.linspace(bracket[0], bracket[1], GRID_POINTS)
    values = np.array([_log_likelihood(sectors, name, counts, t) for t in grid])
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    peaks = np.flatnonzero((padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:]))
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, GRID_POINTS - 1)]
    result = minimize_scalar(
        lambda t: -_log_likelihood(sectors, name, counts, t),
        bounds=(lo, hi), method='bounded', options={'xatol': MLE_XATOL},
    )
    return float(result.x), len(peaks) > 1


def run_monte_carlo(state, theta_true, model, shots, repetitions, seed):
    """Repeated shot sampling with a bracketed maximum-likelihood estimate per repetition."""
    model = model if isinstance(model, MeasurementModel) else MeasurementModel(model)
    if shots < MIN_SHOTS:
        raise DomainError(f"shots must be >= {MIN_SHOTS}, got {shots}")
    if repetitions < 2:
        raise DomainError(f"repetitions must be >= 2, got {repetitions}")
    fisher = classical_fisher(state, theta_true, model)
    if fisher <= 0:
        raise DomainError(f"{model.name} carries no information at theta = {theta_true}")
    bracket = mle_bracket(state, theta_true)
    probabilities = outcome_distribution(state, theta_true, model).probabilities
    probabilities = np.clip(probabilities, 0.0, None)
    probabilities = probabilities / probabilities.sum()

    sectors = _sector_data(state)
    children = np.random.SeedSequence(seed).spawn(repetitions)
    estimates = []
    degenerate = []
    for index, child in enumerate(children):
        counts = make_generator(child).multinomial(shots, probabilities)
        estimate, is_degenerate = _estimate(sectors, model.name, counts, bracket)
        estimates.append(estimate)
        if is_degenerate:
            degenerate.append(index)
    if degenerate:
        logger.warning(f"Likelihood has several maxima in {len(degenerate)} of {repetitions} repetitions")

    estimates = np.array(estimates)
    run = EstimationRun(
        state_label=state.label,
        n=state.n,
        model=model.name,
        theta_true=float(theta_true),
        shots=shots,
        repetitions=repetitions,
        seed=seed,
        rng=rng_algorithm(),
        bracket=bracket,
        estimates=tuple(estimates.tolist()),
        mean_estimate=float(estimates.mean()),
        empirical_std=float(estimates.std(ddof=1)),
        crlb=1.0 / math.sqrt(shots * fisher),
        fisher_classical=fisher,
        fisher_quantum=float(qfi_ghz_diagonal(state)),
        degenerate_repetitions=tuple(degenerate),
    )
    logger.info(f"{state.label} {model.name}: std = {run.empirical_std:.6g}, crlb = {run.crlb:.6g}")
    return run
