"""
Identity suites: every closed form checked against an independent numerical
oracle, each reported with its measured residual and declared threshold.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import DEFAULT_CATALOGUE_HEIGHT, TRUNCATION_LADDER
from .dynamics import (
    detect_closed_orbit_period,
    integrate_hamiltonian,
    integrate_newton_flow,
    integrate_variational,
)
from .errors import DomainError, XiFlowError
from .formulas import (
    flow_map_differential,
    fluctuation_term,
    momentum_closed_form,
    newton_flow_elementary_time,
    product_identity_residual,
    product_tail_estimate,
    quantized_energies,
)
from .logger import logger
from .specfun import TruncationConfig, xi, xi_array, xi_jet, xi_unreflected
from .utils import prime_sieve
from .zeros import hardy_xi_real, locate_zeros, riemann_von_mangoldt


@dataclass(frozen=True)
class SuiteResult:
    name: str
    residual: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationContext:
    """Shared inputs of the suites; the catalogue is located on first use."""

    catalogue: object = None
    seed: int = 20240101
    cache: dict = field(default_factory=dict)

    def zeros(self):
        if self.catalogue is None:
            self.catalogue = locate_zeros(DEFAULT_CATALOGUE_HEIGHT)
        return self.catalogue

    def rng(self):
        return np.random.default_rng(self.seed)

    def period(self, n, radius=0.01):
        key = (n, radius)
        if key not in self.cache:
            zero = self.zeros().record(n)
            self.cache[key] = detect_closed_orbit_period(zero.rho + radius, zero)
        return self.cache[key]


def _relative(a, b):
    return abs(a - b) / abs(b)


def _random_points(rng, count, re=(0.0, 1.0), im=(6.0, 12.0)):
    return rng.uniform(*re, count) + 1j * rng.uniform(*im, count)


def _unit_phases(rng, count):
    return np.exp(2j * math.pi * rng.uniform(0.0, 1.0, count))


def check_functional_equation(context):
    re = np.linspace(-2.0, 3.0, 40)
    im = np.linspace(-50.0, 50.0, 40)
    grid = re[None, :] + 1j * im[:, None]
    values = xi_array(grid)
    mirrored = xi_array(1.0 - grid)
    conjugated = xi_array(np.conj(grid))
    symmetry = np.max(np.abs(values - mirrored) / (1.0 + np.abs(values)))
    conjugation = np.max(np.abs(conjugated - np.conj(values)) / (1.0 + np.abs(values)))
    # left-half columns evaluated without reflection
    left = grid[:, (re >= -1.0) & (re < 0.5)]
    reference = xi_array(left)
    unreflected = np.max(np.abs(xi_unreflected(left.ravel()).reshape(left.shape) - reference) / (1.0 + np.abs(reference)))
    residual = float(max(symmetry, conjugation, unreflected))
    return SuiteResult(
        "functional_equation", residual, 1e-10, residual <= 1e-10,
        {"symmetry": float(symmetry), "conjugation": float(conjugation), "unreflected": float(unreflected)},
    )


def check_zeros(context):
    catalogue = locate_zeros(50.0)
    largest_xi = max(abs(xi(record.rho)) for record in catalogue.records)
    counts_ok = all(
        abs(catalogue.count_below(height) - riemann_von_mangoldt(height)) <= 1.0 for height in (30.0, 40.0, 50.0)
    )
    oracle = optimize.bisect(hardy_xi_real, 14.1, 14.2, xtol=1e-13)
    residual = abs(catalogue.record(1).rho.imag - oracle)
    passed = len(catalogue) == 10 and largest_xi <= 1e-10 and counts_ok and residual <= 1e-8
    return SuiteResult(
        "zeros", residual, 1e-8, passed,
        {"count": len(catalogue), "max_abs_xi": largest_xi, "counts_match_smooth_estimate": counts_ok},
    )


def check_hamiltonian(context):
    rng = context.rng()
    drift = 0.0
    for q0 in _random_points(rng, 10):
        energy = integrate_hamiltonian(q0, 1.0, 10.0, tol=1e-10).energy()
        drift = max(drift, float(np.max(np.abs(energy - energy[0]) / abs(energy[0]))))
    return SuiteResult("hamiltonian", drift, 1e-8, drift <= 1e-8, {"runs": 10})


def check_variational(context):
    rng = context.rng()
    worst = 0.0
    for q0, p0, dq0, dp0 in zip(
        _random_points(rng, 5), _unit_phases(rng, 5), _unit_phases(rng, 5), _unit_phases(rng, 5)
    ):
        trajectory = integrate_variational(q0, p0, dq0, dp0, 5.0, tol=1e-10)
        for state in trajectory.states:
            worst = max(worst, _relative(state.p * state.dq, p0 * dq0))
            worst = max(worst, _relative(state.p, momentum_closed_form(q0, p0, state.q)))
    return SuiteResult("variational", worst, 1e-8, worst <= 1e-8, {"runs": 5})


def check_flow_map(context):
    rng = context.rng()
    deviation, determinant = 0.0, 0.0
    for q0, p0, dq0, dp0 in zip(
        _random_points(rng, 20), _unit_phases(rng, 20), _unit_phases(rng, 20), _unit_phases(rng, 20)
    ):
        final = integrate_variational(q0, p0, dq0, dp0, 2.0, tol=1e-10).final
        matrix = flow_map_differential(q0, p0, final.q)
        predicted = np.array(matrix.apply(dq0, dp0))
        measured = np.array([final.dq, final.dp])
        deviation = max(deviation, float(np.linalg.norm(predicted - measured) / np.linalg.norm(measured)))
        determinant = max(determinant, abs(matrix.det() - 1.0))

    catalogue = context.zeros()
    q0 = catalogue.record(1).rho + 0.005
    value, first, _ = xi_jet(q0)
    scale = abs(first / value)
    ladder = [
        abs(flow_map_differential(q0, 1.0, q0, catalogue, TruncationConfig(m=m), spectral=True).m21)
        for m in TRUNCATION_LADDER
    ]
    monotone = all(a > b for a, b in zip(ladder, ladder[1:]))
    passed = deviation <= 1e-6 and determinant <= 1e-12 and monotone and ladder[-1] <= 1e-3 * scale
    return SuiteResult(
        "flow_map", deviation, 1e-6, passed,
        {"max_det_error": determinant, "m21_ladder": ladder, "m21_scale": scale},
    )


def _product_ladder(catalogue, q0, q):
    p = momentum_closed_form(q0, 1.0, q)
    return [abs(product_identity_residual(q0, 1.0, q, p, catalogue, TruncationConfig(m=m))) for m in (16, 32, 64)]


def check_product_identity(context):
    """
    Pairs within 1/4 of 1/2 must reach 1e-3 at m = 64. Pairs up to height 30
    are held to twice the truncation-tail estimate, which 1e-3 cannot meet.
    """
    catalogue = context.zeros()
    rng = context.rng()
    radius = 0.25 * np.sqrt(rng.uniform(0.0, 1.0, (2, 10)))
    angle = rng.uniform(0.0, 2.0 * math.pi, (2, 10))
    starts = 0.5 + radius[0] * np.exp(1j * angle[0])
    ends = 0.5 + radius[1] * np.exp(1j * angle[1])
    worst, monotone = 0.0, True
    for q0, q in zip(starts, ends):
        ladder = _product_ladder(catalogue, q0, q)
        monotone = monotone and all(a > b for a, b in zip(ladder, ladder[1:]))
        worst = max(worst, ladder[-1])

    tail_ratio = 0.0
    for q0, q in zip(_random_points(rng, 10, im=(0.0, 30.0)), _random_points(rng, 10, im=(0.0, 30.0))):
        ladder = _product_ladder(catalogue, q0, q)
        monotone = monotone and all(a > b for a, b in zip(ladder, ladder[1:]))
        estimate = product_tail_estimate(q, q0, catalogue, TruncationConfig(m=64))
        tail_ratio = max(tail_ratio, ladder[-1] / estimate)

    passed = monotone and worst <= 1e-3 and tail_ratio <= 2.0
    return SuiteResult(
        "product_identity", worst, 1e-3, passed,
        {"monotone": monotone, "max_residual_over_tail_estimate": tail_ratio},
    )


def check_periods(context):
    catalogue = context.zeros()
    gaps = {n: _relative(context.period(n), catalogue.record(n).period) for n in (1, 2, 3)}
    homotopy = _relative(context.period(1, 0.03), context.period(1, 0.01))
    worst = max(gaps.values())
    return SuiteResult(
        "periods", worst, 1e-3, worst <= 1e-3 and homotopy <= 1e-6,
        {"relative_gaps": gaps, "homotopy_gap": homotopy},
    )


def check_newton(context):
    s0 = context.zeros().record(1).rho + complex(0.2, 0.2)
    xi0 = xi(s0)
    worst, modulus = 0.0, 0.0
    for T_end in (3.0, 3j, complex(1.5, 2.0)):
        trajectory = integrate_newton_flow(s0, T_end, tol=1e-12)
        for state in trajectory.states:
            expected = xi0 * np.exp(-state.T)
            worst = max(worst, _relative(xi(state.q), expected))
            if T_end.real == 0.0:
                modulus = max(modulus, abs(abs(xi(state.q)) / abs(xi0) - 1.0))
    return SuiteResult(
        "newton", worst, 1e-7, worst <= 1e-7 and modulus <= 1e-7, {"imaginary_ray_modulus_drift": modulus}
    )


def check_spectrum(context):
    zero = context.zeros().record(1)
    table = quantized_energies(zero, range(0, 11), h=1.0)
    energies = dict(table.energies)
    ratio = max(abs(energies[k] / energies[1] - k) for k in range(1, 11))
    numeric = _relative(energies[1], 1.0 / context.period(1))
    passed = energies[0] == 0.0 and ratio <= 1e-12 and numeric <= 1e-3
    return SuiteResult("spectrum", ratio, 1e-12, passed, {"E1_vs_numeric_period": numeric})


def check_fluctuation(context):
    cfg = TruncationConfig(pmax=100_000, mmax=40)
    primes = prime_sieve(cfg.pmax).astype(float)
    discrepancy = 0.0
    for tau in (3.0, 14.134725, 27.5):
        s = complex(2.0, tau)
        resummed = sum(np.sum(primes ** (-m * s)) / m for m in range(1, cfg.mmax + 1))
        discrepancy = max(discrepancy, abs(fluctuation_term(2.0, tau, cfg) - resummed.imag))

    catalogue = context.zeros()
    heights = np.linspace(15.0, 50.0, 50)
    formal = TruncationConfig(pmax=10_000, mmax=3)
    partial = np.array([fluctuation_term(0.5, T, formal, formal=True) for T in heights])
    counting = np.array([catalogue.count_below(T) - riemann_von_mangoldt(T) for T in heights])
    correlation = float(np.corrcoef(partial, counting)[0, 1])
    passed = discrepancy <= 1e-12 and correlation >= 0.5
    return SuiteResult(
        "fluctuation", discrepancy, 1e-12, passed, {"pearson_r_critical_line": correlation}
    )


def check_prime_sign(context):
    s, s0 = complex(2.5, 1.0), complex(3.0, -0.5)
    oracle = xi(s) / xi(s0)
    residuals = {}
    for sign in (-1, 1):
        try:
            value = newton_flow_elementary_time(s, s0, TruncationConfig(), prime_sign=sign)
            residuals[sign] = _relative(np.exp(value), oracle)
        except DomainError as e:
            logger.debug(f"prime_sign={sign:+d} rejected: {e}")
            residuals[sign] = math.inf
    consistent = [sign for sign, residual in residuals.items() if residual <= 1e-4]
    best = min(residuals.values())
    return SuiteResult(
        "prime_sign", best, 1e-4, len(consistent) == 1,
        {"residuals": {f"{sign:+d}": r for sign, r in residuals.items()}, "consistent_sign": consistent},
    )


SUITES = {
    "functional_equation": check_functional_equation,
    "zeros": check_zeros,
    "hamiltonian": check_hamiltonian,
    "variational": check_variational,
    "flow_map": check_flow_map,
    "product_identity": check_product_identity,
    "periods": check_periods,
    "newton": check_newton,
    "spectrum": check_spectrum,
    "fluctuation": check_fluctuation,
    "prime_sign": check_prime_sign,
}


def run_verification(suite="all", catalogue=None, seed=20240101):
    """
    Runs one named suite or all of them.
    Returns:
        list: SuiteResult per suite; a suite that raises is reported as failed.
    """
    if suite != "all" and suite not in SUITES:
        raise DomainError(f"Unknown suite {suite!r}; choose from {', '.join(SUITES)} or 'all'.")
    context = VerificationContext(catalogue=catalogue, seed=seed)
    names = list(SUITES) if suite == "all" else [suite]
    results = []
    for name in names:
        try:
            result = SUITES[name](context)
        except XiFlowError as e:
            logger.error(f"Suite {name} raised {type(e).__name__}: {e}")
            result = SuiteResult(name, math.inf, 0.0, False, {"error": str(e)})
        status = "PASS" if result.passed else "FAIL"
        logger.info(f"{status} {name}: residual {result.residual:.3e} (threshold {result.threshold:.0e})")
        results.append(result)
    return results
