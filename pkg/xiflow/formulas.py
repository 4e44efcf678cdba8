"""
Closed-form identities of the xi Hamiltonian system, implemented without
reference to the integrators so that both can serve as each other's oracle.

Identities that only hold modulo 2 pi i are compared through exponentials,
never through differences of logarithms.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .constants import (
    BERNOULLI,
    CAUCHY_RADIUS,
    DEGENERACY_RATIO,
    EULER_GAMMA,
    LN_PI,
    SINGULARITY_DISTANCE,
)
from .errors import DegenerateZeroError, DomainError, SingularityError
from .logger import logger
from .specfun import TruncationConfig, xi, xi_derivative, xi_jet, xi_log_derivative_via_zeros
from .utils import prime_sieve, write_csv

__all__ = [
    "FlowMapDifferential",
    "SpectrumTable",
    "momentum_closed_form",
    "delta_p_closed_form",
    "flow_map_differential",
    "product_identity_residual",
    "pm_polynomial",
    "pm_momentum_root",
    "newton_time_reparam",
    "action",
    "orbit_period",
    "quantized_energies",
    "fluctuation_term",
    "prime_exponential_sum",
    "newton_flow_elementary_time",
    "log_derivative_tail_estimate",
    "product_tail_estimate",
    "prime_sieve",
]


@dataclass(frozen=True)
class FlowMapDifferential:
    """Lower-triangular 2x2 matrix sending (dq0, dp0) to (dq, dp)."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def apply(self, dq0, dp0):
        return self.m11 * dq0 + self.m12 * dp0, self.m21 * dq0 + self.m22 * dp0

    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21


@dataclass(frozen=True)
class SpectrumTable:
    zero_index: int
    rho: complex
    period: float
    frequency: float
    energies: Tuple[Tuple[int, float], ...]
    h: float = 1.0

    def to_csv(self, path):
        rows = [
            [self.zero_index, float(self.rho.imag), self.period, self.frequency, k, energy]
            for k, energy in self.energies
        ]
        write_csv(path, ["n", "rho_im", "period", "frequency", "k", "E"], rows)


def _xi_nonzero(q):
    value = xi(q)
    if value == 0:
        raise SingularityError(f"xi vanishes at q={q}")
    return value


def _finite(value, name):
    if not cmath.isfinite(value):
        raise SingularityError(f"{name} is not finite; q is too close to a zero of xi")
    return value


def momentum_closed_form(q0, p0, q):
    """p = p0 xi(q0) / xi(q), the conserved-energy solution for the momentum."""
    q0, q = complex(q0), complex(q)
    if q == q0:
        return complex(p0)
    return _finite(complex(p0) * xi(q0) / _xi_nonzero(q), "momentum")


def delta_p_closed_form(q0, p0, dq0, dp0, q, catalogue=None, cfg=None, spectral=False):
    """
    Momentum perturbation carried along the flow from q0 to q.

    Compact form: (p0 dq0 (xi'(q0) - xi'(q)) + xi(q0) dp0) / xi(q).
    With spectral=True the log-derivative xi'(q)/xi(q) is replaced by its
    truncated sum over zeros, which needs a catalogue.
    """
    q0, q = complex(q0), complex(q)
    p0, dq0, dp0 = complex(p0), complex(dq0), complex(dp0)
    if q == q0 and not spectral:
        return dp0
    xi_q0, xi_prime_q0, _ = xi_jet(q0)
    xi_q = _xi_nonzero(q)
    if spectral:
        if catalogue is None:
            raise DomainError("The spectral form needs a zero catalogue.")
        log_derivative = xi_log_derivative_via_zeros(q, catalogue, cfg)
        value = p0 * dq0 * (xi_prime_q0 / xi_q - log_derivative) + xi_q0 / xi_q * dp0
    else:
        value = (p0 * dq0 * (xi_prime_q0 - xi_derivative(q)) + xi_q0 * dp0) / xi_q
    return _finite(value, "delta p")


def flow_map_differential(q0, p0, q, catalogue=None, cfg=None, spectral=False):
    """
    M = [[xi(q)/xi(q0), 0], [m21, xi(q0)/xi(q)]] with the coupling entry
    m21 = p0 (xi'(q0) - xi'(q)) / xi(q), or in spectral form
    m21 = p0 xi'(q0)/xi(q) - sum_n p0/(q - rho_n) over m conjugate pairs.
    """
    q0, q, p0 = complex(q0), complex(q), complex(p0)
    xi_q0, xi_prime_q0, _ = xi_jet(q0)
    if xi_q0 == 0:
        raise SingularityError(f"xi vanishes at q0={q0}")
    xi_q, xi_prime_q, _ = xi_jet(q)
    if xi_q == 0:
        raise SingularityError(f"xi vanishes at q={q}")

    if spectral:
        if catalogue is None:
            raise DomainError("The spectral form needs a zero catalogue.")
        m21 = p0 * xi_prime_q0 / xi_q - p0 * xi_log_derivative_via_zeros(q, catalogue, cfg)
    else:
        m21 = p0 * (xi_prime_q0 - xi_prime_q) / xi_q
    m11 = xi_q / xi_q0
    return FlowMapDifferential(
        m11=_finite(m11, "m11"), m12=0j, m21=_finite(m21, "m21"), m22=_finite(1.0 / m11, "m22")
    )


def _pair_ratio(q, q0, rho):
    rho_bar = np.conj(rho)
    gap = min(np.min(np.abs(q0 - rho)), np.min(np.abs(q0 - rho_bar)))
    if gap < SINGULARITY_DISTANCE:
        raise SingularityError(f"q0={q0} coincides with a catalogued zero")
    return np.prod((q - rho) * (q - rho_bar) / ((q0 - rho) * (q0 - rho_bar)))


def product_identity_residual(q0, p0, q, p, catalogue, cfg=None):
    """
    prod_n (q - rho_n)/(q0 - rho_n) * p/p0 - 1 over m conjugate pairs.

    Vanishes in the m -> infinity limit exactly when (q, p) lies on the
    energy surface through (q0, p0).
    """
    cfg = cfg or TruncationConfig()
    q0, q, p0, p = complex(q0), complex(q), complex(p0), complex(p)
    if p0 == 0 or p == 0:
        raise SingularityError("momenta must be non-zero")
    ratio = 1.0 if q == q0 else _pair_ratio(q, q0, catalogue.rhos(cfg.m))
    return complex(ratio * p / p0 - 1.0)


def _normalised_product(q, rho):
    return complex(np.prod((q - rho) * (q - np.conj(rho)) / (rho * np.conj(rho)).real))


def pm_polynomial(q, p, q0, p0, catalogue, cfg=None, normalized=True):
    """
    P_m(q, p) = p prod_n (q - rho_n)(q - conj rho_n) - p0 prod_n (q0 - rho_n)(q0 - conj rho_n).

    By default both products are divided by prod_n |rho_n|^2 so that large m
    stays inside double range; the zero set is unchanged.
    """
    cfg = cfg or TruncationConfig()
    q, p, q0, p0 = complex(q), complex(p), complex(q0), complex(p0)
    rho = catalogue.rhos(cfg.m)
    if normalized:
        return p * _normalised_product(q, rho) - p0 * _normalised_product(q0, rho)
    rho_bar = np.conj(rho)
    with np.errstate(over="ignore", invalid="ignore"):
        left = complex(np.prod((q - rho) * (q - rho_bar)))
        right = complex(np.prod((q0 - rho) * (q0 - rho_bar)))
        value = p * left - p0 * right
    if not cmath.isfinite(value):
        raise DomainError(
            f"The raw P_m overflows double precision at m={cfg.m}; use normalized=True for large m."
        )
    return value


def pm_momentum_root(q, q0, p0, catalogue, cfg=None):
    """The momentum p with P_m(q, p) = 0."""
    cfg = cfg or TruncationConfig()
    rho = catalogue.rhos(cfg.m)
    denominator = _normalised_product(complex(q), rho)
    if denominator == 0:
        raise SingularityError(f"q={q} is a catalogued zero; P_m vanishes for every p")
    return complex(p0) * _normalised_product(complex(q0), rho) / denominator


def newton_time_reparam(q0, q, k=0):
    """
    Complex time T = ln xi(q0) - ln xi(q) + 2 pi i k reached by the Newton flow.

    Principal logarithms are used; k selects the sheet.
    """
    q0, q = complex(q0), complex(q)
    if q == q0:
        return complex(0.0, 2.0 * math.pi * k)
    return cmath.log(_xi_nonzero(q0)) - cmath.log(_xi_nonzero(q)) + complex(0.0, 2.0 * math.pi * k)


def _check_simple(zero):
    if zero.xi_prime == 0 or not math.isfinite(zero.period):
        raise DegenerateZeroError(f"Zero #{zero.index} has no finite period.")
    scale = abs(xi(zero.rho + CAUCHY_RADIUS)) / CAUCHY_RADIUS
    if abs(zero.xi_prime) < DEGENERACY_RATIO * scale:
        raise DegenerateZeroError(f"xi'(rho_{zero.index}) vanishes to working precision.")


def orbit_period(zero):
    """t* = 2 pi i / xi'(rho); real up to sign at a critical-line zero."""
    _check_simple(zero)
    return 2j * math.pi / zero.xi_prime


def action(q0, p0, zero):
    """
    Action of the periodic orbit through (q0, p0) around zero:
    S = H(q0, p0) t* = xi(q0) p0 2 pi / |xi'(rho)|.
    """
    p0 = complex(p0)
    if p0 == 0:
        return 0j
    return xi(q0) * p0 * zero.period


def quantized_energies(zero, k_range, h=1.0):
    """
    Spectrum E(k) = k h nu of the first-order operator on the orbit circle,
    nu = 1/t*.
    Args:
        zero (ZeroRecord): Zero whose orbit period sets nu.
        k_range (iterable): Quantum numbers.
        h (float): Planck parameter, dimensionless.
    Returns:
        SpectrumTable: One energy per k.
    """
    if h <= 0:
        raise DomainError(f"h must be positive, got {h}")
    _check_simple(zero)
    frequency = 1.0 / zero.period
    # E(k) = k * E(1) bit for bit
    unit = h / zero.period
    energies = tuple((int(k), k * unit) for k in k_range)
    return SpectrumTable(
        zero_index=zero.index, rho=zero.rho, period=zero.period, frequency=frequency, energies=energies, h=h
    )


def _prime_power_grid(cfg):
    log_p = np.log(prime_sieve(cfg.pmax).astype(float))
    powers = np.arange(1, cfg.mmax + 1, dtype=float)
    return log_p, powers


def fluctuation_term(sigma, tau, cfg=None, formal=False):
    """
    Partial sum -sum_{p, m} (1/m) p^(-m sigma) sin(m tau ln p), the imaginary
    part of ln zeta(sigma + i tau) from the Euler product.
    Args:
        sigma (float): Real part; sigma <= 1 requires formal=True.
        tau (float): Height.
        cfg (TruncationConfig): Supplies pmax and mmax.
        formal (bool): Accept the divergent regime and return the partial sum.
    """
    cfg = cfg or TruncationConfig()
    if sigma <= 1.0 and not formal:
        raise DomainError(f"The prime sum diverges at sigma={sigma:g}; pass formal=True for partial sums.")
    log_p, powers = _prime_power_grid(cfg)
    exponents = np.multiply.outer(powers, log_p)
    terms = np.exp(-sigma * exponents) * np.sin(tau * exponents) / powers[:, None]
    return -float(terms.sum())


def prime_exponential_sum(s, cfg=None, prime_sign=-1):
    """sum_{p, m} (1/m) exp(prime_sign * m s ln p); prime_sign=-1 gives ln zeta(s)."""
    cfg = cfg or TruncationConfig()
    if prime_sign not in (-1, 1):
        raise DomainError(f"prime_sign must be +1 or -1, got {prime_sign}")
    log_p, powers = _prime_power_grid(cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.exp(prime_sign * complex(s) * np.multiply.outer(powers, log_p)) / powers[:, None]
        total = complex(terms.sum())
    if not cmath.isfinite(total):
        raise DomainError(f"Prime exponential sum overflows at s={s} with prime_sign={prime_sign:+d}.")
    return total


def _gamma_series(s, s0, n_terms):
    """sum_{n>=0} ((s - s0)/(2n + 2) - ln(n + s/2) + ln(n + s0/2)) with an Euler-Maclaurin tail."""
    d = 0.5 * (s - s0)
    n = np.arange(n_terms, dtype=float)
    direct = np.sum(d / (n + 1.0) - np.log(n + 0.5 * s) + np.log(n + 0.5 * s0))

    x = float(n_terms)
    a, a0 = x + 0.5 * s, x + 0.5 * s0
    integral = -(d * cmath.log(x + 1.0) - a * cmath.log(a) + a0 * cmath.log(a0) + d)
    f = d / (x + 1.0) - cmath.log(a) + cmath.log(a0)
    f1 = -d / (x + 1.0) ** 2 - 1.0 / a + 1.0 / a0
    f3 = -6.0 * d / (x + 1.0) ** 4 - 2.0 / a ** 3 + 2.0 / a0 ** 3
    tail = (
        integral
        + 0.5 * f
        - BERNOULLI[2] / 2.0 * f1
        - BERNOULLI[4] / 24.0 * f3
    )
    return complex(direct) + tail


def newton_flow_elementary_time(s, s0, cfg=None, prime_sign=-1):
    """
    ln xi(s) - ln xi(s0) from elementary terms only:

        ln(s/s0) + ln((s-1)/(s0-1)) - (ln pi / 2)(s - s0) - (gamma/2)(s - s0)
        + sum_{p, n} (1/n)(exp(sign n s ln p) - exp(sign n s0 ln p))
        + sum_{n>=0} ((s - s0)/(2n+2) - ln(n + s/2) + ln(n + s0/2))

    exp of the result equals e^(-T) = xi(s)/xi(s0) for prime_sign=-1 and
    Re s, Re s0 > 1. prime_sign=+1 is the literal reading of the exponent in
    the prime sum; it overflows and raises DomainError.
    """
    cfg = cfg or TruncationConfig()
    s, s0 = complex(s), complex(s0)
    for point in (s, s0):
        if point in (0.0, 1.0) or (point.imag == 0 and point.real < 0 and point.real % 2 == 0):
            raise DomainError(f"s={point} is a pole of a component term")
    if s == s0:
        return 0j

    primes = prime_exponential_sum(s, cfg, prime_sign) - prime_exponential_sum(s0, cfg, prime_sign)
    value = (
        cmath.log(s / s0)
        + cmath.log((s - 1.0) / (s0 - 1.0))
        - 0.5 * LN_PI * (s - s0)
        - 0.5 * EULER_GAMMA * (s - s0)
        + primes
        + _gamma_series(s, s0, cfg.nmax)
    )
    logger.debug(f"Elementary time between {s0} and {s} (prime_sign={prime_sign:+d}): {value}")
    return value


def _tail_density_sum(height):
    # sum over zeros above height of 1/gamma^2, zero density ln(t/2pi)/(2pi)
    return (math.log(height / (2.0 * math.pi)) + 1.0) / (2.0 * math.pi * height)


def log_derivative_tail_estimate(q, catalogue, cfg=None):
    """Size of the zeros beyond the m-th pair in sum_n 1/(q - rho_n)."""
    cfg = cfg or TruncationConfig()
    height = catalogue.record(cfg.m).rho.imag
    return abs(2.0 * complex(q) - 1.0) * _tail_density_sum(height)


def product_tail_estimate(q, q0, catalogue, cfg=None):
    """
    Expected |product_identity_residual| left by dropping the pairs beyond the
    m-th: the missing factors multiply to about exp(shift S) with
    shift = (q - 1/2)^2 - (q0 - 1/2)^2 and S = sum of 1/gamma^2 above the
    m-th zero, so the truncated identity misses by exp(-shift S) - 1. The
    estimate grows like |Im q|^2; at m = 64 it stays below 1e-3 only while
    q and q0 lie within about 0.35 of 1/2.
    """
    cfg = cfg or TruncationConfig()
    height = catalogue.record(cfg.m).rho.imag
    shift = (complex(q) - 0.5) ** 2 - (complex(q0) - 0.5) ** 2
    return abs(cmath.exp(-shift * _tail_density_sum(height)) - 1.0)
