"""
Special functions from first principles: Gamma (Lanczos), digamma (series
with an Euler-Maclaurin tail), zeta (Euler-Maclaurin), Riemann's xi and its
contour derivatives, and the truncated zero sums and products of xi.

Every public function takes and returns Python complex scalars except
``xi_array``, which works elementwise on numpy arrays. Non-finite results are
never returned; they raise DomainError instead.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    CAUCHY_NODES,
    CAUCHY_RADIUS,
    DIGAMMA_TAIL_WEIGHTS,
    EULER_GAMMA,
    EULER_MACLAURIN_WEIGHTS,
    HALF_LN_2PI,
    LANCZOS_COEFFICIENTS,
    LANCZOS_G,
    LN_PI,
    MAX_HEIGHT,
    SINGULARITY_DISTANCE,
    ZETA_MIN_TERMS,
    ZETA_TERMS_PER_HEIGHT,
)
from .errors import DomainError, PoleError, SingularityError
from .logger import logger
from .utils import prime_sieve


@dataclass(frozen=True)
class TruncationConfig:
    """
    Truncation of every infinite sum and product.

    m counts conjugate zero pairs, pmax and mmax bound the prime-power sums,
    nmax bounds the digamma-type series.
    """

    m: int = 32
    pmax: int = 100_000
    mmax: int = 40
    nmax: int = 1000

    def __post_init__(self):
        if self.m < 1 or self.pmax < 2 or self.mmax < 1 or self.nmax < 1:
            raise DomainError(
                f"Invalid truncation: m={self.m}, pmax={self.pmax}, mmax={self.mmax}, nmax={self.nmax}"
            )


_LANCZOS = np.array(LANCZOS_COEFFICIENTS)
_ANGLES = 2.0 * np.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
_UNIT = np.exp(1j * _ANGLES)
_UNIT_INV = np.conj(_UNIT)
_UNIT_INV2 = _UNIT_INV * _UNIT_INV


def _is_nonpositive_integer(z):
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _finite(value, name, argument):
    if not cmath.isfinite(value):
        raise DomainError(f"{name} is not finite at {argument}")
    return value


def _log_gamma_lanczos(z):
    """log Gamma(z) for Re z >= 1/2; works on scalars and arrays."""
    z = np.asarray(z, dtype=complex) - 1.0
    series = _LANCZOS[0]
    for k in range(1, _LANCZOS.size):
        series = series + _LANCZOS[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return HALF_LN_2PI + (z + 0.5) * np.log(t) - t + np.log(series)


def gamma(z):
    """
    Gamma function by the Lanczos approximation (g=7, n=9).
    Args:
        z (complex): Argument, not a nonpositive integer.
    Returns:
        complex: Gamma(z).
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at z={z.real:g}")
    if z.real < 0.5:
        # reflection formula
        return _finite(math.pi / (cmath.sin(math.pi * z) * gamma(1.0 - z)), "gamma", z)
    return _finite(complex(np.exp(_log_gamma_lanczos(z))), "gamma", z)


def digamma(z, cfg=None):
    """
    Digamma function from its series
    psi(z) = -gamma + sum_{n>=0} (1/(n+1) - 1/(n+z)).

    The series is summed directly up to n = nmax (extended past 2|z| when
    needed) and the remainder is added in closed form: its integral
    ln((M+z)/(M+1)) plus Euler-Maclaurin corrections through B_20.
    Args:
        z (complex): Argument, not a nonpositive integer.
        cfg (TruncationConfig): Supplies nmax.
    Returns:
        complex: psi(z).
    """
    cfg = cfg or TruncationConfig()
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at z={z.real:g}")

    last = max(cfg.nmax, int(2.0 * abs(z)) + 32)
    n = np.arange(last + 1, dtype=float)
    partial = complex(np.sum(1.0 / (n + 1.0) - 1.0 / (n + z)))

    start = last + 1.0
    tail = cmath.log((start + z) / (start + 1.0)) + 0.5 * (1.0 / (start + 1.0) - 1.0 / (start + z))
    for k, weight in enumerate(DIGAMMA_TAIL_WEIGHTS, start=1):
        tail += weight * ((start + 1.0) ** (-2 * k) - (start + z) ** (-2 * k))

    return _finite(-EULER_GAMMA + partial + tail, "digamma", z)


def _zeta_terms(height):
    return max(ZETA_MIN_TERMS, math.ceil(ZETA_TERMS_PER_HEIGHT * height))


def _zeta_euler_maclaurin(w):
    """
    Euler-Maclaurin split of zeta for Re w >= 1/2.
    Returns:
        tuple: (regular, pole) with zeta(w) = regular + pole / (w - 1).
    """
    w = np.asarray(w, dtype=complex)
    n_terms = _zeta_terms(float(np.max(np.abs(w.imag), initial=0.0)))
    log_n = np.log(np.arange(1, n_terms, dtype=float))
    direct = np.exp(-np.multiply.outer(w, log_n)).sum(axis=-1)

    n_pow = np.exp(-w * math.log(n_terms))  # N^-w
    regular = direct + 0.5 * n_pow
    rising = w
    power = n_pow / n_terms
    for k, weight in enumerate(EULER_MACLAURIN_WEIGHTS, start=1):
        regular = regular + weight * rising * power
        rising = rising * (w + 2 * k - 1) * (w + 2 * k)
        power = power / (n_terms * n_terms)
    return regular, n_pow * n_terms


def zeta(s):
    """
    Riemann zeta function.

    Euler-Maclaurin with N = max(25, ceil(1.3 |Im s|)) terms for Re s >= 1/2;
    for Re s < 1/2 the value is recovered from xi(1 - s).
    """
    s = complex(s)
    if s == 1.0:
        raise PoleError("pole at s=1")
    if s.real >= 0.5:
        regular, pole = _zeta_euler_maclaurin(s)
        return _finite(complex(regular + pole / (s - 1.0)), "zeta", s)
    if s.imag == 0.0 and s.real < 0.0 and s.real % 2.0 == 0.0:
        return 0j
    prefactor = (s - 1.0) * gamma(0.5 * s + 1.0) * cmath.exp(-0.5 * s * LN_PI)
    return _finite(xi(1.0 - s) / prefactor, "zeta", s)


def xi_array(s):
    """
    Riemann xi on a numpy array of points.

    Evaluates xi(w) = (w - 1) Gamma(w/2 + 1) pi^(-w/2) zeta(w) with
    w = s or 1 - s, whichever has Re w >= 1/2. The identity
    s Gamma(s/2) = 2 Gamma(s/2 + 1) removes the 0 * inf at s = 0, and
    (w - 1) zeta(w) is formed from the Euler-Maclaurin split so s = 1 needs no
    special case.
    """
    s = np.asarray(s, dtype=complex)
    w = np.where(s.real < 0.5, 1.0 - s, s)
    if np.any(np.abs(w.imag) > MAX_HEIGHT):
        raise DomainError(f"xi evaluation above |Im s| = {MAX_HEIGHT:g} is not supported")

    regular, pole = _zeta_euler_maclaurin(w)
    with np.errstate(over="ignore", invalid="ignore"):
        prefactor = np.exp(_log_gamma_lanczos(0.5 * w + 1.0) - 0.5 * w * LN_PI)
        value = prefactor * ((w - 1.0) * regular + pole)
    if not np.all(np.isfinite(value)):
        raise DomainError("xi overflows double precision on the requested points")
    return value


def xi(s):
    """Riemann xi at a single point."""
    return complex(xi_array(complex(s)))


def xi_unreflected(s):
    """
    xi evaluated at s itself for -1 <= Re s < 1/2: the Euler-Maclaurin sum is
    continued below 1/2 and Gamma(s/2 + 1) keeps Re >= 1/2.

    ``xi_array`` never evaluates there (it reflects to 1 - s), so the two
    agree only through the functional equation.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s.real < -1.0) or np.any(s.real >= 0.5) or np.any(np.abs(s.imag) > MAX_HEIGHT):
        raise DomainError("xi_unreflected needs -1 <= Re s < 1/2 and |Im s| <= 200")
    regular, pole = _zeta_euler_maclaurin(s)
    gamma_factor = np.array([gamma(0.5 * point + 1.0) for point in s])
    value = gamma_factor * np.exp(-0.5 * s * LN_PI) * ((s - 1.0) * regular + pole)
    if not np.all(np.isfinite(value)):
        raise DomainError("xi overflows double precision on the requested points")
    return value


def cauchy_derivative(func, s, order=1, radius=CAUCHY_RADIUS, nodes=CAUCHY_NODES, vectorized=False):
    """
    order!/(2 pi i) * contour integral of f(z)/(z - s)^(order+1) on a circle,
    discretised by the periodic trapezoid rule.
    Args:
        func (callable): Holomorphic function of one complex variable.
        s (complex): Centre of the contour.
        order (int): Derivative order.
        radius (float): Contour radius.
        nodes (int): Number of trapezoid nodes.
        vectorized (bool): Whether func accepts a numpy array of points.
    Returns:
        complex: The derivative estimate.
    """
    unit = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    points = complex(s) + radius * unit
    if vectorized:
        values = np.asarray(func(points), dtype=complex)
    else:
        values = np.array([func(complex(point)) for point in points], dtype=complex)
    return complex(math.factorial(order) * np.mean(values * unit ** (-order)) / radius ** order)


def xi_jet(s):
    """
    Returns (xi(s), xi'(s), xi''(s)) from one vectorised evaluation: the
    point itself and the 64 contour nodes shared by both derivatives.
    """
    s = complex(s)
    points = np.concatenate(([s], s + CAUCHY_RADIUS * _UNIT))
    values = xi_array(points)
    ring = values[1:]
    first = np.mean(ring * _UNIT_INV) / CAUCHY_RADIUS
    second = 2.0 * np.mean(ring * _UNIT_INV2) / CAUCHY_RADIUS ** 2
    return complex(values[0]), complex(first), complex(second)


def xi_derivative(s, order=1):
    """
    First or second derivative of xi by the Cauchy integral on a circle of
    radius 0.25 with 64 nodes.
    """
    if order not in (1, 2):
        raise DomainError(f"xi_derivative supports order 1 or 2, got {order}")
    return xi_jet(s)[order]


def zeta_log_derivative(s, cfg=None, formal=False):
    """
    Partial sum -sum_{p <= pmax, m <= mmax} ln p * p^(-m s) of zeta'/zeta.
    Args:
        s (complex): Point with Re s > 1 unless formal is set.
        cfg (TruncationConfig): Supplies pmax and mmax.
        formal (bool): Allow Re s <= 1, where the series diverges and only
            the partial sum is meaningful.
    Returns:
        complex: The partial sum.
    """
    cfg = cfg or TruncationConfig()
    s = complex(s)
    if s.real <= 1.0 and not formal:
        raise DomainError(f"zeta'/zeta prime sum diverges at Re s = {s.real:g}; pass formal=True")

    log_p = np.log(prime_sieve(cfg.pmax).astype(float))
    powers = np.arange(1, cfg.mmax + 1, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = log_p * np.exp(-s * np.multiply.outer(powers, log_p))
        total = -complex(terms.sum())
    return _finite(total, "zeta_log_derivative", s)


def _conjugate_pairs(q, catalogue, cfg):
    rho = catalogue.rhos(cfg.m)
    rho_bar = np.conj(rho)
    nearest = min(np.min(np.abs(q - rho)), np.min(np.abs(q - rho_bar)))
    return rho, rho_bar, nearest


def xi_log_derivative_via_zeros(q, catalogue, cfg=None):
    """
    sum_n 1/(q - rho_n) over the first m conjugate pairs, each pair combined
    into (2q - rho - conj(rho)) / ((q - rho)(q - conj(rho))).
    """
    cfg = cfg or TruncationConfig()
    q = complex(q)
    rho, rho_bar, nearest = _conjugate_pairs(q, catalogue, cfg)
    if nearest < SINGULARITY_DISTANCE:
        raise SingularityError(f"q={q} coincides with a catalogued zero")
    terms = (2.0 * q - rho - rho_bar) / ((q - rho) * (q - rho_bar))
    return complex(terms.sum())


def xi_hadamard_truncated(q, catalogue, cfg=None):
    """
    xi(0) * prod_n (1 - q/rho_n) over the first m conjugate pairs; each pair
    enters as (rho - q)(conj(rho) - q) / (rho conj(rho)).
    """
    cfg = cfg or TruncationConfig()
    q = complex(q)
    rho = catalogue.rhos(cfg.m)
    rho_bar = np.conj(rho)
    factors = (rho - q) * (rho_bar - q) / (rho * rho_bar).real
    value = xi(0.0) * complex(np.prod(factors))
    logger.debug(f"Hadamard product with {cfg.m} pairs at q={q}: {value}")
    return value
