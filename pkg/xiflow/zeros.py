"""
Zeros of xi on the critical line: scan, refinement, derived quantities and
the JSON-lines catalogue file.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import (
    DEFAULT_CATALOGUE_HEIGHT,
    DEFAULT_ZERO_TOLERANCE,
    MAX_HEIGHT,
    NEWTON_MAX_ITERATIONS,
    REALITY_TOLERANCE,
    SCAN_STEP,
)
from .errors import ConvergenceError, DomainError, FormatError
from .logger import logger
from .specfun import xi, xi_array, xi_derivative

_RECORD_KEYS = ("index", "re", "im", "xi_prime_re", "xi_prime_im", "period")


@dataclass(frozen=True)
class ZeroRecord:
    index: int
    rho: complex
    xi_prime: complex
    period: float


@dataclass(frozen=True)
class ZeroCatalogue:
    """Zeros ordered by height, together with the search parameters."""

    records: tuple = field(default_factory=tuple)
    tau_max: float = DEFAULT_CATALOGUE_HEIGHT
    tolerance: float = DEFAULT_ZERO_TOLERANCE

    def __len__(self):
        return len(self.records)

    def record(self, n):
        """Returns the n-th zero (1-based)."""
        if not 1 <= n <= len(self.records):
            raise DomainError(f"Zero #{n} is not in a catalogue of {len(self.records)} zeros.")
        return self.records[n - 1]

    def rhos(self, m):
        """Returns the first m zeros as a complex numpy array."""
        if m > len(self.records):
            raise DomainError(
                f"Truncation m={m} needs {m} zeros but the catalogue holds {len(self.records)} "
                f"(searched to height {self.tau_max:g})."
            )
        return np.array([record.rho for record in self.records[:m]], dtype=complex)

    def count_below(self, height):
        return sum(1 for record in self.records if record.rho.imag <= height)


def hardy_xi_real(tau):
    """
    Xi(tau) = xi(1/2 + i tau), real by the functional equation.
    Args:
        tau (float): Height on the critical line.
    Returns:
        float: The real part; a warning is logged if the imaginary part is
        not negligible.
    """
    value = xi(complex(0.5, tau))
    envelope = max(abs(value), math.exp(-0.25 * math.pi * abs(tau)))
    if abs(value.imag) > REALITY_TOLERANCE * envelope:
        logger.warning(f"xi(1/2 + {tau}i) has imaginary part {value.imag:.3e}; reality tolerance exceeded.")
    return value.real


def _hardy_xi_prime(tau):
    # d/dtau xi(1/2 + i tau) = i xi'(1/2 + i tau)
    return -xi_derivative(complex(0.5, tau)).imag


def riemann_von_mangoldt(height):
    """Smooth zero count (T/2pi) ln(T/(2 pi e)) + 7/8."""
    if height <= 0:
        return 0.0
    scaled = height / (2.0 * math.pi)
    return scaled * (math.log(scaled) - 1.0) + 0.875


def _scan_brackets(tau_max):
    taus = np.arange(0.0, tau_max + 0.5 * SCAN_STEP, SCAN_STEP)
    taus = taus[taus <= tau_max]
    values = xi_array(0.5 + 1j * taus).real
    signs = np.sign(values)
    changes = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    logger.debug(f"Scanned {taus.size} points up to {tau_max:g}: {changes.size} sign changes.")
    return [(float(taus[i]), float(taus[i + 1])) for i in changes]


def _refine_bracket(bracket, tol):
    low, high = bracket
    start = optimize.bisect(hardy_xi_real, low, high, xtol=1e-6)
    try:
        tau = optimize.newton(
            hardy_xi_real, start, fprime=_hardy_xi_prime, tol=tol, maxiter=NEWTON_MAX_ITERATIONS
        )
    except RuntimeError as e:
        raise ConvergenceError(f"Newton refinement failed in [{low}, {high}]: {e}") from e
    tau = float(tau)
    if not low - 0.5 * SCAN_STEP <= tau <= high + 0.5 * SCAN_STEP:
        raise ConvergenceError(f"Newton refinement left the bracket [{low}, {high}]: tau={tau}")
    logger.debug(f"Refined zero in [{low}, {high}] to tau={tau!r}.")
    return tau


def _make_record(index, tau):
    rho = complex(0.5, tau)
    xi_prime = xi_derivative(rho)
    return ZeroRecord(index=index, rho=rho, xi_prime=xi_prime, period=2.0 * math.pi / abs(xi_prime))


def locate_zeros(tau_max=DEFAULT_CATALOGUE_HEIGHT, tol=DEFAULT_ZERO_TOLERANCE, jobs=1):
    """
    Finds every zero 1/2 + i tau with 0 < tau <= tau_max.

    Sign changes of Xi on a grid of step 0.05 are bracketed, bisected and
    polished by Newton's method until the Newton step is below tol.
    Args:
        tau_max (float): Search height, at most 200.
        tol (float): Newton step tolerance, at least 1e-12.
        jobs (int): Worker processes for bracket refinement.
    Returns:
        ZeroCatalogue: The located zeros.
    """
    if not 0.0 < tau_max <= MAX_HEIGHT:
        raise DomainError(f"tau_max must lie in (0, {MAX_HEIGHT:g}], got {tau_max}")
    if tol < DEFAULT_ZERO_TOLERANCE:
        raise DomainError(f"tol must be at least {DEFAULT_ZERO_TOLERANCE:g}, got {tol}")

    brackets = _scan_brackets(tau_max)
    if jobs > 1 and len(brackets) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            taus = list(pool.map(_refine_bracket, brackets, [tol] * len(brackets)))
    else:
        taus = [_refine_bracket(bracket, tol) for bracket in brackets]

    records = tuple(_make_record(index, tau) for index, tau in enumerate(taus, start=1))
    catalogue = ZeroCatalogue(records=records, tau_max=float(tau_max), tolerance=float(tol))

    expected = riemann_von_mangoldt(tau_max)
    if abs(len(records) - expected) > 1.0:
        logger.warning(
            f"Found {len(records)} zeros below {tau_max:g}, smooth estimate is {expected:.2f}."
        )
    logger.info(f"Located {len(records)} zeros up to height {tau_max:g}.")
    return catalogue


def save_catalogue(catalogue, path):
    """
    Writes a catalogue as JSON lines: a header object followed by one object
    per zero. Floats are written with repr, so loading is bit-exact.
    """
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"tau_max": catalogue.tau_max, "tolerance": catalogue.tolerance}) + "\n")
        for record in catalogue.records:
            entry = {
                "index": record.index,
                "re": record.rho.real,
                "im": record.rho.imag,
                "xi_prime_re": record.xi_prime.real,
                "xi_prime_im": record.xi_prime.imag,
                "period": record.period,
            }
            handle.write(json.dumps(entry) + "\n")
    logger.info(f"Saved {len(catalogue)} zeros to {path}.")


def _parse_line(text, line_number):
    try:
        entry = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", line=line_number) from e
    if not isinstance(entry, dict):
        raise FormatError("expected a JSON object", line=line_number)
    return entry


def load_catalogue(path):
    """
    Reads a catalogue written by save_catalogue.
    Raises:
        FormatError: Empty file, malformed line, or records out of order.
        OSError: The file cannot be read.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise FormatError("empty catalogue file", line=1)

    header = _parse_line(lines[0], 1)
    if "tau_max" not in header or "tolerance" not in header:
        raise FormatError("header must carry tau_max and tolerance", line=1)

    records = []
    for line_number, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        entry = _parse_line(text, line_number)
        missing = [key for key in _RECORD_KEYS if key not in entry]
        if missing:
            raise FormatError(f"missing fields {missing}", line=line_number)
        record = ZeroRecord(
            index=int(entry["index"]),
            rho=complex(float(entry["re"]), float(entry["im"])),
            xi_prime=complex(float(entry["xi_prime_re"]), float(entry["xi_prime_im"])),
            period=float(entry["period"]),
        )
        if record.index != len(records) + 1:
            raise FormatError(f"expected index {len(records) + 1}, found {record.index}", line=line_number)
        if records and record.rho.imag <= records[-1].rho.imag:
            raise FormatError("zeros are not in increasing order of height", line=line_number)
        records.append(record)

    logger.debug(f"Loaded {len(records)} zeros from {path}.")
    return ZeroCatalogue(
        records=tuple(records), tau_max=float(header["tau_max"]), tolerance=float(header["tolerance"])
    )
