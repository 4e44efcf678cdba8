import csv
import json
import math
import re
from functools import lru_cache

import numpy as np

from .logger import logger


_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_FULL_LITERAL = re.compile(rf"^(?P<re>[+-]?{_NUMBER})(?P<im>[+-](?:{_NUMBER})?)[ij]$")
_REAL_LITERAL = re.compile(rf"^(?P<re>[+-]?{_NUMBER})$")
_IMAG_LITERAL = re.compile(rf"^(?P<im>[+-]?(?:{_NUMBER})?)[ij]$")


def _signed(digits):
    if digits in ("", "+", "-"):
        digits += "1"
    return float(digits)


def parse_complex(text):
    """
    Parses a complex literal of the form ``a+bi`` or ``a-bi``.

    Grammar (EBNF)::

        literal  = real ("+" | "-") [unsigned] "i" | real | [sign] [unsigned] "i"
        real     = [sign] unsigned
        unsigned = digits ["." [digits]] [exponent] | "." digits [exponent]
        exponent = ("e" | "E") [sign] digits

    Surrounding whitespace is ignored and ``j`` is accepted for ``i``.
    Args:
        text (str): The literal.
    Returns:
        complex: The parsed value.
    """
    stripped = "" if text is None else text.strip()
    match = _FULL_LITERAL.match(stripped)
    if match:
        return complex(float(match.group("re")), _signed(match.group("im")))
    match = _REAL_LITERAL.match(stripped)
    if match:
        return complex(float(match.group("re")), 0.0)
    match = _IMAG_LITERAL.match(stripped)
    if match:
        return complex(0.0, _signed(match.group("im")))
    raise ValueError(f"invalid complex literal: {text!r}")


def format_complex(value, digits=15):
    """
    Renders a complex value with the given number of significant digits.
    Purely real values are printed without an imaginary part.
    """
    value = complex(value)
    if value.imag == 0.0:
        return f"{value.real:.{digits}g}"
    return f"{value.real:.{digits}g}{value.imag:+.{digits}g}i"


@lru_cache(maxsize=16)
def prime_sieve(pmax):
    """
    Sieve of Eratosthenes.
    Args:
        pmax (int): Largest candidate, at least 2.
    Returns:
        numpy.ndarray: All primes <= pmax in ascending order (read-only).
    """
    pmax = int(pmax)
    if pmax < 2:
        raise ValueError(f"prime_sieve needs pmax >= 2, got {pmax}")

    is_prime = np.ones(pmax + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(pmax) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    primes = np.flatnonzero(is_prime)
    primes.setflags(write=False)
    logger.debug(f"Sieved {primes.size} primes up to {pmax}.")
    return primes


def write_csv(path, header, rows):
    """
    Writes rows to a CSV file with a one-line header. Floats are written with
    repr so that reruns are byte-identical.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(cell)) if isinstance(cell, (float, np.floating)) else cell for cell in row])
    logger.debug(f"Wrote {path}.")


def write_metadata(path, payload):
    """Writes a metadata sidecar as indented, key-sorted JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")
    logger.debug(f"Wrote metadata sidecar {path}.")
