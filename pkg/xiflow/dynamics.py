"""
Adaptive integration of the xi-flow, the complex-time Newton flow, the
Hamiltonian H = xi(q) p with its variational equations, and closed-orbit
period detection.

Complex states are carried as real vectors of doubled dimension
(``y.view(complex)``) and every flow is driven by ``scipy.integrate.solve_ivp``
with the PI-controlled Dormand-Prince solver below.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
from scipy import optimize
from scipy.integrate import RK45, solve_ivp
from scipy.integrate._ivp.rk import RungeKutta, rk_step

from .constants import (
    CENTER_RADIUS,
    MAX_FACTOR,
    MAX_STEP,
    MIN_FACTOR,
    MIN_STEP,
    ORBIT_STEPS_PER_PERIOD,
    RETURN_TIME_FACTOR,
    SAFETY,
    SECANT_TOLERANCE,
    SEPARATRIX_RATIO,
)
from .errors import (
    ConvergenceError,
    DomainError,
    NoReturnError,
    SeparatrixSingularity,
    StepSizeUnderflow,
)
from .logger import logger
from .specfun import xi, xi_array, xi_jet
from .utils import write_csv

MIN_TOLERANCE = 1e-13
MAX_TOLERANCE = 1e-4

# PI controller exponents for a pair whose error estimate is of order 4
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = MAX_STEP
    min_step: float = MIN_STEP
    safety: float = SAFETY
    max_steps: int = 1_000_000

    @classmethod
    def from_tolerance(cls, tol, max_step=None):
        """Config with rtol = atol = tol; validates tol against [1e-13, 1e-4]."""
        if not MIN_TOLERANCE <= tol <= MAX_TOLERANCE:
            raise DomainError(f"tol must lie in [{MIN_TOLERANCE:g}, {MAX_TOLERANCE:g}], got {tol}")
        config = cls(rtol=tol, atol=tol)
        if max_step is not None:
            config = replace(config, max_step=float(max_step))
        return config

    def solver_options(self):
        """Keyword options understood by solve_ivp and DormandPrincePI."""
        return {
            "rtol": self.rtol,
            "atol": self.atol,
            "max_step": self.max_step,
            "min_step": self.min_step,
            "safety": self.safety,
            "max_steps": self.max_steps,
        }


@dataclass
class StepStatistics:
    accepted: int = 0
    rejected: int = 0
    max_local_error: float = 0.0


class DormandPrincePI(RungeKutta):
    """
    Dormand-Prince 5(4) pair with PI step-size control, for use as
    ``solve_ivp(..., method=DormandPrincePI)``.

    Tableau and dense-output interpolant are those of scipy's RK45. A step
    whose right-hand side raises DomainError or returns non-finite values is
    rejected and retried with a smaller step. Counters are accumulated in the
    ``stats`` object passed through the solver options.
    """

    C = RK45.C
    A = RK45.A
    B = RK45.B
    E = RK45.E
    P = RK45.P
    order = RK45.order
    error_estimator_order = RK45.error_estimator_order
    n_stages = RK45.n_stages
    min_factor = MIN_FACTOR
    max_factor = MAX_FACTOR

    def __init__(self, fun, t0, y0, t_bound, min_step=MIN_STEP, safety=SAFETY, max_steps=1_000_000,
                 stats=None, **extraneous):
        super().__init__(fun, t0, y0, t_bound, **extraneous)
        self.min_step = min_step
        self.safety = safety
        self.max_steps = max_steps
        self.stats = StepStatistics() if stats is None else stats
        self.previous_error = 1.0

    def _attempt(self, t, y, h):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                y_new, f_new = rk_step(self.fun, t, y, self.f, h, self.A, self.B, self.C, self.K)
        except DomainError as e:
            logger.warning(f"Rejecting step: right-hand side undefined near t={t:g} ({e}).")
            return None, None
        if not (np.all(np.isfinite(self.K)) and np.all(np.isfinite(y_new))):
            logger.warning(f"Rejecting step: right-hand side overflowed near t={t:g}.")
            return None, None
        return y_new, f_new

    def _step_impl(self):
        t, y = self.t, self.y
        h_abs = min(self.h_abs, self.max_step)
        just_rejected = False

        while True:
            if h_abs < self.min_step or t + h_abs * self.direction == t:
                raise StepSizeUnderflow(f"Step size {h_abs:.3e} below minimum at t={t:.15g}.")
            if self.stats.accepted + self.stats.rejected >= self.max_steps:
                raise ConvergenceError(f"Exceeded {self.max_steps} steps at t={t:.15g}.")

            t_new = t + h_abs * self.direction
            if self.direction * (t_new - self.t_bound) > 0:
                t_new = self.t_bound
            h = t_new - t
            h_abs = abs(h)

            y_new, f_new = self._attempt(t, y, h)
            if y_new is None:
                self.stats.rejected += 1
                just_rejected = True
                h_abs *= self.min_factor
                continue

            scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
            error_norm = self._estimate_error_norm(self.K, h, scale)
            if error_norm <= 1.0:
                break
            self.stats.rejected += 1
            just_rejected = True
            h_abs *= max(self.min_factor, self.safety * error_norm ** self.error_exponent)

        if error_norm == 0.0:
            factor = self.max_factor
        else:
            factor = self.safety * error_norm ** -_ALPHA * self.previous_error ** _BETA
            factor = min(self.max_factor, max(self.min_factor, factor))
        if just_rejected:
            factor = min(1.0, factor)
        self.previous_error = max(error_norm, 1e-4)

        self.stats.accepted += 1
        local_error = float(np.max(np.abs(self._estimate_error(self.K, h))))
        self.stats.max_local_error = max(self.stats.max_local_error, local_error)

        self.h_previous = h
        self.y_old = y
        self.t = t_new
        self.y = y_new
        self.h_abs = h_abs * factor
        self.f = f_new
        return True, None


def _solve(fun, t_span, y0, config, stats, events=None):
    result = solve_ivp(
        fun, t_span, y0, method=DormandPrincePI, dense_output=True, events=events,
        stats=stats, **config.solver_options(),
    )
    if result.status < 0:
        raise ConvergenceError(result.message)
    return result


def _complex_state(y):
    return np.ascontiguousarray(y).view(complex)


@dataclass(frozen=True)
class FlowState:
    """One point of a trajectory; p, dq, dp and T are set only by the runs that carry them."""

    t: float
    q: complex
    p: Optional[complex] = None
    dq: Optional[complex] = None
    dp: Optional[complex] = None
    T: Optional[complex] = None


@dataclass
class Trajectory:
    states: List[FlowState] = field(default_factory=list)
    accepted_steps: int = 0
    rejected_steps: int = 0
    max_local_error: float = 0.0
    solution: Optional[object] = None

    @property
    def final(self):
        return self.states[-1]

    def q_at(self, t):
        """q at any time of the run, from the solver's dense output."""
        if self.solution is None:
            raise DomainError("Trajectory carries no dense output.")
        if not self.states[0].t <= t <= self.final.t:
            raise DomainError(f"t={t} lies outside [{self.states[0].t}, {self.final.t}]")
        return complex(_complex_state(self.solution(t))[0])

    def arrays(self):
        """Returns a dict of numpy arrays, one per populated field."""
        columns = {"t": np.array([state.t for state in self.states])}
        for name in ("q", "p", "dq", "dp", "T"):
            if getattr(self.states[0], name) is not None:
                columns[name] = np.array([getattr(state, name) for state in self.states], dtype=complex)
        return columns

    def energy(self):
        """H = xi(q) p along a Hamiltonian run."""
        if self.states[0].p is None:
            raise DomainError("Trajectory carries no momentum.")
        columns = self.arrays()
        return xi_array(columns["q"]) * columns["p"]

    def to_csv(self, path):
        columns = self.arrays()
        header = ["t"]
        for name in ("q", "p", "dq", "dp", "T"):
            if name in columns:
                header += [f"{name}_re", f"{name}_im"]
        rows = []
        for i, t in enumerate(columns["t"]):
            row = [float(t)]
            for name in ("q", "p", "dq", "dp", "T"):
                if name in columns:
                    row += [float(columns[name][i].real), float(columns[name][i].imag)]
            rows.append(row)
        write_csv(path, header, rows)


def _pack(*values):
    return np.array(values, dtype=complex).view(np.float64)


def _run(fun, y0, t_end, config, make_state, label):
    if t_end < 0:
        raise DomainError(f"t_end must be non-negative, got {t_end}")
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(fun(0.0, y0))):
        raise DomainError("Right-hand side is not finite at the initial state.")
    states = [make_state(0.0, y0)]
    if t_end == 0:
        return Trajectory(states)

    stats = StepStatistics()
    result = _solve(fun, (0.0, float(t_end)), y0, config, stats)
    rows = np.ascontiguousarray(result.y.T)
    states.extend(make_state(float(t), rows[i]) for i, t in enumerate(result.t) if i > 0)
    logger.debug(
        f"{label}: {stats.accepted} accepted, {stats.rejected} rejected steps, "
        f"max local error {stats.max_local_error:.2e}."
    )
    return Trajectory(states, stats.accepted, stats.rejected, stats.max_local_error, result.sol)


def _holomorphic_rhs(t, y):
    return _pack(xi(_complex_state(y)[0]))


def integrate_holomorphic_flow(q0, t_end, tol=1e-10, max_step=None):
    """
    dq/dt = xi(q) from q(0) = q0.
    Args:
        q0 (complex): Initial point.
        t_end (float): Flow time.
        tol (float): Local error tolerance in [1e-13, 1e-4].
        max_step (float): Step cap, 0.1 unless given.
    Returns:
        Trajectory: The accepted states.
    """
    config = IntegratorConfig.from_tolerance(tol, max_step)
    q0 = complex(q0)

    def make_state(t, y):
        return FlowState(t=t, q=q0 if t == 0.0 else complex(_complex_state(y)[0]))

    return _run(_holomorphic_rhs, _pack(q0), t_end, config, make_state, "xi-flow")


def _hamiltonian_rhs(t, y):
    q, p = _complex_state(y)
    value, first, _ = xi_jet(q)
    return _pack(value, -first * p)


def integrate_hamiltonian(q0, p0, t_end, tol=1e-10, max_step=None):
    """Hamilton's equations for H = xi(q) p: q' = xi(q), p' = -xi'(q) p."""
    config = IntegratorConfig.from_tolerance(tol, max_step)
    q0, p0 = complex(q0), complex(p0)
    if p0 == 0:
        raise DomainError("p0 must be non-zero.")

    def make_state(t, y):
        if t == 0.0:
            return FlowState(t=0.0, q=q0, p=p0)
        q, p = _complex_state(y)
        return FlowState(t=t, q=complex(q), p=complex(p))

    return _run(_hamiltonian_rhs, _pack(q0, p0), t_end, config, make_state, "hamiltonian")


def _variational_rhs(t, y):
    q, p, dq, dp = _complex_state(y)
    value, first, second = xi_jet(q)
    return _pack(value, -first * p, first * dq, -second * p * dq - first * dp)


def integrate_variational(q0, p0, dq0, dp0, t_end, tol=1e-10, max_step=None):
    """
    Hamilton's equations together with their linearisation
    dq' = xi'(q) dq, dp' = -xi''(q) p dq - xi'(q) dp.
    """
    config = IntegratorConfig.from_tolerance(tol, max_step)
    initial = tuple(complex(v) for v in (q0, p0, dq0, dp0))
    if initial[1] == 0:
        raise DomainError("p0 must be non-zero.")

    def make_state(t, y):
        values = initial if t == 0.0 else tuple(complex(v) for v in _complex_state(y))
        return FlowState(t=t, q=values[0], p=values[1], dq=values[2], dp=values[3])

    return _run(_variational_rhs, _pack(*initial), t_end, config, make_state, "variational")


def _time_reparam_rhs(t, y):
    q = _complex_state(y)[0]
    value, first, _ = xi_jet(q)
    return _pack(value, -first)


def integrate_time_reparam(q0, t_end, tol=1e-10, max_step=None):
    """
    The xi-flow augmented with the complex time dT/dt = -xi'(q), T(0) = 0.
    States carry T.
    """
    config = IntegratorConfig.from_tolerance(tol, max_step)
    q0 = complex(q0)

    def make_state(t, y):
        if t == 0.0:
            return FlowState(t=0.0, q=q0, T=0j)
        q, T = _complex_state(y)
        return FlowState(t=t, q=complex(q), T=complex(T))

    return _run(_time_reparam_rhs, _pack(q0, 0j), t_end, config, make_state, "time-reparam")


def _newton_rhs(direction):
    def rhs(u, y):
        s = _complex_state(y)[0]
        value, first, _ = xi_jet(s)
        if abs(first) < SEPARATRIX_RATIO * abs(value):
            raise SeparatrixSingularity(f"xi'(s) vanishes at s={s} (u={u:g}).")
        return _pack(-value / first * direction)

    return rhs


def _newton_segment(s0, start, end, config):
    length = abs(end - start)
    direction = (end - start) / length

    def make_state(u, y):
        s = s0 if u == 0.0 else complex(_complex_state(y)[0])
        T = end if u == length else start + u * direction
        return FlowState(t=u, q=s, T=T)

    return _run(_newton_rhs(direction), _pack(s0), length, config, make_state, "newton")


def integrate_newton_path(s0, vertices, tol=1e-10, max_step=None):
    """
    Newton flow ds/dT = -xi(s)/xi'(s) in complex time along the polygon
    0 -> vertices[0] -> vertices[1] -> ...

    Each segment is parameterised by its real arclength u; the state time t
    is the arclength accumulated along the whole path and every state
    records its complex time T.
    """
    config = IntegratorConfig.from_tolerance(tol, max_step)
    s0 = complex(s0)
    value, first, _ = xi_jet(s0)
    if abs(first) < SEPARATRIX_RATIO * abs(value):
        raise SeparatrixSingularity(f"xi'(s0) vanishes at s0={s0}.")

    trajectory = Trajectory(states=[FlowState(t=0.0, q=s0, T=0j)])
    start, offset, s = 0j, 0.0, s0
    for vertex in vertices:
        vertex = complex(vertex)
        if vertex == start:
            continue
        segment = _newton_segment(s, start, vertex, config)
        trajectory.states.extend(replace(state, t=state.t + offset) for state in segment.states[1:])
        trajectory.accepted_steps += segment.accepted_steps
        trajectory.rejected_steps += segment.rejected_steps
        trajectory.max_local_error = max(trajectory.max_local_error, segment.max_local_error)
        offset = trajectory.final.t
        start, s = vertex, segment.final.q
    return trajectory


def integrate_newton_flow(s0, T_end, tol=1e-10, max_step=None):
    """Newton flow along the straight segment 0 -> T_end in complex time."""
    return integrate_newton_path(s0, [complex(T_end)], tol, max_step)


def detect_closed_orbit_period(q0, zero, tol=1e-10):
    """
    Return time of the xi-flow orbit through q0 around a simple zero.

    The flow is integrated in w = q - rho with errors measured against |w0|.
    The section is the ray from rho through q0, crossed in the orbit's own
    sense of rotation; solve_ivp locates the crossing as a terminal event and
    a secant iteration on the dense output polishes it.
    Args:
        q0 (complex): Starting point, within 0.05 of the zero.
        zero (ZeroRecord): The enclosed zero; its period sets the time scale.
        tol (float): Relative local error tolerance.
    Returns:
        float: The period.
    """
    q0 = complex(q0)
    rho = zero.rho
    w0 = q0 - rho
    if not 0.0 < abs(w0) <= CENTER_RADIUS:
        raise DomainError(f"q0 must lie within {CENTER_RADIUS:g} of rho (and not on it), got |q0 - rho|={abs(w0):g}")

    linear_period = zero.period
    base = IntegratorConfig.from_tolerance(tol)
    config = replace(base, atol=tol * abs(w0), max_step=linear_period / ORBIT_STEPS_PER_PERIOD)

    def rhs(t, y):
        return _pack(xi(rho + _complex_state(y)[0]))

    orientation = math.copysign(1.0, (xi(q0) / w0).imag)

    def section(t, y):
        return orientation * (complex(_complex_state(y)[0]) / w0).imag

    section.direction = 1
    section.terminal = True

    # q0 sits on the section, so crossings are searched from a quarter turn on
    stats = StepStatistics()
    quarter = 0.25 * linear_period
    lead = _solve(rhs, (0.0, quarter), _pack(w0), config, stats)
    result = _solve(
        rhs, (quarter, RETURN_TIME_FACTOR * linear_period), np.ascontiguousarray(lead.y[:, -1]),
        config, stats, events=section,
    )
    if result.status != 1:
        raise NoReturnError(f"No return to the section within {RETURN_TIME_FACTOR:g} linearised periods.")

    def crossing(t):
        return section(t, result.sol(t))

    try:
        period = optimize.newton(
            crossing, result.t[-2], x1=result.t_events[0][0], tol=SECANT_TOLERANCE * linear_period, maxiter=50
        )
    except RuntimeError as e:
        raise ConvergenceError(f"Secant refinement of the section crossing failed: {e}") from e
    period = float(period)
    logger.debug(f"Orbit around {rho}: {stats.accepted} accepted, {stats.rejected} rejected steps.")
    logger.info(
        f"Closed orbit around {rho} from |w0|={abs(w0):g}: period {period:.12g} "
        f"(linearised {linear_period:.12g})."
    )
    return period


@dataclass(frozen=True)
class PhasePortrait:
    """xi on a rectangular grid; values[j, i] sits at re[i] + i*im[j]."""

    re: np.ndarray
    im: np.ndarray
    values: np.ndarray

    @property
    def phase(self):
        return np.angle(self.values)

    @property
    def modulus(self):
        return np.abs(self.values)

    def to_csv(self, path):
        rows = []
        for j, y in enumerate(self.im):
            for i, x in enumerate(self.re):
                value = self.values[j, i]
                rows.append([float(x), float(y), float(value.real), float(value.imag),
                             float(np.angle(value)), float(abs(value))])
        write_csv(path, ["re", "im", "xi_re", "xi_im", "phase", "modulus"], rows)


def _portrait_row(args):
    re, y = args
    return xi_array(re + 1j * y)


def phase_portrait_grid(re_range, im_range, nx, ny, jobs=1):
    """
    Evaluates xi on an nx-by-ny grid spanning re_range x im_range (inclusive).
    Rows are independent and are spread over worker processes when jobs > 1.
    """
    if nx < 2 or ny < 2:
        raise DomainError(f"Grid needs nx, ny >= 2, got {nx}x{ny}")
    re = np.linspace(re_range[0], re_range[1], nx)
    im = np.linspace(im_range[0], im_range[1], ny)
    tasks = [(re, float(y)) for y in im]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_portrait_row, tasks))
    else:
        rows = [_portrait_row(task) for task in tasks]
    logger.debug(f"Evaluated phase portrait on {nx}x{ny} nodes.")
    return PhasePortrait(re=re, im=im, values=np.vstack(rows))
