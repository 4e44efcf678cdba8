import math

from scipy.special import bernoulli

EULER_GAMMA = 0.5772156649015329
LN_PI = math.log(math.pi)
HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# even-index Bernoulli numbers B_2 .. B_20
BERNOULLI = {k: float(value) for k, value in enumerate(bernoulli(20)) if k >= 2 and k % 2 == 0}

# B_2k / (2k)!, the Euler-Maclaurin correction weights
EULER_MACLAURIN_WEIGHTS = tuple(
    BERNOULLI[k] / math.factorial(k) for k in sorted(BERNOULLI)
)

# B_2k / 2k, the asymptotic-series weights of the digamma tail
DIGAMMA_TAIL_WEIGHTS = tuple(BERNOULLI[k] / k for k in sorted(BERNOULLI))

# Zeta / xi evaluation
ZETA_MIN_TERMS = 25
ZETA_TERMS_PER_HEIGHT = 1.3
MAX_HEIGHT = 200.0

# Contour derivatives
CAUCHY_RADIUS = 0.25
CAUCHY_NODES = 64

# Zero search
SCAN_STEP = 0.05
DEFAULT_CATALOGUE_HEIGHT = 180.0
DEFAULT_ZERO_TOLERANCE = 1e-12
NEWTON_MAX_ITERATIONS = 50
REALITY_TOLERANCE = 1e-8

# Truncation ladder used by every convergence ladder
TRUNCATION_LADDER = (8, 16, 32, 64)

# Dynamics
MAX_STEP = 0.1
MIN_STEP = 1e-14
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
SEPARATRIX_RATIO = 1e-10
CENTER_RADIUS = 0.05
RETURN_TIME_FACTOR = 5.0
ORBIT_STEPS_PER_PERIOD = 64
SECANT_TOLERANCE = 1e-10

# Formulas
SINGULARITY_DISTANCE = 1e-12
DEGENERACY_RATIO = 1e-10

EXIT_CODES = {
    "ok": 0,
    "failed": 1,
    "usage": 2,
    "domain": 3,
    "convergence": 4,
}

# Identities exercised by each CLI subcommand, copied into metadata sidecars
EQUATION_LOOKUP = {
    "eval": ["xi(s) = s(s-1)/2 Gamma(s/2) pi^(-s/2) zeta(s)", "digamma series", "zeta'/zeta prime sum"],
    "zeros": ["xi(1/2 + i tau) real", "N(T) = (T/2pi) ln(T/2pi e) + 7/8"],
    "flow:xi": ["dq/dt = xi(q)"],
    "flow:hamiltonian": ["H = xi(q) p", "p = p0 xi(q0)/xi(q)"],
    "flow:newton": ["ds/dT = -xi(s)/xi'(s)", "xi(s(T)) = xi(s0) exp(-T)"],
    "flow:variational": ["dq' = xi'(q) dq, dp' = -xi''(q) p dq - xi'(q) dp", "p dq = p0 dq0", "flow map M"],
    "periods": ["t* = 2 pi i / xi'(rho)"],
    "spectrum": ["E = k h nu, nu = 1/t*"],
    "portrait": ["arg xi(s) on a grid"],
    "verify": ["functional equation", "prime sums", "Hadamard product identity", "flow map M", "t*", "E = k h nu"],
}
