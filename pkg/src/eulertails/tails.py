"""Tail probabilities of the random Euler product, by three routes.

With L(1, y) the random product over primes p <= y, the two tails are

    Phi(t, y) = P( L(1, y) > (e^gamma t)^2 ),
    Psi(t, y) = P( L(1, y) < (e^gamma t / zeta(2))^-2 ),

computed entirely in log-domain (at large t the probabilities sit far
below the floating-point underflow threshold). Three mutually validating
methods are provided:

* ``saddle_gauss`` -- exponential tilt at the saddle kappa(t, y); the
  probability is exp(phi_0 - kappa * target) times a boundary factor.
  Mode ``refined`` (default) evaluates the boundary factor as the exact
  Laplace transform of a unit Gaussian on the half-line, with third- and
  fourth-cumulant (skew/kurtosis) corrections; mode ``asymptotic`` keeps
  the plain 1/(kappa sqrt(2 pi phi_2)) prefactor, which the refined factor
  reproduces in the large-deviation limit.
* ``expansion`` -- closed forms with the computed coefficients: either
  -kappa sum_j a_j / log^j kappa (route ``saddle_series``) or the doubly
  exponential -e^{t-gamma_0} sum_j a*_j / t^j (route ``t_series``).
* ``perron`` -- a smoothed contour integral along Re s = kappa whose value
  V is sandwiched between the tail at t and at t e^{-lambda N / 2}, so a
  single number certifies both an upper and a lower estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfcx

from .coefficients import a_star_detail, coefficient_a, gamma0
from .constants import (
    DECAY_C2,
    SADDLE_ERROR_C_ASYMPTOTIC,
    SADDLE_ERROR_C_REFINED,
)
from .errors import AccuracyError, ConsistencyError, DomainError
from .profile import MomentLine
from .quadrature import DEFAULT_QUAD, QuadratureSpec, adaptive_simpson
from .saddle import SaddleSolution, solve_saddle, solve_saddle_lower

TAILS = ("upper", "lower")
METHODS = ("saddle_gauss", "expansion", "perron", "monte_carlo")
SADDLE_MODES = ("refined", "asymptotic")
EXPANSION_ROUTES = ("saddle_series", "t_series")
COEFF_SOURCES = ("composed", "closed_form")

#: y = infinity sentinel resolves to y_eff = Y_INF_FACTOR * e^t, which makes
#: the kappa/(y log y) part of the remainder negligible against 1/log kappa
Y_INF_FACTOR = 1e3


@dataclass(frozen=True)
class TailEstimate:
    """One tail probability in log-domain with its method provenance."""

    t: float
    y: float
    tail: str  #: "upper" (Phi) or "lower" (Psi)
    log_value: float  #: natural log of the probability
    method: str
    error_indicator: float  #: uncertainty of log_value (~ relative error)
    J: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.tail not in TAILS:
            raise DomainError(f"tail must be one of {TAILS}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}")
        # numpy scalars sneak in from vector code; normalize so repr/json
        # of an estimate never depends on which route produced it
        object.__setattr__(self, "log_value", float(self.log_value))
        object.__setattr__(self, "error_indicator", float(self.error_indicator))
        if self.log_value > 1e-9:
            raise ConsistencyError(
                f"log probability must be <= 0, got {self.log_value:g}"
            )


@dataclass(frozen=True)
class SmoothingParams:
    """Contour-smoothing parameters: kernel ((e^{lambda s}-1)/(lambda s))^N.

    Inside the tail sandwich the product lambda*N must stay below e^{-t}
    so that the smoothing bandwidth t (1 - e^{-lambda N / 2}) is small on
    the t-scale; :func:`tail_perron` enforces this.
    """

    lam: float
    N: int = 1
    tau_max: float | None = None  #: None -> 20 sqrt(kappa) log kappa

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise DomainError("smoothing lambda must be positive")
        if self.N < 1:
            raise DomainError("smoothing power N must be >= 1")
        if self.tau_max is not None and self.tau_max <= 0:
            raise DomainError("tau_max must be positive")


def default_smoothing(t: float) -> SmoothingParams:
    """Sandwich default: lambda = e^{-t}/4, N = 1, automatic truncation."""
    return SmoothingParams(lam=0.25 * math.exp(-t), N=1)


def narrow_smoothing(kappa: float) -> SmoothingParams:
    """The kappa^{-2} bandwidth preset (tightest sandwich, slowest decay)."""
    return SmoothingParams(lam=kappa**-2.0, N=1)


def smoothing_kernel(s: complex, params: SmoothingParams) -> complex:
    """((e^{lambda s} - 1)/(lambda s))^N with the s = 0 singularity removed."""
    return complex(_kernel_vals(np.asarray([complex(s)]), params)[0])


def _kernel_vals(s: np.ndarray, params: SmoothingParams) -> np.ndarray:
    w = params.lam * np.asarray(s, dtype=complex)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 0.0, w)
    with np.errstate(invalid="ignore"):
        base = np.where(
            small,
            1.0 + w / 2.0 + w**2 / 6.0 + w**3 / 24.0,
            (np.exp(ws) - 1.0) / np.where(small, 1.0, ws),
        )
    return base**params.N


# ---------------------------------------------------------------------------
# Gaussian / Edgeworth boundary factor of the tilted representation.
# ---------------------------------------------------------------------------


def _hermite_e(k: int, z: float) -> float:
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    return float(np.polynomial.hermite_e.hermeval(z, coeffs))


def _laplace_halfline(k: int, z0: float) -> float:
    """M_k(z0) = integral_0^inf e^{-z0 w} phi(w) He_k(w) dw, in the scaled
    form e^{z0^2/2} * (closed form), which stays bounded for large z0."""
    m0 = 0.5 * erfcx(z0 / math.sqrt(2.0))
    if k == 0:
        return m0
    tail = sum(
        math.comb(k, j) * (-z0) ** (k - j) * _hermite_e(j - 1, z0)
        for j in range(1, k + 1)
    )
    return (-z0) ** k * m0 + tail / math.sqrt(2.0 * math.pi)


def _boundary_factor(z0: float, lam3: float, lam4: float, refined: bool) -> float:
    """E[e^{-z0 W} 1_{W >= 0}] for the standardized tilted overshoot W.

    The plain Gaussian value is M_0 = e^{z0^2/2} Q(z0); the refined value
    adds the Edgeworth skew/kurtosis corrections

        M_0 + (lam3/6) M_3 + (lam4/24) M_4 + (lam3^2/72) M_6.

    For z0 -> inf, M_0 -> 1/(z0 sqrt(2 pi)), recovering the plain
    1/(kappa sqrt(2 pi phi_2)) prefactor.
    """
    if not refined:
        return 1.0 / (z0 * math.sqrt(2.0 * math.pi))
    b = (
        _laplace_halfline(0, z0)
        + lam3 / 6.0 * _laplace_halfline(3, z0)
        + lam4 / 24.0 * _laplace_halfline(4, z0)
        + lam3**2 / 72.0 * _laplace_halfline(6, z0)
    )
    if not b > 0.0:
        raise AccuracyError(
            f"boundary factor {b:g} not positive at z0={z0:g}: cumulant "
            "corrections too large for this regime"
        )
    return b


def _saddle_estimate(
    sol: SaddleSolution, mode: str, tail: str
) -> TailEstimate:
    prof = sol.profile_at_kappa
    phi0, _, phi2, phi3, phi4 = prof.values
    z0 = sol.kappa * math.sqrt(phi2)
    lam3 = phi3 / phi2**1.5
    lam4 = phi4 / phi2**2
    if tail == "lower":
        lam3 = -lam3  # overshoot flips orientation on the negative axis
    sign = -1.0 if tail == "lower" else 1.0
    base = phi0 - sign * sol.kappa * sol.target
    b = _boundary_factor(z0, lam3, lam4, refined=(mode == "refined"))
    c = SADDLE_ERROR_C_REFINED if mode == "refined" else SADDLE_ERROR_C_ASYMPTOTIC
    return TailEstimate(
        t=sol.t,
        y=sol.y,
        tail=tail,
        log_value=base + math.log(b),
        method="saddle_gauss",
        error_indicator=c * sol.t * math.exp(-sol.t),
    )


def tail_saddle(
    t: float,
    y: float,
    mode: str = "refined",
    solution: SaddleSolution | None = None,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> TailEstimate:
    """log Phi(t, y) by the tilted (saddle-point) representation.

    Mode ``asymptotic`` is exactly phi_0 - log kappa - (1/2) log(2 pi
    phi_2) - kappa * target; mode ``refined`` replaces the last two terms
    by the boundary factor with cumulant corrections, shrinking the error
    from O(t e^{-t}) to a small multiple of it.
    """
    if mode not in SADDLE_MODES:
        raise DomainError(f"mode must be one of {SADDLE_MODES}")
    sol = solution if solution is not None else solve_saddle(t, y, quad=quad)
    return _saddle_estimate(sol, mode, "upper")


def tail_expansion(
    t: float,
    y: float = math.inf,
    J: int = 2,
    route: str = "saddle_series",
    coeff_source: str = "composed",
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> TailEstimate:
    """log Phi by closed-form expansions with computed coefficients.

    Route ``saddle_series``: log Phi = -kappa sum_{j<=J} a_j / log^j kappa
    with the numerically solved kappa (J <= 4). Route ``t_series``:
    log Phi = -e^{t-gamma_0} sum_{j<=J} a*_j / t^j (J <= 2); its
    ``coeff_source`` picks the self-consistent composed a*_j (default) or
    the direct closed forms (which disagree with the composed series; see
    :mod:`.coefficients`). y may be infinity: the solver then runs at
    y_eff = 10^3 e^t, large enough that the finite-y part of the remainder
    is negligible.
    """
    if route not in EXPANSION_ROUTES:
        raise DomainError(f"route must be one of {EXPANSION_ROUTES}")
    if coeff_source not in COEFF_SOURCES:
        raise DomainError(f"coeff_source must be one of {COEFF_SOURCES}")
    y_eff = Y_INF_FACTOR * math.exp(t) if math.isinf(y) else float(y)
    if route == "saddle_series":
        if not 1 <= J <= 4:
            raise DomainError("saddle_series route supports J in 1..4")
        sol = solve_saddle(t, y_eff, quad=quad)
        log_k = math.log(sol.kappa)
        series = math.fsum(
            coefficient_a(j) / log_k**j for j in range(1, J + 1)
        )
        log_value = -sol.kappa * series
        # first neglected term plus the finite-y truncation effect
        err = sol.kappa * (
            abs(coefficient_a(J + 1)) * log_k ** -(J + 1)
            + sol.kappa / (y_eff * math.log(y_eff))
        )
    else:
        if not 1 <= J <= 2:
            raise DomainError("t_series route supports J in 1..2")
        detail = a_star_detail()
        coeffs = detail.composed if coeff_source == "composed" else detail.closed_form
        series = math.fsum(coeffs[j - 1] / t**j for j in range(1, J + 1))
        scale = math.exp(t - gamma0())
        log_value = -scale * series
        # J = 1: the next term is known exactly; J = 2: reuse the last
        # known coefficient magnitude as the implied constant
        next_mag = abs(coeffs[J]) if J < len(coeffs) else abs(coeffs[-1])
        err = scale * (
            next_mag * t ** -(J + 1)
            + math.exp(t) * t / (y_eff * math.log(y_eff))
        )
    return TailEstimate(
        t=float(t),
        y=float(y),
        tail="upper",
        log_value=log_value,
        method="expansion",
        error_indicator=err,
        J=J,
    )


# ---------------------------------------------------------------------------
# Smoothed contour integration (both tails).
# ---------------------------------------------------------------------------


def _resolve_params(
    t: float, kappa: float, params: SmoothingParams | None
) -> SmoothingParams:
    if params is None:
        params = default_smoothing(t)
    if params.lam * params.N > math.exp(-t) * (1.0 + 1e-12):
        raise DomainError(
            f"smoothing bandwidth lambda*N = {params.lam * params.N:g} "
            f"exceeds e^-t = {math.exp(-t):g}; the sandwich needs "
            "lambda*N <= e^-t"
        )
    if params.tau_max is None:
        params = replace(
            params, tau_max=20.0 * math.sqrt(kappa) * math.log(kappa)
        )
    return params


def _perron_log_value(
    sol: SaddleSolution,
    params: SmoothingParams,
    quad: QuadratureSpec,
    lower: bool,
) -> tuple[float, float]:
    """(log V, relative error indicator) for the smoothed contour integral.

    V = (1/pi) e^{phi_0 - s target} * integral_0^tau_max of the centered
    real integrand, plus a truncation tail controlled by the Gaussian
    decay regime of the vertical-line modulus.
    """
    kappa = sol.kappa
    sigma = -kappa if lower else kappa
    prof = sol.profile_at_kappa
    phi2 = prof.values[2]
    base = prof.values[0] - sigma * sol.target
    rho = sol.residual
    sign = -1.0 if lower else 1.0
    line = MomentLine(sigma, sol.y, quad=quad, tau_max=params.tau_max)

    def integrand(taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        s = kappa + 1j * taus
        vals = np.exp(line(sign * taus) + sign * 1j * taus * rho)
        return np.real(vals * _kernel_vals(s, params) / s)

    # panels grow geometrically from the Gaussian peak width
    width = 1.0 / math.sqrt(phi2)
    edges = [0.0]
    while edges[-1] < params.tau_max:
        edges.append(min(max(width, 4.0 * edges[-1]), params.tau_max))
    scale = abs(smoothing_kernel(kappa, params)) / kappa * width
    tol = 1e-8 * scale / (len(edges) - 1)
    total = math.fsum(
        adaptive_simpson(integrand, lo, hi, tol, 1e-7)
        for lo, hi in zip(edges[:-1], edges[1:])
    )
    if total <= 0.0:
        raise AccuracyError(
            "contour integral evaluated to a non-positive value; "
            "the smoothing/truncation parameters are inconsistent"
        )
    # truncation: modulus at the cut decays at least like the Gaussian
    # regime envelope exp(-c2 (tau^2 - T^2)/(kappa log^2 kappa)) beyond it
    decay_scale = kappa * max(math.log(kappa), 0.5) ** 2
    tail_bound = (
        abs(integrand(np.asarray([params.tau_max]))[0])
        * decay_scale
        / (2.0 * DECAY_C2 * params.tau_max)
    )
    rel_err = tail_bound / total + 1e-6
    if tail_bound > 0.1 * total:
        raise AccuracyError(
            f"contour truncation bound is {tail_bound / total:.1%} of the "
            f"integral; increase tau_max (currently {params.tau_max:g})"
        )
    return base + math.log(total / math.pi), rel_err


def _perron_pair(
    sol: SaddleSolution,
    params: SmoothingParams | None,
    quad: QuadratureSpec,
    tail: str,
) -> tuple[TailEstimate, TailEstimate]:
    t = sol.t
    params = _resolve_params(t, sol.kappa, params)
    log_v, rel = _perron_log_value(sol, params, quad, lower=tail == "lower")
    # sandwich: tail(t) <= V <= tail(t e^{-lambda N / 2}) for both tails
    t_shift = t * math.exp(-0.5 * params.lam * params.N)
    upper_est = TailEstimate(
        t=t,
        y=sol.y,
        tail=tail,
        log_value=log_v,
        method="perron",
        error_indicator=rel,
    )
    lower_est = TailEstimate(
        t=t_shift,
        y=sol.y,
        tail=tail,
        log_value=log_v,
        method="perron",
        error_indicator=rel,
    )
    return lower_est, upper_est


def tail_perron(
    t: float,
    y: float,
    params: SmoothingParams | None = None,
    solution: SaddleSolution | None = None,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> tuple[TailEstimate, TailEstimate]:
    """Smoothed contour value V with Phi(t, y) <= V <= Phi(t', y),
    t' = t e^{-lambda N / 2}.

    Returns (lower, upper): the same V once as a lower estimate for
    Phi(t', y) (the estimate's t is t') and once as an upper estimate for
    Phi(t, y). The integrand is centered at the saddle, so the oscillatory
    phase is gone and the contour integral is a near-Gaussian profile.
    """
    sol = solution if solution is not None else solve_saddle(t, y, quad=quad)
    return _perron_pair(sol, params, quad, "upper")


def tail_saddle_lower(
    t: float,
    y: float,
    mode: str = "refined",
    solution: SaddleSolution | None = None,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> TailEstimate:
    """log Psi(t, y) by the mirrored tilted representation at s = -kappa."""
    if mode not in SADDLE_MODES:
        raise DomainError(f"mode must be one of {SADDLE_MODES}")
    sol = (
        solution
        if solution is not None
        else solve_saddle_lower(t, y, quad=quad)
    )
    return _saddle_estimate(sol, mode, "lower")


def tail_perron_lower(
    t: float,
    y: float,
    params: SmoothingParams | None = None,
    solution: SaddleSolution | None = None,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> tuple[TailEstimate, TailEstimate]:
    """Smoothed contour sandwich for the lower tail: Psi(t) <= V <= Psi(t')."""
    sol = (
        solution
        if solution is not None
        else solve_saddle_lower(t, y, quad=quad)
    )
    return _perron_pair(sol, params, quad, "lower")


def lower_tail_variants(
    t: float,
    y: float,
    methods: tuple[str, ...] = ("saddle_gauss", "perron"),
    mode: str = "refined",
    params: SmoothingParams | None = None,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> dict[str, TailEstimate | tuple[TailEstimate, TailEstimate]]:
    """All requested lower-tail estimates from one saddle solve.

    ``saddle_gauss`` maps to a single TailEstimate, ``perron`` to the
    (lower, upper) sandwich pair.
    """
    sol = solve_saddle_lower(t, y, quad=quad)
    out: dict[str, TailEstimate | tuple[TailEstimate, TailEstimate]] = {}
    for method in methods:
        if method == "saddle_gauss":
            out[method] = tail_saddle_lower(t, y, mode=mode, solution=sol, quad=quad)
        elif method == "perron":
            out[method] = tail_perron_lower(t, y, params=params, solution=sol, quad=quad)
        else:
            raise DomainError(
                "lower_tail_variants supports methods 'saddle_gauss' and 'perron'"
            )
    return out
