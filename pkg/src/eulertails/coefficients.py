"""Expansion constants of the tail asymptotics.

All asymptotic formulas in this package are driven by moment integrals of
the limit shape h against powers of log u:

    b_{j,0} = int_0^inf  h(u)/u^2   (log u)^{j-1} du
    b_{j,1} = int_0^inf  h'(u)/u    (log u)^{j-1} du
    b_{j,2} = int_0^inf  g''(u)     (log u)^{j-1} du
    a_j     = int_0^inf  (h(u)/u)'  (log u)^{j-1} du

together with gamma0 = b_{1,1}/2 and the derived coefficients of the
large-t expansion of the saddle point,

    kappa(t) ~ e^{t - gamma0} (1 + gamma_1/t + gamma_2/t^2 + ...).

Exact identities used as cross-checks (all hold at quadrature accuracy):

    a_j = b_{j,1} - b_{j,0};   b_{j,1} = b_{j,0} - (j-1) b_{j-1,0} + 2[j=1];
    b_{1,2} = 2 (= g'(inf) - g'(0));   b_{2,2} = -b_{1,1}.

Every improper integral is split at the kink u = 1 and the tail is mapped
back to (0, 1] by u -> 1/u, so all quadrature runs on finite intervals.
The integrands approach constants times (log u)^{j-1} at both ends; a
geometric ladder of split points plus adaptive subdivision resolves the
logarithmic endpoint growth. Values are memoized per (j, n, quadrature
spec) for the lifetime of the process.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConsistencyError, DomainError
from .limitshape import g_deriv, gp_minus_2, gp_over_u, h_fn, h_over_u2
from .quadrature import QuadratureSpec, integrate

#: depth of the coefficient table computed by default (the kappa expansion
#: of order J consumes b_{j,1} up to j = J + 1)
J_MAX_DEFAULT = 4

#: hard cap; the quadrature ladder below was validated to this depth
_J_HARD_CAP = 8

#: integration cut at the singular endpoint: below this both halves
#: contribute less than ~1e-20 (integrands are O((log u)^{j-1}) there)
_ENDPOINT_CUT = 1e-30

#: ladder of mandatory panel boundaries on (0, 1]: the integrands vary on a
#: logarithmic scale, so panels are geometric near 0
_SPLIT_LADDER = (1e-24, 1e-18, 1e-12, 1e-8, 1e-5, 1e-3, 1e-2, 0.1, 0.5)

#: default spec for coefficient integrals; per-panel tolerances add up
#: across the ladder to ~1e-10 absolute
COEFF_QUAD = QuadratureSpec(
    scheme="adaptive_simpson",
    abs_tol=1e-11,
    rel_tol=1e-12,
    split_points=_SPLIT_LADDER,
)

_IDENTITY_TOL = 1e-6


def _logpow(x: np.ndarray, j: int) -> np.ndarray:
    return np.log(x) ** (j - 1) if j > 1 else np.ones_like(x)


def _lower_kernel(n: int, j: int) -> Callable[[np.ndarray], np.ndarray]:
    """Integrand on the u in (0, 1] half."""
    if n == 0:
        return lambda u: np.asarray(h_over_u2(u)) * _logpow(u, j)
    if n == 1:
        return lambda u: np.asarray(gp_over_u(u)) * _logpow(u, j)
    if n == 2:
        return lambda u: np.asarray(g_deriv(u, 2)) * _logpow(u, j)
    # n == 3 is used internally for the direct route of a_j
    return lambda u: (np.asarray(gp_over_u(u)) - np.asarray(h_over_u2(u))) * _logpow(
        u, j
    )


def _tail_kernel(n: int, j: int) -> Callable[[np.ndarray], np.ndarray]:
    """Integrand after u -> 1/v, on the v in (0, 1] half.

    int_1^inf F(u) du = int_0^1 F(1/v) v^{-2} dv; each case simplifies so
    no inverse powers of v remain (the limits as v -> 0 are -3/2 log v
    type expressions, never poles).
    """
    sign = -1.0 if j % 2 == 0 else 1.0  # (log(1/v))^{j-1} = (-log v)^{j-1}

    if n == 0:
        return lambda v: sign * np.asarray(h_fn(1.0 / v)) * _logpow(v, j)
    if n == 1:
        return lambda v: sign * np.asarray(gp_minus_2(1.0 / v)) / v * _logpow(v, j)
    if n == 2:
        return lambda v: sign * np.asarray(g_deriv(1.0 / v, 2)) / v**2 * _logpow(v, j)
    return lambda v: (
        sign
        * (np.asarray(gp_minus_2(1.0 / v)) / v - np.asarray(h_fn(1.0 / v)))
        * _logpow(v, j)
    )


def _coefficient_integral(n: int, j: int, quad: QuadratureSpec) -> float:
    lower = integrate(_lower_kernel(n, j), _ENDPOINT_CUT, 1.0, quad)
    tail = integrate(_tail_kernel(n, j), _ENDPOINT_CUT, 1.0, quad)
    return lower + tail


def _tightened(quad: QuadratureSpec) -> QuadratureSpec:
    from dataclasses import replace

    return replace(quad, abs_tol=quad.abs_tol / 16.0, rel_tol=quad.rel_tol / 16.0)


@lru_cache(maxsize=256)
def _coefficient_cached(n: int, j: int, quad: QuadratureSpec) -> tuple[float, float]:
    """(value, abs error estimate) via a tightened confirmation run."""
    loose = _coefficient_integral(n, j, quad)
    tight = _coefficient_integral(n, j, _tightened(quad))
    return tight, abs(tight - loose) + 1e-14


def _check_jn(j: int, n: int | None = None) -> None:
    if not 1 <= j <= _J_HARD_CAP:
        raise DomainError(f"coefficient order j must be in [1, {_J_HARD_CAP}]")
    if n is not None and n not in (0, 1, 2):
        raise DomainError("coefficient family n must be 0, 1 or 2")


def coefficient_b(j: int, n: int, quad: QuadratureSpec = COEFF_QUAD) -> float:
    """b_{j,n} by two-stage adaptive quadrature (see module docstring)."""
    _check_jn(j, n)
    return _coefficient_cached(n, j, quad)[0]


def coefficient_b_error(j: int, n: int, quad: QuadratureSpec = COEFF_QUAD) -> float:
    """Absolute error estimate attached to :func:`coefficient_b`."""
    _check_jn(j, n)
    return _coefficient_cached(n, j, quad)[1]


@dataclass(frozen=True)
class ACoefficientDetail:
    """Both routes to a_j and their discrepancy."""

    j: int
    direct: float  #: quadrature of (h(u)/u)' (log u)^{j-1}
    via_identity: float  #: b_{j,1} - b_{j,0}
    discrepancy: float


def coefficient_a_detail(
    j: int, quad: QuadratureSpec = COEFF_QUAD
) -> ACoefficientDetail:
    _check_jn(j)
    direct = _coefficient_cached(3, j, quad)[0]
    via = coefficient_b(j, 1, quad) - coefficient_b(j, 0, quad)
    return ACoefficientDetail(
        j=j, direct=direct, via_identity=via, discrepancy=abs(direct - via)
    )


def coefficient_a(j: int, quad: QuadratureSpec = COEFF_QUAD) -> float:
    """a_j by direct quadrature, cross-checked against b_{j,1} - b_{j,0}."""
    detail = coefficient_a_detail(j, quad)
    if detail.discrepancy > _IDENTITY_TOL:
        raise ConsistencyError(
            f"a_{j} routes disagree: direct {detail.direct!r} vs identity "
            f"{detail.via_identity!r} (|diff| = {detail.discrepancy:.3e})"
        )
    return detail.direct


def gamma0(quad: QuadratureSpec = COEFF_QUAD) -> float:
    """gamma0 = (1/2) int_0^inf h'(u)/u du = b_{1,1}/2."""
    return 0.5 * coefficient_b(1, 1, quad)


# ---------------------------------------------------------------------------
# Coefficient algebra for the kappa expansion.
# ---------------------------------------------------------------------------


def _partitions(m: int):
    """Integer partitions of m as {part: multiplicity} dicts."""

    def rec(remaining: int, max_part: int):
        if remaining == 0:
            yield {}
            return
        for part in range(min(remaining, max_part), 0, -1):
            for rest in rec(remaining - part, part):
                out = dict(rest)
                out[part] = out.get(part, 0) + 1
                yield out

    yield from rec(m, m)


def _exp_series_coeff(c: dict[int, float], m: int) -> float:
    """[x^m] exp(sum_{i>=1} c_i x^i), by explicit partition enumeration:
    sum over partitions m = sum_i i*m_i of prod_i c_i^{m_i} / m_i!."""
    total = 0.0
    for lam in _partitions(m):
        term = 1.0
        for part, mult in lam.items():
            term *= c.get(part, 0.0) ** mult / math.factorial(mult)
        total += term
    return total


def b_prime_coeffs(J: int, quad: QuadratureSpec = COEFF_QUAD) -> list[float]:
    """b'_0..b'_J: coefficients of exp(sum_j (b_{j,1}/2) x^j).

    The double factorials (2m_i)!! in the partition sum equal 2^{m_i} m_i!,
    i.e. the series exponentiates b_{j,1}/2; b'_0 = 1 and b'_1 = gamma0.
    """
    half_b1 = {i: 0.5 * coefficient_b(i, 1, quad) for i in range(1, J + 1)}
    return [_exp_series_coeff(half_b1, m) for m in range(J + 1)]


def kappa_expansion_coeffs(
    J: int, quad: QuadratureSpec = COEFF_QUAD
) -> tuple[float, ...]:
    """(gamma_1, ..., gamma_J) of the saddle expansion
    kappa ~ e^{t-gamma0} (1 + sum_j gamma_j / t^j).

    Pipeline: b'_m from the b_{j,1}/2 exponential (partition enumeration),
    gamma'_j = b'_{j+1}, then the alternating composition
    1 + sum gamma_j x^j = exp(-sum_{i>=1} gamma'_i x^i).
    """
    if not 1 <= J <= 4:
        raise DomainError("kappa expansion implemented for J in [1, 4]")
    bp = b_prime_coeffs(J + 1, quad)
    gamma_prime = {i: bp[i + 1] for i in range(1, J + 1)}
    neg = {i: -v for i, v in gamma_prime.items()}
    return tuple(_exp_series_coeff(neg, j) for j in range(1, J + 1))


# ---------------------------------------------------------------------------
# Second-order coefficients of the doubly exponential form of the tail.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AStarDetail:
    """The coefficients (a*_1, a*_2) of the doubly exponential tail law
    log Phi = -e^{t-gamma0} (a*_1/t + a*_2/t^2 + ...), by both routes.

    ``closed_form`` is the direct evaluation (a*_1 = 1, a*_2 = gamma0 -
    gamma0^2/2 - b_{2,0}); ``composed`` substitutes the computed kappa
    expansion into the tail expansion (rho_1 = a_1, rho_2 = a_1 gamma0 +
    a_2, then a*_1 = rho_1, a*_2 = rho_2 + gamma_1 rho_1). The two routes
    disagree because the closed form hard-codes a_1 = 1 while the defining
    integral of a_1 evaluates to 2; ``mismatch`` records the difference.
    """

    closed_form: tuple[float, float]
    composed: tuple[float, float]
    mismatch: float


def a_star_detail(quad: QuadratureSpec = COEFF_QUAD) -> AStarDetail:
    g0 = gamma0(quad)
    b20 = coefficient_b(2, 0, quad)
    closed_form = (1.0, g0 - 0.5 * g0 * g0 - b20)

    a1 = coefficient_a(1, quad)
    a2 = coefficient_a(2, quad)
    (gamma1,) = kappa_expansion_coeffs(1, quad)
    rho1, rho2 = a1, a1 * g0 + a2
    composed = (rho1, rho2 + gamma1 * rho1)

    mismatch = max(
        abs(closed_form[0] - composed[0]), abs(closed_form[1] - composed[1])
    )
    return AStarDetail(
        closed_form=closed_form, composed=composed, mismatch=mismatch
    )


def a_star_coeffs(
    quad: QuadratureSpec = COEFF_QUAD, strict: bool = True
) -> tuple[float, float]:
    """(a*_1, a*_2) closed-form values.

    With ``strict`` (the default) the composition cross-check is enforced
    and currently fails -- the two routes genuinely differ (see
    :class:`AStarDetail`). Pass ``strict=False`` to obtain the closed-form
    values anyway; the expansion evaluators do this explicitly and default
    to the composed route instead.
    """
    detail = a_star_detail(quad)
    if strict and detail.mismatch > _IDENTITY_TOL:
        raise ConsistencyError(
            "a* cross-check failed: closed form "
            f"{detail.closed_form} vs composed {detail.composed} "
            f"(mismatch {detail.mismatch:.3e})"
        )
    return detail.closed_form


# ---------------------------------------------------------------------------
# Aggregate table.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionCoefficients:
    """All expansion constants to depth J, with quadrature provenance.

    ``b`` maps (j, n) for j = 1..J, n = 0..2; ``a`` maps j = 1..J;
    ``gamma`` maps j = 1..min(J-1, 4) (the order-j coefficient consumes
    b_{j+1,1}); ``a_star`` maps j = 1..2 to the closed-form values.
    ``errors`` carries the quadrature error estimates for b and a;
    ``a_star_mismatch`` the cross-route difference described in
    :class:`AStarDetail`.
    """

    gamma0: float
    b: dict[tuple[int, int], float]
    a: dict[int, float]
    gamma: dict[int, float]
    a_star: dict[int, float]
    J: int
    quad_provenance: QuadratureSpec
    errors: dict[str, float]
    a_star_composed: dict[int, float]
    a_star_mismatch: float

    def rows(self) -> list[dict]:
        """Flat listing (one row per constant) for table/JSON output."""
        out = [
            {
                "name": "gamma0",
                "j": None,
                "n": None,
                "value": self.gamma0,
                "abs_error_estimate": self.errors.get("b_1_1", 0.0) / 2.0,
            }
        ]
        for (j, n), v in sorted(self.b.items()):
            out.append(
                {
                    "name": f"b_{j}_{n}",
                    "j": j,
                    "n": n,
                    "value": v,
                    "abs_error_estimate": self.errors.get(f"b_{j}_{n}", 0.0),
                }
            )
        for j, v in sorted(self.a.items()):
            out.append(
                {
                    "name": f"a_{j}",
                    "j": j,
                    "n": None,
                    "value": v,
                    "abs_error_estimate": self.errors.get(f"a_{j}", 0.0),
                }
            )
        for j, v in sorted(self.gamma.items()):
            out.append(
                {
                    "name": f"gamma_{j}",
                    "j": j,
                    "n": None,
                    "value": v,
                    "abs_error_estimate": float("nan"),
                }
            )
        for j, v in sorted(self.a_star.items()):
            out.append(
                {
                    "name": f"a_star_{j}",
                    "j": j,
                    "n": None,
                    "value": v,
                    "abs_error_estimate": (
                        0.0 if j == 1 else self.a_star_mismatch
                    ),
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "J": self.J,
                "quad": self.quad_provenance.fingerprint,
                "rows": self.rows(),
            },
            indent=2,
        )


def compute_coefficients(
    J: int = J_MAX_DEFAULT, quad: QuadratureSpec = COEFF_QUAD
) -> ExpansionCoefficients:
    """Compute and bundle every constant up to depth J (memoized parts)."""
    if not 1 <= J <= _J_HARD_CAP:
        raise DomainError(f"J must be in [1, {_J_HARD_CAP}]")
    b: dict[tuple[int, int], float] = {}
    errors: dict[str, float] = {}
    for j in range(1, J + 1):
        for n in range(3):
            val, err = _coefficient_cached(n, j, quad)
            b[(j, n)] = val
            errors[f"b_{j}_{n}"] = err
    a: dict[int, float] = {}
    for j in range(1, J + 1):
        a[j] = coefficient_a(j, quad)
        errors[f"a_{j}"] = _coefficient_cached(3, j, quad)[1]
    n_gamma = min(J - 1, 4)
    gammas = kappa_expansion_coeffs(n_gamma, quad) if n_gamma >= 1 else ()
    detail = a_star_detail(quad)
    return ExpansionCoefficients(
        gamma0=0.5 * b[(1, 1)],
        b=b,
        a=a,
        gamma={j + 1: v for j, v in enumerate(gammas)},
        a_star={1: detail.closed_form[0], 2: detail.closed_form[1]},
        J=J,
        quad_provenance=quad,
        errors=errors,
        a_star_composed={1: detail.composed[0], 2: detail.composed[1]},
        a_star_mismatch=detail.mismatch,
    )
