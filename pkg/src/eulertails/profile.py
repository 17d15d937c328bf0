"""Cumulant profile of the random Euler product over primes up to y.

The log-moment profile is

    phi(s, y) = log E[ L(1, y)^s ] = sum_{p <= y} log E_p(s),

where E_p is the local angular moment of :mod:`.local`. ``phi_n`` denotes
the n-th s-derivative at real s = sigma: phi_1 is the tilted mean of
log L(1, y), phi_2 its tilted variance (hence positive for every real
tilt), and phi_3, phi_4 the higher cumulants, which enter only through
error estimates.

Evaluation strategy: primes are bucketed by required Gauss-Legendre node
count and each bucket is evaluated as one vectorized tilted-moment matrix,
reduced in increasing-prime order by exact summation. For tilts
sigma >= 3, primes with p > 16 max(sigma, 1) can optionally be routed
through the limit-shape closed forms

    log E_p ~ g(sigma/p),   dlog E_p ~ (1/2) g'(sigma/p) log D_p(0),
    d^2 log E_p ~ g''(sigma/p) / p^2,

an O(sigma/p^2)-accurate fast path; a sentinel subset of fast-path primes
is always cross-checked against quadrature. Orders 3 and 4 are
Richardson-extrapolated central differences of the order-2 sum in sigma,
which is accurate far beyond their only role of bounding error terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    DECAY_C1,
    DECAY_C2,
    DECAY_C3,
    DECAY_DELTA,
    EULER_GAMMA,
    FAST_PATH_CHECK_C,
)
from .coefficients import coefficient_b
from .errors import AccuracyError, ConsistencyError, DomainError
from .limitshape import g_deriv, g_fn
from .local import FAST_PATH_FACTOR, local_log_derivatives
from .primes import primes_for
from .quadrature import DEFAULT_QUAD, QuadratureSpec, panel_nodes

#: orders carried by ProfileDerivatives (phi_0 .. phi_4)
MAX_ORDER = 4

#: relative step for the order-3/4 central differences in sigma
_FD_REL_STEP = 0.02

#: number of fast-path primes re-checked by quadrature on every call
_SENTINEL_COUNT = 4

#: cap on the expansion length of phi_asymptotic (b-coefficients beyond
#: this are increasingly expensive and useless inside the error term)
J_MAX = 5


@dataclass(frozen=True)
class ProfileDerivatives:
    """phi_n(sigma, y) for n = 0..4; entries beyond max_order are NaN."""

    sigma: float
    y: float
    values: tuple[float, float, float, float, float]

    def phi(self, n: int) -> float:
        if not 0 <= n <= MAX_ORDER:
            raise DomainError(f"order must be in 0..{MAX_ORDER}")
        return self.values[n]


def _nodes_vec(p: np.ndarray, sigma: float, tau_max: float = 0.0) -> np.ndarray:
    """Vectorized Gauss-Legendre size policy (see local.nodes_for)."""
    smax = max(abs(sigma), 1.0)
    n = np.ceil(48.0 + 12.0 * np.sqrt(smax / p) + 4.8 * tau_max / p)
    return np.minimum(n, 20000).astype(int)


def _layout(
    primes: np.ndarray, sigma: float, quad: QuadratureSpec, tau_max: float = 0.0
) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Group primes into shared-rule buckets: (indices, primes, nodes)."""
    if quad.nodes is not None:
        idx = np.arange(primes.size)
        return [(idx, primes.astype(float), quad.nodes)]
    want = _nodes_vec(primes, sigma, tau_max)
    # round the node count up to the next power of two (floor 64) so that
    # only a handful of distinct rules are instantiated
    pow2 = np.maximum(64, 2 ** np.ceil(np.log2(want)).astype(int))
    out = []
    for n in np.unique(pow2):
        idx = np.nonzero(pow2 == n)[0]
        out.append((idx, primes[idx].astype(float), int(n)))
    return out


def _bucket_sums(
    pvec: np.ndarray, sigma: float, n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(log E_p, dlog E_p, curvature) for one bucket, peak-factored."""
    th, w = panel_nodes(0.0, np.pi, n)
    s2 = np.sin(th) ** 2
    pv = pvec[:, None]
    logd = -np.log(1.0 - 2.0 * np.cos(th)[None, :] / pv + pv**-2.0)
    m = sigma * logd
    mx = np.max(m, axis=1)
    kern = np.exp(m - mx[:, None]) * s2[None, :]
    z = kern @ w
    mean = (kern * logd) @ w / z
    var = (kern * (logd - mean[:, None]) ** 2) @ w / z
    log_e = mx + np.log(z * (2.0 / np.pi))
    return log_e, mean, var


def _fast_sums(
    pvec: np.ndarray, sigma: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Limit-shape closed forms for p well above the tilt (vectorized)."""
    u = sigma / pvec
    log_d0 = -2.0 * np.log1p(-1.0 / pvec)
    log_e = np.asarray(g_fn(u))
    mean = 0.5 * np.asarray(g_deriv(u, 1)) * log_d0
    var = np.asarray(g_deriv(u, 2)) / pvec**2
    return log_e, mean, var


def _sentinel_check(pvec: np.ndarray, sigma: float, quad: QuadratureSpec) -> None:
    """Compare the fast path against quadrature on its smallest primes.

    The tolerance is the closed forms' own error envelope (relative factor
    1 + O(sigma/p^2) for the value, absolute O(1/p^2 + sigma/p^3) for the
    first log-derivative, min(1/(sigma^2 p), 1/(sigma p^2)) for the
    curvature) with one frozen calibration constant.
    """
    sent = pvec[:_SENTINEL_COUNT]
    f_log, f_mean, f_var = _fast_sums(sent, sigma)
    c = FAST_PATH_CHECK_C
    for i, p in enumerate(sent):
        ref = local_log_derivatives(p, sigma, quad)
        checks = (
            ("log-moment", f_log[i], ref.log_value, c * sigma / p**2),
            ("dlog", f_mean[i], ref.dlog1, c * (p**-2 + sigma * p**-3.0)),
            (
                "curvature",
                f_var[i],
                ref.curvature,
                c * min(1.0 / (sigma**2 * p), 1.0 / (sigma * p**2)),
            ),
        )
        for label, fast, slow, allow in checks:
            if abs(fast - slow) > allow:
                raise ConsistencyError(
                    f"fast-path {label} at p={int(p)}, sigma={sigma:g} is "
                    f"{abs(fast - slow):.3e} from quadrature "
                    f"(allowed {allow:.3e})"
                )


def _profile_sums(
    layout: list[tuple[np.ndarray, np.ndarray, int]],
    fast: np.ndarray | None,
    sigma: float,
) -> tuple[float, float, float]:
    """Orders 0..2 prime sums for a fixed bucket layout and fast set."""
    parts_log: list[np.ndarray] = []
    parts_mean: list[np.ndarray] = []
    parts_var: list[np.ndarray] = []
    for _, pvec, n in layout:
        log_e, mean, var = _bucket_sums(pvec, sigma, n)
        parts_log.append(log_e)
        parts_mean.append(mean)
        parts_var.append(var)
    if fast is not None and fast.size:
        log_e, mean, var = _fast_sums(fast, sigma)
        parts_log.append(log_e)
        parts_mean.append(mean)
        parts_var.append(var)
    phi0 = math.fsum(np.concatenate(parts_log))
    phi1 = math.fsum(np.concatenate(parts_mean))
    phi2 = math.fsum(np.concatenate(parts_var))
    return phi0, phi1, phi2


def phi_profile(
    sigma: float,
    y: float,
    max_order: int = 2,
    quad: QuadratureSpec = DEFAULT_QUAD,
    fast_path: bool = True,
) -> ProfileDerivatives:
    """phi_n(sigma, y) for n = 0..max_order by summation over primes.

    Negative tilts are supported (always by quadrature; the closed-form
    fast path applies only for sigma >= 3, to primes p > 16 max(sigma, 1)).
    Orders 3 and 4 are central differences of the order-2 sum with two step
    sizes and Richardson extrapolation, over a sigma-independent bucket
    layout so the differenced function is smooth.
    """
    sigma = float(sigma)
    y = float(y)
    if y < 2:
        raise DomainError("phi_profile requires y >= 2")
    if not 0 <= max_order <= MAX_ORDER:
        raise DomainError(f"max_order must be in 0..{MAX_ORDER}")
    primes = primes_for(y)

    if quad.scheme == "adaptive_simpson":
        # verification route: per-prime adaptive quadrature
        def sums(s: float) -> tuple[float, float, float]:
            locs = [local_log_derivatives(int(p), s, quad) for p in primes]
            return (
                math.fsum(l.log_value for l in locs),
                math.fsum(l.dlog1 for l in locs),
                math.fsum(l.curvature for l in locs),
            )

    else:
        use_fast = fast_path and sigma >= 3.0
        cut = FAST_PATH_FACTOR * max(abs(sigma), 1.0)
        slow_p = primes[primes <= cut] if use_fast else primes
        fast_p = primes[primes > cut].astype(float) if use_fast else None
        layout = _layout(slow_p, sigma, quad)
        if fast_p is not None and fast_p.size:
            _sentinel_check(fast_p, sigma, quad)

        def sums(s: float) -> tuple[float, float, float]:
            return _profile_sums(layout, fast_p, s)

    phi0, phi1, phi2 = sums(sigma)
    if sigma == 0.0:
        phi0 = 0.0  # exact: every E_p(0) = 1
    values = [phi0, phi1, phi2, math.nan, math.nan]
    if max_order >= 3:
        h = _FD_REL_STEP * max(abs(sigma), 1.0)
        c2 = {d: sums(sigma + d * h)[2] for d in (-1.0, -0.5, 0.5, 1.0)}
        d_h = (c2[1.0] - c2[-1.0]) / (2.0 * h)
        d_h2 = (c2[0.5] - c2[-0.5]) / h
        values[3] = (4.0 * d_h2 - d_h) / 3.0
        if max_order == 4:
            s_h = (c2[1.0] - 2.0 * phi2 + c2[-1.0]) / h**2
            s_h2 = (c2[0.5] - 2.0 * phi2 + c2[-0.5]) / (0.5 * h) ** 2
            values[4] = (4.0 * s_h2 - s_h) / 3.0
    out = values[: max_order + 1] + [math.nan] * (MAX_ORDER - max_order)
    if not all(math.isfinite(v) for v in out[: max_order + 1]):
        raise AccuracyError(
            f"non-finite profile value at sigma={sigma:g}, y={y:g}"
        )
    return ProfileDerivatives(sigma=sigma, y=y, values=tuple(out))


def phi_asymptotic(sigma: float, y: float, n: int, J: int) -> float:
    """Expansion of phi_n(sigma, y) in powers of 1/log(sigma).

    For n = 0:  sigma (2 log log sigma + 2 gamma + sum_j b_{j,0}/log^j sigma),
    for n = 1:          2 log log sigma + 2 gamma + sum_j b_{j,1}/log^j sigma,
    for n = 2:  (1/sigma) sum_j b_{j,2}/log^j sigma,

    each truncated at j = J; the neglected remainder is estimated by
    :func:`phi_asymptotic_remainder`.
    """
    if not (y >= sigma >= 3):
        raise DomainError("phi_asymptotic requires y >= sigma >= 3")
    if n not in (0, 1, 2):
        raise DomainError("phi_asymptotic supports orders n = 0, 1, 2")
    if not 1 <= J <= J_MAX:
        raise DomainError(f"J must be in 1..{J_MAX}")
    log_s = math.log(sigma)
    series = math.fsum(
        coefficient_b(j, n) / log_s**j for j in range(1, J + 1)
    )
    if n == 0:
        return sigma * (2.0 * math.log(log_s) + 2.0 * EULER_GAMMA + series)
    if n == 1:
        return 2.0 * math.log(log_s) + 2.0 * EULER_GAMMA + series
    return series / sigma


def phi_asymptotic_remainder(sigma: float, y: float, n: int, J: int) -> float:
    """Size of the remainder dropped by :func:`phi_asymptotic`.

    The shape is R_J(sigma, y) = 1/log^{J+1} sigma + sigma/(y log y),
    carried with the same outer scaling as the expansion itself (sigma for
    n = 0, 1 for n = 1, 1/sigma for n = 2); the implied constant is left to
    the caller's tolerance.
    """
    if not (y >= sigma >= 3):
        raise DomainError("remainder requires y >= sigma >= 3")
    r = math.log(sigma) ** -(J + 1) + sigma / (y * math.log(y))
    scale = {0: sigma, 1: 1.0, 2: 1.0 / sigma}[n]
    return scale * r


def moment_complex(
    s: complex, y: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> complex:
    """log E[ L(1, y)^s ] for complex s, as a log-value.

    The real part is exact in branch terms; the imaginary part is the
    continuous continuation from the real axis, obtained per prime by
    stepping tau from 0 and unwrapping the factor's phase (each local
    moment is nonzero, so the continuation is well defined).
    """
    s = complex(s)
    y = float(y)
    if y < 2:
        raise DomainError("moment_complex requires y >= 2")
    sigma, tau = s.real, s.imag
    primes = primes_for(y)
    if tau == 0.0:
        prof = phi_profile(sigma, y, max_order=0, quad=quad, fast_path=False)
        return complex(prof.values[0], 0.0)
    re_parts: list[float] = []
    im_parts: list[float] = []
    for p in primes:
        log_d0 = -2.0 * math.log1p(-1.0 / p)
        steps = int(np.ceil(abs(tau) * log_d0 / 0.5)) + 2
        n = _nodes_vec(np.asarray([p], dtype=float), sigma, abs(tau))[0]
        th, w = panel_nodes(0.0, np.pi, int(n))
        s2 = np.sin(th) ** 2
        logd = -np.log(1.0 - 2.0 * np.cos(th) / p + p**-2.0)
        m = sigma * logd
        mx = float(np.max(m))
        kern = np.exp(m - mx) * s2 * w
        for _ in range(5):
            tgrid = np.linspace(0.0, tau, steps)
            vals = np.exp(1j * np.outer(logd, tgrid))
            line = kern @ vals
            args = np.unwrap(np.angle(line))
            if np.max(np.abs(np.diff(args))) < 2.5:
                break
            steps *= 2
        else:
            raise AccuracyError(
                f"phase tracking for p={p} did not stabilize at {steps} steps"
            )
        re_parts.append(mx + math.log(abs(line[-1]) * 2.0 / np.pi))
        im_parts.append(float(args[-1]))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


class MomentLine:
    """Centered complex log-moment along the vertical line Re s = sigma.

    Precomputes the tilted angular kernels once; calling the object with an
    array of imaginary offsets tau returns

        Lambda(tau) = log E(sigma + i tau, y) - phi_0 - i tau phi_1,

    with each prime's factor taken on the principal branch after removing
    its linear phase (the removal keeps every factor's argument small, and
    the downstream contour integrand only needs the total phase mod 2 pi).
    ``tau_max`` sizes the angular rules for the intended oscillation range.
    """

    def __init__(
        self,
        sigma: float,
        y: float,
        quad: QuadratureSpec = DEFAULT_QUAD,
        tau_max: float = 0.0,
    ) -> None:
        self.sigma = float(sigma)
        self.y = float(y)
        primes = primes_for(y)
        self._buckets: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        parts0: list[np.ndarray] = []
        parts1: list[np.ndarray] = []
        parts2: list[np.ndarray] = []
        for _, pvec, n in _layout(primes, sigma, quad, tau_max=tau_max):
            th, w = panel_nodes(0.0, np.pi, n)
            s2 = np.sin(th) ** 2
            pv = pvec[:, None]
            logd = -np.log(1.0 - 2.0 * np.cos(th)[None, :] / pv + pv**-2.0)
            m = self.sigma * logd
            mx = np.max(m, axis=1)
            kern = np.exp(m - mx[:, None]) * s2[None, :] * w[None, :]
            z = kern.sum(axis=1)
            mean = (kern * logd).sum(axis=1) / z
            var = (kern * (logd - mean[:, None]) ** 2).sum(axis=1) / z
            self._buckets.append((kern / z[:, None], logd, mean))
            parts0.append(mx + np.log(z * (2.0 / np.pi)))
            parts1.append(mean)
            parts2.append(var)
        self.phi0 = math.fsum(np.concatenate(parts0))
        self.phi1 = math.fsum(np.concatenate(parts1))
        self.phi2 = math.fsum(np.concatenate(parts2))

    def __call__(self, taus: np.ndarray) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        out = np.zeros(taus.size, dtype=complex)
        chunk = max(1, 2_000_000 // max(sum(k.size for k, _, _ in self._buckets), 1))
        for lo in range(0, taus.size, chunk):
            tg = taus[lo : lo + chunk]
            acc = np.zeros(tg.size, dtype=complex)
            for kern, logd, mean in self._buckets:
                phase = (logd[:, :, None] - mean[:, None, None]) * tg[None, None, :]
                vals = np.einsum("pn,pnm->pm", kern, np.exp(1j * phase))
                acc += np.log(vals).sum(axis=0)
            out[lo : lo + chunk] = acc
        return out


@dataclass(frozen=True)
class DecayPoint:
    """One vertical-line modulus sample against its regime bound."""

    tau: float
    ratio: float  #: |E(sigma + i tau, y)| / E(sigma, y)
    regime: int  #: 1 trivial, 2 Gaussian, 3 stretched-exponential
    bound: float
    ok: bool


@dataclass(frozen=True)
class DecayReport:
    sigma: float
    y: float
    delta: float
    points: tuple[DecayPoint, ...]
    all_ok: bool


def decay_ratio_check(
    sigma: float,
    y: float,
    tau_grid,
    delta: float = DECAY_DELTA,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> DecayReport:
    """Classify |E(sigma+i tau, y)|/E(sigma, y) into its decay regimes.

    Regimes (boundaries in |tau|): below c1 sqrt(sigma) log sigma, and
    above y^(1/delta), only the trivial bound 1 is claimed; between that
    and sigma, a Gaussian bound exp(-c2 tau^2 / (sigma log^2 sigma));
    between sigma and y^(1/delta), a stretched-exponential bound
    exp(-c3 |tau|^delta). The constants are frozen calibrations, not
    claims about any theoretical implied constants.
    """
    sigma = float(sigma)
    y = float(y)
    if not (y >= sigma >= 3):
        raise DomainError("decay_ratio_check requires y >= sigma >= 3")
    if not 0.0 < delta < 0.25:
        raise DomainError("delta must lie in (0, 1/4)")
    line = MomentLine(sigma, y, quad=quad, tau_max=float(np.max(np.abs(tau_grid))))
    log_s = math.log(sigma)
    t_low = DECAY_C1 * math.sqrt(sigma) * log_s
    t_high = y ** (1.0 / delta)
    points = []
    for tau in tau_grid:
        tau = float(tau)
        ratio = float(np.exp(np.real(line(np.asarray([tau]))[0])))
        at = abs(tau)
        if at <= t_low or at >= t_high:
            regime, bound = 1, 1.0
        elif at <= sigma:
            regime = 2
            bound = math.exp(-DECAY_C2 * tau**2 / (sigma * log_s**2))
        else:
            regime = 3
            bound = math.exp(-DECAY_C3 * at**delta)
        # the trivial bound holds in every regime; allow quadrature fuzz
        ok = ratio <= min(bound, 1.0) * (1.0 + 1e-9)
        points.append(DecayPoint(tau=tau, ratio=ratio, regime=regime, bound=bound, ok=ok))
    return DecayReport(
        sigma=sigma,
        y=y,
        delta=delta,
        points=tuple(points),
        all_ok=all(pt.ok for pt in points),
    )
