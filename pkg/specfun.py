from __future__ import annotations

import logging
import math
import os

import numpy as np

from errors import DomainError, NumericError, require
from quadrature import integrate_half_line

if "NOJIT" in os.environ and os.environ["NOJIT"] == "true":
    logging.debug("not using numba")

    def njit(pyfunc=None, **kwargs):
        def wrap(func):
            return func

        if pyfunc is not None:
            return wrap(pyfunc)
        else:
            return wrap

else:
    logging.debug("using numba")
    from numba import njit


EULER_GAMMA = 0.57721566490153286061
SERIES_MAX_TERMS = 2000
CF_MAX_LEVELS = 1000
EPS = 2.220446049250313e-16
CF_TOL = 1e-15
FPMIN = 1e-300
# max |term| / |sum| tolerated in an alternating series before the result is refused
CANCELLATION_LIMIT = 1e5
TRICOMI_REL_TOL = 1e-11


@njit
def _harmonic(m):
    # ascending order so that H_m == H_{m-1} + 1/m as floating point operations
    h = 0.0
    for j in range(1, m + 1):
        h += 1.0 / j
    return h


@njit
def _e1_series(x):
    # E1(x) = -gamma - ln(x) - sum_{n>=1} (-x)^n / (n n!)
    s = 0.0
    term = 1.0
    for n in range(1, SERIES_MAX_TERMS + 1):
        term *= -x / n
        contrib = term / n
        s += contrib
        if abs(contrib) <= EPS * abs(s):
            return -EULER_GAMMA - math.log(x) - s, n, True
    return -EULER_GAMMA - math.log(x) - s, SERIES_MAX_TERMS, False


@njit
def _upper_gamma_cf(a, x):
    """
    modified Lentz evaluation of the continued fraction
    Gamma(a, x) = e^-x x^a / (x + 1 - a - 1 (1 - a) / (x + 3 - a - 2 (2 - a) / (x + 5 - a - ...)))
    returns h such that Gamma(a, x) = e^-x x^a h
    """
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, CF_MAX_LEVELS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h, i, True
    return h, CF_MAX_LEVELS, False


@njit
def _e1_scaled(x):
    # e^x E1(x)
    if x <= 1.0:
        value, iterations, converged = _e1_series(x)
        return math.exp(x) * value, iterations, converged
    return _upper_gamma_cf(0.0, x)


@njit
def _upper_gamma_scaled(k, b):
    # b^k e^b Gamma(1 - k, b)
    if k == 1 or b <= 1.0:
        t, iterations, converged = _e1_scaled(b)
        t *= b
        # downward recurrence Gamma(s-1, b) = (Gamma(s, b) - b^(s-1) e^-b) / (s-1), scaled;
        # every step multiplies the error by b / j <= 1 on this branch
        for j in range(1, k):
            t = b * (1.0 - t) / j
        return t, iterations, converged
    h, iterations, converged = _upper_gamma_cf(1.0 - k, b)
    return b * h, iterations, converged


@njit
def _upper_gamma_reg_int(k, x):
    # Q(k, x) = e^-x sum_{j<k} x^j / j!
    if x == 0.0:
        return 1.0
    if x == np.inf:
        return 0.0
    lx = math.log(x)
    s = 0.0
    for j in range(k):
        s += math.exp(-x + j * lx - math.lgamma(j + 1.0))
    return min(s, 1.0)


@njit
def _lower_gamma_reg_int(k, x):
    # P(k, x) = 1 - Q(k, x); tail series sum_{j>=k} e^-x x^j / j! where it is accurate
    if x == 0.0:
        return 0.0
    if x == np.inf:
        return 1.0
    if x < k + 1.0:
        term = math.exp(-x + k * math.log(x) - math.lgamma(k + 1.0))
        s = term
        j = k
        for _ in range(SERIES_MAX_TERMS):
            j += 1
            term *= x / j
            s += term
            if term <= EPS * s:
                break
        return min(s, 1.0)
    return max(1.0 - _upper_gamma_reg_int(k, x), 0.0)


@njit
def _hyp2f1_series(a, b, c, z):
    s = 1.0
    term = 1.0
    max_term = 1.0
    for n in range(SERIES_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        s += term
        at = abs(term)
        if at > max_term:
            max_term = at
        if not np.isfinite(s):
            return s, n + 1, False, max_term
        if at <= EPS * abs(s):
            return s, n + 1, True, max_term
    return s, SERIES_MAX_TERMS, False, max_term


@njit
def _ln_hyp2f1(a, b, c, z):
    """
    ln|2F1(a, b; c; z)| and its sign, z < 1
    z >= 0: direct series
    z < 0: Pfaff, 2F1(a, b; c; z) = (1 - z)^-a 2F1(a, c - b; c; z / (z - 1)), z / (z - 1) in (0, 1)
    """
    if z < 0.0:
        value, iterations, converged, max_term = _hyp2f1_series(a, c - b, c, z / (z - 1.0))
        log_prefactor = -a * math.log1p(-z)
    else:
        value, iterations, converged, max_term = _hyp2f1_series(a, b, c, z)
        log_prefactor = 0.0
    sign = 1.0 if value >= 0.0 else -1.0
    if value == 0.0:
        return -np.inf, sign, iterations, converged, max_term, value
    return log_prefactor + math.log(abs(value)), sign, iterations, converged, max_term, value


@njit
def _v_log_moment_finite_sum(k, a, e1s):
    """
    V(k; a) = ln(a) + sum_{mu<k} 1/(k-mu-1)! ((-1)^(k-mu) a^(k-mu-1) e^a Ei(-a) + sum_{v=1}^{k-mu-1} (v-1)! (-a)^(k-mu-1-v))
    with e^a Ei(-a) = -e1s; returns (value, largest |addend|, sum of the addends)
    """
    total = 0.0
    largest = 0.0
    for mu in range(k):
        m = k - mu - 1
        norm = math.exp(math.lgamma(m + 1.0))
        inner = (-a) ** m * e1s
        largest = max(largest, abs(inner) / norm)
        for v in range(1, m + 1):
            addend = math.exp(math.lgamma(v * 1.0)) * (-a) ** (m - v)
            largest = max(largest, abs(addend) / norm)
            inner += addend
        total += inner / norm
    return math.log(a) + total, largest, total


@njit
def _kth_largest(values, k, taken):
    # partial selection; equal values resolve to the lowest original index first
    n = len(values)
    for i in range(n):
        taken[i] = False
    idx = -1
    for _ in range(k):
        idx = -1
        for i in range(n):
            if not taken[i] and (idx < 0 or values[i] > values[idx]):
                idx = i
        taken[idx] = True
    return values[idx], idx


# ---------------------------------------------------------------------------- #
#                                public wrappers                                #
# ---------------------------------------------------------------------------- #


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0.0 and float(x) == math.floor(x)


def ln_gamma(x: float) -> float:
    require(x > 0.0, f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def ln_beta(x: float, y: float) -> float:
    require(x > 0.0 and y > 0.0, f"ln_beta requires positive arguments, got ({x}, {y})")
    return math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y)


def harmonic(m: int) -> float:
    require(m >= 0, f"harmonic requires m >= 0, got {m}")
    return _harmonic(int(m))


def digamma_int(k: int) -> float:
    require(k >= 1, f"digamma_int requires k >= 1, got {k}")
    return -EULER_GAMMA + _harmonic(int(k) - 1)


def exp_integral_e1_scaled(x: float) -> float:
    """e^x E1(x), finite for every x > 0"""
    require(x > 0.0, f"exp_integral_e1 requires x > 0, got {x}")
    value, iterations, converged = _e1_scaled(float(x))
    if not converged:
        raise NumericError("E1 evaluation did not converge", x=x, iterations=iterations, partial=value)
    return value


def exp_integral_e1(x: float) -> float:
    require(x > 0.0, f"exp_integral_e1 requires x > 0, got {x}")
    if x <= 1.0:
        value, iterations, converged = _e1_series(float(x))
    else:
        h, iterations, converged = _upper_gamma_cf(0.0, float(x))
        value = h * math.exp(-x)
    if not converged:
        raise NumericError("E1 evaluation did not converge", x=x, iterations=iterations, partial=value)
    return value


def upper_gamma_scaled(k: int, b: float) -> float:
    """
    b^k e^b Gamma(1 - k, b), never forming e^b or Gamma(1 - k, b) on their own
    tends to 1 as b grows
    """
    require(k >= 1, f"upper_gamma_scaled requires k >= 1, got {k}")
    require(b > 0.0, f"upper_gamma_scaled requires b > 0, got {b}")
    value, iterations, converged = _upper_gamma_scaled(int(k), float(b))
    if not converged:
        raise NumericError(
            "scaled upper incomplete gamma did not converge",
            k=k,
            b=b,
            iterations=iterations,
            partial=value,
        )
    return value


def lower_gamma_reg(k: int, x: float) -> float:
    """gamma(k, x) / (k - 1)! for integer k"""
    require(k >= 1, f"lower_gamma_reg requires k >= 1, got {k}")
    require(x >= 0.0, f"lower_gamma_reg requires x >= 0, got {x}")
    return _lower_gamma_reg_int(int(k), float(x))


def upper_gamma_reg(k: int, x: float) -> float:
    """Gamma(k, x) / (k - 1)! for integer k"""
    require(k >= 1, f"upper_gamma_reg requires k >= 1, got {k}")
    require(x >= 0.0, f"upper_gamma_reg requires x >= 0, got {x}")
    return _upper_gamma_reg_int(int(k), float(x))


def ln_gauss_2f1(a: float, b: float, c: float, z: float) -> (float, float):
    """
    returns (ln|2F1(a, b; c; z)|, sign)
    raises NumericError when the series does not converge within SERIES_MAX_TERMS
    or when cancellation would leave fewer digits than the accuracy target
    """
    if not z < 1.0:
        raise DomainError(f"gauss_2f1 requires z < 1, got {z}")
    if _is_nonpositive_int(c):
        raise DomainError(f"gauss_2f1 requires c not a nonpositive integer, got {c}")
    ln_abs, sign, iterations, converged, max_term, partial = _ln_hyp2f1(
        float(a), float(b), float(c), float(z)
    )
    if not converged:
        raise NumericError(
            "2F1 series did not converge",
            a=a,
            b=b,
            c=c,
            z=z,
            iterations=iterations,
            partial=partial,
        )
    if partial == 0.0 or max_term > CANCELLATION_LIMIT * abs(partial):
        raise NumericError(
            "2F1 series lost its accuracy to cancellation",
            a=a,
            b=b,
            c=c,
            z=z,
            largest_term=max_term,
            partial=partial,
        )
    return ln_abs, sign


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    ln_abs, sign = ln_gauss_2f1(a, b, c, z)
    return sign * math.exp(ln_abs)


def tricomi_u(a: float, b: float, z: float) -> float:
    """
    U(a, b, z) = 1 / Gamma(a) int_0^inf e^-zt t^(a-1) (1 + t)^(b-a-1) dt
    """
    require(a > 0.0, f"tricomi_u requires a > 0, got {a}")
    require(z > 0.0, f"tricomi_u requires z > 0, got {z}")

    a, b, z = float(a), float(b), float(z)
    log_norm = math.lgamma(a)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return math.exp(-z * t + (a - 1.0) * math.log(t) + (b - a - 1.0) * math.log1p(t) - log_norm)

    # mass of the integrand sits around t ~ max(a, b - 1) / z
    scale = max(1.0, a, b - 1.0) / z
    return integrate_half_line(integrand, rel_tol=TRICOMI_REL_TOL, scale=scale).value


def v_log_moment(k: int, a: float) -> float:
    """
    V(k; a) = int_0^inf t^(k-1) e^-t / (k-1)! ln(t + a) dt
    """
    require(k >= 1, f"v_log_moment requires k >= 1, got {k}")
    require(a > 0.0, f"v_log_moment requires a > 0, got {a}")
    e1s = exp_integral_e1_scaled(a)
    value, largest, correction = _v_log_moment_finite_sum(int(k), float(a), e1s)
    if largest <= CANCELLATION_LIMIT * abs(correction):
        return value
    # alternating finite sum cancels for large a and k; use the positive recurrence
    # V(m + 1; a) = V(m; a) + a^m e^a Gamma(-m, a)
    logging.debug(f"v_log_moment k={k} a={a}: finite sum cancels, using recurrence")
    return math.log(a) + sum(upper_gamma_scaled(m, a) for m in range(1, int(k) + 1)) / a


def kth_largest(values, k: int) -> float:
    values = np.ascontiguousarray(values, dtype=np.float64)
    require(values.ndim == 1, "kth_largest requires a one-dimensional sequence")
    require(1 <= k <= len(values), f"k={k} out of range for {len(values)} values")
    value, _ = _kth_largest(values, int(k), np.zeros(len(values), dtype=np.bool_))
    return float(value)
