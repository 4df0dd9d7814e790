from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from errors import NumericError, require

MAX_SUBDIVISIONS = 10_000
# QUADPACK flags roundoff when the request sits at the edge of double precision; such a result is
# kept when its own error estimate stays within this factor of the request
ROUNDOFF_SLACK = 10.0


@dataclass(frozen=True)
class QuadResult:
    """
    abs_error_estimate <= error_bound on success; error_bound is rel_tol |value|,
    or ROUNDOFF_SLACK times that when QUADPACK flagged roundoff
    """

    value: float
    abs_error_estimate: float
    subdivisions: int
    error_bound: float

    def __float__(self):
        return float(self.value)


def integrate_half_line(
    f: Callable[[float], float],
    rel_tol: float = 1e-9,
    scale: Optional[float] = None,
    limit: int = MAX_SUBDIVISIONS,
) -> QuadResult:
    """
    integral of f over (0, inf)

    the half line is mapped onto (0, 1) by z = s u / (1 - u) and the result handed to
    QUADPACK's adaptive Gauss-Kronrod routine; s puts the integrand's bulk near u = 1/2
    """
    require(rel_tol > 0.0, f"rel_tol must be positive, got {rel_tol}")
    s = 1.0 if scale is None else float(scale)
    require(s > 0.0 and np.isfinite(s), f"scale must be positive and finite, got {scale}")

    def transformed(u: float) -> float:
        one_minus = 1.0 - u
        if one_minus <= 0.0:
            return 0.0
        return f(s * u / one_minus) * s / (one_minus * one_minus)

    out = quad(transformed, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=limit, full_output=1)
    value, abs_err, info = out[0], out[1], out[2]
    subdivisions = int(info.get("last", 0))
    if not np.isfinite(value) or not np.isfinite(abs_err):
        raise NumericError(
            "quadrature produced a non-finite result",
            partial=value,
            abs_error_estimate=abs_err,
            subdivisions=subdivisions,
        )
    bound = rel_tol * abs(value)
    if len(out) > 3:
        message = " ".join(str(out[3]).split())
        if subdivisions >= limit:
            raise NumericError(
                "quadrature subdivision cap exceeded",
                partial=value,
                abs_error_estimate=abs_err,
                subdivisions=subdivisions,
            )
        bound *= ROUNDOFF_SLACK
        if abs_err > bound:
            raise NumericError(
                f"quadrature failed: {message}",
                partial=value,
                abs_error_estimate=abs_err,
                subdivisions=subdivisions,
            )
        logging.debug(f"quadrature accepted with warning: {message} abs_err={abs_err:.3e}")
    return QuadResult(
        value=float(value), abs_error_estimate=float(abs_err), subdivisions=subdivisions, error_bound=float(bound)
    )
