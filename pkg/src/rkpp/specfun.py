"""Special functions used by the seed solutions.

Everything here accepts numpy arrays for the main argument so that seed
solutions can be evaluated on whole grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticModulus",
    "erfc",
    "upper_gamma",
    "elliptic_K",
    "jacobi_sncndn",
    "jacobi_sn",
    "jacobi_cn",
    "jacobi_dn",
    "jacobi_sd",
    "heat_polynomial",
    "heat_polynomial_coefficients",
    "SQRT2_OVER_2",
]

SQRT2_OVER_2 = math.sqrt(2.0) / 2.0
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class EllipticModulus:
    k: float

    def __post_init__(self):
        if not (0.0 <= self.k < 1.0):
            raise ValueError(f"elliptic modulus must satisfy 0 <= k < 1, got {self.k!r}")

    @property
    def complementary(self) -> float:
        return math.sqrt(1.0 - self.k * self.k)


def _modulus(k) -> float:
    return k.k if isinstance(k, EllipticModulus) else EllipticModulus(float(k)).k


# ---------------------------------------------------------------------------
# erfc

_ERF_SERIES_TERMS = 60
_CF_DEPTH = 120
_SPLIT = 2.0


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)); all terms positive
    term = np.array(x, dtype=float)
    total = term.copy()
    x2 = 2.0 * np.square(x)
    for n in range(1, _ERF_SERIES_TERMS):
        term = term * x2 / (2 * n + 1)
        total = total + term
    return 2.0 * _INV_SQRT_PI * np.exp(-np.square(x)) * total


def _erfc_cf(x):
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated bottom-up
    tail = np.array(x, dtype=float)
    for n in range(_CF_DEPTH, 0, -1):
        tail = x + (n / 2.0) / tail
    return np.exp(-np.square(x)) * _INV_SQRT_PI / tail


def erfc(x):
    """Complementary error function, absolute error below 1e-12."""
    xa = np.asarray(x, dtype=float)
    ax = np.abs(xa)
    small = ax < _SPLIT
    out = np.empty_like(ax)
    if np.any(small):
        out[small] = 1.0 - _erf_series(ax[small])
    if np.any(~small):
        out[~small] = _erfc_cf(ax[~small])
    out = np.where(xa < 0, 2.0 - out, out)
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# Upper incomplete gamma

_GAMMA_EPS = 1e-16
_GAMMA_MAXITER = 10_000


def _lower_gamma_series(s: float, x: float) -> float:
    # gamma(s, x) = x^s e^-x sum x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    for n in range(1, _GAMMA_MAXITER):
        term *= x / (s + n)
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + s * math.log(x))


def _upper_gamma_cf(s: float, x: float) -> float:
    # modified Lentz on the Legendre continued fraction
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return math.exp(-x + s * math.log(x)) * h


def upper_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma function for ``s > 0`` and ``x >= 0``."""
    s = float(s)
    x = float(x)
    if not s > 0:
        raise ValueError(f"upper_gamma requires s > 0, got {s!r}")
    if x < 0:
        raise ValueError(f"upper_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) - _lower_gamma_series(s, x)
    return _upper_gamma_cf(s, x)


# ---------------------------------------------------------------------------
# Elliptic functions


def _agm_sequence(k: float, tol: float = 1e-16):
    a, b, c = [1.0], [math.sqrt(1.0 - k * k)], [k]
    while abs(c[-1]) > tol * a[-1] and len(a) < 64:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, b, c


def elliptic_K(k) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 AGM(1, k'))."""
    k = _modulus(k)
    a, _, _ = _agm_sequence(k)
    return math.pi / (2.0 * a[-1])


def jacobi_sncndn(u, k):
    """Return ``(sn, cn, dn)`` by descending Landen (AGM) recursion."""
    k = _modulus(k)
    u = np.asarray(u, dtype=float)
    a, _, c = _agm_sequence(k)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(c[j] / a[j] * np.sin(phi), -1.0, 1.0)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn >= k' > 0 for real argument; the cos-ratio form is 0/0 at u = K
    dn = np.sqrt(np.maximum(1.0 - (k * sn) ** 2, 0.0))
    if u.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_sn(u, k):
    return jacobi_sncndn(u, k)[0]


def jacobi_cn(u, k):
    return jacobi_sncndn(u, k)[1]


def jacobi_dn(u, k):
    return jacobi_sncndn(u, k)[2]


def jacobi_sd(u, k):
    """sd(u, k) = sn(u, k) / dn(u, k)."""
    sn, _, dn = jacobi_sncndn(u, k)
    return sn / dn


# ---------------------------------------------------------------------------
# Heat (Kampe de Feriet) polynomials


def heat_polynomial_coefficients(m: int) -> list[tuple[int, int, float]]:
    """Terms ``(power of theta, power of xi, coefficient)`` of H_m(xi, theta)."""
    if m < 0:
        raise ValueError("heat polynomial degree must be non-negative")
    fm = math.factorial(m)
    return [
        (j, m - 2 * j, fm / (math.factorial(j) * math.factorial(m - 2 * j)))
        for j in range(m // 2 + 1)
    ]


def heat_polynomial(m: int, xi, theta):
    """H_m(xi, theta) = m! sum_j theta^j xi^(m-2j) / (j! (m-2j)!)."""
    xi = np.asarray(xi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    terms = heat_polynomial_coefficients(int(m))
    # Horner in theta/xi^2 is unsafe at xi = 0, so accumulate over j from the top
    total = np.zeros(np.broadcast(xi, theta).shape)
    for j, pxi, coef in reversed(terms):
        total = total + coef * theta**j * xi**pxi
    return float(total) if total.ndim == 0 else total
