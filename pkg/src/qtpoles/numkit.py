"""Foundation numerics: complex gamma, real root bracketing, modulus minimisation.

Everything here is pure and reentrant.  ``ComplexValue`` is Python's builtin
``complex``; public functions never return NaN/Inf silently.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DomainError, PoleOfGamma

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 200
GAMMA_POLE_TOL = 1e-12

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_P = (
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
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise DomainError("bracket endpoints must not share a sign")


@dataclass(frozen=True)
class RootResult:
    x: float
    f_at_x: float
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# trigonometry with exact argument reduction


def _reduce(x: float) -> tuple[float, int]:
    """Split x = n + r with integer n and |r| <= 1/2 (exact in floating point)."""
    n = round(x)
    return x - n, int(n)


def sinpi(x: float) -> float:
    """sin(pi*x) for real x, exact at integers and half-integers."""
    r, n = _reduce(x)
    s = math.sin(math.pi * r)
    return -s if n % 2 else s


def cospi(x: float) -> float:
    """cos(pi*x) for real x, exact at integers and half-integers."""
    r, n = _reduce(x)
    if abs(r) == 0.5:
        return 0.0
    c = math.cos(math.pi * r)
    return -c if n % 2 else c


def csinpi(z: complex) -> complex:
    """sin(pi*z) for complex z."""
    r, n = _reduce(z.real)
    y = math.pi * z.imag
    w = complex(math.sin(math.pi * r) * math.cosh(y), math.cos(math.pi * r) * math.sinh(y))
    return -w if n % 2 else w


def _log_sinpi(z: complex) -> complex:
    # Some branch of log(sin(pi z)); only ever exponentiated.
    r, n = _reduce(z.real)
    parity = complex(0.0, math.pi) if n % 2 else 0j
    zr = complex(r, z.imag)
    if abs(z.imag) < 50.0:
        return cmath.log(csinpi(zr)) + parity
    if z.imag > 0:
        # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z})
        return (-1j * math.pi * zr + complex(math.log(0.5), math.pi / 2)
                + cmath.log(1.0 - cmath.exp(2j * math.pi * zr)) + parity)
    # sin(pi z) = (-i/2) e^{i pi z} (1 - e^{-2 i pi z})
    return (1j * math.pi * zr + complex(math.log(0.5), -math.pi / 2)
            + cmath.log(1.0 - cmath.exp(-2j * math.pi * zr)) + parity)


# ---------------------------------------------------------------------------
# gamma


def gamma_pole_index(z: complex, tol: float = GAMMA_POLE_TOL) -> int | None:
    """Return N >= 0 if z lies within ``tol`` of -N, else None."""
    n = round(z.real)
    if n <= 0 and abs(complex(z) - n) <= tol:
        return -n
    return None


def complex_log_gamma(z: complex) -> complex:
    """A branch of log Gamma(z) (not necessarily the principal one).

    Suitable for building products and ratios of gamma functions without
    over/underflow; ``exp`` of the result is Gamma(z).
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite gamma argument {z!r}")
    if gamma_pole_index(z) is not None:
        raise PoleOfGamma(z)
    if z.real < 0.5:
        return _LOG_PI - _log_sinpi(z) - complex_log_gamma(1.0 - z)
    z -= 1.0
    acc = _LANCZOS_P[0]
    for i in range(1, len(_LANCZOS_P)):
        acc += _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def complex_gamma(z: complex) -> complex:
    """Gamma(z) for complex z via Lanczos plus reflection for Re z < 1/2.

    Relative accuracy is about 1e-14 for |z| <= 30.

    Raises:
        PoleOfGamma: z within 1e-12 of 0, -1, -2, ...
    """
    w = cmath.exp(complex_log_gamma(z))
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise OverflowError(f"Gamma({z!r}) overflows")
    return w


# ---------------------------------------------------------------------------
# real roots


def bracket_roots(f: Callable[[float], float], lo: float, hi: float, n_grid: int) -> list[Bracket]:
    """Scan f on a uniform grid over [lo, hi) and bracket its sign changes.

    An exact zero on a grid point x_i < hi yields the degenerate bracket
    [x_i, x_{i+1}] with ``f_lo == 0``.  Non-finite samples are skipped.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if n_grid < 2:
        raise DomainError("n_grid must be >= 2")
    xs = np.linspace(lo, hi, n_grid)
    pts = []
    skipped = 0
    for x in xs:
        fx = float(f(float(x)))
        if math.isfinite(fx):
            pts.append((float(x), fx))
        else:
            skipped += 1
    if skipped:
        logger.debug("bracket_roots skipped %d non-finite samples", skipped)

    out = []
    for (x0, f0), (x1, f1) in zip(pts, pts[1:]):
        if f0 == 0.0 or f0 * f1 < 0.0:
            out.append(Bracket(x0, x1, f0, f1))
    return out


def refine_root(f: Callable[[float], float], b: Bracket, tol: float = 1e-12) -> RootResult:
    """Refine a bracketed root to ``tol`` in the abscissa (Brent's method).

    ``converged`` reports abscissa convergence within the 200-iteration cap.
    The returned x always lies inside [b.lo, b.hi].
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if b.f_lo == 0.0:
        return RootResult(b.lo, 0.0, 0, True)
    if b.f_hi == 0.0:
        return RootResult(b.hi, 0.0, 0, True)
    x, info = optimize.brentq(f, b.lo, b.hi, xtol=tol, maxiter=MAX_ITERATIONS,
                              full_output=True, disp=False)
    x = min(max(x, b.lo), b.hi)
    return RootResult(float(x), float(f(x)), int(info.iterations), bool(info.converged))


# ---------------------------------------------------------------------------
# zeros of complex functions on the real axis


def _local_min(h, a, b, xtol, maxiter=MAX_ITERATIONS):
    # Brent's golden-section / parabolic minimiser with an absolute tolerance.
    golden = 0.5 * (3.0 - math.sqrt(5.0))
    x = w = v = a + golden * (b - a)
    fx = fw = fv = h(x)
    d = e = 0.0
    it = 0
    for it in range(1, maxiter + 1):
        m = 0.5 * (a + b)
        tol1 = 2.2e-16 * abs(x) + xtol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        parabolic = False
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                parabolic = True
        if not parabolic:
            e = (b - x) if x < m else (a - x)
            d = golden * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = h(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx, it


def minimize_modulus(g: Callable[[float], complex], lo: float, hi: float, n_grid: int,
                     tol: float = 1e-8, xtol: float = 1e-13) -> list[RootResult]:
    """Zeros of a complex-valued g on [lo, hi) as minima of |g|^2.

    Local minima of the sampled |g|^2 are refined by golden/parabolic search
    on the two neighbouring grid cells and kept only if |g|^2 <= tol^2 there.
    ``f_at_x`` holds |g(x)|.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if n_grid < 3:
        raise DomainError("n_grid must be >= 3")
    xs = np.linspace(lo, hi, n_grid)
    dx = xs[1] - xs[0]

    def h(x):
        return abs(g(x)) ** 2

    hs = np.array([h(float(x)) for x in xs])
    idx = []
    for i in range(n_grid):
        left = hs[i - 1] if i > 0 else math.inf
        right = hs[i + 1] if i < n_grid - 1 else math.inf
        if hs[i] <= left and hs[i] < right:
            idx.append(i)

    out: list[RootResult] = []
    rejected = 0
    for i in idx:
        a = float(xs[max(i - 1, 0)])
        b = float(xs[min(i + 1, n_grid - 1)])
        x, hx, its = _local_min(h, a, b, xtol)
        # endpoints of the search cell are not visited by the minimiser
        for edge in (a, b):
            he = h(edge)
            if he < hx:
                x, hx = edge, he
        if hx > tol * tol:
            rejected += 1
            continue
        if hi - x <= 10.0 * xtol:
            continue
        if out and abs(x - out[-1].x) < 0.5 * dx:
            continue
        out.append(RootResult(float(x), math.sqrt(hx), its, True))
    if rejected:
        logger.debug("minimize_modulus discarded %d non-zero minima", rejected)
    return out
