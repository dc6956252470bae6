"""Independent numerical ground truth on a grid.

* Numerov shooting from both ends, matched at the potential minimum.
* Sturm-sequence bisection on the central-difference tridiagonal Hamiltonian.
* Transfer-matrix scattering through piecewise-constant slabs.

None of these use the closed forms of the catalog; they only sample V(x).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import catalog
from .catalog import (DiracDeltaWell, EckartWell, EigenvalueSet, HarmonicWell, Method, MorseWell,
                      Potential, ScarfII, SquareWell)
from .errors import DomainError, GridTooCoarse, NotEnoughStates

MAX_KH = 0.5
RESCALE_EVERY = 50
_BIG = 1e150


@dataclass(frozen=True)
class GridConfig:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise DomainError("grid needs x_min < x_max")
        if self.n_points < 101 or self.n_points % 2 == 0:
            raise DomainError("grid needs an odd number of points >= 101")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self, factor: int = 2) -> "GridConfig":
        return GridConfig(self.x_min, self.x_max, (self.n_points - 1) * factor + 1)


@dataclass(frozen=True)
class TransferMatrixResult:
    t: complex
    r: complex
    T: float
    R: float


def _length(spec: Potential) -> float:
    if isinstance(spec, HarmonicWell):
        return spec.length
    if isinstance(spec, ScarfII):
        return 1.0
    return spec.a


# Default grids, in units of the natural length of each potential.
_GRIDS = {
    "numerov": {
        SquareWell: (-8.0, 8.0, 8001),
        HarmonicWell: (-12.0, 12.0, 4001),
        MorseWell: (-20.0, 4.0, 4801),
        EckartWell: (-20.0, 20.0, 8001),
        ScarfII: (-30.0, 30.0, 12001),
    },
    "matrix": {
        SquareWell: (-8.0, 8.0, 8001),
        HarmonicWell: (-10.0, 10.0, 8001),
        MorseWell: (-20.0, 4.0, 4801),
        EckartWell: (-20.0, 20.0, 8001),
        ScarfII: (-24.0, 24.0, 8001),
    },
    "transfer": {
        EckartWell: (-15.0, 15.0, 20001),
        ScarfII: (-30.0, 30.0, 30001),
    },
}


def default_grid(spec: Potential, purpose: str = "numerov") -> GridConfig:
    """The committed reference grid for ``purpose`` in {numerov, matrix, transfer}."""
    try:
        lo, hi, n = _GRIDS[purpose][type(spec)]
    except KeyError:
        raise DomainError(f"no default {purpose} grid for {spec.kind}") from None
    L = _length(spec)
    return GridConfig(lo * L, hi * L, n)


def _sampled(spec: Potential, grid: GridConfig) -> np.ndarray:
    if isinstance(spec, DiracDeltaWell):
        raise DomainError("the delta well cannot be sampled on a grid")
    if not spec.is_well:
        raise DomainError(f"{spec.kind} is not a well")
    x = grid.x
    v = catalog.potential_value(spec, x)
    if isinstance(spec, SquareWell):
        # mean over the cell at the two discontinuities
        edge = np.isclose(np.abs(x), 0.5 * spec.a, rtol=0, atol=1e-9 * grid.h)
        v = np.where(edge, -0.5 * spec.V0, v)
    return v


def _check_resolution(spec, v, E, h):
    kin = spec.units.kinetic
    kmax = math.sqrt(max(E - float(np.min(v)), 0.0) / kin)
    if kmax * h > MAX_KH:
        raise GridTooCoarse(f"K*h = {kmax * h:.3g} > {MAX_KH} at E = {E:g}")


def _check_extent(spec, v, E, grid, x_match):
    # distance to each open end times the decay constant there
    if isinstance(spec, HarmonicWell):
        return
    kin = spec.units.kinetic
    for x_end, v_end in ((grid.x_min, v[0]), (grid.x_max, v[-1])):
        kap = math.sqrt(max(v_end - E, 0.0) / kin)
        if kap * abs(x_end - x_match) < 10.0:
            warnings.warn(f"grid end {x_end:g} spans fewer than 10 decay lengths at E = {E:g}",
                          RuntimeWarning, stacklevel=4)


# ---------------------------------------------------------------------------
# Numerov


def _numerov_sweep(q, start_tiny=1e-30):
    """psi'' = -q psi from psi[0] = 0; returns psi and its sign-change count."""
    w = (1.0 + q / 12.0).tolist()  # q already carries h^2
    c = (2.0 - 10.0 * q / 12.0).tolist()
    psi = [0.0, start_tiny]
    a, b = 0.0, start_tiny
    nodes = 0
    for i in range(1, len(w) - 1):
        p = (c[i] * b - w[i - 1] * a) / w[i + 1]
        if p * b < 0:
            nodes += 1
        if abs(p) > _BIG:
            psi = [y / _BIG for y in psi]
            b /= _BIG
            p /= _BIG
        psi.append(p)
        a, b = b, p
    return np.array(psi), nodes


class _Shooter:
    def __init__(self, spec, grid):
        self.spec = spec
        self.grid = grid
        self.v = _sampled(spec, grid)
        # keep the matching point away from the ends
        self.m = min(max(int(np.argmin(self.v)), 2), grid.n_points - 3)
        self.scale = grid.h ** 2 / spec.units.kinetic

    def _q(self, E):
        return (E - self.v) * self.scale

    def count(self, E):
        """Levels below E: nodes of the solution swept across the whole grid."""
        return _numerov_sweep(self._q(E))[1]

    def _sweeps(self, E):
        q = self._q(E)
        m = self.m
        left, _ = _numerov_sweep(q[: m + 2])
        right, _ = _numerov_sweep(q[::-1][: len(q) - m])
        return q, left, right[::-1]  # right[j] lives at grid index m + j

    def mismatch(self, E):
        """Scaled discrete Wronskian of the two sweeps at m; zero at eigenvalues."""
        q, left, right = self._sweeps(E)
        m = self.m
        wl = (left[m], left[m + 1])
        wr = (right[0], right[1])
        norm = max(map(abs, wl)) * max(map(abs, wr))
        return (1.0 + q[m] / 12.0) * (1.0 + q[m + 1] / 12.0) * (wl[0] * wr[1] - wl[1] * wr[0]) / norm

    def nodes(self, E):
        """Interior sign changes of the glued two-sided solution."""
        _, left, right = self._sweeps(E)
        m = self.m
        s = (left[m] * right[0] + left[m + 1] * right[1]) / (right[0] ** 2 + right[1] ** 2)
        psi = np.concatenate([left[: m + 1], s * right[1:]])
        psi = psi[np.abs(psi) > 1e-12 * np.max(np.abs(psi))]
        return int(np.count_nonzero(np.sign(psi[1:]) != np.sign(psi[:-1])))


def numerov_eigenvalues(spec: Potential, n_states: int, grid: GridConfig | None = None,
                        tol: float = 1e-10) -> EigenvalueSet:
    """Lowest ``n_states`` levels by two-sided Numerov shooting.

    Each level is bracketed by the node count of a full sweep and refined on
    the Wronskian of the left and right solutions at the potential minimum;
    ``tol`` is in units of the potential's energy scale.
    ``meta["nodes"]`` lists the node count of each converged state.

    Numerov is only second order across a jump in V, so for the square well
    the result is Richardson-extrapolated from ``grid`` and its halving.

    Raises:
        NotEnoughStates, GridTooCoarse
    """
    grid = grid or default_grid(spec, "numerov")
    if n_states == 0:
        return EigenvalueSet(Method.NUMEROV, ())
    energies, nodes = _numerov_levels(spec, n_states, grid, tol)
    meta = {"nodes": nodes, "grid": grid}
    if isinstance(spec, SquareWell):
        fine, _ = _numerov_levels(spec, n_states, grid.refined(2), tol)
        meta["unextrapolated"] = fine
        energies = [(4.0 * f - c) / 3.0 for f, c in zip(fine, energies)]
    return EigenvalueSet.from_energies(Method.NUMEROV, energies, meta)


def _numerov_levels(spec, n_states, grid, tol):
    sh = _Shooter(spec, grid)
    scale = catalog.energy_scale(spec)
    e_floor = float(np.min(sh.v))
    e_top = float(min(sh.v[0], sh.v[-1]))
    available = sh.count(e_top)
    if available < n_states:
        raise NotEnoughStates(f"{spec.kind} binds {available} state(s) on this grid; {n_states} requested")

    energies, nodes = [], []
    lo_next = e_floor
    for n in range(n_states):
        # narrow to a bracket holding exactly level n
        lo, hi = lo_next, e_top
        while True:
            mid = 0.5 * (lo + hi)
            c = sh.count(mid)
            if c <= n:
                lo = mid
            elif c > n + 1:
                hi = mid
            else:
                hi = mid
                if sh.count(lo) == n:
                    break
            if hi - lo < tol * scale:
                break
        f_lo, f_hi = sh.mismatch(lo), sh.mismatch(hi)
        if f_lo * f_hi < 0:
            E = optimize.brentq(sh.mismatch, lo, hi, xtol=1e-3 * tol * scale, rtol=1e-15)
        else:
            E = 0.5 * (lo + hi)
        _check_resolution(spec, sh.v, E, grid.h)
        _check_extent(spec, sh.v, E, grid, grid.x[sh.m])
        energies.append(E)
        nodes.append(sh.nodes(E))
        lo_next = hi
    return energies, nodes


# ---------------------------------------------------------------------------
# Sturm sequence on the tridiagonal Hamiltonian


def _tridiagonal(spec, grid):
    v = _sampled(spec, grid)[1:-1]  # Dirichlet ends
    c = spec.units.kinetic / grid.h ** 2
    return 2.0 * c + v, c


def _sturm(diag, off2, E):
    # sign changes of p_i = (d_i - E) p_{i-1} - e^2 p_{i-2}, p_0 = 1
    d = (diag - E).tolist()
    p_prev, p = 1.0, d[0]
    count = int(p < 0)
    sign_prev = -1.0 if p < 0 else 1.0
    for i in range(1, len(d)):
        p_new = d[i] * p - off2 * p_prev
        p_prev, p = p, p_new
        s = math.copysign(1.0, p) if p != 0 else -sign_prev
        if s != sign_prev:
            count += 1
        sign_prev = s
        if i % RESCALE_EVERY == 0 or abs(p) > _BIG:
            big = max(abs(p), abs(p_prev))
            if big > 0:
                p /= big
                p_prev /= big
    return count


def sturm_count(spec: Potential, E: float, grid: GridConfig | None = None) -> int:
    """Number of eigenvalues below E of the finite-difference Hamiltonian."""
    grid = grid or default_grid(spec, "matrix")
    diag, c = _tridiagonal(spec, grid)
    if E > float(np.min(diag - 2.0 * c)):
        _check_resolution(spec, diag - 2.0 * c, E, grid.h)
    return _sturm(diag, c * c, E)


def matrix_eigenvalues(spec: Potential, n_states: int, grid: GridConfig | None = None,
                       tol: float = 1e-10) -> EigenvalueSet:
    """Lowest ``n_states`` finite-difference levels by bisection on the Sturm count."""
    grid = grid or default_grid(spec, "matrix")
    if n_states == 0:
        return EigenvalueSet(Method.MATRIX, ())
    diag, c = _tridiagonal(spec, grid)
    v = diag - 2.0 * c
    off2 = c * c
    scale = catalog.energy_scale(spec)
    # Gershgorin floor; bound states lie below the lower asymptote
    e_floor = float(np.min(v))
    full = _sampled(spec, grid)
    e_top = float(min(full[0], full[-1]))
    if _sturm(diag, off2, e_top) < n_states:
        raise NotEnoughStates(f"{spec.kind} binds fewer than {n_states} state(s) on this grid")
    energies = []
    for n in range(n_states):
        lo, hi = e_floor, e_top
        while hi - lo > tol * scale:
            mid = 0.5 * (lo + hi)
            if _sturm(diag, off2, mid) > n:
                hi = mid
            else:
                lo = mid
        E = 0.5 * (lo + hi)
        _check_resolution(spec, v, E, grid.h)
        energies.append(E)
    return EigenvalueSet.from_energies(Method.MATRIX, energies, {"grid": grid})


# ---------------------------------------------------------------------------
# transfer matrix


def _plane_wave_basis(k, x):
    e = np.exp(1j * k * x)
    return np.array([[e, 1.0 / e], [1j * k * e, -1j * k / e]])


def _slab_matrices(q, L):
    """(psi, psi') propagators through slabs with local wavenumbers q (complex)."""
    qL = q * L
    c = np.cos(qL)
    small = np.abs(qL) < 1e-8
    sinc = np.where(small, L, np.sin(qL) / np.where(small, 1.0, q))
    mats = np.empty((len(q), 2, 2), dtype=complex)
    mats[:, 0, 0] = c
    mats[:, 0, 1] = sinc
    mats[:, 1, 0] = -q * np.sin(qL)
    mats[:, 1, 1] = c
    return mats


def _ordered_product(mats):
    # M_N ... M_2 M_1 by pairwise reduction
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, np.eye(2, dtype=complex)[None]])
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _scattering(M, k, x_left, x_right):
    S = np.linalg.solve(_plane_wave_basis(k, x_right), M @ _plane_wave_basis(k, x_left))
    t = 1.0 / S[1, 1]
    r = -S[1, 0] / S[1, 1]
    return TransferMatrixResult(t=complex(t), r=complex(r), T=abs(t) ** 2, R=abs(r) ** 2)


def transfer_matrix_t(spec: Potential, E: float, grid: GridConfig | None = None) -> TransferMatrixResult:
    """t and r of the asymptotic plane waves for E > 0.

    Square well: one exact slab.  Delta well: exact jump in psi'.  Smooth wells:
    slabs between grid points with V taken at slab midpoints.
    """
    if isinstance(spec, (HarmonicWell, MorseWell)) or not spec.is_well:
        raise DomainError(f"{spec.kind}: no asymptotically free scattering states")
    if not E > 0:
        raise DomainError("E must be positive")
    u = spec.units
    k = u.wavenumber(E)
    if isinstance(spec, DiracDeltaWell):
        g = spec.V0 / u.kinetic  # 2 m V0 / hbar^2
        M = np.array([[1.0, 0.0], [-g, 1.0]], dtype=complex)
        return _scattering(M, k, 0.0, 0.0)
    if isinstance(spec, SquareWell):
        q = np.array([math.sqrt((E + spec.V0) / u.kinetic)], dtype=complex)
        M = _slab_matrices(q, spec.a)[0]
        return _scattering(M, k, -0.5 * spec.a, 0.5 * spec.a)
    grid = grid or default_grid(spec, "transfer")
    ends = catalog.potential_value(spec, np.array([grid.x_min, grid.x_max]))
    if np.max(np.abs(ends)) >= 1e-10 * catalog.energy_scale(spec):
        raise DomainError("the potential is not negligible at the grid ends; widen the grid")
    x = grid.x
    mid = 0.5 * (x[1:] + x[:-1])
    v = catalog.potential_value(spec, mid)
    q = np.sqrt((E - v).astype(complex) / u.kinetic)
    M = _ordered_product(_slab_matrices(q, grid.h))
    return _scattering(M, k, grid.x_min, grid.x_max)
