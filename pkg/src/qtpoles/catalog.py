"""Solvable wells and barriers: potentials, closed-form T(E), closed-form spectra.

Units default to hbar = 1, 2m = 1 so that hbar^2/2m = 1.  Inside the formulas
everything is expressed through the dimensionless groups (E/V0, E/Delta, ...)
with Delta = hbar^2 / (2 m a^2) the natural energy of a well of width a.
"""
from __future__ import annotations

import cmath
import dataclasses
import enum
import math
from dataclasses import dataclass, field, replace
from typing import ClassVar

import numpy as np

from . import numkit
from .errors import DomainError, NoScatteringStates, NotPointwise, PoleOfAmplitude

# threshold (kappa ~ 0) states closer than this fraction of the natural
# wavenumber are not bound states
THRESHOLD_FRACTION = 1e-8


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise DomainError("hbar and mass must be strictly positive")

    @property
    def kinetic(self) -> float:
        """hbar^2 / 2m."""
        return self.hbar ** 2 / (2.0 * self.mass)

    def wavenumber(self, E: float) -> float:
        """sqrt(2 m E) / hbar for E >= 0."""
        return math.sqrt(E / self.kinetic)

    def energy_from_kappa(self, kappa: float) -> float:
        """E = -hbar^2 kappa^2 / 2m."""
        return -self.kinetic * kappa * kappa


NATURAL = UnitSystem()
# SI values: hbar in J s, electron mass in kg
SI_LIKE = UnitSystem(hbar=1.054571817e-34, mass=9.1093837015e-31)
UNIT_PRESETS = {"natural": NATURAL, "si-like": SI_LIKE}


def _positive(obj, *names):
    for name in names:
        v = getattr(obj, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise DomainError(f"{type(obj).__name__}.{name} must be a positive number, got {v!r}")


@dataclass(frozen=True)
class Potential:
    """Base class of the potential catalog; instances are immutable."""

    kind: ClassVar[str] = ""
    is_well: ClassVar[bool] = True
    strength: ClassVar[str] = ""
    units: UnitSystem = field(default=NATURAL, kw_only=True)

    @property
    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "units"}

    def scaled(self, factor: float) -> "Potential":
        """Copy with the primary strength parameter multiplied by ``factor``."""
        return replace(self, **{self.strength: getattr(self, self.strength) * factor})


class _Width:
    # mixin for potentials with a length scale a
    @property
    def delta(self) -> float:
        """Delta = hbar^2 / (2 m a^2)."""
        return self.units.kinetic / self.a ** 2


@dataclass(frozen=True)
class DiracDeltaWell(Potential):
    """V(x) = -V0 delta(x); V0 has units of energy x length."""

    kind: ClassVar[str] = "delta"
    strength: ClassVar[str] = "V0"
    V0: float

    def __post_init__(self):
        _positive(self, "V0")

    @property
    def kappa_bound(self) -> float:
        """The only inverse length built from V0, hbar and m: m V0 / hbar^2."""
        return self.units.mass * self.V0 / self.units.hbar ** 2


@dataclass(frozen=True)
class SquareWell(_Width, Potential):
    """V = -V0 for |x| <= a/2, zero outside."""

    kind: ClassVar[str] = "square"
    strength: ClassVar[str] = "V0"
    V0: float
    a: float

    def __post_init__(self):
        _positive(self, "V0", "a")

    @property
    def k0(self) -> float:
        return math.sqrt(self.V0 / self.units.kinetic)


@dataclass(frozen=True)
class HarmonicWell(Potential):
    """V = m omega^2 x^2 / 2."""

    kind: ClassVar[str] = "harmonic"
    strength: ClassVar[str] = "omega"
    omega: float

    def __post_init__(self):
        _positive(self, "omega")

    @property
    def length(self) -> float:
        """Oscillator length sqrt(hbar / m omega)."""
        return math.sqrt(self.units.hbar / (self.units.mass * self.omega))


@dataclass(frozen=True)
class MorseWell(_Width, Potential):
    """V = V0 [exp(2x/a) - 2 exp(x/a)]."""

    kind: ClassVar[str] = "morse"
    strength: ClassVar[str] = "V0"
    V0: float
    a: float

    def __post_init__(self):
        _positive(self, "V0", "a")

    @property
    def k0(self) -> float:
        return math.sqrt(self.V0 / self.units.kinetic)

    @property
    def eta(self) -> float:
        return math.sqrt(self.V0 / self.delta)


@dataclass(frozen=True)
class EckartWell(_Width, Potential):
    """V = -V0 sech^2(x/a)."""

    kind: ClassVar[str] = "eckart"
    strength: ClassVar[str] = "V0"
    V0: float
    a: float

    def __post_init__(self):
        _positive(self, "V0", "a")

    @property
    def k0(self) -> float:
        return math.sqrt(self.V0 / self.units.kinetic)

    @property
    def eta(self) -> float:
        return math.sqrt(0.25 + self.V0 / self.delta)


@dataclass(frozen=True)
class ScarfII(Potential):
    """V = (hbar^2/2m) [(B^2 - A^2 - A) sech^2 x + B (2A + 1) tanh x sech x].

    Asymmetric for B != 0; x is measured in the unit of length.
    """

    kind: ClassVar[str] = "scarf2"
    strength: ClassVar[str] = "A"
    A: float
    B: float = 0.0

    def __post_init__(self):
        _positive(self, "A")
        if not (math.isfinite(self.B) and self.B >= 0):
            raise DomainError(f"ScarfII.B must be >= 0, got {self.B!r}")


@dataclass(frozen=True)
class SquareBarrier(_Width, Potential):
    kind: ClassVar[str] = "square-barrier"
    is_well: ClassVar[bool] = False
    strength: ClassVar[str] = "U0"
    U0: float
    a: float

    def __post_init__(self):
        _positive(self, "U0", "a")


@dataclass(frozen=True)
class ParabolicBarrier(Potential):
    """V = V0_top - m Omega^2 x^2 / 2."""

    kind: ClassVar[str] = "parabolic-barrier"
    is_well: ClassVar[bool] = False
    strength: ClassVar[str] = "V0_top"
    V0_top: float
    Omega: float

    def __post_init__(self):
        _positive(self, "V0_top", "Omega")


@dataclass(frozen=True)
class MorseBarrier(_Width, Potential):
    """V = -U0 [exp(2x/a) - 2 exp(x/a)], maximum U0 at x = 0."""

    kind: ClassVar[str] = "morse-barrier"
    is_well: ClassVar[bool] = False
    strength: ClassVar[str] = "U0"
    U0: float
    a: float

    def __post_init__(self):
        _positive(self, "U0", "a")


WELLS = (DiracDeltaWell, SquareWell, HarmonicWell, MorseWell, EckartWell, ScarfII)
BARRIERS = (SquareBarrier, ParabolicBarrier, MorseBarrier)
KINDS = {cls.kind: cls for cls in WELLS + BARRIERS}
SCATTERING_WELLS = (DiracDeltaWell, SquareWell, EckartWell, ScarfII)


def make_potential(kind: str, units: UnitSystem = NATURAL, **params) -> Potential:
    """Build a potential from its kind name and parameters (extra keys ignored)."""
    try:
        cls = KINDS[kind]
    except KeyError:
        raise DomainError(f"unknown potential kind {kind!r}; choose from {sorted(KINDS)}") from None
    fields = {f.name: f for f in dataclasses.fields(cls) if f.name != "units"}
    names = list(fields)
    missing = [n for n in names if params.get(n) is None and fields[n].default is dataclasses.MISSING]
    if missing:
        raise DomainError(f"{kind} needs parameter(s) {', '.join(missing)}")
    kwargs = {n: float(params[n]) for n in names if params.get(n) is not None}
    return cls(units=units, **kwargs)


def energy_scale(spec: Potential) -> float:
    """Natural energy unit of a potential (Delta for potentials of width a)."""
    u = spec.units
    if isinstance(spec, DiracDeltaWell):
        return u.mass * spec.V0 ** 2 / (2.0 * u.hbar ** 2)
    if isinstance(spec, HarmonicWell):
        return 0.5 * u.hbar * spec.omega
    if isinstance(spec, ParabolicBarrier):
        return 0.5 * u.hbar * spec.Omega
    if isinstance(spec, ScarfII):
        return u.kinetic
    return spec.delta


# ---------------------------------------------------------------------------
# data records


@dataclass(frozen=True)
class TransmissionSample:
    E: float
    T: float
    R: float
    t: complex | None = None


class Method(str, enum.Enum):
    ANALYTIC = "analytic"
    POLE = "pole"
    NUMEROV = "numerov"
    MATRIX = "matrix"


@dataclass(frozen=True)
class EigenvalueSet:
    """Ordered eigenvalues (n, E_n), n = 0, 1, 2, ...  ``meta`` holds solver extras."""

    method: Method
    entries: tuple[tuple[int, float], ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        entries = tuple((int(n), float(E)) for n, E in self.entries)
        object.__setattr__(self, "entries", entries)
        for i, (n, _) in enumerate(entries):
            if n != i:
                raise ValueError(f"quantum numbers must run 0, 1, 2, ...; got {n} at position {i}")
        es = [E for _, E in entries]
        if any(b <= a for a, b in zip(es, es[1:])):
            raise ValueError("eigenvalues must be strictly increasing")

    @classmethod
    def from_energies(cls, method, energies, meta=None) -> "EigenvalueSet":
        return cls(method, tuple(enumerate(sorted(energies))), meta or {})

    @property
    def energies(self) -> list[float]:
        return [E for _, E in self.entries]

    def __len__(self):
        return len(self.entries)


# ---------------------------------------------------------------------------
# potentials


def _sech(y):
    y = np.abs(y)
    e = np.exp(-y)
    return 2.0 * e / (1.0 + e * e)


def potential_value(spec: Potential, x):
    """V(x) in energy units; accepts scalars or numpy arrays.

    Raises:
        NotPointwise: for the delta well.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    m = spec.units.mass
    if isinstance(spec, DiracDeltaWell):
        raise NotPointwise("the delta well is a distribution; it has no pointwise value")
    if isinstance(spec, SquareWell):
        v = np.where(np.abs(x) <= 0.5 * spec.a, -spec.V0, 0.0)
    elif isinstance(spec, SquareBarrier):
        v = np.where(np.abs(x) <= 0.5 * spec.a, spec.U0, 0.0)
    elif isinstance(spec, HarmonicWell):
        v = 0.5 * m * spec.omega ** 2 * x ** 2
    elif isinstance(spec, ParabolicBarrier):
        v = spec.V0_top - 0.5 * m * spec.Omega ** 2 * x ** 2
    elif isinstance(spec, (MorseWell, MorseBarrier)):
        e = np.exp(x / spec.a)
        shape = e * e - 2.0 * e
        v = spec.V0 * shape if isinstance(spec, MorseWell) else -spec.U0 * shape
    elif isinstance(spec, EckartWell):
        v = -spec.V0 * _sech(x / spec.a) ** 2
    elif isinstance(spec, ScarfII):
        A, B = spec.A, spec.B
        s = _sech(x)
        v = spec.units.kinetic * ((B * B - A * A - A) * s * s + B * (2 * A + 1) * np.tanh(x) * s)
    else:
        raise TypeError(f"not a catalog potential: {spec!r}")
    return float(v) if scalar else v


# ---------------------------------------------------------------------------
# closed-form transmission


def square_barrier_expression(eps, alpha):
    """4e(1-e) / (4e(1-e) + sinh^2(alpha sqrt(1-e))), evaluated in complex arithmetic.

    Used symbol-free: with e -> -E/V0 and alpha -> i k0 a it becomes the
    transmission of the square well.
    """
    p = 4 * eps * (1 - eps)
    s = cmath.sinh(alpha * cmath.sqrt(1 - eps))
    return p / (p + s * s)


def _sinhc(x):
    return 1.0 if x == 0 else math.sinh(x) / x


def _sinc(x):
    return 1.0 if x == 0 else math.sin(x) / x


def _square_barrier_T(eps, alpha):
    # 4e / (4e + alpha^2 w^2) with w = sinh(alpha s)/(alpha s), s^2 = 1 - e;
    # continuous through e = 1 where it equals 1 / (1 + alpha^2/4)
    s2 = 1.0 - eps
    if s2 >= 0:
        x = alpha * math.sqrt(s2)
        if x > 700.0:
            # T ~ 16 e x^2 exp(-2x) / alpha^2
            return 16.0 * eps * s2 * math.exp(-2.0 * x)
        w = _sinhc(x)
    else:
        w = _sinc(alpha * math.sqrt(-s2))
    return 4.0 * eps / (4.0 * eps + alpha * alpha * w * w)


def _one_over_one_plus_exp(y):
    if y > 0:
        e = math.exp(-y)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(y))


def sech2_transmission(E: float, U: float, a: float, units: UnitSystem = NATURAL) -> float:
    """T(E) of V = U sech^2(x/a); U > 0 barrier, U < 0 well.

    beta^2 = 1/4 - U/Delta; for beta^2 < 0 the cosine of 2 pi beta is
    evaluated as the hyperbolic cosine of the real magnitude.
    """
    if not E > 0:
        raise DomainError("E must be positive")
    delta = units.kinetic / a ** 2
    alpha = math.sqrt(E / delta)
    beta2 = 0.25 - U / delta
    q = math.exp(-2.0 * math.pi * alpha)
    if beta2 >= 0:
        x = (1.0 + numkit.cospi(2.0 * math.sqrt(beta2))) * q
    else:
        b = math.sqrt(-beta2)
        try:
            x = q + 0.5 * math.exp(2.0 * math.pi * (b - alpha)) + 0.5 * math.exp(-2.0 * math.pi * (b + alpha))
        except OverflowError:
            return 0.0
    d = -math.expm1(-2.0 * math.pi * alpha)
    return 1.0 / (1.0 + 2.0 * x / (d * d))


def _cosh_ratio(b, k):
    # cosh(b) / cosh(k) without overflow, b, k >= 0
    return math.exp(b - k) * (1.0 + math.exp(-2.0 * b)) / (1.0 + math.exp(-2.0 * k))


def scarf2_transmission(spec: ScarfII, k: float) -> float:
    """sinh^2(2 pi k) / ((cosh 2 pi k - cos 2 pi A)(cosh 2 pi k + cosh 2 pi B))."""
    x = 2.0 * math.pi * k
    sech = 2.0 * math.exp(-x) / (1.0 + math.exp(-2.0 * x))
    tanh = math.tanh(x)
    c = numkit.cospi(2.0 * spec.A)
    return tanh * tanh / ((1.0 - c * sech) * (1.0 + _cosh_ratio(2.0 * math.pi * spec.B, x)))


_SCARF_NUM = ("Gamma(-A-ik)", "Gamma(1+A-ik)", "Gamma(1/2+iB-ik)", "Gamma(1/2-iB-ik)")
_SCARF_DEN = ("Gamma(-ik)", "Gamma(1-ik)", "Gamma(1/2-ik)", "Gamma(1/2-ik)")


def scarf2_amplitude(spec: ScarfII, k: complex, pole_tol: float = 1e-10) -> complex:
    """Complex transmission amplitude of the Scarf II well at wavenumber k.

    t(k) = G(-A-ik) G(1+A-ik) G(1/2+iB-ik) G(1/2-iB-ik) / (G(-ik) G(1-ik) G(1/2-ik)^2)

    Raises:
        PoleOfAmplitude: a numerator argument lies within ``pole_tol`` of a
            non-positive integer (and is not cancelled by the denominator).
    """
    k = complex(k)
    A, B = spec.A, spec.B
    ik = 1j * k
    num = (-A - ik, 1 + A - ik, 0.5 + 1j * B - ik, 0.5 - 1j * B - ik)
    den = (-ik, 1 - ik, 0.5 - ik, 0.5 - ik)
    num_poles = [i for i, z in enumerate(num) if numkit.gamma_pole_index(z, pole_tol) is not None]
    den_poles = [i for i, z in enumerate(den) if numkit.gamma_pole_index(z, pole_tol) is not None]
    if len(num_poles) > len(den_poles):
        i = num_poles[0]
        raise PoleOfAmplitude(_SCARF_NUM[i], num[i])
    if den_poles:
        if len(den_poles) > len(num_poles):
            return 0j
        raise DomainError(f"removable 0/0 in the Scarf II amplitude at k={k!r}")
    log_t = sum(numkit.complex_log_gamma(z) for z in num) - sum(numkit.complex_log_gamma(z) for z in den)
    return cmath.exp(log_t)


def transmission_coefficient(spec: Potential, E: float) -> TransmissionSample:
    """Closed-form T(E), R = 1 - T, and t where an amplitude formula exists.

    Raises:
        NoScatteringStates: harmonic and Morse wells.
        DomainError: E <= 0 or a barrier kind.
    """
    if isinstance(spec, HarmonicWell):
        raise NoScatteringStates("the harmonic well is confining on both sides and admits no scattering states")
    if isinstance(spec, MorseWell):
        raise NoScatteringStates("the Morse well diverges on the right and reflects completely")
    if not isinstance(spec, SCATTERING_WELLS):
        raise DomainError(f"{spec.kind} is not a scattering well; use barrier_transmission")
    if not (math.isfinite(E) and E > 0):
        raise DomainError(f"E must be positive, got {E!r}")
    u = spec.units
    t = None
    if isinstance(spec, DiracDeltaWell):
        h2 = u.hbar ** 2
        k = u.wavenumber(E)
        t = h2 * k / complex(h2 * k, -u.mass * spec.V0)
        T = 2 * h2 * E / (2 * h2 * E + u.mass * spec.V0 ** 2)
    elif isinstance(spec, SquareWell):
        eps = E / spec.V0
        k = u.wavenumber(E)
        K = u.wavenumber(E + spec.V0)
        Ka = K * spec.a
        s = math.sin(Ka)
        p = 4 * eps * (1 + eps)
        T = p / (p + s * s)
        t = cmath.exp(-1j * k * spec.a) / complex(math.cos(Ka), -(k * k + K * K) / (2 * k * K) * s)
    elif isinstance(spec, EckartWell):
        T = sech2_transmission(E, -spec.V0, spec.a, u)
    else:
        k = u.wavenumber(E)
        T = scarf2_transmission(spec, k)
        t = scarf2_amplitude(spec, k)
    return TransmissionSample(E=E, T=T, R=1.0 - T, t=t)


def barrier_transmission(spec: Potential, E: float) -> float:
    """Closed-form transmission of the three barrier kinds.

    The square barrier at E = U0 returns the limit 1 / (1 + alpha^2 / 4).

    Raises:
        DomainError: E <= 0 for the square and Morse barriers, or a well kind.
    """
    if not math.isfinite(E):
        raise DomainError("E must be finite")
    u = spec.units
    if isinstance(spec, SquareBarrier):
        if E <= 0:
            raise DomainError("square barrier needs E > 0")
        alpha = math.sqrt(spec.U0 / u.kinetic) * spec.a
        return _square_barrier_T(E / spec.U0, alpha)
    if isinstance(spec, ParabolicBarrier):
        return _one_over_one_plus_exp(2 * math.pi * (spec.V0_top - E) / (u.hbar * spec.Omega))
    if isinstance(spec, MorseBarrier):
        if E <= 0:
            raise DomainError("Morse barrier needs E > 0")
        alpha = math.sqrt(E / spec.delta)
        beta = math.sqrt(spec.U0 / spec.delta)
        num = -math.expm1(-4 * math.pi * alpha)
        return num * _one_over_one_plus_exp(2 * math.pi * (beta - alpha))
    raise DomainError(f"{spec.kind} is not a barrier")


# ---------------------------------------------------------------------------
# closed-form spectra


def square_well_roots(spec: SquareWell, per_pi: int = 64, tol: float = 1e-12) -> list[tuple[float, str]]:
    """Roots u = K a in (0, k0 a) of the even/odd bound-state conditions.

    even: u tan(u/2) = w,  odd: -u cot(u/2) = w,  with w = sqrt((k0 a)^2 - u^2),
    written without poles as u sin(u/2) - w cos(u/2) and u cos(u/2) + w sin(u/2).
    Returns (u, parity) sorted by u.
    """
    u0 = spec.k0 * spec.a

    def w(u):
        return math.sqrt(max(u0 * u0 - u * u, 0.0))

    def even(u):
        return u * math.sin(0.5 * u) - w(u) * math.cos(0.5 * u)

    def odd(u):
        return u * math.cos(0.5 * u) + w(u) * math.sin(0.5 * u)

    n_grid = max(int(math.ceil(per_pi * u0 / math.pi)) + 1, 8)
    roots = []
    for parity, f in (("even", even), ("odd", odd)):
        for b in numkit.bracket_roots(f, 0.0, u0, n_grid):
            r = numkit.refine_root(f, b, tol)
            u = r.x
            if u < THRESHOLD_FRACTION * u0 or u0 - u < THRESHOLD_FRACTION * u0:
                continue
            tan_half = math.tan(0.5 * u)
            if (tan_half > 0) != (parity == "even"):
                continue
            roots.append((u, parity))
    return sorted(roots)


def _gamma_ladder(eta):
    # eta - (n + 1/2) for all n with a strictly positive value
    out = []
    n = 0
    while eta - (n + 0.5) > THRESHOLD_FRACTION * eta:
        out.append(eta - (n + 0.5))
        n += 1
    return out


def analytic_eigenvalues(spec: Potential, n_max: int | None = None) -> EigenvalueSet:
    """Closed-form bound-state spectrum, ascending.

    ``n_max`` (number of states) is required for the harmonic well and
    optionally truncates the other spectra.
    """
    u = spec.units
    if isinstance(spec, DiracDeltaWell):
        energies = [-u.mass * spec.V0 ** 2 / (2 * u.hbar ** 2)]
    elif isinstance(spec, SquareWell):
        energies = [u.energy_from_kappa(math.sqrt(max((spec.k0 * spec.a) ** 2 - r * r, 0.0)) / spec.a)
                    for r, _ in square_well_roots(spec)]
    elif isinstance(spec, HarmonicWell):
        if n_max is None:
            raise DomainError("the harmonic spectrum is unbounded; pass n_max")
        energies = [(n + 0.5) * u.hbar * spec.omega for n in range(n_max)]
    elif isinstance(spec, (MorseWell, EckartWell)):
        energies = [-spec.delta * g * g for g in _gamma_ladder(spec.eta)]
    elif isinstance(spec, ScarfII):
        energies = [-u.kinetic * k * k for k in _gamma_ladder(spec.A + 0.5)]
    else:
        raise DomainError(f"{spec.kind} is not a well")
    energies = sorted(energies)
    if n_max is not None:
        energies = energies[:n_max]
    return EigenvalueSet.from_energies(Method.ANALYTIC, energies)


def bound_state_count(spec: Potential) -> float:
    """Number of bound states; ``math.inf`` for the harmonic well."""
    if isinstance(spec, HarmonicWell):
        return math.inf
    if isinstance(spec, DiracDeltaWell):
        return 1
    if isinstance(spec, SquareWell):
        return len(square_well_roots(spec))
    if isinstance(spec, (MorseWell, EckartWell)):
        return len(_gamma_ladder(spec.eta))
    if isinstance(spec, ScarfII):
        return len(_gamma_ladder(spec.A + 0.5))
    raise DomainError(f"{spec.kind} is not a well")


def full_transmission_energies(spec: Potential, E_max: float) -> list[float]:
    """Energies in (0, E_max] where a square well or barrier transmits fully."""
    if not E_max > 0:
        raise DomainError("E_max must be positive")
    if isinstance(spec, SquareWell):
        offset, n = -spec.V0, 1
    elif isinstance(spec, SquareBarrier):
        offset, n = spec.U0, 1
    else:
        raise DomainError("full transmission energies are defined for square wells and barriers")
    out = []
    while True:
        E = n * n * math.pi ** 2 * spec.delta + offset
        if E > E_max:
            return out
        if E > 0:
            out.append(E)
        n += 1
