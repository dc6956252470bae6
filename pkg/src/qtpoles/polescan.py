"""Bound states as poles of the transmission coefficient continued to E < 0.

Each T(E) of the catalog is continued with k -> i kappa.  Its poles are the
zeros of the continued denominator D(kappa), which we locate on the real
kappa axis and then sort into physical bound states and artifacts.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import catalog, numkit
from .catalog import (DiracDeltaWell, EckartWell, EigenvalueSet, HarmonicWell, Method, MorseWell,
                      Potential, ScarfII, SquareWell)
from .errors import DomainError, PoleLost, PoleOfAmplitude

DEFAULT_N_GRID = 4000
SENSITIVITY_THRESHOLD = 1e-6
AMPLITUDE_POLE_TOL = 1e-6
SQUARE_AMPLITUDE_TOL = 1e-8
EDGE_FRACTION = catalog.THRESHOLD_FRACTION
ROOT_TOL = 1e-13


class Classification(str, enum.Enum):
    PHYSICAL = "Physical"
    NEGATIVE_KAPPA = "NegativeKappa"
    COMPLEX_PAIR = "ComplexPair"
    PARAMETER_INDEPENDENT = "ParameterIndependent"
    CONJUGATE_ARTIFACT = "ConjugateArtifact"
    SIGN_CONDITION_VIOLATED = "SignConditionViolated"


@dataclass(frozen=True)
class ContinuedDenominator:
    """Denominator of T continued to negative energy, as a product of factors.

    ``variable`` is ``"kappa"`` for every well except the harmonic one, whose
    spectrum is positive and which is scanned directly in ``"energy"``.
    Factors are scanned one at a time so coincident zeros of different
    factors (which make even-order zeros of the product) are still found as
    simple zeros.  ``edges`` are branch points where zeros are thresholds,
    not bound states.
    """

    spec: Potential
    kind: str
    factors: tuple[Callable[[float], complex], ...]
    variable: str = "kappa"
    scan_max: float | None = None
    edges: tuple[float, ...] = (0.0,)
    labels: tuple[str, ...] = ()

    def eval(self, x: float) -> complex:
        out = 1.0
        for f in self.factors:
            out *= f(x)
        return out

    def energy(self, x: float) -> float:
        if self.variable == "energy":
            return x
        return self.spec.units.energy_from_kappa(x)

    def kappa(self, x: float) -> float:
        if self.variable == "energy":
            # |kappa| of the (imaginary) continued wavenumber
            return math.sqrt(abs(x) / self.spec.units.kinetic)
        return x


@dataclass(frozen=True)
class PoleCandidate:
    kappa: float
    E: float
    n: int | None = None
    classification: Classification | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def physical(self) -> bool:
        return self.classification is Classification.PHYSICAL

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "E": self.E,
            "n": self.n,
            "classification": None if self.classification is None else self.classification.value,
            "diagnostics": {k: (v if math.isfinite(v) else None) for k, v in self.diagnostics.items()},
        }


def _frac_phase(d: float) -> complex:
    # exp(2 pi i d) with d reduced to [-1/2, 1/2] first
    r = d - round(d)
    return cmath.exp(2j * math.pi * r)


def _scarf_kappa_max(spec: ScarfII) -> float:
    xs = np.linspace(-20.0, 20.0, 8001)
    vmin = float(np.min(catalog.potential_value(spec, xs)))
    return math.sqrt(max(-vmin, 0.0) / spec.units.kinetic)


def pole_denominator(spec: Potential) -> ContinuedDenominator:
    """Continued denominator of T(E) for a catalog well."""
    u = spec.units
    if isinstance(spec, DiracDeltaWell):
        m, h2, V0 = u.mass, u.hbar ** 2, spec.V0
        # 2 hbar^2 E + m V0^2 with E = -hbar^2 kappa^2 / 2m
        f = lambda kap: m * V0 * V0 - h2 * h2 * kap * kap / m
        return ContinuedDenominator(spec, "real_valued", (f,), scan_max=4.0 * spec.kappa_bound,
                                    labels=("2hbar^2E+mV0^2",))
    if isinstance(spec, SquareWell):
        k0, a = spec.k0, spec.a

        def half_angle(kap):
            return 0.5 * a * math.sqrt(max(k0 * k0 - kap * kap, 0.0))

        # 4e(1+e) + sin^2(Ka) = 4 (e + sin^2(Ka/2)) (e + cos^2(Ka/2)), e = -kappa^2/k0^2
        f_sin = lambda kap: math.sin(half_angle(kap)) ** 2 - (kap / k0) ** 2
        f_cos = lambda kap: math.cos(half_angle(kap)) ** 2 - (kap / k0) ** 2
        return ContinuedDenominator(spec, "real_valued", (f_sin, f_cos), scan_max=k0, edges=(0.0, k0),
                                    labels=("sin^2(Ka/2)+e", "cos^2(Ka/2)+e"))
    if isinstance(spec, HarmonicWell):
        hw = u.hbar * spec.omega
        g = lambda E: 1.0 + _frac_phase(E / hw)
        return ContinuedDenominator(spec, "complex_valued", (g,), variable="energy",
                                    labels=("1+exp(2i pi E/hbar omega)",))
    if isinstance(spec, MorseWell):
        eta, a = spec.eta, spec.a
        g = lambda kap: 1.0 + _frac_phase(eta - kap * a)
        return ContinuedDenominator(spec, "complex_valued", (g,), scan_max=spec.k0,
                                    labels=("1+exp(2i pi (eta-gamma))",))
    if isinstance(spec, EckartWell):
        eta, a = spec.eta, spec.a
        # cos 2 pi gamma + cos 2 pi eta = 2 cos(pi (gamma - eta)) cos(pi (gamma + eta))
        f_minus = lambda kap: numkit.cospi(kap * a - eta)
        f_plus = lambda kap: 2.0 * numkit.cospi(kap * a + eta)
        return ContinuedDenominator(spec, "real_valued", (f_minus, f_plus), scan_max=spec.k0,
                                    labels=("cos pi(gamma-eta)", "2cos pi(gamma+eta)"))
    if isinstance(spec, ScarfII):
        A, B = spec.A, spec.B
        # cos 2 pi kappa - cos 2 pi A = -2 sin pi(kappa - A) sin pi(kappa + A)
        f_minus = lambda kap: -2.0 * numkit.sinpi(kap - A)
        f_plus = lambda kap: numkit.sinpi(kap + A)
        if B > 0:
            chB = math.cosh(2.0 * math.pi * B)
            f_b = lambda kap: numkit.cospi(2.0 * kap) + chB
            factors, tail = (f_minus, f_plus, f_b), ("cos 2pi kappa+cosh 2pi B",)
        else:
            # 1 + cos 2 pi kappa = 2 cos^2 pi kappa: a squared factor
            f_b = lambda kap: numkit.cospi(kap)
            factors, tail = (f_minus, f_plus, f_b, lambda kap: 2.0 * numkit.cospi(kap)), ("cos pi kappa",) * 2
        return ContinuedDenominator(spec, "real_valued", factors, scan_max=_scarf_kappa_max(spec),
                                    labels=("sin pi(kappa-A)", "sin pi(kappa+A)") + tail)
    raise DomainError(f"{spec.kind} is not a catalog well")


DenominatorFactory = Callable[[Potential], ContinuedDenominator]


def with_unimodular_artifact(den: ContinuedDenominator, kappa0: float = 1.0) -> ContinuedDenominator:
    """Append the continued parameter-free factor of a unimodular phase like (1-ik)/(1+ik).

    Continued to k = i kappa the phase becomes (1+kappa)/(1-kappa), which
    puts a zero at kappa = kappa0 into the denominator.
    """
    return replace(den, factors=den.factors + (lambda kap: kappa0 - kap,),
                   labels=den.labels + ("unimodular artifact",))


def unimodular_fixture(kappa0: float = 1.0) -> DenominatorFactory:
    """Denominator factory with the unimodular artifact injected."""
    return lambda spec: with_unimodular_artifact(pole_denominator(spec), kappa0)


def _scan_range(den: ContinuedDenominator, kappa_max):
    hi = kappa_max if kappa_max is not None else den.scan_max
    if hi is None:
        raise DomainError(f"{den.spec.kind}: pass an explicit upper scan limit")
    if not hi > 0:
        raise DomainError("the scan limit must be positive")
    return float(hi)


def _zeros(den: ContinuedDenominator, hi: float, n_grid: int):
    found = []
    for idx, f in enumerate(den.factors):
        if den.kind == "real_valued":
            for b in numkit.bracket_roots(f, 0.0, hi, n_grid):
                r = numkit.refine_root(f, b, ROOT_TOL)
                found.append((r.x, idx))
        else:
            for r in numkit.minimize_modulus(f, 0.0, hi, n_grid):
                found.append((r.x, idx))
    found.sort()
    scale = den.scan_max or hi
    merged = []
    for x, idx in found:
        if any(abs(x - e) <= EDGE_FRACTION * scale for e in den.edges):
            continue
        if merged and abs(x - merged[-1][0]) <= 1e-9 * scale:
            continue
        merged.append((x, idx))
    return merged


def scan_poles(spec: Potential, kappa_max: float | None = None, n_grid: int | None = None,
               denominator: DenominatorFactory = pole_denominator) -> list[PoleCandidate]:
    """All zeros of the continued denominator on (0, kappa_max), unclassified.

    For the harmonic well ``kappa_max`` is the upper energy of the scan.
    """
    den = denominator(spec)
    hi = _scan_range(den, kappa_max)
    n_grid = n_grid or DEFAULT_N_GRID
    out = []
    squared = den.kind == "complex_valued"
    for x, idx in _zeros(den, hi, n_grid):
        # the located factor's own residual; the full product carries the scale of
        # the other factors (cosh 2 pi B for Scarf II) and is kept separately
        r, d = abs(den.factors[idx](x)), abs(den.eval(x))
        out.append(PoleCandidate(
            kappa=den.kappa(x), E=den.energy(x),
            diagnostics={"pole_variable": x, "factor": float(idx),
                         "residual": r * r if squared else r, "denominator": d * d if squared else d},
        ))
    return out


def _position(c: PoleCandidate) -> float:
    return c.diagnostics.get("pole_variable", c.kappa)


def _window(reference: Sequence[PoleCandidate], x: float) -> float:
    xs = sorted(_position(c) for c in reference)
    gaps = [b - a for a, b in zip(xs, xs[1:]) if b - a > 0]
    if gaps:
        return 0.5 * min(gaps)
    return 0.5 * abs(x)


def _perturbed_scan(spec, delta_frac, denominator, kappa_max, n_grid):
    den = denominator(spec)
    hi = _scan_range(den, kappa_max) * (1.0 + 2.0 * delta_frac)
    return scan_poles(spec.scaled(1.0 + delta_frac), hi, n_grid, denominator)


def parameter_sensitivity(spec: Potential, candidate: PoleCandidate, delta_frac: float = 0.01,
                          denominator: DenominatorFactory = pole_denominator,
                          kappa_max: float | None = None, n_grid: int | None = None,
                          reference: Sequence[PoleCandidate] | None = None,
                          perturbed: Sequence[PoleCandidate] | None = None) -> float:
    """|dE|/|E| of a pole when the strength parameter is scaled by (1 + delta_frac).

    The pole is tracked to the nearest perturbed zero within half the minimum
    spacing of the unperturbed zeros.

    Raises:
        PoleLost: nothing inside the tracking window.
    """
    if not 0 < delta_frac <= 0.05:
        raise DomainError("delta_frac must lie in (0, 0.05]")
    if not spec.strength:
        raise DomainError(f"{spec.kind} has no strength parameter")
    if reference is None:
        reference = scan_poles(spec, kappa_max, n_grid, denominator)
    if perturbed is None:
        perturbed = _perturbed_scan(spec, delta_frac, denominator, kappa_max, n_grid)
    x = _position(candidate)
    window = _window(reference, x)
    near = [c for c in perturbed if abs(_position(c) - x) <= window]
    if not near:
        raise PoleLost(f"no pole within {window:g} of {x:g} after scaling {spec.strength}")
    best = min(near, key=lambda c: abs(_position(c) - x))
    return abs(best.E - candidate.E) / abs(candidate.E)


def _square_amplitude_residual(spec: SquareWell, kap: float) -> float:
    # tan(Ka) = 2 kappa K / (K^2 - kappa^2), written as 2 kappa K cos Ka - (K^2 - kappa^2) sin Ka
    k0 = spec.k0
    K = math.sqrt(max(k0 * k0 - kap * kap, 0.0))
    Ka = K * spec.a
    return abs(2 * kap * K * math.cos(Ka) - (K * K - kap * kap) * math.sin(Ka)) / (k0 * k0)


def _amplitude_pole(spec: Potential, kap: float):
    """Name of the diverging amplitude factor at k = i kappa, or None."""
    if isinstance(spec, ScarfII):
        scarf, k = spec, 1j * kap
    else:
        # sech^2 well of width a is the B = 0 member with A = eta - 1/2, x in units of a
        scarf, k = ScarfII(A=spec.eta - 0.5, B=0.0), 1j * kap * spec.a
    try:
        catalog.scarf2_amplitude(scarf, k, pole_tol=AMPLITUDE_POLE_TOL)
    except PoleOfAmplitude as exc:
        return exc.factor
    except DomainError:
        return None
    return None


def _classify(candidate, spec, sensitivity):
    diag = dict(candidate.diagnostics)
    diag["sensitivity"] = sensitivity
    if candidate.kappa <= 0:
        return replace(candidate, classification=Classification.NEGATIVE_KAPPA, diagnostics=diag)
    if sensitivity < SENSITIVITY_THRESHOLD:
        return replace(candidate, classification=Classification.PARAMETER_INDEPENDENT, diagnostics=diag)
    label = Classification.PHYSICAL
    if isinstance(spec, SquareWell):
        res = _square_amplitude_residual(spec, candidate.kappa)
        diag["amplitude_residual"] = res
        if res > SQUARE_AMPLITUDE_TOL:
            label = Classification.SIGN_CONDITION_VIOLATED
    elif isinstance(spec, (ScarfII, EckartWell)):
        factor = _amplitude_pole(spec, candidate.kappa)
        diag["amplitude_pole"] = 0.0 if factor is None else 1.0
        if factor is None:
            label = Classification.CONJUGATE_ARTIFACT
    return replace(candidate, classification=label, diagnostics=diag)


def _sensitivity_or_inf(spec, candidate, **kw):
    try:
        return parameter_sensitivity(spec, candidate, **kw)
    except PoleLost:
        return math.inf


def classify(candidate: PoleCandidate, spec: Potential, delta_frac: float = 0.01,
             denominator: DenominatorFactory = pole_denominator,
             kappa_max: float | None = None, n_grid: int | None = None) -> PoleCandidate:
    """Assign a classification to one candidate (n is left unset).

    Filters, in order: kappa <= 0; parameter independence; the
    amplitude-level check for the square well (tan Ka condition) and for
    the sech^2-type wells (a numerator gamma factor must diverge).
    """
    sens = _sensitivity_or_inf(spec, candidate, delta_frac=delta_frac, denominator=denominator,
                               kappa_max=kappa_max, n_grid=n_grid)
    return _classify(candidate, spec, sens)


def find_poles(spec: Potential, kappa_max: float | None = None, n_grid: int | None = None,
               denominator: DenominatorFactory = pole_denominator,
               delta_frac: float = 0.01) -> list[PoleCandidate]:
    """Scan and classify; physical poles get n by ascending energy.

    Returned in ascending kappa (for the harmonic well: ascending energy).
    """
    cands = scan_poles(spec, kappa_max, n_grid, denominator)
    perturbed = _perturbed_scan(spec, delta_frac, denominator, kappa_max, n_grid)
    out = []
    for c in cands:
        sens = _sensitivity_or_inf(spec, c, delta_frac=delta_frac, denominator=denominator,
                                   kappa_max=kappa_max, n_grid=n_grid,
                                   reference=cands, perturbed=perturbed)
        out.append(_classify(c, spec, sens))
    physical = sorted((c for c in out if c.physical), key=lambda c: c.E)
    rank = {id(c): n for n, c in enumerate(physical)}
    return [replace(c, n=rank[id(c)]) if id(c) in rank else c for c in out]


def eigenvalues_from_poles(spec: Potential, n_max: int | None = None, kappa_max: float | None = None,
                           n_grid: int | None = None) -> EigenvalueSet:
    """Bound-state spectrum from the physical poles of the continued T(E).

    The harmonic well needs ``n_max``; it is scanned over E in (0, n_max hbar omega).
    """
    if isinstance(spec, HarmonicWell):
        if n_max is None and kappa_max is None:
            raise DomainError("the harmonic spectrum is unbounded; pass n_max")
        if kappa_max is None:
            kappa_max = n_max * spec.units.hbar * spec.omega
    poles = find_poles(spec, kappa_max, n_grid)
    energies = sorted(c.E for c in poles if c.physical)
    if n_max is not None:
        energies = energies[:n_max]
    rejected = [c for c in poles if not c.physical]
    return EigenvalueSet.from_energies(Method.POLE, energies, {"rejected": rejected, "candidates": poles})
