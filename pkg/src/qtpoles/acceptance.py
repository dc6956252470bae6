"""The acceptance suite: each criterion is a list of checks tagged by potential kind.

Used by ``qtpoles verify`` and by the test suite, so both report the same numbers.
"""
from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import catalog, oracle, polescan
from .catalog import (DiracDeltaWell, EckartWell, HarmonicWell, MorseWell, ParabolicBarrier, ScarfII,
                      SquareBarrier, SquareWell)
from .polescan import Classification

DEFAULT_TOLERANCES = {
    "pole_rel": 1e-8,
    "pole_abs": 1e-10,
    "numerov": 1e-6,
    "matrix": 5e-4,
    "transfer_exact": 1e-10,
    "transfer_smooth": 1e-4,
    "gamma_identity": 1e-10,
    "hill_wheeler": 1e-14,
    "barrier_resonance": 1e-9,
    "reflectionless": 1e-10,
    "unitarity_closed": 1e-12,
    "unitarity_transfer": 1e-10,
}

# --tol-eigen sets every eigenvalue tolerance at once
EIGEN_TOLERANCES = ("pole_rel", "pole_abs", "numerov", "matrix")

SMALL_ENERGY = 0.1
GAMMA_SEED = 20240
N_GAMMA_SAMPLES = 20

REFERENCE = {
    "delta": DiracDeltaWell(V0=2.0),
    "square": SquareWell(V0=25.0, a=1.0),
    "harmonic": HarmonicWell(omega=2.0),
    "morse": MorseWell(V0=6.25, a=1.0),
    "eckart": EckartWell(V0=6.0, a=1.0),
    "scarf2": ScarfII(A=2.5, B=1.0),
}
HARMONIC_STATES = 5
GRID_WELLS = ("square", "eckart", "morse", "scarf2", "harmonic")
TRANSFER_WELLS = ("square", "delta", "eckart", "scarf2")
EXPECTED_COUNTS = {"delta": 1, "square": 2, "morse": 2, "eckart": 2, "scarf2": 3}


@dataclass
class CheckResult:
    id: str
    kind: str
    passed: bool
    measured: float | None
    tolerance: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "measured": _finite_or_none(self.measured),
            "tolerance": _finite_or_none(self.tolerance),
            "seconds": round(self.seconds, 6) if timing else None,
            "details": _jsonable(self.details),
        }


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return _finite_or_none(obj)


@dataclass(frozen=True)
class Check:
    id: str
    criterion: int
    kind: str
    run: Callable[[dict], CheckResult]


def _states(spec):
    return HARMONIC_STATES if isinstance(spec, HarmonicWell) else None


def _energies(spec, lo=0.1, hi=50.0, n=25):
    # n log-spaced points strictly inside (lo, hi), in units of the energy scale
    return catalog.energy_scale(spec) * np.geomspace(lo, hi, n + 2)[1:-1]


@functools.lru_cache(maxsize=None)
def _transfer(spec, E):
    return oracle.transfer_matrix_t(spec, E)


@functools.lru_cache(maxsize=None)
def _numerov(spec, n):
    return tuple(oracle.numerov_eigenvalues(spec, n).energies)


def _result(cid, kind, measured, tol, **details):
    ok = measured is not None and math.isfinite(measured) and measured <= tol
    return CheckResult(cid, kind, bool(ok), measured, tol, details=details)


# ---------------------------------------------------------------------------
# 1. pole vs closed form


def _pole_vs_analytic(kind):
    def run(tol):
        spec = REFERENCE[kind]
        n = _states(spec)
        ana = catalog.analytic_eigenvalues(spec, n_max=n).energies
        pole = polescan.eigenvalues_from_poles(spec, n_max=n).energies
        details = {"analytic": ana, "pole": pole}
        if len(ana) != len(pole):
            return _result(f"1/{kind}", kind, math.inf, tol["pole_rel"], **details)
        # |E| >= 0.1 is judged relatively, smaller levels absolutely; report the worse ratio
        worst = 0.0
        for ea, ep in zip(ana, pole):
            dev = abs(ep - ea)
            ratio = dev / (tol["pole_abs"]) if abs(ea) < SMALL_ENERGY else dev / abs(ea) / tol["pole_rel"]
            worst = max(worst, ratio)
        rel = max(abs(ep - ea) / abs(ea) for ea, ep in zip(ana, pole))
        details["max_relative"] = rel
        return CheckResult(f"1/{kind}", kind, worst <= 1.0, rel, tol["pole_rel"], details=details)
    return run


# ---------------------------------------------------------------------------
# 2. grid oracles


def _numerov_vs_analytic(kind):
    def run(tol):
        spec = REFERENCE[kind]
        ana = catalog.analytic_eigenvalues(spec, n_max=_states(spec)).energies
        num = _numerov(spec, len(ana))
        dev = max(abs(a - b) for a, b in zip(ana, num)) / catalog.energy_scale(spec)
        return _result(f"2/{kind}/numerov", kind, dev, tol["numerov"], numerov=list(num))
    return run


def _matrix_vs_numerov(kind):
    def run(tol):
        spec = REFERENCE[kind]
        n = len(catalog.analytic_eigenvalues(spec, n_max=_states(spec)))
        num = _numerov(spec, n)
        mat = oracle.matrix_eigenvalues(spec, n).energies
        dev = max(abs(a - b) for a, b in zip(mat, num)) / catalog.energy_scale(spec)
        return _result(f"2/{kind}/matrix", kind, dev, tol["matrix"], matrix=mat)
    return run


# ---------------------------------------------------------------------------
# 3. spurious poles


def _scarf_conjugates(tol):
    poles = polescan.find_poles(REFERENCE["scarf2"], kappa_max=5.0)
    artifacts = sorted(c.kappa for c in poles if c.classification is Classification.CONJUGATE_ARTIFACT)
    physical = [c for c in poles if c.physical]
    ok = (len(artifacts) == 2 and len(physical) == 3 and len(poles) == 5
          and all(abs(k - e) < 1e-9 for k, e in zip(artifacts, (3.5, 4.5))))
    return CheckResult("3a/scarf2", "scarf2", ok, float(len(artifacts)), 2.0,
                       details={"artifacts": artifacts, "physical": sorted(c.kappa for c in physical)})


def _unimodular(tol):
    spec = DiracDeltaWell(V0=3.0)
    poles = polescan.find_poles(spec, denominator=polescan.unimodular_fixture(1.0))
    at_one = [c for c in poles if abs(c.kappa - 1.0) < 1e-9]
    ok = len(at_one) == 1 and at_one[0].classification is Classification.PARAMETER_INDEPENDENT
    sens = at_one[0].diagnostics.get("sensitivity") if at_one else None
    return CheckResult("3b/delta", "delta", ok, sens, polescan.SENSITIVITY_THRESHOLD,
                       details={"classes": [c.classification.value for c in poles]})


def _tan_sign_ok(spec, cand):
    # independent parity rule: the even factor needs tan(Ka/2) > 0, the odd one tan(Ka/2) < 0
    K = math.sqrt(max(spec.k0 ** 2 - cand.kappa ** 2, 0.0))
    t = math.tan(0.5 * K * spec.a)
    return (t > 0) if cand.diagnostics["factor"] == 0 else (t < 0)


def _square_sign_condition(V0):
    def run(tol):
        spec = SquareWell(V0=V0, a=1.0)
        poles = polescan.find_poles(spec)
        wrong = [c for c in poles if not _tan_sign_ok(spec, c)]
        flagged = [c for c in poles if c.classification is Classification.SIGN_CONDITION_VIOLATED]
        ana = catalog.analytic_eigenvalues(spec).energies
        kept = sorted(c.E for c in poles if c.physical)
        same = len(kept) == len(ana) and all(abs(a - b) <= tol["pole_rel"] * abs(a) for a, b in zip(ana, kept))
        ok = same and {id(c) for c in wrong} == {id(c) for c in flagged}
        return CheckResult(f"3c/square/V0={V0:g}", "square", ok, float(len(flagged)), float(len(wrong)),
                           details={"violations": [c.kappa for c in flagged], "survivors": kept})
    return run


# ---------------------------------------------------------------------------
# 4. transfer matrix vs closed form


def _transfer_vs_closed(kind):
    def run(tol):
        spec = REFERENCE[kind]
        key = "transfer_exact" if kind in ("square", "delta") else "transfer_smooth"
        dev = 0.0
        for E in _energies(spec):
            T = catalog.transmission_coefficient(spec, float(E)).T
            dev = max(dev, abs(_transfer(spec, float(E)).T - T) / T)
        return _result(f"4/{kind}", kind, dev, tol[key])
    return run


# ---------------------------------------------------------------------------
# 5. gamma reduction


def gamma_samples(seed: int = GAMMA_SEED, n: int = N_GAMMA_SAMPLES):
    """(k, A, B) triples with A kept 0.05 away from multiples of 1/2."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        k, A, B = rng.uniform(0.1, 5.0), rng.uniform(0.3, 4.0), rng.uniform(0.1, 3.0)
        if abs(2 * A - round(2 * A)) < 0.1:
            continue
        out.append((float(k), float(A), float(B)))
    return out


def _gamma_identity(tol):
    dev = 0.0
    for k, A, B in gamma_samples():
        spec = ScarfII(A=A, B=B)
        T = catalog.scarf2_transmission(spec, k)
        dev = max(dev, abs(abs(catalog.scarf2_amplitude(spec, k)) ** 2 - T))
    return _result("5/scarf2", "scarf2", dev, tol["gamma_identity"])


# ---------------------------------------------------------------------------
# 6. point checks


def _hill_wheeler(tol):
    spec = ParabolicBarrier(V0_top=5.0, Omega=1.0)
    dev = abs(catalog.barrier_transmission(spec, 5.0) - 0.5)
    return _result("6/parabolic-barrier", "parabolic-barrier", dev, tol["hill_wheeler"])


def _barrier_resonance(tol):
    spec = SquareBarrier(U0=25.0, a=1.0)
    E = spec.U0 + math.pi ** 2 * spec.delta
    dev = abs(catalog.barrier_transmission(spec, E) - 1.0)
    return _result("6/square-barrier", "square-barrier", dev, tol["barrier_resonance"])


def _reflectionless(tol):
    spec = REFERENCE["eckart"]
    worst = min(catalog.transmission_coefficient(spec, float(E)).T for E in _energies(spec))
    return _result("6/eckart", "eckart", 1.0 - worst, tol["reflectionless"])


# ---------------------------------------------------------------------------
# 7. counting


def _counting(kind):
    def run(tol):
        spec = REFERENCE[kind]
        count = catalog.bound_state_count(spec)
        sturm = None if kind == "delta" else oracle.sturm_count(spec, 0.0)
        ok = count == EXPECTED_COUNTS[kind] and (sturm is None or sturm == count)
        return CheckResult(f"7/{kind}", kind, ok, float(count), float(EXPECTED_COUNTS[kind]),
                           details={"sturm": sturm})
    return run


# ---------------------------------------------------------------------------
# 8. unitarity


def _unitarity_closed(kind):
    def run(tol):
        spec = REFERENCE[kind]
        dev = 0.0
        for E in _energies(spec, 1e-3, 100.0, 100):
            s = catalog.transmission_coefficient(spec, float(E))
            dev = max(dev, abs(s.T + s.R - 1.0))
            if s.t is not None:
                dev = max(dev, abs(abs(s.t) ** 2 - s.T))
        return _result(f"8/{kind}/closed", kind, dev, tol["unitarity_closed"])
    return run


def _unitarity_transfer(kind):
    def run(tol):
        spec = REFERENCE[kind]
        dev = max(abs(r.T + r.R - 1.0) for r in (_transfer(spec, float(E)) for E in _energies(spec)))
        return _result(f"8/{kind}/transfer", kind, dev, tol["unitarity_transfer"])
    return run


CRITERIA = {
    1: "pole spectra equal the closed forms",
    2: "grid oracles agree with the closed forms",
    3: "spurious poles are rejected",
    4: "transfer-matrix T equals the closed-form T",
    5: "gamma-product amplitude reproduces the closed-form T",
    6: "barrier and reflectionless point checks",
    7: "bound-state counts",
    8: "unitarity",
}

CHECKS: tuple[Check, ...] = (
    *(Check(f"1/{k}", 1, k, _pole_vs_analytic(k)) for k in REFERENCE),
    *(Check(f"2/{k}/numerov", 2, k, _numerov_vs_analytic(k)) for k in GRID_WELLS),
    *(Check(f"2/{k}/matrix", 2, k, _matrix_vs_numerov(k)) for k in GRID_WELLS),
    Check("3a/scarf2", 3, "scarf2", _scarf_conjugates),
    Check("3b/delta", 3, "delta", _unimodular),
    Check("3c/square/V0=25", 3, "square", _square_sign_condition(25.0)),
    Check("3c/square/V0=100", 3, "square", _square_sign_condition(100.0)),
    *(Check(f"4/{k}", 4, k, _transfer_vs_closed(k)) for k in TRANSFER_WELLS),
    Check("5/scarf2", 5, "scarf2", _gamma_identity),
    Check("6/parabolic-barrier", 6, "parabolic-barrier", _hill_wheeler),
    Check("6/square-barrier", 6, "square-barrier", _barrier_resonance),
    Check("6/eckart", 6, "eckart", _reflectionless),
    *(Check(f"7/{k}", 7, k, _counting(k)) for k in EXPECTED_COUNTS),
    *(Check(f"8/{k}/closed", 8, k, _unitarity_closed(k)) for k in TRANSFER_WELLS),
    *(Check(f"8/{k}/transfer", 8, k, _unitarity_transfer(k)) for k in TRANSFER_WELLS),
)


def tolerances(overrides: dict | None = None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (overrides or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance {key!r}; choose from {sorted(tol)}")
        tol[key] = float(value)
    return tol


def run_checks(only: str | None = None, criterion: int | None = None,
               overrides: dict | None = None) -> list[CheckResult]:
    """Run the selected checks in suite order; a check that raises counts as failed."""
    tol = tolerances(overrides)
    out = []
    for check in CHECKS:
        if only is not None and check.kind != only:
            continue
        if criterion is not None and check.criterion != criterion:
            continue
        t0 = time.perf_counter()
        try:
            res = check.run(tol)
        except Exception as exc:  # reported, not raised: the suite must finish
            res = CheckResult(check.id, check.kind, False, None, math.nan,
                              details={"error": f"{type(exc).__name__}: {exc}"})
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
