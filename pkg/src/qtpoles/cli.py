"""``qtpoles`` command-line front end.

Exit codes: 0 success, 1 invalid input, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__, acceptance, catalog, oracle, polescan
from .catalog import DiracDeltaWell, HarmonicWell, Method, ScarfII, UnitSystem
from .errors import QTPolesError

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2
GENERATED_BY = f"qtpoles {__version__}"
UNITS_ENV = "QTPOLES_DEFAULT_UNITS"
DEBUG_ENV = "QTPOLES_DEBUG"

# flag -> constructor field, per kind
PARAMETERS = {
    "delta": {"V0": "V0"},
    "square": {"V0": "V0", "a": "a"},
    "harmonic": {"omega": "omega"},
    "morse": {"V0": "V0", "a": "a"},
    "eckart": {"V0": "V0", "a": "a"},
    "scarf2": {"A": "A", "B": "B"},
    "square-barrier": {"U0": "U0", "a": "a"},
    "parabolic-barrier": {"V0": "V0_top", "omega": "Omega"},
    "morse-barrier": {"U0": "U0", "a": "a"},
}
DEFAULTS = {
    "delta": {"V0": 2.0},
    "square": {"V0": 25.0, "a": 1.0},
    "harmonic": {"omega": 2.0},
    "morse": {"V0": 6.25, "a": 1.0},
    "eckart": {"V0": 6.0, "a": 1.0},
    "scarf2": {"A": 2.5, "B": 1.0},
    "square-barrier": {"U0": 25.0, "a": 1.0},
    "parabolic-barrier": {"V0_top": 5.0, "Omega": 1.0},
    "morse-barrier": {"U0": 6.25, "a": 1.0},
}
FORMULAS = {
    "delta": ("V(x) = -V0 delta(x)", "T = 2 hbar^2 E / (2 hbar^2 E + m V0^2)", "E = -m V0^2 / (2 hbar^2)"),
    "square": ("V = -V0 for |x| < a/2", "T = 4 e(1+e) / (4 e(1+e) + sin^2(K a)), e = E/V0",
               "K a tan(K a/2) = kappa a (even), -K a cot(K a/2) = kappa a (odd)"),
    "harmonic": ("V = m omega^2 x^2 / 2", "none (confining)", "E_n = (n + 1/2) hbar omega"),
    "morse": ("V = V0 [exp(2x/a) - 2 exp(x/a)]", "none (total reflection)",
              "E_n = -[sqrt(V0) - (n + 1/2) sqrt(Delta)]^2"),
    "eckart": ("V = -V0 sech^2(x/a)",
               "T = (cosh 2 pi alpha - 1) / (cosh 2 pi alpha + cos 2 pi eta), eta = sqrt(1/4 + V0/Delta)",
               "E_n = -Delta [eta - (n + 1/2)]^2"),
    "scarf2": ("V = (hbar^2/2m) [(B^2 - A^2 - A) sech^2 x + B (2A + 1) tanh x sech x]",
               "T = sinh^2(2 pi k) / ((cosh 2 pi k - cos 2 pi A)(cosh 2 pi k + cosh 2 pi B))",
               "E_n = -(hbar^2/2m) (A - n)^2, 0 <= n < A"),
    "square-barrier": ("V = U0 for |x| < a/2", "T = 4 e(e-1) / (4 e(e-1) + sin^2(alpha sqrt(e-1))), e = E/U0",
                       "none (barrier)"),
    "parabolic-barrier": ("V = V0_top - m Omega^2 x^2 / 2",
                          "T = 1 / (1 + exp(2 pi (V0_top - E) / (hbar Omega)))", "none (barrier)"),
    "morse-barrier": ("V = -U0 [exp(2x/a) - 2 exp(x/a)]",
                      "T = (1 - exp(-4 pi alpha)) / (1 + exp(2 pi (beta - alpha)))", "none (barrier)"),
}
METHODS = tuple(m.value for m in Method)
EIGEN_TOL = {"pole": ("pole_rel", "pole_abs"), "numerov": ("numerov",), "matrix": ("matrix",)}


class InputError(Exception):
    """Bad user input; exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    kind: str | None = None
    params: dict = field(default_factory=dict)
    units: UnitSystem = catalog.NATURAL
    grid: oracle.GridConfig | None = None
    tolerances: dict = field(default_factory=dict)
    fmt: str = "json"
    output: str | None = None
    args: argparse.Namespace | None = None

    def potential(self) -> catalog.Potential:
        return catalog.make_potential(self.kind, self.units, **self.params)


def _positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return x


def _float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return x


def _nonneg_float(text):
    x = _float(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return x


def _count(minimum):
    def parse(text):
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text!r}")
        return n
    return parse


def _add_potential_flags(p):
    p.add_argument("--potential", required=True, choices=sorted(catalog.KINDS))
    for name in ("V0", "a", "omega", "A", "U0"):
        p.add_argument(f"--{name}", type=_positive_float)
    p.add_argument("--B", type=_nonneg_float)
    p.add_argument("--hbar", type=_positive_float)
    p.add_argument("--mass", type=_positive_float)
    p.add_argument("--units", choices=sorted(catalog.UNIT_PRESETS),
                   help=f"unit preset (default: ${UNITS_ENV} or natural)")


def _add_output_flags(p, formats=("json", "csv")):
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--output", "-o", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtpoles", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=GENERATED_BY)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("list", help="list the potential catalog")
    p.add_argument("--json", action="store_true")
    p.add_argument("--kind", choices=sorted(catalog.KINDS))

    p = sub.add_parser("transmission", help="tabulate T(E)")
    _add_potential_flags(p)
    p.add_argument("--emin", type=_float)
    p.add_argument("--emax", type=_float)
    p.add_argument("--samples", type=_count(1), default=101)
    p.add_argument("--log", action="store_true", help="log-spaced energies")
    _add_output_flags(p, ("csv", "json"))

    p = sub.add_parser("poles", help="scan and classify poles of the continued T")
    _add_potential_flags(p)
    p.add_argument("--kappa-max", type=_positive_float,
                   help="upper end of the scan (energy for the harmonic well)")
    p.add_argument("--n-grid", type=_count(10))
    p.add_argument("--nmax", type=_count(1), default=5, help="harmonic well: levels to scan")
    _add_output_flags(p)

    p = sub.add_parser("eigen", help="compare spectra from several methods")
    _add_potential_flags(p)
    p.add_argument("--methods", default="analytic,pole,numerov,matrix")
    p.add_argument("--nmax", type=_count(1), help="number of states (harmonic default 5)")
    p.add_argument("--x-min", type=_float)
    p.add_argument("--x-max", type=_float)
    p.add_argument("--n-points", type=_count(101))
    _add_tolerance_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", choices=sorted(catalog.KINDS), help="restrict to checks of one potential")
    p.add_argument("--criterion", type=_count(1))
    p.add_argument("--no-timing", action="store_true", help="omit wall times (byte-stable output)")
    _add_tolerance_flags(p)
    _add_output_flags(p)

    for p in sub.choices.values():
        p.add_argument("--config", help="key=value file preloading any flag")
    return parser


def _add_tolerance_flags(p):
    p.add_argument("--tol-eigen", type=_positive_float, help="every eigenvalue tolerance at once")
    for key in acceptance.DEFAULT_TOLERANCES:
        p.add_argument(f"--tol-{key.replace('_', '-')}", dest=f"tol_{key}", type=_positive_float)


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into flags; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from None
    argv = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.lstrip("-").replace("_", "-") if key not in ("V0", "A", "B", "U0") else "--" + key
        if value.lower() in ("true", "yes", "on"):
            argv.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            argv += [flag, *shlex.split(value)]
    return argv


def _splice_config(argv: list[str]) -> list[str]:
    # file flags are inserted right after the subcommand so the command line wins
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    out, path = [], None
    it = iter(argv)
    for a in it:
        if a == "--config":
            path = next(it, None)
            if path is None:
                raise InputError("--config needs a path")
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
        else:
            out.append(a)
    commands = [i for i, a in enumerate(out) if a in ("list", "transmission", "poles", "eigen", "verify")]
    at = commands[0] + 1 if commands else 0
    return out[:at] + read_config(path) + out[at:]


def _units(args) -> UnitSystem:
    preset = args.units or os.environ.get(UNITS_ENV) or "natural"
    if preset not in catalog.UNIT_PRESETS:
        raise InputError(f"{UNITS_ENV}={preset!r}; choose from {sorted(catalog.UNIT_PRESETS)}")
    base = catalog.UNIT_PRESETS[preset]
    return UnitSystem(hbar=args.hbar or base.hbar, mass=args.mass or base.mass)


def _tolerance_overrides(args) -> dict:
    out = {}
    if getattr(args, "tol_eigen", None) is not None:
        out.update({k: args.tol_eigen for k in acceptance.EIGEN_TOLERANCES})
    for key in acceptance.DEFAULT_TOLERANCES:
        value = getattr(args, f"tol_{key}", None)
        if value is not None:
            out[key] = value
    return out


def make_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, args=args)
    cfg.fmt = getattr(args, "format", "json")
    cfg.output = getattr(args, "output", None)
    if hasattr(args, "tol_eigen"):
        cfg.tolerances = acceptance.tolerances(_tolerance_overrides(args))
    if getattr(args, "potential", None):
        cfg.kind = args.potential
        cfg.units = _units(args)
        params = dict(DEFAULTS[cfg.kind])
        for flag, name in PARAMETERS[cfg.kind].items():
            value = getattr(args, flag)
            if value is not None:
                params[name] = value
        cfg.params = params
        cfg.potential()  # validates before any computation
    if getattr(args, "n_points", None) or getattr(args, "x_min", None) is not None \
            or getattr(args, "x_max", None) is not None:
        base = oracle.default_grid(cfg.potential(), "numerov")
        cfg.grid = oracle.GridConfig(args.x_min if args.x_min is not None else base.x_min,
                                     args.x_max if args.x_max is not None else base.x_max,
                                     args.n_points or base.n_points)
    return cfg


# ---------------------------------------------------------------------------
# emission


def _clean(obj):
    # non-finite numbers become null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def envelope(spec_echo, results, passed, tolerances) -> dict:
    return {
        "spec": spec_echo,
        "results": results,
        "pass": passed,
        "tolerances": tolerances,
        "version": {"generated_by": GENERATED_BY},
    }


def spec_echo(cfg: RunConfig) -> dict:
    return {"kind": cfg.kind, "parameters": dict(cfg.params),
            "units": {"hbar": cfg.units.hbar, "mass": cfg.units.mass}}


def load_schema(name: str) -> dict:
    return json.loads(resources.files("qtpoles").joinpath("schemas", f"{name}.schema.json").read_text())


def validate(report: dict, name: str) -> None:
    import jsonschema
    jsonschema.validate(report, load_schema(name))


def dump_json(report: dict, schema: str | None = None) -> str:
    report = _clean(report)
    if schema and os.environ.get(DEBUG_ENV):
        validate(report, schema)
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _catalog_entries(kind=None):
    out = []
    for k, cls in catalog.KINDS.items():
        if kind and k != kind:
            continue
        V, T, spectrum = FORMULAS[k]
        out.append({
            "kind": k,
            "class": cls.__name__,
            "role": "well" if cls.is_well else "barrier",
            "parameters": {flag: DEFAULTS[k][name] for flag, name in PARAMETERS[k].items()},
            "potential": V,
            "transmission": T,
            "spectrum": spectrum,
        })
    return out


def cmd_list(args) -> int:
    entries = _catalog_entries(args.kind)
    if args.json:
        _emit(json.dumps(entries, indent=2) + "\n", None)
        return EXIT_OK
    lines = []
    for e in entries:
        params = ", ".join(f"--{k} {v:g}" for k, v in e["parameters"].items())
        lines += [f"{e['kind']} ({e['role']}): {params}",
                  f"    {e['potential']}",
                  f"    transmission: {e['transmission']}",
                  f"    spectrum:     {e['spectrum']}"]
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def _energy_grid(cfg, spec):
    a = cfg.args
    scale = catalog.energy_scale(spec)
    emin = a.emin if a.emin is not None else 0.1 * scale
    emax = a.emax if a.emax is not None else 50.0 * scale
    needs_positive = not isinstance(spec, catalog.ParabolicBarrier)
    if needs_positive and emin <= 0:
        raise InputError("--emin must be positive")
    if emax < emin:
        raise InputError("--emax must be >= --emin")
    if a.samples == 1:
        return [float(emin)]
    if a.log:
        if emin <= 0:
            raise InputError("--log needs --emin > 0")
        return [float(e) for e in np.geomspace(emin, emax, a.samples)]
    return [float(e) for e in np.linspace(emin, emax, a.samples)]


def cmd_transmission(cfg: RunConfig) -> int:
    spec = cfg.potential()
    energies = _energy_grid(cfg, spec)
    if spec.is_well:
        rows = []
        for E in energies:
            s = catalog.transmission_coefficient(spec, E)
            rows.append((E, s.T, s.R))
        header = ("E", "T", "R")
    else:
        rows = [(E, catalog.barrier_transmission(spec, E)) for E in energies]
        header = ("E", "That")
    if cfg.fmt == "csv":
        _emit(dump_csv(header, rows), cfg.output)
    else:
        results = [dict(zip(header, r)) for r in rows]
        _emit(dump_json(envelope(spec_echo(cfg), results, True, {}), "transmission"), cfg.output)
    return EXIT_OK


def _poles_scan_max(cfg, spec):
    if cfg.args.kappa_max is not None:
        return cfg.args.kappa_max
    if isinstance(spec, HarmonicWell):
        return cfg.args.nmax * spec.units.hbar * spec.omega
    if isinstance(spec, ScarfII):
        # wide enough to expose the conjugate kappa = A + n family
        return 2.0 * spec.A
    return None


def cmd_poles(cfg: RunConfig) -> int:
    spec = cfg.potential()
    if not spec.is_well:
        raise InputError(f"{spec.kind} is a barrier; poles needs a well")
    poles = polescan.find_poles(spec, _poles_scan_max(cfg, spec), cfg.args.n_grid)
    poles = sorted(poles, key=lambda c: (c.kappa, c.E))
    if cfg.fmt == "csv":
        rows = [(c.kappa, c.E, "" if c.n is None else c.n, c.classification.value) for c in poles]
        _emit(dump_csv(("kappa", "E", "n", "classification"), rows), cfg.output)
    else:
        results = [c.to_dict() for c in poles]
        _emit(dump_json(envelope(spec_echo(cfg), results, True, {}), "poles"), cfg.output)
    return EXIT_OK


@dataclass
class ComparisonReport:
    spec: dict
    spectra: dict
    deviations: dict
    max_abs_deviation: dict
    rejected_poles: list
    counts: dict
    tolerances: dict
    passed: bool

    def to_json(self) -> dict:
        results = {
            "spectra": self.spectra,
            "deviations": self.deviations,
            "max_abs_deviation": self.max_abs_deviation,
            "counts": self.counts,
            "rejected_poles": self.rejected_poles,
        }
        return envelope(self.spec, results, self.passed, self.tolerances)


def _parse_methods(text, spec):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise InputError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
    if isinstance(spec, DiracDeltaWell) and set(methods) - {"analytic", "pole"}:
        raise InputError("the delta well supports only the analytic and pole methods")
    return list(dict.fromkeys(methods))


def compare(cfg: RunConfig, methods: list[str], n_states: int | None = None) -> ComparisonReport:
    """Run each method and compare every one against the reference (analytic if present)."""
    spec = cfg.potential()
    if not spec.is_well:
        raise InputError(f"{spec.kind} is a barrier; eigen needs a well")
    if isinstance(spec, HarmonicWell):
        n = n_states or 5
    else:
        available = int(catalog.bound_state_count(spec))
        n = min(n_states, available) if n_states else available
    sets = {}
    rejected = []
    for m in methods:
        if m == "analytic":
            sets[m] = catalog.analytic_eigenvalues(spec, n_max=n)
        elif m == "pole":
            sets[m] = polescan.eigenvalues_from_poles(spec, n_max=n)
            rejected = [c.to_dict() for c in sets[m].meta["rejected"]]
        elif m == "numerov":
            sets[m] = oracle.numerov_eigenvalues(spec, n, grid=cfg.grid)
        else:
            sets[m] = oracle.matrix_eigenvalues(spec, n, grid=cfg.grid)

    ref = methods[0] if "analytic" not in methods else "analytic"
    scale = catalog.energy_scale(spec)
    tol = cfg.tolerances
    deviations, max_dev, ok = {}, {}, True
    counts = {m: len(s) for m, s in sets.items()}
    if len(set(counts.values())) > 1:
        ok = False
    for m in methods:
        if m == ref:
            continue
        pair = f"{m}-{ref}"
        a, b = sets[m].energies, sets[ref].energies
        devs = [x - y for x, y in zip(a, b)]
        deviations[pair] = devs
        max_dev[pair] = max((abs(d) for d in devs), default=0.0)
        for d, e in zip(devs, b):
            if m == "pole":
                limit = tol["pole_abs"] if abs(e) < acceptance.SMALL_ENERGY else tol["pole_rel"] * abs(e)
            else:
                limit = tol[m] * scale
            ok &= abs(d) <= limit
    used = {k: tol[k] for m in methods for k in EIGEN_TOL.get(m, ())}
    return ComparisonReport(
        spec=spec_echo(cfg),
        spectra={m: [{"n": n_, "E": e} for n_, e in s.entries] for m, s in sets.items()},
        deviations=deviations, max_abs_deviation=max_dev, rejected_poles=rejected,
        counts=counts, tolerances=used, passed=bool(ok),
    )


def cmd_eigen(cfg: RunConfig) -> int:
    spec = cfg.potential()
    methods = _parse_methods(cfg.args.methods, spec)
    report = compare(cfg, methods, cfg.args.nmax)
    if cfg.fmt == "csv":
        n = max(report.counts.values(), default=0)
        rows = []
        for i in range(n):
            row = [i]
            for m in methods:
                states = report.spectra[m]
                row.append(states[i]["E"] if i < len(states) else None)
            rows.append(row)
        _emit(dump_csv(("n", *methods), rows), cfg.output)
    else:
        _emit(dump_json(report.to_json(), "eigen"), cfg.output)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_verify(cfg: RunConfig) -> int:
    a = cfg.args
    results = acceptance.run_checks(only=a.only, criterion=a.criterion,
                                    overrides=_tolerance_overrides(a))
    passed = all(r.passed for r in results)
    timing = not a.no_timing
    if cfg.fmt == "csv":
        rows = [(r.id, r.status, r.measured, r.tolerance, r.seconds if timing else None) for r in results]
        _emit(dump_csv(("id", "status", "measured", "tolerance", "seconds"), rows), cfg.output)
    else:
        echo = {"suite": "acceptance", "only": a.only, "criterion": a.criterion}
        report = envelope(echo, [r.to_dict(timing) for r in results], passed, cfg.tolerances)
        _emit(dump_json(report, "verify"), cfg.output)
    if not results:
        print("verify: no checks matched the filter", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {"transmission": cmd_transmission, "poles": cmd_poles, "eigen": cmd_eigen, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_splice_config(argv))
        if args.command == "list":
            return cmd_list(args)
        cfg = make_config(args)
        return COMMANDS[args.command](cfg)
    except (InputError, QTPolesError, KeyError, ValueError, ArithmeticError) as exc:
        name = type(exc).__name__
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"qtpoles: error: {msg}" if name == "InputError" else f"qtpoles: {name}: {msg}",
              file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"qtpoles: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
