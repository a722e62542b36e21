"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 divergent point, 3 symmetry or
tolerance violation, 4 numerical instability in a simulation.

Negative values that are not plain numbers (``-pi/2``, ``-3:-0.1:20``) may
be given either as ``--k=-pi/2`` or as a separate token; both work.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import re
import sys

import numpy as np

from . import dynamics, models, symmetry
from .errors import (
    Instability,
    PacketDoesNotFit,
    PacketNotCleared,
    ScatterError,
    SingularMatrix,
    SymmetryNotSatisfied,
    ValidationError,
)
from .network import check_momentum, effective_two_port, parse_network, serialize_network
from .scattering import open_k_grid, s_matrix, two_port

EXIT_OK, EXIT_INPUT, EXIT_DIVERGENT, EXIT_VIOLATION, EXIT_INSTABILITY = 0, 1, 2, 3, 4
GENERIC_K = -1.1  # used when an effective center must be fixed at some momentum

_PI_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<coef>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(?P<div>\d+(?:\.\d*)?))?\s*$"
)


class UsageError(Exception):
    """Bad command-line input; reported with exit code 1."""


def parse_real(text: str) -> float:
    """A float, or a multiple of pi such as ``pi/2``, ``-3pi/4`` or ``2*pi``."""
    try:
        value = float(text)
    except ValueError:
        m = _PI_RE.match(text)
        if not m:
            raise UsageError(f"not a number: {text!r}") from None
        value = math.pi * float(m["coef"] or 1.0) / float(m["div"] or 1.0)
        if m["sign"] == "-":
            value = -value
    if not math.isfinite(value):
        raise UsageError(f"not a finite number: {text!r}")
    return value


def parse_range(text: str, *, open_band: bool = False) -> np.ndarray:
    """``a:b:n`` -> ``n`` evenly spaced points from ``a`` to ``b`` inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must look like a:b:n, got {text!r}")
    a, b = parse_real(parts[0]), parse_real(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"point count must be an integer, got {parts[2]!r}") from None
    if count < 1:
        raise UsageError("point count must be at least 1")
    if open_band and not (-math.pi < min(a, b) and max(a, b) < 0):
        raise UsageError(f"momentum range {text!r} must lie strictly inside (-pi, 0)")
    return np.linspace(a, b, count)


def parse_ports(text: str) -> tuple[int, int]:
    try:
        m, n = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--ports expects m,n, got {text!r}") from None
    return m, n


SNAP = 1e-14  # printed values below this magnitude are round-off and shown as 0


def fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if abs(x) < SNAP:
        return "0"
    return f"{x:.12g}"


def num(x: float):
    """Round to 12 significant digits for JSON output."""
    x = float(x)
    if not math.isfinite(x):
        return None
    if abs(x) < SNAP:
        return 0.0
    return float(f"{x:.12g}")


def cnum(z: complex):
    return [num(z.real), num(z.imag)]


# -- inputs ---------------------------------------------------------------------

_MODEL_FLAGS = ("phi", "gamma", "kappa", "J")


def _model_overrides(args) -> dict:
    out = {}
    for name in _MODEL_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            out[name] = parse_real(value)
    return out


def load_target(args, extra: dict | None = None):
    """Return ``(network, ports, entry)``; ``entry`` is ``None`` for file input."""
    overrides = {**_model_overrides(args), **(extra or {})}
    if args.network:
        if overrides:
            raise UsageError("model parameters only apply to --model")
        try:
            with open(args.network, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read network file {args.network}: {exc.strerror}") from None
        net = parse_network(text)
        entry = None
        default_ports = tuple(net.lead_ids[:2])
    elif args.model:
        entry = models.get_model(args.model, **overrides)
        net = entry.network
        default_ports = entry.ports
    else:
        raise UsageError("give --network FILE or --model NAME")
    ports = parse_ports(args.ports) if getattr(args, "ports", None) else default_ports
    if len(ports) != 2:
        raise UsageError("network needs at least two leads")
    for p in ports:
        net.lead(p)
    return net, ports, entry


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


# -- scatter / sweep ------------------------------------------------------------

_COEFS = (("tL", "t_l"), ("rL", "r_l"), ("tR", "t_r"), ("rR", "r_r"))


def _ratio(a: float, b: float) -> float:
    if a < 1e-12 and b < 1e-12:
        return 1.0
    if b < 1e-12:
        return math.inf
    return a / b


def _row(net, ports, k, params: dict) -> dict:
    row = {"k": k, **params}
    try:
        c = two_port(net, ports[0], ports[1], k)
        vals = {name: getattr(c, attr) for name, attr in _COEFS}
        divergent = c.divergent
    except SingularMatrix:
        vals = {name: complex(math.nan, math.nan) for name, _ in _COEFS}
        divergent = True
    row["coefs"] = vals
    row["divergent"] = divergent
    row["abs_ratio_t"] = _ratio(abs(vals["tR"]), abs(vals["tL"]))
    row["abs_ratio_r"] = _ratio(abs(vals["rR"]), abs(vals["rL"]))
    return row


def sweep_header(param_names) -> list[str]:
    cols = ["k", *param_names]
    for name, _ in _COEFS:
        cols += [f"re_{name}", f"im_{name}", f"abs2_{name}"]
    return cols + ["abs_ratio_t", "abs_ratio_r", "divergent"]


def _csv_cells(row, param_names) -> list[str]:
    cells = [fmt(row["k"]), *(fmt(row[p]) for p in param_names)]
    for name, _ in _COEFS:
        z = row["coefs"][name]
        cells += [fmt(z.real), fmt(z.imag), fmt(abs(z) ** 2)]
    return cells + [fmt(row["abs_ratio_t"]), fmt(row["abs_ratio_r"]), str(int(row["divergent"]))]


def _json_row(row, param_names) -> dict:
    out = {"k": num(row["k"]), **{p: num(row[p]) for p in param_names}}
    out.update({name: cnum(row["coefs"][name]) for name, _ in _COEFS})
    out["divergent"] = bool(row["divergent"])
    return out


def _rows_to_csv(rows, param_names) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(sweep_header(param_names))
    for row in rows:
        w.writerow(_csv_cells(row, param_names))
    return buf.getvalue()


def cmd_scatter(args) -> int:
    net, ports, _ = load_target(args)
    k = check_momentum(parse_real(args.k))
    row = _row(net, ports, k, {})
    if args.format == "csv":
        _emit(args, _rows_to_csv([row], []))
    else:
        out = _json_row(row, [])
        out["ports"] = list(ports)
        _emit(args, _dump(out))
    return EXIT_DIVERGENT if row["divergent"] else EXIT_OK


def _param_axes(specs) -> list[tuple[str, np.ndarray]]:
    axes = []
    for spec in specs or []:
        if "=" not in spec:
            raise UsageError(f"--param expects name=a:b:n, got {spec!r}")
        name, rng = spec.split("=", 1)
        axes.append((name.strip(), parse_range(rng)))
    names = [a for a, _ in axes]
    if len(set(names)) != len(names):
        raise UsageError("a parameter is swept twice")
    return axes


def cmd_sweep(args) -> int:
    if args.k is not None and args.k_range is not None:
        raise UsageError("give either --k or --k-range")
    if args.k_range is not None:
        ks = parse_range(args.k_range, open_band=True)
    elif args.k is not None:
        ks = np.array([check_momentum(parse_real(args.k))])
    else:
        ks = open_k_grid(50)
    axes = _param_axes(args.param)
    if axes and not args.model:
        raise UsageError("--param sweeps need --model")
    names = [a for a, _ in axes]
    rows = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        params = dict(zip(names, (float(v) for v in combo)))
        net, ports, _ = load_target(args, params)
        for k in ks:
            rows.append(_row(net, ports, float(k), params))
    if args.format == "json":
        _emit(args, _dump([_json_row(r, names) for r in rows]))
    else:
        _emit(args, _rows_to_csv(rows, names))
    return EXIT_OK


def cmd_smatrix(args) -> int:
    net, _, _ = load_target(args)
    k = check_momentum(parse_real(args.k))
    sm = s_matrix(net, k)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["out", "in", "re", "im", "abs2"])
        for i, po in enumerate(sm.ports):
            for j, pi in enumerate(sm.ports):
                z = sm.s[i, j]
                w.writerow([po, pi, fmt(z.real), fmt(z.imag), fmt(abs(z) ** 2)])
        _emit(args, buf.getvalue())
    else:
        _emit(
            args,
            _dump(
                {
                    "k": num(k),
                    "ports": list(sm.ports),
                    "s": [[cnum(z) for z in row] for row in sm.s],
                    "divergent": bool(sm.divergent),
                }
            ),
        )
    return EXIT_DIVERGENT if sm.divergent else EXIT_OK


# -- symmetry ---------------------------------------------------------------------


def _load_spec(path: str) -> symmetry.SymmetrySpec:
    try:
        with open(path, encoding="utf-8") as fh:
            return symmetry.parse_symmetry(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read symmetry file {path}: {exc.strerror}") from None


def _mapping_json(mp: symmetry.MappingClass) -> dict:
    return {"variant": mp.variant, "alpha": None if mp.alpha is None else num(mp.alpha)}


def _spec_json(spec, mapping, prediction) -> dict:
    return {
        "kind": spec.kind,
        "parity": spec.parity,
        "u": [[cnum(z) for z in row] for row in spec.u],
        "mapping": _mapping_json(mapping),
        "prediction": prediction.describe(),
    }


def _center(net, ports, k_text):
    """Bare center for two leads; otherwise the effective one at ``k``."""
    if k_text is None and len(net.leads) == 2:
        return net.hc, None
    k = check_momentum(parse_real(k_text)) if k_text is not None else GENERIC_K
    return effective_two_port(net, ports[0], ports[1], k), k


def cmd_symmetry(args) -> int:
    net, ports, entry = load_target(args)
    sm, sn = net.lead(ports[0]).site, net.lead(ports[1]).site
    tol = args.tol
    if args.action == "check":
        if not args.spec:
            raise UsageError("symmetry check needs --spec FILE")
        h, k = _center(net, ports, args.k)
        results, ok = [], True
        for path in args.spec:
            spec = _load_spec(path)
            res = symmetry.verify(h, spec)
            mapping = symmetry.classify_mapping(spec.u, sm, sn)
            passed = res <= (tol if tol is not None else symmetry.VERIFY_TOL)
            ok &= passed
            item = _spec_json(spec, mapping, symmetry.predict(spec, mapping))
            item.update({"residual": num(res), "pass": passed})
            results.append(item)
        _emit(args, _dump({"ports": list(ports), "k": None if k is None else num(k), "results": results, "pass": ok}))
        return EXIT_OK if ok else EXIT_VIOLATION

    if args.action == "detect":
        h, k = _center(net, ports, args.k)
        found = symmetry.detect(h, sm, sn, tol if tol is not None else symmetry.VERIFY_TOL)
        _emit(
            args,
            _dump(
                {
                    "ports": list(ports),
                    "k": None if k is None else num(k),
                    "symmetries": [_spec_json(d.spec, d.mapping, d.prediction) for d in found],
                    "protecting_classes": sorted(symmetry.protecting_classes(found)),
                }
            ),
        )
        return EXIT_OK

    # validate
    if args.k_range is not None:
        ks = parse_range(args.k_range, open_band=True)
    else:
        ks = open_k_grid(args.points)
    if args.spec:
        specs = [_load_spec(p) for p in args.spec]
    elif entry is not None:
        specs = entry.specs
    else:
        h, _ = _center(net, ports, None)
        specs = [d.spec for d in symmetry.detect(h, sm, sn)]
    try:
        rep = symmetry.validate_sweep(net, ports[0], ports[1], specs, ks, tol=tol or symmetry.CONSTRAINT_TOL)
    except SymmetryNotSatisfied as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    out = {
        "ports": list(ports),
        "points": len(ks),
        "evaluated": rep.evaluated,
        "skipped_divergent": [num(k) for k in rep.skipped],
        "results": [
            {
                **_spec_json(r.spec, r.mapping, r.prediction),
                "max_violation": {key: num(v) for key, v in r.max_violation.items()},
                "pass": all(v <= rep.tol for v in r.max_violation.values()),
            }
            for r in rep.results
        ],
        "witnessed_asymmetry": {"t": num(rep.max_t_asymmetry), "r": num(rep.max_r_asymmetry)},
        "pass": rep.passed,
    }
    if all(r.prediction.is_empty for r in rep.results):
        out["note"] = "no constraint predicted; pass is vacuous"
    _emit(args, _dump(out))
    return EXIT_OK if rep.passed else EXIT_VIOLATION


# -- simulate ---------------------------------------------------------------------


def cmd_simulate(args) -> int:
    net, ports, _ = load_target(args)
    if args.lead is not None:
        lead = args.lead
        net.lead(lead)
    else:
        lead = ports[0] if args.direction == "forward" else ports[1]
    k0 = check_momentum(parse_real(args.k)) if args.k is not None else -math.pi / 2
    sigma = args.sigma
    s0 = args.s0 if args.s0 is not None else 5 * sigma
    length = args.length if args.length is not None else max(400, int(math.ceil(s0 + 15 * sigma)))
    params = dynamics.SimParams(length=length, dt=args.dt, snapshot_every=args.snapshot_every)
    packet = dynamics.PacketSpec(lead, k0, s0, sigma)
    cmp = dynamics.compare_with_steady_state(net, packet, params)
    out = cmp.as_dict()
    out.update({"k0": num(k0), "sigma": num(sigma), "s0": num(s0), "length": length, "dt": num(args.dt)})
    out["deviation"] = num(cmp.deviation)
    if cmp.informational:
        out["note"] = "sigma < 20: momentum spread widens the deviation; result is informational"
    if args.snapshots:
        with open(args.snapshots, "w", encoding="utf-8", newline="") as fh:
            fh.write(dynamics.snapshots_csv(cmp.result.snapshots, cmp.result.layout))
    _emit(args, _dump(out))
    return EXIT_OK if cmp.passed or cmp.informational else EXIT_VIOLATION


# -- models -------------------------------------------------------------------------


def cmd_model(args) -> int:
    if args.action == "list":
        items = [
            {"name": m.name, "description": m.description, "defaults": {k: num(v) for k, v in m.defaults.items()}}
            for m in models.MODELS.values()
        ]
        _emit(args, _dump(items))
        return EXIT_OK
    if not args.name:
        raise UsageError("model emit needs a model name")
    entry = models.get_model(args.name, **_model_overrides(args))
    _emit(args, serialize_network(entry.network))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

_VALUE_FLAGS = {"--k", "--k-range", "--param", "--phi", "--gamma", "--kappa", "--J", "--ports"}


def _glue_negative_values(argv):
    """Turn ``--k -pi/2`` into ``--k=-pi/2`` so argparse does not read a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _add_target(p, *, ports=True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--network", metavar="FILE", help="network file")
    src.add_argument("--model", metavar="NAME", help="catalog model name")
    for name in _MODEL_FLAGS:
        p.add_argument(f"--{name}", metavar="X", help=f"model parameter {name} (radians accept pi-literals)")
    if ports:
        p.add_argument("--ports", metavar="M,N", help="lead ids of the two ports")
    p.add_argument("--out", metavar="FILE", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symscatter", description="Scattering through non-Hermitian tight-binding centers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="coefficients at one momentum")
    _add_target(p)
    p.add_argument("--k", required=True, help="momentum in (-pi, 0)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("sweep", help="coefficients over a momentum grid and model parameters")
    _add_target(p)
    p.add_argument("--k", help="single momentum")
    p.add_argument("--k-range", dest="k_range", metavar="A:B:N")
    p.add_argument("--param", action="append", metavar="NAME=A:B:N", help="sweep a model parameter (repeatable)")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("smatrix", help="full S-matrix over every lead")
    _add_target(p, ports=False)
    p.add_argument("--k", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_smatrix)

    p = sub.add_parser("symmetry", help="check, detect or validate symmetries")
    p.add_argument("action", choices=("check", "detect", "validate"))
    _add_target(p)
    p.add_argument("--spec", action="append", metavar="FILE", help="symmetry file (repeatable)")
    p.add_argument("--k", help="momentum for the effective center (check/detect)")
    p.add_argument("--k-range", dest="k_range", metavar="A:B:N", help="grid for validate")
    p.add_argument("--points", type=int, default=50, help="grid size for validate without --k-range")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("simulate", help="wave-packet simulation against steady-state coefficients")
    _add_target(p)
    p.add_argument("--direction", choices=("forward", "backward"), default="forward")
    p.add_argument("--lead", type=int, help="incident lead id (overrides --direction)")
    p.add_argument("--k", help="carrier momentum (default -pi/2)")
    p.add_argument("--sigma", type=float, default=20.0)
    p.add_argument("--s0", type=float)
    p.add_argument("--length", type=int)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--snapshots", metavar="FILE", help="CSV of the lattice state over time")
    p.add_argument("--snapshot-every", dest="snapshot_every", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="accepted for interface uniformity; simulations are deterministic")
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("model", help="list or emit catalog models")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?")
    for name in _MODEL_FLAGS:
        p.add_argument(f"--{name}", metavar="X")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_model)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(argv))
    if getattr(args, "snapshots", None) and not getattr(args, "snapshot_every", None):
        args.snapshot_every = 10.0
    try:
        return args.func(args)
    except (UsageError, PacketDoesNotFit, PacketNotCleared) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Instability as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except (ValidationError, ScatterError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
