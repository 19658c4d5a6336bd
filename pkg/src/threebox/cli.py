"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boxbasis import enumerate_states, max_mode
from .d3d import IRREPS, SymmetryError, build_salcs
from .matelem import BasisError, OneBodyIntegralTable
from .solver import ConvergenceError, build_block

log = logging.getLogger("threebox")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
PT_RTOL = 1e-10
ORACLE_ATOL = 1e-8
QUAD_ATOL = 1e-12


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, lowercase exponent; ``nan`` for undefined entries."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclasses.dataclass
class RunConfig:
    cutoff: int = 27
    lmin: float = 1e-3
    lmax: float = 1e3
    points: int = 60
    spacing: str = "geometric"
    irreps: tuple[str, ...] = IRREPS
    out: str = "."
    levels: int = 10

    def validate(self) -> "RunConfig":
        if self.cutoff < 3:
            raise UsageError("cutoff must be >= 3")
        if self.lmin < 0:
            raise UsageError("lmin must be >= 0")
        if self.lmax < self.lmin:
            raise UsageError("lmax must be >= lmin")
        if self.points < 1:
            raise UsageError("points must be >= 1")
        if self.spacing not in ("linear", "geometric"):
            raise UsageError("spacing must be 'linear' or 'geometric'")
        if self.spacing == "geometric" and self.lmin <= 0:
            raise UsageError("geometric spacing requires lmin > 0")
        if self.points > 1 and self.lmax == self.lmin:
            raise UsageError("lmax must exceed lmin when points > 1")
        bad = [s for s in self.irreps if s not in IRREPS]
        if bad:
            raise UsageError(f"unknown irreps: {', '.join(bad)}")
        if self.levels < 1:
            raise UsageError("levels must be >= 1")
        return self

    def grid(self) -> np.ndarray:
        from .sweep import geometric_grid, linear_grid

        make = geometric_grid if self.spacing == "geometric" else linear_grid
        return make(self.lmin, self.lmax, self.points)


def _layered(args, defaults: dict, fields) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        unknown = set(data) - set(fields)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(data)
    for name in fields:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    return merged


def _run_config(args, **overrides) -> RunConfig:
    defaults = {f.name: f.default for f in dataclasses.fields(RunConfig)}
    defaults.update(overrides)
    merged = _layered(args, defaults, defaults.keys())
    merged["irreps"] = tuple(merged["irreps"])
    try:
        return RunConfig(**merged).validate()
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


# --- subcommands ---------------------------------------------------------

def cmd_spectrum(args) -> int:
    from .sweep import detect_avoided_crossings, sweep

    cfg = _run_config(args)
    lams = cfg.grid()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    curve = sweep(lams, cfg.cutoff, irreps=cfg.irreps, n_levels=cfg.levels)

    files = []
    for s in cfg.irreps:
        e = curve.energies[s]
        k = e.shape[1]
        header = ["lambda"] + [f"E_{i}" for i in range(1, k + 1)] + [f"scaled_{i}" for i in range(1, k + 1)]
        rows = []
        for lam, row in zip(lams, e):
            scaled = row / math.sqrt(lam) if lam > 0 else np.full(k, np.nan)
            rows.append([fmt(lam)] + [fmt(v) for v in row] + [fmt(v) for v in scaled])
        name = f"spectrum_{s}.csv"
        _write_csv(out / name, header, rows)
        files.append(name)

    crossings = []
    for s in cfg.irreps:
        crossings.extend(c.as_dict() for c in detect_avoided_crossings(curve, s))
    summary = {
        "version": __version__,
        "cutoff": cfg.cutoff,
        "grid": {"lmin": cfg.lmin, "lmax": cfg.lmax, "points": cfg.points, "spacing": cfg.spacing},
        "irreps": list(cfg.irreps),
        "levels": cfg.levels,
        "block_sizes": {s: build_block(cfg.cutoff, s).size for s in cfg.irreps},
        "files": files,
        "avoided_crossings": crossings,
        "flagged_steps": [{"irrep": s, "step": i} for s, i in curve.flagged],
    }
    (out / "summary.json").write_text(dump_json(summary), encoding="utf-8")
    print(f"wrote {len(files)} curve files and summary.json to {out}")
    return EXIT_OK


def cmd_pt(args) -> int:
    from .perturb import compare_to_closed_forms

    cfg = _run_config(args, cutoff=14)
    table = None
    if args.perturb_integrals:
        base = OneBodyIntegralTable.build(max_mode(cfg.cutoff))
        p2 = base.p2 * (1.0 + args.perturb_integrals)
        table = OneBodyIntegralTable(nmax=base.nmax, p1=base.p1, p2=p2)
    rows = compare_to_closed_forms(cfg.cutoff, table)
    ok = all(r.passed(PT_RTOL) for r in rows)
    if args.format == "json":
        data = {"rtol": PT_RTOL, "passed": ok, "rows": [
            {"level": r.level, "E0": r.e0, "computed": r.computed, "closed_form": r.closed_form,
             "rel_error": r.rel_error, "passed": r.passed(PT_RTOL)} for r in rows]}
        sys.stdout.write(dump_json(data))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["level", "E0", "computed", "closed_form", "rel_error", "passed"])
        for r in rows:
            writer.writerow([r.level, fmt(r.e0), fmt(r.computed), fmt(r.closed_form),
                             fmt(r.rel_error), str(r.passed(PT_RTOL)).lower()])
    return EXIT_OK if ok else EXIT_NUMERICAL


def salc_record(s) -> dict:
    return {
        "irrep": s.irrep,
        "row": s.row,
        "copy": s.copy,
        "energy_sum": s.energy_sum,
        "multiplet": list(s.key),
        "coefficients": [{"triple": list(t.as_tuple()), "c": c} for t, c in s.coefficients.items()],
    }


def cmd_basis(args) -> int:
    cfg = _run_config(args, cutoff=14)
    records = []
    for m in enumerate_states(cfg.cutoff):
        records.extend(salc_record(s) for s in build_salcs(m) if s.irrep in cfg.irreps)
    sys.stdout.write(dump_json({"cutoff": cfg.cutoff, "salcs": records}))
    return EXIT_OK


def cmd_dump_block(args) -> int:
    cfg = _run_config(args, cutoff=14)
    if args.irrep not in IRREPS:
        raise UsageError(f"unknown irrep {args.irrep!r}")
    if args.row not in (0, 1) or (args.row == 1 and not args.irrep.startswith("E")):
        raise UsageError(f"{args.irrep} has no row {args.row}")
    block = build_block(cfg.cutoff, args.irrep, args.row)
    data = {
        "irrep": block.irrep,
        "row": block.row,
        "cutoff": cfg.cutoff,
        "basis": [s.label() for s in block.basis],
        "energy_sums": [int(e) for e in block.energy_sums],
        "h0": [float(x) for x in block.h0],
        "w": [[float(x) for x in r] for r in block.w],
    }
    text = dump_json(data)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_oracle_suite(cutoffs=(14, 27), lams=(0.0, 0.1, 1.0, 10.0), quad_nmax=50,
                     quadrature_only=False, spectra_only=False) -> dict:
    """Oracle checks as a JSON-ready report."""
    from .oracle import degeneracy_census, full_spectrum, quadrature_table
    from .solver import spectrum_at

    checks = []
    if not spectra_only:
        q = quadrature_table(quad_nmax)
        c = OneBodyIntegralTable.build(quad_nmax)
        dev = float(max(np.abs(q.p1 - c.p1).max(), np.abs(q.p2 - c.p2).max()))
        checks.append({"check": "integrals", "nmax": quad_nmax, "max_abs_dev": dev, "tol": QUAD_ATOL,
                       "passed": dev < QUAD_ATOL})
    if not quadrature_only:
        for cutoff in cutoffs:
            census = degeneracy_census(cutoff)
            ok = all(a == b for a, b in census.values())
            checks.append({"check": "census", "cutoff": cutoff, "passed": ok})
            for lam in lams:
                full = full_spectrum(lam, cutoff).eigenvalues
                blocks = spectrum_at(lam, cutoff).merged()
                dev = float(np.abs(full - blocks).max()) if len(full) == len(blocks) else math.inf
                checks.append({"check": "spectrum", "cutoff": cutoff, "lambda": lam, "dimension": len(full),
                               "max_abs_dev": dev, "tol": ORACLE_ATOL, "passed": dev <= ORACLE_ATOL})
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def cmd_verify(args) -> int:
    cutoffs = (args.cutoff,) if args.cutoff is not None else (14, 27)
    if any(c < 3 for c in cutoffs):
        raise UsageError("cutoff must be >= 3")
    lams = (args.lam,) if args.lam is not None else (0.0, 0.1, 1.0, 10.0)
    if any(lam < 0 for lam in lams):
        raise UsageError("lambda must be >= 0")
    single_point = args.cutoff is not None and args.lam is not None
    report = run_oracle_suite(cutoffs, lams, args.quad_nmax, quadrature_only=args.quadrature_only,
                              spectra_only=single_point)
    sys.stdout.write(dump_json(report))
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


def cmd_asymptote(args) -> int:
    from .oracle import separable_harmonic_reference
    from .sweep import asymptote_report, scaled_curves, sweep

    cfg = _run_config(args, cutoff=600, lmin=10.0, lmax=1000.0, points=20, levels=1)
    curve = sweep(cfg.grid(), cfg.cutoff, n_levels=cfg.levels)
    lams, scaled = scaled_curves(curve)
    monotone = {s: bool((np.diff(v[:, 0]) <= 0).all()) for s, v in scaled.items()}
    report = {
        "version": __version__,
        "cutoff": cfg.cutoff,
        "grid": {"lmin": cfg.lmin, "lmax": cfg.lmax, "points": cfg.points, "spacing": cfg.spacing},
        "targets": asymptote_report(curve),
        "scaled_nonincreasing": monotone,
        "separable_reference": [
            {"n1": n1, "n2": n2, "lambda": float(lams[-1]),
             "scaled": separable_harmonic_reference(float(lams[-1]), n1, n2) / math.sqrt(lams[-1])}
            for n1, n2 in ((0, 0), (1, 0), (3, 0))
        ],
    }
    sys.stdout.write(dump_json(report))
    return EXIT_OK


# --- parser --------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _irrep_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="threebox", description="Three particles in a 1-D box with harmonic pair coupling.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid=False):
        sp.add_argument("--config", help="JSON file of option values; flags take precedence")
        sp.add_argument("--cutoff", type=int, help="largest n1^2+n2^2+n3^2 in the basis")
        sp.add_argument("--irreps", type=_irrep_list, help="comma-separated subset of " + ",".join(IRREPS))
        if grid:
            sp.add_argument("--lmin", type=float)
            sp.add_argument("--lmax", type=float)
            sp.add_argument("--points", type=int)
            sp.add_argument("--spacing", choices=("linear", "geometric"))
            sp.add_argument("--levels", type=int, help="levels per irrep to record")

    sp = sub.add_parser("spectrum", help="sweep the coupling and write per-irrep CSV curves")
    common(sp, grid=True)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("pt", help="first-order slopes against the closed forms")
    common(sp)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--perturb-integrals", type=float, default=0.0, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_pt)

    sp = sub.add_parser("basis", help="print symmetry-adapted combinations as JSON")
    common(sp)
    sp.set_defaults(func=cmd_basis)

    sp = sub.add_parser("dump-block", help="print one Hamiltonian block as JSON")
    common(sp)
    sp.add_argument("--irrep", required=True)
    sp.add_argument("--row", type=int, default=0)
    sp.add_argument("--output", help="write to this file instead of stdout")
    sp.set_defaults(func=cmd_dump_block)

    sp = sub.add_parser("verify", help="run the brute-force oracle checks")
    sp.add_argument("--cutoff", type=int)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--quadrature-only", action="store_true")
    sp.add_argument("--quad-nmax", type=int, default=50)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("asymptote", help="scaled large-coupling values against their limits")
    common(sp, grid=True)
    sp.set_defaults(func=cmd_asymptote)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, SymmetryError, BasisError, NumericalFailure, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        print(f"threebox: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # UsageError, or an argument rejected deeper down
        print(f"threebox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
