"""Command-line front end.

Exit statuses: 0 success (verdict true, data consistent), 2 input error,
3 inconsistency, 4 line selection failure.  Reports are JSON with sorted keys;
apart from ``timing_ms`` they depend only on the input files and flags.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .polytope import (
    DegenerateSectionError,
    Polytope,
    delzant_to_s1data,
    mc_pushforward,
    slice_density,
)
from .pwlinear import PLDensity, is_log_concave
from .rational import format_rational, parse_rational, parse_vector
from .s1orbifold import (
    InconsistentDataError,
    S1FixedPointData,
    build_dh,
    closure_report,
    density_report,
)
from .xray import SelectionFailed, XRay, regularity_check, select_line, split_subtorus

OK, INPUT_ERROR, INCONSISTENT, SELECTION_FAILED = 0, 2, 3, 4

DEFAULT_EPSILON = "1/10"
DEFAULT_SEED = 0
DEFAULT_MAX_ATTEMPTS = 16


class InputError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    status: int = OK
    inputs: dict = field(default_factory=dict)
    density: Optional[PLDensity] = None
    jumps: list = field(default_factory=list)
    verdict: Optional[object] = None
    residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    error: Optional[str] = None
    timing_ms: float = 0.0

    def to_record(self) -> dict:
        return {
            "command": self.command,
            "status": self.status,
            "inputs": self.inputs,
            "density": None if self.density is None else self.density.to_record(),
            "jumps": [j.to_record() for j in self.jumps],
            "verdict": None if self.verdict is None else self.verdict.to_record(),
            "residuals": {k: format_rational(v) for k, v in self.residuals.items()},
            "details": self.details,
            "error": self.error,
            "timing_ms": round(self.timing_ms, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        if path is not None:
            Path(path).write_text(self.to_json())


def _read_json(path, digests: dict):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    digests[str(path)] = hashlib.sha256(raw).hexdigest()
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc


def _parse(fn, *args):
    try:
        return fn(*args)
    except InputError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(str(exc)) from exc


def _parse_direction(text):
    vec = _parse(parse_vector, text)
    if any(v.denominator != 1 for v in vec):
        raise InputError(f"direction {text!r} must have integer coordinates")
    return tuple(int(v) for v in vec)


def _run(command, output_path, body) -> RunReport:
    report = RunReport(command)
    start = time.perf_counter()
    try:
        body(report)
    except InputError as exc:
        report.status, report.error = INPUT_ERROR, str(exc)
    report.timing_ms = (time.perf_counter() - start) * 1000
    report.write(output_path)
    return report


def cmd_s1_build(input_path, output_path=None) -> RunReport:
    """Closure check, DH density and log-concavity verdict for fixed-point data."""

    def body(report):
        record = _read_json(input_path, report.inputs)
        data = _parse(S1FixedPointData.from_record, record)
        closure = closure_report(data)
        report.residuals["closure"] = closure.residual
        report.details["terminal_slope"] = {
            "expected": format_rational(closure.expected_slope),
            "computed": format_rational(closure.computed_slope),
        }
        report.details["critical_levels"] = density_report(data)
        if not closure.consistent:
            report.status = INCONSISTENT
            problems = []
            if closure.residual != 0:
                problems.append(f"closure residual {closure.residual}")
            if not closure.slope_ok:
                problems.append(
                    f"localization closure violated: slope (expected {closure.expected_slope}, "
                    f"computed {closure.computed_slope})"
                )
            report.error = "; ".join(problems)
            return
        try:
            density = build_dh(data)
        except InconsistentDataError as exc:
            report.status, report.error = INCONSISTENT, str(exc)
            return
        verdict = is_log_concave(density)
        report.density, report.jumps, report.verdict = density, list(verdict.jumps), verdict
        report.status = OK if verdict.is_log_concave else INCONSISTENT

    return _run("s1-build", output_path, body)


def cmd_slice(polytope_path, direction, output_path=None, mc=None, hist_csv=None,
              density_csv=None) -> RunReport:
    """Exact slice density of a polygon, optionally checked against Monte Carlo."""

    def body(report):
        X = _parse_direction(direction)
        poly = _parse(Polytope.from_record, _read_json(polytope_path, report.inputs))
        if poly.dimension != 2:
            raise InputError("slice needs a polygon (dimension 2)")
        density = _parse(slice_density, poly, X)
        verdict = is_log_concave(density)
        report.density, report.jumps, report.verdict = density, list(verdict.jumps), verdict
        report.residuals["area_minus_integral"] = poly.area() - density.integral()
        report.details["direction"] = list(X)
        if density_csv is not None:
            Path(density_csv).write_text(density.to_csv())
        if mc is not None:
            samples, bins, seed = mc
            hist = _parse(mc_pushforward, poly, X, samples, bins, seed)
            report.details["monte_carlo"] = {
                "samples": samples, "bins": bins, "seed": seed,
                "sup_distance": hist.sup_distance(density),
                "histogram": hist.to_record(),
            }
            if hist_csv is not None:
                Path(hist_csv).write_text(hist.to_csv())
        report.status = OK if verdict.is_log_concave else INCONSISTENT

    return _run("slice", output_path, body)


def cmd_crossval(polytope_path, direction, output_path=None) -> RunReport:
    """Compare the toric slice with the fixed-point construction of the same density."""

    def body(report):
        X = _parse_direction(direction)
        poly = _parse(Polytope.from_record, _read_json(polytope_path, report.inputs))
        if poly.dimension != 2:
            raise InputError("crossval needs a polygon (dimension 2)")
        toric = _parse(slice_density, poly, X)
        data = _parse(delzant_to_s1data, poly, X)
        orders = [p.order for p in data.interior] + [
            e.order for e in (data.min, data.max) if e.is_isolated
        ]
        smooth = all(d == 1 for d in orders)
        report.details["fixed_point_data"] = data.to_record()
        report.details["smooth"] = smooth
        report.density = toric
        report.verdict = is_log_concave(toric)
        report.jumps = list(report.verdict.jumps)
        try:
            fixed = build_dh(data)
        except InconsistentDataError as exc:
            fixed = None
            report.details["fixed_point_error"] = str(exc)
        equal = fixed is not None and fixed == toric
        report.details["equal"] = equal
        report.details["fixed_point_density"] = None if fixed is None else fixed.to_record()
        report.residuals["closure"] = closure_report(data).residual
        if smooth and not equal:
            report.status = INCONSISTENT
            report.error = "toric and fixed-point densities differ on a smooth polygon"

    return _run("crossval", output_path, body)


def cmd_xray_line(xray_path, x0, x1, epsilon=DEFAULT_EPSILON, seed=DEFAULT_SEED,
                  output_path=None, max_attempts=DEFAULT_MAX_ATTEMPTS) -> RunReport:
    """Transversal rational line through regular values near ``x0`` and ``x1``."""

    def body(report):
        xray = _parse(XRay.from_record, _read_json(xray_path, report.inputs))
        p0, p1 = _parse(parse_vector, x0), _parse(parse_vector, x1)
        eps = _parse(parse_rational, epsilon)
        try:
            selection = select_line(xray, p0, p1, eps, max_attempts, seed)
        except SelectionFailed as exc:
            report.status, report.error = SELECTION_FAILED, str(exc)
            return
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        regular = regularity_check(selection, xray)
        report.details["selection"] = selection.to_record()
        report.details["regularity_check"] = regular
        report.details["epsilon"] = format_rational(eps)
        report.details["seed"] = seed
        if len(selection.direction) >= 2:
            split = split_subtorus(selection.direction)
            report.details["split_subtorus"] = {
                "kernel": list(split.kernel),
                "complement": [list(c) for c in split.complement],
                "determinant": split.determinant,
            }
        if not regular:
            report.status, report.error = INCONSISTENT, "regularity check failed"

    return _run("xray-line", output_path, body)


def _load_density(path) -> PLDensity:
    record = _read_json(path, {})
    if isinstance(record, dict) and "density" in record and "breakpoints" not in record:
        record = record["density"]
    if record is None:
        raise InputError(f"{path}: report carries no density")
    return _parse(PLDensity.from_record, record)


def render_svg(density: PLDensity, width=640, height=400, margin=48) -> str:
    """Polyline over the breakpoints with ticks at each breakpoint.

    The polyline keeps data coordinates; an affine transform maps them to the
    canvas. Floats appear only here.
    """
    t = [float(b) for b in density.breakpoints]
    v = [float(x) for x in density.values]
    t0, t1 = t[0], t[-1]
    vmax = max(v) or 1.0
    sx = (width - 2 * margin) / (t1 - t0)
    sy = (height - 2 * margin) / vmax
    points = " ".join(f"{a!r},{b!r}" for a, b in zip(t, v))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    for b, label in zip(t, density.breakpoints):
        x = margin + (b - t0) * sx
        lines.append(f'<line class="tick" x1="{x:.3f}" y1="{height - margin}" x2="{x:.3f}" '
                     f'y2="{height - margin + 6}" stroke="black"/>')
        lines.append(f'<text x="{x:.3f}" y="{height - margin + 20}" font-size="12" '
                     f'text-anchor="middle">{format_rational(label)}</text>')
    lines.append(
        f'<g transform="translate({margin - t0 * sx!r},{height - margin}) scale({sx!r},{-sy!r})">'
        f'<polyline class="density" points="{points}" fill="none" stroke="steelblue" '
        f'stroke-width="2" vector-effect="non-scaling-stroke"/></g>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_plot(density_path, svg_path) -> RunReport:
    def body(report):
        density = _load_density(density_path)
        Path(svg_path).write_text(render_svg(density))
        report.density = density

    return _run("plot", None, body)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dhmeasure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("s1-build", help="DH density from circle fixed-point data")
    p.add_argument("input")
    p.add_argument("--out")

    p = sub.add_parser("slice", help="exact slice density of a polygon")
    p.add_argument("polytope")
    p.add_argument("direction", help="primitive integer vector, e.g. 1,0")
    p.add_argument("--out")
    p.add_argument("--mc", nargs=3, type=int, metavar=("SAMPLES", "BINS", "SEED"))
    p.add_argument("--hist-csv")
    p.add_argument("--csv", dest="density_csv")

    p = sub.add_parser("crossval", help="toric slice vs fixed-point construction")
    p.add_argument("polytope")
    p.add_argument("direction")
    p.add_argument("--out")

    p = sub.add_parser("xray-line", help="select a transversal rational line")
    p.add_argument("xray")
    p.add_argument("x0", help="point, e.g. 1/2,1/2")
    p.add_argument("x1")
    p.add_argument("--epsilon", default=DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-attempts", type=int, default=DEFAULT_MAX_ATTEMPTS)
    p.add_argument("--out")

    p = sub.add_parser("plot", help="SVG plot of a density")
    p.add_argument("density")
    p.add_argument("svg")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "s1-build":
        report = cmd_s1_build(args.input, args.out)
    elif args.command == "slice":
        report = cmd_slice(args.polytope, args.direction, args.out, args.mc, args.hist_csv,
                           args.density_csv)
    elif args.command == "crossval":
        report = cmd_crossval(args.polytope, args.direction, args.out)
    elif args.command == "xray-line":
        report = cmd_xray_line(args.xray, args.x0, args.x1, args.epsilon, args.seed, args.out,
                               args.max_attempts)
    else:
        report = cmd_plot(args.density, args.svg)
    if args.command != "plot" and getattr(args, "out", None) is None:
        sys.stdout.write(report.to_json())
    if report.error:
        print(f"error: {report.error}", file=sys.stderr)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
