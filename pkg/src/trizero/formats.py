"""Versioned text formats shared by the command-line front end.

Every file starts with the header line ``trizero-format 1``.  Parameter
files carry ``key = value`` lines for ``a`` and ``beta``; polynomial files
carry one (possibly multi-line) expression in the signed-term format of
``poly``; target files carry labeled coefficient lines like
``A[2,0] = 1.0000000000e+00`` grouped by degree.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .errors import ParseError
from .homological import parse_label, w_labels
from .poly import HomoPoly, format_poly_series, parse_poly_series
from .realize import RealizeTarget
from .reduction import NFSeries

__all__ = [
    "FORMAT_HEADER",
    "read_params_file",
    "read_fg_file",
    "write_fg_text",
    "read_target_file",
    "format_target",
    "format_nf_coeffs",
    "trajectory_csv",
    "Report",
    "fmt",
]

FORMAT_HEADER = "trizero-format 1"


def fmt(x: float) -> str:
    """Report numbers with 10 significant digits after the point."""
    return f"{x:.10e}"


def _read_lines(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path=path)
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise ParseError(f"missing header line {FORMAT_HEADER!r}", path=path, line=1)
    return lines


def _content_lines(lines):
    for no, raw in enumerate(lines[1:], start=2):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield no, text


def read_params_file(path) -> tuple[float, float]:
    """Read the oscillator inputs a and beta."""
    lines = _read_lines(path)
    vals = {}
    for no, text in _content_lines(lines):
        if "=" not in text:
            raise ParseError(f"expected 'key = value', got {text!r}", path, no)
        key, _, val = text.partition("=")
        key = key.strip()
        if key not in ("a", "beta"):
            raise ParseError(f"unknown parameter key {key!r}", path, no)
        try:
            vals[key] = float(val.strip())
        except ValueError:
            raise ParseError(f"cannot parse number {val.strip()!r}", path, no)
    for key in ("a", "beta"):
        if key not in vals:
            raise ParseError(f"missing parameter {key!r}", path)
    return vals["a"], vals["beta"]


def read_fg_file(path, max_degree: int) -> dict[int, HomoPoly]:
    """Read one nonlinearity (a bivariate polynomial, degrees 2..max)."""
    lines = _read_lines(path)
    body = " ".join(text for _, text in _content_lines(lines))
    try:
        series = parse_poly_series(body, nvars=2)
    except ParseError as exc:
        raise ParseError(str(exc), path=path)
    for d in series:
        if d < 2:
            raise ParseError(
                f"nonlinearity contains a degree-{d} term; degrees must be >= 2",
                path,
            )
        if d > max_degree:
            raise ParseError(
                f"nonlinearity contains a degree-{d} term beyond order {max_degree}",
                path,
            )
    return series


def write_fg_text(series: dict[int, HomoPoly]) -> str:
    return format_poly_series(series)


def read_target_file(path, max_degree: int) -> RealizeTarget:
    """Read labeled target coefficients; labels validated per degree."""
    lines = _read_lines(path)
    coeffs: dict[int, dict[str, float]] = {}
    for no, text in _content_lines(lines):
        if "=" not in text:
            raise ParseError(f"expected 'LABEL = value', got {text!r}", path, no)
        label, _, val = text.partition("=")
        label = label.strip()
        try:
            fam, j, i = parse_label(label)
        except ValueError as exc:
            raise ParseError(str(exc), path, no)
        if label not in w_labels(j):
            raise ParseError(f"invalid basis label {label!r}", path, no)
        if not 2 <= j <= max_degree:
            raise ParseError(
                f"label {label!r} has degree {j} outside 2..{max_degree}", path, no
            )
        try:
            coeffs.setdefault(j, {})[label] = float(val.strip())
        except ValueError:
            raise ParseError(f"cannot parse number {val.strip()!r}", path, no)
    return RealizeTarget(max_degree=max_degree, coeffs=coeffs)


def format_target(coeffs: dict[int, dict[str, float]]) -> str:
    out = [FORMAT_HEADER]
    for j in sorted(coeffs):
        ordered = sorted(coeffs[j], key=lambda lb: (lb[0], parse_label(lb)[2]))
        for lb in ordered:
            out.append(f"{lb} = {fmt(coeffs[j][lb])}")
    return "\n".join(out) + "\n"


def format_nf_coeffs(nf: NFSeries, include_zero: bool = False) -> list[str]:
    lines = []
    for j in range(2, nf.max_degree + 1):
        table = nf.degree_coeffs(j)
        for lb in w_labels(j):
            val = table.get(lb, 0.0)
            if include_zero or val != 0.0:
                lines.append(f"{lb} = {fmt(val)}")
    return lines


def trajectory_csv(times, states, projections=None) -> str:
    buf = io.StringIO()
    if projections is None:
        buf.write("t,x,y\n")
        for t, (x, y) in zip(times, states):
            buf.write(f"{fmt(t)},{fmt(x)},{fmt(y)}\n")
    else:
        buf.write("t,x,y,u1,u2,u3\n")
        for t, (x, y), u in zip(times, states, projections):
            buf.write(f"{fmt(t)},{fmt(x)},{fmt(y)},{fmt(u[0])},{fmt(u[1])},{fmt(u[2])}\n")
    return buf.getvalue()


@dataclass
class Report:
    """Deterministic structured report with a residual block."""

    title: str
    lines: list[str] = field(default_factory=list)
    residuals: list[tuple[str, float, float]] = field(default_factory=list)

    def add(self, text: str = ""):
        self.lines.append(text)

    def kv(self, key: str, value):
        if isinstance(value, float):
            value = fmt(value)
        self.lines.append(f"{key} = {value}")

    def residual(self, name: str, value: float, bound: float):
        self.residuals.append((name, float(value), float(bound)))

    def passed(self) -> bool:
        return all(v <= b for _, v, b in self.residuals)

    def failing(self) -> list[str]:
        return [n for n, v, b in self.residuals if v > b]

    def render(self) -> str:
        out = [FORMAT_HEADER, f"report {self.title}", ""]
        out.extend(self.lines)
        if self.residuals:
            out.append("")
            out.append("residuals:")
            for name, value, bound in self.residuals:
                status = "PASS" if value <= bound else "FAIL"
                out.append(f"  {name} = {fmt(value)}  bound {fmt(bound)}  {status}")
        out.append("")
        status = "OK" if self.passed() else "RESIDUAL-FAILURE"
        out.append(f"status {status}")
        return "\n".join(out) + "\n"
