"""Plain-text / JSON readers and writers shared with the command line."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .hilbert import FibreVector, Frame, Momentum, PositionCircle, PositionLine, TWO_PI

__all__ = [
    "fmt",
    "frame_header",
    "parse_frame",
    "read_vector",
    "write_vector",
    "vector_to_text",
    "vector_to_json",
    "holonomy_rows",
    "holonomy_csv",
]

HOLONOMY_COLUMNS = ("theta", "phase_re", "phase_im", "expected_re", "expected_im", "abs_error")


class VectorFormatError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, enough to re-parse a double exactly."""
    return format(float(x), ".17g")


def frame_fields(frame: Frame) -> tuple[str, int, float]:
    if isinstance(frame, Momentum):
        return "momentum", frame.nmax, 0.0
    if isinstance(frame, PositionCircle):
        return "position", frame.npoints, frame.alpha
    return f"line-{frame.domain}", frame.npoints, frame.span


def frame_header(frame: Frame) -> str:
    kind, size, extra = frame_fields(frame)
    return f"frame {kind} {size} {fmt(extra)}"


def parse_frame(kind: str, size, extra) -> Frame:
    """Build a frame from ``(kind, N or M, alpha or span)``."""
    try:
        size = int(size)
        extra = float(extra)
    except (TypeError, ValueError):
        raise VectorFormatError(f"bad frame size/parameter: {size!r} {extra!r}") from None
    try:
        if kind == "momentum":
            return Momentum(size)
        if kind == "position":
            return PositionCircle(size, extra)
        if kind in ("line-q", "line-p"):
            return PositionLine(size, extra, kind[-1])
    except ValueError as exc:
        raise VectorFormatError(str(exc)) from None
    raise VectorFormatError(f"unknown frame kind {kind!r}")


def _from_pairs(frame: Frame, pairs) -> FibreVector:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise VectorFormatError("coefficients must be [re, im] pairs")
    if arr.shape[0] != frame.dim:
        raise VectorFormatError(f"{frame!r} needs {frame.dim} coefficients, file has {arr.shape[0]}")
    return FibreVector(frame, arr[:, 0] + 1j * arr[:, 1])


def parse_vector(text: str, frame: Frame | None = None) -> FibreVector:
    """Parse a vector file.

    Text form: ``frame <kind> <N|M> <alpha|span>`` then one ``re im`` pair per
    line.  JSON form: either ``{"frame": {...}, "coeffs": [[re, im], ...]}``
    or a bare array of pairs (the frame must then be supplied).
    """
    stripped = text.strip()
    if not stripped:
        raise VectorFormatError("empty vector file")
    if stripped[0] in "[{":
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise VectorFormatError(f"invalid JSON: {exc}") from None
        if isinstance(data, dict):
            try:
                f = data["frame"]
                frame = parse_frame(f["kind"], f["size"], f.get("alpha", f.get("span", 0.0)))
                pairs = data["coeffs"]
            except (KeyError, TypeError) as exc:
                raise VectorFormatError(f"missing field {exc}") from None
        else:
            if frame is None:
                raise VectorFormatError("bare coefficient arrays need an explicit frame")
            pairs = data
        return _from_pairs(frame, pairs)
    lines = [ln.split() for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    head = lines[0]
    if head and head[0] == "frame":
        head = head[1:]
    if len(head) != 3:
        raise VectorFormatError(f"bad header line: {' '.join(lines[0])!r}")
    frame = parse_frame(*head)
    try:
        pairs = [[float(a), float(b)] for a, b in lines[1:]]
    except ValueError:
        raise VectorFormatError("coefficient lines must hold two numbers") from None
    return _from_pairs(frame, pairs)


def read_vector(path, frame: Frame | None = None) -> FibreVector:
    with open(path) as fh:
        return parse_vector(fh.read(), frame)


def vector_to_text(v: FibreVector) -> str:
    rows = [frame_header(v.frame)]
    rows += [f"{fmt(c.real)} {fmt(c.imag)}" for c in v.coeffs]
    return "\n".join(rows) + "\n"


def vector_to_json(v: FibreVector) -> str:
    kind, size, extra = frame_fields(v.frame)
    key = "span" if kind.startswith("line") else "alpha"
    data = {
        "frame": {"kind": kind, "size": size, key: extra},
        "coeffs": [[c.real, c.imag] for c in v.coeffs.tolist()],
    }
    return json.dumps(data) + "\n"


def write_vector(v: FibreVector, path, fmt_name: str = "text"):
    body = vector_to_json(v) if fmt_name == "json" else vector_to_text(v)
    with open(path, "w") as fh:
        fh.write(body)


def holonomy_rows(phases: np.ndarray) -> list[tuple]:
    """One row per fibre grid point: theta, measured phase, ``exp(i theta)``, error."""
    npoints = phases.shape[0]
    theta = TWO_PI * np.arange(npoints) / npoints
    expected = np.exp(1j * theta)
    err = np.abs(phases - expected)
    return [
        (theta[j], phases[j].real, phases[j].imag, expected[j].real, expected[j].imag, err[j])
        for j in range(npoints)
    ]


def holonomy_csv(phases: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HOLONOMY_COLUMNS)
    for row in holonomy_rows(phases):
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()
