"""CSV and report file formats.

Spectra: header ``omega_ueV,value``; channel tables:
``omega_ueV,h,v,d,a``; design tables:
``kappa,max_phase_rad,argmax_ueV,refl_on_res,feasible``. All files are
UTF-8 with LF line endings, floats written as shortest round-trip
decimals, and writes are atomic (temp file then rename).
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .interferometer import ChannelRecord
from .scattering import Spectrum

__all__ = [
    "FileFormatError",
    "atomic_write_text",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "write_channels_csv",
    "read_channels_csv",
    "write_design_csv",
    "read_design_csv",
    "write_manifest_csv",
    "read_manifest_csv",
    "write_report",
    "read_report",
]

SPECTRUM_HEADER = "omega_ueV,value"
CHANNELS_HEADER = "omega_ueV,h,v,d,a"
DESIGN_HEADER = "kappa,max_phase_rad,argmax_ueV,refl_on_res,feasible"
MANIFEST_HEADER = "temperature_K,filename"


class FileFormatError(ValueError):
    """Malformed input file."""


def _fmt(x) -> str:
    return repr(float(x))


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_spectrum_csv(path, spectrum: Spectrum):
    lines = [SPECTRUM_HEADER]
    values = np.asarray(spectrum.values, dtype=float)
    lines.extend(f"{_fmt(w)},{_fmt(v)}" for w, v in zip(spectrum.omega, values))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_rows(path, header, n_fields):
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != header:
            raise FileFormatError(f"{path}: expected header {header!r}, got {first!r}")
        rows = []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_fields:
                raise FileFormatError(f"{path}:{lineno}: expected {n_fields} fields")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return np.array(rows)


def read_spectrum_csv(path) -> Spectrum:
    rows = _read_rows(path, SPECTRUM_HEADER, 2)
    return Spectrum(rows[:, 0], rows[:, 1])


def write_channels_csv(path, rec: ChannelRecord):
    omega = np.atleast_1d(np.asarray(rec.omega, dtype=float))
    cols = [np.atleast_1d(np.asarray(getattr(rec, n), dtype=float)) for n in ("h", "v", "d", "a")]
    if any(c.size != omega.size for c in cols):
        raise ValueError("channel columns must match the omega grid length")
    lines = [CHANNELS_HEADER]
    lines.extend(
        ",".join(_fmt(x) for x in row) for row in zip(omega, *cols)
    )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_channels_csv(path) -> ChannelRecord:
    rows = _read_rows(path, CHANNELS_HEADER, 5)
    return ChannelRecord(
        omega=rows[:, 0], h=rows[:, 1], v=rows[:, 2], d=rows[:, 3], a=rows[:, 4]
    )


def write_design_csv(path, points):
    lines = [DESIGN_HEADER]
    for pt in points:
        lines.append(
            ",".join(
                [
                    _fmt(pt.params.kappa_top),
                    _fmt(pt.max_conditional_phase),
                    _fmt(pt.argmax_omega),
                    _fmt(pt.on_resonance_reflectivity),
                    "true" if pt.feasible else "false",
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_design_csv(path):
    """Design-table rows as dicts (kappa, max_phase_rad, argmax_ueV,
    refl_on_res, feasible)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != DESIGN_HEADER:
            raise FileFormatError(f"{path}: expected header {DESIGN_HEADER!r}")
        rows = []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5 or parts[4] not in ("true", "false"):
                raise FileFormatError(f"{path}:{lineno}: malformed design row")
            try:
                rows.append(
                    {
                        "kappa": float(parts[0]),
                        "max_phase_rad": float(parts[1]),
                        "argmax_ueV": float(parts[2]),
                        "refl_on_res": float(parts[3]),
                        "feasible": parts[4] == "true",
                    }
                )
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return rows


def write_manifest_csv(path, entries):
    """``entries``: iterable of (temperature, filename)."""
    lines = [MANIFEST_HEADER]
    lines.extend(f"{_fmt(t)},{name}" for t, name in entries)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != MANIFEST_HEADER:
            raise FileFormatError(f"{path}: expected header {MANIFEST_HEADER!r}")
        entries = []
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            t, name = line.split(",", 1)
            entries.append((float(t), name))
    return entries


def write_report(path, values: dict):
    """Flat ``key = value`` report, floats as shortest round-trip decimals."""
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = _fmt(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_report(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or "=" not in line:
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out
