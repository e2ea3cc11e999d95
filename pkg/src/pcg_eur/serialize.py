"""File formats: scheme JSON, wavefunction CSV, probability CSVs and report tables.

Wavefunction CSV layout::

    # {"format": "pcg-eur-wavefunction/1", "N": 128, "dq": 0.2215..., "theta": 0.0}
    q,re,im
    -14.07...,1.2e-43,0.0
    ...

Floats are written with ``repr`` so a dump/load round trip is exact.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .phasespace import Grid, WaveFunction
from .scheme import PcgScheme

WAVEFUNCTION_FORMAT = "pcg-eur-wavefunction/1"


def jsonable(value):
    """Recursively convert numpy scalars/arrays and non-finite floats for ``json``."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def scheme_to_json(scheme: PcgScheme) -> str:
    return dumps(scheme.to_dict())


def scheme_from_json(text: str) -> PcgScheme:
    return PcgScheme.from_dict(json.loads(text))


def dump_wavefunction(psi: WaveFunction, path) -> None:
    header = {"format": WAVEFUNCTION_FORMAT, "N": psi.grid.N, "dq": psi.grid.dq, "theta": psi.theta}
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(header) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "re", "im"])
        for q, a in zip(psi.grid.q, psi.psi):
            w.writerow([repr(float(q)), repr(float(a.real)), repr(float(a.imag))])


def load_wavefunction(path) -> WaveFunction:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ParameterError("missing JSON header line")
        header = json.loads(first[2:])
        if header.get("format") != WAVEFUNCTION_FORMAT:
            raise ParameterError(f"unknown wavefunction format {header.get('format')!r}")
        rows = list(csv.DictReader(fh))
    grid = Grid(int(header["N"]), float(header["dq"]))
    psi = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return WaveFunction(grid, psi, float(header["theta"]))


def fmt(value) -> str:
    """Table cell: floats to 12 significant digits, everything else via ``str``."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def table_csv(rows, columns=None) -> str:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def probability_csv(p) -> str:
    return table_csv([{"k": k, "p": float(v)} for k, v in enumerate(p)], ["k", "p"])


def joint_csv(joint) -> str:
    joint = np.asarray(joint)
    rows = [{"k": k, "l": l, "p": float(joint[k, l])} for k in range(joint.shape[0]) for l in range(joint.shape[1])]
    return table_csv(rows, ["k", "l", "p"])


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
