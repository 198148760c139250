"""JSON interchange format for monoidal systems.

Layout (version 1)::

    {
      "format": "tlcat-monoidal-system",
      "version": 1,
      "name": "fibonacci",
      "tolerance": 1e-10,
      "meta": {...},
      "labels": [{"id": "1", "name": "1", "is_unit": true}, ...],
      "fusion": [[a, b, c, N], ...],
      "window": [[a, b, c, d], ...],            # optional, truncated systems
      "f_symbols": [[a, b, c, d, e, f, re, im], ...]
    }

F-symbol components are written with 18 significant digits (``%.17e``), so a
save/load cycle is bit exact.  Unknown keys are ignored on load.
"""

from __future__ import annotations

import hashlib
import json
import os

from .monoidal_system import FusionRules, Label, MonoidalSystem, StructureError

FORMAT_NAME = "tlcat-monoidal-system"
FORMAT_VERSION = 1


class FileFormatError(StructureError):
    pass


def _num(x: float) -> str:
    if x == 0:
        return "0.0"
    return "%.17e" % x


def dumps_system(sys: MonoidalSystem) -> str:
    rank = {x: i for i, x in enumerate(sys.ids)}
    key = lambda row: tuple(rank[x] for x in row)
    enc = json.dumps
    lines = ["{"]
    lines.append(f'  "format": {enc(FORMAT_NAME)},')
    lines.append(f'  "version": {FORMAT_VERSION},')
    lines.append(f'  "name": {enc(sys.name)},')
    lines.append(f'  "tolerance": {enc(sys.tolerance)},')
    lines.append(f'  "meta": {enc(sys.meta, sort_keys=True)},')
    labs = [enc({"id": lab.id, "name": lab.name, "is_unit": lab.id == sys.unit}, ensure_ascii=False) for lab in sys.labels]
    lines.append('  "labels": [\n    ' + ",\n    ".join(labs) + "\n  ],")
    fusion = sorted(((a, b, c, n) for (a, b, c), n in sys.rules.items()), key=lambda r: key(r[:3]))
    lines.append('  "fusion": [\n    ' + ",\n    ".join(enc(list(r)) for r in fusion) + "\n  ],")
    if sys.window is not None:
        win = sorted(sys.window, key=key)
        lines.append('  "window": [\n    ' + ",\n    ".join(enc(list(w)) for w in win) + "\n  ],")
    rows = []
    for k in sorted((k for k, _ in sys.f_entries()), key=key):
        v = sys.f_symbol(*k)
        rows.append("[" + ", ".join(enc(x) for x in k) + f", {_num(v.real)}, {_num(v.imag)}]")
    lines.append('  "f_symbols": [\n    ' + ",\n    ".join(rows) + "\n  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def fingerprint(sys: MonoidalSystem) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(dumps_system(sys).encode()).hexdigest()


def _field(doc, name, kind):
    if name not in doc:
        raise FileFormatError(f"missing required field {name!r}")
    if not isinstance(doc[name], kind):
        raise FileFormatError(f"field {name!r} must be a {kind.__name__}")
    return doc[name]


def _label_id(x, where):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise FileFormatError(f"{where}: label ids must be strings or integers, got {x!r}")
    return x


def loads_system(text: str, source: str = "<string>") -> MonoidalSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise FileFormatError(f"{source}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(doc, dict):
        raise FileFormatError(f"{source}: top level must be an object")
    version = doc.get("version", FORMAT_VERSION)
    if not isinstance(version, int) or version > FORMAT_VERSION:
        raise FileFormatError(f"{source}: unsupported format version {version!r}")

    labels, unit = [], None
    for n, entry in enumerate(_field(doc, "labels", list)):
        where = f"labels[{n}]"
        if not isinstance(entry, dict) or "id" not in entry:
            raise FileFormatError(f"{where}: expected an object with an 'id'")
        lid = _label_id(entry["id"], where)
        labels.append(Label(lid, str(entry.get("name", lid))))
        if entry.get("is_unit", False):
            if unit is not None:
                raise FileFormatError(f"{where}: more than one label flagged as unit")
            unit = lid
    if unit is None:
        raise FileFormatError(f"{source}: no label is flagged as the unit (is_unit)")

    table = {}
    for n, row in enumerate(_field(doc, "fusion", list)):
        if not isinstance(row, list) or len(row) != 4:
            raise FileFormatError(f"fusion[{n}]: expected [a, b, c, N]")
        a, b, c = (_label_id(x, f"fusion[{n}]") for x in row[:3])
        if not isinstance(row[3], int) or isinstance(row[3], bool):
            raise FileFormatError(f"fusion[{n}]: multiplicity must be an integer")
        table[(a, b, c)] = row[3]

    fs = {}
    for n, row in enumerate(_field(doc, "f_symbols", list)):
        if not isinstance(row, list) or len(row) != 8:
            raise FileFormatError(f"f_symbols[{n}]: expected [a, b, c, d, e, f, re, im]")
        key = tuple(_label_id(x, f"f_symbols[{n}]") for x in row[:6])
        re, im = row[6:]
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
            raise FileFormatError(f"f_symbols[{n}]: re/im must be numbers")
        fs[key] = complex(re, im)

    window = None
    if "window" in doc:
        window = set()
        for n, row in enumerate(_field(doc, "window", list)):
            if not isinstance(row, list) or len(row) != 4:
                raise FileFormatError(f"window[{n}]: expected [a, b, c, d]")
            window.add(tuple(_label_id(x, f"window[{n}]") for x in row))

    tol = doc.get("tolerance", 1e-10)
    meta = doc.get("meta", {}) if isinstance(doc.get("meta", {}), dict) else {}
    try:
        return MonoidalSystem(labels, unit, FusionRules(table), fs, tolerance=tol, window=window,
                              name=str(doc.get("name", "")), meta=meta)
    except StructureError as err:
        raise FileFormatError(f"{source}: {err}") from None


def save_system(sys: MonoidalSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_system(sys))


def load_system(path) -> MonoidalSystem:
    if not os.path.exists(path):
        raise FileFormatError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read(), source=str(path))
