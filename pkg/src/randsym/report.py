"""Record types, CSV/JSONL rendering and run manifests.

Every record is a flat dataclass. Exact rationals render as ``"p/q"``; reals
get six significant digits in CSV and full precision in JSONL, so JSONL files
round-trip exactly and CSV files round-trip up to that rounding.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import typing
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .chain import ChainTrace, IncrementRow, LawRow, SurveyRow, XRow
from .concentration import ConcentrationReport
from .structure import BadRow, Circuit, StructuralClass

SCHEMA_VERSION = 1
FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class ChainStepRecord:
    chain: int
    seed: int
    n: int
    rank: int
    increment: int | None
    cls: str | None
    x_value: float
    exact_confirmed: bool


@dataclass(frozen=True)
class ClassifyRecord:
    trial: int
    seed: int
    n: int
    N: int
    rank: int
    cls: str
    witness: str


@dataclass(frozen=True)
class ConcentrationRow:
    form: str
    n: int
    interval: str
    probability: Fraction
    stderr: float | None
    bound: float | None
    method: str
    hypothesis_met: bool


@dataclass(frozen=True)
class DecouplingRow:
    bits: str
    k: int
    events: int
    holds: int
    all_hold: bool


@dataclass(frozen=True)
class OracleRow:
    n: int
    dist: str
    matrices: int
    singular: int
    p_exact: Fraction


RECORD_TYPES: dict[str, type] = {t.__name__: t for t in (
    SurveyRow, IncrementRow, LawRow, XRow, ChainStepRecord, ClassifyRecord,
    ConcentrationRow, DecouplingRow, OracleRow)}


def witness_text(cls: StructuralClass) -> str:
    w = cls.witness
    if isinstance(w, Circuit):
        return "rows=" + ",".join(map(str, w.rows)) + ";coeffs=" + ",".join(map(str, w.coefficients))
    if isinstance(w, BadRow):
        return f"row={w.row};support={w.support}"
    return ""


def chain_records(traces: Sequence[ChainTrace]) -> list[ChainStepRecord]:
    out = []
    for i, tr in enumerate(traces):
        for s in tr.steps:
            out.append(ChainStepRecord(i, tr.seed, s.n, s.rank, s.increment,
                                       None if s.cls is None else s.cls.tag.value,
                                       s.x_value, s.certificate.exact_confirmed))
    return out


def concentration_row(r: ConcentrationReport) -> ConcentrationRow:
    return ConcentrationRow(r.form, r.n, str(r.interval), Fraction(r.probability), r.stderr,
                            r.bound, r.method.value, r.hypothesis_met)


# ------------------------------------------------------------------ encoding

def _fmt_csv(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _fmt_json(v: Any) -> Any:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _record_type(records: Sequence, kind: type | None) -> type:
    types = {type(r) for r in records}
    if len(types) > 1:
        raise TypeError("cannot render mixed record types: " + ", ".join(sorted(t.__name__ for t in types)))
    if types:
        t = types.pop()
        if kind is not None and t is not kind:
            raise TypeError(f"records are {t.__name__}, not {kind.__name__}")
        kind = t
    if kind is None:
        raise TypeError("an empty record list needs an explicit record type")
    if not dataclasses.is_dataclass(kind):
        raise TypeError(f"{kind.__name__} is not a record type")
    return kind


def columns(kind: type) -> list[str]:
    return [f.name for f in dataclasses.fields(kind)]


def render_table(records: Iterable, fmt: str = "csv", kind: type | None = None) -> str:
    """Render homogeneous records as CSV or JSONL text.

    Column order follows the record's field order. An empty list renders as
    the CSV header alone (``kind`` names the record type) or as empty JSONL.
    Each JSONL line carries a ``schema`` tag ``"<Type>/<version>"``.
    """
    records = list(records)
    kind = _record_type(records, kind)
    cols = columns(kind)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([_fmt_csv(getattr(r, c)) for c in cols])
        return buf.getvalue()
    if fmt == "jsonl":
        schema = f"{kind.__name__}/{SCHEMA_VERSION}"
        lines = []
        for r in records:
            obj = {"schema": schema}
            obj.update((c, _fmt_json(getattr(r, c))) for c in cols)
            lines.append(json.dumps(obj, separators=(",", ":"), allow_nan=False))
        return "".join(line + "\n" for line in lines)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


# ------------------------------------------------------------------ decoding

def _base_types(hint) -> tuple[type, ...]:
    args = typing.get_args(hint)
    if args:
        return tuple(a for a in args if a is not type(None))
    return (hint,)


def _decode(raw: Any, hint, from_csv: bool) -> Any:
    optional = type(None) in typing.get_args(hint)
    if raw is None or (from_csv and raw == "" and optional):
        return None
    base = _base_types(hint)
    if Fraction in base:
        return Fraction(raw)
    if bool in base:
        return raw if isinstance(raw, bool) else raw == "true"
    if float in base and not (int in base and isinstance(raw, int)):
        return float(raw)
    if int in base:
        return int(raw)
    return str(raw)


def parse_table(text: str, fmt: str, kind: type | None = None) -> list:
    """Inverse of :func:`render_table`.

    JSONL lines name their own type; CSV needs ``kind``.
    """
    if fmt == "csv":
        if kind is None:
            raise TypeError("CSV parsing needs the record type")
        hints = typing.get_type_hints(kind)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != columns(kind):
            raise ValueError(f"CSV header does not match {kind.__name__}")
        return [kind(**{c: _decode(v, hints[c], True) for c, v in zip(rows[0], row)}) for row in rows[1:]]
    if fmt == "jsonl":
        out = []
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            name, _, version = obj.pop("schema").partition("/")
            if int(version) != SCHEMA_VERSION:
                raise ValueError(f"unsupported schema version {version}")
            t = RECORD_TYPES[name]
            if kind is not None and t is not kind:
                raise TypeError(f"line holds {name}, expected {kind.__name__}")
            hints = typing.get_type_hints(t)
            out.append(t(**{c: _decode(v, hints[c], False) for c, v in obj.items()}))
        return out
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


# ------------------------------------------------------------------ manifest

@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    wall_time: float
    total_trials: int
    summary: dict

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (set, frozenset, tuple)):
        return list(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")
