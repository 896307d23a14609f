"""Grid sweeps over the interest parameter and their CSV form.

CSV schema: header ``theta_I,inv_L,inv_M,inv_U,flags``; floats are written
as shortest round-trip decimals, infinity as ``inf``, flags joined by ``;``.
"""
import csv
import io
import math
from dataclasses import dataclass
from typing import List, Tuple

from . import hybrid
from .config import SweepConfig
from .errors import HpqfimError, NumericalError

HEADER = ("theta_I", "inv_L", "inv_M", "inv_U", "flags")
ORDER_TOL = 1e-9


@dataclass(frozen=True)
class SweepRow:
    theta_I: float
    inv_L: float
    inv_M: float
    inv_U: float
    flags: Tuple[str, ...] = ()

    def ordered(self, tol=ORDER_TOL):
        """``inv_U >= inv_M >= inv_L`` (up to ``tol``), with ``inf`` on top."""
        return self.inv_U >= self.inv_M - tol and self.inv_M >= self.inv_L - tol


def sweep_rows(config: SweepConfig) -> List[SweepRow]:
    rows = []
    for x in config.grid_values():
        theta = config.interest_at(float(x))
        try:
            report = hybrid.bound_report(config.model, config.prior, theta, config.rule, config.weight)
        except HpqfimError as exc:
            raise NumericalError(f"theta_I = {float(x)!r}: {exc}", float(x)) from exc
        row = SweepRow(float(x), *report.traced(), report.flags)
        if not row.ordered():
            raise NumericalError(f"theta_I = {row.theta_I!r}: inverse forms out of order "
                                 f"(L={row.inv_L!r}, M={row.inv_M!r}, U={row.inv_U!r})", row.theta_I)
        rows.append(row)
    return rows


def fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def parse_float(text: str) -> float:
    return float(text)


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in rows:
        writer.writerow([fmt(r.theta_I), fmt(r.inv_L), fmt(r.inv_M), fmt(r.inv_U), ";".join(r.flags)])
    return buf.getvalue()


def parse_csv(text: str) -> List[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != HEADER:
        raise ValueError(f"unexpected header {header!r}")
    rows = []
    for rec in reader:
        if len(rec) != len(HEADER):
            raise ValueError(f"bad record {rec!r}")
        flags = tuple(f for f in rec[4].split(";") if f)
        rows.append(SweepRow(*(parse_float(v) for v in rec[:4]), flags))
    return rows


def summarize(config: SweepConfig, rows) -> str:
    m = config.model
    p = config.prior
    lines = [
        f"model {m.name.value} r={m.r!r} phi={m.phi!r} d_I={m.d_I} d_N={m.d_N}",
        f"prior {p.kind.value} on {p.domain}; quadrature {config.rule.scheme.value} x {len(config.rule)}",
        f"{len(rows)} grid points over {config.grid}",
    ]
    for name in ("inv_L", "inv_M", "inv_U"):
        vals = [getattr(r, name) for r in rows]
        finite = [v for v in vals if math.isfinite(v)]
        if finite:
            lines.append(f"{name}: min {min(finite)!r} max {max(finite)!r} ({len(vals) - len(finite)} inf)")
        else:
            lines.append(f"{name}: inf at every grid point")
    flagged = sum(1 for r in rows if r.flags)
    lines.append(f"rows with flags: {flagged}")
    return "\n".join(lines)
