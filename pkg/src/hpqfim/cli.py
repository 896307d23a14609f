"""``hpqfim`` command line: ``sweep``, ``verify`` and ``show``.

Exit codes: 0 success, 1 verification failure, 2 configuration or domain
error, 3 numerical error.
"""
import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import hybrid, models, states, sweep, verify
from .errors import ConfigError, DomainViolation, HpqfimError
from .matlib import schur_complement

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _num(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = "%.17g" % x
    return text if re.search(r"[.eE]", text) else text + ".0"


def to_json(obj, indent=0):
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{to_json(str(k))}: {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def parse_values(text):
    return [config_mod.parse_number(v) for v in text.split(",") if v.strip()]


def _blocks(b):
    return {"J_II": b.ii, "J_IN": b.in_, "J_NN": b.nn}


def show_document(cfg, theta_i, theta_n=None):
    model, prior = cfg.model, cfg.prior
    if len(theta_i) == 1 and model.d_I == 2:
        theta_i = cfg.interest_at(theta_i[0])
    ti = models.check_interest(model, theta_i)
    rep = hybrid.bound_report(model, prior, ti, cfg.rule, cfg.weight)
    inv_l, inv_m, inv_u = rep.traced()
    doc = {
        "model": {"name": model.name.value, "r": model.r, "phi": model.phi,
                  "d_I": model.d_I, "d_N": model.d_N},
        "prior": {"kind": prior.kind.value, "domain": str(prior.domain)},
        "theta_I": list(rep.theta_I),
        "averaged": _blocks(rep.avg_blocks),
        "J_pi": rep.j_pi,
        "hpqfim": rep.hpqfim,
        "surrogate_low": rep.surrogate_low,
        "surrogate_high": rep.surrogate_high,
        "inv_L": inv_l,
        "inv_M": inv_m,
        "inv_U": inv_u,
        "weight": rep.weight,
        "risk_bound": rep.risk_bound,
        "flags": list(rep.flags),
    }
    if theta_n is not None:
        p = models.point(model, ti, theta_n)
        q = models.qfim(model, p)
        s = models.bloch(model, p)
        doc["theta_N"] = list(p.theta_N)
        doc["pointwise"] = {
            "bloch": s,
            "entropy_nats": states.von_neumann_entropy(s),
            "qfim": q.assemble(),
            **_blocks(q),
            "J_I|N": schur_complement(q),
        }
    return doc


def cmd_sweep(args):
    cfg = config_mod.load(args.config)
    out = Path(args.output) if args.output else Path(args.config).parent / cfg.output_path
    rows = sweep.sweep_rows(cfg)
    out.write_text(sweep.format_csv(rows))
    print(sweep.summarize(cfg, rows))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args):
    results = verify.run_suite(args.suite)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_show(args):
    cfg = config_mod.load(args.config)
    try:
        theta_i = parse_values(args.theta_i)
        theta_n = parse_values(args.theta_n) if args.theta_n is not None else None
    except ConfigError as exc:
        raise DomainViolation(str(exc)) from exc
    print(to_json(show_document(cfg, theta_i, theta_n)))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="hpqfim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep theta_I over a grid and write a CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override output.path from the config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run built-in property checks")
    p.add_argument("suite", choices=verify.SUITES + ("all",))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("show", help="print the bound report for one point as JSON")
    p.add_argument("config")
    p.add_argument("--theta-i", required=True, help="comma separated, e.g. pi/2,0")
    p.add_argument("--theta-n", help="nuisance value for the pointwise blocks")
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HpqfimError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
