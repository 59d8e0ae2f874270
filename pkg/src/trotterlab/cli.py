"""Command-line entry point.

Exit codes: 0 success, 2 hypothesis violated, 3 decomposition failure,
4 term explosion, 5 parse/config error.
"""

import argparse
from dataclasses import asdict, dataclass, field
import datetime
import io
import csv
import sys

import numpy as np

from . import __version__, _jsonio
from .errors import (DecompositionError, HypothesisViolated, NonSquare, ParseError,
                     TermExplosion)
from .experiments import (commuting_control, divergence_experiment, exact_evolution,
                          pow2_list, stability_probe)
from .funcspace import Term, VectorFunction, parse_profile
from .spectral import check_hypothesis, decompose
from .transport import DEFAULT_TERM_CAP, trotter_operator

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_DECOMPOSITION = 3
EXIT_TERM_EXPLOSION = 4
EXIT_CONFIG = 5

COMMANDS = ("decompose", "check-h", "evolve", "trotter", "report-divergence",
            "report-stability", "control-commuting")
TABLE_COMMANDS = ("report-divergence", "report-stability", "control-commuting")

DEMO_A = "0,1;1,0"
DEMO_B = "0,1;4,0"


class ConfigError(ParseError):
    pass


@dataclass
class RunConfig:
    command: str
    matrix_a: str = DEMO_A
    matrix_b: str = DEMO_B
    t: float = 1.0
    m_list: str = "pow2:10"
    points_per_unit: int = 2048
    profile: str = "bump"
    out_format: str = None
    out_path: str = None
    seed: int = 42
    tol: float = 1e-9
    no_timestamp: bool = False
    term_cap: int = DEFAULT_TERM_CAP
    scale: float = 2.0
    restarts: int = 8
    extra: dict = field(default_factory=dict)


def parse_matrix_spec(text):
    """Parse ``"0,1;1,0"`` into a square float array."""
    if text is None or not text.strip():
        raise ParseError("empty matrix spec")
    rows = []
    for i, row in enumerate(text.split(";"), start=1):
        entries = []
        for j, item in enumerate(row.split(","), start=1):
            try:
                entries.append(float(item))
            except ValueError:
                raise ParseError(f"row {i}, column {j}: cannot parse {item.strip()!r}") from None
        rows.append(entries)
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"row {i} has {len(row)} entries, row 1 has {width}")
    if len(rows) != width:
        raise NonSquare(f"matrix is {len(rows)}x{width}, not square")
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise ParseError("matrix entries must be finite")
    return m


def parse_m_list(text):
    """``"1,2,4"`` or ``"pow2:K"`` (1, 2, ..., 2**K)."""
    s = text.strip()
    try:
        if s.startswith("pow2:"):
            values = pow2_list(int(s[5:]))
        else:
            values = [int(v) for v in s.split(",")]
    except ValueError:
        raise ConfigError(f"bad m list {text!r}") from None
    if not values or min(values) < 1:
        raise ConfigError(f"m list {text!r} must hold positive integers")
    return sorted(set(values))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="trotterlab",
                description="Exact Lie-Trotter splitting experiments for "
                            "linear hyperbolic systems.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--matrix-a", default=DEMO_A, help="rows ';'-separated, entries ','")
    p.add_argument("--matrix-b", default=DEMO_B)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--m", dest="m_list", default="pow2:10", help='"1,2,4" or "pow2:K"')
    p.add_argument("--points-per-unit", type=int, default=2048)
    p.add_argument("--profile", default="bump")
    p.add_argument("--out", dest="out_path", default=None)
    p.add_argument("--format", dest="out_format", choices=("json", "csv", "gnuplot"),
                   default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--term-cap", type=int, default=DEFAULT_TERM_CAP)
    p.add_argument("--scale", type=float, default=2.0,
                   help="B = scale * A for control-commuting")
    p.add_argument("--restarts", type=int, default=8)
    return p


def config_from_args(argv):
    ns = build_parser().parse_args(argv)
    return RunConfig(**vars(ns))


def _meta(cfg):
    echo = asdict(cfg)
    # where the report lands is not part of the experiment; leaving it out
    # keeps reports written to different paths byte-identical
    echo.pop("extra")
    echo.pop("out_path")
    meta = {"tool": "trotterlab", "version": __version__, "config": echo}
    if not cfg.no_timestamp:
        meta["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return meta


def _csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_jsonio.fmt_float(v) if isinstance(v, float) else v
                    for v in (r[c] for c in columns)])
    return buf.getvalue()


def _table(cfg, columns, rows, payload):
    fmt = cfg.out_format or "csv"
    if fmt == "csv":
        return _csv(columns, rows)
    if fmt == "gnuplot":
        if cfg.command != "report-divergence":
            raise ConfigError("gnuplot output is only available for report-divergence")
        lines = ["# m d_m window_gap"]
        lines += [f"{r['m']} {_jsonio.fmt_float(r['d_m'])} "
                  f"{_jsonio.fmt_float(r['window_gap'])}" for r in rows]
        return "\n".join(lines) + "\n"
    return _jsonio.dumps({"meta": _meta(cfg), "result": payload}, indent=1) + "\n"


def _document(cfg, payload):
    fmt = cfg.out_format or "json"
    if fmt != "json":
        raise ConfigError(f"command {cfg.command} only supports json output")
    return _jsonio.dumps({"meta": _meta(cfg), "result": payload}, indent=1) + "\n"


def _execute(cfg):
    """Run the command; returns (report text, summary line, exit code)."""
    a = parse_matrix_spec(cfg.matrix_a)
    m_list = parse_m_list(cfg.m_list)
    if cfg.points_per_unit < 1 or not cfg.tol > 0 or cfg.term_cap < 1 or cfg.restarts < 0:
        raise ConfigError("points-per-unit, term-cap must be positive; tol > 0; restarts >= 0")
    cmd = cfg.command

    if cmd == "decompose":
        d = decompose(a, cfg.tol)
        summary = "eigenvalues: " + ", ".join(f"{v:.6g}" for v in d.eigenvalues)
        return _document(cfg, d.to_dict()), summary, EXIT_OK

    if cmd == "control-commuting":
        rep = commuting_control(a, cfg.scale, cfg.t, m_list, cfg.tol, cfg.points_per_unit)
        rows = [vars(r) for r in rep.rows]
        text = _table(cfg, ("m", "term_count", "deviation", "d_m"), rows, rep.to_dict())
        ok = rep.max_deviation <= 1e-10
        summary = (f"{'EXACT' if ok else 'DEVIATES'}: max deviation "
                   f"{rep.max_deviation:.2e}, max d_m {rep.max_d:.2e} over "
                   f"m={m_list[0]}..{m_list[-1]}")
        return text, summary, EXIT_OK

    b = parse_matrix_spec(cfg.matrix_b)
    if b.shape != a.shape:
        raise ConfigError(f"matrix-a is {a.shape[0]}x{a.shape[0]} but matrix-b is "
                          f"{b.shape[0]}x{b.shape[0]}")

    if cmd == "check-h":
        hyp = check_hypothesis(a, b, cfg.tol)
        verdict = "SATISFIED" if hyp.satisfied else "VIOLATED"
        summary = f"hypothesis {verdict}: gap {hyp.gap:.6g}"
        code = EXIT_OK if hyp.satisfied else EXIT_HYPOTHESIS
        return _document(cfg, hyp.to_dict()), summary, code

    if cmd == "evolve":
        try:
            profile = parse_profile(cfg.profile)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        dC = decompose(a + b, cfg.tol)
        f = VectorFunction(dC.n, [Term(profile, 0.0, dC.r_max)])
        u = exact_evolution(dC, cfg.t, f)
        payload = {"t": cfg.t, "C": (a + b).tolist(), "initial": f.to_dict(),
                   "evolved": u.to_dict()}
        return _document(cfg, payload), f"evolved {len(u)} term(s) to t={cfg.t:g}", EXIT_OK

    if cmd == "trotter":
        dA, dB = decompose(a, cfg.tol), decompose(b, cfg.tol)
        ops = []
        for m in m_list:
            op = trotter_operator(dA, dB, cfg.t, m, term_cap=cfg.term_cap)
            ops.append({"m": m, "term_count": len(op), "operator": op.to_dict()})
        summary = "term counts: " + ", ".join(f"m={o['m']}:{o['term_count']}" for o in ops)
        return _document(cfg, {"t": cfg.t, "iterates": ops}), summary, EXIT_OK

    if cmd == "report-stability":
        rep = stability_probe(a, b, cfg.t, m_list, cfg.restarts, cfg.seed, cfg.tol,
                              cfg.term_cap)
        rows = [vars(r) for r in rep.rows]
        text = _table(cfg, ("m", "norm_lower", "norm_upper"), rows, rep.to_dict())
        summary = (f"stability probe: norm_lower {rep.rows[0].norm_lower:.3e} (m={rep.rows[0].m})"
                   f" -> {rep.rows[-1].norm_lower:.3e} (m={rep.rows[-1].m}), "
                   f"log slope {rep.log_slope:.3g}")
        return text, summary, EXIT_OK

    # report-divergence
    if cfg.profile.strip() != "bump":
        raise ConfigError("report-divergence needs a compactly supported profile (bump)")
    rep = divergence_experiment(a, b, cfg.t, m_list, cfg.points_per_unit, tol=cfg.tol,
                                restarts=cfg.restarts, seed=cfg.seed, term_cap=cfg.term_cap)
    rows = [vars(r) for r in rep.rows]
    text = _table(cfg, rep.CSV_COLUMNS, rows, rep.to_dict())
    held = rep.min_d >= 0.99 * rep.gap_floor
    summary = (f"{'NON-CONVERGENT' if held else 'INCONCLUSIVE'}: d_m floor "
               f"{rep.gap_floor:.2e} over m={m_list[0]}..{m_list[-1]} "
               f"(min d_m {rep.min_d:.3e})")
    return text, summary, EXIT_OK


def run(cfg, stdout=None, stderr=None):
    """Execute ``cfg``; write the report and a one-line summary; return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        text, summary, code = _execute(cfg)
        if cfg.out_path:
            _jsonio.write_atomic(cfg.out_path, text)
        else:
            stdout.write(text)
    except HypothesisViolated as err:
        print(f"HypothesisViolated: {err}", file=stderr)
        return EXIT_HYPOTHESIS
    except DecompositionError as err:
        print(f"{type(err).__name__}: {err}", file=stderr)
        return EXIT_DECOMPOSITION
    except TermExplosion as err:
        print(f"TermExplosion: {err}", file=stderr)
        return EXIT_TERM_EXPLOSION
    except (ValueError, OSError) as err:
        print(f"{type(err).__name__}: {err}", file=stderr)
        return EXIT_CONFIG
    print(summary, file=stderr)
    return code


def main(argv=None):
    try:
        cfg = config_from_args(argv)
    except ConfigError as err:
        print(f"ConfigError: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
