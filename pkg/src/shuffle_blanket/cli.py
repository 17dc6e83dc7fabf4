"""``shuffle-blanket`` command-line front end.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 check failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import enum
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

from .bounds import delta_bound, select_case
from .oracle import (
    MAX_K,
    MAX_N,
    RNG_ALGORITHM,
    KrrMatrix,
    empirical_dist,
    histogram_dist,
    sample_shuffled,
    tight_adp,
    tight_dp_curve,
    total_variation,
)
from .params import ParamError, ShuffleParams, TargetPair, all_kappas, parse_pi
from .tightness import H_SCAN_POINTS, classify, regions_and_verdict

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CHECK = 0, 1, 2, 3

COMMANDS = ("kappas", "case", "bound", "regions", "oracle", "sweep", "check")

# flag name -> argparse dest
FLAGS = {
    "eps0": "eps0",
    "n": "n",
    "k": "k",
    "pi": "pi",
    "eps": "eps",
    "pair": "pair",
    "others": "others",
    "samples": "samples",
    "seed": "seed",
    "scan-points": "scan_points",
    "format": "format",
    "out": "out",
}


class ConfigError(ParamError):
    pass


@dataclass
class RunConfig:
    eps0: list[float]
    n: list[int]
    k: int
    pi: str
    epsilon_grid: list[float]
    pairs: list[TargetPair]
    others: str | None = None
    samples: int = 0
    seed: int = 0
    scan_points: int = H_SCAN_POINTS
    format: str = "text"
    out: str | None = None
    warnings: list[str] = field(default_factory=list)

    def single_params(self) -> ShuffleParams:
        if len(self.eps0) != 1 or len(self.n) != 1:
            raise ConfigError("--eps0 and --n take a single value for this command (use sweep for grids)", "eps0")
        return self.params_for(self.eps0[0], self.n[0])

    def params_for(self, eps0: float, n: int) -> ShuffleParams:
        return ShuffleParams(eps0, n, self.k, parse_pi(self.pi, self.k))

    def require_eps(self) -> list[float]:
        if not self.epsilon_grid:
            raise ConfigError("--eps is required for this command", "eps")
        return self.epsilon_grid


# -- parsing ---------------------------------------------------------------------


def _float_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} as a comma list of reals", name) from exc
    if not vals:
        raise ConfigError(f"{name}: empty list", name)
    return vals


def _int_list(text: str, name: str) -> list[int]:
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} as a comma list of integers", name) from exc
    if not vals:
        raise ConfigError(f"{name}: empty list", name)
    return vals


def _int(text: Any, name: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError as exc:
        raise ConfigError(f"{name}: expected an integer, got {text!r}", name) from exc


def _pair(text: str) -> TargetPair:
    vals = _int_list(text, "pair")
    if len(vals) != 2:
        raise ConfigError(f"pair: expected two indices like 0,1, got {text!r}", "pair")
    return TargetPair(*vals)


def parse_others(spec: str | None, n: int, k: int, default: int) -> tuple[int, ...]:
    """``all:x`` or a comma list of n-1 indices; None means all entries = ``default``."""
    if spec is None:
        return (default,) * (n - 1)
    s = spec.strip()
    if s.startswith("all:"):
        vals = (_int(s[4:], "others"),) * (n - 1)
    else:
        vals = tuple(_int_list(s, "others")) if s else ()
    if len(vals) != n - 1:
        raise ConfigError(f"others: need n-1={n - 1} entries, got {len(vals)}", "others")
    if any(not 0 <= v < k for v in vals):
        raise ConfigError(f"others: entries must lie in 0..{k - 1}", "others")
    return vals


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; keys are flag names without leading dashes."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[config]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}", "config") from exc
    values = dict(parser["config"])
    unknown = sorted(set(values) - set(FLAGS))
    if unknown:
        raise ConfigError(f"config: unknown keys {unknown}", "config")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps0", help="local privacy level of k-RR (comma list for sweep)")
    common.add_argument("--n", help="number of users (comma list for sweep)")
    common.add_argument("--k", help="alphabet size (default 2)")
    common.add_argument("--pi", help="data distribution: comma list or 'uniform' (default)")
    common.add_argument("--eps", help="comma list of central epsilon values")
    common.add_argument("--pair", action="append", help="target pair x0,x1 (repeatable; default 0,1)")
    common.add_argument("--others", help="other n-1 entries: comma list or all:X")
    common.add_argument("--samples", help="Monte Carlo sample count (oracle; 0 disables)")
    common.add_argument("--seed", help="64-bit RNG seed")
    common.add_argument("--scan-points", dest="scan_points", help="grid size for critical-equation root scan")
    common.add_argument("--format", choices=("csv", "text"))
    common.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="shuffle-blanket",
        description="Blanket (epsilon, delta) bounds and tightness checks for shuffled k-RR.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "kappas": "constants kappa1..kappa5 for each input value",
        "case": "which branch of the bound applies at each epsilon",
        "bound": "delta bound at each epsilon",
        "regions": "tightness regions S1, S2 and theorem hypotheses",
        "oracle": "exact tight delta by brute force vs the bound",
        "sweep": "grid over (eps0, n, eps) as one flat table",
        "check": "run the acceptance suite",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}

    def get(flag: str, default=None):
        val = getattr(args, FLAGS[flag])
        if val is None:
            val = file_values.get(flag, default)
        return val

    command = args.command
    eps0 = get("eps0")
    n = get("n")
    if command != "check" and (eps0 is None or n is None):
        missing = "eps0" if eps0 is None else "n"
        raise ConfigError(f"--{missing} is required", missing)

    pair_arg = args.pair if args.pair else ([file_values["pair"]] if "pair" in file_values else ["0,1"])
    eps_text = get("eps")
    fmt = get("format") or ("csv" if command == "sweep" else "text")
    if fmt not in ("csv", "text"):
        raise ConfigError(f"format: must be csv or text, got {fmt!r}", "format")
    cfg = RunConfig(
        eps0=_float_list(eps0, "eps0") if eps0 is not None else [],
        n=_int_list(n, "n") if n is not None else [],
        k=_int(get("k", "2"), "k"),
        pi=str(get("pi", "uniform")),
        epsilon_grid=_float_list(eps_text, "eps") if eps_text is not None else [],
        pairs=[_pair(p) for p in pair_arg],
        others=get("others"),
        samples=_int(get("samples", "0"), "samples"),
        seed=_int(get("seed", "0"), "seed"),
        scan_points=_int(get("scan-points", str(H_SCAN_POINTS)), "scan-points"),
        format=fmt,
        out=get("out"),
    )
    if cfg.samples < 0:
        raise ConfigError("samples: must be >= 0", "samples")
    if cfg.scan_points < 1:
        raise ConfigError("scan-points: must be >= 1", "scan-points")
    return cfg


# -- rendering -------------------------------------------------------------------


def fmt_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, enum.Enum):
        return str(v.value)
    return str(v)


def render_table(header: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str) -> str:
    cells = [[fmt_cell(v) for v in row] for row in rows]
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    buf.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for r in cells:
        buf.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return buf.getvalue()


# -- commands --------------------------------------------------------------------


def cmd_kappas(cfg: RunConfig) -> str:
    params = cfg.single_params()
    header = ["target", "pi", "ln_kappa1", "kappa2", "ln_kappa2", "kappa3", "kappa4", "kappa5"]
    rows = [
        [ks.target, params.pi[ks.target], ks.ln_kappa1, ks.kappa2, ks.ln_kappa2, ks.kappa3, ks.kappa4, ks.kappa5]
        for ks in all_kappas(params)
    ]
    return render_table(header, rows, cfg.format)


def cmd_case(cfg: RunConfig) -> str:
    params = cfg.single_params()
    kappa4 = all_kappas(params)[0].kappa4
    rows = []
    for eps in cfg.require_eps():
        if eps <= 0:
            cfg.warnings.append(f"epsilon={eps!r} is not positive; row marked as error")
            rows.append([eps, "error", kappa4])
            continue
        rows.append([eps, select_case(params.epsilon0, eps), kappa4])
    return render_table(["epsilon", "case", "kappa4"], rows, cfg.format)


def cmd_bound(cfg: RunConfig) -> str:
    params = cfg.single_params()
    rows = []
    for eps in cfg.require_eps():
        if eps <= 0:
            cfg.warnings.append(f"epsilon={eps!r} is not positive; bound undefined, row marked as error")
            rows.append([eps, "error", "error", "error"])
            continue
        b = delta_bound(params, eps)
        rows.append([eps, b.case, b.ln_delta, b.delta_clamped])
    return render_table(["epsilon", "case", "ln_delta", "delta_clamped"], rows, cfg.format)


def regions_report(params: ShuffleParams, epsilons: Sequence[float], target: int, scan_points: int) -> list[tuple[str, str, str]]:
    """(section, key, value) triples describing the tightness analysis."""
    verdict = regions_and_verdict(params, None, target, scan_points)
    out: list[tuple[str, str, str]] = [
        ("params", "eps0", fmt_cell(params.epsilon0)),
        ("params", "n", str(params.n)),
        ("params", "k", str(params.k)),
    ]
    for a in verdict.per_input:
        sec = f"input {a.kappas.target}"
        out += [
            (sec, "kappa4", fmt_cell(a.kappas.kappa4)),
            (sec, "ln_kappa2", fmt_cell(a.kappas.ln_kappa2)),
            (sec, "S1", str(a.s1)),
            (sec, "S2", str(a.s2)),
            (sec, "poly_roots", " ".join(fmt_cell(r) for r in a.poly_roots) or "none"),
            (sec, "h_roots", " ".join(fmt_cell(r) for r in a.h_roots) or "none"),
        ]
    out += [
        ("intersection", "S1", str(verdict.s1_raw)),
        ("intersection", "S2", str(verdict.s2_raw)),
        ("theorem3", "mu", fmt_cell(verdict.mu)),
        ("theorem3", "thm3a", fmt_cell(verdict.thm3a_holds)),
        ("theorem3", "thm3b", fmt_cell(verdict.thm3b_holds)),
        ("theorem3", "S1_certified", str(verdict.s1)),
        ("theorem3", "S2_certified", str(verdict.s2)),
    ]
    ks = verdict.per_input[target].kappas
    for eps in epsilons:
        out.append(("classification", f"epsilon={fmt_cell(eps)}", str(classify(eps, ks))))
    for note in verdict.notes:
        out.append(("notes", "note", note))
    return out


def cmd_regions(cfg: RunConfig) -> str:
    params = cfg.single_params()
    target = cfg.pairs[0].x0
    cfg.pairs[0].check(params.k)
    triples = regions_report(params, cfg.epsilon_grid, target, cfg.scan_points)
    if cfg.format == "csv":
        return render_table(["section", "key", "value"], triples, "csv")
    lines, section = [], None
    for sec, key, val in triples:
        if sec != section:
            lines.append(f"[{sec}]")
            section = sec
        lines.append(f"  {key}: {val}")
    return "\n".join(lines) + "\n"


def _others_runs(cfg: RunConfig, params: ShuffleParams, pair: TargetPair) -> list[tuple[str, tuple[int, ...]]]:
    if cfg.others is not None:
        return [(cfg.others, parse_others(cfg.others, params.n, params.k, pair.x0))]
    return [
        (f"all:{pair.x0}", parse_others(None, params.n, params.k, pair.x0)),
        (f"all:{pair.x1}", parse_others(None, params.n, params.k, pair.x1)),
    ]


def cmd_oracle(cfg: RunConfig) -> str:
    params = cfg.single_params()
    epsilons = cfg.require_eps()
    header = ["pair", "others", "epsilon", "tight_adp", "tight_dp", "case", "ln_delta", "delta_clamped",
              "ratio_adp", "ratio_dp"]
    if cfg.samples:
        header += ["mc_samples", "mc_tv", "rng", "seed"]
    rows = []
    for pair in cfg.pairs:
        pair.check(params.k)
        for label, others in _others_runs(cfg, params, pair):
            dp = tight_dp_curve(params, others, epsilons)
            mc = []
            if cfg.samples:
                krr = KrrMatrix(params.k, params.epsilon0)
                data = others + (pair.x0,)
                samples = sample_shuffled(data, krr, cfg.samples, cfg.seed)
                tv = total_variation(empirical_dist(samples), histogram_dist(data, krr).probs)
                mc = [cfg.samples, tv, RNG_ALGORITHM, cfg.seed]
            for eps, dp_val in zip(epsilons, dp):
                adp = tight_adp(params, others, pair, eps)
                b = delta_bound(params, eps)
                bound = math.exp(b.ln_delta)
                rows.append([f"{pair.x0},{pair.x1}", label, eps, adp, dp_val, b.case, b.ln_delta,
                             b.delta_clamped, adp / bound, dp_val / bound] + mc)
    return render_table(header, rows, cfg.format)


def cmd_sweep(cfg: RunConfig) -> str:
    epsilons = cfg.require_eps()
    pair = cfg.pairs[0]
    header = ["eps0", "n", "k", "epsilon", "ln_kappa1", "kappa2", "kappa3", "kappa4", "kappa5", "case",
              "ln_delta", "delta_clamped", "classification", "mu", "S1", "S2", "thm3a", "thm3b", "tight_dp"]
    rows = []
    for eps0 in sorted(cfg.eps0):
        for n in sorted(cfg.n):
            params = cfg.params_for(eps0, n)
            pair.check(params.k)
            verdict = regions_and_verdict(params, None, pair.x0, cfg.scan_points)
            ks = verdict.per_input[pair.x0].kappas
            exact = [None] * len(epsilons)
            if n <= MAX_N and params.k <= MAX_K:
                runs = [tight_dp_curve(params, others, epsilons) for _, others in _others_runs(cfg, params, pair)]
                exact = [max(vals) for vals in zip(*runs)]
            for eps, dp_val in sorted(zip(epsilons, exact), key=lambda t: t[0]):
                if eps <= 0:
                    cfg.warnings.append(f"epsilon={eps!r} is not positive; row marked as error")
                    b_cells = ["error", "error", "error"]
                else:
                    b = delta_bound(params, eps)
                    b_cells = [b.case, b.ln_delta, b.delta_clamped]
                rows.append([eps0, n, params.k, eps, ks.ln_kappa1, ks.kappa2, ks.kappa3, ks.kappa4, ks.kappa5,
                             *b_cells, classify(eps, ks), verdict.mu, str(verdict.s1_raw), str(verdict.s2_raw),
                             verdict.thm3a_holds, verdict.thm3b_holds, dp_val])
    return render_table(header, rows, cfg.format)


def cmd_check(cfg: RunConfig) -> tuple[str, bool]:
    from .acceptance import run_all

    results = run_all()
    text = "".join(r.line() + "\n" for r in results)
    ok = all(r.passed for r in results)
    text += f"{'ALL PASS' if ok else 'FAILURES'}: {sum(r.passed for r in results)}/{len(results)} criteria\n"
    return text, ok


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "check":
            text, ok = cmd_check(cfg)
            _emit(text, cfg.out)
            return EXIT_OK if ok else EXIT_CHECK
        handler = {
            "kappas": cmd_kappas,
            "case": cmd_case,
            "bound": cmd_bound,
            "regions": cmd_regions,
            "oracle": cmd_oracle,
            "sweep": cmd_sweep,
        }[args.command]
        text = handler(cfg)
        _emit(text, cfg.out)
        for w in cfg.warnings:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_OK
    except ParamError as exc:
        name = exc.field or "input"
        print(f"shuffle-blanket: invalid {name}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"shuffle-blanket: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
