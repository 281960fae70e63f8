"""Command-line entry point: ``chaosleak <command> [<action>] [flags]``.

Output is CSV (``,`` separator, ``.`` decimals, ``\\n`` line endings, header
row) with floats printed to 17 significant digits, except orbit files, which
are bare samples (one per line, components comma-separated) so they can be
fed back through ``--input``. Random initial conditions come from
``numpy.random.default_rng(--seed)`` (PCG64), so equal argv gives equal bytes.

Exit status: 0 success, 2 invalid input, 3 failed computation; failures print
one ``ERROR:<code>:<detail>`` line on stderr.
"""

from __future__ import annotations

import argparse
import io
import sys
from typing import Sequence

import numpy as np

from . import estimate as est
from . import infometrics as info
from . import regimes, symbolic
from .errors import (
    ChaosLeakError,
    ComputationError,
    EmptyInput,
    NotOneDimensional,
    ValidationError,
)
from .maps import REGISTRY, get_map
from .orbit import DEFAULT_TRANSIENT, generate_orbit

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 2, 3


class _UsageError(ValidationError):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def fmt(x) -> str:
    return format(float(x), ".17g")


# ------------------------------------------------------------------ parsing

def floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def grid(text: str) -> np.ndarray:
    """``lo:hi:count`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be lo:hi:count, got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        if count < 1:
            raise argparse.ArgumentTypeError("grid count must be >= 1")
        return np.linspace(lo, hi, count)
    return np.array(floats(text))


def read_orbit(path: str) -> np.ndarray:
    """Read an orbit file into an ``(n, m)`` array; a non-numeric first line is skipped."""
    try:
        with open(path, encoding="ascii") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    if lines:
        try:
            floats(lines[0])
        except argparse.ArgumentTypeError:
            lines = lines[1:]
    if not lines:
        raise EmptyInput(f"{path} holds no samples")
    try:
        rows = [floats(ln) for ln in lines]
        data = np.array(rows, dtype=float)
    except (argparse.ArgumentTypeError, ValueError):
        raise ValidationError(f"{path} is not a well-formed orbit file") from None
    return data


def read_symbols(path: str) -> symbolic.Itinerary:
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return symbolic.Itinerary.from_string(text)


def one_column(data: np.ndarray, component) -> np.ndarray:
    if component is None:
        if data.shape[1] != 1:
            raise NotOneDimensional("input has several components; pick one with --component")
        return data[:, 0]
    if not 0 <= component < data.shape[1]:
        raise ValidationError(f"component {component} out of range")
    return data[:, component]


def start_state(model, x0, seed: int) -> tuple:
    if x0 is None:
        return model.seed_domain.sample(np.random.default_rng(seed))
    return model.check_state(x0)


# ------------------------------------------------------------------ commands

def cmd_maps(args, out):
    out.write("name,m,p,U,V\n")
    for m in REGISTRY.values():
        out.write(f"{m.name},{m.state_dim},{m.param_dim},{m.phase_domain},{m.param_domain}\n")


def cmd_orbit(args, out):
    model = get_map(args.map)
    x0 = start_state(model, args.x0, args.seed)
    orb = generate_orbit(model, args.params, x0, args.n, args.transient, args.stride)
    for row in orb.samples:
        out.write(",".join(fmt(v) for v in row) + "\n")


def cmd_bifurcation(args, out):
    model = get_map(args.map)
    diag = regimes.bifurcation_diagram(
        model, args.grid, args.param_index, args.base_params, args.transient,
        args.plot_count, args.component, args.seed,
    )
    out.write("param,value\n")
    for mu, v in diag.points:
        out.write(f"{fmt(mu)},{fmt(v)}\n")


def cmd_lyapunov(args, out):
    model = get_map(args.map)
    x0 = start_state(model, args.x0, args.seed)
    if model.state_dim == 1:
        values = [regimes.lyapunov_1d(model, args.params, x0, args.n, args.transient)]
    else:
        values = regimes.lyapunov_spectrum(model, args.params, x0, args.n, args.transient)
    out.write(",".join(fmt(v) for v in values) + "\n")


def cmd_regime_grid(args, out):
    model = get_map(args.map)
    rg = regimes.regime_grid(
        model, args.a_grid, args.b_grid, args.n, args.transient, args.lambda_min, args.seed
    )
    if args.format == "pgm":
        return rg.to_pgm()
    out.write("a,b,label,lambda1\n")
    for a, b, label, lam in rg.rows():
        out.write(f"{fmt(a)},{fmt(b)},{regimes.Regime(label).value},{fmt(lam)}\n")


def _report(rep, out):
    out.write("candidate,score\n")
    for cand, score in rep.objective_curve:
        out.write(f"{fmt(cand)},{fmt(score)}\n")
    out.write(f"ESTIMATE,{fmt(rep.value)}\n")


def cmd_estimate(args, out):
    x = one_column(read_orbit(args.input), args.component)
    if args.action == "return-map":
        rep = est.return_map_estimate(x, refine=args.refine)
    elif args.action == "invert":
        rep = est.consecutive_pair_invert(x)
        # candidate: per-pair estimate; score: distance from the reported median
        rep.objective_curve = [(mu, abs(mu - rep.value)) for _, mu in rep.objective_curve]
    else:
        rep = est.wootters_estimate(
            x, args.grid, args.bins, args.ref_length, args.seeds, get_map(args.map),
            args.transient, args.seed,
        )
    _report(rep, out)


def cmd_entropy(args, out):
    x = one_column(read_orbit(args.input), args.component)
    if args.action == "perm":
        dist = info.ordinal_distribution(x, args.d, args.tau)
        h = info.permutation_entropy(x, args.d, args.tau)
        out.write("d,tau,H,forbidden\n")
        out.write(f"{args.d},{args.tau},{fmt(h)},{dist.forbidden}\n")
        return
    res = info.mre(x, args.level, args.window, args.shift, args.functional, args.q,
                   args.k, args.warmup)
    out.write("window_start,value,flag\n")
    for start, value, flag in res.rows():
        out.write(f"{start},{fmt(value)},{int(flag)}\n")


def cmd_complexity(args, out):
    if args.action == "point":
        x = one_column(read_orbit(args.input), args.component)
        pt = info.statistical_complexity(x, args.d, args.tau, args.q)
        out.write("H,Q,C,q\n")
        out.write(f"{fmt(pt.H)},{fmt(pt.Q)},{fmt(pt.C)},{fmt(pt.q)}\n")
        return
    sweep = info.complexity_sweep(
        get_map(args.map), args.grid, args.d, args.tau, args.q, args.n, args.transient,
        args.seed, args.component or 0, args.base_params, args.param_index,
    )
    out.write("param,H,Q,C,q\n")
    for mu, pt in sweep:
        out.write(f"{fmt(mu)},{fmt(pt.H)},{fmt(pt.Q)},{fmt(pt.C)},{fmt(pt.q)}\n")


def _bracket(res, out):
    lo, hi = res.interval
    out.write("lo,hi,midpoint,consistent\n")
    out.write(f"{fmt(lo)},{fmt(hi)},{fmt(res.midpoint)},{str(res.consistent).lower()}\n")


def cmd_symbolic(args, out):
    model = get_map(args.map)
    if args.action == "encode":
        x = one_column(read_orbit(args.input), args.component)
        c = args.critical_point
        if c is None:
            if model.critical_point is None:
                raise NotOneDimensional(f"{model.name} has no turning point")
            if args.params is None:
                raise ValidationError("encode needs --params or --critical-point")
            c = model.critical_point(model.check_params(args.params))
        out.write(str(symbolic.encode_itinerary(x, critical_point=float(c))) + "\n")
    elif args.action == "estimate-x0":
        _bracket(symbolic.estimate_x0(read_symbols(args.symbols), model, args.mu), out)
    else:
        res = symbolic.estimate_mu(read_symbols(args.symbols), model, args.x0, args.mu_range,
                                   args.grid_step)
        _bracket(res, out)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="chaosleak", description="Chaotic-map analysis and leakage attacks.",
                formatter_class=fmt_cls)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(parent, name, helptext, func):
        sp = parent.add_parser(name, help=helptext, description=helptext, formatter_class=fmt_cls)
        sp.set_defaults(func=func)
        sp.add_argument("--output", "-o", default=None, help="write here instead of stdout")
        return sp

    def seed(sp):
        sp.add_argument("--seed", type=int, default=42, help="PCG64 seed for random draws")

    def map_args(sp, default="logistic", params=True):
        sp.add_argument("--map", default=default, choices=sorted(REGISTRY), help="map model")
        if params:
            sp.add_argument("--params", type=floats, required=True,
                            help="comma-separated parameters")

    def series(sp):
        sp.add_argument("--input", required=True, help="orbit file")
        sp.add_argument("--component", type=int, default=None,
                        help="column of a multi-component orbit (default: require one)")

    maps = sub.add_parser("maps", help="map registry")
    msub = maps.add_subparsers(dest="action", required=True, parser_class=_Parser)
    add(msub, "list", "list registered maps as CSV", cmd_maps)

    sp = add(sub, "orbit", "generate an orbit file", cmd_orbit)
    map_args(sp)
    sp.add_argument("--x0", type=floats, default=None,
                    help="initial state (default: random from the map's seed box)")
    sp.add_argument("--n", type=int, default=10_000, help="samples")
    sp.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    sp.add_argument("--stride", type=int, default=1, help="keep every stride-th state")
    seed(sp)

    sp = add(sub, "bifurcation", "bifurcation diagram as param,value CSV", cmd_bifurcation)
    map_args(sp, params=False)
    sp.add_argument("--grid", type=grid, required=True, help="lo:hi:count or list")
    sp.add_argument("--param-index", type=int, default=0, help="parameter being swept")
    sp.add_argument("--base-params", type=floats, default=None,
                    help="values of the other parameters (maps with several)")
    sp.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    sp.add_argument("--plot-count", type=int, default=200, help="values per column")
    sp.add_argument("--component", type=int, default=0, help="state component plotted")
    seed(sp)

    sp = add(sub, "lyapunov", "Lyapunov exponent(s), largest first", cmd_lyapunov)
    map_args(sp)
    sp.add_argument("--x0", type=floats, default=None, help="initial state (default: random)")
    sp.add_argument("--n", type=int, default=10**6, help="averaged steps")
    sp.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    seed(sp)

    sp = add(sub, "regime-grid", "label a two-parameter plane", cmd_regime_grid)
    map_args(sp, default="henon", params=False)
    sp.add_argument("--a-grid", type=grid, default="0:2:100", help="first parameter grid")
    sp.add_argument("--b-grid", type=grid, default="-1:1:100", help="second parameter grid")
    sp.add_argument("--n", type=int, default=regimes.MIN_LYAPUNOV_STEPS, help="averaged steps")
    sp.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    sp.add_argument("--lambda-min", type=float, default=regimes.DEFAULT_LAMBDA_MIN,
                    help="chaos threshold on the largest exponent")
    sp.add_argument("--format", choices=("csv", "pgm"), default="csv", help="output format")
    seed(sp)

    e = sub.add_parser("estimate", help="parameter estimation from a leaked orbit")
    esub = e.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add(esub, "return-map", "four times the return-map maximum", cmd_estimate)
    series(sp)
    sp.add_argument("--refine", action="store_true", help="fit a parabola near the apex")
    sp = add(esub, "invert", "median of consecutive-pair inversions", cmd_estimate)
    series(sp)
    sp = add(esub, "wootters", "histogram matching under Wootters' distance", cmd_estimate)
    series(sp)
    map_args(sp, params=False)
    sp.add_argument("--grid", type=grid, default=None,
                    help="candidate grid (default 3.57 to 4.0 in steps of 1e-3)")
    sp.add_argument("--bins", type=int, default=100, help="histogram bins")
    sp.add_argument("--ref-length", type=int, default=100_000, help="reference orbit length")
    sp.add_argument("--seeds", type=int, default=4, help="reference orbits per candidate")
    sp.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    seed(sp)

    en = sub.add_parser("entropy", help="entropy of a series")
    ensub = en.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add(ensub, "perm", "normalized permutation entropy", cmd_entropy)
    series(sp)
    sp.add_argument("--d", type=int, default=info.DEFAULT_D, help="embedding dimension")
    sp.add_argument("--tau", type=int, default=info.DEFAULT_TAU, help="embedding delay")
    sp = add(ensub, "mre", "sliding-window wavelet entropy with change flags", cmd_entropy)
    series(sp)
    sp.add_argument("--level", type=int, default=1, help="Haar detail level")
    sp.add_argument("--window", type=int, default=info.MRE_WINDOW, help="coefficients per window")
    sp.add_argument("--shift", type=int, default=info.MRE_SHIFT, help="window shift")
    sp.add_argument("--functional", choices=("shannon", "tsallis"), default="tsallis",
                    help="entropy functional")
    sp.add_argument("--q", type=float, default=info.DEFAULT_Q, help="Tsallis index")
    sp.add_argument("--k", type=float, default=info.MRE_K, help="flag threshold in MADs")
    sp.add_argument("--warmup", type=int, default=info.MRE_WARMUP,
                    help="windows before flagging starts")

    c = sub.add_parser("complexity", help="entropy-complexity plane")
    csub = c.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add(csub, "point", "(H, Q, C) of one series", cmd_complexity)
    series(sp)
    sweep = add(csub, "sweep", "(H, Q, C) over a parameter grid", cmd_complexity)
    map_args(sweep, params=False)
    sweep.add_argument("--grid", type=grid, required=True, help="lo:hi:count or list")
    sweep.add_argument("--n", type=int, default=100_000, help="samples per parameter")
    sweep.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="discarded steps")
    sweep.add_argument("--component", type=int, default=0, help="state component analysed")
    sweep.add_argument("--param-index", type=int, default=0, help="parameter being swept")
    sweep.add_argument("--base-params", type=floats, default=None,
                       help="values of the other parameters (maps with several)")
    seed(sweep)
    for sp in (csub.choices["point"], sweep):
        sp.add_argument("--d", type=int, default=info.DEFAULT_D, help="embedding dimension")
        sp.add_argument("--tau", type=int, default=info.DEFAULT_TAU, help="embedding delay")
        sp.add_argument("--q", type=float, default=info.DEFAULT_Q,
                        help="entropic index (1 = Shannon)")

    s = sub.add_parser("symbolic", help="binary symbolic dynamics")
    ssub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add(ssub, "encode", "itinerary of an orbit file", cmd_symbolic)
    series(sp)
    map_args(sp, params=False)
    sp.add_argument("--params", type=floats, default=None,
                    help="map parameters (locate the turning point)")
    sp.add_argument("--critical-point", type=float, default=None,
                    help="explicit threshold (overrides the map's turning point)")
    sp = add(ssub, "estimate-x0", "bracket the initial condition", cmd_symbolic)
    map_args(sp, params=False)
    sp.add_argument("--mu", type=floats, required=True, help="map parameter")
    sp.add_argument("--symbols", required=True, help="file with one line over {0,1}")
    sp = add(ssub, "estimate-mu", "bracket the map parameter", cmd_symbolic)
    map_args(sp, params=False)
    sp.add_argument("--symbols", required=True, help="file with one line over {0,1}")
    sp.add_argument("--x0", type=float, default=None,
                    help="known initial condition (default: estimate jointly)")
    sp.add_argument("--mu-range", type=floats, default=None,
                    help="lo,hi search range (default: parameter domain)")
    sp.add_argument("--grid-step", type=float, default=symbolic.JOINT_STEP,
                    help="joint-search grid step")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        buf = io.StringIO()
        raw = args.func(args, buf)
        data = raw if raw is not None else buf.getvalue().encode("ascii")
        if args.output:
            with open(args.output, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    except ChaosLeakError as exc:
        detail = " ".join(str(exc).split())
        sys.stderr.write(f"ERROR:{exc.code}:{detail}\n")
        return EXIT_COMPUTE if isinstance(exc, ComputationError) else EXIT_INVALID
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error of ours
        sys.stderr.close()
        return EXIT_OK
    except OSError as exc:
        sys.stderr.write(f"ERROR:IO:{exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
