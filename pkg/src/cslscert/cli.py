"""Command-line interface: ``cslscert {generate,certify,inspect,sweep}``.

Exit codes: 0 success, 2 usage error, 3 non-informative certificate,
4 too few samples, 5 solver failure.
"""

import argparse
import csv
import datetime
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .automaton import count_words, entropy as automaton_entropy
from .baseline import cjsr_bracket
from .bounds import BoundVariant, certify, epsilon
from .estimator import model_context
from .exceptions import (
    CertError,
    ConvergenceFailure,
    DomainError,
    IterationLimit,
    TooFewSamples,
    TooManyWords,
)
from .numerics import sym_dim
from .products import barabanov_flag, enumerate_products
from .sampling import SamplingConfig, ingest, synthesize, write_csv
from .scenario import ScenarioConfig, solve
from .system import load_system

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONINFORMATIVE = 3
EXIT_TOO_FEW = 4
EXIT_SOLVER = 5

SWEEP_COLUMNS = ["N", "seed", "gamma_star", "kappa", "delta", "factor", "bound", "informative"]

logger = logging.getLogger("cslscert")


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest(command, params, inputs):
    return {
        "command": command,
        "parameters": params,
        "inputs": {str(p): _digest(p) for p in inputs if p},
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _json_default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _clean(obj):
    # JSON has no infinities; emit null instead
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(data, out):
    text = json.dumps(_clean(data), indent=2, default=_json_default) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _config(args):
    return ScenarioConfig(C=args.C, gamma_tol=args.gamma_tol, feas_tol=args.feas_tol,
                          max_oracle_iters=args.max_iters)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _beta(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("beta must lie in the open interval (0, 1)")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _grid(text):
    try:
        values = [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad N grid: {text}") from None
    if not values:
        raise argparse.ArgumentTypeError("N grid is empty")
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("N grid values must be >= 1")
    return values


def _seeds(text):
    if "," in text or ":" in text:
        if ":" in text:
            a, b = text.split(":")
            values = list(range(int(a), int(b)))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    else:
        values = list(range(_positive_int(text)))
    if not values:
        raise argparse.ArgumentTypeError("no seeds")
    return values


def _add_solver_flags(p):
    p.add_argument("--C", type=float, default=1e6, help="spectral box upper constant (default 1e6)")
    p.add_argument("--gamma-tol", type=float, default=1e-6)
    p.add_argument("--feas-tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=None, help="ellipsoid iterations per feasibility check")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cslscert",
        description="Probabilistic stability certificates for constrained switching linear systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample trajectories of a known system")
    g.add_argument("system")
    g.add_argument("-N", "--samples", type=_positive_int, required=True)
    g.add_argument("-l", "--length", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="trajectory CSV to write")

    c = sub.add_parser("certify", help="certify a CJSR upper bound from trajectory data")
    c.add_argument("trajectories")
    c.add_argument("--beta", type=_beta, required=True)
    c.add_argument("-l", "--length", type=_positive_int, required=True)
    c.add_argument("--variant", choices=[v.value for v in BoundVariant], default="uniform")
    c.add_argument("--system", help="system JSON used only for variant context")
    c.add_argument("--entropy", type=float, help="automaton entropy h(G) in bits")
    c.add_argument("--eig", type=float, help="Perron eigenvalue of the adjacency matrix")
    c.add_argument("--nodes", type=_positive_int, help="number of automaton nodes")
    c.add_argument("--pmin", type=float, help="minimal product probability")
    c.add_argument("--count", type=_positive_int, help="number of distinct products |Pi_l|")
    c.add_argument("--seed", type=int, default=None, help="jitter for the solver's start")
    c.add_argument("--out")
    _add_solver_flags(c)

    i = sub.add_parser("inspect", help="graph and product statistics of a system")
    i.add_argument("system")
    i.add_argument("-l", "--length", type=_positive_int, required=True)
    i.add_argument("--max-words", type=_positive_int, default=10**6)
    i.add_argument("--cycle-len", type=_positive_int, default=None)
    i.add_argument("--no-bracket", action="store_true", help="skip the model-based CJSR bracket")
    i.add_argument("--out")
    _add_solver_flags(i)

    s = sub.add_parser("sweep", help="bound factor versus N over seeds, as CSV")
    s.add_argument("system")
    s.add_argument("--beta", type=_beta, required=True)
    s.add_argument("-l", "--length", type=_positive_int, required=True)
    s.add_argument("--grid", type=_grid, required=True, help="comma separated N values")
    s.add_argument("--seeds", type=_seeds, default=list(range(10)),
                   help="count, comma list or a:b range of seeds (default 10)")
    s.add_argument("--variant", choices=[v.value for v in BoundVariant], default="entropy")
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--out", required=True)
    _add_solver_flags(s)
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    system = load_system(args.system)
    cfg = SamplingConfig(args.samples, args.length, args.seed)
    write_csv(synthesize(system, cfg), args.out)
    params = {"N": args.samples, "l": args.length, "seed": args.seed}
    _write_json(manifest("generate", params, [args.system]), args.out + ".manifest.json")
    return EXIT_OK


def _certify_context(args, system):
    variant = BoundVariant(args.variant)
    context, fields, barabanov = {}, [], None
    if system is not None:
        context, fields, barabanov = model_context(system, args.length, variant)
    flags = {"p_min": args.pmin, "product_count": args.count, "entropy": args.entropy,
             "lambda_max": args.eig, "nodes": args.nodes}
    context.update({k: v for k, v in flags.items() if v is not None})
    needed = {
        BoundVariant.EXACT: ["p_min"],
        BoundVariant.UNIFORM: ["product_count"],
        BoundVariant.ENTROPY: ["entropy"],
        BoundVariant.EIGEN: ["nodes", "lambda_max"],
    }[variant]
    missing = [k for k in needed if k not in context]
    if missing:
        raise DomainError(f"variant {variant.value} needs --system or {', '.join(missing)}")
    return {k: context[k] for k in needed}, fields, barabanov


def cmd_certify(args):
    observations = ingest(args.trajectories)
    system = load_system(args.system) if args.system else None
    if system is not None and system.n != observations.n:
        raise DomainError(f"system dimension {system.n} does not match data dimension {observations.n}")
    context, fields, barabanov = _certify_context(args, system)
    N, d = len(observations), sym_dim(observations.n)
    epsilon(args.beta, N, d)  # fail fast with TooFewSamples before solving
    cfg = _config(args)
    solution = solve(observations, args.length, cfg, random_state=args.seed)
    cert = certify(solution, args.variant, args.beta, N, args.length, barabanov=barabanov,
                   model_fields=fields, config=cfg, **context)
    out = cert.to_dict()
    out["solver"] = {"active_margin": solution.active_margin, **solution.oracle_stats}
    params = {"beta": args.beta, "l": args.length, "variant": args.variant, "C": args.C,
              "gamma_tol": args.gamma_tol, "feas_tol": args.feas_tol, "seed": args.seed, **context}
    out["manifest"] = manifest("certify", params, [args.trajectories, args.system])
    _write_json(out, args.out)
    logger.info("bound %.6g (informative=%s)", cert.bound, cert.informative)
    return EXIT_OK if cert.informative else EXIT_NONINFORMATIVE


def inspect_report(system, length, max_words=10**6, cycle_len=None, bracket=True, config=ScenarioConfig()):
    stats = automaton_entropy(system.automaton)
    report = {
        "n": system.n,
        "m": system.m,
        "nodes": stats.node_count,
        "l": length,
        "entropy": stats.entropy,
        "lambda_max": stats.perron,
        "adjacency_moduli": stats.adjacency_moduli.tolist(),
        "eigen_mass": stats.eigen_mass(length),
        "diagonalizable": stats.diagonalizable,
        "deterministic_labels": system.automaton.is_deterministic,
    }
    try:
        products = enumerate_products(system, length, max_words=max_words)
    except TooManyWords as exc:
        report["counting_skipped"] = str(exc)
    else:
        report.update(
            word_count=count_words(system.automaton, length),
            product_count=products.distinct_count,
            p_min=products.p_min,
            p_min_word=products.word_p_min,
            barabanov=["".join(map(str, e.word)) for e in barabanov_flag(products)],
        )
        report["product_count_within_eigen_bound"] = products.distinct_count <= stats.eigen_mass(length) * (1 + 1e-12)
    if bracket:
        try:
            br = cjsr_bracket(system, length, cycle_len, config)
        except TooManyWords as exc:
            report["bracket_skipped"] = str(exc)
        else:
            report["bracket"] = {"lower": br.lower, "upper": br.upper,
                                 "lower_witness": list(br.lower_witness), "upper_l": br.upper_l}
    return report


def cmd_inspect(args):
    system = load_system(args.system)
    report = inspect_report(system, args.length, args.max_words, args.cycle_len,
                            not args.no_bracket, _config(args))
    params = {"l": args.length, "max_words": args.max_words, "C": args.C}
    report["manifest"] = manifest("inspect", params, [args.system])
    _write_json(report, args.out)
    return EXIT_OK


def sweep_cell(system, N, seed, length, beta, variant, context, config):
    """One synthesize-solve-certify run; returns a sweep row."""
    obs = synthesize(system, SamplingConfig(N, length, seed)).strip()
    solution = solve(obs, length, config)
    cert = certify(solution, variant, beta, N, length, config=config, **context)
    return {
        "N": N, "seed": seed, "gamma_star": cert.gamma_star, "kappa": cert.kappa,
        "delta": cert.delta, "factor": cert.factor, "bound": cert.bound,
        "informative": int(cert.informative),
    }


def _sweep_cell_star(job):
    return sweep_cell(*job)


def run_sweep(system, grid, seeds, length, beta, variant, config, jobs=1):
    """Yield sweep rows in grid-major, seed-minor order."""
    context, _, _ = model_context(system, length, variant)
    d = sym_dim(system.n)
    cells = []
    for N in grid:
        if N <= d:
            raise TooFewSamples(f"grid value N = {N} is not above d := n(n+1)/2 = {d}")
        cells.extend((system, N, seed, length, beta, variant, context, config) for seed in seeds)
    if jobs == 1:
        for job in cells:
            yield _sweep_cell_star(job)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(_sweep_cell_star, cells)


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def cmd_sweep(args):
    system = load_system(args.system)
    cfg = _config(args)
    params = {"beta": args.beta, "l": args.length, "grid": args.grid, "seeds": args.seeds,
              "variant": args.variant, "C": args.C, "gamma_tol": args.gamma_tol,
              "feas_tol": args.feas_tol}
    _write_json(manifest("sweep", params, [args.system]), args.out + ".manifest.json")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        fh.flush()
        try:
            for row in run_sweep(system, args.grid, args.seeds, args.length, args.beta,
                                 args.variant, cfg, args.jobs):
                writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
                fh.flush()
        except KeyboardInterrupt:
            fh.flush()
            logger.warning("interrupted; partial sweep kept in %s", args.out)
            return 130
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "certify": cmd_certify,
    "inspect": cmd_inspect,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except TooFewSamples as exc:
        print(f"error: TooFewSamples: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW
    except (IterationLimit, ConvergenceFailure) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CertError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
