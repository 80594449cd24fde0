"""Command-line entry point ``srm-lab``.

Exit status is 0 on success, 2 for configuration or input errors and 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import bounds, covering, local_entropy
from .core import LinearClass
from .errors import ConfigError, NumericalError
from .harness import emit, load_config, read_sample_csv, run_consistency, run_coverage
from .harness.experiments import default_bound_params
from .srm import delta_diagnostic, penalty, select_model

log = logging.getLogger("srm_lab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return repr(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return clean(v.item())
        return v
    return json.dumps(clean(obj), indent=2) + "\n"


def _table(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return _json([dict(zip(columns, r)) for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        gen = cfg.generator.model_copy(update={"seed": args.seed})
        cfg = cfg.model_copy(update={"generator": gen})
    return cfg


# --- subcommands --------------------------------------------------------------

def cmd_select(args) -> int:
    cfg = _config(args)
    s = read_sample_csv(args.sample)
    rep = select_model(s, cfg.classes.build(), cfg.penalty.build(), workers=args.threads)
    if args.format == "csv":
        rows = list(zip(rep.js, rep.empirical_risks, rep.penalties, rep.structural_risks))
        _write(_table(["j", "empirical_risk", "penalty", "structural_risk"], rows, "csv"), args.out)
    else:
        _write(_json(rep.to_dict()), args.out)
    return EXIT_OK


def cmd_penalty(args) -> int:
    cfg = _config(args)
    spec = cfg.penalty.build()
    j_max = args.j_max or cfg.classes.j_max
    ns = args.n or cfg.experiment.n_grid
    rows = [(spec.regime, n, j, penalty(spec, n, j)) for n in ns for j in range(1, j_max + 1)]
    text = _table(["regime", "n", "j", "r"], rows, args.format)
    if args.delta:
        diag = delta_diagnostic(spec, j_max)
        log.info("Delta partial sum %.6g after %d terms, converging=%s",
                 diag.partial_sums[-1], j_max, diag.converging)
    _write(text, args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.invert:
        if args.eta is None or args.n is None:
            raise ConfigError("--invert needs --n and --eta")
        if args.vc is not None:
            eps = bounds.classification_eta_epsilon(args.vc, args.n, args.eta, args.constant)
            rep = bounds.DeviationBoundReport(args.n, eps, args.eta, "classification_inversion",
                                              {"V": args.vc, "constant": args.constant})
        else:
            A, W = _bound_constants(args)
            rep = bounds.eta_trick_epsilon(A, W, args.n, args.eta)
        _write(_json(rep.to_dict()), args.out)
        return EXIT_OK

    note = ["eta holds the upper bound on the deviation probability at this epsilon"]
    if args.epsilon is None or args.n is None:
        raise ConfigError("bound needs --n and --epsilon (or --invert)")
    if args.vc is not None:
        prob = bounds.classification_deviation_bound(args.n, args.epsilon, vc=args.vc,
                                                     constant=args.constant)
        rep = bounds.DeviationBoundReport(args.n, args.epsilon, prob, "classification",
                                          {"V": args.vc, "constant": args.constant}, note)
    else:
        if args.d is None:
            raise ConfigError("give --vc for a classification bound or --d for a regression bound")
        diam = args.diam if args.diam is not None else (1.0 if args.d == 1 else math.sqrt(2.0))
        m_norm = args.m_norm if args.m_norm is not None else math.sqrt(args.d)
        prob = bounds.regression_deviation_bound(
            args.n, args.epsilon,
            log_covering_bound_at=lambda e: args.d * math.log(2.0)
            + bounds.log_parametric_covering_bound(args.d, diam, m_norm, e))
        rep = bounds.DeviationBoundReport(args.n, args.epsilon, prob, "regression_parametric",
                                          {"d": args.d, "diam": diam, "m_norm": m_norm}, note)
    _write(_json(rep.to_dict()), args.out)
    return EXIT_OK


def _bound_constants(args):
    if args.A is not None and args.W is not None:
        return args.A, args.W
    if args.d is None:
        raise ConfigError("--invert needs --A and --W, --d, or --vc")
    diam = args.diam if args.diam is not None else (1.0 if args.d == 1 else math.sqrt(2.0))
    m_norm = args.m_norm if args.m_norm is not None else math.sqrt(args.d)
    return bounds.loss_class_constants(args.d, diam, m_norm)


def cmd_entropy(args) -> int:
    cfg = _config(args)
    s = read_sample_csv(args.sample)
    j = args.j or cfg.classes.j_max
    basis = cfg.classes.build()[0].basis
    cls = LinearClass(basis, j)
    if args.population:
        gram = local_entropy.population_gram(cls, s.k)
    else:
        gram = local_entropy.gram_matrix(s, cls)
    delta = args.delta if args.delta is not None else local_entropy.delta_n(s.n)
    u = args.u if args.u is not None else delta / 10.0
    radii = local_entropy.ellipsoid_radii(gram, delta)
    bound = local_entropy.local_entropy_bound(j, delta, u, attest_rogers=args.attest_rogers)
    out = {
        "n": s.n, "j": j, "population": args.population,
        "gram_eigenvalues": [float(v) for v in gram.eigenvalues],
        "delta": delta, "u": u,
        "ellipsoid_radii": [float(r) for r in radii],
        "entropy_bound": bound.to_dict(),
        "entropy_integral": local_entropy.entropy_integral(j, delta),
        "A": local_entropy.compute_A(),
    }
    _write(_json(out), args.out)
    return EXIT_OK


def _read_matrix(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise ConfigError(f"cannot read matrix {path}: {exc}") from exc
    labels = None
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        labels, rows = rows[0], rows[1:]
    try:
        dist = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"non-numeric entry in distance matrix: {exc}") from exc
    return dist, labels


def cmd_covering(args) -> int:
    dist, labels = _read_matrix(args.matrix)
    space = covering.FinitePseudometricSpace(dist, labels)
    if args.greedy:
        res = covering.greedy_covering_number(space, args.epsilon)
    else:
        res = covering.covering_number(space, args.epsilon)
    _write(_json(res.to_dict(space)), args.out)
    return EXIT_OK


def cmd_simulate_consistency(args) -> int:
    cfg = _config(args)
    ex = cfg.experiment
    result = run_consistency(cfg.generator, cfg.classes.build(), cfg.penalty.build(),
                             ex.n_grid, ex.trials, ex.precision, workers=args.threads)
    _write(emit(result, None, args.format), args.out)
    return EXIT_OK


def cmd_simulate_coverage(args) -> int:
    cfg = _config(args)
    ex = cfg.experiment
    cls = LinearClass(cfg.classes.build()[0].basis, ex.coverage_j)
    A, W = default_bound_params(cls)
    params = (ex.bound_A if ex.bound_A is not None else A, ex.bound_W if ex.bound_W is not None else W)
    result = run_coverage(cfg.generator, cls, ex.eta_grid, ex.trials, ex.coverage_n, params,
                          ex.grid_step, ex.precision, workers=args.threads)
    _write(emit(result, None, args.format), args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--seed", type=int, help="override generator.seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="srm-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("select", parents=[common], help="SRM model selection on a sample CSV")
    sp.add_argument("--sample", required=True)
    sp.set_defaults(func=cmd_select, default_format="json")

    sp = sub.add_parser("penalty", parents=[common], help="table of r(n, j)")
    sp.add_argument("--n", type=int, action="append", help="sample size (repeatable)")
    sp.add_argument("--j-max", type=int)
    sp.add_argument("--delta", action="store_true", help="log the summability diagnostic")
    sp.set_defaults(func=cmd_penalty, default_format="csv")

    sp = sub.add_parser("bound", parents=[common], help="deviation bound or confidence radius")
    sp.add_argument("--invert", action="store_true", help="solve for the radius at level --eta")
    sp.add_argument("--n", type=int)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--vc", type=int, help="VC dimension (classification bounds)")
    sp.add_argument("--constant", type=int, choices=[32, 128], default=32)
    sp.add_argument("--d", type=int, help="parameter dimension (regression bounds)")
    sp.add_argument("--diam", type=float)
    sp.add_argument("--m-norm", type=float)
    sp.add_argument("--A", type=float)
    sp.add_argument("--W", type=float)
    sp.set_defaults(func=cmd_bound, default_format="json")

    sp = sub.add_parser("entropy", parents=[common], help="local metric entropy of a linear class")
    sp.add_argument("--sample", required=True)
    sp.add_argument("--j", type=int, help="class dimension (default classes.j_max)")
    sp.add_argument("--delta", type=float, help="radius (default log(n)/sqrt(n))")
    sp.add_argument("--u", type=float, help="scale (default delta/10)")
    sp.add_argument("--population", action="store_true", help="use the quadrature Gram matrix")
    sp.add_argument("--attest-rogers", action="store_true")
    sp.set_defaults(func=cmd_entropy, default_format="json")

    sp = sub.add_parser("covering", parents=[common], help="covering number of a distance matrix")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--greedy", action="store_true")
    sp.set_defaults(func=cmd_covering, default_format="json")

    sp = sub.add_parser("simulate-consistency", parents=[common], help="consistency experiment")
    sp.set_defaults(func=cmd_simulate_consistency, default_format="csv")

    sp = sub.add_parser("simulate-coverage", parents=[common], help="confidence-radius coverage experiment")
    sp.set_defaults(func=cmd_simulate_coverage, default_format="csv")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = args.default_format
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"srm-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValidationError, ValueError) as exc:
        print(f"srm-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
