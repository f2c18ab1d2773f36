"""Command-line experiment runner.

Subcommands: ``run`` (single experiment), ``sweep`` (horizon sweep with
regime-dependent reparameterization and a power-law fit), ``verify`` (alias
``verify-compressors``; contract verification), and ``params`` (constant
table and selected hyperparameters without running).

Exit codes: 0 success, 2 config error, 3 infeasible parameters, 4 numerical
divergence, 5 verification failure.  The output root can be overridden with
the ``DCOPT_OUTPUT_ROOT`` environment variable.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import algorithm, config as cfgmod, diagnostics
from .compressors import (
    LOCAL,
    NormContext,
    verify_global_assumption,
    verify_local_assumption,
)
from .constants import compute_constants, initial_l1_bound
from .errors import (
    ConfigError,
    DcoptError,
    InfeasibleParams,
    InvalidScale,
    NonFiniteState,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4
EXIT_VERIFY_FAILED = 5


def _fail(code: int, kind: str, message: str) -> int:
    print(f"error: {kind}: {message}", file=sys.stderr)
    return code


def _out_dir(cfg: dict, default: str) -> Path:
    directory = cfg.get("output", {}).get("directory", default)
    root = os.environ.get("DCOPT_OUTPUT_ROOT")
    path = Path(root) / directory if root else Path(directory)
    return path


def _prepare_dir(path: Path, force: bool, filenames) -> None:
    path.mkdir(parents=True, exist_ok=True)
    if not force:
        clashes = [f for f in filenames if (path / f).exists()]
        if clashes:
            raise ConfigError(f"refusing to overwrite {clashes} in {path}; "
                              f"pass --force or set output.force")


def _plot(trace, path: Path) -> None:
    """Best-effort static SVG plots; failures never affect the exit code."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        for xlabel, xs, fname in (("iteration", trace.k, "metrics_vs_iterations.svg"),
                                  ("cumulative bits", trace.bits_cum, "metrics_vs_bits.svg")):
            fig, ax = plt.subplots(figsize=(7, 4.5))
            for name, ys in (("f_bar", trace.f_bar), ("grad_sq", trace.grad_sq),
                             ("consensus", trace.consensus), ("e5", trace.e5)):
                pos = ys > 0
                if pos.any():
                    ax.semilogy(np.asarray(xs)[pos], ys[pos], label=name, lw=1.2)
            ax.set_xlabel(xlabel)
            ax.legend(loc="best", fontsize=8)
            ax.grid(alpha=0.3)
            fig.tight_layout()
            fig.savefig(path / fname, metadata={"Date": None})
            plt.close(fig)
    except Exception as exc:                       # noqa: BLE001
        print(f"note: plotting skipped ({exc})", file=sys.stderr)


def cmd_run(config_path: str, force: bool = False) -> int:
    try:
        cfg = cfgmod.load_config(config_path)
        problem, graph, compressor, hyper, run_kwargs, feas, extras, echo = \
            cfgmod.build_run_plan(cfg)
        out = cfg.get("output", {})
        want_csv = cfgmod._get(out, "csv", bool, True)
        want_svg = cfgmod._get(out, "svg", bool, False)
        force = force or cfgmod._get(out, "force", bool, False)
        path = _out_dir(cfg, "dcopt-out")
        _prepare_dir(path, force, ["trace.csv", "summary.json"])
    except InfeasibleParams as exc:
        return _fail(EXIT_INFEASIBLE, "infeasible", str(exc))
    except DcoptError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    try:
        trace = algorithm.run(problem, graph, compressor, hyper,
                              config_echo=echo, **run_kwargs)
    except NonFiniteState as exc:
        return _fail(EXIT_DIVERGED, "divergence", str(exc))
    except InvalidScale as exc:
        return _fail(EXIT_INFEASIBLE, "infeasible", str(exc))

    if want_csv:
        diagnostics.write_csv(trace, path / "trace.csv")

    fits = {}
    for name, model in (("grad_sq_power_law", "power_law"),
                        ("grad_sq_geometric", "geometric")):
        try:
            value, r2 = diagnostics.rate_fit(trace.k[1:], trace.grad_sq[1:], model)
            fits[name] = {("exponent" if model == "power_law" else "ratio"): value,
                          "r_squared": r2}
        except DcoptError:
            pass
    checks = {}
    contract = run_kwargs.get("contract")
    if contract is not None and contract.cls == LOCAL:
        rep = diagnostics.contraction_local_check(trace, contract, hyper.omega)
        checks[rep.name] = {"checked": rep.checked, "violations": rep.violations}

    diagnostics.write_summary(trace, path / "summary.json", extra={
        "feasibility": {k: {"ok": ok, "value": v, "bound": b}
                        for k, (ok, v, b) in feas.items()},
        "extras": {k: v for k, v in extras.items() if np.isscalar(v)},
        "rate_fits": fits,
        "checks": checks,
    })
    if want_svg:
        _plot(trace, path)
    print(f"run finished: T={trace.T}, f_bar={trace.f_bar[-1]:.6g}, "
          f"bits={int(trace.bits_cum[-1])}, out={path}")
    return EXIT_OK


def cmd_sweep(config_path: str, horizons, force: bool = False) -> int:
    if len(horizons) < 3:
        return _fail(EXIT_CONFIG, "config", "sweep needs at least 3 horizons")
    try:
        cfg = cfgmod.load_config(config_path)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    rows = []
    for T in sorted(horizons):
        cfg_t = {sec: dict(vals) for sec, vals in cfg.items()}
        cfg_t.setdefault("algorithm", {})["T"] = str(T)
        cfg_t["algorithm"].pop("t", None)
        try:
            problem, graph, compressor, hyper, run_kwargs, feas, extras, echo = \
                cfgmod.build_run_plan(cfg_t)
            trace = algorithm.run(problem, graph, compressor, hyper,
                                  config_echo=echo, **run_kwargs)
        except InfeasibleParams as exc:
            return _fail(EXIT_INFEASIBLE, "infeasible", str(exc))
        except NonFiniteState as exc:
            return _fail(EXIT_DIVERGED, "divergence", f"T={T}: {exc}")
        except InvalidScale as exc:
            return _fail(EXIT_INFEASIBLE, "infeasible", str(exc))
        except DcoptError as exc:
            return _fail(EXIT_CONFIG, "config", str(exc))
        metric = float(np.mean(trace.grad_sq[:-1] + trace.consensus[:-1]))
        rows.append({"T": T, "avg_metric": metric, "alpha": hyper.alpha,
                     "bits": int(trace.bits_cum[-1])})

    exponent, r2 = diagnostics.rate_fit([r["T"] for r in rows],
                                        [r["avg_metric"] for r in rows],
                                        "power_law", burn_in_frac=0.0)
    result = {"rows": rows, "fit": {"exponent": exponent, "r_squared": r2}}
    try:
        path = _out_dir(cfg, "dcopt-sweep")
        _prepare_dir(path, force or cfgmod._get(cfg.get("output", {}), "force", bool, False),
                     ["sweep.json"])
        with open(path / "sweep.json", "w") as fh:
            json.dump(result, fh, indent=2)
            fh.write("\n")
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    for r in rows:
        print(f"T={r['T']:>8d}  avg_metric={r['avg_metric']:.6e}  alpha={r['alpha']:.3e}")
    print(f"power-law fit: exponent={exponent:.4f}, R^2={r2:.4f}")
    return EXIT_OK


def cmd_verify(config_path: str, samples: int = 10_000,
               trials: int = 10_000) -> int:
    try:
        cfg = cfgmod.load_config(config_path)
        graph = cfgmod.build_graph_from(cfg)
        problem = cfgmod.build_problem_from(cfg, graph.n)
        seed = cfgmod._seed(cfg.get("algorithm", {}), "seed", 0)
        compressor = cfgmod.build_compressor_from(cfg, seed)
        contract = cfgmod.compressor_contract(compressor, problem.d, cfg)
    except DcoptError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    if contract.cls == LOCAL:
        report = verify_local_assumption(compressor, contract, samples=samples,
                                         seed=seed, d=problem.d)
    else:
        report = verify_global_assumption(compressor, contract, samples=16,
                                          trials_per_sample=trials, seed=seed,
                                          d=problem.d)
    payload = {
        "kind": report.kind,
        "contract": {"class": contract.cls,
                     "p": "inf" if contract.p == np.inf else contract.p,
                     "r": contract.r, "C": contract.C, "delta": contract.delta},
        "max_ratio": report.max_ratio,
        "pass": report.passed,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_params(config_path: str) -> int:
    try:
        cfg = cfgmod.load_config(config_path)
        problem, graph, compressor, hyper, run_kwargs, feas, extras, echo = \
            cfgmod.build_run_plan(cfg)
        contract = run_kwargs["contract"]
        norms = NormContext(p=contract.p, d=problem.d)
        l1_0 = initial_l1_bound(run_kwargs["x0"], problem, graph,
                                hyper.gamma, hyper.beta)
        sched = hyper.schedule
        table = compute_constants(
            graph, problem.ell, hyper.gamma, hyper.tau_1 or hyper.beta / hyper.gamma,
            hyper.omega, hyper.alpha, contract, norms, T=run_kwargs["T"],
            l1_0=l1_0, s0=sched.value(0), nu=problem.pl_nu)
    except InfeasibleParams as exc:
        return _fail(EXIT_INFEASIBLE, "infeasible", str(exc))
    except DcoptError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))

    payload = {
        "hyper": {"alpha": hyper.alpha, "beta": hyper.beta, "gamma": hyper.gamma,
                  "omega": hyper.omega, "tau_1": hyper.tau_1,
                  "schedule": type(sched).__name__, "s0": sched.value(0)},
        "constants": table.as_dict(),
        "feasibility": {k: {"ok": ok, "value": v, "bound": b}
                        for k, (ok, v, b) in feas.items()},
    }
    print(json.dumps(payload, indent=2, default=str))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dcopt",
                                     description="compressed distributed optimization runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")

    p_sweep = sub.add_parser("sweep", help="run one experiment per horizon and fit a rate")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--horizons", type=int, nargs="+", required=True)
    p_sweep.add_argument("--force", action="store_true")

    p_verify = sub.add_parser("verify", aliases=["verify-compressors"],
                              help="verify the configured compressor's contract")
    p_verify.add_argument("config")
    p_verify.add_argument("--samples", type=int, default=10_000)
    p_verify.add_argument("--trials", type=int, default=10_000)

    p_params = sub.add_parser("params", help="print constants and hyperparameters")
    p_params.add_argument("config")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, force=args.force)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.horizons, force=args.force)
    if args.command in ("verify", "verify-compressors"):
        return cmd_verify(args.config, samples=args.samples, trials=args.trials)
    if args.command == "params":
        return cmd_params(args.config)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
