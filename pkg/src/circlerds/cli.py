"""Command-line front end.

Exit codes: 0 success, 1 a verify criterion failed, 2 invalid config,
3 non-convergence beyond the configured tolerance, 4 hypotheses violated.
"""
from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import parallel
from .diagnostics import atom_scan, check_hypotheses
from .engine import inverse_measure
from .errors import ConfigError, HypothesisViolation, NonConvergence
from .estimators import (DimensionRunConfig, arc_dichotomy, dimension_identity_residual,
                         exponents_integral, extremal_exponents_kingman, furstenberg_entropy,
                         sample_stationary, sync_rate)
from .maps import Projective
from .report import header, timing, write_csv, write_json

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NONCONV, EXIT_HYPOTHESIS = 0, 1, 2, 3, 4


def _experiment(args):
    from .config import load_experiment

    if args.config is None:
        raise ConfigError("--config is required for this command", "--config")
    return load_experiment(args.config).with_seed(args.seed)


def _out_dir(args, cfg) -> Path:
    return Path(args.out if args.out is not None else cfg.output.dir)


def _hyp(cfg):
    h = cfg.hypotheses
    return check_hypotheses(cfg.nu, cfg.seed, h.grid, h.tol, h.pairs, h.depth, h.beam,
                            h.prox_threshold, h.sync_n, h.sync_samples)


def _stationary_pair(cfg):
    st = cfg.stationary
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eta = sample_stationary(cfg.nu, st.n_steps, st.n_samples, cfg.seed, st.x0, st.tol)
        eta_m = sample_stationary(inverse_measure(cfg.nu), st.n_steps, st.n_samples,
                                  cfg.seed + 1, st.x0_minus, st.tol)
    return eta, eta_m


def _check_convergence(cfg, *measures):
    limit = cfg.stationary.max_warning_fraction
    for label, m in measures:
        frac = m.meta["nonconverged"] / m.count
        if frac > limit:
            raise NonConvergence(f"{label}: {frac:.1%} of samples did not converge "
                                 f"(limit {limit:.1%}); raise stationary.n_steps")


def _atom_table(nu):
    return [{"atom": f.to_dict(), "prob": p} for f, p in zip(nu.atoms, nu.probs)]


def cmd_stationary(args) -> int:
    t0 = time.perf_counter()
    cfg = _experiment(args)
    eta, eta_m = _stationary_pair(cfg)
    out = _out_dir(args, cfg)
    write_csv(out / f"{cfg.name}_eta.csv", {"x": eta.samples})
    write_csv(out / f"{cfg.name}_eta_minus.csv", {"x": eta_m.samples})
    rep = header("stationary", cfg.seed, cfg.config_hash())
    rep.update({
        "family": cfg.name,
        "atoms": _atom_table(cfg.nu),
        "eta": {**eta.meta, "count": eta.count, "atom_scan": atom_scan(eta, 0.001)},
        "eta_minus": {**eta_m.meta, "count": eta_m.count, "atom_scan": atom_scan(eta_m, 0.001)},
        "timing": timing(t0),
    })
    write_json(out / f"{cfg.name}_stationary.json", rep)
    _check_convergence(cfg, ("eta", eta), ("eta_minus", eta_m))
    print(f"wrote {out}/{cfg.name}_eta.csv, {cfg.name}_eta_minus.csv, {cfg.name}_stationary.json")
    return EXIT_OK


def cmd_exponents(args) -> int:
    t0 = time.perf_counter()
    cfg = _experiment(args)
    ex = cfg.exponents
    kg = extremal_exponents_kingman(cfg.nu, ex.n_steps, ex.n_samples, ex.grid, cfg.seed)
    eta, eta_m = _stationary_pair(cfg)
    rep = header("exponents", cfg.seed, cfg.config_hash())
    rep.update({"family": cfg.name, "kingman": kg})
    try:
        _check_convergence(cfg, ("eta", eta), ("eta_minus", eta_m))
        it = exponents_integral(cfg.nu, eta, eta_m, ex.mc_draws, cfg.seed)
        rep["integral"] = it
    except NonConvergence as e:
        # without a unique stationary measure only the grid estimator applies
        it = None
        rep["integral"] = {"skipped": str(e)}
        print(f"warning: integral estimator skipped: {e}", file=sys.stderr)
    if all(isinstance(f, Projective) for f in cfg.nu.atoms):
        from .oracle import MatrixAtomSet, normalize_unimodular, projective_consistency

        ms = normalize_unimodular(MatrixAtomSet.from_nu(cfg.nu))
        rep["oracle"] = projective_consistency(ms, ms.to_nu(), ex.n_steps, ex.n_samples,
                                               cfg.seed, ex.grid)
    rep["timing"] = timing(t0)
    path = write_json(_out_dir(args, cfg) / f"{cfg.name}_exponents.json", rep)
    print(f"lambda {kg.lam:.6f}, Lambda {kg.Lam:.6f} (kingman)")
    if it is not None:
        print(f"lambda {it.lam:.6f}, Lambda {it.Lam:.6f} (integral)")
    print(f"wrote {path}")
    return EXIT_OK


def _runs(cfg) -> DimensionRunConfig:
    return DimensionRunConfig(
        n_steps=cfg.stationary.n_steps, n_samples=cfg.stationary.n_samples, seed=cfg.seed,
        entropy_radius=cfg.entropy.radius, entropy_draws=cfg.entropy.draws,
        target_count=cfg.entropy.target_count, probes=cfg.dimension.probes,
        r_min=cfg.dimension.r_min, r_max=cfg.dimension.r_max, n_radii=cfg.dimension.n_radii)


def cmd_dimension(args) -> int:
    t0 = time.perf_counter()
    cfg = _experiment(args)
    out = _out_dir(args, cfg)
    hyp = _hyp(cfg)
    rep = header("dimension", cfg.seed, cfg.config_hash())
    rep.update({"family": cfg.name, "hypotheses": hyp})
    if not hyp.passed:
        rep["refused"] = list(hyp.reasons)
        rep["timing"] = timing(t0)
        write_json(out / f"{cfg.name}_dimension.json", rep)
        raise HypothesisViolation("dimension refused: " + "; ".join(hyp.reasons), hyp)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eta = sample_stationary(cfg.nu, cfg.stationary.n_steps, cfg.stationary.n_samples,
                                cfg.seed, cfg.stationary.x0, cfg.stationary.tol)
    _check_convergence(cfg, ("eta", eta))
    res = dimension_identity_residual(cfg.nu, _runs(cfg), hypotheses=hyp, eta=eta)
    d = res.dimension.diagnostics
    write_csv(out / f"{cfg.name}_dimension_radii.csv",
              {"radius": np.asarray(d["radii"]), "mean_log_mass": np.asarray(d["mean_log_mass"])})
    rep["result"] = res
    rep["timing"] = timing(t0)
    path = write_json(out / f"{cfg.name}_dimension.json", rep)
    print(f"dim {res.dimension.value:.4f}  -h/lambda {res.formula:.4f}  "
          f"residual {res.residual:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    t0 = time.perf_counter()
    cfg = _experiment(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eta = sample_stationary(cfg.nu, cfg.stationary.n_steps, cfg.stationary.n_samples,
                                cfg.seed, cfg.stationary.x0, cfg.stationary.tol)
    _check_convergence(cfg, ("eta", eta))
    en = cfg.entropy
    h = furstenberg_entropy(cfg.nu, eta, en.radius, en.draws, cfg.seed, en.leave_one_out,
                            en.target_count)
    rep = header("entropy", cfg.seed, cfg.config_hash())
    rep.update({"family": cfg.name, "entropy": h, "timing": timing(t0)})
    path = write_json(_out_dir(args, cfg) / f"{cfg.name}_entropy.json", rep)
    print(f"h_F {h.value:.6f} +- {h.stderr:.6f} (r = {h.diagnostics['radius']:.3g})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sync(args) -> int:
    t0 = time.perf_counter()
    cfg = _experiment(args)
    s = cfg.sync
    sr = sync_rate(cfg.nu, s.x, s.y, s.n_steps, s.n_samples, cfg.seed)
    frac = arc_dichotomy(cfg.nu, s.x, s.y, s.n_steps, s.n_samples, cfg.seed, s.collapse_tol)
    rep = header("sync", cfg.seed, cfg.config_hash())
    rep.update({"family": cfg.name, "sync_rate": sr, "arc_collapse_fraction": frac,
                "timing": timing(t0)})
    path = write_json(_out_dir(args, cfg) / f"{cfg.name}_sync.json", rep)
    print(f"sync rate {sr.value:.6f} +- {sr.stderr:.6f}; collapsed-arc fraction {frac:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import default_config_path, load_config_set, run_verify

    t0 = time.perf_counter()
    path = Path(args.config) if args.config else default_config_path()
    cs = load_config_set(path).with_seed(args.seed)
    only = [c.strip() for c in args.only.split(",")] if args.only else None

    def progress(cid, verdict, tm):
        flag = "PASS" if verdict["passed"] else "FAIL"
        note = f"  ({verdict['error']})" if "error" in verdict else ""
        print(f"[{flag}] {cid}: {verdict['title']}  [{tm['elapsed_s']:.1f}s]{note}", flush=True)

    results, tm = run_verify(cs, only, progress)
    rep = header("verify", cs.seed, cs.config_hash())
    rep.update(results)
    rep["timing"] = {**timing(t0), "criteria": tm}
    out = Path(args.out if args.out is not None else "out")
    p = write_json(out / "verify.json", rep)
    print(f"{'all criteria passed' if results['all_passed'] else 'FAILED: ' + ', '.join(results['failed'])}"
          f"; wrote {p}")
    return EXIT_OK if results["all_passed"] else EXIT_VERIFY


COMMANDS = {
    "stationary": (cmd_stationary, "sample eta and eta^- to CSV"),
    "exponents": (cmd_exponents, "extremal Lyapunov exponents by both estimators"),
    "dimension": (cmd_dimension, "local dimension, entropy and the dimension identity"),
    "entropy": (cmd_entropy, "Furstenberg entropy of the stationary measure"),
    "sync": (cmd_sync, "synchronization rate and arc dichotomy"),
    "verify": (cmd_verify, "run the acceptance criteria"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config (config set for verify)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", metavar="DIR", default=None, help="output directory")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${parallel.ENV_THREADS} or 1); "
                             "never changes results")
    p = argparse.ArgumentParser(prog="circlerds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name == "verify":
            sp.add_argument("--only", metavar="IDS", help="comma-separated criteria, e.g. c2,c6")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        parallel.set_threads(args.threads)
    try:
        return COMMANDS[args.command][0](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONV
    except HypothesisViolation as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
