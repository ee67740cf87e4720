"""The acceptance matrix: ten criteria replayed from a config set.

A config set is a TOML file with a master ``seed``, a ``[families]`` table
mapping names to experiment configs (a path relative to the set file, or an
inline table) and optional ``[criteria.cN]`` tables overriding each
criterion's parameters. Every criterion yields a JSON verdict; a crash is
reported as a failed verdict, never skipped.
"""
from __future__ import annotations

import dataclasses
import hashlib
import math
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import parallel
from .circle import Arc, dist
from .config import (ExperimentConfig, config_hash, load_section, parse_experiment, read_toml)
from .diagnostics import check_hypotheses
from .engine import NuMeasure
from .errors import CircleRDSError, ConfigError, DegenerateBall, HypothesisViolation
from .estimators import (DimensionRunConfig, EmpiricalMeasure, arc_dichotomy,
                         dimension_identity_residual, equivariance_residuals, estimate_pi,
                         estimate_theta, estimate_theta_argmax, extremal_exponents_kingman,
                         local_dimension, pi_attraction_rate, pointwise_exponents,
                         telescoping_residual)
from .maps import Projective, Rotation, SineDiffeo
from .oracle import MatrixAtomSet, normalize_unimodular, oseledets_directions, top_lyapunov


# -- criterion parameters ------------------------------------------------------

@dataclass(frozen=True)
class C1:
    family: str = "sl2_pair"
    n_steps: int = 10_000
    n_samples: int = 100
    grid: int = 64
    rel_tol: float = 0.02
    max_seconds: float = 60.0


@dataclass(frozen=True)
class C2:
    family: str = "sl2_pair"
    seeds: int = 20
    n_steps: int = 400
    probes: int = 16
    grid: int = 2048
    pi_tol: float = 1e-6
    theta_tol: float = 1e-4


@dataclass(frozen=True)
class C3:
    projective_family: str = "sl2_pair"
    projective_n_est: int = 400
    projective_tol: float = 1e-6
    nonlinear_family: str = "sine_pair"
    nonlinear_n_est: int = 2000
    nonlinear_tol: float = 1e-5
    seeds: int = 20
    n_check: int = 1


@dataclass(frozen=True)
class C4:
    family: str = "sl2_pair"
    seeds: int = 20
    min_pass: int = 19
    points: int = 64
    n_steps: int = 10_000
    finite_steps: int = 50
    theta_steps: int = 400
    lambda_samples: int = 100
    grid: int = 64
    k_sigma: float = 3.0


@dataclass(frozen=True)
class C5:
    families: tuple = ("sl2_pair", "sine_pair")
    tol: float = 0.1
    dim_max: float = 1.05
    k_sigma: float = 3.0
    max_seconds: float = 300.0


@dataclass(frozen=True)
class C6:
    family: str = "sl2_pair"
    negative_family: str = "rotations"
    x: float = 0.1
    y: float = 0.6
    n_steps: int = 500
    n_samples: int = 1000
    min_fraction: float = 0.99


@dataclass(frozen=True)
class C7:
    family: str = "sl2_pair"
    seeds: int = 10
    n_steps: int = 2000
    delta: float = 0.05
    grid: int = 4096
    margin: float = 0.05
    lambda_steps: int = 10_000
    lambda_samples: int = 100


@dataclass(frozen=True)
class C8:
    trials: int = 100
    tol: float = 1e-10
    n_synthetic: int = 100_000
    probes: int = 500
    r_min: float = 1e-4
    r_max: float = 1e-1
    n_radii: int = 12
    uniform_tol: float = 0.05
    dirac_tol: float = 0.01
    cantor_tol: float = 0.03


@dataclass(frozen=True)
class C9:
    refused: tuple = ("single_map", "inverse_pair")
    nonproximal: tuple = ("rotations",)


@dataclass(frozen=True)
class C10:
    criteria: tuple = ("c2", "c3", "c6", "c8", "c9")
    threads: tuple = (1, 2)


CRITERIA = {"c1": C1, "c2": C2, "c3": C3, "c4": C4, "c5": C5, "c6": C6, "c7": C7, "c8": C8,
            "c9": C9, "c10": C10}

TITLES = {
    "c1": "oracle exponent identity Lambda = 2 lambda_1, lambda = -2 lambda_1",
    "c2": "pi / theta agree with Oseledets directions and the argmax point",
    "c3": "equivariance f_1(pi(sigma omega)) = pi(omega), f_1(theta(omega)) = theta(sigma omega)",
    "c4": "exponent dichotomy: generic points give lambda, theta gives a large exponent",
    "c5": "dimension formula dim = -h_F / lambda",
    "c6": "arc dichotomy: one of the two arcs collapses",
    "c7": "attraction rate to pi bounded by lambda",
    "c8": "exact identities: telescoping and synthetic local dimensions",
    "c9": "hypothesis gating on negative controls",
    "c10": "determinism across thread counts",
}


def _load_criterion(cls, table, prefix):
    """Like config.load_section but list-valued fields become tuples."""
    table = dict(table)
    lists = {k: tuple(v) for k, v in table.items() if isinstance(v, list)}
    for k in lists:
        table.pop(k)
    obj = load_section(cls, table, prefix)
    names = {f.name for f in dataclasses.fields(cls)}
    for k, v in lists.items():
        if k not in names:
            raise ConfigError(f"unknown key {prefix}.{k}", f"{prefix}.{k}")
        if not isinstance(getattr(cls, k, None), tuple):
            raise ConfigError(f"{prefix}.{k} must not be a list", f"{prefix}.{k}")
    return dataclasses.replace(obj, **lists)


@dataclass(frozen=True)
class ConfigSet:
    seed: int
    families: dict
    criteria: dict
    source: str = ""

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "families": {k: v.to_dict() for k, v in sorted(self.families.items())},
            "criteria": {k: dataclasses.asdict(v) for k, v in sorted(self.criteria.items())},
        }

    def config_hash(self) -> str:
        return config_hash(self.to_dict())

    def with_seed(self, seed: int | None) -> "ConfigSet":
        if seed is None:
            return self
        fams = {k: v.with_seed(seed) for k, v in self.families.items()}
        return dataclasses.replace(self, seed=int(seed), families=fams)

    def family(self, name: str) -> ExperimentConfig:
        try:
            return self.families[name]
        except KeyError:
            raise ConfigError(f"criterion refers to unknown family {name!r}", "families") from None


def parse_config_set(data: dict, base: Path, source: str = "") -> ConfigSet:
    for key in data:
        if key not in ("seed", "families", "criteria"):
            raise ConfigError(f"unknown key {key} in config set", key)
    seed = data.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("config set needs a non-negative integer seed", "seed")
    fams_raw = data.get("families")
    if not isinstance(fams_raw, dict) or not fams_raw:
        raise ConfigError("config set needs a non-empty [families] table", "families")
    families = {}
    for name, entry in fams_raw.items():
        if isinstance(entry, str):
            body = read_toml(base / entry)
        elif isinstance(entry, dict):
            body = entry
        else:
            raise ConfigError(f"families.{name} must be a path or a table", f"families.{name}")
        body = {k: v for k, v in body.items() if k != "seed"}
        try:
            families[name] = parse_experiment(body, name=name, seed_required=False,
                                              default_seed=seed)
        except ConfigError as e:
            raise ConfigError(e.detail, f"families.{name}.{e.field}") from None
    crit_raw = data.get("criteria", {})
    if not isinstance(crit_raw, dict):
        raise ConfigError("criteria must be a table", "criteria")
    for key in crit_raw:
        if key not in CRITERIA:
            raise ConfigError(f"unknown criterion criteria.{key}", f"criteria.{key}")
    criteria = {cid: _load_criterion(cls, crit_raw.get(cid, {}), f"criteria.{cid}")
                for cid, cls in CRITERIA.items()}
    return ConfigSet(seed, families, criteria, source)


def load_config_set(path) -> ConfigSet:
    path = Path(path)
    return parse_config_set(read_toml(path), path.parent, str(path))


def default_config_path() -> Path:
    return Path(__file__).parent / "configs" / "verify.toml"


# -- helpers -------------------------------------------------------------------

def derive_seed(base: int, label: str) -> int:
    digest = hashlib.sha256(f"{base}:{label}".encode()).hexdigest()
    return int(digest[:15], 16)


class Context:
    """Per-run cache so criteria can share expensive estimates."""

    def __init__(self, cs: ConfigSet):
        self.cs = cs
        self._hyp = {}
        self._kingman = {}
        self._lam1 = {}

    def hypotheses(self, name):
        if name not in self._hyp:
            fam = self.cs.family(name)
            h = fam.hypotheses
            self._hyp[name] = check_hypotheses(
                fam.nu, derive_seed(self.cs.seed, f"hyp:{name}"), h.grid, h.tol, h.pairs,
                h.depth, h.beam, h.prox_threshold, h.sync_n, h.sync_samples)
        return self._hyp[name]

    def kingman(self, name, n, n_samples, grid):
        key = (name, n, n_samples, grid)
        if key not in self._kingman:
            self._kingman[key] = extremal_exponents_kingman(
                self.cs.family(name).nu, n, n_samples, grid,
                derive_seed(self.cs.seed, f"exp:{name}"))
        return self._kingman[key]

    def lambda1(self, name, n, n_samples):
        key = (name, n, n_samples)
        if key not in self._lam1:
            ms = normalize_unimodular(MatrixAtomSet.from_nu(self.cs.family(name).nu))
            self._lam1[key] = top_lyapunov(ms, n, n_samples, derive_seed(self.cs.seed, f"exp:{name}"))
        return self._lam1[key]


def _verdict(cid, passed, measured, thresholds, **extra):
    v = {"id": cid, "title": TITLES[cid], "passed": bool(passed), "measured": measured,
         "thresholds": thresholds}
    v.update(extra)
    return v


# -- criteria --------------------------------------------------------------------

def run_c1(ctx: Context, p: C1):
    t0 = time.perf_counter()
    lam1 = ctx.lambda1(p.family, p.n_steps, p.n_samples)
    ex = ctx.kingman(p.family, p.n_steps, p.n_samples, p.grid)
    seconds = time.perf_counter() - t0
    two = 2.0 * lam1.value
    rel_L = abs(ex.Lam - two) / two
    rel_l = abs(ex.lam + two) / two
    ok = rel_L <= p.rel_tol and rel_l <= p.rel_tol
    measured = {"lambda1": lam1.value, "lambda1_stderr": lam1.stderr, "Lambda_hat": ex.Lam,
                "lambda_hat": ex.lam, "rel_Lambda": rel_L, "rel_lambda": rel_l}
    return _verdict("c1", ok, measured, {"rel_tol": p.rel_tol, "max_seconds": p.max_seconds}), \
        {"seconds": seconds, "within_time": seconds <= p.max_seconds}


def run_c2(ctx: Context, p: C2):
    nu = ctx.cs.family(p.family).nu
    ms = MatrixAtomSet.from_nu(nu)
    rows = []
    for s in range(p.seeds):
        om = nu.stream(derive_seed(ctx.cs.seed, f"c2:{s}"))
        pi = estimate_pi(nu, om, p.n_steps, p.probes)
        th = estimate_theta(nu, om, p.n_steps, p.probes)
        am = estimate_theta_argmax(nu, om, p.n_steps, p.grid)
        od = oseledets_directions(ms, om, p.n_steps)
        d_pi = dist(pi.point, od.unstable)
        d_th = dist(th.point, am.point)
        rows.append({"seed": s, "pi_vs_unstable": d_pi, "theta_vs_argmax": d_th,
                     "theta_vs_stable": dist(th.point, od.stable), "argmax_degenerate": am.degenerate,
                     "passed": d_pi <= p.pi_tol and d_th <= p.theta_tol and not am.degenerate})
    ok = all(r["passed"] for r in rows)
    measured = {"max_pi_vs_unstable": max(r["pi_vs_unstable"] for r in rows),
                "max_theta_vs_argmax": max(r["theta_vs_argmax"] for r in rows),
                "passing_seeds": sum(r["passed"] for r in rows), "per_seed": rows}
    return _verdict("c2", ok, measured, {"pi_tol": p.pi_tol, "theta_tol": p.theta_tol,
                                         "seeds": p.seeds}), {}


def run_c3(ctx: Context, p: C3):
    out = {}
    ok = True
    for label, fam, n_est, tol in (("projective", p.projective_family, p.projective_n_est,
                                    p.projective_tol),
                                   ("nonlinear", p.nonlinear_family, p.nonlinear_n_est,
                                    p.nonlinear_tol)):
        nu = ctx.cs.family(fam).nu
        worst = 0.0
        for s in range(p.seeds):
            om = nu.stream(derive_seed(ctx.cs.seed, f"c3:{label}:{s}"))
            pr, tr = equivariance_residuals(nu, om, p.n_check, n_est)
            worst = max(worst, pr, tr)
        out[label] = {"family": fam, "max_residual": worst, "tol": tol, "passed": worst <= tol}
        ok &= worst <= tol
    return _verdict("c3", ok, out, {"projective_tol": p.projective_tol,
                                    "nonlinear_tol": p.nonlinear_tol, "seeds": p.seeds}), {}


def run_c4(ctx: Context, p: C4):
    nu = ctx.cs.family(p.family).nu
    ex = ctx.kingman(p.family, p.n_steps, p.lambda_samples, p.grid)
    band = p.k_sigma * math.hypot(ex.lam_sd, ex.lam_stderr)
    mid = ex.lam + 0.5 * (ex.Lam - ex.lam)
    rows = []
    for s in range(p.seeds):
        seed = derive_seed(ctx.cs.seed, f"c4:{s}")
        om = nu.stream(seed)
        xs = np.random.default_rng(seed).random(p.points)
        th = estimate_theta(nu, om, p.theta_steps).point.value
        xs = xs[np.abs(xs - th) > 1e-9]
        pe = pointwise_exponents(nu, om, xs, p.n_steps)
        at_theta = float(pointwise_exponents(nu, om, [th], p.finite_steps)[0])
        generic_worst = float(np.max(np.abs(pe - ex.lam)))
        passed = generic_worst <= band and at_theta > mid
        rows.append({"seed": s, "generic_max_dev": generic_worst, "theta_exponent": at_theta,
                     "passed": passed})
    n_pass = sum(r["passed"] for r in rows)
    measured = {"lambda_hat": ex.lam, "Lambda_hat": ex.Lam, "band": band, "midpoint": mid,
                "passing_seeds": n_pass, "per_seed": rows}
    return _verdict("c4", n_pass >= p.min_pass, measured,
                    {"min_pass": p.min_pass, "seeds": p.seeds, "k_sigma": p.k_sigma}), {}


def run_c5(ctx: Context, p: C5):
    t0 = time.perf_counter()
    out = {}
    ok = True
    for name in p.families:
        fam = ctx.cs.family(name)
        runs = DimensionRunConfig(
            n_steps=fam.stationary.n_steps, n_samples=fam.stationary.n_samples,
            seed=derive_seed(ctx.cs.seed, f"c5:{name}"), entropy_radius=fam.entropy.radius,
            entropy_draws=fam.entropy.draws, target_count=fam.entropy.target_count,
            probes=fam.dimension.probes, r_min=fam.dimension.r_min, r_max=fam.dimension.r_max,
            n_radii=fam.dimension.n_radii)
        res = dimension_identity_residual(nu=fam.nu, runs=runs, hypotheses=ctx.hypotheses(name))
        h, lam, dim = res.entropy, res.lyapunov, res.dimension
        bound_se = math.hypot(h.stderr, lam.stderr)
        checks = {
            "residual": res.residual <= p.tol,
            "entropy_bound": h.value <= -lam.value + p.k_sigma * bound_se,
            "dim_range": 0.0 < dim.value <= p.dim_max,
        }
        out[name] = {"dimension": dim.value, "dimension_stderr": dim.stderr,
                     "dimension_spread": dim.diagnostics["spread"], "entropy": h.value,
                     "entropy_stderr": h.stderr, "entropy_radius": h.diagnostics["radius"],
                     "entropy_drift_half_radius": h.diagnostics.get("drift_half_radius"),
                     "lambda": lam.value, "lambda_stderr": lam.stderr, "formula": res.formula,
                     "residual": res.residual, "checks": checks, "passed": all(checks.values())}
        ok &= all(checks.values())
    seconds = time.perf_counter() - t0
    return _verdict("c5", ok, out, {"tol": p.tol, "dim_max": p.dim_max,
                                    "max_seconds": p.max_seconds}), \
        {"seconds": seconds, "within_time": seconds <= p.max_seconds}


def run_c6(ctx: Context, p: C6):
    seed = derive_seed(ctx.cs.seed, "c6")
    frac = arc_dichotomy(ctx.cs.family(p.family).nu, p.x, p.y, p.n_steps, p.n_samples, seed)
    neg = arc_dichotomy(ctx.cs.family(p.negative_family).nu, p.x, p.y, p.n_steps, p.n_samples,
                        seed)
    controls = [{"family": p.negative_family, "check": "arc_dichotomy", "fraction": neg,
                 "outcome": "expected-fail", "passed": neg == 0.0}]
    ok = frac >= p.min_fraction and neg == 0.0
    return _verdict("c6", ok, {"fraction": frac, "negative_fraction": neg},
                    {"min_fraction": p.min_fraction, "negative_fraction": 0.0},
                    negative_controls=controls), {}


def run_c7(ctx: Context, p: C7):
    nu = ctx.cs.family(p.family).nu
    ex = ctx.kingman(p.family, p.lambda_steps, p.lambda_samples, ctx.cs.criteria["c1"].grid)
    hyp = ctx.hypotheses(p.family)
    rates = []
    for s in range(p.seeds):
        om = nu.stream(derive_seed(ctx.cs.seed, f"c7:{s}"))
        rates.append(pi_attraction_rate(nu, om, p.delta, p.n_steps, p.grid, hypotheses=hyp))
    bound = ex.lam + p.margin
    ok = all(r <= bound for r in rates)
    return _verdict("c7", ok, {"rates": rates, "max_rate": max(rates), "lambda_hat": ex.lam},
                    {"bound": bound, "margin": p.margin}), {}


def _random_map(rng):
    kind = rng.integers(3)
    if kind == 0:
        return Rotation(rng.random())
    if kind == 1:
        m = rng.normal(size=(2, 2))
        while abs(np.linalg.det(m)) < 0.1:
            m = rng.normal(size=(2, 2))
        return Projective.from_matrix(m)
    return SineDiffeo(rng.random(), rng.uniform(-0.9, 0.9))


def synthetic_measures(n: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    digits = rng.integers(0, 2, size=(n, 34)) * 2
    # halved so that 0 and 1, both in the Cantor set, are not glued together on R/Z
    cantor = 0.5 * (digits * (3.0 ** -np.arange(1, 35))).sum(axis=1)
    return {
        "uniform": EmpiricalMeasure(rng.random(n)),
        "dirac": EmpiricalMeasure(np.full(n, 0.3)),
        "cantor": EmpiricalMeasure(cantor),
    }


def run_c8(ctx: Context, p: C8):
    rng = np.random.default_rng(derive_seed(ctx.cs.seed, "c8"))
    worst = 0.0
    for _ in range(p.trials):
        size = int(rng.integers(100, 10_000))
        samples = rng.random(size) ** rng.uniform(0.5, 3.0)
        eta = EmpiricalMeasure(samples)
        maps = [_random_map(rng) for _ in range(int(rng.integers(1, 8)))]
        for _ in range(100):
            a = rng.random()
            arc = Arc(a, a + rng.uniform(0.05, 0.9))
            try:
                worst = max(worst, telescoping_residual(eta, maps, arc))
                break
            except DegenerateBall:
                continue
    synth = synthetic_measures(p.n_synthetic, derive_seed(ctx.cs.seed, "c8:synth"))
    expect = {"uniform": (1.0, p.uniform_tol), "dirac": (0.0, p.dirac_tol),
              "cantor": (math.log(2) / math.log(3), p.cantor_tol)}
    dims = {}
    ok = worst <= p.tol
    for name, eta in synth.items():
        d = local_dimension(eta, p.probes, p.r_min, p.r_max, p.n_radii,
                            derive_seed(ctx.cs.seed, f"c8:{name}"))
        target, tol = expect[name]
        passed = abs(d.value - target) <= tol
        dims[name] = {"value": d.value, "target": target, "tol": tol, "passed": passed}
        ok &= passed
    return _verdict("c8", ok, {"telescoping_max_residual": worst, "dimensions": dims},
                    {"telescoping_tol": p.tol}), {}


def run_c9(ctx: Context, p: C9):
    controls = []
    for name in p.refused:
        fam = ctx.cs.family(name)
        hyp = ctx.hypotheses(name)
        outcome = {}
        for label, call in (
                ("dimension_identity_residual",
                 lambda: dimension_identity_residual(fam.nu, hypotheses=hyp)),
                ("pi_attraction_rate",
                 lambda: pi_attraction_rate(fam.nu, fam.nu.stream(0), 0.1, 200, hypotheses=hyp))):
            try:
                call()
                outcome[label] = "ran"
            except HypothesisViolation:
                outcome[label] = "refused"
        refused = all(v == "refused" for v in outcome.values())
        controls.append({"family": name, "check": "hypothesis_gating", "outcome": "expected-fail",
                         "reasons": list(hyp.reasons), "calls": outcome, "passed": refused})
    for name in p.nonproximal:
        fam = ctx.cs.family(name)
        hyp = ctx.hypotheses(name)
        failed = hyp.proximality_min_gap > fam.hypotheses.prox_threshold
        controls.append({"family": name, "check": "proximality", "outcome": "expected-fail",
                         "proximality_min_gap": hyp.proximality_min_gap,
                         "passed": failed and not hyp.passed})
    ok = all(c["passed"] for c in controls)
    return _verdict("c9", ok, {"controls": len(controls)}, {}, negative_controls=controls), {}


def run_c10(ctx: Context, p: C10):
    from .report import dumps

    prev = parallel.get_threads()
    blobs = {}
    try:
        for t in p.threads:
            parallel.set_threads(int(t))
            sub = Context(ctx.cs)
            res = {cid: RUNNERS[cid](sub, ctx.cs.criteria[cid])[0] for cid in p.criteria}
            blobs[int(t)] = dumps(res)
    finally:
        parallel.set_threads(prev)
    ref = blobs[int(p.threads[0])]
    same = {str(t): b == ref for t, b in blobs.items()}
    digests = {str(t): hashlib.sha256(b.encode()).hexdigest()[:16] for t, b in blobs.items()}
    return _verdict("c10", all(same.values()), {"identical": same, "digests": digests},
                    {"threads": list(p.threads), "criteria": list(p.criteria)}), {}


RUNNERS = {"c1": run_c1, "c2": run_c2, "c3": run_c3, "c4": run_c4, "c5": run_c5, "c6": run_c6,
           "c7": run_c7, "c8": run_c8, "c9": run_c9, "c10": run_c10}


def run_criterion(ctx: Context, cid: str):
    """Verdict and timing for one criterion; exceptions become failed verdicts."""
    t0 = time.perf_counter()
    try:
        verdict, timing = RUNNERS[cid](ctx, ctx.cs.criteria[cid])
    except (CircleRDSError, ValueError, RuntimeError, ArithmeticError) as e:
        verdict = _verdict(cid, False, {}, {}, error=f"{type(e).__name__}: {e}",
                           traceback=traceback.format_exc(limit=3).splitlines()[-3:])
        timing = {}
    timing = dict(timing)
    timing["elapsed_s"] = round(time.perf_counter() - t0, 3)
    if "within_time" in timing and not timing["within_time"]:
        verdict["passed"] = False
        verdict["error"] = f"runtime {timing['seconds']:.1f}s over budget"
    return verdict, timing


def run_verify(cs: ConfigSet, only=None, progress=None) -> tuple[dict, dict]:
    """Run the selected criteria; returns ``(results, timing)``."""
    ctx = Context(cs)
    ids = list(CRITERIA) if not only else list(only)
    verdicts, timing = {}, {}
    for cid in ids:
        if cid not in CRITERIA:
            raise ConfigError(f"unknown criterion {cid!r}", "criteria")
        verdicts[cid], timing[cid] = run_criterion(ctx, cid)
        if progress is not None:
            progress(cid, verdicts[cid], timing[cid])
    results = {"criteria": verdicts, "all_passed": all(v["passed"] for v in verdicts.values()),
               "failed": [cid for cid, v in verdicts.items() if not v["passed"]]}
    return results, timing
