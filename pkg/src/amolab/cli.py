"""Command-line front end.

Every run resolves to a RunConfig; identical configs produce byte-identical
JSON/CSV artifacts (fixed chunking, ordered reductions, repr-formatted
floats), independent of the worker count.  Exit codes: 0 success, 2 refuted
certificate, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, certify, cf, cocycle, freq, kernels, spectrum
from .errors import AmolabError, ConfigInvalid

_CHUNK = 2048  # fixed work-splitting unit so results never depend on workers


@dataclass
class RunConfig:
    """Complete, serializable description of one run."""

    command: str
    params: dict
    out_dir: str = "."
    workers: int = 0  # 0 = AMOLAB_WORKERS or 1
    precision: str = "double"
    dps: int = 50
    seed: int = 20240501

    def resolved_workers(self):
        if self.workers > 0:
            return self.workers
        env = os.environ.get("AMOLAB_WORKERS", "")
        return int(env) if env.isdigit() and int(env) > 0 else 1

    def to_json(self):
        return {
            "command": self.command,
            "params": self.params,
            "out_dir": self.out_dir,
            "workers": self.workers,
            "precision": self.precision,
            "dps": self.dps,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)

    def validate(self):
        if self.precision not in ("double", "extended", "bigfloat"):
            raise ConfigInvalid(f"precision must be double|extended|bigfloat, got {self.precision}")
        if self.dps < 10:
            raise ConfigInvalid("dps must be at least 10")
        if self.workers < 0:
            raise ConfigInvalid("workers must be nonnegative")
        return self

    def precision_obj(self):
        return cocycle.Precision(self.precision, self.dps)


class _Pool:
    """Order-preserving chunk mapper; chunking never depends on the pool size."""

    def __init__(self, workers):
        self.workers = max(1, workers)

    def map(self, fn, items):
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            return list(ex.map(fn, items))


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _json_default(x):
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON-serializable: {type(x).__name__}")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def parse_alpha(text):
    """Frequency from a CLI token.

    Accepted: "golden", "silver" (sqrt(2)-1), "cf:a1,a2,...[+ones]",
    a decimal/fraction literal, or a path to a ContinuedFraction /
    FrequencySpec JSON file.
    """
    if text == "golden":
        return cf.golden_mean()
    if text == "silver":
        return cf.ContinuedFraction((), cf.TailRule("constant", (2,)))
    if text.startswith("cf:"):
        body = text[3:]
        tail = None
        if body.endswith("+ones"):
            body = body[: -len("+ones")]
            tail = cf.TAIL_ONES
        quotients = tuple(int(a) for a in body.split(",") if a)
        return cf.ContinuedFraction(quotients, tail)
    p = Path(text)
    if p.suffix == ".json" and p.exists():
        obj = json.loads(p.read_text())
        if "construction" in obj:
            return freq.FrequencySpec.from_json(obj)
        return cf.ContinuedFraction.from_json(obj)
    return cf.as_fraction(text)


def _parse_energies(token, lam, alpha, count_default=5):
    """Energy list: "a,b,c" literals or "auto[:count[:q_cap]]" from bands."""
    if not token.startswith("auto"):
        return [float(x) for x in token.split(",")], None
    parts = token.split(":")
    count = int(parts[1]) if len(parts) > 1 else count_default
    q_cap = int(parts[2]) if len(parts) > 2 else 200
    p, q = _approximant(alpha, q_cap)
    spec = spectrum.spectrum_approx(lam, p, q, 32)
    return spectrum.band_energies(spec, per_band=1, count=count), spec


def _approximant(alpha, q_cap):
    if isinstance(alpha, freq.FrequencySpec):
        cfo, _ = alpha.materialize(alpha.max_materializable_depth())
    elif isinstance(alpha, cf.ContinuedFraction):
        cfo = alpha
    else:
        cfo = cf.expand(cf.as_fraction(alpha), 60)
    best = None
    k = 1
    while cfo.available(k) and k <= 120:
        c = cfo.convergent(k)
        if c.q > q_cap:
            break
        best = c
        k += 1
    if best is None:
        raise ConfigInvalid(f"no convergent under q_cap={q_cap}")
    return best.p, best.q


# -- subcommand runners ---------------------------------------------------------


def _run_cf(config, out):
    p = config.params
    mode = p["mode"]
    alpha = parse_alpha(p["alpha"])
    summary = {}
    files = []
    if mode == "expand":
        expansion = cf.expand(cf.as_fraction(p["value"]), int(p.get("terms", 30)),
                              cf.as_fraction(p.get("radius", 0)))
        summary["quotients"] = [str(a) for a in expansion.quotients]
    elif mode == "convergents":
        n = int(p.get("terms", 20))
        if isinstance(alpha, freq.FrequencySpec):
            alpha, _ = alpha.materialize(min(n, alpha.max_materializable_depth()))
        n = alpha.depth_limit(n)
        rows = [[c.k, str(c.p), str(c.q)] for c in alpha.convergents(n)]
        path = out / "convergents.csv"
        _write_csv(path, ["k", "p", "q"], rows)
        files.append(str(path))
        summary["count"] = n
    elif mode == "beta":
        stage = int(p.get("stage", 10))
        if isinstance(alpha, freq.FrequencySpec):
            est = alpha.beta_estimate(stage)
        else:
            est = cf.beta_estimate(alpha, stage, int(p["depth"]) if "depth" in p else None)
        summary.update({"stage": est.stage, "value": est.value,
                        "rule_limit": est.rule_limit, "window": list(est.window)})
    else:
        raise ConfigInvalid(f"unknown cf mode {mode!r}")
    return summary, files, 0


def _run_synth(config, out):
    p = config.params
    kind = p["kind"]
    base = parse_alpha(p.get("base", "golden"))
    if not isinstance(base, cf.ContinuedFraction):
        raise ConfigInvalid("synth base must be a continued fraction")
    budget = int(p.get("digit_budget", freq.DEFAULT_DIGIT_BUDGET))
    if kind == "construct-prime":
        spec = freq.construct_prime(base, Fraction(p["eps"]), Fraction(p["beta"]),
                                    int(p["K"]), int(p.get("stages", 3)), budget)
    elif kind == "sc-ladder":
        idx = [int(x) for x in str(p["stage_indices"]).split(",")]
        spec = freq.sc_ladder(base, Fraction(p["lam"]), Fraction(p["eps"]), idx,
                              digit_budget=budget)
    elif kind == "pp-ladder":
        idx = [int(x) for x in str(p["stage_indices"]).split(",")]
        spec = freq.pp_ladder(base, Fraction(p["lam"]), Fraction(p["delta0"]), idx,
                              digit_budget=budget)
    else:
        raise ConfigInvalid(f"unknown synth kind {kind!r}")
    path = out / "frequency_spec.json"
    _write_json(path, spec.to_json())
    summary = {
        "construction": spec.construction,
        "rule_limit_beta": spec.rule_limit_beta,
        "insertions": [
            {"index": e.index, "beta": e.beta, "symbolic": e.symbolic,
             "quotient_digits": None if e.quotient is None else len(str(e.quotient))}
            for e in spec.entries
        ],
    }
    return summary, [str(path)], 0


def _run_spectrum(config, out):
    p = config.params
    lam = float(p["lam"])
    grid = int(p.get("theta_grid", 64))
    if p.get("q_max"):
        # butterfly-style sweep: one row per band of every reduced p/q
        rows = []
        for q in range(1, int(p["q_max"]) + 1):
            for num in range(0, q):
                if math.gcd(num, q) != 1 and not (num == 0 and q == 1):
                    continue
                s = spectrum.spectrum_approx(lam, num, q, grid)
                rows.extend([num, q, a, b] for a, b in s.bands)
        path = out / "butterfly.csv"
        _write_csv(path, ["p", "q", "E_lo", "E_hi"], rows)
        return {"rows": len(rows), "q_max": int(p["q_max"])}, [str(path)], 0
    spec = spectrum.spectrum_approx(lam, int(p["p"]), int(p["q"]), grid)
    path = out / "bands.csv"
    _write_csv(path, ["E_lo", "E_hi"], [[a, b] for a, b in spec.bands])
    summary = {"bands": len(spec.bands), "fatten": spec.fatten,
               "approx_error": spec.approx_error, "lo": spec.lo, "hi": spec.hi,
               "trace_agreement": spectrum.validate_bands(spec)}
    return summary, [str(path)], 0


def _run_lyapunov(config, out, pool):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    energies, _ = _parse_energies(str(p.get("energies", "auto")), lam, alpha)
    n = int(p.get("steps", 10000))
    samples = int(p.get("theta_samples", 32))
    prec = config.precision_obj()

    def work(E):
        return cocycle.lyapunov(lam, alpha, E, n, samples, prec)

    results = pool.map(work, energies)
    path = out / "lyapunov.csv"
    thetas = (np.arange(samples) + 0.31) / samples
    rows = []
    for e, r in zip(energies, results):
        rows.extend([t, e, v, r.spread] for t, v in zip(thetas, r.per_theta))
    _write_csv(path, ["theta", "E", "value", "spread"], rows)
    summary = {"mean": float(np.mean([r.value for r in results])),
               "per_energy": [r.value for r in results],
               "ln_lam": math.log(lam) if lam > 0 else None,
               "energies": list(map(float, energies))}
    return summary, [str(path)], 0


def _run_rotation(config, out, pool):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    grid = int(p.get("e_grid", 200))
    e_lo = float(p.get("e_min", -(2 + 2 * lam) - 0.2))
    e_hi = float(p.get("e_max", (2 + 2 * lam) + 0.2))
    energies = np.linspace(e_lo, e_hi, grid)
    n = int(p.get("steps", 20000))
    averaging = p.get("averaging", "weighted")

    chunks = [energies[i:i + _CHUNK] for i in range(0, grid, _CHUNK)]
    results = []
    for part in pool.map(lambda ch: cocycle.rotation_sweep(lam, alpha, ch, 0.0, n, averaging), chunks):
        results.extend(part)
    path = out / "rotation.csv"
    _write_csv(path, ["E", "rho", "error", "converged"],
               [[e, r.value, r.error_estimate, r.converged] for e, r in zip(energies, results)])
    viol = sum(1 for a, b in zip(results, results[1:])
               if b.value - a.value > 3 * (a.error_estimate + b.error_estimate)
               and not (a.value < 0.25 and b.value > 0.75))
    summary = {"points": grid, "nonincreasing_violations": viol}
    return summary, [str(path)], 0


def _run_telescope(config, out, pool):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    q_n = int(p["qn"])
    grid = int(p.get("theta_grid", 256))
    energies, _ = _parse_energies(str(p.get("energies", "auto")), lam, alpha)
    beta = float(p["beta"]) if "beta" in p else None
    eps = float(p.get("eps", 0.1))
    prec = config.precision_obj()

    def work(E):
        return cocycle.telescoping_gap(lam, alpha, E, q_n, grid, prec)

    gaps = pool.map(work, energies)
    bound = cocycle.telescope_bound(beta, lam, eps, q_n) if beta is not None else None
    path = out / "telescope.csv"
    _write_csv(path, ["E", "sup_plus", "sup_minus"],
               [[e, g.sup_plus, g.sup_minus] for e, g in zip(energies, gaps)])
    worst = max(max(g.sup_plus, g.sup_minus) for g in gaps)
    summary = {"worst_gap": worst, "bound": bound,
               "under_bound": None if bound is None else bool(worst <= bound)}
    return summary, [str(path)], 0


def _run_badness(config, out, pool):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    C = float(p["C"])
    N = int(p["N"])
    theta_grid = int(p.get("theta_grid", 256))
    e_per_band = int(p.get("e_per_band", 64))
    if "energies" in p:
        energies = [float(x) for x in str(p["energies"]).split(",")]
        spec_approx = None
    else:
        energies = None
        q_cap = int(p.get("q_cap", 200))
        pq = _approximant(alpha, q_cap)
        spec_approx = spectrum.spectrum_approx(lam, pq[0], pq[1], 32)
    cert = certify.badness_scan(lam, alpha, C, N, spec_approx, theta_grid,
                                e_per_band, E_list=energies, map_fn=pool.map)
    path = out / "badness_certificate.json"
    _write_json(path, cert.to_json())
    summary = {"verdict": cert.verdict, "min_value": cert.min_value,
               "C_squared": C * C, "witness": cert.witness,
               "escalated": cert.escalated_points}
    return summary, [str(path)], 2 if cert.refuted else 0


def _run_gordon(config, out):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    q_n = int(p["qn"])
    energies, _ = _parse_energies(str(p.get("energies", "auto")), lam, alpha)
    n_samples = int(p.get("samples", 1000))
    beta = float(p["beta"]) if "beta" in p else None
    eps = float(p.get("eps", 0.15))
    reports, min_max = certify.gordon_sweep(lam, alpha, q_n, energies, n_samples,
                                            config.seed, beta, eps)
    path = out / "gordon.csv"
    _write_csv(path, ["theta", "E", "q_n", "norm_plus", "norm_minus", "norm_double",
                      "trace", "case", "hypothesis_ok", "bound_ok"],
               [r.to_row() for r in reports])
    summary = {"min_max_norm": min_max, "samples": n_samples,
               "bound_ok_all": all(r.bound_ok for r in reports if r.bound_ok is not None)}
    return summary, [str(path)], 0


def _run_decay(config, out):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    theta = float(p.get("theta", 0.2))
    fits = certify.decay_rate(lam, alpha, theta,
                              int(p.get("half_width", 1000)), int(p.get("count", 10)))
    path = out / "decay.csv"
    _write_csv(path, ["E", "rate", "residual", "center", "boundary_mass"],
               [[f.E, f.rate, f.residual, f.center, f.boundary_mass] for f in fits])
    target = -math.log(lam)
    summary = {"target_rate": target,
               "rates": [f.rate for f in fits],
               "max_rel_dev": max(abs(f.rate - target) / abs(target) for f in fits) if fits else None}
    return summary, [str(path)], 0


def _run_cohom(config, out):
    p = config.params
    alpha = parse_alpha(p["alpha"])
    if "coeffs" in p:
        raw = json.loads(Path(p["coeffs"]).read_text())
        coeffs = {int(k): complex(v[0], v[1]) for k, v in raw.items()}
    else:
        cutoff = int(p.get("cutoff", 1))
        coeffs = {k: 1.0 / (1 + abs(k)) ** 2 for k in range(-cutoff, cutoff + 1) if k != 0}
        if p.get("example") == "cos":
            coeffs = {1: 0.5, -1: 0.5}
    sol = certify.cohom_solve(coeffs, alpha, int(p.get("grid", 4096)))
    path = out / "cohom.json"
    _write_json(path, sol.to_json())
    summary = {"residual_sup": sol.residual_sup,
               "min_denominator_k": sol.min_denominator[0],
               "min_denominator": sol.min_denominator[1]}
    return summary, [str(path)], 0


def _run_drho(config, out):
    p = config.params
    lam = float(p["lam"])
    alpha = parse_alpha(p["alpha"])
    grid = int(p.get("e_grid", 200))
    e_lo = float(p.get("e_min", -(2 + 2 / lam) - 0.2))
    e_hi = float(p.get("e_max", (2 + 2 / lam) + 0.2))
    rep = certify.rotation_derivative_check(lam, alpha, np.linspace(e_lo, e_hi, grid),
                                            int(p.get("steps", 30000)),
                                            slack=float(p.get("slack", 1e-2)))
    path = out / "drho.csv"
    _write_csv(path, ["E", "rho", "slope", "monotone", "satisfies_bound"], rep.to_rows())
    summary = {"monotone_interior": rep.monotone_interior, "satisfied": rep.satisfied,
               "fraction": rep.fraction, "nonincreasing_ok": rep.nonincreasing_ok,
               "bound": certify.DRHO_BOUND}
    return summary, [str(path)], 0


def _run_bench(config, out):
    from .benchmark import run_benchmark

    table = run_benchmark(sizes=config.params.get("sizes"))
    for line in table:
        print(line)
    return {"backends": list(kernels.backends())}, [], 0


_RUNNERS = {
    "cf": lambda cfg, out, pool: _run_cf(cfg, out),
    "synth": lambda cfg, out, pool: _run_synth(cfg, out),
    "spectrum": lambda cfg, out, pool: _run_spectrum(cfg, out),
    "lyapunov": _run_lyapunov,
    "rotation": _run_rotation,
    "telescope": _run_telescope,
    "badness": _run_badness,
    "gordon": lambda cfg, out, pool: _run_gordon(cfg, out),
    "decay": lambda cfg, out, pool: _run_decay(cfg, out),
    "cohom": lambda cfg, out, pool: _run_cohom(cfg, out),
    "drho": _run_drho,
    "bench": lambda cfg, out, pool: _run_bench(cfg, out),
}


def run(config: RunConfig):
    """Dispatch one validated RunConfig; returns the exit status."""
    config.validate()
    if config.command not in _RUNNERS:
        raise ConfigInvalid(f"unknown command {config.command!r}")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pool = _Pool(config.resolved_workers())
    summary, files, status = _RUNNERS[config.command](config, out, pool)
    payload = {
        "config": config.to_json(),
        "backend": kernels.backend_name(),
        "version": __version__,
        "results": summary,
        "outputs": [Path(f).name for f in files],
        "status": status,
    }
    _write_json(out / "summary.json", payload)
    return status


def _add_common(sp):
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--workers", type=int, default=0)
    sp.add_argument("--precision", default="double",
                    choices=["double", "extended", "bigfloat"])
    sp.add_argument("--dps", type=int, default=50)
    sp.add_argument("--seed", type=int, default=20240501)
    sp.add_argument("--config", default=None, help="JSON RunConfig to merge")


def build_parser():
    ap = argparse.ArgumentParser(prog="amolab",
                                 description="almost Mathieu operator laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cf", help="continued-fraction utilities")
    s.add_argument("mode", choices=["expand", "convergents", "beta"])
    s.add_argument("--alpha", default="golden")
    s.add_argument("--value", default="0.5")
    s.add_argument("--radius", default="0")
    s.add_argument("--terms", type=int, default=20)
    s.add_argument("--stage", type=int, default=10)
    s.add_argument("--depth", type=int, default=None)
    _add_common(s)

    s = sub.add_parser("synth", help="frequency constructions")
    s.add_argument("kind", choices=["construct-prime", "sc-ladder", "pp-ladder"])
    s.add_argument("--base", default="golden")
    s.add_argument("--eps", default="0.25")
    s.add_argument("--beta", default="1")
    s.add_argument("--K", type=int, default=4)
    s.add_argument("--stages", type=int, default=3)
    s.add_argument("--lam", default="2")
    s.add_argument("--delta0", default="0.2")
    s.add_argument("--stage-indices", dest="stage_indices", default="4,9")
    s.add_argument("--digit-budget", dest="digit_budget", type=int,
                   default=freq.DEFAULT_DIGIT_BUDGET)
    _add_common(s)

    s = sub.add_parser("spectrum", help="rational-approximant band structure")
    s.add_argument("--lam", required=True)
    s.add_argument("--p", type=int, default=None)
    s.add_argument("--q", type=int, default=None)
    s.add_argument("--q-max", dest="q_max", type=int, default=None,
                   help="butterfly sweep over all reduced p/q up to this q")
    s.add_argument("--theta-grid", dest="theta_grid", type=int, default=64)
    _add_common(s)

    s = sub.add_parser("lyapunov", help="Lyapunov exponent estimates")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", default="golden")
    s.add_argument("--energies", default="auto:5")
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--theta-samples", dest="theta_samples", type=int, default=32)
    _add_common(s)

    s = sub.add_parser("rotation", help="fibered rotation number sweep")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", default="golden")
    s.add_argument("--e-min", dest="e_min", default=None)
    s.add_argument("--e-max", dest="e_max", default=None)
    s.add_argument("--e-grid", dest="e_grid", type=int, default=200)
    s.add_argument("--steps", type=int, default=20000)
    s.add_argument("--averaging", default="weighted", choices=["plain", "weighted"])
    _add_common(s)

    s = sub.add_parser("telescope", help="near-repetition gap diagnostics")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--qn", type=int, required=True)
    s.add_argument("--theta-grid", dest="theta_grid", type=int, default=256)
    s.add_argument("--energies", default="auto:5")
    s.add_argument("--beta", default=None)
    s.add_argument("--eps", default="0.1")
    _add_common(s)

    s = sub.add_parser("badness", help="window-mass certificates")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", default="golden")
    s.add_argument("--C", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--theta-grid", dest="theta_grid", type=int, default=256)
    s.add_argument("--e-per-band", dest="e_per_band", type=int, default=64)
    s.add_argument("--energies", default=None)
    s.add_argument("--q-cap", dest="q_cap", type=int, default=200)
    _add_common(s)

    s = sub.add_parser("gordon", help="three-norm trace-test sweep")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--qn", type=int, required=True)
    s.add_argument("--energies", default="auto:5")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--beta", default=None)
    s.add_argument("--eps", default="0.15")
    _add_common(s)

    s = sub.add_parser("decay", help="eigenfunction decay-rate fits")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", default="golden")
    s.add_argument("--theta", default="0.2")
    s.add_argument("--half-width", dest="half_width", type=int, default=1000)
    s.add_argument("--count", type=int, default=10)
    _add_common(s)

    s = sub.add_parser("cohom", help="cohomological-equation solver")
    s.add_argument("--alpha", default="golden")
    s.add_argument("--coeffs", default=None, help="JSON file {k: [re, im]}")
    s.add_argument("--example", default=None, choices=[None, "cos"])
    s.add_argument("--cutoff", type=int, default=1)
    s.add_argument("--grid", type=int, default=4096)
    _add_common(s)

    s = sub.add_parser("drho", help="rotation-number derivative bound")
    s.add_argument("--lam", required=True)
    s.add_argument("--alpha", default="golden")
    s.add_argument("--e-min", dest="e_min", default=None)
    s.add_argument("--e-max", dest="e_max", default=None)
    s.add_argument("--e-grid", dest="e_grid", type=int, default=200)
    s.add_argument("--steps", type=int, default=30000)
    s.add_argument("--slack", default="0.01")
    _add_common(s)

    s = sub.add_parser("bench", help="compare kernel backends")
    s.add_argument("--sizes", default=None)
    _add_common(s)

    return ap


_COMMON_KEYS = {"out", "workers", "precision", "dps", "seed", "config", "command"}


def config_from_args(args):
    ns = vars(args)
    params = {k: v for k, v in ns.items() if k not in _COMMON_KEYS and v is not None}
    cfg = RunConfig(
        command=ns["command"],
        params=params,
        out_dir=ns.get("out", "."),
        workers=ns.get("workers", 0),
        precision=ns.get("precision", "double"),
        dps=ns.get("dps", 50),
        seed=ns.get("seed", 20240501),
    )
    if ns.get("config"):
        base = json.loads(Path(ns["config"]).read_text())
        merged = RunConfig.from_json(base)
        merged.params.update(cfg.params)
        merged.command = cfg.command
        merged.out_dir = cfg.out_dir if cfg.out_dir != "." else merged.out_dir
        cfg = merged
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        return run(cfg)
    except (AmolabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
