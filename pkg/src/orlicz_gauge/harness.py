"""Empirical best-constant estimation and experiment orchestration.

An experiment evaluates one of the gauge inequalities over a deterministic
test family, reports the largest ratio (an empirical lower bound for the
true constant), repeats on nested windows for divergence diagnostics, and
cross-checks the verdict of the matching condition checker when one applies.
Identical config and seed reproduce reports bitwise.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .numerics import cell_midpoints, fsum, merge_edges
from .space import (
    DEFAULT_CELLS,
    DEFAULT_WINDOW,
    GridFunction,
    default_edges,
    integrate,
    maximal,
    rearrange,
)
from .gauges import GaugeSpec, gauge_norm
from .kernels import KernelGrid, apply, make_kernel
from .conditions import (
    ConditionReport,
    hardy_avg_check,
    hlp_check,
    homogeneous_check,
    kantorovich_mixed_norm,
    nested_windows,
    power_case_check,
    radial_check,
    rearranged_check,
)
from .specs import (
    SpecError,
    parse_kernel_spec,
    parse_nfunction_spec,
    parse_weight_spec,
)

INEQUALITIES = ("main", "rearranged-input", "operator-gauge", "power", "homogeneous")


# ---------------------------------------------------------------------------
# the test family


def default_family(window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                   seed: int = 0, spec: dict | None = None):
    """Deterministic list of (name, GridFunction) members.

    Defaults: 12 indicators on a log grid of right endpoints, 8 truncated
    powers with exponents in [0.1, 0.9] (including the square-norm extremal
    exponent 1/2, so empirical constants approach sharp Hardy/Hilbert values
    from below), 6 exponentials, 24 seeded random step functions (half of
    them rearranged).  Counts and exponents can be overridden through the
    family spec dict.
    """
    spec = dict(spec or {})
    n_ind = int(spec.get("indicators", 12))
    n_pow = int(spec.get("powers", 8))
    n_exp = int(spec.get("exps", 6))
    n_rand = int(spec.get("randoms", 24))
    cells = int(spec.get("cells", 64))
    exps = spec.get("power_exponents")
    if exps is None:
        if n_pow == 8:
            exps = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9]
        else:
            exps = np.linspace(0.1, 0.9, n_pow) if n_pow else []
    if n_ind + n_pow + n_exp + n_rand <= 0:
        raise SpecError("family.size", "test family is empty")
    lo, hi = window
    members = []
    edges = default_edges(window, n_cells)
    mids = cell_midpoints(edges)
    for i, a in enumerate(np.geomspace(lo * 10.0, hi / 10.0, n_ind) if n_ind else []):
        members.append((f"indicator_{i}",
                        GridFunction(np.array([0.0, a]), np.array([1.0]))))
    for i, a in enumerate(exps):
        members.append((f"power_{a:g}", GridFunction(edges, mids ** (-float(a)))))
    for i, c in enumerate(np.geomspace(1e-3, 10.0, n_exp) if n_exp else []):
        members.append((f"exp_{i}", GridFunction(edges, np.exp(-c * mids))))
    rng = np.random.default_rng(seed)
    redges = default_edges(window, cells)
    for i in range(n_rand):
        g = GridFunction(redges, rng.uniform(0.0, 1.0, cells))
        if i % 2 == 1:
            members.append((f"randomstep_sorted_{i}", rearrange(g)))
        else:
            members.append((f"randomstep_{i}", g))
    return members


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    inequality: str
    kernel: str | None = None
    phi1: str = "power:p=2"
    phi2: str = "power:p=2"
    u1: str = "power_weight:alpha=0"
    u2: str = "power_weight:alpha=0"
    p: float | None = None
    q: float | None = None
    lam: float | None = None
    family: dict = field(default_factory=dict)
    grid_n: int = 1024
    window: tuple = DEFAULT_WINDOW
    windows_nested: int = 3
    seed: int = 0

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        known = {"inequality", "kernel", "phi1", "phi2", "u1", "u2", "p", "q",
                 "lambda", "family", "grid_n", "window", "windows_nested", "seed"}
        for key in raw:
            if key not in known:
                raise SpecError(key, "unknown config field")
        if "inequality" not in raw:
            raise SpecError("inequality", "missing")
        ineq = raw["inequality"]
        if ineq not in INEQUALITIES:
            raise SpecError("inequality", f"must be one of {INEQUALITIES}, got {ineq!r}")
        window = raw.get("window", list(DEFAULT_WINDOW))
        try:
            lo, hi = float(window[0]), float(window[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise SpecError("window", f"malformed window {window!r}") from exc
        if not (0.0 < lo < hi):
            raise SpecError("window", f"impossible window [{lo}, {hi}]")

        def _opt_num(key):
            if key not in raw or raw[key] is None:
                return None
            try:
                return float(raw[key])
            except (TypeError, ValueError) as exc:
                raise SpecError(key, f"malformed number {raw[key]!r}") from exc

        fam = raw.get("family", {})
        if fam is not None and not isinstance(fam, dict):
            raise SpecError("family", "family spec must be an object")
        return ExperimentConfig(
            inequality=ineq,
            kernel=raw.get("kernel"),
            phi1=raw.get("phi1", "power:p=2"),
            phi2=raw.get("phi2", "power:p=2"),
            u1=raw.get("u1", "power_weight:alpha=0"),
            u2=raw.get("u2", "power_weight:alpha=0"),
            p=_opt_num("p"),
            q=_opt_num("q"),
            lam=_opt_num("lambda"),
            family=dict(fam or {}),
            grid_n=int(raw.get("grid_n", 1024)),
            window=(lo, hi),
            windows_nested=int(raw.get("windows_nested", 3)),
            seed=int(raw.get("seed", 0)),
        )


@dataclass
class Report:
    config: dict
    members: list
    c_hat: float
    argmax_member: str | None
    per_window_c_hat: list
    windows: list
    condition: dict | None
    verdict_crosscheck: str | None
    skipped: int
    flagged_infinite: int
    runtime_seconds: float

    def to_json(self) -> str:
        def _round(x):
            if isinstance(x, float):
                return float(f"{x:.12g}") if math.isfinite(x) else repr(x)
            if isinstance(x, dict):
                return {k: _round(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [_round(v) for v in x]
            if isinstance(x, (np.floating, np.integer)):
                return _round(float(x))
            return x

        payload = {
            "config": self.config,
            "members": _round(self.members),
            "c_hat": _round(self.c_hat),
            "argmax_member": self.argmax_member,
            "per_window_c_hat": _round(self.per_window_c_hat),
            "windows": _round([list(w) for w in self.windows]),
            "condition": _round(self.condition),
            "verdict_crosscheck": self.verdict_crosscheck,
            "skipped": self.skipped,
            "flagged_infinite": self.flagged_infinite,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["member,ratio,numerator,denominator"]
        for row in self.members:
            lines.append("{},{:.12g},{:.12g},{:.12g}".format(
                row["member"], row["ratio"], row["numerator"], row["denominator"]))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# ratio pipelines


def _ratio(inequality: str, K: KernelGrid | None, f: GridFunction,
           spec1: GaugeSpec, spec2: GaugeSpec):
    """(numerator, denominator) for one family member under the inequality."""
    if inequality == "main":
        den = gauge_norm(rearrange(f), spec2).value
        num = gauge_norm(rearrange(apply(K, f)), spec1).value
    elif inequality == "rearranged-input":
        fstar = rearrange(f)
        den = gauge_norm(fstar, spec2).value
        num = gauge_norm(apply(K, fstar), spec1).value
    elif inequality in ("operator-gauge", "homogeneous"):
        den = gauge_norm(f, spec2).value
        num = gauge_norm(apply(K, f), spec1).value
    elif inequality == "power":
        den = gauge_norm(rearrange(f), spec2).value
        num = gauge_norm(rearrange(apply(K, f)), spec1).value
    else:
        raise SpecError("inequality", f"unknown inequality {inequality!r}")
    return num, den


def _gauges_for(config: ExperimentConfig, window):
    if config.inequality == "power":
        if config.p is None or config.q is None:
            raise SpecError("p", "power inequality needs p and q")
        nf1 = parse_nfunction_spec(f"power:p={config.q}", "q")
        nf2 = parse_nfunction_spec(f"power:p={config.p}", "p")
    else:
        nf1 = parse_nfunction_spec(config.phi1, "phi1")
        nf2 = parse_nfunction_spec(config.phi2, "phi2")
    w1 = parse_weight_spec(config.u1, window, DEFAULT_CELLS, "u1")
    w2 = parse_weight_spec(config.u2, window, DEFAULT_CELLS, "u2")
    return GaugeSpec(nf1, w1), GaugeSpec(nf2, w2)


def _matching_condition(config: ExperimentConfig, spec1: GaugeSpec,
                        spec2: GaugeSpec) -> ConditionReport | None:
    if config.kernel is None:
        return None
    fam = parse_kernel_spec(config.kernel, config.window, DEFAULT_CELLS, "kernel")
    tag = fam.tag
    if tag == "hardy-averaging" and config.inequality in ("rearranged-input", "main"):
        return hardy_avg_check(spec1.nf, spec1.weight, window=config.window,
                               n_windows=config.windows_nested)
    if tag in ("radial", "power-radial") and config.p and config.q:
        lam = config.lam if config.lam is not None else fam.params.get("lam")
        return radial_check(fam.profile_at, config.p, config.q, lam=lam,
                            window=config.window, n_windows=config.windows_nested)
    if tag in ("sum",) and config.p and config.q:
        from .kernels import _family_profile_grid
        return power_case_check(_family_profile_grid(fam), config.p, config.q,
                                spec1.weight, spec2.weight, window=config.window,
                                n_windows=config.windows_nested)
    if config.inequality == "homogeneous" or tag == "hilbert":
        K = make_kernel(fam, config.window, min(config.grid_n, 256))
        if "homogeneous" in K.flags:
            return homogeneous_check(K, spec1, spec2)
        return None
    if config.inequality in ("main", "rearranged-input"):
        K = make_kernel(fam, config.window, min(config.grid_n, 512))
        try:
            return rearranged_check(K, spec1.nf, spec2.nf, spec1.weight,
                                    spec2.weight, window=config.window,
                                    n_windows=config.windows_nested)
        except ValueError:
            return None
    return None


def empirical_best_constant(config: ExperimentConfig) -> Report:
    """Max ratio over the family per nested window, plus checker cross-check."""
    t0 = time.perf_counter()
    wins = nested_windows(config.window, config.windows_nested)
    members_last = []
    per_window_c_hat = []
    skipped = 0
    flagged = 0
    argmax_name = None
    for win in wins:
        spec1, spec2 = _gauges_for(config, win)
        K = None
        if config.kernel is not None:
            fam = parse_kernel_spec(config.kernel, win, DEFAULT_CELLS, "kernel")
            K = make_kernel(fam, win, config.grid_n)
        members = default_family(win, DEFAULT_CELLS, config.seed, config.family)
        rows = []
        c_hat = 0.0
        best = None
        for name, f in members:
            num, den = _ratio(config.inequality, K, f, spec1, spec2)
            if den <= 0.0 or not math.isfinite(den):
                skipped += 1
                continue
            if not math.isfinite(num):
                flagged += 1
                rows.append({"member": name, "ratio": math.inf,
                             "numerator": num, "denominator": den,
                             "flag": "infinite"})
                continue
            ratio = num / den
            rows.append({"member": name, "ratio": ratio, "numerator": num,
                         "denominator": den, "flag": ""})
            if ratio > c_hat:
                c_hat, best = ratio, name
        per_window_c_hat.append(c_hat)
        members_last, argmax_name = rows, best
    spec1, spec2 = _gauges_for(config, config.window)
    condition = _matching_condition(config, spec1, spec2)
    crosscheck = None
    if condition is not None:
        grew = (len(per_window_c_hat) >= 2 and per_window_c_hat[-2] > 0
                and per_window_c_hat[-1] / per_window_c_hat[-2] >= 1.10)
        if condition.verdict in ("holds", "finite"):
            crosscheck = "consistent" if not grew else "checker holds but "\
                "empirical constant still growing"
        elif condition.verdict in ("fails", "divergent"):
            crosscheck = "consistent" if grew else "checker fails but "\
                "empirical constant looks stable"
        else:
            crosscheck = "checker inconclusive"
    return Report(
        config=_config_dict(config),
        members=members_last,
        c_hat=per_window_c_hat[-1],
        argmax_member=argmax_name,
        per_window_c_hat=per_window_c_hat,
        windows=wins,
        condition=condition.to_dict() if condition is not None else None,
        verdict_crosscheck=crosscheck,
        skipped=skipped,
        flagged_infinite=flagged,
        runtime_seconds=time.perf_counter() - t0,
    )


def _config_dict(config: ExperimentConfig) -> dict:
    return {
        "inequality": config.inequality, "kernel": config.kernel,
        "phi1": config.phi1, "phi2": config.phi2, "u1": config.u1,
        "u2": config.u2, "p": config.p, "q": config.q, "lambda": config.lam,
        "family": config.family, "grid_n": config.grid_n,
        "window": list(config.window), "windows_nested": config.windows_nested,
        "seed": config.seed,
    }


# ---------------------------------------------------------------------------
# the rearrangement-bound comparison table


def oneil_compare(profile_fn, f: GridFunction, x_samples,
                  convention: str = "paper", window=DEFAULT_WINDOW,
                  grid_n: int = 1024, quad_n: int = 4096):
    """Table of (x, lhs, paper_bound, oneil_bound) for a radial kernel.

    lhs is the prefix average of the rearranged output; oneil_bound integrates
    the rearranged kernel profile against f*; paper_bound integrates the
    radial kernel itself against f*.  The rearranged-profile convention is
    "paper" (k(sqrt(t))) or "exact" (quarter-plane measure, k(2 sqrt(t/pi))).
    """
    if convention not in ("paper", "exact"):
        raise ValueError(f"unknown convention {convention!r}")
    from .kernels import radial_family
    from .space import restrict as _restrict

    prof_edges = default_edges((window[0] * 0.1, window[1] * 10.0), quad_n)
    prof = GridFunction(prof_edges, np.maximum(profile_fn(cell_midpoints(prof_edges)), 0.0))
    K = make_kernel(radial_family(prof, profile_fn=profile_fn), window, grid_n)
    Tf = apply(K, f)
    fstar = rearrange(f)
    support = fstar.edges[-1]
    quad = merge_edges(fstar.edges,
                       default_edges((max(support * 1e-12, 1e-12), support), quad_n))
    quad = quad[quad <= support]
    mids = cell_midpoints(quad)
    dl = np.diff(quad)
    fvals = fstar.eval_at(mids)
    rows = []
    for x in np.atleast_1d(np.asarray(x_samples, dtype=float)):
        lhs = maximal(Tf, x)
        if convention == "paper":
            kstar = profile_fn(np.sqrt(x * mids))
        else:
            kstar = profile_fn(2.0 * np.sqrt(x * mids / math.pi))
        oneil = fsum(kstar * fvals * dl)
        paper = fsum(profile_fn(np.sqrt(x * x + mids * mids)) * fvals * dl)
        rows.append({"x": float(x), "lhs": float(lhs), "paper_bound": float(paper),
                     "oneil_bound": float(oneil)})
    return rows


# ---------------------------------------------------------------------------
# file-level driver


def run_experiment(config_path: str, out_prefix: str = "report") -> Report:
    """Run a config file; writes <prefix>.json and <prefix>.csv."""
    with open(config_path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError("config", f"not valid JSON: {exc}") from exc
    config = ExperimentConfig.from_dict(raw)
    report = empirical_best_constant(config)
    with open(out_prefix + ".json", "w") as fh:
        fh.write(report.to_json() + "\n")
    with open(out_prefix + ".csv", "w") as fh:
        fh.write(report.to_csv())
    return report
