"""Mini-language for functions, weights, N-functions, kernels and gauges.

Used by experiment config files and the CLI:

* functions: ``indicator:a=..,b=..``, ``power:a=..`` (y^-a on the window),
  ``exp:c=..`` (e^-cy), ``randomstep:seed=..,cells=..``
* weights: ``power_weight:alpha=..`` ((alpha+1) x^alpha) plus any function spec
* N-functions: ``power:p=..``, ``sampled:path=<file>`` (two-column t, phi(t))
* kernels: ``hardy-averaging``, ``hardy-indicator``, ``hilbert``,
  ``sum:k=<function spec>``, ``radial:k=<function spec>``,
  ``power-radial:lambda=..``, ``homogeneous:profile=<function spec>``
* gauges: ``gauge(phi=<nfunction spec>, u=<weight spec>)``

GridFunction files are two-column text ``edge value`` rows; the last row has
only the closing edge.
"""

from __future__ import annotations

import numpy as np

from .numerics import cell_midpoints
from .space import (
    DEFAULT_CELLS,
    DEFAULT_WINDOW,
    GridFunction,
    Weight,
    default_edges,
    make_weight,
    rearrange,
)
from .young import NFunction, make_power_nfunction, make_sampled_nfunction
from .kernels import (
    KernelFamily,
    hardy_averaging_family,
    hardy_indicator_family,
    hilbert_family,
    homogeneous_family,
    power_radial_family,
    radial_family,
    sum_family,
)


class SpecError(ValueError):
    """Configuration error naming the offending field."""

    def __init__(self, fieldname: str, message: str):
        self.fieldname = fieldname
        super().__init__(f"{fieldname}: {message}")


def _parse_params(body: str, fieldname: str) -> dict:
    out = {}
    if not body:
        return out
    for part in body.split(","):
        if "=" not in part:
            raise SpecError(fieldname, f"malformed parameter {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _num(params: dict, key: str, fieldname: str) -> float:
    if key not in params:
        raise SpecError(fieldname, f"missing parameter {key!r}")
    try:
        return float(params[key])
    except ValueError as exc:
        raise SpecError(fieldname, f"malformed number {params[key]!r} for {key!r}") from exc


def parse_function_spec(spec: str, window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                        fieldname: str = "function") -> GridFunction:
    spec = spec.strip()
    tag, _, body = spec.partition(":")
    lo, hi = window
    if tag == "indicator":
        params = _parse_params(body, fieldname)
        a = _num(params, "a", fieldname)
        b = _num(params, "b", fieldname)
        if not (0.0 <= a < b):
            raise SpecError(fieldname, f"indicator needs 0 <= a < b, got a={a}, b={b}")
        return GridFunction(np.array([a, b]), np.array([1.0]))
    if tag == "power":
        a = _num(_parse_params(body, fieldname), "a", fieldname)
        edges = default_edges(window, n_cells)
        return GridFunction(edges, cell_midpoints(edges) ** (-a))
    if tag == "exp":
        c = _num(_parse_params(body, fieldname), "c", fieldname)
        edges = default_edges(window, n_cells)
        return GridFunction(edges, np.exp(-c * cell_midpoints(edges)))
    if tag == "randomstep":
        params = _parse_params(body, fieldname)
        seed = int(_num(params, "seed", fieldname))
        cells = int(_num(params, "cells", fieldname)) if "cells" in params else 64
        if cells < 1:
            raise SpecError(fieldname, "cells must be positive")
        rng = np.random.default_rng(seed)
        edges = default_edges(window, cells)
        return GridFunction(edges, rng.uniform(0.0, 1.0, cells))
    if tag == "file":
        params = _parse_params(body, fieldname)
        if "path" not in params:
            raise SpecError(fieldname, "file spec needs path=<file>")
        return load_gridfunction(params["path"])
    raise SpecError(fieldname, f"unknown function spec tag {tag!r}")


def parse_weight_spec(spec: str, window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                      fieldname: str = "weight") -> Weight:
    spec = spec.strip()
    tag, _, body = spec.partition(":")
    lo, hi = window
    if tag in ("one", "1"):
        return make_weight(GridFunction(np.array([0.0, hi]), np.array([1.0])),
                           divergent=True)
    if tag == "power_weight":
        alpha = _num(_parse_params(body, fieldname), "alpha", fieldname)
        if alpha <= -1.0:
            raise SpecError(fieldname, "power weight needs alpha > -1")
        if alpha == 0.0:
            return make_weight(GridFunction(np.array([0.0, hi]), np.array([1.0])),
                               divergent=True)
        edges = default_edges(window, n_cells)
        masses = edges[1:] ** (alpha + 1.0) - edges[:-1] ** (alpha + 1.0)
        return make_weight(GridFunction(edges, masses / np.diff(edges)),
                           divergent=True)  # total mass over (0, inf) is infinite
    return make_weight(parse_function_spec(spec, window, n_cells, fieldname))


def parse_nfunction_spec(spec: str, fieldname: str = "nfunction") -> NFunction:
    spec = spec.strip()
    tag, _, body = spec.partition(":")
    if tag == "power":
        return make_power_nfunction(_num(_parse_params(body, fieldname), "p", fieldname))
    if tag == "sampled":
        params = _parse_params(body, fieldname)
        if "path" not in params:
            raise SpecError(fieldname, "sampled spec needs path=<file>")
        data = np.loadtxt(params["path"])
        if data.ndim != 2 or data.shape[1] != 2:
            raise SpecError(fieldname, "sampled density file must have two columns")
        return make_sampled_nfunction(data[:, 0], data[:, 1])
    raise SpecError(fieldname, f"unknown N-function spec tag {tag!r}")


def _profile_from_spec(sub: str, window, n_cells, fieldname) -> tuple[GridFunction, object]:
    """Profile GridFunction plus an exact callable when affordable."""
    sub = sub.strip()
    tag, _, body = sub.partition(":")
    prof_window = (min(window[0] * 0.1, 1e-7), max(window[1] * 10.0, 1e7))
    grid = parse_function_spec(sub, prof_window, max(n_cells, 4096), fieldname)
    fn = None
    if tag == "power":
        a = _num(_parse_params(body, fieldname), "a", fieldname)
        fn = lambda t, _a=a: np.asarray(t, float) ** (-_a)  # noqa: E731
    elif tag == "exp":
        c = _num(_parse_params(body, fieldname), "c", fieldname)
        fn = lambda t, _c=c: np.exp(-_c * np.asarray(t, float))  # noqa: E731
    return grid, fn


def parse_kernel_spec(spec: str, window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                      fieldname: str = "kernel") -> KernelFamily:
    spec = spec.strip()
    tag, _, body = spec.partition(":")
    if tag == "hardy-averaging":
        return hardy_averaging_family()
    if tag == "hardy-indicator":
        return hardy_indicator_family()
    if tag == "hilbert":
        return hilbert_family()
    if tag == "power-radial":
        params = _parse_params(body, fieldname)
        lam = _num(params, "lambda", fieldname) if "lambda" in params \
            else _num(params, "lam", fieldname)
        return power_radial_family(lam)
    if tag in ("sum", "radial", "homogeneous"):
        key = "profile=" if tag == "homogeneous" else "k="
        if not body.startswith(key):
            raise SpecError(fieldname, f"{tag} kernel needs {key}<function spec>")
        sub = body[len(key):]
        grid, fn = _profile_from_spec(sub, window, n_cells, fieldname)
        if tag == "sum":
            return sum_family(grid, profile_fn=fn)
        if tag == "radial":
            return radial_family(grid, profile_fn=fn)
        return homogeneous_family(grid, profile_fn=fn)
    raise SpecError(fieldname, f"unknown kernel spec tag {tag!r}")


def parse_gauge_spec(spec: str, window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                     fieldname: str = "gauge"):
    from .gauges import GaugeSpec

    s = spec.strip()
    if not (s.startswith("gauge(") and s.endswith(")")):
        raise SpecError(fieldname, "gauge spec must look like gauge(phi=..., u=...)")
    inner = s[len("gauge("):-1]
    if "phi=" not in inner or "u=" not in inner:
        raise SpecError(fieldname, "gauge spec needs phi= and u= entries")
    phi_part = inner.split("phi=", 1)[1]
    phi_part, _, rest = phi_part.partition(", u=")
    if not rest:
        phi_part, _, rest = phi_part.partition(",u=")
    if not rest:
        raise SpecError(fieldname, "gauge spec needs a u= entry after phi=")
    nf = parse_nfunction_spec(phi_part.strip(), fieldname + ".phi")
    w = parse_weight_spec(rest.strip(), window, n_cells, fieldname + ".u")
    return GaugeSpec(nf, w)


def rearranged_spec(spec: str, window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS,
                    fieldname: str = "function") -> GridFunction:
    """Function spec evaluated and rearranged (family member helper)."""
    return rearrange(parse_function_spec(spec, window, n_cells, fieldname))


# ---------------------------------------------------------------------------
# GridFunction text files


def load_gridfunction(path: str) -> GridFunction:
    edges = []
    values = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            edges.append(float(parts[0]))
            if len(parts) > 1:
                values.append(float(parts[1]))
    if len(edges) != len(values) + 1:
        raise SpecError("file", f"{path}: expected n+1 edges for n values "
                                f"(last row carries only the closing edge)")
    return GridFunction(np.asarray(edges), np.asarray(values))


def dump_gridfunction(f: GridFunction) -> str:
    lines = [f"{e:.12g} {v:.12g}" for e, v in zip(f.edges[:-1], f.values)]
    lines.append(f"{f.edges[-1]:.12g}")
    return "\n".join(lines) + "\n"


def save_gridfunction(f: GridFunction, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dump_gridfunction(f))
