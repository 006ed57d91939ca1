"""Reproducible experiments emitting CSV (and SVG) reports.

Every CSV starts with one comment line carrying the config hash, seed and
package version, followed by a header row.  Identical configs produce
byte-identical files: no timestamps, floats written with ``repr``.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import rate_exponent, rate_table
from .compiler import compile_cubes
from .errors import CapacityError, DomainError, ValidationError
from .holder import build_packing
from .measures import impossibility_demo, lp_distance_mc, lp_error_cubewise
from .monotone import DecompositionParams, build_approximant, corpus, decompose, decomposition_error_bound
from .svgplot import loglog_svg

DEFAULTS = {
    "monotone_scaling": {
        "d": 2, "p": 1.0, "N": [1, 2, 3, 4, 5, 6],
        "functions": ["mean", "max", "min", "product", "smoothstep", "orthant_mixture", "disk"],
        "error_method": "quadrature", "quad_points": 4, "mc_samples": 200_000,
    },
    "impossibility_demo": {"d": 2, "p": 1.0, "N": [2, 3, 4, 5, 6], "grid": 512, "net_checks": 20_000},
    "packing_cert": {"s": 1.0, "d": 1, "p": 2.0, "N": 8, "quadrature_pairs": 200, "per_cell": 256,
                     "sampled": False},
    "bound_sweep": {
        "classes": ["monotone_lower", "holder", "monotone_upper", "barron"],
        "d": 2, "p": 2.0, "s": 1.0, "gamma": 0.75, "nu": [0, 1, 2], "L": [1, 2, 4],
        "W_min": 16, "W_max": 1e8, "n_W": 8, "c": 1.0, "c1": 1.0, "c2": 1.0, "c3": 1.0,
    },
}
EXPERIMENTS = tuple(DEFAULTS)


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: str = "results"
    formats: tuple = ("csv", "svg")

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise ValidationError("experiment", f"unknown experiment {self.experiment!r}")
        unknown = set(self.params) - set(DEFAULTS[self.experiment])
        if unknown:
            raise ValidationError("config keys", f"unknown parameters {sorted(unknown)}")
        merged = copy.deepcopy(DEFAULTS[self.experiment])
        merged.update(self.params)
        self.params = merged
        self.formats = tuple(self.formats)

    @classmethod
    def default(cls, experiment, **kw):
        return cls(experiment, **kw)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or "experiment" not in doc:
            raise ValidationError("config", "config needs an 'experiment' field")
        return cls(doc["experiment"], int(doc.get("seed", 0)), dict(doc.get("params", {})),
                   doc.get("out", "results"), tuple(doc.get("formats", ("csv", "svg"))))

    def to_dict(self):
        return {"experiment": self.experiment, "seed": self.seed, "params": self.params,
                "out": self.out, "formats": list(self.formats)}

    def hash(self):
        # the output directory does not affect results
        doc = {"experiment": self.experiment, "seed": self.seed, "params": self.params}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def csv_text(cfg, columns, rows):
    buf = io.StringIO()
    buf.write(f"# lpapprox experiment={cfg.experiment} config_sha256={cfg.hash()} "
              f"seed={cfg.seed} version={__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _write(cfg, name, text):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


@dataclass
class ExperimentResult:
    rows: list
    columns: list
    csv: str
    svg: str | None = None
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def _finish(cfg, stem, columns, rows, svg=None, summary=None, write=True):
    res = ExperimentResult(rows, columns, csv_text(cfg, columns, rows), svg, summary or {})
    if write:
        if "csv" in cfg.formats:
            res.files.append(_write(cfg, stem + ".csv", res.csv))
        if "json" in cfg.formats:
            doc = {"config": cfg.to_dict(), "rows": rows, "summary": res.summary}
            res.files.append(_write(cfg, stem + ".json", json.dumps(doc, indent=2, default=_cell) + "\n"))
        if svg is not None and "svg" in cfg.formats:
            res.files.append(_write(cfg, stem + ".svg", svg))
    return res


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


# --- monotone scaling -----------------------------------------------------------

SCALING_COLUMNS = ["func", "N", "W", "error", "error_bound", "bound_ok",
                   "d", "p", "regime", "certified_error", "error_method"]


def run_monotone_scaling(cfg, write=True):
    """Decompose, build, compile and measure each corpus function at each N."""
    P = cfg.params
    d, p = int(P["d"]), float(P["p"])
    funcs = corpus(d, seed=cfg.seed)
    missing = [name for name in P["functions"] if name not in funcs and not (name == "disk" and d < 2)]
    if missing:
        raise ValidationError("functions", f"unknown test functions {missing}")
    names = [n for n in P["functions"] if n in funcs]
    rows = []
    for name in names:
        f = funcs[name]
        for N in P["N"]:
            params = DecompositionParams(int(N), p, d)
            try:
                dec = decompose(f, params)
            except CapacityError as exc:
                raise CapacityError(f"d={d}, N={N}: {exc}") from exc
            approx = build_approximant(dec, f)
            net = compile_cubes(approx)
            W = net.architecture.weight_count
            if P["error_method"] == "mc":
                err = lp_distance_mc(f, approx, p, d, int(P["mc_samples"]), seed=cfg.seed).value
            else:
                err = lp_error_cubewise(f, approx, p, q=int(P["quad_points"])).value
            regime, _, bound = decomposition_error_bound(params)
            rows.append({
                "func": name, "N": int(N), "W": int(W), "error": err, "error_bound": bound,
                "bound_ok": bool(err <= bound and dec.certified_error() <= bound),
                "d": d, "p": p, "regime": regime, "certified_error": dec.certified_error(),
                "error_method": P["error_method"],
            })
    svg = None
    if rows:
        series = []
        for name in names:
            sub = [r for r in rows if r["func"] == name]
            series.append((name, [r["W"] for r in sub], [r["error"] for r in sub]))
        alpha = max(d, (d - 1) * p)
        first = [r for r in rows if r["error"] > 0]
        ref = None
        if first:
            ref = (f"slope -1/{alpha:g}", -1.0 / alpha, first[0]["W"], first[0]["error"])
        svg = loglog_svg(series, f"monotone approximation, d={d}, p={p:g}", "compiled weights W",
                         "L^p error", reference=ref)
    summary = {"all_bound_ok": all(r["bound_ok"] for r in rows)}
    return _finish(cfg, "monotone_scaling", SCALING_COLUMNS, rows, svg, summary, write)


# --- impossibility demo ---------------------------------------------------------

DEMO_COLUMNS = ["N", "L1_error", "grid_sup_error", "W", "cubes", "certified_lp_error", "net_mismatch"]


def run_impossibility_demo(cfg, write=True):
    P = cfg.params
    if int(P["d"]) < 2:
        raise DomainError("the disk construction needs d >= 2")
    raw = impossibility_demo(tuple(int(n) for n in P["N"]), p=float(P["p"]), grid=int(P["grid"]),
                             d=int(P["d"]), n_net_checks=int(P["net_checks"]), seed=cfg.seed)
    rows = [{"N": r["N"], "L1_error": r["lp_error"], "grid_sup_error": r["sup_error"], "W": r["W"],
             "cubes": r["cubes"], "certified_lp_error": r["certified_lp_error"],
             "net_mismatch": r["net_mismatch"]} for r in raw]
    l1 = [r["L1_error"] for r in rows]
    summary = {
        "sup_ge_0.49": all(r["grid_sup_error"] >= 0.49 for r in rows),
        "L1_strictly_decreasing": all(b < a for a, b in zip(l1, l1[1:])),
        "network_agrees": all(r["net_mismatch"] == 0 for r in rows),
    }
    return _finish(cfg, "impossibility_demo", DEMO_COLUMNS, rows, None, summary, write)


# --- packing certificate --------------------------------------------------------

PACKING_COLUMNS = ["i", "j", "hamming", "distance", "quadrature_distance", "relative_gap", "distance_ok"]


def run_packing_cert(cfg, write=True):
    """Pairwise distances of the Hölder packing and a certificate summary.

    All pairs get the Hamming-formula distance; the ``quadrature_pairs`` pairs
    with the smallest Hamming distance (ties by index) are also integrated.
    """
    P = cfg.params
    fam = build_packing(float(P["s"]), int(P["d"]), float(P["p"]), int(P["N"]),
                        sampled=bool(P["sampled"]), seed=cfg.seed)
    H = fam.code.hamming_matrix()
    D = fam.distance_from_hamming(H)
    iu = np.triu_indices(fam.code.size, 1)
    order = np.lexsort((iu[1], iu[0], H[iu]))
    quad_set = set(order[:int(P["quadrature_pairs"])].tolist())
    thr = fam.threshold
    rows, gaps = [], []
    for k in range(len(iu[0])):
        i, j = int(iu[0][k]), int(iu[1][k])
        dist = float(D[i, j])
        q, gap = "", ""
        if k in quad_set:
            q = fam.quadrature_distance(i, j, per_cell=int(P["per_cell"]))
            gap = abs(q - dist) / dist
            gaps.append(gap)
        rows.append({"i": i, "j": j, "hamming": int(H[i, j]), "distance": dist,
                     "quadrature_distance": q, "relative_gap": gap,
                     "distance_ok": bool(dist >= thr * (1 - 1e-12))})
    cert = fam.certificate
    summary = {
        "size": cert["size"], "size_bound": cert["size_bound"], "size_ok": cert["size_ok"],
        "min_hamming": cert["min_hamming"], "hamming_ok": cert["hamming_ok"],
        "min_distance": cert["min_distance"], "threshold": thr,
        "distance_ok": cert["distance_ok"],
        "max_quadrature_gap": max(gaps) if gaps else 0.0,
        "quadrature_ok": (max(gaps) if gaps else 0.0) <= 0.01,
        "separation_constant": fam.separation_constant,
    }
    summary["status"] = "min_distance >= c*N^-s: " + ("pass" if cert["distance_ok"] else "fail")
    res = _finish(cfg, "packing_cert", PACKING_COLUMNS, rows, None, summary, write)
    if write and "csv" in cfg.formats:
        buf = io.StringIO()
        buf.write(f"# lpapprox experiment={cfg.experiment} config_sha256={cfg.hash()} "
                  f"seed={cfg.seed} version={__version__}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in summary.items():
            w.writerow([k, _cell(v)])
        res.files.append(_write(cfg, "packing_summary.csv", buf.getvalue()))
    return res


# --- bound sweep ----------------------------------------------------------------

SWEEP_COLUMNS = ["class", "W", "L", "nu", "value", "regime", "exponent", "alpha"]


def run_bound_sweep(cfg, write=True):
    """Evaluate each rate formula over a log grid of W, depths and activation degrees.

    Combinations outside a formula's validity window are skipped and
    counted in the summary.
    """
    P = cfg.params
    Ws = np.geomspace(float(P["W_min"]), float(P["W_max"]), int(P["n_W"]))
    d, p, s, gamma = int(P["d"]), float(P["p"]), float(P["s"]), float(P["gamma"])
    rows, skipped = [], {}
    for cls in P["classes"]:
        nus = [0] if cls == "monotone_upper" else list(P["nu"])
        Ls = [1] if cls == "monotone_upper" else list(P["L"])
        for nu in nus:
            for L in Ls:
                for W in Ws:
                    try:
                        r = rate_table(cls, float(W), L=int(L), nu=int(nu), d=d, p=p, s=s, gamma=gamma,
                                       c=float(P["c"]), c1=float(P["c1"]), c2=float(P["c2"]),
                                       c3=float(P["c3"]))
                    except DomainError as exc:
                        skipped[str(exc)] = skipped.get(str(exc), 0) + 1
                        continue
                    rows.append({"class": cls, "W": float(W), "L": int(L), "nu": int(nu),
                                 "value": r.value, "regime": r.regime,
                                 "exponent": rate_exponent(cls, d=d, p=p, nu=nu, s=s, gamma=gamma),
                                 "alpha": r.constants.get("alpha", "")})
    series = []
    for cls in P["classes"]:
        sub = [r for r in rows if r["class"] == cls and r["L"] == 1 and r["nu"] in (0, min(P["nu"]))]
        if sub:
            series.append((cls, [r["W"] for r in sub], [r["value"] for r in sub]))
    svg = loglog_svg(series, f"rate formulas, d={d}, p={p:g}", "W", "rate (constants = 1)") if series else None
    summary = {"regimes": sorted({r["regime"] for r in rows}), "skipped": skipped}
    return _finish(cfg, "bound_sweep", SWEEP_COLUMNS, rows, svg, summary, write)


RUNNERS = {
    "monotone_scaling": run_monotone_scaling,
    "impossibility_demo": run_impossibility_demo,
    "packing_cert": run_packing_cert,
    "bound_sweep": run_bound_sweep,
}


def run(cfg, write=True):
    return RUNNERS[cfg.experiment](cfg, write=write)


def run_all(out="results", seed=0, formats=("csv", "svg")):
    return {name: run(ExperimentConfig(name, seed, {}, out, formats)) for name in EXPERIMENTS}


def default_config_text():
    return json.dumps({name: {"experiment": name, "seed": 0, "params": DEFAULTS[name],
                              "out": "results", "formats": ["csv", "svg"]} for name in EXPERIMENTS},
                      indent=2) + "\n"
