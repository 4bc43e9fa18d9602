"""Ratio scans ``p_hat / (n F(x))`` along a zone path ``x = h(n)``."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..funclass.checks import check_psi_lcf, check_upper_power
from ..funclass.functions import PositiveFunction
from ..funclass.psi import PsiSpec
from ..funclass.reports import jsonable
from ..tails.model import TailModel
from ..tails.zones import FINITE, ZoneSpec, check_ap5, check_left_tail, choose_psi
from .estimators import DEFAULT_BUDGET, SHARD_REPS, EstimateRecord, big_jump_main_term, crude_mc

ESTIMATORS = ("crude", "big-jump", "both")
RESULT_COLUMNS = ("n", "x", "estimator", "p_hat", "se", "prediction", "ratio", "zone_xlnn", "zone_ap5", "reps", "seed")
MIN_REPS = 10_000


class ExperimentError(ValueError):
    pass


@dataclass
class Experiment:
    model: TailModel
    zone: ZoneSpec
    ns: list[int]
    reps: int = 1_000_000
    estimator: str = "crude"
    seed: int = 0
    N: float = 5.0
    band: tuple[float, float] = (0.7, 1.4)
    psi: str | None = None
    jobs: int = 1
    budget: float = DEFAULT_BUDGET
    min_hits: float | None = None

    def __post_init__(self):
        self.ns = [int(n) for n in self.ns]
        if not self.ns or any(b <= a for a, b in zip(self.ns, self.ns[1:])) or self.ns[0] < 1:
            raise ExperimentError(f"n list must be positive and strictly increasing, got {self.ns}")
        if self.reps < MIN_REPS:
            raise ExperimentError(f"reps must be at least {MIN_REPS}, got {self.reps}")
        if self.estimator not in ESTIMATORS:
            raise ExperimentError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if not self.N > 0:
            raise ExperimentError(f"N must be positive, got {self.N!r}")
        lo, hi = self.band
        if not 0 < lo < 1 < hi:
            raise ExperimentError(f"band must bracket 1, got {self.band}")
        self.band = (float(lo), float(hi))
        if self.min_hits is not None and not self.min_hits > 0:
            raise ExperimentError(f"min_hits must be positive, got {self.min_hits!r}")
        self.zone = self.zone.resolved(self.model)

    def x(self, n: int) -> float:
        return float(self.zone(n))

    def crude_reps(self, n: int) -> int:
        """Crude replications for cell n: ``reps``, raised to whole shards until
        ``n F(x) * reps >= min_hits`` when a floor is set.  Shards are fixed, so
        the first ``reps`` paths are the same as without the floor."""
        if self.min_hits is None:
            return self.reps
        pred = n * self.model.sf(self.x(n))
        need = math.ceil(self.min_hits / pred * (1 - 1e-9)) if pred > 0 else self.reps
        if need <= self.reps:
            return self.reps
        return max(self.reps, -(-need // SHARD_REPS) * SHARD_REPS)

    def psi_spec(self) -> PsiSpec:
        return PsiSpec(self.psi) if self.psi else choose_psi(self.zone, self.model)

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "zone": {"h": self.zone.h, "regime": self.zone.regime,
                                                        "beta": self.zone.beta},
                "ns": self.ns, "reps": self.reps, "estimator": self.estimator, "seed": self.seed, "N": self.N,
                "band": list(self.band), "psi": self.psi, "jobs": self.jobs, "budget": self.budget,
                "min_hits": self.min_hits}


# --------------------------------------------------------------------------
# verdicts


@dataclass
class TrendVerdict:
    series: str
    ratios: list[float]
    ses: list[float]
    monotone: bool
    closer: bool
    in_band: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.closer and self.in_band


def trend_toward_one(series: str, ratios, ses, band, k_se: float = 3.0) -> TrendVerdict:
    """Distance to 1 may only shrink (up to ``k_se`` combined standard errors),
    the last ratio must be at least as close as the first, and inside the band."""
    r = np.asarray(ratios, dtype=float)
    s = np.asarray(ses, dtype=float)
    d = np.abs(r - 1.0)
    slack = k_se * np.sqrt(s[1:] ** 2 + s[:-1] ** 2)
    finite = bool(np.all(np.isfinite(r)))
    monotone = finite and bool(np.all(d[1:] <= d[:-1] + slack))
    closer = finite and bool(d[-1] <= d[0] + k_se * math.hypot(s[0], s[-1]))
    in_band = finite and band[0] <= r[-1] <= band[1]
    return TrendVerdict(series, r.tolist(), s.tolist(), monotone, closer, bool(in_band))


@dataclass
class ScanResult:
    experiment: Experiment
    crude: list[EstimateRecord] = field(default_factory=list)
    big_jump: list[EstimateRecord] = field(default_factory=list)
    trends: list[TrendVerdict] = field(default_factory=list)
    zone: dict = field(default_factory=dict)
    cross_check: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trends) and self.zone.get("passed", False) and all(
            c["agree"] for c in self.cross_check)

    def verdicts(self) -> dict:
        return {
            "ratio_trend": {t.series: {"passed": t.passed, "monotone": t.monotone, "closer": t.closer,
                                       "in_band": t.in_band, "last_ratio": t.ratios[-1]} for t in self.trends},
            "zone": {k: v for k, v in self.zone.items() if not isinstance(v, list)},
            "cross_check": self.cross_check,
            "scan": "PASS" if self.passed else "FAIL",
        }


def _increasing(v) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.diff(v) > 0))


def _zone_verdict(exp: Experiment, records: list[EstimateRecord]) -> dict:
    xl = [r.zone_xlnn for r in records]
    ap = check_ap5(exp.model, exp.ns, [exp.x(n) for n in exp.ns])
    out = {"regime": exp.zone.regime, "xlnn": xl, "xlnn_increasing": _increasing(xl),
           "ap5": ap.ratio.tolist(), "ap5_decreasing": ap.trend_ok, "ap5_sufficient": ap.sufficient}
    if exp.zone.regime == FINITE:
        out["passed"] = out["xlnn_increasing"] and ap.trend_ok
    else:
        zs = [r.zone_sigma for r in records]
        out["sigma"] = zs
        out["sigma_increasing"] = _increasing(zs)
        out["passed"] = out["sigma_increasing"] and ap.trend_ok
    return out


def ratio_scan(exp: Experiment) -> ScanResult:
    """One record per n with ``x = h(n)``, plus trend, zone and cross-check verdicts."""
    res = ScanResult(exp)
    for n in exp.ns:
        x = exp.x(n)
        if exp.estimator in ("crude", "both"):
            res.crude.append(crude_mc(exp.model, n, x, exp.crude_reps(n), exp.seed, jobs=exp.jobs, budget=exp.budget))
        if exp.estimator in ("big-jump", "both"):
            res.big_jump.append(big_jump_main_term(exp.model, n, x, exp.reps, exp.N, exp.seed, jobs=exp.jobs,
                                                   budget=exp.budget))
    if res.crude:
        pred = [r.prediction for r in res.crude]
        res.trends.append(trend_toward_one("crude-sum", [r.ratio_sum for r in res.crude],
                                           [r.se_sum / p for r, p in zip(res.crude, pred)], exp.band))
        res.trends.append(trend_toward_one("crude-max", [r.ratio_max for r in res.crude],
                                           [r.se_max / p for r, p in zip(res.crude, pred)], exp.band))
    if res.big_jump:
        res.trends.append(trend_toward_one("big-jump", [r.ratio_sum for r in res.big_jump],
                                           [r.se_sum / r.prediction for r in res.big_jump], exp.band))
    res.zone = _zone_verdict(exp, res.crude or res.big_jump)
    if res.crude and res.big_jump:
        for c, b in zip(res.crude, res.big_jump):
            comb = math.hypot(c.se_sum, b.se_sum)
            res.cross_check.append({"n": c.n, "crude": c.p_sum, "big_jump": b.p_sum, "combined_se": comb,
                                    "agree": abs(c.p_sum - b.p_sum) <= 3.0 * comb})
    return res


# --------------------------------------------------------------------------
# hypotheses of the asymptotic law


def tail_function(model: TailModel) -> PositiveFunction:
    return PositiveFunction(model.log_sf, model.name)


def psi_consistency_report(exp: Experiment) -> dict:
    """psi-l.c.f. and upper-power checks of F with the zone-matched psi."""
    psi = exp.psi_spec()
    g = tail_function(exp.model)
    lcf = check_psi_lcf(g, psi)
    up = check_upper_power(g)
    out = {"psi": psi.label, "psi_lcf": lcf.verdict.value, "psi_lcf_H_last": float(lcf.H[-1]),
           "upper_power": up.verdict.value, "upper_power_c_min": up.details["c_min"]}
    if exp.zone.regime != FINITE:
        out["left_tail"] = check_left_tail(exp.model).verdict.value
    out["passed"] = lcf.passed and up.passed and out.get("left_tail", "PASS") == "PASS"
    return out


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def result_rows(res: ScanResult):
    for r in res.crude:
        yield (r.n, r.x, "crude-sum", r.p_sum, r.se_sum, r.prediction, r.ratio_sum, r.zone_xlnn, r.zone_ap5,
               r.reps, r.seed)
        yield (r.n, r.x, "crude-max", r.p_max, r.se_max, r.prediction, r.ratio_max, r.zone_xlnn, r.zone_ap5,
               r.reps, r.seed)
    for r in res.big_jump:
        yield (r.n, r.x, "big-jump", r.p_sum, r.se_sum, r.prediction, r.ratio_sum, r.zone_xlnn, r.zone_ap5,
               r.reps, r.seed)


def write_results_csv(path, res: ScanResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in result_rows(res):
            w.writerow([_fmt(v) for v in row])


def write_plot_csv(path, res: ScanResult) -> None:
    series = {t.series: t.ratios for t in res.trends}
    names = list(series)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n"] + [f"ratio_{s}" for s in names])
        for i, n in enumerate(res.experiment.ns):
            w.writerow([n] + [_fmt(series[s][i]) for s in names])


def write_manifest(path, res: ScanResult, extra: dict | None = None) -> dict:
    doc = {"tool": "psilcf", "version": __version__, "experiment": res.experiment.to_dict(),
           "verdicts": res.verdicts(),
           "records": [r.to_dict() for r in res.crude + res.big_jump]}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc
