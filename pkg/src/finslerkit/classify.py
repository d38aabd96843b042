"""Sampled classification of a metric by its curvature sup-norms.

Four verdicts, each a sup-norm test over the deterministic sample set:
Riemannian (Cartan torsion), Berwald (Berwald curvature), weakly Berwald
(mean Berwald curvature), Douglas (Douglas curvature).  The tolerance
ladder widens by roughly one digit per extra derivative order.  Logical
implications between the verdicts are enforced; a violation means the
tolerances are misconfigured, not that the metric is exotic.

A configurable fraction of the samples is recomputed through the
finite-difference oracles and asserted to agree within the oracle's own
error estimate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InconsistentVerdictError
from .fd import agreement_gap
from .metrics import MetricSpec, SamplingPolicy, sample_points
from .oracles import (berwald_fd, cartan_tensor_fd, dginv_fd, douglas_fd,
                      fundamental_tensor_fd, mean_berwald_fd, spray_fd)
from .tensors import (cartan_raised, cartan_tensor, curvature_bundle,
                      fundamental_tensor, spray_coefficients)

__all__ = ["Tolerances", "ClassificationReport", "classify", "classify_points"]


@dataclass(frozen=True)
class Tolerances:
    """Zero-verdict thresholds on sampled sup-norms."""

    riemannian: float = 1e-8
    berwald: float = 1e-7
    weakly_berwald: float = 1e-7
    douglas: float = 1e-6

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, overrides: dict) -> "Tolerances":
        clean = {k: v for k, v in overrides.items() if v is not None}
        return Tolerances(**{**asdict(self), **clean})


_PREDICATE_TENSOR = {
    "riemannian": "cartan",
    "berwald": "berwald",
    "weakly_berwald": "mean_berwald",
    "douglas": "douglas",
}


@dataclass
class ClassificationReport:
    label: str
    seed: int
    sample_count: int
    verdicts: dict
    sup_norms: dict
    tolerances: dict
    worst_points: dict
    crosscheck: dict | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "verdicts": self.verdicts,
            "sup_norms": self.sup_norms,
            "tolerances": self.tolerances,
            "worst_points": self.worst_points,
            "crosscheck": self.crosscheck,
        }


def _crosscheck_point(m: MetricSpec, x, y) -> float:
    """Worst jet-vs-oracle agreement gap over every tensor at one point
    (<= 1 means agreement within the oracle's error estimate)."""
    worst = 0.0
    g = fundamental_tensor(m, x, y)
    g_fd, g_err = fundamental_tensor_fd(m, x, y)
    worst = max(worst, agreement_gap(g.components, g_fd.components, g_err))
    c = cartan_tensor(m, x, y)
    c_fd, c_err = cartan_tensor_fd(m, x, y)
    worst = max(worst, agreement_gap(c.components, c_fd.components, c_err))
    _, dginv = cartan_raised(m, x, y)
    dg_fd, dg_err = dginv_fd(m, x, y)
    worst = max(worst, agreement_gap(dginv.components, dg_fd.components, dg_err))
    spray = spray_coefficients(m, x, y)
    s_fd, s_err = spray_fd(m, x, y)
    worst = max(worst, agreement_gap(spray.components, s_fd.components, s_err))
    bundle = curvature_bundle(m, x, y)
    b_pair = berwald_fd(m, x, y)
    worst = max(worst, agreement_gap(bundle["berwald"].components,
                                     b_pair[0].components, b_pair[1]))
    e_fd, e_err = mean_berwald_fd(m, x, y, berwald=b_pair)
    worst = max(worst, agreement_gap(bundle["mean_berwald"].components,
                                     e_fd.components, e_err))
    d_fd, d_err = douglas_fd(m, x, y, berwald=b_pair)
    worst = max(worst, agreement_gap(bundle["douglas"].components,
                                     d_fd.components, d_err))
    return worst


def classify_points(m: MetricSpec, pts, seed: int,
                    tolerances: Tolerances | None = None,
                    fd_fraction: float = 0.1) -> ClassificationReport:
    """Classification over an explicit (x, y) sample list; the core of
    :func:`classify`, also used for composite metrics whose samples must
    respect both factor slit bundles."""
    tol = tolerances or Tolerances()
    sups = {k: 0.0 for k in ("cartan", "berwald", "mean_berwald", "douglas")}
    worst = {k: None for k in sups}
    stride = 0
    if fd_fraction > 0.0:
        stride = max(1, round(1.0 / min(1.0, fd_fraction)))
    checked = 0
    worst_gap = 0.0
    worst_gap_point = None
    for idx, (x, y) in enumerate(pts):
        c = cartan_tensor(m, x, y)
        bundle = curvature_bundle(m, x, y)
        values = {
            "cartan": c.sup_norm(),
            "berwald": bundle["berwald"].sup_norm(),
            "mean_berwald": bundle["mean_berwald"].sup_norm(),
            "douglas": bundle["douglas"].sup_norm(),
        }
        for key, v in values.items():
            if worst[key] is None or v > sups[key]:
                sups[key] = v
                worst[key] = {"x": [float(t) for t in x],
                              "y": [float(t) for t in y]}
        if stride and idx % stride == 0:
            gap = _crosscheck_point(m, x, y)
            checked += 1
            if gap > worst_gap:
                worst_gap = gap
                worst_gap_point = {"x": [float(t) for t in x],
                                   "y": [float(t) for t in y]}
    verdicts = {
        pred: bool(sups[_PREDICATE_TENSOR[pred]] <= getattr(tol, pred))
        for pred in _PREDICATE_TENSOR
    }
    implications = [("riemannian", "berwald"), ("berwald", "weakly_berwald"),
                    ("berwald", "douglas")]
    for premise, conclusion in implications:
        if verdicts[premise] and not verdicts[conclusion]:
            raise InconsistentVerdictError(
                f"verdicts for {m.label!r} violate {premise} => {conclusion}; "
                f"sup-norms {sups}, tolerances {tol.to_dict()}: adjust tolerances")
    crosscheck = None
    if stride:
        crosscheck = {
            "checked": checked,
            "worst_gap": worst_gap,
            "worst_point": worst_gap_point,
            "pass": bool(worst_gap <= 1.0),
        }
    return ClassificationReport(
        label=m.label,
        seed=seed,
        sample_count=len(pts),
        verdicts=verdicts,
        sup_norms={_PREDICATE_TENSOR[p]: sups[_PREDICATE_TENSOR[p]]
                   for p in _PREDICATE_TENSOR},
        tolerances=tol.to_dict(),
        worst_points={p: worst[_PREDICATE_TENSOR[p]] for p in _PREDICATE_TENSOR},
        crosscheck=crosscheck,
    )


def classify(m: MetricSpec, policy: SamplingPolicy | None = None,
             tolerances: Tolerances | None = None,
             fd_fraction: float = 0.1) -> ClassificationReport:
    """Classify a metric on the policy's sample set.

    ``fd_fraction`` of the samples (rounded up, deterministically spread)
    are recomputed by the finite-difference oracles; the report carries
    the worst agreement gap.
    """
    policy = policy or SamplingPolicy()
    pts = sample_points(m, policy)
    return classify_points(m, pts, policy.seed, tolerances, fd_fraction)
