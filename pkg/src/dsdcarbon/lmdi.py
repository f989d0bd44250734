"""Two-layer additive LMDI decomposition and the DSD/LMDI regression check.

The default ``weighting="end_use"`` applies LMDI to the end-use sum
``c = sum_i e_i * k_i * p * g * s``: each end use's change is split with its
own log-mean weight and the per-end-use terms are summed into the five
first-layer drivers. The result is residual free and the per-end-use emission
factor terms add up to the first-layer k term by construction.

``weighting="aggregate"`` instead weights every first-layer factor by the
log-mean of the aggregate c, with aggregate factors e = sum(e_i) and
k = C / E. It is also residual free, but its per-end-use k terms do not in
general sum to its aggregate k term; the difference is reported as
``layer_gap``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .dsd import ContributionTable
from .errors import (
    DegenerateVariance,
    InsufficientPoints,
    MismatchedEndUses,
    NonpositiveFactor,
    NonpositiveInput,
)
from .model import FactorState

SMALL_VALUE = 1e-10
FIRST_LAYER = ("p", "g", "s", "e", "k")


def log_mean(a: float, b: float) -> float:
    """Logarithmic mean (a - b) / (ln a - ln b), equal to a when a == b."""
    if not (a > 0 and b > 0):
        raise NonpositiveInput(f"log_mean needs positive arguments, got {a}, {b}")
    a, b = float(a), float(b)
    if a == b:
        return a
    x = a / b - 1.0
    if abs(x) < 1e-4:
        # series of x / log1p(x) avoids cancellation near a == b
        return b * (1.0 + x / 2.0 - x * x / 12.0 + x ** 3 / 24.0)
    return (a - b) / (math.log(a) - math.log(b))


def _substitute(value: float, name: str, flagged: set[str]) -> float:
    if value > 0:
        return value
    flagged.add(name)
    return SMALL_VALUE


def _end_use_terms(state: FactorState, i: int, u: str, flagged: set[str]):
    """(c_i, e_i, k_i) with zeros replaced; a replaced c_i is rebuilt from its factors
    so that ln c_i still splits exactly into the factor log-ratios."""
    e = _substitute(state.e_i[i], f"e:{u}", flagged)
    k = _substitute(state.k[i], f"k:{u}", flagged)
    c = state.c_i[i]
    if not c > 0:
        flagged.add(f"c:{u}")
        c = e * k * state.p * state.g * state.s
    return c, e, k


@dataclass
class LmdiTable:
    period: tuple[int | None, int | None]
    end_uses: tuple[str, ...]
    delta_c: float
    by_driver: dict[str, float]
    k_by_end_use: dict[str, float]
    substituted: tuple[str, ...] = ()
    weighting: str = "end_use"

    @property
    def k_layer2_total(self) -> float:
        return math.fsum(self.k_by_end_use.values())

    @property
    def layer_gap(self) -> float:
        return self.by_driver["k"] - self.k_layer2_total

    def total(self) -> float:
        return math.fsum(self.by_driver.values())


def _check(state0: FactorState, stateT: FactorState) -> None:
    if state0.end_uses != stateT.end_uses:
        raise MismatchedEndUses(f"end uses differ: {state0.end_uses} vs {stateT.end_uses}")


def lmdi_second_layer_k(
    state0: FactorState, stateT: FactorState, flagged: set[str] | None = None
) -> dict[str, float]:
    """Per-end-use emission-factor effects L(c_i,T, c_i,0) * ln(k_i,T / k_i,0).

    End uses with no emissions at either endpoint contribute exactly zero.
    """
    _check(state0, stateT)
    flagged = set() if flagged is None else flagged
    out = {}
    for i, u in enumerate(state0.end_uses):
        if state0.c_i[i] <= 0 and stateT.c_i[i] <= 0:
            out[u] = 0.0
            continue
        c0, _, k0 = _end_use_terms(state0, i, u, flagged)
        cT, _, kT = _end_use_terms(stateT, i, u, flagged)
        out[u] = float(log_mean(cT, c0) * math.log(kT / k0)) + 0.0
    return out


def _first_layer_end_use(state0, stateT, flagged):
    terms = {d: [] for d in FIRST_LAYER}
    common = {"p": (state0.p, stateT.p), "g": (state0.g, stateT.g), "s": (state0.s, stateT.s)}
    for name, (x0, xT) in common.items():
        if not (x0 > 0 and xT > 0):
            raise NonpositiveFactor(f"factor {name} must be positive")
    for i, u in enumerate(state0.end_uses):
        if state0.c_i[i] <= 0 and stateT.c_i[i] <= 0:
            continue
        c0, e0, k0 = _end_use_terms(state0, i, u, flagged)
        cT, eT, kT = _end_use_terms(stateT, i, u, flagged)
        L = log_mean(cT, c0)
        for name, (x0, xT) in common.items():
            terms[name].append(L * math.log(xT / x0))
        terms["e"].append(L * math.log(eT / e0))
        terms["k"].append(L * math.log(kT / k0))
    return {d: math.fsum(v) + 0.0 for d, v in terms.items()}


def _first_layer_aggregate(state0, stateT, flagged):
    def agg_k(st):
        return math.fsum(st.k * st.w)

    factors = {
        "p": (state0.p, stateT.p),
        "g": (state0.g, stateT.g),
        "s": (state0.s, stateT.s),
        "e": (state0.e, stateT.e),
        "k": (agg_k(state0), agg_k(stateT)),
    }
    c0 = _substitute(state0.c, "c", flagged)
    cT = _substitute(stateT.c, "c", flagged)
    L = log_mean(cT, c0)
    out = {}
    for name, (x0, xT) in factors.items():
        x0 = _substitute(x0, name, flagged)
        xT = _substitute(xT, name, flagged)
        out[name] = L * math.log(xT / x0) + 0.0
    return out


def lmdi_first_layer(
    state0: FactorState, stateT: FactorState, weighting: str = "end_use"
) -> LmdiTable:
    """First-layer drivers p, g, s, e, k plus the second-layer split of k."""
    _check(state0, stateT)
    flagged: set[str] = set()
    if weighting == "end_use":
        first = _first_layer_end_use(state0, stateT, flagged)
    elif weighting == "aggregate":
        first = _first_layer_aggregate(state0, stateT, flagged)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    second = lmdi_second_layer_k(state0, stateT, flagged)
    return LmdiTable(
        period=(state0.year, stateT.year),
        end_uses=state0.end_uses,
        delta_c=stateT.c - state0.c,
        by_driver=first,
        k_by_end_use=second,
        substituted=tuple(sorted(flagged)),
        weighting=weighting,
    )


@dataclass
class RegressionStats:
    slope: float
    intercept: float
    r_squared: float
    ci95_halfwidth: float
    n_points: int
    sign_agreement: int = 0
    labels: list[str] = field(default_factory=list)

    @property
    def all_signs_agree(self) -> bool:
        return self.sign_agreement == self.n_points


def compare_dsd_lmdi(
    dsd_points: Sequence[float], lmdi_points: Sequence[float], labels: Sequence[str] = ()
) -> RegressionStats:
    """Ordinary least squares of LMDI contributions on DSD contributions."""
    x = np.asarray(dsd_points, dtype=float)
    y = np.asarray(lmdi_points, dtype=float)
    if x.shape != y.shape:
        raise ValueError("point sets differ in length")
    n = x.size
    if n < 2:
        raise InsufficientPoints(f"need at least 2 paired points, got {n}")
    xm, ym = float(x.mean()), float(y.mean())
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise DegenerateVariance("all DSD values are equal")
    sxy = float(np.sum((x - xm) * (y - ym)))
    slope = sxy / sxx
    intercept = ym - slope * xm
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    if n > 2:
        se = math.sqrt(ss_res / (n - 2) / sxx)
        half = float(stats.t.ppf(0.975, n - 2)) * se
    else:
        half = math.nan
    # quadrants I/III: same sign; exact zeros on both sides count as agreeing
    agree = int(np.sum(np.sign(x) == np.sign(y)))
    return RegressionStats(float(slope), float(intercept), float(r2), half, n, agree, list(labels))


def paired_points(
    dsd_tables: Sequence[ContributionTable], lmdi_tables: Sequence[LmdiTable]
) -> list[tuple[str, float, float]]:
    """Pair first-layer and per-end-use k contributions across periods.

    The DSD share effect has no LMDI counterpart and is not paired.
    """
    pairs = []
    for dt, lt in zip(dsd_tables, lmdi_tables):
        if dt.period != lt.period:
            raise ValueError(f"period mismatch {dt.period} vs {lt.period}")
        tag = f"{dt.period[0]}-{dt.period[1]}"
        agg = dt.aggregates()
        for d in FIRST_LAYER:
            pairs.append((f"{tag}:{d}", agg[d], lt.by_driver[d]))
        for u in dt.end_uses:
            pairs.append((f"{tag}:k:{u}", dt.by_driver[f"k:{u}"], lt.k_by_end_use[u]))
    return pairs
