"""
ReliaSpan - Monte Carlo Experiment Engine

The attack is drawn once per experiment; every trial rebuilds the spanner
from a fresh trial seed, so the loss distribution is over constructions.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from reliaspan.analysis.loss import LossReport, loss_report
from reliaspan.analysis.resilience1d import bad_mask, badness_by_round, damaged_pairs_1d
from reliaspan.attacks.generators import Attack, generate
from reliaspan.construction.gradation import build_gradation
from reliaspan.construction.spanner1d import (
    Spanner1D,
    build_1d,
    build_boosted_1d,
    derive_params,
    edge_count,
)
from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import CONSTRUCTION, TRIAL, derive_seed, rng
from reliaspan.geometry.spannerhd import bad_sequence, build_hd, damaged_pairs_hd, edge_count_hd
from reliaspan.schemas import ExperimentSpec, SummarySchema

settings = get_settings()

THEORETICAL_C = 2.0**11

CSV_COLUMNS = [
    "trial", "seed", "n", "variant", "rho", "delta", "c_const", "edges", "attack_size",
    "bad_pairs", "ext_lower", "ext_upper", "loss_lower", "loss_upper", "defects", "bad_points",
]


def regime_of(c_const: float) -> str:
    """Guarantees are claimed only with the proven constant"""
    return "theoretical" if c_const >= THEORETICAL_C else "empirical"


def experiment_points(spec: ExperimentSpec) -> np.ndarray:
    """Uniform points of [0,1)^dim shared by all trials of an hd experiment"""
    return rng(derive_seed("points", spec.base_seed, spec.n, spec.dim)).random((spec.n, spec.dim))


def experiment_attack(spec: ExperimentSpec) -> Attack:
    return generate(
        spec.attack_kind,
        spec.n,
        size=spec.attack_size,
        fraction=spec.attack_fraction,
        seed=spec.attack_seed,
    )


def _loss_row(report: Optional[LossReport], attack: Attack) -> dict:
    if report is None:
        return {"bad_pairs": 0, "ext_lower": 0, "ext_upper": 0, "loss_lower": math.nan, "loss_upper": math.nan}
    lo, hi = report.loss_rate_bounds
    return {
        "bad_pairs": report.bad_pairs,
        "ext_lower": report.extension_lower,
        "ext_upper": report.extension_upper,
        "loss_lower": lo,
        "loss_upper": hi,
    }


def run_trial(spec: ExperimentSpec, attack: Attack, t: int) -> dict:
    """
    One construction, the fixed attack, one loss evaluation

    Returns:
        CSV row (plus a 'badness' frame for 1-D when requested)
    """
    seed = derive_seed(TRIAL, spec.base_seed, t)
    c_const = settings.C_CONST_DEFAULT if spec.c_const is None else spec.c_const
    blocked = attack.mask()
    row = {
        "trial": t, "seed": seed, "n": spec.n, "variant": spec.variant, "rho": spec.rho,
        "delta": spec.delta, "c_const": c_const,
    }
    extra: dict = {}

    if spec.variant == "1d":
        if spec.boosted:
            graph = build_boosted_1d(spec.n, spec.rho, spec.delta, c_const, seed)
            edges = sum(edge_count(c).total for c in graph.copies)
        else:
            params = derive_params(spec.n, spec.rho, spec.delta, c_const)
            graph = build_1d(build_gradation(spec.n, derive_seed(CONSTRUCTION, seed)), params)
            edges = edge_count(graph).total
        pairs = damaged_pairs_1d(graph, blocked)
        defects = 0
        bad_points = None
        if isinstance(graph, Spanner1D):
            bad = bad_mask(graph, blocked)
            bad_points = int(bad.sum())
            # damaged pairs between two good points are defects
            good = ~bad[pairs.survivors - 1]
            defects = int(np.triu(pairs.matrix & np.outer(good, good), 1).sum())
            if spec.badness:
                extra["badness"] = badness_by_round(graph, attack.vertices)
        stairway_bad = None if bad_points is None else bad_points - attack.size
        variant = "probabilistic" if spec.delta is not None else "expectation"
    else:
        hd = build_hd(experiment_points(spec), spec.eps, spec.rho, spec.delta, c_const, seed)
        edges = edge_count_hd(hd).total
        pairs = damaged_pairs_hd(hd, blocked)
        final = bad_sequence(hd, blocked)[-1]
        bad_points = int(final.sum())
        good = ~final[pairs.survivors - 1]
        defects = int(np.triu(pairs.matrix & np.outer(good, good), 1).sum())
        stairway_bad = bad_points - attack.size
        variant = hd.params.variant

    report = loss_report(pairs, attack.size, variant, stairway_bad) if attack.size else None
    if defects:
        app_logger.warning(f"Trial {t}: {defects} damaged pair(s) between good points")
    row.update(edges=edges, attack_size=attack.size, defects=defects, bad_points=bad_points)
    row.update(_loss_row(report, attack))
    row.update(extra)
    return row


@dataclass
class Summary:
    """
    Aggregate of an experiment

    Loss statistics use the upper loss bound of each trial. mean_loss is None
    for an empty attack.
    """
    trials: int
    regime: str
    variant: str
    attack_size: int
    mean_loss: Optional[float]
    mean_loss_ci_upper: Optional[float]
    tail_freq: Optional[float]
    tail_ci_upper: Optional[float]
    mean_edges: float
    defect_count: int
    mean_bad_ratio: Optional[float]
    rows: pd.DataFrame
    badness: Optional[pd.DataFrame] = None

    def to_schema(self) -> SummarySchema:
        return SummarySchema(
            trials=self.trials,
            regime=self.regime,
            variant=self.variant,
            attack_size=self.attack_size,
            mean_loss=self.mean_loss,
            mean_loss_ci_upper=self.mean_loss_ci_upper,
            tail_freq=self.tail_freq,
            tail_ci_upper=self.tail_ci_upper,
            mean_edges=self.mean_edges,
            defect_count=self.defect_count,
            mean_bad_ratio=self.mean_bad_ratio,
        )


def mean_upper_bound(values: np.ndarray, confidence: float, normal_min: int) -> float:
    """One-sided upper confidence bound on a mean (normal, or Student t for few trials)"""
    T = len(values)
    mean = float(values.mean())
    if T < 2:
        return mean
    se = float(values.std(ddof=1)) / math.sqrt(T)
    q = stats.norm.ppf(confidence) if T >= normal_min else stats.t.ppf(confidence, T - 1)
    return mean + float(q) * se


def proportion_upper_bound(hits: int, T: int, confidence: float, normal_min: int) -> float:
    """One-sided upper bound on a frequency: normal approximation, or Clopper-Pearson for few trials"""
    if T >= normal_min:
        p = hits / T
        return p + float(stats.norm.ppf(confidence)) * math.sqrt(p * (1 - p) / T)
    if hits >= T:
        return 1.0
    return float(stats.beta.ppf(confidence, hits + 1, T - hits))


class ExperimentRunner:
    """
    Runs the trials of an ExperimentSpec and reduces them in trial order

    This class handles:
    - Drawing the fixed attack
    - Dispatching trials (optionally to a process pool)
    - Confidence bounds and the CSV report
    """

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.settings = settings
        self.attack = experiment_attack(spec)

    def _trial_rows(self) -> List[dict]:
        workers = self.spec.workers or self.settings.HARNESS_WORKERS
        indices = range(1, self.spec.trials + 1)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(run_trial, [self.spec] * self.spec.trials, [self.attack] * self.spec.trials, indices))
        return [run_trial(self.spec, self.attack, t) for t in indices]

    def run(self) -> Summary:
        spec = self.spec
        c_const = self.settings.C_CONST_DEFAULT if spec.c_const is None else spec.c_const
        app_logger.info(
            f"Experiment: variant={spec.variant}, n={spec.n}, rho={spec.rho}, delta={spec.delta}, "
            f"c={c_const}, |B|={self.attack.size}, trials={spec.trials}"
        )
        raw = self._trial_rows()
        badness_frames = [r.pop("badness") for r in raw if "badness" in r]
        rows = pd.DataFrame(raw, columns=CSV_COLUMNS)

        confidence = self.settings.CONFIDENCE_LEVEL
        normal_min = self.settings.CI_NORMAL_MIN_TRIALS
        mean_loss = ci = tail = tail_ci = bad_ratio = None
        if self.attack.size:
            losses = rows["loss_upper"].to_numpy(dtype=float)
            mean_loss = float(losses.mean())
            ci = mean_upper_bound(losses, confidence, normal_min)
            hits = int((losses > spec.rho).sum())
            tail = hits / spec.trials
            tail_ci = proportion_upper_bound(hits, spec.trials, confidence, normal_min)
            if rows["bad_points"].notna().all():
                bad_ratio = float(rows["bad_points"].astype(float).mean()) / self.attack.size
        else:
            app_logger.warning("Empty attack: loss rate undefined, reported as N/A")

        badness = None
        if badness_frames:
            badness = pd.concat(badness_frames).groupby("round", as_index=False).agg(
                points=("points", "sum"), bad=("bad", "sum"), bound=("bound", "first")
            )
            badness["bad_rate"] = badness["bad"] / badness["points"]

        summary = Summary(
            trials=spec.trials,
            regime=regime_of(c_const),
            variant=spec.variant,
            attack_size=self.attack.size,
            mean_loss=mean_loss,
            mean_loss_ci_upper=ci,
            tail_freq=tail,
            tail_ci_upper=tail_ci,
            mean_edges=float(rows["edges"].mean()),
            defect_count=int(rows["defects"].sum()),
            mean_bad_ratio=bad_ratio,
            rows=rows,
            badness=badness,
        )
        if spec.output:
            rows.to_csv(spec.output, index=False)
            app_logger.info(f"Wrote {len(rows)} trial rows to {spec.output}")
        app_logger.info(
            f"Summary ({summary.regime}): mean loss={mean_loss}, CI upper={ci}, tail={tail}, "
            f"defects={summary.defect_count}"
        )
        return summary


def run_trials(spec: ExperimentSpec) -> Summary:
    """Run an experiment end to end"""
    return ExperimentRunner(spec).run()


CURVE_COLUMNS = [
    "c_const", "regime", "trials", "attack_size", "mean_loss", "mean_loss_ci_upper",
    "tail_freq", "tail_ci_upper", "mean_edges", "defect_count", "mean_bad_ratio",
]


def loss_curve(spec: ExperimentSpec, c_values: Sequence[float], output: Optional[str] = None) -> pd.DataFrame:
    """
    Rerun one experiment for each constant c, one Summary row per c

    Args:
        spec: Experiment; its c_const and output are overridden
        c_values: Constants to sweep, each >= 1
        output: Optional CSV path for the curve

    Returns:
        DataFrame with CURVE_COLUMNS, ascending in c_const
    """
    values = sorted({float(c) for c in c_values})
    if not values or values[0] < 1:
        raise InvalidInputError("c_values must be non-empty and every c must be >= 1")

    rows = []
    for c in values:
        summary = run_trials(spec.model_copy(update={"c_const": c, "output": None}))
        row = summary.to_schema().model_dump(exclude={"format", "variant"})
        row["c_const"] = c
        rows.append(row)
    curve = pd.DataFrame(rows, columns=CURVE_COLUMNS)

    losses = curve["mean_loss"].dropna()
    if len(losses) == len(curve) and not losses.is_monotonic_decreasing:
        app_logger.warning(f"Mean loss does not decrease with c over {values}")
    if output:
        curve.to_csv(output, index=False)
        app_logger.info(f"Wrote loss curve over c={values} to {output}")
    return curve
