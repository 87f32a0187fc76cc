"""CSV, SVG and JSON outputs of `sococast run` and `sococast example-config`."""
import os
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from matplotlib import rc_context
from matplotlib.figure import Figure

from sococast.schema.config import ExperimentConfig, RegretRecord

CSV_FLOAT_FORMAT = "%.17g"
RECORD_FIELDS = list(RegretRecord.model_fields)
SUMMARY_FIELDS = [
    "seed",
    "terminal_regret",
    "theorem_bound_value",
    "exceeded",
    "comparator_cum_risk",
    "certified",
    "clip_events",
    "clamp_events",
]
QUANTILES = (0.1, 0.5, 0.9)


def _weights_cell(weights) -> str:
    if weights is None:
        return ""
    return ";".join(format(w, ".17g") for w in weights)


def records_frame(records: Sequence[RegretRecord]) -> pd.DataFrame:
    rows = [record.model_dump() for record in records]
    frame = pd.DataFrame(rows, columns=RECORD_FIELDS)
    frame["weights_snapshot"] = [_weights_cell(record.weights_snapshot) for record in records]
    return frame


def write_records_csv(records: Sequence[RegretRecord], path: str) -> str:
    """One row per round; header names exactly the `RegretRecord` fields."""
    records_frame(records).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan")
    return path


def summary_frame(results) -> pd.DataFrame:
    rows = [
        {
            "seed": r.seed,
            "terminal_regret": r.terminal_regret,
            "theorem_bound_value": r.terminal_bound,
            "exceeded": r.exceeded,
            "comparator_cum_risk": r.comparator_cum_risk,
            "certified": r.certified,
            "clip_events": r.clip_events,
            "clamp_events": r.clamp_events,
        }
        for r in results
    ]
    return pd.DataFrame(rows, columns=SUMMARY_FIELDS)


def write_summary_csv(results, path: str) -> str:
    """Per-seed terminal regret, bound and exceedance flag."""
    summary_frame(results).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan")
    return path


def regret_quantiles(results) -> Tuple[np.ndarray, np.ndarray]:
    """Rounds 1..T and the (10%, 50%, 90%) quantiles of regret across seeds, shape (3, T)."""
    regrets = np.array([[record.regret for record in r.records] for r in results])
    t = np.arange(1, regrets.shape[1] + 1)
    return t, np.quantile(regrets, QUANTILES, axis=0)


def write_regret_svg(results, path: str, title: str = "") -> str:
    """Median regret with a 10%-90% band against log t, and the median bound."""
    t, (low, median, high) = regret_quantiles(results)
    bounds = np.array([[record.theorem_bound_value for record in r.records] for r in results])
    with rc_context({"svg.hashsalt": "sococast"}):
        fig = Figure(figsize=(6.4, 4.0))
        ax = fig.subplots()
        ax.fill_between(t, low, high, alpha=0.3, label="10%-90%")
        ax.plot(t, median, label="median regret")
        with np.errstate(all="ignore"):
            median_bound = np.nanmedian(bounds, axis=0) if np.isfinite(bounds).any() else None
        if median_bound is not None:
            ax.plot(t, median_bound, linestyle="--", label="bound")
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("regret")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper left")
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_outputs(results, directory: str, svg: bool = True, title: str = "") -> List[str]:
    """regret_seed{seed}.csv per seed, summary.csv and optionally regret.svg."""
    os.makedirs(directory, exist_ok=True)
    paths = [
        write_records_csv(r.records, os.path.join(directory, f"regret_seed{r.seed}.csv"))
        for r in results
    ]
    paths.append(write_summary_csv(results, os.path.join(directory, "summary.csv")))
    if svg:
        paths.append(write_regret_svg(results, os.path.join(directory, "regret.svg"), title))
    return paths


def config_json(config: ExperimentConfig) -> str:
    """The config as JSON with every default explicit; unset optional fields are omitted."""
    return config.model_dump_json(indent=2, exclude_none=True) + "\n"
