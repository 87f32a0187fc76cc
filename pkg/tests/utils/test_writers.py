import json
import math

import numpy as np
import pandas as pd
import pytest
from sococast.schema.config import ExperimentConfig, RegretRecord
from sococast.sim.harness import SeedResult
from sococast.utils.writers import (
    RECORD_FIELDS,
    SUMMARY_FIELDS,
    config_json,
    regret_quantiles,
    write_outputs,
    write_records_csv,
)


def fake_result(seed: int, T: int = 5, bound: float = 10.0, weights=None) -> SeedResult:
    records = [
        RegretRecord(
            t=t,
            inst_risk=0.1,
            cum_risk=0.1 * t,
            comparator_cum_risk=0.05 * t,
            regret=0.05 * t * (seed + 1),
            theorem_bound_value=bound if t >= 4 else math.nan,
            clip_events=0,
            weights_snapshot=weights,
        )
        for t in range(1, T + 1)
    ]
    return SeedResult(
        seed=seed,
        records=records,
        predictions=np.zeros((T, 2)),
        comparator=np.zeros(2),
        comparator_cum_risk=0.05 * T,
        certified=True,
        clip_events=0,
        clamp_events=1,
    )


def test_records_csv(tmp_path):
    result = fake_result(0, weights=[0.25, 0.75])
    path = write_records_csv(result.records, str(tmp_path / "regret.csv"))
    frame = pd.read_csv(path)
    assert list(frame.columns) == RECORD_FIELDS
    assert frame["t"].tolist() == [1, 2, 3, 4, 5]
    assert frame["regret"].iloc[-1] == pytest.approx(0.25)
    assert math.isnan(frame["theorem_bound_value"].iloc[0])
    assert frame["weights_snapshot"].iloc[0] == "0.25;0.75"


def test_write_outputs(tmp_path):
    results = [fake_result(0), fake_result(1, bound=0.1)]
    paths = write_outputs(results, str(tmp_path / "out"), svg=True, title="ons / ar")
    names = sorted(p.split("/")[-1] for p in paths)
    assert names == ["regret.svg", "regret_seed0.csv", "regret_seed1.csv", "summary.csv"]

    summary = pd.read_csv(tmp_path / "out" / "summary.csv")
    assert list(summary.columns) == SUMMARY_FIELDS
    assert summary["exceeded"].tolist() == [False, True]
    assert summary["clamp_events"].tolist() == [1, 1]

    svg = (tmp_path / "out" / "regret.svg").read_text()
    assert svg.startswith("<?xml")
    assert "<svg" in svg

    paths = write_outputs(results, str(tmp_path / "no_svg"), svg=False)
    assert not any(p.endswith(".svg") for p in paths)


def test_regret_quantiles():
    t, quantiles = regret_quantiles([fake_result(seed) for seed in range(3)])
    assert t.tolist() == [1, 2, 3, 4, 5]
    assert quantiles.shape == (3, 5)
    assert quantiles[1].tolist() == pytest.approx([0.1 * t for t in range(1, 6)])


def test_config_json():
    text = config_json(ExperimentConfig())
    parsed = json.loads(text)
    assert parsed["T"] == 2000
    assert parsed["learner"]["kind"] == "ons"
    assert parsed["forecaster"]["family"] == "ar"
    assert "grad_bound" not in parsed["forecaster"]
    assert ExperimentConfig.model_validate(parsed) == ExperimentConfig()
