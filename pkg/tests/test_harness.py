import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorlab.errors import ReportSchemaError, UnknownIdError
from sectorlab.harness import (
    SCHEMA_VERSION,
    SUITE,
    CampaignConfig,
    collapse_table,
    default_config,
    replay,
    run_campaign,
    shrink_counterexample,
    write_summary_csv,
)
from sectorlab.inequalities import replay_witness
from sectorlab.linalg import matrix_from_json, matrix_to_json
from sectorlab.sector import GeneratorConfig


def strip(report):
    d = report.to_dict()
    d.pop("wall_time")
    return d


def test_chan301_example():
    rep = run_campaign(default_config("chan301", 500, seed=7))
    assert rep.trials_run == 500 and rep.passes == rep.hypothesis_hits == 500
    assert rep.counterexamples == []


def test_remark_single_trial():
    rep = run_campaign(default_config("remark", 1))
    assert rep.hypothesis_hits == rep.passes == 1
    w = rep.worst_residual
    assert w["value"] == pytest.approx(2.5) and w["trial_index"] == 0


def test_zero_measure_config():
    rep = run_campaign(default_config("t2", 1, theta=0.0))
    assert rep.trials_run == 1 and rep.hypothesis_hits in (0, 1)
    json.loads(rep.to_json())


@settings(max_examples=15)
@given(st.sampled_from(SUITE + ("neg_le17",)), st.integers(1, 12), st.integers(0, 2**40))
def test_counter_invariants(tid, trials, seed):
    rep = run_campaign(default_config(tid, trials, seed))
    assert rep.passes <= rep.hypothesis_hits <= rep.trials_run == trials
    assert bool(rep.counterexamples) == (rep.passes < rep.hypothesis_hits)
    assert sum(rep.filter_reasons.values()) == trials - rep.hypothesis_hits


@pytest.mark.parametrize("tid", ["le17", "e305", "thmK", "jc_p1"])
def test_deterministic_and_parallel(tid):
    cfg = default_config(tid, 60, seed=3)
    a, b, c = run_campaign(cfg), run_campaign(cfg), run_campaign(cfg, workers=4)
    assert strip(a) == strip(b) == strip(c)


def test_worst_residual_is_minimum():
    rep = run_campaign(default_config("e41", 40, seed=1))
    residuals = [replay_witness("e41", _trial_witness("e41", 1, i)).residual for i in range(40)]
    assert rep.worst_residual["value"] == min(residuals)
    assert rep.worst_residual["trial_index"] == int(np.argmin(residuals))


def _trial_witness(tid, seed, index):
    from sectorlab.harness import _Sampler, _trial_rng
    from sectorlab.inequalities import encode_witness

    kwargs = _Sampler(default_config(tid, 1, seed)).draw(_trial_rng(seed, index))
    return encode_witness(**kwargs)


def test_counterexamples_replayable():
    rep = run_campaign(default_config("neg_le17", 30, seed=2))
    assert rep.counterexamples
    for ce in rep.counterexamples:
        out = replay_witness("neg_le17", ce["witness"])
        assert not out.passed and out.residual == ce["value"]


def test_filter_reasons_reported():
    rep = run_campaign(default_config("t2", 200, seed=0))
    assert rep.filter_reasons.get("not-in-sector", 0) > 0
    assert rep.filter_reasons.get("sign-condition-miss", 0) > 0
    assert 0 < rep.filter_rate < 1


class TestConfig:
    def test_unknown_theorem(self):
        with pytest.raises(UnknownIdError):
            default_config("nope")
        with pytest.raises(UnknownIdError):
            CampaignConfig("nope")

    @pytest.mark.parametrize("kw", [dict(map_id="bogus"), dict(function_id="power:x"),
                                    dict(mean_ids=("arithmetic", "median", "geometric"))])
    def test_catalog_resolution(self, kw):
        with pytest.raises(UnknownIdError):
            default_config("m1", **kw)

    def test_trials(self):
        with pytest.raises(ValueError):
            CampaignConfig("le17", trials=0)

    def test_json_roundtrip(self):
        cfg = default_config("thmK", 17, seed=5, theta=0.3, exponent=None)
        assert CampaignConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg

    def test_no_workers_in_echo(self):
        assert "workers" not in json.dumps(run_campaign(default_config("e25", 2), workers=2).to_dict()["config"])


class TestReportSchema:
    def test_keys(self):
        d = run_campaign(default_config("le17", 5)).to_dict()
        for key in ("schema_version", "theorem_id", "config", "counters", "worst_residual", "witnesses", "wall_time"):
            assert key in d
        assert d["schema_version"] == SCHEMA_VERSION
        assert set(d["counters"]) == {"trials_run", "hypothesis_hits", "passes", "filter_reasons"}

    def test_csv(self, tmp_path):
        reps = [run_campaign(default_config(t, 3)) for t in ("le17", "e41")]
        path = tmp_path / "s.csv"
        write_summary_csv(reps, path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["theorem_id", "trials", "hits", "passes", "worst_residual"]
        assert [r[0] for r in rows[1:]] == ["le17", "e41"]


class TestReplay:
    def test_identical(self, tmp_path):
        rep = run_campaign(default_config("chan301", 100, seed=7))
        path = tmp_path / "r.json"
        rep.write(path)
        again = replay(path)
        assert again.replay_matches
        assert strip(again) == strip(rep)

    def test_tampered_seed(self, tmp_path):
        rep = run_campaign(default_config("chan301", 50, seed=7))
        d = rep.to_dict()
        d["config"]["generator"]["seed"] = 8
        path = tmp_path / "r.json"
        path.write_text(json.dumps(d))
        assert replay(path).replay_matches is False

    def test_empty(self, tmp_path):
        path = tmp_path / "e.json"
        path.write_text("{}")
        with pytest.raises(ReportSchemaError):
            replay(path)

    def test_version_mismatch(self, tmp_path):
        d = run_campaign(default_config("e41", 2)).to_dict()
        d["schema_version"] = 99
        path = tmp_path / "v.json"
        path.write_text(json.dumps(d))
        with pytest.raises(ReportSchemaError):
            replay(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("nope")
        with pytest.raises(ReportSchemaError):
            replay(path)


class TestShrink:
    def test_minimal_unchanged(self):
        w = {"A": matrix_to_json(np.array([[1 + 1j]])), "B": matrix_to_json(np.array([[1 - 1j]]))}
        assert not replay_witness("neg_le17", w).passed
        assert shrink_counterexample("neg_le17", w) == w

    def test_passing_witness_returned(self):
        w = {"A": matrix_to_json(np.eye(2)), "B": matrix_to_json(np.eye(2))}
        assert shrink_counterexample("neg_le17", w) == w

    @pytest.mark.parametrize("seed", range(5))
    def test_negative_control_shrinks(self, seed):
        rep = run_campaign(default_config("neg_le17", 20, seed=seed, dim=4))
        w = rep.counterexamples[0]["witness"]
        small = shrink_counterexample("neg_le17", w)
        assert matrix_from_json(small["A"]).shape[0] <= 2
        out = replay_witness("neg_le17", small)
        assert out.hypotheses_ok and not out.passed

    def test_step_cap(self):
        rep = run_campaign(default_config("neg_le17", 5, seed=1, dim=5))
        w = rep.counterexamples[0]["witness"]
        one = shrink_counterexample("neg_le17", w, max_steps=1)
        assert matrix_from_json(one["A"]).shape[0] == 4
        assert not replay_witness("neg_le17", one).passed


def test_collapse_table_coherent():
    rows = collapse_table(seed=4)
    assert rows
    for row in rows:
        assert row["gap"] <= 1e-9 and row["pass"] == row["ancestor_pass"]


def test_generator_echo():
    rep = run_campaign(default_config("m1", 3, seed=9))
    gen = GeneratorConfig.from_json(rep.to_dict()["config"]["generator"])
    assert gen.re_bounds == (1.0, 2.0) and gen.seed == 9
