import json
import math
import os
from pathlib import Path

import pytest

import stagecraft

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_statistics():
    assert stagecraft.cronbach_alpha([[1, 1], [2, 2], [4, 4]]) == 1.0
    assert stagecraft.pearson([1, 2, 3], [3, 2, 1]) == -1.0
    with pytest.raises(stagecraft.StagecraftError):
        stagecraft.pearson([1, 1, 1], [1, 2, 3])


def test_embedding_is_unit_length():
    v = stagecraft.hash_embedding("sword fight")
    assert v == stagecraft.hash_embedding("sword fight")
    assert math.isclose(math.sqrt(sum(x * x for x in v)), 1.0, abs_tol=1e-9)


def test_validate_scene():
    scene = json.loads((FIXTURES / "scenes" / "crowded-table-01.json").read_text(encoding="utf-8"))
    issues = stagecraft.validate_scene(scene)
    assert len(issues) == 1 and issues[0]["warning"]
    scene["characters"][1]["name"] = scene["characters"][0]["name"]
    assert any(not i["warning"] for i in stagecraft.validate_scene(scene))


def test_cost_report():
    ledger = [{"role": "narrator", "model_id": "gpt-3.5", "input_tokens": 25723, "output_tokens": 4203},
              {"role": "character", "model_id": "gpt-4", "input_tokens": 75349, "output_tokens": 14407}]
    prices = {m: {"input": "0.5", "output": "1.5"} for m in ("gpt-3.5", "gpt-4")}
    report = stagecraft.cost_report(ledger, prices)
    assert report["total_cost"] == "0.0785"
    assert [r["cost"] for r in report["roles"]] == ["0.0192", "0.0593"]


def test_replay_run_evaluate_aggregate(tmp_path):
    batch = json.loads((FIXTURES / "replay" / "batch.json").read_text(encoding="utf-8"))
    scene = FIXTURES / "scenes" / f"{batch['single']}.json"
    kwargs = dict(model=batch["default_model"], narrator=batch["narrator_model"], rounds=batch["rounds"],
                  replay=FIXTURES / "replay" / "script")
    first = stagecraft.run(scene, out=tmp_path / "a", **kwargs)
    second = stagecraft.run(scene, out=tmp_path / "b", **kwargs)
    assert first[0]["status"] == "completed"
    assert first == second
    run_dir = tmp_path / "a" / batch["single"]
    assert stagecraft.check_turn_structure(str(run_dir)) == []

    records = stagecraft.evaluate(tmp_path / "a", "sim-judge")
    assert len(records) == 2
    report = stagecraft.aggregate(records)
    assert report["models"][0]["model"] == batch["default_model"]
    assert "Average" in stagecraft.render_aggregate(records)


def test_replay_miss_is_an_error(tmp_path):
    scene = FIXTURES / "scenes" / "hamlet-01.json"
    results = stagecraft.run(scene, model="never-recorded", replay=FIXTURES / "replay" / "script")
    assert results[0]["status"] == "failed"
    assert "ReplayMiss" in results[0]["error"] or "replay" in results[0]["error"].lower()
