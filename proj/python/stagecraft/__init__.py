"""Python access to the stagecraft simulation core."""

import json
from pathlib import Path

from . import _stagecraft
from ._stagecraft import StagecraftError, cronbach_alpha, pearson, hash_embedding, check_turn_structure

__all__ = [
    "StagecraftError",
    "cronbach_alpha",
    "pearson",
    "hash_embedding",
    "check_turn_structure",
    "validate_scene",
    "run",
    "evaluate",
    "aggregate",
    "render_aggregate",
    "cost_report",
]


def validate_scene(scene):
    """List of violations for a scene given as a dict or a path to a JSON file."""
    if not isinstance(scene, dict):
        scene = json.loads(Path(scene).read_text(encoding="utf-8"))
    return json.loads(_stagecraft.validate_scene_json(json.dumps(scene)))


def run(scene_path, *, model, narrator=None, cast=None, rounds=3, recall_k=5, out=None, parallel=1,
        backend=None, record=None, replay=None):
    """Run one scene file or a directory of scenes. Returns one manifest dict per scene, with its events."""
    config = {"default_model": model, "narrator_model": narrator or model, "rounds": rounds,
              "recall_k": recall_k, "cast": cast or {}}
    raw = _stagecraft.run_json(str(scene_path), json.dumps(config), str(out or ""), parallel,
                               str(backend or ""), str(record or ""), str(replay or ""))
    return json.loads(raw)


def evaluate(runs_dir, judge, *, parallel=1, backend=None, record=None, replay=None):
    """Score every trajectory under runs_dir. Returns a list of record dicts."""
    lines = _stagecraft.evaluate_jsonl(str(runs_dir), judge, parallel, str(backend or ""), str(record or ""),
                                       str(replay or ""))
    return [json.loads(line) for line in lines.splitlines() if line.strip()]


def _records_text(records):
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def aggregate(records):
    return json.loads(_stagecraft.aggregate_json(_records_text(records)))


def render_aggregate(records):
    return _stagecraft.render_aggregate(_records_text(records))


def cost_report(ledger, prices):
    """ledger: list of {role, model_id, input_tokens, output_tokens}; prices: {model: {input, output} | None}."""
    text = "".join(json.dumps(e) + "\n" for e in ledger)
    return json.loads(_stagecraft.cost_json(text, json.dumps(prices)))
