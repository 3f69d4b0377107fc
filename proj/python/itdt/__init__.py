"""Python front end to the native UAV edge-inference simulator and trainers."""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    ContractError,
    Error,
    InvalidInput,
    NotReadyError,
    NumericError,
    SizeError,
    channel_gain,
    fidelity_gain,
    inference_delay,
    normalize_steps,
    slot_utility,
    transmission_delay,
    transmission_rate,
    violation_penalty,
)

__all__ = [
    "ConfigError", "ContractError", "Env", "Error", "InvalidInput", "NotReadyError",
    "NumericError", "SizeError", "channel_gain", "default_trainer", "default_world",
    "evaluate_run", "fidelity_gain", "inference_delay", "normalize_steps", "run_experiment",
    "slot_utility", "train", "transmission_delay", "transmission_rate", "violation_penalty",
]


def default_world():
    return json.loads(_core.default_world_json())


def default_trainer():
    return json.loads(_core.default_trainer_json())


class Env(_core.Env):
    """Environment handle; world is a dict of config overrides."""

    def __init__(self, world=None, seed=0):
        super().__init__(json.dumps(world or {}), seed)


def train(trainer=None, world=None):
    """Train one learner; returns metrics rows, eval curve and a checkpoint dict."""
    out = _core.train(json.dumps(trainer or {}), json.dumps(world or {}))
    out["checkpoint"] = json.loads(out["checkpoint"])
    return out


def run_experiment(spec_path, output_root=None):
    """Run a spec file; a relative output_dir resolves against ITDT_OUTPUT_ROOT."""
    if output_root is None:
        output_root = os.environ.get("ITDT_OUTPUT_ROOT") or None
    return _core.run_experiment(spec_path, output_root)


def evaluate_run(run_dir):
    return _core.evaluate_run(run_dir)
