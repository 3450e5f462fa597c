"""Exact trip and meal planners with a JSON-in, dict-out interface.

Instances use the same layout as the ``lappi-op/1`` and ``lappi-meal/1``
files read by the command-line tool.
"""

import json
from typing import Any, Optional, Sequence

from . import _core
from ._core import Error

__all__ = [
    "Error",
    "evaluate_route",
    "format_itinerary",
    "generate_instance",
    "haversine_km",
    "load",
    "plan_meal",
    "reduce_instance",
    "save",
    "solve",
    "validate_instance",
]


def _text(obj: Any) -> str:
    return obj if isinstance(obj, str) else json.dumps(obj)


def load(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def save(path: str, obj: dict) -> None:
    """Writes an instance in the canonical layout the CLI produces."""
    fmt = obj.get("format")
    if fmt == "lappi-op/1":
        text = _core.canonical_op(_text(obj))
    elif fmt == "lappi-meal/1":
        text = _core.canonical_meal(_text(obj))
    else:
        raise ValueError(f"unsupported format: {fmt!r}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def solve(instance, method: str = "subset_dp", time_limit_ms: Optional[int] = None) -> dict:
    return json.loads(_core.solve(_text(instance), method, time_limit_ms))


def evaluate_route(instance, route: Sequence[str]) -> dict:
    return json.loads(_core.evaluate_route(_text(instance), list(route)))


def validate_instance(instance) -> list:
    return _core.validate_instance(_text(instance))


def reduce_instance(instance) -> dict:
    return json.loads(_core.reduce_instance(_text(instance)))


def format_itinerary(instance, itinerary) -> str:
    return _core.format_itinerary(_text(instance), _text(itinerary))


def plan_meal(meal, method: str = "dp", granularity: float = 1.0) -> dict:
    return json.loads(_core.plan_meal(_text(meal), method, granularity))


def generate_instance(seed: int, n_spots: int = 8, budget_policy: float = 0.5) -> dict:
    return json.loads(_core.generate_instance(seed, n_spots, budget_policy))


haversine_km = _core.haversine_km
