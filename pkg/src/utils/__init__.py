import json
import math
from enum import Enum
from typing import Any

import numpy as np
from fastapi.responses import JSONResponse


def to_plain(o: Any) -> Any:
    """Recursively turn numpy values, enums and pydantic models into plain
    JSON-compatible python objects. Non-finite floats become strings."""
    if hasattr(o, "model_dump"):
        return to_plain(o.model_dump())
    if isinstance(o, Enum):
        return o.value
    if isinstance(o, np.ndarray):
        return [to_plain(v) for v in o.tolist()]
    if isinstance(o, (np.floating, float)):
        value = float(o)
        if not math.isfinite(value):
            return str(value)
        return value
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, dict):
        return {str(k): to_plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [to_plain(item) for item in o]
    return o


class CustomJSONEncoder(json.JSONEncoder):

    def encode(self, obj):
        """Serializer that understands numpy arrays and scalars"""
        return super().encode(to_plain(obj))


def dump_json(content: Any) -> str:
    # fixed key order and float repr keep files byte-identical across runs
    return json.dumps(content, cls=CustomJSONEncoder, indent=2, sort_keys=False) + "\n"


class CustomJSONResponse(JSONResponse):
    def render(self, content) -> bytes:
        return json.dumps(
            content,
            cls=CustomJSONEncoder
        ).encode("utf-8")


def send_json_response(content: Any, status: int) -> CustomJSONResponse:
    return CustomJSONResponse(content=content, status_code=status)
