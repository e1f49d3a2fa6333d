"""Canonical JSON emission: fixed field order (insertion order),
floats at 17 significant digits, so identical payloads serialize to
identical bytes."""

from __future__ import annotations

import math

from anatomy.errors import ValidationError


def _emit(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            parts.append("null")
        else:
            parts.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        import json

        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise ValidationError(f"JSON object keys must be strings, got {key!r}")
            if i:
                parts.append(",")
            _emit(key, parts)
            parts.append(":")
            _emit(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, value in enumerate(obj):
            if i:
                parts.append(",")
            _emit(value, parts)
        parts.append("]")
    else:
        raise ValidationError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps_canonical(obj) -> str:
    """Serialize to a canonical JSON string (no whitespace, 17-digit floats).

    NaN and infinities serialize as null; reports carry explicit
    defined/undefined flags alongside such fields.
    """
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)
