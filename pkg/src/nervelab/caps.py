"""Default size caps, overridable through ``NERVELAB_CAPS``.

The variable holds ``KEY=VALUE`` pairs separated by commas, for example
``NERVELAB_CAPS="CRT_N=7,NERVE_DIM=10"``.
"""
from __future__ import annotations

import os

from .errors import CapExceeded, ValidationError

DEFAULTS: dict[str, int] = {
    "POSET_SIZE": 25,
    "CRT_N": 6,
    "DENSE_TABLE": 4096,
    "DISTRIBUTIVE_SCAN": 512,
    "NERVE_DIM": 8,
    "HORN_MAPS": 10**6,
    "GRID_DIRECTIONS": 4,
    "GRID_N": 3,
    "CATEGORY_OBJECTS": 64,
    "CPT_N": 3,
    "CART_N": 2,
    "CERT_ATTEMPTS": 10**6,
    "CERT_SECONDS": 60,
}


def parse_caps(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip().upper()
        if not sep or key not in DEFAULTS:
            raise ValidationError(f"bad cap override {item!r}")
        try:
            out[key] = int(value)
        except ValueError:
            raise ValidationError(f"cap {key} needs an integer, got {value!r}") from None
        if out[key] <= 0:
            raise ValidationError(f"cap {key} must be positive")
    return out


def current_caps() -> dict[str, int]:
    caps = dict(DEFAULTS)
    caps.update(parse_caps(os.environ.get("NERVELAB_CAPS", "")))
    return caps


def cap(key: str) -> int:
    return current_caps()[key]


def check_cap(what: str, value: int, key: str, override: int | None = None) -> None:
    limit = cap(key) if override is None else override
    if value > limit:
        raise CapExceeded(what, value, limit)
