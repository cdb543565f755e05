"""
puzzleforge.utils.fields

Custom marshmallow fields and the base options schema for run configuration: parameter windows
written as "lo:hi", counts written as 1e7, and a normaliser that makes flag, environment and
config-file spellings of the same key agree.
"""
import math
from typing import Any, Dict

from marshmallow import Schema, ValidationError, fields, pre_load

KEY_ALIASES = {
    "nmax": "n_max",
    "worker_count": "workers",
    "seed": "rng_seed",
}


class ExpNumberField(fields.Field):
    """
    Integer count that also accepts exponent notation ("1e7", 1e7).
    Rejects non-integral values and booleans.
    """

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, bool):
            raise ValidationError("Expected a count, got a boolean.")
        try:
            number = float(value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"Not a number: {value!r} (e.g. 2000 or 1e7).") from exc
        if not math.isfinite(number) or number != math.floor(number):
            raise ValidationError(f"Not an integral count: {value!r}.")
        return int(number)

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else int(value)


class WindowField(fields.Field):
    """
    Closed parameter window written as "lo:hi" or a two-item list; loads to (lo, hi) with lo <= hi.
    Negative endpoints in exponent form ("-2e0:-1.999") are accepted.
    """

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str):
            parts = value.split(':')
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            raise ValidationError("Window must be 'lo:hi'.")
        if len(parts) != 2:
            raise ValidationError("Window must be 'lo:hi' (e.g. -2e0:-1.999).")
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"Window endpoints must be numbers: {value!r}.") from exc
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError("Window endpoints must be finite.")
        if lo > hi:
            raise ValidationError(f"Window lower end {lo!r} exceeds upper end {hi!r}.")
        return (lo, hi)

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else [float(value[0]), float(value[1])]


def normalize_key(key: str) -> str:
    k = str(key).strip().lower().lstrip('-').replace('-', '_')
    if k.startswith('puzzleforge_'):
        k = k[len('puzzleforge_'):]
    return KEY_ALIASES.get(k, k)


class BaseOptionsSchema(Schema):
    """
    Base schema for run options. Normalizes keys (case, dashes, aliases), strips string values
    and drops empty strings so they fall back to the default.
    """
    output_dir = fields.Str(load_default='output')

    @pre_load
    def normalize(self, data, **kwargs):
        cleaned: Dict[str, Any] = {}
        for k, v in dict(data).items():
            if v is None:
                continue
            if isinstance(v, str):
                v = v.strip()
                if v == '':
                    continue
            cleaned[normalize_key(k)] = v
        return cleaned
