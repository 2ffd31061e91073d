"""Flat JSON records for families and other values (complex numbers as {re, im})."""
import json
import math

import numpy as np

from .densities import ParameterError
from .processes import FAMILIES

__all__ = [
    "family_to_record",
    "family_from_record",
    "encode",
    "dumps",
]

# parameter names per family tag, in constructor order
PARAM_NAMES = {
    "fourparam": ("A", "B", "C", "D"),
    "threeparam": ("A", "B", "C"),
    "twoparam": ("A", "B"),
    "secant": ("beta",),
    "dirichlet": ("A",),
}


def _decode_number(name, v):
    if isinstance(v, dict):
        if set(v) - {"re", "im"} or "re" not in v:
            raise ParameterError(f"parameter {name}: complex values need keys 're' and 'im'")
        re, im = v["re"], v.get("im", 0.0)
        if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in (re, im)):
            raise ParameterError(f"parameter {name}: 're' and 'im' must be numbers")
        return complex(re, im) if im else float(re)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise ParameterError(f"parameter {name}: expected a number or {{re, im}} record")


def family_from_record(rec):
    """Build a family from ``{"family": tag, name: value, ...}``."""
    if not isinstance(rec, dict):
        raise ParameterError("family record must be a JSON object")
    tag = rec.get("family")
    if tag not in FAMILIES:
        raise ParameterError(f"family must be one of {sorted(FAMILIES)} (got {tag!r})")
    names = PARAM_NAMES[tag]
    extra = set(rec) - set(names) - {"family"}
    if extra:
        raise ParameterError(f"unknown keys for {tag}: {sorted(extra)}")
    missing = [n for n in names if n not in rec]
    if missing:
        raise ParameterError(f"missing parameters for {tag}: {missing}")
    return FAMILIES[tag](*(_decode_number(n, rec[n]) for n in names))


def encode(v):
    """JSON-ready copy of ``v``: complex -> {re, im}, numpy -> Python, inf -> string."""
    if isinstance(v, dict):
        return {str(k): encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode(x) for x in v]
    if isinstance(v, np.ndarray):
        return [encode(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": encode(float(v.real)), "im": encode(float(v.imag))}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def family_to_record(fam):
    rec = {"family": fam.tag}
    for name in PARAM_NAMES[fam.tag]:
        v = complex(getattr(fam, name))
        rec[name] = {"re": v.real, "im": v.imag}
    return rec


def dumps(obj):
    # floats use the shortest repr that round-trips exactly
    return json.dumps(encode(obj), indent=2, sort_keys=False, allow_nan=False)
