"""Canonical JSON form of symbolic objects.

Words are integer arrays of 0-based letters.  Exact coefficients are
rational strings such as ``"3/4"``; floats stay floats and complex numbers
become ``{"re": .., "im": ..}``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .polys import NCPoly, TensorPoly, TracePoly


def encode_coeff(c) -> Any:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, complex):
        return {"re": c.real, "im": c.imag}
    if isinstance(c, float):
        return c
    raise TypeError(f"cannot encode coefficient {c!r}")


def decode_coeff(v) -> Any:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, dict):
        return complex(v["re"], v["im"])
    if isinstance(v, bool):
        raise TypeError("boolean coefficient")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    raise TypeError(f"cannot decode coefficient {v!r}")


def _sort_key(k):
    return json.dumps(k)


def to_dict(P) -> dict:
    if isinstance(P, NCPoly):
        terms = [{"word": list(w), "coeff": encode_coeff(c)} for w, c in P.items()]
        out = {"type": "NCPoly", "n": P.n}
    elif isinstance(P, TracePoly):
        terms = [
            {"word": list(b), "traces": [list(u) for u in t], "coeff": encode_coeff(c)}
            for (b, t), c in P.items()
        ]
        out = {"type": "TracePoly", "n": P.n}
    elif isinstance(P, TensorPoly):
        terms = [
            {"legs": [list(w) for w in ws], "traces": [list(u) for u in t], "coeff": encode_coeff(c)}
            for (ws, t), c in P.items()
        ]
        out = {"type": "TensorPoly", "n": P.n, "legs": P.legs}
    else:
        raise TypeError(f"cannot serialize {type(P).__name__}")
    out["terms"] = sorted(terms, key=lambda d: _sort_key({k: v for k, v in d.items() if k != "coeff"}))
    return out


def from_dict(d: dict):
    kind = d.get("type")
    n = int(d["n"])
    if kind == "NCPoly":
        return NCPoly({tuple(t["word"]): decode_coeff(t["coeff"]) for t in d["terms"]}, n)
    if kind == "TracePoly":
        terms = {}
        for t in d["terms"]:
            key = (tuple(t["word"]), tuple(tuple(u) for u in t.get("traces", [])))
            terms[key] = decode_coeff(t["coeff"])
        return TracePoly(terms, n)
    if kind == "TensorPoly":
        terms = {}
        for t in d["terms"]:
            key = (tuple(tuple(w) for w in t["legs"]), tuple(tuple(u) for u in t.get("traces", [])))
            terms[key] = decode_coeff(t["coeff"])
        return TensorPoly(terms, n, int(d["legs"]))
    raise ValueError(f"unknown object type {kind!r}")


def dumps(P, **kw) -> str:
    return json.dumps(to_dict(P), **kw)


def loads(s: str):
    return from_dict(json.loads(s))
