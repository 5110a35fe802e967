"""Textual weight notation.

Grammar::

    weight := kind ":" params | "tab:" path
    kind   := "std" | "pow" | "exp" | "ri"
    params := key "=" number ("," key "=" number)*

Examples: ``std:alpha=1``, ``exp:alpha=1,beta=0.5,l=1``, ``ri:alpha=2``,
``tab:profile.txt``.
"""

from typing import Dict, Iterable, Optional

from radial_bergman.types.errors import BergmanError, WeightSpecError
from radial_bergman.types.weights import (
    CompositeWeight,
    ExponentialWeight,
    PowerWeight,
    RadialWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
    TabulatedWeight,
)

KINDS = {
    "std": (StandardWeight, ("alpha",), ()),
    "pow": (PowerWeight, ("alpha",), ()),
    "exp": (ExponentialWeight, ("alpha", "beta"), ("l",)),
    "ri": (RapidlyIncreasingWeight, ("alpha",), ()),
}


def parse_params(
    text: str,
    required: Iterable[str] = (),
    optional: Iterable[str] = (),
) -> Dict[str, float]:
    """Parse ``key=value,key=value`` into a dict of floats.

    Raises:
        WeightSpecError: on a malformed token, an unknown or repeated key or a
            missing required key. The message names the offending token.
    """
    required = tuple(required)
    allowed: Optional[set] = None
    if required or optional:
        allowed = set(required) | set(optional)
    params: Dict[str, float] = {}
    for token in filter(None, (t.strip() for t in text.split(","))):
        key, sep, value = token.partition("=")
        key = key.strip()
        if not sep or not key:
            raise WeightSpecError(f"expected key=value, got {token!r}")
        if allowed is not None and key not in allowed:
            raise WeightSpecError(f"unknown parameter {key!r}")
        if key in params:
            raise WeightSpecError(f"parameter {key!r} given twice")
        try:
            params[key] = float(value)
        except ValueError:
            raise WeightSpecError(f"parameter {key!r}: {value.strip()!r} is not a number")
    missing = [k for k in required if k not in params]
    if missing:
        raise WeightSpecError(f"missing parameter(s): {', '.join(missing)}")
    return params


def parse_weight(text: str) -> RadialWeight:
    """Parse a weight description such as ``exp:alpha=1,beta=0.5``.

    Raises:
        WeightSpecError: malformed notation or parameters outside the kind's domain.
    """
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise WeightSpecError(f"expected kind:params, got {text!r}")
    if kind == "tab":
        if not body:
            raise WeightSpecError("tab: needs a file path")
        try:
            return TabulatedWeight.from_file(body)
        except BergmanError as e:
            raise WeightSpecError(str(e)) from e
    if kind not in KINDS:
        raise WeightSpecError(
            f"unknown weight kind {kind!r}; expected one of std, pow, exp, ri, tab"
        )
    cls, required, optional = KINDS[kind]
    params = parse_params(body, required, optional)
    try:
        return cls(**params)
    except BergmanError as e:
        raise WeightSpecError(f"{text}: {e}") from e


def _number(value: float) -> str:
    return f"{value:g}" if value == float(f"{value:g}") else repr(value)


def format_weight(w: RadialWeight) -> str:
    """Inverse of `parse_weight` for the parametric kinds."""
    if isinstance(w, StandardWeight):
        return f"std:alpha={_number(w.alpha)}"
    if isinstance(w, PowerWeight):
        return f"pow:alpha={_number(w.alpha)}"
    if isinstance(w, ExponentialWeight):
        return f"exp:alpha={_number(w.alpha)},beta={_number(w.beta)},l={_number(w.l)}"
    if isinstance(w, RapidlyIncreasingWeight):
        return f"ri:alpha={_number(w.alpha)}"
    if isinstance(w, TabulatedWeight):
        return f"tab:{w.source}" if w.source else f"tab:<{len(w.radii)} samples>"
    if isinstance(w, CompositeWeight):
        parts = " * ".join(f"({format_weight(f)})^{_number(e)}" for f, e in w.factors)
        scale = f"exp({_number(w.log_scale)}) * " if w.log_scale else ""
        return f"{scale}{parts}"
    return repr(w)
