"""Coefficient profiles on the unit edge parameter x in [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

KINDS = ("constant", "poly", "samples")

# Number of points used when checking pointwise bounds on [0, 1].
DENSE_SAMPLES = 1025


@dataclass(frozen=True)
class CoefficientProfile:
    """A real function of the edge parameter.

    ``kind`` is one of ``constant`` (``values`` holds a single number),
    ``poly`` (coefficients, lowest degree first) or ``samples`` (values on a
    uniform grid of [0, 1], linearly interpolated, at least two of them).
    """

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        vals = tuple(float(v) for v in np.atleast_1d(self.values))
        if not vals:
            raise ValueError("profile needs at least one value")
        if self.kind == "constant" and len(vals) != 1:
            raise ValueError("constant profile takes exactly one value")
        if self.kind == "samples" and len(vals) < 2:
            raise ValueError("sampled profile needs at least two values")
        if not all(np.isfinite(vals)):
            raise ValueError("profile values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value):
        return cls("constant", (value,))

    @classmethod
    def poly(cls, coeffs):
        return cls("poly", tuple(coeffs))

    @classmethod
    def samples(cls, values):
        return cls("samples", tuple(values))

    @classmethod
    def coerce(cls, obj):
        """Accept a profile, a bare number (constant) or a sequence (poly)."""
        if isinstance(obj, cls):
            return obj
        if np.isscalar(obj):
            return cls.constant(obj)
        return cls.poly(obj)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.values[0])
        if self.kind == "poly":
            return P.polyval(x, np.asarray(self.values))
        grid = np.linspace(0.0, 1.0, len(self.values))
        return np.interp(x, grid, np.asarray(self.values))

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def extrema(self, n=DENSE_SAMPLES):
        """(min, max) over a dense sample of [0, 1], including the sample nodes."""
        x = np.linspace(0.0, 1.0, n)
        if self.kind == "samples":
            x = np.union1d(x, np.linspace(0.0, 1.0, len(self.values)))
        v = self(x)
        return float(v.min()), float(v.max())

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.values[0]}
        return {"kind": self.kind, "values": list(self.values)}


ZERO = CoefficientProfile.constant(0.0)
ONE = CoefficientProfile.constant(1.0)
