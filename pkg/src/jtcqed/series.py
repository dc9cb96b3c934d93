"""Immutable result containers shared by the dynamics and analysis layers."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

__all__ = ["SpectrumSeries", "CorrelationSeries", "ImbalanceSeries"]


class SpectrumSeries:
    """Power spectrum on a uniform ascending frequency grid.

    ``warnings`` carries non-fatal diagnostics (e.g. the correlation window
    did not fully decay); ``metadata`` echoes every parameter of the run.
    The nonnegativity floor is enforced only when the underlying correlation
    ordering guarantees a nonnegative spectrum.
    """

    FLOOR = -1e-9

    __slots__ = ("omegas", "values", "metadata", "warnings")

    def __init__(self, omegas, values, metadata=None, warnings=(), enforce_floor=True):
        omegas = np.asarray(omegas, dtype=float)
        values = np.asarray(values, dtype=float)
        if omegas.ndim != 1 or omegas.shape != values.shape:
            raise ValidationError("omegas and values must be matching 1-d arrays")
        steps = np.diff(omegas)
        if steps.size and (steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=1e-9)):
            raise ValidationError("frequency grid must be uniform and ascending")
        if enforce_floor and values.size and values.min() < self.FLOOR * max(1.0, np.abs(values).max()):
            raise ValidationError(
                f"spectrum dips to {values.min():.3e}, below the noise floor"
            )
        omegas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "metadata", dict(metadata or {}))
        object.__setattr__(self, "warnings", tuple(warnings))

    def __setattr__(self, name, value):
        raise AttributeError("SpectrumSeries is immutable")

    @property
    def resolution(self) -> float:
        return float(self.omegas[1] - self.omegas[0]) if self.omegas.size > 1 else 0.0


class CorrelationSeries:
    """Correlation values over ascending delays starting at zero.

    Values are complex for field correlations and real for normalized
    second-order coherence.
    """

    __slots__ = ("taus", "values", "metadata")

    def __init__(self, taus, values, metadata=None):
        taus = np.asarray(taus, dtype=float)
        values = np.asarray(values)
        if taus.ndim != 1 or taus.shape != values.shape:
            raise ValidationError("taus and values must be matching 1-d arrays")
        if taus.size == 0 or taus[0] != 0.0:
            raise ValidationError("delay grid must start at 0")
        if np.any(np.diff(taus) <= 0):
            raise ValidationError("delays must be strictly increasing")
        if not np.all(np.isfinite(values.view(float) if values.dtype.kind == "c" else values)):
            raise ValidationError("correlation values must be finite")
        taus.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "metadata", dict(metadata or {}))

    def __setattr__(self, name, value):
        raise AttributeError("CorrelationSeries is immutable")


class ImbalanceSeries:
    """Per-mode occupations and normalized population imbalance over time.

    ``z`` is NaN wherever the total occupation is below the resolvable
    threshold (1e-12); such points are missing values, never zeros.
    """

    TOTAL_FLOOR = 1e-12
    OCC_FLOOR = -1e-10

    __slots__ = ("times", "n1", "n2", "z", "metadata")

    def __init__(self, times, n1, n2, metadata=None):
        times = np.asarray(times, dtype=float)
        n1 = np.asarray(n1, dtype=float)
        n2 = np.asarray(n2, dtype=float)
        if not (times.shape == n1.shape == n2.shape) or times.ndim != 1:
            raise ValidationError("times, n1, n2 must be matching 1-d arrays")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly increasing")
        if (n1.size and n1.min() < self.OCC_FLOOR) or (n2.size and n2.min() < self.OCC_FLOOR):
            raise ValidationError("occupations fell below the numerical floor")
        total = n1 + n2
        z = np.full_like(total, np.nan)
        ok = total > self.TOTAL_FLOOR
        z[ok] = (n1[ok] - n2[ok]) / total[ok]
        finite = z[ok]
        if finite.size and np.abs(finite).max() > 1.0 + 1e-9:
            raise ValidationError("imbalance left [-1, 1] beyond numerical slack")
        np.clip(z, -1.0, 1.0, out=z)
        for arr in (times, n1, n2, z):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "metadata", dict(metadata or {}))

    def __setattr__(self, name, value):
        raise AttributeError("ImbalanceSeries is immutable")

    @property
    def n_total(self) -> np.ndarray:
        return self.n1 + self.n2
