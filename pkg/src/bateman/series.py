"""Uniform-grid time series: the exchange format between engines and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def fmt(value) -> str:
    """Shortest round-trip decimal representation of a scalar.

    Integers print without a decimal point; floats use repr (exact
    round-trip), so identical runs produce byte-identical output.
    """
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class TimeSeries:
    """One uniform time grid plus named real channels of the same length."""

    t: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size < 1:
            raise ValidationError("time grid must be a nonempty 1-d array")
        if self.t.size > 2:
            steps = np.diff(self.t)
            if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
                raise ValidationError("time grid must be uniform")
        for name, values in list(self.channels.items()):
            arr = np.asarray(values)
            if arr.shape != self.t.shape:
                raise ValidationError(f"channel {name!r} length mismatch")
            self.channels[name] = arr

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def column(self, name: str) -> np.ndarray:
        return self.channels[name]

    def header(self) -> list[str]:
        return ["t"] + list(self.channels)

    def rows(self):
        cols = [self.t] + list(self.channels.values())
        for i in range(self.t.size):
            yield [col[i] for col in cols]


def write_table(fh, header: list[str], rows) -> None:
    """Plain CSV with '\\n' endings, '.' decimals, header always present."""
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def write_series_csv(fh, series: TimeSeries) -> None:
    for values in series.channels.values():
        if np.iscomplexobj(values):
            raise ValidationError("split complex channels into _re/_im before writing")
    write_table(fh, series.header(), series.rows())
