"""Telemetry frames and their CSV wire format."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput

TELEMETRY_HEADER = (
    "t,"
    + ",".join(f"q{i}" for i in range(7))
    + ",px,py,pz,"
    + ",".join(f"ex{i}" for i in range(6))
    + ",fn_meas,fn_des,contact,saturated"
)


@dataclass(frozen=True)
class TelemetryFrame:
    """One decimated sample of the executing control loop."""

    t: float
    q: np.ndarray
    position: np.ndarray
    e_x: np.ndarray
    fn_meas: float
    fn_des: float
    contact: bool
    saturated: bool

    def __post_init__(self):
        if not (
            np.isfinite(self.t)
            and np.all(np.isfinite(self.q))
            and np.all(np.isfinite(self.position))
            and np.all(np.isfinite(self.e_x))
        ):
            raise InvalidInput("telemetry frame must be finite")

    def to_csv_row(self) -> str:
        values = [self.t, *self.q, *self.position, *self.e_x, self.fn_meas, self.fn_des]
        return ",".join(
            [repr(float(v)) for v in values]
            + [str(int(self.contact)), str(int(self.saturated))]
        )


def frames_to_csv(frames) -> str:
    return "\n".join([TELEMETRY_HEADER] + [f.to_csv_row() for f in frames]) + "\n"


def write_telemetry_csv(path, frames) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(frames_to_csv(frames))
