"""Adapter for external executables: one process per xi.

The command is run with two extra arguments, an input file holding the
coordinates of xi on one whitespace-separated line and an output file where the
program must write the QI as a single number.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError, NumericalFailureError
from .base import ForwardModel


class BlackBoxModel(ForwardModel):
    name = "blackbox"
    exact = False

    def __init__(self, command, dim: int, timeout: float | None = None):
        if dim < 1:
            raise InvalidArgumentError("dimension must be positive")
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise InvalidArgumentError("empty black-box command")
        self.dim = int(dim)
        self.timeout = timeout

    def evaluate(self, xi) -> float:
        xi = np.asarray(xi, dtype=float).ravel()
        if xi.shape != (self.dim,):
            raise InvalidArgumentError(f"expected {self.dim} coordinates, got {xi.shape}")
        with tempfile.TemporaryDirectory() as tmp:
            src, dst = Path(tmp, "xi.txt"), Path(tmp, "qi.txt")
            src.write_text(" ".join(f"{v:.17g}" for v in xi) + "\n")
            proc = subprocess.run([*self.command, str(src), str(dst)], capture_output=True,
                                  text=True, timeout=self.timeout)
            if proc.returncode != 0:
                raise NumericalFailureError("black-box model failed",
                                            {"xi": xi.tolist(), "returncode": proc.returncode,
                                             "stderr": proc.stderr[-2000:]})
            try:
                value = float(dst.read_text().split()[0])
            except (OSError, IndexError, ValueError) as exc:
                raise NumericalFailureError("black-box model wrote no readable value",
                                            {"xi": xi.tolist()}) from exc
        if not np.isfinite(value):
            raise NumericalFailureError("black-box model returned a non-finite value", {"xi": xi.tolist()})
        return value
