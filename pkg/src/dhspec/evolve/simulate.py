"""Perturb, evolve and record: the runs behind ``simulate`` and ``rate``."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exactpoly import MultiPoly
from ..spectra import EigenIndex, eigenfunction
from .grid import fit_decay_rate, make_grid, moment, pushforward_perturb, stationary_state, wasserstein_1d
from .schemes import BACKEND, step_fourth, step_pme

__all__ = ["SimConfig", "mode_potential", "default_points", "run_simulation", "entropy_weight", "weighted_l2", "write_csv", "read_csv", "COLUMNS"]

COLUMNS = ("t", "mass", "moment1", "moment2", "wasserstein", "linf_to_star", "weighted_l2")


def default_points(m) -> int:
    """Default node count; for ``m > 1`` no node falls on the contact points."""
    return 321 if float(m) == 1 else 600


@dataclass(frozen=True)
class SimConfig:
    eq: str = "pme"
    m: str = "1"
    mode: Tuple[int, int] = (1, 0)
    eps: float = 0.05
    grid: Optional[int] = None
    L: Optional[float] = None
    dt: float = 1e-3
    tmax: float = 4.0
    every: float = 0.05
    window: Tuple[float, float] = (1.0, 4.0)

    def resolved(self) -> "SimConfig":
        m = Fraction(self.m)
        n = self.grid if self.grid is not None else default_points(m)
        L = self.L if self.L is not None else make_grid(m, n).L
        return SimConfig(self.eq, str(m), tuple(self.mode), float(self.eps), int(n), float(L),
                         float(self.dt), float(self.tmax), float(self.every), tuple(self.window))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = {"l": self.mode[0], "k": self.mode[1]}
        d["window"] = list(self.window)
        return d


def mode_potential(l: int, k: int, m) -> MultiPoly:
    """1D eigenfunction of index ``(l, k)`` scaled to leading coefficient ``1/d!``.

    ``(1, 0)`` gives ``x`` (translation) and ``(0, 1)`` gives ``x^2/2`` plus
    a constant (dilation).
    """
    if l not in (0, 1) or k < 0 or l + 2 * k == 0:
        raise ValueError("in 1D the mode needs l in {0, 1}, k >= 0 and l + 2k >= 1")
    psi = eigenfunction(EigenIndex(l, 1, k), Fraction(m), 1)
    d = l + 2 * k
    return psi * (Fraction(1, math.factorial(d)) / psi.leading_coefficient())


def entropy_weight(ref, m) -> np.ndarray:
    """``e''(v_*)`` on the support of ``v_*`` (zero outside), the weight of the linearized distance."""
    vs = ref.values
    w = np.zeros_like(vs)
    pos = vs > 0
    w[pos] = 1.0 / vs[pos] if float(m) == 1 else float(m) * vs[pos] ** (float(m) - 2.0)
    return w


def weighted_l2(state, ref, weight) -> float:
    """``(int e''(v_*) (v - v_*)^2 dx)^(1/2)`` over the support of ``v_*``."""
    d = state.values - ref.values
    return math.sqrt(float(np.sum(state.grid.cv * weight * d * d)))


def run_simulation(config: SimConfig, progress=None) -> dict:
    """Evolve the perturbed profile and record diagnostics every ``every`` time units."""
    cfg = config.resolved()
    if cfg.eq not in ("pme", "fourth"):
        raise ValueError("eq must be 'pme' or 'fourth'")
    if cfg.dt <= 0 or cfg.tmax <= 0 or cfg.every <= 0:
        raise ValueError("dt, tmax and every must be positive")
    m = Fraction(cfg.m)
    grid = make_grid(m, cfg.grid, cfg.L)
    ref = stationary_state(m, grid)
    psi = mode_potential(cfg.mode[0], cfg.mode[1], m)
    state = pushforward_perturb(psi, cfg.eps, m, grid)
    weight = entropy_weight(ref, m)
    if cfg.eq == "pme":
        step = lambda s: step_pme(s, cfg.dt, m)
    else:
        step = lambda s: step_fourth(s, cfg.dt, m)
    nsteps = int(round(cfg.tmax / cfg.dt))
    stride = max(1, int(round(cfg.every / cfg.dt)))
    rows: List[Dict[str, float]] = []
    for i in range(nsteps + 1):
        if i % stride == 0 or i == nsteps:
            rows.append({
                "t": i * cfg.dt,
                "mass": state.mass,
                "moment1": moment(state, 1),
                "moment2": moment(state, 2),
                "wasserstein": wasserstein_1d(state, ref),
                "weighted_l2": weighted_l2(state, ref, weight),
                "linf_to_star": float(np.max(np.abs(state.values - ref.values))),
            })
            if progress:
                progress(rows[-1])
        if i < nsteps:
            state = step(state)
    summary = {"violations": state.violations, "mass_drift": abs(rows[-1]["mass"] - rows[0]["mass"]) / rows[0]["mass"]}
    for col in ("wasserstein", "weighted_l2", "moment1"):
        try:
            rate, r2 = fit_decay_rate([(r["t"], abs(r[col])) for r in rows], cfg.window)
            summary[col] = {"rate": rate, "r2": r2}
        except ValueError as exc:
            summary[col] = {"error": str(exc)}
    return {"config": cfg.to_dict(), "grid": {"n": grid.n, "L": grid.L, "h": grid.h},
            "backend": BACKEND, "rows": rows, "summary": summary}


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(result: dict, header: dict) -> str:
    """CSV text with a single ``#``-prefixed JSON header line."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in result["rows"]:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def read_csv(text: str) -> Tuple[dict, List[Dict[str, float]]]:
    header: dict = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            header = json.loads(line[1:].strip() or "{}")
        elif line.strip():
            lines.append(line)
    reader = csv.DictReader(lines)
    rows = [{k: float(v) for k, v in row.items()} for row in reader]
    if not rows or any(c not in rows[0] for c in ("t",)):
        raise ValueError("CSV has no data rows with a 't' column")
    return header, rows
