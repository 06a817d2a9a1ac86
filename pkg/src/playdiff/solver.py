"""Semismooth Newton method for ``c_id u + c_play P_r[u; z0] = f`` at grid nodes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .errors import DomainError, ParameterError, SignalFormatError
from .maxfun import SelectionRule
from .playstop import PlayConfig, local_partition, play, play_newton
from .signal import PlSignal, TimeGrid, read_signal_csv


@dataclass(frozen=True)
class PlayEquation:
    """Residual ``R(u) = c_id u + c_play P_r[u; z0] - f`` on the nodes of ``grid``.

    Supported class: ``c_id > 0`` and ``c_play >= 0``; the Newton matrix is
    then lower triangular with diagonal at least ``c_id``.
    """

    f: PlSignal
    c_id: float
    c_play: float
    cfg: PlayConfig
    grid: TimeGrid = None

    def __post_init__(self):
        if not (math.isfinite(self.c_id) and self.c_id > 0):
            raise ParameterError(f"c_id must be > 0, got {self.c_id}")
        if not (math.isfinite(self.c_play) and self.c_play >= 0):
            raise ParameterError(f"c_play must be >= 0, got {self.c_play}")
        if self.grid is None:
            object.__setattr__(self, "grid", self.f.grid)
        g = self.grid.nodes
        if g[0] < self.f.a - 1e-12 or g[-1] > self.f.b + 1e-12:
            raise DomainError("unknown grid extends beyond the domain of f")

    @property
    def f_nodes(self) -> np.ndarray:
        return self.f(self.grid.nodes)

    def check(self, u: PlSignal) -> None:
        if u.grid != self.grid:
            raise DomainError("iterate does not live on the equation grid")


def residual(eq: PlayEquation, u: PlSignal) -> np.ndarray:
    eq.check(u)
    w = play(u, eq.cfg)[0](eq.grid.nodes)
    return eq.c_id * u.v + eq.c_play * w - eq.f_nodes


def newton_matrix(eq: PlayEquation, u: PlSignal, rule=SelectionRule.RIGHTMOST) -> sp.csr_matrix:
    """``c_id I + c_play J`` with ``J`` the Newton derivative of the play at ``u`` in node coordinates."""
    eq.check(u)
    n = len(eq.grid)
    eye = sp.identity(n, format="csr")
    if eq.c_play == 0:
        return eq.c_id * eye
    if eq.cfg.r == 0:
        return (eq.c_id + eq.c_play) * eye
    dec = local_partition(u, eq.cfg)
    J = play_newton(u, eq.cfg.z0, dec, rule).matrix(eq.grid)[:, :n]
    return (eq.c_id * eye + eq.c_play * J).tocsr()


@dataclass
class SolveReport:
    residual_norms: list[float] = field(default_factory=list)
    converged: bool = False
    u: PlSignal | None = None
    message: str = ""
    damped_steps: int = 0

    @property
    def iterations(self) -> int:
        return max(0, len(self.residual_norms) - 1)

    @property
    def superlinear_ratios(self) -> list[float]:
        r = self.residual_norms
        return [b / a if a > 0 else 0.0 for a, b in zip(r, r[1:])]

    def to_json(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_norms": self.residual_norms,
            "superlinear_ratios": self.superlinear_ratios,
            "damped_steps": self.damped_steps,
            "message": self.message,
        }


def semismooth_newton(
    eq: PlayEquation,
    u0: PlSignal | None = None,
    tol: float = 1e-10,
    maxit: int = 50,
    damping: bool = True,
    rule=SelectionRule.RIGHTMOST,
    max_halvings: int = 10,
) -> SolveReport:
    """Newton iteration ``u <- u - M(u)^{-1} R(u)`` with ``M`` from :func:`newton_matrix`.

    With ``damping`` the step is halved (at most ``max_halvings`` times)
    while the residual would grow.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if u0 is None:
        u0 = PlSignal(eq.grid, eq.f_nodes / (eq.c_id + eq.c_play))
    u = u0
    rep = SolveReport(u=u)
    R = residual(eq, u)
    nrm = float(np.max(np.abs(R)))
    rep.residual_norms.append(nrm)
    for _ in range(maxit):
        if nrm <= tol:
            break
        M = newton_matrix(eq, u, rule)
        diag = M.diagonal()
        if np.any(diag == 0) or not np.all(np.isfinite(diag)):
            rep.message = "singular Newton matrix"
            return rep
        d = spsolve_triangular(M, -R, lower=True)
        if not np.all(np.isfinite(d)):
            rep.message = "Newton step is not finite"
            return rep
        step = 1.0
        trial = PlSignal(eq.grid, u.v + d)
        Rt = residual(eq, trial)
        nt = float(np.max(np.abs(Rt)))
        if damping:
            k = 0
            while nt > nrm and k < max_halvings:
                step *= 0.5
                k += 1
                trial = PlSignal(eq.grid, u.v + step * d)
                Rt = residual(eq, trial)
                nt = float(np.max(np.abs(Rt)))
            rep.damped_steps += k > 0
        u, R, nrm = trial, Rt, nt
        rep.u = u
        rep.residual_norms.append(nrm)
    rep.converged = nrm <= tol
    rep.message = "converged" if rep.converged else f"no convergence in {maxit} iterations"
    return rep


def manufactured_equation(u_star: PlSignal, c_id: float, c_play: float, cfg: PlayConfig) -> PlayEquation:
    """Equation whose exact solution is ``u_star`` (``f`` built by forward evaluation)."""
    w = play(u_star, cfg)[0](u_star.t)
    return PlayEquation(PlSignal(u_star.grid, c_id * u_star.v + c_play * w), c_id, c_play, cfg)


def load_problem(path) -> tuple[PlayEquation, PlSignal | None]:
    """Read a JSON problem file; CSV paths are relative to the file."""
    path = Path(path)
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SignalFormatError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SignalFormatError(f"{path}: invalid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(spec, dict):
        raise SignalFormatError(f"{path}: expected a JSON object")
    missing = [k for k in ("c_id", "c_play", "r", "z0", "f") if k not in spec]
    if missing:
        raise SignalFormatError(f"{path}: missing keys {missing}")
    root = path.parent
    try:
        c_id, c_play, r, z0 = (float(spec[k]) for k in ("c_id", "c_play", "r", "z0"))
    except (TypeError, ValueError):
        raise SignalFormatError(f"{path}: c_id, c_play, r, z0 must be numbers") from None
    f = read_signal_csv(root / spec["f"])
    grid_spec = spec.get("grid", "from-f")
    grid = f.grid if grid_spec == "from-f" else read_signal_csv(root / grid_spec).grid
    u0 = read_signal_csv(root / spec["u0"]) if spec.get("u0") else None
    eq = PlayEquation(f, c_id, c_play, PlayConfig(r, z0), grid)
    if u0 is not None and u0.grid != grid:
        u0 = PlSignal(grid, u0(grid.nodes))
    return eq, u0
