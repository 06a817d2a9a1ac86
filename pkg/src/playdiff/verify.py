"""Independent oracles and remainder-rate studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import accmax, kernels, maxfun
from .errors import ParameterError
from .maxfun import ALL_RULES, SelectionRule
from .playstop import (
    PlayConfig,
    Decomposition,
    clamp,
    decomposition_for,
    local_partition,
    play,
    play_dir_derivative,
    play_newton,
)
from .signal import NormSpec, PlSignal, StepLinSignal, lq_norm, random_pl, sup_norm

DEFAULT_LADDER = tuple(10.0 ** (-k / 2) for k in range(2, 9))
OPERATORS = ("play", "stop", "accmax", "max")


def oracle_play_projection(u: PlSignal, cfg: PlayConfig, refinement: int = 1) -> tuple[PlSignal, PlSignal]:
    """Play via the projection recursion ``z_{i+1} = pi_r(z_i + u_{i+1} - u_i)``.

    Each segment of ``u`` is split into ``refinement`` equal pieces.
    """
    if refinement < 1:
        raise ParameterError("refinement must be >= 1")
    t = u.t
    if refinement > 1:
        frac = np.arange(refinement) / refinement
        t = np.concatenate(((t[:-1, None] + frac[None, :] * np.diff(t)[:, None]).ravel(), t[-1:]))
    v = u(t)
    v[:: refinement] = u.v
    z = kernels.project_stop(v, cfg.r, clamp(cfg.z0, cfg.r))
    return PlSignal(t, v - z), PlSignal(t, z)


def fd_directional(opname: str, base, direction, lam: float):
    """One-sided difference quotient ``(F(base + lam dir) - F(base)) / lam``.

    ``base``/``direction`` are ``(u, cfg)``/``(h, q)`` for ``play`` and
    ``stop`` and plain signals otherwise.  ``max`` returns a float.
    """
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    if opname in ("play", "stop"):
        (u, cfg), (h, q) = base, direction
        i = 0 if opname == "play" else 1
        diff = play(u + lam * h, cfg.with_z0(cfg.z0 + lam * q))[i] - play(u, cfg)[i]
        return StepLinSignal.from_pl(diff * (1.0 / lam))
    if opname == "accmax":
        diff = accmax.accumulated_max(base + lam * direction) - accmax.accumulated_max(base)
        return StepLinSignal.from_pl(diff * (1.0 / lam))
    if opname == "max":
        return (maxfun.max_value(base + lam * direction) - maxfun.max_value(base)) / lam
    raise ParameterError(f"unknown operator {opname!r}")


# --------------------------------------------------------------------------
# direction families


def scaled_profile(h: PlSignal, q: float = 0.0) -> Callable[[float], tuple[PlSignal, float]]:
    """``lam -> (lam h, lam q)``."""
    return lambda lam: (h * lam, q * lam)


def counterexample_family() -> Callable[[float], tuple[PlSignal, float]]:
    """``lam -> (h_lam, 0)`` with the W^{1,1} counterexample profile."""
    return lambda lam: (maxfun.counterexample_direction(lam), 0.0)


def random_direction(rng: np.random.Generator, n: int, a: float, b: float, norm: NormSpec, with_q: bool = True):
    """Random piecewise-linear ``(h, q)`` with ``||h||_X + |q| = 1``."""
    h = random_pl(rng, n, a, b)
    q = float(rng.uniform(-1, 1)) if with_q else 0.0
    s = norm.of(h) + abs(q)
    return h * (1.0 / s), q / s


# --------------------------------------------------------------------------
# rate studies


@dataclass
class RateReport:
    operator: str
    flavor: str
    norm: NormSpec
    lq_exponent: float
    ladder: tuple[float, ...]
    gammas: tuple[float, ...]
    records: list[dict] = field(default_factory=list)

    def ratios(self, gamma: float) -> list[float]:
        return [rec["ratio"] for rec in self.records if rec["gamma"] == gamma]

    def rule_ratios(self, gamma: float, rule: str) -> list[float]:
        return [rec["by_rule"][rule] for rec in self.records if rec["gamma"] == gamma]

    def envelope(self, gamma: float) -> list[float]:
        """Running maximum of the ratios over the current and all smaller scales."""
        r = self.ratios(gamma)
        return list(np.maximum.accumulate(r[::-1])[::-1])

    def converged_for(self, gamma: float, factor: float = 0.1) -> bool:
        r = self.ratios(gamma)
        return r[-1] <= factor * r[0] or r[-1] <= 1e-14

    @property
    def verdict(self) -> str:
        return "converged" if all(self.converged_for(g) for g in self.gammas) else "not_converged"

    def to_json(self) -> dict:
        return {
            "operator": self.operator,
            "flavor": self.flavor,
            "norm": str(self.norm),
            "lq_exponent": self.lq_exponent,
            "ladder": [
                {k: rec[k] for k in ("lambda", "gamma", "h_sup", "h_X", "remainder", "ratio", "by_rule")}
                for rec in self.records
            ],
            "envelope": [{"gamma": g, "values": self.envelope(g)} for g in self.gammas],
            "verdict": self.verdict,
        }


def _play_remainder(u, cfg, dec, h, q, gamma, lq, flavor, rule, which):
    i = 0 if which == "play" else 1
    out_uq = play(u + h, cfg.with_z0(cfg.z0 + q))[i]
    base = play(u, cfg)[i]
    if flavor == "newton":
        v, y = u + h, cfg.z0 + q
        dv = decomposition_for(v, y, cfg, dec)
        D = play_newton(v, y, dv, rule, flavor=which).apply(h, q)
    else:
        D = play_dir_derivative(u, cfg.z0, h, q, dec, flavor=which)
    diff = StepLinSignal.from_pl(out_uq - base) - D
    return lq_norm(diff, lq, window=(u.a, gamma))


def remainder(operator: str, base, h: PlSignal, q: float, flavor: str, rule=SelectionRule.RIGHTMOST,
              lq_exponent: float = 2.0, gamma: float | None = None, dec: Decomposition | None = None) -> float:
    """Remainder of the first-order expansion of ``operator`` at ``base`` along ``(h, q)``."""
    if flavor not in ("newton", "bouligand"):
        raise ParameterError(f"unknown flavor {flavor!r}")
    if operator in ("play", "stop"):
        u, cfg = base
        gamma = u.b if gamma is None else gamma
        if dec is None:
            dec = local_partition(u, cfg)
        return _play_remainder(u, cfg, dec, h, q, gamma, lq_exponent, flavor, rule, operator)
    if operator == "accmax":
        return accmax.remainder_lq(base, h, flavor, lq_exponent, gamma, rule)
    if operator == "max":
        if flavor == "newton":
            return maxfun.newton_remainder(base, h, rule)
        return maxfun.bouligand_remainder(base, h)
    raise ParameterError(f"unknown operator {operator!r}")


def rate_study(
    operator: str,
    base,
    direction_family: Callable[[float], tuple[PlSignal, float]],
    norm_spec: NormSpec,
    lq_exponent: float = 2.0,
    gammas: Sequence[float] | None = None,
    flavor: str = "newton",
    ladder: Sequence[float] = DEFAULT_LADDER,
    rules: Sequence[SelectionRule] = ALL_RULES,
) -> RateReport:
    """Remainder ratios ``remainder / (||h||_{X_gamma} + |q|)`` along a ladder of scales.

    For ``flavor="newton"`` the derivative is taken at the perturbed point
    for every selection rule and the largest ratio is the headline value.
    """
    ladder = tuple(float(x) for x in ladder)
    if len(ladder) < 2 or any(b >= a for a, b in zip(ladder, ladder[1:])) or ladder[-1] <= 0:
        raise ParameterError("ladder must be strictly decreasing and positive")
    if operator not in OPERATORS:
        raise ParameterError(f"unknown operator {operator!r}")
    u = base[0] if operator in ("play", "stop") else base
    if operator == "max":
        gammas = (u.b,)
    gammas = (u.b,) if gammas is None else tuple(gammas)
    for g in gammas:
        if not (u.a < g <= u.b):
            raise ParameterError(f"window end {g} outside ({u.a}, {u.b}]")
    dec = local_partition(*base) if operator in ("play", "stop") else None
    rule_list = [SelectionRule.parse(r) for r in rules] if flavor == "newton" else [SelectionRule.RIGHTMOST]
    report = RateReport(operator, flavor, norm_spec, lq_exponent, ladder, gammas)
    for lam in ladder:
        h, q = direction_family(lam)
        for g in gammas:
            window = (u.a, g) if g < u.b else None
            h_x = norm_spec.of(h, window) + abs(q)
            h_sup = sup_norm(h, window)
            by_rule = {}
            for rule in rule_list:
                rem = remainder(operator, base, h, q, flavor, rule, lq_exponent, g, dec)
                by_rule[rule.value] = rem / h_x if h_x > 0 else 0.0
            worst = max(by_rule, key=by_rule.get)
            report.records.append(
                {
                    "lambda": lam,
                    "gamma": g,
                    "h_sup": h_sup,
                    "h_X": h_x,
                    "remainder": by_rule[worst] * h_x,
                    "ratio": by_rule[worst],
                    "by_rule": by_rule,
                }
            )
    return report


def newton_to_bouligand_gaps(operator: str, base, h: PlSignal, q: float = 0.0, ladder=DEFAULT_LADDER,
                             lq_exponent: float = 2.0, rule=SelectionRule.RIGHTMOST) -> list[float]:
    """``||D^N(base + lam dir)(dir) - D^B(base)(dir)||_{L^q}`` for each ``lam``."""
    out = []
    if operator == "accmax":
        B = accmax.pointwise_dir_derivative(base, h)
        for lam in ladder:
            N = accmax.newton_apply(base + lam * h, h, rule)
            out.append(lq_norm(N - B, lq_exponent))
        return out
    if operator in ("play", "stop"):
        u, cfg = base
        dec = local_partition(u, cfg)
        B = play_dir_derivative(u, cfg.z0, h, q, dec, flavor=operator)
        for lam in ladder:
            v, y = u + lam * h, cfg.z0 + lam * q
            dv = decomposition_for(v, y, cfg, dec)
            N = play_newton(v, y, dv, rule, flavor=operator).apply(h, q)
            out.append(lq_norm(N - B, lq_exponent))
        return out
    raise ParameterError(f"operator {operator!r} has no L^q-valued derivative")


def good_set_bruteforce(u: PlSignal, delta: float, eps: float, n: int = 4001) -> float:
    """Complement measure of the good set estimated by testing the inclusion on a grid."""
    t = np.linspace(u.a, u.b, n)
    bad = np.array([not accmax.inclusion_holds(u, s, delta, eps) for s in t])
    return float(np.mean(bad) * (u.b - u.a))


def holder_bruteforce(sig: PlSignal, alpha: float, n: int = 2001) -> float:
    t = np.linspace(sig.a, sig.b, n)
    t = np.union1d(t, sig.t)
    v = sig(t)
    d = np.abs(t[:, None] - t[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(d > 0, np.abs(v[:, None] - v[None, :]) / d**alpha, 0.0)
    return float(np.max(r))


def is_finite_report(report: RateReport) -> bool:
    return all(math.isfinite(rec["ratio"]) for rec in report.records)
