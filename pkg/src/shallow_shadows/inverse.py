"""Heralded variational element-wise inversion of a periodic MPS.

Given m (here the pair-signature eigenvalue MPS) find V with
``m(x) v(x) ~ 1`` for every x by minimising
``C0(V) = sum_x (m(x) v(x) - 1)^2`` one site matrix V^j_k at a time.  Each
local problem is a convex quadratic ``X^T A X + B^T X + c`` solved exactly by
least squares.  Since the l2 cost bounds the l_inf error,
``max_x |m v - 1| <= sqrt(C0)`` heralds the accuracy of the result.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .mps import PeriodicMPS, dot, hadamard

log = logging.getLogger(__name__)

REG_MODES = ("none", "translational", "norm")


@dataclass
class InversionConfig:
    chi: int = 3
    chi_schedule: tuple = ()
    eps_stop: float = 1e-10
    max_sweeps: int = 500
    stage_sweeps: int = 100
    stall_tol: float = 1e-3
    reg_mode: str = "none"
    alpha: float | None = None  # None -> adaptive, alpha = C0 at the start of each sweep
    rcond: float = 1e-12
    seed: int = 0
    n_probes: int = 100
    check_descent: bool = True
    exhaustive_max_sites: int = 12
    restart_window: int = 20  # sweeps at the final bond without a factor-2 gain -> fresh ansatz
    restart_factor: float = 2.0
    max_restarts: int = 5

    def __post_init__(self):
        if self.chi < 1:
            raise ValueError("chi must be >= 1")
        if self.eps_stop <= 0:
            raise ValueError("eps_stop must be positive")
        if self.reg_mode not in REG_MODES:
            raise ValueError(f"reg_mode must be one of {REG_MODES}")
        sched = tuple(int(c) for c in self.chi_schedule) or (self.chi,)
        if any(c < 1 for c in sched) or list(sched) != sorted(sched):
            raise ValueError("chi_schedule must be non-decreasing positive integers")
        if sched[-1] != self.chi:
            sched = sched + (self.chi,)
        self.chi_schedule = sched


@dataclass
class InversionResult:
    V: PeriodicMPS
    final_cost: float
    herald_epsilon: float
    sweeps_used: int
    cost_history: list = field(default_factory=list)
    heralded: bool = False
    linf_error: float | None = None
    restarts: int = 0
    n: int | None = None
    d: int | None = None
    chi: int | None = None

    def save(self, path) -> None:
        path = Path(path)
        meta = {k: v for k, v in asdict(self).items() if k != "V"}
        meta["V"] = self.V.to_dict()
        path.write_text(json.dumps(meta, indent=1))

    @classmethod
    def load(cls, path) -> "InversionResult":
        data = json.loads(Path(path).read_text())
        data["V"] = PeriodicMPS.from_dict(data["V"])
        return cls(**data)


def result_path(directory, n: int, d: int, chi: int) -> Path:
    return Path(directory) / f"inverse_n{n}_d{d}_chi{chi}.json"


# ---------------------------------------------------------------------------
# cost and local quadratic forms


def cost(m: PeriodicMPS, v: PeriodicMPS, alpha: float = 0.0, reg_mode: str = "none") -> float:
    """C0(V) + alpha R(V) by ring contraction."""
    if m.phys_dims != v.phys_dims:
        raise ValueError("m and v have different physical dims")
    mv = hadamard(m, v)
    c0 = dot(mv, mv) - 2.0 * dot(m, v) + float(np.prod(m.phys_dims))
    if alpha and reg_mode != "none":
        c0 += alpha * regularizer(v, reg_mode)
    return c0


def cost_exhaustive(m: PeriodicMPS, v: PeriodicMPS) -> tuple[float, float]:
    """(C0, max |m v - 1|) by explicit summation over all index strings."""
    prod = m.to_dense() * v.to_dense()
    r = prod - 1.0
    return float(r @ r), float(np.abs(r).max())


def regularizer(v: PeriodicMPS, mode: str) -> float:
    if mode == "none":
        return 0.0
    if mode == "norm":
        return float(sum(np.sum(s * s) for s in v.sites))
    if mode == "translational":
        shapes = {s.shape for s in v.sites}
        if len(shapes) != 1:
            raise ValueError("translational regulariser needs equal site shapes")
        stack = np.stack(v.sites)
        return float(np.sum((stack - stack.mean(axis=0)) ** 2))
    raise ValueError(f"unknown regulariser {mode!r}")


def _transfer(sites):
    """Matrix of sum_x (x)_k sites_k[x], rows = left bonds, cols = right bonds."""
    left = "abcd"[: len(sites)]
    right = "ABCD"[: len(sites)]
    spec = ",".join(f"p{l}{r}" for l, r in zip(left, right))
    out = np.einsum(f"{spec}->{left}{right}", *sites)
    rows = int(np.prod(out.shape[: len(sites)]))
    return out.reshape(rows, -1)


def _environment(transfers, j):
    """Product of transfers j+1, ..., j-1 (cyclic): maps right bond of j to its left bond."""
    n = len(transfers)
    env = None
    for i in range(1, n):
        t = transfers[(j + i) % n]
        env = t if env is None else env @ t
    if env is None:
        env = np.eye(transfers[j].shape[1])
    return env


def _quadratic_from_envs(m: PeriodicMPS, v: PeriodicMPS, j: int, k: int, env4, env2):
    M = m.sites[j][k]
    cm_l, cm_r = M.shape
    cv_l, cv_r = v.sites[j].shape[1:]
    r4 = env4.reshape(cm_r, cm_r, cv_r, cv_r, cm_l, cm_l, cv_l, cv_l)
    a = np.einsum("ABCDabcd,aA,bB->cCdD", r4, M, M, optimize=True)
    a = a.reshape(cv_l * cv_r, cv_l * cv_r)
    a = 0.5 * (a + a.T)
    r2 = env2.reshape(cm_r, cv_r, cm_l, cv_l)
    b = -2.0 * np.einsum("ACac,aA->cC", r2, M).ravel()
    return a, b


def _envs(m, v, j):
    t4 = [_transfer([ms, ms, vs, vs]) for ms, vs in zip(m.sites, v.sites)]
    t2 = [_transfer([ms, vs]) for ms, vs in zip(m.sites, v.sites)]
    return _environment(t4, j), _environment(t2, j)


def local_quadratic(m: PeriodicMPS, v: PeriodicMPS, j: int, k: int, alpha: float = 0.0,
                    reg_mode: str = "none") -> tuple[np.ndarray, np.ndarray]:
    """(A, B) with C0 restricted to x_j = k equal to X^T A X + B^T X + const.

    X is V^j_k flattened row-major.  With a regulariser the translational
    form adds alpha (1-1/N)^2 to the diagonal of A and
    -2 alpha (1-1/N)/N sum_{i != j} V^i_k to B; the norm form adds alpha I.
    """
    if not 0 <= j < m.n_sites or not 0 <= k < m.phys_dims[j]:
        raise ValueError(f"invalid site/index ({j}, {k})")
    env4, env2 = _envs(m, v, j)
    a, b = _quadratic_from_envs(m, v, j, k, env4, env2)
    return _regularize(a, b, v, j, k, alpha, reg_mode)


def _regularize(a, b, v, j, k, alpha, reg_mode):
    if not alpha or reg_mode == "none":
        return a, b
    n = v.n_sites
    eye = np.eye(a.shape[0])
    if reg_mode == "norm":
        return a + alpha * eye, b
    others = sum(v.sites[i][k] for i in range(n) if i != j)
    if isinstance(others, int):
        others = np.zeros_like(v.sites[j][k])
    return (
        a + alpha * (1 - 1 / n) ** 2 * eye,
        b - 2 * alpha * (1 - 1 / n) / n * np.ravel(others),
    )


def local_solve(a: np.ndarray, b: np.ndarray, rcond: float = 1e-12, tol: float = 1e-8,
                return_info: bool = False):
    """Minimum-norm solution of 2 A X = -B with a relative singular-value cutoff.

    ``ok`` is False (and a warning is issued unless ``return_info``) when the
    residual ||2AX + B|| exceeds ``tol (1 + ||B||)``.
    """
    x, *_ = np.linalg.lstsq(2.0 * a, -b, rcond=rcond)
    resid = float(np.linalg.norm(2.0 * a @ x + b))
    ok = resid <= tol * (1.0 + np.linalg.norm(b))
    if return_info:
        return x, ok
    if not ok:
        warnings.warn(f"local system inconsistent at cutoff, residual {resid:.3e}", RuntimeWarning)
    return x


# ---------------------------------------------------------------------------
# ansatz handling


def initial_ansatz(m: PeriodicMPS, chi: int, rng: np.random.Generator, n_probes: int = 100) -> PeriodicMPS:
    """Uniform [-1, 1] site tensors scaled so |v| ~ mean(1/m) on random probes."""
    dims = m.phys_dims
    sites = [rng.uniform(-1.0, 1.0, size=(p, chi, chi)) for p in dims]
    v = PeriodicMPS(sites)
    probes = np.stack([rng.integers(0, p, size=n_probes) for p in dims], axis=1)
    target = float(np.mean(1.0 / np.abs(m.evaluate_many(probes))))
    current = float(np.mean(np.abs(v.evaluate_many(probes))))
    if current > 0:
        factor = (target / current) ** (1.0 / len(sites))
        v = PeriodicMPS([s * factor for s in sites])
    return v


def grow_bond(v: PeriodicMPS, chi: int, rng: np.random.Generator, noise: float = 1e-6) -> PeriodicMPS:
    """Embed into bond chi by zero padding plus small noise."""
    sites = []
    for s in v.sites:
        p, cl, cr = s.shape
        if chi < cl or chi < cr:
            raise ValueError("bond growth cannot shrink")
        new = noise * rng.uniform(-1.0, 1.0, size=(p, chi, chi))
        new[:, :cl, :cr] += s
        sites.append(new)
    return PeriodicMPS(sites)


# ---------------------------------------------------------------------------
# sweeping optimiser


def sweep(m: PeriodicMPS, v: PeriodicMPS, alpha: float, cfg: InversionConfig) -> PeriodicMPS:
    """One pass over all (site, index) pairs; returns the updated ansatz."""
    sites = [s.copy() for s in v.sites]
    n = len(sites)
    t4 = [_transfer([ms, ms, vs, vs]) for ms, vs in zip(m.sites, sites)]
    t2 = [_transfer([ms, vs]) for ms, vs in zip(m.sites, sites)]
    for j in range(n):
        env4, env2 = _environment(t4, j), _environment(t2, j)
        for k in range(m.phys_dims[j]):
            cur = PeriodicMPS(sites)
            a, b = _quadratic_from_envs(m, cur, j, k, env4, env2)
            a, b = _regularize(a, b, cur, j, k, alpha, cfg.reg_mode)
            x_old = sites[j][k].ravel()
            old = x_old @ a @ x_old + b @ x_old
            x, _ = local_solve(a, b, cfg.rcond, return_info=True)
            new = x @ a @ x + b @ x
            if new > old:
                # cutoff discarded curvature the old tensor was using
                x, _ = local_solve(a, b, None, return_info=True)
                new = x @ a @ x + b @ x
                if new > old:
                    x, new = x_old, old
            if cfg.check_descent and new > old + 1e-9 * (1.0 + abs(old)):
                raise AssertionError(f"local step increased the cost ({old:.6e} -> {new:.6e})")
            sites[j][k] = x.reshape(sites[j][k].shape)
        t4[j] = _transfer([m.sites[j], m.sites[j], sites[j], sites[j]])
        t2[j] = _transfer([m.sites[j], sites[j]])
    return PeriodicMPS(sites)


def invert(m: PeriodicMPS, cfg: InversionConfig | None = None, rng: np.random.Generator | None = None,
           v0: PeriodicMPS | None = None) -> InversionResult:
    """Cyclic coordinate descent for V with m * V ~ 1 (Algorithm: sweep until C0 <= eps_stop)."""
    cfg = cfg or InversionConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if np.any(m.evaluate_many(np.zeros((1, m.n_sites), dtype=int)) <= 0):
        raise ValueError("m must be positive")
    schedule = list(cfg.chi_schedule)
    v = v0 if v0 is not None else initial_ansatz(m, schedule[0], rng, cfg.n_probes)
    exhaustive = m.n_sites <= cfg.exhaustive_max_sites

    def c0(vv):
        # the contracted value cancels catastrophically near zero
        return cost_exhaustive(m, vv)[0] if exhaustive else cost(m, vv)

    stage = 0
    stage_start = 0
    history = [c0(v)]
    best_v, best_c = v, history[0]
    sweeps = restarts = 0
    while sweeps < cfg.max_sweeps and history[-1] > cfg.eps_stop:
        alpha = 0.0 if cfg.reg_mode == "none" else (history[-1] if cfg.alpha is None else cfg.alpha)
        before = cost(m, v, alpha, cfg.reg_mode)
        v = sweep(m, v, alpha, cfg)
        sweeps += 1
        c_new = c0(v)
        if cfg.check_descent and cfg.reg_mode in ("none", "norm"):
            after = cost(m, v, alpha, cfg.reg_mode)
            if after > before + 1e-9 * (1.0 + abs(before)):
                raise AssertionError(f"sweep increased the cost ({before:.6e} -> {after:.6e})")
        history.append(c_new)
        if c_new < best_c:
            best_v, best_c = v, c_new
        stalled = history[-2] - c_new < cfg.stall_tol * history[-2]
        if stage + 1 < len(schedule) and (stalled or sweeps - stage_start >= cfg.stage_sweeps):
            stage += 1
            stage_start = sweeps
            v = grow_bond(v, schedule[stage], rng)
            log.info("bond grown to %d after %d sweeps (C0 = %.3e)", schedule[stage], sweeps, c_new)
        elif (
            stage + 1 == len(schedule)
            and restarts < cfg.max_restarts
            and sweeps - stage_start >= cfg.restart_window
            and history[-1 - cfg.restart_window] < cfg.restart_factor * c_new
        ):
            # slow valley: coordinate descent from here rarely reaches eps_stop
            restarts += 1
            stage, stage_start = 0, sweeps
            v = initial_ansatz(m, schedule[0], rng, cfg.n_probes)
            history.append(c0(v))
            log.info("restart %d after %d sweeps (C0 = %.3e)", restarts, sweeps, c_new)
    final, linf = best_c, None
    mv = hadamard(m, best_v)
    magnitude = dot(mv, mv) + 2.0 * abs(dot(m, best_v)) + float(np.prod(m.phys_dims))
    contracted = cost(m, best_v)
    if exhaustive:
        final, linf = cost_exhaustive(m, best_v)
    elif contracted < 1e-15 * magnitude:
        warnings.warn(
            f"cost {contracted:.3e} is below the contraction precision floor "
            f"({1e-15 * magnitude:.1e}); herald is unreliable", RuntimeWarning
        )
    return InversionResult(
        V=best_v,
        final_cost=float(final),
        herald_epsilon=float(np.sqrt(max(final, 0.0))),
        sweeps_used=sweeps,
        cost_history=[float(c) for c in history],
        heralded=bool(final <= cfg.eps_stop),
        linf_error=linf,
        restarts=restarts,
        chi=best_v.max_bond,
    )


def exact_inverse(m: PeriodicMPS, max_sites: int = 16) -> InversionResult:
    """Elementwise inverse by densifying m and re-factorising 1/m with SVDs.

    Exact up to rounding and cheap while 2^N is small; the bond it needs is
    whatever the SVD finds, so it serves as a reference for the variational
    route rather than a replacement.
    """
    if m.n_sites > max_sites:
        raise ValueError(f"exact inverse densifies 2^{m.n_sites} values (limit {max_sites} sites)")
    dense = m.to_dense()
    if np.any(dense <= 0):
        raise ValueError("m must be positive")
    v = PeriodicMPS.from_dense(1.0 / dense, m.phys_dims)
    final, linf = cost_exhaustive(m, v)
    return InversionResult(
        V=v, final_cost=float(final), herald_epsilon=float(np.sqrt(final)), sweeps_used=0,
        cost_history=[float(final)], heralded=True, linf_error=linf, chi=v.max_bond,
    )
