import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

import dual
from errors import NoConvergence


@dataclass(frozen=True)
class LmOptions:
    max_iter: int = 2048
    tol: float = 1e-8
    lambda0: float = 1e-3
    lambda_max: float = 1e16
    jacobian: str = "dual"


@dataclass
class LmResult:
    x: np.ndarray
    residual: float
    iterations: int


def _evaluate(residual: Callable, x: np.ndarray, mode: str) -> tuple[np.ndarray, np.ndarray]:
    if mode == "dual":
        return dual.jacobian(residual, x)
    if mode == "central":
        r = np.real(np.asarray(residual(x))).astype(float)
        return r, dual.central_difference(lambda y: np.real(np.asarray(residual(y))), x)
    raise ValueError(f"unknown jacobian mode: {mode}")


def lm_minimize(residual: Callable, x0, opts: LmOptions | None = None) -> LmResult:
    # NoConvergence carries the best point once max_iter or the damping ceiling is hit.
    logger = logging.getLogger(__name__)
    opts = opts or LmOptions()
    x = np.asarray(x0, dtype=float).copy()
    r, jac = _evaluate(residual, x, opts.jacobian)
    cost = float(r @ r)
    lam = opts.lambda0
    eye = np.eye(x.size)

    for it in range(opts.max_iter):
        if float(np.max(np.abs(r))) <= opts.tol:
            return LmResult(x=x, residual=float(np.max(np.abs(r))), iterations=it)
        gram = jac.T @ jac
        grad = jac.T @ r
        try:
            step = np.linalg.solve(gram + lam * eye, -grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = x + step
        r_trial = np.real(np.asarray(residual(trial))).astype(float)
        trial_cost = float(r_trial @ r_trial)
        if np.isfinite(trial_cost) and trial_cost < cost:
            x = trial
            r, jac = _evaluate(residual, x, opts.jacobian)
            cost = float(r @ r)
            lam = max(lam / 10.0, 1e-12)
        else:
            lam *= 10.0
            if lam > opts.lambda_max:
                logger.debug("lm_stalled iter=%s cost=%.3e", it, cost)
                break

    best = float(np.max(np.abs(r)))
    if best <= opts.tol:
        return LmResult(x=x, residual=best, iterations=opts.max_iter)
    raise NoConvergence(f"residual {best:.3e} above tol {opts.tol:.1e}", best_x=x, best_residual=best)
