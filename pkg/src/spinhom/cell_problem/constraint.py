"""Feasibility restoration for the average constraint on a product of spheres."""
from __future__ import annotations

import numpy as np

from ..average_correction import correct_values
from ..errors import NotEnoughDiscord, TargetOnSphere, WNormTooLarge

RETRACT_TOL = 1e-13
RETRACT_ACCEPT = 1e-11


def retract_to_sum(U: np.ndarray, target_sum: np.ndarray, max_iter: int = 50,
                   movable: np.ndarray | None = None) -> np.ndarray | None:
    """Damped Newton retraction moving spins along their tangent spaces so the
    rows of U sum to target_sum.  Only rows flagged in ``movable`` (default all)
    change.  Returns None when the linearisation is singular (all movable spins
    parallel) or the iteration stalls away from the target.
    """
    n, N = U.shape
    mov = np.ones(n, dtype=bool) if movable is None else np.asarray(movable, dtype=bool)
    k = int(mov.sum())
    if k == 0:
        return None
    fixed_sum = U[~mov].sum(axis=0)
    W = U[mov]
    eye = np.eye(N)
    r = target_sum - fixed_sum - W.sum(axis=0)
    rn = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if rn <= RETRACT_TOL * n:
            break
        J = k * eye - W.T @ W
        try:
            lam = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(lam)):
            return None
        step = lam - W * (W @ lam)[:, None]
        t = 1.0
        for _ in range(40):
            V = W + t * step
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            r2 = target_sum - fixed_sum - V.sum(axis=0)
            r2n = float(np.linalg.norm(r2))
            if r2n < rn:
                break
            t *= 0.5
        else:
            break
        W, r, rn = V, r2, r2n
    if rn > RETRACT_ACCEPT * n:
        return None
    if movable is None:
        return W
    out = U.copy()
    out[mov] = W
    return out


def _certify(U, z):
    try:
        V, _ = correct_values(U, z)
    except (NotEnoughDiscord, WNormTooLarge, TargetOnSphere):
        return None
    return V


def restore_sharp(U: np.ndarray, z: np.ndarray, projection: str = "retract",
                  frozen: np.ndarray | None = None) -> np.ndarray | None:
    """Feasible point with average exactly z, or None.

    ``"retract"`` first moves all spins smoothly onto the constraint and then lets
    the sparse correction certify exactness (a no-op when already exact), with
    the sparse correction alone as fallback.  ``"lemma"`` uses only the sparse
    correction, which rewrites at most 2P spins.  With ``frozen`` rows, the
    retraction first tries to leave them untouched.
    """
    if projection == "retract":
        V = None
        if frozen is not None and frozen.any():
            V = retract_to_sum(U, U.shape[0] * z, movable=~frozen)
        if V is None:
            V = retract_to_sum(U, U.shape[0] * z)
        if V is not None:
            U = V
    return _certify(U, z)


def restore_relaxed(U: np.ndarray, z: np.ndarray, eta: float) -> np.ndarray | None:
    """Feasible point with |average - z| <= eta, or None."""
    n = U.shape[0]
    d = U.mean(axis=0) - z
    dn = float(np.linalg.norm(d))
    if dn <= eta:
        return U
    target = z + d * (eta * (1.0 - 1e-9) / dn)
    V = retract_to_sum(U, n * target)
    if V is not None:
        return V
    try:
        V, _ = correct_values(U, target)
    except (NotEnoughDiscord, WNormTooLarge, TargetOnSphere):
        return None
    return V
