"""Multi-start annealing for the cell problem

    g_T(z) = T^-m inf { E_1(u; Q_T) : <u>_{Q_T} = z }

and its relaxed variant |<u> - z| <= eta.  The search is an upper-bound
method: the reported value is the energy density of a feasible field.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..energy import EnergyModel, total_energy
from ..errors import BudgetExhausted, InfeasibleTarget
from ..lattice import LatticeDomain, SpinField
from ..sphere_geom import random_units
from .constraint import restore_relaxed, restore_sharp
from .types import Budget, CellSpec, SolveResult

log = logging.getLogger(__name__)

SPHERE_TOL = 1e-12
INIT_ATTEMPTS = 25
SIGMA_MIN, SIGMA_MAX = 1e-4, 2.0
ANCHOR_PROB = 0.2
ANCHOR_TOL = 1e-12


def restart_seed(root: int, index: int) -> tuple[np.random.SeedSequence, int]:
    """Child seed for restart ``index``; independent of how many restarts run."""
    ss = np.random.SeedSequence(int(root), spawn_key=(int(index),))
    return ss, int(ss.generate_state(1, np.uint32)[0])


def _restorer(spec: CellSpec, budget: Budget):
    z = np.asarray(spec.z)
    if spec.sharp:
        mode = "retract" if budget.projection == "auto" else budget.projection
        anchors = spec.kernel.anchors
        if anchors is None or budget.projection != "auto":
            return lambda U: restore_sharp(U, z, mode)
        A = np.asarray(anchors(spec.N), dtype=float)

        def restore(U):
            # spins sitting exactly on an anchor are kept when possible
            frozen = np.any(np.all(np.abs(U[:, None, :] - A[None]) <= ANCHOR_TOL, axis=2), axis=1)
            return restore_sharp(U, z, mode, frozen)

        return restore
    return lambda U: restore_relaxed(U, z, spec.eta)


def _metropolis_sweep(model, U, temp, sigma, rng, classes, anchors=None):
    """One checkerboard sweep of single-spin Metropolis moves; returns (U', acceptance).

    Proposals are Gaussian steps on the sphere; with anchors, a fraction of
    them jump to a randomly chosen anchor instead.
    """
    U = U.copy()
    accepted = 0
    for nodes in classes:
        X = U[nodes] + sigma * rng.standard_normal((len(nodes), U.shape[1]))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if anchors is not None:
            jump = rng.random(len(nodes)) < ANCHOR_PROB
            X[jump] = anchors[rng.integers(len(anchors), size=int(jump.sum()))]
        dE = model.delta(U, nodes, X)
        if temp > 0.0:
            with np.errstate(over="ignore"):
                ok = (dE <= 0.0) | (rng.random(len(nodes)) < np.exp(-dE / temp))
        else:
            ok = dE <= 0.0
        U[nodes[ok]] = X[ok]
        accepted += int(ok.sum())
    return U, accepted / U.shape[0]


def _descent_direction(U, G, sharp):
    """Tangent descent direction keeping the spin sum fixed to first order (sharp)."""
    Gt = G - U * np.einsum("ij,ij->i", U, G)[:, None]
    if not sharp:
        return -Gt
    n, N = U.shape
    J = n * np.eye(N) - U.T @ U
    try:
        mu = -np.linalg.solve(J, Gt.sum(axis=0))
    except np.linalg.LinAlgError:
        return -Gt
    return -(Gt + mu - U * (U @ mu)[:, None])


def _polish(model, U, E, restore, sharp, iters):
    """Projected gradient descent with Armijo backtracking; smooth kernels only."""
    step = 0.1
    for _ in range(iters):
        D = _descent_direction(U, model.gradient(U), sharp)
        d2 = float(np.sum(D * D))
        if d2 < 1e-24:
            break
        for _ in range(30):
            V = U + step * D
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            V = restore(V)
            if V is not None:
                E_new = model.total(V)
                if E_new <= E - 1e-4 * step * d2:
                    break
            step *= 0.5
        else:
            break
        U, E = V, E_new
        step = min(step * 2.0, 10.0)
    return U, E


def _run_restart(model, spec, budget, index, init):
    ss, label = restart_seed(budget.seed, index)
    rng = np.random.default_rng(ss)
    restore = _restorer(spec, budget)
    n, N = model.domain.n_nodes, spec.N

    U = None
    if init is not None:
        U = restore(np.array(init, dtype=float))
    attempts = 0
    while U is None and attempts < INIT_ATTEMPTS:
        U = restore(random_units(n, N, rng))
        attempts += 1
    if U is None:
        raise BudgetExhausted(f"restart {index}: no feasible starting point")

    E = model.total(U)
    best_U, best_E = U, E
    temp = model.kernel.bound * model.scale if model.kernel.bound > 0 else 1.0
    sigma = SIGMA_MAX
    classes = model.colour_classes()
    anchors = None if model.kernel.anchors is None else np.asarray(model.kernel.anchors(N), dtype=float)
    for _ in range(budget.sweeps):
        acc = 0.0
        for _ in range(1 + budget.max_redraws):
            V, acc = _metropolis_sweep(model, U, temp, sigma, rng, classes, anchors)
            W = restore(V)
            if W is None:
                continue
            E_new = model.total(W)
            if E_new - E <= temp:
                U, E = W, E_new
                break
        sigma = min(SIGMA_MAX, max(SIGMA_MIN, sigma * (1.1 if acc > 0.4 else 0.9)))
        if E < best_E:
            best_U, best_E = U, E
        temp *= budget.cooling

    if model.kernel.smooth and budget.polish_iters:
        best_U, best_E = _polish(model, best_U, best_E, restore, spec.sharp, budget.polish_iters)
    return best_U, label


def _residual(U, z) -> float:
    return float(np.linalg.norm(U.mean(axis=0) - np.asarray(z)))


def solve_cell(spec: CellSpec, budget: Budget | None = None, threads: int = 1,
               init: SpinField | None = None) -> SolveResult:
    """Best feasible field found over ``budget.restarts`` independent restarts.

    On the sphere (|z| = 1, sharp) the constant field is the only competitor
    and is returned without search.
    """
    budget = budget or Budget()
    z = np.asarray(spec.z)
    zn = float(np.linalg.norm(z))
    if zn > 1.0 + SPHERE_TOL:
        raise InfeasibleTarget(f"|z| = {zn!r} > 1")
    domain = LatticeDomain.cube(spec.T, spec.m, spec.offset)
    T_m = float(spec.T) ** spec.m

    if spec.sharp and zn >= 1.0 - SPHERE_TOL:
        field = SpinField.constant(domain, z / zn)
        value = total_energy(field, spec.kernel).total / T_m
        return SolveResult(value, field, 0, int(budget.seed), _residual(field.values, z), [value])

    model = EnergyModel(domain, spec.kernel)
    init_values = None if init is None else init.values

    def job(i):
        return _run_restart(model, spec, budget, i, init_values)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(job, range(budget.restarts)))
    else:
        runs = [job(i) for i in range(budget.restarts)]

    scored = []
    for U, label in runs:
        field = SpinField(domain, U)
        scored.append((total_energy(field, spec.kernel).total / T_m, label, field))
    value, label, field = min(scored, key=lambda t: (t[0], t[1]))
    log.info("T=%d z=%s value=%.6g (restart seed %d)", spec.T, spec.z, value, label)
    return SolveResult(
        value, field, budget.restarts, label, _residual(field.values, z),
        [s[0] for s in scored],
    )


def relaxed_cell(spec: CellSpec, budget: Budget | None = None, threads: int = 1,
                 init: SpinField | None = None) -> SolveResult:
    """Relaxed cell problem |<u> - z| <= eta; a warm start bounds the result by its own energy."""
    if spec.eta is None:
        raise ValueError("relaxed_cell needs a spec with eta > 0")
    return solve_cell(spec, budget, threads, init)
