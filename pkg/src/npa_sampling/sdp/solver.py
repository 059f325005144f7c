"""Primal-dual interior-point solver for the moment-matrix SDPs.

The problem ``max b @ y s.t. Z = C - sum_k y_k A_k >= 0`` (with
``A_k = -E_k``, ``E_k`` the 0/1 pattern of variable ``k``) is solved together
with its primal ``min Tr(C X) s.t. Tr(A_k X) = b_k, X >= 0`` by an
infeasible-start path-following method using the HKM search direction and a
Mehrotra predictor-corrector step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from npa_sampling.sdp.problem import SdpProblem

log = logging.getLogger(__name__)

MAX_SIZE = 200
MAX_VARS = 5000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of :func:`solve`.

    ``primal_value`` is the objective at the returned ``y`` (a lower bound on
    the maximum); ``dual_value`` is ``Tr(C X) + offset`` (an upper bound).
    """

    status: str
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    y: Optional[np.ndarray] = None

    @property
    def value(self) -> float:
        return 0.5 * (self.primal_value + self.dual_value)


class _Lmi:
    """Sparse access to ``E_k`` through the flat cell indices of each variable."""

    def __init__(self, problem: SdpProblem):
        n = problem.size
        self.n = n
        self.nvars = problem.num_vars
        flat_var = problem.var_of.ravel()
        self.cells = np.flatnonzero(flat_var >= 0)
        self.var_ids = flat_var[self.cells]
        order = np.argsort(self.var_ids, kind="stable")
        self.cells, self.var_ids = self.cells[order], self.var_ids[order]
        starts = np.searchsorted(self.var_ids, np.arange(self.nvars + 1))
        self.rows = [self.cells[starts[k]:starts[k + 1]] // n for k in range(self.nvars)]
        self.cols = [self.cells[starts[k]:starts[k + 1]] % n for k in range(self.nvars)]
        self.C = np.where(problem.var_of >= 0, 0.0, problem.constant)

    def trace_e(self, w: np.ndarray) -> np.ndarray:
        """``Tr(E_k W)`` for every ``k`` (``E_k`` symmetric)."""
        return np.bincount(self.var_ids, weights=w.ravel()[self.cells],
                           minlength=self.nvars)

    def combine(self, y: np.ndarray) -> np.ndarray:
        """``sum_k y_k E_k``."""
        out = np.zeros(self.n * self.n)
        out[self.cells] = y[self.var_ids]
        return out.reshape(self.n, self.n)

    def schur(self, x: np.ndarray, zinv: np.ndarray) -> np.ndarray:
        """``M[i, k] = Tr(E_i X E_k Z^-1)``."""
        m = np.empty((self.nvars, self.nvars))
        for k in range(self.nvars):
            t = x[:, self.rows[k]] @ zinv[self.cols[k], :]
            m[:, k] = self.trace_e(t.T)
        return 0.5 * (m + m.T)


def _max_step(x_chol: np.ndarray, dx: np.ndarray) -> float:
    """Largest ``a`` with ``X + a dX >= 0`` given the Cholesky factor of X."""
    linv = np.linalg.inv(x_chol)
    ev = np.linalg.eigvalsh(linv @ dx @ linv.T)
    return np.inf if ev[0] >= 0 else -1.0 / ev[0]


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def solve(problem: SdpProblem, max_iter: int = 200, gap_tol: float = 1e-8,
          feas_tol: float = 1e-8) -> SolveReport:
    """Maximize ``problem``'s objective over ``Gamma(y) >= 0``.

    The run stops as optimal once ``|dual - primal| <= gap_tol`` and both
    residuals are below ``feas_tol`` (relative).  It is deterministic.

    Raises
    ------
    ValueError
        If the matrix is larger than 200 or there are more than 5000 variables.
    """
    n, nvars = problem.size, problem.num_vars
    if n > MAX_SIZE or nvars > MAX_VARS:
        raise ValueError(
            f"problem of size {n} with {nvars} variables exceeds the "
            f"{MAX_SIZE}/{MAX_VARS} limit of the built-in solver")
    lmi = _Lmi(problem)
    C, b = lmi.C, np.asarray(problem.objective, dtype=float)
    off = problem.offset
    if nvars == 0:
        ok = np.linalg.eigvalsh(C)[0] >= -feas_tol
        v = off if ok else -np.inf
        return SolveReport(OPTIMAL if ok else INFEASIBLE, v, v, 0.0, 0, np.zeros(0))

    scale = max(1.0, np.abs(C).max(), np.abs(b).max())
    x = scale * np.eye(n)
    z = scale * np.eye(n)
    y = np.zeros(nvars)
    norm_b, norm_c = 1.0 + np.linalg.norm(b), 1.0 + np.linalg.norm(C)
    best = None
    status = MAX_ITERATIONS
    it = 0
    for it in range(1, max_iter + 1):
        # A(X) = -Tr(E_k X), sum y_k A_k = -combine(y)
        rp = b + lmi.trace_e(x)
        rd = C - z + lmi.combine(y)
        pobj, dobj = float(np.sum(C * x)), float(b @ y)
        gap = abs(pobj - dobj)
        pinf = np.linalg.norm(rp) / norm_b
        dinf = np.linalg.norm(rd) / norm_c
        if dinf <= feas_tol:
            best = (dobj, pobj, gap, y.copy())
        if gap <= gap_tol and pinf <= feas_tol and dinf <= feas_tol:
            status = OPTIMAL
            break
        # primal ray with growing norm certifies that no y makes Gamma(y) PSD
        xnorm = np.linalg.norm(x)
        if xnorm > 1e10 * scale and pinf * norm_b / xnorm < 1e-8 and pobj / xnorm < -1e-8:
            status = INFEASIBLE
            break
        if np.linalg.norm(y) > 1e12 * scale:
            log.warning("dual iterates diverge; objective may be unbounded")
            break
        mu = float(np.sum(x * z)) / n
        log.debug("it %d pobj %.12g dobj %.12g pinf %.2e dinf %.2e mu %.2e", it, pobj, dobj, pinf, dinf, mu)
        try:
            zc = np.linalg.cholesky(z)
            xc = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            log.warning("lost positive definiteness at iteration %d", it)
            break
        zinv = cho_solve((zc, True), np.eye(n))
        zinv = _sym(zinv)
        schur = lmi.schur(x, zinv)
        try:
            mfac = cho_factor(schur)
        except LinAlgError:
            # near the optimum X loses rank; a tiny ridge keeps the step usable
            ridge = 1e-13 * max(1.0, np.trace(schur) / nvars)
            try:
                mfac = cho_factor(schur + ridge * np.eye(nvars))
            except LinAlgError:
                log.warning("singular Schur complement at iteration %d", it)
                break
        xrz = lmi.trace_e(x @ rd @ zinv)

        def direction(target_mu, corr):
            g = target_mu * zinv - x
            if corr is not None:
                g = g - corr @ zinv
            # M dy = rp - A(G) + A(X Rd Z^-1) with A(W) = -Tr(E W)
            rhs = rp + lmi.trace_e(g) - xrz
            dy = cho_solve(mfac, rhs)
            dz = rd + lmi.combine(dy)
            dx = _sym(g - x @ dz @ zinv)
            return dx, dy, dz

        dx, dy, dz = direction(0.0, None)
        ap = min(1.0, _max_step(xc, dx))
        ad = min(1.0, _max_step(zc, dz))
        mu_aff = float(np.sum((x + ap * dx) * (z + ad * dz))) / n
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        dx, dy, dz = direction(sigma * mu, dx @ dz)
        ap = min(1.0, 0.98 * _max_step(xc, dx))
        ad = min(1.0, 0.98 * _max_step(zc, dz))
        x = _sym(x + ap * dx)
        y = y + ad * dy
        z = _sym(z + ad * dz)

    if status == INFEASIBLE:
        return SolveReport(status, -np.inf, -np.inf, np.inf, it, None)
    pobj, dobj = float(np.sum(C * x)), float(b @ y)
    if status != OPTIMAL and best is not None:
        dobj, pobj, _, y = best
    gap = abs(pobj - dobj)
    log.debug("solver finished: %s after %d iterations, gap %.3g", status, it, gap)
    return SolveReport(status, dobj + off, pobj + off, gap, it, y)
