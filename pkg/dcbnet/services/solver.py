"""Matriz de taxas, distribuição estacionária, análise transitória e tempo de mistura."""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import LinearOperator, gmres, spilu, splu
from scipy.stats import poisson

from dcbnet.core.config import dense_solver_limit
from dcbnet.core.errors import SolverError
from dcbnet.services.ctmc import Ctmc

logger = logging.getLogger("dcbnet.solver")

RESIDUAL_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
REFINEMENT_ROUNDS = 3
TRANSIENT_TOL = 1e-9
MIXING_GRID_FACTOR = 1.1
MAX_MIXING_STEPS = 2000
POWER_ITERATION_LIMIT = 200_000
# Laço próprio em todos os estados, mantendo a cadeia uniformizada aperiódica.
UNIFORMIZATION_MARGIN = 1.02


def rate_matrix(ctmc: Ctmc) -> sparse.csr_matrix:
    """Gerador Q: transições paralelas somadas e diagonal fechando cada linha em zero."""
    size = ctmc.size
    rows = [item.source for item in ctmc.transitions]
    cols = [item.target for item in ctmc.transitions]
    data = [item.rate for item in ctmc.transitions]
    off_diagonal = sparse.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()
    off_diagonal.sum_duplicates()
    outflow = np.asarray(off_diagonal.sum(axis=1)).ravel()
    return (off_diagonal - sparse.diags(outflow)).tocsr()


def residual(Q: sparse.spmatrix, pi: np.ndarray) -> float:
    """Norma infinito de πQ."""
    return float(np.max(np.abs(Q.T @ pi))) if pi.size else 0.0


def _polish(pi: np.ndarray) -> np.ndarray:
    pi = np.where(np.abs(pi) < 1e-300, 0.0, pi)
    if np.any(pi < -1e-9):
        raise SolverError("Distribuição estacionária com entradas negativas; cadeia mal construída.")
    pi = np.clip(pi, 0.0, None)
    total = pi.sum()
    if not total > 0:
        raise SolverError("Distribuição estacionária degenerada.")
    return pi / total


def _normalized_system(Q: sparse.spmatrix) -> sparse.csr_matrix:
    size = Q.shape[0]
    balance = Q.T.tocsr()[: size - 1]
    ones = sparse.csr_matrix(np.ones((1, size)))
    return sparse.vstack([balance, ones]).tocsr()


def _solve_dense(Q: sparse.spmatrix) -> np.ndarray:
    system = _normalized_system(Q).toarray()
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    try:
        factors = linalg.lu_factor(system, check_finite=True)
    except (linalg.LinAlgError, ValueError) as error:
        raise SolverError(f"Sistema de balanço singular: {error}") from error
    if np.any(np.abs(np.diag(factors[0])) == 0.0):
        raise SolverError("Sistema de balanço singular: pivô nulo.")
    pi = linalg.lu_solve(factors, rhs)
    # Um passo de refinamento iterativo.
    pi = pi + linalg.lu_solve(factors, rhs - system @ pi)
    return pi


def _power_iteration(Q: sparse.spmatrix, start: np.ndarray | None = None) -> np.ndarray:
    P, _ = _uniformize(Q)
    size = Q.shape[0]
    pi = np.full(size, 1.0 / size) if start is None else start.copy()
    PT = P.T.tocsr()
    for _ in range(POWER_ITERATION_LIMIT):
        updated = PT @ pi
        updated /= updated.sum()
        if np.max(np.abs(updated - pi)) < 1e-15:
            return updated
        pi = updated
    return pi


def _solve_iterative(Q: sparse.spmatrix) -> np.ndarray:
    system = _normalized_system(Q).tocsc()
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    try:
        preconditioner = spilu(system, drop_tol=1e-6, fill_factor=20)
        operator = LinearOperator(system.shape, preconditioner.solve)
        pi, info = gmres(system, rhs, M=operator, rtol=1e-13, atol=0.0, restart=100, maxiter=2000)
    except RuntimeError as error:
        logger.warning("Pré-condicionador ILU falhou (%s); usando iteração de potência", error)
        return _power_iteration(Q)
    if info != 0 or residual(Q, pi / pi.sum()) > RESIDUAL_TOL:
        logger.warning("GMRES não convergiu (info=%s); usando iteração de potência", info)
        start = np.clip(pi, 0.0, None)
        return _power_iteration(Q, start / start.sum() if start.sum() > 0 else None)
    return pi


def _refine(Q: sparse.spmatrix, pi: np.ndarray) -> np.ndarray:
    """Refinamento iterativo sobre a fatoração LU esparsa do sistema normalizado."""
    system = _normalized_system(Q).tocsc()
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    try:
        factors = splu(system)
    except RuntimeError as error:
        raise SolverError(f"Sistema de balanço singular: {error}") from error
    for _ in range(REFINEMENT_ROUNDS):
        pi = _polish(pi + factors.solve(rhs - system @ pi))
        if residual(Q, pi) <= RESIDUAL_TOL:
            break
    return pi


def steady_state(Q: sparse.spmatrix) -> np.ndarray:
    """Resolve πQ = 0 com Σπ = 1, trocando a última equação de balanço pela normalização.

    Fatoração densa até ``dense_solver_limit()`` estados; acima disso GMRES
    pré-condicionado com recurso à iteração de potência na cadeia uniformizada.
    Se ‖πQ‖∞ passar de ``RESIDUAL_TOL`` (absoluto), aplica refinamento iterativo.
    """
    Q = sparse.csr_matrix(Q)
    size = Q.shape[0]
    if size == 0:
        raise SolverError("Cadeia sem estados.")
    if size == 1:
        return np.ones(1)
    if size <= dense_solver_limit():
        logger.debug("Resolvendo %d estados por fatoração densa", size)
        pi = _solve_dense(Q)
    else:
        logger.info("Resolvendo %d estados pelo caminho iterativo", size)
        pi = _solve_iterative(Q)
    pi = _polish(pi)
    if residual(Q, pi) > RESIDUAL_TOL:
        logger.debug("Resíduo %.3e acima da tolerância; refinando", residual(Q, pi))
        pi = _refine(Q, pi)
    error = residual(Q, pi)
    if error > RESIDUAL_TOL:
        raise SolverError(f"Resíduo ‖πQ‖∞ = {error:.3e} acima da tolerância.")
    return pi


def _uniformize(Q: sparse.spmatrix) -> tuple[sparse.csr_matrix, float]:
    size = Q.shape[0]
    rate = float(np.max(-Q.diagonal())) * UNIFORMIZATION_MARGIN if size else 0.0
    if rate <= 0:
        return sparse.identity(size, format="csr"), 0.0
    return (sparse.identity(size, format="csr") + Q / rate).tocsr(), rate


def _propagate(
    PT: sparse.csr_matrix, rate: float, start: np.ndarray, t: float, tol: float
) -> np.ndarray:
    mean = rate * t
    if mean == 0.0:
        return start.copy()
    cutoff = int(poisson.isf(tol, mean)) + 1
    weights = poisson.pmf(np.arange(cutoff + 1), mean)
    first = int(np.argmax(weights > tol * 1e-3))
    term = start.copy()
    result = np.zeros_like(start)
    for k in range(cutoff + 1):
        if k >= first:
            result += weights[k] * term
        term = PT @ term
    result = np.clip(result, 0.0, None)
    return result / result.sum()


def transient(Q: sparse.spmatrix, pi0: np.ndarray, t: float, tol: float = TRANSIENT_TOL) -> np.ndarray:
    """pi0·exp(Qt) por uniformização, com truncamento de Poisson em ``tol``."""
    if t < 0:
        raise ValueError("Tempo deve ser não negativo.")
    start = np.asarray(pi0, dtype=float)
    if start.ndim != 1 or start.size != Q.shape[0]:
        raise ValueError("Distribuição inicial com dimensão incompatível.")
    if np.any(start < 0) or abs(start.sum() - 1.0) > 1e-9:
        raise ValueError("Distribuição inicial inválida.")
    P, rate = _uniformize(sparse.csr_matrix(Q))
    return _propagate(P.T.tocsr(), rate, start, float(t), tol)


def point_mass(size: int, index: int = 0) -> np.ndarray:
    start = np.zeros(size)
    start[index] = 1.0
    return start


def mixing_time(
    Q: sparse.spmatrix,
    epsilon: float,
    start: np.ndarray | None = None,
    pi: np.ndarray | None = None,
) -> float:
    """Menor t de uma grade geométrica (fator 1.1) com ‖p_t − π‖₂ ≤ epsilon.

    O padrão parte da massa pontual no estado vazio (índice 0).
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon deve estar em (0, 1).")
    Q = sparse.csr_matrix(Q)
    size = Q.shape[0]
    target = steady_state(Q) if pi is None else np.asarray(pi, dtype=float)
    current = point_mass(size) if start is None else np.asarray(start, dtype=float)
    if np.linalg.norm(current - target) <= epsilon:
        return 0.0
    P, rate = _uniformize(Q)
    if rate == 0.0:
        raise SolverError("Cadeia sem transições; a distribuição não evolui.")
    PT = P.T.tocsr()
    elapsed = 0.0
    moment = 0.01 / rate
    for _ in range(MAX_MIXING_STEPS):
        current = _propagate(PT, rate, current, moment - elapsed, TRANSIENT_TOL)
        elapsed = moment
        if np.linalg.norm(current - target) <= epsilon:
            logger.debug("Tempo de mistura %.6g s (ε=%g)", moment, epsilon)
            return moment
        moment *= MIXING_GRID_FACTOR
    raise SolverError("Tempo de mistura não encontrado dentro da grade.")


def one_way_transitions(Q: sparse.spmatrix) -> list[tuple[int, int]]:
    """Pares (i, j) com q(i→j) > 0 e q(j→i) = 0."""
    Q = sparse.csr_matrix(Q)
    positive = (Q > 0).astype(np.int8)
    positive.setdiag(0)
    positive.eliminate_zeros()
    one_way = (positive - positive.multiply(positive.T)).tocoo()
    return sorted(
        (int(i), int(j)) for i, j, value in zip(one_way.row, one_way.col, one_way.data) if value > 0
    )


def is_reversible(Q: sparse.spmatrix, pi: np.ndarray | None = None, tol: float = 1e-9) -> bool:
    """Detecta reversibilidade: sem transições de mão única e com balanço detalhado sob π."""
    Q = sparse.csr_matrix(Q)
    if one_way_transitions(Q):
        return False
    pi = steady_state(Q) if pi is None else np.asarray(pi, dtype=float)
    flux = sparse.diags(pi) @ Q
    flux = flux - sparse.diags(flux.diagonal())
    imbalance = abs(flux - flux.T)
    peak = float(abs(flux).max()) if flux.nnz else 0.0
    return imbalance.nnz == 0 or float(imbalance.max()) <= tol * max(peak, 1.0)
