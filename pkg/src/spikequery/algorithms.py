"""Query algorithms run against the oracle: power iteration, Lanczos, random.

All three see the hidden matrix only through unit-vector queries.  Power
iteration re-normalizes responses; Lanczos builds an orthonormal Krylov
basis (full orthogonalization against all prior directions) and outputs the
Rayleigh-Ritz maximizer; the non-adaptive baseline queries independent
random directions and extracts the same Ritz maximizer from whatever
subspace it happened to observe.  The Ritz computation itself runs on
(query, response) pairs alone: orthonormalizing the queries while applying
the identical linear operations to the responses yields the compressed
quadratic form B^T M B without ever touching M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .instances import Seed, as_rng, make_spiked, sample_uniform_sphere, spectral_norm
from .oracle import QuerySession, open_session

#: Residual norm below which the Krylov space has closed (Lanczos breakdown).
BREAKDOWN_TOL = 1e-10

ALGORITHM_KINDS = ("power", "lanczos", "random")


@dataclass(frozen=True)
class AlgorithmConfig:
    """Which algorithm to run and how to initialize it.

    budget None means "use the whole session budget".  init None draws the
    starting vector uniformly from the sphere; a supplied init must be unit.
    shift adds shift*v to each power-method response before normalizing
    (spectral shift by a multiple of the identity, computed client-side).
    """

    kind: str = "power"
    budget: Optional[int] = None
    seed: Seed = None
    init: Optional[np.ndarray] = None
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in ALGORITHM_KINDS:
            raise ValueError(f"kind must be one of {ALGORITHM_KINDS}, got {self.kind!r}")
        if self.budget is not None and self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.init is not None:
            init = np.asarray(self.init, dtype=float)
            if abs(np.linalg.norm(init) - 1.0) > 1e-8:
                raise ValueError("supplied init must be unit norm")
            object.__setattr__(self, "init", init)


def ritz_from_pairs(
    queries: Sequence[np.ndarray], responses: Sequence[np.ndarray]
) -> Tuple[Optional[np.ndarray], float]:
    """Rayleigh-Ritz maximizer over the span of observed query directions.

    Orthonormalizes the queries by modified Gram-Schmidt while carrying the
    responses through the same linear combinations, producing basis vectors
    b_j and their images M b_j.  Returns the top eigenvector of the
    compressed form lifted back to R^d, plus its Ritz value.  Returns
    (None, -inf) if no direction survives orthonormalization.
    """
    basis: List[np.ndarray] = []
    images: List[np.ndarray] = []
    for v, w in zip(queries, responses):
        r = v.astype(float, copy=True)
        img = w.astype(float, copy=True)
        for _ in range(2):
            for b, mb in zip(basis, images):
                c = b @ r
                r -= c * b
                img -= c * mb
        rnorm = np.linalg.norm(r)
        if rnorm < BREAKDOWN_TOL:
            continue
        basis.append(r / rnorm)
        images.append(img / rnorm)
    if not basis:
        return None, -np.inf
    B = np.column_stack(basis)
    MB = np.column_stack(images)
    H = B.T @ MB
    H = (H + H.T) / 2.0
    vals, vecs = np.linalg.eigh(H)
    y = vecs[:, -1]
    v_hat = B @ y
    v_hat /= np.linalg.norm(v_hat)
    return v_hat, float(vals[-1])


def _initial_vector(config: AlgorithmConfig, d: int, rng: np.random.Generator) -> np.ndarray:
    if config.init is not None:
        if config.init.shape != (d,):
            raise ValueError(
                f"init has dimension {config.init.shape}, session needs ({d},)"
            )
        return config.init.astype(float, copy=True)
    return sample_uniform_sphere(d, rng)


def iterate_candidates(
    session: QuerySession, config: AlgorithmConfig
) -> Iterator[np.ndarray]:
    """Run the configured algorithm one query at a time.

    Yields the algorithm's current output candidate after each query (the
    vector it would finalize with if stopped there).  Stops after the
    configured budget, or earlier on Krylov breakdown.
    """
    d = session.dim
    rng = as_rng(config.seed)
    T = session.remaining if config.budget is None else min(config.budget, session.remaining)
    v = _initial_vector(config, d, rng)

    if config.kind == "power":
        for _ in range(T):
            w = session.query(v)
            y = w + config.shift * v
            norm = np.linalg.norm(y)
            v = y / norm if norm > 0 else v
            yield v.copy()
        return

    if config.kind == "lanczos":
        queries: List[np.ndarray] = []
        responses: List[np.ndarray] = []
        direction = v
        for _ in range(T):
            w = session.query(direction)
            queries.append(direction)
            responses.append(w)
            v_hat, _ = ritz_from_pairs(queries, responses)
            yield v_hat
            # next direction: response orthogonalized against all prior
            # queries (full reorthogonalization), unit-normalized
            r = w.astype(float, copy=True)
            for _ in range(2):
                for q in queries:
                    r -= (q @ r) * q
            rnorm = np.linalg.norm(r)
            if rnorm < BREAKDOWN_TOL:
                return  # Krylov space closed
            direction = r / rnorm
        return

    # random-nonadaptive: i.i.d. sphere queries, Ritz over the observed span
    queries = []
    responses = []
    for _ in range(T):
        direction = sample_uniform_sphere(d, rng)
        w = session.query(direction)
        queries.append(direction)
        responses.append(w)
        v_hat, _ = ritz_from_pairs(queries, responses)
        yield v_hat


def _run(session: QuerySession, config: AlgorithmConfig) -> np.ndarray:
    budget = session.remaining if config.budget is None else min(config.budget, session.remaining)
    v_hat = None
    made = 0
    for candidate in iterate_candidates(session, config):
        v_hat = candidate
        made += 1
    if v_hat is None:
        raise ValueError("algorithm produced no candidate (empty budget?)")
    session.finalize(v_hat, early_termination=made < budget)
    return v_hat


def run_power(session: QuerySession, config: AlgorithmConfig) -> np.ndarray:
    """Power iteration: v <- normalize(M v), output the final iterate."""
    if config.kind != "power":
        config = AlgorithmConfig(
            "power", config.budget, config.seed, config.init, config.shift
        )
    return _run(session, config)


def run_lanczos(session: QuerySession, config: AlgorithmConfig) -> np.ndarray:
    """Krylov + Rayleigh-Ritz: output the Ritz maximizer of the Krylov space.

    On breakdown (Krylov residual below 1e-10) the current Ritz vector is
    returned and the finalized transcript is flagged early_termination.
    """
    if config.kind != "lanczos":
        config = AlgorithmConfig("lanczos", config.budget, config.seed, config.init)
    return _run(session, config)


def run_random_nonadaptive(session: QuerySession, config: AlgorithmConfig) -> np.ndarray:
    """Non-adaptive baseline: i.i.d. random queries, Ritz over what they span."""
    if config.kind != "random":
        config = AlgorithmConfig("random", config.budget, config.seed, config.init)
    return _run(session, config)


RUNNERS = {
    "power": run_power,
    "lanczos": run_lanczos,
    "random": run_random_nonadaptive,
}


def queries_to_target(
    kind: str,
    d: int,
    lam: float,
    target_ratio: float,
    seed: Seed = None,
    max_T: int = 64,
) -> int:
    """Smallest query count at which the algorithm's candidate output reaches
    a Rayleigh quotient of target_ratio * ||M|| on a fresh instance.

    One instance and one growing session per call; returns max_T + 1 when the
    target is never met within the budget.  Evaluation uses ground truth (the
    caller-side instance), the algorithm itself still sees only the oracle.
    """
    if not (0 <= target_ratio < 1):
        raise ValueError(f"target_ratio must lie in [0, 1), got {target_ratio}")
    if max_T < 1:
        raise ValueError(f"max_T must be >= 1, got {max_T}")
    # one generator for both the instance and the algorithm's own randomness,
    # so the two never replay the same stream
    rng = as_rng(seed)
    inst = make_spiked(d, lam, seed=rng)
    norm = spectral_norm(inst.matrix)
    session = open_session(inst, budget=max_T)
    config = AlgorithmConfig(kind=kind, seed=rng)
    for T, candidate in enumerate(iterate_candidates(session, config), start=1):
        if float(candidate @ inst.matrix @ candidate) >= target_ratio * norm:
            return T
    return max_T + 1
