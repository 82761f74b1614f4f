"""
Milk-fever incidence logit with a parity x species interaction, fitted by
maximum likelihood, and predictive margins with delta-method standard
errors.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit
from scipy.stats import norm

from .errors import ConvergenceError, RankDeficiencyError, SeparationError, ValidationError
from .incidence import Species, SurveyRecord

logger = logging.getLogger(__name__)

MAX_ITER = 100
MAX_HALVINGS = 40
GRAD_TOL = 1e-8
LL_REL_TOL = 1e-10

SPECIES_ORDER = (Species.BUFFALO, Species.COW)
FACTORS = ("parity", "species", "cell")

Cell = Tuple[int, Species]


def _cell_name(cell: Cell) -> str:
    return f"{cell[0]}#{cell[1].value}"


@dataclass(frozen=True)
class FactorDesign:
    """
    Treatment-coded design for parity (2..5) times species.

    The lowest parity and the first species present are the reference
    levels. Interaction columns exist only for cells seen in the data.
    """
    parity_levels: Tuple[int, ...]
    species_levels: Tuple[Species, ...]
    cells: Tuple[Cell, ...]

    @property
    def columns(self) -> Tuple[str, ...]:
        cols = ["intercept"]
        cols += [f"parity[{p}]" for p in self.parity_levels[1:]]
        cols += [f"species[{s.value}]" for s in self.species_levels[1:]]
        cols += [f"parity[{p}]:species[{s.value}]" for p, s in self._interactions]
        return tuple(cols)

    @property
    def _interactions(self) -> List[Cell]:
        return [(p, s) for p, s in self.cells
                if p != self.parity_levels[0] and s != self.species_levels[0]]

    def row(self, parity: int, species: Species) -> np.ndarray:
        x = [1.0]
        x += [float(parity == p) for p in self.parity_levels[1:]]
        x += [float(species == s) for s in self.species_levels[1:]]
        x += [float(parity == p and species == s) for p, s in self._interactions]
        return np.array(x)

    def matrix(self, cells: Sequence[Cell]) -> np.ndarray:
        return np.vstack([self.row(p, s) for p, s in cells])

    @classmethod
    def from_records(cls, records: Sequence[SurveyRecord]) -> "FactorDesign":
        cells = sorted({(r.parity_level, r.species) for r in records},
                       key=lambda c: (c[0], SPECIES_ORDER.index(c[1])))
        parity = tuple(sorted({c[0] for c in cells}))
        species = tuple(s for s in SPECIES_ORDER if any(c[1] == s for c in cells))
        return cls(parity, species, tuple(cells))


def _cells_of(records: Sequence[SurveyRecord]) -> List[Cell]:
    return [(r.parity_level, r.species) for r in records]


def log_likelihood(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def score(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of the log-likelihood, X'(y - p)."""
    return X.T @ (y - expit(X @ beta))


def information(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Negative Hessian of the log-likelihood, X'WX."""
    p = expit(X @ beta)
    return X.T @ (X * (p * (1.0 - p))[:, None])


@dataclass(frozen=True, eq=False)
class LogitFit:
    """
    Fitted logit.

    Attributes:
        design: Factor design the coefficients refer to.
        coef: β, one entry per ``design.columns``.
        cov: Inverse of the observed information at β.
        log_likelihood: Maximized log-likelihood.
        iterations: Newton iterations used.
        gradient_norm: Euclidean norm of the score at β.
        ll_path: Log-likelihood after every accepted iteration.
    """
    design: FactorDesign
    coef: np.ndarray
    cov: np.ndarray
    log_likelihood: float
    iterations: int
    gradient_norm: float
    n_obs: int
    ll_path: Tuple[float, ...] = field(default=())

    @property
    def columns(self) -> Tuple[str, ...]:
        return self.design.columns

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    def cell_probability(self, parity: int, species: Species) -> float:
        return float(expit(self.design.row(parity, Species(species)) @ self.coef))

    def predict(self, records: Sequence[SurveyRecord]) -> np.ndarray:
        return expit(self.design.matrix(_cells_of(records)) @ self.coef)


def _check_separation(records: Sequence[SurveyRecord], design: FactorDesign, y: np.ndarray) -> None:
    cells = np.array([design.cells.index(c) for c in _cells_of(records)])
    for i, cell in enumerate(design.cells):
        outcomes = y[cells == i]
        if outcomes.min() == outcomes.max():
            raise SeparationError(_cell_name(cell), int(outcomes[0]), len(outcomes))


def _check_rank(X: np.ndarray, columns: Sequence[str]) -> None:
    if np.linalg.matrix_rank(X) == X.shape[1]:
        return
    kept, collinear = [], []
    for j, name in enumerate(columns):
        if np.linalg.matrix_rank(X[:, kept + [j]]) == len(kept) + 1:
            kept.append(j)
        else:
            collinear.append(name)
    raise RankDeficiencyError(collinear)


def fit_logit(records: Sequence[SurveyRecord]) -> LogitFit:
    """
    Maximum-likelihood fit of mf ~ parity * species.

    Damped Newton ascent: each step solves (X'WX) d = X'(y - p) and is
    halved until the log-likelihood does not decrease.

    Args:
        records: Survey records with both outcomes present.

    Returns:
        LogitFit.
    """
    if not records:
        raise ValidationError("fit_logit needs at least one record.")
    y = np.array([float(r.mf_case) for r in records])
    if y.min() == y.max():
        raise SeparationError("all records", int(y[0]), len(y))

    design = FactorDesign.from_records(records)
    X = design.matrix(_cells_of(records))
    _check_rank(X, design.columns)
    _check_separation(records, design, y)

    beta = np.zeros(X.shape[1])
    ll = log_likelihood(beta, X, y)
    grad = score(beta, X, y)
    path = [ll]
    iteration = 0
    while np.linalg.norm(grad) > GRAD_TOL:
        if iteration >= MAX_ITER:
            raise ConvergenceError(
                f"Newton ascent did not converge in {MAX_ITER} iterations "
                f"(gradient norm {np.linalg.norm(grad):.3g})."
            )
        iteration += 1
        step = linalg.solve(information(beta, X), grad, assume_a="pos")
        # rounding noise in ll near the optimum must not trigger halving
        floor = ll - LL_REL_TOL * max(abs(ll), 1.0)
        t = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = beta + t * step
            ll_new = log_likelihood(candidate, X, y)
            if ll_new >= floor:
                break
            t *= 0.5
        else:
            raise ConvergenceError("Step halving failed to increase the log-likelihood.")

        beta, ll = candidate, ll_new
        grad = score(beta, X, y)
        path.append(ll)
        logger.debug("iter %d: ll=%.12f step=%.3g |grad|=%.3g", iteration, ll, t, np.linalg.norm(grad))

    cov = linalg.inv(information(beta, X))
    cov = 0.5 * (cov + cov.T)
    return LogitFit(
        design=design,
        coef=beta,
        cov=cov,
        log_likelihood=ll,
        iterations=iteration,
        gradient_norm=float(np.linalg.norm(grad)),
        n_obs=len(records),
        ll_path=tuple(path),
    )


@dataclass(frozen=True)
class MarginEstimate:
    """
    Predictive margin of one level.

    ``z`` and ``p_value`` are NaN when the standard error is 0.
    """
    level: str
    margin: float
    std_err: float
    z: float
    p_value: float

    @property
    def stars(self) -> str:
        if np.isnan(self.p_value):
            return ""
        if self.p_value < 0.01:
            return "***"
        if self.p_value < 0.05:
            return "**"
        if self.p_value < 0.10:
            return "*"
        return ""


def _margin(fit: LogitFit, cells: Sequence[Cell], label: str) -> MarginEstimate:
    X = fit.design.matrix(cells)
    p = expit(X @ fit.coef)
    margin = float(p.mean())
    gradient = X.T @ (p * (1.0 - p)) / len(cells)
    std_err = float(np.sqrt(max(gradient @ fit.cov @ gradient, 0.0)))
    if std_err > 0:
        z = margin / std_err
        p_value = float(2.0 * norm.sf(abs(z)))
    else:
        z = p_value = float("nan")
    return MarginEstimate(label, margin, std_err, z, p_value)


def predictive_margins(fit: LogitFit, records: Sequence[SurveyRecord], factor: str = "parity",
                       levels: Optional[Sequence] = None) -> List[MarginEstimate]:
    """
    Average adjusted predictions.

    For each level the factor is set to that level for every record, the
    other covariate stays as observed, and the predicted probabilities are
    averaged. Standard errors come from the delta method on ``fit.cov``.

    Args:
        fit: Converged LogitFit.
        records: Records to average over (usually the estimation sample).
        factor: "parity", "species" or "cell".
        levels: Levels to report; defaults to every level in ``records``.
    """
    if factor not in FACTORS:
        raise ValidationError(f"Unknown factor '{factor}'. Use one of {', '.join(FACTORS)}.")
    if not records:
        raise ValidationError("predictive_margins needs at least one record.")
    observed = _cells_of(records)

    if factor == "parity":
        present = sorted({p for p, _ in observed})
        wanted = present if levels is None else [int(v) for v in levels]
        make = lambda lvl: [(lvl, s) for _, s in observed]
        name = str
    elif factor == "species":
        present = [s for s in SPECIES_ORDER if any(c[1] == s for c in observed)]
        wanted = present if levels is None else [Species(v) for v in levels]
        make = lambda lvl: [(p, lvl) for p, _ in observed]
        name = lambda lvl: lvl.value
    else:
        present = list(fit.design.cells)
        present = [c for c in present if c in set(observed)]
        wanted = present if levels is None else [(int(p), Species(s)) for p, s in levels]
        make = lambda lvl: [lvl]
        name = _cell_name

    for lvl in wanted:
        if lvl not in present:
            raise ValidationError(f"Level {name(lvl)!r} of factor '{factor}' is absent from the data.")
    return [_margin(fit, make(lvl), name(lvl)) for lvl in wanted]
