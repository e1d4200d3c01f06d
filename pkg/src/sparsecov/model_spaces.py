"""Sparsity classes over covariance matrices and the least-favorable family.

Two kinds of parameter space appear here.  The first are the weak and strong
lq balls applied column-wise to a covariance matrix with its diagonal removed:
``weak`` requires the k-th largest off-diagonal magnitude in every column to
decay like ``(radius / k)^(1/q)``; ``strong`` bounds the column sum of
``|entry|^q`` directly (count of nonzeros when q = 0).

The second is a finite two-point-mixing family used by the lower-bound lab.
A member is indexed by ``theta = (gamma, rows)``: ``gamma`` holds r on/off
bits, ``rows[m]`` is a set of k column indices inside the last r columns, and

    Sigma(theta) = I_p + epsilon * sum_m gamma[m] * A_m(rows[m])

where ``A_m`` has ones of size epsilon along row m / column m at the selected
columns.  The constraint that every column index is used by at most 2k of the
r row patterns keeps the matrices diagonally dominated and the family inside
the sparsity class.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetError, ConfigError, StructureError
from .matrices import as_symmetric
from .rng import RngSeed

_RTOL = 1e-12


@dataclass(frozen=True)
class SparsityClassSpec:
    """Column-wise lq ball over off-diagonal entries."""

    q: float
    radius: float
    kind: str = "weak"

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise ConfigError(f"q must lie in [0, 1), got {self.q}")
        if not self.radius > 0.0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        if self.kind not in ("weak", "strong"):
            raise ConfigError(f"kind must be 'weak' or 'strong', got {self.kind!r}")


def weak_lq_radius(v, q: float) -> float:
    """Smallest radius c such that the vector lies in the weak lq ball.

    For q > 0 this is ``max_k k * |v|_(k)^q`` over the descending order
    statistics; for q = 0 it is the number of nonzero entries.
    """
    vec = np.asarray(v, dtype=float).ravel()
    if not 0.0 <= q < 1.0:
        raise ConfigError(f"q must lie in [0, 1), got {q}")
    if vec.size == 0:
        return 0.0
    if q == 0.0:
        return float(np.count_nonzero(vec))
    mags = np.sort(np.abs(vec))[::-1]
    ks = np.arange(1, mags.size + 1, dtype=float)
    return float(np.max(ks * mags**q))


def class_membership(sigma, spec: SparsityClassSpec):
    """Test column-wise membership of a covariance matrix in a sparsity class.

    Returns ``(ok, witness)`` where ``witness`` is the index of the first
    violating column, or None.  Comparisons allow 1e-12 relative slack so
    boundary members constructed in floating point are not rejected.
    """
    mat = as_symmetric(sigma)
    p = mat.shape[0]
    if p < 2:
        raise ConfigError("class membership needs dimension >= 2")
    allowed = spec.radius * (1.0 + _RTOL)
    for j in range(p):
        col = np.delete(mat[:, j], j)
        if spec.kind == "weak":
            value = weak_lq_radius(col, spec.q)
        elif spec.q == 0.0:
            value = float(np.count_nonzero(col))
        else:
            value = float(np.sum(np.abs(col) ** spec.q))
        if value > allowed:
            return False, j
    return True, None


@dataclass(frozen=True)
class LeastFavorableConfig:
    """Shape parameters of the finite least-favorable family.

    ``build_config`` is the validated constructor and keeps the derived
    fields (r, k, epsilon) consistent with (p, n, q, c, upsilon).
    """

    p: int
    n: int
    q: float
    c: float
    upsilon: float
    r: int
    k: int
    epsilon: float

    @property
    def support_columns(self) -> range:
        """Zero-based column indices available to the row patterns."""
        return range(self.p - self.r, self.p)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "q": self.q,
            "c": self.c,
            "upsilon": self.upsilon,
            "r": self.r,
            "k": self.k,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LeastFavorableConfig":
        return cls(
            p=int(obj["p"]),
            n=int(obj["n"]),
            q=float(obj["q"]),
            c=float(obj["c"]),
            upsilon=float(obj["upsilon"]),
            r=int(obj["r"]),
            k=int(obj["k"]),
            epsilon=float(obj["epsilon"]),
        )


DEFAULT_UPSILON = 0.1


def build_config(
    p: int, n: int, q: float, c: float, upsilon: float = DEFAULT_UPSILON
) -> LeastFavorableConfig:
    """Derive (r, k, epsilon) from the primitive parameters and validate.

    ``r = floor(p / 2)``, ``epsilon = upsilon * sqrt(log(p) / n)`` with the
    natural log, and ``k = max(ceil(c * epsilon^-q / 2) - 1, 0)``.

    Raises
    ------
    ConfigError
        If ``2 k epsilon >= 1/3`` (perturbation too large for the family to
        stay well conditioned) or ``k > r`` (no row pattern of size k fits in
        the available columns).
    """
    if p < 2:
        raise ConfigError(f"p must be at least 2, got {p}")
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    if not 0.0 <= q < 1.0:
        raise ConfigError(f"q must lie in [0, 1), got {q}")
    if not c > 0.0:
        raise ConfigError(f"c must be positive, got {c}")
    if not upsilon > 0.0:
        raise ConfigError(f"upsilon must be positive, got {upsilon}")
    r = p // 2
    epsilon = upsilon * math.sqrt(math.log(p) / n)
    k = max(math.ceil(c * epsilon ** (-q) / 2.0) - 1, 0)
    if 2.0 * k * epsilon >= 1.0 / 3.0:
        raise ConfigError(
            f"2*k*epsilon = {2.0 * k * epsilon:.6g} >= 1/3; "
            "shrink c or upsilon, or raise n"
        )
    if k > r:
        raise ConfigError(f"k = {k} exceeds r = {r}; the family would be empty")
    return LeastFavorableConfig(
        p=p, n=n, q=q, c=c, upsilon=upsilon, r=r, k=k, epsilon=epsilon
    )


def radius_condition_holds(cfg: LeastFavorableConfig, big_m: float) -> bool:
    """Whether c <= M * n^((1-q)/2) * (log p)^(-(3-q)/2) for a caller-chosen M.

    Recorded as information only; nothing in the package enforces it.
    """
    bound = (
        big_m
        * cfg.n ** ((1.0 - cfg.q) / 2.0)
        * math.log(cfg.p) ** (-(3.0 - cfg.q) / 2.0)
    )
    return cfg.c <= bound


def upsilon_report(
    cfg: LeastFavorableConfig,
    big_m: float | None = None,
    tau: float | None = None,
    beta: float | None = None,
) -> dict:
    """Diagnostic report on the smallness conditions for upsilon.

    The two conditions, ``upsilon^(1-q) < min(1/3, tau - 1) / M`` and
    ``upsilon^2 < (beta - 1) / (54 beta)``, are checked when the caller
    supplies the constants; entries are None when they cannot be evaluated.
    """
    report: dict = {"upsilon": cfg.upsilon}
    if big_m is not None and tau is not None:
        lim = min(1.0 / 3.0, tau - 1.0) / big_m
        report["upsilon_pow_1_minus_q"] = cfg.upsilon ** (1.0 - cfg.q)
        report["upsilon_pow_limit"] = lim
        report["upsilon_pow_ok"] = cfg.upsilon ** (1.0 - cfg.q) < lim
    else:
        report["upsilon_pow_ok"] = None
    if beta is not None:
        lim = (beta - 1.0) / (54.0 * beta)
        report["upsilon_sq"] = cfg.upsilon**2
        report["upsilon_sq_limit"] = lim
        report["upsilon_sq_ok"] = cfg.upsilon**2 < lim
    else:
        report["upsilon_sq_ok"] = None
    if big_m is not None:
        report["radius_condition_ok"] = radius_condition_holds(cfg, big_m)
    else:
        report["radius_condition_ok"] = None
    return report


@dataclass(frozen=True)
class ThetaIndex:
    """Index of one family member: on/off bits plus one column set per row.

    ``rows[m]`` is a sorted tuple of k zero-based column indices (empty when
    k = 0).  All r row patterns are present regardless of the gamma bits; a
    zero bit simply leaves its pattern unused by ``materialize_sigma``.
    """

    gamma: tuple[int, ...]
    rows: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        return {"gamma": list(self.gamma), "lambda": [list(row) for row in self.rows]}

    @classmethod
    def from_json(cls, obj: dict) -> "ThetaIndex":
        return cls(
            gamma=tuple(int(g) for g in obj["gamma"]),
            rows=tuple(tuple(int(j) for j in row) for row in obj["lambda"]),
        )


def validate_theta(cfg: LeastFavorableConfig, theta: ThetaIndex) -> None:
    """Raise StructureError naming the first violated constraint."""
    if len(theta.gamma) != cfg.r:
        raise StructureError(
            f"gamma has length {len(theta.gamma)}, expected r = {cfg.r}"
        )
    if any(g not in (0, 1) for g in theta.gamma):
        raise StructureError("gamma entries must be 0 or 1")
    if len(theta.rows) != cfg.r:
        raise StructureError(f"expected {cfg.r} row patterns, got {len(theta.rows)}")
    support = cfg.support_columns
    counts: dict[int, int] = {}
    for m, row in enumerate(theta.rows):
        if len(row) != cfg.k:
            raise StructureError(
                f"row pattern {m} has {len(row)} indices, expected k = {cfg.k}"
            )
        if len(set(row)) != len(row):
            raise StructureError(f"row pattern {m} repeats a column index")
        if tuple(sorted(row)) != tuple(row):
            raise StructureError(f"row pattern {m} is not sorted")
        for j in row:
            if j not in support:
                raise StructureError(
                    f"row pattern {m} uses column {j} outside "
                    f"[{support.start}, {support.stop})"
                )
            counts[j] = counts.get(j, 0) + 1
    cap = 2 * cfg.k
    for j, used in counts.items():
        if used > cap:
            raise StructureError(
                f"column {j} appears in {used} row patterns, cap is 2k = {cap}"
            )


def materialize_sigma(cfg: LeastFavorableConfig, theta: ThetaIndex) -> np.ndarray:
    """Assemble Sigma(theta) = I + epsilon * sum of active row/column bumps."""
    validate_theta(cfg, theta)
    sigma = np.eye(cfg.p)
    for m, (bit, row) in enumerate(zip(theta.gamma, theta.rows)):
        if not bit:
            continue
        for j in row:
            sigma[m, j] += cfg.epsilon
            sigma[j, m] += cfg.epsilon
    return sigma


def _count_lambda(r: int, k: int) -> int:
    """Exact number of r-tuples of k-subsets with every column used <= 2k times.

    Dynamic program over rows on the usage profile (how many columns are
    currently used u times, u = 0..2k); columns are exchangeable so only the
    profile matters.
    """
    if k == 0:
        return 1
    cap = 2 * k

    @lru_cache(maxsize=None)
    def ways(rows_left: int, profile: tuple[int, ...]) -> int:
        if rows_left == 0:
            return 1
        total = 0
        # Distribute the k picks of the next row over usage classes < cap.
        # Availability per class is fixed at the row's start; the shifted
        # profile applies only from the next row on, so one row cannot pick
        # the same column twice.
        def distribute(u: int, remaining: int, mult: int, takes: tuple[int, ...]):
            nonlocal total
            if remaining == 0:
                new = list(profile)
                for uu, t in enumerate(takes):
                    new[uu] -= t
                    new[uu + 1] += t
                total += mult * ways(rows_left - 1, tuple(new))
                return
            if u >= cap:
                return
            avail = profile[u]
            for take in range(min(avail, remaining) + 1):
                distribute(
                    u + 1,
                    remaining - take,
                    mult * math.comb(avail, take),
                    takes + (take,),
                )

        distribute(0, k, 1, ())
        return total

    start = (r,) + (0,) * cap
    return ways(r, start)


def count_theta(cfg: LeastFavorableConfig) -> int:
    """Exact cardinality of the family: 2^r times the number of valid tuples."""
    return 2**cfg.r * _count_lambda(cfg.r, cfg.k)


def _iter_lambda(cfg: LeastFavorableConfig):
    """Yield valid row-pattern tuples in lexicographic order (pruned DFS)."""
    patterns = list(itertools.combinations(cfg.support_columns, cfg.k))
    cap = 2 * cfg.k
    counts = {j: 0 for j in cfg.support_columns}
    chosen: list[tuple[int, ...]] = []

    def rec(m: int):
        if m == cfg.r:
            yield tuple(chosen)
            return
        for pat in patterns:
            if any(counts[j] >= cap for j in pat):
                continue
            for j in pat:
                counts[j] += 1
            chosen.append(pat)
            yield from rec(m + 1)
            chosen.pop()
            for j in pat:
                counts[j] -= 1

    yield from rec(0)


DEFAULT_ENUMERATION_BUDGET = 10**6


def enumerate_theta(
    cfg: LeastFavorableConfig, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> list[ThetaIndex]:
    """All family indices in lexicographic (gamma, rows) order.

    Raises
    ------
    BudgetError
        If the exact count exceeds ``budget``; the error carries the count.
    """
    total = count_theta(cfg)
    if total > budget:
        raise BudgetError(
            f"family has {total} members, budget is {budget}", count=total
        )
    lambdas = list(_iter_lambda(cfg))
    out = [
        ThetaIndex(gamma=gamma, rows=rows)
        for gamma in itertools.product((0, 1), repeat=cfg.r)
        for rows in lambdas
    ]
    return out


def sample_theta(
    cfg: LeastFavorableConfig, seed: RngSeed, max_tries: int = 1_000_000
) -> ThetaIndex:
    """Uniform draw from the family by rejection on the column-usage cap.

    Row patterns are drawn independently and uniformly; any tuple violating
    the cap is discarded wholesale, which leaves the accepted draw exactly
    uniform.  Deterministic for a fixed seed.
    """
    rng = seed.generator()
    gamma = tuple(int(b) for b in rng.integers(0, 2, size=cfg.r))
    support = np.fromiter(cfg.support_columns, dtype=int)
    cap = 2 * cfg.k
    if cfg.k == 0:
        return ThetaIndex(gamma=gamma, rows=((),) * cfg.r)
    for _ in range(max_tries):
        rows = tuple(
            tuple(sorted(int(j) for j in rng.choice(support, size=cfg.k, replace=False)))
            for _ in range(cfg.r)
        )
        counts: dict[int, int] = {}
        for row in rows:
            for j in row:
                counts[j] = counts.get(j, 0) + 1
        if all(used <= cap for used in counts.values()):
            return ThetaIndex(gamma=gamma, rows=rows)
    raise ConfigError(
        f"rejection sampling failed after {max_tries} tries; "
        "the column cap leaves too few valid tuples"
    )
