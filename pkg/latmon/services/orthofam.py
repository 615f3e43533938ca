"""
Randomized checks of the collective L^p bound for families orthonormal in
m^2 (u, v) + (grad u, grad v) on the torus [0, 2 pi]^2, of the interpolation
inequality it implies for a single function, and of the alpha-model form.

Fields are trigonometric polynomials without a constant term, stored by
their Fourier coefficients phi(x) = sum_k a_k e^{i k.x}; all H^1 quantities
are exact in coefficient space and only L^p norms touch a grid.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

from latmon.core.config import settings
from latmon.core.exceptions import AccuracyError, AliasingError, DomainError, RankDeficiencyError
from latmon.core.logging import logger
from latmon.schemas.bounds import ConstantsRegistry
from latmon.schemas.orthofam import AlphaCheck, FuzzSummary, GagnirCheck, LiebThirringCheck
from latmon.services.bounds import alpha_rho_l2_bound, gagnir_constant

FOUR_PI_SQ = 4.0 * math.pi**2
GRAM_TOL = 1e-10
CHECK_SLACK = 1e-12
ALPHA_CONSISTENCY_TOL = 1e-12
LP_DOUBLING_TOL = 1e-8
MAX_GRID = 3000
MAX_DRAWS = 5
ADDITIVE_M_FACTORS = (0.5, 0.75, 1.0, 1.5, 2.0)
# Norm left after projection, relative to the drawn vector, below which a draw is rejected
_DEGENERACY = 1e-8


@dataclass(frozen=True, eq=False)
class FourierField:
    """Zero-mean trigonometric polynomial on [0, 2 pi]^2."""

    wavevectors: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    real_valued: bool = True

    def __post_init__(self):
        k = np.asarray(self.wavevectors, dtype=np.int64).reshape(-1, 2)
        a = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if k.shape[0] != a.shape[0]:
            raise DomainError("one coefficient per wavevector", {"modes": k.shape[0], "coeffs": a.shape[0]})
        if k.shape[0] == 0:
            raise DomainError("a field needs at least one mode")
        if np.any(np.all(k == 0, axis=1)):
            raise DomainError("fields have zero mean: the k = 0 mode is not allowed")
        index = {tuple(row): i for i, row in enumerate(k.tolist())}
        if len(index) != k.shape[0]:
            raise DomainError("duplicate wavevectors")
        if self.real_valued:
            scale = float(np.max(np.abs(a))) if a.size else 0.0
            for i, (k1, k2) in enumerate(k.tolist()):
                j = index.get((-k1, -k2))
                if j is None or abs(a[j] - np.conj(a[i])) > 1e-12 * max(scale, 1e-300):
                    raise DomainError("real fields need a_{-k} = conj(a_k)", {"k": [k1, k2]})
        k.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "wavevectors", k)
        object.__setattr__(self, "coeffs", a)

    @property
    def k_max(self) -> int:
        """Largest |k_i| over the modes; sets the aliasing threshold of a grid."""
        return int(np.abs(self.wavevectors).max())

    @property
    def l2_norm_sq(self) -> float:
        return FOUR_PI_SQ * float(np.sum(np.abs(self.coeffs) ** 2))

    @property
    def grad_norm_sq(self) -> float:
        k_sq = np.sum(self.wavevectors.astype(float) ** 2, axis=1)
        return FOUR_PI_SQ * float(np.sum(k_sq * np.abs(self.coeffs) ** 2))

    def synthesize(self, grid_n: int) -> np.ndarray:
        """Values at x = 2 pi (j1, j2) / grid_n."""
        if grid_n <= 2 * self.k_max:
            raise AliasingError("grid folds distinct modes together", {"grid_n": grid_n, "k_max": self.k_max})
        spectrum = np.zeros((grid_n, grid_n), dtype=np.complex128)
        np.add.at(spectrum, (self.wavevectors[:, 0] % grid_n, self.wavevectors[:, 1] % grid_n), self.coeffs)
        values = grid_n * grid_n * fft.ifft2(spectrum)
        return values.real if self.real_valued else values

    def scaled(self, factor: float) -> "FourierField":
        return FourierField(self.wavevectors, factor * self.coeffs, self.real_valued)


@dataclass(frozen=True, eq=False)
class OrthoFamily:
    """
    Fields orthonormal in the shifted H^1 product, or in (u, v) + alpha (grad u, grad v)
    when ``alpha`` is set (then m = alpha^{-1/2} for reference).
    """

    m: float
    fields: Tuple[FourierField, ...]
    gram_residual: float
    alpha: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.fields)

    @property
    def k_max(self) -> int:
        return max(f.k_max for f in self.fields)


# ---- mode sets and draws -----------------------------------------------------


def available_modes(k_max: int) -> np.ndarray:
    """All k != 0 with |k| <= k_max, ordered by |k|^2 then lexicographically."""
    if k_max < 1:
        raise DomainError("k_max must be at least 1", {"k_max": k_max})
    r = np.arange(-k_max, k_max + 1)
    k1, k2 = np.meshgrid(r, r, indexing="ij")
    k = np.stack([k1.ravel(), k2.ravel()], axis=1)
    norm_sq = np.sum(k * k, axis=1)
    keep = (norm_sq > 0) & (norm_sq <= k_max * k_max)
    k, norm_sq = k[keep], norm_sq[keep]
    order = np.lexsort((k[:, 1], k[:, 0], norm_sq))
    return k[order]


def _half_plane(modes: np.ndarray) -> np.ndarray:
    """One representative of each pair {k, -k}."""
    mask = (modes[:, 0] > 0) | ((modes[:, 0] == 0) & (modes[:, 1] > 0))
    return modes[mask]


def _draw(rng: np.random.Generator, rows: int, modes: np.ndarray, complex_valued: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Standard complex normal coefficients; real layouts are [H, -H] with conjugate pairs."""
    if complex_valued:
        c = rng.standard_normal((rows, len(modes))) + 1j * rng.standard_normal((rows, len(modes)))
        return modes, c
    half = _half_plane(modes)
    c = rng.standard_normal((rows, len(half))) + 1j * rng.standard_normal((rows, len(half)))
    return np.concatenate([half, -half]), np.concatenate([c, np.conj(c)], axis=1)


def _shifted_weights(k: np.ndarray, m: float) -> np.ndarray:
    return FOUR_PI_SQ * (m * m + np.sum(k.astype(float) ** 2, axis=1))


def _alpha_weights(k: np.ndarray, alpha: float) -> np.ndarray:
    return FOUR_PI_SQ * (1.0 + alpha * np.sum(k.astype(float) ** 2, axis=1))


class _Degenerate(Exception):
    pass


def _gram_schmidt(coeffs: np.ndarray, weights: np.ndarray, real: bool) -> np.ndarray:
    """Classical Gram-Schmidt with one reorthogonalization pass in the weighted l^2 product."""

    def inner(u: np.ndarray, v: np.ndarray) -> complex:
        value = np.sum(weights * u * np.conj(v))
        return value.real if real else value

    basis: List[np.ndarray] = []
    for v in coeffs:
        u = v.copy()
        for _ in range(2):
            for b in basis:
                u = u - inner(u, b) * b
        norm = math.sqrt(max(np.real(inner(u, u)), 0.0))
        if norm <= _DEGENERACY * math.sqrt(np.real(inner(v, v))):
            raise _Degenerate
        basis.append(u / norm)
    return np.array(basis)


def _gram_residual(basis: np.ndarray, weights: np.ndarray) -> float:
    gram = (basis * weights) @ np.conj(basis).T
    return float(np.max(np.abs(gram - np.eye(len(basis)))))


def _build_family(
    modes: np.ndarray,
    coeffs: np.ndarray,
    weights: np.ndarray,
    real: bool,
    m: float,
    alpha: Optional[float],
) -> OrthoFamily:
    basis = _gram_schmidt(coeffs, weights, real)
    residual = _gram_residual(basis, weights)
    if residual > GRAM_TOL:
        raise RankDeficiencyError("Gram matrix is not the identity", {"gram_residual": residual})
    fields = tuple(FourierField(modes, row, real) for row in basis)
    return OrthoFamily(m=m, fields=fields, gram_residual=residual, alpha=alpha)


def _random_family(
    n: int,
    k_max: int,
    seed: int,
    complex_valued: bool,
    weight_fn: Callable[[np.ndarray], np.ndarray],
    m: float,
    alpha: Optional[float],
) -> OrthoFamily:
    modes = available_modes(k_max)
    if n < 1 or n > len(modes):
        raise DomainError(
            "n must be between 1 and the number of available modes",
            {"n": n, "available": len(modes), "k_max": k_max},
        )
    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_DRAWS + 1):
        layout, coeffs = _draw(rng, n, modes, complex_valued)
        try:
            return _build_family(layout, coeffs, weight_fn(layout), not complex_valued, m, alpha)
        except _Degenerate:
            logger.warning("Gram-Schmidt met a near-dependent draw (seed %d, attempt %d)", seed, attempt)
    raise RankDeficiencyError("no independent draw after retries", {"seed": seed, "draws": MAX_DRAWS})


def random_ortho_family(
    n: int,
    m: float,
    k_max: int,
    seed: int,
    complex_valued: bool = False,
) -> OrthoFamily:
    """
    n fields orthonormal in m^2 (u, v) + (grad u, grad v), from Gaussian coefficients.

    Args:
        n: family size, at most the number of modes 0 < |k| <= k_max
        m: shift of the inner product
        k_max: radius of the mode ball
        seed: generator seed; equal seeds give bit-identical families
        complex_valued: draw complex fields instead of conjugate-symmetric ones

    Raises:
        DomainError: n outside the available range or m <= 0
        RankDeficiencyError: every retry produced a dependent draw
    """
    if not m > 0:
        raise DomainError("m must be positive", {"m": m})
    return _random_family(n, k_max, seed, complex_valued, lambda k: _shifted_weights(k, m), m, None)


def alpha_ortho_family(
    n: int,
    alpha: float,
    k_max: int,
    seed: int,
    complex_valued: bool = False,
) -> OrthoFamily:
    """Same draws as random_ortho_family, orthonormal in (u, v) + alpha (grad u, grad v)."""
    if not alpha > 0:
        raise DomainError("alpha must be positive", {"alpha": alpha})
    return _random_family(
        n, k_max, seed, complex_valued, lambda k: _alpha_weights(k, alpha), 1.0 / math.sqrt(alpha), alpha
    )


def orthonormalize(fields: Sequence[FourierField], m: float) -> OrthoFamily:
    """Gram-Schmidt of given fields over the union of their modes."""
    if not fields:
        raise DomainError("orthonormalize needs at least one field")
    if not m > 0:
        raise DomainError("m must be positive", {"m": m})
    real = all(f.real_valued for f in fields)
    index: Dict[Tuple[int, int], int] = {}
    for f in fields:
        for k in f.wavevectors.tolist():
            index.setdefault(tuple(k), len(index))
    modes = np.array(list(index.keys()), dtype=np.int64)
    coeffs = np.zeros((len(fields), len(modes)), dtype=np.complex128)
    for row, f in enumerate(fields):
        cols = [index[tuple(k)] for k in f.wavevectors.tolist()]
        coeffs[row, cols] = f.coeffs
    try:
        return _build_family(modes, coeffs, _shifted_weights(modes, m), real, m, None)
    except _Degenerate:
        raise RankDeficiencyError("fields are linearly dependent", {"n": len(fields)})


def random_field(
    k_max: int,
    rng: np.random.Generator,
    complex_valued: bool = False,
    spectral_slope: float = 0.0,
    n_modes: Optional[int] = None,
) -> FourierField:
    """
    Gaussian field with coefficients damped by |k|^{-spectral_slope}.

    ``n_modes`` picks that many independent modes at random (a mode and its
    mirror count once for real fields); all modes are active when omitted.
    """
    modes = available_modes(k_max)
    pool = modes if complex_valued else _half_plane(modes)
    if n_modes is not None:
        if not 1 <= n_modes <= len(pool):
            raise DomainError("n_modes outside the available range", {"n_modes": n_modes, "available": len(pool)})
        pool = pool[np.sort(rng.choice(len(pool), size=n_modes, replace=False))]
    c = rng.standard_normal(len(pool)) + 1j * rng.standard_normal(len(pool))
    c *= np.sum(pool.astype(float) ** 2, axis=1) ** (-0.5 * spectral_slope)
    if complex_valued:
        return FourierField(pool, c, real_valued=False)
    return FourierField(np.concatenate([pool, -pool]), np.concatenate([c, np.conj(c)]), real_valued=True)


# ---- grid norms ----------------------------------------------------------------


def _grid_lp(
    base: Callable[[int], np.ndarray],
    p: float,
    exact_above: Optional[int],
    grid_n: Optional[int],
    start: int,
    order: float,
    label: str,
) -> float:
    """
    (int base^p)^{1/p} over the torus by the rectangle rule.

    With ``exact_above`` set, base^p is a trigonometric polynomial of degree
    exact_above - 1 and one grid larger than that is exact. Otherwise base^p is
    only finitely smooth on the zero set of base and the rule converges like
    h^order. The grid is doubled, each pair of levels is Richardson-extrapolated,
    and |T(2n) - T(n)| / (2^order - 1) is the error estimate held against
    LP_DOUBLING_TOL.
    """

    def integral(n: int) -> float:
        return float(np.sum(base(n) ** p)) * (2.0 * math.pi / n) ** 2

    if exact_above is not None:
        n = grid_n if grid_n is not None else exact_above + 1
        if n <= exact_above:
            raise AliasingError(
                f"{label}: grid too coarse for exact quadrature",
                {"grid_n": n, "required_above": exact_above},
            )
        return integral(n) ** (1.0 / p)

    gain = 2.0**order - 1.0
    n = grid_n if grid_n is not None else start
    previous = integral(n)
    estimate = math.inf
    while 2 * n <= MAX_GRID:
        n *= 2
        current = integral(n)
        extrapolated = current + (current - previous) / gain
        estimate = abs(current - previous) / gain
        # relative error of the p-th root is 1/p of that of the integral
        if estimate <= p * LP_DOUBLING_TOL * max(abs(extrapolated), 1e-300):
            logger.debug("%s converged on a %d grid", label, n)
            return extrapolated ** (1.0 / p)
        previous = current
    raise AccuracyError(
        f"{label}: grid doubling did not converge",
        {"p": p, "grid_n": n, "relative_estimate": estimate / max(abs(previous), 1e-300)},
    )


def _resample(values: np.ndarray, band: int, grid_n: int) -> np.ndarray:
    """
    Values on a grid_n grid of a real trigonometric polynomial of degree <= band,
    given its samples on a grid finer than 2 band. Exact for any grid_n: modes
    that a coarse target cannot separate fold together as sampling folds them.
    """
    coarse = values.shape[0]
    if grid_n == coarse:
        return values
    r = np.arange(-band, band + 1)
    coeffs = fft.fft2(values)[np.ix_(r % coarse, r % coarse)] / coarse**2
    i, j = np.meshgrid(r % grid_n, r % grid_n, indexing="ij")
    spectrum = np.zeros((grid_n, grid_n), dtype=np.complex128)
    np.add.at(spectrum, (i, j), coeffs)
    return (grid_n * grid_n * fft.ifft2(spectrum)).real


def _is_integer(x: float) -> bool:
    return float(x).is_integer()


def rho_lp_norm(fam: OrthoFamily, p: float, grid_n: Optional[int] = None) -> float:
    """
    ||rho||_{L^p(T^2)} with rho = sum_j |phi_j|^2.

    rho is a trigonometric polynomial of degree 2 k_max: it is synthesized once
    on a 4 k_max + 2 grid and moved onto finer grids with one FFT each, whatever
    the family size. For integer p the grid must exceed 2 p k_max + 1 points per
    side, where the rule is exact; other p converge by grid doubling.

    Raises:
        AliasingError: integer p and grid_n too small
        AccuracyError: doubling did not settle below the maximum grid
    """
    if not p >= 1 or not math.isfinite(p):
        raise DomainError("rho_lp_norm needs finite p >= 1", {"p": p})

    k = fam.k_max
    coarse = sum(np.abs(f.synthesize(4 * k + 2)) ** 2 for f in fam.fields)

    def rho(n: int) -> np.ndarray:
        return np.maximum(_resample(coarse, 2 * k, n), 0.0)

    exact_above = int(2 * p * k + 1) if _is_integer(p) else None
    # rho vanishes quadratically, along curves at worst (one real field)
    return _grid_lp(rho, p, exact_above, grid_n, 4 * k + 4, 2.0 * p + 1.0, "rho_lp_norm")


def field_lq_norm(field: FourierField, q: float, grid_n: Optional[int] = None) -> float:
    """||phi||_{L^q(T^2)}; exact grids for even integer q (degree q k_max)."""
    if not q >= 1 or not math.isfinite(q):
        raise DomainError("field_lq_norm needs finite q >= 1", {"q": q})
    k = field.k_max
    exact_above = int(q * k) if _is_integer(q) and int(q) % 2 == 0 else None
    return _grid_lp(
        lambda n: np.abs(field.synthesize(n)), q, exact_above, grid_n, 4 * k + 4, q + 1.0, "field_lq_norm"
    )


# ---- checks -------------------------------------------------------------------


def check_liebd2(fam: OrthoFamily, p: float) -> LiebThirringCheck:
    """||rho||_p <= b_p m^{-2/p} n^{1/p}."""
    lhs = rho_lp_norm(fam, p)
    rhs = ConstantsRegistry.b_p(p) * fam.m ** (-2.0 / p) * fam.n ** (1.0 / p)
    return LiebThirringCheck(p=p, n=fam.n, m=fam.m, lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1.0 + CHECK_SLACK))


def check_gagnir(field: FourierField, q: float) -> GagnirCheck:
    """
    ||phi||_q <= C_q ||phi||^{2/q} ||grad phi||^{1-2/q}, plus its additive form

        ||phi||_q^2 <= b_p m^{-2/p} (m^2 ||phi||^2 + ||grad phi||^2),  q = 2p,

    at m spread around the minimizer m*^2 = ||grad phi||^2 / ((p-1) ||phi||^2).
    """
    bound = gagnir_constant(q, "torus")
    f_sq, g_sq = field.l2_norm_sq, field.grad_norm_sq
    if not f_sq > 0:
        raise DomainError("check_gagnir needs a nonzero field")
    lq = field_lq_norm(field, q)
    denominator = math.sqrt(f_sq) ** (2.0 / q) * math.sqrt(g_sq) ** (1.0 - 2.0 / q)
    ratio = lq / denominator
    holds = ratio <= bound * (1.0 + CHECK_SLACK)

    if q == 2:
        return GagnirCheck(q=q, ratio=ratio, bound=bound, holds=holds, additive_holds=True)

    p = 0.5 * q
    b_p = ConstantsRegistry.b_p(p)
    m_star = math.sqrt(g_sq / ((p - 1.0) * f_sq))
    additive = [b_p * m ** (-2.0 / p) * (m * m * f_sq + g_sq) for m in (c * m_star for c in ADDITIVE_M_FACTORS)]
    multiplicative = bound**2 * denominator**2
    return GagnirCheck(
        q=q,
        ratio=ratio,
        bound=bound,
        holds=holds,
        additive_holds=all(lq * lq <= a * (1.0 + CHECK_SLACK) for a in additive),
        additive_gap=min(additive) / multiplicative - 1.0,
    )


def check_alpha_consistency(n: int, alpha: float, seed: int, k_max: int = 8, complex_valued: bool = False) -> AlphaCheck:
    """
    ||rho||_2 for an alpha-orthonormal family against its bound, cross-checked with
    the shifted-H^1 family at m^2 = 1/alpha drawn from the same seed (rho_alpha = rho_m / alpha).
    """
    fam_alpha = alpha_ortho_family(n, alpha, k_max, seed, complex_valued)
    fam_m = random_ortho_family(n, 1.0 / math.sqrt(alpha), k_max, seed, complex_valued)

    lhs = rho_lp_norm(fam_alpha, 2)
    rhs = alpha_rho_l2_bound(n, alpha, 2)
    shifted = check_liebd2(fam_m, 2)
    lhs_rescaled, rhs_rescaled = shifted.lhs / alpha, shifted.rhs / alpha
    holds = lhs <= rhs * (1.0 + CHECK_SLACK)

    consistent = (
        abs(lhs - lhs_rescaled) <= ALPHA_CONSISTENCY_TOL * max(lhs, lhs_rescaled)
        and abs(rhs - rhs_rescaled) <= ALPHA_CONSISTENCY_TOL * rhs
        and holds == shifted.holds
    )
    return AlphaCheck(
        n=n,
        alpha=alpha,
        lhs=lhs,
        rhs=rhs,
        holds=holds,
        lhs_rescaled=lhs_rescaled,
        rhs_rescaled=rhs_rescaled,
        consistent=consistent,
    )


# ---- fuzz runners ---------------------------------------------------------------

TrialOutcome = Tuple[bool, float]


def _run_trials(trial: Callable[[int], TrialOutcome], trials: int, seed: int) -> List[TrialOutcome]:
    if trials < 1:
        raise DomainError("trials must be at least 1", {"trials": trials})
    seeds = range(seed, seed + trials)
    if settings.FUZZ_WORKERS > 1:
        with ThreadPoolExecutor(max_workers=settings.FUZZ_WORKERS) as pool:
            return list(pool.map(trial, seeds))
    return [trial(s) for s in seeds]


def _summarize(
    check: Literal["liebd2", "gagnir", "alpha"],
    outcomes: List[TrialOutcome],
    seed: int,
    bound: float,
) -> FuzzSummary:
    failing = [seed + i for i, (ok, _) in enumerate(outcomes) if not ok]
    summary = FuzzSummary(
        check=check,
        trials=len(outcomes),
        passed=len(outcomes) - len(failing),
        max_ratio=max(ratio for _, ratio in outcomes),
        bound=bound,
        first_failing_seed=failing[0] if failing else None,
    )
    logger.info(
        "fuzz %s: %d/%d passed, max ratio %.6g (bound %.6g)",
        check, summary.passed, summary.trials, summary.max_ratio, bound,
    )
    return summary


def fuzz_liebd2(
    trials: int,
    seed: int,
    n: int,
    m: float,
    p: float,
    k_max: int = 8,
    complex_valued: bool = False,
) -> FuzzSummary:
    """Collective L^p bound on random families; the ratio is lhs / rhs."""

    def trial(s: int) -> TrialOutcome:
        result = check_liebd2(random_ortho_family(n, m, k_max, s, complex_valued), p)
        return result.holds, result.ratio

    return _summarize("liebd2", _run_trials(trial, trials, seed), seed, 1.0)


def fuzz_gagnir(
    trials: int,
    seed: int,
    q: float,
    k_max: int = 8,
    n_modes: Optional[int] = None,
    complex_valued: bool = False,
    spectral_slope: Optional[float] = None,
) -> FuzzSummary:
    """
    Interpolation inequality on random fields; the ratio is the raw left side over
    ||phi||^{2/q} ||grad phi||^{1-2/q}. Without a fixed slope each field draws one in [0, 2).
    """

    def trial(s: int) -> TrialOutcome:
        rng = np.random.default_rng(s)
        slope = rng.uniform(0.0, 2.0) if spectral_slope is None else spectral_slope
        result = check_gagnir(random_field(k_max, rng, complex_valued, slope, n_modes), q)
        ok = result.holds and result.additive_holds
        if result.additive_gap is not None and result.additive_gap < -1e-6:
            ok = False
        return ok, result.ratio

    return _summarize("gagnir", _run_trials(trial, trials, seed), seed, gagnir_constant(q, "torus"))


def fuzz_alpha(
    trials: int,
    seed: int,
    n: int,
    alpha: float,
    k_max: int = 8,
    complex_valued: bool = False,
) -> FuzzSummary:
    """alpha-model L^2 bound with the rescaling cross-check; the ratio is lhs / rhs."""

    def trial(s: int) -> TrialOutcome:
        result = check_alpha_consistency(n, alpha, s, k_max, complex_valued)
        return result.holds and result.consistent, result.lhs / result.rhs

    return _summarize("alpha", _run_trials(trial, trials, seed), seed, 1.0)
