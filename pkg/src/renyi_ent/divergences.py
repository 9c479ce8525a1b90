"""The alpha-z Renyi relative entropy family and its named limits.

All logarithms are base 2. Infinite divergences are returned as the value
``math.inf`` rather than raised; finite return values are never NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_REL_CUT,
    DensityMatrix,
    HermitianOperator,
    as_operator,
    eig_hermitian,
    hermitian_part,
    matrix_power,
    support_projector,
)

LINE_ATOL = 1e-12
ORTHOGONALITY_TOL = 1e-10
DOMINANCE_RTOL = 1e-10

Operator = HermitianOperator | DensityMatrix


@dataclass(frozen=True)
class AlphaZ:
    """A validated (alpha, z) parameter pair with DPI-region membership flags.

    The data-processing inequality holds iff one of
      * 0 < alpha < 1 and z >= max(alpha, 1 - alpha),
      * 1 < alpha <= 2 and alpha/2 <= z <= alpha,
      * 2 <= alpha < inf and alpha - 1 <= z <= alpha,
    or alpha = 1 (any z > 0), which is included in the region.
    """

    alpha: float
    z: float
    in_dpi_region: bool = field(init=False)
    on_umegaki_line: bool = field(init=False)
    on_reverse_line: bool = field(init=False)
    on_lower_line: bool = field(init=False)

    def __post_init__(self):
        a, z = float(self.alpha), float(self.z)
        if not (a > 0 and math.isfinite(a)):
            raise ValueError(f"alpha must be a positive finite real, got {a}")
        if not (z > 0 and math.isfinite(z)):
            raise ValueError(f"z must be a positive finite real, got {z}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "on_umegaki_line", abs(a - 1.0) <= LINE_ATOL)
        object.__setattr__(self, "on_reverse_line", abs(z - (1.0 - a)) <= LINE_ATOL)
        object.__setattr__(self, "on_lower_line", abs(z - (a - 1.0)) <= LINE_ATOL)
        in_region = self.on_umegaki_line
        if a < 1.0:
            in_region = in_region or z >= max(a, 1.0 - a) - LINE_ATOL
        else:
            low = (a / 2.0) if a <= 2.0 else (a - 1.0)
            in_region = in_region or (low - LINE_ATOL <= z <= a + LINE_ATOL)
        object.__setattr__(self, "in_dpi_region", bool(in_region))

    @property
    def beta(self) -> float:
        """The exponent (1 - alpha)/z appearing in the second argument."""
        return (1.0 - self.alpha) / self.z


def dpi_region_contains(p: AlphaZ) -> bool:
    """Whether (alpha, z) lies in the region where data processing holds."""
    return p.in_dpi_region


def is_orthogonal(rho: Operator, sigma: Operator, rel_cut: float = DEFAULT_REL_CUT) -> bool:
    """Support orthogonality test Tr(Pi(rho) Pi(sigma)) < 1e-10."""
    pr = support_projector(rho, rel_cut).entries
    ps = support_projector(sigma, rel_cut).entries
    return float(np.trace(pr @ ps).real) < ORTHOGONALITY_TOL


def is_dominated(rho: Operator, sigma: Operator, rel_cut: float = DEFAULT_REL_CUT) -> bool:
    """Support containment test rho << sigma (supp(rho) inside supp(sigma))."""
    r = as_operator(rho).entries
    top = float(np.linalg.eigvalsh(r)[-1])
    if top <= 0.0:
        return True
    comp = np.eye(r.shape[0]) - support_projector(sigma, rel_cut).entries
    return float(np.max(np.abs(comp @ r @ comp))) < DOMINANCE_RTOL * top


def _log2_sum_powers(mu: np.ndarray, z: float, rel_cut: float) -> float:
    """log2(sum_i mu_i^z) over the support of mu, computed in the log domain."""
    top = float(mu[-1]) if mu.size else 0.0
    if top <= 0.0:
        return -math.inf
    mu = mu[mu > rel_cut * top]
    # (mu/top)^z <= 1, so the sum never overflows even for z ~ 1e3
    scaled = np.exp(z * (np.log(mu) - math.log(top)))
    return z * math.log2(top) + math.log2(float(np.sum(scaled)))


def _log2_q(rho: Operator, sigma: Operator, p: AlphaZ, rel_cut: float) -> float:
    a_exp = p.alpha / (2.0 * p.z)
    b_exp = (1.0 - p.alpha) / p.z
    a = matrix_power(rho, a_exp, rel_cut).entries
    s = matrix_power(sigma, b_exp, rel_cut).entries
    core = hermitian_part(a @ s @ a)
    mu = np.linalg.eigvalsh(core)
    return _log2_sum_powers(mu, p.z, rel_cut)


def q_alpha_z(
    rho: DensityMatrix,
    sigma: Operator,
    p: AlphaZ,
    rel_cut: float = DEFAULT_REL_CUT,
) -> float:
    """The trace functional Q = Tr(rho^(a/2z) sigma^((1-a)/z) rho^(a/2z))^z.

    Negative powers are generalized inverses. Returns 0 when alpha < 1 and the
    states are orthogonal, and ``inf`` (Q undefined through exp((a-1)D) with
    D = inf) when alpha > 1 and supp(rho) is not contained in supp(sigma).
    Raises for alpha = 1; use :func:`d_umegaki`.
    """
    if p.on_umegaki_line:
        raise ValueError("Q_{alpha,z} is not defined on alpha = 1; use d_umegaki")
    if p.alpha < 1.0:
        if is_orthogonal(rho, sigma, rel_cut):
            return 0.0
    elif not is_dominated(rho, sigma, rel_cut):
        return math.inf
    log2q = _log2_q(rho, sigma, p, rel_cut)
    if log2q == -math.inf:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.exp2(log2q))


def d_alpha_z(
    rho: DensityMatrix,
    sigma: Operator,
    p: AlphaZ,
    rel_cut: float = DEFAULT_REL_CUT,
) -> float:
    """The alpha-z Renyi relative entropy D_{alpha,z}(rho || sigma), base 2.

    Follows the defining case split: finite iff (alpha < 1 and rho not
    orthogonal to sigma) or rho << sigma, otherwise +inf. At alpha = 1 it
    dispatches to the Umegaki relative entropy (valid for any z > 0).
    """
    if p.on_umegaki_line:
        return d_umegaki(rho, sigma, rel_cut)
    if p.alpha < 1.0:
        if is_orthogonal(rho, sigma, rel_cut):
            return math.inf
    elif not is_dominated(rho, sigma, rel_cut):
        return math.inf
    log2q = _log2_q(rho, sigma, p, rel_cut)
    if log2q == -math.inf:
        # numerically orthogonal pair in the alpha < 1 branch
        return math.inf
    return log2q / (p.alpha - 1.0)


def d_min(rho: DensityMatrix, sigma: Operator, rel_cut: float = DEFAULT_REL_CUT) -> float:
    """Min-relative entropy -log2 Tr(Pi(rho) sigma)."""
    overlap = float(
        np.trace(support_projector(rho, rel_cut).entries @ as_operator(sigma).entries).real
    )
    if overlap <= 0.0:
        return math.inf
    return -math.log2(overlap)


def d_umegaki(
    rho: DensityMatrix, sigma: Operator, rel_cut: float = DEFAULT_REL_CUT
) -> float:
    """Umegaki relative entropy Tr(rho (log2 rho - log2 sigma)).

    Evaluated on the support of rho; +inf if supp(rho) is not contained in
    supp(sigma).
    """
    if not is_dominated(rho, sigma, rel_cut):
        return math.inf
    er = eig_hermitian(rho)
    wr = er.eigenvalues
    topr = max(float(wr[-1]), 0.0)
    keep = wr > rel_cut * max(topr, np.finfo(float).tiny)
    ent = float(np.sum(wr[keep] * np.log2(wr[keep])))
    es = eig_hermitian(sigma)
    ws = es.eigenvalues
    tops = max(float(ws[-1]), 0.0)
    keep_s = ws > rel_cut * max(tops, np.finfo(float).tiny)
    log_sigma = (es.vectors[:, keep_s] * np.log2(ws[keep_s])) @ es.vectors[:, keep_s].conj().T
    cross = float(np.trace(as_operator(rho).entries @ log_sigma).real)
    return ent - cross


def d_max(rho: DensityMatrix, sigma: Operator, rel_cut: float = DEFAULT_REL_CUT) -> float:
    """Max-relative entropy log2 lambda_max(sigma^(-1/2) rho sigma^(-1/2)).

    +inf if supp(rho) is not contained in supp(sigma) (the generalized inverse
    would silently drop the offending block, so dominance is checked first).
    """
    if not is_dominated(rho, sigma, rel_cut):
        return math.inf
    inv_half = matrix_power(sigma, -0.5, rel_cut).entries
    core = hermitian_part(inv_half @ as_operator(rho).entries @ inv_half)
    top = float(np.linalg.eigvalsh(core)[-1])
    if top <= 0.0:
        return math.inf
    return math.log2(top)
