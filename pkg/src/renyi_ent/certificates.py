"""Optimizer certification for divergence-based resource monotones.

A candidate closest free state tau of rho is a global minimizer of
D_{alpha,z}(rho || .) over the free set iff it satisfies a support condition
and the linear condition Tr(sigma Xi(rho, tau)) <= Q(rho || tau) for every
free sigma. By linearity the maximization of Tr(sigma Xi) runs over pure
product states only; that maximum is written Lambda^2 throughout.
"""

from __future__ import annotations

import json
import math
import os
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .divergences import AlphaZ, d_alpha_z, q_alpha_z
from .linalg import (
    DEFAULT_REL_CUT,
    DensityMatrix,
    HermitianOperator,
    as_operator,
    hermitian_part,
    support_projector,
    support_rank,
    wrap,
)

LINE_ATOL = 1e-12
COMMUTING_TOL = 1e-10
DEGENERACY_RTOL = 1e-12
SUPPORT_TOL = 1e-8
TOL_CERT_REL = 1e-7

Operator = HermitianOperator | DensityMatrix


def _power(m: np.ndarray, p: float, rel_cut: float) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    top = max(float(w[-1]), 0.0)
    if top <= 0.0:
        return np.zeros_like(m)
    keep = w > rel_cut * top
    pw = np.zeros_like(w)
    pw[keep] = w[keep] ** p
    return (v * pw) @ v.conj().T


def commutator_maxnorm(a: Operator, b: Operator) -> float:
    am, bm = as_operator(a).entries, as_operator(b).entries
    return float(np.max(np.abs(am @ bm - bm @ am)))


def _chi_entries(
    rho: np.ndarray, tau: np.ndarray, alpha: float, z: float, rel_cut: float
) -> np.ndarray:
    a = _power(rho, alpha / (2.0 * z), rel_cut)
    t = _power(tau, (1.0 - alpha) / z, rel_cut)
    inner = hermitian_part(a @ t @ a)
    mid = _power(inner, z - 1.0, rel_cut)
    return hermitian_part(a @ mid @ a)


def chi(
    rho: DensityMatrix, tau: Operator, p: AlphaZ, rel_cut: float = DEFAULT_REL_CUT
) -> HermitianOperator:
    """The sandwich operator rho^(a/2z) (rho^(a/2z) tau^((1-a)/z) rho^(a/2z))^(z-1) rho^(a/2z).

    All powers are generalized inverses. alpha = 1 is rejected; that limit is
    handled inside :func:`xi`.
    """
    if p.on_umegaki_line:
        raise ValueError("chi is not defined at alpha = 1; xi handles that limit")
    m = _chi_entries(as_operator(rho).entries, as_operator(tau).entries, p.alpha, p.z, rel_cut)
    return wrap(m, as_operator(rho).partition)


def _phi_divided_difference(t: np.ndarray, beta: float) -> np.ndarray:
    """First-divided-difference kernel phi_beta on the spectrum of tau.

    phi_beta(a, b) = (a^beta - b^beta) / (beta (a - b)) with the diagonal
    limit a^(beta-1); beta -> 0 gives the log-mean kernel (log a - log b)/(a - b).
    Rows and columns belonging to the kernel of tau are left at zero
    (generalized-inverse convention).
    """
    n = t.size
    phi = np.zeros((n, n))
    pos = np.flatnonzero(t > 0)
    if pos.size == 0:
        return phi
    a = t[pos]
    col_a = a[:, None]
    col_b = a[None, :]
    near = np.abs(col_a - col_b) <= DEGENERACY_RTOL * np.maximum(col_a, col_b)
    safe_diff = np.where(near, 1.0, col_a - col_b)
    mean = 0.5 * (col_a + col_b)
    if abs(beta) < 1e-14:
        block = (np.log(col_a) - np.log(col_b)) / safe_diff
        block = np.where(near, 1.0 / mean, block)
    else:
        block = (col_a**beta - col_b**beta) / (beta * safe_diff)
        block = np.where(near, mean ** (beta - 1.0), block)
    phi[np.ix_(pos, pos)] = block
    return phi


@dataclass(frozen=True)
class XiEvaluation:
    """The positive operator Xi_{alpha,z}(rho, tau) plus how it was computed."""

    xi: HermitianOperator
    route: str  # "boundary-line" | "commuting" | "divided-difference"
    beta: float


def xi(
    rho: DensityMatrix,
    tau: Operator,
    p: AlphaZ,
    force_general: bool = False,
    rel_cut: float = DEFAULT_REL_CUT,
) -> XiEvaluation:
    """Evaluate Xi_{alpha,z}(rho, tau).

    Route selection:
      * |beta| = 1 with beta = (1-alpha)/z: the boundary lines z = 1 - alpha
        and z = alpha - 1, where Xi = chi_{alpha,1-alpha} exactly.
      * commuting pair (max-norm of [rho, tau] <= 1e-10, unless
        ``force_general``): Xi = rho^alpha tau^(-alpha).
      * otherwise: the closed form of the resolvent integral, evaluated in the
        eigenbasis of tau as phi_beta(t_i, t_j) * chi_ij. At alpha = 1 the
        kernel degenerates to the log-mean kernel applied to rho itself.

    The formula is evaluated for any positive (alpha, z); membership of the
    DPI region is only enforced by the certification entry points.
    """
    rho_op, tau_op = as_operator(rho), as_operator(tau)
    tau_m = tau_op.entries
    w_tau = np.linalg.eigvalsh(tau_m)
    if float(w_tau[-1]) <= 0.0:
        raise ValueError("tau has empty support")
    beta = p.beta

    if abs(abs(beta) - 1.0) <= LINE_ATOL:
        m = _chi_entries(rho_op.entries, tau_m, p.alpha, 1.0 - p.alpha, rel_cut)
        return XiEvaluation(wrap(m, rho_op.partition), "boundary-line", beta)

    if not force_general and commutator_maxnorm(rho_op, tau_op) <= COMMUTING_TOL:
        m = _power(rho_op.entries, p.alpha, rel_cut) @ _power(tau_m, -p.alpha, rel_cut)
        return XiEvaluation(wrap(m, rho_op.partition), "commuting", beta)

    if p.on_umegaki_line:
        chi_m = rho_op.entries
    else:
        chi_m = _chi_entries(rho_op.entries, tau_m, p.alpha, p.z, rel_cut)
    w, u = np.linalg.eigh(tau_m)
    t = np.where(w > rel_cut * float(w[-1]), w, 0.0)
    phi = _phi_divided_difference(t, beta)
    coeff = u.conj().T @ chi_m @ u
    m = u @ (phi * coeff) @ u.conj().T
    return XiEvaluation(wrap(m, rho_op.partition), "divided-difference", beta)


def in_support_set(
    rho: DensityMatrix, tau: Operator, p: AlphaZ, rel_cut: float = DEFAULT_REL_CUT
) -> bool:
    """Membership of tau in the support set S_{alpha,z}(rho).

    On the line (1-alpha)/z = 1 this is supp(Pi(rho) tau Pi(rho)) = supp(rho)
    (checked by rank equality); everywhere else supp(rho) must be contained
    in supp(tau).
    """
    if abs(p.beta - 1.0) <= LINE_ATOL:
        proj = support_projector(rho, rel_cut).entries
        pinched = wrap(proj @ as_operator(tau).entries @ proj, as_operator(rho).partition)
        return support_rank(pinched, rel_cut) == support_rank(rho, rel_cut)
    comp = np.eye(as_operator(rho).dim) - support_projector(tau, rel_cut).entries
    return float(np.max(np.abs(comp @ support_projector(rho, rel_cut).entries))) < SUPPORT_TOL


# ---------------------------------------------------------------------------
# Lambda^2: maximum overlap with pure product states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapResult:
    value: float
    witness: tuple[np.ndarray, ...]
    restart_values: tuple[float, ...]


def _thread_count() -> int:
    try:
        n = int(os.environ.get("RENYI_ENT_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


def _local_matrix_subscripts(nparties: int) -> list[str]:
    letters = string.ascii_letters
    bra = letters[:nparties]
    ket = letters[nparties : 2 * nparties]
    subs = []
    for k in range(nparties):
        terms = [bra + ket]
        for j in range(nparties):
            if j != k:
                terms.append(bra[j])
                terms.append(ket[j])
        subs.append(",".join(terms) + "->" + bra[k] + ket[k])
    return subs


def _alternating_ascent(
    tensor: np.ndarray,
    dims: tuple[int, ...],
    subs: list[str],
    vecs: list[np.ndarray],
    max_iters: int,
    tol: float,
) -> tuple[float, list[np.ndarray]]:
    n = len(dims)
    value = -math.inf
    for _ in range(max_iters):
        new_value = value
        for k in range(n):
            operands = []
            for j in range(n):
                if j != k:
                    operands.append(vecs[j].conj())
                    operands.append(vecs[j])
            local = np.einsum(subs[k], tensor, *operands)
            w, v = np.linalg.eigh(hermitian_part(local))
            vecs[k] = v[:, -1]
            new_value = float(w[-1])
        if new_value - value <= tol * max(1.0, abs(new_value)):
            value = new_value
            break
        value = new_value
    return value, vecs


def _spectral_init(entries: np.ndarray, dims: tuple[int, ...]) -> list[np.ndarray]:
    # best rank-one alignment of the top eigenvector, one SVD per party
    _, v = np.linalg.eigh(entries)
    psi = v[:, -1].reshape(dims)
    vecs = []
    for k in range(len(dims)):
        mat = np.moveaxis(psi, k, 0).reshape(dims[k], -1)
        u, _, _ = np.linalg.svd(mat, full_matrices=False)
        vecs.append(u[:, 0])
    return vecs


def max_product_overlap(
    op: Operator,
    restarts: int = 64,
    max_iters: int = 1000,
    tol: float = 1e-12,
    seed: int = 0,
) -> OverlapResult:
    """Maximize <v1...vN| Xi |v1...vN> over product unit vectors.

    Alternating maximization: with all local vectors but one fixed, the
    contraction of Xi is a local Hermitian matrix whose top eigenvector is the
    exact update, so the overlap is nondecreasing. Restart 0 is seeded from
    the rank-one alignment of the top eigenvector of Xi; the remaining
    restarts use seeded random product vectors. The returned value is a
    certified lower bound on Lambda^2; the multi-start is a heuristic for
    global optimality. Set RENYI_ENT_THREADS to run restarts in parallel
    (the reduction is deterministic either way).
    """
    h = as_operator(op)
    dims = h.dims
    n = len(dims)
    if n < 2:
        raise ValueError("need at least two parties; a single-party maximum is just the top eigenvalue")
    tensor = h.entries.reshape(dims + dims)
    subs = _local_matrix_subscripts(n)

    def run(r: int) -> tuple[float, list[np.ndarray]]:
        if r == 0:
            vecs = _spectral_init(h.entries, dims)
        else:
            rng = np.random.default_rng([seed, r])
            vecs = []
            for d in dims:
                v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
                vecs.append(v / np.linalg.norm(v))
        return _alternating_ascent(tensor, dims, subs, vecs, max_iters, tol)

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(r) for r in range(restarts)]

    values = np.array([res[0] for res in results])
    best = int(np.argmax(values))  # ties resolve to the lowest restart index
    return OverlapResult(
        value=float(values[best]),
        witness=tuple(results[best][1]),
        restart_values=tuple(float(x) for x in values),
    )


def product_overlap_value(op: Operator, vecs) -> float:
    """Evaluate <v1...vN| op |v1...vN> for per-party vectors."""
    full = vecs[0]
    for v in vecs[1:]:
        full = np.kron(full, v)
    return float((full.conj() @ as_operator(op).entries @ full).real)


def product_overlap_grid(
    op: Operator, steps: int = 400, refine_levels: int = 2
) -> OverlapResult:
    """Exhaustive Bloch-angle grid for Lambda^2 on small bipartite operators.

    The first party must be a qubit: its pure states are gridded over the
    Bloch angles (theta step pi/steps, phi step pi/steps), while the second
    party is solved exactly as the top eigenvector of the contracted local
    matrix. ``refine_levels`` nested zooms around the coarse argmax polish the
    local estimate; the whole search never touches the alternating path.
    Intended as an independent oracle for total dimension <= 16.
    """
    h = as_operator(op)
    dims = h.dims
    if len(dims) != 2 or dims[0] != 2:
        raise ValueError("grid fallback needs a bipartition with a qubit first party")
    if h.dim > 16:
        raise ValueError("grid fallback is limited to total dimension <= 16")
    tensor = h.entries.reshape(dims + dims)

    def scan(thetas: np.ndarray, phis: np.ndarray) -> tuple[float, float, float]:
        tt, pp = np.meshgrid(thetas, phis, indexing="ij")
        tt, pp = tt.ravel(), pp.ravel()
        vgrid = np.stack([np.cos(tt / 2), np.sin(tt / 2) * np.exp(1j * pp)], axis=1)
        best_val, best_t, best_p = -math.inf, 0.0, 0.0
        chunk = 65536
        for lo in range(0, vgrid.shape[0], chunk):
            vs = vgrid[lo : lo + chunk]
            local = np.einsum("ga,abcd,gc->gbd", vs.conj(), tensor, vs)
            local = (local + np.conj(np.transpose(local, (0, 2, 1)))) / 2
            vals = np.linalg.eigvalsh(local)[:, -1]
            idx = int(np.argmax(vals))
            if vals[idx] > best_val:
                best_val = float(vals[idx])
                best_t, best_p = float(tt[lo + idx]), float(pp[lo + idx])
        return best_val, best_t, best_p

    step = math.pi / steps
    value, th, ph = scan(
        np.linspace(0.0, math.pi, steps + 1),
        np.arange(2 * steps) * step,
    )
    for _ in range(refine_levels):
        half = step
        step = half / 10
        thetas = np.clip(np.linspace(th - half, th + half, 21), 0.0, math.pi)
        phis = np.linspace(ph - half, ph + half, 21)
        value, th, ph = scan(thetas, phis)

    v1 = np.array([math.cos(th / 2), math.sin(th / 2) * np.exp(1j * ph)])
    local = np.einsum("a,abcd,c->bd", v1.conj(), tensor, v1)
    _, vv = np.linalg.eigh(hermitian_part(local))
    return OverlapResult(value=value, witness=(v1, vv[:, -1]), restart_values=())


# ---------------------------------------------------------------------------
# Optimizer certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of a necessary-and-sufficient optimizer check.

    ``margin = q_value - lambda_sq``; a nonnegative margin together with the
    support condition certifies tau as a global minimizer over the declared
    free set. The witness is the product (or basis) state attaining
    lambda_sq. ``value`` carries D_{alpha,z}(rho || tau) when certified.
    """

    alpha: float
    z: float
    free_set: str
    support_ok: bool
    lambda_sq: float
    q_value: float
    margin: float
    verdict: str  # "certified-optimal" | "refuted" | "inconclusive"
    witness: tuple[np.ndarray, ...]
    tol_cert: float
    route: str
    beta: float
    value: float | None = None
    restart_values: tuple[float, ...] = field(default_factory=tuple)


def _verdict(support_ok: bool, margin: float, tol_cert: float) -> str:
    if not support_ok or margin < -10.0 * tol_cert:
        return "refuted"
    if margin >= -tol_cert:
        return "certified-optimal"
    return "inconclusive"


def certify_optimizer(
    rho: DensityMatrix,
    tau: Operator,
    p: AlphaZ,
    free_set: str = "sep",
    coherence_basis: np.ndarray | None = None,
    restarts: int = 64,
    max_iters: int = 1000,
    tol: float = 1e-12,
    seed: int = 0,
    rel_cut: float = DEFAULT_REL_CUT,
) -> CertificateReport:
    """Certify tau as a minimizer of D_{alpha,z}(rho || .) over a free set.

    For ``free_set="sep"`` Lambda^2 is found by multi-start alternating
    maximization over pure product states; for ``free_set="incoherent"`` the
    extreme points are basis states, so Lambda^2 is the largest diagonal entry
    of Xi in the coherence basis (identity by default).
    """
    if not p.in_dpi_region:
        raise ValueError(
            f"(alpha, z) = ({p.alpha}, {p.z}) lies outside the DPI region; "
            "the certification conditions require joint concavity/convexity"
        )
    if free_set not in ("sep", "incoherent"):
        raise ValueError(f"unknown free set {free_set!r}")

    support_ok = in_support_set(rho, tau, p, rel_cut)
    ev = xi(rho, tau, p, rel_cut=rel_cut)
    q = 1.0 if p.on_umegaki_line else q_alpha_z(rho, tau, p, rel_cut)

    restart_values: tuple[float, ...] = ()
    if free_set == "sep":
        res = max_product_overlap(ev.xi, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed)
        lam, witness, restart_values = res.value, res.witness, res.restart_values
    else:
        basis = np.eye(rho.dim) if coherence_basis is None else np.asarray(coherence_basis, dtype=complex)
        diag = np.real(np.einsum("ij,jk,ki->i", basis.conj().T, ev.xi.entries, basis))
        best = int(np.argmax(diag))
        lam, witness = float(diag[best]), (basis[:, best].copy(),)

    margin = q - lam
    tol_cert = TOL_CERT_REL * q if math.isfinite(q) else TOL_CERT_REL
    verdict = _verdict(support_ok, margin, tol_cert)
    value = d_alpha_z(rho, tau, p, rel_cut) if verdict == "certified-optimal" else None
    return CertificateReport(
        alpha=p.alpha,
        z=p.z,
        free_set=free_set,
        support_ok=support_ok,
        lambda_sq=lam,
        q_value=q,
        margin=margin,
        verdict=verdict,
        witness=witness,
        tol_cert=tol_cert,
        route=ev.route,
        beta=ev.beta,
        value=value,
        restart_values=restart_values,
    )


def _mc_diagonal_weights(tau: Operator, d: int, atol: float = 1e-10) -> np.ndarray:
    """Weights t_i of tau = sum_i t_i |ii><ii|; raises if tau is not of that form."""
    m = as_operator(tau).entries
    idx = [i * d + i for i in range(d)]
    t = np.real(m[idx, idx]).copy()
    check = m.copy()
    check[idx, idx] -= t
    if float(np.max(np.abs(check))) > atol:
        raise ValueError("tau is not diagonal in the |ii> basis within 1e-10")
    return t


def is_maximally_correlated(rho: DensityMatrix, atol: float = 1e-10) -> bool:
    """Whether rho is supported on span{|ii><jj|} for its (d, d) partition."""
    dims = rho.dims
    if len(dims) != 2 or dims[0] != dims[1]:
        return False
    d = dims[0]
    idx = [i * d + i for i in range(d)]
    proj = np.zeros_like(rho.entries)
    proj[np.ix_(idx, idx)] = rho.entries[np.ix_(idx, idx)]
    return float(np.max(np.abs(rho.entries - proj))) <= atol


def marginal_condition_mc(
    rho: DensityMatrix,
    tau: Operator,
    p: AlphaZ,
    rel_cut: float = DEFAULT_REL_CUT,
) -> CertificateReport:
    """Certification of tau in T_rho for a maximally correlated rho.

    For tau = sum_i t_i |ii><ii| the trace condition over all separable states
    collapses to the scalar inequality
    max_l t_l^((1-alpha)/z - 1) <ll| chi(rho, tau) |ll> <= Q(rho || tau),
    so no Lambda^2 search is needed. lambda_sq reports the left-hand maximum.
    """
    if not p.in_dpi_region:
        raise ValueError(f"(alpha, z) = ({p.alpha}, {p.z}) lies outside the DPI region")
    if not is_maximally_correlated(rho):
        raise ValueError("rho is not maximally correlated in the declared basis")
    d = rho.dims[0]
    t = _mc_diagonal_weights(tau, d)
    idx = np.array([i * d + i for i in range(d)])
    top = float(np.max(t))
    if top <= 0.0:
        raise ValueError("tau has empty support")
    live = t > rel_cut * top

    beta = p.beta
    if p.on_umegaki_line:
        diag_rho = np.real(rho.entries[idx, idx])
        scores = np.full(d, -math.inf)
        scores[live] = diag_rho[live] / t[live]
        q = 1.0
    elif abs(abs(beta) - 1.0) <= LINE_ATOL:
        chi_b = _chi_entries(rho.entries, as_operator(tau).entries, p.alpha, 1.0 - p.alpha, rel_cut)
        scores = np.real(chi_b[idx, idx])
        q = q_alpha_z(rho, tau, p, rel_cut)
    else:
        chi_m = _chi_entries(rho.entries, as_operator(tau).entries, p.alpha, p.z, rel_cut)
        diag_chi = np.real(chi_m[idx, idx])
        scores = np.full(d, -math.inf)
        scores[live] = t[live] ** (beta - 1.0) * diag_chi[live]
        q = q_alpha_z(rho, tau, p, rel_cut)

    best = int(np.argmax(scores))
    lam = float(scores[best])
    basis_vec = np.zeros(d, dtype=complex)
    basis_vec[best] = 1.0
    support_ok = in_support_set(rho, tau, p, rel_cut)
    margin = q - lam
    tol_cert = TOL_CERT_REL * q if math.isfinite(q) else TOL_CERT_REL
    verdict = _verdict(support_ok, margin, tol_cert)
    value = d_alpha_z(rho, tau, p, rel_cut) if verdict == "certified-optimal" else None
    return CertificateReport(
        alpha=p.alpha,
        z=p.z,
        free_set="mc-diagonal",
        support_ok=support_ok,
        lambda_sq=lam,
        q_value=q,
        margin=margin,
        verdict=verdict,
        witness=(basis_vec, basis_vec.copy()),
        tol_cert=tol_cert,
        route="mc-marginal",
        beta=beta,
        value=value,
    )


# ---------------------------------------------------------------------------
# JSON serialization of reports
# ---------------------------------------------------------------------------


def _encode_float(x: float | None):
    if x is None:
        return None
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(x)


def _decode_float(x):
    if x is None:
        return None
    if isinstance(x, str):
        return {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}[x]
    return float(x)


def report_to_dict(report: CertificateReport) -> dict:
    return {
        "alpha": report.alpha,
        "z": report.z,
        "free_set": report.free_set,
        "support_ok": report.support_ok,
        "lambda_sq": _encode_float(report.lambda_sq),
        "q_value": _encode_float(report.q_value),
        "margin": _encode_float(report.margin),
        "verdict": report.verdict,
        "witness": [
            {"re": v.real.tolist(), "im": v.imag.tolist()} for v in report.witness
        ],
        "tol_cert": report.tol_cert,
        "route": report.route,
        "beta": report.beta,
        "value": _encode_float(report.value),
        "restart_values": list(report.restart_values),
    }


def report_from_dict(payload: dict) -> CertificateReport:
    witness = tuple(
        np.asarray(v["re"], dtype=float) + 1j * np.asarray(v["im"], dtype=float)
        for v in payload["witness"]
    )
    return CertificateReport(
        alpha=float(payload["alpha"]),
        z=float(payload["z"]),
        free_set=payload["free_set"],
        support_ok=bool(payload["support_ok"]),
        lambda_sq=_decode_float(payload["lambda_sq"]),
        q_value=_decode_float(payload["q_value"]),
        margin=_decode_float(payload["margin"]),
        verdict=payload["verdict"],
        witness=witness,
        tol_cert=float(payload["tol_cert"]),
        route=payload["route"],
        beta=float(payload["beta"]),
        value=_decode_float(payload["value"]),
        restart_values=tuple(payload.get("restart_values", ())),
    )


def report_to_json(report: CertificateReport) -> str:
    return json.dumps(report_to_dict(report))


def report_from_json(text: str) -> CertificateReport:
    return report_from_dict(json.loads(text))
