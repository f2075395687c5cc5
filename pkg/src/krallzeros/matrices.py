"""Matrix representations of polynomial-preserving differential operators.

Two representations of the same operator live here. The spectral one
expands images in the orthogonal basis through inner products and is
diagonal exactly when the basis members are eigenfunctions. The collocation
(pseudospectral) one applies the operator to the Lagrange basis of a node
set and evaluates at the nodes; it is assembled from the differentiation
matrices Z^(k) that map values on the nodes to k-th derivative values,
exactly so for polynomials of degree below the node count.

Node-polynomial derivatives are never taken through expanded coefficients
(hopeless for wide node spreads); writing psi(x_m + h) as
pi_m * prod(1 + h/(x_m - x_j)) gives

    psi^(k)(x_m) = k! * pi_m * e_{k-1}(1/(x_m - x_j), j != m)

with e_d the elementary symmetric functions, which is stable and cheap.

Both a double-precision and an exact-rational assembly are provided. The
exact one exists because several verified statements sit far below what
double precision can resolve once entries reach 1e6 and columns must cancel
to 1e-9; handing the assembly exact rational nodes makes those residuals
meaningful. Quantities that depend on the nodes being true zeros (the
Christoffel weights, the inverse pair of the basis-transition matrix) pull
high-precision refined nodes from the NodeSet.

Notation note: the Christoffel weights and the degree-(N-1) Lagrange basis
appear under several decorated symbols in the literature (superscripts
carrying the degree); here lambda_j and ell_j always mean the same
quantities built on the current node set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .families import (
    DiffOperator,
    FamilySpec,
    MomentFunctional,
    Polynomial,
    build_family,
    eigenvalue,
    operator_of,
    squared_norm,
)
from .rootfinding import DEFAULT_REFINE_BITS, NodeSet, _round_binary, zeros

NodesLike = Union[NodeSet, Sequence[float], np.ndarray]

#: Below this |a_4(x_n)| the closed-form diagonal entries are abandoned for
#: the general assembly (the formulas divide by a_4 there).
SINGULAR_COEFF_GUARD = 1e-10

DIFFMAT_METHODS = ("explicit", "recursive", "alternative")


class PositivityError(RuntimeError):
    """A Christoffel weight came out nonpositive."""


class InversionConsistencyError(RuntimeError):
    """The transition matrix and its closed-form inverse failed to multiply to I."""


@dataclass(eq=False)
class MatrixRep:
    """Dense square matrix plus a tag and a provenance note."""

    data: np.ndarray
    kind: str
    note: str = ""
    flagged: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        return f"MatrixRep({self.kind}, {self.data.shape[0]}x{self.data.shape[1]})"


def _as_array(nodes: NodesLike) -> np.ndarray:
    if isinstance(nodes, NodeSet):
        return nodes.as_array()
    return np.asarray(nodes, dtype=float)


def _as_matrix(m: Union[MatrixRep, np.ndarray]) -> np.ndarray:
    return m.data if isinstance(m, MatrixRep) else np.asarray(m, dtype=float)


# ---------------------------------------------------------------------------
# node-polynomial derivatives, float and exact
# ---------------------------------------------------------------------------


def _elementary_symmetric(values, dmax: int, zero, one):
    e = [zero] * (dmax + 1)
    e[0] = one
    for v in values:
        for d in range(min(dmax, len(values)), 0, -1):
            e[d] = e[d] + v * e[d - 1]
    return e


def node_poly_derivatives(nodes: NodesLike, kmax: int, leading: float = 1.0):
    """psi^(k)(x_m) for k = 1..kmax and psi'(x_m), for psi = leading * prod(x - x_j).

    Returns (pd, pi) with pd[k, m] = psi^(k)(x_m) and pi[m] = psi'(x_m).
    """
    x = _as_array(nodes)
    n = len(x)
    pd = np.zeros((kmax + 1, n))
    pi = np.zeros(n)
    for m in range(n):
        others = np.delete(x, m)
        pim = leading * np.prod(x[m] - others) if n > 1 else leading
        recips = 1.0 / (x[m] - others)
        e = _elementary_symmetric(recips, kmax, 0.0, 1.0)
        pi[m] = pim
        for k in range(1, kmax + 1):
            pd[k, m] = math.factorial(k) * pim * e[k - 1]
    return pd, pi


def _node_poly_derivatives_exact(xq: Sequence[Fraction], kmax: int):
    n = len(xq)
    pis, tables = [], []
    for m in range(n):
        pim = Fraction(1)
        recips = []
        for j in range(n):
            if j != m:
                pim *= xq[m] - xq[j]
                recips.append(1 / (xq[m] - xq[j]))
        e = _elementary_symmetric(recips, kmax, Fraction(0), Fraction(1))
        pis.append(pim)
        tables.append(e)

    def psid(k: int, m: int) -> Fraction:
        return math.factorial(k) * pis[m] * tables[m][k - 1]

    return psid, pis


# ---------------------------------------------------------------------------
# differentiation matrices
# ---------------------------------------------------------------------------


def diffmat(k: int, nodes: NodesLike, method: str = "recursive", leading: float = 1.0) -> MatrixRep:
    """Differentiation matrix Z^(k): values on the nodes -> k-th derivative values.

    Exact on polynomials of degree < node count. Three constructions are
    kept side by side as cross-checks of each other:

    - "explicit": direct reciprocal-sum expressions, k in {1, 2} only;
    - "recursive": off-diagonal entries by the recursion in k, diagonal
      from the Taylor expansion of the node polynomial;
    - "alternative": off-diagonal entries by the closed alternating sum
      over node-polynomial derivatives, same diagonal.

    The node polynomial's leading coefficient cancels throughout; `leading`
    is accepted anyway so that the invariance is testable.
    """
    if not 1 <= k <= 4:
        raise ValueError("derivative order k must be in 1..4")
    if method not in DIFFMAT_METHODS:
        raise ValueError(f"method must be one of {DIFFMAT_METHODS}")
    if method == "explicit" and k > 2:
        raise ValueError("explicit formulas exist for k in {1, 2} only")
    x = _as_array(nodes)
    n = len(x)

    if method == "explicit":
        z = _diffmat_explicit(k, x)
    else:
        pd, pi = node_poly_derivatives(x, k + 1, leading)
        z = np.zeros((n, n))
        if method == "recursive":
            # entry (m, n) recurses over derivative order in place
            for m in range(n):
                for j in range(n):
                    if m == j:
                        z[m, j] = pd[k + 1, j] / ((k + 1) * pi[j])
                    else:
                        a = 1.0 / (x[m] - x[j])
                        zprev = 0.0  # off-diagonal entry of Z^(0) = I
                        for kk in range(1, k + 1):
                            zprev = a * (pd[kk, m] / pi[j] - kk * zprev)
                        z[m, j] = zprev
        else:
            for m in range(n):
                for j in range(n):
                    if m == j:
                        z[m, j] = pd[k + 1, j] / ((k + 1) * pi[j])
                    else:
                        acc = 0.0
                        for i in range(1, k + 1):
                            acc += (
                                (-1) ** (k - i)
                                * math.factorial(k)
                                / math.factorial(i)
                                * pd[i, m]
                                / (x[m] - x[j]) ** (k - i + 1)
                            )
                        z[m, j] = acc / pi[j]
    return MatrixRep(z, kind=f"diffmat({k})", note=f"{method} construction on {n} nodes")


def _diffmat_explicit(k: int, x: np.ndarray) -> np.ndarray:
    n = len(x)
    pi = np.array([np.prod(x[m] - np.delete(x, m)) if n > 1 else 1.0 for m in range(n)])
    z = np.zeros((n, n))
    if k == 1:
        for m in range(n):
            for j in range(n):
                if m == j:
                    z[m, j] = math.fsum(1.0 / (x[m] - x[i]) for i in range(n) if i != m)
                else:
                    z[m, j] = pi[m] / pi[j] / (x[m] - x[j])
        return z
    for m in range(n):
        for j in range(n):
            if m == j:
                z[m, j] = math.fsum(
                    1.0 / ((x[m] - x[i]) * (x[m] - x[p]))
                    for i in range(n)
                    if i != m
                    for p in range(n)
                    if p not in (m, i)
                )
            else:
                s = math.fsum(1.0 / (x[m] - x[i]) for i in range(n) if i not in (m, j))
                z[m, j] = 2.0 * pi[m] / pi[j] / (x[m] - x[j]) * s
    return z


def diffmats_exact(kmax: int, xq: Sequence[Fraction]) -> list[list[list[Fraction]]]:
    """Z^(0)..Z^(kmax) over exact rationals at rational nodes."""
    n = len(xq)
    psid, pis = _node_poly_derivatives_exact(xq, kmax + 1)
    mats = [[[Fraction(int(i == j)) for j in range(n)] for i in range(n)]]
    for k in range(1, kmax + 1):
        prev = mats[k - 1]
        cur = [[Fraction(0)] * n for _ in range(n)]
        for m in range(n):
            for j in range(n):
                if m == j:
                    cur[m][j] = psid(k + 1, j) / ((k + 1) * pis[j])
                else:
                    a = 1 / (xq[m] - xq[j])
                    cur[m][j] = a * (psid(k, m) / pis[j] - k * prev[m][j])
        mats.append(cur)
    return mats


# ---------------------------------------------------------------------------
# collocation representations
# ---------------------------------------------------------------------------


def collocation_rep(op: DiffOperator, nodes: NodesLike) -> MatrixRep:
    """Pseudospectral matrix of op: row m, column n holds (op ell_n)(x_m)."""
    x = _as_array(nodes)
    n = len(x)
    out = np.zeros((n, n))
    for order, a in op.terms:
        av = np.array([float(a(float(xi))) for xi in x])
        if order == 0:
            out += np.diag(av)
        else:
            out += av[:, None] * diffmat(order, x).data
    return MatrixRep(out, kind="collocation", note=f"assembled from differentiation matrices on {n} nodes")


def collocation_exact(op: DiffOperator, xq: Sequence[Fraction]) -> list[list[Fraction]]:
    """Exact-rational collocation matrix at rational nodes."""
    n = len(xq)
    kmax = op.max_order
    zs = diffmats_exact(kmax, xq)
    out = [[Fraction(0)] * n for _ in range(n)]
    for order, a in op.terms:
        aq = Polynomial([Fraction(c) for c in a.coeffs])
        for m in range(n):
            am = aq(xq[m])
            if am == 0:
                continue
            row = zs[order][m]
            for j in range(n):
                out[m][j] += am * row[j]
    return out


def _operator_data(spec: FamilySpec, x: float):
    """a_j(x) and a_j'(x), j = 1..4, as floats."""
    op = operator_of(spec)
    a = {j: 0.0 for j in range(1, 5)}
    ap = {j: 0.0 for j in range(1, 5)}
    for order, c in op.terms:
        cf = c.to_float()
        a[order] = cf(x)
        ap[order] = cf.derivative()(x)
    return a, ap


def _simplified_diag_fourth_order(spec: FamilySpec, n_total: int, x: float, p1: float, p2: float, p3: float) -> float:
    a, ap = _operator_data(spec, x)
    mu_top = float(eigenvalue(spec, n_total))
    return (
        -(a[3] - 0.8 * (ap[4] + a[3]))
        * (a[3] * p3 + a[2] * p2 + a[1] * p1)
        / (4.0 * a[4] * p1)
        + (p3 / (3.0 * p1)) * (a[2] - 0.6 * (ap[3] + a[2]))
        + (p2 / (2.0 * p1)) * (a[1] - 0.4 * (ap[2] + a[1]))
        - 0.2 * (ap[1] - mu_top)
    )


def _simplified_offdiag_fourth_order(spec: FamilySpec, xm: float, a_mn: float, p1m: float, p2m: float, p3m: float, p1n: float) -> float:
    a, _ = _operator_data(spec, xm)
    brace = (
        4.0 * a[4] * p3m
        + 3.0 * (a[3] - 4.0 * a[4] * a_mn) * p2m
        - 2.0 * (3.0 * a_mn * (a[3] - 4.0 * a[4] * a_mn) - a[2]) * p1m
    )
    return -(a_mn * a_mn) / p1n * brace


def _family_diag(spec: FamilySpec, n_total: int, x: float, p1: float, p2: float, p3: float) -> float:
    al = float(spec.alpha) if spec.alpha is not None else 0.0
    if spec.family == "krall-legendre":
        mu_top = float(eigenvalue(spec, n_total))
        return (
            8.0 * al * (x * x - 1.0) / 15.0 * (p3 / p1)
            + 12.0 * al * x / 5.0 * (p2 / p1)
            + (8.0 * al * (x * x + 1.0) + mu_top * (x * x - 1.0)) / (5.0 * (x * x - 1.0))
        )
    if spec.family == "krall-laguerre":
        big_n = float(n_total * (n_total + 2 * spec.alpha + 1))
        return (
            -x * (x + 4.0 * al) / 15.0 * (p3 / p1)
            + (x * x + 2.0 * (2.0 * al - 1.0) * x - 6.0 * al) / 10.0 * (p2 / p1)
            + ((al + 1.0) * x * x + (big_n - al) * x - 2.0 * al) / (5.0 * x)
        )
    # krall-jacobi
    mm = float(spec.mass)
    mu_top = float(eigenvalue(spec, n_total))
    t3 = x * ((4.0 * mm - al * al + 4.0) * x - 4.0 * mm) / 15.0 * (p3 / p1)
    t2 = (
        (2.0 * mm * (x - 1.0) * (2.0 * (al + 3.0) * x - 3.0) - (al * al - 4.0) * x * ((al + 3.0) * x - 2.0))
        / (10.0 * (x - 1.0))
        * (p2 / p1)
    )
    t1 = (
        (-(al**3) - (mm + 1.0) * al * al + 4.0 * al + 4.0 * mm + 4.0 + mu_top) * x * x
        + (mm * (al - 4.0) - mu_top) * x
        + 2.0 * mm
    ) / (5.0 * x * (x - 1.0))
    return t3 + t2 + t1


def _family_offdiag(spec: FamilySpec, xm: float, a_mn: float, p1m: float, p2m: float, p3m: float, p1n: float) -> float:
    al = float(spec.alpha) if spec.alpha is not None else 0.0
    if spec.family == "krall-legendre":
        brace = (
            4.0 * (1.0 - xm * xm) ** 2 * p3m
            - 12.0 * (xm * xm - 1.0) * (a_mn * (xm * xm - 1.0) - 2.0 * xm) * p2m
            + 8.0 * (xm * xm - 1.0) * (3.0 * a_mn * a_mn * (xm * xm - 1.0) - 6.0 * a_mn * xm + al + 3.0) * p1m
        )
    elif spec.family == "krall-laguerre":
        brace = (
            4.0 * xm * xm * p3m
            - 6.0 * xm * (2.0 * a_mn * xm + xm - 2.0) * p2m
            + 2.0 * xm * (12.0 * a_mn * a_mn * xm + 6.0 * a_mn * (xm - 2.0) + xm - 2.0 * (al + 3.0)) * p1m
        )
    else:  # krall-jacobi
        mm = float(spec.mass)
        brace = (
            4.0 * xm * xm * (xm - 1.0) ** 2 * p3m
            + 6.0 * xm * (xm - 1.0) * (-2.0 * a_mn * xm * (xm - 1.0) + (4.0 + al) * xm - 2.0) * p2m
            - 2.0
            * xm
            * (
                -12.0 * a_mn * a_mn * xm * (xm - 1.0) ** 2
                + 6.0 * a_mn * (xm - 1.0) * ((4.0 + al) * xm - 2.0)
                - (al * al + 9.0 * al + 2.0 * mm + 14.0) * xm
                + 2.0 * (3.0 * al + mm + 6.0)
            )
            * p1m
        )
    return -(a_mn * a_mn) / p1n * brace


def collocation_rep_simplified(spec: FamilySpec, nodes: NodeSet, formula: str = "family") -> MatrixRep:
    """Collocation matrix from the closed forms valid at the family's own zeros.

    These use only p_N', p_N'', p_N''' at the nodes (the node polynomial's
    higher derivatives having been eliminated through the differential
    equation), so the nodes must be the zeros of the degree-N member.
    formula="family" picks the per-family expressions; formula="fourth-order"
    the generic fourth order ones (Krall families only). Classical families
    use their own two-term closed form under either name.

    Nodes where |a_4| (or |sigma|) falls under the singular guard get their
    diagonal entry from the general assembly instead and are reported in
    `flagged`.
    """
    if formula not in ("family", "fourth-order"):
        raise ValueError("formula must be 'family' or 'fourth-order'")
    if not spec.is_krall:
        return _classical_simplified(spec, nodes)
    x = nodes.as_array()
    n = len(x)
    n_total = n
    p1, p2, p3 = np.array(nodes.d1), np.array(nodes.d2), np.array(nodes.d3)

    a4 = operator_of(spec).coefficient(4).to_float()
    flagged = tuple(i for i in range(n) if abs(a4(x[i])) < SINGULAR_COEFF_GUARD)

    out = np.zeros((n, n))
    for m in range(n):
        for j in range(n):
            if m == j:
                continue
            a_mn = 1.0 / (x[m] - x[j])
            if formula == "family":
                out[m, j] = _family_offdiag(spec, x[m], a_mn, p1[m], p2[m], p3[m], p1[j])
            else:
                out[m, j] = _simplified_offdiag_fourth_order(spec, x[m], a_mn, p1[m], p2[m], p3[m], p1[j])
    general = collocation_rep(operator_of(spec), nodes).data if flagged else None
    for i in range(n):
        if i in flagged:
            out[i, i] = general[i, i]
        elif formula == "family":
            out[i, i] = _family_diag(spec, n_total, x[i], p1[i], p2[i], p3[i])
        else:
            out[i, i] = _simplified_diag_fourth_order(spec, n_total, x[i], p1[i], p2[i], p3[i])
    note = f"{formula} closed form at the zeros of the degree-{n} member"
    if flagged:
        note += f"; general-assembly fallback at nodes {list(flagged)}"
    return MatrixRep(out, kind="collocation", note=note, flagged=flagged)


def _classical_simplified(spec: FamilySpec, nodes: NodeSet) -> MatrixRep:
    x = nodes.as_array()
    n = len(x)
    op = operator_of(spec, mode="float")
    sigma, tau = op.coefficient(2), op.coefficient(1)
    sigma_d = sigma.derivative()
    tau1 = tau.coeffs[1] if len(tau.coeffs) > 1 else 0.0
    sigma2 = 2.0 * sigma.coeffs[2] if len(sigma.coeffs) > 2 else 0.0
    p1 = np.array(nodes.d1)
    out = np.zeros((n, n))
    flagged = tuple(i for i in range(n) if abs(sigma(x[i])) < SINGULAR_COEFF_GUARD)
    general = collocation_rep(op, nodes).data if flagged else None
    for m in range(n):
        for j in range(n):
            if m != j:
                out[m, j] = -2.0 * sigma(x[m]) / (x[m] - x[j]) ** 2 * p1[m] / p1[j]
        if m in flagged:
            out[m, m] = general[m, m]
        else:
            out[m, m] = -tau(x[m]) / (6.0 * sigma(x[m])) * (tau(x[m]) - 2.0 * sigma_d(x[m])) + (
                (n - 1) * (tau1 + 0.5 * n * sigma2) / 3.0
            )
    note = f"second-order closed form at the zeros of the degree-{n} member"
    if flagged:
        note += f"; general-assembly fallback at nodes {list(flagged)}"
    return MatrixRep(out, kind="collocation", note=note, flagged=flagged)


# ---------------------------------------------------------------------------
# spectral representation
# ---------------------------------------------------------------------------


def tau_rep(op: DiffOperator, spec: FamilySpec, n: int) -> MatrixRep:
    """Spectral matrix: entry (k, j) is <op p_{j-1}, p_{k-1}> / ||p_{k-1}||^2.

    Computed by exact expansion against the moment sequence, then rounded;
    the point masses of the Krall measures make generic quadrature awkward
    while the moments are closed-form. Diagonal equals the eigenvalue list
    when op is the family's own operator; upper triangular for any operator
    that preserves polynomial degree.
    """
    fam = build_family(spec, n - 1)
    norms = [squared_norm(p, spec) for p in fam]
    op_exact = DiffOperator(tuple((o, Polynomial([Fraction(c) for c in a.coeffs])) for o, a in op.terms))
    mom = MomentFunctional(spec)
    out = np.zeros((n, n))
    for j in range(n):
        image = op_exact.apply(fam[j])
        for k in range(n):
            prod = image * fam[k]
            val = sum((prod.coeffs[i] * mom(i) for i in range(len(prod.coeffs))), Fraction(0))
            out[k, j] = float(val / norms[k])
    return MatrixRep(out, kind="tau", note=f"inner-product expansion in the {spec.label()} basis")


# ---------------------------------------------------------------------------
# Christoffel weights, transition matrices, similarity
# ---------------------------------------------------------------------------


def _exact_node_polynomial(nodes: NodeSet) -> Polynomial:
    if nodes.poly.mode == "rational":
        return nodes.poly
    return Polynomial([Fraction(c) for c in nodes.poly.coeffs])


def christoffel_numbers(nodes: NodeSet, spec: FamilySpec, bits: int = DEFAULT_REFINE_BITS) -> list[Fraction]:
    """Exact interpolatory weights lambda_j = integral of ell_j against the measure."""
    poly = _exact_node_polynomial(nodes)
    deriv = poly.derivative()
    xq = nodes.refined(bits)
    mom = MomentFunctional(spec)
    lams = []
    for xj in xq:
        quot = poly.shifted_quotient(xj)
        val = sum((quot.coeffs[i] * mom(i) for i in range(len(quot.coeffs))), Fraction(0))
        lams.append(val / deriv(xj))
    return lams


def christoffel(nodes: NodeSet, spec: FamilySpec, bits: int = DEFAULT_REFINE_BITS) -> MatrixRep:
    """Diagonal matrix of the Christoffel numbers; every entry must be positive."""
    lams = christoffel_numbers(nodes, spec, bits)
    for j, lam in enumerate(lams):
        if lam <= 0:
            raise PositivityError(
                f"weight {j} is {float(lam):.3e} <= 0; nodes or moments are corrupted"
            )
    data = np.diag([float(v) for v in lams])
    return MatrixRep(data, kind="christoffel_diag", note=f"interpolatory weights for {spec.label()}")


def quadrature_exactness(nodes: NodeSet, spec: FamilySpec, bits: int = DEFAULT_REFINE_BITS):
    """Relative moment-matching residuals of the Gaussian rule, k = 0..2N-1.

    Returns (max_residual, per_k_list). Evaluated in exact arithmetic on the
    refined nodes: the statement being checked has degree of exactness 2N-1
    only at the true zeros, and its sensitivity to node error dwarfs double
    precision for spread-out node sets.
    """
    lams = christoffel_numbers(nodes, spec, bits)
    xq = nodes.refined(bits)
    mom = MomentFunctional(spec)
    n = len(xq)
    residuals = []
    powers = [Fraction(1)] * n
    for k in range(2 * n):
        if k > 0:
            powers = [p * x for p, x in zip(powers, xq)]
        approx = sum((lam * p for lam, p in zip(lams, powers)), Fraction(0))
        mk = mom(k)
        residuals.append(float(abs(approx - mk) / max(Fraction(1), abs(mk))))
    return max(residuals), residuals


_PRODUCT_BITS = 512  # entry rounding before exact matrix products


def _transition_exact(nodes: NodeSet, spec: FamilySpec, bits: int):
    n = len(nodes)
    fam = build_family(spec, n - 1)
    norms = [squared_norm(p, spec) for p in fam]
    lams = christoffel_numbers(nodes, spec, bits)
    xq = nodes.refined(bits)
    values = [[_round_binary(fam[j](x), _PRODUCT_BITS) for x in xq] for j in range(n)]
    l_mat = [
        [_round_binary(lams[k] * values[j][k] / norms[j], _PRODUCT_BITS) for k in range(n)]
        for j in range(n)
    ]
    l_inv = [[values[k][j] for k in range(n)] for j in range(n)]
    return l_mat, l_inv


def _inverse_residual(l_mat, l_inv) -> float:
    n = len(l_mat)
    worst = Fraction(0)
    for m in range(n):
        total = Fraction(0)
        for j in range(n):
            entry = sum(l_mat[m][k] * l_inv[k][j] for k in range(n))
            if m == j:
                entry -= 1
            total += abs(entry)
        worst = max(worst, total)
    return float(worst)


def transition(nodes: NodeSet, spec: FamilySpec, bits: int = DEFAULT_REFINE_BITS) -> tuple[MatrixRep, MatrixRep]:
    """Basis-transition pair (L, L_inv) at the zeros of the degree-N member.

    L factors as P * Lambda: row j of P holds p_{j-1}(x_k) / ||p_{j-1}||^2
    and Lambda carries the Christoffel numbers. Gaussian exactness makes the
    inverse explicit, L_inv[j][k] = p_{k-1}(x_j); the product is checked to
    the 1e-10 consistency bound before returning.
    """
    l_mat, l_inv = _transition_exact(nodes, spec, bits)
    residual = _inverse_residual(l_mat, l_inv)
    if residual > 1e-10:
        raise InversionConsistencyError(
            f"||L L_inv - I||_inf = {residual:.3e} above 1e-10; nodes are not "
            f"accurate zeros for {spec.label()}"
        )
    l_rep = MatrixRep(
        np.array([[float(v) for v in row] for row in l_mat]),
        kind="transition",
        note=f"P * Lambda at the zeros of the degree-{len(nodes)} member of {spec.label()}",
    )
    li_rep = MatrixRep(
        np.array([[float(v) for v in row] for row in l_inv]),
        kind="transition_inverse",
        note="basis values p_{k-1}(x_j)",
    )
    return l_rep, li_rep


def transition_general(nodes: NodeSet, spec: FamilySpec) -> tuple[MatrixRep, MatrixRep]:
    """Transition pair from the defining inner products, for any distinct nodes.

    L expands each Lagrange basis member in the orthogonal basis through
    moments; no Gaussian shortcut is used, so the nodes need not be zeros of
    a family member. The inverse is still the value matrix p_{k-1}(x_j):
    evaluating the expansion of ell_j at the nodes gives the identity matrix
    directly.
    """
    n = len(nodes)
    xq = [Fraction(x) for x in nodes.nodes]
    fam = build_family(spec, n - 1)
    norms = [squared_norm(p, spec) for p in fam]
    mom = MomentFunctional(spec)
    psi = Polynomial([Fraction(1)])
    for x in xq:
        psi = psi * Polynomial([-x, Fraction(1)])
    psi_d = psi.derivative()
    l_mat = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        ell = psi.shifted_quotient(xq[j])
        scale = psi_d(xq[j])
        for m in range(n):
            prod = ell * fam[m]
            val = sum((prod.coeffs[i] * mom(i) for i in range(len(prod.coeffs))), Fraction(0))
            l_mat[m][j] = val / (scale * norms[m])
    l_inv = [[fam[k](xq[j]) for k in range(n)] for j in range(n)]
    l_rep = MatrixRep(
        np.array([[float(v) for v in row] for row in l_mat]),
        kind="transition",
        note=f"inner-product expansion of the Lagrange basis on {n} given nodes",
    )
    li_rep = MatrixRep(
        np.array([[float(v) for v in row] for row in l_inv]),
        kind="transition_inverse",
        note="basis values p_{k-1}(x_j)",
    )
    return l_rep, li_rep


def similarity_residual(a_coll, a_tau, l_mat, l_inv) -> float:
    """|| A_coll L_inv - L_inv A_tau ||_inf / max(1, ||A_tau||_inf), in doubles.

    Measures how far the two representations are from being similar through
    (L, L_inv). Note the double-precision floor: the products cancel from
    ||A_coll|| * ||L_inv|| down to the result, so for families with huge
    basis values at the nodes this cannot come out much below 1e-7; the
    exact path in similarity_check() is the sharp version.
    """
    ac, at = _as_matrix(a_coll), _as_matrix(a_tau)
    li = _as_matrix(l_inv)
    if _as_matrix(l_mat).shape != li.shape:
        raise ValueError("L and L_inv must have matching shapes")
    num = np.linalg.norm(ac @ li - li @ at, np.inf)
    return float(num / max(1.0, np.linalg.norm(at, np.inf)))


def similarity_check(spec: FamilySpec, n: int, bits: int = DEFAULT_REFINE_BITS) -> dict:
    """Exact-arithmetic consistency of the two representations at family zeros.

    Returns {"inverse_residual", "similarity_residual"}: the first is
    ||L L_inv - I||_inf with L = P Lambda on refined nodes, the second
    ||D_coll L_inv - L_inv D_tau||_inf / max(1, ||D_tau||_inf) with the
    collocation matrix assembled exactly at the double-precision nodes.
    """
    member = build_family(spec, n)[n]
    nodes = zeros(member, spec)
    l_mat, l_inv = _transition_exact(nodes, spec, bits)
    inverse_residual = _inverse_residual(l_mat, l_inv)

    xq = [Fraction(x) for x in nodes.nodes]
    dc = collocation_exact(operator_of(spec), xq)
    fam = build_family(spec, n - 1)
    value = [[fam[k](xq[j]) for k in range(n)] for j in range(n)]  # L_inv at the raw nodes
    mus = [eigenvalue(spec, m) for m in range(n)]
    worst = Fraction(0)
    for m in range(n):
        total = Fraction(0)
        for j in range(n):
            entry = sum(dc[m][k] * value[k][j] for k in range(n)) - value[m][j] * mus[j]
            total += abs(entry)
        worst = max(worst, total)
    denom = max(Fraction(1), max(abs(v) for v in mus))
    return {
        "inverse_residual": inverse_residual,
        "similarity_residual": float(worst / denom),
    }
