"""Complex divided differences over pairwise-distinct nodes.

The central object is the triangular table T[p][k] built from point values by
the two-point recursion

    T[0][k]   = h(eta_{k+1})
    T[p+1][k] = (T[p][k+1] - T[p][k]) / (eta_{k+p+2} - eta_{k+1})

so T[p][0] is the order-p divided difference of h over the first p+1 nodes.
Alongside the recursion the module provides the identities that make the
table trustworthy: the Newton and Lagrange summation forms of the same
interpolant, the Leibniz product rule, and the direct nested-sum evaluation
for analytic series (equivalently, complete homogeneous symmetric polynomials
in the shifted nodes). Confluent (repeated) nodes are rejected; behavior near
confluence is exercised by shrinking clusters of distinct nodes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf, workprec

from .errors import (
    ArityError,
    ConfigError,
    DomainError,
    NodeDistinctnessError,
    ParseError,
)
from .precision import (
    DEFAULT_PRECISION,
    ApComplex,
    check_precision,
    parse_decimal,
    render_decimal,
)

SCALAR_KINDS = ("analytic-series", "conjugate-kernel", "composite")


@dataclass(frozen=True)
class ScalarFunction:
    """One-variable scalar function usable under divided differences.

    fn maps an mpc to an mpc and must be deterministic; it is always invoked
    under the caller's working precision. conj_derivative, when present, is
    the closed-form derivative with respect to conj(zeta), used by the
    adversarial construction.
    """

    fn: object
    kind: str = "composite"
    conj_derivative: object = None

    def __post_init__(self):
        if self.kind not in SCALAR_KINDS:
            raise ConfigError("unknown scalar function kind %r" % (self.kind,))

    def raw(self, w):
        """Evaluate at an mpc under the ambient working precision."""
        return self.fn(w)

    def __call__(self, z):
        if not isinstance(z, ApComplex):
            raise ConfigError("ScalarFunction evaluates ApComplex values")
        with workprec(z.precision_bits):
            return ApComplex.from_mpc(mpc(self.fn(z.to_mpc())), z.precision_bits)


def analytic_series(coeffs, center=None):
    """ScalarFunction for the truncated series sum a_n (zeta - center)^n."""
    frozen = [c.to_mpc() if isinstance(c, ApComplex) else mpc(c) for c in coeffs]
    if center is None:
        c0 = mpc(0)
    else:
        c0 = center.to_mpc() if isinstance(center, ApComplex) else mpc(center)

    def fn(w):
        shifted = w - c0
        total = mpc(0)
        for a in reversed(frozen):
            total = total * shifted + a
        return total

    # holomorphic, so the conjugate derivative is identically zero
    return ScalarFunction(
        fn=fn, kind="analytic-series", conj_derivative=lambda w: mpc(0)
    )


def conjugation():
    """ScalarFunction for zeta -> conj(zeta)."""
    return ScalarFunction(fn=lambda w: w.conjugate(), kind="conjugate-kernel")


def product(g, h):
    """Pointwise product of two scalar functions."""
    return ScalarFunction(fn=lambda w: g.fn(w) * h.fn(w), kind="composite")


class NodeSequence:
    """Ordered, pairwise-distinct complex nodes at a common working precision."""

    __slots__ = ("nodes", "precision_bits")

    def __init__(self, nodes, precision_bits=None):
        nodes = tuple(nodes)
        if not nodes:
            raise ArityError("a node sequence needs at least one node")
        for n in nodes:
            if not isinstance(n, ApComplex):
                raise ConfigError("nodes must be ApComplex values")
        if precision_bits is None:
            precision_bits = max(n.precision_bits for n in nodes)
        bits = check_precision(precision_bits)
        seen = {}
        for i, n in enumerate(nodes):
            key = (n.re, n.im)
            if key in seen:
                raise NodeDistinctnessError(
                    "nodes %d and %d coincide exactly" % (seen[key], i)
                )
            seen[key] = i
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "precision_bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("NodeSequence is immutable")

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __getitem__(self, idx):
        return self.nodes[idx]

    def first(self, n):
        if n < 1 or n > len(self.nodes):
            raise ArityError("requested %d nodes, have %d" % (n, len(self.nodes)))
        return NodeSequence(self.nodes[:n], self.precision_bits)

    def permuted(self, perm):
        if sorted(perm) != list(range(len(self.nodes))):
            raise ConfigError("not a permutation of node indices")
        return NodeSequence([self.nodes[i] for i in perm], self.precision_bits)

    def to_mpc_list(self):
        with workprec(self.precision_bits):
            return [n.to_mpc() for n in self.nodes]

    def max_modulus(self):
        with workprec(self.precision_bits):
            return max(abs(z) for z in self.to_mpc_list())

    def min_gap(self):
        zs = self.to_mpc_list()
        with workprec(self.precision_bits):
            return min(
                abs(zs[i] - zs[j])
                for i in range(len(zs))
                for j in range(i + 1, len(zs))
            ) if len(zs) > 1 else mpf("inf")

    def near_pairs(self, threshold=None):
        """Pairs closer than the conditioning threshold (default 2^-(P/2))."""
        if threshold is None:
            threshold = mpmath.ldexp(1, -(self.precision_bits // 2))
        zs = self.to_mpc_list()
        out = []
        with workprec(self.precision_bits):
            for i in range(len(zs)):
                for j in range(i + 1, len(zs)):
                    gap = abs(zs[i] - zs[j])
                    if gap < threshold:
                        out.append((i, j, gap))
        return out

    def to_json_obj(self):
        return {"nodes": [n.to_json_obj() for n in self.nodes]}

    @classmethod
    def from_json_obj(cls, obj, precision_bits=DEFAULT_PRECISION):
        if not isinstance(obj, dict) or not isinstance(obj.get("nodes"), list):
            raise ParseError("node payload must be {'nodes': [...]}")
        if not obj["nodes"]:
            raise ParseError("node payload contains no nodes")
        return cls(
            [ApComplex.from_json_obj(entry, precision_bits) for entry in obj["nodes"]],
            precision_bits,
        )


def as_node_sequence(nodes, precision_bits=None):
    if isinstance(nodes, NodeSequence):
        return nodes
    return NodeSequence(nodes, precision_bits)


@dataclass(frozen=True)
class DividedDiffTable:
    """Triangular divided-difference table over a node sequence."""

    nodes: NodeSequence
    precision_bits: int
    rows: tuple

    def order(self):
        return len(self.rows) - 1

    def entry(self, p, k=0):
        """T[p][k] as an ApComplex."""
        return ApComplex.from_mpc(self.rows[p][k], self.precision_bits)

    def entry_raw(self, p, k=0):
        return self.rows[p][k]

    def delta(self, p):
        """Divided difference of order p over the leading nodes."""
        return self.entry(p, 0)

    def to_csv_text(self):
        out = io.StringIO()
        out.write("p,k,re,im\n")
        for p, row in enumerate(self.rows):
            for k, value in enumerate(row):
                out.write(
                    "%d,%d,%s,%s\n"
                    % (p, k, render_decimal(value.real), render_decimal(value.imag))
                )
        return out.getvalue()


def delta_table(h, nodes, precision_bits=None):
    """Full triangular table of divided differences of h over the nodes."""
    seq = as_node_sequence(nodes)
    bits = check_precision(precision_bits or seq.precision_bits)
    with workprec(bits):
        zs = [n.to_mpc() for n in seq]
        row = tuple(mpc(h.raw(z)) for z in zs)
        rows = [row]
        for p in range(1, len(zs)):
            prev = rows[-1]
            row = tuple(
                (prev[k + 1] - prev[k]) / (zs[k + p] - zs[k])
                for k in range(len(zs) - p)
            )
            rows.append(row)
    return DividedDiffTable(seq, bits, tuple(rows))


def delta(h, nodes, p, precision_bits=None):
    """Order-p divided difference of h over the first p+1 nodes.

    The recursion consumes nodes eta_1..eta_p and evaluates at eta_{p+1},
    matching the two-point recursion on the leading column of the table.
    """
    seq = as_node_sequence(nodes)
    if p < 0:
        raise DomainError("order p must be nonnegative")
    if len(seq) < p + 1:
        raise ArityError("order %d needs %d nodes, have %d" % (p, p + 1, len(seq)))
    table = delta_table(h, seq.first(p + 1), precision_bits)
    return table.delta(p)


def newton_sum(h, nodes, n, x, precision_bits=None):
    """Newton form: sum_{p<n} prod_{j<=p} (x - eta_j) * Delta_p(h)(eta_{p+1})."""
    seq = as_node_sequence(nodes)
    if n < 1:
        raise DomainError("n must be at least 1")
    if len(seq) < n:
        raise ArityError("Newton sum of order %d needs %d nodes" % (n, n))
    bits = check_precision(precision_bits or max(seq.precision_bits, x.precision_bits))
    table = delta_table(h, seq.first(n), bits)
    with workprec(bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        xv = x.to_mpc()
        total = mpc(0)
        lead = mpc(1)
        for p in range(n):
            total += lead * table.entry_raw(p, 0)
            lead *= xv - zs[p]
    return ApComplex.from_mpc(total, bits)


def lagrange_sum(h, nodes, n, x, precision_bits=None):
    """Lagrange form: sum_p prod_{j != p} (x - eta_j)/(eta_p - eta_j) * h(eta_p)."""
    seq = as_node_sequence(nodes)
    if n < 1:
        raise DomainError("n must be at least 1")
    if len(seq) < n:
        raise ArityError("Lagrange sum of order %d needs %d nodes" % (n, n))
    bits = check_precision(precision_bits or max(seq.precision_bits, x.precision_bits))
    with workprec(bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        xv = x.to_mpc()
        total = mpc(0)
        for p in range(n):
            term = mpc(h.raw(zs[p]))
            for j in range(n):
                if j != p:
                    term *= (xv - zs[j]) / (zs[p] - zs[j])
            total += term
    return ApComplex.from_mpc(total, bits)


def leibniz_delta(g, h, nodes, p, precision_bits=None):
    """Product rule: Delta_p(g*h) as the convolution of shifted tables.

    Delta_p(gh)(eta_{p+1}) = sum_q Delta_{p-q}(g over eta_{q+1..p})(eta_{p+1})
                                   * Delta_q(h over eta_1..q)(eta_{q+1}).
    """
    seq = as_node_sequence(nodes)
    if p < 0:
        raise DomainError("order p must be nonnegative")
    if len(seq) < p + 1:
        raise ArityError("order %d needs %d nodes, have %d" % (p, p + 1, len(seq)))
    head = seq.first(p + 1)
    bits = check_precision(precision_bits or head.precision_bits)
    tg = delta_table(g, head, bits)
    th = delta_table(h, head, bits)
    with workprec(bits):
        total = mpc(0)
        for q in range(p + 1):
            total += tg.entry_raw(p - q, q) * th.entry_raw(q, 0)
    return ApComplex.from_mpc(total, bits)


def delta_analytic(coeffs, center, nodes, p, precision_bits=None):
    """Divided difference of the series sum a_n (zeta - center)^n, direct route.

    Evaluates the nested-sum expansion of Delta_p: the inner monotone sums
    over exponent tuples collapse to complete homogeneous symmetric
    polynomials of the shifted nodes, accumulated here by the standard
    one-variable-at-a-time recurrence. This route never forms a difference
    quotient, so it is the cross-check partner of the table recursion.
    """
    seq = as_node_sequence(nodes)
    if p < 0:
        raise DomainError("order p must be nonnegative")
    if len(seq) < p + 1:
        raise ArityError("order %d needs %d nodes, have %d" % (p, p + 1, len(seq)))
    head = seq.first(p + 1)
    bits = check_precision(precision_bits or head.precision_bits)
    frozen = [c.to_mpc() if isinstance(c, ApComplex) else mpc(c) for c in coeffs]
    if not frozen:
        raise ArityError("series needs at least one coefficient")
    top = len(frozen) - 1 - p
    if top < 0:
        return ApComplex(0, 0, bits)
    with workprec(bits):
        if center is None:
            c0 = mpc(0)
        else:
            c0 = center.to_mpc() if isinstance(center, ApComplex) else mpc(center)
        xs = [node.to_mpc() - c0 for node in head]
        # homog[m] = complete homogeneous symmetric polynomial of degree m in
        # the variables added so far; updating in ascending m adds one variable.
        homog = [mpc(1)]
        for m in range(1, top + 1):
            homog.append(homog[-1] * xs[0])
        for t in range(1, p + 1):
            for m in range(1, top + 1):
                homog[m] = homog[m] + xs[t] * homog[m - 1]
        total = mpc(0)
        for n in range(p, len(frozen)):
            total += frozen[n] * homog[n - p]
    return ApComplex.from_mpc(total, bits)


def monotone_tuple_count(n, p):
    """Number of monotone exponent tuples n >= l_1 >= ... >= l_p >= 0."""
    if n < 0 or p < 0:
        raise DomainError("counting needs nonnegative n and p")
    return math.comb(n + p, p)
