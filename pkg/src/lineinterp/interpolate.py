"""Interpolant from line-restriction data and its two remainder forms.

Given the restrictions of a truncated series f to the lines {z1 = eta_q z2},
q = 1..N, the interpolant is

    E_N(f)(z) = sum_{p=1}^{N} prod_{j=p+1}^{N} (z1 - eta_j z2)
                * sum_{q=p}^{N} (1 + eta_p conj(eta_q)) / (1 + |eta_q|^2)
                  * [prod_{j=p..N, j != q} (eta_q - eta_j)]^(-1)
                  * sum_{m >= N-p} w_q(z)^(m-N+p) c_m(eta_q)

with w_q the projection parameter onto line q and c_m the restriction
coefficients; only line data enters. Two independent remainder forms are
provided: a Lagrange-type sum over high-order restriction terms and a
Newton-type sum of divided differences of a non-holomorphic kernel. They
satisfy f = E_N - R_N + tail_N with tail_N the high part of the series
itself, which is the identity every report checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf, workprec

from .divdiff import NodeSequence, ScalarFunction, as_node_sequence, delta_table
from .errors import ArityError, ConfigError, DomainError
from .funcmodel import eval2, restrict_to_line
from .precision import ApComplex, check_precision, parse_decimal, render_decimal


def _require_order(seq, n):
    if n < 1:
        raise DomainError("interpolation order must be at least 1")
    if len(seq) < n:
        raise ArityError("order %d needs %d nodes, have %d" % (n, n, len(seq)))


def _work_bits(f, seq, *points):
    bits = max(f.precision_bits, seq.precision_bits)
    for z in points:
        bits = max(bits, z.precision_bits)
    return check_precision(bits)


def _line_factor_products(zs, n, z1v, z2v):
    """suffix[p] = prod_{j=p+1}^{n} (z1 - eta_j z2) for p = 0..n."""
    suffix = [mpc(1)] * (n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] * (z1v - zs[p] * z2v)
    return suffix


def _projection_params(zs, n, z1v, z2v):
    """w_q(z) = (z2 + conj(eta_q) z1) / (1 + |eta_q|^2) for q = 1..n."""
    out = []
    for q in range(n):
        denom = 1 + zs[q].real**2 + zs[q].imag**2
        out.append((z2v + zs[q].conjugate() * z1v) / denom)
    return out


def lagrange_monomial(nodes, n, q, z1, z2):
    """L_q(z) = prod_{j != q} (z1 - eta_j z2) / (eta_q - eta_j), q one-based."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    if not 1 <= q <= n:
        raise DomainError("q must lie in 1..%d" % n)
    bits = max(seq.precision_bits, z1.precision_bits, z2.precision_bits)
    with workprec(bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        z1v, z2v = z1.to_mpc(), z2.to_mpc()
        total = mpc(1)
        for j in range(n):
            if j != q - 1:
                total *= (z1v - zs[j] * z2v) / (zs[q - 1] - zs[j])
    return ApComplex.from_mpc(total, bits)


def eval_EN(f, nodes, n, z1, z2, restrictions=None):
    """Interpolant value at (z1, z2) built from the first n line restrictions."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    bits = _work_bits(f, seq, z1, z2)
    if restrictions is None:
        restrictions = [
            restrict_to_line(f, seq[q], bits) for q in range(n)
        ]
    top = f.max_order
    with workprec(bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        z1v, z2v = z1.to_mpc(), z2.to_mpc()
        suffix = _line_factor_products(zs, n, z1v, z2v)
        ws = _projection_params(zs, n, z1v, z2v)

        # inner_sums[q][p-1] = sum_{m >= n-p} w_q^(m-n+p) c_m(eta_q), built by
        # the upward recurrence S_{p+1} = w * S_p + c_{n-p-1}.
        inner_sums = []
        for q in range(n):
            coeffs = restrictions[q].coeffs
            acc = mpc(0)
            for m in range(top, n - 2, -1):
                acc = acc * ws[q] + coeffs[m]
            # acc now holds S_1 (terms m >= n-1)
            per_p = [acc]
            for p in range(1, n):
                idx = n - p - 1
                c = coeffs[idx] if 0 <= idx <= top else mpc(0)
                acc = ws[q] * acc + c
                per_p.append(acc)
            inner_sums.append(per_p)

        # fullprod[q] = prod_{j != q} (eta_q - eta_j) over j = 1..n.
        fullprod = []
        for q in range(n):
            prod = mpc(1)
            for j in range(n):
                if j != q:
                    prod *= zs[q] - zs[j]
            fullprod.append(prod)

        total = mpc(0)
        for p in range(1, n + 1):
            inner = mpc(0)
            for q in range(p, n + 1):
                alpha = (1 + zs[p - 1] * zs[q - 1].conjugate()) / (
                    1 + zs[q - 1].real ** 2 + zs[q - 1].imag ** 2
                )
                # prod_{j=p..n, j != q} = fullprod[q] / prod_{j<p} (eta_q - eta_j)
                pref = mpc(1)
                for j in range(p - 1):
                    pref *= zs[q - 1] - zs[j]
                inner += alpha * pref / fullprod[q - 1] * inner_sums[q - 1][p - 1]
            total += suffix[p] * inner
    return ApComplex.from_mpc(total, bits)


def eval_RN_lagrange(f, nodes, n, z1, z2, restrictions=None):
    """Remainder in Lagrange form: high restriction terms against L_p."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    bits = _work_bits(f, seq, z1, z2)
    if restrictions is None:
        restrictions = [
            restrict_to_line(f, seq[q], bits) for q in range(n)
        ]
    top = f.max_order
    with workprec(bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        z1v, z2v = z1.to_mpc(), z2.to_mpc()
        ws = _projection_params(zs, n, z1v, z2v)
        total = mpc(0)
        for p in range(n):
            coeffs = restrictions[p].coeffs
            acc = mpc(0)
            for m in range(top, n - 1, -1):
                acc = acc * ws[p] + coeffs[m]
            acc *= ws[p]  # powers run from w^1 at m = n
            lag = mpc(1)
            for j in range(n):
                if j != p:
                    lag *= (z1v - zs[j] * z2v) / (zs[p] - zs[j])
            total += lag * acc
    return ApComplex.from_mpc(total, bits)


def _newton_remainder_kernel(f, n, z1v, z2v):
    """zeta -> sum_{m=n}^{M} w(zeta)^(m-n+1) c_m(zeta), not holomorphic."""
    rows = [f.degree_row(m) for m in range(f.max_order + 1)]

    def fn(zeta):
        denom = 1 + zeta.real**2 + zeta.imag**2
        w = (z2v + zeta.conjugate() * z1v) / denom
        powers = [mpc(1)]
        for _ in range(f.max_order):
            powers.append(powers[-1] * zeta)
        acc = mpc(0)
        for m in range(f.max_order, n - 1, -1):
            cm = mpc(0)
            for k, a in rows[m]:
                cm += a * powers[k]
            acc = acc * w + cm
        return acc * w

    return ScalarFunction(fn=fn, kind="composite")


def eval_RN_newton(f, nodes, n, z1, z2):
    """Remainder in Newton form: divided differences of the tail kernel."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    bits = _work_bits(f, seq, z1, z2)
    with workprec(bits):
        z1v, z2v = z1.to_mpc(), z2.to_mpc()
        kernel = _newton_remainder_kernel(f, n, z1v, z2v)
        table = delta_table(kernel, seq.first(n), bits)
        zs = [node.to_mpc() for node in seq.first(n)]
        z2pow = [mpc(1)]
        for _ in range(n - 1):
            z2pow.append(z2pow[-1] * z2v)
        total = mpc(0)
        lead = mpc(1)
        for p in range(n):
            total += z2pow[n - 1 - p] * lead * table.entry_raw(p, 0)
            lead *= z1v - zs[p] * z2v
    return ApComplex.from_mpc(total, bits)


def eval_tail(f, n, z1, z2):
    """Tail sum of the series itself: terms with total degree >= n."""
    if n < 0:
        raise DomainError("tail order must be nonnegative")
    bits = max(f.precision_bits, z1.precision_bits, z2.precision_bits)
    with workprec(bits):
        w1, w2 = z1.to_mpc(), z2.to_mpc()
        pow1 = [mpc(1)]
        pow2 = [mpc(1)]
        for _ in range(f.max_order):
            pow1.append(pow1[-1] * w1)
            pow2.append(pow2[-1] * w2)
        total = mpc(0)
        for m in range(n, f.max_order + 1):
            for k, a in f.degree_row(m):
                total += a * pow1[k] * pow2[m - k]
    return ApComplex.from_mpc(total, bits)


def condition_estimate(nodes, n):
    """Product of reciprocal node gaps over the first n nodes."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    with workprec(seq.precision_bits):
        zs = [node.to_mpc() for node in seq.first(n)]
        total = mpf(1)
        for i in range(n):
            for j in range(i + 1, n):
                total /= abs(zs[i] - zs[j])
        return total


@dataclass(frozen=True)
class InterpolantReport:
    """Joint evaluation of all identity members at one point."""

    n: int
    node_count: int
    precision_bits: int
    value_en: ApComplex
    value_rn_lagrange: ApComplex
    value_rn_newton: ApComplex
    value_tail: ApComplex
    value_f: ApComplex
    identity_residual: ApComplex
    cross_form_gap: mpf
    condition_estimate: mpf
    conditioning_pairs: tuple

    def to_json_obj(self):
        return {
            "n": self.n,
            "node_count": self.node_count,
            "precision_bits": self.precision_bits,
            "value_en": self.value_en.to_json_obj(),
            "value_rn_lagrange": self.value_rn_lagrange.to_json_obj(),
            "value_rn_newton": self.value_rn_newton.to_json_obj(),
            "value_tail": self.value_tail.to_json_obj(),
            "value_f": self.value_f.to_json_obj(),
            "identity_residual": self.identity_residual.to_json_obj(),
            "cross_form_gap": render_decimal(self.cross_form_gap),
            "condition_estimate": render_decimal(self.condition_estimate),
            "conditioning_pairs": [
                {"i": i, "j": j, "gap": render_decimal(gap)}
                for i, j, gap in self.conditioning_pairs
            ],
        }


def identity_report(f, nodes, n, z1, z2):
    """Evaluate E_N, both remainders, the tail, and the defect of the identity

    f(z) = E_N(f)(z) - R_N(f)(z) + tail_N(f)(z).
    """
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    bits = _work_bits(f, seq, z1, z2)
    restrictions = [restrict_to_line(f, seq[q], bits) for q in range(n)]
    en = eval_EN(f, seq, n, z1, z2, restrictions)
    rl = eval_RN_lagrange(f, seq, n, z1, z2, restrictions)
    rn = eval_RN_newton(f, seq, n, z1, z2)
    tail = eval_tail(f, n, z1, z2)
    fz = eval2(f, z1, z2)
    residual = en - rl + tail - fz
    with workprec(bits):
        gap = abs(rl.to_mpc() - rn.to_mpc())
    return InterpolantReport(
        n=n,
        node_count=len(seq),
        precision_bits=bits,
        value_en=en,
        value_rn_lagrange=rl,
        value_rn_newton=rn,
        value_tail=tail,
        value_f=fz,
        identity_residual=residual,
        cross_form_gap=gap,
        condition_estimate=condition_estimate(seq, n),
        conditioning_pairs=tuple(seq.first(n).near_pairs()),
    )


def interpolation_check(f, nodes, n, p, v):
    """E_N(f) - f at the point (eta_p v, v) on the p-th interpolation line."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    if not 1 <= p <= n:
        raise DomainError("line index p must lie in 1..%d" % n)
    bits = _work_bits(f, seq, v)
    eta = seq[p - 1]
    with workprec(bits):
        z1 = ApComplex.from_mpc(eta.to_mpc() * v.to_mpc(), bits)
    z2 = v.at_precision(bits)
    en = eval_EN(f, seq, n, z1, z2)
    fz = eval2(f, z1, z2)
    return en - fz


@dataclass(frozen=True)
class OrderSensitivityProbe:
    """Observed spread of E_N under reorderings of the first n nodes."""

    n: int
    trials: int
    seed: int
    max_deviation: mpf
    baseline: ApComplex

    def to_json_obj(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "max_deviation": render_decimal(self.max_deviation),
            "baseline": self.baseline.to_json_obj(),
        }


def order_sensitivity_probe(f, nodes, n, z1, z2, trials=8, seed=0):
    """Diagnostic only: how much does node order move E_N at this point."""
    seq = as_node_sequence(nodes)
    _require_order(seq, n)
    rng = random.Random(seed)
    baseline = eval_EN(f, seq, n, z1, z2)
    worst = mpf(0)
    for _ in range(trials):
        head = list(range(n))
        rng.shuffle(head)
        reordered = seq.permuted(head + list(range(n, len(seq))))
        value = eval_EN(f, reordered, n, z1, z2)
        with workprec(baseline.precision_bits):
            gap = abs(value.to_mpc() - baseline.to_mpc())
        worst = max(worst, gap)
    return OrderSensitivityProbe(
        n=n, trials=trials, seed=seed, max_deviation=worst, baseline=baseline
    )


def default_zgrid(precision_bits=None, radius="0.5", side=5, extra=10, seed=0):
    """Deterministic evaluation grid: side x side axis points plus seeded draws.

    Coordinates come from {0, +r, -r, +ir, -ir} (truncated or cycled to the
    requested side count) crossed with itself, then `extra` random points in
    the polydisc of the same radius.
    """
    bits = check_precision(precision_bits or 256)
    with workprec(bits):
        if isinstance(radius, str):
            rv = parse_decimal(radius, bits)
        else:
            rv = +mpf(radius)
        base = [
            ApComplex(0, 0, bits),
            ApComplex(rv, 0, bits),
            ApComplex(-rv, 0, bits),
            ApComplex(0, rv, bits),
            ApComplex(0, -rv, bits),
        ]
    axis = [base[i % len(base)] for i in range(side)]
    points = [(a, b) for a in axis for b in axis]
    rng = random.Random(seed)
    with workprec(bits):
        for _ in range(extra):
            def draw():
                rad = rv * mpmath.sqrt(mpf(rng.random()))
                ang = 2 * mpmath.pi * mpf(rng.random())
                return ApComplex(rad * mpmath.cos(ang), rad * mpmath.sin(ang), bits)

            points.append((draw(), draw()))
    return points
