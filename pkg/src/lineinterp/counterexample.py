"""Constructive axis node sequences whose divided differences grow like p^p.

The builder appends three nodes per stage, all exactly on the real or
imaginary axis, so that after stage s the order 3s-1 divided difference of
the kernel over the first 3s nodes has magnitude at least s^s. The placement
rests on the one-node extension

    G(zeta) = Delta_n(f) over the nodes placed so far, with zeta appended,

whose derivative with respect to conj(zeta) at 0 is, by the product rule,
(df/dconj)(0) / prod(0 - eta_i). Shrinking the stage's leading node pumps
that derivative above the target, and an axis pair whose half-phase matches
d_z / d_zbar makes the final divided difference tend to d_z + e^{i theta}
d_zbar, of magnitude |d_z| + |d_zbar|. Acceptance never trusts the limit:
each candidate pair is checked by recomputing the divided difference
directly, shrinking the pair radius geometrically until the target clears,
and doubling the working precision whenever the shrink loop stalls or the
pairwise node gaps predict more cancellation than the precision absorbs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf, workprec

from .criterion import conj_kernel
from .divdiff import NodeSequence, ScalarFunction, delta, delta_table
from .errors import (
    ConfigError,
    ConstructionFailureError,
    DegenerateNodeError,
    DomainError,
    ParseError,
    UnsuitableKernelError,
)
from .precision import (
    DEFAULT_PRECISION,
    ApComplex,
    check_precision,
    parse_decimal,
    render_decimal,
)

PHASE_CASES = ("real-pair", "imaginary-pair", "split-pair")


def default_kernel():
    """Bounded conjugation kernel zeta -> conj(zeta) / (1 + |zeta|^2).

    Its derivative with respect to conj(zeta) is 1/(1 + |zeta|^2)^2, equal
    to 1 at the origin, so the kernel suits build_sequence.
    """
    return conj_kernel(1)


@dataclass(frozen=True)
class WirtingerPair:
    """Wirtinger derivatives at 0 of a one-node extension of Delta_n(f).

    d_zbar comes from the closed product formula and is accurate to
    rounding; d_z comes from Richardson-extrapolated central differences
    and carries roughly two thirds of the working precision.
    """

    d_z: ApComplex
    d_zbar: ApComplex
    precision_bits: int


def _as_prefix(prefix):
    if prefix is None:
        return ()
    if isinstance(prefix, NodeSequence):
        return prefix.nodes
    return tuple(prefix)


def wirtinger_at_zero(f, prefix=(), precision_bits=None):
    """Wirtinger derivatives at 0 of zeta -> Delta_n(f)(eta_1..eta_n, zeta).

    n is the prefix length; an empty prefix differentiates f itself. The
    anti-holomorphic derivative uses the product formula
    (df/dconj)(0) / prod(0 - eta_i). The holomorphic derivative uses central
    differences along both axes at a dyadic step, capped a factor of eight
    below the smallest prefix modulus so the probes stay clear of the
    nodes, with one Richardson step at ratio 2.
    """
    if not isinstance(f, ScalarFunction):
        raise ConfigError("wirtinger_at_zero needs a ScalarFunction kernel")
    if f.conj_derivative is None:
        raise ConfigError("kernel lacks a closed-form conjugate derivative")
    nodes = _as_prefix(prefix)
    for i, node in enumerate(nodes):
        if not isinstance(node, ApComplex):
            raise ConfigError("prefix nodes must be ApComplex values")
        if node.is_zero():
            raise DegenerateNodeError(
                "prefix node %d sits at 0, the expansion point" % i
            )
    if precision_bits is None:
        precision_bits = max(
            [n.precision_bits for n in nodes], default=DEFAULT_PRECISION
        )
    bits = check_precision(precision_bits)
    with workprec(bits):
        zs = [n.to_mpc() for n in nodes]
        denom = mpc(1)
        for z in zs:
            denom = denom * (-z)
        d_zbar = mpc(f.conj_derivative(mpc(0))) / denom

        h_exp = -(bits // 3)
        if zs:
            _, top = mpmath.frexp(min(abs(z) for z in zs))
            h_exp = min(h_exp, top - 4)
        h = mpmath.ldexp(1, h_exp)

        def extended_delta(re, im):
            probe = ApComplex(re, im, bits)
            return delta(f, list(nodes) + [probe], len(nodes), bits).to_mpc()

        def central(step, along_imag):
            if along_imag:
                upper = extended_delta(0, step)
                lower = extended_delta(0, -step)
            else:
                upper = extended_delta(step, 0)
                lower = extended_delta(-step, 0)
            return (upper - lower) / (2 * step)

        dx = (4 * central(h / 2, False) - central(h, False)) / 3
        dy = (4 * central(h / 2, True) - central(h, True)) / 3
        d_z = (dx - mpc(0, 1) * dy) / 2
        return WirtingerPair(
            d_z=ApComplex.from_mpc(d_z, bits),
            d_zbar=ApComplex.from_mpc(d_zbar, bits),
            precision_bits=bits,
        )


@dataclass(frozen=True)
class EscalationPolicy:
    """Working-precision schedule for the staged construction.

    Bits start at start_bits and double whenever a stage exhausts
    shrink_budget halvings of its pair radius, or the candidate nodes'
    pairwise gaps predict more than bits/2 of cancellation. Doubling past
    max_bits abandons the construction.
    """

    start_bits: int = DEFAULT_PRECISION
    max_bits: int = 8192
    shrink_budget: int = 64

    def __post_init__(self):
        check_precision(self.start_bits)
        if self.max_bits < self.start_bits:
            raise ConfigError("max_bits must be at least start_bits")
        if self.shrink_budget < 1:
            raise DomainError("shrink budget must be positive")


@dataclass(frozen=True)
class StageRecord:
    """Acceptance record for one three-node stage (1-based stage index)."""

    stage: int
    eta_first: ApComplex
    eta_second: ApComplex
    eta_third: ApComplex
    achieved: mpf
    target: int
    phase_case: str
    shrink_steps: int
    precision_bits: int

    def to_json_obj(self):
        return {
            "stage": self.stage,
            "eta_first": self.eta_first.to_json_obj(),
            "eta_second": self.eta_second.to_json_obj(),
            "eta_third": self.eta_third.to_json_obj(),
            "achieved": render_decimal(self.achieved),
            "target": self.target,
            "phase_case": self.phase_case,
            "shrink_steps": self.shrink_steps,
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_json_obj(cls, obj):
        if not isinstance(obj, dict):
            raise ParseError("stage record payload must be an object")
        try:
            bits = check_precision(int(obj["precision_bits"]))
            return cls(
                stage=int(obj["stage"]),
                eta_first=ApComplex.from_json_obj(obj["eta_first"], bits),
                eta_second=ApComplex.from_json_obj(obj["eta_second"], bits),
                eta_third=ApComplex.from_json_obj(obj["eta_third"], bits),
                achieved=parse_decimal(obj["achieved"], bits),
                target=int(obj["target"]),
                phase_case=str(obj["phase_case"]),
                shrink_steps=int(obj["shrink_steps"]),
                precision_bits=bits,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("malformed stage record: %s" % (exc,))


def _axis_of(node):
    if node.im == 0:
        return "real"
    if node.re == 0:
        return "imaginary"
    return "off-axis"


@dataclass(frozen=True)
class AdversarialSequence:
    """Axis node sequence with one growth certificate per stage.

    Stage s occupies nodes 3s-2, 3s-1, 3s (1-based) and certifies that the
    order 3s-1 divided difference of the kernel over the first 3s nodes has
    magnitude at least s^s. Every node lies exactly on an axis, each
    stage's leading node drops strictly below all earlier moduli and below
    1/(3s-2), and the paired nodes stay strictly inside the leading one.
    """

    nodes: NodeSequence
    stage_log: tuple
    kernel_kind: str
    precision_bits: int

    @property
    def stages(self):
        return len(self.stage_log)

    def axis_tags(self):
        return tuple(_axis_of(n) for n in self.nodes)

    def to_json_obj(self):
        entries = []
        for node in self.nodes:
            entry = node.to_json_obj()
            entry["axis"] = _axis_of(node)
            entries.append(entry)
        return {
            "kernel": self.kernel_kind,
            "precision_bits": self.precision_bits,
            "nodes": entries,
            "stage_log": [rec.to_json_obj() for rec in self.stage_log],
        }

    @classmethod
    def from_json_obj(cls, obj):
        if not isinstance(obj, dict) or "nodes" not in obj:
            raise ParseError("sequence payload must contain nodes")
        bits = check_precision(int(obj.get("precision_bits", DEFAULT_PRECISION)))
        nodes = NodeSequence.from_json_obj({"nodes": obj["nodes"]}, bits)
        log = tuple(
            StageRecord.from_json_obj(rec) for rec in obj.get("stage_log", ())
        )
        kind = str(obj.get("kernel", "conjugate-kernel"))
        return cls(nodes=nodes, stage_log=log, kernel_kind=kind, precision_bits=bits)


class _NeedMoreBits(Exception):
    """Internal signal: retry the stage at doubled working precision."""


def _cancellation_estimate(nodes, bits):
    """Sum of |log2 gap| over node pairs, a proxy for subtraction losses."""
    with workprec(bits):
        zs = [n.to_mpc() for n in nodes]
        total = mpf(0)
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                total += abs(mpmath.log(abs(zs[i] - zs[j]), 2))
    return total


def _power_of_two_below(value):
    """Largest power of two at most value/2; strict bounds stay strict."""
    _, exponent = mpmath.frexp(value)
    return mpmath.ldexp(1, exponent - 2)


def _run_stage(f, prev_nodes, stage, bits, policy):
    """One stage at fixed working precision; raises _NeedMoreBits on stall."""
    p = stage - 1
    target = stage**stage
    with workprec(bits):
        prev = [n.at_precision(bits) for n in prev_nodes]
        moduli = [n.magnitude() for n in prev]
        cap = mpf(1) / (3 * p + 1)
        if moduli:
            cap = min(cap, min(moduli))
        lead = _power_of_two_below(cap)
        cd_zero = abs(mpc(f.conj_derivative(mpc(0))))
        scale = mpf(1)
        for m in moduli:
            scale = scale * m
        # |d_zbar| of the one-node extension is cd_zero / (scale * lead) by
        # the product formula; each halving doubles it, so this terminates
        while cd_zero / (scale * lead) < target + 1:
            lead = lead / 2
        eta_first = ApComplex(lead, 0, bits)
        active = prev + [eta_first]

        wirt = wirtinger_at_zero(f, active, precision_bits=bits)
        d_z = wirt.d_z.to_mpc()
        d_zbar = wirt.d_zbar.to_mpc()
        band = mpmath.ldexp(1, -(bits // 4))
        phase_case = "real-pair"
        theta = mpf(0)
        if d_z != 0:
            ratio = d_z / d_zbar
            unit = ratio / abs(ratio)
            if abs(unit - 1) < band:
                phase_case = "real-pair"
            elif abs(unit + 1) < band:
                phase_case = "imaginary-pair"
            else:
                phase_case = "split-pair"
                theta = mpmath.arg(ratio)
        cos_half = mpmath.cos(theta / 2)
        sin_half = mpmath.sin(theta / 2)

        radius = lead / 2
        for step in range(policy.shrink_budget):
            if phase_case == "real-pair":
                second = ApComplex(radius, 0, bits)
                third = ApComplex(-radius, 0, bits)
            elif phase_case == "imaginary-pair":
                second = ApComplex(0, radius, bits)
                third = ApComplex(0, -radius, bits)
            else:
                second = ApComplex(radius * cos_half, 0, bits)
                third = ApComplex(0, radius * sin_half, bits)
            candidate = active + [second, third]
            if _cancellation_estimate(candidate, bits) > mpf(bits) / 2:
                raise _NeedMoreBits
            achieved = delta(f, candidate, 3 * p + 2, bits).magnitude()
            if achieved >= target:
                record = StageRecord(
                    stage=stage,
                    eta_first=eta_first,
                    eta_second=second,
                    eta_third=third,
                    achieved=achieved,
                    target=target,
                    phase_case=phase_case,
                    shrink_steps=step,
                    precision_bits=bits,
                )
                return record, [eta_first, second, third]
            radius = radius / 2
    raise _NeedMoreBits


def build_sequence(f, stages, policy=None):
    """Grow `stages` three-node stages, each verifying its target directly.

    Stage s picks a leading axis node small enough that the closed-form
    anti-holomorphic derivative of the extended divided difference clears
    s^s + 1, classifies the phase of d_z / d_zbar into a real pair, an
    imaginary pair, or a split real/imaginary pair at half the phase, and
    shrinks the pair radius until the order 3s-1 divided difference over
    all nodes so far has magnitude at least s^s. Raises
    UnsuitableKernelError when the kernel's conjugate derivative vanishes
    at 0 and ConstructionFailureError, carrying the completed stage log,
    when precision escalation exhausts policy.max_bits.
    """
    if policy is None:
        policy = EscalationPolicy()
    if not isinstance(policy, EscalationPolicy):
        raise ConfigError("policy must be an EscalationPolicy")
    if not isinstance(stages, int) or isinstance(stages, bool):
        raise DomainError("stages must be an integer")
    if stages < 1:
        raise DomainError("stages must be at least 1")
    if not isinstance(f, ScalarFunction):
        raise ConfigError("build_sequence needs a ScalarFunction kernel")
    if f.conj_derivative is None:
        raise ConfigError("kernel lacks a closed-form conjugate derivative")
    bits = policy.start_bits
    with workprec(bits):
        if mpc(f.conj_derivative(mpc(0))) == 0:
            raise UnsuitableKernelError(
                "conjugate derivative vanishes at 0, so the one-node "
                "extension has no anti-holomorphic growth to amplify"
            )
    nodes = []
    log = []
    for stage in range(1, stages + 1):
        while True:
            try:
                record, trio = _run_stage(f, nodes, stage, bits, policy)
            except _NeedMoreBits:
                bits = bits * 2
                if bits > policy.max_bits:
                    raise ConstructionFailureError(
                        "stage %d stalled at the precision ceiling of %d bits"
                        % (stage, policy.max_bits),
                        tuple(log),
                    )
                continue
            break
        nodes.extend(trio)
        log.append(record)
    sequence = NodeSequence([n.at_precision(bits) for n in nodes], bits)
    return AdversarialSequence(
        nodes=sequence,
        stage_log=tuple(log),
        kernel_kind=f.kind,
        precision_bits=bits,
    )


@dataclass(frozen=True)
class GrowthRow:
    """One recomputed stage certificate (1-based stage index)."""

    stage: int
    achieved: mpf
    target: int
    passed: bool
    note: str
    precision_bits: int


@dataclass(frozen=True)
class GrowthReport:
    """Recomputed stage certificates plus structural invariant checks."""

    rows: tuple

    @property
    def all_passed(self):
        return all(row.passed for row in self.rows)

    def to_csv_text(self):
        out = io.StringIO()
        out.write("p,achieved,target,precision_bits\n")
        for row in self.rows:
            out.write(
                "%d,%s,%d,%d\n"
                % (
                    row.stage,
                    render_decimal(row.achieved),
                    row.target,
                    row.precision_bits,
                )
            )
        return out.getvalue()

    def to_json_obj(self):
        return {
            "rows": [
                {
                    "stage": row.stage,
                    "achieved": render_decimal(row.achieved),
                    "target": row.target,
                    "passed": row.passed,
                    "note": row.note,
                    "precision_bits": row.precision_bits,
                }
                for row in self.rows
            ],
            "all_passed": self.all_passed,
        }


def verify_growth(seq, f):
    """Recheck every stage certificate and structural invariant from scratch.

    Each stage is recomputed with a fresh divided-difference table at the
    logged precision plus 64 guard bits. Structural violations (missing
    nodes, off-axis members, broken modulus ordering) mark the stage failed
    with an explanatory note even when the magnitude clears the target.
    """
    if not isinstance(seq, AdversarialSequence):
        raise ConfigError("verify_growth needs an AdversarialSequence")
    rows = []
    available = len(seq.nodes)
    for rec in seq.stage_log:
        stage = rec.stage
        target = stage**stage
        bits = rec.precision_bits + 64
        needed = 3 * stage
        if needed > available:
            rows.append(
                GrowthRow(stage, mpf(0), target, False, "missing stage nodes", bits)
            )
            continue
        notes = []
        with workprec(bits):
            # a product of nonzero mpf values never rounds to zero, so the
            # axis test is exact
            for offset in range(3):
                node = seq.nodes[needed - 3 + offset]
                if node.re * node.im != 0:
                    notes.append("node %d off-axis" % (needed - 2 + offset))
            moduli = [abs(mpc(n.re, n.im)) for n in seq.nodes[:needed]]
            lead = moduli[needed - 3]
            if not (0 < moduli[needed - 2] < lead and 0 < moduli[needed - 1] < lead):
                notes.append("pair moduli not inside the stage opening")
            earlier = moduli[: needed - 3]
            if earlier and not lead < min(earlier):
                notes.append("stage opening not below earlier moduli")
            if not lead < mpf(1) / (3 * stage - 2):
                notes.append("stage opening at or above 1/(3s-2)")
            table = delta_table(
                f,
                NodeSequence(
                    [n.at_precision(bits) for n in seq.nodes[:needed]], bits
                ),
                bits,
            )
            achieved = abs(table.entry_raw(needed - 1, 0))
        passed = not notes and achieved >= target
        rows.append(GrowthRow(stage, achieved, target, passed, "; ".join(notes), bits))
    return GrowthReport(tuple(rows))
