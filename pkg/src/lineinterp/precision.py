"""Arbitrary-precision complex values with explicit per-value precision.

Every value wraps a pair of mpmath binary floats together with the precision
(in bits) it is maintained at. Arithmetic between operands of different
precision is performed, and the result reported, at the larger of the two.

Decimal I/O is exact in both directions: rendering writes the exact decimal
expansion of the stored binary value (every m * 2^e has one), and parsing
rounds the decimal to the nearest representable value (ties to even) using
integer arithmetic only. Consequently parse(render(x)) == x at equal
precision, and files written at one precision load losslessly at any higher
one.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass

import mpmath
from mpmath import mpf, mpc, workprec

from .errors import ConfigError, ParseError

MIN_PRECISION = 64
DEFAULT_PRECISION = 256

# Exact decimal expansions of deep binary values need long int->str
# conversions; lift CPython's conversion cap well clear of anything the
# supported exponent range produces.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(max(500000, sys.get_int_max_str_digits()))

_DECIMAL_RE = re.compile(r"^[+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?$")


def check_precision(bits):
    """Validate a precision request, returning it as an int."""
    if not isinstance(bits, int) or isinstance(bits, bool):
        raise ConfigError("precision_bits must be an integer")
    if bits < MIN_PRECISION:
        raise ConfigError(
            "precision_bits must be at least %d, got %d" % (MIN_PRECISION, bits)
        )
    return bits


def _round_ratio_to_bits(num, den, bits):
    """Round num/den (both positive ints) to a bits-bit float, ties to even.

    Returns (mantissa, exponent) with value mantissa * 2^exponent and
    2^(bits-1) <= mantissa < 2^bits before the final carry, which can bump the
    mantissa to the next power of two (still exactly representable).
    """
    shift = bits - (num.bit_length() - den.bit_length())
    while True:
        if shift >= 0:
            q, r = divmod(num << shift, den)
            d = den
        else:
            q, r = divmod(num, den << -shift)
            d = den << -shift
        if q.bit_length() == bits:
            break
        shift += bits - q.bit_length()
    if 2 * r > d or (2 * r == d and q & 1):
        q += 1
    return q, -shift


def parse_decimal(text, precision_bits=DEFAULT_PRECISION):
    """Parse a decimal string to the nearest mpf at the given precision."""
    bits = check_precision(precision_bits)
    if not isinstance(text, str):
        raise ParseError("expected a decimal string, got %r" % (text,))
    s = text.strip()
    if not _DECIMAL_RE.match(s):
        raise ParseError("malformed decimal string: %r" % (text,))
    negative = s.startswith("-")
    s = s.lstrip("+-")
    mant, _, exppart = s.partition("e") if "e" in s else s.partition("E")
    exp10 = int(exppart) if exppart else 0
    intpart, _, fracpart = mant.partition(".")
    digits = int(intpart + fracpart)
    exp10 -= len(fracpart)
    if digits == 0:
        return mpf(0)
    if exp10 >= 0:
        num, den = digits * 10**exp10, 1
    else:
        num, den = digits, 10**-exp10
    m, e = _round_ratio_to_bits(num, den, bits)
    # Every mpf operation, negation included, rounds at the ambient context,
    # so stay inside workprec until the value is final.
    with workprec(bits):
        value = mpmath.ldexp(mpf(m), e)
        if negative:
            value = -value
    return value


def render_decimal(x):
    """Exact decimal expansion of a finite mpf, round-trippable at any precision."""
    if isinstance(x, int):
        with workprec(max(8, x.bit_length() + 1)):
            x = mpf(x)
    elif isinstance(x, float):
        with workprec(64):
            x = mpf(x)
    elif not isinstance(x, mpf):
        raise ParseError("cannot render %r as a decimal string" % (x,))
    if not mpmath.isfinite(x):
        raise ParseError("cannot render non-finite value %r" % (x,))
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    m, e = int(x.man), int(x.exp)
    if e >= 0:
        digits = str(m << e)
        exp10 = 0
    else:
        digits = str(m * 5**-e)
        exp10 = e
    stripped = digits.rstrip("0")
    exp10 += len(digits) - len(stripped)
    # Scientific exponent if we wrote d.dddd * 10^k.
    k = len(stripped) - 1 + exp10
    if 0 <= exp10 and k < 24:
        return sign + stripped + "0" * exp10
    point = len(stripped) + exp10
    if 0 < point < len(stripped):
        return sign + stripped[:point] + "." + stripped[point:]
    if -6 < point <= 0:
        return sign + "0." + "0" * -point + stripped
    body = stripped[0] + ("." + stripped[1:] if len(stripped) > 1 else "")
    return sign + body + "e" + str(k)


@dataclass(frozen=True)
class Tolerance:
    """Comparison policy: |a - b| <= abs_eps + rel_eps * max(|a|, |b|)."""

    rel_eps: mpf
    abs_eps: mpf

    @classmethod
    def default(cls, precision_bits=DEFAULT_PRECISION):
        eps = mpmath.ldexp(1, -(check_precision(precision_bits) // 2))
        return cls(rel_eps=eps, abs_eps=eps)


class ApComplex:
    """Immutable complex value held at an explicit binary precision."""

    __slots__ = ("re", "im", "precision_bits")

    def __init__(self, re, im=0, precision_bits=DEFAULT_PRECISION):
        bits = check_precision(precision_bits)
        with workprec(bits):
            object.__setattr__(self, "re", +mpf(re))
            object.__setattr__(self, "im", +mpf(im))
        object.__setattr__(self, "precision_bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("ApComplex is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_mpc(cls, value, precision_bits=DEFAULT_PRECISION):
        bits = check_precision(precision_bits)
        # mpc() re-rounds its components at the ambient context, so convert
        # under the target precision.
        with workprec(bits):
            value = mpc(value)
        return cls(value.real, value.imag, bits)

    def to_mpc(self):
        with workprec(self.precision_bits):
            return mpc(self.re, self.im)

    def at_precision(self, bits):
        """Same value re-rounded (or exactly embedded) at another precision."""
        return ApComplex(self.re, self.im, bits)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ApComplex):
            return other
        if isinstance(other, (int, mpf)):
            return ApComplex(other, 0, self.precision_bits)
        return None

    def _binop(self, other, op):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        bits = max(self.precision_bits, rhs.precision_bits)
        with workprec(bits):
            value = op(self.to_mpc(), rhs.to_mpc())
        return ApComplex.from_mpc(value, bits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __neg__(self):
        with workprec(self.precision_bits):
            return ApComplex(-self.re, -self.im, self.precision_bits)

    def conjugate(self):
        with workprec(self.precision_bits):
            return ApComplex(self.re, -self.im, self.precision_bits)

    def magnitude(self):
        """|z| as an mpf at this value's precision."""
        with workprec(self.precision_bits):
            return mpmath.hypot(self.re, self.im)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    # -- comparison and hashing ----------------------------------------------

    def __eq__(self, other):
        rhs = self._coerce(other) if not isinstance(other, ApComplex) else other
        if rhs is None:
            return NotImplemented
        return self.re == rhs.re and self.im == rhs.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return "ApComplex(%s, %s, precision_bits=%d)" % (
            render_decimal(self.re),
            render_decimal(self.im),
            self.precision_bits,
        )

    # -- serialization ---------------------------------------------------------

    def to_json_obj(self):
        return {"re": render_decimal(self.re), "im": render_decimal(self.im)}

    @classmethod
    def from_json_obj(cls, obj, precision_bits=DEFAULT_PRECISION):
        if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
            raise ParseError("complex payload must be {'re': ..., 'im': ...}")
        return cls(
            parse_decimal(obj["re"], precision_bits),
            parse_decimal(obj["im"], precision_bits),
            precision_bits,
        )


def make_complex(re_text, im_text="0", precision_bits=DEFAULT_PRECISION):
    """Build an ApComplex from decimal strings (nearest value at the precision)."""
    return ApComplex(
        parse_decimal(re_text, precision_bits),
        parse_decimal(im_text, precision_bits),
        precision_bits,
    )


def approx_eq(a, b, tol=None):
    """True iff |a - b| <= abs_eps + rel_eps * max(|a|, |b|)."""
    if not isinstance(a, ApComplex) or not isinstance(b, ApComplex):
        raise ConfigError("approx_eq compares ApComplex values")
    bits = max(a.precision_bits, b.precision_bits)
    if tol is None:
        tol = Tolerance.default(bits)
    with workprec(bits + 16):
        gap = abs(a.to_mpc() - b.to_mpc())
        scale = max(abs(a.to_mpc()), abs(b.to_mpc()))
        return bool(gap <= mpf(tol.abs_eps) + mpf(tol.rel_eps) * scale)


def ulp(scale, precision_bits):
    """Unit in the last place at the given precision for a magnitude scale."""
    bits = check_precision(precision_bits)
    if isinstance(scale, ApComplex):
        scale = scale.magnitude()
    if not isinstance(scale, mpf):
        with workprec(64):
            scale = mpf(scale)
    if scale == 0:
        return mpf(0)
    # 2^(e-1) <= |scale| < 2^e, read off the stored mantissa and exponent.
    e = int(scale.exp) + int(scale.man).bit_length()
    return mpmath.ldexp(1, e - bits)


def ulps_apart(a, b, precision_bits=None, scale=None):
    """Distance |a - b| measured in ulps of a magnitude scale.

    The scale defaults to the larger magnitude of the two values. Callers
    checking algebraic identities should pass the largest intermediate
    magnitude so near-cancelling instances are judged on the problem scale.
    """
    if precision_bits is None:
        precision_bits = max(a.precision_bits, b.precision_bits)
    with workprec(precision_bits + 16):
        gap = abs(a.to_mpc() - b.to_mpc())
        if scale is None:
            scale = max(abs(a.to_mpc()), abs(b.to_mpc()))
        step = ulp(scale, precision_bits)
        if gap == 0:
            return mpf(0)
        if step == 0:
            return mpf("inf")
        return gap / step
