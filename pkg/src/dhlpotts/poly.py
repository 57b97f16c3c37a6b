"""Dense exact polynomials with rational coefficients.

Products go through Kronecker substitution: the coefficient array is packed
into one big integer, multiplied once (GMP does the heavy lifting) and
unpacked again.  This keeps D_4, with ~44k big-integer coefficients,
within seconds.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from numbers import Rational

import gmpy2

from .numeric import DivisibilityError

__all__ = ["BivarPoly", "UnivarPoly", "kronecker_mul"]


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, Rational):
        return _norm(Fraction(c.numerator, c.denominator))
    if isinstance(c, float):
        return _norm(Fraction(c))
    raise TypeError(f"exact rational coefficient required, got {type(c).__name__}")


def _common_denominator(coeffs) -> int:
    den = 1
    for c in coeffs:
        if isinstance(c, Fraction):
            den = math.lcm(den, c.denominator)
    return den


def _pack(values, width_bytes: int) -> int:
    # values are non-negative ints below 256**width_bytes
    return int.from_bytes(b"".join(v.to_bytes(width_bytes, "little") for v in values), "little")


def kronecker_mul(a: list[int], b: list[int]) -> list[int]:
    """Product of two dense integer coefficient lists (index = degree)."""
    if not a or not b:
        return []
    na, nb = len(a), len(b)
    if min(na, nb) <= 8:
        out = [0] * (na + nb - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    bound = max(map(abs, a)) * max(map(abs, b)) * min(na, nb)
    width = (bound.bit_length() + 2 + 7) // 8
    bits = 8 * width

    def packed(seq):
        pos = _pack([x if x > 0 else 0 for x in seq], width)
        neg = _pack([-x if x < 0 else 0 for x in seq], width)
        return gmpy2.mpz(pos) - gmpy2.mpz(neg)

    prod = packed(a) * packed(b)
    n = na + nb - 1
    half = 1 << (bits - 1)
    bias = _pack([half] * n, width)
    raw = int(prod + bias).to_bytes(n * width, "little")
    return [int.from_bytes(raw[k * width:(k + 1) * width], "little") - half for k in range(n)]


def _frac_str(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


class BivarPoly:
    """Polynomial in two variables, stored as {(i, j): coefficient}.

    Instances are treated as immutable.  Coefficients are ints when
    integral and Fractions otherwise; zero coefficients are never stored.
    """

    __slots__ = ("_terms", "var_order")

    def __init__(self, terms=None, var_order=("q", "v")):
        self._terms = {}
        for k, c in (terms or {}).items():
            c = _norm(c)
            if c:
                self._terms[(int(k[0]), int(k[1]))] = c
        self.var_order = tuple(var_order)

    # --- construction helpers
    @classmethod
    def const(cls, c, var_order=("q", "v")):
        return cls({(0, 0): c}, var_order)

    @classmethod
    def var(cls, which: int, var_order=("q", "v")):
        return cls({(1, 0) if which == 0 else (0, 1): 1}, var_order)

    # --- inspection
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __getitem__(self, key):
        return self._terms.get(key, 0)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def deg_q(self) -> int:
        return max((i for i, _ in self._terms), default=-1)

    @property
    def deg_v(self) -> int:
        return max((j for _, j in self._terms), default=-1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivarPoly.const(other, self.var_order)
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "BivarPoly(0)"
        x, y = self.var_order
        parts = []
        for (i, j), c in sorted(self._terms.items(), reverse=True):
            mono = "*".join(
                s for s in (f"{x}^{i}" if i > 1 else x if i else "", f"{y}^{j}" if j > 1 else y if j else "") if s
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return "BivarPoly(" + " + ".join(parts) + ")"

    # --- arithmetic
    def _coerce(self, other):
        if isinstance(other, BivarPoly):
            return other
        return BivarPoly.const(other, self.var_order)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return BivarPoly(out, self.var_order)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: -c for k, c in self._terms.items()}, self.var_order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            c = _norm(other)
            return BivarPoly({k: v * c for k, v in self._terms.items()}, self.var_order)
        if not self._terms or not other._terms:
            return BivarPoly({}, self.var_order)
        stride = self.deg_v + other.deg_v + 1
        da, ua = self._dense(stride)
        db, ub = other._dense(stride)
        prod = kronecker_mul(da, db)
        den = ua * ub
        out = {}
        for k, c in enumerate(prod):
            if c:
                out[divmod(k, stride)] = Fraction(c, den) if den != 1 else c
        return BivarPoly(out, self.var_order)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = BivarPoly.const(1, self.var_order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _dense(self, stride: int):
        den = _common_denominator(self._terms.values())
        size = self.deg_q * stride + self.deg_v + 1
        dense = [0] * size
        for (i, j), c in self._terms.items():
            dense[i * stride + j] = int(c * den)
        return dense, den

    def shift_q(self, k: int) -> "BivarPoly":
        """Divide by q^k exactly (k may be negative to multiply)."""
        out = {}
        for (i, j), c in self._terms.items():
            if i - k < 0:
                raise DivisibilityError(f"not divisible by {self.var_order[0]}^{k}")
            out[(i - k, j)] = c
        return BivarPoly(out, self.var_order)

    # --- evaluation and specialisation
    def evaluate(self, x, y):
        """Exact value at rational (x, y); other numeric types are summed termwise."""
        if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
            return self._evaluate_exact(Fraction(x), Fraction(y))
        total = 0
        for (i, j), c in self._terms.items():
            total += c * x**i * y**j
        return total

    def _evaluate_exact(self, x: Fraction, y: Fraction) -> Fraction:
        if not self._terms:
            return Fraction(0)
        den = _common_denominator(self._terms.values())
        dq, dv = self.deg_q, self.deg_v
        a, b, c, d = x.numerator, x.denominator, y.numerator, y.denominator
        dpow = [1] * (dv + 1)
        for k in range(1, dv + 1):
            dpow[k] = dpow[k - 1] * d
        rows = {}
        for (i, j), coef in self._terms.items():
            rows.setdefault(i, {})[j] = int(coef * den)
        return self._horner_rows(rows, a, b, c, d, dq, dv, dpow) / (den * b**dq * d**dv)

    @staticmethod
    def _horner_rows(rows, a, b, c, d, dq, dv, dpow):
        bpow = [1] * (dq + 1)
        for k in range(1, dq + 1):
            bpow[k] = bpow[k - 1] * b
        total = 0
        for i in range(dq, -1, -1):
            row = rows.get(i)
            h = 0
            if row:
                for j in range(dv, -1, -1):
                    h = h * c + row.get(j, 0) * dpow[dv - j]
            total = total * a + h * bpow[dq - i]
        return Fraction(total)

    def specialize(self, which: int, value) -> "UnivarPoly":
        """Substitute ``value`` for variable ``which`` (0 or 1) exactly."""
        value = Fraction(_norm(value))
        keep = 1 - which
        size = (self.deg_v if keep else self.deg_q) + 1
        coeffs = [Fraction(0)] * max(size, 1)
        powers = {}
        for key, c in self._terms.items():
            e = key[which]
            if e not in powers:
                powers[e] = value**e
            coeffs[key[keep]] += c * powers[e]
        return UnivarPoly(coeffs, self.var_order[keep])

    # --- serialisation
    def to_json_obj(self) -> dict:
        return {
            "var_order": list(self.var_order),
            "terms": [[i, j, _frac_str(c)] for (i, j), c in sorted(self._terms.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text) -> "BivarPoly":
        obj = json.loads(text) if isinstance(text, str) else text
        return cls({(i, j): Fraction(c) for i, j, c in obj["terms"]}, obj["var_order"])


class UnivarPoly:
    """Polynomial in one variable; ``coeffs[k]`` multiplies ``var**k``."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs, var="q"):
        cs = [_norm(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.var = var

    @classmethod
    def from_roots(cls, roots, var="q"):
        p = cls([1], var)
        for r in roots:
            p = p * cls([-_norm(r), 1], var)
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UnivarPoly([other], self.var)
        if not isinstance(other, UnivarPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UnivarPoly({list(self.coeffs)!r}, var={self.var!r})"

    def __add__(self, other):
        if not isinstance(other, UnivarPoly):
            other = UnivarPoly([other], self.var)
        n = max(len(self.coeffs), len(other.coeffs))
        return UnivarPoly([self[k] + other[k] for k in range(n)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return UnivarPoly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        if not isinstance(other, UnivarPoly):
            other = UnivarPoly([other], self.var)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, UnivarPoly):
            c = _norm(other)
            return UnivarPoly([x * c for x in self.coeffs], self.var)
        if not self.coeffs or not other.coeffs:
            return UnivarPoly([], self.var)
        ua, ub = _common_denominator(self.coeffs), _common_denominator(other.coeffs)
        prod = kronecker_mul([int(c * ua) for c in self.coeffs], [int(c * ub) for c in other.coeffs])
        den = ua * ub
        return UnivarPoly([Fraction(c, den) for c in prod], self.var)

    __rmul__ = __mul__

    def evaluate(self, x):
        """Horner's rule; exact for rational x."""
        if isinstance(x, int):
            x = Fraction(x)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    __call__ = evaluate

    def derivative(self) -> "UnivarPoly":
        return UnivarPoly([k * c for k, c in enumerate(self.coeffs)][1:], self.var)

    def shift_var(self, k: int) -> "UnivarPoly":
        """Divide by var^k exactly."""
        if any(self.coeffs[:k]):
            raise DivisibilityError(f"not divisible by {self.var}^{k}")
        return UnivarPoly(self.coeffs[k:], self.var)

    def divide_linear(self, root) -> "UnivarPoly":
        """Exact division by (var - root); raises on a nonzero remainder."""
        root = _norm(root)
        out = []
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * root + c
            out.append(acc)
        rem = out.pop()
        if rem != 0:
            raise DivisibilityError(f"({self.var} - {root}) does not divide the polynomial")
        return UnivarPoly(list(reversed(out)), self.var)

    def multiplicity_at_zero(self) -> int:
        k = 0
        while k < len(self.coeffs) and self.coeffs[k] == 0:
            k += 1
        return k

    def to_json_obj(self) -> dict:
        return {
            "var_order": [self.var],
            "terms": [[k, _frac_str(c)] for k, c in enumerate(self.coeffs) if c],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text) -> "UnivarPoly":
        obj = json.loads(text) if isinstance(text, str) else text
        deg = max((k for k, _ in obj["terms"]), default=-1)
        coeffs = [Fraction(0)] * (deg + 1)
        for k, c in obj["terms"]:
            coeffs[k] = Fraction(c)
        return cls(coeffs, obj["var_order"][0])
