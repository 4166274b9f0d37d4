"""Classical side: chain-member expressions on deterministic assignments.

An assignment fixes every local variable ``e_k`` and ``e'_k`` to 0 or 1, i.e.
it is a vertex of the local-hidden-variable polytope.  LHV expectations are
convex combinations of vertex values, so exhaustive vertex enumeration gives
exact classical bounds.

Assignments are packed into a single ``2n``-bit integer word.  The high ``n``
bits hold ``e_1 .. e_n`` and the low ``n`` bits hold ``e'_1 .. e'_n``; within
each half qubit 1 is the most significant bit.  Enumeration always runs in
ascending word order, and ties are broken in favour of the smallest word.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, InvalidMemberError, ResourceLimitError, ValidationError

DEFAULT_CAP = 12
CHUNK_BITS = 20

FACTORS = ("e", "ebar", "ep", "epbar")
CHAIN_KINDS = ("X", "Xij", "Xijk", "Xijkl")
KINDS = CHAIN_KINDS + ("Custom",)
_INDEX_COUNT = {"X": 0, "Xij": 2, "Xijk": 3, "Xijkl": 4}
_MIN_N = {"X": 2, "Xij": 3, "Xijk": 4, "Xijkl": 5}

# A term is (sign, ((qubit, factor), ...)) with 1-based qubits.
Term = tuple[int, tuple[tuple[int, str], ...]]


@dataclass(frozen=True)
class Assignment:
    """One deterministic value for each ``e_k`` and ``e'_k``."""

    n: int
    bits_e: tuple[int, ...]
    bits_ep: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if len(self.bits_e) != self.n or len(self.bits_ep) != self.n:
            raise DimensionError("bit vectors must both have length n")
        if any(b not in (0, 1) for b in self.bits_e + self.bits_ep):
            raise ValidationError("assignment bits must be 0 or 1")

    @classmethod
    def from_word(cls, n: int, word: int) -> Assignment:
        if not 0 <= word < 1 << (2 * n):
            raise ValidationError(f"word {word} out of range for n={n}")
        e = tuple((word >> (2 * n - q)) & 1 for q in range(1, n + 1))
        ep = tuple((word >> (n - q)) & 1 for q in range(1, n + 1))
        return cls(n, e, ep)

    @classmethod
    def constant(cls, n: int, bit: int) -> Assignment:
        return cls(n, (bit,) * n, (bit,) * n)

    @property
    def word(self) -> int:
        w = 0
        for b in self.bits_e + self.bits_ep:
            w = (w << 1) | b
        return w

    def value(self, qubit: int, factor: str) -> int:
        if factor == "e":
            return self.bits_e[qubit - 1]
        if factor == "ebar":
            return 1 - self.bits_e[qubit - 1]
        if factor == "ep":
            return self.bits_ep[qubit - 1]
        if factor == "epbar":
            return 1 - self.bits_ep[qubit - 1]
        raise ValidationError(f"unknown factor {factor!r}")

    def to_bitstring(self) -> str:
        e = "".join(map(str, self.bits_e))
        ep = "".join(map(str, self.bits_ep))
        return f"e={e}|e'={ep}"

    @classmethod
    def from_bitstring(cls, text: str) -> Assignment:
        m = re.fullmatch(r"\s*e=([01]+)\|e'=([01]+)\s*", text)
        if not m or len(m.group(1)) != len(m.group(2)):
            raise ValidationError(f"bad assignment string {text!r}")
        e, ep = m.groups()
        return cls(len(e), tuple(map(int, e)), tuple(map(int, ep)))


def _check_term(term, n: int) -> Term:
    try:
        sign, factors = term
    except (TypeError, ValueError):
        raise InvalidMemberError(f"term must be (sign, factors), got {term!r}") from None
    if sign not in (1, -1):
        raise InvalidMemberError(f"term sign must be +1 or -1, got {sign!r}")
    seen = set()
    out = []
    for q, f in factors:
        if f not in FACTORS:
            raise InvalidMemberError(f"unknown factor {f!r}")
        if not 1 <= q <= n:
            raise InvalidMemberError(f"qubit {q} outside [1, {n}]")
        if q in seen:
            # e_q and e'_q are never measured together on one qubit
            raise InvalidMemberError(f"qubit {q} appears twice in one term")
        seen.add(q)
        out.append((int(q), f))
    return int(sign), tuple(sorted(out))


@dataclass(frozen=True)
class ChainMember:
    """One inequality of the chain: X, X_ij, X_ijk, X_ijkl or a custom term sum."""

    kind: str
    n: int
    indices: tuple[int, ...] = ()
    custom_terms: tuple[Term, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if self.kind not in KINDS:
            raise InvalidMemberError(f"unknown member kind {self.kind!r}")
        if self.n < 1:
            raise InvalidMemberError(f"n must be >= 1, got {self.n}")
        if self.kind == "Custom":
            if self.indices:
                raise InvalidMemberError("custom members take no indices")
            if not self.custom_terms:
                raise InvalidMemberError("custom member needs at least one term")
            terms = tuple(_check_term(t, self.n) for t in self.custom_terms)
            object.__setattr__(self, "custom_terms", terms)
            return
        if self.custom_terms is not None:
            raise InvalidMemberError(f"{self.kind} does not accept custom terms")
        need = _INDEX_COUNT[self.kind]
        if len(self.indices) != need:
            raise InvalidMemberError(f"{self.kind} needs {need} indices, got {self.indices}")
        if self.n < _MIN_N[self.kind]:
            raise InvalidMemberError(f"{self.kind} needs n >= {_MIN_N[self.kind]}, got n={self.n}")
        chain = (0,) + self.indices + (self.n,)
        if any(a >= b for a, b in zip(chain, chain[1:])):
            raise InvalidMemberError(
                f"{self.kind} indices must satisfy 1 <= i < j < ... < n, got {self.indices} with n={self.n}"
            )

    @property
    def upper_bound(self) -> int | None:
        """Closed-form classical maximum; ``None`` for custom members."""
        return {"X": self.n - 1, "Xij": self.n - 2, "Xijk": self.n - 2, "Xijkl": self.n - 3}.get(self.kind)

    def terms(self) -> tuple[Term, ...]:
        if self.kind == "Custom":
            return self.custom_terms
        return chain_terms(self.kind, self.n, self.indices)

    @property
    def label(self) -> str:
        if self.kind == "Custom":
            return f"Custom[{format_terms(self.custom_terms)}]@n={self.n}"
        if self.kind == "X":
            return f"X@n={self.n}"
        return f"{self.kind}({','.join(map(str, self.indices))})@n={self.n}"

    def __str__(self):
        return self.label


def _full(n: int, fixed: dict[int, str], rest: str = "ep") -> tuple[tuple[int, str], ...]:
    return tuple((q, fixed.get(q, rest)) for q in range(1, n + 1))


def chain_terms(kind: str, n: int, indices: Sequence[int] = ()) -> tuple[Term, ...]:
    """Signed product terms of a chain member, all of them full n-fold products.

    The first two terms are always ``+prod ebar_k`` and ``-prod e'_k``; the
    remaining positive terms are the probabilities that Hardy-type arguments
    require to vanish.
    """
    terms: list[Term] = [
        (1, tuple((q, "ebar") for q in range(1, n + 1))),
        (-1, tuple((q, "ep") for q in range(1, n + 1))),
    ]
    if kind == "X":
        skip: tuple[int, ...] = ()
    elif kind == "Xij":
        i, j = indices
        terms.append((1, _full(n, {i: "e", j: "ebar"})))
        skip = (i,)
    elif kind == "Xijk":
        i, j, k = indices
        terms.append((1, _full(n, {i: "e", j: "ebar", k: "ebar"})))
        skip = (i,)
    elif kind == "Xijkl":
        i, j, k, l = indices
        terms.append((1, _full(n, {i: "e", j: "ebar"})))
        terms.append((1, _full(n, {k: "e", l: "ebar"})))
        skip = (i, k)
    else:
        raise InvalidMemberError(f"no built-in terms for kind {kind!r}")
    for p in range(1, n + 1):
        if p not in skip:
            terms.append((1, _full(n, {p: "e"})))
    return tuple(terms)


_FACTOR_TEXT = {"e": "e{}", "ebar": "ebar{}", "ep": "ep{}", "epbar": "epbar{}"}


def format_terms(terms: Sequence[Term]) -> str:
    parts = []
    for sign, factors in terms:
        body = "*".join(_FACTOR_TEXT[f].format(q) for q, f in factors) or "1"
        parts.append(("+" if sign > 0 else "-") + body)
    return ";".join(parts)


def parse_terms(text: str) -> tuple[Term, ...]:
    terms = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        sign = -1 if chunk[0] == "-" else 1
        body = chunk.lstrip("+-")
        factors = []
        if body != "1":
            for tok in body.split("*"):
                m = re.fullmatch(r"(epbar|ebar|ep|e)(\d+)", tok.strip())
                if not m:
                    raise InvalidMemberError(f"bad factor {tok!r}")
                factors.append((int(m.group(2)), m.group(1)))
        terms.append((sign, tuple(factors)))
    return tuple(terms)


_MEMBER_RE = re.compile(r"\s*(Xijkl|Xijk|Xij|X)(?:\(([\d,\s]*)\))?\s*@\s*n\s*=\s*(\d+)\s*")
_CUSTOM_RE = re.compile(r"\s*Custom\[(.*)\]\s*@\s*n\s*=\s*(\d+)\s*")


def parse_member(text: str) -> ChainMember:
    """Inverse of ``ChainMember.label``: ``X@n=3``, ``Xij(1,2)@n=5``, ``Custom[-ep1*ep2]@n=2``."""
    m = _CUSTOM_RE.fullmatch(text)
    if m:
        return ChainMember("Custom", int(m.group(2)), custom_terms=parse_terms(m.group(1)))
    m = _MEMBER_RE.fullmatch(text)
    if not m:
        raise InvalidMemberError(f"cannot parse chain member {text!r}")
    kind, idx, n = m.groups()
    indices = tuple(int(s) for s in idx.split(",") if s.strip()) if idx else ()
    return ChainMember(kind, int(n), indices)


# ---------------------------------------------------------------------------
# single-assignment evaluation


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def term_value(term: Term, a: Assignment) -> int:
    sign, factors = term
    return sign * _prod(a.value(q, f) for q, f in factors)


def eval_chain_member(member: ChainMember, a: Assignment) -> int:
    """Exact integer value of the member at one assignment.

    Built-in kinds are evaluated straight from their defining products, not
    from ``member.terms()``, so this doubles as a check on the term lists.
    """
    if a.n != member.n:
        raise DimensionError(f"assignment has n={a.n}, member has n={member.n}")
    if member.kind == "Custom":
        return sum(term_value(t, a) for t in member.terms())

    n = member.n
    e, ep = a.bits_e, a.bits_ep
    ebar = tuple(1 - x for x in e)
    qs = range(n)

    def primes_except(*skip):
        return _prod(ep[k] for k in qs if k not in skip)

    value = _prod(ebar) - _prod(ep)
    if member.kind == "X":
        return value + sum(e[i] * primes_except(i) for i in qs)
    if member.kind == "Xij":
        i, j = (x - 1 for x in member.indices)
        value += e[i] * ebar[j] * primes_except(i, j)
        return value + sum(e[l] * primes_except(l) for l in qs if l != i)
    if member.kind == "Xijk":
        i, j, k = (x - 1 for x in member.indices)
        value += e[i] * ebar[j] * ebar[k] * primes_except(i, j, k)
        return value + sum(e[l] * primes_except(l) for l in qs if l != i)
    i, j, k, l = (x - 1 for x in member.indices)
    value += e[i] * ebar[j] * primes_except(i, j)
    value += e[k] * ebar[l] * primes_except(k, l)
    return value + sum(e[p] * primes_except(p) for p in qs if p not in (i, k))


# ---------------------------------------------------------------------------
# vectorised enumeration


def _bit_pos(n: int, qubit: int, factor: str) -> int:
    return (2 * n - qubit) if factor in ("e", "ebar") else (n - qubit)


def term_masks(terms: Sequence[Term], n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-term (mask, required value, sign) so that term(w) = sign * ((w & mask) == value)."""
    masks, values, signs = [], [], []
    for sign, factors in terms:
        mask = value = 0
        for q, f in factors:
            bit = 1 << _bit_pos(n, q, f)
            mask |= bit
            if f in ("e", "ep"):
                value |= bit
        masks.append(mask)
        values.append(value)
        signs.append(sign)
    return (np.array(masks, dtype=np.int64), np.array(values, dtype=np.int64),
            np.array(signs, dtype=np.int64))


def evaluate_words(terms: Sequence[Term], n: int, words: np.ndarray) -> np.ndarray:
    """Member value at every word in ``words`` (int64 array)."""
    masks, values, signs = term_masks(terms, n)
    out = np.zeros(words.shape, dtype=np.int64)
    for mask, value, sign in zip(masks, values, signs):
        hit = (words & mask) == value
        if sign > 0:
            out += hit
        else:
            out -= hit
    return out


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds enumeration cap {cap} (2^{2 * n} assignments)")


def _chunks(total: int, chunk: int) -> Iterator[tuple[int, int]]:
    for start in range(0, total, chunk):
        yield start, min(start + chunk, total)


class LhvBounds(NamedTuple):
    min: int
    max: int
    min_witness: Assignment
    max_witness: Assignment


def _extremes(terms, n, start, stop):
    words = np.arange(start, stop, dtype=np.int64)
    vals = evaluate_words(terms, n, words)
    lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
    return int(vals[lo]), start + lo, int(vals[hi]), start + hi


def lhv_bounds_bruteforce(member: ChainMember, cap: int = DEFAULT_CAP,
                          chunk_bits: int = CHUNK_BITS, workers: int = 1) -> LhvBounds:
    """Exact min and max of the member over all ``4**n`` assignments.

    The word range is split into chunks of ``2**chunk_bits`` that may be
    processed by ``workers`` threads; the reduction keeps the smallest word
    among equal extremes, so the answer does not depend on the split.
    """
    n = member.n
    _check_cap(n, cap)
    terms = member.terms()
    spans = list(_chunks(1 << (2 * n), 1 << chunk_bits))
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda s: _extremes(terms, n, *s), spans))
    else:
        parts = [_extremes(terms, n, *s) for s in spans]
    lo_val, lo_word = min((p[0], p[1]) for p in parts)
    hi_val, hi_word = max(parts, key=lambda p: (p[2], -p[3]))[2:]
    return LhvBounds(lo_val, hi_val, Assignment.from_word(n, lo_word), Assignment.from_word(n, hi_word))


class CheckResult(NamedTuple):
    ok: bool
    witness: Assignment | None = None


def master_identity_check(n: int, cap: int = DEFAULT_CAP) -> CheckResult:
    """Check both halves of the master identity at every assignment.

    (a) prod ebar - prod e' == (1 - prod e') prod ebar - (1 - prod ebar) prod e'
    (b) 1 - prod ebar == e_n + sum_{i<n} e_i prod_{j>i} ebar_j
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    _check_cap(n, cap)
    e_mask = ((1 << n) - 1) << n
    ep_mask = (1 << n) - 1
    for start, stop in _chunks(1 << (2 * n), 1 << CHUNK_BITS):
        w = np.arange(start, stop, dtype=np.int64)
        all_ebar = ((w & e_mask) == 0).astype(np.int64)
        all_ep = ((w & ep_mask) == ep_mask).astype(np.int64)
        ok_a = (all_ebar - all_ep) == ((1 - all_ep) * all_ebar - (1 - all_ebar) * all_ep)

        e = [(w >> (2 * n - q)) & 1 for q in range(1, n + 1)]
        rhs = e[n - 1].copy()
        tail = np.ones_like(w)  # prod_{j>i} ebar_j, built right to left
        for i in range(n - 2, -1, -1):
            tail = tail * (1 - e[i + 1])
            rhs += e[i] * tail
        ok_b = (1 - all_ebar) == rhs

        bad = np.flatnonzero(~(ok_a & ok_b))
        if bad.size:
            return CheckResult(False, Assignment.from_word(n, start + int(bad[0])))
    return CheckResult(True)


def pointwise_chain_check(member: ChainMember, cap: int = DEFAULT_CAP,
                          upper: int | None = None) -> CheckResult:
    """True iff ``0 <= value <= U`` at every assignment.

    ``U`` defaults to the closed-form bound of the member kind.  Custom
    members have no closed form, so only non-negativity is checked unless an
    explicit ``upper`` is given.
    """
    n = member.n
    _check_cap(n, cap)
    bound = member.upper_bound if upper is None else upper
    terms = member.terms()
    for start, stop in _chunks(1 << (2 * n), 1 << CHUNK_BITS):
        w = np.arange(start, stop, dtype=np.int64)
        vals = evaluate_words(terms, n, w)
        bad = vals < 0
        if bound is not None:
            bad |= vals > bound
        idx = np.flatnonzero(bad)
        if idx.size:
            return CheckResult(False, Assignment.from_word(n, start + int(idx[0])))
    return CheckResult(True)


def lhv_expectation(member: ChainMember, distribution, cap: int = DEFAULT_CAP) -> float:
    """Average of the member under a distribution over assignments.

    ``distribution`` is either a length ``4**n`` weight array indexed by word,
    or a mapping from ``Assignment`` (or word) to weight.
    """
    n = member.n
    _check_cap(n, cap)
    size = 1 << (2 * n)
    if isinstance(distribution, dict):
        weights = np.zeros(size)
        for key, p in distribution.items():
            word = key.word if isinstance(key, Assignment) else int(key)
            if isinstance(key, Assignment) and key.n != n:
                raise DimensionError("distribution assignment has the wrong n")
            if not 0 <= word < size:
                raise ValidationError(f"word {word} out of range")
            weights[word] += p
    else:
        weights = np.asarray(distribution, dtype=float)
        if weights.shape != (size,):
            raise ValidationError(f"expected {size} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValidationError("weights must be finite and non-negative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError(f"weights sum to {weights.sum()!r}, not 1")
    vals = evaluate_words(member.terms(), n, np.arange(size, dtype=np.int64))
    return float(np.dot(vals, weights))
