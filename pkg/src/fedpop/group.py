"""Prime-order group arithmetic.

The group G is the secp256k1 curve group (y^2 = x^3 + 7 over F_p), which has
prime order q and cofactor 1, so every on-curve point other than the identity
is a generator-power and no subgroup checks beyond curve membership are
needed.  Scalars live in Z_q.  Internally points are manipulated in Jacobian
coordinates over gmpy2 integers; the public API deals in affine points with
canonical 33-byte compressed encodings and plain Python ints for scalars.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from gmpy2 import invert as _gmpy_invert
from gmpy2 import mpz

from .errors import DeserializationError, MembershipError, ParameterError

# Field and group parameters (SEC2 secp256k1).
P = 2**256 - 2**32 - 977
Q = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_B = 7
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

ELEMENT_BYTES = 33  # compressed SEC1: parity prefix + 32-byte x
SCALAR_BYTES = 32

_P = mpz(P)
_INF = (mpz(0), mpz(1), mpz(0))  # Jacobian identity


# ---------------------------------------------------------------------------
# Scalar helpers (Z_q as plain ints, always reduced)

def scalar_reduce(value: int) -> int:
    return value % Q


def scalar_add(a: int, b: int) -> int:
    return (a + b) % Q


def scalar_sub(a: int, b: int) -> int:
    return (a - b) % Q


def scalar_mul(a: int, b: int) -> int:
    return (a * b) % Q


def scalar_neg(a: int) -> int:
    return (-a) % Q


def scalar_invert(a: int) -> int:
    if a % Q == 0:
        raise ParameterError("0 has no inverse mod q")
    return pow(a, -1, Q)


def scalar_to_bytes(a: int) -> bytes:
    """Fixed-width big-endian encoding of a scalar."""
    return (a % Q).to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(data: bytes) -> int:
    """Parse a canonical scalar; rejects wrong width and values >= q."""
    if len(data) != SCALAR_BYTES:
        raise DeserializationError(f"scalar must be {SCALAR_BYTES} bytes")
    value = int.from_bytes(data, "big")
    if value >= Q:
        raise DeserializationError("scalar not reduced mod q")
    return value


def scalar_from_wide_bytes(data: bytes) -> int:
    """Uniform scalar from at least 48 bytes (reduction bias < 2^-120)."""
    if len(data) < 48:
        raise ParameterError("wide reduction needs >= 48 bytes")
    return int.from_bytes(data, "big") % Q


# ---------------------------------------------------------------------------
# Jacobian curve arithmetic (internal)

def _jac_double(pt):
    X1, Y1, Z1 = pt
    if not Y1 or not Z1:
        return _INF
    YY = Y1 * Y1 % _P
    S = 4 * X1 * YY % _P
    M = 3 * X1 * X1 % _P
    X3 = (M * M - 2 * S) % _P
    Y3 = (M * (S - X3) - 8 * YY * YY) % _P
    Z3 = 2 * Y1 * Z1 % _P
    return (X3, Y3, Z3)


def _jac_add(p1, p2):
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    if not Z1:
        return p2
    if not Z2:
        return p1
    Z1Z1 = Z1 * Z1 % _P
    Z2Z2 = Z2 * Z2 % _P
    U1 = X1 * Z2Z2 % _P
    U2 = X2 * Z1Z1 % _P
    S1 = Y1 * Z2 * Z2Z2 % _P
    S2 = Y2 * Z1 * Z1Z1 % _P
    H = (U2 - U1) % _P
    r = (S2 - S1) % _P
    if H == 0:
        if r == 0:
            return _jac_double(p1)
        return _INF
    HH = H * H % _P
    HHH = H * HH % _P
    V = U1 * HH % _P
    X3 = (r * r - HHH - 2 * V) % _P
    Y3 = (r * (V - X3) - S1 * HHH) % _P
    Z3 = Z1 * Z2 * H % _P
    return (X3, Y3, Z3)


def _jac_mul(pt, k: int):
    k %= Q
    acc = _INF
    add = pt
    while k:
        if k & 1:
            acc = _jac_add(acc, add)
        add = _jac_double(add)
        k >>= 1
    return acc


def _to_affine(pt):
    X, Y, Z = pt
    if not Z:
        return None
    zi = _gmpy_invert(Z, _P)
    zi2 = zi * zi % _P
    return (X * zi2 % _P, Y * zi2 * zi % _P)


# Fixed-base 4-bit windows: g^k touches at most 64 precomputed rows.
_BASE_TABLES: list[list[tuple]] = []


def _build_base_tables() -> None:
    base = (mpz(_GX), mpz(_GY), mpz(1))
    for _ in range(64):
        row = [_INF]
        for _ in range(15):
            row.append(_jac_add(row[-1], base))
        _BASE_TABLES.append(row)
        for _ in range(4):
            base = _jac_double(base)


_build_base_tables()


def _base_mul(k: int):
    k %= Q
    acc = _INF
    w = 0
    while k:
        nib = k & 15
        if nib:
            acc = _jac_add(acc, _BASE_TABLES[w][nib])
        k >>= 4
        w += 1
    return acc


# ---------------------------------------------------------------------------
# Public point type

class GroupElement:
    """An element of G, held in affine form.  Immutable and hashable.

    The identity is representable in memory (x = y = None) so that sums can
    pass through it, but it never appears in canonical wire encodings unless
    a caller explicitly allows it.
    """

    __slots__ = ("_x", "_y")

    def __init__(self, x, y):
        self._x = x
        self._y = y

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(None, None)

    @classmethod
    def from_bytes(cls, data: bytes, allow_identity: bool = False) -> "GroupElement":
        """Decode a compressed point, rejecting anything not in G."""
        if len(data) != ELEMENT_BYTES:
            raise DeserializationError(f"group element must be {ELEMENT_BYTES} bytes")
        if data == b"\x00" * ELEMENT_BYTES:
            if allow_identity:
                return cls.identity()
            raise MembershipError("identity element rejected")
        prefix = data[0]
        if prefix not in (2, 3):
            raise DeserializationError("bad compression prefix")
        x = int.from_bytes(data[1:], "big")
        if x >= P:
            raise DeserializationError("x coordinate out of field range")
        y_sq = (pow(x, 3, P) + _B) % P
        y = pow(y_sq, (P + 1) // 4, P)
        if y * y % P != y_sq:
            raise DeserializationError("x coordinate not on curve")
        if (y & 1) != (prefix & 1):
            y = P - y
        return cls(mpz(x), mpz(y))

    # -- encoding ------------------------------------------------------------

    def to_bytes(self) -> bytes:
        if self._x is None:
            return b"\x00" * ELEMENT_BYTES
        prefix = b"\x03" if (self._y & 1) else b"\x02"
        return prefix + int(self._x).to_bytes(32, "big")

    # -- predicates ----------------------------------------------------------

    @property
    def is_identity(self) -> bool:
        return self._x is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self._x == other._x and self._y == other._y

    def __hash__(self) -> int:
        return hash((None if self._x is None else int(self._x),
                     None if self._y is None else int(self._y)))

    def __repr__(self) -> str:
        if self.is_identity:
            return "GroupElement(identity)"
        return f"GroupElement({self.to_bytes().hex()})"

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self._x is None:
            return other
        if other._x is None:
            return self
        if self._x == other._x:
            if self._y == other._y:
                return self._double()
            return GroupElement.identity()
        # affine chord addition
        lam = (other._y - self._y) * _gmpy_invert(other._x - self._x, _P) % _P
        x3 = (lam * lam - self._x - other._x) % _P
        y3 = (lam * (self._x - x3) - self._y) % _P
        return GroupElement(x3, y3)

    def _double(self) -> "GroupElement":
        lam = 3 * self._x * self._x * _gmpy_invert(2 * self._y, _P) % _P
        x3 = (lam * lam - 2 * self._x) % _P
        y3 = (lam * (self._x - x3) - self._y) % _P
        return GroupElement(x3, y3)

    def __neg__(self) -> "GroupElement":
        if self._x is None:
            return self
        return GroupElement(self._x, (-self._y) % _P)

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __mul__(self, k: int) -> "GroupElement":
        if not isinstance(k, int):
            return NotImplemented
        k %= Q
        if k == 0 or self._x is None:
            return GroupElement.identity()
        pt = _to_affine(_jac_mul((self._x, self._y, mpz(1)), k))
        if pt is None:
            return GroupElement.identity()
        return GroupElement(pt[0], pt[1])

    __rmul__ = __mul__


GENERATOR = GroupElement(mpz(_GX), mpz(_GY))


def generator_pow(k: int) -> GroupElement:
    """g^k via the precomputed fixed-base tables."""
    k %= Q
    if k == 0:
        return GroupElement.identity()
    pt = _to_affine(_base_mul(k))
    return GroupElement(pt[0], pt[1])


def hash_to_group(data: bytes, tag: bytes = b"fedpop/H1") -> GroupElement:
    """Deterministic map from bytes to a non-identity element of G.

    Try-and-increment: candidate x coordinates are drawn from a counter-mode
    hash stream until one lies on the curve; the parity bit of the same draw
    selects the y root.  Roughly two draws on average.  Not constant time,
    which is acceptable for inputs that are public protocol values.
    """
    counter = 0
    while True:
        h = hashlib.sha256()
        h.update(len(tag).to_bytes(4, "big"))
        h.update(tag)
        h.update(counter.to_bytes(4, "big"))
        h.update(data)
        digest = h.digest()
        counter += 1
        x = int.from_bytes(digest, "big") % P
        y_sq = (pow(x, 3, P) + _B) % P
        y = pow(y_sq, (P + 1) // 4, P)
        if y * y % P != y_sq:
            continue
        if digest[0] & 1:
            y = P - y
        point = GroupElement(mpz(x), mpz(y))
        if not point.is_identity:  # x = 0 is off-curve for secp256k1, but guard anyway
            return point


@dataclass(frozen=True)
class GroupParams:
    """Published description of the group every module computes over."""

    name: str = "secp256k1"
    order: int = Q
    field_prime: int = P
    element_bytes: int = ELEMENT_BYTES
    scalar_bytes: int = SCALAR_BYTES
    security_bits: int = 128

    @property
    def generator(self) -> GroupElement:
        return GENERATOR


GROUP = GroupParams()
