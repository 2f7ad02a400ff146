"""Binary linear block codes: construction, encoding, syndromes.

Supports narrow-sense BCH codes over GF(2^m) (Hamming codes are the
t = 1 special case), and explicit parity-check matrices loaded from a
plain text file.  Codes are immutable after construction and safe to
share across decoders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bitvec

# Primitive polynomials for GF(2^m), coefficient bit i = coefficient of x^i.
# GF(2^7) uses x^7 + x^3 + 1.
_PRIMITIVE_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}


class CodeError(ValueError):
    pass


def _poly_mul(a: int, b: int) -> int:
    """Carry-less product of GF(2) polynomials packed into ints."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _cyclotomic_coset(s: int, n: int) -> tuple[int, ...]:
    coset = []
    c = s
    while c not in coset:
        coset.append(c)
        c = (2 * c) % n
    return tuple(sorted(coset))


def _bch_generator_poly(m: int, t: int) -> int:
    """Narrow-sense BCH generator polynomial for designed distance 2t+1.

    g(x) = lcm of the minimal polynomials of alpha^1 .. alpha^2t, built
    from cyclotomic cosets so each minimal polynomial enters once.
    """
    n = (1 << m) - 1
    prim = _PRIMITIVE_POLY[m]
    # alpha^i as field elements (ints < 2^m)
    alpha_pow = [0] * n
    a = 1
    for i in range(n):
        alpha_pow[i] = a
        a = _poly_mod(a << 1, prim)

    def gf_mul(x: int, y: int) -> int:
        return _poly_mod(_poly_mul(x, y), prim)

    seen: set[tuple[int, ...]] = set()
    g = 1
    for s in range(1, 2 * t + 1):
        coset = _cyclotomic_coset(s, n)
        if coset in seen:
            continue
        seen.add(coset)
        # minimal polynomial: prod (x - alpha^j) over the coset, computed
        # with coefficients in GF(2^m); the result has GF(2) coefficients.
        poly = [1]  # poly[d] = coefficient of x^d, elements of GF(2^m)
        for j in coset:
            root = alpha_pow[j]
            nxt = [0] * (len(poly) + 1)
            for d, c in enumerate(poly):
                nxt[d + 1] ^= c
                nxt[d] ^= gf_mul(c, root)
            poly = nxt
        for c in poly:
            if c not in (0, 1):
                raise CodeError("minimal polynomial has non-binary coefficient")
        minpoly = bitvec.pack(poly)
        g = _poly_mul(g, minpoly)
    return g


@dataclass(frozen=True, eq=False)
class LinearCode:
    """An (n, k) binary linear code with systematic information positions.

    parity_check rows are kept both as a dense uint8 matrix (batch math)
    and as packed ints (fast per-vector syndromes); columns are packed
    ints as well for incremental single-bit syndrome updates.
    """

    n: int
    k: int
    parity_check: np.ndarray          # (n-k, n) uint8
    generator: np.ndarray             # (k, n) uint8
    d_min: int
    info_positions: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)
    # derived packed forms
    h_rows: tuple[int, ...] = field(init=False, compare=False)
    h_cols: tuple[int, ...] = field(init=False, compare=False)
    h_cols_np: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        h = self.parity_check
        r, n = h.shape
        if n != self.n or r != self.n - self.k or not (1 <= self.k < self.n):
            raise CodeError("inconsistent code dimensions")
        if self.d_min < 1:
            raise CodeError("d_min must be >= 1")
        rows = tuple(bitvec.pack(h[j]) for j in range(r))
        cols = tuple(bitvec.pack(h[:, i]) for i in range(n))
        object.__setattr__(self, "h_rows", rows)
        object.__setattr__(self, "h_cols", cols)
        object.__setattr__(self, "h_cols_np", np.array(cols, dtype=np.uint64))
        if _gf2_rank(h) != r:
            raise CodeError("parity-check matrix does not have full row rank")
        if np.any((self.generator @ h.T) % 2):
            raise CodeError("generator and parity-check are inconsistent")

    # -- encoding ---------------------------------------------------------

    def encode(self, u: np.ndarray) -> np.ndarray:
        """Encode message bits; systematic positions carry u unchanged."""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape[-1] != self.k:
            raise CodeError(f"message length {u.shape[-1]} != k={self.k}")
        return (u @ self.generator) % 2

    # -- syndromes --------------------------------------------------------

    def syndrome(self, v: np.ndarray) -> np.ndarray:
        """H @ v over GF(2); all-zero iff v is a codeword."""
        v = np.asarray(v, dtype=np.uint8)
        if v.shape[-1] != self.n:
            raise CodeError(f"vector length {v.shape[-1]} != n={self.n}")
        return (v @ self.parity_check.T) % 2

    def syndrome_int(self, v: int) -> int:
        """Syndrome of a packed bit vector, returned as a packed int."""
        s = 0
        for j, row in enumerate(self.h_rows):
            if (row & v).bit_count() & 1:
                s |= 1 << j
        return s

    def is_codeword(self, v) -> bool:
        if isinstance(v, int):
            return self.syndrome_int(v) == 0
        return not np.any(self.syndrome(v))

    def describe(self) -> str:
        base = self.meta.get("spec", f"explicit({self.n},{self.k})")
        g = self.meta.get("generator_poly")
        return f"{base};g=0x{g:x}" if g else base


def _gf2_rank(mat: np.ndarray) -> int:
    rows = [bitvec.pack(r) for r in np.asarray(mat, dtype=np.uint8)]
    rank = 0
    for col in range(mat.shape[1]):
        mask = 1 << col
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def _min_distance_bruteforce(code: LinearCode) -> int:
    """Exact minimum distance by sweeping all 2^k - 1 nonzero codewords."""
    k = code.k
    if k > 24:
        raise CodeError("code too large for brute-force distance")
    best = code.n
    gen_rows = [bitvec.pack(r) for r in code.generator]
    # Gray-code sweep: one row XOR per step.
    word = 0
    prev = 0
    for m in range(1, 1 << k):
        gray = m ^ (m >> 1)
        word ^= gen_rows[(gray ^ prev).bit_length() - 1]
        prev = gray
        w = word.bit_count()
        if w < best:
            best = w
    return best


def _systematic_from_generator_poly(n: int, k: int, g: int) -> tuple[np.ndarray, np.ndarray]:
    """Systematic G = [I | P] and H = [P^T | I] for a cyclic code.

    Bit position i of a codeword carries the coefficient of x^(n-1-i), so
    the message occupies positions 0..k-1.
    """
    r = n - k
    gen = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        msg_poly = 1 << (k - 1 - i)
        c = (msg_poly << r) ^ _poly_mod(msg_poly << r, g)
        for pos in range(n):
            gen[i, pos] = (c >> (n - 1 - pos)) & 1
        assert gen[i, i] == 1
    p = gen[:, k:]
    h = np.concatenate([p.T, np.eye(r, dtype=np.uint8)], axis=1)
    return gen, h


def _build_bch(n: int, k: int, spec_name: str) -> LinearCode:
    m = n.bit_length()
    if n != (1 << m) - 1 or m not in _PRIMITIVE_POLY:
        raise CodeError(f"unsupported BCH length n={n}")
    # find t whose narrow-sense generator degree equals n - k
    for t in range(1, n // 2):
        g = _bch_generator_poly(m, t)
        deg = g.bit_length() - 1
        if deg == n - k:
            break
        if deg > n - k:
            raise CodeError(f"unsupported BCH pair ({n},{k})")
    else:
        raise CodeError(f"unsupported BCH pair ({n},{k})")
    gen, h = _systematic_from_generator_poly(n, k, g)
    return LinearCode(
        n=n,
        k=k,
        parity_check=h,
        generator=gen,
        d_min=2 * t + 1,
        info_positions=tuple(range(k)),
        meta={
            "spec": spec_name,
            "generator_poly": g,
            "primitive_poly": _PRIMITIVE_POLY[m],
            "designed_t": t,
        },
    )


def _build_from_parity(h: np.ndarray, d_min: int | None, spec_name: str) -> LinearCode:
    h = np.asarray(h, dtype=np.uint8) % 2
    r, n = h.shape
    k = n - r
    if _gf2_rank(h) != r:
        raise CodeError("explicit parity-check matrix is not full rank")
    # Gauss-Jordan on H; pivot columns become parity positions, the rest
    # are the systematic information positions.
    rows = [bitvec.pack(row) for row in h]
    pivots: list[int] = []
    rank = 0
    for col in range(n):
        mask = 1 << col
        pivot = next((i for i in range(rank, r) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(r):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        pivots.append(col)
        rank += 1
        if rank == r:
            break
    info = [c for c in range(n) if c not in pivots]
    gen = np.zeros((k, n), dtype=np.uint8)
    for gi, col in enumerate(info):
        gen[gi, col] = 1
        for ri, pcol in enumerate(pivots):
            gen[gi, pcol] = (rows[ri] >> col) & 1
    code = LinearCode(
        n=n,
        k=k,
        parity_check=h,
        generator=gen,
        d_min=d_min if d_min is not None else 1,
        info_positions=tuple(info),
        meta={"spec": spec_name},
    )
    if d_min is None and k <= 20:
        true_d = _min_distance_bruteforce(code)
        code = LinearCode(
            n=n, k=k, parity_check=h, generator=gen, d_min=true_d,
            info_positions=tuple(info), meta={"spec": spec_name},
        )
    return code


def build_code(spec: str) -> LinearCode:
    """Build a code from a descriptor.

    Accepted forms: "bch:n,k", "hamming:n,k", "file:path/to/H.txt".
    """
    spec = spec.strip()
    if ":" not in spec:
        raise CodeError(f"bad code spec {spec!r}")
    kind, _, arg = spec.partition(":")
    kind = kind.lower()
    if kind in ("bch", "hamming"):
        try:
            n_s, k_s = arg.split(",")
            n, k = int(n_s), int(k_s)
        except ValueError as e:
            raise CodeError(f"bad code spec {spec!r}") from e
        if kind == "hamming":
            m = n.bit_length()
            if n != (1 << m) - 1 or k != n - m:
                raise CodeError(f"unsupported Hamming pair ({n},{k})")
        code = _build_bch(n, k, f"{kind}({n},{k})")
        if kind == "hamming" and code.d_min != 3:
            raise CodeError("Hamming construction did not yield t=1")
        return code
    if kind == "file":
        return load_parity_file(arg)
    raise CodeError(f"unknown code kind {kind!r}")


# -- explicit matrix file format -----------------------------------------
# line 1: "n k"; then n-k lines of n characters in {0,1}.
# Lines starting with '#' after the matrix are ignored (metadata).

def save_parity_file(code: LinearCode, path: str) -> None:
    with open(path, "w") as f:
        f.write(f"{code.n} {code.k}\n")
        for row in code.parity_check:
            f.write("".join(str(int(b)) for b in row) + "\n")
        f.write(f"# d_min {code.d_min}\n")
        g = code.meta.get("generator_poly")
        if g is not None:
            f.write(f"# generator_poly 0x{g:x}\n")


def load_parity_file(path: str) -> LinearCode:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise CodeError("matrix file: first line must be 'n k'")
        n, k = int(header[0]), int(header[1])
        rows = []
        d_min = None
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "d_min":
                    d_min = int(parts[1])
                continue
            if len(line) != n or set(line) - {"0", "1"}:
                raise CodeError("matrix file: bad row line")
            rows.append([int(c) for c in line])
    if len(rows) != n - k:
        raise CodeError(f"matrix file: expected {n - k} rows, got {len(rows)}")
    return _build_from_parity(np.array(rows, dtype=np.uint8), d_min, f"file({n},{k})")
