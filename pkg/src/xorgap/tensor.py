"""Paired-index 3-tensors over n qubits: sampling, norms, and binary io.

A tensor here has shape (N^2, N^2, N^2) with N = 2^n, each axis indexed by an
ordered pair (i, i') of local indices.  Grouping rows (i, j, k) against columns
(i', j', k') turns the same data into an N^3 x N^3 complex matrix; both views
are used throughout.  The central object is the randomly sampled tensor whose
matrix view is the outer product of a length-N^3 vector with itself, with every
entry killed whenever any of the three index pairs collides.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ScaleError

_MAGIC = b"XGT1"
_FLAG_RAW_G = 1

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class SamplerConfig:
    """How to draw the underlying length-N^3 vector g.

    distribution is one of "gaussian" (i.i.d. standard normals), "bernoulli"
    (i.i.d. uniform +/-1 signs) or "override" (caller supplies the raw vector).
    The same (distribution, seed, N) reproduces g, and hence the tensor,
    bit for bit.
    """

    distribution: str = "gaussian"
    seed: int = 0
    override_g: np.ndarray | None = None

    def __post_init__(self):
        if self.distribution not in ("gaussian", "bernoulli", "override"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "override" and self.override_g is None:
            raise ValueError("override distribution needs override_g")


class Tensor3:
    """Immutable N^2 x N^2 x N^2 complex tensor with its N^3 x N^3 matrix view.

    `matrix` is the canonical storage: rows are flattened (i, j, k), columns
    (i', j', k'), both row-major.  `raw_g` keeps the sampling vector when the
    tensor came out of :func:`sample_tensor`, which is what certifies the net
    upper bound on the trilinear norm.
    """

    __slots__ = ("n", "N", "matrix", "raw_g", "_eig")

    def __init__(self, n: int, matrix: np.ndarray, raw_g: np.ndarray | None = None):
        if n < 1:
            raise ValueError("n must be >= 1")
        N = 2**n
        matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
        if matrix.shape != (N**3, N**3):
            raise DimensionError(
                f"matrix view must be {N**3}x{N**3} for n={n}, got {matrix.shape}"
            )
        matrix.setflags(write=False)
        if raw_g is not None:
            raw_g = np.ascontiguousarray(raw_g, dtype=np.float64)
            if raw_g.shape != (N**3,):
                raise DimensionError(f"raw vector must have length {N**3}")
            raw_g.setflags(write=False)
        self.n = n
        self.N = N
        self.matrix = matrix
        self.raw_g = raw_g
        self._eig = None

    def mode_view(self) -> np.ndarray:
        """Return the ((i,i'), (j,j'), (k,k')) three-axis view, shape (N^2,)*3."""
        N = self.N
        t6 = self.matrix.reshape(N, N, N, N, N, N)  # i j k i' j' k'
        return np.ascontiguousarray(
            t6.transpose(0, 3, 1, 4, 2, 5).reshape(N * N, N * N, N * N)
        )

    def entry(self, ii: tuple, jj: tuple, kk: tuple) -> complex:
        """Single tensor entry at index pairs (i,i'), (j,j'), (k,k')."""
        N = self.N
        row = (ii[0] * N + jj[0]) * N + kk[0]
        col = (ii[1] * N + jj[1]) * N + kk[1]
        return complex(self.matrix[row, col])

    def is_hermitian(self, tol: float = _HERM_TOL) -> bool:
        M = self.matrix
        scale = max(1.0, np.abs(M).max())
        return bool(np.abs(M - M.conj().T).max() <= tol * scale)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def from_mode_view(cls, n: int, W: np.ndarray, raw_g=None) -> "Tensor3":
        N = 2**n
        if W.shape != (N * N, N * N, N * N):
            raise DimensionError(f"mode view must be ({N*N},)*3, got {W.shape}")
        t6 = W.reshape(N, N, N, N, N, N)  # (i i') (j j') (k k')
        M = t6.transpose(0, 2, 4, 1, 3, 5).reshape(N**3, N**3)
        return cls(n, M, raw_g)


@dataclass
class TrilinearWitness:
    """A feasible point (X, Y, Z) of the trilinear maximization and its value.

    Each factor is Hermitian with Frobenius norm at most one, so |value| is a
    certified lower bound on the trilinear norm of the tensor it was built for.
    """

    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    value: complex

    def __post_init__(self):
        for name, M in (("X", self.X), ("Y", self.Y), ("Z", self.Z)):
            if np.abs(M - M.conj().T).max() > 1e-12:
                raise ValueError(f"witness factor {name} is not Hermitian")
            if np.linalg.norm(M) > 1.0 + 1e-12:
                raise ValueError(f"witness factor {name} has Frobenius norm > 1")


def sample_tensor(n: int, cfg: SamplerConfig) -> Tensor3:
    """Draw g per cfg and form the masked outer product tensor.

    The matrix view is g g^T with every entry zeroed whenever i == i' or
    j == j' or k == k'.  The raw vector is retained on the result.
    """
    N = 2**n
    if cfg.distribution == "gaussian":
        rng = np.random.default_rng(cfg.seed)
        g = rng.standard_normal(N**3)
    elif cfg.distribution == "bernoulli":
        rng = np.random.default_rng(cfg.seed)
        g = rng.integers(0, 2, N**3).astype(np.float64) * 2.0 - 1.0
    else:
        g = np.asarray(cfg.override_g, dtype=np.float64).reshape(-1)
        if g.shape != (N**3,):
            raise DimensionError(
                f"override vector must have length {N**3}, got {g.shape[0]}"
            )
    M = np.outer(g, g)
    M6 = M.reshape(N, N, N, N, N, N)
    r = np.arange(N)
    M6[r, :, :, r, :, :] = 0.0  # i == i'
    M6[:, r, :, :, r, :] = 0.0  # j == j'
    M6[:, :, r, :, :, r] = 0.0  # k == k'
    return Tensor3(n, M, raw_g=g)


def top_eigenpair(T: Tensor3) -> tuple[float, np.ndarray]:
    """Eigenvalue of largest magnitude and its eigenvector (Hermitian input).

    When +s and -s are both eigenvalues of magnitude equal to the spectral
    norm, the positive branch is returned, so the eigenvector realizes the
    spectral norm as a positive quadratic form whenever possible.
    """
    if not T.is_hermitian():
        raise ValueError("top_eigenpair needs a Hermitian matrix view")
    if T._eig is None:
        w, V = np.linalg.eigh(T.matrix)
        sn = max(abs(w[0]), abs(w[-1]))
        if w[-1] >= sn * (1.0 - 1e-12):
            lam, vec = w[-1], V[:, -1]
        else:
            lam, vec = w[0], V[:, 0]
        vec = np.ascontiguousarray(vec)
        vec.setflags(write=False)
        T._eig = (float(lam), vec)
    return T._eig


def spectral_norm(T: Tensor3) -> float:
    """Largest singular value of the matrix view.

    Hermitian inputs go through the eigendecomposition (retaining a certified
    top eigenvector); general inputs fall back to singular values.
    """
    if T.is_hermitian():
        lam, _ = top_eigenpair(T)
        return abs(lam)
    return float(np.linalg.svd(T.matrix, compute_uv=False)[0])


def trilinear_eval(T: Tensor3, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> complex:
    """Pair the tensor with X ⊗ Y ⊗ Z entrywise: sum T[(ii'),(jj'),(kk')] X[ii'] Y[jj'] Z[kk'].

    Computed mode by mode rather than through a six-index loop.
    """
    N = T.N
    for name, M in (("X", X), ("Y", Y), ("Z", Z)):
        if np.shape(M) != (N, N):
            raise DimensionError(f"{name} must be {N}x{N}")
    W = T.mode_view()
    v = np.einsum(
        "abc,a,b,c->",
        W,
        np.asarray(X, dtype=complex).ravel(),
        np.asarray(Y, dtype=complex).ravel(),
        np.asarray(Z, dtype=complex).ravel(),
        optimize=True,
    )
    return complex(v)


def _best_hermitian_factor(A: np.ndarray):
    """Maximize |sum A∘X| over Hermitian X with ||X||_F <= 1.

    Writing B = conj(A) = H1 + i H2 with H1, H2 Hermitian, the objective is
    sqrt(tr(H1 X)^2 + tr(H2 X)^2), whose maximum over the unit Frobenius
    sphere is the top eigenvalue of the 2x2 Gram matrix of (H1, H2); the
    optimizer lies in their span.  Returns (X, value), or (None, 0) when A
    vanishes.
    """
    B = A.conj()
    H1 = (B + B.conj().T) / 2.0
    H2 = (B - B.conj().T) / 2.0j
    g11 = float(np.einsum("ab,ba->", H1, H1).real)
    g12 = float(np.einsum("ab,ba->", H1, H2).real)
    g22 = float(np.einsum("ab,ba->", H2, H2).real)
    if g11 + g22 <= 0.0:
        return None, 0.0
    gram = np.array([[g11, g12], [g12, g22]])
    w, V = np.linalg.eigh(gram)
    c = V[:, -1]
    X = c[0] * H1 + c[1] * H2
    nrm = np.linalg.norm(X)
    if nrm == 0.0:
        return None, 0.0
    X = (X + X.conj().T) / (2.0 * nrm)
    val = abs(complex(np.einsum("ab,ab->", A, X)))
    return X, val


def _anchor_factors(T: Tensor3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic start: normalized partial traces of the dominant eigenvector."""
    N = T.N
    if T.is_hermitian():
        _, psi = top_eigenpair(T)
    else:
        psi = np.linalg.svd(T.matrix)[0][:, 0]
    p3 = psi.reshape(N, N, N)
    outs = []
    for pattern in ("ajk,bjk->ab", "jak,jbk->ab", "jka,jkb->ab"):
        rho = np.einsum(pattern, p3, p3.conj())
        rho = (rho + rho.conj().T) / 2.0
        nrm = np.linalg.norm(rho)
        outs.append(rho / nrm if nrm > 0 else np.eye(N) / np.sqrt(N))
    return tuple(outs)


def trilinear_norm_lower(
    T: Tensor3,
    restarts: int = 8,
    max_iters: int = 200,
    tol: float = 1e-9,
    seed: int = 0,
    on_sweep=None,
) -> tuple[float, TrilinearWitness]:
    """Alternating maximization of |<T, X⊗Y⊗Z>| over Hermitian unit-Frobenius balls.

    Each mode update is the exact closed-form maximizer with the other two
    factors held fixed, so the objective never decreases within a run.  One
    restart starts from the dominant-eigenvector partial traces; the rest
    start from seeded random Hermitian matrices (restart r draws from
    (seed, r)).  The best value across restarts is returned together with the
    achieving witness; it is a guaranteed lower bound on the trilinear norm.

    on_sweep, when given, is called as on_sweep(restart, iteration, value)
    after every full sweep.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    N = T.N
    W = T.mode_view()

    def rand_herm(rng):
        M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        H = (M + M.conj().T) / 2.0
        nrm = np.linalg.norm(H)
        return H / nrm if nrm > 0 else np.eye(N) / np.sqrt(N)

    best_val = -1.0
    best_fac = None
    for r in range(restarts):
        if r == 0:
            X, Y, Z = _anchor_factors(T)
        else:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, r)))
            X, Y, Z = rand_herm(rng), rand_herm(rng), rand_herm(rng)
        prev = 0.0
        val = 0.0
        for it in range(max_iters):
            A = np.einsum("abc,b,c->a", W, Y.ravel(), Z.ravel()).reshape(N, N)
            Xn, v = _best_hermitian_factor(A)
            if Xn is not None:
                X = Xn
            A = np.einsum("abc,a,c->b", W, X.ravel(), Z.ravel()).reshape(N, N)
            Yn, v = _best_hermitian_factor(A)
            if Yn is not None:
                Y = Yn
            A = np.einsum("abc,a,b->c", W, X.ravel(), Y.ravel()).reshape(N, N)
            Zn, v = _best_hermitian_factor(A)
            if Zn is not None:
                Z = Zn
            val = v
            if on_sweep is not None:
                on_sweep(r, it, val)
            if val - prev < tol * max(prev, 1e-300):
                break
            prev = val
        if val > best_val:
            best_val = val
            best_fac = (X, Y, Z)
    X, Y, Z = best_fac
    value = trilinear_eval(T, X, Y, Z)
    return abs(value), TrilinearWitness(X=X, Y=Y, Z=Z, value=value)


def trilinear_norm_upper_net(T: Tensor3, eps: float, net_seed: int = 0) -> float:
    """Certified upper bound on the trilinear norm via the projector triple net.

    Only supported at N = 2, and only for tensors carrying their raw sampling
    vector g (the bound is a statement about masked outer-product tensors).
    The bound is

        64 (ln N)^{3/2} ( max |<g| X⊗Y⊗Z |g> - tr(X⊗Y⊗Z)| + 3 eps (N^{3/2} + ||g||^2) )

    with the max streamed over the triple net at resolution eps.
    """
    from . import nets

    if T.N != 2:
        raise ScaleError("net upper bound is only certified at N = 2")
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    if T.raw_g is None:
        raise ValueError("tensor carries no raw sampling vector; bound not applicable")
    g = T.raw_g
    N = T.N
    elements = []
    for k in range(1, N + 1):
        elements.extend(nets.projector_net(N, k, eps, seed=net_seed).elements)
    E = np.array([M.reshape(-1) for M in elements])  # (m, N^2), row-major (i, i')
    traces = np.array([np.trace(M) for M in elements])
    Wg = np.outer(g, g).reshape(N, N, N, N, N, N).transpose(0, 3, 1, 4, 2, 5)
    Wg = Wg.reshape(N * N, N * N, N * N)
    # <g|X⊗Y⊗Z|g> is trilinear in the flattened factors; stream over the first.
    M1 = np.einsum("abc,pa->pbc", Wg, E)
    max_dev = 0.0
    for p in range(E.shape[0]):
        quad = E @ M1[p] @ E.T
        dev = np.abs(quad - traces[p] * np.outer(traces, traces))
        max_dev = max(max_dev, float(dev.max()))
    gnorm2 = float(g @ g)
    prefactor = 64.0 * np.log(N) ** 1.5
    return float(prefactor * (max_dev + 3.0 * eps * (N**1.5 + gnorm2)))


def hermitize(T: Tensor3) -> Tensor3:
    """Return the better of (T + T†)/2 and i(T - T†)/2 by spectral norm.

    Both candidates are Hermitian as N^3 x N^3 matrices; ties go to the
    symmetric part.  The raw sampling vector is carried over only when the
    input was already Hermitian (so the certificate it backs stays valid).
    """
    M = T.matrix
    sym = (M + M.conj().T) / 2.0
    anti = 1j * (M - M.conj().T) / 2.0
    cand_s = Tensor3(T.n, sym)
    cand_a = Tensor3(T.n, anti)
    ns, na = spectral_norm(cand_s), spectral_norm(cand_a)
    keep_g = T.raw_g if T.is_hermitian() else None
    if na > ns:
        return Tensor3(T.n, anti, raw_g=keep_g)
    return Tensor3(T.n, sym, raw_g=keep_g)


def save_tensor(path, T: Tensor3) -> None:
    """Write the tensor in the XGT1 binary format.

    Layout: magic "XGT1", little-endian u32 n, u32 flags (bit 0 = raw vector
    present), then the raw vector as N^3 complex float64 pairs when present,
    then the N^6 matrix entries as complex float64 pairs, rows (i,j,k) by
    columns (i',j',k'), row-major.
    """
    flags = _FLAG_RAW_G if T.raw_g is not None else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", T.n, flags))
        if T.raw_g is not None:
            fh.write(T.raw_g.astype("<c16").tobytes())
        fh.write(T.matrix.astype("<c16").tobytes())


def load_tensor(path) -> Tensor3:
    """Read a tensor written by :func:`save_tensor`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not an XGT1 file (magic {magic!r})")
        n, flags = struct.unpack("<II", fh.read(8))
        N = 2**n
        g = None
        if flags & _FLAG_RAW_G:
            buf = fh.read(16 * N**3)
            gc = np.frombuffer(buf, dtype="<c16")
            if gc.shape != (N**3,):
                raise ValueError("truncated raw vector block")
            if np.abs(gc.imag).max(initial=0.0) > 0:
                raise ValueError("raw vector must be real")
            g = gc.real.astype(np.float64)
        buf = fh.read(16 * N**6)
        M = np.frombuffer(buf, dtype="<c16")
        if M.shape != (N**6,):
            raise ValueError("truncated entry block")
        return Tensor3(n, M.reshape(N**3, N**3).astype(np.complex128), raw_g=g)
