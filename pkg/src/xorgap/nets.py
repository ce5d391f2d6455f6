"""Constructive epsilon-nets and the signed-projector decomposition.

Sphere nets come from greedy maximal packing: seeded candidates are kept
whenever they sit farther than eps from every point kept so far, and
construction stops after a long run of consecutive rejections.  A maximal
eps-packing is an eps-net, but the stopping rule is probabilistic, so covering
is additionally verified by sampling.  Projector nets take spans of k-subsets
of a sphere net at resolution eps/sqrt(2) and normalize by the square root of
the rank; the triple net is the union over rank triples of elementwise tensor
products.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, ScaleError

PACKING_WINDOW = 10_000

_NET_MAGIC = b"XGN1"


@dataclass(frozen=True)
class SphereNet:
    """Unit vectors in C^dim pairwise farther apart than eps."""

    dim: int
    eps: float
    points: np.ndarray  # (count, dim) complex

    def __len__(self):
        return self.points.shape[0]

    def nearest_distance(self, v: np.ndarray) -> float:
        d2 = np.sum(np.abs(self.points - v.reshape(1, -1)) ** 2, axis=1)
        return float(np.sqrt(d2.min()))


@dataclass(frozen=True)
class ProjectorNet:
    """Normalized projectors X/sqrt(rank X) with rank at most k on C^N."""

    N: int
    k: int
    eps: float
    elements: tuple  # of (N, N) complex arrays, Frobenius norm 1
    ranks: tuple

    def __len__(self):
        return len(self.elements)

    def nearest_distance(self, X: np.ndarray) -> float:
        E = np.array([M.reshape(-1) for M in self.elements])
        d2 = np.sum(np.abs(E - X.reshape(1, -1)) ** 2, axis=1)
        return float(np.sqrt(d2.min()))


@dataclass
class HermDecomposition:
    """Signed combination of normalized projectors reconstructing a Hermitian matrix.

    terms holds (coefficient, normalized projector) pairs; signs live in the
    coefficients.  The l1 mass of the coefficients is controlled by the
    dimension (at most 4 sqrt(ln N) for unit-Frobenius input).
    """

    N: int
    terms: list  # of (float, ndarray)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.N, self.N), dtype=complex)
        for lam, X in self.terms:
            out += lam * X
        return out

    def coefficient_l1(self) -> float:
        return float(sum(abs(lam) for lam, _ in self.terms))

    def to_csv(self, path) -> None:
        """Rows: term_index, lambda, rank, then the projector entries.

        Entries are row-major with two columns per entry (re, im).
        """
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["term_index", "lambda", "rank"]
            for i in range(self.N):
                for j in range(self.N):
                    header += [f"e{i}{j}_re", f"e{i}{j}_im"]
            w.writerow(header)
            for idx, (lam, X) in enumerate(self.terms):
                # a normalized rank-r projector has top eigenvalue 1/sqrt(r)
                top = np.max(np.linalg.eigvalsh(X)) if X.any() else 0.0
                rank = int(round(1.0 / top**2)) if top > 0 else 0
                row = [idx, repr(float(lam)), rank]
                for v in X.reshape(-1):
                    row += [repr(float(v.real)), repr(float(v.imag))]
                w.writerow(row)


@lru_cache(maxsize=32)
def sphere_net(N: int, eps: float, seed: int = 0, window: int = PACKING_WINDOW) -> SphereNet:
    """Greedy maximal eps-packing of the unit sphere of C^N (an eps-net).

    Deterministic for fixed (N, eps, seed, window); results are cached and
    shared (all stored arrays are read-only).  N is capped at 4; the
    construction is combinatorial in nature and larger dimensions are
    rejected rather than silently approximated.
    """
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    if not 1 <= N <= 4:
        raise ScaleError("sphere nets are built only for complex dimension <= 4")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, N)))
    kept = []
    P = None
    rejects = 0
    eps2 = eps * eps
    while rejects < window:
        batch = rng.standard_normal((256, 2 * N))
        vecs = batch[:, :N] + 1j * batch[:, N:]
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        for v in vecs:
            if P is None:
                kept.append(v)
                P = np.array(kept)
                rejects = 0
                continue
            d2 = np.sum(np.abs(P - v) ** 2, axis=1).min()
            if d2 > eps2:
                kept.append(v)
                P = np.array(kept)
                rejects = 0
            else:
                rejects += 1
                if rejects >= window:
                    break
    pts = np.array(kept)
    pts.setflags(write=False)
    return SphereNet(dim=N, eps=eps, points=pts)


def _span_projector(V: np.ndarray):
    """Normalized projector onto the column span of V, with its rank."""
    Q, R = np.linalg.qr(V)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * max(1.0, diag.max(initial=0.0))))
    if rank == 0:
        return None, 0
    Qr = Q[:, :rank]
    P = Qr @ Qr.conj().T
    P = (P + P.conj().T) / 2.0
    return P / np.sqrt(rank), rank


@lru_cache(maxsize=32)
def projector_net(N: int, k: int, eps: float, seed: int = 0) -> ProjectorNet:
    """Net over normalized rank-k projectors on C^N (N = 2 only).

    Elements are spans of k-subsets of an eps/sqrt(2) sphere net, normalized
    by sqrt(rank); duplicates are merged (results are cached per argument
    tuple).  Covering radius eps is verified empirically by the callers that
    need it.
    """
    if N != 2:
        raise ScaleError("projector nets are built only at N = 2")
    if not 1 <= k <= N:
        raise ValueError("k must lie in [1, N]")
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    eta = eps / np.sqrt(2.0)
    S = sphere_net(N, eta, seed=seed)
    pts = S.points
    seen = {}
    from itertools import combinations

    for subset in combinations(range(len(pts)), k):
        V = pts[list(subset)].T  # columns span the subset
        P, rank = _span_projector(V)
        if P is None:
            continue
        key = tuple(np.round(P.reshape(-1), 9).view(float))
        if key not in seen:
            P.setflags(write=False)
            seen[key] = (P, rank)
    elements = tuple(P for P, _ in seen.values())
    ranks = tuple(r for _, r in seen.values())
    return ProjectorNet(N=N, k=k, eps=eps, elements=elements, ranks=ranks)


def triple_net(N: int, eps: float, seed: int = 0):
    """Stream the triple product net: yields (X⊗Y⊗Z, (k, l, m)).

    The union over (k, l, m) in [N]^3 of elementwise products of the three
    rank-capped projector nets, generated lazily; the full product set is
    never materialized.
    """
    if N != 2:
        raise ScaleError("triple nets are built only at N = 2")
    nets = {k: projector_net(N, k, eps, seed=seed) for k in range(1, N + 1)}
    for k in range(1, N + 1):
        for l in range(1, N + 1):
            for m in range(1, N + 1):
                for X in nets[k].elements:
                    for Y in nets[l].elements:
                        XY = np.kron(X, Y)
                        for Z in nets[m].elements:
                            yield np.kron(XY, Z), (k, l, m)


def triple_net_size(N: int, eps: float, seed: int = 0) -> int:
    """Number of elements :func:`triple_net` will stream."""
    sizes = [len(projector_net(N, k, eps, seed=seed)) for k in range(1, N + 1)]
    total = 0
    for a in sizes:
        for b in sizes:
            for c in sizes:
                total += a * b * c
    return total


def lorentz_decompose(X: np.ndarray, tol: float = 1e-12) -> HermDecomposition:
    """Write a Hermitian X with ||X||_F <= 1 as a signed sum of normalized projectors.

    Eigenvalues of each sign are treated separately.  Sorting the positive
    ones λ1 >= ... >= λp > 0, the telescoping terms are
    (λm - λ_{m+1}) sqrt(m) * (P_m / sqrt(m)), with P_m the projector onto the
    top-m eigenvectors; the negative side is symmetric with negated
    coefficients.  Reconstruction is exact, and the coefficient l1 mass equals
    the rank-weighted level-set integral of the spectrum, which is at most
    4 sqrt(ln N) in dimension N > 1.
    """
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    if X.shape != (N, N):
        raise DimensionError("input must be square")
    if N < 2:
        raise ScaleError("decomposition needs dimension N > 1")
    if np.abs(X - X.conj().T).max(initial=0.0) > 1e-10:
        raise ValueError("input must be Hermitian")
    fro = np.linalg.norm(X)
    if fro > 1.0 + 1e-12:
        raise ValueError(
            f"input has Frobenius norm {fro:.6g} > 1; rescale before decomposing"
        )
    if fro == 0.0:
        return HermDecomposition(N=N, terms=[])
    w, V = np.linalg.eigh(X)
    cutoff = tol * np.abs(w).max()
    terms = []
    for sign in (+1.0, -1.0):
        idx = np.where(sign * w > cutoff)[0]
        if idx.size == 0:
            continue
        order = idx[np.argsort(-sign * w[idx])]  # decreasing magnitude
        mags = sign * w[order]
        proj = np.zeros((N, N), dtype=complex)
        for m in range(len(order)):
            v = V[:, order[m]]
            proj = proj + np.outer(v, v.conj())
            nxt = mags[m + 1] if m + 1 < len(order) else 0.0
            lam = (mags[m] - nxt) * np.sqrt(m + 1)
            if lam <= 0.0:
                continue
            P = (proj + proj.conj().T) / 2.0
            terms.append((sign * lam, P / np.sqrt(m + 1)))
    return HermDecomposition(N=N, terms=terms)


def coefficient_bound(N: int) -> float:
    """The dimension-driven cap on the decomposition's coefficient l1 mass."""
    return 4.0 * np.sqrt(np.log(N))


def coefficient_bound_sharp(N: int) -> float:
    """Sharper per-sign-part estimate, doubled to cover both parts."""
    return 2.0 * (2.0 + np.sqrt(np.log(N) / 2.0))


def export_elements(path, elements) -> None:
    """Write net elements in the shared binary convention (complex float64 pairs).

    Layout: magic "XGN1", little-endian u32 N, u32 count, then count blocks of
    N^2 complex entries, row-major.
    """
    elements = list(elements)
    if not elements:
        raise ValueError("nothing to export")
    N = elements[0].shape[0]
    with open(path, "wb") as fh:
        fh.write(_NET_MAGIC)
        fh.write(struct.pack("<II", N, len(elements)))
        for M in elements:
            if M.shape != (N, N):
                raise DimensionError("net elements must share one dimension")
            fh.write(np.ascontiguousarray(M, dtype="<c16").tobytes())


def load_elements(path):
    """Read elements written by :func:`export_elements`."""
    with open(path, "rb") as fh:
        if fh.read(4) != _NET_MAGIC:
            raise ValueError("not an XGN1 file")
        N, count = struct.unpack("<II", fh.read(8))
        out = []
        for _ in range(count):
            buf = fh.read(16 * N * N)
            M = np.frombuffer(buf, dtype="<c16").reshape(N, N)
            out.append(M.astype(np.complex128))
        return out
