"""Three-player XOR games: construction from tensors, biases, and bound checks.

A game is a question distribution pi over triples together with a sign tensor.
Classical players answer with fixed signs per question; entangled players
share a state and measure +/-1-valued observables.  Games built from a
sampled tensor ask Pauli matrices as questions, and the explicit entangled
strategy answers question P by measuring P itself on the tensor's dominant
eigenvector.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGameError, DimensionError, ScaleError
from .pauli import build_basis, fourier, pauli_expectations
from .tensor import Tensor3, hermitize, top_eigenpair

GROTHENDIECK_REAL = 1.783
GROTHENDIECK_COMPLEX = 1.405

EXACT_ENUMERATION_LIMIT = 30  # largest 2Q handled by exact enumeration

_OBS_TOL = 1e-10


def _as_signs(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if not np.all(np.abs(np.abs(out) - 1.0) < 1e-12):
        raise ValueError("sign entries must be +1 or -1")
    return np.sign(out)


@dataclass(frozen=True)
class XorGame:
    """Question distribution pi over [Q]^3 and signs in {-1, +1}."""

    Q: int
    pi: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        signs = _as_signs(self.signs)
        if pi.shape != (self.Q,) * 3 or signs.shape != (self.Q,) * 3:
            raise DimensionError(f"pi and signs must have shape ({self.Q},)*3")
        if pi.min() < 0.0:
            raise ValueError("pi must be nonnegative")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError(f"pi must sum to 1, got {pi.sum()!r}")
        pi.setflags(write=False)
        signs.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "signs", signs)

    def cost_tensor(self) -> np.ndarray:
        return self.pi * self.signs


@dataclass(frozen=True)
class ClassicalStrategy:
    """One +/-1 answer per question for each player."""

    chi: np.ndarray
    upsilon: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        for name in ("chi", "upsilon", "zeta"):
            object.__setattr__(self, name, _as_signs(getattr(self, name)))


@dataclass(frozen=True)
class EntangledStrategy:
    """Shared unit state plus per-question +/-1-observables for each player."""

    dims: tuple
    state: np.ndarray
    observables: tuple  # three sequences of (d, d) Hermitian matrices

    def __post_init__(self):
        state = np.asarray(self.state, dtype=complex).reshape(-1)
        d1, d2, d3 = self.dims
        if state.shape != (d1 * d2 * d3,):
            raise DimensionError("state length must equal the product of dims")
        if abs(np.linalg.norm(state) - 1.0) > 1e-12:
            raise ValueError("state must be a unit vector")
        if len(self.observables) != 3:
            raise ValueError("need one observable list per player")
        for player, (d, obs) in enumerate(zip(self.dims, self.observables)):
            for q, O in enumerate(obs):
                O = np.asarray(O)
                if O.shape != (d, d):
                    raise DimensionError(
                        f"player {player} question {q}: observable must be {d}x{d}"
                    )
                if np.abs(O - O.conj().T).max() > _OBS_TOL:
                    raise ValueError(
                        f"player {player} question {q}: observable not Hermitian"
                    )
                if np.abs(O @ O - np.eye(d)).max() > _OBS_TOL:
                    raise ValueError(
                        f"player {player} question {q}: observable must square to I"
                    )
        state.setflags(write=False)
        object.__setattr__(self, "state", state)


@dataclass(frozen=True)
class GameBuildReport:
    """Outcome of turning a tensor into a game: chosen branch and normalization."""

    branch: str  # "real" or "imaginary"
    l1_norm: float
    game: XorGame


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bias inequality: lhs <= bound, with the slack observed."""

    name: str
    lhs: float
    bound: float
    slack: float
    ok: bool


def tensor_from_game(G: XorGame) -> np.ndarray:
    """Merge pi and signs into the single real cost tensor pi * signs."""
    return G.cost_tensor()


def game_from_cost_tensor(C: np.ndarray) -> XorGame:
    """Inverse merge: pi = |C| (renormalized), signs = sign(C), +1 on zeros."""
    C = np.asarray(C, dtype=np.float64)
    Q = C.shape[0]
    total = np.abs(C).sum()
    if total == 0.0:
        raise DegenerateGameError("cost tensor has no support")
    pi = np.abs(C) / total
    signs = np.where(C < 0.0, -1.0, 1.0)
    return XorGame(Q=Q, pi=pi, signs=signs)


def game_from_tensor(T: Tensor3) -> GameBuildReport:
    """Build the Pauli-question game of a tensor.

    The tensor is hermitized, its coefficient table computed, and the real and
    imaginary coefficient branches compared by the bias magnitude the explicit
    Pauli strategy achieves on each (before normalization; negating one
    player's observables realizes the magnitude, so sign does not matter); the
    winner is l1-normalized into (pi, signs).  Hermitized tensors have real
    coefficient tables, so the real branch wins whenever the input was
    Hermitian.
    """
    if not np.any(T.matrix):
        raise DegenerateGameError("zero tensor yields no game")
    H = hermitize(T)
    table = fourier(H).coefficients
    _, psi = top_eigenpair(H)
    w = pauli_expectations(H.n, psi)
    branches = {"real": table.real, "imaginary": table.imag}
    values = {name: abs(float(np.sum(coeff * w))) for name, coeff in branches.items()}
    branch = "real" if values["real"] >= values["imaginary"] else "imaginary"
    coeff = branches[branch]
    l1 = float(np.abs(coeff).sum())
    if l1 == 0.0:
        raise DegenerateGameError("selected coefficient branch vanishes")
    pi = np.abs(coeff) / l1
    signs = np.where(coeff < 0.0, -1.0, 1.0)
    game = XorGame(Q=T.N * T.N, pi=pi, signs=signs)
    return GameBuildReport(branch=branch, l1_norm=l1, game=game)


def _sign_vectors(Q: int, fix_first: bool) -> np.ndarray:
    """All +/-1 vectors of length Q (first entry pinned to +1 when fix_first)."""
    free = Q - 1 if fix_first else Q
    count = 1 << free
    rows = np.arange(count)[:, None]
    bits = (rows >> np.arange(free)[None, :]) & 1
    vecs = 1.0 - 2.0 * bits
    if fix_first:
        vecs = np.hstack([np.ones((count, 1)), vecs])
    return vecs


def classical_bias_exact(G: XorGame) -> tuple[float, ClassicalStrategy]:
    """Exact classical bias by enumeration over two players.

    The third player's best response is closed form: zeta(k) is the sign of
    the partial sum over the first two answers, so only 2^(2Q) sign patterns
    are visited instead of 2^(3Q); global sign flips of a player leave the
    optimum unchanged, which pins the first answer of the enumerated players.
    """
    Q = G.Q
    if 2 * Q > EXACT_ENUMERATION_LIMIT:
        raise ScaleError(
            f"2Q = {2*Q} exceeds the enumeration limit "
            f"{EXACT_ENUMERATION_LIMIT}; use classical_bias_heuristic"
        )
    C = G.cost_tensor()
    chis = _sign_vectors(Q, fix_first=True)
    upsilons = _sign_vectors(Q, fix_first=True)
    C2 = C.reshape(Q, Q * Q)
    best = -np.inf
    best_pair = None
    for chi in chis:
        A = (chi @ C2).reshape(Q, Q)  # A[j, k] = sum_i chi_i C[i, j, k]
        vals = np.abs(upsilons @ A).sum(axis=1)
        u = int(np.argmax(vals))
        if vals[u] > best:
            best = float(vals[u])
            best_pair = (chi.copy(), upsilons[u].copy())
    chi, upsilon = best_pair
    partial = np.einsum("ijk,i,j->k", C, chi, upsilon)
    zeta = np.where(partial < 0.0, -1.0, 1.0)
    return best, ClassicalStrategy(chi=chi, upsilon=upsilon, zeta=zeta)


def classical_bias_heuristic(
    G: XorGame, restarts: int = 32, seed: int = 0
) -> tuple[float, ClassicalStrategy]:
    """Coordinate ascent over the three sign vectors from random starts.

    Each player's best response given the others is the sign of a partial
    sum; zero sums resolve to +1, which leaves the bias unchanged (those
    questions contribute nothing) while escaping balanced-sign saddles, so
    sweeps never decrease the bias.  The best fixed point over restarts is
    returned; the value is always a lower bound on the classical bias, and
    never exceeds the exact optimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    Q = G.Q
    C = G.cost_tensor()
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = -np.inf
    best_strat = None
    for ss in children:
        rng = np.random.default_rng(ss)
        chi = rng.choice([-1.0, 1.0], Q)
        upsilon = rng.choice([-1.0, 1.0], Q)
        zeta = rng.choice([-1.0, 1.0], Q)
        for _ in range(1000):
            changed = False
            s = np.einsum("ijk,j,k->i", C, upsilon, zeta)
            new = np.where(s < 0.0, -1.0, 1.0)
            changed |= bool(np.any(new != chi))
            chi = new
            s = np.einsum("ijk,i,k->j", C, chi, zeta)
            new = np.where(s < 0.0, -1.0, 1.0)
            changed |= bool(np.any(new != upsilon))
            upsilon = new
            s = np.einsum("ijk,i,j->k", C, chi, upsilon)
            new = np.where(s < 0.0, -1.0, 1.0)
            changed |= bool(np.any(new != zeta))
            zeta = new
            if not changed:
                break
        val = float(np.einsum("ijk,i,j,k->", C, chi, upsilon, zeta))
        if val > best:
            best = val
            best_strat = ClassicalStrategy(chi=chi, upsilon=upsilon, zeta=zeta)
    return best, best_strat


def strategy_correlations(S: EntangledStrategy) -> np.ndarray:
    """All correlations <psi| A_i ⊗ B_j ⊗ C_k |psi> as a real (Q1, Q2, Q3) array."""
    d1, d2, d3 = S.dims
    psi = S.state.reshape(d1, d2, d3)
    A = np.array(S.observables[0])
    B = np.array(S.observables[1])
    Cm = np.array(S.observables[2])
    # contract the ket side player by player, pairing with the bra before the
    # third player so no intermediate ever carries all three question axes
    t1 = np.einsum("iax,xbc->iabc", A, psi)
    t2 = np.einsum("jby,iayc->ijabc", B, t1)
    r = np.einsum("ijabz,abc->ijcz", t2, psi.conj())
    w = np.einsum("kcz,ijcz->ijk", Cm, r)
    if np.abs(w.imag).max(initial=0.0) > 1e-9:
        raise ValueError("correlations came out non-real; invalid strategy")
    return w.real


def entangled_bias_eval(G: XorGame, S: EntangledStrategy) -> float:
    """Bias of a concrete entangled strategy: sum pi * signs * correlation.

    Any value returned here is achievable, hence a lower bound on the game's
    entangled bias.
    """
    if any(len(obs) != G.Q for obs in S.observables):
        raise DimensionError("strategy must provide one observable per question")
    w = strategy_correlations(S)
    return float(np.sum(G.cost_tensor() * w))


def lift_classical(S: ClassicalStrategy) -> EntangledStrategy:
    """View sign vectors as 1x1 observables with a trivial shared state."""
    obs = tuple(
        [np.array([[v]], dtype=complex) for v in vec]
        for vec in (S.chi, S.upsilon, S.zeta)
    )
    return EntangledStrategy(dims=(1, 1, 1), state=np.array([1.0]), observables=obs)


def pauli_strategy(T: Tensor3) -> EntangledStrategy:
    """The explicit strategy for a hermitized tensor's game.

    Question index p is answered by measuring the p-th basis element (all
    three players alike, local dimension N), on the dominant eigenvector of
    the matrix view.  Summing coefficient(P,Q,R) times the correlation of
    (P,Q,R) over all questions telescopes to N^3 times the top eigenvalue,
    i.e. N^3 times the spectral norm whenever that eigenvalue is positive.
    """
    if not T.is_hermitian():
        raise ValueError("pauli_strategy needs a hermitized tensor")
    basis = build_basis(T.n)
    _, psi = top_eigenpair(T)
    return EntangledStrategy(
        dims=(T.N, T.N, T.N),
        state=psi,
        observables=(basis.elements, basis.elements, basis.elements),
    )


def _matrix_sign(H: np.ndarray) -> np.ndarray:
    """Observable closest to H: flip its eigenvalues to +/-1 (zeros to +1)."""
    w, V = np.linalg.eigh((H + H.conj().T) / 2.0)
    s = np.where(w >= 0.0, 1.0, -1.0)
    return (V * s) @ V.conj().T


def _game_operator(C: np.ndarray, A: np.ndarray, B: np.ndarray, Cm: np.ndarray):
    d = A.shape[1]
    D = np.einsum("ijk,kcz->ijcz", C, Cm)
    E2 = np.einsum("jby,ijcz->ibcyz", B, D)
    op = np.einsum("iax,ibcyz->abcxyz", A, E2).reshape(d**3, d**3)
    return (op + op.conj().T) / 2.0


def seesaw_entangled_bias(
    G: XorGame,
    d: int,
    restarts: int = 8,
    iters: int = 500,
    seed: int = 0,
    tol: float = 1e-9,
    on_sweep=None,
) -> tuple[float, EntangledStrategy]:
    """Alternating lower-bound heuristic for the entangled bias at local dimension d.

    A sweep updates the shared state (top eigenvector of the current game
    operator) and then each player's observables in turn; with the rest
    fixed, the optimal observable for a question is the matrix sign of its
    effective operator, so the bias never decreases.  Runs from several
    seeded starts and returns the best strategy found.  Values are always
    achievable, hence lower bounds.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    Q = G.Q
    C = G.cost_tensor()
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = -np.inf
    best_strat = None
    for r, ss in enumerate(children):
        rng = np.random.default_rng(ss)

        def rand_obs():
            M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            return _matrix_sign(M + M.conj().T)

        A = np.array([rand_obs() for _ in range(Q)])
        B = np.array([rand_obs() for _ in range(Q)])
        Cm = np.array([rand_obs() for _ in range(Q)])
        psi = rng.standard_normal(d**3) + 1j * rng.standard_normal(d**3)
        psi /= np.linalg.norm(psi)
        prev = -np.inf
        val = prev
        for sweep in range(iters):
            op = _game_operator(C, A, B, Cm)
            _, V = np.linalg.eigh(op)
            psi = V[:, -1]
            p3 = psi.reshape(d, d, d)
            # player 1: effective operators E_i with tr(A_i E_i) the bias share
            t = np.einsum("jbp,kcq,apq->jkabc", B, Cm, p3, optimize=True)
            K = np.einsum("abc,jkxbc->jkax", p3.conj(), t, optimize=True)
            E = np.einsum("ijk,jkax->ixa", C, K, optimize=True)
            A = np.array([_matrix_sign(E[i]) for i in range(Q)])
            # player 2
            t = np.einsum("iap,kcq,pbq->ikabc", A, Cm, p3, optimize=True)
            K = np.einsum("abc,ikayc->ikby", p3.conj(), t, optimize=True)
            E = np.einsum("ijk,ikby->jyb", C, K, optimize=True)
            B = np.array([_matrix_sign(E[j]) for j in range(Q)])
            # player 3
            t = np.einsum("iap,jbq,pqc->ijabc", A, B, p3, optimize=True)
            K = np.einsum("abc,ijabz->ijcz", p3.conj(), t, optimize=True)
            E = np.einsum("ijk,ijcz->kzc", C, K, optimize=True)
            Cm = np.array([_matrix_sign(E[k]) for k in range(Q)])
            S = EntangledStrategy(
                dims=(d, d, d),
                state=psi,
                observables=(list(A), list(B), list(Cm)),
            )
            val = entangled_bias_eval(G, S)
            if on_sweep is not None:
                on_sweep(r, sweep, val)
            if val - prev < tol:
                break
            prev = val
        if val > best:
            best = val
            best_strat = EntangledStrategy(
                dims=(d, d, d),
                state=psi,
                observables=(list(A), list(B), list(Cm)),
            )
    return best, best_strat


def check_question_bound(G: XorGame, beta_star_lb: float, beta: float) -> BoundReport:
    """Check beta_star_lb <= sqrt(Q) * K_R * beta (K_R the real constant)."""
    bound = np.sqrt(G.Q) * GROTHENDIECK_REAL * beta
    slack = bound - beta_star_lb
    return BoundReport(
        name="question_bound",
        lhs=beta_star_lb,
        bound=float(bound),
        slack=float(slack),
        ok=bool(beta_star_lb <= bound + 1e-9),
    )


def check_dimension_bound(
    G: XorGame, beta_star_lb: float, d: int, beta: float
) -> BoundReport:
    """Check beta_star_lb <= sqrt(3d) * K_C^{3/2} * beta (K_C the complex constant)."""
    bound = np.sqrt(3.0 * d) * GROTHENDIECK_COMPLEX**1.5 * beta
    slack = bound - beta_star_lb
    return BoundReport(
        name="dimension_bound",
        lhs=beta_star_lb,
        bound=float(bound),
        slack=float(slack),
        ok=bool(beta_star_lb <= bound + 1e-9),
    )


# --- benchmark fixtures ----------------------------------------------------


def mermin_game() -> XorGame:
    """Benchmark fixture: uniform support on the four odd-parity question
    triples with signs (+,-,-,-); classical bias 1/2, entangled bias 1."""
    pi = np.zeros((2, 2, 2))
    signs = np.ones((2, 2, 2))
    for (i, j, k), s in {
        (0, 0, 0): 1.0,
        (0, 1, 1): -1.0,
        (1, 0, 1): -1.0,
        (1, 1, 0): -1.0,
    }.items():
        pi[i, j, k] = 0.25
        signs[i, j, k] = s
    return XorGame(Q=2, pi=pi, signs=signs)


def ghz_strategy() -> EntangledStrategy:
    """The standard qubit strategy for the Mermin fixture: GHZ state, X/Y answers."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    state = np.zeros(8, dtype=complex)
    state[0] = state[7] = 1.0 / np.sqrt(2.0)
    obs = ([X, Y], [X, Y], [X, Y])
    return EntangledStrategy(dims=(2, 2, 2), state=state, observables=obs)


def embedded_chsh_game(Q: int = 4) -> XorGame:
    """Benchmark fixture: two-player CHSH padded to a three-player game.

    Players one and two use questions {0, 1} uniformly; the third player is
    always asked question 0 and plays identity.  Remaining question triples
    have probability zero (signs +1 by convention).  Classical bias 1/2;
    qubit strategies reach sqrt(2)/2.
    """
    if Q < 2:
        raise ValueError("need at least the two CHSH questions")
    pi = np.zeros((Q, Q, Q))
    signs = np.ones((Q, Q, Q))
    for x in (0, 1):
        for y in (0, 1):
            pi[x, y, 0] = 0.25
            if x == 1 and y == 1:
                signs[x, y, 0] = -1.0
    return XorGame(Q=Q, pi=pi, signs=signs)


def chsh_optimal_strategy(Q: int = 4) -> EntangledStrategy:
    """The optimal qubit strategy for the embedded CHSH fixture (bias sqrt(2)/2)."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    I2 = np.eye(2, dtype=complex)
    a_obs = [Z, X] + [I2] * (Q - 2)
    b_obs = [(Z + X) / np.sqrt(2.0), (Z - X) / np.sqrt(2.0)] + [I2] * (Q - 2)
    c_obs = [I2] * Q
    epr = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
    state = np.kron(epr, np.array([1.0, 0.0])).astype(complex)
    return EntangledStrategy(dims=(2, 2, 2), state=state, observables=(a_obs, b_obs, c_obs))


# --- io ---------------------------------------------------------------------


def save_game_csv(path, G: XorGame) -> None:
    """Write all question triples as rows q1,q2,q3,pi,sign."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q1", "q2", "q3", "pi", "sign"])
        for i in range(G.Q):
            for j in range(G.Q):
                for k in range(G.Q):
                    w.writerow(
                        [i, j, k, repr(float(G.pi[i, j, k])), int(G.signs[i, j, k])]
                    )


def load_game_csv(path) -> XorGame:
    """Read a game written by :func:`save_game_csv`."""
    rows = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header[:5] != ["q1", "q2", "q3", "pi", "sign"]:
            raise ValueError("not a game CSV")
        for row in r:
            rows.append((int(row[0]), int(row[1]), int(row[2]), float(row[3]), float(row[4])))
    Q = max(max(r[0], r[1], r[2]) for r in rows) + 1
    pi = np.zeros((Q, Q, Q))
    signs = np.ones((Q, Q, Q))
    for i, j, k, p, s in rows:
        pi[i, j, k] = p
        signs[i, j, k] = s
    return XorGame(Q=Q, pi=pi, signs=signs)


def strategy_to_json(S: EntangledStrategy) -> str:
    """Serialize a strategy (dims, state and observables as re/im pairs)."""

    def cvec(arr):
        arr = np.asarray(arr, dtype=complex).reshape(-1)
        return [[float(v.real), float(v.imag)] for v in arr]

    payload = {
        "dims": list(S.dims),
        "state": cvec(S.state),
        "observables": [[cvec(O) for O in obs] for obs in S.observables],
    }
    return json.dumps(payload)


def strategy_from_json(text: str) -> EntangledStrategy:
    payload = json.loads(text)
    dims = tuple(payload["dims"])

    def unvec(pairs, shape):
        flat = np.array([complex(re, im) for re, im in pairs])
        return flat.reshape(shape)

    state = unvec(payload["state"], (-1,))
    observables = tuple(
        [unvec(O, (d, d)) for O in obs]
        for d, obs in zip(dims, payload["observables"])
    )
    return EntangledStrategy(dims=dims, state=state, observables=observables)
