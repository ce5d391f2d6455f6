"""Pipeline sweeps, verification suites, and file summaries.

The gap sweep runs sample -> hermitize -> game -> biases/norms per row and
emits CSV; verification suites re-run each module's invariant battery and
report pass/fail lines.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np

from . import concentration, game, nets, pauli, tensor

GAP_COLUMNS = [
    "n",
    "N",
    "seed",
    "spectral",
    "trilinear_lower",
    "trilinear_upper",
    "classical_bias",
    "classical_method",
    "pauli_bias",
    "ratio_estimate",
    "prop31_lower",
]

RATIO_BOUND_FACTOR = 4.0  # loss budgeted for hermitization plus branch choice


@dataclass
class GapRow:
    """One sampled tensor's norms and biases.

    ratio_estimate is pauli_bias / classical_bias: a certified lower bound on
    the entangled-to-classical ratio exactly when the classical bias is exact
    (classical_method == "exact"); otherwise the denominator is itself a lower
    bound and the ratio is only an estimate.  prop31_lower, present when the
    net upper bound is, is spectral / (4 N^{3/2} trilinear_upper).
    """

    n: int
    N: int
    seed: int
    spectral: float
    trilinear_lower: float
    trilinear_upper: float | None
    classical_bias: float
    classical_method: str
    pauli_bias: float
    ratio_estimate: float
    prop31_lower: float | None

    def as_csv_row(self) -> list:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [
            self.n,
            self.N,
            self.seed,
            fmt(self.spectral),
            fmt(self.trilinear_lower),
            fmt(self.trilinear_upper),
            fmt(self.classical_bias),
            self.classical_method,
            fmt(self.pauli_bias),
            fmt(self.ratio_estimate),
            fmt(self.prop31_lower),
        ]


def row_seed(master_seed: int, n: int, index: int) -> int:
    """Deterministic per-row sampler seed."""
    return int(np.random.SeedSequence(entropy=(master_seed, n, index)).generate_state(1)[0])


def compute_gap_row(
    n: int,
    sample_seed: int,
    als_restarts: int = 8,
    als_iters: int = 200,
    als_tol: float = 1e-9,
    heuristic_restarts: int = 32,
    net_eps: float = 0.5,
) -> GapRow:
    """Full pipeline for one sampled tensor."""
    N = 2**n
    T = tensor.sample_tensor(n, tensor.SamplerConfig(seed=sample_seed))
    spectral = tensor.spectral_norm(T)
    lower, _ = tensor.trilinear_norm_lower(
        T, restarts=als_restarts, max_iters=als_iters, tol=als_tol, seed=sample_seed
    )
    upper = None
    if N == 2:
        upper = tensor.trilinear_norm_upper_net(T, net_eps)
    H = tensor.hermitize(T)
    report = game.game_from_tensor(T)
    if 2 * report.game.Q <= game.EXACT_ENUMERATION_LIMIT:
        classical, _ = game.classical_bias_exact(report.game)
        method = "exact"
    else:
        classical, _ = game.classical_bias_heuristic(
            report.game, restarts=heuristic_restarts, seed=sample_seed
        )
        method = "heuristic"
    pauli_bias = game.entangled_bias_eval(report.game, game.pauli_strategy(H))
    ratio = pauli_bias / classical
    prop31 = None
    if upper is not None:
        prop31 = spectral / (RATIO_BOUND_FACTOR * N**1.5 * upper)
    return GapRow(
        n=n,
        N=N,
        seed=sample_seed,
        spectral=spectral,
        trilinear_lower=lower,
        trilinear_upper=upper,
        classical_bias=classical,
        classical_method=method,
        pauli_bias=pauli_bias,
        ratio_estimate=ratio,
        prop31_lower=prop31,
    )


def write_gap_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GAP_COLUMNS)
        for row in rows:
            w.writerow(row.as_csv_row())


def read_gap_csv(path) -> list[GapRow]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != GAP_COLUMNS:
            raise ValueError("not a gap CSV")
        for row in r:
            out.append(
                GapRow(
                    n=int(row[0]),
                    N=int(row[1]),
                    seed=int(row[2]),
                    spectral=float(row[3]),
                    trilinear_lower=float(row[4]),
                    trilinear_upper=float(row[5]) if row[5] else None,
                    classical_bias=float(row[6]),
                    classical_method=row[7],
                    pauli_bias=float(row[8]),
                    ratio_estimate=float(row[9]),
                    prop31_lower=float(row[10]) if row[10] else None,
                )
            )
    return out


def gap_sweep(
    n_list,
    samples_per_n: int,
    seed: int,
    out=None,
    budget_s: float = 1800.0,
    resume: tuple | None = None,
    **row_kwargs,
) -> tuple[list[GapRow], tuple | None]:
    """One row per (n, sample index), deterministic given the master seed.

    Stops early when the time budget runs out, writing whatever rows exist
    plus a resume token (also persisted next to `out` as JSON); pass the token
    back as `resume` to continue.  Returns (rows, resume_token_or_None).
    """
    n_list = sorted(set(n_list))
    if any(n not in (1, 2, 3) for n in n_list):
        raise ValueError("sweep sizes are limited to n in {1, 2, 3}")
    started = time.monotonic()
    rows = []
    token = None
    skipping = resume is not None
    for n in n_list:
        for idx in range(samples_per_n):
            if skipping:
                if (n, idx) == tuple(resume):
                    skipping = False
                else:
                    continue
            if time.monotonic() - started > budget_s:
                token = (n, idx)
                break
            rows.append(compute_gap_row(n, row_seed(seed, n, idx), **row_kwargs))
        if token is not None:
            break
    if out is not None:
        write_gap_csv(out, rows)
        if token is not None:
            with open(str(out) + ".resume", "w") as fh:
                json.dump(
                    {
                        "seed": seed,
                        "n_list": list(n_list),
                        "samples_per_n": samples_per_n,
                        "next": list(token),
                    },
                    fh,
                )
    return rows, token


# --- verification suites -----------------------------------------------------


@dataclass
class SuiteReport:
    name: str
    passed: bool
    lines: list


def _suite_identities(seed: int) -> SuiteReport:
    lines = []
    ok = True
    for n in (1, 2, 3):
        N = 2**n
        T = tensor.sample_tensor(n, tensor.SamplerConfig(seed=row_seed(seed, n, 0)))
        table = pauli.fourier(T)
        back = pauli.inverse_fourier(table)
        rt_err = float(np.abs(back.matrix - T.matrix).max())
        fro2 = T.frobenius_norm() ** 2
        pars_err = abs(float(np.sum(np.abs(table.coefficients) ** 2)) - N**3 * fro2)
        lam, psi = tensor.top_eigenpair(T)
        w = pauli.pauli_expectations(n, psi)
        ident_err = abs(float(np.sum(table.coefficients.real * w)) - N**3 * lam)
        sn = tensor.spectral_norm(T)
        checks = [
            ("fourier round trip", rt_err <= 1e-9),
            ("parseval", pars_err <= 1e-8 * N**3 * fro2),
            ("pauli strategy identity", ident_err <= 1e-8 * N**3 * sn),
        ]
        for label, good in checks:
            ok &= good
            lines.append(f"n={n}: {label}: {'pass' if good else 'FAIL'}")
    return SuiteReport("identities", ok, lines)


def _suite_nets(seed: int) -> SuiteReport:
    lines = []
    ok = True
    rng = np.random.default_rng(seed)
    eps = 0.5
    pnet1 = nets.projector_net(2, 1, eps, seed=seed)
    worst, witness = 0.0, None
    for _ in range(2000):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        d = pnet1.nearest_distance(np.outer(v, v.conj()))
        if d > worst:
            worst, witness = d, v
    good = worst <= eps
    ok &= good
    lines.append(f"projector net covering (k=1): worst {worst:.3f} <= {eps}: {'pass' if good else 'FAIL'}")
    if not good:
        lines.append(f"  witness unit vector: {witness!r}")

    snet = nets.sphere_net(2, eps)
    for dim_count, label in ((2, "complex"), (4, "real")):
        ref = (1.0 + 2.0 / eps) ** dim_count
        lines.append(
            f"sphere net cardinality {len(snet)} vs (1+2/eps)^{dim_count} = {ref:.0f} "
            f"({label}-dimension reading; diagnostic only)"
        )
    pnets = {k: nets.projector_net(2, k, eps, seed=seed) for k in (1, 2)}
    for k in (1, 2):
        ref = 2.0 * (5.0 / eps) ** (k * 2)
        lines.append(
            f"projector net k={k} cardinality {len(pnets[k])} vs 2(5/eps)^(kN) = {ref:.0f} "
            f"(diagnostic only)"
        )
    count = sum(
        len(pnets[k]) * len(pnets[l]) * len(pnets[m])
        for k in (1, 2)
        for l in (1, 2)
        for m in (1, 2)
    )
    streamed = nets.triple_net_size(2, eps, seed=seed)
    good = streamed == count
    ok &= good
    lines.append(f"triple net size {streamed} == product formula {count}: {'pass' if good else 'FAIL'}")

    worst, witness = 0.0, None
    elems = {k: np.array([M.reshape(-1) for M in pnets[k].elements]) for k in (1, 2)}
    for _ in range(300):
        picks = []
        for _mode in range(3):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v /= np.linalg.norm(v)
            X = np.outer(v, v.conj()) if rng.random() < 0.5 else np.eye(2) / np.sqrt(2)
            picks.append(X)
        prod = np.kron(np.kron(picks[0], picks[1]), picks[2])
        # per-factor nearest net elements certify the 3-eps product distance
        approx = []
        for X in picks:
            flat = X.reshape(-1)
            best_d, best_e = np.inf, None
            for k in (1, 2):
                d2 = np.sum(np.abs(elems[k] - flat) ** 2, axis=1)
                i = int(np.argmin(d2))
                if d2[i] < best_d:
                    best_d, best_e = d2[i], pnets[k].elements[i]
            approx.append(best_e)
        tilde = np.kron(np.kron(approx[0], approx[1]), approx[2])
        d = float(np.linalg.norm(prod - tilde))
        if d > worst:
            worst, witness = d, picks
    good = worst <= 3 * eps
    ok &= good
    lines.append(f"triple net covering: worst {worst:.3f} <= {3*eps}: {'pass' if good else 'FAIL'}")
    if not good:
        lines.append(f"  witness factors: {witness!r}")
    return SuiteReport("nets", ok, lines)


def _suite_lorentz(seed: int) -> SuiteReport:
    lines = []
    ok = True
    rng = np.random.default_rng(seed)
    for N in (2, 4, 8, 16):
        worst_rec, worst_l1 = 0.0, 0.0
        for _ in range(200):
            M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
            H = (M + M.conj().T) / 2.0
            H /= np.linalg.norm(H) * (1.0 + rng.random())
            dec = nets.lorentz_decompose(H)
            worst_rec = max(worst_rec, float(np.abs(dec.reconstruct() - H).max()))
            worst_l1 = max(worst_l1, dec.coefficient_l1())
        bound = min(nets.coefficient_bound(N), nets.coefficient_bound_sharp(N))
        good = worst_rec <= 1e-10 and worst_l1 <= bound
        ok &= good
        lines.append(
            f"N={N}: reconstruction {worst_rec:.2e}, l1 {worst_l1:.3f} <= {bound:.3f}: "
            f"{'pass' if good else 'FAIL'}"
        )
    return SuiteReport("lorentz", ok, lines)


def _suite_tails(seed: int) -> SuiteReport:
    lines = []
    ok = True
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    A = (M + M.conj().T) / 2.0
    cases = [
        ("gaussian", {}),
        ("chi_square", {"N": 16}),
        ("quad_form_gaussian", {"A": A}),
        ("bernoulli_projection", {"a": rng.standard_normal(8), "N": 8}),
    ]
    for name, params in cases:
        rep = concentration.empirical_tail(name, params, trials=20_000, seed=seed)
        ok &= rep.passed
        lines.append(f"{name}: {'pass' if rep.passed else 'FAIL'}")
    return SuiteReport("tails", ok, lines)


def _suite_theorems(seed: int) -> SuiteReport:
    lines = []
    ok = True
    fixtures = []
    mg = game.mermin_game()
    beta_m, _ = game.classical_bias_exact(mg)
    fixtures.append(("mermin", mg, game.entangled_bias_eval(mg, game.ghz_strategy()), 2, beta_m))
    cg = game.embedded_chsh_game()
    beta_c, _ = game.classical_bias_exact(cg)
    star_c, _ = game.seesaw_entangled_bias(cg, 2, restarts=6, seed=seed)
    fixtures.append(("embedded chsh", cg, star_c, 2, beta_c))
    for idx in range(10):
        T = tensor.sample_tensor(1, tensor.SamplerConfig(seed=row_seed(seed, 1, idx)))
        rep = game.game_from_tensor(T)
        beta, _ = game.classical_bias_exact(rep.game)
        star_lb = game.entangled_bias_eval(rep.game, game.pauli_strategy(tensor.hermitize(T)))
        fixtures.append((f"sampled n=1 #{idx}", rep.game, star_lb, 2, beta))
    for name, G, star_lb, d, beta in fixtures:
        qb = game.check_question_bound(G, star_lb, beta)
        db = game.check_dimension_bound(G, star_lb, d, beta)
        good = qb.ok and db.ok
        ok &= good
        lines.append(
            f"{name}: beta*={star_lb:.4f} beta={beta:.4f} "
            f"Q-bound slack {qb.slack:.4f}, d-bound slack {db.slack:.4f}: "
            f"{'pass' if good else 'FAIL'}"
        )
    return SuiteReport("theorems", ok, lines)


def _suite_spectral_lb(seed: int) -> SuiteReport:
    lines = []
    ok = True
    for n, trials in ((1, 60), (2, 40), (3, 20)):
        rep = concentration.verify_spectral_lb(n, trials=trials, seed=seed)
        monotone = bool(np.all(np.diff(rep.fraction_meeting) >= 0.0))
        finite = bool(np.all(np.isfinite(rep.ratios)))
        good = monotone and finite
        ok &= good
        lines.append(
            f"n={n}: median ratio {rep.median:.3f}, fractions {np.round(rep.fraction_meeting, 2)}: "
            f"{'pass' if good else 'FAIL'}"
        )
    return SuiteReport("spectral_lb", ok, lines)


SUITES = {
    "identities": _suite_identities,
    "nets": _suite_nets,
    "lorentz": _suite_lorentz,
    "tails": _suite_tails,
    "theorems": _suite_theorems,
    "spectral_lb": _suite_spectral_lb,
}


def verify_suite(which: str, seed: int = 0) -> SuiteReport:
    """Run one named invariant battery."""
    if which not in SUITES:
        raise ValueError(f"unknown suite {which!r}; choose from {sorted(SUITES)}")
    return SUITES[which](seed)


# --- file summaries ----------------------------------------------------------


def show(path) -> str:
    """Human-readable summary of a tensor file, game CSV, or gap CSV."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"XGT1":
        T = tensor.load_tensor(path)
        return (
            f"tensor file: n={T.n} N={T.N} hermitian={T.is_hermitian()} "
            f"frobenius={T.frobenius_norm():.6g} raw_g={'yes' if T.raw_g is not None else 'no'}"
        )
    try:
        head.decode("ascii", errors="strict")
    except UnicodeDecodeError:
        raise ValueError(f"unrecognized file format: {path}")
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
    if header == ["q1", "q2", "q3", "pi", "sign"]:
        G = game.load_game_csv(path)
        support = int(np.count_nonzero(G.pi))
        pos = G.pi[G.pi > 0]
        return (
            f"game CSV: Q={G.Q} support={support} "
            f"min_pi={pos.min():.6g} max_pi={pos.max():.6g}"
        )
    if header == GAP_COLUMNS:
        rows = read_gap_csv(path)
        out = ["gap CSV: ratio_estimate quantiles per n"]
        for n in sorted({r.n for r in rows}):
            vals = np.array([r.ratio_estimate for r in rows if r.n == n])
            out.append(
                f"  n={n}: count={vals.size} q25={np.quantile(vals, 0.25):.4f} "
                f"median={np.median(vals):.4f} q75={np.quantile(vals, 0.75):.4f}"
            )
        return "\n".join(out)
    raise ValueError(f"unrecognized file format: {path}")
