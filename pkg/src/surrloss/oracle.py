"""Brute-force oracles on fully enumerated problems.

A FiniteProblem stores the whole joint table rho[x, y], so expected risks,
the Bayes predictor, the surrogate minimizer g*, and both sides of the
surrogate comparison inequality are computable exactly (up to rounding).
These power the `check` battery: decoding g* must attain the Bayes risk,
the excess structured risk must stay under 2 c_delta sqrt(excess surrogate
risk), the least-squares classifier must match the decoded predictor on
classification problems, and excess risk must shrink with the sample size
under the n^(-1/4) regularization schedule.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import decoders, kernels, losses, surrogate

MASS_ATOL = 1e-12


@dataclass(frozen=True)
class FiniteProblem:
    xs: list
    ys: list
    rho: np.ndarray  # (|X|, |Y|) joint probabilities

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (len(self.xs), len(self.ys)):
            raise ValueError("rho shape must be (|X|, |Y|)")
        if np.any(rho < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(rho.sum() - 1.0) > MASS_ATOL:
            raise ValueError("joint table must sum to 1")
        if np.any(rho.sum(axis=1) <= 0):
            raise ValueError("every listed x needs positive marginal mass")

    @property
    def marginal_x(self):
        return self.rho.sum(axis=1)

    @property
    def conditionals(self):
        return self.rho / self.rho.sum(axis=1, keepdims=True)


def random_problem(rng, nx_range=(2, 5), ny_range=(2, 6), ys=None):
    """Dirichlet(1) joint table over a small enumerable domain."""
    nx = int(rng.integers(nx_range[0], nx_range[1] + 1))
    if ys is None:
        ny = int(rng.integers(ny_range[0], ny_range[1] + 1))
        ys = list(range(ny))
    else:
        ys = list(ys)
        ny = len(ys)
    rho = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
    # guard the positive-marginal convention
    rho += 1e-9
    rho /= rho.sum()
    return FiniteProblem(xs=list(range(nx)), ys=ys, rho=rho)


def structured_risk(p, loss, f):
    """E(f) = sum_{x,y} rho[x, y] * loss(f(x), y); f is indexed like p.xs."""
    if len(f) != len(p.xs):
        raise ValueError("f must assign an output to every x")
    total = 0.0
    for ix in range(len(p.xs)):
        fx = f[ix]
        for iy, y in enumerate(p.ys):
            total += p.rho[ix, iy] * loss(fx, y)
    return float(total)


def conditional_risks(p, loss):
    """(|X|, |Y|) table: risk of predicting candidate y at input x."""
    cond = p.conditionals
    ny = len(p.ys)
    table = np.empty((len(p.xs), ny))
    lmat = np.empty((ny, ny))
    for i, a in enumerate(p.ys):
        for j, b in enumerate(p.ys):
            lmat[i, j] = loss(a, b)
    for ix in range(len(p.xs)):
        table[ix] = lmat @ cond[ix]
    return table


def bayes_optimal(p, loss):
    """Per-input conditional-risk argmin (lowest index) and its risk."""
    table = conditional_risks(p, loss)
    f = [p.ys[int(np.argmin(table[ix]))] for ix in range(len(p.xs))]
    return f, structured_risk(p, loss, f)


def gstar_embedding(p, embedding):
    """g*(x) = conditional distribution of y given x, in canonical coordinates."""
    if list(map(embedding.index_of, p.ys)) != list(range(len(p.ys))):
        raise ValueError("embedding labels must enumerate p.ys in order")
    return p.conditionals.copy()


def surrogate_risk(p, embedding, g):
    """R(g) = sum_{x,y} rho[x, y] ||g(x) - psi(y)||^2."""
    g = np.asarray(g, dtype=float)
    if g.shape != (len(p.xs), len(p.ys)):
        raise ValueError("g must be (|X|, |Y|)")
    total = 0.0
    for ix in range(len(p.xs)):
        for iy in range(len(p.ys)):
            diff = g[ix].copy()
            diff[iy] -= 1.0
            total += p.rho[ix, iy] * float(diff @ diff)
    return total


def decode_tabular(g, embedding, p):
    """d(g(x)) = argmin_y (V g(x))[q(y)], lowest index on ties."""
    g = np.asarray(g, dtype=float)
    scores = g @ embedding.V.T  # scores[ix, i] = <e_i, V g(x)>
    return [p.ys[int(np.argmin(scores[ix]))] for ix in range(len(p.xs))]


def check_fisher(p, loss):
    """Gap between the risk of decoding g* and the Bayes risk (expect ~0)."""
    emb = losses.build_finite_embedding(loss, p.ys)
    gstar = gstar_embedding(p, emb)
    decoded = decode_tabular(gstar, emb, p)
    _, bayes = bayes_optimal(p, loss)
    gap = structured_risk(p, loss, decoded) - bayes
    return {"gap": gap, "bayes_risk": bayes}


def check_comparison(p, loss, g, tol=1e-9):
    """Both sides of E(d.g) - E(f*) <= 2 c_delta sqrt(R(g) - R(g*))."""
    emb = losses.build_finite_embedding(loss, p.ys)
    gstar = gstar_embedding(p, emb)
    decoded = decode_tabular(np.asarray(g, dtype=float), emb, p)
    _, bayes = bayes_optimal(p, loss)
    lhs = structured_risk(p, loss, decoded) - bayes
    excess = surrogate_risk(p, emb, g) - surrogate_risk(p, emb, gstar)
    rhs = 2.0 * emb.c_delta * np.sqrt(max(0.0, excess))
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs + tol)}


def enumerate_all_predictors(p):
    """Every map X -> Y; exponential, for tiny problems only."""
    return itertools.product(p.ys, repeat=len(p.xs))


# ---------------------------------------------------------------------------
# Classification equivalence: the least-squares classifier argmax_i ghat_i(x)
# equals the decoded predictor for the misclassification loss (V = ones - I),
# provided both break ties toward the lowest label index.

def sample_classification_dataset(rng, n, n_labels, dim=2, spread=2.0):
    centers = rng.normal(scale=spread, size=(n_labels, dim))
    labels = rng.integers(0, n_labels, size=n)
    X = centers[labels] + rng.normal(size=(n, dim))
    return X, [int(t) for t in labels]


def check_ls_equivalence(X, Y, kernel, lam, X_test=None):
    """Exact agreement of argmax ghat and the decoded classifier."""
    label_set = sorted(set(Y))
    emb = losses.build_finite_embedding(losses.ZeroOne(label_set), label_set)
    model = surrogate.fit(X, Y, kernel, lam)
    if X_test is None:
        X_test = model.X
    loss = losses.ZeroOne(label_set)
    mismatches = 0
    checked = 0
    for x in np.asarray(X_test, dtype=float):
        g = surrogate.explicit_g_hat(model, emb, x)
        c_hat = label_set[int(np.argmax(g))]
        a = surrogate.alpha_weights(model, x).weights
        f_hat, _ = decoders.decode_exhaustive(label_set, a, loss, model.Y)
        checked += 1
        if c_hat != f_hat:
            mismatches += 1
    return {"checked": checked, "mismatches": mismatches, "ok": mismatches == 0}


# ---------------------------------------------------------------------------
# Consistency trend: with lambda_n = n^(-1/4), the excess structured risk of
# the fitted-and-decoded predictor should shrink as n grows.

def sample_from_problem(p, rng, n, x_embed):
    flat = p.rho.ravel()
    draws = rng.choice(flat.size, size=n, p=flat / flat.sum())
    ix, iy = np.unravel_index(draws, p.rho.shape)
    X = x_embed[ix]
    Y = [p.ys[j] for j in iy]
    return X, Y


def empirical_excess_risk(p, loss, x_embed, X, Y, lam, kernel):
    """Fit on a sample, decode at every x in the domain, excess risk exactly."""
    model = surrogate.fit(X, Y, kernel, lam)
    f = []
    for ix in range(len(p.xs)):
        a = surrogate.alpha_weights(model, x_embed[ix]).weights
        y, _ = decoders.decode_exhaustive(p.ys, a, loss, model.Y)
        f.append(y)
    _, bayes = bayes_optimal(p, loss)
    return structured_risk(p, loss, f) - bayes


def check_consistency_trend(p, loss, n_grid=(25, 50, 100, 200, 400), seeds=20,
                            kernel=None, seed0=0):
    """Median excess risk per n under lambda_n = n^(-1/4)."""
    if kernel is None:
        kernel = kernels.gaussian(1.0)
    x_embed = np.arange(len(p.xs), dtype=float)[:, None]
    medians = []
    per_n = []
    for n in n_grid:
        lam = float(n) ** -0.25
        vals = []
        for s in range(seeds):
            rng = np.random.default_rng(seed0 + 1000 * s + n)
            X, Y = sample_from_problem(p, rng, n, x_embed)
            vals.append(empirical_excess_risk(p, loss, x_embed, X, Y, lam, kernel))
        per_n.append(vals)
        medians.append(float(np.median(vals)))
    return {"n_grid": list(n_grid), "medians": medians, "per_n": per_n}


# ---------------------------------------------------------------------------
# Check batteries used by the CLI and the acceptance suite.

def rank_loss_table(items):
    """The ranking loss restricted to all permutations of `items` items,
    tabulated as a finite loss; the second argument's ratings are read off
    its ranks (rank 1 -> rating `items`)."""
    perms = [tuple(pm) for pm in itertools.permutations(range(1, items + 1))]
    rl = losses.RankLoss()
    table = np.empty((len(perms), len(perms)))
    for j, target in enumerate(perms):
        ratings = np.array([items + 1 - r for r in target], dtype=float)
        for i, cand in enumerate(perms):
            table[i, j] = rl(np.array(cand), ratings)
    return losses.FiniteTable(perms, table)


def random_table_loss(rng, labels):
    """Random non-negative loss table with zero diagonal."""
    t = rng.uniform(0.0, 1.0, size=(len(labels), len(labels)))
    np.fill_diagonal(t, 0.0)
    return losses.FiniteTable(labels, t)


def _loss_families(rng, family):
    """(problem, loss) draw for one trial of a check battery."""
    if family == "zero_one":
        p = random_problem(rng)
        return p, losses.ZeroOne(p.ys)
    if family == "table":
        p = random_problem(rng)
        return p, random_table_loss(rng, p.ys)
    if family == "rank_s3":
        loss = rank_loss_table(3)
        p = random_problem(rng, ys=loss.labels)
        return p, loss
    raise ValueError(f"unknown family {family!r}")


FISHER_FAMILIES = ("zero_one", "table", "rank_s3")


def fisher_battery(trials_per_family=50, seed=0, families=FISHER_FAMILIES):
    rng = np.random.default_rng(seed)
    gaps = []
    for family in families:
        for _ in range(trials_per_family):
            p, loss = _loss_families(rng, family)
            gaps.append(abs(check_fisher(p, loss)["gap"]))
    return {"trials": len(gaps), "max_abs_gap": float(max(gaps))}


def comparison_battery(trials=1000, seed=0, tol=1e-9):
    """Random (problem, g) pairs; g mixes perturbations of g* and raw noise."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = -np.inf
    for t in range(trials):
        family = ("zero_one", "table")[t % 2]
        p, loss = _loss_families(rng, family)
        emb = losses.build_finite_embedding(loss, p.ys)
        gstar = gstar_embedding(p, emb)
        if t % 3 == 0:
            g = rng.normal(size=gstar.shape)
        else:
            scale = 10.0 ** rng.uniform(-6, 1)
            g = gstar + scale * rng.normal(size=gstar.shape)
        rep = check_comparison(p, loss, g, tol=tol)
        worst = max(worst, rep["lhs"] - rep["rhs"])
        if not rep["holds"]:
            violations += 1
    return {"trials": trials, "violations": violations, "worst_margin": float(worst)}


def equivalence_battery(trials=100, seed=0, max_n=50, max_labels=5):
    rng = np.random.default_rng(seed)
    total_checked = 0
    total_mismatch = 0
    for _ in range(trials):
        n = int(rng.integers(5, max_n + 1))
        n_labels = int(rng.integers(2, max_labels + 1))
        X, Y = sample_classification_dataset(rng, n, n_labels)
        lam = 10.0 ** rng.uniform(-3, 0)
        sigma = 10.0 ** rng.uniform(-0.5, 1.0)
        X_test = np.vstack([X, rng.normal(scale=2.0, size=(20, X.shape[1]))])
        rep = check_ls_equivalence(X, Y, kernels.gaussian(sigma), lam, X_test)
        total_checked += rep["checked"]
        total_mismatch += rep["mismatches"]
    return {"trials": trials, "checked": total_checked, "mismatches": total_mismatch}


def default_trend_problem():
    """3 x 3 misclassification problem with moderate conditional margins."""
    cond = np.array([
        [0.55, 0.30, 0.15],
        [0.20, 0.50, 0.30],
        [0.25, 0.30, 0.45],
    ])
    rho = cond / cond.shape[0]
    return FiniteProblem(xs=[0, 1, 2], ys=[0, 1, 2], rho=rho)


def trend_non_increasing(medians, allowed_inversions=1, rel_slack=0.10):
    """Non-increasing up to `allowed_inversions` bumps of <= rel_slack each."""
    inversions = 0
    for prev, cur in zip(medians, medians[1:]):
        if cur > prev + 1e-15:
            if prev <= 0 or (cur - prev) / prev > rel_slack:
                return False
            inversions += 1
    return inversions <= allowed_inversions
