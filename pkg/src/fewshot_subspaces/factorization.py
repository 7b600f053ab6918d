"""Non-negative factorization by multiplicative updates, plus the
supervised variant that couples a logistic-regression head to the factors.

The plain factorization alternates the classic multiplicative updates

    K <- K * (Y X^T) / (K X X^T),    X <- X * (K^T Y) / (K^T K X)

with denominators floored at 1e-12. The supervised fit keeps the K update,
moves X by an ADADELTA step on the total objective

    1/2 ||Y - K X||_F^2
      + (lambda/N) * (sum_i log(1 + exp(z_i . beta)) - u^T Z beta)

with Z = [1 | Y X^T], projects X back to positivity (entries < 0 become
1e-8), and moves beta by an ADADELTA step on the logistic gradient.

Both factors are initialized i.i.d. uniform on (0, 1] scaled by
sqrt(mean(Y)/p), K drawn before X, from a PCG64 generator; identical
seeds give bitwise-identical models.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NegativeEntry, NotBinary

__all__ = [
    "NmfModel",
    "SnmfModel",
    "AdadeltaState",
    "nmf_fit",
    "nmf_update_loop",
    "nmf_transform",
    "snmf_fit",
    "snmf_objective",
    "snmf_gradients",
    "snmf_predict_proba",
    "adadelta_step",
    "reconstruction_error",
    "model_to_json",
    "model_from_json",
    "trace_to_csv",
]

# Floor applied to multiplicative-update denominators; prevents 0/0 on
# sparse inputs without materially altering the updates.
DENOM_FLOOR = 1e-12

# Replacement value of the positivity projection in the supervised fit.
PROJ_EPS = 1e-8

DEFAULT_RHO = 0.95
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class NmfModel:
    """Factor pair Y ~ K X with the per-iteration Frobenius error trace."""

    k: np.ndarray  # N x p coefficients
    x: np.ndarray  # p x M basis
    rank: int
    seed: int
    iters: int
    error_trace: np.ndarray


@dataclass(frozen=True)
class SnmfModel:
    """Supervised factor pair with logistic coefficients beta (p+1,)."""

    k: np.ndarray
    x: np.ndarray
    rank: int
    seed: int
    iters: int
    logit_coefficients: np.ndarray
    lambda_reg: float
    loss_trace: np.ndarray
    rho: float = DEFAULT_RHO
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class AdadeltaState:
    """Running averages of squared gradients and squared steps."""

    grad_accum: np.ndarray
    step_accum: np.ndarray
    rho: float = DEFAULT_RHO
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise InvalidInput("rho must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise InvalidInput("epsilon must be positive")

    @classmethod
    def zeros(cls, shape, rho=DEFAULT_RHO, epsilon=DEFAULT_EPSILON):
        return cls(
            grad_accum=np.zeros(shape),
            step_accum=np.zeros(shape),
            rho=rho,
            epsilon=epsilon,
        )


def adadelta_step(state, grad):
    """One ADADELTA update: returns (step, new state).

    The step already carries the minus sign, so parameters move as
    ``theta <- theta + step``.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.grad_accum.shape:
        raise InvalidInput(
            f"gradient shape {grad.shape} does not match state {state.grad_accum.shape}"
        )
    grad_accum = state.rho * state.grad_accum + (1.0 - state.rho) * grad**2
    step = -np.sqrt(state.step_accum + state.epsilon) / np.sqrt(
        grad_accum + state.epsilon
    ) * grad
    step_accum = state.rho * state.step_accum + (1.0 - state.rho) * step**2
    return step, AdadeltaState(
        grad_accum=grad_accum,
        step_accum=step_accum,
        rho=state.rho,
        epsilon=state.epsilon,
    )


def reconstruction_error(k, x, y):
    """Frobenius norm of Y - K X."""
    k = np.asarray(k, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if k.ndim != 2 or x.ndim != 2 or y.ndim != 2:
        raise InvalidInput("reconstruction_error expects matrices")
    if k.shape[1] != x.shape[0] or y.shape != (k.shape[0], x.shape[1]):
        raise InvalidInput(
            f"shapes do not conform: K {k.shape}, X {x.shape}, Y {y.shape}"
        )
    return float(np.linalg.norm(y - k @ x))


def _check_nonnegative(y, name="matrix"):
    y = np.asarray(y, dtype=np.float64)
    bad = np.argwhere(y < 0)
    if bad.size:
        r, c = bad[0]
        raise NegativeEntry(int(r), int(c), float(y[r, c]))
    return y


def _init_factors(y, p, seed):
    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(y.mean(), 0.0) / p)
    k = (1.0 - rng.random((y.shape[0], p))) * scale  # uniform on (0, 1]
    x = (1.0 - rng.random((p, y.shape[1]))) * scale
    return k, x


def _update_k(y, k, x):
    numer = y @ x.T
    denom = k @ (x @ x.T)
    return k * numer / np.maximum(denom, DENOM_FLOOR)


def _update_x(y, k, x):
    numer = k.T @ y
    denom = (k.T @ k) @ x
    return x * numer / np.maximum(denom, DENOM_FLOOR)


def nmf_update_loop(y, k, x, iters):
    """Run ``iters`` rounds of the multiplicative updates (K then X).

    Returns the final factors and the per-round Frobenius error trace.
    Exposed so callers can continue from arbitrary starting factors.
    """
    trace = np.empty(iters)
    for it in range(iters):
        k = _update_k(y, k, x)
        x = _update_x(y, k, x)
        trace[it] = np.linalg.norm(y - k @ x)
    return k, x, trace


def nmf_fit(y, p, iters=3000, seed=0):
    """Factor a non-negative matrix as Y ~ K X with rank p."""
    y = _check_nonnegative(y)
    n, m = y.shape
    if not 1 <= p < min(n, m):
        raise InvalidInput(f"rank must be in 1..{min(n, m) - 1}, got {p}")
    if iters < 1:
        raise InvalidInput("iters must be >= 1")
    k, x, trace = nmf_update_loop(y, *_init_factors(y, p, seed), iters)
    return NmfModel(k=k, x=x, rank=p, seed=seed, iters=iters, error_trace=trace)


def nmf_transform(x, samples, iters=3000, seed=0):
    """Project new samples onto a fixed basis X by non-negative least squares.

    Runs the K update alone on freshly initialized positive coefficients,
    which is the same operator the fit used.
    """
    x = np.asarray(x, dtype=np.float64)
    samples = _check_nonnegative(samples, "samples")
    if samples.ndim != 2 or samples.shape[1] != x.shape[1]:
        raise InvalidInput(
            f"samples have {samples.shape[-1]} features, basis expects {x.shape[1]}"
        )
    p = x.shape[0]
    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(samples.mean(), 0.0) / p)
    if scale == 0.0:
        return np.zeros((samples.shape[0], p))
    k = (1.0 - rng.random((samples.shape[0], p))) * scale
    xxt = x @ x.T
    numer = samples @ x.T
    for _ in range(iters):
        k = k * numer / np.maximum(k @ xxt, DENOM_FLOOR)
    return k


def _logits(y, x, beta):
    return beta[0] + y @ x.T @ beta[1:]


def _sigmoid(a):
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def snmf_objective(y, u, k, x, beta, lambda_reg):
    """Total supervised objective: Frobenius term plus logistic loss."""
    frob = 0.5 * np.linalg.norm(y - k @ x) ** 2
    if lambda_reg == 0.0:
        return float(frob)
    a = _logits(y, x, beta)
    z_beta = a  # z_i . beta
    log_part = np.logaddexp(0.0, z_beta).sum()
    return float(frob + lambda_reg / y.shape[0] * (log_part - u @ z_beta))


def snmf_gradients(y, u, k, x, beta, lambda_reg):
    """Analytic gradients of the total objective w.r.t. X and beta."""
    n = y.shape[0]
    grad_x = -k.T @ (y - k @ x)
    a = _logits(y, x, beta)
    resid = _sigmoid(a) - u  # sigma(a_i) - u_i
    if lambda_reg != 0.0:
        grad_x = grad_x + (lambda_reg / n) * np.outer(beta[1:], resid @ y)
    z = np.column_stack([np.ones(n), y @ x.T])
    grad_beta = (lambda_reg / n) * (z.T @ resid)
    return grad_x, grad_beta


def snmf_predict_proba(model, samples):
    """Class-1 probability from the logistic head, sigma(z . beta)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[1] != model.x.shape[1]:
        raise InvalidInput(
            f"samples have {samples.shape[1]} features, model expects {model.x.shape[1]}"
        )
    return _sigmoid(_logits(samples, model.x, model.logit_coefficients))


def snmf_fit(
    y,
    u,
    p,
    lambda_reg=1.0,
    iters=3000,
    seed=0,
    rho=DEFAULT_RHO,
    epsilon=DEFAULT_EPSILON,
):
    """Supervised non-negative factorization for a binary problem.

    Per iteration: multiplicative K update; ADADELTA step on X from the
    total-objective gradient followed by the positivity projection;
    ADADELTA step on beta. The loss trace records the total objective
    after each iteration. beta starts at zero.
    """
    y = _check_nonnegative(y)
    u = np.asarray(u)
    if u.shape != (y.shape[0],) or not np.isin(u, (0, 1)).all():
        raise NotBinary("labels must be a {0,1} vector with one entry per row")
    if len(np.unique(u)) != 2:
        raise NotBinary("labels must contain both classes")
    u = u.astype(np.float64)
    n, m = y.shape
    if not 1 <= p < min(n, m):
        raise InvalidInput(f"rank must be in 1..{min(n, m) - 1}, got {p}")
    if iters < 1:
        raise InvalidInput("iters must be >= 1")
    if lambda_reg < 0:
        raise InvalidInput("lambda_reg must be non-negative")

    k, x = _init_factors(y, p, seed)
    beta = np.zeros(p + 1)
    state_x = AdadeltaState.zeros((p, m), rho=rho, epsilon=epsilon)
    state_b = AdadeltaState.zeros(p + 1, rho=rho, epsilon=epsilon)
    ones = np.ones(n)
    trace = np.empty(iters)
    for it in range(iters):
        k = _update_k(y, k, x)
        grad_x, _ = snmf_gradients(y, u, k, x, beta, lambda_reg)
        step_x, state_x = adadelta_step(state_x, grad_x)
        x = x + step_x
        x = np.where(x < 0.0, PROJ_EPS, x)
        coeffs = y @ x.T  # N x p, shared by logits and Z
        a = beta[0] + coeffs @ beta[1:]
        resid = _sigmoid(a) - u
        z = np.column_stack([ones, coeffs])
        grad_b = (lambda_reg / n) * (z.T @ resid)
        step_b, state_b = adadelta_step(state_b, grad_b)
        beta = beta + step_b
        frob = 0.5 * np.linalg.norm(y - k @ x) ** 2
        a_new = beta[0] + coeffs @ beta[1:]
        trace[it] = frob + lambda_reg / n * (
            np.logaddexp(0.0, a_new).sum() - u @ a_new
        )

    return SnmfModel(
        k=k,
        x=x,
        rank=p,
        seed=seed,
        iters=iters,
        logit_coefficients=beta,
        lambda_reg=lambda_reg,
        loss_trace=trace,
        rho=rho,
        epsilon=epsilon,
    )


def model_to_json(model):
    """Serialize a factorization model to JSON (row-major K and X)."""
    doc = {
        "rank": int(model.rank),
        "seed": int(model.seed),
        "iters": int(model.iters),
        "k_rows": int(model.k.shape[0]),
        "x_cols": int(model.x.shape[1]),
        "k": [float(v) for v in model.k.ravel()],
        "x": [float(v) for v in model.x.ravel()],
    }
    if isinstance(model, SnmfModel):
        doc["kind"] = "snmf"
        doc["beta"] = [float(v) for v in model.logit_coefficients]
        doc["lambda_reg"] = float(model.lambda_reg)
        doc["rho"] = float(model.rho)
        doc["epsilon"] = float(model.epsilon)
        doc["final_loss"] = float(model.loss_trace[-1])
    else:
        doc["kind"] = "nmf"
        doc["final_error"] = float(model.error_trace[-1])
    return json.dumps(doc, indent=2)


def model_from_json(text):
    doc = json.loads(text)
    p = doc["rank"]
    k = np.asarray(doc["k"], dtype=np.float64).reshape(doc["k_rows"], p)
    x = np.asarray(doc["x"], dtype=np.float64).reshape(p, doc["x_cols"])
    if doc["kind"] == "snmf":
        return SnmfModel(
            k=k,
            x=x,
            rank=p,
            seed=doc["seed"],
            iters=doc["iters"],
            logit_coefficients=np.asarray(doc["beta"], dtype=np.float64),
            lambda_reg=doc["lambda_reg"],
            loss_trace=np.asarray([doc["final_loss"]]),
            rho=doc["rho"],
            epsilon=doc["epsilon"],
        )
    return NmfModel(
        k=k,
        x=x,
        rank=p,
        seed=doc["seed"],
        iters=doc["iters"],
        error_trace=np.asarray([doc["final_error"]]),
    )


def trace_to_csv(trace):
    """Two-column (iteration, error) CSV text for a recorded trace."""
    lines = ["iteration,error"]
    lines += [f"{i + 1},{v:.17g}" for i, v in enumerate(np.asarray(trace))]
    return "\n".join(lines) + "\n"
