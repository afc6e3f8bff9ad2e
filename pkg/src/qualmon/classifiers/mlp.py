"""Single-hidden-layer perceptron (tanh hidden, sigmoid output) trained by a
robustly weighted Levenberg-Marquardt loop, plus relevance-based pruning.

The robust criterion downweights each residual with a Tukey bisquare factor
whose scale is 1.4826 times the median absolute deviation of the current
residuals, so gross outliers stop steering the step direction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass
class RobustLmConfig:
    max_iter: int = 150
    lam0: float = 1e-2
    lam_up: float = 10.0
    lam_down: float = 0.1
    lam_max: float = 1e12
    grad_tol: float = 1e-6
    step_tol: float = 1e-10
    bisquare_c: float = 4.685


@dataclass
class MlpModel:
    w_hidden: np.ndarray  # H x D
    b_hidden: np.ndarray  # H
    w_out: np.ndarray  # H
    b_out: float
    converged: bool = True

    def __post_init__(self):
        self.w_hidden = np.atleast_2d(np.asarray(self.w_hidden, dtype=float))
        self.b_hidden = np.asarray(self.b_hidden, dtype=float)
        self.w_out = np.asarray(self.w_out, dtype=float)
        self.b_out = float(self.b_out)

    @property
    def n_hidden(self):
        return self.w_hidden.shape[0]

    @property
    def n_inputs(self):
        return self.w_hidden.shape[1]

    def hidden_activations(self, X):
        return np.tanh(np.atleast_2d(X) @ self.w_hidden.T + self.b_hidden)

    def score(self, X):
        return _sigmoid(self.hidden_activations(X) @ self.w_out + self.b_out)

    def active_inputs(self):
        """Input columns still connected through a nonzero hidden weight."""
        return np.flatnonzero(np.any(self.w_hidden != 0.0, axis=0))

    def restrict_inputs(self, keep):
        """Drop input columns not in `keep`; only exactly-zero columns may go."""
        keep = np.asarray(keep, dtype=int)
        dropped = np.setdiff1d(np.arange(self.n_inputs), keep)
        if np.any(self.w_hidden[:, dropped] != 0.0):
            raise ValueError("cannot drop inputs with nonzero weights")
        return replace(self, w_hidden=self.w_hidden[:, keep].copy())

    def to_dict(self):
        return {
            "w_hidden": self.w_hidden.tolist(),
            "b_hidden": self.b_hidden.tolist(),
            "w_out": self.w_out.tolist(),
            "b_out": self.b_out,
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            w_hidden=np.asarray(d["w_hidden"]),
            b_hidden=np.asarray(d["b_hidden"]),
            w_out=np.asarray(d["w_out"]),
            b_out=d["b_out"],
            converged=bool(d.get("converged", True)),
        )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def nw_init(n_inputs, n_hidden, seed):
    """Nguyen-Widrow start: hidden rows rescaled to norm 0.7*H^(1/D), biases
    spread evenly across [-beta, beta], small random output layer."""
    if n_inputs < 1 or n_hidden < 1:
        raise ValueError("need at least one input and one hidden unit")
    rng = np.random.default_rng(seed)
    beta = 0.7 * float(n_hidden) ** (1.0 / n_inputs)
    w = rng.uniform(-1.0, 1.0, size=(n_hidden, n_inputs))
    norms = np.linalg.norm(w, axis=1)
    while np.any(norms == 0.0):
        redo = norms == 0.0
        w[redo] = rng.uniform(-1.0, 1.0, size=(int(redo.sum()), n_inputs))
        norms = np.linalg.norm(w, axis=1)
    w *= (beta / norms)[:, None]
    b = np.linspace(-beta, beta, n_hidden) if n_hidden > 1 else np.zeros(1)
    return MlpModel(
        w_hidden=w,
        b_hidden=b,
        w_out=rng.uniform(-0.5, 0.5, size=n_hidden),
        b_out=float(rng.uniform(-0.5, 0.5)),
    )


def mlp_forward(model, x):
    """Score a single row (convenience scalar form of MlpModel.score)."""
    return float(model.score(np.atleast_2d(x))[0])


# -- parameter packing -------------------------------------------------------

def pack_params(model):
    return np.concatenate([model.w_hidden.ravel(), model.b_hidden, model.w_out, [model.b_out]])


def unpack_params(theta, n_hidden, n_inputs, converged=True):
    hw = n_hidden * n_inputs
    return MlpModel(
        w_hidden=theta[:hw].reshape(n_hidden, n_inputs).copy(),
        b_hidden=theta[hw : hw + n_hidden].copy(),
        w_out=theta[hw + n_hidden : hw + 2 * n_hidden].copy(),
        b_out=float(theta[-1]),
        converged=converged,
    )


def mlp_jacobian(model, X):
    """d(output)/d(params) row per sample; params ordered as pack_params."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    a = model.hidden_activations(X)  # N x H
    yhat = _sigmoid(a @ model.w_out + model.b_out)
    s = yhat * (1.0 - yhat)  # N
    da = (1.0 - a * a) * model.w_out  # N x H, chain through tanh
    j_wh = (s[:, None] * da)[:, :, None] * X[:, None, :]  # N x H x D
    j_bh = s[:, None] * da
    j_wout = s[:, None] * a
    j_bout = s[:, None]
    return np.concatenate([j_wh.reshape(len(X), -1), j_bh, j_wout, j_bout], axis=1)


def bisquare_weights(residuals, c=4.685, floor=1e-3):
    """Tukey bisquare weights with MAD scale; collapse to ones if scale is 0.

    Weights are floored at a small positive value: with binary targets the MAD
    can shrink once most residuals are near zero, and exact-zero weights would
    let the optimizer declare victory while ignoring a whole misfit class.
    Floored points keep ~0.1% influence, preserving the saturating behavior.
    """
    r = np.asarray(residuals, dtype=float)
    scale = 1.4826 * np.median(np.abs(r - np.median(r)))
    if scale <= 1e-12:
        return np.ones_like(r)
    u = r / (c * scale)
    w = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0)
    return np.maximum(w, floor)


def train_mlp(view, n_hidden, seed, config=None, init=None):
    """Levenberg-Marquardt fit of the robust squared-error criterion.

    Runs until the weighted gradient or the step collapses, or max_iter; a
    model that stops only on max_iter carries converged=False.
    """
    if view.n < 1:
        raise ValueError("empty training view")
    cfg = config or RobustLmConfig()
    model = init if init is not None else nw_init(view.X.shape[1], n_hidden, seed)
    theta = pack_params(model)
    h, d = model.n_hidden, model.n_inputs
    X = view.X
    y = view.y.astype(float)
    lam = cfg.lam0
    converged = False

    for _ in range(cfg.max_iter):
        current = unpack_params(theta, h, d)
        r = y - current.score(X)
        w = bisquare_weights(r, cfg.bisquare_c)
        J = mlp_jacobian(current, X)
        g = J.T @ (w * r)
        if np.max(np.abs(g)) < cfg.grad_tol:
            converged = True
            break
        JtWJ = J.T @ (w[:, None] * J)
        loss = float(np.sum(w * r * r))
        step = None
        while lam <= cfg.lam_max:
            try:
                delta = np.linalg.solve(JtWJ + lam * np.eye(len(theta)), g)
            except np.linalg.LinAlgError:
                lam *= cfg.lam_up
                continue
            trial = theta + delta
            r_trial = y - unpack_params(trial, h, d).score(X)
            if float(np.sum(w * r_trial * r_trial)) < loss:
                step = delta
                lam = max(lam * cfg.lam_down, 1e-12)
                break
            lam *= cfg.lam_up
        if step is None:  # no damping value gives a descent step
            converged = True
            break
        theta = theta + step
        if np.linalg.norm(step) < cfg.step_tol * (np.linalg.norm(theta) + cfg.step_tol):
            converged = True
            break

    return unpack_params(theta, h, d, converged=converged)


def _val_error(model, view, threshold=0.5):
    pred = (model.score(view.X) >= threshold).astype(int)
    return float(np.mean(pred != view.y))


def prune_mlp(model, train_view, val_view, config=None, retrain_iters=15, min_hidden=1, min_inputs=1):
    """Shrink the network while the validation error does not increase.

    Each round ranks removable elements (hidden units, input columns) by the
    validation-error increase observed when the element is zeroed, then tries
    removals in that order with a brief retrain; the first removal that keeps
    the validation error at or below the pre-removal level is kept. Rounds
    repeat until no element can be removed.
    """
    cfg = config or RobustLmConfig()
    retrain_cfg = replace(cfg, max_iter=retrain_iters)
    current = model

    while True:
        base_error = _val_error(current, val_view)
        candidates = []
        if current.n_hidden > min_hidden:
            for j in range(current.n_hidden):
                probe = replace(current, w_out=_zeroed(current.w_out, j))
                candidates.append((_val_error(probe, val_view) - base_error, 0, j))
        active = current.active_inputs()
        if len(active) > min_inputs:
            for col in active:
                probe = replace(current, w_hidden=_zeroed_col(current.w_hidden, col))
                candidates.append((_val_error(probe, val_view) - base_error, 1, int(col)))
        candidates.sort()

        accepted = None
        for _, kind, index in candidates:
            if kind == 0:
                trial = MlpModel(
                    w_hidden=np.delete(current.w_hidden, index, axis=0),
                    b_hidden=np.delete(current.b_hidden, index),
                    w_out=np.delete(current.w_out, index),
                    b_out=current.b_out,
                )
            else:
                trial = replace(current, w_hidden=_zeroed_col(current.w_hidden, index))
            trial = _retrain_restricted(trial, train_view, retrain_cfg)
            if _val_error(trial, val_view) <= base_error:
                accepted = trial
                break
        if accepted is None:
            return current
        current = accepted


def _retrain_restricted(model, train_view, cfg):
    """Briefly retrain on the active input columns only, so pruned (zeroed)
    columns stay out of the optimization, then re-expand to full width."""
    from ..data import DataView

    active = model.active_inputs()
    if active.size == 0:
        return model
    sub = model.restrict_inputs(active)
    sub = train_mlp(
        DataView(X=train_view.X[:, active], y=train_view.y),
        sub.n_hidden,
        seed=0,
        config=cfg,
        init=sub,
    )
    w_full = np.zeros((sub.n_hidden, model.n_inputs))
    w_full[:, active] = sub.w_hidden
    return MlpModel(w_hidden=w_full, b_hidden=sub.b_hidden, w_out=sub.w_out, b_out=sub.b_out)


def _zeroed(vec, index):
    out = vec.copy()
    out[index] = 0.0
    return out


def _zeroed_col(mat, col):
    out = mat.copy()
    out[:, col] = 0.0
    return out
