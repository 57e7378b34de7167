"""Linear max-margin learning: hinge-loss SVM, epsilon-insensitive SVR,
a logistic baseline, cross-validated grid search, and evaluation metrics.

The SVM and SVR trainers share one most-violating-pair dual solver
(pairwise coordinate updates under the box and equality constraints).
The contract is the objective, not the algorithm:

    svm:  1/2 ||w||^2 + C * sum max(0, 1 - y (w.x + b))
    svr:  1/2 ||w||^2 + C * sum max(0, |y - (w.x + b)| - eps)
    log:  1/2 ||w||^2 + C * sum log(1 + exp(-y (w.x + b)))

Training is deterministic: identical data and hyperparameters reproduce
identical weights bit for bit.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, special

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = tuple(2.0**e for e in range(-5, 6, 2))
MODEL_KINDS = ("svm_classifier", "svr", "logistic")
MODEL_FORMAT = "demoscope.linear-model"
MODEL_VERSION = 1


class LearnError(ValueError):
    pass


@dataclass
class Dataset:
    """Feature matrix plus labels (categorical) or real targets."""

    features: np.ndarray
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise LearnError("features must be a 2-D array")
        if self.features.shape[0] < 1:
            raise LearnError("empty dataset")
        if not np.all(np.isfinite(self.features)):
            raise LearnError("features must be finite (no NaN/inf)")
        labels = np.asarray(self.labels)
        if labels.shape != (self.features.shape[0],):
            raise LearnError("labels must be 1-D and match the feature rows")
        if labels.dtype.kind == "f" and not np.all(np.isfinite(labels)):
            raise LearnError("targets must be finite (no NaN/inf)")
        self.labels = labels

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, indices):
        return Dataset(self.features[indices], self.labels[indices])


@dataclass
class LinearModel:
    """Weight vector(s) plus bias for classification or regression.

    A binary classifier stores exactly one weight row (scoring the second
    class in `classes`); a K-class one-vs-rest model stores K rows.
    """

    kind: str
    classes: list | None
    weights: np.ndarray = field(repr=False)
    bias: np.ndarray = field(repr=False)
    c_param: float = 1.0
    epsilon: float | None = None
    seed: int = 0
    training: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise LearnError(f"unknown model kind {self.kind!r}")
        if self.c_param <= 0:
            raise LearnError("c_param must be > 0")
        if self.epsilon is not None and self.epsilon < 0:
            raise LearnError("epsilon must be >= 0")
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        self.bias = np.atleast_1d(np.asarray(self.bias, dtype=np.float64))
        if self.kind == "svr":
            if self.classes is not None:
                raise LearnError("a regression model carries no classes")
            expected = 1
        else:
            if self.classes is None or len(self.classes) < 2:
                raise LearnError("a classifier needs at least two classes")
            expected = 1 if len(self.classes) == 2 else len(self.classes)
        if self.weights.shape[0] != expected or self.bias.shape[0] != expected:
            raise LearnError(
                f"expected {expected} weight row(s), got {self.weights.shape[0]}"
            )

    @property
    def dim(self):
        return self.weights.shape[1]


# ---------------------------------------------------------------------------
# Dual solver


@dataclass
class _SmoResult:
    beta: np.ndarray
    w: np.ndarray
    offset: float
    history: list
    epochs: int
    converged: bool


def _smo_minimize(points, signs, point_index, linear, box, tol, max_epochs):
    """Minimize 0.5 b'Qb + linear'b s.t. 0 <= b <= box, signs'b == 0.

    Q[i, j] = signs[i] signs[j] <points[pi], points[pj]> with pi, pj taken
    from `point_index`. Each step updates the most violating pair, so the
    dual objective decreases monotonically; `history` records it at epoch
    boundaries (an epoch is one batch of len(linear) pair updates).

    Stops when the violation gap drops to `tol`, when an epoch improves
    the objective by less than `tol` relative, or at `max_epochs`.

    Internally the points are rescaled to unit RMS norm, which is an exact
    reparametrization (box and dual values scale by the squared factor);
    results are mapped back to the caller's units, so tolerances behave
    the same regardless of feature scale.
    """
    m = linear.size
    n = points.shape[0]
    norms_sq = np.einsum("ij,ij->i", points, points)
    scale = float(np.sqrt(norms_sq.mean())) if n else 1.0
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    points = points / scale
    box = box * scale**2
    diag = norms_sq / scale**2
    diag_dual = diag[point_index]  # squared norm per dual variable
    kcols = {}

    def kcol(q):
        col = kcols.get(q)
        if col is None:
            col = points @ points[q]
            kcols[q] = col
        return col

    beta = np.zeros(m)

    def refresh():
        coef = np.zeros(n)
        np.add.at(coef, point_index, signs * beta)
        w = points.T @ coef
        grad = signs * (points @ w)[point_index] + linear
        return w, grad

    def objective(w):
        return 0.5 * float(w @ w) + float(linear @ beta)

    w, grad = refresh()
    history = [objective(w)]
    epochs = 0
    converged = False
    for _ in range(max_epochs):
        for _ in range(m):
            v = -signs * grad
            can_up = ((signs > 0) & (beta < box)) | ((signs < 0) & (beta > 0))
            can_dn = ((signs < 0) & (beta < box)) | ((signs > 0) & (beta > 0))
            if not can_up.any() or not can_dn.any():
                converged = True
                break
            i = int(np.argmax(np.where(can_up, v, -np.inf)))
            if v[i] - float(np.min(np.where(can_dn, v, np.inf))) <= tol:
                converged = True
                break
            # second-order partner choice: maximize the quadratic gain of the pair
            qi = int(point_index[i])
            col_i = kcol(qi)
            cross = col_i[point_index]
            curvatures = np.maximum(diag_dual[i] + diag_dual - 2.0 * cross, 1e-12)
            diffs = v[i] - v
            gains = np.where(can_dn & (diffs > 0.0), diffs * diffs / curvatures, -np.inf)
            j = int(np.argmax(gains))
            gap = diffs[j]
            qj = int(point_index[j])
            col_j = kcol(qj)
            curvature = curvatures[j]
            room_i = box - beta[i] if signs[i] > 0 else beta[i]
            room_j = beta[j] if signs[j] > 0 else box - beta[j]
            step_max = min(room_i, room_j)
            step = min(gap / curvature, step_max)
            if step <= 0.0:  # numerically pinned at the box; no progress possible
                converged = True
                break
            new_i = min(box, max(0.0, beta[i] + signs[i] * step))
            new_j = min(box, max(0.0, beta[j] - signs[j] * step))
            delta_i = new_i - beta[i]
            delta_j = new_j - beta[j]
            beta[i] = new_i
            beta[j] = new_j
            grad = grad + signs * (
                signs[i] * delta_i * col_i[point_index]
                + signs[j] * delta_j * col_j[point_index]
            )
        epochs += 1
        w, grad = refresh()
        history.append(objective(w))
        if converged:
            break
        if abs(history[-2] - history[-1]) <= tol * max(1.0, abs(history[-1])):
            converged = True  # objective stalled within tolerance
            break

    v = -signs * grad
    free = (beta > 0.0) & (beta < box)
    if free.any():
        offset = float(v[free].mean())
    else:
        can_up = ((signs > 0) & (beta < box)) | ((signs < 0) & (beta > 0))
        can_dn = ((signs < 0) & (beta < box)) | ((signs > 0) & (beta > 0))
        hi = float(np.max(v[can_up])) if can_up.any() else None
        lo = float(np.min(v[can_dn])) if can_dn.any() else None
        if hi is None and lo is None:
            offset = 0.0
        elif hi is None:
            offset = lo
        elif lo is None:
            offset = hi
        else:
            offset = 0.5 * (hi + lo)
    # back to caller units: alpha and the dual objective scale by 1/s^2, w by 1/s
    return _SmoResult(
        beta=beta / scale**2,
        w=w / scale,
        offset=offset,
        history=[h / scale**2 for h in history],
        epochs=epochs,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Trainers


def _standardized(features, enabled):
    if not enabled:
        return features, None
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (features - mean) / std, (mean, std)


def _to_raw_space(w, b, scaler):
    # Fold the standardization into the weights so predictions run on raw features.
    if scaler is None:
        return w, float(b)
    mean, std = scaler
    w_raw = w / std
    return w_raw, float(b - w_raw @ mean)


def _string_labels(labels):
    return np.asarray([str(label) for label in np.asarray(labels)])


def train_svm(data, c, seed=0, max_epochs=1000, tol=1e-3, standardize=False):
    """L2-regularized hinge-loss SVM; one-vs-rest when more than two classes."""
    if c <= 0:
        raise LearnError("C must be positive")
    labels = _string_labels(data.labels)
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise LearnError("training data contains a single class")
    features, scaler = _standardized(data.features, standardize)
    index = np.arange(data.n)
    ones = np.ones(data.n)
    positives = [classes[1]] if len(classes) == 2 else classes
    rows, biases, per_class = [], [], []
    for positive in positives:
        y = np.where(labels == positive, 1.0, -1.0)
        result = _smo_minimize(features, y, index, -ones, float(c), tol, max_epochs)
        w, b = _to_raw_space(result.w, result.offset, scaler)
        rows.append(w)
        biases.append(b)
        per_class.append(
            {
                "positive_class": positive,
                "epochs": result.epochs,
                "converged": result.converged,
                "objective_history": result.history,
            }
        )
    return LinearModel(
        kind="svm_classifier",
        classes=classes,
        weights=np.array(rows),
        bias=np.array(biases),
        c_param=float(c),
        seed=int(seed),
        training={
            "solver": "smo",
            "tol": float(tol),
            "max_epochs": int(max_epochs),
            "standardize": bool(standardize),
            "per_class": per_class,
        },
    )


def train_svr(data, c, epsilon=0.1, seed=0, max_epochs=1000, tol=1e-3, standardize=False):
    """Epsilon-insensitive linear regression on real targets."""
    if c <= 0:
        raise LearnError("C must be positive")
    if epsilon < 0:
        raise LearnError("epsilon must be >= 0")
    if np.asarray(data.labels).dtype.kind not in "fiu":
        raise LearnError("regression targets must be numeric")
    y = np.asarray(data.labels, dtype=np.float64)
    n = data.n
    features, scaler = _standardized(data.features, standardize)
    signs = np.concatenate([np.ones(n), -np.ones(n)])
    index = np.concatenate([np.arange(n), np.arange(n)])
    linear = np.concatenate([epsilon - y, epsilon + y])
    result = _smo_minimize(features, signs, index, linear, float(c), tol, max_epochs)
    w, b = _to_raw_space(result.w, result.offset, scaler)
    return LinearModel(
        kind="svr",
        classes=None,
        weights=np.array([w]),
        bias=np.array([b]),
        c_param=float(c),
        epsilon=float(epsilon),
        seed=int(seed),
        training={
            "solver": "smo",
            "tol": float(tol),
            "max_epochs": int(max_epochs),
            "standardize": bool(standardize),
            "epochs": result.epochs,
            "converged": result.converged,
            "objective_history": result.history,
        },
    )


def logistic_objective(params, features, targets, c):
    """Value and gradient of the regularized log-loss objective.

    `params` packs (w, b); `targets` are +-1. Kept as a standalone function
    so the analytic gradient can be checked against finite differences.
    """
    w = params[:-1]
    b = params[-1]
    z = targets * (features @ w + b)
    value = 0.5 * float(w @ w) + c * float(np.logaddexp(0.0, -z).sum())
    s = special.expit(-z)
    grad_w = w - c * (features.T @ (targets * s))
    grad_b = -c * float(targets @ s)
    return value, np.append(grad_w, grad_b)


def train_logistic(data, c, seed=0, max_epochs=500, tol=1e-10, standardize=False):
    """Logistic-regression baseline with the same surface as train_svm."""
    if c <= 0:
        raise LearnError("C must be positive")
    labels = _string_labels(data.labels)
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise LearnError("training data contains a single class")
    features, scaler = _standardized(data.features, standardize)
    positives = [classes[1]] if len(classes) == 2 else classes
    rows, biases, per_class = [], [], []
    for positive in positives:
        y = np.where(labels == positive, 1.0, -1.0)
        history = [logistic_objective(np.zeros(data.dim + 1), features, y, c)[0]]
        result = optimize.minimize(
            logistic_objective,
            x0=np.zeros(data.dim + 1),
            args=(features, y, float(c)),
            jac=True,
            method="L-BFGS-B",
            callback=lambda xk: history.append(logistic_objective(xk, features, y, c)[0]),
            options={"maxiter": int(max_epochs), "ftol": float(tol), "gtol": 1e-10},
        )
        w, b = _to_raw_space(result.x[:-1], result.x[-1], scaler)
        rows.append(w)
        biases.append(b)
        per_class.append(
            {
                "positive_class": positive,
                "epochs": int(result.nit),
                "converged": bool(result.success),
                "objective_history": [float(v) for v in history],
            }
        )
    return LinearModel(
        kind="logistic",
        classes=classes,
        weights=np.array(rows),
        bias=np.array(biases),
        c_param=float(c),
        seed=int(seed),
        training={
            "solver": "l-bfgs-b",
            "tol": float(tol),
            "max_epochs": int(max_epochs),
            "standardize": bool(standardize),
            "per_class": per_class,
        },
    )


_TRAINERS = {"svm": train_svm, "logistic": train_logistic}


def train_model(kind, data, c, seed=0, epsilon=0.1, max_epochs=1000, tol=1e-3, standardize=False):
    """Dispatch to a trainer by short kind name: svm, logistic, or svr."""
    if kind == "svr":
        return train_svr(
            data, c, epsilon=epsilon, seed=seed, max_epochs=max_epochs, tol=tol, standardize=standardize
        )
    trainer = _TRAINERS.get(kind)
    if trainer is None:
        raise LearnError(f"unknown model kind {kind!r}; expected svm, logistic, or svr")
    return trainer(data, c, seed=seed, max_epochs=max_epochs, tol=tol, standardize=standardize)


# ---------------------------------------------------------------------------
# Prediction and evaluation


def predict(model, features):
    """Predict a label (classifier) or a real score (svr) for one vector.

    Classifier ties resolve to the earliest class in `model.classes`.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise LearnError(f"feature dimension mismatch: model expects {model.dim}")
    scores = model.weights @ x + model.bias
    if model.kind == "svr":
        return float(scores[0])
    if len(model.classes) == 2:
        return model.classes[1] if scores[0] > 0.0 else model.classes[0]
    return model.classes[int(np.argmax(scores))]


def predict_batch(model, features):
    """Vectorized `predict` over the rows of a feature matrix."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise LearnError(f"feature dimension mismatch: model expects {model.dim}")
    scores = X @ model.weights.T + model.bias
    if model.kind == "svr":
        return scores[:, 0]
    if len(model.classes) == 2:
        return np.where(scores[:, 0] > 0.0, model.classes[1], model.classes[0])
    picks = np.argmax(scores, axis=1)  # first maximum wins ties
    return np.asarray([model.classes[i] for i in picks])


def predict_proba(model, features):
    """Per-class probabilities of a logistic model, aligned with `classes`."""
    if model.kind != "logistic":
        raise LearnError("probabilities are only defined for logistic models")
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise LearnError(f"feature dimension mismatch: model expects {model.dim}")
    scores = model.weights @ x + model.bias
    if len(model.classes) == 2:
        p = float(special.expit(scores[0]))
        return np.array([1.0 - p, p])
    raw = special.expit(scores)
    return raw / raw.sum()


@dataclass
class ClassificationMetrics:
    accuracy: float
    confusion: np.ndarray = field(repr=False)  # rows: true class, cols: predicted
    classes: list = field(default_factory=list)


@dataclass
class RegressionMetrics:
    rmse: float


def evaluate(model, test):
    """Accuracy plus confusion matrix (classifier) or RMSE (svr) on `test`."""
    if model.kind == "svr":
        preds = predict_batch(model, test.features)
        y = np.asarray(test.labels, dtype=np.float64)
        return RegressionMetrics(rmse=float(np.sqrt(np.mean((preds - y) ** 2))))
    labels = _string_labels(test.labels)
    unknown = set(labels.tolist()) - set(model.classes)
    if unknown:
        raise LearnError(f"test labels outside the model's classes: {sorted(unknown)}")
    preds = predict_batch(model, test.features)
    order = {cls: i for i, cls in enumerate(model.classes)}
    confusion = np.zeros((len(model.classes), len(model.classes)), dtype=np.int64)
    for truth, pred in zip(labels, preds):
        confusion[order[truth], order[str(pred)]] += 1
    return ClassificationMetrics(
        accuracy=float(np.mean(preds == labels)),
        confusion=confusion,
        classes=list(model.classes),
    )


# ---------------------------------------------------------------------------
# Splits and grid search


def kfold_indices(n, k, seed=0):
    """Plain k-fold assignment, deterministic in `seed`."""
    if k < 2:
        raise LearnError("k must be >= 2")
    if n < k:
        raise LearnError(f"need at least {k} samples for {k}-fold CV, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(perm[f::k]) for f in range(k)]


def stratified_kfold_indices(labels, k, seed=0):
    """Stratified k-fold assignment; every class must have >= k members."""
    if k < 2:
        raise LearnError("k must be >= 2")
    labels = _string_labels(labels)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            raise LearnError(f"class {cls!r} has {idx.size} members, fewer than k={k}")
        idx = rng.permutation(idx)
        for pos, sample in enumerate(idx):
            folds[pos % k].append(int(sample))
    return [np.sort(np.asarray(fold, dtype=np.int64)) for fold in folds]


def train_test_split(labels, train_fraction=0.6, seed=0, stratify=True):
    """Seeded split (default 3:2); stratified per class unless disabled."""
    if not 0.0 < train_fraction < 1.0:
        raise LearnError("train_fraction must be in (0, 1)")
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n < 2:
        raise LearnError("need at least two samples to split")
    rng = np.random.default_rng(seed)
    train, test = [], []
    if stratify:
        strata = _string_labels(labels)
        for cls in sorted(set(strata.tolist())):
            idx = rng.permutation(np.flatnonzero(strata == cls))
            if idx.size == 1:
                train.extend(idx.tolist())
                continue
            n_train = int(round(idx.size * train_fraction))
            n_train = max(1, min(idx.size - 1, n_train))
            train.extend(idx[:n_train].tolist())
            test.extend(idx[n_train:].tolist())
    else:
        idx = rng.permutation(n)
        n_train = max(1, min(n - 1, int(round(n * train_fraction))))
        train = idx[:n_train].tolist()
        test = idx[n_train:].tolist()
    if not test:
        raise LearnError("split produced an empty test side")
    return np.sort(np.asarray(train, dtype=np.int64)), np.sort(np.asarray(test, dtype=np.int64))


@dataclass
class GridSearchResult:
    best_c: float
    scores: dict  # C -> mean fold accuracy (classification) or RMSE (svr)
    metric: str


def grid_search_cv(
    data,
    c_grid,
    k=5,
    seed=0,
    kind="svm",
    epsilon=0.1,
    max_epochs=1000,
    tol=1e-3,
    standardize=False,
):
    """Pick C by k-fold cross-validation; ties go to the smallest C.

    Classification uses stratified folds and mean accuracy (maximized);
    svr uses plain folds and mean RMSE (minimized).
    """
    grid = sorted({float(c) for c in c_grid})
    if not grid:
        raise LearnError("empty C grid")
    if any(c <= 0 for c in grid):
        raise LearnError("all C values must be positive")
    classification = kind != "svr"
    if classification:
        folds = stratified_kfold_indices(data.labels, k, seed)
    else:
        folds = kfold_indices(data.n, k, seed)
    scores = {}
    for c in grid:
        fold_values = []
        for fold in folds:
            keep = np.ones(data.n, dtype=bool)
            keep[fold] = False
            model = train_model(
                kind,
                data.subset(np.flatnonzero(keep)),
                c,
                seed=seed,
                epsilon=epsilon,
                max_epochs=max_epochs,
                tol=tol,
                standardize=standardize,
            )
            metrics = evaluate(model, data.subset(fold))
            fold_values.append(metrics.accuracy if classification else metrics.rmse)
        scores[c] = float(np.mean(fold_values))
    best = None
    for c in grid:  # ascending, strict improvement: ties keep the smallest C
        if best is None:
            best = c
        elif classification and scores[c] > scores[best]:
            best = c
        elif not classification and scores[c] < scores[best]:
            best = c
    return GridSearchResult(best_c=best, scores=scores, metric="accuracy" if classification else "rmse")


# ---------------------------------------------------------------------------
# Persistence


def model_to_dict(model):
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "classes": model.classes,
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
        "c_param": float(model.c_param),
        "epsilon": None if model.epsilon is None else float(model.epsilon),
        "seed": int(model.seed),
        "training": model.training,
    }


def model_from_dict(payload):
    if payload.get("format") != MODEL_FORMAT:
        raise LearnError("not a linear-model file")
    if payload.get("version") != MODEL_VERSION:
        raise LearnError(f"unsupported model version {payload.get('version')!r}")
    return LinearModel(
        kind=payload["kind"],
        classes=payload["classes"],
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=np.asarray(payload["bias"], dtype=np.float64),
        c_param=payload["c_param"],
        epsilon=payload["epsilon"],
        seed=payload["seed"],
        training=payload.get("training", {}),
    )


def save_model(path, model):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return model_from_dict(payload)
