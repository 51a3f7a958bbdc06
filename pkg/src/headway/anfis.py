"""Zero-order Takagi-Sugeno fuzzy networks over the three headway features.

Each driving style gets its own three-input network: every input carries
three generalized-bell memberships (LOW / MEDIUM / HIGH), the full 3x3x3
label grid yields 27 rules, and the output is the firing-strength-weighted
average of constant rule consequents. Training alternates a ridge
least-squares solve for the consequents with one gradient step on the
membership parameters per epoch. Classification runs all three networks
and picks the argmax.

Rule j's label tuple is (j // 9, (j // 3) % 3, j % 3) over the inputs in
feature order — first input varies slowest. Everything downstream (the
consequent table, the hardware lookup tables) assumes this order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .features import FEATURE_NAMES, Scaler, scaler_from_dict, scaler_to_dict

N_INPUTS = 3
N_MFS = 3
N_RULES = N_MFS**N_INPUTS
MF_LABELS = ("LOW", "MEDIUM", "HIGH")
RULE_ORDER = "i1-major"

EPS_D = 1e-12  # below this total firing strength no rule meaningfully fired

MIN_WIDTH = 1e-3


@dataclass(frozen=True)
class BellMF:
    """Generalized bell membership 1 / (1 + |(x - e)/a|^(2b))."""

    a: float
    b: float
    e: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError(f"bell width a must be > 0, got {self.a}")
        if not self.b > 0:
            raise ValidationError(f"bell steepness b must be > 0, got {self.b}")


def _bell(a, b, e, x):
    t = np.abs((np.asarray(x, dtype=float) - e) / a)
    return 1.0 / (1.0 + t ** (2.0 * b))


def mf_eval(mf: BellMF, x):
    """Membership of x; scalar in (0, 1] for scalar x, elementwise for arrays."""
    out = _bell(mf.a, mf.b, mf.e, x)
    if np.isscalar(x):
        return float(out)
    return out


@dataclass
class AnfisModel:
    """Parameter arrays of one network; rows index inputs, columns MF labels."""

    a: np.ndarray  # (N_INPUTS, N_MFS) widths
    b: np.ndarray  # steepness exponents
    e: np.ndarray  # centers
    consequents: np.ndarray  # (N_RULES,)
    input_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        self.consequents = np.asarray(self.consequents, dtype=float)
        if self.a.shape != (N_INPUTS, N_MFS):
            raise ValidationError(f"expected {(N_INPUTS, N_MFS)} membership grid")
        if self.b.shape != self.a.shape or self.e.shape != self.a.shape:
            raise ValidationError("membership parameter arrays must share one shape")
        if self.consequents.shape != (N_RULES,):
            raise ValidationError(f"expected {N_RULES} rule consequents")
        if not (self.a > 0).all() or not (self.b > 0).all():
            raise ValidationError("membership widths and exponents must be > 0")

    def mf(self, input_idx: int, mf_idx: int) -> BellMF:
        return BellMF(
            a=float(self.a[input_idx, mf_idx]),
            b=float(self.b[input_idx, mf_idx]),
            e=float(self.e[input_idx, mf_idx]),
        )

    def copy(self) -> "AnfisModel":
        return AnfisModel(
            a=self.a.copy(),
            b=self.b.copy(),
            e=self.e.copy(),
            consequents=self.consequents.copy(),
            input_names=self.input_names,
        )


def grid_model() -> AnfisModel:
    """Fresh model with centers at 0 / 0.5 / 1 on every input, a=0.25, b=2."""
    return AnfisModel(
        a=np.full((N_INPUTS, N_MFS), 0.25),
        b=np.full((N_INPUTS, N_MFS), 2.0),
        e=np.tile(np.array([0.0, 0.5, 1.0]), (N_INPUTS, 1)),
        consequents=np.zeros(N_RULES),
    )


def rule_labels(j: int) -> tuple[int, int, int]:
    """MF index per input for rule j (first input most significant)."""
    return (j // 9, (j // 3) % 3, j % 3)


def memberships(model: AnfisModel, x) -> np.ndarray:
    """(N_INPUTS, N_MFS) membership grid at one input vector."""
    x = np.asarray(x, dtype=float)
    return _bell(model.a, model.b, model.e, x[:, None])


def _memberships_batch(model: AnfisModel, xs: np.ndarray) -> np.ndarray:
    # (n, N_INPUTS, N_MFS)
    return _bell(model.a[None], model.b[None], model.e[None], xs[:, :, None])


def firing_strengths(model: AnfisModel, x) -> np.ndarray:
    """27-vector of rule firing strengths at x (products of memberships)."""
    mu = memberships(model, x)
    return (mu[0, :, None, None] * mu[1, None, :, None] * mu[2, None, None, :]).reshape(
        N_RULES
    )


def _firing_batch(mu: np.ndarray) -> np.ndarray:
    # mu: (n, N_INPUTS, N_MFS) -> (n, N_RULES), C-order reshape = i1-major
    w = mu[:, 0, :, None, None] * mu[:, 1, None, :, None] * mu[:, 2, None, None, :]
    return w.reshape(len(mu), N_RULES)


def infer(model: AnfisModel, x) -> float:
    """Weighted-average network output at one input vector."""
    w = firing_strengths(model, x)
    d = float(w.sum())
    if d <= EPS_D:
        raise NumericError(f"no rule fired at x={np.asarray(x).tolist()} (sum w <= {EPS_D})")
    return float(w @ model.consequents / d)


def infer_batch(model: AnfisModel, xs: np.ndarray) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    w = _firing_batch(_memberships_batch(model, xs))
    d = w.sum(axis=1)
    if (d <= EPS_D).any():
        bad = int(np.argmax(d <= EPS_D))
        raise NumericError(f"no rule fired for row {bad} (sum w <= {EPS_D})")
    return w @ model.consequents / d


@dataclass
class ClassifierBank:
    """One network per canonical driving style, sharing the feature scaler."""

    models: tuple[AnfisModel, ...]
    scaler: Scaler | None = None

    def __post_init__(self):
        self.models = tuple(self.models)
        if len(self.models) != 3:
            raise ValidationError(f"expected 3 style models, got {len(self.models)}")


def classify(bank: ClassifierBank, x) -> tuple[int, np.ndarray]:
    """(0-based style index, the three network outputs); ties pick the lowest index."""
    ys = np.array([infer(m, x) for m in bank.models])
    return int(np.argmax(ys)), ys


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 0.05
    train_fraction: float = 0.75
    split_seed: int = 0
    lse_ridge: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be > 0")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie in (0, 1)")
        if self.lse_ridge < 0:
            raise ValidationError("lse_ridge must be >= 0")


def _solve_consequents(wn: np.ndarray, targets: np.ndarray, ridge: float) -> np.ndarray:
    # ridge least squares on the normalized strengths: (Wn'Wn + rI) c = Wn't
    gram = wn.T @ wn + ridge * np.eye(N_RULES)
    try:
        return np.linalg.solve(gram, wn.T @ targets)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - ridge makes this rare
        raise NumericError(f"least-squares solve failed: {exc}") from exc


def _normalized_strengths(model: AnfisModel, xs: np.ndarray) -> np.ndarray:
    w = _firing_batch(_memberships_batch(model, xs))
    d = w.sum(axis=1)
    if (d <= EPS_D).any():
        bad = int(np.argmax(d <= EPS_D))
        raise NumericError(f"no rule fired for training row {bad}")
    return w / d[:, None]


def loss_and_gradients(
    model: AnfisModel, xs: np.ndarray, targets: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean squared error and its gradients w.r.t. the raw a, b, e arrays.

    The membership chain terms come from mu = 1/(1 + t^(2b)), t = |x-e|/a:
    dmu/da = 2b mu(1-mu)/a, dmu/de = 2b mu(1-mu)/(x-e) and
    dmu/db = -2 mu(1-mu) ln t, with the x = e singularities defined as 0
    (mu(1-mu) vanishes there faster than the factors blow up).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    targets = np.asarray(targets, dtype=float)
    n = len(xs)

    mu = _memberships_batch(model, xs)  # (n, 3, 3)
    w = _firing_batch(mu)  # (n, 27)
    d = w.sum(axis=1)
    if (d <= EPS_D).any():
        raise NumericError("no rule fired for a training row")
    y = w @ model.consequents / d
    resid = y - targets
    loss = float(np.mean(resid**2))

    # dy/dmu[i, m] needs the product of the *other* two memberships per rule;
    # build it per input by swapping that input's factor for ones.
    ones = np.ones_like(mu[:, 0, :])
    excl = [
        (ones[:, :, None, None] * mu[:, 1, None, :, None] * mu[:, 2, None, None, :]),
        (mu[:, 0, :, None, None] * ones[:, None, :, None] * mu[:, 2, None, None, :]),
        (mu[:, 0, :, None, None] * mu[:, 1, None, :, None] * ones[:, None, None, :]),
    ]

    cmy = model.consequents[None, :] - y[:, None]  # (n, 27)
    scale = (2.0 / n) * resid / d  # (n,)

    grad_a = np.zeros((N_INPUTS, N_MFS))
    grad_b = np.zeros((N_INPUTS, N_MFS))
    grad_e = np.zeros((N_INPUTS, N_MFS))

    diff = xs[:, :, None] - model.e[None]  # (n, 3, 3)
    t = np.abs(diff) / model.a[None]
    mu1m = mu * (1.0 - mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        dmu_da = 2.0 * model.b[None] * mu1m / model.a[None]
        dmu_de = np.where(diff != 0.0, 2.0 * model.b[None] * mu1m / diff, 0.0)
        dmu_db = np.where(t > 0.0, -2.0 * mu1m * np.log(np.where(t > 0.0, t, 1.0)), 0.0)

    for i in range(N_INPUTS):
        # sum over the rules that use MF (i, m): collapse the other two axes
        term = (cmy * excl[i].reshape(n, N_RULES)).reshape(n, N_MFS, N_MFS, N_MFS)
        axes = tuple(ax + 1 for ax in range(N_INPUTS) if ax != i)
        dy_dmu = term.sum(axis=axes)  # (n, N_MFS)
        weighted = scale[:, None] * dy_dmu
        grad_a[i] = (weighted * dmu_da[:, i, :]).sum(axis=0)
        grad_b[i] = (weighted * dmu_db[:, i, :]).sum(axis=0)
        grad_e[i] = (weighted * dmu_de[:, i, :]).sum(axis=0)

    return loss, grad_a, grad_b, grad_e


def train_hybrid(
    xs: np.ndarray, targets: np.ndarray, cfg: TrainConfig = TrainConfig()
) -> tuple[AnfisModel, list[float]]:
    """Alternating LSE / gradient training; returns the model and RMSE per epoch.

    Each epoch solves the ridge least squares for the consequents with the
    memberships frozen, then takes one descent step on (a, b, e). b moves in
    log-space so it stays positive; a is clamped to a small floor. If an
    epoch's RMSE regresses, the antecedents roll back to the best seen so far
    and the learning rate halves, so the reported history never ends above
    the first epoch's value.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    targets = np.asarray(targets, dtype=float)
    if len(xs) < N_RULES:
        raise ValidationError(
            f"need at least {N_RULES} training pairs, got {len(xs)}"
        )
    if len(xs) != len(targets):
        raise ValidationError("inputs and targets must have equal length")

    model = grid_model()
    lr = cfg.learning_rate
    best: tuple[float, AnfisModel] | None = None
    history = []

    for epoch in range(1, cfg.epochs + 1):
        wn = _normalized_strengths(model, xs)
        try:
            model.consequents = _solve_consequents(wn, targets, cfg.lse_ridge)
        except NumericError as exc:
            raise NumericError(f"epoch {epoch}: {exc}") from exc
        rmse = float(np.sqrt(np.mean((wn @ model.consequents - targets) ** 2)))
        history.append(rmse)

        if best is None or rmse <= best[0]:
            best = (rmse, model.copy())
        else:
            model = best[1].copy()
            lr *= 0.5

        if epoch == cfg.epochs:
            break
        _, ga, gb, ge = loss_and_gradients(model, xs, targets)
        model.a = np.maximum(model.a - lr * ga, MIN_WIDTH)
        model.b = np.exp(np.log(model.b) - lr * gb * model.b)
        model.e = model.e - lr * ge

    # the last gradient step is unevaluated inside the loop; keep the best state
    model = best[1]
    wn = _normalized_strengths(model, xs)
    model.consequents = _solve_consequents(wn, targets, cfg.lse_ridge)
    history.append(float(np.sqrt(np.mean((wn @ model.consequents - targets) ** 2))))
    return model, history


def stratified_split(
    labels: np.ndarray, train_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled index split; every class lands in both sides when it can."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        n_train = int(round(train_fraction * len(idx)))
        if len(idx) >= 2:
            n_train = min(max(n_train, 1), len(idx) - 1)
        else:
            n_train = len(idx)
        train.extend(idx[:n_train])
        test.extend(idx[n_train:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def train_bank(
    xs: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig = TrainConfig(),
    scaler: Scaler | None = None,
) -> tuple[ClassifierBank, list[list[float]]]:
    """Train one network per style on 1-vs-rest 0/1 targets."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    labels = np.asarray(labels, dtype=int)
    models, histories = [], []
    for style in range(3):
        targets = (labels == style).astype(float)
        model, history = train_hybrid(xs, targets, cfg)
        models.append(model)
        histories.append(history)
    return ClassifierBank(models=tuple(models), scaler=scaler), histories


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with actual styles on rows, identified styles on columns."""

    matrix: np.ndarray

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix)) / self.total

    def per_class_recall(self) -> np.ndarray:
        """Diagonal over row sums: fraction of each actual style identified."""
        rows = self.matrix.sum(axis=1)
        with np.errstate(invalid="ignore"):
            return np.where(rows > 0, np.diag(self.matrix) / rows, np.nan)

    def per_class_precision(self) -> np.ndarray:
        """Diagonal over column sums: reliability of each identified style."""
        cols = self.matrix.sum(axis=0)
        with np.errstate(invalid="ignore"):
            return np.where(cols > 0, np.diag(self.matrix) / cols, np.nan)

    def to_csv(self, path) -> None:
        k = len(self.matrix)
        lines = ["actual\\identified," + ",".join(f"style_{j + 1}" for j in range(k))]
        for i in range(k):
            lines.append(
                f"style_{i + 1}," + ",".join(str(int(v)) for v in self.matrix[i])
            )
        with open(str(path), "w") as fh:
            fh.write("\n".join(lines) + "\n")


def evaluate(bank: ClassifierBank, xs: np.ndarray, labels: np.ndarray) -> ConfusionMatrix:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    labels = np.asarray(labels, dtype=int)
    if len(xs) == 0:
        raise ValidationError("cannot evaluate on an empty set")
    outputs = np.column_stack([infer_batch(m, xs) for m in bank.models])
    predicted = np.argmax(outputs, axis=1)
    k = len(bank.models)
    matrix = np.zeros((k, k), dtype=int)
    for actual, pred in zip(labels, predicted):
        matrix[actual, pred] += 1
    return ConfusionMatrix(matrix=matrix)


def model_to_dict(model: AnfisModel, scaler_ref: str | None = None) -> dict:
    doc = {
        "inputs": N_INPUTS,
        "input_names": list(model.input_names),
        "mfs": [
            [
                {"a": float(model.a[i, m]), "b": float(model.b[i, m]), "e": float(model.e[i, m])}
                for m in range(N_MFS)
            ]
            for i in range(N_INPUTS)
        ],
        "consequents": [float(c) for c in model.consequents],
        "rule_order": RULE_ORDER,
    }
    if scaler_ref is not None:
        doc["scaler_ref"] = scaler_ref
    return doc


def model_from_dict(doc: dict) -> AnfisModel:
    if int(doc.get("inputs", 0)) != N_INPUTS:
        raise ValidationError("model file does not describe a three-input network")
    if doc.get("rule_order") != RULE_ORDER:
        raise ValidationError(f"unsupported rule order {doc.get('rule_order')!r}")
    mfs = doc["mfs"]
    a = np.array([[mf["a"] for mf in row] for row in mfs])
    b = np.array([[mf["b"] for mf in row] for row in mfs])
    e = np.array([[mf["e"] for mf in row] for row in mfs])
    return AnfisModel(
        a=a,
        b=b,
        e=e,
        consequents=np.asarray(doc["consequents"], dtype=float),
        input_names=tuple(doc.get("input_names", FEATURE_NAMES)),
    )


def save_bank(bank: ClassifierBank, path, extra: dict | None = None) -> None:
    doc = {
        "models": [model_to_dict(m) for m in bank.models],
        "scaler": scaler_to_dict(bank.scaler) if bank.scaler is not None else None,
    }
    if extra:
        doc.update(extra)
    with open(str(path), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_bank(path) -> ClassifierBank:
    with open(str(path)) as fh:
        doc = json.load(fh)
    models = tuple(model_from_dict(m) for m in doc["models"])
    scaler = scaler_from_dict(doc["scaler"]) if doc.get("scaler") else None
    return ClassifierBank(models=models, scaler=scaler)
