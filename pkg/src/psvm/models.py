"""Binary and one-vs-one models: inference, voting, and text serialization."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Standardizer
from .dual import Hyperparams
from .exceptions import InvalidInputError, ParseError
from .kernels import Kernel, kernel_cross

FORMAT_TAG = "psvm-model/1"


@dataclass(frozen=True)
class BinaryModel:
    """Immutable fit result: the support set, its signed weights, and the bias."""

    support_x: np.ndarray
    coef: np.ndarray  # alpha_k * y_k per support vector
    b: float
    kernel: Kernel
    hp_used: Hyperparams
    n_train: int

    @property
    def n_sv(self) -> int:
        return self.coef.size


@dataclass(frozen=True)
class OvOModel:
    """k(k-1)/2 pairwise binary models over an ordered class list.

    Within a pair (class_a, class_b), class_a precedes class_b in `classes`
    and was trained as label +1. The optional standardizer reproduces the
    training-time feature transform for raw inputs.
    """

    classes: tuple
    pairs: tuple  # of (class_a, class_b, BinaryModel)
    standardizer: Standardizer | None = field(default=None)

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def decision_values(model: BinaryModel, X: np.ndarray) -> np.ndarray:
    """Batched decision function sum_k coef_k K(sv_k, x) + b over the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.support_x.shape[1] != X.shape[1] and model.n_sv > 0:
        raise InvalidInputError(
            f"dimension mismatch: model has {model.support_x.shape[1]} features, "
            f"input has {X.shape[1]}")
    if model.n_sv == 0:
        return np.full(X.shape[0], model.b)
    return kernel_cross(model.kernel, X, model.support_x) @ model.coef + model.b


def decision_value(model: BinaryModel, x: np.ndarray) -> float:
    return float(decision_values(model, np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])


def predict_binary(model: BinaryModel, x: np.ndarray) -> int:
    """Sign of the decision value; an exact zero maps to +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def _pair_index_iter(k: int):
    for a in range(k):
        for b in range(a + 1, k):
            yield a, b


def _fit_pair_task(args):
    # module-level so process pools can pickle it
    from .seeding import SOLVER_PAIR_J, rng_for
    from .solver import fit_binary

    idx, X_sub, y_sub, hp, kernel = args
    rng = rng_for(hp.seed, SOLVER_PAIR_J, idx)
    return idx, fit_binary(X_sub, y_sub, hp, kernel, rng=rng)


def fit_multiclass(X: np.ndarray, labels, hp: Hyperparams, kernel: Kernel, *,
                   standardizer: Standardizer | None = None,
                   n_jobs: int = 1) -> OvOModel:
    """Train one binary model per unordered class pair (one-vs-one)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels)
    if labels.size != X.shape[0]:
        raise InvalidInputError("X and labels lengths differ")
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise InvalidInputError("need at least two distinct classes")
    counts = {c: int(np.sum(labels == c)) for c in classes}
    empty = [c for c, n in counts.items() if n == 0]
    if empty:
        raise InvalidInputError(f"classes without samples: {empty}")

    tasks = []
    specs = []
    for idx, (a, b) in enumerate(_pair_index_iter(len(classes))):
        ca, cb = classes[a], classes[b]
        mask = (labels == ca) | (labels == cb)
        y_sub = np.where(labels[mask] == ca, 1.0, -1.0)
        tasks.append((idx, X[mask], y_sub, hp, kernel))
        specs.append((ca, cb))

    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            fitted = dict(pool.map(_fit_pair_task, tasks))
    else:
        fitted = dict(map(_fit_pair_task, tasks))

    pairs = tuple((specs[idx][0], specs[idx][1], fitted[idx]) for idx in range(len(specs)))
    return OvOModel(classes=tuple(classes), pairs=pairs, standardizer=standardizer)


def _vote_matrix(model: OvOModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, k = X.shape[0], model.n_classes
    index = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((n, k))
    margins = np.zeros((n, k))
    for ca, cb, bm in model.pairs:
        d = decision_values(bm, X)
        winner = np.where(d >= 0.0, index[ca], index[cb])
        rows = np.arange(n)
        votes[rows, winner] += 1.0
        margins[rows, winner] += np.abs(d)
    return votes, margins


def predict_multiclass_batch(model: OvOModel, X: np.ndarray):
    """Majority vote; ties broken by the larger summed |decision| among the
    tied classes, then by class order."""
    votes, margins = _vote_matrix(model, X)
    top = votes.max(axis=1, keepdims=True)
    tied_margins = np.where(votes == top, margins, -np.inf)
    winners = np.argmax(tied_margins, axis=1)  # first max: class order breaks exact ties
    return [model.classes[w] for w in winners]


def predict_multiclass(model: OvOModel, x: np.ndarray):
    return predict_multiclass_batch(model, np.atleast_2d(np.asarray(x, dtype=np.float64)))[0]


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: OvOModel, path) -> None:
    """Write the versioned text format; floats carry 17 significant digits."""
    kernel = model.pairs[0][2].kernel
    if kernel.kind == "precomputed":
        raise InvalidInputError("models over precomputed kernels cannot be serialized")
    hp = model.pairs[0][2].hp_used
    label_type = "int" if all(isinstance(c, (int, np.integer)) for c in model.classes) else "str"
    lines = [FORMAT_TAG]
    if kernel.kind == "gaussian":
        lines.append(f"kernel\tgaussian\t{_f17(kernel.sigma)}")
    else:
        lines.append("kernel\tlinear")
    lines.append(f"hp\t{_f17(hp.p)}\t{_f17(hp.C)}\t{_f17(hp.eps)}\t{hp.seed}")
    lines.append(f"labeltype\t{label_type}")
    lines.append("classes\t" + "\t".join(str(c) for c in model.classes))
    if model.standardizer is not None:
        st = model.standardizer
        lines.append(f"standardizer\t{st.mean.size}")
        lines.append("mean\t" + "\t".join(_f17(v) for v in st.mean))
        lines.append("scale\t" + "\t".join(_f17(v) for v in st.scale))
    lines.append(f"pairs\t{len(model.pairs)}")
    for ca, cb, bm in model.pairs:
        M = bm.support_x.shape[1]
        lines.append(f"pair\t{ca}\t{cb}\t{bm.n_sv}\t{M}\t{bm.n_train}\t{_f17(bm.b)}")
        for coef, row in zip(bm.coef, bm.support_x):
            lines.append("sv\t" + _f17(coef) + "\t" + "\t".join(_f17(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> OvOModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    it = iter(enumerate(lines, start=1))

    def next_fields(expect: str | None = None):
        for lineno, raw in it:
            if not raw.strip():
                continue
            fields = raw.split("\t")
            if expect is not None and fields[0] != expect:
                raise ParseError(f"expected {expect!r}, got {fields[0]!r}", row=lineno)
            return lineno, fields
        raise ParseError(f"unexpected end of file (wanted {expect or 'a record'})")

    lineno, fields = next_fields()
    if fields[0] != FORMAT_TAG:
        raise ParseError(f"not a {FORMAT_TAG} file (tag {fields[0]!r})", row=lineno)
    _, kf = next_fields("kernel")
    if kf[1] == "gaussian":
        kernel = Kernel("gaussian", sigma=float(kf[2]))
    elif kf[1] == "linear":
        kernel = Kernel("linear")
    else:
        raise ParseError(f"unknown kernel kind {kf[1]!r}")
    _, hf = next_fields("hp")
    hp = Hyperparams(p=float(hf[1]), C=float(hf[2]), eps=float(hf[3]), seed=int(hf[4]))
    _, tf = next_fields("labeltype")
    caster = int if tf[1] == "int" else str
    _, cf = next_fields("classes")
    classes = tuple(caster(c) for c in cf[1:])

    standardizer = None
    lineno, fields = next_fields()
    if fields[0] == "standardizer":
        M = int(fields[1])
        _, mean_f = next_fields("mean")
        _, scale_f = next_fields("scale")
        mean = np.array([float(v) for v in mean_f[1:]])
        scale = np.array([float(v) for v in scale_f[1:]])
        if mean.size != M or scale.size != M:
            raise ParseError("standardizer length mismatch", row=lineno)
        standardizer = Standardizer(mean=mean, scale=scale)
        lineno, fields = next_fields()
    if fields[0] != "pairs":
        raise ParseError(f"expected 'pairs', got {fields[0]!r}", row=lineno)
    n_pairs = int(fields[1])

    pairs = []
    for _ in range(n_pairs):
        lineno, pf = next_fields("pair")
        ca, cb = caster(pf[1]), caster(pf[2])
        n_sv, M, n_train = int(pf[3]), int(pf[4]), int(pf[5])
        b = float(pf[6])
        coef = np.empty(n_sv)
        sx = np.empty((n_sv, M))
        for r in range(n_sv):
            lineno, sf = next_fields("sv")
            if len(sf) != 2 + M:
                raise ParseError(f"support vector row has {len(sf) - 2} values, wanted {M}",
                                 row=lineno)
            coef[r] = float(sf[1])
            sx[r] = [float(v) for v in sf[2:]]
        pairs.append((ca, cb, BinaryModel(support_x=sx, coef=coef, b=b, kernel=kernel,
                                          hp_used=hp, n_train=n_train)))
    return OvOModel(classes=classes, pairs=tuple(pairs), standardizer=standardizer)
