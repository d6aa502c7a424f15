"""Binary classifiers over sparse feature vectors, plus model persistence.

Four learners behind one contract: multinomial Naive Bayes (posterior
probabilities), Pegasos-style linear SVM (decision only), cosine kNN
(vote-fraction probabilities), and the ZeroR majority baseline.
Bot is the positive class throughout.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from botdetect.corpus import BOT, HUMAN
from botdetect.errors import (
    CorruptModelFile,
    DimensionMismatch,
    EmptyTraining,
    EvenK,
    FormatVersionMismatch,
    KTooLarge,
    NegativeFeatureValue,
    SingleClassTraining,
)
from botdetect.textprep import SparseVector, TfIdfModel, Vocabulary

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Prediction:
    label: str
    probability_bot: float | None = None


@dataclass(frozen=True)
class NBParams:
    alpha: float = 1.5
    prior: str = "uniform"  # "uniform" or "empirical"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.prior not in ("uniform", "empirical"):
            raise ValueError(f"unknown prior mode {self.prior!r}")


@dataclass(frozen=True)
class TrainedNB:
    log_prior: dict[str, float]
    feature_log_prob: dict[str, tuple[float, ...]]
    dimension: int
    params: NBParams = NBParams()


@dataclass(frozen=True)
class TrainedSVM:
    weights: tuple[float, ...]
    bias: float
    lam: float
    epochs: int
    seed: int


@dataclass(frozen=True)
class TrainedKNN:
    k: int
    stored_vectors: tuple[tuple[SparseVector, str], ...]


@dataclass(frozen=True)
class TrainedZeroR:
    majority: str
    class_frequency: float  # frequency of Bot in the training set


def _check_two_classes(labels) -> None:
    present = set(labels)
    if present != {BOT, HUMAN}:
        raise SingleClassTraining(f"need both classes in training data, got {sorted(present)}")


# --- multinomial Naive Bayes ---

def fit_nb(train: list[tuple[SparseVector, str]], params: NBParams = NBParams()) -> TrainedNB:
    if not train:
        raise EmptyTraining("empty training set")
    _check_two_classes(label for _, label in train)
    dim = train[0][0].dimension
    sums = {BOT: np.zeros(dim), HUMAN: np.zeros(dim)}
    n_docs = {BOT: 0, HUMAN: 0}
    for vec, label in train:
        if vec.dimension != dim:
            raise DimensionMismatch(f"vector dimension {vec.dimension} != {dim}")
        for i, v in vec.entries.items():
            if v < 0:
                raise NegativeFeatureValue(f"feature {i} has negative value {v}")
            sums[label][i] += v
        n_docs[label] += 1

    feature_log_prob = {}
    for cl in (BOT, HUMAN):
        total = float(sums[cl].sum())
        feature_log_prob[cl] = tuple(
            np.log((sums[cl] + params.alpha) / (total + params.alpha * dim))
        )
    if params.prior == "uniform":
        log_prior = {BOT: math.log(0.5), HUMAN: math.log(0.5)}
    else:
        n = len(train)
        log_prior = {cl: math.log(n_docs[cl] / n) for cl in (BOT, HUMAN)}
    return TrainedNB(
        log_prior=log_prior,
        feature_log_prob=feature_log_prob,
        dimension=dim,
        params=params,
    )


def predict_proba_nb(model: TrainedNB, x: SparseVector) -> float:
    """Posterior P(Bot | x), computed in log space."""
    if x.dimension != model.dimension:
        raise DimensionMismatch(f"vector dimension {x.dimension} != {model.dimension}")
    jll = {}
    for cl in (BOT, HUMAN):
        flp = model.feature_log_prob[cl]
        jll[cl] = model.log_prior[cl] + sum(v * flp[i] for i, v in x.entries.items())
    # softmax over the two classes
    return 1.0 / (1.0 + math.exp(min(700.0, max(-700.0, jll[HUMAN] - jll[BOT]))))


def predict_nb(model: TrainedNB, x: SparseVector) -> Prediction:
    p = predict_proba_nb(model, x)
    return Prediction(label=BOT if p > 0.5 else HUMAN, probability_bot=p)


# --- linear SVM (Pegasos SGD on hinge loss) ---

def fit_svm(
    train: list[tuple[SparseVector, str]],
    lam: float = 1e-4,
    epochs: int = 50,
    seed: int = 0,
) -> TrainedSVM:
    if not train:
        raise EmptyTraining("empty training set")
    _check_two_classes(label for _, label in train)
    if lam <= 0 or epochs < 1:
        raise ValueError("lam must be > 0 and epochs >= 1")
    dim = train[0][0].dimension
    for vec, _ in train:
        if vec.dimension != dim:
            raise DimensionMismatch(f"vector dimension {vec.dimension} != {dim}")
    w = np.zeros(dim)
    b = 0.0
    rng = random.Random(seed)
    order = list(range(len(train)))
    t = 0
    for _ in range(epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            vec, label = train[i]
            y = 1.0 if label == BOT else -1.0
            score = sum(v * w[j] for j, v in vec.entries.items()) + b
            w *= 1.0 - eta * lam
            if y * score < 1.0:
                for j, v in vec.entries.items():
                    w[j] += eta * y * v
                b += eta * y
    return TrainedSVM(weights=tuple(w), bias=b, lam=lam, epochs=epochs, seed=seed)


def predict_svm(model: TrainedSVM, x: SparseVector) -> Prediction:
    if x.dimension != len(model.weights):
        raise DimensionMismatch(f"vector dimension {x.dimension} != {len(model.weights)}")
    score = sum(v * model.weights[i] for i, v in x.entries.items()) + model.bias
    return Prediction(label=BOT if score > 0 else HUMAN)


# --- cosine kNN ---

def fit_knn(train: list[tuple[SparseVector, str]], k: int) -> TrainedKNN:
    if not train:
        raise EmptyTraining("empty training set")
    if k % 2 == 0:
        raise EvenK(f"k must be odd, got {k}")
    if k < 1 or k > len(train):
        raise KTooLarge(f"k={k} exceeds training size {len(train)}")
    dim = train[0][0].dimension
    for vec, _ in train:
        if vec.dimension != dim:
            raise DimensionMismatch(f"vector dimension {vec.dimension} != {dim}")
    return TrainedKNN(k=k, stored_vectors=tuple(train))


def _knn_matrix(model: TrainedKNN):
    """Row-normalized CSR matrix of the stored vectors (cached on the model)."""
    cached = getattr(model, "_matrix", None)
    if cached is not None:
        return cached
    dim = model.stored_vectors[0][0].dimension if model.stored_vectors else 0
    rows, cols, vals = [], [], []
    for r, (vec, _) in enumerate(model.stored_vectors):
        nrm = vec.norm2()
        if nrm == 0:
            continue
        for i, v in vec.entries.items():
            rows.append(r)
            cols.append(i)
            vals.append(v / nrm)
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(model.stored_vectors), dim)
    )
    object.__setattr__(model, "_matrix", mat)
    return mat


def predict_knn(model: TrainedKNN, x: SparseVector) -> Prediction:
    dim = model.stored_vectors[0][0].dimension
    if x.dimension != dim:
        raise DimensionMismatch(f"vector dimension {x.dimension} != {dim}")
    nrm = x.norm2()
    if nrm == 0:
        sims = np.zeros(len(model.stored_vectors))
    else:
        q = np.zeros(dim)
        for i, v in x.entries.items():
            q[i] = v / nrm
        sims = _knn_matrix(model) @ q
    # stable sort: similarity ties resolved by earlier training index
    neighbors = np.argsort(-sims, kind="stable")[: model.k]
    bot_votes = sum(1 for i in neighbors if model.stored_vectors[i][1] == BOT)
    frac = bot_votes / model.k
    return Prediction(label=BOT if frac > 0.5 else HUMAN, probability_bot=frac)


# --- ZeroR baseline ---

def fit_zeror(train: list[str]) -> TrainedZeroR:
    if not train:
        raise EmptyTraining("empty training set")
    freq = sum(1 for label in train if label == BOT) / len(train)
    return TrainedZeroR(majority=BOT if freq >= 0.5 else HUMAN, class_frequency=freq)


def predict_zeror(model: TrainedZeroR) -> Prediction:
    return Prediction(label=model.majority, probability_bot=model.class_frequency)


# --- unified prediction ---

CLASSIFIER_KINDS = ("nb", "svm", "knn", "zeror")


def classifier_kind(model) -> str:
    return {
        TrainedNB: "nb",
        TrainedSVM: "svm",
        TrainedKNN: "knn",
        TrainedZeroR: "zeror",
    }[type(model)]


def predict(model, x: SparseVector) -> Prediction:
    kind = classifier_kind(model)
    if kind == "nb":
        return predict_nb(model, x)
    if kind == "svm":
        return predict_svm(model, x)
    if kind == "knn":
        return predict_knn(model, x)
    return predict_zeror(model)


# --- persistence: versioned, self-describing text format ---
#
# Layout (one item per line, space-separated; floats via repr for exact
# round-trips; terms never contain whitespace):
#
#   botdetect-model <version> <classifier kind>
#   [tfidf] norm=<l2|none> use_idf=<0|1> n_documents=<N> n_terms=<V>
#   term <term> <index> <df> <idf>          (V lines)
#   [<kind>] ...parameter lines...
#   [end]


def _fmt(x: float) -> str:
    return repr(float(x))


def model_to_text(model, tfidf: TfIdfModel) -> str:
    kind = classifier_kind(model)
    lines = [f"botdetect-model {MODEL_FORMAT_VERSION} {kind}"]
    vocab = tfidf.vocabulary
    lines.append(
        f"[tfidf] norm={tfidf.norm} use_idf={int(tfidf.use_idf)} "
        f"n_documents={vocab.n_documents} n_terms={len(vocab)}"
    )
    for term in sorted(vocab.terms, key=vocab.terms.get):
        i = vocab.terms[term]
        lines.append(
            f"term {term} {i} {vocab.document_frequency[term]} {_fmt(tfidf.idf[i])}"
        )
    lines.append(f"[{kind}]")
    if kind == "nb":
        lines.append(f"alpha {_fmt(model.params.alpha)}")
        lines.append(f"prior {model.params.prior}")
        lines.append(f"dimension {model.dimension}")
        for cl in (BOT, HUMAN):
            lines.append(f"log_prior {cl} {_fmt(model.log_prior[cl])}")
        for cl in (BOT, HUMAN):
            vals = " ".join(_fmt(v) for v in model.feature_log_prob[cl])
            lines.append(f"feature_log_prob {cl} {vals}")
    elif kind == "svm":
        lines.append(f"lambda {_fmt(model.lam)}")
        lines.append(f"epochs {model.epochs}")
        lines.append(f"seed {model.seed}")
        lines.append(f"bias {_fmt(model.bias)}")
        lines.append("weights " + " ".join(_fmt(v) for v in model.weights))
    elif kind == "knn":
        lines.append(f"k {model.k}")
        lines.append(f"n_vectors {len(model.stored_vectors)}")
        dim = model.stored_vectors[0][0].dimension
        lines.append(f"dimension {dim}")
        for vec, label in model.stored_vectors:
            ent = " ".join(f"{i}:{_fmt(v)}" for i, v in sorted(vec.entries.items()))
            lines.append(f"vec {label} {ent}".rstrip())
    else:  # zeror
        lines.append(f"majority {model.majority}")
        lines.append(f"class_frequency {_fmt(model.class_frequency)}")
    lines.append("[end]")
    return "\n".join(lines) + "\n"


def save_model(model, tfidf: TfIdfModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_text(model, tfidf))


def model_from_text(text: str):
    """Parse (classifier, TfIdfModel) from the text produced by model_to_text."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("botdetect-model "):
        raise CorruptModelFile("missing model header")
    header = lines[0].split()
    if len(header) != 3:
        raise CorruptModelFile(f"malformed header: {lines[0]!r}")
    try:
        version = int(header[1])
    except ValueError:
        raise CorruptModelFile(f"malformed version: {header[1]!r}") from None
    if version != MODEL_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"model format version {version}, expected {MODEL_FORMAT_VERSION}"
        )
    kind = header[2]
    if kind not in CLASSIFIER_KINDS:
        raise CorruptModelFile(f"unknown classifier kind {kind!r}")
    if lines[-1] != "[end]":
        raise CorruptModelFile("missing [end] sentinel (truncated file?)")
    try:
        return _parse_model(lines, kind)
    except (CorruptModelFile, FormatVersionMismatch):
        raise
    except Exception as exc:
        raise CorruptModelFile(f"failed to parse model file: {exc}") from exc


def load_model(path):
    """Load (classifier, TfIdfModel) written by save_model."""
    with open(path, encoding="utf-8") as fh:
        return model_from_text(fh.read())


def _parse_model(lines: list[str], kind: str):
    meta = dict(part.split("=", 1) for part in lines[1].removeprefix("[tfidf] ").split())
    n_terms = int(meta["n_terms"])
    terms: dict[str, int] = {}
    df: dict[str, int] = {}
    idf = [0.0] * n_terms
    for line in lines[2 : 2 + n_terms]:
        _, term, idx, d, w = line.split()
        terms[term] = int(idx)
        df[term] = int(d)
        idf[int(idx)] = float(w)
    vocab = Vocabulary(
        terms=terms, document_frequency=df, n_documents=int(meta["n_documents"])
    )
    tfidf = TfIdfModel(
        vocabulary=vocab,
        idf=tuple(idf),
        norm=meta["norm"],
        use_idf=bool(int(meta["use_idf"])),
    )

    body = lines[2 + n_terms :]
    if body[0] != f"[{kind}]":
        raise CorruptModelFile(f"expected [{kind}] section, got {body[0]!r}")
    fields: dict[str, str] = {}
    vectors: list[tuple[SparseVector, str]] = []
    flp: dict[str, tuple[float, ...]] = {}
    log_prior: dict[str, float] = {}
    for line in body[1:]:
        if line == "[end]":
            break
        key, _, rest = line.partition(" ")
        if key == "vec":
            label, _, ent = rest.partition(" ")
            entries = {}
            if ent:
                for item in ent.split():
                    i, _, v = item.partition(":")
                    entries[int(i)] = float(v)
            vectors.append((SparseVector(entries=entries, dimension=n_terms), label))
        elif key == "feature_log_prob":
            cl, _, vals = rest.partition(" ")
            flp[cl] = tuple(float(v) for v in vals.split())
        elif key == "log_prior":
            cl, _, v = rest.partition(" ")
            log_prior[cl] = float(v)
        else:
            fields[key] = rest

    if kind == "nb":
        model = TrainedNB(
            log_prior=log_prior,
            feature_log_prob=flp,
            dimension=int(fields["dimension"]),
            params=NBParams(alpha=float(fields["alpha"]), prior=fields["prior"]),
        )
    elif kind == "svm":
        model = TrainedSVM(
            weights=tuple(float(v) for v in fields.get("weights", "").split()),
            bias=float(fields["bias"]),
            lam=float(fields["lambda"]),
            epochs=int(fields["epochs"]),
            seed=int(fields["seed"]),
        )
    elif kind == "knn":
        if len(vectors) != int(fields["n_vectors"]):
            raise CorruptModelFile("stored vector count mismatch")
        model = TrainedKNN(k=int(fields["k"]), stored_vectors=tuple(vectors))
    else:
        model = TrainedZeroR(
            majority=fields["majority"],
            class_frequency=float(fields["class_frequency"]),
        )
    return model, tfidf
