"""Confusion matrices, per-class metrics, probability summaries,
grouped cross-validation, and grid-search model selection."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from botdetect import classifiers as clf
from botdetect.corpus import BOT, HUMAN, Corpus, stratified_group_kfold
from botdetect.errors import EmptyInput, LengthMismatch
from botdetect.textprep import TfIdfModel, fit_tfidf, fit_vocabulary, transform

QUANTILE_POINTS = (0.01, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 0.99)
QUANTILE_NAMES = ("p1", "p12.5", "p25", "p37.5", "p50", "p62.5", "p75", "p87.5", "p99")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class GroupSummary:
    count: int
    quantiles: dict[str, float] | None  # None when the group is empty

    @property
    def median(self) -> float | None:
        return None if self.quantiles is None else self.quantiles["p50"]


@dataclass(frozen=True)
class ProbabilitySummary:
    groups: dict[str, GroupSummary]  # bot-correct, bot-misclassified, ...


@dataclass(frozen=True)
class EvaluationReport:
    matrix: ConfusionMatrix
    bot: ClassMetrics
    human: ClassMetrics
    macro: ClassMetrics
    probability_summary: ProbabilitySummary | None = None
    zero_division_metrics: tuple[str, ...] = ()  # metrics forced to 0 by 0/0


@dataclass(frozen=True)
class GridCandidate:
    kind: str
    params: dict
    fold_scores: tuple[float, ...]
    mean_macro_f1: float
    mean_bot: ClassMetrics
    mean_human: ClassMetrics
    mean_macro: ClassMetrics


@dataclass(frozen=True)
class GridSearchResult:
    candidates: tuple[GridCandidate, ...]
    selected: GridCandidate


def confusion(pred: list[str], truth: list[str]) -> ConfusionMatrix:
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} labels")
    if not pred:
        raise EmptyInput("no predictions to evaluate")
    tp = fn = fp = tn = 0
    for p, t in zip(pred, truth):
        if t == BOT:
            if p == BOT:
                tp += 1
            else:
                fn += 1
        else:
            if p == BOT:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)


def _ratio(num: int, den: int, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def metrics(matrix: ConfusionMatrix) -> EvaluationReport:
    """Per-class and macro precision/recall/F1; 0/0 ratios become 0 and are flagged."""
    if matrix.total == 0:
        raise EmptyInput("empty confusion matrix")
    flags: list[str] = []
    bp = _ratio(matrix.tp, matrix.tp + matrix.fp, "bot.precision", flags)
    br = _ratio(matrix.tp, matrix.tp + matrix.fn, "bot.recall", flags)
    hp = _ratio(matrix.tn, matrix.tn + matrix.fn, "human.precision", flags)
    hr = _ratio(matrix.tn, matrix.tn + matrix.fp, "human.recall", flags)
    bot = ClassMetrics(precision=bp, recall=br, f1=_f1(bp, br))
    human = ClassMetrics(precision=hp, recall=hr, f1=_f1(hp, hr))
    macro = ClassMetrics(
        precision=(bot.precision + human.precision) / 2,
        recall=(bot.recall + human.recall) / 2,
        f1=(bot.f1 + human.f1) / 2,
    )
    return EvaluationReport(
        matrix=matrix,
        bot=bot,
        human=human,
        macro=macro,
        zero_division_metrics=tuple(flags),
    )


def summarize_probabilities(
    predictions: list[tuple[float, str, str]],
) -> ProbabilitySummary:
    """Group (probability_bot, predicted, true) triples by (true class, correctness)."""
    groups: dict[str, list[float]] = {
        "bot-correct": [],
        "bot-misclassified": [],
        "human-correct": [],
        "human-misclassified": [],
    }
    for prob, pred, truth in predictions:
        correct = "correct" if pred == truth else "misclassified"
        groups[f"{truth}-{correct}"].append(prob)
    out = {}
    for name, vals in groups.items():
        if not vals:
            out[name] = GroupSummary(count=0, quantiles=None)
            continue
        arr = np.sort(np.asarray(vals, dtype=float))
        qs = {
            qname: float(np.quantile(arr, q))
            for qname, q in zip(QUANTILE_NAMES, QUANTILE_POINTS)
        }
        out[name] = GroupSummary(count=len(vals), quantiles=qs)
    return ProbabilitySummary(groups=out)


def evaluate(classifier, tfidf: TfIdfModel, test: Corpus) -> EvaluationReport:
    """Transform, predict, and score a labeled corpus against a fitted model."""
    if len(test) == 0:
        raise EmptyInput("empty test corpus")
    preds, truths, triples = [], [], []
    for c in test.comments:
        p = clf.predict(classifier, transform(tfidf, c.text))
        preds.append(p.label)
        truths.append(c.label)
        if p.probability_bot is not None:
            triples.append((p.probability_bot, p.label, c.label))
    report = metrics(confusion(preds, truths))
    if len(triples) == len(preds):
        report = EvaluationReport(
            matrix=report.matrix,
            bot=report.bot,
            human=report.human,
            macro=report.macro,
            probability_summary=summarize_probabilities(triples),
            zero_division_metrics=report.zero_division_metrics,
        )
    return report


# --- cross-validation and grid search ---

DEFAULT_ENCODER = {"min_df": 1, "norm": "l2", "use_idf": True}

DEFAULT_GRID = [
    ("nb", {"alpha": a, "prior": p})
    for a in (0.1, 0.5, 1.0, 1.5, 2.0)
    for p in ("uniform", "empirical")
] + [
    ("knn", {"k": k}) for k in (1, 3, 5, 11)
] + [
    ("svm", {"lambda": lam, "epochs": e})
    for lam in (1e-5, 1e-4, 1e-3)
    for e in (20, 50)
] + [
    ("zeror", {}),
]


def fit_encoder(corpus: Corpus, encoder: dict | None = None) -> TfIdfModel:
    enc = {**DEFAULT_ENCODER, **(encoder or {})}
    vocab = fit_vocabulary(corpus, min_df=int(enc["min_df"]))
    return fit_tfidf(vocab, norm=enc["norm"], use_idf=bool(enc["use_idf"]))


def fit_classifier(kind: str, params: dict, vectors, labels, seed: int = 0):
    """Fit one classifier by kind name with its hyper-parameter assignment."""
    if kind == "nb":
        nb_params = clf.NBParams(
            alpha=float(params.get("alpha", 1.5)),
            prior=params.get("prior", "uniform"),
        )
        return clf.fit_nb(list(zip(vectors, labels)), nb_params)
    if kind == "svm":
        return clf.fit_svm(
            list(zip(vectors, labels)),
            lam=float(params.get("lambda", 1e-4)),
            epochs=int(params.get("epochs", 50)),
            seed=int(params.get("seed", seed)),
        )
    if kind == "knn":
        return clf.fit_knn(list(zip(vectors, labels)), k=int(params.get("k", 5)))
    if kind == "zeror":
        return clf.fit_zeror(list(labels))
    raise ValueError(f"unknown classifier kind {kind!r}")


def _fold_report(
    fold: tuple[Corpus, Corpus], kind: str, params: dict, encoder: dict | None, seed: int
) -> EvaluationReport:
    train, val = fold
    # vocabulary and idf are fitted on the training part only: no leakage
    tfidf = fit_encoder(train, encoder)
    vectors = [transform(tfidf, c.text) for c in train.comments]
    labels = [c.label for c in train.comments]
    model = fit_classifier(kind, params, vectors, labels, seed=seed)
    return evaluate(model, tfidf, val)


def cross_validate(
    corpus: Corpus,
    kind: str,
    params: dict,
    encoder: dict | None = None,
    k: int = 5,
    seed: int = 42,
) -> list[float]:
    """Per-fold macro-F1 under stratified group k-fold."""
    folds = stratified_group_kfold(corpus, k=k, seed=seed)
    return [_fold_report(f, kind, params, encoder, seed).macro.f1 for f in folds]


def _mean_metrics(reports: list[EvaluationReport], attr: str) -> ClassMetrics:
    ms = [getattr(r, attr) for r in reports]
    n = len(ms)
    return ClassMetrics(
        precision=sum(m.precision for m in ms) / n,
        recall=sum(m.recall for m in ms) / n,
        f1=sum(m.f1 for m in ms) / n,
    )


_KIND_ORDER = {"nb": 0, "svm": 1, "knn": 2, "zeror": 3}


def grid_search(
    corpus: Corpus,
    grid: list[tuple[str, dict]] | None = None,
    encoder: dict | None = None,
    k: int = 5,
    seed: int = 42,
    jobs: int = 1,
) -> GridSearchResult:
    """Cross-validate every candidate; select the highest mean macro-F1.

    Ties break by classifier kind (nb < svm < knn < zeror), then by the
    lexicographically smaller hyper-parameter assignment.
    """
    if grid is None:
        grid = DEFAULT_GRID
    if not grid:
        raise EmptyInput("empty hyper-parameter grid")
    folds = stratified_group_kfold(corpus, k=k, seed=seed)

    def run(candidate):
        kind, params = candidate
        reports = [_fold_report(f, kind, params, encoder, seed) for f in folds]
        scores = tuple(r.macro.f1 for r in reports)
        return GridCandidate(
            kind=kind,
            params=dict(params),
            fold_scores=scores,
            mean_macro_f1=sum(scores) / len(scores),
            mean_bot=_mean_metrics(reports, "bot"),
            mean_human=_mean_metrics(reports, "human"),
            mean_macro=_mean_metrics(reports, "macro"),
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            candidates = tuple(pool.map(run, grid))  # result order follows grid order
    else:
        candidates = tuple(run(c) for c in grid)

    selected = min(
        candidates,
        key=lambda c: (
            -c.mean_macro_f1,
            _KIND_ORDER.get(c.kind, 99),
            sorted((str(k_), str(v)) for k_, v in c.params.items()),
        ),
    )
    return GridSearchResult(candidates=candidates, selected=selected)


# --- report serialization ---

def report_to_dict(report: EvaluationReport) -> dict:
    d = {
        "confusion": {
            "tp": report.matrix.tp,
            "fn": report.matrix.fn,
            "fp": report.matrix.fp,
            "tn": report.matrix.tn,
        },
        "bot": vars(report.bot).copy(),
        "human": vars(report.human).copy(),
        "macro": vars(report.macro).copy(),
        "zero_division_metrics": list(report.zero_division_metrics),
    }
    if report.probability_summary is not None:
        d["probability_summary"] = {
            name: {"count": g.count, "quantiles": g.quantiles}
            for name, g in report.probability_summary.groups.items()
        }
    return d


def report_from_dict(d: dict) -> EvaluationReport:
    summary = None
    if d.get("probability_summary") is not None:
        summary = ProbabilitySummary(
            groups={
                name: GroupSummary(count=g["count"], quantiles=g["quantiles"])
                for name, g in d["probability_summary"].items()
            }
        )
    return EvaluationReport(
        matrix=ConfusionMatrix(**d["confusion"]),
        bot=ClassMetrics(**d["bot"]),
        human=ClassMetrics(**d["human"]),
        macro=ClassMetrics(**d["macro"]),
        probability_summary=summary,
        zero_division_metrics=tuple(d.get("zero_division_metrics", ())),
    )


def report_to_text(report: EvaluationReport) -> str:
    m = report.matrix
    rows = [
        ("class", "P", "R", "F1"),
        ("bot", f"{report.bot.precision:.3f}", f"{report.bot.recall:.3f}", f"{report.bot.f1:.3f}"),
        ("human", f"{report.human.precision:.3f}", f"{report.human.recall:.3f}", f"{report.human.f1:.3f}"),
        ("macro", f"{report.macro.precision:.3f}", f"{report.macro.recall:.3f}", f"{report.macro.f1:.3f}"),
    ]
    lines = [
        f"confusion: TP={m.tp} FN={m.fn} FP={m.fp} TN={m.tn} (total {m.total})",
        _align(rows),
    ]
    if report.zero_division_metrics:
        lines.append("0/0 metrics forced to 0: " + ", ".join(report.zero_division_metrics))
    if report.probability_summary is not None:
        lines.append("")
        lines.append("prediction probability P(bot) by outcome:")
        prows = [("group", "count", "median")]
        for name, g in report.probability_summary.groups.items():
            med = "-" if g.median is None else f"{g.median:.3f}"
            prows.append((name, str(g.count), med))
        lines.append(_align(prows))
    return "\n".join(lines) + "\n"


def grid_result_to_text(result: GridSearchResult) -> str:
    rows = [("classifier", "parameters", "P(B)", "R(B)", "P(H)", "R(H)", "P", "R", "F1")]
    ordered = sorted(result.candidates, key=lambda c: -c.mean_macro_f1)
    for c in ordered:
        params = " ".join(f"{k}={v}" for k, v in sorted(c.params.items())) or "-"
        rows.append(
            (
                c.kind,
                params,
                f"{c.mean_bot.precision:.3f}",
                f"{c.mean_bot.recall:.3f}",
                f"{c.mean_human.precision:.3f}",
                f"{c.mean_human.recall:.3f}",
                f"{c.mean_macro.precision:.3f}",
                f"{c.mean_macro.recall:.3f}",
                f"{c.mean_macro_f1:.3f}",
            )
        )
    sel = result.selected
    sel_params = " ".join(f"{k}={v}" for k, v in sorted(sel.params.items())) or "-"
    return (
        _align(rows)
        + f"\nselected: {sel.kind} {sel_params} (mean macro-F1 {sel.mean_macro_f1:.3f})\n"
    )


def grid_result_to_dict(result: GridSearchResult) -> dict:
    def cand(c: GridCandidate) -> dict:
        return {
            "kind": c.kind,
            "params": c.params,
            "fold_scores": list(c.fold_scores),
            "mean_macro_f1": c.mean_macro_f1,
            "mean_bot": vars(c.mean_bot).copy(),
            "mean_human": vars(c.mean_human).copy(),
            "mean_macro": vars(c.mean_macro).copy(),
        }

    return {
        "candidates": [cand(c) for c in result.candidates],
        "selected": cand(result.selected),
    }


def probability_summary_to_csv(summary: ProbabilitySummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["group", "count", *QUANTILE_NAMES])
    for name, g in summary.groups.items():
        if g.quantiles is None:
            writer.writerow([name, 0, *[""] * len(QUANTILE_NAMES)])
        else:
            writer.writerow([name, g.count, *[repr(g.quantiles[q]) for q in QUANTILE_NAMES]])
    return buf.getvalue()


def _align(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    )


def report_to_json(report: EvaluationReport, **extra) -> str:
    d = report_to_dict(report)
    d.update(extra)
    return json.dumps(d, sort_keys=True, indent=2) + "\n"
