"""FastAPI application wrapping the classification pipeline."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from botdetect import __version__, classifiers, corpus as corpus_mod, evaluation
from botdetect.corpus import Corpus, LabeledComment, make_corpus
from botdetect.errors import BotDetectError, EmptyInput, LengthMismatch
from botdetect.fetcher import FetchSpec, fetch_comments, spec_from_env
from botdetect.service import schemas
from botdetect.textprep import transform


def records_to_corpus(records: list[schemas.CommentRecord]) -> Corpus:
    return make_corpus(
        [
            LabeledComment(
                comment_id=r.comment_id,
                account_id=r.account_id,
                label=r.label,
                text=r.text,
                source=r.source,
                created_at=r.created_at,
            )
            for r in records
        ]
    )


def corpus_to_records(c: Corpus) -> list[schemas.CommentRecord]:
    return [
        schemas.CommentRecord(
            comment_id=x.comment_id,
            account_id=x.account_id,
            text=x.text,
            label=x.label,
            source=x.source,
            created_at=x.created_at,
        )
        for x in c.comments
    ]


def _report_response(report: evaluation.EvaluationReport) -> schemas.EvaluateResponse:
    csv_text = None
    if report.probability_summary is not None:
        csv_text = evaluation.probability_summary_to_csv(report.probability_summary)
    return schemas.EvaluateResponse(
        report=evaluation.report_to_dict(report),
        text=evaluation.report_to_text(report),
        probabilities_csv=csv_text,
    )


def create_app(fetch_transport=None, fetch_sleep=None) -> FastAPI:
    """Build the service; transport/sleep hooks let tests stub the GitHub API."""
    app = FastAPI(title="botdetect", version=__version__)
    app.state.fetch_transport = fetch_transport
    app.state.fetch_sleep = fetch_sleep

    @app.exception_handler(BotDetectError)
    async def domain_error(_: Request, exc: BotDetectError) -> JSONResponse:
        body = schemas.ErrorResponse(
            error=schemas.ErrorDetail(
                category=exc.category, type=type(exc).__name__, message=str(exc)
            )
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.exception_handler(ValueError)
    async def value_error(_: Request, exc: ValueError) -> JSONResponse:
        body = schemas.ErrorResponse(
            error=schemas.ErrorDetail(
                category="input-format", type="ValueError", message=str(exc)
            )
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        c = corpus_mod.generate_synthetic_corpus(
            n_accounts=req.n_accounts,
            comments_per_account=req.comments_per_account,
            bot_fraction=req.bot_fraction,
            vocabulary_overlap=req.vocabulary_overlap,
            seed=req.seed,
        )
        return schemas.SynthResponse(comments=corpus_to_records(c))

    @app.post("/split", response_model=schemas.SplitResponse)
    def split(req: schemas.SplitRequest):
        c = records_to_corpus(req.comments)
        result = corpus_mod.group_train_test_split(c, req.train_fraction, req.seed)
        return schemas.SplitResponse(
            train=corpus_to_records(result.train),
            test=corpus_to_records(result.test),
            summary=schemas.SplitSummary(
                train=result.train.label_counts(), test=result.test.label_counts()
            ),
        )

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        c = records_to_corpus(req.comments)
        if len(c) == 0:
            raise EmptyInput("empty training corpus")
        tfidf = evaluation.fit_encoder(c, req.encoder.model_dump())
        vectors = [transform(tfidf, x.text) for x in c.comments]
        labels = [x.label for x in c.comments]
        model = evaluation.fit_classifier(
            req.classifier, req.params, vectors, labels, seed=req.seed
        )
        return schemas.TrainResponse(
            model_text=classifiers.model_to_text(model, tfidf),
            classifier=req.classifier,
            n_documents=len(c),
            n_terms=len(tfidf.vocabulary),
        )

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        model, tfidf = classifiers.model_from_text(req.model_text)
        out = []
        for r in req.comments:
            p = classifiers.predict(model, transform(tfidf, r.text))
            out.append(
                schemas.PredictionRecord(
                    comment_id=r.comment_id,
                    label=p.label,
                    probability_bot=p.probability_bot,
                    true_label=r.label,
                )
            )
        return schemas.PredictResponse(predictions=out)

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate_endpoint(req: schemas.EvaluateRequest):
        if req.counts is not None:
            matrix = evaluation.ConfusionMatrix(
                tp=req.counts["tp"],
                fn=req.counts["fn"],
                fp=req.counts["fp"],
                tn=req.counts["tn"],
            )
            return _report_response(evaluation.metrics(matrix))
        if req.predictions is not None:
            preds = [p.label for p in req.predictions]
            truths = [p.true_label for p in req.predictions]
            if any(t is None for t in truths):
                raise LengthMismatch("prediction records lack true labels")
            report = evaluation.metrics(evaluation.confusion(preds, truths))
            if req.predictions and all(
                p.probability_bot is not None for p in req.predictions
            ):
                summary = evaluation.summarize_probabilities(
                    [
                        (p.probability_bot, p.label, p.true_label)
                        for p in req.predictions
                    ]
                )
                report = evaluation.EvaluationReport(
                    matrix=report.matrix,
                    bot=report.bot,
                    human=report.human,
                    macro=report.macro,
                    probability_summary=summary,
                    zero_division_metrics=report.zero_division_metrics,
                )
            return _report_response(report)
        if req.model_text is not None and req.comments is not None:
            model, tfidf = classifiers.model_from_text(req.model_text)
            report = evaluation.evaluate(model, tfidf, records_to_corpus(req.comments))
            return _report_response(report)
        raise EmptyInput("provide counts, predictions, or model_text + comments")

    @app.post("/tune", response_model=schemas.TuneResponse)
    def tune(req: schemas.TuneRequest):
        c = records_to_corpus(req.comments)
        grid = None
        if req.grid is not None:
            grid = [(g.kind, g.params) for g in req.grid]
        result = evaluation.grid_search(
            c,
            grid=grid,
            encoder=req.encoder.model_dump(),
            k=req.k,
            seed=req.seed,
            jobs=req.jobs,
        )
        return schemas.TuneResponse(
            result=evaluation.grid_result_to_dict(result),
            text=evaluation.grid_result_to_text(result),
            selected=schemas.GridEntry(
                kind=result.selected.kind, params=result.selected.params
            ),
        )

    @app.post("/fetch", response_model=schemas.FetchResponse)
    def fetch(req: schemas.FetchRequest, request: Request):
        spec = spec_from_env(
            repository=req.repository,
            comment_kinds=tuple(req.comment_kinds),
            since=req.since,
            max_comments=req.max_comments,
        )
        kwargs = {}
        if request.app.state.fetch_transport is not None:
            kwargs["transport"] = request.app.state.fetch_transport
        if request.app.state.fetch_sleep is not None:
            kwargs["sleep"] = request.app.state.fetch_sleep
        records = list(fetch_comments(spec, **kwargs))
        return schemas.FetchResponse(records=records)

    return app
