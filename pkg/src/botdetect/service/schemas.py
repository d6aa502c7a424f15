"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class CommentRecord(BaseModel):
    comment_id: str
    account_id: str
    text: str
    label: Optional[Literal["bot", "human"]] = None
    source: Literal["pull_request", "issue"] = "issue"
    created_at: Optional[str] = None


class EncoderConfig(BaseModel):
    min_df: int = Field(default=1, ge=1)
    norm: Literal["l2", "none"] = "l2"
    use_idf: bool = True


class SynthRequest(BaseModel):
    n_accounts: int = Field(ge=1)
    comments_per_account: int = Field(ge=1)
    bot_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    vocabulary_overlap: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 42


class SynthResponse(BaseModel):
    comments: list[CommentRecord]


class SplitRequest(BaseModel):
    comments: list[CommentRecord]
    train_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 42


class SplitSummary(BaseModel):
    train: dict[str, int]
    test: dict[str, int]


class SplitResponse(BaseModel):
    train: list[CommentRecord]
    test: list[CommentRecord]
    summary: SplitSummary


class TrainRequest(BaseModel):
    comments: list[CommentRecord]
    classifier: Literal["nb", "svm", "knn", "zeror"] = "nb"
    params: dict = Field(default_factory=dict)
    encoder: EncoderConfig = EncoderConfig()
    seed: int = 42


class TrainResponse(BaseModel):
    model_text: str
    classifier: str
    n_documents: int
    n_terms: int


class PredictRequest(BaseModel):
    model_text: str
    comments: list[CommentRecord]


class PredictionRecord(BaseModel):
    comment_id: str
    label: Literal["bot", "human"]
    probability_bot: Optional[float] = None
    true_label: Optional[Literal["bot", "human"]] = None


class PredictResponse(BaseModel):
    predictions: list[PredictionRecord]


class EvaluateRequest(BaseModel):
    # exactly one input mode: model+comments, prediction records, or raw counts
    model_text: Optional[str] = None
    comments: Optional[list[CommentRecord]] = None
    predictions: Optional[list[PredictionRecord]] = None
    counts: Optional[dict[str, int]] = None  # keys tp, fn, fp, tn


class EvaluateResponse(BaseModel):
    report: dict
    text: str
    probabilities_csv: Optional[str] = None


class GridEntry(BaseModel):
    kind: Literal["nb", "svm", "knn", "zeror"]
    params: dict = Field(default_factory=dict)


class TuneRequest(BaseModel):
    comments: list[CommentRecord]
    grid: Optional[list[GridEntry]] = None  # None: default grid
    encoder: EncoderConfig = EncoderConfig()
    k: int = Field(default=5, ge=2)
    seed: int = 42
    jobs: int = Field(default=1, ge=1)


class TuneResponse(BaseModel):
    result: dict
    text: str
    selected: GridEntry


class FetchRequest(BaseModel):
    repository: str
    comment_kinds: list[Literal["issue_comments", "pr_review_comments"]] = [
        "issue_comments",
        "pr_review_comments",
    ]
    since: Optional[str] = None
    max_comments: int = Field(default=1000, ge=1)


class FetchResponse(BaseModel):
    records: list[dict]


class ErrorDetail(BaseModel):
    category: str
    type: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorDetail
