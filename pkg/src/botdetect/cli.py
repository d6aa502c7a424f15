"""Command-line client for the botdetect service.

All computation happens behind the HTTP API: by default an in-process
instance of the FastAPI app, or a remote server via --server. Exit codes:
0 success, 1 I/O, 2 input format, 3 training data, 4 model file, 5 remote API.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import sys
from pathlib import Path

import click
import httpx

from botdetect import corpus as corpus_mod
from botdetect.errors import BotDetectError, exit_code_for

DEFAULT_SEED = 42


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """Thin JSON-over-HTTP client; in-process ASGI when no --server is given."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # the in-process client import can warn about httpx pinning
                warnings.simplefilter("ignore", DeprecationWarning)
                from fastapi.testclient import TestClient

            from botdetect.service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise CliFailure(5, f"cannot reach service: {exc}") from exc
        if resp.status_code >= 400:
            try:
                body = resp.json()
            except ValueError:
                raise CliFailure(1, f"service error HTTP {resp.status_code}") from None
            err = body.get("error")
            if err:
                raise CliFailure(
                    exit_code_for(err["category"]), f"{err['type']}: {err['message']}"
                )
            # pydantic request validation
            raise CliFailure(2, f"invalid request: {body.get('detail')}")
        return resp.json()


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_records(path, require_label: bool) -> list[dict]:
    try:
        c = corpus_mod.load_corpus(path, require_label=require_label)
    except FileNotFoundError as exc:
        raise CliFailure(2, f"input file not found: {path}") from exc
    except OSError as exc:
        raise CliFailure(1, f"cannot read {path}: {exc}") from exc
    except BotDetectError as exc:
        raise CliFailure(exit_code_for(exc.category), str(exc)) from exc
    return [corpus_mod.comment_to_dict(x) for x in c.comments]


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliFailure(1, f"cannot write {path}: {exc}") from exc


def _write_jsonl(path, records) -> None:
    _write_text(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in records))


def _coerce(value: str):
    text = value.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError as exc:
        raise CliFailure(2, f"config file not found: {path}") from exc
    except OSError as exc:
        raise CliFailure(1, f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise CliFailure(2, f"malformed config {path}: {exc}") from exc
    return parser


def _classifier_config(path) -> tuple[str, dict, dict]:
    """Read a [classifier] + optional [encoder] INI file."""
    parser = _read_ini(path)
    if not parser.has_section("classifier"):
        raise CliFailure(2, f"{path}: missing [classifier] section")
    section = dict(parser.items("classifier"))
    kind = section.pop("kind", "nb")
    params = {key: _coerce(v) for key, v in section.items()}
    encoder = {}
    if parser.has_section("encoder"):
        encoder = {key: _coerce(v) for key, v in parser.items("encoder")}
    return kind, params, encoder


def _grid_config(path) -> list[dict]:
    """Expand a grid INI (one section per classifier kind, comma-separated values)."""
    parser = _read_ini(path)
    grid = []
    sections = parser.sections()
    if not sections:
        raise CliFailure(2, f"{path}: empty grid config")
    for kind in sections:
        if kind not in ("nb", "svm", "knn", "zeror"):
            raise CliFailure(2, f"{path}: unknown classifier section [{kind}]")
        axes = {
            key: [_coerce(v) for v in value.split(",")]
            for key, value in parser.items(kind)
        }
        combos = [{}]
        for key, values in axes.items():
            combos = [{**c, key: v} for c in combos for v in values]
        grid.extend({"kind": kind, "params": c} for c in combos)
    return grid


def _selected_to_ini(kind: str, params: dict, encoder: dict) -> str:
    lines = ["[classifier]", f"kind = {kind}"]
    for key, v in sorted(params.items()):
        lines.append(f"{key} = {v}")
    lines.append("")
    lines.append("[encoder]")
    for key, v in sorted(encoder.items()):
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--server", default=None, help="Base URL of a running botdetect service (default: in-process).")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, help="Seed for all randomized steps.")
@click.option("--quiet", is_flag=True, help="Suppress informational output.")
@click.option("--json-output", is_flag=True, help="Print machine-readable JSON instead of tables.")
@click.pass_context
def cli(ctx, server, seed, quiet, json_output):
    """Classify GitHub PR/issue comments as bot- or human-authored."""
    ctx.obj = {
        "client": ServiceClient(server),
        "seed": seed,
        "quiet": quiet,
        "json": json_output,
    }


def _echo(ctx_obj, text: str) -> None:
    if not ctx_obj["quiet"]:
        click.echo(text)


@cli.command()
@click.option("--accounts", "n_accounts", default=100, show_default=True)
@click.option("--comments-per-account", default=20, show_default=True)
@click.option("--bot-fraction", default=0.5, show_default=True)
@click.option("--overlap", default=0.0, show_default=True, help="Vocabulary overlap in [0, 1].")
@click.option("--out", required=True, type=click.Path())
@click.pass_obj
def synth(obj, n_accounts, comments_per_account, bot_fraction, overlap, out):
    """Generate a deterministic synthetic labeled corpus."""
    data = obj["client"].post(
        "/synth",
        {
            "n_accounts": n_accounts,
            "comments_per_account": comments_per_account,
            "bot_fraction": bot_fraction,
            "vocabulary_overlap": overlap,
            "seed": obj["seed"],
        },
    )
    _write_jsonl(out, data["comments"])
    _echo(obj, f"wrote {len(data['comments'])} comments to {out}")


@cli.command()
@click.argument("corpus_path", type=click.Path())
@click.option("--fraction", default=0.5, show_default=True, help="Target train fraction.")
@click.option("--out-dir", required=True, type=click.Path())
@click.pass_obj
def split(obj, corpus_path, fraction, out_dir):
    """Account-disjoint stratified train/test split; writes train.jsonl/test.jsonl."""
    records = _load_records(corpus_path, require_label=True)
    data = obj["client"].post(
        "/split",
        {"comments": records, "train_fraction": fraction, "seed": obj["seed"]},
    )
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliFailure(1, f"cannot create {out_dir}: {exc}") from exc
    _write_jsonl(out / "train.jsonl", data["train"])
    _write_jsonl(out / "test.jsonl", data["test"])
    summary = {
        "seed": obj["seed"],
        "target_train_fraction": fraction,
        "input_sha256": _sha256(corpus_path),
        "counts": data["summary"],
    }
    _write_text(out / "split_summary.json", json.dumps(summary, sort_keys=True, indent=2) + "\n")
    if obj["json"]:
        _echo(obj, json.dumps(summary, sort_keys=True))
    else:
        tr, te = data["summary"]["train"], data["summary"]["test"]
        _echo(obj, f"train: {tr['bot']} bot / {tr['human']} human")
        _echo(obj, f"test:  {te['bot']} bot / {te['human']} human")


@cli.command()
@click.argument("corpus_path", type=click.Path())
@click.option("--grid", "grid_path", default=None, type=click.Path(), help="Grid config INI (default: built-in grid).")
@click.option("--k", default=5, show_default=True, help="Number of CV folds.")
@click.option("--jobs", default=1, show_default=True, help="Parallel candidate evaluations.")
@click.option("--selected-out", default="selected.conf", show_default=True, type=click.Path())
@click.pass_obj
def tune(obj, corpus_path, grid_path, k, jobs, selected_out):
    """Grid-search cross-validation; prints the candidate table."""
    records = _load_records(corpus_path, require_label=True)
    payload = {"comments": records, "k": k, "seed": obj["seed"], "jobs": jobs}
    if grid_path is not None:
        payload["grid"] = _grid_config(grid_path)
    data = obj["client"].post("/tune", payload)
    if obj["json"]:
        _echo(obj, json.dumps(data["result"], sort_keys=True))
    else:
        _echo(obj, data["text"].rstrip("\n"))
    sel = data["selected"]
    _write_text(
        selected_out,
        _selected_to_ini(sel["kind"], sel["params"], {"min_df": 1, "norm": "l2", "use_idf": True}),
    )
    _echo(obj, f"selected configuration written to {selected_out}")


@cli.command()
@click.argument("corpus_path", type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(), help="Classifier config INI.")
@click.option("--classifier", default="nb", show_default=True, type=click.Choice(["nb", "svm", "knn", "zeror"]))
@click.option("--alpha", default=1.5, show_default=True, help="NB smoothing (when --config absent).")
@click.option("--prior", default="uniform", show_default=True, type=click.Choice(["uniform", "empirical"]))
@click.option("--out", required=True, type=click.Path(), help="Model file path.")
@click.pass_obj
def train(obj, corpus_path, config_path, classifier, alpha, prior, out):
    """Fit the encoder and a classifier on the full input corpus."""
    records = _load_records(corpus_path, require_label=True)
    if config_path is not None:
        kind, params, encoder = _classifier_config(config_path)
    else:
        kind, params, encoder = classifier, {}, {}
        if kind == "nb":
            params = {"alpha": alpha, "prior": prior}
    payload = {
        "comments": records,
        "classifier": kind,
        "params": params,
        "seed": obj["seed"],
    }
    if encoder:
        payload["encoder"] = encoder
    data = obj["client"].post("/train", payload)
    _write_text(out, data["model_text"])
    _echo(
        obj,
        f"trained {data['classifier']} on {data['n_documents']} comments "
        f"({data['n_terms']} terms); model written to {out}",
    )


def _read_model(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise CliFailure(4, f"model file not found: {path}") from exc
    except OSError as exc:
        raise CliFailure(1, f"cannot read {path}: {exc}") from exc


@cli.command()
@click.argument("corpus_path", type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Predictions JSONL path.")
@click.pass_obj
def predict(obj, corpus_path, model_path, out):
    """Predict labels for a labeled or unlabeled corpus."""
    records = _load_records(corpus_path, require_label=False)
    data = obj["client"].post(
        "/predict", {"model_text": _read_model(model_path), "comments": records}
    )
    preds = [
        {k: v for k, v in p.items() if v is not None} for p in data["predictions"]
    ]
    _write_jsonl(out, preds)
    _echo(obj, f"wrote {len(preds)} predictions to {out}")


@cli.command()
@click.argument("corpus_path", required=False, type=click.Path())
@click.option("--model", "model_path", default=None, type=click.Path())
@click.option("--predictions", "predictions_path", default=None, type=click.Path())
@click.option("--counts", default=None, help="Confusion counts as tp,fn,fp,tn.")
@click.option("--out-dir", required=True, type=click.Path())
@click.pass_obj
def evaluate(obj, corpus_path, model_path, predictions_path, counts, out_dir):
    """Score predictions (or a model on a labeled corpus); writes report files."""
    payload: dict = {}
    provenance: dict = {"seed": obj["seed"]}
    if counts is not None:
        try:
            tp, fn, fp, tn = (int(x) for x in counts.split(","))
        except ValueError:
            raise CliFailure(2, "--counts must be four integers: tp,fn,fp,tn") from None
        payload["counts"] = {"tp": tp, "fn": fn, "fp": fp, "tn": tn}
        provenance["counts"] = payload["counts"]
    elif predictions_path is not None:
        try:
            lines = Path(predictions_path).read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            raise CliFailure(2, f"predictions file not found: {predictions_path}") from None
        except OSError as exc:
            raise CliFailure(1, f"cannot read {predictions_path}: {exc}") from exc
        try:
            payload["predictions"] = [json.loads(x) for x in lines if x.strip()]
        except json.JSONDecodeError as exc:
            raise CliFailure(2, f"malformed predictions file: {exc}") from exc
        provenance["predictions_sha256"] = _sha256(predictions_path)
    elif model_path is not None and corpus_path is not None:
        payload["model_text"] = _read_model(model_path)
        payload["comments"] = _load_records(corpus_path, require_label=True)
        provenance["model_sha256"] = _sha256(model_path)
        provenance["input_sha256"] = _sha256(corpus_path)
    else:
        raise CliFailure(2, "provide --counts, --predictions, or --model with a corpus")
    data = obj["client"].post("/evaluate", payload)

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliFailure(1, f"cannot create {out_dir}: {exc}") from exc
    report = dict(data["report"])
    report["provenance"] = provenance
    _write_text(out / "report.json", json.dumps(report, sort_keys=True, indent=2) + "\n")
    _write_text(out / "report.txt", data["text"])
    if data.get("probabilities_csv"):
        _write_text(out / "probabilities.csv", data["probabilities_csv"])
    if obj["json"]:
        _echo(obj, json.dumps(report, sort_keys=True))
    else:
        _echo(obj, data["text"].rstrip("\n"))


@cli.command()
@click.argument("repository")
@click.option(
    "--kinds",
    default="issue_comments,pr_review_comments",
    show_default=True,
    help="Comma-separated comment kinds.",
)
@click.option("--since", default=None, help="Only comments updated at/after this ISO-8601 time.")
@click.option("--max", "max_comments", default=1000, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_obj
def fetch(obj, repository, kinds, since, max_comments, out):
    """Fetch comments from the GitHub REST API into unlabeled corpus JSONL."""
    payload = {
        "repository": repository,
        "comment_kinds": [k.strip() for k in kinds.split(",") if k.strip()],
        "max_comments": max_comments,
    }
    if since:
        payload["since"] = since
    data = obj["client"].post("/fetch", payload)
    _write_jsonl(out, data["records"])
    _echo(obj, f"wrote {len(data['records'])} comments to {out}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, obj=None)
    except CliFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
