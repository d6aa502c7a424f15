import pytest

from botdetect.corpus import BOT, HUMAN, Corpus, LabeledComment


def make_comment(cid, aid, label, text, source="issue"):
    return LabeledComment(
        comment_id=cid, account_id=aid, label=label, text=text, source=source
    )


def corpus_from_texts(pairs):
    """pairs: list of (label, text); one account per comment."""
    return Corpus(
        tuple(
            make_comment(f"c{i}", f"a{i}", label, text)
            for i, (label, text) in enumerate(pairs)
        )
    )


@pytest.fixture
def three_doc_corpus():
    # fixture behind the hand-computed TF-IDF oracle
    return corpus_from_texts(
        [(BOT, "build passed"), (BOT, "build failed"), (HUMAN, "great work")]
    )


@pytest.fixture
def nb_hand_corpus():
    # 2 bot + 2 human docs over 6 terms, used for the hand-computed NB oracle
    return corpus_from_texts(
        [
            (BOT, "build passed"),
            (BOT, "build failed"),
            (HUMAN, "thanks great"),
            (HUMAN, "great work"),
        ]
    )
