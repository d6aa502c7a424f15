import math
import random

import pytest

from botdetect.classifiers import (
    NBParams,
    fit_knn,
    fit_nb,
    fit_svm,
    fit_zeror,
    predict,
    predict_knn,
    predict_nb,
    predict_proba_nb,
    predict_svm,
    predict_zeror,
)
from botdetect.corpus import BOT, HUMAN
from botdetect.errors import (
    DimensionMismatch,
    EmptyTraining,
    EvenK,
    KTooLarge,
    NegativeFeatureValue,
    SingleClassTraining,
)
from botdetect.textprep import SparseVector


def counts_vec(counts: dict[int, float], dim: int) -> SparseVector:
    return SparseVector(entries={i: float(v) for i, v in counts.items()}, dimension=dim)


# terms: 0 build, 1 passed, 2 failed, 3 thanks, 4 great, 5 work
NB_TRAIN = [
    (counts_vec({0: 1, 1: 1}, 6), BOT),      # build passed
    (counts_vec({0: 1, 2: 1}, 6), BOT),      # build failed
    (counts_vec({3: 1, 4: 1}, 6), HUMAN),    # thanks great
    (counts_vec({4: 1, 5: 1}, 6), HUMAN),    # great work
]


class TestNaiveBayes:
    def test_hand_oracle_theta(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.0, prior="uniform"))
        theta_bot = [math.exp(v) for v in model.feature_log_prob[BOT]]
        assert theta_bot == pytest.approx([3 / 10, 2 / 10, 2 / 10, 1 / 10, 1 / 10, 1 / 10], abs=1e-12)

    @pytest.mark.parametrize("cls", [BOT, HUMAN])
    def test_theta_normalizes(self, cls):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.5))
        assert sum(math.exp(v) for v in model.feature_log_prob[cls]) == pytest.approx(1.0, abs=1e-9)

    def test_log_prior_normalizes(self):
        for prior in ("uniform", "empirical"):
            model = fit_nb(NB_TRAIN, NBParams(alpha=1.5, prior=prior))
            assert sum(math.exp(v) for v in model.log_prior.values()) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_input_gives_half(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.0, prior="uniform"))
        p = predict_proba_nb(model, counts_vec({0: 1, 4: 1}, 6))  # build great
        assert p == pytest.approx(0.5, abs=1e-12)
        assert predict_nb(model, counts_vec({0: 1, 4: 1}, 6)).label == HUMAN  # not above 0.5

    def test_build_passed_posterior(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.0, prior="uniform"))
        p = predict_proba_nb(model, counts_vec({0: 1, 1: 1}, 6))
        assert p == pytest.approx(6 / 7, abs=1e-12)

    def test_zero_vector_returns_prior(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.0, prior="uniform"))
        assert predict_proba_nb(model, counts_vec({}, 6)) == pytest.approx(0.5)
        skewed = fit_nb(NB_TRAIN[:2] + NB_TRAIN[2:3], NBParams(alpha=1.0, prior="empirical"))
        assert predict_proba_nb(skewed, counts_vec({}, 6)) == pytest.approx(2 / 3)

    def test_large_alpha_flattens_theta(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1e9))
        for cls in (BOT, HUMAN):
            for v in model.feature_log_prob[cls]:
                assert v == pytest.approx(math.log(1 / 6), abs=1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassTraining):
            fit_nb([(counts_vec({0: 1}, 2), BOT)], NBParams())

    def test_negative_feature_rejected(self):
        bad = [(counts_vec({0: -1.0}, 2), BOT), (counts_vec({1: 1}, 2), HUMAN)]
        with pytest.raises(NegativeFeatureValue):
            fit_nb(bad, NBParams())

    def test_dimension_mismatch(self):
        model = fit_nb(NB_TRAIN, NBParams())
        with pytest.raises(DimensionMismatch):
            predict_proba_nb(model, counts_vec({0: 1}, 5))

    def test_posterior_complement_sums_to_one(self):
        model = fit_nb(NB_TRAIN, NBParams(alpha=1.5))
        rng = random.Random(0)
        for _ in range(100):
            x = counts_vec({i: rng.randint(0, 4) for i in range(6)}, 6)
            p = predict_proba_nb(model, x)
            mirrored = 1.0 / (1.0 + math.exp(-(math.log(p / (1 - p))))) if 0 < p < 1 else p
            assert 0.0 <= p <= 1.0
            assert mirrored == pytest.approx(p)

    def test_brute_force_equivalence_random_corpora(self):
        # direct Bayes quotient (products of theta powers, no log space)
        rng = random.Random(1234)
        for trial in range(200):
            dim = rng.randint(2, 8)
            n_docs = rng.randint(2, 5)
            alpha = rng.choice([0.5, 1.0, 1.5])
            train = []
            for d in range(n_docs):
                if d == 0:
                    label = BOT
                elif d == 1:
                    label = HUMAN
                else:
                    label = BOT if rng.random() < 0.5 else HUMAN
                entries = {i: rng.randint(0, 3) for i in range(dim)}
                entries = {i: v for i, v in entries.items() if v}
                train.append((counts_vec(entries, dim), label))
            model = fit_nb(train, NBParams(alpha=alpha, prior="uniform"))
            theta = {
                cls: [math.exp(v) for v in model.feature_log_prob[cls]]
                for cls in (BOT, HUMAN)
            }
            x_entries = {i: rng.randint(0, 3) for i in range(dim)}
            x = counts_vec({i: v for i, v in x_entries.items() if v}, dim)
            like = {}
            for cls in (BOT, HUMAN):
                prod = 0.5
                for i, v in x.entries.items():
                    prod *= theta[cls][i] ** v
                like[cls] = prod
            expected = like[BOT] / (like[BOT] + like[HUMAN])
            assert predict_proba_nb(model, x) == pytest.approx(expected, abs=1e-9)

    def test_vocabulary_permutation_invariance(self):
        rng = random.Random(7)
        perm = list(range(6))
        rng.shuffle(perm)

        def remap(vec):
            return counts_vec({perm[i]: v for i, v in vec.entries.items()}, 6)

        base = fit_nb(NB_TRAIN, NBParams(alpha=1.5))
        permuted = fit_nb([(remap(v), y) for v, y in NB_TRAIN], NBParams(alpha=1.5))
        for _ in range(50):
            x = counts_vec({i: rng.randint(0, 3) for i in range(6)}, 6)
            assert predict_proba_nb(base, x) == pytest.approx(
                predict_proba_nb(permuted, remap(x)), abs=1e-12
            )


def separable_training_set():
    # bot docs live on feature 0, human docs on feature 1
    train = []
    for i in range(10):
        train.append((counts_vec({0: 1.0 + (i % 3)}, 2), BOT))
        train.append((counts_vec({1: 1.0 + (i % 4)}, 2), HUMAN))
    return train


class TestSVM:
    def test_separable_reaches_full_training_accuracy(self):
        train = separable_training_set()
        model = fit_svm(train, lam=1e-4, epochs=50, seed=0)
        correct = sum(1 for x, y in train if predict_svm(model, x).label == y)
        assert correct == len(train)

    def test_deterministic_weights(self):
        train = separable_training_set()
        a = fit_svm(train, lam=1e-4, epochs=20, seed=5)
        b = fit_svm(train, lam=1e-4, epochs=20, seed=5)
        assert a.weights == b.weights
        assert a.bias == b.bias

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassTraining):
            fit_svm([(counts_vec({0: 1}, 1), HUMAN)], lam=1e-4, epochs=5, seed=0)

    def test_sign_rule_and_tie(self):
        train = separable_training_set()
        model = fit_svm(train, lam=1e-4, epochs=50, seed=0)
        assert predict_svm(model, counts_vec({0: 5.0}, 2)).label == BOT
        assert predict_svm(model, counts_vec({1: 5.0}, 2)).label == HUMAN
        assert predict_svm(model, counts_vec({}, 2)).probability_bot is None
        # exact zero score goes to human
        from botdetect.classifiers import TrainedSVM

        flat = TrainedSVM(weights=(0.0, 0.0), bias=0.0, lam=1e-4, epochs=1, seed=0)
        assert predict_svm(flat, counts_vec({0: 1.0}, 2)).label == HUMAN


class TestKNN:
    def test_exact_match_is_own_neighbor(self):
        train = separable_training_set()
        model = fit_knn(train, k=1)
        for x, y in train:
            p = predict_knn(model, x)
            assert p.label == y
            assert p.probability_bot in (0.0, 1.0)

    def test_vote_fraction(self):
        train = [
            (counts_vec({0: 1.0}, 2), BOT),
            (counts_vec({0: 0.9, 1: 0.1}, 2), BOT),
            (counts_vec({1: 1.0}, 2), HUMAN),
        ]
        model = fit_knn(train, k=3)
        p = predict_knn(model, counts_vec({0: 1.0}, 2))
        assert p.label == BOT
        assert p.probability_bot == pytest.approx(2 / 3)

    def test_even_k_rejected(self):
        with pytest.raises(EvenK):
            fit_knn(separable_training_set(), k=4)

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            fit_knn(separable_training_set()[:3], k=5)

    def test_zero_query_uses_index_tie_break(self):
        train = [
            (counts_vec({0: 1.0}, 2), HUMAN),
            (counts_vec({0: 1.0}, 2), BOT),
            (counts_vec({1: 1.0}, 2), BOT),
        ]
        model = fit_knn(train, k=1)
        # zero vector: all similarities 0, earliest training index wins
        assert predict_knn(model, counts_vec({}, 2)).label == HUMAN


class TestZeroR:
    def test_majority_prediction(self):
        model = fit_zeror([BOT] * 6 + [HUMAN] * 4)
        p = predict_zeror(model)
        assert p.label == BOT
        assert p.probability_bot == pytest.approx(0.6)

    def test_balanced_ties_to_bot(self):
        model = fit_zeror([BOT, HUMAN])
        assert model.majority == BOT
        assert predict_zeror(model).probability_bot == pytest.approx(0.5)

    def test_human_majority(self):
        model = fit_zeror([BOT, HUMAN, HUMAN])
        assert predict_zeror(model).label == HUMAN

    def test_empty_training(self):
        with pytest.raises(EmptyTraining):
            fit_zeror([])


class TestUnifiedPredict:
    def test_threshold_consistency(self):
        # for probability-emitting classifiers: label bot iff p > 0.5
        rng = random.Random(3)
        nb = fit_nb(NB_TRAIN, NBParams(alpha=1.5))
        knn = fit_knn(NB_TRAIN, k=3)
        zeror = fit_zeror([y for _, y in NB_TRAIN])
        for model in (nb, knn, zeror):
            for _ in range(50):
                x = counts_vec({i: rng.randint(0, 3) for i in range(6)}, 6)
                p = predict(model, x)
                if p.probability_bot is not None and p.probability_bot != 0.5:
                    assert (p.label == BOT) == (p.probability_bot > 0.5)
