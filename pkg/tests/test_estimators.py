import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wrlab.dobrushin import hardcore_uniqueness_classifier
from wrlab.estimators import DobrushinUniquenessClassifier, HeatBathSampler, SpinFlipEvolution
from wrlab.model import AprioriMeasure

POINTS = np.array([[0.1, 0.8, 0.1], [0.5, 0, 0.5], [0.2, 0.7, 0.1], [0.3, 0.3, 0.4]])


def test_classifier_matches_closed_form():
    clf = DobrushinUniquenessClassifier(B=4).fit()
    pred = clf.predict(POINTS)
    expect = [hardcore_uniqueness_classifier(AprioriMeasure(*p), 4) for p in POINTS]
    assert list(pred) == expect


def test_classifier_soft_core_and_params():
    clf = DobrushinUniquenessClassifier(B=4, beta=0.4)
    assert clf.get_params() == {"B": 4, "beta": 0.4}
    assert clone(clf).set_params(B=2).B == 2
    with pytest.raises(NotFittedError):
        clf.predict(POINTS)
    assert clf.fit().predict(POINTS).all()
    with pytest.raises(ValueError):
        clf.predict([[0.5, 0.5]])


def test_sampler_wrapper():
    est = HeatBathSampler(side=5, lam=0.5, sweeps=200, burn_in=20, seed=1).fit()
    assert 0 <= est.origin_estimate_.p_zero <= 1
    assert len(est.final_configs_) == 1
    p, se = est.percolation_probability_
    assert 0 <= p <= 1 and se >= 0
    assert "lam" in est.get_params()


def test_flip_evolution():
    X = np.array([[1, 0, -1, 1]] * 500)
    tr = SpinFlipEvolution(t=0, random_state=0).fit()
    assert np.array_equal(tr.transform(X), X)
    out = SpinFlipEvolution(t=0.5, random_state=0).fit_transform(X)
    assert np.array_equal(np.abs(out), np.abs(X))
    assert 0.2 < (out[:, 0] == -1).mean() < 0.45
    with pytest.raises(ValueError):
        SpinFlipEvolution(t=-1).fit()
    with pytest.raises(ValueError):
        tr.transform(np.array([[2]]))
