import numpy as np
import pytest
from sklearn.base import clone

from conftest import CYCLIC_SIGMA
from lyaptrek import LyapunovCovariance, path_model


def test_params_and_clone():
    est = LyapunovCovariance(method="series", tol=1e-9)
    assert est.get_params() == {"method": "series", "tol": 1e-9, "margin": 0.05}
    assert clone(est).set_params(tol=1e-6).tol == 1e-6


@pytest.mark.parametrize("method", ["kron", "series"])
def test_fit_example(cyclic5, method):
    est = LyapunovCovariance(method=method, tol=1e-10).fit(*cyclic5)
    assert np.abs(est.covariance_ - CYCLIC_SIGMA).max() <= 5e-4
    assert est.residual_ < 1e-9
    assert (est.n_terms_ is None) == (method == "kron")


def test_acyclic_and_unknown_method():
    M, C = path_model(4, 1.0, 1.0)
    est = LyapunovCovariance(method="acyclic").fit(M, C)
    assert est.tail_bound_ is None and est.residual_ < 1e-12
    with pytest.raises(ValueError):
        LyapunovCovariance(method="nope").fit(M, C)


def test_transform_whitens(cyclic5):
    est = LyapunovCovariance().fit(*cyclic5)
    rng = np.random.default_rng(0)
    X = rng.multivariate_normal(np.zeros(5), est.covariance_, size=20000)
    Z = est.transform(X)
    assert np.allclose(np.cov(Z.T), np.eye(5), atol=0.05)
    assert np.isfinite(est.score(X[:10]))
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 3)))
