import time

import numpy as np
import pytest

from bkt.covariance import estimate_sigma
from bkt.errors import DegenerateGeometryError, InputError, ParameterError
from bkt.inference.workspace import ThetaWorkspace
from bkt.jacobian import total_log_vol
from bkt.kernel import subsample_eval_points, witness_state
from bkt.likelihood import loglik_alt, loglik_null, r_matrix
from bkt.models import EvalPoints, KernelParam, PairedDataset, SigmaMethod
from bkt.synth import gen, preset


def _reference(data, z, theta, method):
    p = KernelParam(theta)
    state = witness_state(data, z, p)
    sigma = estimate_sigma(state, data.n, method)
    r = r_matrix(z, p)
    null = loglik_null(data, z, p, sigma, state=state, with_jacobian=False).value
    alt = loglik_alt(data, z, p, sigma, r, state=state, path="efficient", with_jacobian=False).value
    return null, alt, total_log_vol(data, z, p)


@pytest.fixture
def planar():
    rng = np.random.default_rng(12)
    data = PairedDataset(x=rng.standard_normal((40, 2)), y=rng.standard_normal((40, 2)) * 1.5)
    return data, subsample_eval_points(data, 8, seed=2)


@pytest.mark.parametrize("method", list(SigmaMethod))
@pytest.mark.parametrize("theta", [0.3, 1.0, 4.0])
def test_matches_separate_evaluation_1d(shifted_1d, eval_points_1d, method, theta):
    ws = ThetaWorkspace(shifted_1d, eval_points_1d, method)
    expected = _reference(shifted_1d, eval_points_1d, theta, method)
    assert ws.evaluate(theta) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("method", list(SigmaMethod))
def test_matches_separate_evaluation_2d(planar, method):
    data, z = planar
    ws = ThetaWorkspace(data, z, method)
    for theta in (0.5, 2.0):
        assert ws.evaluate(theta) == pytest.approx(_reference(data, z, theta, method), rel=1e-6)


def test_rejects_bad_inputs(shifted_1d, planar):
    _, z2 = planar
    with pytest.raises(InputError):
        ThetaWorkspace(shifted_1d, z2)
    with pytest.raises(InputError):
        ThetaWorkspace(PairedDataset(x=[[0.0]], y=[[1.0]]), EvalPoints(z=[[0.0], [1.0]]))
    with pytest.raises(ParameterError):
        ThetaWorkspace(shifted_1d, subsample_eval_points(shifted_1d, 6, seed=0)).evaluate(0.0)


def test_too_few_eval_points_for_the_jacobian(planar):
    data, _ = planar
    z = subsample_eval_points(data, 2, seed=0)
    with pytest.raises(DegenerateGeometryError):
        ThetaWorkspace(data, z).evaluate(1.0)
    assert np.isfinite(ThetaWorkspace(data, z, clamp_jacobian=True).evaluate(1.0)[0])


def test_forty_eval_points_are_fast():
    data = gen(preset("mvn_null_d1", n=100, seed=0))
    ws = ThetaWorkspace(data, subsample_eval_points(data, 40, seed=1))
    started = time.perf_counter()
    for theta in np.geomspace(0.1, 10.0, 100):
        ws.evaluate(theta)
    assert time.perf_counter() - started < 5.0
