import numpy as np
import pytest

from signal_field.field import FieldParams, NoiseSpec, check_assumption1, eval_field, eval_field_measured
from simulation.paths import AxisPath, SinusoidPath, SinusoidTerm
from tests.oracles import jacobi_eigenvalues, random_dominant_matrix
from utils.errors import RejectedInputError

H_DOMINANT = [[1.0, 0.2], [0.2, 2.0]]


def test_eval_field_at_extremum():
    params = FieldParams(3.0, H_DOMINANT, SinusoidPath.constant([1.0, 2.0]))
    assert eval_field(params, [1.0, 2.0], 0.0) == 3.0


def test_eval_field_at_origin():
    params = FieldParams(3.0, H_DOMINANT, SinusoidPath.constant([1.0, 2.0]))
    np.testing.assert_allclose(eval_field(params, [0.0, 0.0], 12.5), -1.9, rtol=1e-14)


def test_eval_field_identity_hessian():
    params = FieldParams(0.0, np.eye(2), SinusoidPath.constant([0.0, 0.0]))
    assert eval_field(params, [1.0, 0.0], 0.0) == -0.5


def test_eval_field_follows_moving_extremum():
    drift = SinusoidPath((AxisPath(1.0, (SinusoidTerm(0.5, 1.0),)), AxisPath(2.0)))
    params = FieldParams(3.0, H_DOMINANT, drift)
    t = np.pi / 2
    assert eval_field(params, [1.5, 2.0], t) == pytest.approx(3.0, abs=1e-15)


def test_eval_field_batch_matches_single():
    params = FieldParams(3.0, H_DOMINANT, SinusoidPath.constant([1.0, 2.0]))
    ys = np.array([[0.0, 0.0], [1.0, 2.0], [-1.0, 0.5]])
    batch = eval_field(params, ys, np.zeros(3))
    np.testing.assert_array_equal(batch, [eval_field(params, y, 0.0) for y in ys])


def test_eval_field_rejects_dimension_mismatch():
    params = FieldParams(3.0, H_DOMINANT, SinusoidPath.constant([1.0, 2.0]))
    with pytest.raises(RejectedInputError):
        eval_field(params, [1.0, 2.0, 3.0], 0.0)


def test_field_params_rejects_non_dominant_hessian():
    with pytest.raises(RejectedInputError, match='Assumption 1'):
        FieldParams(3.0, [[1.0, 1.0], [1.0, 1.0]], SinusoidPath.constant([1.0, 2.0]))


def test_field_params_rejects_asymmetric_hessian():
    with pytest.raises(RejectedInputError, match='symmetric'):
        FieldParams(3.0, [[1.0, 0.2], [0.1, 2.0]], SinusoidPath.constant([1.0, 2.0]))


@pytest.mark.parametrize('H, expected', [
    (H_DOMINANT, True),
    ([[1.0, 1.0], [1.0, 1.0]], False),
    ([[2.0, -1.5], [-1.5, 2.0]], True),
    ([[-1.0]], False),
    ([[0.5]], True),
])
def test_check_assumption1(H, expected):
    assert check_assumption1(H) is expected


def test_noise_free_measurement_equals_field():
    params = FieldParams(3.0, H_DOMINANT, SinusoidPath.constant([1.0, 2.0]))
    noise = NoiseSpec(0.0, 5, 'gaussian-white')
    for step, y in enumerate([[0.0, 0.0], [0.3, -2.0], [1.0, 2.0]]):
        assert eval_field_measured(params, y, step * 1e-3, noise, step) == eval_field(params, y, step * 1e-3)


def test_noise_is_deterministic_per_step():
    noise = NoiseSpec(0.05, 7, 'gaussian-white')
    assert noise.sample(123456) == noise.sample(123456)
    np.testing.assert_array_equal(noise.samples(4000, 200)[96:], noise.samples(4096, 104))


def test_noise_seeds_differ():
    assert NoiseSpec(0.05, 1, 'gaussian-white').sample(10) != NoiseSpec(0.05, 2, 'gaussian-white').sample(10)


def test_noise_variance():
    noise = NoiseSpec(0.05, 0, 'gaussian-white')
    samples = noise.samples(0, 100000)
    assert 0.045 <= np.var(samples) <= 0.055


def test_noise_kind_none_is_silent():
    assert not np.any(NoiseSpec(0.05, 0, 'none').samples(0, 1000))


def test_noise_rejects_negative_variance():
    with pytest.raises(RejectedInputError):
        NoiseSpec(-1.0)


@pytest.mark.parametrize('m', [1, 2, 3, 5])
def test_dominant_matrices_are_positive_definite(m):
    rng = np.random.default_rng(m)
    for _ in range(250):
        H = random_dominant_matrix(rng, m)
        assert check_assumption1(H)
        assert jacobi_eigenvalues(H)[0] > 0


def _drifting_field(rng, m):
    axes = tuple(AxisPath(rng.uniform(-2.0, 2.0), (SinusoidTerm(rng.uniform(0.1, 1.0), rng.uniform(0.01, 0.5)),))
                 for _ in range(m))
    return FieldParams(rng.uniform(-5.0, 5.0), random_dominant_matrix(rng, m), SinusoidPath(axes))


@pytest.mark.parametrize('m', [1, 2, 3, 5])
def test_field_peaks_at_extremum(m, rng):
    for _ in range(50):
        params = _drifting_field(rng, m)
        t = rng.uniform(0.0, 100.0)
        x = params.extremum_at(t)
        assert eval_field(params, x, t) == params.c1
        for d in rng.normal(size=(20, m)):
            assert eval_field(params, x + d, t) < params.c1


@pytest.mark.parametrize('m', [1, 2, 3, 5])
def test_finite_difference_hessian(m, rng):
    h = 1e-2
    for _ in range(20):
        params = _drifting_field(rng, m)
        t = rng.uniform(0.0, 100.0)
        y = params.extremum_at(t) + rng.uniform(-1.0, 1.0, m)
        E = h * np.eye(m)

        def F(p):
            return eval_field(params, p, t)

        fd = np.array([[(F(y + E[i] + E[j]) - F(y + E[i] - E[j]) - F(y - E[i] + E[j]) + F(y - E[i] - E[j]))
                        / (4 * h * h) for j in range(m)] for i in range(m)])
        np.testing.assert_allclose(fd, -params.H, rtol=0, atol=1e-8)
