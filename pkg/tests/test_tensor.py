import numpy as np
import pytest

from ssg_toolkit.sgpn.tensor import Tensor, concat, no_grad, parameter, split


def numeric_grad(fn, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences of the scalar ``fn`` at ``x``."""
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + eps
        plus = fn(x)
        x[index] = original - eps
        minus = fn(x)
        x[index] = original
        grad[index] = (plus - minus) / (2 * eps)
    return grad


def check(op, *shapes, seed=0, low=-1.0, high=1.0):
    """Compare the analytic gradient of ``sum(op(*inputs) * weights)`` with finite differences."""
    rng = np.random.default_rng(seed)
    arrays = [rng.uniform(low, high, shape) for shape in shapes]
    params = [parameter(a.copy()) for a in arrays]
    out = op(*params)
    weights = rng.normal(size=out.shape)
    (out * weights).sum().backward()
    for k, p in enumerate(params):
        def scalar(value, k=k):
            inputs = [Tensor(a) for a in arrays]
            inputs[k] = Tensor(value)
            return float((op(*inputs).data * weights).sum())
        np.testing.assert_allclose(p.grad, numeric_grad(scalar, arrays[k].copy()), rtol=1e-5, atol=1e-7)


class TestGradients:
    def test_broadcast_arithmetic(self):
        check(lambda a, b: a + b, (3, 4), (4,))
        check(lambda a, b: a * b - b, (3, 4), (3, 1))
        check(lambda a, b: a / b, (2, 3), (3,), low=0.5, high=2.0)
        check(lambda a: 1.0 - a ** 2.0, (5,))

    def test_matmul(self):
        check(lambda a, b: a @ b, (3, 4), (4, 2))
        check(lambda a, b: a @ b, (2, 3, 4), (4, 5))

    def test_nonlinearities(self):
        check(lambda a: a.exp(), (4,))
        check(lambda a: a.log(), (4,), low=0.1, high=3.0)
        check(lambda a: a.sigmoid(), (4,))
        check(lambda a: a.log_sigmoid(), (4,), low=-30.0, high=30.0)
        check(lambda a: a.log_softmax(axis=-1), (3, 5))
        check(lambda a: a.softmax(axis=0), (3, 5))
        check(lambda a: (a + 0.05).relu(), (6,), low=0.1, high=1.0)

    def test_reductions(self):
        check(lambda a: a.sum(axis=0), (3, 4))
        check(lambda a: a.sum(axis=1, keepdims=True), (3, 4))
        check(lambda a: a.mean(), (3, 4))
        check(lambda a: a.max(axis=1), (3, 4, 2))

    def test_indexing(self):
        check(lambda a: a[1:, 2], (3, 4))
        check(lambda a: a[np.array([0, 2, 2]), np.array([1, 0, 1])], (3, 4))
        check(lambda a: a.take_rows([2, 0, 2]), (3, 4))
        check(lambda a: a.segment_sum([0, 1, 0, 2], 4), (4, 3))
        check(lambda a: a.reshape(2, 6), (3, 4))

    def test_concat_and_split(self):
        check(lambda a, b: concat([a, b], axis=1), (2, 3), (2, 2))
        check(lambda a: split(a, [1, 3], axis=1)[1] * 2.0, (2, 4))


class TestEngine:
    def test_shared_subexpression(self):
        x = parameter([1.5, -2.0])
        y = x * x + x
        y.sum().backward()
        np.testing.assert_allclose(x.grad, 2 * x.data + 1)

    def test_gradients_accumulate_until_cleared(self):
        x = parameter(3.0)
        (x * 2.0).backward()
        (x * 2.0).backward()
        assert x.grad == pytest.approx(4.0)
        x.zero_grad()
        assert x.grad is None

    def test_backward_needs_seed_for_arrays(self):
        x = parameter([1.0, 2.0])
        with pytest.raises(ValueError):
            (x * 2.0).backward()
        (x * 2.0).backward(np.ones(2))
        np.testing.assert_allclose(x.grad, [2.0, 2.0])

    def test_no_grad_records_nothing(self):
        x = parameter([1.0, 2.0])
        with no_grad():
            y = (x * x).sum()
        assert not y.requires_grad
        z = (x * x).sum()
        assert z.requires_grad

    def test_constants_get_no_gradient(self):
        x = parameter([1.0])
        c = Tensor([2.0])
        (x * c).sum().backward()
        assert c.grad is None

    def test_stable_log_sigmoid(self):
        x = Tensor([-800.0, 0.0, 800.0])
        out = x.log_sigmoid().data
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out[1:], [np.log(0.5), 0.0])
