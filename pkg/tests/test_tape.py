"""Reverse-mode tape: every op against central finite differences."""

import numpy as np
import pytest

from sphereflow.siamese import tape
from sphereflow.siamese.tape import Var, backward, finite_difference_grad


def check_grad(build, arrays, rel=1e-6, n_coords=5, seed=0):
    """Compare tape gradients of build(vars) against finite differences.

    build receives a dict of Vars and must return a scalar Var.
    """
    lifted = {k: Var(v) for k, v in arrays.items()}
    out = build(lifted)
    backward(out)
    rng = np.random.default_rng(seed)
    for name, arr in arrays.items():
        n = min(n_coords, arr.size)
        coords = [np.unravel_index(i, arr.shape) for i in rng.choice(arr.size, n, replace=False)]
        fd = finite_difference_grad(
            lambda d: float(build({k: Var(v) for k, v in d.items()}).value), arrays, name, coords
        )
        grad = lifted[name].grad
        if grad is None:
            # leaf not used by this expression; finite differences must agree
            assert all(abs(w) < 1e-9 for w in fd), name
            continue
        for coord, want in zip(coords, fd):
            got = grad[coord]
            assert got == pytest.approx(want, rel=rel, abs=1e-9), (name, coord)


def test_arithmetic_ops():
    arrays = {
        "a": np.random.default_rng(1).normal(size=(3, 4)),
        "b": np.random.default_rng(2).normal(size=(3, 4)) + 3.0,  # keep away from 0 for div
    }
    check_grad(lambda v: tape.vsum(tape.add(v["a"], v["b"])), arrays)
    check_grad(lambda v: tape.vsum(tape.sub(v["a"], v["b"])), arrays)
    check_grad(lambda v: tape.vsum(tape.mul(v["a"], v["b"])), arrays)
    check_grad(lambda v: tape.vsum(tape.div(v["a"], v["b"])), arrays)
    check_grad(lambda v: tape.vsum(tape.neg(v["a"])), arrays)


def test_broadcasting_gradients():
    arrays = {
        "row": np.random.default_rng(3).normal(size=(1, 4)),
        "full": np.random.default_rng(4).normal(size=(5, 4)),
        "vec": np.random.default_rng(5).normal(size=(4,)),
    }
    check_grad(lambda v: tape.vsum(tape.mul(v["row"], v["full"])), arrays)
    check_grad(lambda v: tape.vsum(tape.add(v["full"], v["vec"])), arrays)
    # gradient shapes must match the leaves, not the broadcast result
    lifted = {k: Var(v) for k, v in arrays.items()}
    backward(tape.vsum(tape.add(lifted["full"], lifted["vec"])))
    assert lifted["vec"].grad.shape == (4,)
    assert lifted["full"].grad.shape == (5, 4)


def test_matmul_tanh_chain():
    arrays = {
        "w": np.random.default_rng(6).normal(size=(4, 3)),
        "x": np.random.default_rng(7).normal(size=(2, 4)),
    }
    check_grad(lambda v: tape.vsum(tape.tanh(tape.matmul(v["x"], v["w"]))), arrays)
    with pytest.raises(ValueError):
        tape.matmul(Var(np.zeros(3)), Var(np.zeros((3, 2))))


def test_abs_and_reductions():
    arrays = {"x": np.random.default_rng(8).normal(size=(6, 2)) + 0.5}
    check_grad(lambda v: tape.vsum(tape.abs_val(v["x"])), arrays)
    check_grad(lambda v: tape.vmean(tape.abs_val(v["x"])), arrays)
    check_grad(lambda v: tape.vsum(tape.vmean(v["x"], axis=0)), arrays)
    check_grad(lambda v: tape.vsum(tape.vmean(v["x"], axis=(0, 1))), arrays)


def test_abs_gradient_at_kink_is_zero():
    x = Var(np.array([0.0, -2.0, 2.0]))
    backward(tape.vsum(tape.abs_val(x)))
    np.testing.assert_array_equal(x.grad, [0.0, -1.0, 1.0])


def test_reshape_concat_dot():
    arrays = {
        "a": np.random.default_rng(9).normal(size=(2, 3)),
        "b": np.random.default_rng(10).normal(size=(2, 2)),
        "v": np.random.default_rng(11).normal(size=(5,)),
    }
    check_grad(
        lambda v: tape.vsum(tape.concat([v["a"], v["b"]], axis=1)), arrays
    )
    check_grad(lambda v: tape.vsum(tape.reshape(v["a"], (3, 2))), arrays)
    check_grad(lambda v: tape.dot(v["v"], v["v"]), arrays)
    with pytest.raises(ValueError):
        tape.dot(Var(np.zeros((2, 2))), Var(np.zeros((2, 2))))


def test_l2_norm():
    arrays = {"v": np.array([3.0, 4.0])}
    out = tape.l2_norm(Var(arrays["v"]))
    assert float(out.value) == 5.0
    check_grad(lambda v: tape.l2_norm(v["v"]), arrays)
    with pytest.raises(ValueError):
        tape.l2_norm(Var(np.zeros(3)))


def test_stop_gradient_blocks_flow():
    x = Var(np.array([2.0, -1.0]))
    y = tape.add(x, tape.stop_gradient(tape.mul(x, x)))
    backward(tape.vsum(y))
    np.testing.assert_array_equal(x.grad, [1.0, 1.0])


def test_shared_subexpression_accumulates():
    # a appears twice on different paths: d(a*a*a)/da = 3a^2
    a = Var(np.array([1.5, -0.5]))
    b = tape.mul(a, a)
    c = tape.mul(a, b)
    backward(tape.vsum(c))
    np.testing.assert_allclose(a.grad, 3.0 * arrays_squared(a.value), atol=1e-12)


def arrays_squared(v):
    return v * v


def test_diamond_graph_order():
    # root consumes both a mid node and the leaf the mid node consumes;
    # the leaf gradient must include both paths
    x = Var(np.array(2.0))
    m = tape.mul(x, x)  # x^2
    out = tape.mul(m, x)  # x^3
    backward(out)
    assert float(x.grad) == pytest.approx(12.0, rel=1e-12)  # 3 x^2 at x = 2


def test_backward_requires_scalar():
    with pytest.raises(ValueError):
        backward(Var(np.zeros(3)))


def test_unused_leaf_has_no_gradient():
    x = Var(np.array(1.0))
    y = Var(np.array(2.0))
    backward(tape.mul(x, x))
    assert y.grad is None


def test_constants_and_lifting():
    c = tape.constant(np.arange(3.0))
    assert isinstance(c, Var)
    assert tape.as_var(c) is c
    lifted = tape.as_var([1.0, 2.0])
    assert isinstance(lifted, Var)
    assert lifted.value.dtype == np.float64
