import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftcraft.trainer import (
    Model,
    ShapeError,
    as_input,
    combined_loss,
    cross_entropy,
    forward,
    gradient_check,
    init_model,
    load_model,
    loss_and_grad,
    save_model,
    softmax,
)
from shiftcraft.trainer.checkpoint import CheckpointError, dumps, loads


def test_zero_linear_is_uniform():
    m = init_model((4, 4, 3), 5)
    np.testing.assert_allclose(forward(m, np.random.default_rng(0).random((4, 4, 3))), 0.2)


def test_linear_forward_hand_case():
    m = Model("linear", (2,), 2, [np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.0, 0.0])])
    p = forward(m, np.array([math.log(3.0), 0.0]))
    np.testing.assert_allclose(p, [0.75, 0.25], atol=1e-15)


def test_cross_entropy_uniform_is_log_c():
    for c in (2, 7, 10):
        assert cross_entropy(np.full((5, c), 1.0 / c), np.arange(5) % c) == pytest.approx(math.log(c), abs=1e-12)


def test_cross_entropy_label_range():
    with pytest.raises(ValueError):
        cross_entropy(np.full((2, 3), 1 / 3), [0, 3])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=8))
def test_softmax_properties(z):
    p = softmax(np.array(z))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(softmax(np.array(z) + 123.0), p, atol=1e-12)
    assert p[np.argmax(z)] == p.max()


@pytest.mark.parametrize("arch", ["linear", "mlp"])
def test_gradient_check(arch):
    rng = np.random.default_rng(1)
    m = init_model((12,), 4, arch, hidden=8, rng=rng)
    if arch == "linear":
        m.params = [0.3 * rng.standard_normal(p.shape) for p in m.params]
    X, y = rng.random((8, 12)), rng.integers(0, 4, 8)
    assert gradient_check(m, X, y) < 1e-4
    Xs, ys = rng.random((8, 12)), rng.integers(0, 4, 8)
    assert gradient_check(m, X, y, X_s=Xs, y_s=ys, lam=0.5) < 1e-4


def test_gradient_of_empty_batch_is_zero():
    m = init_model((3,), 2)
    loss, grads = loss_and_grad(m, np.zeros((0, 3)), [])
    assert loss == 0.0 and all(not g.any() for g in grads)


def test_combined_loss_examples():
    p = np.array([[0.5, 0.5]])
    q = np.array([[0.25, 0.75]])
    ln2, ln4 = math.log(2), math.log(4)
    assert combined_loss(p, q, [0], [0], 0.5, "IS") == pytest.approx((ln2 + 0.5 * ln4, ln2, ln4))
    assert combined_loss(p, q, [0], [0], 0.0, "IS")[0] == pytest.approx(ln2)
    assert combined_loss(p, q, [0], [0], 0.5, "I") == pytest.approx((ln2, ln2, 0.0))
    # S ignores lambda: its loss is the shape term alone
    assert combined_loss(p, q, [0], [0], 0.3, "S") == pytest.approx((ln4, 0.0, ln4))


def test_edge_map_encoding_and_shape_errors():
    m = init_model((4, 4, 3), 2)
    e = np.zeros((4, 4), dtype=bool)
    e[1, 2] = True
    x = as_input(m, e).reshape(4, 4, 3)
    assert x[1, 2].tolist() == [1.0, 1.0, 1.0] and x.sum() == 3.0
    with pytest.raises(ShapeError):
        as_input(m, np.zeros((5, 4, 3)))


def test_unknown_architecture():
    with pytest.raises(ValueError):
        init_model((3,), 2, "resnet")


@pytest.mark.parametrize("arch", ["linear", "mlp"])
def test_checkpoint_round_trip(arch, tmp_path):
    rng = np.random.default_rng(3)
    m = init_model((4, 4, 3), 5, arch, hidden=6, rng=rng)
    m.params = [rng.standard_normal(p.shape) for p in m.params]
    save_model(m, tmp_path / "m.bin")
    back = load_model(tmp_path / "m.bin")
    assert (back.architecture, back.input_shape, back.class_count) == (arch, (4, 4, 3), 5)
    for a, b in zip(m.params, back.params):
        assert a.tobytes() == b.tobytes()
    assert dumps(back) == dumps(m)


def test_checkpoint_rejects_garbage():
    m = init_model((3,), 2)
    buf = dumps(m)
    with pytest.raises(CheckpointError):
        loads(b"XXXX" + buf[4:])
    with pytest.raises(CheckpointError):
        loads(buf + b"\0")
    with pytest.raises(CheckpointError):
        loads(buf[:4] + (99).to_bytes(4, "little") + buf[8:])
