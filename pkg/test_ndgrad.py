"""
Autodiff ops, optimizers and checkpoints
"""

import numpy as np
import pytest

from navgen.errors import ConfigError, NumericalError, ShapeError, TapeError
from navgen.ndgrad import (
    SGD,
    Adam,
    GRUCell,
    Linear,
    Module,
    Tape,
    Tensor,
    adam_step,
    clip_grad_norm,
    concat,
    embedding_lookup,
    log_softmax,
    logsumexp,
    matmul,
    mean,
    nll,
    parameter,
    read_checkpoint,
    relu,
    reshape,
    save_checkpoint,
    sigmoid,
    slice,
    softmax,
    state_from_checkpoint,
    sum,
    tanh,
    transpose,
)
from navgen.ndgrad.checkpoint import checkpoint_bytes


def numeric_grad(f, p, eps=1e-6):
    grad = np.zeros_like(p.data)
    for idx in np.ndindex(p.shape):
        old = p.data[idx]
        p.data[idx] = old + eps
        up = f().item()
        p.data[idx] = old - eps
        down = f().item()
        p.data[idx] = old
        grad[idx] = (up - down) / (2 * eps)
    return grad


def check_grads(f, params):
    for p in params:
        p.zero_grad()
    with Tape() as tape:
        loss = f()
        tape.backward(loss)
    for p in params:
        expected = numeric_grad(f, p)
        scale = max(1.0, np.abs(expected).max())
        assert np.abs(p.grad - expected).max() / scale <= 1e-4


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def _away_from_zero(rng, shape):
    x = rng.normal(size=shape)
    return np.sign(x) * (np.abs(x) + 0.1)


def _elementwise(rng):
    a = parameter(rng.normal(size=(3, 4)))
    b = parameter(rng.normal(size=(4,)))
    return lambda: sum(tanh(a * b + a) - sigmoid(a - b)), [a, b]


def _relu(rng):
    x = parameter(_away_from_zero(rng, (3, 4)))
    w = rng.normal(size=(3, 4))
    return lambda: sum(relu(x) * w), [x]


def _matmul_transpose_reshape(rng):
    a = parameter(rng.normal(size=(3, 4)))
    b = parameter(rng.normal(size=(4, 2)))
    return lambda: sum(reshape(transpose(matmul(a, b)), (6,)) * np.arange(6.0)), [a, b]


def _batched_matmul_mean(rng):
    a = parameter(rng.normal(size=(2, 3, 4)))
    b = parameter(rng.normal(size=(4, 2)))
    return lambda: mean(tanh(a @ b)), [a, b]


def _softmax(rng):
    x = parameter(rng.normal(size=(3, 5)))
    w = rng.normal(size=(3, 5))
    return lambda: sum(softmax(x, axis=1) * w), [x]


def _log_softmax(rng):
    x = parameter(rng.normal(size=(3, 5)))
    w = rng.normal(size=(3, 5))
    return lambda: sum(log_softmax(x, axis=0) * w), [x]


def _logsumexp(rng):
    x = parameter(rng.normal(size=(3, 5)))
    return lambda: sum(logsumexp(x, axis=1)), [x]


def _nll_concat(rng):
    x = parameter(rng.normal(size=(4,)))
    y = parameter(rng.normal(size=(2,)))
    target = int(rng.integers(6))
    return lambda: nll(concat([x, y]), target), [x, y]


def _slice(rng):
    x = parameter(rng.normal(size=(4,)))
    y = parameter(rng.normal(size=(2,)))
    return lambda: sum(slice(concat([x, y]), 0, 1, 5) * 3.0), [x, y]


def _embedding(rng):
    table = parameter(rng.normal(size=(5, 3)))
    ids = [int(i) for i in rng.integers(5, size=4)]
    return lambda: sum(tanh(embedding_lookup(table, ids))), [table]


OP_CASES = {
    "elementwise": _elementwise,
    "relu": _relu,
    "matmul_transpose_reshape": _matmul_transpose_reshape,
    "batched_matmul_mean": _batched_matmul_mean,
    "softmax": _softmax,
    "log_softmax": _log_softmax,
    "logsumexp": _logsumexp,
    "nll_concat": _nll_concat,
    "slice": _slice,
    "embedding": _embedding,
}


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("op", sorted(OP_CASES))
def test_op_gradients_match_finite_differences(op, seed):
    f, params = OP_CASES[op](np.random.default_rng(seed))
    check_grads(f, params)


def test_embedding_lookup_rejects_out_of_range_ids(rng):
    table = parameter(rng.normal(size=(5, 3)))
    with pytest.raises(ShapeError):
        embedding_lookup(table, [5])


def test_relu_value_and_gradient_mask():
    x = parameter([-1.0, 0.5, 2.0])
    with Tape() as tape:
        tape.backward(sum(relu(x)))
    np.testing.assert_allclose(relu(Tensor([-1.0, 0.5, 2.0])).data, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(x.grad, [0.0, 1.0, 1.0])


def test_gru_and_linear(rng):
    cell = GRUCell(3, 4, rng)
    head = Linear(4, 2, rng)
    x = Tensor(rng.normal(size=(1, 3)))
    h = Tensor(rng.normal(size=(1, 4)))
    check_grads(lambda: nll(reshape(head(cell(x, h)), (2,)), 1), cell.parameters() + head.parameters())


def test_nll_value():
    assert nll(Tensor([0.0, 0.0]), 0).item() == pytest.approx(np.log(2))


def test_backward_needs_scalar(rng):
    x = parameter(rng.normal(size=(3,)))
    with Tape() as tape:
        y = x * 2.0
        with pytest.raises(ShapeError):
            tape.backward(y)


def test_second_backward_is_rejected():
    x = parameter([1.0, 2.0])
    with Tape() as tape:
        loss = sum(x * x)
        tape.backward(loss)
        with pytest.raises(TapeError):
            tape.backward(loss)
    tape.reset()
    with tape:
        tape.backward(sum(x * x))
    np.testing.assert_allclose(x.grad, [4.0, 8.0])


def test_ops_outside_tape_do_not_record():
    x = parameter([1.0])
    y = x * 3.0
    assert not y.requires_grad


def test_non_finite_values_raise():
    with pytest.raises(NumericalError):
        Tensor([np.inf]) + 1.0
    with pytest.raises(ShapeError):
        Tensor(np.zeros((2, 3))) + Tensor(np.zeros((4,)))


def test_sgd_and_adam_steps():
    p = parameter([1.0, -1.0])
    p.grad = np.array([0.5, -0.5])
    SGD([p], lr=0.1).step()
    np.testing.assert_allclose(p.data, [0.95, -0.95])

    q = parameter([1.0, -1.0])
    q.grad = np.array([0.5, -0.5])
    state = adam_step([q], lr=0.1)
    # first bias-corrected step moves each coordinate by lr against the gradient sign
    np.testing.assert_allclose(q.data, [0.9, -0.9], atol=1e-6)
    assert state.t == 1


def test_adam_minimises_a_quadratic():
    p = parameter([3.0, -2.0])
    opt = Adam([p], lr=0.1)
    for _ in range(500):
        opt.zero_grad()
        with Tape() as tape:
            tape.backward(sum(p * p))
        opt.step()
    assert np.abs(p.data).max() < 0.1


def test_clip_grad_norm():
    a, b = parameter([0.0]), parameter([0.0, 0.0])
    a.grad, b.grad = np.array([3.0]), np.array([0.0, 4.0])
    assert clip_grad_norm([a, b], 1.0) == pytest.approx(5.0)
    total = np.sqrt(np.sum(a.grad**2) + np.sum(b.grad**2))
    assert total == pytest.approx(1.0, rel=1e-6)
    assert clip_grad_norm([a, b], 10.0) == pytest.approx(1.0, rel=1e-6)


class Pair(Module):
    def __init__(self, seed):
        rng = np.random.default_rng(seed)
        self.first = Linear(3, 2, rng)
        self.second = Linear(2, 1, rng, bias=False)


def test_checkpoint_round_trip(tmp_path):
    module = Pair(1)
    path = save_checkpoint(tmp_path / "m.ckpt.json", module, {"kind": "test"}, "vh", "ch")
    doc = read_checkpoint(path)
    other = Pair(2)
    other.load_state_dict(state_from_checkpoint(doc))
    for (name, x), (_, y) in zip(module.named_parameters(), other.named_parameters()):
        np.testing.assert_array_equal(x.data, y.data, err_msg=name)
    assert checkpoint_bytes(module, {"kind": "test"}, "vh", "ch") == path.read_bytes()
    assert checkpoint_bytes(Pair(1), {"kind": "test"}, "vh", "ch") == path.read_bytes()


def test_load_state_dict_checks_names_and_shapes():
    module = Pair(0)
    state = dict(module.state_dict())
    state.pop("second.weight")
    with pytest.raises(ShapeError, match="missing"):
        module.load_state_dict(state)
    state = dict(module.state_dict())
    state["first.bias"] = np.zeros(5)
    with pytest.raises(ShapeError):
        module.load_state_dict(state)


def test_sgd_converges_on_a_parabola():
    x = parameter([1.0])
    opt = SGD([x], lr=0.1)
    for _ in range(50):
        opt.zero_grad()
        with Tape() as tape:
            tape.backward(sum(x * x))
        opt.step()
    assert abs(x.data[0]) < 1e-3


def test_zero_gradient_leaves_parameters():
    p = parameter([0.5, 2.0])
    p.grad = np.zeros(2)
    adam_step([p], lr=0.1)
    SGD([p], lr=0.1).step()
    np.testing.assert_array_equal(p.data, [0.5, 2.0])


def test_learning_rate_must_be_positive():
    with pytest.raises(ConfigError):
        SGD([parameter([1.0])], lr=0.0)
    with pytest.raises(ConfigError):
        adam_step([parameter([1.0])], lr=-1.0)


def test_softmax_rows_sum_to_one(rng):
    x = Tensor(rng.normal(scale=3.0, size=(4, 6)))
    np.testing.assert_allclose(softmax(x, axis=1).data.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(log_softmax(x, axis=1).data, np.log(softmax(x, axis=1).data), atol=1e-9)
