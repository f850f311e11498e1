"""Layer forwards against hand arithmetic; every gradient against central
finite differences."""

import numpy as np
import pytest

from conftest import gradient_check, numeric_gradient, relative_error
from stockgan.errors import NumericError, ValidationError
from stockgan.neural import (
    Adam,
    BatchNorm,
    LstmParams,
    Parameter,
    Tensor,
    concat,
    conv1d_forward,
    dense_forward,
    l1_penalty,
    load_checkpoint,
    lstm_cell,
    lstm_forward,
    save_checkpoint,
    xavier_init,
)

TOL = 1e-4


class TestXavier:
    def test_deterministic_per_seed(self):
        a = xavier_init((20, 30), 123)
        b = xavier_init((20, 30), 123)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, xavier_init((20, 30), 124))

    def test_support_bound(self):
        w = xavier_init((50, 70), 5)
        bound = np.sqrt(6.0 / (50 + 70))
        assert np.all(np.abs(w) <= bound)

    def test_conv_fan_uses_receptive_field(self):
        w = xavier_init((8, 4, 5), 5)
        bound = np.sqrt(6.0 / (4 * 5 + 8 * 5))
        assert np.all(np.abs(w) <= bound)
        assert np.max(np.abs(w)) > bound * 0.8  # reaches near the bound

    def test_mean_within_three_sigma(self):
        w = xavier_init((100, 100), 11)
        bound = np.sqrt(6.0 / 200)
        sigma_mean = bound / np.sqrt(3 * w.size)
        assert abs(w.mean()) < 3 * sigma_mean

    def test_needs_two_dims(self):
        with pytest.raises(ValidationError):
            xavier_init((10,), 0)


class TestDense:
    def test_identity(self):
        x = Tensor(np.eye(3))
        out = dense_forward(x, Tensor(np.eye(3)), Tensor(np.zeros(3)))
        assert np.array_equal(out.data, np.eye(3))

    def test_scalar_case(self):
        out = dense_forward(Tensor([[2.0]]), Tensor([[3.0]]), Tensor([1.0]))
        assert out.data[0, 0] == 7.0

    def test_gradients(self):
        rng = np.random.default_rng(0)
        x = Parameter(rng.normal(size=(4, 3)), "x")
        w = Parameter(rng.normal(size=(3, 2)), "w")
        b = Parameter(rng.normal(size=2), "b")

        def f():
            return dense_forward(x, w, b).tanh().sum()

        assert gradient_check(f, [x, w, b]) < TOL

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            dense_forward(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))),
                          Tensor(np.zeros(2)))


class TestLstm:
    def test_zero_everything_gives_zero_hidden(self):
        p = LstmParams(
            w_x=Parameter(np.zeros((3, 8)), "wx"),
            w_h=Parameter(np.zeros((2, 8)), "wh"),
            b=Parameter(np.zeros(8), "b"),
            hidden=2,
        )
        out = lstm_forward(Tensor(np.zeros((4, 5, 3))), p)
        assert np.array_equal(out.data, np.zeros((4, 2)))

    def test_single_step_equals_cell(self):
        rng = np.random.default_rng(1)
        p = LstmParams.create(3, 2, rng)
        x = rng.normal(size=(4, 1, 3))
        seq_out = lstm_forward(Tensor(x), p)
        h0 = Tensor(np.zeros((1, 2)))
        c0 = Tensor(np.zeros((1, 2)))
        cell_out, _ = lstm_cell(Tensor(x[:, 0, :]), h0, c0, p)
        assert np.max(np.abs(seq_out.data - cell_out.data)) < 1e-15

    def test_gradients_tiny_instance(self):
        rng = np.random.default_rng(2)
        p = LstmParams.create(4, 5, rng)
        x = Parameter(rng.normal(size=(2, 3, 4)), "x")
        h0 = Parameter(rng.normal(size=(1, 5)), "h0")
        c0 = Parameter(rng.normal(size=(1, 5)), "c0")

        def f():
            return lstm_forward(x, p, h0=h0, c0=c0).sum()

        params = [x, h0, c0, *p.parameters()]
        assert gradient_check(f, params) < TOL

    def test_forget_bias_initialized_to_one(self):
        p = LstmParams.create(3, 4, np.random.default_rng(0))
        assert np.array_equal(p.b.data[4:8], np.ones(4))
        assert np.array_equal(p.b.data[:4], np.zeros(4))


class TestConv1d:
    def test_length_chain(self):
        rng = np.random.default_rng(3)
        lengths = [30]
        x = Tensor(rng.normal(size=(2, 1, 30)))
        channels = [1, 4, 8, 16]
        for i in range(3):
            w = Tensor(rng.normal(size=(channels[i + 1], channels[i], 5)))
            x = conv1d_forward(x, w, Tensor(np.zeros(channels[i + 1])), stride=2)
            lengths.append(x.shape[2])
        assert lengths == [30, 13, 5, 1]

    def test_delta_kernel_subsamples(self):
        x = np.arange(12.0).reshape(1, 1, 12)
        delta = np.zeros((1, 1, 5))
        delta[0, 0, 0] = 1.0
        out = conv1d_forward(Tensor(x), Tensor(delta), Tensor(np.zeros(1)),
                             stride=2)
        assert np.array_equal(out.data[0, 0], [0, 2, 4, 6])

    def test_gradients(self):
        rng = np.random.default_rng(4)
        x = Parameter(rng.normal(size=(2, 3, 11)), "x")
        w = Parameter(rng.normal(size=(4, 3, 5)), "w")
        b = Parameter(rng.normal(size=4), "b")

        def f():
            return conv1d_forward(x, w, b, stride=2).tanh().sum()

        assert gradient_check(f, [x, w, b]) < TOL

    def test_too_short_input(self):
        with pytest.raises(ValidationError):
            conv1d_forward(Tensor(np.ones((1, 1, 4))),
                           Tensor(np.ones((1, 1, 5))), Tensor(np.zeros(1)))


class TestActivations:
    def test_leaky_relu_at_minus_one(self):
        out = Tensor([-1.0]).leaky_relu(0.01)
        assert out.data[0] == -0.01

    def test_relu_values(self):
        out = Tensor([-5.0, 5.0]).relu()
        assert np.array_equal(out.data, [0.0, 5.0])

    def test_leaky_relu_monotone(self):
        xs = np.linspace(-3, 3, 101)
        ys = Tensor(xs).leaky_relu(0.01).data
        assert np.all(np.diff(ys) >= 0)

    def test_gradients(self):
        rng = np.random.default_rng(5)
        x = Parameter(rng.normal(size=(3, 4)) + 0.1, "x")  # keep off the kink

        def f():
            return x.leaky_relu(0.01).sum() + x.relu().sum() + x.sigmoid().sum()

        assert gradient_check(f, [x]) < TOL


class TestBatchNorm:
    def test_train_mode_normalizes(self):
        rng = np.random.default_rng(6)
        bn = BatchNorm(3)
        x = rng.normal(5.0, 2.0, size=(16, 3))
        out = bn.forward(Tensor(x), train=True).data
        assert np.max(np.abs(out.mean(axis=0))) < 1e-12
        assert np.max(np.abs(out.var(axis=0) - 1.0)) < 1e-3  # eps shifts it

    def test_eval_mode_affine_formula(self):
        bn = BatchNorm(2, eps=1e-5)
        bn.running_mean = np.array([1.0, -2.0])
        bn.running_var = np.array([4.0, 9.0])
        bn.gamma.data = np.array([2.0, 0.5])
        bn.beta.data = np.array([1.0, 0.0])
        x = np.array([[3.0, 4.0]])
        out = bn.forward(Tensor(x), train=False).data
        expected = np.array([
            2.0 * (3.0 - 1.0) / np.sqrt(4.0 + 1e-5) + 1.0,
            0.5 * (4.0 + 2.0) / np.sqrt(9.0 + 1e-5),
        ])
        assert np.max(np.abs(out[0] - expected)) < 1e-12

    def test_momentum_update_formula(self):
        bn = BatchNorm(1, momentum=0.9)
        bn.running_mean = np.array([10.0])
        bn.running_var = np.array([2.0])
        x = np.array([[1.0], [3.0]])  # batch mean 2, population var 1
        bn.forward(Tensor(x), train=True)
        assert abs(bn.running_mean[0] - (0.9 * 10.0 + 0.1 * 2.0)) < 1e-12
        assert abs(bn.running_var[0] - (0.9 * 2.0 + 0.1 * 1.0)) < 1e-12

    def test_batch_of_one_rejected(self):
        bn = BatchNorm(2)
        with pytest.raises(ValidationError):
            bn.forward(Tensor(np.ones((1, 2))), train=True)

    def test_gradients_conv_layout(self):
        rng = np.random.default_rng(7)
        bn = BatchNorm(3)
        x = Parameter(rng.normal(size=(4, 3, 6)), "x")

        def f():
            return bn.forward(x, train=True).tanh().sum()

        assert gradient_check(f, [x, bn.gamma, bn.beta]) < TOL


class TestAdam:
    def test_zero_gradient_no_change(self):
        p = Parameter(np.array([1.0, 2.0]), "p")
        opt = Adam([p])
        p.grad = np.zeros(2)
        opt.step()
        assert np.array_equal(p.data, [1.0, 2.0])

    def test_first_step_is_lr_sized(self):
        p = Parameter(np.array([0.0]), "p")
        opt = Adam([p], lr=0.01)
        p.grad = np.array([1.0])
        opt.step()
        assert abs(p.data[0] + 0.01) < 1e-6  # bias-corrected step of -lr

    def test_converges_on_quadratic(self):
        p = Parameter(np.array([1.0]), "w")
        opt = Adam([p], lr=0.01)
        for _ in range(200):
            opt.zero_grad()
            loss = (p * p).sum()
            loss.backward()
            opt.step()
        assert abs(p.data[0]) < 0.1

    def test_nonfinite_gradient_names_parameter(self):
        p = Parameter(np.array([1.0]), "gate_weight")
        opt = Adam([p])
        p.grad = np.array([np.inf])
        with pytest.raises(NumericError, match="gate_weight"):
            opt.step()


class TestL1:
    def test_zero_lambda(self):
        p = Parameter(np.array([3.0, -4.0]), "p")
        assert l1_penalty([p], 0.0).item() == 0.0

    def test_hand_value(self):
        p = Parameter(np.array([1.0, -2.0]), "p")
        assert l1_penalty([p], 0.5).item() == 1.5

    def test_gradient_away_from_zero(self):
        rng = np.random.default_rng(8)
        p = Parameter(rng.normal(size=(3, 3)) + 2.0, "p")  # all positive

        def f():
            return l1_penalty([p], 0.3)

        assert gradient_check(f, [p]) < TOL

    def test_subgradient_zero_at_zero(self):
        p = Parameter(np.array([0.0, 1.0]), "p")
        l1_penalty([p], 1.0).backward()
        assert p.grad[0] == 0.0
        assert p.grad[1] == 1.0


class TestTensorOps:
    def test_concat_gradients(self):
        rng = np.random.default_rng(9)
        a = Parameter(rng.normal(size=(2, 3)), "a")
        b = Parameter(rng.normal(size=(2, 2)), "b")

        def f():
            return concat([a, b], axis=1).tanh().sum()

        assert gradient_check(f, [a, b]) < TOL

    def test_broadcast_add_gradients(self):
        rng = np.random.default_rng(10)
        a = Parameter(rng.normal(size=(4, 3)), "a")
        b = Parameter(rng.normal(size=(1, 3)), "b")

        def f():
            return ((a + b) * (a + b)).mean()

        assert gradient_check(f, [a, b]) < TOL

    def test_getitem_gradients(self):
        rng = np.random.default_rng(11)
        a = Parameter(rng.normal(size=(3, 6)), "a")

        def f():
            return (a[:, 1:4].sigmoid() * a[:, 2:5].tanh()).sum()

        assert gradient_check(f, [a]) < TOL

    def test_backward_requires_scalar(self):
        with pytest.raises(NumericError):
            Tensor(np.ones(3), requires_grad=True).backward()


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(12)
        tensors = {
            "w": rng.normal(size=(3, 4)),
            "b": rng.normal(size=4),
            "scalar": np.array(2.5),
        }
        save_checkpoint(tensors, tmp_path / "ckpt", metadata={"epoch": 3})
        loaded, meta = load_checkpoint(tmp_path / "ckpt")
        assert meta["epoch"] == 3
        for name, arr in tensors.items():
            assert np.array_equal(loaded[name], arr)

    def test_missing_checkpoint(self, tmp_path):
        from stockgan.errors import MissingArtifactError

        with pytest.raises(MissingArtifactError):
            load_checkpoint(tmp_path / "nowhere")
