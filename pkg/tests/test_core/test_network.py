"""Tests for the residual network's forward and backward passes."""

import numpy as np
import pytest

from prior_lift.core.network import (
    ForwardMode,
    NetworkConfig,
    build_network,
    net_backward,
    net_forward,
    update_running_stats,
)
from prior_lift.core.optim import AdamState, apply_gradients
from prior_lift.core.rng import make_rng
from prior_lift.errors import InvalidInputError, InvalidStateError, NumericError


@pytest.fixture
def config() -> NetworkConfig:
    """A small two-block network."""
    return NetworkConfig(input_size=6, output_size=4, hidden_size=10, num_blocks=2)


@pytest.fixture
def net(config):
    """A seeded network."""
    return build_network(config, make_rng(0))


@pytest.fixture
def batch() -> np.ndarray:
    """A random input batch of 5."""
    return make_rng(1).normal(size=(5, 6))


class TestBuildNetwork:
    """Tests for network construction."""

    def test_parameter_names_in_forward_order(self, net):
        """Parameters are listed stage by stage, head last."""
        names = list(net.parameters())
        assert names[:4] == ["stem.weight", "stem.bias", "stem.gamma", "stem.beta"]
        assert names[4] == "blocks.0.0.weight"
        assert names[-2:] == ["head.weight", "head.bias"]
        assert len(names) == 4 * 5 + 2

    def test_shapes(self, net):
        """Weights are (out, in)."""
        params = net.parameters()
        assert params["stem.weight"].shape == (10, 6)
        assert params["blocks.1.1.weight"].shape == (10, 10)
        assert params["head.weight"].shape == (4, 10)

    def test_kaiming_bound(self, net):
        """Initial weights lie within sqrt(6 / fan_in)."""
        assert np.abs(net.stem.weight).max() <= np.sqrt(6.0 / 6)
        assert np.abs(net.head.weight).max() <= np.sqrt(6.0 / 10)

    def test_blank_network(self, config):
        """Without a generator all weights are zero."""
        blank = build_network(config, rng=None)
        assert not np.any(blank.stem.weight)
        assert not np.any(blank.head.weight)

    def test_same_seed_same_weights(self, config):
        """Initialization is deterministic per seed."""
        first = build_network(config, make_rng(3))
        second = build_network(config, make_rng(3))
        for name, value in first.state_dict().items():
            np.testing.assert_array_equal(value, second.state_dict()[name])

    def test_linear_only(self):
        """A linear-only network has just the head."""
        net = build_network(
            NetworkConfig(input_size=3, output_size=2, linear_only=True), make_rng(0)
        )
        assert list(net.parameters()) == ["head.weight", "head.bias"]
        assert net.buffers() == {}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"input_size": 0},
            {"keep_prob": 0.0},
            {"keep_prob": 1.5},
            {"num_blocks": -1},
            {"unknown": 1},
        ],
    )
    def test_invalid_config(self, kwargs):
        """Out-of-range and unknown settings are rejected."""
        values = {"input_size": 4, "output_size": 2, **kwargs}
        with pytest.raises(ValueError):
            NetworkConfig(**values)


class TestStateDict:
    """Tests for state dictionaries and copies."""

    def test_copy_is_independent(self, net):
        """Changing a copy leaves the original untouched."""
        clone = net.copy()
        clone.stem.weight += 1.0
        assert not np.allclose(clone.stem.weight, net.stem.weight)

    def test_load_bumps_version(self, net, config):
        """Loading a state replaces values and bumps the version."""
        blank = build_network(config, rng=None)
        blank.load_state_dict(net.state_dict())
        assert blank.version == 1
        np.testing.assert_array_equal(blank.head.weight, net.head.weight)

    def test_load_rejects_mismatch(self, net):
        """Missing names and wrong shapes are rejected."""
        state = net.state_dict()
        state.pop("head.bias")
        with pytest.raises(InvalidInputError):
            net.load_state_dict(state)
        state = net.state_dict()
        state["head.bias"] = np.zeros(7)
        with pytest.raises(InvalidInputError):
            net.load_state_dict(state)


class TestNetForward:
    """Tests for net_forward."""

    def test_output_shape(self, net, batch):
        """The output has one row per input."""
        output, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        assert output.shape == (5, 4)
        assert cache.output_shape == (5, 4)

    def test_forward_is_pure(self, net, batch):
        """A training forward pass leaves parameters and running statistics untouched."""
        before = {name: value.copy() for name, value in net.state_dict().items()}
        net_forward(net, batch, ForwardMode.TRAIN, make_rng(2))
        for name, value in net.state_dict().items():
            np.testing.assert_array_equal(value, before[name])
        assert net.version == 0

    def test_dropout_needs_rng(self, net, batch):
        """Dropout in training mode needs a generator."""
        with pytest.raises(InvalidInputError):
            net_forward(net, batch, ForwardMode.TRAIN)

    def test_no_dropout_when_keep_prob_one(self, batch):
        """With keep_prob 1 training mode equals batch-statistics mode."""
        net = build_network(
            NetworkConfig(input_size=6, output_size=4, hidden_size=8, keep_prob=1.0), make_rng(0)
        )
        train_out, _ = net_forward(net, batch, ForwardMode.TRAIN, make_rng(5))
        stats_out, _ = net_forward(net, batch, ForwardMode.BATCH_STATS)
        np.testing.assert_array_equal(train_out, stats_out)

    def test_batch_of_one_rejected(self, net, batch):
        """Batch statistics need at least two rows; eval mode does not."""
        with pytest.raises(InvalidInputError):
            net_forward(net, batch[:1], ForwardMode.BATCH_STATS)
        output, _ = net_forward(net, batch[:1], ForwardMode.EVAL)
        assert output.shape == (1, 4)

    def test_width_mismatch(self, net):
        """Inputs of the wrong width are rejected."""
        with pytest.raises(InvalidInputError):
            net_forward(net, np.zeros((4, 5)), ForwardMode.EVAL)

    def test_eval_rows_independent(self, net, batch):
        """In eval mode each row's output does not depend on the others."""
        together, _ = net_forward(net, batch, ForwardMode.EVAL)
        alone, _ = net_forward(net, batch[2:3], ForwardMode.EVAL)
        np.testing.assert_allclose(together[2:3], alone, atol=1e-12)

    def test_non_finite_output(self, net, batch):
        """An infinite parameter surfaces as NumericError."""
        net.head.bias[0] = np.inf
        with pytest.raises(NumericError):
            net_forward(net, batch, ForwardMode.EVAL)

    def test_normalized_features_standardized(self):
        """In training mode every stage normalizes each feature to mean 0, variance 1."""
        config = NetworkConfig(input_size=6, output_size=4, hidden_size=16, bn_eps=1e-12)
        net = build_network(config, make_rng(0))
        inputs = make_rng(1).normal(size=(64, 6))
        _, cache = net_forward(net, inputs, ForwardMode.TRAIN, make_rng(2))
        assert len(cache.stages) == 5
        for stage in cache.stages:
            assert np.abs(stage.xhat.mean(axis=0)).max() < 1e-10
            np.testing.assert_allclose(stage.xhat.var(axis=0), 1.0, rtol=0, atol=1e-8)

    def test_dropout_unbiased(self, batch):
        """Averaged over many masks, a dropout pass matches the batch-statistics output."""
        config = NetworkConfig(input_size=6, output_size=1, hidden_size=8, num_blocks=0)
        net = build_network(config, make_rng(0))
        expected, _ = net_forward(net, batch, ForwardMode.BATCH_STATS)
        rng = make_rng(3)
        totals = np.array(
            [net_forward(net, batch, ForwardMode.TRAIN, rng)[0].sum() for _ in range(20_000)]
        )
        sigma = totals.std(ddof=1) / np.sqrt(totals.size)
        assert abs(totals.mean() - expected.sum()) <= 3.0 * sigma

    @pytest.mark.parametrize("mode", list(ForwardMode))
    def test_zeroed_network_outputs_head_bias(self, net, batch, mode):
        """With every weight and scale at zero each row is the head bias."""
        for value in net.parameters().values():
            value[...] = 0.0
        net.head.bias[...] = [1.0, -2.0, 0.5, 3.0]
        output, _ = net_forward(net, batch, mode, make_rng(6))
        np.testing.assert_array_equal(output, np.broadcast_to(net.head.bias, output.shape))


class TestNetBackward:
    """Tests for net_backward."""

    def test_gradient_names_and_shapes(self, net, batch):
        """Gradients follow parameter order and shapes."""
        output, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        grads, grad_input = net_backward(net, cache, np.ones_like(output))
        assert list(grads) == list(net.parameters())
        for name, value in net.parameters().items():
            assert grads[name].shape == value.shape
        assert grad_input.shape == batch.shape

    def test_pre_norm_bias_gradient_vanishes(self, net, batch):
        """Batch norm cancels any shift of the preceding linear bias."""
        output, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        upstream = make_rng(4).normal(size=output.shape)
        grads, _ = net_backward(net, cache, upstream)
        np.testing.assert_allclose(grads["stem.bias"], 0.0, atol=1e-12)

    def test_linear_head_gradient(self):
        """For a linear network the weight gradient is upstream.T @ inputs."""
        net = build_network(
            NetworkConfig(input_size=3, output_size=2, linear_only=True), make_rng(0)
        )
        inputs = make_rng(1).normal(size=(4, 3))
        upstream = make_rng(2).normal(size=(4, 2))
        _, cache = net_forward(net, inputs, ForwardMode.EVAL)
        grads, grad_input = net_backward(net, cache, upstream)
        np.testing.assert_allclose(grads["head.weight"], upstream.T @ inputs)
        np.testing.assert_allclose(grads["head.bias"], upstream.sum(axis=0))
        np.testing.assert_allclose(grad_input, upstream @ net.head.weight)

    def test_stale_cache_rejected(self, net, batch):
        """A cache from before a parameter update cannot be used."""
        output, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        grads, _ = net_backward(net, cache, np.ones_like(output))
        apply_gradients(net, grads, AdamState())
        with pytest.raises(InvalidStateError):
            net_backward(net, cache, np.ones_like(output))

    def test_foreign_cache_rejected(self, net, config, batch):
        """A cache from another network cannot be used."""
        other = build_network(config, make_rng(9))
        output, cache = net_forward(other, batch, ForwardMode.BATCH_STATS)
        with pytest.raises(InvalidStateError):
            net_backward(net, cache, np.ones_like(output))

    def test_eval_cache_rejected(self, net, batch):
        """An eval-mode cache of a batch-norm network cannot be backpropagated."""
        output, cache = net_forward(net, batch, ForwardMode.EVAL)
        with pytest.raises(InvalidStateError):
            net_backward(net, cache, np.ones_like(output))

    def test_upstream_shape(self, net, batch):
        """The upstream gradient must match the output shape."""
        _, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        with pytest.raises(InvalidInputError):
            net_backward(net, cache, np.ones((5, 3)))


class TestUpdateRunningStats:
    """Tests for update_running_stats."""

    def test_momentum_update(self, net, batch):
        """Running statistics move a momentum step towards the batch statistics."""
        _, cache = net_forward(net, batch, ForwardMode.BATCH_STATS)
        stem_cache = cache.stages[0]
        update_running_stats(net, cache)
        np.testing.assert_allclose(net.stem.running_mean, 0.1 * stem_cache.batch_mean)
        np.testing.assert_allclose(
            net.stem.running_var, 0.9 + 0.1 * stem_cache.batch_var * 5 / 4
        )

    def test_eval_cache_ignored(self, net, batch):
        """An eval pass carries no batch statistics to fold in."""
        _, cache = net_forward(net, batch, ForwardMode.EVAL)
        update_running_stats(net, cache)
        np.testing.assert_array_equal(net.stem.running_mean, np.zeros(10))
