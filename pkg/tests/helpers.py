"""Shared test helpers."""

import numpy as np

from ratiogan.nets import NetSpec, init_net


def quasi_linear_net(w_hidden, w_out, bias_shift=30.0):
    """[d,k,1] smooth-leaky net pushed deep into its unit-slope asymptote.

    With a large positive hidden bias the smooth-leaky unit is linear to
    within e^-30, so D(x) ~ w_out @ (w_hidden x + shift) and the input
    gradient is the constant w_out @ w_hidden.
    """
    k, d = w_hidden.shape
    spec = NetSpec(widths=(d, k, 1), hidden="smooth_leaky", squash=None, seed=0)
    net = init_net(spec)
    net.weights[0][:] = w_hidden
    net.biases[0][:] = bias_shift
    net.weights[1][:] = w_out
    net.biases[1][:] = 0.0
    return net
