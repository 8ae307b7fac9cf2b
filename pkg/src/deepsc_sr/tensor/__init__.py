"""Minimal reverse-mode autodiff with the layers and optimizer the model needs."""

from .core import (
    Node,
    Tape,
    Tensor,
    add,
    add_bias,
    as_tensor,
    backward,
    concat,
    conv2d,
    ctc_loss,
    ctc_loss_logits,
    matmul,
    mul,
    passthrough,
    power_normalize,
    relu,
    reshape,
    same_padding,
    scale,
    sigmoid,
    softmax,
    sub,
    take,
    tanh,
    total,
    transpose,
)
from .layers import bidirectional_gru, dense, gru_cell, gru_sequence
from .params import (
    PARTITIONS,
    ParameterSet,
    glorot_uniform,
    load_checkpoint,
    save_checkpoint,
    sgd_step,
)
