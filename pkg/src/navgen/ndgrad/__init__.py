from navgen.ndgrad.checkpoint import CKPT_SCHEMA, read_checkpoint, save_checkpoint, state_from_checkpoint
from navgen.ndgrad.nn import GRUCell, Embedding, Linear, Module
from navgen.ndgrad.optim import SGD, Adam, AdamState, adam_step, clip_grad_norm, make_optimizer, sgd_step
from navgen.ndgrad.tensor import (
    Tape,
    Tensor,
    add,
    as_tensor,
    backward,
    concat,
    current_tape,
    embedding_lookup,
    log_softmax,
    logsumexp,
    matmul,
    mean,
    mul,
    nll,
    parameter,
    relu,
    reshape,
    sigmoid,
    slice,
    softmax,
    stack_rows,
    sub,
    sum,
    tanh,
    transpose,
)
