"""Adam optimizer with bias correction, plus global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Per-parameter Adam moments and hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_param(cls, param, **hyper):
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), **hyper)


def adam_step(param, grad, state):
    """One bias-corrected Adam update; returns the new parameter value.

    Increments state.t and updates the moments in place.
    """
    param = np.asarray(param)
    grad = np.asarray(grad)
    if param.shape != grad.shape:
        raise ValueError(f"parameter shape {param.shape} does not match gradient shape {grad.shape}")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient passed to adam_step")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return param - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


def clip_global_norm(grads, max_norm):
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads
    factor = max_norm / total
    return {name: g * factor for name, g in grads.items()}


@dataclass
class Adam:
    """Keeps one AdamState per named parameter and updates arrays in place."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float | None = 5.0
    states: dict = field(default_factory=dict)

    def apply(self, params, grads):
        """params: name -> ndarray (updated in place); grads: name -> ndarray."""
        if self.clip_norm is not None:
            grads = clip_global_norm(grads, self.clip_norm)
        for name, g in grads.items():
            p = params[name]
            st = self.states.get(name)
            if st is None:
                st = AdamState.for_param(p, lr=self.lr, beta1=self.beta1,
                                         beta2=self.beta2, epsilon=self.epsilon)
                self.states[name] = st
            p[...] = adam_step(p, g, st)
