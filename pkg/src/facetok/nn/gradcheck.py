"""Finite-difference gradient checking (float64, central differences)."""

import numpy as np

from .tensor import Tensor


def grad_check(fn, inputs, h=1e-5):
    """Max relative error between analytic and numeric gradients.

    fn: callable mapping a list of Tensors to a scalar-output Tensor.
    inputs: list of small arrays (kept to <= a few hundred elements).
    Relative error per element: |a - n| / max(1e-8, |a| + |n|).
    """
    arrs = [np.array(x, dtype=np.float64) for x in inputs]

    def evaluate():
        return float(fn([Tensor(a.copy()) for a in arrs]).data)

    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrs]
    loss = fn(tensors)
    loss.backward()
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in tensors]

    worst = 0.0
    for i, a in enumerate(arrs):
        num = np.zeros_like(a)
        flat = a.reshape(-1)
        nflat = num.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp = evaluate()
            flat[j] = orig - h
            fm = evaluate()
            flat[j] = orig
            nflat[j] = (fp - fm) / (2.0 * h)
        err = np.abs(analytic[i] - num) / np.maximum(1e-8, np.abs(analytic[i]) + np.abs(num))
        worst = max(worst, float(err.max()) if err.size else 0.0)
    return worst
