"""Pure NumPy inner loops for ridge-loss SGD and SVRG.

Each function takes the sampled row positions ``idx`` and returns a new
iterate; the input ``w`` is not modified. The arithmetic follows
``RidgeLoss.grad`` term by term, so a loop written against
:func:`danebench.objective.grad_sample` reproduces these iterates exactly.
"""

import numpy as np


def sgd_steps(X, y, idx, alphas, w, reg):
    w = np.array(w, dtype=np.float64)
    two_reg = 2.0 * reg
    for s in range(idx.shape[0]):
        j = idx[s]
        x = X[j]
        g = 2.0 * (x @ w - y[j]) * x + two_reg * w
        w = w - alphas[s] * g
    return w


def dane_sgd_steps(X, y, idx, alphas, w, reg, shift, mu, anchor):
    w = np.array(w, dtype=np.float64)
    two_reg = 2.0 * reg
    for s in range(idx.shape[0]):
        j = idx[s]
        x = X[j]
        g = 2.0 * (x @ w - y[j]) * x + two_reg * w
        g = g - shift + mu * (w - anchor)
        w = w - alphas[s] * g
    return w


def svrg_steps(X, y, idx, alpha, w, anchor, reg, eta_g, mu, average):
    """With ``average`` true, return the mean of the iterates after each step."""
    w = np.array(w, dtype=np.float64)
    two_reg = 2.0 * reg
    acc = np.zeros_like(w)
    for s in range(idx.shape[0]):
        j = idx[s]
        x = X[j]
        g_cur = 2.0 * (x @ w - y[j]) * x + two_reg * w
        g_snap = 2.0 * (x @ anchor - y[j]) * x + two_reg * anchor
        g = g_cur - g_snap + eta_g + mu * (w - anchor)
        w = w - alpha * g
        if average:
            acc = acc + w
    if average:
        return acc / idx.shape[0]
    return w
