"""Pure-Python reference kernel for one hinge-loss SGD epoch.

Kept semantically identical to the compiled kernel in ``_hinge_cy.pyx``:
same update rule, same step-size schedule, same visit order. The only
permitted divergence is floating-point rounding inside the dot product
(BLAS here, a plain C loop there).
"""

import numpy as np


def hinge_epoch(w, b, step, X, y_pm, order, eta0, lam):
    """Run one epoch of per-example hinge SGD over ``X`` in ``order``.

    ``w`` is updated in place. ``step`` is the cumulative per-example update
    counter driving the learning-rate decay eta = eta0 / (1 + eta0*lam*step);
    it advances once per visited example. The L2 shrink applies on every
    visit, the margin update only when y*(w.x+b) < 1.

    Returns ``(b, step, loss_sum)`` where ``loss_sum`` accumulates the hinge
    loss of each example measured just before its update.
    """
    loss_sum = 0.0
    for i in order:
        xi = X[i]
        yi = y_pm[i]
        eta = eta0 / (1.0 + eta0 * lam * step)
        margin = yi * (float(np.dot(w, xi)) + b)
        if margin < 1.0:
            loss_sum += 1.0 - margin
            w *= 1.0 - eta * lam
            w += (eta * yi) * xi
            b += eta * yi
        else:
            w *= 1.0 - eta * lam
        step += 1
    return b, step, loss_sum
