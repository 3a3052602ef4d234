"""Independent oracles used by the tests: objective values rebuilt from the
instance payloads (not from the package's gradient code) and plain central
finite differences."""

import numpy as np


def fd_block_gradient(f_value, x, offset, dim, eps=1e-5):
    """Central finite differences of a scalar function along one block."""
    grad = np.empty(dim)
    for j in range(dim):
        plus = x.copy()
        minus = x.copy()
        plus[offset + j] += eps
        minus[offset + j] -= eps
        grad[j] = (f_value(plus) - f_value(minus)) / (2.0 * eps)
    return grad


def rate_control_value(payload, i):
    """Player i's objective of the rate-control family, from the payload."""
    C = np.array(payload["C"])
    chi = np.array(payload["chi"])
    kappa = np.array(payload["kappa"])
    xi = np.array(payload["xi"])

    def value(x, A):
        load = A @ x
        delay = kappa / (C - load + xi)
        return -chi[i] * np.log(x[i] + 1.0) + float(delay @ (A[:, i] * x[i]))

    return value


def task_allocation_value(payload, i):
    """Worker i's objective of the task-allocation family."""
    C = np.array(payload["C"])
    chi = np.array(payload["chi"])
    kappa = np.array(payload["kappa"])
    blk = payload["workers"][i]
    q = np.array(blk["q"])
    xi = np.array(blk["xi"])
    l = np.array(blk["l"])
    d = float(blk["d"])
    p = np.array(blk["p"])
    S = np.array(blk["S"])

    def value(x, A_full, A_i):
        y = x[4 * i:4 * i + 4]
        load = A_full @ x
        price = kappa - chi * np.log(load + 1.0)
        cost = float(np.sum(np.maximum(q * y * y - xi * y, l * y)))
        cost += (p @ y - d) ** 2 + y @ S @ y
        return cost - float(price @ (A_i @ y))

    return value


def quadratic_value(t, delta, i):
    def value(x):
        other = x[1 - i]
        return 0.5 * (x[i] - t[i]) ** 2 + delta * x[i] * other
    return value
