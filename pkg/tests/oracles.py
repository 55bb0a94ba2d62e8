"""Independent oracles shared by the tests.

Everything here is deliberately written from first principles (closed forms,
direct complex arithmetic, finite differences) so it cannot share a bug with
the implementation paths it checks.
"""

import numpy as np


def two_bus_pq_solutions(y11, y21, v1, p2, q2):
    """All voltages V2 with V2*conj(y21*V1 + y22*V2) = P2 + jQ2, closed form.

    The network seen from bus 2: S2 = a*u + b*|u|^2 with a = conj(y21*V1),
    b = conj(y22).  Substituting u = (S2 - b*w)/a with w = |u|^2 gives a real
    quadratic in w; each nonnegative real root yields one solution.
    """
    s2 = complex(p2, q2)
    a = np.conj(y21 * v1)
    b = np.conj(y11)
    # |s2 - b w|^2 = |a|^2 w  ->  |b|^2 w^2 - (2 Re(conj(s2) b) + |a|^2) w + |s2|^2 = 0
    aa = abs(b) ** 2
    bb = -(2.0 * (np.conj(s2) * b).real + abs(a) ** 2)
    cc = abs(s2) ** 2
    sols = []
    if aa == 0.0:
        roots = [-cc / bb] if bb != 0.0 else []
    else:
        disc = bb * bb - 4.0 * aa * cc
        if disc < 0.0:
            return []
        roots = [(-bb + s * np.sqrt(disc)) / (2.0 * aa) for s in (+1.0, -1.0)]
    for w in roots:
        if w < 0.0:
            continue
        u = (s2 - b * w) / a
        sols.append(u)
    # deduplicate the double-root case
    out = []
    for u in sols:
        if not any(abs(u - v) < 1e-9 for v in out):
            out.append(u)
    return out


def two_bus_pv_solutions(y11, y21, v1, p2, vset):
    """All V2 with Re{V2 conj(y21 V1 + y22 V2)} = P2 and |V2| = vset."""
    a = np.conj(y21 * v1)
    b = np.conj(y11)
    w = vset * vset
    # P2 = Re(a u) + Re(b) w with u = vset e^{j d}:
    # |a| vset cos(d + arg a) = P2 - Re(b) w
    rhs = p2 - b.real * w
    amp = abs(a) * vset
    if amp == 0.0:
        return []
    c = rhs / amp
    if abs(c) > 1.0:
        return []
    base = np.arccos(np.clip(c, -1.0, 1.0))
    sols = []
    for d in (base - np.angle(a), -base - np.angle(a)):
        u = vset * np.exp(1j * d)
        if not any(abs(u - v) < 1e-9 for v in sols):
            sols.append(u)
    return sols


def central_diff_gradient(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g


def dense_h_matrix(y, k):
    """H_k from the definition, built with explicit dense products."""
    n = y.shape[0]
    e = np.zeros((n, 1))
    e[k, 0] = 1.0
    return (y.conj().T @ e @ e.T + e @ e.T @ y) / 2.0


def dense_htilde_matrix(y, k):
    n = y.shape[0]
    e = np.zeros((n, 1))
    e[k, 0] = 1.0
    return (y.conj().T @ e @ e.T - e @ e.T @ y) / (2.0j)
