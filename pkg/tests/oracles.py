"""Brute-force reference computations.

Everything here works on plain nested loops or full-space matrices and
shares no code with the package, so it can check the einsum/reshape paths.
"""

import numpy as np


def ptrace_L_loops(m, d_L, d_R):
    out = np.zeros((d_R, d_R), dtype=complex)
    for a in range(d_R):
        for b in range(d_R):
            for i in range(d_L):
                out[a, b] += m[i * d_R + a, i * d_R + b]
    return out


def ptrace_R_loops(m, d_L, d_R):
    out = np.zeros((d_L, d_L), dtype=complex)
    for i in range(d_L):
        for j in range(d_L):
            for a in range(d_R):
                out[i, j] += m[i * d_R + a, j * d_R + a]
    return out


def lift(op, factor, d_L, d_R):
    """Full-space matrix of a one-factor operator, built entry by entry."""
    n = d_L * d_R
    out = np.zeros((n, n), dtype=complex)
    for i in range(d_L):
        for a in range(d_R):
            for j in range(d_L):
                for b in range(d_R):
                    if factor == "L":
                        val = op[i, j] if a == b else 0
                    else:
                        val = op[a, b] if i == j else 0
                    out[i * d_R + a, j * d_R + b] = val
    return out


def sandwich_by_projection(m, vec, factor, d_L, d_R):
    """Partial trace of ``(P (x) I) rho (P (x) I)`` over the measured factor."""
    p = lift(np.outer(vec, vec.conj()), factor, d_L, d_R)
    proj = p @ m @ p
    return ptrace_L_loops(proj, d_L, d_R) if factor == "L" else ptrace_R_loops(proj, d_L, d_R)


def contract_loops(psi, vec, factor, d_L, d_R):
    """``<vec|psi>`` over one factor, elementwise."""
    if factor == "L":
        out = np.zeros(d_R, dtype=complex)
        for a in range(d_R):
            for i in range(d_L):
                out[a] += vec[i].conjugate() * psi[i * d_R + a]
    else:
        out = np.zeros(d_L, dtype=complex)
        for i in range(d_L):
            for a in range(d_R):
                out[i] += vec[a].conjugate() * psi[i * d_R + a]
    return out


def joint_by_amplitude(psi, l_vec, r_vec):
    return abs(np.vdot(np.kron(l_vec, r_vec), psi)) ** 2


def hardy_closed_form(l2, lbar2, r2):
    """Ratio printed for the r-first counterfactual, from the squared overlaps."""
    return (l2 + lbar2 * (1 - r2) ** 2) / (l2 + lbar2 * (1 - r2))


def boost_x(v, t, x):
    g = 1.0 / np.sqrt(1 - v * v)
    return g * (t - v * x), g * (x - v * t)
