"""Batched quaternion arithmetic on (..., 4) float arrays.

Hamilton convention (i*j = k), components stored as (w, x, y, z).
Chart vectors live in the i-j plane; the chart normal is k.
"""
from __future__ import annotations

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def qmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(q):
    return np.asarray(q, dtype=float) * _CONJ


def normsq(q):
    q = np.asarray(q, dtype=float)
    return np.einsum("...i,...i->...", q, q)


def qinv(q):
    return qconj(q) / normsq(q)[..., None]


def imag(q):
    return np.asarray(q, dtype=float)[..., 1:]


def from_imag(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 1:] = v
    return out


def from_plane(xy):
    """Embed chart 2-vectors (x, y) as imaginary quaternions x*i + y*j."""
    xy = np.asarray(xy, dtype=float)
    out = np.zeros(xy.shape[:-1] + (4,))
    out[..., 1] = xy[..., 0]
    out[..., 2] = xy[..., 1]
    return out


def conj_sandwich(psi, x):
    """psi-bar * x * psi; maps chart vectors to world vectors, scaled by |psi|^2."""
    return qmul(qconj(psi), qmul(x, psi))


def axis_k_half(theta):
    """Canonical lift cos(theta/2) + k sin(theta/2) of an in-plane rotation by theta."""
    t = 0.5 * np.asarray(theta, dtype=float)
    out = np.zeros(np.shape(t) + (4,))
    out[..., 0] = np.cos(t)
    out[..., 3] = np.sin(t)
    return out


def rotation_matrix(q):
    """Matrix of x -> q x q-bar restricted to imaginary quaternions. Unit q assumed."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def from_rotation_matrix(R):
    """Unit quaternion q with (x -> q x q-bar) = R.

    Branch choice by the largest diagonal term (Shepperd); the overall sign
    of q is left to the caller.
    """
    R = np.asarray(R, dtype=float)
    t = np.trace(R)
    if t > R[0, 0] and t > R[1, 1] and t > R[2, 2]:
        r = np.sqrt(1.0 + t)
        s = 0.5 / r
        q = np.array(
            [0.5 * r, (R[2, 1] - R[1, 2]) * s, (R[0, 2] - R[2, 0]) * s, (R[1, 0] - R[0, 1]) * s]
        )
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        r = np.sqrt(1.0 + R[i, i] - R[j, j] - R[k, k])
        s = 0.5 / r
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) * s
        q[1 + i] = 0.5 * r
        q[1 + j] = (R[j, i] + R[i, j]) * s
        q[1 + k] = (R[k, i] + R[i, k]) * s
    return q / np.sqrt(normsq(q))
