"""Pure numpy implementations of the hot kernels.

Selected automatically when the compiled ``_ckernels`` extension is not
available (or when ``EDSLAB_PURE_PYTHON=1``).  Signatures and results
must match ``_ckernels.pyx`` exactly.
"""
import numpy as np


def eval_batch(coeffs, combos, vecs):
    """Evaluate a stack of degree-k forms on a batch of k-tuples.

    Parameters
    ----------
    coeffs : (F, C) float array
        Coefficients of F forms over the C increasing multi-indices.
    combos : (C, k) integer array
        The multi-indices (0-based rows of the component matrix).
    vecs : (B, m, k) float array
        B tuples of k vectors, stored as columns.

    Returns
    -------
    (F, B) array with ``out[f, b] = sum_I coeffs[f, I] * det(vecs[b][I, :])``.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    combos = np.asarray(combos, dtype=np.intp)
    vecs = np.asarray(vecs, dtype=np.float64)
    k = combos.shape[1]
    sub = vecs[:, combos, :]  # (B, C, k, k)
    if k == 1:
        minors = sub[..., 0, 0]
    elif k == 2:
        minors = sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    else:
        minors = np.linalg.det(sub)
    return coeffs @ minors.T


def point_frames(z):
    """Unit tangents n_i and rotated normals Jn_i of a closed n-gon.

    ``z`` is an (n, 2) array of vertices.  Raises ``ValueError`` when two
    consecutive vertices coincide or N_i vanishes.
    """
    z = np.asarray(z, dtype=np.float64)
    fwd = z - np.roll(z, -1, axis=0)  # z_i - z_{i+1}
    bwd = z - np.roll(z, 1, axis=0)   # z_i - z_{i-1}
    lf = np.hypot(fwd[:, 0], fwd[:, 1])
    lb = np.hypot(bwd[:, 0], bwd[:, 1])
    if np.any(lf == 0.0) or np.any(lb == 0.0):
        raise ValueError("consecutive vertices coincide")
    big_n = fwd / lf[:, None] - bwd / lb[:, None]
    norm = np.hypot(big_n[:, 0], big_n[:, 1])
    if np.any(norm == 0.0):
        raise ValueError("N_i vanishes")
    t = big_n / norm[:, None]
    jt = np.column_stack((-t[:, 1], t[:, 0]))
    return t, jt
