"""Stress transform between reference traction components and Cauchy stress.

Four-vectors use the component order [s11, s21, s12, s22]; index 2m + k holds
the k-th face direction of force component m. Per component m the transform is
[s1m, s2m] = F [s^1m, s^2m] / J, i.e. F^e = blockdiag(F, F).
"""

import numpy as np
import numpy.typing as npt

from pkg.errors.exceptions import GeometryError

Array = npt.NDArray[np.float64]


def _check_jacobian(jac: Array) -> None:
    if np.any(~(np.asarray(jac) > 0.0)):
        raise GeometryError("stress transform requires J > 0")


def piola_stress(grad: npt.ArrayLike, jac: npt.ArrayLike, sigma_hat: npt.ArrayLike) -> Array:
    """Cauchy components from reference components; broadcasts over leading axes."""
    grad = np.asarray(grad, dtype=np.float64)
    jac = np.asarray(jac, dtype=np.float64)
    _check_jacobian(jac)
    s_hat = np.asarray(sigma_hat, dtype=np.float64)
    pairs = s_hat.reshape(s_hat.shape[:-1] + (2, 2))
    sigma = np.einsum("...ik,...mk->...mi", grad, pairs) / jac[..., None, None]
    return sigma.reshape(s_hat.shape)


def inverse_piola_stress(grad: npt.ArrayLike, jac: npt.ArrayLike, sigma: npt.ArrayLike) -> Array:
    """Reference components J F^-1 sigma; the inverse of :func:`piola_stress`."""
    grad = np.asarray(grad, dtype=np.float64)
    jac = np.asarray(jac, dtype=np.float64)
    _check_jacobian(jac)
    s = np.asarray(sigma, dtype=np.float64)
    pairs = s.reshape(s.shape[:-1] + (2, 2))
    # J F^-1 is the adjugate of F
    adj = np.empty_like(grad)
    adj[..., 0, 0] = grad[..., 1, 1]
    adj[..., 0, 1] = -grad[..., 0, 1]
    adj[..., 1, 0] = -grad[..., 1, 0]
    adj[..., 1, 1] = grad[..., 0, 0]
    s_hat = np.einsum("...ki,...mi->...mk", adj, pairs)
    return s_hat.reshape(s.shape)


def block_gradient(grad: npt.ArrayLike) -> Array:
    """F^e = blockdiag(F, F) acting on the four-vector ordering, shape (..., 4, 4)."""
    grad = np.asarray(grad, dtype=np.float64)
    out = np.zeros(grad.shape[:-2] + (4, 4))
    out[..., 0:2, 0:2] = grad
    out[..., 2:4, 2:4] = grad
    return out
