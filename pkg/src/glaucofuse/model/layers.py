"""Minimal NCHW layer kernels with explicit backward passes."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import gaussian_filter1d


def im2col3x3(x):
    """Zero-padded 3x3 patches of ``x`` (N, C, H, W) as an (N*H*W, C*9) matrix."""
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(2, 3))
    return win.transpose(0, 2, 3, 1, 4, 5).reshape(n * h * w, c * 9)


def conv3x3_forward(x, w, b):
    n, _, h, wd = x.shape
    f = w.shape[0]
    cols = im2col3x3(x)
    out = cols @ w.reshape(f, -1).T + b
    return out.reshape(n, h, wd, f).transpose(0, 3, 1, 2), cols


def conv3x3_backward(dout, cols, w, input_shape, need_dx=True):
    n, c, h, wd = input_shape
    f = w.shape[0]
    dflat = dout.transpose(0, 2, 3, 1).reshape(-1, f)
    dw = (dflat.T @ cols).reshape(w.shape)
    db = dflat.sum(axis=0)
    if not need_dx:
        return None, dw, db
    dcols = (dflat @ w.reshape(f, -1)).reshape(n, h, wd, c, 3, 3)
    dxp = np.zeros((n, c, h + 2, wd + 2))
    for i in range(3):
        for j in range(3):
            dxp[:, :, i:i + h, j:j + wd] += dcols[..., i, j].transpose(0, 3, 1, 2)
    return dxp[:, :, 1:-1, 1:-1], dw, db


def avg_pool(x, k):
    if k == 1:
        return x
    n, c, h, w = x.shape
    return x.reshape(n, c, h // k, k, w // k, k).mean(axis=(3, 5))


def avg_pool_backward(dout, k):
    if k == 1:
        return dout
    return np.repeat(np.repeat(dout, k, axis=2), k, axis=3) / (k * k)


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def blur_pool_matrix(n, sigma, k):
    """``(n // k, n)`` matrix equal to a reflect-mode Gaussian blur followed by
    ``k``-fold average pooling along one axis."""
    m = gaussian_filter1d(np.eye(n), sigma, axis=0, mode="reflect")
    return m.reshape(n // k, k, n).mean(axis=1)


def blur_pool(planes, sigma, k):
    """Gaussian blur then ``k`` x ``k`` average pool of each ``(H, W)`` plane."""
    planes = np.asarray(planes, dtype=np.float64)
    h, w = planes.shape[-2:]
    rows = blur_pool_matrix(h, sigma, k)
    cols = rows if w == h else blur_pool_matrix(w, sigma, k)
    return rows @ planes @ cols.T
