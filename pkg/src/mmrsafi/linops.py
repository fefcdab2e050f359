"""Constrained convolutional filter banks and linear-operator utilities.

Banks are stacks of periodic (circular) 2-D correlation stages.  Periodic
boundaries keep adjoints exact, make zero-mean kernels annihilate constants,
and give positive-normalized kernels exact row and column sums of one.
Stages are applied through cached FFT multipliers; a direct dense
materialization is available for oracle-scale checks.
"""

from dataclasses import dataclass

import numpy as np

from .core import Rng


def project_zero_mean(taps):
    """Shift kernel taps so that they sum to zero. Idempotent."""
    taps = np.asarray(taps, dtype=np.float64)
    return taps - taps.mean()


def project_positive_normalized(taps):
    """Map taps to |taps| / sum(|taps|): nonnegative, summing to one."""
    taps = np.asarray(taps, dtype=np.float64)
    mag = np.abs(taps)
    total = mag.sum()
    if total == 0.0:
        raise ValueError("degenerate kernel: all taps are zero")
    return mag / total


_CONSTRAINTS = {
    None: lambda k: np.asarray(k, dtype=np.float64),
    "zero-mean": project_zero_mean,
    "positive-normalized": project_positive_normalized,
}


@dataclass(frozen=True)
class ConvStage:
    """One periodic correlation stage.

    kernels has shape (c_out, c_in_per_group, ks, ks) with odd ks; the stage
    maps c_in = c_in_per_group * groups input channels to c_out outputs.
    """
    kernels: np.ndarray
    groups: int = 1

    def __post_init__(self):
        k = self.kernels
        if k.ndim != 4 or k.shape[2] != k.shape[3] or k.shape[2] % 2 == 0:
            raise ValueError("kernels must be (c_out, c_in_pg, ks, ks), odd ks")
        if self.groups < 1 or k.shape[0] % self.groups != 0:
            raise ValueError("c_out must be divisible by groups")

    @property
    def c_out(self):
        return self.kernels.shape[0]

    @property
    def c_in(self):
        return self.kernels.shape[1] * self.groups


class FilterBank:
    """Composition of ConvStages with an optional per-kernel constraint.

    Immutable after construction; forward/adjoint are pure.  Accepts 2-D
    input (single-channel image) or a 3-D channel stack.
    """

    def __init__(self, stages, constraint=None):
        if constraint not in _CONSTRAINTS:
            raise ValueError(f"unknown constraint {constraint!r}")
        proj = _CONSTRAINTS[constraint]
        fixed = []
        for st in stages:
            kern = np.empty_like(np.asarray(st.kernels, dtype=np.float64))
            for o in range(st.kernels.shape[0]):
                for i in range(st.kernels.shape[1]):
                    kern[o, i] = proj(st.kernels[o, i])
            fixed.append(ConvStage(kern, st.groups))
        for prev, nxt in zip(fixed, fixed[1:]):
            if nxt.c_in != prev.c_out:
                raise ValueError("stage channel counts do not compose")
        self.stages = tuple(fixed)
        self.constraint = constraint
        self._spectra = {}

    @property
    def in_channels(self):
        return self.stages[0].c_in

    @property
    def out_channels(self):
        return self.stages[-1].c_out

    def _stage_spectra(self, shape):
        key = shape
        if key not in self._spectra:
            specs = []
            for st in self.stages:
                specs.append(_kernel_spectrum(st.kernels, shape))
            self._spectra[key] = specs
        return self._spectra[key]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 2
        if squeeze:
            x = x[None]
        if x.shape[0] != self.in_channels:
            raise ValueError(
                f"expected {self.in_channels} input channels, got {x.shape[0]}")
        shape = x.shape[1:]
        out = x
        for st, spec in zip(self.stages, self._stage_spectra(shape)):
            out = _apply_stage(out, spec, st.groups, adjoint=False)
        return out

    def adjoint(self, s):
        s = np.asarray(s, dtype=np.float64)
        if s.ndim == 2:
            s = s[None]
        if s.shape[0] != self.out_channels:
            raise ValueError(
                f"expected {self.out_channels} channels, got {s.shape[0]}")
        shape = s.shape[1:]
        out = s
        for st, spec in zip(reversed(self.stages),
                            reversed(self._stage_spectra(shape))):
            out = _apply_stage(out, spec, st.groups, adjoint=True)
        if self.in_channels == 1:
            out = out[0]
        return out


def _kernel_spectrum(kernels, shape):
    """rFFT multipliers of center-anchored kernels embedded periodically."""
    h, w = shape
    c_out, c_in_pg, ks, _ = kernels.shape
    r = ks // 2
    pad = np.zeros((c_out, c_in_pg, h, w))
    rows = np.arange(-r, r + 1) % h
    cols = np.arange(-r, r + 1) % w
    for a in range(ks):
        for b in range(ks):
            # += so kernels wider than the image wrap correctly
            pad[:, :, rows[a], cols[b]] += kernels[:, :, a, b]
    return np.fft.rfft2(pad)


def _apply_stage(x, spec, groups, adjoint):
    # Forward is periodic cross-correlation, hence the conjugate multiplier;
    # the adjoint uses the plain spectrum.
    shape = x.shape[1:]
    xf = np.fft.rfft2(x)
    c_out, c_in_pg = spec.shape[:2]
    sf = spec.reshape(groups, c_out // groups, c_in_pg, *spec.shape[2:])
    if adjoint:
        xf = xf.reshape(groups, c_out // groups, *xf.shape[1:])
        yf = np.einsum("goihw,gohw->gihw", sf, xf)
        yf = yf.reshape(groups * c_in_pg, *yf.shape[2:])
    else:
        xf = xf.reshape(groups, c_in_pg, *xf.shape[1:])
        yf = np.einsum("goihw,gihw->gohw", np.conj(sf), xf)
        yf = yf.reshape(c_out, *yf.shape[2:])
    return np.fft.irfft2(yf, s=shape)


class MatrixOp:
    """Dense matrix as a forward operator on flattened images (test scale)."""

    def __init__(self, matrix, in_shape, sigma_min=None):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.in_shape = tuple(in_shape)
        if self.matrix.shape[1] != int(np.prod(in_shape)):
            raise ValueError("matrix columns do not match input size")
        self.norm = None          # estimated by the solver
        self.sigma_min = sigma_min
        self.kind = "dense"

    def forward(self, x):
        return self.matrix @ np.asarray(x, dtype=np.float64).ravel()

    def adjoint(self, y):
        return (self.matrix.T @ np.asarray(y, dtype=np.float64).ravel()).reshape(
            self.in_shape)


def operator_norm(forward, adjoint, in_shape, iters=100, rng=None):
    """Largest singular value estimate by power iteration on A^T A."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = rng if rng is not None else Rng(0)
    v = rng.gaussian_array(in_shape)
    n = np.linalg.norm(v)
    if n == 0.0:
        return 0.0
    v = v / n
    lam = 0.0
    for _ in range(iters):
        w = adjoint(forward(v))
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(np.sqrt(lam))


def dense_matrix_of(apply_fn, in_shape, max_dim=4096):
    """Materialize a linear map column by column (oracle support)."""
    n = int(np.prod(in_shape))
    if n > max_dim:
        raise ValueError(f"input dimension {n} exceeds oracle cap {max_dim}")
    cols = []
    basis = np.zeros(in_shape)
    flat = basis.reshape(-1)
    for j in range(n):
        flat[j] = 1.0
        cols.append(np.asarray(apply_fn(basis), dtype=np.float64).ravel().copy())
        flat[j] = 0.0
    return np.stack(cols, axis=1)


def difference_bank():
    """Two-channel periodic forward differences (horizontal, vertical)."""
    kern = np.zeros((2, 1, 3, 3))
    kern[0, 0, 1, 1] = -1.0
    kern[0, 0, 1, 2] = 1.0
    kern[1, 0, 1, 1] = -1.0
    kern[1, 0, 2, 1] = 1.0
    return FilterBank([ConvStage(kern, groups=1)], constraint="zero-mean")


def box_bank(channels, size=3):
    """Channel-wise normalized box smoothing, one stage."""
    kern = np.ones((channels, 1, size, size))
    return FilterBank([ConvStage(kern, groups=channels)],
                      constraint="positive-normalized")
