"""Haar sampling, random quantum channels, and spectra of product-channel
outputs.

The output Z = [Phi (x) Phi_bar](E_m) of a product channel on the Bell state
factors as Z = W W* with W built from the Stinespring isometry, so its nonzero
spectrum is carried by the k^2 x k^2 Gram matrix G = W* W.  All large-n paths
work through G and never materialize the n^2 x n^2 output; the dense matrix is
available below a dimension guard for oracle comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

try:
    from scipy.linalg import blas as _blas
except ImportError:  # pragma: no cover
    _blas = None

#: Largest matrix dimension materialized densely (entries = this squared).
DENSE_DIM_GUARD = 4096
#: Largest product-output dimension n^2 handled in factored form.
FACTORED_DIM_GUARD = 16_000_000
#: Gram dimension up to which full eigendecompositions are used by default.
FULL_SPECTRUM_CAP = 3000

_FLAVORS = ("conjugate", "independent")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Stream for one trial: ``default_rng([seed, index])``.

    Adding trials extends the ensemble without reshuffling earlier trials.
    """
    return np.random.default_rng([seed, index])


def _ginibre(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Standard complex Gaussian array; real/imag parts interleaved per entry
    so chunked draws concatenate identically to one big draw."""
    both = rng.standard_normal(shape + (2,))
    return both[..., 0] + 1j * both[..., 1]


def _phase_fix(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def sample_haar(dim: int, seed) -> np.ndarray:
    """One Haar-distributed unitary: complex Ginibre, QR, then the diagonal
    phase correction that makes the triangular factor positive on the
    diagonal.  Plain QR without the correction is *not* Haar."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _as_rng(seed)
    g = _ginibre(rng, (dim, dim))
    q, r = np.linalg.qr(g)
    return _phase_fix(q, r)


def sample_haar_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of `count` Haar unitaries drawn sequentially from one stream."""
    g = _ginibre(rng, (count, dim, dim))
    q, r = np.linalg.qr(g)
    return _phase_fix(q, r)


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar isometry: distributed as the first `cols` columns of a Haar
    unitary of size `rows`."""
    if cols > rows:
        raise ValueError(f"isometry needs rows >= cols, got {rows} < {cols}")
    g = _ginibre(rng, (rows, cols))
    q, r = np.linalg.qr(g, mode="reduced")
    return _phase_fix(q, r)


def haar_isometry_batch(rows: int, cols: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(rng, (count, rows, cols))
    q, r = np.linalg.qr(g, mode="reduced")
    return _phase_fix(q, r)


def _herk(w: np.ndarray) -> np.ndarray:
    """Hermitian product w* w, via the half-cost BLAS rank-k update when
    worthwhile.  Passing the transposed view of a C-contiguous array gives
    zherk a Fortran layout without copying; it then returns the upper
    triangle of conj(w* w)."""
    if _blas is None or w.shape[1] <= 512:
        return w.conj().T @ w
    w = np.ascontiguousarray(w)
    c = _blas.zherk(1.0, w.T, trans=0, lower=0)
    return np.conj(np.triu(c)) + np.triu(c, 1).T


def _herm_traces_34(g: np.ndarray) -> tuple[float, float]:
    """(tr g^3, tr g^4) for Hermitian g with a single triangular update."""
    if _blas is None or g.shape[0] <= 512:
        g2 = g @ g
        tr3 = float(np.sum(g2 * g.T).real)
        tr4 = float(np.vdot(g2, g2).real)
        return tr3, tr4
    g = np.ascontiguousarray(g)
    c2 = _blas.zherk(1.0, g.T, trans=0, lower=0)  # conj(g^2), upper triangle
    s_all = np.einsum("ij,ij->", c2.real, g.real) - np.einsum("ij,ij->", c2.imag, g.imag)
    s_diag = float((c2.diagonal().real * g.diagonal().real).sum())
    tr3 = 2.0 * float(s_all) - s_diag
    a_all = np.einsum("ij,ij->", c2.real, c2.real) + np.einsum("ij,ij->", c2.imag, c2.imag)
    a_diag = float((np.abs(c2.diagonal()) ** 2).sum())
    tr4 = 2.0 * float(a_all) - a_diag
    return tr3, tr4


@dataclass(frozen=True)
class ChannelSpec:
    """Dimensions of one random channel M_m -> M_n with ancilla k.

    The complement dimension l = nk/m must be an integer.  `flavor` selects
    the second leg of the product channel: the entrywise conjugate of the
    first, or an independent draw.
    """

    n: int
    k: int
    m: int
    flavor: str = "conjugate"

    def __post_init__(self):
        if min(self.n, self.k, self.m) < 1:
            raise ValueError("all dimensions must be >= 1")
        if (self.n * self.k) % self.m != 0:
            raise ValueError(f"m={self.m} must divide n*k={self.n * self.k}")
        if self.flavor not in _FLAVORS:
            raise ValueError(f"flavor must be one of {_FLAVORS}, got {self.flavor!r}")

    @property
    def l(self) -> int:
        return (self.n * self.k) // self.m

    @property
    def output_dim(self) -> int:
        return self.n * self.n


def conjugate_spec(n: int, k: int, m: int | None = None) -> ChannelSpec:
    return ChannelSpec(n=n, k=k, m=n if m is None else m, flavor="conjugate")


def independent_spec(n: int, k: int, m: int | None = None) -> ChannelSpec:
    return ChannelSpec(n=n, k=k, m=n if m is None else m, flavor="independent")


class DensityMatrix:
    """Dense Hermitian, unit-trace, PSD matrix."""

    def __init__(self, entries: np.ndarray, check: bool = True):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {entries.shape}")
        if check:
            scale = max(1.0, float(np.abs(entries).max()))
            herm_defect = float(np.abs(entries - entries.conj().T).max())
            if herm_defect > 1e-12 * scale:
                raise ValueError(f"not Hermitian: defect {herm_defect:.3e}")
            tr = complex(np.trace(entries))
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"trace {tr} is not 1 within 1e-10")
        self.entries = entries
        self.dim = entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues sorted descending."""
        return np.linalg.eigvalsh(self.entries)[::-1]

    def trace_powers(self, p_max: int) -> list[float]:
        out = []
        acc = self.entries
        for _ in range(p_max):
            out.append(float(np.trace(acc).real))
            acc = acc @ self.entries
        return out

    def validate_psd(self, tol: float = 1e-10) -> None:
        low = float(self.eigenvalues()[-1])
        if low < -tol:
            raise ValueError(f"negative eigenvalue {low:.3e} below -{tol:.0e}")


class FactoredDensityMatrix:
    """Product-channel output of dimension n^2 held through its rank factor
    Z = W W* with W of shape (n^2, k^2).

    ``gram`` is the smaller of W* W (ancilla side, k <= n) and W W* (output
    side, k > n, in which case it is Z itself); either way its spectrum is
    the nonzero spectrum of Z.  On the ancilla side ``bell_overlap`` is W* e
    for the maximally entangled unit vector e on the output space, enough to
    pinch by Q = I - ee*.  ``factor`` (W itself) is retained only on request.
    """

    def __init__(
        self,
        n: int,
        k: int,
        gram: np.ndarray,
        bell_overlap: np.ndarray | None,
        factor: np.ndarray | None = None,
        side: str = "ancilla",
    ):
        if side not in ("ancilla", "output"):
            raise ValueError(f"side must be 'ancilla' or 'output', got {side!r}")
        self.n = n
        self.k = k
        self.dim = n * n
        self.gram = gram
        self.bell_overlap = bell_overlap
        self.factor = factor
        self.side = side
        self._eigs: np.ndarray | None = None

    @property
    def rank_bound(self) -> int:
        return self.gram.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.gram).real)

    def eigenvalues(self, pad: bool = False) -> np.ndarray:
        """Nonzero-support spectrum (descending); `pad` appends the
        structural zeros up to the full dimension n^2."""
        if self._eigs is None:
            self._eigs = np.linalg.eigvalsh(self.gram)[::-1]
        if pad and self.dim > self._eigs.size:
            return np.concatenate([self._eigs, np.zeros(self.dim - self._eigs.size)])
        return self._eigs

    def trace_powers(self, p_max: int) -> list[float]:
        """[tr Z, tr Z^2, ..., tr Z^{p_max}] without a full eigensolve."""
        if p_max > 4:
            eigs = self.eigenvalues()
            return [float(np.sum(eigs**p)) for p in range(1, p_max + 1)]
        g = self.gram
        out = [float(np.trace(g).real)]
        if p_max >= 2:
            out.append(float(np.vdot(g, g).real))
        if p_max >= 3:
            tr3, tr4 = _herm_traces_34(g)
            out.append(tr3)
            if p_max >= 4:
                out.append(tr4)
        return out[:p_max]

    def largest_eigenvalue(self) -> float:
        if self._eigs is not None or self.gram.shape[0] <= 512:
            return float(self.eigenvalues()[0])
        v0 = self.bell_overlap
        if v0 is None or float(np.linalg.norm(v0)) < 1e-12:
            v0 = self.gram.sum(axis=1)
        return _power_lambda1(self.gram, v0)

    def entropy(self) -> float:
        return entropy_of(self.eigenvalues())

    def pinched(self) -> "FactoredDensityMatrix":
        """Compression Q Z Q by Q = I - ee* (Bell projector removed)."""
        if self.side == "output":
            z = self.gram
            e = bell_vector(self.n)
            ze = z @ e
            inner = complex(np.vdot(e, ze))
            gram = (
                z
                - np.outer(e, ze.conj())
                - np.outer(ze, e.conj())
                + inner * np.outer(e, e.conj())
            )
            return FactoredDensityMatrix(self.n, self.k, gram, None, None, side="output")
        if self.bell_overlap is None:
            raise ValueError("no Bell overlap stored; cannot pinch")
        g = self.bell_overlap
        gram = self.gram - np.outer(g, g.conj())
        factor = None
        if self.factor is not None:
            e = bell_vector(self.n)
            factor = self.factor - np.outer(e, g.conj())
        return FactoredDensityMatrix(self.n, self.k, gram, np.zeros_like(g), factor)

    def to_dense(self) -> DensityMatrix:
        if self.dim > DENSE_DIM_GUARD:
            raise ValueError(f"dense dimension {self.dim} exceeds guard {DENSE_DIM_GUARD}")
        if self.side == "output":
            return DensityMatrix(self.gram, check=False)
        if self.factor is None:
            raise ValueError("factor not kept; rebuild with keep_factor=True")
        return DensityMatrix(self.factor @ self.factor.conj().T, check=False)


def _power_lambda1(g: np.ndarray, v0: np.ndarray, max_iter: int = 120, rtol: float = 1e-12) -> float:
    """Largest eigenvalue of Hermitian PSD g by power iteration with the
    Rayleigh quotient.  The quotient increases toward lambda_1 from inside
    the spectrum, so an early stop still returns a usable spectral-edge
    estimate when the top eigenvalues cluster."""
    v = np.asarray(v0, dtype=complex)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ValueError("zero starting vector")
    v = v / norm
    rayleigh = 0.0
    for _ in range(max_iter):
        w = g @ v
        new_rayleigh = float(np.vdot(v, w).real)
        scale = float(np.linalg.norm(w))
        if scale == 0:
            return 0.0
        v = w / scale
        if abs(new_rayleigh - rayleigh) <= rtol * max(abs(new_rayleigh), 1e-300):
            return new_rayleigh
        rayleigh = new_rayleigh
    return rayleigh


def entropy_of(eigenvalues: Iterable[float]) -> float:
    """Von Neumann entropy -sum x log x (natural log) with 0 log 0 := 0."""
    vals = np.asarray(list(eigenvalues) if not isinstance(eigenvalues, np.ndarray) else eigenvalues, dtype=float)
    if vals.size and float(vals.min()) < -1e-10:
        raise ValueError(f"eigenvalue {vals.min():.3e} below -1e-10")
    vals = np.clip(vals, 0.0, None)
    pos = vals[vals > 0]
    return float(-(pos * np.log(pos)).sum())


def bell_vector(n: int) -> np.ndarray:
    """Maximally entangled unit vector (1/sqrt(n)) sum_a |aa> on C^n (x) C^n."""
    e = np.zeros(n * n, dtype=complex)
    e[np.arange(n) * n + np.arange(n)] = 1.0 / math.sqrt(n)
    return e


def bell_state(m: int) -> DensityMatrix:
    """Rank-one projector onto the maximally entangled vector, dimension m^2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m * m > DENSE_DIM_GUARD:
        raise ValueError(f"dense Bell state of dimension {m * m} exceeds guard")
    e = bell_vector(m)
    return DensityMatrix(np.outer(e, e.conj()), check=False)


def apply_channel(spec: ChannelSpec, unitary: np.ndarray, state) -> DensityMatrix:
    """Stinespring action X -> Tr_k[U (X (x) P_l) U*].

    P_l is the projector on the first basis vector of the l-dimensional
    complement space (any fixed choice is equivalent by unitary invariance).
    """
    x = state.entries if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
    n, k, m, l = spec.n, spec.k, spec.m, spec.l
    nk = n * k
    if unitary.shape != (nk, nk):
        raise ValueError(f"unitary must be {nk}x{nk}, got {unitary.shape}")
    if x.shape != (m, m):
        raise ValueError(f"input state must be {m}x{m}, got {x.shape}")
    embedded = np.zeros((nk, nk), dtype=complex)
    embedded.reshape(m, l, m, l)[:, 0, :, 0] = x
    rotated = unitary @ embedded @ unitary.conj().T
    out = np.einsum("akbk->ab", rotated.reshape(n, k, n, k))
    return DensityMatrix(out, check=False)


def _stinespring_isometry(spec: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    """nk x m isometry V = U (I_m (x) |0_l>); sampled directly as a Haar
    isometry, which has the same law as those columns of a Haar unitary."""
    return haar_isometry(spec.n * spec.k, spec.m, rng)


def isometry_columns_of(spec: ChannelSpec, unitary: np.ndarray) -> np.ndarray:
    """The columns of U that `_stinespring_isometry` models: U applied to
    the vectors |i> (x) |0_l>."""
    cols = np.arange(spec.m) * spec.l
    return unitary[:, cols]


def _gram_from_isometries(spec: ChannelSpec, v_a: np.ndarray, v_b: np.ndarray, keep_factor: bool):
    n, k, m = spec.n, spec.k, spec.m
    a1 = v_a.T  # a1[i, (a, k1)] = <a (x) k1 | V | i>
    d1 = v_b.T
    mix = a1.T @ d1  # [(a,k1),(b,k2)] = sum_i A[i,a,k1] D[i,b,k2]
    w = mix.reshape(n, k, n, k).transpose(0, 2, 1, 3).reshape(n * n, k * k)
    w /= math.sqrt(m)
    if k <= n:
        gram = _herk(w)
        diag = w.reshape(n, n, k * k)[np.arange(n), np.arange(n), :]
        overlap = diag.sum(axis=0).conj() / math.sqrt(n)
        return gram, overlap, (w if keep_factor else None), "ancilla"
    gram = _herk(w.conj().T)  # Z itself: the output side is the smaller one
    return gram, None, (w if keep_factor else None), "output"


def product_output(spec: ChannelSpec, seed, keep_factor: bool = False) -> FactoredDensityMatrix:
    """Output Z = [Phi (x) Phi_bar](E_m) (or [Phi (x) Psi] for the
    independent flavor) for one random draw.

    Conjugate flavor consumes one isometry draw; independent consumes two
    from the same stream.  Deterministic given the seed.
    """
    if spec.output_dim > FACTORED_DIM_GUARD:
        raise ValueError(f"output dimension {spec.output_dim} exceeds guard {FACTORED_DIM_GUARD}")
    if spec.output_dim * spec.k * spec.k > 2 * FACTORED_DIM_GUARD:
        raise ValueError(
            f"rank factor would hold {spec.output_dim * spec.k * spec.k} entries, "
            f"beyond the memory guard"
        )
    rng = _as_rng(seed)
    v_a = _stinespring_isometry(spec, rng)
    if spec.flavor == "conjugate":
        v_b = v_a.conj()
    else:
        v_b = _stinespring_isometry(spec, rng)
    gram, overlap, factor, side = _gram_from_isometries(spec, v_a, v_b, keep_factor)
    return FactoredDensityMatrix(spec.n, spec.k, gram, overlap, factor, side)


@dataclass(frozen=True)
class SpectralReport:
    """Spectrum summary: the largest eigenvalue, the rescaled bulk, entropy
    (natural log), and the first four empirical moments of the rescaled bulk.

    The bulk excludes `drop_largest` top eigenvalues and runs over the
    nonzero support of the representation.
    """

    eigenvalues: np.ndarray
    largest: float
    bulk: np.ndarray
    rescaled_bulk: np.ndarray
    entropy: float
    moments: tuple[float, float, float, float]
    scale: float
    drop_largest: int

    @property
    def bulk_mean(self) -> float:
        return self.moments[0]

    @property
    def bulk_std(self) -> float:
        return float(math.sqrt(max(self.moments[1] - self.moments[0] ** 2, 0.0)))


def spectral_report(z, scale: float = 1.0, drop_largest: int = 0, check_trace: bool = True) -> SpectralReport:
    """Eigendecompose, sort, and summarize a density matrix (dense array,
    DensityMatrix, or FactoredDensityMatrix)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if not 0 <= drop_largest <= 2:
        raise ValueError("drop_largest must be in {0, 1, 2}")
    if isinstance(z, FactoredDensityMatrix):
        eigs = z.eigenvalues()
    elif isinstance(z, DensityMatrix):
        eigs = z.eigenvalues()
    else:
        arr = np.asarray(z)
        defect = float(np.abs(arr - arr.conj().T).max())
        if defect > 1e-10 * max(1.0, float(np.abs(arr).max())):
            raise ValueError(f"input not Hermitian: defect {defect:.3e}")
        eigs = np.linalg.eigvalsh(arr)[::-1]
    total = float(eigs.sum())
    if check_trace and abs(total - 1.0) > 1e-10:
        raise ValueError(f"eigenvalues sum to {total}, expected 1 within 1e-10")
    bulk = eigs[drop_largest:]
    rescaled = scale * bulk
    moments = tuple(float(np.mean(rescaled**p)) for p in range(1, 5))
    return SpectralReport(
        eigenvalues=eigs,
        largest=float(eigs[0]),
        bulk=bulk,
        rescaled_bulk=rescaled,
        entropy=entropy_of(eigs),
        moments=moments,
        scale=scale,
        drop_largest=drop_largest,
    )


@dataclass
class EnsembleReport:
    """Per-trial statistics with mean/stderr aggregation.

    Deterministic given (spec, trials, seed): trial t draws from
    ``default_rng([seed, t])`` regardless of how trials are scheduled.
    """

    spec: ChannelSpec
    trials: int
    seed: int
    scale: float
    drop_largest: int
    per_trial: dict[str, np.ndarray] = field(default_factory=dict)

    def names(self) -> list[str]:
        return sorted(self.per_trial)

    def mean(self, name: str) -> float:
        return float(self.per_trial[name].mean())

    def stderr(self, name: str) -> float:
        vals = self.per_trial[name]
        if vals.size < 2:
            return float("nan")
        return float(vals.std(ddof=1) / math.sqrt(vals.size))


def _trial_statistics(spec, rng, scale, drop_largest, full_spectrum):
    z = product_output(spec, rng)
    support = z.rank_bound
    stats: dict[str, float] = {}
    if full_spectrum:
        rep = spectral_report(z, scale=scale, drop_largest=drop_largest)
        stats["lambda1"] = rep.largest
        stats["entropy"] = rep.entropy
        for p in range(1, 5):
            stats[f"bulk_m{p}"] = rep.moments[p - 1]
        stats["bulk_std"] = rep.bulk_std
    else:
        lam1 = z.largest_eigenvalue()
        traces = z.trace_powers(4)
        stats["lambda1"] = lam1
        top = [lam1] if drop_largest == 1 else []
        if drop_largest == 2:
            raise ValueError("drop_largest=2 requires the full-spectrum path")
        denom = support - drop_largest
        for p in range(1, 5):
            removed = sum(t**p for t in top)
            stats[f"bulk_m{p}"] = (traces[p - 1] - removed) * scale**p / denom
        stats["bulk_std"] = math.sqrt(max(stats["bulk_m2"] - stats["bulk_m1"] ** 2, 0.0))
    return stats


def _ensemble_defaults(spec: ChannelSpec, scale, drop_largest, full_spectrum):
    if scale is None:
        scale = float(spec.k * spec.k)
    if drop_largest is None:
        drop_largest = 1 if spec.flavor == "conjugate" else 0
    if full_spectrum is None:
        full_spectrum = min(spec.n, spec.k) ** 2 <= FULL_SPECTRUM_CAP
    return scale, drop_largest, full_spectrum


def iter_trial_statistics(
    spec: ChannelSpec,
    trials: int,
    seed: int,
    scale: float | None = None,
    drop_largest: int | None = None,
    full_spectrum: bool | None = None,
    threads: int = 1,
):
    """Yield (trial index, statistics dict) in trial order; with threads > 1
    later trials compute in the background, but the order and the values are
    identical to the serial run."""
    scale, drop_largest, full_spectrum = _ensemble_defaults(spec, scale, drop_largest, full_spectrum)

    def one(t: int) -> dict[str, float]:
        return _trial_statistics(spec, trial_rng(seed, t), scale, drop_largest, full_spectrum)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from enumerate(pool.map(one, range(trials)))
    else:
        for t in range(trials):
            yield t, one(t)


def run_ensemble(
    spec: ChannelSpec,
    trials: int,
    seed: int,
    scale: float | None = None,
    drop_largest: int | None = None,
    full_spectrum: bool | None = None,
    threads: int = 1,
) -> EnsembleReport:
    """Independent seeded trials of `product_output`, aggregated.

    Defaults: bulk rescaling k^2 (the c^2 n^2 of the limit theorems expressed
    through the actual ancilla dimension) and one dropped outlier for the
    conjugate flavor, none for the independent flavor.  Entropy is computed
    only on the full-spectrum path (small spectral carrier, or
    `full_spectrum=True`).  Trial t draws from ``default_rng([seed, t])``, so
    the result does not depend on `threads`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scale, drop_largest, full_spectrum = _ensemble_defaults(spec, scale, drop_largest, full_spectrum)

    def one(t: int) -> dict[str, float]:
        return _trial_statistics(spec, trial_rng(seed, t), scale, drop_largest, full_spectrum)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    report = EnsembleReport(spec=spec, trials=trials, seed=seed, scale=scale, drop_largest=drop_largest)
    for name in results[0]:
        report.per_trial[name] = np.array([r[name] for r in results])
    return report


@dataclass
class MomentEnsemble:
    """Trial-wise traces tr(Z^p) (and optionally tr((QZQ)^p))."""

    spec: ChannelSpec
    p_max: int
    seed: int
    traces: np.ndarray  # (trials, p_max)
    pinched_traces: np.ndarray | None = None

    def mean(self, p: int, pinched: bool = False) -> float:
        return float(self._pick(pinched)[:, p - 1].mean())

    def stderr(self, p: int, pinched: bool = False) -> float:
        col = self._pick(pinched)[:, p - 1]
        return float(col.std(ddof=1) / math.sqrt(col.size))

    def _pick(self, pinched: bool) -> np.ndarray:
        if pinched:
            if self.pinched_traces is None:
                raise ValueError("pinched traces were not computed")
            return self.pinched_traces
        return self.traces


def moment_ensemble(
    spec: ChannelSpec,
    p_max: int,
    trials: int,
    seed: int,
    pinched: bool = False,
    chunk: int = 2048,
) -> MomentEnsemble:
    """Monte Carlo estimates of E tr(Z^p) for p = 1..p_max, batched over
    trials.  One sequential stream: extending `trials` extends the ensemble.
    """
    if p_max < 1 or p_max > 4:
        raise ValueError("p_max must be in 1..4")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, k, m = spec.n, spec.k, spec.m
    nk, k2 = n * k, k * k
    budget = max(n * n * k2, nk * m, 1)
    size_cap = max(1, min(chunk, int(3.0e7 // budget)))

    rng = np.random.default_rng(seed)
    traces = np.empty((trials, p_max))
    pinched_arr = np.empty((trials, p_max)) if pinched else None
    done = 0
    while done < trials:
        size = min(size_cap, trials - done)
        v_a = haar_isometry_batch(nk, m, size, rng)
        if spec.flavor == "conjugate":
            v_b = v_a.conj()
        else:
            v_b = haar_isometry_batch(nk, m, size, rng)
        a1 = v_a.transpose(0, 2, 1).reshape(size, m, nk)
        d1 = v_b.transpose(0, 2, 1).reshape(size, m, nk)
        mix = np.einsum("tix,tiy->txy", a1, d1, optimize=True)
        w = mix.reshape(size, n, k, n, k).transpose(0, 1, 3, 2, 4).reshape(size, n * n, k2)
        w /= math.sqrt(m)
        if k <= n:
            gram = np.einsum("txa,txb->tab", w.conj(), w, optimize=True)
        else:
            gram = np.einsum("tax,tbx->tab", w, w.conj(), optimize=True)
        traces[done : done + size] = _batched_trace_powers(gram, p_max)
        if pinched:
            if k <= n:
                diag = w.reshape(size, n, n, k2)[:, np.arange(n), np.arange(n), :]
                overlap = diag.sum(axis=1).conj() / math.sqrt(n)
                gram_p = gram - overlap[:, :, None] * overlap.conj()[:, None, :]
            else:
                e = bell_vector(n)
                ze = np.einsum("tab,b->ta", gram, e)
                inner = np.einsum("a,ta->t", e.conj(), ze)
                gram_p = (
                    gram
                    - e[None, :, None] * ze.conj()[:, None, :]
                    - ze[:, :, None] * e.conj()[None, None, :]
                    + inner[:, None, None] * np.outer(e, e.conj())[None, :, :]
                )
            pinched_arr[done : done + size] = _batched_trace_powers(gram_p, p_max)
        done += size
    return MomentEnsemble(spec=spec, p_max=p_max, seed=seed, traces=traces, pinched_traces=pinched_arr)


def _batched_trace_powers(gram: np.ndarray, p_max: int) -> np.ndarray:
    size = gram.shape[0]
    out = np.empty((size, p_max))
    out[:, 0] = np.trace(gram, axis1=1, axis2=2).real
    if p_max >= 2:
        out[:, 1] = np.einsum("tab,tab->t", gram, gram.conj()).real
    if p_max >= 3:
        g2 = np.einsum("tab,tbc->tac", gram, gram, optimize=True)
        out[:, 2] = np.einsum("tab,tab->t", g2, gram.conj()).real
        if p_max >= 4:
            out[:, 3] = np.einsum("tab,tab->t", g2, g2.conj()).real
    return out
