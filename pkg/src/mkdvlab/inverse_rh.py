"""Numerical inverse scattering at fixed (x, t) via the Beals-Coifman equation.

Jump on the real line, with theta = 4 t z^3 + x z and rho = r e^{2 i theta}::

    v_{x,t} = [[1 - |r|^2, -conj(rho)], [rho, 1]] = b_-^{-1} b_+,
    b_+ = [[1, 0], [rho, 1]],   b_- = [[1, conj(rho)], [0, 1]],
    w_+ = b_+ - I,              w_- = I - b_-.

mu = I + C_+(mu w_-) + C_-(mu w_+) is discretised on a uniform grid with the
sinc (band-limited) discrete Hilbert transform, C_+- f = +-f/2 + (i/2) H f,
and y = [sigma_3, int mu w dz / 2 pi i]_21 by the trapezoidal rule.  Both
rules are spectrally accurate for smooth, decaying densities.

Only the second row of mu is solved for.  The first row follows from the
symmetry mu_11 = conj(mu_22), mu_12 = conj(mu_21), which the discrete
operators respect exactly because conj(C_+- f) = -C_-+(conj f).
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import InputError, NumericalError, UnderResolvedError
from .scattering import ReflectionCoefficient

logger = logging.getLogger(__name__)

SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])

__all__ = [
    "RHConfig", "JumpData", "MuSolution", "RHRecord", "CauchyOperator",
    "design_grid", "build_oscillatory_jump", "solve_mu", "neumann_mu",
    "reconstruct_y", "solve_y", "write_records",
]


@dataclass(frozen=True)
class RHConfig:
    tol: float = 1e-10
    dense_limit: int = 4000
    restart: int = 200
    maxiter: int = 400
    # points per wavelength of e^{2 i theta}
    ppw: float = 8.0
    # |r| below tail_tol * sup|r| is treated as zero when truncating the line
    tail_tol: float = 1e-10
    max_nodes: int = 2_000_000
    # cap on restart * unknowns for the Krylov basis (complex entries)
    krylov_memory: int = 40_000_000
    imag_tol: float = 1e-8

    def __post_init__(self):
        if not (self.tol > 0 and self.ppw > 0 and self.tail_tol >= 0 and self.max_nodes > 0):
            raise InputError("invalid RH solver configuration")


# --- Cauchy operators on a uniform grid --------------------------------------

class CauchyOperator:
    """C_+ and C_- for densities sampled on a uniform grid of n nodes."""

    def __init__(self, n: int, spacing: float):
        self.n = n
        self.spacing = spacing
        m = np.arange(-(n - 1), n)
        ker = np.zeros(2 * n - 1)
        odd = m % 2 != 0
        ker[odd] = 2.0 / (np.pi * m[odd])
        self._kernel = ker
        self._size = sfft.next_fast_len(3 * n - 2)
        self._kernel_hat = sfft.fft(ker, self._size)

    def hilbert(self, f: np.ndarray) -> np.ndarray:
        """(H f)_j = sum_{j-k odd} f_k 2 / (pi (j - k))."""
        fh = sfft.fft(f, self._size)
        full = sfft.ifft(fh * self._kernel_hat)
        out = full[self.n - 1:2 * self.n - 1]
        return out.real if np.isrealobj(f) else out

    def plus(self, f: np.ndarray) -> np.ndarray:
        return 0.5 * f + 0.5j * self.hilbert(f)

    def minus(self, f: np.ndarray) -> np.ndarray:
        return -0.5 * f + 0.5j * self.hilbert(f)

    def matrix(self) -> np.ndarray:
        """Dense Hilbert matrix (small grids only)."""
        i = np.arange(self.n)
        return self._kernel[(i[:, None] - i[None, :]) + self.n - 1]


# --- jump data -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JumpData:
    zgrid: np.ndarray
    r: np.ndarray
    x: float
    t: float

    @property
    def n(self) -> int:
        return self.zgrid.size

    @property
    def spacing(self) -> float:
        return float(self.zgrid[1] - self.zgrid[0])

    @cached_property
    def theta(self) -> np.ndarray:
        z = self.zgrid
        return 4.0 * self.t * z**3 + self.x * z

    @cached_property
    def rho(self) -> np.ndarray:
        return self.r * np.exp(2j * self.theta)

    def _mat(self, a, b, c, d) -> np.ndarray:
        out = np.empty((self.n, 2, 2), dtype=complex)
        out[:, 0, 0], out[:, 0, 1], out[:, 1, 0], out[:, 1, 1] = a, b, c, d
        return out

    @property
    def v(self) -> np.ndarray:
        rho = self.rho
        return self._mat(1.0 - np.abs(self.r) ** 2, -np.conj(rho), rho, 1.0)

    @property
    def b_plus(self) -> np.ndarray:
        return self._mat(1.0, 0.0, self.rho, 1.0)

    @property
    def b_minus(self) -> np.ndarray:
        return self._mat(1.0, np.conj(self.rho), 0.0, 1.0)

    @property
    def w_plus(self) -> np.ndarray:
        return self._mat(0.0, 0.0, self.rho, 0.0)

    @property
    def w_minus(self) -> np.ndarray:
        return self._mat(0.0, -np.conj(self.rho), 0.0, 0.0)

    def check(self) -> dict:
        """Residuals of the algebraic invariants (all should be ~1e-16)."""
        v = self.v
        det = v[:, 0, 0] * v[:, 1, 1] - v[:, 0, 1] * v[:, 1, 0]
        fact = np.linalg.inv(self.b_minus) @ self.b_plus
        wp, wm = self.w_plus, self.w_minus
        return {
            "det": float(np.max(np.abs(det - 1.0))),
            "factorization": float(np.max(np.abs(fact - v))),
            "w_plus_shape": float(np.max(np.abs(wp[:, 0, :])) + np.max(np.abs(wp[:, 1, 1]))),
            "w_minus_shape": float(np.max(np.abs(wm[:, 1, :])) + np.max(np.abs(wm[:, 0, 0]))),
        }


def _uniform_symmetric(zgrid: np.ndarray) -> None:
    if zgrid.ndim != 1 or zgrid.size < 3:
        raise InputError("RH grid must be 1-d with at least 3 nodes")
    d = np.diff(zgrid)
    if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * d[0]:
        raise InputError("RH grid must be uniform and increasing")
    if abs(zgrid[0] + zgrid[-1]) > 1e-9 * max(1.0, abs(zgrid[-1])):
        raise InputError("RH grid must be symmetric about 0")


def build_oscillatory_jump(rc: ReflectionCoefficient, x: float, t: float, zgrid) -> JumpData:
    if t < 0:
        raise InputError("t must be >= 0")
    zgrid = np.asarray(zgrid, dtype=float)
    _uniform_symmetric(zgrid)
    r = np.asarray(rc(zgrid), dtype=complex)
    if np.any(np.abs(r) >= 1.0):
        raise InputError("|r| >= 1 on the RH grid: the factorisation degenerates")
    return JumpData(zgrid, r, float(x), float(t))


def required_spacing(x: float, t: float, z_cut: float, ppw: float = 8.0) -> float:
    """Largest spacing resolving e^{2 i theta} on [-z_cut, z_cut] and the +-z0 crosses."""
    slope = max(abs(12.0 * t * z_cut**2 + x), abs(x))
    h = math.pi / (ppw * slope) if slope > 0 else math.inf
    if x < 0 and t > 0:
        z0 = math.sqrt(-x / (12.0 * t))
        h = min(h, (48.0 * t * z0) ** -0.5 / ppw)
    return h


def truncation_radius(rc: ReflectionCoefficient, tail_tol: float) -> float:
    """Smallest Z with |r| <= tail_tol * sup|r| for |z| >= Z on the native grid."""
    a = np.abs(rc.values)
    sup = float(a.max())
    if sup == 0:
        return rc.spacing
    big = np.nonzero(a > tail_tol * sup)[0]
    zi = max(abs(rc.zgrid[big[0]]), abs(rc.zgrid[big[-1]]))
    return float(min(rc.z_max, zi + 2 * rc.spacing))


def design_grid(rc: ReflectionCoefficient, x: float, t: float,
                cfg: RHConfig | None = None) -> np.ndarray:
    """Uniform symmetric grid fine enough for r, the oscillation and the crosses."""
    cfg = cfg or RHConfig()
    z_cut = truncation_radius(rc, cfg.tail_tol)
    h = min(rc.spacing, required_spacing(x, t, z_cut, cfg.ppw))
    half = int(math.ceil(z_cut / h))
    nodes = 2 * half + 1
    if nodes > cfg.max_nodes:
        raise UnderResolvedError(
            f"(x, t) = ({x:g}, {t:g}) needs {nodes} nodes, above the budget {cfg.max_nodes}",
            nodes)
    return h * np.arange(-half, half + 1)


# --- solution ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MuSolution:
    zgrid: np.ndarray
    mu: np.ndarray  # (n, 2, 2)
    residual_norm: float
    method: str = "dense"
    iterations: int = 0
    condition_estimate: float = math.nan
    seconds: float = 0.0

    @property
    def nodes(self) -> int:
        return self.zgrid.size

    def m_plus(self, jump: JumpData) -> np.ndarray:
        return self.mu @ jump.b_plus

    def m_minus(self, jump: JumpData) -> np.ndarray:
        return self.mu @ jump.b_minus

    def evaluate(self, z, jump: JumpData) -> np.ndarray:
        """m(z) = I + (1/2 pi i) int mu w / (s - z) ds for z off the grid support."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        mw = self.mu @ (jump.w_plus + jump.w_minus)
        h = jump.spacing
        s = self.zgrid
        out = np.empty((z.size, 2, 2), dtype=complex)
        for i, zi in enumerate(z):
            kern = h / (s - zi) / (2j * np.pi)
            out[i] = np.eye(2) + np.einsum("n,nij->ij", kern, mw)
        return out

    def edge_deviation(self, jump: JumpData, radius: float | None = None) -> float:
        """max |m(+-R) - I| at R far outside the grid (default 1e9 times its extent)."""
        if radius is None:
            radius = 1e9 * max(1.0, float(self.zgrid[-1]))
        m = self.evaluate([radius, -radius], jump)
        return float(np.max(np.abs(m - np.eye(2))))


def _assemble(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    mu = np.empty((u.size, 2, 2), dtype=complex)
    mu[:, 1, 0] = u
    mu[:, 1, 1] = 1.0 + v
    mu[:, 0, 0] = np.conj(mu[:, 1, 1])
    mu[:, 0, 1] = np.conj(u)
    return mu


def full_residual(mu: np.ndarray, jump: JumpData, cop: CauchyOperator | None = None) -> float:
    """max |mu - I - C_+(mu w_-) - C_-(mu w_+)| over nodes and entries."""
    cop = cop or CauchyOperator(jump.n, jump.spacing)
    mwm = mu @ jump.w_minus
    mwp = mu @ jump.w_plus
    res = mu - np.eye(2)
    for i in range(2):
        for j in range(2):
            res[:, i, j] -= cop.plus(mwm[:, i, j]) + cop.minus(mwp[:, i, j])
    return float(np.max(np.abs(res)))


def _check_resolution(jump: JumpData, cfg: RHConfig) -> None:
    a = np.abs(jump.r)
    if not np.any(a > 0):
        return
    z_cut = float(np.max(np.abs(jump.zgrid[a > cfg.tail_tol * a.max()])))
    h_req = required_spacing(jump.x, jump.t, z_cut, cfg.ppw)
    if jump.spacing > h_req * (1 + 1e-9):
        nodes = 2 * int(math.ceil(abs(jump.zgrid[-1]) / h_req)) + 1
        raise UnderResolvedError(
            f"spacing {jump.spacing:.3g} exceeds {h_req:.3g}; {nodes} nodes required", nodes)


def solve_mu(jump: JumpData, cfg: RHConfig | None = None) -> MuSolution:
    cfg = cfg or RHConfig()
    _check_resolution(jump, cfg)
    n = jump.n
    start = time.perf_counter()
    rho = jump.rho
    if not np.any(rho):
        mu = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
        return MuSolution(jump.zgrid, mu, 0.0, "trivial", 0, 1.0)
    cop = CauchyOperator(n, jump.spacing)
    crho = np.conj(rho)

    def apply(vec):
        u, v = vec[:n], vec[n:]
        return np.concatenate([u - cop.minus(v * rho), v + cop.plus(u * crho)])

    rhs = np.concatenate([cop.minus(rho), np.zeros(n, dtype=complex)])
    iterations = 0
    cond = math.nan
    # unknowns are the four entries of mu at every node
    if 4 * n < cfg.dense_limit:
        hm = cop.matrix()
        cminus = -0.5 * np.eye(n) + 0.5j * hm
        cplus = 0.5 * np.eye(n) + 0.5j * hm
        a = np.block([[np.eye(n), -cminus * rho[None, :]], [cplus * crho[None, :], np.eye(n)]])
        try:
            sol = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular Beals-Coifman matrix: {exc}") from exc
        cond = _condition_estimate(apply, sol, rhs, 2 * n)
        method = "dense"
    else:
        op = LinearOperator((2 * n, 2 * n), matvec=apply, dtype=complex)
        count = [0]

        def cb(_):
            count[0] += 1

        restart = int(max(20, min(cfg.restart, cfg.krylov_memory // (2 * n))))
        sol, info = gmres(op, rhs, rtol=0.01 * cfg.tol, atol=0.0, restart=restart,
                          maxiter=cfg.maxiter, callback=cb, callback_type="pr_norm")
        iterations = count[0]
        method = "gmres"
        if info != 0:
            cond = _condition_estimate(apply, sol, rhs, 2 * n)
            raise NumericalError(
                f"GMRES did not converge at (x, t) = ({jump.x:g}, {jump.t:g}) after "
                f"{iterations} iterations; condition estimate {cond:.3g}")
    mu = _assemble(sol[:n], sol[n:])
    res = full_residual(mu, jump, cop)
    if res > cfg.tol:
        cond = cond if math.isfinite(cond) else _condition_estimate(apply, sol, rhs, 2 * n)
        raise NumericalError(f"Beals-Coifman residual {res:.3g} above {cfg.tol:g}; "
                             f"condition estimate {cond:.3g}")
    return MuSolution(jump.zgrid, mu, res, method, iterations, cond, time.perf_counter() - start)


def _condition_estimate(apply, sol, rhs, size, its: int = 20) -> float:
    """||A|| by power iteration times the lower bound ||x|| / ||b|| for ||A^{-1}||."""
    rng = np.random.default_rng(0)
    q = rng.standard_normal(size) + 0j
    q /= np.linalg.norm(q)
    norm = 1.0
    for _ in range(its):
        p = apply(q)
        norm = np.linalg.norm(p)
        if norm == 0:
            break
        q = p / norm
    inv = np.linalg.norm(sol) / max(np.linalg.norm(rhs), 1e-300)
    return float(norm * inv)


def neumann_mu(jump: JumpData) -> MuSolution:
    """One-term Neumann approximation I + C_+(w_-) + C_-(w_+)."""
    cop = CauchyOperator(jump.n, jump.spacing)
    wm, wp = jump.w_minus, jump.w_plus
    mu = np.broadcast_to(np.eye(2, dtype=complex), (jump.n, 2, 2)).copy()
    for i in range(2):
        for j in range(2):
            mu[:, i, j] += cop.plus(wm[:, i, j]) + cop.minus(wp[:, i, j])
    return MuSolution(jump.zgrid, mu, math.nan, "neumann")


def reconstruction_integral(mu: MuSolution, jump: JumpData) -> np.ndarray:
    """Trapezoidal int mu (w_+ + w_-) dz / (2 pi i), a 2x2 matrix."""
    if mu.zgrid.shape != jump.zgrid.shape:
        raise InputError("mu and jump grids differ")
    mw = mu.mu @ (jump.w_plus + jump.w_minus)
    return jump.spacing * mw.sum(axis=0) / (2j * np.pi)


def y_from_integral(m: np.ndarray) -> complex:
    """([sigma_3, m])_21; the diagonal of m drops out of the commutator."""
    return complex((SIGMA3 @ m - m @ SIGMA3)[1, 0])


def reconstruct_y(mu: MuSolution, jump: JumpData, imag_tol: float = 1e-8,
                  return_imag: bool = False):
    """y = ([sigma_3, int mu w dz / 2 pi i])_21; the imaginary part must vanish."""
    y = y_from_integral(reconstruction_integral(mu, jump))
    if abs(y.imag) > imag_tol * (1.0 + abs(y.real)):
        raise NumericalError(f"reconstructed y has imaginary residue {abs(y.imag):.3g}")
    if return_imag:
        return float(y.real), float(abs(y.imag))
    return float(y.real)


@dataclass(frozen=True)
class RHRecord:
    x: float
    t: float
    y_rh: float
    residual_norm: float
    imag_residue: float
    nodes_used: int

    def row(self):
        return [self.x, self.t, self.y_rh, self.residual_norm, self.imag_residue, self.nodes_used]


RECORD_HEADER = ["x", "t", "y_rh", "residual_norm", "imag_residue", "nodes_used"]


def solve_y(rc: ReflectionCoefficient, x: float, t: float,
            cfg: RHConfig | None = None) -> RHRecord:
    """Design a grid, solve for mu and reconstruct y(x, t)."""
    cfg = cfg or RHConfig()
    grid = design_grid(rc, x, t, cfg)
    jump = build_oscillatory_jump(rc, x, t, grid)
    mu = solve_mu(jump, cfg)
    y, imag = reconstruct_y(mu, jump, cfg.imag_tol, return_imag=True)
    logger.debug("RH at (%g, %g): %d nodes, %s, %.2fs", x, t, jump.n, mu.method, mu.seconds)
    return RHRecord(float(x), float(t), y, mu.residual_norm, imag, jump.n)


def write_records(path, records) -> None:
    from .io import write_csv

    cols = list(zip(*[r.row() for r in records])) if records else [[] for _ in RECORD_HEADER]
    write_csv(path, RECORD_HEADER, [list(c) for c in cols])
