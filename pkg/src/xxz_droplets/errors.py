"""Exceptions raised by the solvers, the oracle and the verification harness."""


class NonConvergence(RuntimeError):
    """Fixed-point iteration hit max_iter with residual still above tol.

    Usually means the coupling is too large for the contraction regime or
    the tolerance is below what the iteration can reach.
    """

    def __init__(self, iterations, residual, tol):
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"no convergence after {iterations} iterations: "
            f"residual {residual:.3e} >= tol {tol:.3e}"
        )


class SectorTooLarge(RuntimeError):
    """Materializing the m-down-spin sector would exceed the configured cap."""

    def __init__(self, n_sites, m, dim, cap):
        self.n_sites = n_sites
        self.m = m
        self.dim = dim
        self.cap = cap
        super().__init__(
            f"sector (N={n_sites}, m={m}) has dimension {dim} > cap {cap}"
        )


class ComplexLeak(RuntimeError):
    """Dispersion samples picked up an imaginary part above the numerical floor.

    Signals broken reflection symmetry of the Fourier coefficients.
    """

    def __init__(self, max_imag, floor):
        self.max_imag = max_imag
        self.floor = floor
        super().__init__(
            f"max |Im E(k)| = {max_imag:.3e} exceeds floor {floor:.3e}"
        )


class DegenerateFit(RuntimeError):
    """A scaling fit cannot be performed (e.g. a bandwidth underflowed to zero)."""
