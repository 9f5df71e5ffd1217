"""Boundary-adapted spectral solver for 1D peridynamic diffusion.

The nonlocal Laplacian is evaluated as a circular convolution with FFTs on
a periodic domain padded by one horizon at each end. Local Dirichlet or
Neumann conditions are imposed by penalizing the pads toward mirrored
ghost values.
"""
from .constraints import (BoundarySpec, ConstraintField, ConstraintPlan, Dirichlet, Neumann,
                          assemble_constraints, dirichlet_ghost, mirror_value, neumann_ghost)
from .exceptions import (ConfigError, DivergenceError, InvalidKernelError, LayoutError,
                         MirrorOutOfRangeError, NormalizationError, PDBASError, SweepError,
                         UnderResolvedHorizonError)
from .grid import DomainLayout, MaskField, PeriodicGrid, Region, build_grid, build_layout, build_mask
from .kernel import (KernelFamily, KernelSpec, check_kernel_admissibility, compute_beta,
                     evaluate_kernel, sample_circular_kernel)
from .laplacian import (dft_forward, dft_inverse, kernel_spectrum, laplacian_quadrature,
                        laplacian_spectral, pd_laplacian_eigenvalue)
from .problems import ManufacturedProblem, custom_problem, dirichlet_problem, neumann_problem, pde_residual
from .solver import (Discretization, SolveResult, SolverConfig, SolveState, penalized_rhs, solve,
                     stable_dt, step_forward_euler)

__version__ = "0.1.0"
