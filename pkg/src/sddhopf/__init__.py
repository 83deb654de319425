"""Hopf-bifurcation diagnostics and simulation for systems with
state-dependent delay, with a three-state regulatory model built in."""

from .delay import (CallableHistory, DelaySample, HistoryFunction,
                    contraction_margin, delay_derivative, solve_delay)
from .errors import (AmbiguousRoot, BoundaryZero, DisagreementError,
                     InnerIterationDivergence, ModeOverflow, NoConvergence,
                     NoCriticalPoint, NonFiniteJacobian, NoRootInWindow,
                     ParseError, SchemaError, SddHopfError,
                     SingularAtStationary, SingularImplicitDerivative,
                     SingularJacobian)
from .hopf import (HopfCertificate, LipschitzBundle, du_dalpha_corrected,
                   find_critical, gain_c0, hill_slope_max,
                   lemma41_paper_solution, lemma41_residual,
                   lipschitz_constants, transversality,
                   transversality_report)
from .integrator import (IntegratorConfig, Trajectory, integrate,
                         integrate_frozen)
from .model import (GoodwinParameters, JacobianBundle, ModelDefinition,
                    goodwin_delay_map, goodwin_jacobians, goodwin_model,
                    goodwin_rhs, hill_derivative, jacobians)
from .orbit import (BoxReport, BranchPoint, BranchScan, OrbitConfig,
                    PeriodBounds, PeriodicOrbit, box_bounds_check,
                    branch_scan, detect_orbit, fourier_residual,
                    period_bounds, sign_det_sum)
from .spectrum import (CharacteristicContext, ContourRectangle,
                       CrossingReport, char_det, characteristic_context,
                       crossing_number, default_delta, goodwin_eigenvalues,
                       goodwin_loop_gain, winding_degree)
from .stationary import StationaryState, goodwin_stationary, solve_stationary

__version__ = "0.1.0"
