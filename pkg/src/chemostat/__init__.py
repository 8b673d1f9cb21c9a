"""Two-species chemostat competition with interspecific density dependence.

Steady states, their local stability, trajectories, operating diagrams and
one-parameter bifurcation scans for

    S'  = D (S_in - S) - f1(S, x2) x1 - f2(S, x1) x2
    x1' = (f1(S, x2) - D1) x1
    x2' = (f2(S, x1) - D2) x2

with removal rates ``D_i = alpha_i D + a_i``.
"""
from .diagram import (BifurcationPoint, BoundaryCurve, Codim2Candidate, DiagramGrid,
                      OperatingRegion, branch_table, classify_region, codim2_candidates,
                      grid_diagram, scan_dilution, trace_boundary)
from .dynamics import IntegratorConfig, Trajectory, basin_probe, integrate, rhs
from .equilibria import (CaseLabel, OperatingPoint, SteadyState, break_even, classify_case,
                         curve_F, find_steady_states, x_bar, x_tilde)
from .errors import (BracketError, ChemostatError, ConsistencyError, DomainError,
                     IntegrationError, ParameterError)
from .growth import (BioParams, GrowthModel, MonodInhibition, RescaledModel, default_model,
                     monod_inhibition, monod_inhibition_partials, removal_rate,
                     rescale_from_yields)
from .stability import StabilityReport, classify, eigenvalues, jacobian

__version__ = "0.1.0"
