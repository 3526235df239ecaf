# reality classification, relative to max(1, |E|)
TOL_REAL = 1e-9
# coalescence window for exceptional points, relative to max(1, |E|)
DEGENERATE_GAP = 1e-6
DEGENERATE_COS = 1. - 1e-6

# largest accepted root distance relative to max(1, |E|); coalesced pairs resolve to about sqrt(eps)
ABERTH_TOL = 1e-6
ABERTH_MAX_ITER = 500
ABERTH_ANGLE_OFFSET = 0.4
NEWTON_STEPS = 2
PHI_ROOT_TOL = 1e-6
PHI_ZERO_CUTOFF = 1e-14

# max pairwise deviation between solution routes before the CLI reports a disagreement
ROUTE_TOL = 1e-6

RESIDUAL_SAMPLES = 33
RESIDUAL_HALF_WIDTH = 3.
FD_STEP = 1e-3
PT_PHASE_TOL = 1e-8
# beyond this |Re x| psi is assembled in log space
LOG_GUARD = 20.
# fraction of the summed magnitude of the terms of psi'' below which a point counts as a node of psi
NODE_FLOOR = 1e-6

THRESHOLD_ZETA_HI = 10.
THRESHOLD_PROBE = 1e-6
THRESHOLD_WIDTH = 1e-10

CLOSED_FORM_ZETA_GRID = (0., 0.1, 0.25, 0.5, 1., 2., 5.)
SCAN_ZETA_GRID = (0.1, 0.5, 1., 2., 5.)
RESIDUAL_ZETA_GRID = (0.25, 1., 2.)
