"""Default experiment parameters, collected in one place.

Every experiment subcommand reads its defaults from this table so that the
reference configurations live in exactly one spot and stay overridable from
the command line.
"""

ARTIFACT_VERSION = "0.1.0"

# verify-reduction
REDUCTION_MUS = (0.5, 0.9, 1.3)
REDUCTION_STEPS = 300
REDUCTION_D = 3
REDUCTION_N = 20
REDUCTION_TOL = 1e-12

# bifurcation sweep
BIFURCATION_GRID = 1400
BIFURCATION_RANGE = (0.0, 2.2)
BIFURCATION_BURN_IN = 2500
BIFURCATION_KEEP = 600

# phase portraits: two interior seeds (D < 0) and two exterior seeds (D > 0),
# the latter one in the first and one in the second quadrant
PORTRAIT_MUS = (0.7, 1.3)
PORTRAIT_STEPS = 200
PORTRAIT_INTERIOR = ((0.3, -0.2), (-0.3, 0.2))
PORTRAIT_EXTERIOR = ((3.0, 1.0), (-3.0, 1.0))

# separatrix crossing (shared-product mini-batch model)
CROSSING_N = 64
CROSSING_MU = 0.6
CROSSING_ETA = 1.0
CROSSING_SCALE = 0.4          # Cauchy scale before truncation
CROSSING_TRUNCATION = 3.0     # |draw| cap (rejection sampling)
CROSSING_BOOST = 2.0          # boost the largest-|h| entry past |eta*h| = 2
CROSSING_M_LIST = ("full", 8, 1)
CROSSING_TRAJ_STEPS = 500
CROSSING_DRAWS = 3000
CROSSING_EPSILON = 1e-4       # factor-splitting perturbation of (sqrt(mu), sqrt(mu))

# transverse Lyapunov sweep (milder population, no boosted outlier)
LYAPUNOV_N = 64
LYAPUNOV_MU = 0.6
LYAPUNOV_ETA = 1.0
LYAPUNOV_SCALE = 0.08
LYAPUNOV_TRUNCATION = 0.8
LYAPUNOV_SIZES = (1, 2, 4, 8, 16, 32, "full")
LYAPUNOV_STEPS = 1500
LYAPUNOV_REALIZATIONS = 150

# multi-prompt SGD
SGD_N = 128
SGD_D = 3
SGD_N_CTX = 10
SGD_MU_STAR = 0.6
SGD_M_LIST = ("full", 8, 1)
SGD_STEPS = 400
SGD_WARM_STEPS = 8000
SGD_PERTURB = 5e-3
SGD_WARM_MU_CAP = 0.05        # warm step size: worst per-prompt step parameter
SGD_INIT_SCALE = 0.1
SGD_LOSS_CAP = 1e12           # traces truncate beyond this

# identity suite
IDENTITY_SAMPLES = 10_000

REFERENCE_SEED = 0
