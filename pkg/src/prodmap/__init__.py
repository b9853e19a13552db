"""prodmap: a numerical laboratory for the two-factor product map.

Large-step gradient descent on the bilinear loss (ab - mu)^2 / 2 and its
mini-batch random-switching extension: the exact map algebra, the balanced
cubic phase diagram, the invariant ellipse, transverse Lyapunov estimators,
the one-prompt linear self-attention reduction, and seeded CLI experiments.
"""

from .core import (
    BOUNDARY_TOL,
    DIVERGED,
    ESCAPE_RADIUS,
    Coords,
    MapParams,
    RegionLabel,
    State,
    cheb_angle,
    cheb_step,
    classify_region,
    coords,
    gradient,
    is_diverged,
    jacobian,
    landing_set_membership,
    step,
    step_coords,
)
from .balanced import (
    MU_DIVERGENCE,
    MU_FLIP,
    MU_MONOTONE,
    MU_TWO_CYCLE_LOSS,
    PhaseLabel,
    bifurcation_sweep,
    classify_mu,
    cubic,
    eta_thresholds,
    monotone_check,
    period_two,
)
from .defaults import ARTIFACT_VERSION as __version__
from .lsa import (
    Prompt,
    PromptGeometry,
    generate_prompt,
    lsa_grad,
    lsa_loss,
    project_sector,
    run_equivalence,
)
from .minibatch import (
    BatchPopulation,
    batch_step,
    cocycle_run,
    crossing_probability,
    dmu_after_batch,
    lyapunov_sweep,
    multiprompt_sgd,
)
