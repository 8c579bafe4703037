"""ldlab: a numerical laboratory for the liquid-drop energy P(F) + V(F).

Cell-set geometry on uniform grids, Riesz interaction energies with an
exact per-cell self-energy, closed-form ball oracles, competitor
constructions (balls, chains, rescalings, splits), a mass-preserving
annealer, a spectral star-shaped descent, and scripted experiments, all
behind a CLI (`ldlab`).
"""

from .errors import (
    BoxTooSmall,
    ConfigError,
    DegenerateDeficit,
    DimensionMismatch,
    EmptyPiece,
    EmptySet,
    InvalidKernel,
    LdlabError,
    MassMismatch,
    NotDisjoint,
    NotStarShaped,
    PreconditionFailed,
)
from .grid import (
    BoxDomain,
    GridSet,
    component_count,
    components,
    cross_section_area,
    cross_section_mass,
    dump_raster,
    dumps_raster,
    embed,
    essential_diameter,
    facet_perimeter,
    load_raster,
    perimeter,
    refine,
    volume,
)
from .mesh import mesh_perimeter, smoothed_indicator
from .riesz import (
    Kernel,
    SelfEnergyTable,
    ball_potential,
    ball_profile,
    ball_riesz_energy,
    ball_volume,
    fit_profile_exponent,
    interaction_energy,
    kernel_spherical_average,
    nonlocal_energy,
    nonlocal_energy_density,
    posdef_gap,
    potential_at,
    potential_field,
    self_energy,
    self_energy_mc,
    self_energy_quadrature,
    sphere_area,
)
from .metrics import (
    BallOracle,
    EnergyBreakdown,
    RescaleParams,
    ball_energy,
    check_qiso,
    fraenkel_asymmetry,
    fraenkel_to_ball,
    interpolation_ratio,
    isoperimetric_deficit,
    rescaled_energy,
    total_energy,
)
from .competitors import (
    CompetitorSpec,
    NonOptimalityRecord,
    chain_cross_terms,
    make_ball,
    make_ball_chain,
    non_optimality_check,
    random_blob,
    rescale_set,
    split_translate,
    truncated_competitor,
)
from .anneal import (
    AnnealConfig,
    MinimizeResult,
    anneal,
    anneal_energy,
    blend_perimeter,
)
from .star import (
    StarResult,
    StarShape,
    fuglede_check,
    gradient_check,
    random_shape,
    rasterize,
    renormalize,
    sobolev_norms,
    spherical_deficit,
    star_descent,
    star_energy,
    star_perimeter,
    star_perimeter_gradient,
    star_volume,
)
from .experiments import (
    SweepRecord,
    chain_grid_check,
    cut_inequality_probe,
    density_bound_check,
    diameter_bounds_check,
    equipartition_check,
    fission_scan,
    scaling_sweep,
)
from .config import load_config
from .manifest import RunManifest, load_manifest, verify_manifest, write_manifest

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
