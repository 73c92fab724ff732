"""Hydrogen-contamination variability analysis for Al/AlOx/Al tunnel junctions.

Subpackages: count statistics (stats), atomic-structure analysis (structure),
hydrogen motif classification (motifs), tight-binding NEGF transport
(transport), Josephson-energy arithmetic and distributions (josephson), and
the pipeline CLI (cli).
"""

from .josephson import (
    EjDistribution,
    EjTransform,
    JunctionParams,
    convert_energy,
    critical_current,
    ej_distribution,
    ej_single,
    mixed_ej,
    normal_resistance,
)
from .motifs import MOTIF_CLASSES, MotifRecord, classify_h, classify_structure, motif_statistics
from .stats import BetaBinomial, CountSample, FitResult, fit, log_beta, read_counts
from .structure import (
    AtomicStructure,
    BondGraph,
    OxideRegion,
    effective_time,
    ideal_gas_count,
    neighbor_graph,
    oxide_region,
    parse_xyz,
    stoichiometry,
    surface_sites,
)
from .transport import (
    JunctionModel,
    TransmissionCurve,
    apply_defect,
    calibrate_barrier,
    surface_green_function,
    transfer_matrix_transmission,
    transmission,
)

__version__ = "0.1.0"
