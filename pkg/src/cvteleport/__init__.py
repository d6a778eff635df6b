"""Continuous-variable quantum teleportation in a truncated photon-number basis.

The teleportation channel (``teleport``) and the feedback-compensated beam
splitter (``beamsplitter``) are implemented independently so that their
equivalence can be checked numerically.
"""
__version__ = "0.1.0"

from cvteleport._backend import active_backend, available_backends, use_backend
from cvteleport.fock import (
    coherent_state,
    displace,
    displacement_operator,
    fidelity_pure,
    fock_state,
    inner,
    mean_photon_number,
)
from cvteleport.quadrature import QuadratureGrid, default_grid, integrate_plane
from cvteleport.teleport import (
    TeleportParams,
    apply_transfer,
    average_fidelity,
    average_output_density,
    coherent_closed_form,
    epr_state,
    bell_eigenstate,
    one_photon_closed_form,
    p_density,
    transfer_operator,
)
from cvteleport.beamsplitter import (
    beamsplitter_unitary,
    compensated_output,
    equivalence_residual,
    povm_projection_state,
    transmitted_state,
)
from cvteleport.montecarlo import SampleSet, completeness_check, sample_beta
