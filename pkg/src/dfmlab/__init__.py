"""Lattice toolkit for the dressing field method: field spaces, gauge fixing,
Faddeev-Popov operators and change-of-variables Jacobians for U(1) and SU(2)."""
from .action import ActionParams, action_eval, action_gradient
from .archive import read_archive, write_archive
from .errors import (ArchiveError, BranchError, CapacityError, ConfigError, DegenerateInputError,
                     DFMError, InputError, TagError)
from .fields import (ActionTag, FieldBundle, GroupField, LinkField, ScalarField, dc, ga_apply,
                     gauge_act, gt, iota, mu, random_bundle, random_group_field, udc)
from .fpjacobian import (DenseOperator, JacobianReport, check_delta_shift, fp_logdet, fp_operator,
                         gfm_differential_check, polar_jacobian_su2, polar_jacobian_u1)
from .gaugefix import (Lorenz, RxiAbelian, RxiNonAbelian, SolveReport, Unitary,
                       check_gfm_equivariance, gf_eval, gfm_solve, locality_profile, xi_sweep)
from .groups import AlgebraElement, GroupElement, exp_map, log_map
from .lattice import Lattice
from .variations import (GfDeformation, delta_psi, dressing_response, first_order_action_invariance,
                         xi_from_v)

__version__ = "0.1.0"
