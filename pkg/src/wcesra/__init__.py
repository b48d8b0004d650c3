"""Weighted conditional expectation operators and their spectral radius algebras
on finite atomic measure spaces."""

from .condexp import Partition, cond_expect, is_measurable, refines, tower_check
from .config import Tolerances, override, tolerances
from .errors import NumericalFailure, UsageError
from .hilbert import (
    LinOperator,
    MeasureSpace,
    MFunction,
    Subspace,
    adjoint,
    identity,
    inner,
    kernel,
    multiplication,
    norm,
    op_norm,
    project,
    rank_one,
    zero,
)
from .majorize import (
    MajorizationResult,
    closed_range_hypothesis,
    majorizes,
    qt_majorization_suite,
    rank_one_majorization,
)
from .sra import (
    BlockDecomp,
    MembershipVerdict,
    RankOne,
    RankOneFamily,
    Verdict,
    WCEFamily,
    block_decompose,
    bt_equals_full,
    bt_member_definitional,
    bt_member_kernel_criterion,
    isometry_multiple_check,
    qt_member,
    rank_one_bt_invariance,
    rank_one_in_bt_wce,
    rank_one_qt,
    rank_one_rm,
    rm_closed,
    rm_inverse,
    rm_series,
)
from .wce import (
    PolarParts,
    WCEOp,
    aluthge,
    polar,
    spectral_radius,
    wce_adjoint,
    wce_build,
    wce_norm,
    wce_power,
)

__version__ = "0.1.0"
