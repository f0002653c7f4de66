import math

import numpy as np
import pytest

from fraxterp.errors import DomainError, StructuralError, UnlocatableError
from fraxterp.geometry import Interval
from fraxterp.maps import affine, translation
from fraxterp.partition import BOUNDED, PartitionScheme, PieceId, validate_partition
from fraxterp.scenarios import builtin

UNIT = Interval(0.0, 1.0)


def example1_scheme():
    return builtin("example1").operator.scheme


@pytest.mark.parametrize("name", ["example1", "pullback", "halfline"])
def test_builtin_schemes_validate(name):
    assert validate_partition(builtin(name).operator.scheme).ok


def test_locate_and_tie_break():
    sch = example1_scheme()
    assert sch.locate(0.25) == PieceId(BOUNDED, 1)
    assert sch.locate(0.5) == PieceId(BOUNDED, 1)
    assert sch.locate(0.75) == PieceId(BOUNDED, 2)
    assert list(sch.locate_index(np.array([0.0, 0.5, 1.0]))) == [0, 0, 1]


def test_locate_errors():
    sch = example1_scheme()
    with pytest.raises(DomainError):
        sch.locate(1.5)
    gap = PartitionScheme("compact", UNIT, [(UNIT, affine(0.25, 0.0, UNIT)),
                                            (UNIT, affine(0.25, 0.75, UNIT))])
    with pytest.raises(UnlocatableError):
        gap.locate(0.5)
    assert "cover gap" in validate_partition(gap).conditions()


def test_overlap_is_reported():
    sch = PartitionScheme("compact", UNIT, [(UNIT, affine(0.6, 0.0, UNIT)),
                                            (UNIT, affine(0.6, 0.4, UNIT))])
    assert "interior overlap" in validate_partition(sch).conditions()


def test_structural_checks():
    V = Interval(0.0, math.inf)
    with pytest.raises(StructuralError):
        PartitionScheme("half_line", None, [], [(V, translation(1.0, V))], pi=[2])
    with pytest.raises(StructuralError):
        PartitionScheme("half_line", None, [], [(V, translation(1.0, V))])  # closed inf end
    with pytest.raises(StructuralError):
        PartitionScheme("compact", UNIT, [(Interval(0, 0.5), affine(0.5, 0.0, UNIT))])
    with pytest.raises(StructuralError):
        PartitionScheme("half_line", Interval(1.0, 2.0), [], [], compactified=True)


def test_unbounded_component_count():
    assert example1_scheme().unbounded_components() == 0
    assert builtin("halfline").operator.scheme.unbounded_components() == 1
