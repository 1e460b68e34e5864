"""Indexed containers, their composition tensor, and the monoid structures on them."""

from .container import (
    ContainerMorphism,
    ExtentElem,
    ExtentFamily,
    IndexedContainer,
    interp_morphism,
    reify_natural,
)
from .icms import Icms, LawReport, check_icms, icms_to_monoid, monoid_to_icms
from .kernel import Assignment, Family, FamilyMap, IndexSet
from .monad import DerivedMonad, check_monad_laws, m_bind, m_join, m_unit
from .monoidal import tensor, unit_container

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ContainerMorphism",
    "DerivedMonad",
    "ExtentElem",
    "ExtentFamily",
    "Family",
    "FamilyMap",
    "Icms",
    "IndexSet",
    "IndexedContainer",
    "LawReport",
    "check_icms",
    "check_monad_laws",
    "icms_to_monoid",
    "interp_morphism",
    "m_bind",
    "m_join",
    "m_unit",
    "monoid_to_icms",
    "reify_natural",
    "tensor",
    "unit_container",
]
