from .core import (
    EMPTY,
    Collection,
    Element,
    MacroAtom,
    MicroAtom,
    QSet,
    Species,
    count_indist,
    enumerate_sub_classes,
    ext_eq,
    indist,
    is_subqset,
    n_singleton,
    power_qc,
    qc,
    qset,
    qsim,
    quotient,
    separation,
    similar,
    singleton_of,
    strong_singleton,
    sub_qset_with_qc,
    weak_ext_indist,
    weak_pair,
)
from .functions import CongruenceReport, QuasiFunction, Violation, validate_qf
from .predicates import (
    FALSE,
    TRUE,
    And,
    IsCollection,
    MacroIdIs,
    Not,
    Or,
    Predicate,
    QcAtMost,
    QcEquals,
    SpeciesIs,
)
