from .indicators import (
    BUILTIN_CATALOGS,
    AggFunction,
    DimensionSpec,
    IndicatorDef,
    MalformedIndicatorError,
    MeasureSpec,
    builtin_catalog_graph,
    catalog_to_graph,
    load_builtin_catalog,
    load_indicator_catalog,
)
from .registry import (
    BUILTIN_ONTOLOGIES,
    CyclicHierarchyError,
    UnknownClassError,
    VocabularyRegistry,
    builtin_graph,
    load_registry,
    subclass_closure,
)

__all__ = [
    "AggFunction",
    "BUILTIN_CATALOGS",
    "BUILTIN_ONTOLOGIES",
    "CyclicHierarchyError",
    "DimensionSpec",
    "IndicatorDef",
    "MalformedIndicatorError",
    "MeasureSpec",
    "UnknownClassError",
    "VocabularyRegistry",
    "builtin_catalog_graph",
    "builtin_graph",
    "catalog_to_graph",
    "load_builtin_catalog",
    "load_indicator_catalog",
    "load_registry",
    "subclass_closure",
]
