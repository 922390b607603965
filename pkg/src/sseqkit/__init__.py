"""Toolkit for machine-generated Adams spectral sequence datasets."""

from .algebra import (
    UNKNOWN,
    BasisVec,
    BiDegree,
    Element,
    Generator,
    MapData,
    Monomial,
    SpectrumData,
    apply_map,
    degree_of,
    elem_add,
    leibniz_product,
    mul,
    normal_form,
)
from .formats import (
    CofseqRow,
    ProofRow,
    SsRow,
    load_cofseq,
    load_map,
    load_proofs,
    load_spectrum,
    load_ss,
    parse_expr,
    parse_index_vec,
    serialize_expr,
)
from .naming import (
    CofseqRef,
    MapAst,
    SpectrumAst,
    cells_of,
    cofseq_shifts,
    parse_cofseq_ref,
    parse_map_name,
    parse_spectrum_name,
    unparse,
)
from .ss import (
    CofseqState,
    SsEntry,
    SsState,
    build,
    build_cofseq,
    check_consistency,
    decode_level,
    encode_level,
)

__version__ = "0.1.0"
