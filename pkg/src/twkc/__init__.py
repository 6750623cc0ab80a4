"""Treewidth-based knowledge compilation.

Compile bounded-treewidth Boolean circuits into deterministic structured
decomposable NNF, query the result (probability, counting, enumeration),
and measure the width parameters that bound OBDD and d-SDNNF sizes of
monotone CNFs and DNFs.
"""

from .circuit import (Circuit, Hypergraph, MonotoneFormula, circuit_truth_table, evaluate,
                      format_circuit, format_dimacs, formula_to_circuit, gen_grid_cnf,
                      gen_lineage_qp, gen_sdisj, gen_sint, parse_circuit, parse_dimacs,
                      random_circuit, random_monotone_formula)
from .compile import Compiled, compile, compile_circuit
from .decomp import (NiceTreeDecomposition, TreeDecomposition, check_nice, exact_pathwidth,
                     exact_treewidth, make_nice, minfill, root_for_compile, validate)
from .nnf import (Nnf, VTree, check_d_sdnnf, enumerate_models, model_count, probability,
                  restrict)
from .obdd import Obdd, best_order, build, dualize

__version__ = "0.1.0"
