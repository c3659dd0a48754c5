"""Taxonomy-aware frequent itemset mining with a query oracle."""
from .errors import (CapExceeded, ConfigInvalid, CrowdMineError, CycleDetected, IncompleteState,
                     NonMonotoneOracle, NotACoverEdge, NotAnAntichain, NotMonotone, SessionClosed,
                     UnknownItem)
from .itemsets import (EdgeKind, ItemsetTaxonomy, KItemsetTaxonomy, MonotonePredicate,
                       classify_covering_edge, construct_itemset_taxonomy,
                       construct_k_itemset_taxonomy, mfis_from_predicate, miis_from_predicate,
                       predicate_from_mfis, solution_taxonomy)
from .miners import (ClassificationState, MiningResult, best_split_element, derive_borders,
                     greedy_best_split_itemset, mine_alg1, mine_chain_partition, mine_exhaustive,
                     mine_greedy_anytime, mine_halving, run_miner)
from .oracle import (InstrumentedOracle, OracleConfig, TransactionDatabase, instrument,
                     interactive_oracle, make_db_oracle, make_predicate_oracle, realize_database,
                     support)
from .poset import (AntichainCounter, GenericPoset, Taxonomy, antichain_of, build_taxonomy,
                    chain_partition, count_antichains, enumerate_antichains, ideal_of,
                    itemset_leq, normalize_antichain, reachability, transitive_reduction, width)

__version__ = "0.1.0"
