"""Exact finite-truncation verifiers for l1-trees, strong embeddings and the
universal amalgam of separable Rosenthal compacta."""
from .amalgam import (DenseWindow, EncodingError, PairTree, build_amalgam, build_partition,
                      corrupt_phi, dense_window_for, encode_members, select_chain,
                      star_embed_image, verify_member_strong_embedding, verify_norm_identity)
from .basisnorm import (NOT_BASIC, EquivalenceReport, PrefixNormSystem, basis_constant,
                        equivalence_constants, prefix_norm, verify_P1, verify_P2)
from .ell1 import (FnWindow, build_glued_tree, build_l1_tree, build_l1_trees,
                   l1_equivalence_constants, rank)
from .embed import (PreconditionError, StrongEmbeddingCertificate, check_propnew, check_srce1,
                    extract_2K_equivalence, max_diff_lemma, monotone_map_iv)
from .families import (HereditaryFamily, family_tree, projection_functions, random_family,
                       schreier_restricted, uniform_family, verify_hereditary_claim)
from .polylin import (UNBOUNDED, CheckReport, Constraint, LinearProgram, LPSolution, PwlNorm,
                      SumAbsNorm, check_pwl_dominance, min_norm_over_l1_sphere, solve_lp,
                      sup_norm_over_unit_ball)
from .seqtree import SeqTree, check_monotone, derivative, glue, order
from .stepfn import (AtomSpace, StepFn, cylinder_indicator, dirac_at, lin_comb, pullback,
                     refine, sup_norm, tensor)
