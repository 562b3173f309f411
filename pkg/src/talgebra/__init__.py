"""Many-sorted transition algebras.

Syntax and signature morphisms, finite-model satisfaction with iterated
actions, a decision procedure for basic (atomic) entailment, a proof checker
for the full dynamic calculus, a small process-calculus compiler, and a
desk-scale forcing laboratory.
"""

from .syntax import (Action, Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg,
                     Pow, Seq, Sentence, Signature, SignatureMorphism, Star,
                     SymExp, Term, Trans, Var, Variable)
from .semantics import FiniteModel, enumerate_models, find_countermodel, satisfies
from .basic import GroundTheory, build_term_model, decide_basic
from .calculus import (BoundedValid, Invalid, PremiseFamily, ProofNode,
                       Sequent, Valid, check_proof)
from .ccs import (CcsProgram, CompiledCcs, compile_to_theory, parse_ccs,
                  parse_process, replay_institute_proof)
from .forcing import (ForcingProperty, ForcingRelation, GenericSet,
                      build_generic, cross_check_weak_forcing, generic_model,
                      validate_forcing_lemma, weakly_forces)
from .formats import (ParseContext, ParseError, Theory, build_proof,
                      parse_forcing, parse_model, parse_sentence,
                      parse_theory, print_model, print_proof, print_theory)

__all__ = [name for name in dir() if not name.startswith("_")]
