#!/usr/bin/env python3
"""Randomized agreement experiment for the ground fragment.

Samples random ground theories, then checks that the congruence-closure
decision procedure, satisfaction in the quotient term model, and the
bounded semantic oracle all agree on random atomic goals. Prints the seed
so failures are replayable.
"""

import argparse
import random

from talgebra.basic import (GroundTheory, Unbounded, build_term_model,
                            decide_basic)
from talgebra.semantics import satisfies
from talgebra.syntax import App, Eq, FuncDecl, Lbl, Signature, Trans


def random_theory(rng: random.Random):
    consts = [FuncDecl(n, (), "s") for n in ("a", "b", "c")[:rng.randint(1, 3)]]
    funcs = list(consts)
    if rng.random() < 0.7:
        funcs.append(FuncDecl("f", ("s",), "s"))
    sig = Signature.make(["s"], funcs, mono=[d for d in funcs if d.arity],
                         labels=["lam"])

    def random_term(depth):
        d = rng.choice([d for d in funcs
                        if d.is_constant or depth > 0])
        if d.is_constant:
            return App(d, ())
        return App(d, (random_term(depth - 1),))

    def random_atom():
        t1, t2 = random_term(2), random_term(2)
        if rng.random() < 0.5:
            return Eq(t1, t2)
        return Trans(t1, Lbl("lam"), t2)

    atoms = tuple(random_atom() for _ in range(rng.randint(0, 6)))
    return GroundTheory(sig, atoms), random_atom


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    print(f"seed: {args.seed}")
    rng = random.Random(args.seed)

    checked = disagreements = skipped = 0
    for _ in range(args.trials):
        theory, random_atom = random_theory(rng)
        model = build_term_model(theory)
        if isinstance(model, Unbounded):
            skipped += 1
            continue
        for _ in range(4):
            goal = random_atom()
            checked += 1
            derived = decide_basic(theory, goal).holds
            if derived != satisfies(model, goal):
                disagreements += 1
                print(f"DISAGREE on {goal} under {theory.atoms}")
    print(f"checked {checked} goals ({skipped} unbounded theories skipped); "
          f"{disagreements} disagreements")


if __name__ == "__main__":
    main()
