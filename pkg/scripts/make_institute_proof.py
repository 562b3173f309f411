#!/usr/bin/env python3
"""Regenerate the golden proof script for the Institute example.

Synthesizes the proof that the restricted mathematician/vending-machine
composition can silently work its way to announcing a theorem and return
to its initial state, checks it, and freezes it as data/institute.tap.
"""

from pathlib import Path

from talgebra.calculus import Valid, check_proof
from talgebra.ccs import compile_institute, institute_proof
from talgebra.formats import print_proof

HEADER = """\
# Golden proof: the institute silently brews a coffee (two internal
# synchronizations), announces a theorem, and is back where it started:
# Institute =[(tau* ; 'theorem) ; tau*]=> Institute.
# Regenerate with scripts/make_institute_proof.py.
"""


def main() -> None:
    compiled = compile_institute()
    proof = institute_proof(compiled)
    verdict = check_proof(proof)
    assert isinstance(verdict, Valid), verdict
    names = {info.sentence: info.name for info in compiled.axioms}
    text = HEADER + print_proof(proof, axiom_names=names)
    out = Path(__file__).resolve().parent.parent / "src" / "talgebra" / \
        "data" / "institute.tap"
    out.write_text(text)
    print(f"wrote {out} ({len(text.splitlines())} lines, verdict {verdict})")


if __name__ == "__main__":
    main()
