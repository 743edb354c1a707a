#!/usr/bin/env python3
"""Freeze expected Porter stems from NLTK (Martin's reference variant).

usage: freeze_porter_oracle.py WORDLIST OUT.tsv [--sample N]
"""

import argparse
import random

from nltk.stem.porter import PorterStemmer

CLASSIC = ("caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated "
           "troubled sized hopping tanned falling hissing fizzed failing filing happy sky relational "
           "conditional rational valenci hesitanci digitizer conformabli radicalli differentli vileli "
           "analogousli vietnamization predication operator feudalism decisiveness hopefulness "
           "callousness formaliti sensitiviti sensibiliti triplicate formative formalize electriciti "
           "electrical hopeful goodness revival allowance inference airliner gyroscopic adjustable "
           "defensible irritant replacement adjustment dependent adoption homologou communism activate "
           "angulariti homologous effective bowdlerize probate rate cease controll roll generalizations "
           "oscillators economic development nations peacekeeping").split()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("wordlist")
    ap.add_argument("out")
    ap.add_argument("--sample", type=int, default=600)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    words = sorted({w.strip() for w in open(args.wordlist) if w.strip().isalpha() and len(w.strip()) >= 3})
    rng = random.Random(args.seed)
    chosen = sorted(set(rng.sample(words, min(args.sample, len(words)))) | set(CLASSIC))
    ps = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    with open(args.out, "w") as f:
        for w in chosen:
            f.write(f"{w}\t{ps.stem(w, to_lowercase=False)}\n")


if __name__ == "__main__":
    main()
