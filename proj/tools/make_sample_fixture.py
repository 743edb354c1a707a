#!/usr/bin/env python3
"""Generate the bundled 50-speech sample corpus used by tests and the README.

Speeches are drawn from a few themed word pools so that a small topic model
has something to find. Output is fully determined by --seed.
"""

import argparse
import csv
import json
import random
from pathlib import Path

THEMES = {
    "development": "development poverty growth investment infrastructure trade economic agriculture "
    "financing debt markets employment industry productivity education health sustainable "
    "assistance cooperation partnership".split(),
    "security": "security peace conflict terrorism weapons nuclear disarmament military violence "
    "ceasefire peacekeeping troops borders threat stability war refugees crisis".split(),
    "climate": "climate change emissions environment ocean warming carbon energy renewable "
    "islands disaster drought biodiversity forests adaptation vulnerable sea".split(),
    "rights": "rights human freedom democracy justice equality women children dignity law "
    "elections governance tolerance minorities accountability".split(),
    "reform": "reform council assembly organization secretary general charter multilateral "
    "membership representation permanent institutions mandate resolution".split(),
}
FILLER = ("we our nation people world government country year must will continue support "
          "international community united nations today great important").split()
STOP = "the of and to in a is that for on with as this be are by it have".split()

COUNTRIES = [
    ("USA", "NAC"), ("CAN", "NAC"), ("MEX", "LCN"), ("BRA", "LCN"), ("ARG", "LCN"),
    ("GBR", "ECS"), ("FRA", "ECS"), ("DEU", "ECS"), ("RUS", "ECS"), ("TUR", "ECS"),
    ("EGY", "MEA"), ("IRN", "MEA"), ("ISR", "MEA"), ("SAU", "MEA"), ("IND", "SAS"),
    ("PAK", "SAS"), ("BGD", "SAS"), ("CHN", "EAS"), ("JPN", "EAS"), ("IDN", "EAS"),
    ("FJI", "EAS"), ("NGA", "SSA"), ("KEN", "SSA"), ("ZAF", "SSA"), ("ETH", "SSA"),
]


def speech(rng, weights, length):
    themes = list(THEMES)
    words = []
    for _ in range(length):
        u = rng.random()
        if u < 0.25:
            words.append(rng.choice(STOP))
        elif u < 0.40:
            words.append(rng.choice(FILLER))
        else:
            theme = rng.choices(themes, weights=weights)[0]
            words.append(rng.choice(THEMES[theme]))
    sentences, i = [], 0
    while i < len(words):
        n = rng.randint(8, 16)
        chunk = words[i:i + n]
        sentences.append(chunk[0].capitalize() + " " + " ".join(chunk[1:]) + ".")
        i += n
    return " ".join(sentences) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=20170601)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    speeches = args.out / "speeches"
    speeches.mkdir(parents=True, exist_ok=True)
    rows = []
    for idx, (iso, region) in enumerate(COUNTRIES):
        base_gdp = rng.uniform(800, 45000)
        for year in (1995 + idx % 7, 2008 + idx % 8):
            session = year - 1945
            conflict = 1 if rng.random() < 0.3 else 0
            polity = rng.randint(-10, 10)
            weights = [rng.gammavariate(0.6, 1.0) + 0.05 for _ in THEMES]
            weights[1] *= 3.0 if conflict else 1.0
            if region in ("EAS", "SAS") and iso in ("FJI", "BGD"):
                weights[2] *= 4.0
            doc_id = f"{iso}_{session}_{year}"
            (speeches / f"{doc_id}.txt").write_text(speech(rng, weights, rng.randint(250, 450)),
                                                   encoding="utf-8")
            rows.append({
                "doc_id": doc_id,
                "gdp_pc": f"{base_gdp * (1.02 ** (year - 1995)):.1f}",
                "population": f"{rng.uniform(1e6, 3e8):.0f}",
                "oda": "" if rng.random() < 0.2 else f"{rng.uniform(0, 5e9):.0f}",
                "polity": str(polity),
                "conflict": str(conflict),
                "region": region,
            })

    with open(args.out / "meta.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)

    config = {
        "paths": {"corpus_dir": "speeches", "metadata": "meta.csv", "output_dir": "out"},
        "preprocess": {"min_doc_freq": 3, "min_term_len": 3},
        "fit": {"k_grid": {"from": 3, "to": 6}, "max_em_iters": 100, "rel_tol": 1e-5},
        "formula": "conflict + region + gdp_pc + s(year, df=4)",
        "metrics": {"top_words": 10, "coherence_words": 10, "frex_w": 0.7},
        "effects": {
            "n_draws": 200,
            "targets": [{"covariate": "conflict"}, {"covariate": "year", "grid_points": 10}],
            "contrasts": [{"covariate": "conflict", "level_a": 1, "level_b": 0}],
        },
        "report": {"cloud_words": 20, "contrast_pairs": [[1, 2]], "graph_threshold": 0.05},
        "seed": 42,
        "deterministic": True,
    }
    (args.out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
