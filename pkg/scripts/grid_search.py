"""Grid search over the SynTF parameter lattice on the bundled fixture corpus.

Writes one CSV row per lattice point with beta_U, beta_A and the gap for every
scenario, and prints the point with the largest worst-case gap.
"""

import argparse

from syntf.embeddings import load_embeddings
from syntf.evaluation import LabeledCorpus, Resources, ScenarioConfig, grid_search
from syntf.fixture import bundled_path
from syntf.vocab import VocabOptions, load_lemmas, load_synonyms


def floats(text):
    return [float(x) for x in text.split(",")]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", type=floats, default=floats("10,20,30,47.5"))
    ap.add_argument("--s", type=floats, default=floats("0,0.1,0.2,0.3,0.4"))
    ap.add_argument("--n", type=lambda t: [int(x) for x in t.split(",")], default=[150])
    ap.add_argument("--morphology", default="lemma,orth")
    ap.add_argument("--synonyms", action="store_true", help="also try vocabularies extended with synonyms")
    ap.add_argument("--repetitions", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="grid.csv")
    args = ap.parse_args()

    corpus = LabeledCorpus.load(bundled_path("corpus.jsonl"))
    options = VocabOptions(lemmas=load_lemmas(bundled_path("lemmas.tsv")),
                           synonyms=load_synonyms(bundled_path("synonyms.tsv")))
    resources = Resources([d.text for d in corpus.documents],
                          load_embeddings(bundled_path("embeddings.txt")), options)
    scenarios = [ScenarioConfig(4), ScenarioConfig(4, True), ScenarioConfig(6)]
    grid = {"morphology": args.morphology.split(","), "use_synonyms": [False, True] if args.synonyms else [False],
            "s": args.s, "n": args.n, "epsilon": args.epsilon}
    result = grid_search(corpus, scenarios, grid, resources, args.seed, args.repetitions)
    result.write_csv(args.out)
    print(f"best: {result.best} (min gap {result.best_score:.3f}); table in {args.out}")
