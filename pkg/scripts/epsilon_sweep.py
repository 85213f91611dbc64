"""Utility and attack relative performance against epsilon, with and without the bigram penalty."""

import argparse
import csv
import sys

from syntf.embeddings import load_embeddings
from syntf.evaluation import LabeledCorpus, Resources, ScenarioConfig, SynParams, run_scenario
from syntf.fixture import bundled_path
from syntf.privacy import improved_loss_per_word
from syntf.vocab import VocabOptions, load_lemmas

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilons", default="1,5,10,20,30,47.5,100")
    ap.add_argument("--s", default="0,0.3")
    ap.add_argument("--suspects", type=int, default=4)
    ap.add_argument("--repetitions", type=int, default=10)
    args = ap.parse_args()

    corpus = LabeledCorpus.load(bundled_path("corpus.jsonl"))
    resources = Resources([d.text for d in corpus.documents], load_embeddings(bundled_path("embeddings.txt")),
                          VocabOptions(lemmas=load_lemmas(bundled_path("lemmas.tsv"))))
    K = len(resources.vocabulary(SynParams()))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["epsilon", "s", "improved_per_word", "beta_u", "beta_a", "gap"])
    for s in (float(x) for x in args.s.split(",")):
        for eps in (float(x) for x in args.epsilons.split(",")):
            rep = run_scenario(corpus, ScenarioConfig(args.suspects), "synthetic", resources,
                               SynParams(s=s, epsilon=eps), seed=0, repetitions=args.repetitions)
            writer.writerow([eps, s, f"{improved_loss_per_word(eps, K):.3f}",
                             f"{rep.beta_u:.3f}", f"{rep.beta_a:.3f}", f"{rep.gap:.3f}"])
