#!/usr/bin/env python3
"""Generate the bundled desk-scale corpus, morpheme lexicon and toy eval files.

Output is deterministic for a fixed seed. Run from the repository root:

    python3 scripts/gen_toy_data.py crates/core/tests/data
"""
import random
import sys
from pathlib import Path

SEED = 20190601
TARGET_BYTES = 1_000_000

# semantic clusters: each noun belongs to one topic, verbs/adjectives are topical too
TOPICS = {
    "animal": {
        "nouns": ["cat", "dog", "bird", "horse", "wolf", "fox", "rabbit", "bear"],
        "verbs": ["hunt", "jump", "walk", "play", "climb"],
        "adjs": ["wild", "quick", "small", "soft"],
    },
    "royal": {
        "nouns": ["king", "queen", "prince", "knight", "lord", "castle", "crown", "throne"],
        "verbs": ["rule", "command", "defend", "order", "guard"],
        "adjs": ["noble", "proud", "rich", "old"],
    },
    "city": {
        "nouns": ["street", "market", "house", "tower", "bridge", "road", "shop", "car"],
        "verbs": ["build", "paint", "clean", "visit", "open"],
        "adjs": ["busy", "tall", "new", "loud"],
    },
    "nature": {
        "nouns": ["river", "lake", "tree", "flower", "forest", "hill", "stone", "field"],
        "verbs": ["grow", "flow", "bloom", "cover", "shine"],
        "adjs": ["green", "calm", "deep", "bright"],
    },
}
DETS = ["the", "a", "every", "some", "this", "that"]
PREPS = ["near", "under", "over", "behind", "beside"]
CONJ = ["and", "while", "because", "but"]


def plural(n):
    if n.endswith(("s", "x", "sh", "ch")):
        return n + "es", [n, "es"]
    return n + "s", [n, "s"]


def verb_forms(v):
    base = v[:-1] if v.endswith("e") else v
    third = v + "s"
    past = base + "ed"
    prog = base + "ing"
    return {
        "base": (v, [v]),
        "third": (third, [v, "s"]),
        "past": (past, [v, "ed"]),
        "prog": (prog, [v, "ing"]),
    }


def adj_forms(a):
    stem = a[:-1] if a.endswith("e") else a
    if a.endswith("y"):
        stem = a[:-1] + "i"
    return {
        "base": (a, [a]),
        "er": (stem + "er", [a, "er"]),
        "est": (stem + "est", [a, "est"]),
        "ly": (stem + "ly", [a, "ly"]),
    }


def noun_phrase(rng, topic, lexicon):
    t = TOPICS[topic]
    noun = rng.choice(t["nouns"])
    words = [rng.choice(DETS)]
    if rng.random() < 0.5:
        adj, morphs = adj_forms(rng.choice(t["adjs"]))[rng.choice(["base", "base", "er", "est"])]
        words.append(adj)
        lexicon[adj] = morphs
    if rng.random() < 0.4:
        form, morphs = plural(noun)
    else:
        form, morphs = noun, [noun]
    lexicon[form] = morphs
    words.append(form)
    return words


def clause(rng, topic, lexicon):
    t = TOPICS[topic]
    words = noun_phrase(rng, topic, lexicon)
    verb, morphs = verb_forms(rng.choice(t["verbs"]))[rng.choice(["third", "past", "prog", "base"])]
    lexicon[verb] = morphs
    words.append(verb)
    if rng.random() < 0.3:
        adv, morphs = adj_forms(rng.choice(t["adjs"]))["ly"]
        lexicon[adv] = morphs
        words.append(adv)
    if rng.random() < 0.6:
        words.append(rng.choice(PREPS))
        # mostly same topic, sometimes mixed
        other = topic if rng.random() < 0.8 else rng.choice(list(TOPICS))
        words.extend(noun_phrase(rng, other, lexicon))
    return words


def main(out_dir):
    rng = random.Random(SEED)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lexicon = {}
    lines = []
    size = 0
    topics = list(TOPICS)
    while size < TARGET_BYTES:
        topic = rng.choice(topics)
        words = clause(rng, topic, lexicon)
        if rng.random() < 0.35:
            words.append(rng.choice(CONJ))
            words.extend(clause(rng, topic, lexicon))
        line = " ".join(words)
        lines.append(line)
        size += len(line.encode()) + 1
    (out / "corpus.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    with open(out / "lexicon.tsv", "w", encoding="utf-8") as f:
        for word in sorted(lexicon):
            f.write(f"{word}\t{' '.join(lexicon[word])}\n")

    # 30 similarity pairs, SimLex-style columns: word1 word2 POS score
    sim_rng = random.Random(SEED + 1)
    pairs = []
    for topic in topics:
        nouns = TOPICS[topic]["nouns"]
        for i in range(3):
            a, b = sim_rng.sample(nouns, 2)
            pairs.append((a, b, round(sim_rng.uniform(6.5, 9.5), 2)))
    while len(pairs) < 27:
        t1, t2 = sim_rng.sample(topics, 2)
        a = sim_rng.choice(TOPICS[t1]["nouns"])
        b = sim_rng.choice(TOPICS[t2]["nouns"])
        pairs.append((a, b, round(sim_rng.uniform(0.3, 3.0), 2)))
    # out-of-vocabulary pairs exercise the exclusion accounting
    pairs += [("zebra", "cat", 7.1), ("king", "emperor", 8.2), ("unicorn", "dragon", 5.0)]
    with open(out / "similarity.tsv", "w", encoding="utf-8") as f:
        f.write("word1\tword2\tPOS\tSimLex999\n")
        for a, b, s in pairs:
            f.write(f"{a}\t{b}\tN\t{s}\n")

    # 20 analogy quadruples, Google format
    with open(out / "analogy.txt", "w", encoding="utf-8") as f:
        f.write(": noun-plural\n")
        for a, b in [("cat", "dog"), ("king", "queen"), ("river", "lake"), ("tower", "bridge"),
                     ("horse", "wolf"), ("tree", "flower")]:
            f.write(f"{a} {plural(a)[0]} {b} {plural(b)[0]}\n")
        f.write(": verb-past\n")
        for a, b in [("hunt", "jump"), ("rule", "defend"), ("paint", "clean"), ("grow", "bloom"),
                     ("walk", "play"), ("guard", "order")]:
            f.write(f"{a} {verb_forms(a)['past'][0]} {b} {verb_forms(b)['past'][0]}\n")
        f.write(": adj-superlative\n")
        for a, b in [("wild", "quick"), ("noble", "proud"), ("tall", "loud"), ("calm", "deep"),
                     ("green", "bright")]:
            f.write(f"{a} {adj_forms(a)['est'][0]} {b} {adj_forms(b)['est'][0]}\n")
        f.write(": oov\n")
        f.write("cat cats zebra zebras\n")
        f.write("rule ruled reign reigned\n")
        f.write("calm calmest serene serenest\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data")
