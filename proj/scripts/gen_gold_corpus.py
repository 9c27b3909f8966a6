#!/usr/bin/env python3
"""Regenerates data/gold/gold_corpus.jsonl deterministically.

The bundled gold corpus: 811 records (one per repository) holding 1439
labeled URL mentions with class counts DatasetDirectLink=120,
DatasetLandingPage=678, Software=355, Other=286. Record sizes follow a fixed
bucket plan (20 records with 4 mentions, 60 with 3, 448 with 2, 283 with 1).
Spans are character offsets and every mention's span substring equals its
URL, which the loader re-validates.
"""

import json
import pathlib
import random

RNG = random.Random(20240819)

DISTRIBUTION = {
    "DatasetDirectLink": 120,
    "DatasetLandingPage": 678,
    "Software": 355,
    "Other": 286,
}
BUCKETS = [(4, 20), (3, 60), (2, 448), (1, 283)]

OWNER_WORDS = [
    "nlp", "vision", "graph", "deep", "open", "auto", "multi", "geo", "bio",
    "neuro", "speech", "text", "data", "ml", "rec", "time", "meta", "web",
    "sem", "stat", "eco", "astro", "med", "agri", "robo", "quant", "edu",
    "soc", "info", "net",
]
OWNER_SUFFIXES = ["lab", "group", "team", "works", "research", "ai", "dev",
                  "systems", "hub", "studio"]
NAME_WORDS = [
    "bench", "parser", "tagger", "ranker", "miner", "former", "net", "kit",
    "flow", "forge", "scope", "lens", "probe", "pilot", "craft", "stack",
    "mark", "track", "cast", "merge", "boost", "sense", "match", "score",
    "graph", "embed", "align", "route", "shift", "prime",
]
NAME_PREFIXES = [
    "fast", "deep", "auto", "multi", "cross", "hyper", "mini", "mega",
    "neo", "pro", "meta", "omni", "poly", "uni", "co", "re", "super", "ultra",
    "smart", "true",
]

HOST_WORDS = ["corpus", "mirror", "vault", "portal", "archive", "depot",
              "registry", "exchange", "commons", "atlas"]

FILE_WORDS = ["train", "test", "dev", "full", "raw", "clean", "v2", "mini",
              "large", "subset", "fold1", "interactions", "graph", "text",
              "features", "labels", "splits", "images", "audio", "meta"]

TOPICS = ["citation", "checkin", "review", "traffic", "weather", "protein",
          "retail", "news", "forum", "sensor", "movie", "music", "recipe",
          "flight", "housing", "energy", "crime", "sport", "health", "patent"]

SENTENCES = {
    "DatasetDirectLink": [
        "Download the processed {topic} data from {url} .",
        "The raw dumps can be fetched at {url} directly.",
        "Training archives are published at {url} for reproducibility.",
        "Grab the preprocessed splits here {url} before running the scripts.",
        "All {topic} records are packaged at {url} as a single archive.",
        "A compressed snapshot is served from {url} (about 1.2 GB).",
    ],
    "DatasetLandingPage": [
        "The {topic} benchmark is hosted at {url} with a full description.",
        "See the dataset page {url} to request access.",
        "Statistics and documentation live at {url} for the curious.",
        "The upstream collection is indexed at {url} together with baselines.",
        "We follow the official release at {url} without modification.",
        "Details about licensing and splits are at {url} as usual.",
        "The original {topic} corpus can be browsed at {url} online.",
    ],
    "Software": [
        "Our implementation builds on {url} heavily.",
        "The companion toolkit lives at {url} under an MIT license.",
        "Preprocessing reuses the pipeline from {url} with minor patches.",
        "Baselines were run with {url} at commit time.",
        "An earlier prototype is archived at {url} for reference.",
        "Evaluation scripts are adapted from {url} where possible.",
    ],
    "Other": [
        "More discussion can be found at {url} in the write-up.",
        "Background reading: {url} covers the theory.",
        "See {url} for the accompanying blog post.",
        "The authors' notes at {url} explain the motivation.",
        "A tutorial walk-through is available at {url} as well.",
        "License terms are mirrored at {url} verbatim.",
    ],
}

OPENERS = [
    "This repository accompanies our {topic} experiments.",
    "Code and assets for the {topic} study.",
    "Reference implementation used in the {topic} evaluation.",
    "Reproduction package for the {topic} benchmarks.",
    "Supplementary material for our {topic} analysis.",
    "",
]

UNICODE_OPENERS = [
    "Résumé of the {topic} évaluation suite.",
    "Naïve and tuned {topic} baselines side by side.",
    "µ-benchmark \U0001f4e6 for {topic} models.",
    "Zusammenfassung der {topic}–Experimente.",
]

CLOSERS = [
    "Please open an issue for questions.",
    "Results may differ slightly across platforms.",
    "Contributions are welcome.",
    "Tested on Linux only.",
    "",
]

GOWALLA = {
    "id": "loc-data/gowalla#1",
    "repo": "loc-data/gowalla",
    "context": (
        "Gowalla https://snap.stanford.edu/data/loc-gowalla.html : the "
        "pre-processed data that we used in the paper can be downloaded here "
        "http://dawenl.github.io/data/gowalla_pro.zip ."
    ),
    "mentions": [
        ("https://snap.stanford.edu/data/loc-gowalla.html", "DatasetLandingPage"),
        ("http://dawenl.github.io/data/gowalla_pro.zip", "DatasetDirectLink"),
    ],
}


def make_slugs(count):
    slugs = []
    seen = set()
    while len(slugs) < count:
        owner = RNG.choice(OWNER_WORDS) + "-" + RNG.choice(OWNER_SUFFIXES)
        name = RNG.choice(NAME_PREFIXES) + RNG.choice(NAME_WORDS)
        if RNG.random() < 0.3:
            name += "-" + RNG.choice(TOPICS)
        slug = owner + "/" + name
        if slug in seen or slug == GOWALLA["repo"]:
            slug = f"{owner}/{name}{len(slugs)}"
            if slug in seen:
                continue
        seen.add(slug)
        slugs.append(slug)
    return slugs


def make_url(label, slug, used):
    host = RNG.choice(HOST_WORDS)
    topic = RNG.choice(TOPICS)
    fname = RNG.choice(FILE_WORDS)
    num = RNG.randrange(100, 9900)
    owner, name = slug.split("/", 1)
    for _ in range(20):
        if label == "DatasetDirectLink":
            url = RNG.choice([
                f"http://files.{host}.test/{topic}/{fname}.zip",
                f"https://archive.{host}.example/{topic}-{fname}.tar.gz",
                f"http://{host}.example/downloads/{topic}_{fname}.csv.gz",
                f"https://data.{host}.test/{num}/{fname}.json",
            ])
        elif label == "DatasetLandingPage":
            url = RNG.choice([
                f"https://datasets.{host}.example/{topic}",
                f"https://hub.{host}.test/datasets/{topic}-{fname}",
                f"http://{host}.example/data/{topic}.html",
                f"https://archive.{host}.example/record/{num}",
                f"https://catalog.{host}.test/{topic}/{num}",
            ])
        elif label == "Software":
            url = RNG.choice([
                f"https://git.{host}.example/{owner}/{name}",
                f"https://forge.{host}.test/{owner}/{name}",
                f"http://{host}.example/{name}/releases",
                f"https://pkg.{host}.test/{name}/{num}",
            ])
        else:
            url = RNG.choice([
                f"https://blog.{host}.example/{topic}-{fname}",
                f"http://{host}.example/docs/{topic}.html",
                f"https://{host}.test/paper/{num}",
                f"https://wiki.{host}.example/{topic}",
            ])
        if url not in used:
            used.add(url)
            return url
        host = RNG.choice(HOST_WORDS)
        num = RNG.randrange(100, 9900)
    raise RuntimeError("could not build a unique URL")


def build_record(slug, labels):
    topic = RNG.choice(TOPICS)
    opener_pool = UNICODE_OPENERS if RNG.random() < 0.05 else OPENERS
    parts = [RNG.choice(opener_pool).format(topic=topic)]
    used = set()
    mentions = []
    text = parts[0]
    for label in labels:
        url = make_url(label, slug, used)
        sentence = RNG.choice(SENTENCES[label]).format(url=url, topic=topic)
        if text:
            text += " "
        start = len(text) + sentence.index(url)
        text += sentence
        mentions.append({"url": url, "start": start, "end": start + len(url),
                         "label": label})
    closer = RNG.choice(CLOSERS)
    if closer:
        text += " " + closer
    return {"id": slug + "#1", "repo": slug, "context": text,
            "mentions": mentions}


def main():
    sizes = []
    for size, count in BUCKETS:
        sizes.extend([size] * count)
    assert sum(sizes) == 1439 and len(sizes) == 811

    # the two-mention showcase record occupies one 2-mention slot
    sizes.remove(2)
    RNG.shuffle(sizes)

    labels = []
    remaining = dict(DISTRIBUTION)
    remaining["DatasetLandingPage"] -= 1  # consumed by the showcase record
    remaining["DatasetDirectLink"] -= 1
    for label, count in remaining.items():
        labels.extend([label] * count)
    RNG.shuffle(labels)
    assert len(labels) == 1437

    records = []
    gowalla_mentions = []
    for url, label in GOWALLA["mentions"]:
        start = GOWALLA["context"].index(url)
        gowalla_mentions.append({"url": url, "start": start,
                                 "end": start + len(url), "label": label})
    records.append({"id": GOWALLA["id"], "repo": GOWALLA["repo"],
                    "context": GOWALLA["context"], "mentions": gowalla_mentions})

    slugs = make_slugs(810)
    cursor = 0
    for slug, size in zip(slugs, sizes):
        records.append(build_record(slug, labels[cursor:cursor + size]))
        cursor += size
    assert cursor == 1437

    # self-check before writing
    total = 0
    counts = dict.fromkeys(DISTRIBUTION, 0)
    repos = set()
    for rec in records:
        repos.add(rec["repo"])
        last_end = 0
        for m in rec["mentions"]:
            assert rec["context"][m["start"]:m["end"]] == m["url"]
            assert m["start"] >= last_end
            last_end = m["end"]
            counts[m["label"]] += 1
            total += 1
    assert total == 1439, total
    assert len(records) == 811 and len(repos) == 811
    assert counts == DISTRIBUTION, counts

    out = pathlib.Path(__file__).resolve().parent.parent / "data/gold/gold_corpus.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records, {total} mentions, counts={counts}")


if __name__ == "__main__":
    main()
