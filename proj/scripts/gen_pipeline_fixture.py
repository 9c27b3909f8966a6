#!/usr/bin/env python3
"""Regenerates the end-to-end pipeline fixture under data/fixtures/pipeline/.

Phase 1 (always): writes corpus.jsonl, pool.jsonl, config.json and
canned_outputs.json (record id -> canned raw model reply).

Phase 2 (--hed PATH): renders prompts with the real binary to learn each
prompt's fingerprint, writes replay.jsonl from the canned replies, runs the
full pipeline once, and freezes report.csv / report.txt next to the fixture.

Run phase 2 after any change to the prompt templates or the fixture corpus,
otherwise the stored fingerprints will no longer match.
"""

import argparse
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent.parent / "data/fixtures/pipeline"


def rec(rid, context, mentions):
    """mentions: list of (url, label). Spans are computed from the context."""
    out = []
    cursor = 0
    for url, label in mentions:
        start = context.index(url, cursor)
        out.append({"url": url, "start": start, "end": start + len(url),
                    "label": label})
        cursor = start + len(url)
    return {"id": rid + "#1", "repo": rid, "context": context, "mentions": out}


def pred_json(*pairs):
    objs = []
    for url, label in pairs:
        if label is None:
            objs.append('{"URL": "%s"}' % url)
        else:
            objs.append('{"URL": "%s", "label": "%s"}' % (url, label))
    return "[" + ",".join(objs) + "]"


CORPUS = [
    rec("fx/r01",
        "Download the processed train split from http://files.alpha.test/train.zip "
        "and read the dataset description at https://hub.alpha.test/datasets/train first.",
        [("http://files.alpha.test/train.zip", "DatasetDirectLink"),
         ("https://hub.alpha.test/datasets/train", "DatasetLandingPage")]),
    rec("fx/r02",
        "Our tokenizer wraps the reference implementation at "
        "https://git.beta.example/beta/tool with a thin CLI.",
        [("https://git.beta.example/beta/tool", "Software")]),
    rec("fx/r03",
        "The news benchmark is documented at http://gamma.example/data/news.html "
        "including licensing terms.",
        [("http://gamma.example/data/news.html", "DatasetLandingPage")]),
    rec("fx/r04",
        "A full archive is served from https://archive.delta.example/news-full.tar.gz "
        "(about 400 MB).",
        [("https://archive.delta.example/news-full.tar.gz", "DatasetDirectLink")]),
    rec("fx/r05",
        "Grab the JSON dump at https://data.eps.test/900/full.json before running "
        "the loader.",
        [("https://data.eps.test/900/full.json", "DatasetDirectLink")]),
    rec("fx/r06",
        "Background reading on the grid model lives at https://wiki.zeta.example/energy "
        "for the curious.",
        [("https://wiki.zeta.example/energy", "Other")]),
    rec("fx/r07",
        "The motivation is spelled out at https://blog.eta.example/energy-notes in "
        "some depth.",
        [("https://blog.eta.example/energy-notes", "Other")]),
    rec("fx/r08",
        "Browse the collection at https://catalog.theta.test/crime/101 or fetch the "
        "raw table from http://theta.example/downloads/crime_raw.csv.gz directly.",
        [("https://catalog.theta.test/crime/101", "DatasetLandingPage"),
         ("http://theta.example/downloads/crime_raw.csv.gz", "DatasetDirectLink")]),
    rec("fx/r09",
        "Mining scripts are maintained at https://forge.iota.test/iota/miner under "
        "a BSD license.",
        [("https://forge.iota.test/iota/miner", "Software")]),
    rec("fx/r10",
        "We use the official splits from https://datasets.kappa.example/movie "
        "without modification.",
        [("https://datasets.kappa.example/movie", "DatasetLandingPage")]),
    rec("fx/r11",
        "Statistics for the corpus are published at https://catalog.lam.test/forum/77 "
        "by the maintainers.",
        [("https://catalog.lam.test/forum/77", "DatasetLandingPage")]),
    rec("fx/r12",
        "Evaluation reuses the harness from https://forge.mu.test/mu/harness with "
        "no changes.",
        [("https://forge.mu.test/mu/harness", "Software")]),
    rec("fx/r13",
        "The packaged features can be downloaded at "
        "http://nu.example/downloads/sensor_features.csv.gz as one file.",
        [("http://nu.example/downloads/sensor_features.csv.gz", "DatasetDirectLink")]),
    rec("fx/r14",
        "A tutorial walk-through is available at https://xi.test/paper/4242 as well.",
        [("https://xi.test/paper/4242", "Other")]),
    rec("fx/r15",
        "See the upstream release at https://datasets.omicron.example/recipe for "
        "access conditions.",
        [("https://datasets.omicron.example/recipe", "DatasetLandingPage")]),
    rec("fx/r16",
        "Baselines were produced with https://git.pi.example/pi/ranker at commit "
        "time.",
        [("https://git.pi.example/pi/ranker", "Software")]),
    rec("fx/r17",
        "The flight collection is indexed at https://hub.rho.test/datasets/flight "
        "together with baselines.",
        [("https://hub.rho.test/datasets/flight", "DatasetLandingPage")]),
    rec("fx/r18",
        "License terms are mirrored at https://sigma.test/paper/88 verbatim.",
        [("https://sigma.test/paper/88", "Other")]),
    rec("fx/r19",
        "The health benchmark is hosted at http://tau.example/data/health.html with "
        "a full description.",
        [("http://tau.example/data/health.html", "DatasetLandingPage")]),
    rec("fx/r20",
        "Nightly dumps land at https://data.ups.test/1100/splits.json on a weekly "
        "cadence.",
        [("https://data.ups.test/1100/splits.json", "DatasetDirectLink")]),
]

POOL = [
    rec("loc-data/gowalla",
        "Gowalla https://snap.stanford.edu/data/loc-gowalla.html : the pre-processed "
        "data that we used in the paper can be downloaded here "
        "http://dawenl.github.io/data/gowalla_pro.zip .",
        [("https://snap.stanford.edu/data/loc-gowalla.html", "DatasetLandingPage"),
         ("http://dawenl.github.io/data/gowalla_pro.zip", "DatasetDirectLink")]),
    rec("pool/suite",
        "Benchmark drivers live at https://git.pool.example/pool/suite and run "
        "unmodified.",
        [("https://git.pool.example/pool/suite", "Software")]),
    rec("pool/registry",
        "All tasks are catalogued at https://catalog.pool.test/tasks/1 with splits.",
        [("https://catalog.pool.test/tasks/1", "DatasetLandingPage")]),
    rec("pool/notes",
        "Design notes are kept at https://wiki.pool.example/notes for contributors.",
        [("https://wiki.pool.example/notes", "Other")]),
    rec("pool/dumps",
        "Fetch the combined dump from http://files.pool.test/combined.zip once.",
        [("http://files.pool.test/combined.zip", "DatasetDirectLink")]),
    rec("pool/extra",
        "The extra corpus page https://hub.pool.test/datasets/extra links the "
        "loader at https://git.pool.example/pool/loader too.",
        [("https://hub.pool.test/datasets/extra", "DatasetLandingPage"),
         ("https://git.pool.example/pool/loader", "Software")]),
]

CANNED = {
    "fx/r01#1": pred_json(
        ("http://files.alpha.test/train.zip", "dataset_direct_link"),
        ("https://hub.alpha.test/datasets/train", "dataset_landing_page")),
    "fx/r02#1": ("Sure! Here is the annotation you asked for:\n" +
                 pred_json(("https://git.beta.example/beta/tool", "software"))),
    "fx/r03#1": ("```json\n" +
                 pred_json(("http://gamma.example/data/news.html",
                            "dataset_landing_page")) + "\n```"),
    "fx/r04#1": ('[{"URL": "https://archive.delta.example/news-full.tar.gz", '
                 '"label": "dataset_landing_page"},]'),
    "fx/r05#1": ('{"URL": "https://data.eps.test/900/full", '
                 '"label": "dataset_direct_link"}\n'),
    "fx/r06#1": "I cannot find any URLs to annotate in the given input text.",
    "fx/r07#1": "[]",
    "fx/r08#1": ('[{"URL": "https://catalog.theta.test/crime/101", '
                 '"label": "dataset_landing_page"},{"URL": "http://theta.exam'),
    "fx/r09#1": pred_json(
        ("https://forge.iota.test/iota/miner", "software"),
        ("https://unrelated.example/promo", "other")),
    "fx/r10#1": pred_json(("https://datasets.kappa.example/movie", "weblink")),
    "fx/r11#1": pred_json(("https://catalog.lam.test/forum/77",
                           "dataset_landing_page")),
    "fx/r12#1": pred_json(("https://forge.mu.test/mu/harness", "software")),
    "fx/r13#1": pred_json(("http://nu.example/downloads/sensor_features.csv.gz",
                           "dataset_direct_link")),
    "fx/r14#1": pred_json(("https://xi.test/paper/4242", "other")),
    "fx/r15#1": pred_json(("https://datasets.omicron.example/recipe",
                           "dataset_landing_page")),
    "fx/r16#1": pred_json(("https://git.pi.example/pi/ranker", "software")),
    "fx/r17#1": pred_json(("https://hub.rho.test/datasets/flight",
                           "dataset_landing_page")),
    "fx/r18#1": pred_json(("https://sigma.test/paper/88", "other")),
    "fx/r19#1": (pred_json(("http://tau.example/data/health.html",
                            "dataset_landing_page")) +
                 "\nI hope this helps with your annotation project!"),
    "fx/r20#1": pred_json(("https://data.ups.test/1100/splits.json",
                           "dataset_direct_link")),
}

CONFIG = {
    "corpus": "corpus.jsonl",
    "example_pool": "pool.jsonl",
    "template_dir": "../../templates",
    "rules": "../../rules/preamble_rules.json",
    "task": "e+cl",
    "mode": "static",
    "static_examples": ["loc-data/gowalla#1", "pool/suite#1",
                        "pool/registry#1", "pool/notes#1"],
    "min_ratio": 0.0,
    "client": {
        "endpoint": "http://replay.invalid/v1/chat/completions",
        "model": "fixture-7b",
        "max_tokens": 512,
        "temperature": 0.0,
        "timeout_seconds": 30.0,
        "max_retries": 2,
        "max_in_flight": 4,
    },
    "backend": "replay",
    "replay_store": "replay.jsonl",
    "output_dir": "out",
    "seed": 7,
}


def write_jsonl(path, rows):
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def phase1():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    write_jsonl(FIXTURE_DIR / "corpus.jsonl", CORPUS)
    write_jsonl(FIXTURE_DIR / "pool.jsonl", POOL)
    assert set(CANNED) == {r["id"] for r in CORPUS}
    with (FIXTURE_DIR / "canned_outputs.json").open("w", encoding="utf-8") as f:
        json.dump(CANNED, f, ensure_ascii=False, indent=2)
        f.write("\n")
    with (FIXTURE_DIR / "config.json").open("w", encoding="utf-8") as f:
        json.dump(CONFIG, f, indent=2)
        f.write("\n")
    if not (FIXTURE_DIR / "replay.jsonl").exists():
        (FIXTURE_DIR / "replay.jsonl").write_text("")
    print(f"phase 1: wrote corpus ({len(CORPUS)}), pool ({len(POOL)}), "
          f"config, canned outputs under {FIXTURE_DIR}")


def phase2(hed):
    with tempfile.TemporaryDirectory() as tmp:
        prompt_dir = pathlib.Path(tmp) / "prompts"
        subprocess.run([hed, "prompt", "--config", str(FIXTURE_DIR / "config.json"),
                        "--out-dir", str(prompt_dir)], check=True)
        replay = []
        with (prompt_dir / "prompts.jsonl").open(encoding="utf-8") as f:
            for line in f:
                row = json.loads(line)
                replay.append({"fingerprint": row["fingerprint"],
                               "raw": CANNED[row["id"]]})
        write_jsonl(FIXTURE_DIR / "replay.jsonl", replay)

        run_dir = pathlib.Path(tmp) / "run"
        subprocess.run([hed, "pipeline", "--config", str(FIXTURE_DIR / "config.json"),
                        "--out-dir", str(run_dir)], check=True)
        for name in ("report.csv", "report.txt"):
            shutil.copyfile(run_dir / name, FIXTURE_DIR / name)
        print(f"phase 2: wrote replay.jsonl ({len(replay)} entries) and froze "
              f"report.csv / report.txt")
        print((FIXTURE_DIR / "report.csv").read_text(), end="")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hed", help="path to the built hed binary (enables phase 2)")
    args = ap.parse_args()
    phase1()
    if args.hed:
        phase2(args.hed)
    else:
        print("phase 2 skipped (pass --hed to refresh replay.jsonl and reports)")


if __name__ == "__main__":
    sys.exit(main())
