#!/usr/bin/env python3
"""Regenerates data/fixtures/parser/malformed_outputs.jsonl.

Each line is one parser case: a raw model-output string plus the outcome the
repair pipeline must produce. Labels in expectations use the lowercase
underscore spelling; null means the prediction is kept with an unrecognized
label. Cases without a "predictions" key must fail with the given status.
"""

import json
import pathlib

FIG_OUTPUT = (
    '[{"URL": "https://snap.stanford.edu/data/loc-gowalla.html", '
    '"label": "dataset_landing_page"},'
    '{"URL": "http://dawenl.github.io/data/gowalla_pro.zip", '
    '"label": "dataset_direct_link"}]'
)

def ok(name, raw, preds):
    return {"name": name, "raw": raw,
            "expect": {"status": "parsed", "predictions": preds}}

def fail(name, raw, status):
    return {"name": name, "raw": raw, "expect": {"status": status}}

def p(url, label):
    return {"url": url, "label": label}

CASES = [
    ok("figure_two_url_output", FIG_OUTPUT,
       [p("https://snap.stanford.edu/data/loc-gowalla.html", "dataset_landing_page"),
        p("http://dawenl.github.io/data/gowalla_pro.zip", "dataset_direct_link")]),
    fail("refusal_ready_to_annotate",
         "Sure! I'm ready to annotate the URLs in the input. "
         "Please provide the input text.",
         "no_json_found"),
    ok("asserted_empty_array", "[]", []),
    ok("bare_single_object",
       '{"URL": "http://a.test/tool", "label": "software"}',
       [p("http://a.test/tool", "software")]),
    ok("preamble_here_is",
       'Sure! Here is the annotation: [{"URL": "http://a.test/d.zip", '
       '"label": "dataset_direct_link"}]',
       [p("http://a.test/d.zip", "dataset_direct_link")]),
    ok("code_fence_json",
       '```json\n[{"URL": "http://a.test/d.zip", "label": "dataset_direct_link"}]\n```',
       [p("http://a.test/d.zip", "dataset_direct_link")]),
    ok("code_fence_plain",
       '```\n[{"URL": "http://a.test/x", "label": "other"}]\n```',
       [p("http://a.test/x", "other")]),
    ok("code_fence_crlf",
       '```json\r\n[{"URL": "http://a.test/x", "label": "other"}]\r\n```',
       [p("http://a.test/x", "other")]),
    ok("newline_separated_objects",
       '{"URL": "http://a.test/1", "label": "other"}\n'
       '{"URL": "http://a.test/2", "label": "software"}',
       [p("http://a.test/1", "other"), p("http://a.test/2", "software")]),
    ok("comma_joined_objects_no_array",
       '{"URL": "http://a.test/1", "label": "other"}, '
       '{"URL": "http://a.test/2", "label": "other"}',
       [p("http://a.test/1", "other"), p("http://a.test/2", "other")]),
    ok("trailing_comma_in_array",
       '[{"URL": "http://a.test/x", "label": "other"},]',
       [p("http://a.test/x", "other")]),
    ok("trailing_comma_in_object",
       '[{"URL": "http://a.test/x", "label": "other",}]',
       [p("http://a.test/x", "other")]),
    ok("truncated_final_object",
       '[{"URL": "http://a.test/1", "label": "software"},{"URL": "http://a.test/2", "la',
       [p("http://a.test/1", "software")]),
    ok("prose_after_array",
       '[{"URL": "http://a.test/x", "label": "other"}] I hope this helps!',
       [p("http://a.test/x", "other")]),
    ok("prose_both_sides",
       'Here you go: [{"URL": "http://a.test/x", "label": "other"}] '
       'Let me know if you need more.',
       [p("http://a.test/x", "other")]),
    ok("output_prefix",
       'Output: [{"URL": "http://a.test/x", "label": "other"}]',
       [p("http://a.test/x", "other")]),
    ok("first_balanced_array_wins",
       'Annotations: [{"URL": "http://a.test/1", "label": "other"}] and also '
       '[{"URL": "http://a.test/2", "label": "other"}]',
       [p("http://a.test/1", "other")]),
    ok("alias_lowercase_url",
       '[{"url": "http://a.test/x", "label": "software"}]',
       [p("http://a.test/x", "software")]),
    ok("alias_link_and_class",
       '[{"link": "http://a.test/x", "class": "Software"}]',
       [p("http://a.test/x", "software")]),
    ok("alias_type_key",
       '[{"URL": "http://a.test/x", "type": "other"}]',
       [p("http://a.test/x", "other")]),
    ok("label_spelled_with_spaces",
       '[{"URL": "http://a.test/x", "label": "Dataset Landing Page"}]',
       [p("http://a.test/x", "dataset_landing_page")]),
    ok("label_upper_snake",
       '[{"URL": "http://a.test/x", "label": "DATASET_DIRECT_LINK"}]',
       [p("http://a.test/x", "dataset_direct_link")]),
    ok("unknown_label_kept",
       '[{"URL": "http://a.test/x", "label": "weblink"}]',
       [p("http://a.test/x", None)]),
    ok("missing_label_kept",
       '[{"URL": "http://a.test/x"}]',
       [p("http://a.test/x", None)]),
    ok("numeric_label_treated_as_missing",
       '[{"URL": "http://a.test/x", "label": 3}]',
       [p("http://a.test/x", None)]),
    ok("exact_duplicates_deduplicated",
       '[{"URL": "http://a.test/x", "label": "other"},'
       '{"URL": "http://a.test/x", "label": "other"}]',
       [p("http://a.test/x", "other")]),
    ok("same_url_different_labels_kept",
       '[{"URL": "http://a.test/x", "label": "other"},'
       '{"URL": "http://a.test/x", "label": "software"}]',
       [p("http://a.test/x", "other"), p("http://a.test/x", "software")]),
    ok("extra_keys_ignored",
       '[{"URL": "http://a.test/x", "label": "other", "confidence": 0.9, "note": "??"}]',
       [p("http://a.test/x", "other")]),
    ok("escaped_quotes_in_url",
       '[{"URL": "http://a.test/x?q=\\"v\\"", "label": "other"}]',
       [p('http://a.test/x?q="v"', "other")]),
    ok("non_ascii_url",
       '[{"URL": "http://a.test/über", "label": "other"}]',
       [p("http://a.test/über", "other")]),
    fail("objects_without_urls", '[{"label": "other"}]', "empty_after_repair"),
    fail("url_not_a_string", '[{"URL": 42, "label": "other"}]', "empty_after_repair"),
    fail("nested_arrays_have_no_objects",
         '[[{"URL": "http://a.test/x", "label": "other"}]]',
         "empty_after_repair"),
    fail("empty_string", "", "no_json_found"),
    fail("whitespace_only", " \n\t ", "no_json_found"),
    fail("pure_prose", "The URLs look like datasets to me.", "no_json_found"),
    fail("unterminated_string_literal", '[{"URL": "http://a.test/x',
         "unrecoverable_syntax"),
    fail("brackets_never_close", '[{"URL": "http://a.test/x", "label": "other"}',
         "parsed_see_note"),
]

# The final case actually recovers: the object closes even though the array
# does not, so the object scan rescues it.
CASES[-1] = ok("array_never_closes_object_rescued",
               '[{"URL": "http://a.test/x", "label": "other"}',
               [p("http://a.test/x", "other")])


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / \
        "data/fixtures/parser/malformed_outputs.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for case in CASES:
            f.write(json.dumps(case, ensure_ascii=False) + "\n")
    print(f"wrote {len(CASES)} cases to {out}")


if __name__ == "__main__":
    main()
