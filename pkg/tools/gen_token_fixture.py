#!/usr/bin/env python3
"""Generate the committed reference-tokenization fixture.

Tokenizes a diverse prompt list with transformers' CLIPTokenizer (the
HuggingFace Rust BPE engine, configured from our merge table in memory)
and freezes the resulting ids to tests/fixtures/reference_tokens.json.
The engine is an independent implementation: only the vocab/merge data
is shared, which is what a merge-table format defines.

Run once after regenerating the merge table.
"""

import json
import sys
from pathlib import Path

from transformers import CLIPTokenizer

import anatomy.bpe as bpe

PROMPTS = [
    "person",
    "white dog",
    "black cat",
    "large white dog in the garden",
    "the man in the red shirt on the left",
    "white shirt man",
    "man white shirt",
    "a woman holding an umbrella",
    "small brown dog sitting on a bench",
    "the second car from the right",
    "red bus",
    "blue truck parked near the gate",
    "person wearing a yellow jacket",
    "two children playing with a ball",
    "traffic light",
    "stop sign on the corner",
    "glass of orange juice",
    "plate of pizza on the table",
    "laptop computer",
    "open laptop on the desk",
    "bird flying over the lake",
    "horse standing in the field",
    "zebra behind the fence",
    "giraffe eating leaves",
    "elephant near the water",
    "striped shirt",
    "checkered tablecloth",
    "shiny silver car",
    "broken window",
    "empty bottle",
    "full glass of wine",
    "old wooden chair",
    "young boy with a skateboard",
    "tall building with many windows",
    "narrow path through the trees",
    "dog.",
    "a man, smiling",
    "it's a dog",
    "don't stop",
    "o'clock tower",
    "the dog's collar",
    "we're here",
    "they've left",
    "i'll go",
    "you'd see",
    "i'm ready",
    "2 dogs",
    "no. 7 bus",
    "route 66 sign",
    "apartment 3b",
    "blue-green car",
    "t-shirt with stripes",
    "semi-truck on the highway",
    "White   DOG",
    "UPPER case MIX",
    "MiXeD CaSe PrOmPt",
    "  leading and trailing spaces  ",
    "tabs\tand\tnewlines\nhere",
    "café terrace",
    "naïve painting",
    "snow ❄ flake",
    "dog 🐕 emoji",
    "the quick brown fox jumps over the lazy dog near the riverbank at sunset",
    "a very long referring expression describing the third person from the left wearing a dark blue jacket and holding a small black umbrella",
    "person person person person",
    "!!!",
    "...",
]


def main():
    src = Path(__file__).resolve().parents[1]
    table = bpe.load_merges(src / "src" / "anatomy" / "data" / "bpe_merges_48894.txt.gz")
    assert len(set(table.decoder)) == len(table.decoder), "vocab strings must be unique"

    vocab = {tok: i for i, tok in enumerate(table.decoder)}
    merges = [tuple(pair) for pair in table.merges]
    ref = CLIPTokenizer(vocab=vocab, merges=merges)

    entries = []
    mismatches = 0
    for prompt in PROMPTS:
        ref_ids = ref(prompt, add_special_tokens=True)["input_ids"]
        ours = [table.sot_id] + bpe.content_token_ids(table, prompt) + [table.eot_id]
        if ref_ids != ours:
            mismatches += 1
            print(f"MISMATCH {prompt!r}", file=sys.stderr)
            print(f"  ref : {ref_ids}", file=sys.stderr)
            print(f"  ours: {ours}", file=sys.stderr)
            print(f"  ref toks : {ref.convert_ids_to_tokens(ref_ids)}", file=sys.stderr)
        entries.append({"text": prompt, "ids": ref_ids})

    out = src / "tests" / "fixtures" / "reference_tokens.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"prompts": entries}, indent=1, ensure_ascii=False) + "\n")
    print(f"{len(entries)} prompts written, {mismatches} mismatches -> {out}", file=sys.stderr)
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
