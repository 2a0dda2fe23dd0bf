#!/usr/bin/env python3
# Copyright 2026 The hazlens Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the offline fixture set under fixtures/.

Writes ten small PNG site images, the approved dataset, a draft-only dataset
for bootstrap and gate tests, and the stub specs for two vision models, an
embedder and a judge. Output is deterministic.
"""

import hashlib
import json
import pathlib
import re
import struct
import zlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def png(width, height, seed):
    """A deterministic RGB gradient PNG; `seed` varies the palette."""
    rows = []
    for y in range(height):
        row = bytearray([0])
        for x in range(width):
            row += bytes(((x * 16 + seed * 37) % 256, (y * 16 + seed * 59) % 256, (seed * 97 + x * y) % 256))
        rows.append(bytes(row))
    raw = b"".join(rows)

    def chunk(kind, data):
        body = kind + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")


HAZARD_SPLIT = re.compile(r"Hazard(?: No\.)? \d+:")
FIELD = re.compile(r"(Severity|Explanation|Suggestion):")


def structure(text):
    """Splits a well-formed report written in the fixture grammar."""
    head, *blocks = HAZARD_SPLIT.split(text.strip())
    summary = head.split("Summary:", 1)[1].strip()
    hazards = []
    for i, block in enumerate(blocks, start=1):
        parts = FIELD.split(block)
        fields = dict(zip(parts[1::2], (p.strip() for p in parts[2::2])))
        hazards.append({
            "index": i,
            "name": parts[0].strip().rstrip("."),
            "severity": int(re.match(r"\d+", fields["Severity"]).group()),
            "explanation": fields["Explanation"],
            "suggestion": fields["Suggestion"],
        })
    return {"summary": summary, "hazards": hazards, "raw_text": text.strip()}


def sample_outputs(name, kind):
    return (FIX / "sample_outputs" / f"{name}_{kind}.txt").read_text().strip()


# (record id, ground truth, alpha output, beta output or None for a failure)
SCENES = [
    ("site-01", sample_outputs("gpt4o", "ground_truth"), sample_outputs("gpt4o", "prediction"),
     "Summary: Open trench near an excavator. Hazard 1: Open trench. Severity: 8/10. "
     "Explanation: Workers stand at the unprotected edge. Suggestion: Fence the trench edge."),
    ("site-02", sample_outputs("gemini15pro", "ground_truth"), sample_outputs("gemini15pro", "prediction"),
     "Summary: Ladder use at height. Hazard 1: Ladder not secured. Severity: 7/10. "
     "Explanation: The ladder base may slip. Suggestion: Tie off the ladder or use a spotter."),
    ("site-03", sample_outputs("llama32_11b_vision", "ground_truth"), sample_outputs("llama32_11b_vision", "prediction"),
     "Summary: Grinding sparks and missing goggles. Hazard 1: Sparks near debris. Severity: 6. "
     "Explanation: Sparks can ignite nearby waste. Suggestion: Remove combustible waste. "
     "Hazard 2: Missing eye protection. Severity: 7. Explanation: Fragments can strike the eyes. "
     "Suggestion: Require safety goggles."),
    ("site-04", sample_outputs("internvl2_8b", "ground_truth"), sample_outputs("internvl2_8b", "prediction"),
     "Summary: Worker handling cables. Hazard 1: Electrocution. Severity: 9/10. "
     "Explanation: Cables may be live. Suggestion: Isolate power before work."),
    ("site-05",
     "Summary: Scaffold platform without guardrails; loose planks. Hazard No. 1: Missing guardrails on scaffold. "
     "Severity: 8. Explanation: Workers on the upper platform have no edge protection. Suggestion: Install "
     "guardrails and toe boards on all open sides. Hazard No. 2: Loose scaffold planks. Severity: 7. "
     "Explanation: Unsecured planks can shift and cause a fall or collapse. Suggestion: Secure planks and "
     "inspect the scaffold before each shift.",
     "Summary: Scaffold edge exposure and loose planks. Hazard No. 1: Unprotected scaffold edge Severity: 8 "
     "Explanation: No guardrails are visible on the working platform. Suggestion: Fit guardrails before work "
     "resumes. Hazard No. 2: Loose planks Severity: 6 Explanation: Planks are not clipped to the frame. "
     "Suggestion: Clip or tie every plank.",
     "Summary: Scaffold in use. Hazard 1: Scaffold collapse. Severity: 5. Explanation: The frame looks "
     "overloaded. Suggestion: Reduce the load on the platform."),
    ("site-06",
     "Summary: Fluid spill on walkway; debris near stairs. Hazard No. 1: Fluid spill on walkway. Severity: 5. "
     "Explanation: An oily spill crosses the main walkway. Suggestion: Clean the spill and place absorbent "
     "material. Hazard No. 2: Debris near stairs. Severity: 4. Explanation: Offcuts lie at the bottom of the "
     "stairs. Suggestion: Clear debris and keep access routes free.",
     "Summary: Slippery walkway. Hazard No. 1: Spill on walkway Severity: 5 Explanation: Liquid on the floor "
     "can cause slips. Suggestion: Clean up the spill and add warning signs.",
     "Summary: Housekeeping issues. Hazard 1: Debris near stairs. Severity: 4/10. Explanation: Waste is piled "
     "at the stair base. Suggestion: Remove waste daily."),
    ("site-07",
     "Summary: Welding beside stacked timber; no fire extinguisher. Hazard No. 1: Welding near flammable "
     "materials. Severity: 9. Explanation: Hot slag can ignite the timber stack. Suggestion: Move combustibles "
     "away and use fire blankets. Hazard No. 2: No fire extinguisher nearby. Severity: 6. Explanation: A "
     "fire could not be controlled quickly. Suggestion: Place an extinguisher within reach of the work area.",
     "Summary: Hot work next to timber. Hazard No. 1: Welding near flammable materials Severity: 9 "
     "Explanation: Sparks are landing close to the timber. Suggestion: Relocate the timber and assign a fire "
     "watch.",
     None),
    ("site-08",
     "Summary: Roofer without helmet or harness. Hazard No. 1: Missing fall protection on roof. Severity: 9. "
     "Explanation: The worker is near the roof edge without a harness. Suggestion: Provide a harness and "
     "anchor point. Hazard No. 2: PPE non-compliance (no helmet). Severity: 6. Explanation: The worker is not "
     "wearing a helmet. Suggestion: Enforce helmet use on site.",
     "Summary: Roof work without PPE. Hazard No. 1: No harness at roof edge Severity: 9 Explanation: A fall "
     "from the roof edge is likely to be fatal. Suggestion: Use a harness tied to an anchor. Hazard No. 2: "
     "Missing helmet Severity: 5 Explanation: Head protection is absent. Suggestion: Issue helmets.",
     "Summary: Worker on roof. Hazard 1: Fall from roof. Severity: 8/10. Explanation: The worker is close to "
     "the edge. Suggestion: Install edge protection."),
    ("site-09",
     "Summary: Crane lifting during a thunderstorm; poor visibility. Hazard No. 1: Lifting during thunderstorm. "
     "Severity: 9. Explanation: Lightning and wind make crane operation unsafe. Suggestion: Suspend lifting "
     "until the storm passes. Hazard No. 2: Poor visibility. Severity: 6. Explanation: Rain limits the "
     "operator's view of the load. Suggestion: Use a signaller and stop work when visibility drops.",
     "Summary: Adverse weather during lifting. Hazard No. 1: Thunderstorm during crane lift Severity: 8 "
     "Explanation: Lightning risk to the crane and crew. Suggestion: Stop lifting in storms.",
     "Summary: No hazards are present."),
    ("site-10",
     "Summary: Jackhammer use without hearing protection; dust cloud. Hazard No. 1: Excessive noise and "
     "vibration. Severity: 6. Explanation: The operator has no hearing protection. Suggestion: Provide "
     "earmuffs and rotate operators. Hazard No. 2: Dust exposure. Severity: 5. Explanation: Concrete dust is "
     "not suppressed. Suggestion: Use water suppression and dust masks.",
     "Summary: Noise and dust from breaking concrete. Hazard No. 1: Noise exposure Severity: 6 Explanation: "
     "Jackhammer noise can damage hearing. Suggestion: Issue hearing protection. Hazard No. 2: Dust Severity: "
     "5 Explanation: Silica dust is visible. Suggestion: Wet the surface while breaking.",
     "Summary: Concrete breaking. Hazard 1: Vibration exposure. Severity: 5. Explanation: Prolonged "
     "jackhammer use transmits vibration. Suggestion: Limit exposure time."),
]

# Drafts for the bootstrap and review flows: images only.
DRAFT_IDS = ["draft-01", "draft-02", "draft-03"]


def write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def main():
    images = FIX / "dataset" / "images"
    images.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for i, rid in enumerate([s[0] for s in SCENES] + DRAFT_IDS, start=1):
        data = png(16, 12, i)
        (images / f"{rid}.png").write_bytes(data)
        hashes[rid] = hashlib.sha256(data).hexdigest()

    with open(FIX / "dataset" / "dataset.jsonl", "w") as out:
        for rid, gt, _, _ in SCENES:
            rec = {"record_id": rid, "image_ref": f"images/{rid}.png", "ground_truth": structure(gt),
                   "review_status": "approved", "failure_labels": []}
            out.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")

    with open(FIX / "dataset" / "drafts.jsonl", "w") as out:
        for rid in DRAFT_IDS:
            rec = {"record_id": rid, "image_ref": f"images/{rid}.png", "ground_truth": None,
                   "review_status": "draft", "failure_labels": []}
            out.write(json.dumps(rec, sort_keys=True) + "\n")

    alpha = {"latency_s": 1.0, "latency_jitter_s": 0.5, "completions": [
        {"image_sha256": hashes[rid], "text": a} for rid, _, a, _ in SCENES]}
    # The bootstrap model drafts ground truth for the draft images.
    for i, rid in enumerate(DRAFT_IDS):
        alpha["completions"].append({"image_sha256": hashes[rid], "text": SCENES[4 + i][1]})
    beta = {"latency_s": 0.4, "latency_jitter_s": 0.2, "completions": []}
    for rid, _, _, b in SCENES:
        if b is None:
            # A refusal with no report structure; cached like any completion,
            # so reruns stay call-free while the sample is still excluded.
            beta["completions"].append({"image_sha256": hashes[rid],
                                        "text": "I am unable to assess this image."})
        else:
            beta["completions"].append({"image_sha256": hashes[rid], "text": b})
    write_json(FIX / "stubs" / "vlm_alpha.json", alpha)
    write_json(FIX / "stubs" / "vlm_beta.json", beta)

    write_json(FIX / "stubs" / "embedder.json", {"embedding": {"dim": 32}})

    judge = {"default_text": '{"completeness": 4, "accuracy": 4, "clarity": 5}', "completions": [
        {"prompt_contains": "Summary: No hazards are present.",
         "text": 'Scores follow. {"completeness": 1, "accuracy": 1, "clarity": 4}'},
        {"prompt_contains": "Hazard No. 1: Scaffold collapse",
         "text": "The candidate is too short to judge."},
        {"prompt_contains": "Hazard No. 1: Electrocution\nSeverity: 8",
         "text": '```json\n{"completeness": 3, "accuracy": 5, "clarity": 4}\n```'},
        {"prompt_contains": "Hazard No. 3: Electrical Equipment",
         "text": '{"completeness": 3, "accuracy": 3, "clarity": 4}'},
        {"prompt_contains": "Hazard No. 1: Open excavation",
         "text": '{"completeness": 5, "accuracy": 4, "clarity": 4}'},
    ]}
    write_json(FIX / "stubs" / "judge.json", judge)


if __name__ == "__main__":
    main()
