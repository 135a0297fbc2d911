"""
Benchmark files and submission validation
=========================================

A benchmark is a manifest (frame list, units, intrinsics, object registry)
plus one ground-truth file per frame. Submissions are validated before any
scoring: missing frames are allowed (and scored as failures), malformed ones
block scoring.
"""

# %%
import json
import tempfile
from pathlib import Path

from hoieval.dataio import load_manifest, load_registry, load_submission, validate_submission
from hoieval.synth import SynthSpec, generate

root = Path(tempfile.mkdtemp())
generate(SynthSpec(track="object", frames=5, seed=1, rotation_deg=4.0), root)
print(sorted(p.name for p in root.iterdir()))
print(json.dumps(json.loads((root / "manifest.json").read_text())["frames"][:2]))

# %%
reg = load_registry(root / "objects")
for oid in reg:
    print(oid, "symmetries:", len(reg[oid].symmetries), "diameter: %.4f m" % reg[oid].diameter)

# %% [markdown]
# Drop one frame and poison another with a NaN.

# %%
doc = json.loads((root / "submission.json").read_text())
doc["frames"].pop("000004")
doc["frames"]["000001"]["t"][2] = float("nan")
(root / "bad.json").write_text(json.dumps(doc))
report, _ = validate_submission(load_manifest(root / "manifest.json"), load_submission(root / "bad.json"))
print("ok:", report.ok)
print(json.dumps(report.to_dict(), indent=1))
