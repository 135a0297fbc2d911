"""Score reports, threshold-curve tables and leaderboards."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import EvalError, MixedTracks, NoCurveData
from .human_metrics import summarize_human_errors
from .joint_metrics import summarize_joint_errors
from .object_metrics import summarize_object_errors

# Ranking policy per track: (aggregate key, descending?)
RANK_KEYS = {
    "object": ("AR-all", True),
    "human": ("MPJPE-PA", False),
    "joint": ("SMPL+Object", False),
}
CURVE_FILES = {
    "MSSD": "mssd_recall.csv",
    "MSPD": "mspd_recall.csv",
    "RE": "re_recall.csv",
    "PCK": "pck_curve.csv",
}


@dataclass
class ScoreReport:
    track: str
    name: str
    rows: list  # dicts, one per scored frame, sorted by frame_id
    missing: list
    aggregates: dict
    curves: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema_version": 1,
            "track": self.track,
            "name": self.name,
            "frames": self.rows,
            "missing_frames": self.missing,
            "aggregates": self.aggregates,
            "curves": self.curves,
            "provenance": self.provenance,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"

    def write(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["track"], doc.get("name", ""), doc["frames"], doc.get("missing_frames", []),
                   doc["aggregates"], doc.get("curves", {}), doc.get("provenance", {}))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def config_hash(config):
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _object_rows(score):
    return [{"frame_id": r.frame_id, "object_id": r.object_id, "MSSD": r.mssd, "MSPD": r.mspd,
             "RE": r.re, "diameter": r.diameter} for r in score.rows]


def _human_rows(score):
    return [{"frame_id": r.frame_id, "MPJPE": r.mpjpe, "MPJPE-PA": r.mpjpe_pa, "PCK": r.pck,
             "AUC": r.auc, "MPJAE": r.mpjae, "MPJAE-PA": r.mpjae_pa} for r in score.rows]


def _joint_rows(score):
    rows = []
    for r in score.rows:
        a = r.alignment
        rows.append({"frame_id": r.frame_id, "SMPL": r.smpl_chamfer, "Object": r.object_chamfer,
                     "alignment": {"scale": float(a.scale), "R": np.asarray(a.rotation).ravel().tolist(),
                                   "t": np.asarray(a.translation).tolist()}})
    return rows


def recompute_aggregates(track, rows, missing, agg="median"):
    """Aggregates recomputed from serialised rows (used as an emit-time check)."""
    from types import SimpleNamespace as NS

    if track == "object":
        objs = [NS(mssd=r["MSSD"], mspd=r["MSPD"], re=r["RE"], diameter=r["diameter"]) for r in rows]
        return summarize_object_errors(objs, missing, agg)[0]
    if track == "human":
        # PCK curve is not stored per row; PCK/AUC columns are enough here.
        objs = [NS(mpjpe=r["MPJPE"], mpjpe_pa=r["MPJPE-PA"], pck=r["PCK"], auc=r["AUC"],
                   mpjae=r["MPJAE"], mpjae_pa=r["MPJAE-PA"], pck_curve=np.zeros(201)) for r in rows]
        return summarize_human_errors(objs, missing)[0]
    objs = [NS(smpl_chamfer=r["SMPL"], object_chamfer=r["Object"]) for r in rows]
    return _joint_aggregates(summarize_joint_errors(objs, missing))


def _joint_aggregates(agg):
    agg = dict(agg)
    if agg["SMPL"] is None:
        agg["SMPL+Object"] = None
    else:
        agg["SMPL+Object"] = (agg["SMPL"] + agg["Object"]) / 2.0
    return agg


def build_report(track, score, name="", provenance=None, agg="median"):
    """Wrap a track score into a ScoreReport and verify its aggregates."""
    rows = {"object": _object_rows, "human": _human_rows, "joint": _joint_rows}[track](score)
    aggregates = dict(score.aggregates)
    if track == "joint":
        aggregates = _joint_aggregates(aggregates)
    aggregates["frames_scored"] = len(rows)
    aggregates["frames_missing"] = len(score.missing)
    check = recompute_aggregates(track, rows, score.missing, agg)
    for key, val in check.items():
        got = aggregates.get(key)
        if val is None or got is None:
            consistent = val == got
        else:
            consistent = abs(val - got) <= 1e-9 * max(1.0, abs(val))
        if not consistent:
            raise EvalError(f"aggregate {key!r} does not match its rows ({got!r} vs {val!r})")
    return ScoreReport(track, name, rows, list(score.missing), aggregates, score.curves,
                       provenance or {"tool_version": __version__})


def emit_curves(report: ScoreReport, out_dir):
    """Write one CSV (threshold, value) table per curve in the report.

    Raises:
        NoCurveData: the report carries no curves (joint track).
    """
    if not report.curves:
        raise NoCurveData(f"no threshold curves for the {report.track} track")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for key in sorted(report.curves):
        curve = report.curves[key]
        path = out_dir / CURVE_FILES.get(key, f"{key.lower()}_curve.csv")
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"threshold_{curve['unit']}", "value"])
            for th, val in zip(curve["thresholds"], curve["values"]):
                w.writerow([repr(float(th)), repr(float(val))])
        written.append(path)
    return written


def leaderboard(reports, key=None, descending=None):
    """Rank reports of one track.

    Object reports sort by AR-all (higher first), human by MPJPE-PA and joint
    by the mean of the SMPL and Object Chamfer errors (lower first). Ties and
    missing values fall back to the submission name.

    Args:
        key: aggregate to rank by instead of the track default.
        descending: sort order for ``key``; defaults to the track's order when
            ``key`` is the default key, otherwise ascending.

    Returns:
        list of (rank, report) tuples.
    """
    reports = list(reports)
    tracks = {r.track for r in reports}
    if len(tracks) > 1:
        raise MixedTracks(f"reports mix tracks: {sorted(tracks)}")
    if not reports:
        return []
    default_key, default_desc = RANK_KEYS[reports[0].track]
    if key is None:
        key = default_key
    if descending is None:
        descending = default_desc if key == default_key else False

    def sort_key(r):
        val = r.aggregates.get(key)
        if val is None:
            return (1, 0.0, r.name)
        return (0, -val if descending else val, r.name)

    ranked = sorted(reports, key=sort_key)
    return [(i + 1, r) for i, r in enumerate(ranked)]


def leaderboard_table(ranked, key=None):
    """Tab-separated table text for a ranked list from `leaderboard`."""
    if not ranked:
        return "rank\tname\n"
    track = ranked[0][1].track
    cols = [k for k in ranked[0][1].aggregates if not k.startswith("frames_")]
    key = key or RANK_KEYS[track][0]
    cols = [key] + [c for c in cols if c != key]
    lines = ["\t".join(["rank", "name"] + cols)]
    for rank, r in ranked:
        vals = [("" if r.aggregates.get(c) is None else repr(r.aggregates[c])) for c in cols]
        lines.append("\t".join([str(rank), r.name] + vals))
    return "\n".join(lines) + "\n"
