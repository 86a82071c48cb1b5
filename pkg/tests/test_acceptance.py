"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` to see the lines; they are written
straight to the terminal so they show without ``-s``.
"""
import json
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import render, srgb
from taseval.cli import main
from taseval.corpus.manifest import PairEntry, PairManifest, parse_manifest, write_manifest
from taseval.corpus.runner import run_eval
from taseval.corpus.synth import VariationConfig, sample_pairs, synth_variations
from taseval.image import write_image
from taseval.stats import icc3k, spearman
from taseval.style.glyphs import load_template
from taseval.tas import tas, tas_from_components

HERE = Path(__file__).parent
GOLDEN_FILES = ("test_imgcore.py", "test_simmetrics.py", "test_fsim.py", "test_colordiff.py", "test_tas_eval.py")
MARGIN = 0.02


@pytest.fixture
def verdict(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return say


def test_criterion_1_golden_suite(verdict):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *[str(HERE / f) for f in GOLDEN_FILES]], capture_output=True, text=True, cwd=HERE.parent)
    dt = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    verdict(1, proc.returncode == 0 and dt < 60, f"metric goldens vs oracles: {tail} ({dt:.1f} s, limit 60 s)")


def test_criterion_2_identity_and_range(verdict):
    tpl = load_template("sans")
    cfg = VariationConfig(n_pairs=100, variation=("FCB",), seed=2, canvas=(160, 80))
    worst, bad_range, bad_mean = 1.0, 0, 0.0
    for _, _, a, _ in sample_pairs(cfg):
        img, _ = render(a, cfg.canvas)
        r = tas(img, img, a.text, tpl)
        worst = min(worst, r.tas)
        bad_range += not all(0.0 <= v <= 1.0 for v in (r.s_clr, r.s_fnt, r.s_bg, r.tas))
        bad_mean = max(bad_mean, abs(r.tas - (r.s_clr + r.s_fnt + r.s_bg) / 3))
    ok = 0.997 <= worst <= 1.0 and bad_range == 0 and bad_mean <= 1e-12
    verdict(2, ok, f"100 images: min TAS(I,I) {worst:.6f} (need >= 0.997), {bad_range} out of range, "
                   f"max |TAS - mean| {bad_mean:.1e}")


def test_criterion_3_variation_pattern(tmp_path, verdict):
    t0 = time.perf_counter()
    cfg = VariationConfig(n_pairs=200, variation=("T", "F", "C", "B", "FCB"), seed=0)
    manifest, _ = synth_variations(cfg, tmp_path)
    rep = run_eval(manifest, "GT_FREE")
    dt = time.perf_counter() - t0
    means = {}
    for v in cfg.variation:
        rows = [r for r in rep.rows if r["pair_id"].startswith(f"{v}-") and r["status"] == "ok"]
        assert len(rows) == 200, v
        means[v] = {c: float(np.mean([r[c] for r in rows])) for c in ("s_clr", "s_fnt", "s_bg", "tas")}
    t = {v: m["tas"] for v, m in means.items()}
    mid = ("F", "C", "B")
    ordering = all(t["T"] - t[v] >= MARGIN and t[v] - t["FCB"] >= MARGIN for v in mid)
    expected = {"F": "s_fnt", "C": "s_clr", "B": "s_bg"}
    argmins = {v: min(("s_clr", "s_fnt", "s_bg"), key=lambda c: means[v][c]) for v in mid}
    aligned = argmins == expected
    table = "; ".join(f"{v} tas={m['tas']:.4f} clr={m['s_clr']:.4f} fnt={m['s_fnt']:.4f} bg={m['s_bg']:.4f}"
                      for v, m in means.items())
    verdict(3, ordering and aligned and dt < 300,
            f"ordering by >= {MARGIN}: {ordering}; argmin {argmins}; {dt:.0f} s (limit 300 s). {table}")


def test_criterion_4_gt_free(tmp_path, verdict):
    cfg = VariationConfig(n_pairs=10, variation=("C", "B"), seed=4)
    manifest, _ = synth_variations(cfg, tmp_path)
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    entries = []
    for e in manifest:
        gt_rel = f"gt/{e.pair_id}.png"
        shutil.copy(tmp_path / e.image_b, tmp_path / gt_rel)
        entries.append(PairEntry(e.pair_id, e.lang, e.image_a, gt_rel, e.text_a, e.text_b, "synth", "eval",
                                 generated=e.image_b))
    write_manifest(tmp_path / "with_gt.jsonl", entries)
    with_gt = run_eval(parse_manifest(tmp_path / "with_gt.jsonl"), "WITH_GT")
    shutil.rmtree(gt_dir)
    # the manifest still names the deleted files; GT_FREE must never open them
    free = run_eval(parse_manifest(tmp_path / "with_gt.jsonl"), "GT_FREE")
    stripped = [PairEntry(e.pair_id, e.lang, e.image_a, None, e.text_a, e.text_b, "synth", "eval",
                          generated=e.generated) for e in entries]
    write_manifest(tmp_path / "no_gt.jsonl", stripped)
    free2 = run_eval(parse_manifest(tmp_path / "no_gt.jsonl"), "GT_FREE")
    rows = free.rows + free2.rows
    ok = (all(r["status"] == "ok" for r in with_gt.rows) and all(r["status"] == "ok" for r in rows)
          and all(0.0 <= r["tas"] <= 1.0 for r in rows) and free.to_csv() == free2.to_csv())
    verdict(4, ok, f"{len(rows)} GT_FREE rows scored with gt deleted, TAS range "
                   f"[{min(r['tas'] for r in rows):.4f}, {max(r['tas'] for r in rows):.4f}]")


def test_criterion_5_worked_example(verdict):
    v = tas_from_components(0.2546, 0.8444, 0.6029).tas
    verdict(5, abs(v - 0.5673) <= 5e-5, f"TAS(0.2546, 0.8444, 0.6029) = {v:.6f} vs 0.5673 +- 5e-5")


def test_criterion_6_statistics(verdict):
    r = np.random.default_rng(6)
    items = r.random(12)
    icc = icc3k(np.repeat(items[:, None], 4, axis=1))
    x = np.sort(r.random(30))
    up, down = spearman(x, np.exp(x)), spearman(x, -x**3)
    y = r.random(30)
    base = spearman(y, x)
    drift = max(abs(spearman(y, f(x)) - base) for f in (np.exp, np.log1p, lambda v: 5 * v + 3, np.cbrt))
    ok = abs(icc - 1.0) <= 1e-12 and up == 1.0 and down == -1.0 and drift <= 1e-12
    verdict(6, ok, f"ICC identical raters {icc:.12f}; rho up {up}, down {down}; max drift under monotone maps "
                   f"{drift:.1e}")


def test_criterion_7_determinism_and_throughput(tmp_path, verdict):
    cfg = VariationConfig(n_pairs=200, variation=("T", "F", "C", "B", "FCB"), seed=7, canvas=(128, 128))
    manifest, _ = synth_variations(cfg, tmp_path / "corpus")
    path = str(tmp_path / "corpus" / "manifest.jsonl")
    times = []
    for run in ("r1", "r2"):
        t0 = time.perf_counter()
        code = main(["eval", path, "--mode", "gtfree", "--workers", "8", "-o", str(tmp_path / run)])
        times.append(time.perf_counter() - t0)
        assert code == 0
    same = all((tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()
               for f in ("report.csv", "report.json", "summary.csv"))
    n_ok = json.loads((tmp_path / "r1" / "report.json").read_text())["summary"]["all"]["n_scored"]
    sub = PairManifest(manifest.entries[:20], manifest.base_dir)
    t0 = time.perf_counter()
    run_eval(sub, "GT_FREE", workers=1)
    per_pair = (time.perf_counter() - t0) / 20
    ok = same and n_ok == 1000 and max(times) < 60 and per_pair < 1.0
    verdict(7, ok, f"1000 pairs x2 with 8 workers: {times[0]:.1f} s / {times[1]:.1f} s (limit 60 s), "
                   f"byte-identical {same}, {n_ok} scored; single-thread {per_pair * 1000:.0f} ms/pair")


def test_criterion_8_manifest_filters(tmp_path, verdict, capsys):
    sizes = {"small": (36, 25), "edge": (40, 25), "portrait": (40, 60), "square": (50, 50), "fine": (64, 32)}
    for name, (w, h) in sizes.items():
        write_image(tmp_path / f"{name}.png", srgb(np.full((h, w, 3), 0.7)))
    lines = [json.dumps({"pairId": n, "imageA": "fine.png", "imageB": f"{n}.png", "textA": "a", "textB": "b"})
             for n in sizes]
    (tmp_path / "m.jsonl").write_text("\n".join(lines) + "\n")
    code = main(["validate", str(tmp_path / "m.jsonl")])
    flagged = {(v["pairId"], v["rule"]) for v in map(json.loads, capsys.readouterr().out.splitlines())}
    want = {("small", "area"), ("portrait", "orientation"), ("square", "orientation")}
    verdict(8, code == 2 and flagged == want,
            f"flagged {sorted(flagged)}; 1000 px landscape accepted; exit code {code}")
