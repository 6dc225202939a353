"""Cross-checks the NPY and PNG containers against numpy and Pillow.

usage: npy_interop.py <hrlc executable> <scratch dir>
"""

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np

HRLC = sys.argv[1]
WORK = Path(sys.argv[2])

SMALL_INI = """[pipeline]
intra_k = 3
inter_k = 3
pca_dim_intra = 8
pca_dim_inter = 8

[synth]
n_frames = 6
height = 12
width = 10
dims = 16
generators = 3
layout = drift
noise_rel = 0.05
"""

failures = []


def hrlc(*args):
    return subprocess.run([HRLC, "--threads", "1", *map(str, args)], capture_output=True, text=True)


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def numpy_files_are_readable():
    feats = WORK / "np_features"
    feats.mkdir()
    rng = np.random.default_rng(0)
    centers = np.eye(3, 16, dtype=np.float32)
    for f in range(5):
        stripe = (np.arange(10)[None, :] * 3 // 10).repeat(12, axis=0)
        grid = centers[stripe] + rng.normal(0, 0.02, (12, 10, 16)).astype(np.float32)
        if f == 4:
            grid = grid[None]  # leading batch axis is squeezed
        np.save(feats / f"frame_{f:03d}.npy", grid.astype("<f4"))
    r = hrlc("cluster", feats, "--config", WORK / "small.ini", "--out", WORK / "np_labels")
    check(r.returncode == 0, f"cluster reads numpy-written tensors (exit {r.returncode}: {r.stderr.strip()})")
    check(len(list((WORK / "np_labels").glob("*.png"))) == 5, "one label map per numpy frame")


def bad_numpy_files_exit_3():
    for name, array in [
        ("f8", np.zeros((4, 4, 16), dtype="<f8")),
        ("fortran", np.asfortranarray(np.zeros((4, 4, 16), dtype="<f4"))),
        ("rank2", np.zeros((4, 16), dtype="<f4")),
        ("nan", np.full((4, 4, 16), np.nan, dtype="<f4")),
    ]:
        d = WORK / f"bad_{name}"
        d.mkdir()
        np.save(d / "x.npy", array)
        r = hrlc("cluster", d, "--config", WORK / "small.ini", "--out", WORK / f"bad_{name}_out")
        check(r.returncode == 3, f"{name} tensor rejected with exit 3 (got {r.returncode})")


def our_files_match_numpy():
    r = hrlc("synth", "--config", WORK / "small.ini", "--out", WORK / "synth")
    check(r.returncode == 0, f"synth exit {r.returncode}")
    files = sorted((WORK / "synth" / "features").glob("*.npy"))
    check(len(files) == 6, "synth wrote 6 tensors")
    for path in files:
        array = np.load(path)
        check(array.dtype == np.dtype("<f4") and array.shape == (12, 10, 16), f"{path.name} loads as (12, 10, 16) <f4")
        again = WORK / "resaved.npy"
        np.save(again, array)
        check(again.read_bytes() == path.read_bytes(), f"{path.name} is byte-identical to numpy's own encoding")


def pillow_palette_masks():
    try:
        from PIL import Image
    except ImportError:
        print("skip Pillow checks (not installed)")
        return
    gt = WORK / "pal_gt"
    gt.mkdir()
    pred = WORK / "pal_pred"
    pred.mkdir()
    mask = np.zeros((6, 8), dtype=np.uint8)
    mask[:, :3] = 1
    mask[4:, 5:] = 2
    img = Image.new("P", (8, 6))
    img.putdata(mask.ravel().tolist())
    img.putpalette([0, 0, 0, 200, 0, 0, 0, 200, 0] + [0] * (253 * 3))
    img.save(gt / "00000.png")
    stored = Image.open(gt / "00000.png")
    check(stored.mode == "P" and (np.asarray(stored) == mask).all(), "fixture is an indexed PNG holding the raw ids")
    labels = (mask.astype(np.uint16) + 3)
    Image.fromarray(labels).save(pred / "00000.png")
    r = hrlc("eval", pred, gt, "--sequence", "palette")
    check(r.returncode == 0 and "palette   1.0000  1.0000  1.0000" in r.stdout,
          f"indexed-palette mask read by index (exit {r.returncode}: {r.stdout.strip()} {r.stderr.strip()})")


def main():
    shutil.rmtree(WORK, ignore_errors=True)
    WORK.mkdir(parents=True)
    (WORK / "small.ini").write_text(SMALL_INI)
    numpy_files_are_readable()
    bad_numpy_files_exit_3()
    our_files_match_numpy()
    pillow_palette_masks()
    if failures:
        print(f"{len(failures)} check(s) failed")
        return 1
    print("all interop checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
