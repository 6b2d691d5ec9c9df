"""Smoke test for the compiled `pmlf` module.

Install with `pip install --no-build-isolation ./crates/python` (needs maturin),
then run `python python/smoke.py`.
"""

import os
import sys
import tempfile

import pmlf

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


def main():
    th = pmlf.GammaCharacter(3, 2, 1)
    prod = th.gauss_sum() * th.conj().gauss_sum()
    assert prod == pmlf.CycloNumber(1, ["9"]), prod

    out = pmlf.logpm(3, "-", n_max=3)
    zeros = [v["theta"]["conductor_exponent"] for v in out["values"] if v["exact_zero"]]
    assert zeros == [2, 2], zeros

    with tempfile.TemporaryDirectory() as tmp:
        pipe = pmlf.Pipeline.from_file(os.path.join(CONFIGS, "32a-ingest.conf"), os.path.join(tmp, "cache"))
        for suite in ("zeros", "gauss", "trace", "interpolation"):
            rep = pipe.verify(suite)
            print(f"{suite:<14} exit {rep['exit_code']}")
            assert rep["exit_code"] == 0, rep
        manifest = pipe.build(os.path.join(tmp, "out"))
        print(f"build wrote {len(manifest['files'])} files")

    try:
        pmlf.Pipeline.from_text("p = 2\n")
    except pmlf.PmlfError as e:
        assert e.args[1] == 4
    else:
        raise AssertionError("p = 2 accepted")
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
