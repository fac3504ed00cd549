# Copyright 2026 The lstmplc Authors
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

"""Converts speech recordings to the 8 kHz mono 16-bit clips used by the tests.

    python3 tools/prepare_speech.py OUT_DIR IN.wav [IN.wav ...]

Leading and trailing silence is trimmed, clips are capped at --max-seconds and
peak-normalised to --peak of full scale.
"""

import argparse
import pathlib
from math import gcd

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

TARGET_RATE = 8000


def trim_silence(x, rate, threshold=0.02, pad=0.05):
    frame = rate // 100
    energy = np.array([np.sqrt(np.mean(x[k : k + frame] ** 2)) for k in range(0, len(x) - frame + 1, frame)])
    active = np.flatnonzero(energy > threshold * energy.max())
    if active.size == 0:
        return x
    lo = max(0, active[0] * frame - int(pad * rate))
    hi = min(len(x), (active[-1] + 1) * frame + int(pad * rate))
    return x[lo:hi]


def convert(path, max_seconds, peak):
    rate, x = wavfile.read(path)
    x = x.astype(np.float64)
    if x.ndim > 1:
        x = x.mean(axis=1)
    g = gcd(rate, TARGET_RATE)
    y = resample_poly(x, TARGET_RATE // g, rate // g)
    y = trim_silence(y, TARGET_RATE)[: int(max_seconds * TARGET_RATE)]
    y *= peak / np.abs(y).max()
    return np.round(y * 32767).astype(np.int16)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("inputs", nargs="+", type=pathlib.Path)
    ap.add_argument("--max-seconds", type=float, default=2.0)
    ap.add_argument("--peak", type=float, default=0.7)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.inputs:
        y = convert(path, args.max_seconds, args.peak)
        out = args.out_dir / (path.stem + ".wav")
        wavfile.write(out, TARGET_RATE, y)
        print(f"{out}\t{len(y)} samples\t{len(y) / TARGET_RATE:.2f} s")


if __name__ == "__main__":
    main()
