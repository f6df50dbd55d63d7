#!/usr/bin/env python3
"""Regenerates the synthetic datasets and the sample WAV used by the fixtures.

The EEG and air-quality tables are synthetic stand-ins with the same shape as
the public datasets (4 alpha-band series of 30000 points, 5 hourly pollutant
series). Output is deterministic for a given numpy version.
"""

import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent


def smooth_noise(rng, n, alpha):
    out = np.empty(n)
    acc = 0.0
    for i, w in enumerate(rng.standard_normal(n)):
        acc = alpha * acc + (1.0 - alpha) * w
        out[i] = acc
    return out


def write_csv(name, header, columns, fmt):
    rows = [",".join(header)]
    for values in zip(*columns):
        rows.append(",".join(fmt.format(v) for v in values))
    (HERE / name).write_text("\n".join(rows) + "\n")


def eeg_alpha():
    rng = np.random.default_rng(2015)
    n = 30000
    t = np.arange(n) / n
    cols = []
    # eyes closed carries more alpha power than eyes open
    for base, drift in ((4.0, 3.0), (3.5, 2.5), (2.0, 1.0), (1.5, 0.8)):
        v = base + drift * t + 25.0 * smooth_noise(rng, n, 0.995)
        cols.append(np.clip(v, 0.0, None))
    write_csv("eeg_alpha.csv",
              ["low_alpha_closed", "high_alpha_closed", "low_alpha_open", "high_alpha_open"],
              cols, "{:.3f}")


def air_quality():
    rng = np.random.default_rng(2014)
    n = 168
    hour = np.arange(n) % 24
    diurnal = np.sin(2 * np.pi * (hour - 9) / 24)
    so2 = np.clip(2.0 + 1.5 * smooth_noise(rng, n, 0.8) * 4, 0.1, None)
    o3 = np.clip(28.0 + 14.0 * diurnal + 6.0 * smooth_noise(rng, n, 0.7) * 3, 1.0, None)
    no2 = np.clip(18.0 - 8.0 * diurnal + 5.0 * smooth_noise(rng, n, 0.7) * 3, 1.0, None)
    co = np.clip(0.35 - 0.12 * diurnal + 0.1 * smooth_noise(rng, n, 0.7) * 3, 0.05, None)
    pm = np.clip(8.0 + 4.0 * smooth_noise(rng, n, 0.9) * 4, 0.5, None)
    write_csv("airquality_2014.csv", ["SO2", "O3", "NO2", "CO", "PM2.5"],
              [so2, o3, no2, co, pm], "{:.3f}")


def ramp():
    write_csv("ramp.csv", ["ramp"], [[i / 10 for i in range(101)]], "{:.1f}")


def levels():
    # two seconds at the series minimum followed by two at the maximum
    write_csv("levels.csv", ["level"], [[0, 0, 1, 1]], "{}")


def pulse():
    write_csv("pulse.csv", ["pulse"], [[1, 0, 0, 0]], "{}")


def click_wav():
    rate = 22050
    n = rate // 20
    t = np.arange(n) / rate
    x = 0.8 * np.sin(2 * np.pi * 1000 * t) * np.exp(-t * 60)
    pcm = np.round(x * 32767).astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    (HERE / "click.wav").write_bytes(header + pcm)


if __name__ == "__main__":
    eeg_alpha()
    air_quality()
    ramp()
    levels()
    pulse()
    click_wav()
