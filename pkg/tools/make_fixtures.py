"""Regenerate the bundled scenario fixtures in src/stormrtc/data.

The storms are synthetic triangles on the reference pond; they are shaped
to exercise specific controller behaviours, not to match any record.
"""

from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "stormrtc" / "data"
DT = 300.0
N = 720


def triangle(center: int, half: int, peak: float, n: int = N) -> np.ndarray:
    k = np.arange(n)
    return np.maximum(0.0, peak * (1.0 - np.abs(k - center) / half))


def peak_for(volume: float, half: int) -> float:
    # trapezoidal volume of a sampled triangle equals peak * half * dt
    return volume / (half * DT)


def write_series(name: str, values: np.ndarray) -> None:
    lines = ["time_s,value"]
    lines += [f"{int(k * DT)},{format(float(v), '.17g')}" for k, v in enumerate(values)]
    (DATA / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    # 79200 m3 against 61495 m3 of storage, peak 13.2 m3/s
    write_series("design_storm.csv", triangle(30, 20, 13.2))
    # one storm that fits, then a small one 45 h later
    write_series(
        "retention.csv",
        triangle(24, 12, peak_for(40000.0, 12)) + triangle(24 + 12 + 540 + 12, 6, 1.0),
    )
    # storm 2 starts 12 h after storm 1 ends
    write_series(
        "two_storms.csv",
        triangle(24, 16, peak_for(55000.0, 16)) + triangle(24 + 16 + 144 + 16, 16, peak_for(40000.0, 16)),
    )
    rain = np.zeros(N)
    rain[12:24] = [1, 2, 4, 6, 8, 6, 5, 4, 3, 2, 1, 0.5]
    write_series("rain_event.csv", rain)


if __name__ == "__main__":
    main()
