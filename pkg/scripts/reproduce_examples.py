"""Print the reference-value comparison for the baseball, marketing and voting examples."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from nidkit.reproduction import VARIANTS, first_pitch_comparison, format_report, reproduction_report


@dataclass
class ReproConfig:
    out: Path | None = None


def run(cfg: ReproConfig) -> str:
    lines = [format_report(reproduction_report()), ""]
    for v in VARIANTS:
        two, expert = first_pitch_comparison(v)
        verdict = "holds" if two < expert else "does not hold"
        lines.append(f"first-pitch claim ({v}): P(pitch out | alice) {two:.4f} with second-pitch doubt "
                     f"vs {expert:.4f} with experts, {verdict}")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        cfg.out.write_text(text)
    return text


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path)
    print(run(ReproConfig(**vars(p.parse_args()))), end="")


if __name__ == "__main__":
    main()
