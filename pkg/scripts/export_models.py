"""Write the fixture models as JSON documents under models/."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from nidkit import fixtures as F
from nidkit.modelformat import document, save


@dataclass
class ExportConfig:
    out_dir: Path = Path(__file__).resolve().parent.parent / "models"


def models() -> dict[str, object]:
    out: dict[str, object] = {}
    for v in ("three", "two"):
        suffix = "" if v == "three" else "-two-leaders"
        out[f"steal-network{suffix}"] = F.steal_network(v)
        out[f"steal-maid{suffix}"] = F.steal_maid(v)
        for name, n in F.fixture_nids(v).items():
            if v == "three" or name not in ("marketing", "voting"):
                out[f"{name}-nid{suffix}"] = n
    out["rps-maid"] = F.rps_maid()
    out["prisoners-dilemma-maid"] = F.prisoners_dilemma_maid()
    out["umbrella-maid"] = F.umbrella_maid()
    out["matching-pennies-bg"] = F.matching_pennies_bg()
    out["dominant-bg"] = F.dominant_bg()
    return out


def run(cfg: ExportConfig) -> list[Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, model in models().items():
        path = cfg.out_dir / f"{name}.json"
        save(document(model, {"name": name}), path)
        written.append(path)
    return written


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=ExportConfig.out_dir)
    for path in run(ExportConfig(p.parse_args().out_dir)):
        print(path)


if __name__ == "__main__":
    main()
