"""PNG figures written next to JSON reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def census_histogram(census: dict, path: Path, title: str = "") -> Path:
    m = census["modulus"]
    counts = [census["counts"][str(r)] for r in range(m)]
    colors = ["tab:red" if r in census["missing"] else "tab:blue" for r in range(m)]
    fig, ax = plt.subplots(figsize=(max(4, 0.3 * m + 2), 3))
    ax.bar(range(m), counts, color=colors)
    ax.set_xlabel(f"a_p mod {m}")
    ax.set_ylabel("primes")
    ax.set_title(title or f"trace census, p <= {census['bound']}")
    ax.set_xticks(range(m))
    return _save(fig, path)


def catalog_summary(report: dict, path: Path) -> Path:
    per_level: dict[int, list[bool]] = {}
    for e in report["entries"]:
        per_level.setdefault(e["info"]["gl2_level"], []).append(e["ok"])
    levels = sorted(per_level)
    passed = [sum(per_level[m]) for m in levels]
    failed = [len(per_level[m]) - p for m, p in zip(levels, passed)]
    fig, ax = plt.subplots(figsize=(6, 3))
    xs = range(len(levels))
    ax.bar(xs, passed, color="tab:green", label="pass")
    ax.bar(xs, failed, bottom=passed, color="tab:red", label="fail")
    ax.set_xticks(list(xs), [str(m) for m in levels])
    ax.set_xlabel("level")
    ax.set_ylabel("groups")
    ax.legend()
    return _save(fig, path)


def lt_partial_products(points: list[tuple[int, float]], path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3))
    if points:
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker=".", linewidth=1)
        ax.set_xscale("log")
    ax.set_xlabel("prime bound")
    ax.set_ylabel("truncated constant")
    ax.set_title(title)
    return _save(fig, path)
