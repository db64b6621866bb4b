import json
import os
from collections import defaultdict
from datetime import datetime
from typing import Any, Dict, List, Optional


STATUS_LABELS = {
    True: "PASS",
    False: "FAIL",
    None: "SKIPPED",
}


def generate_report(results: List[Dict[str, Any]]) -> Dict[str, Any]:
    """
    Aggregate figure-check results into a summary and a per-category breakdown.

    Each result carries ``id``, ``category``, ``passed`` (True/False/None for
    skipped), ``criterion`` and a ``metrics`` dict.
    """
    total = len(results)
    counts = defaultdict(int)
    category_stats = defaultdict(lambda: {"total": 0, "counts": defaultdict(int), "failed": []})

    for r in results:
        status = r.get("passed")
        category = r.get("category", "uncategorized")
        counts[status] += 1
        category_stats[category]["total"] += 1
        category_stats[category]["counts"][status] += 1
        if status is False:
            category_stats[category]["failed"].append(r["id"])

    evaluated = counts[True] + counts[False]
    summary = {
        "total_checks": total,
        "status_distribution": {STATUS_LABELS[k]: counts.get(k, 0) for k in STATUS_LABELS},
        "pass_rate": round(counts[True] / evaluated, 4) if evaluated else None,
        "failed_checks": [r["id"] for r in results if r.get("passed") is False],
    }

    by_category = {}
    for category, data in category_stats.items():
        cat_evaluated = data["counts"][True] + data["counts"][False]
        by_category[category] = {
            "total_checks": data["total"],
            "pass_rate": round(data["counts"][True] / cat_evaluated, 4) if cat_evaluated else None,
            "status_distribution": {STATUS_LABELS[k]: data["counts"].get(k, 0) for k in STATUS_LABELS},
            "failed": data["failed"],
        }

    return {
        "summary": summary,
        "by_category": by_category,
        "status_labels": {v: k for k, v in STATUS_LABELS.items()},
    }


def save_reports(
    raw_results: List[Dict[str, Any]],
    report: Dict[str, Any],
    output_dir: str = "reports",
    prefix: str = "figure",
) -> str:
    os.makedirs(output_dir, exist_ok=True)
    ts = datetime.now().strftime("%Y%m%d_%H%M%S")

    raw_path = os.path.join(output_dir, f"{prefix}_results_raw_{ts}.json")
    report_path = os.path.join(output_dir, f"{prefix}_report_{ts}.json")

    with open(raw_path, "w", encoding="utf-8") as f:
        json.dump(raw_results, f, indent=2, ensure_ascii=False)

    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, ensure_ascii=False)

    print(f"[OK] Raw results → {raw_path}")
    print(f"[OK] Summary     → {report_path}")
    return report_path


def latest_report(output_dir: str = "reports", prefix: str = "figure") -> Optional[Dict[str, Any]]:
    """Most recent saved summary, or None when no report exists yet."""
    if not os.path.isdir(output_dir):
        return None
    names = sorted(n for n in os.listdir(output_dir) if n.startswith(f"{prefix}_report_") and n.endswith(".json"))
    if not names:
        return None
    with open(os.path.join(output_dir, names[-1]), "r", encoding="utf-8") as f:
        return json.load(f)
