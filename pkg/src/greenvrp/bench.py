"""Best-known values for the public benchmark sets, run records, and the
benchmark report writer."""

from __future__ import annotations

from dataclasses import dataclass

#: Best-known total distances per benchmark instance (the better of the
#: exact solver's and the heuristics' published bests for the small set;
#: the current best-known values for the medium and large sets).
BKS: dict[str, float] = {
    "S-Central_1": 953.94,
    "S-Central_2": 948.69,
    "S-Central_3": 943.12,
    "S-Central_4": 947.98,
    "S-Central_5": 714.55,
    "S-Central_6": 844.43,
    "S-Central_7": 862.68,
    "S-Central_8": 712.83,
    "S-Central_9": 855.43,
    "S-Central_10": 901.19,
    "M-Central25_1": 1129.71,
    "M-Central25_2": 1113.80,
    "M-Central25_3": 1320.27,
    "M-Central25_4": 1118.87,
    "M-Central25_5": 1109.55,
    "M-Central25_6": 1089.92,
    "M-Central25_7": 1103.82,
    "M-Central25_8": 1134.93,
    "M-Central25_9": 1275.57,
    "M-Central25_10": 1311.53,
    "M-Central50_1": 2441.41,
    "M-Central50_2": 2241.35,
    "M-Central50_3": 2230.13,
    "M-Central50_4": 2193.74,
    "M-Central50_5": 2393.32,
    "M-Central50_6": 2380.99,
    "M-Central50_7": 2221.61,
    "M-Central50_8": 2415.43,
    "M-Central50_9": 2241.03,
    "M-Central50_10": 2402.03,
    "M-Central100_1": 4645.27,
    "M-Central100_2": 4479.99,
    "M-Central100_3": 4447.56,
    "M-Central100_4": 4257.75,
    "M-Central100_5": 4465.08,
    "M-Central100_6": 4257.08,
    "M-Central100_7": 4462.69,
    "M-Central100_8": 4436.81,
    "M-Central100_9": 4507.85,
    "M-Central100_10": 4366.85,
    "Beijing200_1": 4371.96,
    "Beijing200_2": 6334.57,
    "Beijing200_3": 4408.75,
    "Beijing200_4": 6407.07,
    "Beijing400_1": 8530.72,
    "Beijing400_2": 12277.58,
    "Beijing400_3": 8759.47,
    "Beijing400_4": 12534.83,
    "Beijing600_1": 12499.83,
    "Beijing600_2": 18216.44,
    "Beijing600_3": 12971.00,
    "Beijing600_4": 18729.00,
    "Beijing800_1": 16639.33,
    "Beijing800_2": 24339.56,
    "Beijing800_3": 17160.56,
    "Beijing800_4": 24895.48,
    "Beijing1000_1": 20660.36,
    "Beijing1000_2": 30263.36,
    "Beijing1000_3": 21353.74,
    "Beijing1000_4": 31237.51,
}


@dataclass
class RunRecord:
    """One solver run on one instance."""

    instance: str
    seed: int
    best_distance: float
    feasible: bool
    time_to_best: float
    total_time: float
    iterations: int

    def gap_pct(self, bks: dict[str, float]) -> float | None:
        ref = bks.get(self.instance)
        if ref is None or not self.feasible:
            return None
        return 100.0 * (self.best_distance - ref) / ref


CSV_HEADER = "instance,seed,best_distance,feasible,time_to_best_s,total_time_s,iterations,gap_pct"


def write_report(records: list[RunRecord], bks: dict[str, float] | None = None) -> tuple[str, str]:
    """Per-run CSV plus a per-instance aggregate summary.

    Column order is fixed; the gap column is empty for instances without a
    best-known value.  Aggregates report best, mean, mean time-to-best and
    the gap of the best run.
    """
    if not records:
        raise ValueError("no run records to report")
    bks = BKS if bks is None else bks

    rows = [CSV_HEADER]
    for r in records:
        gap = r.gap_pct(bks)
        rows.append(
            ",".join(
                (
                    r.instance,
                    str(r.seed),
                    f"{r.best_distance:.4f}" if r.feasible else "",
                    str(r.feasible).lower(),
                    f"{r.time_to_best:.3f}",
                    f"{r.total_time:.3f}",
                    str(r.iterations),
                    f"{gap:.3f}" if gap is not None else "",
                )
            )
        )
    csv_text = "\n".join(rows) + "\n"

    by_instance: dict[str, list[RunRecord]] = {}
    for r in records:
        by_instance.setdefault(r.instance, []).append(r)
    summary_lines = []
    for name, runs in by_instance.items():
        ok = [r for r in runs if r.feasible]
        if ok:
            best = min(r.best_distance for r in ok)
            mean = sum(r.best_distance for r in ok) / len(ok)
            ttb = sum(r.time_to_best for r in ok) / len(ok)
            ref = bks.get(name)
            gap = f"{100.0 * (best - ref) / ref:.3f}%" if ref else "n/a"
            summary_lines.append(
                f"{name}: runs={len(runs)} best={best:.4f} mean={mean:.4f} "
                f"mean_ttb={ttb:.3f}s gap={gap}"
            )
        else:
            summary_lines.append(f"{name}: runs={len(runs)} no feasible solution")
    return csv_text, "\n".join(summary_lines) + "\n"
