"""Acceptance suite: every release criterion, one test per criterion,
with a PASS/FAIL line printed for each.

The Monte-Carlo batches (A3/A4, A5) run once per session and are shared
between the criteria that read them. Budget guidance: A1 < 5 s, A2 < 2 min,
A3 < 20 min, A5 < 20 min on a 2-core box with workers=2.
"""

import math
import time

import numpy as np
import pytest

from echoroom.acoustics import Room, SimConfig, enumerate_image_sources, toa
from echoroom.geometry import Line2, Point2, mirror_point, rectangle
from echoroom.harness import ExperimentConfig, run_batch, run_corner_experiment, run_trial
from echoroom.planner import room_closure
from echoroom.trilateration import solve_is_triple

C = 343.0
FS = 96000.0
SAMPLE_DISTANCE = C / FS  # ~3.6 mm


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


# ---------------------------------------------------------------------------
# P1: trilateration inverts the forward TOA model


def test_p1_trilateration_inversion():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    n_done = 0
    worst = 0.0
    while n_done < 10_000:
        mics = rng.uniform(-1, 1, size=(3, 2))
        det = (mics[0, 0] - mics[1, 0]) * (mics[1, 1] - mics[2, 1]) - (
            mics[0, 1] - mics[1, 1]
        ) * (mics[1, 0] - mics[2, 0])
        if abs(det) < 1e-3:
            continue
        truth = Point2(*rng.uniform(-20, 20, size=2))
        pts = [Point2(*m) for m in mics]
        toas = [truth.distance_to(m) / C for m in pts]
        sol = solve_is_triple(*pts, *toas, C)
        worst = max(worst, sol.distance_to(truth))
        n_done += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    report("P1 trilateration inversion", ok, f"worst={worst:.2e} m over 10^4, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert elapsed < 5.0


# ---------------------------------------------------------------------------
# P2: noiseless end-to-end accuracy


def test_p2_noiseless_end_to_end():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(
        scenario="fixed", snr_db=float("inf"), trials=20, master_seed=2024, workers=2
    )
    batch = run_batch(cfg)
    worst = 0.0
    all_ok = True
    for r in batch.trials:
        all_ok &= r.success
        if r.wall_errors:
            worst = max(worst, max(r.wall_errors))
    elapsed = time.perf_counter() - t0
    ok = all_ok and worst <= SAMPLE_DISTANCE
    report(
        "P2 noiseless end-to-end",
        ok,
        f"success={sum(r.success for r in batch.trials)}/20, "
        f"worst={worst * 1000:.2f} mm (cap {SAMPLE_DISTANCE * 1000:.2f} mm), {elapsed:.0f}s",
    )
    assert all_ok, "every noiseless trial must close the room"
    assert worst <= SAMPLE_DISTANCE
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# P3/P4: the paper's fixed-room error and step claims at desk scale


@pytest.fixture(scope="module")
def fixed_room_batch():
    cfg = ExperimentConfig(scenario="fixed", snr_db=30.0, trials=100, master_seed=0, workers=2)
    t0 = time.perf_counter()
    batch = run_batch(cfg)
    batch_minutes = (time.perf_counter() - t0) / 60.0
    return batch, batch_minutes


def test_p3_fixed_room_error_claim(fixed_room_batch):
    batch, minutes = fixed_room_batch
    agg = batch.aggregate
    errors = [e for r in batch.trials if r.success for e in r.wall_errors]
    frac_below = np.mean([e < 0.01 for e in errors])
    median = float(np.median(errors))
    ok = (
        agg["success_rate"] == 1.0
        and frac_below >= 0.90
        and 0.0005 <= median <= 0.008
        and minutes < 20.0
    )
    report(
        "P3 fixed-room errors",
        ok,
        f"success={agg['success_rate']:.2f}, <1cm={frac_below:.3f}, "
        f"median={median * 100:.3f} cm, {minutes:.1f} min",
    )
    assert agg["success_rate"] == 1.0
    assert frac_below >= 0.90
    assert 0.0005 <= median <= 0.008, "median error must sit in [0.05, 0.8] cm"
    assert minutes < 20.0


def test_p4_fixed_room_step_claim(fixed_room_batch):
    batch, _ = fixed_room_batch
    steps = [r.steps for r in batch.trials]
    frac_under_100 = np.mean([s < 100 for s in steps])
    mode_center = batch.aggregate["steps"]["mode_bin_center"]
    ok = frac_under_100 >= 0.90 and 30.0 <= mode_center <= 100.0
    report(
        "P4 fixed-room steps",
        ok,
        f"<100 stops={frac_under_100:.2f}, mode~{mode_center}, "
        f"median={np.median(steps):.0f}",
    )
    assert frac_under_100 >= 0.90
    assert 30.0 <= mode_center <= 100.0, (
        "step-histogram mode must fall within [30, 100]"
    )


# ---------------------------------------------------------------------------
# P5: random rooms behave like the fixed room


@pytest.fixture(scope="module")
def random_room_batch():
    cfg = ExperimentConfig(scenario="random", snr_db=30.0, trials=100, master_seed=1, workers=2)
    t0 = time.perf_counter()
    batch = run_batch(cfg)
    return batch, (time.perf_counter() - t0) / 60.0


def test_p5_random_rooms(random_room_batch):
    batch, minutes = random_room_batch
    agg = batch.aggregate
    errors = [e for r in batch.trials if r.success for e in r.wall_errors]
    frac_below = np.mean([e < 0.01 for e in errors])
    median = float(np.median(errors))
    steps = [r.steps for r in batch.trials]
    frac_under_100 = np.mean([s < 100 for s in steps])
    mode_center = agg["steps"]["mode_bin_center"]
    ok = (
        agg["success_rate"] == 1.0
        and frac_below >= 0.90
        and 0.0005 <= median <= 0.008
        and frac_under_100 >= 0.90
        and 30.0 <= mode_center <= 100.0
    )
    report(
        "P5 random rooms",
        ok,
        f"success={agg['success_rate']:.2f}, <1cm={frac_below:.3f}, "
        f"median={median * 100:.3f} cm, <100 stops={frac_under_100:.2f}, "
        f"mode~{mode_center}, {minutes:.1f} min",
    )
    assert agg["success_rate"] == 1.0
    assert frac_below >= 0.90
    assert 0.0005 <= median <= 0.008
    assert frac_under_100 >= 0.90
    assert 30.0 <= mode_center <= 100.0


# ---------------------------------------------------------------------------
# P6: corner phenomena and arm-extension mitigation


def test_p6a_second_order_arrives_before_first():
    room = Room.rectangular(6.0, 5.0)
    src = Point2(0.25, 0.25)
    mic = Point2(0.5, 0.4)
    images = enumerate_image_sources(room, src, 2)
    t1 = [toa(i, mic, C) for i in images if i.order == 1]
    t2 = [toa(i, mic, C) for i in images if i.order == 2]
    ok = min(t2) < max(t1)
    report(
        "P6a corner reorders arrivals",
        ok,
        f"earliest order-2 {min(t2) * 1000:.3f} ms < latest order-1 {max(t1) * 1000:.3f} ms",
    )
    assert ok


def test_p6b_corner_mitigation_rescues():
    cfg = ExperimentConfig(snr_db=30.0, master_seed=6)
    summary = run_corner_experiment(cfg, n_trials=100)
    ok = summary["full_failed_or_mislabeled"] > 0 and summary["rescue_rate"] >= 0.90
    report(
        "P6b corner mitigation",
        ok,
        f"full-ext failed/mislabeled {summary['full_failed_or_mislabeled']}/100, "
        f"rescued {summary['rescued_by_mitigation']} (rate {summary['rescue_rate']:.2f})",
    )
    assert summary["full_failed_or_mislabeled"] > 0
    assert summary["rescue_rate"] >= 0.90


# ---------------------------------------------------------------------------
# P7: image enumeration matches a brute-force recursive oracle


def test_p7_image_method_oracle_equivalence():
    rng = np.random.default_rng(7)

    def oracle(room, source, max_order):
        lines = room.wall_lines()
        out = []

        def rec(pos, path):
            out.append((round(pos.x, 9), round(pos.y, 9), tuple(path)))
            if len(path) == max_order:
                return
            for wi in range(len(lines)):
                if path and path[-1] == wi:
                    continue
                rec(mirror_point(pos, lines[wi]), path + [wi])

        rec(source, [])
        return sorted(out)

    all_ok = True
    for k in range(50):
        w, h = rng.uniform(2, 10), rng.uniform(2, 10)
        room = Room.from_polygon(rectangle(w, h))
        src = Point2(rng.uniform(0.3, w - 0.3), rng.uniform(0.3, h - 0.3))
        ours = sorted(
            (round(i.position.x, 9), round(i.position.y, 9), i.wall_path)
            for i in enumerate_image_sources(room, src, 3)
        )
        ref = oracle(room, src, 3)
        all_ok &= ours == ref
        assert len(ours) == 53
        assert ours == ref
    report("P7 image-method oracle equivalence", all_ok, "50 rooms, order <= 3, 53 images each")


# ---------------------------------------------------------------------------
# P8: Theorem-1 closure on a hand-built table of line sets


def vline(x):
    return Line2(Point2(1, 0), x)


def hline(y):
    return Line2(Point2(0, 1), y)


def diag(a, b, d):
    return Line2(Point2(a, b), d)


CLOSURE_TABLE = [
    # (name, lines, interior hint, closes?, expected |area|)
    ("rect 6x5", [vline(0), vline(6), hline(0), hline(5)], Point2(3, 2.5), True, 30.0),
    ("rect 1x1", [vline(0), vline(1), hline(0), hline(1)], Point2(0.5, 0.5), True, 1.0),
    ("rect 10x3", [vline(-5), vline(5), hline(0), hline(3)], Point2(0, 1.5), True, 30.0),
    ("rect 4x4 offset", [vline(2), vline(6), hline(1), hline(5)], Point2(4, 3), True, 16.0),
    ("rect 3x8", [vline(0), vline(3), hline(-4), hline(4)], Point2(1.5, 0), True, 24.0),
    ("triangle", [hline(0), vline(0), diag(1, 1, 4)], Point2(1, 1), True, 8.0),
    ("triangle 2", [hline(-1), diag(1, 1, 2), diag(-1, 1, 2)], Point2(0, 0), True, None),
    ("pentagon", [vline(0), vline(6), hline(0), hline(5), diag(1, 1, 9)], Point2(2, 2), True, None),
    ("open triple a", [vline(0), vline(6), hline(0)], None, False, None),
    ("open triple b", [vline(0), hline(0), hline(5)], None, False, None),
    ("open triple c", [vline(-2), vline(2), hline(1)], None, False, None),
    ("parallel only a", [vline(0), vline(2), vline(5)], None, False, None),
    ("parallel only b", [hline(0), hline(1), hline(2), hline(8)], None, False, None),
    ("mixed parallel", [vline(0), vline(6), hline(0), hline(5), vline(9)], Point2(3, 2.5), True, 30.0),
    ("two lines", [vline(0), hline(0)], None, False, None),
    ("one line", [vline(4)], None, False, None),
    ("empty", [], None, False, None),
    ("concurrent fan", [diag(1, 0, 0), diag(0, 1, 0), diag(1, 1, 0)], None, False, None),
    ("triangle far origin", [vline(10), hline(10), diag(1, 1, 22)], Point2(10.5, 10.5), True, None),
    ("rect tiny", [vline(0), vline(0.5), hline(0), hline(0.5)], Point2(0.25, 0.25), True, 0.25),
]


def test_p8_theorem1_closure_table():
    all_ok = True
    for name, lines, hint, closes, area in CLOSURE_TABLE:
        poly = room_closure(lines, interior=hint)
        got = poly is not None
        case_ok = got == closes
        if case_ok and poly is not None and area is not None:
            case_ok = math.isclose(abs(poly.signed_area()), area, rel_tol=1e-9)
        all_ok &= case_ok
        assert case_ok, f"closure case failed: {name}"
    report("P8 Theorem-1 closure", all_ok, f"{len(CLOSURE_TABLE)} hand-built line sets")
