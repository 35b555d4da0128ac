"""Independent reference tables for the IEC timer blocks.

Each stepper is a direct transcription of the timer definition as a
(now, IN, start, ET, Q) table computed row by row, kept deliberately free
of any interpreter code so it can serve as the oracle for the runtime's
timer implementations.
"""

from __future__ import annotations


def ton_table(scans: list[tuple[int, bool]], pt: int) -> list[tuple[int, bool]]:
    """On-delay: rows of (now, IN) -> rows of (ET, Q).

    Timing starts on a rising edge of IN; ET = min(now - start, PT) while IN
    is held; Q exactly when IN is held and ET has reached PT; IN low resets.
    """
    rows = []
    prev_in = False
    start = 0
    for now, in_v in scans:
        if in_v and not prev_in:
            start = now
        et = min(now - start, pt) if in_v else 0
        q = in_v and et >= pt
        rows.append((et, q))
        prev_in = in_v
    return rows


def tof_table(scans: list[tuple[int, bool]], pt: int) -> list[tuple[int, bool]]:
    """Off-delay: Q follows IN high immediately and holds for PT after the
    falling edge; ET measures the time since the falling edge, capped at PT.
    """
    rows = []
    prev_in = False
    start = 0
    timing = False
    for now, in_v in scans:
        if in_v:
            timing = False
            et = 0
            q = True
        else:
            if prev_in:
                timing = True
                start = now
            if timing:
                et = min(now - start, pt)
                q = et < pt
            else:
                et = 0
                q = False
        rows.append((et, q))
        prev_in = in_v
    return rows


def tp_table(scans: list[tuple[int, bool]], pt: int) -> list[tuple[int, bool]]:
    """Pulse: a rising edge of IN emits a pulse of exactly PT; retriggering
    during the pulse is ignored; ET holds at PT until IN goes low again.
    """
    rows = []
    prev_in = False
    start = 0
    running = False
    et = 0
    for now, in_v in scans:
        if not running:
            if in_v and not prev_in:
                running = True
                start = now
            elif not in_v:
                et = 0
        if running:
            et = min(now - start, pt)
            if et >= pt:
                running = False
        q = running
        rows.append((et, q))
        prev_in = in_v
    return rows


def held_input(cycle_ms: int, count: int, value: bool = True) -> list[tuple[int, bool]]:
    return [(i * cycle_ms, value) for i in range(count)]


def input_pattern(cycle_ms: int, values: list[bool]) -> list[tuple[int, bool]]:
    return [(i * cycle_ms, v) for i, v in enumerate(values)]
