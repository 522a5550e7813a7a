#!/usr/bin/env python3
"""Minute-enumeration goldens for next_fire, using Python's zoneinfo.

Walks forward one minute at a time from the first whole minute after
`after` until the local wall-clock time matches. Only cases whose fire
time is not inside a DST gap or overlap are listed; those follow a
separate policy and are tested on their own.

    python3 tests/oracles/next_fire_oracle.py > tests/fixtures/oracles/next_fire.json
"""
import json
from datetime import datetime, timedelta, timezone
from zoneinfo import ZoneInfo

DAYS = {"mon": 0, "tue": 1, "wed": 2, "thu": 3, "fri": 4, "sat": 5, "sun": 6}


def matcher(expr):
    if expr.startswith("daily@"):
        h, m = map(int, expr[6:].split(":"))
        return lambda t: t.hour == h and t.minute == m
    if expr.startswith("weekly "):
        day, hm = expr[7:].split("@")
        h, m = map(int, hm.split(":"))
        wd = DAYS[day.lower()[:3]]
        return lambda t: t.weekday() == wd and t.hour == h and t.minute == m
    # "M H * * a-b" with cron weekdays (0 = Sunday)
    m, h, _, _, dow = expr.split()
    lo, hi = map(int, dow.split("-"))
    days = {(d - 1) % 7 for d in range(lo, hi + 1)}
    return lambda t: t.weekday() in days and t.hour == int(h) and t.minute == int(m)


def next_fire(expr, tz, after):
    z = ZoneInfo(tz)
    match = matcher(expr)
    t = after.replace(second=0) + timedelta(minutes=1)
    for _ in range(60 * 24 * 400):
        if match(t.astimezone(z)):
            return t
        t += timedelta(minutes=1)
    raise RuntimeError("no fire time")


CASES = [
    # Tue 10:00 local -> Wed 09:00
    ("daily@09:00", "Europe/Berlin", "2026-03-24T09:00:00Z"),
    ("daily@09:00", "America/New_York", "2026-03-24T14:00:00Z"),
    # exactly at a fire time: strictly after
    ("weekly Wed@09:00", "Europe/Berlin", "2026-03-25T08:00:00Z"),
    ("weekly Wednesday@09:00", "America/New_York", "2026-11-04T14:00:00Z"),
    # spring-forward days, 09:00 exists
    ("daily@09:00", "Europe/Berlin", "2026-03-28T12:00:00Z"),
    ("daily@09:00", "America/New_York", "2026-03-07T20:00:00Z"),
    # fall-back days
    ("daily@09:00", "Europe/Berlin", "2026-10-24T12:00:00Z"),
    ("daily@09:00", "America/New_York", "2026-10-31T20:00:00Z"),
    # weekly across both transitions
    ("weekly Wed@09:00", "Europe/Berlin", "2026-03-26T00:00:00Z"),
    ("weekly Wed@09:00", "Europe/Berlin", "2026-10-22T00:00:00Z"),
    ("weekly wed@09:00", "America/New_York", "2026-03-05T00:00:00Z"),
    # cron weekdays
    ("0 9 * * 1-5", "Europe/Berlin", "2026-10-23T08:00:00Z"),
    ("30 17 * * 1-5", "Asia/Tokyo", "2026-12-31T23:59:59Z"),
    ("daily@00:00", "UTC", "2027-12-31T23:59:59Z"),
]


def main():
    out = []
    for expr, tz, after in CASES:
        a = datetime.strptime(after, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        f = next_fire(expr, tz, a)
        out.append({"expression": expr, "timezone": tz, "after": after,
                    "next_fire": f.strftime("%Y-%m-%dT%H:%M:%SZ")})
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
