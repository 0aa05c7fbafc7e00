"""Calendar systems for daily time axes.

Two calendars are supported:

* ``Gregorian365`` - the ordinary civil calendar, with leap days present
  in the date axis but folded onto Feb 28 for climatology indexing, so
  every date maps into a 365-slot seasonal cycle.
* ``Fixed360`` - the idealized model calendar of twelve 30-day months.
  Day 31 never exists; Feb 29 and Feb 30 do.

Dates are plain (year, month, day) tuples so they sort chronologically
and hash cheaply regardless of calendar.
"""

from __future__ import annotations

import datetime as _dt
import re
from typing import NamedTuple

from .errors import CalendarError

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")

# day-of-year offset of the first day of each month in a 365-day year
_MONTH_OFFSETS_365 = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)
_MONTH_LENGTHS_365 = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


class Date(NamedTuple):
    """A calendar-agnostic date. Validity depends on the calendar."""

    year: int
    month: int
    day: int

    def isoformat(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.isoformat()


def parse_date(text: str) -> Date:
    """Parse a ``YYYY-MM-DD`` string into a :class:`Date`.

    The shape is shared by both calendars; validity against a specific
    calendar is checked separately via :meth:`Calendar.validate`.
    """
    m = _DATE_RE.match(text.strip())
    if m is None:
        raise CalendarError(f"not a YYYY-MM-DD date: {text!r}")
    return Date(int(m.group(1)), int(m.group(2)), int(m.group(3)))


class Calendar:
    """Base class. Subclasses define validity and day arithmetic."""

    name: str = ""
    cycle_length: int = 0

    def validate(self, date: Date) -> Date:
        if not self.is_valid(date):
            raise CalendarError(f"{date.isoformat()} is not a valid {self.name} date")
        return date

    def is_valid(self, date: Date) -> bool:
        raise NotImplementedError

    def day_of_year(self, date: Date) -> int:
        """Index of ``date`` in the seasonal cycle, in [0, cycle_length)."""
        raise NotImplementedError

    def next_day(self, date: Date) -> Date:
        raise NotImplementedError

    def consecutive(self, a: Date, b: Date) -> bool:
        """True when ``b`` is the day immediately after ``a``."""
        return self.next_day(a) == b

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Calendar) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Gregorian365(Calendar):
    """Civil calendar with leap days; 365-slot climatology indexing.

    Feb 29 is a valid date on the time axis but shares climatology slot
    58 with Feb 28, so seasonal-cycle arrays always have 365 entries.
    """

    name = "gregorian365"
    cycle_length = 365

    def is_valid(self, date: Date) -> bool:
        try:
            _dt.date(date.year, date.month, date.day)
        except ValueError:
            return False
        return True

    def day_of_year(self, date: Date) -> int:
        self.validate(date)
        if date.month == 2 and date.day == 29:
            return _MONTH_OFFSETS_365[1] + 27  # Feb 28 slot
        return _MONTH_OFFSETS_365[date.month - 1] + date.day - 1

    def next_day(self, date: Date) -> Date:
        self.validate(date)
        nxt = _dt.date(date.year, date.month, date.day) + _dt.timedelta(days=1)
        return Date(nxt.year, nxt.month, nxt.day)


class Fixed360(Calendar):
    """Twelve 30-day months; 360-slot climatology indexing."""

    name = "fixed360"
    cycle_length = 360

    def is_valid(self, date: Date) -> bool:
        return 1 <= date.month <= 12 and 1 <= date.day <= 30 and date.year >= 0

    def day_of_year(self, date: Date) -> int:
        self.validate(date)
        return (date.month - 1) * 30 + date.day - 1

    def next_day(self, date: Date) -> Date:
        self.validate(date)
        if date.day < 30:
            return Date(date.year, date.month, date.day + 1)
        if date.month < 12:
            return Date(date.year, date.month + 1, 1)
        return Date(date.year + 1, 1, 1)


GREGORIAN = Gregorian365()
FIXED360 = Fixed360()

_BY_NAME = {GREGORIAN.name: GREGORIAN, FIXED360.name: FIXED360}


def calendar_by_name(name: str) -> Calendar:
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        raise CalendarError(f"unknown calendar {name!r}") from None


def date_range(calendar: Calendar, start: Date, end: Date) -> list[Date]:
    """All valid dates from ``start`` through ``end`` inclusive."""
    calendar.validate(start)
    calendar.validate(end)
    if end < start:
        raise CalendarError(f"range end {end.isoformat()} precedes start {start.isoformat()}")
    out = [start]
    d = start
    while d < end:
        d = calendar.next_day(d)
        out.append(d)
    return out


def month_day_valid(calendar: Calendar, month: int, day: int) -> bool:
    """Whether (month, day) exists in some year of the calendar."""
    if isinstance(calendar, Fixed360):
        return 1 <= month <= 12 and 1 <= day <= 30
    if not (1 <= month <= 12):
        return False
    if month == 2:
        return 1 <= day <= 29  # leap years make Feb 29 real
    return 1 <= day <= _MONTH_LENGTHS_365[month - 1]
