"""rfc3339 timestamps for run reports."""

import re
from datetime import datetime, timezone

import iso8601

RFC33339_PATTERN = (
    r"^(\d\d\d\d)\-(\d\d)\-(\d\d)(T|t)(\d\d):(\d\d):(\d\d)([.]\d+)?"
    r"(Z|([-+])(\d\d):(\d\d))$"
)


def rfc3339_str_to_datetime(s: str) -> datetime:
    """Convert a string conforming to RFC 3339 to a :class:`datetime.datetime`.

    Args:
        s (str) : The string to convert to :class:`datetime.datetime`.

    Returns:
        datetime: The timezone-aware datetime represented by the string.

    Raises:
        ValueError: If the string is not a valid RFC 3339 string.
    """
    s = s.upper()
    if not re.match(RFC33339_PATTERN, s):
        raise ValueError(f"Invalid RFC3339 datetime: {s!r}")
    return iso8601.parse_date(s)


def datetime_to_str(dt: datetime) -> str:
    """Format a datetime as RFC 3339, naive values being taken as UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    text = dt.astimezone(timezone.utc).isoformat(timespec="microseconds")
    return text.replace("+00:00", "Z")


def now_in_utc() -> datetime:
    """Return a datetime value of now with the UTC timezone applied."""
    return datetime.now(timezone.utc)


def now_to_rfc3339_str() -> str:
    """Return an RFC 3339 string representing now."""
    return datetime_to_str(now_in_utc())
