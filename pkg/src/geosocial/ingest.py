"""Build a geosocial graph from Yelp-style JSON-lines files.

Three inputs are read: ``business.json`` (SPs), ``user.json`` (users and
their friend lists) and ``review.json`` (user -> business star ratings).
Unknown fields are ignored.  Bad lines are skipped and counted unless
``strict`` is set, in which case the first one raises :class:`ParseError`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Callable, Iterable, TypeVar

from .errors import DuplicateNode, InvalidCoordinate, ParseError, StarsOutOfRange
from .graph import EdgeKind, GeoPoint, GeosocialGraph, check_coordinates

log = logging.getLogger(__name__)

INTIMACY_FLOOR = 0.1

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class BusinessRecord:
    business_id: str
    name: str
    latitude: float
    longitude: float
    categories: str | None = None


@dataclass(frozen=True, slots=True)
class UserRecord:
    user_id: str
    friends: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class ReviewRecord:
    user_id: str
    business_id: str
    stars: int
    date: str


@dataclass
class IngestReport:
    users_added: int = 0
    sps_added: int = 0
    friendship_edges: int = 0
    review_edges: int = 0
    reviews_total: int = 0
    reviews_collapsed: int = 0
    lines_skipped: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass
class IngestConfig:
    strict: bool = False


class Records(list):
    """A list of parsed records that also remembers how many lines were skipped."""

    def __init__(self, items: Iterable = (), skipped: int = 0):
        super().__init__(items)
        self.skipped = skipped


def _when(date: str) -> datetime:
    """Parse an ISO-8601 date or datetime; aware values are converted to naive UTC."""
    when = datetime.fromisoformat(date)
    if when.tzinfo is not None:
        when = when.astimezone(timezone.utc).replace(tzinfo=None)
    return when


# parsing ------------------------------------------------------------------


def _text(obj: dict, key: str) -> str:
    value = obj[key]
    if not isinstance(value, str) or not value:
        raise ValueError(f"{key} must be a non-empty string")
    return value


def _business(obj: dict) -> BusinessRecord:
    lat, lon = obj["latitude"], obj["longitude"]
    if isinstance(lat, bool) or isinstance(lon, bool):
        raise ValueError("coordinates must be numbers")
    lat, lon = float(lat), float(lon)
    check_coordinates(lat, lon)
    categories = obj.get("categories")
    if categories is not None and not isinstance(categories, str):
        raise ValueError("categories must be text")
    name = obj.get("name") or ""
    return BusinessRecord(_text(obj, "business_id"), str(name), lat, lon, categories)


def _user(obj: dict) -> UserRecord:
    friends = obj.get("friends") or ()
    if isinstance(friends, str):
        # the public dataset stores friends as "id1, id2" or "None"
        friends = [] if friends.strip() == "None" else friends.split(",")
    out = tuple(f.strip() for f in friends if isinstance(f, str) and f.strip())
    return UserRecord(_text(obj, "user_id"), out)


def _review(obj: dict) -> ReviewRecord:
    stars = obj["stars"]
    if isinstance(stars, bool) or not isinstance(stars, (int, float)) or stars != int(stars):
        raise ValueError(f"stars must be an integer, got {stars!r}")
    stars = int(stars)
    if not 1 <= stars <= 5:
        raise StarsOutOfRange(f"stars {stars} not in 1..5")
    date = obj["date"]
    if not isinstance(date, str):
        raise ValueError("date must be text")
    _when(date)
    return ReviewRecord(_text(obj, "user_id"), _text(obj, "business_id"), stars, date)


def _parse(stream: Iterable[str | bytes], build: Callable[[dict], T], strict: bool,
           source: str | None) -> Records:
    out = Records()
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            out.append(build(obj))
        except (ValueError, KeyError, TypeError) as exc:
            reason = f"{type(exc).__name__}: {exc}"
            if strict:
                raise ParseError(lineno, reason, source) from exc
            log.debug("skipping %s line %d: %s", source or "input", lineno, reason)
            out.skipped += 1
    return out


def parse_businesses(stream: Iterable[str | bytes], strict: bool = False,
                     source: str | None = None) -> Records:
    return _parse(stream, _business, strict, source)


def parse_users(stream: Iterable[str | bytes], strict: bool = False,
                source: str | None = None) -> Records:
    return _parse(stream, _user, strict, source)


def parse_reviews(stream: Iterable[str | bytes], strict: bool = False,
                  source: str | None = None) -> Records:
    return _parse(stream, _review, strict, source)


# normalization ------------------------------------------------------------


def keywords_from_categories(categories: str | None) -> set[str]:
    if not categories:
        return set()
    return {tok.strip().lower() for tok in categories.split(",") if tok.strip()}


def stars_to_weight(stars: int) -> float:
    if isinstance(stars, bool) or not 1 <= stars <= 5:
        raise StarsOutOfRange(f"stars {stars!r} not in 1..5")
    return stars / 5


def intimacy(friends_a: set[str] | frozenset[str], friends_b: set[str] | frozenset[str]) -> float:
    """Jaccard similarity of two friend sets, floored at 0.1."""
    union = len(friends_a | friends_b)
    if union == 0:
        return INTIMACY_FLOOR
    return max(INTIMACY_FLOOR, len(friends_a & friends_b) / union)


# graph construction -------------------------------------------------------


def build_graph(
    businesses: Iterable[BusinessRecord],
    users: Iterable[UserRecord],
    reviews: Iterable[ReviewRecord],
    config: IngestConfig | None = None,
) -> tuple[GeosocialGraph, IngestReport]:
    """Assemble the graph.

    Node ids are assigned businesses first (file order), then users (file
    order), then implicit users who only appear as review authors (first
    appearance order).  All reviews of one (user, SP) pair collapse to a
    single edge carrying the latest review's stars; ties on date keep the
    higher stars.  SP statistics count every review.
    """
    config = config or IngestConfig()
    report = IngestReport()
    for recs in (businesses, users, reviews):
        report.lines_skipped += getattr(recs, "skipped", 0)
    g = GeosocialGraph()

    for b in businesses:
        try:
            g.add_service_provider(b.business_id, b.name, keywords_from_categories(b.categories),
                                   GeoPoint(b.latitude, b.longitude))
        except (DuplicateNode, InvalidCoordinate):
            if config.strict:
                raise
            report.lines_skipped += 1
            continue
        report.sps_added += 1

    friends_of: dict[str, frozenset[str]] = {}
    accepted: list[UserRecord] = []
    for u in users:
        try:
            g.add_user(u.user_id)
        except DuplicateNode:
            if config.strict:
                raise
            report.lines_skipped += 1
            continue
        friends_of[u.user_id] = frozenset(u.friends)
        accepted.append(u)
        report.users_added += 1

    for u in accepted:
        a = g.user_id(u.user_id)
        for f in sorted(set(u.friends)):
            if f == u.user_id:
                continue
            if f not in friends_of:
                report.lines_skipped += 1
                continue
            b = g.user_id(f)
            if g.edge(a, b) is not None:
                continue
            g.connect(a, b, intimacy(friends_of[u.user_id], friends_of[f]), EdgeKind.FRIENDSHIP)
            report.friendship_edges += 1

    # (user, sp) -> (date, stars) of the review that wins the collapse
    latest: dict[tuple[int, int], tuple[datetime, int]] = {}
    totals: dict[int, list[int]] = {}
    for r in reviews:
        try:
            sp = g.sp_id(r.business_id)
        except LookupError:
            report.lines_skipped += 1
            continue
        try:
            user = g.user_id(r.user_id)
        except LookupError:
            user = g.add_user(r.user_id)
            report.users_added += 1
        report.reviews_total += 1
        acc = totals.setdefault(sp, [0, 0])
        acc[0] += 1
        acc[1] += r.stars
        key = (user, sp)
        cand = (_when(r.date), r.stars)
        prev = latest.get(key)
        if prev is None or cand > prev:
            latest[key] = cand

    for (user, sp), (_, stars) in latest.items():
        g.connect(user, sp, stars_to_weight(stars), EdgeKind.REVIEW, stars=stars)
    report.review_edges = len(latest)
    report.reviews_collapsed = report.reviews_total - report.review_edges
    for sp, (count, star_sum) in totals.items():
        g.set_sp_stats(sp, count, star_sum / count)
    return g, report


def ingest_files(business_path, user_path, review_path,
                 config: IngestConfig | None = None) -> tuple[GeosocialGraph, IngestReport]:
    config = config or IngestConfig()
    parsed = []
    for path, parse in ((business_path, parse_businesses), (user_path, parse_users),
                        (review_path, parse_reviews)):
        with open(path, encoding="utf-8") as fh:
            parsed.append(parse(fh, strict=config.strict, source=str(path)))
    return build_graph(*parsed, config=config)
