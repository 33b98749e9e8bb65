"""System catalog loading and git release handling."""

from __future__ import annotations

import csv
import logging
import os
import re
import subprocess
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from pathlib import Path
from urllib.parse import urlparse

log = logging.getLogger(__name__)

CATALOG_HEADER = ("name", "git_url", "service_number", "multiple_tags", "introduction", "stars")
HEAD = "HEAD"


class CatalogError(ValueError):
    pass


class RepositoryError(RuntimeError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    git_url: str
    stars: int = 0
    claimed_service_count: int = 0
    multiple_tags: bool = False
    introduction: str = ""


@dataclass(frozen=True)
class ReleaseRef:
    release_id: str
    commit_id: str
    commit_timestamp: datetime


def parse_stars(text: str) -> int:
    """``"28.7K"`` -> 28700, ``"627"`` -> 627."""
    s = text.strip().replace(",", "")
    scale = 1
    if s[-1:] in ("k", "K"):
        s, scale = s[:-1], 1000
    try:
        value = Decimal(s) * scale
    except InvalidOperation:
        raise ValueError(f"unparseable stars {text!r}") from None
    if value < 0:
        raise ValueError(f"negative stars {text!r}")
    return int(value.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def is_valid_url(url: str) -> bool:
    if re.fullmatch(r"[\w.-]+@[\w.-]+:[\w./~-]+", url):  # scp-like git@host:path
        return True
    parsed = urlparse(url)
    if parsed.scheme == "file":
        return bool(parsed.path)
    return parsed.scheme in ("http", "https", "git", "ssh") and bool(parsed.netloc)


def load_catalog(path) -> list[CatalogEntry]:
    path = Path(path)
    if not path.is_file():
        raise CatalogError(f"catalog not found: {path}")
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CATALOG_HEADER:
            raise CatalogError(f"{path}: header must be {','.join(CATALOG_HEADER)}")
        entries: list[CatalogEntry] = []
        seen: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(CATALOG_HEADER):
                raise CatalogError(f"{path}: row {lineno}: expected {len(CATALOG_HEADER)} fields, got {len(row)}")
            name, url, number, tags, intro, stars = (c.strip() for c in row)
            if not name:
                raise CatalogError(f"{path}: row {lineno}: empty name")
            if name in seen:
                raise CatalogError(f"{path}: row {lineno}: duplicate name {name!r} (first on row {seen[name]})")
            seen[name] = lineno
            if not is_valid_url(url):
                raise CatalogError(f"{path}: row {lineno}: invalid git_url {url!r}")
            try:
                count = int(number)
                if count < 0:
                    raise ValueError
            except ValueError:
                raise CatalogError(f"{path}: row {lineno}: bad service_number {number!r}") from None
            if tags.lower() not in ("yes", "no"):
                raise CatalogError(f"{path}: row {lineno}: multiple_tags must be Yes or No, got {tags!r}")
            try:
                star_count = parse_stars(stars)
            except ValueError as exc:
                raise CatalogError(f"{path}: row {lineno}: {exc}") from None
            entries.append(CatalogEntry(name, url, star_count, count, tags.lower() == "yes", intro))
    return entries


def write_catalog(entries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CATALOG_HEADER)
        for e in entries:
            writer.writerow([e.name, e.git_url, e.claimed_service_count,
                             "Yes" if e.multiple_tags else "No", e.introduction, e.stars])


# -- git -----------------------------------------------------------------------------

def _git(args, cwd=None, check=True) -> subprocess.CompletedProcess:
    env = dict(os.environ, GIT_TERMINAL_PROMPT="0", LC_ALL="C")
    proc = subprocess.run(["git", *args], cwd=cwd, env=env, capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise RepositoryError(f"git {' '.join(args)} failed in {cwd or '.'}: {proc.stderr.strip()}")
    return proc


def is_repository(path) -> bool:
    path = Path(path)
    if not (path / ".git").exists():
        return False
    return _git(["rev-parse", "--git-dir"], cwd=path, check=False).returncode == 0


def fetch_repository(entry: CatalogEntry, workspace) -> Path:
    """Clone ``entry`` into ``workspace/<name>``, or update an existing clone."""
    target = Path(workspace) / entry.name
    try:
        if target.exists():
            if not is_repository(target):
                if target.is_dir() and not any(target.iterdir()):
                    _git(["clone", "--quiet", entry.git_url, str(target)])
                    return target
                raise RepositoryError(f"{target} exists and is not a git repository")
            _git(["fetch", "--quiet", "--tags", "--force", "--prune", "origin"], cwd=target)
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            _git(["clone", "--quiet", entry.git_url, str(target)])
    except RepositoryError as exc:
        raise RepositoryError(f"{entry.name}: {exc}") from exc
    return target


def _default_tip(repo: Path) -> str:
    for ref in ("refs/remotes/origin/HEAD", "HEAD"):
        proc = _git(["symbolic-ref", "-q", ref], cwd=repo, check=False)
        if proc.returncode == 0 and proc.stdout.strip():
            return _git(["rev-parse", proc.stdout.strip()], cwd=repo).stdout.strip()
    # detached HEAD without a remote: pick the branch with the newest commit
    proc = _git(["for-each-ref", "--sort=-committerdate", "--count=1", "--format=%(objectname)",
                 "refs/heads"], cwd=repo, check=False)
    if proc.stdout.strip():
        return proc.stdout.strip()
    return _git(["rev-parse", "HEAD"], cwd=repo).stdout.strip()


def _commit_time(repo: Path, commit: str) -> datetime:
    ts = _git(["show", "-s", "--format=%ct", commit], cwd=repo).stdout.strip()
    return datetime.fromtimestamp(int(ts), tz=timezone.utc)


def list_releases(repo) -> list[ReleaseRef]:
    repo = Path(repo)
    if not is_repository(repo):
        raise RepositoryError(f"{repo} is not a git repository")
    fmt = "%(refname:short)%00%(objecttype)%00%(objectname)%00%(*objecttype)%00%(*objectname)"
    out = _git(["for-each-ref", f"--format={fmt}", "refs/tags"], cwd=repo).stdout
    releases = []
    for line in out.splitlines():
        name, otype, oid, deref_type, deref_oid = line.split("\0")
        if otype == "commit":
            commit = oid
        elif otype == "tag" and deref_type == "commit":
            commit = deref_oid
        else:
            log.debug("tag %s does not point at a commit; skipped", name)
            continue
        releases.append(ReleaseRef(name, commit, _commit_time(repo, commit)))
    if not releases:
        tip = _default_tip(repo)
        return [ReleaseRef(HEAD, tip, _commit_time(repo, tip))]
    return sorted(releases, key=lambda r: (r.commit_timestamp, r.release_id))


def checkout_release(repo, release: ReleaseRef) -> Path:
    repo = Path(repo)
    if release.release_id != HEAD:
        proc = _git(["rev-parse", "--verify", "-q", f"refs/tags/{release.release_id}^{{commit}}"],
                    cwd=repo, check=False)
        if proc.returncode != 0:
            raise RepositoryError(f"unknown release {release.release_id!r} in {repo}")
    if _git(["cat-file", "-t", release.commit_id], cwd=repo, check=False).stdout.strip() != "commit":
        raise RepositoryError(f"release {release.release_id!r}: unknown commit {release.commit_id}")
    status = _git(["status", "--porcelain", "--untracked-files=no"], cwd=repo).stdout
    if status.strip():
        raise RepositoryError(f"{repo} has local modifications; refusing to check out {release.release_id}")
    _git(["checkout", "--quiet", "--detach", release.commit_id], cwd=repo)
    return repo
