"""Anonymous shared memory: m registers, each process addressing them through
its own private permutation of ``1..m``.

Algorithm code sees only :class:`ProcessIdentity` tokens and the ``BOT``
marker. Everything that turns an identity into a number (trace text, packed
state keys) lives here on the harness side.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ConfigurationError, HarnessError
from .rng import XorShift64Star


class _Bottom:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"

    def __reduce__(self):
        return (_Bottom, ())


BOT = _Bottom()


class ProcessIdentity:
    """Opaque identity token. Equality is the only supported operation: no
    ordering, no hashing, no arithmetic."""

    __slots__ = ("_handle",)

    def __init__(self, handle: int):
        self._handle = handle

    def __eq__(self, other):
        if isinstance(other, ProcessIdentity):
            return self._handle == other._handle
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return "ProcessIdentity(...)"


def make_identities(n: int) -> list[ProcessIdentity]:
    return [ProcessIdentity(k) for k in range(n)]


def handle_of(identity: ProcessIdentity) -> int:
    """Harness-side only: the external process index behind an identity."""
    return identity._handle


def payload_code(value) -> int:
    """Packed encoding used in state keys: 0 for BOT, k+1 for id<k>."""
    return 0 if value is BOT else value._handle + 1


def payload_text(value) -> str:
    return "bot" if value is BOT else f"id{value._handle}"


def view_text(view: Sequence) -> str:
    return ",".join(payload_text(v) for v in view)


class Permutation:
    """Bijection on ``1..m``: ``perm(x)`` is the external index behind local x."""

    __slots__ = ("targets", "_inverse")

    def __init__(self, targets: Sequence[int]):
        targets = tuple(int(t) for t in targets)
        m = len(targets)
        if m < 1 or sorted(targets) != list(range(1, m + 1)):
            raise ConfigurationError(f"not a permutation of 1..{m}: {targets}")
        self.targets = targets
        inv = [0] * m
        for x, e in enumerate(targets, 1):
            inv[e - 1] = x
        self._inverse = tuple(inv)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(range(1, m + 1))

    @property
    def m(self) -> int:
        return len(self.targets)

    def __call__(self, x: int) -> int:
        return self.targets[x - 1]

    def local_of(self, e: int) -> int:
        return self._inverse[e - 1]

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.targets == other.targets

    def __hash__(self):
        return hash(self.targets)

    def __repr__(self):
        return f"Permutation({list(self.targets)})"


def identity_permutations(n: int, m: int) -> list[Permutation]:
    return [Permutation.identity(m) for _ in range(n)]


def seeded_permutations(n: int, m: int, seed: int) -> list[Permutation]:
    rng = XorShift64Star(seed)
    perms = []
    for _ in range(n):
        targets = list(range(1, m + 1))
        rng.shuffle(targets)
        perms.append(Permutation(targets))
    return perms


def ring_permutations(m: int, ell: int, n: int | None = None) -> list[Permutation]:
    """Rotational layout: process i starts at external ``i*(m/ell) + 1`` and
    walks the ring clockwise. Returns ``n`` permutations (default ``ell``);
    processes past ``ell`` wrap onto the same starting points."""
    if ell < 1 or m % ell:
        raise ConfigurationError(f"ring layout needs ell | m, got m={m}, ell={ell}")
    gap = m // ell
    count = ell if n is None else n
    return [
        Permutation([((i * gap + x - 1) % m) + 1 for x in range(1, m + 1)])
        for i in range(count)
    ]


class RegisterArray:
    """m atomic registers seen through per-process permutations.

    Each operation is one indivisible transition and appends exactly one
    record to ``trace`` when a trace is attached. With ``tagged=True`` every
    write also stamps the cell with ``(writer, sequence number)`` so that a
    double collect can tell a rewrite of the same value from no write.
    """

    def __init__(self, m: int, perms: Sequence[Permutation], identities: Sequence[ProcessIdentity],
                 *, rmw: bool = False, tagged: bool = False, trace=None):
        if m < 1:
            raise ConfigurationError("m must be >= 1")
        if len(perms) != len(identities):
            raise ConfigurationError("need one permutation per process")
        perms = [p if isinstance(p, Permutation) else Permutation(p) for p in perms]
        for p in perms:
            if p.m != m:
                raise ConfigurationError(f"permutation over 1..{p.m} used with m={m}")
        self.m = m
        self.perms = perms
        self.identities = list(identities)
        self.rmw = rmw
        self.tagged = tagged
        self.trace = trace
        self.cells: list = [BOT] * m
        self.tags: list = [None] * m
        self._sn = [0] * len(perms)

    def _ext(self, proc: int, x: int) -> int:
        if not 1 <= x <= self.m:
            raise HarnessError(f"local index {x} out of range 1..{self.m}")
        return self.perms[proc].targets[x - 1]

    def _check_payload(self, proc: int, value) -> None:
        if value is not BOT and not value == self.identities[proc]:
            raise HarnessError(f"process {proc} tried to store a foreign identity")

    def read(self, proc: int, x: int):
        e = self._ext(proc, x)
        v = self.cells[e - 1]
        if self.trace is not None:
            t = payload_text(v)
            self.trace.record(proc, "read", x, e, t, t)
        return v

    def read_tagged(self, proc: int, x: int):
        e = self._ext(proc, x)
        v = self.cells[e - 1]
        if self.trace is not None:
            t = payload_text(v)
            self.trace.record(proc, "read", x, e, t, t)
        return v, self.tags[e - 1]

    def write(self, proc: int, x: int, value) -> None:
        e = self._ext(proc, x)
        self._check_payload(proc, value)
        old = self.cells[e - 1]
        self.cells[e - 1] = value
        if self.tagged:
            self._sn[proc] += 1
            self.tags[e - 1] = (proc, self._sn[proc])
        if self.trace is not None:
            self.trace.record(proc, "write", x, e, payload_text(old), payload_text(value))

    def cas(self, proc: int, x: int, old, new) -> bool:
        if not self.rmw:
            raise HarnessError("compare&swap used on read/write registers")
        e = self._ext(proc, x)
        self._check_payload(proc, new)
        cur = self.cells[e - 1]
        ok = cur == old
        if ok:
            self.cells[e - 1] = new
            if self.tagged:
                self._sn[proc] += 1
                self.tags[e - 1] = (proc, self._sn[proc])
        if self.trace is not None:
            self.trace.record(proc, "cas", x, e, payload_text(cur), payload_text(self.cells[e - 1]), ok)
        return ok

    def snapshot(self, proc: int) -> tuple:
        """Atomic one-step snapshot through ``proc``'s permutation."""
        targets = self.perms[proc].targets
        view = tuple(self.cells[e - 1] for e in targets)
        if self.trace is not None:
            self.trace.record(proc, "snapshot", after=view_text(view), phase="atomic")
        return view

    def external_view(self, proc: int) -> tuple:
        """Untraced inspection of what ``proc`` would see; harness use only."""
        return tuple(self.cells[e - 1] for e in self.perms[proc].targets)

    def owners(self) -> list[int]:
        """External index of each cell's owner, -1 for BOT (harness view)."""
        return [-1 if v is BOT else v._handle for v in self.cells]

    def encode(self, with_tags: bool = False) -> tuple:
        codes = tuple(payload_code(v) for v in self.cells)
        if with_tags and self.tagged:
            return codes + tuple(self.tags)
        return codes

    def load(self, codes: Sequence[int]) -> None:
        self.cells = [BOT if c == 0 else self.identities[c - 1] for c in codes]
        self.tags = [None] * self.m
