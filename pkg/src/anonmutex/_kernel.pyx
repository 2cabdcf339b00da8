"""Compiled successor function over packed global states.

Mirrors the rw/rmw step machines exactly on the integer encoding described
in ``kernel``; agreement with the Python fallback is checked by the tests.
"""

cdef enum:
    MAX_PROCS = 16
    MAX_CELLS = 32
    MAX_KEY = MAX_CELLS + MAX_PROCS * (4 + MAX_CELLS)

cdef enum:
    BUSY = 0
    ENTERED = 1
    WITHDRAWN = 2
    RELEASED = 3

cdef int ENTERED_CS = 1
cdef int ENTRY_VIOLATION = 2
cdef int HARNESS_VIOLATION = 4


cdef class NativeKernel:
    cdef public str name
    cdef bint rw
    cdef int n, m, width, voff, klen
    cdef int perm[MAX_PROCS][MAX_CELLS]
    cdef int s[MAX_KEY]

    def __init__(self, bint rw, int n, int m, perms):
        if n < 1 or n > MAX_PROCS or m < 1 or m > MAX_CELLS:
            raise ValueError(f"native kernel supports n <= {MAX_PROCS}, m <= {MAX_CELLS}")
        self.name = "native"
        self.rw = rw
        self.n = n
        self.m = m
        self.voff = 3 if rw else 4
        self.width = self.voff + m
        self.klen = m + n * self.width
        for i in range(n):
            for x in range(m):
                self.perm[i][x] = perms[i][x] - 1

    cdef inline int cell(self, int i, int x):
        # external slot of local index x (1-based)
        return self.perm[i][x - 1]

    cdef int rw_shrink_advance(self, int base, int c):
        cdef int *s = self.s
        cdef int x
        for x in range(s[base + 1] + 1, self.m + 1):
            if s[base + 3 + x - 1] == c:
                s[base + 1] = x
                return BUSY
        s[base + 1] = 0
        if s[base] == 6 or s[base] == 7:
            s[base] = 0
            return RELEASED
        s[base] = 1
        return WITHDRAWN

    cdef int rw_step(self, int i) except -1:
        cdef int *s = self.s
        cdef int m = self.m
        cdef int base = m + i * self.width
        cdef int v = base + 3
        cdef int c = i + 1
        cdef int pc = s[base]
        cdef int x, y, own, nfree, first, cnt, dup
        if pc == 0:
            s[base] = 1
            pc = 1
        elif pc == 5:
            s[base + 1] = 0
            s[base] = 6
            return self.rw_shrink_advance(base, c)
        if pc == 1:
            own = 0
            nfree = 0
            first = 0
            for x in range(1, m + 1):
                s[v + x - 1] = s[self.cell(i, x)]
                if s[v + x - 1] == c:
                    own += 1
                elif s[v + x - 1] == 0:
                    nfree += 1
                    if first == 0:
                        first = x
            if own == 0 and nfree < m:
                return BUSY
            if nfree:
                s[base + 1] = first
                s[base] = 2
                return BUSY
            cnt = 0
            for x in range(m):
                dup = 0
                for y in range(x):
                    if s[v + y] == s[v + x]:
                        dup = 1
                        break
                if not dup:
                    cnt += 1
            s[base + 2] = cnt
            if own * cnt < m:
                s[base + 1] = 0
                s[base] = 3
                return self.rw_shrink_advance(base, c)
            if own == m:
                s[base] = 5
                return ENTERED
            return BUSY
        x = s[base + 1]
        if pc == 2:
            if s[v + x - 1] != 0:
                raise AssertionError("write into a cell the view did not show as BOT")
            s[self.cell(i, x)] = c
            s[base + 1] = 0
            s[base] = 1
            return BUSY
        if pc == 3 or pc == 6:
            if s[self.cell(i, x)] == c:
                s[base] = pc + 1
                return BUSY
            return self.rw_shrink_advance(base, c)
        if pc == 4 or pc == 7:
            s[self.cell(i, x)] = 0
            s[base] = pc - 1
            return self.rw_shrink_advance(base, c)
        raise AssertionError(f"bad rw pc {pc}")

    cdef int rmw_release_advance(self, int base, int after, int c):
        cdef int *s = self.s
        cdef int x
        for x in range(after + 1, self.m + 1):
            if s[base + 4 + x - 1] == c:
                s[base] = 3
                s[base + 1] = x
                return BUSY
        s[base] = 4
        s[base + 1] = 1
        return WITHDRAWN

    cdef int rmw_step(self, int i) except -1:
        cdef int *s = self.s
        cdef int m = self.m
        cdef int base = m + i * self.width
        cdef int v = base + 4
        cdef int c = i + 1
        cdef int pc = s[base]
        cdef int x, y, e, own, most, k, empty
        if pc == 0:
            s[base] = 1
            s[base + 1] = 1
            pc = 1
        elif pc == 5:
            s[base] = 6
            s[base + 1] = 1
            return BUSY
        x = s[base + 1]
        e = self.cell(i, x)
        if pc == 1:
            if s[e] == 0:
                s[e] = c
            if x < m:
                s[base + 1] = x + 1
            else:
                s[base] = 2
                s[base + 1] = 1
            return BUSY
        if pc == 2:
            s[v + x - 1] = s[e]
            if x < m:
                s[base + 1] = x + 1
                return BUSY
            most = 0
            own = 0
            for x in range(m):
                if s[v + x] == 0:
                    continue
                k = 0
                for y in range(m):
                    if s[v + y] == s[v + x]:
                        k += 1
                if k > most:
                    most = k
                if s[v + x] == c:
                    own += 1
            s[base + 2] = own
            s[base + 3] = most
            if own < most:
                return self.rmw_release_advance(base, 0, c)
            if 2 * own > m:
                s[base] = 5
                s[base + 1] = 0
                return ENTERED
            s[base] = 1
            s[base + 1] = 1
            return BUSY
        if pc == 3:
            s[e] = 0
            return self.rmw_release_advance(base, x, c)
        if pc == 4:
            s[v + x - 1] = s[e]
            if x < m:
                s[base + 1] = x + 1
                return BUSY
            empty = 1
            for y in range(m):
                if s[v + y] != 0:
                    empty = 0
                    break
            s[base + 1] = 1
            if empty:
                s[base] = 1
            return BUSY
        if pc == 6:
            if s[e] == c:
                s[e] = 0
            if x < m:
                s[base + 1] = x + 1
                return BUSY
            s[base] = 0
            s[base + 1] = 0
            return RELEASED
        raise AssertionError(f"bad rmw pc {pc}")

    cdef bint entry_ok(self, int i):
        cdef int v = self.m + i * self.width + self.voff
        cdef int x, own = 0
        for x in range(self.m):
            if self.s[v + x] == i + 1:
                own += 1
        return own == self.m if self.rw else 2 * own > self.m

    def expand(self, tuple key):
        cdef int i, j, res, flags
        cdef int klen = self.klen
        cdef int src[MAX_KEY]
        if len(key) != klen:
            raise ValueError(f"key length {len(key)} != {klen}")
        for j in range(klen):
            src[j] = key[j]
        out = []
        for i in range(self.n):
            for j in range(klen):
                self.s[j] = src[j]
            try:
                res = self.rw_step(i) if self.rw else self.rmw_step(i)
            except AssertionError:
                out.append((i, key, HARNESS_VIOLATION))
                continue
            flags = 0
            if res == ENTERED:
                flags = ENTERED_CS
                if not self.entry_ok(i):
                    flags |= ENTRY_VIOLATION
            out.append((i, tuple([self.s[j] for j in range(klen)]), flags))
        return out
