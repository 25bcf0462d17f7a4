"""Pure-Python bounds propagation over linear rows of 0/1 variables.

Mirrors ``_ckernel.pyx`` statement for statement: same FIFO row queue,
same fixing order, so both engines report identical propagation counts.
"""

from collections import deque

BIG = 1 << 62


class Engine:
    name = "python"

    def __init__(self, n_vars, row_ptr, row_var, row_coef, row_lo, row_hi):
        self.n_vars = int(n_vars)
        self.n_rows = len(row_ptr) - 1
        self._ptr = [int(x) for x in row_ptr]
        self._var = [int(x) for x in row_var]
        self._coef = [int(x) for x in row_coef]
        self._rlo = [int(x) for x in row_lo]
        self._rhi = [int(x) for x in row_hi]
        rows_of = [[] for _ in range(self.n_vars)]
        for r in range(self.n_rows):
            for k in range(self._ptr[r], self._ptr[r + 1]):
                rows_of[self._var[k]].append(r)
        self._rows_of = rows_of
        self.lo = bytearray(self.n_vars)
        self.hi = bytearray(b"\x01" * self.n_vars)
        self._trail = []
        self._queue = deque()
        self._inq = bytearray(self.n_rows)
        self.propagations = 0

    def mark(self):
        return len(self._trail)

    def undo(self, mark):
        trail, lo, hi = self._trail, self.lo, self.hi
        while len(trail) > mark:
            v = trail.pop()
            lo[v] = 0
            hi[v] = 1

    def propagate_all(self):
        for r in range(self.n_rows):
            self._inq[r] = 1
            self._queue.append(r)
        return self._run()

    def fix(self, v, value):
        lo, hi = self.lo, self.hi
        if lo[v] == hi[v]:
            return lo[v] == value
        if value:
            lo[v] = 1
        else:
            hi[v] = 0
        self._trail.append(v)
        self._push(v)
        return self._run()

    def _push(self, v):
        q, inq = self._queue, self._inq
        for r in self._rows_of[v]:
            if not inq[r]:
                inq[r] = 1
                q.append(r)

    def _run(self):
        q, inq = self._queue, self._inq
        ptr, var, coef = self._ptr, self._var, self._coef
        rlo, rhi = self._rlo, self._rhi
        lo, hi, trail = self.lo, self.hi, self._trail
        while q:
            r = q.popleft()
            inq[r] = 0
            self.propagations += 1
            a, b = ptr[r], ptr[r + 1]
            mn = mx = 0
            for k in range(a, b):
                v = var[k]
                c = coef[k]
                if c > 0:
                    mn += c * lo[v]
                    mx += c * hi[v]
                else:
                    mn += c * hi[v]
                    mx += c * lo[v]
            rl, rh = rlo[r], rhi[r]
            if mn > rh or mx < rl:
                self._clear()
                return False
            for k in range(a, b):
                v = var[k]
                if lo[v] == hi[v]:
                    continue
                c = coef[k]
                if c > 0:
                    if mn + c > rh:
                        if mx - c < rl:
                            self._clear()
                            return False
                        hi[v] = 0
                        mx -= c
                    elif mx - c < rl:
                        lo[v] = 1
                        mn += c
                    else:
                        continue
                else:
                    if mx + c < rl:
                        if mn - c > rh:
                            self._clear()
                            return False
                        hi[v] = 0
                        mn -= c
                    elif mn - c > rh:
                        lo[v] = 1
                        mx += c
                    else:
                        continue
                trail.append(v)
                self._push(v)
        return True

    def _clear(self):
        q, inq = self._queue, self._inq
        while q:
            inq[q.popleft()] = 0
