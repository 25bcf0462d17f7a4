# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounds propagation; same algorithm and queue order as _pykernel."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BIG = 1 << 62


cdef class Engine:
    cdef public bytearray lo
    cdef public bytearray hi
    cdef public long long propagations
    cdef public Py_ssize_t n_vars
    cdef public Py_ssize_t n_rows
    cdef long long[::1] _ptr, _var, _coef, _rlo, _rhi
    cdef long long[::1] _vptr, _vrows
    cdef long long[::1] _trail
    cdef Py_ssize_t _ntrail
    cdef long long[::1] _queue
    cdef Py_ssize_t _qhead, _qlen
    cdef unsigned char[::1] _inq
    cdef unsigned char[::1] _lo, _hi

    name = "cython"

    def __init__(self, n_vars, row_ptr, row_var, row_coef, row_lo, row_hi):
        self.n_vars = n_vars
        self.n_rows = len(row_ptr) - 1
        self._ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self._var = np.ascontiguousarray(row_var, dtype=np.int64)
        self._coef = np.ascontiguousarray(row_coef, dtype=np.int64)
        self._rlo = np.ascontiguousarray(row_lo, dtype=np.int64)
        self._rhi = np.ascontiguousarray(row_hi, dtype=np.int64)

        # var -> rows incidence, rows in ascending order per var
        counts = np.zeros(n_vars + 1, dtype=np.int64)
        var_arr = np.asarray(self._var)
        np.add.at(counts, var_arr + 1, 1)
        vptr = np.cumsum(counts)
        vrows = np.empty(len(var_arr), dtype=np.int64)
        fill = vptr[:-1].copy()
        cdef Py_ssize_t r, k, v
        for r in range(self.n_rows):
            for k in range(self._ptr[r], self._ptr[r + 1]):
                v = self._var[k]
                vrows[fill[v]] = r
                fill[v] += 1
        self._vptr = vptr
        self._vrows = vrows

        self.lo = bytearray(n_vars)
        self.hi = bytearray(b"\x01" * n_vars)
        self._lo = self.lo
        self._hi = self.hi
        self._trail = np.empty(max(n_vars, 1), dtype=np.int64)
        self._ntrail = 0
        self._queue = np.empty(self.n_rows + 1, dtype=np.int64)
        self._qhead = 0
        self._qlen = 0
        self._inq = np.zeros(max(self.n_rows, 1), dtype=np.uint8)
        self.propagations = 0

    def mark(self):
        return self._ntrail

    def undo(self, Py_ssize_t mark):
        cdef long long v
        while self._ntrail > mark:
            self._ntrail -= 1
            v = self._trail[self._ntrail]
            self._lo[v] = 0
            self._hi[v] = 1

    def propagate_all(self):
        cdef Py_ssize_t r
        for r in range(self.n_rows):
            self._inq[r] = 1
            self._enqueue(r)
        return self._run()

    def fix(self, Py_ssize_t v, int value):
        if self._lo[v] == self._hi[v]:
            return self._lo[v] == value
        if value:
            self._lo[v] = 1
        else:
            self._hi[v] = 0
        self._trail[self._ntrail] = v
        self._ntrail += 1
        self._push(v)
        return self._run()

    cdef inline void _enqueue(self, long long r):
        cdef Py_ssize_t cap = self._queue.shape[0]
        self._queue[(self._qhead + self._qlen) % cap] = r
        self._qlen += 1

    cdef inline long long _dequeue(self):
        cdef Py_ssize_t cap = self._queue.shape[0]
        cdef long long r = self._queue[self._qhead]
        self._qhead = (self._qhead + 1) % cap
        self._qlen -= 1
        return r

    cdef inline void _push(self, long long v):
        cdef Py_ssize_t k
        cdef long long r
        for k in range(self._vptr[v], self._vptr[v + 1]):
            r = self._vrows[k]
            if not self._inq[r]:
                self._inq[r] = 1
                self._enqueue(r)

    cdef void _clear(self):
        while self._qlen:
            self._inq[self._dequeue()] = 0

    cdef bint _run(self):
        cdef long long r, v, c, mn, mx, rl, rh
        cdef Py_ssize_t k, a, b
        cdef unsigned char[::1] lo = self._lo
        cdef unsigned char[::1] hi = self._hi
        while self._qlen:
            r = self._dequeue()
            self._inq[r] = 0
            self.propagations += 1
            a = self._ptr[r]
            b = self._ptr[r + 1]
            mn = 0
            mx = 0
            for k in range(a, b):
                v = self._var[k]
                c = self._coef[k]
                if c > 0:
                    mn += c * lo[v]
                    mx += c * hi[v]
                else:
                    mn += c * hi[v]
                    mx += c * lo[v]
            rl = self._rlo[r]
            rh = self._rhi[r]
            if mn > rh or mx < rl:
                self._clear()
                return False
            for k in range(a, b):
                v = self._var[k]
                if lo[v] == hi[v]:
                    continue
                c = self._coef[k]
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
                self._trail[self._ntrail] = v
                self._ntrail += 1
                self._push(v)
        return True
