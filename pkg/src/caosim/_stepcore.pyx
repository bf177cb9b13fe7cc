# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""64-bit step kernel.

A :class:`PlanKernel` freezes one update plan (radices, carry groups,
conversion edges) into C arrays at construction; each ``step`` call then only
converts the state in and the results out. Every multiplication and addition
that could leave int64 range is guarded: the call answers ``None`` instead of
wrapping, and the caller redoes that step with unbounded Python integers.
Division is safe under cdivision because all operands are non-negative
(negative state is rejected up front by the same ``None``).
"""

from libc.stdlib cimport free, malloc

cdef long long I64_MAX = 9223372036854775807


cdef Py_ssize_t* _alloc_ssize(Py_ssize_t count) except NULL:
    cdef Py_ssize_t* ptr = <Py_ssize_t*> malloc(count * sizeof(Py_ssize_t))
    if ptr == NULL:
        raise MemoryError()
    return ptr


cdef long long* _alloc_i64(Py_ssize_t count) except NULL:
    cdef long long* ptr = <long long*> malloc(count * sizeof(long long))
    if ptr == NULL:
        raise MemoryError()
    return ptr


cdef class PlanKernel:
    """One flattened update plan, ready to step int64 states.

    Scratch buffers are reused between calls, so a single instance must not
    be stepped concurrently from multiple threads.
    """

    cdef Py_ssize_t m, ngroups, nedges
    cdef long long* n
    cdef Py_ssize_t* grp_off
    cdef Py_ssize_t* grp_members
    cdef Py_ssize_t* edge_src
    cdef Py_ssize_t* edge_dst
    cdef long long* edge_coeff
    cdef long long* state
    cdef long long* p
    cdef long long* pc
    cdef long long* nxt

    def __cinit__(self, n, groups, edges):
        cdef Py_ssize_t i, j, total
        self.m = len(n)
        self.ngroups = len(groups)
        self.nedges = len(edges)

        self.n = _alloc_i64(max(self.m, 1))
        for i in range(self.m):
            self.n[i] = n[i]

        total = 0
        for grp in groups:
            total += len(grp)
        self.grp_off = _alloc_ssize(self.ngroups + 1)
        self.grp_members = _alloc_ssize(max(total, 1))
        self.grp_off[0] = 0
        j = 0
        for i in range(self.ngroups):
            for member in groups[i]:
                self.grp_members[j] = member
                j += 1
            self.grp_off[i + 1] = j

        self.edge_src = _alloc_ssize(max(self.nedges, 1))
        self.edge_dst = _alloc_ssize(max(self.nedges, 1))
        self.edge_coeff = _alloc_i64(max(self.nedges, 1))
        for i in range(self.nedges):
            src, dst, coeff = edges[i]
            self.edge_src[i] = src
            self.edge_dst[i] = dst
            self.edge_coeff[i] = coeff

        self.state = _alloc_i64(max(self.m, 1))
        self.p = _alloc_i64(max(self.m, 1))
        self.pc = _alloc_i64(max(self.m, 1))
        self.nxt = _alloc_i64(max(self.m, 1))

    def __dealloc__(self):
        free(self.n)
        free(self.grp_off)
        free(self.grp_members)
        free(self.edge_src)
        free(self.edge_dst)
        free(self.edge_coeff)
        free(self.state)
        free(self.p)
        free(self.pc)
        free(self.nxt)

    def step(self, values):
        """(next, partials, common) as int tuples, or None when the state or
        any intermediate leaves int64 range."""
        cdef Py_ssize_t m = self.m
        cdef Py_ssize_t i, g, j, e
        cdef long long lo, q, c, carry

        try:
            for i in range(m):
                self.state[i] = values[i]
        except OverflowError:
            return None

        for i in range(m):
            if self.state[i] < 0:
                return None
            if self.n[i] > 0:
                self.p[i] = self.state[i] / self.n[i]
            else:
                self.p[i] = 0
            self.pc[i] = self.p[i]

        for g in range(self.ngroups):
            lo = I64_MAX
            for j in range(self.grp_off[g], self.grp_off[g + 1]):
                if self.p[self.grp_members[j]] < lo:
                    lo = self.p[self.grp_members[j]]
            for j in range(self.grp_off[g], self.grp_off[g + 1]):
                self.pc[self.grp_members[j]] = lo

        # Remainder side: pc[i] <= state[i] // n[i], so pc[i] * n[i] <= state[i];
        # no overflow is possible here.
        for i in range(m):
            if self.n[i] > 0:
                self.nxt[i] = self.state[i] - self.pc[i] * self.n[i]
            else:
                self.nxt[i] = self.state[i]

        for e in range(self.nedges):
            carry = self.pc[self.edge_src[e]]
            c = self.edge_coeff[e]
            if carry > 0 and c > I64_MAX / carry:
                return None
            q = carry * c
            if self.nxt[self.edge_dst[e]] > I64_MAX - q:
                return None
            self.nxt[self.edge_dst[e]] += q

        return (
            tuple([self.nxt[i] for i in range(m)]),
            tuple([self.p[i] for i in range(m)]),
            tuple([self.pc[i] for i in range(m)]),
        )
