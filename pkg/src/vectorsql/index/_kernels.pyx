# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled graph-search kernels; see ``_kernels_py.py`` for the reference twin."""

import numpy as np

from libc.math cimport sqrt
from libc.stdint cimport int32_t, int64_t
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

ctypedef pair[double, int64_t] Item

BACKEND = "cython"


cdef inline double _dist(const double[:, ::1] data, Py_ssize_t i, const double[::1] q, int metric) noexcept nogil:
    cdef Py_ssize_t j, d = q.shape[0]
    cdef double acc = 0.0, t
    if metric == 0:
        for j in range(d):
            t = data[i, j] - q[j]
            acc += t * t
        return sqrt(acc)
    for j in range(d):
        acc += data[i, j] * q[j]
    if metric == 1:
        return 1.0 - acc
    return -acc


def distances(const double[:, ::1] data, const double[::1] q, const int64_t[::1] idx, int metric):
    cdef Py_ssize_t m = idx.shape[0], k
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(m):
            o[k] = _dist(data, idx[k], q, metric)
    return out


def search_layer(
    const double[:, ::1] data,
    const double[::1] q,
    const int64_t[::1] entries,
    Py_ssize_t ef,
    const int32_t[:, ::1] neighbors,
    const int32_t[::1] degrees,
    int metric,
):
    cdef Py_ssize_t n = data.shape[0], k, j, deg
    cdef vector[char] visited = vector[char](n, 0)
    # candidates: max-heap on (-dist, -idx) pops the nearest, lowest idx first
    cdef priority_queue[Item] cand
    # results: max-heap on (dist, idx) keeps the furthest on top
    cdef priority_queue[Item] res
    cdef int64_t e, c, x
    cdef double d, dx
    cdef Item top

    with nogil:
        for k in range(entries.shape[0]):
            e = entries[k]
            if visited[e]:
                continue
            visited[e] = 1
            d = _dist(data, e, q, metric)
            cand.push(Item(-d, -e))
            res.push(Item(d, e))
            if <Py_ssize_t>res.size() > ef:
                res.pop()

        while not cand.empty():
            top = cand.top()
            cand.pop()
            d = -top.first
            c = -top.second
            if <Py_ssize_t>res.size() >= ef and d > res.top().first:
                break
            deg = degrees[c]
            for j in range(deg):
                x = neighbors[c, j]
                if visited[x]:
                    continue
                visited[x] = 1
                dx = _dist(data, x, q, metric)
                if <Py_ssize_t>res.size() < ef or dx < res.top().first:
                    cand.push(Item(-dx, -x))
                    res.push(Item(dx, x))
                    if <Py_ssize_t>res.size() > ef:
                        res.pop()

    cdef vector[Item] items
    while not res.empty():
        items.push_back(res.top())
        res.pop()
    sort(items.begin(), items.end())
    cdef Py_ssize_t count = items.size()
    ids = np.empty(count, dtype=np.int64)
    dists = np.empty(count, dtype=np.float64)
    cdef int64_t[::1] ids_v = ids
    cdef double[::1] dists_v = dists
    for k in range(count):
        dists_v[k] = items[k].first
        ids_v[k] = items[k].second
    return ids, dists


def select_neighbors(
    const double[:, ::1] data,
    const int64_t[::1] cand,
    const double[::1] cand_dist,
    Py_ssize_t m,
    int metric,
):
    cdef vector[int64_t] selected
    cdef vector[int64_t] pruned
    cdef Py_ssize_t k, r
    cdef int64_t e
    cdef double de
    cdef bint good
    with nogil:
        for k in range(cand.shape[0]):
            if <Py_ssize_t>selected.size() >= m:
                break
            e = cand[k]
            de = cand_dist[k]
            good = True
            for r in range(<Py_ssize_t>selected.size()):
                if not (de < _dist(data, selected[r], data[e, :], metric)):
                    good = False
                    break
            if good:
                selected.push_back(e)
            else:
                pruned.push_back(e)
        for k in range(<Py_ssize_t>pruned.size()):
            if <Py_ssize_t>selected.size() >= m:
                break
            selected.push_back(pruned[k])
    out = np.empty(selected.size(), dtype=np.int64)
    cdef int64_t[::1] o = out
    for k in range(<Py_ssize_t>selected.size()):
        o[k] = selected[k]
    return out
