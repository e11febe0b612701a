# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-pixel kernels: sphere rotation of pixel grids and resampling.

Mirrors sphereflow.kernels.fallback. Loops run without the GIL; rows are
independent, so results do not depend on execution order.
"""

import numpy as np

cimport cython
from libc.math cimport M_PI, acos, atan2, cos, floor, sin

ctypedef fused pixel_t:
    float
    double

BACKEND_NAME = "compiled"


def rotate_pixel_coords(double[:, ::1] matrix, double[::1] col, double[::1] row,
                        int width, int height):
    cdef Py_ssize_t n = col.shape[0]
    if row.shape[0] != n:
        raise ValueError("col/row length mismatch")
    out_col = np.empty(n, dtype=np.float64)
    out_row = np.empty(n, dtype=np.float64)
    cdef double[::1] oc = out_col
    cdef double[::1] orow = out_row
    cdef double m00 = matrix[0, 0], m01 = matrix[0, 1], m02 = matrix[0, 2]
    cdef double m10 = matrix[1, 0], m11 = matrix[1, 1], m12 = matrix[1, 2]
    cdef double m20 = matrix[2, 0], m21 = matrix[2, 1], m22 = matrix[2, 2]
    cdef double col_to_phi = 2.0 * M_PI / width
    cdef double row_to_colat = M_PI / height
    cdef double phi_to_col = width / (2.0 * M_PI)
    cdef double colat_to_row = height / M_PI
    cdef double phi, colat, st, x, y, z, x2, y2, z2
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            phi = (col[i] + 0.5) * col_to_phi - M_PI
            colat = (row[i] + 0.5) * row_to_colat
            st = sin(colat)
            x = st * cos(phi)
            y = st * sin(phi)
            z = cos(colat)
            x2 = m00 * x + m01 * y + m02 * z
            y2 = m10 * x + m11 * y + m12 * z
            z2 = m20 * x + m21 * y + m22 * z
            if z2 > 1.0:
                z2 = 1.0
            elif z2 < -1.0:
                z2 = -1.0
            oc[i] = (atan2(y2, x2) + M_PI) * phi_to_col - 0.5
            orow[i] = acos(z2) * colat_to_row - 0.5
    return out_col, out_row


cdef inline Py_ssize_t _wrap(Py_ssize_t c, Py_ssize_t width) nogil:
    c = c % width
    if c < 0:
        c += width
    return c


cdef inline Py_ssize_t _clamp(Py_ssize_t r, Py_ssize_t height) nogil:
    if r < 0:
        return 0
    if r > height - 1:
        return height - 1
    return r


def sample_bilinear(pixel_t[:, :, ::1] img, double[::1] col, double[::1] row):
    cdef Py_ssize_t height = img.shape[0], width = img.shape[1], nch = img.shape[2]
    cdef Py_ssize_t n = col.shape[0]
    out = np.empty((n, nch), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, k, c0, c1, r0, r1
    cdef double dc, dr, fc, fr, w00, w01, w10, w11
    with nogil:
        for i in range(n):
            fc = floor(col[i])
            fr = floor(row[i])
            dc = col[i] - fc
            dr = row[i] - fr
            c0 = _wrap(<Py_ssize_t> fc, width)
            c1 = _wrap(c0 + 1, width)
            r0 = _clamp(<Py_ssize_t> fr, height)
            r1 = _clamp((<Py_ssize_t> fr) + 1, height)
            w00 = (1.0 - dr) * (1.0 - dc)
            w01 = (1.0 - dr) * dc
            w10 = dr * (1.0 - dc)
            w11 = dr * dc
            for k in range(nch):
                o[i, k] = (w00 * <double> img[r0, c0, k]
                           + w01 * <double> img[r0, c1, k]
                           + w10 * <double> img[r1, c0, k]
                           + w11 * <double> img[r1, c1, k])
    return out


def sample_nearest(pixel_t[:, :, ::1] img, double[::1] col, double[::1] row):
    cdef Py_ssize_t height = img.shape[0], width = img.shape[1], nch = img.shape[2]
    cdef Py_ssize_t n = col.shape[0]
    if pixel_t is float:
        out = np.empty((n, nch), dtype=np.float32)
    else:
        out = np.empty((n, nch), dtype=np.float64)
    cdef pixel_t[:, ::1] o = out
    cdef Py_ssize_t i, k, ci, ri
    with nogil:
        for i in range(n):
            ci = _wrap(<Py_ssize_t> floor(col[i] + 0.5), width)
            ri = _clamp(<Py_ssize_t> floor(row[i] + 0.5), height)
            for k in range(nch):
                o[i, k] = img[ri, ci, k]
    return out
