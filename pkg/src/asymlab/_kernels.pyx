# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; mirrors ``_pykernels`` operation for operation."""
from libc.math cimport exp, log, log1p, expm1, lgamma, fabs, INFINITY

cdef double INF = INFINITY
cdef double NINF = -INFINITY
cdef double _EPS = 1e-17
# one ulp above 1 is 2.2e-16; a tighter test can stall at _MAX_ITER
cdef double _CF_EPS = 3e-16
cdef double _TINY = 1e-300
cdef int _MAX_ITER = 100000
cdef double _EXP_LIMIT = 709.0
cdef double _NARROW = -1e-3

cdef double[20] _GL_NODES = [
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513258,
    -0.8391169718222188, -0.7463319064601508, -0.636053680726515,
    -0.5108670019508271, -0.37370608871541955, -0.2277858511416451,
    -0.07652652113349734, 0.07652652113349734, 0.2277858511416451,
    0.37370608871541955, 0.5108670019508271, 0.636053680726515,
    0.7463319064601508, 0.8391169718222188, 0.9122344282513258,
    0.9639719272779138, 0.9931285991850949,
]
cdef double[20] _GL_WEIGHTS = [
    0.017614007139153273, 0.04060142980038622, 0.06267204833410944,
    0.08327674157670467, 0.10193011981724026, 0.11819453196151825,
    0.13168863844917653, 0.14209610931838187, 0.14917298647260366,
    0.15275338713072578, 0.15275338713072578, 0.14917298647260366,
    0.14209610931838187, 0.13168863844917653, 0.11819453196151825,
    0.10193011981724026, 0.08327674157670467, 0.06267204833410944,
    0.04060142980038622, 0.017614007139153273,
]


cdef inline double c_safe_exp(double x) noexcept nogil:
    if x > _EXP_LIMIT:
        return INF
    return exp(x)


cdef inline double c_logaddexp(double a, double b) noexcept nogil:
    if a == NINF:
        return b
    if b == NINF:
        return a
    if a >= b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


cdef inline double c_logsubexp(double a, double b) noexcept nogil:
    if b == NINF:
        return a
    if b >= a:
        return NINF
    return a + log1p(-exp(b - a))


cdef double c_log_series(double a, double x, double lx) noexcept nogil:
    cdef double term = 1.0 / a
    cdef double total = term
    cdef double ap = a
    cdef int i
    for i in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            break
    return a * lx - x + log(total)


cdef double c_log_contfrac(double a, double x, double lx) noexcept nogil:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / _TINY
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef int i
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _CF_EPS:
            break
    return a * lx - x + log(h)


cdef double c_log_lower_gamma(double a, double lx) noexcept nogil:
    cdef double x
    if lx == NINF:
        return NINF
    if lx > _EXP_LIMIT:
        return lgamma(a)
    x = exp(lx)
    if x < a + 1.0:
        return c_log_series(a, x, lx)
    return c_logsubexp(lgamma(a), c_log_contfrac(a, x, lx))


cdef double c_log_upper_gamma(double a, double lx) noexcept nogil:
    cdef double x
    if lx == NINF:
        return lgamma(a)
    if lx == INF:
        return NINF
    if lx > _EXP_LIMIT:
        return NINF
    x = exp(lx)
    if x >= a + 1.0:
        return c_log_contfrac(a, x, lx)
    return c_logsubexp(lgamma(a), c_log_series(a, x, lx))


cdef double c_log_gl_increment(double a, double l1, double l2) noexcept nogil:
    cdef double half = 0.5 * (l2 - l1)
    cdef double mid = 0.5 * (l2 + l1)
    cdef double[20] vals
    cdef double peak = NINF
    cdef double total = 0.0
    cdef double v
    cdef int i
    for i in range(20):
        v = mid + half * _GL_NODES[i]
        vals[i] = a * v - exp(v)
        if vals[i] > peak:
            peak = vals[i]
    for i in range(20):
        total += _GL_WEIGHTS[i] * exp(vals[i] - peak)
    # log of the width separately: half may underflow for subnormal widths
    return peak + log(total) + log(l2 - l1) - log(2.0)


cdef double c_log_gamma_increment(double a, double l1, double l2) noexcept nogil:
    cdef double m, hi, lo
    if l2 <= l1:
        return NINF
    if l1 == NINF:
        return c_log_lower_gamma(a, l2)
    if l2 == INF or l2 > _EXP_LIMIT:
        return c_log_upper_gamma(a, l1)
    m = log(a + 1.0)
    if l2 <= m:
        hi = c_log_lower_gamma(a, l2)
        lo = c_log_lower_gamma(a, l1)
        if lo - hi > _NARROW:
            return c_log_gl_increment(a, l1, l2)
        return c_logsubexp(hi, lo)
    if l1 >= m:
        hi = c_log_upper_gamma(a, l1)
        lo = c_log_upper_gamma(a, l2)
        if lo - hi > _NARROW:
            return c_log_gl_increment(a, l1, l2)
        return c_logsubexp(hi, lo)
    return c_logaddexp(c_log_gamma_increment(a, l1, m), c_log_gamma_increment(a, m, l2))


cdef inline double c_log_width(double lo, double hi) noexcept nogil:
    if hi == INF:
        return INF
    return c_logsubexp(hi, lo)


cdef double c_log_expm1_ratio(double beta, double delta) noexcept nogil:
    cdef double x
    if beta == 0.0:
        return log(delta)
    x = beta * delta
    if x > 30.0:
        return x - log(beta) + log1p(-exp(-x))
    if x < -30.0:
        return log1p(-exp(x)) - log(-beta)
    return log(expm1(x) / beta)


cdef double c_segment_power_log(long kind, double lc, double alpha, double lo,
                                double hi, double q) noexcept nogil:
    cdef double beta
    if kind == 0:
        return q * lc + c_log_width(lo, hi)
    beta = 1.0 - q * alpha
    if lo == NINF:
        if beta <= 0.0:
            return INF
        return q * lc + beta * hi - log(beta)
    if hi == INF:
        if beta >= 0.0:
            return INF
        return q * lc + beta * lo - log(-beta)
    if hi <= lo:
        return NINF
    return q * lc + beta * lo + c_log_expm1_ratio(beta, hi - lo)


cdef double c_segment_heat_log(long kind, double lc, double alpha, double lo,
                               double hi, double llam, double q) noexcept nogil:
    cdef double lam_c = llam + lc
    cdef double qa, base, lu_lo, lu_hi, inc
    if kind == 0:
        if hi == INF:
            return INF
        return -c_safe_exp(-q * lam_c) + c_log_width(lo, hi)
    qa = q * alpha
    base = -q * lam_c
    lu_lo = NINF if lo == NINF else base + qa * lo
    lu_hi = INF if hi == INF else base + qa * hi
    inc = c_log_gamma_increment(1.0 / qa, lu_lo, lu_hi)
    if inc == NINF:
        return NINF
    return lam_c / alpha - log(qa) + inc


# ---- Python-visible wrappers -------------------------------------------------

def safe_exp(double x):
    return c_safe_exp(x)


def logaddexp(double a, double b):
    return c_logaddexp(a, b)


def logsubexp(double a, double b):
    return c_logsubexp(a, b)


def log_lower_gamma(double a, double lx):
    return c_log_lower_gamma(a, lx)


def log_upper_gamma(double a, double lx):
    return c_log_upper_gamma(a, lx)


def log_gamma_increment(double a, double l1, double l2):
    return c_log_gamma_increment(a, l1, l2)


def log_width(double lo, double hi):
    return c_log_width(lo, hi)


def log_expm1_ratio(double beta, double delta):
    return c_log_expm1_ratio(beta, delta)


def segment_power_log(long kind, double lc, double alpha, double lo, double hi, double q):
    return c_segment_power_log(kind, lc, alpha, lo, hi, q)


def segment_heat_log(long kind, double lc, double alpha, double lo, double hi,
                     double llam, double q):
    return c_segment_heat_log(kind, lc, alpha, lo, hi, llam, q)


def heat_log_batch(const long[:] kind, const double[:] lc, const double[:] alpha,
                   const double[:] lo, const double[:] hi, const double[:] llams,
                   double q, double[:] out):
    cdef Py_ssize_t n = kind.shape[0]
    cdef Py_ssize_t m = llams.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for j in range(m):
            acc = NINF
            for i in range(n):
                acc = c_logaddexp(acc, c_segment_heat_log(kind[i], lc[i], alpha[i],
                                                          lo[i], hi[i], llams[j], q))
            out[j] = acc
    return out


def partial_log_batch(const long[:] kind, const double[:] lc, const double[:] alpha,
                      const double[:] lo, const double[:] hi, const double[:] lts,
                      double[:] out):
    cdef Py_ssize_t n = kind.shape[0]
    cdef Py_ssize_t m = lts.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc, top, lt
    with nogil:
        for j in range(m):
            lt = lts[j]
            acc = NINF
            for i in range(n):
                if lo[i] >= lt:
                    break
                top = hi[i] if hi[i] < lt else lt
                acc = c_logaddexp(acc, c_segment_power_log(kind[i], lc[i], alpha[i],
                                                           lo[i], top, 1.0))
            out[j] = acc
    return out


def evaluate_log_batch(const long[:] kind, const double[:] lc, const double[:] alpha,
                       const double[:] lo, const double[:] hi, const double[:] lts,
                       double[:] out):
    cdef Py_ssize_t n = kind.shape[0]
    cdef Py_ssize_t m = lts.shape[0]
    cdef Py_ssize_t i, j
    cdef double val, lt
    with nogil:
        for j in range(m):
            lt = lts[j]
            val = NINF
            for i in range(n):
                if lt <= hi[i]:
                    val = lc[i] if kind[i] == 0 else lc[i] - alpha[i] * lt
                    break
            out[j] = val
    return out


cdef inline double c_cubic_moment(double a, double b, double c) noexcept nogil:
    return 0.25 - (a + b + c) / 3.0 + (a * b + b * c + c * a) / 2.0 - a * b * c


cdef inline double c_trap(const double[:] u, const double[:] f, Py_ssize_t k) noexcept nogil:
    return 0.5 * (u[k + 1] - u[k]) * (f[k] + f[k + 1])


cdef double c_block4(const double[:] u, const double[:] f, Py_ssize_t k) noexcept nogil:
    cdef double width = u[k + 3] - u[k]
    cdef double t1 = (u[k + 1] - u[k]) / width
    cdef double t2 = (u[k + 2] - u[k]) / width
    cdef double w0 = c_cubic_moment(t1, t2, 1.0) / ((0.0 - t1) * (0.0 - t2) * (0.0 - 1.0))
    cdef double w1 = c_cubic_moment(0.0, t2, 1.0) / (t1 * (t1 - t2) * (t1 - 1.0))
    cdef double w2 = c_cubic_moment(0.0, t1, 1.0) / (t2 * (t2 - t1) * (t2 - 1.0))
    cdef double w3 = c_cubic_moment(0.0, t1, t2) / (1.0 * (1.0 - t1) * (1.0 - t2))
    if w0 < 0.0 or w1 < 0.0 or w2 < 0.0 or w3 < 0.0:
        return c_trap(u, f, k) + c_trap(u, f, k + 1) + c_trap(u, f, k + 2)
    return width * (w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2] + w3 * f[k + 3])


cdef double c_pair(const double[:] u, const double[:] f, Py_ssize_t k) noexcept nogil:
    cdef double h0 = u[k + 1] - u[k]
    cdef double h1 = u[k + 2] - u[k + 1]
    cdef double s = h0 + h1
    cdef double w0 = (2.0 * h0 - h1) * s / (6.0 * h0)
    cdef double w1 = s * s * s / (6.0 * h0 * h1)
    cdef double w2 = (2.0 * h1 - h0) * s / (6.0 * h1)
    if w0 < 0.0 or w2 < 0.0:
        return c_trap(u, f, k) + c_trap(u, f, k + 1)
    return w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2]


def cumsimpson(const double[:] u, const double[:] f, double[:] out):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k
    with nogil:
        out[0] = 0.0
        if n > 1:
            out[1] = c_trap(u, f, 0)
        for k in range(2, n):
            if k % 2 == 0:
                out[k] = out[k - 2] + c_pair(u, f, k - 2)
            else:
                out[k] = out[k - 3] + c_block4(u, f, k - 3)
    return out
