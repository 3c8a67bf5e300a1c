"""Pure-Python reference implementation of the numerical kernels.

Every routine here has a twin in ``_kernels.pyx`` with identical arithmetic.
All quantities are carried as natural logarithms so that segment boundaries
such as ``exp(exp(30))`` never leave floating range.

Segment arrays use the encoding ``kind == 0`` for a constant piece and
``kind == 1`` for a power piece ``c * s**(-alpha)``; ``lo``/``hi`` are the
logs of the segment endpoints (``-inf`` for 0, ``+inf`` for infinity).
"""
import math

INF = math.inf
NINF = -math.inf

_EPS = 1e-17
# one ulp above 1 is 2.2e-16; a tighter test can stall at MAX_ITER
_CF_EPS = 3e-16
_TINY = 1e-300
_MAX_ITER = 100000
_EXP_LIMIT = 709.0
# below this relative size of an increment the difference formula loses digits
_NARROW = -1e-3

# 20-point Gauss-Legendre rule on [-1, 1]
_GL_NODES = (
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513258,
    -0.8391169718222188, -0.7463319064601508, -0.636053680726515,
    -0.5108670019508271, -0.37370608871541955, -0.2277858511416451,
    -0.07652652113349734, 0.07652652113349734, 0.2277858511416451,
    0.37370608871541955, 0.5108670019508271, 0.636053680726515,
    0.7463319064601508, 0.8391169718222188, 0.9122344282513258,
    0.9639719272779138, 0.9931285991850949,
)
_GL_WEIGHTS = (
    0.017614007139153273, 0.04060142980038622, 0.06267204833410944,
    0.08327674157670467, 0.10193011981724026, 0.11819453196151825,
    0.13168863844917653, 0.14209610931838187, 0.14917298647260366,
    0.15275338713072578, 0.15275338713072578, 0.14917298647260366,
    0.14209610931838187, 0.13168863844917653, 0.11819453196151825,
    0.10193011981724026, 0.08327674157670467, 0.06267204833410944,
    0.04060142980038622, 0.017614007139153273,
)


def safe_exp(x):
    if x > _EXP_LIMIT:
        return INF
    return math.exp(x)


def logaddexp(a, b):
    if a == NINF:
        return b
    if b == NINF:
        return a
    if a >= b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def logsubexp(a, b):
    """log(exp(a) - exp(b)) for a >= b; -inf when equal."""
    if b == NINF:
        return a
    if b >= a:
        return NINF
    return a + math.log1p(-math.exp(b - a))


def _log_series(a, x, lx):
    # log gamma(a, x) from sum x^n / (a (a+1) ... (a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            break
    return a * lx - x + math.log(total)


def _log_contfrac(a, x, lx):
    # log Gamma(a, x) by modified Lentz on the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return a * lx - x + math.log(h)


def log_lower_gamma(a, lx):
    """log of gamma(a, x) = int_0^x u^(a-1) e^(-u) du with x = exp(lx)."""
    if lx == NINF:
        return NINF
    if lx > _EXP_LIMIT:
        return math.lgamma(a)
    x = math.exp(lx)
    if x < a + 1.0:
        return _log_series(a, x, lx)
    return logsubexp(math.lgamma(a), _log_contfrac(a, x, lx))


def log_upper_gamma(a, lx):
    """log of Gamma(a, x) = int_x^inf u^(a-1) e^(-u) du with x = exp(lx)."""
    if lx == NINF:
        return math.lgamma(a)
    if lx == INF:
        return NINF
    if lx > _EXP_LIMIT:
        # e^(-x) underflows any representable prefactor
        return NINF
    x = math.exp(lx)
    if x >= a + 1.0:
        return _log_contfrac(a, x, lx)
    return logsubexp(math.lgamma(a), _log_series(a, x, lx))


_LOG2 = math.log(2.0)


def _log_gl_increment(a, l1, l2):
    # direct quadrature in v = log u of exp(a v - e^v)
    half = 0.5 * (l2 - l1)
    mid = 0.5 * (l2 + l1)
    vals = []
    for node in _GL_NODES:
        v = mid + half * node
        vals.append(a * v - math.exp(v))
    peak = max(vals)
    total = 0.0
    for w, val in zip(_GL_WEIGHTS, vals):
        total += w * math.exp(val - peak)
    # log of the width separately: half may underflow for subnormal widths
    return peak + math.log(total) + math.log(l2 - l1) - _LOG2


def log_gamma_increment(a, l1, l2):
    """log of int_{x1}^{x2} u^(a-1) e^(-u) du given l1 = log x1, l2 = log x2."""
    if l2 <= l1:
        return NINF
    if l1 == NINF:
        return log_lower_gamma(a, l2)
    if l2 == INF or l2 > _EXP_LIMIT:
        return log_upper_gamma(a, l1)
    m = math.log(a + 1.0)
    if l2 <= m:
        hi = log_lower_gamma(a, l2)
        lo = log_lower_gamma(a, l1)
        if lo - hi > _NARROW:
            return _log_gl_increment(a, l1, l2)
        return logsubexp(hi, lo)
    if l1 >= m:
        hi = log_upper_gamma(a, l1)
        lo = log_upper_gamma(a, l2)
        if lo - hi > _NARROW:
            return _log_gl_increment(a, l1, l2)
        return logsubexp(hi, lo)
    return logaddexp(log_gamma_increment(a, l1, m), log_gamma_increment(a, m, l2))


def log_width(lo, hi):
    """log(hi - lo) from logs of the endpoints."""
    if hi == INF:
        return INF
    return logsubexp(hi, lo)


def log_expm1_ratio(beta, delta):
    """log(expm1(beta * delta) / beta), the integral of s^(beta-1) over a unit-start range."""
    if beta == 0.0:
        return math.log(delta)
    x = beta * delta
    if x > 30.0:
        return x - math.log(beta) + math.log1p(-math.exp(-x))
    if x < -30.0:
        return math.log1p(-math.exp(x)) - math.log(-beta)
    return math.log(math.expm1(x) / beta)


def segment_power_log(kind, lc, alpha, lo, hi, q):
    """log of int_lo^hi mu(s)^q ds over one segment; +inf when divergent."""
    if kind == 0:
        return q * lc + log_width(lo, hi)
    beta = 1.0 - q * alpha
    if lo == NINF:
        if beta <= 0.0:
            return INF
        return q * lc + beta * hi - math.log(beta)
    if hi == INF:
        if beta >= 0.0:
            return INF
        return q * lc + beta * lo - math.log(-beta)
    if hi <= lo:
        return NINF
    return q * lc + beta * lo + log_expm1_ratio(beta, hi - lo)


def segment_heat_log(kind, lc, alpha, lo, hi, llam, q):
    """log of int_lo^hi exp(-(lam mu(s))^(-q)) ds over one segment."""
    lam_c = llam + lc
    if kind == 0:
        if hi == INF:
            return INF
        return -safe_exp(-q * lam_c) + log_width(lo, hi)
    qa = q * alpha
    base = -q * lam_c
    lu_lo = NINF if lo == NINF else base + qa * lo
    lu_hi = INF if hi == INF else base + qa * hi
    inc = log_gamma_increment(1.0 / qa, lu_lo, lu_hi)
    if inc == NINF:
        return NINF
    return lam_c / alpha - math.log(qa) + inc


def heat_log_batch(kind, lc, alpha, lo, hi, llams, q, out):
    n = len(kind)
    for j in range(len(llams)):
        llam = llams[j]
        acc = NINF
        for i in range(n):
            acc = logaddexp(acc, segment_heat_log(kind[i], lc[i], alpha[i], lo[i], hi[i], llam, q))
        out[j] = acc
    return out


def partial_log_batch(kind, lc, alpha, lo, hi, lts, out):
    """log of int_0^t mu for each t = exp(lts[j]); segments must be ordered."""
    n = len(kind)
    for j in range(len(lts)):
        lt = lts[j]
        acc = NINF
        for i in range(n):
            if lo[i] >= lt:
                break
            top = hi[i] if hi[i] < lt else lt
            acc = logaddexp(acc, segment_power_log(kind[i], lc[i], alpha[i], lo[i], top, 1.0))
        out[j] = acc
    return out


def evaluate_log_batch(kind, lc, alpha, lo, hi, lts, out):
    """log mu(t) on ordered segments with left-open, right-closed pieces."""
    n = len(kind)
    for j in range(len(lts)):
        lt = lts[j]
        val = NINF
        for i in range(n):
            if lt <= hi[i]:
                val = lc[i] if kind[i] == 0 else lc[i] - alpha[i] * lt
                break
        out[j] = val
    return out


def _cubic_moment(a, b, c):
    # int_0^1 (t - a)(t - b)(t - c) dt
    return 0.25 - (a + b + c) / 3.0 + (a * b + b * c + c * a) / 2.0 - a * b * c


def _block4(u, f, k):
    # int_{u[k]}^{u[k+3]} of the cubic through four nodes; trapezoid if any weight < 0
    width = u[k + 3] - u[k]
    t1 = (u[k + 1] - u[k]) / width
    t2 = (u[k + 2] - u[k]) / width
    w0 = _cubic_moment(t1, t2, 1.0) / ((0.0 - t1) * (0.0 - t2) * (0.0 - 1.0))
    w1 = _cubic_moment(0.0, t2, 1.0) / (t1 * (t1 - t2) * (t1 - 1.0))
    w2 = _cubic_moment(0.0, t1, 1.0) / (t2 * (t2 - t1) * (t2 - 1.0))
    w3 = _cubic_moment(0.0, t1, t2) / (1.0 * (1.0 - t1) * (1.0 - t2))
    if w0 < 0.0 or w1 < 0.0 or w2 < 0.0 or w3 < 0.0:
        return (_trap(u, f, k) + _trap(u, f, k + 1) + _trap(u, f, k + 2))
    return width * (w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2] + w3 * f[k + 3])


def _pair(u, f, k):
    # Simpson over [u[k], u[k+2]] for uneven steps; trapezoid if any weight < 0
    h0 = u[k + 1] - u[k]
    h1 = u[k + 2] - u[k + 1]
    s = h0 + h1
    w0 = (2.0 * h0 - h1) * s / (6.0 * h0)
    w1 = s * s * s / (6.0 * h0 * h1)
    w2 = (2.0 * h1 - h0) * s / (6.0 * h1)
    if w0 < 0.0 or w2 < 0.0:
        return _trap(u, f, k) + _trap(u, f, k + 1)
    return w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2]


def _trap(u, f, k):
    return 0.5 * (u[k + 1] - u[k]) * (f[k] + f[k + 1])


def cumsimpson(u, f, out):
    """Running integral of f over u: Simpson pairs to even nodes, a four-node
    cubic block closing odd nodes, the trapezoid for the first interval."""
    n = len(u)
    out[0] = 0.0
    if n > 1:
        out[1] = _trap(u, f, 0)
    for k in range(2, n):
        if k % 2 == 0:
            out[k] = out[k - 2] + _pair(u, f, k - 2)
        else:
            out[k] = out[k - 3] + _block4(u, f, k - 3)
    return out
