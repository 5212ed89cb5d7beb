# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel for the truncated spectral system.

Runs whole multi-step segments of the interaction-picture RK4 scheme in
C, including the quadratic convolution (direct O(N²) summation over the
stored half-spectrum — exactly the truncated convolution, so it matches
the dealiased transform path to rounding) and the per-step two-invariant
Newton projection enforcing L² and the energy invariant.

The pure-numpy fallback in :mod:`ostrovsky.integrate` implements the
same algorithm; this module exists because the ensemble suites take
~1e8 steps on systems small enough that interpreter and FFT dispatch
overhead dominate the arithmetic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, sqrt

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

ctypedef double complex cplx

DEF TWO_PI = 6.283185307179586476925286766559


cdef void _square_spectrum(const cplx* a, cplx* c, int N) noexcept nogil:
    """c[k] = sum over k1+k2=k, 0<|ki|<=N of a_{k1} a_{k2}, k = 0..N."""
    cdef int k, j, lo
    cdef cplx s
    for k in range(N + 1):
        s = 0
        lo = k - N
        if lo < 1:
            lo = 1
        for j in range(lo, k):          # both indices positive
            s = s + a[j - 1] * a[k - j - 1]
        for j in range(k + 1, N + 1):   # one positive, one negative (mirrored)
            s = s + 2.0 * a[j - 1] * conj(a[j - k - 1])
        c[k] = s


cdef void _nonlinear(const cplx* a, cplx* out, cplx* c, int N,
                     double sign) noexcept nogil:
    """out = sign * (-i k / 2) * (u²)^_k — the truncated -P_N(u u_x)."""
    cdef int k
    _square_spectrum(a, c, N)
    for k in range(1, N + 1):
        out[k - 1] = sign * (-0.5j) * k * c[k]


cdef double _l2sq(const cplx* a, int N) noexcept nogil:
    """Squared L² norm 4π Σ|a_k|²."""
    cdef int k
    cdef double s = 0.0
    for k in range(N):
        s += creal(a[k]) * creal(a[k]) + cimag(a[k]) * cimag(a[k])
    return 2.0 * TWO_PI * s


cdef double _energy_cached(const cplx* a, const cplx* c, int N) noexcept nogil:
    """Energy invariant assuming c already holds (u²)^ of a."""
    cdef int k
    cdef double w, quad = 0.0, cub = 0.0
    for k in range(1, N + 1):
        w = (<double> k) * k - 1.0 / ((<double> k) * k)
        quad += w * (creal(a[k - 1]) * creal(a[k - 1])
                     + cimag(a[k - 1]) * cimag(a[k - 1]))
        cub += creal(c[k] * conj(a[k - 1]))
    return TWO_PI * quad + 2.0 * TWO_PI * cub / 6.0


cdef double _energy(const cplx* a, cplx* c, int N) noexcept nogil:
    """Energy invariant 2π Σ(k²-1/k²)|a_k|² + (1/6)∫u³; fills c with (u²)^."""
    _square_spectrum(a, c, N)
    return _energy_cached(a, c, N)


cdef double _rdot(const cplx* z, const cplx* w, int N) noexcept nogil:
    """Real inner product of C^N viewed as R^{2N}."""
    cdef int k
    cdef double s = 0.0
    for k in range(N):
        s += creal(z[k]) * creal(w[k]) + cimag(z[k]) * cimag(w[k])
    return s


cdef int _project(cplx* a, cplx* c, cplx* d2, cplx* x, int N,
                  double c1_target, double c2_target, double tol,
                  int max_iter) noexcept nogil:
    """Newton projection of a onto {L²=c1_target, energy=c2_target}.

    Search directions are the constraint gradients at the predictor:
    d1 = a (gradient of Σ|a|² up to scale) and d2 = 4π w a + 2π (u²)^.
    Overwrites a with the projected point.  Returns the iteration count,
    or -1 if the 2×2 system degenerated and the single-constraint
    fallback was used (gradients parallel, e.g. a single high mode where
    both invariants coincide up to scale).

    Cost control: the entry convolution doubles as the first residual's
    (c is maintained as the conv of x), and when the pre-update residual
    is already below sqrt(tol)·scale the quadratic Newton contraction
    puts the post-update point within tol·scale, so the verification
    convolution is skipped.  On the ordinary path — predictor one RK
    local error off the manifold — projection therefore costs a single
    convolution.
    """
    cdef int k, it
    cdef double w, g1, g2, j11, j12, j21, j22, det, dl1, dl2
    cdef double lam1 = 0.0, lam2 = 0.0, scale1, scale2, skip1, skip2
    cdef bint small
    cdef cplx grad2k

    _square_spectrum(a, c, N)
    for k in range(1, N + 1):
        w = (<double> k) * k - 1.0 / ((<double> k) * k)
        d2[k - 1] = 2.0 * TWO_PI * w * a[k - 1] + TWO_PI * c[k]
    scale1 = fabs(c1_target)
    if scale1 < 1.0:
        scale1 = 1.0
    scale2 = fabs(c2_target)
    if scale2 < 1.0:
        scale2 = 1.0
    skip1 = sqrt(tol) * scale1
    skip2 = sqrt(tol) * scale2

    for k in range(N):
        x[k] = a[k]
    for it in range(max_iter):
        g1 = _l2sq(x, N) - c1_target
        g2 = _energy_cached(x, c, N) - c2_target
        if fabs(g1) < tol * scale1 and fabs(g2) < tol * scale2:
            for k in range(N):
                a[k] = x[k]
            return it
        small = fabs(g1) < skip1 and fabs(g2) < skip2
        # Gradients at the current iterate (c holds (u²)^ of x).
        j11 = 0.0
        j12 = 0.0
        j21 = 0.0
        j22 = 0.0
        for k in range(1, N + 1):
            w = (<double> k) * k - 1.0 / ((<double> k) * k)
            grad2k = 2.0 * TWO_PI * w * x[k - 1] + TWO_PI * c[k]
            j11 += 2.0 * TWO_PI * 2.0 * (
                creal(x[k - 1]) * creal(a[k - 1])
                + cimag(x[k - 1]) * cimag(a[k - 1]))
            j12 += 2.0 * TWO_PI * 2.0 * (
                creal(x[k - 1]) * creal(d2[k - 1])
                + cimag(x[k - 1]) * cimag(d2[k - 1]))
            j21 += creal(grad2k) * creal(a[k - 1]) + cimag(grad2k) * cimag(a[k - 1])
            j22 += creal(grad2k) * creal(d2[k - 1]) + cimag(grad2k) * cimag(d2[k - 1])
        det = j11 * j22 - j12 * j21
        if fabs(det) <= 1e-14 * (fabs(j11 * j22) + fabs(j12 * j21)) + 1e-300:
            # Parallel gradients: relax along d1 = a for the L² constraint.
            if fabs(j11) <= 1e-300:
                for k in range(N):
                    a[k] = x[k]
                return -1
            lam1 += -g1 / j11
            for k in range(N):
                x[k] = a[k] + lam1 * a[k] + lam2 * d2[k]
            _square_spectrum(x, c, N)
            continue
        dl1 = (-g1 * j22 + g2 * j12) / det
        dl2 = (-g2 * j11 + g1 * j21) / det
        lam1 += dl1
        lam2 += dl2
        for k in range(N):
            x[k] = a[k] + lam1 * a[k] + lam2 * d2[k]
        if small:
            for k in range(N):
                a[k] = x[k]
            return it + 1
        _square_spectrum(x, c, N)
    for k in range(N):
        a[k] = x[k]
    return max_iter


def evolve_segment(cnp.ndarray[cplx, ndim=1] a0,
                   cnp.ndarray[double, ndim=1] m,
                   double t0, double dt, long nsteps, double nl_sign,
                   bint enforce_invariants,
                   double l2sq_target, double energy_target,
                   double newton_tol=1e-13, int newton_max_iter=25):
    """Advance the spectrum nsteps × dt from absolute time t0.

    Parameters mirror the pure-python fallback: `m` is the dispersion
    table (pre-negated by the caller for backward runs), `nl_sign`
    multiplies the nonlinearity, and when `enforce_invariants` is set
    every step ends with the projection onto the configured L²/energy
    levels (targets fixed by the caller at trajectory start).

    Returns ``(a_final, steps_done)``; ``steps_done < nsteps`` signals a
    non-finite amplitude produced at step index ``steps_done`` (the
    returned array then holds the last finite state).
    """
    cdef int N = a0.shape[0]
    cdef long k_step, done = 0
    cdef int i, ok
    cdef double t
    cdef cplx ih

    cdef cnp.ndarray[cplx, ndim=1] a_arr = a0.copy()
    cdef cnp.ndarray[cplx, ndim=1] v_arr = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] fh_arr = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] ph_arr = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] w1 = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] w2 = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] g1a = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] g2a = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] g3a = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] g4a = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] csq = np.empty(N + 1, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] d2a = np.empty(N, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] xw = np.empty(N, dtype=np.complex128)

    cdef cplx* a = &a_arr[0]
    cdef cplx* v = &v_arr[0]
    cdef cplx* fh = &fh_arr[0]
    cdef cplx* ph = &ph_arr[0]
    cdef cplx* s1 = &w1[0]
    cdef cplx* s2 = &w2[0]
    cdef cplx* g1 = &g1a[0]
    cdef cplx* g2 = &g2a[0]
    cdef cplx* g3 = &g3a[0]
    cdef cplx* g4 = &g4a[0]
    cdef cplx* c = &csq[0]
    cdef cplx* d2 = &d2a[0]
    cdef cplx* x = &xw[0]
    cdef double* mm = &m[0]

    if nsteps == 0:
        return a_arr, 0

    with nogil:
        for i in range(N):
            fh[i] = cexp(-1j * mm[i] * (dt / 2.0))
        for k_step in range(nsteps):
            t = t0 + k_step * dt
            # Phase at the step start from absolute time (no accumulation);
            # half/full-step phases by one rounding step off the anchor.
            for i in range(N):
                ph[i] = cexp(-1j * mm[i] * t)
                v[i] = conj(ph[i]) * a[i]

            # Stage 1 at t.
            for i in range(N):
                s1[i] = ph[i] * v[i]
            _nonlinear(s1, g1, c, N, nl_sign)
            for i in range(N):
                g1[i] = conj(ph[i]) * g1[i]

            # Stages 2 and 3 at t + dt/2.
            for i in range(N):
                ph[i] = ph[i] * fh[i]
                s2[i] = ph[i] * (v[i] + 0.5 * dt * g1[i])
            _nonlinear(s2, g2, c, N, nl_sign)
            for i in range(N):
                g2[i] = conj(ph[i]) * g2[i]
                s2[i] = ph[i] * (v[i] + 0.5 * dt * g2[i])
            _nonlinear(s2, g3, c, N, nl_sign)
            for i in range(N):
                g3[i] = conj(ph[i]) * g3[i]

            # Stage 4 at t + dt.
            for i in range(N):
                ph[i] = ph[i] * fh[i]
                s2[i] = ph[i] * (v[i] + dt * g3[i])
            _nonlinear(s2, g4, c, N, nl_sign)
            for i in range(N):
                g4[i] = conj(ph[i]) * g4[i]

            # Combine and return to the physical frame at t + dt.
            ok = 1
            for i in range(N):
                v[i] = v[i] + (dt / 6.0) * (g1[i] + 2.0 * g2[i]
                                            + 2.0 * g3[i] + g4[i])
                a[i] = ph[i] * v[i]
                if not (isfinite(creal(a[i])) and isfinite(cimag(a[i]))):
                    ok = 0
            if not ok:
                break
            if enforce_invariants:
                _project(a, c, d2, x, N, l2sq_target, energy_target,
                         newton_tol, newton_max_iter)
                ok = 1
                for i in range(N):
                    if not (isfinite(creal(a[i])) and isfinite(cimag(a[i]))):
                        ok = 0
                if not ok:
                    break
            done = k_step + 1

    if done < nsteps:
        # Roll back to the last finite state: re-run the good prefix.
        if done == 0:
            return a0.copy(), 0
        out, redone = evolve_segment(a0, m, t0, dt, done, nl_sign,
                                     enforce_invariants, l2sq_target,
                                     energy_target, newton_tol,
                                     newton_max_iter)
        return out, done
    return a_arr, done
