"""Hot numeric kernels.

Every kernel here is plain numpy/Python that numba can compile. When the
numba backend is active (see ``_accel``) they are ``@njit``-compiled;
``SMOOTHDISC_NO_NUMBA=1`` keeps them interpreted. The brute-force search
additionally has a vectorised numpy path, used as the fallback and as an
independent cross-check of the Gray-code kernel.
"""
import numpy as np

from ._accel import HAS_NUMBA, maybe_njit

WALK_OK = 0
WALK_NUMERICAL_FAILURE = 1


# --------------------------------------------------------------------------
# exhaustive discrepancy search
# --------------------------------------------------------------------------

@maybe_njit
def _gray_code_search(V, resync):
    # x[n-1] is pinned to +1: x and -x have the same discrepancy.
    d, n = V.shape
    x = np.ones(n)
    y = np.zeros(d)
    for i in range(d):
        for j in range(n):
            y[i] += V[i, j]
    best = 0.0
    for i in range(d):
        a = abs(y[i])
        if a > best:
            best = a
    best_code = 0
    total = 1 << (n - 1)
    for k in range(1, total):
        j = 0
        while not (k >> j) & 1:
            j += 1
        x[j] = -x[j]
        if k % resync == 0:
            for i in range(d):
                s = 0.0
                for c in range(n):
                    s += V[i, c] * x[c]
                y[i] = s
        else:
            step = 2.0 * x[j]
            for i in range(d):
                y[i] += step * V[i, j]
        val = 0.0
        for i in range(d):
            a = abs(y[i])
            if a > val:
                val = a
                if val >= best:
                    break
        if val < best:
            best = val
            best_code = k ^ (k >> 1)
    return best, best_code


def _gray_witness(code, n):
    x = np.ones(n)
    for j in range(n - 1):
        if (code >> j) & 1:
            x[j] = -1.0
    return x


def brute_force_gray(V, resync=4096):
    """Exact min of ``||V x||_inf``, Gray-code enumeration (compiled path)."""
    V = np.ascontiguousarray(V, dtype=np.float64)
    best, code = _gray_code_search(V, resync)
    return float(best), _gray_witness(int(code), V.shape[1])


def brute_force_numpy(V, chunk=1 << 15):
    """Exact min of ``||V x||_inf`` by chunked matrix products (fallback path)."""
    V = np.asarray(V, dtype=np.float64)
    d, n = V.shape
    free = n - 1
    total = 1 << free
    last = V[:, n - 1]
    shifts = np.arange(free, dtype=np.int64)
    best, best_x = np.inf, None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        signs = 1.0 - 2.0 * bits
        vals = np.abs(signs @ V[:, :free].T + last).max(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best = float(vals[k])
            best_x = np.append(signs[k], 1.0)
    return best, best_x


def brute_force(V):
    if HAS_NUMBA:
        return brute_force_gray(V)
    return brute_force_numpy(V)


# --------------------------------------------------------------------------
# Gram-Schmidt walk
# --------------------------------------------------------------------------

@maybe_njit
def walk_direction(V, alive, pivot, rcond, tol):
    """Update direction with ``u[pivot] = 1`` and minimal ``||V u||_2``.

    Coefficients on the other alive coordinates are the minimum-norm
    least-squares solution; frozen coordinates get 0. Returns ``(u, ok)``
    with ``ok`` false when the normal-equation residual exceeds ``tol``.
    """
    d, n = V.shape
    u = np.zeros(n)
    u[pivot] = 1.0
    m = 0
    for i in range(n):
        if alive[i] and i != pivot:
            m += 1
    if m == 0:
        return u, True
    idx = np.empty(m, dtype=np.int64)
    k = 0
    for i in range(n):
        if alive[i] and i != pivot:
            idx[k] = i
            k += 1
    VA = np.empty((d, m))
    for c in range(m):
        VA[:, c] = V[:, idx[c]]
    vp = V[:, pivot].copy()
    coef = np.linalg.lstsq(VA, -vp, rcond)[0]
    r = VA @ coef + vp
    g = VA.T @ r
    ok = np.all(np.isfinite(coef)) and np.sqrt(np.sum(g * g)) <= tol
    for c in range(m):
        u[idx[c]] = coef[c]
    return u, ok


@maybe_njit
def walk_step_sizes(z, u, alive):
    """Largest ``delta_plus, delta_minus > 0`` keeping ``z +/- delta u`` in the cube."""
    n = z.shape[0]
    dplus = np.inf
    dminus = np.inf
    for i in range(n):
        if not alive[i]:
            continue
        ui = u[i]
        if ui > 1e-15:
            a = (1.0 - z[i]) / ui
            b = (1.0 + z[i]) / ui
        elif ui < -1e-15:
            a = (-1.0 - z[i]) / ui
            b = (z[i] - 1.0) / ui
        else:
            continue
        if a < dplus:
            dplus = a
        if b < dminus:
            dminus = b
    return dplus, dminus


@maybe_njit
def walk_move(z, u, alive, delta, snap):
    """Apply ``z += delta * u`` and freeze coordinates reaching the cube faces.

    Returns the number of coordinates frozen by this move.
    """
    n = z.shape[0]
    frozen = 0
    # the coordinate that defined the step length must freeze even if
    # roundoff leaves it a hair inside the face
    bind = -1
    bind_gap = np.inf
    for i in range(n):
        if not alive[i]:
            continue
        z[i] += delta * u[i]
        gap = 1.0 - abs(z[i])
        if gap < bind_gap:
            bind_gap = gap
            bind = i
    for i in range(n):
        if not alive[i]:
            continue
        if abs(z[i]) >= 1.0 - snap or i == bind:
            z[i] = 1.0 if z[i] >= 0.0 else -1.0
            alive[i] = False
            frozen += 1
    return frozen


@maybe_njit
def gs_walk_kernel(V, coins, rcond, tol, snap):
    """Run one Gram-Schmidt walk from the origin.

    ``coins`` holds one uniform draw per step (``len(coins) >= n``).
    Returns ``(x, steps, status)``.
    """
    d, n = V.shape
    z = np.zeros(n)
    alive = np.ones(n, dtype=np.bool_)
    n_alive = n
    pivot = n - 1
    steps = 0
    status = WALK_OK
    while n_alive > 0:
        if not alive[pivot]:
            pivot = n - 1
            while not alive[pivot]:
                pivot -= 1
        u, ok = walk_direction(V, alive, pivot, rcond, tol)
        if not ok:
            status = WALK_NUMERICAL_FAILURE
            break
        dplus, dminus = walk_step_sizes(z, u, alive)
        if coins[steps] < dminus / (dplus + dminus):
            delta = dplus
        else:
            delta = -dminus
        n_alive -= walk_move(z, u, alive, delta, snap)
        steps += 1
    return z, steps, status


@maybe_njit
def gs_walk_batch(V, coins, rcond, tol, snap):
    """Run ``coins.shape[0]`` independent walks; row ``s`` uses ``coins[s]``."""
    n = V.shape[1]
    reps = coins.shape[0]
    out = np.empty((reps, n))
    steps = np.empty(reps, dtype=np.int64)
    status = np.empty(reps, dtype=np.int64)
    for s in range(reps):
        x, k, st = gs_walk_kernel(V, coins[s], rcond, tol, snap)
        out[s] = x
        steps[s] = k
        status[s] = st
    return out, steps, status
