"""Bracketing root finders and a golden-section maximiser."""

import math

__all__ = ["BracketError", "bisect", "expand_bracket", "golden_section_max", "sign_changes"]

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQ = (3 - math.sqrt(5)) / 2


class BracketError(ValueError):
    """No sign change / no interior extremum where one was required."""


def bisect(f, lo, hi, xtol=1e-8, max_iter=200):
    """Root of ``f`` on ``[lo, hi]`` by bisection, to bracket width ``xtol``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:.3e}, {fhi:.3e}")
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi)


def expand_bracket(f, start, step, max_doublings=60):
    """Double ``step`` from ``start`` until ``f`` changes sign.

    Returns ``(lo, hi)`` with a sign change of ``f`` between them, the last
    two points visited.
    """
    lo, flo = start, f(start)
    hi = start + step
    for _ in range(max_doublings):
        fhi = f(hi)
        if (fhi > 0) != (flo > 0) or fhi == 0:
            return lo, hi
        lo, flo = hi, fhi
        step *= 2
        hi = lo + step
    raise BracketError(f"no sign change found starting from {start}")


def golden_section_max(f, a, b, xtol=1e-8):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x_max, f(x_max))``."""
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI_SQ * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    x = c if fc > fd else d
    fx = max(fc, fd)
    return x, fx


def sign_changes(xs, ys):
    """Consecutive pairs ``(x_i, x_{i+1})`` where ``ys`` changes sign."""
    out = []
    for i in range(len(xs) - 1):
        y0, y1 = ys[i], ys[i + 1]
        if y0 == 0:
            continue
        if y1 == 0 or (y0 > 0) != (y1 > 0):
            out.append((xs[i], xs[i + 1]))
    return out
