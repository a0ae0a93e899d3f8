"""Precision contexts and small numeric helpers shared by all modules."""

from functools import lru_cache

from mpmath import MPContext

DEFAULT_PRECISION = 256
ZERO_GUARD_BITS = 20


@lru_cache(maxsize=None)
def get_mp(precision):
    """A private mpmath context with fixed binary precision.

    Numbers created by a context keep a reference to it, so arithmetic on them
    does not depend on (or mutate) the global ``mpmath.mp`` state.
    """
    if precision < 32:
        raise ValueError(f"precision must be at least 32 bits, got {precision}")
    mp = MPContext()
    mp.prec = int(precision)
    return mp


def half_eps(precision):
    """2^(-precision/2): the library-wide relative tolerance."""
    return get_mp(precision).ldexp(1, -(precision // 2))


def zero_threshold(precision):
    """Relative size below which a cancelled sum is treated as exact zero."""
    return get_mp(precision).ldexp(1, -precision + ZERO_GUARD_BITS)


def log10_abs(x, mp):
    if x == 0:
        return None
    return float(mp.log10(abs(x)))


def decimal_string(x, mp):
    """Decimal string with enough digits to round-trip at ``mp.prec``."""
    digits = int(mp.prec * 0.30103) + 3
    return mp.nstr(x, digits, min_fixed=-5, max_fixed=digits)


def complex_to_json(c, mp):
    c = mp.mpc(c)
    return {
        "re": decimal_string(c.real, mp),
        "im": decimal_string(c.imag, mp),
        "log10_abs": log10_abs(c, mp),
    }


def complex_from_json(d, mp):
    return mp.mpc(mp.mpf(d["re"]), mp.mpf(d["im"]))


def real_to_json(x, mp):
    x = mp.mpf(x)
    return {"value": decimal_string(x, mp), "log10_abs": log10_abs(x, mp)}
