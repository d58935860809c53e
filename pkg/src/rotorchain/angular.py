"""Angular momentum coupling coefficients for integer quantum numbers."""

from functools import lru_cache
from math import factorial, sqrt


def _triangle_ok(j1: int, j2: int, j3: int) -> bool:
    return abs(j1 - j2) <= j3 <= j1 + j2


@lru_cache(maxsize=None)
def clebsch_gordan(j1: int, m1: int, j2: int, m2: int, jj: int, mm: int) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | jj mm>.

    Only integer angular momenta are supported. Quantum numbers violating
    the selection rules (projection sum, triangle inequality, |m| <= j)
    give 0.0 rather than an error.
    """
    for name, val in (("j1", j1), ("m1", m1), ("j2", j2), ("m2", m2),
                      ("jj", jj), ("mm", mm)):
        if not isinstance(val, (int,)):
            raise TypeError(f"{name} must be an integer, got {val!r}")
    if j1 < 0 or j2 < 0 or jj < 0:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(mm) > jj:
        return 0.0
    if mm != m1 + m2 or not _triangle_ok(j1, j2, jj):
        return 0.0

    # Racah's closed form as a single alternating sum.
    pref = (2 * jj + 1) * (
        factorial(j1 + j2 - jj)
        * factorial(j1 - j2 + jj)
        * factorial(-j1 + j2 + jj)
    ) / factorial(j1 + j2 + jj + 1)
    pref *= (
        factorial(jj + mm) * factorial(jj - mm)
        * factorial(j1 - m1) * factorial(j1 + m1)
        * factorial(j2 - m2) * factorial(j2 + m2)
    )

    k_min = max(0, j2 - jj - m1, j1 - jj + m2)
    k_max = min(j1 + j2 - jj, j1 - m1, j2 + m2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        denom = (
            factorial(k)
            * factorial(j1 + j2 - jj - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(jj - j2 + m1 + k)
            * factorial(jj - j1 - m2 + k)
        )
        total += (-1) ** k / denom
    return sqrt(pref) * total
